use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homgeom::{mean_curvature, ricci_operator, AdaptedFrame, HomogeneousSpace, InvariantMetric};
use crate::liealg::Subspace;
use crate::linalg::{self, Mat};

use super::beta::{BetaData, BetaSource};

/// Rewrites a label given in the algebra's own basis into the adapted frame.
pub fn beta_in_frame(frame: &AdaptedFrame, beta: &Mat, source: BetaSource, crit: Option<f64>) -> Result<BetaData> {
    let b = frame.endo_to_frame(beta)?;
    BetaData::from_matrix(b, source, crit)
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub samples: usize,
    pub spread: f64,
    /// Threshold on the derivation residual below which q·β⁺·q⁻¹ counts as a derivation.
    pub derivation_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 50,
            spread: 0.5,
            derivation_tol: 1e-8,
        }
    }
}

/// Residuals for the three structural properties of a stratum label.
/// Gauge-dependent fields are `None` for flow-estimated labels.
#[derive(Debug, Clone, Serialize)]
pub struct BetaReport {
    pub source: BetaSource,
    pub identity_residual: f64,
    pub beta_plus_min_eigenvalue: f64,
    pub kernel_residual: Option<f64>,
    pub isotropy_in_kernel: Option<f64>,
    pub derivations_checked: usize,
    pub derivation_lower_residual: Option<f64>,
    pub derivation_trace_residual: Option<f64>,
    pub samples: usize,
    pub ricci_estimate_min: Option<f64>,
    pub equality_cases: usize,
    pub equality_max_residual: Option<f64>,
    pub pass: bool,
}

/// Checks a label expressed in the adapted frame of (`space`, `metric`).
pub fn verify_beta<R: Rng + ?Sized>(
    space: &HomogeneousSpace,
    metric: &InvariantMetric,
    beta: &BetaData,
    opts: &VerifyOptions,
    rng: &mut R,
) -> Result<BetaReport> {
    let frame = space.adapted(metric)?;
    let fs = &frame.space;
    let n = fs.dim();
    let k = fs.dim_h();
    let p = fs.dim_m();
    if beta.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: beta.dim(),
        });
    }
    let beta_m = beta.restrict_trailing(p)?;
    let ids = beta.identity_residuals();
    let identity_residual = ids[0].max(ids[1]).max(ids[2]);
    let bp = beta.beta_plus();
    let min_eig = linalg::min_eigenvalue(bp);
    let mut report = BetaReport {
        source: beta.source(),
        identity_residual,
        beta_plus_min_eigenvalue: min_eig,
        kernel_residual: None,
        isotropy_in_kernel: None,
        derivations_checked: 0,
        derivation_lower_residual: None,
        derivation_trace_residual: None,
        samples: 0,
        ricci_estimate_min: None,
        equality_cases: 0,
        equality_max_residual: None,
        pass: false,
    };
    let mut pass = identity_residual <= 1e-7 && min_eig >= -beta.positivity_slack();
    if beta.source() == BetaSource::Flow {
        report.pass = pass;
        return Ok(report);
    }

    // (1) ker β⁺ is the orthogonal complement of the nilradical; h lies in it.
    let alg = fs.algebra();
    let nil = alg.nilradical()?;
    let u = nil.complement(&Mat::identity(n, n), alg.tol());
    let (vals, vecs) = linalg::sorted_eigen(bp);
    let kernel_cols: Vec<_> = (0..n)
        .filter(|&i| vals[i].abs() < 1e-6)
        .map(|i| vecs.column(i).into_owned())
        .collect();
    let kernel = if kernel_cols.is_empty() {
        Subspace::zero(n)
    } else {
        Subspace::span(&linalg::hstack(n, &kernel_cols), 1e-9)
    };
    let kernel_residual = if kernel.dim() == u.dim() {
        kernel.equality_residual(&u)
    } else {
        1.0
    };
    let iso = (0..k)
        .map(|i| bp.column(i).norm())
        .fold(0.0, f64::max);
    pass &= kernel_residual <= 1e-6 && iso <= 1e-9;
    report.kernel_residual = Some(kernel_residual);
    report.isotropy_in_kernel = Some(iso);

    // (2) Derivations lie in sl_β.
    let mut ders = alg.derivation_space();
    ders.extend((0..n).map(|i| alg.ad_basis(i)));
    let mut lower: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for d in &ders {
        let scale = linalg::fro(d).max(1e-300);
        lower = lower.max(beta.q_beta_residual(d) / scale);
        trace = trace.max((d * beta.beta()).trace().abs() / scale);
    }
    pass &= lower <= 1e-8 && trace <= 1e-8;
    report.derivations_checked = ders.len();
    report.derivation_lower_residual = Some(lower);
    report.derivation_trace_residual = Some(trace);

    // (3) tr(Ric_{q·ḡ} q β⁺ q⁻¹) + ‖H‖² ≥ 0 over Q_β^H, equality when q β⁺ q⁻¹ is a derivation.
    let gens = beta_m.q_beta_commutant_basis(&fs.isotropy_actions());
    let bp_h = bp.view((0, 0), (k, k)).into_owned();
    let mut min_val = f64::INFINITY;
    let mut eq_max: f64 = 0.0;
    let mut eq_cases = 0;
    for s in 0..opts.samples.max(1) {
        let q = if s == 0 {
            Mat::identity(p, p)
        } else {
            beta_m.sample_q(&gens, opts.spread, rng)
        };
        let qi = linalg::inverse(&q).ok_or_else(|| Error::Degenerate { what: "sample q".into() })?;
        let g = InvariantMetric::new(linalg::sym(&(qi.transpose() * &qi)))?;
        let ric = ricci_operator(fs, &g)?;
        let h = mean_curvature(fs, &g).h;
        let conj = &q * beta_m.beta_plus() * &qi;
        let val = (&ric * &conj).trace() + 2.0 * h;
        min_val = min_val.min(val);
        let d = linalg::block_diag(&bp_h, &conj);
        if alg.derivation_residual(&d) <= opts.derivation_tol * linalg::fro(&d).max(1.0) {
            eq_cases += 1;
            eq_max = eq_max.max(val.abs());
        }
    }
    pass &= min_val >= -1e-7 && eq_max <= 1e-7;
    report.samples = opts.samples.max(1);
    report.ricci_estimate_min = Some(min_val);
    report.equality_cases = eq_cases;
    report.equality_max_residual = Some(eq_max);
    report.pass = pass;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homgeom::fixtures::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(space: HomogeneousSpace, beta: Mat) -> BetaReport {
        let metric = InvariantMetric::identity(space.dim_m());
        let frame = space.adapted(&metric).unwrap();
        let b = beta_in_frame(&frame, &beta, BetaSource::Catalog, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        verify_beta(&space, &metric, &b, &VerifyOptions::default(), &mut rng).unwrap()
    }

    #[test]
    fn axb_label() {
        let r = run(HomogeneousSpace::group(axb()), diag(&[-1.0, 0.0]));
        assert!(r.pass, "{r:?}");
        assert!(r.equality_cases >= 1);
    }

    #[test]
    fn heisenberg_label() {
        let r = run(HomogeneousSpace::group(h3()), diag(&[-1.0, -1.0, 1.0]));
        assert!(r.pass, "{r:?}");
        assert!(r.equality_cases >= 1);
    }

    #[test]
    fn semisimple_label() {
        // A scalar label is the same in every frame.
        let r = run(HomogeneousSpace::group(sl2()), Mat::identity(3, 3) / -3.0);
        assert!(r.pass, "{r:?}");
        assert!(r.ricci_estimate_min.unwrap().abs() < 1e-12);
    }

    #[test]
    fn wrong_label_fails() {
        let r = run(HomogeneousSpace::group(axb()), diag(&[0.0, -1.0]));
        assert!(!r.pass);
    }
}
