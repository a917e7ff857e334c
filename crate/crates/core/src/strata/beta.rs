use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaSource {
    Flow,
    Catalog,
}

/// A stratum label: a symmetric matrix in a background-orthonormal basis
/// with tr β = −1, together with β⁺ = β/‖β‖² + Id and its spectral data.
#[derive(Debug, Clone)]
pub struct BetaData {
    beta: Mat,
    norm2: f64,
    beta_plus: Mat,
    eigenvalues: Vector,
    eigenvectors: Mat,
    /// Eigenvalue clusters in ascending order: (value, eigenvector indices).
    blocks: Vec<(f64, Vec<usize>)>,
    source: BetaSource,
    criticality_residual: Option<f64>,
}

/// `{"beta": [[...]], "source": "catalog" | "flow", "criticality_residual": x}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaJson {
    pub beta: Vec<Vec<f64>>,
    pub source: BetaSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criticality_residual: Option<f64>,
}

const CLUSTER_TOL: f64 = 1e-6;

/// Tolerance on tr β = −1 and β⁺ ⪰ 0. A flow estimate is only as accurate as
/// its criticality residual allows; the factor covers the Hessian conditioning
/// seen on the catalog.
fn positivity_slack(source: BetaSource, criticality_residual: Option<f64>) -> f64 {
    match source {
        BetaSource::Catalog => 1e-9,
        BetaSource::Flow => criticality_residual.unwrap_or(0.0).max(1e-9) * 100.0,
    }
}

impl BetaData {
    /// Validates symmetry, tr β = −1 and β⁺ ⪰ 0. Positivity is checked to
    /// 1e−9 for catalog labels and to the reported criticality residual for
    /// flow estimates.
    pub fn from_matrix(beta: Mat, source: BetaSource, criticality_residual: Option<f64>) -> Result<Self> {
        if beta.nrows() != beta.ncols() || beta.nrows() == 0 {
            return Err(Error::invalid("β must be a nonempty square matrix"));
        }
        let n = beta.nrows();
        let asym = linalg::max_abs(&(&beta - beta.transpose()));
        if asym > 1e-9 {
            return Err(Error::verification("β symmetric", asym));
        }
        let beta = linalg::sym(&beta);
        let tr_res = (beta.trace() + 1.0).abs();
        let slack = positivity_slack(source, criticality_residual);
        if tr_res > slack.max(1e-9) {
            return Err(Error::verification("tr β = −1", tr_res));
        }
        let norm2 = beta.norm_squared();
        let pos = linalg::min_eigenvalue(&(&beta / norm2 + Mat::identity(n, n)));
        if pos < -slack {
            return Err(Error::verification("β⁺ positive semidefinite", -pos));
        }
        Ok(Self::from_block(beta, norm2, source, criticality_residual))
    }

    pub fn from_json(json: &BetaJson) -> Result<Self> {
        let beta = linalg::from_rows(&json.beta).ok_or_else(|| Error::Schema("ragged β matrix".into()))?;
        Self::from_matrix(beta, json.source, json.criticality_residual)
    }

    pub fn to_json(&self) -> BetaJson {
        BetaJson {
            beta: linalg::to_rows(&self.beta),
            source: self.source,
            criticality_residual: self.criticality_residual,
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.nrows()
    }

    pub fn beta(&self) -> &Mat {
        &self.beta
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn beta_plus(&self) -> &Mat {
        &self.beta_plus
    }

    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    pub fn source(&self) -> BetaSource {
        self.source
    }

    pub fn positivity_slack(&self) -> f64 {
        positivity_slack(self.source, self.criticality_residual)
    }

    pub fn criticality_residual(&self) -> Option<f64> {
        self.criticality_residual
    }

    /// Residuals of tr β = −1, tr β⁺ = n − 1/‖β‖², tr((β⁺)²) = tr β⁺ and the
    /// most negative eigenvalue of β⁺ (0 if none).
    pub fn identity_residuals(&self) -> [f64; 4] {
        let n = self.dim() as f64;
        let trp = self.beta_plus.trace();
        [
            (self.beta.trace() + 1.0).abs(),
            (trp - (n - 1.0 / self.norm2)).abs(),
            ((&self.beta_plus * &self.beta_plus).trace() - trp).abs(),
            (-linalg::min_eigenvalue(&self.beta_plus)).max(0.0),
        ]
    }

    /// Distance between sorted spectra; zero iff the labels agree up to
    /// orthogonal conjugation.
    pub fn spectrum_distance(&self, other: &BetaData) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.eigenvalues - &other.eigenvalues).amax()
    }

    /// β restricted to the trailing `p` coordinates (the m-block in an adapted frame).
    pub fn restrict_trailing(&self, p: usize) -> Result<BetaData> {
        let n = self.dim();
        let k = n - p;
        let off = linalg::max_abs(&self.beta.view((0, k), (k, p)).into_owned());
        if off > 1e-9 {
            return Err(Error::verification("β preserves the h ⊕ m splitting", off));
        }
        let bm = self.beta.view((k, k), (p, p)).into_owned();
        Ok(BetaData::from_block(bm, self.norm2, self.source, self.criticality_residual))
    }

    /// A block of a larger label; β⁺ keeps the normalization of the full label.
    fn from_block(beta: Mat, norm2: f64, source: BetaSource, crit: Option<f64>) -> BetaData {
        let p = beta.nrows();
        let beta_plus = &beta / norm2 + Mat::identity(p, p);
        let (eigenvalues, eigenvectors) = linalg::sorted_eigen(&beta);
        let mut blocks: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, &e) in eigenvalues.iter().enumerate() {
            match blocks.last_mut() {
                Some((v, idx)) if (e - *v).abs() <= CLUSTER_TOL => {
                    idx.push(i);
                    *v += (e - *v) / idx.len() as f64;
                }
                _ => blocks.push((e, vec![i])),
            }
        }
        BetaData {
            beta,
            norm2,
            beta_plus,
            eigenvalues,
            eigenvectors,
            blocks,
            source,
            criticality_residual: crit,
        }
    }

    /// Block index of each eigenvector.
    fn entry_blocks(&self) -> Vec<usize> {
        let mut which = vec![0; self.dim()];
        for (b, (_, idx)) in self.blocks.iter().enumerate() {
            for &i in idx {
                which[i] = b;
            }
        }
        which
    }

    /// E written in the β-eigenbasis.
    fn to_eigen(&self, e: &Mat) -> Mat {
        self.eigenvectors.transpose() * e * &self.eigenvectors
    }

    fn out_of_eigen(&self, e: &Mat) -> Mat {
        &self.eigenvectors * e * self.eigenvectors.transpose()
    }

    /// Decomposition of E into ad(β)-eigencomponents, ascending in λ; the
    /// components sum to E and satisfy [β, E_λ] = λ·E_λ.
    pub fn adbeta_components(&self, e: &Mat) -> Vec<(f64, Mat)> {
        let n = self.dim();
        let which = self.entry_blocks();
        let ee = self.to_eigen(e);
        let mut gaps: Vec<f64> = Vec::new();
        for bi in &self.blocks {
            for bj in &self.blocks {
                let g = bi.0 - bj.0;
                if !gaps.iter().any(|x| (x - g).abs() <= 10.0 * CLUSTER_TOL) {
                    gaps.push(g);
                }
            }
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = Vec::new();
        for &gap in &gaps {
            let mut comp = Mat::zeros(n, n);
            let mut any = false;
            for i in 0..n {
                for j in 0..n {
                    let g = self.blocks[which[i]].0 - self.blocks[which[j]].0;
                    if (g - gap).abs() <= 10.0 * CLUSTER_TOL && ee[(i, j)] != 0.0 {
                        comp[(i, j)] = ee[(i, j)];
                        any = true;
                    }
                }
            }
            if any {
                let gap = if gap.abs() <= 10.0 * CLUSTER_TOL { 0.0 } else { gap };
                out.push((gap, self.out_of_eigen(&comp)));
            }
        }
        out
    }

    /// Sign-filtered part of E: entries with gap > 0, = 0 or < 0.
    fn part(&self, e: &Mat, keep: impl Fn(f64) -> bool) -> Mat {
        let n = self.dim();
        let which = self.entry_blocks();
        let mut ee = self.to_eigen(e);
        for i in 0..n {
            for j in 0..n {
                let g = self.blocks[which[i]].0 - self.blocks[which[j]].0;
                let g = if g.abs() <= 10.0 * CLUSTER_TOL { 0.0 } else { g };
                if !keep(g) {
                    ee[(i, j)] = 0.0;
                }
            }
        }
        self.out_of_eigen(&ee)
    }

    /// Norm of the λ < 0 part; zero iff E ∈ q_β.
    pub fn q_beta_residual(&self, e: &Mat) -> f64 {
        linalg::fro(&self.part(e, |g| g < 0.0))
    }

    /// Zero iff E ∈ sl_β = {E ∈ q_β : tr(Eβ) = 0}.
    pub fn sl_beta_residual(&self, e: &Mat) -> f64 {
        self.q_beta_residual(e).max((e * &self.beta).trace().abs())
    }

    /// Norm of the λ ≠ 0 part; zero iff E commutes with β.
    pub fn centralizer_residual(&self, e: &Mat) -> f64 {
        linalg::fro(&self.part(e, |g| g != 0.0))
    }

    /// Zero iff E ∈ u_β (only λ > 0 components).
    pub fn u_beta_residual(&self, e: &Mat) -> f64 {
        linalg::fro(&self.part(e, |g| g <= 0.0))
    }

    /// Q ∈ q_β with S + Q skew-symmetric: Q_λ = −2S_λ for λ > 0, Q_0 = −S_0.
    pub fn q_completion(&self, s: &Mat) -> Result<Mat> {
        let asym = linalg::max_abs(&(s - s.transpose()));
        let scale = linalg::max_abs(s).max(1.0);
        if asym > 1e-8 * scale {
            return Err(Error::verification("q_completion input symmetric", asym));
        }
        let q = self.part(s, |g| g > 0.0) * -2.0 - self.part(s, |g| g == 0.0);
        let skew_res = linalg::max_abs(&(linalg::sym(&(s + &q))));
        if skew_res > 1e-8 * scale {
            return Err(Error::verification("S + Q skew-symmetric", skew_res));
        }
        Ok(q)
    }

    /// tr(S·[Q, β]).
    pub fn pairing(&self, s: &Mat, q: &Mat) -> f64 {
        (s * linalg::commutator(q, &self.beta)).trace()
    }

    /// 2·Σ_{λ>0} λ‖S_λ‖², the closed form of the pairing for the completion.
    pub fn pairing_closed_form(&self, s: &Mat) -> f64 {
        self.adbeta_components(s)
            .iter()
            .filter(|(l, _)| *l > 0.0)
            .map(|(l, c)| 2.0 * l * c.norm_squared())
            .sum()
    }

    /// q ∈ Q_β with G = q⁻ᵀq⁻¹ (background metric = identity). Built by a block
    /// decomposition G = RᵀR with R block lower-triangular in the ascending
    /// β-eigenbasis and symmetric positive diagonal blocks; q = R⁻¹.
    pub fn lift_metric(&self, g: &Mat) -> Result<Mat> {
        let n = self.dim();
        if g.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.nrows(),
            });
        }
        let ge = self.to_eigen(&linalg::sym(g));
        let mut r = Mat::zeros(n, n);
        let mut rest = ge.clone();
        // `rest` is the Schur complement on the leading blocks still to process.
        for b in (0..self.blocks.len()).rev() {
            let idx = &self.blocks[b].1;
            let start = idx[0];
            let len = idx.len();
            let gll = rest.view((start, start), (len, len)).into_owned();
            let min = linalg::min_eigenvalue(&gll);
            if min <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
            }
            let rll = linalg::sqrt_spd(&gll);
            r.view_mut((start, start), (len, len)).copy_from(&rll);
            if start > 0 {
                let glf = rest.view((start, 0), (len, start)).into_owned();
                let rll_inv_t = linalg::inverse(&rll).expect("spd").transpose();
                let rlf = rll_inv_t * glf;
                r.view_mut((start, 0), (len, start)).copy_from(&rlf);
                let head = rest.view((0, 0), (start, start)).into_owned() - rlf.transpose() * &rlf;
                rest.view_mut((0, 0), (start, start)).copy_from(&linalg::sym(&head));
            }
        }
        let r = self.out_of_eigen(&r);
        linalg::inverse(&r).ok_or_else(|| Error::Degenerate {
            what: "metric lift".into(),
        })
    }

    /// Basis of q_β ∩ (commutant of `actions`): generators of Q_β^H.
    pub fn q_beta_commutant_basis(&self, actions: &[Mat]) -> Vec<Mat> {
        let n = self.dim();
        let which = self.entry_blocks();
        let mut gens = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let g = self.blocks[which[i]].0 - self.blocks[which[j]].0;
                if g >= -10.0 * CLUSTER_TOL {
                    let mut e = Mat::zeros(n, n);
                    e[(i, j)] = 1.0;
                    gens.push(self.out_of_eigen(&e));
                }
            }
        }
        if actions.is_empty() {
            return gens;
        }
        let rows = actions.len() * n * n;
        let mut system = Mat::zeros(rows, gens.len());
        for (c, e) in gens.iter().enumerate() {
            for (ai, a) in actions.iter().enumerate() {
                let r = linalg::commutator(e, a);
                for (idx, v) in r.iter().enumerate() {
                    system[(ai * n * n + idx, c)] = *v;
                }
            }
        }
        let ns = linalg::null_space(&system, 1e-10);
        (0..ns.ncols())
            .map(|c| {
                let mut m = Mat::zeros(n, n);
                for (coef, e) in ns.column(c).iter().zip(&gens) {
                    m += e * *coef;
                }
                m
            })
            .collect()
    }

    /// exp(Y) for a Gaussian Y in the span of `basis`, scaled by `spread`.
    pub fn sample_q<R: Rng + ?Sized>(&self, basis: &[Mat], spread: f64, rng: &mut R) -> Mat {
        let n = self.dim();
        let mut y = Mat::zeros(n, n);
        for b in basis {
            let z: f64 = rng.sample(StandardNormal);
            y += b * (z * spread);
        }
        linalg::expm(&y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homgeom::fixtures::*;

    fn axb_beta() -> BetaData {
        BetaData::from_matrix(diag(&[-1.0, 0.0]), BetaSource::Catalog, None).unwrap()
    }

    #[test]
    fn validation() {
        assert!(BetaData::from_matrix(diag(&[-1.0, 1.0]), BetaSource::Catalog, None).is_err());
        assert!(BetaData::from_matrix(diag(&[-0.5, 0.0]), BetaSource::Catalog, None).is_err());
        let b = BetaData::from_matrix(diag(&[-1.0, -1.0, 1.0]), BetaSource::Catalog, None).unwrap();
        assert!(linalg::fro(&(b.beta_plus() - diag(&[2.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0]))) < 1e-14);
        assert!(b.identity_residuals().iter().all(|r| *r < 1e-12));
    }

    #[test]
    fn components_examples() {
        let b = axb_beta();
        let mut e21 = Mat::zeros(2, 2);
        e21[(1, 0)] = 1.0;
        let comps = b.adbeta_components(&e21);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].0, 1.0);
        assert!(linalg::fro(&(&comps[0].1 - &e21)) < 1e-14);
        let comps = b.adbeta_components(&diag(&[2.0, 3.0]));
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].0, 0.0);
    }

    #[test]
    fn components_of_symmetric_pair_by_transpose() {
        let rot = linalg::expm(&Mat::from_fn(4, 4, |i, j| (i as f64) - (j as f64)));
        let beta = &rot * diag(&[-0.5, -0.5, 0.0, 0.0]) * rot.transpose();
        let b = BetaData::from_matrix(beta, BetaSource::Catalog, None).unwrap();
        let s = Mat::from_fn(4, 4, |i, j| ((i + 1) * (j + 1)) as f64 + (i + j) as f64);
        let comps = b.adbeta_components(&s);
        let total = comps.iter().fold(Mat::zeros(4, 4), |acc, (_, c)| acc + c);
        assert!(linalg::fro(&(total - &s)) < 1e-12);
        for (l, c) in &comps {
            assert!(linalg::fro(&(linalg::commutator(b.beta(), c) - c * *l)) < 1e-12);
            let partner = comps.iter().find(|(m, _)| (m + l).abs() < 1e-9).unwrap();
            assert!(linalg::fro(&(c.transpose() - &partner.1)) < 1e-12);
        }
    }

    #[test]
    fn completion_worked_example() {
        let b = axb_beta();
        let s_val = 0.7;
        let s = Mat::from_row_slice(2, 2, &[0.0, s_val, s_val, 0.0]);
        let q = b.q_completion(&s).unwrap();
        let expected = Mat::from_row_slice(2, 2, &[0.0, 0.0, -2.0 * s_val, 0.0]);
        assert!(linalg::fro(&(&q - expected)) < 1e-14);
        assert!((b.pairing(&s, &q) - 2.0 * s_val * s_val).abs() < 1e-14);
        assert!((b.pairing_closed_form(&s) - 2.0 * s_val * s_val).abs() < 1e-14);
        let c = diag(&[1.0, -2.0]);
        assert!(linalg::fro(&(b.q_completion(&c).unwrap() + &c)) < 1e-14);
    }

    #[test]
    fn lift_of_background_is_identity() {
        let b = BetaData::from_matrix(diag(&[-1.0, -1.0, 1.0]), BetaSource::Catalog, None).unwrap();
        let q = b.lift_metric(&Mat::identity(3, 3)).unwrap();
        assert!(linalg::fro(&(q - Mat::identity(3, 3))) < 1e-14);
    }

    #[test]
    fn lift_reconstructs_metric_in_q_beta() {
        let b = BetaData::from_matrix(diag(&[-0.5, -0.5, 0.0, 0.0]), BetaSource::Catalog, None).unwrap();
        let g = Mat::from_row_slice(
            4,
            4,
            &[3.0, 0.2, 0.5, -0.1, 0.2, 2.0, 0.3, 0.4, 0.5, 0.3, 1.5, 0.2, -0.1, 0.4, 0.2, 1.0],
        );
        let q = b.lift_metric(&g).unwrap();
        let qi = linalg::inverse(&q).unwrap();
        assert!(linalg::fro(&(qi.transpose() * &qi - &g)) < 1e-12);
        assert!(b.q_beta_residual(&q) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let b = axb_beta();
        let j = serde_json::to_string(&b.to_json()).unwrap();
        assert_eq!(j, r#"{"beta":[[-1.0,0.0],[0.0,0.0]],"source":"catalog"}"#);
        let back = BetaData::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back.beta(), b.beta());
    }
}
