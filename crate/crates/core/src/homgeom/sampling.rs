use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{self, Mat};

use super::{HomogeneousSpace, InvariantMetric};

/// Basis of the symmetric bilinear forms S on m with S·A + Aᵀ·S = 0 for every
/// isotropy action A.
pub fn invariant_forms(space: &HomogeneousSpace) -> Vec<Mat> {
    let p = space.dim_m();
    let mut sym_basis = Vec::new();
    for i in 0..p {
        for j in i..p {
            let mut e = Mat::zeros(p, p);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            sym_basis.push(e);
        }
    }
    let actions = space.isotropy_actions();
    if actions.is_empty() {
        return sym_basis;
    }
    let rows = actions.len() * p * p;
    let mut system = Mat::zeros(rows, sym_basis.len());
    for (c, e) in sym_basis.iter().enumerate() {
        for (ai, a) in actions.iter().enumerate() {
            let r = e * a + a.transpose() * e;
            for (idx, val) in r.iter().enumerate() {
                system[(ai * p * p + idx, c)] = *val;
            }
        }
    }
    let ns = linalg::null_space(&system, 1e-10);
    (0..ns.ncols())
        .map(|c| {
            let mut s = Mat::zeros(p, p);
            for (coef, e) in ns.column(c).iter().zip(&sym_basis) {
                s += e * *coef;
            }
            s
        })
        .collect()
}

/// A random invariant metric G = T⁻¹·exp(X)·T⁻¹ around `base`, with T the
/// Löwdin frame of `base` and X a Gaussian combination of invariant forms
/// written in that frame, scaled by `spread`.
pub fn random_invariant_metric<R: Rng + ?Sized>(
    space: &HomogeneousSpace,
    base: &InvariantMetric,
    spread: f64,
    rng: &mut R,
) -> Result<InvariantMetric> {
    let p = space.dim_m();
    let t = base.orthonormal_frame();
    let forms = invariant_forms(space);
    let mut x = Mat::zeros(p, p);
    for f in &forms {
        let z: f64 = rng.sample(StandardNormal);
        x += f * (z * spread);
    }
    let x = linalg::sym(&(&t * x * &t));
    let tinv = linalg::inverse(&t).expect("spd");
    InvariantMetric::new(linalg::sym(&(&tinv * linalg::expm(&x) * &tinv)))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::invariance_check;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn invariant_forms_dimensions() {
        assert_eq!(invariant_forms(&HomogeneousSpace::group(h3())).len(), 6);
        assert_eq!(invariant_forms(&sl2_so2()).len(), 1);
    }

    #[test]
    fn samples_are_invariant() {
        let s = sl2_so2();
        let base = InvariantMetric::checked(&s, diag(&[3.0, 3.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_invariant_metric(&s, &base, 1.0, &mut rng).unwrap();
            assert!(invariance_check(&s, &g) < 1e-10);
        }
    }
}
