use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::Subspace;
use crate::linalg::{self, Mat, Vector};

use super::{HomogeneousSpace, InvariantMetric};

#[derive(Debug, Clone, Serialize)]
pub struct Standardness {
    pub standard: bool,
    /// Largest ḡ-norm of the u-normal part of [u_a, u_b] over ḡ-orthonormal u_a, u_b.
    pub residual: f64,
    pub nilradical_dim: usize,
    pub complement_dim: usize,
}

/// Whether the ḡ-orthogonal complement of the nilradical is a subalgebra.
pub fn standardness_check(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<Standardness> {
    let tol = space.tol();
    let nil = space.subspace_to_split(&space.algebra().nilradical()?);
    let gram = space.extended_gram(metric);
    let u = nil.complement(&gram, tol);
    let residual = closure_residual(space, &u, &gram);
    Ok(Standardness {
        standard: residual <= 1e3 * tol,
        residual,
        nilradical_dim: nil.dim(),
        complement_dim: u.dim(),
    })
}

fn closure_residual(space: &HomogeneousSpace, u: &Subspace, gram: &Mat) -> f64 {
    if u.dim() == 0 {
        return 0.0;
    }
    let b = u.basis();
    let local = b.transpose() * gram * b;
    let onb = b * linalg::inv_sqrt_spd(&local);
    // ḡ-orthogonal projector onto u: P = U Uᵀ Ĝ with U ḡ-orthonormal.
    let proj = &onb * onb.transpose() * gram;
    let split = space.split_algebra();
    let mut worst: f64 = 0.0;
    for a in 0..onb.ncols() {
        for c in (a + 1)..onb.ncols() {
            let br = split.bracket(&onb.column(a).into_owned(), &onb.column(c).into_owned());
            let off = &br - &proj * &br;
            let norm = (off.transpose() * gram * &off)[(0, 0)].max(0.0).sqrt();
            worst = worst.max(norm);
        }
    }
    worst
}

/// C_θ(X, Y) = ¼ tr((θX + θXᵀ)(θY + θYᵀ)) on the Levi basis, θ(X) = ad(X)|_r and
/// transposes taken for ḡ restricted to the radical r.
pub fn chi_form(space: &HomogeneousSpace, metric: &InvariantMetric, levi: &Subspace) -> Result<Mat> {
    let alg = space.algebra();
    let tol = alg.tol();
    let n = alg.dim();
    if levi.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: levi.ambient_dim(),
        });
    }
    let rad = alg.radical()?;
    let sub = alg.subalgebra_residual(levi);
    if sub > 1e3 * tol {
        return Err(Error::verification("Levi factor is a subalgebra", sub));
    }
    if levi.dim() + rad.dim() != n || levi.sum(&rad, tol).dim() != n {
        return Err(Error::invalid("Levi factor is not complementary to the radical"));
    }
    if alg.solvable_length(levi).is_some() && levi.dim() > 0 {
        return Err(Error::invalid("Levi factor is solvable"));
    }
    let d = levi.dim();
    if rad.dim() == 0 {
        return Ok(Mat::zeros(d, d));
    }
    // ḡ in original coordinates.
    let pinv = linalg::inverse(space.split_basis()).expect("split basis invertible");
    let ghat = pinv.transpose() * space.extended_gram(metric) * &pinv;
    let r = rad.basis();
    let rgram = r.transpose() * &ghat * r;
    let rgram_inv = linalg::inverse(&rgram).ok_or_else(|| Error::Degenerate {
        what: "metric on radical".into(),
    })?;
    let rpinv = r.clone().pseudo_inverse(1e-14).map_err(Error::invalid)?;
    let sym_parts: Vec<Mat> = levi
        .vectors()
        .iter()
        .map(|x| {
            let theta = &rpinv * alg.ad(x).expect("dimension checked") * r;
            &theta + &rgram_inv * theta.transpose() * &rgram
        })
        .collect();
    let mut c = Mat::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = 0.25 * (&sym_parts[i] * &sym_parts[j]).trace();
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(c)
}

/// Trace of the shape operator at the base point of the orbit through o of the
/// subgroup with Lie algebra `gbar` (given in original coordinates).
pub fn orbit_mean_curvature(
    space: &HomogeneousSpace,
    metric: &InvariantMetric,
    gbar: &Subspace,
) -> Result<f64> {
    let tol = space.tol();
    let k = space.dim_h();
    let p = space.dim_m();
    let gb = space.subspace_to_split(gbar);
    let gm = gb.basis().rows(k, p).into_owned();
    let g = metric.gram();
    let local = linalg::sym(&(gm.transpose() * g * &gm));
    let (vals, vecs) = linalg::sorted_eigen(&local);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol * top.max(1.0)).collect();
    if keep.len() + 1 != p {
        return Err(Error::invalid(format!(
            "orbit of gbar has dimension {} in a {p}-dimensional m, expected codimension one",
            keep.len()
        )));
    }
    // Combinations of gbar whose m-parts are g-orthonormal.
    let coeffs: Vec<Vector> = keep
        .iter()
        .map(|&i| vecs.column(i).into_owned() / vals[i].sqrt())
        .collect();
    let tangent: Mat = linalg::hstack(p, &coeffs.iter().map(|c| &gm * c).collect::<Vec<_>>());
    let normal_space = Subspace::span(&tangent, tol).complement(g, tol);
    if normal_space.dim() != 1 {
        return Err(Error::Degenerate {
            what: "orbit normal".into(),
        });
    }
    let mut nvec = normal_space.vector(0);
    nvec /= metric.inner(&nvec, &nvec).sqrt();
    let nsplit = space.embed_m(&nvec);
    let split = space.split_algebra();
    let mut minus_tr = 0.0;
    for c in &coeffs {
        let x = gb.basis() * c;
        let xm = x.rows(k, p).into_owned();
        let br = split.bracket(&nsplit, &x).rows(k, p).into_owned();
        minus_tr += metric.inner(&br, &xm);
    }
    Ok(-minus_tr)
}

/// A|_m for an automorphism A of g (original coordinates) preserving h and m.
pub fn restrict_automorphism(space: &HomogeneousSpace, a: &Mat) -> Result<Mat> {
    let alg = space.algebra();
    let n = alg.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.nrows(),
        });
    }
    let scale = linalg::max_abs(a).max(1.0);
    let res = alg.automorphism_residual(a);
    if res > 1e-9 * scale * scale {
        return Err(Error::verification("automorphism", res));
    }
    let s = space.endo_to_split(a);
    let k = space.dim_h();
    let p = space.dim_m();
    let off = linalg::max_abs(&s.view((0, k), (k, p)).into_owned())
        .max(linalg::max_abs(&s.view((k, 0), (p, k)).into_owned()));
    if off > 1e-9 * scale {
        return Err(Error::verification("automorphism preserves h ⊕ m", off));
    }
    let am = space.m_block(&s);
    if linalg::inverse(&am).is_none() {
        return Err(Error::Degenerate {
            what: "automorphism restricted to m".into(),
        });
    }
    Ok(am)
}

/// The metric g(A⁻¹·, A⁻¹·) on m.
pub fn pushforward_by_automorphism(
    space: &HomogeneousSpace,
    metric: &InvariantMetric,
    a: &Mat,
) -> Result<InvariantMetric> {
    let am = restrict_automorphism(space, a)?;
    let inv = linalg::inverse(&am).expect("checked invertible");
    InvariantMetric::new(inv.transpose() * metric.gram() * &inv)
}

/// Shape operator transported by A: L ↦ A|_m L (A|_m)⁻¹.
pub fn conjugate_shape(a_m: &Mat, l: &Mat) -> Result<Mat> {
    let inv = linalg::inverse(a_m).ok_or_else(|| Error::Degenerate {
        what: "A|_m".into(),
    })?;
    Ok(a_m * l * inv)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{invariance_check, ricci_operator};
    use super::*;
    use crate::liealg::LieAlgebra;

    #[test]
    fn standardness_examples() {
        let s = HomogeneousSpace::group(axb());
        let r = standardness_check(&s, &InvariantMetric::identity(2)).unwrap();
        assert!(r.standard);
        assert_eq!(r.complement_dim, 1);
        let s = HomogeneousSpace::group(sl2());
        let r = standardness_check(&s, &InvariantMetric::identity(3)).unwrap();
        assert!(r.standard);
        assert_eq!(r.nilradical_dim, 0);
    }

    #[test]
    fn skewed_metric_is_nonstandard() {
        // r2 ⊕ r2 on (A, B, X, Y) with [A, X] = X, [B, Y] = Y; nilradical span(X, Y).
        let alg = LieAlgebra::from_brackets(
            labels(&["A", "B", "X", "Y"]),
            &[(0, 2, 2, 1.0), (1, 3, 3, 1.0)],
        )
        .unwrap();
        let s = HomogeneousSpace::group(alg);
        // Orthonormal basis A + Y, B + X, X, Y.
        let p = Mat::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 1.0, 1.0, 0.0, //
                1.0, 0.0, 0.0, 1.0,
            ],
        );
        let pinv = linalg::inverse(&p).unwrap();
        let g = InvariantMetric::new(pinv.transpose() * pinv).unwrap();
        let r = standardness_check(&s, &g).unwrap();
        assert!(!r.standard);
        assert!(r.residual > 0.01, "{}", r.residual);
        assert!(standardness_check(&s, &InvariantMetric::identity(4)).unwrap().standard);
    }

    #[test]
    fn chi_form_on_semidirect_product() {
        let s = HomogeneousSpace::group(sl2_r2());
        let levi = Subspace::new(Mat::identity(5, 5).columns(0, 3).into_owned(), 1e-12).unwrap();
        let c = chi_form(&s, &InvariantMetric::identity(5), &levi).unwrap();
        assert!((c[(0, 0)] - 2.0).abs() < 1e-12);
        let x = v(&[0.0, 1.0, -1.0]);
        assert!((x.transpose() * &c * &x)[(0, 0)].abs() < 1e-12);
        assert!(linalg::min_eigenvalue(&c) > -1e-12);

        let semisimple = HomogeneousSpace::group(sl2());
        let full = Subspace::full(3);
        let c = chi_form(&semisimple, &InvariantMetric::identity(3), &full).unwrap();
        assert_eq!(linalg::max_abs(&c), 0.0);

        let bad = Subspace::new(Mat::identity(5, 5).columns(1, 3).into_owned(), 1e-12).unwrap();
        assert!(chi_form(&s, &InvariantMetric::identity(5), &bad).is_err());
    }

    #[test]
    fn iwasawa_orbits_in_sl2_are_minimal() {
        let s = HomogeneousSpace::group(sl2());
        let gbar = Subspace::new(Mat::identity(3, 3).columns(0, 2).into_owned(), 1e-12).unwrap();
        let metrics = [
            Mat::identity(3, 3),
            diag(&[0.3, 2.0, 5.0]),
            Mat::from_row_slice(3, 3, &[2.0, 0.4, -0.3, 0.4, 1.0, 0.2, -0.3, 0.2, 0.8]),
        ];
        for g in metrics {
            let g = InvariantMetric::new(g).unwrap();
            assert!(orbit_mean_curvature(&s, &g, &gbar).unwrap().abs() < 1e-10);
        }
        let line = Subspace::new(Mat::from_row_slice(3, 1, &[1.0, 0.0, 0.0]), 1e-12).unwrap();
        assert!(orbit_mean_curvature(&s, &InvariantMetric::identity(3), &line).is_err());
    }

    #[test]
    fn totally_geodesic_factor() {
        let s = HomogeneousSpace::group(axb().direct_sum(&LieAlgebra::abelian(1)));
        let gbar = Subspace::new(Mat::identity(3, 3).columns(0, 2).into_owned(), 1e-12).unwrap();
        let tr = orbit_mean_curvature(&s, &InvariantMetric::identity(3), &gbar).unwrap();
        assert!(tr.abs() < 1e-14);
    }

    #[test]
    fn orbit_of_nilradical_in_hyperbolic_plane() {
        // Horocycles in RH²: the orbit of exp(tX) through o has |tr L| = 1.
        let s = HomogeneousSpace::group(axb());
        let gbar = Subspace::new(Mat::from_row_slice(2, 1, &[0.0, 1.0]), 1e-12).unwrap();
        let tr = orbit_mean_curvature(&s, &InvariantMetric::identity(2), &gbar).unwrap();
        assert!((tr.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pushforward_examples() {
        let s = HomogeneousSpace::group(h3());
        let g = InvariantMetric::identity(3);
        let same = pushforward_by_automorphism(&s, &g, &Mat::identity(3, 3)).unwrap();
        assert_eq!(same, g);
        let t: f64 = 1.7;
        let a = diag(&[t, t, t * t]);
        let pushed = pushforward_by_automorphism(&s, &g, &a).unwrap();
        let expected = diag(&[t.powi(-2), t.powi(-2), t.powi(-4)]);
        assert!(linalg::fro(&(pushed.gram() - expected)) < 1e-12);
        assert!(pushforward_by_automorphism(&s, &g, &diag(&[1.0, 1.0, 2.0])).is_err());
    }

    #[test]
    fn rotation_pushforward_on_sl2_so2() {
        let s = sl2_so2();
        let rot = linalg::expm(&(s.algebra().ad(&v(&[0.0, 0.7, -0.7])).unwrap()));
        let g = InvariantMetric::checked(&s, diag(&[2.0, 2.0])).unwrap();
        let pushed = pushforward_by_automorphism(&s, &g, &rot).unwrap();
        assert!(invariance_check(&s, &pushed) < 1e-10);
    }

    #[test]
    fn ricci_is_natural_under_automorphisms() {
        let s = HomogeneousSpace::group(h3());
        let g = InvariantMetric::new(Mat::from_row_slice(
            3,
            3,
            &[2.0, 0.4, 0.1, 0.4, 1.0, -0.2, 0.1, -0.2, 1.5],
        ))
        .unwrap();
        let a = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.5, 3.0, 0.0, 0.3, -0.4, 2.0]);
        let am = restrict_automorphism(&s, &a).unwrap();
        let pushed = pushforward_by_automorphism(&s, &g, &a).unwrap();
        let lhs = ricci_operator(&s, &pushed).unwrap();
        let rhs = conjugate_shape(&am, &ricci_operator(&s, &g).unwrap()).unwrap();
        assert!(linalg::fro(&(lhs - rhs)) < 1e-10);
    }
}
