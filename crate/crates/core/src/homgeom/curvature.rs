use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::linalg::{self, Mat, Vector};

use super::{HomogeneousSpace, InvariantMetric};

/// Max over the isotropy basis of ‖G·ad_m(Z) + ad_m(Z)ᵀ·G‖.
pub fn invariance_check(space: &HomogeneousSpace, metric: &InvariantMetric) -> f64 {
    let g = metric.gram();
    space
        .isotropy_actions()
        .iter()
        .map(|a| linalg::fro(&(g * a + a.transpose() * g)))
        .fold(0.0, f64::max)
}

/// g-symmetric part ½(E + E^{T_g}) with E^{T_g} = G⁻¹EᵀG.
pub fn g_sym(e: &Mat, metric: &InvariantMetric) -> Mat {
    let gi = metric.inverse();
    (e + gi * e.transpose() * metric.gram()) * 0.5
}

/// ‖E‖²_g = tr(E·E^{T_g}).
pub fn g_norm2(e: &Mat, metric: &InvariantMetric) -> f64 {
    let gi = metric.inverse();
    (e * gi * e.transpose() * metric.gram()).trace()
}

fn require_invariant(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<()> {
    if metric.dim() != space.dim_m() {
        return Err(Error::DimensionMismatch {
            expected: space.dim_m(),
            got: metric.dim(),
        });
    }
    let res = invariance_check(space, metric);
    if res > 1e2 * space.tol() * linalg::max_abs(metric.gram()).max(1.0) {
        return Err(Error::NonInvariantMetric { residual: res });
    }
    Ok(())
}

/// Structure constants of the algebra in the basis `[h-basis | T]`, where
/// `T = G^{-1/2}` is the Löwdin frame of m. Returns the frame algebra data as
/// `c[a][b][l]` plus the Killing form in that basis.
struct OrthoFrame {
    n: usize,
    k: usize,
    c: Vec<f64>,
    killing: Mat,
    t: Mat,
}

impl OrthoFrame {
    fn new(space: &HomogeneousSpace, metric: &InvariantMetric) -> Self {
        let k = space.dim_h();
        let n = space.dim();
        let t = metric.orthonormal_frame();
        let f = linalg::block_diag(&Mat::identity(k, k), &t);
        let finv = linalg::block_diag(&Mat::identity(k, k), &linalg::inverse(&t).expect("spd"));
        let split = space.split_algebra();
        let cols: Vec<Vector> = (0..n).map(|i| f.column(i).into_owned()).collect();
        let mut c = vec![0.0; n * n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let br = &finv * split.bracket(&cols[a], &cols[b]);
                for l in 0..n {
                    c[(a * n + b) * n + l] = br[l];
                    c[(b * n + a) * n + l] = -br[l];
                }
            }
        }
        let killing = f.transpose() * split.killing_form() * &f;
        OrthoFrame { n, k, c, killing, t }
    }

    fn c(&self, a: usize, b: usize, l: usize) -> f64 {
        self.c[(a * self.n + b) * self.n + l]
    }
}

/// The Ricci operator on m (G-self-adjoint), by the structure-constant formula
/// `Ric = M − ½B̂ − S(ad_m H)` evaluated in an orthonormal frame.
pub fn ricci_operator(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<Mat> {
    require_invariant(space, metric)?;
    let f = OrthoFrame::new(space, metric);
    let (n, k) = (f.n, f.k);
    let p = n - k;
    // Mean curvature in the orthonormal frame: H_a = tr ad(X_a).
    let hvec: Vec<f64> = (k..n)
        .map(|a| (0..n).map(|j| f.c(a, j, j)).sum())
        .collect();
    let mut adh = Mat::zeros(p, p);
    for (ai, ha) in hvec.iter().enumerate() {
        if *ha == 0.0 {
            continue;
        }
        for i in 0..p {
            for l in 0..p {
                adh[(l, i)] += ha * f.c(k + ai, k + i, k + l);
            }
        }
    }
    let sadh = linalg::sym(&adh);
    let mut ric = Mat::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let (xa, xb) = (k + a, k + b);
            let mut t1 = 0.0;
            let mut t2 = 0.0;
            for i in k..n {
                for l in k..n {
                    t1 += f.c(xa, i, l) * f.c(xb, i, l);
                    t2 += f.c(i, l, xa) * f.c(i, l, xb);
                }
            }
            let v = -0.5 * t1 + 0.25 * t2 - 0.5 * f.killing[(xa, xb)] - sadh[(a, b)];
            ric[(a, b)] = v;
            ric[(b, a)] = v;
        }
    }
    let tinv = linalg::inverse(&f.t).expect("spd");
    Ok(&f.t * ric * tinv)
}

/// Ricci as a bilinear form on the m-basis: ric(x, y) = xᵀ·G·Ric·y.
pub fn ricci_form(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<Mat> {
    let ric = ricci_operator(space, metric)?;
    Ok(linalg::sym(&(metric.gram() * ric)))
}

pub fn scalar_curvature(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<f64> {
    Ok(ricci_operator(space, metric)?.trace())
}

/// Mean curvature vector H (m-coordinates) and h = ½·g(H, H).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurvature {
    pub vector: Vector,
    pub h: f64,
}

/// Solves g(H, X) = tr ad(X) for all X in m.
pub fn mean_curvature(space: &HomogeneousSpace, metric: &InvariantMetric) -> MeanCurvature {
    let t = space.m_traces();
    let vector = metric.inverse() * &t;
    let h = 0.5 * t.dot(&vector);
    MeanCurvature {
        vector,
        h: h.max(0.0),
    }
}

/// Ric* = Ric + S(ad_m H); checks tr S(ad_m H) = 2h.
pub fn modified_ricci(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<Mat> {
    let ric = ricci_operator(space, metric)?;
    let mc = mean_curvature(space, metric);
    let s = g_sym(&space.ad_m(&space.embed_m(&mc.vector)), metric);
    let res = (s.trace() - 2.0 * mc.h).abs();
    if res > 1e-8 * (1.0 + mc.h) {
        return Err(Error::verification("tr S(ad_m H) = 2h", res));
    }
    Ok(ric + s)
}

/// Ricci operator of a left-invariant metric computed from the Koszul formula
/// through the full curvature tensor. Independent of [`ricci_operator`];
/// unoptimized, trivial isotropy only.
pub fn koszul_ricci(alg: &LieAlgebra, g: &Mat) -> Result<Mat> {
    let n = alg.dim();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.nrows(),
        });
    }
    let gi = linalg::inverse(g).ok_or_else(|| Error::Degenerate {
        what: "metric".into(),
    })?;
    let ad: Vec<Mat> = (0..n).map(|i| alg.ad_basis(i)).collect();
    // ad_x^* = G⁻¹ ad_xᵀ G.
    let adj: Vec<Mat> = ad.iter().map(|a| &gi * a.transpose() * g).collect();
    // nabla[i] is the matrix of Y ↦ ∇_{e_i} Y.
    let nabla: Vec<Mat> = (0..n)
        .map(|i| {
            let mut m = Mat::zeros(n, n);
            for j in 0..n {
                let ej = crate::liealg::unit(n, j);
                let ei = crate::liealg::unit(n, i);
                let col = &ad[i] * &ej - &adj[i] * &ej - &adj[j] * &ei;
                m.set_column(j, &(col * 0.5));
            }
            m
        })
        .collect();
    let nabla_of = |x: &Vector| -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] != 0.0 {
                m += &nabla[i] * x[i];
            }
        }
        m
    };
    // ric(y, z) = Σ_i e^i( R(e_i, y) z ), R(x,y) = ∇x∇y − ∇y∇x − ∇[x,y].
    let mut ric = Mat::zeros(n, n);
    for y in 0..n {
        for i in 0..n {
            let ei = crate::liealg::unit(n, i);
            let ey = crate::liealg::unit(n, y);
            let r = &nabla[i] * &nabla[y] - &nabla[y] * &nabla[i] - nabla_of(&alg.bracket(&ei, &ey));
            // Row i of R(e_i, e_y) contributes its e_i-component for each z.
            for z in 0..n {
                ric[(y, z)] += r[(i, z)];
            }
        }
    }
    Ok(gi * linalg::sym(&ric))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::liealg::Subspace;

    fn group(alg: LieAlgebra) -> HomogeneousSpace {
        HomogeneousSpace::group(alg)
    }

    fn eig(m: &Mat) -> Vec<f64> {
        let mut e: Vec<f64> = m.clone().complex_eigenvalues().iter().map(|z| z.re).collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn heisenberg_ricci_eigenvalues() {
        let s = group(h3());
        let ric = ricci_operator(&s, &InvariantMetric::identity(3)).unwrap();
        let e = eig(&ric);
        for (a, b) in e.iter().zip([-0.5, -0.5, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_plane_is_einstein() {
        let s = group(axb());
        let ric = ricci_operator(&s, &InvariantMetric::identity(2)).unwrap();
        assert!(linalg::fro(&(ric + Mat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn su2_bi_invariant() {
        let s = group(su2());
        let g = InvariantMetric::new(diag(&[2.0, 2.0, 2.0])).unwrap();
        let ric = ricci_operator(&s, &g).unwrap();
        assert!(linalg::fro(&(ric - Mat::identity(3, 3) * 0.25)) < 1e-12);
    }

    #[test]
    fn koszul_oracle_matches_closed_forms() {
        let r = koszul_ricci(&h3(), &Mat::identity(3, 3)).unwrap();
        assert!(linalg::fro(&(r - diag(&[-0.5, -0.5, 0.5]))) < 1e-12);
        let r = koszul_ricci(&axb(), &Mat::identity(2, 2)).unwrap();
        assert!(linalg::fro(&(r + Mat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn formula_agrees_with_koszul_on_skewed_metrics() {
        let g = Mat::from_row_slice(3, 3, &[2.0, 0.3, -0.2, 0.3, 1.0, 0.1, -0.2, 0.1, 0.7]);
        let m = InvariantMetric::new(g.clone()).unwrap();
        let solv = LieAlgebra::from_brackets(
            labels(&["A", "X", "Y"]),
            &[(0, 1, 1, 1.0), (0, 2, 2, 2.0), (1, 2, 1, 0.0)],
        )
        .unwrap();
        for alg in [h3(), sl2(), su2(), solv] {
            let a = ricci_operator(&group(alg.clone()), &m).unwrap();
            let b = koszul_ricci(&alg, &g).unwrap();
            assert!(linalg::fro(&(&a - &b)) < 1e-10, "{a}\n{b}");
        }
    }

    #[test]
    fn mean_curvature_examples() {
        let s = group(axb());
        let mc = mean_curvature(&s, &InvariantMetric::identity(2));
        assert!((mc.vector - v(&[1.0, 0.0])).norm() < 1e-14);
        assert!((mc.h - 0.5).abs() < 1e-14);
        let mc = mean_curvature(&s, &InvariantMetric::new(diag(&[4.0, 1.0])).unwrap());
        assert!((mc.vector - v(&[0.25, 0.0])).norm() < 1e-14);
        assert!((mc.h - 0.125).abs() < 1e-14);
        for alg in [h3(), sl2(), su2()] {
            let n = alg.dim();
            let mc = mean_curvature(&group(alg), &InvariantMetric::identity(n));
            assert_eq!(mc.h, 0.0);
        }
    }

    #[test]
    fn modified_ricci_on_axb() {
        let s = group(axb());
        let g = InvariantMetric::identity(2);
        let ric = ricci_operator(&s, &g).unwrap();
        let star = modified_ricci(&s, &g).unwrap();
        assert!(linalg::fro(&(&star - &ric - diag(&[0.0, 1.0]))) < 1e-12);
        assert!((star.trace() - ric.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sl2_so2_is_hyperbolic() {
        let s = sl2_so2();
        for scale in [0.5, 1.0, 3.0] {
            let g = InvariantMetric::checked(&s, diag(&[4.0 * scale, 4.0 * scale])).unwrap();
            let ric = ricci_operator(&s, &g).unwrap();
            // |H|² = |E + F|² = 4s gives the hyperbolic plane of curvature −1/s.
            assert!(linalg::fro(&(ric + Mat::identity(2, 2) / scale)) < 1e-12);
        }
    }

    #[test]
    fn non_invariant_metric_rejected() {
        let s = sl2_so2();
        let g = InvariantMetric::new(diag(&[1.0, 2.0])).unwrap();
        assert!(invariance_check(&s, &g) > 0.01);
        assert!(matches!(
            ricci_operator(&s, &g),
            Err(Error::NonInvariantMetric { .. })
        ));
        assert_eq!(invariance_check(&group(h3()), &InvariantMetric::identity(3)), 0.0);
    }

    #[test]
    fn flat_abelian() {
        let s = group(LieAlgebra::abelian(4));
        let g = InvariantMetric::new(diag(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(scalar_curvature(&s, &g).unwrap(), 0.0);
    }

    #[test]
    fn isotropy_changes_nothing_for_product_with_compact_factor() {
        // su2 ⊕ R with h = su2: the quotient is a line, flat.
        let alg = su2().direct_sum(&LieAlgebra::abelian(1));
        let h = Subspace::new(Mat::identity(4, 4).columns(0, 3).into_owned(), 1e-12).unwrap();
        let s = HomogeneousSpace::new(alg, h).unwrap();
        let ric = ricci_operator(&s, &InvariantMetric::identity(1)).unwrap();
        assert!(ric[(0, 0)].abs() < 1e-14);
    }
}
