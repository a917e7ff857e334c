//! Invariant metrics on reductive homogeneous spaces G/H.
//!
//! A [`HomogeneousSpace`] keeps the algebra in a split basis `[h | m]` so
//! that projection onto `m` along `h` is a coordinate truncation. Metrics are
//! Gram matrices on the `m`-basis; endomorphisms of `m` (Ricci, shape
//! operators) act on `m`-coordinate columns.

mod checks;
mod curvature;
mod sampling;

pub use checks::{
    chi_form, conjugate_shape, orbit_mean_curvature, pushforward_by_automorphism,
    restrict_automorphism, standardness_check, Standardness,
};
pub use curvature::{
    g_norm2, g_sym, invariance_check, koszul_ricci, mean_curvature, modified_ricci,
    ricci_form, ricci_operator, scalar_curvature, MeanCurvature,
};
pub use sampling::{invariant_forms, random_invariant_metric};

use crate::error::{Error, Result};
use crate::liealg::{LieAlgebra, Subspace};
use crate::linalg::{self, Mat, Vector};

#[derive(Debug, Clone)]
pub struct HomogeneousSpace {
    alg: LieAlgebra,
    h: Subspace,
    m: Subspace,
    /// Columns: h-basis then m-basis, in original coordinates.
    split_basis: Mat,
    split_inv: Mat,
    split: LieAlgebra,
}

impl HomogeneousSpace {
    /// Trivial isotropy: the Lie group itself with left-invariant metrics.
    pub fn group(alg: LieAlgebra) -> Self {
        let n = alg.dim();
        Self::new(alg, Subspace::zero(n)).expect("trivial isotropy is always valid")
    }

    /// G/H with the canonical (Killing-orthogonal) complement.
    pub fn new(alg: LieAlgebra, h: Subspace) -> Result<Self> {
        let m = alg.reductive_complement(&h)?;
        Self::assemble(alg, h, m)
    }

    /// Uses a caller-chosen basis of `m`, verified to span the canonical complement.
    pub fn with_complement(alg: LieAlgebra, h: Subspace, m: Subspace) -> Result<Self> {
        let canonical = alg.reductive_complement(&h)?;
        let res = canonical.equality_residual(&m);
        if res > 1e3 * alg.tol() {
            return Err(Error::verification("complement equals the Killing-orthogonal of h", res));
        }
        Self::assemble(alg, h, m)
    }

    fn assemble(alg: LieAlgebra, h: Subspace, m: Subspace) -> Result<Self> {
        let n = alg.dim();
        if h.dim() > 0 {
            let b = alg.killing_form();
            let bhh = h.basis().transpose() * &b * h.basis();
            let max = -linalg::min_eigenvalue(&(-&bhh));
            if max >= -1e2 * alg.tol() {
                return Err(Error::invalid(
                    "Killing form is not negative definite on the isotropy (non-compact isotropy)",
                ));
            }
        }
        let split_basis = linalg::hcat(h.basis(), m.basis());
        if split_basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: split_basis.ncols(),
            });
        }
        let split_inv = linalg::inverse(&split_basis).ok_or_else(|| Error::Degenerate {
            what: "h ⊕ m basis".into(),
        })?;
        let split = alg.change_basis(&split_basis)?;
        Ok(HomogeneousSpace {
            alg,
            h,
            m,
            split_basis,
            split_inv,
            split,
        })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.alg
    }

    pub fn isotropy(&self) -> &Subspace {
        &self.h
    }

    pub fn complement(&self) -> &Subspace {
        &self.m
    }

    /// The algebra in the `[h | m]` basis.
    pub fn split_algebra(&self) -> &LieAlgebra {
        &self.split
    }

    pub fn split_basis(&self) -> &Mat {
        &self.split_basis
    }

    pub fn dim_h(&self) -> usize {
        self.h.dim()
    }

    pub fn dim_m(&self) -> usize {
        self.m.dim()
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn tol(&self) -> f64 {
        self.alg.tol()
    }

    /// Original coordinates → split coordinates.
    pub fn to_split(&self, v: &Vector) -> Vector {
        &self.split_inv * v
    }

    pub fn from_split(&self, v: &Vector) -> Vector {
        &self.split_basis * v
    }

    /// Endomorphism of g in original coordinates → split coordinates.
    pub fn endo_to_split(&self, a: &Mat) -> Mat {
        &self.split_inv * a * &self.split_basis
    }

    pub fn endo_from_split(&self, a: &Mat) -> Mat {
        &self.split_basis * a * &self.split_inv
    }

    pub fn subspace_to_split(&self, s: &Subspace) -> Subspace {
        Subspace::span(&(&self.split_inv * s.basis()), self.tol())
    }

    /// Split vector with zero h-part and the given m-coordinates.
    pub fn embed_m(&self, x: &Vector) -> Vector {
        let k = self.dim_h();
        let mut v = Vector::zeros(self.dim());
        v.rows_mut(k, self.dim_m()).copy_from(x);
        v
    }

    /// The m→m block of a split-coordinate endomorphism.
    pub fn m_block(&self, a: &Mat) -> Mat {
        let k = self.dim_h();
        a.view((k, k), (self.dim_m(), self.dim_m())).into_owned()
    }

    /// `proj_m ∘ ad(x)|_m` for `x` given in split coordinates.
    pub fn ad_m(&self, x: &Vector) -> Mat {
        let ad = self.split.ad(x).expect("split vector has algebra dimension");
        self.m_block(&ad)
    }

    /// ad_m of each isotropy basis vector.
    pub fn isotropy_actions(&self) -> Vec<Mat> {
        (0..self.dim_h())
            .map(|i| self.m_block(&self.split.ad_basis(i)))
            .collect()
    }

    /// −B restricted to the h-basis (the extension of metrics to h).
    pub fn isotropy_gram(&self) -> Mat {
        let k = self.dim_h();
        let b = self.split.killing_form();
        -b.view((0, 0), (k, k)).into_owned()
    }

    /// Metric extended to g in split coordinates: ḡ|_h = −B|_h, ḡ(h, m) = 0.
    pub fn extended_gram(&self, metric: &InvariantMetric) -> Mat {
        linalg::block_diag(&self.isotropy_gram(), metric.gram())
    }

    /// `tr ad(X)` for each m-basis vector X.
    pub fn m_traces(&self) -> Vector {
        let k = self.dim_h();
        Vector::from_iterator(
            self.dim_m(),
            (0..self.dim_m()).map(|i| self.split.ad_basis(k + i).trace()),
        )
    }

    /// The same space written in a ḡ-orthonormal basis: −B-orthonormal on h,
    /// `metric`-orthonormal (Löwdin) on m. The returned frame matrix holds the
    /// new basis vectors in original coordinates.
    pub fn adapted(&self, metric: &InvariantMetric) -> Result<AdaptedFrame> {
        let k = self.dim_h();
        let n = self.dim();
        let h_frame = linalg::inv_sqrt_spd(&self.isotropy_gram());
        let m_frame = linalg::inv_sqrt_spd(metric.gram());
        let local = linalg::block_diag(&h_frame, &m_frame);
        let basis = &self.split_basis * &local;
        let alg = self
            .alg
            .change_basis(&basis)?
            .with_tolerance(self.tol());
        let h = if k == 0 {
            Subspace::zero(n)
        } else {
            Subspace::new(Mat::identity(n, n).columns(0, k).into_owned(), self.tol())?
        };
        let m = Subspace::new(Mat::identity(n, n).columns(k, n - k).into_owned(), self.tol())?;
        let space = HomogeneousSpace::with_complement(alg, h, m)?;
        Ok(AdaptedFrame {
            space,
            basis,
            m_frame,
        })
    }
}

/// A homogeneous space re-expressed in a background-orthonormal basis.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub space: HomogeneousSpace,
    /// Frame vectors in the original algebra coordinates.
    pub basis: Mat,
    /// Frame vectors of m in the original m-basis coordinates.
    pub m_frame: Mat,
}

impl AdaptedFrame {
    /// Endomorphism of g given in original coordinates, rewritten in the frame.
    pub fn endo_to_frame(&self, a: &Mat) -> Result<Mat> {
        let inv = linalg::inverse(&self.basis).ok_or_else(|| Error::Degenerate {
            what: "frame".into(),
        })?;
        Ok(inv * a * &self.basis)
    }

    /// Gram matrix on the original m-basis → Gram matrix in frame m-coordinates.
    pub fn metric_to_frame(&self, g: &Mat) -> Mat {
        self.m_frame.transpose() * g * &self.m_frame
    }

    /// Endomorphism of m in original m-coordinates → frame m-coordinates.
    pub fn m_endo_to_frame(&self, a: &Mat) -> Result<Mat> {
        let inv = linalg::inverse(&self.m_frame).ok_or_else(|| Error::Degenerate {
            what: "m frame".into(),
        })?;
        Ok(inv * a * &self.m_frame)
    }
}

/// An inner product on m, as a symmetric positive-definite Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMetric {
    g: Mat,
}

impl InvariantMetric {
    pub fn new(g: Mat) -> Result<Self> {
        if g.nrows() != g.ncols() {
            return Err(Error::invalid("metric matrix is not square"));
        }
        let asym = linalg::max_abs(&(&g - g.transpose()));
        if asym > 1e-9 * linalg::max_abs(&g).max(1.0) {
            return Err(Error::verification("metric symmetry", asym));
        }
        let g = linalg::sym(&g);
        let min = linalg::min_eigenvalue(&g);
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(InvariantMetric { g })
    }

    /// Builds the metric and checks Ad(H)-invariance on `space`.
    pub fn checked(space: &HomogeneousSpace, g: Mat) -> Result<Self> {
        if g.nrows() != space.dim_m() {
            return Err(Error::DimensionMismatch {
                expected: space.dim_m(),
                got: g.nrows(),
            });
        }
        let metric = Self::new(g)?;
        let res = invariance_check(space, &metric);
        if res > space.tol() * linalg::max_abs(metric.gram()).max(1.0) * 1e2 {
            return Err(Error::NonInvariantMetric { residual: res });
        }
        Ok(metric)
    }

    pub fn identity(n: usize) -> Self {
        InvariantMetric {
            g: Mat::identity(n, n),
        }
    }

    pub fn gram(&self) -> &Mat {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.g * y)[(0, 0)]
    }

    pub fn inverse(&self) -> Mat {
        linalg::inverse(&self.g).expect("positive definite")
    }

    /// Löwdin frame G^{-1/2}: its columns are an orthonormal basis.
    pub fn orthonormal_frame(&self) -> Mat {
        linalg::inv_sqrt_spd(&self.g)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn split_coordinates_for_sl2_so2() {
        let s = sl2_so2();
        assert_eq!(s.dim_h(), 1);
        assert_eq!(s.dim_m(), 2);
        // ad(E − F) on (H, E + F): H ↦ −2(E + F), E + F ↦ 2H.
        let a = &s.isotropy_actions()[0];
        let expected = Mat::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        assert!(linalg::fro(&(a - expected)) < 1e-12);
    }

    #[test]
    fn noncompact_isotropy_rejected() {
        let h = Subspace::from_vectors(3, &[v(&[1.0, 0.0, 0.0])], 1e-12).unwrap();
        assert!(HomogeneousSpace::new(sl2(), h).is_err());
    }

    #[test]
    fn metric_validation() {
        assert!(InvariantMetric::new(diag(&[1.0, -1.0])).is_err());
        assert!(InvariantMetric::new(Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
        let s = sl2_so2();
        assert!(InvariantMetric::checked(&s, diag(&[1.0, 1.0])).is_ok());
        assert!(matches!(
            InvariantMetric::checked(&s, diag(&[1.0, 2.0])),
            Err(Error::NonInvariantMetric { .. })
        ));
    }

    #[test]
    fn adapted_frame_is_orthonormal() {
        let s = sl2_so2();
        let g = InvariantMetric::checked(&s, diag(&[3.0, 3.0])).unwrap();
        let f = s.adapted(&g).unwrap();
        let ext = f.space.extended_gram(&InvariantMetric::identity(2));
        assert!(linalg::fro(&(ext - Mat::identity(3, 3))) < 1e-12);
        assert!(linalg::fro(&(f.metric_to_frame(g.gram()) - Mat::identity(2, 2))) < 1e-12);
    }
}
