use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// A linear subspace of a coordinate space, stored by a column basis.
///
/// Alongside the caller's basis an orthonormal basis is cached; every
/// membership and equality test goes through projections onto it, so two
/// subspaces compare equal regardless of the basis they were built from.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Mat,
    orth: Mat,
}

impl Subspace {
    /// Builds a subspace from linearly independent columns.
    pub fn new(basis: Mat, tol: f64) -> Result<Self> {
        let orth = linalg::column_space(&basis, tol);
        if orth.ncols() != basis.ncols() {
            return Err(Error::invalid(format!(
                "subspace basis has rank {} but {} columns",
                orth.ncols(),
                basis.ncols()
            )));
        }
        Ok(Subspace { basis, orth })
    }

    /// Span of arbitrary (possibly dependent) columns; the stored basis is orthonormal.
    pub fn span(columns: &Mat, tol: f64) -> Self {
        let orth = linalg::column_space(columns, tol);
        Subspace {
            basis: orth.clone(),
            orth,
        }
    }

    pub fn from_vectors(ambient_dim: usize, vectors: &[Vector], tol: f64) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
        }
        Self::new(linalg::hstack(ambient_dim, vectors), tol)
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            basis: Mat::zeros(ambient_dim, 0),
            orth: Mat::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let id = Mat::identity(ambient_dim, ambient_dim);
        Subspace {
            basis: id.clone(),
            orth: id,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn orthonormal_basis(&self) -> &Mat {
        &self.orth
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.basis.column(i).into_owned()
    }

    pub fn vectors(&self) -> Vec<Vector> {
        (0..self.dim()).map(|i| self.vector(i)).collect()
    }

    /// Euclidean orthogonal projector onto the subspace.
    pub fn projector(&self) -> Mat {
        &self.orth * self.orth.transpose()
    }

    /// Distance of `v` from the subspace.
    pub fn residual(&self, v: &Vector) -> f64 {
        let p = &self.orth * (self.orth.transpose() * v);
        (v - p).norm()
    }

    /// Largest distance from `self` of a unit vector of `other`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        (0..other.dim())
            .map(|i| self.residual(&other.orth.column(i).into_owned()))
            .fold(0.0, f64::max)
    }

    /// Mutual projection residual; zero iff the subspaces coincide.
    pub fn equality_residual(&self, other: &Subspace) -> f64 {
        self.containment_residual(other)
            .max(other.containment_residual(self))
    }

    /// Sum of two subspaces.
    pub fn sum(&self, other: &Subspace, tol: f64) -> Subspace {
        Subspace::span(&linalg::hcat(&self.basis, &other.basis), tol)
    }

    /// Image of the subspace under a linear map.
    pub fn image(&self, map: &Mat, tol: f64) -> Subspace {
        Subspace::span(&(map * &self.basis), tol)
    }

    /// Orthogonal complement with respect to the inner product `gram`.
    pub fn complement(&self, gram: &Mat, tol: f64) -> Subspace {
        let constraints = self.basis.transpose() * gram;
        let ns = linalg::null_space(&constraints, tol);
        Subspace {
            basis: ns.clone(),
            orth: linalg::column_space(&ns, tol),
        }
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            basis: self.vectors().iter().map(|v| v.iter().cloned().collect()).collect(),
        }
    }

    pub fn from_json(json: &SubspaceJson, ambient_dim: usize, tol: f64) -> Result<Self> {
        let vectors: Vec<Vector> = json
            .basis
            .iter()
            .map(|v| Vector::from_vec(v.clone()))
            .collect();
        Self::from_vectors(ambient_dim, &vectors, tol)
    }
}

/// `{"basis": [[...], ...]}`, one inner list per basis vector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SubspaceJson {
    pub basis: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_is_basis_independent() {
        let a = Subspace::from_vectors(
            3,
            &[
                Vector::from_vec(vec![1.0, 0.0, 0.0]),
                Vector::from_vec(vec![0.0, 1.0, 0.0]),
            ],
            1e-12,
        )
        .unwrap();
        let b = Subspace::from_vectors(
            3,
            &[
                Vector::from_vec(vec![1.0, 1.0, 0.0]),
                Vector::from_vec(vec![1.0, -2.0, 0.0]),
            ],
            1e-12,
        )
        .unwrap();
        assert!(a.equality_residual(&b) < 1e-12);
        let line = Subspace::from_vectors(3, &[Vector::from_vec(vec![1.0, 0.0, 0.0])], 1e-12).unwrap();
        assert!(a.containment_residual(&line) < 1e-12);
        assert!(a.equality_residual(&line) > 0.5);
    }

    #[test]
    fn dependent_columns_rejected() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(Subspace::new(m, 1e-12).is_err());
    }
}
