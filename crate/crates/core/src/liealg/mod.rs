//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! Everything here works in floating point with a per-algebra tolerance
//! (default [`DEFAULT_TOL`]). Structural results (radical, nilradical,
//! complements) are verified after they are computed and reported as errors
//! when the verification fails, instead of being silently returned.

mod iwasawa;
mod subspace;

pub use iwasawa::{IwasawaData, Root};
pub use subspace::{Subspace, SubspaceJson};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    labels: Vec<String>,
    /// c[(i * n + j) * n + k]: coefficient of e_k in [e_i, e_j].
    c: Vec<f64>,
    tol: f64,
}

impl LieAlgebra {
    /// Builds an algebra from a full structure-constant array.
    pub fn new(labels: Vec<String>, c: Vec<f64>) -> Result<Self> {
        let dim = labels.len();
        if c.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: c.len(),
            });
        }
        let alg = LieAlgebra {
            dim,
            labels,
            c,
            tol: DEFAULT_TOL,
        };
        let asym = alg.antisymmetry_residual();
        if asym > alg.tol {
            return Err(Error::verification("antisymmetry of structure constants", asym));
        }
        Ok(alg)
    }

    /// Builds an algebra from `[i, j, k, value]` entries with `i < j`; the
    /// `j, i` entries are filled in by antisymmetry.
    pub fn from_brackets(labels: Vec<String>, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let n = labels.len();
        let mut c = vec![0.0; n * n * n];
        for &(i, j, k, v) in brackets {
            if i >= n || j >= n || k >= n {
                return Err(Error::invalid(format!(
                    "bracket index ({i}, {j}, {k}) out of range for dimension {n}"
                )));
            }
            if i >= j {
                return Err(Error::invalid(format!(
                    "bracket entries must have i < j, got ({i}, {j})"
                )));
            }
            c[(i * n + j) * n + k] += v;
            c[(j * n + i) * n + k] -= v;
        }
        Self::new(labels, c)
    }

    /// Structure constants of the matrix Lie algebra spanned by `mats`
    /// (commutator bracket), solved by least squares and checked for closure.
    pub fn from_matrices(labels: Vec<String>, mats: &[Mat]) -> Result<Self> {
        let n = mats.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if n == 0 {
            return Self::new(labels, Vec::new());
        }
        let size = mats[0].len();
        let mut basis = Mat::zeros(size, n);
        for (j, m) in mats.iter().enumerate() {
            basis.set_column(j, &Vector::from_iterator(size, m.iter().cloned()));
        }
        let qr_solve = basis.clone().svd(true, true);
        let mut c = vec![0.0; n * n * n];
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let br = linalg::commutator(&mats[i], &mats[j]);
                let v = Vector::from_iterator(size, br.iter().cloned());
                let coeffs = qr_solve
                    .solve(&v, 1e-13)
                    .map_err(|e| Error::invalid(e.to_string()))?;
                worst = worst.max((&basis * &coeffs - &v).norm());
                for k in 0..n {
                    c[(i * n + j) * n + k] = coeffs[k];
                }
            }
        }
        if worst > DEFAULT_TOL {
            return Err(Error::verification("closure of matrix span under commutator", worst));
        }
        // Clean representation noise around exact values.
        for v in c.iter_mut() {
            if v.abs() < 1e-14 {
                *v = 0.0;
            }
        }
        Self::new(labels, c)
    }

    pub fn abelian(n: usize) -> Self {
        LieAlgebra {
            dim: n,
            labels: (0..n).map(|i| format!("e{}", i + 1)).collect(),
            c: vec![0.0; n * n * n],
            tol: DEFAULT_TOL,
        }
    }

    /// Lie algebra direct sum; the basis of `self` comes first.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let (a, b) = (self.dim, other.dim);
        let n = a + b;
        let mut c = vec![0.0; n * n * n];
        for i in 0..a {
            for j in 0..a {
                for k in 0..a {
                    c[(i * n + j) * n + k] = self.c(i, j, k);
                }
            }
        }
        for i in 0..b {
            for j in 0..b {
                for k in 0..b {
                    c[((a + i) * n + a + j) * n + a + k] = other.c(i, j, k);
                }
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        LieAlgebra {
            dim: n,
            labels,
            c,
            tol: self.tol.max(other.tol),
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    fn check_len(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += w * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `ad(e_i)`.
    pub fn ad_basis(&self, i: usize) -> Mat {
        let n = self.dim;
        Mat::from_fn(n, n, |k, j| self.c(i, j, k))
    }

    /// Matrix of `Y ↦ [x, Y]`.
    pub fn ad(&self, x: &Vector) -> Result<Mat> {
        self.check_len(x)?;
        let n = self.dim;
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            if x[i] != 0.0 {
                out += self.ad_basis(i) * x[i];
            }
        }
        Ok(out)
    }

    fn ad_unchecked(&self, x: &Vector) -> Mat {
        self.ad(x).expect("vector length matches algebra dimension")
    }

    /// `tr ad(e_i)` for each basis vector.
    pub fn ad_traces(&self) -> Vector {
        Vector::from_iterator(self.dim, (0..self.dim).map(|i| self.ad_basis(i).trace()))
    }

    pub fn is_unimodular(&self) -> bool {
        self.ad_traces().amax() <= self.tol
    }

    pub fn killing_form(&self) -> Mat {
        let n = self.dim;
        let ads: Vec<Mat> = (0..n).map(|i| self.ad_basis(i)).collect();
        Mat::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace())
    }

    /// Max over basis triples of |B([x,y],z) + B(y,[x,z])|.
    pub fn killing_invariance_residual(&self) -> f64 {
        let n = self.dim;
        let b = self.killing_form();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            let adx = self.ad_basis(x);
            // B(ad_x ·, ·) + B(·, ad_x ·) as a matrix.
            let m = adx.transpose() * &b + &b * &adx;
            worst = worst.max(linalg::max_abs(&m));
        }
        worst
    }

    /// (positive, negative, zero) eigenvalue counts of the Killing form.
    pub fn killing_signature(&self) -> (usize, usize, usize) {
        let b = self.killing_form();
        let scale = linalg::max_abs(&b).max(1.0);
        let (vals, _) = linalg::sorted_eigen(&b);
        let cut = self.tol.max(1e-9) * scale;
        let pos = vals.iter().filter(|&&v| v > cut).count();
        let neg = vals.iter().filter(|&&v| v < -cut).count();
        (pos, neg, self.dim - pos - neg)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Max-norm of the cyclic Jacobi sum over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let e = |i: usize| {
            let mut v = Vector::zeros(n);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (x, y, z) = (e(i), e(j), e(k));
                    let s = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Span of all brackets [a, b] with a ∈ A, b ∈ B.
    pub fn bracket_span(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let mut cols = Vec::new();
        for x in a.vectors() {
            for y in b.vectors() {
                cols.push(self.bracket(&x, &y));
            }
        }
        if cols.is_empty() {
            return Subspace::zero(self.dim);
        }
        Subspace::span(&linalg::hstack(self.dim, &cols), self.tol)
    }

    pub fn derived_algebra(&self) -> Subspace {
        let g = Subspace::full(self.dim);
        self.bracket_span(&g, &g)
    }

    /// Largest distance of [a, b] from `target` over basis pairs.
    pub fn bracket_residual(&self, a: &Subspace, b: &Subspace, target: &Subspace) -> f64 {
        let mut worst: f64 = 0.0;
        for x in a.orthonormal_basis().column_iter() {
            for y in b.orthonormal_basis().column_iter() {
                let br = self.bracket(&x.into_owned(), &y.into_owned());
                worst = worst.max(target.residual(&br));
            }
        }
        worst
    }

    pub fn subalgebra_residual(&self, s: &Subspace) -> f64 {
        self.bracket_residual(s, s, s)
    }

    pub fn ideal_residual(&self, s: &Subspace) -> f64 {
        self.bracket_residual(&Subspace::full(self.dim), s, s)
    }

    /// Length of the derived series of `s` until it vanishes; `None` if it
    /// stabilises at a nonzero subspace.
    pub fn solvable_length(&self, s: &Subspace) -> Option<usize> {
        let mut cur = s.clone();
        let mut steps = 0;
        while cur.dim() > 0 {
            let next = self.bracket_span(&cur, &cur);
            if next.dim() == cur.dim() {
                return None;
            }
            cur = next;
            steps += 1;
        }
        Some(steps)
    }

    /// Whether `ad(x)` is nilpotent: ‖ad(x)^n‖ small relative to ‖ad(x)‖^n.
    pub fn ad_nilpotency_residual(&self, x: &Vector) -> f64 {
        let a = self.ad_unchecked(x);
        let scale = a.norm().max(1.0);
        let mut p = Mat::identity(self.dim, self.dim);
        for _ in 0..self.dim {
            p = &p * &a / scale;
        }
        p.norm()
    }

    /// Maximal solvable ideal, computed as the Killing-orthogonal of [g, g].
    pub fn radical(&self) -> Result<Subspace> {
        let d = self.derived_algebra();
        let b = self.killing_form();
        let constraints = d.basis().transpose() * &b;
        let ns = linalg::null_space(&constraints, self.tol);
        let r = Subspace::span(&ns, self.tol);
        let ideal = self.ideal_residual(&r);
        if ideal > 1e2 * self.tol {
            return Err(Error::verification("radical is an ideal", ideal));
        }
        if self.solvable_length(&r).is_none() {
            return Err(Error::verification("radical is solvable", f64::INFINITY));
        }
        Ok(r)
    }

    /// Maximal nilpotent ideal.
    ///
    /// The candidate is the set of radical elements whose `ad` lies in the
    /// trace-form radical of the associative algebra generated by `ad(rad)`:
    /// those are exactly the radical elements acting nilpotently. The result is
    /// then checked to be an ideal consisting of ad-nilpotent elements.
    pub fn nilradical(&self) -> Result<Subspace> {
        let n = self.dim;
        let r = self.radical()?;
        if r.dim() == 0 {
            return Ok(r);
        }
        let gens: Vec<Mat> = r.vectors().iter().map(|x| self.ad_unchecked(x)).collect();
        let assoc = associative_closure(&gens, n, self.tol);
        let mut m = Mat::zeros(assoc.len(), gens.len());
        for (a, b) in assoc.iter().enumerate() {
            for (i, g) in gens.iter().enumerate() {
                m[(a, i)] = (g * b).trace();
            }
        }
        let coeffs = linalg::null_space(&m, 1e3 * self.tol);
        let nil = Subspace::span(&(r.basis() * coeffs), self.tol);
        let ideal = self.ideal_residual(&nil);
        let nilp = nil
            .orthonormal_basis()
            .column_iter()
            .map(|x| self.ad_nilpotency_residual(&x.into_owned()))
            .fold(0.0, f64::max);
        if ideal > 1e2 * self.tol || nilp > 1e3 * self.tol {
            return Err(Error::verification("nilradical candidate", ideal.max(nilp)));
        }
        Ok(nil)
    }

    /// Killing-orthogonal complement of a subalgebra with nondegenerate B|_h.
    ///
    /// The basis is the B-orthogonal projection of standard basis vectors,
    /// picked in index order, so it is deterministic.
    pub fn reductive_complement(&self, h: &Subspace) -> Result<Subspace> {
        let n = self.dim;
        if h.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: h.ambient_dim(),
            });
        }
        if h.dim() == 0 {
            return Ok(Subspace::full(n));
        }
        let sub = self.subalgebra_residual(h);
        if sub > 1e2 * self.tol {
            return Err(Error::verification("isotropy is a subalgebra", sub));
        }
        let b = self.killing_form();
        let hb = h.basis();
        let bhh = hb.transpose() * &b * hb;
        let scale = linalg::max_abs(&b).max(1.0);
        let (vals, _) = linalg::sorted_eigen(&bhh);
        let smallest = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if smallest <= 1e3 * self.tol * scale {
            return Err(Error::Degenerate {
                what: "Killing form restricted to the isotropy subalgebra".into(),
            });
        }
        let inv = linalg::inverse(&bhh).ok_or_else(|| Error::Degenerate {
            what: "Killing form restricted to the isotropy subalgebra".into(),
        })?;
        let proj = Mat::identity(n, n) - hb * inv * hb.transpose() * &b;
        let mut chosen: Vec<Vector> = Vec::new();
        for i in 0..n {
            let v = proj.column(i).into_owned();
            let mut trial = chosen.clone();
            trial.push(v.clone());
            if linalg::rank(&linalg::hstack(n, &trial), 1e-10) == trial.len() {
                chosen = trial;
            }
            if chosen.len() == n - h.dim() {
                break;
            }
        }
        let m = Subspace::from_vectors(n, &chosen, self.tol)?;
        let cross = linalg::max_abs(&(hb.transpose() * &b * m.basis()));
        if cross > 1e2 * self.tol * scale {
            return Err(Error::verification("B(h, m) = 0", cross));
        }
        let inv_res = self.bracket_residual(h, &m, &m);
        if inv_res > 1e2 * self.tol {
            return Err(Error::verification("[h, m] ⊆ m", inv_res));
        }
        Ok(m)
    }

    /// Basis of Der(g), as matrices acting on coordinate columns.
    pub fn derivation_space(&self) -> Vec<Mat> {
        let n = self.dim;
        // Unknown D_{ab} sits at column a * n + b.
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let mut sys = Mat::zeros(pairs.len() * n, n * n);
        for (p, &(i, j)) in pairs.iter().enumerate() {
            for k in 0..n {
                let row = p * n + k;
                for l in 0..n {
                    sys[(row, k * n + l)] += self.c(i, j, l);
                    sys[(row, l * n + i)] -= self.c(l, j, k);
                    sys[(row, l * n + j)] -= self.c(i, l, k);
                }
            }
        }
        let ns = linalg::null_space(&sys, 1e-10);
        (0..ns.ncols())
            .map(|col| Mat::from_fn(n, n, |a, b| ns[(a * n + b, col)]))
            .collect()
    }

    /// Max over basis pairs of ‖D[x,y] − [Dx,y] − [x,Dy]‖.
    pub fn derivation_residual(&self, d: &Mat) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ei, ej) = (unit(n, i), unit(n, j));
                let lhs = d * self.bracket(&ei, &ej);
                let rhs = self.bracket(&(d * &ei), &ej) + self.bracket(&ei, &(d * &ej));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// Max over basis pairs of ‖A[x,y] − [Ax,Ay]‖.
    pub fn automorphism_residual(&self, a: &Mat) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ei, ej) = (unit(n, i), unit(n, j));
                let lhs = a * self.bracket(&ei, &ej);
                let rhs = self.bracket(&(a * &ei), &(a * &ej));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// Same algebra in the basis given by the columns of `p`.
    pub fn change_basis(&self, p: &Mat) -> Result<LieAlgebra> {
        let n = self.dim;
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.ncols(),
            });
        }
        let lu = p.clone().lu();
        let mut c = vec![0.0; n * n * n];
        for a in 0..n {
            let fa = p.column(a).into_owned();
            for b in 0..n {
                let fb = p.column(b).into_owned();
                let coeffs = lu
                    .solve(&self.bracket(&fa, &fb))
                    .ok_or_else(|| Error::Degenerate {
                        what: "change-of-basis matrix".into(),
                    })?;
                for k in 0..n {
                    c[(a * n + b) * n + k] = coeffs[k];
                }
            }
        }
        // Antisymmetrise away round-off from the solve.
        let mut sym_c = c.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    sym_c[(i * n + j) * n + k] =
                        0.5 * (c[(i * n + j) * n + k] - c[(j * n + i) * n + k]);
                }
            }
        }
        Ok(LieAlgebra {
            dim: n,
            labels: (0..n).map(|i| format!("f{}", i + 1)).collect(),
            c: sym_c,
            tol: self.tol,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn to_json(&self) -> LieAlgebraJson {
        let n = self.dim;
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        brackets.push((i, j, k, v));
                    }
                }
            }
        }
        LieAlgebraJson {
            dim: n,
            labels: self.labels.clone(),
            brackets,
        }
    }

    pub fn from_json(json: &LieAlgebraJson) -> Result<Self> {
        if json.labels.len() != json.dim {
            return Err(Error::Schema(format!(
                "dim is {} but {} labels were given",
                json.dim,
                json.labels.len()
            )));
        }
        Self::from_brackets(json.labels.clone(), &json.brackets)
    }
}

/// `{"dim": n, "labels": [...], "brackets": [[i, j, k, value], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LieAlgebraJson {
    pub dim: usize,
    pub labels: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<(usize, usize, usize, f64)>,
}

pub(crate) fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Orthonormal (Frobenius) basis of the unital associative algebra generated by `gens`.
fn associative_closure(gens: &[Mat], n: usize, tol: f64) -> Vec<Mat> {
    let vec_of = |m: &Mat| Vector::from_iterator(n * n, m.iter().cloned());
    let mat_of = |v: &Vector| Mat::from_iterator(n, n, v.iter().cloned());
    let mut cols: Vec<Vector> = vec![vec_of(&Mat::identity(n, n))];
    cols.extend(gens.iter().map(vec_of));
    let mut basis = linalg::column_space(&linalg::hstack(n * n, &cols), tol);
    loop {
        let current: Vec<Mat> = basis.column_iter().map(|c| mat_of(&c.into_owned())).collect();
        let mut cols: Vec<Vector> = current.iter().map(vec_of).collect();
        for a in &current {
            for g in gens {
                cols.push(vec_of(&(a * g)));
            }
        }
        let next = linalg::column_space(&linalg::hstack(n * n, &cols), tol);
        if next.ncols() == basis.ncols() {
            return current;
        }
        basis = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn h3() -> LieAlgebra {
        LieAlgebra::from_brackets(labels(&["X", "Y", "Z"]), &[(0, 1, 2, 1.0)]).unwrap()
    }

    fn axb() -> LieAlgebra {
        LieAlgebra::from_brackets(labels(&["A", "X"]), &[(0, 1, 1, 1.0)]).unwrap()
    }

    fn sl2() -> LieAlgebra {
        LieAlgebra::from_brackets(
            labels(&["H", "E", "F"]),
            &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)],
        )
        .unwrap()
    }

    fn su2() -> LieAlgebra {
        LieAlgebra::from_brackets(
            labels(&["e1", "e2", "e3"]),
            &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 1, -1.0)],
        )
        .unwrap()
    }

    fn sl2_r2() -> LieAlgebra {
        // H, E, F acting on V1, V2 by the standard representation.
        LieAlgebra::from_brackets(
            labels(&["H", "E", "F", "V1", "V2"]),
            &[
                (0, 1, 1, 2.0),
                (0, 2, 2, -2.0),
                (1, 2, 0, 1.0),
                (0, 3, 3, 1.0),
                (0, 4, 4, -1.0),
                (1, 4, 3, 1.0),
                (2, 3, 4, 1.0),
            ],
        )
        .unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    #[test]
    fn ad_of_h3_generator() {
        let a = h3().ad(&v(&[1.0, 0.0, 0.0])).unwrap();
        let mut expected = Mat::zeros(3, 3);
        expected[(2, 1)] = 1.0;
        assert_eq!(a, expected);
        assert_eq!(h3().ad(&Vector::zeros(3)).unwrap(), Mat::zeros(3, 3));
    }

    #[test]
    fn ad_of_sl2_cartan_element() {
        let a = sl2().ad(&v(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(a, Mat::from_diagonal(&v(&[0.0, 2.0, -2.0])));
    }

    #[test]
    fn ad_rejects_wrong_length() {
        assert!(matches!(
            sl2().ad(&v(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn killing_forms() {
        assert_eq!(h3().killing_form(), Mat::zeros(3, 3));
        let b = sl2().killing_form();
        let expected = Mat::from_row_slice(3, 3, &[8.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 4.0, 0.0]);
        assert!(linalg::fro(&(b - expected)) < 1e-12);
        let b = su2().killing_form();
        assert!(linalg::fro(&(b + Mat::identity(3, 3) * 2.0)) < 1e-12);
        assert!(sl2().killing_invariance_residual() < 1e-12);
        assert!(sl2_r2().killing_invariance_residual() < 1e-12);
        assert_eq!(sl2().killing_signature(), (2, 1, 0));
    }

    #[test]
    fn jacobi() {
        assert_eq!(h3().jacobi_residual(), 0.0);
        assert_eq!(LieAlgebra::abelian(4).jacobi_residual(), 0.0);
        assert!(sl2_r2().jacobi_residual() < 1e-12);
        let n = 3;
        let perturbed = |i: usize, j: usize, k: usize| {
            let mut c = sl2().c.clone();
            c[(i * n + j) * n + k] += 0.1;
            c[(j * n + i) * n + k] -= 0.1;
            LieAlgebra::new(labels(&["H", "E", "F"]), c).unwrap()
        };
        // [H, E] = 2E + 0.1F is still a Lie bracket (a change of basis of sl2).
        assert!(perturbed(0, 1, 2).jacobi_residual() < 1e-12);
        // [E, F] = H + 0.1E is not: the cyclic sum on (H, E, F) is 0.2E.
        assert!((perturbed(1, 2, 1).jacobi_residual() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn radicals() {
        assert_eq!(axb().radical().unwrap().dim(), 2);
        assert_eq!(sl2().radical().unwrap().dim(), 0);
        let r = sl2_r2().radical().unwrap();
        let expected = Subspace::from_vectors(
            5,
            &[v(&[0.0, 0.0, 0.0, 1.0, 0.0]), v(&[0.0, 0.0, 0.0, 0.0, 1.0])],
            1e-12,
        )
        .unwrap();
        assert!(r.equality_residual(&expected) < 1e-10);
    }

    #[test]
    fn nilradicals() {
        assert_eq!(h3().nilradical().unwrap().dim(), 3);
        let n = axb().nilradical().unwrap();
        let x = Subspace::from_vectors(2, &[v(&[0.0, 1.0])], 1e-12).unwrap();
        assert!(n.equality_residual(&x) < 1e-10);
        assert_eq!(sl2().direct_sum(&sl2()).nilradical().unwrap().dim(), 0);
        let r2 = sl2_r2().nilradical().unwrap();
        assert_eq!(r2.dim(), 2);
    }

    #[test]
    fn nilradical_finds_diagonal_combination() {
        // [A, X] = X, [B, X] = X: A − B is central, so the nilradical is span(A − B, X).
        let g = LieAlgebra::from_brackets(labels(&["A", "B", "X"]), &[(0, 2, 2, 1.0), (1, 2, 2, 1.0)]).unwrap();
        let n = g.nilradical().unwrap();
        let expected =
            Subspace::from_vectors(3, &[v(&[1.0, -1.0, 0.0]), v(&[0.0, 0.0, 1.0])], 1e-12).unwrap();
        assert!(n.equality_residual(&expected) < 1e-10);
    }

    #[test]
    fn complements() {
        let g = sl2();
        let m = g.reductive_complement(&Subspace::zero(3)).unwrap();
        assert_eq!(m.dim(), 3);
        let k = Subspace::from_vectors(3, &[v(&[0.0, 1.0, -1.0])], 1e-12).unwrap();
        let m = g.reductive_complement(&k).unwrap();
        let expected = Subspace::from_vectors(3, &[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 1.0])], 1e-12).unwrap();
        assert!(m.equality_residual(&expected) < 1e-10);
        let z = Subspace::from_vectors(3, &[v(&[0.0, 0.0, 1.0])], 1e-12).unwrap();
        assert!(matches!(h3().reductive_complement(&z), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn derivations() {
        assert_eq!(LieAlgebra::abelian(3).derivation_space().len(), 9);
        assert_eq!(h3().derivation_space().len(), 6);
        let ders = sl2().derivation_space();
        assert_eq!(ders.len(), 3);
        let span = Subspace::span(
            &linalg::hstack(
                9,
                &ders
                    .iter()
                    .map(|d| Vector::from_iterator(9, d.iter().cloned()))
                    .collect::<Vec<_>>(),
            ),
            1e-12,
        );
        for i in 0..3 {
            let ad = sl2().ad_basis(i);
            assert!(span.residual(&Vector::from_iterator(9, ad.iter().cloned())) < 1e-10);
        }
        for d in &ders {
            assert!(sl2().derivation_residual(d) < 1e-10);
        }
    }

    #[test]
    fn matrices_round_trip() {
        let h = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let e = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let f = Mat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let g = LieAlgebra::from_matrices(labels(&["H", "E", "F"]), &[h, e, f]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((g.c(i, j, k) - sl2().c(i, j, k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = sl2_r2();
        let back = LieAlgebra::from_json(&g.to_json()).unwrap();
        assert_eq!(back.c, g.c);
        let text = serde_json::to_string(&h3().to_json()).unwrap();
        assert_eq!(text, r#"{"dim":3,"labels":["X","Y","Z"],"brackets":[[0,1,2,1.0]]}"#);
    }

    #[test]
    fn change_basis_preserves_structure() {
        let p = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, -1.0]);
        let g = sl2().change_basis(&p).unwrap();
        assert!(g.jacobi_residual() < 1e-12);
        assert_eq!(g.killing_signature(), (2, 1, 0));
    }
}
