use super::{unit, LieAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// A restricted root: its values on the `a`-basis and its root space.
#[derive(Debug, Clone)]
pub struct Root {
    pub functional: Vector,
    pub space: Subspace,
}

impl Root {
    /// Lexicographic positivity on the coefficient vector.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.functional
            .iter()
            .find(|v| v.abs() > tol)
            .is_some_and(|v| *v > 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct IwasawaData {
    pub k: Subspace,
    pub a: Subspace,
    pub n: Subspace,
    pub roots: Vec<Root>,
}

impl IwasawaData {
    /// The solvable Iwasawa subalgebra a ⊕ n.
    pub fn an(&self, tol: f64) -> Subspace {
        self.a.sum(&self.n, tol)
    }

    pub fn positive_roots(&self, tol: f64) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(move |r| r.is_positive(tol))
    }
}

impl LieAlgebra {
    /// Checks that `theta` is a Cartan involution; returns the inner product
    /// B_θ(X, Y) = −B(X, θY).
    pub fn cartan_inner_product(&self, theta: &Mat) -> Result<Mat> {
        let n = self.dim();
        if theta.nrows() != n || theta.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: theta.nrows(),
            });
        }
        let b = self.killing_form();
        let scale = linalg::max_abs(&b).max(1.0);
        let (_, _, zero) = self.killing_signature();
        if zero > 0 {
            return Err(Error::Degenerate {
                what: "Killing form (algebra is not semisimple)".into(),
            });
        }
        let inv = linalg::max_abs(&(theta * theta - Mat::identity(n, n)));
        if inv > 1e2 * self.tol() {
            return Err(Error::verification("θ² = Id", inv));
        }
        let aut = self.automorphism_residual(theta);
        if aut > 1e2 * self.tol() {
            return Err(Error::verification("θ is an automorphism", aut));
        }
        let b_theta = linalg::sym(&(-(&b * theta)));
        let min = linalg::min_eigenvalue(&b_theta);
        if min <= 1e2 * self.tol() * scale {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        Ok(b_theta)
    }

    /// Iwasawa decomposition g = k ⊕ a ⊕ n for a supplied Cartan involution.
    ///
    /// `a` is grown greedily from the p-projections of the standard basis
    /// vectors, then completed from its centraliser in p. Root spaces are joint
    /// eigenspaces of ad(a), ordered lexicographically on their values on the
    /// a-basis.
    pub fn iwasawa_decomposition(&self, theta: &Mat) -> Result<IwasawaData> {
        let n = self.dim();
        let tol = self.tol();
        let b_theta = self.cartan_inner_product(theta)?;
        let id = Mat::identity(n, n);
        let k = Subspace::span(&((&id + theta) * 0.5), tol);
        let p = Subspace::span(&((&id - theta) * 0.5), tol);

        // Greedy maximal abelian subspace of p.
        let mut a_vecs: Vec<Vector> = Vec::new();
        let commutes = |x: &Vector, set: &[Vector]| {
            set.iter().all(|y| self.bracket(x, y).amax() <= 1e2 * tol)
        };
        for i in 0..n {
            let cand = (&id - theta) * unit(n, i) * 0.5;
            if cand.amax() <= tol || !commutes(&cand, &a_vecs) {
                continue;
            }
            let mut trial = a_vecs.clone();
            trial.push(cand);
            if linalg::rank(&linalg::hstack(n, &trial), 1e-10) == trial.len() {
                a_vecs = trial;
            }
        }
        loop {
            // Centraliser of a in p; extend a if it is strictly larger.
            let pb = p.basis();
            let mut rows = Mat::zeros(a_vecs.len() * n, pb.ncols());
            for (ai, x) in a_vecs.iter().enumerate() {
                let ad = self.ad(x)?;
                let block = ad * pb;
                rows.view_mut((ai * n, 0), (n, pb.ncols())).copy_from(&block);
            }
            let cent = if a_vecs.is_empty() {
                p.clone()
            } else {
                Subspace::span(&(pb * linalg::null_space(&rows, 1e-10)), tol)
            };
            let a_sub = if a_vecs.is_empty() {
                Subspace::zero(n)
            } else {
                Subspace::span(&linalg::hstack(n, &a_vecs), tol)
            };
            if cent.dim() <= a_sub.dim() {
                break;
            }
            let extra = cent
                .orthonormal_basis()
                .column_iter()
                .map(|c| c.into_owned())
                .find(|c| a_sub.residual(c) > 1e-6)
                .expect("centraliser strictly larger than a");
            a_vecs.push(extra);
        }
        let a = if a_vecs.is_empty() {
            Subspace::zero(n)
        } else {
            Subspace::new(linalg::hstack(n, &a_vecs), tol)?
        };
        if a.dim() == 0 {
            return Ok(IwasawaData {
                k,
                a,
                n: Subspace::zero(n),
                roots: Vec::new(),
            });
        }

        // Joint eigenspaces in a B_θ-orthonormal frame, where ad(H) is symmetric.
        let frame = linalg::inv_sqrt_spd(&b_theta);
        let frame_inv = linalg::sqrt_spd(&b_theta);
        let ads: Vec<Mat> = a_vecs
            .iter()
            .map(|x| Ok(&frame_inv * self.ad(x)? * &frame))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = (0..ads.len()).map(|i| 1.0 + (i as f64 + 2.0).sqrt() * 0.37).collect();
        let mut generic = Mat::zeros(n, n);
        for (w, m) in weights.iter().zip(&ads) {
            generic += m * *w;
        }
        let (vals, vecs) = linalg::sorted_eigen(&generic);
        let cluster_tol = 1e-6 * vals.amax().max(1.0);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            match clusters.last_mut() {
                Some(c) if (vals[i] - vals[*c.last().unwrap()]).abs() <= cluster_tol => c.push(i),
                _ => clusters.push(vec![i]),
            }
        }
        let mut roots = Vec::new();
        for cluster in clusters {
            let u = linalg::hstack(n, &cluster.iter().map(|&i| vecs.column(i).into_owned()).collect::<Vec<_>>());
            let mut functional = Vector::zeros(ads.len());
            for (hi, m) in ads.iter().enumerate() {
                let restricted = u.transpose() * m * &u;
                let lam = restricted.trace() / cluster.len() as f64;
                let res = linalg::fro(&(m * &u - &u * lam));
                if res > 1e-7 * vals.amax().max(1.0) {
                    return Err(Error::verification("joint eigenspace of ad(a)", res));
                }
                functional[hi] = lam;
            }
            if functional.amax() <= 1e-7 {
                continue;
            }
            let space = Subspace::new(&frame * u, tol)?;
            roots.push(Root { functional, space });
        }
        roots.sort_by(|x, y| {
            for (a, b) in x.functional.iter().zip(y.functional.iter()) {
                if (a - b).abs() > 1e-9 {
                    return b.total_cmp(a);
                }
            }
            std::cmp::Ordering::Equal
        });
        let mut n_cols = Vec::new();
        for r in roots.iter().filter(|r| r.is_positive(1e-9)) {
            n_cols.extend(r.space.vectors());
        }
        let n_sub = if n_cols.is_empty() {
            Subspace::zero(n)
        } else {
            Subspace::span(&linalg::hstack(n, &n_cols), tol)
        };
        let data = IwasawaData {
            k,
            a,
            n: n_sub,
            roots,
        };
        data.verify(self, theta)?;
        Ok(data)
    }
}

impl IwasawaData {
    /// Bracket relations of the decomposition; returns the worst residual.
    pub fn verify(&self, alg: &LieAlgebra, theta: &Mat) -> Result<f64> {
        let n = alg.dim();
        let tol = alg.tol();
        let mut worst: f64 = 0.0;
        let total = self.k.sum(&self.a, tol).sum(&self.n, tol);
        if total.dim() != n || self.k.dim() + self.a.dim() + self.n.dim() != n {
            return Err(Error::verification("g = k ⊕ a ⊕ n", f64::INFINITY));
        }
        worst = worst.max(alg.bracket_residual(&self.a, &self.a, &Subspace::zero(n)));
        worst = worst.max(alg.subalgebra_residual(&self.n));
        for root in &self.roots {
            for (hi, h) in self.a.vectors().iter().enumerate() {
                for x in root.space.vectors() {
                    let lhs = alg.bracket(h, &x);
                    worst = worst.max((lhs - &x * root.functional[hi]).amax());
                }
            }
            // θ maps the λ root space onto the −λ one.
            let image = root.space.image(theta, tol);
            let opposite = self
                .roots
                .iter()
                .find(|r| (&r.functional + &root.functional).amax() < 1e-7)
                .ok_or_else(|| Error::verification("θ l_λ = l_{−λ}", f64::INFINITY))?;
            worst = worst.max(image.equality_residual(&opposite.space));
        }
        if worst > 1e-7 {
            return Err(Error::verification("Iwasawa bracket relations", worst));
        }
        Ok(worst)
    }
}
