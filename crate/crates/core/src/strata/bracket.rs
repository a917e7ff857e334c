use crate::error::{Error, Result};
use crate::liealg::LieAlgebra;
use crate::linalg::{self, Mat};

use super::beta::{BetaData, BetaSource};

/// A Lie bracket on Rⁿ written in an orthonormal basis: `c[(i*n + j)*n + k]`
/// is the e_k-coefficient of μ(e_i, e_j).
#[derive(Debug, Clone, PartialEq)]
pub struct BracketPoint {
    n: usize,
    c: Vec<f64>,
}

impl BracketPoint {
    /// Takes the algebra's structure constants as-is; the basis is treated as orthonormal.
    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        let n = alg.dim();
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    c[(i * n + j) * n + k] = alg.c(i, j, k);
                }
            }
        }
        BracketPoint { n, c }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.n + j) * self.n + k]
    }

    /// Σ over all ordered pairs (i, j) and k of c_ij^k².
    pub fn norm2(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    pub fn dot(&self, other: &BracketPoint) -> f64 {
        self.c.iter().zip(&other.c).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> BracketPoint {
        BracketPoint {
            n: self.n,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &BracketPoint) -> BracketPoint {
        BracketPoint {
            n: self.n,
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + s * b).collect(),
        }
    }

    pub fn normalized(&self) -> Result<BracketPoint> {
        let nrm = self.norm2().sqrt();
        if nrm == 0.0 {
            return Err(Error::MomentMapAtOrigin);
        }
        Ok(self.scaled(1.0 / nrm))
    }

    /// (π(A)μ)(X, Y) = A·μ(X, Y) − μ(AX, Y) − μ(X, AY).
    pub fn pi(&self, a: &Mat) -> BracketPoint {
        let n = self.n;
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = 0.0;
                    for l in 0..n {
                        v += a[(k, l)] * self.c(i, j, l)
                            - a[(l, i)] * self.c(l, j, k)
                            - a[(l, j)] * self.c(i, l, k);
                    }
                    out[(i * n + j) * n + k] = v;
                }
            }
        }
        BracketPoint { n, c: out }
    }

    /// The bracket k·μ = k μ(k⁻¹·, k⁻¹·).
    pub fn act(&self, k: &Mat) -> Result<BracketPoint> {
        let kinv = linalg::inverse(k).ok_or_else(|| Error::Degenerate {
            what: "basis change".into(),
        })?;
        Ok(self.act_with_inverse(k, &kinv))
    }

    fn act_with_inverse(&self, k: &Mat, kinv: &Mat) -> BracketPoint {
        let n = self.n;
        let mut out = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let mut v = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        let w = kinv[(i, a)] * kinv[(j, b)];
                        if w == 0.0 {
                            continue;
                        }
                        for (l, vl) in v.iter_mut().enumerate() {
                            *vl += w * self.c(i, j, l);
                        }
                    }
                }
                for kk in 0..n {
                    out[(a * n + b) * n + kk] = (0..n).map(|l| k[(kk, l)] * v[l]).sum();
                }
            }
        }
        BracketPoint { n, c: out }
    }
}

/// m(μ) with ⟨m(μ), A⟩ = ⟨π(A)μ, μ⟩ / ‖μ‖².
pub fn moment_map(mu: &BracketPoint) -> Result<Mat> {
    let n = mu.dim();
    let norm2 = mu.norm2();
    if norm2 == 0.0 {
        return Err(Error::MomentMapAtOrigin);
    }
    let mut m = Mat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut first = 0.0;
            let mut second = 0.0;
            for i in 0..n {
                for j in 0..n {
                    first += mu.c(i, j, a) * mu.c(i, j, b);
                    second += mu.c(a, i, j) * mu.c(b, i, j);
                }
            }
            let v = (first - 2.0 * second) / norm2;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(m)
}

/// ‖π(m)μ − ‖m‖²μ‖ for unit μ.
pub fn criticality_residual(mu: &BracketPoint) -> Result<f64> {
    let mu = mu.normalized()?;
    let m = moment_map(&mu)?;
    let e = m.norm_squared();
    Ok(mu.pi(&m).axpy(-e, &mu).norm2().sqrt())
}

const ENERGY_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct MomentFlowOptions {
    pub max_steps: usize,
    pub tol: f64,
    pub initial_step: f64,
}

impl Default for MomentFlowOptions {
    fn default() -> Self {
        MomentFlowOptions {
            max_steps: 200_000,
            tol: 1e-10,
            initial_step: 0.05,
        }
    }
}

/// Summary of a moment-flow run besides the limit.
#[derive(Debug, Clone)]
pub struct MomentFlowTrace {
    pub steps: usize,
    pub energies: Vec<f64>,
    pub limit: BracketPoint,
}

/// Estimates the stratum label by the projected negative gradient flow
/// μ' = −π(m(μ))μ on the unit sphere. Each step left-multiplies the
/// accumulated basis change by exp(−s·m(μ)), so iterates stay in the GL-orbit
/// (a linear Euler step would leave the variety of Lie brackets). A step that raises ‖m‖² is halved and
/// retried, accepted steps regrow by 1.5 up to the initial step. Stops once
/// the criticality residual drops below `tol`.
pub fn moment_flow(mu0: &BracketPoint, max_steps: usize, tol: f64) -> Result<BetaData> {
    let opts = MomentFlowOptions {
        max_steps,
        tol,
        ..Default::default()
    };
    moment_flow_traced(mu0, &opts).map(|(beta, _)| beta)
}

pub fn moment_flow_traced(
    mu0: &BracketPoint,
    opts: &MomentFlowOptions,
) -> Result<(BetaData, MomentFlowTrace)> {
    let start = mu0.normalized()?;
    let n = start.dim();
    // μ = g·μ₀ is recomputed from the start point each step: near a saddle of
    // ‖m‖² rounding errors off the orbit would otherwise grow.
    let mut g = Mat::identity(n, n);
    let mut g_inv = Mat::identity(n, n);
    let mut mu = start.clone();
    let mut m = moment_map(&mu)?;
    let mut energy = m.norm_squared();
    let mut step = opts.initial_step;
    let mut energies = vec![energy];
    let mut residual = f64::INFINITY;
    for k in 0..opts.max_steps {
        let grad = mu.pi(&m).axpy(-energy, &mu);
        residual = grad.norm2().sqrt();
        if residual < opts.tol {
            let beta = BetaData::from_matrix(m, BetaSource::Flow, Some(residual))?;
            return Ok((
                beta,
                MomentFlowTrace {
                    steps: k,
                    energies,
                    limit: mu,
                },
            ));
        }
        loop {
            let cg = linalg::expm(&(&m * -step)) * &g;
            let cg_inv = &g_inv * linalg::expm(&(&m * step));
            let scale = linalg::max_abs(&cg);
            let cand = start.act_with_inverse(&(&cg / scale), &(&cg_inv * scale)).normalized()?;
            let cm = moment_map(&cand)?;
            let ce = cm.norm_squared();
            // Energy is only known to rounding; larger tests stall near the limit.
            if ce <= energy + ENERGY_SLACK * energy.max(1.0) {
                g = cg / scale;
                g_inv = cg_inv * scale;
                mu = cand;
                m = cm;
                energy = ce;
                energies.push(energy);
                step = (step * 1.5).min(opts.initial_step);
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return Err(Error::NonConvergence {
                    steps: k,
                    residual,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        steps: opts.max_steps,
        residual,
    })
}
