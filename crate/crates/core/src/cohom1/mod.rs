//! The orbit-Einstein system along a unit-speed normal geodesic:
//! G' = 2G·Lam, Lam' = −(tr Lam)·Lam + Ric(G) + Id, with a parabolic lift q of G
//! evolving by q' = q·Q. All matrices act on m in a background-orthonormal frame.

mod audit;
mod scenario;

pub use audit::{conjugation_replay, invariant_audit, AuditReport, ReplayReport};
pub use scenario::{BetaChoice, OrbitSurveyJson, Scenario, ScenarioConfig, TolerancesJson};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homgeom::{mean_curvature, ricci_operator, HomogeneousSpace, InvariantMetric};
use crate::linalg::{self, Mat};
use crate::strata::BetaData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub ode: f64,
    pub lift: f64,
    pub mono: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ode: 1e-8,
            lift: 1e-6,
            mono: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub g: Mat,
    pub lam: Mat,
    pub q: Mat,
    pub int_tr_l: f64,
}

/// Per-step diagnostics. Finite-difference fields are filled once the whole
/// trajectory is known.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Monitors {
    pub t: f64,
    pub h: f64,
    pub h_prime_formula: f64,
    pub h_prime_fd: f64,
    pub h_second_formula: f64,
    pub h_second_fd: f64,
    pub tr_l: f64,
    pub int_tr_l: f64,
    pub l_beta: f64,
    pub w_beta: f64,
    pub res_lift: f64,
    pub res_sym: f64,
    /// tr(S[Q, β]) with S = q⁻¹Lam q and Q its completion.
    pub res_ineq_c1: f64,
    /// tr(Ric·qβ⁺q⁻¹) + 2h.
    pub res_ineq_c2: f64,
    /// −ric(H,H)·tr β⁺ − 4h².
    pub res_e: f64,
    /// Scales of the terms entering c1, c2 and e, for relative slack.
    #[serde(skip)]
    pub scales: [f64; 3],
    /// Norm of the λ < 0 part of q (zero iff q ∈ Q_β).
    pub res_q: f64,
    /// ‖H' + 2·Lam·H‖ with H' from finite differences.
    #[serde(skip)]
    pub res_hvec: f64,
    #[serde(skip)]
    pub hvec: Vec<f64>,
    /// −2·Lam·H, the exact derivative of H.
    #[serde(skip)]
    pub hvec_rate: Vec<f64>,
}

pub const CSV_HEADER: [&str; 13] = [
    "t",
    "h",
    "h_prime_formula",
    "h_prime_fd",
    "trL",
    "intTrL",
    "l_beta",
    "w_beta",
    "res_lift",
    "res_sym",
    "res_ineq_c1",
    "res_ineq_c2",
    "res_e",
];

impl Monitors {
    pub fn csv_row(&self) -> [f64; 13] {
        [
            self.t,
            self.h,
            self.h_prime_formula,
            self.h_prime_fd,
            self.tr_l,
            self.int_tr_l,
            self.l_beta,
            self.w_beta,
            self.res_lift,
            self.res_sym,
            self.res_ineq_c1,
            self.res_ineq_c2,
            self.res_e,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<FlowState>,
    pub monitors: Vec<Monitors>,
    /// Set when integration stopped before `t_end`.
    pub halted: Option<String>,
}

/// (G', Lam') for the first-order system.
pub fn flow_rhs(space: &HomogeneousSpace, g: &Mat, lam: &Mat) -> Result<(Mat, Mat)> {
    let metric = InvariantMetric::new(linalg::sym(g))?;
    let ric = ricci_operator(space, &metric)?;
    let p = g.nrows();
    let gp = lam.transpose() * g + g * lam;
    let lp = lam * -lam.trace() + ric + Mat::identity(p, p);
    Ok((linalg::sym(&gp), lp))
}

/// q' = q·Q with Q the q_β-completion of S = q⁻¹·Lam·q (background metric = Id).
pub fn lift_step(q: &Mat, lam: &Mat, beta_m: &BetaData, eps_ode: f64) -> Result<Mat> {
    let qi = linalg::inverse(q).ok_or_else(|| Error::Degenerate { what: "lift q".into() })?;
    let s = &qi * lam * q;
    let asym = linalg::max_abs(&(&s - s.transpose()));
    if asym > 10.0 * eps_ode * linalg::max_abs(&s).max(1.0) {
        return Err(Error::verification("q⁻¹·Lam·q symmetric", asym));
    }
    lift_rate(q, &qi, lam, beta_m)
}

/// q·Q without the symmetry precondition; RK4 stages carry O(dt²) asymmetry.
fn lift_rate(q: &Mat, qi: &Mat, lam: &Mat, beta_m: &BetaData) -> Result<Mat> {
    let s = linalg::sym(&(qi * lam * q));
    Ok(q * beta_m.q_completion(&s)?)
}

/// The coupled system on a homogeneous space written in an adapted frame
/// (background metric = identity on m), with the label restricted to m.
#[derive(Debug, Clone)]
pub struct Cohom1System {
    pub space: HomogeneousSpace,
    pub beta: BetaData,
    pub beta_m: BetaData,
    pub tol: Tolerances,
}

impl Cohom1System {
    /// `space` must already be in a background-orthonormal frame; `beta` is
    /// the full label in that frame.
    pub fn new(space: HomogeneousSpace, beta: BetaData, tol: Tolerances) -> Result<Self> {
        if beta.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: beta.dim(),
            });
        }
        let beta_m = beta.restrict_trailing(space.dim_m())?;
        Ok(Cohom1System {
            space,
            beta,
            beta_m,
            tol,
        })
    }

    /// Initial state with q₀ the Q_β lift of G₀.
    pub fn initial_state(&self, g0: &Mat, lam0: &Mat) -> Result<FlowState> {
        let p = self.space.dim_m();
        for m in [g0, lam0] {
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: m.nrows(),
                });
            }
        }
        let metric = InvariantMetric::checked(&self.space, g0.clone())?;
        let sym = linalg::max_abs(&(metric.gram() * lam0 - lam0.transpose() * metric.gram()));
        if sym > self.tol.ode {
            return Err(Error::invalid(format!(
                "initial shape operator is not G-symmetric (residual {sym:.3e})"
            )));
        }
        let q = self.beta_m.lift_metric(metric.gram())?;
        Ok(FlowState {
            t: 0.0,
            g: metric.gram().clone(),
            lam: lam0.clone(),
            q,
            int_tr_l: 0.0,
        })
    }

    fn deriv(&self, g: &Mat, lam: &Mat, q: &Mat, at_state: bool) -> Result<(Mat, Mat, Mat)> {
        let (gp, lp) = flow_rhs(&self.space, g, lam)?;
        let qp = if at_state {
            lift_step(q, lam, &self.beta_m, self.tol.ode)?
        } else {
            let qi = linalg::inverse(q).ok_or_else(|| Error::Degenerate { what: "lift q".into() })?;
            lift_rate(q, &qi, lam, &self.beta_m)?
        };
        Ok((gp, lp, qp))
    }

    /// One classical RK4 step; intTrL advances by the trapezoid rule.
    pub fn step(&self, s: &FlowState, dt: f64) -> Result<FlowState> {
        let (g1, l1, q1) = self.deriv(&s.g, &s.lam, &s.q, true)?;
        let h = dt / 2.0;
        let (g2, l2, q2) = self.deriv(&(&s.g + &g1 * h), &(&s.lam + &l1 * h), &(&s.q + &q1 * h), false)?;
        let (g3, l3, q3) = self.deriv(&(&s.g + &g2 * h), &(&s.lam + &l2 * h), &(&s.q + &q2 * h), false)?;
        let (g4, l4, q4) = self.deriv(&(&s.g + &g3 * dt), &(&s.lam + &l3 * dt), &(&s.q + &q3 * dt), false)?;
        let w = dt / 6.0;
        let g = linalg::sym(&(&s.g + (g1 + g2 * 2.0 + g3 * 2.0 + g4) * w));
        let lam = &s.lam + (l1 + l2 * 2.0 + l3 * 2.0 + l4) * w;
        let q = &s.q + (q1 + q2 * 2.0 + q3 * 2.0 + q4) * w;
        let int_tr_l = s.int_tr_l + 0.5 * dt * (s.lam.trace() + lam.trace());
        Ok(FlowState {
            t: s.t + dt,
            g,
            lam,
            q,
            int_tr_l,
        })
    }

    /// Pointwise monitors (finite-difference fields left at zero).
    pub fn monitors(&self, s: &FlowState) -> Result<Monitors> {
        let metric = InvariantMetric::new(linalg::sym(&s.g))?;
        let g = metric.gram();
        let ric = ricci_operator(&self.space, &metric)?;
        let mc = mean_curvature(&self.space, &metric);
        let hv = &mc.vector;
        let lam = &s.lam;
        let tr_l = lam.trace();
        let lh = lam * hv;
        let ric_hh = (hv.transpose() * g * &ric * hv)[(0, 0)];
        let h_prime = -(lh.transpose() * g * hv)[(0, 0)];
        let lh_norm2 = (lh.transpose() * g * &lh)[(0, 0)];
        let h_second = 2.0 * lh_norm2 - tr_l * h_prime - 2.0 * mc.h - ric_hh;

        let qi = linalg::inverse(&s.q).ok_or_else(|| Error::Degenerate { what: "lift q".into() })?;
        let conj = &s.q * self.beta_m.beta_plus() * &qi;
        let l_beta = (lam * &conj).trace();
        let res_lift = linalg::fro(&(g - qi.transpose() * &qi));
        let res_sym = linalg::fro(&(g * lam - lam.transpose() * g));

        let sm = linalg::sym(&(&qi * lam * &s.q));
        let qq = self.beta_m.q_completion(&sm)?;
        let c1 = self.beta_m.pairing(&sm, &qq);
        let c1_scale = linalg::fro(&sm) * linalg::fro(&linalg::commutator(&qq, self.beta_m.beta()));
        let ric_b = (&ric * &conj).trace();
        let c2 = ric_b + 2.0 * mc.h;
        let c2_scale = ric_b.abs() + 2.0 * mc.h;
        let trbp = self.beta_m.beta_plus().trace();
        let e = -ric_hh * trbp - 4.0 * mc.h * mc.h;
        let e_scale = (ric_hh * trbp).abs() + 4.0 * mc.h * mc.h;
        Ok(Monitors {
            t: s.t,
            h: mc.h,
            h_prime_formula: h_prime,
            h_second_formula: h_second,
            tr_l,
            int_tr_l: s.int_tr_l,
            l_beta,
            w_beta: l_beta * s.int_tr_l.exp(),
            res_lift,
            res_sym,
            res_ineq_c1: c1,
            res_ineq_c2: c2,
            res_e: e,
            scales: [c1_scale, c2_scale, e_scale],
            res_q: self.beta_m.q_beta_residual(&s.q),
            hvec: hv.iter().cloned().collect(),
            hvec_rate: (&lh * -2.0).iter().cloned().collect(),
            ..Default::default()
        })
    }

    /// Fixed-step RK4 from `init` to `t_end`. Stops early (recording the
    /// reason) if G loses positivity or an invariant residual exceeds ten
    /// times its tolerance.
    pub fn integrate(&self, init: FlowState, t_end: f64, dt: f64) -> Result<Trajectory> {
        if dt.is_nan() || dt <= 0.0 || t_end.is_nan() || t_end < 0.0 {
            return Err(Error::invalid("dt must be positive and t_end non-negative"));
        }
        let steps = (t_end / dt).round() as usize;
        let mut states = vec![init];
        let mut monitors = vec![self.monitors(&states[0])?];
        let mut halted = None;
        for k in 0..steps {
            let next = match self.step(&states[k], dt) {
                Ok(mut s) => {
                    s.t = states[0].t + (k + 1) as f64 * dt;
                    s
                }
                Err(e) => {
                    halted = Some(halt_reason(k, states[k].t, &e.to_string()));
                    break;
                }
            };
            let mon = match self.monitors(&next) {
                Ok(m) => m,
                Err(e) => {
                    halted = Some(halt_reason(k + 1, next.t, &e.to_string()));
                    break;
                }
            };
            let scale = 1.0 + linalg::max_abs(&next.g) * linalg::max_abs(&next.lam).max(1.0);
            let over = if mon.res_sym > 10.0 * self.tol.ode * scale {
                Some(format!("shape operator symmetry residual {:.3e}", mon.res_sym))
            } else if mon.res_lift > 10.0 * self.tol.lift * (1.0 + linalg::max_abs(&next.g)) {
                Some(format!("lift residual {:.3e}", mon.res_lift))
            } else {
                None
            };
            states.push(next);
            monitors.push(mon);
            if let Some(reason) = over {
                halted = Some(halt_reason(k + 1, states[k + 1].t, &reason));
                break;
            }
        }
        fill_differences(&mut monitors, dt);
        Ok(Trajectory {
            dt,
            states,
            monitors,
            halted,
        })
    }
}

fn halt_reason(step: usize, t: f64, reason: &str) -> String {
    Error::Halted {
        step,
        t,
        reason: reason.to_string(),
    }
    .to_string()
}

/// Second-order finite differences for h', h'' and H' (one-sided at the ends).
fn fill_differences(mons: &mut [Monitors], dt: f64) {
    let n = mons.len();
    if n < 3 {
        for m in mons.iter_mut() {
            m.h_prime_fd = f64::NAN;
            m.h_second_fd = f64::NAN;
            m.res_hvec = f64::NAN;
        }
        return;
    }
    let h: Vec<f64> = mons.iter().map(|m| m.h).collect();
    let d1 = |i: usize, f: &dyn Fn(usize) -> f64| -> f64 {
        if i == 0 {
            (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dt)
        } else if i == n - 1 {
            (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * dt)
        } else {
            (f(i + 1) - f(i - 1)) / (2.0 * dt)
        }
    };
    let dim = mons[0].hvec.len();
    for i in 0..n {
        mons[i].h_prime_fd = d1(i, &|j| h[j]);
        mons[i].h_second_fd = if i == 0 || i == n - 1 {
            f64::NAN
        } else {
            (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (dt * dt)
        };
        let res = (0..dim)
            .map(|c| (d1(i, &|j| mons[j].hvec[c]) - mons[i].hvec_rate[c]).abs())
            .fold(0.0, f64::max);
        mons[i].res_hvec = res;
    }
}
