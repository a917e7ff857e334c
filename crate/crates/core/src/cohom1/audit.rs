use serde::Serialize;

use crate::error::Result;
use crate::homgeom::restrict_automorphism;
use crate::linalg::{self, Mat};

use super::{Cohom1System, Trajectory};

#[derive(Debug, Clone, Serialize)]
pub struct Rigidity {
    pub derivation_residual: f64,
    pub commutator_max: f64,
    pub confirmed: bool,
}

/// Outcome of the per-step inequality and identity checks on a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub steps: usize,
    pub dt: f64,
    pub halted: Option<String>,
    /// Largest per-step finite-difference tolerance used by (a) and (b).
    pub fd_tolerance_max: f64,
    /// (a) h' and H' against centered differences.
    pub a_h_prime_max_err: f64,
    pub a_hvec_max_err: f64,
    /// Largest error divided by its per-step tolerance; passes at ≤ 1.
    pub a_error_ratio: f64,
    pub a_pass: bool,
    /// (b) h'' against second differences.
    pub b_h_second_max_err: f64,
    pub b_error_ratio: f64,
    pub b_pass: bool,
    /// (c) unconditional inequalities, as the smallest value minus slack.
    pub c1_min: f64,
    pub c2_min: f64,
    pub c_pass: bool,
    /// (d) w_β increments on steps where tr β⁺ ≥ 2h at both ends.
    pub d_checked_steps: usize,
    pub d_min_increment: f64,
    pub d_pass: bool,
    /// (e) −ric(H,H)·tr β⁺ − 4h².
    pub e_min: f64,
    pub e_pass: bool,
    /// (f) fires only when w_β is constant over the window.
    pub f: Option<Rigidity>,
    pub f_pass: bool,
    /// min over t of tr β⁺ − 2h(t).
    pub max_principle_gap_min: f64,
    pub lift_max: f64,
    pub sym_max: f64,
    pub q_beta_max: f64,
    pub invariants_pass: bool,
    pub pass: bool,
}

pub fn invariant_audit(system: &Cohom1System, traj: &Trajectory) -> AuditReport {
    let mons = &traj.monitors;
    let dt = traj.dt;
    let eps = system.tol.mono;
    let n = mons.len();
    let trbp = system.beta_m.beta_plus().trace();

    let (a_err, a_vec, a_ratio, b_err, b_ratio, fd_tol) = fd_errors(mons, dt);

    let mut c1_min = f64::INFINITY;
    let mut c2_min = f64::INFINITY;
    let mut e_min = f64::INFINITY;
    let mut gap_min = f64::INFINITY;
    let (mut lift_max, mut sym_max, mut q_max): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in mons {
        c1_min = c1_min.min(m.res_ineq_c1 + eps * (1.0 + m.scales[0]));
        c2_min = c2_min.min(m.res_ineq_c2 + eps * (1.0 + m.scales[1]));
        e_min = e_min.min(m.res_e + eps * (1.0 + m.scales[2]));
        gap_min = gap_min.min(trbp - 2.0 * m.h);
        lift_max = lift_max.max(m.res_lift);
        sym_max = sym_max.max(m.res_sym);
        q_max = q_max.max(m.res_q);
    }

    let mut d_steps = 0;
    let mut d_min = f64::INFINITY;
    for w in mons.windows(2) {
        if trbp >= 2.0 * w[0].h && trbp >= 2.0 * w[1].h {
            d_steps += 1;
            let inc = w[1].w_beta - w[0].w_beta + eps * (1.0 + w[0].w_beta.abs());
            d_min = d_min.min(inc);
        }
    }

    let (wmin, wmax) = mons
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m.w_beta), hi.max(m.w_beta)));
    let f = if n > 0 && wmax - wmin <= eps * (1.0 + wmax.abs().max(wmin.abs())) {
        let alg = system.space.algebra();
        let bp = system.beta.beta_plus();
        let der = alg.derivation_residual(bp) / linalg::fro(bp).max(1.0);
        let comm = traj
            .states
            .iter()
            .map(|s| linalg::fro(&linalg::commutator(&s.q, system.beta_m.beta())))
            .fold(0.0, f64::max);
        Some(Rigidity {
            derivation_residual: der,
            commutator_max: comm,
            confirmed: der <= 1e-8 && comm <= 1e-6,
        })
    } else {
        None
    };

    let a_pass = a_ratio <= 1.0;
    let b_pass = b_ratio <= 1.0;
    let c_pass = c1_min >= 0.0 && c2_min >= 0.0;
    let d_pass = d_steps == 0 || d_min >= 0.0;
    let e_pass = e_min >= 0.0;
    let f_pass = f.as_ref().is_none_or(|r| r.confirmed);
    let invariants_pass = lift_max <= system.tol.lift && sym_max <= system.tol.ode && q_max <= system.tol.ode;
    let pass = traj.halted.is_none() && a_pass && b_pass && c_pass && d_pass && e_pass && f_pass && invariants_pass;
    AuditReport {
        steps: n.saturating_sub(1),
        dt,
        halted: traj.halted.clone(),
        fd_tolerance_max: fd_tol,
        a_h_prime_max_err: a_err,
        a_hvec_max_err: a_vec,
        a_error_ratio: a_ratio,
        a_pass,
        b_h_second_max_err: b_err,
        b_error_ratio: b_ratio,
        b_pass,
        c1_min,
        c2_min,
        c_pass,
        d_checked_steps: d_steps,
        d_min_increment: if d_steps == 0 { 0.0 } else { d_min },
        d_pass,
        e_min,
        e_pass,
        f,
        f_pass,
        max_principle_gap_min: gap_min,
        lift_max,
        sym_max,
        q_beta_max: q_max,
        invariants_pass,
        pass,
    }
}

/// Errors of the finite differences against the formulas, and their ratio to
/// a per-step tolerance built from the truncation error model: centered and
/// one-sided first differences err by at most dt²/3·|f‴|, the second
/// difference by dt²/12·|f⁗|. The higher derivatives come from differencing
/// the formula values (h″ and H′), never the differences under test, and are
/// taken as a sup over a five-sample window with a safety factor of 4.
/// Returns (a_err, a_vec, a_ratio, b_err, b_ratio, max tolerance).
fn fd_errors(mons: &[super::Monitors], dt: f64) -> (f64, f64, f64, f64, f64, f64) {
    let n = mons.len();
    if n < 5 {
        return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    }
    let h2: Vec<f64> = mons.iter().map(|m| m.h_second_formula).collect();
    let diff1 = |f: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
        (f(hi) - f(lo)) / ((hi - lo) as f64 * dt)
    };
    let diff2 = |f: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        let c = i.clamp(1, n - 2);
        (f(c + 1) - 2.0 * f(c) + f(c - 1)) / (dt * dt)
    };
    let h3: Vec<f64> = (0..n).map(|i| diff1(&|j| h2[j], i).abs()).collect();
    let h4: Vec<f64> = (0..n).map(|i| diff2(&|j| h2[j], i).abs()).collect();
    let dim = mons[0].hvec_rate.len();
    let v3: Vec<f64> = (0..n)
        .map(|i| {
            (0..dim)
                .map(|c| diff2(&|j| mons[j].hvec_rate[c], i).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let window = |v: &[f64], i: usize| v[i.saturating_sub(2)..(i + 3).min(n)].iter().cloned().fold(0.0, f64::max);
    let eps = f64::EPSILON;
    let (mut a_err, mut a_vec, mut a_ratio, mut b_err, mut b_ratio, mut tol_max) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, m) in mons.iter().enumerate() {
        let round1 = 8.0 * eps * (1.0 + m.h.abs()) / dt;
        let tol_a = 4.0 * dt * dt / 3.0 * window(&h3, i) + dt * dt + round1;
        let hv = m.hvec.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let tol_v = 4.0 * dt * dt / 3.0 * window(&v3, i) + dt * dt + 8.0 * eps * (1.0 + hv) / dt;
        let ea = (m.h_prime_fd - m.h_prime_formula).abs();
        a_err = a_err.max(ea);
        a_vec = a_vec.max(m.res_hvec);
        a_ratio = a_ratio.max(ea / tol_a).max(m.res_hvec / tol_v);
        tol_max = tol_max.max(tol_a);
        if i > 0 && i + 1 < n {
            let tol_b = 4.0 * dt * dt / 12.0 * window(&h4, i) + dt * dt + 16.0 * eps * (1.0 + m.h.abs()) / (dt * dt);
            let eb = (m.h_second_fd - m.h_second_formula).abs();
            b_err = b_err.max(eb);
            b_ratio = b_ratio.max(eb / tol_b);
            tol_max = tol_max.max(tol_b);
        }
    }
    (a_err, a_vec, a_ratio, b_err, b_ratio, tol_max)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub steps: usize,
    /// Steps where B = q_A⁻¹·A|_m·q commutes with β (within 1e−9).
    pub applicable_steps: usize,
    pub max_residual: f64,
    pub max_commutator: f64,
    pub pass: bool,
}

/// Replays a trajectory under an automorphism `a` (frame coordinates of the
/// system's space) and compares l_β of the transported data with the original.
pub fn conjugation_replay(system: &Cohom1System, traj: &Trajectory, a: &Mat) -> Result<ReplayReport> {
    let am = restrict_automorphism(&system.space, a)?;
    let am_inv = linalg::inverse(&am).expect("restriction checked invertible");
    let bp = system.beta_m.beta_plus();
    let mut applicable = 0;
    let mut max_res: f64 = 0.0;
    let mut max_comm: f64 = 0.0;
    for s in &traj.states {
        let qi = linalg::inverse(&s.q).expect("lift invertible");
        let l = (&s.lam * &s.q * bp * &qi).trace();
        let ga = am_inv.transpose() * &s.g * &am_inv;
        let la = &am * &s.lam * &am_inv;
        let qa = system.beta_m.lift_metric(&ga)?;
        let qai = linalg::inverse(&qa).expect("lift invertible");
        let la_beta = (&la * &qa * bp * &qai).trace();
        let b = &qai * &am * &s.q;
        let comm = linalg::fro(&linalg::commutator(&b, system.beta_m.beta()));
        max_comm = max_comm.max(comm);
        if comm <= 1e-9 {
            applicable += 1;
            max_res = max_res.max((la_beta - l).abs() / (1.0 + l.abs()));
        }
    }
    Ok(ReplayReport {
        steps: traj.states.len(),
        applicable_steps: applicable,
        max_residual: max_res,
        max_commutator: max_comm,
        pass: max_res <= 1e-9,
    })
}
