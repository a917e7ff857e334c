//! Invariant suites behind `homflow verify`.

use std::path::Path;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use homflow::catalog::{self, Entry};
use homflow::cohom1::{conjugation_replay, invariant_audit, Cohom1System, ScenarioConfig};
use homflow::homgeom::{
    g_norm2, g_sym, koszul_ricci, mean_curvature, modified_ricci, orbit_mean_curvature,
    pushforward_by_automorphism, random_invariant_metric, restrict_automorphism,
    ricci_operator, scalar_curvature,
};
use homflow::linalg::{self, Mat};
use homflow::strata::{bracket_in_frame, moment_flow, verify_beta, VerifyOptions};
use homflow::{HomogeneousSpace, InvariantMetric};

use crate::output::emit_json;

pub const NAMES: [&str; 8] = [
    "liealg",
    "ricci-oracle",
    "homgeom",
    "strata",
    "pairing",
    "cohom1",
    "minimality",
    "conjugation",
];

const SPREAD: f64 = 0.5;
/// Horizon of the seeded perturbed flows, short of typical Riccati blow-up.
const PERTURBED_T_END: f64 = 0.5;

#[derive(Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub invariant: String,
    pub input: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, checks: Vec::new() }
    }

    /// Passes when `residual <= threshold`.
    fn le(&mut self, invariant: &str, input: impl Into<String>, residual: f64, threshold: f64) {
        self.checks.push(Check {
            suite: self.name,
            invariant: invariant.into(),
            input: input.into(),
            residual,
            threshold,
            pass: residual <= threshold,
        });
    }

    /// Passes when `value >= threshold`; the recorded residual is the value.
    fn ge(&mut self, invariant: &str, input: impl Into<String>, value: f64, threshold: f64) {
        self.checks.push(Check {
            suite: self.name,
            invariant: invariant.into(),
            input: input.into(),
            residual: value,
            threshold,
            pass: value >= threshold,
        });
    }

    /// Records an error from the library as a failed check.
    fn attempt<T>(&mut self, invariant: &str, input: &str, r: homflow::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks.push(Check {
                    suite: self.name,
                    invariant: format!("{invariant}: {e}"),
                    input: input.into(),
                    residual: f64::NAN,
                    threshold: 0.0,
                    pass: false,
                });
                None
            }
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    suites: Vec<SuiteSummary>,
    failures: Vec<Check>,
    pass: bool,
}

#[derive(Serialize)]
struct SuiteSummary {
    name: &'static str,
    checks: usize,
    failed: usize,
}

pub fn run(only: Option<&str>, samples: Option<usize>, seed: u64, out: Option<&Path>) -> Result<bool> {
    let entries = catalog::all()?;
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (i, &name) in NAMES.iter().enumerate() {
        if only.is_some_and(|o| o != name) {
            continue;
        }
        // Each suite gets its own stream so `--only` reproduces the full run.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut suite = Suite::new(name);
        match name {
            "liealg" => liealg(&mut suite, &entries, samples.unwrap_or(5), &mut rng),
            "ricci-oracle" => ricci_oracle(&mut suite, &entries, samples.unwrap_or(20), &mut rng),
            "homgeom" => homgeom(&mut suite, &entries, samples.unwrap_or(20), &mut rng),
            "strata" => strata(&mut suite, &entries, samples.unwrap_or(50), &mut rng),
            "pairing" => pairing(&mut suite, &entries, samples.unwrap_or(100), &mut rng),
            "cohom1" => cohom1(&mut suite, samples.unwrap_or(3), &mut rng)?,
            "minimality" => minimality(&mut suite, samples.unwrap_or(50), &mut rng),
            "conjugation" => conjugation(&mut suite, &entries, samples.unwrap_or(5), &mut rng)?,
            _ => unreachable!("suite names are fixed"),
        }
        let total = suite.checks.len();
        let failed: Vec<Check> = suite.checks.into_iter().filter(|c| !c.pass).collect();
        println!(
            "{:<13} {:>5} checks  {}",
            name,
            total,
            if failed.is_empty() { "ok".to_string() } else { format!("{} FAILED", failed.len()) }
        );
        for f in &failed {
            eprintln!(
                "  {}: {} on {} (residual {:.3e}, threshold {:.1e})",
                f.suite, f.invariant, f.input, f.residual, f.threshold
            );
        }
        summaries.push(SuiteSummary {
            name,
            checks: total,
            failed: failed.len(),
        });
        failures.extend(failed);
    }
    let pass = failures.is_empty();
    if out.is_some() {
        let report = VerifyReport {
            seed,
            suites: summaries,
            failures,
            pass,
        };
        emit_json(out, "verify.json", &report)?;
    }
    Ok(pass)
}

fn normal_matrix<R: Rng>(n: usize, rng: &mut R) -> Mat {
    Mat::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

fn metrics<R: Rng>(e: &Entry, k: usize, rng: &mut R) -> Vec<InvariantMetric> {
    let mut out = vec![e.metric().clone()];
    for _ in 0..k {
        if let Ok(m) = random_invariant_metric(e.space(), e.metric(), SPREAD, rng) {
            out.push(m);
        }
    }
    out
}

fn liealg<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) {
    for e in entries {
        let name = e.name();
        let alg = e.algebra();
        s.le("Jacobi identity", name, alg.jacobi_residual(), 1e-9);
        s.le("antisymmetry", name, alg.antisymmetry_residual(), 1e-12);
        s.le("Killing form ad-invariance", name, alg.killing_invariance_residual(), 1e-9);
        if let Some(rad) = s.attempt("radical", name, alg.radical()) {
            s.le("radical is an ideal", name, alg.ideal_residual(&rad), 1e-9);
            if let Some(nil) = s.attempt("nilradical", name, alg.nilradical()) {
                s.le("nilradical is an ideal", name, alg.ideal_residual(&nil), 1e-9);
                s.le("nilradical inside radical", name, rad.containment_residual(&nil), 1e-9);
            }
        }
        for (i, d) in alg.derivation_space().iter().enumerate() {
            s.le("derivation basis", format!("{name} D{i}"), alg.derivation_residual(d), 1e-9);
        }
        let sig = alg.killing_signature();
        for k in 0..samples {
            let p = Mat::identity(alg.dim(), alg.dim()) + normal_matrix(alg.dim(), rng) * 0.3;
            let input = format!("{name} basis change {k}");
            if let Some(b) = s.attempt("change of basis", &input, alg.change_basis(&p)) {
                s.le("Jacobi after change of basis", input.clone(), b.jacobi_residual(), 1e-8);
                s.le(
                    "Killing signature after change of basis",
                    input,
                    if b.killing_signature() == sig { 0.0 } else { 1.0 },
                    0.0,
                );
            }
        }
    }
}

fn ricci_oracle<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) {
    for e in entries.iter().filter(|e| e.has_trivial_isotropy()) {
        for (k, g) in metrics(e, samples, rng).iter().enumerate() {
            let input = format!("{} metric {k}", e.name());
            let Some(ric) = s.attempt("structure-constant Ricci", &input, ricci_operator(e.space(), g)) else {
                continue;
            };
            let Some(oracle) = s.attempt("Koszul Ricci", &input, koszul_ricci(e.algebra(), g.gram())) else {
                continue;
            };
            let scale = 1.0 + linalg::max_abs(&oracle);
            s.le("Ricci agrees with Koszul oracle", input, linalg::max_abs(&(ric - oracle)) / scale, 1e-8);
        }
    }
}

fn homgeom<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) {
    for e in entries {
        let space = e.space();
        for (k, g) in metrics(e, samples, rng).iter().enumerate() {
            let input = format!("{} metric {k}", e.name());
            let mc = mean_curvature(space, g);
            let sh = g_sym(&space.ad_m(&space.embed_m(&mc.vector)), g);
            let scale = 1.0 + mc.h;
            s.le("tr S(ad_m H) = 2h", input.clone(), (sh.trace() - 2.0 * mc.h).abs() / scale, 1e-9);
            if let (Some(scal), Some(star)) = (
                s.attempt("scalar curvature", &input, scalar_curvature(space, g)),
                s.attempt("modified Ricci", &input, modified_ricci(space, g)),
            ) {
                s.le(
                    "h = (scal* - scal)/2",
                    input.clone(),
                    (0.5 * (star.trace() - scal) - mc.h).abs() / (1.0 + scal.abs()),
                    1e-9,
                );
            }
            if let Some(ric) = s.attempt("Ricci operator", &input, ricci_operator(space, g)) {
                let h = &mc.vector;
                let ric_hh = (h.transpose() * g.gram() * &ric * h)[(0, 0)];
                let norm = g_norm2(&sh, g);
                s.le(
                    "ric(H,H) + |S(ad_m H)|^2 = 0",
                    input.clone(),
                    (ric_hh + norm).abs() / (1.0 + norm),
                    1e-8,
                );
                let gr = g.gram() * &ric;
                s.le(
                    "Ricci operator is g-symmetric",
                    input,
                    linalg::max_abs(&(&gr - gr.transpose())) / (1.0 + linalg::max_abs(&gr)),
                    1e-10,
                );
            }
        }
    }
}

fn strata<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) {
    for e in entries {
        let name = e.name();
        let Some(Some(catalog_beta)) = s.attempt("catalog label", name, e.beta_frame()) else {
            continue;
        };
        let ids = catalog_beta.identity_residuals();
        s.le("tr beta+ = n - 1/|beta|^2", name, ids[1], 1e-7);
        s.le("tr (beta+)^2 = tr beta+", name, ids[2], 1e-7);
        if e.algebra().dim() <= 6 {
            if let Some(mu) = s.attempt("bracket in frame", name, bracket_in_frame(e.space(), e.metric())) {
                if let Some(flow) = s.attempt("moment flow", name, moment_flow(&mu, 100_000, 1e-9)) {
                    s.le(
                        "moment flow criticality",
                        name,
                        flow.criticality_residual().unwrap_or(f64::NAN),
                        1e-6,
                    );
                    s.le("moment flow matches catalog spectrum", name, flow.spectrum_distance(&catalog_beta), 1e-6);
                    let ids = flow.identity_residuals();
                    s.le("flow label identities", name, ids[1].max(ids[2]), 1e-7);
                }
            }
        }
        let opts = VerifyOptions {
            samples,
            ..Default::default()
        };
        if let Some(r) = s.attempt(
            "label verification",
            name,
            verify_beta(e.space(), e.metric(), &catalog_beta, &opts, rng),
        ) {
            s.le("kernel of beta+ is the nilradical complement", name, r.kernel_residual.unwrap_or(0.0), 1e-6);
            s.le("derivations in sl_beta", name, r.derivation_lower_residual.unwrap_or(0.0), 1e-8);
            s.ge("tr(Ric q beta+ q^-1) + |H|^2 >= 0", name, r.ricci_estimate_min.unwrap_or(0.0), -1e-7);
            s.le("equality cases", name, r.equality_max_residual.unwrap_or(0.0), 1e-7);
        }
    }
}

fn pairing<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) {
    for e in entries {
        let Ok(Some(beta)) = e.beta_frame() else {
            continue;
        };
        let n = beta.dim();
        let gaps: Vec<f64> = beta
            .eigenvalues()
            .iter()
            .flat_map(|a| beta.eigenvalues().iter().map(move |b| (a - b).abs()))
            .filter(|g| *g > 1e-5)
            .collect();
        let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut low = f64::INFINITY;
        let mut closed: f64 = 0.0;
        let mut rigid = f64::INFINITY;
        let mut commuting: f64 = 0.0;
        for _ in 0..samples {
            let a = normal_matrix(n, rng);
            let sm = linalg::sym(&a);
            let Some(q) = s.attempt("q completion", e.name(), beta.q_completion(&sm)) else {
                continue;
            };
            let p = beta.pairing(&sm, &q);
            let scale = 1.0 + sm.norm_squared();
            low = low.min(p / scale);
            closed = closed.max((p - beta.pairing_closed_form(&sm)).abs() / scale);
            if min_gap.is_finite() {
                let off = beta.centralizer_residual(&sm);
                rigid = rigid.min((p - min_gap * off * off) / scale);
            }
            // Projection onto the centralizer of beta.
            let comps = beta.adbeta_components(&sm);
            let c0 = comps
                .iter()
                .find(|(l, _)| *l == 0.0)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| Mat::zeros(n, n));
            if let Ok(q0) = beta.q_completion(&linalg::sym(&c0)) {
                commuting = commuting.max(beta.pairing(&c0, &q0).abs() / scale);
            }
        }
        let name = e.name();
        let label = format!("{name} x{samples}");
        s.ge("pairing >= 0", label.clone(), low, -1e-9);
        s.le("pairing closed form", label.clone(), closed, 1e-9);
        if rigid.is_finite() {
            s.ge("pairing >= min gap * |[S,beta] part|^2", label.clone(), rigid, -1e-6);
        }
        s.le("pairing vanishes on the centralizer", label, commuting, 1e-9);
    }
}

fn scenario(src: &str) -> Result<homflow::cohom1::Scenario> {
    let cfg: ScenarioConfig = serde_json::from_str(src)?;
    Ok(cfg.build(Path::new("."))?)
}

fn audit_checks(s: &mut Suite, input: &str, system: &Cohom1System, traj: &homflow::Trajectory) {
    let r = invariant_audit(system, traj);
    s.le("no halt", input, if r.halted.is_none() { 0.0 } else { 1.0 }, 0.0);
    s.le("h' and H' formulas vs differences (error / tolerance)", input, r.a_error_ratio, 1.0);
    s.le("h'' formula vs differences (error / tolerance)", input, r.b_error_ratio, 1.0);
    s.ge("completion pairing inequality", input, r.c1_min, 0.0);
    s.ge("Ricci label inequality", input, r.c2_min, 0.0);
    s.ge("w_beta monotone under the maximum principle", input, r.d_min_increment, 0.0);
    s.ge("-ric(H,H) tr beta+ >= 4h^2", input, r.e_min, 0.0);
    s.le("lift consistency", input, r.lift_max, system.tol.lift);
    s.le("shape operator symmetry", input, r.sym_max, system.tol.ode);
    s.le("rigidity probe", input, if r.f_pass { 0.0 } else { 1.0 }, 0.0);
}

/// A G-symmetric shape operator: G⁻¹·sym(A).
fn random_shape<R: Rng>(g: &Mat, scale: f64, rng: &mut R) -> Mat {
    let a = linalg::sym(&normal_matrix(g.nrows(), rng)) * scale;
    linalg::inverse(g).expect("spd") * a
}

fn cohom1<R: Rng>(s: &mut Suite, samples: usize, rng: &mut R) -> Result<()> {
    let sc = scenario(r#"{"entry": "axb", "t_end": 5.0, "dt": 1e-3}"#)?;
    let init = sc.initial_state()?;
    let traj = sc.system.integrate(init.clone(), 5.0, 1e-3)?;
    let drift = traj
        .states
        .iter()
        .map(|st| linalg::max_abs(&(&st.g - &init.g)).max(linalg::max_abs(&(&st.lam - &init.lam))))
        .fold(0.0, f64::max);
    s.le("stationary product stays put", "axb product", drift, 1e-8);
    let w = traj.monitors.iter().map(|m| m.w_beta.abs()).fold(0.0, f64::max);
    s.le("w_beta vanishes on the product", "axb product", w, 1e-12);
    audit_checks(s, "axb product", &sc.system, &traj);

    for name in ["axb", "rh_3"] {
        for k in 0..samples {
            let sc = scenario(&format!(r#"{{"entry": "{name}", "t_end": {PERTURBED_T_END}}}"#))?;
            let p = sc.g0.nrows();
            let d = Mat::identity(p, p) + linalg::sym(&normal_matrix(p, rng)) * 0.1;
            let g0 = linalg::sym(&(&d * &sc.g0 * &d));
            let lam0 = random_shape(&g0, 0.2, rng);
            let input = format!("{name} perturbed {k}");
            if let Some(init) = s.attempt("initial state", &input, sc.system.initial_state(&g0, &lam0)) {
                if let Some(traj) = s.attempt("integration", &input, sc.system.integrate(init, PERTURBED_T_END, 1e-3)) {
                    audit_checks(s, &input, &sc.system, &traj);
                }
            }
        }
    }

    let sc = scenario(r#"{"entry": "sl2r", "t_end": 0.3, "lam0": [[0.1,0,0],[0,-0.1,0],[0,0,0.05]]}"#)?;
    let traj = sc.system.integrate(sc.initial_state()?, 0.3, 1e-3)?;
    s.le("no halt", "sl2r", if traj.halted.is_none() { 0.0 } else { 1.0 }, 0.0);
    let l = traj.monitors.iter().map(|m| m.l_beta.abs().max(m.w_beta.abs())).fold(0.0, f64::max);
    s.le("semisimple label gives l_beta = 0", "sl2r", l, 1e-12);
    Ok(())
}

fn minimality<R: Rng>(s: &mut Suite, samples: usize, rng: &mut R) {
    if let Some(e) = s.attempt("catalog", "sl2r", catalog::get("sl2r")) {
        if let Some(rows) = s.attempt("orbit survey", "sl2r", e.orbit_survey(samples, 20, SPREAD, rng)) {
            let worst = rows.iter().map(|r| r.tr_l.abs()).fold(0.0, f64::max);
            s.le("Iwasawa orbits are minimal", format!("sl2r {} orbits", rows.len()), worst, 1e-10);
        }
    }
    if let Some(e) = s.attempt("catalog", "so23_so3", catalog::get("so23_so3")) {
        if let Some(sub) = s.attempt("rotated Iwasawa", "so23_so3", e.rotated_iwasawa(0.0)) {
            if let Some(tr) = s.attempt("orbit mean curvature", "so23_so3", orbit_mean_curvature(e.space(), e.metric(), &sub)) {
                s.ge("generic metric gives a non-minimal orbit", "so23_so3", tr.abs(), 1e-3);
            }
        }
    }
}

/// Automorphisms preserving h and m: exponentials of derivations for groups,
/// Ad(exp sZ) with Z in k centralizing h otherwise.
fn automorphisms<R: Rng>(e: &Entry, k: usize, rng: &mut R) -> Vec<Mat> {
    let alg = e.algebra();
    if e.has_trivial_isotropy() {
        let ders = alg.derivation_space();
        (0..k)
            .map(|_| {
                let mut d = Mat::zeros(alg.dim(), alg.dim());
                for b in &ders {
                    d += b * (0.3 * rng.sample::<f64, _>(StandardNormal));
                }
                linalg::expm(&d)
            })
            .collect()
    } else {
        match e.rotation_generator() {
            Ok(Some(z)) => {
                let adz = alg.ad(&z).expect("dimension matches");
                (0..k).map(|_| linalg::expm(&(&adz * rng.random_range(-3.0..3.0)))).collect()
            }
            _ => Vec::new(),
        }
    }
}

fn conjugation<R: Rng>(s: &mut Suite, entries: &[Entry], samples: usize, rng: &mut R) -> Result<()> {
    for e in entries {
        let space: &HomogeneousSpace = e.space();
        let g = e.metric();
        let Ok(ric) = ricci_operator(space, g) else { continue };
        let mc = mean_curvature(space, g);
        for (k, a) in automorphisms(e, samples, rng).iter().enumerate() {
            let input = format!("{} automorphism {k}", e.name());
            let Some(am) = s.attempt("restriction to m", &input, restrict_automorphism(space, a)) else {
                continue;
            };
            let Some(pushed) = s.attempt("pushforward", &input, pushforward_by_automorphism(space, g, a)) else {
                continue;
            };
            let ami = linalg::inverse(&am).expect("checked invertible");
            if let Some(ric2) = s.attempt("Ricci of pushforward", &input, ricci_operator(space, &pushed)) {
                let want = &am * &ric * &ami;
                s.le(
                    "Ricci is natural",
                    input.clone(),
                    linalg::max_abs(&(ric2 - &want)) / (1.0 + linalg::max_abs(&want)),
                    1e-9,
                );
            }
            let h2 = mean_curvature(space, &pushed);
            let want = &am * &mc.vector;
            s.le(
                "mean curvature is natural",
                input,
                (h2.vector - &want).amax() / (1.0 + want.amax()),
                1e-9,
            );
        }
    }

    let sc = scenario(
        r#"{"entry": "h3", "t_end": 0.5, "dt": 1e-2,
            "lam0": [[0.1, 0.05, 0], [0.05, -0.2, 0], [0, 0, 0.3]],
            "automorphism": [[1.3, 0, 0], [0, 1.3, 0], [0, 0, 1.69]]}"#,
    )?;
    let traj = sc.system.integrate(sc.initial_state()?, 0.5, 1e-2)?;
    let a = sc.automorphism.clone().expect("scenario declares one");
    let r = conjugation_replay(&sc.system, &traj, &a)?;
    s.le("l_beta replay under a commuting automorphism", "h3 diag(t,t,t^2)", r.max_residual, 1e-9);
    s.ge("replay applies at every step", "h3 diag(t,t,t^2)", r.applicable_steps as f64, r.steps as f64);
    let id = conjugation_replay(&sc.system, &traj, &Mat::identity(3, 3))?;
    s.le("identity replay", "h3", id.max_residual, 1e-14);
    Ok(())
}
