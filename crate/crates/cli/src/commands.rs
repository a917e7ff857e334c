use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use homflow::catalog::{self, Entry, OrbitRow};
use homflow::cohom1::{
    conjugation_replay, invariant_audit, AuditReport, BetaChoice, ReplayReport, ScenarioConfig, CSV_HEADER,
};
use homflow::homgeom::{mean_curvature, standardness_check, Standardness};
use homflow::linalg;
use homflow::strata::{
    bracket_in_frame, moment_flow, verify_beta, BetaJson, BetaReport, VerifyOptions,
};
use homflow::{BetaData, Error};

use crate::output::{csv_bytes, emit_json, write_atomic};
use crate::{suites, CatalogAction, Cli, Command};

const MOMENT_FLOW_STEPS: usize = 100_000;
const MOMENT_FLOW_TOL: f64 = 1e-9;

/// 1 for failed checks inside the library, 2 for unusable input.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Verification { .. } | Error::NonConvergence { .. } | Error::Halted { .. }) => 1,
        _ => 2,
    }
}

pub fn run(cli: &Cli) -> Result<bool> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Analyze { entry } => analyze(entry, out),
        Command::Beta { entry, beta, samples } => beta_cmd(entry, beta.as_deref(), *samples, cli, out),
        Command::Flow {
            scenario,
            dt,
            t_end,
            beta,
        } => flow(scenario, *dt, *t_end, beta.as_deref(), cli),
        Command::Verify { only, samples } => suites::run(only.as_deref(), *samples, cli.seed, out),
        Command::Catalog { action } => catalog_cmd(action, out),
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    name: String,
    dim: usize,
    isotropy_dim: usize,
    unimodular: bool,
    killing_signature: (usize, usize, usize),
    jacobi_residual: f64,
    derived_dim: usize,
    radical_dim: usize,
    nilradical_dim: usize,
    derivation_dim: usize,
    mean_curvature_h: f64,
    standardness: Standardness,
}

fn analyze(target: &str, out: Option<&Path>) -> Result<bool> {
    let entry = catalog::resolve(target)?;
    let alg = entry.algebra();
    let report = AnalyzeReport {
        name: entry.name().to_string(),
        dim: alg.dim(),
        isotropy_dim: entry.space().dim_h(),
        unimodular: alg.is_unimodular(),
        killing_signature: alg.killing_signature(),
        jacobi_residual: alg.jacobi_residual(),
        derived_dim: alg.derived_algebra().dim(),
        radical_dim: alg.radical()?.dim(),
        nilradical_dim: alg.nilradical()?.dim(),
        derivation_dim: alg.derivation_space().len(),
        mean_curvature_h: mean_curvature(entry.space(), entry.metric()).h,
        standardness: standardness_check(entry.space(), entry.metric())?,
    };
    emit_json(out, &format!("{}_analyze.json", entry.name()), &report)?;
    Ok(true)
}

#[derive(Serialize)]
struct BetaOutput {
    entry: String,
    /// Label in the algebra's own basis.
    label: BetaJson,
    eigenvalues: Vec<f64>,
    trace_beta_plus: f64,
    norm2: f64,
    identity_residuals: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    catalog_spectrum_distance: Option<f64>,
    report: BetaReport,
    pass: bool,
}

fn read_beta(path: &Path) -> Result<BetaJson> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn beta_cmd(target: &str, file: Option<&Path>, samples: usize, cli: &Cli, out: Option<&Path>) -> Result<bool> {
    let entry = catalog::resolve(target)?;
    let frame = entry.space().adapted(entry.metric())?;
    let beta: BetaData = match file {
        Some(path) => {
            let json = read_beta(path)?;
            let b = linalg::from_rows(&json.beta).ok_or_else(|| Error::Schema("beta: ragged matrix".into()))?;
            homflow::strata::beta_in_frame(&frame, &b, json.source, json.criticality_residual)?
        }
        None => {
            let mu = bracket_in_frame(entry.space(), entry.metric())?;
            moment_flow(&mu, MOMENT_FLOW_STEPS, cli.tol.unwrap_or(MOMENT_FLOW_TOL))?
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let opts = VerifyOptions {
        samples,
        ..Default::default()
    };
    let report = verify_beta(entry.space(), entry.metric(), &beta, &opts, &mut rng)?;
    let catalog_spectrum_distance = entry.beta_frame()?.map(|c| c.spectrum_distance(&beta));
    let spectrum_ok = catalog_spectrum_distance.is_none_or(|d| d <= 1e-6);
    let crit_ok = beta.criticality_residual().is_none_or(|r| r <= 1e-6);
    let inv = linalg::inverse(&frame.basis).expect("frame is a basis");
    let alg_beta = &frame.basis * beta.beta() * inv;
    let mut label = beta.to_json();
    label.beta = linalg::to_rows(&alg_beta);
    let pass = report.pass && spectrum_ok && crit_ok;
    let output = BetaOutput {
        entry: entry.name().to_string(),
        label,
        eigenvalues: beta.eigenvalues().iter().cloned().collect(),
        trace_beta_plus: beta.beta_plus().trace(),
        norm2: beta.norm2(),
        identity_residuals: beta.identity_residuals(),
        catalog_spectrum_distance,
        report,
        pass,
    };
    emit_json(out, &format!("{}_beta.json", entry.name()), &output)?;
    Ok(pass)
}

#[derive(Serialize)]
struct OrbitSummary {
    rows: Vec<OrbitRow>,
    max_abs_tr_l: f64,
    pass: bool,
}

#[derive(Serialize)]
struct FlowOutput {
    scenario: String,
    entry: String,
    dt: f64,
    t_end: f64,
    beta_eigenvalues: Vec<f64>,
    audit: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<ReplayReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit_mean_curvature: Option<OrbitSummary>,
    pass: bool,
}

fn flow(path: &Path, dt: Option<f64>, t_end: Option<f64>, beta: Option<&Path>, cli: &Cli) -> Result<bool> {
    let (mut cfg, base) = ScenarioConfig::load(path).with_context(|| format!("loading scenario {}", path.display()))?;
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    if let Some(b) = beta {
        let abs = std::env::current_dir()?.join(b);
        cfg.beta = BetaChoice::File(abs.to_string_lossy().into_owned());
    }
    if let Some(tol) = cli.tol {
        cfg.tolerances.ode = tol;
    }
    let scenario = cfg.build(&base)?;
    let system = &scenario.system;
    let traj = system.integrate(scenario.initial_state()?, cfg.t_end, cfg.dt)?;
    if let Some(reason) = &traj.halted {
        eprintln!("{reason}");
    }
    let audit = invariant_audit(system, &traj);
    let replay = match &scenario.automorphism {
        Some(a) => Some(conjugation_replay(system, &traj, a)?),
        None => None,
    };
    let orbit = match cfg.orbit_mean_curvature {
        Some(o) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let rows = scenario.entry.orbit_survey(o.metrics, o.rotations, o.spread, &mut rng)?;
            let max_abs = rows.iter().map(|r| r.tr_l.abs()).fold(0.0, f64::max);
            Some(OrbitSummary {
                rows,
                max_abs_tr_l: max_abs,
                pass: max_abs <= 1e-10,
            })
        }
        None => None,
    };
    let pass = audit.pass
        && replay.as_ref().is_none_or(|r| r.pass)
        && orbit.as_ref().is_none_or(|o| o.pass);

    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let dir: PathBuf = match (&cli.output, &cfg.output) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => PathBuf::from("out"),
    };
    let csv = csv_bytes(&CSV_HEADER, traj.monitors.iter().map(|m| m.csv_row().to_vec()))?;
    write_atomic(&dir.join(format!("{stem}.csv")), &csv)?;
    let output = FlowOutput {
        scenario: stem.clone(),
        entry: scenario.entry.name().to_string(),
        dt: cfg.dt,
        t_end: cfg.t_end,
        beta_eigenvalues: system.beta.eigenvalues().iter().cloned().collect(),
        audit,
        replay,
        orbit_mean_curvature: orbit,
        pass,
    };
    emit_json(Some(&dir), &format!("{stem}_audit.json"), &output)?;
    println!(
        "{stem}: {} ({} steps, csv and audit in {})",
        if pass { "pass" } else { "FAIL" },
        output.audit.steps,
        dir.display()
    );
    Ok(pass)
}

#[derive(Serialize)]
struct CatalogRow {
    name: String,
    aliases: Vec<String>,
    dim: usize,
    isotropy_dim: usize,
    has_beta: bool,
    has_cartan_involution: bool,
    description: Option<String>,
}

fn row(e: &Entry) -> CatalogRow {
    CatalogRow {
        name: e.name().to_string(),
        aliases: e.json.aliases.clone(),
        dim: e.algebra().dim(),
        isotropy_dim: e.space().dim_h(),
        has_beta: e.beta().is_some(),
        has_cartan_involution: e.cartan_involution().is_some(),
        description: e.json.description.clone(),
    }
}

fn catalog_cmd(action: &CatalogAction, out: Option<&Path>) -> Result<bool> {
    match action {
        CatalogAction::List => {
            let entries = catalog::all()?;
            if out.is_some() {
                let rows: Vec<_> = entries.iter().map(row).collect();
                emit_json(out, "catalog.json", &rows)?;
            } else {
                for e in &entries {
                    println!(
                        "{:<20} dim {:>2}  isotropy {}  {}",
                        e.name(),
                        e.algebra().dim(),
                        e.space().dim_h(),
                        e.json.description.as_deref().unwrap_or("")
                    );
                }
            }
        }
        CatalogAction::Show { name } => {
            let e = catalog::resolve(name)?;
            emit_json(out, &format!("{}.json", e.name()), &e.json)?;
        }
    }
    Ok(true)
}
