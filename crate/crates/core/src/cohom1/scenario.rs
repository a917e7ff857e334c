use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{self, matrix, Entry};
use crate::error::{Error, Result};
use crate::homgeom::{AdaptedFrame, InvariantMetric};
use crate::linalg::Mat;
use crate::strata::{beta_in_frame, bracket_in_frame, moment_flow, BetaJson};

use super::{Cohom1System, FlowState, Tolerances};

/// Where the stratum label comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaChoice {
    #[default]
    Catalog,
    Flow,
    /// A label file in the algebra's own basis, relative to the scenario.
    File(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesJson {
    #[serde(default = "default_ode")]
    pub ode: f64,
    #[serde(default = "default_lift")]
    pub lift: f64,
    #[serde(default = "default_mono")]
    pub mono: f64,
}

fn default_ode() -> f64 {
    Tolerances::default().ode
}
fn default_lift() -> f64 {
    Tolerances::default().lift
}
fn default_mono() -> f64 {
    Tolerances::default().mono
}
fn default_dt() -> f64 {
    1e-3
}

impl Default for TolerancesJson {
    fn default() -> Self {
        let t = Tolerances::default();
        TolerancesJson {
            ode: t.ode,
            lift: t.lift,
            mono: t.mono,
        }
    }
}

impl From<TolerancesJson> for Tolerances {
    fn from(t: TolerancesJson) -> Self {
        Tolerances {
            ode: t.ode,
            lift: t.lift,
            mono: t.mono,
        }
    }
}

/// Seeded survey of orbit mean curvatures of rotated Iwasawa subalgebras.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSurveyJson {
    pub metrics: usize,
    pub rotations: usize,
    #[serde(default = "default_spread")]
    pub spread: f64,
}

fn default_spread() -> f64 {
    0.5
}

/// A cohomogeneity-one run. Matrices are in the entry's own m-basis; the
/// entry metric is the background ḡ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Catalog name, or a path to an entry file relative to the scenario.
    pub entry: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lam0: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub beta: BetaChoice,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub tolerances: TolerancesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Automorphism of g (original coordinates) for the conjugation replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphism: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_mean_curvature: Option<OrbitSurveyJson>,
}

/// A scenario resolved into frame coordinates, ready to integrate.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub entry: Entry,
    pub frame: AdaptedFrame,
    pub system: Cohom1System,
    pub g0: Mat,
    pub lam0: Mat,
    /// Replay automorphism in frame coordinates.
    pub automorphism: Option<Mat>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let cfg: ScenarioConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// Resolves paths against `base` (the scenario's directory).
    pub fn build(&self, base: &Path) -> Result<Scenario> {
        if self.dt.is_nan() || self.dt <= 0.0 || self.t_end.is_nan() || self.t_end < 0.0 {
            return Err(Error::Schema("dt must be positive and t_end non-negative".into()));
        }
        let entry_path = base.join(&self.entry);
        let entry = if entry_path.is_file() {
            Entry::load(&entry_path)?
        } else {
            catalog::resolve(&self.entry)?
        };
        let space = entry.space();
        let p = space.dim_m();
        let frame = space.adapted(entry.metric())?;

        let beta = match &self.beta {
            BetaChoice::Catalog => entry
                .beta_frame()?
                .ok_or_else(|| Error::Schema(format!("entry '{}' has no catalog label", entry.name())))?,
            BetaChoice::Flow => {
                let mu = bracket_in_frame(space, entry.metric())?;
                moment_flow(&mu, 100_000, 1e-9)?
            }
            BetaChoice::File(f) => {
                let json: BetaJson = serde_json::from_str(&std::fs::read_to_string(base.join(f))?)?;
                let b = matrix(&json.beta, "beta")?;
                beta_in_frame(&frame, &b, json.source, json.criticality_residual)?
            }
        };

        let g_orig = match &self.metric {
            Some(rows) => sized(matrix(rows, "metric")?, p, "metric")?,
            None => entry.metric().gram().clone(),
        };
        InvariantMetric::checked(space, g_orig.clone())?;
        let lam_orig = match &self.lam0 {
            Some(rows) => sized(matrix(rows, "lam0")?, p, "lam0")?,
            None => Mat::zeros(p, p),
        };
        let g0 = frame.metric_to_frame(&g_orig);
        let lam0 = frame.m_endo_to_frame(&lam_orig)?;
        let automorphism = match &self.automorphism {
            Some(rows) => {
                let a = sized(matrix(rows, "automorphism")?, space.dim(), "automorphism")?;
                Some(frame.endo_to_frame(&a)?)
            }
            None => None,
        };
        let system = Cohom1System::new(frame.space.clone(), beta, self.tolerances.into())?;
        Ok(Scenario {
            config: self.clone(),
            entry,
            frame,
            system,
            g0,
            lam0,
            automorphism,
        })
    }
}

fn sized(m: Mat, n: usize, what: &str) -> Result<Mat> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Schema(format!("{what} must be {n}x{n}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

impl Scenario {
    pub fn initial_state(&self) -> Result<FlowState> {
        self.system.initial_state(&self.g0, &self.lam0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> ScenarioConfig {
        serde_json::from_str(src).unwrap()
    }

    #[test]
    fn defaults() {
        let c = parse(r#"{"entry": "axb", "t_end": 1.0}"#);
        assert_eq!(c.beta, BetaChoice::Catalog);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.tolerances.ode, 1e-8);
        let s = c.build(Path::new(".")).unwrap();
        assert_eq!(s.g0, Mat::identity(2, 2));
        assert_eq!(s.lam0, Mat::zeros(2, 2));
    }

    #[test]
    fn beta_choices_parse() {
        let c = parse(r#"{"entry": "axb", "t_end": 1.0, "beta": "flow"}"#);
        assert_eq!(c.beta, BetaChoice::Flow);
        let s = c.build(Path::new(".")).unwrap();
        assert!((s.system.beta.beta()[(0, 0)] + 1.0).abs() < 1e-6);
        let c = parse(r#"{"entry": "axb", "t_end": 1.0, "beta": {"file": "b.json"}}"#);
        assert_eq!(c.beta, BetaChoice::File("b.json".into()));
    }

    #[test]
    fn frame_conversion_on_scaled_background() {
        // rh_3 has background 2I, so G = 2I is the identity in the frame.
        let c = parse(r#"{"entry": "rh_3", "t_end": 0.1,
            "metric": [[2,0,0],[0,2,0],[0,0,2]], "lam0": [[0.1,0,0],[0,0.2,0],[0,0,0.3]]}"#);
        let s = c.build(Path::new(".")).unwrap();
        assert!(crate::linalg::max_abs(&(&s.g0 - Mat::identity(3, 3))) < 1e-14);
        assert!((s.lam0.trace() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"entry": "axb"}"#).is_err());
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"entry": "axb", "t_end": 1, "bogus": 0}"#).is_err());
        let c = parse(r#"{"entry": "axb", "t_end": 1.0, "metric": [[1.0]]}"#);
        assert!(matches!(c.build(Path::new(".")), Err(Error::Schema(_))));
        let c = parse(r#"{"entry": "abelian3", "t_end": 1.0}"#);
        assert!(c.build(Path::new(".")).is_err());
    }
}
