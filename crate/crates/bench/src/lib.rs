//! Inputs shared by the kernel benchmarks.

use std::path::Path;

use homflow::catalog::{self, Entry};
use homflow::cohom1::{Scenario, ScenarioConfig};
use homflow::strata::{bracket_in_frame, BracketPoint};

pub fn entry(name: &str) -> Entry {
    catalog::get(name).unwrap_or_else(|e| panic!("catalog entry {name}: {e}"))
}

/// Bracket of a catalog entry in its adapted frame, the moment-flow start point.
pub fn bracket(name: &str) -> BracketPoint {
    let e = entry(name);
    bracket_in_frame(e.space(), e.metric()).expect("adapted frame")
}

pub fn scenario(src: &str) -> Scenario {
    let cfg: ScenarioConfig = serde_json::from_str(src).expect("scenario JSON");
    cfg.build(Path::new(".")).expect("scenario builds")
}
