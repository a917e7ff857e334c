//! Stratum labels: the moment map on brackets, its gradient flow, and the
//! parabolic bookkeeping (q_β, sl_β, completions and metric lifts) around a label β.

mod beta;
mod bracket;
mod verify;

pub use beta::{BetaData, BetaJson, BetaSource};
pub use bracket::{
    criticality_residual, moment_flow, moment_flow_traced, moment_map, BracketPoint,
    MomentFlowOptions, MomentFlowTrace,
};
pub use verify::{beta_in_frame, verify_beta, BetaReport, VerifyOptions};

use crate::error::Result;
use crate::homgeom::{HomogeneousSpace, InvariantMetric};

/// Bracket of `space` written in the adapted orthonormal frame of `metric`.
pub fn bracket_in_frame(space: &HomogeneousSpace, metric: &InvariantMetric) -> Result<BracketPoint> {
    let frame = space.adapted(metric)?;
    Ok(BracketPoint::from_algebra(frame.space.algebra()))
}
