pub mod catalog;
pub mod cohom1;
pub mod error;
pub mod linalg;
pub mod strata;
pub mod homgeom;
pub mod liealg;

pub use catalog::Entry;
pub use cohom1::{Cohom1System, FlowState, Monitors, ScenarioConfig, Tolerances, Trajectory};
pub use error::{Error, Result};
pub use homgeom::{AdaptedFrame, HomogeneousSpace, InvariantMetric, MeanCurvature};
pub use strata::{BetaData, BetaSource, BracketPoint};
pub use liealg::{IwasawaData, LieAlgebra, LieAlgebraJson, Root, Subspace, SubspaceJson};
