//! Numerical layer: quasi-distances, horizontal path lengths, graphs over vertical subgroups.

pub mod cc;
pub mod experiments;
pub mod quasi;
pub mod step2;

pub use cc::{cc_upper_bound, CcPath, CcPlanner};
pub use experiments::{
    graph_distance_experiment, holonomy_check, length_comparison_experiment, GraphDistanceConfig,
    GraphDistanceResult, LengthExperimentConfig, LengthExperimentResult, PhiSpec,
};
pub use quasi::{calibrate, Calibration, QuasiNorm};
pub use step2::{ControlSegment, FastPoly, HorizontalCurve, LipschitzReport, Step2GraphSetup};
