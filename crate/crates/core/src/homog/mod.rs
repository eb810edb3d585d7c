//! Periodic homogenisation experiments for the fractional Dirichlet problem.

mod experiment;
mod kernel;
mod metric;
mod probes;
mod profile;
mod sequence;

pub use experiment::{
    run_homog_experiment, trend_verdict, ConvergenceReport, ExperimentOptions, ProbeRecord, Reference, ReportRow,
    RowMetrics, Verdict, PROBE_MODES, REPORT_HEADER,
};
pub use kernel::{gram_matrix, kernel_family_1d, kernel_generator};
pub use metric::{
    ds_metric, global_metric, weakstar_distance, MetricFamily, MetricProbe, DEFAULT_DS_TERMS,
};
pub use probes::{
    box_modes, bump, complement_bumps, complement_sites, interior_bumps, interior_sites, omega_modes, trig_family,
    BumpSite,
};
pub use profile::Profile;
pub use sequence::{
    checkerboard_sequence_2d, custom_sequence, layered_sequence_2d, periodic_sequence_1d,
    predicted_limit_1d, CoefficientSequence, Family, Region,
};
