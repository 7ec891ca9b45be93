//! Error mitigation: probabilistic error cancellation with fixed sample sets, its
//! partial variant, zero-noise extrapolation and distribution mitigation.

mod appec;
mod distribution;
mod engine;
mod estimators;
mod program;
mod readout;
mod record;
mod sample_set;
mod zne;

pub use estimators::{
    estimate_exact_mitigated, estimate_noisy, ipec_estimate, partially_mitigated_channel, pec_estimate_fresh,
    reference_estimate, reference_instance_values, IpecEvaluator, MitigatedEstimate, SetEvaluator,
};
pub use sample_set::{build_sample_set, build_sample_set_stream, circuit_channels, InstanceMode, SampleSet};
pub use zne::{achieved_factor, linear_fit, zne_circuit, zne_distribution, zne_estimate, zne_fold, ZneConfig, ZneResult};
pub use appec::{annotate_distance, appec_run, appec_run_traced, full_ipec_run, ApecSchedule, ApecStage, StopRule};
pub use distribution::{fidelity, mitigate_distribution, outcome_label, MitigatedDistribution};
pub use readout::{readout_correct, Confusion};
pub use record::EstimateRecord;
