//! Entanglement witnesses: the susceptibility witness `W_χ` and the
//! partial-transpose witness with its population-constrained SDP bound.

mod operator;
mod report;
mod robustness;
mod sdp;
mod susceptibility;

pub use operator::{construct_witness_operator, WitnessOperator, NO_WITNESS_THRESHOLD};
pub use report::{
    sdp_sweep, sdp_table, summarize_bounds, summary_table, susceptibility_sweep, susceptibility_table, BoundSummary,
    SdpSweepOptions, SusceptibilitySweep, WitnessRow,
};
pub use robustness::{robustness_monte_carlo, RobustnessOptions, RobustnessSummary};
pub use sdp::{sdp_upper_bound, sdp_upper_bound_states, DualCertificate, SdpResult, SdpStatus};
pub use susceptibility::{
    cross_susceptibility, susceptibility_witness, witness_r, witness_wchi, SusceptibilityMatrix,
    SusceptibilityWitness, DEFAULT_CHI_STEP, MIN_GROUND_GAP,
};
