//! Work functions, the work function algorithm for T-MSS, offline optima and
//! potential-function diagnostics.

mod engine;
mod potential;
mod report;
mod work_function;

pub use engine::{
    simulate, simulate_sequence, wfa_choice, wfa_step, AdaptiveAdversary, AdversaryMove, AdversaryView, AlgorithmError,
    Greedy, OnlineAlgorithm, ScriptedRequests, SimError, SimOptions, StepContext, Wfa, WfaStep,
};
pub use potential::{
    check_potential_run, clique_sum, swap_potential, Potential, PotentialError, PotentialReport, Violation,
};
pub use report::{fmt_float, fmt_scaled, ratio_of, ratio_of_f64, RunReport, StepRecord, WorkFunctionTrace};
pub use work_function::WorkFunction;
