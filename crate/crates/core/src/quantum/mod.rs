//! Exact state-vector simulation of the coset-sampling procedure.

mod pipeline;
mod prep;
mod state;
mod unitary;

pub use pipeline::{
    abelian_find_divisor, per_run_success_probability, recover_a, recover_a_once, repetition_count,
    solve_hsp, validate, DivisorSearch, PipelineRun, Preparation, RecoverOptions, Recovery,
    RunTranscript, SolveOptions, SolveReport,
};
pub use prep::{
    prepare_psi1_full, prepare_psi2_sampled, psi2_state, register_size, sampled_outcomes, Psi1,
    SampledPsi2,
};
pub use state::{measure, qft, root_of_unity, Direction, Register, StateVector};
pub use unitary::{apply_u, fidelity_with_perfect, Completion, UOperator};
