//! Thermal initial states, non-unitary quench evolution and the Loschmidt
//! echo.
//!
//! The post-quench Hamiltonian `H + λJ` is generally non-Hermitian, so
//! `ρ(t) = M ρ₀ M† / Tr(M ρ₀ M†)` with `M = e^{−i(H+λJ)t}`. Two routes are
//! provided: [`evolve_quench`] materializes every `ρ(t)` and is meant for
//! small systems and cross-checks, while [`quench_echo`] only tracks the
//! factor needed by the echo and handles the 1024-dimensional runs.

mod density;
mod oracles;
mod quench;

pub use density::{
    loschmidt_echo, thermal_state, thermal_weights, DensityMatrix, DEFAULT_STATE_TOL,
};
pub use oracles::{
    jordan_oracle_state, trivial_phase_firstorder, two_level_oracle_rho, FirstOrderOracle,
};
pub use quench::{
    evolve_quench, fmt17, quench_echo, steady_average, EvolvedState, QuenchResult, RunMetadata,
    SteadyAverage, TimeGrid, DEFAULT_BETA, TRACE_FLOOR,
};
