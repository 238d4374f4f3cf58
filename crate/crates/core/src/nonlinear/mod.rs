//! Two-mode nonlinear response of a driven antenna: the fundamental and
//! the first collective mode, coupled through their cubic terms.
//!
//! The reduction follows a multiple-scales expansion. The bookkeeping
//! parameter is absorbed into amplitudes, detunings, viscosities and forces,
//! so every quantity here is in plain SI units.
//!
//! The reduced masses and stiffness terms use the cantilever mass m_c = μ_c·l
//! and rigidity ℰ_c wherever a "tip" mass or rigidity would appear.

mod integrals;
mod modes;
mod params;
mod response;

pub use integrals::{
    gamma_closed_form, overlap_integrals, BeamIntegrals, OverlapIntegrals, CANTILEVER_GAP_LIMIT,
    CANTILEVER_PANELS, INTEGRAL_RTOL,
};
pub use modes::{select_modes, TwoModeSelection};
pub use params::{effective_params, EffectiveParams};
pub use response::{
    backbone, coupled_steady_state, coupled_steady_state_ordered, peak_amplitude, phase,
    reconstruct_solution, residual, scan, shift_of_fundamental, single_mode_response, Branch,
    CoupledSolution, Elimination, FrequencyShift, ResponsePoint, SteadyStateField, ACCEPT_RESIDUAL,
    MAX_ITERATIONS,
};
