//! Picard solver for the McKean–Vlasov Fokker–Planck equation
//! `∂_t μ = ½Δμ - ∇·(b_t(·, μ_t) μ)` on the periodic grid.

mod calibrate;
mod etd;
mod flow;
mod params;
mod picard;

pub use calibrate::{measured_lipschitz, small_singular_instance, SmallInstance, LIPSCHITZ_HORIZON_TARGET};
pub use etd::{RepairStats, StepControl};
pub use flow::MeasureFlow;
pub use params::{eta_theta_params, tau_n_formula, Admissibility, FlowParams};
pub use picard::{
    decay_trajectory, fit_envelope, flow_distance_norms, heat_flow, phi_apply, picard_solve, time_shift_solve,
    weighted_flow_distance, SolveReport, SolverOptions,
};
