//! Interacting particle systems for the mollified McKean–Vlasov SDE.

mod binning;
mod sim;
mod study;

pub use binning::{deposit_cic, empirical_density, interpolate_cic, sharpen};
pub use sim::{binned_drift, sample_initial, simulate_from, simulate_particles, InitialSampler, ParticleEnsemble, SimConfig, Trajectory};
pub use study::{chaos_convergence_study, empirical_w1, trajectory_flow, ChaosStudy, StudyRow, StudySummary};
