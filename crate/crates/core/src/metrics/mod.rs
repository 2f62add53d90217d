//! Distances and divergences between probability measures.

mod divergence;
mod gaussian;
mod quantile;
mod transport;

pub use divergence::{relative_entropy, total_variation, ENTROPY_NULL_MASS};
pub use gaussian::GaussianSpec;
pub use quantile::{wasserstein_1d, wasserstein_quantile, QuantileFunction};
pub use transport::{optimal_plan, transport_cost_enumerate, wasserstein_discrete, DiscreteMeasure, TransportPlan, MAX_PLAN_ENTRIES};
