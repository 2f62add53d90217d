//! Local negative Sobolev norms, their dual norms on measures, and heat-operator exponents.

mod fit;
mod index;
mod lattice;
mod norms;
mod operator;

pub use fit::{fit_exponent, linear_regression, PowerFit};
pub use index::{sup_norm_constant, unit_ball_volume, Exponent, SobolevIndex};
pub use lattice::{BallLattice, BALL_RADIUS, MAX_CENTER_SPACING};
pub use norms::{
    bessel_power, dual_bracket, local_neg_norm, local_neg_norm_vector, measure_dual_norm,
    random_probe_values, DualBracket, DualMethod, ProbeConfig,
};
pub use operator::{heat_operator_exponent, operator_exponent_probe, OperatorProbe, ProbeRow};
