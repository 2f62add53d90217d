//! Singular interaction kernels, their mollified realizations and the drifts they induce.

mod direct;
mod drift;
mod nemytskii;
mod realize;
mod spec;
mod study;
mod symbol;

pub use direct::{direct_kernel_value, riesz_image_sum, riesz_mollified_1d, riesz_mollified_far, riesz_pointwise};
pub use drift::{drift_from_kernel, Drift, DriftEvaluation, ZeroDrift};
pub use nemytskii::{density_jet, lipschitz_check, nemytskii_drift, LipschitzReport, NemytskiiFamily, NemytskiiSpec};
pub use realize::{realize_kernel, PreparedKernel};
pub use spec::{default_mollification, KernelSpec, KernelVariant, TimeModulation};
pub use study::{
    boundedness_verdict, geometric_eps, kernel_norm_study, ModelFit, NormRow, NormStudy, Verdict,
    MIN_GROWTH_EXPONENT,
};
pub use symbol::{kernel_symbol, riesz_constant, riesz_log_constant};
