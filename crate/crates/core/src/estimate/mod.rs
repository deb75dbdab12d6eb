//! Mean estimation: backends, the outlier-rejecting wrapper, multilevel
//! de-biasing and the approximate gradient oracle.

pub mod ago;
pub mod backend;
pub mod mlmc;
pub mod qme;
pub mod source;

pub use ago::{approx_gradient, ago_group_count, AgoOutput};
pub use backend::{estimate_charge, estimate_mean, BackendMode, ContractConfig, MeanEstimationBackend, NoisePolicy};
pub use mlmc::{mlmc_detailed, mlmc_variance_reduce, sample_level, MlmcDraw};
pub use qme::{qme_plus, qme_plus_charge, wrapped_estimate, WrapperParams};
pub use source::{
    ConstantSource, DifferenceSource, DiscreteSource, GaussianSource, GradientSource, ProjectedSource,
    RandomVariableSource,
};
