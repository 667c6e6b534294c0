//! Mixed-input kriging: product kernel over continuous, integer and
//! categorical inputs, concentrated likelihood, multistart fitting and
//! mean/variance prediction.

mod config;
mod fit;
mod kernel;
mod likelihood;
mod model;


pub use config::{
    CategoricalKind, ContinuousKernel, HyperparameterVector, KernelConfig, ANGLE_BOUNDS,
    CR_BOUNDS, THETA_BOUNDS,
};
pub use fit::{fit, FitOptions, FitReport, StartResult};
pub use kernel::{KernelState, KernelStructure, ScaledPoint, TrainingGeometry};
pub use likelihood::{log_likelihood, Concentrated};
pub use model::TrainedGp;
