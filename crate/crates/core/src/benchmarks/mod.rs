//! Analytic test problems, accuracy metrics and experiment runners.

mod functions;
mod problems;
mod runner;
mod sections;

pub use functions::{cantilever_fn, cosine_fn, pva, relative_rmse_percent, rmse, toy_fn, CANTILEVER_LOAD, YOUNG_MODULUS};
pub use problems::BenchmarkProblem;
pub use runner::{
    convergence_curve, median, run_model_benchmark, run_optim_benchmark, BenchmarkReport, KernelChoice, ModelBenchmarkSettings,
    ModelCell, ModelSummary, OptimBenchmarkSettings, OptimCell, OptimSummary,
};
pub use sections::{
    i_beam_inertia, polygon_inertia, star_vertices, CrossSection, CrossSectionTable, Fill, Shape, I_BEAM_THICKNESS, STAR_INNER_RATIO,
};
