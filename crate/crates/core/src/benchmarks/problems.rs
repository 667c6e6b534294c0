use std::fmt;
use std::sync::Arc;

use crate::design_space::{validate_point, validation_grid, DesignSpace, Doe, MixedPoint, VariableSpec};
use crate::error::{Error, Result};

use super::functions::{cantilever_fn, cosine_fn, toy_fn};
use super::sections::CrossSectionTable;

type Evaluator = Arc<dyn Fn(&MixedPoint) -> Result<f64> + Send + Sync>;

/// An analytic test problem with its reference validation grid.
#[derive(Clone)]
pub struct BenchmarkProblem {
    pub name: String,
    pub space: DesignSpace,
    evaluator: Evaluator,
    /// Points per continuous axis of the validation grid; `None` when the
    /// problem is only used for optimization.
    pub validation_resolution: Option<usize>,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("validation_resolution", &self.validation_resolution)
            .finish()
    }
}

impl BenchmarkProblem {
    pub fn new(
        name: impl Into<String>,
        space: DesignSpace,
        evaluator: impl Fn(&MixedPoint) -> Result<f64> + Send + Sync + 'static,
        validation_resolution: Option<usize>,
    ) -> Self {
        Self {
            name: name.into(),
            space,
            evaluator: Arc::new(evaluator),
            validation_resolution,
        }
    }

    /// One continuous `x ∈ [0, 1]` and a 13-level categorical; 1000 × 13 grid.
    pub fn cosine() -> Self {
        let space = DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).expect("valid bounds"),
            VariableSpec::categorical("c", (1..=13).map(|c| c.to_string())).expect("valid levels"),
        ])
        .expect("valid space");
        Self::new("cosine", space, |w| cosine_fn(w.x[0], w.c[0]), Some(1000))
    }

    /// One continuous `x ∈ [0, 1]` and a 10-level categorical labelled 0..=9.
    pub fn toy() -> Self {
        let space = DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).expect("valid bounds"),
            VariableSpec::categorical("c", (0..10).map(|c| c.to_string())).expect("valid levels"),
        ])
        .expect("valid space");
        Self::new("toy", space, |w| toy_fn(w.x[0], w.c[0] - 1), Some(10_001))
    }

    /// Cross-section (12 levels), length `L ∈ [10, 20]` and area `S ∈ [1, 2]`;
    /// 12 × 30 × 30 grid.
    pub fn cantilever(table: CrossSectionTable) -> Self {
        let space = DesignSpace::new(vec![
            VariableSpec::categorical("section", table.labels()).expect("valid levels"),
            VariableSpec::continuous("L", 10.0, 20.0).expect("valid bounds"),
            VariableSpec::continuous("S", 1.0, 2.0).expect("valid bounds"),
        ])
        .expect("valid space");
        Self::new(
            "cantilever",
            space,
            move |w| cantilever_fn(&table, w.c[0], w.x[0], w.x[1]),
            Some(30),
        )
    }

    /// Looks up a built-in problem by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Self::cosine()),
            "toy" => Ok(Self::toy()),
            "cantilever" => Ok(Self::cantilever(CrossSectionTable::default())),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem '{other}' (expected cosine, toy or cantilever)"
            ))),
        }
    }

    pub fn evaluate(&self, w: &MixedPoint) -> Result<f64> {
        validate_point(&self.space, w)?;
        (self.evaluator)(w)
    }

    /// Validation grid with responses.
    pub fn validation_set(&self) -> Result<Doe> {
        let res = self.validation_resolution.ok_or_else(|| {
            Error::InvalidArgument(format!("problem '{}' has no validation grid", self.name))
        })?;
        let grid = validation_grid(&self.space, res, crate::design_space::DEFAULT_GRID_CAP)?;
        let y = grid
            .points
            .iter()
            .map(|w| (self.evaluator)(w))
            .collect::<Result<Vec<_>>>()?;
        Doe::new(grid.points, Some(y))
    }
}
