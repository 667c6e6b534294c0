use serde::{Deserialize, Serialize};

use crate::design_space::DesignSpace;
use crate::error::{Error, Result};

/// Bounds of continuous and GD length scales: correlations between 2.06e-9 and
/// 0.999999 on the unit-scaled inputs.
pub const THETA_BOUNDS: (f64, f64) = (1e-6, 20.0);
/// Bounds of CR diagonal entries; a pairwise sum spans the same correlation range.
pub const CR_BOUNDS: (f64, f64) = (5e-7, 10.0);
pub const ANGLE_BOUNDS: (f64, f64) = (0.0, std::f64::consts::PI);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuousKernel {
    #[default]
    SquaredExponential,
    AbsoluteExponential,
}

impl ContinuousKernel {
    /// Per-dimension distance term.
    #[inline]
    pub fn distance(self, delta: f64) -> f64 {
        match self {
            Self::SquaredExponential => delta * delta,
            Self::AbsoluteExponential => delta.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CategoricalKind {
    Gd,
    Cr,
    Ehh,
    Hh,
    EhhPls { reduced_levels: usize },
    HhPls { reduced_levels: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub continuous_kernel: ContinuousKernel,
    /// One entry per categorical variable, in declaration order.
    pub categorical: Vec<CategoricalKind>,
    /// PLS components for the continuous and integer block.
    #[serde(default)]
    pub continuous_pls: Option<usize>,
    /// PLS components for a single projection of the one-hot relaxed space;
    /// requires every categorical kind to be CR.
    #[serde(default)]
    pub cr_pls: Option<usize>,
}

impl KernelConfig {
    /// Squared-exponential continuous kernel and `kind` on every categorical.
    pub fn uniform(space: &DesignSpace, kind: CategoricalKind) -> Self {
        Self {
            continuous_kernel: ContinuousKernel::SquaredExponential,
            categorical: vec![kind; space.n_categorical()],
            continuous_pls: None,
            cr_pls: None,
        }
    }

    /// CR over the relaxed space, collapsed through `components` PLS directions.
    pub fn cr_pls(space: &DesignSpace, components: usize) -> Self {
        Self {
            cr_pls: Some(components),
            ..Self::uniform(space, CategoricalKind::Cr)
        }
    }

    pub fn validate(&self, space: &DesignSpace) -> Result<()> {
        if self.categorical.len() != space.n_categorical() {
            return Err(Error::InvalidArgument(format!(
                "{} categorical kernels for {} categorical variables",
                self.categorical.len(),
                space.n_categorical()
            )));
        }
        for (kind, levels) in self.categorical.iter().zip(space.level_counts()) {
            if let CategoricalKind::EhhPls { reduced_levels } | CategoricalKind::HhPls { reduced_levels } = kind {
                if *reduced_levels < 2 || *reduced_levels >= levels {
                    return Err(Error::InvalidArgument(format!(
                        "reduced level count {reduced_levels} must lie in [2, {levels})"
                    )));
                }
            }
        }
        let n_quant = space.n_continuous() + space.n_integer();
        if let Some(d) = self.continuous_pls {
            if d == 0 || d > n_quant {
                return Err(Error::InvalidArgument(format!(
                    "continuous PLS with {d} components on {n_quant} quantitative dimensions"
                )));
            }
        }
        if let Some(d) = self.cr_pls {
            if self.continuous_pls.is_some() {
                return Err(Error::InvalidArgument(
                    "cr_pls and continuous_pls are mutually exclusive".into(),
                ));
            }
            if self.categorical.iter().any(|k| *k != CategoricalKind::Cr) {
                return Err(Error::InvalidArgument(
                    "cr_pls requires CR on every categorical variable".into(),
                ));
            }
            if d == 0 || d > space.relaxed_dim() {
                return Err(Error::InvalidArgument(format!(
                    "CR PLS with {d} components on {} relaxed dimensions",
                    space.relaxed_dim()
                )));
            }
        }
        Ok(())
    }
}

/// Flat hyperparameter vector in natural units with per-entry bounds.
/// Log-scaled entries are searched in `ln` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterVector {
    pub values: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub log_scale: Vec<bool>,
}

impl HyperparameterVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.len() != self.values.len() || self.log_scale.len() != self.values.len() {
            return Err(Error::DimensionMismatch(
                "hyperparameter values, bounds and scales differ in length".into(),
            ));
        }
        for (v, (lo, hi)) in self.values.iter().zip(&self.bounds) {
            if !(*v >= *lo && *v <= *hi) {
                return Err(Error::InvalidArgument(format!(
                    "hyperparameter {v} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Coordinates in the unit box used by the optimizer.
    pub fn to_unit(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.bounds)
            .zip(&self.log_scale)
            .map(|((v, (lo, hi)), log)| {
                if *log {
                    (v.ln() - lo.ln()) / (hi.ln() - lo.ln())
                } else {
                    (v - lo) / (hi - lo)
                }
            })
            .collect()
    }

    /// Inverse of [`Self::to_unit`], clamping to the box.
    pub fn set_from_unit(&mut self, u: &[f64]) {
        for (((v, (lo, hi)), log), u) in self
            .values
            .iter_mut()
            .zip(&self.bounds)
            .zip(&self.log_scale)
            .zip(u)
        {
            let u = u.clamp(0.0, 1.0);
            *v = if *log {
                (lo.ln() + u * (hi.ln() - lo.ln())).exp().clamp(*lo, *hi)
            } else {
                lo + u * (hi - lo)
            };
        }
    }
}
