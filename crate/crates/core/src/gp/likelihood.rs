use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::design_space::{DesignSpace, Doe};
use crate::error::{Error, Result};
use crate::linalg::{ensure_spd, Cholesky};

use super::config::{HyperparameterVector, KernelConfig};
use super::kernel::{KernelStructure, TrainingGeometry};

/// Concentrated-likelihood quantities for one correlation matrix.
#[derive(Debug, Clone)]
pub struct Concentrated {
    /// `-∞` when `σ̂² = 0`.
    pub log_likelihood: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub chol: Cholesky,
    pub nugget: f64,
    /// `L⁻¹ 𝟙`.
    pub l_inv_one: DVector<f64>,
    /// `R⁻¹ (y - 𝟙μ̂)`.
    pub alpha: DVector<f64>,
}

impl Concentrated {
    /// Factors `r` through the nugget ladder.
    pub fn new(r: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let (chol, nugget) = ensure_spd(r)?;
        Ok(Self::from_factor(chol, nugget, y))
    }

    /// Uses the given nugget only; no ladder.
    pub fn with_nugget(r: &DMatrix<f64>, nugget: f64, y: &DVector<f64>) -> Result<Self> {
        let mut a = r.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += nugget;
        }
        Ok(Self::from_factor(Cholesky::factor(&a)?, nugget, y))
    }

    fn from_factor(chol: Cholesky, nugget: f64, y: &DVector<f64>) -> Self {
        let n = y.len();
        let l_inv_one = chol.solve_lower(&DVector::from_element(n, 1.0));
        let l_inv_y = chol.solve_lower(y);
        let mu = l_inv_one.dot(&l_inv_y) / l_inv_one.norm_squared();
        let white = &l_inv_y - &l_inv_one * mu;
        let sigma2 = white.norm_squared() / n as f64;
        let nf = n as f64;
        let log_likelihood = if sigma2 > 0.0 {
            -0.5 * (nf * sigma2.ln() + chol.log_det() + nf * (1.0 + (2.0 * PI).ln()))
        } else {
            f64::NEG_INFINITY
        };
        let alpha = chol.solve_upper(&white);
        Self {
            log_likelihood,
            mu,
            sigma2,
            chol,
            nugget,
            l_inv_one,
            alpha,
        }
    }

    /// `𝟙ᵀR⁻¹𝟙`.
    pub fn one_r_one(&self) -> f64 {
        self.l_inv_one.norm_squared()
    }
}

/// Builds the geometry of `doe` for `structure`.
pub(crate) fn geometry(structure: &KernelStructure, doe: &Doe) -> Result<TrainingGeometry> {
    let pts = doe
        .points
        .iter()
        .map(|p| structure.scale(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingGeometry::new(pts, structure.config().continuous_kernel))
}

/// Concentrated log-likelihood of the raw responses of `doe` at `theta`.
pub fn log_likelihood(
    space: &DesignSpace,
    config: &KernelConfig,
    theta: &HyperparameterVector,
    doe: &Doe,
) -> Result<f64> {
    let y = doe.responses()?;
    if doe.is_empty() {
        return Err(Error::InvalidArgument("empty design of experiments".into()));
    }
    let structure = KernelStructure::new(space, config, doe)?;
    let state = structure.state(theta)?;
    let r = geometry(&structure, doe)?.correlation(&state);
    Ok(Concentrated::new(&r, &DVector::from_column_slice(y))?.log_likelihood)
}
