use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::design_space::{DesignSpace, Doe, MixedPoint};
use crate::error::{Error, Result};

use super::config::{HyperparameterVector, KernelConfig};
use super::kernel::{KernelState, KernelStructure, ScaledPoint, TrainingGeometry};
use super::likelihood::{geometry, Concentrated};

/// A fitted kriging model. Responses are standardized internally; every
/// accessor reports original units.
#[derive(Debug, Clone)]
pub struct TrainedGp {
    structure: KernelStructure,
    theta: HyperparameterVector,
    doe: Doe,
    state: KernelState,
    geometry: TrainingGeometry,
    conc: Concentrated,
    y_mean: f64,
    y_scale: f64,
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    space: DesignSpace,
    config: KernelConfig,
    theta: HyperparameterVector,
    doe: Doe,
    mu_hat: f64,
    sigma2_hat: f64,
    nugget: f64,
}

/// Mean and population standard deviation; a zero spread maps to scale 1.
pub(crate) fn standardization(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 1e-14 * mean.abs().max(f64::MIN_POSITIVE) && sd > 0.0 {
        (mean, sd)
    } else {
        (mean, 1.0)
    }
}

impl TrainedGp {
    /// Assembles the model at fixed `theta`. With `nugget = None` the nugget
    /// ladder picks the first rung that factors.
    pub fn assemble(
        structure: KernelStructure,
        theta: HyperparameterVector,
        doe: Doe,
        nugget: Option<f64>,
    ) -> Result<Self> {
        let y = doe.responses()?;
        let (y_mean, y_scale) = standardization(y);
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        let state = structure.state(&theta)?;
        let geometry = geometry(&structure, &doe)?;
        let r = geometry.correlation(&state);
        let conc = match nugget {
            None => Concentrated::new(&r, &ys)?,
            Some(n) => Concentrated::with_nugget(&r, n, &ys)?,
        };
        Ok(Self {
            structure,
            theta,
            doe,
            state,
            geometry,
            conc,
            y_mean,
            y_scale,
        })
    }

    pub fn space(&self) -> &DesignSpace {
        self.structure.space()
    }

    pub fn config(&self) -> &KernelConfig {
        self.structure.config()
    }

    pub fn structure(&self) -> &KernelStructure {
        &self.structure
    }

    pub fn theta(&self) -> &HyperparameterVector {
        &self.theta
    }

    pub fn kernel_state(&self) -> &KernelState {
        &self.state
    }

    pub fn doe(&self) -> &Doe {
        &self.doe
    }

    pub fn n_hyperparameters(&self) -> usize {
        self.theta.len()
    }

    pub fn mu_hat(&self) -> f64 {
        self.y_mean + self.y_scale * self.conc.mu
    }

    pub fn sigma2_hat(&self) -> f64 {
        self.y_scale * self.y_scale * self.conc.sigma2
    }

    pub fn nugget(&self) -> f64 {
        self.conc.nugget
    }

    /// Concentrated log-likelihood of the original-unit responses.
    pub fn log_likelihood(&self) -> f64 {
        self.conc.log_likelihood - self.doe.len() as f64 * self.y_scale.ln()
    }

    pub fn predict_mean(&self, w: &MixedPoint) -> Result<f64> {
        Ok(self.predict_scaled(&self.structure.scale(w)?).0)
    }

    pub fn predict_variance(&self, w: &MixedPoint) -> Result<f64> {
        Ok(self.predict_scaled(&self.structure.scale(w)?).1)
    }

    /// Mean and variance at `w`.
    pub fn predict(&self, w: &MixedPoint) -> Result<(f64, f64)> {
        Ok(self.predict_scaled(&self.structure.scale(w)?))
    }

    pub(crate) fn predict_scaled(&self, w: &ScaledPoint) -> (f64, f64) {
        let r = self.state.correlations(w, &self.geometry.points);
        let mean = self.conc.mu + r.dot(&self.conc.alpha);
        let l_inv_r = self.conc.chol.solve_lower(&r);
        let trend = 1.0 - self.conc.l_inv_one.dot(&l_inv_r);
        let var = self.conc.sigma2
            * (1.0 - l_inv_r.norm_squared() + trend * trend / self.conc.one_r_one());
        (
            self.y_mean + self.y_scale * mean,
            (self.y_scale * self.y_scale * var).max(0.0),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SavedModel {
            space: self.space().clone(),
            config: self.config().clone(),
            theta: self.theta.clone(),
            doe: self.doe.clone(),
            mu_hat: self.mu_hat(),
            sigma2_hat: self.sigma2_hat(),
            nugget: self.nugget(),
        })?)
    }

    /// Rebuilds the model; projections and the factorization are recomputed
    /// from the stored design and hyperparameters.
    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedModel = serde_json::from_str(text)?;
        let space = DesignSpace::new(saved.space.variables().to_vec())?;
        let structure = KernelStructure::new(&space, &saved.config, &saved.doe)?;
        let gp = Self::assemble(structure, saved.theta, saved.doe, Some(saved.nugget))?;
        let tol = 1e-8 * (1.0 + saved.mu_hat.abs());
        if (gp.mu_hat() - saved.mu_hat).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "stored mean {} does not match the rebuilt model ({})",
                saved.mu_hat,
                gp.mu_hat()
            )));
        }
        Ok(gp)
    }
}
