use std::time::Instant;

use log::warn;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design_space::{DesignSpace, Doe};
use crate::error::{Error, Result};
use crate::optim::{diagonal_starts, minimize_unit_box, LocalSearchConfig, FAILURE_PENALTY};

use super::config::KernelConfig;
use super::kernel::KernelStructure;
use super::likelihood::{geometry, Concentrated};
use super::model::{standardization, TrainedGp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Start-point jitter as a fraction of each search range.
    pub jitter: f64,
    pub local: LocalSearchConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 10,
            seed: 0,
            jitter: 0.1,
            local: LocalSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartResult {
    pub index: usize,
    /// Final search objective as a log-likelihood in original response units,
    /// including any repair penalty; `None` if every evaluation of this start
    /// failed.
    pub log_likelihood: Option<f64>,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub best_log_likelihood: f64,
    pub starts: Vec<StartResult>,
    pub total_evals: usize,
    pub wall_time_secs: f64,
    pub n_hyperparameters: usize,
    pub nugget: f64,
    /// True when the responses had zero variance and no search was run.
    pub constant_model: bool,
}

/// Maximizes the concentrated likelihood from `opts.starts` diagonal starts.
pub fn fit(
    space: &DesignSpace,
    config: &KernelConfig,
    doe: &Doe,
    opts: &FitOptions,
) -> Result<(TrainedGp, FitReport)> {
    let clock = Instant::now();
    let y = doe.responses()?;
    if doe.len() < 2 {
        return Err(Error::InvalidArgument("fitting needs at least 2 points".into()));
    }
    if opts.starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let (y_mean, y_scale) = standardization(y);
    let constant = y.iter().all(|v| (v - y_mean).abs() <= 1e-14 * y_mean.abs().max(f64::MIN_POSITIVE));
    let structure = if constant {
        // PLS projections are undefined without response variance.
        KernelStructure::new(space, &without_pls(config), doe)?
    } else {
        KernelStructure::new(space, config, doe)?
    };
    let initial = structure.initial_hyperparameters();
    let dim = initial.len();

    if constant || dim == 0 {
        if constant {
            warn!("responses have zero variance; returning a constant model");
        }
        let gp = TrainedGp::assemble(structure, initial, doe.clone(), None)?;
        let report = FitReport {
            best_log_likelihood: gp.log_likelihood(),
            starts: Vec::new(),
            total_evals: 0,
            wall_time_secs: clock.elapsed().as_secs_f64(),
            n_hyperparameters: dim,
            nugget: gp.nugget(),
            constant_model: constant,
        };
        return Ok((gp, report));
    }

    let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
    let geo = geometry(&structure, doe)?;
    let n_points = doe.len() as f64;
    let objective = |u: &[f64]| -> f64 {
        let mut theta = initial.clone();
        theta.set_from_unit(u);
        let Ok(state) = structure.state(&theta) else {
            return f64::INFINITY;
        };
        // Repaired matrices all sit on the PSD boundary, so the likelihood is
        // flat across the indefinite region; the shift restores a slope back
        // towards valid reconstructions without moving SPD optima.
        match Concentrated::new(&geo.correlation(&state), &ys) {
            Ok(c) => -c.log_likelihood + n_points * state.repair_shift,
            Err(_) => f64::INFINITY,
        }
    };

    let starts = diagonal_starts(dim, opts.starts, opts.seed, opts.jitter);
    let results: Vec<_> = starts
        .par_iter()
        .map(|x0| minimize_unit_box(objective, x0, &opts.local))
        .collect();

    let shift = doe.len() as f64 * y_scale.ln();
    let start_reports: Vec<StartResult> = results
        .iter()
        .enumerate()
        .map(|(index, r)| StartResult {
            index,
            log_likelihood: (r.value < FAILURE_PENALTY).then(|| -r.value - shift),
            evals: r.evals,
            converged: r.converged,
        })
        .collect();
    let best = results
        .iter()
        .filter(|r| r.value < FAILURE_PENALTY)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::FitFailed(opts.starts))?;

    let mut theta = initial.clone();
    theta.set_from_unit(&best.x);
    let gp = TrainedGp::assemble(structure, theta, doe.clone(), None)?;
    let report = FitReport {
        best_log_likelihood: gp.log_likelihood(),
        total_evals: results.iter().map(|r| r.evals).sum(),
        starts: start_reports,
        wall_time_secs: clock.elapsed().as_secs_f64(),
        n_hyperparameters: dim,
        nugget: gp.nugget(),
        constant_model: false,
    };
    Ok((gp, report))
}

/// Same kernel families with every PLS reduction replaced by its full form.
fn without_pls(config: &KernelConfig) -> KernelConfig {
    use super::config::CategoricalKind::*;
    KernelConfig {
        continuous_kernel: config.continuous_kernel,
        categorical: config
            .categorical
            .iter()
            .map(|k| match k {
                EhhPls { .. } => Ehh,
                HhPls { .. } => Hh,
                other => *other,
            })
            .collect(),
        continuous_pls: None,
        cr_pls: None,
    }
}
