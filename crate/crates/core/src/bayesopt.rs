//! Unconstrained EGO: fit, maximize expected improvement over the mixed
//! space, evaluate, append, repeat.

use std::io::Write;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::design_space::{lhs_sample, point_to_record, DesignSpace, Doe, MixedPoint, VariableKind};
use crate::error::{Error, Result};
use crate::gp::{fit, FitOptions, KernelConfig, TrainedGp};
use crate::optim::{minimize_unit_box, LocalSearchConfig};

/// Minimum scaled distance between a proposal and a training point sharing
/// its discrete coordinates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-8;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `(f_min - μ)Φ(u) + σφ(u)` with `u = (f_min - μ)/σ`; `max(f_min - μ, 0)` at `σ = 0`.
pub fn ei_from_moments(mu: f64, sigma: f64, f_min: f64) -> f64 {
    let gap = f_min - mu;
    if !(sigma > 0.0) {
        return gap.max(0.0);
    }
    let n = std_normal();
    let u = gap / sigma;
    (gap * n.cdf(u) + sigma * n.pdf(u)).max(0.0)
}

/// `ln EI`, accurate where EI itself underflows.
pub fn log_ei_from_moments(mu: f64, sigma: f64, f_min: f64) -> f64 {
    let gap = f_min - mu;
    if !(sigma > 0.0) {
        return if gap > 0.0 { gap.ln() } else { f64::NEG_INFINITY };
    }
    let u = gap / sigma;
    // Direct evaluation loses about u²·ε to cancellation.
    let core = if u > -20.0 {
        let n = std_normal();
        (n.pdf(u) + u * n.cdf(u)).ln()
    } else {
        // φ(u) + uΦ(u) = φ(u)/u² · (1 - 3/u² + 15/u⁴ - 105/u⁶ + …) for u → -∞
        let v = 1.0 / (u * u);
        -0.5 * u * u - 0.5 * (2.0 * std::f64::consts::PI).ln() + v.ln()
            + (1.0 - 3.0 * v + 15.0 * v * v - 105.0 * v * v * v).ln()
    };
    sigma.ln() + core
}

pub fn expected_improvement(gp: &TrainedGp, w: &MixedPoint, f_min: f64) -> Result<f64> {
    let (mu, var) = gp.predict(w)?;
    Ok(ei_from_moments(mu, var.sqrt(), f_min))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSettings {
    /// Local searches over the continuous coordinates per discrete combination.
    pub continuous_starts: usize,
    /// Discrete combinations are enumerated up to this count, sampled beyond.
    pub enumeration_cap: usize,
    pub local: LocalSearchConfig,
}

impl Default for AcquisitionSettings {
    fn default() -> Self {
        Self {
            continuous_starts: 5,
            enumeration_cap: 10_000,
            local: LocalSearchConfig {
                max_evals_cap: Some(300),
                ..LocalSearchConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub point: MixedPoint,
    pub expected_improvement: f64,
    /// True when the acquisition was degenerate and a random point was used.
    pub exploratory: bool,
}

/// Integer values and categorical levels of one discrete combination.
#[derive(Debug, Clone, PartialEq)]
struct Combination {
    z: Vec<i64>,
    c: Vec<usize>,
}

fn discrete_axes(space: &DesignSpace) -> (Vec<(i64, i64)>, Vec<usize>) {
    (space.integer_bounds(), space.level_counts())
}

fn combination_at(mut index: u128, ints: &[(i64, i64)], levels: &[usize]) -> Combination {
    // last axis varies fastest
    let mut z = vec![0; ints.len()];
    let mut c = vec![0; levels.len()];
    for (k, l) in levels.iter().enumerate().rev() {
        c[k] = (index % *l as u128) as usize + 1;
        index /= *l as u128;
    }
    for (k, (lo, hi)) in ints.iter().enumerate().rev() {
        let n = (hi - lo + 1) as u128;
        z[k] = lo + (index % n) as i64;
        index /= n;
    }
    Combination { z, c }
}

fn combinations(space: &DesignSpace, cap: usize, rng: &mut ChaCha8Rng) -> Vec<Combination> {
    let (ints, levels) = discrete_axes(space);
    let total = space.discrete_combination_count();
    if total <= cap as u128 {
        (0..total).map(|i| combination_at(i, &ints, &levels)).collect()
    } else {
        (0..cap)
            .map(|_| combination_at(rng.random_range(0..total), &ints, &levels))
            .collect()
    }
}

fn random_point(space: &DesignSpace, rng: &mut ChaCha8Rng) -> MixedPoint {
    let mut w = MixedPoint::default();
    for v in space.variables() {
        match &v.kind {
            VariableKind::Continuous { lower, upper } => w.x.push(rng.random_range(*lower..=*upper)),
            VariableKind::Integer { lower, upper } => w.z.push(rng.random_range(*lower..=*upper)),
            VariableKind::Categorical { levels } => w.c.push(rng.random_range(1..=levels.len())),
        }
    }
    w
}

fn from_unit_continuous(space: &DesignSpace, u: &[f64]) -> Vec<f64> {
    space
        .continuous_bounds()
        .iter()
        .zip(u)
        .map(|((lo, hi), u)| lo + u.clamp(0.0, 1.0) * (hi - lo))
        .collect()
}

fn is_duplicate(space: &DesignSpace, w: &MixedPoint, doe: &Doe) -> bool {
    let sw = space.scale_quantitative(w);
    doe.points.iter().any(|p| {
        p.z == w.z
            && p.c == w.c
            && space
                .scale_quantitative(p)
                .iter()
                .zip(&sw)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                < DUPLICATE_TOLERANCE
    })
}

/// Maximizes EI over the mixed space; see [`AcquisitionSettings`].
pub fn propose_next(
    gp: &TrainedGp,
    f_min: f64,
    settings: &AcquisitionSettings,
    seed: u64,
) -> Result<Proposal> {
    let space = gp.space();
    let doe = gp.doe();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let combos = combinations(space, settings.enumeration_cap.max(1), &mut rng);
    let n_cont = space.n_continuous();
    let log_ei = |w: &MixedPoint| -> f64 {
        match gp.predict(w) {
            Ok((mu, var)) => log_ei_from_moments(mu, var.sqrt(), f_min),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut candidates: Vec<(f64, MixedPoint)> = combos
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, combo)| {
            if n_cont == 0 {
                let w = MixedPoint::new(vec![], combo.z.clone(), combo.c.clone());
                return vec![(log_ei(&w), w)];
            }
            let mut local_rng = ChaCha8Rng::seed_from_u64(seed);
            local_rng.set_stream(k as u64 + 1);
            (0..settings.continuous_starts.max(1))
                .map(|_| {
                    let x0: Vec<f64> = (0..n_cont).map(|_| local_rng.random()).collect();
                    let objective = |u: &[f64]| {
                        let w = MixedPoint::new(from_unit_continuous(space, u), combo.z.clone(), combo.c.clone());
                        -log_ei(&w)
                    };
                    let r = minimize_unit_box(objective, &x0, &settings.local);
                    let w = MixedPoint::new(from_unit_continuous(space, &r.x), combo.z.clone(), combo.c.clone());
                    (log_ei(&w), w)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

    if let Some((l, w)) = candidates
        .into_iter()
        .find(|(l, w)| l.is_finite() && !is_duplicate(space, w, doe))
    {
        return Ok(Proposal {
            point: w,
            expected_improvement: l.exp(),
            exploratory: false,
        });
    }
    warn!("expected improvement vanishes everywhere; proposing a random point");
    for _ in 0..1000 {
        let w = random_point(space, &mut rng);
        if !is_duplicate(space, &w, doe) {
            return Ok(Proposal {
                expected_improvement: expected_improvement(gp, &w, f_min)?,
                point: w,
                exploratory: true,
            });
        }
    }
    Err(Error::InvalidArgument(
        "every point of the design space is already in the DoE".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoConfig {
    pub kernel: KernelConfig,
    pub initial_doe: usize,
    pub budget: usize,
    pub acquisition: AcquisitionSettings,
    pub fit: FitOptions,
    pub seed: u64,
}

impl EgoConfig {
    pub fn new(kernel: KernelConfig, initial_doe: usize, budget: usize, seed: u64) -> Self {
        Self {
            kernel,
            initial_doe,
            budget,
            acquisition: AcquisitionSettings::default(),
            fit: FitOptions::default(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoRecord {
    /// 0 for the initial DoE, then the infill index.
    pub iter: usize,
    pub point: MixedPoint,
    /// `None` when the black box failed.
    pub y: Option<f64>,
    pub best_so_far: Option<f64>,
    pub expected_improvement: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub nugget: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoTrace {
    pub records: Vec<EgoRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoSummary {
    pub best_value: Option<f64>,
    pub best_point: Option<MixedPoint>,
    pub evaluations: usize,
    pub failures: usize,
}

impl EgoTrace {
    pub fn best(&self) -> Option<(&MixedPoint, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.y.map(|y| (&r.point, y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn summary(&self) -> EgoSummary {
        let best = self.best();
        EgoSummary {
            best_value: best.map(|b| b.1),
            best_point: best.map(|b| b.0.clone()),
            evaluations: self.records.len(),
            failures: self.records.iter().filter(|r| r.y.is_none()).count(),
        }
    }

    /// Columns `iter`, one per variable, `y`, `best_so_far`.
    pub fn write_csv<W: Write>(&self, space: &DesignSpace, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["iter".to_string()];
        header.extend(space.variables().iter().map(|v| v.name.clone()));
        header.extend(["y".to_string(), "best_so_far".to_string()]);
        wtr.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.iter.to_string()];
            row.extend(point_to_record(space, &r.point));
            row.push(r.y.map(crate::fmt17).unwrap_or_default());
            row.push(r.best_so_far.map(crate::fmt17).unwrap_or_default());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            summary: EgoSummary,
            records: &'a [EgoRecord],
        }
        Ok(serde_json::to_string_pretty(&Out {
            summary: self.summary(),
            records: &self.records,
        })?)
    }
}

/// Runs EGO on `f`. A black-box error or non-finite value is recorded and the
/// point is left out of the training data.
pub fn ego_run<F>(space: &DesignSpace, mut f: F, config: &EgoConfig) -> Result<EgoTrace>
where
    F: FnMut(&MixedPoint) -> std::result::Result<f64, String>,
{
    if config.initial_doe < 2 {
        return Err(Error::InvalidArgument("the initial DoE needs at least 2 points".into()));
    }
    config.kernel.validate(space)?;
    let mut records = Vec::new();
    let mut points = Vec::new();
    let mut ys = Vec::new();
    let mut best: Option<f64> = None;
    let mut evaluate = |w: &MixedPoint| match f(w) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite objective value {v}")),
        Err(e) => Err(e),
    };
    let mut push = |iter: usize,
                    w: MixedPoint,
                    outcome: std::result::Result<f64, String>,
                    ei: Option<f64>,
                    gp: Option<&TrainedGp>,
                    points: &mut Vec<MixedPoint>,
                    ys: &mut Vec<f64>| {
        let (y, error) = match outcome {
            Ok(v) => {
                best = Some(best.map_or(v, |b: f64| b.min(v)));
                points.push(w.clone());
                ys.push(v);
                (Some(v), None)
            }
            Err(e) => {
                warn!("black-box evaluation failed at iteration {iter}: {e}");
                (None, Some(e))
            }
        };
        records.push(EgoRecord {
            iter,
            point: w,
            y,
            best_so_far: best,
            expected_improvement: ei,
            log_likelihood: gp.map(|g| g.log_likelihood()),
            nugget: gp.map(|g| g.nugget()),
            error,
        });
    };

    let initial = lhs_sample(space, config.initial_doe, config.seed)?;
    for w in initial.points {
        let outcome = evaluate(&w);
        push(0, w, outcome, None, None, &mut points, &mut ys);
    }
    for iter in 1..=config.budget {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "fewer than 2 successful evaluations to fit a model".into(),
            ));
        }
        let doe = Doe::new(points.clone(), Some(ys.clone()))?;
        let fit_opts = FitOptions {
            seed: config.fit.seed.wrapping_add(config.seed).wrapping_add(iter as u64),
            ..config.fit.clone()
        };
        let (gp, _) = fit(space, &config.kernel, &doe, &fit_opts)?;
        let f_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let seed = config.seed.wrapping_mul(1_000_003).wrapping_add(iter as u64);
        let proposal = propose_next(&gp, f_min, &config.acquisition, seed)?;
        let outcome = evaluate(&proposal.point);
        push(
            iter,
            proposal.point,
            outcome,
            Some(proposal.expected_improvement),
            Some(&gp),
            &mut points,
            &mut ys,
        );
    }
    Ok(EgoTrace { records })
}
