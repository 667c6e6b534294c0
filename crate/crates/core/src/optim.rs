//! Bounded derivative-free local search (COBYLA) in the unit box, plus the
//! diagonal multistart layout.

use std::cell::{Cell, RefCell};

use cobyla::{minimize, RhoBeg, StopTols};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Objective value substituted for non-finite evaluations.
pub const FAILURE_PENALTY: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// Evaluation budget per start is `max_evals_per_dim · dim`.
    pub max_evals_per_dim: usize,
    /// Hard ceiling on the per-start budget, if any.
    pub max_evals_cap: Option<usize>,
    /// Step-size stopping tolerance in unit-box coordinates.
    pub xtol: f64,
    /// Initial trust-region radius in unit-box coordinates.
    pub rhobeg: f64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            max_evals_per_dim: 150,
            max_evals_cap: None,
            xtol: 1e-4,
            rhobeg: 0.25,
        }
    }
}

impl LocalSearchConfig {
    pub fn budget(&self, dim: usize) -> usize {
        let b = self.max_evals_per_dim.saturating_mul(dim.max(1));
        self.max_evals_cap.map_or(b, |cap| b.min(cap)).max(dim + 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// False when the search stopped on a failure status rather than a
    /// tolerance or budget.
    pub converged: bool,
}

/// Minimizes `f` over `[0, 1]^dim` from `x0`. Non-finite objective values are
/// replaced by [`FAILURE_PENALTY`].
pub fn minimize_unit_box(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    cfg: &LocalSearchConfig,
) -> LocalResult {
    let dim = x0.len();
    let evals = Cell::new(0usize);
    // The returned iterate is not always the best point visited.
    let best: RefCell<(f64, Vec<f64>)> = RefCell::new((f64::INFINITY, Vec::new()));
    let objective = |x: &[f64], _: &mut ()| -> f64 {
        evals.set(evals.get() + 1);
        let clamped: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let v = f(&clamped);
        let v = if v.is_finite() { v } else { FAILURE_PENALTY };
        let mut b = best.borrow_mut();
        if v < b.0 {
            *b = (v, clamped);
        }
        v
    };
    let start: Vec<f64> = x0.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let bounds = vec![(0.0, 1.0); dim];
    let tols = StopTols {
        xtol_abs: vec![cfg.xtol; dim],
        ..StopTols::default()
    };
    let no_cons: &[fn(&[f64], &mut ()) -> f64] = &[];
    let outcome = minimize(
        objective,
        &start,
        &bounds,
        no_cons,
        (),
        cfg.budget(dim),
        RhoBeg::All(cfg.rhobeg),
        Some(tols),
    );
    let converged = outcome.is_ok();
    let (value, x) = best.into_inner();
    let (value, x) = if x.is_empty() {
        (FAILURE_PENALTY, start)
    } else {
        (value, x)
    };
    LocalResult {
        x,
        value,
        evals: evals.get(),
        converged,
    }
}

/// Start `k` of `starts` sits at `(k + 0.5) / starts` on every coordinate,
/// shifted by uniform jitter of `±jitter` and clipped to the box. Each start
/// draws from its own stream, so the layout is independent of evaluation order.
pub fn diagonal_starts(dim: usize, starts: usize, seed: u64, jitter: f64) -> Vec<Vec<f64>> {
    (0..starts)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let base = (k as f64 + 0.5) / starts as f64;
            (0..dim)
                .map(|_| (base + jitter * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0))
                .collect()
        })
        .collect()
}
