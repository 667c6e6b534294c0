use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::sections::CrossSectionTable;

/// Tip load of the cantilever, in newtons.
pub const CANTILEVER_LOAD: f64 = 5e4;
/// Young's modulus of the cantilever, in pascals.
pub const YOUNG_MODULUS: f64 = 2e11;

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!("x = {x} is outside [0, 1]")))
    }
}

/// Cosine family with 13 levels: levels 1..=9 share a phase shift, 10..=13 do not.
pub fn cosine_fn(x: f64, c: usize) -> Result<f64> {
    check_unit(x)?;
    let cf = c as f64;
    let phase = match c {
        1..=9 => 0.4 * PI + PI / 15.0 * cf - cf / 20.0,
        10..=13 => -cf / 20.0,
        _ => return Err(Error::InvalidPoint(format!("cosine level {c} is outside 1..=13"))),
    };
    Ok((3.5 * PI * x + phase).cos())
}

/// Piecewise toy objective; `c` is the 0-based branch index.
pub fn toy_fn(x: f64, c: usize) -> Result<f64> {
    check_unit(x)?;
    let v = match c {
        0 => (3.6 * PI * (x - 2.0)).cos() + x - 1.0,
        1 => 2.0 * (1.1 * PI * x.exp()).cos() - x / 2.0 + 2.0,
        2 => (2.0 * PI * x).cos() + x / 2.0,
        3 => x * ((3.4 * PI * (x - 1.0)).cos() - (x - 1.0) / 2.0),
        4 => -x * x / 2.0,
        5 => 2.0 * (0.25 * PI * (-x.powi(4)).exp()).cos().powi(2) - x / 2.0 + 1.0,
        6 => x * (3.4 * PI * x).cos() - x / 2.0 + 1.0,
        7 => -x * ((3.5 * PI * x).cos() + x / 2.0) + 2.0,
        8 => -x.powi(5) / 2.0 + 1.0,
        9 => -(2.5 * PI * x).cos().powi(2) * x.sqrt() - 0.5 * (x + 0.5).ln() - 1.3,
        _ => return Err(Error::InvalidPoint(format!("toy branch {c} is outside 0..=9"))),
    };
    Ok(v)
}

/// Tip deflection in meters of a cantilever of length `length` (m) and
/// cross-section area `area` (m²) for section `section` (1..=12) of `table`.
pub fn cantilever_fn(table: &CrossSectionTable, section: usize, length: f64, area: f64) -> Result<f64> {
    if !(10.0..=20.0).contains(&length) {
        return Err(Error::InvalidPoint(format!("L = {length} is outside [10, 20]")));
    }
    if !(1.0..=2.0).contains(&area) {
        return Err(Error::InvalidPoint(format!("S = {area} is outside [1, 2]")));
    }
    let inertia = table.inertia(section)?;
    Ok(deflection(length, area, inertia))
}

pub(crate) fn deflection(length: f64, area: f64, inertia: f64) -> f64 {
    CANTILEVER_LOAD * length.powi(3) / (3.0 * YOUNG_MODULUS * area * area * inertia)
}

/// `√(Σ(ŷᵢ − yᵢ)²/N)`.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    let sse: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / truths.len() as f64).sqrt())
}

/// RMSE relative to the root mean square of the truths, in percent.
pub fn relative_rmse_percent(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    let e = rmse(predictions, truths)?;
    let scale = rmse(&vec![0.0; truths.len()], truths)?;
    if scale == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(100.0 * e / scale)
}

/// `ln(Σ((ŷᵢ − yᵢ)²/σᵢ²)/N)`. Negative values mean the model overstates its
/// uncertainty.
pub fn pva(predictions: &[f64], variances: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(predictions.len(), truths.len())?;
    check_lengths(variances.len(), truths.len())?;
    let mut acc = 0.0;
    for ((p, v), t) in predictions.iter().zip(variances).zip(truths) {
        if !(*v > 0.0) {
            return Err(Error::InvalidArgument(format!("predictive variance {v} is not positive")));
        }
        acc += (p - t).powi(2) / v;
    }
    Ok((acc / truths.len() as f64).ln())
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} predictions for {b} truths")));
    }
    if b == 0 {
        return Err(Error::InvalidArgument("metrics need at least one value".into()));
    }
    Ok(())
}
