//! Mixed design spaces `ℝⁿ × ℤᵐ × 𝔽ˡ`, points, sampling and categorical encodings.
//!
//! A [`DesignSpace`] is an ordered list of variables. A [`MixedPoint`] stores
//! the same variables split by kind: continuous values in `x`, integers in `z`
//! and categorical level indices (1-based) in `c`, each block in the order the
//! variables appear in the space.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt17;
use crate::pls::psi;

/// Default cap on the number of points [`validation_grid`] may produce.
pub const DEFAULT_GRID_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum VariableKind {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: i64, upper: i64 },
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariable", into = "RawVariable")]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawVariable {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<String>>,
}

impl TryFrom<RawVariable> for VariableSpec {
    type Error = Error;

    fn try_from(raw: RawVariable) -> Result<Self> {
        let bounds = || {
            raw.bounds.ok_or_else(|| {
                Error::InvalidSpace(format!("variable '{}' needs \"bounds\"", raw.name))
            })
        };
        let kind = match raw.kind.as_str() {
            "continuous" => {
                let [lower, upper] = bounds()?;
                VariableKind::Continuous { lower, upper }
            }
            "integer" => {
                let [lower, upper] = bounds()?;
                if lower.fract() != 0.0 || upper.fract() != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "integer variable '{}' has fractional bounds",
                        raw.name
                    )));
                }
                VariableKind::Integer {
                    lower: lower as i64,
                    upper: upper as i64,
                }
            }
            "categorical" => VariableKind::Categorical {
                levels: raw.levels.clone().ok_or_else(|| {
                    Error::InvalidSpace(format!("variable '{}' needs \"levels\"", raw.name))
                })?,
            },
            other => {
                return Err(Error::InvalidSpace(format!(
                    "unknown variable type '{other}' for '{}'",
                    raw.name
                )))
            }
        };
        VariableSpec::new(raw.name, kind)
    }
}

impl From<VariableSpec> for RawVariable {
    fn from(spec: VariableSpec) -> Self {
        match spec.kind {
            VariableKind::Continuous { lower, upper } => RawVariable {
                name: spec.name,
                kind: "continuous".into(),
                bounds: Some([lower, upper]),
                levels: None,
            },
            VariableKind::Integer { lower, upper } => RawVariable {
                name: spec.name,
                kind: "integer".into(),
                bounds: Some([lower as f64, upper as f64]),
                levels: None,
            },
            VariableKind::Categorical { levels } => RawVariable {
                name: spec.name,
                kind: "categorical".into(),
                bounds: None,
                levels: Some(levels),
            },
        }
    }
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, kind: VariableKind) -> Result<Self> {
        let name = name.into();
        match &kind {
            VariableKind::Continuous { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::InvalidSpace(format!(
                        "'{name}': need finite lower < upper, got [{lower}, {upper}]"
                    )));
                }
            }
            VariableKind::Integer { lower, upper } => {
                if lower >= upper {
                    return Err(Error::InvalidSpace(format!(
                        "'{name}': need lower < upper, got [{lower}, {upper}]"
                    )));
                }
            }
            VariableKind::Categorical { levels } => {
                if levels.len() < 2 {
                    return Err(Error::InvalidSpace(format!(
                        "'{name}': a categorical variable needs at least 2 levels"
                    )));
                }
                for (i, a) in levels.iter().enumerate() {
                    if levels[i + 1..].contains(a) {
                        return Err(Error::InvalidSpace(format!(
                            "'{name}': duplicate level label '{a}'"
                        )));
                    }
                }
            }
        }
        Ok(Self { name, kind })
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Result<Self> {
        Self::new(name, VariableKind::Continuous { lower, upper })
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Result<Self> {
        Self::new(name, VariableKind::Integer { lower, upper })
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        Self::new(
            name,
            VariableKind::Categorical {
                levels: levels.into_iter().map(Into::into).collect(),
            },
        )
    }

    /// Number of levels of a categorical variable, `None` otherwise.
    pub fn level_count(&self) -> Option<usize> {
        match &self.kind {
            VariableKind::Categorical { levels } => Some(levels.len()),
            _ => None,
        }
    }
}

/// Where a space variable lives inside a [`MixedPoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Continuous(usize),
    Integer(usize),
    Categorical(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct DesignSpace {
    variables: Vec<VariableSpec>,
    slots: Vec<Slot>,
    n_cont: usize,
    n_int: usize,
    n_cat: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    variables: Vec<VariableSpec>,
}

impl TryFrom<RawSpace> for DesignSpace {
    type Error = Error;
    fn try_from(raw: RawSpace) -> Result<Self> {
        DesignSpace::new(raw.variables)
    }
}

impl From<DesignSpace> for RawSpace {
    fn from(space: DesignSpace) -> Self {
        RawSpace {
            variables: space.variables,
        }
    }
}

impl DesignSpace {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidSpace("no variables".into()));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[i + 1..].iter().any(|o| o.name == v.name) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate variable name '{}'",
                    v.name
                )));
            }
            if v.name == "y" {
                return Err(Error::InvalidSpace(
                    "'y' is reserved for the response column".into(),
                ));
            }
        }
        let (mut n_cont, mut n_int, mut n_cat) = (0, 0, 0);
        let slots = variables
            .iter()
            .map(|v| match v.kind {
                VariableKind::Continuous { .. } => {
                    n_cont += 1;
                    Slot::Continuous(n_cont - 1)
                }
                VariableKind::Integer { .. } => {
                    n_int += 1;
                    Slot::Integer(n_int - 1)
                }
                VariableKind::Categorical { .. } => {
                    n_cat += 1;
                    Slot::Categorical(n_cat - 1)
                }
            })
            .collect();
        Ok(Self {
            variables,
            slots,
            n_cont,
            n_int,
            n_cat,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn n_continuous(&self) -> usize {
        self.n_cont
    }

    pub fn n_integer(&self) -> usize {
        self.n_int
    }

    pub fn n_categorical(&self) -> usize {
        self.n_cat
    }

    pub fn variable(&self, name: &str) -> Option<(usize, &VariableSpec)> {
        self.variables.iter().enumerate().find(|(_, v)| v.name == name)
    }

    /// Specs of the continuous variables, in point order.
    pub fn continuous_bounds(&self) -> Vec<(f64, f64)> {
        self.variables
            .iter()
            .filter_map(|v| match v.kind {
                VariableKind::Continuous { lower, upper } => Some((lower, upper)),
                _ => None,
            })
            .collect()
    }

    pub fn integer_bounds(&self) -> Vec<(i64, i64)> {
        self.variables
            .iter()
            .filter_map(|v| match v.kind {
                VariableKind::Integer { lower, upper } => Some((lower, upper)),
                _ => None,
            })
            .collect()
    }

    /// Level counts `L_i` of the categorical variables, in point order.
    pub fn level_counts(&self) -> Vec<usize> {
        self.variables.iter().filter_map(|v| v.level_count()).collect()
    }

    /// `n + m + Σ L_i`, the dimension of the one-hot relaxed space.
    pub fn relaxed_dim(&self) -> usize {
        self.n_cont + self.n_int + self.level_counts().iter().sum::<usize>()
    }

    /// Continuous and integer coordinates min-max scaled to `[0, 1]`.
    pub fn scale_quantitative(&self, w: &MixedPoint) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_cont + self.n_int);
        for (v, (lo, hi)) in w.x.iter().zip(self.continuous_bounds()) {
            out.push((v - lo) / (hi - lo));
        }
        for (v, (lo, hi)) in w.z.iter().zip(self.integer_bounds()) {
            out.push((v - lo) as f64 / (hi - lo) as f64);
        }
        out
    }

    /// Product of the number of integer values and categorical levels.
    pub fn discrete_combination_count(&self) -> u128 {
        let ints: u128 = self
            .integer_bounds()
            .iter()
            .map(|(lo, hi)| (hi - lo + 1) as u128)
            .product();
        let cats: u128 = self.level_counts().iter().map(|&l| l as u128).product();
        ints.saturating_mul(cats)
    }

    /// Level label of categorical variable `cat` (point order) at 1-based `level`.
    pub fn level_label(&self, cat: usize, level: usize) -> Option<&str> {
        self.variables
            .iter()
            .filter_map(|v| match &v.kind {
                VariableKind::Categorical { levels } => Some(levels),
                _ => None,
            })
            .nth(cat)
            .and_then(|levels| levels.get(level.wrapping_sub(1)))
            .map(String::as_str)
    }
}

/// A point `w = (x, z, c)`; `c` holds 1-based level indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MixedPoint {
    pub x: Vec<f64>,
    pub z: Vec<i64>,
    pub c: Vec<usize>,
}

impl MixedPoint {
    pub fn new(x: Vec<f64>, z: Vec<i64>, c: Vec<usize>) -> Self {
        Self { x, z, c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doe {
    pub points: Vec<MixedPoint>,
    #[serde(default)]
    pub responses: Option<Vec<f64>>,
}

impl Doe {
    pub fn new(points: Vec<MixedPoint>, responses: Option<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("a DoE needs at least one point".into()));
        }
        if let Some(y) = &responses {
            if y.len() != points.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} responses for {} points",
                    y.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, responses })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn responses(&self) -> Result<&[f64]> {
        self.responses.as_deref().ok_or(Error::MissingResponses)
    }

    /// Evaluates `f` on every point and stores the responses.
    pub fn evaluate(mut self, f: impl Fn(&MixedPoint) -> f64) -> Self {
        self.responses = Some(self.points.iter().map(f).collect());
        self
    }
}

pub fn validate_point(space: &DesignSpace, w: &MixedPoint) -> Result<()> {
    if w.x.len() != space.n_cont || w.z.len() != space.n_int || w.c.len() != space.n_cat {
        return Err(Error::InvalidPoint(format!(
            "expected ({}, {}, {}) components, got ({}, {}, {})",
            space.n_cont,
            space.n_int,
            space.n_cat,
            w.x.len(),
            w.z.len(),
            w.c.len()
        )));
    }
    for (var, slot) in space.variables.iter().zip(&space.slots) {
        match (&var.kind, *slot) {
            (VariableKind::Continuous { lower, upper }, Slot::Continuous(i)) => {
                let v = w.x[i];
                if !(v >= *lower && v <= *upper) {
                    return Err(Error::InvalidPoint(format!(
                        "'{}' = {v} outside [{lower}, {upper}]",
                        var.name
                    )));
                }
            }
            (VariableKind::Integer { lower, upper }, Slot::Integer(i)) => {
                let v = w.z[i];
                if v < *lower || v > *upper {
                    return Err(Error::InvalidPoint(format!(
                        "'{}' = {v} outside [{lower}, {upper}]",
                        var.name
                    )));
                }
            }
            (VariableKind::Categorical { levels }, Slot::Categorical(i)) => {
                let v = w.c[i];
                if v == 0 || v > levels.len() {
                    return Err(Error::InvalidPoint(format!(
                        "'{}' level index {v} outside 1..={}",
                        var.name,
                        levels.len()
                    )));
                }
            }
            _ => unreachable!("slot table out of sync with variables"),
        }
    }
    Ok(())
}

/// Random-permutation Latin hypercube over every variable.
///
/// Each variable gets its own LHS axis on `[0, 1)`. Continuous coordinates are
/// mapped linearly onto the bounds; integer and categorical coordinates take
/// the bin of that axis value among the admissible values.
pub fn lhs_sample(space: &DesignSpace, n_t: usize, seed: u64) -> Result<Doe> {
    if n_t == 0 {
        return Err(Error::InvalidArgument("LHS needs n_t >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![
        MixedPoint {
            x: vec![0.0; space.n_cont],
            z: vec![0; space.n_int],
            c: vec![0; space.n_cat],
        };
        n_t
    ];
    for (var, slot) in space.variables.iter().zip(&space.slots) {
        let mut strata: Vec<usize> = (0..n_t).collect();
        strata.shuffle(&mut rng);
        for (p, stratum) in points.iter_mut().zip(strata) {
            let u = (stratum as f64 + rng.random::<f64>()) / n_t as f64;
            match (&var.kind, *slot) {
                (VariableKind::Continuous { lower, upper }, Slot::Continuous(i)) => {
                    p.x[i] = (lower + u * (upper - lower)).min(*upper);
                }
                (VariableKind::Integer { lower, upper }, Slot::Integer(i)) => {
                    let count = (upper - lower + 1) as f64;
                    p.z[i] = (lower + (u * count).floor() as i64).min(*upper);
                }
                (VariableKind::Categorical { levels }, Slot::Categorical(i)) => {
                    p.c[i] = ((u * levels.len() as f64).floor() as usize + 1).min(levels.len());
                }
                _ => unreachable!(),
            }
        }
    }
    Doe::new(points, None)
}

/// Continuous values, integers as reals, then one basis vector per categorical.
pub fn one_hot_relax(space: &DesignSpace, w: &MixedPoint) -> Result<Vec<f64>> {
    validate_point(space, w)?;
    let mut out = Vec::with_capacity(space.relaxed_dim());
    out.extend_from_slice(&w.x);
    out.extend(w.z.iter().map(|&z| z as f64));
    for (&level, n_levels) in w.c.iter().zip(space.level_counts()) {
        let start = out.len();
        out.resize(start + n_levels, 0.0);
        out[start + level - 1] = 1.0;
    }
    Ok(out)
}

/// Pair-relaxed encoding of `level` among `n_levels`: one entry per unordered
/// level pair (in [`psi`] order), set to 1 for the `n_levels - 1` pairs that
/// contain `level`.
pub fn zeta_encode(n_levels: usize, level: usize) -> Result<Vec<f64>> {
    if n_levels < 2 || level == 0 || level > n_levels {
        return Err(Error::InvalidArgument(format!(
            "level {level} invalid for {n_levels} levels"
        )));
    }
    let mut out = vec![0.0; n_levels * (n_levels - 1) / 2];
    for other in (1..=n_levels).filter(|&o| o != level) {
        let (a, b) = (level.min(other), level.max(other));
        out[psi(a, b, n_levels)? - 1] = 1.0;
    }
    Ok(out)
}

pub fn zeta_hadamard(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "zeta vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(u, v)| u * v).collect())
}

/// Cartesian grid: `resolution` evenly spaced values per continuous axis
/// (endpoints included), every integer value and every categorical level.
/// The last variable varies fastest.
pub fn validation_grid(space: &DesignSpace, resolution: usize, cap: usize) -> Result<Doe> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be >= 2".into()));
    }
    let axes: Vec<usize> = space
        .variables
        .iter()
        .map(|v| match &v.kind {
            VariableKind::Continuous { .. } => resolution,
            VariableKind::Integer { lower, upper } => (upper - lower + 1) as usize,
            VariableKind::Categorical { levels } => levels.len(),
        })
        .collect();
    let size = axes
        .iter()
        .fold(1u128, |acc, &a| acc.saturating_mul(a as u128));
    if size > cap as u128 {
        return Err(Error::GridTooLarge { size, cap });
    }
    let size = size as usize;
    let mut points = Vec::with_capacity(size);
    let mut index = vec![0usize; axes.len()];
    for _ in 0..size {
        let mut p = MixedPoint {
            x: vec![0.0; space.n_cont],
            z: vec![0; space.n_int],
            c: vec![0; space.n_cat],
        };
        for ((var, slot), &k) in space.variables.iter().zip(&space.slots).zip(&index) {
            match (&var.kind, *slot) {
                (VariableKind::Continuous { lower, upper }, Slot::Continuous(i)) => {
                    let t = k as f64 / (resolution - 1) as f64;
                    p.x[i] = if k + 1 == resolution {
                        *upper
                    } else {
                        lower + t * (upper - lower)
                    };
                }
                (VariableKind::Integer { lower, .. }, Slot::Integer(i)) => {
                    p.z[i] = lower + k as i64;
                }
                (VariableKind::Categorical { .. }, Slot::Categorical(i)) => p.c[i] = k + 1,
                _ => unreachable!(),
            }
        }
        points.push(p);
        for d in (0..axes.len()).rev() {
            index[d] += 1;
            if index[d] < axes[d] {
                break;
            }
            index[d] = 0;
        }
    }
    Doe::new(points, None)
}

/// Writes a DoE as CSV: one column per variable (categoricals as labels) and
/// a final `y` column when responses are present.
pub fn write_doe_csv<W: Write>(space: &DesignSpace, doe: &Doe, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = space.variables.iter().map(|v| v.name.as_str()).collect();
    if doe.responses.is_some() {
        header.push("y");
    }
    wtr.write_record(&header)?;
    for (r, p) in doe.points.iter().enumerate() {
        let mut row = point_to_record(space, p);
        if let Some(y) = &doe.responses {
            row.push(fmt17(y[r]));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn point_to_record(space: &DesignSpace, p: &MixedPoint) -> Vec<String> {
    space
        .slots
        .iter()
        .map(|slot| match *slot {
            Slot::Continuous(i) => fmt17(p.x[i]),
            Slot::Integer(i) => p.z[i].to_string(),
            Slot::Categorical(i) => space
                .level_label(i, p.c[i])
                .map(str::to_owned)
                .unwrap_or_else(|| p.c[i].to_string()),
        })
        .collect()
}

/// Reads a DoE CSV. Columns are matched to variables by header name; a `y`
/// column, when present, provides the responses.
pub fn read_doe_csv<R: Read>(space: &DesignSpace, input: R) -> Result<Doe> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let columns = space
        .variables
        .iter()
        .map(|v| {
            column(&v.name)
                .ok_or_else(|| Error::InvalidArgument(format!("missing column '{}'", v.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    let y_col = column("y");

    let mut points = Vec::new();
    let mut ys = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let field = |c: usize| {
            record.get(c).ok_or_else(|| {
                Error::InvalidArgument(format!("row {}: missing field {c}", line + 1))
            })
        };
        let mut p = MixedPoint {
            x: vec![0.0; space.n_cont],
            z: vec![0; space.n_int],
            c: vec![0; space.n_cat],
        };
        for ((var, slot), &col) in space.variables.iter().zip(&space.slots).zip(&columns) {
            let raw = field(col)?;
            let bad = || {
                Error::InvalidArgument(format!(
                    "row {}: cannot parse '{raw}' for '{}'",
                    line + 1,
                    var.name
                ))
            };
            match (&var.kind, *slot) {
                (VariableKind::Continuous { .. }, Slot::Continuous(i)) => {
                    p.x[i] = raw.parse().map_err(|_| bad())?
                }
                (VariableKind::Integer { .. }, Slot::Integer(i)) => {
                    p.z[i] = raw
                        .parse::<i64>()
                        .or_else(|_| {
                            raw.parse::<f64>()
                                .ok()
                                .filter(|v| v.fract() == 0.0)
                                .map(|v| v as i64)
                                .ok_or(())
                        })
                        .map_err(|_| bad())?
                }
                (VariableKind::Categorical { levels }, Slot::Categorical(i)) => {
                    p.c[i] = levels.iter().position(|l| l == raw).ok_or_else(bad)? + 1
                }
                _ => unreachable!(),
            }
        }
        validate_point(space, &p)
            .map_err(|e| Error::InvalidPoint(format!("row {}: {e}", line + 1)))?;
        if let Some(c) = y_col {
            let raw = field(c)?;
            ys.push(raw.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("row {}: cannot parse y '{raw}'", line + 1))
            })?);
        }
        points.push(p);
    }
    Doe::new(points, y_col.map(|_| ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DesignSpace {
        DesignSpace::new(vec![VariableSpec::continuous("x", 0.0, 1.0).unwrap()]).unwrap()
    }

    fn cosine_like() -> DesignSpace {
        DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).unwrap(),
            VariableSpec::categorical("c", (1..=13).map(|i| i.to_string())).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn validate_point_bounds() {
        let s = unit();
        assert!(validate_point(&s, &MixedPoint::new(vec![0.5], vec![], vec![])).is_ok());
        assert!(validate_point(&s, &MixedPoint::new(vec![1.5], vec![], vec![])).is_err());
        let cat = DesignSpace::new(vec![VariableSpec::categorical(
            "c",
            (1..=13).map(|i| i.to_string()),
        )
        .unwrap()])
        .unwrap();
        assert!(validate_point(&cat, &MixedPoint::new(vec![], vec![], vec![13])).is_ok());
        assert!(validate_point(&cat, &MixedPoint::new(vec![], vec![], vec![14])).is_err());
        assert!(validate_point(&cat, &MixedPoint::new(vec![], vec![], vec![0])).is_err());
    }

    #[test]
    fn spec_invariants() {
        assert!(VariableSpec::continuous("x", 1.0, 1.0).is_err());
        assert!(VariableSpec::integer("z", 3, 2).is_err());
        assert!(VariableSpec::categorical("c", ["a"]).is_err());
        assert!(VariableSpec::categorical("c", ["a", "a"]).is_err());
        assert!(DesignSpace::new(vec![]).is_err());
        let s = cosine_like();
        assert_eq!(s.relaxed_dim(), 14);
        assert_eq!((s.n_continuous(), s.n_integer(), s.n_categorical()), (1, 0, 1));
    }

    #[test]
    fn lhs_one_point_per_stratum() {
        let doe = lhs_sample(&unit(), 5, 7).unwrap();
        let mut strata: Vec<usize> = doe
            .points
            .iter()
            .map(|p| (p.x[0] * 5.0).floor() as usize)
            .collect();
        strata.sort();
        assert_eq!(strata, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn lhs_cosine_98_valid_and_deterministic() {
        let s = cosine_like();
        let a = lhs_sample(&s, 98, 3).unwrap();
        assert_eq!(a.len(), 98);
        for p in &a.points {
            validate_point(&s, p).unwrap();
        }
        assert_eq!(a, lhs_sample(&s, 98, 3).unwrap());
        assert_ne!(a, lhs_sample(&s, 98, 4).unwrap());
        assert!(lhs_sample(&s, 0, 3).is_err());
    }

    #[test]
    fn one_hot_examples() {
        let s = DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).unwrap(),
            VariableSpec::categorical("c", ["a", "b", "c"]).unwrap(),
        ])
        .unwrap();
        let w = MixedPoint::new(vec![0.3], vec![], vec![2]);
        assert_eq!(one_hot_relax(&s, &w).unwrap(), vec![0.3, 0.0, 1.0, 0.0]);

        let s2 = DesignSpace::new(vec![VariableSpec::categorical("c", ["a", "b"]).unwrap()])
            .unwrap();
        assert_eq!(
            one_hot_relax(&s2, &MixedPoint::new(vec![], vec![], vec![1])).unwrap(),
            vec![1.0, 0.0]
        );

        let s3 = DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).unwrap(),
            VariableSpec::integer("z", 0, 10).unwrap(),
            VariableSpec::categorical("c", ["a", "b", "c"]).unwrap(),
        ])
        .unwrap();
        let w = MixedPoint::new(vec![0.0], vec![4], vec![3]);
        assert_eq!(
            one_hot_relax(&s3, &w).unwrap(),
            vec![0.0, 4.0, 0.0, 0.0, 1.0]
        );
        assert!(one_hot_relax(&s3, &MixedPoint::new(vec![2.0], vec![4], vec![3])).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_encode(2, 1).unwrap(), vec![1.0]);
        // pairs (1,2),(1,3),(1,4),(2,3),(2,4),(3,4): those containing 3
        assert_eq!(
            zeta_encode(4, 3).unwrap(),
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]
        );
        assert!(zeta_encode(4, 5).is_err());
        assert!(zeta_encode(1, 1).is_err());
    }

    #[test]
    fn zeta_color_example() {
        // Levels ordered so that "blue" comes first and "red" second reproduces
        // the illustrated pair order (blue-red, blue-green, blue-yellow,
        // red-green, red-yellow, green-yellow) under lexicographic indexing.
        let blue = zeta_encode(4, 1).unwrap();
        let red = zeta_encode(4, 2).unwrap();
        assert_eq!(blue, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(red, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(
            zeta_hadamard(&blue, &red).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn zeta_hadamard_cases() {
        let a = zeta_encode(5, 2).unwrap();
        assert_eq!(zeta_hadamard(&a, &a).unwrap(), a);
        let one = zeta_encode(3, 1).unwrap();
        let two = zeta_encode(3, 2).unwrap();
        assert_eq!(zeta_hadamard(&one, &two).unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(zeta_hadamard(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zeta_exhaustive() {
        for l in 2..=13 {
            for a in 1..=l {
                let za = zeta_encode(l, a).unwrap();
                assert_eq!(za.iter().sum::<f64>() as usize, l - 1);
                for b in (1..=l).filter(|&b| b != a) {
                    let h = zeta_hadamard(&za, &zeta_encode(l, b).unwrap()).unwrap();
                    let ones: Vec<usize> = (0..h.len()).filter(|&i| h[i] == 1.0).collect();
                    assert_eq!(ones, vec![psi(a.min(b), a.max(b), l).unwrap() - 1]);
                }
            }
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(
            validation_grid(&cosine_like(), 1000, DEFAULT_GRID_CAP)
                .unwrap()
                .len(),
            13000
        );
        let g = validation_grid(&unit(), 2, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(g.points[0].x, vec![0.0]);
        assert_eq!(g.points[1].x, vec![1.0]);
        assert!(matches!(
            validation_grid(&cosine_like(), 1000, 100),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(validation_grid(&unit(), 1, 10).is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"variables":[
            {"name":"x","type":"continuous","bounds":[0,1]},
            {"name":"n","type":"integer","bounds":[1,4]},
            {"name":"c","type":"categorical","levels":["a","b","c"]}]}"#;
        let s = DesignSpace::from_json(text).unwrap();
        assert_eq!(s.relaxed_dim(), 5);
        let back = DesignSpace::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        assert!(DesignSpace::from_json(
            r#"{"variables":[{"name":"x","type":"continuous","bounds":[1,0]}]}"#
        )
        .is_err());
        assert!(DesignSpace::from_json(r#"{"variables":[{"name":"x","type":"foo"}]}"#).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = DesignSpace::new(vec![
            VariableSpec::continuous("x", 0.0, 1.0).unwrap(),
            VariableSpec::integer("n", -2, 3).unwrap(),
            VariableSpec::categorical("shape", ["square", "circle"]).unwrap(),
        ])
        .unwrap();
        let doe = lhs_sample(&s, 7, 1)
            .unwrap()
            .evaluate(|p| p.x[0] + p.z[0] as f64 * p.c[0] as f64);
        let mut buf = Vec::new();
        write_doe_csv(&s, &doe, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,n,shape,y\n"));
        assert_eq!(read_doe_csv(&s, buf.as_slice()).unwrap(), doe);

        let no_y = "x,n,shape\n0.5,1,circle\n";
        let d = read_doe_csv(&s, no_y.as_bytes()).unwrap();
        assert!(d.responses.is_none());
        assert_eq!(d.points[0], MixedPoint::new(vec![0.5], vec![1], vec![2]));
        assert!(read_doe_csv(&s, "x,n,shape\n0.5,1,hexagon\n".as_bytes()).is_err());
        assert!(read_doe_csv(&s, "x,n\n0.5,1\n".as_bytes()).is_err());
    }
}
