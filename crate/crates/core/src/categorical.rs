//! Homogeneous categorical kernels: GD, CR, EHH, HH and their PLS-reduced
//! EHH/HH variants, evaluated level-wise.
//!
//! Every kernel yields an `L × L` level-correlation matrix `R_i`; the
//! correlation between two points on categorical variable `i` is the entry of
//! `R_i` at their levels.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt17;
use crate::pls::{pair_count, psi, MatrixPlsRotation, ReducedThetaHat};

/// Smallest correlation value reachable by the exponential kernels.
pub const EPSILON: f64 = 2.06e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersphereAngles {
    levels: usize,
    angles: Vec<f64>,
}

impl HypersphereAngles {
    pub fn new(levels: usize, angles: Vec<f64>) -> Result<Self> {
        if levels < 2 || angles.len() != pair_count(levels) {
            return Err(Error::DimensionMismatch(format!(
                "{} angles for {levels} levels (need {})",
                angles.len(),
                pair_count(levels)
            )));
        }
        if let Some(a) = angles.iter().find(|a| !(0.0..=PI).contains(*a)) {
            return Err(Error::InvalidArgument(format!("angle {a} outside [0, pi]")));
        }
        Ok(Self { levels, angles })
    }

    /// All angles at `π/2`: uncorrelated levels.
    pub fn orthogonal(levels: usize) -> Self {
        Self {
            levels,
            angles: vec![PI / 2.0; pair_count(levels)],
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Lower-triangular `C` with unit-norm rows; row `k` (1-based, `k ≥ 2`) is the
/// hyperspherical point of the next `k - 1` angles.
pub fn hypersphere_factor(a: &HypersphereAngles) -> DMatrix<f64> {
    let l = a.levels;
    let mut c = DMatrix::zeros(l, l);
    c[(0, 0)] = 1.0;
    let mut offset = 0;
    for k in 1..l {
        let row = &a.angles[offset..offset + k];
        let mut sin_prod = 1.0;
        for (i, angle) in row.iter().enumerate() {
            c[(k, i)] = sin_prod * angle.cos();
            sin_prod *= angle.sin();
        }
        c[(k, k)] = sin_prod;
        offset += k;
    }
    c
}

fn gram(a: &HypersphereAngles) -> DMatrix<f64> {
    let c = hypersphere_factor(a);
    let mut g = &c * c.transpose();
    g.fill_diagonal(1.0);
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CategoricalKernelParam {
    Gd {
        levels: usize,
        theta: f64,
    },
    Cr {
        diag: Vec<f64>,
    },
    Ehh {
        angles: HypersphereAngles,
        epsilon: f64,
    },
    Hh {
        angles: HypersphereAngles,
    },
    EhhPls {
        reduced: HypersphereAngles,
        rotation: MatrixPlsRotation,
        epsilon: f64,
    },
    HhPls {
        reduced: HypersphereAngles,
        rotation: MatrixPlsRotation,
    },
}

impl CategoricalKernelParam {
    pub fn levels(&self) -> usize {
        match self {
            Self::Gd { levels, .. } => *levels,
            Self::Cr { diag } => diag.len(),
            Self::Ehh { angles, .. } | Self::Hh { angles } => angles.levels,
            Self::EhhPls { rotation, .. } | Self::HhPls { rotation, .. } => rotation.levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_eps = |e: f64| {
            if e > 0.0 && e < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("epsilon {e} outside (0, 1)")))
            }
        };
        match self {
            Self::Gd { levels, theta } => {
                if *levels < 2 || !(*theta >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "GD needs L >= 2 and theta >= 0, got L={levels}, theta={theta}"
                    )));
                }
            }
            Self::Cr { diag } => {
                if diag.len() < 2 || diag.iter().any(|d| !(*d >= 0.0)) {
                    return Err(Error::InvalidArgument(
                        "CR needs >= 2 nonnegative diagonal entries".into(),
                    ));
                }
            }
            Self::Ehh { epsilon, .. } => check_eps(*epsilon)?,
            Self::Hh { .. } => {}
            Self::EhhPls {
                reduced,
                rotation,
                epsilon,
            } => {
                check_eps(*epsilon)?;
                check_pls(reduced, rotation)?;
            }
            Self::HhPls { reduced, rotation } => check_pls(reduced, rotation)?,
        }
        Ok(())
    }
}

fn check_pls(reduced: &HypersphereAngles, rotation: &MatrixPlsRotation) -> Result<()> {
    if reduced.levels != rotation.reduced_levels || reduced.levels >= rotation.levels {
        return Err(Error::DimensionMismatch(format!(
            "reduced matrix of {} levels for a rotation from {} to {} levels",
            reduced.levels, rotation.levels, rotation.reduced_levels
        )));
    }
    Ok(())
}

fn check_levels(levels: usize, r: usize, s: usize) -> Result<()> {
    if r == 0 || s == 0 || r > levels || s > levels {
        return Err(Error::InvalidArgument(format!(
            "levels ({r}, {s}) outside 1..={levels}"
        )));
    }
    Ok(())
}

/// Correlation between levels `r` and `s` (1-based) of one categorical
/// variable; 1 when `r == s`.
pub fn level_correlation(p: &CategoricalKernelParam, r: usize, s: usize) -> Result<f64> {
    p.validate()?;
    check_levels(p.levels(), r, s)?;
    if r == s {
        return Ok(1.0);
    }
    Ok(match p {
        CategoricalKernelParam::Gd { theta, .. } => (-theta).exp(),
        CategoricalKernelParam::Cr { diag } => (-diag[r - 1] - diag[s - 1]).exp(),
        CategoricalKernelParam::Ehh { angles, epsilon } => {
            let rho = row_dot(angles, r, s);
            epsilon.powf(1.0 - rho)
        }
        CategoricalKernelParam::Hh { angles } => row_dot(angles, r, s),
        CategoricalKernelParam::EhhPls { .. } | CategoricalKernelParam::HhPls { .. } => {
            return level_correlation_pls(p, r, s)
        }
    })
}

fn row_dot(angles: &HypersphereAngles, r: usize, s: usize) -> f64 {
    let c = hypersphere_factor(angles);
    c.row(r - 1).dot(&c.row(s - 1))
}

/// Level correlation of the PLS-reduced kernels: `Φ` is the squared-rotation
/// weighted sum over the reduced matrix entries; HH-PLS returns `Φ`, EHH-PLS
/// returns `exp(-2Φ)`. This is the raw reconstruction; [`build_level_matrix`]
/// additionally repairs an indefinite result.
pub fn level_correlation_pls(p: &CategoricalKernelParam, r: usize, s: usize) -> Result<f64> {
    let (reduced, rotation) = match p {
        CategoricalKernelParam::EhhPls {
            reduced, rotation, ..
        }
        | CategoricalKernelParam::HhPls { reduced, rotation } => (reduced, rotation),
        _ => {
            return Err(Error::InvalidArgument(
                "level_correlation_pls needs an EHH-PLS or HH-PLS parameter".into(),
            ))
        }
    };
    check_pls(reduced, rotation)?;
    check_levels(rotation.levels, r, s)?;
    if r == s {
        return Ok(1.0);
    }
    let rho_hat = ReducedThetaHat::from_angles(reduced).upper_entries();
    let row = rotation
        .rotation
        .row(psi(r.min(s), r.max(s), rotation.levels)? - 1);
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        row.iter()
            .zip(&rho_hat)
            .map(|(g, rho)| g * g * f(*rho))
            .sum()
    };
    Ok(match p {
        CategoricalKernelParam::HhPls { .. } => weighted(&|rho| rho),
        CategoricalKernelParam::EhhPls { epsilon, .. } => {
            let half_log = epsilon.ln() / 2.0;
            (-2.0 * weighted(&|rho| half_log * (rho - 1.0))).exp()
        }
        _ => unreachable!(),
    })
}

/// Eigenvalues of a reconstructed PLS level matrix below `-NEGATIVE_EIGEN_TOL`
/// are treated as genuinely negative rather than round-off.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-12;

/// Symmetric `L × L` level-correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCorrelationMatrix(DMatrix<f64>);

impl LevelCorrelationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn levels(&self) -> usize {
        self.0.nrows()
    }

    /// Entry at 1-based levels.
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.0[(r - 1, s - 1)]
    }

    pub(crate) fn from_upper(levels: usize, upper: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::identity(levels, levels);
        for j in 0..levels {
            for k in j + 1..levels {
                let v = upper(j, k);
                m[(j, k)] = v;
                m[(k, j)] = v;
            }
        }
        Self(m)
    }

    /// Reconstructed PLS matrices need not be positive semi-definite. A
    /// negative smallest eigenvalue `λ` is lifted to zero by adding `τ = -λ`
    /// to the diagonal, then the result is rescaled by `1/(1+τ)` to keep a
    /// unit diagonal and entries in `[-1, 1]`.
    /// Returns the repaired matrix and the shift `τ`, zero when no repair was needed.
    fn repaired(self) -> (Self, f64) {
        let lambda_min = self.0.clone().symmetric_eigenvalues().min();
        if lambda_min >= -NEGATIVE_EIGEN_TOL {
            return (self, 0.0);
        }
        let tau = -lambda_min;
        let n = self.0.nrows();
        let mut m = (self.0 + DMatrix::identity(n, n) * tau) / (1.0 + tau);
        m.fill_diagonal(1.0);
        (Self(m), tau)
    }

    /// Writes the matrix as headerless CSV, one row per level.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.0.row_iter() {
            wtr.write_record(row.iter().map(|v| fmt17(*v)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn build_level_matrix(p: &CategoricalKernelParam) -> Result<LevelCorrelationMatrix> {
    build_level_matrix_with_shift(p).map(|(m, _)| m)
}

/// Like [`build_level_matrix`], also returning the diagonal shift applied to
/// repair an indefinite PLS reconstruction (zero for every other kind).
pub fn build_level_matrix_with_shift(p: &CategoricalKernelParam) -> Result<(LevelCorrelationMatrix, f64)> {
    p.validate()?;
    let l = p.levels();
    Ok(match p {
        CategoricalKernelParam::Gd { theta, .. } => {
            let v = (-theta).exp();
            (LevelCorrelationMatrix::from_upper(l, |_, _| v), 0.0)
        }
        CategoricalKernelParam::Cr { diag } => {
            (LevelCorrelationMatrix::from_upper(l, |j, k| (-diag[j] - diag[k]).exp()), 0.0)
        }
        CategoricalKernelParam::Ehh { angles, epsilon } => {
            let g = gram(angles);
            (LevelCorrelationMatrix::from_upper(l, |j, k| epsilon.powf(1.0 - g[(j, k)])), 0.0)
        }
        CategoricalKernelParam::Hh { angles } => {
            let g = gram(angles);
            (LevelCorrelationMatrix::from_upper(l, |j, k| g[(j, k)]), 0.0)
        }
        CategoricalKernelParam::HhPls { reduced, rotation } => {
            let sums = rotation.weighted_pair_sums(&ReducedThetaHat::from_angles(reduced).upper_entries())?;
            LevelCorrelationMatrix::from_upper(l, |j, k| sums[pair_index(j, k, l)]).repaired()
        }
        CategoricalKernelParam::EhhPls {
            reduced,
            rotation,
            epsilon,
        } => {
            let half_log = epsilon.ln() / 2.0;
            let phi_hat: Vec<f64> = ReducedThetaHat::from_angles(reduced)
                .upper_entries()
                .iter()
                .map(|rho| half_log * (rho - 1.0))
                .collect();
            let sums = rotation.weighted_pair_sums(&phi_hat)?;
            LevelCorrelationMatrix::from_upper(l, |j, k| (-2.0 * sums[pair_index(j, k, l)]).exp()).repaired()
        }
    })
}

/// 0-based position of the pair `(j, k)`, `j < k` 0-based, in psi order.
fn pair_index(j: usize, k: usize, levels: usize) -> usize {
    j * (2 * levels - j - 1) / 2 + (k - j - 1)
}
