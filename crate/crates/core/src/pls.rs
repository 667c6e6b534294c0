//! Partial least squares for vector inputs and its matrix-input extension.
//!
//! [`pls_fit`] is single-response NIPALS. The continuous KPLS kernel collapses
//! per-component length scales back onto the input dimensions through the
//! squared rotation ([`collapse_continuous_theta`]). For a categorical
//! variable, [`matrix_pls_fit`] runs the same regression on pair-relaxed
//! (zeta) encodings so that an `L × L` level-correlation matrix can be
//! rebuilt from a small `ℓ × ℓ` one ([`reconstruct_theta`]).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::categorical::{hypersphere_factor, HypersphereAngles};
use crate::error::{Error, Result};

/// Lexicographic index (1-based) of the strict upper-triangular entry
/// `(k, k2)` of an `n_lev × n_lev` matrix.
pub fn psi(k: usize, k2: usize, n_lev: usize) -> Result<usize> {
    if k == 0 || k >= k2 || k2 > n_lev {
        return Err(Error::InvalidArgument(format!(
            "psi needs 1 <= k < k' <= n, got ({k}, {k2}, {n_lev})"
        )));
    }
    let full = (n_lev - 1) * (n_lev - 2);
    let tail = (n_lev - k) * (n_lev - k - 1);
    Ok((full - tail) / 2 + k2 - 1)
}

/// Number of strict upper-triangular entries of an `n × n` matrix.
pub fn pair_count(n_levels: usize) -> usize {
    n_levels * n_levels.saturating_sub(1) / 2
}

/// Inverse of [`pair_count`], if `pairs` is a triangular number.
pub fn levels_from_pairs(pairs: usize) -> Option<usize> {
    (2..=pairs + 1).find(|&l| pair_count(l) == pairs)
}

/// Pairs `(j, j')`, `j < j'`, 1-based, in [`psi`] order.
pub fn pairs(n_levels: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n_levels).flat_map(move |j| (j + 1..=n_levels).map(move |j2| (j, j2)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsProjection {
    /// `G`, one unit-norm weight vector per column (`p × d`).
    pub weights: DMatrix<f64>,
    /// `Ξ` (`p × d`).
    pub loadings: DMatrix<f64>,
    /// `G* = G (Ξᵀ G)⁻¹` (`p × d`).
    pub rotation: DMatrix<f64>,
    /// Frobenius norm of the centered input residual before each deflation
    /// and after the last one (`d + 1` entries).
    pub x_residual_norms: Vec<f64>,
}

impl PlsProjection {
    pub fn n_components(&self) -> usize {
        self.weights.ncols()
    }
}

/// Single-response PLS with `d` components on mean-centered data.
pub fn pls_fit(x: &DMatrix<f64>, y: &[f64], d: usize) -> Result<PlsProjection> {
    let (n_t, p) = x.shape();
    if y.len() != n_t {
        return Err(Error::DimensionMismatch(format!(
            "{n_t} input rows but {} responses",
            y.len()
        )));
    }
    if d == 0 || d > p || d + 1 > n_t {
        return Err(Error::InvalidArgument(format!(
            "PLS needs 1 <= d <= min(p, n_t - 1); got d={d}, p={p}, n_t={n_t}"
        )));
    }
    let mut xr = x.clone();
    for mut col in xr.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let y_mean = y.iter().sum::<f64>() / n_t as f64;
    let mut yr = DVector::from_iterator(n_t, y.iter().map(|v| v - y_mean));
    let y_norm = yr.norm();
    if y_norm <= f64::EPSILON * (1.0 + y_mean.abs()) * (n_t as f64).sqrt() {
        return Err(Error::ZeroVariance);
    }
    let tol = 1e-10 * xr.norm().max(f64::MIN_POSITIVE) * y_norm;

    let mut weights = DMatrix::zeros(p, d);
    let mut loadings = DMatrix::zeros(p, d);
    let mut residuals = vec![xr.norm()];
    for t in 0..d {
        let cross = xr.tr_mul(&yr);
        let norm = cross.norm();
        if !(norm > tol) {
            return Err(Error::RankDeficient {
                requested: d,
                achieved: t,
            });
        }
        let mut g = cross / norm;
        let pivot = g.iamax();
        if g[pivot] < 0.0 {
            g.neg_mut();
        }
        let h = &xr * &g;
        let hh = h.norm_squared();
        let xi = xr.tr_mul(&h) / hh;
        let gamma = yr.dot(&h) / hh;
        xr -= &h * xi.transpose();
        yr.axpy(-gamma, &h, 1.0);
        weights.set_column(t, &g);
        loadings.set_column(t, &xi);
        residuals.push(xr.norm());
    }
    let inner = loadings.tr_mul(&weights);
    let inv = inner.try_inverse().ok_or(Error::RankDeficient {
        requested: d,
        achieved: d - 1,
    })?;
    let rotation = &weights * inv;
    Ok(PlsProjection {
        weights,
        loadings,
        rotation,
        x_residual_norms: residuals,
    })
}

/// `θ_j = Σ_t ([G*]_j^t)² θ̂_t`: per-dimension squared-exponential length
/// scales equivalent to the product kernel over the rotated coordinates.
pub fn collapse_continuous_theta(proj: &PlsProjection, theta_hat: &[f64]) -> Result<Vec<f64>> {
    collapse_with(&proj.rotation, theta_hat, |g| g * g)
}

/// Absolute-exponential counterpart of [`collapse_continuous_theta`]:
/// `θ_j = Σ_t |[G*]_j^t| θ̂_t`.
pub fn collapse_continuous_theta_abs(
    proj: &PlsProjection,
    theta_hat: &[f64],
) -> Result<Vec<f64>> {
    collapse_with(&proj.rotation, theta_hat, f64::abs)
}

fn collapse_with(
    rotation: &DMatrix<f64>,
    theta_hat: &[f64],
    weight: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    if theta_hat.len() != rotation.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} reduced hyperparameters for {} components",
            theta_hat.len(),
            rotation.ncols()
        )));
    }
    if let Some(bad) = theta_hat.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "reduced hyperparameters must be nonnegative, got {bad}"
        )));
    }
    Ok(rotation
        .row_iter()
        .map(|row| {
            row.iter()
                .zip(theta_hat)
                .map(|(g, t)| weight(*g) * t)
                .sum()
        })
        .collect())
}

/// Rotation from pair-relaxed categorical data (`D_in × D_out`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPlsRotation {
    pub rotation: DMatrix<f64>,
    pub levels: usize,
    pub reduced_levels: usize,
    pub row_normalized: bool,
}

impl MatrixPlsRotation {
    /// Wraps a rotation, checking `D_in = L(L-1)/2` and `D_out = ℓ(ℓ-1)/2`.
    pub fn new(
        rotation: DMatrix<f64>,
        levels: usize,
        reduced_levels: usize,
        row_normalized: bool,
    ) -> Result<Self> {
        if rotation.nrows() != pair_count(levels) || rotation.ncols() != pair_count(reduced_levels)
        {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}x{}, expected {}x{} for L={levels}, l={reduced_levels}",
                rotation.nrows(),
                rotation.ncols(),
                pair_count(levels),
                pair_count(reduced_levels)
            )));
        }
        let mut rot = Self {
            rotation,
            levels,
            reduced_levels,
            row_normalized: false,
        };
        if row_normalized {
            rot.normalize_rows();
        }
        Ok(rot)
    }

    /// Scales each row to unit norm; zero rows stay zero.
    pub fn normalize_rows(&mut self) {
        let largest = self
            .rotation
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max);
        let floor = 1e-12 * largest;
        for mut row in self.rotation.row_iter_mut() {
            let n = row.norm();
            if n > floor && n > 0.0 {
                row /= n;
            } else {
                row.fill(0.0);
            }
        }
        self.row_normalized = true;
    }

    /// `out[ψ(j,j',L)] = Σ_o ([G*]_{ψ(j,j',L)}^o)² values[o]`, one entry per
    /// level pair of the full matrix.
    pub fn weighted_pair_sums(&self, reduced_values: &[f64]) -> Result<Vec<f64>> {
        if reduced_values.len() != self.rotation.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} reduced entries for {} rotation columns",
                reduced_values.len(),
                self.rotation.ncols()
            )));
        }
        Ok(self
            .rotation
            .row_iter()
            .map(|row| {
                row.iter()
                    .zip(reduced_values)
                    .map(|(g, v)| g * g * v)
                    .sum()
            })
            .collect())
    }
}

/// PLS with `ℓ(ℓ-1)/2` components on zeta-encoded data, rows of `G*` then
/// normalized to unit length.
pub fn matrix_pls_fit(
    zeta_doe: &DMatrix<f64>,
    y: &[f64],
    reduced_levels: usize,
) -> Result<MatrixPlsRotation> {
    let d_in = zeta_doe.ncols();
    let levels = levels_from_pairs(d_in).ok_or_else(|| {
        Error::DimensionMismatch(format!("{d_in} columns is not L(L-1)/2 for any L"))
    })?;
    let d_out = pair_count(reduced_levels);
    if reduced_levels < 2 || d_out > d_in {
        return Err(Error::InvalidArgument(format!(
            "reduced level count {reduced_levels} invalid for L={levels}"
        )));
    }
    let proj = pls_fit(zeta_doe, y, d_out)?;
    MatrixPlsRotation::new(proj.rotation, levels, reduced_levels, true)
}

/// Symmetric `ℓ × ℓ` matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedThetaHat(DMatrix<f64>);

impl ReducedThetaHat {
    /// `C Cᵀ` of the hypersphere factor of `angles`.
    pub fn from_angles(angles: &HypersphereAngles) -> Self {
        let c = hypersphere_factor(angles);
        let mut m = &c * c.transpose();
        m.fill_diagonal(1.0);
        Self(m)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("reduced matrix not square".into()));
        }
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)] != 1.0 {
                return Err(Error::InvalidArgument("diagonal must be 1".into()));
            }
            for j in 0..n {
                let v = m[(i, j)];
                if v != m[(j, i)] || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i},{j}) = {v} breaks symmetry or [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn levels(&self) -> usize {
        self.0.nrows()
    }

    /// Strict upper-triangular entries in [`psi`] order.
    pub fn upper_entries(&self) -> Vec<f64> {
        pairs(self.levels())
            .map(|(t, t2)| self.0[(t - 1, t2 - 1)])
            .collect()
    }
}

/// Rebuilds the full `L × L` matrix from the reduced one:
/// `[Θ]_j^{j'} = Σ_{t<t'} ([G*]_{ψ(j,j',L)}^{ψ(t,t',ℓ)})² [Θ̂]_t^{t'}`.
pub fn reconstruct_theta(
    rot: &MatrixPlsRotation,
    reduced: &ReducedThetaHat,
    levels: usize,
) -> Result<DMatrix<f64>> {
    if !rot.row_normalized {
        return Err(Error::InvalidArgument(
            "reconstruction needs a row-normalized rotation".into(),
        ));
    }
    if levels != rot.levels || reduced.levels() != rot.reduced_levels {
        return Err(Error::DimensionMismatch(format!(
            "rotation is for (L={}, l={}), got (L={levels}, l={})",
            rot.levels,
            rot.reduced_levels,
            reduced.levels()
        )));
    }
    let sums = rot.weighted_pair_sums(&reduced.upper_entries())?;
    let mut theta = DMatrix::identity(levels, levels);
    for ((j, j2), v) in pairs(levels).zip(sums) {
        theta[(j - 1, j2 - 1)] = v;
        theta[(j2 - 1, j - 1)] = v;
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn psi_values() {
        assert_eq!(psi(1, 2, 2).unwrap(), 1);
        assert_eq!(psi(1, 2, 4).unwrap(), 1);
        assert_eq!(psi(1, 4, 4).unwrap(), 3);
        assert_eq!(psi(2, 3, 4).unwrap(), 4);
        assert_eq!(psi(3, 4, 4).unwrap(), 6);
        assert_eq!(pair_count(4), 6);
        assert!(psi(2, 2, 4).is_err());
        assert!(psi(3, 2, 4).is_err());
        assert!(psi(1, 5, 4).is_err());
        assert!(psi(0, 1, 4).is_err());
    }

    #[test]
    fn psi_matches_enumeration() {
        for n in 2..=13 {
            for (idx, (k, k2)) in pairs(n).enumerate() {
                assert_eq!(psi(k, k2, n).unwrap(), idx + 1);
            }
        }
    }

    #[test]
    fn single_column_rotation_is_unit() {
        let x = DMatrix::from_column_slice(4, 1, &[0.1, 0.5, 0.2, 0.9]);
        let proj = pls_fit(&x, &[1.0, 3.0, 0.0, 2.0], 1).unwrap();
        assert_abs_diff_eq!(proj.rotation[(0, 0)].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weight_follows_linear_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let x = DMatrix::from_fn(n, 3, |_, _| rng.random::<f64>());
        // Independent columns; y depends only on the first.
        let y: Vec<f64> = (0..n).map(|i| 3.0 * x[(i, 0)]).collect();
        let proj = pls_fit(&x, &y, 1).unwrap();
        let g = proj.weights.column(0);
        // Covariance-maximizing direction: Xcᵀ y normalized.
        let mut xc = x.clone();
        for mut c in xc.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y.iter().sum::<f64>() / n as f64));
        let oracle = xc.tr_mul(&yc).normalize();
        for j in 0..3 {
            assert_abs_diff_eq!(g[j], oracle[j], epsilon = 1e-12);
        }
        assert!(g[0] > 0.9);
    }

    #[test]
    fn deflation_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(30, 5, |_, _| rng.random::<f64>());
        let y: Vec<f64> = (0..30).map(|i| x.row(i).sum() + rng.random::<f64>()).collect();
        let proj = pls_fit(&x, &y, 5).unwrap();
        for w in proj.x_residual_norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(proj.x_residual_norms[5] < 1e-10);
        for c in proj.weights.column_iter() {
            assert_abs_diff_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pls_errors() {
        let x = DMatrix::from_fn(5, 2, |i, j| (i * 2 + j) as f64);
        assert!(matches!(
            pls_fit(&x, &[1.0; 5], 1),
            Err(Error::ZeroVariance)
        ));
        assert!(pls_fit(&x, &[1.0, 2.0], 1).is_err());
        assert!(pls_fit(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], 3).is_err());
        // Columns are collinear: only one informative direction.
        assert!(matches!(
            pls_fit(&x, &[1.0, 2.0, 0.0, 4.0, 5.0], 2),
            Err(Error::RankDeficient { achieved: 1, .. })
        ));
    }

    #[test]
    fn collapse_examples() {
        let proj = PlsProjection {
            weights: DMatrix::zeros(3, 1),
            loadings: DMatrix::zeros(3, 1),
            rotation: DMatrix::from_column_slice(3, 1, &[0.5, -2.0, 1.0]),
            x_residual_norms: vec![],
        };
        assert_eq!(collapse_continuous_theta(&proj, &[0.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(
            collapse_continuous_theta(&proj, &[2.0]).unwrap(),
            vec![0.5, 8.0, 2.0]
        );
        assert_eq!(
            collapse_continuous_theta_abs(&proj, &[2.0]).unwrap(),
            vec![1.0, 4.0, 2.0]
        );
        assert!(collapse_continuous_theta(&proj, &[-1.0]).is_err());
        assert!(collapse_continuous_theta(&proj, &[1.0, 1.0]).is_err());
    }

    fn random_rotation(rng: &mut ChaCha8Rng, levels: usize, reduced: usize) -> MatrixPlsRotation {
        let m = DMatrix::from_fn(pair_count(levels), pair_count(reduced), |_, _| {
            rng.random::<f64>() * 2.0 - 1.0
        });
        MatrixPlsRotation::new(m, levels, reduced, true).unwrap()
    }

    #[test]
    fn reconstruct_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rot = random_rotation(&mut rng, 5, 3);
        let ones = ReducedThetaHat::from_matrix(DMatrix::from_element(3, 3, 1.0)).unwrap();
        let full = reconstruct_theta(&rot, &ones, 5).unwrap();
        for (j, j2) in pairs(5) {
            assert_abs_diff_eq!(full[(j - 1, j2 - 1)], 1.0, epsilon = 1e-12);
        }
        let zero = ReducedThetaHat::from_matrix(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(reconstruct_theta(&rot, &zero, 5).unwrap(), DMatrix::identity(5, 5));

        let rot2 = random_rotation(&mut rng, 6, 2);
        let c = -0.37;
        let m = ReducedThetaHat::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0]))
            .unwrap();
        let full = reconstruct_theta(&rot2, &m, 6).unwrap();
        for (j, j2) in pairs(6) {
            assert_abs_diff_eq!(full[(j - 1, j2 - 1)], c, epsilon = 1e-12);
        }
    }

    #[test]
    fn reconstruct_errors() {
        let rot = MatrixPlsRotation::new(DMatrix::from_element(6, 1, 0.3), 4, 2, false).unwrap();
        let m = ReducedThetaHat::from_matrix(DMatrix::identity(2, 2)).unwrap();
        assert!(reconstruct_theta(&rot, &m, 4).is_err());
        let mut rot = rot;
        rot.normalize_rows();
        assert!(reconstruct_theta(&rot, &m, 5).is_err());
        assert!(MatrixPlsRotation::new(DMatrix::zeros(5, 1), 4, 2, true).is_err());
    }

    #[test]
    fn normalization_keeps_zero_rows() {
        let mut m = DMatrix::from_element(3, 1, 2.0);
        m[(1, 0)] = 0.0;
        let rot = MatrixPlsRotation::new(m, 3, 2, true).unwrap();
        assert_eq!(rot.rotation.column(0).as_slice(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn matrix_pls_component_counts() {
        // Distinct per-level counts keep the Krylov space of the ζ data full.
        let levels = 13;
        let (x, y) = zeta_data(levels, |lev| lev + 1, 9);
        for (reduced, comps) in [(2, 1), (3, 3), (4, 6), (5, 10)] {
            let rot = matrix_pls_fit(&x, &y, reduced).unwrap();
            assert_eq!(rot.rotation.shape(), (78, comps));
            for row in rot.rotation.row_iter() {
                let n = row.norm();
                assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
            }
        }
        assert!(matrix_pls_fit(&x, &y, 1).is_err());
        assert!(matrix_pls_fit(&DMatrix::zeros(4, 5), &[1.0, 2.0, 3.0, 4.0], 2).is_err());
    }

    fn zeta_data(
        levels: usize,
        count: impl Fn(usize) -> usize,
        seed: u64,
    ) -> (DMatrix<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (1..=levels).flat_map(|l| vec![l; count(l)]).collect();
        let mut x = DMatrix::zeros(labels.len(), pair_count(levels));
        let mut y = Vec::new();
        for (i, &lev) in labels.iter().enumerate() {
            let z = crate::design_space::zeta_encode(levels, lev).unwrap();
            x.row_mut(i).copy_from_slice(&z);
            y.push((lev as f64).sin() + 0.1 * rng.random::<f64>());
        }
        (x, y)
    }

    #[test]
    fn balanced_levels_are_rank_deficient() {
        // Equal counts make the centered ζ Gram matrix a multiple of a projector.
        let (x, y) = zeta_data(6, |_| 4, 2);
        match matrix_pls_fit(&x, &y, 3) {
            Err(Error::RankDeficient { requested, achieved }) => {
                assert_eq!(requested, 3);
                assert!(achieved < 3);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        assert_eq!(matrix_pls_fit(&x, &y, 2).unwrap().rotation.ncols(), 1);
    }
}
