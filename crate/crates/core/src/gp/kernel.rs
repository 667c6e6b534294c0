use nalgebra::{DMatrix, DVector};

use crate::categorical::{
    build_level_matrix_with_shift, CategoricalKernelParam, HypersphereAngles, LevelCorrelationMatrix, EPSILON,
};
use crate::design_space::{validate_point, zeta_encode, DesignSpace, Doe, MixedPoint};
use crate::error::{Error, Result};
use crate::pls::{
    collapse_continuous_theta, collapse_continuous_theta_abs, matrix_pls_fit, pair_count,
    pls_fit, MatrixPlsRotation, PlsProjection,
};

use super::config::{
    CategoricalKind, ContinuousKernel, HyperparameterVector, KernelConfig, ANGLE_BOUNDS,
    CR_BOUNDS, THETA_BOUNDS,
};

#[derive(Debug, Clone)]
enum QuantPls {
    None,
    Continuous(PlsProjection),
    Relaxed(PlsProjection),
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Quantitative,
    Categorical(usize),
}

/// Everything the kernel needs besides `Θ`: the design space, the kernel
/// configuration and the projections fitted on the training data.
#[derive(Debug, Clone)]
pub struct KernelStructure {
    space: DesignSpace,
    config: KernelConfig,
    quant_pls: QuantPls,
    rotations: Vec<Option<MatrixPlsRotation>>,
    layout: Vec<(Block, usize, usize)>,
}

/// Kernel with resolved per-dimension length scales and level matrices.
#[derive(Debug, Clone)]
pub struct KernelState {
    pub continuous_kernel: ContinuousKernel,
    /// One length scale per continuous then integer dimension.
    pub theta_quant: Vec<f64>,
    pub categorical: Vec<CategoricalKernelParam>,
    pub level_matrices: Vec<LevelCorrelationMatrix>,
    /// Total diagonal shift used to repair indefinite PLS level matrices.
    pub repair_shift: f64,
}

/// A point with quantitative coordinates scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPoint {
    pub q: Vec<f64>,
    pub c: Vec<usize>,
}

impl KernelStructure {
    /// Fits the projections required by `config` on `doe`; responses are only
    /// needed when some PLS option is active.
    pub fn new(space: &DesignSpace, config: &KernelConfig, doe: &Doe) -> Result<Self> {
        config.validate(space)?;
        for p in &doe.points {
            validate_point(space, p)?;
        }
        let needs_y = config.continuous_pls.is_some()
            || config.cr_pls.is_some()
            || config.categorical.iter().any(|k| {
                matches!(k, CategoricalKind::EhhPls { .. } | CategoricalKind::HhPls { .. })
            });
        let y = if needs_y { Some(doe.responses()?) } else { None };
        let n = doe.len();

        let quant_pls = if let Some(d) = config.continuous_pls {
            let x = DMatrix::from_fn(n, space.n_continuous() + space.n_integer(), |i, j| {
                space.scale_quantitative(&doe.points[i])[j]
            });
            QuantPls::Continuous(pls_fit(&x, y.expect("responses checked"), d)?)
        } else if let Some(d) = config.cr_pls {
            let rows: Vec<Vec<f64>> = doe.points.iter().map(|p| relaxed_scaled(space, p)).collect();
            let x = DMatrix::from_fn(n, space.relaxed_dim(), |i, j| rows[i][j]);
            QuantPls::Relaxed(pls_fit(&x, y.expect("responses checked"), d)?)
        } else {
            QuantPls::None
        };

        let mut rotations = Vec::with_capacity(config.categorical.len());
        for (i, (kind, levels)) in config.categorical.iter().zip(space.level_counts()).enumerate() {
            rotations.push(match kind {
                CategoricalKind::EhhPls { reduced_levels } | CategoricalKind::HhPls { reduced_levels } => {
                    let mut x = DMatrix::zeros(n, pair_count(levels));
                    for (r, p) in doe.points.iter().enumerate() {
                        x.row_mut(r).copy_from_slice(&zeta_encode(levels, p.c[i])?);
                    }
                    Some(matrix_pls_fit(&x, y.expect("responses checked"), *reduced_levels)?)
                }
                _ => None,
            });
        }

        let mut layout = Vec::new();
        let mut start = 0;
        let quant_len = match &quant_pls {
            QuantPls::Continuous(p) | QuantPls::Relaxed(p) => p.n_components(),
            QuantPls::None => space.n_continuous() + space.n_integer(),
        };
        if quant_len > 0 {
            layout.push((Block::Quantitative, start, quant_len));
            start += quant_len;
        }
        if config.cr_pls.is_none() {
            for (i, (kind, levels)) in config.categorical.iter().zip(space.level_counts()).enumerate() {
                let len = match kind {
                    CategoricalKind::Gd => 1,
                    CategoricalKind::Cr => levels,
                    CategoricalKind::Ehh | CategoricalKind::Hh => pair_count(levels),
                    CategoricalKind::EhhPls { reduced_levels }
                    | CategoricalKind::HhPls { reduced_levels } => pair_count(*reduced_levels),
                };
                layout.push((Block::Categorical(i), start, len));
                start += len;
            }
        }

        Ok(Self {
            space: space.clone(),
            config: config.clone(),
            quant_pls,
            rotations,
            layout,
        })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn n_hyperparameters(&self) -> usize {
        self.layout.last().map_or(0, |(_, s, l)| s + l)
    }

    /// Bounds and scales of every entry, valued at the centre of the search box.
    pub fn initial_hyperparameters(&self) -> HyperparameterVector {
        let mut bounds = Vec::new();
        let mut log_scale = Vec::new();
        for (block, _, len) in &self.layout {
            let (b, log) = match block {
                Block::Quantitative => (THETA_BOUNDS, true),
                Block::Categorical(i) => match self.config.categorical[*i] {
                    CategoricalKind::Gd => (THETA_BOUNDS, true),
                    CategoricalKind::Cr => (CR_BOUNDS, true),
                    _ => (ANGLE_BOUNDS, false),
                },
            };
            bounds.extend(std::iter::repeat_n(b, *len));
            log_scale.extend(std::iter::repeat_n(log, *len));
        }
        let mut h = HyperparameterVector {
            values: vec![0.0; bounds.len()],
            bounds,
            log_scale,
        };
        h.set_from_unit(&vec![0.5; h.len()]);
        h
    }

    /// Checks `theta` against this structure's layout and bounds.
    pub fn check(&self, theta: &HyperparameterVector) -> Result<()> {
        theta.validate()?;
        let expected = self.initial_hyperparameters();
        if theta.len() != expected.len() || theta.bounds != expected.bounds {
            return Err(Error::DimensionMismatch(format!(
                "{} hyperparameters given, kernel has {}",
                theta.len(),
                expected.len()
            )));
        }
        Ok(())
    }

    pub fn state(&self, theta: &HyperparameterVector) -> Result<KernelState> {
        self.check(theta)?;
        let kind = self.config.continuous_kernel;
        let n_quant = self.space.n_continuous() + self.space.n_integer();
        let levels = self.space.level_counts();
        let mut theta_quant = Vec::new();
        let mut categorical = Vec::with_capacity(levels.len());
        let mut relaxed_cat: Option<Vec<f64>> = None;
        for (block, start, len) in &self.layout {
            let v = &theta.values[*start..start + len];
            match block {
                Block::Quantitative => match &self.quant_pls {
                    QuantPls::None => theta_quant = v.to_vec(),
                    QuantPls::Continuous(p) => theta_quant = collapse(kind, p, v)?,
                    QuantPls::Relaxed(p) => {
                        let full = collapse(kind, p, v)?;
                        theta_quant = full[..n_quant].to_vec();
                        relaxed_cat = Some(full[n_quant..].to_vec());
                    }
                },
                Block::Categorical(i) => {
                    let l = levels[*i];
                    categorical.push(match (self.config.categorical[*i], &self.rotations[*i]) {
                        (CategoricalKind::Gd, _) => CategoricalKernelParam::Gd { levels: l, theta: v[0] },
                        (CategoricalKind::Cr, _) => CategoricalKernelParam::Cr { diag: v.to_vec() },
                        (CategoricalKind::Ehh, _) => CategoricalKernelParam::Ehh {
                            angles: HypersphereAngles::new(l, v.to_vec())?,
                            epsilon: EPSILON,
                        },
                        (CategoricalKind::Hh, _) => CategoricalKernelParam::Hh {
                            angles: HypersphereAngles::new(l, v.to_vec())?,
                        },
                        (CategoricalKind::EhhPls { reduced_levels }, Some(rot)) => {
                            CategoricalKernelParam::EhhPls {
                                reduced: HypersphereAngles::new(reduced_levels, v.to_vec())?,
                                rotation: rot.clone(),
                                epsilon: EPSILON,
                            }
                        }
                        (CategoricalKind::HhPls { reduced_levels }, Some(rot)) => {
                            CategoricalKernelParam::HhPls {
                                reduced: HypersphereAngles::new(reduced_levels, v.to_vec())?,
                                rotation: rot.clone(),
                            }
                        }
                        _ => unreachable!("PLS kinds always carry a rotation"),
                    });
                }
            }
        }
        if let Some(full) = relaxed_cat {
            let mut offset = 0;
            for l in &levels {
                categorical.push(CategoricalKernelParam::Cr {
                    diag: full[offset..offset + l].to_vec(),
                });
                offset += l;
            }
        }
        if theta_quant.is_empty() {
            theta_quant = vec![0.0; n_quant];
        }
        let (level_matrices, shifts): (Vec<_>, Vec<f64>) = categorical
            .iter()
            .map(build_level_matrix_with_shift)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(KernelState {
            continuous_kernel: kind,
            theta_quant,
            categorical,
            level_matrices,
            repair_shift: shifts.iter().sum(),
        })
    }

    pub fn scale(&self, w: &MixedPoint) -> Result<ScaledPoint> {
        validate_point(&self.space, w)?;
        Ok(ScaledPoint {
            q: self.space.scale_quantitative(w),
            c: w.c.clone(),
        })
    }

    pub fn kernel_eval(&self, theta: &HyperparameterVector, wr: &MixedPoint, ws: &MixedPoint) -> Result<f64> {
        let state = self.state(theta)?;
        Ok(state.eval(&self.scale(wr)?, &self.scale(ws)?))
    }

    pub fn correlation_matrix(&self, theta: &HyperparameterVector, doe: &Doe) -> Result<DMatrix<f64>> {
        let state = self.state(theta)?;
        let pts = doe
            .points
            .iter()
            .map(|p| self.scale(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingGeometry::new(pts, self.config.continuous_kernel).correlation(&state))
    }
}

fn collapse(kind: ContinuousKernel, proj: &PlsProjection, v: &[f64]) -> Result<Vec<f64>> {
    match kind {
        ContinuousKernel::SquaredExponential => collapse_continuous_theta(proj, v),
        ContinuousKernel::AbsoluteExponential => collapse_continuous_theta_abs(proj, v),
    }
}

/// Scaled quantitative coordinates followed by one-hot categorical blocks.
fn relaxed_scaled(space: &DesignSpace, w: &MixedPoint) -> Vec<f64> {
    let mut out = space.scale_quantitative(w);
    for (&level, l) in w.c.iter().zip(space.level_counts()) {
        let start = out.len();
        out.resize(start + l, 0.0);
        out[start + level - 1] = 1.0;
    }
    out
}

impl KernelState {
    pub fn eval(&self, a: &ScaledPoint, b: &ScaledPoint) -> f64 {
        let s: f64 = a
            .q
            .iter()
            .zip(&b.q)
            .zip(&self.theta_quant)
            .map(|((x, y), t)| t * self.continuous_kernel.distance(x - y))
            .sum();
        let cat: f64 = self
            .level_matrices
            .iter()
            .zip(a.c.iter().zip(&b.c))
            .map(|(m, (r, s))| m.get(*r, *s))
            .product();
        (-s).exp() * cat
    }

    /// Correlations between `w` and each training point.
    pub fn correlations(&self, w: &ScaledPoint, train: &[ScaledPoint]) -> DVector<f64> {
        DVector::from_iterator(train.len(), train.iter().map(|t| self.eval(w, t)))
    }
}

/// Training points with pairwise distance terms cached for repeated
/// correlation-matrix assembly.
#[derive(Debug, Clone)]
pub struct TrainingGeometry {
    pub points: Vec<ScaledPoint>,
    pairs: Vec<(usize, usize)>,
    distances: DMatrix<f64>,
}

impl TrainingGeometry {
    pub fn new(points: Vec<ScaledPoint>, kind: ContinuousKernel) -> Self {
        let n = points.len();
        let n_quant = points.first().map_or(0, |p| p.q.len());
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut distances = DMatrix::zeros(pairs.len(), n_quant);
        for (k, (i, j)) in pairs.iter().enumerate() {
            for d in 0..n_quant {
                distances[(k, d)] = kind.distance(points[*i].q[d] - points[*j].q[d]);
            }
        }
        Self {
            points,
            pairs,
            distances,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn correlation(&self, state: &KernelState) -> DMatrix<f64> {
        let n = self.points.len();
        let mut r = DMatrix::identity(n, n);
        let exponents = if self.distances.ncols() > 0 {
            &self.distances * DVector::from_column_slice(&state.theta_quant)
        } else {
            DVector::zeros(self.pairs.len())
        };
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let cat: f64 = state
                .level_matrices
                .iter()
                .enumerate()
                .map(|(v, m)| m.get(self.points[i].c[v], self.points[j].c[v]))
                .product();
            let v = (-exponents[k]).exp() * cat;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
        r
    }
}
