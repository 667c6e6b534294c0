//! Cholesky factorization with pivot diagnostics and the nugget ladder.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Diagonal inflations tried in order until the factorization succeeds.
pub const NUGGET_LADDER: [f64; 6] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle. A pivot
    /// fails when it is not above `f64::EPSILON` times its diagonal entry.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                n,
                a.ncols()
            )));
        }
        let mut l = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut pivot = a[(j, j)];
            for k in 0..j {
                pivot -= l[(j, k)] * l[(j, k)];
            }
            if !(pivot > f64::EPSILON * a[(j, j)].abs()) {
                return Err(Error::NotPositiveDefinite { pivot, row: j });
            }
            let d = pivot.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `L⁻¹ b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        self.l
            .solve_lower_triangular(b)
            .expect("factor has a positive diagonal")
    }

    /// `L⁻ᵀ b`.
    pub fn solve_upper(&self, b: &DVector<f64>) -> DVector<f64> {
        self.l
            .tr_solve_lower_triangular(b)
            .expect("factor has a positive diagonal")
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹ B` column-wise.
    pub fn solve_lower_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.l
            .solve_lower_triangular(b)
            .expect("factor has a positive diagonal")
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

/// Factors `r + nugget·I` for the first nugget on the ladder that succeeds.
/// On total failure the error carries the smallest failed pivot over all rungs.
pub fn ensure_spd(r: &DMatrix<f64>) -> Result<(Cholesky, f64)> {
    let mut worst: Option<(f64, usize)> = None;
    for &nugget in &NUGGET_LADDER {
        let mut a = r.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += nugget;
        }
        match Cholesky::factor(&a) {
            Ok(c) => return Ok((c, nugget)),
            Err(Error::NotPositiveDefinite { pivot, row }) => {
                if worst.is_none_or(|(p, _)| pivot < p || p.is_nan()) {
                    worst = Some((pivot, row));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let (pivot, row) = worst.expect("ladder is non-empty");
    Err(Error::NotPositiveDefinite { pivot, row })
}
