//! n-dimensional discrete Suslov map.
//!
//! The body moves in `SO(n)` with `Omega_ij = 0` for `i, j < n`, so the free
//! velocities are `w_i = Omega_in`, `i = 1..n-1`. Writing `d_i = I_ii + I_nn`
//! and `b_i = I_in`, one step solves the linear system `A(w) w' = w` with
//!
//! ```text
//! A_ii = 1 - eps * sum_{j != i} b_j w_j / (2 d_i)
//! A_ij = eps * (2 b_i w_j - b_j w_i) / (2 d_i)        (j != i)
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model3::StepSize;
use crate::{Result, SuslovError};

/// Largest accepted condition number of the step matrix.
pub const COND_MAX: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDInertia {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl NDInertia {
    /// `diag` holds `I_11..I_nn`, `off` holds `I_1n..I_{n-1,n}`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n < 3 {
            return Err(SuslovError::InvalidInertia(format!(
                "dimension must be at least 3, got {n}"
            )));
        }
        if off.len() != n - 1 {
            return Err(SuslovError::DimensionMismatch {
                expected: n - 1,
                got: off.len(),
            });
        }
        if !diag.iter().chain(&off).all(|v| v.is_finite()) {
            return Err(SuslovError::NonFinite("n-dimensional inertia"));
        }
        let inn = diag[n - 1];
        if let Some(i) = diag[..n - 1].iter().position(|&d| d + inn <= 0.0) {
            return Err(SuslovError::InvalidInertia(format!(
                "I_{k}{k} + I_nn must be positive (row {k})",
                k = i + 1
            )));
        }
        Ok(Self { diag, off })
    }

    /// Dimension `n` of the rotation group.
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// `I_ii + I_nn` for `i = 1..n-1`.
    pub fn denominators(&self) -> Vec<f64> {
        let inn = self.diag[self.n() - 1];
        self.diag[..self.n() - 1].iter().map(|d| d + inn).collect()
    }
}

/// Velocities `Omega_in`, `i = 1..n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NDOmega(pub Vec<f64>);

impl NDOmega {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, inertia: &NDInertia) -> Result<()> {
        if self.len() != inertia.n() - 1 {
            return Err(SuslovError::DimensionMismatch {
                expected: inertia.n() - 1,
                got: self.len(),
            });
        }
        if !self.0.iter().all(|v| v.is_finite()) {
            return Err(SuslovError::NonFinite("n-dimensional velocity"));
        }
        Ok(())
    }
}

/// The constant-velocity solution `Omega_in = c I_in`.
pub fn steady_rotation(inertia: &NDInertia, c: f64) -> NDOmega {
    NDOmega(inertia.off.iter().map(|b| c * b).collect())
}

fn matrix_raw(omega: &NDOmega, inertia: &NDInertia, eps: f64) -> DMatrix<f64> {
    let w = omega.values();
    let b = inertia.off();
    let d = inertia.denominators();
    let m = w.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            let rest: f64 = (0..m).filter(|&k| k != i).map(|k| b[k] * w[k]).sum();
            1.0 - eps * rest / (2.0 * d[i])
        } else {
            eps * (2.0 * b[i] * w[j] - b[j] * w[i]) / (2.0 * d[i])
        }
    })
}

/// The matrix `A` with `A(omega) * next = omega`.
pub fn build_step_matrix(
    omega: &NDOmega,
    inertia: &NDInertia,
    eps: StepSize,
) -> Result<DMatrix<f64>> {
    omega.check(inertia)?;
    Ok(matrix_raw(omega, inertia, eps.get()))
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn step_nd_raw(omega: &NDOmega, inertia: &NDInertia, eps: f64) -> Result<NDOmega> {
    omega.check(inertia)?;
    let a = matrix_raw(omega, inertia, eps);
    let condition = condition_number(&a);
    if condition.is_nan() || condition > COND_MAX {
        return Err(SuslovError::SingularStepMatrix { condition });
    }
    let rhs = DVector::from_column_slice(omega.values());
    let next = a
        .lu()
        .solve(&rhs)
        .ok_or(SuslovError::SingularStepMatrix { condition })?;
    if !next.iter().all(|v| v.is_finite()) {
        return Err(SuslovError::NonFinite("n-dimensional step result"));
    }
    Ok(NDOmega(next.iter().copied().collect()))
}

/// Advance one step by an LU solve of `A(omega) next = omega`.
pub fn hk_step_nd(omega: &NDOmega, inertia: &NDInertia, eps: StepSize) -> Result<NDOmega> {
    step_nd_raw(omega, inertia, eps.get())
}

/// Inverse of [`hk_step_nd`].
pub fn hk_step_nd_back(omega: &NDOmega, inertia: &NDInertia, eps: StepSize) -> Result<NDOmega> {
    step_nd_raw(omega, inertia, -eps.get())
}

/// Right-hand side of the continuous reduced equations, already divided by
/// `I_ii + I_nn`:
/// `w_i' = (-b_i |w|^2 + (b . w) w_i) / d_i`.
pub fn continuous_rhs_nd(omega: &NDOmega, inertia: &NDInertia) -> Result<NDOmega> {
    omega.check(inertia)?;
    let w = omega.values();
    let b = inertia.off();
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    let dot: f64 = b.iter().zip(w).map(|(b, w)| b * w).sum();
    Ok(NDOmega(
        inertia
            .denominators()
            .iter()
            .enumerate()
            .map(|(i, d)| (-b[i] * norm2 + dot * w[i]) / d)
            .collect(),
    ))
}

/// Relative residuals of each step equation for the pair `(omega, next)`:
///
/// ```text
/// d_i (w'_i - w_i) = -eps b_i (w' . w) + eps (b . w') w_i / 2 + eps (b . w) w'_i / 2
/// ```
///
/// Each is scaled by the sum of the magnitudes of its terms.
pub fn step_residual_nd(
    omega: &NDOmega,
    next: &NDOmega,
    inertia: &NDInertia,
    eps: f64,
) -> Result<Vec<f64>> {
    omega.check(inertia)?;
    next.check(inertia)?;
    let (w, v) = (omega.values(), next.values());
    let b = inertia.off();
    let cross: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let cross_abs: f64 = v.iter().zip(w).map(|(a, b)| (a * b).abs()).sum();
    let bv: f64 = b.iter().zip(v).map(|(b, v)| b * v).sum();
    let bv_abs: f64 = b.iter().zip(v).map(|(b, v)| (b * v).abs()).sum();
    let bw: f64 = b.iter().zip(w).map(|(b, w)| b * w).sum();
    let bw_abs: f64 = b.iter().zip(w).map(|(b, w)| (b * w).abs()).sum();
    Ok(inertia
        .denominators()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let r = d * (v[i] - w[i])
                - (-eps * b[i] * cross + eps * bv * w[i] / 2.0 + eps * bw * v[i] / 2.0);
            let s = (d * v[i]).abs()
                + (d * w[i]).abs()
                + eps.abs()
                    * ((b[i]).abs() * cross_abs
                        + bv_abs * w[i].abs() / 2.0
                        + bw_abs * v[i].abs() / 2.0);
            if s > 0.0 {
                r.abs() / s
            } else {
                r.abs()
            }
        })
        .collect())
}

/// `(1/2) sum_i (I_ii + I_nn) w_i^2`. Reduces to the 3D kinetic energy for
/// `n = 3`; no conservation law is claimed for it in higher dimensions.
pub fn kinetic_candidate(omega: &NDOmega, inertia: &NDInertia) -> f64 {
    0.5 * inertia
        .denominators()
        .iter()
        .zip(omega.values())
        .map(|(d, w)| d * w * w)
        .sum::<f64>()
}

/// `sum_i I_in w_i`, the n-dimensional analogue of the 3D constraint residual.
pub fn constraint_candidate(omega: &NDOmega, inertia: &NDInertia) -> f64 {
    inertia
        .off()
        .iter()
        .zip(omega.values())
        .map(|(b, w)| b * w)
        .sum()
}
