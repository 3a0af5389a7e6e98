//! Reference computations used to check the discrete maps: continuous vector
//! fields, fixed-step integrators, double-double evaluation of the 3D and n-D
//! steps, and empirical convergence order.
//!
//! Nothing here calls into the step implementations of [`crate::model3`] or
//! [`crate::modeln`]; the step formulas are re-evaluated from scratch.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::model3::{BodyOmega, Inertia3, PlanarState, StepSize, DET_TOL};
use crate::modeln::{NDInertia, NDOmega};
use crate::{Result, SuslovError};

/// Upper bound on the number of fixed steps a single integration may take.
pub const STEP_BUDGET: u64 = 100_000_000;

/// Errors below this are treated as rounding noise by [`estimate_order`].
pub const ERROR_FLOOR: f64 = 1e-13;

/// Autonomous first-order system `state' = rhs(state)`.
pub trait OdeSystem {
    fn dimension(&self) -> usize;
    fn rhs(&self, state: &[f64], out: &mut [f64]);
}

/// Continuous reduced Suslov system in `(w1, w2)`.
#[derive(Debug, Clone, Copy)]
pub struct Suslov3d(pub Inertia3);

/// Continuous system in planar coordinates: `x' = x y / (I1 I2)`, `y' = -x^2`.
#[derive(Debug, Clone, Copy)]
pub struct SuslovPlanar(pub Inertia3);

/// Continuous n-dimensional reduced system.
#[derive(Debug, Clone)]
pub struct SuslovNd(pub NDInertia);

/// Wraps a closure as an [`OdeSystem`].
pub struct FnSystem<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnSystem<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> OdeSystem for FnSystem<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        (self.f)(state, out)
    }
}

/// `(w1', w2')` from `I1 w1' = -I13 w1 w2 - I23 w2^2`,
/// `I2 w2' = I13 w1^2 + I23 w1 w2`.
pub fn continuous_rhs_3d(omega: BodyOmega, inertia: &Inertia3) -> BodyOmega {
    let (w1, w2) = (omega.omega1, omega.omega2);
    BodyOmega {
        omega1: (-inertia.i13() * w1 * w2 - inertia.i23() * w2 * w2) / inertia.i1(),
        omega2: (inertia.i13() * w1 * w1 + inertia.i23() * w1 * w2) / inertia.i2(),
    }
}

pub fn continuous_rhs_planar(planar: PlanarState, inertia: &Inertia3) -> PlanarState {
    PlanarState {
        x: planar.x * planar.y / inertia.product(),
        y: -planar.x * planar.x,
    }
}

impl OdeSystem for Suslov3d {
    fn dimension(&self) -> usize {
        2
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let d = continuous_rhs_3d(BodyOmega::new(state[0], state[1]), &self.0);
        out[0] = d.omega1;
        out[1] = d.omega2;
    }
}

impl OdeSystem for SuslovPlanar {
    fn dimension(&self) -> usize {
        2
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let d = continuous_rhs_planar(PlanarState::new(state[0], state[1]), &self.0);
        out[0] = d.x;
        out[1] = d.y;
    }
}

impl OdeSystem for SuslovNd {
    fn dimension(&self) -> usize {
        self.0.n() - 1
    }

    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let b = self.0.off();
        let norm2: f64 = state.iter().map(|v| v * v).sum();
        let dot: f64 = b.iter().zip(state).map(|(b, w)| b * w).sum();
        for (i, d) in self.0.denominators().iter().enumerate() {
            out[i] = (-b[i] * norm2 + dot * state[i]) / d;
        }
    }
}

/// Number of steps and length of the last one for a fixed-step run.
fn step_plan(t_end: f64, dt: f64) -> Result<(u64, f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SuslovError::InvalidStep(dt));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(SuslovError::InvalidArgument(format!(
            "t_end must be finite and non-negative, got {t_end}"
        )));
    }
    let ratio = t_end / dt;
    // Absorb rounding in t_end / dt so that e.g. 1.0 / 0.1 takes 10 steps.
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    if steps > STEP_BUDGET as f64 {
        return Err(SuslovError::StepBudgetExceeded {
            needed: steps as u64,
            budget: STEP_BUDGET,
        });
    }
    let steps = steps as u64;
    let last = if steps == 0 {
        0.0
    } else {
        t_end - (steps - 1) as f64 * dt
    };
    Ok((steps, last))
}

fn check_state<S: OdeSystem + ?Sized>(system: &S, state0: &[f64]) -> Result<()> {
    if state0.len() != system.dimension() {
        return Err(SuslovError::DimensionMismatch {
            expected: system.dimension(),
            got: state0.len(),
        });
    }
    Ok(())
}

/// Classical fourth-order Runge-Kutta with a fixed step `dt`. The final step
/// is shortened to land exactly on `t_end`.
pub fn rk4_integrate<S: OdeSystem + ?Sized>(
    system: &S,
    state0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    check_state(system, state0)?;
    let (steps, last) = step_plan(t_end, dt)?;
    let dim = state0.len();
    let mut y = state0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut tmp = vec![0.0; dim];
    for s in 0..steps {
        let h = if s + 1 == steps { last } else { dt };
        system.rhs(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        system.rhs(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        system.rhs(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        system.rhs(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(y)
}

/// Explicit Euler with the same step plan as [`rk4_integrate`]. Used as the
/// first-order control in convergence studies.
pub fn euler_integrate<S: OdeSystem + ?Sized>(
    system: &S,
    state0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    check_state(system, state0)?;
    let (steps, last) = step_plan(t_end, dt)?;
    let mut y = state0.to_vec();
    let mut k = vec![0.0; y.len()];
    for s in 0..steps {
        let h = if s + 1 == steps { last } else { dt };
        system.rhs(&y, &mut k);
        for (yi, ki) in y.iter_mut().zip(&k) {
            *yi += h * ki;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps_levels: Vec<f64>,
    pub errors: Vec<f64>,
    pub estimated_order: f64,
}

/// Least-squares slope of `log(error)` against `log(eps)`.
///
/// `method(eps)` and `reference(eps)` both return the terminal state; the
/// error at each level is their Euclidean distance. Levels must be at least
/// four, each half of the previous one.
pub fn estimate_order<M, R>(
    method: M,
    reference: R,
    eps_levels: &[f64],
) -> Result<ConvergenceReport>
where
    M: Fn(f64) -> Result<Vec<f64>>,
    R: Fn(f64) -> Result<Vec<f64>>,
{
    if eps_levels.len() < 4 {
        return Err(SuslovError::InvalidArgument(format!(
            "need at least 4 step levels, got {}",
            eps_levels.len()
        )));
    }
    for pair in eps_levels.windows(2) {
        if pair[0].is_nan() || pair[0] <= 0.0 || ((pair[1] / pair[0]) - 0.5).abs() > 1e-12 {
            return Err(SuslovError::InvalidArgument(
                "step levels must be positive and halve at each level".into(),
            ));
        }
    }

    let mut errors = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        let got = method(eps)?;
        let want = reference(eps)?;
        if got.len() != want.len() {
            return Err(SuslovError::DimensionMismatch {
                expected: want.len(),
                got: got.len(),
            });
        }
        let err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if !err.is_finite() {
            return Err(SuslovError::NonFinite("convergence error"));
        }
        if err < ERROR_FLOOR {
            return Err(SuslovError::DegenerateFit(format!(
                "error {err:e} at eps = {eps} is below the rounding floor {ERROR_FLOOR:e}"
            )));
        }
        errors.push(err);
    }

    let xs: Vec<f64> = eps_levels.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();

    Ok(ConvergenceReport {
        eps_levels: eps_levels.to_vec(),
        errors,
        estimated_order: sxy / sxx,
    })
}

fn dd(v: f64) -> TwoFloat {
    TwoFloat::from(v)
}

/// The 3D step denominator in double-double arithmetic.
pub fn extended_precision_delta(omega: BodyOmega, inertia: &Inertia3, eps: f64) -> TwoFloat {
    let (w1, w2) = (dd(omega.omega1), dd(omega.omega2));
    let (i1, i2, i13, i23) = (
        dd(inertia.i1()),
        dd(inertia.i2()),
        dd(inertia.i13()),
        dd(inertia.i23()),
    );
    let e = dd(eps);
    let one = dd(1.0);
    let two = dd(2.0);
    let first = (one + e * i13 / (two * i1) * w2) * (one - e * i23 / (two * i2) * w1);
    let second = e * e / (i1 * i2) * (i13 * w1 / two + i23 * w2) * (i13 * w1 + i23 * w2 / two);
    first + second
}

/// The 3D step evaluated term by term in double-double arithmetic and rounded
/// back to `f64`. Degenerate inertia returns the input.
pub fn extended_precision_step(
    omega: BodyOmega,
    inertia: &Inertia3,
    eps: StepSize,
) -> Result<BodyOmega> {
    if inertia.is_degenerate() {
        return Ok(omega);
    }
    let d = extended_precision_delta(omega, inertia, eps.get());
    if f64::from(d).abs() <= DET_TOL {
        return Err(SuslovError::DegenerateStep {
            denominator: f64::from(d),
        });
    }
    let (w1, w2) = (dd(omega.omega1), dd(omega.omega2));
    let (i1, i2, i13, i23) = (
        dd(inertia.i1()),
        dd(inertia.i2()),
        dd(inertia.i13()),
        dd(inertia.i23()),
    );
    let e = dd(eps.get());
    let two = dd(2.0);
    let n1 = w1
        - e * i23 / (two * i2) * w1 * w1
        - e * i13 / (two * i1) * w1 * w2
        - e * i23 / i1 * w2 * w2;
    let n2 = w2
        + e * i13 / (two * i1) * w2 * w2
        + e * i23 / (two * i2) * w1 * w2
        + e * i13 / i2 * w1 * w1;
    Ok(BodyOmega::new(f64::from(n1 / d), f64::from(n2 / d)))
}

/// The n-dimensional step in double-double arithmetic: the step equations are
/// assembled entry by entry and solved by Gaussian elimination with partial
/// pivoting.
pub fn extended_precision_step_nd(
    omega: &NDOmega,
    inertia: &NDInertia,
    eps: StepSize,
) -> Result<NDOmega> {
    let m = inertia.n() - 1;
    if omega.len() != m {
        return Err(SuslovError::DimensionMismatch {
            expected: m,
            got: omega.len(),
        });
    }
    let w: Vec<TwoFloat> = omega.values().iter().map(|&v| dd(v)).collect();
    let b: Vec<TwoFloat> = inertia.off().iter().map(|&v| dd(v)).collect();
    let inn = dd(inertia.diag()[m]);
    let d: Vec<TwoFloat> = inertia.diag()[..m].iter().map(|&v| dd(v) + inn).collect();
    let e = dd(eps.get());
    let two = dd(2.0);

    // Row i of: d_i w'_i + eps b_i (w . w') - eps/2 w_i (b . w') - eps/2 (b . w) w'_i = d_i w_i
    let mut bw = dd(0.0);
    for k in 0..m {
        bw += b[k] * w[k];
    }
    let mut aug: Vec<Vec<TwoFloat>> = (0..m)
        .map(|i| {
            let mut row: Vec<TwoFloat> = (0..m)
                .map(|j| e * b[i] * w[j] - e * w[i] * b[j] / two)
                .collect();
            row[i] += d[i] - e * bw / two;
            row.push(d[i] * w[i]);
            row
        })
        .collect();

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| {
                f64::from(aug[a][col].abs())
                    .partial_cmp(&f64::from(aug[b][col].abs()))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if f64::from(aug[pivot][col].abs()) == 0.0 {
            return Err(SuslovError::SingularStepMatrix {
                condition: f64::INFINITY,
            });
        }
        aug.swap(col, pivot);
        for r in col + 1..m {
            let factor = aug[r][col] / aug[col][col];
            let (top, bottom) = aug.split_at_mut(r);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= factor * *src;
            }
        }
    }
    let mut x = vec![dd(0.0); m];
    for r in (0..m).rev() {
        let mut acc = aug[r][m];
        for c in r + 1..m {
            acc -= aug[r][c] * x[c];
        }
        x[r] = acc / aug[r][r];
    }
    Ok(NDOmega(x.into_iter().map(f64::from).collect()))
}
