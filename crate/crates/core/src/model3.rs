//! Three-dimensional discrete Suslov map.
//!
//! With the constraint axis `a = (0, 0, 1)` in the body frame the reduced
//! velocity is `(w1, w2)` and `w3 = 0` identically. The step map is
//!
//! ```text
//! I1 (w1' - w1) = eps [ -I13/2 (w1' w2 + w1 w2') - I23 w2 w2' ]
//! I2 (w2' - w2) = eps [  I23/2 (w1' w2 + w1 w2') + I13 w1 w1' ]
//! ```
//!
//! which is linear in `(w1', w2')` and solved here by Cramer's rule.

use serde::{Deserialize, Serialize};

use crate::{Result, SuslovError};

/// Absolute threshold on the step denominators (`delta` and the planar one).
pub const DET_TOL: f64 = 1e-12;

/// Relative per-step tolerance on the conserved quantity.
pub const CONS_TOL: f64 = 1e-10;

/// Relative tolerance on the conserved quantity over 10^4 steps.
pub const CONS_TOL_LONG: f64 = 1e-9;

/// Reduced inertia data of the body.
///
/// `i3` only enters the unreduced equations; every reduced operation ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inertia3 {
    i1: f64,
    i2: f64,
    i13: f64,
    i23: f64,
    i3: Option<f64>,
}

impl Inertia3 {
    pub fn new(i1: f64, i2: f64, i13: f64, i23: f64) -> Result<Self> {
        if ![i1, i2, i13, i23].iter().all(|v| v.is_finite()) {
            return Err(SuslovError::NonFinite("inertia"));
        }
        if i1 <= 0.0 || i2 <= 0.0 {
            return Err(SuslovError::InvalidInertia(format!(
                "principal moments must be positive, got I1 = {i1}, I2 = {i2}"
            )));
        }
        Ok(Self {
            i1,
            i2,
            i13,
            i23,
            i3: None,
        })
    }

    /// Attach the third principal moment.
    pub fn with_i3(mut self, i3: f64) -> Result<Self> {
        if !i3.is_finite() || i3 <= 0.0 {
            return Err(SuslovError::InvalidInertia(format!(
                "I3 must be finite and positive, got {i3}"
            )));
        }
        self.i3 = Some(i3);
        Ok(self)
    }

    pub fn i1(&self) -> f64 {
        self.i1
    }

    pub fn i2(&self) -> f64 {
        self.i2
    }

    pub fn i13(&self) -> f64 {
        self.i13
    }

    pub fn i23(&self) -> f64 {
        self.i23
    }

    pub fn i3(&self) -> Option<f64> {
        self.i3
    }

    /// `I1 * I2`, the scale that appears throughout the planar formulas.
    pub fn product(&self) -> f64 {
        self.i1 * self.i2
    }

    /// No coupling to the constraint axis: every state is an equilibrium.
    pub fn is_degenerate(&self) -> bool {
        self.i13 == 0.0 && self.i23 == 0.0
    }

    /// Jacobian of `to_planar`: `-(I13^2 I2 + I23^2 I1)`.
    pub fn jac(&self) -> f64 {
        -(self.i13 * self.i13 * self.i2 + self.i23 * self.i23 * self.i1)
    }
}

/// Reduced angular velocity. The third component is zero and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyOmega {
    pub omega1: f64,
    pub omega2: f64,
}

impl BodyOmega {
    pub const fn new(omega1: f64, omega2: f64) -> Self {
        Self { omega1, omega2 }
    }

    pub fn is_finite(&self) -> bool {
        self.omega1.is_finite() && self.omega2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }
}

/// Coordinates `x = I13 w1 + I23 w2`, `y = I23 I1 w1 - I13 I2 w2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
}

impl PlanarState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Positive time step of the map.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct StepSize(f64);

impl StepSize {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() && epsilon > 0.0 {
            Ok(Self(epsilon))
        } else {
            Err(SuslovError::InvalidStep(epsilon))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One row of a 3D trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub n: i64,
    pub t: f64,
    pub omega: BodyOmega,
    pub planar: PlanarState,
    #[serde(rename = "F")]
    pub first_integral: f64,
    pub energy: f64,
    pub constraint: f64,
}

impl TrajectorySample {
    pub fn new(n: i64, t0: f64, omega: BodyOmega, inertia: &Inertia3, eps: StepSize) -> Self {
        let planar = to_planar(omega, inertia);
        Self {
            n,
            t: t0 + n as f64 * eps.get(),
            omega,
            planar,
            first_integral: first_integral(omega, inertia, eps),
            energy: energy(omega, inertia),
            constraint: planar.x,
        }
    }
}

fn delta_raw(omega: BodyOmega, inertia: &Inertia3, eps: f64) -> f64 {
    let (w1, w2) = (omega.omega1, omega.omega2);
    let Inertia3 {
        i1, i2, i13, i23, ..
    } = *inertia;
    (1.0 + eps * i13 / (2.0 * i1) * w2) * (1.0 - eps * i23 / (2.0 * i2) * w1)
        + eps * eps / (i1 * i2) * (i13 * w1 / 2.0 + i23 * w2) * (i13 * w1 + i23 * w2 / 2.0)
}

/// Determinant of the linear system solved by one step.
pub fn delta(omega: BodyOmega, inertia: &Inertia3, eps: StepSize) -> f64 {
    delta_raw(omega, inertia, eps.get())
}

fn step_raw(omega: BodyOmega, inertia: &Inertia3, eps: f64) -> Result<BodyOmega> {
    if inertia.is_degenerate() {
        return Ok(omega);
    }
    let d = delta_raw(omega, inertia, eps);
    if d.abs() <= DET_TOL || !d.is_finite() {
        return Err(SuslovError::DegenerateStep { denominator: d });
    }
    let (w1, w2) = (omega.omega1, omega.omega2);
    let Inertia3 {
        i1, i2, i13, i23, ..
    } = *inertia;
    // Increment form: the correction carries a factor of x, so points on the
    // steady-rotation line stay put.
    let x = i13 * w1 + i23 * w2;
    let scale = eps * x / (i1 * i2 * d);
    let next = BodyOmega::new(
        w1 - scale * (i2 * w2 + 0.5 * eps * w1 * x),
        w2 + scale * (i1 * w1 - 0.5 * eps * w2 * x),
    );
    if !next.is_finite() {
        return Err(SuslovError::NonFinite("step result"));
    }
    Ok(next)
}

/// Advance one step of length `eps`.
///
/// Degenerate inertia (`I13 = I23 = 0`) returns the input unchanged without
/// evaluating the denominator.
pub fn hk_step(omega: BodyOmega, inertia: &Inertia3, eps: StepSize) -> Result<BodyOmega> {
    step_raw(omega, inertia, eps.get())
}

/// Inverse of [`hk_step`]: the same map with the step negated.
pub fn hk_step_back(omega: BodyOmega, inertia: &Inertia3, eps: StepSize) -> Result<BodyOmega> {
    step_raw(omega, inertia, -eps.get())
}

/// Relative residuals of the two bilinear step equations for the pair
/// `(omega, next)`, each scaled by the sum of the magnitudes of its terms.
pub fn step_residual(omega: BodyOmega, next: BodyOmega, inertia: &Inertia3, eps: f64) -> [f64; 2] {
    let (w1, w2) = (omega.omega1, omega.omega2);
    let (v1, v2) = (next.omega1, next.omega2);
    let Inertia3 {
        i1, i2, i13, i23, ..
    } = *inertia;
    let mixed = v1 * w2 + w1 * v2;

    let r1 = i1 * (v1 - w1) - eps * (-i13 / 2.0 * mixed - i23 * w2 * v2);
    let s1 = (i1 * v1).abs()
        + (i1 * w1).abs()
        + eps.abs()
            * ((i13 / 2.0).abs() * ((v1 * w2).abs() + (w1 * v2).abs()) + (i23 * w2 * v2).abs());

    let r2 = i2 * (v2 - w2) - eps * (i23 / 2.0 * mixed + i13 * w1 * v1);
    let s2 = (i2 * v2).abs()
        + (i2 * w2).abs()
        + eps.abs()
            * ((i23 / 2.0).abs() * ((v1 * w2).abs() + (w1 * v2).abs()) + (i13 * w1 * v1).abs());

    let rel = |r: f64, s: f64| if s > 0.0 { r.abs() / s } else { r.abs() };
    [rel(r1, s1), rel(r2, s2)]
}

/// Conserved quantity of the map,
/// `(I1 w1^2 + I2 w2^2) / (4 I1 I2 + eps^2 (I13 w1 + I23 w2)^2)`.
pub fn first_integral(omega: BodyOmega, inertia: &Inertia3, eps: StepSize) -> f64 {
    let (w1, w2) = (omega.omega1, omega.omega2);
    let e = eps.get();
    let x = constraint_residual(omega, inertia);
    (inertia.i1 * w1 * w1 + inertia.i2 * w2 * w2) / (4.0 * inertia.product() + e * e * x * x)
}

/// Kinetic energy of the continuous system. Not conserved by the map.
pub fn energy(omega: BodyOmega, inertia: &Inertia3) -> f64 {
    0.5 * (inertia.i1 * omega.omega1 * omega.omega1 + inertia.i2 * omega.omega2 * omega.omega2)
}

pub fn to_planar(omega: BodyOmega, inertia: &Inertia3) -> PlanarState {
    let (w1, w2) = (omega.omega1, omega.omega2);
    PlanarState {
        x: inertia.i13 * w1 + inertia.i23 * w2,
        y: inertia.i23 * inertia.i1 * w1 - inertia.i13 * inertia.i2 * w2,
    }
}

pub fn from_planar(planar: PlanarState, inertia: &Inertia3) -> Result<BodyOmega> {
    if inertia.is_degenerate() {
        return Err(SuslovError::DegenerateInertia);
    }
    let Inertia3 {
        i1, i2, i13, i23, ..
    } = *inertia;
    let j = -inertia.jac();
    Ok(BodyOmega {
        omega1: (i13 * i2 * planar.x + i23 * planar.y) / j,
        omega2: (i23 * i1 * planar.x - i13 * planar.y) / j,
    })
}

fn planar_step_raw(planar: PlanarState, inertia: &Inertia3, eps: f64) -> Result<PlanarState> {
    let PlanarState { x, y } = planar;
    let k = 2.0 * inertia.product();
    let den = k - eps * y + eps * eps * x * x;
    if den.abs() <= DET_TOL || !den.is_finite() {
        return Err(SuslovError::DegenerateStep { denominator: den });
    }
    let next_x = x * (k + eps * y) / den;
    Ok(PlanarState {
        x: next_x,
        y: y - eps * next_x * x,
    })
}

/// The step map in planar coordinates:
/// `x' - x = eps/(2 I1 I2) (x' y + x y')`, `y' - y = -eps x' x`.
pub fn planar_step(planar: PlanarState, inertia: &Inertia3, eps: StepSize) -> Result<PlanarState> {
    planar_step_raw(planar, inertia, eps.get())
}

pub fn planar_step_back(
    planar: PlanarState,
    inertia: &Inertia3,
    eps: StepSize,
) -> Result<PlanarState> {
    planar_step_raw(planar, inertia, -eps.get())
}

/// Relative residuals of the two planar step equations.
pub fn planar_residual(
    planar: PlanarState,
    next: PlanarState,
    inertia: &Inertia3,
    eps: f64,
) -> [f64; 2] {
    let k = 2.0 * inertia.product();
    let (x, y, nx, ny) = (planar.x, planar.y, next.x, next.y);
    let r1 = nx - x - eps / k * (nx * y + x * ny);
    let s1 = nx.abs() + x.abs() + (eps / k).abs() * ((nx * y).abs() + (x * ny).abs());
    let r2 = ny - y + eps * nx * x;
    let s2 = ny.abs() + y.abs() + (eps * nx * x).abs();
    let rel = |r: f64, s: f64| if s > 0.0 { r.abs() / s } else { r.abs() };
    [rel(r1, s1), rel(r2, s2)]
}

/// The conserved quantity in planar coordinates,
/// `(I1 I2 x^2 + y^2) / (4 I1 I2 + eps^2 x^2)`.
///
/// Equals `-jac * first_integral` at the corresponding velocity.
pub fn first_integral_planar(planar: PlanarState, inertia: &Inertia3, eps: StepSize) -> f64 {
    let p = inertia.product();
    let e = eps.get();
    let PlanarState { x, y } = planar;
    (p * x * x + y * y) / (4.0 * p + e * e * x * x)
}

/// Distance from the steady-state line, `I13 w1 + I23 w2`.
pub fn constraint_residual(omega: BodyOmega, inertia: &Inertia3) -> f64 {
    inertia.i13 * omega.omega1 + inertia.i23 * omega.omega2
}

/// Iterator over successive states of the 3D map, starting with `omega0`.
///
/// Yields `Err` once if a pole is hit and then stops.
#[derive(Debug, Clone)]
pub struct Orbit {
    state: Option<BodyOmega>,
    inertia: Inertia3,
    eps: StepSize,
    started: bool,
}

impl Orbit {
    pub fn new(omega0: BodyOmega, inertia: Inertia3, eps: StepSize) -> Self {
        Self {
            state: Some(omega0),
            inertia,
            eps,
            started: false,
        }
    }
}

impl Iterator for Orbit {
    type Item = Result<BodyOmega>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.state?;
        if !self.started {
            self.started = true;
            return Some(Ok(current));
        }
        match hk_step(current, &self.inertia, self.eps) {
            Ok(next) => {
                self.state = Some(next);
                Some(Ok(next))
            }
            Err(e) => {
                self.state = None;
                Some(Err(e))
            }
        }
    }
}
