//! Exact orbits of the 3D map.
//!
//! On the level `F_planar = h` the map reduces to a recursion for
//! `u = sqrt(I1 I2 / (I1 I2 - h eps^2)) tan(phi)` whose admissible branch is
//! solved by `u(n) = sinh(k1 n eps + k2)` with `sinh(-k1 eps) = c(h)`. In
//! planar coordinates
//!
//! ```text
//! x(n) = 2 sqrt(h I1 I2 / (I1 I2 - h eps^2)) / cosh(k1 n eps + k2)
//! y(n) = 2 sqrt(h I1 I2) tanh(k1 n eps + k2)
//! ```
//!
//! and velocities follow from inverting the planar change of coordinates.
//! The phase origin `t0` is folded into `k2`.

use serde::{Deserialize, Serialize};

use crate::model3::{
    first_integral_planar, from_planar, to_planar, BodyOmega, Inertia3, PlanarState, StepSize,
};
use crate::{Result, SuslovError};

/// Branch of the two-valued `u` recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// The branch with a well-defined continuous limit.
    First,
    Second,
}

/// Sign of `x` along the orbit. Negative orbits are mirror images under
/// `(x, y) -> (-x, y)`, which the planar map respects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XSign {
    Positive,
    Negative,
}

impl XSign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            XSign::Negative
        } else {
            XSign::Positive
        }
    }

    pub fn value(self) -> f64 {
        match self {
            XSign::Positive => 1.0,
            XSign::Negative => -1.0,
        }
    }
}

/// Parameters of one exact orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormParams {
    h: f64,
    k1: f64,
    k2: f64,
    sign_x: XSign,
    eps: StepSize,
    inertia: Inertia3,
}

fn check_level(h: f64, inertia: &Inertia3, eps: StepSize) -> Result<()> {
    let upper = inertia.product() / (eps.get() * eps.get());
    if !(h > 0.0 && h < upper) {
        return Err(SuslovError::LevelOutOfRange { h, upper });
    }
    Ok(())
}

/// `c = 2 eps sqrt(I1 I2 h) / (I1 I2 - h eps^2)`.
pub fn c_of_h(h: f64, inertia: &Inertia3, eps: StepSize) -> Result<f64> {
    check_level(h, inertia, eps)?;
    let p = inertia.product();
    let e = eps.get();
    Ok(2.0 * e * (p * h).sqrt() / (p - h * e * e))
}

/// `k1 = -asinh(c) / eps`; negative for every admissible level.
pub fn k1_of_h(h: f64, inertia: &Inertia3, eps: StepSize) -> Result<f64> {
    Ok(-c_of_h(h, inertia, eps)?.asinh() / eps.get())
}

/// One step of the `u` recursion `u sqrt(u'^2 + 1) - u' sqrt(u^2 + 1) = c`.
pub fn u_step(u: f64, c: f64, branch: Branch) -> f64 {
    let a = -c * (u * u + 1.0).sqrt();
    let b = u * (c * c + 1.0).sqrt();
    match branch {
        Branch::First => a + b,
        Branch::Second => a - b,
    }
}

impl ClosedFormParams {
    /// Build the orbit on level `h` with phase `k2`; `k1` is derived from `h`.
    pub fn new(h: f64, k2: f64, sign_x: XSign, inertia: Inertia3, eps: StepSize) -> Result<Self> {
        if !k2.is_finite() {
            return Err(SuslovError::NonFinite("k2"));
        }
        let k1 = k1_of_h(h, &inertia, eps)?;
        Ok(Self {
            h,
            k1,
            k2,
            sign_x,
            eps,
            inertia,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn sign_x(&self) -> XSign {
        self.sign_x
    }

    pub fn eps(&self) -> StepSize {
        self.eps
    }

    pub fn inertia(&self) -> &Inertia3 {
        &self.inertia
    }

    pub fn c(&self) -> f64 {
        let p = self.inertia.product();
        let e = self.eps.get();
        2.0 * e * (p * self.h).sqrt() / (p - self.h * e * e)
    }

    /// `k1 n eps + k2`.
    pub fn phase(&self, n: i64) -> f64 {
        self.k1 * (n as f64 * self.eps.get()) + self.k2
    }

    /// Peak of `|x|` along the orbit, reached where the phase crosses zero.
    pub fn x_amplitude(&self) -> f64 {
        let p = self.inertia.product();
        let e = self.eps.get();
        2.0 * (self.h * p / (p - self.h * e * e)).sqrt()
    }
}

pub fn u_closed(n: i64, params: &ClosedFormParams) -> f64 {
    params.phase(n).sinh()
}

/// Point of the level curve `F_planar = h` at angle `phi`.
pub fn level_point(phi: f64, h: f64, inertia: &Inertia3, eps: StepSize) -> Result<PlanarState> {
    let p = inertia.product();
    let e = eps.get();
    let (s, c) = phi.sin_cos();
    let den = p - h * e * e * c * c;
    if !(h > 0.0 && den > 0.0) {
        return Err(SuslovError::LevelOutOfRange {
            h,
            upper: p / (e * e * c * c),
        });
    }
    Ok(PlanarState {
        x: 2.0 * (p * h / den).sqrt() * c,
        y: 2.0 * p * (h / den).sqrt() * s,
    })
}

pub fn planar_closed(n: i64, params: &ClosedFormParams) -> PlanarState {
    let theta = params.phase(n);
    let p = params.inertia.product();
    PlanarState {
        x: params.sign_x.value() * params.x_amplitude() / theta.cosh(),
        y: 2.0 * (params.h * p).sqrt() * theta.tanh(),
    }
}

pub fn omega_closed(n: i64, params: &ClosedFormParams) -> Result<BodyOmega> {
    from_planar(planar_closed(n, params), &params.inertia)
}

/// Orbit parameters passing through `omega0` at `n = 0`.
pub fn fit_params(
    omega0: BodyOmega,
    inertia: &Inertia3,
    eps: StepSize,
) -> Result<ClosedFormParams> {
    if inertia.is_degenerate() {
        return Err(SuslovError::DegenerateInertia);
    }
    let p0 = to_planar(omega0, inertia);
    let scale = (inertia.i13() * omega0.omega1).abs() + (inertia.i23() * omega0.omega2).abs();
    if p0.x.abs() <= 1e-14 * scale || p0.x == 0.0 {
        return Err(SuslovError::FixedPointState);
    }
    let h = first_integral_planar(p0, inertia, eps);
    check_level(h, inertia, eps)?;
    let ratio = p0.y / (2.0 * (h * inertia.product()).sqrt());
    if ratio.abs() >= 1.0 {
        return Err(SuslovError::LevelOutOfRange {
            h,
            upper: inertia.product() / (eps.get() * eps.get()),
        });
    }
    ClosedFormParams::new(h, ratio.atanh(), XSign::of(p0.x), *inertia, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model3::{hk_step, planar_residual, planar_step};
    use approx::assert_relative_eq;

    fn eps(v: f64) -> StepSize {
        StepSize::new(v).unwrap()
    }

    fn fig1() -> Inertia3 {
        Inertia3::new(4.0, 1.0, -0.5, -0.3).unwrap()
    }

    #[test]
    fn c_and_k1_examples() {
        let unit = Inertia3::new(1.0, 1.0, 0.1, 0.1).unwrap();
        let c = c_of_h(0.5, &unit, eps(1.0)).unwrap();
        assert_relative_eq!(c, 2.0 * 2f64.sqrt(), max_relative = 1e-15);
        let k1 = k1_of_h(0.5, &unit, eps(1.0)).unwrap();
        assert_relative_eq!(k1, -(2.0 * 2f64.sqrt()).asinh(), max_relative = 1e-15);
        assert!(((-k1).sinh() - c).abs() < 1e-14);

        let tiny = c_of_h(1e-20, &unit, eps(1.0)).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-9);
        assert!(k1_of_h(1e-20, &unit, eps(1.0)).unwrap() < 0.0);

        let near_pole = c_of_h(1.0 - 1e-9, &unit, eps(1.0)).unwrap();
        assert!(near_pole.is_finite() && near_pole > 1e8);
    }

    #[test]
    fn level_range_is_enforced() {
        let unit = Inertia3::new(1.0, 1.0, 0.1, 0.1).unwrap();
        for h in [0.0, -1.0, 1.0, 2.0, f64::NAN] {
            assert!(matches!(
                c_of_h(h, &unit, eps(1.0)),
                Err(SuslovError::LevelOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn u_step_examples() {
        assert_eq!(u_step(1.7, 0.0, Branch::First), 1.7);
        assert_eq!(u_step(0.0, 0.4, Branch::First), -0.4);
        assert_eq!(u_step(0.0, 0.4, Branch::Second), -0.4);
        let (theta, alpha) = (0.8_f64, 0.3_f64);
        let next = u_step(theta.sinh(), alpha.sinh(), Branch::First);
        assert_relative_eq!(next, (theta - alpha).sinh(), max_relative = 1e-14);
    }

    #[test]
    fn u_closed_examples_and_recursion() {
        let i = fig1();
        let p = ClosedFormParams::new(0.1, 0.0, XSign::Positive, i, eps(0.2)).unwrap();
        assert_eq!(u_closed(0, &p), 0.0);

        let p = ClosedFormParams::new(0.1, 0.3, XSign::Positive, i, eps(0.2)).unwrap();
        let c = p.c();
        for n in 0..100 {
            let expect = u_closed(n + 1, &p);
            let got = u_step(u_closed(n, &p), c, Branch::First);
            assert!(
                (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                "n = {n}"
            );
        }
    }

    #[test]
    fn level_point_examples() {
        let i = fig1();
        let e = eps(0.2);
        let h = 0.3;
        let p = level_point(std::f64::consts::FRAC_PI_2, h, &i, e).unwrap();
        assert!(p.x.abs() < 1e-15);
        assert_relative_eq!(p.y, 2.0 * (4.0 * h).sqrt(), max_relative = 1e-15);
        let p = level_point(0.0, h, &i, e).unwrap();
        assert_relative_eq!(
            p.x,
            2.0 * (4.0 * h / (4.0 - h * 0.04)).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(p.y, 0.0);
        for k in 0..16 {
            let phi = k as f64 * 0.4 - 3.0;
            let p = level_point(phi, h, &i, e).unwrap();
            assert_relative_eq!(first_integral_planar(p, &i, e), h, max_relative = 1e-12);
        }
        assert!(level_point(0.0, 200.0, &i, e).is_err());
    }

    #[test]
    fn planar_closed_solves_the_map() {
        let i = fig1();
        let e = eps(0.2);
        let params = ClosedFormParams::new(0.1, 0.3, XSign::Positive, i, e).unwrap();
        for n in -20..20 {
            let cur = planar_closed(n, &params);
            let next = planar_closed(n + 1, &params);
            let stepped = planar_step(cur, &i, e).unwrap();
            assert_relative_eq!(stepped.x, next.x, max_relative = 1e-10);
            assert_relative_eq!(stepped.y, next.y, max_relative = 1e-10);
            let [r1, r2] = planar_residual(cur, next, &i, e.get());
            assert!(r1 < 1e-13 && r2 < 1e-13);
            assert_relative_eq!(first_integral_planar(cur, &i, e), 0.1, max_relative = 1e-12);
        }
        let far = planar_closed(1_000_000, &params);
        assert!(far.x.abs() < 1e-300);
        assert_relative_eq!(
            far.y.abs(),
            2.0 * (0.1 * 4.0f64).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn fitted_orbit_tracks_the_map() {
        let i = fig1();
        let e = eps(0.2);
        let w0 = BodyOmega::new(1.0, 1.0);
        let params = fit_params(w0, &i, e).unwrap();
        assert_eq!(params.sign_x(), XSign::Negative);
        let start = omega_closed(0, &params).unwrap();
        assert_relative_eq!(start.omega1, 1.0, max_relative = 1e-10);
        assert_relative_eq!(start.omega2, 1.0, max_relative = 1e-10);

        let mut w = w0;
        let mut worst = 0.0_f64;
        for n in 1..=500 {
            w = hk_step(w, &i, e).unwrap();
            let c = omega_closed(n, &params).unwrap();
            worst = worst
                .max((w.omega1 - c.omega1).abs())
                .max((w.omega2 - c.omega2).abs());
        }
        assert!(worst < 1e-8, "worst = {worst:e}");
    }

    #[test]
    fn fit_recovers_construction() {
        let i = fig1();
        let e = eps(0.2);
        let params = ClosedFormParams::new(0.15, -0.7, XSign::Positive, i, e).unwrap();
        let w0 = omega_closed(0, &params).unwrap();
        let fitted = fit_params(w0, &i, e).unwrap();
        assert_relative_eq!(fitted.h(), 0.15, max_relative = 1e-13);
        assert_relative_eq!(fitted.k2(), -0.7, max_relative = 1e-12);
        assert_eq!(fitted.sign_x(), XSign::Positive);
    }

    #[test]
    fn fit_rejects_fixed_points_and_degenerate_inertia() {
        let e = eps(0.2);
        assert_eq!(
            fit_params(BodyOmega::new(0.3, -0.5), &fig1(), e),
            Err(SuslovError::FixedPointState)
        );
        let degenerate = Inertia3::new(4.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(
            fit_params(BodyOmega::new(1.0, 1.0), &degenerate, e),
            Err(SuslovError::DegenerateInertia)
        );
    }
}
