//! Dormand-Prince 5(4) integration of autonomous 3-dimensional systems.
//!
//! The systems are autonomous, so the stage nodes `c_i` never appear.

use crate::error::{Error, Result};
use crate::linalg::Vec3;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &Vec3, h: f64, terms: &[(f64, &Vec3)]) -> Vec3 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..3 {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One Dormand-Prince step from `y` with `k1 = f(y)`.
///
/// Returns the fifth-order solution, the derivative there (FSAL) and the
/// embedded error estimate.
pub fn dp5_step<F>(f: &mut F, y: &Vec3, k1: &Vec3, h: f64) -> Result<(Vec3, Vec3, Vec3)>
where
    F: FnMut(&Vec3) -> Result<Vec3>,
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y5 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y5)?;
    let mut err = [0.0; 3];
    for i in 0..3 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok((y5, k7, err))
}

/// Tolerances and limits of an integration run.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// Consecutive rejections treated as a rejection storm.
    pub max_rejections: usize,
}

/// An accepted point: position, state and derivative.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub t: f64,
    pub y: Vec3,
    pub f: Vec3,
}

/// Decision of the observer after each accepted step.
pub enum Control {
    Continue,
    Stop,
    Abort(Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `y' = f(y)` forward from `(t0, y0)`, calling `observe` on every
/// accepted point (including the first). The step never exceeds `cap(y)`.
pub fn integrate<F, C, O>(
    mut f: F,
    t0: f64,
    y0: Vec3,
    settings: &Settings,
    mut cap: C,
    mut observe: O,
) -> Result<Stats>
where
    F: FnMut(&Vec3) -> Result<Vec3>,
    C: FnMut(&Vec3) -> f64,
    O: FnMut(&Point) -> Control,
{
    let mut stats = Stats::default();
    let mut p = Point { t: t0, y: y0, f: f(&y0)? };
    stats.evaluations += 1;
    match observe(&p) {
        Control::Continue => {}
        Control::Stop => return Ok(stats),
        Control::Abort(e) => return Err(e),
    }
    let mut h = settings.initial_step.min(cap(&p.y));
    let mut storm = 0;
    loop {
        if stats.accepted >= settings.max_steps {
            return Err(Error::Integration(format!(
                "step cap of {} reached at t = {}",
                settings.max_steps, p.t
            )));
        }
        let (y, k7, err) = dp5_step(&mut f, &p.y, &p.f, h)?;
        stats.evaluations += 6;
        let mut e2 = 0.0;
        for i in 0..3 {
            let sc = settings.abs_tol + settings.rel_tol * p.y[i].abs().max(y[i].abs());
            e2 += (err[i] / sc).powi(2);
        }
        let e = (e2 / 3.0).sqrt();
        if !e.is_finite() {
            return Err(Error::Integration(format!("non-finite step at t = {}", p.t)));
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if e <= 1.0 {
            storm = 0;
            stats.accepted += 1;
            p = Point { t: p.t + h, y, f: k7 };
            match observe(&p) {
                Control::Continue => {}
                Control::Stop => return Ok(stats),
                Control::Abort(e) => return Err(e),
            }
            h = (h * factor).min(cap(&p.y));
        } else {
            stats.rejected += 1;
            storm += 1;
            if storm >= settings.max_rejections {
                return Err(Error::Integration(format!("{storm} consecutive rejected steps at t = {}", p.t)));
            }
            h *= factor.min(0.9);
        }
        if !(h > 1e-14 * p.t.abs().max(1.0)) {
            return Err(Error::Integration(format!("step size underflow at t = {}", p.t)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 1e-2,
            max_steps: 100_000,
            max_rejections: 50,
        }
    }

    #[test]
    fn exponential_decay() {
        let mut last = None;
        integrate(
            |y: &Vec3| Ok([-y[0], -2.0 * y[1], 0.5 * y[2]]),
            0.0,
            [1.0, 1.0, 1.0],
            &settings(),
            |_| f64::INFINITY,
            |p| {
                last = Some(*p);
                if p.t >= 2.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        let p = last.unwrap();
        assert!((p.y[0] - (-p.t).exp()).abs() < 1e-9);
        assert!((p.y[1] - (-2.0 * p.t).exp()).abs() < 1e-9);
        assert!((p.y[2] - (0.5 * p.t).exp()).abs() < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_respects_cap() {
        let mut max_h = 0.0f64;
        let mut prev = 0.0;
        let mut end = [0.0; 3];
        integrate(
            |y: &Vec3| Ok([y[1], -y[0], 0.0]),
            0.0,
            [1.0, 0.0, 0.0],
            &settings(),
            |_| 0.05,
            |p| {
                max_h = max_h.max(p.t - prev);
                prev = p.t;
                end = p.y;
                if p.t >= 10.0 {
                    Control::Stop
                } else {
                    Control::Continue
                }
            },
        )
        .unwrap();
        assert!(max_h <= 0.05 + 1e-15);
        assert!((end[0] - prev.cos()).abs() < 1e-9);
    }

    #[test]
    fn step_limit_is_an_error() {
        let mut s = settings();
        s.max_steps = 3;
        let r = integrate(|y: &Vec3| Ok(*y), 0.0, [1.0; 3], &s, |_| 0.1, |_| Control::Continue);
        assert!(matches!(r, Err(Error::Integration(_))));
    }
}
