//! Reduction of the profile equations to `v` alone.
//!
//! Eliminating `u` turns the integrated profile system into two relations
//! `h1 = h2 = 0` in `(v, theta, v', v'', theta', eps)`. Near the base point
//! `(v-, 0, 0, 0)` they define `theta = g1(v, v', v'', eps)` and
//! `theta' = g2(v, v', v'', eps)` implicitly; [`solve_theta`] realizes that map by
//! Newton iteration. In the scaled coordinates
//! `v = v- + eps w0(eps xi)`, `v' = eps^2 w1`, `v'' = eps^2 w2` the critical
//! manifold of the resulting slow-fast system is `w1 = A w0 (1 - w0)`.
//!
//! Here `eps` is the signed jump `v+ - v-`, so 1-shock fields are handled
//! with `eps < 0` and `A < 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gas::{Coefficients, GasConstants};
use crate::hugoniot;
use crate::linalg;
use crate::profile_ode::PhaseField;
use crate::shooting::Profile;

/// Residual target for [`solve_theta`].
pub const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_MAX_HALVINGS: usize = 5;

/// First-order finite-difference step and tolerance.
pub const FD_STEP_FIRST: f64 = 1e-6;
pub const FD_TOL_FIRST: f64 = 1e-5;
/// Second-order finite-difference step (before Richardson halving) and tolerance.
pub const FD_STEP_SECOND: f64 = 1e-4;
pub const FD_TOL_SECOND: f64 = 1e-3;

/// `A = (R gamma sigma_*) / (R tau- + R gamma mu- + (gamma-1)^2 kappa-) * (gamma+1)/2`.
pub fn tail_constant(gas: &GasConstants, left: &Coefficients, sigma_star: f64) -> f64 {
    let (r, g) = (gas.r, gas.gamma);
    r * g * sigma_star / (r * left.tau.value + r * g * left.mu.value + (g - 1.0).powi(2) * left.kappa.value)
        * (g + 1.0)
        / 2.0
}

/// The tail-law constant of a field.
pub fn compute_a(field: &PhaseField) -> f64 {
    field.tail_constant()
}

/// Box constant bounding the scaled variables, `max(2, 2|A|)`.
pub fn box_constant(field: &PhaseField) -> f64 {
    2.0f64.max(2.0 * field.tail_constant().abs())
}

/// Arguments `(v, v', v'', eps)` of the implicit functions `g1`, `g2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub v: f64,
    pub vp: f64,
    pub vpp: f64,
    /// Signed jump `v+ - v-`.
    pub eps: f64,
}

impl ReducedPoint {
    /// `(v-, 0, 0, 0)`.
    pub fn base(field: &PhaseField) -> Self {
        Self { v: field.shock.left.v, vp: 0.0, vpp: 0.0, eps: 0.0 }
    }

    /// A point checked against the working neighborhood of the base point.
    pub fn new(v: f64, vp: f64, vpp: f64, eps: f64, field: &PhaseField) -> Result<Self> {
        let p = Self { v, vp, vpp, eps };
        if !p.in_working_box(field) {
            return Err(Error::InvalidParameter(format!(
                "reduced point {p:?} lies outside the working neighborhood"
            )));
        }
        Ok(p)
    }

    pub fn in_working_box(&self, field: &PhaseField) -> bool {
        let vm = field.shock.left.v;
        let m = box_constant(field);
        self.v > 0.0
            && (self.v - vm).abs() <= 0.5 * vm
            && self.vp.abs() <= m
            && self.vpp.abs() <= m
            && self.eps.abs() <= hugoniot::EPS_CEILING * vm
    }
}

fn sigma_at(field: &PhaseField, eps: f64) -> Result<f64> {
    hugoniot::signed_speed(&field.shock.left, eps, field.shock.family.sign(), &field.gas)
}

/// `(h1, h2)` at `(v, theta, v', v'', theta', eps)`.
pub fn eval_h(p: &ReducedPoint, theta: f64, thetap: f64, field: &PhaseField) -> Result<[f64; 2]> {
    Ok(h_with_jacobian(p, theta, thetap, field)?.0)
}

/// `(h1, h2)` together with `d(h1, h2)/d(theta, theta')`.
fn h_with_jacobian(
    p: &ReducedPoint,
    theta: f64,
    thetap: f64,
    field: &PhaseField,
) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let c = field.coeffs.eval(theta)?;
    let (tau, mu, kappa) = (c.tau, c.mu, c.kappa);
    let left = &field.shock.left;
    let (r, g) = (field.gas.r, field.gas.gamma);
    let pm = field.p_minus();
    let s = sigma_at(field, p.eps)?;
    let (v, vp, vpp) = (p.v, p.vp, p.vpp);
    let dv = v - left.v;

    let x = s * dv + tau.value * vp / v;
    let x_th = tau.d1 * vp / v;
    let curv = (vpp * v - vp * vp) / (v * v);
    let bracket = s * vp + tau.d1 * thetap * vp / v + tau.value * curv;
    let dp = r * (theta * left.v - left.theta * v) / (v * left.v);

    let h1 = s * x + dp + mu.value / v * bracket;
    let h2 = -s * r / (g - 1.0) * (theta - left.theta) + 0.5 * s * x * x - pm * x - kappa.value * thetap / v;

    let h1_th =
        s * x_th + r / v + mu.d1 / v * bracket + mu.value / v * (tau.d2 * thetap * vp / v + tau.d1 * curv);
    let h1_thp = mu.value / v * tau.d1 * vp / v;
    let h2_th = -s * r / (g - 1.0) + s * x * x_th - pm * x_th - kappa.d1 * thetap / v;
    let h2_thp = -kappa.value / v;
    Ok(([h1, h2], [[h1_th, h1_thp], [h2_th, h2_thp]]))
}

/// `(g1, g2)(v, v', v'', eps)`: the root `(theta, theta')` of `h = 0`, found by
/// damped Newton iteration from `(theta-, 0)`.
pub fn solve_theta(p: &ReducedPoint, field: &PhaseField) -> Result<(f64, f64)> {
    let inf = |h: &[f64; 2]| h[0].abs().max(h[1].abs());
    let mut x = [field.shock.left.theta, 0.0];
    let (mut h, mut jac) = h_with_jacobian(p, x[0], x[1], field)?;
    let mut res = inf(&h);
    for _ in 0..NEWTON_MAX_ITER {
        if res <= 1e-3 * NEWTON_TOL {
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let step = linalg::solve2(&jac, &h, 1e-300).ok_or(Error::SingularJacobian(det))?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let trial = [x[0] - lambda * step[0], x[1] - lambda * step[1]];
            if let Ok((ht, jt)) = h_with_jacobian(p, trial[0], trial[1], field) {
                if inf(&ht) < res {
                    accepted = Some((trial, ht, jt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ht, jt)) => {
                x = trial;
                h = ht;
                jac = jt;
                res = inf(&h);
            }
            // no further decrease: at the floating-point floor or stuck
            None => break,
        }
    }
    if res <= NEWTON_TOL {
        Ok((x[0], x[1]))
    } else {
        Err(Error::NewtonDiverged { iterations: NEWTON_MAX_ITER, residual: res })
    }
}

/// One analytic-versus-finite-difference comparison.
#[derive(Debug, Clone, Serialize)]
pub struct DerivEntry {
    pub matrix_name: String,
    pub entry: String,
    pub analytic: f64,
    pub fd: f64,
    pub rel_err: f64,
    #[serde(skip)]
    pub order: u8,
}

impl DerivEntry {
    pub fn tolerance(&self) -> f64 {
        if self.order == 1 {
            FD_TOL_FIRST
        } else {
            FD_TOL_SECOND
        }
    }

    pub fn passed(&self) -> bool {
        self.rel_err <= self.tolerance()
    }
}

/// Collection of derivative comparisons.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DerivReport {
    pub entries: Vec<DerivEntry>,
}

impl DerivReport {
    pub fn max_rel_err(&self, order: u8) -> f64 {
        self.entries.iter().filter(|e| e.order == order).map(|e| e.rel_err).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(DerivEntry::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DerivEntry> {
        self.entries.iter().filter(|e| !e.passed())
    }

    pub fn extend(&mut self, other: DerivReport) {
        self.entries.extend(other.entries);
    }

    /// Adds a named matrix; zero-valued entries are compared relative to the
    /// largest analytic entry of the same matrix.
    fn push_matrix(&mut self, name: &str, labels: &[&str], analytic: &[f64], fd: &[f64], order: u8) {
        let scale = analytic.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        for ((label, &a), &f) in labels.iter().zip(analytic).zip(fd) {
            let denom = a.abs().max(scale).max(f64::MIN_POSITIVE);
            self.entries.push(DerivEntry {
                matrix_name: name.to_string(),
                entry: label.to_string(),
                analytic: a,
                fd: f,
                rel_err: (a - f).abs() / denom,
                order,
            });
        }
    }
}

/// Base-point quantities used by the closed forms.
struct Base {
    v: f64,
    theta: f64,
    p: f64,
    r: f64,
    g: f64,
    s: f64,
    tau: f64,
    mu: f64,
    kappa: f64,
}

impl Base {
    fn of(field: &PhaseField) -> Self {
        let c = field.left_coefficients();
        Self {
            v: field.shock.left.v,
            theta: field.shock.left.theta,
            p: field.p_minus(),
            r: field.gas.r,
            g: field.gas.gamma,
            s: field.shock.sigma_star,
            tau: c.tau.value,
            mu: c.mu.value,
            kappa: c.kappa.value,
        }
    }
}

/// Closed-form `d(h1, h2)/d(theta, theta')` at the base point, row-major.
pub fn h_theta_jacobian_closed_form(field: &PhaseField) -> [f64; 4] {
    let b = Base::of(field);
    [b.r / b.v, 0.0, -b.s * b.r / (b.g - 1.0), -b.kappa / b.v]
}

/// Closed-form `d(h1, h2)/d(v, v', v'', eps)` at the base point, row-major.
pub fn h_first_closed_form(field: &PhaseField) -> [f64; 8] {
    let b = Base::of(field);
    [
        (b.g - 1.0) * b.p / b.v,
        b.s * (b.tau + b.mu) / b.v,
        b.mu * b.tau / (b.v * b.v),
        0.0,
        -b.s * b.p,
        -b.p / b.v * b.tau,
        0.0,
        0.0,
    ]
}

/// Closed-form second derivatives of `h` at the base point in the order
/// `vv, v theta, theta theta, eps v, eps theta, eps eps`, first `h1` then `h2`.
pub fn h_second_closed_form(field: &PhaseField) -> [f64; 12] {
    let b = Base::of(field);
    let v2 = b.v * b.v;
    [
        2.0 * b.p / v2,
        -b.r / v2,
        0.0,
        -b.g * (b.g + 1.0) * b.p / (2.0 * v2),
        0.0,
        0.0,
        b.s * b.g * b.p / b.v,
        0.0,
        0.0,
        b.s * (b.g + 1.0) * b.p / (4.0 * b.v),
        b.s * b.r * (b.g + 1.0) / (4.0 * b.v * (b.g - 1.0)),
        0.0,
    ]
}

/// Closed-form `d(g1, g2)/d(v, v', v'', eps)` at the base point, row-major.
pub fn g_first_closed_form(field: &PhaseField) -> [f64; 8] {
    let b = Base::of(field);
    [
        -(b.g - 1.0) * b.theta / b.v,
        -b.s / b.r * (b.tau + b.mu),
        -b.mu * b.tau / (b.r * b.v),
        0.0,
        0.0,
        b.p * (b.tau + b.g * b.mu) / ((b.g - 1.0) * b.kappa),
        b.s * b.mu * b.tau / ((b.g - 1.0) * b.kappa),
        0.0,
    ]
}

/// Closed-form `[[g1_vv, g1_veps], [g2_vv, g2_veps]]` at the base point, row-major.
pub fn g_second_closed_form(field: &PhaseField) -> [f64; 4] {
    let b = Base::of(field);
    let ratio = (b.g + 1.0) / (b.g - 1.0);
    [
        -2.0 * b.g * b.p / (b.r * b.v),
        (b.g + 1.0) * b.s * b.s / (2.0 * b.r),
        ratio * b.s * b.g * b.p / b.kappa,
        -ratio * b.s * b.g * b.p / (2.0 * b.kappa),
    ]
}

/// Central first difference of a vector-valued map along one coordinate.
fn central<const N: usize>(f: &dyn Fn(f64) -> Result<[f64; N]>, h: f64) -> Result<[f64; N]> {
    let (fp, fm) = (f(h)?, f(-h)?);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (fp[i] - fm[i]) / (2.0 * h);
    }
    Ok(out)
}

/// Second derivative `d^2 f / (da db)` at the origin of a two-parameter map,
/// central differences with one Richardson level.
fn second<const N: usize>(
    f: &dyn Fn(f64, f64) -> Result<[f64; N]>,
    ha: f64,
    hb: f64,
    same: bool,
) -> Result<[f64; N]> {
    let raw = |ha: f64, hb: f64| -> Result<[f64; N]> {
        let mut out = [0.0; N];
        if same {
            let (fp, f0, fm) = (f(ha, 0.0)?, f(0.0, 0.0)?, f(-ha, 0.0)?);
            for i in 0..N {
                out[i] = (fp[i] - 2.0 * f0[i] + fm[i]) / (ha * ha);
            }
        } else {
            let (pp, pm, mp, mm) = (f(ha, hb)?, f(ha, -hb)?, f(-ha, hb)?, f(-ha, -hb)?);
            for i in 0..N {
                out[i] = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * ha * hb);
            }
        }
        Ok(out)
    };
    let (coarse, fine) = (raw(ha, hb)?, raw(0.5 * ha, 0.5 * hb)?);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    }
    Ok(out)
}

/// Checks the closed-form `h` derivatives at the base point against finite
/// differences of [`eval_h`].
pub fn h_derivative_check(field: &PhaseField) -> Result<DerivReport> {
    let base = ReducedPoint::base(field);
    let (vm, thm) = (field.shock.left.v, field.shock.left.theta);
    let h_at = |p: ReducedPoint, th: f64, thp: f64| eval_h(&p, th, thp, field);
    let mut report = DerivReport::default();

    // d(h1, h2)/d(theta, theta')
    let hs = [FD_STEP_FIRST * thm, FD_STEP_FIRST];
    let d_th = central(&|t| h_at(base, thm + t, 0.0), hs[0])?;
    let d_thp = central(&|t| h_at(base, thm, t), hs[1])?;
    report.push_matrix(
        "hderth",
        &["dh1/dtheta", "dh1/dtheta'", "dh2/dtheta", "dh2/dtheta'"],
        &h_theta_jacobian_closed_form(field),
        &[d_th[0], d_thp[0], d_th[1], d_thp[1]],
        1,
    );

    // d(h1, h2)/d(v, v', v'', eps)
    let shift = |k: usize, t: f64| {
        let mut p = base;
        match k {
            0 => p.v += t,
            1 => p.vp += t,
            2 => p.vpp += t,
            _ => p.eps += t,
        }
        p
    };
    let mut cols = [[0.0; 2]; 4];
    for (k, col) in cols.iter_mut().enumerate() {
        let h = if k == 0 { FD_STEP_FIRST * vm } else { FD_STEP_FIRST };
        *col = central(&|t| h_at(shift(k, t), thm, 0.0), h)?;
    }
    report.push_matrix(
        "hderiv",
        &["dh1/dv", "dh1/dv'", "dh1/dv''", "dh1/deps", "dh2/dv", "dh2/dv'", "dh2/dv''", "dh2/deps"],
        &h_first_closed_form(field),
        &[cols[0][0], cols[1][0], cols[2][0], cols[3][0], cols[0][1], cols[1][1], cols[2][1], cols[3][1]],
        1,
    );

    // second derivatives in (v, theta, eps)
    let hv = FD_STEP_SECOND * vm;
    let ht = FD_STEP_SECOND * thm;
    let he = FD_STEP_SECOND;
    let along = |a: usize, b: usize| {
        move |x: f64, y: f64| {
            let mut d = [0.0; 3];
            d[a] += x;
            d[b] += y;
            let mut p = base;
            p.v += d[0];
            p.eps += d[2];
            h_at(p, thm + d[1], 0.0)
        }
    };
    let steps = [hv, ht, he];
    let pairs = [(0, 0), (0, 1), (1, 1), (2, 0), (2, 1), (2, 2)];
    let mut fd = [0.0; 12];
    for (j, &(a, b)) in pairs.iter().enumerate() {
        let d = second(&along(a, b), steps[a], steps[b], a == b)?;
        fd[j] = d[0];
        fd[6 + j] = d[1];
    }
    let labels = [
        "d2h1/dv2",
        "d2h1/dvdtheta",
        "d2h1/dtheta2",
        "d2h1/depsdv",
        "d2h1/depsdtheta",
        "d2h1/deps2",
        "d2h2/dv2",
        "d2h2/dvdtheta",
        "d2h2/dtheta2",
        "d2h2/depsdv",
        "d2h2/depsdtheta",
        "d2h2/deps2",
    ];
    let analytic = h_second_closed_form(field);
    // the two rows differ in scale; compare each against its own row
    report.push_matrix("h_second_row1", &labels[..6], &analytic[..6], &fd[..6], 2);
    report.push_matrix("h_second_row2", &labels[6..], &analytic[6..], &fd[6..], 2);
    Ok(report)
}

/// Checks the closed-form `g` derivatives at the base point against finite
/// differences of [`solve_theta`], including `d^2 g / deps^2 = 0`.
pub fn g_derivative_check(field: &PhaseField) -> Result<DerivReport> {
    let base = ReducedPoint::base(field);
    let vm = field.shock.left.v;
    let g_at = |p: ReducedPoint| solve_theta(&p, field).map(|(a, b)| [a, b]);
    let mut report = DerivReport::default();

    let shift = |k: usize, t: f64| {
        let mut p = base;
        match k {
            0 => p.v += t,
            1 => p.vp += t,
            2 => p.vpp += t,
            _ => p.eps += t,
        }
        p
    };
    let mut cols = [[0.0; 2]; 4];
    for (k, col) in cols.iter_mut().enumerate() {
        let h = if k == 0 { FD_STEP_FIRST * vm } else { FD_STEP_FIRST };
        *col = central(&|t| g_at(shift(k, t)), h)?;
    }
    report.push_matrix(
        "gder",
        &["dg1/dv", "dg1/dv'", "dg1/dv''", "dg1/deps", "dg2/dv", "dg2/dv'", "dg2/dv''", "dg2/deps"],
        &g_first_closed_form(field),
        &[cols[0][0], cols[1][0], cols[2][0], cols[3][0], cols[0][1], cols[1][1], cols[2][1], cols[3][1]],
        1,
    );

    let hv = FD_STEP_SECOND * vm;
    let he = FD_STEP_SECOND;
    let vv = second(&|x, _| g_at(shift(0, x)), hv, hv, true)?;
    let ve = second(
        &|x, y| {
            let mut p = shift(0, x);
            p.eps += y;
            g_at(p)
        },
        hv,
        he,
        false,
    )?;
    let ee = second(&|x, _| g_at(shift(3, x)), he, he, true)?;
    let analytic = g_second_closed_form(field);
    report.push_matrix("g_second_g1", &["d2g1/dv2", "d2g1/dvdeps"], &analytic[..2], &[vv[0], ve[0]], 2);
    report.push_matrix("g_second_g2", &["d2g2/dv2", "d2g2/dvdeps"], &analytic[2..], &[vv[1], ve[1]], 2);
    // eps-curvature vanishes identically; compare against the block's scale
    let scale = analytic.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for (label, value) in [("d2g1/deps2", ee[0]), ("d2g2/deps2", ee[1])] {
        report.entries.push(DerivEntry {
            matrix_name: "g_eps_eps".into(),
            entry: label.into(),
            analytic: 0.0,
            fd: value,
            rel_err: value.abs() / scale,
            order: 2,
        });
    }
    Ok(report)
}

/// A profile sample in slow-fast coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowFastSample {
    pub z: f64,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

/// `w0 = (v - v-)/eps`, `w1 = v'/eps^2`, `w2 = v''/eps^2`, `z = eps xi` with the
/// signed jump `eps = v+ - v-`.
pub fn to_slow_fast(profile: &Profile) -> Result<Vec<SlowFastSample>> {
    let eps = profile.shock.signed_eps();
    if eps == 0.0 {
        return Err(Error::DegenerateAmplitude(0.0));
    }
    let vm = profile.shock.left.v;
    let e2 = eps * eps;
    Ok(profile
        .xi
        .iter()
        .zip(&profile.states)
        .zip(profile.d1.iter().zip(&profile.d2))
        .map(|((xi, s), (d1, d2))| SlowFastSample {
            z: eps * xi,
            w0: (s.v - vm) / eps,
            w1: d1[0] / e2,
            w2: d2[0] / e2,
        })
        .collect())
}

/// `A w0 (1 - w0)`.
pub fn critical_manifold(w0: f64, a: f64) -> f64 {
    a * w0 * (1.0 - w0)
}

/// `sup |w1 - A w0 (1 - w0)| / |eps|` over the samples.
pub fn manifold_deviation(samples: &[SlowFastSample], a: f64, eps: f64) -> f64 {
    samples.iter().map(|s| (s.w1 - critical_manifold(s.w0, a)).abs()).fold(0.0, f64::max) / eps.abs()
}

/// Roots of `w0 -> g2(v- + eps w0, 0, 0, eps)` on `range`, located by a dense
/// sign scan and refined by bisection.
pub fn critical_point_scan(field: &PhaseField, range: (f64, f64)) -> Result<Vec<f64>> {
    const CELLS: usize = 400;
    let eps = field.shock.signed_eps();
    if eps == 0.0 {
        return Err(Error::DegenerateAmplitude(0.0));
    }
    let vm = field.shock.left.v;
    let g2 = |w0: f64| -> Result<f64> {
        let p = ReducedPoint { v: vm + eps * w0, vp: 0.0, vpp: 0.0, eps };
        Ok(solve_theta(&p, field)?.1)
    };
    let (lo, hi) = range;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.iter().all(|x| (x - r).abs() > 1e-6) {
            roots.push(r);
        }
    };
    let width = (hi - lo) / CELLS as f64;
    let mut a = lo;
    let mut fa = g2(a)?;
    for k in 1..=CELLS {
        let b = if k == CELLS { hi } else { lo + width * k as f64 };
        let fb = g2(b)?;
        if fa == 0.0 {
            push(a, &mut roots);
        } else if fa * fb < 0.0 {
            let (mut x0, mut x1, mut f0) = (a, b, fa);
            while x1 - x0 > 1e-13 {
                let mid = 0.5 * (x0 + x1);
                let fm = g2(mid)?;
                if fm == 0.0 {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if (fm < 0.0) == (f0 < 0.0) {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
            }
            push(0.5 * (x0 + x1), &mut roots);
        }
        if k == CELLS && fb == 0.0 {
            push(b, &mut roots);
        }
        a = b;
        fa = fb;
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}
