//! Construction of the heteroclinic profile by shooting along the unstable
//! direction of the left end state.
//!
//! Internally everything runs on deviations `state - left`, which keeps the
//! tails (where the deviation from an end state is many orders of magnitude
//! below the state itself) accurate. 1-shock profiles are computed as
//! reflections of the mirrored 3-shock.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{GasConstants, State};
use crate::hugoniot::{Family, ShockData};
use crate::integrate::{self, Control, Point, Settings};
use crate::linalg::{self, Vec3};
use crate::profile_ode::{end_state_eigenstructure, PhaseField};

/// Header of the profile CSV format.
pub const CSV_HEADER: [&str; 10] = ["xi", "v", "u", "theta", "dv", "du", "dtheta", "d2v", "d2u", "d2theta"];

/// Solver settings for [`shoot`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Endpoint tolerance in units of `eps`.
    pub tol_end_factor: f64,
    /// Span cap in units of `1/(|A| eps)`.
    pub xi_cap_factor: f64,
    /// Launch offset in units of `eps v-`.
    pub launch_offset_factor: f64,
    /// Launch along the opposite branch of the unstable manifold.
    pub reverse_ray: bool,
    pub max_steps: usize,
    /// Profiles with fewer samples are refined up to at least this many.
    pub min_samples: usize,
    /// Retries with halved tolerances after a rejection storm.
    pub max_retries: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            tol_end_factor: 1e-8,
            xi_cap_factor: 40.0,
            launch_offset_factor: 1e-6,
            reverse_ray: false,
            max_steps: 2_000_000,
            min_samples: 2000,
            max_retries: 2,
        }
    }
}

impl ShootOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("tol_end_factor", self.tol_end_factor),
            ("xi_cap_factor", self.xi_cap_factor),
            ("launch_offset_factor", self.launch_offset_factor),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        if self.launch_offset_factor >= 0.01 {
            return Err(Error::InvalidParameter(format!(
                "launch_offset_factor = {} is too large for the linearization",
                self.launch_offset_factor
            )));
        }
        Ok(())
    }
}

/// Bookkeeping of a shot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tol_end: f64,
    pub launch_offset: f64,
    /// Position of the launch point on the normalized grid.
    pub launch_xi: f64,
    pub unstable_eigenvalue: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
    pub retries: usize,
    /// Samples filled from the linearized unstable manifold.
    pub tail_samples: usize,
    /// Distance of the last integrated state to the right end state.
    pub endpoint_error: f64,
}

/// A sampled traveling-wave profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub states: Vec<State>,
    /// `(v', u', theta')` from the field.
    pub d1: Vec<Vec3>,
    /// `(v'', u'', theta'')` as `J_F F`.
    pub d2: Vec<Vec3>,
    pub shock: ShockData,
    pub solver_meta: SolverMeta,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.xi.len();
        if self.states.len() != n || self.d1.len() != n || self.d2.len() != n {
            return Err(Error::ProfileData("column lengths differ".into()));
        }
        if n < 2 {
            return Err(Error::ProfileData(format!("{n} samples are too few")));
        }
        if self.xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ProfileData("xi grid is not strictly increasing".into()));
        }
        Ok(())
    }

    /// Midpoint value `(v- + v+)/2`.
    pub fn v_mid(&self) -> f64 {
        0.5 * (self.shock.left.v + self.shock.right.v)
    }

    /// Largest distance of the first and last samples to their end states.
    pub fn endpoint_errors(&self) -> (f64, f64) {
        let dist = |s: &State, e: &State| linalg::norm(&linalg::sub(&s.to_array(), &e.to_array()));
        (dist(&self.states[0], &self.shock.left), dist(&self.states[self.len() - 1], &self.shock.right))
    }

    /// Whether every sample carries the derivative sign pattern of its family:
    /// `(+, -, -)` for 3-shocks and `(-, -, +)` for 1-shocks.
    pub fn sign_pattern_ok(&self) -> bool {
        let want = match self.shock.family {
            Family::Three => [1.0, -1.0, -1.0],
            Family::One => [-1.0, -1.0, 1.0],
        };
        self.d1.iter().all(|d| (0..3).all(|i| d[i] * want[i] > 0.0))
    }

    /// Whether `v` is strictly monotone in the direction of the jump.
    pub fn strictly_monotone(&self) -> bool {
        let s = self.shock.signed_eps().signum();
        self.states.windows(2).all(|w| (w[1].v - w[0].v) * s > 0.0)
    }
}

/// Builds the profile of the field's shock.
pub fn shoot(field: &PhaseField, opts: &ShootOptions) -> Result<Profile> {
    opts.validate()?;
    if field.shock.eps == 0.0 {
        return Err(Error::DegenerateAmplitude(0.0));
    }
    match field.shock.family {
        Family::Three => shoot_three(field, opts),
        Family::One => {
            let mirrored = field.mirrored()?;
            let mut p = reflect(&shoot_three(&mirrored, opts)?, &field.gas);
            p.shock = field.shock.clone();
            Ok(p)
        }
    }
}

#[derive(Clone, Copy)]
struct Sample {
    xi: f64,
    d: Vec3,
    f: Vec3,
}

fn shoot_three(field: &PhaseField, opts: &ShootOptions) -> Result<Profile> {
    let eig = end_state_eigenstructure(field)?;
    let lambda = eig.unstable_eigenvalue;
    let ray = if opts.reverse_ray { eig.unstable_direction.map(|x| -x) } else { eig.unstable_direction };
    let eps = field.shock.eps;
    let delta = opts.launch_offset_factor * eps * field.shock.left.v;
    let d0 = ray.map(|x| delta * x);
    let f0 = field.rhs_dev(&d0)?;
    if let Some(detail) = octant_violation(&d0, &f0) {
        return Err(Error::LeftOctant { xi: 0.0, detail: format!("at launch, {detail}") });
    }

    let mut opts_try = *opts;
    let mut retries = 0;
    let (samples, stats) = loop {
        match integrate_forward(field, &d0, &opts_try) {
            Err(Error::Integration(msg)) if retries < opts.max_retries && msg.contains("rejected") => {
                log::warn!("{msg}; retrying with halved tolerances");
                opts_try.rel_tol *= 0.5;
                opts_try.abs_tol *= 0.5;
                retries += 1;
            }
            other => break other?,
        }
    };

    let mut tail = linear_tail(field, &d0, lambda, opts, 1)?;
    let mut samples = samples;
    let total = tail.len() + samples.len();
    if total < opts.min_samples {
        let factor = opts.min_samples.div_ceil(total - 1);
        tail = linear_tail(field, &d0, lambda, opts, factor)?;
        samples = subdivide(field, &samples, factor)?;
    }
    let tail_samples = tail.len();
    let mut all = tail;
    all.extend(samples);
    insert_midpoint(field, &mut all)?;

    let mid = 0.5 * field.shock.signed_eps();
    let shift = all.iter().find(|s| s.d[0] == mid).map(|s| s.xi).ok_or(Error::MidpointNotBracketed)?;

    let mut profile = Profile {
        xi: Vec::with_capacity(all.len()),
        states: Vec::with_capacity(all.len()),
        d1: Vec::with_capacity(all.len()),
        d2: Vec::with_capacity(all.len()),
        shock: field.shock.clone(),
        solver_meta: SolverMeta {
            rel_tol: opts_try.rel_tol,
            abs_tol: opts_try.abs_tol,
            tol_end: opts.tol_end_factor * eps,
            launch_offset: delta,
            launch_xi: -shift,
            unstable_eigenvalue: lambda,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            evaluations: stats.evaluations,
            retries,
            tail_samples,
            endpoint_error: 0.0,
        },
    };
    for s in &all {
        let j = field.jacobian_dev(&s.d)?;
        profile.xi.push(s.xi - shift);
        profile.states.push(field.state_from_deviation(&s.d));
        profile.d1.push(s.f);
        profile.d2.push(linalg::mat_vec(&j, &s.f));
    }
    let last = &all[all.len() - 1].d;
    profile.solver_meta.endpoint_error = linalg::norm(&linalg::sub(last, &field.right_deviation()));
    Ok(profile)
}

fn octant_violation(d: &Vec3, f: &Vec3) -> Option<String> {
    if !(d[0] > 0.0 && d[1] < 0.0 && d[2] < 0.0) {
        return Some(format!("deviation {d:?} is outside the monotone octant"));
    }
    if !(f[0] > 0.0 && f[1] < 0.0 && f[2] < 0.0) {
        return Some(format!("derivative {f:?} has the wrong sign pattern"));
    }
    None
}

fn integrate_forward(
    field: &PhaseField,
    d0: &Vec3,
    opts: &ShootOptions,
) -> Result<(Vec<Sample>, integrate::Stats)> {
    let eps = field.shock.eps;
    let target = field.right_deviation();
    let tol_end = opts.tol_end_factor * eps;
    let xi_cap = opts.xi_cap_factor / (field.tail_constant().abs() * eps);
    let settings = Settings {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        initial_step: 0.1,
        max_steps: opts.max_steps,
        max_rejections: 100,
    };
    let mut samples = Vec::new();
    let mut closest = (f64::INFINITY, 0.0);
    let stats = integrate::integrate(
        |d| field.rhs_dev(d),
        0.0,
        *d0,
        &settings,
        // keep the fast contracting modes inside the stability region
        |d| match field.jacobian_dev(d) {
            Ok(j) => 2.5 / linalg::inf_norm3(&j),
            Err(_) => 1e-3,
        },
        |p: &Point| {
            if let Some(detail) = octant_violation(&p.y, &p.f) {
                return Control::Abort(Error::LeftOctant { xi: p.t, detail });
            }
            samples.push(Sample { xi: p.t, d: p.y, f: p.f });
            let dist = linalg::norm(&linalg::sub(&p.y, &target));
            if dist < closest.0 {
                closest = (dist, p.t);
            }
            if dist <= tol_end {
                Control::Stop
            } else if p.t > xi_cap {
                Control::Abort(Error::MissedRightState { closest: closest.0, xi: closest.1 })
            } else {
                Control::Continue
            }
        },
    )?;
    Ok((samples, stats))
}

/// Samples of the linearized unstable manifold `delta e^{lambda xi} e_u`
/// behind the launch point, down to `|v - v-| <= tol_end / 2`.
fn linear_tail(
    field: &PhaseField,
    d0: &Vec3,
    lambda: f64,
    opts: &ShootOptions,
    density: usize,
) -> Result<Vec<Sample>> {
    let floor = 0.5 * opts.tol_end_factor * field.shock.eps;
    if d0[0] <= floor {
        return Ok(Vec::new());
    }
    let span = (d0[0] / floor).ln() / lambda;
    // spacing of 0.02 e-folds, or finer
    let n = ((span * lambda / 0.02).ceil() as usize).max(2) * density;
    let dxi = span / n as f64;
    let mut out = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        let xi = -(k as f64) * dxi;
        let scale = (lambda * xi).exp();
        let d = d0.map(|x| x * scale);
        out.push(Sample { xi, d, f: field.rhs_dev(&d)? });
    }
    Ok(out)
}

/// Splits every step into `factor` pieces by Runge-Kutta steps of fractional
/// length from its start.
fn subdivide(field: &PhaseField, samples: &[Sample], factor: usize) -> Result<Vec<Sample>> {
    let mut rhs = |d: &Vec3| field.rhs_dev(d);
    let mut out = Vec::with_capacity(samples.len() * factor);
    for w in samples.windows(2) {
        out.push(w[0]);
        let h = w[1].xi - w[0].xi;
        for j in 1..factor {
            let s = h * j as f64 / factor as f64;
            let (d, f, _) = integrate::dp5_step(&mut rhs, &w[0].d, &w[0].f, s)?;
            out.push(Sample { xi: w[0].xi + s, d, f });
        }
    }
    if let Some(last) = samples.last() {
        out.push(*last);
    }
    Ok(out)
}

/// Inserts a sample whose `v` deviation is exactly half the jump, obtained by
/// a single Runge-Kutta step of secant-tuned length from the preceding sample.
fn insert_midpoint(field: &PhaseField, samples: &mut Vec<Sample>) -> Result<()> {
    let mid = 0.5 * field.shock.signed_eps();
    let k = samples
        .windows(2)
        .position(|w| w[0].d[0] < mid && mid <= w[1].d[0])
        .ok_or(Error::MidpointNotBracketed)?;
    if samples[k + 1].d[0] == mid {
        return Ok(());
    }
    let (base, f0) = (samples[k].d, samples[k].f);
    let h = samples[k + 1].xi - samples[k].xi;
    let mut rhs = |d: &Vec3| field.rhs_dev(d);
    let mut phi = |s: f64| -> Result<(f64, Vec3, Vec3)> {
        let (y, f, _) = integrate::dp5_step(&mut rhs, &base, &f0, s)?;
        Ok((y[0] - mid, y, f))
    };
    // Illinois-modified regula falsi on [0, h]
    let (mut a, mut fa) = (0.0, samples[k].d[0] - mid);
    let (mut b, mut fb) = (h, phi(h)?.0);
    let mut best = if fa.abs() < fb.abs() { a } else { b };
    let mut side = 0;
    for _ in 0..100 {
        let s = b - fb * (b - a) / (fb - fa);
        let (fs, _, _) = phi(s)?;
        best = s;
        if fs == 0.0 || (b - a).abs() <= 1e-15 * h {
            break;
        }
        if (fs < 0.0) == (fb < 0.0) {
            b = s;
            fb = fs;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = s;
            fa = fs;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    let (_, mut y, f) = phi(best)?;
    // the remaining defect is at the rounding level
    y[0] = mid;
    let xi = samples[k].xi + best;
    if !(xi > samples[k].xi && xi < samples[k + 1].xi) {
        return Err(Error::MidpointNotBracketed);
    }
    samples.insert(k + 1, Sample { xi, d: y, f });
    Ok(())
}

/// Cubic Hermite interpolation of the states at `xi`; also returns the
/// derivative of the interpolant.
pub fn interpolate(profile: &Profile, xi: f64) -> Result<(State, Vec3)> {
    let n = profile.len();
    if n < 2 || !(xi >= profile.xi[0] && xi <= profile.xi[n - 1]) {
        return Err(Error::ProfileData(format!("xi = {xi} is outside the profile grid")));
    }
    let k = match profile.xi.partition_point(|&x| x <= xi) {
        0 => 0,
        i if i >= n => n - 2,
        i => i - 1,
    };
    let (y, dy) = hermite(profile, k, xi);
    Ok((State::from_array(y), dy))
}

fn hermite(profile: &Profile, k: usize, xi: f64) -> (Vec3, Vec3) {
    let (x0, x1) = (profile.xi[k], profile.xi[k + 1]);
    let h = x1 - x0;
    let t = (xi - x0) / h;
    let (y0, y1) = (profile.states[k].to_array(), profile.states[k + 1].to_array());
    let (m0, m1) = (profile.d1[k], profile.d1[k + 1]);
    let t2 = t * t;
    let t3 = t2 * t;
    let (h00, h10, h01, h11) = (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2);
    let (g00, g10, g01, g11) =
        (6.0 * t2 - 6.0 * t, 3.0 * t2 - 4.0 * t + 1.0, -6.0 * t2 + 6.0 * t, 3.0 * t2 - 2.0 * t);
    let mut y = [0.0; 3];
    let mut dy = [0.0; 3];
    for i in 0..3 {
        y[i] = h00 * y0[i] + h10 * h * m0[i] + h01 * y1[i] + h11 * h * m1[i];
        dy[i] = (g00 * y0[i] + g01 * y1[i]) / h + g10 * m0[i] + g11 * m1[i];
    }
    (y, dy)
}

/// Shifts the grid so that `v(0) = (v- + v+)/2`.
///
/// When no sample sits on the midpoint, one is inserted from the dense
/// output (second derivatives interpolated linearly).
pub fn normalize_phase(profile: &Profile) -> Result<Profile> {
    profile.check_shape()?;
    let mid = profile.v_mid();
    let scale = profile.shock.eps.max(f64::MIN_POSITIVE);
    let g = |s: &State| (s.v - mid) * profile.shock.signed_eps().signum();
    let mut out = profile.clone();
    let (k_close, s_close) = profile
        .states
        .iter()
        .enumerate()
        .min_by(|a, b| g(a.1).abs().total_cmp(&g(b.1).abs()))
        .expect("profile is non-empty");
    let shift = if g(s_close).abs() <= 1e-13 * scale {
        profile.xi[k_close]
    } else {
        let k = profile
            .states
            .windows(2)
            .position(|w| g(&w[0]) < 0.0 && g(&w[1]) > 0.0)
            .ok_or(Error::MidpointNotBracketed)?;
        let (mut a, mut b) = (profile.xi[k], profile.xi[k + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(&State::from_array(hermite(profile, k, m).0)) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let xi = 0.5 * (a + b);
        let (mut y, dy) = hermite(profile, k, xi);
        y[0] = mid;
        let t = (xi - profile.xi[k]) / (profile.xi[k + 1] - profile.xi[k]);
        let (p, q) = (profile.d2[k], profile.d2[k + 1]);
        out.xi.insert(k + 1, xi);
        out.states.insert(k + 1, State::from_array(y));
        out.d1.insert(k + 1, dy);
        out.d2.insert(k + 1, [0, 1, 2].map(|i| (1.0 - t) * p[i] + t * q[i]));
        xi
    };
    if shift != 0.0 {
        for x in &mut out.xi {
            *x -= shift;
        }
        out.solver_meta.launch_xi -= shift;
    }
    Ok(out)
}

/// Mirror image under `xi -> -xi`, `u -> -u`: maps a 3-shock profile to the
/// 1-shock profile of the reflected end states and back.
pub fn reflect(profile: &Profile, gas: &GasConstants) -> Profile {
    let n = profile.len();
    let mut out = Profile {
        xi: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        d1: Vec::with_capacity(n),
        d2: Vec::with_capacity(n),
        shock: profile.shock.reflect(gas),
        solver_meta: SolverMeta { launch_xi: -profile.solver_meta.launch_xi, ..profile.solver_meta },
    };
    for k in (0..n).rev() {
        let (s, a, b) = (&profile.states[k], profile.d1[k], profile.d2[k]);
        out.xi.push(-profile.xi[k]);
        out.states.push(State { v: s.v, u: -s.u, theta: s.theta });
        out.d1.push([-a[0], a[1], -a[2]]);
        out.d2.push([b[0], -b[1], b[2]]);
    }
    out
}

/// Subdivides every grid interval into `factor` pieces using the dense
/// output: Hermite states and derivatives, linearly interpolated second
/// derivatives.
pub fn refine(profile: &Profile, factor: usize) -> Result<Profile> {
    profile.check_shape()?;
    if factor <= 1 {
        return Ok(profile.clone());
    }
    let n = profile.len();
    let cap = (n - 1) * factor + 1;
    let mut out = Profile {
        xi: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        d1: Vec::with_capacity(cap),
        d2: Vec::with_capacity(cap),
        shock: profile.shock.clone(),
        solver_meta: profile.solver_meta,
    };
    for k in 0..n - 1 {
        out.xi.push(profile.xi[k]);
        out.states.push(profile.states[k]);
        out.d1.push(profile.d1[k]);
        out.d2.push(profile.d2[k]);
        let h = profile.xi[k + 1] - profile.xi[k];
        let (p, q) = (profile.d2[k], profile.d2[k + 1]);
        for j in 1..factor {
            let t = j as f64 / factor as f64;
            let xi = profile.xi[k] + h * t;
            let (y, dy) = hermite(profile, k, xi);
            out.xi.push(xi);
            out.states.push(State::from_array(y));
            out.d1.push(dy);
            out.d2.push([0, 1, 2].map(|i| (1.0 - t) * p[i] + t * q[i]));
        }
    }
    out.xi.push(profile.xi[n - 1]);
    out.states.push(profile.states[n - 1]);
    out.d1.push(profile.d1[n - 1]);
    out.d2.push(profile.d2[n - 1]);
    Ok(out)
}

/// Largest mismatch between the stored first derivatives and the field,
/// relative to the largest field value along the profile.
pub fn ode_residual(profile: &Profile, field: &PhaseField) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (s, d1) in profile.states.iter().zip(&profile.d1) {
        let f = field.rhs_dev(&field.deviation(s))?;
        scale = scale.max(f.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        worst = worst.max((0..3).fold(0.0f64, |m, i| m.max((d1[i] - f[i]).abs())));
    }
    Ok(worst / scale)
}

/// Largest mismatch between centered finite-difference slopes of the states
/// and the stored first derivatives at interior samples, relative to the
/// largest derivative along the profile. Simpson-type weighting makes the
/// comparison third-order accurate on non-uniform grids.
pub fn slope_residual(profile: &Profile) -> f64 {
    let scale = profile.d1.iter().flat_map(|d| d.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    for k in 1..profile.len().saturating_sub(1) {
        let (hl, hr) = (profile.xi[k] - profile.xi[k - 1], profile.xi[k + 1] - profile.xi[k]);
        let (a, b, c) = (
            profile.states[k - 1].to_array(),
            profile.states[k].to_array(),
            profile.states[k + 1].to_array(),
        );
        for i in 0..3 {
            let fd = (hl * hl * (c[i] - b[i]) + hr * hr * (b[i] - a[i])) / (hl * hr * (hl + hr));
            worst = worst.max((fd - profile.d1[k][i]).abs());
        }
    }
    worst / scale
}

/// Writes the profile as CSV with 17 significant digits per value.
pub fn write_csv<W: Write>(profile: &Profile, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for k in 0..profile.len() {
        let s = &profile.states[k];
        let (a, b) = (profile.d1[k], profile.d2[k]);
        let row = [profile.xi[k], s.v, s.u, s.theta, a[0], a[1], a[2], b[0], b[1], b[2]];
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a profile written by [`write_csv`]; the shock data travels separately.
pub fn read_csv<R: Read>(reader: R, shock: ShockData) -> Result<Profile> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != CSV_HEADER {
        return Err(Error::ProfileData(format!("unexpected header {header:?}")));
    }
    let mut p = Profile {
        xi: Vec::new(),
        states: Vec::new(),
        d1: Vec::new(),
        d2: Vec::new(),
        shock,
        solver_meta: SolverMeta::default(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut x = [0.0; 10];
        if rec.len() != 10 {
            return Err(Error::ProfileData(format!("row {} has {} fields", line + 2, rec.len())));
        }
        for (slot, field) in x.iter_mut().zip(rec.iter()) {
            *slot = field
                .trim()
                .parse()
                .map_err(|e| Error::ProfileData(format!("row {}: cannot parse `{field}`: {e}", line + 2)))?;
        }
        p.xi.push(x[0]);
        p.states.push(State { v: x[1], u: x[2], theta: x[3] });
        p.d1.push([x[4], x[5], x[6]]);
        p.d2.push([x[7], x[8], x[9]]);
    }
    p.check_shape()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::TransportModel;

    fn field(model: &str, eps: f64, family: Family) -> PhaseField {
        let params: &[f64] = if model == "constant" { &[1.0] } else { &[] };
        PhaseField::from_left(
            State::new(1.0, 0.0, 1.0).unwrap(),
            eps,
            family,
            GasConstants::default(),
            TransportModel::builtin(model, params).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn shot_reaches_right_state_monotonically() {
        let f = field("constant", 0.05, Family::Three);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        assert!(p.len() >= 2000);
        let (l, r) = p.endpoint_errors();
        assert!(r <= 1e-8 * 0.05, "{r:e}");
        assert!((p.states[0].v - 1.0).abs() <= 1e-8 * 0.05, "{l:e}");
        assert!(p.strictly_monotone());
        assert!(p.sign_pattern_ok());
        let k = p.xi.iter().position(|&x| x == 0.0).unwrap();
        assert!((p.states[k].v - p.v_mid()).abs() <= 1e-10);
    }

    #[test]
    fn reversed_ray_is_rejected() {
        let f = field("constant", 0.05, Family::Three);
        let opts = ShootOptions { reverse_ray: true, ..Default::default() };
        assert!(matches!(shoot(&f, &opts), Err(Error::LeftOctant { .. })));
    }

    #[test]
    fn normalization_is_idempotent_and_undoes_shifts() {
        let f = field("eek", 0.05, Family::Three);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        assert_eq!(normalize_phase(&p).unwrap().xi, p.xi);
        let mut q = p.clone();
        q.xi.iter_mut().for_each(|x| *x += 3.0);
        let back = normalize_phase(&q).unwrap();
        assert_eq!(back.len(), p.len());
        for (a, b) in back.xi.iter().zip(&p.xi) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn normalization_inserts_a_midpoint_sample() {
        let f = field("constant", 0.1, Family::Three);
        let mut p = shoot(&f, &ShootOptions::default()).unwrap();
        let k = p.xi.iter().position(|&x| x == 0.0).unwrap();
        p.xi.remove(k);
        p.states.remove(k);
        p.d1.remove(k);
        p.d2.remove(k);
        let q = normalize_phase(&p).unwrap();
        let k = q.xi.iter().position(|&x| x == 0.0).unwrap();
        assert!((q.states[k].v - q.v_mid()).abs() <= 1e-10);
        let (s, _) = interpolate(&q, 0.0).unwrap();
        assert!((s.v - q.v_mid()).abs() <= 1e-10);
    }

    #[test]
    fn one_shock_is_the_reflection() {
        let f1 = field("constant", 0.05, Family::One);
        let p = shoot(&f1, &ShootOptions::default()).unwrap();
        assert!(p.sign_pattern_ok());
        assert!(p.strictly_monotone());
        assert_eq!(p.shock, f1.shock);
        assert!(ode_residual(&p, &f1).unwrap() <= 1e-9);
        let (l, r) = p.endpoint_errors();
        assert!(l.max(r) <= 1e-8 * 0.05);
    }

    #[test]
    fn reflect_twice_is_identity() {
        let f = field("eek", 0.1, Family::Three);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        let q = reflect(&reflect(&p, &f.gas), &f.gas);
        assert_eq!(q.xi, p.xi);
        assert_eq!(q.states, p.states);
        assert_eq!(q.d1, p.d1);
        assert_eq!(q.d2, p.d2);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = field("constant", 0.1, Family::Three);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("xi,v,u,theta,dv,du,dtheta,d2v,d2u,d2theta\n"));
        let q = read_csv(buf.as_slice(), p.shock.clone()).unwrap();
        assert_eq!(q.xi, p.xi);
        assert_eq!(q.states, p.states);
        assert_eq!(q.d1, p.d1);
        assert_eq!(q.d2, p.d2);
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let f = field("constant", 0.1, Family::Three);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        let (s, d) = interpolate(&p, p.xi[10]).unwrap();
        assert_eq!(s, p.states[10]);
        assert!((d[0] - p.d1[10][0]).abs() <= 1e-15);
        assert!(interpolate(&p, p.xi[0] - 1.0).is_err());
    }

    #[test]
    fn zero_amplitude_is_rejected() {
        let mut f = field("constant", 0.1, Family::Three);
        f.shock.eps = 0.0;
        assert!(matches!(shoot(&f, &ShootOptions::default()), Err(Error::DegenerateAmplitude(_))));
    }
}
