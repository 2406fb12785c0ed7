//! Measured constants of the small-amplitude estimates on computed profiles.
//!
//! Every constant is a supremum over the stored samples of the ratio that the
//! corresponding estimate bounds. The estimates only assert that such
//! constants exist independently of `eps`, so [`sweep`] compares them across
//! successive halvings of the amplitude.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{GasConstants, State, TransportModel};
use crate::hugoniot::Family;
use crate::profile_ode::PhaseField;
use crate::shooting::{self, Profile, ShootOptions};
use crate::slow_fast;

/// Fit window for the tail decay rates, in units of `eps`.
pub const FIT_WINDOW: (f64, f64) = (1e-7, 0.1);
/// Slack on the pointwise derivative-decay bound.
pub const DECAY_SLACK: f64 = 1.2;
/// Largest admissible growth of a constant under one halving of `eps`.
pub const UNIFORMITY_RATIO: f64 = 1.5;
/// Largest admissible relative change of a constant under 4x refinement.
pub const RESOLUTION_TOL: f64 = 0.05;

/// Constants measured on one profile.
///
/// Suprema run over the samples with `|v - v-|, |v - v+| >= 1e-7 eps`, the
/// lower edge of the tail fit window; `sign_ok` covers every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub eps: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub samples: usize,
    /// `sup |v' - A (v+ - v)(v - v-)| / (eps (v+ - v)(v - v-))`.
    #[serde(rename = "C_tail")]
    pub c_tail: f64,
    /// `sup |u' + sigma_* v'| / (eps |v'|)`.
    #[serde(rename = "C_ratio_u")]
    pub c_ratio_u: f64,
    /// `sup |theta' + (gamma - 1) p- v' / R| / (eps |v'|)`.
    #[serde(rename = "C_ratio_th")]
    pub c_ratio_th: f64,
    /// `sup |(v'', u'', theta'')| / (eps |(v', u', theta')|)`.
    #[serde(rename = "C_second")]
    pub c_second: f64,
    pub decay_rate_left: f64,
    pub decay_rate_right: f64,
    /// `|A| eps`.
    pub decay_rate_expected: f64,
    /// `sup |y'/(y (1 - y)) - |A| eps| / eps^2` with `y = (v - v-)/(v+ - v-)`.
    #[serde(rename = "C_jac")]
    pub c_jac: f64,
    pub sign_ok: bool,
    /// `|sigma_eps - sigma_*| / eps`.
    pub sigma_gap: f64,
    /// Decay exponent `min(rate_left, rate_right) / eps`.
    #[serde(rename = "C1")]
    pub c1: f64,
    /// `sup |v'| exp(C1 eps |xi|) / eps^2`.
    #[serde(rename = "C_decay")]
    pub c_decay: f64,
    /// Envelope constant from the tail-fit intercepts.
    #[serde(rename = "C_decay_fit")]
    pub c_decay_fit: f64,
    /// `|v'| <= 1.2 C_decay_fit eps^2 exp(-C1 eps |xi|)` at every sample.
    pub derivdecay_ok: bool,
    /// Bound `K` on the derivative ratios `|u'|/|v'|`, `|theta'|/|v'|`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Extreme derivative ratios `[min, max]` for `u` and `theta`.
    pub ratio_range_u: [f64; 2],
    pub ratio_range_th: [f64; 2],
    /// All derivative ratios lie in `[1/K, K]`.
    pub equivalence_ok: bool,
    /// `sup |w1 - A w0 (1 - w0)| / eps` in slow-fast coordinates.
    #[serde(rename = "C_fit")]
    pub c_fit: f64,
}

impl EstimateReport {
    /// The constants that must stay bounded as `eps -> 0`, by name.
    pub fn constants(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("C_tail", self.c_tail),
            ("C_ratio_u", self.c_ratio_u),
            ("C_ratio_th", self.c_ratio_th),
            ("C_second", self.c_second),
            ("C_decay", self.c_decay),
            ("C1", self.c1),
            ("C_jac", self.c_jac),
            ("C_fit", self.c_fit),
        ]
    }

    /// All constants finite and positive.
    pub fn finite(&self) -> bool {
        self.constants().iter().all(|(_, c)| c.is_finite() && *c > 0.0)
    }
}

/// Least-squares line through `(xi, ln|deviation|)` on one tail.
#[derive(Debug, Clone, Copy)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `ln|v - v_end|` on the samples of one tail whose distance to the end
/// state lies in the fit window. The data must reach below the lower edge of
/// the window, otherwise the tail counts as under-resolved.
pub fn fit_tail(profile: &Profile, left: bool) -> Result<TailFit> {
    let tail = if left { "left" } else { "right" };
    let eps = profile.shock.eps;
    let (lo, hi) = (FIT_WINDOW.0 * eps, FIT_WINDOW.1 * eps);
    let end = if left { profile.shock.left.v } else { profile.shock.right.v };
    let mid = profile.v_mid();
    let sign = profile.shock.signed_eps().signum();
    let on_side = |s: &State| if left { (s.v - mid) * sign < 0.0 } else { (s.v - mid) * sign > 0.0 };
    let mut reached = false;
    let mut pts = Vec::new();
    for (xi, s) in profile.xi.iter().zip(&profile.states) {
        if !on_side(s) {
            continue;
        }
        let dist = (s.v - end).abs();
        if dist < lo {
            reached = true;
        } else if dist <= hi {
            pts.push((*xi, dist.ln()));
        }
    }
    if !reached || pts.len() < 3 {
        return Err(Error::EmptyFitWindow { tail });
    }
    let (slope, intercept) = least_squares(&pts);
    Ok(TailFit { slope, intercept, points: pts.len() })
}

fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Measures every estimate on `profile` with tail constant `a`.
pub fn verify_profile(profile: &Profile, gas: &GasConstants, a: f64) -> Result<EstimateReport> {
    if profile.len() < 3 {
        return Err(Error::ProfileData(format!("{} samples are too few", profile.len())));
    }
    let shock = &profile.shock;
    let eps = shock.eps;
    if !(eps > 0.0) {
        return Err(Error::DegenerateAmplitude(eps));
    }
    let eps_s = shock.signed_eps();
    let (vm, vp) = (shock.left.v, shock.right.v);
    let p_minus = gas.pressure(&shock.left);
    let th_slope = (gas.gamma - 1.0) * p_minus / gas.r;

    let left_fit = fit_tail(profile, true)?;
    let right_fit = fit_tail(profile, false)?;
    let rate_left = left_fit.slope;
    let rate_right = -right_fit.slope;
    let c1 = rate_left.min(rate_right) / eps;
    // |v - v_end| ~ exp(intercept -+ rate xi), so |v'| ~ rate exp(intercept) exp(-rate |xi|)
    let c_decay_fit =
        (rate_left * left_fit.intercept.exp()).max(rate_right * right_fit.intercept.exp()) / (eps * eps);

    // the ratios tend to |sigma_*| and (gamma - 1) p- / R, which may lie on
    // either side of 1, so the band is made symmetric under inversion
    let k = 2.0 * [shock.sigma_star.abs(), th_slope].iter().fold(1.0f64, |m, x| m.max(*x).max(1.0 / x));
    let mut r = EstimateReport {
        eps,
        a,
        samples: profile.len(),
        c_tail: 0.0,
        c_ratio_u: 0.0,
        c_ratio_th: 0.0,
        c_second: 0.0,
        decay_rate_left: rate_left,
        decay_rate_right: rate_right,
        decay_rate_expected: a.abs() * eps,
        c_jac: 0.0,
        sign_ok: profile.sign_pattern_ok(),
        sigma_gap: (shock.sigma_eps - shock.sigma_star).abs() / eps,
        c1,
        c_decay: 0.0,
        c_decay_fit,
        derivdecay_ok: true,
        k,
        ratio_range_u: [f64::INFINITY, 0.0],
        ratio_range_th: [f64::INFINITY, 0.0],
        equivalence_ok: true,
        c_fit: 0.0,
    };

    for ((xi, s), (d1, d2)) in profile.xi.iter().zip(&profile.states).zip(profile.d1.iter().zip(&profile.d2))
    {
        let vd = d1[0];
        let below = s.v - vm;
        let above = vp - s.v;
        // the outermost decade of each tail is at the rounding level of the
        // stored states; ratios there carry no information
        if below.abs().min(above.abs()) < FIT_WINDOW.0 * eps {
            continue;
        }
        let prod = below * above;
        if prod > 0.0 {
            let gap = (vd - a * prod).abs();
            r.c_tail = r.c_tail.max(gap / (eps * prod));
            r.c_fit = r.c_fit.max(gap / (eps * eps * eps));
            // y = below / eps_s, y' = v' / eps_s, y (1 - y) = prod / eps_s^2
            let jac = vd * eps_s / prod;
            r.c_jac = r.c_jac.max((jac - a.abs() * eps).abs() / (eps * eps));
        }
        if vd != 0.0 {
            r.c_ratio_u = r.c_ratio_u.max((d1[1] + shock.sigma_star * vd).abs() / (eps * vd.abs()));
            r.c_ratio_th = r.c_ratio_th.max((d1[2] + th_slope * vd).abs() / (eps * vd.abs()));
            let (ru, rt) = (d1[1].abs() / vd.abs(), d1[2].abs() / vd.abs());
            r.ratio_range_u = [r.ratio_range_u[0].min(ru), r.ratio_range_u[1].max(ru)];
            r.ratio_range_th = [r.ratio_range_th[0].min(rt), r.ratio_range_th[1].max(rt)];
        }
        let n1 = norm(d1);
        if n1 > 0.0 {
            r.c_second = r.c_second.max(norm(d2) / (eps * n1));
        }
        let envelope = (c1 * eps * xi.abs()).exp();
        r.c_decay = r.c_decay.max(vd.abs() * envelope / (eps * eps));
        if vd.abs() * envelope > DECAY_SLACK * c_decay_fit * eps * eps {
            r.derivdecay_ok = false;
        }
    }
    r.equivalence_ok = [r.ratio_range_u, r.ratio_range_th].iter().all(|[lo, hi]| *lo >= 1.0 / k && *hi <= k);
    Ok(r)
}

/// Effect of 4x dense-output refinement on the measured constants.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionReport {
    pub factor: usize,
    /// Relative change per constant.
    pub changes: BTreeMap<String, f64>,
    pub max_change: f64,
    pub resolved: bool,
}

/// Re-measures the profile after refining its dense output `factor` times
/// and compares.
pub fn resolution_check(
    profile: &Profile,
    gas: &GasConstants,
    a: f64,
    factor: usize,
) -> Result<ResolutionReport> {
    let base = verify_profile(profile, gas, a)?;
    let fine = verify_profile(&shooting::refine(profile, factor)?, gas, a)?;
    let mut pairs = base.constants();
    pairs.push(("decay_rate_left", base.decay_rate_left));
    pairs.push(("decay_rate_right", base.decay_rate_right));
    let mut fine_pairs = fine.constants();
    fine_pairs.push(("decay_rate_left", fine.decay_rate_left));
    fine_pairs.push(("decay_rate_right", fine.decay_rate_right));
    let mut changes = BTreeMap::new();
    for ((name, c), (_, f)) in pairs.into_iter().zip(fine_pairs) {
        changes.insert(name.to_string(), (f - c).abs() / c.abs());
    }
    let max_change = changes.values().fold(0.0f64, |m, x| m.max(*x));
    Ok(ResolutionReport { factor, changes, max_change, resolved: max_change <= RESOLUTION_TOL })
}

/// Everything that defines a family of shocks except the amplitude.
#[derive(Debug, Clone)]
pub struct SweepTemplate {
    pub left: State,
    pub family: Family,
    pub gas: GasConstants,
    pub coeffs: TransportModel,
    pub options: ShootOptions,
}

impl SweepTemplate {
    pub fn field(&self, eps: f64) -> Result<PhaseField> {
        PhaseField::from_left(self.left, eps, self.family, self.gas, self.coeffs.clone())
    }
}

/// Constants across a descending list of amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub eps: Vec<f64>,
    pub reports: Vec<EstimateReport>,
    /// Largest growth factor `C(eps_{i+1}) / C(eps_i)` per constant.
    pub max_ratio: BTreeMap<String, f64>,
    pub uniform: bool,
}

/// Shoots and measures each amplitude (in parallel on at most `threads`
/// threads when given) and checks that no constant grows by more than
/// [`UNIFORMITY_RATIO`] from one amplitude to the next.
pub fn sweep(template: &SweepTemplate, eps_list: &[f64], threads: Option<usize>) -> Result<SweepReport> {
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty amplitude list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter(format!(
            "amplitudes must be strictly descending, got {eps_list:?}"
        )));
    }
    let run = |eps: f64| -> Result<EstimateReport> {
        let annotate = |e: Error| Error::Sweep { eps, source: Box::new(e) };
        let field = template.field(eps).map_err(annotate)?;
        let profile = shooting::shoot(&field, &template.options).map_err(annotate)?;
        verify_profile(&profile, &field.gas, field.tail_constant()).map_err(annotate)
    };
    let results: Vec<Result<EstimateReport>> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| eps_list.par_iter().map(|&e| run(e)).collect()),
        None => eps_list.par_iter().map(|&e| run(e)).collect(),
    };
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut max_ratio = BTreeMap::new();
    for (name, _) in reports[0].constants() {
        max_ratio.insert(name.to_string(), 1.0f64);
    }
    for pair in reports.windows(2) {
        for ((name, c0), (_, c1)) in pair[0].constants().into_iter().zip(pair[1].constants()) {
            let slot = max_ratio.get_mut(name).expect("same constant names");
            *slot = slot.max(c1 / c0);
        }
    }
    let uniform =
        max_ratio.values().all(|r| *r <= UNIFORMITY_RATIO) && reports.iter().all(EstimateReport::finite);
    Ok(SweepReport { eps: eps_list.to_vec(), reports, max_ratio, uniform })
}

/// Largest difference between `(theta, theta')` on the profile and the values
/// recovered from `(v, v', v'')` by [`slow_fast::solve_theta`].
pub fn theta_recovery_error(profile: &Profile, field: &PhaseField) -> Result<f64> {
    let eps = field.shock.signed_eps();
    let mut worst = 0.0f64;
    for ((s, d1), d2) in profile.states.iter().zip(&profile.d1).zip(&profile.d2) {
        let p = slow_fast::ReducedPoint { v: s.v, vp: d1[0], vpp: d2[0], eps };
        let (th, thp) = slow_fast::solve_theta(&p, field)?;
        worst = worst.max((th - s.theta).abs()).max((thp - d1[2]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(model: &str) -> SweepTemplate {
        let params: &[f64] = if model == "constant" { &[1.0] } else { &[] };
        SweepTemplate {
            left: State::new(1.0, 0.0, 1.0).unwrap(),
            family: Family::Three,
            gas: GasConstants::default(),
            coeffs: TransportModel::builtin(model, params).unwrap(),
            options: ShootOptions::default(),
        }
    }

    fn report(model: &str, eps: f64) -> (EstimateReport, Profile, PhaseField) {
        let t = template(model);
        let f = t.field(eps).unwrap();
        let p = shooting::shoot(&f, &t.options).unwrap();
        (verify_profile(&p, &f.gas, f.tail_constant()).unwrap(), p, f)
    }

    #[test]
    fn decay_rates_match_the_tail_law() {
        let (r, _, _) = report("constant", 0.0125);
        assert!((r.decay_rate_expected - 0.0097061).abs() < 1e-7);
        for rate in [r.decay_rate_left, r.decay_rate_right] {
            assert!((rate / r.decay_rate_expected - 1.0).abs() < 0.1, "{rate}");
        }
        assert!(r.sign_ok && r.finite());
    }

    #[test]
    fn midpoint_log_derivative() {
        let (r, p, _) = report("constant", 0.025);
        let k = p.xi.iter().position(|&x| x == 0.0).unwrap();
        let eps = p.shock.eps;
        let y = (p.states[k].v - p.shock.left.v) / eps;
        assert!((y - 0.5).abs() < 1e-10);
        let dy = p.d1[k][0] / eps;
        let jac = dy / (y * (1.0 - y));
        assert!((jac - r.a * eps).abs() <= r.c_jac * eps * eps);
    }

    #[test]
    fn sigma_gap_tends_to_the_first_order_coefficient() {
        let limit = 2.4 * 1.4f64.sqrt() / 4.0;
        let (r, _, _) = report("constant", 0.0125);
        assert!((r.sigma_gap - limit).abs() < 0.02 * limit, "{}", r.sigma_gap);
    }

    #[test]
    fn single_amplitude_sweep_is_uniform() {
        let s = sweep(&template("eek"), &[0.05], Some(1)).unwrap();
        assert!(s.uniform);
        assert!(s.max_ratio.values().all(|r| *r == 1.0));
    }

    #[test]
    fn ascending_amplitudes_are_rejected() {
        assert!(sweep(&template("eek"), &[0.025, 0.05], None).is_err());
    }

    #[test]
    fn truncated_tail_is_under_resolved() {
        let (_, mut p, f) = report("constant", 0.05);
        let keep = p.xi.iter().position(|&x| x > 10.0).unwrap();
        p.xi.truncate(keep);
        p.states.truncate(keep);
        p.d1.truncate(keep);
        p.d2.truncate(keep);
        assert!(matches!(
            verify_profile(&p, &f.gas, f.tail_constant()),
            Err(Error::EmptyFitWindow { tail: "right" })
        ));
    }

    #[test]
    fn theta_is_recovered_from_v() {
        let (_, p, f) = report("eek", 0.025);
        assert!(theta_recovery_error(&p, &f).unwrap() <= 1e-8);
    }
}
