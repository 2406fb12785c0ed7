//! Rankine-Hugoniot jump relations and the Lax entropy condition.
//!
//! A shock is parameterized by its left state, the amplitude `eps = |v+ - v-|`
//! and the wave family; the right state then follows in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{GasConstants, State};

/// Amplitudes above `EPS_CEILING * v-` are rejected.
pub const EPS_CEILING: f64 = 0.2;
/// Amplitudes above `EPS_WARN * v-` are accepted with a warning.
pub const EPS_WARN: f64 = 0.05;

/// Wave family. 3-shocks move right (`sigma > 0`, `v- < v+`), 1-shocks move
/// left (`sigma < 0`, `v- > v+`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Family {
    One,
    Three,
}

impl Family {
    /// Sign of the shock speed, equal to the sign of `v+ - v-`.
    pub fn sign(self) -> f64 {
        match self {
            Family::One => -1.0,
            Family::Three => 1.0,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Family::One => Family::Three,
            Family::Three => Family::One,
        }
    }
}

impl TryFrom<u8> for Family {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, String> {
        match value {
            1 => Ok(Family::One),
            3 => Ok(Family::Three),
            other => Err(format!("shock family must be 1 or 3, got {other}")),
        }
    }
}

impl From<Family> for u8 {
    fn from(f: Family) -> u8 {
        match f {
            Family::One => 1,
            Family::Three => 3,
        }
    }
}

/// Shock speed for a left state and signed volume jump `dv = v+ - v-`.
///
/// `sigma^2 = gamma p- / (v- + (gamma + 1) dv / 2)`, which is `-(p+ - p-)/(v+ - v-)`
/// on the Hugoniot locus. The sign follows `dv` (zero counts as a 3-shock).
pub(crate) fn signed_speed(left: &State, dv: f64, sign: f64, gas: &GasConstants) -> Result<f64> {
    let denom = left.v + 0.5 * (gas.gamma + 1.0) * dv;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitude {} outside the validity range of the shock speed formula",
            dv.abs()
        )));
    }
    Ok(sign * (gas.gamma * gas.pressure(left) / denom).sqrt())
}

/// `sigma_eps` for the given amplitude and family; equals `sigma_*` at `eps = 0`.
pub fn shock_speed(left: &State, eps: f64, family: Family, gas: &GasConstants) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude must be non-negative, got {eps}")));
    }
    signed_speed(left, family.sign() * eps, family.sign(), gas)
}

/// Zero-amplitude speed `sigma_* = +-sqrt(gamma p- / v-)`.
pub fn limiting_speed(left: &State, family: Family, gas: &GasConstants) -> f64 {
    family.sign() * (gas.gamma * gas.pressure(left) / left.v).sqrt()
}

/// Right end state from the first two jump relations and the gas law.
pub fn right_state(left: &State, eps: f64, family: Family, gas: &GasConstants) -> Result<State> {
    let sigma = shock_speed(left, eps, family, gas)?;
    let dv = family.sign() * eps;
    let v = left.v + dv;
    let u = left.u - sigma * dv;
    let p = gas.pressure(left) - sigma * sigma * dv;
    let theta = p * v / gas.r;
    if !(theta > 0.0) || !(v > 0.0) {
        return Err(Error::NonPositiveTemperature(theta));
    }
    Ok(State { v, u, theta })
}

/// Defects of the three jump relations for `(left, right, sigma)`.
pub fn rh_residual(left: &State, right: &State, sigma: f64, gas: &GasConstants) -> [f64; 3] {
    let (pl, pr) = (gas.pressure(left), gas.pressure(right));
    [
        -sigma * (right.v - left.v) - (right.u - left.u),
        -sigma * (right.u - left.u) + pr - pl,
        -sigma * (gas.total_energy(right) - gas.total_energy(left)) + pr * right.u - pl * left.u,
    ]
}

/// [`rh_residual`] divided componentwise by the magnitude of the terms it balances.
pub fn rh_residual_relative(left: &State, right: &State, sigma: f64, gas: &GasConstants) -> [f64; 3] {
    let raw = rh_residual(left, right, sigma, gas);
    let (pl, pr) = (gas.pressure(left), gas.pressure(right));
    let (el, er) = (gas.total_energy(left), gas.total_energy(right));
    let scales = [
        sigma.abs() * (right.v.abs() + left.v.abs()) + right.u.abs() + left.u.abs(),
        sigma.abs() * (right.u.abs() + left.u.abs()) + pr + pl,
        sigma.abs() * (er + el) + (pr * right.u).abs() + (pl * left.u).abs(),
    ];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = if scales[i] > 0.0 { raw[i].abs() / scales[i] } else { raw[i].abs() };
    }
    out
}

/// Classifies an ordered pair of end states by the Lax sign pattern.
pub fn check_lax(left: &State, right: &State) -> Result<Family> {
    if left.v > right.v && left.u > right.u && left.theta < right.theta {
        Ok(Family::One)
    } else if left.v < right.v && left.u > right.u && left.theta > right.theta {
        Ok(Family::Three)
    } else {
        Err(Error::LaxViolation(format!(
            "v- = {}, v+ = {}, u- = {}, u+ = {}, theta- = {}, theta+ = {}",
            left.v, right.v, left.u, right.u, left.theta, right.theta
        )))
    }
}

/// End states, speeds and family of one viscous shock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ShockRecord", try_from = "ShockRecord")]
pub struct ShockData {
    pub left: State,
    pub right: State,
    /// Amplitude `|v+ - v-|`.
    pub eps: f64,
    pub sigma_eps: f64,
    pub sigma_star: f64,
    pub family: Family,
    /// Tail-law constant, filled once transport coefficients are known.
    pub a: Option<f64>,
}

impl ShockData {
    /// Constructs the shock of amplitude `eps` emanating from `left`.
    pub fn new(left: State, eps: f64, family: Family, gas: &GasConstants) -> Result<Self> {
        let ceiling = EPS_CEILING * left.v;
        if eps > ceiling {
            return Err(Error::AmplitudeTooLarge { eps, ceiling });
        }
        if eps > EPS_WARN * left.v {
            log::warn!(
                "amplitude eps = {eps} exceeds {EPS_WARN} v-; the small-amplitude theory may not apply"
            );
        }
        let right = right_state(&left, eps, family, gas)?;
        Ok(Self {
            left,
            right,
            eps,
            sigma_eps: shock_speed(&left, eps, family, gas)?,
            sigma_star: limiting_speed(&left, family, gas),
            family,
            a: None,
        })
    }

    /// Signed jump `v+ - v-`.
    pub fn signed_eps(&self) -> f64 {
        self.right.v - self.left.v
    }

    /// Shock seen under `x -> -x, u -> -u`: end states swap, velocities flip
    /// sign and the family changes. The limiting speed refers to the new
    /// left state; the tail constant is cleared.
    pub fn reflect(&self, gas: &GasConstants) -> Self {
        let flip = |s: &State| State { v: s.v, u: -s.u, theta: s.theta };
        let left = flip(&self.right);
        let family = self.family.mirrored();
        Self {
            left,
            right: flip(&self.left),
            eps: self.eps,
            sigma_eps: -self.sigma_eps,
            sigma_star: limiting_speed(&left, family, gas),
            family,
            a: None,
        }
    }

    pub fn residual(&self, gas: &GasConstants) -> [f64; 3] {
        rh_residual_relative(&self.left, &self.right, self.sigma_eps, gas)
    }
}

/// Flat wire form of [`ShockData`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ShockRecord {
    v_minus: f64,
    u_minus: f64,
    theta_minus: f64,
    v_plus: f64,
    u_plus: f64,
    theta_plus: f64,
    eps: f64,
    sigma_eps: f64,
    sigma_star: f64,
    family: Family,
    #[serde(rename = "A")]
    a: Option<f64>,
}

impl From<ShockData> for ShockRecord {
    fn from(s: ShockData) -> Self {
        Self {
            v_minus: s.left.v,
            u_minus: s.left.u,
            theta_minus: s.left.theta,
            v_plus: s.right.v,
            u_plus: s.right.u,
            theta_plus: s.right.theta,
            eps: s.eps,
            sigma_eps: s.sigma_eps,
            sigma_star: s.sigma_star,
            family: s.family,
            a: s.a,
        }
    }
}

impl TryFrom<ShockRecord> for ShockData {
    type Error = String;

    fn try_from(r: ShockRecord) -> std::result::Result<Self, String> {
        let left = State::new(r.v_minus, r.u_minus, r.theta_minus).map_err(|e| e.to_string())?;
        let right = State::new(r.v_plus, r.u_plus, r.theta_plus).map_err(|e| e.to_string())?;
        Ok(Self {
            left,
            right,
            eps: r.eps,
            sigma_eps: r.sigma_eps,
            sigma_star: r.sigma_star,
            family: r.family,
            a: r.a,
        })
    }
}
