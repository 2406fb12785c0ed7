//! Ideal polytropic gas and temperature-dependent transport coefficients.
//!
//! All quantities are nondimensional. The three transport coefficients are the
//! Brenner coefficient `tau`, the viscosity `mu` and the heat conductivity
//! `kappa`; each is a positive function of temperature alone, evaluated together
//! with its first two derivatives.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluations below this temperature are rejected.
pub const THETA_GUARD: f64 = 1e-12;

/// Gas constant and adiabatic exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    #[serde(rename = "R")]
    pub r: f64,
    pub gamma: f64,
}

impl GasConstants {
    pub fn new(r: f64, gamma: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParameter(format!("gas constant R must be positive, got {r}")));
        }
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { r, gamma })
    }

    /// `p = R theta / v`.
    pub fn pressure(&self, state: &State) -> f64 {
        self.r * state.theta / state.v
    }

    /// `e = R theta / (gamma - 1)`.
    pub fn internal_energy(&self, theta: f64) -> f64 {
        self.r * theta / (self.gamma - 1.0)
    }

    /// `E = e + u^2 / 2`.
    pub fn total_energy(&self, state: &State) -> f64 {
        self.internal_energy(state.theta) + 0.5 * state.u * state.u
    }
}

impl Default for GasConstants {
    fn default() -> Self {
        Self { r: 1.0, gamma: 1.4 }
    }
}

/// A point `(v, u, theta)` of phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub v: f64,
    pub u: f64,
    pub theta: f64,
}

impl State {
    pub fn new(v: f64, u: f64, theta: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("specific volume must be positive, got {v}")));
        }
        if !u.is_finite() {
            return Err(Error::InvalidParameter(format!("velocity must be finite, got {u}")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParameter(format!("temperature must be positive, got {theta}")));
        }
        Ok(Self { v, u, theta })
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v, self.u, self.theta]
    }

    /// Builds a state from raw components without validation.
    pub fn from_array(a: [f64; 3]) -> Self {
        Self { v: a[0], u: a[1], theta: a[2] }
    }
}

/// Value, first and second derivative of a coefficient at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn scale(self, s: f64) -> Self {
        Self { value: s * self.value, d1: s * self.d1, d2: s * self.d2 }
    }
}

/// A scalar coefficient law `theta -> (value, d/dtheta, d2/dtheta2)`.
///
/// Implementations only compute; positivity and the temperature guard are
/// enforced by [`TransportModel::eval`].
pub trait Coefficient: fmt::Debug + Send + Sync {
    fn jet(&self, theta: f64) -> Jet;
}

/// `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Coefficient for Constant {
    fn jet(&self, _theta: f64) -> Jet {
        Jet { value: self.0, d1: 0.0, d2: 0.0 }
    }
}

/// `scale * theta^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub scale: f64,
    pub exponent: f64,
}

impl Coefficient for PowerLaw {
    fn jet(&self, theta: f64) -> Jet {
        let b = self.exponent;
        let value = self.scale * theta.powf(b);
        Jet { value, d1: b * value / theta, d2: b * (b - 1.0) * value / (theta * theta) }
    }
}

/// `c0 + c2 theta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenQuadratic {
    pub c0: f64,
    pub c2: f64,
}

impl Coefficient for EvenQuadratic {
    fn jet(&self, theta: f64) -> Jet {
        Jet { value: self.c0 + self.c2 * theta * theta, d1: 2.0 * self.c2 * theta, d2: 2.0 * self.c2 }
    }
}

/// Coefficient jets at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub tau: Jet,
    pub mu: Jet,
    pub kappa: Jet,
}

/// The coefficient triple `(tau, mu, kappa)`.
#[derive(Debug, Clone)]
pub struct TransportModel {
    name: String,
    params: Vec<f64>,
    tau: Arc<dyn Coefficient>,
    mu: Arc<dyn Coefficient>,
    kappa: Arc<dyn Coefficient>,
}

impl TransportModel {
    /// Assembles a model from arbitrary coefficient laws.
    pub fn custom(
        name: impl Into<String>,
        tau: Arc<dyn Coefficient>,
        mu: Arc<dyn Coefficient>,
        kappa: Arc<dyn Coefficient>,
    ) -> Self {
        Self { name: name.into(), params: Vec::new(), tau, mu, kappa }
    }

    /// Builds one of the named models.
    ///
    /// * `constant`: `[c]` for `tau = mu = kappa = c`, or `[c_tau, c_mu, c_kappa]`.
    /// * `power_law`: `[c, beta]` for `c theta^beta` in all three slots, or
    ///   `[c_tau, c_mu, c_kappa, beta]`.
    /// * `eek`: no parameters; `tau = 1 + theta^2`, `mu = kappa = theta^2`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self> {
        if let Some(bad) = params.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "coefficient parameters must be positive, got {bad}"
            )));
        }
        let (tau, mu, kappa): (Arc<dyn Coefficient>, Arc<dyn Coefficient>, Arc<dyn Coefficient>) =
            match (name, params.len()) {
                ("constant", 1) => {
                    let c = Arc::new(Constant(params[0]));
                    (c.clone(), c.clone(), c)
                }
                ("constant", 3) => (
                    Arc::new(Constant(params[0])),
                    Arc::new(Constant(params[1])),
                    Arc::new(Constant(params[2])),
                ),
                ("power_law", 2) => {
                    let c = Arc::new(PowerLaw { scale: params[0], exponent: params[1] });
                    (c.clone(), c.clone(), c)
                }
                ("power_law", 4) => {
                    let b = params[3];
                    (
                        Arc::new(PowerLaw { scale: params[0], exponent: b }),
                        Arc::new(PowerLaw { scale: params[1], exponent: b }),
                        Arc::new(PowerLaw { scale: params[2], exponent: b }),
                    )
                }
                ("eek", 0) => {
                    let sq = Arc::new(EvenQuadratic { c0: 0.0, c2: 1.0 });
                    (Arc::new(EvenQuadratic { c0: 1.0, c2: 1.0 }), sq.clone(), sq)
                }
                ("constant" | "power_law" | "eek", n) => {
                    return Err(Error::InvalidParameter(format!(
                        "model `{name}` does not accept {n} parameter(s)"
                    )))
                }
                _ => return Err(Error::UnknownModel(name.to_string())),
            };
        Ok(Self { name: name.to_string(), params: params.to_vec(), tau, mu, kappa })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Evaluates all three coefficients, enforcing the temperature guard and
    /// positivity of every value.
    pub fn eval(&self, theta: f64) -> Result<Coefficients> {
        if !(theta >= THETA_GUARD) {
            return Err(Error::TemperatureOutOfRange { theta, guard: THETA_GUARD });
        }
        let check = |name: &'static str, jet: Jet| {
            if jet.value > 0.0 && jet.value.is_finite() {
                Ok(jet)
            } else {
                Err(Error::NonPositiveCoefficient { name, theta, value: jet.value })
            }
        };
        Ok(Coefficients {
            tau: check("tau", self.tau.jet(theta))?,
            mu: check("mu", self.mu.jet(theta))?,
            kappa: check("kappa", self.kappa.jet(theta))?,
        })
    }

    /// The same model with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        #[derive(Debug)]
        struct Scaled(Arc<dyn Coefficient>, f64);
        impl Coefficient for Scaled {
            fn jet(&self, theta: f64) -> Jet {
                self.0.jet(theta).scale(self.1)
            }
        }
        Self {
            name: format!("{}*{}", self.name, factor),
            params: self.params.clone(),
            tau: Arc::new(Scaled(self.tau.clone(), factor)),
            mu: Arc::new(Scaled(self.mu.clone(), factor)),
            kappa: Arc::new(Scaled(self.kappa.clone(), factor)),
        }
    }
}

/// Shorthand for [`GasConstants::pressure`].
pub fn pressure(state: &State, gas: &GasConstants) -> f64 {
    gas.pressure(state)
}

/// Shorthand for [`TransportModel::builtin`].
pub fn builtin_models(name: &str, params: &[f64]) -> Result<TransportModel> {
    TransportModel::builtin(name, params)
}
