//! The autonomous first-order field whose heteroclinic orbits are the
//! viscous shock profiles, its Jacobian, and the linearization at the left end
//! state.
//!
//! With `(dv, du, dth) = (v - v-, u - u-, theta - theta-)` the field reads
//!
//! ```text
//! v'     = v / tau(theta)   * ( -sigma dv - du )
//! u'     = v / mu(theta)    * ( -sigma du + p(v, theta) - p- )
//! theta' = v / kappa(theta) * ( -sigma (R/(gamma-1) dth + du^2/2) + p- du )
//! ```
//!
//! Internally everything is evaluated on the deviation vector from the left
//! state so that tails close to either end state keep their relative accuracy.

use crate::error::{Error, Result};
use crate::gas::{Coefficients, GasConstants, State, TransportModel};
use crate::hugoniot::{Family, ShockData};
use crate::linalg::{self, Mat3, Root, Vec3};
use crate::slow_fast;

/// Largest admissible Rankine-Hugoniot defect of the shock behind a field.
pub const RH_TOLERANCE: f64 = 1e-10;

/// Shock, gas and transport model bundled into an evaluable vector field.
#[derive(Debug, Clone)]
pub struct PhaseField {
    pub shock: ShockData,
    pub gas: GasConstants,
    pub coeffs: TransportModel,
    p_minus: f64,
    left_coeffs: Coefficients,
}

impl PhaseField {
    /// Validates the shock and fills in its tail constant `A`.
    pub fn new(mut shock: ShockData, gas: GasConstants, coeffs: TransportModel) -> Result<Self> {
        let res = shock.residual(&gas);
        let worst = res.iter().fold(0.0f64, |m, x| m.max(*x));
        if !(worst <= RH_TOLERANCE) {
            return Err(Error::InconsistentShock(worst));
        }
        let left_coeffs = coeffs.eval(shock.left.theta)?;
        shock.a = Some(slow_fast::tail_constant(&gas, &left_coeffs, shock.sigma_star));
        Ok(Self { p_minus: gas.pressure(&shock.left), shock, gas, coeffs, left_coeffs })
    }

    /// Shorthand for building the shock and the field in one go.
    pub fn from_left(
        left: State,
        eps: f64,
        family: Family,
        gas: GasConstants,
        coeffs: TransportModel,
    ) -> Result<Self> {
        Self::new(ShockData::new(left, eps, family, &gas)?, gas, coeffs)
    }

    /// The field of the reflected shock (`x -> -x`, `u -> -u`).
    pub fn mirrored(&self) -> Result<Self> {
        Self::new(self.shock.reflect(&self.gas), self.gas, self.coeffs.clone())
    }

    /// Tail-law constant `A` (signed like `sigma_*`).
    pub fn tail_constant(&self) -> f64 {
        self.shock.a.expect("tail constant is set on construction")
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    /// Coefficients evaluated at `theta-`.
    pub fn left_coefficients(&self) -> &Coefficients {
        &self.left_coeffs
    }

    pub fn left(&self) -> Vec3 {
        self.shock.left.to_array()
    }

    /// Deviation of the right state from the left state.
    pub fn right_deviation(&self) -> Vec3 {
        let (l, r) = (&self.shock.left, &self.shock.right);
        [r.v - l.v, r.u - l.u, r.theta - l.theta]
    }

    pub fn deviation(&self, state: &State) -> Vec3 {
        let l = &self.shock.left;
        [state.v - l.v, state.u - l.u, state.theta - l.theta]
    }

    pub fn state_from_deviation(&self, d: &Vec3) -> State {
        let l = &self.shock.left;
        State { v: l.v + d[0], u: l.u + d[1], theta: l.theta + d[2] }
    }

    /// `p(v, theta) - p-` computed without cancellation in the deviations.
    fn pressure_jump(&self, d: &Vec3) -> f64 {
        let l = &self.shock.left;
        let v = l.v + d[0];
        self.gas.r * (d[2] * l.v - l.theta * d[0]) / (v * l.v)
    }

    /// Field evaluated on a deviation vector.
    pub fn rhs_dev(&self, d: &Vec3) -> Result<Vec3> {
        let l = &self.shock.left;
        let (v, theta) = (l.v + d[0], l.theta + d[2]);
        if !(v > 0.0) {
            return Err(Error::InvalidParameter(format!("specific volume {v} left the domain")));
        }
        let c = self.coeffs.eval(theta)?;
        let s = self.shock.sigma_eps;
        let gm1 = self.gas.gamma - 1.0;
        let a = -s * d[0] - d[1];
        let b = -s * d[1] + self.pressure_jump(d);
        let k = -s * (self.gas.r / gm1 * d[2] - 0.5 * d[1] * d[1]) + self.p_minus * d[1];
        Ok([v * a / c.tau.value, v * b / c.mu.value, v * k / c.kappa.value])
    }

    /// Analytic Jacobian of [`Self::rhs_dev`].
    pub fn jacobian_dev(&self, d: &Vec3) -> Result<Mat3> {
        let l = &self.shock.left;
        let (v, theta) = (l.v + d[0], l.theta + d[2]);
        let c = self.coeffs.eval(theta)?;
        let (tau, mu, kappa) = (c.tau, c.mu, c.kappa);
        let s = self.shock.sigma_eps;
        let r = self.gas.r;
        let gm1 = self.gas.gamma - 1.0;
        let a = -s * d[0] - d[1];
        let b = -s * d[1] + self.pressure_jump(d);
        let k = -s * (r / gm1 * d[2] - 0.5 * d[1] * d[1]) + self.p_minus * d[1];
        let p = r * theta / v;
        Ok([
            [(a - s * v) / tau.value, -v / tau.value, -v * a * tau.d1 / (tau.value * tau.value)],
            [(b - p) / mu.value, -s * v / mu.value, r / mu.value - v * b * mu.d1 / (mu.value * mu.value)],
            [
                k / kappa.value,
                v * (s * d[1] + self.p_minus) / kappa.value,
                -s * r / gm1 * v / kappa.value - v * k * kappa.d1 / (kappa.value * kappa.value),
            ],
        ])
    }

    /// `(v', u', theta')` at `state`.
    pub fn rhs(&self, state: &State) -> Result<Vec3> {
        self.rhs_dev(&self.deviation(state))
    }

    /// Jacobian of [`Self::rhs`] with respect to `(v, u, theta)`.
    pub fn rhs_jacobian(&self, state: &State) -> Result<Mat3> {
        self.jacobian_dev(&self.deviation(state))
    }

    /// First and second derivatives along the trajectory through a deviation
    /// vector: `F` and `J_F F`.
    pub fn derivatives_dev(&self, d: &Vec3) -> Result<(Vec3, Vec3)> {
        let f = self.rhs_dev(d)?;
        let j = self.jacobian_dev(d)?;
        Ok((f, linalg::mat_vec(&j, &f)))
    }
}

/// Linearization at the end state the profile departs from.
#[derive(Debug, Clone)]
pub struct Eigenstructure {
    /// Eigenvalues, real ones first in descending order.
    pub eigenvalues: [Root; 3],
    pub unstable_eigenvalue: f64,
    /// Unit eigenvector of the unstable eigenvalue.
    pub unstable_direction: Vec3,
    pub det: f64,
    pub trace: f64,
}

/// Eigen-analysis of the Jacobian at the left end state of a 3-shock field.
///
/// Requires `det > 0`, `trace < 0` and exactly one eigenvalue with positive
/// real part (which is then real). The unstable direction is oriented with a
/// positive `v` component.
///
/// For a 1-shock the left state is a source (all three eigenvalues
/// positive); the analysis is carried out in the mirrored 3-shock frame
/// instead and the returned direction is mapped back to the tangent of
/// the profile at its right end (`v` component negative).
pub fn end_state_eigenstructure(field: &PhaseField) -> Result<Eigenstructure> {
    if field.shock.eps == 0.0 {
        return Err(Error::DegenerateAmplitude(0.0));
    }
    match field.shock.family {
        Family::Three => three_shock_eigenstructure(field),
        Family::One => {
            let mut e = three_shock_eigenstructure(&field.mirrored()?)?;
            let d = e.unstable_direction;
            e.unstable_direction = [-d[0], d[1], -d[2]];
            Ok(e)
        }
    }
}

fn three_shock_eigenstructure(field: &PhaseField) -> Result<Eigenstructure> {
    let j = field.jacobian_dev(&[0.0; 3])?;
    let det = linalg::det3(&j);
    let trace = linalg::trace3(&j);
    if !(det > 0.0) {
        return Err(Error::Classification(format!("determinant {det:e} is not positive")));
    }
    if !(trace < 0.0) {
        return Err(Error::Classification(format!("trace {trace:e} is not negative")));
    }
    let eigenvalues = linalg::cubic_roots(-trace, linalg::minor_sum3(&j), -det);
    let positive: Vec<&Root> = eigenvalues.iter().filter(|r| r.re > 0.0).collect();
    if positive.len() != 1 || positive[0].im != 0.0 {
        return Err(Error::Classification(format!(
            "expected exactly one positive real eigenvalue, got {eigenvalues:?}"
        )));
    }
    let lambda = positive[0].re;
    let mut dir = linalg::null_vector(&j, lambda);
    if dir[0] < 0.0 {
        dir = dir.map(|x| -x);
    }
    Ok(Eigenstructure { eigenvalues, unstable_eigenvalue: lambda, unstable_direction: dir, det, trace })
}
