use bnsf_shock::hugoniot::{check_lax, rh_residual_relative};
use bnsf_shock::{Family, GasConstants, PhaseField, ShockData, State, TransportModel};
use proptest::prelude::*;

fn model(kind: u8, a: f64, b: f64) -> TransportModel {
    match kind % 3 {
        0 => TransportModel::builtin("constant", &[a]),
        1 => TransportModel::builtin("power_law", &[a, b]),
        _ => TransportModel::builtin("eek", &[]),
    }
    .unwrap()
}

fn family(three: bool) -> Family {
    if three {
        Family::Three
    } else {
        Family::One
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_jets_match_differences(kind in 0u8..3, a in 0.5..2.0f64, b in 0.1..1.5f64, theta in 0.3..3.0f64) {
        let m = model(kind, a, b);
        let h = 1e-5;
        let (c, lo, hi) = (m.eval(theta).unwrap(), m.eval(theta - h).unwrap(), m.eval(theta + h).unwrap());
        for (j, jl, jh) in [(c.tau, lo.tau, hi.tau), (c.mu, lo.mu, hi.mu), (c.kappa, lo.kappa, hi.kappa)] {
            prop_assert!(j.value > 0.0);
            prop_assert!((j.d1 - (jh.value - jl.value) / (2.0 * h)).abs() <= 1e-6 * (1.0 + j.d1.abs()));
            prop_assert!((j.d2 - (jh.d1 - jl.d1) / (2.0 * h)).abs() <= 1e-6 * (1.0 + j.d2.abs()));
        }
    }

    #[test]
    fn pressure_is_homogeneous(r in 0.5..2.0f64, gamma in 1.05..2.0f64, v in 0.5..2.0f64, theta in 0.5..2.0f64, k in 0.5..2.0f64) {
        let gas = GasConstants::new(r, gamma).unwrap();
        let p = gas.pressure(&State::new(v, 0.0, theta).unwrap());
        let q = gas.pressure(&State::new(k * v, 0.0, k * theta).unwrap());
        prop_assert!((p - q).abs() <= 1e-14 * p);
        prop_assert!((p - r * theta / v).abs() <= 1e-14 * p);
    }

    #[test]
    fn jump_relations_and_lax(
        gamma in 1.05..2.0f64, v in 0.5..2.0f64, u in -1.0..1.0f64, theta in 0.5..2.0f64,
        rel in 1e-3..0.15f64, three in any::<bool>(),
    ) {
        let gas = GasConstants::new(1.0, gamma).unwrap();
        let left = State::new(v, u, theta).unwrap();
        let shock = ShockData::new(left, rel * v, family(three), &gas).unwrap();
        let res = rh_residual_relative(&shock.left, &shock.right, shock.sigma_eps, &gas);
        prop_assert!(res.iter().all(|r| *r <= 1e-10), "{res:?}");
        prop_assert_eq!(check_lax(&shock.left, &shock.right).unwrap(), family(three));
        prop_assert!((shock.sigma_eps.abs() - shock.sigma_star.abs()).abs() <= gamma * rel * shock.sigma_star.abs());
    }

    #[test]
    fn end_states_are_critical_points(
        kind in 0u8..3, gamma in 1.05..2.0f64, v in 0.5..2.0f64, theta in 0.5..2.0f64,
        rel in 1e-3..0.05f64, three in any::<bool>(),
    ) {
        let gas = GasConstants::new(1.0, gamma).unwrap();
        let left = State::new(v, 0.3, theta).unwrap();
        let f = PhaseField::from_left(left, rel * v, family(three), gas, model(kind, 1.0, 0.5)).unwrap();
        let a = f.rhs_dev(&[0.0; 3]).unwrap();
        let b = f.rhs_dev(&f.right_deviation()).unwrap();
        prop_assert!(a.iter().chain(&b).all(|x| x.abs() <= 1e-12), "{a:?} {b:?}");
    }

    #[test]
    fn jacobian_matches_differences(
        kind in 0u8..3, gamma in 1.05..2.0f64, rel in 1e-3..0.05f64, s in 0.0..1.0f64, three in any::<bool>(),
    ) {
        let gas = GasConstants::new(1.0, gamma).unwrap();
        let f = PhaseField::from_left(State::new(1.0, 0.0, 1.0).unwrap(), rel, family(three), gas, model(kind, 1.3, 0.7)).unwrap();
        let r = f.right_deviation();
        let d = [s * r[0], s * r[1], s * r[2]];
        let j = f.jacobian_dev(&d).unwrap();
        let h = 1e-6;
        for c in 0..3 {
            let (mut lo, mut hi) = (d, d);
            lo[c] -= h;
            hi[c] += h;
            let (fl, fh) = (f.rhs_dev(&lo).unwrap(), f.rhs_dev(&hi).unwrap());
            for row in 0..3 {
                let fd = (fh[row] - fl[row]) / (2.0 * h);
                prop_assert!((j[row][c] - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "J[{row}][{c}] {} vs {fd}", j[row][c]);
            }
        }
    }
}
