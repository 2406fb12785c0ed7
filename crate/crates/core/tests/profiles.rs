use bnsf_shock::shooting::{interpolate, read_csv, write_csv};
use bnsf_shock::verify::{resolution_check, theta_recovery_error};
use bnsf_shock::{
    normalize_phase, shoot, sweep, verify_profile, Family, GasConstants, PhaseField, ShootOptions, State,
    SweepTemplate, TransportModel,
};

fn field(model: &str, params: &[f64], eps: f64) -> PhaseField {
    PhaseField::from_left(
        State::new(1.0, 0.0, 1.0).unwrap(),
        eps,
        Family::Three,
        GasConstants::default(),
        TransportModel::builtin(model, params).unwrap(),
    )
    .unwrap()
}

// classical RK4 with a fixed step, started from the stored launch sample
#[test]
fn fixed_step_rk4_follows_the_shot() {
    let f = field("constant", &[1.0], 0.05);
    let p = shoot(&f, &ShootOptions::default()).unwrap();
    let k0 = p.xi.iter().position(|x| *x == p.solver_meta.launch_xi).unwrap();
    let rhs = |d: [f64; 3]| f.rhs_dev(&d).unwrap();
    let mut d = f.deviation(&p.states[k0]);
    let mut xi = p.xi[k0];
    let h = 0.01;
    let end = 2.0 / (f.tail_constant() * 0.05);
    let mut worst = 0.0f64;
    while xi < end {
        let k1 = rhs(d);
        let k2 = rhs(std::array::from_fn(|i| d[i] + 0.5 * h * k1[i]));
        let k3 = rhs(std::array::from_fn(|i| d[i] + 0.5 * h * k2[i]));
        let k4 = rhs(std::array::from_fn(|i| d[i] + h * k3[i]));
        d = std::array::from_fn(|i| d[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        xi += h;
        let (s, _) = interpolate(&p, xi).unwrap();
        let e = f.deviation(&s);
        worst = (0..3).fold(worst, |m, i| m.max((e[i] - d[i]).abs()));
    }
    assert!(worst <= 1e-8 * 0.05, "{worst:e}");
}

#[test]
fn power_law_profile_is_monotone() {
    let f = field("power_law", &[1.0, 0.5], 0.05);
    let p = shoot(&f, &ShootOptions::default()).unwrap();
    assert!(p.strictly_monotone() && p.sign_pattern_ok());
    let r = verify_profile(&p, &f.gas, f.tail_constant()).unwrap();
    assert!(r.finite() && r.sign_ok && r.equivalence_ok && r.derivdecay_ok, "{r:?}");
    assert!(theta_recovery_error(&p, &f).unwrap() <= 1e-8);
}

#[test]
fn csv_round_trip_gives_identical_report() {
    let f = field("eek", &[], 0.05);
    let p = normalize_phase(&shoot(&f, &ShootOptions::default()).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_csv(&p, &mut buf).unwrap();
    let q = read_csv(buf.as_slice(), p.shock.clone()).unwrap();
    let a = verify_profile(&p, &f.gas, f.tail_constant()).unwrap();
    let b = verify_profile(&q, &f.gas, f.tail_constant()).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn constants_survive_refinement() {
    for (model, params) in [("constant", &[1.0][..]), ("eek", &[][..])] {
        let f = field(model, params, 0.0125);
        let p = shoot(&f, &ShootOptions::default()).unwrap();
        let r = resolution_check(&p, &f.gas, f.tail_constant(), 4).unwrap();
        assert!(r.resolved, "{model}: {:?}", r.changes);
    }
}

#[test]
fn sweep_is_thread_count_independent() {
    let template = SweepTemplate {
        left: State::new(1.0, 0.0, 1.0).unwrap(),
        family: Family::One,
        gas: GasConstants::default(),
        coeffs: TransportModel::builtin("constant", &[1.0]).unwrap(),
        options: ShootOptions::default(),
    };
    let eps = [0.04, 0.02, 0.01];
    let a = sweep(&template, &eps, Some(1)).unwrap();
    let b = sweep(&template, &eps, Some(3)).unwrap();
    assert!(a.uniform, "{:?}", a.max_ratio);
    assert_eq!(a.reports, b.reports);
}
