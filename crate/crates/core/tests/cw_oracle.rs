mod common;

use common::*;
use cwpath::{Error, Model, Orbit, Position, State, StmBlocks, TransferGuard};
use proptest::prelude::*;

#[test]
fn stm_matches_rk4_at_600_s() {
    let model = model400();
    let blocks = model.stm_blocks(600.0).unwrap();
    let phi = blocks.state_matrix();
    for col in 0..6 {
        let mut e = [0.0; 6];
        e[col] = 1.0;
        let out = rk4(model.kappa(), e, 600.0, 0.1);
        for row in 0..6 {
            let scale = phi[row][col].abs().max(1.0);
            assert!((out[row] - phi[row][col]).abs() <= 1e-8 * scale, "({row},{col}) {} vs {}", out[row], phi[row][col]);
        }
    }
}

#[test]
fn propagate_unit_radial_offset_matches_rk4() {
    let model = model400();
    let s = State::new(Position::new(1.0, 0.0, 0.0), Position::zeros(), 0.0).unwrap();
    let out = model.propagate(&s, 500.0).unwrap();
    let oracle = rk4(model.kappa(), state(s.r, s.v), 500.0, 0.1);
    assert!((out.r - position(&oracle)).norm() < 1e-8);
    assert_eq!(out.t, 500.0);
}

#[test]
fn sampled_trajectory_matches_rk4() {
    let model = model400();
    let leg = model
        .transfer_leg(Position::new(1.0, 0.0, 0.0), Position::new(0.0, 1.0, 0.0), Position::zeros(), 900.0)
        .unwrap();
    let traj = model.sample_trajectory(&leg, 10).unwrap();
    let start = state(leg.r_i(), leg.departure_velocity());
    for (t, r) in &traj.samples {
        let oracle = if *t == 0.0 { start } else { rk4(model.kappa(), start, *t, 0.1) };
        assert!((position(&oracle) - *r).norm() < 1e-8);
    }
    assert!(traj.samples.windows(2).all(|w| w[1].0 > w[0].0));
    assert!(traj.samples[0].1.distance(&leg.r_i()) < 1e-9);
    assert!(traj.samples[9].1.distance(&leg.r_j()) < 1e-9);
}

#[test]
fn two_point_path_at_100_s_matches_propagation() {
    let model = model400();
    let (a, b) = (Position::new(1.0, 0.0, 0.0), Position::new(0.0, 1.0, 0.0));
    let r = model.trajectory_position(a, b, 200.0, 100.0).unwrap();
    let dv = model.impulse_for_transfer(a, b, Position::zeros(), 200.0).unwrap();
    let oracle = rk4(model.kappa(), state(a, dv), 100.0, 0.1);
    assert!((position(&oracle) - r).norm() < 1e-9);
}

#[test]
fn round_trip_and_two_point_equivalence_on_random_legs() {
    let model = model400();
    let mut g = rng(11);
    let mut worst_round = 0.0f64;
    let mut worst_eq9 = 0.0f64;
    for k in 0..1000 {
        let (r_i, r_j, v, dt) = random_leg(&mut g, &model);
        let dv = model.impulse_for_transfer(r_i, r_j, v, dt).unwrap();
        let s = State::new(r_i, v + dv, 0.0).unwrap();
        let end = model.propagate(&s, dt).unwrap();
        worst_round = worst_round.max((end.r - r_j).norm());
        let t = dt * ((k % 97) as f64 + 1.0) / 98.0;
        let via_eq9 = model.trajectory_position(r_i, r_j, dt, t).unwrap();
        let via_prop = model.propagate(&s, t).unwrap().r;
        worst_eq9 = worst_eq9.max((via_eq9 - via_prop).norm());
    }
    assert!(worst_round < 1e-9, "round trip {worst_round}");
    assert!(worst_eq9 < 1e-9, "two-point form {worst_eq9}");
}

#[test]
fn semigroup_of_state_matrices() {
    let model = model400();
    let limit = model.orbit.flight_time_limit();
    let mut g = rng(5);
    use rand::Rng;
    for _ in 0..200 {
        let a = g.gen_range(0.0..limit * 0.5);
        let b = g.gen_range(0.0..(limit - a) * 0.999);
        let pa = StmBlocks::evaluate(model.kappa(), a).state_matrix();
        let pb = StmBlocks::evaluate(model.kappa(), b).state_matrix();
        let pab = StmBlocks::evaluate(model.kappa(), a + b).state_matrix();
        for i in 0..6 {
            for j in 0..6 {
                let prod: f64 = (0..6).map(|k| pb[i][k] * pa[k][j]).sum();
                assert!((prod - pab[i][j]).abs() <= 1e-9 * pab[i][j].abs().max(1.0));
            }
        }
    }
}

#[test]
fn velocity_block_is_derivative_of_position_block() {
    let kappa = model400().kappa();
    let h = 1e-3;
    for dt in [10.0, 300.0, 1000.0, 1500.0, 2500.0] {
        let plus = StmBlocks::evaluate(kappa, dt + h).f_rr;
        let minus = StmBlocks::evaluate(kappa, dt - h).f_rr;
        let f_vr = StmBlocks::evaluate(kappa, dt).f_vr;
        let scale = f_vr.max_abs();
        for i in 0..3 {
            for j in 0..3 {
                let fd = (plus.0[i][j] - minus.0[i][j]) / (2.0 * h);
                assert!((fd - f_vr.0[i][j]).abs() <= 1e-6 * scale, "dt={dt} ({i},{j})");
            }
        }
    }
}

#[test]
fn orbit_from_each_parametrization() {
    let a = Orbit::new(398_600.441_8, 6_778.137).unwrap();
    let b = Orbit::earth_altitude(400.0).unwrap();
    let c = Orbit::from_mean_motion(398_600.441_8, b.kappa()).unwrap();
    assert!((a.kappa() - b.kappa()).abs() < 1e-18);
    assert!((c.a_ts() - b.a_ts()).abs() < 1e-8);
    assert!(Orbit::new(-1.0, 7000.0).is_err());
    assert!(Orbit::from_mean_motion(398_600.441_8, 0.0).is_err());
}

#[test]
fn guard_can_be_relaxed() {
    let model = model400().with_guard(TransferGuard { min_dt: 0.1, end_margin: 0.1, max_condition: 1e12 });
    let (a, b) = (Position::new(1.0, 0.0, 0.0), Position::new(0.0, 1.0, 0.0));
    assert!(model.impulse_for_transfer(a, b, Position::zeros(), 0.5).is_ok());
    assert!(matches!(model400().impulse_for_transfer(a, b, Position::zeros(), 0.5), Err(Error::SingularTransfer { .. })));
}

#[test]
fn single_precision_round_trip() {
    let model = cwpath::Model32::new(cwpath::Orbit32::earth_altitude(400.0).unwrap());
    let a = cwpath::Position32::new(1.0, 0.0, 0.0);
    let b = cwpath::Position32::new(0.0, 1.0, 0.0);
    let leg = model.transfer_leg(a, b, cwpath::Position32::zeros(), 800.0).unwrap();
    assert!(leg.position_at(800.0).distance(&b) < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_impulse_when_already_on_course(
        x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0,
        vx in -1e-3f64..1e-3, vy in -1e-3f64..1e-3, dt in 10.0f64..2500.0,
    ) {
        let model = model400();
        let r = Position::new(x, y, z);
        let v = Position::new(vx, vy, 0.0);
        let end = model.propagate(&State::new(r, v, 0.0).unwrap(), dt).unwrap();
        let dv = model.impulse_for_transfer(r, end.r, v, dt).unwrap();
        prop_assert!(dv.norm() < 1e-9);
    }

    #[test]
    fn equilibrium_stays_put(dt in 0.0f64..2700.0) {
        let model: Model = model400();
        let out = model.propagate(&State::new(Position::zeros(), Position::zeros(), 0.0).unwrap(), dt).unwrap();
        prop_assert_eq!(out.r, Position::zeros());
    }
}
