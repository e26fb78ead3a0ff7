mod common;

use common::{oracle_formation, random_params};
use platoon_auth::formation::{
    auth_time, catchup_gap, displacement, relative_position, simulate, theta, total_time, travel, FormationError,
    LatencyModel, PlatoonState, ScenarioParams, Strategy, TruckState,
};
use rand::rngs::ChaCha20Rng;
use rand::SeedableRng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

#[test]
fn displacement_examples() {
    let cruise = TruckState::new(0.0, 18.0, 0.0, (0.0, 30.0), (-2.0, 2.0)).unwrap();
    assert_eq!(displacement(&cruise, 2.0), 36.0);
    let accel = cruise.with_accel(1.5);
    // 18·3 + ½·1.5·3² without reaching 30 m/s.
    assert!((displacement(&accel, 3.0) - (54.0 + 6.75)).abs() < 1e-12);
    // Saturates at 20 m/s after 4 s, then cruises.
    let capped = TruckState::new(0.0, 16.0, 1.0, (0.0, 20.0), (-1.0, 1.0)).unwrap();
    assert!((displacement(&capped, 10.0) - (16.0 * 4.0 + 8.0 + 20.0 * 6.0)).abs() < 1e-12);
    let braking = TruckState::new(0.0, 10.0, -2.0, (4.0, 20.0), (-2.0, 2.0)).unwrap();
    assert!((displacement(&braking, 5.0) - (10.0 * 3.0 - 9.0 + 4.0 * 2.0)).abs() < 1e-12);
    assert_eq!(travel(10.0, -2.0, 4.0, 5.0).1, 4.0);
    assert_eq!(relative_position(300.0, 10.0, 2.0), 308.0);
}

#[test]
fn truck_and_platoon_validation() {
    assert!(TruckState::new(0.0, 31.0, 0.0, (0.0, 30.0), (-1.0, 1.0)).is_err());
    assert!(TruckState::new(0.0, 10.0, 2.0, (0.0, 30.0), (-1.0, 1.0)).is_err());
    assert!(TruckState::new(f64::NAN, 10.0, 0.0, (0.0, 30.0), (-1.0, 1.0)).is_err());
    let t = TruckState::new(0.0, 20.0, 0.0, (0.0, 30.0), (-1.0, 1.0)).unwrap();
    let p = PlatoonState::uniform(t, 4, 15.0, 100.0).unwrap();
    assert_eq!(p.q(), 4);
    assert_eq!(p.tail().position, 100.0);
    assert_eq!(p.leader().position, 145.0);
    assert_eq!(p.length(), 45.0);
    assert!(PlatoonState::new(vec![t, t]).is_err());
    assert!(PlatoonState::new(vec![]).is_err());
}

#[test]
fn reference_timeline_matches_the_oracle() {
    let params = ScenarioParams::default();
    let scenario = params.build().unwrap();
    let gamma = (2.0 * 255.0 + 2.0 + 0.4 + 1100.0 + 512.0) / 1000.0;
    assert!((auth_time(2, &scenario.latency) - gamma).abs() < 1e-12);
    let gap_oracle = 300.0 + 22.0 * gamma - (17.0 * gamma + 0.5 * gamma * gamma);
    assert!((catchup_gap(&scenario, gamma) - gap_oracle).abs() < 1e-9);

    for strategy in Strategy::ALL {
        let (gap, theta_oracle) = oracle_formation(&params, strategy, 1e-4, 1e4).unwrap();
        assert!((gap - gap_oracle).abs() < 1e-6);
        let t = total_time(&scenario, strategy).unwrap();
        assert!(
            rel(t.theta, theta_oracle) < 1e-4,
            "{strategy}: {} vs {theta_oracle}",
            t.theta
        );
        assert!((t.total - (t.gamma + t.theta)).abs() < 1e-12);
    }
}

#[test]
fn closed_form_matches_integrator_on_random_scenarios() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xF0);
    for i in 0..200 {
        let params = random_params(&mut rng);
        let scenario = params.build().unwrap();
        for strategy in Strategy::ALL {
            let closed = total_time(&scenario, strategy).unwrap();
            let sim = simulate(&scenario, strategy, 1e-3).unwrap();
            assert!(
                rel(closed.theta, sim.timeline.theta) < 0.01,
                "scenario {i} {strategy}: {} vs {}",
                closed.theta,
                sim.timeline.theta
            );
            assert_eq!(closed.gamma, sim.timeline.gamma);
        }
    }
}

#[test]
fn closed_form_matches_the_brute_force_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xF1);
    for i in 0..40 {
        let params = random_params(&mut rng);
        let scenario = params.build().unwrap();
        for strategy in Strategy::ALL {
            let closed = total_time(&scenario, strategy).unwrap();
            let (gap, oracle) = oracle_formation(&params, strategy, 5e-4, 1e5).unwrap();
            assert!(rel(closed.gap_after_catchup, gap) < 1e-6, "scenario {i}");
            assert!(
                rel(closed.theta, oracle) < 1e-3,
                "scenario {i} {strategy}: {} vs {oracle}",
                closed.theta
            );
        }
    }
}

#[test]
fn hybrid_is_never_slower() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xF2);
    for _ in 0..100 {
        let scenario = random_params(&mut rng).build().unwrap();
        let gamma = auth_time(scenario.n, &scenario.latency);
        let hybrid = theta(&scenario, gamma, Strategy::Hybrid).unwrap();
        let second = theta(&scenario, gamma, Strategy::SecondCatchup).unwrap();
        let slow = theta(&scenario, gamma, Strategy::SlowDown).unwrap();
        assert!(hybrid <= second.min(slow) + 1e-9);
    }
}

#[test]
fn integrator_respects_the_speed_envelope_and_converges_with_dt() {
    let params = ScenarioParams::default();
    let scenario = params.build().unwrap();
    for strategy in Strategy::ALL {
        let fine = simulate(&scenario, strategy, 1e-3).unwrap();
        let coarse = simulate(&scenario, strategy, 1e-2).unwrap();
        assert!((fine.timeline.theta - coarse.timeline.theta).abs() < 0.02);
        for p in &fine.trace {
            assert!(p.chi_speed <= params.v_chi_max + 1e-9 && p.chi_speed >= params.v_chi_min - 1e-9);
            assert!(p.platoon_speed >= params.v_platoon_min - 1e-9 && p.platoon_speed <= params.v_platoon + 1e-9);
        }
        let last = fine.trace.last().unwrap();
        assert!((last.tail_position - last.chi_position - params.headway).abs() < 0.05);
    }
    assert!(simulate(&scenario, Strategy::Hybrid, 0.0).is_err());
    assert!(simulate(&scenario, Strategy::Hybrid, 0.5).is_err());
}

#[test]
fn unreachable_platoons_are_reported_by_both_paths() {
    let params = ScenarioParams {
        v_chi: 20.0,
        a_chi: 0.0,
        v_chi_max: 20.0,
        v_platoon: 25.0,
        v_platoon_max: 25.0,
        ..ScenarioParams::default()
    };
    let scenario = params.build().unwrap();
    assert!(matches!(
        total_time(&scenario, Strategy::SecondCatchup),
        Err(FormationError::UnreachablePlatoon { .. })
    ));
    assert!(matches!(
        simulate(&scenario, Strategy::SecondCatchup, 1e-2),
        Err(FormationError::DidNotConverge { .. })
    ));
    // Slowing the platoon by the truck's zero margin gains nothing.
    assert!(total_time(&scenario, Strategy::SlowDown).is_err());
}

#[test]
fn scenario_files_parse_and_report_bad_lines() {
    let p = ScenarioParams::parse("# test\nR = 250\nv_platoon=21 # cruise\nn=4\nstrategy=slow-down\nt_net_ms=800\n")
        .unwrap();
    assert_eq!((p.r, p.v_platoon, p.v_platoon_max, p.n), (250.0, 21.0, 21.0, 4));
    assert_eq!(p.strategy, Some(Strategy::SlowDown));
    assert_eq!(p.latency.t_net_ms, 800.0);
    assert_eq!(p.latency.t_proof_ms, LatencyModel::REFERENCE.t_proof_ms);
    assert!(matches!(
        ScenarioParams::parse("R=1\nbogus=2"),
        Err(FormationError::Parse { line: 2, .. })
    ));
    assert!(matches!(
        ScenarioParams::parse("R=abc"),
        Err(FormationError::Parse { line: 1, .. })
    ));
    assert!(matches!(
        ScenarioParams::parse("R"),
        Err(FormationError::Parse { line: 1, .. })
    ));
    let invalid = ScenarioParams {
        headway: 400.0,
        ..ScenarioParams::default()
    };
    assert!(matches!(invalid.build(), Err(FormationError::InvalidScenario(_))));
}

#[test]
fn gamma_is_linear_in_n() {
    let l = LatencyModel::REFERENCE;
    for n in 1..10 {
        assert!((auth_time(n + 1, &l) - auth_time(n, &l) - 0.255).abs() < 1e-12);
    }
}
