mod common;

use fast_core::output;
use fast_core::scenario::{parse_scenario, Pos};
use fast_core::{run_simulation, SimConfig, SimState};

use common::{bundled, chi_square_p, hall_text, random_crowd};

#[test]
fn lone_agent_random_walk_is_unbiased() {
    // all couplings zero, v_max=1: each round is a uniform pick among the
    // 5-cell disc (stay, N, E, S, W)
    let text = hall_text(41, 41)
        + "profile walker v_max=1 k_S=0 k_D=0 k_I=0 k_W=0 k_P=0 k_E=0 exits=all\nagent 20 20 walker\n";
    let spec = parse_scenario(&text).unwrap();
    let mut state = SimState::new(
        &spec,
        &SimConfig {
            seed: 3,
            ..SimConfig::default()
        },
    )
    .unwrap();
    let mut counts = [0u64; 5];
    let rounds = 4000;
    for _ in 0..rounds {
        let before = state.agents[0].pos;
        state.run_round().unwrap();
        let after = state.agents[0].pos;
        let k = match (after.x - before.x, after.y - before.y) {
            (0, 0) => 0,
            (0, -1) => 1,
            (1, 0) => 2,
            (0, 1) => 3,
            (-1, 0) => 4,
            other => panic!("illegal displacement {other:?}"),
        };
        counts[k] += 1;
        // keep the walker away from the walls
        if (after.x - 20).abs() > 12 || (after.y - 20).abs() > 12 {
            state.occupancy.clear(after);
            state.occupancy.place(Pos::new(20, 20), 0);
            state.agents[0].pos = Pos::new(20, 20);
        }
    }
    let expected = [rounds as f64 / 5.0; 5];
    let p = chi_square_p(&counts, &expected);
    assert!(p > 0.001, "{counts:?} p={p}");
}

#[test]
fn strongly_exit_bound_agent_keeps_full_speed() {
    let walls = "W".repeat(40);
    let text = format!(
        "{walls}\nWa{}E\n{walls}\nprofile default v_max=4 k_S=100 k_D=0 k_I=0 k_W=0 k_P=0 k_E=0 exits=all\n",
        ".".repeat(37)
    );
    let spec = parse_scenario(&text).unwrap();
    let mut state = SimState::new(&spec, &SimConfig::default()).unwrap();
    let exit = Pos::new(39, 1);
    while state.alive_count() > 0 {
        let before = state.agents[0].pos;
        let report = state.run_round().unwrap();
        let m = report.moves[0];
        if before.dist(exit) > 4.0 {
            assert!(
                m.from.dist(m.to) >= 3.0 - 1e-9,
                "round {}: {:?}",
                report.round,
                m
            );
        }
    }
}

#[test]
fn alive_counts_never_increase_and_occupancy_mirrors_agents() {
    for seed in 0..4 {
        let spec = random_crowd(100 + seed, 18, 18, 0.3);
        let mut state = SimState::new(
            &spec,
            &SimConfig {
                seed,
                ..SimConfig::default()
            },
        )
        .unwrap();
        let mut alive = state.alive_count();
        for _ in 0..200 {
            if alive == 0 {
                break;
            }
            state.run_round().unwrap();
            let now = state.alive_count();
            assert!(now <= alive);
            alive = now;
            let mut seen = std::collections::HashSet::new();
            for a in state.agents.iter().filter(|a| a.alive) {
                assert!(seen.insert(a.pos));
                assert_eq!(state.occupancy.get(a.pos), Some(a.id));
            }
            assert_eq!(state.occupancy.count(), now);
        }
    }
}

#[test]
fn same_seed_same_result() {
    let spec = parse_scenario(&bundled("room.txt")).unwrap();
    let cfg = SimConfig {
        seed: 99,
        ..SimConfig::default()
    };
    let a = run_simulation(&spec, &cfg).unwrap();
    let b = run_simulation(&spec, &cfg).unwrap();
    assert_eq!(output::trajectories_csv(&a), output::trajectories_csv(&b));
    assert_eq!(output::summary(&a), output::summary(&b));
    assert_eq!(output::heatmap_pgm(&a), output::heatmap_pgm(&b));
    assert_eq!(a.step_log, b.step_log);

    let c = run_simulation(&spec, &SimConfig { seed: 100, ..cfg }).unwrap();
    assert_ne!(output::trajectories_csv(&a), output::trajectories_csv(&c));
}

#[test]
fn result_bookkeeping() {
    let spec = parse_scenario(&bundled("room.txt")).unwrap();
    let r = run_simulation(
        &spec,
        &SimConfig {
            seed: 5,
            ..SimConfig::default()
        },
    )
    .unwrap();
    let rounds = r.evacuation_rounds.expect("room evacuates");
    assert_eq!(r.alive_counts.len() as u32, rounds + 1);
    assert!(r.alive_counts.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*r.alive_counts.last().unwrap(), 0);
    assert_eq!(r.exit_rounds.iter().flatten().max(), Some(&rounds));
    // one trajectory row per agent per round it was alive at round start
    for (id, exit) in r.exit_rounds.iter().enumerate() {
        let rows: Vec<u32> = r
            .trajectory
            .iter()
            .filter(|t| t.agent == id)
            .map(|t| t.round)
            .collect();
        assert_eq!(rows, (0..=exit.unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(r.density.iter().sum::<u64>(), r.trajectory.len() as u64);
}
