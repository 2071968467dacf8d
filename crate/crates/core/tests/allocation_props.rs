use oris_core::allocation::{
    algorithm1, algorithm1_chain, build_problem, greedy_allocate, no_oris_baseline, penalized_objective, removal_sweep,
    solve_single_shot, SolveStatus,
};
use oris_core::channel::{assemble_coefficients, OrisTerm};
use oris_core::milp::{brute_force, MilpStatus, BRUTE_FORCE_MAX_BINARIES};
use oris_core::scene::{BodySpec, GridSpec};
use oris_core::{
    blockage_indicators, build_scene, Allocation, ChannelCoefficients, RadioConfig, SceneConfig, SolverConfig,
    UserState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-3;

/// Tiny instance with `L <= 2`, `K <= 5`, `U <= 3`. Values are sometimes
/// drawn from a coarse lattice so ties between users and LEDs occur.
fn tiny(rng: &mut ChaCha8Rng) -> ChannelCoefficients {
    let leds = rng.random_range(1..=2);
    let elements = rng.random_range(1..=5);
    let users = rng.random_range(1..=3);
    let lattice = rng.random_bool(0.3);
    let draw = |rng: &mut ChaCha8Rng, hi: f64| {
        let v = rng.random_range(0.0..hi);
        if lattice {
            (v * 4.0).round() / 4.0
        } else {
            v
        }
    };
    let c = (0..users).map(|_| draw(rng, 3.0)).collect();
    let mut a = Vec::new();
    for u in 0..users as u32 {
        for k in 0..elements as u32 {
            for l in 0..leds as u32 {
                if rng.random_bool(0.6) {
                    a.push(OrisTerm { led: l, element: k, user: u, value: draw(rng, 1.5) });
                }
            }
        }
    }
    ChannelCoefficients::from_parts(leds, elements, c, a)
}

fn check_consistent(cf: &ChannelCoefficients, alloc: &Allocation) {
    assert!(alloc.is_exclusive());
    assert_eq!(alloc.oris_used, alloc.assignments.len());
    let triples: Vec<_> = alloc.assignments.iter().map(|a| (a.led, a.element, a.user)).collect();
    let g = cf.gamma_prime(&triples);
    for u in 0..cf.users() {
        assert!((g[u] - alloc.per_user_gamma_prime[u]).abs() < 1e-12);
        assert!(alloc.per_user_gamma_prime[u] >= cf.c[u]);
    }
    for a in &alloc.assignments {
        assert!(alloc.supported_users.contains(&a.user));
        assert!(cf.term(a.led, a.element, a.user) > 0.0);
    }
}

/// Best `min_u γ'_u - ε·(elements used)` by trying every option for every
/// element: idle, or one of its (LED, user) pairs.
fn enumerate(cf: &ChannelCoefficients) -> f64 {
    let options: Vec<Vec<(usize, f64)>> = (0..cf.elements)
        .map(|k| cf.a.iter().filter(|t| t.element as usize == k).map(|t| (t.user as usize, t.value)).collect())
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut choice = vec![0usize; cf.elements];
    loop {
        let mut g = cf.c.clone();
        let mut used = 0;
        for (k, &c) in choice.iter().enumerate() {
            if c > 0 {
                let (u, v) = options[k][c - 1];
                g[u] += v;
                used += 1;
            }
        }
        let obj = g.iter().cloned().fold(f64::INFINITY, f64::min) - EPS * used as f64;
        best = best.max(obj);
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] <= options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            return best;
        }
    }
}

#[test]
fn single_shot_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let config = SolverConfig::default();
    let mut small = 0;
    for i in 0..500 {
        let cf = tiny(&mut rng);
        let all: Vec<usize> = (0..cf.users()).collect();
        let best = enumerate(&cf);
        let problem = build_problem(&cf, &all, EPS).unwrap();
        if problem.lp.num_binaries() <= BRUTE_FORCE_MAX_BINARIES {
            let exact = brute_force(&problem.lp).unwrap();
            assert_eq!(exact.status, MilpStatus::Optimal);
            assert!((exact.objective - best).abs() < 1e-12);
            small += 1;
        }
        let got = solve_single_shot(&cf, &all, &config).unwrap();
        assert_eq!(got.status, SolveStatus::Optimal);
        let obj = penalized_objective(&got, EPS);
        assert!((obj - best).abs() < 1e-9, "instance {i}: {obj} vs {best}");
        check_consistent(&cf, &got);

        let greedy = greedy_allocate(&cf, &all);
        check_consistent(&cf, &greedy);
        assert!(penalized_objective(&greedy, EPS) <= obj + 1e-12);
        assert!(greedy.gamma_prime_min <= got.gamma_prime_min + EPS * got.oris_used as f64 + 1e-12);
    }
    assert!(small > 200, "{small}");
}

#[test]
fn every_assigned_element_holds_up_the_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let config = SolverConfig::default();
    let mut checked = 0;
    for _ in 0..300 {
        let cf = tiny(&mut rng);
        let all: Vec<usize> = (0..cf.users()).collect();
        let got = solve_single_shot(&cf, &all, &config).unwrap();
        for m in removal_sweep(&cf, &got) {
            assert!(m < got.gamma_prime_min, "{m} vs {}", got.gamma_prime_min);
            checked += 1;
        }
    }
    assert!(checked > 300);
}

#[test]
fn pruning_loop_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let config = SolverConfig::default();
    let mut removals = 0;
    for _ in 0..100 {
        let cf = tiny(&mut rng);
        let th = rng.random_range(0.5..4.0);
        let chain = algorithm1_chain(&cf, th, &config).unwrap();
        for w in chain.windows(2) {
            if !w[1].supported_users.is_empty() {
                assert!(w[1].gamma_prime_min >= w[0].gamma_prime_min - 1e-12);
            }
            assert_eq!(w[1].supported_users.len() + 1, w[0].supported_users.len());
        }
        for alloc in &chain {
            check_consistent(&cf, alloc);
            for m in removal_sweep(&cf, alloc) {
                assert!(m < alloc.gamma_prime_min);
            }
            for &u in &alloc.removed_users {
                assert_eq!(alloc.per_user_gamma_prime[u], cf.c[u]);
            }
        }
        let result = algorithm1(&cf, th, &config).unwrap();
        for &u in &result.supported_users {
            assert!(result.per_user_gamma_prime[u] >= th);
        }
        assert_eq!(result.removed_users.len() + result.supported_users.len(), cf.users());
        removals += result.removed_users.len();
    }
    assert!(removals > 20);
}

#[test]
fn baseline_equals_single_shot_without_mirrors() {
    let config = SceneConfig { oris_grid: GridSpec::new(30, 0), ..SceneConfig::default() };
    let base = build_scene(&config).unwrap();
    assert!(base.oris.is_empty());
    let body = BodySpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    for _ in 0..20 {
        let mut users = Vec::new();
        while users.len() < 4 {
            let u = UserState::new(
                &body,
                rng.random_range(0.15..3.85),
                rng.random_range(0.15..3.85),
                rng.random_range(0.0..6.28),
            );
            if u.fits_in(&base.room) {
                users.push(u);
            }
        }
        let scene = base.clone().with_users(users).unwrap();
        let cf = assemble_coefficients(&scene, &blockage_indicators(&scene), &RadioConfig::default());
        let baseline = no_oris_baseline(&cf);
        let solved = solve_single_shot(&cf, &[0, 1, 2, 3], &SolverConfig::default()).unwrap();
        assert_eq!(baseline.per_user_gamma_prime, solved.per_user_gamma_prime);
        assert_eq!(baseline.gamma_prime_min, solved.gamma_prime_min);
        assert_eq!(solved.oris_used, 0);
    }
}
