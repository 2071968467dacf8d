use oris_core::milp::{brute_force, solve_lp, solve_milp, LinearProgram, LpStatus, MilpConfig, MilpStatus, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random program over up to 12 binaries and one bounded continuous
/// variable, with a mix of row senses and signed coefficients.
fn random_program(rng: &mut ChaCha8Rng) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let nb = rng.random_range(1..=12);
    for _ in 0..nb {
        let c = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-2.0..3.0) };
        lp.add_binary(c);
    }
    let t = lp.add_var(rng.random_range(-1.0..2.0), 0.0, rng.random_range(1.0..10.0), false);
    for _ in 0..rng.random_range(0..8) {
        let mut coeffs = Vec::new();
        for j in 0..nb {
            if rng.random_bool(0.4) {
                coeffs.push((j, (rng.random_range(-3.0f64..4.0) * 4.0).round() / 4.0));
            }
        }
        if rng.random_bool(0.5) {
            coeffs.push((t, rng.random_range(-1.0..1.5)));
        }
        let sense = match rng.random_range(0..6) {
            0 => Sense::Ge,
            1 => Sense::Eq,
            _ => Sense::Le,
        };
        let rhs = match sense {
            Sense::Eq => rng.random_range(0..3) as f64,
            _ => (rng.random_range(-1.0f64..5.0) * 2.0).round() / 2.0,
        };
        lp.add_row(coeffs, sense, rhs);
    }
    lp
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let config = MilpConfig::default();
    let (mut optimal, mut infeasible) = (0, 0);
    for i in 0..500 {
        let lp = random_program(&mut rng);
        let exact = brute_force(&lp).unwrap();
        let got = solve_milp(&lp, &config, None).unwrap();
        match exact.status {
            MilpStatus::Infeasible => {
                assert_eq!(got.status, MilpStatus::Infeasible, "instance {i}");
                infeasible += 1;
            }
            _ => {
                assert_eq!(got.status, MilpStatus::Optimal, "instance {i}");
                assert!(
                    (got.objective - exact.objective).abs() < 1e-9,
                    "instance {i}: {} vs {}",
                    got.objective,
                    exact.objective
                );
                assert!(lp.is_feasible(&got.x, 1e-9), "instance {i}");
                let relaxed = solve_lp(&lp);
                assert_eq!(relaxed.status, LpStatus::Optimal);
                assert!(relaxed.objective >= got.objective - 1e-9);
                optimal += 1;
            }
        }
    }
    assert!(optimal > 250 && infeasible > 10, "optimal {optimal} infeasible {infeasible}");
}

#[test]
fn repeated_solves_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let lp = random_program(&mut rng);
        let a = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        let b = solve_milp(&lp, &MilpConfig::default(), None).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn incumbent_never_beats_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let lp = random_program(&mut rng);
        let exact = brute_force(&lp).unwrap();
        if exact.status != MilpStatus::Optimal {
            continue;
        }
        let seeded = solve_milp(&lp, &MilpConfig::default(), Some(&exact.x)).unwrap();
        assert!((seeded.objective - exact.objective).abs() < 1e-9);
    }
}
