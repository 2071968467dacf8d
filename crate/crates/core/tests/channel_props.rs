use oris_core::channel::{los_gain, oris_gain, wall_gain, OrisTerm};
use oris_core::{build_scene, ChannelCoefficients, SceneConfig, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gains_are_finite_and_nonnegative() {
    let scene = build_scene(&SceneConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100_000 {
        let led = &scene.leds[rng.random_range(0..scene.leds.len())];
        let p = Vec3::new(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), rng.random_range(0.0..2.9));
        let k = &scene.oris[rng.random_range(0..scene.oris.len())];
        let w = &scene.walls[rng.random_range(0..scene.walls.len())];
        for g in [
            los_gain(led, p, &scene.pd, false),
            oris_gain(led, k.center, p, &scene.pd, scene.reflectance_oris),
            wall_gain(led, w, p, &scene.pd, scene.reflectance_wall),
        ] {
            assert!(g.is_finite() && g >= 0.0, "{g}");
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b.abs().max(a.abs())).abs()
    }
}

#[test]
fn point_reflection_through_the_room_center() {
    let scene = build_scene(&SceneConfig::default()).unwrap();
    let led_a = scene.leds.iter().find(|l| l.position.x == 1.0 && l.position.y == 1.0).unwrap();
    let led_b = scene.leds.iter().find(|l| l.position.x == 3.0 && l.position.y == 3.0).unwrap();
    let flip = |p: Vec3| Vec3::new(4.0 - p.x, 4.0 - p.y, p.z);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p = Vec3::new(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), rng.random_range(0.5..1.5));
        let q = flip(p);
        assert!(rel(los_gain(led_a, p, &scene.pd, false), los_gain(led_b, q, &scene.pd, false)) < 1e-9);
        let sum_oris =
            |led, x| -> f64 { scene.oris.iter().map(|e| oris_gain(led, e.center, x, &scene.pd, 0.95)).sum() };
        assert!(rel(sum_oris(led_a, p), sum_oris(led_b, q)) < 1e-9);
        let sum_wall = |led, x| -> f64 { scene.walls.iter().map(|w| wall_gain(led, w, x, &scene.pd, 0.4)).sum() };
        assert!(rel(sum_wall(led_a, p), sum_wall(led_b, q)) < 1e-9);
    }
}

#[test]
fn los_gain_decreases_along_a_ray() {
    let scene = build_scene(&SceneConfig::default()).unwrap();
    let led = &scene.leds[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        // Directions within 35 degrees of the downward axis.
        let polar = rng.random_range(0.0..35f64.to_radians());
        let az = rng.random_range(0.0..std::f64::consts::TAU);
        let dir = Vec3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), -polar.cos());
        let mut last = f64::INFINITY;
        for step in 1..40 {
            let p = led.position + dir * (0.05 * step as f64);
            let g = los_gain(led, p, &scene.pd, false);
            assert!(g <= last);
            last = g;
        }
    }
}

fn coefficients(seed: u64) -> ChannelCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = rng.random_range(1..5);
    let elements = rng.random_range(1..8);
    let c = (0..users).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut a = Vec::new();
    for u in 0..users as u32 {
        for k in 0..elements as u32 {
            for l in 0..2 {
                if rng.random_bool(0.5) {
                    a.push(OrisTerm { led: l, element: k, user: u, value: rng.random_range(0.0..2.0) });
                }
            }
        }
    }
    ChannelCoefficients::from_parts(2, elements, c, a)
}

proptest! {
    #[test]
    fn optical_snr_is_affine_in_the_assignment(seed in any::<u64>(), split in any::<u64>()) {
        let cf = coefficients(seed);
        let triples: Vec<(usize, usize, usize)> = cf.a.iter().map(|t| (t.led as usize, t.element as usize, t.user as usize)).collect();
        let (first, second): (Vec<_>, Vec<_>) = triples.iter().enumerate().partition(|(i, _)| split >> (i % 64) & 1 == 1);
        let first: Vec<_> = first.into_iter().map(|(_, t)| *t).collect();
        let second: Vec<_> = second.into_iter().map(|(_, t)| *t).collect();
        let g1 = cf.gamma_prime(&first);
        let g2 = cf.gamma_prime(&second);
        let both = cf.gamma_prime(&triples);
        for u in 0..cf.users() {
            prop_assert!((both[u] - (g1[u] + g2[u] - cf.c[u])).abs() <= 1e-12 * (1.0 + both[u]));
            prop_assert!(both[u] >= cf.c[u]);
            let snr = both[u] * both[u];
            prop_assert!(rel(snr.sqrt(), both[u]) < 1e-12);
        }
    }

    #[test]
    fn scaling_scales_every_term(seed in any::<u64>(), factor in 0.1f64..10.0) {
        let cf = coefficients(seed);
        let s = cf.scaled(factor);
        for (a, b) in cf.c.iter().zip(&s.c) {
            prop_assert_eq!(a * factor, *b);
        }
        for (a, b) in cf.a.iter().zip(&s.a) {
            prop_assert_eq!(a.value * factor, b.value);
        }
    }
}
