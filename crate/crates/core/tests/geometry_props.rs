use oris_core::blockage::ray_cylinder_blocked;
use oris_core::geometry::segment_hits_cylinder;
use oris_core::scene::{pd_position, BodySpec, GridSpec};
use oris_core::{blockage_indicators, build_scene, SceneConfig, UserState, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deepest penetration of the interior sample points into the cylinder;
/// positive inside, negative outside.
fn sampled_depth(p0: Vec3, p1: Vec3, user: &UserState) -> f64 {
    let [cx, cy] = user.body_center;
    let n = 10_000;
    let mut best = f64::NEG_INFINITY;
    for i in 1..n {
        let s = i as f64 / n as f64;
        let p = p0 + (p1 - p0) * s;
        let radial = ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt();
        let depth = (user.body_radius - radial).min(p.z).min(user.body_height - p.z);
        best = best.max(depth);
    }
    best
}

fn random_point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), rng.random_range(0.0..3.0))
}

#[test]
fn cylinder_test_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let body = BodySpec::default();
    let (mut hits, mut misses, mut ambiguous) = (0, 0, 0);
    for i in 0..1000 {
        let user = UserState::new(&body, rng.random_range(0.5..3.5), rng.random_range(0.5..3.5), 0.0);
        let (p0, p1) = if i % 2 == 0 {
            (random_point(&mut rng), random_point(&mut rng))
        } else {
            // Aim through a point near the body so both outcomes are common.
            let [cx, cy] = user.body_center;
            let near = Vec3::new(
                cx + rng.random_range(-0.3..0.3),
                cy + rng.random_range(-0.3..0.3),
                rng.random_range(0.0..2.0),
            );
            let p0 = random_point(&mut rng);
            let p1 = p0 + (near - p0) * rng.random_range(1.2..3.0);
            (p0, p1)
        };
        if p0.distance(p1) < 1e-6 {
            continue;
        }
        let depth = sampled_depth(p0, p1, &user);
        let got = ray_cylinder_blocked(p0, p1, &user);
        // Samples are at most 1e-3 m apart along any segment that fits in
        // a few room diagonals, so depths beyond that are unambiguous.
        let band = 1e-3 * p0.distance(p1).max(1.0);
        if depth > band {
            assert!(got, "pair {i}: sampled inside but reported clear");
            hits += 1;
        } else if depth < -band {
            assert!(!got, "pair {i}: sampled outside but reported blocked");
            misses += 1;
        } else {
            ambiguous += 1;
        }
    }
    assert!(hits > 100 && misses > 100, "hits {hits} misses {misses}");
    assert!(ambiguous < 20, "{ambiguous} boundary cases");
}

#[test]
fn sampling_oracle_on_the_reference_blocker() {
    let body = BodySpec::default();
    let blocker = UserState::new(&body, 2.0, 2.0, 0.0);
    let led = Vec3::new(3.0, 3.0, 3.0);
    let pd = Vec3::new(0.7, 1.0, 1.0);
    let depth = sampled_depth(led, pd, &blocker);
    assert!(depth.abs() > 1e-3);
    assert_eq!(ray_cylinder_blocked(led, pd, &blocker), depth > 0.0);
}

#[test]
fn segment_direction_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let body = BodySpec::default();
    for _ in 0..2000 {
        let user = UserState::new(&body, rng.random_range(0.5..3.5), rng.random_range(0.5..3.5), 0.0);
        let (p0, p1) = (random_point(&mut rng), random_point(&mut rng));
        let cyl = user.cylinder();
        assert_eq!(segment_hits_cylinder(p0, p1, &cyl), segment_hits_cylinder(p1, p0, &cyl));
    }
}

proptest! {
    #[test]
    fn device_sits_at_the_offset(x in 0.5f64..3.5, y in 0.5f64..3.5, theta in 0.0f64..std::f64::consts::TAU) {
        let user = UserState::new(&BodySpec::default(), x, y, theta);
        let p = pd_position(&user);
        let r = ((p.x - x).powi(2) + (p.y - y).powi(2)).sqrt();
        prop_assert!((r - user.device_offset).abs() < 1e-12);
        prop_assert_eq!(p.z, user.device_height);
    }
}

fn random_users(rng: &mut ChaCha8Rng, n: usize) -> Vec<UserState> {
    let body = BodySpec::default();
    let mut out = Vec::new();
    while out.len() < n {
        let u = UserState::new(
            &body,
            rng.random_range(0.15..3.85),
            rng.random_range(0.15..3.85),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        if u.fits_in(&Default::default()) {
            out.push(u);
        }
    }
    out
}

fn small_config() -> SceneConfig {
    SceneConfig { oris_grid: GridSpec::new(15, 2), wall_grid: GridSpec::new(15, 4), ..SceneConfig::default() }
}

#[test]
fn indicators_follow_user_relabeling() {
    let base = build_scene(&small_config()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let users = random_users(&mut rng, 5);
        let perm = [3usize, 0, 4, 1, 2];
        let permuted: Vec<UserState> = perm.iter().map(|&i| users[i]).collect();
        let a = blockage_indicators(&base.clone().with_users(users).unwrap());
        let b = blockage_indicators(&base.clone().with_users(permuted).unwrap());
        let (nl, nk, nw, nu) = a.dims();
        for (j, &i) in perm.iter().enumerate() {
            for l in 0..nl {
                assert_eq!(a.los(l, i), b.los(l, j));
                for k in 0..nk {
                    assert_eq!(a.oris(l, k, i), b.oris(l, k, j));
                }
                for w in 0..nw {
                    assert_eq!(a.wall(l, w, i), b.wall(l, w, j));
                }
            }
        }
        assert_eq!(nu, 5);
    }
}

#[test]
fn dropping_users_only_clears_paths() {
    let base = build_scene(&small_config()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let users = random_users(&mut rng, 6);
        let full = blockage_indicators(&base.clone().with_users(users.clone()).unwrap());
        let kept: Vec<usize> = (0..6).filter(|_| rng.random_bool(0.5)).collect();
        let fewer = blockage_indicators(&base.clone().with_users(kept.iter().map(|&i| users[i]).collect()).unwrap());
        let (nl, nk, nw, _) = full.dims();
        for (j, &i) in kept.iter().enumerate() {
            for l in 0..nl {
                assert!(!full.los(l, i) || fewer.los(l, j));
                for k in 0..nk {
                    assert!(!full.oris(l, k, i) || fewer.oris(l, k, j));
                }
                for w in 0..nw {
                    assert!(!full.wall(l, w, i) || fewer.wall(l, w, j));
                }
            }
        }
    }
}

fn contains_point(set: &[Vec3], p: Vec3) -> bool {
    set.iter().any(|q| q.distance(p) < 1e-9)
}

#[test]
fn default_scene_is_symmetric_about_the_mid_plane() {
    let scene = build_scene(&SceneConfig::default()).unwrap();
    let mirror = |p: Vec3| Vec3::new(4.0 - p.x, p.y, p.z);
    let leds: Vec<Vec3> = scene.leds.iter().map(|l| l.position).collect();
    let oris: Vec<Vec3> = scene.oris.iter().map(|e| e.center).collect();
    let walls: Vec<Vec3> = scene.walls.iter().map(|w| w.center).collect();
    for &p in &leds {
        assert!(contains_point(&leds, mirror(p)));
    }
    for &p in &oris {
        assert!(contains_point(&oris, mirror(p)));
    }
    for &p in &walls {
        assert!(contains_point(&walls, mirror(p)));
    }
    for w in &scene.walls {
        let image = scene.walls.iter().find(|v| v.center.distance(mirror(w.center)) < 1e-9).unwrap();
        assert!((image.area - w.area).abs() < 1e-12);
        assert!(image.normal.distance(Vec3::new(-w.normal.x, w.normal.y, w.normal.z)) < 1e-12);
    }
}
