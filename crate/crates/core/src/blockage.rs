//! Occlusion of every link path by the user bodies.
//!
//! A reflected path is open only when both of its segments are open, so the
//! map stores one table per segment kind and combines them on lookup.
//! Reflector-to-reflector occlusion is not modelled.

use alloc::vec::Vec;

use crate::geometry::{segment_hits_cylinder, Cylinder, Vec3};
use crate::scene::{Scene, UserState};

/// Whether `user`'s body cylinder blocks the segment `p0 -> p1`.
pub fn ray_cylinder_blocked(p0: Vec3, p1: Vec3, user: &UserState) -> bool {
    segment_hits_cylinder(p0, p1, &user.cylinder())
}

fn blocked_by_any(p0: Vec3, p1: Vec3, bodies: &[Cylinder]) -> bool {
    bodies.iter().any(|c| segment_hits_cylinder(p0, p1, c))
}

/// Path indicators: `true` means the path is clear (indicator value 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockageMap {
    leds: usize,
    oris: usize,
    walls: usize,
    users: usize,
    /// `[l][u]`
    los_clear: Vec<bool>,
    /// `[l][k]`
    led_oris_clear: Vec<bool>,
    /// `[k][u]`
    oris_pd_clear: Vec<bool>,
    /// `[l][w]`
    led_wall_clear: Vec<bool>,
    /// `[w][u]`
    wall_pd_clear: Vec<bool>,
}

impl BlockageMap {
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.leds, self.oris, self.walls, self.users)
    }

    /// Line-of-sight indicator between LED `l` and user `u`.
    pub fn los(&self, l: usize, u: usize) -> bool {
        self.los_clear[l * self.users + u]
    }

    /// Indicator of the path LED `l` -> mirror `k` -> user `u`.
    pub fn oris(&self, l: usize, k: usize, u: usize) -> bool {
        self.led_oris_clear[l * self.oris + k] && self.oris_pd_clear[k * self.users + u]
    }

    /// Indicator of the path LED `l` -> wall patch `w` -> user `u`.
    pub fn wall(&self, l: usize, w: usize, u: usize) -> bool {
        self.led_wall_clear[l * self.walls + w] && self.wall_pd_clear[w * self.users + u]
    }

    /// Number of blocked line-of-sight links.
    pub fn blocked_los_count(&self) -> usize {
        self.los_clear.iter().filter(|c| !**c).count()
    }
}

/// Computes every path indicator of a scene; any user body may block any
/// path, including the receiving user's own body.
pub fn blockage_indicators(scene: &Scene) -> BlockageMap {
    let bodies: Vec<Cylinder> = scene.users.iter().map(UserState::cylinder).collect();
    let pds = scene.pd_positions();
    let leds: Vec<Vec3> = scene.leds.iter().map(|l| l.position).collect();
    let oris: Vec<Vec3> = scene.oris.iter().map(|e| e.center).collect();
    let walls: Vec<Vec3> = scene.walls.iter().map(|e| e.center).collect();

    let pair = |from: &[Vec3], to: &[Vec3]| -> Vec<bool> {
        let mut out = Vec::with_capacity(from.len() * to.len());
        for &a in from {
            for &b in to {
                out.push(!blocked_by_any(a, b, &bodies));
            }
        }
        out
    };

    BlockageMap {
        leds: leds.len(),
        oris: oris.len(),
        walls: walls.len(),
        users: pds.len(),
        los_clear: pair(&leds, &pds),
        led_oris_clear: pair(&leds, &oris),
        oris_pd_clear: pair(&oris, &pds),
        led_wall_clear: pair(&leds, &walls),
        wall_pd_clear: pair(&walls, &pds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_scene, BodySpec, SceneConfig};
    use alloc::vec;

    fn scene_with(users: Vec<UserState>) -> Scene {
        build_scene(&SceneConfig::default()).unwrap().with_users(users).unwrap()
    }

    #[test]
    fn no_users_everything_clear() {
        let scene = scene_with(vec![]);
        let map = blockage_indicators(&scene);
        assert_eq!(map.dims(), (4, 600, 1200, 0));
        assert_eq!(map.blocked_los_count(), 0);
        assert!(map.led_oris_clear.iter().all(|c| *c));
        assert!(map.led_wall_clear.iter().all(|c| *c));
    }

    #[test]
    fn under_led_device_facing_led_is_clear() {
        // Body at (0.7, 1.0), device points +x to (1.0, 1.0, 1.0) right below LED 0.
        let u = UserState::new(&BodySpec::default(), 0.7, 1.0, 0.0);
        let map = blockage_indicators(&scene_with(vec![u]));
        assert!(map.los(0, 0));
    }

    #[test]
    fn other_user_on_the_path_blocks() {
        // User 0's PD at (1.3, 2.0, 1.0); LED 1 at (1, 3, 3) is behind user 1 whose
        // body axis is on the straight line between the PD and the LED.
        let body = BodySpec::default();
        let u0 = UserState::new(&body, 1.0, 2.0, 0.0);
        let pd = Vec3::new(1.3, 2.0, 1.0);
        let led = Vec3::new(1.0, 3.0, 3.0);
        // Point of the segment at height 1.3.
        let s = 0.3 / 2.0;
        let p = pd + (led - pd) * s;
        let u1 = UserState::new(&body, p.x, p.y, core::f64::consts::PI);
        assert!(ray_cylinder_blocked(pd, led, &u1));
        let map = blockage_indicators(&scene_with(vec![u0, u1]));
        assert!(!map.los(1, 0));
    }

    #[test]
    fn removing_a_user_never_closes_a_path() {
        let body = BodySpec::default();
        let users = vec![
            UserState::new(&body, 1.0, 2.0, 0.0),
            UserState::new(&body, 1.4, 2.4, 1.0),
            UserState::new(&body, 3.0, 0.6, 2.0),
        ];
        let full = blockage_indicators(&scene_with(users.clone()));
        let reduced = blockage_indicators(&scene_with(vec![users[0], users[2]]));
        for (new_u, old_u) in [(0usize, 0usize), (1, 2)] {
            for l in 0..4 {
                assert!(!full.los(l, old_u) || reduced.los(l, new_u));
                for k in 0..600 {
                    assert!(!full.oris(l, k, old_u) || reduced.oris(l, k, new_u));
                }
                for w in 0..1200 {
                    assert!(!full.wall(l, w, old_u) || reduced.wall(l, w, new_u));
                }
            }
        }
    }
}
