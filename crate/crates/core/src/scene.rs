//! Room layout: LEDs on the ceiling, the mirror band along the top of every
//! wall, diffuse wall patches below it, and the users.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use crate::channel::lambertian_order;
use crate::geometry::{Cylinder, Vec3};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoomSpec {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl Default for RoomSpec {
    fn default() -> Self {
        Self { width: 4.0, depth: 4.0, height: 3.0 }
    }
}

impl RoomSpec {
    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.depth).contains(&p.y) && (0.0..=self.height).contains(&p.z)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(self.width / 2.0, self.depth / 2.0, self.height / 2.0)
    }
}

/// Ceiling LED pointing straight down.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LedSpec {
    pub position: Vec3,
    /// Half-power semi-angle in radians.
    pub half_power_semiangle: f64,
    pub lambertian_order: f64,
}

impl LedSpec {
    pub const NORMAL: Vec3 = Vec3::DOWN;
}

/// Photodetector pointing straight up.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PdSpec {
    /// Active area in m².
    pub area: f64,
    /// Field-of-view semi-angle in radians.
    pub fov_semiangle: f64,
    /// Responsivity in A/W.
    pub responsivity: f64,
}

impl PdSpec {
    pub const NORMAL: Vec3 = Vec3::UP;
}

impl Default for PdSpec {
    fn default() -> Self {
        Self { area: 1e-4, fov_semiangle: 40f64.to_radians(), responsivity: 0.4 }
    }
}

/// Body and device dimensions shared by all users.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BodySpec {
    pub radius: f64,
    pub height: f64,
    /// Horizontal distance from the body axis to the photodetector.
    pub device_offset: f64,
    pub device_height: f64,
}

impl Default for BodySpec {
    fn default() -> Self {
        Self { radius: 0.15, height: 1.75, device_offset: 0.3, device_height: 1.0 }
    }
}

/// A user: a vertical body cylinder plus a handheld upward-facing
/// photodetector at a fixed offset and height.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UserState {
    pub body_center: [f64; 2],
    pub body_radius: f64,
    pub body_height: f64,
    /// Direction of the device around the body axis, radians in `[0, 2π)`.
    pub device_angle: f64,
    pub device_offset: f64,
    pub device_height: f64,
}

impl UserState {
    pub fn new(body: &BodySpec, x: f64, y: f64, device_angle: f64) -> Self {
        Self {
            body_center: [x, y],
            body_radius: body.radius,
            body_height: body.height,
            device_angle,
            device_offset: body.device_offset,
            device_height: body.device_height,
        }
    }

    pub fn cylinder(&self) -> Cylinder {
        Cylinder {
            center_x: self.body_center[0],
            center_y: self.body_center[1],
            radius: self.body_radius,
            height: self.body_height,
        }
    }

    /// Whether the body cylinder and the photodetector both lie in the room.
    pub fn fits_in(&self, room: &RoomSpec) -> bool {
        let [cx, cy] = self.body_center;
        let r = self.body_radius;
        cx - r >= 0.0
            && cx + r <= room.width
            && cy - r >= 0.0
            && cy + r <= room.depth
            && self.body_height <= room.height
            && room.contains(pd_position(self))
    }
}

/// Photodetector position of a user.
pub fn pd_position(user: &UserState) -> Vec3 {
    let [cx, cy] = user.body_center;
    Vec3::new(
        cx + user.device_offset * math::cos(user.device_angle),
        cy + user.device_offset * math::sin(user.device_angle),
        user.device_height,
    )
}

/// Column/row counts of a grid laid over one wall band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub cols: u32,
    pub rows: u32,
}

impl GridSpec {
    pub const fn new(cols: u32, rows: u32) -> Self {
        Self { cols, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.cols == 0 || self.rows == 0
    }

    pub fn len(&self) -> usize {
        self.cols as usize * self.rows as usize
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cols, self.rows)
    }
}

/// Walls are numbered counter-clockwise starting with `y = 0`.
pub const WALL_COUNT: usize = 4;

/// A single steerable mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrisElement {
    pub wall: u8,
    pub row: u32,
    pub col: u32,
    pub center: Vec3,
    pub width: f64,
    pub height: f64,
    pub area: f64,
}

/// A diffuse wall patch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WallElement {
    pub wall: u8,
    pub row: u32,
    pub col: u32,
    pub center: Vec3,
    pub width: f64,
    pub height: f64,
    pub area: f64,
    /// Inward-pointing horizontal unit normal.
    pub normal: Vec3,
}

/// Everything needed to lay out a room; users are added separately.
///
/// Angles are radians, everything else SI.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneConfig {
    pub room: RoomSpec,
    /// LED (x, y) positions; every LED sits on the ceiling.
    pub led_positions: Vec<[f64; 2]>,
    pub half_power_semiangle: f64,
    pub pd: PdSpec,
    pub body: BodySpec,
    /// Mirror grid per wall, over the top `oris_band_fraction` of the wall.
    pub oris_grid: GridSpec,
    /// Diffuse patch grid per wall, over the rest of the wall.
    pub wall_grid: GridSpec,
    pub oris_band_fraction: f64,
    pub reflectance_oris: f64,
    pub reflectance_wall: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            room: RoomSpec::default(),
            led_positions: alloc::vec![[1.0, 1.0], [1.0, 3.0], [3.0, 1.0], [3.0, 3.0]],
            half_power_semiangle: 80f64.to_radians(),
            pd: PdSpec::default(),
            body: BodySpec::default(),
            oris_grid: GridSpec::new(30, 5),
            wall_grid: GridSpec::new(30, 10),
            oris_band_fraction: 1.0 / 3.0,
            reflectance_oris: 0.95,
            reflectance_wall: 0.4,
        }
    }
}

impl SceneConfig {
    /// Wall grid whose patches have the same size as the mirrors.
    pub fn matching_wall_grid(oris: GridSpec, band_fraction: f64) -> GridSpec {
        let ratio = (1.0 - band_fraction) / band_fraction;
        let rows = math::floor(oris.rows as f64 * ratio + 0.5) as u32;
        GridSpec::new(oris.cols, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneError {
    NonPositive(&'static str),
    OutOfRange(&'static str),
    /// The diffuse wall band has positive height but no patches.
    UntiledWallBand,
    LedOutsideCeiling(usize),
    UserOutsideRoom(usize),
    DeviceInsideBody(usize),
}

impl fmt::Display for SceneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneError::NonPositive(what) => write!(f, "{what} must be strictly positive"),
            SceneError::OutOfRange(what) => write!(f, "{what} is out of range"),
            SceneError::UntiledWallBand => {
                write!(f, "wall grid must have at least one row and one column")
            }
            SceneError::LedOutsideCeiling(i) => write!(f, "LED {i} lies outside the ceiling"),
            SceneError::UserOutsideRoom(i) => write!(f, "user {i} does not fit in the room"),
            SceneError::DeviceInsideBody(i) => {
                write!(f, "user {i} holds the device inside their own body")
            }
        }
    }
}

impl core::error::Error for SceneError {}

/// Immutable room description together with the current user deployment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scene {
    pub room: RoomSpec,
    pub leds: Vec<LedSpec>,
    pub pd: PdSpec,
    pub body: BodySpec,
    pub users: Vec<UserState>,
    /// Mirrors of all four walls, wall-major then row-major.
    pub oris: Vec<OrisElement>,
    pub walls: Vec<WallElement>,
    pub oris_grid: GridSpec,
    pub wall_grid: GridSpec,
    pub reflectance_oris: f64,
    pub reflectance_wall: f64,
}

fn positive(v: f64, what: &'static str) -> Result<(), SceneError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SceneError::NonPositive(what))
    }
}

fn unit_interval(v: f64, what: &'static str) -> Result<(), SceneError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SceneError::OutOfRange(what))
    }
}

/// Checks every field of a configuration.
pub fn validate_config(config: &SceneConfig) -> Result<(), SceneError> {
    let room = &config.room;
    positive(room.width, "room width")?;
    positive(room.depth, "room depth")?;
    positive(room.height, "room height")?;
    let hpsa = config.half_power_semiangle;
    if !(hpsa > 0.0 && hpsa < FRAC_PI_2) {
        return Err(SceneError::OutOfRange("LED half-power semi-angle"));
    }
    positive(config.pd.area, "photodetector area")?;
    positive(config.pd.responsivity, "photodetector responsivity")?;
    let fov = config.pd.fov_semiangle;
    if !(fov > 0.0 && fov <= FRAC_PI_2) {
        return Err(SceneError::OutOfRange("photodetector field of view"));
    }
    let body = &config.body;
    positive(body.radius, "body radius")?;
    positive(body.height, "body height")?;
    positive(body.device_height, "device height")?;
    if !(body.device_offset > body.radius) {
        return Err(SceneError::OutOfRange("device offset (must exceed body radius)"));
    }
    if body.height > room.height || body.device_height > room.height {
        return Err(SceneError::OutOfRange("body or device height"));
    }
    if 2.0 * (body.radius + body.device_offset) > room.width.min(room.depth) {
        return Err(SceneError::OutOfRange("body footprint"));
    }
    let f = config.oris_band_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(SceneError::OutOfRange("mirror band fraction"));
    }
    unit_interval(config.reflectance_oris, "mirror reflectance")?;
    unit_interval(config.reflectance_wall, "wall reflectance")?;
    if config.wall_grid.is_empty() {
        return Err(SceneError::UntiledWallBand);
    }
    for (i, &[x, y]) in config.led_positions.iter().enumerate() {
        if !(x.is_finite() && y.is_finite() && (0.0..=room.width).contains(&x) && (0.0..=room.depth).contains(&y)) {
            return Err(SceneError::LedOutsideCeiling(i));
        }
    }
    Ok(())
}

/// Inward normal and the point where the wall's running coordinate starts.
fn wall_frame(room: &RoomSpec, wall: usize) -> (Vec3, f64) {
    match wall {
        0 => (Vec3::new(0.0, 1.0, 0.0), room.width),
        1 => (Vec3::new(-1.0, 0.0, 0.0), room.depth),
        2 => (Vec3::new(0.0, -1.0, 0.0), room.width),
        _ => (Vec3::new(1.0, 0.0, 0.0), room.depth),
    }
}

/// Point on `wall` at running coordinate `s` and height `z`.
fn wall_point(room: &RoomSpec, wall: usize, s: f64, z: f64) -> Vec3 {
    match wall {
        0 => Vec3::new(s, 0.0, z),
        1 => Vec3::new(room.width, s, z),
        2 => Vec3::new(s, room.depth, z),
        _ => Vec3::new(0.0, s, z),
    }
}

struct Tile {
    wall: u8,
    row: u32,
    col: u32,
    center: Vec3,
    width: f64,
    height: f64,
}

fn tile_band(room: &RoomSpec, grid: GridSpec, z_lo: f64, z_hi: f64, out: &mut Vec<Tile>) {
    if grid.is_empty() {
        return;
    }
    for wall in 0..WALL_COUNT {
        let (_, length) = wall_frame(room, wall);
        let w = length / grid.cols as f64;
        let h = (z_hi - z_lo) / grid.rows as f64;
        for row in 0..grid.rows {
            let z = z_lo + (row as f64 + 0.5) * h;
            for col in 0..grid.cols {
                let s = (col as f64 + 0.5) * w;
                out.push(Tile {
                    wall: wall as u8,
                    row,
                    col,
                    center: wall_point(room, wall, s, z),
                    width: w,
                    height: h,
                });
            }
        }
    }
}

/// Lays out a user-free scene.
pub fn build_scene(config: &SceneConfig) -> Result<Scene, SceneError> {
    validate_config(config)?;
    let room = config.room;
    let m = lambertian_order(config.half_power_semiangle)
        .map_err(|_| SceneError::OutOfRange("LED half-power semi-angle"))?;
    let leds = config
        .led_positions
        .iter()
        .map(|&[x, y]| LedSpec {
            position: Vec3::new(x, y, room.height),
            half_power_semiangle: config.half_power_semiangle,
            lambertian_order: m,
        })
        .collect();

    let band_start = room.height * (1.0 - config.oris_band_fraction);
    let mut tiles = Vec::new();
    tile_band(&room, config.oris_grid, band_start, room.height, &mut tiles);
    let oris = tiles
        .drain(..)
        .map(|t| OrisElement {
            wall: t.wall,
            row: t.row,
            col: t.col,
            center: t.center,
            width: t.width,
            height: t.height,
            area: t.width * t.height,
        })
        .collect();
    tile_band(&room, config.wall_grid, 0.0, band_start, &mut tiles);
    let walls = tiles
        .drain(..)
        .map(|t| WallElement {
            wall: t.wall,
            row: t.row,
            col: t.col,
            center: t.center,
            width: t.width,
            height: t.height,
            area: t.width * t.height,
            normal: wall_frame(&room, t.wall as usize).0,
        })
        .collect();

    Ok(Scene {
        room,
        leds,
        pd: config.pd,
        body: config.body,
        users: Vec::new(),
        oris,
        walls,
        oris_grid: config.oris_grid,
        wall_grid: config.wall_grid,
        reflectance_oris: config.reflectance_oris,
        reflectance_wall: config.reflectance_wall,
    })
}

impl Scene {
    /// Replaces the user deployment after checking every user fits.
    pub fn with_users(mut self, users: Vec<UserState>) -> Result<Self, SceneError> {
        for (i, u) in users.iter().enumerate() {
            if !(u.device_offset > u.body_radius) {
                return Err(SceneError::DeviceInsideBody(i));
            }
            if !(u.device_angle.is_finite() && u.fits_in(&self.room)) {
                return Err(SceneError::UserOutsideRoom(i));
            }
        }
        self.users = users;
        Ok(self)
    }

    pub fn pd_positions(&self) -> Vec<Vec3> {
        self.users.iter().map(pd_position).collect()
    }

    /// Mirror area of one element, or zero without mirrors.
    pub fn oris_element_area(&self) -> f64 {
        self.oris.first().map_or(0.0, |e| e.area)
    }

    pub fn oris_per_wall(&self) -> usize {
        self.oris.len() / WALL_COUNT
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let t = theta - two_pi * math::floor(theta / two_pi);
    if t >= two_pi {
        0.0
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn user(x: f64, y: f64, theta: f64) -> UserState {
        UserState::new(&BodySpec::default(), x, y, theta)
    }

    #[test]
    fn pd_position_axis_aligned() {
        let p = pd_position(&user(1.0, 1.0, 0.0));
        assert!((p.x - 1.3).abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15 && p.z == 1.0);
        let p = pd_position(&user(2.0, 2.0, FRAC_PI_2));
        assert!((p.x - 2.0).abs() < 1e-15 && (p.y - 2.3).abs() < 1e-15);
    }

    #[test]
    fn pd_position_diagonal() {
        let p = pd_position(&user(2.0, 2.0, PI / 4.0));
        assert!((p.x - 2.2121).abs() < 5e-5);
        assert!((p.y - 2.2121).abs() < 5e-5);
        assert_eq!(p.z, 1.0);
    }

    #[test]
    fn default_scene_counts() {
        let scene = build_scene(&SceneConfig::default()).unwrap();
        assert_eq!(scene.leds.len(), 4);
        assert_eq!(scene.oris.len(), 600);
        assert_eq!(scene.walls.len(), 4 * 300);
        assert!((scene.oris_element_area() - 0.0267).abs() < 5e-5);
        for led in &scene.leds {
            assert_eq!(led.position.z, 3.0);
        }
        for e in &scene.oris {
            assert!(e.center.z >= 2.0 && e.center.z <= 3.0);
        }
        for w in &scene.walls {
            assert!(w.center.z >= 0.0 && w.center.z <= 2.0);
        }
    }

    #[test]
    fn coarse_grid_area() {
        let cfg = SceneConfig { oris_grid: GridSpec::new(15, 2), ..SceneConfig::default() };
        let scene = build_scene(&cfg).unwrap();
        assert!((scene.oris_element_area() - 0.1333).abs() < 5e-5);
        let cfg = SceneConfig { oris_grid: GridSpec::new(90, 20), ..SceneConfig::default() };
        let scene = build_scene(&cfg).unwrap();
        assert!((scene.oris_element_area() - 0.00222).abs() < 5e-6);
    }

    #[test]
    fn zero_rows_means_no_mirrors() {
        let cfg = SceneConfig { oris_grid: GridSpec::new(30, 0), ..SceneConfig::default() };
        let scene = build_scene(&cfg).unwrap();
        assert!(scene.oris.is_empty());
        assert_eq!(scene.oris_element_area(), 0.0);
    }

    #[test]
    fn wall_areas_sum_to_lower_band() {
        let scene = build_scene(&SceneConfig::default()).unwrap();
        for wall in 0..4u8 {
            let total: f64 = scene.walls.iter().filter(|w| w.wall == wall).map(|w| w.area).sum();
            let expected = 4.0 * 2.0;
            assert!(((total - expected) / expected).abs() < 1e-9);
            let mirrors: f64 = scene.oris.iter().filter(|w| w.wall == wall).map(|w| w.area).sum();
            assert!(((mirrors - 4.0) / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SceneConfig::default();
        let bad = SceneConfig { wall_grid: GridSpec::new(0, 10), ..base.clone() };
        assert_eq!(build_scene(&bad).unwrap_err(), SceneError::UntiledWallBand);
        let mut bad = base.clone();
        bad.room.width = 0.0;
        assert!(matches!(build_scene(&bad), Err(SceneError::NonPositive(_))));
        let bad = SceneConfig { half_power_semiangle: FRAC_PI_2, ..base.clone() };
        assert!(build_scene(&bad).is_err());
        let bad = SceneConfig { reflectance_wall: 1.5, ..base.clone() };
        assert!(build_scene(&bad).is_err());
        let mut bad = base.clone();
        bad.body.device_offset = 0.1;
        assert!(build_scene(&bad).is_err());
    }

    #[test]
    fn rejects_users_outside() {
        let scene = build_scene(&SceneConfig::default()).unwrap();
        assert!(scene.clone().with_users(alloc::vec![user(0.1, 2.0, 0.0)]).is_err());
        // PD pokes through the wall.
        assert!(scene.clone().with_users(alloc::vec![user(0.2, 2.0, PI)]).is_err());
        assert!(scene.with_users(alloc::vec![user(2.0, 2.0, PI)]).is_ok());
    }

    #[test]
    fn matching_wall_grid_default() {
        assert_eq!(SceneConfig::matching_wall_grid(GridSpec::new(30, 5), 1.0 / 3.0), GridSpec::new(30, 10));
        assert_eq!(SceneConfig::matching_wall_grid(GridSpec::new(90, 20), 1.0 / 3.0), GridSpec::new(90, 40));
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-0.5) - (2.0 * PI - 0.5)).abs() < 1e-12);
        assert!(wrap_angle(2.0 * PI) < 1e-12);
    }
}
