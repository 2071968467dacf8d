//! Lambertian channel gains and the affine optical-SNR model.
//!
//! With the signal scaled as `ρ·P_sc/√(N₀B_n)`, `B_n` the noise bandwidth, the
//! optical SNR of user `u` is `γ'_u(β) = c_u + Σ_{l,k} a_{l,k,u}·β_{l,k,u}` and the electrical SNR is its
//! square. `c_u` collects line-of-sight and diffuse wall light, `a` the
//! contribution of every unblocked LED -> mirror -> user path.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use crate::blockage::BlockageMap;
use crate::geometry::Vec3;
use crate::math;
use crate::scene::{LedSpec, PdSpec, Scene, WallElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainError(pub &'static str);

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl core::error::Error for DomainError {}

/// `m = -1 / log2(cos φ½)` for a half-power semi-angle in `(0, π/2)`.
pub fn lambertian_order(half_power_semiangle: f64) -> Result<f64, DomainError> {
    if !(half_power_semiangle > 0.0 && half_power_semiangle < FRAC_PI_2) {
        return Err(DomainError("half-power semi-angle must lie in (0, pi/2)"));
    }
    Ok(-1.0 / math::log2(math::cos(half_power_semiangle)))
}

/// Distance and the two cosines of one straight hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub distance: f64,
    /// Cosine of the irradiance angle at the emitting surface.
    pub cos_emission: f64,
    /// Cosine of the incidence angle at the receiving surface.
    pub cos_incidence: f64,
}

impl PathGeometry {
    pub fn between(from: Vec3, from_normal: Vec3, to: Vec3, to_normal: Vec3) -> Self {
        let v = to - from;
        let d = v.norm();
        Self { distance: d, cos_emission: from_normal.dot(v) / d, cos_incidence: -to_normal.dot(v) / d }
    }
}

/// `cos^m` for non-integer `m`, zero for non-positive cosines.
fn cos_pow(c: f64, m: f64) -> f64 {
    if c <= 0.0 {
        0.0
    } else {
        math::exp(m * math::ln(c.min(1.0)))
    }
}

fn lambertian_prefactor(m: f64, pd: &PdSpec) -> f64 {
    (m + 1.0) * pd.area / (2.0 * PI)
}

fn within_fov(cos_incidence: f64, pd: &PdSpec) -> bool {
    cos_incidence > 0.0 && cos_incidence >= math::cos(pd.fov_semiangle)
}

/// Line-of-sight gain; zero when the path is blocked.
pub fn los_gain(led: &LedSpec, pd_pos: Vec3, pd: &PdSpec, blocked: bool) -> f64 {
    if blocked {
        return 0.0;
    }
    let g = PathGeometry::between(led.position, LedSpec::NORMAL, pd_pos, PdSpec::NORMAL);
    if g.cos_emission <= 0.0 || !within_fov(g.cos_incidence, pd) {
        return 0.0;
    }
    let m = led.lambertian_order;
    lambertian_prefactor(m, pd) / (g.distance * g.distance) * cos_pow(g.cos_emission, m) * g.cos_incidence
}

/// Gain of LED -> mirror -> photodetector for a mirror steered at the user.
///
/// The mirror acts as a point reflector: the gain uses the unfolded path
/// length and carries no mirror-orientation or area term.
pub fn oris_gain(led: &LedSpec, mirror: Vec3, pd_pos: Vec3, pd: &PdSpec, reflectance: f64) -> f64 {
    let d_lk = led.position.distance(mirror);
    let d_ku = mirror.distance(pd_pos);
    let cos_emit = LedSpec::NORMAL.dot(mirror - led.position) / d_lk;
    let cos_inc = PdSpec::NORMAL.dot(mirror - pd_pos) / d_ku;
    if cos_emit <= 0.0 || !within_fov(cos_inc, pd) {
        return 0.0;
    }
    let m = led.lambertian_order;
    let d = d_lk + d_ku;
    reflectance * lambertian_prefactor(m, pd) / (d * d) * cos_pow(cos_emit, m) * cos_inc
}

/// Gain of LED -> diffuse wall patch -> photodetector.
pub fn wall_gain(led: &LedSpec, patch: &WallElement, pd_pos: Vec3, pd: &PdSpec, reflectance: f64) -> f64 {
    let first = PathGeometry::between(led.position, LedSpec::NORMAL, patch.center, patch.normal);
    let second = PathGeometry::between(patch.center, patch.normal, pd_pos, PdSpec::NORMAL);
    if first.cos_emission <= 0.0
        || first.cos_incidence <= 0.0
        || second.cos_emission <= 0.0
        || !within_fov(second.cos_incidence, pd)
    {
        return 0.0;
    }
    let m = led.lambertian_order;
    let d2 = first.distance * first.distance * second.distance * second.distance;
    reflectance * lambertian_prefactor(m, pd) * patch.area / d2
        * cos_pow(first.cos_emission, m)
        * first.cos_incidence
        * second.cos_emission
        * second.cos_incidence
}

/// Bandwidth the noise power is integrated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NoiseBandwidth {
    /// One subcarrier, `B / N`.
    #[default]
    Subcarrier,
    /// The whole receiver bandwidth `B`.
    Receiver,
}

/// Transmit power, modulation and noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadioConfig {
    /// Total optical power per LED, W.
    pub total_power: f64,
    /// DCO-OFDM subcarrier count; two carry no data.
    pub subcarriers: u32,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// Receiver bandwidth, Hz.
    pub bandwidth: f64,
    pub noise_bandwidth: NoiseBandwidth,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { total_power: 10.0, subcarriers: 512, noise_psd: 2.5e-20, bandwidth: 20e6, noise_bandwidth: NoiseBandwidth::Subcarrier }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.subcarriers <= 2 {
            return Err(DomainError("subcarrier count must exceed 2"));
        }
        for (v, what) in [
            (self.total_power, "total power must be positive"),
            (self.noise_psd, "noise PSD must be positive"),
            (self.bandwidth, "bandwidth must be positive"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DomainError(what));
            }
        }
        Ok(())
    }

    /// Optical power per LED and subcarrier, `P_tot / √(N - 2)`.
    pub fn subcarrier_power(&self) -> f64 {
        self.total_power / math::sqrt(self.subcarriers as f64 - 2.0)
    }

    /// Noise power, W.
    pub fn noise_power(&self) -> f64 {
        match self.noise_bandwidth {
            NoiseBandwidth::Subcarrier => self.noise_psd * self.bandwidth / self.subcarriers as f64,
            NoiseBandwidth::Receiver => self.noise_psd * self.bandwidth,
        }
    }

    /// Factor turning a summed channel gain into optical SNR.
    pub fn snr_scale(&self, responsivity: f64) -> f64 {
        responsivity * self.subcarrier_power() / math::sqrt(self.noise_power())
    }
}

/// Optical-SNR contribution of mirror `element` relaying LED `led` to `user`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrisTerm {
    pub led: u32,
    pub element: u32,
    pub user: u32,
    pub value: f64,
}

impl OrisTerm {
    fn key(&self) -> (u32, u32, u32) {
        (self.user, self.element, self.led)
    }
}

/// The affine optical-SNR model of one deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients {
    pub leds: usize,
    pub elements: usize,
    /// Per-user constant term (line of sight plus diffuse walls).
    pub c: Vec<f64>,
    /// Positive mirror terms, sorted by (user, element, led).
    pub a: Vec<OrisTerm>,
    /// Gain-to-optical-SNR factor the coefficients were built with.
    pub scale: f64,
}

impl ChannelCoefficients {
    /// Builds coefficients from raw parts; terms that are not strictly
    /// positive are dropped and the rest sorted.
    pub fn from_parts(leds: usize, elements: usize, c: Vec<f64>, mut a: Vec<OrisTerm>) -> Self {
        a.retain(|t| t.value > 0.0 && t.value.is_finite());
        a.sort_by(|x, y| x.key().cmp(&y.key()));
        Self { leds, elements, c, a, scale: 1.0 }
    }

    pub fn users(&self) -> usize {
        self.c.len()
    }

    /// Mirror term for `(led, element, user)`, zero when absent.
    pub fn term(&self, led: usize, element: usize, user: usize) -> f64 {
        let key = (user as u32, element as u32, led as u32);
        self.a.binary_search_by(|t| t.key().cmp(&key)).map_or(0.0, |i| self.a[i].value)
    }

    /// Mirror terms of one user.
    pub fn terms_of(&self, user: usize) -> &[OrisTerm] {
        let u = user as u32;
        let lo = self.a.partition_point(|t| t.user < u);
        let hi = self.a.partition_point(|t| t.user <= u);
        &self.a[lo..hi]
    }

    /// `γ'_u` for every user under the given `(led, element, user)` triples.
    pub fn gamma_prime(&self, assignments: &[(usize, usize, usize)]) -> Vec<f64> {
        let mut g = self.c.clone();
        for &(l, k, u) in assignments {
            g[u] += self.term(l, k, u);
        }
        g
    }

    /// Same coefficients with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.c {
            *c *= factor;
        }
        for t in &mut out.a {
            t.value *= factor;
        }
        out.scale *= factor;
        out
    }
}

/// Raw (unmasked) gain tensors, kept for inspection and dumps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGains {
    pub leds: usize,
    pub elements: usize,
    pub patches: usize,
    pub users: usize,
    /// `[l][u]`
    pub los: Vec<f64>,
    /// `[l][k][u]`
    pub oris: Vec<f64>,
    /// `[l][w][u]`
    pub wall: Vec<f64>,
}

impl ChannelGains {
    pub fn compute(scene: &Scene) -> Self {
        let pds = scene.pd_positions();
        let (nl, nk, nw, nu) = (scene.leds.len(), scene.oris.len(), scene.walls.len(), pds.len());
        let mut los = Vec::with_capacity(nl * nu);
        let mut oris = Vec::with_capacity(nl * nk * nu);
        let mut wall = Vec::with_capacity(nl * nw * nu);
        for led in &scene.leds {
            for &p in &pds {
                los.push(los_gain(led, p, &scene.pd, false));
            }
            for e in &scene.oris {
                for &p in &pds {
                    oris.push(oris_gain(led, e.center, p, &scene.pd, scene.reflectance_oris));
                }
            }
            for w in &scene.walls {
                for &p in &pds {
                    wall.push(wall_gain(led, w, p, &scene.pd, scene.reflectance_wall));
                }
            }
        }
        Self { leds: nl, elements: nk, patches: nw, users: nu, los, oris, wall }
    }
}

/// Which reflector a dumped gain belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Los,
    Oris,
    Wall,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Los => "los",
            PathKind::Oris => "oris",
            PathKind::Wall => "wall",
        }
    }
}

/// One row of a channel dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRecord {
    pub path: PathKind,
    pub led: usize,
    /// Mirror or wall-patch index; zero for line of sight.
    pub reflector: usize,
    pub user: usize,
    pub gain: f64,
    pub blocked: bool,
}

/// Every gain with its blockage flag, LED-major.
pub fn gain_records(gains: &ChannelGains, blockage: &BlockageMap) -> Vec<GainRecord> {
    let (nl, nk, nw, nu) = (gains.leds, gains.elements, gains.patches, gains.users);
    let mut out = Vec::with_capacity(nl * (1 + nk + nw) * nu);
    for l in 0..nl {
        for u in 0..nu {
            out.push(GainRecord {
                path: PathKind::Los,
                led: l,
                reflector: 0,
                user: u,
                gain: gains.los[l * nu + u],
                blocked: !blockage.los(l, u),
            });
        }
        for k in 0..nk {
            for u in 0..nu {
                out.push(GainRecord {
                    path: PathKind::Oris,
                    led: l,
                    reflector: k,
                    user: u,
                    gain: gains.oris[(l * nk + k) * nu + u],
                    blocked: !blockage.oris(l, k, u),
                });
            }
        }
        for w in 0..nw {
            for u in 0..nu {
                out.push(GainRecord {
                    path: PathKind::Wall,
                    led: l,
                    reflector: w,
                    user: u,
                    gain: gains.wall[(l * nw + w) * nu + u],
                    blocked: !blockage.wall(l, w, u),
                });
            }
        }
    }
    out
}

/// Builds `c_u` and the mirror terms `a_{l,k,u}` of a deployment.
///
/// Sums run LED-major then reflector-index order, so the result is
/// bit-identical for identical inputs.
pub fn assemble_coefficients(scene: &Scene, blockage: &BlockageMap, radio: &RadioConfig) -> ChannelCoefficients {
    let scale = radio.snr_scale(scene.pd.responsivity);
    let pds = scene.pd_positions();
    let mut c = alloc::vec![0.0; pds.len()];
    let mut a = Vec::new();
    for (u, &p) in pds.iter().enumerate() {
        let mut total = 0.0;
        for (l, led) in scene.leds.iter().enumerate() {
            total += los_gain(led, p, &scene.pd, !blockage.los(l, u));
            for (w, patch) in scene.walls.iter().enumerate() {
                let g = wall_gain(led, patch, p, &scene.pd, scene.reflectance_wall);
                if g > 0.0 && blockage.wall(l, w, u) {
                    total += g;
                }
            }
        }
        c[u] = scale * total;
        for (k, e) in scene.oris.iter().enumerate() {
            for (l, led) in scene.leds.iter().enumerate() {
                let g = oris_gain(led, e.center, p, &scene.pd, scene.reflectance_oris);
                if g > 0.0 && blockage.oris(l, k, u) {
                    a.push(OrisTerm { led: l as u32, element: k as u32, user: u as u32, value: scale * g });
                }
            }
        }
    }
    // Pushed in (user, element, led) order already.
    debug_assert!(a.windows(2).all(|w| w[0].key().cmp(&w[1].key()) == Ordering::Less));
    ChannelCoefficients { leds: scene.leds.len(), elements: scene.oris.len(), c, a, scale }
}

/// Linear SNR threshold and its optical-SNR counterpart for a dB value.
pub fn snr_db_conversions(threshold_db: f64) -> (f64, f64) {
    let lin = math::pow(10.0, threshold_db / 10.0);
    (lin, math::sqrt(lin))
}

/// Electrical SNR in dB of an optical SNR `γ'` (`20·log10 γ'`).
pub fn snr_db_from_gamma_prime(gamma_prime: f64) -> f64 {
    20.0 * math::log10(gamma_prime)
}
