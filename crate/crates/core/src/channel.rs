//! Air-to-ground and UAV-to-UAV link budgets.
//!
//! All powers are carried in dBm and all losses in dB. The access link uses a
//! probabilistic LoS/NLoS mixture driven by the elevation angle (in degrees);
//! the backhaul link between two airborne UAVs is pure free-space LoS.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Altitude of the reference suburban deployment, in metres.
pub const REFERENCE_ALTITUDE: f64 = 1500.0;
/// Ground coverage radius of the reference suburban deployment, in metres.
pub const REFERENCE_GROUND_RADIUS: f64 = 3300.0;

/// Bisection resolution for the ground radius, in metres.
pub const RADIUS_TOLERANCE: f64 = 0.1;
/// Golden-section resolution for the optimal altitude, in metres.
pub const ALTITUDE_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Access-link carrier frequency (Hz).
    pub carrier_frequency: f64,
    /// Backhaul carrier frequency (Hz); equal to the access carrier by default.
    pub backhaul_frequency: f64,
    pub env_a: f64,
    /// Per-degree slope of the LoS probability curve.
    pub env_b: f64,
    pub loss_los: f64,
    pub loss_nlos: f64,
    /// Transmit power (dBm).
    pub tx_power: f64,
    /// Noise power spectral density (dBm/Hz).
    pub noise_psd: f64,
    pub bandwidth: f64,
    pub light_speed: f64,
}

impl ChannelParams {
    /// Suburban parameters: 2 GHz carrier, 1 W transmitter, 15 MHz channel.
    pub fn suburban() -> Self {
        Self {
            carrier_frequency: 2.0e9,
            backhaul_frequency: 2.0e9,
            env_a: 4.88,
            env_b: 0.429,
            loss_los: 0.1,
            loss_nlos: 21.0,
            tx_power: 30.0,
            noise_psd: -174.0,
            bandwidth: 15.0e6,
            light_speed: SPEED_OF_LIGHT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.carrier_frequency,
            self.backhaul_frequency,
            self.env_a,
            self.env_b,
            self.loss_los,
            self.loss_nlos,
            self.tx_power,
            self.noise_psd,
            self.bandwidth,
            self.light_speed,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("channel parameters must be finite".into()));
        }
        if self.carrier_frequency <= 0.0 || self.backhaul_frequency <= 0.0 {
            return Err(Error::InvalidParameter("carrier frequency must be positive".into()));
        }
        if self.bandwidth <= 0.0 || self.light_speed <= 0.0 {
            return Err(Error::InvalidParameter("bandwidth and light speed must be positive".into()));
        }
        if self.env_a <= 0.0 || self.env_b <= 0.0 {
            return Err(Error::InvalidParameter("environment constants a, b must be positive".into()));
        }
        if !(self.loss_nlos >= self.loss_los && self.loss_los >= 0.0) {
            return Err(Error::InvalidParameter("need loss_nlos >= loss_los >= 0".into()));
        }
        Ok(())
    }

    /// Thermal noise power over the channel bandwidth (dBm).
    pub fn noise_power(&self) -> f64 {
        self.noise_psd + 10.0 * self.bandwidth.log10()
    }

    /// Largest tolerable path loss for a given SNR threshold (dB).
    pub fn loss_budget(&self, snr_min: f64) -> f64 {
        self.tx_power - self.noise_power() - snr_min
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::suburban()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkThresholds {
    /// Minimum access SNR (dB).
    pub access_snr_min: f64,
    /// Minimum backhaul SNR (dB).
    pub backhaul_snr_min: f64,
}

impl LinkThresholds {
    pub fn new(access_snr_min: f64, backhaul_snr_min: f64) -> Self {
        Self { access_snr_min, backhaul_snr_min }
    }

    pub fn validate(&self) -> Result<()> {
        if self.access_snr_min.is_finite() && self.backhaul_snr_min.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter("SNR thresholds must be finite".into()))
        }
    }
}

impl Default for LinkThresholds {
    fn default() -> Self {
        Self::new(4.0, 15.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageGeometry {
    pub altitude: f64,
    pub ground_radius: f64,
    pub backhaul_radius: f64,
}

impl CoverageGeometry {
    pub fn validate(&self) -> Result<()> {
        let ok = self.altitude.is_finite()
            && self.ground_radius.is_finite()
            && self.backhaul_radius.is_finite()
            && self.altitude > 0.0
            && self.ground_radius > 0.0
            && self.backhaul_radius > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("degenerate coverage geometry {self:?}")))
        }
    }

    /// Whether UAV-to-UAV range exceeds ground coverage range.
    pub fn backhaul_dominates(&self) -> bool {
        self.backhaul_radius > self.ground_radius
    }
}

fn free_space_loss(frequency: f64, light_speed: f64, dist: f64) -> f64 {
    20.0 * (4.0 * PI * frequency * dist / light_speed).log10()
}

/// Elevation angle in degrees; straight overhead is 90°.
pub fn elevation_deg(horiz_dist: f64, altitude: f64) -> f64 {
    if horiz_dist == 0.0 {
        90.0
    } else {
        (altitude / horiz_dist).atan().to_degrees()
    }
}

/// LoS probability for a ground point seen from `altitude`.
pub fn los_probability(params: &ChannelParams, horiz_dist: f64, altitude: f64) -> f64 {
    let theta = elevation_deg(horiz_dist, altitude);
    1.0 / (1.0 + params.env_a * (-params.env_b * (theta - params.env_a)).exp())
}

fn check_access_geometry(horiz_dist: f64, altitude: f64) -> Result<()> {
    if !(altitude > 0.0 && altitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("altitude must be positive, got {altitude}")));
    }
    if !(horiz_dist >= 0.0 && horiz_dist.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "horizontal distance must be non-negative, got {horiz_dist}"
        )));
    }
    Ok(())
}

/// Mean access-link path loss (dB), LoS/NLoS weighted by elevation.
pub fn access_path_loss(params: &ChannelParams, horiz_dist: f64, altitude: f64) -> Result<f64> {
    check_access_geometry(horiz_dist, altitude)?;
    Ok(access_loss_unchecked(params, horiz_dist, altitude))
}

fn access_loss_unchecked(params: &ChannelParams, horiz_dist: f64, altitude: f64) -> f64 {
    let d = horiz_dist.hypot(altitude);
    let fspl = free_space_loss(params.carrier_frequency, params.light_speed, d);
    let p_los = los_probability(params, horiz_dist, altitude);
    p_los * (fspl + params.loss_los) + (1.0 - p_los) * (fspl + params.loss_nlos)
}

/// UAV-to-UAV free-space path loss (dB).
pub fn backhaul_path_loss(params: &ChannelParams, dist_3d: f64) -> Result<f64> {
    if !(dist_3d > 0.0 && dist_3d.is_finite()) {
        return Err(Error::InvalidParameter(format!("backhaul distance must be positive, got {dist_3d}")));
    }
    Ok(free_space_loss(params.backhaul_frequency, params.light_speed, dist_3d))
}

pub fn snr(params: &ChannelParams, path_loss: f64) -> Result<f64> {
    if !path_loss.is_finite() {
        return Err(Error::InvalidParameter("path loss must be finite".into()));
    }
    Ok(params.tx_power - path_loss - params.noise_power())
}

fn access_snr(params: &ChannelParams, horiz_dist: f64, altitude: f64) -> f64 {
    params.tx_power - access_loss_unchecked(params, horiz_dist, altitude) - params.noise_power()
}

/// Largest 3D distance meeting the backhaul threshold, by inverting the
/// free-space law.
pub fn backhaul_radius(params: &ChannelParams, backhaul_snr_min: f64) -> f64 {
    let budget = params.loss_budget(backhaul_snr_min);
    params.light_speed / (4.0 * PI * params.backhaul_frequency) * 10f64.powf(budget / 20.0)
}

/// Largest horizontal distance meeting the access threshold at `altitude`.
pub fn ground_radius(params: &ChannelParams, access_snr_min: f64, altitude: f64) -> Result<f64> {
    check_access_geometry(0.0, altitude)?;
    if access_snr(params, 0.0, altitude) < access_snr_min {
        return Err(Error::InfeasibleLink(format!(
            "access SNR below {access_snr_min} dB even directly beneath a UAV at {altitude} m"
        )));
    }
    // The mixture loss is never below pure LoS loss, so the LoS-only range
    // bounds the answer from above.
    let budget = params.loss_budget(access_snr_min);
    let los_range = params.light_speed / (4.0 * PI * params.carrier_frequency)
        * 10f64.powf((budget - params.loss_los) / 20.0);
    let mut hi = (los_range * los_range - altitude * altitude).max(0.0).sqrt();
    if access_snr(params, hi, altitude) >= access_snr_min {
        return Ok(hi);
    }
    let mut lo = 0.0;
    while hi - lo > RADIUS_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if access_snr(params, mid, altitude) >= access_snr_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn coverage_radii(
    params: &ChannelParams,
    thresholds: &LinkThresholds,
    altitude: f64,
) -> Result<CoverageGeometry> {
    params.validate()?;
    thresholds.validate()?;
    let ground = ground_radius(params, thresholds.access_snr_min, altitude)?;
    if ground <= 0.0 {
        return Err(Error::InfeasibleLink(format!("zero ground coverage at altitude {altitude} m")));
    }
    Ok(CoverageGeometry {
        altitude,
        ground_radius: ground,
        backhaul_radius: backhaul_radius(params, thresholds.backhaul_snr_min),
    })
}

/// Highest altitude at which a user directly below still meets the access
/// threshold.
fn ceiling_altitude(params: &ChannelParams, access_snr_min: f64, h_max: f64) -> f64 {
    if access_snr(params, 0.0, h_max) >= access_snr_min {
        return h_max;
    }
    let (mut lo, mut hi) = (0.0, h_max);
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if access_snr(params, 0.0, mid) >= access_snr_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Altitude in `[h_min, h_max]` with the widest ground coverage.
pub fn optimal_altitude(
    params: &ChannelParams,
    thresholds: &LinkThresholds,
    h_min: f64,
    h_max: f64,
) -> Result<CoverageGeometry> {
    params.validate()?;
    thresholds.validate()?;
    if !(h_min > 0.0 && h_min <= h_max && h_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 0 < h_min <= h_max, got [{h_min}, {h_max}]")));
    }
    let gamma = thresholds.access_snr_min;
    let top = ceiling_altitude(params, gamma, h_max);
    if top < h_min {
        return Err(Error::InfeasibleLink(format!(
            "no altitude in [{h_min}, {h_max}] m meets the access threshold"
        )));
    }
    let radius = |h: f64| ground_radius(params, gamma, h).unwrap_or(0.0);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (h_min, top);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (radius(c), radius(d));
    while b - a > ALTITUDE_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = radius(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = radius(d);
        }
    }
    // Compare the bracket midpoint against the endpoints so a monotone
    // profile still lands on the right boundary.
    let mid = 0.5 * (a + b);
    let best = [mid, h_min, top]
        .into_iter()
        .map(|h| (h, radius(h)))
        .fold((mid, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if best.1 <= 0.0 {
        return Err(Error::InfeasibleLink(format!(
            "no altitude in [{h_min}, {h_max}] m yields positive ground coverage"
        )));
    }
    coverage_radii(params, thresholds, best.0)
}
