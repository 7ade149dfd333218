//! Fiber link model: loss-limited success probability and photon trip time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in fiber, km/s.
pub const FIBER_LIGHT_SPEED_KM_PER_S: f64 = 2.0e5;
/// Standard telecom fiber attenuation, dB/km.
pub const DEFAULT_ATTENUATION_DB_PER_KM: f64 = 0.15;

/// One repeater-to-node fiber link.
///
/// `success_prob` and `trip_time_s` are derived once at construction; use
/// [`make_link`] rather than building the struct by hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams<T> {
    pub distance_km: T,
    pub attenuation_db_per_km: T,
    pub light_speed_km_per_s: T,
    /// Per-attempt heralded success probability, `10^(-att * d / 10)`.
    pub success_prob: T,
    /// One attempt takes one photon trip, `d / c`.
    pub trip_time_s: T,
}

pub fn make_link<T: Real>(
    distance_km: T,
    attenuation_db_per_km: T,
    light_speed_km_per_s: T,
) -> Result<LinkParams<T>> {
    if !distance_km.is_finite() || distance_km <= T::zero() {
        return Err(Error::param("distance_km", format!("must be finite and > 0, got {distance_km}")));
    }
    if !attenuation_db_per_km.is_finite() || attenuation_db_per_km < T::zero() {
        return Err(Error::param(
            "attenuation_db_per_km",
            format!("must be finite and >= 0, got {attenuation_db_per_km}"),
        ));
    }
    if !light_speed_km_per_s.is_finite() || light_speed_km_per_s <= T::zero() {
        return Err(Error::param(
            "light_speed_km_per_s",
            format!("must be finite and > 0, got {light_speed_km_per_s}"),
        ));
    }
    let loss_db = attenuation_db_per_km * distance_km;
    let success_prob = T::lit(10.0).powf(-loss_db / T::lit(10.0));
    if success_prob <= T::zero() {
        return Err(Error::param("distance_km", format!("link loss of {loss_db} dB underflows")));
    }
    Ok(LinkParams {
        distance_km,
        attenuation_db_per_km,
        light_speed_km_per_s,
        success_prob,
        trip_time_s: distance_km / light_speed_km_per_s,
    })
}

/// Duration of one balanced-repeater round: both banks attempt in parallel,
/// so the slower side sets the pace.
pub fn round_time<T: Real>(left: &LinkParams<T>, right: &LinkParams<T>) -> T {
    left.trip_time_s.max(right.trip_time_s)
}

impl<T: Real> LinkParams<T> {
    /// Link at the default fiber attenuation and light speed.
    pub fn fiber(distance_km: T) -> Result<Self> {
        make_link(
            distance_km,
            T::lit(DEFAULT_ATTENUATION_DB_PER_KM),
            T::lit(FIBER_LIGHT_SPEED_KM_PER_S),
        )
    }
}
