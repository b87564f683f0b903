//! Okumura–Hata urban path loss with the small/medium-city mobile antenna
//! correction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Distances below this are clamped before evaluating the model.
pub const MIN_DISTANCE_M: f64 = 35.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HataParams {
    pub freq_mhz: f64,
    pub h_bs: f64,
    pub h_user: f64,
}

impl Default for HataParams {
    fn default() -> Self {
        HataParams {
            freq_mhz: 900.0,
            h_bs: 30.0,
            h_user: 1.5,
        }
    }
}

impl HataParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("freq_mhz", self.freq_mhz), ("h_bs", self.h_bs), ("h_user", self.h_user)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Mobile antenna correction `a(h)` in dB.
    pub fn mobile_correction_db(&self) -> f64 {
        let lf = math::log10(self.freq_mhz);
        (1.1 * lf - 0.7) * self.h_user - (1.56 * lf - 0.8)
    }
}

/// Parameter outside the published validity range of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HataWarning {
    /// Valid range 150–1500 MHz.
    Frequency(f64),
    /// Valid range 30–200 m.
    BaseStationHeight(f64),
    /// Valid range 1–10 m.
    UserHeight(f64),
    /// Valid range 1–20 km (after clamping).
    Distance(f64),
}

pub fn validity_warnings(distance_m: f64, p: &HataParams) -> Vec<HataWarning> {
    let mut w = Vec::new();
    if !(150.0..=1500.0).contains(&p.freq_mhz) {
        w.push(HataWarning::Frequency(p.freq_mhz));
    }
    if !(30.0..=200.0).contains(&p.h_bs) {
        w.push(HataWarning::BaseStationHeight(p.h_bs));
    }
    if !(1.0..=10.0).contains(&p.h_user) {
        w.push(HataWarning::UserHeight(p.h_user));
    }
    let d = distance_m.max(MIN_DISTANCE_M);
    if !(1000.0..=20_000.0).contains(&d) {
        w.push(HataWarning::Distance(d));
    }
    w
}

/// Path loss in dB at `distance_m` meters (clamped below at 35 m).
pub fn hata_path_loss_db(distance_m: f64, p: &HataParams) -> Result<f64> {
    p.validate()?;
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::param("distance", "must be finite and > 0"));
    }
    let d_km = distance_m.max(MIN_DISTANCE_M) / 1000.0;
    let lf = math::log10(p.freq_mhz);
    let lh = math::log10(p.h_bs);
    Ok(69.55 + 26.16 * lf - 13.82 * lh - p.mobile_correction_db() + (44.9 - 6.55 * lh) * math::log10(d_km))
}

/// Linear power gain `10^(−PL/10)`.
pub fn hata_urban_gain(distance_m: f64, p: &HataParams) -> Result<f64> {
    Ok(math::powf(10.0, -hata_path_loss_db(distance_m, p)? / 10.0))
}
