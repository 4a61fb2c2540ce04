//! Device models for the two memristor families.
//!
//! Units throughout the crate: voltages in mV, resistances in Ω, currents in
//! mA. Since 1 mV / 1 Ω = 1 mA, Ohm's law needs no rescaling. The diffusion
//! device passes a voltage spike through as a numerically equal current spike
//! (unity transconductance).

use crate::error::{Error, Result};

/// Low-resistance bound of the drift memristor (Ω).
pub const R_ON: f64 = 14.0;
/// High-resistance bound of the drift memristor (Ω).
pub const R_OFF: f64 = 14_000.0;
/// Read-out current source used during inference (mA).
pub const READOUT_PROBE_MA: f64 = 0.1;

/// Fire threshold of a diffusion (threshold-switch) memristor, in mV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionThreshold(f64);

impl DiffusionThreshold {
    pub fn new(mv: f64) -> Result<Self> {
        if !(mv >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diffusion threshold must be >= 0 mV, got {mv}"
            )));
        }
        Ok(Self(mv))
    }

    pub fn mv(self) -> f64 {
        self.0
    }

    /// Output current for a driving voltage spike.
    pub fn fire(self, u_input: f64) -> Result<f64> {
        diffusion_transfer(u_input, self.0)
    }
}

/// Threshold-switch transfer: the input spike passes through when it exceeds
/// the threshold and is blocked otherwise (including equality).
pub fn diffusion_transfer(u_input: f64, threshold: f64) -> Result<f64> {
    if !(u_input >= 0.0) || !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "diffusion_transfer needs non-negative inputs, got u={u_input} threshold={threshold}"
        )));
    }
    Ok(fire_unchecked(u_input, threshold))
}

#[inline]
pub(crate) fn fire_unchecked(u_input: f64, threshold: f64) -> f64 {
    if u_input > threshold {
        u_input
    } else {
        0.0
    }
}

/// Parameters of the charge-linear drift memristor.
///
/// `k2` is the slope of memristance against accumulated spike area; the
/// physical constants (ion mobility, device thickness) only ever appear
/// folded into it. `window_factor` is a constant multiplier on that slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    pub r_on: f64,
    pub r_off: f64,
    pub k2: f64,
    pub window_factor: f64,
}

impl Default for DriftParams {
    /// Standard device bounds with a unit slope; `k2` is normally replaced by
    /// calibration during training.
    fn default() -> Self {
        Self {
            r_on: R_ON,
            r_off: R_OFF,
            k2: 1.0,
            window_factor: 1.0,
        }
    }
}

impl DriftParams {
    pub fn new(r_on: f64, r_off: f64, k2: f64, window_factor: f64) -> Result<Self> {
        let p = Self {
            r_on,
            r_off,
            k2,
            window_factor,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_on < self.r_off && self.r_off.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < r_on < r_off, got r_on={} r_off={}",
                self.r_on, self.r_off
            )));
        }
        if !(self.k2 > 0.0 && self.k2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "k2 must be positive, got {}",
                self.k2
            )));
        }
        check_window(self.window_factor)
    }

    /// Slope actually applied to the accumulated area.
    pub fn effective_slope(&self) -> f64 {
        self.k2 * self.window_factor
    }

    pub fn memristance(&self, area: f64) -> Result<f64> {
        drift_memristance(self, area)
    }
}

fn check_window(f: f64) -> Result<()> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window factor must lie in (0, 1], got {f}"
        )));
    }
    Ok(())
}

/// Memristance after `area` units of spike charge: `r_off - k2 * f * area`,
/// clamped into `[r_on, r_off]`.
pub fn drift_memristance(params: &DriftParams, area: f64) -> Result<f64> {
    if !(area >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spike area must be >= 0, got {area}"
        )));
    }
    Ok(memristance_unchecked(params, area))
}

#[inline]
pub(crate) fn memristance_unchecked(params: &DriftParams, area: f64) -> f64 {
    (params.r_off - params.effective_slope() * area).clamp(params.r_on, params.r_off)
}

/// Window-function variant. With a constant window factor it is the plain
/// model with slope `k2 * f`, so this validates `f` and delegates.
pub fn windowed_drift_memristance(params: &DriftParams, area: f64) -> Result<f64> {
    check_window(params.window_factor)?;
    drift_memristance(params, area)
}

/// Current through a drift device of memristance `m` driven at `u` mV.
pub fn drift_current(u: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidState(format!(
            "memristance must be positive, got {m}"
        )));
    }
    Ok(u / m)
}

/// Voltage across a drift device when read with a constant probe current.
/// Reading does not touch the accumulated area.
pub fn drift_readout(m: f64, probe: f64) -> Result<f64> {
    if !(probe > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "probe current must be positive, got {probe}"
        )));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidState(format!(
            "memristance must be positive, got {m}"
        )));
    }
    Ok(probe * m)
}

/// Accumulated charge and resulting memristance of one drift device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftState {
    accumulated_area: f64,
    memristance: f64,
}

impl DriftState {
    pub fn fresh(params: &DriftParams) -> Self {
        Self {
            accumulated_area: 0.0,
            memristance: params.r_off,
        }
    }

    pub fn accumulated_area(&self) -> f64 {
        self.accumulated_area
    }

    pub fn memristance(&self) -> f64 {
        self.memristance
    }

    /// Applies one spike. Areas only ever grow.
    pub fn apply_spike(&mut self, params: &DriftParams, area: f64) -> Result<()> {
        if !(area >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spike area must be >= 0, got {area}"
            )));
        }
        self.accumulated_area += area;
        self.memristance = memristance_unchecked(params, self.accumulated_area);
        Ok(())
    }

    /// Probe voltage for this device.
    pub fn read(&self, probe: f64) -> Result<f64> {
        drift_readout(self.memristance, probe)
    }
}
