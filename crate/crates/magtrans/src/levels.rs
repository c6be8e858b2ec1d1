//! Static transition energies versus bias field, and the field at which the
//! magnon mode crosses the erbium spin transition.
//!
//! Three transitions matter. The uniform magnon of the iron lattice stiffens
//! with field as gamma * sqrt(Bz * (Bz + Ms)) and carries a tiny downward
//! shift from the parallel exchange, spread over the whole spin ensemble. The
//! erbium spin flip is linear in field through the ground-state g-factor and
//! is pushed up by half the parallel exchange per neighbor. The optical
//! transition starts at its zero-field energy and shifts with the difference
//! of excited and ground g-factors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DeviceConfig;

/// Energy of the uniform magnon mode at bias field `bz` (tesla), in Hz.
/// Zero when the device has no magnet.
pub fn magnon_energy(cfg: &DeviceConfig, bz: f64) -> Result<f64> {
    check_field(bz)?;
    let Some(m) = &cfg.magnet else {
        return Ok(0.0);
    };
    let gamma = m.gamma(&cfg.constants);
    Ok(gamma * (bz * (bz + m.m_s)).sqrt() - m.z * m.j_par / (2.0 * m.n_fe))
}

/// Energy of the erbium spin-flip transition at bias field `bz`, in Hz.
pub fn spin_energy(cfg: &DeviceConfig, bz: f64) -> Result<f64> {
    check_field(bz)?;
    let zeeman = cfg.constants.bohr_magneton_over_h * cfg.erbium.g_g * bz;
    let exchange = cfg
        .magnet
        .as_ref()
        .map(|m| m.z * m.j_par / 2.0)
        .unwrap_or(0.0);
    Ok(zeeman + exchange)
}

/// Energy of the spin-preserving optical transition at bias field `bz`, in Hz.
pub fn optical_energy(cfg: &DeviceConfig, bz: f64) -> Result<f64> {
    check_field(bz)?;
    Ok(cfg.erbium.delta_e_e
        + cfg.constants.bohr_magneton_over_h * (cfg.erbium.g_e - cfg.erbium.g_g) * bz)
}

/// Transition energies measured from the cavity resonances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detunings {
    /// Spin transition minus the microwave cavity, Hz.
    pub spin: f64,
    /// Magnon mode minus the microwave cavity, Hz.
    pub magnon: f64,
    /// Optical transition minus the optical cavity, Hz.
    pub optical: f64,
}

/// Detunings of the three transitions from their cavities at field `bz`.
pub fn detunings(cfg: &DeviceConfig, bz: f64) -> Result<Detunings> {
    Ok(Detunings {
        spin: spin_energy(cfg, bz)? - cfg.cavities.omega_b,
        magnon: magnon_energy(cfg, bz)? - cfg.cavities.omega_b,
        optical: optical_energy(cfg, bz)? - cfg.cavities.omega_a,
    })
}

/// Pump frequency that bridges the two cavities, Hz.
pub fn pump_frequency(cfg: &DeviceConfig) -> Result<f64> {
    let gap = cfg.cavities.omega_a - cfg.cavities.omega_b;
    if gap <= 0.0 {
        return Err(Error::Domain(format!(
            "pump frequency requires omega_a > omega_b, got gap {gap}"
        )));
    }
    Ok(gap)
}

/// Field and frequency at which the magnon and spin transitions meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// Bias field at the crossing, tesla.
    pub bz: f64,
    /// Common transition frequency there, Hz.
    pub frequency: f64,
}

/// Locate the magnon-spin crossing inside `[lo, hi]` (tesla) by bisection.
///
/// The magnon branch is concave in field while the spin branch is linear, so
/// a bracketing interval contains exactly one crossing. An interval whose
/// endpoints both sit on the same side fails with the interval in the error;
/// endpoints that are both already degenerate (the branches coincide to
/// within rounding across the interval) fail too, since no isolated crossing
/// exists.
pub fn crossing_field(cfg: &DeviceConfig, lo: f64, hi: f64) -> Result<Crossing> {
    if cfg.magnet.is_none() {
        return Err(Error::Domain(
            "crossing search requires a magnet section".into(),
        ));
    }
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Domain(format!(
            "crossing interval must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let gap = |b: f64| -> Result<f64> { Ok(magnon_energy(cfg, b)? - spin_energy(cfg, b)?) };
    let scale = spin_energy(cfg, hi)?.abs().max(1.0);
    let f_lo = gap(lo)?;
    let f_hi = gap(hi)?;
    if f_lo.abs() <= 1e-9 * scale && f_hi.abs() <= 1e-9 * scale {
        return Err(Error::DegenerateCrossing { lo, hi });
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoCrossing { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut f_a = f_lo;
    for _ in 0..128 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let f_mid = gap(mid)?;
        if f_a * f_mid <= 0.0 {
            b = mid;
        } else {
            a = mid;
            f_a = f_mid;
        }
    }
    let bz = 0.5 * (a + b);
    Ok(Crossing {
        bz,
        frequency: spin_energy(cfg, bz)?,
    })
}

/// Magnon and spin branches sampled over a field range, with the crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurves {
    /// Sampled bias fields, tesla.
    pub bz: Vec<f64>,
    /// Magnon branch at each field, Hz.
    pub magnon: Vec<f64>,
    /// Spin branch at each field, Hz.
    pub spin: Vec<f64>,
    pub crossing: Crossing,
}

/// Sample both branches on a uniform field grid and locate the crossing
/// inside it.
pub fn level_curves(cfg: &DeviceConfig, lo: f64, hi: f64, count: usize) -> Result<LevelCurves> {
    if count < 2 {
        return Err(Error::Validation(format!(
            "level curves need at least 2 samples, got {count}"
        )));
    }
    let crossing = crossing_field(cfg, lo, hi)?;
    let mut bz = Vec::with_capacity(count);
    let mut magnon = Vec::with_capacity(count);
    let mut spin = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        let b = if i == 0 {
            lo
        } else if i == count - 1 {
            hi
        } else {
            lo + (hi - lo) * t
        };
        bz.push(b);
        magnon.push(magnon_energy(cfg, b)?);
        spin.push(spin_energy(cfg, b)?);
    }
    Ok(LevelCurves {
        bz,
        magnon,
        spin,
        crossing,
    })
}

fn check_field(bz: f64) -> Result<()> {
    if bz >= 0.0 && bz.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "bias field must be non-negative and finite, got {bz}"
        )))
    }
}
