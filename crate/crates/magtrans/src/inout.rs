//! Stationary two-port response of the coupled cavities.
//!
//! Once the interior modes are eliminated, the device is two cavities joined
//! by a beam-splitter rate S, each with an external port and an intrinsic
//! loss channel. Everything here is expressed in terms of |S| and the four
//! loss rates; nothing in this module knows where S came from.
//!
//! Conventions: `kappa_*_c` are external (port) rates, `kappa_*_i` intrinsic
//! rates, and "total" means their sum. The conversion efficiency is the
//! magnitude of the port-to-port transmission at zero probe detuning.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be a non-negative finite rate, got {v}"
        )))
    }
}

/// Cooperativity of the link: 4|S|^2 over the product of total loss rates.
pub fn cooperativity(s_abs: f64, kappa_a: f64, kappa_b: f64) -> Result<f64> {
    check_rate("s_abs", s_abs)?;
    check_rate("kappa_a", kappa_a)?;
    check_rate("kappa_b", kappa_b)?;
    if kappa_a == 0.0 || kappa_b == 0.0 {
        return Err(Error::Domain(
            "cooperativity needs nonzero total loss rates".into(),
        ));
    }
    Ok(4.0 * s_abs * s_abs / (kappa_a * kappa_b))
}

/// Port-to-port conversion efficiency at zero probe detuning.
pub fn efficiency(
    s_abs: f64,
    kappa_a_c: f64,
    kappa_a_i: f64,
    kappa_b_c: f64,
    kappa_b_i: f64,
) -> Result<f64> {
    check_rate("s_abs", s_abs)?;
    check_rate("kappa_a_c", kappa_a_c)?;
    check_rate("kappa_a_i", kappa_a_i)?;
    check_rate("kappa_b_c", kappa_b_c)?;
    check_rate("kappa_b_i", kappa_b_i)?;
    let denom = (kappa_a_c + kappa_a_i) * (kappa_b_c + kappa_b_i) + 4.0 * s_abs * s_abs;
    if denom == 0.0 {
        return Err(Error::Domain(
            "efficiency undefined for a fully closed network".into(),
        ));
    }
    Ok(4.0 * s_abs * (kappa_a_c * kappa_b_c).sqrt() / denom)
}

/// Efficiency of a loss-free, fully coupled link as a function of
/// cooperativity: 2 sqrt(C) / (1 + C). Peaks at one when C = 1.
pub fn efficiency_lossless(cooperativity: f64) -> Result<f64> {
    if !(cooperativity >= 0.0) || !cooperativity.is_finite() {
        return Err(Error::Domain(format!(
            "cooperativity must be non-negative and finite, got {cooperativity}"
        )));
    }
    Ok(2.0 * cooperativity.sqrt() / (1.0 + cooperativity))
}

/// Efficiency at the coupling-rate matching point, given the
/// intrinsic-to-external rate ratios of the two cavities.
///
/// With 2|S| = sqrt(kappa_a_c * kappa_b_c) the general efficiency collapses
/// to 2 / ((1 + r_a)(1 + r_b) + 1), which depends only on how lossy each
/// cavity is relative to its port.
pub fn efficiency_max(ratio_a: f64, ratio_b: f64) -> Result<f64> {
    for (name, v) in [("ratio_a", ratio_a), ("ratio_b", ratio_b)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "{name} must be a non-negative finite ratio, got {v}"
            )));
        }
    }
    Ok(2.0 / ((1.0 + ratio_a) * (1.0 + ratio_b) + 1.0))
}

/// Frequency-resolved scattering amplitudes between the two ports at probe
/// detuning `omega` from the common resonance. Built for the fully coupled
/// network: pass total rates, and the matrix is unitary when the network has
/// no intrinsic loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    pub a_from_a: Complex64,
    pub a_from_b: Complex64,
    pub b_from_a: Complex64,
    pub b_from_b: Complex64,
}

/// Scattering of the two-port network at probe detuning `omega`, Hz.
pub fn scattering(
    s: Complex64,
    omega: f64,
    kappa_a: f64,
    kappa_b: f64,
) -> Result<ScatteringMatrix> {
    check_rate("kappa_a", kappa_a)?;
    check_rate("kappa_b", kappa_b)?;
    if !omega.is_finite() || !s.is_finite() {
        return Err(Error::Domain("scattering inputs must be finite".into()));
    }
    let two_i_w = Complex64::new(0.0, 2.0 * omega);
    let denom = (two_i_w + kappa_a) * (two_i_w + kappa_b) + 4.0 * s.norm_sqr();
    let root = (kappa_a * kappa_b).sqrt();
    let cross = Complex64::new(0.0, -4.0) * root;
    Ok(ScatteringMatrix {
        a_from_a: (-(two_i_w - kappa_a) * (two_i_w + kappa_b) - 4.0 * s.norm_sqr()) / denom,
        a_from_b: cross * s / denom,
        b_from_a: cross * s.conj() / denom,
        b_from_b: (-(two_i_w - kappa_b) * (two_i_w + kappa_a) - 4.0 * s.norm_sqr()) / denom,
    })
}

/// External coupling rate that impedance-matches the link: 2|S|. A zero rate
/// is returned as-is; the caller decides whether that degenerate match is
/// meaningful.
pub fn match_kappa(s_abs: f64) -> Result<f64> {
    check_rate("s_abs", s_abs)?;
    Ok(2.0 * s_abs)
}

/// Pump Rabi frequency that impedance-matches a given external coupling
/// rate, using that the rate scales linearly with the pump: the `s_abs`
/// passed in must have been computed at pump `rabi`.
pub fn match_pump(s_abs: f64, rabi: f64, kappa_c: f64) -> Result<f64> {
    check_rate("kappa_c", kappa_c)?;
    if !(s_abs > 0.0) || !s_abs.is_finite() {
        return Err(Error::Domain(format!(
            "pump matching needs a nonzero rate, got {s_abs}"
        )));
    }
    if !(rabi > 0.0) || !rabi.is_finite() {
        return Err(Error::Domain(format!(
            "pump matching needs a nonzero reference pump, got {rabi}"
        )));
    }
    Ok(kappa_c * rabi / (2.0 * s_abs))
}

fn transmission_sqr(s_abs: f64, kappa_a: f64, kappa_b: f64, omega: f64) -> f64 {
    let p = kappa_a * kappa_b + 4.0 * s_abs * s_abs;
    let u = 4.0 * omega * omega;
    let denom_sqr = (p - u) * (p - u) + u * (kappa_a + kappa_b) * (kappa_a + kappa_b);
    16.0 * s_abs * s_abs * kappa_a * kappa_b / denom_sqr
}

/// Full width at half maximum of the port-to-port transmission, measured
/// against the zero-detuning value, Hz. Found by bisection on each side of
/// the resonance; the half-crossing is unique on each side because the
/// squared transmission is a rational function with a single positive root
/// in the squared detuning.
pub fn bandwidth(s_abs: f64, kappa_a: f64, kappa_b: f64) -> Result<f64> {
    check_rate("kappa_a", kappa_a)?;
    check_rate("kappa_b", kappa_b)?;
    if kappa_a == 0.0 || kappa_b == 0.0 {
        return Err(Error::Domain(
            "bandwidth needs nonzero total loss rates".into(),
        ));
    }
    check_rate("s_abs", s_abs)?;
    if s_abs == 0.0 {
        return Err(Error::UndefinedBandwidth);
    }
    let half = transmission_sqr(s_abs, kappa_a, kappa_b, 0.0) / 2.0;
    let side = |sign: f64| -> f64 {
        let mut hi = 0.25 * (kappa_a + kappa_b) + s_abs;
        let mut guard = 0;
        while transmission_sqr(s_abs, kappa_a, kappa_b, sign * hi) > half && guard < 200 {
            hi *= 2.0;
            guard += 1;
        }
        let mut lo = 0.0;
        for _ in 0..128 {
            let mid = 0.5 * (lo + hi);
            if transmission_sqr(s_abs, kappa_a, kappa_b, sign * mid) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        sign * 0.5 * (lo + hi)
    };
    Ok(side(1.0) - side(-1.0))
}
