//! The rotating-frame mode system and its reduction to a two-mode
//! beam-splitter model.
//!
//! Basis order everywhere: microwave photon, magnon, spin excitation,
//! optical excitation, optical photon. The pump bridges the spin and optical
//! excitations; in the frame rotating with both cavities and the pump, every
//! drive becomes a static coupling and the diagonal holds the detunings.
//!
//! The three interior modes (magnon, spin, optical excitation) are far
//! detuned in normal operation. Eliminating them adiabatically leaves an
//! effective two-mode Hamiltonian for the cavity fields whose off-diagonal
//! entry is the transduction rate and whose diagonal carries small level
//! shifts. [`eliminate`] gives the exact interior amplitudes in closed form,
//! [`solve_elimination_numeric`] reproduces them with a pivoted linear solve,
//! and [`transduction_rate`] keeps only the leading term of the coupling,
//! which is the form the rest of the crate builds on.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix3, Matrix5, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levels::Detunings;
use crate::params::{dmi_to_coupling, perp_exchange_to_coupling, DeviceConfig};

/// Validity ratios below this are flagged as outside the dispersive regime.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 10.0;

/// One ion coupled to the magnon mode, the pump, and the two cavities.
///
/// `g_tilde` is the collective magnon-cavity coupling (per-spin value times
/// the square root of the spin count); `h` is the per-ion magnon-spin
/// coupling (interface value divided by the same square root). Their product
/// is therefore independent of the spin count. `g_b` and `g_a` are per-ion
/// cavity couplings; `n_er` only enters [`transduction_rate`], which sums the
/// identical contributions of all ions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveMode {
    /// Spin detuning from the microwave cavity, Hz.
    pub spin_detuning: f64,
    /// Magnon detuning from the microwave cavity, Hz.
    pub magnon_detuning: f64,
    /// Optical detuning from the optical cavity, Hz.
    pub optical_detuning: f64,
    /// Collective magnon-microwave coupling, Hz.
    pub g_tilde: f64,
    /// Per-ion spin-microwave coupling, Hz.
    pub g_b: f64,
    /// Per-ion magnon-spin coupling, Hz. Complex when the antisymmetric
    /// exchange channel contributes.
    pub h: Complex64,
    /// Pump Rabi frequency, Hz.
    pub rabi: f64,
    /// Per-ion optical cavity coupling, Hz.
    pub g_a: f64,
    /// Number of ions contributing to the collective rate.
    pub n_er: f64,
}

impl FiveMode {
    /// Assemble the mode system from a device config and a set of detunings.
    pub fn from_config(cfg: &DeviceConfig, det: &Detunings) -> FiveMode {
        let (g_tilde, h) = match &cfg.magnet {
            Some(m) => {
                let root_n = m.n_fe.sqrt();
                let mut h_total = Complex64::new(
                    perp_exchange_to_coupling(m.j_perp, m.z, cfg.erbium.beta_minus),
                    0.0,
                );
                if let Some(d_z) = m.d_z {
                    h_total += dmi_to_coupling(d_z, m.z, cfg.erbium.beta_minus);
                }
                (m.g_b_tilde * root_n, h_total / root_n)
            }
            None => (0.0, Complex64::new(0.0, 0.0)),
        };
        FiveMode {
            spin_detuning: det.spin,
            magnon_detuning: det.magnon,
            optical_detuning: det.optical,
            g_tilde,
            g_b: cfg.erbium.g_b,
            h,
            rabi: cfg.erbium.rabi_pump,
            g_a: cfg.erbium.g_a,
            n_er: cfg.erbium.n_er,
        }
    }
}

/// The rotating-frame Hamiltonian of one ion plus magnon and cavities, Hz.
pub fn hamiltonian(m: &FiveMode) -> Matrix5<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let re = |v: f64| Complex64::new(v, 0.0);
    Matrix5::from_rows(&[
        [z, re(m.g_tilde), re(m.g_b), z, z].into(),
        [re(m.g_tilde), re(m.magnon_detuning), m.h, z, z].into(),
        [re(m.g_b), m.h.conj(), re(m.spin_detuning), re(m.rabi), z].into(),
        [z, z, re(m.rabi), re(m.optical_detuning), re(m.g_a)].into(),
        [z, z, z, re(m.g_a), z].into(),
    ])
}

/// Stationary amplitudes of the three interior modes, as linear responses to
/// the two cavity amplitudes. Each pair is (response to the microwave
/// amplitude, response to the optical amplitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliminationCoefficients {
    pub magnon: (Complex64, Complex64),
    pub spin: (Complex64, Complex64),
    pub excited: (Complex64, Complex64),
    /// Determinant of the interior block, Hz^3.
    pub denominator: f64,
}

fn interior_determinant(m: &FiveMode) -> f64 {
    m.optical_detuning * (m.spin_detuning * m.magnon_detuning - m.h.norm_sqr())
        - m.magnon_detuning * m.rabi * m.rabi
}

/// Closed-form adiabatic elimination of the interior modes.
pub fn eliminate(m: &FiveMode) -> Result<EliminationCoefficients> {
    let d = interior_determinant(m);
    if d == 0.0 {
        return Err(Error::SingularElimination { denominator: d });
    }
    let (dt, ds, dc) = (m.magnon_detuning, m.spin_detuning, m.optical_detuning);
    let (gt, gb, om, ga) = (m.g_tilde, m.g_b, m.rabi, m.g_a);
    let h = m.h;
    let spin_drive = h.conj() * gt - dt * gb;
    let magnon = (
        (Complex64::new((om * om - dc * ds) * gt, 0.0) + dc * h * gb) / d,
        -h * om * ga / d,
    );
    let spin = (dc * spin_drive / d, Complex64::new(dt * om * ga / d, 0.0));
    let excited = (
        -om * spin_drive / d,
        Complex64::new(-(ds * dt - h.norm_sqr()) * ga / d, 0.0),
    );
    Ok(EliminationCoefficients {
        magnon,
        spin,
        excited,
        denominator: d,
    })
}

/// The same elimination via a pivoted LU solve of the interior block.
pub fn solve_elimination_numeric(m: &FiveMode) -> Result<EliminationCoefficients> {
    let h5 = hamiltonian(m);
    let block = Matrix3::from_fn(|r, c| h5[(r + 1, c + 1)]);
    let rhs_b = Vector3::from_fn(|r, _| -h5[(r + 1, 0)]);
    let rhs_a = Vector3::from_fn(|r, _| -h5[(r + 1, 4)]);
    let lu = block.lu();
    let cond_estimate = {
        let u = lu.u();
        let diag: Vec<f64> = (0..3).map(|i| u[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    };
    let sol_b = lu
        .solve(&rhs_b)
        .ok_or(Error::SingularBlock { cond_estimate })?;
    let sol_a = lu
        .solve(&rhs_a)
        .ok_or(Error::SingularBlock { cond_estimate })?;
    Ok(EliminationCoefficients {
        magnon: (sol_b[0], sol_a[0]),
        spin: (sol_b[1], sol_a[1]),
        excited: (sol_b[2], sol_a[2]),
        denominator: lu.determinant().re,
    })
}

/// Collective microwave-to-optical transduction rate, Hz.
///
/// Leading term of the eliminated cavity-cavity coupling: every factor is a
/// coupling divided by one large detuning, and the magnon and direct spin
/// paths interfere in the numerator. The full elimination denominator also
/// carries a pump-power correction; [`validity_ratios`] reports how far this
/// form is from it under the `elimination_denominator` key.
pub fn transduction_rate(m: &FiveMode) -> Result<Complex64> {
    Ok(single_ion_rate(m)? * m.n_er)
}

fn magnon_decoupled(m: &FiveMode) -> bool {
    m.g_tilde == 0.0 && m.h == Complex64::new(0.0, 0.0)
}

fn single_ion_rate(m: &FiveMode) -> Result<Complex64> {
    if magnon_decoupled(m) {
        // The magnon detuning cancels from the rate once the mode is
        // detached, so evaluate the reduced form; it stays finite on
        // magnon resonance, where the general expression turns into 0/0.
        let denom = m.optical_detuning * m.spin_detuning;
        if denom == 0.0 {
            return Err(Error::SingularElimination { denominator: denom });
        }
        return Ok(Complex64::new(m.rabi * m.g_a * m.g_b / denom, 0.0));
    }
    let denom =
        m.optical_detuning * (m.spin_detuning * m.magnon_detuning - m.h.norm_sqr());
    if denom == 0.0 {
        return Err(Error::SingularElimination { denominator: denom });
    }
    let numer = Complex64::new(m.magnon_detuning * m.g_b, 0.0) - m.h.conj() * m.g_tilde;
    Ok(numer * m.rabi * m.g_a / denom)
}

/// Second-order level shifts of the two cavity modes (one ion's worth), Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelShifts {
    /// Downward shift of the microwave cavity, Hz.
    pub microwave: f64,
    /// Downward shift of the optical cavity, Hz.
    pub optical: f64,
}

/// Level shifts produced by the eliminated interior modes.
pub fn level_shifts(m: &FiveMode) -> Result<LevelShifts> {
    if m.optical_detuning == 0.0 {
        return Err(Error::SingularElimination { denominator: 0.0 });
    }
    let optical = m.g_a * m.g_a / m.optical_detuning;
    if magnon_decoupled(m) {
        if m.spin_detuning == 0.0 {
            return Err(Error::SingularElimination { denominator: 0.0 });
        }
        let microwave = m.g_b * m.g_b / m.spin_detuning;
        return Ok(LevelShifts { microwave, optical });
    }
    let pair = m.spin_detuning * m.magnon_detuning - m.h.norm_sqr();
    if pair == 0.0 {
        return Err(Error::SingularElimination { denominator: 0.0 });
    }
    let gt2 = m.g_tilde * m.g_tilde;
    let microwave = (-2.0 * m.g_tilde * m.g_b * m.h.re
        - (m.rabi * m.rabi / m.optical_detuning - m.spin_detuning) * gt2
        + m.magnon_detuning * m.g_b * m.g_b)
        / pair;
    Ok(LevelShifts { microwave, optical })
}

/// Effective two-mode Hamiltonian for one ion, in the (microwave, optical)
/// cavity basis, Hz. The diagonal is the negated level shifts; the
/// off-diagonal is the single-ion transduction rate.
pub fn effective_hamiltonian(m: &FiveMode) -> Result<Matrix2<Complex64>> {
    let shifts = level_shifts(m)?;
    let s = single_ion_rate(m)?;
    Ok(Matrix2::new(
        Complex64::new(-shifts.microwave, 0.0),
        s.conj(),
        s,
        Complex64::new(-shifts.optical, 0.0),
    ))
}

/// Dimensionless detuning-to-coupling ratios that must all be large for the
/// elimination to hold, keyed by stable names. A ratio with a vanishing
/// coupling is reported as positive infinity.
pub fn validity_ratios(m: &FiveMode) -> BTreeMap<&'static str, f64> {
    fn ratio(num: f64, den: f64) -> f64 {
        if den == 0.0 {
            f64::INFINITY
        } else {
            (num / den).abs()
        }
    }
    let mut map = BTreeMap::new();
    map.insert("delta_tilde_over_g_tilde", ratio(m.magnon_detuning, m.g_tilde));
    map.insert("delta_tilde_over_h", ratio(m.magnon_detuning, m.h.norm()));
    map.insert("delta_over_rabi", ratio(m.spin_detuning, m.rabi));
    map.insert("delta_over_g_b", ratio(m.spin_detuning, m.g_b));
    map.insert("delta_over_h", ratio(m.spin_detuning, m.h.norm()));
    map.insert("delta_cap_over_g_a", ratio(m.optical_detuning, m.g_a));
    map.insert("delta_cap_over_rabi", ratio(m.optical_detuning, m.rabi));
    map.insert(
        "elimination_denominator",
        ratio(
            m.optical_detuning * (m.spin_detuning * m.magnon_detuning - m.h.norm_sqr()),
            m.magnon_detuning * m.rabi * m.rabi,
        ),
    );
    map
}

/// True when every validity ratio meets the threshold.
pub fn is_adiabatic(ratios: &BTreeMap<&'static str, f64>, threshold: f64) -> bool {
    ratios.values().all(|&v| v >= threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::detunings;
    use crate::params::load_config;
    use approx::assert_relative_eq;
    use nalgebra::Vector5;

    fn sample() -> FiveMode {
        FiveMode {
            spin_detuning: 3.1e9,
            magnon_detuning: 2.2e9,
            optical_detuning: 1.0e10,
            g_tilde: 4.5e7,
            g_b: 1.3e4,
            h: Complex64::new(-1.8e4, 7.0e3),
            rabi: 1.15e7,
            g_a: 5.2e5,
            n_er: 1.0,
        }
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        let scale = a.norm().max(b.norm()).max(1e-300);
        assert!(
            (a - b).norm() <= tol * scale,
            "{a} vs {b} (rel {})",
            (a - b).norm() / scale
        );
    }

    #[test]
    fn hamiltonian_is_hermitian_with_expected_sparsity() {
        let h = hamiltonian(&sample());
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(h[(r, c)], h[(c, r)].conj(), "entry ({r},{c})");
            }
        }
        for &(r, c) in &[(0, 3), (0, 4), (1, 3), (1, 4), (2, 4)] {
            assert_eq!(h[(r, c)], Complex64::new(0.0, 0.0));
        }
        assert_eq!(h[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(h[(4, 4)], Complex64::new(0.0, 0.0));
        assert_eq!(h[(1, 1)].re, 2.2e9);
        assert_eq!(h[(2, 2)].re, 3.1e9);
        assert_eq!(h[(3, 3)].re, 1.0e10);
        assert_eq!(h[(1, 2)], Complex64::new(-1.8e4, 7.0e3));
    }

    #[test]
    fn closed_form_elimination_satisfies_the_interior_equations() {
        let m = sample();
        let h5 = hamiltonian(&m);
        let c = eliminate(&m).unwrap();
        for (drive, pick) in [
            ((1.0, 0.0), 0usize),
            ((0.0, 1.0), 1usize),
        ] {
            let take = |p: (Complex64, Complex64)| if pick == 0 { p.0 } else { p.1 };
            let psi = Vector5::from_column_slice(&[
                Complex64::new(drive.0, 0.0),
                take(c.magnon),
                take(c.spin),
                take(c.excited),
                Complex64::new(drive.1, 0.0),
            ]);
            let out = h5 * psi;
            let scale = m.spin_detuning;
            for row in 1..4 {
                assert!(
                    out[row].norm() <= 1e-9 * scale,
                    "row {row} residual {}",
                    out[row].norm()
                );
            }
        }
    }

    #[test]
    fn closed_form_matches_the_pivoted_solve() {
        let m = sample();
        let a = eliminate(&m).unwrap();
        let b = solve_elimination_numeric(&m).unwrap();
        assert_close(a.magnon.0, b.magnon.0, 1e-9);
        assert_close(a.magnon.1, b.magnon.1, 1e-9);
        assert_close(a.spin.0, b.spin.0, 1e-9);
        assert_close(a.spin.1, b.spin.1, 1e-9);
        assert_close(a.excited.0, b.excited.0, 1e-9);
        assert_close(a.excited.1, b.excited.1, 1e-9);
        assert_relative_eq!(a.denominator, b.denominator, max_relative = 1e-9);
    }

    #[test]
    fn rate_agrees_with_the_exact_elimination_up_to_the_pump_correction() {
        let m = sample();
        let c = solve_elimination_numeric(&m).unwrap();
        // Exact eliminated coupling into the optical equation.
        let exact = m.g_a * c.excited.0;
        let pair = m.spin_detuning * m.magnon_detuning - m.h.norm_sqr();
        let leading = exact * c.denominator / (m.optical_detuning * pair);
        let s = transduction_rate(&m).unwrap();
        assert_close(s, leading, 1e-9);
    }

    #[test]
    fn rate_reduces_to_the_direct_path_without_a_magnet() {
        // Detuning at which the canonical bare device is evaluated in the
        // grid tests; the rate collapses to n_er g_b rabi g_a / (Delta delta).
        let delta = -2.5e9 + 5e9 * (251.0 / 499.0);
        let m = FiveMode {
            spin_detuning: delta,
            magnon_detuning: -5e9,
            optical_detuning: 1e10,
            g_tilde: 0.0,
            g_b: 1.0,
            h: Complex64::new(0.0, 0.0),
            rabi: 11.5e6,
            g_a: 52.0,
            n_er: 1.28e15,
        };
        let s = transduction_rate(&m).unwrap();
        assert_eq!(s.im, 0.0);
        assert_relative_eq!(
            s.norm() / m.rabi,
            0.442_845_866_666_674_64,
            max_relative = 1e-12
        );
        // With the magnon detached, its detuning is irrelevant; resonance
        // included.
        let mut on_resonance = m;
        on_resonance.magnon_detuning = 0.0;
        assert_eq!(transduction_rate(&on_resonance).unwrap(), s);
        assert_eq!(
            level_shifts(&on_resonance).unwrap(),
            level_shifts(&m).unwrap()
        );
        assert_relative_eq!(
            level_shifts(&m).unwrap().microwave,
            m.g_b * m.g_b / delta,
            max_relative = 1e-12
        );
    }

    #[test]
    fn magnon_path_enhancement_at_a_gigahertz_detuning() {
        let cfg = load_config(crate::params::CANONICAL_TOML).unwrap();
        let det = Detunings {
            spin: 1e9,
            magnon: 1e9,
            optical: 1e10,
        };
        let with = FiveMode::from_config(&cfg, &det);
        let mut bare_cfg = cfg.clone();
        bare_cfg.magnet = None;
        let without = FiveMode::from_config(&bare_cfg, &det);
        // The aggregated magnon-path product is independent of the spin count.
        assert_relative_eq!(
            (with.h * with.g_tilde).re,
            -1.410_15e13 * 5.8e-2,
            max_relative = 1e-12
        );
        assert_relative_eq!(with.h.norm_sqr(), 331_420_503.75, max_relative = 1e-12);
        let ratio = transduction_rate(&with).unwrap().norm()
            / transduction_rate(&without).unwrap().norm();
        assert_relative_eq!(ratio, 818.887, max_relative = 1e-6);
    }

    #[test]
    fn singular_denominator_is_reported() {
        let mut m = sample();
        m.h = Complex64::new(0.0, 0.0);
        m.spin_detuning = 0.0;
        match transduction_rate(&m) {
            Err(Error::SingularElimination { denominator }) => assert_eq!(denominator, 0.0),
            other => panic!("expected SingularElimination, got {other:?}"),
        }
        m.magnon_detuning = 0.0;
        assert!(eliminate(&m).is_err());
        match solve_elimination_numeric(&m) {
            Err(Error::SingularBlock { cond_estimate }) => assert!(cond_estimate > 1e6),
            other => panic!("expected SingularBlock, got {other:?}"),
        }
    }

    #[test]
    fn shifts_match_the_exact_diagonal_when_the_pump_is_off() {
        let mut m = sample();
        m.rabi = 0.0;
        let c = eliminate(&m).unwrap();
        let exact_microwave = m.g_tilde * c.magnon.0 + m.g_b * c.spin.0;
        let exact_optical = m.g_a * c.excited.1;
        let shifts = level_shifts(&m).unwrap();
        assert_close(
            exact_microwave,
            Complex64::new(-shifts.microwave, 0.0),
            1e-12,
        );
        assert_close(exact_optical, Complex64::new(-shifts.optical, 0.0), 1e-12);
    }

    #[test]
    fn optical_shift_is_the_textbook_dispersive_pull() {
        let m = sample();
        let shifts = level_shifts(&m).unwrap();
        assert_relative_eq!(
            shifts.optical,
            m.g_a * m.g_a / m.optical_detuning,
            max_relative = 1e-15
        );
    }

    #[test]
    fn effective_hamiltonian_is_hermitian_and_single_ion() {
        let mut m = sample();
        m.n_er = 1.28e15;
        let h2 = effective_hamiltonian(&m).unwrap();
        assert_eq!(h2[(0, 1)], h2[(1, 0)].conj());
        assert_eq!(h2[(0, 0)].im, 0.0);
        let shifts = level_shifts(&m).unwrap();
        assert_eq!(h2[(0, 0)].re, -shifts.microwave);
        assert_eq!(h2[(1, 1)].re, -shifts.optical);
        let s_collective = transduction_rate(&m).unwrap();
        assert_close(h2[(1, 0)] * m.n_er, s_collective, 1e-15);
    }

    #[test]
    fn validity_ratios_cover_all_couplings() {
        let m = sample();
        let r = validity_ratios(&m);
        assert_eq!(r.len(), 8);
        assert_relative_eq!(
            r["delta_over_rabi"],
            m.spin_detuning / m.rabi,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            r["delta_tilde_over_h"],
            m.magnon_detuning / m.h.norm(),
            max_relative = 1e-15
        );
        let pair = m.spin_detuning * m.magnon_detuning - m.h.norm_sqr();
        assert_relative_eq!(
            r["elimination_denominator"],
            (m.optical_detuning * pair / (m.magnon_detuning * m.rabi * m.rabi)).abs(),
            max_relative = 1e-15
        );
        assert!(is_adiabatic(&r, DEFAULT_ADIABATIC_THRESHOLD));
    }

    #[test]
    fn vanishing_couplings_give_infinite_ratios_not_nan() {
        let mut m = sample();
        m.g_tilde = 0.0;
        m.h = Complex64::new(0.0, 0.0);
        m.rabi = 0.0;
        m.magnon_detuning = 0.0;
        let r = validity_ratios(&m);
        assert_eq!(r["delta_tilde_over_g_tilde"], f64::INFINITY);
        assert_eq!(r["delta_tilde_over_h"], f64::INFINITY);
        assert_eq!(r["delta_over_rabi"], f64::INFINITY);
        assert_eq!(r["elimination_denominator"], f64::INFINITY);
        assert!(r.values().all(|v| !v.is_nan()));
        assert!(!is_adiabatic(&r, f64::INFINITY));
    }

    #[test]
    fn from_config_aggregates_collective_couplings() {
        let cfg = load_config(crate::params::CANONICAL_TOML).unwrap();
        let det = detunings(&cfg, 0.0).unwrap();
        let m = FiveMode::from_config(&cfg, &det);
        assert_relative_eq!(m.g_tilde, 4.492_660_682e7, max_relative = 1e-9);
        assert_relative_eq!(m.h.re, -1.410_15e13 / 6e17_f64.sqrt(), max_relative = 1e-12);
        assert_eq!(m.h.im, 0.0);
        assert_eq!(m.g_b, 1.0);
        assert_eq!(m.g_a, 52.0);
        assert_eq!(m.rabi, 11.5e6);
        assert_eq!(m.n_er, 1.28e15);
        assert_eq!(m.spin_detuning, det.spin);
    }
}
