//! Device parameters: physical constants, the config document schema, and the
//! maps from microscopic material numbers to coupling rates.
//!
//! Configs are TOML documents with flat sections. Keys follow the symbols used
//! throughout the codebase; all frequencies are in Hz, static fields in tesla.
//!
//! ```toml
//! [erbium]
//! n_er = 1.28e15       # number of dopant ions addressed by both cavities
//! g_g = 1.2            # ground-state g-factor
//! g_e = 1.1            # excited-state g-factor
//! beta_minus = 7.9     # branching amplitude of the spin-flip transition
//! g_a = 52.0           # per-ion optical cavity coupling, Hz
//! g_b = 1.0            # per-ion microwave cavity coupling, Hz
//! rabi_pump = 11.5e6   # optical pump Rabi frequency, Hz
//! sigma_a = 150e6      # optical inhomogeneous linewidth, Hz
//! sigma_b = 3e6        # spin inhomogeneous linewidth, Hz
//! delta_e_e = 195.01e12 # zero-field optical transition energy, Hz
//!
//! [magnet]             # omit the whole section for a magnet-free device
//! n_fe = 6e17          # number of iron spins in the magnon mode volume
//! g_s = 2.0            # iron spin g-factor
//! z = 5                # erbium-iron coordination number
//! j_perp = 0.714e12    # perpendicular exchange, Hz
//! j_par = 0.714e9      # parallel exchange, Hz
//! m_s = 0.178          # saturation magnetization as mu_0 M_s, tesla
//! # gamma = 27.99e9    # gyromagnetic ratio, Hz/T; derived from g_s if absent
//! g_b_tilde = 5.8e-2   # per-spin magnon-microwave coupling, Hz
//! sigma_b_tilde = 1.4e6 # magnon linewidth, Hz
//! # d_z = 0.0          # optional Dzyaloshinskii-Moriya strength, Hz
//!
//! [cavities]
//! omega_a = 195e12     # optical resonance, Hz
//! omega_b = 5e9        # microwave resonance, Hz
//! kappa_a_c = 7.95e6   # optical external coupling rate, Hz
//! kappa_a_i = 1.7e6    # optical intrinsic loss rate, Hz
//! kappa_b_c = 0.75e6
//! kappa_b_i = 0.717e6
//!
//! [fields]
//! bz = 0.033           # static bias field, tesla
//!
//! [metadata]           # optional, provenance only; never used in formulas
//! volume_mm3 = 0.03
//! temperature_k = 0.01
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bohr magneton over the Planck constant, Hz per tesla (CODATA).
pub const BOHR_MAGNETON_OVER_H: f64 = 1.399_624_493_6e10;

/// Planck constant, J s (exact SI value). Kept for unit bookkeeping only;
/// every quantity in this crate is already divided by h.
pub const PLANCK_H: f64 = 6.626_070_15e-34;

/// Reference ensemble coupling totals for the canonical device, used by the
/// table-consistency check. Values in Hz.
pub const REFERENCE_G_A_TOTAL: f64 = 1.9e9;
pub const REFERENCE_G_B_TOTAL: f64 = 3.7e7;
pub const REFERENCE_G_B_TILDE_TOTAL: f64 = 4.5e7;

/// Relative tolerance for the table-consistency check.
pub const TABLE_TOLERANCE: f64 = 0.05;

/// Fundamental constants. Fixed at build time, not configurable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// mu_B / h in Hz/T.
    pub bohr_magneton_over_h: f64,
    /// h in J s.
    pub planck_h: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            bohr_magneton_over_h: BOHR_MAGNETON_OVER_H,
            planck_h: PLANCK_H,
        }
    }
}

/// Erbium ensemble and optical pump parameters (`[erbium]` section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErbiumParams {
    /// Number of ions addressed by both cavity modes.
    pub n_er: f64,
    /// Ground-state g-factor.
    pub g_g: f64,
    /// Excited-state g-factor.
    pub g_e: f64,
    /// Branching amplitude of the spin-non-preserving microwave transition.
    pub beta_minus: f64,
    /// Per-ion optical cavity coupling, Hz.
    pub g_a: f64,
    /// Per-ion microwave cavity coupling, Hz.
    pub g_b: f64,
    /// Optical pump Rabi frequency, Hz.
    pub rabi_pump: f64,
    /// Optical inhomogeneous linewidth, Hz.
    pub sigma_a: f64,
    /// Spin inhomogeneous linewidth, Hz.
    pub sigma_b: f64,
    /// Zero-field optical transition energy, Hz.
    pub delta_e_e: f64,
}

/// Ferromagnet parameters (`[magnet]` section, optional).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetParams {
    /// Number of iron spins participating in the uniform magnon mode.
    pub n_fe: f64,
    /// Iron spin g-factor.
    pub g_s: f64,
    /// Erbium-iron coordination number.
    pub z: f64,
    /// Perpendicular (flip-flop) exchange strength, Hz.
    pub j_perp: f64,
    /// Parallel (Ising) exchange strength, Hz.
    pub j_par: f64,
    /// Saturation magnetization expressed as mu_0 M_s, tesla.
    pub m_s: f64,
    /// Gyromagnetic ratio, Hz/T. Derived from `g_s` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Per-spin magnon-microwave coupling, Hz.
    pub g_b_tilde: f64,
    /// Magnon inhomogeneous linewidth, Hz.
    pub sigma_b_tilde: f64,
    /// Dzyaloshinskii-Moriya strength along z, Hz. Optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_z: Option<f64>,
}

impl MagnetParams {
    /// Gyromagnetic ratio in Hz/T, deriving `g_s * mu_B/h` when the config
    /// does not pin one explicitly.
    pub fn gamma(&self, constants: &PhysicalConstants) -> f64 {
        self.gamma
            .unwrap_or(self.g_s * constants.bohr_magneton_over_h)
    }
}

/// Cavity frequencies and loss rates (`[cavities]` section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Optical resonance frequency, Hz.
    pub omega_a: f64,
    /// Microwave resonance frequency, Hz.
    pub omega_b: f64,
    /// Optical external (port) coupling rate, Hz.
    pub kappa_a_c: f64,
    /// Optical intrinsic loss rate, Hz.
    pub kappa_a_i: f64,
    /// Microwave external coupling rate, Hz.
    pub kappa_b_c: f64,
    /// Microwave intrinsic loss rate, Hz.
    pub kappa_b_i: f64,
}

/// Static bias field (`[fields]` section).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    /// Static field along z, tesla.
    pub bz: f64,
}

/// Free-form provenance (`[metadata]` section). Never enters a formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_mm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
}

/// A full device description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(skip, default)]
    pub constants: PhysicalConstants,
    pub erbium: ErbiumParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnet: Option<MagnetParams>,
    pub cavities: CavityParams,
    pub fields: FieldParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl DeviceConfig {
    /// Gyromagnetic ratio of the magnet, Hz/T. Zero without a magnet.
    pub fn gamma(&self) -> f64 {
        self.magnet
            .as_ref()
            .map(|m| m.gamma(&self.constants))
            .unwrap_or(0.0)
    }

    /// Range checks over the whole document. Field names in error messages
    /// use `section.key` form.
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be finite, got {v}")))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be positive, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{name} must be non-negative, got {v}"
                )))
            }
        }

        let e = &self.erbium;
        finite("erbium.n_er", e.n_er)?;
        if e.n_er < 1.0 {
            return Err(Error::Validation(format!(
                "erbium.n_er must be at least 1, got {}",
                e.n_er
            )));
        }
        positive("erbium.g_g", e.g_g)?;
        positive("erbium.g_e", e.g_e)?;
        non_negative("erbium.beta_minus", e.beta_minus)?;
        non_negative("erbium.g_a", e.g_a)?;
        non_negative("erbium.g_b", e.g_b)?;
        non_negative("erbium.rabi_pump", e.rabi_pump)?;
        positive("erbium.sigma_a", e.sigma_a)?;
        positive("erbium.sigma_b", e.sigma_b)?;
        positive("erbium.delta_e_e", e.delta_e_e)?;

        if let Some(m) = &self.magnet {
            finite("magnet.n_fe", m.n_fe)?;
            if m.n_fe < 1.0 {
                return Err(Error::Validation(format!(
                    "magnet.n_fe must be at least 1, got {}",
                    m.n_fe
                )));
            }
            positive("magnet.g_s", m.g_s)?;
            non_negative("magnet.z", m.z)?;
            finite("magnet.j_perp", m.j_perp)?;
            finite("magnet.j_par", m.j_par)?;
            non_negative("magnet.m_s", m.m_s)?;
            if let Some(g) = m.gamma {
                positive("magnet.gamma", g)?;
            }
            non_negative("magnet.g_b_tilde", m.g_b_tilde)?;
            positive("magnet.sigma_b_tilde", m.sigma_b_tilde)?;
            if let Some(d) = m.d_z {
                finite("magnet.d_z", d)?;
            }
        }

        let c = &self.cavities;
        positive("cavities.omega_a", c.omega_a)?;
        positive("cavities.omega_b", c.omega_b)?;
        // The dispersive treatment of the pump assumes a real frequency gap
        // between the two modes.
        if c.omega_a <= 1000.0 * c.omega_b {
            return Err(Error::Validation(format!(
                "cavities.omega_a must exceed 1000 * omega_b ({} <= {})",
                c.omega_a,
                1000.0 * c.omega_b
            )));
        }
        non_negative("cavities.kappa_a_c", c.kappa_a_c)?;
        non_negative("cavities.kappa_a_i", c.kappa_a_i)?;
        non_negative("cavities.kappa_b_c", c.kappa_b_c)?;
        non_negative("cavities.kappa_b_i", c.kappa_b_i)?;

        non_negative("fields.bz", self.fields.bz)?;

        if let Some(md) = &self.metadata {
            if let Some(v) = md.volume_mm3 {
                positive("metadata.volume_mm3", v)?;
            }
            if let Some(t) = md.temperature_k {
                non_negative("metadata.temperature_k", t)?;
            }
        }
        Ok(())
    }
}

/// Parse and validate a config document.
pub fn load_config(text: &str) -> Result<DeviceConfig> {
    load_config_with_notes(text).map(|(cfg, _)| cfg)
}

/// Parse and validate, also reporting derivations and suspicious values the
/// loader noticed. Notes are advisory; the returned config is fully usable.
pub fn load_config_with_notes(text: &str) -> Result<(DeviceConfig, Vec<String>)> {
    let cfg: DeviceConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    cfg.validate()?;

    let mut notes = Vec::new();
    if let Some(m) = &cfg.magnet {
        if m.gamma.is_none() {
            notes.push(format!(
                "magnet.gamma derived from g_s: {:.6e} Hz/T",
                m.gamma(&cfg.constants)
            ));
        }
        // A spin count beyond ~1e25 cannot fit any laboratory crystal; the
        // canonical mm-scale device holds ~6e17. Flag it but keep loading.
        if m.n_fe > 1e25 {
            notes.push(format!(
                "magnet.n_fe = {:e} exceeds any physical spin count for this device \
                 (expected order 1e17); check for a misprinted exponent",
                m.n_fe
            ));
        }
    }
    Ok((cfg, notes))
}

/// Serialize a config back to TOML. `load_config(serialize_config(c))`
/// produces a field-wise identical config.
pub fn serialize_config(cfg: &DeviceConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("serialize failed: {e}")))
}

/// Erbium-to-magnon coupling from the symmetric exchange channel:
/// h_perp = -j_perp * z * beta_minus / 2, in Hz.
pub fn perp_exchange_to_coupling(j_perp: f64, z: f64, beta_minus: f64) -> f64 {
    -j_perp * z * beta_minus / 2.0
}

/// Erbium-to-magnon coupling from the Dzyaloshinskii-Moriya channel. The
/// antisymmetric exchange enters the flip-flop matrix element a quarter turn
/// out of phase with the symmetric channel, so the result is purely imaginary
/// with magnitude |d_z| * z * beta_minus / 2; the sign of `d_z` sets the sign
/// of the imaginary part. Add it to the symmetric contribution to get the
/// total complex h_perp.
pub fn dmi_to_coupling(d_z: f64, z: f64, beta_minus: f64) -> Complex64 {
    Complex64::new(0.0, -d_z * z * beta_minus / 2.0)
}

/// Microwave magnetic field amplitude (tesla) to the pair of per-particle
/// couplings (g_b, g_b_tilde) it drives, in Hz. The erbium coupling rides on
/// the branching amplitude; the iron coupling does not. Without a magnet the
/// second element is zero.
pub fn microwave_field_to_couplings(b_field_amp: f64, cfg: &DeviceConfig) -> Result<(f64, f64)> {
    if !(b_field_amp >= 0.0) {
        return Err(Error::Domain(format!(
            "field amplitude must be non-negative, got {b_field_amp}"
        )));
    }
    let mu = cfg.constants.bohr_magneton_over_h;
    let g_b = mu * cfg.erbium.g_g * cfg.erbium.beta_minus * b_field_amp / 4.0;
    let g_b_tilde = cfg
        .magnet
        .as_ref()
        .map(|m| mu * m.g_s * b_field_amp / 4.0)
        .unwrap_or(0.0);
    Ok((g_b, g_b_tilde))
}

/// Ensemble coupling totals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalCouplings {
    /// g_a * sqrt(N_Er), Hz.
    pub g_a_total: f64,
    /// g_b * sqrt(N_Er), Hz.
    pub g_b_total: f64,
    /// g_b_tilde * sqrt(N_Fe), Hz. Zero without a magnet.
    pub g_b_tilde_total: f64,
}

/// Collective enhancement of the three transverse couplings. The ion
/// couplings scale with the square root of the ion count, the magnon coupling
/// with the square root of the spin count.
pub fn total_couplings(cfg: &DeviceConfig) -> TotalCouplings {
    let root_n_er = cfg.erbium.n_er.sqrt();
    TotalCouplings {
        g_a_total: cfg.erbium.g_a * root_n_er,
        g_b_total: cfg.erbium.g_b * root_n_er,
        g_b_tilde_total: cfg
            .magnet
            .as_ref()
            .map(|m| m.g_b_tilde * m.n_fe.sqrt())
            .unwrap_or(0.0),
    }
}

#[cfg(test)]
pub(crate) const CANONICAL_TOML: &str = r#"
[erbium]
n_er = 1.28e15
g_g = 1.2
g_e = 1.1
beta_minus = 7.9
g_a = 52.0
g_b = 1.0
rabi_pump = 11.5e6
sigma_a = 150e6
sigma_b = 3e6
delta_e_e = 195.01e12

[magnet]
n_fe = 6e17
g_s = 2.0
z = 5
j_perp = 0.714e12
j_par = 0.714e9
m_s = 0.178
g_b_tilde = 5.8e-2
sigma_b_tilde = 1.4e6

[cavities]
omega_a = 195e12
omega_b = 5e9
kappa_a_c = 7.95e6
kappa_a_i = 1.7e6
kappa_b_c = 0.75e6
kappa_b_i = 0.717e6

[fields]
bz = 0.033
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CASE2: &str = CANONICAL_TOML;

    #[test]
    fn loads_canonical_document() {
        let cfg = load_config(CASE2).unwrap();
        assert_eq!(cfg.erbium.g_b, 1.0);
        assert_eq!(cfg.erbium.g_a, 52.0);
        assert_eq!(cfg.erbium.rabi_pump, 11.5e6);
        assert_eq!(cfg.cavities.kappa_b_c, 0.75e6);
        assert_eq!(cfg.cavities.omega_b, 5e9);
        assert_eq!(cfg.erbium.n_er, 1.28e15);
        let m = cfg.magnet.as_ref().unwrap();
        assert_eq!(m.n_fe, 6e17);
        // gamma derived from g_s = 2
        assert_relative_eq!(cfg.gamma(), 2.0 * BOHR_MAGNETON_OVER_H, max_relative = 1e-15);
    }

    #[test]
    fn round_trip_is_bitwise_identical() {
        let cfg = load_config(CASE2).unwrap();
        let text = serialize_config(&cfg).unwrap();
        let back = load_config(&text).unwrap();
        assert_eq!(cfg, back);

        // Again with the optional knobs set.
        let mut cfg2 = cfg;
        cfg2.magnet.as_mut().unwrap().gamma = Some(27.99e9);
        cfg2.magnet.as_mut().unwrap().d_z = Some(3.38e8);
        cfg2.metadata = Some(Metadata {
            volume_mm3: Some(0.03),
            temperature_k: Some(0.01),
        });
        let back2 = load_config(&serialize_config(&cfg2).unwrap()).unwrap();
        assert_eq!(cfg2, back2);
    }

    #[test]
    fn unknown_key_is_a_config_error_naming_the_key() {
        let doc = CASE2.replace("g_g = 1.2", "g_g = 1.2\nwobble = 3.0");
        let err = load_config(&doc).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("wobble"), "message was: {msg}"),
            other => panic!("expected Config, got {other:?}"),
        }
    }

    #[test]
    fn negative_linewidth_is_rejected() {
        let doc = CASE2.replace("sigma_b = 3e6", "sigma_b = -3e6");
        let err = load_config(&doc).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("erbium.sigma_b"), "{msg}"),
            other => panic!("expected Validation, got {other:?}"),
        }
    }

    #[test]
    fn microwave_band_separation_is_enforced() {
        let doc = CASE2.replace("omega_a = 195e12", "omega_a = 4.9e12");
        assert!(load_config(&doc).is_err());
    }

    #[test]
    fn missing_magnet_section_is_the_baseline_device() {
        let doc: String = CASE2
            .lines()
            .skip_while(|_| false)
            .collect::<Vec<_>>()
            .join("\n");
        let start = doc.find("[magnet]").unwrap();
        let end = doc.find("[cavities]").unwrap();
        let doc = format!("{}{}", &doc[..start], &doc[end..]);
        let cfg = load_config(&doc).unwrap();
        assert!(cfg.magnet.is_none());
        assert_eq!(total_couplings(&cfg).g_b_tilde_total, 0.0);
        assert_eq!(cfg.gamma(), 0.0);
    }

    #[test]
    fn misprint_scale_spin_count_is_noted() {
        let doc = CASE2.replace("n_fe = 6e17", "n_fe = 6e37");
        let (_, notes) = load_config_with_notes(doc.as_str()).unwrap();
        assert!(notes.iter().any(|n| n.contains("misprint")), "{notes:?}");
    }

    #[test]
    fn exchange_coupling_value_and_linearity() {
        // Canonical material numbers.
        let h = perp_exchange_to_coupling(0.714e12, 5.0, 7.9);
        assert_relative_eq!(h, -1.410_15e13, max_relative = 1e-12);
        assert!(h < 0.0);
        // Linear in the exchange strength, zero coordination kills it.
        assert_relative_eq!(
            perp_exchange_to_coupling(2.0 * 0.714e12, 5.0, 7.9),
            2.0 * h,
            max_relative = 1e-15
        );
        assert_eq!(perp_exchange_to_coupling(0.714e12, 0.0, 7.9), 0.0);
    }

    #[test]
    fn dmi_coupling_is_imaginary_and_additive() {
        let d = dmi_to_coupling(3.38e8, 1.0, 1.0);
        assert_eq!(d.re, 0.0);
        assert_relative_eq!(d.norm(), 1.69e8, max_relative = 1e-12);

        let d2 = dmi_to_coupling(1e9, 5.0, 7.9);
        assert_relative_eq!(d2.norm(), 1.975e10, max_relative = 1e-12);
        // Sign of d_z flips the imaginary part.
        assert_eq!(dmi_to_coupling(-1e9, 5.0, 7.9).im, -d2.im);

        let total = Complex64::new(perp_exchange_to_coupling(0.714e12, 5.0, 7.9), 0.0) + d2;
        assert_relative_eq!(total.re, -1.410_15e13, max_relative = 1e-12);
        assert_relative_eq!(total.im, d2.im, max_relative = 1e-15);
    }

    #[test]
    fn field_to_couplings_ratio() {
        let cfg = load_config(CASE2).unwrap();
        // Amplitude chosen so the iron coupling lands on its canonical value.
        let b = 5.8e-2 / (BOHR_MAGNETON_OVER_H * 2.0 / 4.0);
        let (g_b, g_b_tilde) = microwave_field_to_couplings(b, &cfg).unwrap();
        assert_relative_eq!(g_b_tilde, 5.8e-2, max_relative = 1e-12);
        assert_relative_eq!(g_b / g_b_tilde, 4.74, max_relative = 1e-12);
        assert!(microwave_field_to_couplings(-1e-9, &cfg).is_err());
    }

    #[test]
    fn totals_match_design_targets() {
        let cfg = load_config(CASE2).unwrap();
        let t = total_couplings(&cfg);
        assert_relative_eq!(t.g_a_total, 1.860_408_557e9, max_relative = 1e-9);
        assert_relative_eq!(t.g_b_total, 3.577_708_764e7, max_relative = 1e-9);
        assert_relative_eq!(t.g_b_tilde_total, 4.492_660_682e7, max_relative = 1e-9);
    }

    #[test]
    fn totals_scale_as_root_of_population() {
        let cfg = load_config(CASE2).unwrap();
        let mut quad = cfg.clone();
        quad.erbium.n_er *= 4.0;
        quad.magnet.as_mut().unwrap().n_fe *= 4.0;
        let t1 = total_couplings(&cfg);
        let t4 = total_couplings(&quad);
        assert_relative_eq!(t4.g_a_total, 2.0 * t1.g_a_total, max_relative = 1e-12);
        assert_relative_eq!(t4.g_b_total, 2.0 * t1.g_b_total, max_relative = 1e-12);
        assert_relative_eq!(
            t4.g_b_tilde_total,
            2.0 * t1.g_b_tilde_total,
            max_relative = 1e-12
        );
    }
}
