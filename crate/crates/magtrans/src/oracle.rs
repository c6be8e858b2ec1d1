//! Direct time evolution of the mode amplitudes, for checking the reduced
//! model against the full one.
//!
//! [`evolve_full`] integrates the five-mode Schrodinger equation with a
//! classical fourth-order Runge-Kutta stepper. [`evolve_effective`] evolves
//! the two-mode reduction exactly, by diagonalizing the 2x2 Hamiltonian in
//! closed form. Both samplers share the same deterministic sampling plan, so
//! their trajectories can be compared point by point.
//!
//! Frequencies are plain Hz throughout the crate; the factor of 2 pi enters
//! here and only here, where frequencies meet time.

use nalgebra::{Matrix2, Matrix5, Vector2, Vector5};
use num_complex::Complex64;

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Keep at most this many samples per trajectory.
pub const MAX_SAMPLES: usize = 4096;

/// A sampled trajectory of mode amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times, seconds. Always starts at zero and ends at the final
    /// integrator step.
    pub times: Vec<f64>,
    /// Amplitudes at each sample time, one vector of mode amplitudes per
    /// sample.
    pub states: Vec<Vec<Complex64>>,
    /// Largest deviation of the squared norm from its initial value, over
    /// every integrator step (not just the sampled ones).
    pub norm_drift: f64,
    /// Number of integrator steps taken.
    pub n_steps: usize,
    /// Step size, seconds.
    pub dt: f64,
}

impl Trajectory {
    /// Population of one mode at every sample time.
    pub fn population(&self, mode: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[mode].norm_sqr()).collect()
    }
}

/// Five-mode initial state holding a single microwave photon.
pub fn microwave_photon_start() -> Vector5<Complex64> {
    let mut psi = Vector5::zeros();
    psi[0] = Complex64::new(1.0, 0.0);
    psi
}

/// Two-mode initial state with the excitation on the microwave side.
pub fn two_mode_start() -> Vector2<Complex64> {
    Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
}

/// Step indices to sample, at most [`MAX_SAMPLES`] of them, always including
/// step zero and the final step.
pub fn sample_indices(n_steps: usize) -> Vec<usize> {
    let stride = n_steps.div_ceil(MAX_SAMPLES - 1).max(1);
    let mut indices: Vec<usize> = (0..=n_steps).step_by(stride).collect();
    if *indices.last().unwrap() != n_steps {
        indices.push(n_steps);
    }
    indices
}

fn plan(t_end: f64, dt: f64) -> Result<(usize, Vec<usize>)> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!(
            "evolution time must be positive and finite, got {t_end}"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    let ratio = (t_end / dt).ceil();
    if ratio > 1e12 {
        return Err(Error::Domain(format!(
            "evolution would take {ratio:.0} steps; raise dt or lower t_end"
        )));
    }
    let n_steps = (ratio as usize).max(1);
    Ok((n_steps, sample_indices(n_steps)))
}

fn max_entry_norm<const N: usize>(
    h: &nalgebra::SMatrix<Complex64, N, N>,
) -> f64 {
    h.iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Integrate the five-mode Schrodinger equation with fixed-step RK4.
///
/// The step must resolve the fastest frequency in the problem: the run is
/// refused unless 2 pi dt max|H| < 0.1, and the error carries a step that
/// satisfies the bound with margin. The reported norm drift is a live
/// accuracy monitor; with the bound above it stays far below the population
/// tolerances this oracle is used with.
pub fn evolve_full(
    h: &Matrix5<Complex64>,
    psi0: &Vector5<Complex64>,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let (n_steps, samples) = plan(t_end, dt)?;
    let max_h = max_entry_norm(h);
    if max_h > 0.0 && TAU * dt * max_h >= 0.1 {
        return Err(Error::StepSize {
            dt,
            suggested: 0.05 / (TAU * max_h),
        });
    }
    let w = h * Complex64::new(0.0, -TAU);
    let mut psi = *psi0;
    let norm0 = psi.norm_squared();
    let mut drift: f64 = 0.0;
    let mut states = Vec::with_capacity(samples.len());
    let mut times = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;
    for step in 0..=n_steps {
        if next_sample < samples.len() && samples[next_sample] == step {
            times.push(step as f64 * dt);
            states.push(psi.iter().copied().collect());
            next_sample += 1;
        }
        if step == n_steps {
            break;
        }
        let k1 = w * psi;
        let k2 = w * (psi + k1 * Complex64::from(0.5 * dt));
        let k3 = w * (psi + k2 * Complex64::from(0.5 * dt));
        let k4 = w * (psi + k3 * Complex64::from(dt));
        psi += (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4)
            * Complex64::from(dt / 6.0);
        drift = drift.max((psi.norm_squared() - norm0).abs());
    }
    Ok(Trajectory {
        times,
        states,
        norm_drift: drift,
        n_steps,
        dt,
    })
}

/// Evolve a two-mode Hermitian Hamiltonian exactly, sampled on the same plan
/// as [`evolve_full`] so the two are directly comparable. `dt` only sets the
/// sampling grid; there is no integration error.
pub fn evolve_effective(
    h: &Matrix2<Complex64>,
    psi0: &Vector2<Complex64>,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let (n_steps, samples) = plan(t_end, dt)?;
    let scale = max_entry_norm(h).max(1e-300);
    let hermitian_defect = (h[(0, 1)] - h[(1, 0)].conj()).norm()
        .max(h[(0, 0)].im.abs())
        .max(h[(1, 1)].im.abs());
    if hermitian_defect > 1e-12 * scale {
        return Err(Error::Domain(
            "exact two-mode evolution requires a Hermitian Hamiltonian".into(),
        ));
    }
    let center = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let mz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let s = h[(1, 0)];
    let r = (mz * mz + s.norm_sqr()).sqrt();
    let m = Matrix2::new(
        Complex64::new(mz, 0.0),
        s.conj(),
        s,
        Complex64::new(-mz, 0.0),
    );
    let norm0 = psi0.norm_squared();
    let mut states = Vec::with_capacity(samples.len());
    let mut times = Vec::with_capacity(samples.len());
    let mut drift: f64 = 0.0;
    for &step in &samples {
        let t = step as f64 * dt;
        let phase = Complex64::from_polar(1.0, -TAU * center * t);
        let theta = TAU * r * t;
        let psi = if r == 0.0 {
            psi0 * phase
        } else {
            let rot = Matrix2::identity() * Complex64::from(theta.cos())
                + m * Complex64::new(0.0, -theta.sin() / r);
            (rot * psi0) * phase
        };
        drift = drift.max((psi.norm_squared() - norm0).abs());
        times.push(t);
        states.push(psi.iter().copied().collect());
    }
    Ok(Trajectory {
        times,
        states,
        norm_drift: drift,
        n_steps,
        dt,
    })
}

/// Largest total population found in the given modes at any sample time.
pub fn max_leakage(traj: &Trajectory, modes: &[usize]) -> f64 {
    traj.states
        .iter()
        .map(|s| modes.iter().map(|&m| s[m].norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
}
