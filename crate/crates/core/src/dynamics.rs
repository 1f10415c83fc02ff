//! Kick-by-kick propagation and energy observables.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::FloquetMatrix;
use crate::spectral::{centroid, least_squares_slope};

/// Centroid distance from `l_max` at which truncation effects are expected.
pub const TRUNCATION_MARGIN: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveState {
    pub amplitudes: Vec<Complex64>,
}

impl WaveState {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// All weight on one angular momentum.
    pub fn delta(dim: usize, l: usize) -> Result<Self> {
        if l >= dim {
            return Err(Error::InvalidParams(format!("delta at l={l} outside 0..{dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[l] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Normalized real Gaussian `exp(−(l − center)²/(2 width²))`.
    pub fn gaussian(dim: usize, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() {
            return Err(Error::InvalidParams(format!("gaussian needs width > 0, got center={center} width={width}")));
        }
        let raw: Vec<f64> = (0..dim).map(|l| (-(l as f64 - center).powi(2) / (2.0 * width * width)).exp()).collect();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidParams(format!("gaussian at {center} has no weight on 0..{dim}")));
        }
        Ok(Self { amplitudes: raw.into_iter().map(|a| Complex64::new(a / norm, 0.0)).collect() })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn centroid(&self) -> f64 {
        centroid(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &WaveState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `(τ/2) Σ_l l(l+1) |ψ_l|²`.
pub fn kinetic_energy_expectation(state: &WaveState, tau: f64) -> f64 {
    let sum: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(l, z)| (l * (l + 1)) as f64 * z.norm_sqr())
        .sum();
    tau / 2.0 * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KickRecord {
    pub kick: usize,
    pub energy: f64,
    pub norm: f64,
    pub p_l0: f64,
    pub centroid: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// One record per kick, starting with the initial state at kick 0.
    pub records: Vec<KickRecord>,
    /// First kick at which the centroid came within the truncation margin.
    pub truncation_warning: Option<usize>,
}

impl Trajectory {
    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }
}

fn record(kick: usize, state: &WaveState, tau: f64) -> KickRecord {
    KickRecord {
        kick,
        energy: kinetic_energy_expectation(state, tau),
        norm: state.norm(),
        p_l0: state.amplitudes[0].norm_sqr(),
        centroid: state.centroid(),
    }
}

/// Applies `T` `n_kicks` times without renormalizing. Returns the recorded
/// trajectory and the final state.
pub fn propagate(state: &WaveState, t: &FloquetMatrix, n_kicks: usize) -> Result<(Trajectory, WaveState)> {
    if state.dim() != t.dim() {
        return Err(Error::DimensionMismatch { state: state.dim(), operator: t.dim() });
    }
    if n_kicks == 0 {
        return Err(Error::InvalidParams("number of kicks must be positive".into()));
    }
    let tau = t.params().tau.value();
    let limit = t.params().l_max.saturating_sub(TRUNCATION_MARGIN) as f64;
    let mut current = state.clone();
    let mut records = Vec::with_capacity(n_kicks + 1);
    let mut truncation_warning = None;
    records.push(record(0, &current, tau));
    for n in 1..=n_kicks {
        current = WaveState::new(t.apply(&current.amplitudes));
        let r = record(n, &current, tau);
        if truncation_warning.is_none() && r.centroid > limit {
            truncation_warning = Some(n);
        }
        records.push(r);
    }
    Ok((Trajectory { records, truncation_warning }, current))
}

/// Least-squares slope of `ln E` against `ln n` for kicks in
/// `[k_min, k_max]`.
pub fn growth_exponent(traj: &Trajectory, k_min: usize, k_max: usize) -> Result<f64> {
    let window: Vec<&KickRecord> =
        traj.records.iter().filter(|r| r.kick >= k_min.max(1) && r.kick <= k_max).collect();
    if window.len() < 5 {
        return Err(Error::WindowTooSmall { usable: window.len(), required: 5 });
    }
    if let Some(r) = window.iter().find(|r| !(r.energy > 0.0)) {
        return Err(Error::Domain(format!("energy {} at kick {} is not positive", r.energy, r.kick)));
    }
    let xs: Vec<f64> = window.iter().map(|r| (r.kick as f64).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|r| r.energy.ln()).collect();
    Ok(least_squares_slope(&xs, &ys))
}
