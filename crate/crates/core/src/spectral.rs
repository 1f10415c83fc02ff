//! Eigen-decomposition of the Floquet matrix and analysis of its eigenstates.

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::FloquetMatrix;

/// Largest dimension handled by the dense solver.
pub const MAX_DIM: usize = 2000;
/// Eigenpairs with `‖Tv − Ev‖` above this are rejected.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Highest `l` counted as belonging to the edge cell.
pub const EDGE_CELL_L: usize = 2;
/// Minimum edge-cell weight for a state to count as an edge state.
pub const EDGE_THRESHOLD: f64 = 0.5;
/// Default window for the decay fit.
pub const DECAY_WINDOW: (usize, usize) = (0, 12);
/// Amplitudes below this are dropped from the decay fit.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

const WAVENUMBER_GRID: usize = 1024;
const WINDOW_LO: usize = 9;
const WINDOW_HI_MARGIN: usize = 12;
const PEAK_RATIO: f64 = 2.0;
const MIN_VECTOR_LEN: usize = 30;

/// Full eigensystem of a Floquet matrix, sorted by quasienergy and then by
/// centroid.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Quasienergies `ω = arg E` in `(−π, π]`.
    pub phases: Vec<f64>,
    /// Unit-norm eigenvectors with the largest component real and positive.
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn centroid(&self, index: usize) -> f64 {
        centroid(&self.eigenvectors[index])
    }

    pub fn low_weight(&self, index: usize, l_cut: usize) -> f64 {
        low_weight(&self.eigenvectors[index], l_cut)
    }
}

/// `Σ_l l |v_l|² / Σ_l |v_l|²`.
pub fn centroid(v: &[Complex64]) -> f64 {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    v.iter().enumerate().map(|(l, z)| l as f64 * z.norm_sqr()).sum::<f64>() / total
}

/// Probability on `l ≤ l_cut` relative to the whole vector.
pub fn low_weight(v: &[Complex64], l_cut: usize) -> f64 {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    v.iter().take(l_cut + 1).map(|z| z.norm_sqr()).sum::<f64>() / total
}

pub fn eigendecompose(t: &FloquetMatrix) -> Result<Spectrum> {
    let n = t.dim();
    if n > MAX_DIM {
        return Err(Error::InvalidParams(format!("dimension {n} exceeds the dense limit {MAX_DIM}")));
    }
    let a = Mat::<c64>::from_fn(n, n, |i, j| t.get(i, j));
    let evd = a.eigen().map_err(|_| Error::NoConvergence { index: None })?;
    let u = evd.U();
    let s = evd.S();

    let mut pairs = Vec::with_capacity(n);
    for j in 0..n {
        let lambda = s[j];
        let mut v: Vec<Complex64> = (0..n).map(|i| u[(i, j)]).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::NoConvergence { index: Some(j) });
        }
        let (peak_at, peak) = v
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        let fix = peak.conj() / (peak.norm() * norm);
        for z in &mut v {
            *z *= fix;
        }
        v[peak_at] = Complex64::new(v[peak_at].norm(), 0.0);
        let tv = t.apply(&v);
        let residual = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !(residual < RESIDUAL_TOL) {
            return Err(Error::ResidualTooLarge { index: j, residual });
        }
        pairs.push((lambda, centroid(&v), v, residual));
    }
    pairs.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()).then(a.1.total_cmp(&b.1)));

    let mut spectrum = Spectrum {
        eigenvalues: Vec::with_capacity(n),
        phases: Vec::with_capacity(n),
        eigenvectors: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
    };
    for (lambda, _, v, residual) in pairs {
        spectrum.eigenvalues.push(lambda);
        spectrum.phases.push(lambda.arg());
        spectrum.eigenvectors.push(v);
        spectrum.residuals.push(residual);
    }
    Ok(spectrum)
}

/// Bloch wavenumber `k ∈ [0, π/3]` of an extended eigenvector.
///
/// Takes the DTFT magnitude of the sublattice `ψ_{3j}` over the interior
/// window `l ∈ [9, l_max − 12]`, symmetrized in `±q` so standing waves peak
/// once, and maps the dominant `q = 3k` back to `k`. Localized states have
/// no sharp peak and are rejected.
pub fn assign_wavenumber(v: &[Complex64]) -> Result<f64> {
    if v.len() < MIN_VECTOR_LEN {
        return Err(Error::WindowTooSmall { usable: v.len(), required: MIN_VECTOR_LEN });
    }
    let hi = v.len() - 1 - WINDOW_HI_MARGIN;
    let samples: Vec<(f64, Complex64)> =
        (WINDOW_LO..=hi).filter(|l| l % 3 == 0).map(|l| ((l / 3) as f64, v[l])).collect();

    let power: Vec<f64> = (0..WAVENUMBER_GRID)
        .map(|i| {
            let q = std::f64::consts::PI * i as f64 / (WAVENUMBER_GRID - 1) as f64;
            let (mut fwd, mut back) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for &(j, psi) in &samples {
                let w = Complex64::from_polar(1.0, -q * j);
                fwd += w * psi;
                back += w.conj() * psi;
            }
            fwd.norm_sqr() + back.norm_sqr()
        })
        .collect();

    let (best, peak) = power
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut sorted = power.clone();
    sorted.sort_by(f64::total_cmp);
    let median = (sorted[WAVENUMBER_GRID / 2 - 1] + sorted[WAVENUMBER_GRID / 2]) / 2.0;
    if !(peak >= PEAK_RATIO * median) || peak == 0.0 {
        return Err(Error::NoDominantPeak { ratio: if median > 0.0 { peak / median } else { 0.0 } });
    }
    let q = std::f64::consts::PI * best as f64 / (WAVENUMBER_GRID - 1) as f64;
    Ok(q / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeDetection {
    pub index: usize,
    /// Probability on `l ≤ 2`.
    pub weight_low: f64,
    pub eigenvalue: Complex64,
    /// Slope of `ln|ψ_l|` over the default window.
    pub fitted_slope: f64,
}

/// State with the most weight on the first unit cell, provided that weight
/// reaches [`EDGE_THRESHOLD`].
pub fn detect_edge_state(s: &Spectrum) -> Result<EdgeDetection> {
    let (index, weight_low) = best_low_weight(s, EDGE_CELL_L).ok_or(Error::NoEdgeState { best_weight: 0.0 })?;
    if weight_low < EDGE_THRESHOLD {
        return Err(Error::NoEdgeState { best_weight: weight_low });
    }
    let v = &s.eigenvectors[index];
    let hi = DECAY_WINDOW.1.min(v.len() - 1);
    let fitted_slope = fit_decay_rate(v, DECAY_WINDOW.0, hi).unwrap_or(f64::NAN);
    Ok(EdgeDetection { index, weight_low, eigenvalue: s.eigenvalues[index], fitted_slope })
}

/// Index and weight of the state with the largest probability on `l ≤ l_cut`.
pub fn best_low_weight(s: &Spectrum, l_cut: usize) -> Option<(usize, f64)> {
    (0..s.len())
        .map(|i| (i, s.low_weight(i, l_cut)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
}

/// Least-squares slope of `ln|v_l|` against `l` over `l ∈ [l_lo, l_hi]`,
/// skipping amplitudes below [`AMPLITUDE_FLOOR`].
pub fn fit_decay_rate(v: &[Complex64], l_lo: usize, l_hi: usize) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (l_lo..=l_hi.min(v.len().saturating_sub(1)))
        .filter(|&l| l < v.len() && v[l].norm() > AMPLITUDE_FLOOR)
        .map(|l| (l as f64, v[l].norm().ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::WindowTooSmall { usable: xs.len(), required: 4 });
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
