//! Analytic edge state at the `l = 0` boundary.
//!
//! The first two rows and columns of the banded operator form a 2×2 block
//! `T₀`; one of its eigenvalues is the edge energy. Inserting that energy in
//! the bulk dispersion relation gives a complex `γ` outside `[−2, 2]`, hence
//! a complex wavenumber whose imaginary part is the decay rate in `l`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::alpha;
use crate::tightbinding::{cubic_gamma, dispersion_gamma};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Kicks at or above this are reported as outside perturbative validity.
pub const PERTURBATIVE_LIMIT: f64 = 2.0;

const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// The corner block `T₀`.
pub fn edge_matrix(kick: f64) -> Matrix2 {
    let al = alpha();
    let p2 = kick * kick;
    let s3 = 3f64.sqrt();
    let t01 = Complex64::new(0.0, -kick / s3 + kick * p2 / (10.0 * s3));
    [
        [Complex64::new(1.0 - p2 / 6.0, 0.0), t01],
        [al * t01, al * (1.0 - 3.0 * p2 / 10.0)],
    ]
}

/// Coefficients `(b, c)` of `E² − bE + c`, the characteristic polynomial of
/// `T₀` truncated at `P³`.
pub fn edge_quadratic(kick: f64) -> (Complex64, Complex64) {
    let al = alpha();
    let p2 = kick * kick;
    (al + 1.0 - (al * 9.0 + 5.0) * (p2 / 30.0), al * (1.0 - 2.0 * p2 / 15.0))
}

pub fn edge_quadratic_residual(energy: Complex64, kick: f64) -> f64 {
    let (b, c) = edge_quadratic(kick);
    (energy * energy - b * energy + c).norm()
}

/// `½[1 + α − P²(5+9α)/30 + √((1−α)² − (P²/15)(9α² + 6α + 5))]` on the
/// principal branch, which gives `E(0) = 1`.
pub fn edge_energy(kick: f64) -> Complex64 {
    let al = alpha();
    let p2 = kick * kick;
    let disc = (-al + 1.0).powi(2) - (al * al * 9.0 + al * 6.0 + 5.0) * (p2 / 15.0);
    (al + 1.0 - (al * 9.0 + 5.0) * (p2 / 30.0) + disc.sqrt()) / 2.0
}

/// `det(T₀ − E)`.
pub fn edge_determinant(energy: Complex64, kick: f64) -> Complex64 {
    let m = edge_matrix(kick);
    (m[0][0] - energy) * (m[1][1] - energy) - m[0][1] * m[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeWavenumber {
    pub gamma: Complex64,
    /// The root of `z + 1/z = γ` with `|z| > 1`, so `z = e^{-3ik}`.
    pub z: Complex64,
    pub k: Complex64,
}

impl EdgeWavenumber {
    pub fn decay_rate(&self) -> f64 {
        self.k.im
    }
}

/// Decaying wavenumber for a complex `γ`.
pub fn wavenumber_from_gamma(gamma: Complex64) -> Result<EdgeWavenumber> {
    let half = gamma / 2.0;
    let root = (half * half - 1.0).sqrt();
    let (zp, zm) = (half + root, half - root);
    let z = if zp.norm() >= zm.norm() { zp } else { zm };
    if (z.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL {
        return Err(Error::NoLocalizedSolution { modulus: z.norm() });
    }
    let k = Complex64::i() * z.ln() / 3.0;
    Ok(EdgeWavenumber { gamma, z, k })
}

/// `γ_edge` from the dispersion relation and the decaying root.
pub fn edge_wavenumber(kick: f64) -> Result<EdgeWavenumber> {
    if !(kick > 0.0) {
        return Err(Error::Domain(format!("edge wavenumber needs P > 0, got {kick}")));
    }
    wavenumber_from_gamma(dispersion_gamma(edge_energy(kick), kick)?)
}

/// Decay rate implied by the full characteristic cubic at `energy`, instead
/// of the second-order dispersion relation.
pub fn cubic_decay_rate(energy: Complex64, kick: f64) -> Result<f64> {
    let gamma = cubic_gamma(energy, kick)
        .ok_or_else(|| Error::Domain(format!("energy {energy} solves the cubic for every gamma")))?;
    Ok(wavenumber_from_gamma(gamma)?.decay_rate())
}

/// Unit-norm model profile `e^{−Im(k) l}` for `l = 0..=l_max`.
pub fn edge_profile(l_max: usize, k: Complex64) -> Result<Vec<f64>> {
    if !(k.im > 0.0) {
        return Err(Error::Domain(format!("profile diverges for Im(k) = {}", k.im)));
    }
    let raw: Vec<f64> = (0..=l_max).map(|l| (-k.im * l as f64).exp()).collect();
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(raw.into_iter().map(|a| a / norm).collect())
}

/// Everything the analytic theory says about the edge state at one kick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeSolution {
    pub kick: f64,
    pub t00: Complex64,
    pub t01: Complex64,
    pub t10: Complex64,
    pub t11: Complex64,
    pub energy: Complex64,
    pub gamma: Complex64,
    pub k: Complex64,
    pub decay_rate: f64,
    pub outside_perturbative_validity: bool,
}

impl EdgeSolution {
    pub fn new(kick: f64) -> Result<Self> {
        let m = edge_matrix(kick);
        let wave = edge_wavenumber(kick)?;
        Ok(Self {
            kick,
            t00: m[0][0],
            t01: m[0][1],
            t10: m[1][0],
            t11: m[1][1],
            energy: edge_energy(kick),
            gamma: wave.gamma,
            k: wave.k,
            decay_rate: wave.decay_rate(),
            outside_perturbative_validity: kick >= PERTURBATIVE_LIMIT,
        })
    }

    pub fn profile(&self, l_max: usize) -> Result<Vec<f64>> {
        edge_profile(l_max, self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{kinetic_phase, perturbative_kick_element, TauFrac};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn corner_block_examples() {
        let m0 = edge_matrix(0.0);
        assert_eq!(m0[0][0], c(1.0, 0.0));
        assert_eq!(m0[0][1], c(0.0, 0.0));
        assert!((m0[1][1] - alpha()).norm() < 1e-15);
        assert!((edge_matrix(0.3)[0][0].re - 0.985).abs() < 1e-15);
    }

    #[test]
    fn corner_block_matches_banded_operator() {
        let tau = TauFrac::default();
        for p in [0.1, 0.3, 1.0, 3.0] {
            let m = edge_matrix(p);
            for (l, row) in m.iter().enumerate() {
                for (lp, entry) in row.iter().enumerate() {
                    let expect = kinetic_phase(l, tau) * perturbative_kick_element(l, lp, p);
                    assert!((entry - expect).norm() < 1e-14, "P={p} ({l},{lp})");
                }
            }
            assert!((m[1][0] - alpha() * m[0][1]).norm() < 1e-15);
        }
    }

    #[test]
    fn edge_energy_at_zero_kick_is_one() {
        assert!((edge_energy(0.0) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn simplified_root_leaves_quartic_residual() {
        // The closed form drops X² from the discriminant, X = P²(5+9α)/30,
        // so it misses the quadratic by exactly X²/4.
        for p in [0.1, 0.3, 1.0] {
            let x = (alpha() * 9.0 + 5.0) * (p * p / 30.0);
            let r = edge_quadratic_residual(edge_energy(p), p);
            assert!((r - (x * x).norm() / 4.0).abs() < 1e-14, "P={p}: {r}");
        }
    }

    #[test]
    fn edge_energy_is_near_eigenvalue_of_block() {
        assert!(edge_determinant(edge_energy(0.1), 0.1).norm() <= 0.1f64.powi(4));
        assert!(edge_determinant(edge_energy(0.05), 0.05).norm() <= 0.05f64.powi(4));
    }

    #[test]
    fn edge_energy_is_continuous_and_near_unit_modulus() {
        let mut prev = edge_energy(0.0);
        for i in 1..=100 {
            let p = i as f64 / 100.0;
            let e = edge_energy(p);
            assert!((e - prev).norm() < 0.05, "jump at P={p}");
            assert!((e.norm() - 1.0).abs() <= 0.5 * p * p, "P={p}");
            prev = e;
        }
    }

    #[test]
    fn gamma_edge_lies_outside_band() {
        let w = edge_wavenumber(0.3).unwrap();
        assert!(w.gamma.norm() > 2.0);
        let back = (Complex64::i() * w.k * 3.0).exp() + (-Complex64::i() * w.k * 3.0).exp();
        assert!((back - w.gamma).norm() < 1e-12 * w.gamma.norm().max(1.0));
        assert!(w.decay_rate() > 0.0);
    }

    #[test]
    fn localization_tightens_as_kick_shrinks() {
        let rates: Vec<f64> =
            [1.0, 0.5, 0.3, 0.1, 0.05].iter().map(|&p| edge_wavenumber(p).unwrap().decay_rate()).collect();
        for w in rates.windows(2) {
            assert!(w[1] > w[0], "{rates:?}");
        }
    }

    #[test]
    fn decaying_solution_up_to_strong_kicks() {
        for p in [0.01, 0.3, 1.0, 2.0, 3.0] {
            let s = EdgeSolution::new(p).unwrap();
            assert!(s.decay_rate > 0.0);
            assert_eq!(s.outside_perturbative_validity, p >= 2.0);
        }
        assert!(edge_wavenumber(0.0).is_err());
    }

    #[test]
    fn propagating_gamma_is_rejected() {
        assert!(matches!(wavenumber_from_gamma(c(1.0, 0.0)), Err(Error::NoLocalizedSolution { .. })));
    }

    #[test]
    fn profile_examples() {
        let k = c(0.3, 2f64.ln());
        let prof = edge_profile(10, k).unwrap();
        for w in prof.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-14);
        }
        assert!((prof.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(edge_profile(10, c(0.3, 0.0)).is_err());
    }

    #[test]
    fn band_energy_has_no_cubic_decay() {
        use crate::tightbinding::{characteristic_cubic, solve_cubic};
        let roots = solve_cubic(&characteristic_cubic(0.2, c(1.3, 0.0))).unwrap();
        for e in roots {
            assert!(matches!(cubic_decay_rate(e, 0.2), Err(Error::NoLocalizedSolution { .. })));
        }
        assert!(cubic_decay_rate(edge_energy(0.3), 0.3).unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn profile_slope_is_decay_rate(im in 0.01f64..3.0, re in -1.0f64..1.0) {
            let prof = edge_profile(30, c(re, im)).unwrap();
            for l in 0..8 {
                prop_assert!(((prof[l + 1] / prof[l]).ln() + im).abs() < 1e-12);
            }
        }
    }
}
