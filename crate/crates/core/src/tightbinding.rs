//! Tight-binding analog of the periodic bulk operator.
//!
//! Far from `l = 0` the Floquet matrix is banded with period three, so it
//! behaves like a chain with a three-site unit cell. A Bloch wave with
//! wavenumber `k` reduces it to a 3×3 matrix whose eigenvalues depend on `k`
//! only through `γ = e^{3ik} + e^{-3ik}`. Sites are labelled with the
//! `α`-carrying site first.

use num_complex::Complex64;
use serde::Serialize;

pub use crate::cubic::{eval_cubic, solve_cubic, CubicCoeffs};
use crate::error::{Error, Result};
use crate::floquet::{alpha, large_l_coefficients, BandCoefficients};

pub type Matrix3 = [[Complex64; 3]; 3];

/// `γ = 2 cos 3k`.
pub fn gamma_of_k(k: f64) -> f64 {
    2.0 * (3.0 * k).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Bloch-reduced transfer matrix at wavenumber `k`.
pub fn solid_matrix(k: f64, c: &BandCoefficients) -> Matrix3 {
    let e = |m: f64| Complex64::from_polar(1.0, m * k);
    let diag = c.a + c.d * (e(3.0) + e(-3.0));
    let fwd = c.b * e(1.0) + c.c * e(-2.0);
    let back = c.b * e(-1.0) + c.c * e(2.0);
    let al = c.alpha;
    [
        [al * diag, al * fwd, al * back],
        [back, diag, fwd],
        [fwd, back, diag],
    ]
}

/// Monic characteristic polynomial `det(E·1 - M)` of a 3×3 matrix.
pub fn characteristic_polynomial(m: &Matrix3) -> CubicCoeffs {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    [Complex64::new(1.0, 0.0), -trace, minors, -det]
}

/// Characteristic equation for the band energies, truncated at `P³`:
///
/// `E³ − E²(1 − P²/4 + iP³γ/48)(α+2) − E((2α+1)(−1+P²/4) + iαP³γ/24 + iP³γ/48) − α`.
pub fn characteristic_cubic(kick: f64, gamma: Complex64) -> CubicCoeffs {
    let (p0, p1) = cubic_gamma_parts(kick);
    let one = Complex64::new(1.0, 0.0);
    [one, p0[1] + p1[1] * gamma, p0[2] + p1[2] * gamma, p0[3] + p1[3] * gamma]
}

/// The characteristic cubic is affine in `γ`: coefficients `p0 + γ p1`.
fn cubic_gamma_parts(kick: f64) -> (CubicCoeffs, CubicCoeffs) {
    let al = alpha();
    let i = Complex64::i();
    let p2 = kick * kick;
    let p3 = p2 * kick;
    let zero = Complex64::new(0.0, 0.0);
    let base = [
        Complex64::new(1.0, 0.0),
        -(al + 2.0) * (1.0 - p2 / 4.0),
        -(al * 2.0 + 1.0) * (p2 / 4.0 - 1.0),
        -al,
    ];
    let slope = [
        zero,
        -(al + 2.0) * i * (p3 / 48.0),
        -(al * i * (p3 / 24.0) + i * (p3 / 48.0)),
        zero,
    ];
    (base, slope)
}

/// The `γ` for which `E` solves the characteristic cubic; complex in
/// general. Returns `None` when `E` is a root for every `γ`.
pub fn cubic_gamma(energy: Complex64, kick: f64) -> Option<Complex64> {
    let (base, slope) = cubic_gamma_parts(kick);
    let num = eval_cubic(&base, energy);
    let den = eval_cubic(&slope, energy);
    if den.norm() == 0.0 {
        return None;
    }
    Some(-num / den)
}

/// `E₁ ≃ 1 ± iP/2 + [(3(1+α*)γ − 12α*) / (48(α*−1))] P²`, for complex `γ`.
pub fn perturbative_e1_at_gamma(gamma: Complex64, kick: f64, branch: Branch) -> Complex64 {
    let ac = alpha().conj();
    let second = ((ac + 1.0) * gamma * 3.0 - ac * 12.0) / ((ac - 1.0) * 48.0);
    Complex64::new(1.0, branch.sign() * kick / 2.0) + second * (kick * kick)
}

pub fn perturbative_e1(k: f64, kick: f64, branch: Branch) -> Complex64 {
    perturbative_e1_at_gamma(Complex64::new(gamma_of_k(k), 0.0), kick, branch)
}

/// `E₂₀ ≃ α + (α+1)P² / (4(α*−1)) − iP³αγ/48`.
pub fn perturbative_e2_at_gamma(gamma: Complex64, kick: f64) -> Complex64 {
    let al = alpha();
    let ac = al.conj();
    al + (al + 1.0) / ((ac - 1.0) * 4.0) * (kick * kick) - Complex64::i() * al * gamma * (kick.powi(3) / 48.0)
}

pub fn perturbative_e2(k: f64, kick: f64) -> Complex64 {
    perturbative_e2_at_gamma(Complex64::new(gamma_of_k(k), 0.0), kick)
}

/// Inverse of the second-order `E₁` formula:
/// `γ = 16(α*−1) / ((α*+1)P²) · (E + iP/2 − 1) + 4α*/(1+α*)`.
pub fn dispersion_gamma(energy: Complex64, kick: f64) -> Result<Complex64> {
    if kick == 0.0 || !kick.is_finite() {
        return Err(Error::Domain(format!("dispersion relation needs P != 0, got {kick}")));
    }
    let ac = alpha().conj();
    let prefactor = (ac - 1.0) * 16.0 / ((ac + 1.0) * (kick * kick));
    Ok(prefactor * (energy + Complex64::new(-1.0, kick / 2.0)) + ac * 4.0 / (ac + 1.0))
}

/// Band energies at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEnergies {
    pub e1_plus: Complex64,
    pub e1_minus: Complex64,
    pub e20: Complex64,
}

impl BandEnergies {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.e1_plus, self.e1_minus, self.e20]
    }

    /// Distance from `energy` to the closest of the three bands.
    pub fn nearest_distance(&self, energy: Complex64) -> f64 {
        self.as_array().iter().map(|e| (e - energy).norm()).fold(f64::INFINITY, f64::min)
    }
}

pub fn band_energies(k: f64, kick: f64) -> BandEnergies {
    BandEnergies {
        e1_plus: perturbative_e1(k, kick, Branch::Plus),
        e1_minus: perturbative_e1(k, kick, Branch::Minus),
        e20: perturbative_e2(k, kick),
    }
}

/// One eigenstate of the Bloch-reduced matrix: the chain amplitude on site
/// `n` is `sqrt(3/N) α_{n mod 3} e^{ikn}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochPoint {
    pub k: f64,
    pub gamma: f64,
    pub energy: Complex64,
    pub cell_amplitudes: [Complex64; 3],
    /// Number of chain sites the normalization refers to.
    pub n_sites: usize,
}

impl BlochPoint {
    pub fn amplitude(&self, site: usize) -> Complex64 {
        let norm = (3.0 / self.n_sites as f64).sqrt();
        self.cell_amplitudes[site % 3] * Complex64::from_polar(norm, self.k * site as f64)
    }
}

/// Eigenpairs of [`solid_matrix`] at `k`, from the roots of its exact
/// characteristic polynomial.
pub fn bloch_states(k: f64, kick: f64, n_sites: usize) -> Result<[BlochPoint; 3]> {
    let m = solid_matrix(k, &large_l_coefficients(kick));
    let roots = solve_cubic(&characteristic_polynomial(&m))?;
    let gamma = gamma_of_k(k);
    Ok(roots.map(|energy| BlochPoint {
        k,
        gamma,
        energy,
        cell_amplitudes: null_vector(&m, energy),
        n_sites,
    }))
}

/// Unit vector spanning the kernel of `M − E`, via the largest cross
/// product of two of its rows.
fn null_vector(m: &Matrix3, energy: Complex64) -> [Complex64; 3] {
    let mut rows = *m;
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] -= energy;
    }
    // v ⟂ conj of two rows: v = conj(r_i) × conj(r_j) solves r_i·v = r_j·v = 0
    let cross = |a: &[Complex64; 3], b: &[Complex64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let candidates = [cross(&rows[0], &rows[1]), cross(&rows[0], &rows[2]), cross(&rows[1], &rows[2])];
    let size = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let best = candidates
        .iter()
        .max_by(|a, b| size(a).total_cmp(&size(b)))
        .copied()
        .unwrap();
    let norm = size(&best).sqrt();
    if norm == 0.0 {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    best.map(|z| z / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eigenvalues(m: &Matrix3) -> [Complex64; 3] {
        solve_cubic(&characteristic_polynomial(m)).unwrap()
    }

    fn nearest(roots: &[Complex64; 3], target: Complex64) -> f64 {
        roots.iter().map(|r| (r - target).norm()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_of_k(0.0), 2.0);
        assert!((gamma_of_k(PI / 3.0) + 2.0).abs() < 1e-15);
        assert!((gamma_of_k(PI / 9.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn solid_matrix_examples() {
        let al = alpha();
        let m0 = solid_matrix(0.4, &large_l_coefficients(0.0));
        for i in 0..3 {
            for j in 0..3 {
                let expect = match (i, j) {
                    (0, 0) => al,
                    (1, 1) | (2, 2) => c(1.0, 0.0),
                    _ => c(0.0, 0.0),
                };
                assert!((m0[i][j] - expect).norm() < 1e-15);
            }
        }

        let co = large_l_coefficients(0.3);
        for k in [0.0, 0.3, 1.0] {
            let m = solid_matrix(k, &co);
            let trace = m[0][0] + m[1][1] + m[2][2];
            let g = gamma_of_k(k);
            let expect = (al + 2.0) * co.a + (al + 2.0) * co.d * g;
            assert!((trace - expect).norm() < 1e-15);
        }
        let m = solid_matrix(0.0, &co);
        assert!((m[0][0] - al * (co.a + co.d * 2.0)).norm() < 1e-15);
        assert!((m[0][1] - al * (co.b + co.c)).norm() < 1e-15);
        assert!((m[0][2] - al * (co.b + co.c)).norm() < 1e-15);
    }

    #[test]
    fn bloch_wave_solves_periodic_chain() {
        // Infinite banded operator with α on sites n ≡ 0 (mod 3).
        let p = 0.4;
        let co = large_l_coefficients(p);
        let band = [co.d, co.c, co.b, co.a, co.b, co.c, co.d];
        for k in [0.0, 0.2, 0.77, PI / 3.0] {
            for state in bloch_states(k, p, 300).unwrap() {
                for n in 30..36usize {
                    let pref = if n % 3 == 0 { co.alpha } else { c(1.0, 0.0) };
                    let applied: Complex64 = (0..7).map(|j| pref * band[j] * state.amplitude(n + j - 3)).sum();
                    let diff = (applied - state.energy * state.amplitude(n)).norm();
                    assert!(diff < 1e-13, "k={k} site {n}: {diff}");
                }
            }
        }
    }

    #[test]
    fn cubic_at_zero_kick_factorizes() {
        let al = alpha();
        let coeffs = characteristic_cubic(0.0, c(2.0, 0.0));
        assert!((coeffs[1] + al + 2.0).norm() < 1e-15);
        assert!((coeffs[2] - (al * 2.0 + 1.0)).norm() < 1e-15);
        assert!((coeffs[3] + al).norm() < 1e-15);
        let roots = solve_cubic(&coeffs).unwrap();
        let ones = roots.iter().filter(|r| (*r - 1.0).norm() < 1e-12).count();
        assert_eq!(ones, 2, "{roots:?}");
        assert!(nearest(&roots, al) < 1e-12);
    }

    #[test]
    fn cubic_roots_have_small_residual() {
        let coeffs = characteristic_cubic(0.1, c(2.0, 0.0));
        for r in solve_cubic(&coeffs).unwrap() {
            assert!(eval_cubic(&coeffs, r).norm() < 1e-12);
        }
    }

    #[test]
    fn solid_characteristic_polynomial_matches_cubic_to_fourth_order() {
        for k in [0.0, 0.3, 0.9] {
            let cp = characteristic_polynomial(&solid_matrix(k, &large_l_coefficients(0.1)));
            let printed = characteristic_cubic(0.1, c(gamma_of_k(k), 0.0));
            for i in 0..4 {
                assert!((cp[i] - printed[i]).norm() < 5e-4);
            }
        }
    }

    #[test]
    fn e20_solves_cubic_to_fourth_order() {
        for p in [0.05, 0.1, 0.2, 0.3] {
            for k in [0.0, 0.4, PI / 6.0, 1.0] {
                let g = c(gamma_of_k(k), 0.0);
                let r = eval_cubic(&characteristic_cubic(p, g), perturbative_e2(k, p)).norm();
                assert!(r <= 10.0 * p.powi(4), "P={p} k={k}: {r}");
            }
        }
    }

    #[test]
    fn band_formula_examples() {
        for branch in [Branch::Plus, Branch::Minus] {
            assert_eq!(perturbative_e1(0.7, 0.0, branch), c(1.0, 0.0));
        }
        assert!((perturbative_e2(0.7, 0.0) - alpha()).norm() < 1e-15);
        let e = perturbative_e1(0.0, 0.3, Branch::Plus);
        assert!((e.norm() - 1.0).abs() <= 0.3f64.powi(3));

        // γ = 0 at k = π/6 removes the cubic term
        let al = alpha();
        let p = 0.4;
        let expect = al + (al + 1.0) / ((al.conj() - 1.0) * 4.0) * (p * p);
        assert!((perturbative_e2(PI / 6.0, p) - expect).norm() < 1e-15);
    }

    #[test]
    fn bands_are_even_in_k() {
        for k in [0.1, 0.5, 0.9] {
            assert_eq!(band_energies(k, 0.6), band_energies(-k, 0.6));
        }
    }

    #[test]
    fn dispersion_inverts_minus_branch() {
        for p in [0.1, 0.3, 1.0] {
            for i in 0..200 {
                let k = PI / 3.0 * i as f64 / 199.0;
                let g = dispersion_gamma(perturbative_e1(k, p, Branch::Minus), p).unwrap();
                assert!((g - gamma_of_k(k)).norm() < 1e-12, "P={p} k={k}");
            }
        }
        let ac = alpha().conj();
        let g = dispersion_gamma(c(1.0, -0.15), 0.3).unwrap();
        assert!((g - ac * 4.0 / (ac + 1.0)).norm() < 1e-14);
        assert!(dispersion_gamma(c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn plus_branch_and_e20_track_solid_eigenvalues() {
        for k in [0.0, 0.4, PI / 3.0] {
            let roots = eigenvalues(&solid_matrix(k, &large_l_coefficients(0.1)));
            assert!(nearest(&roots, perturbative_e1(k, 0.1, Branch::Plus)) < 2e-4);
            assert!(nearest(&roots, perturbative_e2(k, 0.1)) < 5.0 * 0.1f64.powi(4));
        }
    }

    #[test]
    fn minus_branch_second_order_gamma_term_has_opposite_sign() {
        // Exact second-order coefficient of the 1 − iP/2 root is
        // −1/8 − i√3/24 − i√3γ/48; the shared formula carries +i√3γ/48.
        let p = 1e-3;
        for k in [0.0, 0.5, PI / 3.0] {
            let g = gamma_of_k(k);
            let roots = solve_cubic(&characteristic_cubic(p, c(g, 0.0))).unwrap();
            let root = roots
                .iter()
                .copied()
                .min_by(|a, b| (a - c(1.0, -p / 2.0)).norm().total_cmp(&(b - c(1.0, -p / 2.0)).norm()))
                .unwrap();
            let second = (root - c(1.0, -p / 2.0)) / (p * p);
            let exact = c(-1.0 / 8.0, -(3f64.sqrt()) / 24.0 - 3f64.sqrt() * g / 48.0);
            assert!((second - exact).norm() < 1e-2, "k={k}: {second} vs {exact}");
            let gap = perturbative_e1(k, p, Branch::Minus) - root;
            assert!((gap.norm() / (p * p) - 3f64.sqrt() * g.abs() / 24.0).abs() < 1e-2);
        }
    }

    #[test]
    fn cubic_gamma_recovers_band_gamma() {
        for p in [0.2, 0.8] {
            for k in [0.1, 0.6, 1.0] {
                let g = gamma_of_k(k);
                for r in solve_cubic(&characteristic_cubic(p, c(g, 0.0))).unwrap() {
                    let back = cubic_gamma(r, p).unwrap();
                    assert!((back - g).norm() < 1e-8, "P={p} k={k}: {back}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bands_even_and_dispersion_round_trips(k in 0.0f64..(PI / 3.0), p in 0.1f64..1.0) {
            prop_assert_eq!(band_energies(k, p), band_energies(-k, p));
            let g = dispersion_gamma(perturbative_e1(k, p, Branch::Minus), p).unwrap();
            prop_assert!((g - gamma_of_k(k)).norm() < 1e-12);
        }
    }
}
