//! One-kick Floquet operator `T = T_kin · T_P` on the `m = 0` basis
//! `l = 0..=l_max`.
//!
//! The kick block `⟨l,0| e^{-iP cos θ} |l',0⟩` is either integrated by
//! Gauss–Legendre quadrature (exact mode) or taken from the third-order
//! closed forms for the seven central diagonals (perturbative mode). Row `l`
//! carries the free-rotation phase `e^{-i(τ/2) l(l+1)}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, legendre_sequence, QuadratureRule};

/// `α = e^{2πi/3}`.
pub fn alpha() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// Kick period as an exact fraction of `4π`: `τ = 4π · num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TauFrac {
    pub num: i64,
    pub den: i64,
}

impl TauFrac {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidParams(format!("tau denominator must be positive, got {den}")));
        }
        Ok(Self { num, den })
    }

    /// The resonance used throughout: `τ = 4π/3`.
    pub const fn third() -> Self {
        Self { num: 1, den: 3 }
    }

    pub fn value(&self) -> f64 {
        4.0 * PI * self.num as f64 / self.den as f64
    }
}

impl Default for TauFrac {
    fn default() -> Self {
        Self::third()
    }
}

impl fmt::Display for TauFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for TauFrac {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse tau fraction {s:?}, expected a/b"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Self::new(num, den)
    }
}

/// Free-rotation phase `e^{-i(τ/2) l(l+1)}`, with the exponent reduced
/// modulo `2π` in integer arithmetic.
pub fn kinetic_phase(l: usize, tau: TauFrac) -> Complex64 {
    // (τ/2) l(l+1) = 2π · num · l(l+1) / den
    let ll = (l as i128) * (l as i128 + 1);
    let den = tau.den as i128;
    let r = (tau.num as i128 * ll).rem_euclid(den);
    Complex64::from_polar(1.0, -2.0 * PI * r as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildMode {
    Exact,
    Perturbative,
}

impl fmt::Display for BuildMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BuildMode::Exact => "exact",
            BuildMode::Perturbative => "perturbative",
        })
    }
}

impl FromStr for BuildMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(BuildMode::Exact),
            "perturbative" => Ok(BuildMode::Perturbative),
            other => Err(Error::InvalidParams(format!("unknown mode {other:?}"))),
        }
    }
}

pub const MIN_L_MAX: usize = 9;
/// Quadrature headroom over the largest Legendre degree.
pub const QUAD_MARGIN: usize = 16;
pub const MIN_QUAD_ORDER: usize = 64;

/// Physical and numerical configuration. The magnetic quantum number is
/// fixed at `m = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotorParams {
    /// Dimensionless kick strength `P`.
    pub kick: f64,
    pub tau: TauFrac,
    pub l_max: usize,
    /// `None` selects `max(64, l_max + 16)`.
    pub quad_order: Option<usize>,
}

impl RotorParams {
    pub fn new(kick: f64, l_max: usize) -> Self {
        Self { kick, tau: TauFrac::third(), l_max, quad_order: None }
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order.unwrap_or_else(|| default_quad_order(self.l_max))
    }

    pub fn dim(&self) -> usize {
        self.l_max + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !self.kick.is_finite() || self.kick < 0.0 {
            return Err(Error::InvalidParams(format!("kick strength must be finite and >= 0, got {}", self.kick)));
        }
        if self.tau.den <= 0 {
            return Err(Error::InvalidParams("tau denominator must be positive".into()));
        }
        if self.l_max < MIN_L_MAX {
            return Err(Error::InvalidParams(format!("l_max must be at least {MIN_L_MAX}, got {}", self.l_max)));
        }
        if self.quad_order == Some(0) {
            return Err(Error::InvalidParams("quadrature order must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_quad_order(l_max: usize) -> usize {
    MIN_QUAD_ORDER.max(l_max + QUAD_MARGIN)
}

/// `⟨l,0| e^{-iP cos θ} |l',0⟩ = (sqrt((2l+1)(2l'+1))/2) ∫₋₁¹ P_l P_l' e^{-iPx} dx`.
pub fn exact_kick_element(l: usize, lp: usize, kick: f64, quad: &QuadratureRule) -> Result<Complex64> {
    let required = l.max(lp) + QUAD_MARGIN;
    if quad.order < required {
        return Err(Error::QuadratureTooCoarse { order: quad.order, required });
    }
    let hi = l.max(lp);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in quad.nodes.iter().zip(&quad.weights) {
        let p = legendre_sequence(hi, x);
        acc += Complex64::from_polar(w * p[l] * p[lp], -kick * x);
    }
    let norm = (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt() / 2.0;
    Ok(acc * norm)
}

/// Third-order closed forms for the kick block, valid for `|l - l'| <= 3`
/// and zero beyond. Sub-diagonals use the left-neighbour formulas
/// evaluated at the row index `l`.
pub fn perturbative_kick_element(l: usize, lp: usize, kick: f64) -> Complex64 {
    let p = kick;
    let p2 = p * p;
    let p3 = p2 * p;
    let i = Complex64::i();
    let lf = l as f64;
    match lp as i64 - l as i64 {
        0 => {
            let ratio = (2.0 * lf * lf + 2.0 * lf - 1.0) / ((2.0 * lf - 1.0) * (2.0 * lf + 3.0));
            Complex64::new(1.0 - p2 / 2.0 * ratio, 0.0)
        }
        1 => {
            let root = ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)).sqrt();
            let first = -p * (lf + 1.0) / root;
            let third = p3 / 20.0
                * ((2.0 * lf + 2.0) / root
                    + lf * (2.0 * lf + 2.0) * (lf + 2.0) / ((2.0 * lf - 1.0) * (2.0 * lf + 5.0) * root));
            i * (first + third)
        }
        -1 => {
            let root = ((2.0 * lf + 1.0) * (2.0 * lf - 1.0)).sqrt();
            let first = -p * lf / root;
            let third = p3 / (20.0 * root)
                * (2.0 * lf + 2.0 * lf * (lf - 1.0) * (lf + 1.0) / ((2.0 * lf - 3.0) * (2.0 * lf + 3.0)));
            i * (first + third)
        }
        2 => {
            let v = -p2 / 2.0 * (lf + 1.0) * (lf + 2.0)
                / ((2.0 * lf + 3.0) * ((2.0 * lf + 1.0) * (2.0 * lf + 5.0)).sqrt());
            Complex64::new(v, 0.0)
        }
        -2 => {
            let v = -p2 / 2.0 * lf * (lf - 1.0)
                / ((2.0 * lf - 1.0) * ((2.0 * lf + 1.0) * (2.0 * lf - 3.0)).sqrt());
            Complex64::new(v, 0.0)
        }
        3 => {
            let v = p3 / 48.0 * (2.0 * lf + 2.0) * (2.0 * lf + 4.0) * (2.0 * lf + 6.0)
                / ((2.0 * lf + 3.0) * (2.0 * lf + 5.0) * ((2.0 * lf + 1.0) * (2.0 * lf + 7.0)).sqrt());
            i * v
        }
        -3 => {
            let v = p3 / 48.0 * (2.0 * lf) * (2.0 * lf - 2.0) * (2.0 * lf - 4.0)
                / ((2.0 * lf - 3.0) * (2.0 * lf - 1.0) * ((2.0 * lf + 1.0) * (2.0 * lf - 5.0)).sqrt());
            i * v
        }
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Large-`l` limits of the banded kick block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub alpha: Complex64,
}

pub fn large_l_coefficients(kick: f64) -> BandCoefficients {
    let p = kick;
    BandCoefficients {
        a: Complex64::new(1.0 - p * p / 4.0, 0.0),
        b: Complex64::new(0.0, -p / 2.0 + p.powi(3) / 16.0),
        c: Complex64::new(-p * p / 8.0, 0.0),
        d: Complex64::new(0.0, p.powi(3) / 48.0),
        alpha: alpha(),
    }
}

/// Dense one-kick operator, row-major, immutable once built.
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    mode: BuildMode,
    params: RotorParams,
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> BuildMode {
        self.mode
    }

    pub fn params(&self) -> &RotorParams {
        &self.params
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column_norm(&self, col: usize) -> f64 {
        (0..self.dim).map(|r| self.get(r, col).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `T ψ`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(psi.len(), self.dim, "vector length must match operator dimension");
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(psi).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Assemble `T` in the requested mode. Exact mode fails if the quadrature
/// order is below `l_max + 16`.
pub fn build_floquet(params: &RotorParams, mode: BuildMode) -> Result<FloquetMatrix> {
    params.validate()?;
    let dim = params.dim();
    let kick = match mode {
        BuildMode::Exact => exact_kick_block(params)?,
        BuildMode::Perturbative => {
            let mut block = vec![Complex64::new(0.0, 0.0); dim * dim];
            for l in 0..dim {
                for lp in l.saturating_sub(3)..(l + 4).min(dim) {
                    block[l * dim + lp] = perturbative_kick_element(l, lp, params.kick);
                }
            }
            block
        }
    };
    let mut entries = kick;
    for l in 0..dim {
        let phase = kinetic_phase(l, params.tau);
        for v in &mut entries[l * dim..(l + 1) * dim] {
            *v *= phase;
        }
    }
    Ok(FloquetMatrix { dim, entries, mode, params: params.clone() })
}

fn exact_kick_block(params: &RotorParams) -> Result<Vec<Complex64>> {
    let dim = params.dim();
    let order = params.quad_order();
    let required = params.l_max + QUAD_MARGIN;
    if order < required {
        return Err(Error::QuadratureTooCoarse { order, required });
    }
    let mut block = vec![Complex64::new(0.0, 0.0); dim * dim];
    if params.kick == 0.0 {
        for l in 0..dim {
            block[l * dim + l] = Complex64::new(1.0, 0.0);
        }
        return Ok(block);
    }
    let rule = gauss_legendre(order)?;
    // normalized Legendre values sqrt((2l+1)/2) P_l(x_q), one row per node
    let table: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| {
            legendre_sequence(params.l_max, x)
                .into_iter()
                .enumerate()
                .map(|(l, v)| v * ((2 * l + 1) as f64 / 2.0).sqrt())
                .collect()
        })
        .collect();
    let weighted: Vec<Complex64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| Complex64::from_polar(w, -params.kick * x))
        .collect();

    for l in 0..dim {
        for lp in l..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, wq) in table.iter().zip(&weighted) {
                acc += wq * (row[l] * row[lp]);
            }
            block[l * dim + lp] = acc;
            block[lp * dim + l] = acc;
        }
    }
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::wigner3j_zero;
    use proptest::prelude::*;

    /// Spherical Bessel `j_n(x)` from its power series; adequate for `x <= 3`.
    fn spherical_bessel(n: usize, x: f64) -> f64 {
        let mut double_fact = 1.0;
        for k in (1..=2 * n + 1).step_by(2) {
            double_fact *= k as f64;
        }
        let lead = x.powi(n as i32) / double_fact;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -x * x / 2.0 / (k as f64 * (2 * n + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        lead * sum
    }

    /// Plane-wave expansion route: `e^{-iPx} = Σ_L (-i)^L (2L+1) j_L(P) P_L(x)`
    /// turns the kick element into a finite sum of squared 3j symbols.
    fn kick_element_by_partial_waves(l: usize, lp: usize, kick: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for big_l in l.abs_diff(lp)..=l + lp {
            let w = wigner3j_zero(l, lp, big_l);
            if w == 0.0 {
                continue;
            }
            let phase = Complex64::i().powu(3 * big_l as u32); // (-i)^L
            acc += phase * ((2 * big_l + 1) as f64 * spherical_bessel(big_l, kick) * w * w);
        }
        acc * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn kinetic_phase_period_three_pattern() {
        let tau = TauFrac::third();
        assert!(close(kinetic_phase(0, tau), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(kinetic_phase(1, tau), alpha(), 1e-15));
        assert!(close(kinetic_phase(2, tau), Complex64::new(1.0, 0.0), 1e-15));
        for l in 0..=1000 {
            assert_eq!(kinetic_phase(l + 3, tau), kinetic_phase(l, tau));
        }
    }

    #[test]
    fn kinetic_phase_matches_float_formula_at_small_l() {
        for tau in [TauFrac::third(), TauFrac::new(2, 5).unwrap(), TauFrac::new(-1, 7).unwrap()] {
            for l in 0..40 {
                let direct = Complex64::from_polar(1.0, -tau.value() / 2.0 * (l * (l + 1)) as f64);
                assert!(close(kinetic_phase(l, tau), direct, 1e-11), "tau {tau} l {l}");
            }
        }
    }

    #[test]
    fn tau_parsing() {
        assert_eq!("1/3".parse::<TauFrac>().unwrap(), TauFrac::third());
        assert_eq!(" 2 / 7 ".parse::<TauFrac>().unwrap(), TauFrac { num: 2, den: 7 });
        assert_eq!("1".parse::<TauFrac>().unwrap(), TauFrac { num: 1, den: 1 });
        assert!("1/0".parse::<TauFrac>().is_err());
        assert!("1/-3".parse::<TauFrac>().is_err());
        assert!("x/3".parse::<TauFrac>().is_err());
        assert_eq!(TauFrac::third().to_string(), "1/3");
    }

    #[test]
    fn exact_element_examples() {
        let quad = gauss_legendre(64).unwrap();
        assert!(close(exact_kick_element(0, 0, 0.0, &quad).unwrap(), Complex64::new(1.0, 0.0), 1e-14));

        let p = 0.3_f64;
        let e01 = exact_kick_element(0, 1, p, &quad).unwrap();
        assert!(e01.re.abs() < 1e-14);
        assert!((e01.im + 0.17165).abs() < 1e-5, "{e01}");
        let third_order = Complex64::new(0.0, -p / 3f64.sqrt() + p.powi(3) / (10.0 * 3f64.sqrt()));
        assert!(close(e01, third_order, 1e-4));

        for p in [0.1, 1.0, 2.5] {
            assert!(exact_kick_element(0, 2, p, &quad).unwrap().im.abs() < 1e-14);
        }
    }

    #[test]
    fn exact_element_requires_fine_quadrature() {
        let quad = gauss_legendre(20).unwrap();
        assert!(exact_kick_element(3, 4, 0.3, &quad).is_ok());
        assert_eq!(
            exact_kick_element(3, 5, 0.3, &quad),
            Err(Error::QuadratureTooCoarse { order: 20, required: 21 })
        );
    }

    #[test]
    fn exact_element_matches_partial_wave_oracle() {
        let quad = gauss_legendre(96).unwrap();
        for &p in &[0.1, 0.3, 1.0, 3.0] {
            for l in 0..=30usize {
                for lp in l.saturating_sub(6)..=l + 6 {
                    let q = exact_kick_element(l, lp, p, &quad).unwrap();
                    let pw = kick_element_by_partial_waves(l, lp, p);
                    assert!(close(q, pw, 1e-12), "P={p} ({l},{lp}): {q} vs {pw}");
                }
            }
        }
    }

    #[test]
    fn exact_element_symmetries() {
        let quad = gauss_legendre(64).unwrap();
        for &p in &[0.3, 1.7] {
            for l in 0..12 {
                for lp in 0..12 {
                    let e = exact_kick_element(l, lp, p, &quad).unwrap();
                    assert!(close(e, exact_kick_element(lp, l, p, &quad).unwrap(), 1e-15));
                    assert!(close(e, exact_kick_element(lp, l, -p, &quad).unwrap().conj(), 1e-15));
                }
            }
        }
    }

    #[test]
    fn perturbative_element_examples() {
        for p in [0.0, 0.3, 1.0] {
            let e = perturbative_kick_element(0, 0, p);
            assert!((e.re - (1.0 - p * p / 6.0)).abs() < 1e-15 && e.im == 0.0);
        }
        assert!((perturbative_kick_element(1, 1, 0.3).re - 0.973).abs() < 1e-15);
        assert_eq!(perturbative_kick_element(6, 2, 0.7), Complex64::new(0.0, 0.0));
        assert_eq!(perturbative_kick_element(2, 6, 0.7), Complex64::new(0.0, 0.0));
        // |Δl| = 3 is the outermost band, not beyond it
        let third = perturbative_kick_element(5, 2, 0.1);
        let quad = gauss_legendre(64).unwrap();
        assert!((third - exact_kick_element(5, 2, 0.1, &quad).unwrap()).norm() < 1e-6);
        assert!(third.norm() > 1e-5);
    }

    #[test]
    fn perturbative_diagonals_are_symmetric() {
        // right-neighbour formula at l equals left-neighbour formula at l + d
        for p in [0.2, 1.3] {
            for l in 0..100 {
                for d in 1..=3 {
                    let up = perturbative_kick_element(l, l + d, p);
                    let down = perturbative_kick_element(l + d, l, p);
                    assert!(close(up, down, 1e-14), "l={l} d={d}: {up} vs {down}");
                }
            }
        }
    }

    #[test]
    fn large_l_limit() {
        let c0 = large_l_coefficients(0.0);
        assert_eq!(c0.a, Complex64::new(1.0, 0.0));
        assert_eq!(c0.b.norm() + c0.c.norm() + c0.d.norm(), 0.0);

        let c = large_l_coefficients(0.3);
        assert!((c.a.re - 0.9775).abs() < 1e-15 && (c.c.re + 0.01125).abs() < 1e-15);
        assert_eq!(c.a.im, 0.0);
        assert_eq!(c.c.im, 0.0);
        assert_eq!(c.b.re, 0.0);
        assert_eq!(c.d.re, 0.0);
        assert!((c.alpha.norm() - 1.0).abs() < 1e-15);

        let p = 0.3;
        let l = 200;
        assert!(close(perturbative_kick_element(l, l, p), c.a, 1e-5));
        assert!(close(perturbative_kick_element(l, l + 1, p), c.b, 1e-5));
        assert!(close(perturbative_kick_element(l, l - 1, p), c.b, 1e-5));
        assert!(close(perturbative_kick_element(l, l + 2, p), c.c, 1e-5));
        assert!(close(perturbative_kick_element(l, l - 3, p), c.d, 1e-5));
    }

    fn max_element_gap(p: f64) -> f64 {
        let quad = gauss_legendre(80).unwrap();
        let mut worst = 0.0_f64;
        for l in 0..=50usize {
            for lp in l.saturating_sub(3)..=l + 3 {
                let gap = (exact_kick_element(l, lp, p, &quad).unwrap() - perturbative_kick_element(l, lp, p)).norm();
                worst = worst.max(gap);
            }
        }
        worst
    }

    #[test]
    fn closed_forms_agree_to_fourth_order() {
        let at_01 = max_element_gap(0.1);
        let at_02 = max_element_gap(0.2);
        assert!(at_01 <= 0.1f64.powi(4), "{at_01}");
        let ratio = at_02 / at_01;
        assert!((10.0..=25.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn parity_of_exact_elements() {
        let quad = gauss_legendre(96).unwrap();
        for &p in &[0.1, 0.3, 1.0] {
            for l in 0..=60usize {
                for lp in 0..=60usize {
                    let e = exact_kick_element(l, lp, p, &quad).unwrap();
                    if (l + lp) % 2 == 0 {
                        assert!(e.im.abs() < 1e-12);
                    } else {
                        assert!(e.re.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn build_at_zero_kick_is_diagonal_phases() {
        for mode in [BuildMode::Exact, BuildMode::Perturbative] {
            let t = build_floquet(&RotorParams::new(0.0, 30), mode).unwrap();
            for r in 0..t.dim() {
                for c in 0..t.dim() {
                    let expect = if r == c { kinetic_phase(r, TauFrac::third()) } else { Complex64::new(0.0, 0.0) };
                    assert!(close(t.get(r, c), expect, 1e-13), "{mode} ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn exact_build_is_unitary_away_from_cutoff() {
        for p in [0.3, 1.0] {
            let t = build_floquet(&RotorParams::new(p, 150), BuildMode::Exact).unwrap();
            for c in 3..=150 - 12 {
                assert!((t.column_norm(c) - 1.0).abs() < 1e-8, "P={p} column {c}");
            }
        }
    }

    #[test]
    fn exact_build_is_banded() {
        for p in [1.0, 3.0] {
            let t = build_floquet(&RotorParams::new(p, 100), BuildMode::Exact).unwrap();
            let width = 3.0 * p + 15.0;
            for r in 0..t.dim() {
                for c in 0..t.dim() {
                    if (r as f64 - c as f64).abs() > width {
                        assert!(t.get(r, c).norm() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn perturbative_build_reproduces_banded_pattern() {
        let p = 0.3;
        let t = build_floquet(&RotorParams::new(p, 300), BuildMode::Perturbative).unwrap();
        let c = large_l_coefficients(p);
        let one = Complex64::new(1.0, 0.0);
        // rows l ≡ 1 (mod 3) carry α
        for (l, pref) in [(249, one), (250, c.alpha), (251, one)] {
            let band = [c.d, c.c, c.b, c.a, c.b, c.c, c.d];
            for (off, &expect) in band.iter().enumerate() {
                let col = l + off - 3;
                assert!(close(t.get(l, col), pref * expect, 2e-5), "row {l} col {col}: {} vs {}", t.get(l, col), pref * expect);
            }
            assert_eq!(t.get(l, l + 4), Complex64::new(0.0, 0.0));
            assert_eq!(t.get(l, l - 4), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn build_rejects_bad_configs() {
        let mut params = RotorParams::new(0.3, 150);
        params.quad_order = Some(100);
        assert_eq!(
            build_floquet(&params, BuildMode::Exact).unwrap_err(),
            Error::QuadratureTooCoarse { order: 100, required: 166 }
        );
        // the perturbative build never touches the quadrature
        assert!(build_floquet(&params, BuildMode::Perturbative).is_ok());
        assert!(build_floquet(&RotorParams::new(0.3, 8), BuildMode::Exact).is_err());
        assert!(build_floquet(&RotorParams::new(-0.1, 30), BuildMode::Exact).is_err());
        assert_eq!(RotorParams::new(0.3, 150).quad_order(), 166);
        assert_eq!(RotorParams::new(0.3, 20).quad_order(), 64);
    }

    #[test]
    fn apply_matches_entries() {
        let t = build_floquet(&RotorParams::new(0.5, 20), BuildMode::Exact).unwrap();
        let mut e3 = vec![Complex64::new(0.0, 0.0); t.dim()];
        e3[3] = Complex64::new(1.0, 0.0);
        let col = t.apply(&e3);
        for (r, v) in col.iter().enumerate() {
            assert_eq!(*v, t.get(r, 3));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn exact_matrix_is_unitary_with_parity(kick in 0.0f64..3.0) {
            let t = build_floquet(&RotorParams::new(kick, 60), BuildMode::Exact).unwrap();
            // columns within the band width of l_max leak past the cutoff
            for col in 0..=36 {
                prop_assert!((t.column_norm(col) - 1.0).abs() < 1e-8);
            }
            let tau = TauFrac::third();
            for l in 0..=40usize {
                let phase = kinetic_phase(l, tau).conj();
                for lp in 0..=40usize {
                    let k = phase * t.get(l, lp);
                    let bad = if (l + lp) % 2 == 0 { k.im } else { k.re };
                    prop_assert!(bad.abs() < 1e-12, "({l},{lp}) {k}");
                }
            }
        }
    }
}
