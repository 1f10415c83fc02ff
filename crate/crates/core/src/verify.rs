//! Self-verification suite: the acceptance criteria and the module
//! invariants, each reported as PASS, FAIL or SKIP with its measurements.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{propagate, growth_exponent, WaveState};
use crate::edge::{cubic_decay_rate, edge_determinant, edge_energy, edge_quadratic_residual, EdgeSolution};
use crate::error::{Error, Result};
use crate::floquet::{
    alpha, build_floquet, default_quad_order, exact_kick_element, kinetic_phase, large_l_coefficients,
    perturbative_kick_element, BuildMode, FloquetMatrix, RotorParams, TauFrac, MIN_L_MAX, QUAD_MARGIN,
};
use crate::specfun::{gauss_legendre, legendre_sequence, triple_legendre_integral};
use crate::spectral::{
    assign_wavenumber, best_low_weight, detect_edge_state, eigendecompose, fit_decay_rate, Spectrum, DECAY_WINDOW,
};
use crate::tightbinding::{
    band_energies, characteristic_cubic, characteristic_polynomial, dispersion_gamma, gamma_of_k, perturbative_e1,
    perturbative_e2, solid_matrix, solve_cubic, Branch,
};

/// Truncation-sensitive checks are skipped below this `l_max`.
pub const MIN_VERIFY_L_MAX: usize = 60;
const STANDARD_L_MAX: usize = 150;
const BALLISTIC_L_MAX: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} {}: {}", self.status, self.id, self.title, self.detail)
    }
}

/// Overrides applied to every check that builds a Floquet matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Replaces each check's own truncation.
    pub l_max: Option<usize>,
    pub quad_order: Option<usize>,
}

impl VerifyOptions {
    /// Rejects options no check could run with.
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.l_max {
            if l < MIN_L_MAX {
                return Err(Error::InvalidParams(format!("l_max must be at least {MIN_L_MAX}, got {l}")));
            }
        }
        if let Some(q) = self.quad_order {
            let largest = self.l_max.unwrap_or(BALLISTIC_L_MAX);
            if q < largest + QUAD_MARGIN {
                return Err(Error::QuadratureTooCoarse { order: q, required: largest + QUAD_MARGIN });
            }
        }
        Ok(())
    }
}

/// Sub-measurements of one check.
#[derive(Default)]
struct Report {
    parts: Vec<String>,
    failed: bool,
    skipped: bool,
}

impl Report {
    fn check(&mut self, ok: bool, text: String) {
        if ok {
            self.parts.push(text);
        } else {
            self.failed = true;
            self.parts.push(format!("{text} (FAIL)"));
        }
    }

    fn note(&mut self, text: String) {
        self.parts.push(text);
    }

    fn skip(reason: String) -> Self {
        Self { parts: vec![reason], failed: false, skipped: true }
    }
}

type Runner = fn(&Verifier) -> Result<Report>;

pub struct Check {
    pub id: &'static str,
    pub title: &'static str,
    run: Runner,
}

struct Solved {
    matrix: FloquetMatrix,
    spectrum: Spectrum,
}

/// Runs checks and caches the decomposed matrices they share.
pub struct Verifier {
    opts: VerifyOptions,
    cache: Mutex<HashMap<(u64, usize), Arc<Solved>>>,
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Self {
        Self { opts, cache: Mutex::new(HashMap::new()) }
    }

    pub fn run(&self, check: &Check) -> CheckOutcome {
        let (status, detail) = match (check.run)(self) {
            Ok(r) if r.skipped => (Status::Skip, r.parts.join("; ")),
            Ok(r) => (if r.failed { Status::Fail } else { Status::Pass }, r.parts.join("; ")),
            Err(e) => (Status::Fail, format!("error: {e}")),
        };
        CheckOutcome { id: check.id, title: check.title, status, detail }
    }

    pub fn run_all(&self, checks: &[Check]) -> Vec<CheckOutcome> {
        checks.iter().map(|c| self.run(c)).collect()
    }

    /// The truncation to use in place of `stated`, or `None` if too small.
    fn l_max(&self, stated: usize) -> Option<usize> {
        let l = self.opts.l_max.unwrap_or(stated);
        (l >= MIN_VERIFY_L_MAX).then_some(l)
    }

    fn params(&self, kick: f64, l_max: usize) -> RotorParams {
        RotorParams { quad_order: self.opts.quad_order, ..RotorParams::new(kick, l_max) }
    }

    fn matrix(&self, kick: f64, l_max: usize) -> Result<FloquetMatrix> {
        build_floquet(&self.params(kick, l_max), BuildMode::Exact)
    }

    fn solved(&self, kick: f64, l_max: usize) -> Result<Arc<Solved>> {
        let key = (kick.to_bits(), l_max);
        if let Some(s) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(s));
        }
        let matrix = self.matrix(kick, l_max)?;
        let spectrum = eigendecompose(&matrix)?;
        let solved = Arc::new(Solved { matrix, spectrum });
        self.cache.lock().unwrap().insert(key, Arc::clone(&solved));
        Ok(solved)
    }
}

fn skip_small(v: &Verifier) -> Report {
    Report::skip(format!("l_max={} below {MIN_VERIFY_L_MAX}", v.opts.l_max.unwrap_or(0)))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Relative deviation of a fitted slope from `−rate`.
fn slope_deviation(slope: f64, rate: f64) -> f64 {
    (slope + rate).abs() / rate
}

fn band_reproduction(v: &Verifier, kick: f64, median_tol: f64, max_tol: Option<f64>, budget: Option<f64>) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let start = Instant::now();
    let solved = v.solved(kick, l_max)?;
    let s = &solved.spectrum;
    let hi = (l_max - 12) as f64;
    let mut errors = Vec::new();
    let mut flagged = 0;
    for i in 0..s.len() {
        let c = s.centroid(i);
        if !(9.0..=hi).contains(&c) {
            continue;
        }
        match assign_wavenumber(&s.eigenvectors[i]) {
            Ok(k) => errors.push(band_energies(k, kick).nearest_distance(s.eigenvalues[i])),
            Err(Error::NoDominantPeak { .. }) => flagged += 1,
            Err(e) => return Err(e),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut r = Report::default();
    if errors.is_empty() {
        r.check(false, "no bulk states with an assigned wavenumber".into());
        return Ok(r);
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let med = median(&mut errors);
    r.note(format!("l_max={l_max} bulk={} flagged={flagged}", errors.len()));
    r.check(med < median_tol, format!("median={med:.3e} < {median_tol:e}"));
    if let Some(tol) = max_tol {
        r.check(worst < tol, format!("max={worst:.3e} < {tol:e}"));
    } else {
        r.note(format!("max={worst:.3e}"));
    }
    if let Some(limit) = budget {
        r.check(elapsed < limit, format!("runtime={elapsed:.2}s < {limit}s"));
    }
    Ok(r)
}

fn edge_state(v: &Verifier, kick: f64, energy_tol: f64, slope_tol: f64, unique: bool) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let solved = v.solved(kick, l_max)?;
    let s = &solved.spectrum;
    let theory = EdgeSolution::new(kick)?;
    let mut r = Report::default();
    if unique {
        let count = (0..s.len()).filter(|&i| s.low_weight(i, 2) >= 0.8).count();
        r.check(count == 1, format!("states with weight(l<=2)>=0.8: {count} == 1"));
    }
    let found = detect_edge_state(s)?;
    let de = (found.eigenvalue - theory.energy).norm();
    r.check(de < energy_tol, format!("|E-E_edge|={de:.3e} < {energy_tol:e}"));
    let dev = slope_deviation(found.fitted_slope, theory.decay_rate);
    r.check(
        dev <= slope_tol,
        format!(
            "slope={:.4} vs -Im(k_edge)={:.4}: deviation {:.1}% <= {:.0}%",
            found.fitted_slope,
            -theory.decay_rate,
            100.0 * dev,
            100.0 * slope_tol
        ),
    );
    if let Ok(rate) = cubic_decay_rate(found.eigenvalue, kick) {
        r.note(format!("decay rate from cubic at numerical E={rate:.4}"));
    }
    Ok(r)
}

fn c1(v: &Verifier) -> Result<Report> {
    band_reproduction(v, 0.3, 1e-2, Some(2e-2), Some(60.0))
}

fn c2(v: &Verifier) -> Result<Report> {
    band_reproduction(v, 1.0, 0.1, None, None)
}

fn c3(v: &Verifier) -> Result<Report> {
    edge_state(v, 0.3, 1e-2, 0.15, true)
}

fn c4(v: &Verifier) -> Result<Report> {
    edge_state(v, 1.0, 5e-2, 0.20, false)
}

fn c5(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let mut r = Report::default();
    for kick in [2.0, 3.0] {
        let solved = v.solved(kick, l_max)?;
        let s = &solved.spectrum;
        let theory = EdgeSolution::new(kick)?;
        let (index, weight) = best_low_weight(s, 3).ok_or(Error::NoEdgeState { best_weight: 0.0 })?;
        r.check(weight >= 0.5, format!("P={kick}: weight(l<=3)={weight:.3} >= 0.5"));
        let slope = fit_decay_rate(&s.eigenvectors[index], DECAY_WINDOW.0, DECAY_WINDOW.1)?;
        let dev = slope_deviation(slope, theory.decay_rate);
        r.check(
            dev <= 0.40,
            format!("P={kick}: slope={slope:.4} vs {:.4}, deviation {:.1}% <= 40%", -theory.decay_rate, 100.0 * dev),
        );
    }
    Ok(r)
}

fn c6(_: &Verifier) -> Result<Report> {
    let mut worst = 0.0_f64;
    for kick in [0.1, 0.3, 1.0] {
        for i in 0..200 {
            let k = PI / 3.0 * i as f64 / 199.0;
            let g = dispersion_gamma(perturbative_e1(k, kick, Branch::Minus), kick)?;
            worst = worst.max((g - gamma_of_k(k)).norm());
        }
    }
    let mut r = Report::default();
    r.check(worst < 1e-12, format!("max |gamma(E1-) - 2cos3k|={worst:.3e} < 1e-12"));
    Ok(r)
}

fn c7(_: &Verifier) -> Result<Report> {
    let roots = solve_cubic(&characteristic_cubic(0.0, Complex64::new(2.0, 0.0)))?;
    let err = pairing_error(roots, [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), alpha()]);
    let mut r = Report::default();
    r.check(err < 1e-12, format!("roots vs {{1,1,alpha}}: {err:.3e} < 1e-12"));
    Ok(r)
}

/// Smallest over matchings of the largest distance between paired values.
fn pairing_error(a: [Complex64; 3], b: [Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Largest pairing error between solid-matrix eigenvalues and the band
/// formulas over a k-grid, plus the worst branch.
pub fn solid_pairing_error(kick: f64) -> Result<f64> {
    let coeffs = large_l_coefficients(kick);
    let mut worst = 0.0_f64;
    for i in 0..200 {
        let k = PI / 3.0 * i as f64 / 199.0;
        let roots = solve_cubic(&characteristic_polynomial(&solid_matrix(k, &coeffs)))?;
        let theory = [perturbative_e1(k, kick, Branch::Plus), perturbative_e1(k, kick, Branch::Minus), perturbative_e2(k, kick)];
        worst = worst.max(pairing_error(roots, theory));
    }
    Ok(worst)
}

fn c8(_: &Verifier) -> Result<Report> {
    let e1 = solid_pairing_error(0.1)?;
    let e2 = solid_pairing_error(0.2)?;
    let tol = 5.0 * 0.1f64.powi(4);
    let ratio = e2 / e1;
    let mut r = Report::default();
    r.check(e1 < tol, format!("max pairing error at P=0.1: {e1:.3e} < {tol:.1e}"));
    r.check((10.0..=25.0).contains(&ratio), format!("err(0.2)/err(0.1)={ratio:.2} in [10, 25]"));
    Ok(r)
}

/// Largest `|exact − perturbative|` over `l ≤ 50`, `|Δl| ≤ 3`.
pub fn element_agreement(kick: f64, quad_order: Option<usize>) -> Result<f64> {
    let order = quad_order.unwrap_or(0).max(default_quad_order(53));
    let quad = gauss_legendre(order)?;
    let mut worst = 0.0_f64;
    for l in 0..=50usize {
        for lp in l.saturating_sub(3)..=l + 3 {
            let d = (exact_kick_element(l, lp, kick, &quad)? - perturbative_kick_element(l, lp, kick)).norm();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn c9(v: &Verifier) -> Result<Report> {
    let err = element_agreement(0.1, v.opts.quad_order)?;
    let mut r = Report::default();
    r.check(err < 1e-4, format!("max |exact - perturbative| at P=0.1: {err:.3e} < 1e-4"));
    Ok(r)
}

fn c10(v: &Verifier) -> Result<Report> {
    let mut r = Report::default();
    match v.l_max(STANDARD_L_MAX) {
        Some(l_max) => {
            for kick in [0.1, 0.3, 1.0] {
                let t = v.matrix(kick, l_max)?;
                let worst = (3..=l_max - 12).map(|c| (t.column_norm(c) - 1.0).abs()).fold(0.0, f64::max);
                r.check(worst < 1e-8, format!("P={kick}: column norm deviation {worst:.2e} < 1e-8"));
            }
        }
        None => r.note("unitarity skipped: l_max below 60".into()),
    }
    let worst = parity_violation(v)?;
    r.check(worst < 1e-12, format!("parity violation for l,l'<=60: {worst:.2e} < 1e-12"));
    Ok(r)
}

/// Largest forbidden part of the kick elements for `l, l' ≤ 60`: the
/// imaginary part at even `Δl`, the real part at odd `Δl`.
fn parity_violation(v: &Verifier) -> Result<f64> {
    let tau = TauFrac::third();
    let mut worst = 0.0_f64;
    for kick in [0.1, 0.3, 1.0] {
        let t = v.matrix(kick, 60)?;
        for l in 0..=60 {
            let phase = kinetic_phase(l, tau).conj();
            for lp in 0..=60 {
                let k = phase * t.get(l, lp);
                let bad = if (l + lp) % 2 == 0 { k.im } else { k.re };
                worst = worst.max(bad.abs());
            }
        }
    }
    Ok(worst)
}

fn c11(_: &Verifier) -> Result<Report> {
    let mut r = Report::default();
    for kick in [0.1, 0.3, 1.0] {
        let res = edge_quadratic_residual(edge_energy(kick), kick);
        r.check(res < 1e-12, format!("P={kick}: quadratic residual {res:.3e} < 1e-12"));
    }
    let e0 = edge_energy(0.0);
    r.check((e0 - 1.0).norm() <= 4.0 * f64::EPSILON, format!("E_edge(0)={:.17}{:+.3e}i", e0.re, e0.im));
    let jump = (1..=100)
        .map(|i| (edge_energy(i as f64 / 100.0) - edge_energy((i - 1) as f64 / 100.0)).norm())
        .fold(0.0, f64::max);
    r.check(jump <= 0.05, format!("largest step over P in [0,1]: {jump:.4} <= 0.05"));
    Ok(r)
}

fn c12(v: &Verifier) -> Result<Report> {
    let (Some(l_edge), Some(l_probe)) = (v.l_max(STANDARD_L_MAX), v.l_max(BALLISTIC_L_MAX)) else {
        return Ok(skip_small(v));
    };
    let mut r = Report::default();
    for kick in [0.3, 1.0] {
        let solved = v.solved(kick, l_edge)?;
        let found = detect_edge_state(&solved.spectrum)?;
        let init = WaveState::new(solved.spectrum.eigenvectors[found.index].clone());
        let (traj, _) = propagate(&init, &solved.matrix, 100)?;
        let e = traj.energies();
        let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let rel = (hi - lo) / e[0];
        r.check(rel < 1e-6, format!("P={kick}: edge energy variation {rel:.2e} < 1e-6 over 100 kicks"));
    }
    let t = v.matrix(1.0, l_probe)?;
    let late = l_probe / 2;
    let (traj, _) = propagate(&WaveState::delta(t.dim(), 0)?, &t, late.max(40))?;
    let exponent = growth_exponent(&traj, 5, 40)?;
    r.check(
        (1.5..=2.2).contains(&exponent),
        format!("delta_0 at P=1, l_max={l_probe}: growth exponent over kicks 5-40 = {exponent:.3} in [1.5, 2.2]"),
    );
    if late > 40 {
        if let Ok(e) = growth_exponent(&traj, 40, late) {
            r.note(format!("exponent over kicks 40-{late} = {e:.3}"));
        }
    }
    Ok(r)
}

pub fn acceptance_checks() -> Vec<Check> {
    vec![
        Check { id: "1", title: "band reproduction P=0.3", run: c1 },
        Check { id: "2", title: "band reproduction P=1", run: c2 },
        Check { id: "3", title: "edge state P=0.3", run: c3 },
        Check { id: "4", title: "edge state P=1", run: c4 },
        Check { id: "5", title: "non-perturbative edge P=2,3", run: c5 },
        Check { id: "6", title: "dispersion round-trip", run: c6 },
        Check { id: "7", title: "cubic degeneracy at P=0", run: c7 },
        Check { id: "8", title: "solid matrix vs band formulas", run: c8 },
        Check { id: "9", title: "kick element agreement", run: c9 },
        Check { id: "10", title: "unitarity and parity", run: c10 },
        Check { id: "11", title: "edge closed form", run: c11 },
        Check { id: "12", title: "dynamics", run: c12 },
    ]
}

fn quadrature_rules(_: &Verifier) -> Result<Report> {
    let mut worst = 0.0_f64;
    let mut ordered = true;
    for order in (3..=317).step_by(7) {
        let q = gauss_legendre(order)?;
        worst = worst.max((q.weights.iter().sum::<f64>() - 2.0).abs());
        for i in 0..order {
            worst = worst.max((q.nodes[i] + q.nodes[order - 1 - i]).abs());
        }
        ordered &= q.nodes.windows(2).all(|w| w[0] < w[1]) && q.nodes[0] > -1.0 && q.nodes[order - 1] < 1.0;
        ordered &= q.weights.iter().all(|&w| w > 0.0);
    }
    let mut r = Report::default();
    r.check(worst < 1e-13, format!("weight sum and node symmetry error {worst:.2e} < 1e-13"));
    r.check(ordered, "nodes increasing inside (-1, 1), weights positive".into());
    Ok(r)
}

fn triple_integrals(_: &Verifier) -> Result<Report> {
    let q = gauss_legendre(64)?;
    let tables: Vec<Vec<f64>> = q.nodes.iter().map(|&x| legendre_sequence(40, x)).collect();
    let mut worst = 0.0_f64;
    for k in 0..=40 {
        for l in k..=40 {
            for m in l..=40 {
                let quad: f64 = tables.iter().zip(&q.weights).map(|(p, w)| w * p[k] * p[l] * p[m]).sum();
                worst = worst.max((triple_legendre_integral(k, l, m) - quad).abs());
            }
        }
    }
    let mut r = Report::default();
    r.check(worst < 1e-10, format!("3j product formula vs quadrature, degrees <= 40: {worst:.2e} < 1e-10"));
    Ok(r)
}

fn agreement_scaling(v: &Verifier) -> Result<Report> {
    let e1 = element_agreement(0.1, v.opts.quad_order)?;
    let e2 = element_agreement(0.2, v.opts.quad_order)?;
    let ratio = e2 / e1;
    let mut r = Report::default();
    r.check(e1 <= 1e-4, format!("max error at P=0.1: {e1:.3e} <= P^4"));
    r.check((10.0..=25.0).contains(&ratio), format!("err(0.2)/err(0.1)={ratio:.2} in [10, 25]"));
    Ok(r)
}

fn bandedness(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let mut r = Report::default();
    for kick in [1.0, 3.0] {
        let t = v.matrix(kick, l_max)?;
        let width = 3.0 * kick + 15.0;
        let mut worst = 0.0_f64;
        for l in 0..=l_max {
            for lp in 0..=l_max {
                if (l as f64 - lp as f64).abs() > width {
                    worst = worst.max(t.get(l, lp).norm());
                }
            }
        }
        r.check(worst <= 1e-10, format!("P={kick}: largest element beyond |dl|>{width}: {worst:.2e}"));
    }
    Ok(r)
}

fn kinetic_periodicity(_: &Verifier) -> Result<Report> {
    let tau = TauFrac::third();
    let worst = (0..=1000).map(|l| (kinetic_phase(l + 3, tau) - kinetic_phase(l, tau)).norm()).fold(0.0, f64::max);
    let mut r = Report::default();
    r.check(worst == 0.0, format!("max |phase(l+3) - phase(l)| for l<=1000: {worst:.1e}"));
    Ok(r)
}

fn spectrum_properties(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let mut r = Report::default();
    for kick in [0.3, 1.0] {
        let solved = v.solved(kick, l_max)?;
        let s = &solved.spectrum;
        r.check(s.len() == l_max + 1, format!("P={kick}: {} eigenvalues", s.len()));
        let res = s.residuals.iter().copied().fold(0.0, f64::max);
        r.check(res < 1e-8, format!("P={kick}: max residual {res:.2e} < 1e-8"));
        let limit = (l_max - 12) as f64;
        let modulus = (0..s.len())
            .filter(|&i| s.centroid(i) < limit)
            .map(|i| (s.eigenvalues[i].norm() - 1.0).abs())
            .fold(0.0, f64::max);
        r.check(modulus < 1e-6, format!("P={kick}: interior ||E|-1| max {modulus:.2e} < 1e-6"));
        let leak = (0..s.len())
            .map(|i| {
                let tail: f64 = s.eigenvectors[i][l_max - 11..].iter().map(|z| z.norm_sqr()).sum();
                (s.eigenvalues[i].norm() - 1.0).abs() - tail
            })
            .fold(f64::NEG_INFINITY, f64::max);
        r.check(leak <= 1e-12, format!("P={kick}: ||E|-1| within weight on the last 12 sites"));
    }
    Ok(r)
}

fn determinism(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(MIN_VERIFY_L_MAX) else { return Ok(skip_small(v)) };
    let t = v.matrix(0.3, l_max)?;
    let a = eigendecompose(&t)?;
    let b = eigendecompose(&t)?;
    let mut r = Report::default();
    r.check(
        a.eigenvalues == b.eigenvalues && a.eigenvectors == b.eigenvectors,
        "repeated decomposition identical".into(),
    );
    Ok(r)
}

fn bulk_states_extended(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let solved = v.solved(0.3, l_max)?;
    let s = &solved.spectrum;
    let lo = l_max as f64 * 0.4;
    let hi = l_max as f64 * 0.6;
    let worst = (0..s.len())
        .filter(|&i| (lo..=hi).contains(&s.centroid(i)))
        .filter_map(|i| fit_decay_rate(&s.eigenvectors[i], 9, l_max - 12).ok())
        .map(f64::abs)
        .fold(0.0, f64::max);
    let mut r = Report::default();
    r.check(worst < 0.05, format!("largest |slope| of central bulk states: {worst:.4} < 0.05"));
    Ok(r)
}

fn characteristic_match(_: &Verifier) -> Result<Report> {
    let coeffs = large_l_coefficients(0.1);
    let mut worst = 0.0_f64;
    for i in 0..50 {
        let k = PI / 3.0 * i as f64 / 49.0;
        let cp = characteristic_polynomial(&solid_matrix(k, &coeffs));
        let cubic = characteristic_cubic(0.1, Complex64::new(gamma_of_k(k), 0.0));
        for j in 0..4 {
            worst = worst.max((cp[j] - cubic[j]).norm());
        }
    }
    let mut r = Report::default();
    r.check(worst < 5e-4, format!("coefficient mismatch at P=0.1: {worst:.2e} < 5e-4"));
    Ok(r)
}

fn band_evenness(_: &Verifier) -> Result<Report> {
    let even = (0..100).all(|i| {
        let k = i as f64 * 0.013;
        band_energies(k, 0.5) == band_energies(-k, 0.5)
    });
    let mut r = Report::default();
    r.check(even, "bands identical at k and -k".into());
    Ok(r)
}

fn edge_block(_: &Verifier) -> Result<Report> {
    let det = edge_determinant(edge_energy(0.1), 0.1).norm();
    let near = (0..=100)
        .map(|i| {
            let p = i as f64 / 100.0;
            (edge_energy(p).norm() - 1.0).abs() - 0.5 * p * p
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let decays = [0.1, 0.3, 1.0, 2.0, 3.0].iter().all(|&p| EdgeSolution::new(p).map(|s| s.decay_rate > 0.0).unwrap_or(false));
    let mut r = Report::default();
    r.check(det <= 1e-4, format!("|det(T0 - E_edge)| at P=0.1: {det:.2e} <= P^4"));
    r.check(near <= 0.0, "||E_edge|-1| <= P^2/2 on [0,1]".into());
    r.check(decays, "decay rate positive for P in {0.1,0.3,1,2,3}".into());
    Ok(r)
}

fn norm_conservation(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(STANDARD_L_MAX) else { return Ok(skip_small(v)) };
    let t = v.matrix(1.0, l_max)?;
    let init = WaveState::gaussian(t.dim(), l_max as f64 / 4.0, 3.0)?;
    let (traj, _) = propagate(&init, &t, 10)?;
    let worst = traj.records.iter().map(|x| (x.norm - 1.0).abs()).fold(0.0, f64::max);
    let mut r = Report::default();
    r.check(worst < 1e-8, format!("norm drift over 10 kicks at P=1: {worst:.2e} < 1e-8"));
    Ok(r)
}

fn linearity(v: &Verifier) -> Result<Report> {
    let Some(l_max) = v.l_max(MIN_VERIFY_L_MAX) else { return Ok(skip_small(v)) };
    let t = v.matrix(0.7, l_max)?;
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-0.8, 0.5));
    let p1 = WaveState::delta(t.dim(), 3)?;
    let p2 = WaveState::gaussian(t.dim(), 20.0, 2.5)?;
    let mixed = WaveState::new(p1.amplitudes.iter().zip(&p2.amplitudes).map(|(x, y)| a * x + b * y).collect());
    let (_, f1) = propagate(&p1, &t, 8)?;
    let (_, f2) = propagate(&p2, &t, 8)?;
    let (_, fm) = propagate(&mixed, &t, 8)?;
    let worst = (0..t.dim())
        .map(|i| (fm.amplitudes[i] - (a * f1.amplitudes[i] + b * f2.amplitudes[i])).norm())
        .fold(0.0, f64::max);
    let mut r = Report::default();
    r.check(worst < 1e-10, format!("superposition error after 8 kicks: {worst:.2e} < 1e-10"));
    Ok(r)
}

pub fn invariant_checks() -> Vec<Check> {
    vec![
        Check { id: "specfun.quadrature", title: "Gauss-Legendre rules", run: quadrature_rules },
        Check { id: "specfun.triple", title: "triple Legendre integrals", run: triple_integrals },
        Check { id: "floquet.agreement", title: "element agreement and scaling", run: agreement_scaling },
        Check { id: "floquet.banded", title: "exact matrix bandedness", run: bandedness },
        Check { id: "floquet.periodic", title: "kinetic phase periodicity", run: kinetic_periodicity },
        Check { id: "spectral.spectrum", title: "completeness, residuals, unit circle", run: spectrum_properties },
        Check { id: "spectral.determinism", title: "deterministic decomposition", run: determinism },
        Check { id: "spectral.bulk", title: "bulk states extended", run: bulk_states_extended },
        Check { id: "tightbinding.charpoly", title: "solid matrix characteristic polynomial", run: characteristic_match },
        Check { id: "tightbinding.even", title: "band evenness", run: band_evenness },
        Check { id: "edge.block", title: "corner block eigenvalue and decay", run: edge_block },
        Check { id: "dynamics.norm", title: "norm conservation", run: norm_conservation },
        Check { id: "dynamics.linear", title: "linearity", run: linearity },
    ]
}

pub fn full_suite() -> Vec<Check> {
    let mut checks = acceptance_checks();
    checks.extend(invariant_checks());
    checks
}
