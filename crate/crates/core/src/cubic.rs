//! Roots of complex cubics.
//!
//! Cardano's formula with the larger cube-root branch, Newton polishing, and
//! a refinement step for clustered roots: a double root of `p` is a simple
//! root of `p'`, so clusters are re-solved there instead of carrying the
//! `sqrt(ε)` splitting that any direct method produces.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients `[c3, c2, c1, c0]` of `c3 E³ + c2 E² + c1 E + c0`.
pub type CubicCoeffs = [Complex64; 4];

const CLUSTER_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-10;

pub fn eval_cubic(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    ((c[0] * z + c[1]) * z + c[2]) * z + c[3]
}

fn eval_derivative(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    (c[0] * z * 3.0 + c[1] * 2.0) * z + c[2]
}

fn eval_second_derivative(c: &CubicCoeffs, z: Complex64) -> Complex64 {
    c[0] * z * 6.0 + c[1] * 2.0
}

/// Polish `z` towards a root of `f` while the step shrinks `|f|`.
fn newton<F, G>(f: F, df: G, mut z: Complex64, steps: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let mut fz = f(z);
    for _ in 0..steps {
        let d = df(z);
        if d.norm() == 0.0 || fz.norm() == 0.0 {
            break;
        }
        let next = z - fz / d;
        let f_next = f(next);
        if !(f_next.norm() < fz.norm()) {
            break;
        }
        z = next;
        fz = f_next;
    }
    z
}

/// All three roots of a cubic with `c3 != 0`.
///
/// Fails with [`Error::IllConditioned`] if some root leaves a residual
/// `|p(E)|` above `1e-10 · max|c_i|`.
pub fn solve_cubic(c: &CubicCoeffs) -> Result<[Complex64; 3]> {
    if c[0].norm() == 0.0 {
        return Err(Error::Domain("leading cubic coefficient is zero".into()));
    }
    let a = c[1] / c[0];
    let b = c[2] / c[0];
    let d = c[3] / c[0];

    // E = t - a/3 gives t³ + p t + q = 0
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + d;

    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u3_plus = -q / 2.0 + disc;
    let u3_minus = -q / 2.0 - disc;
    let u3 = if u3_plus.norm() >= u3_minus.norm() { u3_plus } else { u3_minus };

    let mut roots = if u3.norm() == 0.0 {
        [-shift; 3]
    } else {
        let u = u3.powf(1.0 / 3.0);
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut uk = u;
        for slot in &mut out {
            *slot = uk - p / (uk * 3.0) - shift;
            uk *= omega;
        }
        out
    };

    for r in &mut roots {
        *r = newton(|z| eval_cubic(c, z), |z| eval_derivative(c, z), *r, 8);
    }
    refine_clusters(c, &mut roots);

    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for r in &roots {
        let residual = eval_cubic(c, *r).norm();
        if !(residual < RESIDUAL_TOL * scale) {
            return Err(Error::IllConditioned { residual });
        }
    }
    Ok(roots)
}

fn refine_clusters(c: &CubicCoeffs, roots: &mut [Complex64; 3]) {
    let size = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let near = |x: Complex64, y: Complex64| (x - y).norm() < CLUSTER_TOL * size;

    if near(roots[0], roots[1]) && near(roots[1], roots[2]) && near(roots[0], roots[2]) {
        // triple root: the zero of p''
        let t = -c[1] / (c[0] * 3.0);
        if eval_derivative(c, t).norm() <= CLUSTER_TOL * size {
            *roots = [t; 3];
        }
        return;
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if near(roots[i], roots[j]) {
            let mean = (roots[i] + roots[j]) / 2.0;
            let t = newton(|z| eval_derivative(c, z), |z| eval_second_derivative(c, z), mean, 8);
            if (t - mean).norm() < CLUSTER_TOL * size && eval_cubic(c, t).norm() <= eval_cubic(c, mean).norm() {
                roots[i] = t;
                roots[j] = t;
            }
            return;
        }
    }
}
