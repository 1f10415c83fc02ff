//! Legendre polynomials, Gauss–Legendre quadrature and zero-projection
//! Wigner 3j symbols.
//!
//! Everything here works on the integration variable `x = cos θ`, where the
//! `m = 0` spherical harmonics reduce to `sqrt((2l+1)/4π) P_l(x)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;
const LN_FACTORIAL_TABLE: usize = 4096;

/// `P_n(x)` by the upward three-term recurrence.
pub fn legendre_eval(n: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::Domain(format!("legendre argument {x} outside [-1, 1]")));
    }
    Ok(legendre_with_derivative(n, x).0)
}

/// `(P_n(x), P'_n(x))`. No domain check; the derivative uses the
/// `(1 - x²)` identity and is only valid for `|x| < 1`.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut curr = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * curr - k as f64 * prev) / (k + 1) as f64;
        prev = curr;
        curr = next;
    }
    let deriv = n as f64 * (prev - x * curr) / (1.0 - x * x);
    (curr, deriv)
}

/// Values `P_0(x) .. P_{l_max}(x)` in one recurrence pass.
pub fn legendre_sequence(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l_max + 1);
    out.push(1.0);
    if l_max == 0 {
        return out;
    }
    out.push(x);
    for k in 1..l_max {
        let next = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
        out.push(next);
    }
    out
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    /// Strictly increasing, symmetric about zero.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `∫₋₁¹ f(x) dx` for real integrands.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes are Newton-refined roots of `P_order`, starting from the usual
/// cosine guess; only the positive half is solved and mirrored so the rule
/// is exactly symmetric.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be at least 1".into()));
    }
    let n = order;
    let half = n / 2;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];

    for i in 0..half {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            deriv = dp;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp.is_finite() {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_with_derivative(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    Ok(QuadratureRule { order, nodes, weights })
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Kahan-compensated running sum of ln i.
        let mut table = Vec::with_capacity(LN_FACTORIAL_TABLE + 1);
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        table.push(0.0);
        for i in 1..=LN_FACTORIAL_TABLE {
            let y = (i as f64).ln() - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table.push(sum);
        }
        table
    })
}

/// `ln n!`, tabulated up to 4096 and continued by explicit summation.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_factorial_table();
    if n < table.len() {
        return table[n];
    }
    let mut sum = table[table.len() - 1];
    for i in table.len()..=n {
        sum += (i as f64).ln();
    }
    sum
}

/// The symbol `(k l m; 0 0 0)` with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeJZero {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    /// Half the sum `k + l + m`, rounded down.
    pub s: usize,
    pub value: f64,
}

impl ThreeJZero {
    pub fn new(k: usize, l: usize, m: usize) -> Self {
        let sum = k + l + m;
        let s = sum / 2;
        let value = if sum % 2 == 1 || !triangle(k, l, m) {
            0.0
        } else {
            let ln_root = 0.5
                * (ln_factorial(2 * s - 2 * k) + ln_factorial(2 * s - 2 * l)
                    + ln_factorial(2 * s - 2 * m)
                    - ln_factorial(2 * s + 1));
            let ln_ratio = ln_factorial(s)
                - ln_factorial(s - k)
                - ln_factorial(s - l)
                - ln_factorial(s - m);
            let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * (ln_root + ln_ratio).exp()
        };
        Self { k, l, m, s, value }
    }
}

fn triangle(k: usize, l: usize, m: usize) -> bool {
    k.abs_diff(l) <= m && m <= k + l
}

/// Closed form of `(k l m; 0 0 0)`; zero when `k + l + m` is odd or the
/// triangle condition fails.
pub fn wigner3j_zero(k: usize, l: usize, m: usize) -> f64 {
    ThreeJZero::new(k, l, m).value
}

/// `∫₋₁¹ P_k P_l P_m dx = 2 (k l m; 0 0 0)²`.
pub fn triple_legendre_integral(k: usize, l: usize, m: usize) -> f64 {
    let w = wigner3j_zero(k, l, m);
    2.0 * w * w
}
