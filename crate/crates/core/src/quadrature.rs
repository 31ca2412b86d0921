//! Gaussian quadrature rules for radial integrals.
//!
//! Nodes come from Sturm-sequence bisection on the Jacobi matrix, polished by
//! Newton steps on the three-term recurrence. Laguerre weights are assembled
//! in log space and folded together with `e^x x^(−a)`, so a rule integrates
//! `∫₀^∞ F(x) dx` directly for `F ≈ x^a e^(−x) · polynomial`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::ln_gamma;

/// Nodes whose unscaled log-weight falls below this are dropped; their
/// contribution is below the smallest normal double.
const LOG_WEIGHT_FLOOR: f64 = -700.0;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKey {
    Legendre(usize),
    Laguerre(usize, u64),
}

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: RuleKey, build: impl FnOnce() -> QuadratureRule) -> Arc<QuadratureRule> {
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build());
    cache().lock().unwrap().entry(key).or_insert(rule).clone()
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off_sq[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues in ascending order, by bisection.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let off_sq: Vec<f64> = off.iter().map(|b| b * b).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, &off_sq, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Legendre P_n and P_{n−1} at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss–Legendre rule on [−1, 1].
pub fn legendre(n: usize) -> Arc<QuadratureRule> {
    assert!(n >= 1, "rule needs at least one node");
    cached(RuleKey::Legendre(n), || {
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let mut nodes = tridiagonal_eigenvalues(&diag, &off);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (p, q) = legendre_pair(n, *x);
                let dp = nf * (*x * p - q) / (*x * *x - 1.0);
                if dp != 0.0 && dp.is_finite() {
                    *x -= p / dp;
                }
            }
            let (p, q) = legendre_pair(n, *x);
            let dp = nf * (*x * p - q) / (*x * *x - 1.0);
            weights.push(2.0 / ((1.0 - *x * *x) * dp * dp));
        }
        QuadratureRule { nodes, weights }
    })
}

/// Generalized Laguerre L_n^(a) and L_{n−1}^(a) at x, scaled by a common
/// factor `e^(−log_scale)` to avoid overflow.
fn laguerre_pair(n: usize, a: f64, x: f64) -> (f64, f64, f64) {
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        let m = cur.abs();
        if m > 1e150 {
            cur /= m;
            prev /= m;
            log_scale += m.ln();
        }
    }
    (cur, prev, log_scale)
}

/// `ln Σ_{j<n} p̂_j(x)²` for the orthonormal Laguerre polynomials with
/// weight `x^a e^(−x)`. Every term is positive, so the sum keeps full
/// relative precision even where the recurrence itself cancels.
fn laguerre_log_christoffel_sum(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    // ln(j!/Γ(j+a+1))
    let mut log_norm = -ln_gamma(a + 1.0);
    let mut acc = 0.0;
    let mut acc_log = f64::NEG_INFINITY;
    for j in 0..n {
        if j > 0 {
            let jf = j as f64;
            let next = if j == 1 {
                1.0 + a - x
            } else {
                ((2.0 * jf - 1.0 + a - x) * cur - (jf - 1.0 + a) * prev) / jf
            };
            prev = cur;
            cur = next;
            let m = cur.abs().max(prev.abs());
            if m > 1e150 {
                cur /= m;
                prev /= m;
                log_scale += m.ln();
            }
            log_norm += jf.ln() - (jf + a).ln();
        }
        if cur == 0.0 {
            continue;
        }
        let log_term = 2.0 * (cur.abs().ln() + log_scale) + log_norm;
        if log_term > acc_log {
            acc = acc * (acc_log - log_term).exp() + 1.0;
            acc_log = log_term;
        } else {
            acc += (log_term - acc_log).exp();
        }
    }
    acc.ln() + acc_log
}

/// Gauss–Laguerre rule for `∫₀^∞ F(x) dx` with `F ≈ x^a e^(−x) · poly`.
pub fn laguerre(n: usize, a: f64) -> Arc<QuadratureRule> {
    assert!(n >= 1, "rule needs at least one node");
    assert!(a > -1.0, "Laguerre parameter must exceed −1");
    cached(RuleKey::Laguerre(n, a.to_bits()), || {
        let nf = n as f64;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + a + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + a)).sqrt()).collect();
        let raw = tridiagonal_eigenvalues(&diag, &off);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for mut x in raw {
            for _ in 0..3 {
                let (p, q, _) = laguerre_pair(n, a, x);
                let denom = nf * p - (nf + a) * q;
                if denom != 0.0 {
                    let step = x * p / denom;
                    if step.is_finite() {
                        x -= step;
                    }
                }
            }
            let log_w = -laguerre_log_christoffel_sum(n, a, x);
            if log_w < LOG_WEIGHT_FLOOR {
                continue;
            }
            nodes.push(x);
            weights.push((log_w + x - a * x.ln()).exp());
        }
        QuadratureRule { nodes, weights }
    })
}

/// How a radial integrand decays at large r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// like `e^(−βr)`
    Exponential(f64),
    /// like `e^(−γr²)`
    Gaussian(f64),
}

/// `∫_start^∞ h(r) dr` with an `n`-node Laguerre rule matched to the decay.
pub fn radial_tail<H: Fn(f64) -> f64>(h: H, start: f64, decay: Decay, n: usize) -> f64 {
    match decay {
        Decay::Exponential(beta) => {
            let rule = laguerre(n, 0.0);
            rule.integrate(|x| h(start + x / beta)) / beta
        }
        Decay::Gaussian(gamma) if start > 0.0 => {
            // r² = start² + x/γ, dr = dx / (2γr)
            let rule = laguerre(n, 0.0);
            let s2 = start * start;
            rule.integrate(|x| {
                let r = (s2 + x / gamma).sqrt();
                h(r) / (2.0 * gamma * r)
            })
        }
        Decay::Gaussian(gamma) => {
            // r = √(x/γ), dr = dx / (2√(γx))
            let rule = laguerre(n, 0.5);
            rule.integrate(|x| {
                let r = (x / gamma).sqrt();
                h(r) / (2.0 * (gamma * x).sqrt())
            })
        }
    }
}

/// `∫_start^∞ r^m e^(−decay(r)) dr`. From the origin the Gaussian case uses
/// the substitution `x = γr²`, under which the integrand is a pure
/// `x^((m−1)/2) e^(−x)`.
pub fn power_moment(m: u32, start: f64, decay: Decay, n: usize) -> f64 {
    match decay {
        Decay::Exponential(beta) => {
            radial_tail(|r| r.powi(m as i32) * (-beta * r).exp(), start, decay, n)
        }
        Decay::Gaussian(gamma) if start > 0.0 => {
            radial_tail(|r| r.powi(m as i32) * (-gamma * r * r).exp(), start, decay, n)
        }
        Decay::Gaussian(gamma) => {
            let a = (m as f64 - 1.0) / 2.0;
            let rule = laguerre(n, a);
            rule.integrate(|x| x.powf(a) * (-x).exp()) / (2.0 * gamma.powf(a + 1.0))
        }
    }
}

/// `∫_0^b h(r) dr` by `n`-point Gauss–Legendre.
pub fn segment<H: Fn(f64) -> f64>(h: H, b: f64, n: usize) -> f64 {
    let half = 0.5 * b;
    legendre(n).integrate(|t| h(half * (t + 1.0))) * half
}
