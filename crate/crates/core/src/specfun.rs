//! Closed-form special functions behind the state-generated phase matrices.
//!
//! Everything here is a pure function of its arguments. Factorials and Gamma
//! values are exact double-precision products for arguments up to 150 and go
//! through a Stirling series in log space above that, so entries with indices
//! in the hundreds stay finite.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::rc::Rc;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Above this argument factorials and Gamma values are handled in log space.
const LOG_SPACE_THRESHOLD: f64 = 150.0;

/// Dense polynomial in `x`; `coefficients()[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPolynomial {
    coeffs: Vec<f64>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    pub fn monomial(power: usize, coeff: f64) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = coeff;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn add(self, rhs: Self) -> RationalPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        RationalPolynomial::new(coeffs)
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;

    fn mul(self, rhs: Self) -> RationalPolynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return RationalPolynomial::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RationalPolynomial::new(coeffs)
    }
}

/// `ln Γ(x)` for `x > 0`: shift above 20, then the Stirling series.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut product = 1.0;
    let mut y = x;
    while y < 20.0 {
        product *= y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // Bernoulli terms B_2k / (2k(2k-1) y^{2k-1}) up to k = 8
    const TERMS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let series = inv * TERMS.iter().rev().fold(0.0, |acc, t| acc * inv2 + t);
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series - product.ln()
}

pub fn ln_factorial(n: u64) -> f64 {
    if (n as f64) <= LOG_SPACE_THRESHOLD {
        factorial(n).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `n!` as a double; overflows to infinity past 170.
pub fn factorial(n: u64) -> f64 {
    if (n as f64) <= LOG_SPACE_THRESHOLD {
        (2..=n).fold(1.0, |acc, i| acc * i as f64)
    } else {
        ln_gamma(n as f64 + 1.0).exp()
    }
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
    }
}

/// Number of halves in `p` when `p` is a nonnegative integer or half-integer.
fn half_units(p: f64) -> Result<u64> {
    let twice = 2.0 * p;
    if !(p >= 0.0) || twice.fract() != 0.0 {
        return Err(domain(format!(
            "moment order {p} is not a nonnegative integer or half-integer"
        )));
    }
    Ok(twice as u64)
}

/// `∫₀^∞ x^p e^{-x} dx = Γ(p + 1)` for integer or half-integer `p ≥ 0`.
pub fn gamma_moment(p: f64) -> Result<f64> {
    let halves = half_units(p)?;
    if p > LOG_SPACE_THRESHOLD {
        return Ok(ln_gamma(p + 1.0).exp());
    }
    if halves % 2 == 0 {
        Ok(factorial(halves / 2))
    } else {
        // Γ(3/2) = √π/2, then Γ(x + 1) = x Γ(x)
        let mut value = PI.sqrt();
        let mut x = 0.5;
        while x <= p {
            value *= x;
            x += 1.0;
        }
        Ok(value)
    }
}

/// `ln Γ(p + 1)`; same domain as [`gamma_moment`] but never overflows.
pub fn ln_gamma_moment(p: f64) -> Result<f64> {
    half_units(p)?;
    if p > LOG_SPACE_THRESHOLD {
        Ok(ln_gamma(p + 1.0))
    } else {
        Ok(gamma_moment(p)?.ln())
    }
}

/// Rising factorial divided by a factorial: `(x)_r / r!`.
fn pochhammer_over_factorial(x: f64, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (x + i as f64) / (i + 1) as f64)
}

/// Associated Laguerre polynomial `L^α_k` as explicit monomial coefficients.
pub fn laguerre(alpha: u32, k: u32) -> RationalPolynomial {
    let (alpha, k) = (alpha as u64, k as u64);
    let coeffs = (0..=k)
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let magnitude = if k + alpha <= 60 && l <= 60 {
                binomial(k + alpha, k - l) / factorial(l)
            } else {
                (ln_factorial(k + alpha)
                    - ln_factorial(k - l)
                    - ln_factorial(alpha + l)
                    - ln_factorial(l))
                .exp()
            };
            sign * magnitude
        })
        .collect();
    RationalPolynomial::new(coeffs)
}

/// Evaluates `L^α_k(x)` for real `α > -1` by the three-term recurrence.
pub fn laguerre_eval(alpha: f64, k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `∫₀^∞ x^{γ-1} L^α_n(x) e^{-x} dx = Γ(γ) Γ(1+α-γ+n) / (n! Γ(1+α-γ))`.
///
/// The Gamma ratio is evaluated as the rising factorial `(1+α-γ)_n`, which
/// is the analytic continuation through the poles. When `1+α-γ` is a
/// nonpositive integer and `n` is past it, one factor is exactly zero.
pub fn laguerre_moment(gamma: f64, alpha: u32, n: u32) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(domain(format!("laguerre_moment needs gamma > 0, got {gamma}")));
    }
    let a = 1.0 + alpha as f64 - gamma;
    let ratio = pochhammer_over_factorial(a, n as usize);
    if ratio == 0.0 {
        return Ok(0.0);
    }
    Ok(ratio * ln_gamma(gamma).exp())
}

/// Same integral by expanding `L^α_n` into monomials and summing moments.
///
/// For integer `γ` every term `(-1)^l C(n+α, n-l) (γ+l-1)!/l!` is an
/// integer and the sum is carried out exactly; half-integer `γ` falls back
/// to floating-point moments.
pub fn laguerre_moment_expanded(gamma: f64, alpha: u32, n: u32) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(domain(format!("laguerre_moment needs gamma > 0, got {gamma}")));
    }
    if gamma.fract() == 0.0 && gamma + n as f64 + alpha as f64 <= 30.0 {
        let (g, a, n) = (gamma as i128, alpha as i128, n as i128);
        let binom = |top: i128, k: i128| (0..k).fold(1i128, |acc, i| acc * (top - i) / (i + 1));
        let rising = |l: i128| (0..l).fold(1i128, |acc, i| acc * (g + i));
        let base: i128 = (1..g).product();
        let total: i128 = (0..=n)
            .map(|l| {
                let sign = if l % 2 == 0 { 1 } else { -1 };
                sign * (base * rising(l) / (1..=l).product::<i128>()) * binom(n + a, n - l)
            })
            .sum();
        return Ok(total as f64);
    }
    laguerre(alpha, n)
        .coefficients()
        .iter()
        .enumerate()
        .map(|(l, c)| Ok(c * gamma_moment(gamma - 1.0 + l as f64)?))
        .sum()
}

/// Factorization `f^s_n(x) = sign · x^{half_power} · poly(x)`, where `poly`
/// already carries the `√(min!/max!)` scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FockFunction {
    pub half_power: f64,
    pub poly: RationalPolynomial,
    pub sign: i8,
}

impl FockFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.sign as f64 * x.powf(self.half_power) * self.poly.eval(x)
    }
}

/// The functions `f^s_n` whose `L²(e^{-x}dx)` Gram matrix is the phase
/// matrix generated by the number state `|s⟩`.
pub fn f_sn(s: u32, n: u32) -> FockFunction {
    let (low, high) = (s.min(n), s.max(n));
    let order = high - low;
    let log_scale = 0.5 * (ln_factorial(low as u64) - ln_factorial(high as u64));
    let poly = laguerre(order, low).scale(log_scale.exp());
    FockFunction {
        half_power: order as f64 / 2.0,
        poly,
        sign: if s > n && (s - n) % 2 == 1 { -1 } else { 1 },
    }
}

/// `c^{|s⟩}_{m,n}` by multiplying the two `f_sn` factorizations and summing
/// Gamma moments term by term.
///
/// Exact in exact arithmetic, but the alternating Laguerre coefficients
/// cancel heavily once `max(m, n)` is large compared to `s`; prefer
/// [`c_state`], which agrees with this route wherever the latter is
/// well-conditioned.
pub fn c_state_expanded(s: u32, m: u32, n: u32) -> f64 {
    let fm = f_sn(s, m);
    let fn_ = f_sn(s, n);
    let product = &fm.poly * &fn_.poly;
    let base = fm.half_power + fn_.half_power;
    let sum: f64 = product
        .coefficients()
        .iter()
        .enumerate()
        .map(|(l, c)| c * ln_gamma_moment(base + l as f64).expect("half-integer order").exp())
        .sum();
    (fm.sign * fn_.sign) as f64 * sum
}

/// Nodes and log-weights of the `count`-point Gauss rule for the weight
/// `x^γ e^{-x}` on `(0, ∞)`.
///
/// Nodes come from the Jacobi matrix eigenvalues and are then polished by
/// Newton steps on `L^γ_count`; weights use the derivative formula
/// `Γ(count+γ+1) / (count! · x · L'(x)²)` so small weights keep their
/// relative accuracy.
pub fn gauss_laguerre(gamma: f64, count: usize) -> Rc<Vec<(f64, f64)>> {
    assert!(count > 0);
    let key = ((2.0 * gamma).to_bits(), count);
    if let Some(rule) = RULE_CACHE.with(|cache| cache.borrow().get(&key).cloned()) {
        return rule;
    }
    let rule = Rc::new(compute_gauss_laguerre(gamma, count));
    RULE_CACHE.with(|cache| cache.borrow_mut().insert(key, rule.clone()));
    rule
}

type Rule = Rc<Vec<(f64, f64)>>;

thread_local! {
    static RULE_CACHE: RefCell<HashMap<(u64, usize), Rule>> =
        RefCell::new(HashMap::new());
}

fn compute_gauss_laguerre(gamma: f64, count: usize) -> Vec<(f64, f64)> {
    let jacobi = nalgebra::DMatrix::from_fn(count, count, |i, j| {
        if i == j {
            2.0 * i as f64 + gamma + 1.0
        } else if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            (k * (k + gamma)).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = nalgebra::SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);

    let ln_scale = ln_gamma(count as f64 + gamma + 1.0) - ln_factorial(count as u64);
    nodes
        .into_iter()
        .map(|mut x| {
            for _ in 0..4 {
                let value = laguerre_eval(gamma, count, x);
                let previous = laguerre_eval(gamma, count - 1, x);
                let derivative = (count as f64 * value - (count as f64 + gamma) * previous) / x;
                let step = value / derivative;
                x -= step;
                if step.abs() <= 1e-15 * x {
                    break;
                }
            }
            let value = laguerre_eval(gamma, count, x);
            let previous = laguerre_eval(gamma, count - 1, x);
            let derivative = (count as f64 * value - (count as f64 + gamma) * previous) / x;
            (x, ln_scale - x.ln() - 2.0 * derivative.abs().ln())
        })
        .collect()
}

/// Nodes and weights of the `count`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration from the Chebyshev-like initial guesses.
pub fn gauss_legendre(count: usize) -> Vec<(f64, f64)> {
    assert!(count > 0);
    let n = count as f64;
    (0..count)
        .map(|i| {
            let mut x = -(PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut derivative = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=count {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                derivative = n * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / derivative;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * derivative * derivative))
        })
        .collect()
}

/// Phase-matrix entry `c^{|s⟩}_{m,n} = ∫₀^∞ f^s_m f^s_n e^{-x} dx`.
///
/// With `α = |s-m|`, `β = |s-n|` the integrand is `x^γ e^{-x}` times the
/// polynomial `L^α_p L^β_q` (`p = min(m,s)`, `q = min(n,s)`,
/// `γ = (α+β)/2`), so a Gauss rule for that weight with
/// `⌈(p+q+1)/2⌉` nodes is exact. Unlike the expanded monomial sum, it has
/// no alternating cancellation. Structural zeros (the pole pattern of
/// `c^{|s⟩}_{0,2k}`) are detected first and returned as exact zeros.
pub fn c_state(s: u32, m: u32, n: u32) -> f64 {
    if m.min(n) == 0 && structural_zero(s, m.max(n)) {
        return 0.0;
    }
    let (p, q) = (m.min(s) as usize, n.min(s) as usize);
    let alpha = s.abs_diff(m) as f64;
    let beta = s.abs_diff(n) as f64;
    let gamma = 0.5 * (alpha + beta);

    let sign_m = if s > m && (s - m) % 2 == 1 { -1.0 } else { 1.0 };
    let sign_n = if s > n && (s - n) % 2 == 1 { -1.0 } else { 1.0 };
    let ln_norm = 0.5
        * (ln_factorial(p as u64) - ln_factorial(m.max(s) as u64) + ln_factorial(q as u64)
            - ln_factorial(n.max(s) as u64));

    let count = (p + q) / 2 + 1;
    let total: f64 = gauss_laguerre(gamma, count)
        .iter()
        .map(|&(x, ln_w)| {
            (ln_norm + ln_w).exp() * laguerre_eval(alpha, p, x) * laguerre_eval(beta, q, x)
        })
        .sum();
    sign_m * sign_n * total
}

/// `c^{|s⟩}_{0,n}` is a single Laguerre moment; its Gamma ratio has a pole
/// in the denominator exactly for even `n = 2k` with `0 < k ≤ s`.
fn structural_zero(s: u32, n: u32) -> bool {
    n > 0 && n.is_multiple_of(2) && n / 2 <= s
}

/// Closed form for `c^{|s⟩}_{0,2k}`:
/// `(-1)^{s+max(0,s-2k)} ((|s-2k|+s)/2)! Γ(k) / (√((2k)!) s! Γ((|s-2k|-s)/2))`.
/// The denominator Gamma has a pole exactly when `0 < k ≤ s`.
pub fn c_fock_0_2k(s: u32, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(domain("c_fock_0_2k needs k >= 1"));
    }
    let (s, k) = (s as i64, k as i64);
    let spread = (s - 2 * k).abs();
    let pole_arg = (spread - s) / 2;
    if pole_arg <= 0 {
        return Ok(0.0);
    }
    let exponent = s + (s - 2 * k).max(0);
    let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
    let ln_value = ln_factorial(((spread + s) / 2) as u64) + ln_factorial((k - 1) as u64)
        - 0.5 * ln_factorial((2 * k) as u64)
        - ln_factorial(s as u64)
        - ln_factorial((pole_arg - 1) as u64);
    Ok(sign * ln_value.exp())
}

/// Number-basis matrix element `⟨m|D(z)|n⟩` of the displacement operator.
pub fn displacement_element(m: u32, n: u32, z: Complex64) -> Complex64 {
    if m < n {
        return displacement_element(n, m, -z).conj();
    }
    let order = (m - n) as i32;
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return if order == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let laguerre = laguerre_eval(order as f64, n as usize, r2);
    let ln_mag = 0.5 * (ln_factorial(n as u64) - ln_factorial(m as u64))
        + 0.5 * order as f64 * r2.ln()
        - 0.5 * r2;
    Complex64::from_polar(ln_mag.exp(), order as f64 * z.arg()) * laguerre
}
