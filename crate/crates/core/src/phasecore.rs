//! Truncated phase matrices.
//!
//! A [`PhaseMatrix`] of dimension `D` is the top-left `D×D` corner of the
//! infinite matrix `(c_{m,n})` that determines a phase observable through
//! `⟨m|E(X)|n⟩ = c_{m,n} ∫_X t^{m-n} dt`. Every verdict computed from it is
//! a statement about that truncation.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io::MatrixRecord;
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::measure::DiagonalState;
use crate::specfun::c_state;

pub const DEFAULT_EPS_PSD: f64 = 1e-10;
pub const DEFAULT_EPS_RANK: f64 = 1e-9;
/// Tolerance on Hermiticity and the unit diagonal.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Largest number level a diagonal state may occupy in `state_generated`.
pub const DEFAULT_STATE_CUTOFF: usize = 64;

/// Hermitian, unit-diagonal, positive semidefinite `D×D` matrix.
///
/// Only the lower triangle is stored; the upper triangle is its conjugate
/// mirror, so Hermiticity holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRecord", into = "MatrixRecord")]
pub struct PhaseMatrix {
    dim: usize,
    lower: Vec<Complex64>,
}

#[inline]
fn packed(m: usize, n: usize) -> usize {
    m * (m + 1) / 2 + n
}

impl PhaseMatrix {
    /// Builds from the lower triangle generator `f(m, n)`, `m ≥ n`. No
    /// validation; used by the closed-form constructors.
    pub(crate) fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for m in 0..dim {
            for n in 0..=m {
                lower.push(f(m, n));
            }
        }
        Self { dim, lower }
    }

    /// Validates a full matrix and stores it.
    pub fn new(matrix: &CMatrix, eps_psd: f64) -> Result<Self> {
        let report = validate(matrix, eps_psd);
        if !report.passed() {
            return Err(Error::InvalidMatrix(report.summary()));
        }
        Ok(Self::from_lower_fn(matrix.nrows(), |m, n| matrix[(m, n)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        if m >= n {
            self.lower[packed(m, n)]
        } else {
            self.lower[packed(n, m)].conj()
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |m, n| self.get(m, n))
    }

    /// Row-major entries.
    pub fn entries(&self) -> Vec<Complex64> {
        (0..self.dim)
            .flat_map(|m| (0..self.dim).map(move |n| (m, n)))
            .map(|(m, n)| self.get(m, n))
            .collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.lower.iter().all(|c| c.im.abs() <= tol)
    }

    /// Top-left `dim×dim` corner.
    pub fn truncate(&self, dim: usize) -> Result<Self> {
        if dim == 0 || dim > self.dim {
            return Err(domain(format!("cannot truncate dimension {} to {dim}", self.dim)));
        }
        Ok(Self::from_lower_fn(dim, |m, n| self.get(m, n)))
    }

    /// All-ones matrix: the canonical phase observable.
    pub fn canonical(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_lower_fn(dim, |_, _| ONE))
    }

    /// Identity matrix: the trivial observable `E(X) = μ(X) I`.
    pub fn trivial(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_lower_fn(dim, |m, n| if m == n { ONE } else { ZERO }))
    }

    /// Chess-board family: `η_{2n} = |0⟩`, `η_{2n+1} = ξ|0⟩ + √(1-|ξ|²)|1⟩`.
    pub fn chessboard(xi: Complex64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if xi.norm() > 1.0 + STRUCTURAL_TOL {
            return Err(domain(format!("chessboard parameter |xi| = {} exceeds 1", xi.norm())));
        }
        Ok(Self::from_lower_fn(dim, |m, n| match (m % 2, n % 2) {
            (0, 0) | (1, 1) => ONE,
            // ⟨η_odd, η_even⟩ = conj(ξ)
            (1, 0) => xi.conj(),
            _ => xi,
        }))
    }

    /// `c^T_{m,n} = Σ_s λ_s c^{|s⟩}_{m,n}` with the default support cutoff.
    pub fn state_generated(state: &DiagonalState, dim: usize) -> Result<Self> {
        Self::state_generated_with_cutoff(state, dim, DEFAULT_STATE_CUTOFF)
    }

    pub fn state_generated_with_cutoff(
        state: &DiagonalState,
        dim: usize,
        cutoff: usize,
    ) -> Result<Self> {
        check_dim(dim)?;
        let support = state.support();
        if support > cutoff {
            return Err(Error::Truncation { support, cutoff });
        }
        let levels: Vec<(u32, f64)> = state
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, &w)| (s as u32, w))
            .collect();
        Ok(Self::from_lower_fn(dim, |m, n| {
            let value: f64 = levels
                .iter()
                .map(|&(s, w)| w * c_state(s, m as u32, n as u32))
                .sum();
            Complex64::new(value, 0.0)
        }))
    }

    /// Gram matrix of unit vectors, `c_{m,n} = ⟨η_m, η_n⟩`. The diagonal is
    /// set to exactly one; the vectors are already unit within `1e-10`.
    pub fn from_eta(vectors: &[CVector]) -> Result<Self> {
        let eta = EtaSystem::from_vectors(vectors.to_vec())?;
        Ok(Self::from_lower_fn(vectors.len(), |m, n| if m == n { ONE } else { eta.inner(m, n) }))
    }

    /// `c = 1` on the block `m, n ≥ n0`, Kronecker delta elsewhere.
    pub fn example4(n0: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self::from_lower_fn(dim, |m, n| {
            if (m >= n0 && n >= n0) || m == n {
                ONE
            } else {
                ZERO
            }
        }))
    }

    /// Rank-2 matrix from `f₁, f₂, (f₁+f₂)/√2, (f₁+if₂)/√2, f₁, f₁, …`.
    pub fn example5(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Self::from_eta(&example5_vectors(dim))
    }

    /// Identity with a single coherence `c_{i,i+1} = z`. With `i = 0` and
    /// `i = 2` this gives two observables that are unitarily but not
    /// U-equivalent.
    pub fn single_coherence(z: Complex64, index: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if index + 1 >= dim {
            return Err(domain(format!("coherence at {index} needs dimension > {}", index + 1)));
        }
        if z.norm() > 1.0 {
            return Err(domain("coherence modulus exceeds 1"));
        }
        Ok(Self::from_lower_fn(dim, |m, n| {
            if m == n {
                ONE
            } else if m == index + 1 && n == index {
                z.conj()
            } else {
                ZERO
            }
        }))
    }

    /// `α·self + (1-α)·other`.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        same_dim(self, other)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain(format!("mixing weight {alpha} outside [0, 1]")));
        }
        Ok(Self {
            dim: self.dim,
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a * alpha + b * (1.0 - alpha))
                .collect(),
        })
    }

    /// Entrywise multiplication `c'_{m,n} = c_{m,n} · w(m - n)`, where `w` is
    /// evaluated for `k = m - n ≥ 0` and mirrored to negative `k` by
    /// Hermiticity of the result.
    pub(crate) fn hadamard_toeplitz(&self, weight: impl Fn(i64) -> Complex64) -> Self {
        Self::from_lower_fn(self.dim, |m, n| self.get(m, n) * weight(m as i64 - n as i64))
    }

    /// `c'_{m,n} = c_{m,n} x^{n-m}`: the observable translated by `x ∈ T`.
    pub fn translate(&self, x: Complex64) -> Result<Self> {
        if (x.norm() - 1.0).abs() > STRUCTURAL_TOL {
            return Err(domain(format!("translation {x} is not on the unit circle")));
        }
        Ok(self.hadamard_toeplitz(|k| x.powi(-k as i32)))
    }

    pub fn validate(&self, eps_psd: f64) -> Validation {
        validate(&self.to_matrix(), eps_psd)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.to_matrix())
    }

    pub fn rank(&self, eps_rank: f64) -> usize {
        let values = linalg::hermitian_eigenvalues(&self.to_matrix());
        let largest = values.last().copied().unwrap_or(0.0);
        values.iter().filter(|&&v| v > eps_rank * largest).count()
    }

    /// Unit vectors `η_n` in `C^r` with `⟨η_m, η_n⟩ = c_{m,n}`, from the
    /// eigendecomposition `M = VΛV†`: `η_n` is column `n` of `√Λ V†` over
    /// the eigenvalues above `eps_rank` times the largest.
    pub fn gram_factor(&self, eps_rank: f64) -> EtaSystem {
        let (values, vectors) = linalg::hermitian_eigen(&self.to_matrix());
        let largest = values.last().copied().unwrap_or(0.0);
        let kept: Vec<usize> = (0..values.len())
            .rev()
            .filter(|&i| values[i] > eps_rank * largest)
            .collect();
        let eta = (0..self.dim)
            .map(|n| {
                CVector::from_iterator(
                    kept.len(),
                    kept.iter().map(|&k| vectors[(n, k)].conj() * values[k].sqrt()),
                )
            })
            .collect();
        EtaSystem { rank: kept.len(), vectors: eta }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(domain("phase matrix dimension must be positive"));
    }
    Ok(())
}

pub(crate) fn same_dim(a: &PhaseMatrix, b: &PhaseMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(())
}

pub fn example5_vectors(count: usize) -> Vec<CVector> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let basis = [
        [ONE, ZERO],
        [ZERO, ONE],
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
    ];
    (0..count)
        .map(|n| CVector::from_row_slice(basis.get(n).unwrap_or(&basis[0])))
        .collect()
}

/// A realization of a phase matrix as a Gram matrix of unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSystem {
    rank: usize,
    vectors: Vec<CVector>,
}

impl EtaSystem {
    /// Tolerance on `‖η_n‖ = 1`.
    pub const NORM_TOL: f64 = 1e-10;

    /// Takes explicit vectors; the rank is their numerical span dimension.
    pub fn from_vectors(vectors: Vec<CVector>) -> Result<Self> {
        let ambient = vectors.first().map_or(0, |v| v.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient, found: v.len() });
            }
            if (v.norm() - 1.0).abs() > Self::NORM_TOL {
                return Err(domain(format!("eta vector {i} has norm {}", v.norm())));
            }
        }
        let stacked = CMatrix::from_fn(vectors.len(), ambient, |r, c| vectors[r][c]);
        let rank = linalg::numerical_rank(&stacked, DEFAULT_EPS_RANK);
        Ok(Self { rank, vectors })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Dimension of the space the vectors live in.
    pub fn ambient_dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    /// `⟨η_m, η_n⟩`, antilinear in the first slot.
    pub fn inner(&self, m: usize, n: usize) -> Complex64 {
        self.vectors[m].dotc(&self.vectors[n])
    }

    pub fn gram(&self) -> CMatrix {
        let n = self.vectors.len();
        CMatrix::from_fn(n, n, |i, j| self.inner(i, j))
    }
}

/// One failed condition of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { row: usize, col: usize, deviation: f64 },
    DiagonalNotUnit { index: usize, value: Complex64 },
    ModulusExceedsOne { row: usize, col: usize, modulus: f64 },
    NotPositive { min_eigenvalue: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}"),
            Violation::NotHermitian { row, col, deviation } => {
                write!(f, "entry ({row},{col}) differs from its mirror by {deviation:e}")
            }
            Violation::DiagonalNotUnit { index, value } => {
                write!(f, "diagonal entry {index} is {value}")
            }
            Violation::ModulusExceedsOne { row, col, modulus } => {
                write!(f, "entry ({row},{col}) has modulus {modulus}")
            }
            Violation::NotPositive { min_eigenvalue } => {
                write!(f, "smallest eigenvalue {min_eigenvalue:e} is negative")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub dim: usize,
    pub min_eigenvalue: Option<f64>,
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            return "valid".into();
        }
        self.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
    }
}

/// Checks Hermiticity and the unit diagonal within `1e-12`, moduli at most
/// one, and smallest eigenvalue at least `-eps_psd`. Reports the first
/// witness of each kind.
pub fn validate(matrix: &CMatrix, eps_psd: f64) -> Validation {
    let (rows, cols) = matrix.shape();
    if rows != cols || rows == 0 {
        return Validation {
            dim: rows,
            min_eigenvalue: None,
            violations: vec![Violation::NotSquare { rows, cols }],
        };
    }
    let mut violations = Vec::new();
    let mut hermitian = None;
    let mut modulus = None;
    for m in 0..rows {
        for n in 0..=m {
            let deviation = (matrix[(m, n)] - matrix[(n, m)].conj()).norm();
            if hermitian.is_none() && deviation > STRUCTURAL_TOL {
                hermitian = Some(Violation::NotHermitian { row: m, col: n, deviation });
            }
            let abs = matrix[(m, n)].norm().max(matrix[(n, m)].norm());
            if modulus.is_none() && abs > 1.0 + eps_psd {
                modulus = Some(Violation::ModulusExceedsOne { row: m, col: n, modulus: abs });
            }
        }
    }
    violations.extend(hermitian);
    if let Some(index) = (0..rows).find(|&i| (matrix[(i, i)] - ONE).norm() > STRUCTURAL_TOL) {
        violations.push(Violation::DiagonalNotUnit { index, value: matrix[(index, index)] });
    }
    violations.extend(modulus);
    let min_eigenvalue = linalg::min_eigenvalue(matrix);
    if min_eigenvalue < -eps_psd {
        violations.push(Violation::NotPositive { min_eigenvalue });
    }
    Validation { dim: rows, min_eigenvalue: Some(min_eigenvalue), violations }
}

/// Looks for unimodular `λ` with `c¹_{m,n} = λ_n conj(λ_m) c²_{m,n}`.
///
/// Moduli must agree entrywise. The phases are then propagated by BFS over
/// the graph whose edges are the entries with `|c²_{m,n}| > tol`; each
/// component's root (its smallest index) gets `λ = 1`, and every edge,
/// tree or not, is re-checked at the end. `Ok(None)` means no such `λ`
/// exists at this truncation.
#[allow(clippy::needless_range_loop)]
pub fn u_equivalent(
    first: &PhaseMatrix,
    second: &PhaseMatrix,
    tol: f64,
) -> Result<Option<Vec<Complex64>>> {
    same_dim(first, second)?;
    let dim = first.dim;
    for m in 0..dim {
        for n in 0..m {
            if (first.get(m, n).norm() - second.get(m, n).norm()).abs() > tol {
                return Ok(None);
            }
        }
    }

    let mut lambda: Vec<Option<Complex64>> = vec![None; dim];
    for root in 0..dim {
        if lambda[root].is_some() {
            continue;
        }
        lambda[root] = Some(ONE);
        let mut queue = VecDeque::from([root]);
        while let Some(m) = queue.pop_front() {
            let lm = lambda[m].expect("visited");
            for n in 0..dim {
                if n == m || lambda[n].is_some() || second.get(m, n).norm() <= tol {
                    continue;
                }
                let ratio = first.get(m, n) / second.get(m, n);
                // ratio = λ_n conj(λ_m) and |λ_m| = 1
                let ln = ratio * lm;
                lambda[n] = Some(ln / ln.norm());
                queue.push_back(n);
            }
        }
    }
    let lambda: Vec<Complex64> = lambda.into_iter().map(|l| l.expect("all visited")).collect();

    for m in 0..dim {
        for n in 0..dim {
            let predicted = lambda[n] * lambda[m].conj() * second.get(m, n);
            if (first.get(m, n) - predicted).norm() > tol {
                return Ok(None);
            }
        }
    }
    Ok(Some(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_is_all_ones_rank_one() {
        assert_eq!(PhaseMatrix::canonical(1).unwrap().entries(), vec![ONE]);
        let m = PhaseMatrix::canonical(3).unwrap();
        assert!(m.entries().iter().all(|&e| e == ONE));
        assert_eq!(m.rank(DEFAULT_EPS_RANK), 1);
        assert!(PhaseMatrix::canonical(0).is_err());
    }

    #[test]
    fn chessboard_limits() {
        let ones = PhaseMatrix::chessboard(ONE, 4).unwrap();
        assert_eq!(ones, PhaseMatrix::canonical(4).unwrap());
        let checker = PhaseMatrix::chessboard(ZERO, 4).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                let expected = if m % 2 == n % 2 { ONE } else { ZERO };
                assert_eq!(checker.get(m, n), expected);
            }
        }
        assert_eq!(PhaseMatrix::chessboard(c(0.5, 0.0), 8).unwrap().rank(DEFAULT_EPS_RANK), 2);
        assert!(PhaseMatrix::chessboard(c(0.9, 0.9), 4).is_err());
    }

    #[test]
    fn chessboard_matches_its_eta_vectors() {
        let xi = c(0.3, -0.4);
        let odd = CVector::from_row_slice(&[xi, c((1.0 - xi.norm_sqr()).sqrt(), 0.0)]);
        let even = CVector::from_row_slice(&[ONE, ZERO]);
        let vectors: Vec<CVector> =
            (0..6).map(|n| if n % 2 == 0 { even.clone() } else { odd.clone() }).collect();
        let from_eta = PhaseMatrix::from_eta(&vectors).unwrap();
        let direct = PhaseMatrix::chessboard(xi, 6).unwrap();
        assert!(linalg::max_abs_diff(&from_eta.to_matrix(), &direct.to_matrix()) < 1e-15);
    }

    #[test]
    fn state_generated_entries() {
        let vacuum = DiagonalState::number(0);
        let m = PhaseMatrix::state_generated(&vacuum, 8).unwrap();
        assert_abs_diff_eq!(m.get(0, 2).re, 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert!(m.is_real(0.0));

        let mixed = DiagonalState::new(vec![0.5, 0.5]).unwrap();
        let m = PhaseMatrix::state_generated(&mixed, 8).unwrap();
        assert_abs_diff_eq!(m.get(0, 2).re, 0.5 / 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn state_generated_support_cutoff_is_explicit() {
        let state = DiagonalState::number(10);
        let err = PhaseMatrix::state_generated_with_cutoff(&state, 8, 5).unwrap_err();
        assert!(matches!(err, Error::Truncation { support: 11, cutoff: 5 }));
    }

    #[test]
    fn from_eta_special_families() {
        let v = CVector::from_row_slice(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let repeated = PhaseMatrix::from_eta(&[v.clone(), v.clone(), v]).unwrap();
        for e in repeated.entries() {
            assert_abs_diff_eq!(e.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-15);
        }
        let basis: Vec<CVector> = (0..3)
            .map(|i| CVector::from_fn(3, |r, _| if r == i { ONE } else { ZERO }))
            .collect();
        assert_eq!(PhaseMatrix::from_eta(&basis).unwrap(), PhaseMatrix::trivial(3).unwrap());
        let bad = CVector::from_row_slice(&[c(2.0, 0.0)]);
        assert!(PhaseMatrix::from_eta(&[bad]).is_err());
    }

    #[test]
    fn example5_entries() {
        let m = PhaseMatrix::example5(8).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(m.get(0, 1), ZERO);
        assert_abs_diff_eq!(m.get(0, 2).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1, 3).im, h, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(2, 3).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(2, 3).im, 0.5, epsilon = 1e-15);
        assert_eq!(m.get(5, 7), ONE);
        assert_eq!(m.rank(DEFAULT_EPS_RANK), 2);
    }

    #[test]
    fn validate_examples() {
        assert!(PhaseMatrix::canonical(8).unwrap().validate(DEFAULT_EPS_PSD).passed());
        assert!(validate(&CMatrix::identity(4, 4), DEFAULT_EPS_PSD).passed());

        let mut bad = CMatrix::from_element(3, 3, ONE);
        bad[(0, 1)] = c(2.0, 0.0);
        bad[(1, 0)] = c(2.0, 0.0);
        let report = validate(&bad, DEFAULT_EPS_PSD);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NotPositive { .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::ModulusExceedsOne { .. })));

        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = c(0.1, 0.0);
        let report = validate(&skew, DEFAULT_EPS_PSD);
        assert!(matches!(report.violations[0], Violation::NotHermitian { row: 1, col: 0, .. }));

        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(
            validate(&rect, DEFAULT_EPS_PSD).violations[0],
            Violation::NotSquare { rows: 2, cols: 3 }
        ));
    }

    #[test]
    fn gram_factor_of_canonical_is_rank_one() {
        let eta = PhaseMatrix::canonical(6).unwrap().gram_factor(DEFAULT_EPS_RANK);
        assert_eq!(eta.rank(), 1);
        let first = eta.vectors()[0][0];
        for v in eta.vectors() {
            assert!((v[0] - first).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_examples() {
        let m = PhaseMatrix::chessboard(c(0.4, 0.2), 6).unwrap();
        assert_eq!(m.translate(ONE).unwrap(), m);
        let x = Complex64::from_polar(1.0, 0.9);
        let back = m.translate(x).unwrap().translate(x.conj()).unwrap();
        assert!(linalg::max_abs_diff(&back.to_matrix(), &m.to_matrix()) < 1e-14);

        let shifted = PhaseMatrix::canonical(5).unwrap().translate(x).unwrap();
        for mm in 0..5 {
            for n in 0..5 {
                let expected = x.powi(n as i32 - mm as i32);
                assert!((shifted.get(mm, n) - expected).norm() < 1e-14);
            }
        }
        assert!(m.translate(c(1.1, 0.0)).is_err());
    }

    #[test]
    fn u_equivalence_examples() {
        let m = PhaseMatrix::example5(6).unwrap();
        let lambda = u_equivalent(&m, &m, 1e-10).unwrap().unwrap();
        assert!(lambda.iter().all(|l| (l - ONE).norm() < 1e-12));

        let z = c(0.5, 0.0);
        let e1 = PhaseMatrix::single_coherence(z, 0, 6).unwrap();
        let e2 = PhaseMatrix::single_coherence(z, 2, 6).unwrap();
        assert!(u_equivalent(&e1, &e2, 1e-10).unwrap().is_none());

        let x = Complex64::from_polar(1.0, 0.3);
        let lambda = u_equivalent(&m.translate(x).unwrap(), &m, 1e-10).unwrap().unwrap();
        for (n, l) in lambda.iter().enumerate() {
            assert!((l - x.powi(n as i32)).norm() < 1e-10);
        }
        assert!(u_equivalent(&m, &PhaseMatrix::canonical(5).unwrap(), 1e-10).is_err());
    }

    #[test]
    fn single_coherence_pair_is_unitarily_conjugate() {
        // W swaps |0⟩ ↔ |2⟩ and |1⟩ ↔ |3⟩
        let z = c(0.5, 0.0);
        let e1 = PhaseMatrix::single_coherence(z, 0, 6).unwrap().to_matrix();
        let e2 = PhaseMatrix::single_coherence(z, 2, 6).unwrap().to_matrix();
        let perm = [2, 3, 0, 1, 4, 5];
        let w = CMatrix::from_fn(6, 6, |r, col| if perm[col] == r { ONE } else { ZERO });
        assert!(linalg::max_abs_diff(&(&w * e1 * w.adjoint()), &e2) < 1e-15);
    }
}
