//! Covariant observables on the cyclic group `Z_N`.
//!
//! With the discrete topology every subset of `Z_N` is open, so approximate
//! sharpness reduces to `‖E({x})‖ = 1` for every singleton. Subsets are
//! bit masks (`bit x` set iff `x ∈ X`), which limits `N` to 12 in the
//! exhaustive sweeps.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io::MatrixRecord;
use crate::linalg::{self, CMatrix, CVector, ONE};

/// Tolerance for covariance, additivity and channel tests.
pub const GROUP_TOL: f64 = 1e-10;
/// Largest order accepted by the exhaustive subset sweeps.
pub const MAX_EXHAUSTIVE_ORDER: usize = 12;

/// `U(g) = diag(ω^{n_j g})`, `ω = e^{2πi/N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicRep {
    order: usize,
    weights: Vec<i64>,
}

impl CyclicRep {
    pub fn new(order: usize, weights: Vec<i64>) -> Result<Self> {
        if order == 0 || weights.is_empty() {
            return Err(domain("cyclic representation needs N >= 1 and at least one weight"));
        }
        Ok(Self { order, weights })
    }

    /// Weights `0, 1, …, d-1`.
    pub fn number(order: usize, dim: usize) -> Result<Self> {
        Self::new(order, (0..dim as i64).collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    fn phase(&self, weight: i64, g: i64) -> Complex64 {
        let n = self.order as i64;
        let exponent = (weight * g).rem_euclid(n);
        Complex64::from_polar(1.0, TAU * exponent as f64 / n as f64)
    }

    /// `U(g)` for any integer `g`, read mod `N`.
    pub fn unitary(&self, g: i64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.dim(),
            self.weights.iter().map(|&w| self.phase(w, g)),
        ))
    }

    /// `U(g) A U(g)†`, entrywise `ω^{(n_i - n_j) g} A_{ij}`.
    pub fn conjugate(&self, g: i64, a: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            a[(i, j)] * self.phase(self.weights[i] - self.weights[j], g)
        })
    }

    /// Group average `(1/N) Σ_g U(g) A U(g)†`.
    pub fn twirl(&self, a: &CMatrix) -> CMatrix {
        let mut total = CMatrix::zeros(self.dim(), self.dim());
        for g in 0..self.order as i64 {
            total += self.conjugate(g, a);
        }
        total / Complex64::new(self.order as f64, 0.0)
    }

    /// Random unitary commuting with every `U(g)`: block diagonal on the
    /// groups of basis vectors whose weights agree mod `N`.
    pub fn random_commutant_unitary(&self, rng: &mut impl Rng) -> CMatrix {
        let n = self.order as i64;
        let d = self.dim();
        let mut w = CMatrix::zeros(d, d);
        let mut seen = vec![false; d];
        for i in 0..d {
            if seen[i] {
                continue;
            }
            let block: Vec<usize> = (i..d)
                .filter(|&j| (self.weights[j] - self.weights[i]).rem_euclid(n) == 0)
                .collect();
            block.iter().for_each(|&j| seen[j] = true);
            let u = random_unitary(block.len(), rng);
            for (a, &ia) in block.iter().enumerate() {
                for (b, &ib) in block.iter().enumerate() {
                    w[(ia, ib)] = u[(a, b)];
                }
            }
        }
        w
    }
}

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// Unitary factor of a random complex matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_matrix(dim, dim, rng);
    let inv = linalg::inverse_sqrt(&(g.adjoint() * &g)).expect("random matrix is invertible");
    g * inv
}

/// Random positive semidefinite `d×d` matrix of the given rank.
pub fn random_psd(dim: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_matrix(dim, rank, rng);
    &g * g.adjoint()
}

/// `E({x}) = U(x) A U(x)†` with `Σ_x E({x}) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCovariantObservable {
    rep: CyclicRep,
    seed: CMatrix,
}

impl FiniteCovariantObservable {
    /// Rescales a positive semidefinite seed to `A' = S^{-1/2} A S^{-1/2}`,
    /// `S = Σ_x U(x) A U(x)†`. `S` commutes with every `U(g)`, so `A'`
    /// generates a normalized covariant POVM.
    pub fn make_covariant(rep: &CyclicRep, seed: &CMatrix) -> Result<Self> {
        let d = rep.dim();
        if seed.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: seed.nrows() });
        }
        if linalg::max_abs_diff(seed, &seed.adjoint()) > GROUP_TOL
            || linalg::min_eigenvalue(seed) < -GROUP_TOL
        {
            return Err(domain("seed is not positive semidefinite"));
        }
        let total = rep.twirl(seed) * Complex64::new(rep.order() as f64, 0.0);
        let scale = linalg::inverse_sqrt(&total)
            .filter(|_| linalg::min_eigenvalue(&total) > GROUP_TOL * linalg::max_eigenvalue(&total))
            .ok_or_else(|| domain("seed does not generate a POVM: its group sum is singular"))?;
        let seed = &scale * seed * &scale;
        Ok(Self { rep: rep.clone(), seed: (&seed + seed.adjoint()) * Complex64::new(0.5, 0.0) })
    }

    pub fn rep(&self) -> &CyclicRep {
        &self.rep
    }

    pub fn seed(&self) -> &CMatrix {
        &self.seed
    }

    /// `E({x})`.
    pub fn point(&self, x: i64) -> CMatrix {
        self.rep.conjugate(x, &self.seed)
    }

    /// `E({0}), …, E({N-1})`.
    pub fn points(&self) -> Vec<CMatrix> {
        (0..self.rep.order() as i64).map(|x| self.point(x)).collect()
    }

    /// `E(X)` for the subset encoded by `mask`.
    pub fn effect(&self, mask: u64) -> CMatrix {
        effect_of(&self.points(), mask)
    }

    /// `max_{g,x} ‖U(g) E({x}) U(g)† - E({g+x})‖`.
    pub fn covariance_residual(&self) -> f64 {
        let n = self.rep.order() as i64;
        let points = self.points();
        (0..n)
            .flat_map(|g| (0..n).map(move |x| (g, x)))
            .map(|(g, x)| {
                let moved = self.rep.conjugate(g, &points[x as usize]);
                linalg::max_abs_diff(&moved, &points[((g + x) % n) as usize])
            })
            .fold(0.0, f64::max)
    }

    /// `‖Σ_x E({x}) - I‖` entrywise.
    pub fn additivity_residual(&self) -> f64 {
        let d = self.rep.dim();
        let total = self.points().iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
        linalg::max_abs_diff(&total, &CMatrix::identity(d, d))
    }

    /// Approximately sharp in the discrete topology: `‖E({x})‖ = 1` for
    /// every singleton (all have the same norm by covariance).
    pub fn is_approximately_sharp(&self, tol: f64) -> bool {
        (linalg::max_eigenvalue(&self.seed) - 1.0).abs() <= tol
    }
}

/// `Σ_{x ∈ X} effects[x]`.
pub fn effect_of(effects: &[CMatrix], mask: u64) -> CMatrix {
    let d = effects[0].nrows();
    effects
        .iter()
        .enumerate()
        .filter(|(x, _)| mask >> x & 1 == 1)
        .fold(CMatrix::zeros(d, d), |acc, (_, e)| acc + e)
}

fn effect_norm(effects: &[CMatrix], mask: u64) -> f64 {
    linalg::max_eigenvalue(&effect_of(effects, mask))
}

fn check_exhaustive(order: usize) -> Result<()> {
    if order > MAX_EXHAUSTIVE_ORDER {
        return Err(domain(format!(
            "exhaustive subset sweep needs N <= {MAX_EXHAUSTIVE_ORDER}, got {order}"
        )));
    }
    Ok(())
}

/// Probability vector on `Z_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(domain("finite measure needs nonnegative weights"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("finite measure has total mass {total}")));
        }
        Ok(Self { weights })
    }

    pub fn dirac(x: usize, order: usize) -> Self {
        let mut weights = vec![0.0; order];
        weights[x % order] = 1.0;
        Self { weights }
    }

    pub fn uniform(order: usize) -> Self {
        Self { weights: vec![1.0 / order as f64; order] }
    }

    pub fn random(order: usize, rng: &mut impl Rng) -> Self {
        let raw: Vec<f64> = (0..order).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        Self { weights: raw.into_iter().map(|w| w / total).collect() }
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ν(y)` for `y` read mod `N`.
    pub fn at(&self, y: i64) -> f64 {
        self.weights[y.rem_euclid(self.order() as i64) as usize]
    }

    /// `ν(X - g)`.
    pub fn of_translate(&self, mask: u64, g: i64) -> f64 {
        (0..self.order() as i64).filter(|x| mask >> x & 1 == 1).map(|x| self.at(x - g)).sum()
    }

    /// Cyclic convolution `(ν ∗ μ)(x) = Σ_g ν(g) μ(x - g)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.order() != other.order() {
            return Err(Error::DimensionMismatch { expected: self.order(), found: other.order() });
        }
        let n = self.order() as i64;
        let weights = (0..n)
            .map(|x| (0..n).map(|g| self.at(g) * other.at(x - g)).sum())
            .collect();
        Ok(Self { weights })
    }

    pub fn is_dirac(&self) -> bool {
        self.weights.iter().filter(|&&w| w > 0.0).count() == 1
    }
}

/// `E_ν({x}) = Σ_g ν(x - g) E({g})`; covariant with seed
/// `Σ_g ν(g) U(-g) A U(-g)†`.
pub fn smear_finite(obs: &FiniteCovariantObservable, nu: &FiniteMeasure) -> Result<FiniteCovariantObservable> {
    if nu.order() != obs.rep.order() {
        return Err(Error::DimensionMismatch { expected: obs.rep.order(), found: nu.order() });
    }
    let d = obs.rep.dim();
    let mut seed = CMatrix::zeros(d, d);
    for g in 0..nu.order() as i64 {
        seed += obs.point(-g) * Complex64::new(nu.at(g), 0.0);
    }
    Ok(FiniteCovariantObservable { rep: obs.rep.clone(), seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    /// `‖E_ν(X)‖`.
    pub lhs: f64,
    /// `max_g ν(X - g)`.
    pub rhs: f64,
}

impl NormBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + GROUP_TOL
    }
}

/// Compares `‖E_ν(X)‖` with the bound `max_g ν(X - g)`; the bound follows
/// from `E_ν(X) = Σ_g ν(X - g) E({g})`.
pub fn norm_bound_check(obs: &FiniteCovariantObservable, nu: &FiniteMeasure, mask: u64) -> Result<NormBound> {
    let smeared = smear_finite(obs, nu)?;
    let lhs = linalg::max_eigenvalue(&smeared.effect(mask));
    let rhs = (0..nu.order() as i64).map(|g| nu.of_translate(mask, g)).fold(0.0, f64::max);
    Ok(NormBound { lhs, rhs })
}

/// `α E₁ + (1-α) E₂` by mixing seeds.
pub fn mix(
    first: &FiniteCovariantObservable,
    second: &FiniteCovariantObservable,
    alpha: f64,
) -> Result<FiniteCovariantObservable> {
    if first.rep != second.rep {
        return Err(domain("mixed observables must share the representation"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("mixing weight {alpha} outside [0, 1]")));
    }
    let seed = &first.seed * Complex64::new(alpha, 0.0) + &second.seed * Complex64::new(1.0 - alpha, 0.0);
    Ok(FiniteCovariantObservable { rep: first.rep.clone(), seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixReport {
    pub subsets: usize,
    /// `max_X (‖E(X)‖ - α‖E₁(X)‖ - (1-α)‖E₂(X)‖)`; nonpositive when the
    /// inequality holds.
    pub max_excess: f64,
    /// Subsets where `‖E(X)‖ = 1` but a component norm is below one.
    pub sharpness_violations: usize,
}

impl MixReport {
    pub fn holds(&self) -> bool {
        self.max_excess <= GROUP_TOL && self.sharpness_violations == 0
    }
}

/// Checks `‖E(X)‖ ≤ α‖E₁(X)‖ + (1-α)‖E₂(X)‖` and the implication
/// `‖E(X)‖ = 1 ⇒ ‖E₁(X)‖ = ‖E₂(X)‖ = 1` (within `1e-9`) on every subset.
pub fn mix_check(
    first: &FiniteCovariantObservable,
    second: &FiniteCovariantObservable,
    alpha: f64,
) -> Result<MixReport> {
    check_exhaustive(first.rep.order())?;
    let mixed = mix(first, second, alpha)?;
    let (pm, p1, p2) = (mixed.points(), first.points(), second.points());
    let subsets = 1u64 << first.rep.order();
    let mut report = MixReport { subsets: subsets as usize, max_excess: f64::NEG_INFINITY, sharpness_violations: 0 };
    for mask in 0..subsets {
        let (n, n1, n2) = (effect_norm(&pm, mask), effect_norm(&p1, mask), effect_norm(&p2, mask));
        report.max_excess = report.max_excess.max(n - alpha * n1 - (1.0 - alpha) * n2);
        let strictly_mixed = alpha > 0.0 && alpha < 1.0;
        if strictly_mixed && (n - 1.0).abs() <= 1e-9 && ((n1 - 1.0).abs() > 1e-9 || (n2 - 1.0).abs() > 1e-9) {
            report.sharpness_violations += 1;
        }
    }
    Ok(report)
}

/// Linear map on `d×d` matrices as a `d²×d²` matrix on column-stacked
/// vectors, `vec(Φ(X)) = S vec(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

fn vectorize(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { dim, matrix })
    }

    /// `Φ(X) = Σ K X K†`, i.e. `S = Σ conj(K) ⊗ K`.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).ok_or_else(|| domain("no Kraus operators"))?;
        if kraus.iter().any(|k| k.shape() != (dim, dim)) {
            return Err(domain("Kraus operators must be square and of equal size"));
        }
        let matrix = kraus.iter().fold(CMatrix::zeros(dim * dim, dim * dim), |acc, k| {
            acc + linalg::kron(&k.map(|z| z.conj()), k)
        });
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: CMatrix::identity(dim * dim, dim * dim) }
    }

    /// `X ↦ W X W†`.
    pub fn unitary(w: &CMatrix) -> Self {
        Self::from_kraus(std::slice::from_ref(w)).expect("square matrix")
    }

    /// `X ↦ (1-p) X + p tr(X) I/d`.
    pub fn depolarizing(dim: usize, p: f64) -> Self {
        let d2 = dim * dim;
        let mut matrix = CMatrix::identity(d2, d2) * Complex64::new(1.0 - p, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                // vec index of |i⟩⟨i| is i*dim + i
                matrix[(i * dim + i, j * dim + j)] += Complex64::new(p / dim as f64, 0.0);
            }
        }
        Self { dim, matrix }
    }

    /// Channel with `kraus_count` random Kraus operators, normalized to be
    /// trace preserving.
    pub fn random(dim: usize, kraus_count: usize, rng: &mut impl Rng) -> Self {
        let raw: Vec<CMatrix> = (0..kraus_count).map(|_| random_matrix(dim, dim, rng)).collect();
        let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, g| acc + g.adjoint() * g);
        let fix = linalg::inverse_sqrt(&total).expect("random Kraus sum is invertible");
        let kraus: Vec<CMatrix> = raw.iter().map(|g| g * &fix).collect();
        Self::from_kraus(&kraus).expect("square Kraus operators")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(x)), self.dim)
    }

    /// Heisenberg picture `Φ*`, with `tr[Φ*(A) X] = tr[A Φ(X)]`; its matrix
    /// is `S†`.
    pub fn adjoint_apply(&self, a: &CMatrix) -> CMatrix {
        unvectorize(&(self.matrix.adjoint() * vectorize(a)), self.dim)
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self { dim: self.dim, matrix: &self.matrix * &inner.matrix }
    }

    /// `C = Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(i, j)] = ONE;
                let image = self.apply(&unit);
                choi.view_mut((i * d, j * d), (d, d)).copy_from(&image);
            }
        }
        choi
    }

    pub fn is_cp(&self, tol: f64) -> bool {
        linalg::min_eigenvalue(&self.choi()) >= -tol
    }

    pub fn is_tp(&self, tol: f64) -> bool {
        let id = CMatrix::identity(self.dim, self.dim);
        linalg::max_abs_diff(&self.adjoint_apply(&id), &id) <= tol
    }

    /// `max_g ‖Φ(U(g) X U(g)†) - U(g) Φ(X) U(g)†‖` over the matrix units,
    /// i.e. the superoperator commutator norm.
    pub fn covariance_residual(&self, rep: &CyclicRep) -> f64 {
        (0..rep.order() as i64)
            .map(|g| {
                let ad = Self::unitary(&rep.unitary(g));
                linalg::max_abs_diff(&(&ad.matrix * &self.matrix), &(&self.matrix * &ad.matrix))
            })
            .fold(0.0, f64::max)
    }
}

/// `Φ̆(ρ) = (1/N) Σ_g U(g) Φ(U(g)† ρ U(g)) U(g)†`.
pub fn covariantize(rep: &CyclicRep, channel: &Superoperator) -> Result<Superoperator> {
    if channel.dim != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: channel.dim });
    }
    if !channel.is_cp(GROUP_TOL) || !channel.is_tp(GROUP_TOL) {
        return Err(domain("input is not a channel (Choi matrix or trace test failed)"));
    }
    let d2 = channel.dim * channel.dim;
    let mut total = CMatrix::zeros(d2, d2);
    for g in 0..rep.order() as i64 {
        let forward = Superoperator::unitary(&rep.unitary(g));
        let backward = Superoperator::unitary(&rep.unitary(-g));
        total += &forward.matrix * &channel.matrix * &backward.matrix;
    }
    Ok(Superoperator { dim: channel.dim, matrix: total / Complex64::new(rep.order() as f64, 0.0) })
}

/// `F({x}) = Φ*(E({x}))`.
pub fn pull_back(effects: &[CMatrix], channel: &Superoperator) -> Vec<CMatrix> {
    effects.iter().map(|e| channel.adjoint_apply(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreNormReport {
    pub subsets: usize,
    /// `max_X (‖F(X)‖ - ‖E(X)‖)`.
    pub max_excess: f64,
    /// `max_X |‖F(X)‖ - ‖E(X)‖|`.
    pub max_gap: f64,
}

impl PreNormReport {
    pub fn holds(&self) -> bool {
        self.max_excess <= GROUP_TOL
    }
}

/// Given `F = Φ* ∘ E`, checks `‖F(X)‖ ≤ ‖E(X)‖` on every subset.
pub fn pre_norm_check(e: &[CMatrix], f: &[CMatrix], channel: &Superoperator) -> Result<PreNormReport> {
    check_exhaustive(e.len())?;
    if e.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: e.len(), found: f.len() });
    }
    let expected = pull_back(e, channel);
    let mismatch = expected.iter().zip(f).map(|(a, b)| linalg::max_abs_diff(a, b)).fold(0.0, f64::max);
    if mismatch > GROUP_TOL {
        return Err(Error::Inapplicable(format!(
            "F is not the pull-back of E through the channel (deviation {mismatch:e})"
        )));
    }
    let subsets = 1u64 << e.len();
    let mut report = PreNormReport { subsets: subsets as usize, max_excess: f64::NEG_INFINITY, max_gap: 0.0 };
    for mask in 0..subsets {
        let diff = effect_norm(f, mask) - effect_norm(e, mask);
        report.max_excess = report.max_excess.max(diff);
        report.max_gap = report.max_gap.max(diff.abs());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryPreReport {
    pub forward: PreNormReport,
    pub backward: PreNormReport,
    /// Covariance residual of `W† E W`.
    pub covariance_residual: f64,
}

/// For `W` commuting with the representation, `F = W† E W` is covariant
/// and `E`, `F` are preprocessings of each other (through `Ad_W` and
/// `Ad_{W†}`), so all subset norms agree.
pub fn unitary_pre_equivalence(obs: &FiniteCovariantObservable, w: &CMatrix) -> Result<UnitaryPreReport> {
    let e = obs.points();
    let forward_channel = Superoperator::unitary(w);
    let backward_channel = Superoperator::unitary(&w.adjoint());
    let f = pull_back(&e, &forward_channel);
    let forward = pre_norm_check(&e, &f, &forward_channel)?;
    let backward = pre_norm_check(&f, &e, &backward_channel)?;
    let f_obs = FiniteCovariantObservable { rep: obs.rep.clone(), seed: f[0].clone() };
    let covariance_residual = f
        .iter()
        .enumerate()
        .map(|(x, fx)| linalg::max_abs_diff(fx, &f_obs.point(x as i64)))
        .fold(0.0, f64::max);
    Ok(UnitaryPreReport { forward, backward, covariance_residual })
}

/// Input of the scenario runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "N")]
    pub order: usize,
    pub weights: Vec<i64>,
    pub seed: MatrixRecord,
    pub nu: Vec<f64>,
    pub checks: Vec<String>,
    /// Seed for the random channels and commutant unitaries; 0 if absent.
    #[serde(default)]
    pub rng_seed: u64,
}

pub const SCENARIO_CHECKS: [&str; 8] = [
    "covariance",
    "additivity",
    "smearing",
    "norm_bound",
    "mix",
    "covariantize",
    "pre_norm",
    "unitary_pre",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub order: usize,
    pub dim: usize,
    /// In the discrete topology approximate sharpness means `‖E({x})‖ = 1`
    /// for every singleton.
    pub approximately_sharp: bool,
    pub note: String,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

/// Runs the named checks on the observable generated by the scenario seed.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport> {
    use rand::SeedableRng;
    use serde_json::json;

    let rep = CyclicRep::new(scenario.order, scenario.weights.clone())?;
    let seed = scenario.seed.to_matrix()?;
    let obs = FiniteCovariantObservable::make_covariant(&rep, &seed)?;
    let nu = FiniteMeasure::new(scenario.nu.clone())?;
    if nu.order() != rep.order() {
        return Err(Error::Input(format!(
            "field \"nu\" has {} weights but N = {}",
            nu.order(),
            rep.order()
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let d = rep.dim();
    let n = rep.order();
    let mut checks = Vec::new();
    for name in &scenario.checks {
        let (passed, details) = match name.as_str() {
            "covariance" => {
                let r = obs.covariance_residual();
                (r < GROUP_TOL, json!({ "residual": r }))
            }
            "additivity" => {
                let r = obs.additivity_residual();
                (r < GROUP_TOL, json!({ "residual": r }))
            }
            "smearing" => {
                let smeared = smear_finite(&obs, &nu)?;
                let mu = FiniteMeasure::random(n, &mut rng);
                let twice = smear_finite(&smeared, &mu)?;
                let once = smear_finite(&obs, &nu.convolve(&mu)?)?;
                let composition = linalg::max_abs_diff(twice.seed(), once.seed());
                let covariance = smeared.covariance_residual();
                (
                    composition < 1e-12 && covariance < 1e-12,
                    json!({ "covariance_residual": covariance, "composition_residual": composition }),
                )
            }
            "norm_bound" => {
                check_exhaustive(n)?;
                let mut worst: f64 = f64::NEG_INFINITY;
                let mut singleton_rhs: f64 = 0.0;
                for mask in 1..(1u64 << n) {
                    let bound = norm_bound_check(&obs, &nu, mask)?;
                    worst = worst.max(bound.lhs - bound.rhs);
                    if mask.is_power_of_two() {
                        singleton_rhs = singleton_rhs.max(bound.rhs);
                    }
                }
                let strict = nu.is_dirac() || singleton_rhs < 1.0;
                (
                    worst <= GROUP_TOL && strict,
                    json!({ "max_excess": worst, "singleton_bound": singleton_rhs, "dirac": nu.is_dirac() }),
                )
            }
            "mix" => {
                let other = FiniteCovariantObservable::make_covariant(&rep, &random_psd(d, d, &mut rng))?;
                let report = mix_check(&obs, &other, 0.5)?;
                (report.holds(), serde_json::to_value(&report)?)
            }
            "covariantize" => {
                let channel = Superoperator::random(d, 2, &mut rng);
                let averaged = covariantize(&rep, &channel)?;
                let min_choi = linalg::min_eigenvalue(&averaged.choi());
                let residual = averaged.covariance_residual(&rep);
                (
                    min_choi >= -GROUP_TOL && residual < GROUP_TOL && averaged.is_tp(GROUP_TOL),
                    json!({ "min_choi_eigenvalue": min_choi, "covariance_residual": residual }),
                )
            }
            "pre_norm" => {
                let channel = covariantize(&rep, &Superoperator::random(d, 2, &mut rng))?;
                let e = obs.points();
                let report = pre_norm_check(&e, &pull_back(&e, &channel), &channel)?;
                (report.holds(), serde_json::to_value(&report)?)
            }
            "unitary_pre" => {
                let w = rep.random_commutant_unitary(&mut rng);
                let report = unitary_pre_equivalence(&obs, &w)?;
                let passed = report.forward.max_gap <= GROUP_TOL
                    && report.backward.max_gap <= GROUP_TOL
                    && report.covariance_residual <= GROUP_TOL;
                (passed, serde_json::to_value(&report)?)
            }
            other => {
                return Err(Error::Input(format!(
                    "unknown check \"{other}\" in field \"checks\"; expected one of {}",
                    SCENARIO_CHECKS.join(", ")
                )))
            }
        };
        checks.push(CheckOutcome { name: name.clone(), passed, details });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ScenarioReport {
        order: n,
        dim: d,
        approximately_sharp: obs.is_approximately_sharp(1e-9),
        note: "discrete topology: approximate sharpness is ||E({x})|| = 1 for every singleton".into(),
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::linalg::ZERO;

    fn finite_canonical(n: usize) -> FiniteCovariantObservable {
        let rep = CyclicRep::number(n, n).unwrap();
        let seed = CMatrix::from_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
        FiniteCovariantObservable::make_covariant(&rep, &seed).unwrap()
    }

    #[test]
    fn representation_is_a_homomorphism() {
        let rep = CyclicRep::new(5, vec![0, 2, 7]).unwrap();
        assert!(linalg::max_abs_diff(&rep.unitary(0), &CMatrix::identity(3, 3)) < 1e-15);
        let product = rep.unitary(3) * rep.unitary(4);
        assert!(linalg::max_abs_diff(&product, &rep.unitary(2)) < 1e-14);
    }

    #[test]
    fn trivial_and_canonical_seeds() {
        let rep = CyclicRep::number(4, 3).unwrap();
        let seed = CMatrix::identity(3, 3) / Complex64::new(4.0, 0.0);
        let trivial = FiniteCovariantObservable::make_covariant(&rep, &seed).unwrap();
        assert!(linalg::max_abs_diff(trivial.seed(), &seed) < 1e-15);

        let canonical = finite_canonical(6);
        assert_abs_diff_eq!(linalg::max_eigenvalue(&canonical.point(2)), 1.0, epsilon = 1e-12);
        assert!(canonical.is_approximately_sharp(1e-9));
        assert!(canonical.additivity_residual() < 1e-12);
    }

    #[test]
    fn singular_seed_is_rejected() {
        let rep = CyclicRep::number(4, 2).unwrap();
        let mut seed = CMatrix::zeros(2, 2);
        seed[(0, 0)] = ONE;
        assert!(FiniteCovariantObservable::make_covariant(&rep, &seed).is_err());
        let rep = CyclicRep::new(4, vec![0, 4]).unwrap();
        let rank_one = CMatrix::from_element(2, 2, ONE);
        assert!(FiniteCovariantObservable::make_covariant(&rep, &rank_one).is_err());
    }

    #[test]
    fn smearing_examples() {
        let obs = finite_canonical(5);
        let same = smear_finite(&obs, &FiniteMeasure::dirac(0, 5)).unwrap();
        assert!(linalg::max_abs_diff(same.seed(), obs.seed()) < 1e-15);

        let shifted = smear_finite(&obs, &FiniteMeasure::dirac(2, 5)).unwrap();
        assert!(linalg::max_abs_diff(&shifted.point(3), &obs.point(1)) < 1e-14);

        let flat = smear_finite(&obs, &FiniteMeasure::uniform(5)).unwrap();
        let expected = CMatrix::identity(5, 5) / Complex64::new(5.0, 0.0);
        assert!(linalg::max_abs_diff(&flat.point(1), &expected) < 1e-15);
    }

    #[test]
    fn norm_bound_values() {
        let obs = finite_canonical(6);
        let half = FiniteMeasure::new(vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let bound = norm_bound_check(&obs, &half, 0b1).unwrap();
        assert_abs_diff_eq!(bound.rhs, 0.5, epsilon = 1e-15);
        assert!(bound.holds());
        let uniform = norm_bound_check(&obs, &FiniteMeasure::uniform(6), 0b100).unwrap();
        assert_abs_diff_eq!(uniform.rhs, 1.0 / 6.0, epsilon = 1e-15);
        let dirac = norm_bound_check(&obs, &FiniteMeasure::dirac(1, 6), 0b10).unwrap();
        assert_abs_diff_eq!(dirac.rhs, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn superoperator_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let channel = Superoperator::random(3, 2, &mut rng);
        assert!(channel.is_cp(1e-10) && channel.is_tp(1e-10));
        let rho = random_psd(3, 3, &mut rng);
        let a = random_psd(3, 2, &mut rng);
        let lhs = (channel.adjoint_apply(&a) * &rho).trace();
        let rhs = (a * channel.apply(&rho)).trace();
        assert!((lhs - rhs).norm() < 1e-12);

        let depol = Superoperator::depolarizing(3, 1.0);
        let out = depol.apply(&rho);
        let expected = CMatrix::identity(3, 3) * (rho.trace() / Complex64::new(3.0, 0.0));
        assert!(linalg::max_abs_diff(&out, &expected) < 1e-14);
        assert!(depol.is_cp(1e-12));

        // transpose is positive and trace preserving but not completely positive
        let d = 2;
        let transpose = CMatrix::from_fn(4, 4, |r, c| {
            let (ri, rj) = (r % d, r / d);
            let (ci, cj) = (c % d, c / d);
            if ri == cj && rj == ci { ONE } else { ZERO }
        });
        let transpose = Superoperator::new(2, transpose).unwrap();
        assert!(transpose.is_tp(1e-12) && !transpose.is_cp(1e-12));
        assert!(covariantize(&CyclicRep::number(3, 2).unwrap(), &transpose).is_err());
    }

    #[test]
    fn covariantize_examples() {
        let rep = CyclicRep::number(5, 3).unwrap();
        let id = covariantize(&rep, &Superoperator::identity(3)).unwrap();
        assert!(linalg::max_abs_diff(id.matrix(), Superoperator::identity(3).matrix()) < 1e-14);
        let depol = Superoperator::depolarizing(3, 0.3);
        let averaged = covariantize(&rep, &depol).unwrap();
        assert!(linalg::max_abs_diff(averaged.matrix(), depol.matrix()) < 1e-14);
    }

    #[test]
    fn mix_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = CyclicRep::number(3, 3).unwrap();
        let a = FiniteCovariantObservable::make_covariant(&rep, &random_psd(3, 3, &mut rng)).unwrap();
        let b = FiniteCovariantObservable::make_covariant(&rep, &CMatrix::from_element(3, 3, ONE)).unwrap();
        assert!(b.is_approximately_sharp(1e-9));
        assert!(linalg::max_abs_diff(mix(&a, &b, 0.0).unwrap().seed(), b.seed()) < 1e-15);
        assert!(linalg::max_abs_diff(mix(&a, &a, 0.5).unwrap().seed(), a.seed()) < 1e-15);
        assert!(mix_check(&a, &b, 0.3).unwrap().holds());
        assert!(mix(&a, &finite_canonical(4), 0.5).is_err());
        // fewer levels than outcomes: no singleton effect reaches norm one
        let rep = CyclicRep::number(6, 3).unwrap();
        let c = FiniteCovariantObservable::make_covariant(&rep, &CMatrix::from_element(3, 3, ONE)).unwrap();
        assert_abs_diff_eq!(linalg::max_eigenvalue(c.seed()), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn scenario_runs_all_checks() {
        let scenario = Scenario {
            order: 3,
            weights: vec![0, 1, 2],
            seed: MatrixRecord::from_matrix(&CMatrix::from_element(3, 3, ONE)),
            nu: vec![0.5, 0.5, 0.0],
            checks: SCENARIO_CHECKS.iter().map(|s| s.to_string()).collect(),
            rng_seed: 3,
        };
        let report = run_scenario(&scenario).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.approximately_sharp);
        let mut bad = scenario.clone();
        bad.checks = vec!["nonsense".into()];
        assert!(run_scenario(&bad).unwrap_err().to_string().contains("nonsense"));
    }
}
