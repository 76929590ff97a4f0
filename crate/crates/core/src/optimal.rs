//! Optimality verdicts for phase observables: approximate sharpness,
//! extremality, postprocessing and preprocessing cleanness, together with
//! smearing, the canonical channel, covariant preprocessing and recovery of
//! the generating diagonal state.
//!
//! All verdicts hold at the truncation they were computed on.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::measure::{DensityMatrix, DiagonalState};
use crate::phasecore::{same_dim, EtaSystem, PhaseMatrix};
use crate::specfun::c_state;

pub const DEFAULT_TOL_SHARP: f64 = 0.1;
pub const DEFAULT_WINDOW: usize = 16;
pub const DEFAULT_K_MAX: usize = 2;
pub const DEFAULT_TOL_EQUIV: f64 = 1e-9;
pub const DEFAULT_TOL_EXTREMAL: f64 = 1e-9;
pub const DEFAULT_TOL_RECOVERY: f64 = 1e-8;
/// Grid on which a measure's density part must be nonnegative.
const MEASURE_GRID: usize = 1024;
const MEASURE_MASS_TOL: f64 = 1e-12;
const MEASURE_DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub weight: f64,
}

/// Probability measure on the circle: Dirac atoms plus a trigonometric
/// polynomial density `p(θ) = Σ_{|k|≤K} d_k e^{ikθ}` relative to `dθ/2π`,
/// where `d_{-k} = conj(d_k)` and only `d_0..d_K` are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct CircleMeasure {
    atoms: Vec<Atom>,
    density_coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<Atom>,
    density_coeffs: Vec<Complex64>,
}

impl TryFrom<MeasureRepr> for CircleMeasure {
    type Error = Error;

    fn try_from(repr: MeasureRepr) -> Result<Self> {
        Self::new(repr.atoms, repr.density_coeffs)
    }
}

impl From<CircleMeasure> for MeasureRepr {
    fn from(nu: CircleMeasure) -> Self {
        Self { atoms: nu.atoms, density_coeffs: nu.density_coeffs }
    }
}

impl CircleMeasure {
    pub fn new(atoms: Vec<Atom>, mut density_coeffs: Vec<Complex64>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !a.angle.is_finite() || !(a.weight >= 0.0)) {
            return Err(domain(format!("atom at {} has weight {}", a.angle, a.weight)));
        }
        if let Some(d0) = density_coeffs.first() {
            if d0.im.abs() > MEASURE_MASS_TOL {
                return Err(domain("density coefficient d_0 must be real"));
            }
            density_coeffs[0].im = 0.0;
        }
        let nu = Self { atoms, density_coeffs };
        let mass = nu.fourier(0).re;
        if (mass - 1.0).abs() > MEASURE_MASS_TOL {
            return Err(domain(format!("measure has total mass {mass}")));
        }
        let lowest = nu.density_min(MEASURE_GRID);
        if lowest < -MEASURE_DENSITY_TOL {
            return Err(domain(format!("density part dips to {lowest:e}")));
        }
        Ok(nu)
    }

    /// Uniform (Haar) measure.
    pub fn haar() -> Self {
        Self { atoms: Vec::new(), density_coeffs: vec![ONE] }
    }

    /// Point mass at `e^{i angle}`.
    pub fn dirac(angle: f64) -> Self {
        Self { atoms: vec![Atom { angle, weight: 1.0 }], density_coeffs: Vec::new() }
    }

    /// Fejér kernel of the given order centred at `e^{i centre}`:
    /// `d_k = (1 - k/(order+1)) e^{-ik·centre}`, nonnegative everywhere.
    pub fn fejer(order: usize, centre: f64) -> Self {
        let density_coeffs = (0..=order)
            .map(|k| {
                let taper = 1.0 - k as f64 / (order as f64 + 1.0);
                Complex64::from_polar(taper, -(k as f64) * centre)
            })
            .collect();
        Self { atoms: Vec::new(), density_coeffs }
    }

    /// Equal point masses at the given angles.
    pub fn uniform_atoms(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() {
            return Err(domain("need at least one atom"));
        }
        let weight = 1.0 / angles.len() as f64;
        Self::new(angles.iter().map(|&angle| Atom { angle, weight }).collect(), Vec::new())
    }

    /// `Σ α_i ν_i` with weights summing to one.
    pub fn mixture(parts: &[(f64, &CircleMeasure)]) -> Result<Self> {
        let mut atoms = Vec::new();
        let len = parts.iter().map(|(_, nu)| nu.density_coeffs.len()).max().unwrap_or(0);
        let mut density_coeffs = vec![ZERO; len];
        for &(alpha, nu) in parts {
            if !(alpha >= 0.0) {
                return Err(domain(format!("mixture weight {alpha} is negative")));
            }
            atoms.extend(nu.atoms.iter().map(|a| Atom { angle: a.angle, weight: alpha * a.weight }));
            for (k, d) in nu.density_coeffs.iter().enumerate() {
                density_coeffs[k] += d * alpha;
            }
        }
        Self::new(atoms, density_coeffs)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density_coeffs(&self) -> &[Complex64] {
        &self.density_coeffs
    }

    pub fn is_dirac(&self) -> bool {
        self.atoms.len() == 1 && self.density_coeffs.iter().all(|d| d.norm() == 0.0)
    }

    fn density_coeff(&self, k: i64) -> Complex64 {
        let d = self.density_coeffs.get(k.unsigned_abs() as usize).copied().unwrap_or(ZERO);
        if k < 0 {
            d.conj()
        } else {
            d
        }
    }

    fn atom_fourier(&self, k: i64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(a.weight, -(k as f64) * a.angle))
            .sum()
    }

    /// `ν̂(k) = ∫ s^{-k} dν(s)`.
    pub fn fourier(&self, k: i64) -> Complex64 {
        self.atom_fourier(k) + self.density_coeff(k)
    }

    /// Smallest value of the density part on an equally spaced grid.
    pub fn density_min(&self, grid: usize) -> f64 {
        if self.density_coeffs.is_empty() {
            return 0.0;
        }
        (0..grid)
            .map(|j| {
                let theta = TAU * j as f64 / grid as f64;
                let tail: f64 = self
                    .density_coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, d)| (d * Complex64::from_polar(1.0, k as f64 * theta)).re)
                    .sum();
                self.density_coeffs[0].re + 2.0 * tail
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `ν ∗ μ`, whose Fourier coefficients are the products `ν̂(k) μ̂(k)`.
    pub fn convolve(&self, other: &Self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .flat_map(|a| {
                other.atoms.iter().map(move |b| Atom {
                    angle: (a.angle + b.angle).rem_euclid(TAU),
                    weight: a.weight * b.weight,
                })
            })
            .collect();
        let len = self.density_coeffs.len().max(other.density_coeffs.len());
        let density_coeffs = (0..len as i64)
            .map(|k| {
                let (da, db) = (self.density_coeff(k), other.density_coeff(k));
                self.atom_fourier(k) * db + da * other.atom_fourier(k) + da * db
            })
            .collect();
        Self { atoms, density_coeffs }
    }
}

/// `c'_{m,n} = c_{m,n} ν̂(m-n)`: the observable postprocessed by `ν`.
pub fn smear(phase: &PhaseMatrix, nu: &CircleMeasure) -> PhaseMatrix {
    phase.hadamard_toeplitz(|k| nu.fourier(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharpnessVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub truncation_dim: usize,
    pub estimated_u: Option<Complex64>,
    /// Largest `|c_{m,m+k} - u^k|` over the top window.
    pub max_tail_deviation: f64,
    /// Per-window maxima, lowest window first, top window last.
    pub trend: Vec<f64>,
    /// Half-open row ranges of the windows, in the same order.
    pub windows: Vec<(usize, usize)>,
    pub verdict: SharpnessVerdict,
}

/// Slack when comparing window maxima for monotonicity.
const TREND_SLACK: f64 = 1e-12;

/// Checks `c_{m,m+k} → u^k` on the visible tail.
///
/// `u` is the normalized first off-diagonal entry at the largest `m` where
/// it exceeds `tol` in modulus; failing that, the principal square root of
/// the normalized second off-diagonal entry. The deviations
/// `|c_{m,m+k} - u^k|`, `1 ≤ k ≤ k_max`, are maximized over three adjacent
/// windows of `window` rows ending at `D - k_max`. The verdict is
/// consistent iff the top-window maximum is below `tol` and the maxima do
/// not increase towards the top.
pub fn approx_sharp_check(
    phase: &PhaseMatrix,
    window: usize,
    k_max: usize,
    tol: f64,
) -> Result<SharpnessReport> {
    let dim = phase.dim();
    if window == 0 || k_max == 0 || 3 * window + k_max > dim {
        return Err(domain(format!(
            "sharpness check needs 3*window + k_max <= D (window {window}, k_max {k_max}, D {dim})"
        )));
    }
    let estimated_u = estimate_u(phase, tol);
    let top = dim - k_max;
    let windows: Vec<(usize, usize)> =
        (0..3).rev().map(|i| (top - (i + 1) * window, top - i * window)).collect();
    let Some(u) = estimated_u else {
        return Ok(SharpnessReport {
            truncation_dim: dim,
            estimated_u,
            max_tail_deviation: f64::INFINITY,
            trend: Vec::new(),
            windows,
            verdict: SharpnessVerdict::Inconsistent,
        });
    };
    let trend: Vec<f64> = windows
        .iter()
        .map(|&(lo, hi)| {
            (lo..hi)
                .flat_map(|m| (1..=k_max).map(move |k| (m, k)))
                .map(|(m, k)| (phase.get(m, m + k) - u.powi(k as i32)).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let max_tail_deviation = trend[2];
    let monotone = trend.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK);
    let verdict = if monotone && max_tail_deviation < tol {
        SharpnessVerdict::Consistent
    } else {
        SharpnessVerdict::Inconsistent
    };
    Ok(SharpnessReport { truncation_dim: dim, estimated_u, max_tail_deviation, trend, windows, verdict })
}

fn estimate_u(phase: &PhaseMatrix, tol: f64) -> Option<Complex64> {
    let dim = phase.dim();
    let last_above = |k: usize| {
        (0..dim.saturating_sub(k)).rev().map(|m| phase.get(m, m + k)).find(|c| c.norm() > tol)
    };
    if let Some(c) = last_above(1) {
        return Some(c / c.norm());
    }
    last_above(2).map(|c| (c / c.norm()).sqrt())
}

/// Span test for extremality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub truncation_dim: usize,
    pub rank: usize,
    /// Dimension of the span of `η_n η_n†`.
    pub span_rank: usize,
    pub extremal: bool,
    /// An operator `B ≠ 0` with `⟨η_n|B|η_n⟩ = 0` for all `n`, when the
    /// span is not full. Row-major `r×r`.
    pub witness: Option<Vec<Complex64>>,
}

/// Extremal at truncation iff the projectors `η_n η_n†` span all `r×r`
/// matrices, i.e. the `D×r²` matrix of their flattenings has rank `r²`.
pub fn extremal_check(eta: &EtaSystem, tol: f64) -> ExtremalityReport {
    let r = eta.ambient_dim();
    let rows = eta.len();
    if eta.rank() <= 1 {
        return ExtremalityReport {
            truncation_dim: rows,
            rank: eta.rank(),
            span_rank: eta.rank(),
            extremal: true,
            witness: None,
        };
    }
    // column index i*r + j holds (η η†)_{i,j} = η_i conj(η_j)
    let flat = CMatrix::from_fn(rows, r * r, |n, col| {
        let v = &eta.vectors()[n];
        v[col / r] * v[col % r].conj()
    });
    let span_rank = linalg::numerical_rank(&flat, tol);
    let extremal = span_rank == r * r;
    let witness = (!extremal).then(|| {
        let null = linalg::row_space_complement(&flat, tol);
        // Σ_{ij} (ηη†)_{ij} w_{ij} = 0 means tr[B ηη†] = 0 for B_{j,i} = w_{ij}
        let w = null.column(0);
        (0..r * r).map(|idx| w[(idx % r) * r + idx / r]).collect()
    });
    ExtremalityReport { truncation_dim: rows, rank: eta.rank(), span_rank, extremal, witness }
}

/// `tr[B η_n η_n†] = ⟨η_n|B|η_n⟩` for a row-major operator.
pub fn witness_pairing(eta: &EtaSystem, witness: &[Complex64]) -> Vec<Complex64> {
    let r = eta.ambient_dim();
    let b = CMatrix::from_row_slice(r, r, witness);
    eta.vectors().iter().map(|v| v.dotc(&(&b * v))).collect()
}

/// Non-extremality certificate for real phase matrices of rank above one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealCertificate {
    pub pair: (usize, usize),
    /// `B = |η_m⟩⟨η_n| - |η_n⟩⟨η_m|`, row-major.
    pub operator: Vec<Complex64>,
    /// `max_j |tr[B η_j η_j†]|`.
    pub max_pairing: f64,
    pub operator_norm: f64,
}

/// For a real matrix of rank above one, `B = |η_m⟩⟨η_n| - |η_n⟩⟨η_m|` at the
/// first linearly independent pair is a nonzero operator annihilated by
/// every `η_j η_j†`. Returns `None` if the matrix is not real, has rank one,
/// or the pairing exceeds `tol`.
pub fn real_nonextremal_shortcut(
    phase: &PhaseMatrix,
    eps_rank: f64,
    tol: f64,
) -> Option<RealCertificate> {
    if !phase.is_real(1e-12) {
        return None;
    }
    let eta = phase.gram_factor(eps_rank);
    if eta.rank() <= 1 {
        return None;
    }
    let dim = phase.dim();
    let pair = (0..dim)
        .flat_map(|m| (m + 1..dim).map(move |n| (m, n)))
        .find(|&(m, n)| phase.get(m, n).norm() < 1.0 - tol.max(1e-6))?;
    let (vm, vn) = (&eta.vectors()[pair.0], &eta.vectors()[pair.1]);
    let b = vm * vn.adjoint() - vn * vm.adjoint();
    let operator: Vec<Complex64> = b.transpose().iter().copied().collect();
    let max_pairing = witness_pairing(&eta, &operator).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let certificate = RealCertificate { pair, operator, max_pairing, operator_norm: b.norm() };
    (max_pairing <= tol && certificate.operator_norm > tol).then_some(certificate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    /// Deepest level allowed.
    pub depth: usize,
    /// λ_0, λ_1, … as computed up to the level where unit mass was reached,
    /// before clamping.
    pub raw_weights: Vec<f64>,
    pub state: DiagonalState,
    /// Largest entrywise deviation of the regenerated matrix from the input.
    pub residual: f64,
}

/// Default recovery depth: the largest `S` with `2(S+1) < D`, so that every
/// entry the recursion reads lies inside the truncation.
pub fn default_recovery_depth(dim: usize) -> Option<usize> {
    (dim.saturating_sub(1) / 2).checked_sub(1)
}

/// Recovers `λ` from the even entries of row 0 through
/// `c_{0,2(k+1)} = Σ_{s≤k} λ_s c^{|s⟩}_{0,2(k+1)}`, then regenerates the
/// matrix and compares it with the input.
///
/// The pivots `c^{|k⟩}_{0,2(k+1)}` shrink like `2^{-k}`, so rounding noise is
/// amplified level by level. The recursion therefore stops as soon as the
/// recovered weights sum to one within `tol`: nonnegative weights with unit
/// mass leave nothing for higher levels. `depth` is the deepest level
/// tried.
///
/// Rejects (`NotStateGenerated`) when some `λ_k` leaves `[-tol, 1 + tol]`,
/// when unit mass is not reached by `depth`, or when the regenerated matrix
/// deviates by more than `tol`.
pub fn recover_state(phase: &PhaseMatrix, depth: usize, tol: f64) -> Result<Recovery> {
    let dim = phase.dim();
    if 2 * (depth + 1) >= dim {
        return Err(domain(format!("recovery depth {depth} needs dimension above {}", 2 * (depth + 1))));
    }
    let mut raw_weights: Vec<f64> = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let target = phase.get(0, 2 * (k + 1));
        if target.im.abs() > tol {
            return Err(Error::NotStateGenerated(format!(
                "entry (0, {}) is not real: {target}",
                2 * (k + 1)
            )));
        }
        let n = 2 * (k as u32 + 1);
        let known: f64 = raw_weights.iter().enumerate().map(|(s, l)| l * c_state(s as u32, 0, n)).sum();
        let lambda = (target.re - known) / c_state(k as u32, 0, n);
        if lambda < -tol || lambda > 1.0 + tol {
            return Err(Error::NotStateGenerated(format!(
                "weight of level {k} would be {lambda}"
            )));
        }
        raw_weights.push(lambda);
        if (raw_weights.iter().sum::<f64>() - 1.0).abs() <= tol {
            break;
        }
    }
    let mass: f64 = raw_weights.iter().sum();
    if (mass - 1.0).abs() > tol {
        return Err(Error::NotStateGenerated(format!(
            "recovered weights sum to {mass} at depth {depth}"
        )));
    }
    let state = DiagonalState::normalized(raw_weights.iter().map(|l| l.max(0.0)).collect())?;
    let regenerated = PhaseMatrix::state_generated_with_cutoff(&state, dim, raw_weights.len())?;
    let residual = linalg::max_abs_diff(&regenerated.to_matrix(), &phase.to_matrix());
    if residual > tol {
        return Err(Error::NotStateGenerated(format!(
            "regenerated matrix deviates by {residual:e}"
        )));
    }
    Ok(Recovery { depth, raw_weights, state, residual })
}

/// Looks for `x ∈ T` with `c²_{m,n} = c¹_{m,n} x^{n-m}`, i.e. the second
/// observable is the first translated by `x`.
///
/// Both inputs must pass the sharpness check first, otherwise the answer is
/// `Inapplicable`. Candidates are the `k`-th roots of the ratio at the first
/// off-diagonal entry (lowest `k`, then lowest row) where both moduli
/// exceed `tol`; each candidate is verified on every entry.
pub fn post_equiv_class(
    first: &PhaseMatrix,
    second: &PhaseMatrix,
    sharpness: (usize, usize, f64),
    tol: f64,
) -> Result<Option<Complex64>> {
    same_dim(first, second)?;
    let (window, k_max, tol_sharp) = sharpness;
    for (name, m) in [("first", first), ("second", second)] {
        let report = approx_sharp_check(m, window, k_max, tol_sharp)?;
        if report.verdict != SharpnessVerdict::Consistent {
            return Err(Error::Inapplicable(format!(
                "{name} observable is not consistent with approximate sharpness at D = {}",
                m.dim()
            )));
        }
    }
    let dim = first.dim();
    let anchor = (1..dim)
        .flat_map(|k| (0..dim - k).map(move |m| (m, m + k)))
        .find(|&(m, n)| first.get(m, n).norm() > tol && second.get(m, n).norm() > tol);
    let Some((m, n)) = anchor else {
        // both diagonal: any x works
        let identical = linalg::max_abs_diff(&first.to_matrix(), &second.to_matrix()) <= tol;
        return Ok(identical.then_some(ONE));
    };
    let ratio = second.get(m, n) / first.get(m, n);
    if (ratio.norm() - 1.0).abs() > tol {
        return Ok(None);
    }
    let k = (n - m) as f64;
    let base = ratio.arg() / k;
    let found = (0..n - m)
        .map(|j| Complex64::from_polar(1.0, base + TAU * j as f64 / k))
        .find(|&x| {
            first
                .translate(x)
                .map(|t| linalg::max_abs_diff(&t.to_matrix(), &second.to_matrix()) <= tol)
                .unwrap_or(false)
        });
    Ok(found)
}

/// `Φ_E(ρ)_{m,n} = c_{n,m} ρ_{m,n}`; the statistics of `E` in `ρ` are those
/// of the canonical observable in `Φ_E(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalChannel {
    phase: PhaseMatrix,
}

pub fn canonical_channel(phase: &PhaseMatrix) -> CanonicalChannel {
    CanonicalChannel { phase: phase.clone() }
}

impl CanonicalChannel {
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let dim = self.phase.dim();
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
        }
        let out = CMatrix::from_fn(dim, dim, |m, n| self.phase.get(n, m) * rho.matrix()[(m, n)]);
        // Hadamard product of two PSD matrices with unit-diagonal factor
        Ok(DensityMatrix::from_trusted(out))
    }
}

/// Vectors `φ^n_q` (`q < out_dim`, `n < in_dim`) of a phase-covariant
/// channel, with `Σ_n ‖φ^n_q‖² = 1` for every `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantChannelSpec {
    in_dim: usize,
    phi: Vec<Vec<CVector>>,
}

pub const CHANNEL_NORM_TOL: f64 = 1e-10;

impl CovariantChannelSpec {
    pub fn new(in_dim: usize, phi: Vec<Vec<CVector>>) -> Result<Self> {
        let env = phi.first().and_then(|row| row.first()).map_or(0, |v| v.len());
        for (q, row) in phi.iter().enumerate() {
            if row.len() != in_dim {
                return Err(Error::DimensionMismatch { expected: in_dim, found: row.len() });
            }
            if let Some(v) = row.iter().find(|v| v.len() != env) {
                return Err(Error::DimensionMismatch { expected: env, found: v.len() });
            }
            let total: f64 = row.iter().map(|v| v.norm_squared()).sum();
            if (total - 1.0).abs() > CHANNEL_NORM_TOL {
                return Err(domain(format!("channel vectors for level {q} have total weight {total}")));
            }
        }
        Ok(Self { in_dim, phi })
    }

    /// `φ^n_q = δ_{n,q} φ` with a one-dimensional `φ = 1`.
    pub fn identity(dim: usize) -> Self {
        let phi = (0..dim)
            .map(|q| (0..dim).map(|n| CVector::from_element(1, if n == q { ONE } else { ZERO })).collect())
            .collect();
        Self { in_dim: dim, phi }
    }

    /// `φ^n_q = δ_{n0, n-q} conj(λ_n) λ_{n0} φ` with `λ_n = c_{n0,n}`: maps an
    /// observable whose tail from `n0` is unimodular rank one onto the
    /// canonical one. Output dimension is `D - n0`.
    pub fn canonicalizing(phase: &PhaseMatrix, n0: usize) -> Result<Self> {
        let dim = phase.dim();
        if n0 >= dim {
            return Err(domain(format!("tail start {n0} outside dimension {dim}")));
        }
        let lambda: Vec<Complex64> = (0..dim).map(|n| phase.get(n0, n)).collect();
        let phi = (0..dim - n0)
            .map(|q| {
                (0..dim)
                    .map(|n| {
                        let value = if n == q + n0 { lambda[n].conj() * lambda[n0] } else { ZERO };
                        CVector::from_element(1, value)
                    })
                    .collect()
            })
            .collect();
        Self::new(dim, phi)
    }

    /// Random normalized vectors in a space of dimension `env`.
    pub fn random(out_dim: usize, in_dim: usize, env: usize, rng: &mut impl Rng) -> Self {
        let phi = (0..out_dim)
            .map(|_| {
                let row: Vec<CVector> = (0..in_dim)
                    .map(|_| {
                        CVector::from_fn(env, |_, _| {
                            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        })
                    })
                    .collect();
                let total: f64 = row.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
                row.into_iter().map(|v| v.unscale(total)).collect()
            })
            .collect();
        Self { in_dim, phi }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.phi.len()
    }
}

/// `c'_{q,p} = Σ_n c_{n,(p-q)+n} ⟨φ^n_q, φ^{(p-q)+n}_p⟩` for `p ≥ q`, with
/// the Hermitian completion below the diagonal.
pub fn preprocess(phase: &PhaseMatrix, spec: &CovariantChannelSpec) -> Result<PhaseMatrix> {
    if spec.in_dim != phase.dim() {
        return Err(Error::DimensionMismatch { expected: phase.dim(), found: spec.in_dim });
    }
    let d = phase.dim();
    let entry = |q: usize, p: usize| -> Complex64 {
        let j = p - q;
        (0..d - j).map(|n| phase.get(n, n + j) * spec.phi[q][n].dotc(&spec.phi[p][n + j])).sum()
    };
    Ok(PhaseMatrix::from_lower_fn(spec.out_dim(), |m, n| entry(n, m).conj()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecleanReport {
    pub truncation_dim: usize,
    pub n0: Option<usize>,
    /// Shortest tail accepted as evidence, `⌈D/2⌉`.
    pub min_tail: usize,
    /// Numerical rank of the tail block from the smallest unimodular start.
    pub tail_rank: Option<usize>,
    /// `λ_n = c_{n0,n}` for `n ≥ n0`.
    pub tail_phases: Vec<Complex64>,
}

/// Smallest `n0` with `|c_{m,n}| ≥ 1 - tol` on the block `m, n ≥ n0` and a
/// rank-one tail block, provided the tail has at least `⌈D/2⌉` rows.
pub fn preclean_check(phase: &PhaseMatrix, tol: f64, eps_rank: f64) -> PrecleanReport {
    let dim = phase.dim();
    let min_tail = dim.div_ceil(2);
    let mut start = dim;
    while start > 0 && (start - 1..dim).all(|n| phase.get(start - 1, n).norm() >= 1.0 - tol) {
        start -= 1;
    }
    let mut report =
        PrecleanReport { truncation_dim: dim, n0: None, min_tail, tail_rank: None, tail_phases: Vec::new() };
    if dim - start < min_tail {
        return report;
    }
    let tail = PhaseMatrix::from_lower_fn(dim - start, |m, n| phase.get(m + start, n + start));
    let rank = tail.rank(eps_rank);
    report.tail_rank = Some(rank);
    if rank == 1 {
        report.n0 = Some(start);
        report.tail_phases = (start..dim).map(|n| phase.get(start, n)).collect();
    }
    report
}
