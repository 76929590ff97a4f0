//! States, arcs, effect operators and outcome statistics.
//!
//! Angles are radians; an arc `[a, a+L)` is half-open and may wrap past
//! `2π`. The measure on the circle is normalized, `dt = dθ/2π`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io::DensityRecord;
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::phasecore::PhaseMatrix;
use crate::specfun::{displacement_element, gauss_legendre, ln_factorial};

/// Tolerances of the [`DensityMatrix`] invariants.
pub const STATE_HERMITIAN_TOL: f64 = 1e-12;
pub const STATE_PSD_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Tolerance on `Σ λ_s = 1` for a [`DiagonalState`].
pub const DIAGONAL_SUM_TOL: f64 = 1e-12;
/// Radial cutoff and node count of the displacement-averaging oracle.
pub const DEFAULT_R_MAX: f64 = 10.0;
pub const DEFAULT_QUAD_POINTS: usize = 200;

/// Probability vector on the number basis, `T = Σ λ_s |s⟩⟨s|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalStateRepr", into = "DiagonalStateRepr")]
pub struct DiagonalState {
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DiagonalStateRepr {
    weights: Vec<f64>,
}

impl TryFrom<DiagonalStateRepr> for DiagonalState {
    type Error = Error;

    fn try_from(repr: DiagonalStateRepr) -> Result<Self> {
        Self::new(repr.weights)
    }
}

impl From<DiagonalState> for DiagonalStateRepr {
    fn from(state: DiagonalState) -> Self {
        Self { weights: state.weights }
    }
}

impl DiagonalState {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if let Some((s, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(domain(format!("weight {w} at level {s} is negative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DIAGONAL_SUM_TOL {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        while weights.last() == Some(&0.0) {
            weights.pop();
        }
        Ok(Self { weights })
    }

    /// Rescales nonnegative weights to unit sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(domain("weights have no positive mass"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// The number state `|s⟩⟨s|`.
    pub fn number(s: usize) -> Self {
        let mut weights = vec![0.0; s + 1];
        weights[s] = 1.0;
        Self { weights }
    }

    /// Uniformly random weights on `levels` levels.
    pub fn random(levels: usize, rng: &mut impl Rng) -> Self {
        let weights = (0..levels).map(|_| rng.random::<f64>() + 1e-3).collect();
        Self::normalized(weights).expect("positive weights")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, s: usize) -> f64 {
        self.weights.get(s).copied().unwrap_or(0.0)
    }

    /// One past the highest occupied level.
    pub fn support(&self) -> usize {
        self.weights.len()
    }

    pub fn to_density(&self, dim: usize) -> Result<DensityMatrix> {
        if self.support() > dim {
            return Err(Error::Truncation { support: self.support(), cutoff: dim });
        }
        let diag = CVector::from_fn(dim, |i, _| Complex64::new(self.weight(i), 0.0));
        Ok(DensityMatrix { matrix: CMatrix::from_diagonal(&diag) })
    }
}

/// Truncated state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRecord", into = "DensityRecord")]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(domain(format!("state must be square, got {:?}", matrix.shape())));
        }
        let skew = linalg::max_abs_diff(&matrix, &matrix.adjoint());
        if skew > STATE_HERMITIAN_TOL {
            return Err(domain(format!("state is not Hermitian (deviation {skew:e})")));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > STATE_TRACE_TOL {
            return Err(domain(format!("state has trace {trace}")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -STATE_PSD_TOL {
            return Err(domain(format!("state has eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// For maps already known to send states to states.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn number_state(k: usize, dim: usize) -> Result<Self> {
        DiagonalState::number(k).to_density(dim)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Self { matrix: CMatrix::identity(dim, dim) * scale }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(domain("pure state needs a nonzero vector"));
        }
        let unit = psi.unscale(norm);
        Ok(Self { matrix: &unit * unit.adjoint() })
    }

    /// Random mixed state `G G† / tr(G G†)` with uniform complex entries.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let gg = &g * g.adjoint();
        let trace = gg.trace();
        Self { matrix: gg / trace }
    }

    pub fn random_pure(dim: usize, rng: &mut impl Rng) -> Self {
        let psi = CVector::from_fn(dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        Self::pure(&psi).expect("random vector is nonzero")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `U(t) ρ U(t)†` with `U(t) = diag(tⁿ)`.
    pub fn rotated(&self, t: Complex64) -> Self {
        let u = number_rotation(t, self.dim());
        Self { matrix: &u * &self.matrix * u.adjoint() }
    }
}

/// `U(t) = diag(t⁰, t¹, …)`.
pub fn number_rotation(t: Complex64, dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| t.powi(n as i32)))
}

/// Truncated coherent state `|z⟩`, renormalized; `fidelity` is the weight
/// the truncation kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentVector {
    pub z: Complex64,
    pub amplitudes: CVector,
    pub fidelity: f64,
}

impl CoherentVector {
    pub fn new(z: Complex64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("coherent state needs a positive dimension"));
        }
        let r2 = z.norm_sqr();
        let raw = CVector::from_fn(dim, |n, _| {
            if r2 == 0.0 {
                return if n == 0 { ONE } else { ZERO };
            }
            let ln_mag = -0.5 * r2 + 0.5 * n as f64 * r2.ln() - 0.5 * ln_factorial(n as u64);
            Complex64::from_polar(ln_mag.exp(), n as f64 * z.arg())
        });
        let fidelity = raw.norm_squared();
        Ok(Self { z, amplitudes: raw.unscale(fidelity.sqrt()), fidelity })
    }

    /// Smallest dimension at which the tests trust the truncation.
    pub fn safe_dim(z: Complex64) -> usize {
        let r = z.norm();
        (r * r + 8.0 * r + 16.0).ceil() as usize
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::pure(&self.amplitudes).expect("unit vector")
    }
}

/// One half-open arc `[start, start + length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    pub start: f64,
    pub length: f64,
}

impl ArcSegment {
    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    fn fourier(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(self.length / TAU, 0.0);
        }
        let kf = k as f64;
        let upper = Complex64::from_polar(1.0, kf * self.end());
        let lower = Complex64::from_polar(1.0, kf * self.start);
        (upper - lower) / Complex64::new(0.0, TAU * kf)
    }

    /// Pieces inside `[0, 2π)`.
    fn unwrapped(&self) -> Vec<(f64, f64)> {
        if self.end() <= TAU {
            vec![(self.start, self.end())]
        } else {
            vec![(self.start, TAU), (0.0, self.end() - TAU)]
        }
    }
}

/// Finite disjoint union of half-open arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArcRepr", into = "ArcRepr")]
pub struct Arc {
    segments: Vec<ArcSegment>,
}

#[derive(Serialize, Deserialize)]
struct ArcRepr {
    segments: Vec<ArcSegment>,
}

impl TryFrom<ArcRepr> for Arc {
    type Error = Error;

    fn try_from(repr: ArcRepr) -> Result<Self> {
        Self::union(&repr.segments)
    }
}

impl From<Arc> for ArcRepr {
    fn from(arc: Arc) -> Self {
        Self { segments: arc.segments }
    }
}

/// Slack when deciding that two segments overlap.
const ARC_OVERLAP_TOL: f64 = 1e-12;

impl Arc {
    /// `[start, start + length)`, with `start` reduced mod `2π`.
    pub fn new(start: f64, length: f64) -> Result<Self> {
        Self::union(&[ArcSegment { start, length }])
    }

    pub fn full() -> Self {
        Self { segments: vec![ArcSegment { start: 0.0, length: TAU }] }
    }

    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    /// `[centre - half_width, centre + half_width)`.
    pub fn centered(centre: f64, half_width: f64) -> Result<Self> {
        Self::new(centre - half_width, 2.0 * half_width)
    }

    /// Union of pairwise disjoint segments.
    pub fn union(segments: &[ArcSegment]) -> Result<Self> {
        let mut normalized = Vec::with_capacity(segments.len());
        for seg in segments {
            if !seg.start.is_finite() || !(0.0..=TAU).contains(&seg.length) {
                return Err(domain(format!(
                    "arc segment start {} length {} is not a valid arc",
                    seg.start, seg.length
                )));
            }
            if seg.length > 0.0 {
                normalized.push(ArcSegment { start: seg.start.rem_euclid(TAU), length: seg.length });
            }
        }
        let mut pieces: Vec<(f64, f64)> = normalized.iter().flat_map(|s| s.unwrapped()).collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pieces.windows(2).any(|w| w[0].1 > w[1].0 + ARC_OVERLAP_TOL) {
            return Err(domain("arc segments overlap"));
        }
        Ok(Self { segments: normalized })
    }

    pub fn segments(&self) -> &[ArcSegment] {
        &self.segments
    }

    /// Total length in radians.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        let theta = theta.rem_euclid(TAU);
        self.segments
            .iter()
            .flat_map(|s| s.unwrapped())
            .any(|(a, b)| a <= theta && theta < b)
    }

    /// The set `tX` for `t = e^{iφ}`.
    pub fn rotated(&self, phi: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| ArcSegment { start: (s.start + phi).rem_euclid(TAU), length: s.length })
                .collect(),
        }
    }

    /// `T ∖ X` as a union of segments in `[0, 2π)`.
    pub fn complement(&self) -> Self {
        let mut pieces: Vec<(f64, f64)> = self.segments.iter().flat_map(|s| s.unwrapped()).collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut gaps = Vec::new();
        let mut cursor = 0.0;
        for (a, b) in pieces {
            if a > cursor {
                gaps.push(ArcSegment { start: cursor, length: a - cursor });
            }
            cursor = f64::max(cursor, b);
        }
        if cursor < TAU {
            gaps.push(ArcSegment { start: cursor, length: TAU - cursor });
        }
        Self { segments: gaps }
    }

    /// `∫_X t^k dt` with the normalized measure.
    pub fn fourier(&self, k: i64) -> Complex64 {
        self.segments.iter().map(|s| s.fourier(k)).sum()
    }
}

/// `∫_X t^k dt`; for one segment `(e^{ik(a+L)} - e^{ika}) / (2πik)`.
pub fn fourier_arc(arc: &Arc, k: i64) -> Complex64 {
    arc.fourier(k)
}

/// `⟨m|E(X)|n⟩ = c_{m,n} ∫_X t^{m-n} dt`.
pub fn effect_operator(phase: &PhaseMatrix, arc: &Arc) -> CMatrix {
    let dim = phase.dim() as i64;
    // index k + dim - 1 holds the coefficient of t^k
    let coeffs: Vec<Complex64> = (1 - dim..dim).map(|k| arc.fourier(k)).collect();
    CMatrix::from_fn(phase.dim(), phase.dim(), |m, n| {
        phase.get(m, n) * coeffs[(m as i64 - n as i64 + dim - 1) as usize]
    })
}

/// `‖E(X)‖`, the largest eigenvalue of the effect.
pub fn effect_norm(phase: &PhaseMatrix, arc: &Arc) -> f64 {
    linalg::max_eigenvalue(&effect_operator(phase, arc))
}

fn check_state_dim(phase: &PhaseMatrix, rho: &DensityMatrix) -> Result<()> {
    if phase.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: phase.dim(), found: rho.dim() });
    }
    Ok(())
}

/// `tr[ρ E(X)]`.
pub fn prob(phase: &PhaseMatrix, rho: &DensityMatrix, arc: &Arc) -> Result<f64> {
    check_state_dim(phase, rho)?;
    let effect = effect_operator(phase, arc);
    Ok((rho.matrix() * effect).trace().re)
}

/// Outcome density sampled on an equally spaced grid over `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityCurve {
    /// Trapezoid rule on the periodic grid. It is exact for the truncated
    /// Fourier sum once the grid has more than `2(D-1)` points.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * TAU / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `theta,density` lines with 12 significant digits. Negative
    /// round-off is shown as is.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,density\n");
        for (t, v) in self.theta.iter().zip(&self.values) {
            out.push_str(&format!("{t:.11e},{v:.11e}\n"));
        }
        out
    }
}

/// `f(θ) = (1/2π) Σ_{m,n} ρ_{n,m} c_{m,n} e^{i(m-n)θ}` on `grid` points.
pub fn density(phase: &PhaseMatrix, rho: &DensityMatrix, grid: usize) -> Result<DensityCurve> {
    check_state_dim(phase, rho)?;
    if grid == 0 {
        return Err(domain("density grid must have at least one point"));
    }
    let dim = phase.dim();
    // a_k = Σ_{m-n=k} ρ_{n,m} c_{m,n}; a_{-k} = conj(a_k)
    let modes: Vec<Complex64> = (0..dim)
        .map(|k| (0..dim - k).map(|n| rho.matrix()[(n, n + k)] * phase.get(n + k, n)).sum())
        .collect();
    let theta: Vec<f64> = (0..grid).map(|j| TAU * j as f64 / grid as f64).collect();
    let values = theta
        .iter()
        .map(|&t| {
            let oscillating: f64 = modes
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| (a * Complex64::from_polar(1.0, k as f64 * t)).re)
                .sum();
            (modes[0].re + 2.0 * oscillating) / TAU
        })
        .collect();
    Ok(DensityCurve { theta, values })
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
fn legendre_on(a: f64, b: f64, count: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    gauss_legendre(count).into_iter().map(|(x, w)| (a + half * (x + 1.0), half * w)).collect()
}

/// Effect of the state-generated observable computed directly from the
/// displacement average `(1/π) ∫_{arg X} ∫₀^{r_max} D(re^{iθ}) T D(re^{iθ})† r dr dθ`.
///
/// Independent of the Laguerre closed forms: it only uses number-basis
/// matrix elements of `D(z)`. The angle integral uses `2D+1` Gauss-Legendre
/// nodes on every piece of at most `π/2`, and the radial one `quad_points`
/// nodes on `[0, r_max]`.
pub fn et_quadrature_oracle(
    state: &DiagonalState,
    arc: &Arc,
    dim: usize,
    r_max: f64,
    quad_points: usize,
) -> Result<CMatrix> {
    if dim == 0 || quad_points == 0 || !(r_max > 0.0) {
        return Err(domain("oracle needs positive dimension, node count and radius"));
    }
    let radial = legendre_on(0.0, r_max, quad_points);
    let mut angular = Vec::new();
    for seg in arc.segments() {
        let pieces = (seg.length / (0.5 * PI)).ceil().max(1.0) as usize;
        let step = seg.length / pieces as f64;
        for p in 0..pieces {
            let a = seg.start + p as f64 * step;
            angular.extend(legendre_on(a, a + step, 2 * dim + 1));
        }
    }
    let levels: Vec<(u32, f64)> = state
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(s, &w)| (s as u32, w))
        .collect();

    let mut total = CMatrix::zeros(dim, dim);
    for &(theta, w_theta) in &angular {
        for &(r, w_r) in &radial {
            let z = Complex64::from_polar(r, theta);
            let column = CMatrix::from_fn(dim, levels.len(), |m, j| {
                displacement_element(m as u32, levels[j].0, z) * levels[j].1.sqrt()
            });
            let weight = w_theta * w_r * r / PI;
            total += (&column * column.adjoint()) * Complex64::new(weight, 0.0);
        }
    }
    Ok(total)
}

/// `c^T_{m,n} = 2 Σ_s λ_s ∫₀^{r_max} ⟨m|D(r)|s⟩⟨n|D(r)|s⟩ r dr`: the phase
/// entry read off the angular Fourier mode of the displacement average.
pub fn et_phase_entry_oracle(
    state: &DiagonalState,
    m: u32,
    n: u32,
    r_max: f64,
    quad_points: usize,
) -> f64 {
    legendre_on(0.0, r_max, quad_points)
        .into_iter()
        .map(|(r, w)| {
            let z = Complex64::new(r, 0.0);
            let inner: f64 = state
                .weights()
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > 0.0)
                .map(|(s, &l)| {
                    l * displacement_element(m, s as u32, z).re
                        * displacement_element(n, s as u32, z).re
                })
                .sum();
            2.0 * w * r * inner
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fourier_arc_examples() {
        assert_abs_diff_eq!(fourier_arc(&Arc::full(), 0).re, 1.0, epsilon = 1e-15);
        for k in [-3, -1, 1, 5] {
            assert!(fourier_arc(&Arc::full(), k).norm() < 1e-15);
        }
        let half = Arc::new(0.0, PI).unwrap();
        let value = fourier_arc(&half, 1);
        assert_abs_diff_eq!(value.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(value.im, 1.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn half_circle_effect_of_canonical() {
        let canonical = PhaseMatrix::canonical(2).unwrap();
        // [π, 2π) gives ⟨0|E|1⟩ = i/π; [0, π) gives its conjugate
        let upper = effect_operator(&canonical, &Arc::new(PI, PI).unwrap());
        assert_abs_diff_eq!(upper[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert!((upper[(0, 1)] - c(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!((upper[(1, 0)] - c(0.0, -1.0 / PI)).norm() < 1e-15);
        let lower = effect_operator(&canonical, &Arc::new(0.0, PI).unwrap());
        assert!((lower[(0, 1)] - c(0.0, -1.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn effect_of_full_circle_is_identity() {
        let m = PhaseMatrix::chessboard(c(0.3, 0.2), 6).unwrap();
        let e = effect_operator(&m, &Arc::full());
        assert!(linalg::max_abs_diff(&e, &CMatrix::identity(6, 6)) < 1e-15);
        assert_abs_diff_eq!(effect_norm(&m, &Arc::full()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(effect_norm(&m, &Arc::new(1.0, 0.0).unwrap()), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn complement_sums_to_identity() {
        let m = PhaseMatrix::example5(7).unwrap();
        for arc in [
            Arc::new(0.3, 2.0).unwrap(),
            Arc::new(5.5, 2.0).unwrap(),
            Arc::union(&[
                ArcSegment { start: 0.1, length: 0.5 },
                ArcSegment { start: 3.0, length: 1.0 },
            ])
            .unwrap(),
        ] {
            let sum = effect_operator(&m, &arc) + effect_operator(&m, &arc.complement());
            assert!(linalg::max_abs_diff(&sum, &CMatrix::identity(7, 7)) < 1e-14);
            assert_abs_diff_eq!(arc.length() + arc.complement().length(), TAU, epsilon = 1e-13);
        }
    }

    #[test]
    fn arc_rejects_overlaps_and_bad_lengths() {
        let overlapping = [
            ArcSegment { start: 0.0, length: 1.0 },
            ArcSegment { start: 0.5, length: 1.0 },
        ];
        assert!(Arc::union(&overlapping).is_err());
        let wrapping = [
            ArcSegment { start: 6.0, length: 1.0 },
            ArcSegment { start: 0.5, length: 1.0 },
        ];
        assert!(Arc::union(&wrapping).is_err());
        assert!(Arc::new(0.0, 7.0).is_err());
        assert!(Arc::new(f64::NAN, 1.0).is_err());
        assert!(Arc::new(6.0, 1.0).unwrap().contains(0.2));
    }

    #[test]
    fn number_states_have_uniform_statistics() {
        let m = PhaseMatrix::chessboard(c(0.5, 0.1), 8).unwrap();
        let arc = Arc::new(1.0, 0.7).unwrap();
        for k in [0, 3, 7] {
            let rho = DensityMatrix::number_state(k, 8).unwrap();
            assert_abs_diff_eq!(prob(&m, &rho, &arc).unwrap(), 0.7 / TAU, epsilon = 1e-14);
            let curve = density(&m, &rho, 64).unwrap();
            assert!(curve.values.iter().all(|v| (v - 1.0 / TAU).abs() < 1e-14));
        }
        let mixed = DensityMatrix::maximally_mixed(8);
        let curve = density(&m, &mixed, 64).unwrap();
        assert!(curve.values.iter().all(|v| (v - 1.0 / TAU).abs() < 1e-14));
    }

    #[test]
    fn density_integrates_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = PhaseMatrix::example5(10).unwrap();
        let rho = DensityMatrix::random(10, &mut rng);
        let curve = density(&m, &rho, 64).unwrap();
        assert_abs_diff_eq!(curve.integral(), 1.0, epsilon = 1e-12);
        assert!(curve.min() > -1e-10);
        assert!(density(&m, &DensityMatrix::maximally_mixed(4), 8).is_err());
    }

    #[test]
    fn density_csv_format() {
        let m = PhaseMatrix::canonical(2).unwrap();
        let csv = density(&m, &DensityMatrix::maximally_mixed(2), 2).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "theta,density");
        assert_eq!(lines[1], "0.00000000000e0,1.59154943092e-1");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn coherent_vector_fidelity() {
        let z = c(3.0, 4.0);
        let dim = CoherentVector::safe_dim(z);
        let v = CoherentVector::new(z, dim).unwrap();
        assert!(v.fidelity > 1.0 - 1e-8);
        assert_abs_diff_eq!(v.amplitudes.norm(), 1.0, epsilon = 1e-14);
        let short = CoherentVector::new(z, 10).unwrap();
        assert!(short.fidelity < 0.5);
        let vacuum = CoherentVector::new(ZERO, 4).unwrap();
        assert_eq!(vacuum.amplitudes[0], ONE);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let mut bad = CMatrix::identity(2, 2) * c(0.5, 0.0);
        bad[(0, 1)] = c(0.9, 0.0);
        bad[(1, 0)] = c(0.9, 0.0);
        assert!(DensityMatrix::new(bad).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::random(5, &mut rng);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn diagonal_state_rules() {
        assert!(DiagonalState::new(vec![0.5, 0.6]).is_err());
        assert!(DiagonalState::new(vec![1.5, -0.5]).is_err());
        let state = DiagonalState::new(vec![0.25, 0.75, 0.0]).unwrap();
        assert_eq!(state.support(), 2);
        assert_eq!(DiagonalState::number(3).support(), 4);
        let json = serde_json::to_string(&state).unwrap();
        assert_eq!(serde_json::from_str::<DiagonalState>(&json).unwrap(), state);
        assert!(serde_json::from_str::<DiagonalState>(r#"{"weights":[0.5]}"#).is_err());
    }

    #[test]
    fn oracle_reproduces_vacuum_phase_entry() {
        let vacuum = DiagonalState::number(0);
        let value = et_phase_entry_oracle(&vacuum, 0, 2, DEFAULT_R_MAX, DEFAULT_QUAD_POINTS);
        assert_abs_diff_eq!(value, 1.0 / 2f64.sqrt(), epsilon = 1e-10);
        let diag = et_phase_entry_oracle(&vacuum, 3, 3, DEFAULT_R_MAX, DEFAULT_QUAD_POINTS);
        assert_abs_diff_eq!(diag, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn oracle_full_circle_is_identity() {
        let vacuum = DiagonalState::number(0);
        let e = et_quadrature_oracle(&vacuum, &Arc::full(), 8, DEFAULT_R_MAX, 120).unwrap();
        assert!(linalg::max_abs_diff(&e, &CMatrix::identity(8, 8)) < 1e-4);
    }
}
