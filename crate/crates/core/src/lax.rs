//! The Lax operator `L_u f = -i f' - Π(u f)` on a truncated Hardy basis.
//!
//! The basis is `φ_k = e^{ikx}/√L` for `k = 0, Δk, …, (K-1)Δk`. The frequency
//! sum is treated as a quadrature of the half-line Fourier integral, so the
//! endpoint `k = 0` carries half weight: coordinates are scaled by
//! `s_k = √w_k` with `w_0 = ½` and `w_k = 1` otherwise. The assembled matrix is
//!
//! ```text
//! A_km = k Δk δ_km - s_k s_m c_{k-m}(u),     u₊ = (s_k √L c_k(u))_k,
//! ```
//!
//! which keeps `A` Hermitian while making its bound states converge to those of
//! the line operator at rate `O(1/L³)` instead of `O(1/L)`. A coordinate vector
//! `g` represents the Hardy function with torus coefficients `g_k / (s_k √L)`.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, to_coefficients, Grid, HardyField, NormSpec, RealField};
use crate::io::CsvTable;
use crate::multisoliton::DecayRow;

/// Eigenvalues below this level are treated as bound states.
pub const BOUND_STATE_THRESHOLD: f64 = -0.05;

/// Default constant in [`kappa_floor`].
pub const DEFAULT_C_S: f64 = 4.0;

/// Default number of retained modes, `n_points / 4`.
pub fn default_modes(grid: &Grid) -> usize {
    grid.n_points() / 4
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Quadrature scaling `s_k` of basis coordinate `k`.
#[inline]
fn endpoint_scale(k: usize) -> f64 {
    if k == 0 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    }
}

/// Galerkin matrix of `L_u` together with the coordinates of `Π u`.
#[derive(Clone, Debug)]
pub struct LaxSystem {
    grid: Grid,
    matrix: Mat<Complex64>,
    u_plus: Vec<Complex64>,
}

/// Assembles the Lax matrix of `u` on `modes` nonnegative frequencies.
pub fn assemble(u: &RealField, modes: usize) -> Result<LaxSystem> {
    let grid = u.grid().clone();
    let limit = grid.n_points() / 2;
    if modes > limit {
        return Err(Error::InsufficientResolution { modes, limit });
    }
    if modes == 0 {
        return Err(Error::InvalidParameter("at least one mode is required".into()));
    }
    let spec = to_coefficients(u);
    let coeff = |m: i64| spec.coeff(m);
    let dk = grid.dk();
    let matrix = Mat::from_fn(modes, modes, |k, m| {
        let off = -endpoint_scale(k) * endpoint_scale(m) * coeff(k as i64 - m as i64);
        if k == m {
            off + k as f64 * dk
        } else {
            off
        }
    });
    let root_l = grid.length().sqrt();
    let u_plus = (0..modes).map(|k| coeff(k as i64) * (endpoint_scale(k) * root_l)).collect();
    Ok(LaxSystem { grid, matrix, u_plus })
}

impl LaxSystem {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.u_plus.len()
    }

    pub fn entry(&self, k: usize, m: usize) -> Complex64 {
        self.matrix[(k, m)]
    }

    pub fn u_plus(&self) -> &[Complex64] {
        &self.u_plus
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.modes();
        (0..n)
            .flat_map(|k| (0..n).map(move |m| (k, m)))
            .map(|(k, m)| (self.matrix[(k, m)] - self.matrix[(m, k)].conj()).norm())
            .fold(0.0, f64::max)
    }

    fn max_entry(&self) -> f64 {
        let n = self.modes();
        let mut max = 0.0f64;
        for m in 0..n {
            for k in 0..n {
                max = max.max(self.matrix[(k, m)].norm());
            }
        }
        max
    }

    /// `A v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.modes();
        (0..n).into_par_iter().map(|k| (0..n).map(|m| self.matrix[(k, m)] * v[m]).sum()).collect()
    }

    /// Full Hermitian eigendecomposition with phase-normalized eigenvectors.
    pub fn eigensolve(&self) -> Result<SpectralData> {
        let n = self.modes();
        let failure = || Error::Eigensolver { size: n, max_entry: self.max_entry() };
        let evd = self.matrix.self_adjoint_eigen(Side::Lower).map_err(|_| failure())?;
        let diag = evd.S().column_vector();
        let eigenvalues: Vec<f64> = (0..n).map(|j| diag[j].re).collect();
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(failure());
        }
        let u = evd.U();
        let mut vectors = Mat::<Complex64>::zeros(n, n);
        let mut couplings = Vec::with_capacity(n);
        for j in 0..n {
            // γ_j = ⟨u₊, f_j⟩; rotating f_j by e^{-i arg γ_j} makes γ_j ≥ 0.
            let gamma: Complex64 = (0..n).map(|k| self.u_plus[k].conj() * u[(k, j)]).sum();
            let phase =
                if gamma.norm() > 0.0 { gamma.conj() / gamma.norm() } else { Complex64::new(1.0, 0.0) };
            for k in 0..n {
                vectors[(k, j)] = u[(k, j)] * phase;
            }
            couplings.push(Complex64::new(gamma.norm(), 0.0));
        }
        Ok(SpectralData { grid: self.grid.clone(), eigenvalues, eigenvectors: vectors, couplings })
    }

    fn shifted(&self, kappa: f64) -> Mat<Complex64> {
        let mut shifted = self.matrix.clone();
        for k in 0..self.modes() {
            shifted[(k, k)] += kappa;
        }
        shifted
    }

    fn u_plus_column(&self) -> Mat<Complex64> {
        Mat::from_fn(self.modes(), 1, |k, _| self.u_plus[k])
    }

    /// `β(κ; u) = ⟨u₊, (L_u + κ)^{-1} u₊⟩` by Cholesky factorization.
    pub fn beta(&self, kappa: f64) -> Result<f64> {
        if !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be finite, got {kappa}")));
        }
        let shifted = self.shifted(kappa);
        let in_spectrum = || -> Error {
            let bound = self
                .matrix
                .self_adjoint_eigenvalues(Side::Lower)
                .ok()
                .and_then(|e| e.first().copied())
                .map_or(f64::NAN, |e| -e);
            Error::KappaInSpectrum { kappa, bound }
        };
        let llt = shifted.llt(Side::Lower).map_err(|_| in_spectrum())?;
        let rhs = self.u_plus_column();
        let w = llt.solve(&rhs);
        let value: Complex64 = (0..self.modes()).map(|k| self.u_plus[k].conj() * w[(k, 0)]).sum();
        Ok(value.re)
    }

    /// `β(z; u)` for complex `z` by LU factorization.
    pub fn beta_complex(&self, z: Complex64) -> Complex64 {
        let mut shifted = self.matrix.clone();
        for k in 0..self.modes() {
            shifted[(k, k)] += z;
        }
        let w = shifted.partial_piv_lu().solve(&self.u_plus_column());
        (0..self.modes()).map(|k| self.u_plus[k].conj() * w[(k, 0)]).sum()
    }

    /// `β` sampled at several κ, one factorization per value.
    pub fn beta_curve(&self, kappas: &[f64]) -> Result<BetaCurve> {
        let values = kappas.par_iter().map(|&k| self.beta(k)).collect::<Result<Vec<_>>>()?;
        Ok(BetaCurve { kappas: kappas.to_vec(), values })
    }

    /// `E_n = ⟨u₊, L_u^n u₊⟩` for `n = 0..=n_max`.
    pub fn conserved_energies(&self, n_max: usize) -> Result<Vec<f64>> {
        if n_max > 4 {
            return Err(Error::InvalidParameter(format!(
                "n_max = {n_max} exceeds 4; higher powers only amplify truncation error"
            )));
        }
        let mut out = Vec::with_capacity(n_max + 1);
        let mut v = self.u_plus.clone();
        for n in 0..=n_max {
            if n > 0 {
                v = self.apply(&v);
            }
            let e: Complex64 = self.u_plus.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            out.push(e.re);
        }
        Ok(out)
    }

    /// Residue of `z ↦ β(z)` at `center` by an `points`-node trapezoidal
    /// contour integral on the circle of the given radius.
    pub fn contour_residue(&self, center: f64, radius: f64, points: usize) -> Complex64 {
        let terms: Vec<Complex64> = (0..points)
            .into_par_iter()
            .map(|p| {
                let theta = 2.0 * PI * (p as f64 + 0.5) / points as f64;
                let offset = Complex64::from_polar(radius, theta);
                self.beta_complex(center + offset) * offset
            })
            .collect();
        // Summed in order so the result does not depend on the thread count.
        terms.iter().sum::<Complex64>() / points as f64
    }
}

/// Eigen-decomposition of a [`LaxSystem`].
#[derive(Clone, Debug)]
pub struct SpectralData {
    grid: Grid,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<Complex64>,
    couplings: Vec<Complex64>,
}

impl SpectralData {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `γ_j = ⟨u, f_j⟩`, real and nonnegative after phase fixing.
    pub fn couplings(&self) -> &[Complex64] {
        &self.couplings
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthonormal coordinates of eigenvector `j`.
    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        (0..self.modes()).map(|k| self.eigenvectors[(k, j)]).collect()
    }

    /// Eigenfunction `j` as a Hardy field on the grid.
    pub fn eigenfunction(&self, j: usize) -> HardyField {
        let root_l = self.grid.length().sqrt();
        let coeffs =
            (0..self.modes()).map(|k| self.eigenvectors[(k, j)] / (endpoint_scale(k) * root_l)).collect();
        HardyField::new(self.grid.clone(), coeffs).expect("modes never exceed n/2")
    }

    /// Indices of eigenvalues below `threshold`.
    pub fn bound_states(&self, threshold: f64) -> Vec<usize> {
        self.eigenvalues.iter().take_while(|&&e| e < threshold).enumerate().map(|(j, _)| j).collect()
    }

    pub fn negative_eigenvalues(&self, threshold: f64) -> Vec<f64> {
        self.eigenvalues.iter().copied().take_while(|&e| e < threshold).collect()
    }

    /// `Σ_j |γ_j|² / (E_j + κ)`.
    pub fn beta(&self, kappa: f64) -> Result<f64> {
        let lowest = self.eigenvalues[0];
        if !(kappa + lowest > 0.0) {
            return Err(Error::KappaInSpectrum { kappa, bound: -lowest });
        }
        Ok(self.eigenvalues.iter().zip(&self.couplings).map(|(e, g)| g.norm_sqr() / (e + kappa)).sum())
    }

    /// Contribution of the levels at or above `threshold` to `β(κ)`.
    pub fn continuum_beta(&self, kappa: f64, threshold: f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.couplings)
            .filter(|(e, _)| **e >= threshold)
            .map(|(e, g)| g.norm_sqr() / (e + kappa))
            .sum()
    }

    /// Largest share of `Σ|γ_j|²` carried by a single level at or above `threshold`.
    pub fn continuum_concentration(&self, threshold: f64) -> f64 {
        let weights: Vec<f64> = self
            .eigenvalues
            .iter()
            .zip(&self.couplings)
            .filter(|(e, _)| **e >= threshold)
            .map(|(_, g)| g.norm_sqr())
            .collect();
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            0.0
        } else {
            weights.iter().fold(0.0f64, |a, &b| a.max(b)) / total
        }
    }

    /// `max_j ‖A f_j - E_j f_j‖`.
    pub fn max_residual(&self, sys: &LaxSystem) -> f64 {
        let av = &sys.matrix * &self.eigenvectors;
        (0..self.modes())
            .map(|j| {
                (0..self.modes())
                    .map(|k| (av[(k, j)] - self.eigenvectors[(k, j)] * self.eigenvalues[j]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V†V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.modes();
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let mut max = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let id = if j == k { 1.0 } else { 0.0 };
                max = max.max((gram[(j, k)] - id).norm());
            }
        }
        max
    }

    /// JSON export `{eigenvalues, couplings: [{re, im}], wu_ratios}`.
    pub fn to_json(&self, threshold: f64) -> serde_json::Value {
        let couplings: Vec<_> = self.couplings.iter().map(|g| json!({"re": g.re, "im": g.im})).collect();
        let ratios: Vec<f64> = wu_check(self, threshold).entries.iter().map(|e| e.ratio).collect();
        json!({"eigenvalues": self.eigenvalues, "couplings": couplings, "wu_ratios": ratios})
    }
}

/// `β(κ; u)` on a set of κ values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaCurve {
    pub kappas: Vec<f64>,
    pub values: Vec<f64>,
}

impl BetaCurve {
    pub fn from_spectrum(spec: &SpectralData, kappas: &[f64]) -> Result<Self> {
        let values = kappas.iter().map(|&k| spec.beta(k)).collect::<Result<Vec<_>>>()?;
        Ok(BetaCurve { kappas: kappas.to_vec(), values })
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(["kappa", "beta"]);
        for (k, b) in self.kappas.iter().zip(&self.values) {
            table.push(vec![*k, *b]);
        }
        table
    }

    /// Strictly decreasing and convex on the sampled κ (assumed ascending).
    pub fn is_decreasing_and_convex(&self) -> bool {
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        let convex = self.kappas.windows(3).zip(self.values.windows(3)).all(|(k, b)| {
            let left = (b[1] - b[0]) / (k[1] - k[0]);
            let right = (b[2] - b[1]) / (k[2] - k[1]);
            right >= left - 1e-12 * left.abs()
        });
        decreasing && convex
    }
}

/// One bound state in a [`WuReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WuEntry {
    pub eigenvalue: f64,
    /// `|γ_j|²`.
    pub coupling_sq: f64,
    /// `2π|λ_j| ‖f_j‖²` with `‖f_j‖ = 1`.
    pub expected: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WuReport {
    pub entries: Vec<WuEntry>,
    /// Smallest spacing between reported eigenvalues (`None` for fewer than two).
    pub min_gap: Option<f64>,
    /// Every reported eigenvalue is separated from its neighbours by more than `1e-6`.
    pub simple: bool,
}

impl WuReport {
    pub fn max_deviation(&self) -> f64 {
        self.entries.iter().map(|e| (e.ratio - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Compares `|⟨u, f_j⟩|²` against `2π|λ_j|` for every eigenvalue below `threshold`.
pub fn wu_check(spec: &SpectralData, threshold: f64) -> WuReport {
    let entries: Vec<WuEntry> = spec
        .bound_states(threshold)
        .into_iter()
        .map(|j| {
            let eigenvalue = spec.eigenvalues[j];
            let coupling_sq = spec.couplings[j].norm_sqr();
            let expected = 2.0 * PI * eigenvalue.abs();
            WuEntry { eigenvalue, coupling_sq, expected, ratio: coupling_sq / expected }
        })
        .collect();
    // Simplicity also needs the gap to the first level above the threshold.
    let count = entries.len();
    let upto = (count + 1).min(spec.modes());
    let min_gap = if count == 0 {
        None
    } else {
        spec.eigenvalues[..upto].windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    };
    let simple = min_gap.is_none_or(|g| g > 1e-6);
    WuReport { entries, min_gap, simple }
}

/// Second Wu relation for one bound state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondWuEntry {
    pub eigenvalue: f64,
    /// Line Fourier transform of the eigenfunction at zero frequency.
    pub transform_at_zero: Complex64,
    /// `|√(2π) λ f̂(0) + ⟨u, f⟩| / |⟨u, f⟩|`, or `NaN` if degenerate.
    pub residual: f64,
    /// `|⟨u, f⟩| < 1e-12`, which contradicts the first Wu relation.
    pub degenerate: bool,
}

/// `f̂(0) ≈ (L/√(2π)) c_0(f)` for eigenfunction `j`.
pub fn transform_at_zero(spec: &SpectralData, j: usize) -> Complex64 {
    let l = spec.grid.length();
    let c0 = spec.eigenvectors[(0, j)] / (endpoint_scale(0) * l.sqrt());
    c0 * (l / (2.0 * PI).sqrt())
}

pub fn second_wu_check(spec: &SpectralData, threshold: f64) -> Vec<SecondWuEntry> {
    spec.bound_states(threshold)
        .into_iter()
        .map(|j| {
            let eigenvalue = spec.eigenvalues[j];
            let gamma = spec.couplings[j];
            let fhat = transform_at_zero(spec, j);
            let degenerate = gamma.norm() < 1e-12;
            let residual = if degenerate {
                f64::NAN
            } else {
                ((2.0 * PI).sqrt() * eigenvalue * fhat + gamma).norm() / gamma.norm()
            };
            SecondWuEntry { eigenvalue, transform_at_zero: fhat, residual, degenerate }
        })
        .collect()
}

/// `max(1, C_s (1 + ‖u‖_{H^s})^{2/(1+2s)})`, raised to `2|E_1|` when spectral data is given.
pub fn kappa_floor(u: &RealField, s: f64, c_s: f64, spectral: Option<&SpectralData>) -> Result<f64> {
    if !(s > -0.5 && s <= 0.0) {
        return Err(Error::InvalidParameter(format!("kappa_floor needs -1/2 < s <= 0, got {s}")));
    }
    if !(c_s > 0.0 && c_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("C_s must be positive, got {c_s}")));
    }
    let norm = sobolev_norm(u, NormSpec { sigma: s, kappa: 1.0 });
    let mut floor = (c_s * (1.0 + norm).powf(2.0 / (1.0 + 2.0 * s))).max(1.0);
    if let Some(spec) = spectral {
        floor = floor.max(2.0 * (-spec.eigenvalues[0]).max(0.0));
    }
    Ok(floor)
}

/// `β(κ; u) - Σ_n 2π|λ_n|/(λ_n + κ)`.
///
/// Every `λ_n` must be within `match_tol` of a measured eigenvalue.
pub fn variational_gap(
    sys: &LaxSystem,
    spec: &SpectralData,
    lambdas: &[f64],
    kappa: f64,
    match_tol: f64,
) -> Result<f64> {
    let missing: Vec<f64> = lambdas
        .iter()
        .copied()
        .filter(|l| !spec.eigenvalues.iter().any(|e| (e - l).abs() <= match_tol))
        .collect();
    if !missing.is_empty() {
        return Err(Error::UnmatchedEigenvalues { missing });
    }
    if let Some(&l) = lambdas.iter().find(|&&l| !(l + kappa > 0.0)) {
        return Err(Error::KappaInSpectrum { kappa, bound: -l });
    }
    let target: f64 = lambdas.iter().map(|l| 2.0 * PI * l.abs() / (l + kappa)).sum();
    Ok(sys.beta(kappa)? - target)
}

/// `‖u₊ - P u₊‖ / ‖u₊‖` with `P` the projection onto eigenvectors below `threshold`.
pub fn span_residual(spec: &SpectralData, sys: &LaxSystem, threshold: f64) -> f64 {
    let a = sys.u_plus();
    let norm = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let mut r = a.to_vec();
    for j in spec.bound_states(threshold) {
        let v = spec.eigenvector(j);
        let proj: Complex64 = v.iter().zip(a).map(|(v, a)| v.conj() * a).sum();
        for (r, v) in r.iter_mut().zip(&v) {
            *r -= v * proj;
        }
    }
    r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() / norm
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidueProbe {
    pub eigenvalue: f64,
    /// Spectral mass `|γ_j|²` of `β` at `z = -E_j`.
    pub residue: f64,
    /// `2π|λ_j|`.
    pub expected: f64,
}

/// Residue of `β(z)` at the pole `z = |λ_j|` from the spectral measure.
pub fn residue_probe(spec: &SpectralData, j: usize) -> ResidueProbe {
    let eigenvalue = spec.eigenvalues[j];
    ResidueProbe { eigenvalue, residue: spec.couplings[j].norm_sqr(), expected: 2.0 * PI * eigenvalue.abs() }
}

/// `|f_j(x)|` tabulated against `C / ⟨x - x_peak⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenDecayTable {
    pub peak: f64,
    pub constant: f64,
    pub rows: Vec<DecayRow>,
}

/// Reconstructs eigenfunction `j` on the grid and compares it with a
/// `⟨x⟩^{-1}` envelope, `C` being read off at distance `L/8` from the peak.
pub fn eigenfunction_decay_probe(spec: &SpectralData, j: usize) -> EigenDecayTable {
    let grid = &spec.grid;
    let values: Vec<f64> = spec.eigenfunction(j).to_samples().iter().map(|c| c.norm()).collect();
    let (peak_j, _) =
        values.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let peak = grid.x(peak_j);
    // Periodic distance to the peak.
    let dist = |x: f64| {
        let l = grid.length();
        let d = (x - peak).rem_euclid(l);
        d.min(l - d)
    };
    let envelope = |x: f64| 1.0 / (1.0 + dist(x).powi(2)).sqrt();
    let probe = peak + grid.length() / 8.0;
    let probe_j = (0..grid.n_points())
        .min_by(|&a, &b| dist_between(grid, a, probe).total_cmp(&dist_between(grid, b, probe)))
        .unwrap_or(0);
    let constant = values[probe_j] / envelope(grid.x(probe_j));
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = grid.x(i);
            DecayRow { x, value: v, envelope: constant * envelope(x) }
        })
        .collect();
    EigenDecayTable { peak, constant, rows }
}

fn dist_between(grid: &Grid, j: usize, x: f64) -> f64 {
    let l = grid.length();
    let d = (grid.x(j) - x).rem_euclid(l);
    d.min(l - d)
}

/// `M(u) = ½ ∫ u²` by the rectangle rule.
pub fn grid_momentum(u: &RealField) -> f64 {
    0.5 * u.l2_norm().powi(2)
}

/// `E(u) = ∫ ½ u H u' - ⅓ u³` with `H∂_x` applied spectrally (symbol `|k|`).
pub fn grid_energy(u: &RealField) -> f64 {
    let grid = u.grid();
    let mut s = to_coefficients(u);
    let nyquist = grid.n_points() / 2;
    for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
        *c = if i == nyquist { zero() } else { *c * grid.wavenumber(i).abs() };
    }
    let hu_x = s.to_real_field();
    let density: f64 =
        u.samples().iter().zip(hu_x.samples()).map(|(&a, &b)| 0.5 * a * b - a * a * a / 3.0).sum();
    density * grid.dx()
}
