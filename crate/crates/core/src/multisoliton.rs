//! Exact N-soliton profiles.
//!
//! For `λ_1 < … < λ_N < 0` and centers `c_j` the profile is
//! `Q(x) = 2 Re tr M(x)^{-1}` with
//!
//! ```text
//! M_jj = -i(x - c_j) - 1/(2λ_j),    M_jk = -1/(λ_j - λ_k)  (j ≠ k).
//! ```
//!
//! The solution of the flow started from `Q_{Λ,c}` is `Q_{Λ,c(t)}` with
//! `c_j(t) = c_j - 2 λ_j t`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};

/// Spectral parameters and centers of a multisoliton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSolitonConfig", into = "RawSolitonConfig")]
pub struct SolitonConfig {
    lambdas: Vec<f64>,
    centers: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawSolitonConfig {
    lambdas: Vec<f64>,
    centers: Vec<f64>,
}

impl TryFrom<RawSolitonConfig> for SolitonConfig {
    type Error = Error;

    fn try_from(raw: RawSolitonConfig) -> Result<Self> {
        SolitonConfig::new(raw.lambdas, raw.centers)
    }
}

impl From<SolitonConfig> for RawSolitonConfig {
    fn from(cfg: SolitonConfig) -> Self {
        RawSolitonConfig { lambdas: cfg.lambdas, centers: cfg.centers }
    }
}

impl SolitonConfig {
    pub fn new(lambdas: Vec<f64>, centers: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSolitons("at least one soliton is required".into()));
        }
        if lambdas.len() != centers.len() {
            return Err(Error::InvalidSolitons(format!(
                "{} lambdas but {} centers",
                lambdas.len(),
                centers.len()
            )));
        }
        if lambdas.iter().chain(&centers).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSolitons("parameters must be finite".into()));
        }
        if lambdas.iter().any(|&l| l >= 0.0) {
            return Err(Error::InvalidSolitons(format!("lambdas must be negative: {lambdas:?}")));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSolitons(format!("lambdas must be strictly increasing: {lambdas:?}")));
        }
        Ok(SolitonConfig { lambdas, centers })
    }

    pub fn single(lambda: f64, center: f64) -> Result<Self> {
        SolitonConfig::new(vec![lambda], vec![center])
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn with_centers(&self, centers: Vec<f64>) -> Result<Self> {
        SolitonConfig::new(self.lambdas.clone(), centers)
    }

    /// Centers moved along the flow: `c_j - 2 λ_j t`.
    pub fn at_time(&self, t: f64) -> SolitonConfig {
        let centers = self.lambdas.iter().zip(&self.centers).map(|(l, c)| c - 2.0 * l * t).collect();
        SolitonConfig { lambdas: self.lambdas.clone(), centers }
    }

    pub fn translated(&self, shift: f64) -> SolitonConfig {
        SolitonConfig {
            lambdas: self.lambdas.clone(),
            centers: self.centers.iter().map(|c| c + shift).collect(),
        }
    }

    /// Soliton speeds `2|λ_j|`.
    pub fn speeds(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| 2.0 * l.abs()).collect()
    }

    /// `½∫Q² = Σ 2π|λ|`.
    pub fn momentum(&self) -> f64 {
        self.lambdas.iter().map(|l| 2.0 * std::f64::consts::PI * l.abs()).sum()
    }

    /// `∫ ½ Q H Q' - ⅓ Q³ = -Σ 2π λ²`.
    pub fn energy(&self) -> f64 {
        self.lambdas.iter().map(|l| -2.0 * std::f64::consts::PI * l * l).sum()
    }
}

/// Closed-form single soliton `-4λ / (1 + 4λ²(x - c + 2λt)²)`.
pub fn soliton(lambda: f64, center: f64, t: f64, x: f64) -> f64 {
    let y = x - center + 2.0 * lambda * t;
    -4.0 * lambda / (1.0 + 4.0 * lambda * lambda * y * y)
}

/// The matrix `M(x)`, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct SolitonMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl SolitonMatrix {
    pub fn new(cfg: &SolitonConfig, x: f64) -> Self {
        let n = cfg.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        fill_matrix(cfg, x, &mut entries);
        SolitonMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.n + k]
    }

    /// `⟨z, M z⟩ = Σ conj(z_j) M_jk z_k`.
    pub fn quadratic_form(&self, z: &[Complex64]) -> Complex64 {
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += z[j].conj() * self.entries[j * n + k] * z[k];
            }
        }
        acc
    }

    /// Row-major inverse, or `None` if a pivot vanishes.
    pub fn inverse(&self) -> Option<Vec<Complex64>> {
        let mut lu = SmallLu::new(self.n);
        lu.a.copy_from_slice(&self.entries);
        if !lu.factor() {
            return None;
        }
        let n = self.n;
        let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            col[k] = Complex64::new(1.0, 0.0);
            lu.solve(&mut col);
            for j in 0..n {
                inv[j * n + k] = col[j];
            }
        }
        Some(inv)
    }
}

fn fill_matrix(cfg: &SolitonConfig, x: f64, out: &mut [Complex64]) {
    let n = cfg.len();
    for j in 0..n {
        for k in 0..n {
            out[j * n + k] = if j == k {
                Complex64::new(-0.5 / cfg.lambdas[j], -(x - cfg.centers[j]))
            } else {
                Complex64::new(-1.0 / (cfg.lambdas[j] - cfg.lambdas[k]), 0.0)
            };
        }
    }
}

/// Dense LU with partial pivoting for the tiny per-point systems.
struct SmallLu {
    n: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
}

impl SmallLu {
    fn new(n: usize) -> Self {
        SmallLu { n, a: vec![Complex64::new(0.0, 0.0); n * n], piv: vec![0; n] }
    }

    fn factor(&mut self) -> bool {
        let n = self.n;
        let a = &mut self.a;
        for col in 0..n {
            let (mut best, mut best_abs) = (col, a[col * n + col].norm());
            for row in col + 1..n {
                let v = a[row * n + col].norm();
                if v > best_abs {
                    best = row;
                    best_abs = v;
                }
            }
            if best_abs == 0.0 || !best_abs.is_finite() {
                return false;
            }
            self.piv[col] = best;
            if best != col {
                for k in 0..n {
                    a.swap(col * n + k, best * n + k);
                }
            }
            let pivot = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                a[row * n + col] = factor;
                for k in col + 1..n {
                    let upper = a[col * n + k];
                    a[row * n + k] -= factor * upper;
                }
            }
        }
        true
    }

    fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        let a = &self.a;
        for col in 0..n {
            b.swap(col, self.piv[col]);
        }
        for row in 0..n {
            let mut acc = b[row];
            for k in 0..row {
                acc -= a[row * n + k] * b[k];
            }
            b[row] = acc;
        }
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row * n + k] * b[k];
            }
            b[row] = acc / a[row * n + row];
        }
    }
}

/// Reusable per-thread workspace for pointwise profile evaluation.
pub struct ProfileEvaluator<'a> {
    cfg: &'a SolitonConfig,
    lu: SmallLu,
    rhs: Vec<Complex64>,
}

impl<'a> ProfileEvaluator<'a> {
    pub fn new(cfg: &'a SolitonConfig) -> Self {
        let n = cfg.len();
        ProfileEvaluator { cfg, lu: SmallLu::new(n), rhs: vec![Complex64::new(0.0, 0.0); n] }
    }

    fn factor_at(&mut self, x: f64) {
        fill_matrix(self.cfg, x, &mut self.lu.a);
        // Re⟨z, Mz⟩ = Σ|z_j|²/(2|λ_j|) > 0, so M(x) is never singular.
        let ok = self.lu.factor();
        debug_assert!(ok);
    }

    /// `2 Re tr M(x)^{-1}`.
    pub fn trace_form(&mut self, x: f64) -> f64 {
        if self.cfg.len() == 1 {
            return soliton(self.cfg.lambdas[0], self.cfg.centers[0], 0.0, x);
        }
        self.factor_at(x);
        let n = self.cfg.len();
        let mut trace = Complex64::new(0.0, 0.0);
        for k in 0..n {
            self.rhs.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            self.rhs[k] = Complex64::new(1.0, 0.0);
            self.lu.solve(&mut self.rhs);
            trace += self.rhs[k];
        }
        2.0 * trace.re
    }

    /// `2 Re Σ_{jk} [M(x)^{-1}]_{jk}`.
    pub fn sum_form(&mut self, x: f64) -> f64 {
        self.factor_at(x);
        self.rhs.iter_mut().for_each(|c| *c = Complex64::new(1.0, 0.0));
        self.lu.solve(&mut self.rhs);
        2.0 * self.rhs.iter().sum::<Complex64>().re
    }
}

/// Pointwise value of `Q_{Λ,c}` at `x`.
pub fn profile_at(cfg: &SolitonConfig, x: f64) -> f64 {
    ProfileEvaluator::new(cfg).trace_form(x)
}

/// Samples `Q_{Λ, c(t)}` on the grid.
pub fn profile(cfg: &SolitonConfig, grid: &Grid, t: f64) -> RealField {
    let moved = cfg.at_time(t);
    let mut samples = vec![0.0; grid.n_points()];
    samples.par_chunks_mut(512).enumerate().for_each(|(chunk, out)| {
        let mut eval = ProfileEvaluator::new(&moved);
        for (i, v) in out.iter_mut().enumerate() {
            *v = eval.trace_form(grid.x(chunk * 512 + i));
        }
    });
    RealField::new(grid.clone(), samples).expect("multisoliton profiles are finite")
}

/// Trace form and double-sum form of the profile at `x`.
pub fn representation_check(cfg: &SolitonConfig, x: f64) -> (f64, f64) {
    let mut eval = ProfileEvaluator::new(cfg);
    let trace = if cfg.len() == 1 {
        // Evaluate the 1x1 trace through the LU path too, not the closed form.
        eval.factor_at(x);
        eval.rhs[0] = Complex64::new(1.0, 0.0);
        eval.lu.solve(&mut eval.rhs);
        2.0 * eval.rhs[0].re
    } else {
        eval.trace_form(x)
    };
    (trace, eval.sum_form(x))
}

/// Reference solution sampled at each requested time.
pub fn exact_evolution(cfg: &SolitonConfig, grid: &Grid, times: &[f64]) -> Vec<RealField> {
    times.iter().map(|&t| profile(cfg, grid, t)).collect()
}

/// Sum of shifted multisolitons together with the merged configuration.
///
/// Each part `(cfg_j, x_j)` contributes `Q_{Λ_j, c_j}(x - x_j)`. The merged
/// configuration has centers `c_j + x_j` with all lambdas sorted ascending.
pub fn molecular_superposition(
    parts: &[(SolitonConfig, f64)],
    grid: &Grid,
) -> Result<(RealField, SolitonConfig)> {
    if parts.is_empty() {
        return Err(Error::InvalidSolitons("molecule needs at least one part".into()));
    }
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (cfg, shift) in parts {
        if !shift.is_finite() {
            return Err(Error::InvalidSolitons(format!("non-finite shift {shift}")));
        }
        pairs.extend(cfg.lambdas.iter().zip(&cfg.centers).map(|(&l, &c)| (l, c + shift)));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidSolitons(format!("lambda {} appears in more than one part", w[0].0)));
    }
    let merged =
        SolitonConfig::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())?;
    let mut sum = RealField::zeros(grid);
    for (cfg, shift) in parts {
        sum = sum.add(&profile(&cfg.translated(*shift), grid, 0.0))?;
    }
    Ok((sum, merged))
}

/// One row of a decay table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub x: f64,
    pub value: f64,
    pub envelope: f64,
}

impl DecayRow {
    pub fn ratio(&self) -> f64 {
        self.value / self.envelope
    }
}

/// `|Q(x)|` against `C max_j ⟨x - c_j⟩^{-2}`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub constant: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(DecayRow::ratio).fold(0.0, f64::max)
    }
}

fn japanese(y: f64) -> f64 {
    (1.0 + y * y).sqrt()
}

/// Tabulates the algebraic decay of the profile.
///
/// `C` is the largest ratio over the mid-range band `L/16 <= dist <= L/8`,
/// where `dist` is the distance to the nearest center.
pub fn decay_report(cfg: &SolitonConfig, grid: &Grid) -> DecayReport {
    let q = profile(cfg, grid, 0.0);
    let shape = |x: f64| -> f64 { cfg.centers.iter().map(|c| japanese(x - c).powi(-2)).fold(0.0, f64::max) };
    let nearest = |x: f64| -> f64 { cfg.centers.iter().map(|c| (x - c).abs()).fold(f64::INFINITY, f64::min) };
    let (lo, hi) = (grid.length() / 16.0, grid.length() / 8.0);
    let constant = grid
        .points()
        .into_iter()
        .zip(q.samples())
        .filter(|(x, _)| (lo..=hi).contains(&nearest(*x)))
        .map(|(x, v)| v.abs() / shape(x))
        .fold(0.0, f64::max);
    let constant = if constant > 0.0 { constant } else { 1.0 };
    let rows = grid
        .points()
        .into_iter()
        .zip(q.samples())
        .map(|(x, v)| DecayRow { x, value: v.abs(), envelope: constant * shape(x) })
        .collect();
    DecayReport { constant, rows }
}
