//! Distance from a field to the multisoliton manifold `{Q_{Λ,c} : c ∈ R^N}`.
//!
//! Centers are initialized from the peaks of a smoothed copy of the data and
//! refined by a Nelder–Mead simplex search on the Sobolev distance.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::{sobolev_norm, to_coefficients, NormSpec, RealField};
use crate::multisoliton::{profile, SolitonConfig};

/// Cutoff `k_c` of the Gaussian smoothing multiplier `e^{-(k/k_c)²}`.
const SMOOTHING_CUTOFF: f64 = 2.0;

/// Peaks lower than this fraction of the smallest expected smoothed height are ignored.
const PEAK_THRESHOLD_FRACTION: f64 = 0.5;

/// Start of a fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialGuess {
    /// Centers paired with the ascending lambdas.
    pub centers: Vec<f64>,
    /// Fewer peaks than solitons were found and some centers were padded.
    pub low_confidence: bool,
}

/// Maximum of the smoothed profile of a single soliton,
/// `∫ e^{-|k|/(2|λ|) - (k/k_c)²} dk`, by the trapezoidal rule.
pub fn smoothed_peak_height(lambda: f64) -> f64 {
    let a = 1.0 / (2.0 * lambda.abs());
    let h = 1e-3;
    let top = 12.0 * SMOOTHING_CUTOFF;
    let steps = (top / h) as usize;
    let f = |k: f64| (-a * k - (k / SMOOTHING_CUTOFF).powi(2)).exp();
    let interior: f64 = (1..steps).map(|i| f(i as f64 * h)).sum();
    2.0 * h * (interior + 0.5 * (f(0.0) + f(top)))
}

fn smoothed(u: &RealField) -> Vec<f64> {
    let grid = u.grid();
    let mut s = to_coefficients(u);
    for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
        *c *= (-(grid.wavenumber(i) / SMOOTHING_CUTOFF).powi(2)).exp();
    }
    s.to_real_field().into_samples()
}

/// Heuristic centers from the peaks of the smoothed data.
///
/// The `N` tallest local maxima above the threshold are assigned greedily:
/// tallest peak to the most negative λ. Missing peaks are padded with the
/// position of the tallest peak found (a collision hypothesis) or, when no
/// peak is found at all, with equally spaced positions.
pub fn initial_centers(u: &RealField, lambdas: &[f64]) -> InitialGuess {
    let grid = u.grid();
    let n = lambdas.len();
    let v = smoothed(u);
    let m = v.len();
    let threshold = PEAK_THRESHOLD_FRACTION
        * lambdas.iter().map(|&l| smoothed_peak_height(l)).fold(f64::INFINITY, f64::min);
    let mut peaks: Vec<(f64, f64)> = (0..m)
        .filter(|&j| {
            let (l, c, r) = (v[(j + m - 1) % m], v[j], v[(j + 1) % m]);
            c > threshold && c > l && c >= r
        })
        .map(|j| {
            let (l, c, r) = (v[(j + m - 1) % m], v[j], v[(j + 1) % m]);
            let denom = l - 2.0 * c + r;
            let offset = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            (grid.x(j) + offset * grid.dx(), c)
        })
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(n);
    let low_confidence = peaks.len() < n;
    let mut positions: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    while positions.len() < n {
        let pad = match peaks.first() {
            Some(p) => p.0,
            None => -0.5 * grid.length() + (positions.len() + 1) as f64 * grid.length() / (n + 1) as f64,
        };
        positions.push(pad);
    }
    // Lambdas are ascending, so index 0 has the largest |λ| and gets the tallest peak.
    if !low_confidence {
        positions = undo_interaction_shift(&positions, lambdas);
    }
    InitialGuess { centers: positions, low_confidence }
}

/// Converts peak positions into centers.
///
/// Expanding `tr M^{-1}` near `c_j` for well-separated solitons shows that the
/// peak sits at `c_j + Σ_{k≠j} 1/((λ_j − λ_k)² (c_j − c_k))`; the first-order
/// inverse of that shift is applied to peaks farther apart than a few widths.
fn undo_interaction_shift(peaks: &[f64], lambdas: &[f64]) -> Vec<f64> {
    let min_separation = 4.0 / lambdas.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    peaks
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let shift: f64 = (0..peaks.len())
                .filter(|&k| k != j && (p - peaks[k]).abs() > min_separation)
                .map(|k| 1.0 / ((lambdas[j] - lambdas[k]).powi(2) * (p - peaks[k])))
                .sum();
            p - shift
        })
        .collect()
}

/// `‖u − Q_{Λ,c}‖_{H^s_κ}`.
pub fn distance(u: &RealField, lambdas: &[f64], centers: &[f64], norm: NormSpec) -> Result<f64> {
    let cfg = SolitonConfig::new(lambdas.to_vec(), centers.to_vec())?;
    Ok(sobolev_norm(&u.sub(&profile(&cfg, u.grid(), 0.0))?, norm))
}

/// Simplex search parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Converged once the simplex diameter falls below this.
    pub x_tol: f64,
    /// Evaluation budget per soliton.
    pub evals_per_soliton: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { x_tol: 1e-10, evals_per_soliton: 500, initial_step: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub centers: Vec<f64>,
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub initial_guess: Vec<f64>,
    pub initial_distance: f64,
    pub low_confidence: bool,
}

impl FitResult {
    /// `{"centers", "distance", "converged", "iterations"}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "centers": self.centers,
            "distance": self.distance,
            "converged": self.converged,
            "iterations": self.iterations,
        })
    }

    pub fn config(&self, lambdas: &[f64]) -> Result<SolitonConfig> {
        SolitonConfig::new(lambdas.to_vec(), self.centers.clone())
    }
}

/// Fits the centers of `Λ` to `u`, starting from [`initial_centers`].
pub fn fit(u: &RealField, lambdas: &[f64], norm: NormSpec, opts: FitOptions) -> Result<FitResult> {
    validate_lambdas(lambdas)?;
    let guess = initial_centers(u, lambdas);
    let mut result = fit_from(u, lambdas, &guess.centers, norm, opts)?;
    result.low_confidence = guess.low_confidence;
    Ok(result)
}

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    SolitonConfig::new(lambdas.to_vec(), vec![0.0; lambdas.len()]).map(|_| ())
}

/// Fits the centers of `Λ` to `u` from an explicit starting point.
pub fn fit_from(
    u: &RealField,
    lambdas: &[f64],
    start: &[f64],
    norm: NormSpec,
    opts: FitOptions,
) -> Result<FitResult> {
    validate_lambdas(lambdas)?;
    norm.validate()?;
    if start.len() != lambdas.len() || start.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need {} finite starting centers, got {start:?}",
            lambdas.len()
        )));
    }
    if !(opts.x_tol > 0.0 && opts.initial_step > 0.0 && opts.evals_per_soliton > 0) {
        return Err(Error::InvalidParameter(format!("invalid fit options {opts:?}")));
    }
    let objective = |c: &[f64]| distance(u, lambdas, c, norm).expect("validated inputs");
    let initial_distance = objective(start);
    let budget = opts.evals_per_soliton * lambdas.len();
    let outcome = nelder_mead(objective, start, initial_distance, opts.initial_step, opts.x_tol, budget);
    Ok(FitResult {
        centers: outcome.point,
        distance: outcome.value,
        iterations: outcome.iterations,
        converged: outcome.converged,
        initial_guess: start.to_vec(),
        initial_distance,
        low_confidence: false,
    })
}

struct SimplexOutcome {
    point: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.0.iter().zip(&b.0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½, shrink ½).
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    start: &[f64],
    start_value: f64,
    step: f64,
    x_tol: f64,
    max_evals: usize,
) -> SimplexOutcome {
    let n = start.len();
    let mut evals = 1;
    let mut simplex = vec![(start.to_vec(), start_value)];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        let v = f(&p);
        evals += 1;
        simplex.push((p, v));
    }
    let mut iterations = 0;
    let along = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex) < x_tol {
            let (point, value) = simplex.swap_remove(0);
            return SimplexOutcome { point, value, iterations, converged: true };
        }
        if evals >= max_evals {
            let (point, value) = simplex.swap_remove(0);
            return SimplexOutcome { point, value, iterations, converged: false };
        }
        iterations += 1;
        let centroid: Vec<f64> =
            (0..n).map(|d| simplex[..n].iter().map(|v| v.0[d]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let reflected = along(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = along(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            evals += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        // Outside contraction if the reflection improved on the worst, inside otherwise.
        let (candidate, reference) = if fr < worst.1 {
            (along(&centroid, &worst.0, -0.5), fr)
        } else {
            (along(&centroid, &worst.0, 0.5), worst.1)
        };
        let fc = f(&candidate);
        evals += 1;
        if fc < reference {
            simplex[n] = (candidate, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            vertex.0 = along(&best, &vertex.0, 0.5);
            vertex.1 = f(&vertex.0);
            evals += 1;
        }
    }
}
