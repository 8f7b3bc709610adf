//! Periodic discretization of the line and its Fourier dictionary.
//!
//! The domain is `[-L/2, L/2)` with `n` equispaced samples `x_j = -L/2 + j dx`.
//! Fourier coefficients follow the torus convention
//!
//! ```text
//! c_k = (1/L) ∫ f(x) e^{-ikx} dx,    f(x) = Σ_k c_k e^{ikx},
//! ```
//!
//! so Parseval reads `∫|f|² = L Σ|c_k|²`. Coefficient arrays are stored in FFT
//! slot order: slot `i < n/2` holds mode `i`, slot `i >= n/2` holds mode `i - n`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid of `n_points` samples on a box of length `L`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "GridParams", into = "GridParams")]
pub struct Grid {
    length: f64,
    n_points: usize,
    plans: Arc<Plans>,
}

/// Serialized form of a [`Grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub length: f64,
    pub n_points: usize,
}

impl TryFrom<GridParams> for Grid {
    type Error = Error;

    fn try_from(p: GridParams) -> Result<Self> {
        Grid::new(p.length, p.n_points)
    }
}

impl From<Grid> for GridParams {
    fn from(g: Grid) -> Self {
        GridParams { length: g.length, n_points: g.n_points }
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("length", &self.length).field("n_points", &self.n_points).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.length.to_bits() == other.length.to_bits() && self.n_points == other.n_points
    }
}

impl Default for Grid {
    /// `L = 256`, `n = 4096`.
    fn default() -> Self {
        Grid::new(256.0, 4096).expect("default grid is valid")
    }
}

impl Grid {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_points must be a power of two >= 4, got {n_points}")));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        };
        Ok(Grid { length, n_points, plans: Arc::new(plans) })
    }

    pub fn params(&self) -> GridParams {
        GridParams { length: self.length, n_points: self.n_points }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Wavenumber spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest resolved |k| (the Nyquist wavenumber).
    pub fn max_wavenumber(&self) -> f64 {
        self.dk() * (self.n_points / 2) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed mode number held in FFT slot `slot`.
    pub fn mode(&self, slot: usize) -> i64 {
        let n = self.n_points as i64;
        let s = slot as i64;
        if s < n / 2 {
            s
        } else {
            s - n
        }
    }

    /// FFT slot of mode `m`, if it is resolved.
    pub fn slot(&self, m: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if m >= -half && m < half {
            Some(m.rem_euclid(self.n_points as i64) as usize)
        } else {
            None
        }
    }

    pub fn wavenumber(&self, slot: usize) -> f64 {
        self.mode(slot) as f64 * self.dk()
    }

    /// Wavenumbers in FFT slot order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.wavenumber(i)).collect()
    }

    /// Unnormalized forward DFT in place (`Σ_j f_j e^{-2πi jm/n}`).
    pub fn fft_forward(&self, buf: &mut [Complex64]) {
        self.plans.forward.process(buf);
    }

    /// Unnormalized inverse DFT in place.
    pub fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.plans.inverse.process(buf);
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_length: self.length,
                left_points: self.n_points,
                right_length: other.length,
                right_points: other.n_points,
            })
        }
    }
}

/// Sign `(-1)^m` that converts between the sample origin at `-L/2` and the DFT origin.
#[inline]
fn origin_phase(slot: usize) -> f64 {
    if slot.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Real samples on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                samples.len()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite sample at index {j}")));
        }
        Ok(RealField { grid, samples })
    }

    pub fn zeros(grid: &Grid) -> Self {
        RealField { grid: grid.clone(), samples: vec![0.0; grid.n_points()] }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = grid.points().into_iter().map(f).collect();
        RealField::new(grid.clone(), samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn scaled(&self, a: f64) -> RealField {
        RealField { grid: self.grid.clone(), samples: self.samples.iter().map(|v| a * v).collect() }
    }

    pub fn add(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> Result<RealField> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &RealField, op: impl Fn(f64, f64) -> f64) -> Result<RealField> {
        self.grid.ensure_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| op(a, b)).collect();
        Ok(RealField { grid: self.grid.clone(), samples })
    }

    /// `sqrt(∫ u² dx)` by the rectangle rule (exact for resolved trigonometric polynomials).
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Full set of torus Fourier coefficients of a field, in FFT slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Grid) -> Self {
        Spectrum { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()] }
    }

    /// Coefficients of arbitrary complex samples.
    pub fn from_complex_samples(grid: &Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n_points(),
                samples.len()
            )));
        }
        let mut buf = samples.to_vec();
        grid.fft_forward(&mut buf);
        let scale = 1.0 / grid.n_points() as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            *c *= origin_phase(i) * scale;
        }
        Ok(Spectrum { grid: grid.clone(), coeffs: buf })
    }

    /// Builds a spectrum from coefficients already in slot order.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.n_points(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { grid: grid.clone(), coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of mode `m` (zero when unresolved).
    pub fn coeff(&self, m: i64) -> Complex64 {
        self.grid.slot(m).map_or(Complex64::new(0.0, 0.0), |s| self.coeffs[s])
    }

    pub fn to_complex_samples(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            self.coeffs.iter().enumerate().map(|(i, c)| c * origin_phase(i)).collect();
        self.grid.fft_inverse(&mut buf);
        buf
    }

    /// Real part of the reconstruction.
    pub fn to_real_field(&self) -> RealField {
        let samples = self.to_complex_samples().into_iter().map(|z| z.re).collect();
        RealField { grid: self.grid.clone(), samples }
    }
}

/// Nonnegative-frequency coefficients `c_0, c_{Δk}, …, c_{(K-1)Δk}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl HardyField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() > grid.n_points() / 2 {
            return Err(Error::InsufficientResolution { modes: coeffs.len(), limit: grid.n_points() / 2 });
        }
        Ok(HardyField { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn to_samples(&self) -> Vec<Complex64> {
        self.to_spectrum().to_complex_samples()
    }
}

/// Anything with a torus Fourier representation.
pub trait SpectralField {
    fn grid(&self) -> &Grid;
    fn to_spectrum(&self) -> Spectrum;
}

impl SpectralField for RealField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn to_spectrum(&self) -> Spectrum {
        to_coefficients(self)
    }
}

impl SpectralField for HardyField {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn to_spectrum(&self) -> Spectrum {
        let mut s = Spectrum::zeros(&self.grid);
        s.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        s
    }
}

impl SpectralField for Spectrum {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn to_spectrum(&self) -> Spectrum {
        self.clone()
    }
}

/// Sobolev exponent and frequency offset of the `H^σ_κ` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub sigma: f64,
    pub kappa: f64,
}

impl NormSpec {
    pub const L2: NormSpec = NormSpec { sigma: 0.0, kappa: 1.0 };
    pub const H_HALF: NormSpec = NormSpec { sigma: 0.5, kappa: 1.0 };
    pub const H_MINUS_QUARTER: NormSpec = NormSpec { sigma: -0.25, kappa: 1.0 };

    pub fn new(sigma: f64, kappa: f64) -> Result<Self> {
        let spec = NormSpec { sigma, kappa };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || !(self.kappa >= 1.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "norm requires finite sigma and kappa >= 1, got sigma={} kappa={}",
                self.sigma, self.kappa
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, k: f64) -> f64 {
        (k.abs() + self.kappa).powf(2.0 * self.sigma)
    }
}

/// Torus Fourier coefficients of a real field.
pub fn to_coefficients(f: &RealField) -> Spectrum {
    let samples: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Spectrum::from_complex_samples(&f.grid, &samples).expect("length checked at construction")
}

/// Hilbert transform, the multiplier `-i sgn(k)`.
///
/// The unpaired Nyquist mode is dropped so the result stays real.
pub fn hilbert(f: &RealField) -> RealField {
    let grid = f.grid();
    let mut s = to_coefficients(f);
    let nyquist = grid.n_points() / 2;
    for (i, c) in s.coeffs.iter_mut().enumerate() {
        let m = grid.mode(i);
        *c = if i == nyquist || m == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, -(m.signum() as f64))
        };
    }
    s.to_real_field()
}

/// Szegő projection onto nonnegative frequencies; the zero mode is kept in full.
pub fn szego(f: &RealField) -> HardyField {
    spectrum_to_hardy(&to_coefficients(f))
}

/// Szegő projection of complex samples.
pub fn szego_samples(grid: &Grid, samples: &[Complex64]) -> Result<HardyField> {
    Ok(spectrum_to_hardy(&Spectrum::from_complex_samples(grid, samples)?))
}

fn spectrum_to_hardy(s: &Spectrum) -> HardyField {
    let half = s.grid.n_points() / 2;
    HardyField { grid: s.grid.clone(), coeffs: s.coeffs[..half].to_vec() }
}

/// `sqrt(L Σ_k (|k| + κ)^{2σ} |c_k|²)`.
pub fn sobolev_norm<F: SpectralField + ?Sized>(f: &F, spec: NormSpec) -> f64 {
    let s = f.to_spectrum();
    spectrum_norm(&s, spec)
}

pub(crate) fn spectrum_norm(s: &Spectrum, spec: NormSpec) -> f64 {
    let grid = s.grid();
    let sum: f64 =
        s.coeffs.iter().enumerate().map(|(i, c)| spec.weight(grid.wavenumber(i)) * c.norm_sqr()).sum();
    (grid.length() * sum).sqrt()
}

/// The pairing `∫ conj(g) f dx = L Σ_k conj(c_k(g)) c_k(f)`.
pub fn inner<G, F>(g: &G, f: &F) -> Result<Complex64>
where
    G: SpectralField + ?Sized,
    F: SpectralField + ?Sized,
{
    g.grid().ensure_same(f.grid())?;
    let (sg, sf) = (g.to_spectrum(), f.to_spectrum());
    let sum: Complex64 = sg.coeffs.iter().zip(&sf.coeffs).map(|(a, b)| a.conj() * b).sum();
    Ok(sum * g.grid().length())
}

/// Real band-limited Gaussian noise with `‖noise‖_{target} = delta`.
///
/// Modes `0 < |k| <= k_max` receive independent standard complex Gaussian
/// amplitudes (conjugate-symmetrized), and the field is then rescaled.
pub fn band_limited_noise(
    grid: &Grid,
    k_max: f64,
    seed: u64,
    target: NormSpec,
    delta: f64,
) -> Result<RealField> {
    target.validate()?;
    if !(k_max > 0.0 && k_max <= grid.max_wavenumber()) {
        return Err(Error::InvalidParameter(format!(
            "k_max must lie in (0, {}], got {k_max}",
            grid.max_wavenumber()
        )));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(RealField::zeros(grid));
    }
    let top = ((k_max / grid.dk()) + 1e-9).floor() as i64;
    let top = top.min(grid.n_points() as i64 / 2 - 1);
    if top < 1 {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} is below the wavenumber spacing {}",
            grid.dk()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Spectrum::zeros(grid);
    for m in 1..=top {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let c = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        s.coeffs[grid.slot(m).unwrap()] = c;
        s.coeffs[grid.slot(-m).unwrap()] = c.conj();
    }
    let norm = spectrum_norm(&s, target);
    for c in s.coeffs.iter_mut() {
        *c *= delta / norm;
    }
    Ok(s.to_real_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_grid() -> Grid {
        Grid::new(2.0 * PI * 4.0, 64).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(10.0, 100).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        assert!(Grid::new(10.0, 64).is_ok());
    }

    #[test]
    fn default_grid_resolution() {
        let g = Grid::default();
        assert_eq!(g.n_points(), 4096);
        assert!(close(g.dx(), 0.0625, 1e-15));
        assert!(close(g.dx() * g.n_points() as f64, g.length(), 1e-12));
        assert!(close(g.max_wavenumber(), 50.265_482_457_436_69, 1e-9));
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = small_grid();
        let k1 = g.dk();
        let f = RealField::from_fn(&g, |x| (k1 * x).cos()).unwrap();
        let s = to_coefficients(&f);
        for i in 0..g.n_points() {
            let m = g.mode(i);
            let expect = if m.abs() == 1 { 0.5 } else { 0.0 };
            assert!((s.coeffs()[i] - Complex64::new(expect, 0.0)).norm() < 1e-14, "mode {m}");
        }
    }

    #[test]
    fn constant_is_the_zero_mode() {
        let g = small_grid();
        let s = to_coefficients(&RealField::from_fn(&g, |_| 1.0).unwrap());
        assert!((s.coeff(0) - 1.0).norm() < 1e-15);
        assert!(s.coeffs().iter().skip(1).all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn lorentzian_mean_matches_its_integral() {
        // Frozen from ∫_{-128}^{128} 2/(1+x²) dx = 4 atan(128); the remaining line mass is the tail.
        let g = Grid::default();
        let f = RealField::from_fn(&g, |x| 2.0 / (1.0 + x * x)).unwrap();
        let c0 = to_coefficients(&f).coeff(0).re;
        let truncated = 4.0 * 128.0_f64.atan() / 256.0;
        assert!(close(c0, truncated, 1e-10));
        assert!(close(c0, 2.0 * PI / 256.0, 2e-4));
    }

    #[test]
    fn hilbert_of_trig_modes() {
        let g = small_grid();
        let k = 3.0 * g.dk();
        let h = hilbert(&RealField::from_fn(&g, |x| (k * x).cos()).unwrap());
        let s = hilbert(&RealField::from_fn(&g, |x| (k * x).sin()).unwrap());
        for (j, x) in g.points().into_iter().enumerate() {
            assert!(close(h.samples()[j], (k * x).sin(), 1e-13));
            assert!(close(s.samples()[j], -(k * x).cos(), 1e-13));
        }
        let c = hilbert(&RealField::from_fn(&g, |_| 1.0).unwrap());
        assert!(c.max_abs() < 1e-15);
    }

    #[test]
    fn szego_of_cosine_and_of_a_hardy_exponential() {
        let g = small_grid();
        let k = 2.0 * g.dk();
        let h = szego(&RealField::from_fn(&g, |x| (k * x).cos()).unwrap());
        for (m, c) in h.coeffs().iter().enumerate() {
            let expect = if m == 2 { 0.5 } else { 0.0 };
            assert!((c - expect).norm() < 1e-14);
        }
        let samples: Vec<Complex64> =
            g.points().into_iter().map(|x| Complex64::new(0.0, k * x).exp()).collect();
        let h = szego_samples(&g, &samples).unwrap();
        let back = h.to_samples();
        for (a, b) in back.iter().zip(&samples) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn szego_norm_bookkeeping() {
        let g = small_grid();
        let f = RealField::from_fn(&g, |x| 0.3 + (x / 2.0).cos() + 0.2 * (1.5 * x).sin()).unwrap();
        let h = szego(&f);
        let c = to_coefficients(&f);
        // Oracle: direct coefficient sums.
        let direct: f64 =
            g.length() * (0..g.n_points() as i64 / 2).map(|m| c.coeff(m).norm_sqr()).sum::<f64>();
        let lhs = sobolev_norm(&h, NormSpec::L2).powi(2);
        assert!(close(lhs, direct, 1e-12));
        let rhs = 0.5 * f.l2_norm().powi(2) + 0.5 * g.length() * c.coeff(0).re.powi(2);
        assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn sobolev_norm_of_a_single_mode() {
        let g = small_grid();
        let k = 5.0 * g.dk();
        let samples: Vec<Complex64> =
            g.points().into_iter().map(|x| Complex64::new(0.0, k * x).exp()).collect();
        let s = Spectrum::from_complex_samples(&g, &samples).unwrap();
        let spec = NormSpec::new(0.7, 2.0).unwrap();
        let expect = g.length().sqrt() * (k + 2.0_f64).powf(0.7);
        assert!(close(sobolev_norm(&s, spec), expect, 1e-12 * expect));
        assert!(NormSpec::new(0.0, 0.5).is_err());
    }

    #[test]
    fn negative_sigma_norm_decreases_with_kappa() {
        let g = small_grid();
        let f = RealField::from_fn(&g, |x| (x / 4.0).cos() + (2.0 * x).sin()).unwrap();
        let s = to_coefficients(&f);
        for &(kappa, bigger) in &[(1.0, 2.0), (2.0, 5.0)] {
            let a = sobolev_norm(&s, NormSpec::new(-0.25, kappa).unwrap());
            let b = sobolev_norm(&s, NormSpec::new(-0.25, bigger).unwrap());
            // Oracle: evaluate both sums term by term.
            let term = |kap: f64| -> f64 {
                (0..g.n_points())
                    .map(|i| (g.wavenumber(i).abs() + kap).powf(-0.5) * s.coeffs()[i].norm_sqr())
                    .sum::<f64>()
            };
            assert!(term(bigger) < term(kappa));
            assert!(b < a);
        }
    }

    #[test]
    fn inner_products_of_exponentials() {
        let g = small_grid();
        let e = |m: f64| -> Spectrum {
            let k = m * g.dk();
            let samples: Vec<Complex64> =
                g.points().into_iter().map(|x| Complex64::new(0.0, k * x).exp()).collect();
            Spectrum::from_complex_samples(&g, &samples).unwrap()
        };
        assert!((inner(&e(3.0), &e(3.0)).unwrap() - g.length()).norm() < 1e-12);
        assert!(inner(&e(3.0), &e(4.0)).unwrap().norm() < 1e-12);
        let other = Grid::new(10.0, 64).unwrap();
        let z = RealField::zeros(&other);
        assert!(matches!(inner(&e(1.0), &z), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn lorentzian_l2_mass() {
        // ∫ (2/(1+x²))² dx = 2π on the line; the |x| > 128 tail is below 1e-6.
        let g = Grid::default();
        let q = RealField::from_fn(&g, |x| 2.0 / (1.0 + x * x)).unwrap();
        assert!(close(inner(&q, &q).unwrap().re, 2.0 * PI, 1e-5));
    }

    #[test]
    fn noise_is_deterministic_and_normalized() {
        let g = Grid::default();
        let spec = NormSpec::H_HALF;
        let a = band_limited_noise(&g, 3.0, 7, spec, 0.01).unwrap();
        let b = band_limited_noise(&g, 3.0, 7, spec, 0.01).unwrap();
        assert_eq!(a, b);
        assert!(close(sobolev_norm(&a, spec), 0.01, 1e-12));
        let s = to_coefficients(&a);
        for i in 0..g.n_points() {
            if g.wavenumber(i).abs() > 3.0 {
                assert!(s.coeffs()[i].norm() < 1e-15);
            }
        }
        assert!(s.coeff(0).norm() < 1e-15);
        let zero = band_limited_noise(&g, 3.0, 7, spec, 0.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        assert!(band_limited_noise(&g, 0.0, 7, spec, 0.1).is_err());
        assert!(band_limited_noise(&g, 1e3, 7, spec, 0.1).is_err());
    }

    fn band_limited(g: &Grid, mean: f64, modes: &[(f64, f64)]) -> RealField {
        let mut s = Spectrum::zeros(g);
        s.coeffs_mut()[0] = Complex64::new(mean, 0.0);
        for (m, &(re, im)) in modes.iter().enumerate() {
            let m = m as i64 + 1;
            let c = Complex64::new(re, im);
            s.coeffs_mut()[g.slot(m).unwrap()] = c;
            s.coeffs_mut()[g.slot(-m).unwrap()] = c.conj();
        }
        s.to_real_field()
    }

    fn modes_strategy() -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
        (-1.0..1.0f64, prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..20))
    }

    proptest! {
        #[test]
        fn round_trip((mean, modes) in modes_strategy()) {
            let g = small_grid();
            let f = band_limited(&g, mean, &modes);
            let back = to_coefficients(&f).to_real_field();
            let scale = f.max_abs().max(1e-300);
            for (a, b) in f.samples().iter().zip(back.samples()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn hilbert_squares_to_minus_one((_mean, modes) in modes_strategy()) {
            let g = small_grid();
            let f = band_limited(&g, 0.0, &modes);
            let hh = hilbert(&hilbert(&f));
            for (a, b) in f.samples().iter().zip(hh.samples()) {
                prop_assert!((a + b).abs() <= 1e-12 * (1.0 + f.max_abs()));
            }
        }

        #[test]
        fn szego_is_half_of_one_plus_i_hilbert((mean, modes) in modes_strategy()) {
            let g = small_grid();
            let f = band_limited(&g, mean, &modes);
            let p = szego(&f).to_samples();
            let h = hilbert(&f);
            for (j, pj) in p.iter().enumerate() {
                let expect = Complex64::new(0.5 * f.samples()[j] + 0.5 * mean, 0.5 * h.samples()[j]);
                prop_assert!((pj - expect).norm() <= 1e-12 * (1.0 + f.max_abs()));
            }
        }

        #[test]
        fn parseval((mean, modes) in modes_strategy()) {
            let g = small_grid();
            let f = band_limited(&g, mean, &modes);
            let quad = f.l2_norm().powi(2);
            let coef = inner(&f, &f).unwrap().re;
            prop_assert!((quad - coef).abs() <= 1e-10 * quad.max(1e-300));
        }

        #[test]
        fn duality_bound(
            (m1, a) in modes_strategy(),
            (m2, b) in modes_strategy(),
            sigma in -1.0..1.0f64,
            kappa in 1.0..4.0f64,
        ) {
            let g = small_grid();
            let f = band_limited(&g, m1, &a);
            let h = band_limited(&g, m2, &b);
            let lhs = inner(&h, &f).unwrap().norm();
            let rhs = sobolev_norm(&h, NormSpec::new(-sigma, kappa).unwrap())
                * sobolev_norm(&f, NormSpec::new(sigma, kappa).unwrap());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-14);
        }
    }
}
