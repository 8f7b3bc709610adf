//! Pseudospectral time integration of `∂_t u = H∂_x²u − 2u∂_x u`.
//!
//! The linear part has the Fourier symbol `i k|k|` and is integrated exactly;
//! the nonlinearity `−∂_x(u²)` is dealiased and handled by the fourth-order
//! exponential time-differencing Runge–Kutta scheme (ETDRK4).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};
use crate::io::{write_snapshot, CsvTable};
use crate::lax::{assemble, default_modes, grid_energy, grid_momentum, BOUND_STATE_THRESHOLD};

/// Amplitude above which a run is declared to have blown up.
pub const BLOW_UP_AMPLITUDE: f64 = 1e6;

/// Number of contour nodes used for the φ-functions near `z = 0`.
const CONTOUR_POINTS: usize = 32;

/// Time-stepping and monitoring parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias_fraction: f64,
    /// Steps between monitor records (and stored snapshots).
    pub monitor_stride: usize,
    /// κ at which `β(κ; u(t))` is monitored; `None` disables the β monitor.
    /// Absent from a config file means disabled.
    #[serde(default)]
    pub kappa_monitor: Option<f64>,
    /// Record the negative Lax eigenvalues at every monitor time (expensive).
    pub track_eigenvalues: bool,
    /// Retained Lax modes for the β and eigenvalue monitors (default `n/4`).
    pub lax_modes: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            t_end: 10.0,
            dealias_fraction: 2.0 / 3.0,
            monitor_stride: 100,
            kappa_monitor: Some(2.0),
            track_eigenvalues: false,
            lax_modes: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        if self.monitor_stride == 0 {
            return Err(Error::Config("monitor_stride must be positive".into()));
        }
        if let Some(k) = self.kappa_monitor {
            if !k.is_finite() {
                return Err(Error::Config(format!("kappa_monitor must be finite, got {k}")));
            }
        }
        self.steps()?;
        Ok(())
    }

    /// Number of steps, requiring `t_end` to be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::Config(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

fn phi_direct(z: Complex64) -> [Complex64; 4] {
    let ez = z.exp();
    let z3 = z * z * z;
    [
        ((z * 0.5).exp() - 1.0) / z,
        (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3,
        (2.0 + z + ez * (z - 2.0)) / z3,
        (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3,
    ]
}

/// ETDRK4 coefficients: contour averages for `|z| < ½`, direct formulas otherwise.
fn phi_functions(z: Complex64) -> [Complex64; 4] {
    if z.norm() >= 0.5 {
        return phi_direct(z);
    }
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for p in 0..CONTOUR_POINTS {
        let theta = 2.0 * std::f64::consts::PI * (p as f64 + 0.5) / CONTOUR_POINTS as f64;
        let vals = phi_direct(z + Complex64::from_polar(1.0, theta));
        for (a, v) in acc.iter_mut().zip(vals) {
            *a += v;
        }
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

/// Precomputed ETDRK4 propagator for a fixed grid and time step.
pub struct Etdrk4 {
    grid: Grid,
    dt: f64,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    /// `-ik` on dealiased modes, zero elsewhere.
    deriv: Vec<Complex64>,
    scratch: Vec<Complex64>,
    stages: [Vec<Complex64>; 6],
}

fn dealiased_derivative(grid: &Grid, fraction: f64) -> Vec<Complex64> {
    let cutoff = fraction * grid.max_wavenumber();
    let nyquist = grid.n_points() / 2;
    (0..grid.n_points())
        .map(|i| {
            let k = grid.wavenumber(i);
            if i == nyquist || k.abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -k)
            }
        })
        .collect()
}

impl Etdrk4 {
    pub fn new(grid: &Grid, dt: f64, dealias_fraction: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        let n = grid.n_points();
        let (mut e, mut e2, mut q, mut f1, mut f2, mut f3) = (vec![], vec![], vec![], vec![], vec![], vec![]);
        for i in 0..n {
            let k = grid.wavenumber(i);
            let z = Complex64::new(0.0, dt * k * k.abs());
            let [pq, p1, p2, p3] = phi_functions(z);
            e.push(z.exp());
            e2.push((z * 0.5).exp());
            q.push(pq * dt);
            f1.push(p1 * dt);
            f2.push(p2 * dt);
            f3.push(p3 * dt);
        }
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Ok(Etdrk4 {
            grid: grid.clone(),
            dt,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            deriv: dealiased_derivative(grid, dealias_fraction),
            scratch: zero.clone(),
            stages: std::array::from_fn(|_| zero.clone()),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Nonlinear term of the unnormalized transform `v`, written to `out`.
    fn nonlinear(&mut self, v: &[Complex64], out_index: usize) -> f64 {
        let n = self.grid.n_points() as f64;
        self.scratch.copy_from_slice(v);
        self.grid.fft_inverse(&mut self.scratch);
        let mut max = 0.0f64;
        for c in self.scratch.iter_mut() {
            let u = c.re / n;
            max = if u.is_finite() { max.max(u.abs()) } else { f64::INFINITY };
            *c = Complex64::new(u * u, 0.0);
        }
        self.grid.fft_forward(&mut self.scratch);
        let out = &mut self.stages[out_index];
        for ((o, s), d) in out.iter_mut().zip(&self.scratch).zip(&self.deriv) {
            *o = s * d;
        }
        max
    }

    /// One step on the unnormalized transform `v`; returns `max |u|` at the step start.
    pub fn step_spectral(&mut self, v: &mut [Complex64]) -> f64 {
        const NV: usize = 0;
        const NA: usize = 1;
        const NB: usize = 2;
        const NC: usize = 3;
        const A: usize = 4;
        const TMP: usize = 5;
        let n = v.len();
        let max = self.nonlinear(v, NV);
        let mut a = std::mem::take(&mut self.stages[A]);
        for i in 0..n {
            a[i] = self.e2[i] * v[i] + self.q[i] * self.stages[NV][i];
        }
        self.nonlinear(&a, NA);
        let mut b = std::mem::take(&mut self.stages[TMP]);
        for i in 0..n {
            b[i] = self.e2[i] * v[i] + self.q[i] * self.stages[NA][i];
        }
        self.nonlinear(&b, NB);
        // Reuse `b` for the third stage `c`.
        for i in 0..n {
            b[i] = self.e2[i] * a[i] + self.q[i] * (2.0 * self.stages[NB][i] - self.stages[NV][i]);
        }
        self.nonlinear(&b, NC);
        let s = &self.stages;
        for i in 0..n {
            v[i] = self.e[i] * v[i]
                + self.f1[i] * s[NV][i]
                + 2.0 * self.f2[i] * (s[NA][i] + s[NB][i])
                + self.f3[i] * s[NC][i];
        }
        v[n / 2] = Complex64::new(0.0, 0.0);
        self.stages[A] = a;
        self.stages[TMP] = b;
        max
    }

    fn to_spectral(&self, u: &RealField) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = u.samples().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.grid.fft_forward(&mut v);
        let n = v.len();
        v[n / 2] = Complex64::new(0.0, 0.0);
        v
    }

    fn to_field(&self, v: &[Complex64]) -> Vec<f64> {
        let mut buf = v.to_vec();
        self.grid.fft_inverse(&mut buf);
        let n = self.grid.n_points() as f64;
        buf.iter().map(|c| c.re / n).collect()
    }

    /// Advances `u` by `steps` steps starting at time `t0`.
    pub fn advance(&mut self, u: &RealField, steps: usize, t0: f64) -> Result<RealField> {
        self.grid.ensure_same(u.grid())?;
        let mut v = self.to_spectral(u);
        for s in 0..steps {
            let max = self.step_spectral(&mut v);
            check_amplitude(t0 + s as f64 * self.dt, max)?;
        }
        finish(&self.grid, self.to_field(&v), t0 + steps as f64 * self.dt)
    }
}

fn check_amplitude(time: f64, max_amplitude: f64) -> Result<()> {
    if !max_amplitude.is_finite() || max_amplitude > BLOW_UP_AMPLITUDE {
        return Err(Error::BlowUp { time, max_amplitude });
    }
    Ok(())
}

fn finish(grid: &Grid, samples: Vec<f64>, time: f64) -> Result<RealField> {
    let max = samples.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
    check_amplitude(time, max)?;
    RealField::new(grid.clone(), samples)
}

/// `−∂_x(u²)` with modes above `dealias_fraction · k_max` removed.
pub fn rhs_nonlinear(u: &RealField, dealias_fraction: f64) -> RealField {
    let grid = u.grid();
    let n = grid.n_points() as f64;
    let mut buf: Vec<Complex64> = u.samples().iter().map(|&x| Complex64::new(x * x, 0.0)).collect();
    grid.fft_forward(&mut buf);
    for (c, d) in buf.iter_mut().zip(dealiased_derivative(grid, dealias_fraction)) {
        *c *= d;
    }
    grid.fft_inverse(&mut buf);
    RealField::new(grid.clone(), buf.iter().map(|c| c.re / n).collect()).expect("finite input")
}

/// A single ETDRK4 step with the default dealiasing.
pub fn step(u: &RealField, dt: f64) -> Result<RealField> {
    Etdrk4::new(u.grid(), dt, 2.0 / 3.0)?.advance(u, 1, 0.0)
}

/// Conserved quantities recorded along a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub t: f64,
    /// `½∫u²`.
    pub e0: f64,
    /// `∫ ½uHu' − ⅓u³`.
    pub e1: f64,
    /// `β(κ_monitor; u(t))`, `None` when disabled or when κ fell inside the spectrum.
    pub beta: Option<f64>,
    /// The β monitor was requested but could not be evaluated.
    pub invalid: bool,
    /// Eigenvalues below the bound-state threshold (when tracked).
    pub eigenvalues: Vec<f64>,
}

/// Strided snapshots and monitors of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<RealField>,
    pub monitors: Vec<MonitorRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &RealField {
        self.snapshots.last().expect("trajectories hold the initial state")
    }

    /// `monitors.csv` with columns `t,E0,E1,beta,lambda_1..lambda_N`.
    pub fn monitor_table(&self) -> CsvTable {
        let width = self.monitors.iter().map(|m| m.eigenvalues.len()).max().unwrap_or(0);
        let mut header = vec!["t".to_string(), "E0".into(), "E1".into(), "beta".into()];
        header.extend((1..=width).map(|j| format!("lambda_{j}")));
        let mut table = CsvTable::new(header);
        for m in &self.monitors {
            let mut row = vec![m.t, m.e0, m.e1, m.beta.unwrap_or(f64::NAN)];
            row.extend((0..width).map(|j| m.eigenvalues.get(j).copied().unwrap_or(f64::NAN)));
            table.push(row);
        }
        table
    }

    /// Writes `u_00000.bof`, … with sidecars plus `monitors.csv` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (i, (field, t)) in self.snapshots.iter().zip(&self.times).enumerate() {
            let path = dir.join(format!("u_{i:05}.bof"));
            write_snapshot(&path, field, *t)?;
            written.push(path);
        }
        let monitors = dir.join("monitors.csv");
        self.monitor_table().write(&monitors)?;
        written.push(monitors);
        Ok(written)
    }
}

fn monitor(u: &RealField, t: f64, cfg: &FlowConfig) -> Result<MonitorRecord> {
    let (e0, e1) = (grid_momentum(u), grid_energy(u));
    let needs_lax = cfg.kappa_monitor.is_some() || cfg.track_eigenvalues;
    let (mut beta, mut invalid, mut eigenvalues) = (None, false, Vec::new());
    if needs_lax {
        let modes = cfg.lax_modes.unwrap_or_else(|| default_modes(u.grid()));
        let sys = assemble(u, modes)?;
        if let Some(kappa) = cfg.kappa_monitor {
            match sys.beta(kappa) {
                Ok(b) => beta = Some(b),
                Err(Error::KappaInSpectrum { .. }) => invalid = true,
                Err(e) => return Err(e),
            }
        }
        if cfg.track_eigenvalues {
            eigenvalues = sys.eigensolve()?.negative_eigenvalues(BOUND_STATE_THRESHOLD);
        }
    }
    Ok(MonitorRecord { t, e0, e1, beta, invalid, eigenvalues })
}

/// Evolves `u0` to `cfg.t_end`, recording monitors every `monitor_stride` steps
/// and at the final time.
pub fn evolve(u0: &RealField, cfg: &FlowConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps()?;
    let mut stepper = Etdrk4::new(u0.grid(), cfg.dt, cfg.dealias_fraction)?;
    let mut traj = Trajectory { times: vec![0.0], snapshots: vec![u0.clone()], monitors: vec![] };
    traj.monitors.push(monitor(u0, 0.0, cfg)?);
    let mut u = u0.clone();
    let mut done = 0;
    while done < steps {
        let chunk = cfg.monitor_stride.min(steps - done);
        u = stepper.advance(&u, chunk, done as f64 * cfg.dt)?;
        done += chunk;
        let t = done as f64 * cfg.dt;
        traj.monitors.push(monitor(&u, t, cfg)?);
        traj.times.push(t);
        traj.snapshots.push(u.clone());
    }
    Ok(traj)
}

/// Initial value and largest relative drift of one monitored quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationRow {
    pub quantity: String,
    pub initial: f64,
    /// `max_t |q(t) − q(0)| / |q(0)|`, or the absolute drift when `q(0) = 0`.
    pub max_drift: f64,
}

fn drift(quantity: String, values: impl Iterator<Item = f64>) -> Option<ConservationRow> {
    let values: Vec<f64> = values.collect();
    let initial = *values.first()?;
    let scale = if initial == 0.0 { 1.0 } else { initial.abs() };
    let max_drift = values.iter().map(|v| (v - initial).abs() / scale).fold(0.0, f64::max);
    Some(ConservationRow { quantity, initial, max_drift })
}

/// Drift of `E0`, `E1`, `beta` (valid records only) and each tracked eigenvalue.
pub fn conservation_report(traj: &Trajectory) -> Vec<ConservationRow> {
    let m = &traj.monitors;
    let mut rows = Vec::new();
    rows.extend(drift("E0".into(), m.iter().map(|r| r.e0)));
    rows.extend(drift("E1".into(), m.iter().map(|r| r.e1)));
    rows.extend(drift("beta".into(), m.iter().filter_map(|r| r.beta)));
    let width = m.first().map_or(0, |r| r.eigenvalues.len());
    for j in 0..width {
        rows.extend(drift(
            format!("lambda_{}", j + 1),
            m.iter().map(|r| r.eigenvalues.get(j).copied().unwrap_or(f64::NAN)),
        ));
    }
    rows
}

/// Location of the maximum of `u`, refined by a parabola through the three
/// samples around the largest one.
pub fn peak_location(u: &RealField) -> f64 {
    let s = u.samples();
    let n = s.len();
    let (j, _) =
        s.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (l, c, r) = (s[(j + n - 1) % n], s[j], s[(j + 1) % n]);
    let denom = l - 2.0 * c + r;
    let offset = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    u.grid().x(j) + offset * u.grid().dx()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multisoliton::{profile, SolitonConfig};

    fn q_half(grid: &Grid) -> RealField {
        profile(&SolitonConfig::single(-0.5, 0.0).unwrap(), grid, 0.0)
    }

    #[test]
    fn phi_functions_are_continuous_across_the_switch() {
        for &r in &[0.4999, 0.5001] {
            for &angle in &[0.3, std::f64::consts::FRAC_PI_2, 2.0] {
                let z = Complex64::from_polar(r, angle);
                let (a, b) = (phi_functions(z), phi_direct(z));
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).norm() < 1e-13);
                }
            }
        }
        // Limits at zero: 1/2, 1/6, 1/6, 1/6.
        let p = phi_functions(Complex64::new(0.0, 0.0));
        for (v, e) in p.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert!((v - e).norm() < 1e-14);
        }
    }

    #[test]
    fn nonlinearity_of_trivial_data() {
        let grid = Grid::new(32.0, 128).unwrap();
        assert_eq!(rhs_nonlinear(&RealField::zeros(&grid), 2.0 / 3.0).max_abs(), 0.0);
        let c = RealField::from_fn(&grid, |_| 1.7).unwrap();
        assert!(rhs_nonlinear(&c, 2.0 / 3.0).max_abs() < 1e-13);
    }

    #[test]
    fn nonlinearity_of_a_sine() {
        let grid = Grid::new(32.0, 128).unwrap();
        let dk = grid.dk();
        let u = RealField::from_fn(&grid, |x| (dk * x).sin()).unwrap();
        let r = rhs_nonlinear(&u, 2.0 / 3.0);
        let expect = RealField::from_fn(&grid, |x| -dk * (2.0 * dk * x).sin()).unwrap();
        assert!(r.sub(&expect).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn zero_stays_zero() {
        let grid = Grid::new(32.0, 128).unwrap();
        let cfg = FlowConfig { t_end: 0.1, monitor_stride: 10, ..FlowConfig::default() };
        let traj = evolve(&RealField::zeros(&grid), &cfg).unwrap();
        assert_eq!(traj.times.len(), 11);
        assert!(traj.snapshots.iter().all(|s| s.max_abs() == 0.0));
        for row in conservation_report(&traj) {
            assert_eq!(row.max_drift, 0.0);
        }
        assert_eq!(step(&RealField::zeros(&grid), 1e-3).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn linear_regime_matches_exact_phase() {
        let grid = Grid::new(32.0, 128).unwrap();
        let m = 5.0;
        let k = m * grid.dk();
        let amp = 1e-8;
        let u = RealField::from_fn(&grid, |x| amp * (k * x).cos()).unwrap();
        let dt = 1e-2;
        let next = step(&u, dt).unwrap();
        let before = crate::grid::to_coefficients(&u).coeff(5);
        let after = crate::grid::to_coefficients(&next).coeff(5);
        let propagator = Complex64::new(0.0, k * k * dt).exp();
        assert!((after / before - propagator).norm() < 1e-12);
    }

    #[test]
    fn one_step_of_a_soliton() {
        // The line profile does not quite fit a periodic box; the mismatch decays
        // like L^-3, so a wide box is needed to see the time-stepping error alone.
        let grid = Grid::new(1024.0, 16384).unwrap();
        let cfg = SolitonConfig::single(-0.5, 0.0).unwrap();
        let u1 = step(&profile(&cfg, &grid, 0.0), 1e-3).unwrap();
        let err = u1.sub(&profile(&cfg, &grid, 1e-3)).unwrap().l2_norm();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn blow_up_is_detected() {
        let grid = Grid::new(32.0, 128).unwrap();
        let mut stepper = Etdrk4::new(&grid, 1e-3, 2.0 / 3.0).unwrap();
        let huge = RealField::from_fn(&grid, |x| 2e6 * (grid.dk() * x).cos()).unwrap();
        match stepper.advance(&huge, 1, 3.0) {
            Err(Error::BlowUp { time, max_amplitude }) => {
                assert_eq!(time, 3.0);
                assert!(max_amplitude > 1e6);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(FlowConfig::default().validate().is_ok());
        assert!(FlowConfig { dt: 0.0, ..FlowConfig::default() }.validate().is_err());
        assert!(FlowConfig { t_end: 0.00105, ..FlowConfig::default() }.validate().is_err());
        assert!(FlowConfig { dealias_fraction: 1.5, ..FlowConfig::default() }.validate().is_err());
        assert!(FlowConfig { monitor_stride: 0, ..FlowConfig::default() }.validate().is_err());
        let parsed: FlowConfig = toml::from_str("dt = 0.002\nt_end = 4.0").unwrap();
        assert_eq!(parsed.dt, 0.002);
        assert_eq!(parsed.monitor_stride, 100);
        assert!(toml::from_str::<FlowConfig>("dtt = 1.0").is_err());
    }

    #[test]
    fn peak_speed_of_a_soliton() {
        let grid = Grid::default();
        let cfg = FlowConfig { t_end: 2.0, kappa_monitor: None, ..FlowConfig::default() };
        let traj = evolve(&q_half(&grid), &cfg).unwrap();
        let (p0, p1) = (peak_location(&traj.snapshots[0]), peak_location(traj.final_state()));
        assert!(((p1 - p0) / 2.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monitors_and_export() {
        let grid = Grid::new(64.0, 512).unwrap();
        let u = profile(&SolitonConfig::single(-0.5, 0.0).unwrap(), &grid, 0.0);
        let cfg =
            FlowConfig { t_end: 0.2, monitor_stride: 50, track_eigenvalues: true, ..FlowConfig::default() };
        let traj = evolve(&u, &cfg).unwrap();
        let expect = [0.0, 0.05, 0.1, 0.15, 0.2];
        assert_eq!(traj.times.len(), expect.len());
        assert!(traj.times.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(traj.monitors.iter().all(|m| m.beta.is_some() && m.eigenvalues.len() == 1));
        let dir = tempfile::tempdir().unwrap();
        let files = traj.export(dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        let csv = std::fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
        assert!(csv.starts_with("t,E0,E1,beta,lambda_1\n"));
        let (back, t) = crate::io::read_snapshot(&files[4]).unwrap();
        assert_eq!(t, traj.times[4]);
        assert_eq!(&back, traj.final_state());
    }

    #[test]
    fn kappa_inside_spectrum_marks_monitor_invalid() {
        let grid = Grid::new(64.0, 512).unwrap();
        let u = profile(&SolitonConfig::single(-0.5, 0.0).unwrap(), &grid, 0.0);
        let cfg =
            FlowConfig { t_end: 0.01, monitor_stride: 5, kappa_monitor: Some(0.3), ..FlowConfig::default() };
        let traj = evolve(&u, &cfg).unwrap();
        assert!(traj.monitors.iter().all(|m| m.invalid && m.beta.is_none()));
        assert_eq!(traj.times.len(), 3);
    }
}
