//! Experiment specifications: built-in defaults per experiment, overlaid with
//! an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitOptions;
use crate::flow::FlowConfig;
use crate::grid::{Grid, NormSpec};
use crate::lax::{default_modes, BOUND_STATE_THRESHOLD};
use crate::multisoliton::SolitonConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Verify,
    Spectrum,
    BetaCurve,
    Evolve,
    Interaction,
    Stability,
    Molecule,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Verify,
        ExperimentKind::Spectrum,
        ExperimentKind::BetaCurve,
        ExperimentKind::Evolve,
        ExperimentKind::Interaction,
        ExperimentKind::Stability,
        ExperimentKind::Molecule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Verify => "verify",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::BetaCurve => "beta-curve",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Interaction => "interaction",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Molecule => "molecule",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub n_points: usize,
    /// Retained Lax modes `K`; `n_points / 4` when absent.
    #[serde(default)]
    pub lax_modes: Option<usize>,
}

impl GridSection {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.length, self.n_points)
    }

    pub fn modes(&self) -> Result<usize> {
        let grid = self.build()?;
        Ok(self.lax_modes.unwrap_or_else(|| default_modes(&grid)))
    }
}

/// Band-limited random perturbation `delta · noise` with `‖noise‖ = 1` in `norm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    pub delta: f64,
    pub seed: u64,
    pub k_max: f64,
    pub norm: NormSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Norm minimized by the center fit.
    pub norm: NormSpec,
    #[serde(default)]
    pub options: FitOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSection {
    pub kappas: Vec<f64>,
    /// Rows with `κ + λ ≤ pole_margin` for some eigenvalue are reported but not checked.
    pub pole_margin: f64,
    /// Sobolev exponent used for the reported `κ` floor.
    pub floor_sobolev: f64,
    pub floor_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSection {
    /// Parts placed left to right, consecutive parts one separation apart.
    pub parts: Vec<SolitonConfig>,
    pub separations: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    /// Monitor times whose exact centers come closer than this are treated
    /// as the collision window and excluded from the fit checks.
    pub overlap_distance: f64,
}

/// Pass/fail thresholds of every check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub bound_state_threshold: f64,
    pub representation: f64,
    pub eigenvalue: f64,
    pub simple_gap: f64,
    pub wu_ratio: f64,
    pub second_wu: f64,
    pub momentum: f64,
    pub energy: f64,
    pub energy_identity: f64,
    pub beta_relative: f64,
    pub span: f64,
    pub residue_relative: f64,
    pub eigen_residual: f64,
    pub orthonormality: f64,
    pub drift_e0: f64,
    pub drift_e1: f64,
    pub drift_beta: f64,
    pub isospectral: f64,
    pub exact_l2: f64,
    pub evolve_l2: f64,
    pub speed: f64,
    pub fit_distance: f64,
    pub stability_factor: f64,
    pub unperturbed_distance: f64,
    pub molecule_l2: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bound_state_threshold: BOUND_STATE_THRESHOLD,
            representation: 1e-10,
            eigenvalue: 1e-3,
            simple_gap: 1e-6,
            wu_ratio: 1e-2,
            second_wu: 5e-2,
            momentum: 1e-3,
            energy: 1e-2,
            energy_identity: 1e-6,
            beta_relative: 1e-2,
            span: 5e-2,
            residue_relative: 1e-2,
            eigen_residual: 1e-10,
            orthonormality: 1e-10,
            drift_e0: 1e-8,
            drift_e1: 1e-7,
            drift_beta: 1e-6,
            isospectral: 1e-3,
            exact_l2: 1e-3,
            evolve_l2: 1e-4,
            speed: 1e-2,
            fit_distance: 1e-2,
            stability_factor: 10.0,
            unperturbed_distance: 1e-4,
            molecule_l2: 5e-2,
        }
    }
}

/// Full, validated description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentKind,
    pub out_dir: PathBuf,
    pub grid: GridSection,
    pub solitons: SolitonConfig,
    pub flow: FlowConfig,
    pub perturbation: PerturbationSection,
    pub fit: FitSection,
    pub beta: BetaSection,
    pub molecule: MoleculeSection,
    pub interaction: InteractionSection,
    pub tolerances: Tolerances,
}

fn soliton(lambda: f64, center: f64) -> SolitonConfig {
    SolitonConfig::single(lambda, center).expect("valid built-in soliton")
}

impl ExperimentSpec {
    /// Built-in configuration of an experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut spec = ExperimentSpec {
            name: kind,
            out_dir: PathBuf::from("out").join(kind.name()),
            grid: GridSection { length: 256.0, n_points: 4096, lax_modes: None },
            solitons: soliton(-0.5, 0.0),
            flow: FlowConfig::default(),
            perturbation: PerturbationSection { delta: 0.0, seed: 0, k_max: 4.0, norm: NormSpec::L2 },
            fit: FitSection { norm: NormSpec::H_MINUS_QUARTER, options: FitOptions::default() },
            beta: BetaSection {
                kappas: vec![1.0, 2.0, 4.0, 8.0],
                pole_margin: 0.05,
                floor_sobolev: -0.25,
                floor_constant: crate::lax::DEFAULT_C_S,
            },
            molecule: MoleculeSection {
                parts: vec![soliton(-1.0, 0.0), soliton(-0.5, 0.0)],
                separations: vec![10.0, 20.0, 40.0],
            },
            interaction: InteractionSection { overlap_distance: 10.0 },
            tolerances: Tolerances::default(),
        };
        match kind {
            ExperimentKind::Verify => {
                // Control case: a bump of noise that destroys exact reflectionlessness.
                spec.perturbation =
                    PerturbationSection { delta: 0.3, seed: 7, k_max: 2.0, norm: NormSpec::L2 };
            }
            ExperimentKind::Spectrum => {}
            ExperimentKind::BetaCurve => {
                spec.beta.kappas = vec![0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];
            }
            ExperimentKind::Evolve => {
                spec.grid = GridSection { length: 512.0, n_points: 4096, lax_modes: None };
            }
            ExperimentKind::Interaction => {
                spec.grid = GridSection { length: 512.0, n_points: 8192, lax_modes: None };
                spec.solitons = SolitonConfig::new(vec![-1.0, -0.5], vec![-20.0, 20.0]).expect("valid");
                spec.flow.t_end = 80.0;
                spec.flow.monitor_stride = 1000;
                spec.flow.kappa_monitor = None;
            }
            ExperimentKind::Stability => {
                spec.perturbation =
                    PerturbationSection { delta: 0.01, seed: 1, k_max: 4.0, norm: NormSpec::H_HALF };
                spec.flow.t_end = 20.0;
            }
            ExperimentKind::Molecule => {}
        }
        spec
    }

    /// Defaults of `kind` overlaid with the TOML document `text`.
    ///
    /// Tables merge recursively; any other value replaces the default.
    pub fn from_toml_str(kind: ExperimentKind, text: &str) -> Result<Self> {
        let overlay: toml::Table = toml::from_str(text)?;
        if let Some(name) = overlay.get("name") {
            if name.as_str() != Some(kind.name()) {
                return Err(Error::Config(format!("config file is for experiment {name}, not '{kind}'")));
            }
        }
        let mut base = toml::Table::try_from(ExperimentSpec::defaults(kind))
            .map_err(|e| Error::Config(format!("cannot encode defaults: {e}")))?;
        merge(&mut base, overlay);
        let spec: ExperimentSpec = toml::Value::Table(base).try_into()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(kind: ExperimentKind, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentSpec::from_toml_str(kind, &text)
            }
            None => ExperimentSpec::from_toml_str(kind, ""),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn modes(&self) -> Result<usize> {
        self.grid.modes()
    }

    /// Checks everything that can be checked before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        let modes = self.modes()?;
        if modes == 0 {
            return Err(Error::Config("lax_modes must be positive".into()));
        }
        if modes > grid.n_points() / 2 {
            return Err(Error::InsufficientResolution { modes, limit: grid.n_points() / 2 });
        }
        if let Some(m) = self.flow.lax_modes {
            if m == 0 || m > grid.n_points() / 2 {
                return Err(Error::InsufficientResolution { modes: m, limit: grid.n_points() / 2 });
            }
        }
        let half = grid.length() / 2.0;
        if let Some(c) = self.solitons.centers().iter().find(|c| c.abs() >= half) {
            return Err(Error::Config(format!("soliton center {c} lies outside the box [-{half}, {half})")));
        }
        self.flow.validate()?;

        let p = &self.perturbation;
        p.norm.validate()?;
        if !(p.delta >= 0.0 && p.delta.is_finite()) {
            return Err(Error::Config(format!("perturbation delta must be >= 0, got {}", p.delta)));
        }
        if !(p.k_max >= grid.dk() && p.k_max <= grid.max_wavenumber()) {
            return Err(Error::Config(format!(
                "perturbation k_max must lie in [{}, {}], got {}",
                grid.dk(),
                grid.max_wavenumber(),
                p.k_max
            )));
        }

        self.fit.norm.validate()?;
        let o = &self.fit.options;
        if !(o.x_tol > 0.0 && o.initial_step > 0.0 && o.evals_per_soliton > 0) {
            return Err(Error::Config(format!("invalid fit options {o:?}")));
        }

        let b = &self.beta;
        if b.kappas.is_empty() || b.kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::Config(format!("beta kappas must be positive, got {:?}", b.kappas)));
        }
        if !(b.pole_margin >= 0.0) {
            return Err(Error::Config("beta pole_margin must be >= 0".into()));
        }

        let m = &self.molecule;
        if m.parts.is_empty() {
            return Err(Error::Config("molecule needs at least one part".into()));
        }
        let mut lambdas: Vec<f64> = m.parts.iter().flat_map(|p| p.lambdas().to_vec()).collect();
        lambdas.sort_by(f64::total_cmp);
        if lambdas.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("molecule parts must have pairwise distinct lambdas".into()));
        }
        if m.separations.is_empty()
            || m.separations.iter().any(|x| !(x.is_finite() && *x > 0.0))
            || m.separations.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config(format!(
                "molecule separations must be positive and increasing, got {:?}",
                m.separations
            )));
        }
        if self.name == ExperimentKind::Molecule {
            for &x in &m.separations {
                for (part, shift) in m.parts.iter().zip(super::molecule_shifts(m.parts.len(), x)) {
                    if let Some(c) = part.centers().iter().map(|c| c + shift).find(|c| c.abs() >= half) {
                        return Err(Error::Config(format!(
                            "separation {x} puts a center at {c}, outside the box"
                        )));
                    }
                }
            }
        }

        if self.name == ExperimentKind::Interaction && self.solitons.len() < 2 {
            return Err(Error::Config("interaction needs at least two solitons".into()));
        }
        if !(self.interaction.overlap_distance >= 0.0) {
            return Err(Error::Config("overlap_distance must be >= 0".into()));
        }
        if !(self.tolerances.bound_state_threshold < 0.0) {
            return Err(Error::Config("bound_state_threshold must be negative".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_validates_and_round_trips() {
        for kind in ExperimentKind::ALL {
            let spec = ExperimentSpec::defaults(kind);
            spec.validate().unwrap();
            let text = spec.to_toml().unwrap();
            assert_eq!(ExperimentSpec::from_toml_str(kind, &text).unwrap(), spec, "{kind}");
            assert_eq!(ExperimentSpec::from_toml_str(kind, "").unwrap(), spec, "{kind}");
        }
    }

    #[test]
    fn kind_names_parse_back() {
        for kind in ExperimentKind::ALL {
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn overlay_replaces_only_given_keys() {
        let spec = ExperimentSpec::from_toml_str(
            ExperimentKind::Evolve,
            "[flow]\nt_end = 2.0\n[solitons]\nlambdas = [-1.0]\ncenters = [5.0]\n",
        )
        .unwrap();
        assert_eq!(spec.flow.t_end, 2.0);
        assert_eq!(spec.flow.dt, 1e-3);
        assert_eq!(spec.flow.kappa_monitor, Some(2.0));
        assert_eq!(spec.grid.length, 512.0);
        assert_eq!(spec.solitons.centers(), &[5.0]);
    }

    #[test]
    fn interaction_keeps_monitor_disabled() {
        let spec =
            ExperimentSpec::from_toml_str(ExperimentKind::Interaction, "[flow]\nt_end = 40.0").unwrap();
        assert_eq!(spec.flow.kappa_monitor, None);
        assert_eq!(spec.flow.monitor_stride, 1000);
    }

    #[test]
    fn configuration_errors() {
        let bad = [
            "[grid]\nlax_modes = 4096",
            "unknown_key = 1",
            "[flow]\ndtt = 0.1",
            "[solitons]\nlambdas = [0.5]\ncenters = [0.0]",
            "[solitons]\nlambdas = [-0.5]\ncenters = [300.0]",
            "[flow]\nt_end = 0.0105",
            "[molecule]\nseparations = [20.0, 10.0]",
            "[beta]\nkappas = [-1.0]",
            "name = \"evolve\"",
            "[grid]\nlength = 100.0\nn_points = 100",
        ];
        for text in bad {
            assert!(ExperimentSpec::from_toml_str(ExperimentKind::Verify, text).is_err(), "{text}");
        }
        assert!(matches!(
            ExperimentSpec::from_toml_str(ExperimentKind::Verify, "[grid]\nlax_modes = 4096"),
            Err(Error::InsufficientResolution { modes: 4096, limit: 2048 })
        ));
    }

    #[test]
    fn interaction_rejects_single_soliton() {
        let text = "[solitons]\nlambdas = [-0.5]\ncenters = [0.0]";
        assert!(ExperimentSpec::from_toml_str(ExperimentKind::Interaction, text).is_err());
    }
}
