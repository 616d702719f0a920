//! JSON run configuration. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use msdiff_core::solver::{Field, Grid1D, Reaction, ReactionNetwork, SimConfig};
use msdiff_core::{Composition, MixtureSpec, ThermoModel};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub mixture: MixtureConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub reactions: Vec<ReactionConfig>,
    pub sim: SimSection,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    pub names: Vec<String>,
    /// Full symmetric matrix with zeros on the diagonal.
    pub diffusivities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ThermoConfig {
    #[default]
    Ideal,
    Margules { interaction: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub ncells: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub c_tot: f64,
    pub profile: Profile,
}

/// Initial mole-fraction profile; every row is renormalized onto the simplex.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Uniform { x: Vec<f64> },
    /// Jump at `position · L`.
    Step { left: Vec<f64>, right: Vec<f64>, #[serde(default = "half")] position: f64 },
    /// Linear interpolation from `left` at `y = 0` to `right` at `y = L`.
    Linear { left: Vec<f64>, right: Vec<f64> },
    /// `mean + amplitude · cos(mode · π y / L)`.
    Cosine { mean: Vec<f64>, amplitude: Vec<f64>, #[serde(default = "one")] mode: u32 },
    /// Smoothed step of relative width `width` centred at `position · L`.
    Tanh { left: Vec<f64>, right: Vec<f64>, #[serde(default = "half")] position: f64, width: f64 },
    /// Explicit per-cell mole fractions.
    Cells { x: Vec<Vec<f64>> },
}

fn half() -> f64 {
    0.5
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub reactants: BTreeMap<String, u32>,
    pub products: BTreeMap<String, u32>,
    pub rate: f64,
    /// Adds the reverse reaction with this rate constant.
    #[serde(default)]
    pub reverse_rate: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    #[serde(default = "default_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_checkpoint")]
    pub checkpoint_every: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_safety() -> f64 {
    0.4
}

fn default_checkpoint() -> usize {
    100
}

fn default_max_steps() -> usize {
    10_000_000
}

/// State used by `spectrum` and `fluxes`; defaults to the middle face of the
/// initial field.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub composition: Option<Vec<f64>>,
    /// Mole-fraction gradient.
    pub gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_instances")]
    pub instances: usize,
    /// The thermodynamic model is known to lose convexity on this run.
    #[serde(default)]
    pub expect_not_convex: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { instances: default_instances(), expect_not_convex: false }
    }
}

fn default_instances() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_ledger")]
    pub ledger: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { trajectory: default_trajectory(), ledger: default_ledger() }
    }
}

fn default_trajectory() -> String {
    "trajectory.csv".into()
}

fn default_ledger() -> String {
    "ledger.csv".into()
}

fn square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn n(&self) -> usize {
        self.mixture.names.len()
    }

    pub fn species_index(&self, name: &str) -> Result<usize, CliError> {
        self.mixture
            .names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| CliError::Config(format!("unknown species `{name}`")))
    }

    pub fn thermo_model(&self) -> Result<ThermoModel, CliError> {
        Ok(match &self.thermo {
            ThermoConfig::Ideal => ThermoModel::Ideal,
            ThermoConfig::Margules { interaction } => {
                ThermoModel::margules(square(interaction, self.n(), "thermo.interaction")?)
            }
        })
    }

    pub fn mixture_spec(&self) -> Result<MixtureSpec, CliError> {
        let n = self.n();
        let dmat = square(&self.mixture.diffusivities, n, "mixture.diffusivities")?;
        MixtureSpec::new(self.mixture.names.clone(), dmat, self.thermo_model()?).map_err(|errs| {
            let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
            CliError::Config(format!("invalid mixture: {}", msgs.join("; ")))
        })
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Grid1D::new(self.grid.ncells, self.grid.length).map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn initial_field(&self) -> Result<Field, CliError> {
        let n = self.n();
        let grid = self.grid()?;
        let len = grid.length();
        let check = |v: &[f64], what: &str| {
            if v.len() != n {
                Err(CliError::Config(format!("initial.profile.{what} needs {n} entries, got {}", v.len())))
            } else {
                Ok(())
            }
        };
        let lerp = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect() };
        let field = match &self.initial.profile {
            Profile::Uniform { x } => {
                check(x, "x")?;
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |_| x.clone())
            }
            Profile::Step { left, right, position } => {
                check(left, "left")?;
                check(right, "right")?;
                let at = position * len;
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |y| {
                    if y < at { left.clone() } else { right.clone() }
                })
            }
            Profile::Linear { left, right } => {
                check(left, "left")?;
                check(right, "right")?;
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |y| lerp(left, right, y / len))
            }
            Profile::Cosine { mean, amplitude, mode } => {
                check(mean, "mean")?;
                check(amplitude, "amplitude")?;
                let k = *mode as f64 * PI / len;
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |y| {
                    mean.iter().zip(amplitude).map(|(m, a)| m + a * (k * y).cos()).collect()
                })
            }
            Profile::Tanh { left, right, position, width } => {
                check(left, "left")?;
                check(right, "right")?;
                if !(*width > 0.0) {
                    return Err(CliError::Config("initial.profile.width must be positive".into()));
                }
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |y| {
                    let s = 0.5 * (1.0 + ((y / len - position) / width).tanh());
                    lerp(left, right, s)
                })
            }
            Profile::Cells { x } => {
                if x.len() != grid.ncells() {
                    return Err(CliError::Config(format!(
                        "initial.profile.x has {} rows for {} cells",
                        x.len(),
                        grid.ncells()
                    )));
                }
                let mut rows = x.iter();
                Field::from_mole_fractions(grid, n, self.initial.c_tot, |_| rows.next().cloned().unwrap_or_default())
            }
        };
        field.map_err(|e| CliError::Config(format!("initial profile: {e}")))
    }

    pub fn reaction_network(&self) -> Result<ReactionNetwork, CliError> {
        let stoich = |m: &BTreeMap<String, u32>| -> Result<Vec<(usize, u32)>, CliError> {
            m.iter().map(|(k, v)| Ok((self.species_index(k)?, *v))).collect()
        };
        let mut list = Vec::new();
        for r in &self.reactions {
            let (re, pr) = (stoich(&r.reactants)?, stoich(&r.products)?);
            list.push(Reaction::new(re.clone(), pr.clone(), r.rate));
            if let Some(kb) = r.reverse_rate {
                list.push(Reaction::new(pr, re, kb));
            }
        }
        ReactionNetwork::new(self.n(), list).map_err(|e| CliError::Config(format!("reactions: {e}")))
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let cfg = SimConfig {
            t_end: self.sim.t_end,
            cfl_safety: self.sim.cfl_safety,
            checkpoint_every: self.sim.checkpoint_every,
            max_steps: self.sim.max_steps,
            ..SimConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Config(format!("sim: {e}")))?;
        Ok(cfg)
    }

    /// Probe composition and mole-fraction gradient.
    pub fn probe(&self) -> Result<(Composition, DVector<f64>), CliError> {
        let n = self.n();
        let field = self.initial_field()?;
        let mid = field.ncells() / 2;
        let (left, right) = (field.composition(mid - 1)?, field.composition(mid)?);
        let comp = match &self.probe.composition {
            Some(x) => parse_composition(x, n, self.initial.c_tot)?,
            None => Composition::normalized((left.x() + right.x()) * 0.5, self.initial.c_tot)?,
        };
        let grad = match &self.probe.gradient {
            Some(g) => {
                if g.len() != n {
                    return Err(CliError::Config(format!("gradient needs {n} entries, got {}", g.len())));
                }
                DVector::from_column_slice(g)
            }
            None => (right.x() - left.x()) / field.grid().h(),
        };
        Ok((comp, grad))
    }
}

pub fn parse_composition(x: &[f64], n: usize, c_tot: f64) -> Result<Composition, CliError> {
    if x.len() != n {
        return Err(CliError::Config(format!("composition needs {n} entries, got {}", x.len())));
    }
    Composition::normalized(DVector::from_column_slice(x), c_tot).map_err(|e| CliError::Config(format!("composition: {e}")))
}

/// Parses `0.2,0.3,0.5`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Config(format!("bad number `{t}`: {e}"))))
        .collect()
}
