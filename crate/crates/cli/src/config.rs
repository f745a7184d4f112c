//! Versioned JSON experiment configuration.
//!
//! The top level carries the experiment name, seed, worker count, optional
//! potential and an experiment-specific `params` object. Every object rejects
//! unknown fields; omitted parameters take the documented defaults below.

use std::path::PathBuf;

use gphl_core::estimates::ProbeName;
use gphl_core::scattering::PotentialKind;
use gphl_core::RadialPotential;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ScatteringScan,
    BornLimit,
    Chaos,
    BbgkyResidual,
    IdentityCheck,
    Boardgame,
    Dyadic,
    Probes,
    NlsNorms,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::ScatteringScan,
        Experiment::BornLimit,
        Experiment::Chaos,
        Experiment::BbgkyResidual,
        Experiment::IdentityCheck,
        Experiment::Boardgame,
        Experiment::Dyadic,
        Experiment::Probes,
        Experiment::NlsNorms,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::ScatteringScan => "scattering-scan",
            Experiment::BornLimit => "born-limit",
            Experiment::Chaos => "chaos",
            Experiment::BbgkyResidual => "bbgky-residual",
            Experiment::IdentityCheck => "identity-check",
            Experiment::Boardgame => "boardgame",
            Experiment::Dyadic => "dyadic",
            Experiment::Probes => "probes",
            Experiment::NlsNorms => "nls-norms",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }

    pub fn valid_names() -> String {
        Self::ALL.map(|e| e.as_str()).join(", ")
    }
}

/// Radial pair potential in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    // braces so that stray fields next to `"kind": "zero"` are rejected
    Zero {},
    SquareBarrier { height: f64, radius: f64 },
    Gaussian { amplitude: f64, width: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<RadialPotential, CliError> {
        let kind = match *self {
            PotentialSpec::Zero {} => return Ok(RadialPotential::zero()),
            PotentialSpec::SquareBarrier { height, radius } => {
                check_positive("potential.radius", radius)?;
                check_range("potential.height", height, 0.0, 1e6)?;
                PotentialKind::SquareBarrier { height, radius }
            }
            PotentialSpec::Gaussian { amplitude, width } => {
                check_positive("potential.width", width)?;
                check_range("potential.amplitude", amplitude, 0.0, 1e6)?;
                PotentialKind::Gaussian { amplitude, width }
            }
        };
        RadialPotential::with_default_rmax(kind).map_err(|e| CliError::Schema(e.to_string()))
    }
}

/// Raw file contents before the experiment is resolved.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    experiment: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "one")]
    workers: usize,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    memory_budget_bytes: Option<u64>,
    #[serde(default)]
    potential: Option<PotentialSpec>,
    #[serde(default)]
    params: Option<Value>,
}

fn one() -> usize {
    1
}

/// Fully resolved configuration; its JSON form is what gets hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub seed: u64,
    pub workers: usize,
    pub potential: PotentialSpec,
    pub params: Params,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub memory_budget_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    ScatteringScan(ScatteringScanParams),
    BornLimit(BornLimitParams),
    Chaos(ChaosParams),
    BbgkyResidual(BbgkyParams),
    IdentityCheck(IdentityParams),
    Boardgame(BoardgameParams),
    Dyadic(DyadicParams),
    Probes(ProbesParams),
    NlsNorms(NlsNormsParams),
}

/// Screened zero-energy problem `(−Δ + ½sV)f = 0` over screening factors `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringScanParams {
    pub screening: Vec<f64>,
    pub tol: f64,
}

impl Default for ScatteringScanParams {
    fn default() -> Self {
        Self {
            screening: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            tol: 1e-10,
        }
    }
}

/// `8π·N·scat(N⁻¹V_N)` against `∫V` along `N` for each `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BornLimitParams {
    pub beta: Vec<f64>,
    pub n_list: Vec<u64>,
}

impl Default for BornLimitParams {
    fn default() -> Self {
        Self {
            beta: vec![0.5, 1.0],
            n_list: vec![100, 10_000, 1_000_000],
        }
    }
}

/// One-dimensional surrogate dynamics against the NLS with `c₀ = ∫V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosParams {
    pub points: usize,
    pub box_length: f64,
    pub beta: f64,
    pub t_final: f64,
    pub dt: f64,
    pub report_every: usize,
    pub n_list: Vec<usize>,
    pub packet_width: f64,
    pub packet_shift: f64,
    pub packet_momentum: f64,
    /// Write the final many-body state of each `N` as a binary checkpoint.
    pub checkpoints: bool,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            points: 16,
            box_length: 6.0,
            beta: 0.3,
            t_final: 0.5,
            dt: 2.5e-3,
            report_every: 40,
            n_list: vec![2, 3, 4, 5],
            packet_width: 0.8,
            packet_shift: 0.3,
            packet_momentum: 1.0,
            checkpoints: false,
        }
    }
}

/// Ordinary BBGKY residual from centred differences at `dt` and `dt/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BbgkyParams {
    pub points: usize,
    pub box_length: f64,
    pub n: usize,
    pub k_list: Vec<usize>,
    pub beta: f64,
    pub dt: f64,
    pub t_center: f64,
}

impl Default for BbgkyParams {
    fn default() -> Self {
        Self {
            points: 16,
            box_length: 6.0,
            n: 3,
            k_list: vec![1, 2],
            beta: 0.5,
            dt: 4e-3,
            t_center: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleCase {
    pub n: u64,
    pub beta: f64,
}

/// Pointwise wave-operator and collapse decomposition identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityParams {
    pub cases: Vec<ScaleCase>,
    pub k: usize,
    pub configs: usize,
    pub decomposition_k_max: usize,
    pub decomposition_configs: usize,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self {
            cases: vec![
                ScaleCase { n: 100, beta: 0.5 },
                ScaleCase { n: 1000, beta: 0.7 },
                ScaleCase { n: 50, beta: 1.0 },
            ],
            k: 3,
            configs: 100,
            decomposition_k_max: 3,
            decomposition_configs: 10,
        }
    }
}

/// Collapsing-map counts, board-game classes and the `L` expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoardgameParams {
    pub k: usize,
    pub q_max_maps: usize,
    pub q_max_classes: usize,
    pub q_max_orbits: usize,
    pub l_expansion_k_max: usize,
}

impl Default for BoardgameParams {
    fn default() -> Self {
        Self {
            k: 1,
            q_max_maps: 7,
            q_max_classes: 6,
            q_max_orbits: 5,
            l_expansion_k_max: 5,
        }
    }
}

/// Dyadic min-sums and the two iterate counting lemmas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DyadicParams {
    pub beta: Vec<f64>,
    pub epsilon: f64,
    pub n_log2: Vec<u32>,
    pub iterates_j_max: usize,
    pub iterates_ratio_log2: u32,
    pub iterates4_alpha: f64,
    pub iterates4_epsilon: f64,
    pub iterates4_m_max: u64,
}

impl Default for DyadicParams {
    fn default() -> Self {
        Self {
            beta: vec![0.3, 0.5, 0.9],
            epsilon: 0.1,
            n_log2: (10..=24).collect(),
            iterates_j_max: 8,
            iterates_ratio_log2: 12,
            iterates4_alpha: 1.0,
            iterates4_epsilon: 0.5,
            iterates4_m_max: 1 << 20,
        }
    }
}

/// Strichartz-type probes at two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbesParams {
    pub probes: Vec<String>,
    pub ensemble: usize,
    /// Coarse points per axis for every probe; `None` uses each probe's default.
    pub coarse_points: Option<usize>,
}

impl Default for ProbesParams {
    fn default() -> Self {
        Self {
            probes: ProbeName::ALL.iter().map(|p| p.as_str().to_string()).collect(),
            ensemble: 20,
            coarse_points: None,
        }
    }
}

impl ProbesParams {
    pub fn names(&self) -> Result<Vec<ProbeName>, CliError> {
        self.probes
            .iter()
            .map(|s| {
                ProbeName::parse(s).ok_or_else(|| {
                    let valid: Vec<&str> = ProbeName::ALL.iter().map(|p| p.as_str()).collect();
                    CliError::Schema(format!("unknown probe {s:?}; valid probes: {}", valid.join(", ")))
                })
            })
            .collect()
    }
}

/// Mass, energy and the space-time functionals along NLS trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NlsNormsParams {
    pub dimension: usize,
    pub points: usize,
    pub box_length: f64,
    pub coupling: f64,
    pub dt: f64,
    pub steps: usize,
    pub every: usize,
    pub ensemble: usize,
    pub band: i64,
}

impl Default for NlsNormsParams {
    fn default() -> Self {
        Self {
            dimension: 1,
            points: 64,
            box_length: std::f64::consts::TAU,
            coupling: 1.0,
            dt: 1e-4,
            steps: 10_000,
            every: 100,
            ensemble: 10,
            band: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_value(value).map_err(|e| CliError::Schema(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        let experiment = Experiment::parse(&raw.experiment).ok_or_else(|| {
            CliError::Schema(format!(
                "unknown experiment {:?}; valid experiments: {}",
                raw.experiment,
                Experiment::valid_names()
            ))
        })?;
        if raw.workers == 0 || raw.workers > 256 {
            return Err(CliError::Schema(format!("workers must lie in 1..=256, got {}", raw.workers)));
        }
        let value = raw.params.unwrap_or(Value::Object(Default::default()));
        let params = parse_params(experiment, value)?;
        let cfg = Self {
            schema_version: raw.schema_version,
            experiment,
            seed: raw.seed,
            workers: raw.workers,
            potential: raw.potential.unwrap_or_else(|| default_potential(experiment)),
            params,
            output_dir: raw.output_dir,
            memory_budget_bytes: raw.memory_budget_bytes,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// SHA-256 of the resolved configuration; output location and budget are excluded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    fn check(&self) -> Result<(), CliError> {
        self.potential.build()?;
        match &self.params {
            Params::ScatteringScan(p) => {
                nonempty("screening", p.screening.len())?;
                for s in &p.screening {
                    check_range("screening", *s, 1e-12, 1e6)?;
                }
                check_range("tol", p.tol, 1e-14, 1e-2)
            }
            Params::BornLimit(p) => {
                nonempty("beta", p.beta.len())?;
                nonempty("n_list", p.n_list.len())?;
                for b in &p.beta {
                    check_beta(*b)?;
                }
                if p.n_list.windows(2).any(|w| w[1] <= w[0]) || p.n_list[0] == 0 {
                    return schema("n_list must be positive and strictly increasing");
                }
                Ok(())
            }
            Params::Chaos(p) => {
                check_points(p.points)?;
                check_positive("box_length", p.box_length)?;
                check_beta(p.beta)?;
                check_positive("t_final", p.t_final)?;
                check_range("dt", p.dt, 1e-8, p.t_final)?;
                check_positive("packet_width", p.packet_width)?;
                nonempty("n_list", p.n_list.len())?;
                if p.report_every == 0 {
                    return schema("report_every must be at least 1");
                }
                let steps = p.t_final / p.dt;
                if (steps - steps.round()).abs() > 1e-9 * steps {
                    return schema("t_final must be an integer multiple of dt");
                }
                if p.n_list.iter().any(|n| !(1..=8).contains(n)) {
                    return schema("n_list entries must lie in 1..=8");
                }
                Ok(())
            }
            Params::BbgkyResidual(p) => {
                check_points(p.points)?;
                check_positive("box_length", p.box_length)?;
                check_beta(p.beta)?;
                check_range("dt", p.dt, 1e-8, 1.0)?;
                check_positive("t_center", p.t_center)?;
                if !(2..=6).contains(&p.n) {
                    return schema("n must lie in 2..=6");
                }
                nonempty("k_list", p.k_list.len())?;
                if p.k_list.iter().any(|k| *k == 0 || *k >= p.n) {
                    return schema("k_list entries must lie in 1..n");
                }
                if p.t_center < 2.0 * p.dt {
                    return schema("t_center must be at least 2·dt");
                }
                Ok(())
            }
            Params::IdentityCheck(p) => {
                nonempty("cases", p.cases.len())?;
                for c in &p.cases {
                    check_beta(c.beta)?;
                    if c.n == 0 {
                        return schema("cases[].n must be positive");
                    }
                }
                if !(2..=6).contains(&p.k) {
                    return schema("k must lie in 2..=6");
                }
                if !(1..=4).contains(&p.decomposition_k_max) {
                    return schema("decomposition_k_max must lie in 1..=4");
                }
                if p.configs == 0 || p.configs > 100_000 || p.decomposition_configs == 0 {
                    return schema("configs must lie in 1..=100000");
                }
                Ok(())
            }
            Params::Boardgame(p) => {
                if !(1..=4).contains(&p.k) {
                    return schema("k must lie in 1..=4");
                }
                if p.q_max_maps > 8 || p.q_max_classes > 8 || p.q_max_orbits > 8 {
                    return schema("q limits must be at most 8");
                }
                if !(1..=8).contains(&p.l_expansion_k_max) {
                    return schema("l_expansion_k_max must lie in 1..=8");
                }
                Ok(())
            }
            Params::Dyadic(p) => {
                nonempty("beta", p.beta.len())?;
                for b in &p.beta {
                    check_beta(*b)?;
                }
                check_range("epsilon", p.epsilon, 1e-6, 0.49)?;
                if p.n_log2.len() < 2 || p.n_log2.iter().any(|e| *e > 40) {
                    return schema("n_log2 needs at least two entries in 0..=40");
                }
                if !(1..=12).contains(&p.iterates_j_max) || p.iterates_ratio_log2 > 20 {
                    return schema("iterates_j_max must lie in 1..=12 and iterates_ratio_log2 in 0..=20");
                }
                check_positive("iterates4_alpha", p.iterates4_alpha)?;
                check_positive("iterates4_epsilon", p.iterates4_epsilon)?;
                if p.iterates4_m_max < 2 {
                    return schema("iterates4_m_max must be at least 2");
                }
                Ok(())
            }
            Params::Probes(p) => {
                nonempty("probes", p.probes.len())?;
                p.names()?;
                if !(1..=200).contains(&p.ensemble) {
                    return schema("ensemble must lie in 1..=200");
                }
                if let Some(c) = p.coarse_points {
                    if c % 2 != 0 || !(4..=32).contains(&c) {
                        return schema("coarse_points must be even in 4..=32");
                    }
                }
                Ok(())
            }
            Params::NlsNorms(p) => {
                check_dimension(p.dimension)?;
                check_points(p.points)?;
                check_positive("box_length", p.box_length)?;
                check_range("coupling", p.coupling, -100.0, 100.0)?;
                check_range("dt", p.dt, 1e-8, 1.0)?;
                if p.steps == 0 || p.every == 0 || p.ensemble == 0 {
                    return schema("steps, every and ensemble must be at least 1");
                }
                if p.band < 0 || p.band as usize >= p.points / 2 {
                    return schema("band must lie in 0..points/2");
                }
                Ok(())
            }
        }
    }
}

fn parse_params(experiment: Experiment, value: Value) -> Result<Params, CliError> {
    fn typed<P: serde::de::DeserializeOwned>(v: Value) -> Result<P, CliError> {
        serde_json::from_value(v).map_err(|e| CliError::Schema(format!("params: {e}")))
    }
    Ok(match experiment {
        Experiment::ScatteringScan => Params::ScatteringScan(typed(value)?),
        Experiment::BornLimit => Params::BornLimit(typed(value)?),
        Experiment::Chaos => Params::Chaos(typed(value)?),
        Experiment::BbgkyResidual => Params::BbgkyResidual(typed(value)?),
        Experiment::IdentityCheck => Params::IdentityCheck(typed(value)?),
        Experiment::Boardgame => Params::Boardgame(typed(value)?),
        Experiment::Dyadic => Params::Dyadic(typed(value)?),
        Experiment::Probes => Params::Probes(typed(value)?),
        Experiment::NlsNorms => Params::NlsNorms(typed(value)?),
    })
}

/// Potential used when the config names none.
pub fn default_potential(experiment: Experiment) -> PotentialSpec {
    match experiment {
        Experiment::Chaos => PotentialSpec::Gaussian {
            amplitude: 1.0,
            width: 1.0,
        },
        _ => PotentialSpec::SquareBarrier {
            height: 2.0,
            radius: 1.0,
        },
    }
}

fn schema<T>(msg: &str) -> Result<T, CliError> {
    Err(CliError::Schema(msg.to_string()))
}

fn nonempty(name: &str, len: usize) -> Result<(), CliError> {
    if len == 0 {
        return Err(CliError::Schema(format!("{name} must not be empty")));
    }
    Ok(())
}

fn check_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<(), CliError> {
    if !(x >= lo && x <= hi) {
        return Err(CliError::Schema(format!("{name} = {x} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::Schema(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<(), CliError> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(CliError::Schema(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

fn check_dimension(d: usize) -> Result<(), CliError> {
    if d != 1 && d != 3 {
        return Err(CliError::Schema(format!("dimension must be 1 or 3, got {d}")));
    }
    Ok(())
}

fn check_points(p: usize) -> Result<(), CliError> {
    if !p.is_power_of_two() || !(8..=64).contains(&p) {
        return Err(CliError::Schema(format!("points must be a power of two in 8..=64, got {p}")));
    }
    Ok(())
}
