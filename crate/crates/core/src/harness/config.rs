use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::kernels::{Domain, Drift, DriftKind, Lattice, LatticeKernel, NearestNeighborKernel, OrbitKernel, make_orbit_kernel};
use crate::passage::{make_schedule, PassageSchedule, ScheduleKind, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PhaseSweep,
    UniformTest,
    Classify,
    Excursions,
    Range,
    Space,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PhaseSweep => "phase-sweep",
            Experiment::UniformTest => "uniform-test",
            Experiment::Classify => "classify",
            Experiment::Excursions => "excursions",
            Experiment::Range => "range",
            Experiment::Space => "space",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// Nearest-neighbour walk with outward drift; `left` defaults to `right`.
    Drift {
        domain: Domain,
        right: DriftKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        left: Option<DriftKind>,
        #[serde(default = "one")]
        x_min: u64,
    },
    Orbit {
        k_max: u32,
    },
    /// Simple random walk on `ℤ` or `ℤ²`.
    Lattice {
        lattice: Lattice,
    },
}

fn one() -> u64 {
    1
}

/// A constructed kernel.
#[derive(Debug, Clone)]
pub enum Built {
    Line(NearestNeighborKernel),
    Orbit(OrbitKernel),
    Lattice(LatticeKernel),
}

impl KernelSpec {
    pub fn build(&self) -> Result<Built> {
        Ok(match self {
            KernelSpec::Drift { domain, right, left, x_min } => {
                let r = Drift::new(right.clone(), *x_min)?;
                match (domain, left) {
                    (Domain::HalfLine, Some(_)) => {
                        return Err(Error::Config("a half-line kernel has no left drift".into()));
                    }
                    (Domain::HalfLine, None) => Built::Line(NearestNeighborKernel::new(Domain::HalfLine, r)),
                    (Domain::FullLine, None) => Built::Line(NearestNeighborKernel::new(Domain::FullLine, r)),
                    (Domain::FullLine, Some(l)) => Built::Line(NearestNeighborKernel::two_sided(r, Drift::new(l.clone(), *x_min)?)),
                }
            }
            KernelSpec::Orbit { k_max } => Built::Orbit(make_orbit_kernel(*k_max)?),
            KernelSpec::Lattice { lattice } => Built::Lattice(LatticeKernel::new(*lattice)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Lamperti constants `c`.
    pub c: Vec<f64>,
    /// Power exponents `α` of `s_j = j^{-α}`.
    pub alpha: Vec<f64>,
    /// Log-Lamperti constants `D`, swept against the same `α` list.
    pub d: Vec<f64>,
    /// Replicas per grid point for the Monte Carlo summary; 0 skips it.
    pub mc_replicas: u64,
    pub mc_step_cap: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            c: vec![-0.4, -0.25, -0.1, 0.1, 0.25, 0.4],
            alpha: vec![0.5, 1.0, 1.5, 2.0],
            d: Vec::new(),
            mc_replicas: 0,
            mc_step_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub replicas: u64,
    pub step_cap: u64,
    /// Outer terms of the excursion series.
    pub m_horizon: u64,
    /// Terms inside one passage generating function evaluation.
    pub j_horizon: u64,
    /// Terms used to classify the schedule.
    pub schedule_horizon: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { replicas: 10_000, step_cap: 1_000_000, m_horizon: 1 << 22, j_horizon: 1 << 40, schedule_horizon: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    /// Kolmogorov-Smirnov acceptance bound of the uniform-limit test.
    pub ks: f64,
    /// Width, in standard errors, of Monte Carlo agreement bands.
    pub sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-10, rel: 1e-4, ks: 0.02, sigma: 3.0 }
    }
}

impl Tolerances {
    pub fn series(&self) -> Tolerance {
        Tolerance::new(self.abs, self.rel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformConfig {
    pub n: u64,
    pub replicas: u64,
    /// Steps of the unit-cost negative control; 0 skips it.
    pub control_n: u64,
    pub control_replicas: u64,
}

impl Default for UniformConfig {
    fn default() -> Self {
        Self { n: 10_000, replicas: 100_000, control_n: 10_000, control_replicas: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeConfig {
    pub t_max: f64,
    pub checkpoints: usize,
    pub trajectories: u64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        Self { t_max: 10_000.0, checkpoints: 100, trajectories: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub lattice: Lattice,
    pub alpha: f64,
    #[serde(default = "default_window")]
    pub window: i64,
    /// Shells summed before the analytic tail.
    #[serde(default = "default_shells")]
    pub shells: u64,
}

fn default_window() -> i64 {
    20
}

fn default_shells() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExcursionsConfig {
    /// Number of successive excursions `τ̃_0, τ̃_1, …` per walk; 0 skips.
    pub successive: usize,
    /// Start vertices for the successive-excursion runs (line kernels).
    pub starts: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Master seed, below 2^63; there is no clock-based default.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub tolerance: Tolerances,
    #[serde(default)]
    pub uniform: UniformConfig,
    #[serde(default)]
    pub range: RangeConfig,
    #[serde(default)]
    pub excursions: ExcursionsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            kernel: None,
            schedule: None,
            sweep: SweepConfig::default(),
            budget: Budget::default(),
            tolerance: Tolerances::default(),
            uniform: UniformConfig::default(),
            range: RangeConfig::default(),
            excursions: ExcursionsConfig::default(),
            space: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Parses either a bare config or a result document with a `config`
    /// field.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        let v = match v.get("config") {
            Some(inner) if v.get("report").is_some() => inner.clone(),
            _ => v,
        };
        let c: Self = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads `.json` files as JSON and everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, in hex. Output locations are
    /// excluded so that relocating a run does not change its identity.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig { format: self.output.format, path: None, trace: None };
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn kernel(&self) -> Result<Built> {
        self.kernel.as_ref().ok_or_else(|| Error::Config(format!("{} needs a [kernel] section", self.experiment.name())))?.build()
    }

    pub fn schedule(&self) -> Result<PassageSchedule> {
        let kind = self
            .schedule
            .clone()
            .ok_or_else(|| Error::Config(format!("{} needs a [schedule] section", self.experiment.name())))?;
        make_schedule(kind)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {} does not fit a TOML integer (max 2^63 - 1)", self.seed)));
        }
        let t = &self.tolerance;
        if !(t.abs > 0.0) || !(t.rel >= 0.0) || !(t.ks > 0.0) || !(t.sigma > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.budget.step_cap < 1 || self.budget.m_horizon < 1 || self.budget.schedule_horizon < 1 {
            return Err(Error::Config("budgets must be >= 1".into()));
        }
        if let Some(k) = &self.kernel {
            k.build().map_err(cfg)?;
        }
        if self.schedule.is_some() {
            self.schedule().map_err(cfg)?;
        }
        match self.experiment {
            Experiment::PhaseSweep => {
                let s = &self.sweep;
                if s.alpha.is_empty() || (s.c.is_empty() && s.d.is_empty()) {
                    return Err(Error::Config("phase-sweep needs alpha and c or d grids".into()));
                }
                if s.alpha.iter().any(|&a| !(a > 0.0)) {
                    return Err(Error::Config("sweep alpha values must be positive".into()));
                }
                for &c in &s.c {
                    Drift::new(DriftKind::Lamperti { c }, 1).map_err(cfg)?;
                }
                for &d in &s.d {
                    Drift::new(DriftKind::LogLamperti { d }, 2).map_err(cfg)?;
                }
            }
            Experiment::UniformTest => {
                let u = &self.uniform;
                if u.n < 100 || u.replicas < 10_000 {
                    return Err(Error::Config("uniform-test needs n >= 100 and replicas >= 10^4".into()));
                }
            }
            Experiment::Classify => {
                if self.kernel.is_none() {
                    return Err(Error::Config("classify needs a [kernel] section".into()));
                }
                if self.schedule.is_none() && self.space.is_none() {
                    return Err(Error::Config("classify needs a [schedule] or [space] section".into()));
                }
            }
            Experiment::Excursions | Experiment::Range => {
                self.kernel()?;
                self.schedule()?;
                if self.budget.replicas < 1 {
                    return Err(Error::Config("replicas must be >= 1".into()));
                }
                if self.experiment == Experiment::Range && (!(self.range.t_max > 0.0) || self.range.checkpoints < 1) {
                    return Err(Error::Config("range needs t_max > 0 and checkpoints >= 1".into()));
                }
            }
            Experiment::Space => {
                let s = self.space.as_ref().ok_or_else(|| Error::Config("space needs a [space] section".into()))?;
                if !(s.alpha >= 0.0) || s.window < 0 || s.shells < 1 {
                    return Err(Error::Config("space needs alpha >= 0, window >= 0, shells >= 1".into()));
                }
            }
        }
        Ok(())
    }
}
