//! Experiment orchestration: configuration, phase sweeps, the uniform-limit
//! test, recurrence classification and output serialization.

mod classify;
mod config;
mod experiments;
mod output;
mod sweep;
mod uniform;

use serde::{Deserialize, Serialize};

use crate::analytic::Phase;
use crate::{Error, Result};

pub use classify::{classify, ClassifyReport, McTrend};
pub use config::{
    Budget, Built, Experiment, ExperimentConfig, ExcursionsConfig, Format, KernelSpec, OutputConfig, RangeConfig,
    SpaceConfig, SweepConfig, Tolerances, UniformConfig,
};
pub use experiments::{
    excursions, range, space, write_trace, ExcursionReport, RangeReport, RangeRow, SpaceReport, StatRow,
};
pub use output::{csv_table, emit, render};
pub use sweep::{phase_sweep, Family, McSummary, SweepPoint, SweepReport};
pub use uniform::{kolmogorov_p_value, uniform_limit_test, ControlReport, UniformReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    PositiveRecurrent,
    NullRecurrent,
    /// The underlying walk is transient, so the impatient walk is too.
    Transient,
    Inconclusive,
}

impl From<Phase> for Class {
    fn from(p: Phase) -> Self {
        match p {
            Phase::PositiveRecurrent => Class::PositiveRecurrent,
            Phase::NullRecurrent => Class::NullRecurrent,
            Phase::TransientUnderlying => Class::Transient,
            Phase::Inconclusive => Class::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Series,
    MonteCarlo,
}

/// A recurrence verdict together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict3 {
    pub class: Class,
    pub provenance: Provenance,
}

impl Verdict3 {
    pub fn closed_form(p: Phase) -> Self {
        Self { class: p.into(), provenance: Provenance::ClosedForm }
    }

    /// Converged series mean positive recurrence, divergent ones null
    /// recurrence.
    pub fn series(v: &crate::passage::SeriesVerdict) -> Self {
        use crate::passage::Verdict;
        let class = match v.verdict {
            Verdict::Converged(_) => Class::PositiveRecurrent,
            Verdict::Diverged => Class::NullRecurrent,
            Verdict::Inconclusive => Class::Inconclusive,
        };
        Self { class, provenance: Provenance::Series }
    }

    /// Monte Carlo evidence never yields a hard verdict.
    pub fn monte_carlo() -> Self {
        Self { class: Class::Inconclusive, provenance: Provenance::MonteCarlo }
    }

    pub fn is_hard(&self) -> bool {
        matches!(self.class, Class::PositiveRecurrent | Class::NullRecurrent | Class::Transient)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "result", rename_all = "kebab-case")]
pub enum Report {
    PhaseSweep(SweepReport),
    UniformTest(UniformReport),
    Classify(ClassifyReport),
    Excursions(ExcursionReport),
    Range(RangeReport),
    Space(SpaceReport),
}

/// Everything written for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub seed: u64,
    pub config_hash: String,
    pub passed: bool,
    pub config: ExperimentConfig,
    pub report: Report,
}

/// Run the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let (passed, report) = match config.experiment {
        Experiment::PhaseSweep => {
            let r = phase_sweep(config)?;
            (r.disagreements == 0, Report::PhaseSweep(r))
        }
        Experiment::UniformTest => {
            let r = uniform_limit_test(config)?;
            (r.pass, Report::UniformTest(r))
        }
        Experiment::Classify => (true, Report::Classify(classify(config)?)),
        Experiment::Excursions => {
            let r = excursions(config)?;
            (r.pass, Report::Excursions(r))
        }
        Experiment::Range => {
            let r = range(config)?;
            (r.violations == 0, Report::Range(r))
        }
        Experiment::Space => {
            let r = space(config)?;
            (r.pass, Report::Space(r))
        }
    };
    Ok(RunOutput { seed: config.seed, config_hash: config.hash(), passed, config: config.clone(), report })
}

/// Process exit code for a run: 0 if every assertion passed, 1 on an
/// assertion or gate failure, 2 on configuration or I/O errors.
pub fn exit_code(outcome: &Result<RunOutput>) -> i32 {
    match outcome {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(Error::GateFailed(_)) => 1,
        Err(_) => 2,
    }
}

/// Seed for sub-experiment `index`, mixed with SplitMix64.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Call `$body` with `$k` bound to the concrete kernel inside `$built`.
macro_rules! with_kernel {
    ($built:expr, $k:ident => $body:expr) => {
        match $built {
            $crate::harness::Built::Line($k) => $body,
            $crate::harness::Built::Orbit($k) => $body,
            $crate::harness::Built::Lattice($k) => $body,
        }
    };
}
pub(crate) use with_kernel;
