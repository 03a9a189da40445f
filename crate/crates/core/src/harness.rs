//! Seeded Monte Carlo sweeps over one scenario axis.
//!
//! Every trial draws one channel realization and solves all requested
//! modes on it. The trial seed depends only on the base seed and the trial
//! index, so trial `t` sees the same random numbers at every axis value
//! (common random numbers). Axis-to-axis differences then reflect the
//! axis, not fresh fading.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::synthesize_channels;
use crate::optimizer::run_alternating;
use crate::rates::Solution;
use crate::rng::{mix64, substream, Substream};
use crate::scenario::{squarest_shape, Mode, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("{axis} = {value} gives an invalid scenario: {source}")]
    InvalidValue {
        axis: SweepAxis,
        value: f64,
        source: ScenarioError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    XU,
    NElements,
    AActive,
    FEdge,
    FLocal,
    EAntennas,
    PaMaxDbm,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::XU,
        SweepAxis::NElements,
        SweepAxis::AActive,
        SweepAxis::FEdge,
        SweepAxis::FLocal,
        SweepAxis::EAntennas,
        SweepAxis::PaMaxDbm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::XU => "x_u",
            SweepAxis::NElements => "n_elements",
            SweepAxis::AActive => "a_active",
            SweepAxis::FEdge => "f_edge",
            SweepAxis::FLocal => "f_local",
            SweepAxis::EAntennas => "e_antennas",
            SweepAxis::PaMaxDbm => "pa_max_dbm",
        }
    }

    fn is_integer(self) -> bool {
        matches!(
            self,
            SweepAxis::NElements | SweepAxis::AActive | SweepAxis::EAntennas
        )
    }

    /// `base` with this axis set to `value`, validated.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario, HarnessError> {
        let invalid = |msg: String| HarnessError::InvalidValue {
            axis: self,
            value,
            source: ScenarioError::Validation {
                field: self.as_str(),
                msg,
            },
        };
        if self.is_integer() && !(value >= 0.0 && value.fract() == 0.0) {
            return Err(invalid("must be a non-negative integer".into()));
        }
        let mut s = base.clone();
        match self {
            SweepAxis::XU => s.geometry.x_u = value,
            SweepAxis::NElements => {
                s.n_elements = value as usize;
                s.upa_shape = squarest_shape(s.n_elements);
            }
            SweepAxis::AActive => {
                s.a_active = value as usize;
                s.fixed_active_set = (0..s.a_active).collect();
            }
            SweepAxis::FEdge => s.compute.edge_rate = value,
            SweepAxis::FLocal => s.compute.local_rate = value,
            SweepAxis::EAntennas => s.e_antennas = value as usize,
            SweepAxis::PaMaxDbm => s.p_active_max_dbm = value,
        }
        s.validate().map_err(|source| HarnessError::InvalidValue {
            axis: self,
            value,
            source,
        })?;
        Ok(s)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown sweep axis `{s}`"))
    }
}

/// A solver mode or the all-local reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunMode {
    LocalOnly,
    Solver(Mode),
}

impl RunMode {
    pub const ALL: [RunMode; 5] = [
        RunMode::LocalOnly,
        RunMode::Solver(Mode::RisRandom),
        RunMode::Solver(Mode::RisOptimized),
        RunMode::Solver(Mode::HrrisFixed),
        RunMode::Solver(Mode::HrrisDynamic),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::LocalOnly => "local_only",
            RunMode::Solver(m) => m.as_str(),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "local_only" {
            Ok(RunMode::LocalOnly)
        } else {
            s.parse().map(RunMode::Solver)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub modes: Vec<RunMode>,
}

impl SweepSpec {
    /// `start, start + step, ...` up to and including `stop`.
    pub fn range(axis: SweepAxis, start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
        if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(format!("bad range {start}:{stop}:{step}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let _ = axis;
        Ok((0..count).map(|k| start + k as f64 * step).collect())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.values.is_empty() {
            return Err(HarnessError::InvalidSpec("no axis values".into()));
        }
        if self.values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(HarnessError::InvalidSpec(
                "axis values must be strictly increasing".into(),
            ));
        }
        if self.trials == 0 {
            return Err(HarnessError::InvalidSpec("trials must be >= 1".into()));
        }
        if self.modes.is_empty() {
            return Err(HarnessError::InvalidSpec("no modes requested".into()));
        }
        Ok(())
    }
}

/// Seed of trial `t`; identical at every axis value.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed ^ mix64(trial as u64)
}

/// Solve every requested mode on one shared channel realization.
pub fn run_trial(s: &Scenario, seed: u64, modes: &[RunMode]) -> BTreeMap<RunMode, Solution> {
    let cs = synthesize_channels(s, seed);
    modes
        .iter()
        .map(|&m| {
            let sol = match m {
                RunMode::LocalOnly => Solution::local_only(&s.compute),
                RunMode::Solver(mode) => {
                    let sm = s.with_mode(mode);
                    run_alternating(&sm, &cs, &mut substream(seed, Substream::PhaseInit))
                }
            };
            (m, sol)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub axis: SweepAxis,
    pub value: f64,
    pub mode: RunMode,
    pub trial: usize,
    pub seed: u64,
    pub latency_s: f64,
    pub secrecy_rate_bps: f64,
    pub rate_en_bps: f64,
    pub leakage_bps: f64,
    pub ell_bits: u64,
    pub iterations: usize,
    pub converged: bool,
    pub active_power_w: f64,
    pub budget_exceeded: bool,
}

pub const CSV_HEADER: [&str; 14] = [
    "axis",
    "value",
    "mode",
    "trial",
    "seed",
    "latency_s",
    "secrecy_rate_bps",
    "rate_en_bps",
    "leakage_bps",
    "ell_bits",
    "iterations",
    "converged",
    "active_power_w",
    "budget_exceeded",
];

impl Record {
    fn new(axis: SweepAxis, value: f64, mode: RunMode, trial: usize, seed: u64, sol: &Solution) -> Self {
        Record {
            axis,
            value,
            mode,
            trial,
            seed,
            latency_s: sol.latency,
            secrecy_rate_bps: sol.secrecy_rate,
            rate_en_bps: sol.rate_en,
            leakage_bps: sol.leakage_bound,
            ell_bits: sol.offload_bits,
            iterations: sol.iterations,
            converged: sol.converged,
            active_power_w: sol.active_power,
            budget_exceeded: sol.budget_exceeded,
        }
    }

    fn fields(&self) -> [String; 14] {
        [
            self.axis.to_string(),
            self.value.to_string(),
            self.mode.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.latency_s.to_string(),
            self.secrecy_rate_bps.to_string(),
            self.rate_en_bps.to_string(),
            self.leakage_bps.to_string(),
            self.ell_bits.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.active_power_w.to_string(),
            self.budget_exceeded.to_string(),
        ]
    }
}

/// Raw sweep output plus the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: SweepSpec,
    pub base: Scenario,
    /// Ordered by value, then mode (as listed in the spec), then trial.
    pub records: Vec<Record>,
}

impl ResultTable {
    pub fn cell(&self, value: f64, mode: RunMode) -> impl Iterator<Item = &Record> {
        self.records
            .iter()
            .filter(move |r| r.value == value && r.mode == mode)
    }

    pub fn mean_latency(&self, value: f64, mode: RunMode) -> f64 {
        let (sum, n) = self
            .cell(value, mode)
            .fold((0.0, 0usize), |(s, n), r| (s + r.latency_s, n + 1));
        sum / n as f64
    }

    /// Mean and median latency per (value, mode) cell.
    pub fn summarize(&self) -> Vec<CellSummary> {
        let mut out = Vec::new();
        for &value in &self.spec.values {
            for &mode in &self.spec.modes {
                let mut lat: Vec<f64> = self.cell(value, mode).map(|r| r.latency_s).collect();
                if lat.is_empty() {
                    continue;
                }
                lat.sort_by(f64::total_cmp);
                let n = lat.len();
                let median = if n % 2 == 1 {
                    lat[n / 2]
                } else {
                    0.5 * (lat[n / 2 - 1] + lat[n / 2])
                };
                out.push(CellSummary {
                    value,
                    mode,
                    trials: n,
                    mean_latency_s: lat.iter().sum::<f64>() / n as f64,
                    median_latency_s: median,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub value: f64,
    pub mode: RunMode,
    pub trials: usize,
    pub mean_latency_s: f64,
    pub median_latency_s: f64,
}

/// Run every (value, trial) pair on the rayon pool.
pub fn run_sweep(spec: &SweepSpec, base: &Scenario) -> Result<ResultTable, HarnessError> {
    spec.validate()?;
    let scenarios: Vec<Scenario> = spec
        .values
        .iter()
        .map(|&v| spec.axis.apply(base, v))
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|i| (0..spec.trials).map(move |t| (i, t)))
        .collect();
    let mode_rank = |m: RunMode| spec.modes.iter().position(|&x| x == m).unwrap_or(usize::MAX);

    let mut keyed: Vec<((usize, usize, usize), Record)> = jobs
        .par_iter()
        .flat_map_iter(|&(i, t)| {
            let seed = trial_seed(spec.base_seed, t);
            let solved = run_trial(&scenarios[i], seed, &spec.modes);
            let value = spec.values[i];
            solved
                .into_iter()
                .map(move |(m, sol)| {
                    let rec = Record::new(spec.axis, value, m, t, seed, &sol);
                    ((i, mode_rank(m), t), rec)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    keyed.sort_by_key(|(k, _)| *k);

    Ok(ResultTable {
        spec: spec.clone(),
        base: base.clone(),
        records: keyed.into_iter().map(|(_, r)| r).collect(),
    })
}

/// CSV with a `#` provenance block. Unless `deterministic`, the block
/// includes a generation timestamp.
pub fn write_csv_to<W: Write>(
    table: &ResultTable,
    mut out: W,
    deterministic: bool,
) -> Result<(), HarnessError> {
    writeln!(out, "# hrris-mec sweep results")?;
    if !deterministic {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(out, "# generated_unix_s = {secs}")?;
    }
    for line in table.base.to_config_string().lines() {
        writeln!(out, "# scenario.{line}")?;
    }
    let spec = &table.spec;
    let join = |v: Vec<String>| v.join(", ");
    writeln!(out, "# sweep.axis = {}", spec.axis)?;
    writeln!(
        out,
        "# sweep.values = {}",
        join(spec.values.iter().map(|v| v.to_string()).collect())
    )?;
    writeln!(out, "# sweep.trials = {}", spec.trials)?;
    writeln!(out, "# sweep.base_seed = {}", spec.base_seed)?;
    writeln!(
        out,
        "# sweep.modes = {}",
        join(spec.modes.iter().map(|m| m.to_string()).collect())
    )?;

    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(table: &ResultTable, path: &Path, deterministic: bool) -> Result<(), HarnessError> {
    let file = BufWriter::new(File::create(path)?);
    write_csv_to(table, file, deterministic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_base() -> Scenario {
        let mut s = Scenario::default();
        s.n_elements = 8;
        s.upa_shape = (2, 4);
        s
    }

    #[test]
    fn range_parsing() {
        let v = SweepSpec::range(SweepAxis::XU, 10.0, 100.0, 5.0).unwrap();
        assert_eq!(v.len(), 19);
        assert_eq!(v[0], 10.0);
        assert_eq!(*v.last().unwrap(), 100.0);
        assert!(SweepSpec::range(SweepAxis::XU, 10.0, 5.0, 1.0).is_err());
        assert!(SweepSpec::range(SweepAxis::XU, 0.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for a in SweepAxis::ALL {
            assert_eq!(a.as_str().parse::<SweepAxis>().unwrap(), a);
        }
        for m in RunMode::ALL {
            assert_eq!(m.as_str().parse::<RunMode>().unwrap(), m);
        }
        assert!("hrris".parse::<RunMode>().is_err());
    }

    #[test]
    fn axis_overrides() {
        let s = SweepAxis::NElements.apply(&Scenario::default(), 36.0).unwrap();
        assert_eq!(s.upa_shape, (6, 6));
        let s = SweepAxis::AActive.apply(&Scenario::default(), 3.0).unwrap();
        assert_eq!(s.fixed_active_set, vec![0, 1, 2]);
        let err = SweepAxis::AActive.apply(&small_base(), 9.0).unwrap_err();
        assert!(err.to_string().contains("a_active = 9"), "{err}");
        assert!(SweepAxis::EAntennas.apply(&small_base(), 1.5).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec {
            axis: SweepAxis::XU,
            values: vec![10.0, 20.0],
            trials: 1,
            base_seed: 0,
            modes: vec![RunMode::LocalOnly],
        };
        assert!(spec.validate().is_ok());
        spec.values = vec![20.0, 10.0];
        assert!(spec.validate().is_err());
        spec.values = vec![];
        assert!(spec.validate().is_err());
        spec.values = vec![1.0];
        spec.trials = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn trial_is_deterministic_and_local_reference_exact() {
        let s = small_base();
        let a = run_trial(&s, 77, &RunMode::ALL);
        let b = run_trial(&s, 77, &RunMode::ALL);
        assert_eq!(a, b);
        assert_eq!(a[&RunMode::LocalOnly].latency, 0.45);
    }

    #[test]
    fn table_ordering_and_count() {
        let spec = SweepSpec {
            axis: SweepAxis::XU,
            values: vec![20.0, 45.0],
            trials: 3,
            base_seed: 5,
            modes: vec![RunMode::Solver(Mode::RisOptimized), RunMode::LocalOnly],
        };
        let t = run_sweep(&spec, &small_base()).unwrap();
        assert_eq!(t.records.len(), 2 * 3 * 2);
        assert_eq!(t.records[0].mode, RunMode::Solver(Mode::RisOptimized));
        assert_eq!(t.records[3].mode, RunMode::LocalOnly);
        assert_eq!(t.records[6].value, 45.0);
        let sums = t.summarize();
        assert_eq!(sums.len(), 4);
        assert_eq!(sums[1].mean_latency_s, 0.45);
    }
}
