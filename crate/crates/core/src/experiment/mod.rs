//! Batch experiments: plans over instances and algorithms, dependency-ordered
//! execution, results CSV and the theory/counterexample verifiers.

mod verify;

pub use verify::{
    deviation_table, verify_counterexample, verify_counterexamples, verify_theory,
    verify_theory_with, CheckOutcome, CounterexampleReport, DeviationRow, RowCheck, TheoryCheck,
    TheoryOptions, TheoryReport,
};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, BrPlusExit, DynamicsConfig, RunRecord};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::game::{phi, Instance, StrategyProfile, UtilityKind, Weight};
use crate::instance_io::{self, GenParams};
use crate::solver;

pub const CSV_HEADER: [&str; 12] = [
    "instance",
    "algorithm",
    "init_label",
    "utility_kind",
    "phi",
    "pne_found",
    "rounds",
    "cycle_detected",
    "cuts_added",
    "status",
    "elapsed_s",
    "error",
];

/// One column of the experiment table. The variants are listed in an order
/// where every warm-start producer precedes its consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmSpec {
    Sb,
    Sbw,
    BrsZero,
    BrsSbw,
    BrpZero,
    BrpSbw,
    ZrZero,
    ZrSbw,
    ZrPne1,
    ZrPne2,
}

impl AlgorithmSpec {
    pub const ALL: [AlgorithmSpec; 10] = [
        AlgorithmSpec::Sb,
        AlgorithmSpec::Sbw,
        AlgorithmSpec::BrsZero,
        AlgorithmSpec::BrsSbw,
        AlgorithmSpec::BrpZero,
        AlgorithmSpec::BrpSbw,
        AlgorithmSpec::ZrZero,
        AlgorithmSpec::ZrSbw,
        AlgorithmSpec::ZrPne1,
        AlgorithmSpec::ZrPne2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AlgorithmSpec::Sb => "SB",
            AlgorithmSpec::Sbw => "SBW",
            AlgorithmSpec::BrsZero => "BRS(0)",
            AlgorithmSpec::BrsSbw => "BRS(sbw)",
            AlgorithmSpec::BrpZero => "BRP(0)",
            AlgorithmSpec::BrpSbw => "BRP(sbw)",
            AlgorithmSpec::ZrZero => "ZR(0)",
            AlgorithmSpec::ZrSbw => "ZR(sbw)",
            AlgorithmSpec::ZrPne1 => "ZR(pne1)",
            AlgorithmSpec::ZrPne2 => "ZR(pne2)",
        }
    }

    /// Algorithm column of the CSV.
    pub fn family(self) -> &'static str {
        match self {
            AlgorithmSpec::Sb => "SB",
            AlgorithmSpec::Sbw => "SBW",
            AlgorithmSpec::BrsZero | AlgorithmSpec::BrsSbw => "BRS",
            AlgorithmSpec::BrpZero | AlgorithmSpec::BrpSbw => "BRP",
            _ => "ZR",
        }
    }

    pub fn init_label(self) -> &'static str {
        match self {
            AlgorithmSpec::Sb | AlgorithmSpec::Sbw => "",
            AlgorithmSpec::BrsZero | AlgorithmSpec::BrpZero | AlgorithmSpec::ZrZero => "0",
            AlgorithmSpec::BrsSbw | AlgorithmSpec::BrpSbw | AlgorithmSpec::ZrSbw => "sbw",
            AlgorithmSpec::ZrPne1 => "pne1",
            AlgorithmSpec::ZrPne2 => "pne2",
        }
    }

    /// The row whose profile this one starts from.
    pub fn producer(self) -> Option<AlgorithmSpec> {
        match self {
            AlgorithmSpec::BrsSbw | AlgorithmSpec::BrpSbw | AlgorithmSpec::ZrSbw => {
                Some(AlgorithmSpec::Sbw)
            }
            AlgorithmSpec::ZrPne1 => Some(AlgorithmSpec::BrsZero),
            AlgorithmSpec::ZrPne2 => Some(AlgorithmSpec::BrpZero),
            _ => None,
        }
    }

    fn is_equilibrium_search(self) -> bool {
        !matches!(self, AlgorithmSpec::Sb | AlgorithmSpec::Sbw)
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlgorithmSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        if norm == "zr" {
            return Ok(AlgorithmSpec::ZrZero);
        }
        AlgorithmSpec::ALL
            .into_iter()
            .find(|a| a.label().to_ascii_lowercase() == norm)
            .ok_or_else(|| {
                let known: Vec<_> = AlgorithmSpec::ALL.iter().map(|a| a.label()).collect();
                format!("unknown algorithm `{}` (expected one of {})", s, known.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InstanceSource {
    Generated(GenParams),
    File(PathBuf),
    /// One of the bundled instances, by name.
    Builtin(String),
}

impl InstanceSource {
    /// `builtin:<name>` selects a bundled instance; anything else is a path.
    pub fn parse(s: &str) -> Self {
        match s.strip_prefix("builtin:") {
            Some(name) => InstanceSource::Builtin(name.to_string()),
            None => InstanceSource::File(PathBuf::from(s)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            InstanceSource::Generated(p) => p.label(),
            InstanceSource::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            InstanceSource::Builtin(name) => name.clone(),
        }
    }

    pub fn load(&self) -> Result<Instance> {
        match self {
            InstanceSource::Generated(p) => instance_io::generate(p),
            InstanceSource::File(path) => instance_io::load_instance(path),
            InstanceSource::Builtin(name) => fixtures::by_name(name).ok_or_else(|| {
                Error::InvalidInstance(format!("no bundled instance named `{}`", name))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLimits {
    pub sb: Option<Duration>,
    pub sbw: Option<Duration>,
    pub zr: Option<Duration>,
    /// Bounded social model inside BR-plus.
    pub bounded: Option<Duration>,
}

impl Default for TimeLimits {
    fn default() -> Self {
        TimeLimits {
            sb: Some(Duration::from_secs(1800)),
            sbw: Some(Duration::from_secs(300)),
            zr: Some(Duration::from_secs(1800)),
            bounded: Some(Duration::from_secs(300)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub instances: Vec<InstanceSource>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub limits: TimeLimits,
    pub t_max: usize,
    pub init_max: usize,
    pub seed: u64,
    pub zr_cut_all_deviations: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let d = DynamicsConfig::default();
        ExperimentPlan {
            instances: Vec::new(),
            algorithms: Vec::new(),
            limits: TimeLimits::default(),
            t_max: d.t_max,
            init_max: d.init_max,
            seed: d.seed,
            zr_cut_all_deviations: d.zr_cut_all_deviations,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for src in &self.instances {
            if !names.insert(src.name()) {
                return Err(Error::InvalidParams(format!(
                    "instance name `{}` appears twice in the plan",
                    src.name()
                )));
            }
        }
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            if !seen.insert(*a) {
                return Err(Error::InvalidParams(format!("algorithm {} listed twice", a)));
            }
        }
        if self.t_max == 0 || self.init_max == 0 {
            return Err(Error::InvalidParams("t_max and init_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Requested algorithms plus their producers, in execution order.
    pub fn schedule(&self) -> Vec<AlgorithmSpec> {
        let mut set = BTreeSet::new();
        for &a in &self.algorithms {
            let mut cur = Some(a);
            while let Some(x) = cur {
                set.insert(x);
                cur = x.producer();
            }
        }
        set.into_iter().collect()
    }

    pub fn dynamics_config(&self) -> DynamicsConfig {
        DynamicsConfig {
            t_max: self.t_max,
            init_max: self.init_max,
            seed: self.seed,
            zr_time_limit: self.limits.zr,
            bounded_time_limit: self.limits.bounded,
            zr_cut_all_deviations: self.zr_cut_all_deviations,
        }
    }
}

/// One results row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: AlgorithmSpec,
    pub utility_kind: Option<UtilityKind>,
    pub phi: Option<Weight>,
    pub pne_found: Option<bool>,
    pub rounds: usize,
    pub cycle_detected: bool,
    pub cuts_added: usize,
    pub status: String,
    /// Own runtime plus the producer's (composite) runtime.
    pub elapsed: Duration,
    pub error: Option<String>,
    pub profile: Option<StrategyProfile>,
}

impl ResultRow {
    fn blank(instance: &str, algorithm: AlgorithmSpec) -> Self {
        ResultRow {
            instance: instance.to_string(),
            algorithm,
            utility_kind: algorithm
                .is_equilibrium_search()
                .then_some(UtilityKind::Selfish),
            phi: None,
            pne_found: algorithm.is_equilibrium_search().then_some(false),
            rounds: 0,
            cycle_detected: false,
            cuts_added: 0,
            status: String::new(),
            elapsed: Duration::ZERO,
            error: None,
            profile: None,
        }
    }

    fn from_record(instance: &str, algorithm: AlgorithmSpec, rec: &RunRecord, status: &str) -> Self {
        ResultRow {
            phi: rec.phi,
            pne_found: Some(rec.pne_found),
            rounds: rec.rounds,
            cycle_detected: rec.cycle_detected,
            cuts_added: rec.cuts_added,
            status: status.to_string(),
            elapsed: rec.elapsed,
            profile: rec.profile.clone(),
            ..ResultRow::blank(instance, algorithm)
        }
    }

    pub fn csv_record(&self) -> [String; 12] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.instance.clone(),
            self.algorithm.family().to_string(),
            self.algorithm.init_label().to_string(),
            opt(self.utility_kind.map(|k| k.as_str().to_string())),
            opt(self.phi.map(|v| v.to_string())),
            opt(self.pne_found.map(|v| v.to_string())),
            self.rounds.to_string(),
            self.cycle_detected.to_string(),
            self.cuts_added.to_string(),
            self.status.clone(),
            format!("{:.3}", self.elapsed.as_secs_f64()),
            opt(self.error.clone()),
        ]
    }
}

/// Optimality gap of BR-plus against the best ZR-verified equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct OgEntry {
    pub instance: String,
    /// `None` when ZR verified no equilibrium.
    pub og: Option<f64>,
}

pub fn optimality_gap(phi_zr: Option<Weight>, phi_brp: Option<Weight>) -> Option<f64> {
    let zr = phi_zr?;
    let brp = phi_brp.unwrap_or(0);
    if zr == 0 {
        return (brp == 0).then_some(0.0);
    }
    Some((zr - brp) as f64 / zr as f64)
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResults {
    pub rows: Vec<ResultRow>,
    pub og: Vec<OgEntry>,
}

impl ExperimentResults {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_results_csv(&self.rows, out)
    }
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every instance of the plan, up to `workers` instances at a time.
/// Rows come back grouped by instance in plan order, algorithms in schedule
/// order.
pub fn run_plan(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentResults> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {}", e)))?;
    let per_instance: Vec<Vec<ResultRow>> = pool.install(|| {
        plan.instances
            .par_iter()
            .map(|src| run_instance(plan, src))
            .collect()
    });

    let mut results = ExperimentResults::default();
    for rows in per_instance {
        let find = |a: AlgorithmSpec| rows.iter().find(|r| r.algorithm == a);
        if let (Some(zr), Some(brp)) = (find(AlgorithmSpec::ZrPne2), find(AlgorithmSpec::BrpZero)) {
            results.og.push(OgEntry {
                instance: zr.instance.clone(),
                og: optimality_gap(zr.phi, brp.phi),
            });
        }
        results.rows.extend(rows);
    }
    Ok(results)
}

fn run_instance(plan: &ExperimentPlan, src: &InstanceSource) -> Vec<ResultRow> {
    let name = src.name();
    let schedule = plan.schedule();
    let instance = match src.load() {
        Ok(inst) => inst,
        Err(e) => {
            return schedule
                .into_iter()
                .map(|a| ResultRow {
                    status: "error".into(),
                    error: Some(e.to_string()),
                    ..ResultRow::blank(&name, a)
                })
                .collect()
        }
    };
    let config = plan.dynamics_config();
    let mut done: HashMap<AlgorithmSpec, ResultRow> = HashMap::new();
    let mut rows = Vec::new();
    for a in schedule {
        let producer = a.producer().and_then(|p| done.get(&p));
        let mut row = run_one(&instance, &name, a, producer, plan, &config);
        if let Some(p) = producer {
            row.elapsed += p.elapsed;
        }
        done.insert(a, row.clone());
        rows.push(row);
    }
    rows
}

fn run_one(
    instance: &Instance,
    name: &str,
    a: AlgorithmSpec,
    producer: Option<&ResultRow>,
    plan: &ExperimentPlan,
    config: &DynamicsConfig,
) -> ResultRow {
    let zero = StrategyProfile::zeros(instance.num_lakes());
    let warm = producer.and_then(|p| p.profile.clone());
    let outcome = match a {
        AlgorithmSpec::Sb | AlgorithmSpec::Sbw => {
            let limit = if a == AlgorithmSpec::Sb { plan.limits.sb } else { plan.limits.sbw };
            run_social(instance, name, a, limit)
        }
        AlgorithmSpec::BrsZero | AlgorithmSpec::BrsSbw => {
            let Some(init) = init_for(a, &zero, warm) else {
                return skipped(name, a);
            };
            dynamics::brs_free(instance, &init, config).map(|out| {
                let status = if out.pne.is_some() { "pne" } else { "no_pne" };
                ResultRow::from_record(name, a, &out.record, status)
            })
        }
        AlgorithmSpec::BrpZero | AlgorithmSpec::BrpSbw => {
            let Some(init) = init_for(a, &zero, warm) else {
                return skipped(name, a);
            };
            dynamics::br_plus(instance, &init, config).map(|out| {
                let status = match out.exit {
                    BrPlusExit::DynamicsFailed if out.best.is_none() => "no_pne",
                    BrPlusExit::DynamicsFailed => "dynamics_failed",
                    BrPlusExit::NoProgress => "no_progress",
                    BrPlusExit::BoundedOptimal => "bounded_optimal",
                };
                ResultRow::from_record(name, a, &out.record, status)
            })
        }
        _ => dynamics::zr(instance, warm.as_ref(), config).map(|out| {
            let status = match (out.pne.is_some(), out.record.timed_out) {
                (true, false) => "optimal",
                (true, true) => "time_limit_pne",
                (false, true) => "time_limit",
                (false, false) => "infeasible",
            };
            ResultRow::from_record(name, a, &out.record, status)
        }),
    };
    outcome.unwrap_or_else(|e| ResultRow {
        status: "error".into(),
        error: Some(e.to_string()),
        ..ResultRow::blank(name, a)
    })
}

fn init_for(
    a: AlgorithmSpec,
    zero: &StrategyProfile,
    warm: Option<StrategyProfile>,
) -> Option<StrategyProfile> {
    if a.producer().is_some() {
        warm
    } else {
        Some(zero.clone())
    }
}

fn skipped(name: &str, a: AlgorithmSpec) -> ResultRow {
    ResultRow {
        status: "skipped".into(),
        error: Some(format!(
            "producer {} has no profile",
            a.producer().map(|p| p.label()).unwrap_or("?")
        )),
        ..ResultRow::blank(name, a)
    }
}

fn run_social(
    instance: &Instance,
    name: &str,
    a: AlgorithmSpec,
    limit: Option<Duration>,
) -> Result<ResultRow> {
    let started = Instant::now();
    let mut model = solver::build_sb(instance);
    model.time_limit = limit;
    let res = solver::solve(&model)?;
    let phi_val = res.profile.as_ref().map(|p| phi(instance, p));
    Ok(ResultRow {
        phi: phi_val,
        status: res.status.as_str().to_string(),
        elapsed: started.elapsed(),
        profile: res.profile,
        ..ResultRow::blank(name, a)
    })
}

/// Whether two row sets agree on everything but elapsed time.
pub fn rows_match_ignoring_time(a: &[ResultRow], b: &[ResultRow]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            ResultRow { elapsed: Duration::ZERO, ..x.clone() }
                == ResultRow { elapsed: Duration::ZERO, ..y.clone() }
        })
}
