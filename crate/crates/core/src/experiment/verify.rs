use std::fmt;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{check_separation_enumerated, county_slices};
use crate::error::Result;
use crate::fixtures;
use crate::game::{
    check_partition_identity, check_separation, non_game_profile, phi, theorem2_condition,
    utility, Instance, NonGameCondition, PneCertificate, StrategyProfile, UtilityKind, Weight,
};
use crate::solver::{self, SolveStatus};

/// A row of a hand-written deviation table: every full-budget profile where
/// `lake`'s selection equals `selected` and the deviating county does not
/// already play `response` must gain strictly by switching to `response`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationRow {
    pub label: &'static str,
    pub lake: usize,
    pub selected: bool,
    pub county: usize,
    pub response: Vec<usize>,
}

/// Tables for the bundled `k2ce` and `k1ce` instances.
pub fn deviation_table(name: &str) -> Vec<DeviationRow> {
    let row = |label, lake, selected, county, response: &[usize]| DeviationRow {
        label,
        lake,
        selected,
        county,
        response: response.to_vec(),
    };
    match name {
        "k2ce" => vec![
            row("x_A1 = 1, x^B != (0,1) -> B plays (0,1)", 0, true, 1, &[3]),
            row("x_A1 != 1, x^B != (1,0) -> B plays (1,0)", 0, false, 1, &[2]),
            row("x_B1 = 1, x^A != (1,0) -> A plays (1,0)", 2, true, 0, &[0]),
            row("x_B1 != 1, x^A != (0,1) -> A plays (0,1)", 2, false, 0, &[1]),
        ],
        "k1ce" => vec![
            row("x_A3 = 1, x^B != (1,0,0) -> B plays (1,0,0)", 2, true, 1, &[6]),
            row("x_A3 != 1, x^B != (0,1,0) -> B plays (0,1,0)", 2, false, 1, &[7]),
            row("x_B1 = 1, x^A != (1,1,0,0,0,0) -> A plays (1,1,0,0,0,0)", 6, true, 0, &[0, 1]),
            row("x_B1 != 1, x^A != (0,0,1,1,0,0) -> A plays (0,0,1,1,0,0)", 6, false, 0, &[2, 3]),
        ],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowViolation {
    pub profile: StrategyProfile,
    pub current: Weight,
    pub deviated: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCheck {
    pub row: usize,
    pub label: &'static str,
    pub profiles_checked: usize,
    pub violation: Option<RowViolation>,
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub name: String,
    pub profiles: usize,
    /// Profiles without a strict selfish deviation.
    pub equilibria: Vec<(StrategyProfile, Weight)>,
    pub rows: Vec<RowCheck>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.equilibria.is_empty() && self.rows.iter().all(|r| r.violation.is_none())
    }

    /// Violated table rows first, then profiles without a deviation.
    pub fn failures(&self) -> Vec<String> {
        let rows = self.rows.iter().filter_map(|r| {
            r.violation.as_ref().map(|v| {
                format!(
                    "{}: row {} ({}) fails at {}: utility {} -> {}",
                    self.name,
                    r.row + 1,
                    r.label,
                    v.profile,
                    v.current,
                    v.deviated
                )
            })
        });
        let pnes = self.equilibria.iter().map(|(p, v)| {
            format!("{}: profile {} (phi {}) has no selfish deviation", self.name, p, v)
        });
        rows.chain(pnes).collect()
    }

    pub fn first_failure(&self) -> Option<String> {
        self.failures().into_iter().next()
    }
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} profiles, {} without a selfish deviation",
            self.name,
            self.profiles,
            self.equilibria.len()
        )?;
        for (p, v) in &self.equilibria {
            writeln!(f, "  equilibrium {} (phi {})", p, v)?;
        }
        for r in &self.rows {
            match &r.violation {
                None => writeln!(
                    f,
                    "  row {} ok over {} profiles: {}",
                    r.row + 1,
                    r.profiles_checked,
                    r.label
                )?,
                Some(v) => writeln!(
                    f,
                    "  row {} FAILED: {} at {} (utility {} -> {})",
                    r.row + 1,
                    r.label,
                    v.profile,
                    v.current,
                    v.deviated
                )?,
            }
        }
        Ok(())
    }
}

fn all_profiles(instance: &Instance, full_budget_only: bool) -> Vec<StrategyProfile> {
    let slices: Vec<Vec<Vec<usize>>> = (0..instance.num_counties())
        .map(|c| {
            let want = instance.county(c).budget.min(instance.county(c).lakes.len());
            county_slices(instance, c)
                .into_iter()
                .filter(|s| !full_budget_only || s.len() == want)
                .collect()
        })
        .collect();
    let mut out = vec![StrategyProfile::zeros(instance.num_lakes())];
    for county in &slices {
        out = out
            .iter()
            .flat_map(|x| {
                county.iter().map(move |s| {
                    let mut y = x.clone();
                    for &i in s {
                        y.set(i, true);
                    }
                    y
                })
            })
            .collect();
    }
    out
}

/// Exhaustive check of an instance claimed to have no selfish equilibrium,
/// plus its deviation table. Table rows range over full-budget profiles.
pub fn verify_counterexample(
    name: &str,
    instance: &Instance,
    rows: &[DeviationRow],
) -> CounterexampleReport {
    let kind = UtilityKind::Selfish;
    let profiles = all_profiles(instance, false);
    let equilibria = profiles
        .iter()
        .filter(|x| check_separation_enumerated(instance, kind, x).is_pne())
        .map(|x| (x.clone(), phi(instance, x)))
        .collect();

    let full = all_profiles(instance, true);
    let checks = rows
        .iter()
        .enumerate()
        .map(|(idx, row)| {
            let mut checked = 0;
            let mut violation = None;
            for x in &full {
                if x.is_selected(row.lake) != row.selected
                    || x.county_selection(instance, row.county) == row.response
                {
                    continue;
                }
                checked += 1;
                let current = utility(instance, kind, row.county, x);
                let y = x.with_county_selection(instance, row.county, &row.response);
                let deviated = utility(instance, kind, row.county, &y);
                if deviated <= current && violation.is_none() {
                    violation = Some(RowViolation {
                        profile: x.clone(),
                        current,
                        deviated,
                    });
                }
            }
            RowCheck {
                row: idx,
                label: row.label,
                profiles_checked: checked,
                violation,
            }
        })
        .collect();

    CounterexampleReport {
        name: name.to_string(),
        profiles: profiles.len(),
        equilibria,
        rows: checks,
    }
}

/// Both bundled counterexamples, `k2ce` first.
pub fn verify_counterexamples() -> Vec<CounterexampleReport> {
    [("k2ce", fixtures::k2ce()), ("k1ce", fixtures::k1ce())]
        .iter()
        .map(|(name, inst)| verify_counterexample(name, inst, &deviation_table(name)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryOptions {
    pub seed: u64,
    pub profiles: usize,
    pub deviations: usize,
    /// Time allowed for the exact social solve; past it the check is skipped.
    pub sb_time_limit: Option<Duration>,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            seed: 0,
            profiles: 100,
            deviations: 100,
            sb_time_limit: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    Passed(String),
    Failed(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryCheck {
    pub name: &'static str,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, Default)]
pub struct TheoryReport {
    pub checks: Vec<TheoryCheck>,
}

impl TheoryReport {
    pub fn passed(&self) -> bool {
        !self
            .checks
            .iter()
            .any(|c| matches!(c.outcome, CheckOutcome::Failed(_)))
    }

    pub fn first_failure(&self) -> Option<&TheoryCheck> {
        self.checks
            .iter()
            .find(|c| matches!(c.outcome, CheckOutcome::Failed(_)))
    }
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.outcome {
                CheckOutcome::Passed(d) => writeln!(f, "PASS {}: {}", c.name, d)?,
                CheckOutcome::Failed(d) => writeln!(f, "FAIL {}: {}", c.name, d)?,
                CheckOutcome::Skipped(d) => writeln!(f, "SKIP {}: {}", c.name, d)?,
            }
        }
        Ok(())
    }
}

/// Random profile with a uniformly drawn number of lakes per county.
fn random_any_size<R: Rng>(instance: &Instance, rng: &mut R) -> StrategyProfile {
    let mut x = StrategyProfile::zeros(instance.num_lakes());
    for c in 0..instance.num_counties() {
        let county = instance.county(c);
        let k = rng.gen_range(0..=county.budget.min(county.lakes.len()));
        for &i in county.lakes.choose_multiple(rng, k) {
            x.set(i, true);
        }
    }
    x
}

fn random_slice<R: Rng>(instance: &Instance, c: usize, rng: &mut R) -> Vec<usize> {
    let county = instance.county(c);
    let k = rng.gen_range(0..=county.budget.min(county.lakes.len()));
    let mut s: Vec<usize> = county.lakes.choose_multiple(rng, k).copied().collect();
    s.sort_unstable();
    s
}

/// Structural identities, with `utility_fn` standing in for the utility
/// evaluation so a broken implementation can be exercised.
pub fn verify_theory_with<U>(
    instance: &Instance,
    utility_fn: U,
    opts: &TheoryOptions,
) -> Result<TheoryReport>
where
    U: Fn(UtilityKind, usize, &StrategyProfile) -> Weight,
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = TheoryReport::default();

    report.checks.push(TheoryCheck {
        name: "partition identity",
        outcome: if check_partition_identity(instance) {
            CheckOutcome::Passed(format!(
                "{} arcs split over {} inbound sets",
                instance.num_arcs(),
                instance.num_counties()
            ))
        } else {
            CheckOutcome::Failed("inbound arc sets do not partition the arcs".into())
        },
    });

    let mut outcome = CheckOutcome::Passed(format!("{} random profiles", opts.profiles));
    for _ in 0..opts.profiles {
        let x = random_any_size(instance, &mut rng);
        let sum: Weight = (0..instance.num_counties())
            .map(|c| utility_fn(UtilityKind::Selfish, c, &x))
            .sum();
        let p = phi(instance, &x);
        if sum != p {
            outcome = CheckOutcome::Failed(format!(
                "profile {}: phi {} but selfish utilities sum to {}",
                x, p, sum
            ));
            break;
        }
    }
    report.checks.push(TheoryCheck { name: "potential equals selfish sum", outcome });

    let mut outcome = CheckOutcome::Passed(format!("{} random deviations", opts.deviations));
    if instance.num_counties() > 0 {
        for _ in 0..opts.deviations {
            let x = random_any_size(instance, &mut rng);
            let c = rng.gen_range(0..instance.num_counties());
            let y = x.with_county_selection(instance, c, &random_slice(instance, c, &mut rng));
            let dphi = phi(instance, &y) - phi(instance, &x);
            let du = utility_fn(UtilityKind::Altruistic, c, &y)
                - utility_fn(UtilityKind::Altruistic, c, &x);
            if dphi != du {
                outcome = CheckOutcome::Failed(format!(
                    "county {} moving {} -> {}: potential changes by {}, utility by {}",
                    c, x, y, dphi, du
                ));
                break;
            }
        }
    }
    report.checks.push(TheoryCheck { name: "exact potential", outcome });

    let mut sb = solver::build_sb(instance);
    sb.time_limit = opts.sb_time_limit;
    let res = solver::solve(&sb)?;
    let outcome = match (res.status, res.profile) {
        (SolveStatus::Optimal, Some(x)) => {
            match check_separation(instance, UtilityKind::Altruistic, &x)? {
                PneCertificate::IsPne => {
                    CheckOutcome::Passed(format!("social optimum {} (phi {})", x, res.objective))
                }
                PneCertificate::Deviation(d) => CheckOutcome::Failed(format!(
                    "social optimum {}: county {} gains {} by playing {:?}",
                    x, d.county, d.gain, d.response
                )),
            }
        }
        (status, _) => CheckOutcome::Skipped(format!("social model ended {}", status.as_str())),
    };
    report.checks.push(TheoryCheck {
        name: "social optimum is altruistic equilibrium",
        outcome,
    });

    let ng = non_game_profile(instance)?;
    let outcome = match theorem2_condition(instance, &ng) {
        NonGameCondition::NotApplicable => CheckOutcome::Skipped(format!(
            "non-game profile {} meets neither condition",
            ng
        )),
        cond => match check_separation(instance, UtilityKind::Selfish, &ng)? {
            PneCertificate::IsPne => {
                CheckOutcome::Passed(format!("non-game profile {} ({:?})", ng, cond))
            }
            PneCertificate::Deviation(d) => CheckOutcome::Failed(format!(
                "non-game profile {} ({:?}): county {} gains {}",
                ng, cond, d.county, d.gain
            )),
        },
    };
    report.checks.push(TheoryCheck {
        name: "non-game profile is selfish equilibrium",
        outcome,
    });

    Ok(report)
}

pub fn verify_theory(instance: &Instance, opts: &TheoryOptions) -> Result<TheoryReport> {
    verify_theory_with(instance, |kind, c, x| utility(instance, kind, c, x), opts)
}
