//! Equilibrium search: sequence-free best-response dynamics, the BR-plus
//! refinement loop, the zero-regret cutting-plane method and a brute-force
//! equilibrium enumerator used as an oracle.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    self, check_separation, check_separation_with, find_deviations, phi, utility, BestResponse,
    Deviation, Instance, PneCertificate, StrategyProfile, UtilityKind, Weight,
};
use crate::solver::{self, LinearConstraint, SolveStatus};

/// Profiles at the end of each completed round, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History(Vec<StrategyProfile>);

impl History {
    pub fn new() -> Self {
        History(Vec::new())
    }

    pub fn push(&mut self, x: StrategyProfile) {
        self.0.push(x);
    }

    pub fn clear(&mut self) {
        self.0.clear();
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&StrategyProfile> {
        self.0.last()
    }

    /// Whether the two latest snapshots are equal.
    pub fn settled(&self) -> bool {
        let n = self.0.len();
        n >= 2 && self.0[n - 1] == self.0[n - 2]
    }

    pub fn iter(&self) -> impl Iterator<Item = &StrategyProfile> {
        self.0.iter()
    }
}

impl From<Vec<StrategyProfile>> for History {
    fn from(v: Vec<StrategyProfile>) -> Self {
        History(v)
    }
}

/// True iff some profile occurs twice in the history.
pub fn cycle_diagnostic(history: &History) -> bool {
    let mut seen = HashSet::new();
    history.iter().any(|x| !seen.insert(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Rounds per attempt.
    pub t_max: usize,
    /// Attempts (the given initial profile plus random restarts).
    pub init_max: usize,
    pub seed: u64,
    pub zr_time_limit: Option<Duration>,
    /// Time limit of the bounded social model inside BR-plus.
    pub bounded_time_limit: Option<Duration>,
    /// Add a cut for every deviating county per separation round instead of
    /// only the first.
    pub zr_cut_all_deviations: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            t_max: 60,
            init_max: 3,
            seed: 0,
            zr_time_limit: None,
            bounded_time_limit: None,
            zr_cut_all_deviations: false,
        }
    }
}

impl DynamicsConfig {
    fn validate(&self) -> Result<()> {
        if self.t_max == 0 || self.init_max == 0 {
            return Err(Error::InvalidParams("t_max and init_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Statistics of one algorithm run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub algorithm: String,
    pub init_label: String,
    pub utility_kind: UtilityKind,
    pub pne_found: bool,
    pub profile: Option<StrategyProfile>,
    pub phi: Option<Weight>,
    /// Rounds over all attempts (BRS/BR-plus) or master solves (ZR).
    pub rounds: usize,
    pub cycle_detected: bool,
    pub cuts_added: usize,
    pub timed_out: bool,
    /// Equilibria found along the way (BR-plus).
    pub pne_list: Vec<StrategyProfile>,
    pub elapsed: Duration,
}

impl RunRecord {
    fn new(algorithm: &str, kind: UtilityKind) -> Self {
        RunRecord {
            algorithm: algorithm.to_string(),
            init_label: String::new(),
            utility_kind: kind,
            pne_found: false,
            profile: None,
            phi: None,
            rounds: 0,
            cycle_detected: false,
            cuts_added: 0,
            timed_out: false,
            pne_list: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn finish(&mut self, instance: &Instance, pne: Option<&StrategyProfile>, started: Instant) {
        self.pne_found = pne.is_some();
        self.profile = pne.cloned();
        self.phi = pne.map(|p| phi(instance, p));
        self.elapsed = started.elapsed();
    }

    /// Equality ignoring elapsed time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        RunRecord {
            elapsed: Duration::ZERO,
            ..self.clone()
        } == RunRecord {
            elapsed: Duration::ZERO,
            ..other.clone()
        }
    }
}

/// For each county, `min(B_c, |I_c|)` lakes drawn uniformly.
pub fn random_profile<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> StrategyProfile {
    let mut x = StrategyProfile::zeros(instance.num_lakes());
    for county in instance.counties() {
        let k = county.budget.min(county.lakes.len());
        for &i in county.lakes.choose_multiple(rng, k) {
            x.set(i, true);
        }
    }
    x
}

fn check_initial(instance: &Instance, init: &StrategyProfile) -> Result<()> {
    if !init.is_feasible(instance) {
        return Err(Error::InvalidModel(format!(
            "initial profile {} is not budget-feasible",
            init
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BrsOutcome {
    pub pne: Option<StrategyProfile>,
    pub record: RunRecord,
}

/// Sequence-free best-response dynamics with selfish utilities.
pub fn brs_free(
    instance: &Instance,
    init: &StrategyProfile,
    config: &DynamicsConfig,
) -> Result<BrsOutcome> {
    brs_free_with(instance, init, config, UtilityKind::Selfish, None)
}

/// Best-response dynamics. Counties move in clockwork order until the round
/// history repeats a profile, after which the order is reshuffled every
/// round. A county keeps its slice when it is already a best response;
/// otherwise it adopts `preference`'s slice if that is optimal, else the
/// solver's. An unchanged round returns the profile as an equilibrium.
/// After `t_max` rounds a random profile restarts the attempt, up to
/// `init_max` attempts.
pub fn brs_free_with(
    instance: &Instance,
    init: &StrategyProfile,
    config: &DynamicsConfig,
    kind: UtilityKind,
    preference: Option<&StrategyProfile>,
) -> Result<BrsOutcome> {
    config.validate()?;
    check_initial(instance, init)?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut record = RunRecord::new("BRS", kind);
    let clockwork: Vec<usize> = (0..instance.num_counties()).collect();

    let mut x = init.clone();
    for _attempt in 0..config.init_max {
        let mut order = clockwork.clone();
        let mut randomized = false;
        let mut history = History::new();
        for _t in 0..config.t_max {
            for &c in &order {
                let current = utility(instance, kind, c, &x);
                let br = game::best_response_preferring(
                    instance,
                    kind,
                    c,
                    &x,
                    preference.unwrap_or(&x),
                )?;
                if br.value > current {
                    x = x.with_county_selection(instance, c, &br.selection);
                }
            }
            record.rounds += 1;
            history.push(x.clone());
            if history.settled() {
                record.finish(instance, Some(&x), started);
                return Ok(BrsOutcome {
                    pne: Some(x),
                    record,
                });
            }
            if randomized {
                order.shuffle(&mut rng);
            } else if cycle_diagnostic(&history) {
                record.cycle_detected = true;
                order.shuffle(&mut rng);
                randomized = true;
            }
        }
        x = random_profile(instance, &mut rng);
    }
    record.finish(instance, None, started);
    Ok(BrsOutcome { pne: None, record })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrPlusExit {
    /// Best-response dynamics found no equilibrium.
    DynamicsFailed,
    /// The two latest equilibria showed no potential increase.
    NoProgress,
    /// The bounded social model could not beat the latest equilibrium.
    BoundedOptimal,
}

#[derive(Debug, Clone)]
pub struct BrPlusOutcome {
    pub best: Option<StrategyProfile>,
    pub pne_list: Vec<StrategyProfile>,
    pub exit: BrPlusExit,
    pub record: RunRecord,
}

/// BR-plus: alternate best-response dynamics with the equilibrium-bounded
/// social model until the potential stops improving.
pub fn br_plus(
    instance: &Instance,
    init: &StrategyProfile,
    config: &DynamicsConfig,
) -> Result<BrPlusOutcome> {
    config.validate()?;
    check_initial(instance, init)?;
    let started = Instant::now();
    let mut record = RunRecord::new("BRP", UtilityKind::Selfish);
    let mut pnes: Vec<StrategyProfile> = Vec::new();
    let mut x = init.clone();
    let mut preference: Option<StrategyProfile> = None;
    let mut init_max = config.init_max;

    let (best, exit) = loop {
        if !pnes.is_empty() {
            init_max = 1;
        }
        let sub = DynamicsConfig {
            init_max,
            seed: config.seed.wrapping_add(pnes.len() as u64),
            ..config.clone()
        };
        let brs = brs_free_with(instance, &x, &sub, UtilityKind::Selfish, preference.as_ref())?;
        record.rounds += brs.record.rounds;
        record.cycle_detected |= brs.record.cycle_detected;
        match brs.pne {
            Some(p) => pnes.push(p),
            None => break (pnes.last().cloned(), BrPlusExit::DynamicsFailed),
        }

        let n = pnes.len();
        if n >= 2 {
            let (prev, last) = (&pnes[n - 2], &pnes[n - 1]);
            let (phi_prev, phi_last) = (phi(instance, prev), phi(instance, last));
            if phi_prev >= phi_last {
                let pick = if phi_last >= phi_prev { last } else { prev };
                break (Some(pick.clone()), BrPlusExit::NoProgress);
            }
        }

        let latest = pnes[n - 1].clone();
        let mut bounded = solver::build_pne_bounded(instance, &latest);
        bounded.warm_start = Some(latest.clone());
        bounded.time_limit = config.bounded_time_limit;
        let res = solver::solve(&bounded)?;
        let utilities: Weight = (0..instance.num_counties())
            .map(|c| utility(instance, UtilityKind::Selfish, c, &latest))
            .sum();
        match res.profile {
            Some(next) if res.objective > utilities => {
                preference = Some(next.clone());
                x = next;
            }
            _ => break (Some(latest), BrPlusExit::BoundedOptimal),
        }
    };

    record.pne_list = pnes.clone();
    record.finish(instance, best.as_ref(), started);
    Ok(BrPlusOutcome {
        best,
        pne_list: pnes,
        exit,
        record,
    })
}

#[derive(Debug, Clone)]
pub struct ZrOutcome {
    pub pne: Option<StrategyProfile>,
    /// Every equilibrium inequality added, in order.
    pub cuts: Vec<LinearConstraint>,
    /// Optimal master value after each solve that finished.
    pub master_values: Vec<Weight>,
    pub record: RunRecord,
}

/// Zero-regret cutting planes: maximize the potential, separate the optimum
/// with the best-response oracle and cut off the deviation until the optimum
/// is an equilibrium or the master becomes infeasible.
pub fn zr(
    instance: &Instance,
    warm_start: Option<&StrategyProfile>,
    config: &DynamicsConfig,
) -> Result<ZrOutcome> {
    let started = Instant::now();
    let deadline = config.zr_time_limit.map(|d| started + d);
    let kind = UtilityKind::Selfish;
    let mut record = RunRecord::new("ZR", kind);

    let mut best: Option<StrategyProfile> = None;
    if let Some(ws) = warm_start {
        check_initial(instance, ws)?;
        if check_separation(instance, kind, ws)?.is_pne() {
            best = Some(ws.clone());
        }
    }

    let mut master = solver::build_sb(instance);
    let mut cuts = Vec::new();
    let mut master_values = Vec::new();
    loop {
        let remaining = match deadline {
            Some(d) => match d.checked_duration_since(Instant::now()) {
                Some(r) if !r.is_zero() => Some(r),
                _ => {
                    record.timed_out = true;
                    break;
                }
            },
            None => None,
        };
        master.warm_start = best.clone();
        master.time_limit = remaining;
        let res = solver::solve(&master)?;
        record.rounds += 1;
        match res.status {
            SolveStatus::Infeasible => break,
            SolveStatus::TimeLimitNoIncumbent => {
                record.timed_out = true;
                break;
            }
            SolveStatus::TimeLimitIncumbent => {
                record.timed_out = true;
                let x = res.profile.expect("incumbent present");
                let better = best
                    .as_ref()
                    .map_or(true, |b| phi(instance, &x) > phi(instance, b));
                if better && check_separation(instance, kind, &x)?.is_pne() {
                    best = Some(x);
                }
                break;
            }
            SolveStatus::Optimal => {
                master_values.push(res.objective);
                let x = res.profile.expect("optimal profile present");
                let deviations: Vec<Deviation> = if config.zr_cut_all_deviations {
                    find_deviations(instance, kind, &x)?
                } else {
                    match check_separation(instance, kind, &x)? {
                        PneCertificate::IsPne => Vec::new(),
                        PneCertificate::Deviation(d) => vec![d],
                    }
                };
                if deviations.is_empty() {
                    best = Some(x);
                    break;
                }
                for d in deviations {
                    let cut = solver::equilibrium_cut(instance, d.county, &d.response);
                    master.side_constraints.push(cut.clone());
                    cuts.push(cut);
                }
            }
        }
    }
    record.cuts_added = cuts.len();
    record.finish(instance, best.as_ref(), started);
    Ok(ZrOutcome {
        pne: best,
        cuts,
        master_values,
        record,
    })
}

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Every subset of the county's lakes with at most `budget` members, in
/// lexicographic order of lake positions, smallest sizes first.
pub fn county_slices(instance: &Instance, c: usize) -> Vec<Vec<usize>> {
    let lakes = &instance.county(c).lakes;
    let budget = instance.county(c).budget.min(lakes.len());
    let mut out = vec![Vec::new()];
    for size in 1..=budget {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&p| lakes[p]).collect());
            let mut k = size;
            while k > 0 && idx[k - 1] == lakes.len() - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Best response by trying every county slice. The first maximizing slice in
/// [`county_slices`] order wins.
pub fn enumerate_best_response(
    instance: &Instance,
    kind: UtilityKind,
    c: usize,
    x: &StrategyProfile,
) -> BestResponse {
    best_over_slices(instance, kind, c, x, &county_slices(instance, c))
}

fn best_over_slices(
    instance: &Instance,
    kind: UtilityKind,
    c: usize,
    x: &StrategyProfile,
    slices: &[Vec<usize>],
) -> BestResponse {
    let mut best = BestResponse {
        selection: Vec::new(),
        value: Weight::MIN,
    };
    for s in slices {
        let v = utility(instance, kind, c, &x.with_county_selection(instance, c, s));
        if v > best.value {
            best = BestResponse {
                selection: s.clone(),
                value: v,
            };
        }
    }
    best
}

/// Separation with per-county enumeration instead of the solver.
pub fn check_separation_enumerated(
    instance: &Instance,
    kind: UtilityKind,
    x: &StrategyProfile,
) -> PneCertificate {
    check_separation_with(instance, kind, x, |c| {
        Ok(enumerate_best_response(instance, kind, c, x))
    })
    .expect("enumeration does not fail")
}

/// Number of budget-feasible profiles (every subset size up to the budget).
pub fn count_profiles(instance: &Instance) -> u128 {
    (0..instance.num_counties())
        .map(|c| {
            let n = instance.county(c).lakes.len() as u128;
            let b = instance.county(c).budget as u128;
            let mut total = 0u128;
            let mut binom = 1u128;
            for k in 0..=b.min(n) {
                total = total.saturating_add(binom);
                binom = binom.saturating_mul(n - k) / (k + 1);
            }
            total
        })
        .fold(1u128, |acc, v| acc.saturating_mul(v))
}

/// All equilibria of the game by exhaustive enumeration, sorted by potential
/// (descending, ties in enumeration order).
pub fn enumerate_pne(
    instance: &Instance,
    kind: UtilityKind,
    cap: u128,
) -> Result<Vec<(StrategyProfile, Weight)>> {
    let count = count_profiles(instance);
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    let m = instance.num_counties();
    let slices: Vec<Vec<Vec<usize>>> = (0..m).map(|c| county_slices(instance, c)).collect();

    // a county's best value depends only on the outside endpoints of its arcs
    let outside: Vec<Vec<usize>> = (0..m)
        .map(|c| {
            let mut v: Vec<usize> = instance
                .utility_arcs(kind, c)
                .iter()
                .flat_map(|&a| [instance.arc(a).from, instance.arc(a).to])
                .filter(|&i| instance.county_of(i) != c)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut memo: Vec<HashMap<Vec<bool>, Weight>> = vec![HashMap::new(); m];

    let mut digits = vec![0usize; m];
    let mut found = Vec::new();
    'profiles: loop {
        let mut x = StrategyProfile::zeros(instance.num_lakes());
        for c in 0..m {
            for &i in &slices[c][digits[c]] {
                x.set(i, true);
            }
        }
        let mut stable = true;
        for c in 0..m {
            let key: Vec<bool> = outside[c].iter().map(|&i| x.is_selected(i)).collect();
            let best = *memo[c]
                .entry(key)
                .or_insert_with(|| best_over_slices(instance, kind, c, &x, &slices[c]).value);
            if utility(instance, kind, c, &x) < best {
                stable = false;
                break;
            }
        }
        if stable {
            let v = phi(instance, &x);
            found.push((x, v));
        }
        let mut c = 0;
        loop {
            if c == m {
                break 'profiles;
            }
            digits[c] += 1;
            if digits[c] < slices[c].len() {
                break;
            }
            digits[c] = 0;
            c += 1;
        }
    }
    found.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(found)
}
