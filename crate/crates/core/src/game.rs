//! Game model: lakes grouped into counties, weighted risky arcs, strategy
//! profiles, the two county utilities and the potential function.
//!
//! Coverage is always saturated: an arc counts as inspected as soon as either
//! endpoint is selected, so every quantity here is a function of the lake
//! selection alone. All weights and utilities are exact integers.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{self, SolveStatus};

/// Arc weight and utility values.
pub type Weight = i64;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lake {
    /// AIS types present at the lake, sorted and deduplicated.
    pub infested_types: Vec<usize>,
}

impl Lake {
    pub fn new(mut infested_types: Vec<usize>) -> Self {
        infested_types.sort_unstable();
        infested_types.dedup();
        Lake { infested_types }
    }

    pub fn uninfested() -> Self {
        Lake::default()
    }

    pub fn is_infested(&self) -> bool {
        !self.infested_types.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct County {
    pub budget: usize,
    pub lakes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub weight: Weight,
}

/// Arc index lists for one county.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountyArcs {
    /// Both endpoints inside the county.
    pub internal: Vec<usize>,
    /// Head inside, tail outside.
    pub inbound: Vec<usize>,
    /// Tail inside, head outside.
    pub outbound: Vec<usize>,
    /// `internal ∪ inbound ∪ outbound`, ascending.
    pub neighborhood: Vec<usize>,
    /// `internal ∪ inbound`, ascending. Support of the selfish utility.
    pub inbound_induced: Vec<usize>,
}

/// Induced arc sets for every county.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcSets {
    counties: Vec<CountyArcs>,
}

impl ArcSets {
    /// Classifies every arc relative to every county. Fails when the county
    /// lake lists do not partition `0..num_lakes`.
    pub fn build(num_lakes: usize, counties: &[County], arcs: &[Arc]) -> Result<ArcSets> {
        let county_of = county_index(num_lakes, counties)?;
        let mut sets = vec![CountyArcs::default(); counties.len()];
        for (a, arc) in arcs.iter().enumerate() {
            if arc.from >= num_lakes || arc.to >= num_lakes {
                return Err(Error::InvalidInstance(format!(
                    "arc {} references lake outside 0..{}",
                    a, num_lakes
                )));
            }
            let (cf, ct) = (county_of[arc.from], county_of[arc.to]);
            if cf == ct {
                sets[cf].internal.push(a);
            } else {
                sets[ct].inbound.push(a);
                sets[cf].outbound.push(a);
            }
        }
        for s in &mut sets {
            s.inbound_induced = merge_sorted(&s.internal, &s.inbound);
            s.neighborhood = merge_sorted(&s.inbound_induced, &s.outbound);
        }
        Ok(ArcSets { counties: sets })
    }

    pub fn county(&self, c: usize) -> &CountyArcs {
        &self.counties[c]
    }

    pub fn len(&self) -> usize {
        self.counties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counties.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CountyArcs> {
        self.counties.iter()
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out
}

fn county_index(num_lakes: usize, counties: &[County]) -> Result<Vec<usize>> {
    let mut county_of = vec![usize::MAX; num_lakes];
    for (c, county) in counties.iter().enumerate() {
        for &lake in &county.lakes {
            if lake >= num_lakes {
                return Err(Error::PartitionViolation(format!(
                    "county {} lists unknown lake {}",
                    c, lake
                )));
            }
            if county_of[lake] != usize::MAX {
                return Err(Error::PartitionViolation(format!(
                    "lake {} appears in county {} and county {}",
                    lake, county_of[lake], c
                )));
            }
            county_of[lake] = c;
        }
    }
    if let Some(lake) = county_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::PartitionViolation(format!(
            "lake {} belongs to no county",
            lake
        )));
    }
    Ok(county_of)
}

/// A validated EBMC game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    num_ais_types: usize,
    lakes: Vec<Lake>,
    counties: Vec<County>,
    arcs: Vec<Arc>,
    county_of: Vec<usize>,
    arc_sets: ArcSets,
    incident: Vec<Vec<usize>>,
}

impl Instance {
    /// Validates and builds an instance. Zero-weight arcs are dropped.
    pub fn new(
        num_ais_types: usize,
        lakes: Vec<Lake>,
        counties: Vec<County>,
        arcs: Vec<Arc>,
    ) -> Result<Instance> {
        if num_ais_types == 0 {
            return Err(Error::InvalidInstance(
                "at least one AIS type is required".into(),
            ));
        }
        let lakes: Vec<Lake> = lakes
            .into_iter()
            .map(|l| Lake::new(l.infested_types))
            .collect();
        for (i, lake) in lakes.iter().enumerate() {
            if let Some(&t) = lake.infested_types.iter().find(|&&t| t >= num_ais_types) {
                return Err(Error::InvalidInstance(format!(
                    "lake {} has AIS type {} but only {} types exist",
                    i, t, num_ais_types
                )));
            }
        }
        let n = lakes.len();
        let county_of = county_index(n, &counties)?;
        for (c, county) in counties.iter().enumerate() {
            if county.budget > county.lakes.len() {
                return Err(Error::InvalidInstance(format!(
                    "county {} budget {} exceeds its {} lakes",
                    c,
                    county.budget,
                    county.lakes.len()
                )));
            }
        }

        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(arcs.len());
        for arc in arcs {
            if arc.from >= n || arc.to >= n {
                return Err(Error::InvalidInstance(format!(
                    "arc {}->{} references a lake outside 0..{}",
                    arc.from, arc.to, n
                )));
            }
            if arc.from == arc.to {
                return Err(Error::InvalidInstance(format!("self-loop at lake {}", arc.from)));
            }
            if arc.weight < 0 {
                return Err(Error::InvalidInstance(format!(
                    "arc {}->{} has negative weight {}",
                    arc.from, arc.to, arc.weight
                )));
            }
            if !seen.insert((arc.from, arc.to)) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate arc {}->{}",
                    arc.from, arc.to
                )));
            }
            if arc.weight == 0 {
                continue;
            }
            if num_ais_types == 1
                && (!lakes[arc.from].is_infested() || lakes[arc.to].is_infested())
            {
                return Err(Error::InvalidInstance(format!(
                    "single-AIS arc {}->{} must run from an infested to an uninfested lake",
                    arc.from, arc.to
                )));
            }
            kept.push(arc);
        }

        let arc_sets = ArcSets::build(n, &counties, &kept)?;
        let mut incident = vec![Vec::new(); n];
        for (a, arc) in kept.iter().enumerate() {
            incident[arc.from].push(a);
            incident[arc.to].push(a);
        }
        Ok(Instance {
            num_ais_types,
            lakes,
            counties,
            arcs: kept,
            county_of,
            arc_sets,
            incident,
        })
    }

    pub fn num_ais_types(&self) -> usize {
        self.num_ais_types
    }

    pub fn num_lakes(&self) -> usize {
        self.lakes.len()
    }

    pub fn num_counties(&self) -> usize {
        self.counties.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn lakes(&self) -> &[Lake] {
        &self.lakes
    }

    pub fn lake(&self, i: usize) -> &Lake {
        &self.lakes[i]
    }

    pub fn counties(&self) -> &[County] {
        &self.counties
    }

    pub fn county(&self, c: usize) -> &County {
        &self.counties[c]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> &Arc {
        &self.arcs[a]
    }

    pub fn county_of(&self, lake: usize) -> usize {
        self.county_of[lake]
    }

    pub fn arc_sets(&self) -> &ArcSets {
        &self.arc_sets
    }

    /// Arc indices with `lake` as either endpoint.
    pub fn incident_arcs(&self, lake: usize) -> &[usize] {
        &self.incident[lake]
    }

    /// Pooled budget over all counties.
    pub fn total_budget(&self) -> usize {
        self.counties.iter().map(|c| c.budget).sum()
    }

    pub fn infested_lakes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_lakes()).filter(move |&i| self.lakes[i].is_infested())
    }

    pub fn uninfested_lakes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_lakes()).filter(move |&i| !self.lakes[i].is_infested())
    }

    /// Total weight of arcs with an endpoint at `lake`.
    pub fn lake_weight(&self, lake: usize) -> Weight {
        self.incident[lake].iter().map(|&a| self.arcs[a].weight).sum()
    }

    pub fn total_weight(&self) -> Weight {
        self.arcs.iter().map(|a| a.weight).sum()
    }

    /// Arc set supporting the given utility of county `c`.
    pub fn utility_arcs(&self, kind: UtilityKind, c: usize) -> &[usize] {
        let sets = self.arc_sets.county(c);
        match kind {
            UtilityKind::Altruistic => &sets.neighborhood,
            UtilityKind::Selfish => &sets.inbound_induced,
        }
    }
}

/// Induced arc sets of `instance`.
pub fn build_arc_sets(instance: &Instance) -> ArcSets {
    instance.arc_sets().clone()
}

/// One selection flag per lake.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<bool>);

impl StrategyProfile {
    pub fn zeros(num_lakes: usize) -> Self {
        StrategyProfile(vec![false; num_lakes])
    }

    pub fn from_flags(flags: Vec<bool>) -> Self {
        StrategyProfile(flags)
    }

    pub fn from_selected(num_lakes: usize, selected: impl IntoIterator<Item = usize>) -> Self {
        let mut x = StrategyProfile::zeros(num_lakes);
        for i in selected {
            x.0[i] = true;
        }
        x
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn is_selected(&self, lake: usize) -> bool {
        self.0[lake]
    }

    pub fn set(&mut self, lake: usize, value: bool) {
        self.0[lake] = value;
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
    }

    pub fn num_selected(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }

    /// Number of selected lakes in county `c`.
    pub fn county_count(&self, instance: &Instance, c: usize) -> usize {
        instance.county(c).lakes.iter().filter(|&&i| self.0[i]).count()
    }

    /// Selected lakes of county `c`, in the county's lake order.
    pub fn county_selection(&self, instance: &Instance, c: usize) -> Vec<usize> {
        instance
            .county(c)
            .lakes
            .iter()
            .copied()
            .filter(|&i| self.0[i])
            .collect()
    }

    /// Replaces county `c`'s slice with exactly the lakes in `selection`.
    pub fn with_county_selection(&self, instance: &Instance, c: usize, selection: &[usize]) -> Self {
        let mut x = self.clone();
        for &i in &instance.county(c).lakes {
            x.0[i] = false;
        }
        for &i in selection {
            debug_assert_eq!(instance.county_of(i), c);
            x.0[i] = true;
        }
        x
    }

    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.len() == instance.num_lakes()
            && (0..instance.num_counties())
                .all(|c| self.county_count(instance, c) <= instance.county(c).budget)
    }
}

impl fmt::Debug for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.selected()).finish()
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.selected().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i)?;
        }
        write!(f, "}}")
    }
}

/// One coverage flag per arc.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coverage(Vec<bool>);

impl Coverage {
    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn is_covered(&self, arc: usize) -> bool {
        self.0[arc]
    }

    pub fn covered_arcs(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(a, &y)| y.then_some(a))
    }
}

/// `y_ij = max(x_i, x_j)` for every arc.
pub fn derive_coverage(instance: &Instance, x: &StrategyProfile) -> Coverage {
    Coverage(
        instance
            .arcs()
            .iter()
            .map(|a| x.is_selected(a.from) || x.is_selected(a.to))
            .collect(),
    )
}

#[inline]
pub(crate) fn arc_covered(instance: &Instance, x: &StrategyProfile, a: usize) -> bool {
    let arc = instance.arc(a);
    x.is_selected(arc.from) || x.is_selected(arc.to)
}

fn covered_weight(instance: &Instance, x: &StrategyProfile, arcs: &[usize]) -> Weight {
    arcs.iter()
        .filter(|&&a| arc_covered(instance, x, a))
        .map(|&a| instance.arc(a).weight)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    /// Coverage of the county's induced neighborhood arcs.
    Altruistic,
    /// Coverage of the county's internal and inbound arcs.
    Selfish,
}

impl UtilityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UtilityKind::Altruistic => "altruistic",
            UtilityKind::Selfish => "selfish",
        }
    }
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UtilityKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "altruistic" | "alt" => Ok(UtilityKind::Altruistic),
            "selfish" | "self" => Ok(UtilityKind::Selfish),
            other => Err(format!("unknown utility kind `{}`", other)),
        }
    }
}

/// Weighted coverage of the arc set `kind` assigns to county `c`.
pub fn utility(instance: &Instance, kind: UtilityKind, c: usize, x: &StrategyProfile) -> Weight {
    covered_weight(instance, x, instance.utility_arcs(kind, c))
}

/// Potential: weighted coverage of every arc.
pub fn phi(instance: &Instance, x: &StrategyProfile) -> Weight {
    instance
        .arcs()
        .iter()
        .filter(|a| x.is_selected(a.from) || x.is_selected(a.to))
        .map(|a| a.weight)
        .sum()
}

/// Every arc lies in exactly one county's inbound-induced set.
pub fn check_partition_identity(instance: &Instance) -> bool {
    let mut hits = vec![0u32; instance.num_arcs()];
    for sets in instance.arc_sets().iter() {
        for &a in &sets.inbound_induced {
            hits[a] += 1;
        }
    }
    hits.iter().all(|&h| h == 1)
}

/// A strictly improving unilateral move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub county: usize,
    /// Selected lakes of the deviating county after the move.
    pub response: Vec<usize>,
    pub gain: Weight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PneCertificate {
    IsPne,
    Deviation(Deviation),
}

impl PneCertificate {
    pub fn is_pne(&self) -> bool {
        matches!(self, PneCertificate::IsPne)
    }
}

/// A county's optimal slice against fixed opponents and its utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub selection: Vec<usize>,
    pub value: Weight,
}

/// Best response of county `c` from the branch-and-bound solver. The current
/// slice of `x` is the warm start, so it is kept whenever it is optimal.
pub fn best_response(
    instance: &Instance,
    kind: UtilityKind,
    c: usize,
    x: &StrategyProfile,
) -> Result<BestResponse> {
    best_response_preferring(instance, kind, c, x, x)
}

/// Like [`best_response`], but `preferred`'s county-`c` slice is returned if
/// it attains the optimum.
pub fn best_response_preferring(
    instance: &Instance,
    kind: UtilityKind,
    c: usize,
    x: &StrategyProfile,
    preferred: &StrategyProfile,
) -> Result<BestResponse> {
    let mut model = solver::build_best_response(instance, c, kind, x);
    let pick = preferred.county_selection(instance, c);
    if pick.len() <= instance.county(c).budget {
        model.warm_start = Some(x.with_county_selection(instance, c, &pick));
    }
    let result = solver::solve(&model)?;
    match (result.status, result.profile) {
        (SolveStatus::Optimal, Some(p)) => Ok(BestResponse {
            selection: p.county_selection(instance, c),
            value: result.objective,
        }),
        (status, _) => Err(Error::InvalidModel(format!(
            "best response of county {} ended with status {:?}",
            c, status
        ))),
    }
}

/// Separation oracle with a caller-supplied best-response routine.
pub fn check_separation_with<F>(
    instance: &Instance,
    kind: UtilityKind,
    x: &StrategyProfile,
    mut respond: F,
) -> Result<PneCertificate>
where
    F: FnMut(usize) -> Result<BestResponse>,
{
    for c in 0..instance.num_counties() {
        let current = utility(instance, kind, c, x);
        let best = respond(c)?;
        if best.value > current {
            return Ok(PneCertificate::Deviation(Deviation {
                county: c,
                response: best.selection,
                gain: best.value - current,
            }));
        }
    }
    Ok(PneCertificate::IsPne)
}

/// Scans counties in index order and reports the first one with a strictly
/// improving best response.
pub fn check_separation(
    instance: &Instance,
    kind: UtilityKind,
    x: &StrategyProfile,
) -> Result<PneCertificate> {
    check_separation_with(instance, kind, x, |c| best_response(instance, kind, c, x))
}

/// Every county with a strictly improving best response.
pub fn find_deviations(
    instance: &Instance,
    kind: UtilityKind,
    x: &StrategyProfile,
) -> Result<Vec<Deviation>> {
    let mut out = Vec::new();
    for c in 0..instance.num_counties() {
        let current = utility(instance, kind, c, x);
        let best = best_response(instance, kind, c, x)?;
        if best.value > current {
            out.push(Deviation {
                county: c,
                response: best.selection,
                gain: best.value - current,
            });
        }
    }
    Ok(out)
}

/// Each county's selfish best response against all-zero opponents.
pub fn non_game_profile(instance: &Instance) -> Result<StrategyProfile> {
    let zero = StrategyProfile::zeros(instance.num_lakes());
    let mut x = zero.clone();
    for c in 0..instance.num_counties() {
        let br = best_response(instance, UtilityKind::Selfish, c, &zero)?;
        for i in br.selection {
            x.set(i, true);
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonGameCondition {
    /// Every selected lake is uninfested.
    AllUninfested,
    /// Single AIS type and every selected lake is infested.
    AllInfestedSingleAis,
    NotApplicable,
}

/// Which sufficient condition (if any) makes the non-game profile a selfish PNE.
pub fn theorem2_condition(instance: &Instance, ng: &StrategyProfile) -> NonGameCondition {
    if ng.selected().all(|i| !instance.lake(i).is_infested()) {
        NonGameCondition::AllUninfested
    } else if instance.num_ais_types() == 1 && ng.selected().all(|i| instance.lake(i).is_infested())
    {
        NonGameCondition::AllInfestedSingleAis
    } else {
        NonGameCondition::NotApplicable
    }
}
