//! Exact 0/1 branch-and-bound for budgeted coverage models.
//!
//! Only lake variables are branched. Arc coverage is saturated, so at any node
//! an arc is covered (an endpoint is fixed to 1), excluded (both endpoints
//! fixed to 0) or open. The node bound adds, per county, the `r` largest
//! optimistic lake gains, where `r` is the county's remaining budget and a
//! lake's gain is the total positive weight of its open incident arcs. Arcs
//! shared by two free lakes are counted twice, so the bound never
//! underestimates.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::game::{self, Instance, StrategyProfile, UtilityKind, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
}

/// `Σ x_coefs·x + Σ y_coefs·y  (≤|≥)  rhs`, with `y` the saturated coverage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub x_coefs: Vec<(usize, Weight)>,
    pub y_coefs: Vec<(usize, Weight)>,
    pub sense: Sense,
    pub rhs: Weight,
}

impl LinearConstraint {
    pub fn lhs(&self, instance: &Instance, x: &StrategyProfile) -> Weight {
        let xs: Weight = self
            .x_coefs
            .iter()
            .filter(|(i, _)| x.is_selected(*i))
            .map(|(_, c)| c)
            .sum();
        let ys: Weight = self
            .y_coefs
            .iter()
            .filter(|(a, _)| game::arc_covered(instance, x, *a))
            .map(|(_, c)| c)
            .sum();
        xs + ys
    }

    pub fn is_satisfied(&self, instance: &Instance, x: &StrategyProfile) -> bool {
        let lhs = self.lhs(instance, x);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

/// A 0/1 coverage model over one instance.
#[derive(Debug, Clone)]
pub struct ModelSpec<'a> {
    pub instance: &'a Instance,
    /// Arc index and objective weight.
    pub objective: Vec<(usize, Weight)>,
    /// `None` for a free lake, `Some(v)` for a lake fixed to `v`.
    pub fixed: Vec<Option<bool>>,
    /// Counties whose budget constraint is active.
    pub budgeted: Vec<bool>,
    pub side_constraints: Vec<LinearConstraint>,
    pub warm_start: Option<StrategyProfile>,
    pub time_limit: Option<Duration>,
}

impl<'a> ModelSpec<'a> {
    pub fn free_lakes(&self) -> impl Iterator<Item = usize> + '_ {
        self.fixed
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.is_none().then_some(i))
    }

    pub fn objective_value(&self, x: &StrategyProfile) -> Weight {
        self.objective
            .iter()
            .filter(|(a, _)| game::arc_covered(self.instance, x, *a))
            .map(|(_, w)| w)
            .sum()
    }

    /// Fixed values and active budgets hold.
    pub fn respects_domain(&self, x: &StrategyProfile) -> bool {
        x.len() == self.fixed.len()
            && self
                .fixed
                .iter()
                .enumerate()
                .all(|(i, f)| f.map_or(true, |v| x.is_selected(i) == v))
            && (0..self.instance.num_counties()).all(|c| {
                !self.budgeted[c] || x.county_count(self.instance, c) <= self.instance.county(c).budget
            })
    }

    pub fn is_feasible(&self, x: &StrategyProfile) -> bool {
        self.respects_domain(x)
            && self
                .side_constraints
                .iter()
                .all(|k| k.is_satisfied(self.instance, x))
    }

    fn validate(&self) -> Result<()> {
        let inst = self.instance;
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.fixed.len() != inst.num_lakes() {
            return bad(format!(
                "{} fixed/free entries for {} lakes",
                self.fixed.len(),
                inst.num_lakes()
            ));
        }
        if self.budgeted.len() != inst.num_counties() {
            return bad(format!(
                "{} budget flags for {} counties",
                self.budgeted.len(),
                inst.num_counties()
            ));
        }
        let arc_ok = |a: usize| a < inst.num_arcs();
        let lake_ok = |i: usize| i < inst.num_lakes();
        if let Some((a, _)) = self.objective.iter().find(|(a, _)| !arc_ok(*a)) {
            return bad(format!("objective references arc {}", a));
        }
        for (k, con) in self.side_constraints.iter().enumerate() {
            if con.x_coefs.iter().any(|(i, _)| !lake_ok(*i))
                || con.y_coefs.iter().any(|(a, _)| !arc_ok(*a))
            {
                return bad(format!("side constraint {} references an unknown index", k));
            }
        }
        if let Some(ws) = &self.warm_start {
            if !self.respects_domain(ws) {
                return bad("warm start violates fixed values or budgets".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// Time limit hit; the best incumbent is returned.
    TimeLimitIncumbent,
    /// Time limit hit before any feasible leaf was found.
    TimeLimitNoIncumbent,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimitIncumbent => "time_limit",
            SolveStatus::TimeLimitNoIncumbent => "time_limit_no_solution",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub profile: Option<StrategyProfile>,
    pub objective: Weight,
    pub nodes_explored: u64,
}

/// Objective over all arcs, every lake free, every budget active.
pub fn build_sb(instance: &Instance) -> ModelSpec<'_> {
    ModelSpec {
        instance,
        objective: instance
            .arcs()
            .iter()
            .enumerate()
            .map(|(a, arc)| (a, arc.weight))
            .collect(),
        fixed: vec![None; instance.num_lakes()],
        budgeted: vec![true; instance.num_counties()],
        side_constraints: Vec::new(),
        warm_start: None,
        time_limit: None,
    }
}

/// County `c` chooses its lakes against `opponents`, maximizing the `kind`
/// utility under its own budget.
pub fn build_best_response<'a>(
    instance: &'a Instance,
    county: usize,
    kind: UtilityKind,
    opponents: &StrategyProfile,
) -> ModelSpec<'a> {
    let fixed = (0..instance.num_lakes())
        .map(|i| {
            if instance.county_of(i) == county {
                None
            } else {
                Some(opponents.is_selected(i))
            }
        })
        .collect();
    let mut budgeted = vec![false; instance.num_counties()];
    budgeted[county] = true;
    ModelSpec {
        instance,
        objective: instance
            .utility_arcs(kind, county)
            .iter()
            .map(|&a| (a, instance.arc(a).weight))
            .collect(),
        fixed,
        budgeted,
        side_constraints: Vec::new(),
        warm_start: None,
        time_limit: None,
    }
}

/// Social model where every county must do at least as well (selfishly) as
/// under `pne`.
pub fn build_pne_bounded<'a>(instance: &'a Instance, pne: &StrategyProfile) -> ModelSpec<'a> {
    let mut model = build_sb(instance);
    model.side_constraints = (0..instance.num_counties())
        .map(|c| LinearConstraint {
            x_coefs: Vec::new(),
            y_coefs: instance
                .utility_arcs(UtilityKind::Selfish, c)
                .iter()
                .map(|&a| (a, instance.arc(a).weight))
                .collect(),
            sense: Sense::Ge,
            rhs: game::utility(instance, UtilityKind::Selfish, c, pne),
        })
        .collect();
    model
}

/// Equilibrium inequality for county `c` and the fixed alternative slice
/// `deviation`: the selfish utility the county would get by switching to
/// `deviation` against the current opponents may not exceed its actual
/// selfish utility. Returned in `≤` form as
/// `Σ w(1-x̂_j)·x_i − Σ w·y ≤ −(Σ_internal w·max(x̂_i,x̂_j) + Σ_inbound w·x̂_j)`.
pub fn equilibrium_cut(instance: &Instance, county: usize, deviation: &[usize]) -> LinearConstraint {
    let mut hat = vec![false; instance.num_lakes()];
    for &i in deviation {
        hat[i] = true;
    }
    let sets = instance.arc_sets().county(county);
    let mut constant = 0;
    for &a in &sets.internal {
        let arc = instance.arc(a);
        if hat[arc.from] || hat[arc.to] {
            constant += arc.weight;
        }
    }
    let mut x_coefs: BTreeMap<usize, Weight> = BTreeMap::new();
    for &a in &sets.inbound {
        let arc = instance.arc(a);
        if hat[arc.to] {
            constant += arc.weight;
        } else {
            *x_coefs.entry(arc.from).or_default() += arc.weight;
        }
    }
    LinearConstraint {
        x_coefs: x_coefs.into_iter().collect(),
        y_coefs: sets
            .inbound_induced
            .iter()
            .map(|&a| (a, -instance.arc(a).weight))
            .collect(),
        sense: Sense::Le,
        rhs: -constant,
    }
}

/// `Σ x_terms·x + Σ y_terms·y ≥ rhs`.
struct Form {
    x_terms: Vec<(usize, Weight)>,
    y_terms: Vec<(usize, Weight)>,
    rhs: Weight,
}

impl Form {
    fn from_constraint(c: &LinearConstraint) -> Form {
        match c.sense {
            Sense::Ge => Form {
                x_terms: c.x_coefs.clone(),
                y_terms: c.y_coefs.clone(),
                rhs: c.rhs,
            },
            Sense::Le => Form {
                x_terms: c.x_coefs.iter().map(|&(i, w)| (i, -w)).collect(),
                y_terms: c.y_coefs.iter().map(|&(a, w)| (a, -w)).collect(),
                rhs: -c.rhs,
            },
        }
    }
}

fn remaining_budget(model: &ModelSpec<'_>, chosen: &[usize], c: usize) -> usize {
    if model.budgeted[c] {
        model.instance.county(c).budget.saturating_sub(chosen[c])
    } else {
        usize::MAX
    }
}

struct Search<'m, 'a> {
    model: &'m ModelSpec<'a>,
    free: Vec<usize>,
    /// Position of each lake in `free`, or `usize::MAX`.
    free_pos: Vec<usize>,
    /// Counties that own free lakes, with their free lakes in order.
    free_by_county: Vec<(usize, Vec<usize>)>,
    assign: Vec<Option<bool>>,
    chosen: Vec<usize>,
    objective: Form,
    constraints: Vec<Form>,
    incumbent: Option<(Weight, StrategyProfile)>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    gains: Vec<Weight>,
    scratch: Vec<Weight>,
}

impl<'m, 'a> Search<'m, 'a> {
    fn new(model: &'m ModelSpec<'a>) -> Self {
        let inst = model.instance;
        let free: Vec<usize> = model.free_lakes().collect();
        let mut free_pos = vec![usize::MAX; inst.num_lakes()];
        for (p, &i) in free.iter().enumerate() {
            free_pos[i] = p;
        }
        let mut by_county: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &free {
            by_county.entry(inst.county_of(i)).or_default().push(i);
        }
        let mut chosen = vec![0; inst.num_counties()];
        for (i, f) in model.fixed.iter().enumerate() {
            if *f == Some(true) {
                chosen[inst.county_of(i)] += 1;
            }
        }
        Search {
            model,
            free,
            free_pos,
            free_by_county: by_county.into_iter().collect(),
            assign: model.fixed.clone(),
            chosen,
            objective: Form {
                x_terms: Vec::new(),
                y_terms: model.objective.clone(),
                rhs: Weight::MIN,
            },
            constraints: model.side_constraints.iter().map(Form::from_constraint).collect(),
            incumbent: None,
            nodes: 0,
            deadline: model.time_limit.map(|d| Instant::now() + d),
            timed_out: false,
            gains: vec![0; inst.num_lakes()],
            scratch: Vec::new(),
        }
    }

    fn remaining(&self, c: usize) -> usize {
        remaining_budget(self.model, &self.chosen, c)
    }

    /// Upper bound of `form` over all completions of the current assignment
    /// that respect the remaining budgets. Exact once every lake is assigned.
    fn bound(&mut self, which: Option<usize>, depth: usize) -> Weight {
        let Search {
            model,
            free,
            free_pos,
            free_by_county,
            assign,
            chosen,
            objective,
            constraints,
            gains,
            scratch,
            ..
        } = self;
        let form = match which {
            None => &*objective,
            Some(k) => &constraints[k],
        };
        let inst = model.instance;
        for &i in &free[depth..] {
            gains[i] = 0;
        }
        let mut total: Weight = 0;
        for &(i, w) in &form.x_terms {
            match assign[i] {
                Some(true) => total += w,
                Some(false) => {}
                None => {
                    if w > 0 {
                        gains[i] += w;
                    }
                }
            }
        }
        for &(a, w) in &form.y_terms {
            let arc = inst.arc(a);
            match (assign[arc.from], assign[arc.to]) {
                (Some(true), _) | (_, Some(true)) => total += w,
                (Some(false), Some(false)) => {}
                (u, v) => {
                    if w > 0 {
                        if u.is_none() {
                            gains[arc.from] += w;
                        }
                        if v.is_none() {
                            gains[arc.to] += w;
                        }
                    }
                }
            }
        }
        for (c, lakes) in free_by_county.iter() {
            let r = remaining_budget(model, chosen, *c);
            if r == 0 {
                continue;
            }
            scratch.clear();
            scratch.extend(
                lakes
                    .iter()
                    .filter(|&&i| free_pos[i] >= depth)
                    .map(|&i| gains[i])
                    .filter(|&g| g > 0),
            );
            if scratch.len() > r {
                scratch.sort_unstable_by(|a, b| b.cmp(a));
                scratch.truncate(r);
            }
            total += scratch.iter().sum::<Weight>();
        }
        total
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    fn can_select_any(&self, depth: usize) -> bool {
        self.free[depth..]
            .iter()
            .any(|&i| self.remaining(self.model.instance.county_of(i)) > 0)
    }

    fn dfs(&mut self, depth: usize) {
        if self.out_of_time() {
            return;
        }
        self.nodes += 1;

        // nothing left to select: the all-zero completion is the only leaf
        if depth < self.free.len() && !self.can_select_any(depth) {
            for p in depth..self.free.len() {
                self.assign[self.free[p]] = Some(false);
            }
            self.dfs(self.free.len());
            for p in depth..self.free.len() {
                self.assign[self.free[p]] = None;
            }
            return;
        }

        for k in 0..self.constraints.len() {
            let rhs = self.constraints[k].rhs;
            if self.bound(Some(k), depth) < rhs {
                return;
            }
        }
        let bound = self.bound(None, depth);
        if let Some((best, _)) = &self.incumbent {
            if bound <= *best {
                return;
            }
        }

        if depth == self.free.len() {
            let profile = StrategyProfile::from_flags(
                self.assign.iter().map(|v| v.expect("assigned")).collect(),
            );
            self.incumbent = Some((bound, profile));
            return;
        }

        let lake = self.free[depth];
        let c = self.model.instance.county_of(lake);
        if self.remaining(c) > 0 {
            self.assign[lake] = Some(true);
            self.chosen[c] += 1;
            self.dfs(depth + 1);
            self.chosen[c] -= 1;
        }
        self.assign[lake] = Some(false);
        self.dfs(depth + 1);
        self.assign[lake] = None;
    }
}

/// Solves `model` exactly (or until its time limit). Among equal optima the
/// first leaf in branching order wins (free lakes ascending, 1 before 0),
/// except that a feasible warm start attaining the optimum is kept.
pub fn solve(model: &ModelSpec<'_>) -> Result<SolveResult> {
    model.validate()?;
    let inst = model.instance;
    for c in 0..inst.num_counties() {
        let fixed_on = inst
            .county(c)
            .lakes
            .iter()
            .filter(|&&i| model.fixed[i] == Some(true))
            .count();
        if model.budgeted[c] && fixed_on > inst.county(c).budget {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                profile: None,
                objective: 0,
                nodes_explored: 0,
            });
        }
    }

    let mut search = Search::new(model);
    if let Some(ws) = &model.warm_start {
        if model.is_feasible(ws) {
            search.incumbent = Some((model.objective_value(ws), ws.clone()));
        }
    }
    search.dfs(0);

    let status = match (search.timed_out, search.incumbent.is_some()) {
        (true, true) => SolveStatus::TimeLimitIncumbent,
        (true, false) => SolveStatus::TimeLimitNoIncumbent,
        (false, true) => SolveStatus::Optimal,
        (false, false) => SolveStatus::Infeasible,
    };
    let (objective, profile) = match search.incumbent {
        Some((v, p)) => (v, Some(p)),
        None => (0, None),
    };
    Ok(SolveResult {
        status,
        profile,
        objective,
        nodes_explored: search.nodes,
    })
}

/// Root-node objective bound of `model`.
pub fn objective_upper_bound(model: &ModelSpec<'_>) -> Result<Weight> {
    model.validate()?;
    let mut search = Search::new(model);
    Ok(search.bound(None, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance_io::{generate, GenParams};
    use proptest::prelude::*;

    fn sel(n: usize, ids: &[usize]) -> StrategyProfile {
        StrategyProfile::from_selected(n, ids.iter().copied())
    }

    /// Exhaustive optimum over every assignment of the free lakes.
    fn enumerate(model: &ModelSpec<'_>) -> Option<Weight> {
        let free: Vec<usize> = model.free_lakes().collect();
        assert!(free.len() <= 16);
        let base: Vec<bool> = model.fixed.iter().map(|f| f.unwrap_or(false)).collect();
        let mut best = None;
        for mask in 0u32..(1 << free.len()) {
            let mut flags = base.clone();
            for (b, &i) in free.iter().enumerate() {
                flags[i] = mask >> b & 1 == 1;
            }
            let x = StrategyProfile::from_flags(flags);
            if model.is_feasible(&x) {
                let v = model.objective_value(&x);
                best = Some(best.map_or(v, |b: Weight| b.max(v)));
            }
        }
        best
    }

    #[test]
    fn sb_on_fig2() {
        let inst = fixtures::fig2();
        let model = build_sb(&inst);
        assert_eq!(model.objective.len(), 8);
        assert_eq!(model.free_lakes().count(), 6);
        let res = solve(&model).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 15);
        assert_eq!(enumerate(&model), Some(15));
        // first optimum in branching order
        assert_eq!(res.profile.unwrap(), sel(6, &[0, 3]));
    }

    #[test]
    fn best_response_examples() {
        let inst = fixtures::fig2();
        let m = build_best_response(&inst, 0, UtilityKind::Selfish, &sel(6, &[3]));
        let r = solve(&m).unwrap();
        assert_eq!(r.objective, 6);
        assert_eq!(r.profile.unwrap(), sel(6, &[2, 3]));

        let m = build_best_response(&inst, 0, UtilityKind::Selfish, &sel(6, &[]));
        let r = solve(&m).unwrap();
        assert_eq!((r.objective, r.profile.unwrap()), (5, sel(6, &[0])));

        let m = build_best_response(&inst, 1, UtilityKind::Selfish, &sel(6, &[2]));
        let r = solve(&m).unwrap();
        assert_eq!((r.objective, r.profile.unwrap()), (9, sel(6, &[2, 3])));
    }

    #[test]
    fn zero_budget_best_response_keeps_opponent_coverage() {
        let inst = Instance::new(
            1,
            vec![
                game::Lake::new(vec![0]),
                game::Lake::uninfested(),
                game::Lake::new(vec![0]),
            ],
            vec![
                game::County { budget: 0, lakes: vec![1] },
                game::County { budget: 1, lakes: vec![0, 2] },
            ],
            vec![
                game::Arc { from: 0, to: 1, weight: 4 },
                game::Arc { from: 2, to: 1, weight: 3 },
            ],
        )
        .unwrap();
        let m = build_best_response(&inst, 0, UtilityKind::Selfish, &sel(3, &[0]));
        let r = solve(&m).unwrap();
        assert_eq!(r.objective, 4);
        assert!(!r.profile.unwrap().is_selected(1));
    }

    #[test]
    fn side_constraint_infeasible() {
        let inst = fixtures::fig2();
        let mut model = build_sb(&inst);
        // A's selfish arcs total 7, so 8 is out of reach
        model.side_constraints.push(LinearConstraint {
            x_coefs: vec![],
            y_coefs: inst
                .utility_arcs(UtilityKind::Selfish, 0)
                .iter()
                .map(|&a| (a, inst.arc(a).weight))
                .collect(),
            sense: Sense::Ge,
            rhs: 8,
        });
        assert_eq!(solve(&model).unwrap().status, SolveStatus::Infeasible);
        model.side_constraints[0].rhs = 7;
        let r = solve(&model).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.profile.unwrap(), sel(6, &[0, 4]));
    }

    #[test]
    fn pne_bounded_examples() {
        let inst = fixtures::fig2();
        let pne = sel(6, &[2, 3]);
        let mut m = build_pne_bounded(&inst, &pne);
        m.warm_start = Some(pne.clone());
        let r = solve(&m).unwrap();
        assert_eq!(r.objective, 15);
        assert_eq!(r.profile.unwrap(), pne);

        let zero = build_pne_bounded(&inst, &sel(6, &[]));
        assert_eq!(solve(&zero).unwrap().objective, solve(&build_sb(&inst)).unwrap().objective);

        let k2 = fixtures::k2ce();
        for p in [sel(4, &[0, 2]), sel(4, &[1, 3]), sel(4, &[1])] {
            let m = build_pne_bounded(&k2, &p);
            let r = solve(&m).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal);
            assert!(r.objective >= game::phi(&k2, &p));
            assert_eq!(Some(r.objective), enumerate(&m));
        }
    }

    #[test]
    fn equilibrium_cut_examples() {
        let inst = fixtures::fig2();
        let cut = equilibrium_cut(&inst, 0, &[2]);
        let pne = sel(6, &[2, 3]);
        assert!(cut.is_satisfied(&inst, &pne));
        // 6 ≤ 6: tight
        assert_eq!(cut.lhs(&inst, &pne), cut.rhs);
        assert!(!cut.is_satisfied(&inst, &sel(6, &[0, 3])));
    }

    #[test]
    fn cut_matches_its_definition() {
        let inst = generate(&GenParams::new(3, 4, 2, 0.8, 3)).unwrap();
        let c = 1;
        let dev: Vec<usize> = inst.county(c).lakes.iter().copied().take(inst.county(c).budget).collect();
        let cut = equilibrium_cut(&inst, c, &dev);
        for mask in 0u32..(1 << inst.num_lakes()) {
            let x = StrategyProfile::from_flags((0..inst.num_lakes()).map(|i| mask >> i & 1 == 1).collect());
            let deviated = x.with_county_selection(&inst, c, &dev);
            let expected = game::utility(&inst, UtilityKind::Selfish, c, &deviated)
                <= game::utility(&inst, UtilityKind::Selfish, c, &x);
            assert_eq!(cut.is_satisfied(&inst, &x), expected);
        }
    }

    #[test]
    fn warm_start_preferred_on_ties() {
        let inst = fixtures::fig2();
        let mut m = build_sb(&inst);
        m.warm_start = Some(sel(6, &[2, 3]));
        let r = solve(&m).unwrap();
        assert_eq!(r.objective, 15);
        assert_eq!(r.profile.unwrap(), sel(6, &[2, 3]));
    }

    #[test]
    fn invalid_models_rejected() {
        let inst = fixtures::fig2();
        let mut m = build_sb(&inst);
        m.fixed.pop();
        assert!(matches!(solve(&m), Err(Error::InvalidModel(_))));
        let mut m = build_sb(&inst);
        m.warm_start = Some(sel(6, &[0, 1]));
        assert!(matches!(solve(&m), Err(Error::InvalidModel(_))));
        let mut m = build_best_response(&inst, 0, UtilityKind::Selfish, &sel(6, &[3]));
        m.warm_start = Some(sel(6, &[0]));
        assert!(matches!(solve(&m), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn time_limit_returns_incumbent() {
        let inst = generate(&GenParams::new(6, 20, 1, 0.8, 1)).unwrap();
        let mut m = build_sb(&inst);
        let ws = StrategyProfile::zeros(inst.num_lakes());
        m.warm_start = Some(ws);
        m.time_limit = Some(Duration::from_millis(0));
        let r = solve(&m).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimitIncumbent);
        assert_eq!(r.objective, 0);
        m.warm_start = None;
        assert_eq!(solve(&m).unwrap().status, SolveStatus::TimeLimitNoIncumbent);
    }

    fn small_instance() -> impl Strategy<Value = (Instance, u64)> {
        (1usize..4, 2usize..5, prop::sample::select(vec![1usize, 2, 4]), 0.3f64..1.0, any::<u64>())
            .prop_filter("at most 12 lakes", |(c, l, ..)| c * l <= 12)
            .prop_map(|(c, l, k, r, seed)| (generate(&GenParams::new(c, l, k, r, seed)).unwrap(), seed))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sb_matches_enumeration((inst, _) in small_instance()) {
            let m = build_sb(&inst);
            let r = solve(&m).unwrap();
            prop_assert_eq!(Some(r.objective), enumerate(&m));
            prop_assert_eq!(r.objective, game::phi(&inst, r.profile.as_ref().unwrap()));
        }

        #[test]
        fn node_bounds_are_admissible((inst, seed) in small_instance()) {
            // a node is a partial assignment; model it by fixing a prefix of lakes
            let n = inst.num_lakes();
            let mut m = build_sb(&inst);
            for i in 0..(seed as usize % (n + 1)) {
                m.fixed[i] = Some((seed >> (i % 64)) & 1 == 1);
            }
            if let Some(opt) = enumerate(&m) {
                prop_assert!(objective_upper_bound(&m).unwrap() >= opt);
            }
        }

        #[test]
        fn warm_start_never_hurts((inst, seed) in small_instance()) {
            let mut m = build_sb(&inst);
            let mut ws = StrategyProfile::zeros(inst.num_lakes());
            for c in 0..inst.num_counties() {
                let lakes = &inst.county(c).lakes;
                for k in 0..inst.county(c).budget {
                    ws.set(lakes[(seed as usize + k) % lakes.len()], true);
                }
            }
            prop_assume!(ws.is_feasible(&inst));
            let ws_value = game::phi(&inst, &ws);
            m.warm_start = Some(ws);
            let r = solve(&m).unwrap();
            prop_assert!(r.objective >= ws_value);
            prop_assert_eq!(solve(&m).unwrap(), r);
        }
    }
}
