//! Acceptance checks. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_optimum, random_profile_any_size, random_slice, small_instance};
use ebmc::dynamics::{
    br_plus, brs_free, check_separation_enumerated, count_profiles, enumerate_pne, zr,
    BrPlusExit, DynamicsConfig,
};
use ebmc::experiment::{
    rows_match_ignoring_time, run_plan, verify_counterexamples, AlgorithmSpec, ExperimentPlan,
    InstanceSource, TimeLimits,
};
use ebmc::fixtures;
use ebmc::game::{
    check_separation, non_game_profile, phi, theorem2_condition, utility, NonGameCondition,
    StrategyProfile, UtilityKind,
};
use ebmc::instance_io::{generate, GenParams};
use ebmc::solver::{self, SolveStatus};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn counterexamples() -> Check {
    let reports = verify_counterexamples();
    let failures: Vec<String> = reports.iter().flat_map(|r| r.failures()).collect();
    let summary: Vec<String> = reports
        .iter()
        .map(|r| format!("{}: {} profiles, {} equilibria", r.name, r.profiles, r.equilibria.len()))
        .collect();
    if failures.is_empty() {
        Ok(summary.join("; "))
    } else {
        Err(format!("{}; {}", summary.join("; "), failures.join("; ")))
    }
}

fn fig2_equilibrium() -> Check {
    let inst = fixtures::fig2();
    let zero = StrategyProfile::zeros(6);
    let target = StrategyProfile::from_selected(6, [2, 3]);
    let cfg = DynamicsConfig::default();
    let brs = brs_free(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
    let brp = br_plus(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
    let z = zr(&inst, None, &cfg).map_err(|e| e.to_string())?;
    for (name, got) in [("BRS", &brs.pne), ("BRP", &brp.best), ("ZR", &z.pne)] {
        ensure(got.as_ref() == Some(&target), || format!("{} returned {:?}", name, got))?;
        ensure(phi(&inst, &target) == 15, || "phi of {A3,B1} is not 15".into())?;
    }
    ensure(brs.record.rounds <= 3, || format!("BRS took {} rounds", brs.record.rounds))?;
    Ok(format!("all three return {} with phi 15; BRS rounds {}", target, brs.record.rounds))
}

fn potential_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut deviations = 0;
    for i in 0..50u64 {
        let counties = 2 + (i % 4) as usize;
        let lakes = 5 + (i % 6) as usize;
        let k = if i % 2 == 0 { 1 } else { 4 };
        let inst = generate(&GenParams::new(counties, lakes, k, 0.5, 1000 + i))
            .map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let x = random_profile_any_size(&inst, &mut rng);
            let sum: i64 = (0..counties).map(|c| utility(&inst, UtilityKind::Selfish, c, &x)).sum();
            ensure(sum == phi(&inst, &x), || {
                format!("instance {}: phi {} != selfish sum {} at {}", i, phi(&inst, &x), sum, x)
            })?;
        }
        for _ in 0..100 {
            let x = random_profile_any_size(&inst, &mut rng);
            let c = rng.gen_range(0..counties);
            let y = x.with_county_selection(&inst, c, &random_slice(&inst, c, &mut rng));
            let dphi = phi(&inst, &y) - phi(&inst, &x);
            let du = utility(&inst, UtilityKind::Altruistic, c, &y)
                - utility(&inst, UtilityKind::Altruistic, c, &x);
            ensure(dphi == du, || {
                format!("instance {}: county {} {} -> {}: dphi {} du {}", i, c, x, y, dphi, du)
            })?;
            deviations += 1;
        }
    }
    Ok(format!("50 instances, 500 profiles, {} deviations exact", deviations))
}

fn social_optimum_is_altruistic_equilibrium() -> Check {
    let mut found = 0;
    let mut seed = 0u64;
    while found < 20 {
        seed += 1;
        let p = GenParams::new(
            2 + (seed % 3) as usize,
            4 + (seed % 5) as usize,
            1 + (seed % 3) as usize,
            [0.3, 0.5, 0.7][(seed % 3) as usize],
            seed,
        );
        let inst = generate(&p).map_err(|e| e.to_string())?;
        if inst.total_budget() > 12 {
            continue;
        }
        found += 1;
        let res = solver::solve(&solver::build_sb(&inst)).map_err(|e| e.to_string())?;
        ensure(res.status == SolveStatus::Optimal, || format!("seed {}: {:?}", seed, res.status))?;
        let x = res.profile.unwrap();
        let cert = check_separation(&inst, UtilityKind::Altruistic, &x).map_err(|e| e.to_string())?;
        ensure(cert.is_pne(), || format!("seed {}: social optimum {} deviates: {:?}", seed, x, cert))?;
        ensure(check_separation_enumerated(&inst, UtilityKind::Altruistic, &x).is_pne(), || {
            format!("seed {}: enumeration finds a deviation from {}", seed, x)
        })?;
    }
    Ok(format!("20 instances (seeds up to {})", seed))
}

fn non_game_profiles() -> Check {
    let cases = [
        ("all-uninfested", fixtures::theorem2_all_uninfested(), NonGameCondition::AllUninfested),
        (
            "all-infested",
            fixtures::theorem2_all_infested(),
            NonGameCondition::AllInfestedSingleAis,
        ),
    ];
    for (name, inst, expected) in &cases {
        let ng = non_game_profile(inst).map_err(|e| e.to_string())?;
        let cond = theorem2_condition(inst, &ng);
        ensure(cond == *expected, || format!("{}: condition {:?}", name, cond))?;
        let cert = check_separation(inst, UtilityKind::Selfish, &ng).map_err(|e| e.to_string())?;
        ensure(cert.is_pne(), || format!("{}: {} deviates: {:?}", name, ng, cert))?;
        ensure(check_separation_enumerated(inst, UtilityKind::Selfish, &ng).is_pne(), || {
            format!("{}: enumeration finds a deviation", name)
        })?;
    }
    let mut generated = 0;
    for seed in 0..60 {
        let inst = generate(&GenParams::new(3, 5, 1, 0.4, seed)).map_err(|e| e.to_string())?;
        let ng = non_game_profile(&inst).map_err(|e| e.to_string())?;
        if theorem2_condition(&inst, &ng) == NonGameCondition::NotApplicable {
            continue;
        }
        generated += 1;
        ensure(check_separation(&inst, UtilityKind::Selfish, &ng).map_err(|e| e.to_string())?.is_pne(), || {
            format!("generated seed {}: non-game profile {} deviates", seed, ng)
        })?;
    }
    Ok(format!("both constructed instances plus {} generated instances meeting a condition", generated))
}

fn oracle_equivalence() -> Check {
    let mut instances = 0;
    let mut with_pne = 0;
    let mut cuts_checked = 0;
    let mut seed = 0u64;
    // the bundled no-equilibrium instance, then 20 generated ones
    while instances < 21 {
        seed += 1;
        let inst = if instances == 0 { fixtures::k2ce() } else { small_instance(seed) };
        if count_profiles(&inst) > 100_000 {
            continue;
        }
        instances += 1;
        let list = enumerate_pne(&inst, UtilityKind::Selfish, 100_000).map_err(|e| e.to_string())?;
        let listed: Vec<&StrategyProfile> = list.iter().map(|(p, _)| p).collect();
        if !list.is_empty() {
            with_pne += 1;
        }
        let zero = StrategyProfile::zeros(inst.num_lakes());
        let cfg = DynamicsConfig { seed, ..Default::default() };

        let brs = brs_free(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
        if let Some(p) = &brs.pne {
            ensure(listed.contains(&p), || format!("seed {}: BRS returned unlisted {}", seed, p))?;
        }
        let brp = br_plus(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
        for p in brp.pne_list.iter().chain(brp.best.iter()) {
            ensure(listed.contains(&p), || format!("seed {}: BR-plus returned unlisted {}", seed, p))?;
        }
        for all in [false, true] {
            let cfg = DynamicsConfig { zr_cut_all_deviations: all, ..cfg.clone() };
            let z = zr(&inst, None, &cfg).map_err(|e| e.to_string())?;
            match (&z.pne, list.first()) {
                (None, None) => {}
                (Some(p), Some((_, best))) => {
                    ensure(listed.contains(&p), || format!("seed {}: ZR returned unlisted {}", seed, p))?;
                    ensure(phi(&inst, p) == *best, || {
                        format!("seed {}: ZR phi {} but best listed {}", seed, phi(&inst, p), best)
                    })?;
                }
                (got, best) => {
                    return Err(format!("seed {}: ZR {:?} vs enumeration {:?}", seed, got, best))
                }
            }
            for cut in &z.cuts {
                for p in &listed {
                    ensure(cut.is_satisfied(&inst, p), || {
                        format!("seed {}: a cut removes listed equilibrium {}", seed, p)
                    })?;
                    cuts_checked += 1;
                }
            }
        }
    }
    Ok(format!(
        "k2ce plus 20 generated instances ({} with equilibria), {} cut/equilibrium pairs",
        with_pne, cuts_checked
    ))
}

fn solver_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut infeasible = 0;
    for m in 0..200u64 {
        // at most 12 lakes
        let inst = generate(&GenParams::new(
            2 + (m % 2) as usize,
            3 + (m / 2 % 2) as usize,
            1 + (m % 3) as usize,
            [0.5, 1.0][(m / 4 % 2) as usize],
            500 + m,
        ))
        .map_err(|e| e.to_string())?;
        let mut model = match m % 5 {
            0 => solver::build_sb(&inst),
            1 => {
                let x = random_profile_any_size(&inst, &mut rng);
                let c = rng.gen_range(0..inst.num_counties());
                let kind = if rng.gen_bool(0.5) { UtilityKind::Selfish } else { UtilityKind::Altruistic };
                solver::build_best_response(&inst, c, kind, &x)
            }
            2 => {
                let x = random_profile_any_size(&inst, &mut rng);
                let bound = brs_free(&inst, &x, &DynamicsConfig { init_max: 1, ..Default::default() })
                    .map_err(|e| e.to_string())?
                    .pne
                    .unwrap_or(x);
                solver::build_pne_bounded(&inst, &bound)
            }
            3 => {
                let mut sb = solver::build_sb(&inst);
                for _ in 0..rng.gen_range(1..=4) {
                    let c = rng.gen_range(0..inst.num_counties());
                    let s = random_slice(&inst, c, &mut rng);
                    sb.side_constraints.push(solver::equilibrium_cut(&inst, c, &s));
                }
                sb
            }
            _ => {
                let mut sb = solver::build_sb(&inst);
                for i in 0..inst.num_lakes() {
                    if rng.gen_bool(0.2) {
                        sb.fixed[i] = Some(false);
                    }
                }
                let x = random_profile_any_size(&inst, &mut rng);
                sb.side_constraints = solver::build_pne_bounded(&inst, &x).side_constraints;
                sb
            }
        };
        if rng.gen_bool(0.5) {
            let ws = random_profile_any_size(&inst, &mut rng);
            let mut ws = ws;
            for (i, f) in model.fixed.iter().enumerate() {
                if let Some(v) = f {
                    ws.set(i, *v);
                }
            }
            if model.respects_domain(&ws) {
                model.warm_start = Some(ws);
            }
        }
        ensure(model.free_lakes().count() <= 12, || format!("model {} has too many free lakes", m))?;
        let res = solver::solve(&model).map_err(|e| e.to_string())?;
        match brute_force_optimum(&model) {
            None => {
                infeasible += 1;
                ensure(res.status == SolveStatus::Infeasible, || {
                    format!("model {}: enumeration infeasible, solver {:?}", m, res.status)
                })?
            }
            Some((v, _)) => {
                ensure(res.status == SolveStatus::Optimal && res.objective == v, || {
                    format!("model {}: enumeration {}, solver {:?} {}", m, v, res.status, res.objective)
                })?;
                let p = res.profile.as_ref().unwrap();
                ensure(model.is_feasible(p) && model.objective_value(p) == v, || {
                    format!("model {}: returned profile inconsistent", m)
                })?;
            }
        }
    }
    Ok(format!("200 models agree with enumeration ({} infeasible)", infeasible))
}

fn br_plus_improvement() -> Check {
    let mut tried = Vec::new();
    let mut improved = 0;
    let mut seed = 0u64;
    while tried.len() < 5 && seed < 2000 {
        seed += 1;
        let inst = small_instance(seed);
        if count_profiles(&inst) > 100_000 {
            continue;
        }
        let list = enumerate_pne(&inst, UtilityKind::Selfish, 100_000).map_err(|e| e.to_string())?;
        if list.len() < 2 || list.first().unwrap().1 == list.last().unwrap().1 {
            continue;
        }
        let (worst, worst_phi) = list.last().unwrap().clone();
        let out = br_plus(&inst, &worst, &DynamicsConfig::default()).map_err(|e| e.to_string())?;
        ensure(out.pne_list.first() == Some(&worst), || {
            format!("seed {}: first equilibrium is not the starting one", seed)
        })?;
        let best_phi = out.best.as_ref().map(|p| phi(&inst, p)).unwrap_or(i64::MIN);
        let better = best_phi > worst_phi;
        ensure(better || out.exit == BrPlusExit::BoundedOptimal, || {
            format!("seed {}: no improvement and exit {:?}", seed, out.exit)
        })?;
        if better {
            improved += 1;
        }
        tried.push(format!("seed {} phi {} -> {}", seed, worst_phi, best_phi));
    }
    ensure(!tried.is_empty(), || "no instance with equilibria of different potential".into())?;
    Ok(format!("{} of {} improved strictly ({})", improved, tried.len(), tried.join(", ")))
}

fn determinism() -> Check {
    let mut instances: Vec<InstanceSource> = (0..4)
        .map(|s| InstanceSource::Generated(GenParams::new(3, 5, 1 + s as usize % 2, 0.6, 40 + s)))
        .collect();
    instances.push(InstanceSource::Builtin("fig2".into()));
    instances.push(InstanceSource::Builtin("k2ce".into()));
    let plan = ExperimentPlan {
        instances,
        algorithms: AlgorithmSpec::ALL.to_vec(),
        limits: TimeLimits { sb: None, sbw: None, zr: None, bounded: None },
        seed: 11,
        ..Default::default()
    };
    let a = run_plan(&plan, 4).map_err(|e| e.to_string())?;
    let b = run_plan(&plan, 1).map_err(|e| e.to_string())?;
    ensure(rows_match_ignoring_time(&a.rows, &b.rows), || "row sets differ".into())?;
    let strip = |res: &ebmc::experiment::ExperimentResults| {
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f[10] = "";
                f.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    ensure(strip(&a) == strip(&b), || "CSV text differs beyond elapsed_s".into())?;
    Ok(format!("{} rows identical across reruns", a.rows.len()))
}

fn scale_smoke() -> Check {
    let inst = generate(&GenParams::new(10, 20, 1, 0.3, 1)).map_err(|e| e.to_string())?;
    let zero = StrategyProfile::zeros(inst.num_lakes());
    let cfg = DynamicsConfig::default();
    let brs = brs_free(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
    let brp = br_plus(&inst, &zero, &cfg).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} lakes, {} arcs: BRS phi {:?} in {:.2}s, BRP phi {:?} in {:.2}s",
        inst.num_lakes(),
        inst.num_arcs(),
        brs.record.phi,
        brs.record.elapsed.as_secs_f64(),
        brp.record.phi,
        brp.record.elapsed.as_secs_f64()
    ))
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "counterexamples have no equilibrium", limit: secs(5), run: counterexamples },
        Criterion { id: 2, title: "fig2 equilibrium from all three searches", limit: secs(1), run: fig2_equilibrium },
        Criterion { id: 3, title: "potential identities", limit: secs(30), run: potential_identities },
        Criterion { id: 4, title: "social optimum is an altruistic equilibrium", limit: secs(60), run: social_optimum_is_altruistic_equilibrium },
        Criterion { id: 5, title: "non-game profile equilibria", limit: secs(5), run: non_game_profiles },
        Criterion { id: 6, title: "searches agree with enumeration", limit: secs(300), run: oracle_equivalence },
        Criterion { id: 7, title: "branch and bound is exact", limit: secs(120), run: solver_exactness },
        Criterion { id: 8, title: "BR-plus improves or stops on the bounded model", limit: secs(60), run: br_plus_improvement },
        Criterion { id: 9, title: "reruns are deterministic", limit: secs(120), run: determinism },
        Criterion { id: 10, title: "10x20 scale smoke test", limit: secs(60), run: scale_smoke },
    ];

    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        let key = format!("criterion_{}", c.id);
        if !filter.is_empty() && !filter.iter().any(|f| key.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let took = started.elapsed();
        let result = match result {
            Ok(d) if took > c.limit => Err(format!("took {:.2}s, limit {}s ({})", took.as_secs_f64(), c.limit.as_secs(), d)),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!(
            "criterion {:>2} {} {} [{:.2}s]: {}",
            c.id,
            tag,
            c.title,
            took.as_secs_f64(),
            detail
        );
    }
    println!("\nacceptance: {} passed, {} failed", ran - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
