#![allow(dead_code)]

use ebmc::game::{Instance, StrategyProfile, Weight};
use ebmc::instance_io::{generate, GenParams};
use ebmc::solver::ModelSpec;
use rand::seq::SliceRandom;
use rand::Rng;

/// Best feasible objective of a model by trying every assignment of its
/// free lakes. `None` when nothing is feasible.
pub fn brute_force_optimum(model: &ModelSpec<'_>) -> Option<(Weight, StrategyProfile)> {
    let free: Vec<usize> = model.free_lakes().collect();
    assert!(free.len() <= 20, "too many free lakes for brute force");
    let mut base = StrategyProfile::zeros(model.instance.num_lakes());
    for (i, f) in model.fixed.iter().enumerate() {
        if *f == Some(true) {
            base.set(i, true);
        }
    }
    let mut best: Option<(Weight, StrategyProfile)> = None;
    for mask in 0u32..(1 << free.len()) {
        let mut x = base.clone();
        for (b, &i) in free.iter().enumerate() {
            x.set(i, mask >> b & 1 == 1);
        }
        if !model.is_feasible(&x) {
            continue;
        }
        let v = model.objective_value(&x);
        if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
            best = Some((v, x));
        }
    }
    best
}

/// Random budget-feasible profile; each county selects a uniformly drawn
/// number of lakes.
pub fn random_profile_any_size<R: Rng>(inst: &Instance, rng: &mut R) -> StrategyProfile {
    let mut x = StrategyProfile::zeros(inst.num_lakes());
    for c in 0..inst.num_counties() {
        for i in random_slice(inst, c, rng) {
            x.set(i, true);
        }
    }
    x
}

pub fn random_slice<R: Rng>(inst: &Instance, c: usize, rng: &mut R) -> Vec<usize> {
    let county = inst.county(c);
    let k = rng.gen_range(0..=county.budget.min(county.lakes.len()));
    let mut s: Vec<usize> = county.lakes.choose_multiple(rng, k).copied().collect();
    s.sort_unstable();
    s
}

/// Small generated instance; shape varies with the seed.
pub fn small_instance(seed: u64) -> Instance {
    let counties = 2 + (seed % 2) as usize;
    let lakes = 3 + (seed % 3) as usize;
    let types = 1 + (seed % 3) as usize;
    let ratio = [0.5, 0.75, 1.0][(seed / 3 % 3) as usize];
    generate(&GenParams::new(counties, lakes, types, ratio, seed)).unwrap()
}
