use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Arc, County, Instance, Lake, Weight};

/// Per-type infestation probability choices of the random benchmark. Types
/// beyond the fourth reuse the last list.
pub const TABLE2_INFESTATION_CHOICES: [&[f64]; 4] = [
    &[0.2, 0.4, 0.6, 0.8, 1.0],
    &[0.2, 0.4, 0.6, 0.8],
    &[0.2, 0.4, 0.6],
    &[0.2, 0.4],
];

/// Boats moving from a lake with `tail_types` to one with `head_types` can
/// carry every type present at the tail but absent at the head.
pub fn risky_weight(traffic: i64, tail_types: &[usize], head_types: &[usize]) -> Weight {
    let transferable = tail_types
        .iter()
        .filter(|t| !head_types.contains(t))
        .count() as i64;
    traffic * transferable
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub num_counties: usize,
    pub lakes_per_county: usize,
    pub num_ais_types: usize,
    pub budget_ratio: f64,
    /// One list of candidate probabilities per AIS type.
    pub infestation_prob_choices: Vec<Vec<f64>>,
    pub edge_deletion_ratio: f64,
    /// Inclusive range of base boat traffic per ordered lake pair.
    pub traffic_range: (i64, i64),
    pub seed: u64,
}

impl GenParams {
    /// Benchmark defaults: per-type probability lists, 20% arc deletion for a
    /// single type and 50% otherwise, traffic in 10..=20.
    pub fn new(
        num_counties: usize,
        lakes_per_county: usize,
        num_ais_types: usize,
        budget_ratio: f64,
        seed: u64,
    ) -> Self {
        let choices = (0..num_ais_types)
            .map(|t| TABLE2_INFESTATION_CHOICES[t.min(3)].to_vec())
            .collect();
        GenParams {
            num_counties,
            lakes_per_county,
            num_ais_types,
            budget_ratio,
            infestation_prob_choices: choices,
            edge_deletion_ratio: if num_ais_types == 1 { 0.2 } else { 0.5 },
            traffic_range: (10, 20),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.num_counties == 0 {
            return bad("num_counties must be positive".into());
        }
        if self.lakes_per_county == 0 {
            return bad("lakes_per_county must be positive".into());
        }
        if self.num_ais_types == 0 {
            return bad("num_ais_types must be positive".into());
        }
        if !(self.budget_ratio > 0.0 && self.budget_ratio <= 1.0) {
            return bad(format!("budget_ratio {} not in (0, 1]", self.budget_ratio));
        }
        if self.infestation_prob_choices.len() < self.num_ais_types {
            return bad(format!(
                "{} infestation probability lists for {} AIS types",
                self.infestation_prob_choices.len(),
                self.num_ais_types
            ));
        }
        for (t, choices) in self
            .infestation_prob_choices
            .iter()
            .take(self.num_ais_types)
            .enumerate()
        {
            if choices.is_empty() {
                return bad(format!("no infestation probabilities for type {}", t));
            }
            if let Some(p) = choices.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
                return bad(format!("infestation probability {} for type {} not in (0, 1]", p, t));
            }
        }
        if !(0.0..=1.0).contains(&self.edge_deletion_ratio) {
            return bad(format!(
                "edge_deletion_ratio {} not in [0, 1]",
                self.edge_deletion_ratio
            ));
        }
        let (lo, hi) = self.traffic_range;
        if lo < 1 || lo > hi {
            return bad(format!("traffic range [{}, {}] is empty or non-positive", lo, hi));
        }
        Ok(())
    }

    /// `counties_lakes_ratio_seed` style label.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_{}_k{}_s{}",
            self.num_counties, self.lakes_per_county, self.budget_ratio, self.num_ais_types, self.seed
        )
    }
}

fn floor_ratio(ratio: f64, count: usize) -> usize {
    (ratio * count as f64 + 1e-9).floor() as usize
}

/// Draws a random instance. All randomness comes from one ChaCha8 stream
/// consumed in a fixed order: type probabilities, lake infestations, pair
/// traffic, deleted pairs.
pub fn generate(params: &GenParams) -> Result<Instance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let k = params.num_ais_types;
    let n = params.num_counties * params.lakes_per_county;

    let probs: Vec<f64> = params.infestation_prob_choices[..k]
        .iter()
        .map(|choices| *choices.choose(&mut rng).expect("validated non-empty"))
        .collect();

    let lakes: Vec<Lake> = (0..n)
        .map(|_| {
            let types = probs
                .iter()
                .enumerate()
                .filter_map(|(t, &p)| rng.gen_bool(p).then_some(t))
                .collect();
            Lake::new(types)
        })
        .collect();

    let (lo, hi) = params.traffic_range;
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j, rng.gen_range(lo..=hi)));
            }
        }
    }

    let deleted = floor_ratio(params.edge_deletion_ratio, pairs.len());
    let mut keep = vec![true; pairs.len()];
    for d in index::sample(&mut rng, pairs.len(), deleted) {
        keep[d] = false;
    }

    let arcs = pairs
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .filter_map(|(&(i, j, traffic), _)| {
            let w = risky_weight(traffic, &lakes[i].infested_types, &lakes[j].infested_types);
            (w > 0).then_some(Arc { from: i, to: j, weight: w })
        })
        .collect();

    let counties = (0..params.num_counties)
        .map(|c| {
            let members: Vec<usize> =
                (c * params.lakes_per_county..(c + 1) * params.lakes_per_county).collect();
            let infested = members.iter().filter(|&&i| lakes[i].is_infested()).count();
            County {
                budget: floor_ratio(params.budget_ratio, infested).min(members.len()),
                lakes: members,
            }
        })
        .collect();

    Instance::new(k, lakes, counties, arcs)
}
