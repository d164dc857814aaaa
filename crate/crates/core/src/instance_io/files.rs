use std::collections::HashMap;
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generate::risky_weight;
use crate::error::{Error, Result};
use crate::game::{Arc, County, Instance, Lake, Weight};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    version: u32,
    num_ais_types: usize,
    lakes: Vec<LakeRecord>,
    counties: Vec<CountyRecord>,
    arcs: Vec<ArcRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LakeRecord {
    id: usize,
    infested_types: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CountyRecord {
    id: usize,
    budget: usize,
    lakes: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcRecord {
    from: usize,
    to: usize,
    weight: Weight,
}

pub fn to_json_string(instance: &Instance) -> String {
    let file = InstanceFile {
        version: FORMAT_VERSION,
        num_ais_types: instance.num_ais_types(),
        lakes: instance
            .lakes()
            .iter()
            .enumerate()
            .map(|(id, l)| LakeRecord {
                id,
                infested_types: l.infested_types.clone(),
            })
            .collect(),
        counties: instance
            .counties()
            .iter()
            .enumerate()
            .map(|(id, c)| CountyRecord {
                id,
                budget: c.budget,
                lakes: c.lakes.clone(),
            })
            .collect(),
        arcs: instance
            .arcs()
            .iter()
            .map(|a| ArcRecord {
                from: a.from,
                to: a.to,
                weight: a.weight,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

pub fn from_json_str(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
        Error::format(
            Some(e.line() as u64),
            format!("column {}: {}", e.column(), e),
        )
    })?;
    if file.version != FORMAT_VERSION {
        return Err(Error::format(
            None,
            format!("field `version`: unsupported version {}", file.version),
        ));
    }
    for (pos, lake) in file.lakes.iter().enumerate() {
        if lake.id != pos {
            return Err(Error::format(
                None,
                format!("field `lakes[{}].id`: expected dense id {}, found {}", pos, pos, lake.id),
            ));
        }
    }
    for (pos, county) in file.counties.iter().enumerate() {
        if county.id != pos {
            return Err(Error::format(
                None,
                format!(
                    "field `counties[{}].id`: expected dense id {}, found {}",
                    pos, pos, county.id
                ),
            ));
        }
    }
    Instance::new(
        file.num_ais_types,
        file.lakes
            .into_iter()
            .map(|l| Lake::new(l.infested_types))
            .collect(),
        file.counties
            .into_iter()
            .map(|c| County {
                budget: c.budget,
                lakes: c.lakes,
            })
            .collect(),
        file.arcs
            .into_iter()
            .map(|a| Arc {
                from: a.from,
                to: a.to,
                weight: a.weight,
            })
            .collect(),
    )
    .map_err(|e| match e {
        Error::Format { .. } => e,
        other => Error::format(None, other.to_string()),
    })
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(instance))?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    from_json_str(&text).map_err(|e| e.with_path(path))
}

#[derive(Debug, Deserialize)]
struct LakeRow {
    lake_id: i64,
    county_id: i64,
    #[serde(default)]
    infested_types: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ArcRow {
    from: i64,
    to: i64,
    traffic: i64,
}

#[derive(Debug, Deserialize)]
struct BudgetRow {
    county_id: i64,
    budget: i64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(Option<u64>, T)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(e).with_path(path))?;
    let headers = reader
        .headers()
        .map_err(|e| csv_error(e).with_path(path))?
        .clone();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e).with_path(path))?;
        let line = record.position().map(|p| p.line());
        let row = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::format(line, e.to_string()).with_path(path))?;
        rows.push((line, row));
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => Error::format(line, message),
    }
}

/// Builds an instance from traffic CSVs (`lake_id,county_id,infested_types`,
/// `from,to,traffic`, `county_id,budget`). Ids may be arbitrary integers;
/// lakes and counties are numbered in order of first appearance in the lakes
/// file. Infestation types are `;`-separated non-negative integers. Arc
/// weights are risky weights; zero-weight arcs are dropped and budgets are
/// clamped to the county size.
pub fn load_traffic_csv(
    lakes_path: impl AsRef<Path>,
    arcs_path: impl AsRef<Path>,
    budgets_path: impl AsRef<Path>,
) -> Result<Instance> {
    let (lakes_path, arcs_path, budgets_path) =
        (lakes_path.as_ref(), arcs_path.as_ref(), budgets_path.as_ref());

    let mut lake_index: HashMap<i64, usize> = HashMap::new();
    let mut county_index: HashMap<i64, usize> = HashMap::new();
    let mut lakes = Vec::new();
    let mut counties: Vec<County> = Vec::new();
    let mut max_type = 0usize;
    for (line, row) in read_rows::<LakeRow>(lakes_path)? {
        let fail = |msg: String| Error::format(line, msg).with_path(lakes_path);
        if lake_index.contains_key(&row.lake_id) {
            return Err(fail(format!("duplicate lake_id {}", row.lake_id)));
        }
        let mut types = Vec::new();
        for tok in row.infested_types.as_deref().unwrap_or("").split(';') {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            let t: usize = tok
                .parse()
                .map_err(|_| fail(format!("infested_types: `{}` is not a type index", tok)))?;
            max_type = max_type.max(t);
            types.push(t);
        }
        let idx = lakes.len();
        lake_index.insert(row.lake_id, idx);
        lakes.push(Lake::new(types));
        let c = *county_index.entry(row.county_id).or_insert_with(|| {
            counties.push(County {
                budget: 0,
                lakes: Vec::new(),
            });
            counties.len() - 1
        });
        counties[c].lakes.push(idx);
    }
    let num_types = max_type + 1;

    let mut budget_seen = vec![false; counties.len()];
    for (line, row) in read_rows::<BudgetRow>(budgets_path)? {
        let fail = |msg: String| Error::format(line, msg).with_path(budgets_path);
        let c = *county_index
            .get(&row.county_id)
            .ok_or_else(|| fail(format!("unknown county_id {}", row.county_id)))?;
        if budget_seen[c] {
            return Err(fail(format!("duplicate budget for county {}", row.county_id)));
        }
        if row.budget < 0 {
            return Err(fail(format!("negative budget {}", row.budget)));
        }
        budget_seen[c] = true;
        counties[c].budget = (row.budget as usize).min(counties[c].lakes.len());
    }
    if let Some(c) = budget_seen.iter().position(|&s| !s) {
        let id = county_index
            .iter()
            .find(|(_, &v)| v == c)
            .map(|(&k, _)| k)
            .unwrap_or_default();
        return Err(Error::format(None, format!("county {} has no budget row", id))
            .with_path(budgets_path));
    }

    let mut pairs = HashSet::new();
    let mut arcs = Vec::new();
    for (line, row) in read_rows::<ArcRow>(arcs_path)? {
        let fail = |msg: String| Error::format(line, msg).with_path(arcs_path);
        let from = *lake_index
            .get(&row.from)
            .ok_or_else(|| fail(format!("unknown lake id {}", row.from)))?;
        let to = *lake_index
            .get(&row.to)
            .ok_or_else(|| fail(format!("unknown lake id {}", row.to)))?;
        if from == to {
            return Err(fail(format!("self-loop at lake {}", row.from)));
        }
        if !pairs.insert((from, to)) {
            return Err(fail(format!("duplicate arc {}->{}", row.from, row.to)));
        }
        if row.traffic < 0 {
            return Err(fail(format!("negative traffic {}", row.traffic)));
        }
        let weight = risky_weight(
            row.traffic,
            &lakes[from].infested_types,
            &lakes[to].infested_types,
        );
        if weight > 0 {
            arcs.push(Arc { from, to, weight });
        }
    }

    Instance::new(num_types, lakes, counties, arcs)
}
