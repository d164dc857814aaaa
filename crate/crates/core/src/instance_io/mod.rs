//! Instance files, traffic CSV ingestion and random instance generation.

mod files;
mod generate;

pub use files::{
    from_json_str, load_instance, load_traffic_csv, save_instance, to_json_string,
};
pub use generate::{generate, risky_weight, GenParams, TABLE2_INFESTATION_CHOICES};
