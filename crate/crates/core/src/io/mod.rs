//! Run configuration, CSV series, JSON reports and binary checkpoints.

pub mod checkpoint;
pub mod config;
pub mod report;
pub mod series;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, MAGIC};
pub use config::{parse_config, RunConfig};
pub use report::{build_id, write_report, Report};
pub use series::{read_csv, write_csv, CSV_HEADER};
