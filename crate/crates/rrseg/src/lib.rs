//! IO, file formats, and pipeline glue for the robust referring image
//! segmentation toolkit. The algorithms live in `rrseg-core`; this crate
//! adds dataset files, prediction ingestion, report rendering, model
//! configuration files, and the `rrseg` command-line binary.

pub mod dataset;
pub mod error;
pub mod evalio;
pub mod formats;
pub mod json;
pub mod modelio;

pub use dataset::{
    build_robust_split, compute_stats, strategy_counts, validate_dataset_negatives, BuildOptions,
    Dataset, ImageInfo, RefRecord, Split, SplitStats,
};
pub use error::{Error, Result};
pub use evalio::{assemble_reference_evals, render_report_json, render_report_table};
pub use formats::{DatasetFile, PredictionJson, RleJson};
pub use modelio::{gradcheck_json, load_model_config, trace_json, ModelConfigFile};
