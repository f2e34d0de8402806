// SPDX-License-Identifier: Apache-2.0

//! From a failing dump to a labeled feature table: sample the tail window,
//! trim or pad it to a fixed length, compress each signal to summary
//! statistics and stack the rows.

mod dataset;
mod encoding;
mod stats;
mod window;

pub use dataset::{assemble, signal_of, Dataset, Sample};
pub use encoding::ValueEncoding;
pub use stats::{column_stats, quantile, summarize, FeatureRow, Stat, StatSet};
pub use window::{sample_file, sample_window, standardize, WaveWindow};

use crate::vcd::VcdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("dump has no timestamps")]
    EmptyDump,
    #[error("selection is empty")]
    EmptySelection,
    #[error("row {row} has a different feature header")]
    HeaderMismatch { row: usize },
    #[error("no rows to assemble")]
    NoRows,
    #[error("unknown statistic `{0}`")]
    UnknownStat(String),
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error(transparent)]
    Vcd(#[from] VcdError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
