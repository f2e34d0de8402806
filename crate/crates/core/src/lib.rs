// SPDX-License-Identifier: Apache-2.0

//! Failure triage for RTL simulation regressions.
//!
//! The crate turns failing VCD waveforms into compact statistical feature
//! tables and classifies each failure to the RTL module most likely to hold
//! the bug. It also carries the tooling used to build labeled training sets:
//! a rule-based source mutator, a parallel scenario dispatcher and a
//! generator for synthetic fixture designs.
//!
//! Module map:
//!  * [`vcd`]: streaming VCD reader and writer.
//!  * [`rtl`]: Verilog/SystemVerilog declaration scanner producing the module
//!    lookup table.
//!  * [`select`]: hierarchical signal pruning against the lookup table.
//!  * [`extract`]: window sampling, trim/pad, statistical compression and
//!    dataset assembly.
//!  * [`feature_select`]: importance-based signal reduction.
//!  * [`ml`]: KNN, random forest and gradient-boosted trees plus metrics.
//!  * [`mutate`]: bug planning, reversible patching and the accept/reject loop.
//!  * [`orchestrate`]: dispatcher, workers and the data pipeline.
//!  * [`fixtures`]: desk-scale designs, replay simulation and failing dumps.

pub mod extract;
mod exec;
pub mod feature_select;
pub mod fixtures;
pub mod ml;
pub mod mutate;
pub mod orchestrate;
pub mod rtl;
pub mod seed;
pub mod select;
pub mod vcd;

pub use extract::{Dataset, FeatureRow, Stat, StatSet, ValueEncoding, WaveWindow};
pub use ml::{ClassifierModel, MetricsReport, ModelKind};
pub use rtl::ModuleLookupTable;
pub use select::SelectionReport;
pub use vcd::{ScopeTree, SignalDecl, ValueChange};
