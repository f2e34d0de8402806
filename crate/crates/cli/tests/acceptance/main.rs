// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each test prints exactly one verdict line, written
//! straight to the process stdout so it shows even for passing tests.

mod fixture_corpus;
mod metrics_oracle;
mod mutation_loop;
mod parser_robustness;
mod prune_oracle;
mod reduction;

use std::io::Write;
use std::sync::{Mutex, MutexGuard};

static SERIAL: Mutex<()> = Mutex::new(());

/// Criteria run one at a time so wall-clock measurements do not compete.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id} [{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

pub fn cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
