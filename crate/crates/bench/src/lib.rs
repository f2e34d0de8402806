// SPDX-License-Identifier: Apache-2.0

//! Shared inputs for the benchmarks.

use wavetriage_core::fixtures::{gen_design, gen_failing_vcd, Difficulty, FixtureDesign};

/// A fixture design and one failing dump of `ticks` ticks.
pub fn sample_dump(ticks: usize) -> (FixtureDesign, Vec<u8>) {
    let design = gen_design(9, 11).expect("valid module count");
    let label = design.targets()[1].clone();
    let bytes = gen_failing_vcd(&design, &label, ticks, 5, Difficulty::Easy, Vec::new()).expect("known label");
    (design, bytes)
}
