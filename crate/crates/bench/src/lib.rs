//! Shared fixtures for the criterion benchmarks.

use qnn_core::hamiltonian::bundled;
use qnn_core::learning::bundled as datasets;
use qnn_core::state::catalog;
use qnn_core::{DensityMatrix, Schedule, TrainingPair};

pub fn set1_schedule() -> Schedule {
    bundled::set1()
}

pub fn named_state(name: &str) -> DensityMatrix {
    catalog(name, &[])
        .and_then(|s| s.density())
        .expect("catalogue state")
}

/// A set2 training pair by label.
pub fn set2_pair(label: &str) -> TrainingPair {
    datasets::set2()
        .pairs
        .into_iter()
        .find(|p| p.label == label)
        .expect("set2 label")
}
