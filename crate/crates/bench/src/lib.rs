//! Shared inputs for the criterion benchmarks.

use bazaikin::{Manifold, QTuple};

/// Five-integer forms with small, medium and large invariants.
pub const SAMPLE_QBARS: [[i64; 5]; 4] = [
    [1, 1, 1, 1, 1],
    [-11, 13, 45, 67, 77],
    [-13, 33, 41, 105, 137],
    [-123, 149, 197, 201, 525],
];

pub fn sample_manifolds() -> Vec<Manifold> {
    SAMPLE_QBARS
        .iter()
        .map(|q| {
            let text = q.map(|x| x.to_string()).join(",");
            let tuple: QTuple = text.parse().expect("valid sample");
            Manifold::new(tuple).expect("free sample")
        })
        .collect()
}
