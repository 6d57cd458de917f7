//! Deterministic fixtures shared by the benchmarks.

use oracle_locc::{FunctionTable, Party, StateVector, Subsystem, C64};

/// `f(x) = x mod n_f` on `Z_m`, into `Z_m`, so that the value partition has
/// exactly `n_f` classes.
pub fn striped(m: usize, n_f: usize) -> FunctionTable {
    FunctionTable::new(m, m, (0..m).map(|x| x % n_f).collect()).expect("valid table")
}

/// A fixed, fully entangled input on `A ⊗ B`.
pub fn input(m: usize, n: usize) -> StateVector {
    let amps = (0..m * n)
        .map(|i| C64::new(1.0 + (i % 3) as f64, (i % 5) as f64 - 2.0))
        .collect();
    StateVector::normalized(
        vec![
            Subsystem::new("A", m, Party::Alice),
            Subsystem::new("B", n, Party::Bob),
        ],
        amps,
    )
    .expect("nonzero amplitudes")
}
