//! Standard oracle operators `U_f |x⟩|y⟩ = |x⟩|y ⊕ f(x)⟩` and their
//! structure.

mod decomposition;
mod function;
mod phase;

pub use decomposition::{schmidt_decompose_oracle, OracleSchmidtForm, SchmidtTerm};
pub use function::{
    build_partition, enumerate_functions, enumerate_permutations, FunctionTable, Partition,
};
pub use phase::{phase_exponential, phase_operator, phase_states};

use crate::error::{Error, Result};
use crate::quantum::{permutation_matrix, CMatrix, StateVector};

/// Largest `M·N` for which dense `U_f` matrices are built.
pub const DENSE_GUARD: usize = 4096;

/// Applies `U_f` with `control` as the `Z_M` register and `target` as the
/// `Z_N` register, as an index permutation.
pub fn apply_oracle(
    f: &FunctionTable,
    state: &StateVector,
    control: &str,
    target: &str,
) -> Result<StateVector> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    let cpos = state.position(control)?;
    let tpos = state.position(target)?;
    if cpos == tpos {
        return Err(Error::DuplicateLabel(control.to_string()));
    }
    let dims = state.dims();
    if dims[cpos] != m || dims[tpos] != n {
        return Err(Error::DimensionMismatch(format!(
            "oracle on Z_{m} -> Z_{n} applied to `{control}` (dim {}) and `{target}` (dim {})",
            dims[cpos], dims[tpos]
        )));
    }
    let strides = state.strides();
    let (cs, ts) = (strides[cpos], strides[tpos]);
    let src = state.amps();
    let mut out = vec![crate::quantum::C64::new(0.0, 0.0); src.len()];
    for (i, a) in src.iter().enumerate() {
        let x = (i / cs) % m;
        let y = (i / ts) % n;
        let y2 = (y + f.eval(x)) % n;
        out[i - y * ts + y2 * ts] = *a;
    }
    Ok(StateVector::from_raw(state.subsystems().to_vec(), out))
}

/// Dense `MN × MN` permutation matrix of `U_f` (row index `x·N + y`).
pub fn oracle_matrix(f: &FunctionTable) -> Result<CMatrix> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    if m * n > DENSE_GUARD {
        return Err(Error::SizeGuard(m * n, DENSE_GUARD));
    }
    Ok(permutation_matrix(m * n, |i| {
        let (x, y) = (i / n, i % n);
        x * n + (y + f.eval(x)) % n
    }))
}

/// Minimal oracle `Q_f = Σ_x |f(x)⟩⟨x|` of a permutation.
pub fn minimal_oracle(f: &FunctionTable) -> Result<CMatrix> {
    if !f.is_permutation() {
        return Err(Error::NotPermutation);
    }
    Ok(permutation_matrix(f.domain_size(), |x| f.eval(x)))
}

/// ‖U_f − (Q_f† ⊗ 1) U_ID (Q_f ⊗ 1)‖_max.
pub fn local_equivalence_deviation(f: &FunctionTable) -> Result<f64> {
    let q = minimal_oracle(f)?;
    let m = f.domain_size();
    let id = CMatrix::identity(m, m);
    let u_id = oracle_matrix(&FunctionTable::identity(m)?)?;
    let rhs = q.adjoint().kronecker(&id) * u_id * q.kronecker(&id);
    Ok((oracle_matrix(f)? - rhs).camax())
}

/// Checks `U_f = (Q_f† ⊗ 1) U_ID (Q_f ⊗ 1)` within 1e-10.
pub fn check_local_equivalence(f: &FunctionTable) -> Result<bool> {
    Ok(local_equivalence_deviation(f)? <= 1e-10)
}
