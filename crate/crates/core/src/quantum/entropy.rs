use nalgebra::SymmetricEigen;

use super::{CMatrix, StateVector, EIGEN_ZERO};
use crate::error::{Error, Result};

/// Reduced density matrix on `keep` (kept subsystems stay in state order).
pub fn partial_trace(state: &StateVector, keep: &[&str]) -> Result<CMatrix> {
    let (kept, traced) = split(state, keep)?;
    let mut order: Vec<&str> = kept.clone();
    order.extend(traced.iter().copied());
    let ordered = state.reorder(&order)?;
    let rows: usize = kept
        .iter()
        .map(|l| state.subsystem(l).map(|s| s.dim))
        .product::<Result<usize>>()?;
    let cols = state.len() / rows;
    // Row-major amplitudes become a (kept × traced) coefficient matrix.
    let psi = CMatrix::from_row_slice(rows, cols, ordered.amps());
    Ok(&psi * psi.adjoint())
}

/// Base-2 von Neumann entropy of the reduced state on `cut`.
pub fn entanglement_entropy(state: &StateVector, cut: &[&str]) -> Result<f64> {
    let rho = partial_trace(state, cut)?;
    Ok(von_neumann_entropy(&rho))
}

/// −Σ λ log₂ λ over the eigenvalues of a Hermitian matrix, ignoring those
/// below 1e-14.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > EIGEN_ZERO)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Eigenvalues of a Hermitian matrix that exceed `cutoff`, sorted descending.
pub fn nonzero_spectrum(rho: &CMatrix, cutoff: f64) -> Vec<f64> {
    let eig = SymmetricEigen::new(rho.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().filter(|&l| l > cutoff).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn split<'a>(state: &'a StateVector, keep: &[&str]) -> Result<(Vec<&'a str>, Vec<&'a str>)> {
    for l in keep {
        state.position(l)?;
    }
    for (i, l) in keep.iter().enumerate() {
        if keep[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    let labels = state.labels();
    let (kept, traced): (Vec<&str>, Vec<&str>) =
        labels.into_iter().partition(|l| keep.contains(l));
    if kept.is_empty() || traced.is_empty() {
        return Err(Error::InvalidSelection(
            "keep set must be a nonempty proper subset of the subsystems".into(),
        ));
    }
    Ok((kept, traced))
}
