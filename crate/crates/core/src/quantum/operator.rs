use super::{CMatrix, StateVector, C64, UNITARY_TOL};
use crate::error::{Error, Result};

/// A matrix acting on one or more named subsystems of a [`StateVector`].
///
/// The matrix is indexed row-major over `targets` in the order given, so a
/// two-subsystem operator on `["B", "b"]` has rows `n * dim(b) + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    targets: Vec<String>,
    matrix: CMatrix,
    projector: bool,
}

impl LocalOperator {
    /// Unitary operator; rejected if ‖U†U − I‖_max > 1e-10.
    pub fn unitary<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        matrix: CMatrix,
    ) -> Result<Self> {
        let op = Self::build(targets, matrix, false)?;
        let dev = unitarity_deviation(&op.matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(op)
    }

    /// Orthogonal projector (P = P† = P²), exempt from the unitarity check.
    pub fn projector<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        matrix: CMatrix,
    ) -> Result<Self> {
        let op = Self::build(targets, matrix, true)?;
        let herm = (&op.matrix - op.matrix.adjoint()).camax();
        let idem = (&op.matrix * &op.matrix - &op.matrix).camax();
        if herm > UNITARY_TOL || idem > UNITARY_TOL {
            return Err(Error::InvalidSelection(format!(
                "not an orthogonal projector (hermiticity {herm:e}, idempotence {idem:e})"
            )));
        }
        Ok(op)
    }

    fn build<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        matrix: CMatrix,
        projector: bool,
    ) -> Result<Self> {
        let targets: Vec<String> = targets.into_iter().map(Into::into).collect();
        if targets.is_empty() {
            return Err(Error::InvalidSelection("operator needs a target".into()));
        }
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "operator matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(LocalOperator {
            targets,
            matrix,
            projector,
        })
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_projector(&self) -> bool {
        self.projector
    }
}

/// ‖U†U − I‖_max.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - CMatrix::identity(u.nrows(), u.ncols())).camax()
}

/// Applies `(I ⊗ … ⊗ U ⊗ … ⊗ I)` to `state` without forming the global
/// matrix. Projectors are rejected; use [`project`] for those.
pub fn apply_local(state: &StateVector, op: &LocalOperator) -> Result<StateVector> {
    if op.projector {
        return Err(Error::InvalidSelection(
            "apply_local needs a unitary; use project for projectors".into(),
        ));
    }
    let amps = apply_block(state, op)?;
    Ok(StateVector::from_raw(state.subsystems().to_vec(), amps))
}

/// Applies a projector and renormalizes. Returns the branch probability and,
/// when it is nonzero, the post-projection state.
pub fn project(state: &StateVector, op: &LocalOperator) -> Result<(f64, Option<StateVector>)> {
    let amps = apply_block(state, op)?;
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= 0.0 {
        return Ok((0.0, None));
    }
    let scale = 1.0 / p.sqrt();
    let amps = amps.into_iter().map(|a| a * scale).collect();
    Ok((p, Some(StateVector::from_raw(state.subsystems().to_vec(), amps))))
}

fn apply_block(state: &StateVector, op: &LocalOperator) -> Result<Vec<C64>> {
    let positions = op
        .targets
        .iter()
        .map(|l| state.position(l))
        .collect::<Result<Vec<_>>>()?;
    for (i, p) in positions.iter().enumerate() {
        if positions[..i].contains(p) {
            return Err(Error::DuplicateLabel(op.targets[i].clone()));
        }
    }
    let dims = state.dims();
    let block: usize = positions.iter().map(|&p| dims[p]).product();
    if op.matrix.nrows() != block {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {} on targets {:?} of total dimension {block}",
            op.matrix.nrows(),
            op.targets
        )));
    }
    let strides = state.strides();

    // Offsets of each block-local basis state relative to a base index whose
    // target digits are all zero.
    let mut offsets = vec![0usize; block];
    for (local, off) in offsets.iter_mut().enumerate() {
        let mut rem = local;
        for &p in positions.iter().rev() {
            *off += (rem % dims[p]) * strides[p];
            rem /= dims[p];
        }
    }

    let src = state.amps();
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    let mut gathered = vec![C64::new(0.0, 0.0); block];
    for base in 0..src.len() {
        let on_base = positions
            .iter()
            .all(|&p| (base / strides[p]).is_multiple_of(dims[p]));
        if !on_base {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = src[base + off];
        }
        for (row, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (col, g) in gathered.iter().enumerate() {
                acc += op.matrix[(row, col)] * g;
            }
            out[base + off] = acc;
        }
    }
    Ok(out)
}

/// Permutation matrix sending basis state `j` to `map(j)`.
pub fn permutation_matrix(dim: usize, map: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(map(j), j)] = C64::new(1.0, 0.0);
    }
    m
}

/// Diagonal matrix with the given entries.
pub fn diagonal(entries: impl IntoIterator<Item = C64>) -> CMatrix {
    let v: Vec<C64> = entries.into_iter().collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
