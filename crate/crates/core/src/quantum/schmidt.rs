use super::{operator::unitarity_deviation, CMatrix, RANK_RTOL, UNITARY_TOL};
use crate::error::{Error, Result};

/// Realigns a bipartite operator so that its ordinary singular values are its
/// operator Schmidt coefficients.
///
/// Entry `U[(a·dB + b), (a'·dB + b')]` moves to `R[(a·dA + a'), (b·dB + b')]`.
pub fn realign(u: &CMatrix, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let d = dim_a * dim_b;
    if !u.is_square() || u.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {d}x{d} for dims ({dim_a}, {dim_b})",
            u.nrows(),
            u.ncols()
        )));
    }
    let mut r = CMatrix::zeros(dim_a * dim_a, dim_b * dim_b);
    for a in 0..dim_a {
        for b in 0..dim_b {
            for ap in 0..dim_a {
                for bp in 0..dim_b {
                    r[(a * dim_a + ap, b * dim_b + bp)] = u[(a * dim_b + b, ap * dim_b + bp)];
                }
            }
        }
    }
    Ok(r)
}

/// Operator Schmidt coefficients of `u` on `H_A ⊗ H_B`, sorted descending.
pub fn operator_schmidt_coefficients(u: &CMatrix, dim_a: usize, dim_b: usize) -> Result<Vec<f64>> {
    let r = realign(u, dim_a, dim_b)?;
    let mut sv: Vec<f64> = r.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Number of operator Schmidt coefficients above `1e-10 · σ_max`.
pub fn operator_schmidt_rank(u: &CMatrix, dim_a: usize, dim_b: usize) -> Result<usize> {
    let sv = operator_schmidt_coefficients(u, dim_a, dim_b)?;
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let cutoff = RANK_RTOL * sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}
