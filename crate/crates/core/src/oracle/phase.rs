use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, CVector, C64};

/// Pegg-Barnett phase states `|φ_n⟩ = N^{-1/2} Σ_y e^{2πiny/N} |y⟩`.
pub fn phase_states(n: usize) -> Result<Vec<CVector>> {
    if n < 1 {
        return Err(Error::DimensionMismatch("phase space needs N >= 1".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    Ok((0..n)
        .map(|k| {
            CVector::from_fn(n, |y, _| {
                C64::from_polar(norm, 2.0 * PI * ((k * y) % n) as f64 / n as f64)
            })
        })
        .collect())
}

/// `Σ_n g(2πn/N) |φ_n⟩⟨φ_n|` for a spectral function `g`.
fn spectral(n: usize, g: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let states = phase_states(n)?;
    let mut out = CMatrix::zeros(n, n);
    for (k, v) in states.iter().enumerate() {
        let eigenvalue = 2.0 * PI * k as f64 / n as f64;
        out += v * v.adjoint() * g(eigenvalue);
    }
    Ok(out)
}

/// Hermitian phase operator `Φ_N = Σ_n (2πn/N) |φ_n⟩⟨φ_n|`.
pub fn phase_operator(n: usize) -> Result<CMatrix> {
    spectral(n, |theta| C64::new(theta, 0.0))
}

/// `e^{-i t Φ_N}`, formed from the eigendecomposition of `Φ_N`.
pub fn phase_exponential(n: usize, t: f64) -> Result<CMatrix> {
    spectral(n, |theta| C64::from_polar(1.0, -t * theta))
}
