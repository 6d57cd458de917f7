use super::{build_partition, phase_exponential, FunctionTable};
use crate::error::Result;
use crate::quantum::{CMatrix, C64};

/// One term `coefficient · a_op ⊗ b_op` of an operator Schmidt decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub coefficient: f64,
    pub a_op: CMatrix,
    pub b_op: CMatrix,
}

/// Operator Schmidt decomposition of `U_f` built from its value partition:
/// `a_op_j = P_j / √K_j`, `b_op_j = e^{-i f_j Φ_N} / √N`, coefficient
/// `√(N K_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSchmidtForm {
    pub terms: Vec<SchmidtTerm>,
}

impl OracleSchmidtForm {
    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// `Σ_j c_j a_op_j ⊗ b_op_j`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut iter = self.terms.iter().map(|t| t.a_op.kronecker(&t.b_op) * C64::new(t.coefficient, 0.0));
        let first = iter.next().expect("at least one Schmidt term");
        iter.fold(first, |acc, m| acc + m)
    }

    /// Largest deviation of the Hilbert-Schmidt Gram matrices of the A-side
    /// and B-side operator sets from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let gram = |ops: Vec<&CMatrix>| {
            let mut dev: f64 = 0.0;
            for (i, x) in ops.iter().enumerate() {
                for (j, y) in ops.iter().enumerate() {
                    let ip = (x.adjoint() * *y).trace();
                    let target = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((ip - C64::new(target, 0.0)).norm());
                }
            }
            dev
        };
        gram(self.terms.iter().map(|t| &t.a_op).collect())
            .max(gram(self.terms.iter().map(|t| &t.b_op).collect()))
    }
}

pub fn schmidt_decompose_oracle(f: &FunctionTable) -> Result<OracleSchmidtForm> {
    let (m, n) = (f.domain_size(), f.codomain_size());
    let partition = build_partition(f);
    let terms = partition
        .classes
        .iter()
        .zip(&partition.values)
        .map(|(class, &value)| {
            let k = class.len() as f64;
            let mut proj = CMatrix::zeros(m, m);
            for &x in class {
                proj[(x, x)] = C64::new(1.0, 0.0);
            }
            let b = phase_exponential(n, value as f64)?;
            Ok(SchmidtTerm {
                coefficient: (n as f64 * k).sqrt(),
                a_op: proj / C64::new(k.sqrt(), 0.0),
                b_op: b / C64::new((n as f64).sqrt(), 0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleSchmidtForm { terms })
}
