use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CVector, StateVector, C64, NORM_TOL};
use crate::error::{Error, Result};

/// Deterministic generator used for every sampled measurement.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of a computational-basis measurement on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub subsystem: String,
    pub outcome: usize,
    pub probability: f64,
    /// Exact probability of every outcome, indexed by basis state.
    pub probabilities: Vec<f64>,
    pub post_state: StateVector,
}

/// Exact outcome distribution of a computational-basis measurement.
pub fn branch_probabilities(state: &StateVector, label: &str) -> Result<Vec<f64>> {
    let pos = state.position(label)?;
    let dim = state.subsystems()[pos].dim;
    let stride = state.strides()[pos];
    let mut probs = vec![0.0; dim];
    for (i, a) in state.amps().iter().enumerate() {
        probs[(i / stride) % dim] += a.norm_sqr();
    }
    Ok(probs)
}

/// Projects `label` onto `|outcome⟩` and renormalizes.
///
/// Returns the branch probability together with the post-measurement state.
/// A branch with zero weight is an error.
pub fn collapse(state: &StateVector, label: &str, outcome: usize) -> Result<(f64, StateVector)> {
    let pos = state.position(label)?;
    let dim = state.subsystems()[pos].dim;
    if outcome >= dim {
        return Err(Error::DimensionMismatch(format!(
            "outcome {outcome} outside dimension {dim} of `{label}`"
        )));
    }
    let stride = state.strides()[pos];
    let mut amps: Vec<C64> = state
        .amps()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if (i / stride) % dim == outcome {
                *a
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= 0.0 {
        return Err(Error::Internal(format!(
            "outcome {outcome} on `{label}` has zero probability"
        )));
    }
    let scale = 1.0 / p.sqrt();
    amps.iter_mut().for_each(|a| *a *= scale);
    Ok((p, StateVector::from_raw(state.subsystems().to_vec(), amps)))
}

/// Samples a computational-basis measurement using `rng`.
pub fn measure_with_rng<R: Rng + ?Sized>(
    state: &StateVector,
    label: &str,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probabilities = branch_probabilities(state, label)?;
    let total: f64 = probabilities.iter().sum();
    if total <= NORM_TOL {
        return Err(Error::Internal(format!(
            "all outcome probabilities on `{label}` vanish"
        )));
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut outcome = None;
    for (k, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        outcome = Some(k);
        if u < acc {
            break;
        }
    }
    // `outcome` is the last nonzero branch if rounding left u >= acc.
    let outcome = outcome.ok_or_else(|| Error::Internal("no outcome selected".into()))?;
    let (probability, post_state) = collapse(state, label, outcome)?;
    Ok(MeasurementRecord {
        subsystem: label.to_string(),
        outcome,
        probability,
        probabilities,
        post_state,
    })
}

/// Seeded computational-basis measurement.
pub fn measure_computational(
    state: &StateVector,
    label: &str,
    rng_seed: u64,
) -> Result<MeasurementRecord> {
    measure_with_rng(state, label, &mut seeded_rng(rng_seed))
}

/// Probabilities of projecting `label` onto each vector of an orthonormal
/// `family`, followed by the residual weight outside its span.
pub fn family_probabilities(
    state: &StateVector,
    label: &str,
    family: &[CVector],
) -> Result<(Vec<f64>, f64)> {
    let pos = state.position(label)?;
    let dim = state.subsystems()[pos].dim;
    if let Some(v) = family.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "family vector of length {} for `{label}` of dimension {dim}",
            v.len()
        )));
    }
    let stride = state.strides()[pos];
    let rest = state.len() / dim;
    let mut probs = Vec::with_capacity(family.len());
    for v in family {
        // ‖(⟨v| ⊗ I)|ψ⟩‖²: one amplitude per configuration of the other factors.
        let mut contracted = vec![C64::new(0.0, 0.0); rest];
        for (i, a) in state.amps().iter().enumerate() {
            let digit = (i / stride) % dim;
            let other = (i / (stride * dim)) * stride + i % stride;
            contracted[other] += v[digit].conj() * a;
        }
        probs.push(contracted.iter().map(|z| z.norm_sqr()).sum());
    }
    let residual = (state.norm_sqr() - probs.iter().sum::<f64>()).max(0.0);
    Ok((probs, residual))
}

/// ‖G − I‖_max for the Gram matrix of `family`.
pub fn gram_deviation(family: &[CVector]) -> f64 {
    let mut dev: f64 = 0.0;
    for (i, u) in family.iter().enumerate() {
        for (j, v) in family.iter().enumerate() {
            let g = u.dotc(v);
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g - C64::new(target, 0.0)).norm());
        }
    }
    dev
}
