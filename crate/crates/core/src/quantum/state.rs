use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{C64, NORM_TOL};
use crate::error::{Error, Result};

/// One of the two spatially separated parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => f.write_str("alice"),
            Party::Bob => f.write_str("bob"),
        }
    }
}

/// A labelled tensor factor of a [`StateVector`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub owner: Party,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize, owner: Party) -> Self {
        Subsystem {
            label: label.into(),
            dim,
            owner,
        }
    }
}

/// A normalized pure state over an ordered list of labelled subsystems.
///
/// Amplitudes are stored row-major: the leftmost subsystem is the most
/// significant digit of the flat basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    subsystems: Vec<Subsystem>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state and checks every invariant, including unit norm.
    pub fn new(subsystems: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let state = Self::from_parts(subsystems, amps)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Like [`StateVector::new`] but rescales the amplitudes to unit norm.
    pub fn normalized(subsystems: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::from_parts(subsystems, amps)?;
        let norm = state.norm_sqr();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm.sqrt();
        state.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(state)
    }

    /// Computational basis state `|index⟩` of a single subsystem.
    pub fn basis(label: impl Into<String>, dim: usize, owner: Party, index: usize) -> Result<Self> {
        let label = label.into();
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} outside dimension {dim} of `{label}`"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(vec![Subsystem::new(label, dim, owner)], amps)
    }

    /// Single-subsystem state from explicit amplitudes.
    pub fn single(label: impl Into<String>, owner: Party, amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        Self::new(vec![Subsystem::new(label, dim, owner)], amps)
    }

    pub(crate) fn from_parts(subsystems: Vec<Subsystem>, amps: Vec<C64>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &subsystems {
            if s.dim == 0 {
                return Err(Error::ZeroDimension(s.label.clone()));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        let total: usize = subsystems.iter().map(|s| s.dim).product();
        if amps.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {total}",
                amps.len()
            )));
        }
        Ok(StateVector { subsystems, amps })
    }

    /// Internal constructor for results of norm-preserving operations.
    pub(crate) fn from_raw(subsystems: Vec<Subsystem>, amps: Vec<C64>) -> Self {
        debug_assert_eq!(
            amps.len(),
            subsystems.iter().map(|s| s.dim).product::<usize>()
        );
        StateVector { subsystems, amps }
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn subsystem(&self, label: &str) -> Result<&Subsystem> {
        self.position(label).map(|i| &self.subsystems[i])
    }

    pub fn owner_of(&self, label: &str) -> Result<Party> {
        self.subsystem(label).map(|s| s.owner)
    }

    /// Row-major stride of each subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for i in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subsystems[i + 1].dim;
        }
        strides
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Labels owned by `party`, in subsystem order.
    pub fn owned_by(&self, party: Party) -> Vec<&str> {
        self.subsystems
            .iter()
            .filter(|s| s.owner == party)
            .map(|s| s.label.as_str())
            .collect()
    }

    /// ⟨self|other⟩; both states must share the same subsystem layout.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Largest elementwise amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_layout(&self, other: &StateVector) -> Result<()> {
        let same = self.subsystems.len() == other.subsystems.len()
            && self
                .subsystems
                .iter()
                .zip(&other.subsystems)
                .all(|(a, b)| a.label == b.label && a.dim == b.dim);
        if same {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "layouts differ: {:?} vs {:?}",
                self.labels(),
                other.labels()
            )))
        }
    }

    /// Same state with subsystems permuted into `order` (a permutation of the
    /// current labels).
    pub fn reorder(&self, order: &[&str]) -> Result<StateVector> {
        if order.len() != self.subsystems.len() {
            return Err(Error::InvalidSelection(format!(
                "reorder needs all {} labels, got {}",
                self.subsystems.len(),
                order.len()
            )));
        }
        let positions = order
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        let unique: HashSet<_> = positions.iter().collect();
        if unique.len() != positions.len() {
            return Err(Error::InvalidSelection("reorder labels repeat".into()));
        }
        let old_strides = self.strides();
        let subsystems: Vec<Subsystem> =
            positions.iter().map(|&p| self.subsystems[p].clone()).collect();
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        let new_dims: Vec<usize> = subsystems.iter().map(|s| s.dim).collect();
        for (new_index, amp) in amps.iter_mut().enumerate() {
            let mut rem = new_index;
            let mut old_index = 0;
            for k in (0..new_dims.len()).rev() {
                let digit = rem % new_dims[k];
                rem /= new_dims[k];
                old_index += digit * old_strides[positions[k]];
            }
            *amp = self.amps[old_index];
        }
        Ok(StateVector::from_raw(subsystems, amps))
    }

    /// Drops subsystem `label`, which must be (up to 1e-10) in basis state
    /// `index`; the remaining factor is returned.
    pub fn remove_basis_factor(&self, label: &str, index: usize) -> Result<StateVector> {
        let pos = self.position(label)?;
        let dim = self.subsystems[pos].dim;
        if index >= dim {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} outside dimension {dim} of `{label}`"
            )));
        }
        let strides = self.strides();
        let stride = strides[pos];
        let mut subsystems = self.subsystems.clone();
        subsystems.remove(pos);
        let mut amps = Vec::with_capacity(self.amps.len() / dim);
        for (i, a) in self.amps.iter().enumerate() {
            if (i / stride) % dim == index {
                amps.push(*a);
            }
        }
        let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (kept - self.norm_sqr()).abs() > 1e-10 {
            return Err(Error::InvalidSelection(format!(
                "`{label}` is not in basis state {index} (weight {kept})"
            )));
        }
        Ok(StateVector::from_raw(subsystems, amps))
    }

    /// Decomposes a flat index into per-subsystem digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.subsystems.len()];
        for k in (0..self.subsystems.len()).rev() {
            let d = self.subsystems[k].dim;
            out[k] = index % d;
            index /= d;
        }
        out
    }
}

/// Kronecker product of `parts` in the given order.
pub fn tensor(parts: &[StateVector]) -> Result<StateVector> {
    let mut subsystems = Vec::new();
    let mut amps = vec![C64::new(1.0, 0.0)];
    for part in parts {
        subsystems.extend(part.subsystems.iter().cloned());
        let mut next = Vec::with_capacity(amps.len() * part.amps.len());
        for a in &amps {
            for b in &part.amps {
                next.push(a * b);
            }
        }
        amps = next;
    }
    StateVector::from_parts(subsystems, amps)
}
