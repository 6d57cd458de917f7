use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A function `f: Z_M → Z_N` given as an explicit lookup table.
///
/// Serialized as `{"M": .., "N": .., "table": [..]}`. Deserialization is
/// strict: unknown keys and out-of-range entries are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct FunctionTable {
    m: usize,
    n: usize,
    table: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    table: Vec<usize>,
}

impl TryFrom<RawTable> for FunctionTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        FunctionTable::new(raw.m, raw.n, raw.table)
    }
}

impl From<FunctionTable> for RawTable {
    fn from(f: FunctionTable) -> Self {
        RawTable {
            m: f.m,
            n: f.n,
            table: f.table,
        }
    }
}

impl FunctionTable {
    pub fn new(m: usize, n: usize, table: Vec<usize>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidTable(format!(
                "M and N must be positive (got M={m}, N={n})"
            )));
        }
        if table.len() != m {
            return Err(Error::InvalidTable(format!(
                "table has {} entries, expected M={m}",
                table.len()
            )));
        }
        if let Some((x, v)) = table.iter().enumerate().find(|(_, &v)| v >= n) {
            return Err(Error::InvalidTable(format!(
                "f({x}) = {v} is outside Z_{n}"
            )));
        }
        Ok(FunctionTable { m, n, table })
    }

    /// Identity on `Z_m`.
    pub fn identity(m: usize) -> Result<Self> {
        Self::new(m, m, (0..m).collect())
    }

    /// Constant function `f ≡ c`.
    pub fn constant(m: usize, n: usize, c: usize) -> Result<Self> {
        Self::new(m, n, vec![c; m])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable =
            serde_json::from_str(text).map_err(|e| Error::InvalidTable(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function table serializes")
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn domain_size(&self) -> usize {
        self.m
    }

    pub fn codomain_size(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn eval(&self, x: usize) -> usize {
        self.table[x]
    }

    /// True when `M = N` and the table is a bijection.
    pub fn is_permutation(&self) -> bool {
        if self.m != self.n {
            return false;
        }
        let mut seen = vec![false; self.n];
        self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    /// Inverse table of a permutation.
    pub fn inverse(&self) -> Result<Vec<usize>> {
        if !self.is_permutation() {
            return Err(Error::NotPermutation);
        }
        let mut inv = vec![0; self.m];
        for (x, &v) in self.table.iter().enumerate() {
            inv[v] = x;
        }
        Ok(inv)
    }
}

/// The value partition of `Z_M` induced by `f`.
///
/// `values` is strictly ascending; `classes[j]` lists (ascending) every `x`
/// with `f(x) = values[j]`; `reps[j]` is the smallest element of that class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub n_f: usize,
    pub values: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub sizes: Vec<usize>,
    pub reps: Vec<usize>,
}

impl Partition {
    /// Index `j` with `values[j] = f(x)`.
    pub fn class_of(&self, value: usize) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    /// Class index of every domain element.
    pub fn class_index(&self, m: usize) -> Vec<usize> {
        let mut out = vec![0; m];
        for (j, class) in self.classes.iter().enumerate() {
            for &x in class {
                out[x] = j;
            }
        }
        out
    }

    pub fn log2_n_f(&self) -> f64 {
        (self.n_f as f64).log2()
    }
}

pub fn build_partition(f: &FunctionTable) -> Partition {
    let mut values: Vec<usize> = f.table.clone();
    values.sort_unstable();
    values.dedup();
    let mut classes = vec![Vec::new(); values.len()];
    for (x, v) in f.table.iter().enumerate() {
        let j = values.binary_search(v).expect("value present");
        classes[j].push(x);
    }
    let sizes = classes.iter().map(Vec::len).collect();
    let reps = classes.iter().map(|c| c[0]).collect();
    Partition {
        n_f: values.len(),
        values,
        classes,
        sizes,
        reps,
    }
}

/// Every function in `F_MN`, in lexicographic table order (`N^M` of them).
pub fn enumerate_functions(m: usize, n: usize) -> impl Iterator<Item = FunctionTable> {
    let count = n.checked_pow(m as u32).unwrap_or(0);
    (0..count).map(move |mut code| {
        let mut table = vec![0; m];
        for slot in table.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        FunctionTable::new(m, n, table).expect("enumerated tables are valid")
    })
}

/// Every permutation of `Z_m` as a function table, lexicographic order.
pub fn enumerate_permutations(m: usize) -> Vec<FunctionTable> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out.into_iter()
        .map(|t| FunctionTable::new(m, m, t).expect("permutation tables are valid"))
        .collect()
}
