//! Families `{sigma_a}` of permutations of a finite state space, one per state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{SpaceKind, StateSpace};

/// Where a family came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `sigma_a b = b`.
    Identity,
    /// `sigma_a b = a △ b` on simple graphs.
    Symdiff,
    /// `sigma_a b = complement(a △ b)` on simple graphs.
    Stability,
    /// `sigma_i j = j - i mod n`.
    Modular,
    /// `sigma_a b = complement(b)` on multigraphs.
    Complement,
    Custom,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" | "density" => Self::Identity,
            "symdiff" => Self::Symdiff,
            "stability" => Self::Stability,
            "modular" => Self::Modular,
            "complement" => Self::Complement,
            "custom" => Self::Custom,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown permutation family {other:?}"
                )))
            }
        })
    }
}

/// One permutation of `0..size` per state, stored as index arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationFamily {
    size: usize,
    kind: FamilyKind,
    sigma: Vec<u32>,
}

impl PermutationFamily {
    /// Validates every row as a bijection of `0..rows.len()`.
    pub fn custom(rows: Vec<Vec<usize>>) -> Result<Self> {
        let size = rows.len();
        let mut sigma = Vec::with_capacity(size * size);
        for row in &rows {
            if row.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            sigma.extend(row.iter().map(|&s| s as u32));
        }
        Self::from_flat(size, FamilyKind::Custom, sigma)
    }

    fn from_flat(size: usize, kind: FamilyKind, sigma: Vec<u32>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("empty permutation family".into()));
        }
        if size > u32::MAX as usize {
            return Err(Error::InvalidArgument("state space too large".into()));
        }
        let fam = Self { size, kind, sigma };
        if let Some(a) = (0..size).find(|&a| !is_bijection(fam.row(a))) {
            return Err(Error::InvalidArgument(format!(
                "sigma_{a} is not a bijection"
            )));
        }
        Ok(fam)
    }

    fn from_fn(space: &StateSpace, kind: FamilyKind, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let size = space.size();
        let mut sigma = Vec::with_capacity(size * size);
        for a in 0..size {
            sigma.extend((0..size).map(|b| f(a, b) as u32));
        }
        Self::from_flat(size, kind, sigma)
    }

    /// One of the named families on a compatible space.
    pub fn builtin(kind: FamilyKind, space: &StateSpace) -> Result<Self> {
        match (kind, space.kind()) {
            (FamilyKind::Identity, _) => Self::from_fn(space, kind, |_, b| b),
            (FamilyKind::Symdiff, SpaceKind::Multigraph { t: 1, .. }) => {
                // with base-2 encoding the symmetric difference is XOR of indices
                Self::from_fn(space, kind, |a, b| a ^ b)
            }
            (FamilyKind::Stability, SpaceKind::Multigraph { t: 1, .. }) => {
                let mask = space.size() - 1;
                Self::from_fn(space, kind, |a, b| !(a ^ b) & mask)
            }
            (FamilyKind::Modular, SpaceKind::Modular { n }) => {
                let n = *n;
                Self::from_fn(space, kind, |i, j| (j + n - i) % n)
            }
            (FamilyKind::Complement, SpaceKind::Multigraph { n, t }) => {
                let (n, t) = (*n, *t);
                Self::from_fn(space, kind, |_, b| {
                    crate::space::Multigraph::from_index(n, t, b)
                        .complement()
                        .index()
                })
            }
            (kind, space_kind) => Err(Error::InvalidArgument(format!(
                "family {kind:?} is not defined on {space_kind:?}"
            ))),
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut sigma = Vec::with_capacity(size * size);
        for _ in 0..size {
            sigma.extend(0..size as u32);
        }
        Self {
            size,
            kind: FamilyKind::Identity,
            sigma,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// `sigma_a` as an index array.
    pub fn row(&self, a: usize) -> &[u32] {
        &self.sigma[a * self.size..(a + 1) * self.size]
    }

    /// `sigma_a(b)`.
    pub fn apply(&self, a: usize, b: usize) -> usize {
        self.sigma[a * self.size + b] as usize
    }

    /// `sigma_a^{-1}` as an index array.
    pub fn inverse_row(&self, a: usize) -> Vec<u32> {
        let mut inv = vec![0u32; self.size];
        for (b, &s) in self.row(a).iter().enumerate() {
            inv[s as usize] = b as u32;
        }
        inv
    }

    /// `sigma_a^{-1}(c)` by search; prefer [`Self::inverse`] in loops.
    pub fn apply_inverse(&self, a: usize, c: usize) -> usize {
        self.row(a)
            .iter()
            .position(|&s| s as usize == c)
            .expect("rows are bijections")
    }

    /// The family `{sigma_a^{-1}}`.
    pub fn inverse(&self) -> Self {
        let mut sigma = Vec::with_capacity(self.sigma.len());
        for a in 0..self.size {
            sigma.extend(self.inverse_row(a));
        }
        let kind = match self.kind {
            // involutions
            FamilyKind::Identity | FamilyKind::Symdiff | FamilyKind::Complement => self.kind,
            _ => FamilyKind::Custom,
        };
        Self {
            size: self.size,
            kind,
            sigma,
        }
    }

    /// A pair `(a, b)` with `sigma_a(b) != sigma_b(a)`, if any.
    pub fn symmetry_violation(&self) -> Option<(usize, usize)> {
        (0..self.size)
            .flat_map(|a| (0..a).map(move |b| (a, b)))
            .find(|&(a, b)| self.apply(a, b) != self.apply(b, a))
    }

    /// Whether `sigma_a(b) = sigma_b(a)` for all states.
    pub fn is_symmetric(&self) -> bool {
        self.symmetry_violation().is_none()
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        (0..self.size)
            .map(|a| self.row(a).iter().map(|&s| s as usize).collect())
            .collect()
    }
}

fn is_bijection(row: &[u32]) -> bool {
    let mut seen = vec![false; row.len()];
    for &s in row {
        match seen.get_mut(s as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return false,
        }
    }
    true
}
