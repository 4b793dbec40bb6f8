//! Finite state spaces and multigraphs.
//!
//! Dyads are unordered vertex pairs `{u, v}` with `v < u`, ordered
//! lexicographically by `(u, v)`: `(1,0), (2,0), (2,1), (3,0), ...` (vertices
//! are zero-based internally; the JSON forms are one-based). A multigraph in
//! `G(n, t)` assigns every dyad a multiplicity in `0..=t` and is encoded as a
//! base-`(t+1)` integer whose least significant digit is dyad 0.

use std::fmt;

use crate::error::{Error, Result};

/// Largest space that brute-force routines will enumerate by default.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Number of dyads on `n` vertices.
pub fn dyad_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of dyad `{u, v}` in canonical order. Panics if `u == v`.
pub fn dyad_index(u: usize, v: usize) -> usize {
    assert_ne!(u, v, "a dyad needs two distinct vertices");
    let (hi, lo) = if u > v { (u, v) } else { (v, u) };
    hi * (hi - 1) / 2 + lo
}

/// Endpoints `(u, v)` with `v < u` of the dyad at position `f`.
pub fn dyad_endpoints(f: usize) -> (usize, usize) {
    // largest u with u(u-1)/2 <= f
    let mut u = ((1.0 + (1.0 + 8.0 * f as f64).sqrt()) / 2.0) as usize;
    while u * (u - 1) / 2 > f {
        u -= 1;
    }
    while (u + 1) * u / 2 <= f {
        u += 1;
    }
    (u, f - u * (u - 1) / 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Multigraph { n: usize, t: u32 },
    Modular { n: usize },
    Generic { labels: Vec<String> },
}

/// A finite state space with a bijection onto `0..size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    kind: SpaceKind,
    size: usize,
}

impl StateSpace {
    /// `G(n, t)` with the default enumeration cap.
    pub fn multigraph(n: usize, t: u32) -> Result<Self> {
        Self::multigraph_with_cap(n, t, DEFAULT_ENUMERATION_CAP)
    }

    pub fn multigraph_with_cap(n: usize, t: u32, cap: u128) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "multigraph space needs n >= 2, got {n}"
            )));
        }
        if t < 1 {
            return Err(Error::InvalidArgument(
                "multigraph space needs t >= 1".into(),
            ));
        }
        let size = multigraph_space_size(n, t).ok_or(Error::SpaceTooLarge {
            size: u128::MAX,
            cap,
        })?;
        if size > cap {
            return Err(Error::SpaceTooLarge { size, cap });
        }
        Ok(Self {
            kind: SpaceKind::Multigraph { n, t },
            size: size as usize,
        })
    }

    /// Residues `0..n`.
    pub fn modular(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("modular space needs n >= 1".into()));
        }
        Ok(Self {
            kind: SpaceKind::Modular { n },
            size: n,
        })
    }

    pub fn generic(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument(
                "generic space needs at least one label".into(),
            ));
        }
        let size = labels.len();
        Ok(Self {
            kind: SpaceKind::Generic { labels },
            size,
        })
    }

    /// An unlabeled space of the given size.
    pub fn indexed(size: usize) -> Result<Self> {
        Self::generic((0..size).map(|i| i.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// `(n, t)` when this is a multigraph space.
    pub fn multigraph_shape(&self) -> Option<(usize, u32)> {
        match self.kind {
            SpaceKind::Multigraph { n, t } => Some((n, t)),
            _ => None,
        }
    }

    pub fn require_multigraph(&self) -> Result<(usize, u32)> {
        self.multigraph_shape().ok_or_else(|| {
            Error::InvalidArgument("operation needs a multigraph space".into())
        })
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.size
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if self.contains(index) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "state {index} outside space of size {}",
                self.size
            )))
        }
    }

    /// Multigraph stored at `index`.
    pub fn decode(&self, index: usize) -> Result<Multigraph> {
        let (n, t) = self.require_multigraph()?;
        self.check_index(index)?;
        Ok(Multigraph::from_index(n, t, index))
    }

    pub fn encode(&self, g: &Multigraph) -> Result<usize> {
        let (n, t) = self.require_multigraph()?;
        if g.n() != n || g.t() != t {
            return Err(Error::InvalidArgument(format!(
                "graph in G({}, {}) does not belong to G({n}, {t})",
                g.n(),
                g.t()
            )));
        }
        Ok(g.index())
    }

    pub fn label(&self, index: usize) -> String {
        match &self.kind {
            SpaceKind::Generic { labels } => labels[index].clone(),
            SpaceKind::Modular { .. } => index.to_string(),
            SpaceKind::Multigraph { n, t } => {
                Multigraph::from_index(*n, *t, index).to_string()
            }
        }
    }

    /// All multigraphs in index order.
    pub fn multigraphs(&self) -> Result<impl Iterator<Item = Multigraph> + '_> {
        let (n, t) = self.require_multigraph()?;
        Ok((0..self.size).map(move |i| Multigraph::from_index(n, t, i)))
    }
}

fn multigraph_space_size(n: usize, t: u32) -> Option<u128> {
    let dyads = u32::try_from(dyad_count(n)).ok()?;
    (u128::from(t) + 1).checked_pow(dyads)
}

/// A multigraph on `n` vertices with multiplicities bounded by `t`.
/// Simple graphs are the `t = 1` case.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multigraph {
    n: usize,
    t: u32,
    m: Vec<u32>,
}

impl Multigraph {
    pub fn new(n: usize, t: u32, multiplicities: Vec<u32>) -> Result<Self> {
        if n < 2 || t < 1 {
            return Err(Error::InvalidArgument(format!(
                "multigraph needs n >= 2 and t >= 1, got n={n}, t={t}"
            )));
        }
        if multiplicities.len() != dyad_count(n) {
            return Err(Error::DimensionMismatch {
                expected: dyad_count(n),
                found: multiplicities.len(),
            });
        }
        if let Some((f, &m)) = multiplicities.iter().enumerate().find(|(_, &m)| m > t) {
            return Err(Error::InvalidArgument(format!(
                "dyad {f} has multiplicity {m} > t = {t}"
            )));
        }
        Ok(Self {
            n,
            t,
            m: multiplicities,
        })
    }

    pub fn empty(n: usize, t: u32) -> Self {
        Self {
            n,
            t,
            m: vec![0; dyad_count(n)],
        }
    }

    /// Every dyad at full multiplicity `t`.
    pub fn complete(n: usize, t: u32) -> Self {
        Self {
            n,
            t,
            m: vec![t; dyad_count(n)],
        }
    }

    /// Builds a multigraph from zero-based `(u, v, multiplicity)` triples.
    pub fn from_edges(n: usize, t: u32, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut g = Self::new(n, t, vec![0; dyad_count(n)])?;
        for &(u, v, m) in edges {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "bad dyad ({u}, {v}) on {n} vertices"
                )));
            }
            if m > t {
                return Err(Error::InvalidArgument(format!(
                    "multiplicity {m} exceeds t = {t}"
                )));
            }
            g.m[dyad_index(u, v)] = m;
        }
        Ok(g)
    }

    /// Simple graph with the listed zero-based edges.
    pub fn simple(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let triples: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        Self::from_edges(n, 1, &triples)
    }

    pub(crate) fn from_index(n: usize, t: u32, mut index: usize) -> Self {
        let base = t as usize + 1;
        let m = (0..dyad_count(n))
            .map(|_| {
                let d = (index % base) as u32;
                index /= base;
                d
            })
            .collect();
        Self { n, t, m }
    }

    pub fn index(&self) -> usize {
        let base = self.t as usize + 1;
        self.m
            .iter()
            .rev()
            .fold(0usize, |acc, &d| acc * base + d as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.m
    }

    pub fn get(&self, u: usize, v: usize) -> u32 {
        if u == v {
            0
        } else {
            self.m[dyad_index(u, v)]
        }
    }

    /// Total multiplicity; the edge count for simple graphs.
    pub fn edge_count(&self) -> u64 {
        self.m.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            t: self.t,
            m: self.m.iter().map(|&d| self.t - d).collect(),
        }
    }

    /// Symmetric difference of two simple graphs.
    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        if self.t != 1 || other.t != 1 || self.n != other.n {
            return Err(Error::InvalidArgument(
                "symmetric difference needs two simple graphs on the same vertices".into(),
            ));
        }
        Ok(Self {
            n: self.n,
            t: 1,
            m: self.m.iter().zip(&other.m).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// The multigraph with `b(phi(i) phi(j)) = self(i j)`.
    pub fn relabel(&self, phi: &[usize]) -> Self {
        let mut m = vec![0; self.m.len()];
        for (f, &d) in self.m.iter().enumerate() {
            let (u, v) = dyad_endpoints(f);
            m[dyad_index(phi[u], phi[v])] = d;
        }
        Self {
            n: self.n,
            t: self.t,
            m,
        }
    }

    /// Same multiplicities viewed in a larger multiplicity bound.
    pub fn with_bound(&self, t: u32) -> Result<Self> {
        Self::new(self.n, t, self.m.clone())
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (idx, &d) in self.m.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let (u, v) = dyad_endpoints(idx);
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            if self.t == 1 {
                write!(f, "{}-{}", v + 1, u + 1)?;
            } else {
                write!(f, "{}-{}x{}", v + 1, u + 1, d)?;
            }
        }
        write!(f, "}}")
    }
}
