//! Network statistics, dyadic factorizations, isomorphism classes and
//! finite exchangeability.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Pmf, StochasticMatrix};
use crate::perm::PermutationFamily;
use crate::rng::CounterRng;
use crate::space::{dyad_count, Multigraph, StateSpace};

/// Spaces up to this size are verified exhaustively.
pub const EXHAUSTIVE_VERIFY_CAP: usize = 1 << 16;

/// Random probes used above [`EXHAUSTIVE_VERIFY_CAP`].
pub const PROBE_BUDGET: usize = 1000;

/// Largest vertex count for brute-force isomorphism.
pub const MAX_ISO_VERTICES: usize = 8;

const EXCHANGEABLE_TOL: f64 = 1e-12;

fn require_simple(g: &Multigraph) -> Result<()> {
    if g.t() != 1 {
        return Err(Error::InvalidArgument(format!(
            "statistic needs a simple graph, got t = {}",
            g.t()
        )));
    }
    Ok(())
}

fn require_same_n(a: &Multigraph, b: &Multigraph) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    Ok(())
}

/// `|E(b)| / (n - 1)`.
pub fn stat_density(_a: &Multigraph, b: &Multigraph) -> Result<f64> {
    require_simple(b)?;
    Ok(b.edge_count() as f64 / (b.n() as f64 - 1.0))
}

/// `|E(complement(a △ b))| / (n - 1)`: the number of dyads on which `a` and
/// `b` agree, scaled.
pub fn stat_stability(a: &Multigraph, b: &Multigraph) -> Result<f64> {
    require_simple(a)?;
    require_simple(b)?;
    require_same_n(a, b)?;
    let agree = a
        .multiplicities()
        .iter()
        .zip(b.multiplicities())
        .filter(|(x, y)| x == y)
        .count();
    Ok(agree as f64 / (a.n() as f64 - 1.0))
}

/// Degree of every vertex, counting multiplicity.
pub fn degree_sequence(g: &Multigraph) -> Vec<u64> {
    let n = g.n();
    let mut deg = vec![0u64; n];
    for u in 0..n {
        for v in 0..u {
            let m = u64::from(g.get(u, v));
            deg[u] += m;
            deg[v] += m;
        }
    }
    deg
}

/// Degrees in nonincreasing order.
pub fn sorted_degree_sequence(g: &Multigraph) -> Vec<u64> {
    let mut d = degree_sequence(g);
    d.sort_unstable_by(|x, y| y.cmp(x));
    d
}

/// A directed graph on `n` vertices as a flat `n x n` adjacency vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Digraph {
    n: usize,
    adj: Vec<bool>,
}

impl Digraph {
    pub fn new(n: usize, adj: Vec<bool>) -> Result<Self> {
        if adj.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: adj.len(),
            });
        }
        Ok(Self { n, adj })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
        }
    }

    /// Zero-based arcs `i -> j`.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in arcs {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "arc ({i}, {j}) out of range for {n} vertices"
                )));
            }
            g.adj[i * n + j] = true;
        }
        Ok(g)
    }

    /// Loopless digraph from its index among the `2^(n(n-1))` loopless
    /// digraphs; bit `k` is the `k`-th off-diagonal arc in row-major order.
    pub fn loopless_from_index(n: usize, index: usize) -> Self {
        let mut g = Self::empty(n);
        let mut k = 0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.adj[i * n + j] = index >> k & 1 == 1;
                    k += 1;
                }
            }
        }
        g
    }

    /// Inverse of [`Self::loopless_from_index`]; loops are ignored.
    pub fn loopless_index(&self) -> usize {
        let mut index = 0;
        let mut k = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    if self.has_arc(i, j) {
                        index |= 1 << k;
                    }
                    k += 1;
                }
            }
        }
        index
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().filter(|&&x| x).count()
    }

    pub fn adjacency(&self) -> &[bool] {
        &self.adj
    }
}

/// `n [Σ a(i,j)]^{-1} Σ b(j,i) a(i,j)`, with `0/0 = 0`.
pub fn stat_reciprocity(a: &Digraph, b: &Digraph) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: b.n,
        });
    }
    let n = a.n;
    let mut arcs = 0usize;
    let mut returned = 0usize;
    for i in 0..n {
        for j in 0..n {
            if a.has_arc(i, j) {
                arcs += 1;
                if b.has_arc(j, i) {
                    returned += 1;
                }
            }
        }
    }
    Ok(ratio(n, returned, arcs))
}

fn ratio(n: usize, num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        n as f64 * num as f64 / den as f64
    }
}

/// `n [Σ a(ij) a(jk)]^{-1} Σ b(ik) a(ij) a(jk)` over `i < j < k`, with
/// `0/0 = 0`.
pub fn stat_transitivity(a: &Multigraph, b: &Multigraph) -> Result<f64> {
    require_simple(a)?;
    require_simple(b)?;
    require_same_n(a, b)?;
    let n = a.n();
    let mut paths = 0usize;
    let mut closed = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if a.get(i, j) == 0 {
                continue;
            }
            for k in j + 1..n {
                if a.get(j, k) == 1 {
                    paths += 1;
                    if b.get(i, k) == 1 {
                        closed += 1;
                    }
                }
            }
        }
    }
    Ok(ratio(n, closed, paths))
}

/// Per-dyad pieces `tau_f`, `kappa_f` of a dyadic factorization of `G(n, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicFactorization {
    pub n: usize,
    pub t: u32,
    /// `tau_f[f][m]`; empty inner vectors when only the carrier was factored.
    pub tau_f: Vec<Vec<Vec<f64>>>,
    /// `kappa_f[f][m]`; all ones when only the statistic was factored.
    pub kappa_f: Vec<Vec<f64>>,
}

impl DyadicFactorization {
    pub fn dyads(&self) -> usize {
        dyad_count(self.n)
    }

    pub fn dim(&self) -> usize {
        self.tau_f
            .first()
            .and_then(|f| f.first())
            .map_or(0, Vec::len)
    }

    /// `Σ_f tau_f[g(f)]`.
    pub fn tau(&self, g: &Multigraph) -> Vec<f64> {
        let mut s = vec![0.0; self.dim()];
        for (f, &m) in g.multiplicities().iter().enumerate() {
            for (sk, v) in s.iter_mut().zip(&self.tau_f[f][m as usize]) {
                *sk += v;
            }
        }
        s
    }

    /// `Π_f kappa_f[g(f)]`.
    pub fn kappa(&self, g: &Multigraph) -> f64 {
        g.multiplicities()
            .iter()
            .enumerate()
            .map(|(f, &m)| self.kappa_f[f][m as usize])
            .product()
    }

    /// Statistic pieces of `self` with carrier pieces of `other`.
    pub fn with_carrier(mut self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.t != other.t {
            return Err(Error::InvalidArgument("factorizations of different spaces".into()));
        }
        self.kappa_f = other.kappa_f.clone();
        Ok(self)
    }
}

/// Result of a factorization attempt.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorOutcome {
    Factored(DyadicFactorization),
    /// A graph on which the candidate built from single-dyad graphs fails.
    NotFactorable { witness: Multigraph },
}

impl FactorOutcome {
    pub fn factorization(&self) -> Option<&DyadicFactorization> {
        match self {
            Self::Factored(f) => Some(f),
            Self::NotFactorable { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&Multigraph> {
        match self {
            Self::Factored(_) => None,
            Self::NotFactorable { witness } => Some(witness),
        }
    }
}

/// Graphs used to verify a candidate: the whole space when it has at most
/// [`EXHAUSTIVE_VERIFY_CAP`] states, otherwise [`PROBE_BUDGET`] uniform draws.
fn verification_set(n: usize, t: u32, seed: u64) -> Result<Vec<Multigraph>> {
    let space = StateSpace::multigraph_with_cap(n, t, u128::MAX);
    match space {
        Ok(space) if space.size() <= EXHAUSTIVE_VERIFY_CAP => Ok(space.multigraphs()?.collect()),
        _ => {
            let rng = CounterRng::new(seed);
            let dyads = dyad_count(n);
            (0..PROBE_BUDGET as u64)
                .map(|r| {
                    let m = (0..dyads as u64)
                        .map(|f| ((rng.uniform_at(r, f) * f64::from(t + 1)) as u32).min(t))
                        .collect();
                    Multigraph::new(n, t, m)
                })
                .collect()
        }
    }
}

fn unit_graph(n: usize, t: u32, f: usize, m: u32) -> Multigraph {
    let mut mult = vec![0; dyad_count(n)];
    mult[f] = m;
    Multigraph::new(n, t, mult).expect("valid multiplicity")
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-10 * y.abs().max(1.0)
}

/// Seeks `tau_f` with `tau(g) = Σ_f tau_f(g(f))` on `G(n, t)`, in the
/// canonical split `tau_f(0) = tau(0)/N`, `tau_f(m) = tau(m e_f) - tau(0) +
/// tau(0)/N`.
pub fn factor_dyadditive(
    n: usize,
    t: u32,
    tau: impl Fn(&Multigraph) -> Vec<f64>,
) -> Result<FactorOutcome> {
    let dyads = dyad_count(n);
    if dyads == 0 {
        return Err(Error::InvalidArgument("need at least two vertices".into()));
    }
    let zero = tau(&Multigraph::empty(n, t));
    let share: Vec<f64> = zero.iter().map(|z| z / dyads as f64).collect();
    let tau_f: Vec<Vec<Vec<f64>>> = (0..dyads)
        .map(|f| {
            (0..=t)
                .map(|m| {
                    if m == 0 {
                        share.clone()
                    } else {
                        let v = tau(&unit_graph(n, t, f, m));
                        if v.len() != zero.len() {
                            return Vec::new();
                        }
                        v.iter()
                            .zip(&zero)
                            .zip(&share)
                            .map(|((v, z), s)| v - z + s)
                            .collect()
                    }
                })
                .collect()
        })
        .collect();
    if tau_f.iter().flatten().any(|v| v.len() != zero.len()) {
        return Err(Error::InvalidArgument("statistic changes dimension".into()));
    }
    let fact = DyadicFactorization {
        n,
        t,
        tau_f,
        kappa_f: vec![vec![1.0; t as usize + 1]; dyads],
    };
    for g in verification_set(n, t, 0x7a7)? {
        let want = tau(&g);
        let got = fact.tau(&g);
        if want.len() != got.len() || want.iter().zip(&got).any(|(w, g)| !close(*g, *w)) {
            return Ok(FactorOutcome::NotFactorable { witness: g });
        }
    }
    Ok(FactorOutcome::Factored(fact))
}

/// Seeks `kappa_f >= 0` with `kappa(g) = Π_f kappa_f(g(f))` on `G(n, t)`.
///
/// The candidate is read off single-dyad changes of a base graph `g*` with
/// `kappa(g*) > 0` (the empty graph when possible):
/// `kappa_f(m) = kappa(g* with f set to m) / kappa(g*) * kappa(g*)^(1/N)`.
pub fn factor_dyadically_multiplicative(
    n: usize,
    t: u32,
    kappa: impl Fn(&Multigraph) -> f64,
) -> Result<FactorOutcome> {
    let dyads = dyad_count(n);
    if dyads == 0 {
        return Err(Error::InvalidArgument("need at least two vertices".into()));
    }
    let probes = verification_set(n, t, 0xca4)?;
    let empty = Multigraph::empty(n, t);
    let base = if kappa(&empty) > 0.0 {
        empty
    } else if let Some(g) = probes.iter().find(|g| kappa(g) > 0.0) {
        g.clone()
    } else {
        // kappa vanishes on every probe: the zero table reproduces it there
        return Ok(FactorOutcome::Factored(DyadicFactorization {
            n,
            t,
            tau_f: vec![vec![Vec::new(); t as usize + 1]; dyads],
            kappa_f: vec![vec![0.0; t as usize + 1]; dyads],
        }));
    };
    let k0 = kappa(&base);
    let root = k0.powf(1.0 / dyads as f64);
    let kappa_f = (0..dyads)
        .map(|f| {
            (0..=t)
                .map(|m| {
                    let mut mult = base.multiplicities().to_vec();
                    mult[f] = m;
                    let g = Multigraph::new(n, t, mult).expect("valid multiplicity");
                    kappa(&g) / k0 * root
                })
                .collect()
        })
        .collect();
    let fact = DyadicFactorization {
        n,
        t,
        tau_f: vec![vec![Vec::new(); t as usize + 1]; dyads],
        kappa_f,
    };
    for g in probes {
        if !close(fact.kappa(&g), kappa(&g)) {
            return Ok(FactorOutcome::NotFactorable { witness: g });
        }
    }
    Ok(FactorOutcome::Factored(fact))
}

/// Dyadwise sum of multigraphs on a common vertex set; the bound of the
/// result is the sum of the bounds.
pub fn multigraph_union(zs: &[Multigraph]) -> Result<Multigraph> {
    let first = zs
        .first()
        .ok_or_else(|| Error::InvalidArgument("union of no multigraphs".into()))?;
    let n = first.n();
    if let Some(z) = zs.iter().find(|z| z.n() != n) {
        return Err(Error::InvalidArgument(format!(
            "union of graphs on {n} and {} vertices",
            z.n()
        )));
    }
    let mut m = vec![0u32; dyad_count(n)];
    for z in zs {
        for (w, &x) in m.iter_mut().zip(z.multiplicities()) {
            *w += x;
        }
    }
    Multigraph::new(n, zs.iter().map(Multigraph::t).sum(), m)
}

/// Whether a vertex bijection maps `b` onto `c`.
pub fn are_isomorphic(b: &Multigraph, c: &Multigraph) -> Result<bool> {
    if b.n() != c.n() || b.t() != c.t() {
        return Ok(false);
    }
    if b.n() > MAX_ISO_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "isomorphism search limited to {MAX_ISO_VERTICES} vertices"
        )));
    }
    if sorted_degree_sequence(b) != sorted_degree_sequence(c) {
        return Ok(false);
    }
    Ok((0..b.n())
        .permutations(b.n())
        .any(|phi| b.relabel(&phi) == *c))
}

/// Isomorphism classes of a multigraph space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoClasses {
    class_of: Vec<usize>,
    /// Members of each class in increasing index order; the first member is
    /// the class's representative.
    classes: Vec<Vec<usize>>,
}

impl IsoClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn space_size(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, index: usize) -> usize {
        self.class_of[index]
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.classes[class]
    }

    pub fn representative(&self, class: usize) -> usize {
        self.classes[class][0]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn same_class(&self, b: usize, c: usize) -> bool {
        self.class_of[b] == self.class_of[c]
    }

    /// The partition of a single-state space.
    pub fn trivial(size: usize) -> Self {
        Self {
            class_of: (0..size).collect(),
            classes: (0..size).map(|i| vec![i]).collect(),
        }
    }
}

/// Orbits of the vertex relabelings acting on `space`.
pub fn iso_classes(space: &StateSpace) -> Result<IsoClasses> {
    let (n, _) = space.require_multigraph()?;
    if n > MAX_ISO_VERTICES {
        return Err(Error::InvalidArgument(format!(
            "isomorphism classes limited to {MAX_ISO_VERTICES} vertices, got {n}"
        )));
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut class_of = vec![usize::MAX; space.size()];
    let mut classes = Vec::new();
    for i in 0..space.size() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let g = space.decode(i)?;
        let mut members: Vec<usize> = perms.iter().map(|phi| g.relabel(phi).index()).collect();
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            class_of[m] = classes.len();
        }
        classes.push(members);
    }
    Ok(IsoClasses { class_of, classes })
}

/// Whether `h` is constant on every class, with a violating pair if not.
/// Integer-valued inputs are compared exactly, others to `1e-12`.
pub fn exchangeability_witness(h: &[f64], classes: &IsoClasses) -> Result<Option<(usize, usize)>> {
    if h.len() != classes.space_size() {
        return Err(Error::DimensionMismatch {
            expected: classes.space_size(),
            found: h.len(),
        });
    }
    let integral = h.iter().all(|x| x.fract() == 0.0);
    let tol = if integral { 0.0 } else { EXCHANGEABLE_TOL };
    for members in &classes.classes {
        let r = members[0];
        if let Some(&c) = members.iter().find(|&&c| !((h[c] - h[r]).abs() <= tol)) {
            return Ok(Some((r, c)));
        }
    }
    Ok(None)
}

pub fn is_finitely_exchangeable(h: &[f64], classes: &IsoClasses) -> Result<bool> {
    Ok(exchangeability_witness(h, classes)?.is_none())
}

/// Whether every `sigma_a` maps each class into a single class.
pub fn is_relation_invariant(family: &PermutationFamily, classes: &IsoClasses) -> Result<bool> {
    Ok(relation_invariance_witness(family, classes)?.is_none())
}

/// `(a, b, c)` with `b ~ c` but `sigma_a b` and `sigma_a c` in different classes.
pub fn relation_invariance_witness(
    family: &PermutationFamily,
    classes: &IsoClasses,
) -> Result<Option<(usize, usize, usize)>> {
    if family.size() != classes.space_size() {
        return Err(Error::DimensionMismatch {
            expected: classes.space_size(),
            found: family.size(),
        });
    }
    for a in 0..family.size() {
        let row = family.row(a);
        for members in &classes.classes {
            let r = members[0];
            let target = classes.class_of[row[r] as usize];
            if let Some(&c) = members
                .iter()
                .find(|&&c| classes.class_of[row[c] as usize] != target)
            {
                return Ok(Some((a, r, c)));
            }
        }
    }
    Ok(None)
}

/// Exchangeability of the common row and of every transition row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExchangeabilityReport {
    pub mu_exchangeable: bool,
    pub rows_exchangeable: Vec<bool>,
}

impl ExchangeabilityReport {
    pub fn all_rows(&self) -> bool {
        self.rows_exchangeable.iter().all(|&b| b)
    }

    pub fn some_row(&self) -> bool {
        self.rows_exchangeable.iter().any(|&b| b)
    }
}

/// For a p-uniform chain whose family respects isomorphism, the common row
/// is exchangeable iff every row is, iff some row is. Refuses inputs where
/// the family does not respect the classes or `P` is not built from `mu`.
pub fn exchangeability_transfer(
    p: &StochasticMatrix,
    family: &PermutationFamily,
    mu: &Pmf,
    classes: &IsoClasses,
) -> Result<ExchangeabilityReport> {
    let size = p.size();
    if family.size() != size || mu.len() != size || classes.space_size() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: family.size().min(mu.len()).min(classes.space_size()),
        });
    }
    for a in 0..size {
        for b in 0..size {
            if (p.get(a, b) - mu[family.apply(a, b)]).abs() > 1e-10 {
                return Err(Error::Precondition(format!(
                    "P({a}, {b}) differs from mu(sigma_{a} {b})"
                )));
            }
        }
    }
    if let Some((a, b, c)) = relation_invariance_witness(family, classes)? {
        return Err(Error::Precondition(format!(
            "sigma_{a} separates isomorphic states {b} and {c}"
        )));
    }
    let mu_exchangeable = is_finitely_exchangeable(mu.as_slice(), classes)?;
    let rows_exchangeable = p
        .rows()
        .map(|row| is_finitely_exchangeable(row, classes))
        .collect::<Result<Vec<_>>>()?;
    let report = ExchangeabilityReport {
        mu_exchangeable,
        rows_exchangeable,
    };
    if report.mu_exchangeable != report.all_rows() || report.all_rows() != report.some_row() {
        return Err(Error::InvariantViolated(format!(
            "mu exchangeable: {}, all rows: {}, some row: {}",
            report.mu_exchangeable,
            report.all_rows(),
            report.some_row()
        )));
    }
    Ok(report)
}

/// Class sizes keyed by sorted degree sequence; handy for summaries.
pub fn class_degree_profile(space: &StateSpace, classes: &IsoClasses) -> Result<BTreeMap<Vec<u64>, Vec<usize>>> {
    let mut out: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for members in classes.classes() {
        let g = space.decode(members[0])?;
        out.entry(sorted_degree_sequence(&g)).or_default().push(members.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3(edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::simple(3, edges).unwrap()
    }

    #[test]
    fn density_and_stability() {
        let tri = g3(&[(0, 1), (1, 2), (0, 2)]);
        let e = g3(&[]);
        assert_eq!(stat_density(&e, &tri).unwrap(), 1.5);
        let a = g3(&[(0, 1)]);
        assert_eq!(stat_stability(&a, &a).unwrap(), 1.5);
        assert_eq!(stat_stability(&a, &a.complement()).unwrap(), 0.0);
        let multi = Multigraph::empty(3, 2);
        assert!(stat_density(&e, &multi).is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(degree_sequence(&g3(&[(0, 1), (1, 2)])), vec![1, 2, 1]);
        assert_eq!(degree_sequence(&Multigraph::complete(4, 1)), vec![3; 4]);
        let m = Multigraph::from_edges(3, 2, &[(1, 0, 2)]).unwrap();
        assert_eq!(degree_sequence(&m), vec![2, 2, 0]);
        assert_eq!(sorted_degree_sequence(&g3(&[(1, 2)])), vec![1, 1, 0]);
    }

    #[test]
    fn reciprocity() {
        let a = Digraph::from_arcs(3, &[(0, 1)]).unwrap();
        let b = Digraph::from_arcs(3, &[(1, 0)]).unwrap();
        assert_eq!(stat_reciprocity(&a, &b).unwrap(), 3.0);
        assert_eq!(stat_reciprocity(&Digraph::empty(3), &b).unwrap(), 0.0);
        let a = Digraph::from_arcs(4, &[(0, 1), (2, 3)]).unwrap();
        let b = Digraph::from_arcs(4, &[(1, 0)]).unwrap();
        assert_eq!(stat_reciprocity(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn loopless_codec() {
        for i in 0..(1 << 6) {
            let g = Digraph::loopless_from_index(3, i);
            assert_eq!(g.loopless_index(), i);
            assert!((0..3).all(|v| !g.has_arc(v, v)));
        }
    }

    #[test]
    fn transitivity() {
        let path = g3(&[(0, 1), (1, 2)]);
        assert_eq!(stat_transitivity(&path, &g3(&[(0, 2)])).unwrap(), 3.0);
        let p4 = Multigraph::simple(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = Multigraph::simple(4, &[(0, 2)]).unwrap();
        assert_eq!(stat_transitivity(&p4, &b).unwrap(), 2.0);
        assert_eq!(stat_transitivity(&g3(&[]), &path).unwrap(), 0.0);
    }

    #[test]
    fn edge_count_is_dyadditive() {
        let out = factor_dyadditive(3, 1, |g| vec![g.edge_count() as f64]).unwrap();
        let f = out.factorization().unwrap();
        for per in &f.tau_f {
            assert_eq!(per[0], vec![0.0]);
            assert_eq!(per[1], vec![1.0]);
        }
    }

    #[test]
    fn shifted_statistic_uses_canonical_split() {
        let out = factor_dyadditive(3, 2, |g| vec![g.edge_count() as f64 + 3.0]).unwrap();
        let f = out.factorization().unwrap();
        for per in &f.tau_f {
            assert!(close(per[0][0], 1.0));
            assert!(close(per[2][0], 3.0));
        }
    }

    #[test]
    fn degree_sequence_is_dyadditive() {
        let out = factor_dyadditive(4, 1, |g| {
            degree_sequence(g).into_iter().map(|d| d as f64).collect()
        })
        .unwrap();
        let f = out.factorization().unwrap();
        // dyad {1, 0}: incidence column e_0 + e_1
        assert_eq!(f.tau_f[0][1], vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn triangle_count_is_not_dyadditive() {
        let out = factor_dyadditive(3, 1, |g| {
            vec![f64::from(u8::from(g.edge_count() == 3))]
        })
        .unwrap();
        assert_eq!(out.witness(), Some(&Multigraph::complete(3, 1)));
    }

    #[test]
    fn multiplicative_carriers() {
        let ones = factor_dyadically_multiplicative(3, 1, |_| 1.0).unwrap();
        assert!(ones.factorization().unwrap().kappa_f.iter().flatten().all(|&k| k == 1.0));
        let pow = factor_dyadically_multiplicative(3, 1, |g| 2f64.powi(g.edge_count() as i32)).unwrap();
        for per in &pow.factorization().unwrap().kappa_f {
            assert!(close(per[1], 2.0 * per[0]));
        }
        let tri = factor_dyadically_multiplicative(3, 1, |g| {
            1.0 + f64::from(u8::from(g.edge_count() == 3))
        })
        .unwrap();
        assert!(tri.witness().is_some());
    }

    #[test]
    fn multiplicative_with_zero_at_empty() {
        // kappa vanishes exactly when dyad 0 is absent
        let out = factor_dyadically_multiplicative(3, 1, |g| f64::from(g.multiplicities()[0])).unwrap();
        let f = out.factorization().unwrap();
        for g in StateSpace::multigraph(3, 1).unwrap().multigraphs().unwrap() {
            assert_eq!(f.kappa(&g), f64::from(g.multiplicities()[0]));
        }
    }

    #[test]
    fn large_space_uses_probes() {
        // G(8, 1) has 2^28 states
        let out = factor_dyadditive(8, 1, |g| vec![g.edge_count() as f64]).unwrap();
        assert!(out.factorization().is_some());
    }

    #[test]
    fn unions() {
        let g = g3(&[(0, 1)]);
        let u = multigraph_union(&[g.clone(), g.clone()]).unwrap();
        assert_eq!(u.t(), 2);
        assert_eq!(u.get(0, 1), 2);
        let all = multigraph_union(&[g.clone(), g.complement()]).unwrap();
        assert!(all.multiplicities().iter().all(|&m| m == 1));
        let e = multigraph_union(&[g3(&[]), g3(&[])]).unwrap();
        assert_eq!(e.edge_count(), 0);
        assert!(multigraph_union(&[g, Multigraph::empty(4, 1)]).is_err());
    }

    #[test]
    fn classes_of_small_spaces() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        let mut sizes: Vec<usize> = c.classes().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 3, 3]);
        let c = iso_classes(&StateSpace::multigraph(2, 2).unwrap()).unwrap();
        assert_eq!(c.len(), 3);
        let space = StateSpace::multigraph(4, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(c.members(c.class_of(0)), &[0]);
        assert_eq!(c.members(c.class_of(63)), &[63]);
    }

    #[test]
    fn isomorphism_pairs() {
        let a = g3(&[(0, 1)]);
        let b = g3(&[(1, 2)]);
        assert!(are_isomorphic(&a, &b).unwrap());
        assert!(!are_isomorphic(&a, &g3(&[(0, 1), (1, 2)])).unwrap());
    }

    #[test]
    fn exchangeable_statistics() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        let er: Vec<f64> = space
            .multigraphs()
            .unwrap()
            .map(|g| 0.3f64.powi(g.edge_count() as i32) * 0.7f64.powi(3 - g.edge_count() as i32))
            .collect();
        assert!(is_finitely_exchangeable(&er, &c).unwrap());
        let first_degree: Vec<f64> = space
            .multigraphs()
            .unwrap()
            .map(|g| degree_sequence(&g)[0] as f64)
            .collect();
        let (b, w) = exchangeability_witness(&first_degree, &c).unwrap().unwrap();
        let (gb, gw) = (space.decode(b).unwrap(), space.decode(w).unwrap());
        assert_eq!(gb.edge_count(), 1);
        assert!(are_isomorphic(&gb, &gw).unwrap());
        let sorted_first: Vec<f64> = space
            .multigraphs()
            .unwrap()
            .map(|g| sorted_degree_sequence(&g)[0] as f64)
            .collect();
        assert!(is_finitely_exchangeable(&sorted_first, &c).unwrap());
    }

    #[test]
    fn relation_invariance() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        let complement = PermutationFamily::builtin(crate::perm::FamilyKind::Complement, &space).unwrap();
        assert!(is_relation_invariant(&complement, &c).unwrap());
        assert!(is_relation_invariant(&PermutationFamily::identity(8), &c).unwrap());
        let one_edge = g3(&[(0, 1)]).index();
        let mut rows: Vec<Vec<usize>> = (0..8).map(|_| (0..8).collect()).collect();
        rows[5].swap(0, one_edge);
        let bad = PermutationFamily::custom(rows).unwrap();
        assert!(!is_relation_invariant(&bad, &c).unwrap());
    }

    #[test]
    fn transfer_on_density_chain() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        let fam = PermutationFamily::identity(8);
        let mu = Pmf::new(
            space
                .multigraphs()
                .unwrap()
                .map(|g| 0.3f64.powi(g.edge_count() as i32) * 0.7f64.powi(3 - g.edge_count() as i32))
                .collect(),
        )
        .unwrap();
        let p = StochasticMatrix::from_common_row(&mu, &fam).unwrap();
        let r = exchangeability_transfer(&p, &fam, &mu, &c).unwrap();
        assert!(r.mu_exchangeable && r.all_rows());

        let point = Pmf::point_mass(8, g3(&[(0, 1)]).index());
        let p = StochasticMatrix::from_common_row(&point, &fam).unwrap();
        let r = exchangeability_transfer(&p, &fam, &point, &c).unwrap();
        assert!(!r.mu_exchangeable && !r.some_row());
    }

    #[test]
    fn transfer_refuses_unmet_preconditions() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let c = iso_classes(&space).unwrap();
        let mut rows: Vec<Vec<usize>> = (0..8).map(|_| (0..8).collect()).collect();
        rows[5].swap(0, 1);
        let bad = PermutationFamily::custom(rows).unwrap();
        let mu = Pmf::uniform(8);
        let p = StochasticMatrix::from_common_row(&mu, &bad).unwrap();
        assert!(matches!(
            exchangeability_transfer(&p, &bad, &mu, &c),
            Err(Error::Precondition(_))
        ));
        let single = IsoClasses::trivial(1);
        let one = StochasticMatrix::identity(1);
        let r = exchangeability_transfer(&one, &PermutationFamily::identity(1), &Pmf::uniform(1), &single).unwrap();
        assert!(r.mu_exchangeable);
    }
}
