//! Ready-made families used throughout the crate.

use crate::error::{Error, Result};
use crate::expfam::{CefSpec, ExpFamilySpec, ParameterMap};
use crate::matrix::{PairTable, Pmf, StochasticMatrix};
use crate::netstat::{stat_density, stat_reciprocity, stat_stability, stat_transitivity, Digraph};
use crate::perm::{FamilyKind, PermutationFamily};
use crate::space::{Multigraph, StateSpace};

/// Largest loopless-digraph space tabulated by [`reciprocity_cef`].
pub const MAX_DIGRAPH_STATES: usize = 1 << 12;

/// Three-state scalar family with `eta = log theta`. Rows 0 and 1 share the
/// normalizer `3 theta + theta^3`; row 2 does not.
pub fn gani_cef() -> CefSpec {
    let kappa = PairTable::from_scalar_rows(&[
        vec![2.0, 1.0, 1.0],
        vec![1.0 / 3.0, 2.0 / 3.0, 3.0],
        vec![11.0 / 4.0, 1.0, 1.0 / 4.0],
    ])
    .expect("fixed table");
    let tau = PairTable::from_scalar_rows(&[
        vec![1.0, 1.0, 3.0],
        vec![3.0, 3.0, 1.0],
        vec![1.0, 3.0, 3.0],
    ])
    .expect("fixed table");
    CefSpec::new(kappa, tau, ParameterMap::ScalarLog).expect("fixed family")
}

fn graph_cef(
    n: usize,
    eta: ParameterMap,
    stat: impl Fn(&Multigraph, &Multigraph) -> Result<f64>,
) -> Result<CefSpec> {
    let space = StateSpace::multigraph(n, 1)?;
    let graphs: Vec<Multigraph> = space.multigraphs()?.collect();
    let size = graphs.len();
    let mut values = Vec::with_capacity(size * size);
    for a in &graphs {
        for b in &graphs {
            values.push(stat(a, b)?);
        }
    }
    CefSpec::new(
        PairTable::filled(size, size, 1, 1.0),
        PairTable::new(size, size, 1, values)?,
        eta,
    )
}

/// Density (`Identity`) or stability (`Stability`) chain on `G(n, 1)` with
/// `eta(p) = (n - 1) log(p / (1 - p))`.
pub fn density_or_stability_cef(n: usize, kind: FamilyKind) -> Result<CefSpec> {
    let eta = ParameterMap::DensityLogit { n };
    match kind {
        FamilyKind::Identity => graph_cef(n, eta, stat_density),
        FamilyKind::Stability => graph_cef(n, eta, stat_stability),
        other => Err(Error::InvalidArgument(format!(
            "no graph chain for family {other:?}"
        ))),
    }
}

pub fn density_cef(n: usize) -> Result<CefSpec> {
    density_or_stability_cef(n, FamilyKind::Identity)
}

pub fn stability_cef(n: usize) -> Result<CefSpec> {
    density_or_stability_cef(n, FamilyKind::Stability)
}

/// Transitivity chain on `G(n, 1)` with unit carrier.
pub fn transitivity_cef(n: usize, eta: ParameterMap) -> Result<CefSpec> {
    graph_cef(n, eta, stat_transitivity)
}

/// Reciprocity chain on loopless digraphs with `n` vertices, unit carrier.
/// States are indexed as in [`Digraph::loopless_from_index`].
pub fn reciprocity_cef(n: usize, eta: ParameterMap) -> Result<CefSpec> {
    let arcs = n * n.saturating_sub(1);
    let size = 1usize
        .checked_shl(arcs as u32)
        .filter(|&s| s <= MAX_DIGRAPH_STATES)
        .ok_or(Error::SpaceTooLarge {
            size: 1u128 << arcs.min(127),
            cap: MAX_DIGRAPH_STATES as u128,
        })?;
    let graphs: Vec<Digraph> = (0..size).map(|i| Digraph::loopless_from_index(n, i)).collect();
    let mut values = Vec::with_capacity(size * size);
    for a in &graphs {
        for b in &graphs {
            values.push(stat_reciprocity(a, b)?);
        }
    }
    CefSpec::new(
        PairTable::filled(size, size, 1, 1.0),
        PairTable::new(size, size, 1, values)?,
        eta,
    )
}

/// Family over `G(n, 1)` with `tau(g) = |E(g)| / (n - 1)` and unit carrier;
/// under `DensityLogit` this is the Erdős–Rényi law with edge probability `p`.
pub fn erdos_renyi_family(space: &StateSpace, eta: ParameterMap) -> Result<ExpFamilySpec> {
    let (n, t) = space.require_multigraph()?;
    if t != 1 {
        return Err(Error::InvalidArgument("Erdős–Rényi family needs simple graphs".into()));
    }
    let scale = 1.0 / (n as f64 - 1.0);
    let graphs: Vec<Multigraph> = space.multigraphs()?.collect();
    ExpFamilySpec::from_fn(space.size(), 1, eta, |x, out| {
        out[0] = graphs[x].edge_count() as f64 * scale;
        1.0
    })
}

/// The walk `X_{t+1} = X_t + Z (mod n)` with `Z` uniform on `{0, 1}`: its
/// matrix (mass `1/2` where `j - i mod n` is 0 or 1), the family
/// `sigma_i j = j - i mod n`, and the law of `Z`.
pub fn modular_chain(n: usize) -> Result<(StochasticMatrix, PermutationFamily, Pmf)> {
    if n < 2 {
        return Err(Error::InvalidArgument("modular chain needs n >= 2".into()));
    }
    let space = StateSpace::modular(n)?;
    let family = PermutationFamily::builtin(FamilyKind::Modular, &space)?;
    let mut mu = vec![0.0; n];
    mu[0] = 0.5;
    mu[1] = 0.5;
    let mu = Pmf::new(mu)?;
    let p = StochasticMatrix::from_common_row(&mu, &family)?;
    Ok((p, family, mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_matrix_shape() {
        let (p, _, _) = modular_chain(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if (j + 3 - i) % 3 <= 1 { 0.5 } else { 0.0 };
                assert_eq!(p.get(i, j), expected);
            }
        }
    }

    #[test]
    fn reciprocity_space_sizes() {
        let c = reciprocity_cef(3, ParameterMap::natural(1)).unwrap();
        assert_eq!(c.size(), 64);
        assert!(reciprocity_cef(5, ParameterMap::natural(1)).is_err());
    }

    #[test]
    fn gani_rows() {
        let g = gani_cef();
        assert_eq!(g.rows(), 3);
        assert_eq!(g.kappa().scalar(1, 2), 3.0);
    }
}
