//! Exhaustive reference computations.
//!
//! Each routine enumerates its outcome space directly and sums with
//! compensated arithmetic. None of them call the routine they are used to
//! check; they only read model data.

use std::collections::BTreeMap;

use crate::ermgm::ErmgmModel;
use crate::error::{Error, Result};
use crate::expfam::ExpFamilySpec;
use crate::matrix::StochasticMatrix;
use crate::perm::PermutationFamily;
use crate::space::{dyad_count, Multigraph};

/// Largest outcome space an oracle will enumerate.
pub const ORACLE_CAP: u128 = 1 << 20;

/// Kahan–Babuška (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// A finite law over outcome tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLaw {
    pub support: Vec<Vec<usize>>,
    pub mass: Vec<f64>,
}

impl ExactLaw {
    pub fn total(&self) -> f64 {
        compensated_sum(self.mass.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Mass of an outcome; zero off the support.
    pub fn mass_of(&self, outcome: &[usize]) -> f64 {
        self.support
            .iter()
            .position(|s| s == outcome)
            .map_or(0.0, |i| self.mass[i])
    }

    /// Law of coordinate `k`.
    pub fn marginal(&self, k: usize, size: usize) -> Vec<f64> {
        let mut acc = vec![CompensatedSum::default(); size];
        for (s, &m) in self.support.iter().zip(&self.mass) {
            acc[s[k]].add(m);
        }
        acc.iter().map(CompensatedSum::value).collect()
    }

    /// `max |mass(z) - Π_i m(z_i)|` against the product of the first
    /// coordinate's marginal `m`, over every tuple in `size^T`.
    pub fn iid_residual(&self, size: usize) -> f64 {
        let Some(first) = self.support.first() else {
            return 0.0;
        };
        let len = first.len();
        let m = self.marginal(0, size);
        let lookup: BTreeMap<&[usize], f64> =
            self.support.iter().map(Vec::as_slice).zip(self.mass.iter().copied()).collect();
        let mut worst: f64 = 0.0;
        let mut tuple = vec![0usize; len];
        loop {
            let product: f64 = tuple.iter().map(|&z| m[z]).product();
            let have = lookup.get(tuple.as_slice()).copied().unwrap_or(0.0);
            worst = worst.max((have - product).abs());
            if !advance(&mut tuple, size) {
                return worst;
            }
        }
    }
}

/// Odometer increment; false after the last tuple.
fn advance(tuple: &mut [usize], base: usize) -> bool {
    for d in tuple.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn check_cap(base: usize, len: usize) -> Result<()> {
    let count = (base as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if count > ORACLE_CAP {
        return Err(Error::CapExceeded {
            count,
            cap: ORACLE_CAP,
        });
    }
    Ok(())
}

/// Law of `(X_1, ..., X_T)` given `X_0 = x0`, support in lexicographic order.
pub fn enumerate_trajectory_law(p: &StochasticMatrix, x0: usize, steps: usize) -> Result<ExactLaw> {
    let size = p.size();
    if x0 >= size {
        return Err(Error::InvalidArgument(format!("initial state {x0} outside 0..{size}")));
    }
    check_cap(size, steps)?;
    let mut support = Vec::new();
    let mut mass = Vec::new();
    let mut tuple = vec![0usize; steps];
    loop {
        let mut prev = x0;
        let mut m = 1.0;
        for &x in &tuple {
            m *= p.get(prev, x);
            prev = x;
        }
        support.push(tuple.clone());
        mass.push(m);
        if !advance(&mut tuple, size) {
            break;
        }
    }
    Ok(ExactLaw { support, mass })
}

/// Law of `(Z_1, ..., Z_T)` with `Z_i = sigma_{X_{i-1}}(X_i)`, obtained by
/// pushing the trajectory law forward.
pub fn pushforward_z_law(
    p: &StochasticMatrix,
    family: &PermutationFamily,
    x0: usize,
    steps: usize,
) -> Result<ExactLaw> {
    if family.size() != p.size() {
        return Err(Error::DimensionMismatch {
            expected: p.size(),
            found: family.size(),
        });
    }
    let law = enumerate_trajectory_law(p, x0, steps)?;
    let mut acc: BTreeMap<Vec<usize>, CompensatedSum> = BTreeMap::new();
    for (xs, &m) in law.support.iter().zip(&law.mass) {
        let mut prev = x0;
        let z: Vec<usize> = xs
            .iter()
            .map(|&x| {
                let z = family.row(prev)[x] as usize;
                prev = x;
                z
            })
            .collect();
        acc.entry(z).or_default().add(m);
    }
    let (support, mass) = acc.into_iter().map(|(z, s)| (z, s.value())).unzip();
    Ok(ExactLaw { support, mass })
}

/// `log Σ_x kappa(x) exp(eta . tau(x))` by direct compensated summation.
pub fn brute_partition(fam: &ExpFamilySpec, theta: &[f64]) -> Result<f64> {
    check_cap(fam.size(), 1)?;
    let eta = fam.eta().evaluate(theta)?;
    let exponents: Vec<f64> = (0..fam.size())
        .map(|x| eta.iter().zip(fam.tau(x)).map(|(e, t)| e * t).sum())
        .collect();
    let shift = (0..fam.size())
        .filter(|&x| fam.kappa(x) > 0.0)
        .map(|x| exponents[x])
        .fold(f64::NEG_INFINITY, f64::max);
    let s = compensated_sum((0..fam.size()).map(|x| fam.kappa(x) * (exponents[x] - shift).exp()));
    Ok(shift + s.ln())
}

/// Masses of every simple graph under `model`, from its tables.
fn simple_graph_masses(model: &ErmgmModel, theta: &[f64]) -> Result<Vec<f64>> {
    let n = model.n();
    let dyads = dyad_count(n);
    let fact = model.factorization();
    let eta = model.eta().evaluate(theta)?;
    let weights: Vec<f64> = (0..1usize << dyads)
        .map(|g| {
            let mut k = 1.0;
            let mut e = 0.0;
            for f in 0..dyads {
                let m = g >> f & 1;
                k *= fact.kappa_f[f][m];
                e += eta.iter().zip(&fact.tau_f[f][m]).map(|(a, b)| a * b).sum::<f64>();
            }
            k * e.exp()
        })
        .collect();
    let z = compensated_sum(weights.iter().copied());
    Ok(weights.into_iter().map(|w| w / z).collect())
}

/// Law of the union of `t` iid draws of a simple-graph model, indexed by the
/// union's index in `G(n, t)`.
pub fn brute_union_law(simple: &ErmgmModel, theta: &[f64], t: u32) -> Result<ExactLaw> {
    if simple.t() != 1 {
        return Err(Error::InvalidArgument("union law needs a simple-graph model".into()));
    }
    let n = simple.n();
    let dyads = dyad_count(n);
    let graphs = 1usize
        .checked_shl(dyads as u32)
        .ok_or(Error::CapExceeded { count: u128::MAX, cap: ORACLE_CAP })?;
    check_cap(graphs, t as usize)?;
    let masses = simple_graph_masses(simple, theta)?;
    let mut acc: BTreeMap<usize, CompensatedSum> = BTreeMap::new();
    let mut tuple = vec![0usize; t as usize];
    loop {
        let mut w = vec![0u32; dyads];
        let mut m = 1.0;
        for &g in &tuple {
            m *= masses[g];
            for (f, wf) in w.iter_mut().enumerate() {
                *wf += (g >> f & 1) as u32;
            }
        }
        let index = Multigraph::new(n, t, w)?.index();
        acc.entry(index).or_default().add(m);
        if !advance(&mut tuple, graphs) {
            break;
        }
    }
    let (support, mass) = acc.into_iter().map(|(i, s)| (vec![i], s.value())).unzip();
    Ok(ExactLaw { support, mass })
}

/// Both sides of `Π_i Σ_b f_i(b) = Σ_y Π_i f_i(y_i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumProductCheck {
    pub product_of_sums: f64,
    pub sum_of_products: f64,
    pub holds: bool,
}

pub fn sum_product_identity_check(tables: &[Vec<f64>]) -> Result<SumProductCheck> {
    if tables.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("empty table".into()));
    }
    let count = tables
        .iter()
        .try_fold(1u128, |acc, t| acc.checked_mul(t.len() as u128))
        .unwrap_or(u128::MAX);
    if count > ORACLE_CAP {
        return Err(Error::CapExceeded {
            count,
            cap: ORACLE_CAP,
        });
    }
    let product_of_sums: f64 = tables
        .iter()
        .map(|t| compensated_sum(t.iter().copied()))
        .product();
    let mut acc = CompensatedSum::default();
    let mut y = vec![0usize; tables.len()];
    'outer: loop {
        acc.add(y.iter().zip(tables).map(|(&i, t)| t[i]).product());
        for k in (0..y.len()).rev() {
            y[k] += 1;
            if y[k] < tables[k].len() {
                continue 'outer;
            }
            y[k] = 0;
        }
        break;
    }
    let sum_of_products = acc.value();
    let holds = (product_of_sums - sum_of_products).abs()
        <= 1e-10 * product_of_sums.abs().max(sum_of_products.abs()).max(f64::MIN_POSITIVE);
    Ok(SumProductCheck {
        product_of_sums,
        sum_of_products,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::ParameterMap;

    #[test]
    fn compensated_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn one_step_law_is_a_row() {
        let p = StochasticMatrix::from_rows(vec![vec![0.2, 0.8], vec![0.6, 0.4]]).unwrap();
        let law = enumerate_trajectory_law(&p, 1, 1).unwrap();
        assert_eq!(law.mass, vec![0.6, 0.4]);
    }

    #[test]
    fn permutation_matrix_gives_point_mass() {
        let p = StochasticMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let law = enumerate_trajectory_law(&p, 0, 4).unwrap();
        assert_eq!(law.mass_of(&[1, 2, 0, 1]), 1.0);
        assert_eq!(law.total(), 1.0);
    }

    #[test]
    fn caps_are_enforced() {
        let p = StochasticMatrix::uniform(2);
        assert!(matches!(
            enumerate_trajectory_law(&p, 0, 21),
            Err(Error::CapExceeded { .. })
        ));
        assert!(enumerate_trajectory_law(&p, 0, 20).is_ok());
    }

    #[test]
    fn identity_family_pushforward_is_trajectory_law() {
        let p = StochasticMatrix::from_rows(vec![vec![0.3, 0.7], vec![0.5, 0.5]]).unwrap();
        let a = enumerate_trajectory_law(&p, 0, 3).unwrap();
        let b = pushforward_z_law(&p, &PermutationFamily::identity(2), 0, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partitions() {
        let one = ExpFamilySpec::new(vec![1.0], vec![0.0], 1, ParameterMap::natural(1)).unwrap();
        assert_eq!(brute_partition(&one, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn simple_union_is_identity() {
        let er = ErmgmModel::erdos_renyi(3, ParameterMap::DensityLogit { n: 3 }).unwrap();
        let law = brute_union_law(&er, &[0.3], 1).unwrap();
        for (s, m) in law.support.iter().zip(&law.mass) {
            let e = s[0].count_ones() as i32;
            assert!((m - 0.3f64.powi(e) * 0.7f64.powi(3 - e)).abs() < 1e-15);
        }
        let er = ErmgmModel::erdos_renyi(2, ParameterMap::DensityLogit { n: 2 }).unwrap();
        let law = brute_union_law(&er, &[0.25], 2).unwrap();
        for (x, y) in law.mass.iter().zip([0.5625, 0.375, 0.0625]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn sum_product() {
        let c = sum_product_identity_check(&[vec![0.5, 2.0]]).unwrap();
        assert!(c.holds);
        let c = sum_product_identity_check(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(c.product_of_sums, 21.0);
        assert_eq!(c.sum_of_products, 3.0 + 4.0 + 6.0 + 8.0);
        assert!(sum_product_identity_check(&[vec![]]).is_err());
    }
}
