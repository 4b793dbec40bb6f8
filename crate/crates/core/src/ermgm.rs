//! Dyadically independent exponential random multigraph models.
//!
//! When the statistic is dyadditive and the carrier dyadically
//! multiplicative, the dyads of `G ~ ERMGM` are independent with per-dyad
//! laws `mu_f(m) ∝ kappa_f(m) exp(eta . tau_f(m))`, so the partition
//! function is a product of `N` sums of `t + 1` terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{affinely_independent_entries, ExpFamilySpec, ParameterMap};
use crate::matrix::{inverse_cdf, Pmf};
use crate::netstat::{stat_density, stat_stability, DyadicFactorization};
use crate::numeric::{dot, log_binomial, log_sum_exp};
use crate::puniform::Trajectory;
use crate::rng::CounterRng;
use crate::space::{dyad_count, Multigraph, StateSpace};

/// A multigraph model given by per-dyad statistic and carrier tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ErmgmModel {
    fact: DyadicFactorization,
    eta: ParameterMap,
}

impl ErmgmModel {
    pub fn new(fact: DyadicFactorization, eta: ParameterMap) -> Result<Self> {
        let dyads = dyad_count(fact.n);
        let width = fact.t as usize + 1;
        if fact.n < 2 || fact.t < 1 {
            return Err(Error::InvalidArgument("model needs n >= 2 and t >= 1".into()));
        }
        if fact.tau_f.len() != dyads || fact.kappa_f.len() != dyads {
            return Err(Error::DimensionMismatch {
                expected: dyads,
                found: fact.tau_f.len().min(fact.kappa_f.len()),
            });
        }
        let dim = eta.stat_dim();
        for f in 0..dyads {
            if fact.tau_f[f].len() != width || fact.kappa_f[f].len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: fact.tau_f[f].len().min(fact.kappa_f[f].len()),
                });
            }
            if let Some(v) = fact.tau_f[f].iter().find(|v| v.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if fact.kappa_f[f].iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "carrier of dyad {f} must be finite and nonnegative"
                )));
            }
            if fact.kappa_f[f].iter().all(|&k| k == 0.0) {
                return Err(Error::UndefinedFamily(format!("carrier of dyad {f} is zero")));
            }
        }
        Ok(Self { fact, eta })
    }

    /// Every dyad shares the tables `tau[m]`, `kappa[m]`.
    pub fn homogeneous(
        n: usize,
        t: u32,
        tau: Vec<Vec<f64>>,
        kappa: Vec<f64>,
        eta: ParameterMap,
    ) -> Result<Self> {
        let dyads = dyad_count(n);
        Self::new(
            DyadicFactorization {
                n,
                t,
                tau_f: vec![tau; dyads],
                kappa_f: vec![kappa; dyads],
            },
            eta,
        )
    }

    /// The density model on simple graphs: `tau_f(1) = 1/(n-1)`, `kappa = 1`.
    /// With `eta = DensityLogit` each dyad is present with probability `p`.
    pub fn erdos_renyi(n: usize, eta: ParameterMap) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("model needs n >= 2".into()));
        }
        Self::homogeneous(
            n,
            1,
            vec![vec![0.0], vec![1.0 / (n as f64 - 1.0)]],
            vec![1.0, 1.0],
            eta,
        )
    }

    pub fn n(&self) -> usize {
        self.fact.n
    }

    pub fn t(&self) -> u32 {
        self.fact.t
    }

    pub fn dyads(&self) -> usize {
        dyad_count(self.fact.n)
    }

    pub fn factorization(&self) -> &DyadicFactorization {
        &self.fact
    }

    pub fn eta(&self) -> &ParameterMap {
        &self.eta
    }

    fn dyad_log_weights(&self, eta: &[f64], f: usize) -> Vec<f64> {
        self.fact.kappa_f[f]
            .iter()
            .zip(&self.fact.tau_f[f])
            .map(|(&k, tau)| if k == 0.0 { f64::NEG_INFINITY } else { k.ln() + dot(eta, tau) })
            .collect()
    }

    fn dyad_log_pmf(&self, eta: &[f64], f: usize) -> Vec<f64> {
        let w = self.dyad_log_weights(eta, f);
        let z = log_sum_exp(w.iter().copied());
        w.into_iter().map(|x| x - z).collect()
    }

    /// Law of the multiplicity of dyad `f`.
    pub fn dyad_pmf(&self, theta: &[f64], f: usize) -> Result<Pmf> {
        if f >= self.dyads() {
            return Err(Error::InvalidArgument(format!("no dyad {f}")));
        }
        let eta = self.eta.evaluate(theta)?;
        Pmf::new(self.dyad_log_pmf(&eta, f).into_iter().map(f64::exp).collect())
    }

    /// `Σ_f log Σ_r kappa_f(r) exp(eta . tau_f(r))`, with the number of
    /// `(f, r)` terms evaluated.
    pub fn fast_log_partition_counted(&self, theta: &[f64]) -> Result<(f64, usize)> {
        let eta = self.eta.evaluate(theta)?;
        let mut terms = 0;
        let psi = (0..self.dyads())
            .map(|f| {
                let w = self.dyad_log_weights(&eta, f);
                terms += w.len();
                log_sum_exp(w)
            })
            .sum();
        Ok((psi, terms))
    }

    pub fn fast_log_partition(&self, theta: &[f64]) -> Result<f64> {
        self.fast_log_partition_counted(theta).map(|(psi, _)| psi)
    }

    /// Draws each dyad independently by inverse CDF; replicate `r` uses
    /// stream `r` of the generator with the dyad index as counter.
    pub fn sample_replicate(&self, theta: &[f64], rng: &CounterRng, replicate: u64) -> Result<Multigraph> {
        let eta = self.eta.evaluate(theta)?;
        let m = (0..self.dyads())
            .map(|f| {
                let p: Vec<f64> = self.dyad_log_pmf(&eta, f).into_iter().map(f64::exp).collect();
                inverse_cdf(&p, rng.uniform_at(replicate, f as u64)) as u32
            })
            .collect();
        Multigraph::new(self.n(), self.t(), m)
    }

    pub fn sample_multigraph(&self, theta: &[f64], seed: u64) -> Result<Multigraph> {
        self.sample_replicate(theta, &CounterRng::new(seed), 0)
    }

    /// `Σ_f log mu_f(w(f))`; `-inf` on zero-mass graphs.
    pub fn multigraph_log_pmf(&self, theta: &[f64], w: &Multigraph) -> Result<f64> {
        self.check_member(w)?;
        let eta = self.eta.evaluate(theta)?;
        Ok(w
            .multiplicities()
            .iter()
            .enumerate()
            .map(|(f, &m)| self.dyad_log_pmf(&eta, f)[m as usize])
            .sum())
    }

    fn check_member(&self, w: &Multigraph) -> Result<()> {
        if w.n() != self.n() || w.t() != self.t() {
            return Err(Error::InvalidArgument(format!(
                "graph in G({}, {}) is not in G({}, {})",
                w.n(),
                w.t(),
                self.n(),
                self.t()
            )));
        }
        Ok(())
    }

    /// The joint family over `G(n, t)`: `kappa(g) = Π kappa_f`, `tau(g) = Σ tau_f`.
    pub fn to_expfam(&self) -> Result<ExpFamilySpec> {
        let space = StateSpace::multigraph(self.n(), self.t())?;
        let dim = self.eta.stat_dim();
        let graphs: Vec<Multigraph> = space.multigraphs()?.collect();
        ExpFamilySpec::from_fn(space.size(), dim, self.eta.clone(), |x, out| {
            out.copy_from_slice(&self.fact.tau(&graphs[x]));
            self.fact.kappa(&graphs[x])
        })
    }
}

fn require_simple_model(model: &ErmgmModel) -> Result<()> {
    if model.t() != 1 {
        return Err(Error::InvalidArgument(format!(
            "union needs a simple-graph model, got t = {}",
            model.t()
        )));
    }
    Ok(())
}

/// The `t` simple graphs whose union is `w`: copy `i` holds dyad `f` iff
/// `i < w(f)`.
pub fn canonical_components(w: &Multigraph) -> Vec<Multigraph> {
    (0..w.t())
        .map(|i| {
            let m = w.multiplicities().iter().map(|&x| u32::from(i < x)).collect();
            Multigraph::new(w.n(), 1, m).expect("simple graph")
        })
        .collect()
}

/// `log Pr(W = w)` for the union `W` of `t` iid draws of a simple-graph model:
/// `log Pr(Z = z) + Σ_f log C(t, w(f))` for the canonical components `z`.
pub fn union_log_probability(simple: &ErmgmModel, theta: &[f64], w: &Multigraph) -> Result<f64> {
    require_simple_model(simple)?;
    if w.n() != simple.n() {
        return Err(Error::DimensionMismatch {
            expected: simple.n(),
            found: w.n(),
        });
    }
    let mut total = 0.0;
    for z in canonical_components(w) {
        total += simple.multigraph_log_pmf(theta, &z)?;
    }
    let t = w.t();
    total += w
        .multiplicities()
        .iter()
        .map(|&m| log_binomial(t, m))
        .sum::<f64>();
    Ok(total)
}

/// Exponential family of the union of `t` iid simple graphs.
#[derive(Clone, Debug, PartialEq)]
pub struct UnionFamily {
    pub family: ExpFamilySpec,
    /// Whether the default probes of `eta` span an `l`-dimensional affine set.
    pub eta_affinely_independent: bool,
}

/// Same parameter map as the simple model; statistic
/// `Σ_f tau_f(1) W(f) + tau_f(0) (t - W(f))`; carrier
/// `Π_f C(t, W(f)) kappa_f(1)^W(f) kappa_f(0)^(t - W(f))`.
pub fn union_expfam(simple: &ErmgmModel, t: u32) -> Result<UnionFamily> {
    require_simple_model(simple)?;
    let n = simple.n();
    let space = StateSpace::multigraph(n, t)?;
    let fact = simple.factorization();
    let dim = simple.eta().stat_dim();
    let graphs: Vec<Multigraph> = space.multigraphs()?.collect();
    let family = ExpFamilySpec::from_fn(space.size(), dim, simple.eta().clone(), |x, out| {
        let w = &graphs[x];
        out.fill(0.0);
        let mut log_carrier = 0.0;
        for (f, &m) in w.multiplicities().iter().enumerate() {
            let (on, off) = (f64::from(m), f64::from(t - m));
            for ((o, t1), t0) in out.iter_mut().zip(&fact.tau_f[f][1]).zip(&fact.tau_f[f][0]) {
                *o += t1 * on + t0 * off;
            }
            log_carrier += log_binomial(t, m) + on * fact.kappa_f[f][1].ln() + off * fact.kappa_f[f][0].ln();
        }
        log_carrier.exp()
    })?;
    let etas = simple
        .eta()
        .default_probes()
        .iter()
        .map(|th| simple.eta().evaluate(th))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnionFamily {
        family,
        eta_affinely_independent: affinely_independent_entries(&etas),
    })
}

/// Which transition statistic the estimator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphChainKind {
    Density,
    Stability,
}

impl std::str::FromStr for GraphChainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Self::Density),
            "stability" => Ok(Self::Stability),
            other => Err(Error::InvalidArgument(format!("unknown chain kind {other:?}"))),
        }
    }
}

/// Closed-form maximum likelihood estimate of `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MleEstimate {
    pub p_hat: f64,
    /// `p_hat` is 0 or 1, outside the open parameter space.
    pub boundary: bool,
    pub transitions: usize,
}

/// `p_hat = (n-1)/(T N) Σ_{i<T} tau(G_i, G_{i+1})` over the `T` transitions
/// of a trajectory in `G(n, 1)`.
pub fn mle_density_stability(
    space: &StateSpace,
    x: &Trajectory,
    kind: GraphChainKind,
) -> Result<MleEstimate> {
    let (n, t) = space.require_multigraph()?;
    if t != 1 {
        return Err(Error::InvalidArgument("estimator needs simple graphs".into()));
    }
    if x.transitions() == 0 {
        return Err(Error::EmptyTrajectory);
    }
    if x.size() != space.size() {
        return Err(Error::DimensionMismatch {
            expected: space.size(),
            found: x.size(),
        });
    }
    let mut sum = 0.0;
    for (a, b) in x.pairs() {
        let (ga, gb) = (space.decode(a)?, space.decode(b)?);
        sum += match kind {
            GraphChainKind::Density => stat_density(&ga, &gb)?,
            GraphChainKind::Stability => stat_stability(&ga, &gb)?,
        };
    }
    Ok(finish_mle(n, x.transitions(), sum))
}

/// The same estimate from the companion sequence `z_i = sigma_{x_i}(x_{i+1})`
/// of a density (identity family) or stability chain, where each transition
/// statistic is `|E(z_i)| / (n - 1)`.
pub fn mle_from_companion(space: &StateSpace, z: &Trajectory) -> Result<MleEstimate> {
    let (n, t) = space.require_multigraph()?;
    if t != 1 {
        return Err(Error::InvalidArgument("estimator needs simple graphs".into()));
    }
    if z.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if z.size() != space.size() {
        return Err(Error::DimensionMismatch {
            expected: space.size(),
            found: z.size(),
        });
    }
    let mut sum = 0.0;
    for &s in z.states() {
        let g = space.decode(s)?;
        sum += stat_density(&g, &g)?;
    }
    Ok(finish_mle(n, z.len(), sum))
}

fn finish_mle(n: usize, transitions: usize, sum: f64) -> MleEstimate {
    let p_hat = ((n as f64 - 1.0) / (transitions as f64 * dyad_count(n) as f64) * sum).clamp(0.0, 1.0);
    MleEstimate {
        p_hat,
        boundary: p_hat == 0.0 || p_hat == 1.0,
        transitions,
    }
}

/// `(n - 1) log(p / (1 - p))`.
pub fn eta_density(p: f64, n: usize) -> Result<f64> {
    ParameterMap::DensityLogit { n }.evaluate(&[p]).map(|e| e[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn counting(n: usize, t: u32) -> ErmgmModel {
        ErmgmModel::homogeneous(
            n,
            t,
            (0..=t).map(|m| vec![f64::from(m)]).collect(),
            vec![1.0; t as usize + 1],
            ParameterMap::natural(1),
        )
        .unwrap()
    }

    #[test]
    fn dyad_laws() {
        let m = counting(3, 3);
        let p = m.dyad_pmf(&[0.0], 1).unwrap();
        assert!(p.as_slice().iter().all(|&x| close(x, 0.25, 1e-15)));
        let m = counting(2, 1);
        let g = 0.8f64;
        let p = m.dyad_pmf(&[g], 0).unwrap();
        assert!(close(p[1], g.exp() / (1.0 + g.exp()), 1e-15));
        for p in [0.1, 0.5, 0.9] {
            let er = ErmgmModel::erdos_renyi(4, ParameterMap::DensityLogit { n: 4 }).unwrap();
            assert!(close(er.dyad_pmf(&[p], 2).unwrap()[1], p, 1e-14));
        }
    }

    #[test]
    fn fast_partition_closed_forms() {
        let er = ErmgmModel::erdos_renyi(3, ParameterMap::natural(1)).unwrap();
        for g in [-2.0, 0.0, 3.0] {
            let expected = 3.0 * (1.0 + (g / 2.0f64).exp()).ln();
            assert!(close(er.fast_log_partition(&[g]).unwrap(), expected, 1e-13));
        }
        let m = counting(3, 2);
        assert!(close(m.fast_log_partition(&[0.0]).unwrap(), 3.0 * 3f64.ln(), 1e-14));
        let e = 1f64.exp();
        let (psi, terms) = m.fast_log_partition_counted(&[1.0]).unwrap();
        assert!(close(psi, 3.0 * (1.0 + e + e * e).ln(), 1e-13));
        assert_eq!(terms, 9);
    }

    #[test]
    fn degenerate_samples() {
        let all = ErmgmModel::homogeneous(4, 1, vec![vec![0.0], vec![0.0]], vec![0.0, 1.0], ParameterMap::natural(1)).unwrap();
        assert_eq!(all.sample_multigraph(&[0.0], 3).unwrap(), Multigraph::complete(4, 1));
        let none = ErmgmModel::homogeneous(4, 1, vec![vec![0.0], vec![0.0]], vec![1.0, 0.0], ParameterMap::natural(1)).unwrap();
        assert_eq!(none.sample_multigraph(&[0.0], 3).unwrap(), Multigraph::empty(4, 1));
    }

    #[test]
    fn samples_are_seed_deterministic() {
        let er = ErmgmModel::erdos_renyi(5, ParameterMap::DensityLogit { n: 5 }).unwrap();
        let a = er.sample_multigraph(&[0.4], 99).unwrap();
        let b = er.sample_multigraph(&[0.4], 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn log_pmf_values() {
        let er = ErmgmModel::erdos_renyi(4, ParameterMap::DensityLogit { n: 4 }).unwrap();
        let p = 0.3f64;
        let e = er.multigraph_log_pmf(&[p], &Multigraph::empty(4, 1)).unwrap();
        assert!(close(e, 6.0 * 0.7f64.ln(), 1e-13));
        let c = er.multigraph_log_pmf(&[p], &Multigraph::complete(4, 1)).unwrap();
        assert!(close(c, 6.0 * p.ln(), 1e-13));
        let m = counting(3, 2);
        let space = StateSpace::multigraph(3, 2).unwrap();
        let total: f64 = space
            .multigraphs()
            .unwrap()
            .map(|g| m.multigraph_log_pmf(&[0.7], &g).unwrap().exp())
            .sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(m.multigraph_log_pmf(&[0.7], &Multigraph::empty(3, 1)).is_err());
    }

    #[test]
    fn log_pmf_matches_joint_family() {
        let m = ErmgmModel::homogeneous(
            3,
            2,
            vec![vec![0.5], vec![-1.0], vec![2.0]],
            vec![1.0, 3.0, 0.5],
            ParameterMap::natural(1),
        )
        .unwrap();
        let ef = m.to_expfam().unwrap();
        let lp = ef.log_pmf(&[0.3]).unwrap();
        for (i, g) in StateSpace::multigraph(3, 2).unwrap().multigraphs().unwrap().enumerate() {
            assert!(close(m.multigraph_log_pmf(&[0.3], &g).unwrap(), lp[i], 1e-12));
        }
    }

    #[test]
    fn zero_mass_graph_is_neg_infinity() {
        let m = ErmgmModel::homogeneous(3, 1, vec![vec![0.0], vec![1.0]], vec![1.0, 0.0], ParameterMap::natural(1)).unwrap();
        let lp = m.multigraph_log_pmf(&[0.0], &Multigraph::complete(3, 1)).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
    }

    #[test]
    fn union_one_dyad() {
        let er = ErmgmModel::erdos_renyi(2, ParameterMap::DensityLogit { n: 2 }).unwrap();
        let p = 0.3f64;
        let w = Multigraph::new(2, 2, vec![1]).unwrap();
        assert!(close(union_log_probability(&er, &[p], &w).unwrap().exp(), 2.0 * p * (1.0 - p), 1e-15));
        let fam = union_expfam(&er, 2).unwrap();
        let pmf = fam.family.pmf(&[p]).unwrap();
        for (x, y) in pmf.as_slice().iter().zip([0.49, 0.42, 0.09]) {
            assert!(close(*x, y, 1e-15));
        }
        assert!(fam.eta_affinely_independent);
    }

    #[test]
    fn union_extreme_multiplicities() {
        let er = ErmgmModel::erdos_renyi(3, ParameterMap::DensityLogit { n: 3 }).unwrap();
        let p = 0.4f64;
        let w = Multigraph::new(3, 3, vec![3, 0, 3]).unwrap();
        let expected = p.powi(6) * (1.0 - p).powi(3);
        assert!(close(union_log_probability(&er, &[p], &w).unwrap().exp(), expected, 1e-15));
    }

    #[test]
    fn union_family_with_offset_statistic() {
        // tau_f(0) != 0 exercises the sign of the off-copies term
        let simple = ErmgmModel::homogeneous(
            3,
            1,
            vec![vec![0.7], vec![-0.4]],
            vec![2.0, 0.5],
            ParameterMap::natural(1),
        )
        .unwrap();
        let fam = union_expfam(&simple, 2).unwrap();
        let lp = fam.family.log_pmf(&[1.3]).unwrap();
        for (i, w) in StateSpace::multigraph(3, 2).unwrap().multigraphs().unwrap().enumerate() {
            assert!(close(lp[i], union_log_probability(&simple, &[1.3], &w).unwrap(), 1e-12));
        }
    }

    #[test]
    fn union_needs_simple_model() {
        assert!(union_expfam(&counting(3, 2), 2).is_err());
    }

    #[test]
    fn mle_boundaries() {
        let space = StateSpace::multigraph(4, 1).unwrap();
        let full = Multigraph::complete(4, 1).index();
        let x = Trajectory::new(64, vec![full; 5]).unwrap();
        let est = mle_density_stability(&space, &x, GraphChainKind::Density).unwrap();
        assert_eq!(est.p_hat, 1.0);
        assert!(est.boundary);
        let x = Trajectory::new(64, vec![13; 4]).unwrap();
        let est = mle_density_stability(&space, &x, GraphChainKind::Stability).unwrap();
        assert_eq!(est.p_hat, 1.0);
        let single = Trajectory::new(64, vec![13]).unwrap();
        assert!(matches!(
            mle_density_stability(&space, &single, GraphChainKind::Density),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn companion_estimate_is_identical() {
        use crate::perm::{FamilyKind, PermutationFamily};
        use crate::puniform::chain_to_iid;
        let space = StateSpace::multigraph(4, 1).unwrap();
        let x = Trajectory::new(64, vec![0, 13, 40, 63, 7, 7, 21]).unwrap();
        for (kind, chain) in [
            (FamilyKind::Identity, GraphChainKind::Density),
            (FamilyKind::Stability, GraphChainKind::Stability),
        ] {
            let fam = PermutationFamily::builtin(kind, &space).unwrap();
            let z = chain_to_iid(&x, &fam).unwrap();
            let direct = mle_density_stability(&space, &x, chain).unwrap();
            assert_eq!(mle_from_companion(&space, &z).unwrap(), direct);
        }
    }

    #[test]
    fn density_parameter_map() {
        assert_eq!(eta_density(0.5, 4).unwrap(), 0.0);
        assert!(close(eta_density(0.3, 4).unwrap(), -2.5418, 1e-4));
        for p in [0.1, 0.25, 0.4] {
            assert!(close(eta_density(p, 5).unwrap() + eta_density(1.0 - p, 5).unwrap(), 0.0, 1e-12));
        }
        assert!(eta_density(0.0, 4).is_err());
    }
}
