//! Chain simulation, time-average diagnostics and stationary laws.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{inverse_cdf, Pmf, StochasticMatrix};
use crate::models;
use crate::perm::PermutationFamily;
use crate::puniform::{iid_to_chain, Trajectory};
use crate::rng::CounterRng;

/// Largest number of power-iteration steps.
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// Default convergence tolerance for [`stationary_distribution`].
pub const STATIONARY_TOL: f64 = 1e-12;

fn check_start(size: usize, x0: usize) -> Result<()> {
    if x0 >= size {
        return Err(Error::InvalidArgument(format!(
            "initial state {x0} outside 0..{size}"
        )));
    }
    Ok(())
}

/// Simulates `steps` transitions of `P` from `x0`; step `i` uses the uniform
/// at `(replicate, i)`.
pub fn sample_chain_replicate(
    p: &StochasticMatrix,
    x0: usize,
    steps: usize,
    rng: &CounterRng,
    replicate: u64,
) -> Result<Trajectory> {
    check_start(p.size(), x0)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0);
    let mut x = x0;
    for i in 0..steps {
        x = inverse_cdf(p.row(x), rng.uniform_at(replicate, i as u64));
        states.push(x);
    }
    Trajectory::new(p.size(), states)
}

pub fn sample_chain(p: &StochasticMatrix, x0: usize, steps: usize, seed: u64) -> Result<Trajectory> {
    sample_chain_replicate(p, x0, steps, &CounterRng::new(seed), 0)
}

/// Draws `Z_1..Z_T` iid from `mu` and runs `X_{i+1} = sigma_{X_i}^{-1} Z_{i+1}`.
pub fn sample_puniform_chain_replicate(
    mu: &Pmf,
    family: &PermutationFamily,
    x0: usize,
    steps: usize,
    rng: &CounterRng,
    replicate: u64,
) -> Result<Trajectory> {
    if mu.len() != family.size() {
        return Err(Error::DimensionMismatch {
            expected: family.size(),
            found: mu.len(),
        });
    }
    check_start(mu.len(), x0)?;
    let z = (0..steps)
        .map(|i| mu.inverse_cdf(rng.uniform_at(replicate, i as u64)))
        .collect();
    iid_to_chain(x0, &Trajectory::new(mu.len(), z)?, family)
}

pub fn sample_puniform_chain(
    mu: &Pmf,
    family: &PermutationFamily,
    x0: usize,
    steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    sample_puniform_chain_replicate(mu, family, x0, steps, &CounterRng::new(seed), 0)
}

/// Running time averages of a transition statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Entry `k` averages the first `k + 1` transition statistics.
    pub running_mean: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub final_abs_error: Vec<f64>,
    /// Sample standard deviation over `sqrt(T)`; present only when the
    /// statistic was verified p-uniform, which makes the summands iid.
    pub stderr_estimate: Option<Vec<f64>>,
}

impl ConvergenceReport {
    pub fn final_mean(&self) -> &[f64] {
        self.running_mean.last().expect("nonempty")
    }

    /// Whether every coordinate lies within `k` standard errors of the target.
    pub fn within_stderrs(&self, k: f64) -> Option<bool> {
        let se = self.stderr_estimate.as_ref()?;
        Some(
            self.final_abs_error
                .iter()
                .zip(se)
                .all(|(e, s)| *e <= k * s),
        )
    }
}

/// Whether `tau(a, sigma_a^{-1} c) = tau(0, sigma_0^{-1} c)` on row 0 and on
/// every state the trajectory leaves from.
fn tau_puniform_on_rows(
    tau: &dyn Fn(usize, usize) -> Vec<f64>,
    family: &PermutationFamily,
    rows: impl IntoIterator<Item = usize>,
) -> bool {
    let inv0 = family.inverse_row(0);
    let reference: Vec<Vec<f64>> = inv0.iter().map(|&b| tau(0, b as usize)).collect();
    let mut seen = vec![false; family.size()];
    for a in rows {
        if std::mem::replace(&mut seen[a], true) {
            continue;
        }
        let inv = family.inverse_row(a);
        for (c, &b) in inv.iter().enumerate() {
            let v = tau(a, b as usize);
            if v.iter()
                .zip(&reference[c])
                .any(|(x, y)| (x - y).abs() > 1e-10 * y.abs().max(1.0))
            {
                return false;
            }
        }
    }
    true
}

/// Running means of `tau(X_i, X_{i+1})` against `target`.
///
/// With a family, `tau` is checked for p-uniformity on the rows the
/// trajectory visits (and row 0) and the iid standard error is reported;
/// without one no standard error is given.
pub fn convergence_report(
    x: &Trajectory,
    tau: &dyn Fn(usize, usize) -> Vec<f64>,
    target: &[f64],
    family: Option<&PermutationFamily>,
) -> Result<ConvergenceReport> {
    if x.transitions() == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let dim = target.len();
    let mut running_mean = Vec::with_capacity(x.transitions());
    let mut sum = vec![0.0; dim];
    let mut sum_sq = vec![0.0; dim];
    for (k, (a, b)) in x.pairs().enumerate() {
        let v = tau(a, b);
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        for j in 0..dim {
            sum[j] += v[j];
            sum_sq[j] += v[j] * v[j];
        }
        running_mean.push(sum.iter().map(|s| s / (k + 1) as f64).collect::<Vec<_>>());
    }
    let big_t = x.transitions() as f64;
    let last = running_mean.last().expect("nonempty").clone();
    let final_abs_error = last.iter().zip(target).map(|(m, t)| (m - t).abs()).collect();
    let stderr_estimate = match family {
        Some(fam) => {
            if fam.size() != x.size() {
                return Err(Error::DimensionMismatch {
                    expected: x.size(),
                    found: fam.size(),
                });
            }
            let rows = std::iter::once(0).chain(x.pairs().map(|(a, _)| a));
            if !tau_puniform_on_rows(tau, fam, rows) {
                return Err(Error::NotPuniform(
                    "statistic is not p-uniform under the supplied family".into(),
                ));
            }
            Some(
                (0..dim)
                    .map(|j| {
                        if big_t < 2.0 {
                            return 0.0;
                        }
                        let mean = sum[j] / big_t;
                        let var = ((sum_sq[j] - big_t * mean * mean) / (big_t - 1.0)).max(0.0);
                        (var / big_t).sqrt()
                    })
                    .collect(),
            )
        }
        None => None,
    };
    Ok(ConvergenceReport {
        running_mean,
        target: target.to_vec(),
        final_abs_error,
        stderr_estimate,
    })
}

/// Heuristic verdict on uniqueness of the stationary law.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    /// A second run from a point mass reached the same law.
    Likely,
    /// The second run settled on a different law.
    NotUnique,
    /// The second run did not settle.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stationary {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub uniqueness: Uniqueness,
}

fn power_iterate(p: &StochasticMatrix, mut pi: Vec<f64>, tol: f64, cap: usize) -> (Vec<f64>, f64, usize, bool) {
    let mut residual = f64::INFINITY;
    for it in 0..=cap {
        let next = p.left_multiply(&pi);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if residual <= tol {
            return (pi, residual, it, true);
        }
        pi = next;
    }
    (pi, residual, cap, false)
}

/// Power iteration from the uniform law until `||pi P - pi||_1 <= tol`.
pub fn stationary_distribution(p: &StochasticMatrix, tol: f64) -> Result<Stationary> {
    let size = p.size();
    let (pi, residual, iterations, converged) =
        power_iterate(p, vec![1.0 / size as f64; size], tol, POWER_ITERATION_CAP);
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            residual,
            last: pi,
        });
    }
    let (alt, _, _, alt_converged) = power_iterate(p, Pmf::point_mass(size, size - 1).into_vec(), tol, 10_000);
    let uniqueness = if !alt_converged {
        Uniqueness::Unknown
    } else if alt.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>() <= tol.max(1e-9) {
        Uniqueness::Likely
    } else {
        Uniqueness::NotUnique
    };
    Ok(Stationary {
        pi,
        residual,
        iterations,
        uniqueness,
    })
}

/// Closed-form checks on the stability chain over `G(n, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub p: f64,
    pub trace: f64,
    /// `2^N p^N`.
    pub expected_trace: f64,
    /// Largest deviation of an entry from `2^-N` at `p = 1/2`.
    pub half_max_deviation: f64,
    /// Whether every row's diagonal entry is its largest at `p = 0.999`.
    pub near_one_diagonal_dominant: bool,
}

/// Trace `2^N p^N` at `p`, all entries `2^-N` at `p = 1/2`, and diagonal
/// dominance near `p = 1`; a failed check is an error.
pub fn trace_and_limit_checks(n: usize, p: f64) -> Result<TraceReport> {
    let dyads = crate::space::dyad_count(n) as i32;
    let chain = |p: f64| models::stability_cef(n)?.transition_matrix(&[p]);
    let m = chain(p)?;
    let trace = m.trace();
    let expected_trace = 2f64.powi(dyads) * p.powi(dyads);
    if (trace - expected_trace).abs() > 1e-10 {
        return Err(Error::InvariantViolated(format!(
            "trace {trace} differs from 2^N p^N = {expected_trace}"
        )));
    }
    let half = chain(0.5)?;
    let level = 2f64.powi(-dyads);
    let half_max_deviation = half
        .as_slice()
        .iter()
        .map(|x| (x - level).abs())
        .fold(0.0, f64::max);
    if half_max_deviation > 1e-14 {
        return Err(Error::InvariantViolated(format!(
            "entries at p = 1/2 deviate from 2^-N by {half_max_deviation:e}"
        )));
    }
    let near = chain(0.999)?;
    let near_one_diagonal_dominant = (0..near.size()).all(|a| {
        let d = near.get(a, a);
        near.row(a).iter().enumerate().all(|(b, &x)| b == a || x < d)
    });
    if !near_one_diagonal_dominant {
        return Err(Error::InvariantViolated("diagonal does not dominate near p = 1".into()));
    }
    Ok(TraceReport {
        p,
        trace,
        expected_trace,
        half_max_deviation,
        near_one_diagonal_dominant,
    })
}
