//! Exponential families of pmfs and of transition matrices.
//!
//! A single family has masses `kappa(x) exp(eta(theta) . tau(x) - psi(theta))`.
//! A conditional family (CEF) gives every row of a transition matrix that
//! form with a shared `eta` and a row-dependent log-partition `psi(a, theta)`;
//! when `psi` does not depend on the row the CEF is Markovian (an MEF), and
//! the joint pmf of a trajectory is again an exponential family with
//! sufficient statistic `Σ tau(x_i, x_{i+1})`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{PairTable, Pmf, StochasticMatrix};
use crate::numeric::{dot, log_sum_exp};
use crate::perm::PermutationFamily;
use crate::puniform::{check_puniform, check_puniform_table, Trajectory, DEFAULT_MATCH_TOL};

/// Relative tolerance for comparing row log-partitions.
pub const DEFAULT_PSI_TOL: f64 = 1e-9;

/// Largest spread allowed between per-row mean parameters of an MEF.
pub const ROW_MEAN_TOL: f64 = 1e-10;

/// Step of the central finite difference used for gradient checks.
pub const GRADIENT_STEP: f64 = 1e-5;

/// Agreement required between a finite-difference gradient and the mean.
pub const GRADIENT_TOL: f64 = 1e-6;

/// One `(theta, eta(theta))` sample of a tabulated parameter map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaSample {
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

/// The parameter function `eta : Theta -> R^l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterMap {
    /// `eta(theta) = theta` on `R^dim`.
    Natural {
        #[serde(default = "one")]
        dim: usize,
    },
    /// `eta(theta) = log theta` on `(0, inf)`.
    ScalarLog,
    /// `eta(p) = (n - 1) log(p / (1 - p))` on `(0, 1)`.
    DensityLogit { n: usize },
    /// Finitely many samples; evaluation outside them is an error.
    Table { samples: Vec<EtaSample> },
}

fn one() -> usize {
    1
}

impl ParameterMap {
    pub fn natural(dim: usize) -> Self {
        Self::Natural { dim }
    }

    /// Dimension `d` of `theta`.
    pub fn param_dim(&self) -> usize {
        match self {
            Self::Natural { dim } => *dim,
            Self::ScalarLog | Self::DensityLogit { .. } => 1,
            Self::Table { samples } => samples.first().map_or(0, |s| s.theta.len()),
        }
    }

    /// Dimension `l` of `eta(theta)`.
    pub fn stat_dim(&self) -> usize {
        match self {
            Self::Natural { dim } => *dim,
            Self::ScalarLog | Self::DensityLogit { .. } => 1,
            Self::Table { samples } => samples.first().map_or(0, |s| s.eta.len()),
        }
    }

    pub fn is_natural(&self) -> bool {
        matches!(self, Self::Natural { .. })
    }

    pub fn in_domain(&self, theta: &[f64]) -> bool {
        if theta.len() != self.param_dim() || theta.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self {
            Self::Natural { .. } => true,
            Self::ScalarLog => theta[0] > 0.0,
            Self::DensityLogit { .. } => theta[0] > 0.0 && theta[0] < 1.0,
            Self::Table { samples } => samples.iter().any(|s| s.theta == theta),
        }
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if !self.in_domain(theta) {
            return Err(Error::OutOfDomain(theta.to_vec()));
        }
        Ok(match self {
            Self::Natural { .. } => theta.to_vec(),
            Self::ScalarLog => vec![theta[0].ln()],
            Self::DensityLogit { n } => {
                let p = theta[0];
                vec![(*n as f64 - 1.0) * (p / (1.0 - p)).ln()]
            }
            Self::Table { samples } => samples
                .iter()
                .find(|s| s.theta == theta)
                .map(|s| s.eta.clone())
                .expect("domain checked"),
        })
    }

    /// `d eta / d theta` for the scalar closed forms.
    pub fn scalar_derivative(&self, theta: f64) -> Option<f64> {
        match self {
            Self::Natural { dim: 1 } => Some(1.0),
            Self::ScalarLog => Some(1.0 / theta),
            Self::DensityLogit { n } => Some((*n as f64 - 1.0) / (theta * (1.0 - theta))),
            _ => None,
        }
    }

    /// Five or more probe points spread over the domain.
    pub fn default_probes(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Natural { dim: 1 } => [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|&x| vec![x]).collect(),
            Self::Natural { dim } => {
                let mut probes = vec![vec![0.0; *dim]];
                for j in 0..*dim {
                    let mut e = vec![0.0; *dim];
                    e[j] = 1.0;
                    probes.push(e);
                }
                probes.push(vec![-1.0; *dim]);
                probes.push(vec![0.5; *dim]);
                probes
            }
            Self::ScalarLog => [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|&x| vec![x]).collect(),
            Self::DensityLogit { .. } => [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&x| vec![x]).collect(),
            Self::Table { samples } => samples.iter().map(|s| s.theta.clone()).collect(),
        }
    }
}

/// An exponential family of pmfs on `0..size`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFamilySpec {
    kappa: Vec<f64>,
    tau: Vec<f64>,
    dim: usize,
    eta: ParameterMap,
}

impl ExpFamilySpec {
    /// `tau` is row-major with `dim` entries per state.
    pub fn new(kappa: Vec<f64>, tau: Vec<f64>, dim: usize, eta: ParameterMap) -> Result<Self> {
        if kappa.is_empty() || dim == 0 {
            return Err(Error::InvalidArgument("empty family".into()));
        }
        if tau.len() != kappa.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: kappa.len() * dim,
                found: tau.len(),
            });
        }
        if eta.stat_dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: eta.stat_dim(),
            });
        }
        if kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::InvalidArgument("carrier must be finite and nonnegative".into()));
        }
        if kappa.iter().all(|&k| k == 0.0) {
            return Err(Error::UndefinedFamily("carrier is identically zero".into()));
        }
        if tau.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("statistic must be finite".into()));
        }
        Ok(Self {
            kappa,
            tau,
            dim,
            eta,
        })
    }

    /// Tabulates `f(x) = (kappa(x), tau(x))` over `0..size`.
    pub fn from_fn(
        size: usize,
        dim: usize,
        eta: ParameterMap,
        mut f: impl FnMut(usize, &mut [f64]) -> f64,
    ) -> Result<Self> {
        let mut kappa = Vec::with_capacity(size);
        let mut tau = vec![0.0; size * dim];
        for x in 0..size {
            kappa.push(f(x, &mut tau[x * dim..(x + 1) * dim]));
        }
        Self::new(kappa, tau, dim, eta)
    }

    pub fn size(&self) -> usize {
        self.kappa.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> &ParameterMap {
        &self.eta
    }

    pub fn kappa(&self, x: usize) -> f64 {
        self.kappa[x]
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappa
    }

    pub fn tau(&self, x: usize) -> &[f64] {
        &self.tau[x * self.dim..(x + 1) * self.dim]
    }

    pub fn taus(&self) -> &[f64] {
        &self.tau
    }

    /// `log kappa(x) + eta . tau(x)` for every state; `-inf` where `kappa = 0`.
    fn log_weights(&self, eta: &[f64]) -> Vec<f64> {
        (0..self.size())
            .map(|x| {
                let k = self.kappa[x];
                if k == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    k.ln() + dot(eta, self.tau(x))
                }
            })
            .collect()
    }

    /// `psi(theta) = log Σ kappa(x) exp(eta(theta) . tau(x))`.
    pub fn log_partition(&self, theta: &[f64]) -> Result<f64> {
        let eta = self.eta.evaluate(theta)?;
        Ok(log_sum_exp(self.log_weights(&eta)))
    }

    /// Log-masses `log kappa(x) + eta . tau(x) - psi`.
    pub fn log_pmf(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let eta = self.eta.evaluate(theta)?;
        let w = self.log_weights(&eta);
        let psi = log_sum_exp(w.iter().copied());
        Ok(w.into_iter().map(|x| x - psi).collect())
    }

    pub fn pmf(&self, theta: &[f64]) -> Result<Pmf> {
        Pmf::new(self.log_pmf(theta)?.into_iter().map(f64::exp).collect())
    }

    /// `E[tau]` under the family at `theta`.
    pub fn mean(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let p = self.pmf(theta)?;
        let mut m = vec![0.0; self.dim];
        for x in 0..self.size() {
            for (mk, tk) in m.iter_mut().zip(self.tau(x)) {
                *mk += p[x] * tk;
            }
        }
        Ok(m)
    }

    /// Central finite-difference gradient of `psi` in `theta`.
    pub fn log_partition_gradient_fd(&self, theta: &[f64], step: f64) -> Result<Vec<f64>> {
        central_difference(|th| self.log_partition(th), theta, step)
    }
}

pub(crate) fn central_difference(
    f: impl Fn(&[f64]) -> Result<f64>,
    theta: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    (0..theta.len())
        .map(|k| {
            let mut hi = theta.to_vec();
            let mut lo = theta.to_vec();
            hi[k] += step;
            lo[k] -= step;
            Ok((f(&hi)? - f(&lo)?) / (2.0 * step))
        })
        .collect()
}

/// A conditional exponential family of transition matrices.
///
/// The carrier and statistic are tabulated for rows `0..rows` and all
/// columns; `rows < size` describes the family restricted to its first
/// states (enough for checks that only read rows).
#[derive(Clone, Debug, PartialEq)]
pub struct CefSpec {
    kappa: PairTable,
    tau: PairTable,
    eta: ParameterMap,
}

impl CefSpec {
    pub fn new(kappa: PairTable, tau: PairTable, eta: ParameterMap) -> Result<Self> {
        if kappa.dim() != 1 {
            return Err(Error::InvalidArgument("carrier must be scalar".into()));
        }
        if kappa.rows() != tau.rows() || kappa.cols() != tau.cols() {
            return Err(Error::DimensionMismatch {
                expected: kappa.rows() * kappa.cols(),
                found: tau.rows() * tau.cols(),
            });
        }
        if eta.stat_dim() != tau.dim() {
            return Err(Error::DimensionMismatch {
                expected: tau.dim(),
                found: eta.stat_dim(),
            });
        }
        if kappa.values().iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::InvalidArgument("carrier must be finite and nonnegative".into()));
        }
        if tau.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("statistic must be finite".into()));
        }
        Ok(Self { kappa, tau, eta })
    }

    /// Tabulates `f(a, b) = (kappa(a, b), tau(a, b))`.
    pub fn from_fn(
        rows: usize,
        size: usize,
        dim: usize,
        eta: ParameterMap,
        mut f: impl FnMut(usize, usize, &mut [f64]) -> f64,
    ) -> Result<Self> {
        let mut kappa = Vec::with_capacity(rows * size);
        let tau = PairTable::from_fn(rows, size, dim, |a, b, out| kappa.push(f(a, b, out)));
        Self::new(PairTable::new(rows, size, 1, kappa)?, tau, eta)
    }

    pub fn size(&self) -> usize {
        self.kappa.cols()
    }

    pub fn rows(&self) -> usize {
        self.kappa.rows()
    }

    pub fn dim(&self) -> usize {
        self.tau.dim()
    }

    pub fn eta(&self) -> &ParameterMap {
        &self.eta
    }

    pub fn kappa(&self) -> &PairTable {
        &self.kappa
    }

    pub fn tau(&self) -> &PairTable {
        &self.tau
    }

    /// The same carrier and statistic under another parameter map.
    pub fn with_eta(&self, eta: ParameterMap) -> Result<Self> {
        Self::new(self.kappa.clone(), self.tau.clone(), eta)
    }

    /// The same family on its first `rows` rows.
    pub fn restrict_rows(&self, rows: usize) -> Result<Self> {
        Ok(Self {
            kappa: self.kappa.truncate_rows(rows)?,
            tau: self.tau.truncate_rows(rows)?,
            eta: self.eta.clone(),
        })
    }

    fn row_log_weights(&self, a: usize, eta: &[f64]) -> Vec<f64> {
        (0..self.size())
            .map(|b| {
                let k = self.kappa.scalar(a, b);
                if k == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    k.ln() + dot(eta, self.tau.get(a, b))
                }
            })
            .collect()
    }

    /// `psi(a, theta)` for every row.
    pub fn row_log_partitions(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let eta = self.eta.evaluate(theta)?;
        (0..self.rows())
            .map(|a| {
                let psi = log_sum_exp(self.row_log_weights(a, &eta));
                if psi == f64::NEG_INFINITY {
                    Err(Error::UndefinedFamily(format!("row {a} has an all-zero carrier")))
                } else {
                    Ok(psi)
                }
            })
            .collect()
    }

    /// Row-normalized probabilities of row `a`.
    fn row_probabilities(&self, a: usize, eta: &[f64]) -> Result<Vec<f64>> {
        let w = self.row_log_weights(a, eta);
        let psi = log_sum_exp(w.iter().copied());
        if psi == f64::NEG_INFINITY {
            return Err(Error::UndefinedFamily(format!("row {a} has an all-zero carrier")));
        }
        Ok(w.into_iter().map(|x| (x - psi).exp()).collect())
    }

    /// Row `a` of the realized matrix; works on row-restricted families.
    pub fn row_pmf(&self, a: usize, theta: &[f64]) -> Result<Pmf> {
        if a >= self.rows() {
            return Err(Error::InvalidArgument(format!("no row {a}")));
        }
        let eta = self.eta.evaluate(theta)?;
        Pmf::new(self.row_probabilities(a, &eta)?)
    }

    /// `P(a, b) = kappa(a, b) exp(eta . tau(a, b) - psi(a, theta))`.
    pub fn transition_matrix(&self, theta: &[f64]) -> Result<StochasticMatrix> {
        if self.rows() != self.size() {
            return Err(Error::InvalidArgument(format!(
                "family has {} of {} rows; no full transition matrix",
                self.rows(),
                self.size()
            )));
        }
        let eta = self.eta.evaluate(theta)?;
        let mut data = Vec::with_capacity(self.size() * self.size());
        for a in 0..self.rows() {
            data.extend(self.row_probabilities(a, &eta)?);
        }
        StochasticMatrix::new(self.size(), data)
    }
}

/// Raw row sums at one probe.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeValidation {
    pub theta: Vec<f64>,
    /// `Σ_b kappa(a, b) exp(eta . tau(a, b))` per row.
    pub raw_sums: Vec<f64>,
    /// Rows whose carrier is identically zero; they cannot be normalized.
    pub zero_rows: Vec<usize>,
    /// Rows whose raw sum differs from row 0's.
    pub mismatched_rows: Vec<usize>,
}

impl ProbeValidation {
    pub fn shared_normalizer(&self) -> bool {
        self.mismatched_rows.is_empty() && self.zero_rows.is_empty()
    }
}

/// Row sums of a CEF at each probe, and where they disagree.
pub fn validate_cef(cef: &CefSpec, probes: &[Vec<f64>]) -> Result<Vec<ProbeValidation>> {
    probes
        .iter()
        .map(|theta| {
            let eta = cef.eta.evaluate(theta)?;
            let mut zero_rows = Vec::new();
            let psi: Vec<f64> = (0..cef.rows())
                .map(|a| {
                    let psi = log_sum_exp(cef.row_log_weights(a, &eta));
                    if psi == f64::NEG_INFINITY {
                        zero_rows.push(a);
                    }
                    psi
                })
                .collect();
            let mismatched_rows = (1..cef.rows())
                .filter(|&a| !psi_close(psi[a], psi[0], DEFAULT_PSI_TOL))
                .collect();
            Ok(ProbeValidation {
                theta: theta.clone(),
                raw_sums: psi.iter().map(|p| p.exp()).collect(),
                zero_rows,
                mismatched_rows,
            })
        })
        .collect()
}

fn psi_close(a: f64, b: f64, tol: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Whether every row shares the log-partition at every probe.
pub fn mef_check(cef: &CefSpec, probes: &[Vec<f64>], tol: f64) -> Result<bool> {
    mef_violation(cef, probes, tol).map(|v| v.is_none())
}

fn mef_violation(cef: &CefSpec, probes: &[Vec<f64>], tol: f64) -> Result<Option<String>> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("no probes".into()));
    }
    for theta in probes {
        let psi = match cef.row_log_partitions(theta) {
            Ok(psi) => psi,
            Err(Error::UndefinedFamily(msg)) => return Ok(Some(msg)),
            Err(e) => return Err(e),
        };
        if let Some(a) = (1..psi.len()).find(|&a| !psi_close(psi[a], psi[0], tol)) {
            return Ok(Some(format!(
                "psi({a}, {theta:?}) = {} differs from psi(0, {theta:?}) = {}",
                psi[a], psi[0]
            )));
        }
    }
    Ok(None)
}

/// A CEF together with whether its rows were verified to share `psi`.
#[derive(Clone, Debug, PartialEq)]
pub struct MefSpec {
    cef: CefSpec,
    verified_mef: bool,
}

impl MefSpec {
    /// Wraps a CEF without checking it.
    pub fn unverified(cef: CefSpec) -> Self {
        Self {
            cef,
            verified_mef: false,
        }
    }

    /// Runs [`mef_check`] and records the outcome; fails if it does not hold.
    pub fn verify(cef: CefSpec, probes: &[Vec<f64>], tol: f64) -> Result<Self> {
        match mef_violation(&cef, probes, tol)? {
            None => Ok(Self {
                cef,
                verified_mef: true,
            }),
            Some(why) => Err(Error::NotMef(why)),
        }
    }

    /// [`Self::verify`] with the parameter map's default probes.
    pub fn verify_default(cef: CefSpec) -> Result<Self> {
        let probes = cef.eta.default_probes();
        Self::verify(cef, &probes, DEFAULT_PSI_TOL)
    }

    pub fn cef(&self) -> &CefSpec {
        &self.cef
    }

    pub fn is_verified(&self) -> bool {
        self.verified_mef
    }

    fn require_verified(&self) -> Result<()> {
        if self.verified_mef {
            Ok(())
        } else {
            Err(Error::NotMef(
                "family has not been verified to share a log-partition across rows".into(),
            ))
        }
    }

    /// The shared log-partition `psi(theta)`.
    pub fn log_partition(&self, theta: &[f64]) -> Result<f64> {
        self.require_verified()?;
        Ok(self.cef.row_log_partitions(theta)?[0])
    }
}

/// Per-row value sets of a scalar statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct RowValueSets {
    pub sets: Vec<Vec<f64>>,
    /// Rows `(0, a)` whose sets differ, if any.
    pub witness: Option<(usize, usize)>,
}

impl RowValueSets {
    pub fn all_equal(&self) -> bool {
        self.witness.is_none()
    }
}

/// `{tau(a, b) : b}` for every row; unequal sets certify a scalar CEF is not
/// an MEF (whenever `eta` takes a nonzero value).
pub fn gani_row_value_sets(cef: &CefSpec) -> Result<RowValueSets> {
    row_value_sets(cef.tau())
}

/// [`gani_row_value_sets`] on a bare scalar table.
pub fn row_value_sets(tau: &PairTable) -> Result<RowValueSets> {
    if tau.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "row value sets need a scalar statistic, got dimension {}",
            tau.dim()
        )));
    }
    const TOL: f64 = 1e-12;
    let sets: Vec<Vec<f64>> = (0..tau.rows())
        .map(|a| {
            let mut vals: Vec<f64> = (0..tau.cols()).map(|b| tau.scalar(a, b)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup_by(|x, y| (*x - *y).abs() <= TOL * y.abs().max(1.0));
            vals
        })
        .collect();
    let same = |x: &[f64], y: &[f64]| {
        x.len() == y.len()
            && x.iter().zip(y).all(|(u, v)| (u - v).abs() <= TOL * v.abs().max(1.0))
    };
    let witness = (1..sets.len())
        .find(|&a| !same(&sets[a], &sets[0]))
        .map(|a| (0, a));
    Ok(RowValueSets { sets, witness })
}

/// Sparse transition counts `N(a, b)` of a trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionCounts {
    size: usize,
    counts: BTreeMap<(usize, usize), u64>,
}

impl TransitionCounts {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts.get(&(a, b)).copied().unwrap_or(0)
    }

    /// Nonzero entries in `(a, b)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of transitions.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `N 1`: visits to each state during times `0..T`.
    pub fn visits(&self) -> Vec<u64> {
        let mut v = vec![0; self.size];
        for (&(a, _), &c) in &self.counts {
            v[a] += c;
        }
        v
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        let mut d = vec![vec![0; self.size]; self.size];
        for (&(a, b), &c) in &self.counts {
            d[a][b] = c;
        }
        d
    }
}

pub fn transition_counts(x: &Trajectory) -> TransitionCounts {
    let mut counts = BTreeMap::new();
    for pair in x.pairs() {
        *counts.entry(pair).or_insert(0) += 1;
    }
    TransitionCounts {
        size: x.size(),
        counts,
    }
}

/// A joint log-probability; impossible trajectories carry `-inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointLogPmf {
    pub value: f64,
    pub impossible: bool,
}

impl JointLogPmf {
    fn finite(value: f64) -> Self {
        Self {
            value,
            impossible: false,
        }
    }

    fn impossible() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            impossible: true,
        }
    }
}

/// `Σ N(a, b) log P(a, b)` with `0 log 0 = 0`.
pub fn joint_log_pmf_from_counts(p: &StochasticMatrix, n: &TransitionCounts) -> Result<JointLogPmf> {
    if n.size() != p.size() {
        return Err(Error::DimensionMismatch {
            expected: p.size(),
            found: n.size(),
        });
    }
    let mut total = 0.0;
    for ((a, b), c) in n.iter() {
        let pab = p.get(a, b);
        if pab == 0.0 {
            return Ok(JointLogPmf::impossible());
        }
        total += c as f64 * pab.ln();
    }
    Ok(JointLogPmf::finite(total))
}

/// Joint log-pmf of `x_1..x_T` given `x_0` through the MEF's exponential
/// family form `eta . Σ tau(x_i, x_{i+1}) - T psi + Σ log kappa(x_i, x_{i+1})`.
pub fn mef_joint_log_pmf(mef: &MefSpec, theta: &[f64], x: &Trajectory) -> Result<JointLogPmf> {
    mef.require_verified()?;
    if x.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let cef = mef.cef();
    if x.size() != cef.size() {
        return Err(Error::DimensionMismatch {
            expected: cef.size(),
            found: x.size(),
        });
    }
    if let Some((a, _)) = x.pairs().find(|&(a, _)| a >= cef.rows()) {
        return Err(Error::InvalidArgument(format!(
            "trajectory leaves state {a}, which has no row in this family"
        )));
    }
    let eta = cef.eta().evaluate(theta)?;
    let psi = mef.log_partition(theta)?;
    let mut stat = vec![0.0; cef.dim()];
    let mut log_kappa = 0.0;
    for (a, b) in x.pairs() {
        let k = cef.kappa().scalar(a, b);
        if k == 0.0 {
            return Ok(JointLogPmf::impossible());
        }
        log_kappa += k.ln();
        for (s, t) in stat.iter_mut().zip(cef.tau().get(a, b)) {
            *s += t;
        }
    }
    Ok(JointLogPmf::finite(
        dot(&eta, &stat) - x.transitions() as f64 * psi + log_kappa,
    ))
}

/// Mean parameter of an MEF and the per-row conditional expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanParameter {
    pub mean: Vec<f64>,
    pub per_row: Vec<Vec<f64>>,
    /// Largest deviation from the finite-difference route, when one applies.
    pub gradient_deviation: Option<f64>,
}

/// `E[tau(X_t, X_{t+1})] = Σ_b tau(a, b) P(a, b)`, identical for every row
/// of an MEF, cross-checked against `J^{-1} ∇psi` for the closed-form maps.
pub fn mean_parameter(mef: &MefSpec, theta: &[f64]) -> Result<MeanParameter> {
    mef.require_verified()?;
    let cef = mef.cef();
    let eta = cef.eta().evaluate(theta)?;
    let per_row = (0..cef.rows())
        .map(|a| {
            let p = cef.row_probabilities(a, &eta)?;
            let mut m = vec![0.0; cef.dim()];
            for (b, pb) in p.iter().enumerate() {
                for (mk, tk) in m.iter_mut().zip(cef.tau().get(a, b)) {
                    *mk += pb * tk;
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = per_row[0].clone();
    for (a, row) in per_row.iter().enumerate() {
        for (x, y) in row.iter().zip(&mean) {
            if (x - y).abs() > ROW_MEAN_TOL * y.abs().max(1.0) {
                return Err(Error::NotMef(format!(
                    "row {a} expects {row:?} but row 0 expects {mean:?}"
                )));
            }
        }
    }
    let grad = central_difference(|th| mef.log_partition(th), theta, GRADIENT_STEP)?;
    let fd_mean: Option<Vec<f64>> = match cef.eta() {
        ParameterMap::Natural { .. } => Some(grad),
        map => map.scalar_derivative(theta[0]).map(|j| vec![grad[0] / j]),
    };
    let gradient_deviation = fd_mean.map(|fd| {
        fd.iter()
            .zip(&mean)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    });
    if let Some(dev) = gradient_deviation {
        if dev > GRADIENT_TOL {
            return Err(Error::InvariantViolated(format!(
                "mean parameter {mean:?} deviates from J^-1 grad psi by {dev:e}"
            )));
        }
    }
    Ok(MeanParameter {
        mean,
        per_row,
        gradient_deviation,
    })
}

/// Family of common rows `mu_theta(b) = kappa(0, sigma_0^{-1} b) exp(...)`
/// of a p-uniform CEF.
pub fn puniform_cef_to_expfam(cef: &CefSpec, family: &PermutationFamily) -> Result<ExpFamilySpec> {
    if family.size() != cef.size() {
        return Err(Error::DimensionMismatch {
            expected: cef.size(),
            found: family.size(),
        });
    }
    for theta in cef.eta().default_probes() {
        let p = cef.transition_matrix(&theta)?;
        let check = check_puniform(&p, family, DEFAULT_MATCH_TOL)?;
        if let Some((a, b, c)) = check.violation {
            return Err(Error::NotPuniform(format!(
                "realized matrix at {theta:?} violates p-uniformity at ({a}, {b}, {c})"
            )));
        }
    }
    let size = cef.size();
    let dim = cef.dim();
    let inv0 = family.inverse_row(0);
    let kappa: Vec<f64> = (0..size).map(|b| cef.kappa().scalar(0, inv0[b] as usize)).collect();
    let mut tau = Vec::with_capacity(size * dim);
    for b in 0..size {
        tau.extend_from_slice(cef.tau().get(0, inv0[b] as usize));
    }
    const TOL: f64 = 1e-10;
    for a in 1..size {
        let inv = family.inverse_row(a);
        for b in 0..size {
            let src = inv[b] as usize;
            let k = cef.kappa().scalar(a, src);
            if (k - kappa[b]).abs() > TOL * kappa[b].abs().max(1.0) {
                return Err(Error::NotPuniform(format!(
                    "carrier row {a} disagrees with row 0 at state {b}"
                )));
            }
            if k == 0.0 {
                continue;
            }
            let t = cef.tau().get(a, src);
            if t.iter().zip(&tau[b * dim..(b + 1) * dim]).any(|(x, y)| (x - y).abs() > TOL * y.abs().max(1.0)) {
                return Err(Error::NotPuniform(format!(
                    "statistic row {a} disagrees with row 0 at state {b}"
                )));
            }
        }
    }
    ExpFamilySpec::new(kappa, tau, dim, cef.eta().clone())
}

/// The MEF `P(a, b) = kappa(sigma_a b) exp(eta . tau(sigma_a b) - psi)`.
pub fn expfam_to_mef(fam: &ExpFamilySpec, family: &PermutationFamily) -> Result<MefSpec> {
    if family.size() != fam.size() {
        return Err(Error::DimensionMismatch {
            expected: fam.size(),
            found: family.size(),
        });
    }
    let size = fam.size();
    let cef = CefSpec::from_fn(size, size, fam.dim(), fam.eta().clone(), |a, b, out| {
        let s = family.apply(a, b);
        out.copy_from_slice(fam.tau(s));
        fam.kappa(s)
    })?;
    MefSpec::verify_default(cef)
}

/// Which pieces of a CEF are p-uniform under a family.
#[derive(Clone, Debug, PartialEq)]
pub struct PuniformityReport {
    pub kappa_puniform: bool,
    pub kappa_zero_pattern_puniform: bool,
    /// One entry per coordinate of `tau`.
    pub tau_puniform: Vec<bool>,
    /// Realized matrix at each probe.
    pub matrix_puniform: Vec<bool>,
    pub is_mef: bool,
    pub kappa_never_zero: bool,
    pub eta_affinely_independent: bool,
}

/// Checks `kappa`, each coordinate of `tau`, and the realized matrices for
/// p-uniformity under `family`.
///
/// Enforced as hard failures: (1) `kappa` and `tau` p-uniform imply every
/// realized matrix is; (2) for an MEF whose realized matrices are all
/// p-uniform, the zero pattern of `kappa` is p-uniform, and when the probed
/// `eta` values are affinely independent so is `kappa`, and with `kappa`
/// never zero also `tau`.
pub fn kappa_tau_puniformity(cef: &CefSpec, family: &PermutationFamily) -> Result<PuniformityReport> {
    const TOL: f64 = 1e-10;
    let kappa_puniform = check_puniform_table(cef.kappa(), family, TOL)?.holds();
    let zero_pattern = PairTable::from_fn(cef.rows(), cef.size(), 1, |a, b, out| {
        out[0] = f64::from(u8::from(cef.kappa().scalar(a, b) == 0.0));
    });
    let kappa_zero_pattern_puniform = check_puniform_table(&zero_pattern, family, 0.0)?.holds();
    let tau_puniform = (0..cef.dim())
        .map(|k| Ok(check_puniform_table(&cef.tau().coordinate(k), family, TOL)?.holds()))
        .collect::<Result<Vec<_>>>()?;
    let probes = cef.eta().default_probes();
    let matrix_puniform = probes
        .iter()
        .map(|theta| {
            let p = cef.transition_matrix(theta)?;
            Ok(check_puniform(&p, family, DEFAULT_MATCH_TOL)?.holds())
        })
        .collect::<Result<Vec<_>>>()?;
    let is_mef = mef_check(cef, &probes, DEFAULT_PSI_TOL)?;
    let kappa_never_zero = cef.kappa().values().iter().all(|&k| k > 0.0);
    let eta_samples = probes
        .iter()
        .map(|th| cef.eta().evaluate(th))
        .collect::<Result<Vec<_>>>()?;
    let eta_affinely_independent = affinely_independent_entries(&eta_samples);

    let all_tau = tau_puniform.iter().all(|&b| b);
    let all_matrix = matrix_puniform.iter().all(|&b| b);
    if kappa_puniform && all_tau && !all_matrix {
        return Err(Error::InvariantViolated(
            "carrier and statistic are p-uniform but a realized matrix is not".into(),
        ));
    }
    if is_mef && all_matrix {
        if !kappa_zero_pattern_puniform {
            return Err(Error::InvariantViolated(
                "p-uniform MEF with a carrier whose zeros are not p-uniform".into(),
            ));
        }
        if eta_affinely_independent && !kappa_puniform {
            return Err(Error::InvariantViolated(
                "p-uniform MEF with affinely independent eta but non-p-uniform carrier".into(),
            ));
        }
        if eta_affinely_independent && kappa_never_zero && !all_tau {
            return Err(Error::InvariantViolated(
                "p-uniform MEF with positive carrier and affinely independent eta but non-p-uniform statistic".into(),
            ));
        }
    }
    Ok(PuniformityReport {
        kappa_puniform,
        kappa_zero_pattern_puniform,
        tau_puniform,
        matrix_puniform,
        is_mef,
        kappa_never_zero,
        eta_affinely_independent,
    })
}

/// Whether the samples contain `l + 1` affinely independent vectors, i.e.
/// `rank {v_i - v_0} = l` with singular values above `1e-10` of the largest.
pub fn affinely_independent_entries(samples: &[Vec<f64>]) -> bool {
    let Some(first) = samples.first() else {
        return false;
    };
    let dim = first.len();
    if samples.len() < dim + 1 || samples.iter().any(|s| s.len() != dim) {
        return false;
    }
    let m = DMatrix::from_fn(samples.len() - 1, dim, |i, j| samples[i + 1][j] - first[j]);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return false;
    }
    sv.iter().filter(|&&s| s > 1e-10 * max).count() == dim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::perm::FamilyKind;
    use crate::space::StateSpace;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_state_family_has_zero_log_partition() {
        let f = ExpFamilySpec::new(vec![1.0], vec![0.0], 1, ParameterMap::natural(1)).unwrap();
        assert_eq!(f.log_partition(&[3.0]).unwrap(), 0.0);
        assert_eq!(f.pmf(&[3.0]).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn zero_carrier_is_undefined() {
        assert!(matches!(
            ExpFamilySpec::new(vec![0.0, 0.0], vec![0.0, 1.0], 1, ParameterMap::natural(1)),
            Err(Error::UndefinedFamily(_))
        ));
    }

    #[test]
    fn erdos_renyi_log_partition_closed_form() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let er = models::erdos_renyi_family(&space, ParameterMap::natural(1)).unwrap();
        for g in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let expected = 3.0 * (1.0 + (g / 2.0f64).exp()).ln();
            assert!(close(er.log_partition(&[g]).unwrap(), expected, 1e-13));
        }
        let uniform = er.pmf(&[0.0]).unwrap();
        assert!(uniform.as_slice().iter().all(|&p| close(p, 0.125, 1e-15)));
    }

    #[test]
    fn erdos_renyi_logit_masses() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let er = models::erdos_renyi_family(&space, ParameterMap::DensityLogit { n: 3 }).unwrap();
        let pmf = er.pmf(&[0.3]).unwrap();
        for (i, g) in space.multigraphs().unwrap().enumerate() {
            let e = g.edge_count() as i32;
            assert!(close(pmf[i], 0.3f64.powi(e) * 0.7f64.powi(3 - e), 1e-15));
        }
    }

    #[test]
    fn gani_row_zero_as_a_family() {
        let f = ExpFamilySpec::new(
            vec![2.0, 1.0, 1.0],
            vec![1.0, 1.0, 3.0],
            1,
            ParameterMap::ScalarLog,
        )
        .unwrap();
        for th in [0.5f64, 1.0, 2.0, 3.7] {
            let expected = (3.0 * th + th * th * th).ln();
            assert!(close(f.log_partition(&[th]).unwrap(), expected, 1e-14));
        }
        let p = f.pmf(&[1.0]).unwrap();
        assert!(close(p[0], 0.5, 1e-15) && close(p[1], 0.25, 1e-15) && close(p[2], 0.25, 1e-15));
        assert!(matches!(f.log_partition(&[0.0]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn gani_transition_rows_at_one() {
        let cef = models::gani_cef();
        let p = cef.restrict_rows(2).unwrap();
        let eta = [0.0];
        let r0 = p.row_probabilities(0, &eta).unwrap();
        let r1 = p.row_probabilities(1, &eta).unwrap();
        for (x, y) in r0.iter().zip([0.5, 0.25, 0.25]) {
            assert!(close(*x, y, 1e-15));
        }
        for (x, y) in r1.iter().zip([1.0 / 12.0, 1.0 / 6.0, 0.75]) {
            assert!(close(*x, y, 1e-15));
        }
        // the partial family has no full matrix
        assert!(p.transition_matrix(&[1.0]).is_err());
    }

    #[test]
    fn constant_statistic_gives_uniform_rows() {
        let cef = CefSpec::from_fn(4, 4, 1, ParameterMap::natural(1), |_, _, t| {
            t[0] = 0.0;
            1.0
        })
        .unwrap();
        let p = cef.transition_matrix(&[1.3]).unwrap();
        assert!(p.as_slice().iter().all(|&x| close(x, 0.25, 1e-15)));
        let v = validate_cef(&cef, &[vec![1.3]]).unwrap();
        assert!(v[0].raw_sums.iter().all(|&s| close(s, 4.0, 1e-12)));
        assert!(v[0].shared_normalizer());
    }

    #[test]
    fn density_rows_are_uniform_at_one_half() {
        let cef = models::density_cef(3).unwrap();
        let p = cef.transition_matrix(&[0.5]).unwrap();
        assert!(p.as_slice().iter().all(|&x| close(x, 0.125, 1e-15)));
    }

    #[test]
    fn validate_flags_gani_third_row() {
        let cef = models::gani_cef();
        let v = validate_cef(&cef, &[vec![2.0]]).unwrap();
        assert!(close(v[0].raw_sums[0], 14.0, 1e-12));
        assert!(close(v[0].raw_sums[1], 14.0, 1e-12));
        assert!(close(v[0].raw_sums[2], 15.5, 1e-12));
        assert_eq!(v[0].mismatched_rows, vec![2]);
        // they coincide at one
        let at_one = validate_cef(&cef, &[vec![1.0]]).unwrap();
        assert!(at_one[0].shared_normalizer());
    }

    #[test]
    fn validate_reports_density_normalizer() {
        let cef = models::density_cef(3).unwrap().with_eta(ParameterMap::natural(1)).unwrap();
        let g = 0.7f64;
        let v = validate_cef(&cef, &[vec![g]]).unwrap();
        let expected = (1.0 + (g / 2.0).exp()).powi(3);
        assert!(v[0].raw_sums.iter().all(|&s| close(s, expected, 1e-12)));
    }

    #[test]
    fn zero_rows_are_flagged() {
        let cef = CefSpec::from_fn(2, 2, 1, ParameterMap::natural(1), |a, _, t| {
            t[0] = 0.0;
            if a == 1 { 0.0 } else { 1.0 }
        })
        .unwrap();
        let v = validate_cef(&cef, &[vec![0.0]]).unwrap();
        assert_eq!(v[0].zero_rows, vec![1]);
        assert!(!mef_check(&cef, &[vec![0.0]], DEFAULT_PSI_TOL).unwrap());
        assert!(cef.transition_matrix(&[0.0]).is_err());
    }

    #[test]
    fn mef_checks() {
        let gani = models::gani_cef();
        let probes = ParameterMap::ScalarLog.default_probes();
        assert!(mef_check(&gani.restrict_rows(2).unwrap(), &probes, DEFAULT_PSI_TOL).unwrap());
        assert!(!mef_check(&gani, &probes, DEFAULT_PSI_TOL).unwrap());
        let column_only = CefSpec::from_fn(3, 3, 1, ParameterMap::natural(1), |_, b, t| {
            t[0] = b as f64 * 0.7;
            1.0
        })
        .unwrap();
        assert!(mef_check(&column_only, &[vec![-1.0], vec![2.0]], DEFAULT_PSI_TOL).unwrap());
        assert!(mef_check(&column_only, &[], DEFAULT_PSI_TOL).is_err());
    }

    #[test]
    fn gani_value_sets() {
        let sets = gani_row_value_sets(&models::gani_cef()).unwrap();
        assert!(sets.all_equal());
        for s in &sets.sets {
            assert_eq!(s, &vec![1.0, 3.0]);
        }
        let constant = CefSpec::from_fn(3, 3, 1, ParameterMap::natural(1), |_, _, t| {
            t[0] = 2.5;
            1.0
        })
        .unwrap();
        let sets = gani_row_value_sets(&constant).unwrap();
        assert!(sets.all_equal() && sets.sets[0] == vec![2.5]);
        let vector = CefSpec::from_fn(2, 2, 2, ParameterMap::natural(2), |_, _, _| 1.0).unwrap();
        assert!(gani_row_value_sets(&vector).is_err());
    }

    #[test]
    fn counts() {
        let x = Trajectory::new(3, vec![0, 1, 2, 0]).unwrap();
        let n = transition_counts(&x);
        assert_eq!(n.to_dense(), vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(n.visits(), vec![1, 1, 1]);
        let y = Trajectory::new(3, vec![0, 0, 0]).unwrap();
        let n = transition_counts(&y);
        assert_eq!(n.get(0, 0), 2);
        assert_eq!(n.total(), 2);
    }

    #[test]
    fn joint_log_pmf_simple_cases() {
        let flip = StochasticMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = Trajectory::new(2, vec![0, 1, 0]).unwrap();
        let j = joint_log_pmf_from_counts(&flip, &transition_counts(&x)).unwrap();
        assert_eq!(j.value, 0.0);
        assert!(!j.impossible);
        let stay = Trajectory::new(2, vec![0, 0]).unwrap();
        let j = joint_log_pmf_from_counts(&flip, &transition_counts(&stay)).unwrap();
        assert!(j.impossible && j.value == f64::NEG_INFINITY);
        let u = StochasticMatrix::uniform(3);
        let x = Trajectory::new(3, vec![0, 2, 1, 1, 0]).unwrap();
        let j = joint_log_pmf_from_counts(&u, &transition_counts(&x)).unwrap();
        assert!(close(j.value, 4.0 * (1.0f64 / 3.0).ln(), 1e-14));
    }

    #[test]
    fn mef_joint_log_pmf_needs_verification() {
        let cef = models::gani_cef().restrict_rows(2).unwrap();
        let x = Trajectory::new(3, vec![0, 1]).unwrap();
        let unverified = MefSpec::unverified(cef.clone());
        assert!(matches!(
            mef_joint_log_pmf(&unverified, &[1.0], &x),
            Err(Error::NotMef(_))
        ));
        let mef = MefSpec::verify_default(cef).unwrap();
        let j = mef_joint_log_pmf(&mef, &[1.0], &x).unwrap();
        // P(0, 1) at theta = 1 is 1/4
        assert!(close(j.value, 0.25f64.ln(), 1e-14));
        let leaves = Trajectory::new(3, vec![0, 2, 1]).unwrap();
        assert!(mef_joint_log_pmf(&mef, &[1.0], &leaves).is_err());
        assert!(MefSpec::verify_default(models::gani_cef()).is_err());
    }

    #[test]
    fn zero_carrier_transition_is_impossible_on_both_routes() {
        let cef = CefSpec::from_fn(2, 2, 1, ParameterMap::natural(1), |_, b, t| {
            t[0] = b as f64;
            if b == 1 { 0.0 } else { 1.0 }
        })
        .unwrap();
        let mef = MefSpec::verify_default(cef.clone()).unwrap();
        let x = Trajectory::new(2, vec![0, 1]).unwrap();
        let a = mef_joint_log_pmf(&mef, &[0.4], &x).unwrap();
        let p = cef.transition_matrix(&[0.4]).unwrap();
        let b = joint_log_pmf_from_counts(&p, &transition_counts(&x)).unwrap();
        assert!(a.impossible && b.impossible);
    }

    #[test]
    fn gani_mean_parameter() {
        let mef = MefSpec::verify_default(models::gani_cef().restrict_rows(2).unwrap()).unwrap();
        for th in [0.5f64, 1.0, 2.0] {
            let m = mean_parameter(&mef, &[th]).unwrap();
            let expected = (3.0 * th + 3.0 * th.powi(3)) / (3.0 * th + th.powi(3));
            for row in &m.per_row {
                assert!(close(row[0], expected, 1e-12));
            }
            assert!(m.gradient_deviation.unwrap() < GRADIENT_TOL);
        }
    }

    #[test]
    fn density_mean_parameter() {
        let mef = MefSpec::verify_default(models::density_cef(4).unwrap()).unwrap();
        let m = mean_parameter(&mef, &[0.3]).unwrap();
        assert!(close(m.mean[0], 0.6, 1e-12));
        assert!(m.gradient_deviation.unwrap() < GRADIENT_TOL);
    }

    #[test]
    fn constant_statistic_mean() {
        let cef = CefSpec::from_fn(3, 3, 1, ParameterMap::natural(1), |a, b, t| {
            t[0] = 1.75;
            1.0 + (a + b) as f64
        })
        .unwrap();
        // rows differ in kappa, so this is only an MEF if psi agrees; it does
        // not, so build a column-only carrier instead
        assert!(MefSpec::verify_default(cef).is_err());
        let cef = CefSpec::from_fn(3, 3, 1, ParameterMap::natural(1), |_, b, t| {
            t[0] = 1.75;
            1.0 + b as f64
        })
        .unwrap();
        let mef = MefSpec::verify_default(cef).unwrap();
        for g in [-3.0, 0.0, 5.0] {
            let m = mean_parameter(&mef, &[g]).unwrap();
            assert!(close(m.mean[0], 1.75, 1e-14));
        }
    }

    #[test]
    fn puniform_cef_round_trips() {
        for kind in [FamilyKind::Identity, FamilyKind::Stability] {
            let cef = models::density_or_stability_cef(3, kind).unwrap();
            let space = StateSpace::multigraph(3, 1).unwrap();
            let fam = PermutationFamily::builtin(kind, &space).unwrap();
            let ef = puniform_cef_to_expfam(&cef, &fam).unwrap();
            for (b, g) in space.multigraphs().unwrap().enumerate() {
                assert!(close(ef.tau(b)[0], g.edge_count() as f64 / 2.0, 1e-15));
                assert_eq!(ef.kappa(b), 1.0);
            }
            let mef = expfam_to_mef(&ef, &fam).unwrap();
            let back = puniform_cef_to_expfam(mef.cef(), &fam).unwrap();
            assert_eq!(back, ef);
        }
    }

    #[test]
    fn puniform_cef_to_expfam_rejects_non_puniform() {
        let cef = models::transitivity_cef(4, ParameterMap::natural(1)).unwrap();
        let fam = PermutationFamily::identity(64);
        assert!(matches!(
            puniform_cef_to_expfam(&cef, &fam),
            Err(Error::NotPuniform(_))
        ));
    }

    #[test]
    fn trivial_families_convert() {
        let cef = CefSpec::from_fn(3, 3, 1, ParameterMap::natural(1), |_, _, t| {
            t[0] = 0.0;
            1.0
        })
        .unwrap();
        let ef = puniform_cef_to_expfam(&cef, &PermutationFamily::identity(3)).unwrap();
        assert!(ef.pmf(&[0.9]).unwrap().as_slice().iter().all(|&p| close(p, 1.0 / 3.0, 1e-15)));
        let single = ExpFamilySpec::new(vec![2.0], vec![1.0], 1, ParameterMap::natural(1)).unwrap();
        let mef = expfam_to_mef(&single, &PermutationFamily::identity(1)).unwrap();
        let p = mef.cef().transition_matrix(&[0.3]).unwrap();
        assert_eq!(p.as_slice(), &[1.0]);
    }

    #[test]
    fn puniformity_reports() {
        let density = models::density_cef(3).unwrap();
        let id = PermutationFamily::identity(8);
        let r = kappa_tau_puniformity(&density, &id).unwrap();
        assert!(r.kappa_puniform && r.tau_puniform[0] && r.matrix_puniform.iter().all(|&b| b));
        assert!(r.is_mef && r.eta_affinely_independent && r.kappa_never_zero);

        let stability = models::density_or_stability_cef(3, FamilyKind::Stability).unwrap();
        let space = StateSpace::multigraph(3, 1).unwrap();
        let sf = PermutationFamily::builtin(FamilyKind::Stability, &space).unwrap();
        let r = kappa_tau_puniformity(&stability, &sf).unwrap();
        assert!(r.tau_puniform[0] && r.matrix_puniform.iter().all(|&b| b));

        let trans = models::transitivity_cef(4, ParameterMap::natural(1)).unwrap();
        let r = kappa_tau_puniformity(&trans, &PermutationFamily::identity(64)).unwrap();
        assert!(!r.tau_puniform[0]);
        assert!(!r.is_mef);
    }

    #[test]
    fn affine_independence() {
        assert!(affinely_independent_entries(&[vec![0.0], vec![1.0]]));
        assert!(!affinely_independent_entries(&[vec![0.0], vec![0.0]]));
        assert!(!affinely_independent_entries(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]));
        assert!(affinely_independent_entries(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]));
        assert!(!affinely_independent_entries(&[vec![0.0, 0.0], vec![1.0, 0.0]]));
        assert!(!affinely_independent_entries(&[]));
    }

    #[test]
    fn parameter_maps() {
        let logit = ParameterMap::DensityLogit { n: 4 };
        assert!(close(logit.evaluate(&[0.3]).unwrap()[0], 3.0 * (3.0f64 / 7.0).ln(), 1e-15));
        assert_eq!(logit.evaluate(&[0.5]).unwrap()[0], 0.0);
        assert!(logit.evaluate(&[1.0]).is_err());
        let table = ParameterMap::Table {
            samples: vec![EtaSample { theta: vec![1.0], eta: vec![2.0, 3.0] }],
        };
        assert_eq!(table.evaluate(&[1.0]).unwrap(), vec![2.0, 3.0]);
        assert!(table.evaluate(&[1.5]).is_err());
        assert_eq!(table.stat_dim(), 2);
        let json = serde_json::to_string(&ParameterMap::ScalarLog).unwrap();
        assert_eq!(json, r#"{"kind":"scalar_log"}"#);
        let nat: ParameterMap = serde_json::from_str(r#"{"kind":"natural"}"#).unwrap();
        assert_eq!(nat, ParameterMap::natural(1));
        for map in [ParameterMap::natural(3), ParameterMap::ScalarLog, logit] {
            let probes = map.default_probes();
            assert!(probes.len() >= 5);
            assert!(probes.iter().all(|p| map.in_domain(p)));
            let etas: Vec<_> = probes.iter().map(|p| map.evaluate(p).unwrap()).collect();
            assert!(affinely_independent_entries(&etas));
        }
    }
}
