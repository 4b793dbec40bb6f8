//! Permutation uniformity: detection, witnesses, and the translation between a
//! p-uniform chain `X` and its iid companion `Z`.
//!
//! A table `f` on `S x S` is p-uniform under `{sigma_a}` when
//! `f(a, sigma_a^{-1} c) = f(b, sigma_b^{-1} c)` for all `a, b, c`, i.e. when
//! `f(a, b) = g(sigma_a b)` for a single row vector `g`. For a transition
//! matrix, `Z_{i+1} = sigma_{X_i}(X_{i+1})` is then iid with law `g`.

use crate::error::{Error, Result};
use crate::matrix::{PairTable, Pmf, StochasticMatrix};
use crate::perm::{FamilyKind, PermutationFamily};

/// Default absolute tolerance for matching transition probabilities.
pub const DEFAULT_MATCH_TOL: f64 = 1e-9;

/// Tolerance for the witness representation `P(a, b) = mu(sigma_a b)`.
pub const WITNESS_TOL: f64 = 1e-10;

/// A sequence of state indices `x_0, ..., x_T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    size: usize,
    states: Vec<usize>,
}

impl Trajectory {
    pub fn new(size: usize, states: Vec<usize>) -> Result<Self> {
        if let Some(&x) = states.iter().find(|&&x| x >= size) {
            return Err(Error::InvalidArgument(format!(
                "state {x} outside space of size {size}"
            )));
        }
        Ok(Self { size, states })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of transitions, one less than the number of states.
    pub fn transitions(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// Consecutive pairs `(x_i, x_{i+1})`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.states.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Result of checking p-uniformity under a given family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuniformCheck {
    /// `(a, b, c)` with `f(a, sigma_a^{-1} c) != f(b, sigma_b^{-1} c)`.
    pub violation: Option<(usize, usize, usize)>,
    pub max_deviation: f64,
}

impl PuniformCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks p-uniformity of a scalar square table under `family`.
pub fn check_puniform_table(
    table: &PairTable,
    family: &PermutationFamily,
    tol: f64,
) -> Result<PuniformCheck> {
    if !table.is_square() || table.dim() != 1 {
        return Err(Error::InvalidArgument(
            "p-uniformity is checked on square scalar tables".into(),
        ));
    }
    check_rows(table.rows(), |a, b| table.scalar(a, b), family, tol)
}

/// Checks p-uniformity of a transition matrix under `family`.
pub fn check_puniform(
    p: &StochasticMatrix,
    family: &PermutationFamily,
    tol: f64,
) -> Result<PuniformCheck> {
    check_rows(p.size(), |a, b| p.get(a, b), family, tol)
}

fn check_rows(
    size: usize,
    f: impl Fn(usize, usize) -> f64,
    family: &PermutationFamily,
    tol: f64,
) -> Result<PuniformCheck> {
    if family.size() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: family.size(),
        });
    }
    // reference row 0 read through sigma_0^{-1}
    let inv0 = family.inverse_row(0);
    let reference: Vec<f64> = (0..size).map(|c| f(0, inv0[c] as usize)).collect();
    let mut worst = 0.0f64;
    for a in 1..size {
        let inv = family.inverse_row(a);
        for c in 0..size {
            let d = (f(a, inv[c] as usize) - reference[c]).abs();
            if !(d <= tol) {
                return Ok(PuniformCheck {
                    violation: Some((a, 0, c)),
                    max_deviation: if d.is_nan() { f64::INFINITY } else { d },
                });
            }
            worst = worst.max(d);
        }
    }
    Ok(PuniformCheck {
        violation: None,
        max_deviation: worst,
    })
}

/// A family `sigma` and common row `mu` with `P(a, b) = mu(sigma_a b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PuniformWitness {
    family: PermutationFamily,
    common_row: Pmf,
    reference_state: usize,
}

impl PuniformWitness {
    /// Validates the representation against `p` within [`WITNESS_TOL`].
    pub fn new(
        p: &StochasticMatrix,
        family: PermutationFamily,
        common_row: Pmf,
        reference_state: usize,
    ) -> Result<Self> {
        let size = p.size();
        if family.size() != size || common_row.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: family.size().min(common_row.len()),
            });
        }
        if reference_state >= size {
            return Err(Error::InvalidArgument("reference state out of range".into()));
        }
        check_representation(p, &family, &common_row, WITNESS_TOL)?;
        Ok(Self {
            family,
            common_row,
            reference_state,
        })
    }

    pub fn family(&self) -> &PermutationFamily {
        &self.family
    }

    pub fn common_row(&self) -> &Pmf {
        &self.common_row
    }

    pub fn reference_state(&self) -> usize {
        self.reference_state
    }
}

fn check_representation(
    p: &StochasticMatrix,
    family: &PermutationFamily,
    mu: &Pmf,
    tol: f64,
) -> Result<()> {
    for a in 0..p.size() {
        for (b, &s) in family.row(a).iter().enumerate() {
            let d = (p.get(a, b) - mu[s as usize]).abs();
            if !(d <= tol) {
                return Err(Error::NotPuniform(format!(
                    "P({a}, {b}) = {} but mu(sigma_{a} {b}) = {}",
                    p.get(a, b),
                    mu[s as usize]
                )));
            }
        }
    }
    Ok(())
}

/// Indices of `row` sorted by value, values within `tol` of their
/// predecessor treated as tied and ordered by index.
fn canonical_order(row: &[f64], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&i, &j| row[i].total_cmp(&row[j]).then(i.cmp(&j)));
    let mut start = 0;
    for k in 1..=idx.len() {
        if k == idx.len() || row[idx[k]] - row[idx[k - 1]] > tol {
            idx[start..k].sort_unstable();
            start = k;
        }
    }
    idx
}

/// Searches for a p-uniform representation of `p`.
///
/// Returns the canonical witness (`sigma_0 = id`, `mu = row 0`, ties broken by
/// smallest index) or the violating triple of the best candidate family.
pub fn detect_puniform_detailed(
    p: &StochasticMatrix,
    tol: f64,
) -> std::result::Result<PuniformWitness, (usize, usize, usize)> {
    let size = p.size();
    let order0 = canonical_order(p.row(0), tol);
    let mut sigma = Vec::with_capacity(size);
    for a in 0..size {
        if a == 0 {
            sigma.push((0..size).collect::<Vec<_>>());
            continue;
        }
        let order = canonical_order(p.row(a), tol);
        let mut row = vec![0usize; size];
        for (k, &b) in order.iter().enumerate() {
            row[b] = order0[k];
            if (p.get(a, b) - p.get(0, order0[k])).abs() > tol {
                // row multisets differ: no family can work
                return Err((a, 0, order0[k]));
            }
        }
        sigma.push(row);
    }
    let family = PermutationFamily::custom(sigma).expect("matched orders are bijections");
    match check_puniform(p, &family, tol) {
        Ok(check) if check.holds() => {}
        Ok(check) => return Err(check.violation.unwrap_or((0, 0, 0))),
        Err(_) => return Err((0, 0, 0)),
    }
    let mu = Pmf::new(p.row(0).to_vec()).map_err(|_| (0, 0, 0))?;
    PuniformWitness::new(p, family, mu, 0).map_err(|_| (0, 0, 0))
}

/// Canonical p-uniform witness for `p`, if one exists.
pub fn detect_puniform(p: &StochasticMatrix, tol: f64) -> Option<PuniformWitness> {
    detect_puniform_detailed(p, tol).ok()
}

/// `z_{i+1} = sigma_{x_i}(x_{i+1})`; the result is one state shorter.
pub fn chain_to_iid(x: &Trajectory, family: &PermutationFamily) -> Result<Trajectory> {
    if x.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    check_family_size(x.size(), family)?;
    let z = x.pairs().map(|(a, b)| family.apply(a, b)).collect();
    Trajectory::new(x.size(), z)
}

/// `x_0 = x0`, `x_{i+1} = sigma_{x_i}^{-1}(z_{i+1})`.
pub fn iid_to_chain(x0: usize, z: &Trajectory, family: &PermutationFamily) -> Result<Trajectory> {
    check_family_size(z.size(), family)?;
    if x0 >= z.size() {
        return Err(Error::InvalidArgument(format!("initial state {x0} out of range")));
    }
    let inverse = family.inverse();
    let mut states = Vec::with_capacity(z.len() + 1);
    let mut x = x0;
    states.push(x);
    for &zi in z.states() {
        x = inverse.apply(x, zi);
        states.push(x);
    }
    Trajectory::new(z.size(), states)
}

fn check_family_size(size: usize, family: &PermutationFamily) -> Result<()> {
    if family.size() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: family.size(),
        });
    }
    Ok(())
}

/// The map `f_z : b -> sigma_b^{-1}(z)` induced by the family.
///
/// Also verifies that `z -> f_z` is injective and that `z -> f_z(b)` is a
/// bijection for each fixed `b`.
pub fn induced_function(family: &PermutationFamily, z: usize) -> Result<Vec<usize>> {
    let size = family.size();
    if z >= size {
        return Err(Error::InvalidArgument(format!("state {z} out of range")));
    }
    let inverse = family.inverse();
    // column b of the table z -> f_z(b) is row b of the inverse family, so
    // bijectivity in z holds row by row
    for b in 0..size {
        let mut seen = vec![false; size];
        for c in 0..size {
            let v = inverse.apply(b, c);
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvariantViolated(format!(
                    "z -> f_z({b}) is not a bijection"
                )));
            }
        }
    }
    // distinct z give distinct f_z already at any fixed b
    Ok((0..size).map(|b| inverse.apply(b, z)).collect())
}

/// Outcome of transferring symmetry through a p-uniform triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetryReport {
    pub family_symmetric: bool,
    pub matrix_symmetric: bool,
    pub mu_distinct: bool,
}

/// Checks both directions of: symmetric family => symmetric matrix, and
/// symmetric matrix with distinct `mu` entries => symmetric family.
///
/// A violated implication is reported as [`Error::InvariantViolated`].
pub fn symmetry_transfer_check(
    p: &StochasticMatrix,
    family: &PermutationFamily,
    mu: &Pmf,
) -> Result<SymmetryReport> {
    check_family_size(p.size(), family)?;
    if mu.len() != p.size() {
        return Err(Error::DimensionMismatch {
            expected: p.size(),
            found: mu.len(),
        });
    }
    check_representation(p, family, mu, WITNESS_TOL)?;
    let family_symmetric = family.is_symmetric();
    let matrix_symmetric = p.is_symmetric(WITNESS_TOL);
    let mut sorted = mu.as_slice().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mu_distinct = sorted.windows(2).all(|w| w[1] - w[0] > WITNESS_TOL);
    if family_symmetric && !matrix_symmetric {
        return Err(Error::InvariantViolated(
            "symmetric family produced a non-symmetric matrix".into(),
        ));
    }
    if matrix_symmetric && mu_distinct && !family_symmetric {
        return Err(Error::InvariantViolated(
            "symmetric matrix with distinct mu entries has a non-symmetric family".into(),
        ));
    }
    Ok(SymmetryReport {
        family_symmetric,
        matrix_symmetric,
        mu_distinct,
    })
}

/// True when `family` is the identity on every row.
pub fn is_identity_family(family: &PermutationFamily) -> bool {
    family.kind() == FamilyKind::Identity
        || (0..family.size()).all(|a| family.row(a).iter().enumerate().all(|(b, &s)| s as usize == b))
}
