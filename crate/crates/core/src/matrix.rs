//! Probability vectors, stochastic matrices and dense pair tables.

use crate::error::{Error, Result};

/// Tolerance for row sums and total masses.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability mass function on `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    p: Vec<f64>,
}

impl Pmf {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::NotNormalized("empty pmf".into()));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::NotNormalized(format!("negative or non-finite mass {x}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(format!("masses sum to {total}")));
        }
        Ok(Self { p })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NotNormalized(format!("weights sum to {total}")));
        }
        Self::new(w.into_iter().map(|x| x / total).collect())
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            p: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut p = vec![0.0; len];
        p[at] = 1.0;
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    /// Smallest index whose cumulative mass exceeds `u` in `[0, 1)`.
    /// Falls back to the last state with positive mass.
    pub fn inverse_cdf(&self, u: f64) -> usize {
        inverse_cdf(&self.p, u)
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

pub(crate) fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// A row-stochastic square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    size: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(size: usize, data: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if data.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: data.len(),
            });
        }
        for (a, row) in data.chunks(size).enumerate() {
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::NotNormalized(format!("row {a} has entry {x}")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(format!("row {a} sums to {s}")));
            }
        }
        Ok(Self { size, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: r.len(),
            });
        }
        Self::new(size, rows.into_iter().flatten().collect())
    }

    /// Divides every row of a nonnegative matrix by its sum.
    pub fn from_rows_normalized(rows: Vec<Vec<f64>>) -> Result<Self> {
        let normalized = rows
            .into_iter()
            .enumerate()
            .map(|(a, r)| {
                let s: f64 = r.iter().sum();
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::NotNormalized(format!("row {a} sums to {s}")));
                }
                Ok(r.into_iter().map(|x| x / s).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_rows(normalized)
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { size, data }
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            size,
            data: vec![1.0 / size as f64; size * size],
        }
    }

    /// `P(a, b) = mu(sigma_a b)`.
    pub fn from_common_row(mu: &Pmf, family: &crate::perm::PermutationFamily) -> Result<Self> {
        let size = mu.len();
        if family.size() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: family.size(),
            });
        }
        let mut data = Vec::with_capacity(size * size);
        for a in 0..size {
            data.extend(family.row(a).iter().map(|&s| mu[s as usize]));
        }
        Ok(Self { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.size + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.size..(a + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.size)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.size).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.size).all(|a| (0..a).all(|b| (self.get(a, b) - self.get(b, a)).abs() <= tol))
    }

    /// Row vector times matrix.
    pub fn left_multiply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (a, row) in self.rows().enumerate() {
            let w = pi[a];
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
        out
    }
}

/// A dense table `f(a, b) in R^dim` for rows `0..rows` and columns `0..cols`.
///
/// Carriers (`dim = 1`) and sufficient statistics of conditional families
/// are stored this way. `rows < cols` describes a family restricted to its
/// first `rows` states.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTable {
    rows: usize,
    cols: usize,
    dim: usize,
    values: Vec<f64>,
}

impl PairTable {
    pub fn new(rows: usize, cols: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::InvalidArgument("pair table needs nonzero shape".into()));
        }
        if rows > cols {
            return Err(Error::InvalidArgument(format!(
                "pair table has {rows} rows but only {cols} columns"
            )));
        }
        if values.len() != rows * cols * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * cols * dim,
                found: values.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            dim,
            values,
        })
    }

    pub fn filled(rows: usize, cols: usize, dim: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            dim,
            values: vec![value; rows * cols * dim],
        }
    }

    /// Tabulates `f` over all pairs.
    pub fn from_fn<F>(rows: usize, cols: usize, dim: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize, &mut [f64]),
    {
        let mut values = vec![0.0; rows * cols * dim];
        for a in 0..rows {
            for b in 0..cols {
                let at = (a * cols + b) * dim;
                f(a, b, &mut values[at..at + dim]);
            }
        }
        Self {
            rows,
            cols,
            dim,
            values,
        }
    }

    /// Scalar table from nested rows.
    pub fn from_scalar_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: r.len(),
            });
        }
        Self::new(rows.len(), cols, 1, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, a: usize, b: usize) -> &[f64] {
        let at = (a * self.cols + b) * self.dim;
        &self.values[at..at + self.dim]
    }

    pub fn scalar(&self, a: usize, b: usize) -> f64 {
        self.values[(a * self.cols + b) * self.dim]
    }

    /// Coordinate `k` as a scalar table.
    pub fn coordinate(&self, k: usize) -> PairTable {
        assert!(k < self.dim);
        Self {
            rows: self.rows,
            cols: self.cols,
            dim: 1,
            values: self.values.iter().skip(k).step_by(self.dim).copied().collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Keeps the first `rows` rows.
    pub fn truncate_rows(&self, rows: usize) -> Result<Self> {
        if rows == 0 || rows > self.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {rows} of {} rows",
                self.rows
            )));
        }
        Ok(Self {
            rows,
            cols: self.cols,
            dim: self.dim,
            values: self.values[..rows * self.cols * self.dim].to_vec(),
        })
    }
}
