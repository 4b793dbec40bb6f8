//! JSON and JSONL formats.
//!
//! Vertices are one-based in every file format. Multigraphs list their
//! nonzero dyads as `[u, v, multiplicity]` with `u > v`:
//!
//! ```json
//! {"n": 3, "t": 1, "dyads": [[2, 1, 1], [3, 2, 1]]}
//! ```
//!
//! Trajectories are JSONL, one `{"step": i, "state": k}` record per line,
//! optionally carrying the decoded `"dyads"` of a multigraph state.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::ermgm::ErmgmModel;
use crate::error::{Error, Result};
use crate::expfam::{CefSpec, ExpFamilySpec, ParameterMap};
use crate::matrix::{PairTable, StochasticMatrix};
use crate::netstat::DyadicFactorization;
use crate::perm::{FamilyKind, PermutationFamily};
use crate::puniform::Trajectory;
use crate::space::{dyad_endpoints, dyad_index, Multigraph, StateSpace};

/// A state space description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceJson {
    Multigraph {
        n: usize,
        #[serde(default = "one")]
        t: u32,
    },
    Modular {
        n: usize,
    },
    Generic {
        labels: Vec<String>,
    },
    Indexed {
        size: usize,
    },
}

fn one() -> u32 {
    1
}

impl SpaceJson {
    pub fn build(&self) -> Result<StateSpace> {
        match self {
            Self::Multigraph { n, t } => StateSpace::multigraph(*n, *t),
            Self::Modular { n } => StateSpace::modular(*n),
            Self::Generic { labels } => StateSpace::generic(labels.clone()),
            Self::Indexed { size } => StateSpace::indexed(*size),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultigraphJson {
    pub n: usize,
    pub t: u32,
    pub dyads: Vec<[u32; 3]>,
}

impl MultigraphJson {
    pub fn from_graph(g: &Multigraph) -> Self {
        let dyads = g
            .multiplicities()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(f, &m)| {
                let (u, v) = dyad_endpoints(f);
                [u as u32 + 1, v as u32 + 1, m]
            })
            .collect();
        Self {
            n: g.n(),
            t: g.t(),
            dyads,
        }
    }

    pub fn to_graph(&self) -> Result<Multigraph> {
        let mut m = vec![0; crate::space::dyad_count(self.n)];
        for &[u, v, mult] in &self.dyads {
            let (u, v) = (u as usize, v as usize);
            if u == 0 || v == 0 || u > self.n || v > self.n || u == v {
                return Err(Error::InvalidArgument(format!(
                    "dyad [{u}, {v}] is not a pair of distinct vertices in 1..={}",
                    self.n
                )));
            }
            m[dyad_index(u - 1, v - 1)] = mult;
        }
        Multigraph::new(self.n, self.t, m)
    }
}

/// A transition matrix, either bare rows or wrapped as `{"matrix": rows}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Wrapped {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        normalize: bool,
    },
    Rows(Vec<Vec<f64>>),
}

impl MatrixJson {
    pub fn build(&self) -> Result<StochasticMatrix> {
        match self {
            Self::Wrapped { matrix, normalize: true } => {
                StochasticMatrix::from_rows_normalized(matrix.clone())
            }
            Self::Wrapped { matrix, .. } | Self::Rows(matrix) => StochasticMatrix::from_rows(matrix.clone()),
        }
    }
}

/// Parses a matrix from JSON, or from CSV rows when the text does not start
/// with `[` or `{`.
pub fn parse_matrix(text: &str, normalize: bool) -> Result<StochasticMatrix> {
    let trimmed = text.trim_start();
    let rows: Vec<Vec<f64>> = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        match serde_json::from_str::<MatrixJson>(text)? {
            MatrixJson::Wrapped { matrix, normalize: n } => {
                return if n || normalize {
                    StochasticMatrix::from_rows_normalized(matrix)
                } else {
                    StochasticMatrix::from_rows(matrix)
                }
            }
            MatrixJson::Rows(rows) => rows,
        }
    } else {
        trimmed
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidArgument(format!("bad CSV entry {x:?}: {e}")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?
    };
    if normalize {
        StochasticMatrix::from_rows_normalized(rows)
    } else {
        StochasticMatrix::from_rows(rows)
    }
}

/// A permutation family: explicit rows, or a built-in kind over a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyJson {
    Custom { sigma: Vec<Vec<usize>> },
    Builtin { kind: FamilyKind, space: SpaceJson },
}

impl FamilyJson {
    pub fn build(&self) -> Result<PermutationFamily> {
        match self {
            Self::Custom { sigma } => PermutationFamily::custom(sigma.clone()),
            Self::Builtin { kind, space } => PermutationFamily::builtin(*kind, &space.build()?),
        }
    }

    pub fn from_family(family: &PermutationFamily) -> Self {
        Self::Custom {
            sigma: family.to_rows(),
        }
    }
}

/// Statistic tables accept a scalar per entry or a vector per entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatRows {
    Scalar(Vec<Vec<f64>>),
    Vector(Vec<Vec<Vec<f64>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CefJson {
    pub kappa: Vec<Vec<f64>>,
    pub tau: StatRows,
    pub eta: ParameterMap,
}

impl CefJson {
    pub fn build(&self) -> Result<CefSpec> {
        let kappa = PairTable::from_scalar_rows(&self.kappa)?;
        let tau = match &self.tau {
            StatRows::Scalar(rows) => PairTable::from_scalar_rows(rows)?,
            StatRows::Vector(rows) => {
                let r = rows.len();
                let c = rows.first().map_or(0, Vec::len);
                let dim = rows.first().and_then(|row| row.first()).map_or(0, Vec::len);
                let mut values = Vec::with_capacity(r * c * dim);
                for row in rows {
                    if row.len() != c {
                        return Err(Error::DimensionMismatch { expected: c, found: row.len() });
                    }
                    for v in row {
                        if v.len() != dim {
                            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                        }
                        values.extend_from_slice(v);
                    }
                }
                PairTable::new(r, c, dim, values)?
            }
        };
        CefSpec::new(kappa, tau, self.eta.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpFamilyJson {
    pub kappa: Vec<f64>,
    /// One row of length `l` per state.
    pub tau: Vec<Vec<f64>>,
    pub eta: ParameterMap,
}

impl ExpFamilyJson {
    pub fn build(&self) -> Result<ExpFamilySpec> {
        let dim = self.tau.first().map_or(0, Vec::len);
        if let Some(row) = self.tau.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
        }
        ExpFamilySpec::new(self.kappa.clone(), self.tau.concat(), dim, self.eta.clone())
    }

    pub fn from_family(f: &ExpFamilySpec) -> Self {
        Self {
            kappa: f.kappas().to_vec(),
            tau: (0..f.size()).map(|x| f.tau(x).to_vec()).collect(),
            eta: f.eta().clone(),
        }
    }
}

/// Multigraph model files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelJson {
    /// Density model on `G(n, 1)`; `eta` defaults to the logit map.
    ErdosRenyi {
        n: usize,
        #[serde(default)]
        eta: Option<ParameterMap>,
    },
    /// Identical tables on every dyad.
    Homogeneous {
        n: usize,
        t: u32,
        tau: Vec<Vec<f64>>,
        kappa: Vec<f64>,
        eta: ParameterMap,
    },
    /// Per-dyad tables.
    Factored {
        n: usize,
        t: u32,
        tau_f: Vec<Vec<Vec<f64>>>,
        kappa_f: Vec<Vec<f64>>,
        eta: ParameterMap,
    },
}

impl ModelJson {
    pub fn build(&self) -> Result<ErmgmModel> {
        match self {
            Self::ErdosRenyi { n, eta } => ErmgmModel::erdos_renyi(
                *n,
                eta.clone().unwrap_or(ParameterMap::DensityLogit { n: *n }),
            ),
            Self::Homogeneous { n, t, tau, kappa, eta } => {
                ErmgmModel::homogeneous(*n, *t, tau.clone(), kappa.clone(), eta.clone())
            }
            Self::Factored { n, t, tau_f, kappa_f, eta } => ErmgmModel::new(
                DyadicFactorization {
                    n: *n,
                    t: *t,
                    tau_f: tau_f.clone(),
                    kappa_f: kappa_f.clone(),
                },
                eta.clone(),
            ),
        }
    }
}

/// One trajectory line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub state: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dyads: Option<Vec<[u32; 3]>>,
}

/// Writes a trajectory as JSONL; `expand` adds each multigraph's dyads.
pub fn write_trajectory(
    out: &mut impl Write,
    x: &Trajectory,
    expand: Option<&StateSpace>,
) -> Result<()> {
    for (step, &state) in x.states().iter().enumerate() {
        let dyads = match expand {
            Some(space) => Some(MultigraphJson::from_graph(&space.decode(state)?).dyads),
            None => None,
        };
        let line = serde_json::to_string(&TrajectoryRecord { step, state, dyads })?;
        writeln!(out, "{line}").map_err(|e| Error::Serde(e.to_string()))?;
    }
    Ok(())
}

/// Reads a JSONL trajectory; steps must run `0, 1, 2, ...`.
pub fn read_trajectory(input: impl BufRead, size: usize) -> Result<Trajectory> {
    let mut states = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Serde(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrajectoryRecord = serde_json::from_str(&line)?;
        if rec.step != states.len() {
            return Err(Error::InvalidArgument(format!(
                "line {}: expected step {}, found {}",
                i + 1,
                states.len(),
                rec.step
            )));
        }
        states.push(rec.state);
    }
    Trajectory::new(size, states)
}

/// Formats floats with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` with [`FullPrecision`] floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Serde(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multigraph_round_trip() {
        let g = Multigraph::from_edges(4, 2, &[(1, 0, 2), (3, 2, 1)]).unwrap();
        let j = MultigraphJson::from_graph(&g);
        assert_eq!(j.dyads, vec![[2, 1, 2], [4, 3, 1]]);
        let text = serde_json::to_string(&j).unwrap();
        let back: MultigraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_graph().unwrap(), g);
        let bad = MultigraphJson { n: 3, t: 1, dyads: vec![[1, 1, 1]] };
        assert!(bad.to_graph().is_err());
    }

    #[test]
    fn matrices_from_json_and_csv() {
        let m = parse_matrix("[[0.5, 0.5], [1, 0]]", false).unwrap();
        assert_eq!(m.get(1, 0), 1.0);
        let m = parse_matrix(r#"{"matrix": [[1, 2], [3, 4]], "normalize": true}"#, false).unwrap();
        assert!((m.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        let m = parse_matrix("1,2\n3,4\n", true).unwrap();
        assert!((m.get(1, 1) - 4.0 / 7.0).abs() < 1e-15);
        assert!(parse_matrix("[[1, 2], [3, 4]]", false).is_err());
    }

    #[test]
    fn families() {
        let f: FamilyJson = serde_json::from_str(r#"{"sigma": [[0, 1], [1, 0]]}"#).unwrap();
        assert_eq!(f.build().unwrap().apply(1, 0), 1);
        let f: FamilyJson =
            serde_json::from_str(r#"{"kind": "stability", "space": {"kind": "multigraph", "n": 3}}"#).unwrap();
        assert_eq!(f.build().unwrap().size(), 8);
    }

    #[test]
    fn cef_from_json() {
        let text = r#"{"kappa": [[2, 1, 1], [0.5, 0.5, 3]], "tau": [[1, 1, 3], [3, 3, 1]],
                       "eta": {"kind": "scalar_log"}}"#;
        let c: CefJson = serde_json::from_str(text).unwrap();
        let c = c.build().unwrap();
        assert_eq!((c.rows(), c.size(), c.dim()), (2, 3, 1));
        let text = r#"{"kappa": [[1, 1], [1, 1]], "tau": [[[0, 1], [1, 0]], [[1, 1], [0, 0]]],
                       "eta": {"kind": "natural", "dim": 2}}"#;
        let c: CefJson = serde_json::from_str(text).unwrap();
        assert_eq!(c.build().unwrap().dim(), 2);
    }

    #[test]
    fn models() {
        let m: ModelJson = serde_json::from_str(r#"{"kind": "erdos_renyi", "n": 4}"#).unwrap();
        let m = m.build().unwrap();
        assert!((m.dyad_pmf(&[0.3], 0).unwrap()[1] - 0.3).abs() < 1e-15);
        let text = r#"{"kind": "homogeneous", "n": 3, "t": 2, "tau": [[0], [1], [2]],
                       "kappa": [1, 1, 1], "eta": {"kind": "natural"}}"#;
        let m: ModelJson = serde_json::from_str(text).unwrap();
        assert_eq!(m.build().unwrap().t(), 2);
    }

    #[test]
    fn trajectory_round_trip() {
        let space = StateSpace::multigraph(3, 1).unwrap();
        let x = Trajectory::new(8, vec![0, 5, 7, 7]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &x, Some(&space)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"step\":0,\"state\":0,\"dyads\":[]}"));
        let back = read_trajectory(&buf[..], 8).unwrap();
        assert_eq!(back, x);
        assert!(read_trajectory("{\"step\":1,\"state\":0}".as_bytes(), 8).is_err());
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json_string(&vec![0.1, 1.0 / 3.0, 2.0]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,3.3333333333333331e-1,2.0000000000000000e0]");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0, 2.0]);
    }
}
