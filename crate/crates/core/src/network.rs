//! Linear oscillator networks: adjacency and Laplacian construction, the
//! all-to-all synchronization frequency, and direct simulation.

use nalgebra::DMatrix;

use crate::ode::{integrate, OscState, TimeSeries};
use crate::{Error, Result};

/// Symmetric, non-negative adjacency weights with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    adjacency: DMatrix<f64>,
}

impl GraphSpec {
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{}, expected square",
                n,
                adjacency.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGraph("need at least 2 nodes".into()));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "non-zero diagonal at node {i}"
                )));
            }
            for j in 0..n {
                let a = adjacency[(i, j)];
                if !(a.is_finite() && a >= 0.0) {
                    return Err(Error::InvalidGraph(format!(
                        "weight ({i}, {j}) = {a} must be finite and non-negative"
                    )));
                }
                if a != adjacency[(j, i)] {
                    return Err(Error::AsymmetricInput { row: i, col: j });
                }
            }
        }
        Ok(GraphSpec { adjacency })
    }

    /// Unit weights between every pair of distinct nodes.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { 0.0 } else { 1.0 },
        ))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        }))
    }

    pub fn edgeless(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    /// Parses whitespace-separated rows, one matrix row per non-empty line.
    /// Lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::InvalidGraph(format!("line {}: bad number {tok:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidGraph(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// `A_i = sum_j a_ij`
    pub fn degree(&self, i: usize) -> f64 {
        self.adjacency.row(i).sum()
    }

    /// Off-diagonal `a_ij`, diagonal row sums `A_i`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = self.adjacency.clone();
        for i in 0..self.n() {
            l[(i, i)] = self.degree(i);
        }
        l
    }
}

/// `sqrt(omega^2 - mu (n - 1))`, the common frequency of an all-to-all
/// network in its synchronized regime.
pub fn sync_frequency(omega: f64, mu: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidGraph("need at least 2 nodes".into()));
    }
    if !(mu >= 0.0) {
        return Err(Error::NegativeCoefficient {
            field: "mu",
            value: mu,
        });
    }
    let value = omega * omega - mu * (n as f64 - 1.0);
    if value > 0.0 {
        Ok(value.sqrt())
    } else {
        Err(Error::UnstableRegime { value })
    }
}

/// RK4 trajectory of `u_i'' = -omega^2 u_i + mu sum_j a_ij u_j`, returned as
/// one displacement series per node.
pub fn simulate_linear_network(
    g: &GraphSpec,
    omega: f64,
    mu: f64,
    ic: &[OscState],
    dt: f64,
    steps: usize,
) -> Result<Vec<TimeSeries>> {
    let n = g.n();
    if ic.len() != n {
        return Err(Error::InvalidGraph(format!(
            "{} initial states for {n} nodes",
            ic.len()
        )));
    }
    let a = g.adjacency();
    let w2 = omega * omega;
    let mut s0 = Vec::with_capacity(2 * n);
    s0.extend(ic.iter().map(|s| s.u));
    s0.extend(ic.iter().map(|s| s.v));
    let traj = integrate(
        |s: &Vec<f64>| {
            let (u, v) = s.split_at(n);
            let mut d = Vec::with_capacity(2 * n);
            d.extend_from_slice(v);
            for i in 0..n {
                let mut coupling = 0.0;
                for j in 0..n {
                    coupling += a[(i, j)] * u[j];
                }
                d.push(-w2 * u[i] + mu * coupling);
            }
            d
        },
        s0,
        dt,
        steps,
    )?;
    Ok((0..n).map(|i| traj.series(|s| s[i])).collect())
}
