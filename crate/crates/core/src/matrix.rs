//! Matrix form of convergent robust push-sum on the augmented graph.
//!
//! `M[t]` is stored with `M[source][destination]`, so row vectors evolve from
//! the left: `z[t] = z[0] * M[1] * ... * M[t]`.

use serde::Serialize;

use crate::bounds::ContractionConstants;
use crate::error::{Error, Result};
use crate::failure::FailureSchedule;
use crate::graph::AugmentedGraph;

/// Row sums may drift this far from 1 before a matrix is rejected.
pub const ROW_STOCHASTIC_TOLERANCE: f64 = 1e-8;
/// Slack allowed on the entry lower bound of long products.
pub const ENTRY_BOUND_SLACK: f64 = 1e-12;
/// Slack allowed on the contraction inequalities.
pub const CONTRACTION_SLACK: f64 = 1e-10;

/// Square dense matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(size: usize) -> Self {
        DenseMatrix {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let size = rows.len();
        assert!(rows.iter().all(|r| r.len() == size), "matrix must be square");
        DenseMatrix {
            size,
            data: rows.concat(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] = v;
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn check_row_stochastic(&self, tolerance: f64) -> Result<()> {
        for (row, sum) in self.row_sums().into_iter().enumerate() {
            if (sum - 1.0).abs() > tolerance || self.row(row).iter().any(|&v| v < -tolerance) {
                return Err(Error::NotRowStochastic { row, sum });
            }
        }
        Ok(())
    }
}

/// `M[t]` on the augmented node set.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationMatrix {
    pub t: usize,
    pub matrix: DenseMatrix,
}

/// `Psi(r, t) = M[r] M[r+1] ... M[t]`, the identity when `r = t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProduct {
    pub start: usize,
    pub end: usize,
    pub matrix: DenseMatrix,
}

fn check_iteration(s: &FailureSchedule, t: usize) -> Result<()> {
    if t == 0 || t > s.horizon() {
        return Err(Error::IterationOutOfRange {
            t,
            horizon: s.horizon(),
        });
    }
    Ok(())
}

/// Builds `M[t]` from the topology and iteration `t`'s link indicators.
pub fn build_iteration_matrix(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    t: usize,
) -> Result<IterationMatrix> {
    check_iteration(s, t)?;
    let g = ag.base();
    if !s.matches(g) {
        return Err(Error::ScheduleGraphMismatch);
    }
    let n = g.n();
    let mut m = DenseMatrix::zeros(ag.m());
    let split = |i: usize| 1.0 / (g.out_degree(i) + 1) as f64;
    let up = |edge: usize| if s.is_reliable(edge, t) { 1.0 } else { 0.0 };

    for i in 0..n {
        m.set(i, i, split(i) * split(i));
    }
    for (edge, &(j, i)) in g.edges().iter().enumerate() {
        let b = up(edge);
        let buffer = n + edge;
        // Delivery into i, and i's second split onto its own out-links.
        m.add(j, i, b * split(i) * split(j));
        m.add(buffer, i, b * split(i));
        for &out in g.out_edges(i) {
            m.add(j, n + out, b * split(j) * split(i));
            m.add(buffer, n + out, b * split(i));
        }
        // Mass j pushes onto its own buffer, plus what stays parked.
        m.add(j, buffer, split(j) * split(j) + (1.0 - b) * split(j));
        m.add(buffer, buffer, 1.0 - b);
    }
    Ok(IterationMatrix { t, matrix: m })
}

/// `Psi(r, t)`, accumulated left to right without renormalization.
pub fn matrix_product(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    start: usize,
    end: usize,
) -> Result<MatrixProduct> {
    if start == 0 || start > end + 1 {
        return Err(Error::IterationOutOfRange {
            t: start,
            horizon: s.horizon(),
        });
    }
    let mut psi = DenseMatrix::identity(ag.m());
    for t in start..=end {
        psi = psi.mul(&build_iteration_matrix(ag, s, t)?.matrix);
    }
    Ok(MatrixProduct {
        start,
        end,
        matrix: psi,
    })
}

/// Value and weight trajectories of every augmented node, `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTrajectory {
    /// `z[t][node][coordinate]`
    pub z: Vec<Vec<Vec<f64>>>,
    /// `w[t][node]`
    pub w: Vec<Vec<f64>>,
}

/// Evolves `z[t] = z[0] Psi(1, t)` and `w[t] = w[0] Psi(1, t)` with inputs on
/// real agents, zero on buffers, and unit weights on real agents only.
pub fn evolve_by_matrices(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    y: &[Vec<f64>],
    horizon: usize,
) -> Result<AugmentedTrajectory> {
    let n = ag.n();
    let m = ag.m();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{} inputs for {n} agents", y.len())));
    }
    let d = y.first().map_or(0, Vec::len);
    if horizon > s.horizon() {
        return Err(Error::ScheduleTooShort {
            requested: horizon,
            available: s.horizon(),
        });
    }
    // Column k of the initial values, as a row vector over augmented nodes.
    let z0: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..m).map(|v| if v < n { y[v][k] } else { 0.0 }).collect())
        .collect();
    let w0: Vec<f64> = (0..m).map(|v| if v < n { 1.0 } else { 0.0 }).collect();

    let mut psi = DenseMatrix::identity(m);
    let mut z = Vec::with_capacity(horizon + 1);
    let mut w = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        if t > 0 {
            psi = psi.mul(&build_iteration_matrix(ag, s, t)?.matrix);
        }
        let columns: Vec<Vec<f64>> = z0.iter().map(|col| psi.left_apply(col)).collect();
        z.push((0..m).map(|v| columns.iter().map(|c| c[v]).collect()).collect());
        w.push(psi.left_apply(&w0));
    }
    Ok(AugmentedTrajectory { z, w })
}

/// Largest entry-wise gap between two rows, over all columns.
pub fn delta_coefficient(a: &DenseMatrix) -> Result<f64> {
    a.check_row_stochastic(ROW_STOCHASTIC_TOLERANCE)?;
    let mut worst: f64 = 0.0;
    for j in 0..a.size() {
        let (lo, hi) = (0..a.size())
            .map(|i| a.get(i, j))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}

/// `1 - min over row pairs of sum_j min(A[i1][j], A[i2][j])`.
pub fn lambda_coefficient(a: &DenseMatrix) -> Result<f64> {
    a.check_row_stochastic(ROW_STOCHASTIC_TOLERANCE)?;
    let mut min_overlap = f64::INFINITY;
    for i1 in 0..a.size() {
        for i2 in i1..a.size() {
            let overlap: f64 = a
                .row(i1)
                .iter()
                .zip(a.row(i2))
                .map(|(x, y)| x.min(*y))
                .sum();
            min_overlap = min_overlap.min(overlap);
        }
    }
    Ok((1.0 - min_overlap).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryBoundReport {
    pub min_entry: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks that every entry of `Psi(r, t)` is at least `beta^(nB+1)`.
pub fn certify_entry_lower_bound(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    start: usize,
    end: usize,
    window: usize,
) -> Result<EntryBoundReport> {
    let c = ContractionConstants::new(ag.base(), window);
    let len = (end + 1).saturating_sub(start);
    if len < c.block {
        return Err(Error::WindowTooShort {
            len,
            required: c.block,
        });
    }
    let psi = matrix_product(ag, s, start, end)?;
    let min_entry = psi.matrix.min_entry();
    let bound = c.beta_block();
    Ok(EntryBoundReport {
        min_entry,
        bound,
        pass: min_entry + ENTRY_BOUND_SLACK >= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub delta: f64,
    pub hajnal_product: f64,
    pub gamma_bound: f64,
    pub hajnal_pass: bool,
    pub gamma_pass: bool,
    pub pass: bool,
}

/// Checks `delta(Psi(r,t)) <= prod lambda(M[k])` and
/// `delta(Psi(r,t)) <= gamma^floor((t-r+1)/(nB+1))`.
pub fn certify_contraction(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    start: usize,
    end: usize,
    window: usize,
) -> Result<ContractionReport> {
    if start == 0 || start > end {
        return Err(Error::IterationOutOfRange {
            t: start,
            horizon: s.horizon(),
        });
    }
    let c = ContractionConstants::new(ag.base(), window);
    let mut psi = DenseMatrix::identity(ag.m());
    let mut hajnal_product = 1.0;
    for t in start..=end {
        let m = build_iteration_matrix(ag, s, t)?.matrix;
        hajnal_product *= lambda_coefficient(&m)?;
        psi = psi.mul(&m);
    }
    let delta = delta_coefficient(&psi)?;
    let gamma_bound = c.gamma_blocks(end + 1 - start);
    let hajnal_pass = delta <= hajnal_product + CONTRACTION_SLACK;
    let gamma_pass = delta <= gamma_bound + CONTRACTION_SLACK;
    Ok(ContractionReport {
        delta,
        hajnal_product,
        gamma_bound,
        hajnal_pass,
        gamma_pass,
        pass: hajnal_pass && gamma_pass,
    })
}

/// Pass/fail flags of a [`MatrixAudit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditFlags {
    /// `None` when the window is shorter than `nB + 1`.
    pub entry_lower_bound: Option<bool>,
    pub hajnal: bool,
    pub gamma_contraction: bool,
    pub row_stochastic: bool,
}

/// The matrix-audit report written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixAudit {
    pub window: [usize; 2],
    pub reliability_window: usize,
    pub delta: f64,
    pub lambda_product: f64,
    pub gamma_bound: f64,
    pub min_entry: f64,
    pub beta_bound: Option<f64>,
    pub max_row_sum_error: f64,
    pub pass_flags: AuditFlags,
}

impl MatrixAudit {
    pub fn pass(&self) -> bool {
        let f = &self.pass_flags;
        f.entry_lower_bound.unwrap_or(true) && f.hajnal && f.gamma_contraction && f.row_stochastic
    }
}

/// Runs every matrix certification on the window `[start, end]`.
pub fn audit_window(
    ag: &AugmentedGraph,
    s: &FailureSchedule,
    start: usize,
    end: usize,
    window: usize,
) -> Result<MatrixAudit> {
    let contraction = certify_contraction(ag, s, start, end, window)?;
    let mut max_row_sum_error: f64 = 0.0;
    for t in start..=end {
        let m = build_iteration_matrix(ag, s, t)?.matrix;
        for sum in m.row_sums() {
            max_row_sum_error = max_row_sum_error.max((sum - 1.0).abs());
        }
    }
    let psi = matrix_product(ag, s, start, end)?;
    for sum in psi.matrix.row_sums() {
        max_row_sum_error = max_row_sum_error.max((sum - 1.0).abs());
    }
    let entry = match certify_entry_lower_bound(ag, s, start, end, window) {
        Ok(report) => Some(report),
        Err(Error::WindowTooShort { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(MatrixAudit {
        window: [start, end],
        reliability_window: window,
        delta: contraction.delta,
        lambda_product: contraction.hajnal_product,
        gamma_bound: contraction.gamma_bound,
        min_entry: psi.matrix.min_entry(),
        beta_bound: entry.map(|e| e.bound),
        max_row_sum_error,
        pass_flags: AuditFlags {
            entry_lower_bound: entry.map(|e| e.pass),
            hajnal: contraction.hajnal_pass,
            gamma_contraction: contraction.gamma_pass,
            row_stochastic: max_row_sum_error <= 1e-12,
        },
    })
}
