//! Distributed dual averaging with convergent robust push-sum as the mixing
//! step, plus the centralized baseline and the bound evaluators.
//!
//! The proximal function is `psi(x) = |x|^2 / 2`, so the primal step
//! `argmin_{x in X} <z, x> + psi(x) / alpha` is the Euclidean projection of
//! `-alpha z` onto `X`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::ContractionConstants;
use crate::consensus::RobustNetwork;
use crate::error::{Error, Result};
use crate::failure::FailureSchedule;
use crate::graph::{DirectedGraph, NodeKind};
use crate::numeric::{axpy, dot, fmt_f64, norm2, sub};

/// Compact convex feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Euclidean ball centered at the origin.
    Ball { radius: f64 },
}

impl FeasibleSet {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            FeasibleSet::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "box bounds must have {dim} coordinates"
                    )));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
                    return Err(Error::InvalidProblem("box needs finite lo <= hi".into()));
                }
            }
            FeasibleSet::Ball { radius } => {
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidProblem("ball radius must be finite and >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Euclidean projection.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect(),
            FeasibleSet::Ball { radius } => {
                let norm = norm2(x);
                if norm <= *radius {
                    x.to_vec()
                } else {
                    x.iter().map(|v| v * radius / norm).collect()
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            FeasibleSet::Ball { radius } => norm2(x) <= radius + tol,
        }
    }

    /// `psi` at the point of `X` farthest from the origin.
    pub fn max_psi(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => {
                0.5 * lo
                    .iter()
                    .zip(hi)
                    .map(|(l, h)| (l * l).max(h * h))
                    .sum::<f64>()
            }
            FeasibleSet::Ball { radius } => 0.5 * radius * radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Box { lo, hi } => norm2(&sub(hi, lo)),
            FeasibleSet::Ball { radius } => 2.0 * radius,
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            FeasibleSet::Box { lo, hi } => (lo.clone(), hi.clone()),
            FeasibleSet::Ball { radius } => (vec![-radius; dim], vec![*radius; dim]),
        }
    }
}

/// One agent's private convex objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// `<c, x>`
    Linear { c: Vec<f64> },
    /// `sum_k |x_k - a_k|`
    AbsDistance { a: Vec<f64> },
    /// `||x - a||_2`
    L2Distance { a: Vec<f64> },
}

impl Component {
    pub fn dim(&self) -> usize {
        match self {
            Component::Linear { c } => c.len(),
            Component::AbsDistance { a } | Component::L2Distance { a } => a.len(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Component::Linear { c } => dot(c, x),
            Component::AbsDistance { a } => x.iter().zip(a).map(|(v, ak)| (v - ak).abs()).sum(),
            Component::L2Distance { a } => norm2(&sub(x, a)),
        }
    }

    /// A subgradient; at kinks 0 is returned, which lies in the
    /// subdifferential of every kind here.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Component::Linear { c } => c.clone(),
            Component::AbsDistance { a } => x
                .iter()
                .zip(a)
                .map(|(v, ak)| {
                    let diff = v - ak;
                    if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            Component::L2Distance { a } => {
                let diff = sub(x, a);
                let norm = norm2(&diff);
                if norm == 0.0 {
                    vec![0.0; diff.len()]
                } else {
                    diff.iter().map(|v| v / norm).collect()
                }
            }
        }
    }

    /// Tight l2 Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Component::Linear { c } => norm2(c),
            Component::AbsDistance { a } => (a.len() as f64).sqrt(),
            Component::L2Distance { .. } => 1.0,
        }
    }
}

/// `min_{x in X} (1/n) sum_i h_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptProblem {
    dim: usize,
    components: Vec<Component>,
    lipschitz: f64,
    feasible: FeasibleSet,
    r_squared: f64,
    known_optimum: Option<Vec<f64>>,
}

impl OptProblem {
    /// `lipschitz` defaults to the largest component constant and the
    /// proximal radius `R^2` to `psi` at the farthest feasible point.
    pub fn new(
        components: Vec<Component>,
        feasible: FeasibleSet,
        lipschitz: Option<f64>,
    ) -> Result<Self> {
        let dim = components
            .first()
            .map(Component::dim)
            .ok_or_else(|| Error::InvalidProblem("no components".into()))?;
        if dim == 0 || components.iter().any(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch(
                "components must share a positive dimension".into(),
            ));
        }
        feasible.validate(dim)?;
        let natural = components.iter().map(Component::lipschitz).fold(0.0, f64::max);
        let lipschitz = match lipschitz {
            Some(l) if l >= natural && l.is_finite() => l,
            Some(l) => {
                return Err(Error::InvalidProblem(format!(
                    "Lipschitz constant {l} is below the components' {natural}"
                )))
            }
            None => natural,
        };
        let r_squared = feasible.max_psi();
        Ok(OptProblem {
            dim,
            components,
            lipschitz,
            feasible,
            r_squared,
            known_optimum: None,
        })
    }

    /// Overrides the default `R^2` (must still bound `psi(x*)`).
    pub fn with_r_squared(mut self, r_squared: f64) -> Self {
        self.r_squared = r_squared;
        self
    }

    /// Records an analytically known minimizer for [`solve_reference`].
    pub fn with_known_optimum(mut self, x: Vec<f64>) -> Self {
        self.known_optimum = Some(x);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn agents(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn r_squared(&self) -> f64 {
        self.r_squared
    }

    pub fn known_optimum(&self) -> Option<&[f64]> {
        self.known_optimum.as_deref()
    }

    /// `h(x) = (1/n) sum_i h_i(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.value(x)).sum::<f64>() / self.agents() as f64
    }

    /// Average of the component subgradients.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for c in &self.components {
            axpy(1.0 / self.agents() as f64, &c.subgradient(x), &mut g);
        }
        g
    }

    /// Spot-checks convexity (midpoint inequality) and the subgradient norm
    /// bound on pairs of feasible points drawn from a fixed lattice.
    pub fn check_assumptions(&self, samples: usize) -> Result<()> {
        let (lo, hi) = self.feasible.bounds(self.dim);
        let point = |k: usize| -> Vec<f64> {
            let raw: Vec<f64> = (0..self.dim)
                .map(|c| {
                    // Low-discrepancy fractions in [0, 1).
                    let frac = ((k + 1) as f64 * (0.618_033_988_749_895 + c as f64 * 0.414_213_562))
                        .fract();
                    lo[c] + frac * (hi[c] - lo[c])
                })
                .collect();
            self.feasible.project(&raw)
        };
        for k in 0..samples {
            let (x, y) = (point(2 * k), point(2 * k + 1));
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            for (i, c) in self.components.iter().enumerate() {
                let lhs = c.value(&mid);
                let rhs = 0.5 * (c.value(&x) + c.value(&y));
                if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                    return Err(Error::InvalidProblem(format!("component {i} fails convexity")));
                }
                if norm2(&c.subgradient(&x)) > self.lipschitz * (1.0 + 1e-12) {
                    return Err(Error::InvalidProblem(format!(
                        "component {i} subgradient exceeds L"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `alpha[0] = A`, `alpha[t] = A / sqrt(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeSchedule {
    pub a: f64,
}

impl StepSizeSchedule {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidProblem(format!("step constant {a} must be positive")));
        }
        Ok(StepSizeSchedule { a })
    }

    pub fn alpha(&self, t: usize) -> f64 {
        if t == 0 {
            self.a
        } else {
            self.a / (t as f64).sqrt()
        }
    }
}

/// `argmin_{x in X} <z, x> + |x|^2 / (2 alpha)`.
pub fn proximal_projection(z: &[f64], alpha: f64, set: &FeasibleSet) -> Vec<f64> {
    let target: Vec<f64> = z.iter().map(|v| -alpha * v).collect();
    set.project(&target)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedTrajectory {
    /// `x[t]` for `t = 0..=T`.
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

/// `z[t+1] = z[t] + g[t]`, `x[t+1] = prox(z[t+1], alpha[t])`, from zero.
pub fn run_centralized_dual_averaging(
    p: &OptProblem,
    steps: &StepSizeSchedule,
    horizon: usize,
) -> CentralizedTrajectory {
    let mut x = vec![vec![0.0; p.dim()]];
    let mut z = vec![vec![0.0; p.dim()]];
    for t in 0..horizon {
        let mut next = z[t].clone();
        axpy(1.0, &p.subgradient(&x[t]), &mut next);
        x.push(proximal_projection(&next, steps.alpha(t), p.feasible()));
        z.push(next);
    }
    CentralizedTrajectory { x, z }
}

/// Everything recorded by a distributed run, indexed by `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    pub n: usize,
    /// `x[t][agent]`
    pub x: Vec<Vec<Vec<f64>>>,
    /// `z[t][augmented node]`, real agents first.
    pub z: Vec<Vec<Vec<f64>>>,
    /// `w[t][augmented node]`
    pub w: Vec<Vec<f64>>,
    /// `(1/n) sum_{r < t} sum_i g_i[r]`, accumulated from raw subgradients.
    pub z_bar: Vec<Vec<f64>>,
    /// `prox(z_bar[t], alpha[t-1])` for `t >= 1`; `x[0]` at `t = 0`.
    pub y_central: Vec<Vec<f64>>,
}

impl OptTrace {
    pub fn horizon(&self) -> usize {
        self.x.len() - 1
    }

    /// `z_i[t] / w_i[t]` for a real agent.
    pub fn ratio(&self, t: usize, i: usize) -> Vec<f64> {
        let w = self.w[t][i];
        self.z[t][i].iter().map(|v| v / w).collect()
    }

    /// `(1/n)` times the total `z` over all augmented nodes.
    pub fn augmented_average(&self, t: usize) -> Vec<f64> {
        let mut avg = vec![0.0; self.z_bar[t].len()];
        for z in &self.z[t] {
            axpy(1.0 / self.n as f64, z, &mut avg);
        }
        avg
    }

    /// Writes `t,node_id,kind,z_1..z_d,w,x_1..x_d` with 1-based augmented
    /// ids; `x` is empty for buffers.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let d = self.z_bar[0].len();
        let mut header = vec!["t".to_string(), "node_id".into(), "kind".into()];
        header.extend((1..=d).map(|k| format!("z_{k}")));
        header.push("w".into());
        header.extend((1..=d).map(|k| format!("x_{k}")));
        w.write_record(&header)?;
        for t in 0..=self.horizon() {
            for node in 0..self.w[t].len() {
                let kind = if node < self.n {
                    NodeKind::Real
                } else {
                    NodeKind::Virtual
                };
                let mut record = vec![t.to_string(), (node + 1).to_string(), kind.as_str().into()];
                record.extend(self.z[t][node].iter().map(|&v| fmt_f64(v)));
                record.push(fmt_f64(self.w[t][node]));
                if node < self.n {
                    record.extend(self.x[t][node].iter().map(|&v| fmt_f64(v)));
                } else {
                    record.extend(std::iter::repeat_n(String::new(), d));
                }
                w.write_record(&record)?;
            }
        }
        w.flush().map_err(|e| Error::io("<optimization trace csv>", e))?;
        Ok(())
    }
}

/// Robust push-sum distributed dual averaging.
///
/// Each round runs one convergent robust push-sum step on `(z, w)`, adds the
/// local subgradient at the previous iterate to `z_i`, then sets
/// `x_i[t] = prox(z_i[t] / w_i[t], alpha[t-1])`.
pub fn run_rpsda(
    g: &DirectedGraph,
    p: &OptProblem,
    schedule: &FailureSchedule,
    steps: &StepSizeSchedule,
    horizon: usize,
) -> Result<OptTrace> {
    let n = g.n();
    if p.agents() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} objective components for {n} agents",
            p.agents()
        )));
    }
    schedule.ensure_covers(g, horizon)?;
    let d = p.dim();
    let mut net = RobustNetwork::new(g, &vec![vec![0.0; d]; n])?;
    let mut x = vec![vec![vec![0.0; d]; n]];
    let first = net.snapshot();
    let mut z = vec![first.z];
    let mut w = vec![first.w];
    let mut z_bar = vec![vec![0.0; d]];
    let mut y_central = vec![vec![0.0; d]];

    for t in 1..=horizon {
        net.step_convergent(schedule);
        let mut grad_sum = vec![0.0; d];
        let mut next_x = Vec::with_capacity(n);
        for (i, component) in p.components().iter().enumerate() {
            let grad = component.subgradient(&x[t - 1][i]);
            axpy(1.0, &grad, &mut grad_sum);
            let agent = net.agent_mut(i);
            axpy(1.0, &grad, &mut agent.z);
            let ratio: Vec<f64> = agent.z.iter().map(|v| v / agent.w).collect();
            next_x.push(proximal_projection(&ratio, steps.alpha(t - 1), p.feasible()));
        }
        let mut zb = z_bar[t - 1].clone();
        axpy(1.0 / n as f64, &grad_sum, &mut zb);
        y_central.push(proximal_projection(&zb, steps.alpha(t - 1), p.feasible()));
        z_bar.push(zb);
        x.push(next_x);
        let snap = net.snapshot();
        z.push(snap.z);
        w.push(snap.w);
    }
    Ok(OptTrace {
        n,
        x,
        z,
        w,
        z_bar,
        y_central,
    })
}

/// `(1/T) sum_{t=1..T} x_j[t]`; the origin when `T = 0`.
pub fn running_average(trace: &OptTrace, agent: usize, horizon: usize) -> Result<Vec<f64>> {
    if horizon > trace.horizon() {
        return Err(Error::IterationOutOfRange {
            t: horizon,
            horizon: trace.horizon(),
        });
    }
    let d = trace.z_bar[0].len();
    let mut avg = vec![0.0; d];
    for t in 1..=horizon {
        axpy(1.0 / horizon as f64, &trace.x[t][agent], &mut avg);
    }
    Ok(avg)
}

fn require_horizon(g: &DirectedGraph, window: usize, horizon: usize) -> Result<ContractionConstants> {
    let c = ContractionConstants::new(g, window);
    if horizon < c.block {
        return Err(Error::HorizonTooShort {
            horizon,
            required: c.block,
        });
    }
    Ok(c)
}

/// Optimality-gap bound for the running average at any agent after `T`
/// rounds of RPSDA with `alpha[t] = A / sqrt(t)`.
pub fn theorem2_bound(
    p: &OptProblem,
    g: &DirectedGraph,
    window: usize,
    steps: &StepSizeSchedule,
    horizon: usize,
) -> Result<f64> {
    let c = require_horizon(g, window, horizon)?;
    let (l, a, t) = (p.lipschitz(), steps.a, horizon as f64);
    let step_sum_ratio = (2.0 * t.sqrt() + 1.0) / t;
    let proximal = p.r_squared() / (a * t.sqrt());
    if l == 0.0 {
        return Ok(proximal);
    }
    let local = 2.0 * l * l * a * step_sum_ratio;
    // A lone agent's ratio is the network average, so there is no mixing term.
    let mixing = if g.n() == 1 {
        0.0
    } else {
        3.0 * l * l * a * c.mixing_factor() * step_sum_ratio
    };
    Ok(local + proximal + mixing)
}

/// `L / (beta^k (1 - gamma^(1/k)) gamma^((k-1)/k))` with `k = nB + 1`.
///
/// Zero for a single agent, whose ratio is exactly the average.
pub fn mixing_error_bound(g: &DirectedGraph, window: usize, lipschitz: f64) -> f64 {
    if lipschitz == 0.0 || g.n() == 1 {
        return 0.0;
    }
    lipschitz * ContractionConstants::new(g, window).mixing_factor()
}

/// `max_i || z_bar[t] - z_i[t] / w_i[t] ||` over real agents.
pub fn measured_mixing_error(trace: &OptTrace, t: usize) -> f64 {
    (0..trace.n)
        .map(|i| norm2(&sub(&trace.z_bar[t], &trace.ratio(t, i))))
        .fold(0.0, f64::max)
}

/// Worst ratio of measured mixing error to its bound over `t >= nB+1`,
/// together with the bound. Errors if the trace is too short to check.
pub fn certify_mixing(
    trace: &OptTrace,
    g: &DirectedGraph,
    window: usize,
    lipschitz: f64,
) -> Result<MixingReport> {
    let c = require_horizon(g, window, trace.horizon())?;
    let bound = mixing_error_bound(g, window, lipschitz);
    let mut worst = 0.0f64;
    let mut worst_t = c.block;
    for t in c.block..=trace.horizon() {
        let e = measured_mixing_error(trace, t);
        if e > worst {
            worst = e;
            worst_t = t;
        }
    }
    Ok(MixingReport {
        max_measured: worst,
        at: worst_t,
        bound,
        pass: worst <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingReport {
    pub max_measured: f64,
    pub at: usize,
    pub bound: f64,
    pub pass: bool,
}

/// A reference minimizer and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Resolution of the search; the value is within `L * resolution` of optimal.
    pub resolution: f64,
}

/// Grid step relative to the feasible set's diameter.
pub const GRID_RELATIVE_STEP: f64 = 1e-4;

/// Brute-force minimizer for `d <= 2`, or the recorded analytic optimum.
///
/// In one dimension the full grid at step `1e-4 * diam(X)` is scanned and the
/// best cell refined by golden-section search. In two dimensions a 201-point
/// grid per axis is scanned and repeatedly re-centered on the best point with
/// the cell size shrunk tenfold until it reaches the same step.
pub fn solve_reference(p: &OptProblem) -> Result<ReferenceSolution> {
    if let Some(x) = p.known_optimum() {
        let x = p.feasible().project(x);
        return Ok(ReferenceSolution {
            value: p.value(&x),
            x,
            resolution: 0.0,
        });
    }
    let step = GRID_RELATIVE_STEP * p.feasible().diameter();
    let (lo, hi) = p.feasible().bounds(p.dim());
    let eval = |x: &[f64]| {
        let xp = p.feasible().project(x);
        (p.value(&xp), xp)
    };
    match p.dim() {
        1 => {
            let cells = ((hi[0] - lo[0]) / step).ceil().max(1.0) as usize;
            let mut best = (f64::INFINITY, vec![lo[0]]);
            for k in 0..=cells {
                let v = (lo[0] + k as f64 * step).min(hi[0]);
                let cand = eval(&[v]);
                if cand.0 < best.0 {
                    best = cand;
                }
            }
            let centre = best.1[0];
            let refined = golden_section(
                |v| eval(&[v]).0,
                (centre - step).max(lo[0]),
                (centre + step).min(hi[0]),
                1e-12,
            );
            let cand = eval(&[refined]);
            if cand.0 < best.0 {
                best = cand;
            }
            Ok(ReferenceSolution {
                x: best.1,
                value: best.0,
                resolution: step,
            })
        }
        2 => {
            const POINTS: usize = 201;
            let mut centre = vec![0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
            let mut half = vec![0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])];
            let mut best = eval(&centre);
            loop {
                let cell: Vec<f64> = half.iter().map(|h| 2.0 * h / (POINTS - 1) as f64).collect();
                for a in 0..POINTS {
                    for b in 0..POINTS {
                        let x = [
                            (centre[0] - half[0] + a as f64 * cell[0]).clamp(lo[0], hi[0]),
                            (centre[1] - half[1] + b as f64 * cell[1]).clamp(lo[1], hi[1]),
                        ];
                        let cand = eval(&x);
                        if cand.0 < best.0 {
                            best = cand;
                        }
                    }
                }
                if cell.iter().all(|&c| c <= step) {
                    break;
                }
                centre = best.1.clone();
                half = cell.iter().map(|c| 10.0 * c).collect();
            }
            Ok(ReferenceSolution {
                x: best.1,
                value: best.0,
                resolution: step,
            })
        }
        d => Err(Error::DimensionTooLarge(d)),
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    while (b - a).abs() > tol {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box() -> FeasibleSet {
        FeasibleSet::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        }
    }

    fn median_problem() -> OptProblem {
        OptProblem::new(
            [0.0, 0.5, 1.0]
                .iter()
                .map(|&a| Component::AbsDistance { a: vec![a] })
                .collect(),
            unit_box(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        let ball = FeasibleSet::Ball { radius: 1.0 };
        assert_eq!(proximal_projection(&[0.0, 0.0], 0.7, &ball), vec![0.0, 0.0]);
        assert_eq!(proximal_projection(&[1.0, 0.0], 0.5, &ball), vec![-0.5, 0.0]);
        assert_eq!(proximal_projection(&[4.0, 0.0], 1.0, &ball), vec![-1.0, 0.0]);
        let b = FeasibleSet::Box {
            lo: vec![-1.0, 0.0],
            hi: vec![1.0, 2.0],
        };
        assert_eq!(proximal_projection(&[3.0, -1.0], 0.5, &b), vec![-1.0, 0.5]);
    }

    #[test]
    fn step_sizes() {
        let s = StepSizeSchedule::new(2.0).unwrap();
        assert_eq!(s.alpha(0), 2.0);
        assert_eq!(s.alpha(1), 2.0);
        assert_eq!(s.alpha(4), 1.0);
        assert!(StepSizeSchedule::new(0.0).is_err());
    }

    #[test]
    fn centralized_moves_toward_kink() {
        let p = OptProblem::new(
            vec![Component::AbsDistance { a: vec![0.5] }],
            FeasibleSet::Box {
                lo: vec![-1.0],
                hi: vec![1.0],
            },
            None,
        )
        .unwrap();
        let traj = run_centralized_dual_averaging(&p, &StepSizeSchedule::new(1.0).unwrap(), 10_000);
        assert!(traj.x[1][0] > 0.0);
        assert!((traj.x[10_000][0] - 0.5).abs() < 0.05);
    }

    #[test]
    fn centralized_fixed_point_at_origin() {
        let p = OptProblem::new(
            vec![Component::AbsDistance { a: vec![0.0] }],
            unit_box(),
            None,
        )
        .unwrap();
        let traj = run_centralized_dual_averaging(&p, &StepSizeSchedule::new(1.0).unwrap(), 50);
        assert!(traj.x.iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn centralized_linear_on_ball() {
        let c = vec![3.0, -4.0];
        let p = OptProblem::new(
            vec![Component::Linear { c: c.clone() }],
            FeasibleSet::Ball { radius: 1.0 },
            None,
        )
        .unwrap();
        let traj = run_centralized_dual_averaging(&p, &StepSizeSchedule::new(1.0).unwrap(), 100);
        assert_abs_diff_eq!(traj.x[100][0], -0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(traj.x[100][1], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn rpsda_single_agent_matches_centralized() {
        let g = DirectedGraph::new(1, &[]).unwrap();
        let p = OptProblem::new(
            vec![Component::L2Distance { a: vec![0.3, -0.2] }],
            FeasibleSet::Ball { radius: 1.0 },
            None,
        )
        .unwrap();
        let steps = StepSizeSchedule::new(0.7).unwrap();
        let s = FailureSchedule::reliable(&g, 200);
        let trace = run_rpsda(&g, &p, &s, &steps, 200).unwrap();
        let central = run_centralized_dual_averaging(&p, &steps, 200);
        for t in 0..=200 {
            assert_eq!(trace.x[t][0], central.x[t]);
            assert_eq!(trace.w[t][0], 1.0);
        }
    }

    #[test]
    fn rpsda_identical_components_stay_in_lockstep() {
        let g = DirectedGraph::complete(4).unwrap();
        let p = OptProblem::new(
            vec![Component::L2Distance { a: vec![0.2, 0.1] }; 4],
            FeasibleSet::Ball { radius: 1.0 },
            None,
        )
        .unwrap();
        let s = FailureSchedule::reliable(&g, 100);
        let trace = run_rpsda(&g, &p, &s, &StepSizeSchedule::new(1.0).unwrap(), 100).unwrap();
        for t in 0..=100 {
            for i in 1..4 {
                for k in 0..2 {
                    assert_abs_diff_eq!(trace.x[t][i][k], trace.x[t][0][k], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn rpsda_rejects_mismatched_sizes() {
        let g = DirectedGraph::complete(2).unwrap();
        let s = FailureSchedule::reliable(&g, 5);
        let steps = StepSizeSchedule::new(1.0).unwrap();
        assert!(matches!(
            run_rpsda(&g, &median_problem(), &s, &steps, 5),
            Err(Error::DimensionMismatch(_))
        ));
        let g3 = DirectedGraph::ring(3).unwrap();
        assert!(matches!(
            run_rpsda(&g3, &median_problem(), &FailureSchedule::reliable(&g3, 4), &steps, 5),
            Err(Error::ScheduleTooShort { .. })
        ));
    }

    #[test]
    fn running_average_examples() {
        let trace = OptTrace {
            n: 1,
            x: vec![vec![vec![7.0]], vec![vec![0.0]], vec![vec![1.0]]],
            z: vec![],
            w: vec![],
            z_bar: vec![vec![0.0]],
            y_central: vec![],
        };
        assert_eq!(running_average(&trace, 0, 2).unwrap(), vec![0.5]);
        assert_eq!(running_average(&trace, 0, 1).unwrap(), vec![0.0]);
        assert!(running_average(&trace, 0, 3).is_err());
    }

    #[test]
    fn theorem2_bound_zero_lipschitz() {
        let g = DirectedGraph::complete(2).unwrap();
        let p = OptProblem::new(
            vec![Component::Linear { c: vec![0.0] }; 2],
            unit_box(),
            None,
        )
        .unwrap();
        let steps = StepSizeSchedule::new(2.0).unwrap();
        let b = theorem2_bound(&p, &g, 1, &steps, 100).unwrap();
        assert_abs_diff_eq!(b, 0.5 / (2.0 * 10.0), epsilon = 1e-15);
        assert!(matches!(
            theorem2_bound(&p, &g, 1, &steps, 2),
            Err(Error::HorizonTooShort { horizon: 2, required: 3 })
        ));
        assert_eq!(mixing_error_bound(&g, 1, 0.0), 0.0);
    }

    #[test]
    fn reference_solutions() {
        let single = OptProblem::new(
            vec![Component::AbsDistance { a: vec![0.5] }],
            unit_box(),
            None,
        )
        .unwrap();
        let r = solve_reference(&single).unwrap();
        assert_abs_diff_eq!(r.x[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);

        let r = solve_reference(&median_problem()).unwrap();
        assert_abs_diff_eq!(r.x[0], 0.5, epsilon = 1e-4);
        assert_abs_diff_eq!(r.value, 1.0 / 3.0, epsilon = 1e-9);

        let linear = OptProblem::new(
            vec![Component::Linear { c: vec![1.0, 1.0] }],
            FeasibleSet::Ball { radius: 1.0 },
            None,
        )
        .unwrap();
        let r = solve_reference(&linear).unwrap();
        assert!((r.value + 2f64.sqrt()).abs() <= linear.lipschitz() * r.resolution);

        let three_d = OptProblem::new(
            vec![Component::Linear { c: vec![1.0, 0.0, 0.0] }],
            FeasibleSet::Ball { radius: 1.0 },
            None,
        )
        .unwrap();
        assert!(matches!(solve_reference(&three_d), Err(Error::DimensionTooLarge(3))));
        let known = three_d.with_known_optimum(vec![-1.0, 0.0, 0.0]);
        assert_eq!(solve_reference(&known).unwrap().value, -1.0);
    }

    #[test]
    fn assumption_checks() {
        median_problem().check_assumptions(50).unwrap();
        assert!(OptProblem::new(
            vec![Component::Linear { c: vec![3.0, 4.0] }],
            FeasibleSet::Ball { radius: 1.0 },
            Some(1.0),
        )
        .is_err());
    }
}
