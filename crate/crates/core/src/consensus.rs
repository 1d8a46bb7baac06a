//! Synchronous-round push-sum protocols.
//!
//! Three variants share the same value/weight bookkeeping:
//!
//! - plain push-sum, which assumes every message arrives;
//! - robust push-sum, where each agent broadcasts its cumulative sent mass
//!   `(sigma, sigma_tilde)` and receivers keep the last delivered cumulative
//!   `(rho, rho_tilde)` per incoming link, so dropped mass is recovered on the
//!   next delivery;
//! - convergent robust push-sum, which adds a second local split per round so
//!   the mass parked on a link buffer never resets to zero.
//!
//! Link buffers are not stored. The buffer of link `(j, i)` holds
//! `sigma_j - rho_ji`, reconstructed whenever a snapshot is taken.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::ContractionConstants;
use crate::error::{Error, Result};
use crate::failure::FailureSchedule;
use crate::graph::{DirectedGraph, NodeKind};
use crate::numeric::{axpy, fmt_f64, norm2, sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PushSum,
    RobustPushSum,
    ConvergentRobustPushSum,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PushSum => "push_sum",
            Algorithm::RobustPushSum => "robust_push_sum",
            Algorithm::ConvergentRobustPushSum => "convergent_robust_push_sum",
        }
    }
}

/// Local state of one agent. `rho` and `rho_tilde` are indexed like
/// [`DirectedGraph::in_edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub z: Vec<f64>,
    pub w: f64,
    pub sigma: Vec<f64>,
    pub sigma_tilde: f64,
    pub rho: Vec<Vec<f64>>,
    pub rho_tilde: Vec<f64>,
}

impl AgentState {
    fn new(z: Vec<f64>, in_degree: usize) -> Self {
        let d = z.len();
        AgentState {
            z,
            w: 1.0,
            sigma: vec![0.0; d],
            sigma_tilde: 0.0,
            rho: vec![vec![0.0; d]; in_degree],
            rho_tilde: vec![0.0; in_degree],
        }
    }
}

/// The robust protocols as a state machine over a fixed graph.
#[derive(Debug, Clone)]
pub struct RobustNetwork<'g> {
    graph: &'g DirectedGraph,
    agents: Vec<AgentState>,
    t: usize,
}

impl<'g> RobustNetwork<'g> {
    /// Starts from `z_i[0] = initial[i]`, `w_i[0] = 1`, all cumulative
    /// counters zero.
    pub fn new(graph: &'g DirectedGraph, initial: &[Vec<f64>]) -> Result<Self> {
        check_inputs(graph, initial)?;
        let agents = initial
            .iter()
            .enumerate()
            .map(|(i, z)| AgentState::new(z.clone(), graph.in_edges(i).len()))
            .collect();
        Ok(RobustNetwork {
            graph,
            agents,
            t: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn agent_mut(&mut self, i: usize) -> &mut AgentState {
        &mut self.agents[i]
    }

    fn share(&self, i: usize) -> f64 {
        1.0 / (self.graph.out_degree(i) + 1) as f64
    }

    // Fold the deliveries of iteration `t` into receivers' rho, returning the
    // per-agent sum of newly delivered (value, weight).
    fn deliver(
        &mut self,
        schedule: &FailureSchedule,
        t: usize,
        sent: &[(Vec<f64>, f64)],
    ) -> Vec<(Vec<f64>, f64)> {
        let g = self.graph;
        let dim = sent.first().map_or(0, |s| s.0.len());
        let mut received = vec![(vec![0.0; dim], 0.0); g.n()];
        for (i, agent) in self.agents.iter_mut().enumerate() {
            for (pos, &edge) in g.in_edges(i).iter().enumerate() {
                if !schedule.is_reliable(edge, t) {
                    continue;
                }
                let (src, _) = g.edges()[edge];
                let (sigma, sigma_tilde) = &sent[src];
                let delta = sub(sigma, &agent.rho[pos]);
                axpy(1.0, &delta, &mut received[i].0);
                received[i].1 += sigma_tilde - agent.rho_tilde[pos];
                agent.rho[pos].clone_from(sigma);
                agent.rho_tilde[pos] = *sigma_tilde;
            }
        }
        received
    }

    /// One round of robust push-sum. The self contribution is
    /// `z_i / (d_i + 1)`.
    pub fn step_robust(&mut self, schedule: &FailureSchedule) {
        let t = self.t + 1;
        let shares: Vec<f64> = (0..self.graph.n()).map(|i| self.share(i)).collect();
        let kept: Vec<(Vec<f64>, f64)> = self
            .agents
            .iter()
            .zip(&shares)
            .map(|(a, &s)| (a.z.iter().map(|v| v * s).collect(), a.w * s))
            .collect();
        for (agent, (dz, dw)) in self.agents.iter_mut().zip(&kept) {
            axpy(1.0, dz, &mut agent.sigma);
            agent.sigma_tilde += dw;
        }
        let sent: Vec<_> = self
            .agents
            .iter()
            .map(|a| (a.sigma.clone(), a.sigma_tilde))
            .collect();
        let received = self.deliver(schedule, t, &sent);
        for ((agent, (kz, kw)), (rz, rw)) in self.agents.iter_mut().zip(kept).zip(received) {
            agent.z = kz;
            axpy(1.0, &rz, &mut agent.z);
            agent.w = kw + rw;
        }
        self.t = t;
    }

    /// One round of convergent robust push-sum: split, broadcast the
    /// intermediate cumulative mass, receive, then split once more into the
    /// cumulative counters.
    pub fn step_convergent(&mut self, schedule: &FailureSchedule) {
        let t = self.t + 1;
        let shares: Vec<f64> = (0..self.graph.n()).map(|i| self.share(i)).collect();
        let kept: Vec<(Vec<f64>, f64)> = self
            .agents
            .iter()
            .zip(&shares)
            .map(|(a, &s)| (a.z.iter().map(|v| v * s).collect(), a.w * s))
            .collect();
        let sent: Vec<(Vec<f64>, f64)> = self
            .agents
            .iter()
            .zip(&kept)
            .map(|(a, (kz, kw))| {
                let mut sigma_plus = a.sigma.clone();
                axpy(1.0, kz, &mut sigma_plus);
                (sigma_plus, a.sigma_tilde + kw)
            })
            .collect();
        let received = self.deliver(schedule, t, &sent);
        for (i, (agent, ((kz, kw), (rz, rw)))) in self
            .agents
            .iter_mut()
            .zip(kept.into_iter().zip(received))
            .enumerate()
        {
            let share = shares[i];
            let mut z_plus = kz;
            axpy(1.0, &rz, &mut z_plus);
            let w_plus = kw + rw;
            let (sigma_plus, sigma_tilde_plus) = &sent[i];
            agent.z = z_plus.iter().map(|v| v * share).collect();
            agent.w = w_plus * share;
            agent.sigma = sigma_plus.clone();
            axpy(1.0, &agent.z, &mut agent.sigma);
            agent.sigma_tilde = sigma_tilde_plus + agent.w;
        }
        self.t = t;
    }

    /// Mass parked on link `edge`: `(sigma_src - rho, sigma_tilde_src - rho_tilde)`.
    pub fn buffer(&self, edge: usize) -> (Vec<f64>, f64) {
        let (src, dst) = self.graph.edges()[edge];
        let pos = self
            .graph
            .in_edges(dst)
            .iter()
            .position(|&e| e == edge)
            .expect("edge listed at its destination");
        let sender = &self.agents[src];
        let receiver = &self.agents[dst];
        (
            sub(&sender.sigma, &receiver.rho[pos]),
            sender.sigma_tilde - receiver.rho_tilde[pos],
        )
    }

    /// Values and weights on every augmented node, real agents first.
    pub fn snapshot(&self) -> Snapshot {
        let mut z: Vec<Vec<f64>> = self.agents.iter().map(|a| a.z.clone()).collect();
        let mut w: Vec<f64> = self.agents.iter().map(|a| a.w).collect();
        for edge in 0..self.graph.edge_count() {
            let (bz, bw) = self.buffer(edge);
            z.push(bz);
            w.push(bw);
        }
        Snapshot { z, w }
    }
}

fn check_inputs(g: &DirectedGraph, y: &[Vec<f64>]) -> Result<usize> {
    if y.len() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} inputs for {} agents",
            y.len(),
            g.n()
        )));
    }
    let d = y[0].len();
    if d == 0 || y.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch(
            "inputs must share a positive dimension".into(),
        ));
    }
    Ok(d)
}

/// Values and weights of every tracked node at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub z: Vec<Vec<f64>>,
    pub w: Vec<f64>,
}

/// Per-iteration record of a consensus run, `t = 0..=T`.
///
/// Robust traces hold all `n + |E|` augmented nodes; plain push-sum traces
/// hold the `n` real agents only.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusTrace {
    pub algorithm: Algorithm,
    pub n: usize,
    pub inputs: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
}

impl ConsensusTrace {
    pub fn horizon(&self) -> usize {
        self.snapshots.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn node_count(&self) -> usize {
        self.snapshots[0].w.len()
    }

    pub fn average(&self) -> Vec<f64> {
        let mut avg = vec![0.0; self.dim()];
        for y in &self.inputs {
            axpy(1.0 / self.n as f64, y, &mut avg);
        }
        avg
    }

    /// `z_i[t] / w_i[t]`, or `None` when the weight is zero.
    pub fn ratio(&self, t: usize, i: usize) -> Option<Vec<f64>> {
        let s = &self.snapshots[t];
        let w = s.w[i];
        (w != 0.0).then(|| s.z[i].iter().map(|v| v / w).collect())
    }

    /// Sum of `z` over every tracked node.
    pub fn value_mass(&self, t: usize) -> Vec<f64> {
        let mut total = vec![0.0; self.dim()];
        for z in &self.snapshots[t].z {
            axpy(1.0, z, &mut total);
        }
        total
    }

    pub fn weight_mass(&self, t: usize) -> f64 {
        self.snapshots[t].w.iter().sum()
    }

    /// Writes `t,node_id,kind,z_1..z_d,w,ratio_1..ratio_d` with 1-based
    /// augmented node ids. Ratios are left empty for buffers and for
    /// zero-weight agents.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let d = self.dim();
        let mut header = vec!["t".to_string(), "node_id".into(), "kind".into()];
        header.extend((1..=d).map(|k| format!("z_{k}")));
        header.push("w".into());
        header.extend((1..=d).map(|k| format!("ratio_{k}")));
        w.write_record(&header)?;
        for (t, snap) in self.snapshots.iter().enumerate() {
            for node in 0..snap.w.len() {
                let kind = if node < self.n {
                    NodeKind::Real
                } else {
                    NodeKind::Virtual
                };
                let mut record = vec![t.to_string(), (node + 1).to_string(), kind.as_str().into()];
                record.extend(snap.z[node].iter().map(|&v| fmt_f64(v)));
                record.push(fmt_f64(snap.w[node]));
                match (kind, self.ratio(t, node)) {
                    (NodeKind::Real, Some(r)) => record.extend(r.iter().map(|&v| fmt_f64(v))),
                    _ => record.extend(std::iter::repeat_n(String::new(), d)),
                }
                w.write_record(&record)?;
            }
        }
        w.flush().map_err(|e| Error::io("<trace csv>", e))?;
        Ok(())
    }
}

/// Plain push-sum on a reliable network.
pub fn run_push_sum(g: &DirectedGraph, y: &[Vec<f64>], horizon: usize) -> Result<ConsensusTrace> {
    check_inputs(g, y)?;
    let dim = y[0].len();
    let mut z: Vec<Vec<f64>> = y.to_vec();
    let mut w = vec![1.0; g.n()];
    let mut snapshots = vec![Snapshot {
        z: z.clone(),
        w: w.clone(),
    }];
    for _ in 0..horizon {
        let shares: Vec<f64> = (0..g.n())
            .map(|i| 1.0 / (g.out_degree(i) + 1) as f64)
            .collect();
        let mut next_z = vec![vec![0.0; dim]; g.n()];
        let mut next_w = vec![0.0; g.n()];
        for i in 0..g.n() {
            for j in std::iter::once(i).chain(g.in_neighbors(i).iter().copied()) {
                axpy(shares[j], &z[j], &mut next_z[i]);
                next_w[i] += w[j] * shares[j];
            }
        }
        z = next_z;
        w = next_w;
        snapshots.push(Snapshot {
            z: z.clone(),
            w: w.clone(),
        });
    }
    Ok(ConsensusTrace {
        algorithm: Algorithm::PushSum,
        n: g.n(),
        inputs: y.to_vec(),
        snapshots,
    })
}

fn run_robust(
    g: &DirectedGraph,
    y: &[Vec<f64>],
    schedule: &FailureSchedule,
    horizon: usize,
    algorithm: Algorithm,
) -> Result<ConsensusTrace> {
    schedule.ensure_covers(g, horizon)?;
    let mut net = RobustNetwork::new(g, y)?;
    let mut snapshots = Vec::with_capacity(horizon + 1);
    snapshots.push(net.snapshot());
    for _ in 0..horizon {
        match algorithm {
            Algorithm::RobustPushSum => net.step_robust(schedule),
            _ => net.step_convergent(schedule),
        }
        snapshots.push(net.snapshot());
    }
    Ok(ConsensusTrace {
        algorithm,
        n: g.n(),
        inputs: y.to_vec(),
        snapshots,
    })
}

pub fn run_robust_push_sum(
    g: &DirectedGraph,
    y: &[Vec<f64>],
    schedule: &FailureSchedule,
    horizon: usize,
) -> Result<ConsensusTrace> {
    run_robust(g, y, schedule, horizon, Algorithm::RobustPushSum)
}

pub fn run_convergent_robust_push_sum(
    g: &DirectedGraph,
    y: &[Vec<f64>],
    schedule: &FailureSchedule,
    horizon: usize,
) -> Result<ConsensusTrace> {
    run_robust(g, y, schedule, horizon, Algorithm::ConvergentRobustPushSum)
}

pub fn run(
    algorithm: Algorithm,
    g: &DirectedGraph,
    y: &[Vec<f64>],
    schedule: &FailureSchedule,
    horizon: usize,
) -> Result<ConsensusTrace> {
    match algorithm {
        Algorithm::PushSum => run_push_sum(g, y, horizon),
        _ => run_robust(g, y, schedule, horizon, algorithm),
    }
}

/// Upper bound on `||z_i[t]/w_i[t] - mean(y)||` for convergent robust
/// push-sum under a `window`-bounded schedule:
/// `||sum y|| / (n beta^(nB+1)) * gamma^floor(t / (nB+1))`.
pub fn theorem1_bound(g: &DirectedGraph, window: usize, y: &[Vec<f64>], t: usize) -> Result<f64> {
    check_inputs(g, y)?;
    if let Some(agent) = y.iter().position(|v| v.iter().any(|&c| c < 0.0)) {
        return Err(Error::NegativeInput { agent });
    }
    let mut total = vec![0.0; y[0].len()];
    for v in y {
        axpy(1.0, v, &mut total);
    }
    let mass = norm2(&total);
    if mass == 0.0 {
        return Ok(0.0);
    }
    let c = ContractionConstants::new(g, window);
    let blocks = (t / c.block) as f64;
    let ln_factor = -c.ln_beta_block() + if blocks == 0.0 { 0.0 } else { blocks * c.ln_gamma() };
    Ok(mass / g.n() as f64 * ln_factor.exp())
}

/// Largest distance from any real agent's ratio to the true average.
pub fn consensus_error(trace: &ConsensusTrace, t: usize) -> Result<f64> {
    if t > trace.horizon() {
        return Err(Error::IterationOutOfRange {
            t,
            horizon: trace.horizon(),
        });
    }
    let avg = trace.average();
    let mut worst: f64 = 0.0;
    for i in 0..trace.n {
        let ratio = trace.ratio(t, i).ok_or(Error::ZeroWeight { agent: i, t })?;
        worst = worst.max(norm2(&sub(&ratio, &avg)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn two_cycle() -> DirectedGraph {
        DirectedGraph::new(2, &[(0, 1), (1, 0)]).unwrap()
    }

    fn scalars(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn push_sum_constant_inputs_are_a_fixed_point() {
        let g = DirectedGraph::ring(4).unwrap();
        let trace = run_push_sum(&g, &scalars(&[2.5; 4]), 30).unwrap();
        for t in 0..=30 {
            for i in 0..4 {
                assert_abs_diff_eq!(trace.ratio(t, i).unwrap()[0], 2.5, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn push_sum_two_cycle_converges() {
        let trace = run_push_sum(&two_cycle(), &scalars(&[0.0, 1.0]), 50).unwrap();
        assert!(consensus_error(&trace, 50).unwrap() < 1e-8);
    }

    #[test]
    fn push_sum_preserves_weight() {
        let g = DirectedGraph::from_one_based(4, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 1)]).unwrap();
        let trace = run_push_sum(&g, &scalars(&[1.0, 2.0, 3.0, 4.0]), 100).unwrap();
        for t in 0..=100 {
            assert_abs_diff_eq!(trace.weight_mass(t), 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn robust_drop_parks_mass_on_buffer() {
        let g = two_cycle();
        let table = BTreeMap::from([
            ((0, 1), vec![true, true]),
            ((1, 0), vec![false, true]),
        ]);
        let s = FailureSchedule::scripted(&g, 2, &table).unwrap();
        let trace = run_robust_push_sum(&g, &scalars(&[0.0, 1.0]), &s, 1).unwrap();
        // Node order: 1, 2, n12, n21.
        let snap = &trace.snapshots[1];
        assert_eq!(snap.z[3], vec![0.5]);
        assert_eq!(snap.w[3], 0.5);
        assert_eq!(snap.z[2], vec![0.0]);
        assert_eq!(snap.w[2], 0.0);
        assert_eq!(trace.value_mass(1), vec![1.0]);
        assert_eq!(trace.weight_mass(1), 2.0);
    }

    #[test]
    fn robust_constant_inputs_keep_ratio() {
        let g = DirectedGraph::bidirectional_ring(4).unwrap();
        let s = FailureSchedule::bernoulli_b_bounded(&g, 0.6, 3, 60, 5).unwrap();
        let trace = run_robust_push_sum(&g, &scalars(&[3.0; 4]), &s, 60).unwrap();
        for t in 0..=60 {
            for i in 0..4 {
                if let Some(r) = trace.ratio(t, i) {
                    assert_abs_diff_eq!(r[0], 3.0, epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(trace.value_mass(t)[0], 12.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn robust_can_report_zero_weight() {
        // The self share keeps weights positive from w = 1, so start from zero.
        let g = two_cycle();
        let s = FailureSchedule::reliable(&g, 1);
        let mut net = RobustNetwork::new(&g, &scalars(&[1.0, 1.0])).unwrap();
        net.agent_mut(0).w = 0.0;
        net.agent_mut(0).z = vec![0.0];
        net.agent_mut(1).w = 0.0;
        net.agent_mut(1).z = vec![0.0];
        net.step_robust(&s);
        let trace = ConsensusTrace {
            algorithm: Algorithm::RobustPushSum,
            n: 2,
            inputs: scalars(&[1.0, 1.0]),
            snapshots: vec![net.snapshot()],
        };
        assert!(trace.ratio(0, 0).is_none());
        assert!(matches!(consensus_error(&trace, 0), Err(Error::ZeroWeight { agent: 0, t: 0 })));
    }

    #[test]
    fn convergent_first_round_by_hand() {
        let g = two_cycle();
        let s = FailureSchedule::reliable(&g, 1);
        let trace = run_convergent_robust_push_sum(&g, &scalars(&[0.0, 1.0]), &s, 1).unwrap();
        let snap = &trace.snapshots[1];
        for v in 0..4 {
            assert_abs_diff_eq!(snap.z[v][0], 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(snap.w[v], 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(trace.ratio(1, 0).unwrap()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.ratio(1, 1).unwrap()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(consensus_error(&trace, 1).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn convergent_single_agent() {
        let g = DirectedGraph::new(1, &[]).unwrap();
        let s = FailureSchedule::reliable(&g, 10);
        let trace = run_convergent_robust_push_sum(&g, &scalars(&[5.0]), &s, 10).unwrap();
        for t in 0..=10 {
            assert_eq!(trace.snapshots[t].z[0], vec![5.0]);
            assert_eq!(trace.snapshots[t].w[0], 1.0);
        }
    }

    #[test]
    fn convergent_weights_stay_positive_under_drops() {
        let g = DirectedGraph::bidirectional_ring(5).unwrap();
        let s = FailureSchedule::periodic_adversarial(&g, 3, 90).unwrap();
        let trace = run_convergent_robust_push_sum(&g, &scalars(&[1.0, 0.0, 2.0, 0.0, 7.0]), &s, 90).unwrap();
        for t in 1..=90 {
            for i in 0..5 {
                let floor = trace.snapshots[t - 1].w[i] / 9.0;
                assert!(trace.snapshots[t].w[i] >= floor * (1.0 - 1e-12));
                assert!(trace.snapshots[t].w[i] > 0.0);
            }
        }
    }

    #[test]
    fn short_schedule_is_rejected() {
        let g = two_cycle();
        let s = FailureSchedule::reliable(&g, 3);
        assert!(matches!(
            run_convergent_robust_push_sum(&g, &scalars(&[0.0, 1.0]), &s, 4),
            Err(Error::ScheduleTooShort { requested: 4, available: 3 })
        ));
    }

    #[test]
    fn theorem1_examples() {
        let g = two_cycle();
        let bound = theorem1_bound(&g, 1, &scalars(&[1.0, 3.0]), 3).unwrap();
        assert_abs_diff_eq!(bound, 126.0, epsilon = 1e-9);
        assert_eq!(theorem1_bound(&g, 1, &scalars(&[0.0, 0.0]), 10).unwrap(), 0.0);
        assert!(matches!(
            theorem1_bound(&g, 1, &scalars(&[1.0, -1.0]), 3),
            Err(Error::NegativeInput { agent: 1 })
        ));
    }

    #[test]
    fn vector_inputs() {
        let g = DirectedGraph::complete(3).unwrap();
        let y = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]];
        let s = FailureSchedule::bernoulli_b_bounded(&g, 0.3, 2, 400, 3).unwrap();
        let trace = run_convergent_robust_push_sum(&g, &y, &s, 400).unwrap();
        assert!(consensus_error(&trace, 400).unwrap() < 1e-9);
        let avg = trace.average();
        assert_abs_diff_eq!(avg[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(avg[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn csv_layout() {
        let g = two_cycle();
        let s = FailureSchedule::reliable(&g, 1);
        let trace = run_convergent_robust_push_sum(&g, &scalars(&[0.0, 1.0]), &s, 1).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,node_id,kind,z_1,w,ratio_1");
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert!(lines[8].starts_with("1,4,virtual,"));
        assert!(lines[8].ends_with(','));
    }
}
