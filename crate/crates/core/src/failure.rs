//! Link reliability schedules.
//!
//! A schedule fixes, for every link and every iteration `t` in `1..=T`,
//! whether a message sent over that link at `t` is delivered. Schedules are
//! materialized for the whole horizon so the same indicators can be replayed
//! into the state machines and the matrix evolution.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct FailureSchedule {
    edges: Vec<(usize, usize)>,
    horizon: usize,
    window: usize,
    // indicators[edge][t - 1]
    indicators: Vec<Vec<bool>>,
    seed: Option<u64>,
}

impl FailureSchedule {
    /// Wraps a complete table verbatim. `table` maps each 0-based edge to its
    /// indicators for `t = 1..=horizon`. The stored window is the smallest `B`
    /// the table satisfies.
    pub fn scripted(
        g: &DirectedGraph,
        horizon: usize,
        table: &BTreeMap<(usize, usize), Vec<bool>>,
    ) -> Result<Self> {
        let mut indicators = Vec::with_capacity(g.edge_count());
        for &(i, j) in g.edges() {
            let row = table.get(&(i, j)).ok_or_else(|| {
                Error::IncompleteTable(format!("no entries for link ({}, {})", i + 1, j + 1))
            })?;
            if row.len() != horizon {
                return Err(Error::IncompleteTable(format!(
                    "link ({}, {}) has {} entries, expected {horizon}",
                    i + 1,
                    j + 1,
                    row.len()
                )));
            }
            if horizon > 0 && row.iter().all(|&up| !up) {
                return Err(Error::NeverReliableLink(i, j));
            }
            indicators.push(row.clone());
        }
        if let Some((i, j)) = table.keys().find(|&&(i, j)| g.edge_id(i, j).is_none()) {
            return Err(Error::IncompleteTable(format!(
                "entries for ({}, {}) which is not a link",
                i + 1,
                j + 1
            )));
        }
        let mut s = FailureSchedule {
            edges: g.edges().to_vec(),
            horizon,
            window: 1,
            indicators,
            seed: None,
        };
        s.window = s.min_window();
        Ok(s)
    }

    /// Every link reliable at every iteration.
    pub fn reliable(g: &DirectedGraph, horizon: usize) -> Self {
        FailureSchedule {
            edges: g.edges().to_vec(),
            horizon,
            window: 1,
            indicators: vec![vec![true; horizon]; g.edge_count()],
            seed: None,
        }
    }

    /// Independent drops with probability `p_drop`, except that a link which
    /// has been down for `window - 1` consecutive iterations is forced up.
    pub fn bernoulli_b_bounded(
        g: &DirectedGraph,
        p_drop: f64,
        window: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&p_drop) {
            return Err(Error::InvalidProbability(p_drop));
        }
        if window == 0 {
            return Err(Error::InvalidWindow);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indicators = g
            .edges()
            .iter()
            .map(|_| {
                let mut down_run = 0;
                (0..horizon)
                    .map(|_| {
                        let up = down_run + 1 >= window || rng.gen::<f64>() >= p_drop;
                        down_run = if up { 0 } else { down_run + 1 };
                        up
                    })
                    .collect()
            })
            .collect();
        Ok(FailureSchedule {
            edges: g.edges().to_vec(),
            horizon,
            window,
            indicators,
            seed: Some(seed),
        })
    }

    /// Every link up exactly when `t % window == 0`.
    pub fn periodic_adversarial(g: &DirectedGraph, window: usize, horizon: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidWindow);
        }
        let row: Vec<bool> = (1..=horizon).map(|t| t % window == 0).collect();
        Ok(FailureSchedule {
            edges: g.edges().to_vec(),
            horizon,
            window,
            indicators: vec![row; g.edge_count()],
            seed: None,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The reliability window `B` this schedule was declared or measured with.
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Indicator for edge id `edge` at iteration `t` (1-based).
    ///
    /// Panics if `t` is outside `1..=horizon`.
    pub fn is_reliable(&self, edge: usize, t: usize) -> bool {
        assert!(t >= 1 && t <= self.horizon, "iteration {t} outside schedule");
        self.indicators[edge][t - 1]
    }

    pub fn link_pattern(&self, edge: usize) -> &[bool] {
        &self.indicators[edge]
    }

    /// Smallest `B` such that every length-`B` window inside `[1, T]` holds a 1.
    pub fn min_window(&self) -> usize {
        self.indicators
            .iter()
            .map(|row| longest_down_run(row) + 1)
            .max()
            .unwrap_or(1)
    }

    /// Fraction of (link, iteration) slots that dropped.
    pub fn drop_rate(&self) -> f64 {
        let total = self.edges.len() * self.horizon;
        if total == 0 {
            return 0.0;
        }
        let down: usize = self
            .indicators
            .iter()
            .map(|row| row.iter().filter(|&&up| !up).count())
            .sum();
        down as f64 / total as f64
    }

    pub fn matches(&self, g: &DirectedGraph) -> bool {
        self.edges == g.edges()
    }

    pub(crate) fn ensure_covers(&self, g: &DirectedGraph, horizon: usize) -> Result<()> {
        if !self.matches(g) {
            return Err(Error::ScheduleGraphMismatch);
        }
        if self.horizon < horizon {
            return Err(Error::ScheduleTooShort {
                requested: horizon,
                available: self.horizon,
            });
        }
        Ok(())
    }

    /// Writes `src,dst,t,indicator` rows with 1-based agent ids.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for t in 1..=self.horizon {
                w.serialize(ScheduleRow {
                    src: i + 1,
                    dst: j + 1,
                    t,
                    indicator: u8::from(self.indicators[k][t - 1]),
                })?;
            }
        }
        w.flush().map_err(|e| Error::io("<schedule csv>", e))?;
        Ok(())
    }

    /// Reads a table written by [`Self::write_csv`] (row order is free) and
    /// validates it as a scripted schedule for `g`.
    pub fn read_csv<R: Read>(g: &DirectedGraph, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut cells: BTreeMap<(usize, usize), BTreeMap<usize, bool>> = BTreeMap::new();
        let mut horizon = 0;
        for row in rdr.deserialize() {
            let row: ScheduleRow = row?;
            if row.src == 0 || row.dst == 0 || row.t == 0 || row.indicator > 1 {
                return Err(Error::IncompleteTable(format!(
                    "malformed row {},{},{},{}",
                    row.src, row.dst, row.t, row.indicator
                )));
            }
            horizon = horizon.max(row.t);
            cells
                .entry((row.src - 1, row.dst - 1))
                .or_default()
                .insert(row.t, row.indicator == 1);
        }
        let mut table = BTreeMap::new();
        for (edge, by_t) in cells {
            if by_t.len() != horizon {
                return Err(Error::IncompleteTable(format!(
                    "link ({}, {}) has {} of {horizon} iterations",
                    edge.0 + 1,
                    edge.1 + 1,
                    by_t.len()
                )));
            }
            table.insert(edge, by_t.into_values().collect());
        }
        Self::scripted(g, horizon, &table)
    }
}

fn longest_down_run(row: &[bool]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &up in row {
        run = if up { 0 } else { run + 1 };
        best = best.max(run);
    }
    best
}

/// True iff every length-`window` window of every link contains a delivery.
/// Windows that do not fit inside `[1, T]` are not checked.
pub fn verify_b_bounded(s: &FailureSchedule, window: usize) -> bool {
    window >= 1
        && s.indicators
            .iter()
            .all(|row| longest_down_run(row) < window || row.len() < window)
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    src: usize,
    dst: usize,
    t: usize,
    indicator: u8,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle() -> DirectedGraph {
        DirectedGraph::new(2, &[(0, 1), (1, 0)]).unwrap()
    }

    fn table(a: &[u8], b: &[u8]) -> BTreeMap<(usize, usize), Vec<bool>> {
        BTreeMap::from([
            ((0, 1), a.iter().map(|&x| x == 1).collect()),
            ((1, 0), b.iter().map(|&x| x == 1).collect()),
        ])
    }

    fn single_link(pattern: &[u8]) -> FailureSchedule {
        FailureSchedule::scripted(&two_cycle(), pattern.len(), &table(pattern, pattern)).unwrap()
    }

    #[test]
    fn scripted_all_ones_has_window_one() {
        let s = FailureSchedule::scripted(&two_cycle(), 3, &table(&[1, 1, 1], &[1, 1, 1])).unwrap();
        assert_eq!(s.window(), 1);
    }

    #[test]
    fn scripted_alternating_has_window_two() {
        let s = FailureSchedule::scripted(&two_cycle(), 4, &table(&[0, 1, 0, 1], &[1, 1, 1, 1])).unwrap();
        assert_eq!(s.window(), 2);
        assert!(!s.is_reliable(0, 1));
        assert!(s.is_reliable(0, 2));
    }

    #[test]
    fn scripted_dead_link() {
        let err = FailureSchedule::scripted(&two_cycle(), 3, &table(&[0, 0, 0], &[1, 1, 1])).unwrap_err();
        assert!(matches!(err, Error::NeverReliableLink(0, 1)));
    }

    #[test]
    fn scripted_incomplete() {
        let mut t = table(&[1, 1], &[1, 1]);
        t.remove(&(1, 0));
        assert!(matches!(
            FailureSchedule::scripted(&two_cycle(), 2, &t),
            Err(Error::IncompleteTable(_))
        ));
        let short = table(&[1, 1], &[1]);
        assert!(matches!(
            FailureSchedule::scripted(&two_cycle(), 2, &short),
            Err(Error::IncompleteTable(_))
        ));
    }

    #[test]
    fn bernoulli_degenerate_cases_are_all_ones() {
        let g = DirectedGraph::complete(4).unwrap();
        let no_drops = FailureSchedule::bernoulli_b_bounded(&g, 0.0, 5, 200, 1).unwrap();
        assert_eq!(no_drops.drop_rate(), 0.0);
        let forced = FailureSchedule::bernoulli_b_bounded(&g, 0.95, 1, 200, 1).unwrap();
        assert_eq!(forced.drop_rate(), 0.0);
    }

    #[test]
    fn bernoulli_heavy_drops_stay_bounded() {
        let g = DirectedGraph::bidirectional_ring(5).unwrap();
        let s = FailureSchedule::bernoulli_b_bounded(&g, 0.9, 3, 10_000, 42).unwrap();
        assert!(verify_b_bounded(&s, 3));
        assert!(!verify_b_bounded(&s, 2));
        let rate = s.drop_rate();
        assert!(rate <= 0.9, "rate {rate}");
        assert!(rate > 0.5, "rate {rate}");
    }

    #[test]
    fn bernoulli_rejects_bad_arguments() {
        let g = two_cycle();
        assert!(matches!(
            FailureSchedule::bernoulli_b_bounded(&g, 1.0, 2, 5, 0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            FailureSchedule::bernoulli_b_bounded(&g, 0.5, 0, 5, 0),
            Err(Error::InvalidWindow)
        ));
    }

    #[test]
    fn periodic_patterns() {
        let g = two_cycle();
        let ones = FailureSchedule::periodic_adversarial(&g, 1, 4).unwrap();
        assert_eq!(ones.link_pattern(0), &[true; 4]);
        let three = FailureSchedule::periodic_adversarial(&g, 3, 6).unwrap();
        assert_eq!(three.link_pattern(1), &[false, false, true, false, false, true]);
        let two = FailureSchedule::periodic_adversarial(&g, 2, 5).unwrap();
        assert_eq!(two.link_pattern(0), &[false, true, false, true, false]);
        assert_eq!(two.min_window(), 2);
        assert!(verify_b_bounded(&two, 2));
        assert!(!verify_b_bounded(&two, 1));
    }

    #[test]
    fn verify_examples() {
        let all_ones = single_link(&[1, 1, 1, 1]);
        assert!(verify_b_bounded(&all_ones, 1));
        assert!(verify_b_bounded(&all_ones, 4));
        let gap = single_link(&[1, 0, 0, 1]);
        assert!(!verify_b_bounded(&gap, 2));
        assert!(verify_b_bounded(&gap, 3));
    }

    #[test]
    fn csv_round_trip() {
        let g = DirectedGraph::bidirectional_ring(3).unwrap();
        let s = FailureSchedule::bernoulli_b_bounded(&g, 0.5, 3, 20, 9).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("src,dst,t,indicator\n1,2,1,"));
        let back = FailureSchedule::read_csv(&g, buf.as_slice()).unwrap();
        for k in 0..g.edge_count() {
            assert_eq!(back.link_pattern(k), s.link_pattern(k));
        }
        assert!(back.window() <= 3);
    }
}
