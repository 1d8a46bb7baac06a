//! Contraction constants shared by the consensus and optimization bounds.
//!
//! With `k = nB + 1`, `beta = 1 / max_i (d_i + 1)^2` and `gamma = 1 - beta^k`.
//! `beta^k` underflows quickly for larger graphs, so everything is carried in
//! log space and only exponentiated at the end.

use crate::graph::DirectedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConstants {
    /// `nB + 1`, the block length over which every product entry is positive.
    pub block: usize,
    pub beta: f64,
    ln_beta_block: f64,
}

impl ContractionConstants {
    pub fn new(g: &DirectedGraph, window: usize) -> Self {
        let d = (g.max_out_degree() + 1) as f64;
        let beta = 1.0 / (d * d);
        let block = g.n() * window + 1;
        ContractionConstants {
            block,
            beta,
            ln_beta_block: block as f64 * beta.ln(),
        }
    }

    /// `beta^(nB+1)`, the entry lower bound for long products.
    pub fn beta_block(&self) -> f64 {
        self.ln_beta_block.exp()
    }

    pub fn ln_beta_block(&self) -> f64 {
        self.ln_beta_block
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.beta_block()
    }

    pub fn ln_gamma(&self) -> f64 {
        (-self.beta_block()).ln_1p()
    }

    /// `gamma^exponent`, with `gamma^0 = 1` even when `gamma = 0`.
    pub fn gamma_pow(&self, exponent: f64) -> f64 {
        if exponent == 0.0 {
            1.0
        } else {
            (exponent * self.ln_gamma()).exp()
        }
    }

    /// `gamma^floor(len / (nB+1))`.
    pub fn gamma_blocks(&self, len: usize) -> f64 {
        self.gamma_pow((len / self.block) as f64)
    }

    /// `1 / (beta^k (1 - gamma^(1/k)) gamma^((k-1)/k))`, the factor that
    /// multiplies `L` in the mixing-error bound.
    pub fn mixing_factor(&self) -> f64 {
        let k = self.block as f64;
        let ln_gamma = self.ln_gamma();
        // 1 - gamma^(1/k) without cancellation.
        let one_minus_root = -(ln_gamma / k).exp_m1();
        let ln_denominator_rest = self.ln_beta_block + (k - 1.0) / k * ln_gamma;
        (-ln_denominator_rest).exp() / one_minus_root
    }
}
