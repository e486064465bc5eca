#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use transducer_core::sfg::{NodeKind, SignalFlowGraph};
use transducer_core::units::hz_to_rad;
use transducer_core::{Complex64, TransducerParams};

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Valid parameter set whose supplied `gamma_ex` never exceeds the
/// electromechanical part of the mechanical linewidth.
pub fn random_params(rng: &mut ChaCha8Rng) -> TransducerParams {
    let omega_m = hz_to_rad(rng.gen_range(1e9..6e9));
    let gamma_0 = hz_to_rad(log_uniform(rng, 1e4, 1e7));
    let big_gamma = hz_to_rad(log_uniform(rng, 1e9, 3e10));
    let big_gamma_0 = big_gamma * rng.gen_range(0.0..1.0);
    let g_em = hz_to_rad(log_uniform(rng, 1e6, 1e9));
    let electro = 4.0 * g_em * g_em / big_gamma;
    TransducerParams {
        omega_m,
        gamma_0,
        big_gamma_0,
        big_gamma,
        g_em,
        gamma_ex: Some(electro * rng.gen_range(0.0..1.0)),
        gamma_m: None,
        j: hz_to_rad(log_uniform(rng, 1e6, 5e9)),
        delta_1: omega_m + hz_to_rad(rng.gen_range(-5e7..5e7)),
        delta_2: omega_m + hz_to_rad(rng.gen_range(-5e7..5e7)),
        kappa_1: hz_to_rad(log_uniform(rng, 1e5, 1e9)),
        kappa_02: hz_to_rad(log_uniform(rng, 1e5, 1e9)),
        kappa_ex2: hz_to_rad(log_uniform(rng, 1e5, 1e9)),
        g_bar: hz_to_rad(log_uniform(rng, 1.0, 1e4)),
        lambda_l: Some(1550e-9),
    }
}

/// Frequency within a few linewidths of the mechanical resonance.
pub fn random_omega(rng: &mut ChaCha8Rng, p: &TransducerParams) -> f64 {
    let width = p.gamma_0 + 4.0 * p.g_em * p.g_em / p.big_gamma + p.kappa_1 + p.kappa_2();
    p.omega_m + width * rng.gen_range(-5.0..5.0)
}

/// Plain description of a graph with constant complex edge gains.
#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub nodes: Vec<String>,
    pub edges: BTreeMap<(usize, usize), Complex64>,
}

impl GraphSpec {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, density: f64, self_loops: bool) -> Self {
        let nodes = (0..n).map(|i| format!("n{i}")).collect();
        let mut edges = BTreeMap::new();
        for u in 0..n {
            for v in 0..n {
                if (u != v || self_loops) && rng.gen_bool(density) {
                    let g =
                        Complex64::from_polar(rng.gen_range(0.05..0.6), rng.gen_range(0.0..6.3));
                    edges.insert((u, v), g);
                }
            }
        }
        GraphSpec { nodes, edges }
    }

    pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Self {
        let mut g = Self::random(rng, n, density, false);
        let order: Vec<usize> = {
            let mut o: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                o.swap(i, rng.gen_range(0..=i));
            }
            o
        };
        let rank: Vec<usize> = {
            let mut r = vec![0; n];
            for (k, &v) in order.iter().enumerate() {
                r[v] = k;
            }
            r
        };
        g.edges.retain(|&(u, v), _| rank[u] < rank[v]);
        g
    }

    /// Frequency-dependent gains: each constant is multiplied by `1 + i·c·ω`.
    pub fn build_dispersive(&self, slopes: &BTreeMap<(usize, usize), f64>) -> SignalFlowGraph {
        let mut b = SignalFlowGraph::builder();
        for id in &self.nodes {
            b = b.node(id.clone(), NodeKind::Internal);
        }
        for (&(u, v), &g) in &self.edges {
            let c = slopes.get(&(u, v)).copied().unwrap_or(0.0);
            b = b.edge(
                self.nodes[u].clone(),
                self.nodes[v].clone(),
                format!("{g}"),
                move |w| g * Complex64::new(1.0, c * w),
            );
        }
        b.build().unwrap()
    }

    pub fn build(&self) -> SignalFlowGraph {
        self.build_dispersive(&BTreeMap::new())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&(u, v))
    }
}
