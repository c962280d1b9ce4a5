// SPDX-License-Identifier: Apache-2.0

//! Per-node one-hot features and graph-level statistics of a cone.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{max_output_level, Aig};
use crate::blocks::BlockAnnotation;
use crate::cones::Cone;

pub const NODE_FEATURES: usize = 11;

/// Column names of the node feature matrix.
pub const NODE_FEATURE_NAMES: [&str; NODE_FEATURES] = [
    "edge1_inverted",
    "edge2_inverted",
    "is_pi",
    "is_po",
    "is_inner",
    "is_ha",
    "is_fa",
    "is_remaining_xor",
    "is_and",
    "is_maj_root",
    "is_xor_root",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("annotation covers {annotation} nodes, cone has {cone}")]
    NodeCountMismatch { annotation: usize, cone: usize },
    #[error("cone has no nodes")]
    EmptyCone,
}

/// One row per cone node, constant node included, in node order.
pub fn node_features(cone: &Aig, annotation: &BlockAnnotation) -> Result<Array2<f32>, FeatureError> {
    let n = cone.num_nodes();
    if annotation.tags.len() != n {
        return Err(FeatureError::NodeCountMismatch {
            annotation: annotation.tags.len(),
            cone: n,
        });
    }
    let mut is_po = vec![false; n];
    for o in cone.outputs() {
        is_po[o.node()] = true;
    }
    let mut m = Array2::zeros((n, NODE_FEATURES));
    for v in 0..n {
        let mut row = [false; NODE_FEATURES];
        if cone.is_and(v) {
            let [a, b] = cone.fanins(v);
            row[0] = a.is_complemented();
            row[1] = b.is_complemented();
        }
        if is_po[v] {
            row[3] = true;
        } else if cone.is_input(v) {
            row[2] = true;
        } else {
            row[4] = true;
        }
        let t = &annotation.tags[v];
        let f = if !cone.is_and(v) {
            8
        } else if t.is_fa_member {
            6
        } else if t.is_ha_member {
            5
        } else if t.is_remaining_xor {
            7
        } else {
            8
        };
        row[f] = true;
        row[9] = cone.is_and(v) && t.is_maj_root;
        row[10] = cone.is_and(v) && t.is_xor_root;
        for (k, &x) in row.iter().enumerate() {
            m[[v, k]] = if x { 1.0 } else { 0.0 };
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFeatures {
    pub input_count: usize,
    pub gate_count: usize,
    pub density: f64,
    pub clustering: f64,
    pub avg_degree: f64,
    pub f_level: u32,
    pub f_fan: usize,
}

impl GraphFeatures {
    pub const LEN: usize = 7;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.input_count as f64,
            self.gate_count as f64,
            self.density,
            self.clustering,
            self.avg_degree,
            self.f_level as f64,
            self.f_fan as f64,
        ]
    }
}

/// Undirected simple graph over the non-constant nodes: sorted adjacency.
pub fn undirected_adjacency(aig: &Aig) -> Vec<Vec<u32>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); aig.num_nodes()];
    for v in aig.and_ids() {
        for f in aig.fanins(v) {
            let u = f.node();
            if u != 0 && u != v {
                adj[v].push(u as u32);
                adj[u].push(v as u32);
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// `(density, mean local clustering, average degree)` of an adjacency list.
/// Vertex `skip` (the constant node) is left out.
pub fn graph_stats(adj: &[Vec<u32>], skip: Option<usize>) -> (f64, f64, f64) {
    let vertices = adj.len() - usize::from(skip.is_some_and(|s| s < adj.len()));
    if vertices == 0 {
        return (0.0, 0.0, 0.0);
    }
    let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
    let v = vertices as f64;
    let density = if vertices > 1 { 2.0 * edges as f64 / (v * (v - 1.0)) } else { 0.0 };
    let mut total = 0.0;
    for (i, nb) in adj.iter().enumerate() {
        if Some(i) == skip || nb.len() < 2 {
            continue;
        }
        let mut links = 0usize;
        for (k, &x) in nb.iter().enumerate() {
            let ax = &adj[x as usize];
            links += nb[k + 1..].iter().filter(|y| ax.binary_search(y).is_ok()).count();
        }
        let d = nb.len() as f64;
        total += links as f64 / (d * (d - 1.0) / 2.0);
    }
    (density, total / v, 2.0 * edges as f64 / v)
}

/// Statistics of `cone`; `f_level` comes from the whole circuit and `f_fan`
/// is the cone's boundary-input count, meaningful for the MSB cone.
pub fn graph_features(cone: &Cone, full_aig: &Aig) -> Result<GraphFeatures, FeatureError> {
    let g = &cone.sub_aig;
    if g.num_nodes() <= 1 {
        return Err(FeatureError::EmptyCone);
    }
    let (density, clustering, avg_degree) = graph_stats(&undirected_adjacency(g), Some(0));
    Ok(GraphFeatures {
        input_count: g.num_inputs(),
        gate_count: g.num_ands(),
        density,
        clustering,
        avg_degree,
        f_level: max_output_level(full_aig),
        f_fan: cone.boundary_inputs.len(),
    })
}

/// Per-column z-normalization fitted on a training set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZNorm {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ZNorm {
    /// Constant columns get a unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> ZNorm {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut std = vec![0.0; d];
        for r in rows {
            for ((s, x), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in std.iter_mut() {
            *s = if *s > 1e-12 { s.sqrt() } else { 1.0 };
        }
        ZNorm { mean, std }
    }

    pub fn identity(d: usize) -> ZNorm {
        ZNorm {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }
}
