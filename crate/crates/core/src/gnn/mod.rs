// SPDX-License-Identifier: Apache-2.0

//! Directional GraphSAGE encoder over cone graphs, with a hierarchical
//! topology/subtype classifier for the final-stage adder and a flat head
//! for the partial-product accumulator.

mod dataset;
mod io;
mod model;
mod train;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::Aig;
use crate::blocks::annotate_blocks;
use crate::cones::{Cone, ConeError, ConeKind};
use crate::features::{graph_features, node_features, FeatureError, GraphFeatures, NODE_FEATURES};
use crate::mulgen::{FsaKind, PpaKind};

pub use dataset::{grid_dataset, variant_script, variant_seed, GridDataset};
pub use io::{load_model, read_model, save_model, write_model, FORMAT_VERSION};
pub use model::{
    batch_loss, classify, forward, loss_and_gradients, param_names, predict, predict_batch, LossOutput, ModelWeights, Prediction, HIDDEN,
    LAYERS,
};
pub use train::{accuracy, calibrate_alpha, train, AlphaCalibrator, TrainConfig, TrainReport};

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("feature matrix has {got} columns, expected {expected}")]
    FeatureDim { got: usize, expected: usize },
    #[error("edge ({0}, {1}) references a missing node")]
    BadEdge(u32, u32),
    #[error("expected {expected} graph scalars, got {got}")]
    ScalarDim { got: usize, expected: usize },
    #[error("label {label} out of range for a {kind} model")]
    BadLabel { label: usize, kind: ModelKind },
    #[error("tensor {name}: expected {expected:?}, found {found:?}")]
    TensorShape {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("model format version {found}, this build reads {expected}")]
    Version { found: u32, expected: u32 },
    #[error("model file line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("loss is not finite at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// Which classifier a model implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Accumulator classes from the LSB cone, one 5-way head.
    Ppa,
    /// Final-adder classes from the MSB cone, topology then subtype.
    Fsa,
}

impl ModelKind {
    /// Graph-level scalars a sample of this kind carries.
    pub fn num_scalars(self) -> usize {
        match self {
            ModelKind::Ppa => 3,
            ModelKind::Fsa => 5,
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            ModelKind::Ppa => PpaKind::ALL.len(),
            ModelKind::Fsa => FsaKind::ALL.len(),
        }
    }

    pub fn cone_kind(self) -> ConeKind {
        match self {
            ModelKind::Ppa => ConeKind::LsbCone,
            ModelKind::Fsa => ConeKind::MsbCone,
        }
    }

    /// Raw scalars: `[density, clustering, avg_degree]` for PPA, with
    /// `f_level` and `f_fan` in front for FSA.
    pub fn scalars(self, g: &GraphFeatures) -> Vec<f64> {
        let graph = [g.density, g.clustering, g.avg_degree];
        match self {
            ModelKind::Ppa => graph.to_vec(),
            ModelKind::Fsa => [g.f_level as f64, g.f_fan as f64].into_iter().chain(graph).collect(),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Ppa => "ppa",
            ModelKind::Fsa => "fsa",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<ModelKind, String> {
        match s {
            "ppa" => Ok(ModelKind::Ppa),
            "fsa" => Ok(ModelKind::Fsa),
            _ => Err(format!("unknown model kind `{s}`")),
        }
    }
}

/// Compressed adjacency: the neighbours of node `i` are
/// `idx[ptr[i]..ptr[i + 1]]`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Csr {
    pub ptr: Vec<usize>,
    pub idx: Vec<u32>,
}

impl Csr {
    fn build(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut ptr = vec![0usize; n + 1];
        for (i, _) in pairs.clone() {
            ptr[i as usize + 1] += 1;
        }
        for i in 0..n {
            ptr[i + 1] += ptr[i];
        }
        let mut fill = ptr.clone();
        let mut idx = vec![0u32; ptr[n]];
        for (i, j) in pairs {
            idx[fill[i as usize]] = j;
            fill[i as usize] += 1;
        }
        Csr { ptr, idx }
    }

    fn neighbours(&self, i: usize) -> &[u32] {
        &self.idx[self.ptr[i]..self.ptr[i + 1]]
    }
}

/// A cone as the encoder sees it: node features, directed edges and raw
/// graph scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    pub x: Array2<f64>,
    /// Fanins of each node.
    pub(crate) preds: Csr,
    /// Fanouts of each node.
    pub(crate) succs: Csr,
    pub scalars: Vec<f64>,
}

impl GraphSample {
    /// `edges` run from driver to reader.
    pub fn new(x: Array2<f64>, edges: &[(u32, u32)], scalars: Vec<f64>) -> Result<GraphSample, GnnError> {
        if x.ncols() != NODE_FEATURES {
            return Err(GnnError::FeatureDim {
                got: x.ncols(),
                expected: NODE_FEATURES,
            });
        }
        let n = x.nrows();
        if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a as usize >= n || *b as usize >= n) {
            return Err(GnnError::BadEdge(a, b));
        }
        let preds = Csr::build(n, edges.iter().map(|&(a, b)| (b, a)));
        let succs = Csr::build(n, edges.iter().copied());
        Ok(GraphSample { x, preds, succs, scalars })
    }

    /// Annotates `cone`, encodes its nodes and collects the scalars of
    /// `kind`.
    pub fn from_cone(cone: &Cone, full_aig: &Aig, kind: ModelKind) -> Result<GraphSample, GnnError> {
        let g = &cone.sub_aig;
        let ann = annotate_blocks(g);
        let x = node_features(g, &ann)?.mapv(f64::from);
        let edges: Vec<(u32, u32)> = g
            .and_ids()
            .flat_map(|v| g.fanins(v).map(|f| (f.node() as u32, v as u32)))
            .collect();
        let scalars = kind.scalars(&graph_features(cone, full_aig)?);
        GraphSample::new(x, &edges, scalars)
    }

    /// Extracts the default cone of `kind` from a whole multiplier.
    pub fn from_circuit(aig: &Aig, kind: ModelKind) -> Result<GraphSample, GnnError> {
        let cone = crate::cones::default_cone(aig, kind.cone_kind())?;
        GraphSample::from_cone(&cone, aig, kind)
    }

    pub fn num_nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        (0..self.num_nodes())
            .flat_map(|v| self.succs.neighbours(v).iter().map(move |&w| (v as u32, w)))
            .collect()
    }
}

/// A sample with its class index: an [`FsaKind`] or [`PpaKind`] index.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub graph: GraphSample,
    pub label: usize,
}

impl Example {
    pub fn fsa(graph: GraphSample, label: FsaKind) -> Example {
        Example {
            graph,
            label: label.index(),
        }
    }

    pub fn ppa(graph: GraphSample, label: PpaKind) -> Example {
        Example {
            graph,
            label: label.index(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mulgen::{generate_multiplier, ArchitectureLabel};

    #[test]
    fn csr_lists_both_directions() {
        let x = Array2::zeros((3, NODE_FEATURES));
        let g = GraphSample::new(x, &[(0, 2), (1, 2)], vec![]).unwrap();
        assert_eq!(g.preds.neighbours(2), &[0, 1]);
        assert_eq!(g.succs.neighbours(0), &[2]);
        assert!(g.preds.neighbours(0).is_empty());
        assert_eq!(g.edges(), vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            GraphSample::new(Array2::zeros((2, 3)), &[], vec![]),
            Err(GnnError::FeatureDim { .. })
        ));
        assert!(matches!(
            GraphSample::new(Array2::zeros((2, NODE_FEATURES)), &[(0, 2)], vec![]),
            Err(GnnError::BadEdge(0, 2))
        ));
    }

    #[test]
    fn samples_from_a_multiplier() {
        let aig = generate_multiplier(&"SP_WT_KS_8".parse::<ArchitectureLabel>().unwrap()).unwrap().0;
        let fsa = GraphSample::from_circuit(&aig, ModelKind::Fsa).unwrap();
        let ppa = GraphSample::from_circuit(&aig, ModelKind::Ppa).unwrap();
        assert_eq!(fsa.scalars.len(), 5);
        assert_eq!(ppa.scalars.len(), 3);
        assert!(fsa.num_nodes() > 8 && ppa.num_nodes() > 8);
        let edges = ppa.edges().len();
        assert_eq!(edges, 2 * (ppa.num_nodes() - 1 - 8));
    }
}
