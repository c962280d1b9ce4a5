// SPDX-License-Identifier: Apache-2.0

//! Parameters, forward pass, loss gradients and classification.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{ZNorm, NODE_FEATURES};
use crate::mulgen::{FsaKind, PpaKind, Topology};

use super::{Csr, Example, GnnError, GraphSample, ModelKind};

pub const HIDDEN: usize = 64;
pub const LAYERS: usize = 3;
pub(crate) const BN_EPS: f64 = 1e-5;

pub(crate) fn w_pre(k: usize) -> usize {
    4 * k
}
pub(crate) fn b_pre(k: usize) -> usize {
    4 * k + 1
}
pub(crate) fn w_suc(k: usize) -> usize {
    4 * k + 2
}
pub(crate) fn b_suc(k: usize) -> usize {
    4 * k + 3
}
pub(crate) const GAMMA: usize = 4 * LAYERS;
pub(crate) const BETA: usize = GAMMA + 1;
/// First head tensor; every head is a weight then a bias.
pub(crate) const HEADS: usize = BETA + 1;
/// Encoder parameters are the tensors before [`HEADS`].
pub(crate) const ENCODER: usize = HEADS;

const FSA_HEADS: [&str; 3] = ["topo", "nt", "tree"];
const PPA_HEADS: [&str; 1] = ["ppa"];

fn head_names(kind: ModelKind) -> &'static [&'static str] {
    match kind {
        ModelKind::Fsa => &FSA_HEADS,
        ModelKind::Ppa => &PPA_HEADS,
    }
}

/// Names of the trainable tensors in storage order.
pub fn param_names(kind: ModelKind) -> Vec<String> {
    let mut v = Vec::new();
    for k in 1..=LAYERS {
        for t in ["w_pre", "b_pre", "w_suc", "b_suc"] {
            v.push(format!("layer{k}.{t}"));
        }
    }
    v.push("bn.gamma".into());
    v.push("bn.beta".into());
    for h in head_names(kind) {
        v.push(format!("{h}.w"));
        v.push(format!("{h}.b"));
    }
    v
}

/// Input width and class count of each head.
fn head_dims(kind: ModelKind, hidden: usize) -> Vec<(usize, usize)> {
    let e = 2 * hidden;
    match kind {
        ModelKind::Fsa => vec![(e + 1, 2), (e + 4, 4), (e + 4, 5)],
        ModelKind::Ppa => vec![(e + 3, 5)],
    }
}

pub(crate) fn param_shapes(kind: ModelKind, hidden: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for k in 0..LAYERS {
        let d = if k == 0 { NODE_FEATURES } else { 2 * hidden };
        v.extend([(d, hidden), (1, hidden), (d, hidden), (1, hidden)]);
    }
    v.extend([(1, 2 * hidden), (1, 2 * hidden)]);
    for (i, o) in head_dims(kind, hidden) {
        v.extend([(i, o), (1, o)]);
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights {
    pub kind: ModelKind,
    pub hidden: usize,
    /// Trainable tensors in [`param_names`] order; biases are `1 x n`.
    pub params: Vec<Array2<f64>>,
    pub bn_running_mean: Array1<f64>,
    pub bn_running_var: Array1<f64>,
    /// Normalization of the graph scalars.
    pub norm: ZNorm,
    /// Weight of the subtype loss.
    pub alpha: f64,
}

impl ModelWeights {
    /// He-uniform encoder weights, Glorot-uniform heads, zero biases.
    pub fn new(kind: ModelKind, hidden: usize, seed: u64) -> ModelWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = param_names(kind);
        let params = param_shapes(kind, hidden)
            .into_iter()
            .zip(&names)
            .map(|((r, c), name)| {
                if name == "bn.gamma" {
                    Array2::ones((r, c))
                } else if r == 1 {
                    Array2::zeros((r, c))
                } else {
                    let bound = if name.starts_with("layer") {
                        (6.0 / r as f64).sqrt()
                    } else {
                        (6.0 / (r + c) as f64).sqrt()
                    };
                    Array2::from_shape_simple_fn((r, c), || rng.gen_range(-bound..bound))
                }
            })
            .collect();
        ModelWeights {
            kind,
            hidden,
            params,
            bn_running_mean: Array1::zeros(2 * hidden),
            bn_running_var: Array1::ones(2 * hidden),
            norm: ZNorm::identity(kind.num_scalars()),
            alpha: 1.0,
        }
    }

    pub fn zeros_like_params(&self) -> Vec<Array2<f64>> {
        self.params.iter().map(|p| Array2::zeros(p.raw_dim())).collect()
    }

    fn head(&self, h: usize) -> (&Array2<f64>, ArrayView1<'_, f64>) {
        (&self.params[HEADS + 2 * h], self.params[HEADS + 2 * h + 1].row(0))
    }
}

/// Several samples as one block-diagonal graph.
pub(crate) struct Batch {
    pub x: Array2<f64>,
    pub preds: Csr,
    pub succs: Csr,
    /// Node offsets of the graphs, `graphs + 1` entries.
    pub seg: Vec<usize>,
    /// Normalized scalars, one row per graph.
    pub scalars: Array2<f64>,
}

impl Batch {
    pub fn new(samples: &[&GraphSample], norm: &ZNorm) -> Batch {
        let n: usize = samples.iter().map(|s| s.num_nodes()).sum();
        let mut x = Array2::zeros((n, NODE_FEATURES));
        let mut seg = vec![0];
        let mut preds = Csr { ptr: vec![0], idx: Vec::new() };
        let mut succs = Csr { ptr: vec![0], idx: Vec::new() };
        let d = norm.mean.len();
        let mut scalars = Array2::zeros((samples.len(), d));
        for (g, s) in samples.iter().enumerate() {
            let off = *seg.last().unwrap();
            x.slice_mut(s![off..off + s.num_nodes(), ..]).assign(&s.x);
            for (dst, src) in [(&mut preds, &s.preds), (&mut succs, &s.succs)] {
                let base = dst.idx.len();
                dst.ptr.extend(src.ptr[1..].iter().map(|p| p + base));
                dst.idx.extend(src.idx.iter().map(|&j| j + off as u32));
            }
            seg.push(off + s.num_nodes());
            for (j, v) in norm.apply(&s.scalars).into_iter().enumerate() {
                scalars[[g, j]] = v;
            }
        }
        Batch {
            x,
            preds,
            succs,
            seg,
            scalars,
        }
    }

    pub fn graphs(&self) -> usize {
        self.seg.len() - 1
    }
}

/// Mean of the neighbour rows; nodes without neighbours get zeros.
fn aggregate(adj: &Csr, x: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut out = Array2::zeros((n, d));
    let xs = x.as_slice().expect("standard layout");
    let os = out.as_slice_mut().unwrap();
    for i in 0..n {
        let nb = adj.neighbours(i);
        if nb.is_empty() {
            continue;
        }
        let row = &mut os[i * d..(i + 1) * d];
        for &j in nb {
            let src = &xs[j as usize * d..(j as usize + 1) * d];
            for (o, v) in row.iter_mut().zip(src) {
                *o += v;
            }
        }
        let inv = 1.0 / nb.len() as f64;
        row.iter_mut().for_each(|o| *o *= inv);
    }
    out
}

/// Adjoint of [`aggregate`], accumulated into `out`.
fn aggregate_adjoint(adj: &Csr, dm: &Array2<f64>, out: &mut Array2<f64>) {
    let (n, d) = dm.dim();
    let ds = dm.as_slice().expect("standard layout");
    let os = out.as_slice_mut().expect("standard layout");
    for i in 0..n {
        let nb = adj.neighbours(i);
        if nb.is_empty() {
            continue;
        }
        let inv = 1.0 / nb.len() as f64;
        let src = &ds[i * d..(i + 1) * d];
        for &j in nb {
            let row = &mut os[j as usize * d..(j as usize + 1) * d];
            for (o, v) in row.iter_mut().zip(src) {
                *o += v * inv;
            }
        }
    }
}

struct LayerCache {
    mp: Array2<f64>,
    ms: Array2<f64>,
    zp: Array2<f64>,
    zs: Array2<f64>,
}

pub(crate) struct Encoded {
    layers: Vec<LayerCache>,
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    /// Batch statistics when normalizing in training mode.
    pub batch_stats: Option<(Array1<f64>, Array1<f64>)>,
    pub embeddings: Array2<f64>,
    /// Pooled embedding per graph.
    pub hg: Array2<f64>,
}

pub(crate) fn encode(w: &ModelWeights, b: &Batch, training: bool) -> Encoded {
    let h = w.hidden;
    let n = b.x.nrows();
    let mut x = b.x.clone();
    let mut layers = Vec::with_capacity(LAYERS);
    for k in 0..LAYERS {
        let mp = aggregate(&b.preds, &x);
        let ms = aggregate(&b.succs, &x);
        let zp = mp.dot(&w.params[w_pre(k)]) + &w.params[b_pre(k)];
        let zs = ms.dot(&w.params[w_suc(k)]) + &w.params[b_suc(k)];
        let mut next = Array2::zeros((n, 2 * h));
        next.slice_mut(s![.., ..h]).assign(&zp.mapv(|v| v.max(0.0)));
        next.slice_mut(s![.., h..]).assign(&zs.mapv(|v| v.max(0.0)));
        layers.push(LayerCache { mp, ms, zp, zs });
        x = next;
    }
    let (mean, var, batch_stats) = if training {
        let mean = x.mean_axis(Axis(0)).expect("non-empty batch");
        let var = (&x - &mean).mapv(|v| v * v).mean_axis(Axis(0)).unwrap();
        (mean.clone(), var.clone(), Some((mean, var)))
    } else {
        (w.bn_running_mean.clone(), w.bn_running_var.clone(), None)
    };
    let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
    let xhat = (x - &mean) * &inv_std;
    let embeddings = &xhat * &w.params[GAMMA] + &w.params[BETA];
    let mut hg = Array2::zeros((b.graphs(), 2 * h));
    for g in 0..b.graphs() {
        let rows = embeddings.slice(s![b.seg[g]..b.seg[g + 1], ..]);
        if let Some(m) = rows.mean_axis(Axis(0)) {
            hg.row_mut(g).assign(&m);
        }
    }
    Encoded {
        layers,
        xhat,
        inv_std,
        batch_stats,
        embeddings,
        hg,
    }
}

/// Accumulates encoder gradients given the gradient of the pooled
/// embeddings.
fn encoder_backward(w: &ModelWeights, b: &Batch, enc: &Encoded, dhg: &Array2<f64>, grads: &mut [Array2<f64>]) {
    let h = w.hidden;
    let n = b.x.nrows();
    let mut dy = Array2::zeros((n, 2 * h));
    for g in 0..b.graphs() {
        let len = (b.seg[g + 1] - b.seg[g]) as f64;
        let row = dhg.row(g).mapv(|v| v / len);
        dy.slice_mut(s![b.seg[g]..b.seg[g + 1], ..]).assign(&row);
    }
    grads[GAMMA] += &(&dy * &enc.xhat).sum_axis(Axis(0));
    grads[BETA] += &dy.sum_axis(Axis(0));
    let dxhat = dy * &w.params[GAMMA];
    let mut dx = if enc.batch_stats.is_some() {
        let nf = n as f64;
        let sum = dxhat.sum_axis(Axis(0));
        let dot = (&dxhat * &enc.xhat).sum_axis(Axis(0));
        ((&dxhat * nf - &sum) - &enc.xhat * &dot) * &(&enc.inv_std / nf)
    } else {
        dxhat * &enc.inv_std
    };
    for k in (0..LAYERS).rev() {
        let c = &enc.layers[k];
        let mut dzp = dx.slice(s![.., ..h]).to_owned();
        dzp.zip_mut_with(&c.zp, |d, z| {
            if *z <= 0.0 {
                *d = 0.0
            }
        });
        let mut dzs = dx.slice(s![.., h..]).to_owned();
        dzs.zip_mut_with(&c.zs, |d, z| {
            if *z <= 0.0 {
                *d = 0.0
            }
        });
        grads[w_pre(k)] += &c.mp.t().dot(&dzp);
        grads[b_pre(k)] += &dzp.sum_axis(Axis(0));
        grads[w_suc(k)] += &c.ms.t().dot(&dzs);
        grads[b_suc(k)] += &dzs.sum_axis(Axis(0));
        if k > 0 {
            let mut prev = Array2::zeros((n, 2 * h));
            aggregate_adjoint(&b.preds, &dzp.dot(&w.params[w_pre(k)].t()), &mut prev);
            aggregate_adjoint(&b.succs, &dzs.dot(&w.params[w_suc(k)].t()), &mut prev);
            dx = prev;
        }
    }
}

/// `[h_G | scalars[range]]` per graph.
fn head_input(hg: &Array2<f64>, scalars: &Array2<f64>, range: std::ops::Range<usize>) -> Array2<f64> {
    let g = hg.nrows();
    let e = hg.ncols();
    let mut u = Array2::zeros((g, e + range.len()));
    u.slice_mut(s![.., ..e]).assign(hg);
    u.slice_mut(s![.., e..]).assign(&scalars.slice(s![.., range]));
    u
}

/// Scalar columns each head reads.
fn head_scalars(kind: ModelKind, head: usize) -> std::ops::Range<usize> {
    match (kind, head) {
        (ModelKind::Fsa, 0) => 0..1,
        (ModelKind::Fsa, _) => 1..5,
        (ModelKind::Ppa, _) => 0..3,
    }
}

fn softmax(z: ArrayView1<f64>) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Loss terms and gradients of one batch.
#[derive(Clone, Debug)]
pub struct LossOutput {
    /// `topo + alpha * sub` for FSA models, the accumulator cross-entropy
    /// for PPA models; batch means.
    pub loss: f64,
    pub topo_loss: f64,
    pub sub_loss: f64,
    /// Samples whose routed head is not their true category.
    pub misrouted: usize,
    pub grads: Vec<Array2<f64>>,
    pub(crate) batch_stats: Option<(Array1<f64>, Array1<f64>)>,
}

/// Mean loss over `batch` and its gradient, with batch-normalization in
/// training mode.
///
/// Each sample's subtype loss goes through the head its topology
/// prediction selects (the true topology with `teacher_forcing`); a
/// sample routed to the wrong category adds no subtype loss.
pub fn loss_and_gradients(
    w: &ModelWeights,
    batch: &[&Example],
    alpha: f64,
    teacher_forcing: bool,
) -> Result<LossOutput, GnnError> {
    weighted_loss(w, batch, 1.0, alpha, teacher_forcing)
}

pub(crate) fn weighted_loss(
    w: &ModelWeights,
    batch: &[&Example],
    topo_weight: f64,
    sub_weight: f64,
    teacher_forcing: bool,
) -> Result<LossOutput, GnnError> {
    evaluate(w, batch, topo_weight, sub_weight, teacher_forcing, true)
}

/// The loss of [`loss_and_gradients`] without the backward pass.
pub fn batch_loss(w: &ModelWeights, batch: &[&Example], alpha: f64, teacher_forcing: bool) -> Result<f64, GnnError> {
    Ok(evaluate(w, batch, 1.0, alpha, teacher_forcing, false)?.loss)
}

fn evaluate(
    w: &ModelWeights,
    batch: &[&Example],
    topo_weight: f64,
    sub_weight: f64,
    teacher_forcing: bool,
    backward: bool,
) -> Result<LossOutput, GnnError> {
    if batch.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    for ex in batch {
        if ex.label >= w.kind.num_classes() {
            return Err(GnnError::BadLabel {
                label: ex.label,
                kind: w.kind,
            });
        }
        if ex.graph.scalars.len() != w.kind.num_scalars() {
            return Err(GnnError::ScalarDim {
                got: ex.graph.scalars.len(),
                expected: w.kind.num_scalars(),
            });
        }
    }
    let graphs: Vec<&GraphSample> = batch.iter().map(|e| &e.graph).collect();
    let b = Batch::new(&graphs, &w.norm);
    let enc = encode(w, &b, true);
    let g = batch.len();
    let gf = g as f64;
    let e = 2 * w.hidden;
    let mut grads = if backward { w.zeros_like_params() } else { Vec::new() };
    let mut dhg = Array2::zeros((g, e));
    let mut out = LossOutput {
        loss: 0.0,
        topo_loss: 0.0,
        sub_loss: 0.0,
        misrouted: 0,
        grads: Vec::new(),
        batch_stats: None,
    };
    let heads = head_names(w.kind).len();
    let inputs: Vec<Array2<f64>> = (0..heads)
        .map(|h| head_input(&enc.hg, &b.scalars, head_scalars(w.kind, h)))
        .collect();
    let logits: Vec<Array2<f64>> = (0..heads)
        .map(|h| {
            let (wt, bias) = w.head(h);
            inputs[h].dot(wt) + &bias
        })
        .collect();
    let mut dlogits: Vec<Array2<f64>> = logits.iter().map(|l| Array2::zeros(l.raw_dim())).collect();
    for (i, ex) in batch.iter().enumerate() {
        match w.kind {
            ModelKind::Ppa => {
                let p = softmax(logits[0].row(i));
                out.topo_loss += -p[ex.label].max(f64::MIN_POSITIVE).ln() / gf;
                for (c, pc) in p.iter().enumerate() {
                    dlogits[0][[i, c]] = topo_weight * (pc - f64::from(c == ex.label)) / gf;
                }
            }
            ModelKind::Fsa => {
                let fsa = FsaKind::from_index(ex.label).unwrap();
                let yt = fsa.topology().index();
                let p = softmax(logits[0].row(i));
                out.topo_loss += -p[yt].max(f64::MIN_POSITIVE).ln() / gf;
                for (c, pc) in p.iter().enumerate() {
                    dlogits[0][[i, c]] = topo_weight * (pc - f64::from(c == yt)) / gf;
                }
                let route = if teacher_forcing { yt } else { argmax(&p) };
                if route != yt {
                    out.misrouted += 1;
                    continue;
                }
                let head = 1 + route;
                let ys = fsa.subtype_index();
                let q = softmax(logits[head].row(i));
                out.sub_loss += -q[ys].max(f64::MIN_POSITIVE).ln() / gf;
                for (c, qc) in q.iter().enumerate() {
                    dlogits[head][[i, c]] = sub_weight * (qc - f64::from(c == ys)) / gf;
                }
            }
        }
    }
    if out.misrouted > 0 {
        log::debug!("{} of {} samples routed to the wrong subtype head", out.misrouted, g);
    }
    out.loss = topo_weight * out.topo_loss + sub_weight * out.sub_loss;
    out.batch_stats = enc.batch_stats.clone();
    if !backward {
        return Ok(out);
    }
    for h in 0..heads {
        let (wt, _) = w.head(h);
        grads[HEADS + 2 * h] += &inputs[h].t().dot(&dlogits[h]);
        grads[HEADS + 2 * h + 1] += &dlogits[h].sum_axis(Axis(0));
        let du = dlogits[h].dot(&wt.t());
        dhg += &du.slice(s![.., ..e]);
    }
    encoder_backward(w, &b, &enc, &dhg, &mut grads);
    out.grads = grads;
    Ok(out)
}

/// Encoder output of one graph in inference mode: `(h_G, node
/// embeddings)`.
pub fn forward(w: &ModelWeights, sample: &GraphSample) -> (Array1<f64>, Array2<f64>) {
    let b = Batch::new(&[sample], &w.norm);
    let enc = encode(w, &b, false);
    (enc.hg.row(0).to_owned(), enc.embeddings)
}

/// Class probabilities for one graph.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Prediction {
    /// `[P(non-tree), P(tree)]` of an FSA model.
    pub topo: Option<[f64; 2]>,
    /// All final-adder classes by descending joint probability.
    pub fsa_ranking: Vec<(FsaKind, f64)>,
    /// All accumulator classes by descending probability.
    pub ppa_ranking: Vec<(PpaKind, f64)>,
}

impl Prediction {
    pub fn topology(&self) -> Option<Topology> {
        self.topo.map(|p| if p[1] > p[0] { Topology::Tree } else { Topology::NonTree })
    }

    pub fn fsa_top(&self, k: usize) -> Vec<FsaKind> {
        self.fsa_ranking.iter().take(k).map(|r| r.0).collect()
    }

    pub fn ppa_top(&self, k: usize) -> Vec<PpaKind> {
        self.ppa_ranking.iter().take(k).map(|r| r.0).collect()
    }

    /// Rank of class index `label` in the ranking of `kind`, from 0.
    pub fn rank_of(&self, kind: ModelKind, label: usize) -> Option<usize> {
        match kind {
            ModelKind::Fsa => self.fsa_ranking.iter().position(|r| r.0.index() == label),
            ModelKind::Ppa => self.ppa_ranking.iter().position(|r| r.0.index() == label),
        }
    }
}

fn ranked<T: Copy>(items: &[T], scores: Vec<f64>) -> Vec<(T, f64)> {
    let mut v: Vec<(T, f64)> = items.iter().copied().zip(scores).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1));
    v
}

/// Heads applied to a pooled embedding and normalized scalars.
///
/// The joint score of a final-adder class is `P(topology) * P(class |
/// topology)`, so the ranking may mix categories.
pub fn classify(w: &ModelWeights, h_g: ArrayView1<f64>, scalars: &[f64]) -> Prediction {
    let logits = |h: usize| {
        let r = head_scalars(w.kind, h);
        let u: Array1<f64> = h_g.iter().chain(&scalars[r]).copied().collect();
        let (wt, bias) = w.head(h);
        u.dot(wt) + bias
    };
    match w.kind {
        ModelKind::Ppa => Prediction {
            topo: None,
            fsa_ranking: Vec::new(),
            ppa_ranking: ranked(&PpaKind::ALL, softmax(logits(0).view())),
        },
        ModelKind::Fsa => {
            let t = softmax(logits(0).view());
            let nt = softmax(logits(1).view());
            let tree = softmax(logits(2).view());
            let scores = nt.iter().map(|p| t[0] * p).chain(tree.iter().map(|p| t[1] * p)).collect();
            Prediction {
                topo: Some([t[0], t[1]]),
                fsa_ranking: ranked(&FsaKind::ALL, scores),
                ppa_ranking: Vec::new(),
            }
        }
    }
}

/// Forward pass and classification of one raw sample.
pub fn predict(w: &ModelWeights, sample: &GraphSample) -> Result<Prediction, GnnError> {
    if sample.scalars.len() != w.kind.num_scalars() {
        return Err(GnnError::ScalarDim {
            got: sample.scalars.len(),
            expected: w.kind.num_scalars(),
        });
    }
    let (hg, _) = forward(w, sample);
    Ok(classify(w, hg.view(), &w.norm.apply(&sample.scalars)))
}

/// [`predict`] over many samples, encoded in chunks.
pub fn predict_batch(w: &ModelWeights, samples: &[&GraphSample]) -> Result<Vec<Prediction>, GnnError> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(32) {
        if let Some(bad) = chunk.iter().find(|s| s.scalars.len() != w.kind.num_scalars()) {
            return Err(GnnError::ScalarDim {
                got: bad.scalars.len(),
                expected: w.kind.num_scalars(),
            });
        }
        let b = Batch::new(chunk, &w.norm);
        let enc = encode(w, &b, false);
        for g in 0..chunk.len() {
            let sc: Vec<f64> = b.scalars.row(g).to_vec();
            out.push(classify(w, enc.hg.row(g), &sc));
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Ten nodes, a few fanouts, random one-hot-ish features.
    pub(crate) fn toy(seed: u64, kind: ModelKind) -> GraphSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_simple_fn((10, NODE_FEATURES), || f64::from(rng.gen_bool(0.4)));
        let edges = [(0, 4), (1, 4), (2, 5), (3, 5), (4, 6), (5, 6), (1, 7), (6, 7), (7, 8), (4, 8), (8, 9), (2, 9)];
        let scalars = (0..kind.num_scalars()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GraphSample::new(x, &edges, scalars).unwrap()
    }

    fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let diff = (a - b).mapv(|v| v * v).sum().sqrt();
        let scale = a.mapv(|v| v * v).sum().sqrt().max(b.mapv(|v| v * v).sum().sqrt());
        if scale < 1e-12 {
            diff
        } else {
            diff / scale
        }
    }

    fn check_gradients(kind: ModelKind, teacher: bool) {
        let mut w = ModelWeights::new(kind, 8, 3);
        // Non-trivial normalization parameters.
        for (i, p) in w.params.iter_mut().enumerate() {
            if p.nrows() == 1 && i != GAMMA {
                p.mapv_inplace(|_| 0.05 * i as f64);
            }
        }
        let ex: Vec<Example> = (0..3)
            .map(|i| Example {
                graph: toy(10 + i, kind),
                label: (2 * i as usize + 1) % kind.num_classes(),
            })
            .collect();
        let refs: Vec<&Example> = ex.iter().collect();
        let alpha = 1.7;
        let out = loss_and_gradients(&w, &refs, alpha, teacher).unwrap();
        let eps = 1e-4;
        for t in 0..w.params.len() {
            let mut num = Array2::zeros(w.params[t].raw_dim());
            for idx in 0..num.len() {
                let (r, c) = (idx / num.ncols(), idx % num.ncols());
                let orig = w.params[t][[r, c]];
                w.params[t][[r, c]] = orig + eps;
                let lp = loss_and_gradients(&w, &refs, alpha, teacher).unwrap().loss;
                w.params[t][[r, c]] = orig - eps;
                let lm = loss_and_gradients(&w, &refs, alpha, teacher).unwrap().loss;
                w.params[t][[r, c]] = orig;
                num[[r, c]] = (lp - lm) / (2.0 * eps);
            }
            let e = rel_err(&out.grads[t], &num);
            assert!(e < 1e-4, "{} relative error {e}", param_names(kind)[t]);
        }
    }

    #[test]
    fn fsa_gradients_match_finite_differences() {
        check_gradients(ModelKind::Fsa, true);
        check_gradients(ModelKind::Fsa, false);
    }

    #[test]
    fn ppa_gradients_match_finite_differences() {
        check_gradients(ModelKind::Ppa, false);
    }

    #[test]
    fn loss_without_gradients_matches() {
        let w = ModelWeights::new(ModelKind::Fsa, 8, 2);
        let ex: Vec<Example> = (0..3).map(|i| Example::fsa(toy(i, ModelKind::Fsa), FsaKind::ALL[2 * i as usize])).collect();
        let refs: Vec<&Example> = ex.iter().collect();
        let full = loss_and_gradients(&w, &refs, 0.7, false).unwrap().loss;
        assert_eq!(batch_loss(&w, &refs, 0.7, false).unwrap(), full);
    }

    #[test]
    fn routing_touches_one_subtype_head() {
        let w = ModelWeights::new(ModelKind::Fsa, 8, 5);
        let ex = Example::fsa(toy(1, ModelKind::Fsa), FsaKind::KoggeStone);
        let out = loss_and_gradients(&w, &[&ex], 1.0, true).unwrap();
        let norm = |t: usize| out.grads[t].mapv(f64::abs).sum();
        assert!(norm(HEADS) > 0.0);
        assert_eq!(norm(HEADS + 2) + norm(HEADS + 3), 0.0);
        assert!(norm(HEADS + 4) > 0.0);
    }

    #[test]
    fn zero_alpha_leaves_topology_gradient() {
        let w = ModelWeights::new(ModelKind::Fsa, 8, 5);
        let ex = Example::fsa(toy(2, ModelKind::Fsa), FsaKind::RippleCarry);
        let a = loss_and_gradients(&w, &[&ex], 0.0, true).unwrap();
        let topo = weighted_loss(&w, &[&ex], 1.0, 0.0, true).unwrap();
        for (x, y) in a.grads.iter().zip(&topo.grads) {
            assert_eq!(x, y);
        }
        assert!(a.grads[HEADS + 2].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_weights_pool_to_the_shift() {
        let mut w = ModelWeights::new(ModelKind::Ppa, 4, 1);
        for p in w.params.iter_mut() {
            p.fill(0.0);
        }
        w.params[BETA].iter_mut().enumerate().for_each(|(i, v)| *v = i as f64);
        let (hg, _) = forward(&w, &toy(3, ModelKind::Ppa));
        for (i, v) in hg.iter().enumerate() {
            assert!((v - i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn node_relabeling_keeps_the_pooled_embedding() {
        let w = ModelWeights::new(ModelKind::Fsa, 16, 9);
        let g = toy(4, ModelKind::Fsa);
        let perm = [3usize, 7, 0, 9, 1, 5, 8, 2, 6, 4];
        let mut x = Array2::zeros(g.x.raw_dim());
        for (old, &new) in perm.iter().enumerate() {
            x.row_mut(new).assign(&g.x.row(old));
        }
        let edges: Vec<(u32, u32)> = g.edges().iter().map(|&(a, b)| (perm[a as usize] as u32, perm[b as usize] as u32)).collect();
        let h = GraphSample::new(x, &edges, g.scalars.clone()).unwrap();
        let (a, _) = forward(&w, &g);
        let (b, _) = forward(&w, &h);
        assert!((&a - &b).mapv(f64::abs).iter().all(|&d| d < 1e-9));
    }

    #[test]
    fn uniform_graph_has_uniform_embeddings() {
        let w = ModelWeights::new(ModelKind::Ppa, 8, 2);
        let x = Array2::from_shape_fn((4, NODE_FEATURES), |(_, c)| f64::from(c % 3 == 0));
        let cycle = [(0, 1), (1, 2), (2, 3), (3, 0)];
        let g = GraphSample::new(x, &cycle, vec![0.0; 3]).unwrap();
        let (hg, emb) = forward(&w, &g);
        for r in emb.rows() {
            assert!((&r - &hg).mapv(f64::abs).iter().all(|&d| d < 1e-12));
        }
    }

    #[test]
    fn joint_scores() {
        let mut w = ModelWeights::new(ModelKind::Fsa, 4, 0);
        for p in w.params[HEADS..].iter_mut() {
            p.fill(0.0);
        }
        let hg = Array1::zeros(8);
        let p = classify(&w, hg.view(), &[0.0; 5]);
        let sum: f64 = p.fsa_ranking.iter().map(|r| r.1).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for (k, s) in &p.fsa_ranking {
            let want = if k.topology() == Topology::Tree { 0.1 } else { 0.125 };
            assert!((s - want).abs() < 1e-12);
        }
        // Certain tree topology with a uniform tree head.
        w.params[HEADS + 1][[0, 1]] = 100.0;
        let p = classify(&w, hg.view(), &[0.0; 5]);
        for (k, s) in &p.fsa_ranking {
            let want = if k.topology() == Topology::Tree { 0.2 } else { 0.0 };
            assert!((s - want).abs() < 1e-9);
        }
        assert_eq!(p.topology(), Some(Topology::Tree));
    }

    #[test]
    fn shifting_one_head_keeps_the_ranking() {
        let w = ModelWeights::new(ModelKind::Fsa, 4, 8);
        let g = toy(5, ModelKind::Fsa);
        let before = predict(&w, &g).unwrap();
        let mut v = w.clone();
        v.params[HEADS + 5].mapv_inplace(|b| b + 3.0);
        let after = predict(&v, &g).unwrap();
        assert_eq!(before.fsa_top(9), after.fsa_top(9));
    }

    #[test]
    fn inference_does_not_depend_on_batch_mates() {
        let w = ModelWeights::new(ModelKind::Ppa, 8, 4);
        let (a, b) = (toy(6, ModelKind::Ppa), toy(7, ModelKind::Ppa));
        assert_eq!(predict_batch(&w, &[&b, &a]).unwrap()[1], predict(&w, &a).unwrap());
        let alone = encode(&w, &Batch::new(&[&a], &w.norm), false).hg;
        let together = encode(&w, &Batch::new(&[&b, &a], &w.norm), false).hg;
        assert!((&alone.row(0) - &together.row(1)).mapv(f64::abs).iter().all(|&d| d < 1e-12));
    }
}
