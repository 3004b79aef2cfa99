//! Dwell and performance predictors: the fixed baseline, small MLPs trained
//! by full-batch gradient descent on a weighted squared-error loss,
//! gradient-boosted regression trees, and the leave-one-out evaluation
//! harness.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::events::FeatureRow;
use crate::metrics::{dwell_table, PerformanceScore, TrialRecord};
use crate::rng::{derive_seed, Rng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    Empty,
    DimensionMismatch { expected: usize, got: usize },
    NonFinite,
    RaggedEmbeddings { face_id: String },
    MissingEmbedding { face_id: String },
    TooFewRows { minimum: usize },
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::Empty => write!(f, "empty dataset"),
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            ModelError::NonFinite => write!(f, "non-finite value in data"),
            ModelError::RaggedEmbeddings { face_id } => {
                write!(f, "{face_id}: embedding dimension differs from the rest")
            }
            ModelError::MissingEmbedding { face_id } => {
                write!(f, "no embedding for face {face_id}")
            }
            ModelError::TooFewRows { minimum } => write!(f, "need at least {minimum} rows"),
        }
    }
}

/// The no-learning reference predictor: in step 3 the target face gets 0.50
/// and every other face 0.1666; in step 1 all faces get 0.25.
pub fn baseline_predict(step: u8, target_index: usize) -> [f64; 4] {
    debug_assert!(target_index < 4);
    if step == 3 {
        let mut out = [0.1666; 4];
        out[target_index] = 0.50;
        out
    } else {
        [0.25; 4]
    }
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// A supervised dataset: one input/target pair per row, with per-output loss
/// weights and the row's target-face slot (for target-only error reporting).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
    pub target_slots: Vec<Option<usize>>,
    pub row_ids: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.targets.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.is_empty() {
            return Err(ModelError::Empty);
        }
        let d_in = self.input_dim();
        let d_out = self.output_dim();
        for (x, (y, w)) in self
            .inputs
            .iter()
            .zip(self.targets.iter().zip(self.weights.iter()))
        {
            if x.len() != d_in {
                return Err(ModelError::DimensionMismatch { expected: d_in, got: x.len() });
            }
            if y.len() != d_out || w.len() != d_out {
                return Err(ModelError::DimensionMismatch { expected: d_out, got: y.len() });
            }
            if x.iter().chain(y.iter()).chain(w.iter()).any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite);
            }
        }
        Ok(())
    }

    /// The dataset without row `i`.
    fn without_row(&self, i: usize) -> Dataset {
        let drop = |v: &Vec<Vec<f64>>| {
            v.iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, r)| r.clone())
                .collect()
        };
        Dataset {
            inputs: drop(&self.inputs),
            targets: drop(&self.targets),
            weights: drop(&self.weights),
            target_slots: self
                .target_slots
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, s)| *s)
                .collect(),
            row_ids: self
                .row_ids
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, s)| s.clone())
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

/// MLP training configuration. Hidden layers use the rectifier, the output
/// layer is linear; training is full-batch gradient descent on the weighted
/// squared-error loss.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub outputs: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// The step-1-features preset: 32-16-4 nodes, 500 epochs at 0.001.
    pub fn dwell_from_gaze() -> Self {
        MlpConfig {
            hidden: vec![32, 16],
            outputs: 4,
            learning_rate: 0.001,
            epochs: 500,
            seed: 0,
        }
    }

    /// The embeddings preset: 100-16-4 nodes, 1000 epochs at 0.001.
    pub fn dwell_from_embeddings() -> Self {
        MlpConfig {
            hidden: vec![100, 16],
            outputs: 4,
            learning_rate: 0.001,
            epochs: 1000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.outputs == 0 {
            return Err(ModelError::Empty);
        }
        if !(self.learning_rate > 0.0) {
            return Err(ModelError::NonFinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
struct Layer {
    /// Row-major `out x in` weight matrix.
    w: Vec<f64>,
    b: Vec<f64>,
    inputs: usize,
    outputs: usize,
}

/// A trained multilayer perceptron.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    /// Fresh network with uniform fan-in-scaled weights. Hidden biases start
    /// at a small positive value so no rectifier sits exactly on its kink at
    /// initialization (an input pattern that silences a whole layer would
    /// otherwise put the next layer's pre-activation at exactly zero, where
    /// the subgradient and finite differences disagree).
    pub fn init(input_dim: usize, config: &MlpConfig) -> Mlp {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(&config.hidden);
        sizes.push(config.outputs);
        let mut rng = Rng::new(config.seed);
        let n_layers = sizes.len() - 1;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(li, pair)| {
                let (n_in, n_out) = (pair[0], pair[1]);
                let scale = 1.0 / libm::sqrt(n_in as f64);
                let bias = if li + 1 < n_layers { 0.01 } else { 0.0 };
                Layer {
                    w: (0..n_in * n_out).map(|_| rng.range_f64(-scale, scale)).collect(),
                    b: vec![bias; n_out],
                    inputs: n_in,
                    outputs: n_out,
                }
            })
            .collect();
        Mlp { layers }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    /// All parameters flattened (weights then biases, layer by layer).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let mut i = 0;
        for l in &mut self.layers {
            let nw = l.w.len();
            l.w.copy_from_slice(&params[i..i + nw]);
            i += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&params[i..i + nb]);
            i += nb;
        }
        debug_assert_eq!(i, params.len());
    }

    /// Raw forward pass (no clamping). Returns all layer activations; the
    /// last entry is the output.
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        for (li, l) in self.layers.iter().enumerate() {
            let prev = &acts[li];
            let mut out = vec![0.0; l.outputs];
            for o in 0..l.outputs {
                let mut sum = l.b[o];
                let row = &l.w[o * l.inputs..(o + 1) * l.inputs];
                for (w, x) in row.iter().zip(prev.iter()) {
                    sum += w * x;
                }
                // Hidden layers rectify; the output layer stays linear.
                out[o] = if li + 1 < self.layers.len() { sum.max(0.0) } else { sum };
            }
            acts.push(out);
        }
        acts
    }

    /// Prediction clamped to the dwell-fraction range [0, 1]. Outputs are
    /// not renormalized: the four faces need not sum to 1.
    pub fn predict(&self, input: &[f64]) -> Vec<f64> {
        self.forward(input)
            .pop()
            .unwrap()
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect()
    }

    /// Weighted MSE loss and its gradient w.r.t. every parameter, over the
    /// whole dataset: `L = mean_rows( sum_j w_j (yhat_j - y_j)^2 / sum_j w_j )`.
    pub fn loss_and_gradient(&self, data: &Dataset) -> (f64, Vec<f64>) {
        let n = data.len() as f64;
        let mut grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer {
                w: vec![0.0; l.w.len()],
                b: vec![0.0; l.b.len()],
                inputs: l.inputs,
                outputs: l.outputs,
            })
            .collect();
        let mut loss = 0.0;
        for ((x, y), w) in data
            .inputs
            .iter()
            .zip(data.targets.iter())
            .zip(data.weights.iter())
        {
            let acts = self.forward(x);
            let yhat = acts.last().unwrap();
            let w_sum: f64 = w.iter().sum();
            let mut delta: Vec<f64> = Vec::with_capacity(yhat.len());
            for j in 0..yhat.len() {
                let err = yhat[j] - y[j];
                loss += w[j] * err * err / w_sum / n;
                delta.push(2.0 * w[j] * err / w_sum / n);
            }
            // Backpropagate through the layers.
            for li in (0..self.layers.len()).rev() {
                let l = &self.layers[li];
                let prev = &acts[li];
                let g = &mut grads[li];
                for o in 0..l.outputs {
                    g.b[o] += delta[o];
                    let row = &mut g.w[o * l.inputs..(o + 1) * l.inputs];
                    for (gw, x) in row.iter_mut().zip(prev.iter()) {
                        *gw += delta[o] * x;
                    }
                }
                if li == 0 {
                    break;
                }
                let mut next_delta = vec![0.0; l.inputs];
                for o in 0..l.outputs {
                    let row = &l.w[o * l.inputs..(o + 1) * l.inputs];
                    for (i, w_oi) in row.iter().enumerate() {
                        next_delta[i] += delta[o] * w_oi;
                    }
                }
                // Rectifier derivative of the producing layer's output.
                for (i, nd) in next_delta.iter_mut().enumerate() {
                    if acts[li][i] <= 0.0 {
                        *nd = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
        let mut flat = Vec::new();
        for g in &grads {
            flat.extend_from_slice(&g.w);
            flat.extend_from_slice(&g.b);
        }
        (loss, flat)
    }
}

/// Train an MLP by full-batch gradient descent. Returns the model and the
/// per-epoch loss trace (length `epochs + 1`, including the initial loss).
pub fn train_mlp(config: &MlpConfig, data: &Dataset) -> Result<(Mlp, Vec<f64>), ModelError> {
    config.validate()?;
    data.validate()?;
    if data.output_dim() != config.outputs {
        return Err(ModelError::DimensionMismatch {
            expected: config.outputs,
            got: data.output_dim(),
        });
    }
    let mut mlp = Mlp::init(data.input_dim(), config);
    let mut trace = Vec::with_capacity(config.epochs + 1);
    let mut params = mlp.params();
    for _ in 0..config.epochs {
        let (loss, grad) = mlp.loss_and_gradient(data);
        trace.push(loss);
        for (p, g) in params.iter_mut().zip(grad.iter()) {
            *p -= config.learning_rate * g;
        }
        mlp.set_params(&params);
    }
    let (final_loss, _) = mlp.loss_and_gradient(data);
    trace.push(final_loss);
    Ok((mlp, trace))
}

// ---------------------------------------------------------------------------
// Gradient-boosted regression trees
// ---------------------------------------------------------------------------

/// Boosted-tree settings: squared-error stagewise fitting of depth-limited
/// regression trees.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// A trained gradient-boosted regression model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gbt {
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Gbt {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.base
            + self.learning_rate
                * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

struct TreeBuilder<'a> {
    inputs: &'a [Vec<f64>],
    residuals: &'a [f64],
    params: &'a GbtParams,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let sum: f64 = rows.iter().map(|&r| self.residuals[r]).sum();
        let mean = sum / rows.len() as f64;
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf {
            return self.leaf(mean);
        }
        let Some((feature, threshold)) = self.best_split(rows) else {
            return self.leaf(mean);
        };
        let (lhs, rhs): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.inputs[r][feature] <= threshold);
        let node = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: 0.0 }); // placeholder
        let left = self.build(&lhs, depth + 1);
        let right = self.build(&rhs, depth + 1);
        self.nodes[node] = TreeNode::Split { feature, threshold, left, right };
        node
    }

    fn leaf(&mut self, value: f64) -> usize {
        self.nodes.push(TreeNode::Leaf { value });
        self.nodes.len() - 1
    }

    /// Exhaustive split search: every feature, thresholds between
    /// consecutive distinct sorted values; gain is the SSE reduction. Ties
    /// keep the first candidate in (feature, threshold) order.
    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let n_features = self.inputs[0].len();
        let total_sum: f64 = rows.iter().map(|&r| self.residuals[r]).sum();
        let n = rows.len() as f64;
        let parent_score = total_sum * total_sum / n;
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in 0..n_features {
            let mut order: Vec<usize> = rows.to_vec();
            order.sort_by(|&a, &b| {
                self.inputs[a][feature]
                    .partial_cmp(&self.inputs[b][feature])
                    .expect("finite features")
                    .then(self.residuals[a].partial_cmp(&self.residuals[b]).unwrap())
            });
            let mut left_sum = 0.0;
            for k in 0..order.len() - 1 {
                left_sum += self.residuals[order[k]];
                let xv = self.inputs[order[k]][feature];
                let xn = self.inputs[order[k + 1]][feature];
                if xv == xn {
                    continue;
                }
                let left_n = (k + 1) as f64;
                let right_n = n - left_n;
                if (left_n as usize) < self.params.min_leaf
                    || (right_n as usize) < self.params.min_leaf
                {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let gain =
                    left_sum * left_sum / left_n + right_sum * right_sum / right_n - parent_score;
                let threshold = xv + (xn - xv) / 2.0;
                let better = match best {
                    None => gain > 1e-12,
                    Some((bg, _, _)) => gain > bg,
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Fit a boosted regression model to `(inputs, targets)`.
///
/// Rows are internally ordered by content, so the fit is invariant to the
/// order the training rows arrive in.
pub fn train_gbt(
    inputs: &[Vec<f64>],
    targets: &[f64],
    params: &GbtParams,
) -> Result<Gbt, ModelError> {
    if inputs.is_empty() {
        return Err(ModelError::Empty);
    }
    if inputs.len() != targets.len() {
        return Err(ModelError::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if inputs.len() < 2 {
        return Err(ModelError::TooFewRows { minimum: 2 });
    }
    let dim = inputs[0].len();
    for x in inputs {
        if x.len() != dim {
            return Err(ModelError::DimensionMismatch { expected: dim, got: x.len() });
        }
    }
    if inputs
        .iter()
        .flat_map(|x| x.iter())
        .chain(targets.iter())
        .any(|v| !v.is_finite())
    {
        return Err(ModelError::NonFinite);
    }

    // Canonical row order: content-sorted, so float accumulation does not
    // depend on caller ordering.
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.sort_by(|&a, &b| {
        let key_a = inputs[a].iter().chain(core::iter::once(&targets[a]));
        let key_b = inputs[b].iter().chain(core::iter::once(&targets[b]));
        key_a
            .zip(key_b)
            .find_map(|(x, y)| match x.partial_cmp(y).unwrap() {
                core::cmp::Ordering::Equal => None,
                other => Some(other),
            })
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let inputs: Vec<Vec<f64>> = order.iter().map(|&i| inputs[i].clone()).collect();
    let targets: Vec<f64> = order.iter().map(|&i| targets[i]).collect();

    let n = targets.len() as f64;
    let base = targets.iter().sum::<f64>() / n;
    let mut residuals: Vec<f64> = targets.iter().map(|t| t - base).collect();
    let mut trees = Vec::new();
    let rows: Vec<usize> = (0..targets.len()).collect();
    for _ in 0..params.n_trees {
        let ss: f64 = residuals.iter().map(|r| r * r).sum();
        if ss <= 1e-24 * n {
            break;
        }
        let mut builder = TreeBuilder {
            inputs: &inputs,
            residuals: &residuals,
            params,
            nodes: Vec::new(),
        };
        let root = builder.build(&rows, 0);
        debug_assert_eq!(root, 0);
        let tree = Tree { nodes: builder.nodes };
        for (i, x) in inputs.iter().enumerate() {
            residuals[i] -= params.learning_rate * tree.predict(x);
        }
        trees.push(tree);
    }
    Ok(Gbt {
        base,
        learning_rate: params.learning_rate,
        trees,
    })
}

// ---------------------------------------------------------------------------
// Feature builders
// ---------------------------------------------------------------------------

/// Feature family used for predicting step-3 dwell from step-1 gaze.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Task1Variant {
    Spatial,
    Temporal,
    Spatiotemporal,
}

impl Task1Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task1Variant::Spatial => "spatial",
            Task1Variant::Temporal => "temporal",
            Task1Variant::Spatiotemporal => "spatiotemporal",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "spatial" => Some(Task1Variant::Spatial),
            "temporal" => Some(Task1Variant::Temporal),
            "spatiotemporal" => Some(Task1Variant::Spatiotemporal),
            _ => None,
        }
    }
}

fn emotion_block(record: &TrialRecord) -> Vec<f64> {
    // Per-face emotion one-hots plus the target-emotion one-hot.
    let mut block = vec![0.0; 4 * 6 + 6];
    for (i, face) in record.manifest.faces.iter().enumerate() {
        block[i * 6 + face.emotion.index()] = 1.0;
    }
    block[24 + record.manifest.target_emotion.index()] = 1.0;
    block
}

fn spatial_block(record: &TrialRecord) -> Vec<f64> {
    let table = dwell_table(record, 1);
    let mut block = Vec::with_capacity(14);
    for i in 0..4 {
        let rect = record.manifest.faces[i].rect_step1;
        let center = rect.center();
        let mut dx = 0.0;
        let mut dy = 0.0;
        let mut count = 0.0;
        for f in record.fixations.iter().filter(|f| {
            f.step_index == 1 && f.assignment.main == crate::aoi::MainAoi::Face(i)
        }) {
            dx += f.centroid_px.x - center.x;
            dy += f.centroid_px.y - center.y;
            count += 1.0;
        }
        // Offsets normalized by the face's half size.
        let norm = rect.w / 2.0;
        block.push(table.face_fractions[i]);
        block.push(if count > 0.0 { dx / count / norm } else { 0.0 });
        block.push(if count > 0.0 { dy / count / norm } else { 0.0 });
    }
    block.push(table.word_fraction);
    block.push(table.none_fraction);
    block
}

fn temporal_block(record: &TrialRecord) -> Vec<f64> {
    let step1 = &record.periods[0];
    let duration = step1.duration_ms() as f64;
    let mut block = Vec::with_capacity(16);
    let mut last_face: Option<usize> = None;
    let mut last_start = 0u64;
    for i in 0..4 {
        let mut count = 0.0;
        let mut dur_sum = 0.0;
        let mut first: Option<u64> = None;
        for f in record.fixations.iter().filter(|f| {
            f.step_index == 1 && f.assignment.main == crate::aoi::MainAoi::Face(i)
        }) {
            count += 1.0;
            dur_sum += f.duration_ms as f64;
            if first.is_none() {
                first = Some(f.start_ms);
            }
            if f.start_ms >= last_start {
                last_start = f.start_ms;
                last_face = Some(i);
            }
        }
        block.push(count / 20.0);
        block.push(if count > 0.0 { dur_sum / count / 1000.0 } else { 0.0 });
        // Time to first fixation, normalized; a face never fixated gets the
        // full step duration as sentinel.
        block.push(match first {
            Some(t) => (t - step1.start_ms) as f64 / duration,
            None => 1.0,
        });
    }
    let mut one_hot = [0.0; 4];
    if let Some(i) = last_face {
        one_hot[i] = 1.0;
    }
    block.extend_from_slice(&one_hot);
    block
}

/// Step-1 features of one trial for the given variant. Every variant carries
/// the emotion-related one-hots.
pub fn build_task1_features(record: &TrialRecord, variant: Task1Variant) -> Vec<f64> {
    let mut features = match variant {
        Task1Variant::Spatial => spatial_block(record),
        Task1Variant::Temporal => temporal_block(record),
        Task1Variant::Spatiotemporal => {
            let mut v = spatial_block(record);
            v.extend(temporal_block(record));
            v
        }
    };
    features.extend(emotion_block(record));
    features
}

/// Per-face dwell fractions in the given step: the prediction target of the
/// dwell models.
pub fn step_dwell_targets(record: &TrialRecord, step: u8) -> [f64; 4] {
    dwell_table(record, step).face_fractions
}

/// Loss weights emphasizing the target face.
pub fn target_weights(target_index: usize, w_target: f64) -> Vec<f64> {
    let mut w = vec![1.0; 4];
    w[target_index] = w_target;
    w
}

/// Default loss weight of the target-face output.
pub const DEFAULT_TARGET_WEIGHT: f64 = 2.0;

/// Assemble the step-1-to-step-3 dataset: one row per trial id, features and
/// targets averaged across the participants who saw that trial.
pub fn task1_dataset(records: &[TrialRecord], variant: Task1Variant, w_target: f64) -> Dataset {
    average_by_trial(records, |r| build_task1_features(r, variant), 3, w_target)
}

fn average_by_trial<F: Fn(&TrialRecord) -> Vec<f64>>(
    records: &[TrialRecord],
    features: F,
    target_step: u8,
    w_target: f64,
) -> Dataset {
    let mut by_trial: BTreeMap<u32, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_trial.entry(r.manifest.trial_id).or_default().push(r);
    }
    let mut data = Dataset {
        inputs: Vec::new(),
        targets: Vec::new(),
        weights: Vec::new(),
        target_slots: Vec::new(),
        row_ids: Vec::new(),
    };
    for (trial_id, rs) in by_trial {
        let n = rs.len() as f64;
        let mut input: Vec<f64> = features(rs[0]);
        for r in &rs[1..] {
            for (acc, v) in input.iter_mut().zip(features(r)) {
                *acc += v;
            }
        }
        for v in input.iter_mut() {
            *v /= n;
        }
        let mut target = [0.0f64; 4];
        for r in &rs {
            let t = step_dwell_targets(r, target_step);
            for (acc, v) in target.iter_mut().zip(t) {
                *acc += v;
            }
        }
        let target: Vec<f64> = target.iter().map(|v| v / n).collect();
        let slot = rs[0].manifest.target_face_index;
        data.inputs.push(input);
        data.targets.push(target);
        data.weights.push(target_weights(slot, w_target));
        data.target_slots.push(Some(slot));
        data.row_ids.push(format!("trial-{trial_id}"));
    }
    data
}

/// Face embeddings keyed by face id. All vectors share one dimension
/// (2622 for the reference face-recognition network, but any length works).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub dim: usize,
    pub by_face: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(pairs: Vec<(String, Vec<f64>)>) -> Result<Self, ModelError> {
        let mut by_face = BTreeMap::new();
        let mut dim = None;
        for (face_id, v) in pairs {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(ModelError::RaggedEmbeddings { face_id });
                }
                _ => {}
            }
            by_face.insert(face_id, v);
        }
        Ok(EmbeddingSet {
            dim: dim.unwrap_or(0),
            by_face,
        })
    }
}

/// Assemble the faces-only dataset: the four faces' embeddings concatenated
/// in manifest order predict the per-face dwell of `step` (1 or 3).
pub fn task2_dataset(
    records: &[TrialRecord],
    embeddings: &EmbeddingSet,
    step: u8,
    w_target: f64,
) -> Result<Dataset, ModelError> {
    for r in records {
        for f in &r.manifest.faces {
            if !embeddings.by_face.contains_key(&f.face_id) {
                return Err(ModelError::MissingEmbedding { face_id: f.face_id.clone() });
            }
        }
    }
    Ok(average_by_trial(
        records,
        |r| {
            let mut v = Vec::with_capacity(4 * embeddings.dim);
            for f in &r.manifest.faces {
                v.extend_from_slice(&embeddings.by_face[&f.face_id]);
            }
            v
        },
        step,
        w_target,
    ))
}

/// Version tag of the per-participant feature layout below.
pub const TASK3_LAYOUT: &str =
    "task3-features-v1: emotion-major, region-minor, (binocular rate, pupil) pairs";

/// Per-participant step-1 features: for each of the 6 emotions and 7 regions,
/// the mean binocular microsaccade rate and mean pupil size of the matching
/// fixations. 6 x 7 x 2 = 84 values; absent cells are zero with the mask
/// cleared.
#[derive(Debug, Clone, PartialEq)]
pub struct Task3Features {
    pub values: Vec<f64>,
    pub present: Vec<bool>,
}

pub fn task3_features(rows: &[FeatureRow]) -> Task3Features {
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); 42];
    for row in rows {
        if row.interest_period_index != 1 {
            continue;
        }
        let (Some(emotion), Some(region)) = (row.emotion_of_fixated_face, row.roi_label) else {
            continue;
        };
        let cell = emotion.index() * 7 + region.index();
        sums[cell].0 += row.binocular_ms_rate_hz;
        sums[cell].1 += row.avg_pupil_au;
        sums[cell].2 += 1;
    }
    let mut values = Vec::with_capacity(84);
    let mut present = Vec::with_capacity(84);
    for (rate_sum, pupil_sum, n) in sums {
        if n == 0 {
            values.push(0.0);
            values.push(0.0);
            present.push(false);
            present.push(false);
        } else {
            values.push(rate_sum / n as f64);
            values.push(pupil_sum / n as f64);
            present.push(true);
            present.push(true);
        }
    }
    Task3Features { values, present }
}

/// Assemble the performance-prediction dataset: one row per participant,
/// step-1 event features against the mean DTC expressed as a fraction.
pub fn task3_dataset(rows: &[FeatureRow], scores: &[PerformanceScore]) -> Dataset {
    let mut by_participant: BTreeMap<&str, Vec<&FeatureRow>> = BTreeMap::new();
    for row in rows {
        by_participant
            .entry(row.participant_id.as_str())
            .or_default()
            .push(row);
    }
    let mut data = Dataset {
        inputs: Vec::new(),
        targets: Vec::new(),
        weights: Vec::new(),
        target_slots: Vec::new(),
        row_ids: Vec::new(),
    };
    for score in scores {
        let Some(prows) = by_participant.get(score.participant_id.as_str()) else {
            continue;
        };
        let cloned: Vec<FeatureRow> = prows.iter().map(|r| (*r).clone()).collect();
        let features = task3_features(&cloned);
        data.inputs.push(features.values);
        data.targets.push(vec![score.mean_dtc / 100.0]);
        data.weights.push(vec![1.0]);
        data.target_slots.push(None);
        data.row_ids.push(score.participant_id.clone());
    }
    data
}

// ---------------------------------------------------------------------------
// Leave-one-out cross-validation
// ---------------------------------------------------------------------------

/// Held-out prediction of one fold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FoldResult {
    pub row_id: String,
    pub prediction: Vec<f64>,
    pub truth: Vec<f64>,
}

/// Leave-one-out evaluation summary.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub folds: usize,
    /// MSE over every output of every held-out row.
    pub mse: f64,
    /// MSE over the target-face outputs only, when target slots exist.
    pub mse_target: Option<f64>,
    /// Spearman correlation between predictions and truths (with its
    /// p-value), for scalar targets.
    pub spearman_rho: Option<f64>,
    pub spearman_p: Option<f64>,
    pub per_fold: Vec<FoldResult>,
}

/// Run leave-one-out cross-validation. `train_predict` receives the training
/// split, a fold-derived seed, the held-out row index, and the held-out
/// input, and returns the prediction.
pub fn loocv<F>(data: &Dataset, seed: u64, train_predict: F) -> Result<EvalReport, ModelError>
where
    F: Fn(&Dataset, u64, usize, &[f64]) -> Vec<f64>,
{
    data.validate()?;
    let n = data.len();
    if n < 3 {
        return Err(ModelError::TooFewRows { minimum: 3 });
    }
    let mut per_fold = Vec::with_capacity(n);
    let mut se_sum = 0.0;
    let mut se_count = 0usize;
    let mut target_se_sum = 0.0;
    let mut target_count = 0usize;
    for i in 0..n {
        let train = data.without_row(i);
        let fold_seed = derive_seed(seed, i as u64);
        let prediction = train_predict(&train, fold_seed, i, &data.inputs[i]);
        let truth = data.targets[i].clone();
        debug_assert_eq!(prediction.len(), truth.len());
        for (p, t) in prediction.iter().zip(truth.iter()) {
            se_sum += (p - t) * (p - t);
            se_count += 1;
        }
        if let Some(slot) = data.target_slots[i] {
            let d = prediction[slot] - truth[slot];
            target_se_sum += d * d;
            target_count += 1;
        }
        per_fold.push(FoldResult {
            row_id: data.row_ids[i].clone(),
            prediction,
            truth,
        });
    }
    let (spearman_rho, spearman_p) = if data.output_dim() == 1 {
        let preds: Vec<f64> = per_fold.iter().map(|f| f.prediction[0]).collect();
        let truths: Vec<f64> = per_fold.iter().map(|f| f.truth[0]).collect();
        match crate::stats::spearman(&preds, &truths) {
            Ok(r) => (Some(r.statistic), Some(r.p_value)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(EvalReport {
        folds: n,
        mse: se_sum / se_count as f64,
        mse_target: (target_count > 0).then(|| target_se_sum / target_count as f64),
        spearman_rho,
        spearman_p,
        per_fold,
    })
}

/// LOOCV of the fixed baseline over a 4-output dwell dataset: each held-out
/// row is predicted from its own target slot alone (the baseline has no
/// trainable state).
pub fn loocv_baseline(data: &Dataset, step: u8) -> Result<EvalReport, ModelError> {
    let slots = data.target_slots.clone();
    loocv(data, 0, move |_, _, row, _| {
        baseline_predict(step, slots[row].unwrap_or(0)).to_vec()
    })
}
