//! Forward pass: LSTM cell and layer recursion, inverted dropout, dense head
//! and softmax. Training-mode passes record everything backpropagation needs.

use ndarray::{Array1, Array2, ArrayView1, Dimension};

use super::{LstmLayerParams, ModelParams};
use crate::error::{Error, Result};
use crate::rng::{rng_from, stream, subseed2};
use rand::Rng;

/// Forward-pass mode. Train carries the seed that derives both dropout masks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Train { seed: u64 },
    Eval,
}

/// Per-timestep values recorded for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub inputs: Vec<Array1<f64>>,
    pub h_prev: Vec<Array1<f64>>,
    pub c_prev: Vec<Array1<f64>>,
    pub gate_i: Vec<Array1<f64>>,
    pub gate_f: Vec<Array1<f64>>,
    pub gate_g: Vec<Array1<f64>>,
    pub gate_o: Vec<Array1<f64>>,
    /// cell_activation(c_t), the value multiplied by the output gate.
    pub act_c: Vec<Array1<f64>>,
}

impl LayerCache {
    fn with_capacity(timesteps: usize) -> LayerCache {
        LayerCache {
            inputs: Vec::with_capacity(timesteps),
            h_prev: Vec::with_capacity(timesteps),
            c_prev: Vec::with_capacity(timesteps),
            gate_i: Vec::with_capacity(timesteps),
            gate_f: Vec::with_capacity(timesteps),
            gate_g: Vec::with_capacity(timesteps),
            gate_o: Vec::with_capacity(timesteps),
            act_c: Vec::with_capacity(timesteps),
        }
    }

    pub fn timesteps(&self) -> usize {
        self.inputs.len()
    }
}

/// Everything a training-mode model pass records.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub layer1: LayerCache,
    pub layer2: LayerCache,
    /// Scaled keep masks (entries 0 or 1/(1−p)).
    pub mask1: Array2<f64>,
    pub mask2: Array1<f64>,
    /// Dense-layer input: final layer-2 state after dropout.
    pub dense_in: Array1<f64>,
    pub probs: Array1<f64>,
}

pub enum LayerOutput {
    /// One hidden state per timestep (timesteps × hidden).
    Sequence(Array2<f64>),
    /// Final hidden state only.
    Final(Array1<f64>),
}

/// Values a single cell step exposes beyond (h, c).
pub struct CellStep {
    pub gate_i: Array1<f64>,
    pub gate_f: Array1<f64>,
    pub gate_g: Array1<f64>,
    pub gate_o: Array1<f64>,
    pub act_c: Array1<f64>,
}

/// One LSTM step: z = x·W + h_prev·U + b split into [i, f, g, o];
/// c = f⊙c_prev + i⊙g; h = o⊙act(c).
pub fn lstm_cell_forward(
    x: ArrayView1<'_, f64>,
    h_prev: &Array1<f64>,
    c_prev: &Array1<f64>,
    p: &LstmLayerParams,
) -> Result<(Array1<f64>, Array1<f64>, CellStep)> {
    let h = p.hidden;
    if x.len() != p.input_dim() || h_prev.len() != h || c_prev.len() != h {
        return Err(Error::ShapeMismatch {
            got: vec![x.len(), h_prev.len(), c_prev.len()],
            expected: vec![p.input_dim(), h, h],
        });
    }
    let z = x.dot(&p.w) + h_prev.dot(&p.u) + &p.b;
    let act = p.cell_activation;

    let mut gate_i = Array1::zeros(h);
    let mut gate_f = Array1::zeros(h);
    let mut gate_g = Array1::zeros(h);
    let mut gate_o = Array1::zeros(h);
    for j in 0..h {
        gate_i[j] = super::sigmoid(z[j]);
        gate_f[j] = super::sigmoid(z[h + j]);
        gate_g[j] = act.apply(z[2 * h + j]);
        gate_o[j] = super::sigmoid(z[3 * h + j]);
    }

    let c = &gate_f * c_prev + &gate_i * &gate_g;
    let act_c = c.mapv(|v| act.apply(v));
    let h_t = &gate_o * &act_c;
    Ok((
        h_t,
        c,
        CellStep {
            gate_i,
            gate_f,
            gate_g,
            gate_o,
            act_c,
        },
    ))
}

/// Unrolls a layer over the rows of `xs` from a zero initial state.
pub fn lstm_layer_forward(
    xs: &Array2<f64>,
    p: &LstmLayerParams,
    return_sequences: bool,
) -> Result<(LayerOutput, LayerCache)> {
    let timesteps = xs.nrows();
    let mut cache = LayerCache::with_capacity(timesteps);
    let mut h = Array1::zeros(p.hidden);
    let mut c = Array1::zeros(p.hidden);
    let mut seq = Array2::zeros((timesteps, p.hidden));

    for (t, x) in xs.rows().into_iter().enumerate() {
        let (h_t, c_t, step) = lstm_cell_forward(x, &h, &c, p)?;
        cache.inputs.push(x.to_owned());
        cache.h_prev.push(h);
        cache.c_prev.push(c);
        cache.gate_i.push(step.gate_i);
        cache.gate_f.push(step.gate_f);
        cache.gate_g.push(step.gate_g);
        cache.gate_o.push(step.gate_o);
        cache.act_c.push(step.act_c);
        seq.row_mut(t).assign(&h_t);
        h = h_t;
        c = c_t;
    }

    let out = if return_sequences {
        LayerOutput::Sequence(seq)
    } else {
        LayerOutput::Final(h)
    };
    Ok((out, cache))
}

fn dropout_mask<D: Dimension>(shape: D, p: f64, seed: u64) -> ndarray::Array<f64, D> {
    let mut rng = rng_from(seed);
    let keep_scale = 1.0 / (1.0 - p);
    ndarray::Array::from_shape_simple_fn(shape, || {
        if rng.gen::<f64>() < p {
            0.0
        } else {
            keep_scale
        }
    })
}

/// Inverted dropout: in training, entries drop with probability `p` and
/// survivors scale by 1/(1−p); evaluation is the identity.
pub fn dropout<D: Dimension>(
    x: &ndarray::Array<f64, D>,
    p: f64,
    mode: Mode,
) -> Result<ndarray::Array<f64, D>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    match mode {
        Mode::Eval => Ok(x.clone()),
        Mode::Train { seed } => Ok(x * &dropout_mask(x.raw_dim(), p, seed)),
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exp = logits.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Full model pass: LSTM-1 (sequences) → dropout → LSTM-2 (final state) →
/// dropout → dense → softmax. Training mode returns the cache for
/// backpropagation; evaluation applies no dropout and returns no cache.
pub fn model_forward(
    x: &Array2<f64>,
    m: &ModelParams,
    mode: Mode,
) -> Result<(Array1<f64>, Option<ForwardCache>)> {
    if x.ncols() != m.layer1.input_dim() {
        return Err(Error::ShapeMismatch {
            got: vec![x.nrows(), x.ncols()],
            expected: vec![x.nrows(), m.layer1.input_dim()],
        });
    }

    let (out1, cache1) = lstm_layer_forward(x, &m.layer1, true)?;
    let seq1 = match out1 {
        LayerOutput::Sequence(s) => s,
        LayerOutput::Final(_) => unreachable!(),
    };

    let (mask1, mask2) = match mode {
        Mode::Eval => (Array2::ones(seq1.raw_dim()), Array1::ones(m.layer2.hidden)),
        Mode::Train { seed } => (
            dropout_mask(
                seq1.raw_dim(),
                m.dropout_p,
                subseed2(seed, stream::DROPOUT, 1),
            ),
            dropout_mask(
                ndarray::Dim(m.layer2.hidden),
                m.dropout_p,
                subseed2(seed, stream::DROPOUT, 2),
            ),
        ),
    };

    let dropped1 = &seq1 * &mask1;
    let (out2, cache2) = lstm_layer_forward(&dropped1, &m.layer2, false)?;
    let h2 = match out2 {
        LayerOutput::Final(h) => h,
        LayerOutput::Sequence(_) => unreachable!(),
    };
    let dense_in = &h2 * &mask2;
    let logits = dense_in.dot(&m.dense_w) + &m.dense_b;
    let probs = softmax(&logits);

    let cache = match mode {
        Mode::Eval => None,
        Mode::Train { .. } => Some(ForwardCache {
            layer1: cache1,
            layer2: cache2,
            mask1,
            mask2,
            dense_in,
            probs: probs.clone(),
        }),
    };
    Ok((probs, cache))
}

/// Eval-mode class probabilities.
pub fn predict_probs(x: &Array2<f64>, m: &ModelParams) -> Result<Array1<f64>> {
    Ok(model_forward(x, m, Mode::Eval)?.0)
}

/// Argmax with ties breaking toward the lowest class index.
pub fn argmax(probs: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in probs.iter().enumerate() {
        if v > probs[best] {
            best = i;
        }
    }
    best
}
