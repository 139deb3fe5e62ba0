//! Minibatch-sized forward/backward passes.
//!
//! Semantics match the per-sample path exactly (same masks per sample, same
//! gate math); the difference is layout: one (batch × dim) matrix product per
//! timestep instead of a vector product per sample, which is what the
//! matrix-multiply kernels want. The training loop and split evaluation run
//! on this path; the per-sample path stays the reference for gradient checks.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;

use super::backward::{LstmLayerGrads, ModelGrads};
use super::{sigmoid, LstmLayerParams, ModelParams};
use crate::data::Label;
use crate::error::{Error, Result};
use crate::rng::{rng_from, stream, subseed2};

struct BatchLayerCache {
    inputs: Vec<Array2<f64>>,
    h_prev: Vec<Array2<f64>>,
    c_prev: Vec<Array2<f64>>,
    gate_i: Vec<Array2<f64>>,
    gate_f: Vec<Array2<f64>>,
    gate_g: Vec<Array2<f64>>,
    gate_o: Vec<Array2<f64>>,
    act_c: Vec<Array2<f64>>,
}

impl BatchLayerCache {
    fn new(timesteps: usize) -> Self {
        BatchLayerCache {
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
}

/// One batched LSTM step over rows; returns (H, C) and caches intermediates.
fn layer_step(
    x: Array2<f64>,
    h: Array2<f64>,
    c: Array2<f64>,
    p: &LstmLayerParams,
    cache: Option<&mut BatchLayerCache>,
) -> (Array2<f64>, Array2<f64>) {
    let hid = p.hidden;
    let act = p.cell_activation;
    let mut z = x.dot(&p.w) + h.dot(&p.u);
    z += &p.b;

    let gate_i = z.slice(s![.., 0..hid]).map(|&v| sigmoid(v));
    let gate_f = z.slice(s![.., hid..2 * hid]).map(|&v| sigmoid(v));
    let gate_g = z.slice(s![.., 2 * hid..3 * hid]).map(|&v| act.apply(v));
    let gate_o = z.slice(s![.., 3 * hid..]).map(|&v| sigmoid(v));

    let c_new = &gate_f * &c + &gate_i * &gate_g;
    let act_c = c_new.map(|&v| act.apply(v));
    let h_new = &gate_o * &act_c;

    if let Some(cache) = cache {
        cache.inputs.push(x);
        cache.h_prev.push(h);
        cache.c_prev.push(c);
        cache.gate_i.push(gate_i);
        cache.gate_f.push(gate_f);
        cache.gate_g.push(gate_g);
        cache.gate_o.push(gate_o);
        cache.act_c.push(act_c);
    }
    (h_new, c_new)
}

fn gather_timestep(xs: &[&Array2<f64>], t: usize) -> Array2<f64> {
    let d = xs[0].ncols();
    let mut out = Array2::zeros((xs.len(), d));
    for (b, x) in xs.iter().enumerate() {
        out.row_mut(b).assign(&x.row(t));
    }
    out
}

fn check_batch(xs: &[&Array2<f64>], m: &ModelParams) -> Result<(usize, usize)> {
    let first = xs.first().ok_or(Error::EmptyBatch)?;
    let (timesteps, d) = first.dim();
    if d != m.layer1.input_dim() || xs.iter().any(|x| x.dim() != (timesteps, d)) {
        return Err(Error::ShapeMismatch {
            got: vec![timesteps, d],
            expected: vec![timesteps, m.layer1.input_dim()],
        });
    }
    Ok((timesteps, d))
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Evaluation-mode class probabilities for a batch, one row per sample.
pub fn model_forward_batch_eval(xs: &[&Array2<f64>], m: &ModelParams) -> Result<Array2<f64>> {
    let (timesteps, _) = check_batch(xs, m)?;
    let batch = xs.len();

    let mut h1 = Array2::zeros((batch, m.layer1.hidden));
    let mut c1 = Array2::zeros((batch, m.layer1.hidden));
    let mut h2 = Array2::zeros((batch, m.layer2.hidden));
    let mut c2 = Array2::zeros((batch, m.layer2.hidden));
    for t in 0..timesteps {
        let x_t = gather_timestep(xs, t);
        let (h1_new, c1_new) = layer_step(x_t, h1, c1, &m.layer1, None);
        let (h2_new, c2_new) = layer_step(h1_new.clone(), h2, c2, &m.layer2, None);
        h1 = h1_new;
        c1 = c1_new;
        h2 = h2_new;
        c2 = c2_new;
    }
    let logits = h2.dot(&m.dense_w) + &m.dense_b;
    Ok(softmax_rows(&logits))
}

/// Per-sample scaled dropout mask, identical to the per-sample path's
/// derivation for the same sample seed.
fn sample_masks(m: &ModelParams, timesteps: usize, sample_seed: u64) -> (Array2<f64>, Array1<f64>) {
    let p = m.dropout_p;
    let keep_scale = 1.0 / (1.0 - p);
    let draw = |shape_len: usize, seed: u64| -> Vec<f64> {
        let mut rng = rng_from(seed);
        (0..shape_len)
            .map(|_| {
                if rng.gen::<f64>() < p {
                    0.0
                } else {
                    keep_scale
                }
            })
            .collect()
    };
    let m1 = Array2::from_shape_vec(
        (timesteps, m.layer1.hidden),
        draw(
            timesteps * m.layer1.hidden,
            subseed2(sample_seed, stream::DROPOUT, 1),
        ),
    )
    .expect("mask shape");
    let m2 = Array1::from_vec(draw(
        m.layer2.hidden,
        subseed2(sample_seed, stream::DROPOUT, 2),
    ));
    (m1, m2)
}

pub struct BatchStep {
    /// Eval of the training-mode pass, one row per sample.
    pub probs: Array2<f64>,
    /// Mean gradients over the batch.
    pub grads: ModelGrads,
}

/// Training-mode forward and backward over one minibatch: per-sample dropout
/// masks (derived from `sample_seeds`), cross-entropy against `labels`, and
/// gradients averaged over the batch in fixed order.
pub fn model_step_batch(
    xs: &[&Array2<f64>],
    labels: &[Label],
    m: &ModelParams,
    sample_seeds: &[u64],
) -> Result<BatchStep> {
    let (timesteps, _) = check_batch(xs, m)?;
    let batch = xs.len();
    if labels.len() != batch || sample_seeds.len() != batch {
        return Err(Error::LengthMismatch {
            got: labels.len().min(sample_seeds.len()),
            expected: batch,
        });
    }
    let (h1d, h2d) = (m.layer1.hidden, m.layer2.hidden);

    // per-timestep mask matrices, rows = samples
    let mut mask1_t: Vec<Array2<f64>> = (0..timesteps)
        .map(|_| Array2::zeros((batch, h1d)))
        .collect();
    let mut mask2 = Array2::zeros((batch, h2d));
    for (b, &seed) in sample_seeds.iter().enumerate() {
        let (m1, m2) = sample_masks(m, timesteps, seed);
        for (t, mt) in mask1_t.iter_mut().enumerate() {
            mt.row_mut(b).assign(&m1.row(t));
        }
        mask2.row_mut(b).assign(&m2);
    }

    let mut cache1 = BatchLayerCache::new(timesteps);
    let mut cache2 = BatchLayerCache::new(timesteps);
    let mut h1 = Array2::zeros((batch, h1d));
    let mut c1 = Array2::zeros((batch, h1d));
    let mut h2 = Array2::zeros((batch, h2d));
    let mut c2 = Array2::zeros((batch, h2d));
    for (t, mask1) in mask1_t.iter().enumerate() {
        let x_t = gather_timestep(xs, t);
        let (h1_new, c1_new) = layer_step(x_t, h1, c1, &m.layer1, Some(&mut cache1));
        let dropped = &h1_new * mask1;
        let (h2_new, c2_new) = layer_step(dropped, h2, c2, &m.layer2, Some(&mut cache2));
        h1 = h1_new;
        c1 = c1_new;
        h2 = h2_new;
        c2 = c2_new;
    }
    let dense_in = &h2 * &mask2;
    let logits = dense_in.dot(&m.dense_w) + &m.dense_b;
    let probs = softmax_rows(&logits);

    // mean gradients: scale the logit gradient once, everything downstream
    // inherits it
    let scale = 1.0 / batch as f64;
    let mut dlogits = probs.clone();
    for (b, &label) in labels.iter().enumerate() {
        dlogits[(b, label.index())] -= 1.0;
    }
    dlogits.mapv_inplace(|v| v * scale);

    let dense_w = dense_in.t().dot(&dlogits);
    let dense_b = dlogits.sum_axis(Axis(0));
    let d_dense_in = dlogits.dot(&m.dense_w.t());
    let dh2 = &d_dense_in * &mask2;

    let (layer2, dx2_t) = layer_backward_batch(&m.layer2, &cache2, |t| {
        if t == timesteps - 1 {
            Some(dh2.clone())
        } else {
            None
        }
    });
    let (layer1, _) = layer_backward_batch(&m.layer1, &cache1, |t| Some(&dx2_t[t] * &mask1_t[t]));

    Ok(BatchStep {
        probs,
        grads: ModelGrads {
            layer1,
            layer2,
            dense_w,
            dense_b,
        },
    })
}

/// Batched BPTT through one layer; `dh_above(t)` supplies the gradient rows
/// arriving from the stage above at timestep t (None = zeros).
fn layer_backward_batch(
    p: &LstmLayerParams,
    cache: &BatchLayerCache,
    dh_above: impl Fn(usize) -> Option<Array2<f64>>,
) -> (LstmLayerGrads, Vec<Array2<f64>>) {
    let hid = p.hidden;
    let timesteps = cache.inputs.len();
    let batch = cache.inputs[0].nrows();
    let act = p.cell_activation;

    let mut grads = LstmLayerGrads {
        w: Array2::zeros((p.input_dim(), 4 * hid)),
        u: Array2::zeros((hid, 4 * hid)),
        b: Array1::zeros(4 * hid),
    };
    let mut dx_t: Vec<Array2<f64>> = vec![Array2::zeros((0, 0)); timesteps];
    let mut dh_next = Array2::zeros((batch, hid));
    let mut dc_next: Array2<f64> = Array2::zeros((batch, hid));

    for t in (0..timesteps).rev() {
        let gi = &cache.gate_i[t];
        let gf = &cache.gate_f[t];
        let gg = &cache.gate_g[t];
        let go = &cache.gate_o[t];
        let ac = &cache.act_c[t];
        let c_prev = &cache.c_prev[t];

        let dh = match dh_above(t) {
            Some(extra) => extra + &dh_next,
            None => dh_next.clone(),
        };
        let dc = &dh * go * &ac.map(|&a| act.derivative_from_output(a)) + &dc_next;

        let mut dz = Array2::zeros((batch, 4 * hid));
        {
            let di = &dc * gg * gi * &gi.map(|&v| 1.0 - v);
            let df = &dc * c_prev * gf * &gf.map(|&v| 1.0 - v);
            let dg = &dc * gi * &gg.map(|&a| act.derivative_from_output(a));
            let dout = &dh * ac * go * &go.map(|&v| 1.0 - v);
            dz.slice_mut(s![.., 0..hid]).assign(&di);
            dz.slice_mut(s![.., hid..2 * hid]).assign(&df);
            dz.slice_mut(s![.., 2 * hid..3 * hid]).assign(&dg);
            dz.slice_mut(s![.., 3 * hid..]).assign(&dout);
        }

        grads.w += &cache.inputs[t].t().dot(&dz);
        grads.u += &cache.h_prev[t].t().dot(&dz);
        grads.b += &dz.sum_axis(Axis(0));

        dx_t[t] = dz.dot(&p.w.t());
        dh_next = dz.dot(&p.u.t());
        dc_next = dc * gf;
    }
    (grads, dx_t)
}
