//! Exact backpropagation through time for the two-layer model under
//! categorical cross-entropy.

use ndarray::{Array1, Array2, Axis};

use super::forward::{ForwardCache, LayerCache};
use super::{LstmLayerParams, ModelParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerGrads {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

/// Gradients shaped exactly like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub layer1: LstmLayerGrads,
    pub layer2: LstmLayerGrads,
    pub dense_w: Array2<f64>,
    pub dense_b: Array1<f64>,
}

impl ModelGrads {
    pub fn zeros_like(params: &ModelParams) -> ModelGrads {
        let layer = |p: &LstmLayerParams| LstmLayerGrads {
            w: Array2::zeros(p.w.raw_dim()),
            u: Array2::zeros(p.u.raw_dim()),
            b: Array1::zeros(p.b.raw_dim()),
        };
        ModelGrads {
            layer1: layer(&params.layer1),
            layer2: layer(&params.layer2),
            dense_w: Array2::zeros(params.dense_w.raw_dim()),
            dense_b: Array1::zeros(params.dense_b.raw_dim()),
        }
    }

    /// Arrays in checkpoint order, matching `ModelParams::flat_views`.
    pub fn flat_views(&self) -> Vec<ndarray::ArrayViewD<'_, f64>> {
        vec![
            self.layer1.w.view().into_dyn(),
            self.layer1.u.view().into_dyn(),
            self.layer1.b.view().into_dyn(),
            self.layer2.w.view().into_dyn(),
            self.layer2.u.view().into_dyn(),
            self.layer2.b.view().into_dyn(),
            self.dense_w.view().into_dyn(),
            self.dense_b.view().into_dyn(),
        ]
    }

    pub fn flat_views_mut(&mut self) -> Vec<ndarray::ArrayViewMutD<'_, f64>> {
        vec![
            self.layer1.w.view_mut().into_dyn(),
            self.layer1.u.view_mut().into_dyn(),
            self.layer1.b.view_mut().into_dyn(),
            self.layer2.w.view_mut().into_dyn(),
            self.layer2.u.view_mut().into_dyn(),
            self.layer2.b.view_mut().into_dyn(),
            self.dense_w.view_mut().into_dyn(),
            self.dense_b.view_mut().into_dyn(),
        ]
    }

    /// grads ← grads + scale · other, elementwise across all arrays.
    pub fn add_scaled(&mut self, other: &ModelGrads, scale: f64) {
        for (mut a, b) in self.flat_views_mut().into_iter().zip(other.flat_views()) {
            a.zip_mut_with(&b, |x, &y| *x += scale * y);
        }
    }

    /// Whether every array is shaped exactly like the model's.
    pub fn shape_matches(&self, params: &ModelParams) -> bool {
        self.flat_views()
            .iter()
            .zip(params.flat_views())
            .all(|(a, b)| a.shape() == b.shape())
    }
}

fn outer(col: &Array1<f64>, row: &Array1<f64>) -> Array2<f64> {
    let c = col.view().insert_axis(Axis(1));
    let r = row.view().insert_axis(Axis(0));
    c.dot(&r)
}

/// BPTT through one layer. `dh_above[t]` is the loss gradient flowing into
/// h_t from the stage above; returns parameter gradients and the gradient
/// with respect to the layer inputs.
fn lstm_layer_backward(
    p: &LstmLayerParams,
    cache: &LayerCache,
    dh_above: &Array2<f64>,
) -> (LstmLayerGrads, Array2<f64>) {
    let h = p.hidden;
    let d = p.input_dim();
    let timesteps = cache.timesteps();
    let act = p.cell_activation;

    let mut grads = LstmLayerGrads {
        w: Array2::zeros((d, 4 * h)),
        u: Array2::zeros((h, 4 * h)),
        b: Array1::zeros(4 * h),
    };
    let mut dx = Array2::zeros((timesteps, d));
    let mut dh_next: Array1<f64> = Array1::zeros(h);
    let mut dc_next: Array1<f64> = Array1::zeros(h);

    for t in (0..timesteps).rev() {
        let gi = &cache.gate_i[t];
        let gf = &cache.gate_f[t];
        let gg = &cache.gate_g[t];
        let go = &cache.gate_o[t];
        let ac = &cache.act_c[t];
        let c_prev = &cache.c_prev[t];

        let dh = &dh_above.row(t).to_owned() + &dh_next;
        let dc = Array1::from_shape_fn(h, |j| {
            dh[j] * go[j] * act.derivative_from_output(ac[j]) + dc_next[j]
        });

        let mut dz = Array1::zeros(4 * h);
        for j in 0..h {
            dz[j] = dc[j] * gg[j] * gi[j] * (1.0 - gi[j]);
            dz[h + j] = dc[j] * c_prev[j] * gf[j] * (1.0 - gf[j]);
            dz[2 * h + j] = dc[j] * gi[j] * act.derivative_from_output(gg[j]);
            dz[3 * h + j] = dh[j] * ac[j] * go[j] * (1.0 - go[j]);
        }

        grads.w += &outer(&cache.inputs[t], &dz);
        grads.u += &outer(&cache.h_prev[t], &dz);
        grads.b += &dz;

        dx.row_mut(t).assign(&p.w.dot(&dz));
        dh_next = p.u.dot(&dz);
        dc_next = &dc * gf;
    }

    (grads, dx)
}

/// Gradients of −log p(y) with respect to every parameter, backpropagated
/// through the dense head, both dropout masks and both LSTM layers.
pub fn model_backward(
    params: &ModelParams,
    cache: &ForwardCache,
    y_true: &Array1<f64>,
) -> Result<ModelGrads> {
    let t1 = cache.layer1.timesteps();
    let t2 = cache.layer2.timesteps();
    if t1 == 0
        || t1 != t2
        || cache.layer1.inputs[0].len() != params.layer1.input_dim()
        || cache.layer2.inputs[0].len() != params.layer2.input_dim()
        || cache.probs.len() != params.dense_b.len()
        || y_true.len() != params.dense_b.len()
    {
        return Err(Error::StaleCache(
            "cache shapes do not match the model".into(),
        ));
    }

    // softmax + cross-entropy collapse to probs − onehot at the logits
    let dlogits = &cache.probs - y_true;

    let dense_w = outer(&cache.dense_in, &dlogits);
    let dense_b = dlogits.clone();
    let d_dense_in = params.dense_w.dot(&dlogits);
    let dh2 = &d_dense_in * &cache.mask2;

    let mut dh_above2 = Array2::zeros((t2, params.layer2.hidden));
    dh_above2.row_mut(t2 - 1).assign(&dh2);
    let (layer2, dx2) = lstm_layer_backward(&params.layer2, &cache.layer2, &dh_above2);

    let dseq1 = &dx2 * &cache.mask1;
    let (layer1, _) = lstm_layer_backward(&params.layer1, &cache.layer1, &dseq1);

    Ok(ModelGrads {
        layer1,
        layer2,
        dense_w,
        dense_b,
    })
}
