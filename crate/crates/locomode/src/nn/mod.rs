//! The model: two stacked LSTM layers with inverted dropout and a dense
//! softmax head, in 64-bit arithmetic throughout.
//!
//! Parameter layout is fixed for interchange: gate order within every
//! 4·hidden axis is [input, forget, candidate, output]; checkpoint files
//! serialize layer1 (W, U, b), layer2 (W, U, b), then the dense kernel and
//! bias, row-major little-endian.

mod backward;
mod batch;
mod checkpoint;
mod forward;

pub use backward::{model_backward, LstmLayerGrads, ModelGrads};
pub use batch::{model_forward_batch_eval, model_step_batch, BatchStep};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use forward::{
    argmax, dropout, lstm_cell_forward, lstm_layer_forward, model_forward, predict_probs, softmax,
    CellStep, ForwardCache, LayerCache, LayerOutput, Mode,
};

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;

use crate::data::{Label, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::rng::{rng_from, stream, subseed};

/// Candidate/cell-output activation. Gates are always sigmoid.
///
/// The reference configuration uses `Sigmoid` here as well; `Tanh` gives the
/// textbook cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellActivation {
    Sigmoid,
    Tanh,
}

impl CellActivation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            CellActivation::Sigmoid => sigmoid(z),
            CellActivation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activated value.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            CellActivation::Sigmoid => a * (1.0 - a),
            CellActivation::Tanh => 1.0 - a * a,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            CellActivation::Sigmoid => 0,
            CellActivation::Tanh => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<CellActivation> {
        match code {
            0 => Some(CellActivation::Sigmoid),
            1 => Some(CellActivation::Tanh),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<CellActivation> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigmoid" => Some(CellActivation::Sigmoid),
            "tanh" => Some(CellActivation::Tanh),
            _ => None,
        }
    }
}

impl std::fmt::Display for CellActivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CellActivation::Sigmoid => "sigmoid",
            CellActivation::Tanh => "tanh",
        })
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One LSTM layer's trainable arrays.
///
/// `w`: input kernel (input_dim × 4·hidden), `u`: recurrent kernel
/// (hidden × 4·hidden), `b`: bias (4·hidden).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayerParams {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
    pub hidden: usize,
    pub cell_activation: CellActivation,
}

impl LstmLayerParams {
    pub fn zeros(input_dim: usize, hidden: usize, cell_activation: CellActivation) -> Self {
        LstmLayerParams {
            w: Array2::zeros((input_dim, 4 * hidden)),
            u: Array2::zeros((hidden, 4 * hidden)),
            b: Array1::zeros(4 * hidden),
            hidden,
            cell_activation,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }
}

/// Architecture metadata: enough to allocate or validate a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelArch {
    pub feature_dim: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub classes: usize,
    pub dropout_p: f64,
    pub cell_activation: CellActivation,
}

impl Default for ModelArch {
    fn default() -> Self {
        ModelArch {
            feature_dim: 100,
            hidden1: 64,
            hidden2: 64,
            classes: NUM_CLASSES,
            dropout_p: 0.25,
            cell_activation: CellActivation::Sigmoid,
        }
    }
}

/// All trainable arrays plus the dropout probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layer1: LstmLayerParams,
    pub layer2: LstmLayerParams,
    pub dense_w: Array2<f64>,
    pub dense_b: Array1<f64>,
    pub dropout_p: f64,
}

impl ModelParams {
    pub fn zeros(arch: &ModelArch) -> ModelParams {
        ModelParams {
            layer1: LstmLayerParams::zeros(arch.feature_dim, arch.hidden1, arch.cell_activation),
            layer2: LstmLayerParams::zeros(arch.hidden1, arch.hidden2, arch.cell_activation),
            dense_w: Array2::zeros((arch.hidden2, arch.classes)),
            dense_b: Array1::zeros(arch.classes),
            dropout_p: arch.dropout_p,
        }
    }

    pub fn arch(&self) -> ModelArch {
        ModelArch {
            feature_dim: self.layer1.input_dim(),
            hidden1: self.layer1.hidden,
            hidden2: self.layer2.hidden,
            classes: self.dense_b.len(),
            dropout_p: self.dropout_p,
            cell_activation: self.layer1.cell_activation,
        }
    }

    /// Trainable arrays in checkpoint order.
    pub fn flat_views(&self) -> Vec<ArrayViewD<'_, f64>> {
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

    pub fn flat_views_mut(&mut self) -> Vec<ArrayViewMutD<'_, f64>> {
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

    pub fn param_count(&self) -> usize {
        self.flat_views().iter().map(|v| v.len()).sum()
    }
}

/// Trainable-parameter count for stacked LSTM layers plus a dense head:
/// Σ over layers of 4·h·(d_in + h + 1), plus h_last·classes + classes.
pub fn param_count(feature_dim: usize, hiddens: &[usize], classes: usize) -> usize {
    let mut total = 0;
    let mut d_in = feature_dim;
    for &h in hiddens {
        total += 4 * h * (d_in + h + 1);
        d_in = h;
    }
    total + d_in * classes + classes
}

/// Glorot-uniform initialization with zero biases, except the forget-gate
/// bias slice which starts at 1.0.
pub fn init_params(arch: &ModelArch, seed: u64) -> Result<ModelParams> {
    if !(0.0..1.0).contains(&arch.dropout_p) {
        return Err(Error::InvalidProbability(arch.dropout_p));
    }
    let mut rng = rng_from(subseed(seed, stream::INIT));
    let mut glorot = |rows: usize, cols: usize| -> Array2<f64> {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
    };

    let mut params = ModelParams::zeros(arch);
    params.layer1.w = glorot(arch.feature_dim, 4 * arch.hidden1);
    params.layer1.u = glorot(arch.hidden1, 4 * arch.hidden1);
    params.layer2.w = glorot(arch.hidden1, 4 * arch.hidden2);
    params.layer2.u = glorot(arch.hidden2, 4 * arch.hidden2);
    params.dense_w = glorot(arch.hidden2, arch.classes);
    for layer in [&mut params.layer1, &mut params.layer2] {
        let h = layer.hidden;
        layer.b.slice_mut(ndarray::s![h..2 * h]).fill(1.0);
    }
    Ok(params)
}

/// One-hot target vector for a label.
pub fn one_hot(label: Label, classes: usize) -> Array1<f64> {
    let mut y = Array1::zeros(classes);
    y[label.index()] = 1.0;
    y
}
