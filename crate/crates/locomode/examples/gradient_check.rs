//! Checks backpropagation-through-time gradients against central finite
//! differences on a small random model and prints the worst relative error.
//!
//! ```bash
//! cargo run -p locomode --example gradient_check
//! ```

use locomode::data::Label;
use locomode::nn::{
    init_params, model_backward, model_forward, one_hot, CellActivation, Mode, ModelArch,
};
use ndarray::Array2;
use rand::Rng;

fn main() -> locomode::Result<()> {
    for act in [CellActivation::Sigmoid, CellActivation::Tanh] {
        let arch = ModelArch {
            feature_dim: 4,
            hidden1: 5,
            hidden2: 4,
            classes: 8,
            dropout_p: 0.0,
            cell_activation: act,
        };
        let params = init_params(&arch, 42)?;
        let mut rng = locomode::rng::rng_from(7);
        let x = Array2::from_shape_fn((3, arch.feature_dim), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let label = Label::Bike;
        let y = one_hot(label, 8);
        let mode = Mode::Train { seed: 1 };

        let (_, cache) = model_forward(&x, &params, mode)?;
        let grads = model_backward(&params, &cache.expect("train cache"), &y)?;

        let loss_of = |p: &locomode::nn::ModelParams| -> f64 {
            let (probs, _) = model_forward(&x, p, mode).expect("forward");
            -probs[label.index()].max(1e-12).ln()
        };

        let eps = 1e-5;
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        let analytic: Vec<Vec<f64>> = grads
            .flat_views()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect();
        let mut scratch = params.clone();
        for (ai, arr) in analytic.iter().enumerate() {
            for (ei, &a) in arr.iter().enumerate() {
                let mut views = scratch.flat_views_mut();
                let slot = views[ai].iter_mut().nth(ei).expect("entry");
                let base = *slot;
                *slot = base + eps;
                drop(views);
                let plus = loss_of(&scratch);
                let mut views = scratch.flat_views_mut();
                *views[ai].iter_mut().nth(ei).expect("entry") = base - eps;
                drop(views);
                let minus = loss_of(&scratch);
                let mut views = scratch.flat_views_mut();
                *views[ai].iter_mut().nth(ei).expect("entry") = base;
                drop(views);

                let numeric = (plus - minus) / (2.0 * eps);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
                worst = worst.max(rel);
                checked += 1;
            }
        }
        println!("{act}: checked {checked} gradient entries, worst relative error {worst:.3e}");
        assert!(worst < 1e-5, "gradient check failed");
    }
    println!("analytic gradients agree with finite differences");
    Ok(())
}
