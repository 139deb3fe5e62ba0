//! End-to-end desk-scale run: synthesize a corpus in memory, preprocess it,
//! train the two-layer LSTM and print the per-epoch curves.
//!
//! ```bash
//! cargo run --release -p locomode --example train_synthetic [epochs]
//! ```

use locomode::data::{Position, RngSeed, Split};
use locomode::nn::{init_params, ModelArch};
use locomode::pipeline::{run_pipeline, Balance, PipelineConfig};
use locomode::synth::{default_signatures, generate_blocks};
use locomode::train::{train, TrainConfig};

fn main() -> locomode::Result<()> {
    let epochs: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);

    let signatures = default_signatures();
    let mut blocks = Vec::new();
    for (i, pos) in [Position::Hip, Position::Bag, Position::Torso]
        .into_iter()
        .enumerate()
    {
        blocks.extend(generate_blocks(&signatures, 8, pos, 100 + i as u64));
    }
    let val_blocks = generate_blocks(&signatures, 4, Position::Hand, 200);

    let cfg = PipelineConfig {
        timesteps: 5,
        feature_dim: 100,
        balance: Balance::Undersample,
        seed: RngSeed(42),
    };
    let (train_ds, normalizer) = run_pipeline(&blocks, &cfg, Split::Train, None)?;
    let (val_ds, _) = run_pipeline(&val_blocks, &cfg, Split::Validation, Some(&normalizer))?;
    println!(
        "train {} samples / val {} samples, {}x{} windows",
        train_ds.len(),
        val_ds.len(),
        train_ds.timesteps,
        train_ds.feature_dim
    );

    let arch = ModelArch::default();
    let model = init_params(&arch, 42)?;
    println!("model: {} trainable parameters", model.param_count());

    let train_cfg = TrainConfig {
        epochs,
        batch_size: 64,
        lr: 1e-3,
        seed: RngSeed(42),
    };
    let started = std::time::Instant::now();
    let (_best, history) = train(model, &train_ds, &val_ds, &train_cfg, None)?;
    println!(
        "trained {} epochs in {:.1}s",
        epochs,
        started.elapsed().as_secs_f64()
    );

    println!("epoch  train_loss  train_acc  val_loss  val_acc");
    for r in &history.records {
        println!(
            "{:>5}  {:>10.4}  {:>9.4}  {:>8.4}  {:>7.4}",
            r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc
        );
    }
    println!("best epoch: {}", history.best_epoch);
    Ok(())
}
