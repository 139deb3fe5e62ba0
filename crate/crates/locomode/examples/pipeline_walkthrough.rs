//! Walks the preprocessing pipeline step by step on in-memory synthetic
//! blocks: majority labeling, activation feature, 5×100 windowing, class
//! balancing and (−1, 1) normalization.
//!
//! ```bash
//! cargo run -p locomode --example pipeline_walkthrough
//! ```

use locomode::data::{Label, Position, RngSeed, Split, ALL_LABELS};
use locomode::pipeline::{
    activation_signal, majority_label, run_pipeline, window_reshape, Balance, PipelineConfig,
};
use locomode::synth::{default_signatures, generate_blocks, generate_mixed_label_block};

fn main() -> locomode::Result<()> {
    let signatures = default_signatures();
    let blocks = generate_blocks(&signatures, 3, Position::Hip, 11);
    println!("generated {} blocks of 500 samples", blocks.len());

    // step 1+2 happen at ingestion (superfluous channels dropped, positions
    // merged); step 3 collapses 13 channels into one activation per sample
    let first = &blocks[0];
    let signal = activation_signal(first)?;
    println!(
        "activation of first block: len {}, range [{:.2}, {:.2}]",
        signal.len(),
        signal.iter().cloned().fold(f64::INFINITY, f64::min),
        signal.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );

    // step 4: windowing into timesteps × features
    let window = window_reshape(&signal, 5, 100)?;
    println!("window shape: {:?}", window.dim());

    // majority vote on a deliberately mixed block
    let mixed = generate_mixed_label_block(Label::Car, Label::Still, 460, 5)?;
    println!(
        "mixed block (460 Car / 40 Still) votes: {:?}",
        majority_label(mixed.labels())
    );

    // the full pipeline: balance + fit-normalize on the training split
    let cfg = PipelineConfig {
        timesteps: 5,
        feature_dim: 100,
        balance: Balance::Undersample,
        seed: RngSeed(11),
    };
    let (train, normalizer) = run_pipeline(&blocks, &cfg, Split::Train, None)?;
    println!("train set: {} samples, balanced counts:", train.len());
    for (label, count) in ALL_LABELS.iter().zip(train.class_counts()) {
        println!("  {label:<8} {count}");
    }

    // validation reuses the fitted statistics instead of refitting
    let val_blocks = generate_blocks(&signatures, 2, Position::Hand, 12);
    let (val, _) = run_pipeline(&val_blocks, &cfg, Split::Validation, Some(&normalizer))?;
    let extremes = val
        .samples()
        .iter()
        .flat_map(|s| s.features.iter().cloned())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    println!(
        "val set: {} samples, value range [{:.3}, {:.3}] under train statistics",
        val.len(),
        extremes.0,
        extremes.1
    );
    Ok(())
}
