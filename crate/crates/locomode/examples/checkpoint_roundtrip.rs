//! Saves a freshly initialized model to the binary checkpoint format, loads
//! it back and verifies the round trip is bit-identical.
//!
//! ```bash
//! cargo run -p locomode --example checkpoint_roundtrip
//! ```

use locomode::nn::{init_params, load_checkpoint, save_checkpoint, ModelArch};

fn main() -> locomode::Result<()> {
    let arch = ModelArch::default();
    let params = init_params(&arch, 2024)?;
    println!(
        "initialized {}x{}→{}→{} model, {} parameters",
        5,
        arch.feature_dim,
        arch.hidden1,
        arch.hidden2,
        params.param_count()
    );

    let path = std::env::temp_dir().join("locomode-demo-ckpt.bin");
    save_checkpoint(&params, &path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("saved {} ({} bytes)", path.display(), bytes);

    let loaded = load_checkpoint(&path)?;
    assert_eq!(loaded, params, "round trip must be bit-identical");
    println!("reloaded checkpoint matches the original bit for bit");
    Ok(())
}
