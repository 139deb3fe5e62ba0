//! Generates a small ingestion-ready synthetic corpus and prints where it
//! landed. Equal seeds produce byte-identical corpora.
//!
//! ```bash
//! cargo run -p locomode --example gen_synthetic
//! ```

use locomode::commands::{cmd_gen_synthetic, RunConfig};

fn main() -> locomode::Result<()> {
    let out = std::env::temp_dir().join("locomode-demo").join("corpus");
    let cfg = RunConfig {
        blocks_per_class: 4,
        seed: 7,
        ..RunConfig::default()
    };
    let corpus = cmd_gen_synthetic(&cfg, &out)?;

    println!("corpus root: {}", out.display());
    for m in &corpus.train_manifests {
        println!("  train manifest: {}", m.display());
    }
    println!("  val manifest:   {}", corpus.val_manifest.display());
    println!("  test manifest:  {}", corpus.test_manifest.display());
    println!();
    println!("feed these to `locomode preprocess --manifest ... --out <dir>`");
    Ok(())
}
