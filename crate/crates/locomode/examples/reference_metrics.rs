//! Recomputes accuracy, macro F1 and weighted F1 from the bundled reference
//! confusion matrix (the published hand-carried validation result) and shows
//! the per-class breakdown.
//!
//! ```bash
//! cargo run -p locomode --example reference_metrics
//! ```

use locomode::data::ALL_LABELS;
use locomode::eval::{metrics, reference_confusion_matrix};

fn main() -> locomode::Result<()> {
    let cm = reference_confusion_matrix();
    let report = metrics(&cm)?;

    println!("{} samples, {} correct", cm.total(), cm.trace());
    println!();
    println!("class     precision  recall   f1      support");
    for (i, label) in ALL_LABELS.iter().enumerate() {
        println!(
            "{:<8}  {:>9.4}  {:>6.4}  {:>6.4}  {:>7}",
            label.name(),
            report.precision[i],
            report.recall[i],
            report.f1[i],
            report.support[i]
        );
    }
    println!();
    println!("accuracy    {:.5}  (published as 63.68 %)", report.accuracy);
    println!("macro_f1    {:.5}", report.macro_f1);
    println!("weighted_f1 {:.5}", report.weighted_f1);
    Ok(())
}
