//! Evaluation: predictions, the 8×8 confusion matrix (rows = true class,
//! columns = predicted class), accuracy and the F1 family, label histograms,
//! and prediction/report files.

use std::fs;
use std::path::Path;

use crate::data::{Dataset, Label, ALL_LABELS, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::nn::{argmax, model_forward, Mode, ModelParams};

/// Count matrix with fixed orientation: `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> ConfusionMatrix {
        ConfusionMatrix { counts }
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// True-class supports (row sums).
    pub fn supports(&self) -> [u64; NUM_CLASSES] {
        let mut s = [0u64; NUM_CLASSES];
        for (i, row) in self.counts.iter().enumerate() {
            s[i] = row.iter().sum();
        }
        s
    }

    /// Predicted-class totals (column sums).
    pub fn predicted_totals(&self) -> [u64; NUM_CLASSES] {
        let mut s = [0u64; NUM_CLASSES];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                s[j] += c;
            }
        }
        s
    }

    pub fn transposed(&self) -> ConfusionMatrix {
        let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts[j][i] = c;
            }
        }
        ConfusionMatrix { counts }
    }

    /// CSV with class-name header row and column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::from("true\\pred");
        for l in ALL_LABELS {
            text.push(',');
            text.push_str(l.name());
        }
        text.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            text.push_str(ALL_LABELS[i].name());
            for c in row {
                text.push_str(&format!(",{c}"));
            }
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Eval-mode prediction for every sample, in order.
pub fn predict(model: &ModelParams, ds: &Dataset) -> Result<Vec<Label>> {
    let mut out = Vec::with_capacity(ds.len());
    for s in ds.samples() {
        let (probs, _) = model_forward(&s.features, model, Mode::Eval)?;
        out.push(Label::from_index(argmax(&probs))?);
    }
    Ok(out)
}

/// Tallies `counts[truth][pred]` over paired sequences.
pub fn confusion(preds: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if preds.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if preds.len() != truth.len() {
        return Err(Error::LengthMismatch {
            got: preds.len(),
            expected: truth.len(),
        });
    }
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (&p, &t) in preds.iter().zip(truth) {
        counts[t.index()][p.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Derived metrics. Zero denominators yield 0 rather than NaN so degenerate
/// splits still produce stable reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: [f64; NUM_CLASSES],
    pub recall: [f64; NUM_CLASSES],
    pub f1: [f64; NUM_CLASSES],
    pub support: [u64; NUM_CLASSES],
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let support = cm.supports();
    let col = cm.predicted_totals();

    let mut precision = [0.0; NUM_CLASSES];
    let mut recall = [0.0; NUM_CLASSES];
    let mut f1 = [0.0; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        let tp = cm.counts[c][c] as f64;
        precision[c] = if col[c] > 0 { tp / col[c] as f64 } else { 0.0 };
        recall[c] = if support[c] > 0 {
            tp / support[c] as f64
        } else {
            0.0
        };
        let denom = (support[c] + col[c]) as f64;
        f1[c] = if denom > 0.0 { 2.0 * tp / denom } else { 0.0 };
    }

    let macro_f1 = f1.iter().sum::<f64>() / NUM_CLASSES as f64;
    let weighted_f1 = f1
        .iter()
        .zip(&support)
        .map(|(&f, &s)| f * s as f64)
        .sum::<f64>()
        / total as f64;

    Ok(MetricsReport {
        accuracy: cm.trace() as f64 / total as f64,
        precision,
        recall,
        f1,
        support,
        macro_f1,
        weighted_f1,
    })
}

impl MetricsReport {
    /// Per-class rows plus accuracy/macro/weighted summary rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = String::from("class,precision,recall,f1,support\n");
        for (i, l) in ALL_LABELS.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                l.name(),
                self.precision[i],
                self.recall[i],
                self.f1[i],
                self.support[i]
            ));
        }
        text.push_str(&format!("accuracy,{}\n", self.accuracy));
        text.push_str(&format!("macro_f1,{}\n", self.macro_f1));
        text.push_str(&format!("weighted_f1,{}\n", self.weighted_f1));
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Per-class counts, indexed by `Label::index()`.
pub fn label_histogram(labels: &[Label]) -> [u64; NUM_CLASSES] {
    let mut counts = [0u64; NUM_CLASSES];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

/// Histogram as CSV (`class,count`), the data behind distribution plots.
pub fn write_histogram(counts: &[u64; NUM_CLASSES], path: &Path) -> Result<()> {
    let mut text = String::from("class,count\n");
    for (l, c) in ALL_LABELS.iter().zip(counts) {
        text.push_str(&format!("{},{}\n", l.name(), c));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Submission-style predictions file: one label code per line, input order.
pub fn write_predictions(preds: &[Label], path: &Path) -> Result<()> {
    let mut text = String::new();
    for p in preds {
        text.push_str(&format!("{}\n", p.code()));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<Label>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            let code: u8 = line.trim().parse().map_err(|_| Error::MalformedLine {
                path: path.display().to_string(),
                line: idx + 1,
                reason: format!("bad label code `{line}`"),
            })?;
            Label::from_code(code)
        })
        .collect()
}

/// The published confusion matrix of the reference two-layer LSTM, evaluated
/// on the unbalanced hand-carried validation data. Bundled so the metric
/// stack can be regression-checked against known figures.
pub fn reference_confusion_matrix() -> ConfusionMatrix {
    ConfusionMatrix::from_counts([
        [1339, 12, 0, 171, 56, 33, 45, 81],
        [15, 1057, 16, 477, 19, 14, 3, 8],
        [0, 2, 262, 2, 0, 1, 0, 0],
        [61, 6, 1, 683, 205, 32, 1, 4],
        [93, 2, 1, 209, 1292, 289, 38, 62],
        [86, 16, 2, 176, 420, 1168, 62, 37],
        [100, 2, 0, 31, 65, 48, 628, 920],
        [105, 4, 0, 38, 153, 31, 167, 1326],
    ])
}
