//! The preprocessing pipeline: majority labeling, the summed-magnitude
//! activation feature, windowing, min-max normalization and class balancing.
//!
//! Raw positions are merged upstream (`ingest`); this module turns merged
//! [`SensorBlock`]s into a normalized [`Dataset`]. Every step is a pure
//! function of (input, seed), so two runs with equal seeds produce
//! bit-identical datasets.

use std::fs;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use rand::seq::index::sample as index_sample;

use crate::data::ChannelId;
use crate::data::{
    Dataset, Label, RngSeed, SensorBlock, Split, WindowSample, NUM_CLASSES, TRIAXIAL_SENSORS,
};
use crate::error::{Error, Result};
use crate::rng::{rng_from, stream, subseed};

/// Class-balancing strategy applied to the training split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Balance {
    None,
    /// Downsample every class to the minimum class count.
    Undersample,
    /// Duplicate one minority class `factor`× first, then undersample.
    /// Kept configurable but non-default: duplication did not help in
    /// practice.
    UndersamplePlusDuplicate {
        target: Label,
        factor: usize,
    },
}

impl Balance {
    pub fn parse(s: &str) -> Option<Balance> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "none" => return Some(Balance::None),
            "undersample" => return Some(Balance::Undersample),
            _ => {}
        }
        // undersample_dup:<class>:<factor>
        let mut parts = s.split(':');
        if parts.next()? != "undersample_dup" {
            return None;
        }
        let class = parts.next()?;
        let target = crate::data::ALL_LABELS
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(class))?;
        let factor: usize = parts.next()?.parse().ok()?;
        if factor == 0 || parts.next().is_some() {
            return None;
        }
        Some(Balance::UndersamplePlusDuplicate { target, factor })
    }
}

impl std::fmt::Display for Balance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Balance::None => write!(f, "none"),
            Balance::Undersample => write!(f, "undersample"),
            Balance::UndersamplePlusDuplicate { target, factor } => {
                write!(
                    f,
                    "undersample_dup:{}:{}",
                    target.name().to_lowercase(),
                    factor
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub timesteps: usize,
    pub feature_dim: usize,
    pub balance: Balance,
    pub seed: RngSeed,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            timesteps: 5,
            feature_dim: 100,
            balance: Balance::Undersample,
            seed: RngSeed::default(),
        }
    }
}

/// Majority vote over a block's per-sample label codes.
///
/// The most frequent nonzero code wins; ties break toward the lowest code.
/// Returns `None` (drop the block) when code 0 holds a strict majority or no
/// nonzero code exists.
pub fn majority_label(labels: &[u8]) -> Option<Label> {
    let mut counts = [0usize; 9];
    for &c in labels {
        counts[c as usize] += 1;
    }
    if 2 * counts[0] > labels.len() {
        return None;
    }
    let (winner, &count) = counts[1..]
        .iter()
        .enumerate()
        .max_by(|(ia, ca), (ib, cb)| ca.cmp(cb).then(ib.cmp(ia)))?;
    if count == 0 {
        return None;
    }
    Label::from_code(winner as u8 + 1).ok()
}

/// The single activation feature: per time index, the sum of the Euclidean
/// magnitudes of the four triaxial sensors plus the pressure reading.
pub fn activation_signal(block: &SensorBlock) -> Result<Vec<f64>> {
    let pressure = block.channel(ChannelId::Pressure)?;
    let mut out = pressure.to_vec();
    for (x, y, z) in TRIAXIAL_SENSORS {
        let (xs, ys, zs) = (block.channel(x)?, block.channel(y)?, block.channel(z)?);
        for (t, a) in out.iter_mut().enumerate() {
            *a += (xs[t] * xs[t] + ys[t] * ys[t] + zs[t] * zs[t]).sqrt();
        }
    }
    Ok(out)
}

/// Row-major reshape of a length `timesteps * feature_dim` signal into a
/// timesteps × feature_dim matrix.
pub fn window_reshape(signal: &[f64], timesteps: usize, feature_dim: usize) -> Result<Array2<f64>> {
    if signal.len() != timesteps * feature_dim {
        return Err(Error::LengthMismatch {
            got: signal.len(),
            expected: timesteps * feature_dim,
        });
    }
    Ok(
        Array2::from_shape_vec((timesteps, feature_dim), signal.to_vec())
            .expect("shape checked above"),
    )
}

/// Per-feature min-max statistics, fitted on training data only.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    /// Min/max per feature column over all samples and timesteps.
    pub fn fit(samples: &[WindowSample]) -> Result<Normalizer> {
        let first = samples.first().ok_or(Error::EmptyDataset)?;
        let dim = first.features.ncols();
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for s in samples {
            if s.features.ncols() != dim {
                return Err(Error::ShapeMismatch {
                    got: vec![s.features.nrows(), s.features.ncols()],
                    expected: vec![s.features.nrows(), dim],
                });
            }
            for row in s.features.rows() {
                for (j, &v) in row.iter().enumerate() {
                    min[j] = min[j].min(v);
                    max[j] = max[j].max(v);
                }
            }
        }
        Ok(Normalizer { min, max })
    }

    /// A normalizer whose `apply` is the identity; used when a pipeline run
    /// yields no samples to fit on.
    pub fn identity(feature_dim: usize) -> Normalizer {
        Normalizer {
            min: vec![-1.0; feature_dim],
            max: vec![1.0; feature_dim],
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.min.len()
    }

    /// Affine map of each column into [-1, 1] on the fitted range. Degenerate
    /// columns (min == max) map to 0. Values outside the fitted range
    /// extrapolate without clamping.
    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::ShapeMismatch {
                got: vec![x.nrows(), x.ncols()],
                expected: vec![x.nrows(), self.min.len()],
            });
        }
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range == 0.0 {
                    0.0
                } else {
                    2.0 * (*v - self.min[j]) / range - 1.0
                };
            }
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for line in [&self.min, &self.max] {
            let joined: Vec<String> = line.iter().map(|v| format!("{v}")).collect();
            text.push_str(&joined.join(" "));
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Normalizer> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (idx, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|_| Error::MalformedLine {
                path: path.display().to_string(),
                line: idx + 1,
                reason: "non-numeric statistic".into(),
            })?);
        }
        if rows.len() != 2 || rows[0].len() != rows[1].len() || rows[0].is_empty() {
            return Err(Error::BadFileFormat {
                path: path.display().to_string(),
                reason: "expected two equal-length statistic lines".into(),
            });
        }
        let (min, max) = (rows.swap_remove(0), rows.pop().unwrap());
        if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
            return Err(Error::BadFileFormat {
                path: path.display().to_string(),
                reason: "minimum exceeds maximum".into(),
            });
        }
        Ok(Normalizer { max, min })
    }
}

/// Downsamples every class to the minimum class count, uniformly without
/// replacement, preserving within-class original order.
pub fn balance_undersample(ds: &Dataset, seed: RngSeed) -> Result<Dataset> {
    let counts = ds.class_counts();
    if let Some(idx) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingClass(Label::from_index(idx)?.name()));
    }
    let target = *counts.iter().min().expect("eight classes");

    let mut rng = rng_from(subseed(seed.0, stream::UNDERSAMPLE));
    let mut keep = vec![false; ds.len()];
    for class in crate::data::ALL_LABELS {
        let members: Vec<usize> = ds
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == class)
            .map(|(i, _)| i)
            .collect();
        let mut chosen = index_sample(&mut rng, members.len(), target).into_vec();
        chosen.sort_unstable();
        for c in chosen {
            keep[members[c]] = true;
        }
    }
    let samples = ds
        .samples()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(ds.with_samples(samples))
}

/// Appends `factor − 1` extra copies of every sample of `target_class`.
/// This is the oversampling half of the duplicate-then-undersample strategy;
/// it performs no random selection itself.
pub fn balance_duplicate_minority(
    ds: &Dataset,
    target_class: Label,
    factor: usize,
) -> Result<Dataset> {
    assert!(factor >= 1, "duplication factor must be at least 1");
    let originals: Vec<WindowSample> = ds
        .samples()
        .iter()
        .filter(|s| s.label == target_class)
        .cloned()
        .collect();
    if originals.is_empty() {
        return Err(Error::MissingClass(target_class.name()));
    }
    let mut samples = ds.samples().to_vec();
    for _ in 1..factor {
        samples.extend(originals.iter().cloned());
    }
    Ok(ds.with_samples(samples))
}

/// Runs the full pipeline over merged blocks: majority labeling (dropping
/// blocks the vote rejects), activation feature, windowing, balancing (train
/// split only) and normalization.
///
/// Pass `normalizer: None` for the training split to fit statistics on it;
/// pass the fitted training normalizer for validation/test splits.
pub fn run_pipeline(
    blocks: &[SensorBlock],
    cfg: &PipelineConfig,
    split: Split,
    normalizer: Option<&Normalizer>,
) -> Result<(Dataset, Normalizer)> {
    let mut samples = Vec::new();
    for block in blocks {
        let label = match majority_label(block.labels()) {
            Some(l) => l,
            None => continue,
        };
        let signal = activation_signal(block)?;
        let features = window_reshape(&signal, cfg.timesteps, cfg.feature_dim)?;
        samples.push(WindowSample {
            features,
            label,
            source_position: Some(block.position()),
        });
    }
    let mut ds = Dataset::new(samples, split, cfg.timesteps, cfg.feature_dim)?;

    if split == Split::Train {
        match cfg.balance {
            Balance::None => {}
            Balance::Undersample => ds = balance_undersample(&ds, cfg.seed)?,
            Balance::UndersamplePlusDuplicate { target, factor } => {
                ds = balance_duplicate_minority(&ds, target, factor)?;
                ds = balance_undersample(&ds, cfg.seed)?;
            }
        }
    }

    let norm = match normalizer {
        Some(n) => n.clone(),
        None if ds.is_empty() => Normalizer::identity(cfg.feature_dim),
        None => Normalizer::fit(ds.samples())?,
    };
    let normalized: Result<Vec<WindowSample>> = ds
        .samples()
        .iter()
        .map(|s| {
            Ok(WindowSample {
                features: norm.apply(&s.features)?,
                label: s.label,
                source_position: s.source_position,
            })
        })
        .collect();
    Ok((ds.with_samples(normalized?), norm))
}

// --- processed-dataset file format ------------------------------------------
//
// magic "MNDS", then little-endian: version u32, n_samples u32, timesteps u32,
// feature_dim u32, then per sample a label code u8 followed by
// timesteps*feature_dim f64 values, row-major.

const DATASET_MAGIC: &[u8; 4] = b"MNDS";
const DATASET_VERSION: u32 = 1;

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + ds.len() * (1 + ds.timesteps * ds.feature_dim * 8));
    buf.extend_from_slice(DATASET_MAGIC);
    buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    buf.extend_from_slice(&(ds.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(ds.timesteps as u32).to_le_bytes());
    buf.extend_from_slice(&(ds.feature_dim as u32).to_le_bytes());
    for s in ds.samples() {
        buf.push(s.label.code());
        for &v in s.features.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a dataset file. The on-disk format records no split or source
/// positions; the caller names the split and positions come back `None`.
pub fn read_dataset(path: &Path, split: Split) -> Result<Dataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = std::io::BufReader::new(file);
    let bad = |reason: &str| Error::BadFileFormat {
        path: path.display().to_string(),
        reason: reason.into(),
    };

    let mut magic = [0u8; 4];
    reader
        .read_exact(&mut magic)
        .map_err(|e| Error::io(path, e))?;
    if &magic != DATASET_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut reader)?;
    if version != DATASET_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n_samples = read_u32(&mut reader)? as usize;
    let timesteps = read_u32(&mut reader)? as usize;
    let feature_dim = read_u32(&mut reader)? as usize;

    let mut samples = Vec::with_capacity(n_samples);
    let mut f64buf = [0u8; 8];
    for _ in 0..n_samples {
        let mut code = [0u8; 1];
        reader
            .read_exact(&mut code)
            .map_err(|e| Error::io(path, e))?;
        let label = Label::from_code(code[0])?;
        let mut values = Vec::with_capacity(timesteps * feature_dim);
        for _ in 0..timesteps * feature_dim {
            reader
                .read_exact(&mut f64buf)
                .map_err(|e| Error::io(path, e))?;
            values.push(f64::from_le_bytes(f64buf));
        }
        samples.push(WindowSample {
            features: Array2::from_shape_vec((timesteps, feature_dim), values)
                .map_err(|_| bad("truncated sample"))?,
            label,
            source_position: None,
        });
    }
    Dataset::new(samples, split, timesteps, feature_dim)
}

/// Per-class histogram of a processed dataset, indexed by `Label::index()`.
pub fn class_histogram(ds: &Dataset) -> [usize; NUM_CLASSES] {
    ds.class_counts()
}

#[cfg(test)]
pub(crate) fn block_with(
    position: crate::data::Position,
    fill: impl Fn(ChannelId, usize) -> f64,
    labels: Vec<u8>,
) -> SensorBlock {
    use std::collections::BTreeMap;
    let len = labels.len();
    let channels: BTreeMap<ChannelId, Vec<f64>> = crate::data::ALL_CHANNELS
        .iter()
        .map(|&id| (id, (0..len).map(|t| fill(id, t)).collect()))
        .collect();
    SensorBlock::new(position, channels, labels).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Position, ALL_LABELS};
    use proptest::prelude::*;
    use rand::Rng;

    fn repeat_labels(groups: &[(u8, usize)]) -> Vec<u8> {
        groups
            .iter()
            .flat_map(|&(code, n)| vec![code; n])
            .collect()
    }

    #[test]
    fn majority_prefers_most_frequent_nonzero() {
        let labels = repeat_labels(&[(5, 460), (1, 40)]);
        assert_eq!(majority_label(&labels), Some(Label::Car));
    }

    #[test]
    fn majority_unanimous() {
        assert_eq!(majority_label(&[3u8; 500]), Some(Label::Run));
    }

    #[test]
    fn majority_tie_breaks_toward_lower_code() {
        let labels = repeat_labels(&[(7, 250), (8, 250)]);
        assert_eq!(majority_label(&labels), Some(Label::Train));
    }

    #[test]
    fn majority_drops_on_strict_zero_majority() {
        let labels = repeat_labels(&[(0, 251), (4, 249)]);
        assert_eq!(majority_label(&labels), None);
        // zeros at exactly half are not a strict majority
        let labels = repeat_labels(&[(0, 250), (4, 250)]);
        assert_eq!(majority_label(&labels), Some(Label::Bike));
    }

    #[test]
    fn majority_drops_without_nonzero_codes() {
        assert_eq!(majority_label(&[0u8; 10]), None);
        assert_eq!(majority_label(&[]), None);
    }

    #[test]
    fn activation_adds_sensor_norms_and_pressure() {
        // 3-4-5 triangle on the accelerometer, everything else zero
        let block = block_with(
            Position::Hip,
            |id, _| match id {
                ChannelId::AccX => 3.0,
                ChannelId::AccY => 4.0,
                _ => 0.0,
            },
            vec![1; 4],
        );
        let signal = activation_signal(&block).unwrap();
        assert!(signal.iter().all(|&v| (v - 5.0).abs() < 1e-12));

        // pressure passes through untouched
        let block = block_with(
            Position::Hip,
            |id, _| {
                if id == ChannelId::Pressure {
                    1013.25
                } else {
                    0.0
                }
            },
            vec![1; 4],
        );
        let signal = activation_signal(&block).unwrap();
        assert!(signal.iter().all(|&v| (v - 1013.25).abs() < 1e-12));
    }

    #[test]
    fn activation_matches_scalar_oracle() {
        // acc=(1,0,0), gyr=(0,2,0), mag=(0,0,2), lacc=(2,2,1), p=0.5
        let block = block_with(
            Position::Hip,
            |id, _| match id {
                ChannelId::AccX => 1.0,
                ChannelId::GyrY => 2.0,
                ChannelId::MagZ => 2.0,
                ChannelId::LaccX | ChannelId::LaccY => 2.0,
                ChannelId::LaccZ => 1.0,
                ChannelId::Pressure => 0.5,
                _ => 0.0,
            },
            vec![1; 2],
        );
        // independent oracle: per-sensor hypot sums
        let expected = 1.0 + 2.0 + 2.0 + (4.0f64 + 4.0 + 1.0).sqrt() + 0.5;
        assert_eq!(expected, 8.5);
        let signal = activation_signal(&block).unwrap();
        assert!(signal.iter().all(|&v| (v - 8.5).abs() < 1e-12));
    }

    #[test]
    fn activation_requires_all_channels() {
        use std::collections::BTreeMap;
        let mut channels = BTreeMap::new();
        channels.insert(ChannelId::AccX, vec![0.0; 4]);
        let block = SensorBlock::new(Position::Hip, channels, vec![1; 4]).unwrap();
        assert!(matches!(
            activation_signal(&block),
            Err(Error::MissingChannel(_))
        ));
    }

    #[test]
    fn activation_is_rotation_invariant() {
        // rotating each sensor's (x,y,z) jointly must not change the signal
        let mut rng = rng_from(99);
        let base = block_with(
            Position::Torso,
            |_, t| (t as f64 * 0.37).sin() * 3.0 + 1.0,
            vec![2; 50],
        );
        let reference = activation_signal(&base).unwrap();

        for _ in 0..20 {
            // random rotation from a normalized axis-angle via Rodrigues
            let axis = {
                let v = [
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                ];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            };
            let angle = rng.gen::<f64>() * std::f64::consts::TAU;
            let rotate = |p: [f64; 3]| -> [f64; 3] {
                let (s, c) = angle.sin_cos();
                let dot = axis[0] * p[0] + axis[1] * p[1] + axis[2] * p[2];
                let cross = [
                    axis[1] * p[2] - axis[2] * p[1],
                    axis[2] * p[0] - axis[0] * p[2],
                    axis[0] * p[1] - axis[1] * p[0],
                ];
                [
                    p[0] * c + cross[0] * s + axis[0] * dot * (1.0 - c),
                    p[1] * c + cross[1] * s + axis[1] * dot * (1.0 - c),
                    p[2] * c + cross[2] * s + axis[2] * dot * (1.0 - c),
                ]
            };

            let rotated = block_with(
                Position::Torso,
                |id, t| {
                    let triple = TRIAXIAL_SENSORS
                        .iter()
                        .find(|(x, y, z)| id == *x || id == *y || id == *z);
                    match triple {
                        None => base.channel(id).unwrap()[t],
                        Some(&(x, y, z)) => {
                            let p = rotate([
                                base.channel(x).unwrap()[t],
                                base.channel(y).unwrap()[t],
                                base.channel(z).unwrap()[t],
                            ]);
                            if id == x {
                                p[0]
                            } else if id == y {
                                p[1]
                            } else {
                                p[2]
                            }
                        }
                    }
                },
                vec![2; 50],
            );
            let signal = activation_signal(&rotated).unwrap();
            for (a, b) in signal.iter().zip(&reference) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "rotation changed activation: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn reshape_is_row_major() {
        let signal: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let m = window_reshape(&signal, 5, 100).unwrap();
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 99)], 99.0);
        assert_eq!(m[(4, 0)], 400.0);
        assert_eq!(m[(4, 99)], 499.0);
    }

    #[test]
    fn reshape_rejects_wrong_length() {
        let signal = vec![0.0; 499];
        assert!(matches!(
            window_reshape(&signal, 5, 100),
            Err(Error::LengthMismatch {
                got: 499,
                expected: 500
            })
        ));
    }

    fn sample(features: Array2<f64>, label: Label) -> WindowSample {
        WindowSample {
            features,
            label,
            source_position: None,
        }
    }

    #[test]
    fn normalizer_maps_endpoints_and_extrapolates() {
        let train = vec![sample(
            Array2::from_shape_vec((2, 1), vec![0.0, 10.0]).unwrap(),
            Label::Still,
        )];
        let n = Normalizer::fit(&train).unwrap();
        let apply1 = |v: f64| n.apply(&Array2::from_elem((1, 1), v)).unwrap()[(0, 0)];
        assert_eq!(apply1(10.0), 1.0);
        assert_eq!(apply1(0.0), -1.0);
        assert_eq!(apply1(5.0), 0.0);
        // outliers extrapolate, no clamping
        assert!((apply1(12.0) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn normalizer_degenerate_column_maps_to_zero() {
        let train = vec![
            sample(Array2::from_elem((2, 1), 7.0), Label::Still),
            sample(Array2::from_elem((2, 1), 7.0), Label::Run),
        ];
        let n = Normalizer::fit(&train).unwrap();
        assert_eq!(
            n.apply(&Array2::from_elem((2, 1), 7.0)).unwrap()[(0, 0)],
            0.0
        );
    }

    #[test]
    fn normalizer_rejects_empty_and_mismatched() {
        assert!(matches!(Normalizer::fit(&[]), Err(Error::EmptyDataset)));
        let n = Normalizer::identity(3);
        assert!(matches!(
            n.apply(&Array2::zeros((1, 2))),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn normalizer_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let n = Normalizer {
            min: vec![-1.5, 0.0, 3.25e-7],
            max: vec![2.5, 0.0, 1013.25],
        };
        let path = dir.path().join("normalizer.txt");
        n.write(&path).unwrap();
        assert_eq!(Normalizer::read(&path).unwrap(), n);

        std::fs::write(&path, "5.0 0.0\n1.0 1.0\n").unwrap();
        assert!(matches!(
            Normalizer::read(&path),
            Err(Error::BadFileFormat { .. })
        ));
    }

    fn dataset_with_counts(counts: &[(Label, usize)]) -> Dataset {
        let mut samples = Vec::new();
        let mut serial = 0.0;
        for &(label, n) in counts {
            for _ in 0..n {
                serial += 1.0;
                samples.push(sample(Array2::from_elem((1, 2), serial), label));
            }
        }
        Dataset::new(samples, Split::Train, 1, 2).unwrap()
    }

    fn all_counts(pairs: &[(Label, usize)], rest: usize) -> Vec<(Label, usize)> {
        ALL_LABELS
            .iter()
            .map(|&l| {
                pairs
                    .iter()
                    .find(|(p, _)| *p == l)
                    .copied()
                    .unwrap_or((l, rest))
            })
            .collect()
    }

    #[test]
    fn undersample_equalizes_to_minimum() {
        let ds = dataset_with_counts(&all_counts(&[(Label::Still, 10), (Label::Run, 2)], 5));
        let balanced = balance_undersample(&ds, RngSeed(7)).unwrap();
        assert!(balanced.class_counts().iter().all(|&c| c == 2));
        // within-class original order is preserved
        let stills: Vec<f64> = balanced
            .samples()
            .iter()
            .filter(|s| s.label == Label::Still)
            .map(|s| s.features[(0, 0)])
            .collect();
        let mut sorted = stills.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(stills, sorted);
    }

    #[test]
    fn undersample_identity_on_balanced_input() {
        let ds = dataset_with_counts(&all_counts(&[], 3));
        let balanced = balance_undersample(&ds, RngSeed(7)).unwrap();
        assert_eq!(balanced.samples(), ds.samples());
    }

    #[test]
    fn undersample_requires_every_class() {
        let mut counts = all_counts(&[], 3);
        counts.retain(|(l, _)| *l != Label::Run);
        let ds = dataset_with_counts(&counts);
        assert!(matches!(
            balance_undersample(&ds, RngSeed(7)),
            Err(Error::MissingClass("Run"))
        ));
    }

    #[test]
    fn undersample_is_seed_deterministic() {
        let ds = dataset_with_counts(&all_counts(&[(Label::Run, 2)], 6));
        let a = balance_undersample(&ds, RngSeed(5)).unwrap();
        let b = balance_undersample(&ds, RngSeed(5)).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn duplicate_multiplies_target_class() {
        let ds = dataset_with_counts(&all_counts(&[(Label::Run, 2)], 5));
        let boosted = balance_duplicate_minority(&ds, Label::Run, 3).unwrap();
        assert_eq!(boosted.class_counts()[Label::Run.index()], 6);
        assert_eq!(boosted.class_counts()[Label::Still.index()], 5);

        let same = balance_duplicate_minority(&ds, Label::Run, 1).unwrap();
        assert_eq!(same.samples(), ds.samples());
    }

    #[test]
    fn duplicate_requires_target_class() {
        let mut counts = all_counts(&[], 3);
        counts.retain(|(l, _)| *l != Label::Run);
        let ds = dataset_with_counts(&counts);
        assert!(matches!(
            balance_duplicate_minority(&ds, Label::Run, 2),
            Err(Error::MissingClass("Run"))
        ));
    }

    fn class_block(label: u8, level: f64, len: usize) -> SensorBlock {
        block_with(
            Position::Bag,
            move |id, t| match id {
                ChannelId::Pressure => 1000.0 + level + (t as f64 * 0.1).sin(),
                _ => 0.0,
            },
            vec![label; len],
        )
    }

    #[test]
    fn pipeline_balances_and_normalizes_train() {
        let cfg = PipelineConfig {
            timesteps: 2,
            feature_dim: 5,
            balance: Balance::Undersample,
            seed: RngSeed(11),
        };
        let mut blocks = Vec::new();
        for (i, label) in (1..=8u8).enumerate() {
            for copy in 0..(2 + i % 3) {
                blocks.push(class_block(label, i as f64 + copy as f64 * 0.1, 10));
            }
        }
        let (ds, norm) = run_pipeline(&blocks, &cfg, Split::Train, None).unwrap();
        assert!(ds.class_counts().iter().all(|&c| c == 2));
        assert_eq!(norm.feature_dim(), 5);
        for s in ds.samples() {
            for &v in s.features.iter() {
                assert!((-1.0..=1.0).contains(&v), "train value {v} out of range");
            }
        }
    }

    #[test]
    fn pipeline_uses_provided_normalizer() {
        let cfg = PipelineConfig {
            timesteps: 2,
            feature_dim: 5,
            balance: Balance::Undersample,
            seed: RngSeed(11),
        };
        let blocks = vec![class_block(1, 0.0, 10)];
        let provided = Normalizer {
            min: vec![0.0; 5],
            max: vec![2000.0; 5],
        };
        let (ds, norm) = run_pipeline(&blocks, &cfg, Split::Validation, Some(&provided)).unwrap();
        assert_eq!(norm, provided);
        // values computed with the provided statistics, not refit to [-1,1]
        let v = ds.samples()[0].features[(0, 0)];
        assert!((v - (2.0 * (1000.0 + (0.0f64).sin()) / 2000.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn pipeline_drops_unlabeled_blocks() {
        let cfg = PipelineConfig {
            timesteps: 2,
            feature_dim: 5,
            balance: Balance::None,
            seed: RngSeed(1),
        };
        let block = block_with(Position::Hand, |_, _| 1.0, vec![0; 10]);
        let (ds, _) = run_pipeline(&[block], &cfg, Split::Validation, None).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn pipeline_is_deterministic() {
        let cfg = PipelineConfig {
            timesteps: 2,
            feature_dim: 5,
            balance: Balance::Undersample,
            seed: RngSeed(3),
        };
        let blocks: Vec<SensorBlock> = (1..=8u8)
            .flat_map(|l| (0..4).map(move |c| class_block(l, l as f64 * 2.0 + c as f64, 10)))
            .collect();
        let (a, na) = run_pipeline(&blocks, &cfg, Split::Train, None).unwrap();
        let (b, nb) = run_pipeline(&blocks, &cfg, Split::Train, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(na, nb);
    }

    #[test]
    fn dataset_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = dataset_with_counts(&all_counts(&[], 2));
        let path = dir.path().join("train.mnds");
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path, Split::Train).unwrap();
        assert_eq!(back.len(), ds.len());
        assert_eq!(back.timesteps, ds.timesteps);
        assert_eq!(back.feature_dim, ds.feature_dim);
        for (a, b) in back.samples().iter().zip(ds.samples()) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.features, b.features);
            assert_eq!(a.source_position, None);
        }
    }

    #[test]
    fn balance_mode_parsing() {
        assert_eq!(Balance::parse("none"), Some(Balance::None));
        assert_eq!(Balance::parse("undersample"), Some(Balance::Undersample));
        assert_eq!(
            Balance::parse("undersample_dup:run:3"),
            Some(Balance::UndersamplePlusDuplicate {
                target: Label::Run,
                factor: 3
            })
        );
        assert_eq!(Balance::parse("smote"), None);
        assert_eq!(Balance::parse("undersample_dup:run:0"), None);
    }

    proptest! {
        // reshape then flatten is the identity on length-500 signals
        #[test]
        fn reshape_flatten_round_trip(signal in proptest::collection::vec(-1e3f64..1e3, 500)) {
            let m = window_reshape(&signal, 5, 100).unwrap();
            let flat: Vec<f64> = m.iter().copied().collect();
            prop_assert_eq!(flat, signal);
        }

        // fitted normalizer maps its own training data into [-1, 1]
        #[test]
        fn fit_apply_stays_in_range(
            values in proptest::collection::vec(proptest::collection::vec(-1e4f64..1e4, 6), 1..6)
        ) {
            let samples: Vec<WindowSample> = values
                .iter()
                .map(|row| sample(
                    Array2::from_shape_vec((2, 3), row.clone()).unwrap(),
                    Label::Walking,
                ))
                .collect();
            let n = Normalizer::fit(&samples).unwrap();
            for s in &samples {
                let out = n.apply(&s.features).unwrap();
                for &v in out.iter() {
                    prop_assert!((-1.0..=1.0).contains(&v));
                }
            }
        }
    }
}
