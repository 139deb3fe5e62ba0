//! Format-compatible synthetic sensor data, so the full pipeline and training
//! loop are exercisable at desk scale without the real recordings.
//!
//! Signatures are deliberate caricatures, separable by construction: every
//! class sits on its own ambient magnetometer level (10 µT apart), motion
//! classes differ in oscillation amplitude and frequency, and the rail classes
//! differ by pressure drift sign. They verify code paths and learnability,
//! not transit physics.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{ChannelId, Label, Position, SensorBlock, ALL_CHANNELS};
use crate::error::{Error, Result};
use crate::ingest::{format_channel_blocks, format_label_blocks, DEFAULT_BLOCK_LEN};
use crate::rng::{rng_from, stream, subseed2};

const SAMPLE_RATE_HZ: f64 = 100.0;
const BASE_PRESSURE_HPA: f64 = 1013.25;
/// Per-axis amplitude fractions; unequal on purpose so the vector magnitude
/// oscillates instead of staying constant.
const AXIS_SCALE: [f64; 3] = [1.0, 0.6, 0.3];

/// Per-class generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSignature {
    pub label: Label,
    /// Accelerometer sinusoid amplitude, m/s².
    pub accel_amp: f64,
    /// Dominant frequency, Hz.
    pub freq_hz: f64,
    /// Gaussian noise floor per axis.
    pub noise: f64,
    /// Pressure drift, hPa/s; separates the rail classes by sign.
    pub pressure_drift: f64,
    /// Gyroscope amplitude, rad/s.
    pub gyro_amp: f64,
    /// Ambient magnetometer magnitude, µT; 10 apart per class.
    pub mag_base: f64,
}

/// The default signature set; pairwise distinct in `mag_base` by 10 and in
/// (amplitude, frequency, drift) besides.
pub fn default_signatures() -> [ClassSignature; 8] {
    let sig =
        |label, accel_amp, freq_hz, noise, pressure_drift, gyro_amp, mag_base| ClassSignature {
            label,
            accel_amp,
            freq_hz,
            noise,
            pressure_drift,
            gyro_amp,
            mag_base,
        };
    [
        sig(Label::Still, 0.05, 0.4, 0.02, 0.0, 0.01, 20.0),
        sig(Label::Walking, 10.0, 1.8, 0.10, 0.0, 0.60, 30.0),
        sig(Label::Run, 25.0, 3.0, 0.20, 0.0, 1.50, 40.0),
        sig(Label::Bike, 16.0, 2.2, 0.10, 0.0, 0.90, 50.0),
        sig(Label::Car, 5.0, 0.3, 0.08, 0.0, 0.10, 60.0),
        sig(Label::Bus, 8.0, 0.6, 0.08, 0.0, 0.15, 70.0),
        sig(Label::Train, 2.5, 0.15, 0.05, 0.8, 0.05, 80.0),
        sig(Label::Subway, 2.5, 0.15, 0.05, -0.8, 0.05, 90.0),
    ]
}

fn channel_samples(
    id: ChannelId,
    sig: &ClassSignature,
    block_len: usize,
    phases: &[f64; 3],
    rng: &mut impl Rng,
) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let omega = std::f64::consts::TAU * sig.freq_hz;
    let sine = |amp: f64, axis: usize, t: usize| {
        let secs = t as f64 / SAMPLE_RATE_HZ;
        amp * AXIS_SCALE[axis] * (omega * secs + phases[axis]).sin()
    };
    (0..block_len)
        .map(|t| {
            let n = normal.sample(rng);
            match id {
                ChannelId::AccX => sine(sig.accel_amp, 0, t) + sig.noise * n,
                ChannelId::AccY => sine(sig.accel_amp, 1, t) + sig.noise * n,
                ChannelId::AccZ => sine(sig.accel_amp, 2, t) + sig.noise * n,
                ChannelId::GyrX => sine(sig.gyro_amp, 0, t) + 0.5 * sig.noise * n,
                ChannelId::GyrY => sine(sig.gyro_amp, 1, t) + 0.5 * sig.noise * n,
                ChannelId::GyrZ => sine(sig.gyro_amp, 2, t) + 0.5 * sig.noise * n,
                ChannelId::MagX | ChannelId::MagY | ChannelId::MagZ => {
                    sig.mag_base / 3f64.sqrt() + sig.noise * n
                }
                ChannelId::LaccX => sine(0.5 * sig.accel_amp, 0, t) + sig.noise * n,
                ChannelId::LaccY => sine(0.5 * sig.accel_amp, 1, t) + sig.noise * n,
                ChannelId::LaccZ => sine(0.5 * sig.accel_amp, 2, t) + sig.noise * n,
                ChannelId::Pressure => {
                    let secs = t as f64 / SAMPLE_RATE_HZ;
                    BASE_PRESSURE_HPA + sig.pressure_drift * secs + 0.01 * n
                }
            }
        })
        .collect()
}

fn generate_block(
    sig: &ClassSignature,
    position: Position,
    block_len: usize,
    block_seed: u64,
) -> SensorBlock {
    let mut rng = rng_from(block_seed);
    let phases = [
        rng.gen::<f64>() * std::f64::consts::TAU,
        rng.gen::<f64>() * std::f64::consts::TAU,
        rng.gen::<f64>() * std::f64::consts::TAU,
    ];
    let channels = ALL_CHANNELS
        .iter()
        .map(|&id| (id, channel_samples(id, sig, block_len, &phases, &mut rng)))
        .collect();
    SensorBlock::new(position, channels, vec![sig.label.code(); block_len])
        .expect("generated block is well formed")
}

/// Generates `blocks_per_class` blocks per class, class-major, constant labels
/// per block. Each block draws from its own sub-seed, so generation is
/// order-independent and deterministic per (seed, block ordinal).
pub fn generate_blocks(
    signatures: &[ClassSignature; 8],
    blocks_per_class: usize,
    position: Position,
    seed: u64,
) -> Vec<SensorBlock> {
    assert!(blocks_per_class >= 1, "blocks_per_class must be at least 1");
    let mut blocks = Vec::with_capacity(8 * blocks_per_class);
    for (class_idx, sig) in signatures.iter().enumerate() {
        for i in 0..blocks_per_class {
            let ordinal = (class_idx * blocks_per_class + i) as u64;
            let block_seed = subseed2(seed, stream::SYNTH, ordinal);
            blocks.push(generate_block(sig, position, DEFAULT_BLOCK_LEN, block_seed));
        }
    }
    blocks
}

/// One block whose labels switch from `class_a` to `class_b` at
/// `split_point`; signal follows the labels. Exercises the majority vote.
pub fn generate_mixed_label_block(
    class_a: Label,
    class_b: Label,
    split_point: usize,
    seed: u64,
) -> Result<SensorBlock> {
    let block_len = DEFAULT_BLOCK_LEN;
    if split_point == 0 || split_point >= block_len {
        return Err(Error::InvalidSplit(split_point, block_len));
    }
    let signatures = default_signatures();
    let sig_a = signatures[class_a.index()];
    let sig_b = signatures[class_b.index()];
    let a = generate_block(
        &sig_a,
        Position::Hand,
        block_len,
        subseed2(seed, stream::SYNTH, 0),
    );
    let b = generate_block(
        &sig_b,
        Position::Hand,
        block_len,
        subseed2(seed, stream::SYNTH, 1),
    );

    let channels = ALL_CHANNELS
        .iter()
        .map(|&id| {
            let mut samples = a.channel(id).expect("generated channel")[..split_point].to_vec();
            samples.extend_from_slice(&b.channel(id).expect("generated channel")[split_point..]);
            (id, samples)
        })
        .collect();
    let mut labels = vec![class_a.code(); split_point];
    labels.resize(block_len, class_b.code());
    SensorBlock::new(Position::Hand, channels, labels)
}

/// Writes one position's corpus: a file per channel, a label file and a
/// manifest tying them together. Returns the manifest path.
pub fn write_position_corpus(
    dir: &Path,
    signatures: &[ClassSignature; 8],
    blocks_per_class: usize,
    position: Position,
    seed: u64,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let blocks = generate_blocks(signatures, blocks_per_class, position, seed);

    let mut manifest = format!(
        "position = {}\nblock_len = {}\nlabels = labels.txt\n",
        position, DEFAULT_BLOCK_LEN
    );
    for id in ALL_CHANNELS {
        let table: Vec<Vec<f64>> = blocks
            .iter()
            .map(|b| b.channel(id).expect("generated channel").to_vec())
            .collect();
        let file = format!("{}.txt", id.key());
        let path = dir.join(&file);
        fs::write(&path, format_channel_blocks(&table)).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!("{} = {}\n", id.key(), file));
    }
    let label_table: Vec<Vec<u8>> = blocks.iter().map(|b| b.labels().to_vec()).collect();
    let labels_path = dir.join("labels.txt");
    fs::write(&labels_path, format_label_blocks(&label_table))
        .map_err(|e| Error::io(&labels_path, e))?;

    let manifest_path = dir.join("manifest.txt");
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ALL_LABELS;
    use crate::pipeline::majority_label;

    #[test]
    fn two_blocks_per_class_gives_uniform_sixteen() {
        let blocks = generate_blocks(&default_signatures(), 2, Position::Hip, 7);
        assert_eq!(blocks.len(), 16);
        let mut counts = [0usize; 8];
        for b in blocks {
            let label = majority_label(b.labels()).unwrap();
            counts[label.index()] += 1;
        }
        assert_eq!(counts, [2; 8]);
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = generate_blocks(&default_signatures(), 1, Position::Bag, 5);
        let b = generate_blocks(&default_signatures(), 1, Position::Bag, 5);
        assert_eq!(a, b);
        let c = generate_blocks(&default_signatures(), 1, Position::Bag, 6);
        assert_ne!(a, c);
    }

    #[test]
    fn corpus_files_are_byte_identical_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let d1 = dir.path().join("a");
        let d2 = dir.path().join("b");
        let sigs = default_signatures();
        write_position_corpus(&d1, &sigs, 2, Position::Hand, 31).unwrap();
        write_position_corpus(&d2, &sigs, 2, Position::Hand, 31).unwrap();
        for id in ALL_CHANNELS {
            let f = format!("{}.txt", id.key());
            assert_eq!(
                fs::read(d1.join(&f)).unwrap(),
                fs::read(d2.join(&f)).unwrap(),
                "{f} differs between equal-seed runs"
            );
        }
        assert_eq!(
            fs::read(d1.join("labels.txt")).unwrap(),
            fs::read(d2.join("labels.txt")).unwrap()
        );
    }

    #[test]
    fn corpus_passes_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let sigs = default_signatures();
        let manifest_path =
            write_position_corpus(dir.path(), &sigs, 2, Position::Torso, 13).unwrap();
        let manifest = crate::ingest::Manifest::read(&manifest_path).unwrap();
        let data = crate::ingest::load_position(&manifest).unwrap();
        assert_eq!(data.blocks.len(), 16);
        assert_eq!(data.position, Position::Torso);
        for b in &data.blocks {
            assert_eq!(b.block_len(), DEFAULT_BLOCK_LEN);
        }
    }

    #[test]
    fn run_blocks_shake_harder_than_still_blocks() {
        let sigs = default_signatures();
        let run = generate_blocks(&sigs, 3, Position::Hand, 17);
        let acc_var = |b: &SensorBlock| {
            let (xs, ys, zs) = (
                b.channel(ChannelId::AccX).unwrap(),
                b.channel(ChannelId::AccY).unwrap(),
                b.channel(ChannelId::AccZ).unwrap(),
            );
            let mags: Vec<f64> = (0..b.block_len())
                .map(|t| (xs[t] * xs[t] + ys[t] * ys[t] + zs[t] * zs[t]).sqrt())
                .collect();
            let mean = mags.iter().sum::<f64>() / mags.len() as f64;
            mags.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / mags.len() as f64
        };
        let still_idx = Label::Still.index() * 3;
        let run_idx = Label::Run.index() * 3;
        for i in 0..3 {
            let v_still = acc_var(&run[still_idx + i]);
            let v_run = acc_var(&run[run_idx + i]);
            assert!(
                v_run > 10.0 * v_still,
                "run variance {v_run} not well above still variance {v_still}"
            );
        }
    }

    #[test]
    fn mixed_block_exercises_majority_vote() {
        let block = generate_mixed_label_block(Label::Car, Label::Still, 460, 3).unwrap();
        assert_eq!(majority_label(block.labels()), Some(Label::Car));

        let tie = generate_mixed_label_block(Label::Subway, Label::Train, 250, 3).unwrap();
        // 250/250 tie resolves toward the lower code (Train = 7)
        assert_eq!(majority_label(tie.labels()), Some(Label::Train));

        assert!(matches!(
            generate_mixed_label_block(Label::Car, Label::Still, 0, 3),
            Err(Error::InvalidSplit(0, _))
        ));
        assert!(matches!(
            generate_mixed_label_block(Label::Car, Label::Still, 500, 3),
            Err(Error::InvalidSplit(500, _))
        ));
    }

    #[test]
    fn all_classes_have_distinct_mag_levels() {
        let sigs = default_signatures();
        for i in 0..8 {
            for j in (i + 1)..8 {
                assert!(
                    (sigs[i].mag_base - sigs[j].mag_base).abs() >= 10.0,
                    "magnetometer margin violated for {} vs {}",
                    sigs[i].label,
                    sigs[j].label
                );
            }
        }
        for (i, sig) in sigs.iter().enumerate() {
            assert_eq!(sig.label, ALL_LABELS[i]);
        }
    }
}
