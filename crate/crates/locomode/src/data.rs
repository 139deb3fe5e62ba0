//! Shared domain types: labels, sensor channels, blocks, window samples and
//! datasets.
//!
//! All types are immutable value objects once constructed and can be shared
//! freely across threads.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// The eight transportation modes, with their fixed on-disk codes 1..=8.
///
/// Code 0 marks unlabeled raw samples; it is representable only in raw
/// ingestion data and never in a [`WindowSample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Still = 1,
    Walking = 2,
    Run = 3,
    Bike = 4,
    Car = 5,
    Bus = 6,
    Train = 7,
    Subway = 8,
}

pub const NUM_CLASSES: usize = 8;

pub const ALL_LABELS: [Label; NUM_CLASSES] = [
    Label::Still,
    Label::Walking,
    Label::Run,
    Label::Bike,
    Label::Car,
    Label::Bus,
    Label::Train,
    Label::Subway,
];

impl Label {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Zero-based class index (code − 1), used for one-hot vectors and
    /// confusion-matrix rows/columns.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_code(code: u8) -> Result<Label> {
        match code {
            1 => Ok(Label::Still),
            2 => Ok(Label::Walking),
            3 => Ok(Label::Run),
            4 => Ok(Label::Bike),
            5 => Ok(Label::Car),
            6 => Ok(Label::Bus),
            7 => Ok(Label::Train),
            8 => Ok(Label::Subway),
            other => Err(Error::OutOfRange(other)),
        }
    }

    pub fn from_index(index: usize) -> Result<Label> {
        Label::from_code(index as u8 + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Still => "Still",
            Label::Walking => "Walking",
            Label::Run => "Run",
            Label::Bike => "Bike",
            Label::Car => "Car",
            Label::Bus => "Bus",
            Label::Train => "Train",
            Label::Subway => "Subway",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the recording phone was carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Hip,
    Bag,
    Torso,
    Hand,
}

impl Position {
    pub fn name(self) -> &'static str {
        match self {
            Position::Hip => "hip",
            Position::Bag => "bag",
            Position::Torso => "torso",
            Position::Hand => "hand",
        }
    }

    pub fn parse(s: &str) -> Option<Position> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hip" => Some(Position::Hip),
            "bag" => Some(Position::Bag),
            "torso" => Some(Position::Torso),
            "hand" => Some(Position::Hand),
            _ => None,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// The thirteen raw channels a block carries: four triaxial sensors plus
/// barometric pressure. Gravity and orientation are dropped at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelId {
    AccX,
    AccY,
    AccZ,
    GyrX,
    GyrY,
    GyrZ,
    MagX,
    MagY,
    MagZ,
    LaccX,
    LaccY,
    LaccZ,
    Pressure,
}

pub const ALL_CHANNELS: [ChannelId; 13] = [
    ChannelId::AccX,
    ChannelId::AccY,
    ChannelId::AccZ,
    ChannelId::GyrX,
    ChannelId::GyrY,
    ChannelId::GyrZ,
    ChannelId::MagX,
    ChannelId::MagY,
    ChannelId::MagZ,
    ChannelId::LaccX,
    ChannelId::LaccY,
    ChannelId::LaccZ,
    ChannelId::Pressure,
];

/// The four triaxial sensors, each as (x, y, z) channel triples.
pub const TRIAXIAL_SENSORS: [(ChannelId, ChannelId, ChannelId); 4] = [
    (ChannelId::AccX, ChannelId::AccY, ChannelId::AccZ),
    (ChannelId::GyrX, ChannelId::GyrY, ChannelId::GyrZ),
    (ChannelId::MagX, ChannelId::MagY, ChannelId::MagZ),
    (ChannelId::LaccX, ChannelId::LaccY, ChannelId::LaccZ),
];

impl ChannelId {
    /// Manifest key for this channel.
    pub fn key(self) -> &'static str {
        match self {
            ChannelId::AccX => "acc_x",
            ChannelId::AccY => "acc_y",
            ChannelId::AccZ => "acc_z",
            ChannelId::GyrX => "gyr_x",
            ChannelId::GyrY => "gyr_y",
            ChannelId::GyrZ => "gyr_z",
            ChannelId::MagX => "mag_x",
            ChannelId::MagY => "mag_y",
            ChannelId::MagZ => "mag_z",
            ChannelId::LaccX => "lacc_x",
            ChannelId::LaccY => "lacc_y",
            ChannelId::LaccZ => "lacc_z",
            ChannelId::Pressure => "pressure",
        }
    }

    pub fn from_key(key: &str) -> Option<ChannelId> {
        ALL_CHANNELS.iter().copied().find(|c| c.key() == key)
    }
}

/// One 5-second block: per-channel sequences of `block_len` raw readings plus
/// `block_len` per-sample label codes (0 = unlabeled).
#[derive(Debug, Clone, PartialEq)]
pub struct SensorBlock {
    position: Position,
    channels: BTreeMap<ChannelId, Vec<f64>>,
    labels: Vec<u8>,
}

impl SensorBlock {
    /// Builds a block after checking that every channel and the label sequence
    /// share one length, that all readings are finite and that label codes lie
    /// in 0..=8.
    pub fn new(
        position: Position,
        channels: BTreeMap<ChannelId, Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<SensorBlock> {
        let block_len = labels.len();
        if block_len == 0 {
            return Err(Error::EmptyInput("sensor block has no samples".into()));
        }
        for (id, seq) in &channels {
            if seq.len() != block_len {
                return Err(Error::LengthMismatch {
                    got: seq.len(),
                    expected: block_len,
                });
            }
            if seq.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedLine {
                    path: String::new(),
                    line: 0,
                    reason: format!("non-finite reading in channel {}", id.key()),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&c| c > 8) {
            return Err(Error::OutOfRange(bad));
        }
        Ok(SensorBlock {
            position,
            channels,
            labels,
        })
    }

    pub fn position(&self) -> Position {
        self.position
    }

    pub fn block_len(&self) -> usize {
        self.labels.len()
    }

    pub fn channel(&self, id: ChannelId) -> Result<&[f64]> {
        self.channels
            .get(&id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingChannel(id.key().into()))
    }

    pub fn channel_ids(&self) -> impl Iterator<Item = ChannelId> + '_ {
        self.channels.keys().copied()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// One training sample: a timesteps × feature_dim matrix with one class label.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub features: Array2<f64>,
    pub label: Label,
    /// Carried through from ingestion; `None` for samples loaded back from a
    /// dataset file (the on-disk format does not record positions).
    pub source_position: Option<Position>,
}

/// A processed split: samples sharing one (timesteps, feature_dim) shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<WindowSample>,
    pub split: Split,
    pub timesteps: usize,
    pub feature_dim: usize,
}

impl Dataset {
    pub fn new(
        samples: Vec<WindowSample>,
        split: Split,
        timesteps: usize,
        feature_dim: usize,
    ) -> Result<Dataset> {
        for s in &samples {
            let got = s.features.dim();
            if got != (timesteps, feature_dim) {
                return Err(Error::ShapeMismatch {
                    got: vec![got.0, got.1],
                    expected: vec![timesteps, feature_dim],
                });
            }
        }
        Ok(Dataset {
            samples,
            split,
            timesteps,
            feature_dim,
        })
    }

    pub fn samples(&self) -> &[WindowSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Per-class sample counts, indexed by `Label::index()`.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    pub(crate) fn with_samples(&self, samples: Vec<WindowSample>) -> Dataset {
        Dataset {
            samples,
            split: self.split,
            timesteps: self.timesteps,
            feature_dim: self.feature_dim,
        }
    }
}

/// Seed for every stochastic operation; equal seeds give bit-identical runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

impl Default for RngSeed {
    fn default() -> Self {
        RngSeed(42)
    }
}
