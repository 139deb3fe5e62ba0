//! Parsing of challenge-style channel and label files into [`SensorBlock`]s.
//!
//! Each position (hip, bag, torso, hand) is described by a manifest: a
//! key-value text file mapping channel ids to relative file paths. Channel
//! files hold one block per line as whitespace-separated decimals; label files
//! hold integer codes in the same layout. Keys for gravity and orientation
//! channels are accepted and skipped.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::{ChannelId, Position, SensorBlock, ALL_CHANNELS};
use crate::error::{Error, Result};

pub const DEFAULT_BLOCK_LEN: usize = 500;

/// Manifest keys that name channels we deliberately do not ingest.
const IGNORED_KEYS: [&str; 7] = [
    "grav_x", "grav_y", "grav_z", "ori_w", "ori_x", "ori_y", "ori_z",
];

/// All blocks parsed from one phone position.
#[derive(Debug, Clone)]
pub struct RawPositionData {
    pub position: Position,
    pub blocks: Vec<SensorBlock>,
}

/// Parsed manifest: where each channel file lives, relative to `dir`.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub position: Position,
    pub block_len: usize,
    pub channel_paths: BTreeMap<ChannelId, PathBuf>,
    pub label_path: PathBuf,
    pub dir: PathBuf,
}

/// Splits key-value text (`key = value` lines, `#` comments) into
/// (key, value, line-number) triples.
pub(crate) fn parse_key_values(text: &str, source: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedLine {
            path: source.into(),
            line: idx + 1,
            reason: "expected `key = value`".into(),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string(), idx + 1));
    }
    Ok(out)
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let source = path.display().to_string();
        let dir = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .to_path_buf();

        let mut position = None;
        let mut block_len = DEFAULT_BLOCK_LEN;
        let mut channel_paths = BTreeMap::new();
        let mut label_path = None;

        for (key, value, line) in parse_key_values(&text, &source)? {
            match key.as_str() {
                "position" => {
                    position =
                        Some(
                            Position::parse(&value).ok_or_else(|| Error::BadConfigValue {
                                key,
                                value: value.clone(),
                            })?,
                        );
                }
                "block_len" => {
                    block_len = value.parse().map_err(|_| Error::BadConfigValue {
                        key,
                        value: value.clone(),
                    })?;
                    if block_len == 0 {
                        return Err(Error::BadConfigValue {
                            key: "block_len".into(),
                            value,
                        });
                    }
                }
                "labels" => label_path = Some(PathBuf::from(value)),
                k if IGNORED_KEYS.contains(&k) => {}
                k => match ChannelId::from_key(k) {
                    Some(id) => {
                        channel_paths.insert(id, PathBuf::from(value));
                    }
                    None => {
                        return Err(Error::MalformedLine {
                            path: source,
                            line,
                            reason: format!("unknown manifest key `{k}`"),
                        })
                    }
                },
            }
        }

        let position = position.ok_or_else(|| Error::MissingConfigKey("position".into()))?;
        let label_path = label_path.ok_or_else(|| Error::MissingConfigKey("labels".into()))?;
        for id in ALL_CHANNELS {
            if !channel_paths.contains_key(&id) {
                return Err(Error::MissingChannel(id.key().into()));
            }
        }

        Ok(Manifest {
            position,
            block_len,
            channel_paths,
            label_path,
            dir,
        })
    }
}

/// Parses a channel file: one block of `block_len` whitespace-separated finite
/// decimals per nonempty line.
pub fn parse_channel_file(text: &str, block_len: usize, source: &str) -> Result<Vec<Vec<f64>>> {
    assert!(block_len >= 1, "block_len must be at least 1");
    let mut blocks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut block = Vec::with_capacity(block_len);
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| Error::MalformedLine {
                path: source.into(),
                line: idx + 1,
                reason: format!("non-numeric token `{token}`"),
            })?;
            if !value.is_finite() {
                return Err(Error::MalformedLine {
                    path: source.into(),
                    line: idx + 1,
                    reason: format!("non-finite token `{token}`"),
                });
            }
            block.push(value);
        }
        if block.len() != block_len {
            return Err(Error::MalformedLine {
                path: source.into(),
                line: idx + 1,
                reason: format!("expected {} values, found {}", block_len, block.len()),
            });
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Parses a label file: one block of `block_len` integer codes (0..=8) per
/// nonempty line.
pub fn parse_label_file(text: &str, block_len: usize, source: &str) -> Result<Vec<Vec<u8>>> {
    assert!(block_len >= 1, "block_len must be at least 1");
    let mut blocks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut block = Vec::with_capacity(block_len);
        for token in line.split_whitespace() {
            let code: i64 = token.parse().map_err(|_| Error::MalformedLine {
                path: source.into(),
                line: idx + 1,
                reason: format!("non-integer token `{token}`"),
            })?;
            if !(0..=8).contains(&code) {
                return Err(Error::InvalidLabelCode {
                    path: source.into(),
                    line: idx + 1,
                    code,
                });
            }
            block.push(code as u8);
        }
        if block.len() != block_len {
            return Err(Error::MalformedLine {
                path: source.into(),
                line: idx + 1,
                reason: format!("expected {} labels, found {}", block_len, block.len()),
            });
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Serializes blocks back to the channel-file layout (one block per line,
/// space-separated, shortest round-trippable decimals).
pub fn format_channel_blocks(blocks: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for block in blocks {
        let line: Vec<String> = block.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_label_blocks(blocks: &[Vec<u8>]) -> String {
    let mut out = String::new();
    for block in blocks {
        let line: Vec<String> = block.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Zips per-channel blocks and label blocks index-by-index into
/// [`SensorBlock`]s. Blocks whose label sequence is entirely code 0 are
/// dropped; blocks with a mix of zero and nonzero codes are kept for the
/// downstream majority vote.
pub fn assemble_position(
    channel_blocks: &BTreeMap<ChannelId, Vec<Vec<f64>>>,
    label_blocks: &[Vec<u8>],
    position: Position,
) -> Result<RawPositionData> {
    let expected = label_blocks.len();
    for (id, blocks) in channel_blocks {
        if blocks.len() != expected {
            return Err(Error::BlockCountMismatch {
                what: id.key().into(),
                got: blocks.len(),
                expected,
            });
        }
    }

    let mut blocks = Vec::with_capacity(expected);
    for (i, labels) in label_blocks.iter().enumerate() {
        if labels.iter().all(|&c| c == 0) {
            continue;
        }
        let mut channels = BTreeMap::new();
        for (&id, per_channel) in channel_blocks {
            channels.insert(id, per_channel[i].clone());
        }
        blocks.push(SensorBlock::new(position, channels, labels.clone())?);
    }
    Ok(RawPositionData { position, blocks })
}

/// Concatenates position data in the given order; every block keeps its
/// source position tag.
pub fn merge_positions(parts: &[RawPositionData]) -> Result<Vec<SensorBlock>> {
    if parts.is_empty() {
        return Err(Error::EmptyInput("no position data to merge".into()));
    }
    Ok(parts
        .iter()
        .flat_map(|p| p.blocks.iter().cloned())
        .collect())
}

/// Reads every file a manifest names and assembles the position's blocks.
pub fn load_position(manifest: &Manifest) -> Result<RawPositionData> {
    let mut channel_blocks = BTreeMap::new();
    for (&id, rel) in &manifest.channel_paths {
        let path = manifest.dir.join(rel);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let blocks = parse_channel_file(&text, manifest.block_len, &path.display().to_string())?;
        channel_blocks.insert(id, blocks);
    }
    let label_path = manifest.dir.join(&manifest.label_path);
    let text = fs::read_to_string(&label_path).map_err(|e| Error::io(&label_path, e))?;
    let label_blocks =
        parse_label_file(&text, manifest.block_len, &label_path.display().to_string())?;
    assemble_position(&channel_blocks, &label_blocks, manifest.position)
}
