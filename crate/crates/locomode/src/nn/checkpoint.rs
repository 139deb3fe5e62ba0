//! Checkpoint files: magic "MNCK", little-endian u32 version, architecture
//! header (feature_dim, hidden1, hidden2, classes as u32; dropout_p as f64;
//! cell-activation code as u32), then all parameter arrays in checkpoint
//! order as row-major f64.

use std::fs;
use std::io::Read;
use std::path::Path;

use super::{CellActivation, ModelArch, ModelParams};
use crate::error::{Error, Result};

const CHECKPOINT_MAGIC: &[u8; 4] = b"MNCK";
const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    let arch = params.arch();
    let mut buf = Vec::with_capacity(32 + params.param_count() * 8);
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for dim in [arch.feature_dim, arch.hidden1, arch.hidden2, arch.classes] {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    buf.extend_from_slice(&arch.dropout_p.to_le_bytes());
    buf.extend_from_slice(&arch.cell_activation.code().to_le_bytes());
    for view in params.flat_views() {
        for &v in view.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
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
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }

    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut reader)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let feature_dim = read_u32(&mut reader)? as usize;
    let hidden1 = read_u32(&mut reader)? as usize;
    let hidden2 = read_u32(&mut reader)? as usize;
    let classes = read_u32(&mut reader)? as usize;

    let mut f64buf = [0u8; 8];
    reader
        .read_exact(&mut f64buf)
        .map_err(|e| Error::io(path, e))?;
    let dropout_p = f64::from_le_bytes(f64buf);
    let act_code = {
        let mut buf = [0u8; 4];
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::io(path, e))?;
        u32::from_le_bytes(buf)
    };
    let cell_activation =
        CellActivation::from_code(act_code).ok_or_else(|| bad("unknown cell activation code"))?;

    let arch = ModelArch {
        feature_dim,
        hidden1,
        hidden2,
        classes,
        dropout_p,
        cell_activation,
    };
    let mut params = ModelParams::zeros(&arch);
    for mut view in params.flat_views_mut() {
        for v in view.iter_mut() {
            reader
                .read_exact(&mut f64buf)
                .map_err(|e| Error::io(path, e))?;
            *v = f64::from_le_bytes(f64buf);
        }
    }
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(bad("trailing bytes after parameter arrays"));
    }
    Ok(params)
}
