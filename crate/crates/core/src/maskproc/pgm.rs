//! Binary PGM (P5) masks and the `index.json` that orders them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{IdMask, MaskError};

/// Parses a P5 image; 8-bit when maxval < 256, otherwise 16-bit big-endian.
pub fn read_pgm(bytes: &[u8]) -> Result<IdMask, MaskError> {
    let bad = |m: &str| MaskError::Pgm(m.to_string());
    let mut pos = 0;
    let mut token = || -> Result<&[u8], MaskError> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(&bytes[start..pos])
    };
    if token()? != b"P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let mut number = |what: &str| -> Result<usize, MaskError> {
        std::str::from_utf8(token()?)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| MaskError::Pgm(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
    let n = width * height;
    let ids: Vec<u32> = if maxval < 256 {
        if data.len() < n {
            return Err(bad("truncated raster"));
        }
        data[..n].iter().map(|&v| u32::from(v)).collect()
    } else {
        if data.len() < 2 * n {
            return Err(bad("truncated raster"));
        }
        data[..2 * n]
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    IdMask::new(width, height, ids)
}

pub fn write_pgm(mask: &IdMask) -> Result<Vec<u8>, MaskError> {
    let max = mask.ids.iter().copied().max().unwrap_or(0).max(1);
    if max > 65535 {
        return Err(MaskError::Pgm(format!("object id {max} does not fit in 16 bits")));
    }
    let mut out = format!("P5\n{} {}\n{}\n", mask.width, mask.height, max).into_bytes();
    if max < 256 {
        out.extend(mask.ids.iter().map(|&v| v as u8));
    } else {
        out.extend(mask.ids.iter().flat_map(|&v| (v as u16).to_be_bytes()));
    }
    Ok(out)
}

pub fn load_pgm(path: &Path) -> Result<IdMask, MaskError> {
    let bytes = fs::read(path).map_err(|source| MaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_pgm(&bytes)
}

/// Caller-supplied metadata for one object id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskObject {
    pub id: u32,
    /// Free-form class/attribute metadata, carried through untouched.
    #[serde(flatten)]
    pub meta: serde_json::Map<String, serde_json::Value>,
}

/// `index.json`: frame files in forward chronological order and the object list whose
/// order defines foreground indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskIndex {
    pub frames: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objects: Option<Vec<MaskObject>>,
}

impl MaskIndex {
    pub fn object_order(&self) -> Option<Vec<u32>> {
        self.objects.as_ref().map(|o| o.iter().map(|m| m.id).collect())
    }
}

/// Reads `dir/index.json` and every listed frame, returned in forward order.
pub fn load_mask_dir(dir: &Path) -> Result<(MaskIndex, Vec<IdMask>), MaskError> {
    let index_path: PathBuf = dir.join("index.json");
    let text = fs::read_to_string(&index_path).map_err(|source| MaskError::Io {
        path: index_path.clone(),
        source,
    })?;
    let index: MaskIndex = serde_json::from_str(&text).map_err(|e| MaskError::Index(e.to_string()))?;
    if index.frames.is_empty() {
        return Err(MaskError::Index("no frames listed".into()));
    }
    let masks = index
        .frames
        .iter()
        .map(|f| load_pgm(&dir.join(f)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((index, masks))
}
