//! Raw field dumps: `<name>.bin` holds the nodal values as little-endian
//! `f64` in row-major grid order (`x` axes first, then `v` axes), and
//! `<name>.json` the header needed to interpret them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{MaxwellianParams, PhaseField, PhaseGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub grid: PhaseGrid,
    pub params: MaxwellianParams,
    pub time_index: usize,
    pub t: f64,
    /// Always `"f64le"`.
    pub dtype: String,
    /// Always `"row-major x then v"`.
    pub layout: String,
    pub len: usize,
}

impl DumpHeader {
    pub fn new(grid: PhaseGrid, params: MaxwellianParams, time_index: usize, t: f64) -> Self {
        DumpHeader {
            grid,
            params,
            time_index,
            t,
            dtype: "f64le".into(),
            layout: "row-major x then v".into(),
            len: grid.len(),
        }
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `stem.bin` and `stem.json`.
pub fn dump_field(stem: &Path, field: &PhaseField, header: &DumpHeader) -> Result<()> {
    if field.grid() != &header.grid {
        return Err(Error::GeometryMismatch);
    }
    let (bin, json) = paths(stem);
    let bytes: Vec<u8> = field.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&bin, bytes).map_err(|e| Error::io(&bin, e))?;
    let text = serde_json::to_string_pretty(header).expect("header serializes");
    std::fs::write(&json, text).map_err(|e| Error::io(&json, e))
}

/// Reads a dump written by [`dump_field`].
pub fn load_field(stem: &Path) -> Result<(PhaseField, DumpHeader)> {
    let (bin, json) = paths(stem);
    let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
    let header: DumpHeader = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: json.clone(),
        message: e.to_string(),
    })?;
    let bytes = std::fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if header.dtype != "f64le" || bytes.len() != 8 * header.len || header.len != header.grid.len() {
        return Err(Error::Parse {
            path: bin,
            message: format!(
                "expected {} little-endian f64 values, found {} bytes",
                header.grid.len(),
                bytes.len()
            ),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((PhaseField::from_values(header.grid, values)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let grid = PhaseGrid::new(2, 2.0, 3.0, 3, 4).unwrap();
        let p = MaxwellianParams::new(1.0, 0.5, 2).unwrap();
        let f = PhaseField::from_fn(grid, |x, v| (x[0] - 0.1).sin() * (v[1] / 3.0).exp() / 7.0);
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("slice");
        let h = DumpHeader::new(grid, p, 3, 0.15);
        dump_field(&stem, &f, &h).unwrap();
        let (g, h2) = load_field(&stem).unwrap();
        assert_eq!(h, h2);
        assert!(f
            .values()
            .iter()
            .zip(g.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(
            std::fs::metadata(stem.with_extension("bin")).unwrap().len(),
            8 * grid.len() as u64
        );
    }

    #[test]
    fn truncated_dump_is_rejected() {
        let grid = PhaseGrid::new(2, 2.0, 3.0, 3, 4).unwrap();
        let p = MaxwellianParams::new(1.0, 0.5, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("slice");
        dump_field(&stem, &PhaseField::zeros(grid), &DumpHeader::new(grid, p, 0, 0.0)).unwrap();
        std::fs::write(stem.with_extension("bin"), [0u8; 12]).unwrap();
        assert!(matches!(load_field(&stem), Err(Error::Parse { .. })));
    }
}
