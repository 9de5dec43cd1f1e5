use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pgm::{decode_pgm, encode_pgm, fftshift, ifftshift};
use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::pattern::SamplingPattern;

pub const UNSAMPLED: u8 = 0;
pub const SAMPLED: u8 = 128;
pub const LOCKED: u8 = 255;

/// First line of a `.mask` file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskHeader {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub locked_count: usize,
    /// Ascending indices of the locked points.
    pub locked: Vec<usize>,
}

/// Text form of a pattern: JSON header line, then one index per line.
pub fn render_mask(pattern: &SamplingPattern) -> String {
    let g = pattern.grid();
    let header = MaskHeader {
        nx: g.nx,
        ny: g.ny,
        nt: g.nt,
        m: pattern.len(),
        locked_count: pattern.locked().len(),
        locked: pattern.locked().to_vec(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for k in pattern.members() {
        out.push_str(&k.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_mask(text: &str) -> Result<SamplingPattern> {
    let mut lines = text.lines();
    let header: MaskHeader = serde_json::from_str(
        lines
            .next()
            .ok_or_else(|| Error::UnrecognizedFormat("empty mask file".into()))?,
    )
    .map_err(|e| Error::UnrecognizedFormat(format!("mask header: {e}")))?;
    let grid = KSpaceGrid::new(header.nx, header.ny, header.nt, 1)?;
    let n = grid.n_points();
    let mut members = Vec::with_capacity(header.m);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let k: usize = line
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("mask index `{line}`")))?;
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        if let Some(&last) = members.last() {
            if k == last {
                return Err(Error::DuplicateIndex(k));
            }
            if k < last {
                return Err(Error::Malformed(format!(
                    "mask indices not ascending at {k}"
                )));
            }
        }
        members.push(k);
    }
    if members.len() != header.m {
        return Err(Error::Malformed(format!(
            "header says M = {}, file lists {}",
            header.m,
            members.len()
        )));
    }
    if header.locked.len() != header.locked_count {
        return Err(Error::Malformed(format!(
            "locked_count {} but {} locked indices",
            header.locked_count,
            header.locked.len()
        )));
    }
    for w in header.locked.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    SamplingPattern::new(grid, members, header.locked)
}

pub fn write_mask(path: impl AsRef<Path>, pattern: &SamplingPattern) -> Result<()> {
    fs::write(path, render_mask(pattern))?;
    Ok(())
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<SamplingPattern> {
    parse_mask(&fs::read_to_string(path)?)
}

/// One PGM per frame, DC in the centre: 0 unsampled, 128 sampled, 255 locked.
pub fn mask_to_pgm(pattern: &SamplingPattern) -> Vec<Vec<u8>> {
    let g = pattern.grid();
    let plane = g.plane();
    (0..g.nt)
        .map(|t| {
            let px: Vec<u8> = (t * plane..(t + 1) * plane)
                .map(|k| {
                    if pattern.is_locked(k) {
                        LOCKED
                    } else if pattern.contains(k) {
                        SAMPLED
                    } else {
                        UNSAMPLED
                    }
                })
                .collect();
            encode_pgm(g.nx, g.ny, &fftshift(&px, g.nx, g.ny)).expect("plane sized raster")
        })
        .collect()
}

/// Inverse of [`mask_to_pgm`]: non-zero pixels are members, 255 is locked.
pub fn mask_from_pgm(frames: &[Vec<u8>]) -> Result<SamplingPattern> {
    if frames.is_empty() {
        return Err(Error::InvalidConfig("no PGM frames".into()));
    }
    let mut dims = None;
    let mut members = Vec::new();
    let mut locked = Vec::new();
    for (t, bytes) in frames.iter().enumerate() {
        let (nx, ny, px) = decode_pgm(bytes)?;
        if *dims.get_or_insert((nx, ny)) != (nx, ny) {
            return Err(Error::DimensionMismatch(format!("frame {t} is {nx}x{ny}")));
        }
        let px = ifftshift(&px, nx, ny);
        for (p, &v) in px.iter().enumerate() {
            let k = t * nx * ny + p;
            match v {
                UNSAMPLED => {}
                LOCKED => {
                    members.push(k);
                    locked.push(k);
                }
                _ => members.push(k),
            }
        }
    }
    let (nx, ny) = dims.expect("at least one frame");
    SamplingPattern::new(KSpaceGrid::new(nx, ny, frames.len(), 1)?, members, locked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SamplingPattern {
        let g = KSpaceGrid::new(6, 4, 2, 1).unwrap();
        SamplingPattern::new(g, [0, 3, 7, 24, 30, 47], [0, 24]).unwrap()
    }

    #[test]
    fn text_round_trip() {
        let p = sample();
        let text = render_mask(&p);
        assert!(text.starts_with(
            "{\"nx\":6,\"ny\":4,\"nt\":2,\"M\":6,\"locked_count\":2,\"locked\":[0,24]}\n0\n3\n"
        ));
        assert_eq!(parse_mask(&text).unwrap(), p);
    }

    #[test]
    fn rejects_bad_files() {
        let head = "{\"nx\":4,\"ny\":4,\"nt\":1,\"M\":2,\"locked_count\":0,\"locked\":[]}\n";
        assert!(matches!(
            parse_mask(&format!("{head}3\n3\n")),
            Err(Error::DuplicateIndex(3))
        ));
        assert!(matches!(
            parse_mask(&format!("{head}3\n16\n")),
            Err(Error::IndexOutOfRange { index: 16, .. })
        ));
        assert!(parse_mask(&format!("{head}3\n")).is_err());
        assert!(matches!(
            parse_mask("not json\n1\n"),
            Err(Error::UnrecognizedFormat(_))
        ));
    }

    #[test]
    fn pgm_round_trip() {
        let p = sample();
        let frames = mask_to_pgm(&p);
        assert_eq!(frames.len(), 2);
        for f in &frames {
            let (nx, ny, px) = decode_pgm(f).unwrap();
            assert_eq!(px.len(), nx * ny);
            assert_eq!(px.len(), 24);
        }
        // DC of frame 0 is locked and lands in the centre
        let (_, _, px) = decode_pgm(&frames[0]).unwrap();
        assert_eq!(px[2 * 6 + 3], LOCKED);
        assert_eq!(px.iter().filter(|&&v| v == SAMPLED).count(), 2);
        assert_eq!(mask_from_pgm(&frames).unwrap(), p);
    }
}
