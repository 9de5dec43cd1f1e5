use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::KSpaceGrid;
use crate::recon::CoilSensitivities;
use crate::volume::{ImageVolume, MultiCoilKSpace, C64};

pub const KSPD_MAGIC: &str = "KSPD1";

/// What the payload holds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Content {
    #[default]
    Kspace,
    /// Ground-truth images, stored with `nc = 1`.
    Image,
    /// Coil sensitivities, stored as one item with `nt = 1`.
    Sensitivity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KspdDims {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub nc: usize,
    pub n_items: usize,
}

impl KspdDims {
    /// Payload length in bytes, `None` on overflow.
    pub fn payload_bytes(&self) -> Option<u64> {
        [self.ny, self.nt, self.nc, self.n_items, 2, 4]
            .iter()
            .try_fold(self.nx as u64, |acc, &d| acc.checked_mul(d as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KspdHeader {
    pub magic: String,
    pub dims: KspdDims,
    pub endianness: String,
    pub normalized: bool,
    #[serde(default)]
    pub content: Content,
    /// Echo of whatever produced the file.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl KspdHeader {
    pub fn new(
        dims: KspdDims,
        content: Content,
        normalized: bool,
        config: serde_json::Value,
    ) -> Self {
        Self {
            magic: KSPD_MAGIC.into(),
            dims,
            endianness: "little".into(),
            normalized,
            content,
            config,
        }
    }
}

/// Header plus decoded payload in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct KspdFile {
    pub header: KspdHeader,
    pub values: Vec<C64>,
}

/// Serializes a header and payload to bytes.
pub fn encode_kspd(header: &KspdHeader, values: &[C64]) -> Result<Vec<u8>> {
    let bytes = header
        .dims
        .payload_bytes()
        .ok_or_else(|| Error::InvalidGrid("dimension overflow".into()))?;
    if bytes != values.len() as u64 * 8 {
        return Err(Error::LengthMismatch {
            expected: (bytes / 8) as usize,
            found: values.len(),
        });
    }
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    out.reserve(bytes as usize);
    for v in values {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_kspd(bytes: &[u8]) -> Result<KspdFile> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::UnrecognizedFormat("no header line".into()))?;
    let header: KspdHeader = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::UnrecognizedFormat(format!("header is not a KSPD header: {e}")))?;
    if header.magic != KSPD_MAGIC {
        return Err(Error::UnrecognizedFormat(format!(
            "magic `{}`",
            header.magic
        )));
    }
    if header.endianness != "little" {
        return Err(Error::Malformed(format!(
            "unsupported endianness `{}`",
            header.endianness
        )));
    }
    let d = header.dims;
    if [d.nx, d.ny, d.nt, d.nc, d.n_items].contains(&0) {
        return Err(Error::InvalidGrid(format!("zero dimension in {d:?}")));
    }
    let expected = d
        .payload_bytes()
        .ok_or_else(|| Error::InvalidGrid(format!("dimension overflow in {d:?}")))?;
    let payload = &bytes[nl + 1..];
    if (payload.len() as u64) < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len() as u64,
        });
    }
    if payload.len() as u64 > expected {
        return Err(Error::Malformed(format!(
            "{} trailing bytes after payload",
            payload.len() as u64 - expected
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            C64::new(re as f64, im as f64)
        })
        .collect();
    Ok(KspdFile { header, values })
}

pub fn write_kspd(path: impl AsRef<Path>, header: &KspdHeader, values: &[C64]) -> Result<()> {
    fs::write(path, encode_kspd(header, values)?)?;
    Ok(())
}

pub fn read_kspd(path: impl AsRef<Path>) -> Result<KspdFile> {
    decode_kspd(&fs::read(path)?)
}

fn expect_content(file: &KspdFile, content: Content) -> Result<()> {
    if file.header.content != content {
        return Err(Error::UnrecognizedFormat(format!(
            "expected {content:?} content, found {:?}",
            file.header.content
        )));
    }
    Ok(())
}

/// Writes multi-coil k-space items. Values are stored as `f32`.
pub fn write_dataset(
    path: impl AsRef<Path>,
    dataset: &Dataset,
    config: serde_json::Value,
) -> Result<()> {
    let g = dataset.grid();
    let dims = KspdDims {
        nx: g.nx,
        ny: g.ny,
        nt: g.nt,
        nc: g.nc,
        n_items: dataset.len(),
    };
    let normalized = dataset.items().iter().all(|m| m.max_modulus() == 1.0);
    let values: Vec<C64> = dataset
        .items()
        .iter()
        .flat_map(|m| m.values().iter().copied())
        .collect();
    write_kspd(
        path,
        &KspdHeader::new(dims, Content::Kspace, normalized, config),
        &values,
    )
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = read_kspd(path)?;
    expect_content(&file, Content::Kspace)?;
    let d = file.header.dims;
    let grid = KSpaceGrid::new(d.nx, d.ny, d.nt, d.nc)?;
    let per = grid.n_points() * grid.nc;
    let items = file
        .values
        .chunks_exact(per)
        .map(|c| MultiCoilKSpace::from_values(grid, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(items)
}

pub fn write_images(
    path: impl AsRef<Path>,
    images: &[ImageVolume],
    config: serde_json::Value,
) -> Result<()> {
    let first = images
        .first()
        .ok_or_else(|| Error::InvalidConfig("no images to write".into()))?;
    if let Some(bad) = images.iter().find(|v| !v.same_dims(first)) {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            bad.dims(),
            first.dims()
        )));
    }
    let (nx, ny, nt) = first.dims();
    let dims = KspdDims {
        nx,
        ny,
        nt,
        nc: 1,
        n_items: images.len(),
    };
    let values: Vec<C64> = images
        .iter()
        .flat_map(|v| v.values().iter().copied())
        .collect();
    write_kspd(
        path,
        &KspdHeader::new(dims, Content::Image, false, config),
        &values,
    )
}

pub fn read_images(path: impl AsRef<Path>) -> Result<Vec<ImageVolume>> {
    let file = read_kspd(path)?;
    expect_content(&file, Content::Image)?;
    let d = file.header.dims;
    if d.nc != 1 {
        return Err(Error::Malformed(format!("image file with nc = {}", d.nc)));
    }
    file.values
        .chunks_exact(d.nx * d.ny * d.nt)
        .map(|c| ImageVolume::from_values(d.nx, d.ny, d.nt, c.to_vec()))
        .collect()
}

pub fn write_sensitivities(path: impl AsRef<Path>, sens: &CoilSensitivities) -> Result<()> {
    let (nx, ny, nc) = sens.dims();
    let dims = KspdDims {
        nx,
        ny,
        nt: 1,
        nc,
        n_items: 1,
    };
    write_kspd(
        path,
        &KspdHeader::new(dims, Content::Sensitivity, false, serde_json::Value::Null),
        sens.values(),
    )
}

pub fn read_sensitivities(path: impl AsRef<Path>) -> Result<CoilSensitivities> {
    let file = read_kspd(path)?;
    expect_content(&file, Content::Sensitivity)?;
    let d = file.header.dims;
    if d.nt != 1 || d.n_items != 1 {
        return Err(Error::Malformed(
            "sensitivity file must hold one single-frame item".into(),
        ));
    }
    CoilSensitivities::new(d.nx, d.ny, d.nc, file.values)
}
