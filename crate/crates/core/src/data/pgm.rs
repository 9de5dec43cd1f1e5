use crate::error::{Error, Result};

/// Binary (P5) greymap with maxval 255, rows top to bottom.
pub fn encode_pgm(nx: usize, ny: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != nx * ny {
        return Err(Error::LengthMismatch {
            expected: nx * ny,
            found: pixels.len(),
        });
    }
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Parses a P5 greymap with maxval 255 into `(nx, ny, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Malformed("PGM header ends early".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::UnrecognizedFormat(format!(
            "PGM magic `{}`",
            fields[0]
        )));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Malformed(format!("PGM field `{s}`")))
    };
    let (nx, ny, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return Err(Error::Malformed(format!(
            "PGM maxval {maxval}, only 255 is supported"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = &bytes[(pos + 1).min(bytes.len())..];
    if data.len() != nx * ny {
        return Err(Error::TruncatedPayload {
            expected: (nx * ny) as u64,
            found: data.len() as u64,
        });
    }
    Ok((nx, ny, data.to_vec()))
}

/// Moves the DC bin from `(0, 0)` to the image centre.
pub fn fftshift<T: Copy>(plane: &[T], nx: usize, ny: usize) -> Vec<T> {
    let mut out = plane.to_vec();
    for y in 0..ny {
        for x in 0..nx {
            out[((y + ny / 2) % ny) * nx + (x + nx / 2) % nx] = plane[y * nx + x];
        }
    }
    out
}

/// Inverse of [`fftshift`].
pub fn ifftshift<T: Copy>(plane: &[T], nx: usize, ny: usize) -> Vec<T> {
    let mut out = plane.to_vec();
    for y in 0..ny {
        for x in 0..nx {
            out[y * nx + x] = plane[((y + ny / 2) % ny) * nx + (x + nx / 2) % nx];
        }
    }
    out
}
