//! Map rendering for plotting: log-scaled greymaps and raw CSV.

use bass_core::data::{encode_pgm, fftshift};
use bass_core::KSpaceGrid;

use crate::error::{CliError, CliResult};

/// Values this far below the maximum render as the darkest non-black grey.
const DYNAMIC_RANGE: f64 = 1e-6;

/// Log-scaled 8-bit levels: non-positive values are 0, the maximum is 255
/// and positive values spread over `1..=255` on a log axis.
pub fn log_levels(map: &[f64]) -> Vec<u8> {
    let max = map
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![0; map.len()];
    }
    let min_pos = map
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = min_pos.max(max * DYNAMIC_RANGE);
    let (lo, hi) = (floor.ln(), max.ln());
    map.iter()
        .map(|&v| {
            if v.is_nan() || v <= 0.0 {
                0
            } else if hi <= lo || v >= max {
                255
            } else {
                let t = ((v.max(floor).ln() - lo) / (hi - lo)).clamp(0.0, 1.0);
                1 + (t * 254.0).round() as u8
            }
        })
        .collect()
}

/// One PGM per frame, DC in the centre.
pub fn map_to_pgm(map: &[f64], grid: &KSpaceGrid) -> Vec<Vec<u8>> {
    let levels = log_levels(map);
    let plane = grid.plane();
    levels
        .chunks_exact(plane)
        .map(|frame| {
            encode_pgm(grid.nx, grid.ny, &fftshift(frame, grid.nx, grid.ny))
                .expect("plane sized raster")
        })
        .collect()
}

pub const MAP_CSV_HEADER: &str = "index,kx,ky,t,value";

/// One row per grid point; values print in shortest round-trip form.
pub fn map_to_csv(map: &[f64], grid: &KSpaceGrid) -> String {
    let mut out = String::from(MAP_CSV_HEADER);
    out.push('\n');
    for (k, v) in map.iter().enumerate() {
        let (kx, ky, t) = grid.coords_of(k);
        out.push_str(&format!("{k},{kx},{ky},{t},{v}\n"));
    }
    out
}

pub fn map_from_csv(text: &str) -> CliResult<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAP_CSV_HEADER) {
        return Err(CliError::Data("map CSV header".into()));
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Data(format!("map CSV row `{line}`"));
        if f.len() != 5 || f[0].parse::<usize>().map_err(|_| bad())? != i {
            return Err(bad());
        }
        out.push(f[4].parse().map_err(|_| bad())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bass_core::data::decode_pgm;

    #[test]
    fn zero_map_is_black() {
        let g = KSpaceGrid::new(4, 4, 1, 1).unwrap();
        let (_, _, px) = decode_pgm(&map_to_pgm(&[0.0; 16], &g)[0]).unwrap();
        assert!(px.iter().all(|&p| p == 0));
    }

    #[test]
    fn spike_is_single_bright_pixel() {
        let g = KSpaceGrid::new(4, 4, 1, 1).unwrap();
        let mut m = vec![0.0; 16];
        m[5] = 0.3;
        let (_, _, px) = decode_pgm(&map_to_pgm(&m, &g)[0]).unwrap();
        assert_eq!(px.iter().filter(|&&p| p == 255).count(), 1);
        assert_eq!(px.iter().filter(|&&p| p == 0).count(), 15);
    }

    #[test]
    fn brighter_means_higher() {
        let levels = log_levels(&[1e-9, 1e-3, 1e-2, 1.0, 0.5]);
        assert_eq!(levels[3], 255);
        assert!(
            levels[0] < levels[1]
                && levels[1] < levels[2]
                && levels[2] < levels[4]
                && levels[4] < levels[3]
        );
        assert_eq!(levels[0], 1);
    }

    #[test]
    fn csv_round_trip() {
        let g = KSpaceGrid::new(3, 2, 2, 1).unwrap();
        let m: Vec<f64> = (0..12).map(|i| (i as f64 * 0.1).exp() / 7.0).collect();
        assert_eq!(map_from_csv(&map_to_csv(&m, &g)).unwrap(), m);
    }
}
