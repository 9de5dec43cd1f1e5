//! Unitary 2D FFT over one `nx × ny` frame stored row-major (x fastest).

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::volume::C64;

#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    scale: f64,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.nx, self.ny)
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            scale: 1.0 / ((nx * ny) as f64).sqrt(),
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    pub fn forward(&self, frame: &mut [C64]) {
        self.transform(frame, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, frame: &mut [C64]) {
        self.transform(frame, &self.row_inv, &self.col_inv);
    }

    fn transform(&self, frame: &mut [C64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(frame.len(), self.nx * self.ny);
        rows.process(frame);
        if self.ny > 1 {
            // columns become rows of the transpose, transformed in one batch
            let (nx, ny) = (self.nx, self.ny);
            let mut t = vec![C64::new(0.0, 0.0); nx * ny];
            for y in 0..ny {
                for x in 0..nx {
                    t[x * ny + y] = frame[y * nx + x];
                }
            }
            cols.process(&mut t);
            for x in 0..nx {
                for y in 0..ny {
                    frame[y * nx + x] = t[x * ny + y];
                }
            }
        }
        for v in frame.iter_mut() {
            *v *= self.scale;
        }
    }
}
