//! Singular value thresholding on the Casorati matrix (pixels × frames).

use nalgebra::DMatrix;

use crate::volume::{ImageVolume, C64};

fn casorati(values: &[C64], plane: usize, nt: usize) -> DMatrix<C64> {
    // Column t is frame t; nalgebra storage is column-major.
    DMatrix::from_column_slice(plane, nt, values)
}

/// `‖M(x)‖_*`, the sum of singular values of the Casorati matrix.
pub fn nuclear_norm(x: &ImageVolume) -> f64 {
    let (nx, ny, nt) = x.dims();
    nuclear_norm_raw(x.values(), nx * ny, nt)
}

pub(crate) fn nuclear_norm_raw(values: &[C64], plane: usize, nt: usize) -> f64 {
    casorati(values, plane, nt).singular_values().iter().sum()
}

pub(crate) fn prox_nuclear_raw(values: &[C64], plane: usize, nt: usize, theta: f64) -> Vec<C64> {
    if theta <= 0.0 {
        return values.to_vec();
    }
    let mut svd = casorati(values, plane, nt).svd(true, true);
    let mut any = false;
    for s in svd.singular_values.iter_mut() {
        *s = (*s - theta).max(0.0);
        any |= *s > 0.0;
    }
    if !any {
        return vec![C64::new(0.0, 0.0); values.len()];
    }
    let m = svd.recompose().expect("singular vectors were computed");
    m.as_slice().to_vec()
}

/// Soft-thresholds the singular values of the Casorati matrix by `θ`.
pub fn prox_nuclear(x: &ImageVolume, theta: f64) -> ImageVolume {
    let (nx, ny, nt) = x.dims();
    let out = prox_nuclear_raw(x.values(), nx * ny, nt, theta);
    ImageVolume::from_values(nx, ny, nt, out).expect("prox preserves dims")
}
