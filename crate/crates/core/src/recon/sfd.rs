//! Anisotropic spatial finite differences and their ℓ1 proximal map.
//!
//! `T` takes forward differences along x and along y inside each frame, with
//! no wrap-around. The prox of `θ‖T x‖₁` is computed on the dual with the
//! fast gradient projection method: `x = v − θ Tᵀ p` with each complex dual
//! entry constrained to the unit disk.

use crate::volume::{ImageVolume, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Horizontal and vertical differences of one frame. Entries without a
/// right/lower neighbour are zero.
fn diff(frame: &[C64], nx: usize, ny: usize, h: &mut [C64], v: &mut [C64]) {
    for y in 0..ny {
        let row = &frame[y * nx..(y + 1) * nx];
        let hr = &mut h[y * nx..(y + 1) * nx];
        for x in 0..nx - 1 {
            hr[x] = row[x + 1] - row[x];
        }
        hr[nx - 1] = ZERO;
    }
    let last = (ny - 1) * nx;
    for i in 0..last {
        v[i] = frame[i + nx] - frame[i];
    }
    v[last..].fill(ZERO);
}

/// `Tᵀ (h, v)` for one frame.
fn diff_adjoint(h: &[C64], v: &[C64], nx: usize, ny: usize, out: &mut [C64]) {
    for y in 0..ny {
        let hr = &h[y * nx..(y + 1) * nx];
        let o = &mut out[y * nx..(y + 1) * nx];
        o[0] = -hr[0];
        for x in 1..nx - 1 {
            o[x] = hr[x - 1] - hr[x];
        }
        if nx > 1 {
            o[nx - 1] = hr[nx - 2];
        } else {
            o[0] = ZERO;
        }
    }
    if ny == 1 {
        return;
    }
    let last = (ny - 1) * nx;
    for i in 0..nx {
        out[i] -= v[i];
    }
    for i in nx..last {
        out[i] += v[i - nx] - v[i];
    }
    for i in last..last + nx {
        out[i] += v[i - nx];
    }
}

/// `‖T x‖₁`, summed over frames, using the complex modulus of each difference.
pub fn sfd_norm(x: &ImageVolume) -> f64 {
    sfd_norm_raw(x.values(), x.dims())
}

pub(crate) fn sfd_norm_raw(values: &[C64], (nx, ny, nt): (usize, usize, usize)) -> f64 {
    let plane = nx * ny;
    let mut total = 0.0;
    for t in 0..nt {
        let f = &values[t * plane..(t + 1) * plane];
        for y in 0..ny {
            for x in 0..nx {
                let i = y * nx + x;
                if x + 1 < nx {
                    total += (f[i + 1] - f[i]).norm_sqr().sqrt();
                }
                if y + 1 < ny {
                    total += (f[i + nx] - f[i]).norm_sqr().sqrt();
                }
            }
        }
    }
    total
}

/// Dual state of the SFD prox, reusable as a warm start across calls.
#[derive(Clone, Debug)]
pub(crate) struct SfdProx {
    dims: (usize, usize, usize),
    inner_iterations: usize,
    h: Vec<C64>,
    v: Vec<C64>,
}

impl SfdProx {
    pub(crate) fn new(dims: (usize, usize, usize), inner_iterations: usize) -> Self {
        let n = dims.0 * dims.1 * dims.2;
        Self {
            dims,
            inner_iterations,
            h: vec![ZERO; n],
            v: vec![ZERO; n],
        }
    }

    pub(crate) fn apply(&mut self, input: &[C64], theta: f64) -> Vec<C64> {
        if theta <= 0.0 {
            return input.to_vec();
        }
        let (nx, ny, nt) = self.dims;
        let plane = nx * ny;
        let mut out = vec![ZERO; input.len()];
        let step = 1.0 / (8.0 * theta);
        let project = |c: C64| {
            let m = c.norm_sqr();
            if m > 1.0 {
                c / m.sqrt()
            } else {
                c
            }
        };

        let mut prim = vec![ZERO; plane];
        let mut dh = vec![ZERO; plane];
        let mut dv = vec![ZERO; plane];
        for t in 0..nt {
            let vin = &input[t * plane..(t + 1) * plane];
            let ph = &mut self.h[t * plane..(t + 1) * plane];
            let pv = &mut self.v[t * plane..(t + 1) * plane];
            let mut rh = ph.to_vec();
            let mut rv = pv.to_vec();
            let mut tk = 1.0_f64;
            for _ in 0..self.inner_iterations {
                diff_adjoint(&rh, &rv, nx, ny, &mut prim);
                for (p, v) in prim.iter_mut().zip(vin) {
                    *p = v - *p * theta;
                }
                diff(&prim, nx, ny, &mut dh, &mut dv);
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
                let w = (tk - 1.0) / t_next;
                for i in 0..plane {
                    let nh = project(rh[i] + dh[i] * step);
                    let nv = project(rv[i] + dv[i] * step);
                    rh[i] = nh + (nh - ph[i]) * w;
                    rv[i] = nv + (nv - pv[i]) * w;
                    ph[i] = nh;
                    pv[i] = nv;
                }
                tk = t_next;
            }
            diff_adjoint(ph, pv, nx, ny, &mut prim);
            for ((o, v), p) in out[t * plane..(t + 1) * plane]
                .iter_mut()
                .zip(vin)
                .zip(&prim)
            {
                *o = v - p * theta;
            }
        }
        out
    }
}

/// Approximate prox of `θ‖T x‖₁` with `inner_iterations` fast gradient
/// projection steps from a zero dual.
pub fn prox_sfd(v: &ImageVolume, theta: f64, inner_iterations: usize) -> ImageVolume {
    let mut prox = SfdProx::new(v.dims(), inner_iterations);
    let (nx, ny, nt) = v.dims();
    ImageVolume::from_values(nx, ny, nt, prox.apply(v.values(), theta))
        .expect("prox preserves dims")
}
