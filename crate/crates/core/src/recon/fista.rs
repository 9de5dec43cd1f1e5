//! Monotone FISTA with backtracking for `min ‖A z − b‖² + λ P(z)` over
//! complex vectors.
//!
//! Each iteration keeps the better of the proximal point and the previous
//! iterate, so the cost sequence never increases even when the proximal
//! operator is only approximate. `A z` is tracked alongside every iterate, so
//! one forward and one adjoint application are needed per iteration.

use crate::error::{Error, Result};
use crate::volume::C64;

pub(crate) trait Problem {
    /// `A z`.
    fn apply(&self, z: &[C64]) -> Vec<C64>;
    /// `Aᴴ r`.
    fn adjoint(&self, r: &[C64]) -> Vec<C64>;
    fn penalty(&self, z: &[C64]) -> f64;
    /// Proximal map of `θ P` at `v`. May carry warm-start state.
    fn prox(&mut self, v: &[C64], theta: f64) -> Vec<C64>;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct FistaSettings {
    pub lambda: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Initial Lipschitz estimate of the gradient `2 Aᴴ(A z − b)`.
    pub lipschitz: f64,
    pub backtrack_factor: f64,
}

const MAX_BACKTRACKS: usize = 60;
pub(crate) const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(crate) struct FistaOutput {
    pub solution: Vec<C64>,
    /// Cost of the kept iterate after every proximal step, preceded by the
    /// initial cost.
    pub costs: Vec<f64>,
}

fn residual_sqr(az: &[C64], b: &[C64]) -> f64 {
    az.iter().zip(b).map(|(a, b)| (a - b).norm_sqr()).sum()
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// `p + s (q − p) + r (p − o)`, entrywise.
fn extrapolate(p: &[C64], q: &[C64], o: &[C64], s: f64, r: f64) -> Vec<C64> {
    p.iter()
        .zip(q)
        .zip(o)
        .map(|((p, q), o)| p + (q - p) * s + (p - o) * r)
        .collect()
}

pub(crate) fn minimize<P: Problem>(
    problem: &mut P,
    b: &[C64],
    z0: Vec<C64>,
    s: &FistaSettings,
) -> Result<FistaOutput> {
    let mut lip = s.lipschitz.max(f64::MIN_POSITIVE);
    let mut x = z0;
    let mut ax = problem.apply(&x);
    let mut cost_x = residual_sqr(&ax, b) + s.lambda * problem.penalty(&x);
    let mut costs = vec![cost_x];
    // absolute roundoff floor for the sufficient-decrease test
    let floor = f64::EPSILON * (residual_sqr(&ax, b) + b.iter().map(|v| v.norm_sqr()).sum::<f64>());

    let mut y = x.clone();
    let mut ay = ax.clone();
    let mut t = 1.0_f64;

    for iter in 1..=s.max_iterations {
        let ry: Vec<C64> = ay.iter().zip(b).map(|(a, b)| a - b).collect();
        let f_y: f64 = ry.iter().map(|v| v.norm_sqr()).sum();
        let grad: Vec<C64> = problem.adjoint(&ry).into_iter().map(|g| g * 2.0).collect();

        let mut backtracks = 0;
        let (z, az, f_z) = loop {
            let step = 1.0 / lip;
            let v: Vec<C64> = y.iter().zip(&grad).map(|(y, g)| y - g * step).collect();
            let z = problem.prox(&v, s.lambda * step);
            let az = problem.apply(&z);
            let f_z = residual_sqr(&az, b);
            let d: Vec<C64> = z.iter().zip(&y).map(|(z, y)| z - y).collect();
            let bound =
                f_y + real_dot(&grad, &d) + 0.5 * lip * d.iter().map(|v| v.norm_sqr()).sum::<f64>();
            if f_z <= bound + MONOTONE_SLACK * bound.abs() + floor {
                break (z, az, f_z);
            }
            backtracks += 1;
            if backtracks > MAX_BACKTRACKS {
                return Err(Error::Diverged {
                    iteration: iter,
                    trace: costs,
                });
            }
            lip *= s.backtrack_factor;
        };

        let cost_z = f_z + s.lambda * problem.penalty(&z);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let accepted = cost_z <= cost_x;
        let (x_new, ax_new, cost_new) = if accepted {
            (z.clone(), az.clone(), cost_z)
        } else {
            (x.clone(), ax.clone(), cost_x)
        };
        if !(cost_new.is_finite()) || cost_new > cost_x * (1.0 + MONOTONE_SLACK) {
            costs.push(cost_new);
            return Err(Error::Diverged {
                iteration: iter,
                trace: costs,
            });
        }

        let (sz, sx) = (t / t_next, (t - 1.0) / t_next);
        y = extrapolate(&x_new, &z, &x, sz, sx);
        ay = extrapolate(&ax_new, &az, &ax, sz, sx);
        t = t_next;

        let previous = cost_x;
        x = x_new;
        ax = ax_new;
        cost_x = cost_new;
        costs.push(cost_x);

        if cost_x == 0.0 {
            break;
        }
        if accepted && (previous - cost_x) < s.tolerance * previous {
            break;
        }
    }
    Ok(FistaOutput { solution: x, costs })
}
