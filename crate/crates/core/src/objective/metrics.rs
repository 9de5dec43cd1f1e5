use crate::error::{Error, Result};
use crate::volume::{MultiCoilKSpace, C64};

/// `‖a − b‖² / ‖a‖²` over raw complex slices.
pub fn normalized_sq_error(reference: &[C64], estimate: &[C64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            found: estimate.len(),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in reference.iter().zip(estimate) {
        num += (a - b).norm_sqr();
        den += a.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroData);
    }
    Ok(num / den)
}

/// `f(m, n) = ‖m − n‖² / ‖m‖²` over all points and coils.
pub fn distance_f(m: &MultiCoilKSpace, n: &MultiCoilKSpace) -> Result<f64> {
    if m.grid() != n.grid() {
        return Err(Error::GridMismatch {
            expected: m.grid(),
            found: n.grid(),
        });
    }
    normalized_sq_error(m.values(), n.values())
}

/// Square root of the *sum* of per-item normalised squared errors.
pub fn nrmse(references: &[MultiCoilKSpace], estimates: &[MultiCoilKSpace]) -> Result<f64> {
    Ok(per_item_errors(references, estimates)?
        .iter()
        .sum::<f64>()
        .sqrt())
}

/// Square root of the *mean* of per-item normalised squared errors, for
/// comparing sets of different size.
pub fn nrmse_mean(references: &[MultiCoilKSpace], estimates: &[MultiCoilKSpace]) -> Result<f64> {
    let e = per_item_errors(references, estimates)?;
    Ok((e.iter().sum::<f64>() / e.len() as f64).sqrt())
}

fn per_item_errors(
    references: &[MultiCoilKSpace],
    estimates: &[MultiCoilKSpace],
) -> Result<Vec<f64>> {
    if references.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            expected: references.len(),
            found: estimates.len(),
        });
    }
    if references.is_empty() {
        return Err(Error::InvalidConfig("nrmse needs at least one item".into()));
    }
    references
        .iter()
        .zip(estimates)
        .map(|(m, n)| distance_f(m, n))
        .collect()
}

/// NRMSE (sum form) over arbitrary complex slices, e.g. images.
pub fn nrmse_slices<'a>(pairs: impl IntoIterator<Item = (&'a [C64], &'a [C64])>) -> Result<f64> {
    let mut total = 0.0;
    for (r, e) in pairs {
        total += normalized_sq_error(r, e)?;
    }
    Ok(total.sqrt())
}
