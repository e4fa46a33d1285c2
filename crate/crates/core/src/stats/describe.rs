//! Order-independent descriptive statistics. Inputs are sorted before any
//! summation, so results are bit-identical under permutation.

use crate::num::Real;

fn sorted<R: Real>(values: &[R]) -> Vec<R> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn mean<R: Real>(values: &[R]) -> R {
    if values.is_empty() {
        return R::nan();
    }
    sorted(values).into_iter().sum::<R>() / R::of_usize(values.len())
}

/// Population standard deviation.
pub fn std_dev<R: Real>(values: &[R]) -> R {
    if values.is_empty() {
        return R::nan();
    }
    let m = mean(values);
    let dev: Vec<R> = values.iter().map(|&v| (v - m) * (v - m)).collect();
    (sorted(&dev).into_iter().sum::<R>() / R::of_usize(values.len())).sqrt()
}

/// Percentile with linear interpolation between closest ranks,
/// `q` in `[0, 100]`.
pub fn percentile<R: Real>(values: &[R], q: f64) -> R {
    if values.is_empty() {
        return R::nan();
    }
    let v = sorted(values);
    let pos = q.clamp(0.0, 100.0) / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = R::of(pos - lo as f64);
    v[lo] + (v[hi] - v[lo]) * frac
}

pub fn min<R: Real>(values: &[R]) -> R {
    values.iter().copied().fold(R::nan(), R::min)
}

pub fn max<R: Real>(values: &[R]) -> R {
    values.iter().copied().fold(R::nan(), R::max)
}
