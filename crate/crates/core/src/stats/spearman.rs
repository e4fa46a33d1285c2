use crate::error::{Error, Result};
use crate::num::Real;

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks<R: Real>(values: &[R]) -> Vec<R> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![R::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = R::of((start + 1 + end) as f64 / 2.0);
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson<R: Real>(x: &[R], y: &[R]) -> Option<R> {
    let n = R::of_usize(x.len());
    let mx = x.iter().copied().sum::<R>() / n;
    let my = y.iter().copied().sum::<R>() / n;
    let (mut sxy, mut sxx, mut syy) = (R::zero(), R::zero(), R::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == R::zero() || syy == R::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-R::one()).min(R::one()))
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman<R: Real>(x: &[R], y: &[R]) -> Result<R> {
    if x.len() != y.len() {
        return Err(Error::contract(format!(
            "spearman inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::contract("spearman needs at least three pairs"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::contract("spearman inputs contain NaN"));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::UndefinedCorrelation("an input has zero rank variance".into()))
}
