use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::LevelPrediction;

pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Affine map from features to one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTarget<R> {
    pub weights: Vec<R>,
    pub intercept: R,
}

impl<R: Real> AffineTarget<R> {
    pub fn raw(&self, values: &[R]) -> R {
        self.weights
            .iter()
            .zip(values)
            .fold(self.intercept, |acc, (&w, &x)| acc + w * x)
    }
}

/// Least-squares models for pass rate and churn rate over named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel<R> {
    pub feature_names: Vec<String>,
    pub pass: AffineTarget<R>,
    pub churn: AffineTarget<R>,
}

/// Solves `a x = b` for symmetric positive semi-definite `a` by Cholesky;
/// `None` when a pivot is not safely positive.
fn cholesky_solve<R: Real>(a: &[Vec<R>], b: &[R]) -> Option<Vec<R>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(R::zero(), R::max).max(R::one());
    let tol = scale * R::of(1e-12);
    let mut l = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = (0..j).fold(a[i][j], |s, k| s - l[i][k] * l[j][k]);
            if i == j {
                if s <= tol {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        y[i] = (0..i).fold(b[i], |s, k| s - l[i][k] * y[k]) / l[i][i];
    }
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        x[i] = (i + 1..n).fold(y[i], |s, k| s - l[k][i] * x[k]) / l[i][i];
    }
    Some(x)
}

/// Ordinary least squares on centred columns, so the intercept is the
/// target mean minus the fitted feature contribution. A singular system is
/// retried with a tiny ridge term.
fn fit_target<R: Real>(rows: &[Vec<R>], target: &[R]) -> AffineTarget<R> {
    let n = R::of_usize(rows.len());
    let p = rows[0].len();
    let means: Vec<R> = (0..p)
        .map(|j| rows.iter().map(|r| r[j]).sum::<R>() / n)
        .collect();
    let y_mean = target.iter().copied().sum::<R>() / n;
    let mut xtx = vec![vec![R::zero(); p]; p];
    let mut xty = vec![R::zero(); p];
    for (row, &y) in rows.iter().zip(target) {
        let centred: Vec<R> = row.iter().zip(&means).map(|(&x, &m)| x - m).collect();
        for i in 0..p {
            xty[i] = xty[i] + centred[i] * (y - y_mean);
            for j in 0..p {
                xtx[i][j] = xtx[i][j] + centred[i] * centred[j];
            }
        }
    }
    let weights = cholesky_solve(&xtx, &xty).unwrap_or_else(|| {
        let mut ridged = xtx.clone();
        for (i, row) in ridged.iter_mut().enumerate() {
            row[i] = row[i] + R::of(RIDGE_FALLBACK);
        }
        cholesky_solve(&ridged, &xty).unwrap_or_else(|| vec![R::zero(); p])
    });
    let intercept = weights
        .iter()
        .zip(&means)
        .fold(y_mean, |acc, (&w, &m)| acc - w * m);
    AffineTarget { weights, intercept }
}

/// Fits both targets. Needs at least `features + 1` levels.
pub fn fit_linear<R: Real>(
    feature_names: &[String],
    rows: &[Vec<R>],
    pass: &[R],
    churn: &[R],
) -> Result<LinearModel<R>> {
    let p = feature_names.len();
    if rows.len() < p + 1 {
        return Err(Error::InsufficientData(format!(
            "{} levels for {p} features, need at least {}",
            rows.len(),
            p + 1
        )));
    }
    if pass.len() != rows.len() || churn.len() != rows.len() {
        return Err(Error::contract("one pass and one churn target per level are required"));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::contract("feature rows differ in length from the names"));
    }
    if rows.iter().flatten().chain(pass).chain(churn).any(|v| !v.is_finite()) {
        return Err(Error::contract("non-finite regression input"));
    }
    Ok(LinearModel {
        feature_names: feature_names.to_vec(),
        pass: fit_target(rows, pass),
        churn: fit_target(rows, churn),
    })
}

impl<R: Real> LinearModel<R> {
    fn check<S: AsRef<str>>(&self, names: &[S], values: &[R]) -> Result<()> {
        let same = names.len() == self.feature_names.len()
            && names.iter().zip(&self.feature_names).all(|(a, b)| a.as_ref() == b);
        if !same || values.len() != names.len() {
            return Err(Error::contract(format!(
                "features do not match the model's ({})",
                self.feature_names.join(",")
            )));
        }
        Ok(())
    }

    /// Unclamped predictions `(pass, churn)`.
    pub fn raw<S: AsRef<str>>(&self, names: &[S], values: &[R]) -> Result<(R, R)> {
        self.check(names, values)?;
        Ok((self.pass.raw(values), self.churn.raw(values)))
    }
}

impl<R: Real + Serialize + DeserializeOwned> LinearModel<R> {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("linear model serialises")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let model: Self = toml::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))?;
        let p = model.feature_names.len();
        if model.pass.weights.len() != p || model.churn.weights.len() != p {
            return Err(Error::schema(origin, "weight count differs from feature count"));
        }
        Ok(model)
    }
}

/// Affine prediction clamped to `[0, 1]`.
pub fn predict_linear<R: Real, S: AsRef<str>>(
    model: &LinearModel<R>,
    level_id: u32,
    names: &[S],
    values: &[R],
) -> Result<LevelPrediction<R>> {
    let (pass, churn) = model.raw(names, values)?;
    Ok(LevelPrediction {
        level_id,
        pass_rate: pass.max(R::zero()).min(R::one()),
        churn_rate: churn.max(R::zero()).min(R::one()),
    })
}
