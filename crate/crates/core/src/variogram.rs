//! Empirical semivariogram and a leveling-off estimate of the autocorrelation range,
//! used to pick block sizes and buffer distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::dist;

/// One distance bin of the empirical semivariogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagBin {
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
    pub pairs: usize,
    pub semivariance: f64,
    /// True when the bin had fewer than two pairs and was filled from its neighbours.
    pub interpolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeEstimate {
    pub range: f64,
    pub sill: f64,
    pub bins: Vec<LagBin>,
}

/// Fraction of the sill the semivariogram must reach.
pub const SILL_FRACTION: f64 = 0.95;

/// Empirical semivariogram over `n_lags` equal-width bins on `[0, cutoff]`.
pub fn semivariogram(values: &[f64], coords: &[[f64; 2]], n_lags: usize, cutoff: f64) -> Result<Vec<LagBin>> {
    let n = values.len();
    if coords.len() != n {
        return Err(Error::InvalidParameter("values and coords differ in length".into()));
    }
    if n_lags == 0 || !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidParameter("need n_lags >= 1 and a positive cutoff".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("semivariogram values".into()));
    }
    let width = cutoff / n_lags as f64;
    let mut sums = vec![0.0; n_lags];
    let mut pairs = vec![0usize; n_lags];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(coords[i], coords[j]);
            if d > cutoff {
                continue;
            }
            let b = ((d / width) as usize).min(n_lags - 1);
            sums[b] += 0.5 * (values[i] - values[j]).powi(2);
            pairs[b] += 1;
        }
    }
    let mut bins: Vec<LagBin> = (0..n_lags)
        .map(|b| LagBin {
            lower: b as f64 * width,
            upper: (b + 1) as f64 * width,
            midpoint: (b as f64 + 0.5) * width,
            pairs: pairs[b],
            semivariance: if pairs[b] >= 2 { sums[b] / pairs[b] as f64 } else { f64::NAN },
            interpolated: pairs[b] < 2,
        })
        .collect();

    let valid: Vec<usize> = (0..n_lags).filter(|&b| !bins[b].interpolated).collect();
    if valid.is_empty() {
        return Err(Error::InvalidParameter("no lag bin holds two or more pairs".into()));
    }
    for b in 0..n_lags {
        if !bins[b].interpolated {
            continue;
        }
        let left = valid.iter().rev().find(|&&v| v < b).copied();
        let right = valid.iter().find(|&&v| v > b).copied();
        bins[b].semivariance = match (left, right) {
            (Some(l), Some(r)) => {
                let t = (b - l) as f64 / (r - l) as f64;
                bins[l].semivariance + t * (bins[r].semivariance - bins[l].semivariance)
            }
            (Some(l), None) => bins[l].semivariance,
            (None, Some(r)) => bins[r].semivariance,
            (None, None) => unreachable!("valid is nonempty"),
        };
    }
    Ok(bins)
}

/// Distance at which the empirical semivariogram levels off.
///
/// The sill is the mean semivariance of the upper half of the bins; the range is the
/// midpoint of the first bin reaching [`SILL_FRACTION`] of the sill.
pub fn estimate_autocorrelation_range(
    values: &[f64],
    coords: &[[f64; 2]],
    n_lags: usize,
    cutoff: f64,
) -> Result<RangeEstimate> {
    if values.len() < 30 {
        return Err(Error::InvalidParameter(format!(
            "range estimation needs at least 30 observations, got {}",
            values.len()
        )));
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(Error::ConstantColumn("values".into()));
    }
    let bins = semivariogram(values, coords, n_lags, cutoff)?;
    let upper = &bins[n_lags / 2..];
    let sill = upper.iter().map(|b| b.semivariance).sum::<f64>() / upper.len() as f64;
    let hit = bins
        .iter()
        .find(|b| b.semivariance >= SILL_FRACTION * sill)
        .unwrap_or_else(|| bins.last().expect("n_lags >= 1"));
    Ok(RangeEstimate {
        range: hit.midpoint,
        sill,
        bins,
    })
}
