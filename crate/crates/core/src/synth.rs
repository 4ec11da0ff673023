//! Gaussian random fields with exponential covariance and synthetic
//! classification tasks derived from them.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::dist;
use crate::rng::rng_from;
use crate::task::{Response, Task, TaskBuilder};

/// Largest field the dense sampler accepts.
pub const MAX_GRF_POINTS: usize = 3000;

const JITTER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticField {
    pub coords: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub sigma2: f64,
    pub rho: f64,
    pub nugget: f64,
    pub seed: u64,
}

/// C(d) = sigma2 * exp(-d / rho) + nugget * [d == 0].
pub fn exponential_covariance(d: f64, sigma2: f64, rho: f64, nugget: f64) -> f64 {
    let c = sigma2 * (-d / rho).exp();
    if d == 0.0 {
        c + nugget
    } else {
        c
    }
}

pub fn covariance_matrix(coords: &[[f64; 2]], sigma2: f64, rho: f64, nugget: f64) -> DMatrix<f64> {
    let n = coords.len();
    DMatrix::from_fn(n, n, |i, j| exponential_covariance(dist(coords[i], coords[j]), sigma2, rho, nugget))
}

fn check_params(n: usize, sigma2: f64, rho: f64, nugget: f64) -> Result<()> {
    if n == 0 || n > MAX_GRF_POINTS {
        return Err(Error::InvalidParameter(format!(
            "n must be in 1..={MAX_GRF_POINTS}, got {n}"
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {sigma2}")));
    }
    if !(nugget >= 0.0 && nugget.is_finite()) {
        return Err(Error::InvalidParameter(format!("nugget must be non-negative, got {nugget}")));
    }
    Ok(())
}

fn correlated_values<R: Rng>(coords: &[[f64; 2]], sigma2: f64, rho: f64, nugget: f64, rng: &mut R) -> Result<Vec<f64>> {
    let n = coords.len();
    let cov = covariance_matrix(coords, sigma2, rho, nugget);
    let chol = cov
        .clone()
        .cholesky()
        .or_else(|| (cov + DMatrix::identity(n, n) * JITTER).cholesky())
        .ok_or(Error::NotFactorizable)?;
    let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
    Ok((chol.l() * z).iter().copied().collect())
}

/// Samples a field at `n` points drawn uniformly in the unit square.
pub fn sample_grf(n: usize, sigma2: f64, rho: f64, nugget: f64, seed: u64) -> Result<SyntheticField> {
    check_params(n, sigma2, rho, nugget)?;
    let mut rng = rng_from(seed);
    let coords: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let values = correlated_values(&coords, sigma2, rho, nugget, &mut rng)?;
    Ok(SyntheticField {
        coords,
        values,
        sigma2,
        rho,
        nugget,
        seed,
    })
}

/// Samples a field at the given locations.
pub fn sample_grf_at(coords: &[[f64; 2]], sigma2: f64, rho: f64, nugget: f64, seed: u64) -> Result<SyntheticField> {
    check_params(coords.len(), sigma2, rho, nugget)?;
    let mut rng = rng_from(seed);
    let values = correlated_values(coords, sigma2, rho, nugget, &mut rng)?;
    Ok(SyntheticField {
        coords: coords.to_vec(),
        values,
        sigma2,
        rho,
        nugget,
        seed,
    })
}

/// Binary task with labels drawn as Bernoulli(logistic(value)).
///
/// Features: `signal` = value + N(0, 0.5 * sigma) and `noise1..` standard normal.
/// Coordinates are attached as `x`, `y` but are not features. Labels are "1"/"0", positive "1".
pub fn make_classification_task(field: &SyntheticField, n_noise: usize, seed: u64) -> Result<Task> {
    let n = field.values.len();
    if field.coords.len() != n {
        return Err(Error::InvalidParameter("field coords and values differ in length".into()));
    }
    let mut rng = rng_from(seed);
    let sigma = field.sigma2.sqrt();
    let signal_noise = Normal::new(0.0, 0.5 * sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let labels: Vec<String> = field
        .values
        .iter()
        .map(|&v| {
            let p = 1.0 / (1.0 + (-v).exp());
            let hit = Bernoulli::new(p).expect("logistic lies in [0, 1]").sample(&mut rng);
            if hit { "1" } else { "0" }.to_string()
        })
        .collect();
    let signal: Vec<f64> = field.values.iter().map(|v| v + signal_noise.sample(&mut rng)).collect();
    let mut builder = TaskBuilder::new("synthetic", "label", Response::Categorical(labels), field.coords.clone())
        .coord_names("x", "y")
        .positive_label("1")
        .feature("signal", signal);
    for j in 1..=n_noise {
        let col: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        builder = builder.feature(format!("noise{j}"), col);
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_at_zero_distance() {
        assert_eq!(exponential_covariance(0.0, 2.0, 0.3, 0.25), 2.25);
        assert_eq!(exponential_covariance(0.3, 2.0, 0.3, 0.25), 2.0 * (-1.0f64).exp());
        let c = covariance_matrix(&[[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]], 1.5, 0.2, 0.1);
        for i in 0..3 {
            assert_eq!(c[(i, i)], 1.6);
            for j in 0..3 {
                assert_eq!(c[(i, j)], c[(j, i)]);
            }
        }
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let a = sample_grf(50, 1.0, 0.1, 0.0, 7).unwrap();
        let b = sample_grf(50, 1.0, 0.1, 0.0, 7).unwrap();
        let c = sample_grf(50, 1.0, 0.1, 0.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn swapping_two_coordinates_swaps_covariance_rows_and_columns() {
        let coords = vec![[0.1, 0.2], [0.7, 0.3], [0.4, 0.9], [0.5, 0.5]];
        let mut swapped = coords.clone();
        swapped.swap(0, 2);
        let c = covariance_matrix(&coords, 1.0, 0.2, 0.05);
        let s = covariance_matrix(&swapped, 1.0, 0.2, 0.05);
        let perm = [2, 1, 0, 3];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s[(i, j)], c[(perm[i], perm[j])]);
            }
        }
    }

    #[test]
    fn duplicate_points_need_jitter_or_nugget() {
        let coords = vec![[0.5, 0.5], [0.5, 0.5], [0.1, 0.1]];
        let f = sample_grf_at(&coords, 1.0, 0.2, 0.0, 1).unwrap();
        assert!((f.values[0] - f.values[1]).abs() < 1e-3);
        assert!(sample_grf_at(&coords, 1.0, 0.2, 0.5, 1).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        assert!(sample_grf(0, 1.0, 0.1, 0.0, 1).is_err());
        assert!(sample_grf(MAX_GRF_POINTS + 1, 1.0, 0.1, 0.0, 1).is_err());
        assert!(sample_grf(10, 1.0, 0.0, 0.0, 1).is_err());
        assert!(sample_grf(10, -1.0, 0.1, 0.0, 1).is_err());
        assert!(sample_grf(10, 1.0, 0.1, -0.1, 1).is_err());
    }

    #[test]
    fn classification_task_shape() {
        let f = sample_grf(100, 1.0, 0.1, 0.0, 3).unwrap();
        let t = make_classification_task(&f, 2, 4).unwrap();
        assert_eq!(t.n(), 100);
        assert_eq!(t.feature_names(), ["signal", "noise1", "noise2"]);
        assert!(!t.coords_as_features());
        assert_eq!(t.positive_label(), Some("1"));
    }
}
