use rand::Rng;

use super::{NetError, Result};
use crate::seed;

/// Salt-and-pepper corruption: each entry independently, with probability
/// `p`, becomes 0 or 1 with equal odds.
pub fn salt_pepper(vector: &[f64], p: f64, seed: u64) -> Result<Vec<f64>> {
    salt_pepper_with(vector, p, &mut seed::rng(seed))
}

pub fn salt_pepper_with(vector: &[f64], p: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NetError::OutOfDomain(p));
    }
    if let Some(&bad) = vector.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(NetError::OutOfDomain(bad));
    }
    Ok(vector
        .iter()
        .map(|&v| {
            if rng.random::<f64>() < p {
                if rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            }
        })
        .collect())
}
