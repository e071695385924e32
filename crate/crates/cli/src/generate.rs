//! Seeded synthetic agent dynamics.
//!
//! Stand-in for a physical vehicle model: Gaussian `A` rescaled to a target
//! spectral radius below one, so the zero gain is an admissible starting
//! policy, and Gaussian `B`. Pairs that fail the controllability test are
//! redrawn from a perturbed seed.

use dql_core::linalg;
use dql_core::model::{controllability_check, LtiModel};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

pub const DEFAULT_SPECTRAL_RADIUS: f64 = 0.9;
pub const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("spectral radius target must lie in (0, 1), got {0}")]
    Target(f64),
    #[error("state and input dimensions must be at least 1")]
    EmptyDimension,
    #[error("no controllable pair found from seed {seed} after {attempts} attempts")]
    NotControllable { seed: u64, attempts: u64 },
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Deterministic in `seed`. The returned `A` has `ρ(A) = target` to within
/// `1e-9` and `(A, B)` passes [`controllability_check`].
pub fn generate_system(
    seed: u64,
    n: usize,
    m: usize,
    target: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>), GenerateError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(GenerateError::Target(target));
    }
    if n == 0 || m == 0 {
        return Err(GenerateError::EmptyDimension);
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let mut a = gaussian(&mut rng, n, n);
        let b = gaussian(&mut rng, n, m);
        let rho = linalg::spectral_radius(&a);
        if rho.is_nan() || rho <= 1e-8 {
            continue;
        }
        a *= target / rho;
        if (linalg::spectral_radius(&a) - target).abs() > 1e-9 {
            continue;
        }
        let Ok(model) = LtiModel::new(a, b) else { continue };
        if controllability_check(&model) {
            return Ok((model.a().clone(), model.b().clone()));
        }
    }
    Err(GenerateError::NotControllable {
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_pair() {
        assert_eq!(generate_system(3, 5, 3, 0.9).unwrap(), generate_system(3, 5, 3, 0.9).unwrap());
        assert_ne!(generate_system(3, 5, 3, 0.9).unwrap(), generate_system(4, 5, 3, 0.9).unwrap());
    }

    #[test]
    fn radius_and_controllability_hold() {
        for seed in 0..20 {
            let (a, b) = generate_system(seed, 4, 2, 0.9).unwrap();
            assert!((linalg::spectral_radius(&a) - 0.9).abs() < 1e-9);
            assert!(controllability_check(&LtiModel::new(a, b).unwrap()));
        }
    }

    #[test]
    fn scalar_system_has_exact_radius() {
        let (a, _) = generate_system(1, 1, 1, 0.5).unwrap();
        assert!((a[(0, 0)].abs() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_targets_are_rejected() {
        for t in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(generate_system(0, 2, 1, t), Err(GenerateError::Target(_))));
        }
        assert_eq!(generate_system(0, 0, 1, 0.9), Err(GenerateError::EmptyDimension));
    }
}
