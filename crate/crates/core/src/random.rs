//! Seeded generators of random instances for property sweeps.
//!
//! Every generator takes the RNG explicitly so sweeps are reproducible.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distribution::{Channel, Distribution};

/// Deterministic generator for instance `index` of sweep `stream`.
pub fn instance_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Full-support distribution with i.i.d. uniform weights on `(0, 1]`.
pub fn random_distribution<R: Rng>(rng: &mut R, size: usize) -> Distribution {
    random_distribution_floor(rng, size, 0.0)
}

/// Weights uniform on `[floor, 1]` (strictly positive), then normalized.
pub fn random_distribution_floor<R: Rng>(rng: &mut R, size: usize, floor: f64) -> Distribution {
    let w: Vec<f64> = (0..size)
        .map(|_| floor + (1.0 - floor) * (1.0 - rng.random::<f64>()))
        .collect();
    Distribution::from_weights(&w).expect("positive weights")
}

/// Each symbol is dropped from the support with probability `zero_prob`;
/// at least one symbol always keeps positive mass.
pub fn random_sparse_distribution<R: Rng>(rng: &mut R, size: usize, zero_prob: f64) -> Distribution {
    let mut w: Vec<f64> = (0..size)
        .map(|_| {
            if rng.random::<f64>() < zero_prob {
                0.0
            } else {
                1.0 - rng.random::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        let k = rng.random_range(0..size);
        w[k] = 1.0;
    }
    Distribution::from_weights(&w).expect("positive mass")
}

pub fn random_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    Channel::new((0..inputs).map(|_| random_distribution(rng, outputs)).collect()).expect("consistent shape")
}

pub fn random_sparse_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize, zero_prob: f64) -> Channel {
    Channel::new(
        (0..inputs)
            .map(|_| random_sparse_distribution(rng, outputs, zero_prob))
            .collect(),
    )
    .expect("consistent shape")
}

/// Uniform interior point of the probability simplex restricted to `face`
/// (entries outside `face` are zero).
pub fn random_face_point<R: Rng>(rng: &mut R, size: usize, face: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; size];
    let mut total = 0.0;
    for &i in face {
        // exponential weights give a uniform Dirichlet point
        let e = -(1.0 - rng.random::<f64>()).ln() + 1e-3;
        v[i] = e;
        total += e;
    }
    v.iter_mut().for_each(|x| *x /= total);
    v
}
