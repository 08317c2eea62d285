//! Synthetic datasets for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{BoolDataset, Provenance};
use crate::error::{Error, Result};

/// Uniform random bits with label `x_1 XOR x_2`; a `noise` fraction of the
/// labels is flipped.
pub fn noisy_xor(examples: usize, features: usize, noise: f64, seed: u64) -> Result<BoolDataset> {
    if features < 2 {
        return Err(Error::Config(
            "noisy XOR needs at least two features".into(),
        ));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Config(format!("noise {noise} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = BoolDataset::new(
        features,
        2,
        Provenance::Synthetic {
            name: format!("noisy-xor(noise={noise})"),
        },
    )?;
    let mut row = vec![0u8; features];
    for _ in 0..examples {
        for b in row.iter_mut() {
            *b = rng.random_range(0..=1);
        }
        let mut label = (row[0] ^ row[1]) as usize;
        if rng.random::<f64>() < noise {
            label ^= 1;
        }
        ds.push(&row, label)?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_labels_are_xor() {
        let ds = noisy_xor(200, 5, 0.0, 1).unwrap();
        for i in 0..ds.len() {
            let r = ds.row(i);
            assert_eq!(ds.label(i), (r[0] ^ r[1]) as usize);
        }
    }

    #[test]
    fn noise_rate_is_roughly_respected() {
        let ds = noisy_xor(5000, 4, 0.1, 2).unwrap();
        let flipped = (0..ds.len())
            .filter(|&i| {
                let r = ds.row(i);
                ds.label(i) != (r[0] ^ r[1]) as usize
            })
            .count();
        assert!((400..600).contains(&flipped), "{flipped}");
    }

    #[test]
    fn same_seed_same_bytes() {
        assert_eq!(
            noisy_xor(50, 12, 0.1, 9).unwrap(),
            noisy_xor(50, 12, 0.1, 9).unwrap()
        );
    }
}
