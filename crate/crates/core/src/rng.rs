//! Counter-based random streams.
//!
//! Every sample of an ensemble draws from its own ChaCha stream selected by
//! `(master_seed, sample_index)`, so results never depend on which worker ran
//! which sample or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The stream for one sample.
pub fn sample_stream(master_seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(sample_index);
    rng
}

/// A uniform variate in `(0, 1]`.
///
/// Excluding zero keeps the comparison `x <= p` from ever selecting a colour
/// of probability zero.
pub fn unit_coin<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: Vec<f64> = (0..4).map(|_| unit_coin(&mut sample_stream(1, 0))).collect();
        let mut s0 = sample_stream(1, 0);
        let mut s1 = sample_stream(1, 1);
        let x0: Vec<f64> = (0..4).map(|_| unit_coin(&mut s0)).collect();
        let x1: Vec<f64> = (0..4).map(|_| unit_coin(&mut s1)).collect();
        assert_eq!(a[0], x0[0]);
        assert_ne!(x0, x1);
        assert!(x0.iter().chain(&x1).all(|&x| x > 0.0 && x <= 1.0));
    }
}
