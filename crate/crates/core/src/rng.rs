//! Deterministic random-number streams.
//!
//! Every stochastic component of the crate draws from a ChaCha8 stream keyed
//! by a 64-bit seed; standard-normal variates come from `rand_distr`'s
//! ziggurat sampler. With a fixed dependency set (Cargo.lock) an identical
//! seed therefore reproduces bit-identical draws on every platform.
//!
//! Independent substreams are derived by mixing the master seed with integer
//! tags through SplitMix64, so adding work items never perturbs the streams
//! of existing ones (start `k` of a multi-start solve sees the same draws no
//! matter how many further starts are requested).

use crate::linalg::{CMat, CVec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 finalizer; bijective on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent substream identified by `tags` under `seed`.
pub fn substream(seed: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(seed ^ 0xA076_1D64_78BD_642F);
    for &t in tags {
        s = splitmix64(s ^ t.wrapping_mul(0xE703_7ED1_A0B4_28DB));
    }
    s
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard circularly-symmetric complex Gaussian entries
/// (real and imaginary parts N(0, 1/2) each).
///
/// Fill order is column-major for the real parts of the whole matrix first,
/// then column-major for the imaginary parts, mirroring the construction
/// `(randn(m,n) + 1i*randn(m,n))/sqrt(2)` of array languages.
pub fn standard_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    let re = real_matrix_column_major(rng, rows, cols);
    let im = real_matrix_column_major(rng, rows, cols);
    let s = 0.5f64.sqrt();
    CMat::from_fn(rows, cols, |i, j| {
        Complex64::new(re[(i, j)] * s, im[(i, j)] * s)
    })
}

fn real_matrix_column_major(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Vector of i.i.d. standard circularly-symmetric complex Gaussian entries.
pub fn standard_complex_vector(rng: &mut ChaCha8Rng, len: usize) -> CVec {
    let m = standard_complex_matrix(rng, len, 1);
    m.column(0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let a = standard_complex_matrix(&mut stream(42), 6, 3);
        let b = standard_complex_matrix(&mut stream(42), 6, 3);
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn different_tags_give_different_streams() {
        let s1 = substream(7, &[0, 1]);
        let s2 = substream(7, &[0, 2]);
        let s3 = substream(7, &[1, 0]);
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
        assert_ne!(s2, s3);
    }

    #[test]
    fn unit_variance_and_zero_mean() {
        let n = 1000;
        let m = standard_complex_matrix(&mut stream(0), n, 100);
        let mean: Complex64 = m.iter().sum::<Complex64>() / Complex64::new((n * 100) as f64, 0.0);
        let var: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>() / (n * 100) as f64;
        assert!(mean.norm() < 0.01, "mean {mean} too far from zero");
        assert!((var - 1.0).abs() < 0.02, "variance {var} not unit");
    }

    #[test]
    fn substream_prefix_is_stable() {
        // The first draws of substream k are unaffected by requesting more
        // substreams later; this is what makes multi-start solves prefix-
        // consistent in the number of starts.
        let direct = standard_complex_vector(&mut stream(substream(3, &[5])), 4);
        let again = standard_complex_vector(&mut stream(substream(3, &[5])), 4);
        assert_eq!(
            direct.as_slice(),
            again.as_slice()
        );
    }
}
