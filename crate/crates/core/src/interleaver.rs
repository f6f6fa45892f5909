//! Seeded random interleavers (uniform permutations via Fisher–Yates).

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bijection on `{0..len-1}`, reconstructible bit-exactly from
/// `(len, seed)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    seed: u64,
    permutation: Vec<u32>,
    inverse: Vec<u32>,
}

impl Interleaver {
    /// Uniform random permutation of length `len` drawn from a ChaCha8
    /// stream seeded with `seed`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..len as u32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Fisher–Yates, back to front.
        for i in (1..len).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        Self::from_permutation(perm, seed)
    }

    /// Identity permutation (useful for tests and golden vectors).
    pub fn identity(len: usize) -> Self {
        Self::from_permutation((0..len as u32).collect(), 0)
    }

    fn from_permutation(permutation: Vec<u32>, seed: u64) -> Self {
        let mut inverse = vec![0u32; permutation.len()];
        for (i, &p) in permutation.iter().enumerate() {
            inverse[p as usize] = i as u32;
        }
        Self {
            seed,
            permutation,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(Error::Usage(format!(
                "interleave of {} elements with a length-{} permutation",
                x.len(),
                self.len()
            )));
        }
        Ok(self.permutation.iter().map(|&p| x[p as usize]).collect())
    }

    /// Inverse of [`interleave`](Self::interleave): `out[perm[i]] = x[i]`.
    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(Error::Usage(format!(
                "deinterleave of {} elements with a length-{} permutation",
                x.len(),
                self.len()
            )));
        }
        Ok(self.inverse.iter().map(|&p| x[p as usize]).collect())
    }
}
