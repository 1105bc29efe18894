//! In-place fast Walsh–Hadamard transform.
//!
//! The Hamiltonian ω Σ_j σx^(j) is diagonalised by the d-fold Hadamard
//! transform, and a density matrix stored row-major as a 4^d vector is
//! conjugated by it with a single transform over all 2d index bits.

use std::ops::{Add, Sub};

// 2^13 complex entries (128 KiB) per cache block.
const BLOCK: usize = 1 << 13;

/// Unnormalised transform: `out[k] = Σ_i (-1)^{popcount(i & k)} data[i]`.
pub(crate) fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = data.len();
    assert!(
        n.is_power_of_two(),
        "transform length must be a power of two"
    );
    let block = BLOCK.min(n);
    for chunk in data.chunks_mut(block) {
        butterflies(chunk, 1, block);
    }
    butterflies(data, block, n);
}

fn butterflies<T>(data: &mut [T], start: usize, end: usize)
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let mut half = start;
    while half < end {
        for pair in data.chunks_mut(2 * half) {
            let (lo, hi) = pair.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}
