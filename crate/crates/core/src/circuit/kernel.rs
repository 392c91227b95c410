//! In-place amplitude updates by bit-mask stride iteration.
//!
//! Qubit `q` of an `n`-qubit register sits at bit position `n − 1 − q`.
//! Every kernel computes each output amplitude from the same inputs in the
//! same order regardless of how the work is split, so results do not depend
//! on the thread count.

use crate::linalg::OperatorMatrix;
use crate::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Registers smaller than this are always updated sequentially.
pub const PAR_THRESHOLD: usize = 1 << 14;

#[inline]
pub(crate) fn bit_position(n_qubits: usize, q: usize) -> usize {
    n_qubits - 1 - q
}

fn pairs<F>(lo: &mut [C64], hi: &mut [C64], f: &F)
where
    F: Fn(&mut C64, &mut C64) + Sync,
{
    #[cfg(feature = "parallel")]
    if lo.len() >= PAR_THRESHOLD / 2 {
        lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| f(a, b));
        return;
    }
    lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| f(a, b));
}

fn chunked<F>(amps: &mut [C64], chunk: usize, f: F)
where
    F: Fn(&mut [C64]) + Sync + Send,
{
    if amps.len() >= PAR_THRESHOLD && amps.len() / chunk >= 2 {
        crate::par::for_each_chunk_mut(amps, chunk, f);
    } else {
        amps.chunks_mut(chunk).for_each(f);
    }
}

pub fn apply_single(amps: &mut [C64], n_qubits: usize, q: usize, m: &[[C64; 2]; 2]) {
    let stride = 1usize << bit_position(n_qubits, q);
    let update = |a: &mut C64, b: &mut C64| {
        let (x, y) = (*a, *b);
        *a = m[0][0] * x + m[0][1] * y;
        *b = m[1][0] * x + m[1][1] * y;
    };
    chunked(amps, 2 * stride, |chunk| {
        let (lo, hi) = chunk.split_at_mut(stride);
        pairs(lo, hi, &update);
    });
}

fn quads<F>(c0: &mut [C64], c1: &mut [C64], stride_lo: usize, f: &F)
where
    F: Fn([&mut C64; 4]) + Sync,
{
    let body = |(x0, x1): (&mut [C64], &mut [C64])| {
        let (a00, a01) = x0.split_at_mut(stride_lo);
        let (a10, a11) = x1.split_at_mut(stride_lo);
        for (((p, q), r), s) in a00.iter_mut().zip(a01.iter_mut()).zip(a10.iter_mut()).zip(a11.iter_mut()) {
            f([p, q, r, s]);
        }
    };
    #[cfg(feature = "parallel")]
    if c0.len() >= PAR_THRESHOLD / 2 && c0.len() / (2 * stride_lo) >= 2 {
        c0.par_chunks_mut(2 * stride_lo).zip(c1.par_chunks_mut(2 * stride_lo)).for_each(body);
        return;
    }
    c0.chunks_mut(2 * stride_lo).zip(c1.chunks_mut(2 * stride_lo)).for_each(body);
}

/// `m` acts on local index `(bit_a << 1) | bit_b`.
pub fn apply_two(amps: &mut [C64], n_qubits: usize, a: usize, b: usize, m: &[[C64; 4]; 4]) {
    let (pa, pb) = (bit_position(n_qubits, a), bit_position(n_qubits, b));
    // Reorder so the local index is (high bit, low bit).
    let (p_hi, p_lo, local) = if pa > pb {
        (pa, pb, *m)
    } else {
        let perm = [0usize, 2, 1, 3];
        let mut swapped = [[C64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                swapped[r][c] = m[perm[r]][perm[c]];
            }
        }
        (pb, pa, swapped)
    };
    let (s_hi, s_lo) = (1usize << p_hi, 1usize << p_lo);
    let update = |v: [&mut C64; 4]| {
        let x = [*v[0], *v[1], *v[2], *v[3]];
        for (r, out) in v.into_iter().enumerate() {
            *out = local[r][0] * x[0] + local[r][1] * x[1] + local[r][2] * x[2] + local[r][3] * x[3];
        }
    };
    chunked(amps, 2 * s_hi, |chunk| {
        let (c0, c1) = chunk.split_at_mut(s_hi);
        quads(c0, c1, s_lo, &update);
    });
}

/// General (controlled) unitary on an arbitrary target list, out of place.
pub fn apply_dense(amps: &mut [C64], n_qubits: usize, control: Option<usize>, targets: &[usize], m: &OperatorMatrix) {
    let k = targets.len();
    let positions: Vec<usize> = targets.iter().map(|&q| bit_position(n_qubits, q)).collect();
    let target_mask: usize = positions.iter().map(|p| 1usize << p).sum();
    let control_mask = control.map(|c| 1usize << bit_position(n_qubits, c));
    let local_of = |idx: usize| -> usize {
        positions.iter().fold(0usize, |acc, &p| (acc << 1) | ((idx >> p) & 1))
    };
    let with_local = |base: usize, local: usize| -> usize {
        positions.iter().enumerate().fold(base, |acc, (i, &p)| acc | (((local >> (k - 1 - i)) & 1) << p))
    };
    let src = amps.to_vec();
    let body = |idx: usize, out: &mut C64| {
        if let Some(cm) = control_mask {
            if idx & cm == 0 {
                return;
            }
        }
        let row = local_of(idx);
        let base = idx & !target_mask;
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..(1usize << k) {
            acc += m[(row, col)] * src[with_local(base, col)];
        }
        *out = acc;
    };
    if amps.len() >= PAR_THRESHOLD {
        crate::par::for_each_mut(amps, body);
    } else {
        amps.iter_mut().enumerate().for_each(|(i, x)| body(i, x));
    }
}
