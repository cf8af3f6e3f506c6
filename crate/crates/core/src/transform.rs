//! Vilenkin-Fourier transform over `Z_{m_0} x ... x Z_{m_{N-1}}`.
//!
//! The characters factor coordinatewise, so the transform is a sequence of
//! length-`m_k` DFTs along each axis of the canonical layout (axis `k` has
//! stride `M_k`). For `m = 2` every pass is a Walsh-Hadamard butterfly.

use num_complex::Complex64;

use crate::character::{unit_root, vilenkin};
use crate::group::{GeneratorSequence, Point};
use crate::par;
use crate::step::{Spectrum, StepFunction};

/// Blocks up to this many elements are processed whole by one task.
const SMALL_BLOCK: usize = 4096;
/// Column tile width for the large-block passes.
const TILE: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Multiplies by `conj(psi_n)` (analysis).
    Forward,
    /// Multiplies by `psi_n` (synthesis).
    Inverse,
}

/// Coefficients `f^(n) = int f conj(psi_n) dmu`, computed in
/// `O(M_N * sum_k m_k)` operations.
pub fn forward(f: &StepFunction) -> Spectrum {
    let mut data = f.values().to_vec();
    transform_in_place(f.group(), f.rank(), &mut data, Direction::Forward);
    let scale = 1.0 / data.len() as f64;
    par::for_each_chunk_mut(&mut data, par::SUM_BLOCK, |_, chunk| {
        chunk.iter_mut().for_each(|v| *v *= scale)
    });
    Spectrum::new(f.group(), f.rank(), data).expect("length preserved")
}

/// `sum_n f^(n) psi_n`, the exact inverse of [`forward`].
pub fn inverse(s: &Spectrum) -> StepFunction {
    let mut data = s.coeffs().to_vec();
    transform_in_place(s.group(), s.rank(), &mut data, Direction::Inverse);
    StepFunction::new(s.group(), s.rank(), data).expect("length preserved")
}

/// Direct `O(M_N^2)` evaluation of the coefficient integrals, one character
/// value at a time. Kept as the reference for [`forward`].
pub fn forward_naive(f: &StepFunction) -> Spectrum {
    let g = f.group();
    let rank = f.rank();
    let size = g.size(rank);
    let points: Vec<Point> = (0..size)
        .map(|i| Point::from_index(g, rank, i).expect("index below M_N"))
        .collect();
    let values = f.values();
    let coeffs = par::map_range(size, |n| {
        let sum = points
            .iter()
            .zip(values)
            .fold(Complex64::new(0.0, 0.0), |acc, (x, &v)| {
                acc + v * vilenkin(g, n, x).expect("n below M_N").conj()
            });
        sum / size as f64
    });
    Spectrum::new(g, rank, coeffs).expect("length M_N")
}

/// Unnormalized separable transform of a length-`M_rank` buffer.
pub fn transform_in_place(
    g: &GeneratorSequence,
    rank: usize,
    data: &mut [Complex64],
    dir: Direction,
) {
    assert_eq!(data.len(), g.size(rank), "buffer length must be M_rank");
    for axis in 0..rank {
        let radix = g.radix(axis);
        let twiddles: Vec<Complex64> = (0..radix)
            .map(|u| match dir {
                Direction::Forward => unit_root(radix - u, radix),
                Direction::Inverse => unit_root(u, radix),
            })
            .collect();
        axis_pass(data, g.size(axis), radix, &twiddles);
    }
}

fn axis_pass(data: &mut [Complex64], stride: usize, radix: usize, twiddles: &[Complex64]) {
    let block = stride * radix;
    if block <= SMALL_BLOCK {
        let per_task = (SMALL_BLOCK / block).max(1) * block;
        par::for_each_chunk_mut(data, per_task, |_, chunk| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); 2 * radix];
            for b in chunk.chunks_mut(block) {
                if radix == 2 {
                    let (lo, hi) = b.split_at_mut(stride);
                    butterfly2(lo, hi);
                    continue;
                }
                for col in 0..stride {
                    let (input, output) = scratch.split_at_mut(radix);
                    for (j, v) in input.iter_mut().enumerate() {
                        *v = b[col + j * stride];
                    }
                    dft(twiddles, input, output);
                    for (j, &v) in output.iter().enumerate() {
                        b[col + j * stride] = v;
                    }
                }
            }
        });
        return;
    }

    // Few large blocks: split the rows of each block into column tiles so
    // that independent columns can be processed concurrently.
    let mut tiles: Vec<Vec<&mut [Complex64]>> = Vec::new();
    for b in data.chunks_mut(block) {
        let mut rows: Vec<_> = b.chunks_mut(stride).map(|r| r.chunks_mut(TILE)).collect();
        loop {
            let tile: Vec<&mut [Complex64]> = rows.iter_mut().filter_map(|it| it.next()).collect();
            if tile.is_empty() {
                break;
            }
            tiles.push(tile);
        }
    }
    par::for_each_mut(&mut tiles, |tile| {
        if radix == 2 {
            let (lo, hi) = tile.split_at_mut(1);
            butterfly2(lo[0], hi[0]);
            return;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); 2 * radix];
        let (input, output) = scratch.split_at_mut(radix);
        for col in 0..tile[0].len() {
            for (j, v) in input.iter_mut().enumerate() {
                *v = tile[j][col];
            }
            dft(twiddles, input, output);
            for (j, &v) in output.iter().enumerate() {
                tile[j][col] = v;
            }
        }
    });
}

#[inline]
fn butterfly2(lo: &mut [Complex64], hi: &mut [Complex64]) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

/// `output[u] = sum_j input[j] * twiddles[j u mod m]`.
#[inline]
fn dft(twiddles: &[Complex64], input: &[Complex64], output: &mut [Complex64]) {
    let radix = input.len();
    for (u, out) in output.iter_mut().enumerate() {
        let mut acc = input[0];
        for (j, &v) in input.iter().enumerate().skip(1) {
            acc += v * twiddles[(j * u) % radix];
        }
        *out = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::character;

    const TOL: f64 = 1e-10;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pseudo_random(g: &GeneratorSequence, rank: usize, seed: u64) -> StepFunction {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let values = (0..g.size(rank))
            .map(|_| Complex64::new(next(), next()))
            .collect();
        StepFunction::new(g, rank, values).unwrap()
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = GeneratorSequence::periodic(&[2, 3], 5).unwrap();
        let one = StepFunction::constant(&g, 5, c(1.0)).unwrap();
        let s = forward(&one);
        assert!((s.coeff(0) - c(1.0)).norm() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn indicator_of_first_half() {
        let w = GeneratorSequence::walsh(1).unwrap();
        let f = StepFunction::from_real(&w, 1, &[1.0, 0.0]).unwrap();
        let oracle = forward_naive(&f);
        assert_eq!(oracle.coeffs(), &[c(0.5), c(0.5)]);
        assert_eq!(forward(&f).coeffs(), oracle.coeffs());
        let back = inverse(&Spectrum::new(&w, 1, vec![c(0.5), c(0.5)]).unwrap());
        assert_eq!(back.values(), &[c(1.0), c(0.0)]);
    }

    #[test]
    fn unit_coefficient_inverts_to_constant() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let f = inverse(&Spectrum::unit(&w, 4, 0).unwrap());
        assert!(f.values().iter().all(|&v| v == c(1.0)));
    }

    #[test]
    fn orthonormality_exhaustive() {
        for g in [
            GeneratorSequence::walsh(8).unwrap(),
            GeneratorSequence::new(&[2, 3, 2, 3], 4).unwrap(),
            GeneratorSequence::new(&[3, 5, 4], 3).unwrap(),
        ] {
            let rank = g.n_max();
            for j in 0..g.size(rank) {
                let s = forward(&character(&g, j, rank).unwrap());
                for (n, v) in s.coeffs().iter().enumerate() {
                    let want = if n == j { 1.0 } else { 0.0 };
                    assert!((v - c(want)).norm() < TOL, "j={j} n={n} {v}");
                }
            }
        }
    }

    #[test]
    fn fast_matches_naive() {
        for (g, seeds) in [
            (GeneratorSequence::walsh(10).unwrap(), 3),
            (GeneratorSequence::periodic(&[2, 3], 6).unwrap(), 3),
            (GeneratorSequence::new(&[5, 3, 7], 3).unwrap(), 3),
        ] {
            for seed in 0..seeds {
                let f = pseudo_random(&g, g.n_max(), seed);
                let d = forward(&f).max_distance(&forward_naive(&f)).unwrap();
                assert!(d < TOL, "{d}");
            }
        }
    }

    #[test]
    fn large_blocks_use_tiles() {
        // 2^14 elements: the top axes exceed SMALL_BLOCK.
        let g = GeneratorSequence::walsh(14).unwrap();
        let f = pseudo_random(&g, 14, 9);
        let back = inverse(&forward(&f));
        assert!(back.sup_distance(&f).unwrap() < TOL);
        let s = forward(&f);
        assert!((s.energy() - f.abs().map(|v| v * v).integral().re).abs() < 1e-10);
    }

    #[test]
    fn parseval_and_round_trip_mixed() {
        let g = GeneratorSequence::periodic(&[2, 3], 6).unwrap();
        for seed in 0..10 {
            let f = pseudo_random(&g, 6, seed);
            let s = forward(&f);
            let l2 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / f.len() as f64;
            assert!(((s.energy() - l2) / l2).abs() < TOL);
            assert!(inverse(&s).sup_distance(&f).unwrap() < TOL);
        }
    }

    #[test]
    fn finite_spectrum_of_coarse_function() {
        // A rank-3 function refined to rank 6 has no coefficients at n >= M_3.
        let g = GeneratorSequence::periodic(&[2, 3], 6).unwrap();
        let f = pseudo_random(&g, 3, 4).refine(6).unwrap();
        let s = forward(&f);
        assert!(s.coeffs()[g.size(3)..].iter().all(|v| v.norm() < 1e-12));
    }
}
