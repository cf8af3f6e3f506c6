//! Incremental evaluation of partial sums and their running totals.
//!
//! For a coefficient vector `c` the sweep walks `n = 0, 1, 2, ...` and keeps,
//! at every point of a block of cylinders,
//!
//! * `partial = S_n = sum_{j<n} c_j psi_j`
//! * `total   = sum_{j<n} S_j`
//!
//! so one pass yields every Fejér mean `sigma_n` (and, with `c = 1`, every
//! Dirichlet and Fejér kernel) for `n` up to a bound, at cost `O(points)` per
//! step instead of one full transform per `n`. Character values are produced
//! by an odometer over the digits of `n` with cached suffix products, so only
//! the coordinates whose digit changed are recomputed.

use std::ops::Range;

use num_complex::Complex64;

use crate::character::root_table;
use crate::group::GeneratorSequence;
use crate::kernels::Convention;
use crate::par;

/// Points handled by one sweep task.
pub const BLOCK_POINTS: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub struct CesaroSweep<'a> {
    coeffs: &'a [Complex64],
    radices: Vec<usize>,
    roots: Vec<Vec<Complex64>>,
    /// Axis-major point digits: `digits[j * len + p]`.
    digits: Vec<usize>,
    len: usize,
    points: Range<usize>,
    /// `levels[j][p] = prod_{i >= j} r_i(x_p)^{n_i}`, valid for `j >= stale`.
    levels: Vec<Vec<Complex64>>,
    stale: usize,
    odometer: Vec<usize>,
    n: usize,
    partial: Vec<Complex64>,
    total: Vec<Complex64>,
}

impl<'a> CesaroSweep<'a> {
    /// Sweep over the rank-`rank` cylinders with canonical indices in `points`.
    /// `coeffs` may be shorter than `M_rank`; missing coefficients are zero.
    pub fn new(
        g: &GeneratorSequence,
        rank: usize,
        coeffs: &'a [Complex64],
        points: Range<usize>,
    ) -> Self {
        assert!(points.end <= g.size(rank), "points beyond M_rank");
        assert!(coeffs.len() <= g.size(rank), "coefficients beyond M_rank");
        let len = points.len();
        let radices = g.radices()[..rank].to_vec();
        let mut digits = vec![0usize; rank * len];
        for (p, idx) in points.clone().enumerate() {
            let mut rest = idx;
            for (j, &m) in radices.iter().enumerate() {
                digits[j * len + p] = rest % m;
                rest /= m;
            }
        }
        Self {
            coeffs,
            roots: radices.iter().map(|&m| root_table(m)).collect(),
            radices,
            digits,
            len,
            points,
            levels: vec![vec![ONE; len]; rank + 1],
            stale: 0,
            odometer: vec![0; rank],
            n: 0,
            partial: vec![ZERO; len],
            total: vec![ZERO; len],
        }
    }

    /// Number of characters folded in so far.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> Range<usize> {
        self.points.clone()
    }

    /// `S_n` at the block's points.
    pub fn partial(&self) -> &[Complex64] {
        &self.partial
    }

    /// `sum_{j<n} S_j` at the block's points.
    pub fn total(&self) -> &[Complex64] {
        &self.total
    }

    /// `n sigma_n` at local point `p` (for `n >= 1`).
    #[inline]
    pub fn scaled_mean(&self, p: usize, conv: Convention) -> Complex64 {
        match conv {
            Convention::Lagged => self.total[p],
            Convention::Classical => self.total[p] + self.partial[p],
        }
    }

    /// `sigma_n` at local point `p` (for `n >= 1`).
    #[inline]
    pub fn mean(&self, p: usize, conv: Convention) -> Complex64 {
        self.scaled_mean(p, conv) / self.n as f64
    }

    /// Moves from `n` to `n + 1`.
    pub fn advance(&mut self) {
        for (t, s) in self.total.iter_mut().zip(&self.partial) {
            *t += s;
        }
        let n = self.n;
        if let Some(&c) = self.coeffs.get(n) {
            if c != ZERO {
                self.refresh_levels();
                for (s, psi) in self.partial.iter_mut().zip(&self.levels[0]) {
                    *s += c * psi;
                }
            }
        }
        self.n += 1;
        if self.n < self.coeffs.len() {
            self.tick();
        }
    }

    /// Advances until `n == target`.
    pub fn advance_to(&mut self, target: usize) {
        while self.n < target {
            self.advance();
        }
    }

    fn tick(&mut self) {
        for j in 0..self.odometer.len() {
            self.odometer[j] += 1;
            if self.odometer[j] < self.radices[j] {
                self.stale = self.stale.max(j + 1);
                return;
            }
            self.odometer[j] = 0;
        }
        unreachable!("odometer advanced past M_rank");
    }

    fn refresh_levels(&mut self) {
        for j in (0..self.stale).rev() {
            let (lower, upper) = self.levels.split_at_mut(j + 1);
            let (dst, src) = (&mut lower[j], &upper[0]);
            let d = self.odometer[j];
            if d == 0 {
                dst.copy_from_slice(src);
                continue;
            }
            let m = self.radices[j];
            let roots = &self.roots[j];
            let xs = &self.digits[j * self.len..(j + 1) * self.len];
            for ((out, &above), &x) in dst.iter_mut().zip(src.iter()).zip(xs) {
                *out = above * roots[(d * x) % m];
            }
        }
        self.stale = 0;
    }
}

/// Runs `task` on one sweep per block of [`BLOCK_POINTS`] cylinders and
/// returns the per-block results in block order.
pub fn sweep_blocks<R, F>(
    g: &GeneratorSequence,
    rank: usize,
    coeffs: &[Complex64],
    task: F,
) -> Vec<R>
where
    R: Send,
    F: Fn(CesaroSweep<'_>) -> R + Sync + Send,
{
    let size = g.size(rank);
    let blocks = size.div_ceil(BLOCK_POINTS);
    par::map_range(blocks, |b| {
        let lo = b * BLOCK_POINTS;
        let hi = (lo + BLOCK_POINTS).min(size);
        task(CesaroSweep::new(g, rank, coeffs, lo..hi))
    })
}
