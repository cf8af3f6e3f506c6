//! Dirichlet and Fejér kernels, their closed forms on `I_n` cylinders, and
//! the kernel estimates used by the boundedness argument.
//!
//! Two summation conventions are supported for the Fejér kernel:
//!
//! * [`Convention::Lagged`]: `K_n = (1/n) sum_{k=0}^{n-1} D_k`, with `D_0 = 0`;
//! * [`Convention::Classical`]: `K_n = (1/n) sum_{k=1}^{n} D_k`.
//!
//! They differ by exactly `D_n / n`, so they agree wherever `D_n` vanishes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cesaro::sweep_blocks;
use crate::character::unit_root;
use crate::error::{Error, Result};
use crate::group::{GeneratorSequence, IndexSetSpec, Point};
use crate::step::{Spectrum, StepFunction};
use crate::transform::inverse;

/// Right sides below this are treated as zero by the pointwise kernel
/// comparison.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Lagged,
    Classical,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::Lagged, Convention::Classical];

    /// Weight of coefficient `j` in the `n`-th Fejér mean.
    pub fn multiplier(self, n: usize, j: usize) -> f64 {
        let n_f = n as f64;
        match self {
            Convention::Lagged if j + 1 < n => (n - 1 - j) as f64 / n_f,
            Convention::Classical if j < n => (n - j) as f64 / n_f,
            _ => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Lagged => "lagged",
            Convention::Classical => "classical",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lagged" => Ok(Convention::Lagged),
            "classical" => Ok(Convention::Classical),
            other => Err(Error::Parse(format!("unknown convention '{other}'"))),
        }
    }
}

fn check_index(g: &GeneratorSequence, n: usize, rank: usize) -> Result<()> {
    g.check_rank(rank)?;
    if n > g.size(rank) {
        return Err(Error::Rank {
            needed: g.rank_for(n)?,
            available: rank,
        });
    }
    Ok(())
}

/// `D_n = sum_{k<n} psi_k` at rank `rank` (`n <= M_rank`). `D_0` is the zero
/// function.
pub fn dirichlet(g: &GeneratorSequence, n: usize, rank: usize) -> Result<StepFunction> {
    check_index(g, n, rank)?;
    if n == 0 {
        log::debug!("D_0 requested: returning the empty sum");
    }
    let s = Spectrum::from_fn(g, rank, |j| {
        Complex64::new(if j < n { 1.0 } else { 0.0 }, 0.0)
    })?;
    Ok(inverse(&s))
}

/// `D_{M_n}` in indicator form: `M_n` on `I_n`, zero elsewhere.
pub fn dirichlet_closed(g: &GeneratorSequence, n: usize, rank: usize) -> Result<StepFunction> {
    g.check_rank(rank)?;
    if n > rank {
        return Err(Error::Rank {
            needed: n,
            available: rank,
        });
    }
    let period = g.size(n);
    let height = Complex64::new(period as f64, 0.0);
    StepFunction::from_index_fn(g, rank, |c| {
        if c % period == 0 {
            height
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Fejér kernel `K_n` at rank `rank`, `1 <= n <= M_rank`.
pub fn fejer_kernel(
    g: &GeneratorSequence,
    n: usize,
    rank: usize,
    conv: Convention,
) -> Result<StepFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter("Fejér kernel needs n >= 1".into()));
    }
    check_index(g, n, rank)?;
    let s = Spectrum::from_fn(g, rank, |j| Complex64::new(conv.multiplier(n, j), 0.0))?;
    Ok(inverse(&s))
}

/// Closed form of `K_{M_A}(z)` off `I_A`: with `t` the first nonzero
/// coordinate of `z`, the value is `M_t / (1 - r_t(z))` when `z - z_t e_t`
/// lies in `I_A` and zero otherwise. Convention independent.
pub fn fejer_closed(g: &GeneratorSequence, a: usize, z: &Point) -> Result<Complex64> {
    if z.rank() < a {
        return Err(Error::Rank {
            needed: a,
            available: z.rank(),
        });
    }
    g.check_rank(z.rank())?;
    let t = match z.first_nonzero() {
        Some(t) if t < a => t,
        _ => return Err(Error::Domain(format!("point lies in I_{a}"))),
    };
    if z.digits()[t + 1..a].iter().any(|&d| d != 0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = unit_root(z.digit(t), g.radix(t));
    Ok(Complex64::new(g.size(t) as f64, 0.0) / (Complex64::new(1.0, 0.0) - r))
}

/// `int |K_n| dmu`.
pub fn kernel_l1_norm(
    g: &GeneratorSequence,
    n: usize,
    rank: usize,
    conv: Convention,
) -> Result<f64> {
    Ok(fejer_kernel(g, n, rank, conv)?.abs().integral().re)
}

/// `int |K_n| dmu` for every `n = 1..=n_max` (entry `n - 1`), in one sweep.
pub fn kernel_l1_scan(
    g: &GeneratorSequence,
    n_max: usize,
    rank: usize,
    conv: Convention,
) -> Result<Vec<f64>> {
    check_index(g, n_max, rank)?;
    let ones = vec![Complex64::new(1.0, 0.0); g.size(rank)];
    let blocks = sweep_blocks(g, rank, &ones, |mut sweep| {
        let mut sums = vec![0.0; n_max];
        for n in 1..=n_max {
            sweep.advance();
            let len = sweep.points().len();
            sums[n - 1] = (0..len).map(|p| sweep.mean(p, conv).norm()).sum::<f64>();
        }
        sums
    });
    let cell = 1.0 / g.size(rank) as f64;
    Ok((0..n_max)
        .map(|i| blocks.iter().map(|b| b[i]).sum::<f64>() * cell)
        .collect())
}

/// Minimal constant in `n |K_n(x)| <= c sum_{A=0}^{|n|} M_A |K_{M_A}(x)|`
/// over all rank-`N` cylinders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominationMeasure {
    pub n: usize,
    /// Largest pointwise ratio left/right where the right side is nonzero.
    pub constant: f64,
    /// Points with a vanishing right side but a nonzero left side.
    pub zero_rhs_violations: usize,
}

/// Direct evaluation through explicitly built kernels.
pub fn domination_constant(
    g: &GeneratorSequence,
    n: usize,
    rank: usize,
    conv: Convention,
) -> Result<DominationMeasure> {
    let kn = fejer_kernel(g, n, rank, conv)?;
    let order = g.order(n);
    let mut rhs = vec![0.0; g.size(rank)];
    for a in 0..=order {
        let ka = fejer_kernel(g, g.size(a), rank, conv)?;
        let ma = g.size(a) as f64;
        for (r, v) in rhs.iter_mut().zip(ka.values()) {
            *r += ma * v.norm();
        }
    }
    let lhs: Vec<f64> = kn.values().iter().map(|v| n as f64 * v.norm()).collect();
    Ok(domination_reduce(n, &lhs, &rhs))
}

fn domination_reduce(n: usize, lhs: &[f64], rhs: &[f64]) -> DominationMeasure {
    let mut constant: f64 = 0.0;
    let mut zero_rhs_violations = 0;
    for (&l, &r) in lhs.iter().zip(rhs) {
        if r <= ZERO_TOL {
            if l > ZERO_TOL {
                zero_rhs_violations += 1;
            }
        } else {
            constant = constant.max(l / r);
        }
    }
    DominationMeasure {
        n,
        constant,
        zero_rhs_violations,
    }
}

/// [`domination_constant`] for every `n = 1..=n_max`, in one sweep.
pub fn domination_scan(
    g: &GeneratorSequence,
    n_max: usize,
    rank: usize,
    conv: Convention,
) -> Result<Vec<DominationMeasure>> {
    check_index(g, n_max, rank)?;
    let ones = vec![Complex64::new(1.0, 0.0); g.size(rank)];
    let blocks = sweep_blocks(g, rank, &ones, |mut sweep| {
        let len = sweep.points().len();
        // rhs[A][p] = sum_{A' <= A} M_{A'} |K_{M_{A'}}(x_p)|
        let mut rhs: Vec<Vec<f64>> = Vec::new();
        let mut out = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            sweep.advance();
            let lhs: Vec<f64> = (0..len)
                .map(|p| sweep.scaled_mean(p, conv).norm())
                .collect();
            if n == g.size(rhs.len()) {
                let prev = rhs.last().cloned().unwrap_or_else(|| vec![0.0; len]);
                rhs.push(prev.iter().zip(&lhs).map(|(a, b)| a + b).collect());
            }
            out.push(domination_reduce(n, &lhs, &rhs[g.order(n)]));
        }
        out
    });
    Ok((0..n_max)
        .map(|i| {
            blocks.iter().fold(
                DominationMeasure {
                    n: i + 1,
                    constant: 0.0,
                    zero_rhs_violations: 0,
                },
                |acc, b| DominationMeasure {
                    n: acc.n,
                    constant: acc.constant.max(b[i].constant),
                    zero_rhs_violations: acc.zero_rhs_violations + b[i].zero_rhs_violations,
                },
            )
        })
        .collect())
}

/// `int_{I_N} |K_n(x - t)| dmu(t)` and its ratio to `M_l M_k / M_N^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslatedIntegral {
    pub value: f64,
    pub scale: f64,
    pub ratio: f64,
}

/// Exact value of the translated kernel integral for `x` in `I_N^{k,l}` and
/// `n >= M_N`. The integral only depends on the first `N` digits of `x`:
/// as `t` runs over `I_N`, `x - t` runs over the cylinder `I_N(x)`.
pub fn translated_kernel_integral(
    g: &GeneratorSequence,
    n: usize,
    spec: &IndexSetSpec,
    x: &Point,
    conv: Convention,
) -> Result<TranslatedIntegral> {
    spec.validate(g)?;
    let rank = spec.rank;
    if !spec.contains(x) {
        return Err(Error::Domain(format!(
            "point {:?} not in I_{}^({},{})",
            x.digits(),
            rank,
            spec.k,
            spec.l
        )));
    }
    if n < g.size(rank) {
        return Err(Error::Domain(format!("n = {n} < M_{rank}")));
    }
    let kernel_rank = rank.max(g.rank_for(n)?);
    let kernel = fejer_kernel(g, n, kernel_rank, conv)?;
    let value = translated_integral(&kernel, rank, x.truncate(rank).index(g));
    let scale = cell_scale(g, spec);
    Ok(TranslatedIntegral {
        value,
        scale,
        ratio: value / scale,
    })
}

/// `M_l M_k / M_N^2`.
pub fn cell_scale(g: &GeneratorSequence, spec: &IndexSetSpec) -> f64 {
    let period = g.size(spec.rank) as f64;
    (g.size(spec.l) * g.size(spec.k)) as f64 / (period * period)
}

/// `int_{I_N} |k(x - t)| dmu(t)` for `x` in the rank-`N` cylinder with canonical
/// index `base`: the translates `x - t` sweep the cylinder `I_N(x)`.
pub fn translated_integral(kernel: &StepFunction, rank: usize, base: usize) -> f64 {
    let period = kernel.group().size(rank);
    let sum: f64 = kernel.values()[base..]
        .iter()
        .step_by(period)
        .map(|v| v.norm())
        .sum();
    sum / kernel.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::vilenkin;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Scalar oracle: `D_n(x)` by summing characters one at a time.
    fn dirichlet_oracle(g: &GeneratorSequence, n: usize, x: &Point) -> Complex64 {
        (0..n).map(|k| vilenkin(g, k, x).unwrap()).sum()
    }

    fn fejer_oracle(g: &GeneratorSequence, n: usize, x: &Point, conv: Convention) -> Complex64 {
        let ks: Vec<usize> = match conv {
            Convention::Lagged => (0..n).collect(),
            Convention::Classical => (1..=n).collect(),
        };
        ks.into_iter()
            .map(|k| dirichlet_oracle(g, k, x))
            .sum::<Complex64>()
            / n as f64
    }

    #[test]
    fn dirichlet_examples() {
        let w = GeneratorSequence::walsh(5).unwrap();
        let d1 = dirichlet(&w, 1, 5).unwrap();
        assert!(d1.values().iter().all(|&v| v == c(1.0)));
        let e0 = Point::unit(&w, 5, 0).unwrap();
        assert_eq!(dirichlet_oracle(&w, 5, &e0), c(1.0));
        assert_eq!(dirichlet(&w, 5, 5).unwrap().at(&e0).unwrap(), c(1.0));
        for n in 1..=16 {
            assert_eq!(dirichlet(&w, n, 4).unwrap().values()[0], c(n as f64));
        }
        assert!(dirichlet(&w, 0, 3)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == c(0.0)));
        assert!(dirichlet(&w, 9, 3).is_err());
    }

    #[test]
    fn dirichlet_closed_examples() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let d = dirichlet_closed(&w, 2, 4).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            assert_eq!(*v, c(if i % 4 == 0 { 4.0 } else { 0.0 }));
        }
        let g = GeneratorSequence::periodic(&[2, 3], 4).unwrap();
        let d = dirichlet_closed(&g, 2, 3).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            assert_eq!(*v, c(if i % 6 == 0 { 6.0 } else { 0.0 }));
        }
        let d = dirichlet_closed(&g, 0, 2).unwrap();
        assert!(d.values().iter().all(|&v| v == c(1.0)));
        assert!(dirichlet_closed(&g, 3, 2).is_err());
    }

    #[test]
    fn dirichlet_powers_equal_closed_form() {
        for g in [
            GeneratorSequence::walsh(8).unwrap(),
            GeneratorSequence::periodic(&[2, 3], 8).unwrap(),
        ] {
            for rank in 0..=8 {
                for n in 0..=rank {
                    let a = dirichlet(&g, g.size(n), rank).unwrap();
                    let b = dirichlet_closed(&g, n, rank).unwrap();
                    assert!(a.sup_distance(&b).unwrap() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn fejer_examples() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let p = fejer_kernel(&w, 1, 4, Convention::Lagged).unwrap();
        assert!(p.values().iter().all(|&v| v == c(0.0)));
        let q = fejer_kernel(&w, 1, 4, Convention::Classical).unwrap();
        assert!(q.values().iter().all(|&v| v == c(1.0)));

        let e0 = Point::unit(&w, 4, 0).unwrap();
        let x11 = Point::new(&w, vec![1, 1, 0, 0]).unwrap();
        for conv in Convention::ALL {
            assert_eq!(fejer_oracle(&w, 4, &e0, conv), c(0.5));
            assert_eq!(fejer_oracle(&w, 4, &x11, conv), c(0.0));
            let k4 = fejer_kernel(&w, 4, 4, conv).unwrap();
            assert_eq!(k4.at(&e0).unwrap(), c(0.5));
            assert_eq!(k4.at(&x11).unwrap(), c(0.0));
        }
        assert!(fejer_kernel(&w, 0, 4, Convention::Lagged).is_err());
    }

    #[test]
    fn fejer_matches_scalar_oracle() {
        let g = GeneratorSequence::new(&[3, 2, 2, 3], 4).unwrap();
        for n in 1..=36 {
            for conv in Convention::ALL {
                let k = fejer_kernel(&g, n, 4, conv).unwrap();
                for i in (0..36).step_by(5) {
                    let x = Point::from_index(&g, 4, i).unwrap();
                    assert!((k.values()[i] - fejer_oracle(&g, n, &x, conv)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn convention_gap_is_dirichlet_over_n() {
        for g in [
            GeneratorSequence::walsh(6).unwrap(),
            GeneratorSequence::periodic(&[2, 3], 4).unwrap(),
        ] {
            let rank = g.n_max();
            for n in 1..=64.min(g.size(rank)) {
                let p = fejer_kernel(&g, n, rank, Convention::Lagged).unwrap();
                let q = fejer_kernel(&g, n, rank, Convention::Classical).unwrap();
                let d = dirichlet(&g, n, rank).unwrap();
                let bridged = &p + &(&d * (1.0 / n as f64));
                assert!(bridged.sup_distance(&q).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let e0 = Point::unit(&w, 4, 0).unwrap();
        assert_eq!(fejer_closed(&w, 2, &e0).unwrap(), c(0.5));
        let x11 = Point::new(&w, vec![1, 1, 0, 0]).unwrap();
        assert_eq!(fejer_closed(&w, 2, &x11).unwrap(), c(0.0));
        let inside = Point::new(&w, vec![0, 0, 1, 0]).unwrap();
        assert!(matches!(
            fejer_closed(&w, 2, &inside),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn closed_form_mixed_against_brute_force() {
        let g = GeneratorSequence::new(&[3, 2, 2], 3).unwrap();
        let z = Point::new(&g, vec![1, 0, 0]).unwrap();
        for conv in Convention::ALL {
            let brute = fejer_oracle(&g, g.size(2), &z, conv);
            assert!((fejer_closed(&g, 2, &z).unwrap() - brute).norm() < 1e-10);
        }
    }

    #[test]
    fn l1_norm_examples() {
        let w = GeneratorSequence::walsh(9).unwrap();
        assert_eq!(
            kernel_l1_norm(&w, 1, 9, Convention::Classical).unwrap(),
            1.0
        );
        for a in 0..=5 {
            let v = kernel_l1_norm(&w, 1 << a, 5, Convention::Classical).unwrap();
            assert!(v <= 2.0, "A={a}: {v}");
        }
    }

    #[test]
    fn l1_scan_matches_single_norms() {
        let g = GeneratorSequence::periodic(&[2, 3], 5).unwrap();
        for conv in Convention::ALL {
            let scan = kernel_l1_scan(&g, 72, 5, conv).unwrap();
            for n in [1, 2, 5, 17, 36, 71, 72] {
                let direct = kernel_l1_norm(&g, n, 5, conv).unwrap();
                assert!((scan[n - 1] - direct).abs() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn domination_scan_matches_direct() {
        let w = GeneratorSequence::walsh(7).unwrap();
        for conv in Convention::ALL {
            let scan = domination_scan(&w, 64, 7, conv).unwrap();
            for n in [1, 2, 3, 8, 13, 33, 64] {
                let direct = domination_constant(&w, n, 7, conv).unwrap();
                assert!(
                    (scan[n - 1].constant - direct.constant).abs() < 1e-9,
                    "n={n} {conv}"
                );
                assert_eq!(scan[n - 1].zero_rhs_violations, direct.zero_rhs_violations);
            }
        }
    }

    #[test]
    fn domination_at_one() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let m = domination_constant(&w, 1, 4, Convention::Classical).unwrap();
        assert_eq!(m.constant, 1.0);
        assert_eq!(m.zero_rhs_violations, 0);
    }

    #[test]
    fn translated_integral_against_explicit_translation() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let spec = IndexSetSpec::new(3, 0, 1);
        let x = Point::new(&w, vec![1, 1, 0]).unwrap();
        for n in [8, 9, 12, 16] {
            let v = translated_kernel_integral(&w, n, &spec, &x, Convention::Lagged).unwrap();
            // Oracle: sum over t in I_3 at the kernel rank with explicit group subtraction.
            let rank = w.rank_for(n).unwrap().max(3);
            let k = fejer_kernel(&w, n, rank, Convention::Lagged).unwrap();
            let mut xr = x.digits().to_vec();
            xr.resize(rank, 0);
            let xr = Point::new(&w, xr).unwrap();
            let mut sum = 0.0;
            for i in 0..w.size(rank) {
                let t = Point::from_index(&w, rank, i).unwrap();
                if t.in_zero_cylinder(3) {
                    sum += k.at(&xr.sub(&w, &t).unwrap()).unwrap().norm();
                }
            }
            let oracle = sum / w.size(rank) as f64;
            assert!((v.value - oracle).abs() < 1e-12);
            assert_eq!(v.scale, 2.0 / 64.0);
        }
    }

    #[test]
    fn translated_integral_domain_errors() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let spec = IndexSetSpec::new(3, 0, 1);
        assert!(
            translated_kernel_integral(&w, 8, &spec, &Point::zero(3), Convention::Lagged).is_err()
        );
        let x = Point::new(&w, vec![1, 1, 0]).unwrap();
        assert!(translated_kernel_integral(&w, 7, &spec, &x, Convention::Lagged).is_err());
        let other = IndexSetSpec::new(3, 0, 3);
        assert!(translated_kernel_integral(&w, 8, &other, &x, Convention::Lagged).is_err());
    }
}
