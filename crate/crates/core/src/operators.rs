//! Partial sums, Fejér means, convolution and the weighted Fejér maximal
//! operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cesaro::sweep_blocks;
use crate::error::{Error, Result};
use crate::kernels::Convention;
use crate::step::StepFunction;
use crate::transform::{forward, inverse};

/// Weight `w(n)` dividing `|sigma_n f|` inside the maximal operator. Only
/// `n >= 1` is ever evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w = 1`.
    Unit,
    /// `w(n) = (n + 1)^(1/p - 2)`.
    Power { p: f64 },
    /// `w(n) = log2(n + 1)^2`.
    LogSquared,
    /// `w(n) = (n + 1)^(1/p - 2) / log2(n + 2)^2`.
    PowerOverLogSquared { p: f64 },
    /// Explicit table, `table[n - 1] = w(n)`.
    Custom { table: Vec<f64> },
}

impl WeightSpec {
    pub fn weight(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            WeightSpec::Unit => 1.0,
            WeightSpec::Power { p } => (x + 1.0).powf(1.0 / p - 2.0),
            WeightSpec::LogSquared => {
                if n == 0 {
                    1.0
                } else {
                    (x + 1.0).log2().powi(2)
                }
            }
            WeightSpec::PowerOverLogSquared { p } => {
                (x + 1.0).powf(1.0 / p - 2.0) / (x + 2.0).log2().powi(2)
            }
            WeightSpec::Custom { table } => table[n - 1],
        }
    }

    /// Checks the parameters needed to evaluate `w(1..=n_max)`.
    pub fn validate(&self, n_max: usize) -> Result<()> {
        match self {
            WeightSpec::Power { p } | WeightSpec::PowerOverLogSquared { p } => {
                if !(*p > 0.0 && *p < 0.5) {
                    return Err(Error::Weight(format!("exponent p = {p} outside (0, 1/2)")));
                }
            }
            WeightSpec::Custom { table } => {
                if table.len() < n_max {
                    return Err(Error::Weight(format!(
                        "table has {} entries, need {n_max}",
                        table.len()
                    )));
                }
                if let Some(i) = table.iter().position(|&v| v.is_nan() || v < 1.0) {
                    return Err(Error::Weight(format!(
                        "w({}) = {} is below 1",
                        i + 1,
                        table[i]
                    )));
                }
                if let Some(i) = table.windows(2).position(|w| w[1] < w[0]) {
                    return Err(Error::Weight(format!("table decreases at n = {}", i + 2)));
                }
            }
            WeightSpec::Unit | WeightSpec::LogSquared => {}
        }
        Ok(())
    }
}

fn check_n(f: &StepFunction, n: usize) -> Result<()> {
    let size = f.group().size(f.rank());
    if n > size {
        return Err(Error::Rank {
            needed: f.group().rank_for(n)?,
            available: f.rank(),
        });
    }
    Ok(())
}

/// `S_n f = sum_{k<n} f^(k) psi_k`, `n <= M_N`.
pub fn partial_sum(f: &StepFunction, n: usize) -> Result<StepFunction> {
    check_n(f, n)?;
    Ok(inverse(&forward(f).truncated(n)))
}

/// `sigma_n f` as a spectral multiplier, `1 <= n <= M_N`.
pub fn fejer_mean(f: &StepFunction, n: usize, conv: Convention) -> Result<StepFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter("Fejér mean needs n >= 1".into()));
    }
    check_n(f, n)?;
    Ok(inverse(&forward(f).multiply(|j| conv.multiplier(n, j))))
}

/// `(f * k)(x) = int f(t) k(x - t) dmu(t)`.
pub fn convolve(f: &StepFunction, kern: &StepFunction) -> Result<StepFunction> {
    f.check_compatible(kern)?;
    Ok(inverse(&forward(f).try_mul(&forward(kern))?))
}

/// Pointwise `max_{1 <= n <= n_max} |sigma_n f| / w(n)` with the first `n`
/// attaining it.
#[derive(Debug, Clone)]
pub struct MaximalFejer {
    pub values: StepFunction,
    pub argmax: Vec<usize>,
}

impl MaximalFejer {
    /// Largest `n` at which any point attains its maximum.
    pub fn max_argmax(&self) -> usize {
        self.argmax.iter().copied().max().unwrap_or(0)
    }
}

/// Weighted Fejér maximal operator truncated at `n_max <= M_N`.
pub fn maximal_fejer(
    f: &StepFunction,
    n_max: usize,
    w: &WeightSpec,
    conv: Convention,
) -> Result<MaximalFejer> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    check_n(f, n_max)?;
    w.validate(n_max)?;
    let g = f.group();
    let rank = f.rank();
    let spectrum = forward(f);
    let coeffs = &spectrum.coeffs()[..n_max];
    let weights: Vec<f64> = (1..=n_max).map(|n| w.weight(n)).collect();
    let blocks = sweep_blocks(g, rank, coeffs, |mut sweep| {
        let len = sweep.points().len();
        let mut best = vec![0.0f64; len];
        let mut arg = vec![1usize; len];
        for (n, &wn) in (1..=n_max).zip(&weights) {
            sweep.advance();
            for p in 0..len {
                let v = sweep.mean(p, conv).norm() / wn;
                if v > best[p] {
                    best[p] = v;
                    arg[p] = n;
                }
            }
        }
        (best, arg)
    });
    let mut values = Vec::with_capacity(g.size(rank));
    let mut argmax = Vec::with_capacity(g.size(rank));
    for (b, a) in blocks {
        values.extend(b.into_iter().map(|v| Complex64::new(v, 0.0)));
        argmax.extend(a);
    }
    Ok(MaximalFejer {
        values: StepFunction::new(g, rank, values)?,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::character;
    use crate::group::{GeneratorSequence, Point};
    use crate::kernels::{dirichlet_closed, fejer_kernel};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sample(g: &GeneratorSequence, rank: usize, seed: u64) -> StepFunction {
        StepFunction::from_index_fn(g, rank, |i| {
            let t = (i as f64 + 1.0) * (seed as f64 + 0.37);
            Complex64::new(t.sin(), (1.3 * t).cos())
        })
        .unwrap()
    }

    /// Direct convolution: explicit group subtraction, one cylinder pair at a time.
    fn convolve_oracle(f: &StepFunction, k: &StepFunction) -> StepFunction {
        let g = f.group();
        let rank = f.rank();
        let pts: Vec<Point> = (0..g.size(rank))
            .map(|i| Point::from_index(g, rank, i).unwrap())
            .collect();
        StepFunction::from_points(g, rank, |x| {
            pts.iter()
                .map(|t| f.at(t).unwrap() * k.at(&x.sub(g, t).unwrap()).unwrap())
                .sum::<Complex64>()
                / pts.len() as f64
        })
        .unwrap()
    }

    #[test]
    fn partial_sum_examples() {
        let g = GeneratorSequence::periodic(&[2, 3], 4).unwrap();
        let f = sample(&g, 4, 1);
        assert!(partial_sum(&f, 0).unwrap().sup_norm() == 0.0);
        assert!(partial_sum(&f, 36).unwrap().sup_distance(&f).unwrap() < 1e-10);
        let psi3 = character(&g, 3, 4).unwrap();
        assert!(partial_sum(&psi3, 3).unwrap().sup_norm() < 1e-12);
        assert!(partial_sum(&psi3, 4).unwrap().sup_distance(&psi3).unwrap() < 1e-12);
        assert!(partial_sum(&f, 37).is_err());
    }

    #[test]
    fn fejer_mean_examples() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let one = StepFunction::constant(&w, 4, c(1.0)).unwrap();
        for n in 1..=16 {
            let p = fejer_mean(&one, n, Convention::Lagged).unwrap();
            let q = fejer_mean(&one, n, Convention::Classical).unwrap();
            assert!(p
                .values()
                .iter()
                .all(|v| (v - c((n - 1) as f64 / n as f64)).norm() < 1e-14));
            assert!(q.values().iter().all(|v| (v - c(1.0)).norm() < 1e-14));
        }
        let psi1 = character(&w, 1, 4).unwrap();
        assert!(fejer_mean(&psi1, 2, Convention::Lagged).unwrap().sup_norm() < 1e-15);
        assert!(fejer_mean(&one, 0, Convention::Lagged).is_err());
    }

    #[test]
    fn fejer_mean_is_average_of_partial_sums() {
        let g = GeneratorSequence::new(&[3, 2, 2, 3], 4).unwrap();
        let f = sample(&g, 4, 2);
        for n in [1, 2, 5, 17, 36] {
            let mut acc = StepFunction::zeros(&g, 4).unwrap();
            for k in 0..n {
                acc = &acc + &partial_sum(&f, k).unwrap();
            }
            let oracle = &acc * (1.0 / n as f64);
            let spectral = fejer_mean(&f, n, Convention::Lagged).unwrap();
            assert!(spectral.sup_distance(&oracle).unwrap() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn convolution_forms() {
        let g = GeneratorSequence::new(&[2, 3, 2], 3).unwrap();
        let f = sample(&g, 3, 3);
        let one = StepFunction::constant(&g, 3, c(1.0)).unwrap();
        let folded = convolve(&f, &one).unwrap();
        assert!(folded
            .values()
            .iter()
            .all(|v| (v - f.integral()).norm() < 1e-12));
        for n in 0..=3 {
            let d = dirichlet_closed(&g, n, 3).unwrap();
            let conv = convolve(&f, &d).unwrap();
            assert!(
                conv.sup_distance(&partial_sum(&f, g.size(n)).unwrap())
                    .unwrap()
                    < 1e-12
            );
            assert!(conv.sup_distance(&convolve_oracle(&f, &d)).unwrap() < 1e-12);
        }
        for conv in Convention::ALL {
            for n in [1, 4, 7, 12] {
                let k = fejer_kernel(&g, n, 3, conv).unwrap();
                let direct = convolve_oracle(&f, &k);
                let spectral = fejer_mean(&f, n, conv).unwrap();
                assert!(spectral.sup_distance(&direct).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn convention_bridge() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let f = sample(&w, 6, 5);
        for n in 1..=32 {
            let p = fejer_mean(&f, n, Convention::Lagged).unwrap();
            let q = fejer_mean(&f, n, Convention::Classical).unwrap();
            let s = partial_sum(&f, n).unwrap();
            let gap = &q - &p;
            assert!(gap.sup_distance(&(&s * (1.0 / n as f64))).unwrap() < 1e-12);
        }
    }

    #[test]
    fn maximal_examples() {
        let w = GeneratorSequence::walsh(3).unwrap();
        let one = StepFunction::constant(&w, 3, c(1.0)).unwrap();
        let m = maximal_fejer(&one, 8, &WeightSpec::Unit, Convention::Lagged).unwrap();
        assert!(m
            .values
            .values()
            .iter()
            .all(|v| (v - c(7.0 / 8.0)).norm() < 1e-14));
        assert!(m.argmax.iter().all(|&n| n == 8));
    }

    #[test]
    fn maximal_on_character_against_oracle() {
        let w = GeneratorSequence::walsh(3).unwrap();
        let psi1 = character(&w, 1, 3).unwrap();
        let weight = WeightSpec::Power { p: 1.0 / 3.0 };
        for conv in Convention::ALL {
            let m = maximal_fejer(&psi1, 4, &weight, conv).unwrap();
            // sigma_n psi_1 = multiplier(n, 1) psi_1, so the max is over the table.
            let peak = (1..=4)
                .map(|n| conv.multiplier(n, 1) / weight.weight(n))
                .fold(0.0, f64::max);
            assert!(m
                .values
                .values()
                .iter()
                .all(|v| (v.re - peak).abs() < 1e-14));
            // Oracle: explicit means for each n.
            for i in 0..8 {
                let direct = (1..=4)
                    .map(|n| {
                        fejer_mean(&psi1, n, conv).unwrap().values()[i].norm() / weight.weight(n)
                    })
                    .fold(0.0, f64::max);
                assert!((m.values.values()[i].re - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maximal_matches_spectral_means() {
        let g = GeneratorSequence::periodic(&[2, 3], 5).unwrap();
        let f = sample(&g, 5, 7);
        for conv in Convention::ALL {
            let weight = WeightSpec::LogSquared;
            let m = maximal_fejer(&f, 40, &weight, conv).unwrap();
            let mut direct = vec![0.0f64; f.len()];
            for n in 1..=40 {
                let s = fejer_mean(&f, n, conv).unwrap();
                for (d, v) in direct.iter_mut().zip(s.values()) {
                    *d = d.max(v.norm() / weight.weight(n));
                }
            }
            for (a, b) in m.values.values().iter().zip(&direct) {
                assert!((a.re - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights() {
        assert_eq!(WeightSpec::Unit.weight(9), 1.0);
        assert_eq!(
            WeightSpec::Power { p: 1.0 / 3.0 }.weight(3),
            4.0f64.powf(1.0 / (1.0 / 3.0) - 2.0)
        );
        assert_eq!(WeightSpec::LogSquared.weight(1), 1.0);
        assert_eq!(WeightSpec::LogSquared.weight(3), 4.0);
        assert_eq!(WeightSpec::LogSquared.weight(0), 1.0);
        assert!(WeightSpec::Power { p: 0.6 }.validate(4).is_err());
        assert!(WeightSpec::Custom {
            table: vec![1.0, 0.5]
        }
        .validate(2)
        .is_err());
        assert!(WeightSpec::Custom {
            table: vec![2.0, 1.5]
        }
        .validate(2)
        .is_err());
        assert!(WeightSpec::Custom { table: vec![1.0] }.validate(2).is_err());
        assert!(WeightSpec::Custom {
            table: vec![1.0, 1.0, 3.0]
        }
        .validate(3)
        .is_ok());
        assert_eq!(
            WeightSpec::Custom {
                table: vec![1.0, 2.5]
            }
            .weight(2),
            2.5
        );
    }
}
