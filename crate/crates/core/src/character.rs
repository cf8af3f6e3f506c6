//! Generalized Rademacher functions and the Vilenkin character system.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GeneratorSequence, Point};
use crate::step::StepFunction;

/// `exp(2 pi i u / m)`, exact at multiples of a quarter turn.
pub fn unit_root(u: usize, m: usize) -> Complex64 {
    let u = u % m;
    if (4 * u).is_multiple_of(m) {
        return match 4 * u / m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * u as f64 / m as f64)
}

/// Table of `exp(2 pi i u / m)` for `u < m`.
pub fn root_table(m: usize) -> Vec<Complex64> {
    (0..m).map(|u| unit_root(u, m)).collect()
}

/// `r_k(x) = exp(2 pi i x_k / m_k)`.
pub fn rademacher(g: &GeneratorSequence, k: usize, x: &Point) -> Result<Complex64> {
    if k >= x.rank() {
        return Err(Error::Rank {
            needed: k + 1,
            available: x.rank(),
        });
    }
    g.check_rank(x.rank())?;
    Ok(unit_root(x.digit(k), g.radix(k)))
}

/// `psi_n(x) = prod_k r_k(x)^{n_k}`.
pub fn vilenkin(g: &GeneratorSequence, n: usize, x: &Point) -> Result<Complex64> {
    g.check_rank(x.rank())?;
    if n >= g.size(x.rank()) {
        return Err(Error::Rank {
            needed: g.rank_for(n + 1)?,
            available: x.rank(),
        });
    }
    let mut value = Complex64::new(1.0, 0.0);
    let mut rest = n;
    let mut k = 0;
    while rest > 0 {
        let m = g.radix(k);
        let nk = rest % m;
        if nk != 0 {
            value *= unit_root(nk * x.digit(k), m);
        }
        rest /= m;
        k += 1;
    }
    Ok(value)
}

/// `psi_n` as a step function of the given rank (`n < M_rank`).
pub fn character(g: &GeneratorSequence, n: usize, rank: usize) -> Result<StepFunction> {
    g.check_rank(rank)?;
    if n >= g.size(rank) {
        return Err(Error::Rank {
            needed: g.rank_for(n + 1)?,
            available: rank,
        });
    }
    StepFunction::from_points(g, rank, |x| vilenkin(g, n, x).expect("n < M_rank"))
}
