//! Step functions on `G_m` and their Vilenkin spectra.
//!
//! A rank-`N` step function is constant on every rank-`N` cylinder; it is
//! stored as `M_N` complex values at canonical cylinder indices. Integrals
//! are exact finite sums with Haar weight `1 / M_N` per cylinder.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{GeneratorSequence, IndexSetSpec, Point};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Region of integration.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Whole,
    /// The cylinder `I_rank(x)` for a point of that rank.
    Cylinder(Point),
    /// `G_m \ I_rank(x)`.
    Complement(Point),
    IndexSet(IndexSetSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    group: GeneratorSequence,
    rank: usize,
    values: Vec<Complex64>,
}

impl StepFunction {
    pub fn new(g: &GeneratorSequence, rank: usize, values: Vec<Complex64>) -> Result<Self> {
        g.check_rank(rank)?;
        if values.len() != g.size(rank) {
            return Err(Error::InvalidParameter(format!(
                "{} values for a rank-{rank} step function (need {})",
                values.len(),
                g.size(rank)
            )));
        }
        Ok(Self {
            group: g.clone(),
            rank,
            values,
        })
    }

    pub fn from_real(g: &GeneratorSequence, rank: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            g,
            rank,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn constant(g: &GeneratorSequence, rank: usize, value: Complex64) -> Result<Self> {
        g.check_rank(rank)?;
        Self::new(g, rank, vec![value; g.size(rank)])
    }

    pub fn zeros(g: &GeneratorSequence, rank: usize) -> Result<Self> {
        Self::constant(g, rank, ZERO)
    }

    /// Tabulates `f(c)` over canonical cylinder indices.
    pub fn from_index_fn(
        g: &GeneratorSequence,
        rank: usize,
        f: impl Fn(usize) -> Complex64 + Sync + Send,
    ) -> Result<Self> {
        g.check_rank(rank)?;
        let values = par::map_range(g.size(rank), f);
        Self::new(g, rank, values)
    }

    /// Tabulates `f(x)` over the base points of all rank-`rank` cylinders.
    pub fn from_points(
        g: &GeneratorSequence,
        rank: usize,
        f: impl Fn(&Point) -> Complex64 + Sync + Send,
    ) -> Result<Self> {
        Self::from_index_fn(g, rank, |i| {
            f(&Point::from_index(g, rank, i).expect("index below M_rank"))
        })
    }

    /// `scale` times the indicator of the cylinder `I_{x.rank()}(x)`, at `rank`.
    pub fn cylinder_indicator(
        g: &GeneratorSequence,
        x: &Point,
        rank: usize,
        scale: Complex64,
    ) -> Result<Self> {
        if x.rank() > rank {
            return Err(Error::Rank {
                needed: x.rank(),
                available: rank,
            });
        }
        let base = x.index(g);
        let period = g.size(x.rank());
        Self::from_index_fn(g, rank, |i| if i % period == base { scale } else { ZERO })
    }

    pub fn group(&self) -> &GeneratorSequence {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Haar measure of one cylinder, `1 / M_N`.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// Value at a point of rank at least `self.rank()`.
    pub fn at(&self, x: &Point) -> Result<Complex64> {
        if x.rank() < self.rank {
            return Err(Error::Rank {
                needed: self.rank,
                available: x.rank(),
            });
        }
        Ok(self.values[x.truncate(self.rank).index(&self.group)])
    }

    /// Same function viewed at a finer rank: every value is repeated
    /// `m_N ... m_{N'-1}` times.
    pub fn refine(&self, rank: usize) -> Result<Self> {
        if rank < self.rank {
            return Err(Error::Rank {
                needed: self.rank,
                available: rank,
            });
        }
        self.group.check_rank(rank)?;
        let period = self.values.len();
        Self::from_index_fn(&self.group, rank, |i| self.values[i % period])
    }

    /// Conditional expectation onto rank-`rank` cylinders.
    pub fn average_to(&self, rank: usize) -> Result<Self> {
        if rank > self.rank {
            return Err(Error::Rank {
                needed: rank,
                available: self.rank,
            });
        }
        let period = self.group.size(rank);
        let copies = self.values.len() / period;
        Self::from_index_fn(&self.group, rank, |c| {
            let s = (0..copies).fold(ZERO, |acc, j| acc + self.values[c + j * period]);
            s / copies as f64
        })
    }

    /// `int f dmu` over the whole group.
    pub fn integral(&self) -> Complex64 {
        par::fixed_sum(&self.values, ZERO, |&v| v) * self.cell_measure()
    }

    /// Exact integral over a region. Regions coarser than the function are
    /// handled by summing over the cylinders they contain; finer regions are
    /// rejected.
    pub fn integrate(&self, region: &Region) -> Result<Complex64> {
        match region {
            Region::Whole => Ok(self.integral()),
            Region::Cylinder(x) | Region::Complement(x) => {
                if x.rank() > self.rank {
                    return Err(Error::Rank {
                        needed: x.rank(),
                        available: self.rank,
                    });
                }
                let base = x.index(&self.group);
                let period = self.group.size(x.rank());
                let want_inside = matches!(region, Region::Cylinder(_));
                let sum = self
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (i % period == base) == want_inside)
                    .fold(ZERO, |acc, (_, &v)| acc + v);
                Ok(sum * self.cell_measure())
            }
            Region::IndexSet(spec) => {
                if spec.rank > self.rank {
                    return Err(Error::Rank {
                        needed: spec.rank,
                        available: self.rank,
                    });
                }
                let period = self.group.size(spec.rank);
                let copies = self.values.len() / period;
                let mut sum = ZERO;
                for base in spec.indices(&self.group)? {
                    for j in 0..copies {
                        sum += self.values[base + j * period];
                    }
                }
                Ok(sum * self.cell_measure())
            }
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync + Send) -> Self {
        Self {
            group: self.group.clone(),
            rank: self.rank,
            values: par::map_items(&self.values, |&v| f(v)),
        }
    }

    /// `|f|` as a real-valued step function.
    pub fn abs(&self) -> Self {
        self.map(|v| Complex64::new(v.norm(), 0.0))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|v| v * a)
    }

    pub fn sup_norm(&self) -> f64 {
        par::max_of(&self.values, |v| v.norm()).max(0.0)
    }

    /// `sup |f - g|`; both operands must share group and rank.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if !same_prefix(&self.group, &other.group, self.rank.min(other.rank)) {
            return Err(Error::GroupMismatch);
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            group: self.group.clone(),
            rank: self.rank,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
}

/// Operands only need to agree on the radices below their rank.
pub(crate) fn same_prefix(a: &GeneratorSequence, b: &GeneratorSequence, rank: usize) -> bool {
    a.radices()[..rank] == b.radices()[..rank]
}

/// Panics on group or rank mismatch; use [`StepFunction::try_add`] to handle it.
impl Add for &StepFunction {
    type Output = StepFunction;
    fn add(self, rhs: &StepFunction) -> StepFunction {
        self.try_add(rhs).expect("compatible step functions")
    }
}

impl Sub for &StepFunction {
    type Output = StepFunction;
    fn sub(self, rhs: &StepFunction) -> StepFunction {
        self.try_sub(rhs).expect("compatible step functions")
    }
}

impl Mul<Complex64> for &StepFunction {
    type Output = StepFunction;
    fn mul(self, rhs: Complex64) -> StepFunction {
        self.scale(rhs)
    }
}

impl Mul<f64> for &StepFunction {
    type Output = StepFunction;
    fn mul(self, rhs: f64) -> StepFunction {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Vilenkin-Fourier coefficients of a rank-`N` step function; `coeffs[n]`
/// holds `f^(n)` for `n < M_N` and all higher coefficients vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    group: GeneratorSequence,
    rank: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(g: &GeneratorSequence, rank: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        g.check_rank(rank)?;
        if coeffs.len() != g.size(rank) {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for rank {rank} (need {})",
                coeffs.len(),
                g.size(rank)
            )));
        }
        Ok(Self {
            group: g.clone(),
            rank,
            coeffs,
        })
    }

    /// The `j`-th unit vector (the spectrum of `psi_j`).
    pub fn unit(g: &GeneratorSequence, rank: usize, j: usize) -> Result<Self> {
        g.check_rank(rank)?;
        if j >= g.size(rank) {
            return Err(Error::Rank {
                needed: g.rank_for(j + 1)?,
                available: rank,
            });
        }
        let mut coeffs = vec![ZERO; g.size(rank)];
        coeffs[j] = Complex64::new(1.0, 0.0);
        Self::new(g, rank, coeffs)
    }

    /// Builds coefficients `c(n)` for `n < M_rank`.
    pub fn from_fn(
        g: &GeneratorSequence,
        rank: usize,
        f: impl Fn(usize) -> Complex64 + Sync + Send,
    ) -> Result<Self> {
        g.check_rank(rank)?;
        Self::new(g, rank, par::map_range(g.size(rank), f))
    }

    pub fn group(&self) -> &GeneratorSequence {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `f^(n)`, zero beyond the stored range.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    /// `sum |f^(n)|^2`.
    pub fn energy(&self) -> f64 {
        par::fixed_sum(&self.coeffs, 0.0, |c| c.norm_sqr())
    }

    /// Multiplies coefficient `n` by `mult(n)`.
    pub fn multiply(&self, mult: impl Fn(usize) -> f64 + Sync + Send) -> Self {
        let coeffs = par::map_range(self.coeffs.len(), |n| self.coeffs[n] * mult(n));
        Self {
            group: self.group.clone(),
            rank: self.rank,
            coeffs,
        }
    }

    /// Keeps coefficients `n < count`.
    pub fn truncated(&self, count: usize) -> Self {
        self.multiply(|n| if n < count { 1.0 } else { 0.0 })
    }

    /// Coefficientwise product (the spectrum of a convolution).
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if !same_prefix(&self.group, &other.group, self.rank.min(other.rank)) {
            return Err(Error::GroupMismatch);
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(Self {
            group: self.group.clone(),
            rank: self.rank,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn integrals() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let one = StepFunction::constant(&w, 6, c(1.0)).unwrap();
        assert_eq!(one.integral(), c(1.0));
        let four = StepFunction::constant(&w, 4, c(4.0)).unwrap();
        let i2 = Region::Cylinder(Point::zero(2));
        assert_eq!(four.integrate(&i2).unwrap(), c(1.0));
        let set = Region::IndexSet(IndexSetSpec::new(6, 2, 4));
        assert_eq!(one.integrate(&set).unwrap(), c(1.0 / 32.0));
        assert_eq!(
            one.integrate(&Region::Complement(Point::zero(3))).unwrap(),
            c(7.0 / 8.0)
        );
    }

    #[test]
    fn refinement_preserves_integral() {
        let g = GeneratorSequence::periodic(&[2, 3], 5).unwrap();
        let f = StepFunction::from_index_fn(&g, 3, |i| Complex64::new(i as f64, -(i as f64) / 3.0))
            .unwrap();
        let r = f.refine(5).unwrap();
        assert_eq!(r.len(), 72);
        assert!((r.integral() - f.integral()).norm() < 1e-14);
        let back = r.average_to(3).unwrap();
        assert!(back.sup_distance(&f).unwrap() < 1e-14);
        let x = Point::new(&g, vec![1, 2, 1, 0, 1]).unwrap();
        assert_eq!(r.at(&x).unwrap(), f.at(&x).unwrap());
    }

    #[test]
    fn cylinder_indicator_support() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let x = Point::new(&w, vec![1, 0]).unwrap();
        let ind = StepFunction::cylinder_indicator(&w, &x, 4, c(1.0)).unwrap();
        assert_eq!(ind.integral(), c(0.25));
        let inside: Vec<usize> = (0..16).filter(|&i| ind.values()[i] != ZERO).collect();
        assert_eq!(inside, vec![1, 5, 9, 13]);
    }

    #[test]
    fn mismatched_operands() {
        let w = GeneratorSequence::walsh(4).unwrap();
        let a = StepFunction::zeros(&w, 3).unwrap();
        let b = StepFunction::zeros(&w, 4).unwrap();
        assert!(a.try_add(&b).is_err());
        let g = GeneratorSequence::periodic(&[2, 3], 4).unwrap();
        let d = StepFunction::zeros(&g, 2).unwrap();
        assert!(matches!(
            StepFunction::zeros(&w, 2).unwrap().try_add(&d),
            Err(Error::GroupMismatch)
        ));
        assert!(StepFunction::new(&w, 2, vec![ZERO; 3]).is_err());
    }
}
