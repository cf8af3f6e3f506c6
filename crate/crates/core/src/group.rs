//! Bounded Vilenkin groups truncated at a finite rank.
//!
//! A group is described by its generating sequence `m_0, m_1, ...` (each at
//! least 2) together with the cached products `M_0 = 1, M_{k+1} = m_k M_k`.
//! The same mixed-radix number system indexes both characters (`n = sum n_j M_j`)
//! and rank-`N` cylinders (`c = sum x_j M_j`), so transforms and step-function
//! tables share one layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generating sequence of a bounded Vilenkin group, truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupSpec", into = "GroupSpec")]
pub struct GeneratorSequence {
    radices: Vec<usize>,
    sizes: Vec<usize>,
}

/// Wire form of a group: `{"m": [...], "N": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub m: Vec<usize>,
    #[serde(rename = "N")]
    pub n: usize,
}

impl TryFrom<GroupSpec> for GeneratorSequence {
    type Error = Error;

    fn try_from(spec: GroupSpec) -> Result<Self> {
        GeneratorSequence::new(&spec.m, spec.n)
    }
}

impl From<GeneratorSequence> for GroupSpec {
    fn from(g: GeneratorSequence) -> Self {
        GroupSpec {
            n: g.n_max(),
            m: g.radices,
        }
    }
}

impl GeneratorSequence {
    /// Builds the group from the first `n_max` entries of `m`.
    pub fn new(m: &[usize], n_max: usize) -> Result<Self> {
        if let Some((index, &value)) = m.iter().enumerate().find(|(_, &v)| v < 2) {
            return Err(Error::InvalidGenerator { index, value });
        }
        if n_max == 0 {
            return Err(Error::InvalidParameter("N_max must be at least 1".into()));
        }
        if m.len() < n_max {
            return Err(Error::InvalidParameter(format!(
                "generator sequence has {} entries but N_max = {n_max}",
                m.len()
            )));
        }
        let radices = m[..n_max].to_vec();
        let mut sizes = Vec::with_capacity(n_max + 1);
        sizes.push(1usize);
        for (k, &r) in radices.iter().enumerate() {
            let next = sizes[k]
                .checked_mul(r)
                .ok_or_else(|| Error::Capacity(format!("M_{} overflows usize", k + 1)))?;
            sizes.push(next);
        }
        Ok(Self { radices, sizes })
    }

    /// Repeats `pattern` cyclically up to rank `n_max`.
    pub fn periodic(pattern: &[usize], n_max: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidParameter("empty generator pattern".into()));
        }
        let m: Vec<usize> = pattern.iter().copied().cycle().take(n_max).collect();
        Self::new(&m, n_max)
    }

    /// The dyadic (Walsh) group, `m = 2, 2, 2, ...`.
    pub fn walsh(n_max: usize) -> Result<Self> {
        Self::periodic(&[2], n_max)
    }

    /// Maximum supported rank.
    pub fn n_max(&self) -> usize {
        self.radices.len()
    }

    /// `m_k`.
    pub fn radix(&self, k: usize) -> usize {
        self.radices[k]
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    /// `M_k`, for `k <= n_max`.
    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max_radix(&self) -> usize {
        self.radices.iter().copied().max().unwrap_or(2)
    }

    pub fn is_walsh(&self) -> bool {
        self.radices.iter().all(|&m| m == 2)
    }

    /// Restricts the group to its first `rank` coordinates.
    pub fn truncated(&self, rank: usize) -> Result<Self> {
        self.check_rank(rank)?;
        Self::new(&self.radices[..rank], rank)
    }

    pub(crate) fn check_rank(&self, rank: usize) -> Result<()> {
        if rank > self.n_max() {
            Err(Error::Rank {
                needed: rank,
                available: self.n_max(),
            })
        } else {
            Ok(())
        }
    }

    /// Smallest rank `N` with `M_N >= n`.
    pub fn rank_for(&self, n: usize) -> Result<usize> {
        self.sizes
            .iter()
            .position(|&s| s >= n)
            .ok_or_else(|| Error::Capacity(format!("{n} exceeds M_{}", self.n_max())))
    }

    /// Digit expansion `n = sum n_j M_j`.
    pub fn index_to_digits(&self, n: usize) -> Result<IndexDigits> {
        let top = self.sizes[self.n_max()];
        if n >= top {
            return Err(Error::Capacity(format!(
                "index {n} >= M_{} = {top}",
                self.n_max()
            )));
        }
        let mut digits = Vec::new();
        let mut rest = n;
        for &r in &self.radices {
            if rest == 0 {
                break;
            }
            digits.push(rest % r);
            rest /= r;
        }
        if digits.is_empty() {
            digits.push(0);
        }
        let order = digits.iter().rposition(|&d| d != 0).unwrap_or(0);
        digits.truncate(order + 1);
        Ok(IndexDigits {
            value: n,
            digits,
            order,
        })
    }

    /// Inverse of [`index_to_digits`](Self::index_to_digits); validates each digit.
    pub fn digits_to_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() > self.n_max() {
            return Err(Error::Rank {
                needed: digits.len(),
                available: self.n_max(),
            });
        }
        let mut n = 0usize;
        for (j, &d) in digits.iter().enumerate() {
            if d >= self.radices[j] {
                return Err(Error::InvalidDigit {
                    position: j,
                    digit: d,
                    radix: self.radices[j],
                });
            }
            n += d * self.sizes[j];
        }
        Ok(n)
    }

    /// `|n|`, the position of the highest nonzero digit (0 for `n = 0`).
    pub fn order(&self, n: usize) -> usize {
        let mut order = 0;
        let mut rest = n;
        let mut j = 0;
        while rest > 0 && j < self.n_max() {
            if !rest.is_multiple_of(self.radices[j]) {
                order = j;
            }
            rest /= self.radices[j];
            j += 1;
        }
        // n = M_{n_max} (or above) has its leading digit beyond the table.
        if rest > 0 {
            order = j;
        }
        order
    }

    /// `sum_{A=0}^{l} M_A`.
    pub fn sum_sizes(&self, l: usize) -> Result<usize> {
        self.check_rank(l)?;
        Ok(self.sizes[..=l].iter().sum())
    }

    /// The lacunary index `q_A = M_{2A} + M_{2A-2} + ... + M_2 + M_0`.
    pub fn lacunary_index(&self, a: usize) -> Result<usize> {
        self.check_rank(2 * a)?;
        Ok((0..=a).map(|i| self.sizes[2 * i]).sum())
    }
}

/// Digits of a character index in the generalized number system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexDigits {
    pub value: usize,
    /// `n_0, ..., n_{|n|}`; a single zero for `n = 0`.
    pub digits: Vec<usize>,
    /// `|n|`; zero for `n = 0` by convention.
    pub order: usize,
}

impl IndexDigits {
    pub fn digit(&self, j: usize) -> usize {
        self.digits.get(j).copied().unwrap_or(0)
    }
}

/// A group element truncated to its first `rank` coordinates; equivalently the
/// rank-`rank` cylinder `I_rank(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    digits: Vec<usize>,
}

impl Point {
    pub fn new(g: &GeneratorSequence, digits: Vec<usize>) -> Result<Self> {
        g.digits_to_index(&digits)?;
        Ok(Self { digits })
    }

    pub fn zero(rank: usize) -> Self {
        Self {
            digits: vec![0; rank],
        }
    }

    /// `e_n` at the given rank.
    pub fn unit(g: &GeneratorSequence, rank: usize, n: usize) -> Result<Self> {
        if n >= rank {
            return Err(Error::Rank {
                needed: n + 1,
                available: rank,
            });
        }
        let mut digits = vec![0; rank];
        digits[n] = 1;
        Self::new(g, digits)
    }

    /// The point whose canonical cylinder index at `rank` is `index`.
    pub fn from_index(g: &GeneratorSequence, rank: usize, index: usize) -> Result<Self> {
        g.check_rank(rank)?;
        if index >= g.size(rank) {
            return Err(Error::Capacity(format!("cylinder {index} >= M_{rank}")));
        }
        let mut rest = index;
        let digits = g.radices()[..rank]
            .iter()
            .map(|&r| {
                let d = rest % r;
                rest /= r;
                d
            })
            .collect();
        Ok(Self { digits })
    }

    pub fn rank(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn digit(&self, k: usize) -> usize {
        self.digits[k]
    }

    /// Canonical cylinder index `sum x_k M_k`.
    pub fn index(&self, g: &GeneratorSequence) -> usize {
        self.digits
            .iter()
            .zip(g.sizes())
            .map(|(&d, &s)| d * s)
            .sum()
    }

    /// The same point cut down to a lower rank.
    pub fn truncate(&self, rank: usize) -> Point {
        Point {
            digits: self.digits[..rank.min(self.rank())].to_vec(),
        }
    }

    /// Coordinatewise `(x_k - t_k) mod m_k`.
    pub fn sub(&self, g: &GeneratorSequence, other: &Point) -> Result<Point> {
        self.combine(g, other, |a, b, m| (a + m - b) % m)
    }

    /// Coordinatewise `(x_k + t_k) mod m_k`.
    pub fn add(&self, g: &GeneratorSequence, other: &Point) -> Result<Point> {
        self.combine(g, other, |a, b, m| (a + b) % m)
    }

    fn combine(
        &self,
        g: &GeneratorSequence,
        other: &Point,
        op: impl Fn(usize, usize, usize) -> usize,
    ) -> Result<Point> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                left: self.rank(),
                right: other.rank(),
            });
        }
        g.check_rank(self.rank())?;
        let digits = self
            .digits
            .iter()
            .zip(&other.digits)
            .enumerate()
            .map(|(k, (&a, &b))| op(a, b, g.radix(k)))
            .collect();
        Ok(Point { digits })
    }

    /// First coordinate that is nonzero, if any.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.digits.iter().position(|&d| d != 0)
    }

    /// Whether the point lies in `I_n = I_n(0)`.
    pub fn in_zero_cylinder(&self, n: usize) -> bool {
        self.digits[..n.min(self.rank())].iter().all(|&d| d == 0)
    }
}

/// The sets `I_N^{k,l}` and `I_N^{k,alpha,l,beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSetSpec {
    pub rank: usize,
    pub k: usize,
    pub l: usize,
    pub alpha: Option<usize>,
    pub beta: Option<usize>,
}

impl IndexSetSpec {
    /// `I_N^{k,l}`; `l == rank` selects the second branch of the definition.
    pub fn new(rank: usize, k: usize, l: usize) -> Self {
        Self {
            rank,
            k,
            l,
            alpha: None,
            beta: None,
        }
    }

    /// `I_N^{k,alpha,l,beta}`, defined for `l < rank`.
    pub fn with_values(rank: usize, k: usize, alpha: usize, l: usize, beta: usize) -> Self {
        Self {
            rank,
            k,
            l,
            alpha: Some(alpha),
            beta: Some(beta),
        }
    }

    pub fn validate(&self, g: &GeneratorSequence) -> Result<()> {
        if self.k >= self.l || self.l > self.rank {
            return Err(Error::InvalidIndexSet(format!(
                "need 0 <= k < l <= N, got k = {}, l = {}, N = {}",
                self.k, self.l, self.rank
            )));
        }
        g.check_rank(self.rank)?;
        if let Some(a) = self.alpha {
            if a == 0 || a >= g.radix(self.k) {
                return Err(Error::InvalidIndexSet(format!(
                    "alpha = {a} not in Z_m \\ {{0}}"
                )));
            }
        }
        if let Some(b) = self.beta {
            if self.l == self.rank {
                return Err(Error::InvalidIndexSet("beta given with l = N".into()));
            }
            if b == 0 || b >= g.radix(self.l) {
                return Err(Error::InvalidIndexSet(format!(
                    "beta = {b} not in Z_m \\ {{0}}"
                )));
            }
        }
        Ok(())
    }

    /// Membership, decided on the first `rank` digits of `x`.
    pub fn contains(&self, x: &Point) -> bool {
        if x.rank() < self.rank {
            return false;
        }
        let d = x.digits();
        let fixed_ok = |pos: usize, want: Option<usize>| match want {
            Some(v) => d[pos] == v,
            None => d[pos] != 0,
        };
        if !d[..self.k].iter().all(|&v| v == 0) || !fixed_ok(self.k, self.alpha) {
            return false;
        }
        let gap_end = self.l.min(self.rank);
        if !d[self.k + 1..gap_end].iter().all(|&v| v == 0) {
            return false;
        }
        self.l == self.rank || fixed_ok(self.l, self.beta)
    }

    /// All rank-`N` cylinders in the set, in increasing canonical index order.
    pub fn enumerate(&self, g: &GeneratorSequence) -> Result<Vec<Point>> {
        Ok(self
            .indices(g)?
            .into_iter()
            .map(|i| Point::from_index(g, self.rank, i).expect("index within M_N"))
            .collect())
    }

    /// Canonical rank-`N` indices of the cylinders in the set, increasing.
    pub fn indices(&self, g: &GeneratorSequence) -> Result<Vec<usize>> {
        self.validate(g)?;
        let digit_range = |pos: usize, fixed: Option<usize>| match fixed {
            Some(v) => v..v + 1,
            None => 1..g.radix(pos),
        };
        let mut heads = Vec::new();
        for a in digit_range(self.k, self.alpha) {
            let base = a * g.size(self.k);
            if self.l == self.rank {
                heads.push(base);
            } else {
                for b in digit_range(self.l, self.beta) {
                    heads.push(base + b * g.size(self.l));
                }
            }
        }
        // Free digits above l contribute multiples of M_{l+1}.
        let free_from = (self.l + 1).min(self.rank);
        let tail_count = g.size(self.rank) / g.size(free_from);
        let step = g.size(free_from);
        let mut out = Vec::with_capacity(heads.len() * tail_count);
        for t in 0..tail_count {
            for &h in &heads {
                out.push(h + t * step);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Number of rank-`N` cylinders in the set.
    pub fn count(&self, g: &GeneratorSequence) -> Result<usize> {
        Ok(self.indices(g)?.len())
    }

    /// Haar measure of the set.
    pub fn measure(&self, g: &GeneratorSequence) -> Result<f64> {
        Ok(self.count(g)? as f64 / g.size(self.rank) as f64)
    }
}

/// The `(k, l)` cell of `G_m \ I_N` containing `x`: `k` is the first nonzero
/// coordinate below `N`, `l` the next one (or `N` if there is none).
/// Returns `None` for `x` in `I_N`.
pub fn classify(x: &Point, rank: usize) -> Option<(usize, usize)> {
    let d = &x.digits()[..rank.min(x.rank())];
    let k = d.iter().position(|&v| v != 0)?;
    let l = d[k + 1..]
        .iter()
        .position(|&v| v != 0)
        .map(|p| p + k + 1)
        .unwrap_or(rank);
    Some((k, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_walsh_and_mixed() {
        let g = GeneratorSequence::walsh(6).unwrap();
        assert_eq!(g.sizes(), &[1, 2, 4, 8, 16, 32, 64]);
        let g = GeneratorSequence::new(&[2, 3, 2, 3], 4).unwrap();
        assert_eq!(g.sizes(), &[1, 2, 6, 12, 36]);
    }

    #[test]
    fn rejects_small_generator() {
        for n in 1..3 {
            assert!(matches!(
                GeneratorSequence::new(&[1, 2], n),
                Err(Error::InvalidGenerator { index: 0, value: 1 })
            ));
        }
        assert!(GeneratorSequence::new(&[2, 2], 3).is_err());
        assert!(GeneratorSequence::new(&[2], 0).is_err());
    }

    #[test]
    fn overflow_is_a_capacity_error() {
        assert!(matches!(
            GeneratorSequence::walsh(70),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn digit_expansions() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let d = w.index_to_digits(5).unwrap();
        assert_eq!(d.digits, vec![1, 0, 1]);
        assert_eq!(d.order, 2);
        let g = GeneratorSequence::periodic(&[2, 3], 4).unwrap();
        let d = g.index_to_digits(5).unwrap();
        assert_eq!(d.digits, vec![1, 2]);
        assert_eq!(d.order, 1);
        let z = w.index_to_digits(0).unwrap();
        assert_eq!(z.digits, vec![0]);
        assert_eq!(z.order, 0);
        assert!(w.index_to_digits(64).is_err());
        assert_eq!(w.order(5), 2);
        assert_eq!(g.order(5), 1);
        assert_eq!(GeneratorSequence::walsh(3).unwrap().order(8), 3);
    }

    #[test]
    fn digit_round_trip_exhaustive() {
        let g = GeneratorSequence::periodic(&[2, 3, 5], 6).unwrap();
        for n in 0..g.size(6) {
            let d = g.index_to_digits(n).unwrap();
            assert_eq!(g.digits_to_index(&d.digits).unwrap(), n);
            assert!(d.digits.iter().enumerate().all(|(j, &x)| x < g.radix(j)));
        }
    }

    #[test]
    fn point_subtraction() {
        let w = GeneratorSequence::walsh(3).unwrap();
        let x = Point::new(&w, vec![1, 0, 1]).unwrap();
        let t = Point::new(&w, vec![1, 1, 0]).unwrap();
        assert_eq!(x.sub(&w, &t).unwrap().digits(), &[0, 1, 1]);
        assert_eq!(x.sub(&w, &Point::zero(3)).unwrap(), x);
        assert_eq!(x.sub(&w, &x).unwrap(), Point::zero(3));

        let g = GeneratorSequence::new(&[2, 3], 2).unwrap();
        let x = Point::new(&g, vec![0, 1]).unwrap();
        let t = Point::new(&g, vec![1, 2]).unwrap();
        assert_eq!(x.sub(&g, &t).unwrap().digits(), &[1, 2]);
        assert!(x.sub(&g, &Point::zero(1)).is_err());
    }

    #[test]
    fn point_rejects_bad_digit() {
        let g = GeneratorSequence::new(&[2, 3], 2).unwrap();
        assert!(Point::new(&g, vec![0, 3]).is_err());
        assert!(Point::new(&g, vec![2, 0]).is_err());
    }

    #[test]
    fn sum_of_sizes() {
        let w = GeneratorSequence::walsh(4).unwrap();
        assert_eq!(w.sum_sizes(3).unwrap(), 15);
        assert_eq!(w.sum_sizes(0).unwrap(), 1);
        let g = GeneratorSequence::periodic(&[3], 3).unwrap();
        assert_eq!(g.sum_sizes(2).unwrap(), 13);
    }

    #[test]
    fn lacunary_indices() {
        let w = GeneratorSequence::walsh(12).unwrap();
        assert_eq!(w.lacunary_index(2).unwrap(), 21);
        assert_eq!(w.lacunary_index(3).unwrap(), 85);
    }

    fn brute_force(g: &GeneratorSequence, spec: &IndexSetSpec) -> Vec<Point> {
        (0..g.size(spec.rank))
            .map(|i| Point::from_index(g, spec.rank, i).unwrap())
            .filter(|x| spec.contains(x))
            .collect()
    }

    #[test]
    fn index_set_examples() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let s = IndexSetSpec::new(6, 2, 4);
        let pts = s.enumerate(&w).unwrap();
        assert_eq!(
            pts,
            vec![
                Point::new(&w, vec![0, 0, 1, 0, 1, 0]).unwrap(),
                Point::new(&w, vec![0, 0, 1, 0, 1, 1]).unwrap()
            ]
        );
        assert_eq!(s.measure(&w).unwrap(), 1.0 / 32.0);
        assert_eq!(pts, brute_force(&w, &s));

        let s = IndexSetSpec::new(3, 0, 3);
        assert_eq!(
            s.enumerate(&w.truncated(3).unwrap()).unwrap(),
            vec![Point::new(&w, vec![1, 0, 0]).unwrap()]
        );
        assert_eq!(s.measure(&w).unwrap(), 1.0 / 8.0);
    }

    #[test]
    fn enumeration_matches_predicate_mixed() {
        let g = GeneratorSequence::periodic(&[2, 3, 4], 5).unwrap();
        for k in 0..5 {
            for l in k + 1..=5 {
                let s = IndexSetSpec::new(5, k, l);
                assert_eq!(s.enumerate(&g).unwrap(), brute_force(&g, &s), "k={k} l={l}");
            }
        }
    }

    #[test]
    fn invalid_index_sets() {
        let w = GeneratorSequence::walsh(6).unwrap();
        assert!(IndexSetSpec::new(6, 3, 3).validate(&w).is_err());
        assert!(IndexSetSpec::new(6, 2, 7).validate(&w).is_err());
        assert!(IndexSetSpec::with_values(6, 1, 2, 3, 1)
            .validate(&w)
            .is_err());
        assert!(IndexSetSpec::with_values(6, 1, 1, 3, 0)
            .validate(&w)
            .is_err());
    }

    #[test]
    fn classification() {
        let w = GeneratorSequence::walsh(6).unwrap();
        let x = Point::new(&w, vec![0, 0, 1, 0, 1, 1]).unwrap();
        assert_eq!(classify(&x, 6), Some((2, 4)));
        assert_eq!(classify(&Point::zero(6), 6), None);
        let x = Point::new(&w, vec![0, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(classify(&x, 6), Some((1, 6)));
    }
}
