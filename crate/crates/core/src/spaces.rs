//! Quasinorms (`L_p`, weak `L_p`, `H_p`), finite martingales and p-atoms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AtomCondition, Error, Result};
use crate::group::{GeneratorSequence, Point};
use crate::par;
use crate::step::StepFunction;

/// Relative tolerance for the atom checks.
pub const ATOM_TOL: f64 = 1e-12;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponent p = {p} must be positive"
        )))
    }
}

/// Values at most this fraction of `||f||_inf` count as zero in the
/// quasinorms. For `p < 1`, `|v|^p` would otherwise turn roundoff left on
/// cells where `f` vanishes into a visible contribution.
pub const NOISE_FLOOR: f64 = 1e-12;

fn floor_of(f: &StepFunction) -> f64 {
    f.sup_norm() * NOISE_FLOOR
}

/// `(int |f|^p dmu)^(1/p)`.
pub fn lp_norm(f: &StepFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    let floor = floor_of(f);
    let sum = par::fixed_sum(f.values(), 0.0, |v| {
        let a = v.norm();
        if a > floor {
            a.powf(p)
        } else {
            0.0
        }
    });
    Ok((sum / f.len() as f64).powf(1.0 / p))
}

/// `sup_{lambda > 0} lambda mu(|f| > lambda)^(1/p)`.
///
/// For a step function the supremum is approached as `lambda` rises to one of
/// the finitely many levels of `|f|`, so it is a max over the sorted levels.
pub fn weak_lp_norm(f: &StepFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    let floor = floor_of(f);
    let mut levels: Vec<f64> = f
        .values()
        .iter()
        .map(|v| v.norm())
        .filter(|&v| v > floor)
        .collect();
    levels.sort_unstable_by(|a, b| b.total_cmp(a));
    let total = f.len() as f64;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < levels.len() {
        let v = levels[i];
        while i < levels.len() && levels[i] == v {
            i += 1;
        }
        best = best.max(v * (i as f64 / total).powf(1.0 / p));
    }
    Ok(best)
}

/// `sup_lambda lambda^p mu(|f| > lambda)`, the p-th power of [`weak_lp_norm`].
pub fn weak_lp_power(f: &StepFunction, p: f64) -> Result<f64> {
    Ok(weak_lp_norm(f, p)?.powf(p))
}

/// A finite martingale: `levels[n]` has rank `n`.
#[derive(Debug, Clone)]
pub struct Martingale {
    levels: Vec<StepFunction>,
}

impl Martingale {
    pub fn new(levels: Vec<StepFunction>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter(
                "martingale needs at least one level".into(),
            ));
        }
        for (n, f) in levels.iter().enumerate() {
            if f.rank() != n {
                return Err(Error::RankMismatch {
                    left: n,
                    right: f.rank(),
                });
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[StepFunction] {
        &self.levels
    }

    pub fn top(&self) -> &StepFunction {
        self.levels.last().expect("nonempty")
    }

    /// Largest deviation between a level and the average of the next one.
    pub fn compatibility_defect(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| {
                let down = w[1]
                    .average_to(w[0].rank())
                    .expect("rank n + 1 averages to n");
                down.sup_distance(&w[0]).expect("same rank")
            })
            .fold(0.0, f64::max)
    }

    pub fn is_compatible(&self, tol: f64) -> bool {
        self.compatibility_defect() <= tol
    }
}

/// Cylinder averages `E_n f` for `n = 0..=rank(f)`.
pub fn martingale_from(f: &StepFunction) -> Martingale {
    let levels = (0..=f.rank())
        .map(|n| f.average_to(n).expect("n <= rank"))
        .collect();
    Martingale { levels }
}

/// `f* = max_n |f^(n)|` at the top rank.
pub fn maximal_function(mart: &Martingale) -> StepFunction {
    let top = mart.top();
    let g = top.group();
    let rank = top.rank();
    let mut out = vec![0.0f64; top.len()];
    for level in mart.levels() {
        let period = level.len();
        let vals = level.values();
        par::for_each_chunk_mut(&mut out, par::SUM_BLOCK, |c, chunk| {
            let base = c * par::SUM_BLOCK;
            for (i, o) in chunk.iter_mut().enumerate() {
                *o = o.max(vals[(base + i) % period].norm());
            }
        });
    }
    StepFunction::from_real(g, rank, &out).expect("length M_rank")
}

/// `||f*||_p`.
pub fn hp_norm(mart: &Martingale, p: f64) -> Result<f64> {
    check_p(p)?;
    lp_norm(&maximal_function(mart), p)
}

/// A function supported on the cylinder `I_N(base)`, given by its values on
/// the rank-`N + depth` sub-cylinders (`values[j]` sits at local index `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub base: Point,
    pub values: Vec<Complex64>,
}

/// Reproducible recipe for a generated atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDescriptor {
    pub p: f64,
    pub base_cylinder: Vec<usize>,
    pub depth: usize,
    pub seed: u64,
}

/// Builds the atom as a step function and validates conditions a) to c).
pub fn make_atom(g: &GeneratorSequence, spec: &AtomSpec, p: f64) -> Result<StepFunction> {
    check_p(p)?;
    let n = spec.base.rank();
    let mut rank = n;
    let mut count = 1;
    while count < spec.values.len() {
        g.check_rank(rank + 1)?;
        count *= g.radix(rank);
        rank += 1;
    }
    if count != spec.values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} local values do not fill a refinement of I_{n}",
            spec.values.len()
        )));
    }
    g.check_rank(rank)?;
    let base = spec.base.index(g);
    let period = g.size(n);
    let mut values = vec![Complex64::new(0.0, 0.0); g.size(rank)];
    for (j, &v) in spec.values.iter().enumerate() {
        values[base + j * period] = v;
    }
    let atom = StepFunction::new(g, rank, values)?;
    check_atom(&atom, &spec.base, p)?;
    Ok(atom)
}

/// Checks a) zero mean, b) `||a||_inf <= mu(I)^(-1/p)`, c) support in `I`.
pub fn check_atom(a: &StepFunction, base: &Point, p: f64) -> Result<()> {
    check_p(p)?;
    let g = a.group();
    let n = base.rank();
    if n > a.rank() {
        return Err(Error::Rank {
            needed: n,
            available: a.rank(),
        });
    }
    let period = g.size(n);
    let b = base.index(g);
    let sup = a.sup_norm();
    if let Some(i) = (0..a.len()).find(|&i| i % period != b && a.values()[i].norm() > 0.0) {
        return Err(Error::Atom {
            condition: AtomCondition::Support,
            detail: format!("nonzero value at cylinder {i}"),
        });
    }
    let bound = (period as f64).powf(1.0 / p);
    if sup > bound * (1.0 + ATOM_TOL) {
        return Err(Error::Atom {
            condition: AtomCondition::Sup,
            detail: format!("sup {sup} exceeds {bound}"),
        });
    }
    let mean = a.integral().norm();
    if mean > ATOM_TOL * sup.max(1.0) / period as f64 {
        return Err(Error::Atom {
            condition: AtomCondition::Mean,
            detail: format!("integral {mean}"),
        });
    }
    Ok(())
}

/// Seeded real atom on `I_N(base)` at depth `depth`: uniform values, mean
/// removed, rescaled so that `||a||_inf = mu(I)^(-1/p)` exactly.
pub fn random_atom(
    g: &GeneratorSequence,
    desc: &AtomDescriptor,
) -> Result<(AtomSpec, StepFunction)> {
    if desc.depth == 0 {
        return Err(Error::InvalidParameter("an atom needs depth >= 1".into()));
    }
    let base = Point::new(g, desc.base_cylinder.clone())?;
    let n = base.rank();
    g.check_rank(n + desc.depth)?;
    let count = g.size(n + desc.depth) / g.size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(desc.seed);
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = raw.iter().sum::<f64>() / count as f64;
    let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    let peak = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = (g.size(n) as f64).powf(1.0 / desc.p) / peak;
    let spec = AtomSpec {
        base,
        values: centered
            .iter()
            .map(|v| Complex64::new(v * scale, 0.0))
            .collect(),
    };
    let atom = make_atom(g, &spec, desc.p)?;
    Ok((spec, atom))
}
