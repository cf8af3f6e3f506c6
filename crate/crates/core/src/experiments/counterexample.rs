//! The divergence construction: `f_n = D_{M_{2n+1}} - D_{M_{2n}}` and the
//! Fejér mean at the lacunary index `q_n`, whose weighted weak-`L_p` size
//! outgrows `||f_n||_{H_p}` whenever the weight grows slower than
//! `(n+1)^(1/p-2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::character::character;
use crate::error::{Error, Result};
use crate::group::{GeneratorSequence, IndexSetSpec};
use crate::kernels::{dirichlet, dirichlet_closed, fejer_kernel, Convention};
use crate::operators::{fejer_mean, WeightSpec};
use crate::spaces::{hp_norm, martingale_from, weak_lp_norm};
use crate::step::{Spectrum, StepFunction};
use crate::transform::{forward, inverse};

use super::{timed, CaseRecord, VerificationReport};

/// Tolerance of the exact structural identities.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Tolerance of the mean/kernel identity, relative to `max(1, q)`.
pub const KERNEL_FORM_TOL: f64 = 1e-10;
/// Widest allowed spread of the normalized ratio across a sweep.
pub const BAND_LIMIT: f64 = 10.0;
/// Bounded-case tolerance: every ratio stays within this factor of the first.
pub const BOUNDED_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleCase {
    pub n_k: usize,
    pub p: f64,
    pub phi: WeightSpec,
}

/// Measured quantities of one case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleOutcome {
    pub n_k: usize,
    pub q: usize,
    pub m_2n: usize,
    pub phi_q: f64,
    pub hp_norm: f64,
    pub hp_bound: f64,
    /// `||sigma_q f / phi(q)||_{p,inf}`.
    pub weak_lp: f64,
    pub ratio: f64,
    /// `ratio * phi(q) / M_{2n}^(1/p-2)`.
    pub normalized: f64,
    /// `inf |sigma_q f| M_{2n}` over `I_{2n}^{2,4}`.
    pub witness_c: Option<f64>,
    pub witness_measure: Option<f64>,
    pub witness_set_measure: Option<f64>,
}

/// `f_n` at rank `2n + 1`.
pub fn counterexample_function(g: &GeneratorSequence, n_k: usize) -> Result<StepFunction> {
    let rank = 2 * n_k + 1;
    g.check_rank(rank)?;
    Ok(&dirichlet_closed(g, 2 * n_k + 1, rank)? - &dirichlet_closed(g, 2 * n_k, rank)?)
}

fn sampled(limit: usize, exhaustive: bool, anchors: &[usize]) -> Vec<usize> {
    if exhaustive {
        return (0..=limit).collect();
    }
    let mut v: Vec<usize> = anchors.iter().copied().filter(|&i| i <= limit).collect();
    let step = (limit / 7).max(1);
    v.extend((0..=limit).step_by(step));
    v.sort_unstable();
    v.dedup();
    v
}

/// Structural checks of the construction: spectrum, partial sums, the shift
/// identity and the kernel form of the Fejér mean.
fn check_structure(
    g: &GeneratorSequence,
    n_k: usize,
    f: &StepFunction,
    conv: Convention,
    r: &mut VerificationReport,
) -> Result<()> {
    let rank = f.rank();
    let lo = g.size(2 * n_k);
    let hi = g.size(2 * n_k + 1);
    let exhaustive = n_k <= 2;

    let spectrum = forward(f);
    let spec_err = spectrum
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            (c - Complex64::new(if (lo..hi).contains(&i) { 1.0 } else { 0.0 }, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    r.record(
        CaseRecord::at_most("spectrum_is_block_indicator", spec_err, STRUCTURE_TOL)
            .with("n_k", n_k),
    );

    // S_i f: zero up to M_{2n}, D_i - D_{M_{2n}} inside the block, f above it.
    let d_lo = dirichlet(g, lo, rank)?;
    let mut branch_err: f64 = 0.0;
    for i in sampled(
        hi,
        exhaustive,
        &[lo - 1, lo, lo + 1, (lo + hi) / 2, hi - 1, hi],
    ) {
        let s = inverse(&spectrum.truncated(i));
        let want = if i <= lo {
            StepFunction::zeros(g, rank)?
        } else if i < hi {
            &dirichlet(g, i, rank)? - &d_lo
        } else {
            f.clone()
        };
        branch_err = branch_err.max(s.sup_distance(&want)?);
    }
    r.record(
        CaseRecord::at_most("partial_sum_branches", branch_err, STRUCTURE_TOL)
            .with("n_k", n_k)
            .with("exhaustive", exhaustive),
    );

    // D_{j + M} - D_M = psi_M D_j for j < M.
    let psi = character(g, lo, rank)?;
    let mut shift_err: f64 = 0.0;
    for j in sampled(lo - 1, exhaustive, &[1, 2, lo / 2, lo - 1]) {
        let lhs = &dirichlet(g, j + lo, rank)? - &d_lo;
        let rhs = psi.try_mul(&dirichlet(g, j, rank)?)?;
        shift_err = shift_err.max(lhs.sup_distance(&rhs)?);
    }
    r.record(CaseRecord::at_most("shift_identity", shift_err, STRUCTURE_TOL).with("n_k", n_k));

    // q sigma_q f = psi_M q' K_{q'} with q' = q - M (same convention).
    let q = g.lacunary_index(n_k)?;
    let q_prev = q - lo;
    let mean = fejer_mean(f, q, conv)?;
    let kernel_form = psi
        .try_mul(&fejer_kernel(g, q_prev, rank, conv)?)?
        .scale(Complex64::new(q_prev as f64, 0.0));
    let err = (&mean * q as f64).sup_distance(&kernel_form)?;
    r.record(
        CaseRecord::at_most(
            "mean_equals_shifted_kernel",
            err,
            KERNEL_FORM_TOL * (q as f64).max(1.0),
        )
        .with("n_k", n_k)
        .with("conv", conv.name()),
    );
    Ok(())
}

/// One case of the construction with all measured quantities.
pub fn run_counterexample(
    g: &GeneratorSequence,
    case: &CounterexampleCase,
    conv: Convention,
) -> Result<(VerificationReport, CounterexampleOutcome)> {
    let mut outcome = None;
    let report = timed(|| {
        let n_k = case.n_k;
        if n_k == 0 {
            return Err(Error::InvalidParameter("n_k must be at least 1".into()));
        }
        if n_k < 3 {
            log::warn!("n_k = {n_k} < 3: the lower-bound witness set degenerates");
        }
        let f = counterexample_function(g, n_k)?;
        let rank = f.rank();
        let mut r = VerificationReport::new("counterexample", g);
        r.param("n_k", n_k)
            .param("p", case.p)
            .param("conv", conv.name());
        r.param("phi", serde_json::to_value(&case.phi)?);
        check_structure(g, n_k, &f, conv, &mut r)?;

        let q = g.lacunary_index(n_k)?;
        let m_2n = g.size(2 * n_k);
        let mean = fejer_mean(&f, q, conv)?;
        let phi_q = case.phi.weight(q);
        let hp = hp_norm(&martingale_from(&f), case.p)?;
        let hp_bound = (m_2n as f64).powf(1.0 - 1.0 / case.p);
        let weak = weak_lp_norm(&(&mean * (1.0 / phi_q)), case.p)?;
        let ratio = weak / hp;
        let normalized = ratio * phi_q / (m_2n as f64).powf(1.0 / case.p - 2.0);
        r.record(CaseRecord::info("hp_norm", hp).with("bound", hp_bound));
        r.record(CaseRecord::info("ratio", ratio));

        // Lower-bound witness on I_{2n}^{2,4}.
        let (mut witness_c, mut witness_measure, mut witness_set_measure) = (None, None, None);
        if 2 * n_k >= 4 {
            let spec = IndexSetSpec::new(2 * n_k, 2, 4);
            let period = g.size(2 * n_k);
            let cells: Vec<usize> = spec.indices(g)?;
            let c = cells
                .iter()
                .flat_map(|&b| mean.values()[b..].iter().step_by(period))
                .map(|v| v.norm() * m_2n as f64)
                .fold(f64::INFINITY, f64::min);
            let threshold = c / m_2n as f64 * (1.0 - 1e-12);
            let level = mean
                .values()
                .iter()
                .filter(|v| v.norm() >= threshold)
                .count() as f64
                / mean.len() as f64;
            let set_measure = spec.measure(g)?;
            r.record(
                CaseRecord::at_least("witness_constant_positive", c, f64::MIN_POSITIVE)
                    .with("n_k", n_k),
            );
            r.record(
                CaseRecord::at_least("superlevel_measure", level, set_measure).with("n_k", n_k),
            );
            witness_c = Some(c);
            witness_measure = Some(level);
            witness_set_measure = Some(set_measure);
        }

        // Lacunary lower bound carried onto the cells I_{2n}^{2k,2s}.
        if n_k >= 3 {
            let mut c_min = f64::INFINITY;
            let period = g.size(2 * n_k);
            for k in 0..=n_k - 3 {
                for s in k + 2..n_k {
                    let spec = IndexSetSpec::new(2 * n_k, 2 * k, 2 * s);
                    let scale = (g.size(2 * k) * g.size(2 * s)) as f64 / m_2n as f64;
                    for b in spec.indices(g)? {
                        for v in mean.values()[b..].iter().step_by(period) {
                            c_min = c_min.min(v.norm() / scale);
                        }
                    }
                }
            }
            r.record(CaseRecord::info("lacunary_cells_min_constant", c_min).with("n_k", n_k));
        }
        debug_assert_eq!(mean.rank(), rank);

        outcome = Some(CounterexampleOutcome {
            n_k,
            q,
            m_2n,
            phi_q,
            hp_norm: hp,
            hp_bound,
            weak_lp: weak,
            ratio,
            normalized,
            witness_c,
            witness_measure,
            witness_set_measure,
        });
        Ok(r)
    })?;
    Ok((report, outcome.expect("set on success")))
}

/// One output row of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_k: usize,
    pub q: usize,
    #[serde(rename = "M_2n_k")]
    pub m_2n: usize,
    pub hp_norm: f64,
    pub weak_lp: f64,
    pub ratio: f64,
    pub normalized: f64,
    pub convention: Convention,
}

/// Whether the tested weight leaves room for divergence on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRegime {
    /// `(q+1)^(1/p-2) / phi(q)` increases along the grid: the ratio must grow.
    Divergent,
    /// It does not: the ratio must stay bounded.
    Bounded,
}

/// Checks the weight hypotheses on the grid of lacunary indices and decides
/// the regime. Fails with the violated hypothesis named.
pub fn phi_regime(
    g: &GeneratorSequence,
    p: f64,
    phi: &WeightSpec,
    n_list: &[usize],
) -> Result<SweepRegime> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1/2)")));
    }
    let qs: Vec<usize> = n_list
        .iter()
        .map(|&n| g.lacunary_index(n))
        .collect::<Result<_>>()?;
    if let WeightSpec::Custom { .. } = phi {
        phi.validate(qs.iter().copied().max().unwrap_or(1))?;
    } else {
        phi.validate(1)?;
    }
    let values: Vec<f64> = qs.iter().map(|&q| phi.weight(q)).collect();
    if let Some(i) = values.iter().position(|&v| v < 1.0) {
        return Err(Error::Weight(format!(
            "phi >= 1 fails: phi({}) = {}",
            qs[i], values[i]
        )));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Weight(format!(
            "phi nondecreasing fails between q = {} and q = {}",
            qs[i],
            qs[i + 1]
        )));
    }
    let growth: Vec<f64> = qs
        .iter()
        .zip(&values)
        .map(|(&q, &v)| (q as f64 + 1.0).powf(1.0 / p - 2.0) / v)
        .collect();
    let increasing = growth.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9));
    Ok(if increasing {
        SweepRegime::Divergent
    } else {
        SweepRegime::Bounded
    })
}

/// Runs the construction for every `n_k` and checks the growth pattern of
/// the ratio `||sigma_q f / phi(q)||_{p,inf} / ||f||_{H_p}`.
pub fn divergence_sweep(
    g: &GeneratorSequence,
    p: f64,
    phi: &WeightSpec,
    n_list: &[usize],
    conv: Convention,
) -> Result<(VerificationReport, Vec<SweepRow>)> {
    let mut rows = Vec::new();
    let report = timed(|| {
        if n_list.is_empty() {
            return Err(Error::InvalidParameter("empty n_k list".into()));
        }
        let regime = phi_regime(g, p, phi, n_list)?;
        let mut r = VerificationReport::new("sweep", g);
        r.param("p", p)
            .param("phi", serde_json::to_value(phi)?)
            .param("n_k", n_list.to_vec())
            .param("conv", conv.name());
        r.summarize("regime", serde_json::to_value(regime)?);
        let mut outcomes = Vec::new();
        for &n_k in n_list {
            let case = CounterexampleCase {
                n_k,
                p,
                phi: phi.clone(),
            };
            let (sub, out) = run_counterexample(g, &case, conv)?;
            for c in sub.cases {
                r.record(c.with("n_k", n_k));
            }
            rows.push(SweepRow {
                n_k,
                q: out.q,
                m_2n: out.m_2n,
                hp_norm: out.hp_norm,
                weak_lp: out.weak_lp,
                ratio: out.ratio,
                normalized: out.normalized,
                convention: conv,
            });
            outcomes.push(out);
        }
        let ratios: Vec<f64> = outcomes.iter().map(|o| o.ratio).collect();
        r.summarize("ratios", ratios.clone());
        match regime {
            SweepRegime::Divergent => {
                let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
                r.record(CaseRecord::flag("ratio_strictly_increasing", increasing));
                let norm: Vec<f64> = outcomes.iter().map(|o| o.normalized).collect();
                let lo = norm.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = norm.iter().copied().fold(0.0, f64::max);
                r.record(CaseRecord::at_most(
                    "normalized_band_width",
                    hi / lo,
                    BAND_LIMIT,
                ));
            }
            SweepRegime::Bounded => {
                let first = ratios[0];
                let spread = ratios
                    .iter()
                    .map(|&x| (x / first).max(first / x))
                    .fold(1.0, f64::max);
                r.record(CaseRecord::at_most(
                    "ratio_spread_vs_first",
                    spread,
                    BOUNDED_FACTOR,
                ));
                r.note(
                    "weight grows as fast as (n+1)^(1/p-2): the ratio is expected to stay bounded",
                );
            }
        }
        if matches!(phi, WeightSpec::Unit) {
            let exponent = 1.0 / p - 2.0;
            for w in outcomes.windows(2) {
                let expected = (w[1].m_2n as f64 / w[0].m_2n as f64).powf(exponent);
                let factor = (w[1].ratio / w[0].ratio) / expected;
                r.record(
                    CaseRecord::info("growth_factor_vs_rate", factor)
                        .with("from_n_k", w[0].n_k)
                        .with("to_n_k", w[1].n_k),
                );
                r.record(
                    CaseRecord::at_least("growth_factor_lower", factor, 0.5)
                        .with("to_n_k", w[1].n_k),
                );
                r.record(
                    CaseRecord::at_most("growth_factor_upper", factor, 2.0)
                        .with("to_n_k", w[1].n_k),
                );
            }
        }
        Ok(r)
    })?;
    Ok((report, rows))
}

/// The spectrum of `f_n` built directly: ones on `[M_{2n}, M_{2n+1})`.
pub fn block_spectrum(g: &GeneratorSequence, n_k: usize) -> Result<Spectrum> {
    let lo = g.size(2 * n_k);
    let hi = g.size(2 * n_k + 1);
    Spectrum::from_fn(g, 2 * n_k + 1, |i| {
        Complex64::new(if (lo..hi).contains(&i) { 1.0 } else { 0.0 }, 0.0)
    })
}
