//! Brute-force reference computations for calibration.
//!
//! Everything here evaluates characters one at a time through
//! [`vilenkin`] and subtracts group elements explicitly. It shares no code
//! with the transform or the sweep engine, which is the point.

use num_complex::Complex64;

use crate::character::vilenkin;
use crate::error::Result;
use crate::group::{classify, GeneratorSequence, IndexSetSpec, Point};
use crate::kernels::Convention;
use crate::step::StepFunction;
use crate::transform::forward_naive;

fn points(g: &GeneratorSequence, rank: usize) -> Vec<Point> {
    (0..g.size(rank))
        .map(|i| Point::from_index(g, rank, i).expect("index below M_rank"))
        .collect()
}

/// Running Fejér sums at one point: calls `visit(n, n sigma_n)` for
/// `n = 1..=n_max`, where `sigma_n` is the mean of the partial sums of
/// `sum_j coeff(j) psi_j(x)`.
fn scan_point(
    g: &GeneratorSequence,
    x: &Point,
    n_max: usize,
    conv: Convention,
    coeff: impl Fn(usize) -> Complex64,
    mut visit: impl FnMut(usize, Complex64),
) {
    let mut partial = Complex64::new(0.0, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        // Before the update: partial = S_{n-1}, total = sum_{j < n-1} S_j.
        total += partial;
        partial += coeff(n - 1) * vilenkin(g, n - 1, x).expect("n below M_rank");
        let scaled = match conv {
            Convention::Lagged => total,
            Convention::Classical => total + partial,
        };
        visit(n, scaled);
    }
}

/// `K_n` at every rank-`rank` point.
pub fn kernel_values(
    g: &GeneratorSequence,
    n: usize,
    rank: usize,
    conv: Convention,
) -> Vec<Complex64> {
    points(g, rank)
        .iter()
        .map(|x| {
            let mut out = Complex64::new(0.0, 0.0);
            scan_point(
                g,
                x,
                n,
                conv,
                |_| Complex64::new(1.0, 0.0),
                |k, v| {
                    if k == n {
                        out = v / n as f64;
                    }
                },
            );
            out
        })
        .collect()
}

/// `max_{n <= n_max} int |K_n|`.
pub fn sup_kernel_l1(g: &GeneratorSequence, n_max: usize, rank: usize, conv: Convention) -> f64 {
    let mut l1 = vec![0.0; n_max + 1];
    for x in points(g, rank) {
        scan_point(
            g,
            &x,
            n_max,
            conv,
            |_| Complex64::new(1.0, 0.0),
            |n, v| {
                l1[n] += v.norm() / n as f64;
            },
        );
    }
    let cell = g.size(rank) as f64;
    l1.iter().skip(1).map(|v| v / cell).fold(0.0, f64::max)
}

/// Largest ratio `n |K_n(x)| / sum_{A <= |n|} M_A |K_{M_A}(x)|` over
/// `n <= n_max` and rank-`rank` points with a nonzero right side.
pub fn domination_constant(
    g: &GeneratorSequence,
    n_max: usize,
    rank: usize,
    conv: Convention,
) -> f64 {
    let mut best: f64 = 0.0;
    for x in points(g, rank) {
        let mut scaled = vec![Complex64::new(0.0, 0.0); n_max + 1];
        scan_point(
            g,
            &x,
            n_max,
            conv,
            |_| Complex64::new(1.0, 0.0),
            |n, v| scaled[n] = v,
        );
        for n in 1..=n_max {
            let rhs: f64 = (0..=g.order(n)).map(|a| scaled[g.size(a)].norm()).sum();
            if rhs > 1e-9 {
                best = best.max(scaled[n].norm() / rhs);
            }
        }
    }
    best
}

/// Largest `int_{I_N} |K_n(x - t)| dmu(t) / (M_l M_k / M_N^2)` over all
/// rank-`N` points `x` off `I_N`.
pub fn translated_integral_ratio(
    g: &GeneratorSequence,
    rank: usize,
    n: usize,
    conv: Convention,
) -> Result<f64> {
    let kernel_rank = rank.max(g.rank_for(n)?);
    let kernel = StepFunction::new(g, kernel_rank, kernel_values(g, n, kernel_rank, conv))?;
    let fine = points(g, kernel_rank);
    let inside: Vec<&Point> = fine.iter().filter(|t| t.in_zero_cylinder(rank)).collect();
    let mut best: f64 = 0.0;
    for x in points(g, rank) {
        let Some((k, l)) = classify(&x, rank) else {
            continue;
        };
        let mut lifted = x.digits().to_vec();
        lifted.resize(kernel_rank, 0);
        let lifted = Point::new(g, lifted)?;
        let sum: f64 = inside
            .iter()
            .map(|t| {
                kernel
                    .at(&lifted.sub(g, t).expect("same rank"))
                    .expect("rank")
                    .norm()
            })
            .sum();
        let value = sum / g.size(kernel_rank) as f64;
        let scale = crate::kernels::cell_scale(g, &IndexSetSpec::new(rank, k, l));
        best = best.max(value / scale);
    }
    Ok(best)
}

/// `int_{outside I_N} (max_{n <= n_max} |sigma_n a| / w(n))^p`, with the
/// coefficients of `a` from the naive transform.
pub fn atom_integral(
    a: &StepFunction,
    base_rank: usize,
    n_max: usize,
    weight: impl Fn(usize) -> f64,
    p: f64,
    conv: Convention,
) -> f64 {
    let g = a.group();
    let coeffs = forward_naive(a).into_coeffs();
    let sup = a.sup_norm();
    let mut total = 0.0;
    for x in points(g, a.rank()) {
        if x.in_zero_cylinder(base_rank) {
            continue;
        }
        let mut best: f64 = 0.0;
        scan_point(
            g,
            &x,
            n_max,
            conv,
            |j| coeffs[j],
            |n, v| {
                best = best.max(v.norm() / n as f64 / weight(n));
            },
        );
        if best > sup * crate::spaces::NOISE_FLOOR {
            total += best.powf(p);
        }
    }
    total / g.size(a.rank()) as f64
}
