//! Measures unnamed constants with the naive oracle and freezes them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::group::GeneratorSequence;
use crate::kernels::Convention;

use super::atoms::{prepared_atom, AtomBoundConfig};
use super::fixtures::{constant_name, Fixture};
use super::kernel_checks::translated_integral_ns;
use super::oracle;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment")]
pub enum CalibrationTarget {
    #[serde(rename = "eq4")]
    KernelL1 { n_max: usize },
    #[serde(rename = "eq5")]
    KernelDomination { n_max: usize, rank: usize },
    #[serde(rename = "lemma4")]
    TranslatedIntegral { ranks: Vec<usize> },
    #[serde(rename = "theorem1")]
    AtomBound(AtomBoundConfig),
}

/// Runs the oracle for `target` and returns the frozen fixture.
pub fn calibrate(g: &GeneratorSequence, target: &CalibrationTarget) -> Result<Fixture> {
    let (experiment, name, measured) = match target {
        CalibrationTarget::KernelL1 { n_max } => {
            let rank = g.rank_for(*n_max)?;
            let sup = Convention::ALL
                .iter()
                .map(|&c| oracle::sup_kernel_l1(g, *n_max, rank, c))
                .fold(0.0, f64::max);
            ("eq4", constant_name("sup_l1", g), sup)
        }
        CalibrationTarget::KernelDomination { n_max, rank } => {
            g.check_rank(*rank)?;
            let c = Convention::ALL
                .iter()
                .map(|&conv| oracle::domination_constant(g, *n_max, *rank, conv))
                .fold(0.0, f64::max);
            ("eq5", constant_name("c", g), c)
        }
        CalibrationTarget::TranslatedIntegral { ranks } => {
            let mut worst: f64 = 0.0;
            for &rank in ranks {
                for n in translated_integral_ns(g, rank) {
                    for conv in Convention::ALL {
                        worst = worst.max(oracle::translated_integral_ratio(g, rank, n, conv)?);
                    }
                }
            }
            ("lemma4", constant_name("ratio", g), worst)
        }
        CalibrationTarget::AtomBound(cfg) => {
            cfg.validate(g)?;
            let w = cfg.weight();
            let mut worst: f64 = 0.0;
            for &rank in &cfg.ranks {
                let n_max = g.size(rank + cfg.extra_ranks);
                for i in 0..cfg.atoms_per_rank {
                    let a = prepared_atom(g, cfg, rank, i)?;
                    let j =
                        oracle::atom_integral(&a, rank, n_max, |n| w.weight(n), cfg.p, cfg.conv);
                    worst = worst.max(j);
                }
                log::info!("theorem1 calibration: N = {rank} done");
            }
            ("theorem1", cfg.constant(g), worst)
        }
    };
    log::info!("{experiment}/{name}: measured {measured}");
    Ok(Fixture::freeze(experiment, &name, measured))
}

/// Calibration targets backing the shipped fixtures.
pub fn standard_targets() -> Vec<(GeneratorSequence, CalibrationTarget)> {
    let walsh = |n| GeneratorSequence::walsh(n).expect("valid");
    vec![
        (walsh(9), CalibrationTarget::KernelL1 { n_max: 512 }),
        (
            walsh(8),
            CalibrationTarget::KernelDomination { n_max: 64, rank: 8 },
        ),
        (
            walsh(6),
            CalibrationTarget::TranslatedIntegral {
                ranks: vec![3, 4, 5],
            },
        ),
        (
            walsh(9),
            CalibrationTarget::AtomBound(AtomBoundConfig::new(1.0 / 3.0, vec![3, 4, 5, 6])),
        ),
        (
            walsh(9),
            CalibrationTarget::AtomBound(AtomBoundConfig::new(0.4, vec![3, 4, 5, 6])),
        ),
    ]
}
