//! `vilenkin`: runs verification drivers, divergence sweeps and fixture
//! calibration from the command line.
//!
//! Exit status: 0 when every case passes, 1 when a verification case fails,
//! 2 for usage, configuration or I/O errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use vilenkin::experiments::atoms::{verify_atom_bound, AtomBoundConfig};
use vilenkin::experiments::calibrate::{calibrate, standard_targets, CalibrationTarget};
use vilenkin::experiments::counterexample::{divergence_sweep, SweepRow};
use vilenkin::experiments::kernel_checks::{
    verify_dirichlet_indicator, verify_fejer_closed_form, verify_kernel_domination,
    verify_kernel_l1, verify_lacunary_bound, verify_partition, verify_translated_integral,
};
use vilenkin::experiments::{group_tag, FixtureStore, VerificationReport};
use vilenkin::group::GeneratorSequence;
use vilenkin::io::write_atomic;
use vilenkin::kernels::Convention;
use vilenkin::operators::WeightSpec;

use config::{List, MPattern, RunConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "vilenkin",
    version,
    about = "Numerical verification on bounded Vilenkin groups"
)]
struct Cli {
    /// Worker threads for the data-parallel kernels (default: all processors).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    /// Fixture directory; overrides VILENKIN_FIXTURES.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one verification driver and write its JSON and CSV report.
    Verify {
        experiment: Experiment,
        #[command(flatten)]
        opts: ExperimentOpts,
    },
    /// Run the counterexample for several n_k and tabulate the ratios.
    Sweep(SweepOpts),
    /// Measure an unnamed constant with the naive oracle and freeze it.
    Calibrate {
        experiment: CalibratedExperiment,
        #[command(flatten)]
        opts: ExperimentOpts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Experiment {
    #[value(name = "lemma2")]
    LacunaryBound,
    #[value(name = "lemma3")]
    FejerClosedForm,
    #[value(name = "lemma4")]
    TranslatedIntegral,
    #[value(name = "theorem1")]
    AtomBound,
    #[value(name = "eq3")]
    DirichletIndicator,
    #[value(name = "eq4")]
    KernelL1,
    #[value(name = "eq5")]
    KernelDomination,
    Partition,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CalibratedExperiment {
    /// Every constant backing the shipped fixtures.
    All,
    #[value(name = "lemma4")]
    TranslatedIntegral,
    #[value(name = "theorem1")]
    AtomBound,
    #[value(name = "eq4")]
    KernelL1,
    #[value(name = "eq5")]
    KernelDomination,
}

#[derive(Args, Debug, Clone)]
struct ExperimentOpts {
    /// Generator pattern: `2`, `2,3` (repeating) or `2,3,4,2:explicit`.
    #[arg(long, default_value = "2")]
    m: MPattern,
    /// Scale index A (lemma2, lemma3).
    #[arg(long = "A")]
    a: Option<usize>,
    /// Rank or comma-separated ranks N, depending on the experiment.
    #[arg(long = "N")]
    n: Option<List<usize>>,
    /// Largest n scanned (eq4, eq5).
    #[arg(long)]
    nmax: Option<usize>,
    /// Atom exponent (theorem1).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p: f64,
    /// Atoms per rank (theorem1).
    #[arg(long, default_value_t = 20)]
    atoms: usize,
    /// Base seed for atom generation (theorem1).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fejér kernel convention (theorem1).
    #[arg(long, default_value = "lagged")]
    conv: Convention,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PhiFamily {
    /// phi = 1
    Const,
    /// phi(n) = (n+1)^(1/p-2)
    Power,
    /// phi(n) = (n+1)^(1/p-2) / log2(n+2)^2
    Powerlog,
    /// phi(n) = log2(n+1)^2
    Log,
}

#[derive(Args, Debug, Clone)]
struct SweepOpts {
    /// Generator pattern, as for `verify`.
    #[arg(long, default_value = "2")]
    m: MPattern,
    /// Exponent p in (0, 1/2).
    #[arg(long)]
    p: f64,
    /// Weight family dividing the Fejér means.
    #[arg(long, value_enum, default_value = "const")]
    phi: PhiFamily,
    /// Comma-separated n_k values.
    #[arg(long, default_value = "3,4,5")]
    nk: List<usize>,
    #[arg(long, default_value = "lagged")]
    conv: Convention,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    configure_threads(cli.threads)?;
    let store = match &cli.fixtures {
        Some(dir) => FixtureStore::new(dir),
        None => FixtureStore::from_env(),
    };
    match &cli.command {
        Command::Verify { experiment, opts } => cmd_verify(*experiment, opts, &store, &cli.out),
        Command::Sweep(opts) => cmd_sweep(opts, &cli.out),
        Command::Calibrate { experiment, opts } => cmd_calibrate(*experiment, opts, &store),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if threads.is_some_and(|n| n != 1) {
        log::warn!("built without the parallel feature; --threads is ignored");
    }
    Ok(())
}

fn ranks(opts: &ExperimentOpts, default: &[usize]) -> Vec<usize> {
    opts.n
        .as_ref()
        .map_or_else(|| default.to_vec(), |l| l.0.clone())
}

fn single_rank(opts: &ExperimentOpts, default: usize) -> anyhow::Result<usize> {
    match opts.n.as_ref().map(|l| l.0.as_slice()) {
        None => Ok(default),
        Some([n]) => Ok(*n),
        Some(_) => bail!("--N takes a single rank for this experiment"),
    }
}

fn atom_bound_config(opts: &ExperimentOpts) -> AtomBoundConfig {
    AtomBoundConfig {
        atoms_per_rank: opts.atoms,
        seed: opts.seed,
        conv: opts.conv,
        ..AtomBoundConfig::new(opts.p, ranks(opts, &[3, 4, 5, 6]))
    }
}

fn max_of(v: &[usize]) -> usize {
    v.iter().copied().max().unwrap_or(0)
}

fn cmd_verify(
    experiment: Experiment,
    opts: &ExperimentOpts,
    store: &FixtureStore,
    out: &Path,
) -> anyhow::Result<bool> {
    let (report, params) = match experiment {
        Experiment::LacunaryBound => {
            let a = opts.a.unwrap_or(3);
            (
                verify_lacunary_bound(&opts.m.group(2 * a)?, a)?,
                json!({ "A": a }),
            )
        }
        Experiment::FejerClosedForm => {
            let a = opts.a.unwrap_or(4);
            (
                verify_fejer_closed_form(&opts.m.group_within(a + 1, a + 2)?, a)?,
                json!({ "A": a }),
            )
        }
        Experiment::TranslatedIntegral => {
            let ns = ranks(opts, &[3, 4, 5]);
            (
                verify_translated_integral(&opts.m.group(max_of(&ns) + 1)?, &ns, store)?,
                json!({ "N": ns }),
            )
        }
        Experiment::AtomBound => {
            let cfg = atom_bound_config(opts);
            let g = opts.m.group(max_of(&cfg.ranks) + cfg.extra_ranks)?;
            (
                verify_atom_bound(&g, &cfg, store)?,
                serde_json::to_value(&cfg)?,
            )
        }
        Experiment::DirichletIndicator => {
            let n = single_rank(opts, 8)?;
            (
                verify_dirichlet_indicator(&opts.m.group(n)?, n)?,
                json!({ "N": n }),
            )
        }
        Experiment::KernelL1 => {
            let nmax = opts.nmax.unwrap_or(512);
            let g = opts.m.group(rank_for(&opts.m, nmax)?)?;
            (verify_kernel_l1(&g, nmax, store)?, json!({ "nmax": nmax }))
        }
        Experiment::KernelDomination => {
            let nmax = opts.nmax.unwrap_or(64);
            let n = single_rank(opts, 8)?;
            (
                verify_kernel_domination(&opts.m.group(n)?, nmax, n, store)?,
                json!({ "nmax": nmax, "N": n }),
            )
        }
        Experiment::Partition => {
            let n = single_rank(opts, 6)?;
            (verify_partition(&opts.m.group(n)?, n)?, json!({ "N": n }))
        }
    };
    let name = experiment
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_owned();
    let seeded = experiment == Experiment::AtomBound;
    let cfg = RunConfig {
        command: "verify".into(),
        experiment: name.clone(),
        m_pattern: opts.m.to_string(),
        group: report.group.clone(),
        parameters: params,
        convention: seeded.then_some(opts.conv),
        seed: seeded.then_some(opts.seed),
        output: out.to_path_buf(),
        calibration: false,
    };
    finish(report, &cfg, &name, out)
}

/// Smallest rank `r` with `M_r >= n` for the pattern.
fn rank_for(m: &MPattern, n: usize) -> anyhow::Result<usize> {
    let mut size = 1usize;
    let mut rank = 0;
    while size < n {
        rank += 1;
        let g = m.group(rank)?;
        size = g.size(rank);
    }
    Ok(rank)
}

fn finish(
    mut report: VerificationReport,
    cfg: &RunConfig,
    name: &str,
    out: &Path,
) -> anyhow::Result<bool> {
    report.config = Some(serde_json::to_value(cfg)?);
    let stem = out.join(format!("{name}-{}", tag_of(&report)?));
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    report.write(&stem)?;
    for case in report.failures() {
        let bound = case.bound.map_or(String::new(), |b| {
            format!(" {} {b:e}", case.relation.symbol())
        });
        let params = serde_json::to_string(&case.params)?;
        println!(
            "FAIL {} measured {:e}{bound} {params}",
            case.case, case.measured
        );
    }
    println!(
        "{} {name}: {} cases, {} failed, {:.0} ms -> {}.json",
        if report.pass { "PASS" } else { "FAIL" },
        report.cases.len(),
        report.failures().count(),
        report.runtime_ms,
        stem.display()
    );
    Ok(report.pass)
}

fn tag_of(report: &VerificationReport) -> anyhow::Result<String> {
    Ok(group_tag(&report.group.clone().try_into()?))
}

fn phi_spec(family: PhiFamily, p: f64) -> WeightSpec {
    match family {
        PhiFamily::Const => WeightSpec::Unit,
        PhiFamily::Power => WeightSpec::Power { p },
        PhiFamily::Powerlog => WeightSpec::PowerOverLogSquared { p },
        PhiFamily::Log => WeightSpec::LogSquared,
    }
}

fn cmd_sweep(opts: &SweepOpts, out: &Path) -> anyhow::Result<bool> {
    let g = opts.m.group(2 * max_of(&opts.nk.0) + 1)?;
    let phi = phi_spec(opts.phi, opts.p);
    let (report, rows) = divergence_sweep(&g, opts.p, &phi, &opts.nk.0, opts.conv)?;
    let table = rows_csv(&rows)?;
    print!("{table}");
    let cfg = RunConfig {
        command: "sweep".into(),
        experiment: "sweep".into(),
        m_pattern: opts.m.to_string(),
        group: report.group.clone(),
        parameters: json!({ "p": opts.p, "phi": phi, "nk": opts.nk.0 }),
        convention: Some(opts.conv),
        seed: None,
        output: out.to_path_buf(),
        calibration: false,
    };
    let name = format!("sweep-{:?}", opts.phi).to_lowercase();
    std::fs::create_dir_all(out)?;
    write_atomic(
        &out.join(format!("{name}-{}-rows.csv", group_tag(&g))),
        table.as_bytes(),
    )?;
    finish(report, &cfg, &name, out)
}

fn rows_csv(rows: &[SweepRow]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn cmd_calibrate(
    experiment: CalibratedExperiment,
    opts: &ExperimentOpts,
    store: &FixtureStore,
) -> anyhow::Result<bool> {
    let targets = match experiment {
        CalibratedExperiment::All => standard_targets(),
        other => vec![calibration_target(other, opts)?],
    };
    for (g, target) in targets {
        let fixture = calibrate(&g, &target)?;
        let path = store.save(&fixture)?;
        println!(
            "{} = {:e} ({}) -> {}",
            fixture.constant_name,
            fixture.value,
            fixture.oracle_version,
            path.display()
        );
    }
    Ok(true)
}

fn calibration_target(
    experiment: CalibratedExperiment,
    opts: &ExperimentOpts,
) -> anyhow::Result<(GeneratorSequence, CalibrationTarget)> {
    Ok(match experiment {
        CalibratedExperiment::All => unreachable!("expanded by the caller"),
        CalibratedExperiment::KernelL1 => {
            let n_max = opts.nmax.unwrap_or(512);
            (
                opts.m.group(rank_for(&opts.m, n_max)?)?,
                CalibrationTarget::KernelL1 { n_max },
            )
        }
        CalibratedExperiment::KernelDomination => {
            let n_max = opts.nmax.unwrap_or(64);
            let rank = single_rank(opts, 8)?;
            (
                opts.m.group(rank)?,
                CalibrationTarget::KernelDomination { n_max, rank },
            )
        }
        CalibratedExperiment::TranslatedIntegral => {
            let ranks = ranks(opts, &[3, 4, 5]);
            (
                opts.m.group(max_of(&ranks) + 1)?,
                CalibrationTarget::TranslatedIntegral { ranks },
            )
        }
        CalibratedExperiment::AtomBound => {
            let cfg = atom_bound_config(opts);
            let g = opts.m.group(max_of(&cfg.ranks) + cfg.extra_ranks)?;
            (g, CalibrationTarget::AtomBound(cfg))
        }
    })
}
