use crate::christoffel::{density_samples, ChristoffelReport};
use crate::config::RunConfig;
use crate::darboux::ExceptionalBasis;
use crate::error::{Error, Result};
use crate::gates::{numeric_gates, suite_gates, Gate, Pipeline};
use crate::jacobi::JacobiParams;
use crate::recurrence::{convergence_table, ConvergenceRow, RecurrenceTable};
use crate::spectrum::{cdf_table, SpectralReport, BANDWIDTH};
use crate::suites::{self, Fault, SuiteLimits, SuiteReport};

use super::output::{Sink, Table};
use super::{Cli, Command, PathsAction};

pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Paths {
            action:
                PathsAction::Verify {
                    max_length,
                    inject_fault,
                },
        } => {
            let limits = max_length.map_or_else(SuiteLimits::default, SuiteLimits::uniform);
            let fault = if *inject_fault {
                Fault::ThreeStepZeroWeight
            } else {
                Fault::None
            };
            cmd_paths_verify(limits, fault)
        }
        cmd => {
            let cfg = cli.common.resolve()?;
            match cmd {
                Command::Coeffs => cmd_coeffs(&cfg),
                Command::Recurrence => cmd_recurrence(&cfg),
                Command::Moments => cmd_moments(&cfg),
                Command::Spectrum => cmd_spectrum(&cfg),
                Command::Report => cmd_report(&cfg),
                Command::Paths { .. } => unreachable!("handled above"),
            }
        }
    }
}

pub fn cmd_paths_verify(limits: SuiteLimits, fault: Fault) -> Result<i32> {
    let report = suites::run(limits, fault)?;
    print!("{}", report.matrix());
    if report.passed() {
        println!("all {} identities hold", report.cases());
        return Ok(0);
    }
    println!(
        "validation failure: {} of {} identities fail",
        report.failures(),
        report.cases()
    );
    if let Some(f) = &report.first_failure {
        println!(
            "first failure: {} {}: closed form {} vs enumeration {}",
            f.suite, f.case, f.closed, f.brute
        );
        if let Some(p) = &f.path {
            println!(
                "counterexample path {:?}: weight {} (expected {})",
                p.steps, p.weight, p.expected
            );
        }
    }
    Ok(1)
}

/// Builds the basis, creates the output directory and writes the config
/// and transform data into it.
fn prepare(cfg: &RunConfig) -> Result<(ExceptionalBasis, Sink)> {
    let basis = ExceptionalBasis::new(JacobiParams::new(cfg.alpha, cfg.beta)?)?;
    let mut sink = Sink::new(&cfg.output_dir, cfg.format)?;
    sink.file("config.json", &(serde_json::to_string_pretty(cfg)? + "\n"))?;
    sink.file("darboux.json", &(basis.darboux().to_json()? + "\n"))?;
    Ok((basis, sink))
}

pub fn coeffs_table(classical: &JacobiParams, n_max: usize) -> Result<Table> {
    let mut t = Table::new("jacobi_coeffs", &["n", "a_n", "b_n", "A_n", "B_n", "C_n"]);
    for n in 1..=n_max {
        let (a, b) = classical.recurrence_coeffs(n);
        let s = classical.structure_coeffs(n)?;
        t.push(vec![
            n.into(),
            a.into(),
            b.into(),
            s.a.into(),
            s.b.into(),
            s.c.into(),
        ]);
    }
    Ok(t)
}

pub fn recurrence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(
        "recurrence",
        &[
            "n",
            "u_m2",
            "u_m1",
            "u_0",
            "u_p1",
            "u_p2",
            "dev_0",
            "dev_1",
            "dev_2",
            "corollaryB_gap",
        ],
    );
    for r in rows {
        let mut row = vec![r.n.into()];
        row.extend(r.u.iter().map(|&v| v.into()));
        row.extend(r.dev.iter().map(|&v| v.into()));
        row.push(r.cross_identity_gap.into());
        t.push(row);
    }
    t
}

pub fn moments_table(report: &ChristoffelReport, k_max: usize) -> Table {
    let mut t = Table::new("moments", &["N", "k", "moment", "target", "abs_dev"]);
    for r in report.moments.iter().filter(|r| r.k <= k_max) {
        t.push(vec![
            r.n.into(),
            r.k.into(),
            r.moment.into(),
            r.target.into(),
            r.abs_dev.into(),
        ]);
    }
    t
}

/// 199 points `-0.99, -0.98, .., 0.99`.
pub fn density_grid() -> Vec<f64> {
    (0..199).map(|i| (i as f64 - 99.0) / 100.0).collect()
}

pub fn density_table(basis: &ExceptionalBasis, n: usize) -> Result<Table> {
    let mut t = Table::new(
        format!("density_N{n}"),
        &["x", "mu_N_density", "arcsine_density"],
    );
    for r in density_samples(basis, n, &density_grid())? {
        t.push(vec![
            r.x.into(),
            r.mu_n_density.into(),
            r.arcsine_density.into(),
        ]);
    }
    Ok(t)
}

pub fn spectrum_tables(s: &SpectralReport) -> [Table; 3] {
    let mut eig = Table::new(
        format!("spectrum_N{}", s.n),
        &["i", "z_i", "y_i", "in_range"],
    );
    for r in s.rows() {
        eig.push(vec![r.i.into(), r.z.into(), r.y.into(), r.in_range.into()]);
    }
    let mut mom = Table::new(
        format!("spectrum_moments_N{}", s.n),
        &["l", "trace_full", "trace_proj", "gap", "bound"],
    );
    for g in &s.moments {
        mom.push(vec![
            g.l.into(),
            g.trace_full.into(),
            g.trace_proj.into(),
            g.gap.into(),
            g.bound.into(),
        ]);
    }
    let mut cdf = Table::new(format!("cdf_N{}", s.n), &["x", "empirical", "arcsine"]);
    for r in cdf_table(&s.y) {
        cdf.push(vec![r.x.into(), r.empirical.into(), r.arcsine.into()]);
    }
    [eig, mom, cdf]
}

pub fn paths_table(report: &SuiteReport) -> Table {
    let mut t = Table::new("paths", &["suite", "k", "cases", "failures"]);
    for c in &report.cells {
        t.push(vec![
            c.suite.into(),
            (c.k as usize).into(),
            c.cases.into(),
            c.failures.into(),
        ]);
    }
    t
}

pub fn summary_table(gates: &[Gate]) -> Table {
    let mut t = Table::new(
        "summary",
        &[
            "criterion",
            "name",
            "passed",
            "measured",
            "threshold",
            "detail",
        ],
    );
    for g in gates {
        t.push(vec![
            (g.id as usize).into(),
            g.name.into(),
            g.passed.into(),
            g.measured.into(),
            g.threshold.into(),
            g.detail.clone().into(),
        ]);
    }
    t
}

pub fn cmd_coeffs(cfg: &RunConfig) -> Result<i32> {
    let (basis, mut sink) = prepare(cfg)?;
    sink.table(&coeffs_table(basis.classical(), cfg.n_max())?)?;
    Ok(0)
}

pub fn cmd_recurrence(cfg: &RunConfig) -> Result<i32> {
    let (basis, mut sink) = prepare(cfg)?;
    let rows = convergence_table(&basis, &cfg.n_values)?;
    sink.table(&recurrence_table(&rows))?;
    Ok(0)
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<i32> {
    let (basis, mut sink) = prepare(cfg)?;
    let report = ChristoffelReport::build(&basis, &cfg.n_values, cfg.k_max)?;
    sink.table(&moments_table(&report, cfg.k_max))?;
    for &n in &cfg.n_values {
        sink.table(&density_table(&basis, n)?)?;
    }
    Ok(0)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let (basis, mut sink) = prepare(cfg)?;
    let table = RecurrenceTable::build(&basis, cfg.n_max() + cfg.l_max * BANDWIDTH + 1)?;
    for &n in &cfg.n_values {
        let s = SpectralReport::build(&table, basis.darboux(), n, cfg.l_max)?;
        for t in spectrum_tables(&s) {
            sink.table(&t)?;
        }
    }
    Ok(0)
}

/// Runs every stage, writes all tables and a summary with one line per
/// criterion. Exit code 1 when any criterion fails.
pub fn cmd_report(cfg: &RunConfig) -> Result<i32> {
    let (_, mut sink) = prepare(cfg)?;
    let suite = suites::run(SuiteLimits::default(), Fault::None)?;
    let p = Pipeline::run(cfg)?;
    let mut gates = suite_gates(&suite);
    gates.extend(numeric_gates(&p)?);

    sink.table(&paths_table(&suite))?;
    sink.table(&coeffs_table(p.basis.classical(), cfg.n_max())?)?;
    sink.table(&recurrence_table(&p.convergence))?;
    sink.table(&moments_table(&p.christoffel, cfg.k_max))?;
    for &n in &cfg.n_values {
        sink.table(&density_table(&p.basis, n)?)?;
    }
    for s in &p.spectra {
        let mut tables = spectrum_tables(s);
        // moments table limited to the configured l_max
        tables[1].rows.truncate(cfg.l_max + 1);
        for t in &tables {
            sink.table(t)?;
        }
    }
    sink.table(&summary_table(&gates))?;

    for g in &gates {
        println!(
            "[{}] criterion {:>2} {}: measured {} threshold {} ({})",
            if g.passed { "PASS" } else { "FAIL" },
            g.id,
            g.name,
            super::output::format_float(g.measured),
            super::output::format_float(g.threshold),
            g.detail
        );
    }
    let failed = gates.iter().filter(|g| !g.passed).count();
    if failed > 0 {
        return Err(Error::Validation(format!(
            "{failed} acceptance criteria failed"
        )));
    }
    Ok(0)
}
