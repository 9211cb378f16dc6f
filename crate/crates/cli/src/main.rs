//! `pframe`: solve single cells, run sweeps, build exact configurations,
//! query the closed-form oracles, and check artifacts from the shell.
//!
//! Exit codes: 0 success, 1 a requested comparison failed, 2 usage or
//! input error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pframe_core::analytic::{
    asymptotic_leading_coeff, equidistribution_moment, exact_p2, exact_p4_n2, exact_p6_n2,
    simplex_coherence_sq, Axis, ClosedFormValue,
};
use pframe_core::constructions::{
    antipodal_double, cosine_curve, doubling_seed, hadamard4, lift_to_cp1, tight_frame,
};
use pframe_core::geometry::{potential, FieldTag};
use pframe_core::report::{
    closed_form_for, compare_with_analytic, detect_simplex, difference_table, export_csv,
    export_trace_csv, fit_quadratic, import_json, run_sweep, SweepSpec, SIMPLEX_TOL,
};
use pframe_core::solver::{multi_start, SolverParams};
use pframe_core::{Configuration64, RealS2Config64};

#[derive(Parser)]
#[command(name = "pframe", version, about = "p-frame energy minimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize one (m, n, p) cell with restarts and report the outcome.
    Solve {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = FieldArg::C)]
        field: FieldArg,
        /// Independent restarts; the best is reported.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the best configuration as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the best run's trace as CSV (proposal, potential, delta_step).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Minimize a whole (m, n, p) grid and assemble a table artifact.
    Sweep {
        /// Inclusive, e.g. `3..8` (or a single value).
        #[arg(long, value_parser = parse_range)]
        m_range: (usize, usize),
        /// Inclusive, e.g. `2..4` (or a single value).
        #[arg(long, value_parser = parse_range)]
        n_range: (usize, usize),
        /// Comma-separated exponents, e.g. `2,4,6`.
        #[arg(long = "p", value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value_t = FieldArg::C)]
        field: FieldArg,
        #[arg(long, default_value_t = 3)]
        runs_per_cell: usize,
        /// Base seed; required so sweeps are reproducible on purpose.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the artifact as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the flat per-cell table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build an exact configuration and report its potentials.
    Construct {
        #[command(subcommand)]
        kind: ConstructKind,
    },
    /// Evaluate a closed form as exact rational arithmetic.
    Exact {
        #[arg(value_enum)]
        form: ExactForm,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        n: Option<i64>,
        /// Moment order.
        #[arg(long)]
        k: Option<i64>,
        /// Even potential exponent.
        #[arg(long)]
        p: Option<i64>,
    },
    /// Compare a sweep artifact against the closed-form oracles.
    Check {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
    },
    /// Second differences of measured minima along one axis.
    Diff {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// The held coordinate (n for --axis m, m for --axis n).
        #[arg(long)]
        fixed: usize,
        #[arg(long)]
        p: f64,
    },
    /// Least-squares quadratic through measured minima along m.
    Fit {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(Subcommand)]
enum ConstructKind {
    /// Balanced tight frame: the p=2 minimizer for any m ≥ n.
    TightFrame {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FieldArg::C)]
        field: FieldArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-circle sphere curve on m points (p=4 seed), m ≥ 6.
    Cosine {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The regular tetrahedron on the sphere (p=4 seed for m=4).
    Hadamard4 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Antipodal double of an r-point seed: 2r sphere points (p=6 seed).
    Double {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lift sphere points (JSON) to unit vectors in complex 2-space.
    Lift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    #[value(name = "R", alias = "r")]
    R,
    #[value(name = "C", alias = "c")]
    C,
}

impl From<FieldArg> for FieldTag {
    fn from(f: FieldArg) -> FieldTag {
        match f {
            FieldArg::R => FieldTag::Real,
            FieldArg::C => FieldTag::Complex,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    M,
    N,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::M => Axis::AlongM,
            AxisArg::N => Axis::AlongN,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExactForm {
    /// m(m−n)/(2n), the p=2 minimum.
    P2,
    /// m(m−3)/6, the p=4 minimum in the plane.
    P4n2,
    /// m(m−4)/8, the p=6 minimum in the plane.
    P6n2,
    /// (m−n)/(n(m−1)), the squared simplex coherence.
    SimplexCoherence,
    /// k!(n−1)!/(n+k−1)!, the sphere moment.
    Moment,
    /// Half the p/2-th moment: the m² coefficient of the minimum.
    LeadingCoeff,
}

/// Solver knobs shared by `solve` and `sweep`; unset flags keep defaults.
#[derive(Args)]
struct Tuning {
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    /// Budget in sweeps (m·n proposals each).
    #[arg(long)]
    max_sweeps: Option<u64>,
    #[arg(long)]
    accept_window: Option<u64>,
    #[arg(long)]
    accept_high: Option<f64>,
    #[arg(long)]
    accept_low: Option<f64>,
    #[arg(long)]
    step_up: Option<f64>,
    #[arg(long)]
    step_down: Option<f64>,
}

impl Tuning {
    fn params(&self, seed: u64) -> SolverParams {
        let mut p = SolverParams { seed, ..SolverParams::default() };
        if let Some(x) = self.initial_step {
            p.initial_step = x;
        }
        if let Some(x) = self.min_step {
            p.min_step = x;
        }
        if let Some(x) = self.max_sweeps {
            p.max_sweeps = x;
        }
        if let Some(x) = self.accept_window {
            p.accept_window = x;
        }
        if let Some(x) = self.accept_high {
            p.accept_high = x;
        }
        if let Some(x) = self.accept_low {
            p.accept_low = x;
        }
        if let Some(x) = self.step_up {
            p.step_up = x;
        }
        if let Some(x) = self.step_down {
            p.step_down = x;
        }
        p
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse_one = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
    match s.split_once("..") {
        Some((lo, hi)) => Ok((parse_one(lo)?, parse_one(hi)?)),
        None => parse_one(s).map(|x| (x, x)),
    }
}

fn main() -> ExitCode {
    // die quietly when the read end of a pipe closes, like any unix tool
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { m, n, p, field, runs, seed, tuning, out, trace_out } => {
            cmd_solve(m, n, p, field.into(), runs, &tuning.params(seed), out, trace_out)
        }
        Command::Sweep {
            m_range,
            n_range,
            p,
            field,
            runs_per_cell,
            seed,
            tuning,
            out,
            csv,
        } => {
            let spec = SweepSpec {
                m_range,
                n_range,
                p_list: p,
                field: field.into(),
                solver: tuning.params(seed),
                runs_per_cell,
                output_path: out.map(|p| p.to_string_lossy().into_owned()),
            };
            cmd_sweep(&spec, csv)
        }
        Command::Construct { kind } => cmd_construct(kind),
        Command::Exact { form, m, n, k, p } => cmd_exact(form, m, n, k, p),
        Command::Check { artifact, rel_tol } => cmd_check(&artifact, rel_tol),
        Command::Diff { artifact, axis, fixed, p } => cmd_diff(&artifact, axis.into(), fixed, p),
        Command::Fit { artifact, n, p } => cmd_fit(&artifact, n, p),
    }
}

fn domain_note(v: &ClosedFormValue) -> &'static str {
    if v.domain_ok {
        ""
    } else {
        "  [outside the closed-form domain: extrapolation only]"
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    m: usize,
    n: usize,
    p: f64,
    field: FieldTag,
    runs: usize,
    params: &SolverParams,
    out: Option<PathBuf>,
    trace_out: Option<PathBuf>,
) -> Result<ExitCode> {
    let stability = multi_start::<f64>(m, n, p, field, params, runs)?;
    let best = &stability.best;
    println!(
        "cell m={m} n={n} p={p} field={field}: best potential {:.12} over {runs} run(s), spread {:.3e}",
        best.best_potential, stability.spread
    );
    if let Some(value) = closed_form_for(m, n, p) {
        println!(
            "closed form {} = {:.12}: abs gap {:.3e}{}",
            value,
            value.approx(),
            (best.best_potential - value.approx()).abs(),
            domain_note(&value)
        );
    }
    println!(
        "termination {:?} after {} proposals ({} accepted), final step {:.3e}",
        best.termination, best.proposals, best.accepts, best.final_step
    );
    if m >= 2 {
        let flag = detect_simplex(&best.best_config, SIMPLEX_TOL)?;
        let verdict = if flag.is_simplex { "simplex" } else { "not a simplex" };
        let expected = flag
            .expected_coherence_sq
            .map(|e| format!(" (a true simplex squares to {e})"))
            .unwrap_or_default();
        println!(
            "coherence mean {:.9}, spread {:.3e}: {verdict}{expected}",
            flag.coherence_mean, flag.coherence_spread
        );
    }
    if let Some(path) = out {
        write_json(&best.best_config, &path)?;
        println!("wrote best configuration to {}", path.display());
    }
    if let Some(path) = trace_out {
        let trace = best.trace.as_deref().unwrap_or(&[]);
        export_trace_csv(trace, &path)?;
        println!("wrote trace to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(spec: &SweepSpec, csv: Option<PathBuf>) -> Result<ExitCode> {
    let artifact = run_sweep(spec)?;
    for c in &artifact.cells {
        let gap = match (&c.analytic, c.abs_gap) {
            (Some(a), Some(g)) => {
                format!(", gap {:.3e}{}", g, if a.domain_ok { "" } else { " (extrapolated)" })
            }
            _ => String::new(),
        };
        println!(
            "m={} n={} p={}: best {:.12}, spread {:.3e}, simplex={}{gap}",
            c.m,
            c.n,
            c.p,
            c.best_potential,
            c.spread,
            if c.simplex.is_simplex { "yes" } else { "no" }
        );
    }
    println!("{} cells solved", artifact.cells.len());
    if let Some(path) = &spec.output_path {
        println!("wrote artifact to {path}");
    }
    if let Some(path) = csv {
        export_csv(&artifact, &path)?;
        println!("wrote CSV to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn describe_sphere(points: &RealS2Config64) -> String {
    let g = points.column_gram();
    let r = points.len() as f64;
    let mut gram_dev = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let target = if i == j { r / 3.0 } else { 0.0 };
            gram_dev = gram_dev.max((x - target).abs());
        }
    }
    let sum = points.sum();
    let sum_norm = (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt();
    format!(
        "{} sphere points: column Gram within {gram_dev:.3e} of (m/3)I, |point sum| = {sum_norm:.3e}",
        points.len()
    )
}

fn lift_and_describe(points: &RealS2Config64, out: Option<PathBuf>) -> Result<Configuration64> {
    let lifted = lift_to_cp1(points)?;
    let m = lifted.m() as i64;
    for (p, form) in [(4.0, exact_p4_n2(m)), (6.0, exact_p6_n2(m))] {
        let got = potential(&lifted, p);
        match form {
            Ok(value) => println!(
                "lifted p={p} potential {got:.12} vs closed form {} = {:.12}{}",
                value,
                value.approx(),
                domain_note(&value)
            ),
            Err(_) => println!("lifted p={p} potential {got:.12}"),
        }
    }
    if let Some(path) = out {
        write_json(&lifted, &path)?;
        println!("wrote configuration to {}", path.display());
    }
    Ok(lifted)
}

fn cmd_construct(kind: ConstructKind) -> Result<ExitCode> {
    match kind {
        ConstructKind::TightFrame { m, n, field, out } => {
            let frame = tight_frame::<f64>(m, n, field.into())?;
            let value = exact_p2(m as i64, n as i64)?;
            println!(
                "tight frame m={m} n={n}: p=2 potential {:.12}, closed form {} = {:.12}",
                potential(&frame, 2.0),
                value,
                value.approx()
            );
            if let Some(path) = out {
                write_json(&frame, &path)?;
                println!("wrote configuration to {}", path.display());
            }
        }
        ConstructKind::Cosine { m, out } => {
            let points = cosine_curve::<f64>(m)?;
            println!("two-circle curve, {}", describe_sphere(&points));
            if let Some(path) = out {
                write_json(&points, &path)?;
                println!("wrote sphere points to {}", path.display());
            }
        }
        ConstructKind::Hadamard4 { out } => {
            let points = hadamard4::<f64>();
            println!("tetrahedron, {}", describe_sphere(&points));
            if let Some(path) = out {
                write_json(&points, &path)?;
                println!("wrote sphere points to {}", path.display());
            }
        }
        ConstructKind::Double { r, out } => {
            let doubled = antipodal_double(&doubling_seed::<f64>(r)?)?;
            println!("antipodal double of r={r}, {}", describe_sphere(&doubled));
            if let Some(path) = out {
                write_json(&doubled, &path)?;
                println!("wrote sphere points to {}", path.display());
            }
        }
        ConstructKind::Lift { input, out } => {
            let file = File::open(&input)
                .with_context(|| format!("opening {}", input.display()))?;
            let points: RealS2Config64 = serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("parsing sphere points from {}", input.display()))?;
            lift_and_describe(&points, out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_exact(
    form: ExactForm,
    m: Option<i64>,
    n: Option<i64>,
    k: Option<i64>,
    p: Option<i64>,
) -> Result<ExitCode> {
    let need = |x: Option<i64>, flag: &str| {
        x.with_context(|| format!("this form needs --{flag}"))
    };
    let (label, value) = match form {
        ExactForm::P2 => {
            let (m, n) = (need(m, "m")?, need(n, "n")?);
            (format!("m(m-n)/(2n) at m={m}, n={n}"), exact_p2(m, n)?)
        }
        ExactForm::P4n2 => {
            let m = need(m, "m")?;
            (format!("m(m-3)/6 at m={m}"), exact_p4_n2(m)?)
        }
        ExactForm::P6n2 => {
            let m = need(m, "m")?;
            (format!("m(m-4)/8 at m={m}"), exact_p6_n2(m)?)
        }
        ExactForm::SimplexCoherence => {
            let (m, n) = (need(m, "m")?, need(n, "n")?);
            (
                format!("squared simplex coherence (m-n)/(n(m-1)) at m={m}, n={n}"),
                simplex_coherence_sq(m, n)?,
            )
        }
        ExactForm::Moment => {
            let (k, n) = (need(k, "k")?, need(n, "n")?);
            (
                format!("moment k!(n-1)!/(n+k-1)! at k={k}, n={n}"),
                equidistribution_moment(k, n)?,
            )
        }
        ExactForm::LeadingCoeff => {
            let (p, n) = (need(p, "p")?, need(n, "n")?);
            (format!("leading coefficient at p={p}, n={n}"), asymptotic_leading_coeff(p, n)?)
        }
    };
    println!("{label} = {value} ({:.9}){}", value.approx(), domain_note(&value));
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(artifact: &Path, rel_tol: f64) -> Result<ExitCode> {
    let table = import_json(artifact)?;
    let report = compare_with_analytic(&table, rel_tol);
    print!("{report}");
    if report.rows.is_empty() {
        println!("no cells with an in-domain closed form; nothing to check");
    }
    Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_diff(artifact: &Path, axis: Axis, fixed: usize, p: f64) -> Result<ExitCode> {
    let table = import_json(artifact)?;
    let diffs = difference_table(&table, axis, fixed, p)?;
    println!("second differences along {axis} at p={p} (held coordinate {fixed}):");
    for cell in &diffs.cells {
        println!("m={} n={}: D = {:.9}", cell.m, cell.n, cell.d);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(artifact: &Path, n: usize, p: f64) -> Result<ExitCode> {
    let table = import_json(artifact)?;
    let series: BTreeMap<i64, f64> = table
        .cells
        .iter()
        .filter(|c| c.n == n && c.p == p)
        .map(|c| (c.m as i64, c.best_potential))
        .collect();
    if series.is_empty() {
        bail!("artifact has no cells at n={n}, p={p}");
    }
    let fit = fit_quadratic(&series)?;
    println!(
        "quadratic through {} points at n={n}, p={p}: {:.9} m^2 + {:.9} m + {:.9}, max residual {:.3e}",
        series.len(),
        fit.a2,
        fit.a1,
        fit.a0,
        fit.residual
    );
    if p.fract() == 0.0 && (p as i64) % 2 == 0 {
        if let Ok(exact) = asymptotic_leading_coeff(p as i64, n as i64) {
            let rel = (fit.a2 - exact.approx()).abs() / exact.approx();
            println!(
                "exact leading coefficient {} = {:.9}; fitted value is off by {:.2}%",
                exact,
                exact.approx(),
                rel * 100.0
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
