//! Sweep driver and reporting: grids of `(m, n, p)` cells, simplex
//! detection, comparison against the exact oracles, second-difference
//! tables, quadratic fits, and JSON/CSV persistence.
//!
//! This layer is deliberately concrete over `f64`: it exists to drive the
//! solver at desk scale and produce artifacts, not to be generic. A sweep is
//! a pure function of its [`SweepSpec`] — per-cell seeds are derived from
//! the base seed and the cell coordinates, so cells could be evaluated in
//! any order (or concurrently) without changing a digit. Only the metadata
//! timestamp varies between reruns.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    exact_p2, exact_p4_n2, exact_p6_n2, second_difference, simplex_coherence_sq, Axis,
    ClosedFormValue, DifferenceTable,
};
use crate::error::{Error, Result};
use crate::geometry::{gram, Configuration, FieldTag};
use crate::solver::{derive_seed, multi_start, SolverParams, TraceSample};

/// Default tolerance on the coherence spread below which a configuration is
/// flagged as a simplex; solver noise sits well below this, genuine spectrum
/// splits well above.
pub const SIMPLEX_TOL: f64 = 1e-3;

/// Absolute tolerance used in place of a relative one when the analytic
/// expectation is exactly zero (the orthogonal regime `m ≤ n`).
pub const ZERO_TOL: f64 = 1e-8;

/// A grid of cells to minimize, plus everything needed to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Inclusive range of vector counts.
    pub m_range: (usize, usize),
    /// Inclusive range of ambient dimensions.
    pub n_range: (usize, usize),
    pub p_list: Vec<f64>,
    pub field: FieldTag,
    pub solver: SolverParams,
    pub runs_per_cell: usize,
    /// Where [`run_sweep`] persists the artifact as JSON; `None` keeps it
    /// in memory only.
    pub output_path: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let (m_lo, m_hi) = self.m_range;
        let (n_lo, n_hi) = self.n_range;
        if m_lo < 1 || m_lo > m_hi || n_lo < 1 || n_lo > n_hi {
            return Err(Error::bad_input("ranges must be non-empty with lower bounds ≥ 1"));
        }
        if self.p_list.is_empty() || !self.p_list.iter().all(|&p| p > 0.0) {
            return Err(Error::bad_input("need a non-empty list of positive exponents"));
        }
        if self.runs_per_cell < 1 {
            return Err(Error::bad_input("need runs_per_cell ≥ 1"));
        }
        self.solver.validate()
    }
}

/// Equiangularity verdict for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexFlag {
    /// True iff the coherence spread is within the detection tolerance.
    pub is_simplex: bool,
    pub coherence_mean: f64,
    pub coherence_spread: f64,
    /// The squared coherence a genuine `(m, n)` simplex would have;
    /// attached when `m > n`.
    pub expected_coherence_sq: Option<ClosedFormValue>,
}

/// One solved grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub field: FieldTag,
    /// Minimum over the cell's runs.
    pub best_potential: f64,
    /// max − min of the per-run best potentials.
    pub spread: f64,
    pub simplex: SimplexFlag,
    /// Closed-form value when one of the catalogued oracles applies to
    /// `(m, n, p)`; carries its own `domain_ok` flag, and out-of-domain
    /// extrapolations are attached as data (never used for pass/fail).
    pub analytic: Option<ClosedFormValue>,
    /// `|best_potential − analytic|` whenever `analytic` is present.
    pub abs_gap: Option<f64>,
}

/// Everything a sweep produced, with the input `SweepSpec` echoed so the
/// artifact is self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableArtifact {
    /// Sorted by `(m, n, p)`; one record per cell of the requested grid.
    pub cells: Vec<CellRecord>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec: SweepSpec,
    /// Library version that produced the artifact; imports reject others.
    pub version: String,
    /// RFC 3339; the only field allowed to differ between identical runs.
    pub timestamp: String,
}

impl TableArtifact {
    pub fn cell(&self, m: usize, n: usize, p: f64) -> Option<&CellRecord> {
        self.cells.iter().find(|c| c.m == m && c.n == n && c.p == p)
    }
}

/// The oracle catalogue: exact minimum for `(m, n, p)` where a closed form
/// is known — every `(m, n)` at p = 2, and the plane (n = 2) at p = 4, 6.
/// The returned value carries its own `domain_ok`; out-of-domain results
/// are the formula's extrapolation, not a minimum.
pub fn closed_form_for(m: usize, n: usize, p: f64) -> Option<ClosedFormValue> {
    let (m, n) = (m as i64, n as i64);
    let value = if p == 2.0 {
        exact_p2(m, n)
    } else if p == 4.0 && n == 2 {
        exact_p4_n2(m)
    } else if p == 6.0 && n == 2 {
        exact_p6_n2(m)
    } else {
        return None;
    };
    value.ok()
}

/// Measures how equiangular a configuration is: the mean and spread of its
/// coherence spectrum, flagged as a simplex when the spread is within `tol`.
/// The exact simplex coherence for `(m, n)` is attached when `m > n`.
pub fn detect_simplex(config: &Configuration<f64>, tol: f64) -> Result<SimplexFlag> {
    let (m, n) = (config.m(), config.n());
    if m < 2 {
        return Err(Error::bad_input("simplex detection needs at least two vectors"));
    }
    let g = gram(config);
    let mean = g.offdiag_moduli.iter().sum::<f64>() / g.offdiag_moduli.len() as f64;
    let spread = g.coherence_max - g.coherence_min;
    let expected = if m > n {
        Some(simplex_coherence_sq(m as i64, n as i64)?)
    } else {
        None
    };
    Ok(SimplexFlag {
        is_simplex: spread <= tol,
        coherence_mean: mean,
        coherence_spread: spread,
        expected_coherence_sq: expected,
    })
}

/// Runs the whole grid: one [`multi_start`] per `(m, n, p)` cell on a seed
/// derived from `(spec.solver.seed, m, n, p)`, assembling best potentials,
/// spreads, simplex flags, and oracle gaps into a [`TableArtifact`].
///
/// Cells with `m = 1` have no pairs; they record potential 0 and a vacuous
/// simplex flag. When `spec.output_path` is set the artifact is also written
/// there as JSON.
pub fn run_sweep(spec: &SweepSpec) -> Result<TableArtifact> {
    spec.validate()?;
    let mut cells = Vec::new();
    for m in spec.m_range.0..=spec.m_range.1 {
        for n in spec.n_range.0..=spec.n_range.1 {
            for &p in &spec.p_list {
                cells.push(solve_cell(spec, m, n, p)?);
            }
        }
    }
    cells.sort_by(|a, b| {
        (a.m, a.n).cmp(&(b.m, b.n)).then(a.p.total_cmp(&b.p))
    });
    let artifact = TableArtifact {
        cells,
        metadata: Metadata {
            spec: spec.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
    };
    if let Some(path) = &spec.output_path {
        export_json(&artifact, path)?;
    }
    Ok(artifact)
}

fn solve_cell(spec: &SweepSpec, m: usize, n: usize, p: f64) -> Result<CellRecord> {
    let mut params = spec.solver.clone();
    params.seed = derive_seed(
        derive_seed(derive_seed(spec.solver.seed, m as u64), n as u64),
        p.to_bits(),
    );
    let stability = multi_start::<f64>(m, n, p, spec.field, &params, spec.runs_per_cell)?;
    let simplex = if m >= 2 {
        detect_simplex(&stability.best.best_config, SIMPLEX_TOL)?
    } else {
        SimplexFlag {
            is_simplex: true,
            coherence_mean: 0.0,
            coherence_spread: 0.0,
            expected_coherence_sq: None,
        }
    };
    let analytic = closed_form_for(m, n, p);
    let abs_gap = analytic.map(|a| (stability.best.best_potential - a.approx()).abs());
    Ok(CellRecord {
        m,
        n,
        p,
        field: spec.field,
        best_potential: stability.best.best_potential,
        spread: stability.spread,
        simplex,
        analytic,
        abs_gap,
    })
}

/// One row of [`compare_with_analytic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub expected: f64,
    pub measured: f64,
    pub abs_gap: f64,
    /// Absent when the expectation is exactly zero (gap judged absolutely).
    pub rel_gap: Option<f64>,
    pub pass: bool,
}

/// Verdict of checking a table against the oracle catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rel_tol: f64,
    pub rows: Vec<ComparisonRow>,
    /// `(p, max relative gap)` over the checked cells of each exponent.
    pub max_rel_by_p: Vec<(f64, f64)>,
    pub all_pass: bool,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let rel = r
                .rel_gap
                .map(|g| format!("{g:.3e}"))
                .unwrap_or_else(|| "-".to_string());
            writeln!(
                f,
                "{} (m={}, n={}, p={}): expected {:.12}, measured {:.12}, abs {:.3e}, rel {}",
                if r.pass { "ok  " } else { "FAIL" },
                r.m,
                r.n,
                r.p,
                r.expected,
                r.measured,
                r.abs_gap,
                rel
            )?;
        }
        for (p, g) in &self.max_rel_by_p {
            writeln!(f, "p={p}: max relative gap {g:.3e}")?;
        }
        writeln!(
            f,
            "{} ({} cells checked, relative tolerance {:.1e})",
            if self.all_pass { "ALL OK" } else { "FAILURES PRESENT" },
            self.rows.len(),
            self.rel_tol
        )
    }
}

/// Checks every cell that carries an in-domain oracle value: the measured
/// minimum must match within `rel_tol` relative (or within [`ZERO_TOL`]
/// absolute when the expectation is zero). Out-of-domain extrapolations are
/// never judged. Pass/fail is monotone in `rel_tol` by construction.
pub fn compare_with_analytic(table: &TableArtifact, rel_tol: f64) -> ComparisonReport {
    let mut rows = Vec::new();
    let mut by_p: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for cell in &table.cells {
        let Some(analytic) = cell.analytic else { continue };
        if !analytic.domain_ok {
            continue;
        }
        let expected = analytic.approx();
        let abs_gap = (cell.best_potential - expected).abs();
        let (rel_gap, pass) = if expected == 0.0 {
            (None, abs_gap <= ZERO_TOL)
        } else {
            let rel = abs_gap / expected.abs();
            (Some(rel), rel <= rel_tol)
        };
        if let Some(rel) = rel_gap {
            let entry = by_p.entry(cell.p.to_bits()).or_insert((cell.p, 0.0));
            entry.1 = entry.1.max(rel);
        }
        rows.push(ComparisonRow {
            m: cell.m,
            n: cell.n,
            p: cell.p,
            expected,
            measured: cell.best_potential,
            abs_gap,
            rel_gap,
            pass,
        });
    }
    ComparisonReport {
        rel_tol,
        all_pass: rows.iter().all(|r| r.pass),
        max_rel_by_p: by_p.into_values().collect(),
        rows,
    }
}

/// Applies the centered second-difference stencil to measured best
/// potentials along `axis` at exponent `p`, holding the other coordinate at
/// `fixed`. The stencil runs over every maximal block of consecutive
/// coordinates; blocks shorter than three points contribute nothing, and a
/// table yielding no interior points at all (e.g. even-only cells) is an
/// error.
pub fn difference_table(
    table: &TableArtifact,
    axis: Axis,
    fixed: usize,
    p: f64,
) -> Result<DifferenceTable> {
    let mut values: BTreeMap<i64, f64> = BTreeMap::new();
    for cell in &table.cells {
        if cell.p != p {
            continue;
        }
        let (key, anchor) = match axis {
            Axis::AlongM => (cell.m, cell.n),
            Axis::AlongN => (cell.n, cell.m),
        };
        if anchor == fixed {
            values.insert(key as i64, cell.best_potential);
        }
    }
    let mut cells = Vec::new();
    let keys: Vec<i64> = values.keys().copied().collect();
    let mut block_start = 0;
    for i in 0..keys.len() {
        let block_ends = i + 1 == keys.len() || keys[i + 1] != keys[i] + 1;
        if !block_ends {
            continue;
        }
        let block: BTreeMap<i64, f64> =
            keys[block_start..=i].iter().map(|k| (*k, values[k])).collect();
        cells.extend(second_difference(&block, axis, fixed as i64)?.cells);
        block_start = i + 1;
    }
    if cells.is_empty() {
        return Err(Error::bad_input(
            "need at least three consecutive cells along the axis to form a stencil",
        ));
    }
    Ok(DifferenceTable { axis, cells })
}

/// Least-squares quadratic through a series, for reading off the growth law
/// of minima in `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    /// Maximum absolute deviation of the fit from the data.
    pub residual: f64,
}

/// Fits `y ≈ a₂x² + a₁x + a₀` by least squares over at least four points
/// (normal equations with partial pivoting; a vanishing pivot reports the
/// series as degenerate).
pub fn fit_quadratic(series: &BTreeMap<i64, f64>) -> Result<QuadraticFit> {
    if series.len() < 4 {
        return Err(Error::bad_input("need at least 4 points for a quadratic fit"));
    }
    let mut s = [0.0f64; 5];
    let mut b = [0.0f64; 3];
    for (&xi, &yi) in series {
        let x = xi as f64;
        let mut xp = 1.0;
        for k in 0..5 {
            s[k] += xp;
            if k < 3 {
                b[k] += yi * xp;
            }
            xp *= x;
        }
    }
    // normal equations, unknowns ordered (a0, a1, a2)
    let mut a = [
        [s[0], s[1], s[2], b[0]],
        [s[1], s[2], s[3], b[1]],
        [s[2], s[3], s[4], b[2]],
    ];
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty");
        a.swap(col, piv);
        let scale = s[4].max(1.0);
        if a[col][col].abs() <= 1e-12 * scale {
            return Err(Error::bad_input("degenerate series: quadratic fit is ill-conditioned"));
        }
        let pivot_row = a[col];
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut coef = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = a[row][3];
        for k in (row + 1)..3 {
            acc -= a[row][k] * coef[k];
        }
        coef[row] = acc / a[row][row];
    }
    let [a0, a1, a2] = coef;
    let residual = series
        .iter()
        .map(|(&x, &y)| {
            let x = x as f64;
            (a2 * x * x + a1 * x + a0 - y).abs()
        })
        .fold(0.0, f64::max);
    Ok(QuadraticFit { a2, a1, a0, residual })
}

/// Writes the artifact as pretty JSON.
pub fn export_json(artifact: &TableArtifact, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, artifact)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads an artifact back; rejects files written by a different library
/// version, since cell payloads are only comparable within one build.
pub fn import_json(path: impl AsRef<Path>) -> Result<TableArtifact> {
    let artifact: TableArtifact = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let current = env!("CARGO_PKG_VERSION");
    if artifact.metadata.version != current {
        return Err(Error::bad_input(format!(
            "artifact version {} does not match library version {current}",
            artifact.metadata.version
        )));
    }
    Ok(artifact)
}

/// Writes the flat per-cell table as CSV with columns
/// `m,n,p,field,best_potential,spread,simplex,coherence_mean,analytic_num,analytic_den,abs_gap`
/// (the three analytic columns empty where no oracle applies).
pub fn export_csv(artifact: &TableArtifact, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record([
        "m",
        "n",
        "p",
        "field",
        "best_potential",
        "spread",
        "simplex",
        "coherence_mean",
        "analytic_num",
        "analytic_den",
        "abs_gap",
    ])?;
    for c in &artifact.cells {
        w.write_record([
            c.m.to_string(),
            c.n.to_string(),
            c.p.to_string(),
            c.field.to_string(),
            c.best_potential.to_string(),
            c.spread.to_string(),
            c.simplex.is_simplex.to_string(),
            c.simplex.coherence_mean.to_string(),
            c.analytic.map(|a| a.numer().to_string()).unwrap_or_default(),
            c.analytic.map(|a| a.denom().to_string()).unwrap_or_default(),
            c.abs_gap.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a solver trace as CSV with columns `proposal,potential,delta_step`.
pub fn export_trace_csv(trace: &[TraceSample<f64>], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["proposal", "potential", "delta_step"])?;
    for t in trace {
        w.write_record([
            t.proposal.to_string(),
            t.potential.to_string(),
            t.delta_step.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
