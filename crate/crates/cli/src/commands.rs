use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dirac_core::criterion::{analyze_criterion, CriterionConfig};
use dirac_core::reduction::{asymptotic_beta, beta_series, default_index_radius, default_zero_threshold, Reducer};
use dirac_core::report::{plot_rows, reductions_to_csv, to_csv, PairRow, ReductionRow};
use dirac_core::spectral::LocalizationIssue;
use dirac_core::{
    compute_spectrum, make_trig_potential, Boundary, CoreError, DiscretizationConfig, FourierPotential,
    PotentialError, ReductionError, SchurReducer,
};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::args::{BcChoice, CriterionArgs, Format, GridArgs, ReduceArgs, SourceArgs, SpectrumArgs, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Serialize(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Serialize(e.to_string())
    }
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    Diagnostics,
}

impl Status {
    fn and(self, other: Status) -> Status {
        if self == Status::Diagnostics || other == Status::Diagnostics {
            Status::Diagnostics
        } else {
            Status::Clean
        }
    }
}

type CmdResult = Result<Status, CliError>;

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    Complex64::from_str(s.trim()).map_err(|_| CliError::Usage(format!("cannot parse complex number {s:?}")))
}

fn parse_trig(spec: &str) -> Result<[Complex64; 4], CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("expected four coefficients a,b,A,B, got {spec:?}")));
    }
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = parse_complex(part)?;
    }
    Ok(out)
}

fn load_potential(src: &SourceArgs) -> Result<FourierPotential, CliError> {
    if let Some(path) = &src.potential {
        return Ok(FourierPotential::from_json_file(path)?);
    }
    if let Some(spec) = &src.trig {
        let [a, b, big_a, big_b] = parse_trig(spec)?;
        return Ok(make_trig_potential(a, b, big_a, big_b));
    }
    if let Some(spec) = &src.xt {
        let (t, file) = spec
            .split_once(',')
            .ok_or_else(|| CliError::Usage(format!("expected t,FILE, got {spec:?}")))?;
        let t: f64 = t.trim().parse().map_err(|_| CliError::Usage(format!("cannot parse t from {t:?}")))?;
        return Ok(FourierPotential::xt_from_json_file(Path::new(file.trim()), t)?);
    }
    Err(CliError::Usage("a potential source is required".into()))
}

fn discretization(grid: &GridArgs) -> Result<DiscretizationConfig, CliError> {
    if grid.modes < 8 {
        return Err(CliError::Usage(format!("mode cutoff must be at least 8, got {}", grid.modes)));
    }
    let radius = grid.window.unwrap_or(grid.modes / 2);
    if radius == 0 || radius > grid.modes / 2 {
        return Err(CliError::Usage(format!(
            "window must lie in 1..={} (half the mode cutoff), got {radius}",
            grid.modes / 2
        )));
    }
    let mut cfg = DiscretizationConfig::new(grid.modes)
        .with_radius(radius)
        .with_precision(grid.precision.into());
    cfg.eig_tolerance = grid.eig_tolerance;
    cfg.validate().map_err(CoreError::from)?;
    Ok(cfg)
}

/// File for one boundary condition; runs over both get a suffix before the extension.
fn target(out: &Option<PathBuf>, bc: Boundary, choice: BcChoice) -> Option<PathBuf> {
    let path = out.as_ref()?;
    if choice != BcChoice::Both {
        return Some(path.clone());
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{bc}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{bc}"),
    };
    Some(path.with_file_name(name))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn warn_issues(issues: &[LocalizationIssue]) {
    for i in issues {
        eprintln!("warning: index {}: disc holds {} eigenvalues", i.n, i.count);
    }
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    bc: Boundary,
    modes: usize,
    trusted_radius: usize,
    worst_residual: f64,
    matrix_norm: f64,
    pairs: Vec<PairRow>,
    issues: &'a [LocalizationIssue],
}

pub fn spectrum(args: &SpectrumArgs) -> CmdResult {
    let v = load_potential(&args.source)?;
    let disc = discretization(&args.grid)?;
    let mut status = Status::Clean;
    for bc in args.bc.boundaries() {
        let run = compute_spectrum(&v, bc, &disc)?;
        warn_issues(&run.localization.issues);
        if run.has_issues() {
            status = Status::Diagnostics;
        }
        let pairs: Vec<PairRow> = run.pairs().iter().map(PairRow::from).collect();
        let text = match args.output.format {
            Format::Csv => to_csv(&pairs)?,
            Format::Json => serde_json::to_string_pretty(&SpectrumOutput {
                bc,
                modes: disc.modes,
                trusted_radius: disc.trusted_radius,
                worst_residual: run.worst_residual,
                matrix_norm: run.matrix_norm,
                pairs,
                issues: &run.localization.issues,
            })?,
        };
        emit(target(&args.output.out, bc, args.bc).as_deref(), &text)?;
    }
    Ok(status)
}

fn window_index(n: i64, disc: &DiscretizationConfig) -> Result<(), CliError> {
    if n.unsigned_abs() as usize > disc.trusted_radius {
        return Err(CliError::Usage(format!(
            "index {n} lies outside the trusted window |n| <= {}",
            disc.trusted_radius
        )));
    }
    Ok(())
}

/// Relative distance of `x` from `reference`, absolute when the reference vanishes.
fn discrepancy(x: Complex64, reference: Complex64) -> f64 {
    let scale = reference.norm();
    let d = (x - reference).norm();
    if scale > 0.0 {
        d / scale
    } else {
        d
    }
}

#[derive(Serialize)]
struct Discrepancy {
    beta_plus: f64,
    beta_minus: f64,
}

#[derive(Serialize)]
struct ReduceOutput {
    bc: Boundary,
    rows: Vec<ReductionRow>,
    discrepancy: Option<Discrepancy>,
    series_empty: Option<bool>,
    series_clipped: Option<bool>,
}

pub fn reduce(args: &ReduceArgs) -> CmdResult {
    let v = load_potential(&args.source)?;
    let disc = discretization(&args.grid)?;
    let n = args.n;
    window_index(n, &disc)?;
    let bc = if n.rem_euclid(2) == 0 { Boundary::Periodic } else { Boundary::Antiperiodic };
    if args.bc != BcChoice::Both && args.bc.boundaries() != [bc] {
        return Err(CliError::Usage(format!("index {n} does not belong to the {} lattice", args.bc.boundaries()[0])));
    }
    let z = parse_complex(&args.z)?;
    if !(z.norm() <= 0.5) {
        return Err(CliError::Usage(format!("|z| must not exceed 1/2, got {z}")));
    }
    let thr = default_zero_threshold(&v, disc.precision);
    let schur = SchurReducer::new(&v, bc, &disc).reduce(n, z)?;
    let mut rows = vec![ReductionRow::new(&schur, thr)];
    let mut out = ReduceOutput { bc, rows: Vec::new(), discrepancy: None, series_empty: None, series_clipped: None };
    let mut status = Status::Clean;
    if n.abs() >= 2 {
        let j = args.index_radius.unwrap_or_else(|| default_index_radius(n));
        let series = beta_series(&v, n, z, args.nu_max, j)?;
        out.discrepancy = Some(Discrepancy {
            beta_plus: discrepancy(series.beta_plus, schur.beta_plus),
            beta_minus: discrepancy(series.beta_minus, schur.beta_minus),
        });
        if let Some(meta) = &series.series {
            out.series_empty = Some(meta.empty);
            out.series_clipped = Some(meta.clipped);
            if meta.empty && !v.is_zero() {
                eprintln!("warning: series of order {} has no admissible path at index {n}", args.nu_max);
                status = Status::Diagnostics;
            }
        }
        rows.push(ReductionRow::new(&series, thr));
    } else {
        eprintln!("note: series route needs |n| >= 2; only the Schur route is reported");
    }
    let text = match args.output.format {
        Format::Csv => {
            if let Some(d) = &out.discrepancy {
                eprintln!("discrepancy beta_plus {:.3e} beta_minus {:.3e}", d.beta_plus, d.beta_minus);
            }
            reductions_to_csv(&rows)?
        }
        Format::Json => {
            out.rows = rows;
            serde_json::to_string_pretty(&out)?
        }
    };
    emit(args.output.out.as_deref(), &text)?;
    Ok(status)
}

pub fn criterion(args: &CriterionArgs) -> CmdResult {
    let v = load_potential(&args.source)?;
    let disc = discretization(&args.grid)?;
    let mut cfg = CriterionConfig { min_index: args.min_index, ..CriterionConfig::default() };
    cfg.basic.fp_tolerance = args.fp_tolerance;
    let mut status = Status::Clean;
    for bc in args.bc.boundaries() {
        let analysis = analyze_criterion(&v, bc, &disc, &cfg)?;
        let report = &analysis.report;
        println!("{}", report.summary_table());
        let late_issues: Vec<LocalizationIssue> = analysis
            .run
            .localization
            .issues
            .iter()
            .filter(|i| i.n.abs() >= cfg.min_index)
            .cloned()
            .collect();
        warn_issues(&late_issues);
        if !late_issues.is_empty() || report.diagnostics.is_empty() {
            status = status.and(Status::Diagnostics);
        }
        let path = target(&args.output.out, bc, args.bc);
        if let Some(p) = &path {
            let text = match args.output.format {
                Format::Json => report.to_json(),
                Format::Csv => to_csv(&report.diagnostics)?,
            };
            emit(Some(p), &text)?;
        }
        if args.emit_plot_data {
            let text = to_csv(&plot_rows(report))?;
            let plot = path.map(|p| {
                let mut s = p.into_os_string();
                s.push(".plot.csv");
                PathBuf::from(s)
            });
            emit(plot.as_deref(), &text)?;
        }
    }
    Ok(status)
}

#[derive(Serialize)]
struct VerifyRow {
    n: i64,
    beta_plus: Complex64,
    beta_minus: Complex64,
    asym_plus: Complex64,
    asym_minus: Complex64,
    rel_err_plus: f64,
    rel_err_minus: f64,
    series_rel_err_plus: Option<f64>,
    series_rel_err_minus: Option<f64>,
}

#[derive(Serialize)]
struct VerifyOutput {
    rows: Vec<VerifyRow>,
    errors_shrink: bool,
    periodic_max_beta: f64,
    periodic_bound: f64,
    periodic_vanishes: bool,
}

pub fn verify_example(args: &VerifyArgs) -> CmdResult {
    let [a, b, big_a, big_b] = parse_trig(&args.trig)?;
    if [a, b, big_a, big_b].iter().any(|c| c.norm() == 0.0) {
        return Err(CliError::Usage("all four coefficients must be nonzero".into()));
    }
    let v = make_trig_potential(a, b, big_a, big_b);
    let disc = discretization(&args.grid)?;
    let indices: Vec<i64> = (3..=disc.trusted_radius as i64).filter(|n| n % 2 == 1).collect();
    if indices.len() < 3 {
        return Err(CliError::Usage(format!(
            "window {} holds fewer than three odd indices n >= 3",
            disc.trusted_radius
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let odd = SchurReducer::new(&v, Boundary::Antiperiodic, &disc);
    let mut rows = Vec::with_capacity(indices.len());
    for &n in &indices {
        let measured = odd.reduce(n, zero)?;
        let asym = asymptotic_beta(n, a, b, big_a, big_b)?;
        let (ap, am) = (asym.plus.to_complex(), asym.minus.to_complex());
        let nu = args.nu_max.unwrap_or(((n - 1) / 2) as usize + 2);
        let j = args.index_radius.unwrap_or_else(|| default_index_radius(n));
        let series = beta_series(&v, n, zero, nu, j).ok();
        rows.push(VerifyRow {
            n,
            beta_plus: measured.beta_plus,
            beta_minus: measured.beta_minus,
            asym_plus: ap,
            asym_minus: am,
            rel_err_plus: discrepancy(measured.beta_plus, ap),
            rel_err_minus: discrepancy(measured.beta_minus, am),
            series_rel_err_plus: series.as_ref().map(|s| discrepancy(s.beta_plus, ap)),
            series_rel_err_minus: series.as_ref().map(|s| discrepancy(s.beta_minus, am)),
        });
    }
    let worst = |r: &VerifyRow| r.rel_err_plus.max(r.rel_err_minus);
    let errors_shrink = rows[rows.len() - 3..].windows(2).all(|w| worst(&w[1]) < worst(&w[0]));

    let even = SchurReducer::new(&v, Boundary::Periodic, &disc);
    let mut periodic_max_beta = 0.0f64;
    for n in Boundary::Periodic.indices(2, disc.trusted_radius as i64) {
        let ev = even.reduce(n, zero)?;
        periodic_max_beta = periodic_max_beta.max(ev.beta_plus.norm()).max(ev.beta_minus.norm());
    }
    let periodic_bound = 1e-8 * v.norm_r();
    let out = VerifyOutput {
        rows,
        errors_shrink,
        periodic_max_beta,
        periodic_bound,
        periodic_vanishes: periodic_max_beta <= periodic_bound,
    };
    let text = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&out)?,
        Format::Csv => to_csv(&out.rows.iter().map(VerifyCsv::from).collect::<Vec<_>>())?,
    };
    emit(args.output.out.as_deref(), &text)?;
    eprintln!(
        "relative error {:.3e} at n = {} and {:.3e} at n = {}; periodic coefficients {} (max {:.2e})",
        worst(&out.rows[0]),
        out.rows[0].n,
        worst(&out.rows[out.rows.len() - 1]),
        out.rows[out.rows.len() - 1].n,
        if out.periodic_vanishes { "vanish" } else { "do not vanish" },
        out.periodic_max_beta,
    );
    let ok = out.errors_shrink && out.periodic_vanishes;
    Ok(if ok { Status::Clean } else { Status::Diagnostics })
}

#[derive(Serialize)]
struct VerifyCsv {
    n: i64,
    beta_plus_abs: f64,
    beta_minus_abs: f64,
    asym_plus_abs: f64,
    asym_minus_abs: f64,
    rel_err_plus: f64,
    rel_err_minus: f64,
}

impl From<&VerifyRow> for VerifyCsv {
    fn from(r: &VerifyRow) -> Self {
        Self {
            n: r.n,
            beta_plus_abs: r.beta_plus.norm(),
            beta_minus_abs: r.beta_minus.norm(),
            asym_plus_abs: r.asym_plus.norm(),
            asym_minus_abs: r.asym_minus.norm(),
            rel_err_plus: r.rel_err_plus,
            rel_err_minus: r.rel_err_minus,
        }
    }
}
