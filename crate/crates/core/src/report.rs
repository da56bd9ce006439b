//! Flat table rows for JSON and CSV output.

use num_complex::Complex64;
use serde::Serialize;

use crate::criterion::CriterionReport;
use crate::reduction::{t_ratio, ExtReal, ReducedEval, Route};
use crate::spectral::{overlap, SpectralPair};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRow {
    pub n: i64,
    pub lambda_minus_re: f64,
    pub lambda_minus_im: f64,
    pub lambda_plus_re: f64,
    pub lambda_plus_im: f64,
    pub gamma: f64,
    pub z_star_re: f64,
    pub z_star_im: f64,
    pub simple: bool,
    pub defective: bool,
    pub overlap_abs: f64,
}

impl From<&SpectralPair> for PairRow {
    fn from(p: &SpectralPair) -> Self {
        Self {
            n: p.n,
            lambda_minus_re: p.lambda_minus.re,
            lambda_minus_im: p.lambda_minus.im,
            lambda_plus_re: p.lambda_plus.re,
            lambda_plus_im: p.lambda_plus.im,
            gamma: p.gap,
            z_star_re: p.z_star.re,
            z_star_im: p.z_star.im,
            simple: p.simple,
            defective: p.defective,
            overlap_abs: overlap(p).norm(),
        }
    }
}

/// One reduced evaluation; complex values are `[re, im]` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionRow {
    pub n: i64,
    pub z: Complex64,
    pub alpha: Option<Complex64>,
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
    pub route: Route,
    pub nu_max: Option<usize>,
    #[serde(rename = "J")]
    pub index_radius: Option<i64>,
    pub diag_asym: Option<f64>,
    pub t_ratio: ExtReal,
}

impl ReductionRow {
    pub fn new(ev: &ReducedEval, zero_threshold: f64) -> Self {
        Self {
            n: ev.n,
            z: ev.z,
            alpha: ev.alpha,
            beta_plus: ev.beta_plus,
            beta_minus: ev.beta_minus,
            route: ev.route,
            nu_max: ev.nu_max,
            index_radius: ev.index_radius,
            diag_asym: ev.diag_asym,
            t_ratio: t_ratio(ev, zero_threshold),
        }
    }
}

#[derive(Serialize)]
struct ReductionCsv {
    n: i64,
    z_re: f64,
    z_im: f64,
    alpha_re: Option<f64>,
    alpha_im: Option<f64>,
    beta_plus_re: f64,
    beta_plus_im: f64,
    beta_minus_re: f64,
    beta_minus_im: f64,
    route: Route,
    nu_max: Option<usize>,
    #[serde(rename = "J")]
    index_radius: Option<i64>,
    diag_asym: Option<f64>,
    t_ratio: ExtReal,
}

impl From<&ReductionRow> for ReductionCsv {
    fn from(r: &ReductionRow) -> Self {
        Self {
            n: r.n,
            z_re: r.z.re,
            z_im: r.z.im,
            alpha_re: r.alpha.map(|a| a.re),
            alpha_im: r.alpha.map(|a| a.im),
            beta_plus_re: r.beta_plus.re,
            beta_plus_im: r.beta_plus.im,
            beta_minus_re: r.beta_minus.re,
            beta_minus_im: r.beta_minus.im,
            route: r.route,
            nu_max: r.nu_max,
            index_radius: r.index_radius,
            diag_asym: r.diag_asym,
            t_ratio: r.t_ratio,
        }
    }
}

/// Columns for external plotting of a criterion run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlotRow {
    pub n: i64,
    pub gap: f64,
    pub t_zero: ExtReal,
    pub t_star: ExtReal,
    pub overlap_abs: f64,
    pub overlap_formula_abs: Option<f64>,
}

pub fn plot_rows(report: &CriterionReport) -> Vec<PlotRow> {
    report
        .diagnostics
        .iter()
        .map(|d| PlotRow {
            n: d.n,
            gap: d.gap,
            t_zero: d.t_zero,
            t_star: d.t_star,
            overlap_abs: d.overlap_abs,
            overlap_formula_abs: d.overlap_formula_abs,
        })
        .collect()
}

pub fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn reductions_to_csv(rows: &[ReductionRow]) -> Result<String, csv::Error> {
    let flat: Vec<ReductionCsv> = rows.iter().map(ReductionCsv::from).collect();
    to_csv(&flat)
}
