//! Per-index diagnostics and window verdicts on whether the root functions
//! contain a Riesz basis.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{Basis, Boundary, DiscretizationConfig};
use crate::error::CoreError;
use crate::potential::{FourierPotential, PotentialClass};
use crate::reduction::{
    default_zero_threshold, solve_basic_equation, t_ratio, track_branch, BasicEqConfig, BasicEqRoots, BranchData,
    ExtReal, ReducedEval, Reducer, SchurReducer, BRANCH_SAMPLES,
};
use crate::spectral::{compute_spectrum, overlap, SpectralPair, SpectralRun};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionConfig {
    /// Diagnostics are collected for `|n| >= min_index`.
    pub min_index: i64,
    /// Overlap level separating the verdicts.
    pub kappa: f64,
    /// Ratios inside `[1/margin, margin]` count as bounded.
    pub ratio_margin: f64,
    /// Tail points inspected for a monotone ratio trend.
    pub trend_points: usize,
    /// Minimal total change along the tail that counts as a trend.
    pub trend_factor: f64,
    /// Slack of the upper gap bound.
    pub delta: f64,
    /// Multiplier on the lower gap bound.
    pub lower_slack: f64,
    pub basic: BasicEqConfig,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            min_index: 8,
            kappa: 0.9,
            ratio_margin: 100.0,
            trend_points: 5,
            trend_factor: 4.0,
            delta: 0.25,
            lower_slack: 0.5,
            basic: BasicEqConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisDiagnostics {
    pub n: i64,
    pub simple: bool,
    pub defective: bool,
    pub t_star: ExtReal,
    pub t_zero: ExtReal,
    pub overlap_abs: f64,
    /// `None` when the branch of `η` could not be tracked.
    pub overlap_formula_abs: Option<f64>,
    pub psi: Option<f64>,
    pub gap: f64,
    pub beta_sum: f64,
    pub beta_plus_zero: Complex64,
    pub beta_minus_zero: Complex64,
    pub beta_plus_star: Complex64,
    pub beta_minus_star: Complex64,
    pub z_star: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
    /// Filled in by [`window_report`] once the window constant is known.
    pub gap_lower_ok: Option<bool>,
    pub gap_upper_ok: bool,
    pub xt_symmetry_defect: Option<f64>,
}

/// Relative defect of `conj β⁺(z*) = t β⁻(z*)`.
pub fn xt_symmetry_defect(t: f64, at_star: &ReducedEval, eps: f64) -> f64 {
    let num = (at_star.beta_plus.conj() - at_star.beta_minus * t).norm();
    let den = at_star.beta_plus.norm() + at_star.beta_minus.norm() + eps;
    num / den
}

/// `‖f⁰‖ ‖g⁰‖ √Π` with `Π` built from `|η|` at both roots and the branch
/// angle `ψ`.
pub fn overlap_formula(f0_norm: f64, g0_norm: f64, eta1: f64, eta2: f64, psi: f64) -> f64 {
    let g = (eta1 * eta2).sqrt();
    let pi = (1.0 + eta1 * eta2 - 2.0 * g * psi.cos()) / ((1.0 + eta1) * (1.0 + eta2));
    f0_norm * g0_norm * pi.max(0.0).sqrt()
}

fn component_norm(v: &[Complex64], e: [usize; 2]) -> f64 {
    (v[e[0]].norm_sqr() + v[e[1]].norm_sqr()).sqrt()
}

pub struct PerIndexInputs<'a> {
    pub pair: &'a SpectralPair,
    pub basis: &'a Basis,
    pub at_zero: &'a ReducedEval,
    pub at_star: &'a ReducedEval,
    pub roots: &'a BasicEqRoots,
    pub branch: &'a BranchData,
    pub class: PotentialClass,
    pub zero_threshold: f64,
}

pub fn per_n_diagnostics(inp: &PerIndexInputs<'_>, cfg: &CriterionConfig) -> Result<BasisDiagnostics, CoreError> {
    let pair = inp.pair;
    let e = inp.basis.pair_positions(pair.n).ok_or(CoreError::NotLocalized { n: pair.n })?;
    let beta_sum = inp.at_star.beta_plus.norm() + inp.at_star.beta_minus.norm();
    let formula = match (inp.branch.psi, inp.branch.eta_at_ends()) {
        (Some(psi), Some((eta1, eta2))) => Some(overlap_formula(
            component_norm(&pair.f, e),
            component_norm(&pair.g, e),
            eta1.norm(),
            eta2.norm(),
            psi,
        )),
        _ => None,
    };
    Ok(BasisDiagnostics {
        n: pair.n,
        simple: pair.simple,
        defective: pair.defective,
        t_star: t_ratio(inp.at_star, inp.zero_threshold),
        t_zero: t_ratio(inp.at_zero, inp.zero_threshold),
        overlap_abs: overlap(pair).norm(),
        overlap_formula_abs: formula,
        psi: inp.branch.psi,
        gap: pair.gap,
        beta_sum,
        beta_plus_zero: inp.at_zero.beta_plus,
        beta_minus_zero: inp.at_zero.beta_minus,
        beta_plus_star: inp.at_star.beta_plus,
        beta_minus_star: inp.at_star.beta_minus,
        z_star: pair.z_star,
        z1: inp.roots.z1,
        z2: inp.roots.z2,
        gap_lower_ok: None,
        gap_upper_ok: !pair.simple || pair.gap <= (1.0 + cfg.delta) * beta_sum,
        xt_symmetry_defect: inp.class.t_value().map(|t| xt_symmetry_defect(t, inp.at_star, inp.zero_threshold)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RieszBasisSupported,
    RieszBasisRefuted,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::RieszBasisSupported => "riesz_basis_supported",
            Verdict::RieszBasisRefuted => "riesz_basis_refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    TowardZero,
    TowardInfinity,
}

/// Tail behaviour of `t(0)` on one side of the window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailTrend {
    /// `+1` for positive indices, `−1` for negative.
    pub side: i64,
    pub indices: Vec<i64>,
    /// Least-squares slope of `ln t(0)` per unit `|n|`, over finite positive values.
    pub log_slope: Option<f64>,
    pub monotone: Option<TrendDirection>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub bc: Boundary,
    pub evidence: &'static str,
    /// Smallest and largest `|n|` in the report.
    pub window: [i64; 2],
    pub ratio_min: ExtReal,
    pub ratio_max: ExtReal,
    pub class_x_constant_c: ExtReal,
    pub kappa_hat: f64,
    pub verdict: Verdict,
    pub trends: Vec<TailTrend>,
    pub simple_pairs: usize,
    pub non_simple_pairs: usize,
    pub defective_pairs: usize,
    pub notes: Vec<String>,
    pub diagnostics: Vec<BasisDiagnostics>,
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn tail_trend(diags: &[BasisDiagnostics], side: i64, cfg: &CriterionConfig) -> Option<TailTrend> {
    let mut pts: Vec<(i64, f64)> =
        diags.iter().filter(|d| d.n.signum() == side).map(|d| (d.n.abs(), d.t_zero.value())).collect();
    pts.sort_by_key(|p| p.0);
    if pts.len() < cfg.trend_points {
        return None;
    }
    let tail = &pts[pts.len() - cfg.trend_points..];
    let values: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let (first, last) = (values[0], values[values.len() - 1]);
    let falling = values.windows(2).all(|w| w[1] < w[0]);
    let rising = values.windows(2).all(|w| w[1] > w[0]);
    let monotone = if falling && (last == 0.0 || first >= cfg.trend_factor * last) {
        Some(TrendDirection::TowardZero)
    } else if (rising && (last.is_infinite() || last >= cfg.trend_factor * first))
        || values.iter().all(|v| v.is_infinite())
    {
        Some(TrendDirection::TowardInfinity)
    } else if values.iter().all(|&v| v == 0.0) {
        Some(TrendDirection::TowardZero)
    } else {
        None
    };
    let logs: Vec<(f64, f64)> =
        tail.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|p| (p.0 as f64, p.1.ln())).collect();
    Some(TailTrend { side, indices: tail.iter().map(|p| p.0 * side).collect(), log_slope: log_slope(&logs), monotone })
}

fn ext_min_max(values: impl Iterator<Item = f64>) -> (ExtReal, ExtReal) {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (ExtReal::from(lo), ExtReal::from(hi))
}

/// Lower gap bound factor `2√c / (1 + 4c)`.
pub fn gap_lower_factor(c: f64) -> f64 {
    2.0 * c.sqrt() / (1.0 + 4.0 * c)
}

pub fn window_report(
    bc: Boundary,
    diags: Vec<BasisDiagnostics>,
    cfg: &CriterionConfig,
    mut notes: Vec<String>,
) -> Result<CriterionReport, CoreError> {
    if diags.len() < cfg.trend_points {
        return Err(CoreError::Insufficient(format!(
            "{} indices with |n| >= {} in the window; at least {} are needed",
            diags.len(),
            cfg.min_index,
            cfg.trend_points
        )));
    }
    let mut diags = diags;
    diags.sort_by_key(|d| d.n);
    let simple_count = diags.iter().filter(|d| d.simple).count();
    let c = diags.iter().filter(|d| d.simple).map(|d| d.t_star.spread()).fold(1.0f64, f64::max);
    let class_c = ExtReal::from(c);
    if c.is_finite() {
        let factor = cfg.lower_slack * gap_lower_factor(c);
        for d in diags.iter_mut() {
            d.gap_lower_ok = Some(!d.simple || d.gap >= factor * d.beta_sum);
        }
    }
    let (ratio_min, ratio_max) = ext_min_max(diags.iter().map(|d| d.t_zero.value()));
    let kappa_hat = diags.iter().map(|d| d.overlap_abs).fold(0.0, f64::max);
    let trends: Vec<TailTrend> = [1, -1].into_iter().filter_map(|s| tail_trend(&diags, s, cfg)).collect();
    let trending = trends.iter().any(|t| t.monotone.is_some());
    let bounded = ratio_min.value() >= 1.0 / cfg.ratio_margin && ratio_max.value() <= cfg.ratio_margin;
    let verdict = if simple_count == 0 {
        notes.push("M^± empty in window".into());
        Verdict::RieszBasisSupported
    } else if trending && kappa_hat > cfg.kappa {
        Verdict::RieszBasisRefuted
    } else if bounded && !trending && kappa_hat <= cfg.kappa {
        Verdict::RieszBasisSupported
    } else {
        Verdict::Inconclusive
    };
    let non_simple = diags.len() - simple_count;
    if non_simple > 0 {
        notes.push(format!("{non_simple} double eigenvalue(s) in window"));
    }
    let window = [diags.iter().map(|d| d.n.abs()).min().unwrap_or(0), diags.iter().map(|d| d.n.abs()).max().unwrap_or(0)];
    Ok(CriterionReport {
        bc,
        evidence: "window evidence",
        window,
        ratio_min,
        ratio_max,
        class_x_constant_c: class_c,
        kappa_hat,
        verdict,
        trends,
        simple_pairs: simple_count,
        non_simple_pairs: non_simple,
        defective_pairs: diags.iter().filter(|d| d.defective).count(),
        notes,
        diagnostics: diags,
    })
}

impl CriterionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn diagnostic(&self, n: i64) -> Option<&BasisDiagnostics> {
        self.diagnostics.iter().find(|d| d.n == n)
    }

    /// Fixed-width table for terminals.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "boundary {}  |n| in [{}, {}]  ({})", self.bc, self.window[0], self.window[1], self.evidence);
        let _ = writeln!(
            s,
            "{:>6} {:>12} {:>12} {:>12} {:>9} {:>9} {:>6}",
            "n", "gap", "t(0)", "t(z*)", "overlap", "formula", "simple"
        );
        for d in &self.diagnostics {
            let formula = d.overlap_formula_abs.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
            let _ = writeln!(
                s,
                "{:>6} {:>12.4e} {:>12} {:>12} {:>9.4} {:>9} {:>6}",
                d.n, d.gap, d.t_zero, d.t_star, d.overlap_abs, formula, d.simple
            );
        }
        let _ = writeln!(s, "t(0) range    [{}, {}]", self.ratio_min, self.ratio_max);
        let _ = writeln!(s, "constant c    {}", self.class_x_constant_c);
        let _ = writeln!(s, "kappa_hat     {:.6}", self.kappa_hat);
        let _ = writeln!(s, "verdict       {}", self.verdict);
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// Spectrum, reductions and report for one boundary condition.
#[derive(Clone, Debug)]
pub struct CriterionAnalysis {
    pub run: SpectralRun,
    pub report: CriterionReport,
}

pub fn analyze_criterion(
    v: &FourierPotential,
    bc: Boundary,
    disc: &DiscretizationConfig,
    cfg: &CriterionConfig,
) -> Result<CriterionAnalysis, CoreError> {
    let run = compute_spectrum(v, bc, disc)?;
    let reducer = SchurReducer::new(v, bc, disc);
    let zero_threshold = default_zero_threshold(v, disc.precision);
    let basic = BasicEqConfig { zero_threshold, ..cfg.basic.clone() };
    let class = v.classify(1e-12);
    let mut notes: Vec<String> = run
        .localization
        .issues
        .iter()
        .map(|i| format!("index {}: disc holds {} eigenvalues", i.n, i.count))
        .collect();
    let pairs: Vec<&SpectralPair> = run.pairs().iter().filter(|p| p.n.abs() >= cfg.min_index).collect();
    let results: Vec<Result<BasisDiagnostics, CoreError>> = pairs
        .par_iter()
        .map(|pair| {
            let n = pair.n;
            let at_zero = reducer.reduce(n, Complex64::new(0.0, 0.0))?;
            let at_star = reducer.reduce(n, pair.z_star)?;
            let roots = solve_basic_equation(n, &reducer, &basic)?;
            let branch = track_branch(n, &reducer, roots.z1, roots.z2, BRANCH_SAMPLES)?;
            let inputs = PerIndexInputs {
                pair,
                basis: &run.basis,
                at_zero: &at_zero,
                at_star: &at_star,
                roots: &roots,
                branch: &branch,
                class,
                zero_threshold,
            };
            per_n_diagnostics(&inputs, cfg)
        })
        .collect();
    let mut diags = Vec::with_capacity(results.len());
    for (pair, r) in pairs.iter().zip(results) {
        match r {
            Ok(d) => diags.push(d),
            Err(e) => notes.push(format!("index {}: {e}", pair.n)),
        }
    }
    let report = window_report(bc, diags, cfg, notes)?;
    Ok(CriterionAnalysis { run, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(n: i64, t: f64, overlap: f64) -> BasisDiagnostics {
        let z = Complex64::new(0.0, 0.0);
        BasisDiagnostics {
            n,
            simple: true,
            defective: false,
            t_star: ExtReal::from(t),
            t_zero: ExtReal::from(t),
            overlap_abs: overlap,
            overlap_formula_abs: None,
            psi: None,
            gap: 1.0,
            beta_sum: 1.0,
            beta_plus_zero: z,
            beta_minus_zero: z,
            beta_plus_star: z,
            beta_minus_star: z,
            z_star: z,
            z1: z,
            z2: z,
            gap_lower_ok: None,
            gap_upper_ok: true,
            xt_symmetry_defect: None,
        }
    }

    #[test]
    fn formula_limits() {
        assert!(overlap_formula(1.0, 1.0, 1.0, 1.0, 0.0) < 1e-12);
        assert!((overlap_formula(1.0, 1.0, 0.0, 0.0, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drifting_ratio_is_refuted() {
        let diags: Vec<_> = (4..12).map(|k| diag(2 * k + 1, 2f64.powi(-(k as i32)), 0.95)).collect();
        let r = window_report(Boundary::Antiperiodic, diags, &CriterionConfig::default(), vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::RieszBasisRefuted);
        assert_eq!(r.trends[0].monotone, Some(TrendDirection::TowardZero));
        let slope = r.trends[0].log_slope.unwrap();
        assert!((slope + 0.5 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn flat_ratio_is_supported() {
        let diags: Vec<_> = (4..12).map(|k| diag(2 * k + 1, 1.0 + 0.01 * k as f64, 0.1)).collect();
        let r = window_report(Boundary::Antiperiodic, diags, &CriterionConfig::default(), vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::RieszBasisSupported);
        assert!(r.diagnostics.iter().all(|d| d.gap_lower_ok == Some(true)));
        assert_eq!(r.to_json(), r.clone().to_json());
    }

    #[test]
    fn all_double_is_supported_with_note() {
        let diags: Vec<_> = (4..10)
            .map(|k| BasisDiagnostics { simple: false, ..diag(2 * k, 1.0, 0.0) })
            .collect();
        let r = window_report(Boundary::Periodic, diags, &CriterionConfig::default(), vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::RieszBasisSupported);
        assert!(r.notes.iter().any(|n| n == "M^± empty in window"));
    }

    #[test]
    fn short_window_is_rejected() {
        let diags = vec![diag(9, 1.0, 0.0)];
        assert!(window_report(Boundary::Antiperiodic, diags, &CriterionConfig::default(), vec![]).is_err());
    }
}
