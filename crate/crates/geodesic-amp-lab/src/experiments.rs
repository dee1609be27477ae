//! Experiment orchestration: TOML configs, runners for every capability, and
//! deterministic CSV/JSON/SVG emission with a run manifest.
//!
//! Data artifacts (CSV, fit JSON, SVG) are bit-exact functions of the config
//! and seed; the run manifest additionally records wall time and therefore
//! varies between runs.

use crate::counting::{CountConfig, CountRecord, HeckeScan};
use crate::exponents::{
    conditional_exponents, offspec_exponent_pair, onspec_exponent_pair, optimize_exponents,
    preset_model,
};
use crate::geometry::{GeodesicSegment, GroupElement};
use crate::oscillatory::{
    aligned_geometry, fit_decay, restriction_integral, transverse_geometry, BumpProfile,
    DecayModel, DecaySample, DecaySeries, FitResult, IntegralMethod,
};
use crate::phase::{
    classify_degeneracy, find_critical_points, hessian_analytic, hessian_numeric, PhaseContext,
};
use crate::quaternion::{parse_rational, AlgebraSpec, OrderBasis, QuatError};
use crate::spherical::{kernel_profile, two_sided_window, KernelProfile, WindowParams};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("accuracy not reached: {0}")]
    AccuracyNotReached(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code contract: 2 config-invalid, 3 budget-exceeded,
    /// 4 accuracy-not-reached, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::ConfigInvalid(_) => 2,
            ExperimentError::BudgetExceeded(_) => 3,
            ExperimentError::AccuracyNotReached(_) => 4,
            ExperimentError::Io(_) => 1,
        }
    }
}

impl From<QuatError> for ExperimentError {
    fn from(e: QuatError) -> Self {
        match e {
            QuatError::BudgetExceeded(_, _) | QuatError::IncompleteEnumeration { .. } => {
                ExperimentError::BudgetExceeded(e.to_string())
            }
            other => ExperimentError::ConfigInvalid(other.to_string()),
        }
    }
}

impl From<crate::oscillatory::OscError> for ExperimentError {
    fn from(e: crate::oscillatory::OscError) -> Self {
        use crate::oscillatory::OscError::*;
        match e {
            AccuracyNotReached { .. } => ExperimentError::AccuracyNotReached(e.to_string()),
            FrequencyCeiling(_, _) | BudgetExceeded(_) => {
                ExperimentError::BudgetExceeded(e.to_string())
            }
            DegenerateFit(_) | BadRho(_) => ExperimentError::ConfigInvalid(e.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// order config (TOML wire format)

#[derive(Debug, Deserialize)]
pub struct OrderConfigFile {
    pub algebra: AlgebraSection,
    pub order: OrderSection,
    #[serde(default)]
    pub counting: Option<CountingSection>,
}

#[derive(Debug, Deserialize)]
pub struct AlgebraSection {
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Deserialize)]
pub struct OrderSection {
    /// four basis elements, each four rationals as "p/q" strings
    pub basis: Vec<Vec<String>>,
    pub q: u64,
}

#[derive(Debug, Deserialize)]
pub struct CountingSection {
    pub entry_bound: Option<f64>,
    pub prefilter_constant: Option<f64>,
}

/// Parses and validates an order config (integrality, closure, division).
pub fn load_order(toml_text: &str) -> Result<(OrderBasis, CountConfig), ExperimentError> {
    let file: OrderConfigFile =
        toml::from_str(toml_text).map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
    let algebra = AlgebraSpec::new(file.algebra.a, file.algebra.b)?;
    if file.order.basis.len() != 4 || file.order.basis.iter().any(|row| row.len() != 4) {
        return Err(ExperimentError::ConfigInvalid(
            "order.basis must be a 4 x 4 array of rationals".into(),
        ));
    }
    let mut elems = Vec::with_capacity(4);
    for row in &file.order.basis {
        let mut coords = Vec::with_capacity(4);
        for s in row {
            coords.push(parse_rational(s).map_err(ExperimentError::ConfigInvalid)?);
        }
        elems.push(algebra.element([
            coords[0].clone(),
            coords[1].clone(),
            coords[2].clone(),
            coords[3].clone(),
        ]));
    }
    let basis: [crate::quaternion::QuatElement; 4] = elems.try_into().expect("length checked");
    let order = OrderBasis::new(algebra, basis, file.order.q)?;
    let mut cfg = CountConfig::default();
    if let Some(c) = &file.counting {
        if let Some(e) = c.entry_bound {
            cfg.entry_bound = e;
        }
        if let Some(p) = c.prefilter_constant {
            cfg.prefilter_constant = p;
        }
    }
    Ok((order, cfg))
}

/// The shipped discriminant-6 configuration: A = (3, -1/Q) with the maximal
/// order Z<1, w, W, (1 + w + W + wW)/2> and level q = 6.
pub const DISC6_ORDER_TOML: &str = r#"
[algebra]
a = 3
b = -1

[order]
basis = [
    ["1", "0", "0", "0"],
    ["0", "1", "0", "0"],
    ["0", "0", "1", "0"],
    ["1/2", "1/2", "1/2", "1/2"],
]
q = 6

[counting]
entry_bound = 4.5
prefilter_constant = 64.0
"#;

// ---------------------------------------------------------------------------
// experiment configs

#[derive(Debug, Clone, Deserialize)]
pub struct KernelProfileConfig {
    pub t_values: Vec<f64>,
    #[serde(default = "default_power")]
    pub power: u32,
    #[serde(default)]
    pub window: Option<WindowParams>,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_power() -> u32 {
    2
}
fn default_x_max() -> f64 {
    2.0
}
fn default_x_points() -> usize {
    60
}
fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Deserialize)]
pub struct CriticalPointsConfig {
    /// row-major frame matrix entries of g
    pub g: [f64; 4],
    pub rho: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_panels")]
    pub panels: usize,
}

fn default_delta() -> f64 {
    0.05
}
fn default_panels() -> usize {
    1024
}

#[derive(Debug, Clone, Deserialize)]
pub struct DecayFitConfig {
    pub name: String,
    pub geometry: GeometryConfig,
    /// lambda = rho * s when set; lambda = 0 otherwise
    #[serde(default)]
    pub rho: Option<f64>,
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_method")]
    pub method: String,
}

fn default_model() -> String {
    "pure".into()
}
fn default_method() -> String {
    "auto".into()
}

#[derive(Debug, Clone, Deserialize)]
pub struct GeometryConfig {
    /// "transverse" | "d2" | "aligned" | "frame"
    pub kind: String,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub n0: Option<f64>,
    #[serde(default)]
    pub frame: Option<[f64; 4]>,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<GroupElement, ExperimentError> {
        match self.kind.as_str() {
            "transverse" => Ok(transverse_geometry(
                self.rho
                    .ok_or_else(|| ExperimentError::ConfigInvalid("transverse needs rho".into()))?,
                self.eps.unwrap_or(0.05),
            )),
            "d2" => Ok(transverse_geometry(
                self.rho
                    .ok_or_else(|| ExperimentError::ConfigInvalid("d2 needs rho".into()))?,
                0.0,
            )),
            "aligned" => Ok(aligned_geometry(self.n0.ok_or_else(|| {
                ExperimentError::ConfigInvalid("aligned needs n0".into())
            })?)),
            "frame" => {
                let m = self
                    .frame
                    .ok_or_else(|| ExperimentError::ConfigInvalid("frame needs entries".into()))?;
                Ok(GroupElement::from_matrix([[m[0], m[1]], [m[2], m[3]]]))
            }
            other => Err(ExperimentError::ConfigInvalid(format!(
                "unknown geometry kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct HeckeCountConfig {
    pub n_min: u64,
    pub n_max: u64,
    pub kappas: Vec<f64>,
    /// frame of the segment (row-major); identity when omitted
    #[serde(default)]
    pub frame: Option<[f64; 4]>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default)]
    pub validate_prefilter: bool,
    /// stride through [n_min, n_max]; 1 scans every n
    #[serde(default = "default_stride")]
    pub stride: u64,
}

fn default_length() -> f64 {
    1.0
}
fn default_stride() -> u64 {
    1
}

// ---------------------------------------------------------------------------
// runners

/// Kernel profiles on a uniform x-grid for each t.
pub fn run_kernel_profile(cfg: &KernelProfileConfig) -> Result<Vec<KernelProfile>, ExperimentError> {
    if cfg.t_values.is_empty() || cfg.x_points < 2 {
        return Err(ExperimentError::ConfigInvalid(
            "kernel-profile needs t values and an x grid".into(),
        ));
    }
    let params = cfg.window.unwrap_or_else(WindowParams::compact_kernel);
    let xs: Vec<f64> = (0..cfg.x_points)
        .map(|i| cfg.x_max * i as f64 / (cfg.x_points - 1) as f64)
        .collect();
    cfg.t_values
        .iter()
        .map(|&t| {
            let w = two_sided_window(t, params)
                .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
            Ok(kernel_profile(&w, cfg.power, &xs, cfg.tol))
        })
        .collect()
}

/// One row per critical point of the configured phase.
#[derive(Debug, Clone)]
pub struct CriticalRow {
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
    pub h: f64,
    pub kappa: f64,
    pub det_analytic: f64,
    pub det_numeric: f64,
    pub class: String,
}

pub fn run_critical_points(cfg: &CriticalPointsConfig) -> Result<Vec<CriticalRow>, ExperimentError> {
    let g = GroupElement::from_matrix([[cfg.g[0], cfg.g[1]], [cfg.g[2], cfg.g[3]]]);
    let ctx = PhaseContext::new(g, cfg.rho, cfg.delta)
        .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
    let class = format!("{:?}", classify_degeneracy(&ctx, 1e-6).class);
    let rows = find_critical_points(&ctx, cfg.panels)
        .into_iter()
        .map(|cp| {
            let (_, det_a) = hessian_analytic(&cp, &ctx);
            let num = hessian_numeric(&cp, &ctx);
            let det_n = det3(&num);
            CriticalRow {
                theta: cp.theta,
                x1: cp.x1,
                x2: cp.x2,
                h: cp.h,
                kappa: cp.kappa,
                det_analytic: det_a,
                det_numeric: det_n,
                class: class.clone(),
            }
        })
        .collect();
    Ok(rows)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Decay experiment: the series, its fit, and the geometry's alignment.
#[derive(Debug, Clone)]
pub struct DecayArtifacts {
    pub series: DecaySeries,
    pub fit: FitResult,
    pub model: DecayModel,
    pub name: String,
}

pub fn run_decay_fit(cfg: &DecayFitConfig) -> Result<DecayArtifacts, ExperimentError> {
    if cfg.s_points < 6 {
        return Err(ExperimentError::ConfigInvalid(
            "decay fit needs at least 6 s-samples".into(),
        ));
    }
    let g = cfg.geometry.build()?;
    let model = match cfg.model.as_str() {
        "pure" => DecayModel::PurePower,
        "aligned" => DecayModel::PowerTimesAligned,
        other => {
            return Err(ExperimentError::ConfigInvalid(format!(
                "unknown model {other:?}"
            )))
        }
    };
    let method = match cfg.method.as_str() {
        "auto" => IntegralMethod::Auto,
        "2d" | "point-pair" => IntegralMethod::PointPair2D,
        "3d" | "plane-wave" => IntegralMethod::PlaneWave3D,
        other => {
            return Err(ExperimentError::ConfigInvalid(format!(
                "unknown method {other:?}"
            )))
        }
    };
    let b = BumpProfile::poly();
    let l1 = GeodesicSegment::standard();
    let l2 = l1.translate(&g);
    let n_align = crate::geometry::n_align(&l1, &l2);
    let ratio = (cfg.s_max / cfg.s_min).max(1.0 + 1e-12);
    let mut samples = Vec::with_capacity(cfg.s_points);
    for i in 0..cfg.s_points {
        let s = cfg.s_min * ratio.powf(i as f64 / (cfg.s_points - 1) as f64);
        let lambda = cfg.rho.map(|r| r * s).unwrap_or(0.0);
        let value = restriction_integral(s, lambda, &g, &b, &b, method)?;
        samples.push(DecaySample { s, value });
    }
    let series = DecaySeries { samples, n_align };
    let fit = fit_decay(&series, model)?;
    Ok(DecayArtifacts {
        series,
        fit,
        model,
        name: cfg.name.clone(),
    })
}

/// Scan rows for the counting experiment.
pub fn run_hecke_count(
    cfg: &HeckeCountConfig,
    order: &OrderBasis,
    count_cfg: &CountConfig,
) -> Result<Vec<CountRecord>, ExperimentError> {
    if cfg.kappas.is_empty() || cfg.n_min == 0 || cfg.n_max < cfg.n_min {
        return Err(ExperimentError::ConfigInvalid(
            "hecke-count needs a nonempty kappa list and 1 <= n_min <= n_max".into(),
        ));
    }
    let mut kappas = cfg.kappas.clone();
    kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if kappas[0] <= 0.0 || *kappas.last().unwrap() > 2.0 {
        return Err(ExperimentError::ConfigInvalid(
            "kappas must lie in (0, 2]".into(),
        ));
    }
    let frame = cfg
        .frame
        .map(|m| GroupElement::from_matrix([[m[0], m[1]], [m[2], m[3]]]))
        .unwrap_or_else(GroupElement::identity);
    let segment = GeodesicSegment::new(frame, cfg.length);
    let mut ccfg = *count_cfg;
    ccfg.validate_prefilter = cfg.validate_prefilter;
    ccfg.entry_bound = ccfg
        .entry_bound
        .max(crate::counting::entry_bound_for_segment(&segment));
    let scan = HeckeScan::new(order, segment, cfg.n_max, ccfg)?;
    let mut rows = Vec::new();
    let mut n = cfg.n_min;
    while n <= cfg.n_max {
        rows.extend(scan.count(n, &kappas));
        n += cfg.stride;
    }
    Ok(rows)
}

/// The exponent ledger as printable lines, exact rationals.
pub fn run_exponent_opt(preset: &str, theta: Option<(i64, i64)>) -> Result<String, ExperimentError> {
    let mut out = String::new();
    match preset {
        "period-a" | "period-b" | "main" => {
            let model = preset_model(preset)
                .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
            let res = optimize_exponents(&model)
                .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
            writeln!(out, "model {}", model.name).unwrap();
            for (i, m) in model.terms.iter().enumerate() {
                let mark = if res.active.contains(&i) { "*" } else { " " };
                writeln!(
                    out,
                    "  {mark} {:<18} exponent at optimum: {}",
                    m.label,
                    m.exponent_at(res.n_exp, res.beta_exp)
                )
                .unwrap();
            }
            writeln!(out, "  N = t^{}", res.n_exp).unwrap();
            if model.beta_range.is_some() {
                writeln!(out, "  beta = t^{}", res.beta_exp).unwrap();
            }
            writeln!(out, "  squared bound: t^{}", res.value).unwrap();
            writeln!(out, "  bound exponent: {}", res.bound_exponent).unwrap();
        }
        "onspec" => {
            let ((v0, vs), (n0, ns)) = onspec_exponent_pair()
                .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
            writeln!(out, "model onspec (beta symbolic)").unwrap();
            writeln!(out, "  N = t^{n0} beta^{ns}").unwrap();
            writeln!(out, "  bound exponent pair: t^{v0} beta^{vs}").unwrap();
        }
        "offspec" => {
            let (t, b) = offspec_exponent_pair();
            writeln!(out, "model offspec (local bound)").unwrap();
            writeln!(out, "  bound exponent pair: t^{t} beta^{b}").unwrap();
        }
        "conditional" => {
            let (num, den) = theta.unwrap_or((7, 64));
            let c = conditional_exponents(num_rational::Rational64::new(num, den))
                .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
            writeln!(out, "conditional exponents at theta = {}", c.theta).unwrap();
            writeln!(out, "  L2 exponent: {}", c.l2_exponent).unwrap();
            writeln!(out, "  beta = t^{}", c.beta_exponent).unwrap();
            writeln!(
                out,
                "  period pair: t^{} (1+beta)^{}",
                c.period_t_exponent, c.period_beta_exponent
            )
            .unwrap();
        }
        other => {
            return Err(ExperimentError::ConfigInvalid(format!(
                "unknown preset {other:?} (expected period-a, period-b, onspec, offspec, main, conditional)"
            )))
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// deterministic output

fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.12e}")
    }
}

/// RFC-4180 quoting: fields containing comma, quote or newline are quoted.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes rows with a header and the trailing manifest reference line.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), ExperimentError> {
    let mut text = String::new();
    writeln!(text, "{}", header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",")).unwrap();
    for row in rows {
        writeln!(text, "{}", row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")).unwrap();
    }
    writeln!(text, "# manifest: run_manifest.json").unwrap();
    std::fs::write(path, text)?;
    Ok(())
}

pub fn kernel_profile_rows(profiles: &[KernelProfile]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["t", "x", "k_t", "p_t_normalized"];
    let mut rows = Vec::new();
    for p in profiles {
        for i in 0..p.xs.len() {
            rows.push(vec![
                fmt_f64(p.t),
                fmt_f64(p.xs[i]),
                fmt_f64(p.kt[i]),
                fmt_f64(p.normalized[i]),
            ]);
        }
    }
    (header, rows)
}

pub fn critical_rows(rows: &[CriticalRow]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["theta", "x1", "x2", "h", "kappa", "detD_analytic", "detD_numeric", "class"];
    let data = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.theta),
                fmt_f64(r.x1),
                fmt_f64(r.x2),
                fmt_f64(r.h),
                fmt_f64(r.kappa),
                fmt_f64(r.det_analytic),
                fmt_f64(r.det_numeric),
                r.class.clone(),
            ]
        })
        .collect();
    (header, data)
}

pub fn decay_rows(art: &DecayArtifacts) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["s", "reI", "imI", "absI"];
    let rows = art
        .series
        .samples
        .iter()
        .map(|smp| {
            vec![
                fmt_f64(smp.s),
                fmt_f64(smp.value.re),
                fmt_f64(smp.value.im),
                fmt_f64(smp.value.norm()),
            ]
        })
        .collect();
    (header, rows)
}

pub fn count_rows(records: &[CountRecord]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["n", "kappa", "M", "bound", "ratio"];
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.kappa),
                r.count.to_string(),
                fmt_f64(r.bound),
                fmt_f64(r.ratio),
            ]
        })
        .collect();
    (header, rows)
}

/// Fit summary JSON for a decay experiment.
pub fn decay_fit_json(art: &DecayArtifacts) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "name": art.name,
        "model": match art.model {
            DecayModel::PurePower => "pure-power",
            DecayModel::PowerTimesAligned => "power-times-(1+sn)^{-1/2}",
        },
        "n_align": art.series.n_align,
        "samples": art.series.samples.len(),
        "slope": art.fit.slope,
        "stderr": art.fit.stderr,
        "intercept": art.fit.intercept,
        "residual_rms": art.fit.residual_rms,
        "threshold_epsilon": 0.1,
    }))
    .expect("json")
}

/// Minimal log-log SVG scatter with the fitted line.
pub fn decay_svg(art: &DecayArtifacts) -> String {
    let (w, h) = (640.0, 440.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 30.0, 50.0);
    let pts: Vec<(f64, f64)> = art
        .series
        .samples
        .iter()
        .map(|smp| {
            let mut mag = smp.value.norm();
            if art.model == DecayModel::PowerTimesAligned {
                mag *= (1.0 + smp.s * art.series.n_align).sqrt();
            }
            (smp.s.ln() / std::f64::consts::LN_10, mag.ln() / std::f64::consts::LN_10)
        })
        .collect();
    let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let (y0, y1) = (y0 - 0.2, y1 + 0.2);
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut svg = String::new();
    write!(svg, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">").unwrap();
    write!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>").unwrap();
    write!(
        svg,
        "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{} : slope {:.4} +/- {:.4}</text>",
        ml,
        csv_field(&art.name),
        art.fit.slope,
        art.fit.stderr
    )
    .unwrap();
    // axes
    write!(
        svg,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - ml - mr,
        h - mt - mb
    )
    .unwrap();
    // ticks
    let mut tick = x0.ceil();
    while tick <= x1 {
        write!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/><text x=\"{0}\" y=\"{3}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"monospace\">1e{4}</text>",
            sx(tick), h - mb, h - mb + 6.0, h - mb + 20.0, tick as i64
        ).unwrap();
        tick += 1.0;
    }
    let mut tick = y0.ceil();
    while tick <= y1 {
        write!(
            svg,
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/><text x=\"{3}\" y=\"{0}\" font-size=\"11\" text-anchor=\"end\" font-family=\"monospace\">1e{4}</text>",
            sy(tick), ml - 6.0, ml, ml - 9.0, tick as i64
        ).unwrap();
        tick += 1.0;
    }
    // fitted line in natural log coordinates: log10|I| = (slope*ln s + c)/ln10
    let line = |x: f64| {
        (art.fit.slope * (x * std::f64::consts::LN_10) + art.fit.intercept)
            / std::f64::consts::LN_10
    };
    write!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>",
        sx(x0),
        sy(line(x0)),
        sx(x1),
        sy(line(x1))
    )
    .unwrap();
    for p in &pts {
        write!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"#1f77b4\"/>",
            sx(p.0),
            sy(p.1)
        )
        .unwrap();
    }
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"monospace\">s</text>",
        (ml + w - mr) / 2.0,
        h - 12.0
    )
    .unwrap();
    svg.push_str("</svg>");
    svg
}

// ---------------------------------------------------------------------------
// run manifest

/// FNV-1a 64 of the config bytes and seed; stable across platforms.
pub fn config_hash(config_text: &str, seed: u64) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in config_text.bytes().chain(seed.to_le_bytes()) {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn write_manifest(
    dir: &Path,
    command: &str,
    config_text: &str,
    seed: u64,
    wall_ms: u128,
) -> Result<PathBuf, ExperimentError> {
    let manifest = serde_json::json!({
        "command": command,
        "config_hash": config_hash(config_text, seed),
        "crate_version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "wall_time_ms": wall_ms,
    });
    let path = dir.join("run_manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("json"))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_order_config_loads_and_validates() {
        let (order, cfg) = load_order(DISC6_ORDER_TOML).unwrap();
        assert_eq!(order.q(), 6);
        assert_eq!(order.algebra().a(), 3);
        assert_eq!(cfg.entry_bound, 4.5);
    }

    #[test]
    fn broken_configs_are_rejected() {
        assert!(load_order("not toml at all [").is_err());
        let bad = DISC6_ORDER_TOML.replace("\"1/2\", \"1/2\", \"1/2\", \"1/2\"", "\"1/3\", \"0\", \"0\", \"0\"");
        assert!(load_order(&bad).is_err(), "non-closed lattice accepted");
        let split = DISC6_ORDER_TOML.replace("a = 3", "a = 1").replace("b = -1", "b = 1");
        assert!(load_order(&split).is_err(), "split algebra accepted");
    }

    #[test]
    fn exponent_opt_presets_print_expected_values() {
        let main = run_exponent_opt("main", None).unwrap();
        assert!(main.contains("bound exponent: 3/14"), "{main}");
        assert!(main.contains("beta = t^1/7"));
        let pa = run_exponent_opt("period-a", None).unwrap();
        assert!(pa.contains("bound exponent: -1/12"));
        let pb = run_exponent_opt("period-b", None).unwrap();
        assert!(pb.contains("bound exponent: -1/18"));
        let on = run_exponent_opt("onspec", None).unwrap();
        assert!(on.contains("t^5/24 beta^1/24"), "{on}");
        let off = run_exponent_opt("offspec", None).unwrap();
        assert!(off.contains("t^1/4 beta^-1/4"));
        let cond = run_exponent_opt("conditional", Some((7, 64))).unwrap();
        assert!(cond.contains("L2 exponent: 8/57"), "{cond}");
        assert!(run_exponent_opt("nope", None).is_err());
    }

    #[test]
    fn csv_quoting_and_manifest_reference() {
        let dir = std::env::temp_dir().join("gal-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            &[vec!["x,y".into(), "plain".into()], vec!["q\"q".into(), "2".into()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("a,b\n\"x,y\",plain\n\"q\"\"q\",2\n"));
        assert!(text.ends_with("# manifest: run_manifest.json\n"));
    }

    #[test]
    fn decay_artifacts_round_trip() {
        let cfg = DecayFitConfig {
            name: "smoke".into(),
            geometry: GeometryConfig {
                kind: "transverse".into(),
                rho: Some(0.5),
                eps: Some(0.05),
                n0: None,
                frame: None,
            },
            rho: Some(0.5),
            s_min: 40.0,
            s_max: 500.0,
            s_points: 6,
            model: "pure".into(),
            method: "auto".into(),
        };
        let art = run_decay_fit(&cfg).unwrap();
        assert_eq!(art.series.samples.len(), 6);
        assert!(art.fit.slope < -1.0, "transverse decay, slope {}", art.fit.slope);
        let json = decay_fit_json(&art);
        assert!(json.contains("\"slope\""));
        let svg = decay_svg(&art);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>"));
        // determinism of the rendered rows
        let art2 = run_decay_fit(&cfg).unwrap();
        assert_eq!(decay_rows(&art).1, decay_rows(&art2).1);
    }

    #[test]
    fn critical_point_runner_reports_classes() {
        let rho = 0.5f64;
        let g = crate::oscillatory::transverse_geometry(rho, 0.05);
        let m = g.matrix();
        let cfg = CriticalPointsConfig {
            g: [m[0][0], m[0][1], m[1][0], m[1][1]],
            rho,
            delta: 0.05,
            panels: 1024,
        };
        let rows = run_critical_points(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!((r.det_analytic - r.det_numeric).abs() < 1e-6 * (1.0 + r.det_analytic.abs()));
            assert_eq!(r.class, "Nondegenerate");
        }
    }

    #[test]
    fn hecke_count_runner_validates_input() {
        let (order, ccfg) = load_order(DISC6_ORDER_TOML).unwrap();
        let bad = HeckeCountConfig {
            n_min: 1,
            n_max: 10,
            kappas: vec![],
            frame: None,
            length: 1.0,
            validate_prefilter: false,
            stride: 1,
        };
        assert!(matches!(
            run_hecke_count(&bad, &order, &ccfg),
            Err(ExperimentError::ConfigInvalid(_))
        ));
        let good = HeckeCountConfig {
            n_min: 1,
            n_max: 30,
            kappas: vec![0.05, 1.0],
            frame: None,
            length: 1.0,
            validate_prefilter: true,
            stride: 1,
        };
        let rows = run_hecke_count(&good, &order, &ccfg).unwrap();
        assert_eq!(rows.len(), 60);
        assert!(rows.iter().all(|r| r.prefilter_violations == 0));
        assert!(rows[1].count >= 1, "identity present at n = 1");
    }

    #[test]
    fn config_hash_is_stable() {
        assert_eq!(config_hash("abc", 1), config_hash("abc", 1));
        assert_ne!(config_hash("abc", 1), config_hash("abc", 2));
        assert_ne!(config_hash("abc", 1), config_hash("abd", 1));
    }
}
