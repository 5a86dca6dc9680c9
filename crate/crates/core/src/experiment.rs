//! Config-driven experiment runner: parses norm and distribution literals,
//! sweeps sizes, writes one CSV row per sweep point plus a JSON summary,
//! and judges "approximately equal" claims against the versioned ratio
//! windows shipped in `data/windows.json`. Windows are data, not code:
//! they start generous and get tightened as runs are verified.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dist::{family_label, Distribution};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_lhs, estimate_lhs_grid_offset, max_sum_moment_check, rhs_eval, selector_experiment,
    tail_bound_check, McConfig,
};
use crate::norms::{RiNormSpec, SeqNormSpec};
use crate::orlicz::{gaussian_top_m_closed_form, luxemburg_seq, OrliczFunction};

/// Registered experiment names, in listing order.
pub const EXPERIMENTS: [&str; 8] = [
    "main_equivalence",
    "rosenthal",
    "gauss_km",
    "orlicz_lambda",
    "selector",
    "hj_moments",
    "tail_bound",
    "remark_iid",
];

#[derive(Debug, Clone, Deserialize)]
pub struct LambdaEquivConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// The versioned ratio windows and recorded constants.
#[derive(Debug, Clone, Deserialize)]
pub struct Windows {
    pub version: u32,
    pub default_window: [f64; 2],
    pub windows: BTreeMap<String, [f64; 2]>,
    pub gaussian_lambda_equiv: LambdaEquivConstants,
    pub max_cv_over_sweep: f64,
}

static WINDOWS: OnceLock<Windows> = OnceLock::new();

pub fn windows() -> &'static Windows {
    WINDOWS.get_or_init(|| {
        serde_json::from_str(include_str!("../data/windows.json"))
            .expect("bundled windows.json must parse")
    })
}

pub fn ratio_window(name: &str) -> [f64; 2] {
    let w = windows();
    w.windows.get(name).copied().unwrap_or(w.default_window)
}

fn in_window(ratio: f64, w: [f64; 2]) -> bool {
    ratio.is_finite() && ratio >= w[0] && ratio <= w[1]
}

/// RI norm literal, e.g. {"ri":"lp","p":1} or {"ri":"orlicz","phi":"power","p":3}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiLit {
    pub ri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
}

impl RiLit {
    pub fn lp(p: f64) -> Self {
        RiLit { ri: "lp".into(), p: Some(p), q: None, m: None, phi: None }
    }

    pub fn lorentz(p: f64, q: f64) -> Self {
        RiLit { ri: "lorentz".into(), p: Some(p), q: Some(q), m: None, phi: None }
    }

    pub fn orlicz(phi: &str) -> Self {
        RiLit { ri: "orlicz".into(), p: None, q: None, m: None, phi: Some(phi.into()) }
    }

    pub fn to_spec(&self) -> Result<RiNormSpec> {
        match self.ri.as_str() {
            "lp" => {
                let p = self.p.ok_or_else(|| Error::Config("lp needs p".into()))?;
                if p < 1.0 {
                    return Err(Error::Config(format!("lp needs p >= 1, got {p}")));
                }
                Ok(RiNormSpec::lp(p))
            }
            "lorentz" => {
                let p = self.p.ok_or_else(|| Error::Config("lorentz needs p".into()))?;
                let q = self.q.ok_or_else(|| Error::Config("lorentz needs q".into()))?;
                if p < 1.0 || q < 1.0 {
                    return Err(Error::Config(format!(
                        "lorentz needs p, q >= 1, got ({p}, {q})"
                    )));
                }
                Ok(RiNormSpec::lorentz(p, q))
            }
            "orlicz" => {
                let name = self
                    .phi
                    .as_deref()
                    .ok_or_else(|| Error::Config("orlicz needs phi".into()))?;
                Ok(RiNormSpec::orlicz(resolve_orlicz(name, self.p, self.m)?))
            }
            other => Err(Error::Config(format!("unknown ri norm: {other}"))),
        }
    }
}

/// Sequence norm literal, e.g. {"seq":"top_m","m":4} or {"seq":"orlicz","psi":"exp_gauss"}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqLit {
    pub seq: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
}

impl SeqLit {
    pub fn lp(p: f64) -> Self {
        SeqLit { seq: "lp".into(), p: Some(p), m: None, psi: None }
    }

    pub fn linf() -> Self {
        SeqLit { seq: "linf".into(), p: None, m: None, psi: None }
    }

    pub fn top_m(m: usize) -> Self {
        SeqLit { seq: "top_m".into(), p: None, m: Some(m), psi: None }
    }

    pub fn orlicz(psi: &str) -> Self {
        SeqLit { seq: "orlicz".into(), p: None, m: None, psi: Some(psi.into()) }
    }

    pub fn to_spec(&self) -> Result<SeqNormSpec> {
        match self.seq.as_str() {
            "lp" => {
                let p = self.p.ok_or_else(|| Error::Config("lp needs p".into()))?;
                if p < 1.0 {
                    return Err(Error::Config(format!("lp needs p >= 1, got {p}")));
                }
                Ok(SeqNormSpec::lp(p))
            }
            "linf" => Ok(SeqNormSpec::linf()),
            "top_m" => {
                let m = self.m.ok_or_else(|| Error::Config("top_m needs m".into()))?;
                if m < 1 {
                    return Err(Error::Config("top_m needs m >= 1".into()));
                }
                Ok(SeqNormSpec::top_m(m))
            }
            "orlicz" => {
                let name = self
                    .psi
                    .as_deref()
                    .ok_or_else(|| Error::Config("orlicz needs psi".into()))?;
                Ok(SeqNormSpec::orlicz(resolve_orlicz(name, self.p, self.m)?))
            }
            other => Err(Error::Config(format!("unknown sequence norm: {other}"))),
        }
    }
}

/// Named Orlicz functions addressable from config: "power:p",
/// "theta_top_m:m", "exp_gauss", "xexp", "spliced:phi,psi". Parameters may
/// also arrive as separate fields ("phi":"power","p":3).
pub fn resolve_orlicz(name: &str, p: Option<f64>, m: Option<usize>) -> Result<OrliczFunction> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let f = match head {
        "power" => {
            let p = match arg {
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad power exponent: {a}")))?,
                None => p.ok_or_else(|| Error::Config("power needs p".into()))?,
            };
            if p <= 0.0 {
                return Err(Error::Config(format!("power needs p > 0, got {p}")));
            }
            OrliczFunction::power(p)
        }
        "theta_top_m" => {
            let m = match arg {
                Some(a) => a
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad theta_top_m index: {a}")))?,
                None => m.ok_or_else(|| Error::Config("theta_top_m needs m".into()))?,
            };
            if m < 1 {
                return Err(Error::Config("theta_top_m needs m >= 1".into()));
            }
            OrliczFunction::top_m_hinge(m)
        }
        "exp_gauss" => OrliczFunction::exp_gauss(),
        "xexp" => OrliczFunction::xexp(),
        "spliced" => {
            let a = arg.ok_or_else(|| Error::Config("spliced needs phi,psi".into()))?;
            let (phi_name, psi_name) = a
                .split_once(',')
                .ok_or_else(|| Error::Config("spliced needs phi,psi".into()))?;
            let phi = resolve_orlicz(phi_name.trim(), None, None)?;
            let psi = resolve_orlicz(psi_name.trim(), None, None)?;
            OrliczFunction::splice(&phi, &psi)?
        }
        other => return Err(Error::Config(format!("unknown orlicz function: {other}"))),
    };
    f.validate_shape()?;
    Ok(f)
}

/// Optional sweeps over family size, top-m index, and moment exponent.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    /// With a top_m sequence norm, use m = ceil(frac * n) at each sweep
    /// point instead of a fixed m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_frac_of_n: Option<f64>,
}

/// One experiment run, as read from a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub dists: Vec<Distribution>,
    #[serde(rename = "M")]
    pub ri: RiLit,
    #[serde(rename = "N")]
    pub seq: SeqLit,
    pub mc: McConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Rejects everything that should exit with a config error (2)
    /// before any numeric work starts.
    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::UnknownExperiment(self.experiment.clone()));
        }
        if self.dists.is_empty() {
            return Err(Error::Config("dists must be nonempty".into()));
        }
        for d in &self.dists {
            d.validate()?;
        }
        self.ri.to_spec()?;
        self.seq.to_spec()?;
        self.mc.validate()?;
        if let Some(sweep) = &self.sweep {
            for (label, empty) in [
                ("n", sweep.n.as_ref().is_some_and(|v| v.is_empty())),
                ("m", sweep.m.as_ref().is_some_and(|v| v.is_empty())),
                ("p", sweep.p.as_ref().is_some_and(|v| v.is_empty())),
            ] {
                if empty {
                    return Err(Error::Config(format!("sweep list '{label}' is empty")));
                }
            }
            if let Some(f) = sweep.m_frac_of_n {
                if !(f > 0.0 && f <= 1.0) {
                    return Err(Error::Config(format!(
                        "m_frac_of_n must be in (0,1], got {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One CSV cell; numbers print with 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => {
                if s.contains(',') || s.contains('"') || s.contains('\n') {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => match serde_json::Number::from_f64(*v) {
                Some(n) => Value::Number(n),
                None => Value::String(format!("{v}")),
            },
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn json_rows(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.header.iter().zip(row) {
                    obj.insert((*name).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// In-memory result of one experiment run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: String,
    pub table: Table,
    pub pass: bool,
    pub failing_rows: Vec<String>,
    pub summary: Value,
}

/// Files written by `run_to_dir`.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub pass: bool,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub csv: String,
    pub failing_rows: Vec<String>,
}

/// Run an experiment and write `results.csv` + `summary.json` to `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<RunArtifacts> {
    let out = run_experiment(cfg)?;
    fs::create_dir_all(dir)?;
    let csv = out.table.to_csv();
    let csv_path = dir.join("results.csv");
    fs::write(&csv_path, &csv)?;
    let summary_path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&out.summary)?;
    text.push('\n');
    fs::write(&summary_path, text)?;
    Ok(RunArtifacts {
        pass: out.pass,
        csv_path,
        summary_path,
        csv,
        failing_rows: out.failing_rows,
    })
}

/// Run an experiment in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.experiment.as_str() {
        "main_equivalence" | "rosenthal" => run_equivalence(cfg),
        "gauss_km" => run_gauss_km(cfg),
        "orlicz_lambda" => run_orlicz_lambda(cfg),
        "selector" => run_selector(cfg),
        "hj_moments" => run_hj_moments(cfg),
        "tail_bound" => run_tail_bound(cfg),
        "remark_iid" => run_remark_iid(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn expand_family(dists: &[Distribution], n: usize) -> Result<Vec<Distribution>> {
    if n == 0 {
        return Err(Error::Config("family size must be >= 1".into()));
    }
    if dists.len() == 1 {
        Ok(vec![dists[0].clone(); n])
    } else if dists.len() >= n {
        Ok(dists[..n].to_vec())
    } else {
        Err(Error::Config(format!(
            "sweep point n = {n} needs at least n literals (or exactly one to replicate), got {}",
            dists.len()
        )))
    }
}

fn sweep_sizes(cfg: &ExperimentConfig) -> Vec<usize> {
    cfg.sweep
        .as_ref()
        .and_then(|s| s.n.clone())
        .unwrap_or_else(|| vec![cfg.dists.len()])
}

fn seq_spec_for_n(cfg: &ExperimentConfig, n: usize) -> Result<SeqNormSpec> {
    if let Some(frac) = cfg.sweep.as_ref().and_then(|s| s.m_frac_of_n) {
        if cfg.seq.seq == "top_m" {
            let m = ((frac * n as f64).ceil() as usize).max(1);
            return Ok(SeqNormSpec::top_m(m));
        }
    }
    cfg.seq.to_spec()
}

fn coefficient_of_variation(ratios: &[f64]) -> f64 {
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    let var = ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

fn base_summary(cfg: &ExperimentConfig, table: &Table, pass: bool, window: [f64; 2]) -> Value {
    json!({
        "experiment": cfg.experiment,
        "seed": cfg.mc.seed,
        "samples_per_batch": cfg.mc.samples_per_batch,
        "batches": cfg.mc.batches,
        "window": window,
        "config": serde_json::to_value(cfg).unwrap_or(Value::Null),
        "rows": table.json_rows(),
        "pass": pass,
    })
}

// --- main_equivalence / rosenthal ------------------------------------

fn run_equivalence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let window = ratio_window(&cfg.experiment);
    let ri = cfg.ri.to_spec()?;
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "M", "N", "samples_per_batch", "batches", "seed",
        "lhs", "lhs_stderr", "rhs", "ratio", "window_lo", "window_hi", "pass",
    ]);
    let mut failing = Vec::new();
    let mut ratios = Vec::new();
    let mut all = true;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        let seq = seq_spec_for_n(cfg, n)?;
        let est = estimate_lhs(&fam, &seq, &ri, &cfg.mc)?;
        let rhs = rhs_eval(&fam, &seq, &ri)?;
        let ratio = est.value / rhs;
        let ok = in_window(ratio, window);
        if !ok {
            failing.push(format!(
                "n={n}: ratio {ratio} outside [{}, {}]",
                window[0], window[1]
            ));
        }
        all &= ok;
        ratios.push(ratio);
        table.push(vec![
            Cell::Text(cfg.experiment.clone()),
            Cell::Text(family_label(&fam)),
            Cell::Int(n as i64),
            Cell::Text(ri.to_string()),
            Cell::Text(seq.to_string()),
            Cell::Int(cfg.mc.samples_per_batch as i64),
            Cell::Int(cfg.mc.batches as i64),
            Cell::Int(cfg.mc.seed as i64),
            Cell::Num(est.value),
            Cell::Num(est.stderr),
            Cell::Num(rhs),
            Cell::Num(ratio),
            Cell::Num(window[0]),
            Cell::Num(window[1]),
            Cell::Flag(ok),
        ]);
    }
    let mut cv = None;
    if ratios.len() >= 2 {
        let c = coefficient_of_variation(&ratios);
        if c >= windows().max_cv_over_sweep {
            all = false;
            failing.push(format!("ratio CV over n-sweep is {c}"));
        }
        cv = Some(c);
    }
    let mut summary = base_summary(cfg, &table, all, window);
    if let Some(c) = cv {
        summary["ratio_cv"] = json!(c);
    }
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- gauss_km ----------------------------------------------------------

fn gaussian_coefficient(d: &Distribution) -> Result<f64> {
    match d {
        Distribution::Gaussian { sigma } => Ok(*sigma),
        Distribution::Scaled { a, base } => Ok(a * gaussian_coefficient(base)?),
        other => Err(Error::Config(format!(
            "gauss_km needs Gaussian members, got {}",
            other.label()
        ))),
    }
}

fn run_gauss_km(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let w_ml = ratio_window("gauss_km_mc_vs_lambda");
    let w_mc = ratio_window("gauss_km_mc_vs_closed");
    let w_lc = ratio_window("gauss_km_lambda_vs_closed");
    let ns = sweep_sizes(cfg);
    let default_m = cfg.seq.m.unwrap_or(1);
    let ms = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.m.clone())
        .unwrap_or_else(|| vec![default_m]);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "m", "samples_per_batch", "batches", "seed",
        "mc", "mc_stderr", "lambda_norm", "closed_form",
        "ratio_mc_lambda", "ratio_mc_closed", "ratio_lambda_closed", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    let mut any_row = false;
    let standard = Distribution::gaussian(1.0);
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        let coeffs: Vec<f64> = fam
            .iter()
            .map(gaussian_coefficient)
            .collect::<Result<_>>()?;
        for &m in &ms {
            if m < 1 || m > n {
                continue;
            }
            any_row = true;
            let est = estimate_lhs(&fam, &SeqNormSpec::top_m(m), &RiNormSpec::lp(1.0), &cfg.mc)?;
            let lambda = OrliczFunction::top_m_hinge(m).expectation_transform(&standard);
            let lambda_norm = luxemburg_seq(&lambda, &coeffs);
            let closed = gaussian_top_m_closed_form(&coeffs, m)?;
            let r_ml = est.value / lambda_norm;
            let r_mc = est.value / closed;
            let r_lc = lambda_norm / closed;
            let ok = in_window(r_ml, w_ml) && in_window(r_mc, w_mc) && in_window(r_lc, w_lc);
            if !ok {
                failing.push(format!(
                    "n={n}, m={m}: ratios ({r_ml}, {r_mc}, {r_lc}) outside windows"
                ));
            }
            all &= ok;
            table.push(vec![
                Cell::Text(cfg.experiment.clone()),
                Cell::Text(family_label(&fam)),
                Cell::Int(n as i64),
                Cell::Int(m as i64),
                Cell::Int(cfg.mc.samples_per_batch as i64),
                Cell::Int(cfg.mc.batches as i64),
                Cell::Int(cfg.mc.seed as i64),
                Cell::Num(est.value),
                Cell::Num(est.stderr),
                Cell::Num(lambda_norm),
                Cell::Num(closed),
                Cell::Num(r_ml),
                Cell::Num(r_mc),
                Cell::Num(r_lc),
                Cell::Flag(ok),
            ]);
        }
    }
    if !any_row {
        return Err(Error::Config("gauss_km: no sweep point satisfies m <= n".into()));
    }
    let summary = base_summary(cfg, &table, all, w_mc);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- orlicz_lambda ------------------------------------------------------

fn split_scaled_family(dists: &[Distribution]) -> Result<(Vec<f64>, Distribution)> {
    let mut coeffs = Vec::with_capacity(dists.len());
    let mut base: Option<Distribution> = None;
    for d in dists {
        let (a, b) = match d {
            Distribution::Scaled { a, base } => (*a, (**base).clone()),
            other => (1.0, other.clone()),
        };
        match &base {
            None => base = Some(b),
            Some(prev) => {
                if *prev != b {
                    return Err(Error::Config(
                        "family must be scales of one identically distributed base".into(),
                    ));
                }
            }
        }
        coeffs.push(a);
    }
    Ok((coeffs, base.expect("nonempty family")))
}

fn run_orlicz_lambda(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let window = ratio_window("orlicz_lambda");
    let ri = cfg.ri.to_spec()?;
    let seq = cfg.seq.to_spec()?;
    let phi = match &ri.variant {
        crate::norms::RiVariant::Orlicz { phi } => phi.clone(),
        crate::norms::RiVariant::Lp { p } => OrliczFunction::power(*p),
        _ => {
            return Err(Error::Config(
                "orlicz_lambda needs an Orlicz (or Lp) function norm for M".into(),
            ))
        }
    };
    let psi = match &seq {
        SeqNormSpec::OrliczSeq { psi } => psi.clone(),
        SeqNormSpec::Lp { p } => OrliczFunction::power(*p),
        _ => {
            return Err(Error::Config(
                "orlicz_lambda needs an Orlicz (or lp) sequence norm for N".into(),
            ))
        }
    };
    let theta = OrliczFunction::splice(&phi, &psi)?;
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "M", "N", "samples_per_batch", "batches", "seed",
        "mc", "mc_stderr", "lambda_norm", "theta_norm", "ratio", "window_lo", "window_hi", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        let (coeffs, xi) = split_scaled_family(&fam)?;
        let lambda = theta.expectation_transform(&xi);
        let est = estimate_lhs(&fam, &seq, &ri, &cfg.mc)?;
        let lambda_norm = luxemburg_seq(&lambda, &coeffs);
        let theta_norm = luxemburg_seq(&theta, &coeffs);
        let ratio = est.value / lambda_norm;
        let ok = in_window(ratio, window);
        if !ok {
            failing.push(format!("n={n}: ratio {ratio} outside window"));
        }
        all &= ok;
        table.push(vec![
            Cell::Text(cfg.experiment.clone()),
            Cell::Text(family_label(&fam)),
            Cell::Int(n as i64),
            Cell::Text(ri.to_string()),
            Cell::Text(seq.to_string()),
            Cell::Int(cfg.mc.samples_per_batch as i64),
            Cell::Int(cfg.mc.batches as i64),
            Cell::Int(cfg.mc.seed as i64),
            Cell::Num(est.value),
            Cell::Num(est.stderr),
            Cell::Num(lambda_norm),
            Cell::Num(theta_norm),
            Cell::Num(ratio),
            Cell::Num(window[0]),
            Cell::Num(window[1]),
            Cell::Flag(ok),
        ]);
    }
    let summary = base_summary(cfg, &table, all, window);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- selector -----------------------------------------------------------

fn run_selector(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let window = ratio_window("selector");
    let default_m = cfg.seq.m.unwrap_or(1);
    let ms = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.m.clone())
        .unwrap_or_else(|| vec![default_m]);
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "m", "samples_per_batch", "batches", "seed",
        "lhs", "lhs_stderr", "rhs", "ratio", "window_lo", "window_hi", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        for &m in &ms {
            let rep = selector_experiment(&fam, m, &cfg.mc)?;
            let ok = in_window(rep.ratio, window);
            if !ok {
                failing.push(format!("n={n}, m={m}: ratio {} outside window", rep.ratio));
            }
            all &= ok;
            table.push(vec![
                Cell::Text(cfg.experiment.clone()),
                Cell::Text(family_label(&fam)),
                Cell::Int(n as i64),
                Cell::Int(m as i64),
                Cell::Int(cfg.mc.samples_per_batch as i64),
                Cell::Int(cfg.mc.batches as i64),
                Cell::Int(cfg.mc.seed as i64),
                Cell::Num(rep.lhs.value),
                Cell::Num(rep.lhs.stderr),
                Cell::Num(rep.rhs),
                Cell::Num(rep.ratio),
                Cell::Num(window[0]),
                Cell::Num(window[1]),
                Cell::Flag(ok),
            ]);
        }
    }
    let summary = base_summary(cfg, &table, all, window);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- hj_moments -----------------------------------------------------------

fn run_hj_moments(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let window = ratio_window("hj_moments");
    let seq = cfg.seq.to_spec()?;
    let ps = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.p.clone())
        .unwrap_or_else(|| vec![1.0]);
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "N", "p", "samples_per_batch", "batches", "seed",
        "moment", "moment_stderr", "tail_quantile", "v_norm", "ratio",
        "window_lo", "window_hi", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        for &p in &ps {
            let rep = max_sum_moment_check(&fam, &seq, p, &cfg.mc)?;
            let ok = in_window(rep.ratio, window);
            if !ok {
                failing.push(format!("n={n}, p={p}: ratio {} outside window", rep.ratio));
            }
            all &= ok;
            table.push(vec![
                Cell::Text(cfg.experiment.clone()),
                Cell::Text(family_label(&fam)),
                Cell::Int(n as i64),
                Cell::Text(seq.to_string()),
                Cell::Num(p),
                Cell::Int(cfg.mc.samples_per_batch as i64),
                Cell::Int(cfg.mc.batches as i64),
                Cell::Int(cfg.mc.seed as i64),
                Cell::Num(rep.moment),
                Cell::Num(rep.moment_stderr),
                Cell::Num(rep.tail_quantile),
                Cell::Num(rep.v_norm),
                Cell::Num(rep.ratio),
                Cell::Num(window[0]),
                Cell::Num(window[1]),
                Cell::Flag(ok),
            ]);
        }
    }
    let summary = base_summary(cfg, &table, all, window);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- tail_bound -----------------------------------------------------------

fn run_tail_bound(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ri = cfg.ri.to_spec()?;
    let seq = cfg.seq.to_spec()?;
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "M", "N", "samples_per_batch", "batches", "seed",
        "threshold", "exceedance", "stderr", "bound", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        let rep = tail_bound_check(&fam, &seq, &ri, &cfg.mc)?;
        if !rep.pass {
            failing.push(format!(
                "n={n}: exceedance {} above {} + 3 sigma",
                rep.exceedance, rep.bound
            ));
        }
        all &= rep.pass;
        table.push(vec![
            Cell::Text(cfg.experiment.clone()),
            Cell::Text(family_label(&fam)),
            Cell::Int(n as i64),
            Cell::Text(ri.to_string()),
            Cell::Text(seq.to_string()),
            Cell::Int(cfg.mc.samples_per_batch as i64),
            Cell::Int(cfg.mc.batches as i64),
            Cell::Int(cfg.mc.seed as i64),
            Cell::Num(rep.threshold),
            Cell::Num(rep.exceedance),
            Cell::Num(rep.stderr),
            Cell::Num(rep.bound),
            Cell::Flag(rep.pass),
        ]);
    }
    let window = [0.0, 0.25 / std::f64::consts::E];
    let summary = base_summary(cfg, &table, all, window);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

// --- remark_iid -------------------------------------------------------------

fn run_remark_iid(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let window = ratio_window("remark_iid");
    let default_m = cfg.seq.m.unwrap_or(1);
    let ms = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.m.clone())
        .unwrap_or_else(|| vec![default_m]);
    let ns = sweep_sizes(cfg);
    let mut table = Table::new(vec![
        "experiment", "family", "n", "m", "samples_per_batch", "batches", "seed",
        "lhs", "lhs_stderr", "head_sum", "tail_max_mean", "rhs", "ratio",
        "window_lo", "window_hi", "pass",
    ]);
    let mut failing = Vec::new();
    let mut all = true;
    let mut any_row = false;
    for &n in &ns {
        let fam = expand_family(&cfg.dists, n)?;
        let (coeffs, xi) = split_scaled_family(&fam)?;
        // normalize the base to E|xi| = 1
        let mean = xi.mean_abs();
        let xi_unit = if (mean - 1.0).abs() <= 1e-12 {
            xi.clone()
        } else {
            Distribution::scaled(1.0 / mean, xi.clone())
        };
        let scaled_fam: Vec<Distribution> = coeffs
            .iter()
            .map(|&a| Distribution::scaled(a, xi_unit.clone()))
            .collect();
        let mut sorted = coeffs.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for &m in &ms {
            if m < 1 || m > n {
                continue;
            }
            any_row = true;
            let lhs = estimate_lhs(
                &scaled_fam,
                &SeqNormSpec::top_m(m),
                &RiNormSpec::lp(1.0),
                &cfg.mc,
            )?;
            let head: f64 = sorted[..m].iter().sum();
            let tail_fam: Vec<Distribution> = (1..=n / m)
                .map(|i| Distribution::scaled(sorted[m * i - 1], xi_unit.clone()))
                .collect();
            let tail = estimate_lhs_grid_offset(
                &tail_fam,
                &[SeqNormSpec::linf()],
                &[RiNormSpec::lp(1.0)],
                &cfg.mc,
                cfg.mc.batches as u64,
            )?[0][0];
            let rhs = head + m as f64 * tail.value;
            let ratio = lhs.value / rhs;
            let ok = in_window(ratio, window);
            if !ok {
                failing.push(format!("n={n}, m={m}: ratio {ratio} outside window"));
            }
            all &= ok;
            table.push(vec![
                Cell::Text(cfg.experiment.clone()),
                Cell::Text(family_label(&scaled_fam)),
                Cell::Int(n as i64),
                Cell::Int(m as i64),
                Cell::Int(cfg.mc.samples_per_batch as i64),
                Cell::Int(cfg.mc.batches as i64),
                Cell::Int(cfg.mc.seed as i64),
                Cell::Num(lhs.value),
                Cell::Num(lhs.stderr),
                Cell::Num(head),
                Cell::Num(tail.value),
                Cell::Num(rhs),
                Cell::Num(ratio),
                Cell::Num(window[0]),
                Cell::Num(window[1]),
                Cell::Flag(ok),
            ]);
        }
    }
    if !any_row {
        return Err(Error::Config("remark_iid: no sweep point satisfies m <= n".into()));
    }
    let summary = base_summary(cfg, &table, all, window);
    Ok(RunOutput {
        experiment: cfg.experiment.clone(),
        table,
        pass: all,
        failing_rows: failing,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg(experiment: &str) -> ExperimentConfig {
        ExperimentConfig {
            experiment: experiment.into(),
            dists: vec![Distribution::uniform(1.0), Distribution::uniform(1.0)],
            ri: RiLit::lp(1.0),
            seq: SeqLit::linf(),
            mc: McConfig::new(500, 3, 42),
            sweep: None,
            out: None,
        }
    }

    #[test]
    fn windows_file_loads() {
        let w = windows();
        assert!(w.version >= 1);
        assert!(w.windows.contains_key("main_equivalence"));
        let [lo, hi] = ratio_window("main_equivalence");
        assert!(lo > 0.0 && hi > lo);
        assert_eq!(ratio_window("nonexistent"), w.default_window);
    }

    #[test]
    fn norm_literals_parse() {
        let j = r#"{"ri":"lorentz","p":2,"q":1}"#;
        let lit: RiLit = serde_json::from_str(j).unwrap();
        lit.to_spec().unwrap();

        let j = r#"{"ri":"orlicz","phi":"power","p":3}"#;
        let lit: RiLit = serde_json::from_str(j).unwrap();
        lit.to_spec().unwrap();

        let j = r#"{"seq":"orlicz","psi":"exp_gauss","m":2}"#;
        let lit: SeqLit = serde_json::from_str(j).unwrap();
        lit.to_spec().unwrap();

        let j = r#"{"seq":"top_m","m":4}"#;
        let lit: SeqLit = serde_json::from_str(j).unwrap();
        assert!(matches!(lit.to_spec().unwrap(), SeqNormSpec::TopM { m: 4 }));

        let lit: SeqLit = serde_json::from_str(r#"{"seq":"orlicz","psi":"theta_top_m:4"}"#).unwrap();
        lit.to_spec().unwrap();

        let lit: RiLit = serde_json::from_str(r#"{"ri":"orlicz","phi":"spliced:power:2,power:1"}"#).unwrap();
        lit.to_spec().unwrap();

        let bad: SeqLit = serde_json::from_str(r#"{"seq":"orlicz","psi":"mystery"}"#).unwrap();
        assert!(bad.to_spec().is_err());
    }

    #[test]
    fn config_validation_catches_errors() {
        let mut cfg = base_cfg("nope");
        assert!(matches!(cfg.validate(), Err(Error::UnknownExperiment(_))));
        cfg.experiment = "main_equivalence".into();
        cfg.validate().unwrap();
        cfg.dists.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = base_cfg("main_equivalence");
        cfg.sweep = Some(Sweep { n: Some(vec![]), ..Default::default() });
        assert!(cfg.validate().is_err());

        let mut cfg = base_cfg("main_equivalence");
        cfg.mc.batches = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn main_equivalence_two_uniforms_rhs() {
        let cfg = base_cfg("main_equivalence");
        let out = run_experiment(&cfg).unwrap();
        assert!(out.pass, "failing: {:?}", out.failing_rows);
        let rhs_col = out.table.column("rhs").unwrap();
        let rhs = match out.table.rows[0][rhs_col] {
            Cell::Num(v) => v,
            _ => panic!("rhs should be numeric"),
        };
        // M = L1, N = linf: \int_0^1 Y + Y(1) = 0.75 + 0.5
        assert!((rhs - 1.25).abs() < 1e-7, "rhs = {rhs}");
    }

    #[test]
    fn csv_shape_is_stable() {
        let cfg = base_cfg("main_equivalence");
        let out = run_experiment(&cfg).unwrap();
        let csv = out.table.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,family,n,M,N,samples_per_batch,batches,seed,lhs,lhs_stderr,rhs,ratio,window_lo,window_hi,pass"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("main_equivalence,"));
        // full-precision numeric cells
        assert!(row.contains("e0") || row.contains("e-"));
    }

    #[test]
    fn run_to_dir_writes_artifacts() {
        let cfg = base_cfg("main_equivalence");
        let dir = std::env::temp_dir().join(format!("rinorm-test-{}", std::process::id()));
        let art = run_to_dir(&cfg, &dir).unwrap();
        assert!(art.csv_path.exists());
        assert!(art.summary_path.exists());
        let summary: Value =
            serde_json::from_str(&fs::read_to_string(&art.summary_path).unwrap()).unwrap();
        assert_eq!(summary["seed"], json!(42));
        assert_eq!(summary["experiment"], json!("main_equivalence"));
        assert!(summary["rows"].as_array().is_some());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn orlicz_lambda_deterministic_base_matches_theta() {
        let mut cfg = base_cfg("orlicz_lambda");
        cfg.dists = (1..=6)
            .map(|i| Distribution::scaled(1.0 / i as f64, Distribution::two_point(1.0, 1.0)))
            .collect();
        cfg.ri = RiLit::orlicz("power:2");
        cfg.seq = SeqLit::orlicz("power:1");
        cfg.mc = McConfig::new(200, 2, 9);
        let out = run_experiment(&cfg).unwrap();
        let lam_col = out.table.column("lambda_norm").unwrap();
        let theta_col = out.table.column("theta_norm").unwrap();
        let (lam, theta) = match (&out.table.rows[0][lam_col], &out.table.rows[0][theta_col]) {
            (Cell::Num(a), Cell::Num(b)) => (*a, *b),
            _ => panic!("columns should be numeric"),
        };
        assert!((lam - theta).abs() <= 1e-8 * theta.max(1.0), "{lam} vs {theta}");
        assert!(out.pass);
    }

    #[test]
    fn gauss_km_flat_runs() {
        let mut cfg = base_cfg("gauss_km");
        cfg.dists = vec![Distribution::gaussian(1.0)];
        cfg.seq = SeqLit::top_m(1);
        cfg.sweep = Some(Sweep {
            n: Some(vec![16]),
            m: Some(vec![1, 4]),
            ..Default::default()
        });
        cfg.mc = McConfig::new(2_000, 3, 31);
        let out = run_experiment(&cfg).unwrap();
        assert!(out.pass, "failing: {:?}", out.failing_rows);
        assert_eq!(out.table.rows.len(), 2);
    }

    #[test]
    fn unknown_experiment_is_reported() {
        let cfg = base_cfg("mystery");
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn expand_family_rules() {
        let one = vec![Distribution::gaussian(1.0)];
        assert_eq!(expand_family(&one, 5).unwrap().len(), 5);
        let three = vec![
            Distribution::gaussian(1.0),
            Distribution::gaussian(2.0),
            Distribution::gaussian(3.0),
        ];
        assert_eq!(expand_family(&three, 2).unwrap().len(), 2);
        assert!(expand_family(&three, 5).is_err());
    }
}
