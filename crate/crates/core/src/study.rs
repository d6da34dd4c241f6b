//! Convergence studies: configuration, per-level runs, rate tables and CSV
//! output.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::thread;

use crate::assembly::{Assembler, ElementPair};
use crate::error::{Error, Result};
use crate::manufactured::{CaseId, ManufacturedCase};
use crate::memory::ModelParams;
use crate::mesh::Mesh;
use crate::stepper::{error_norms, ErrorNorms, SolveControls, Stepper, StepperState};

const STEP_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Spatial,
    Temporal,
    Longtime,
    Stability,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(StudyKind::Spatial),
            "temporal" => Ok(StudyKind::Temporal),
            "longtime" => Ok(StudyKind::Longtime),
            "stability" => Ok(StudyKind::Stability),
            other => Err(Error::Config(format!("unknown study '{other}'"))),
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Spatial => "spatial",
            StudyKind::Temporal => "temporal",
            StudyKind::Longtime => "longtime",
            StudyKind::Stability => "stability",
        })
    }
}

/// Coupling between mesh level `n` (grid spacing `1/n`) and time step.
#[derive(Clone, Debug, PartialEq)]
pub enum KRule {
    /// `k = (1/n)^2`, i.e. `h = sqrt(k)`.
    H2,
    /// `k = c / n`.
    Ch(f64),
    Fixed(f64),
    /// Explicit time steps.
    List(Vec<f64>),
}

fn parse_positive(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{what}: '{s}' is not a number")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!("{what} must be positive, got {v}")));
    }
    Ok(v)
}

/// Accepts plain numbers and fractions such as `1/64`.
fn parse_step(s: &str) -> Result<f64> {
    match s.split_once('/') {
        Some((a, b)) => Ok(parse_positive(a, "time step")? / parse_positive(b, "time step")?),
        None => parse_positive(s, "time step"),
    }
}

impl FromStr for KRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "h2" | "sqrt" => return Ok(KRule::H2),
            _ => {}
        }
        match s.split_once('=') {
            Some(("ch", c)) => Ok(KRule::Ch(parse_positive(c, "k-rule ch")?)),
            Some(("fixed", k)) => Ok(KRule::Fixed(parse_step(k)?)),
            Some(("list", ks)) => {
                let ks = ks.split(',').map(parse_step).collect::<Result<Vec<_>>>()?;
                Ok(KRule::List(ks))
            }
            _ => Err(Error::Config(format!(
                "unknown k-rule '{s}' (expected h2, sqrt, ch=<c>, fixed=<k> or list=<k1,k2,...>)"
            ))),
        }
    }
}

impl KRule {
    pub fn step_for_level(&self, n: usize) -> Result<f64> {
        let h = 1.0 / n as f64;
        match self {
            KRule::H2 => Ok(h * h),
            KRule::Ch(c) => Ok(c * h),
            KRule::Fixed(k) => Ok(*k),
            KRule::List(_) => Err(Error::Config("a k list does not define a per-level step".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub example: CaseId,
    pub element: ElementPair,
    pub levels: Vec<usize>,
    pub k_rule: KRule,
    /// Final times; only the long-time study takes more than one.
    pub final_times: Vec<f64>,
    pub params: ModelParams,
    pub controls: SolveControls,
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            study: StudyKind::Spatial,
            example: CaseId::Example1,
            element: ElementPair::P2P0,
            levels: vec![8, 16, 32],
            k_rule: KRule::H2,
            final_times: vec![1.0],
            params: ModelParams {
                mu: 1.0,
                gamma: 0.1,
                delta: 0.1,
            },
            controls: SolveControls::default(),
            out: None,
        }
    }
}

fn parse_list<T>(value: &str, key: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("{key}: {e}")))
}

impl StudyConfig {
    /// Sets one `key=value` entry; keys match the command-line flag names.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let number = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
        };
        match key.trim() {
            "study" => self.study = value.parse()?,
            "example" => self.example = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "element" => self.element = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "levels" => {
                self.levels = parse_list(value, "levels", |s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Config(format!("'{s}' is not a mesh level")))
                })?
            }
            "k-rule" => self.k_rule = value.parse()?,
            "T" => self.final_times = parse_list(value, "T", number)?,
            "mu" => self.params.mu = number(value)?,
            "gamma" => self.params.gamma = number(value)?,
            "delta" => self.params.delta = number(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "picard-tol" => self.controls.picard_tol = number(value)?,
            "picard-max" => {
                self.controls.picard_max = value
                    .parse()
                    .map_err(|_| Error::Config(format!("picard-max: '{value}' is not a count")))?
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file (blank lines and `#` comments ignored).
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.apply(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.params.mu, self.params.gamma, self.params.delta)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.controls.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.final_times.is_empty() {
            return Err(Error::Config("no final time given".into()));
        }
        if let Some(t) = self.final_times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("final time must be positive, got {t}")));
        }
        if self.study != StudyKind::Longtime && self.final_times.len() != 1 {
            return Err(Error::Config(format!("the {} study takes exactly one final time", self.study)));
        }
        let uses_levels = !(self.study == StudyKind::Temporal && matches!(self.k_rule, KRule::List(_)));
        if uses_levels {
            if self.levels.is_empty() {
                return Err(Error::Config("level list is empty".into()));
            }
            if self.levels.contains(&0) {
                return Err(Error::Config("mesh levels must be positive".into()));
            }
        }
        if let KRule::List(ks) = &self.k_rule {
            if ks.is_empty() {
                return Err(Error::Config("k list is empty".into()));
            }
        }
        Ok(())
    }
}

/// `log(e_{i-1} / e_i) / log(r_{i-1} / r_i)` for `i >= 1`.
pub fn compute_rates(errors: &[f64], resolutions: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != resolutions.len() {
        return Err(Error::DimensionMismatch {
            expected: resolutions.len(),
            found: errors.len(),
        });
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("errors must be positive and finite, got {e}")));
    }
    if resolutions.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("resolutions must be positive".into()));
    }
    let decreasing = resolutions.windows(2).all(|w| w[1] < w[0]);
    let increasing = resolutions.windows(2).all(|w| w[1] > w[0]);
    if !(decreasing || increasing) {
        return Err(Error::InvalidArgument("resolutions must be strictly monotone".into()));
    }
    Ok(errors
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(e, r)| (e[0] / e[1]).ln() / (r[0] / r[1]).ln())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    /// `h = 1/n` (spatial, long-time) or `k` (temporal).
    pub resolution: f64,
    pub l2_err: f64,
    pub l2_rate: Option<f64>,
    pub h1_err: f64,
    pub h1_rate: Option<f64>,
    pub p_err: f64,
    pub p_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    /// Header of the resolution column, `h` or `k`.
    pub resolution_label: &'static str,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn from_errors(resolution_label: &'static str, resolutions: &[f64], errors: &[ErrorNorms]) -> Result<Self> {
        let column = |f: fn(&ErrorNorms) -> f64| -> Result<Vec<Option<f64>>> {
            let values: Vec<f64> = errors.iter().map(f).collect();
            let rates = compute_rates(&values, resolutions)?;
            Ok(std::iter::once(None).chain(rates.into_iter().map(Some)).collect())
        };
        let l2 = column(|e| e.velocity_l2)?;
        let h1 = column(|e| e.velocity_h1)?;
        let p = column(|e| e.pressure_l2)?;
        let rows = (0..errors.len())
            .map(|i| RateRow {
                resolution: resolutions[i],
                l2_err: errors[i].velocity_l2,
                l2_rate: l2[i],
                h1_err: errors[i].velocity_h1,
                h1_rate: h1[i],
                p_err: errors[i].pressure_l2,
                p_rate: p[i],
            })
            .collect();
        Ok(Self { resolution_label, rows })
    }

    pub fn l2_rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.l2_rate).collect()
    }

    pub fn h1_rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.h1_rate).collect()
    }

    pub fn p_rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.p_rate).collect()
    }

    pub fn header(&self) -> String {
        format!("{},l2_err,l2_rate,h1_err,h1_rate,p_err,p_rate", self.resolution_label)
    }

    fn write_rows(&self, prefix: &str, out: &mut String) {
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{prefix}{},{:.8e},{},{:.8e},{},{:.8e},{}",
                r.resolution,
                r.l2_err,
                rate(r.l2_rate),
                r.h1_err,
                rate(r.h1_rate),
                r.p_err,
                rate(r.p_rate)
            );
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        self.write_rows("", &mut out);
        out
    }
}

/// Rate tables of a long-time study, one per final time.
#[derive(Clone, Debug, PartialEq)]
pub struct LongtimeTables {
    pub tables: Vec<(f64, RateTable)>,
}

impl LongtimeTables {
    /// Largest difference of matching L2 rates between any two horizons.
    pub fn l2_rate_spread(&self) -> f64 {
        let mut spread: f64 = 0.0;
        for (_, a) in &self.tables {
            for (_, b) in &self.tables {
                for (x, y) in a.l2_rates().iter().zip(b.l2_rates()) {
                    spread = spread.max((x - y).abs());
                }
            }
        }
        spread
    }

    pub fn rates_stable(&self, tolerance: f64) -> bool {
        self.l2_rate_spread() < tolerance
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,h,l2_err,l2_rate,h1_err,h1_rate,p_err,p_rate\n");
        for (t, table) in &self.tables {
            table.write_rows(&format!("{t},"), &mut out);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityCell {
    pub n: usize,
    pub k: f64,
    pub steps: usize,
    /// `(sup |U^n|_L2, sup |U^n|_H1, sup |P^n|_L2)` over `1 <= n <= steps`,
    /// or the failure message.
    pub outcome: std::result::Result<[f64; 3], String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityTable {
    pub cells: Vec<StabilityCell>,
}

impl StabilityTable {
    pub fn cell(&self, n: usize, k: f64) -> Option<&StabilityCell> {
        self.cells.iter().find(|c| c.n == n && (c.k - k).abs() <= 1e-12 * k)
    }

    pub fn all_finite(&self) -> bool {
        self.cells
            .iter()
            .all(|c| matches!(&c.outcome, Ok(v) if v.iter().all(|x| x.is_finite())))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,k,steps,sup_l2,sup_h1,sup_p,status\n");
        for c in &self.cells {
            let h = 1.0 / c.n as f64;
            match &c.outcome {
                Ok([a, b, p]) => {
                    let _ = writeln!(out, "{h},{},{},{a:.8e},{b:.8e},{p:.8e},ok", c.k, c.steps);
                }
                Err(msg) => {
                    let _ = writeln!(out, "{h},{},{},,,,\"failed: {}\"", c.k, c.steps, msg.replace('"', "'"));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StudyOutput {
    Rates(RateTable),
    Longtime(LongtimeTables),
    Stability(StabilityTable),
}

impl StudyOutput {
    pub fn to_csv(&self) -> String {
        match self {
            StudyOutput::Rates(t) => t.to_csv(),
            StudyOutput::Longtime(t) => t.to_csv(),
            StudyOutput::Stability(t) => t.to_csv(),
        }
    }
}

pub fn write_csv(output: &StudyOutput, path: &Path) -> Result<()> {
    fs::write(path, output.to_csv()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Number of steps with `N k = T`; rejects steps that do not divide `T`.
pub fn step_count(k: f64, t_final: f64) -> Result<usize> {
    let n = (t_final / k).round();
    if n < 1.0 || (n * k - t_final).abs() > STEP_MATCH_TOL * t_final {
        return Err(Error::Config(format!("time step {k} does not divide T = {t_final}")));
    }
    Ok(n as usize)
}

/// One manufactured run on an `n x n` mesh, finishing at step `steps`.
pub struct LevelRun {
    pub stepper: Stepper,
    pub state: StepperState,
}

#[allow(clippy::too_many_arguments)]
pub fn run_level(
    case: &ManufacturedCase,
    pair: ElementPair,
    params: ModelParams,
    controls: SolveControls,
    n: usize,
    k: f64,
    steps: usize,
    mut observer: impl FnMut(&Stepper, &StepperState),
) -> Result<LevelRun> {
    let asm = Assembler::new(Arc::new(Mesh::unit_square(n)?), pair)?;
    let mut stepper = Stepper::new(asm, params, k, controls)?;
    let mut state = stepper.initial_state(|x| case.initial_velocity(x))?;
    let forcing = |x: [f64; 2], t: f64| case.forcing(&params, x[0], x[1], t);
    for _ in 0..steps {
        stepper.step(&mut state, &forcing)?;
        observer(&stepper, &state);
    }
    Ok(LevelRun { stepper, state })
}

fn final_errors(case: &ManufacturedCase, run: &LevelRun) -> Result<ErrorNorms> {
    let t = run.state.t;
    error_norms(run.stepper.assembler(), &run.state.velocity, &run.state.pressure, |x| {
        case.eval_exact(x[0], x[1], t)
    })
}

/// Runs `jobs` on scoped threads; results come back in job order.
fn parallel_map<J: Sync, R: Send>(jobs: &[J], f: impl Fn(&J) -> R + Sync) -> Vec<R> {
    thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|j| scope.spawn(|| f(j))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study worker panicked"))
            .collect()
    })
}

fn level_error(level: String, e: Error) -> Error {
    Error::Level {
        level,
        source: Box::new(e),
    }
}

fn params_of(config: &StudyConfig) -> Result<ModelParams> {
    ModelParams::new(config.params.mu, config.params.gamma, config.params.delta)
}

/// Errors at `T` on each level with `k` from the level rule.
pub fn run_spatial_study(config: &StudyConfig) -> Result<RateTable> {
    config.validate()?;
    spatial_table(config, config.final_times[0])
}

fn spatial_table(config: &StudyConfig, t_final: f64) -> Result<RateTable> {
    let params = params_of(config)?;
    let case = ManufacturedCase::new(config.example);
    let mut jobs = Vec::new();
    for &n in &config.levels {
        let k = config.k_rule.step_for_level(n)?;
        jobs.push((n, k, step_count(k, t_final)?));
    }
    let hs: Vec<f64> = config.levels.iter().map(|&n| 1.0 / n as f64).collect();
    if config.levels.len() > 1 {
        compute_rates(&vec![1.0; hs.len()], &hs).map_err(|e| Error::Config(format!("levels: {e}")))?;
    }
    let results = parallel_map(&jobs, |&(n, k, steps)| {
        run_level(&case, config.element, params, config.controls, n, k, steps, |_, _| {})
            .and_then(|run| final_errors(&case, &run))
            .map_err(|e| level_error(format!("n={n}"), e))
    });
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
    RateTable::from_errors("h", &hs, &errors)
}

/// Errors at `T` for a decreasing sequence of steps with `h = sqrt(k)`.
pub fn run_temporal_study(config: &StudyConfig) -> Result<RateTable> {
    config.validate()?;
    let params = params_of(config)?;
    let case = ManufacturedCase::new(config.example);
    let t_final = config.final_times[0];
    let pairs: Vec<(usize, f64)> = match &config.k_rule {
        KRule::List(ks) => ks.iter().map(|&k| ((1.0 / k.sqrt()).round().max(1.0) as usize, k)).collect(),
        KRule::H2 => config.levels.iter().map(|&n| (n, 1.0 / (n * n) as f64)).collect(),
        other => {
            return Err(Error::Config(format!(
                "the temporal study needs k-rule h2 or an explicit list, got {other:?}"
            )))
        }
    };
    let ks: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    if ks.len() > 1 {
        compute_rates(&vec![1.0; ks.len()], &ks).map_err(|e| Error::Config(format!("time steps: {e}")))?;
    }
    let mut jobs = Vec::new();
    for &(n, k) in &pairs {
        jobs.push((n, k, step_count(k, t_final)?));
    }
    let results = parallel_map(&jobs, |&(n, k, steps)| {
        run_level(&case, config.element, params, config.controls, n, k, steps, |_, _| {})
            .and_then(|run| final_errors(&case, &run))
            .map_err(|e| level_error(format!("k={k}"), e))
    });
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
    RateTable::from_errors("k", &ks, &errors)
}

/// One spatial rate table per final time.
pub fn run_longtime_study(config: &StudyConfig) -> Result<LongtimeTables> {
    config.validate()?;
    let tables = config
        .final_times
        .iter()
        .map(|&t| spatial_table(config, t).map(|table| (t, table)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LongtimeTables { tables })
}

/// Sup norms over `0 < t_n <= T` on every `(level, k)` cell; `N = floor(T/k)`.
pub fn run_stability_study(config: &StudyConfig) -> Result<StabilityTable> {
    config.validate()?;
    let params = params_of(config)?;
    let case = ManufacturedCase::new(config.example);
    let t_final = config.final_times[0];
    let ks = match &config.k_rule {
        KRule::List(ks) => ks.clone(),
        KRule::Fixed(k) => vec![*k],
        other => {
            return Err(Error::Config(format!(
                "the stability study needs an explicit k list, got {other:?}"
            )))
        }
    };
    let mut jobs = Vec::new();
    for &n in &config.levels {
        for &k in &ks {
            if k > t_final * (1.0 + STEP_MATCH_TOL) {
                return Err(Error::Config(format!("time step {k} exceeds T = {t_final}")));
            }
            let steps = ((t_final / k) * (1.0 + STEP_MATCH_TOL)).floor() as usize;
            jobs.push((n, k, steps));
        }
    }
    let cells = parallel_map(&jobs, |&(n, k, steps)| {
        let mut sup = [0.0f64; 3];
        let outcome = run_level(&case, config.element, params, config.controls, n, k, steps, |stepper, state| {
            let r = state.monitors.last().expect("observer runs after a step");
            let p = stepper
                .assembler()
                .pressure_mass()
                .bilinear(&state.pressure, &state.pressure)
                .map(|v| v.max(0.0).sqrt())
                .unwrap_or(f64::NAN);
            sup[0] = sup[0].max(r.l2_norm);
            sup[1] = sup[1].max((r.l2_norm.powi(2) + r.h1_seminorm.powi(2)).sqrt());
            sup[2] = sup[2].max(p);
        })
        .map(|_| sup)
        .map_err(|e| e.to_string());
        StabilityCell { n, k, steps, outcome }
    });
    Ok(StabilityTable { cells })
}

pub fn run_study(config: &StudyConfig) -> Result<StudyOutput> {
    Ok(match config.study {
        StudyKind::Spatial => StudyOutput::Rates(run_spatial_study(config)?),
        StudyKind::Temporal => StudyOutput::Rates(run_temporal_study(config)?),
        StudyKind::Longtime => StudyOutput::Longtime(run_longtime_study(config)?),
        StudyKind::Stability => StudyOutput::Stability(run_stability_study(config)?),
    })
}
