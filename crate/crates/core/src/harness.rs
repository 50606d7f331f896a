//! Experiment configs, report emission and the bundled reproduction runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cocycle::{FourierCocycle, CertificateOptions};
use crate::domination::{complexified_sweep, test_domination, DominationOptions, Verdict};
use crate::error::{invalid, Error, Result};
use crate::gallery::{example, Diagnostics, Params};
use crate::homology::{
    factor_splitting_exact, grassmann_betti, kunneth, obstruction_check, point_betti,
    rational_rows, torus_betti, BettiTable, FactorFile, FactorInstance, ObstructionQuery,
    ObstructionVerdict,
};
use crate::linalg::ComplexMatrix;
use crate::lyapunov::{
    default_phases, lyapunov_spectrum, LyapunovOptions, LyapunovReport, DEFAULT_GAP_TOL,
    DEFAULT_ORBIT, DEFAULT_PHASES,
};
use crate::topology::{
    builtin_field, homotopic_to_constant, projective_to_sphere, read_field_csv, sphere_degree,
    surface_samples, winding_number_surface, BuiltinField, DegreeResult, SphereField,
};
use crate::torus::{parse_frequency, TorusPoint, Translation};

pub const CLAIMS: [&str; 4] = [
    "thm1.1-spectrum",
    "remark3.6-sweep",
    "prop2.1-splitting",
    "cor3.2-criterion",
];

pub const DEFAULT_RESOLUTION: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Construct,
    Lyapunov,
    Dominate,
    Sweep,
    Degree,
    Homology,
    Reproduce,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Construct => "construct",
            Operation::Lyapunov => "lyapunov",
            Operation::Dominate => "dominate",
            Operation::Sweep => "sweep",
            Operation::Degree => "degree",
            Operation::Homology => "homology",
            Operation::Reproduce => "reproduce",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomologyOp {
    Betti,
    Kunneth,
    Split,
    Obstruct,
}

/// A flat experiment description. Every field is optional in the file;
/// [`ExperimentConfig::resolve`] fills the defaults the operation uses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    /// Gallery example name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    /// Cocycle interchange file, used instead of `example`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cocycle_file: Option<PathBuf>,
    /// Frequency components: numbers or tokens such as `sqrt2m1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Value>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refute_angle: Option<f64>,
    /// Imaginary shifts for `sweep`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Vec<f64>>>,
    /// Built-in field name for `degree`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homology: Option<HomologyOp>,
    /// `torus:D`, `grassmann:K:M` or `point`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spaces: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonzero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_file: Option<PathBuf>,
    /// Reproduction label, or `all`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses JSON, or a flat `key = value` TOML file.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(text)?);
        }
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(&self, other: &Self) -> Result<Self> {
        let mut base = match serde_json::to_value(self)? {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        if let Value::Object(top) = serde_json::to_value(other)? {
            for (k, v) in top {
                if k == "params" {
                    // Parameters merge key by key.
                    let mut merged = base.get("params").cloned().unwrap_or(json!({}));
                    if let (Value::Object(dst), Value::Object(src)) = (&mut merged, v) {
                        dst.extend(src);
                    }
                    base.insert(k, merged);
                } else {
                    base.insert(k, v);
                }
            }
        }
        Ok(serde_json::from_value(Value::Object(base))?)
    }

    fn op(&self) -> Result<Operation> {
        self.operation.ok_or_else(|| invalid("operation", "no operation given"))
    }

    /// Fills defaults for the fields the operation reads and validates them.
    pub fn resolve(&self) -> Result<Self> {
        let mut c = self.clone();
        let op = c.op()?;
        let needs_cocycle = matches!(
            op,
            Operation::Construct | Operation::Lyapunov | Operation::Dominate | Operation::Sweep
        );
        if needs_cocycle || (op == Operation::Degree && c.field.is_none() && c.field_file.is_none())
        {
            if c.example.is_none() && c.cocycle_file.is_none() {
                return Err(invalid("example", "give a gallery example or a cocycle file"));
            }
            if c.example.is_some() && c.cocycle_file.is_some() {
                return Err(invalid("cocycle_file", "conflicts with `example`"));
            }
            if c.example.is_some() {
                c.params.get_or_insert_with(Params::new);
            }
        }
        match op {
            Operation::Construct => {}
            Operation::Lyapunov => {
                c.n.get_or_insert(DEFAULT_ORBIT);
                c.phases.get_or_insert(DEFAULT_PHASES);
                c.seed.get_or_insert(0);
                c.gap_tol.get_or_insert(DEFAULT_GAP_TOL);
                if c.phases == Some(0) {
                    return Err(invalid("phases", "need at least one phase"));
                }
            }
            Operation::Dominate | Operation::Sweep => {
                let defaults = DominationOptions::default();
                c.k.get_or_insert(1);
                c.grid.get_or_insert(defaults.grid_per_dim);
                c.schedule.get_or_insert(defaults.schedule);
                c.angle_tol.get_or_insert(defaults.angle_tol);
                c.min_rate.get_or_insert(defaults.min_rate);
                c.refute_angle.get_or_insert(defaults.refute_angle);
                if op == Operation::Sweep && c.y.is_none() {
                    return Err(invalid("y", "sweep needs a list of imaginary shifts"));
                }
            }
            Operation::Degree => {
                if c.field.is_some() && c.field_file.is_some() {
                    return Err(invalid("field_file", "conflicts with `field`"));
                }
                if let Some(name) = &c.field {
                    name.parse::<BuiltinField>()?;
                }
                if c.field_file.is_none() {
                    c.resolution.get_or_insert(DEFAULT_RESOLUTION);
                }
            }
            Operation::Homology => {
                let h = c.homology.ok_or_else(|| invalid("homology", "choose betti, kunneth, split or obstruct"))?;
                match h {
                    HomologyOp::Betti => {
                        parse_space(c.space.as_deref().ok_or_else(|| invalid("space", "missing"))?)?;
                    }
                    HomologyOp::Kunneth => {
                        let spaces = c.spaces.as_ref().ok_or_else(|| invalid("spaces", "missing"))?;
                        if spaces.is_empty() {
                            return Err(invalid("spaces", "need at least one space"));
                        }
                        for s in spaces {
                            parse_space(s)?;
                        }
                    }
                    HomologyOp::Split => {
                        if c.factor_file.is_none() {
                            return Err(invalid("factor_file", "missing"));
                        }
                    }
                    HomologyOp::Obstruct => {
                        for (name, v) in [("d", c.d), ("k", c.k), ("m", c.m)] {
                            if v.is_none() {
                                return Err(invalid(name, "missing"));
                            }
                        }
                        c.nonzero.get_or_insert(false);
                    }
                }
                c.coefficients.get_or_insert_with(|| crate::homology::DEFAULT_FIELD.into());
            }
            Operation::Reproduce => {
                let claim = c.claim.get_or_insert_with(|| "all".into());
                if claim != "all" && !CLAIMS.contains(&claim.as_str()) {
                    return Err(invalid(
                        "claim",
                        format!("unknown claim `{claim}`; expected all or one of {}", CLAIMS.join(", ")),
                    ));
                }
            }
        }
        Ok(c)
    }
}

fn parse_space(s: &str) -> Result<BettiTable> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |t: &str| -> Result<usize> {
        t.parse().map_err(|_| invalid("space", format!("`{t}` is not an integer in `{s}`")))
    };
    match parts.as_slice() {
        ["point"] => Ok(point_betti()),
        ["torus", d] => torus_betti(num(d)?),
        ["grassmann", k, m] => grassmann_betti(num(k)?, num(m)?),
        _ => Err(invalid("space", format!("`{s}`: use torus:D, grassmann:K:M or point"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// The computation ran but the answer is unresolved or inconclusive.
    Inconclusive,
    /// A reproduction check did not hold.
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
            Status::Failed => 1,
        }
    }

    fn worst(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Failed, _) | (_, Failed) => Failed,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Ok,
        }
    }
}

/// CSV body built with fixed 17-significant-digit floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub claim: String,
    pub check: String,
    pub pass: bool,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub status: Status,
    pub summary: Value,
    pub tables: Vec<Table>,
    /// Extra files such as a constructed cocycle.
    pub files: Vec<(String, String)>,
}

impl RunReport {
    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `summary.json`, the CSV tables and extra files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: &str| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("summary.json", &self.summary_json()?)?;
        for t in &self.tables {
            put(&format!("{}.csv", t.name), &t.to_csv()?)?;
        }
        for (name, body) in &self.files {
            put(name, body)?;
        }
        Ok(written)
    }
}

fn versions() -> Value {
    json!({ "qpcocycle": env!("CARGO_PKG_VERSION") })
}

fn report(cfg: &ExperimentConfig, status: Status, result: Value, tables: Vec<Table>) -> Result<RunReport> {
    let summary = json!({
        "operation": cfg.op()?.name(),
        "status": status,
        "config": cfg,
        "versions": versions(),
        "result": result,
    });
    Ok(RunReport {
        status,
        summary,
        tables,
        files: Vec::new(),
    })
}

struct Source {
    cocycle: FourierCocycle<f64>,
    diagnostics: Option<Diagnostics>,
    spec: Option<Value>,
}

fn load_cocycle(cfg: &ExperimentConfig) -> Result<Source> {
    if let Some(path) = &cfg.cocycle_file {
        return Ok(Source {
            cocycle: FourierCocycle::read(path)?,
            diagnostics: None,
            spec: None,
        });
    }
    let name = cfg.example.as_deref().ok_or_else(|| invalid("example", "missing"))?;
    let ex = example::<f64>(name, cfg.params.as_ref().unwrap_or(&Params::new()))?;
    Ok(Source {
        spec: Some(serde_json::to_value(&ex.spec)?),
        cocycle: ex.cocycle,
        diagnostics: Some(ex.diagnostics),
    })
}

fn translation(cfg: &ExperimentConfig, d: usize) -> Result<Translation<f64>> {
    match &cfg.omega {
        None => Ok(Translation::default_for_dim(d)),
        Some(parts) => {
            let tokens: Vec<String> = parts
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            let t = parse_frequency(&tokens)?;
            if t.dim() != d {
                return Err(invalid(
                    "omega",
                    format!("has {} components, the cocycle lives on T^{d}", t.dim()),
                ));
            }
            Ok(t)
        }
    }
}

fn domination_options(cfg: &ExperimentConfig) -> DominationOptions {
    let d = DominationOptions::default();
    DominationOptions {
        grid_per_dim: cfg.grid.unwrap_or(d.grid_per_dim),
        schedule: cfg.schedule.clone().unwrap_or(d.schedule),
        angle_tol: cfg.angle_tol.unwrap_or(d.angle_tol),
        min_rate: cfg.min_rate.unwrap_or(d.min_rate),
        refute_angle: cfg.refute_angle.unwrap_or(d.refute_angle),
    }
}

/// Validates the config, runs it and collects the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let cfg = config.resolve()?;
    match cfg.op()? {
        Operation::Construct => run_construct(&cfg),
        Operation::Lyapunov => run_lyapunov(&cfg),
        Operation::Dominate => run_dominate(&cfg),
        Operation::Sweep => run_sweep(&cfg),
        Operation::Degree => run_degree(&cfg),
        Operation::Homology => run_homology(&cfg),
        Operation::Reproduce => reproduce(&cfg),
    }
}

fn coefficient_table(c: &FourierCocycle<f64>) -> Table {
    let mut t = Table::new("coefficients", &["n", "row", "col", "re", "im"]);
    for (n, a) in c.coefficients() {
        let label = n.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let z = a[(i, j)];
                t.push(vec![label.clone(), i.to_string(), j.to_string(), fmt17(z.re), fmt17(z.im)]);
            }
        }
    }
    t
}

fn run_construct(cfg: &ExperimentConfig) -> Result<RunReport> {
    let src = load_cocycle(cfg)?;
    let cert = src.cocycle.certify_invertible(CertificateOptions::default());
    let result = json!({
        "example": src.spec,
        "diagnostics": src.diagnostics,
        "certificate": cert,
        "d": src.cocycle.base_dim(),
        "m": src.cocycle.fiber_dim(),
    });
    let mut rep = report(cfg, Status::Ok, result, vec![coefficient_table(&src.cocycle)])?;
    rep.files.push(("cocycle.json".into(), src.cocycle.to_json()? + "\n"));
    Ok(rep)
}

fn lyapunov_tables(r: &LyapunovReport<f64>, expected: Option<&[f64]>) -> Vec<Table> {
    let mut ex = Table::new("exponents", &["index", "exponent", "stderr", "expected"]);
    for (i, (e, s)) in r.exponents.iter().zip(&r.stderr).enumerate() {
        let want = expected.and_then(|v| v.get(i)).map(|&v| fmt17(v)).unwrap_or_default();
        ex.push(vec![i.to_string(), fmt17(*e), fmt17(*s), want]);
    }
    let mut pp = Table::new("per_phase", &["phase", "index", "exponent"]);
    for (p, exps) in r.per_phase.iter().enumerate() {
        for (i, e) in exps.iter().enumerate() {
            pp.push(vec![p.to_string(), i.to_string(), fmt17(*e)]);
        }
    }
    vec![ex, pp]
}

fn spectrum(cfg: &ExperimentConfig, c: &FourierCocycle<f64>) -> Result<LyapunovReport<f64>> {
    let t = translation(cfg, c.base_dim())?;
    let phases = default_phases(c.base_dim(), cfg.phases.unwrap_or(DEFAULT_PHASES), cfg.seed.unwrap_or(0));
    let opts = LyapunovOptions {
        gap_tol: cfg.gap_tol.unwrap_or(DEFAULT_GAP_TOL),
        ..LyapunovOptions::default()
    };
    lyapunov_spectrum(c, &t, cfg.n.unwrap_or(DEFAULT_ORBIT), &phases, &opts)
}

fn run_lyapunov(cfg: &ExperimentConfig) -> Result<RunReport> {
    let src = load_cocycle(cfg)?;
    let r = spectrum(cfg, &src.cocycle)?;
    let expected = src.diagnostics.as_ref().and_then(|d| d.expected_exponents.clone());
    let tables = lyapunov_tables(&r, expected.as_deref());
    let result = json!({
        "exponents": r.exponents,
        "stderr": r.stderr,
        "filtration": r.filtration,
        "n_used": r.n_used,
        "phases_used": r.phases_used,
        "log_det_average": r.log_det_average,
        "expected_exponents": expected,
    });
    report(cfg, Status::Ok, result, tables)
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Inconclusive => Status::Inconclusive,
        _ => Status::Ok,
    }
}

fn phase_label(p: &[f64]) -> String {
    p.iter().map(|&v| fmt17(v)).collect::<Vec<_>>().join(" ")
}

fn run_dominate(cfg: &ExperimentConfig) -> Result<RunReport> {
    let src = load_cocycle(cfg)?;
    let t = translation(cfg, src.cocycle.base_dim())?;
    let v = test_domination(&src.cocycle, &t, cfg.k.unwrap_or(1), &domination_options(cfg))?;
    let mut gaps = Table::new("gaps", &["phase", "n", "log_gap"]);
    for s in &v.samples {
        gaps.push(vec![phase_label(&s.phase), s.n.to_string(), fmt17(s.log_gap)]);
    }
    let mut trace = Table::new("trace", &["n", "gap_floor", "oscillation"]);
    for ((n, g), (_, o)) in v.gap_floor_trace.iter().zip(&v.oscillation_trace) {
        trace.push(vec![n.to_string(), fmt17(*g), fmt17(*o)]);
    }
    let mut result = serde_json::to_value(&v)?;
    if let Value::Object(m) = &mut result {
        m.remove("samples");
    }
    report(cfg, verdict_status(v.verdict), result, vec![gaps, trace])
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    let src = load_cocycle(cfg)?;
    let t = translation(cfg, src.cocycle.base_dim())?;
    let ys = cfg.y.clone().unwrap_or_default();
    let rows = complexified_sweep(&src.cocycle, &t, cfg.k.unwrap_or(1), &ys, &domination_options(cfg))?;
    let mut table = Table::new("sweep", &["y", "verdict", "rate", "gap_floor"]);
    let mut status = Status::Ok;
    let mut out = Vec::new();
    for (y, v) in &rows {
        status = status.worst(verdict_status(v.verdict));
        table.push(vec![phase_label(y), verdict_name(v.verdict).into(), fmt17(v.rate), fmt17(v.gap_floor)]);
        out.push(json!({"y": y, "verdict": v.verdict, "rate": v.rate, "gap_floor": v.gap_floor}));
    }
    report(cfg, status, json!({ "sweep": out }), vec![table])
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// `[a : b]` from the first column of a cocycle on `T^2`, on the offset grid.
pub fn first_column_field(c: &FourierCocycle<f64>, n: usize) -> Result<SphereField<f64>> {
    if c.base_dim() != 2 || c.fiber_dim() != 2 {
        return Err(invalid("example", "the induced field needs a 2x2 cocycle on T^2"));
    }
    let mut a = Vec::with_capacity(n * n);
    let mut b = Vec::with_capacity(n * n);
    for idx in 0..n * n {
        let x = crate::cocycle::grid_point::<f64>(idx, n, 2, true);
        let col = c.evaluate(&TorusPoint::new(x)).column(0);
        a.push(col[0]);
        b.push(col[1]);
    }
    projective_to_sphere(n, &a, &b)
}

fn degree_result(d: &DegreeResult) -> Value {
    json!({"degree": d.degree, "raw": d.raw, "residual": d.residual, "resolved": d.resolved})
}

fn run_degree(cfg: &ExperimentConfig) -> Result<RunReport> {
    let (n, result, source) = if let Some(path) = &cfg.field_file {
        let (n, samples) = read_field_csv(fs::File::open(path)?)?;
        (n, winding_number_surface(n, &samples)?, json!({"file": path}))
    } else if let Some(name) = &cfg.field {
        let kind: BuiltinField = name.parse()?;
        let n = cfg.resolution.unwrap_or(DEFAULT_RESOLUTION);
        let r = match kind {
            BuiltinField::TorusRev | BuiltinField::WeierstrassSurface => {
                winding_number_surface(n, &surface_samples::<f64>(kind, n)?)?
            }
            _ => sphere_degree(&builtin_field::<f64>(kind, n)?)?,
        };
        (n, r, json!({"field": kind.name()}))
    } else {
        let src = load_cocycle(cfg)?;
        let n = cfg.resolution.unwrap_or(DEFAULT_RESOLUTION);
        let phi = first_column_field(&src.cocycle, n)?;
        (n, sphere_degree(&phi)?, json!({"induced_by": src.spec.unwrap_or(Value::Null)}))
    };
    let status = if result.resolved { Status::Ok } else { Status::Inconclusive };
    let mut t = Table::new("degree", &["N", "degree", "raw", "residual", "resolved"]);
    t.push(vec![
        n.to_string(),
        result.degree.to_string(),
        fmt17(result.raw),
        fmt17(result.residual),
        result.resolved.to_string(),
    ]);
    let mut value = degree_result(&result);
    value["N"] = json!(n);
    value["source"] = source;
    value["homotopic_to_constant"] = if result.resolved { json!(result.degree == 0) } else { Value::Null };
    report(cfg, status, value, vec![t])
}

fn betti_table(t: &BettiTable) -> Table {
    let mut out = Table::new("betti", &["i", "b_i"]);
    for (i, b) in t.betti.iter().enumerate() {
        out.push(vec![i.to_string(), b.to_string()]);
    }
    out
}

fn run_homology(cfg: &ExperimentConfig) -> Result<RunReport> {
    let field = cfg.coefficients.clone().unwrap_or_else(|| crate::homology::DEFAULT_FIELD.into());
    let relabel = |mut t: BettiTable| {
        t.field = field.clone();
        t
    };
    match cfg.homology.ok_or_else(|| invalid("homology", "missing"))? {
        HomologyOp::Betti => {
            let t = relabel(parse_space(cfg.space.as_deref().unwrap_or_default())?);
            report(cfg, Status::Ok, serde_json::to_value(&t)?, vec![betti_table(&t)])
        }
        HomologyOp::Kunneth => {
            let spaces = cfg.spaces.clone().unwrap_or_default();
            let mut acc = parse_space(&spaces[0])?;
            for s in &spaces[1..] {
                acc = kunneth(&acc, &parse_space(s)?);
            }
            let t = relabel(acc);
            report(cfg, Status::Ok, serde_json::to_value(&t)?, vec![betti_table(&t)])
        }
        HomologyOp::Split => {
            let path = cfg.factor_file.as_ref().ok_or_else(|| invalid("factor_file", "missing"))?;
            let file = FactorFile::from_json(&fs::read_to_string(path)?)?;
            let inst = file.instance()?;
            let (value, table) = split_summary(&inst)?;
            report(cfg, Status::Ok, value, vec![table])
        }
        HomologyOp::Obstruct => {
            let q = ObstructionQuery {
                d: cfg.d.unwrap_or(0),
                k: cfg.k.unwrap_or(0),
                m: cfg.m.unwrap_or(0),
                homology_nonzero: cfg.nonzero.unwrap_or(false),
                field,
            };
            let r = obstruction_check(&q)?;
            let status = if r.verdict == ObstructionVerdict::Inconclusive {
                Status::Inconclusive
            } else {
                Status::Ok
            };
            let mut t = Table::new("obstruction", &["d", "k", "m", "nonzero", "verdict"]);
            t.push(vec![
                q.d.to_string(),
                q.k.to_string(),
                q.m.to_string(),
                q.homology_nonzero.to_string(),
                serde_json::to_value(r.verdict)?.as_str().unwrap_or_default().to_string(),
            ]);
            report(cfg, status, json!({"query": q, "report": r}), vec![t])
        }
    }
}

fn split_summary(inst: &FactorInstance<num_rational::BigRational>) -> Result<(Value, Table)> {
    let sigma = factor_splitting_exact(inst)?;
    let mut t = Table::new("sigma", &["row", "col", "value"]);
    let value = match &sigma {
        Some(s) => {
            for (i, row) in rational_rows(s).into_iter().enumerate() {
                for (j, v) in row.into_iter().enumerate() {
                    t.push(vec![i.to_string(), j.to_string(), v]);
                }
            }
            json!({"splitting": true, "sigma": rational_rows(s), "verified": inst.is_splitting(s)})
        }
        None => json!({"splitting": false, "sigma": Value::Null}),
    };
    Ok((value, t))
}

struct ClaimRun {
    checks: Vec<Check>,
    result: Value,
    tables: Vec<Table>,
}

fn check(claim: &str, name: &str, value: f64, expected: f64, tol: f64) -> Check {
    Check {
        claim: claim.into(),
        check: name.into(),
        pass: (value - expected).abs() <= tol,
        value,
        expected,
        tolerance: tol,
    }
}

fn flag(claim: &str, name: &str, ok: bool) -> Check {
    let v = if ok { 1.0 } else { 0.0 };
    Check {
        claim: claim.into(),
        check: name.into(),
        pass: ok,
        value: v,
        expected: 1.0,
        tolerance: 0.0,
    }
}

fn claim_spectrum() -> Result<ClaimRun> {
    let claim = CLAIMS[0];
    let ex = example::<f64>("prop34-block", &Params::new())?;
    let c = &ex.cocycle;
    let t = Translation::default_for_dim(c.base_dim());
    let phases = default_phases(c.base_dim(), DEFAULT_PHASES, 0);
    let r = lyapunov_spectrum(c, &t, DEFAULT_ORBIT, &phases, &LyapunovOptions::default())?;
    let (l2, l3) = (2f64.ln(), 3f64.ln());
    let f = &r.filtration;
    let mut checks = vec![flag(claim, "plus_dim_is_2", f.plus_dim() == Some(2))];
    let means: Vec<f64> = f.clusters.iter().map(|c| c.mean).collect();
    checks.push(flag(claim, "four_simple_clusters", f.dims() == vec![1, 1, 1, 1]));
    for (i, want) in [l3, l2, -l2, -l3].into_iter().enumerate() {
        let got = means.get(i).copied().unwrap_or(f64::NAN);
        checks.push(check(claim, &format!("cluster_{i}_mean"), got, want, 5e-3));
    }
    let sum: f64 = r.exponents.iter().sum();
    checks.push(check(claim, "exponent_sum", sum, 0.0, 1e-8));
    let result = json!({
        "exponents": r.exponents,
        "stderr": r.stderr,
        "filtration": r.filtration,
        "n_used": r.n_used,
        "phases_used": r.phases_used,
        "expected_exponents": ex.diagnostics.expected_exponents,
    });
    let tables = lyapunov_tables(&r, ex.diagnostics.expected_exponents.as_deref());
    let tables = tables
        .into_iter()
        .map(|mut t| {
            t.name = format!("spectrum_{}", t.name);
            t
        })
        .collect();
    Ok(ClaimRun { checks, result, tables })
}

/// `diag(2 e(x_1), 1/2)` on `T^2`.
pub fn sweep_cocycle() -> Result<FourierCocycle<f64>> {
    let mut top = ComplexMatrix::zeros(2, 2);
    top[(0, 0)] = num_complex::Complex::new(2.0, 0.0);
    let mut constant = ComplexMatrix::zeros(2, 2);
    constant[(1, 1)] = num_complex::Complex::new(0.5, 0.0);
    FourierCocycle::new(2, 2, 1.0, [(vec![1, 0], top), (vec![0, 0], constant)])
}

pub const SWEEP_T: [f64; 3] = [0.0, 0.05, 0.1];

fn claim_sweep() -> Result<ClaimRun> {
    let claim = CLAIMS[1];
    let c = sweep_cocycle()?;
    let t = Translation::default_for_dim(2);
    let ys: Vec<Vec<f64>> = SWEEP_T.iter().map(|&s| vec![s, 0.0]).collect();
    let rows = complexified_sweep(&c, &t, 1, &ys, &DominationOptions::default())?;
    let mut checks = Vec::new();
    let mut table = Table::new("sweep", &["t", "verdict", "rate", "drop", "predicted_drop"]);
    let base = rows[0].1.rate;
    let mut out = Vec::new();
    for (y, v) in &rows {
        let tt = y[0];
        let drop = base - v.rate;
        let predicted = std::f64::consts::TAU * tt;
        checks.push(flag(claim, &format!("certified_t{tt}"), v.verdict == Verdict::Certified));
        checks.push(check(claim, &format!("rate_drop_t{tt}"), drop, predicted, 2e-2));
        table.push(vec![fmt17(tt), verdict_name(v.verdict).into(), fmt17(v.rate), fmt17(drop), fmt17(predicted)]);
        out.push(json!({"t": tt, "verdict": v.verdict, "rate": v.rate, "drop": drop, "predicted_drop": predicted}));
    }
    checks.push(check(claim, "rate_t0", base, 4f64.ln(), 1e-2));
    Ok(ClaimRun { checks, result: json!({"sweep": out}), tables: vec![table] })
}

fn rational_instance(f: &[&[i64]], pi: &[&[i64]], h: &[&[i64]]) -> Result<FactorInstance<num_rational::BigRational>> {
    let conv = |rows: &[&[i64]]| -> Vec<Vec<String>> {
        rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
    };
    FactorFile { f: conv(f), pi: conv(pi), h: conv(h) }.instance()
}

fn claim_splitting() -> Result<ClaimRun> {
    let claim = CLAIMS[2];
    let cases = [
        ("jordan_block", rational_instance(&[&[1, 1], &[0, 1]], &[&[0, 1]], &[&[1]])?, false),
        ("block_diagonal", rational_instance(&[&[1, 0], &[0, 2]], &[&[0, 1]], &[&[2]])?, true),
        (
            "identity_projection",
            rational_instance(&[&[2, 1, 0], &[0, 3, 1], &[1, 0, 5]], &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], &[&[2, 1, 0], &[0, 3, 1], &[1, 0, 5]])?,
            true,
        ),
    ];
    let mut checks = Vec::new();
    let mut results = Map::new();
    let mut table = Table::new("splitting", &["instance", "splitting", "verified"]);
    for (name, inst, expect) in cases {
        let (value, _) = split_summary(&inst)?;
        let found = value["splitting"].as_bool().unwrap_or(false);
        let verified = value["verified"].as_bool().unwrap_or(false);
        checks.push(flag(claim, &format!("{name}_splits_{expect}"), found == expect));
        if found {
            checks.push(flag(claim, &format!("{name}_sigma_verified"), verified));
        }
        table.push(vec![name.into(), found.to_string(), verified.to_string()]);
        results.insert(name.into(), value);
    }
    Ok(ClaimRun { checks, result: Value::Object(results), tables: vec![table] })
}

fn claim_criterion() -> Result<ClaimRun> {
    let claim = CLAIMS[3];
    let q = ObstructionQuery {
        d: 2,
        k: 1,
        m: 2,
        homology_nonzero: true,
        field: crate::homology::DEFAULT_FIELD.into(),
    };
    let r = obstruction_check(&q)?;
    let mut checks = vec![flag(claim, "obstructed", r.verdict == ObstructionVerdict::Obstructed)];
    let wp = sphere_degree(&builtin_field::<f64>(BuiltinField::Weierstrass, DEFAULT_RESOLUTION)?)?;
    checks.push(flag(claim, "weierstrass_degree_resolved", wp.resolved));
    checks.push(check(claim, "weierstrass_degree", wp.degree as f64, 2.0, 0.0));
    checks.push(flag(
        claim,
        "weierstrass_not_null_homotopic",
        !homotopic_to_constant(&builtin_field::<f64>(BuiltinField::Weierstrass, DEFAULT_RESOLUTION)?)?,
    ));
    // The first column of the default su-form is a lift to C^2 \ {0}.
    let su = example::<f64>("su-form", &Params::new())?;
    let induced = sphere_degree(&first_column_field(&su.cocycle, DEFAULT_RESOLUTION)?)?;
    checks.push(check(claim, "su_form_induced_degree", induced.degree as f64, 0.0, 0.0));
    let mut table = Table::new("degrees", &["field", "degree", "raw", "residual"]);
    for (name, d) in [("weierstrass", &wp), ("su-form", &induced)] {
        table.push(vec![name.into(), d.degree.to_string(), fmt17(d.raw), fmt17(d.residual)]);
    }
    Ok(ClaimRun {
        checks,
        result: json!({
            "query": q,
            "report": r,
            "weierstrass": degree_result(&wp),
            "su_form_induced": degree_result(&induced),
        }),
        tables: vec![table],
    })
}

/// Runs one bundled reproduction (or `all`) and checks each surrogate.
pub fn reproduce(cfg: &ExperimentConfig) -> Result<RunReport> {
    let label = cfg.claim.clone().unwrap_or_else(|| "all".into());
    let labels: Vec<&str> = if label == "all" {
        CLAIMS.to_vec()
    } else {
        vec![CLAIMS
            .iter()
            .copied()
            .find(|c| *c == label)
            .ok_or_else(|| invalid("claim", format!("unknown claim `{label}`")))?]
    };
    let mut checks = Vec::new();
    let mut results = Map::new();
    let mut tables = Vec::new();
    for l in labels {
        let run = match l {
            "thm1.1-spectrum" => claim_spectrum()?,
            "remark3.6-sweep" => claim_sweep()?,
            "prop2.1-splitting" => claim_splitting()?,
            _ => claim_criterion()?,
        };
        results.insert(l.into(), run.result);
        checks.extend(run.checks);
        tables.extend(run.tables);
    }
    let mut t = Table::new("checks", &["claim", "check", "pass", "value", "expected", "tolerance"]);
    for c in &checks {
        t.push(vec![
            c.claim.clone(),
            c.check.clone(),
            c.pass.to_string(),
            fmt17(c.value),
            fmt17(c.expected),
            fmt17(c.tolerance),
        ]);
    }
    tables.insert(0, t);
    let status = if checks.iter().all(|c| c.pass) { Status::Ok } else { Status::Failed };
    let mut cfg = cfg.clone();
    cfg.claim = Some(label);
    report(&cfg, status, json!({"checks": checks, "claims": results}), tables)
}

/// One line per check, for terminal output.
pub fn format_checks(rep: &RunReport) -> String {
    let mut out = String::new();
    if let Some(checks) = rep.summary["result"]["checks"].as_array() {
        for c in checks {
            let _ = writeln!(
                out,
                "{} {} / {}: value {} expected {} tol {}",
                if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" },
                c["claim"].as_str().unwrap_or(""),
                c["check"].as_str().unwrap_or(""),
                c["value"],
                c["expected"],
                c["tolerance"],
            );
        }
    }
    out
}
