//! Experiment configuration: a TOML document checked against a fixed schema.
//!
//! Grammar: optional top-level `kind`, then the sections `[model]`,
//! `[protocol]`, `[evolve]`, `[sweep]`, `[noise]`, `[numerics]` and
//! `[output]`. Values are TOML scalars or arrays; `#` starts a comment.
//! Angles may be numbers or strings such as `"pi/2"` or `"3*pi/4"`. Every
//! key not given takes the default listed in [`FIELDS`]
//! (see `templates/defaults.toml`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use latgate_core::gates::parse_angle;
use latgate_core::protocols::exchange_couplings;
use latgate_core::{CouplingSet, PulseShape, StepControl};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Float,
    Int,
    Bool,
    Text,
    Choice(&'static [&'static str]),
    Angle,
    AngleList,
    Steps,
}

impl Ty {
    fn describe(&self) -> String {
        match self {
            Ty::Float => "a number".into(),
            Ty::Int => "an integer".into(),
            Ty::Bool => "a boolean".into(),
            Ty::Text => "a string".into(),
            Ty::Choice(options) => format!("one of {}", options.join(", ")),
            Ty::Angle => "an angle (number or string like \"pi/2\")".into(),
            Ty::AngleList => "an array of angles".into(),
            Ty::Steps => "\"adaptive\" or a positive integer".into(),
        }
    }

    fn accepts(&self, v: &Value) -> bool {
        match (self, v) {
            (Ty::Float, Value::Float(_) | Value::Integer(_)) => true,
            (Ty::Int, Value::Integer(_)) => true,
            (Ty::Bool, Value::Boolean(_)) => true,
            (Ty::Text, Value::String(_)) => true,
            (Ty::Choice(options), Value::String(s)) => options.contains(&s.as_str()),
            (Ty::Angle, v) => angle_of(v).is_some(),
            (Ty::AngleList, Value::Array(items)) => items.iter().all(|v| angle_of(v).is_some()),
            (Ty::Steps, Value::String(s)) => s == "adaptive",
            (Ty::Steps, Value::Integer(n)) => *n >= 1,
            _ => false,
        }
    }
}

fn angle_of(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(n) => Some(*n as f64),
        Value::String(s) => parse_angle(s),
        _ => None,
    }
}

/// One schema entry. An empty `default` marks an optional key.
#[derive(Debug, Clone, Copy)]
pub struct Field {
    pub section: &'static str,
    pub key: &'static str,
    ty: Ty,
    pub default: &'static str,
}

const KINDS: &[&str] = &["evolve", "gate", "sweep", "figure3", "figure4", "toffoli", "noise"];
const PROTOCOLS: &[&str] = &[
    "adiabatic_exchange",
    "adiabatic_phase",
    "fast_phase",
    "fast_exchange",
    "toffoli",
    "raman",
    "hadamard",
];

macro_rules! field {
    ($s:literal, $k:literal, $t:expr, $d:literal) => {
        Field {
            section: $s,
            key: $k,
            ty: $t,
            default: $d,
        }
    };
}

/// The full schema; `section` is empty for top-level keys.
pub const FIELDS: &[Field] = &[
    field!("", "kind", Ty::Choice(KINDS), ""),
    field!("model", "sites", Ty::Int, "2"),
    field!("model", "cap", Ty::Int, ""),
    field!("model", "j_a", Ty::Float, "0.01"),
    field!("model", "j_b", Ty::Float, "0.01"),
    field!("model", "j_nnn_b", Ty::Float, "0.0"),
    field!("model", "j_r", Ty::Float, "0.0"),
    field!("model", "raman_phase", Ty::Angle, "0.0"),
    field!("model", "u_aa", Ty::Float, "2.0"),
    field!("model", "u_ab", Ty::Float, "1.0"),
    field!("model", "u_bb", Ty::Float, "2.0"),
    field!("protocol", "name", Ty::Choice(PROTOCOLS), "\"adiabatic_exchange\""),
    field!("protocol", "j_over_u", Ty::Float, ""),
    field!("protocol", "action", Ty::Angle, "\"pi/2\""),
    field!("protocol", "actions", Ty::AngleList, "[0.0, \"pi/2\", \"pi\"]"),
    field!("protocol", "phase", Ty::Angle, "\"pi\""),
    field!("protocol", "shape", Ty::Choice(&["square", "smooth"]), "\"square\""),
    field!("protocol", "ramp_fraction", Ty::Float, "0.1"),
    field!("protocol", "m", Ty::Int, ""),
    field!("protocol", "n", Ty::Int, ""),
    field!("protocol", "kappa", Ty::Float, "1.0"),
    field!("protocol", "theta", Ty::Angle, "\"pi/2\""),
    field!("protocol", "lambda", Ty::Angle, "0.0"),
    field!("protocol", "site", Ty::Int, "0"),
    field!("protocol", "omega", Ty::Float, "1.0"),
    field!("protocol", "broadcast", Ty::Bool, "false"),
    field!("evolve", "initial", Ty::Text, "\"|10;01>\""),
    field!("evolve", "duration", Ty::Float, "100.0"),
    field!("evolve", "samples", Ty::Int, "512"),
    field!("sweep", "parameter", Ty::Text, "\"protocol.j_over_u\""),
    field!("sweep", "from", Ty::Float, "0.005"),
    field!("sweep", "to", Ty::Float, "0.05"),
    field!("sweep", "points", Ty::Int, "10"),
    field!("sweep", "spacing", Ty::Choice(&["linear", "log"]), "\"linear\""),
    field!("noise", "relative_error", Ty::Float, "0.001"),
    field!("noise", "samples", Ty::Int, "21"),
    field!("numerics", "steps", Ty::Steps, "\"adaptive\""),
    field!("numerics", "tolerance", Ty::Float, "1e-9"),
    field!("numerics", "max_steps", Ty::Int, "16384"),
    field!("output", "dir", Ty::Text, "\"out\""),
    field!("output", "name", Ty::Text, ""),
    field!("output", "format", Ty::Choice(&["csv", "plot"]), "\"csv\""),
    field!("output", "timestamp", Ty::Bool, "true"),
];

/// Numeric parameters a sweep may scan, plus `u_over_j`, which sets
/// `protocol.j_over_u` to its inverse.
pub const SWEEPABLE: &[&str] = &[
    "u_over_j",
    "model.j_a",
    "model.j_b",
    "model.j_nnn_b",
    "model.j_r",
    "model.u_aa",
    "model.u_ab",
    "model.u_bb",
    "protocol.j_over_u",
    "protocol.action",
    "protocol.phase",
    "protocol.ramp_fraction",
    "protocol.kappa",
    "protocol.theta",
    "protocol.lambda",
    "protocol.omega",
    "evolve.duration",
];

fn sections() -> Vec<&'static str> {
    let mut s: Vec<&str> = FIELDS.iter().map(|f| f.section).filter(|s| !s.is_empty()).collect();
    s.dedup();
    s
}

fn lookup(section: &str, key: &str) -> Option<&'static Field> {
    FIELDS.iter().find(|f| f.section == section && f.key == key)
}

fn path_of(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn nearest<'a>(word: &str, options: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let mut best: Option<(f64, &str)> = None;
    for o in options {
        let score = strsim::jaro_winkler(word, o);
        if score >= 0.7 && best.is_none_or(|(b, _)| score > b) {
            best = Some((score, o));
        }
    }
    best.map(|(_, o)| o)
}

/// Where a value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: Origin,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Origin::Line(l) => write!(f, "line {l}: ")?,
            Origin::Override => write!(f, "--set: ")?,
            Origin::Unknown => {}
        }
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of every dotted key path in `text`.
fn key_lines(text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if let Ok(doc) = toml::de::DeTable::parse(text) {
        fn walk(prefix: &str, table: &toml::de::DeTable<'_>, text: &str, out: &mut BTreeMap<String, usize>) {
            for (k, v) in table.iter() {
                let path = if prefix.is_empty() {
                    k.get_ref().to_string()
                } else {
                    format!("{prefix}.{}", k.get_ref())
                };
                out.insert(path.clone(), line_of(text, k.span().start));
                if let toml::de::DeValue::Table(t) = v.get_ref() {
                    walk(&path, t, text, out);
                }
            }
        }
        walk("", doc.get_ref(), text, &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Evolve,
    Gate,
    Sweep,
    Figure3,
    Figure4,
    Toffoli,
    Noise,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        KINDS[*self as usize]
    }

    fn from_name(s: &str) -> Option<Self> {
        use ExperimentKind::*;
        [Evolve, Gate, Sweep, Figure3, Figure4, Toffoli, Noise]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolName {
    AdiabaticExchange,
    AdiabaticPhase,
    FastPhase,
    FastExchange,
    Toffoli,
    Raman,
    Hadamard,
}

impl ProtocolName {
    pub fn name(&self) -> &'static str {
        PROTOCOLS[*self as usize]
    }

    fn from_name(s: &str) -> Option<Self> {
        use ProtocolName::*;
        [AdiabaticExchange, AdiabaticPhase, FastPhase, FastExchange, Toffoli, Raman, Hadamard]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub sites: usize,
    pub cap: Option<usize>,
    pub j_a: f64,
    pub j_b: f64,
    pub j_nnn_b: f64,
    pub j_r: f64,
    pub raman_phase: f64,
    pub u_aa: f64,
    pub u_ab: f64,
    pub u_bb: f64,
}

impl ModelConfig {
    pub fn couplings(&self) -> CouplingSet {
        let mut c = CouplingSet::uniform(self.sites, self.j_a, self.j_b, self.u_aa, self.u_ab, self.u_bb)
            .with_nnn_b(self.j_nnn_b);
        let jr = latgate_core::C64::from_polar(self.j_r, self.raman_phase);
        c.j_r.iter_mut().for_each(|j| *j = jr);
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub name: ProtocolName,
    pub j_over_u: Option<f64>,
    pub action: f64,
    pub actions: Vec<f64>,
    pub phase: f64,
    pub shape: PulseShape,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub kappa: f64,
    pub theta: f64,
    pub lambda: f64,
    pub site: usize,
    pub omega: f64,
    pub broadcast: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub initial: String,
    pub duration: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepConfig {
    /// Sweep values in order; a single point is just `from`.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.from + s * (self.to - self.from),
                    Spacing::Log => (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub relative_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Plot,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Plot => "dat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub name: String,
    pub format: Format,
    pub timestamp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    pub protocol: ProtocolConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
    pub noise: NoiseConfig,
    pub steps: StepControl,
    pub output: OutputConfig,
    resolved: Table,
}

/// Parses one `--set` value: TOML syntax first, bare text as a string.
fn override_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.trim().to_string()),
    }
}

/// Default table built from the schema.
pub fn default_table() -> Table {
    let mut root = Table::new();
    for f in FIELDS.iter().filter(|f| !f.default.is_empty()) {
        let v = override_value(f.default);
        if f.section.is_empty() {
            root.insert(f.key.into(), v);
        } else {
            root.entry(f.section)
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .expect("section")
                .insert(f.key.into(), v);
        }
    }
    root
}

struct Checker<'a> {
    lines: &'a BTreeMap<String, usize>,
    overridden: Vec<String>,
    errors: Vec<ConfigError>,
}

impl Checker<'_> {
    fn origin(&self, path: &str) -> Origin {
        if self.overridden.iter().any(|p| p == path) {
            Origin::Override
        } else if let Some(l) = self.lines.get(path) {
            Origin::Line(*l)
        } else {
            Origin::Unknown
        }
    }

    fn error(&mut self, path: &str, message: impl Into<String>) {
        let origin = self.origin(path);
        self.errors.push(ConfigError {
            origin,
            key: path.to_string(),
            message: message.into(),
        });
    }

    fn unknown(&mut self, path: &str, word: &str, options: Vec<&str>) {
        let hint = match nearest(word, options) {
            Some(s) => format!("unknown key (did you mean `{s}`?)"),
            None => "unknown key".to_string(),
        };
        self.error(path, hint);
    }

    /// Shape and type check of the raw document; returns the entries to
    /// drop so validation can go on with defaults in their place.
    fn check(&mut self, raw: &Table) -> Vec<(String, Option<String>)> {
        let mut drop = Vec::new();
        let secs = sections();
        for (k, v) in raw {
            match v {
                Value::Table(t) if secs.contains(&k.as_str()) => {
                    for (key, val) in t {
                        let path = path_of(k, key);
                        match lookup(k, key) {
                            Some(f) if f.ty.accepts(val) => continue,
                            Some(f) => self.error(&path, format!("expected {}", f.ty.describe())),
                            None => {
                                let keys = FIELDS.iter().filter(|f| f.section == k).map(|f| f.key).collect();
                                self.unknown(&path, key, keys);
                            }
                        }
                        drop.push((k.clone(), Some(key.clone())));
                    }
                }
                _ => {
                    match lookup("", k) {
                        Some(f) if f.ty.accepts(v) => continue,
                        Some(f) => self.error(k, format!("expected {}", f.ty.describe())),
                        None => {
                            let mut options: Vec<&str> = secs.clone();
                            options.extend(FIELDS.iter().filter(|f| f.section.is_empty()).map(|f| f.key));
                            self.unknown(k, k, options);
                        }
                    }
                    drop.push((k.clone(), None));
                }
            }
        }
        drop
    }
}

fn merged(raw: &Table) -> Table {
    let mut out = default_table();
    for (k, v) in raw {
        match (out.get_mut(k), v) {
            (Some(Value::Table(dst)), Value::Table(src)) => {
                for (key, val) in src {
                    dst.insert(key.clone(), val.clone());
                }
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    out
}

/// Typed reads from the merged table; types were checked already.
struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        if section.is_empty() {
            self.table.get(key)
        } else {
            self.table.get(section)?.as_table()?.get(key)
        }
    }

    fn float(&self, s: &str, k: &str) -> f64 {
        match self.get(s, k) {
            Some(Value::Integer(n)) => *n as f64,
            Some(Value::Float(x)) => *x,
            _ => f64::NAN,
        }
    }

    fn opt_float(&self, s: &str, k: &str) -> Option<f64> {
        self.get(s, k).map(|_| self.float(s, k))
    }

    fn int(&self, s: &str, k: &str) -> i64 {
        self.get(s, k).and_then(Value::as_integer).unwrap_or(0)
    }

    fn opt_int(&self, s: &str, k: &str) -> Option<i64> {
        self.get(s, k).and_then(Value::as_integer)
    }

    fn text(&self, s: &str, k: &str) -> String {
        self.get(s, k).and_then(Value::as_str).unwrap_or_default().to_string()
    }

    fn boolean(&self, s: &str, k: &str) -> bool {
        self.get(s, k).and_then(Value::as_bool).unwrap_or(false)
    }

    fn angle(&self, s: &str, k: &str) -> f64 {
        self.get(s, k).and_then(angle_of).unwrap_or(f64::NAN)
    }

    fn angles(&self, s: &str, k: &str) -> Vec<f64> {
        match self.get(s, k) {
            Some(Value::Array(items)) => items.iter().filter_map(angle_of).collect(),
            _ => Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Parses `text`, applying `overrides` of the form `section.key=value`.
    /// Reports every problem found, not just the first.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self, ConfigErrors> {
        let lines = key_lines(text);
        let mut raw: Table = match text.parse::<Table>() {
            Ok(t) => t,
            Err(e) => {
                let origin = e.span().map(|s| Origin::Line(line_of(text, s.start))).unwrap_or(Origin::Unknown);
                return Err(ConfigErrors(vec![ConfigError {
                    origin,
                    key: String::new(),
                    message: e.message().trim().to_string(),
                }]));
            }
        };
        let mut checker = Checker {
            lines: &lines,
            overridden: Vec::new(),
            errors: Vec::new(),
        };
        for o in overrides {
            let Some((path, value)) = o.split_once('=') else {
                checker.errors.push(ConfigError {
                    origin: Origin::Override,
                    key: o.clone(),
                    message: "expected key=value".into(),
                });
                continue;
            };
            let path = path.trim();
            checker.overridden.push(path.to_string());
            let value = override_value(value);
            match path.split_once('.') {
                Some((section, key)) => {
                    let entry = raw.entry(section).or_insert_with(|| Value::Table(Table::new()));
                    match entry.as_table_mut() {
                        Some(t) => {
                            t.insert(key.to_string(), value);
                        }
                        None => checker.error(path, "not a section"),
                    }
                }
                None => {
                    raw.insert(path.to_string(), value);
                }
            }
        }
        for (k, key) in checker.check(&raw) {
            match key {
                Some(key) => {
                    raw.get_mut(&k).and_then(Value::as_table_mut).map(|t| t.remove(&key));
                }
                None => {
                    raw.remove(&k);
                }
            }
        }
        let resolved = merged(&raw);
        let cfg = Self::build(resolved, &mut checker);
        if checker.errors.is_empty() {
            return Ok(cfg);
        }
        let rank = |o: &Origin| match o {
            Origin::Line(l) => (0, *l),
            Origin::Override => (1, 0),
            Origin::Unknown => (2, 0),
        };
        checker.errors.sort_by_key(|e| rank(&e.origin));
        Err(ConfigErrors(checker.errors))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigErrors> {
        Self::parse_with(text, &[])
    }

    fn build(resolved: Table, ck: &mut Checker<'_>) -> Self {
        let r = Reader { table: &resolved };
        let kind = match r.get("", "kind").and_then(Value::as_str) {
            Some(k) => ExperimentKind::from_name(k).expect("checked"),
            None => {
                if !ck.errors.iter().any(|e| e.key == "kind") {
                    ck.error("kind", format!("missing; expected one of {}", KINDS.join(", ")));
                }
                ExperimentKind::Gate
            }
        };

        let non_negative = |ck: &mut Checker<'_>, path: &str, v: f64| {
            if !(v.is_finite() && v >= 0.0) {
                ck.error(path, format!("must be finite and >= 0, got {v}"));
            }
        };
        let positive = |ck: &mut Checker<'_>, path: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                ck.error(path, format!("must be finite and > 0, got {v}"));
            }
        };
        let finite = |ck: &mut Checker<'_>, path: &str, v: f64| {
            if !v.is_finite() {
                ck.error(path, "must be finite");
            }
        };
        let count = |ck: &mut Checker<'_>, path: &str, v: i64| -> usize {
            if v < 1 {
                ck.error(path, format!("must be >= 1, got {v}"));
                1
            } else {
                v as usize
            }
        };

        let sites = count(ck, "model.sites", r.int("model", "sites"));
        let cap = r.opt_int("model", "cap").map(|c| count(ck, "model.cap", c));
        let model = ModelConfig {
            sites,
            cap,
            j_a: r.float("model", "j_a"),
            j_b: r.float("model", "j_b"),
            j_nnn_b: r.float("model", "j_nnn_b"),
            j_r: r.float("model", "j_r"),
            raman_phase: r.angle("model", "raman_phase"),
            u_aa: r.float("model", "u_aa"),
            u_ab: r.float("model", "u_ab"),
            u_bb: r.float("model", "u_bb"),
        };
        for (k, v) in [("j_a", model.j_a), ("j_b", model.j_b), ("j_nnn_b", model.j_nnn_b)] {
            finite(ck, &format!("model.{k}"), v);
        }
        non_negative(ck, "model.j_r", model.j_r);
        for (k, v) in [("u_aa", model.u_aa), ("u_ab", model.u_ab), ("u_bb", model.u_bb)] {
            non_negative(ck, &format!("model.{k}"), v);
        }

        let ramp = r.float("protocol", "ramp_fraction");
        if !(0.0..=0.5).contains(&ramp) {
            ck.error("protocol.ramp_fraction", format!("must lie in [0, 0.5], got {ramp}"));
        }
        let shape = match r.text("protocol", "shape").as_str() {
            "smooth" => PulseShape::SmoothRamp { ramp_fraction: ramp },
            _ => PulseShape::Square,
        };
        let small = |ck: &mut Checker<'_>, path: &str, v: Option<i64>| -> Option<u32> {
            v.map(|x| {
                if !(1..=u32::MAX as i64).contains(&x) {
                    ck.error(path, format!("must be a positive integer, got {x}"));
                    1
                } else {
                    x as u32
                }
            })
        };
        let site = r.int("protocol", "site");
        if site < 0 {
            ck.error("protocol.site", "must be >= 0");
        }
        let protocol = ProtocolConfig {
            name: ProtocolName::from_name(&r.text("protocol", "name")).expect("checked"),
            j_over_u: r.opt_float("protocol", "j_over_u"),
            action: r.angle("protocol", "action"),
            actions: r.angles("protocol", "actions"),
            phase: r.angle("protocol", "phase"),
            shape,
            m: small(ck, "protocol.m", r.opt_int("protocol", "m")),
            n: small(ck, "protocol.n", r.opt_int("protocol", "n")),
            kappa: r.float("protocol", "kappa"),
            theta: r.angle("protocol", "theta"),
            lambda: r.angle("protocol", "lambda"),
            site: site.max(0) as usize,
            omega: r.float("protocol", "omega"),
            broadcast: r.boolean("protocol", "broadcast"),
        };
        if let Some(j) = protocol.j_over_u {
            positive(ck, "protocol.j_over_u", j);
        }
        non_negative(ck, "protocol.action", protocol.action);
        if protocol.actions.iter().any(|a| !(a.is_finite() && *a >= 0.0)) || protocol.actions.is_empty() {
            ck.error("protocol.actions", "must be a non-empty list of angles >= 0");
        }
        finite(ck, "protocol.phase", protocol.phase);
        if !(0.0..=1.0).contains(&protocol.kappa) {
            ck.error("protocol.kappa", format!("must lie in [0, 1], got {}", protocol.kappa));
        }
        non_negative(ck, "protocol.theta", protocol.theta);
        finite(ck, "protocol.lambda", protocol.lambda);
        positive(ck, "protocol.omega", protocol.omega);

        let evolve = EvolveConfig {
            initial: r.text("evolve", "initial"),
            duration: r.float("evolve", "duration"),
            samples: count(ck, "evolve.samples", r.int("evolve", "samples")),
        };
        non_negative(ck, "evolve.duration", evolve.duration);
        if kind == ExperimentKind::Evolve {
            match evolve.initial.parse::<latgate_core::FockState>() {
                Ok(s) if s.sites() != model.sites => ck.error(
                    "evolve.initial",
                    format!("has {} sites but model.sites = {}", s.sites(), model.sites),
                ),
                Ok(_) => {}
                Err(e) => ck.error("evolve.initial", e.to_string()),
            }
        }

        let sweep = SweepConfig {
            parameter: r.text("sweep", "parameter"),
            from: r.float("sweep", "from"),
            to: r.float("sweep", "to"),
            points: count(ck, "sweep.points", r.int("sweep", "points")),
            spacing: if r.text("sweep", "spacing") == "log" { Spacing::Log } else { Spacing::Linear },
        };
        if matches!(kind, ExperimentKind::Sweep | ExperimentKind::Figure4) {
            if kind == ExperimentKind::Figure4 && sweep.parameter != "u_over_j" {
                ck.error("sweep.parameter", "figure4 sweeps `u_over_j`");
            } else if !SWEEPABLE.contains(&sweep.parameter.as_str()) {
                let hint = match nearest(&sweep.parameter, SWEEPABLE.iter().copied()) {
                    Some(s) => format!("`{}` is not a sweepable parameter (did you mean `{s}`?)", sweep.parameter),
                    None => format!(
                        "`{}` is not a sweepable parameter; choose from {}",
                        sweep.parameter,
                        SWEEPABLE.join(", ")
                    ),
                };
                ck.error("sweep.parameter", hint);
            }
            finite(ck, "sweep.from", sweep.from);
            finite(ck, "sweep.to", sweep.to);
            if sweep.points > 1 && !(sweep.from < sweep.to) {
                ck.error("sweep.to", format!("range must be ordered: from = {} < to = {}", sweep.from, sweep.to));
            }
            if sweep.spacing == Spacing::Log && sweep.from <= 0.0 {
                ck.error("sweep.from", "log spacing needs from > 0");
            } else if sweep.parameter == "u_over_j" && sweep.from <= 0.0 {
                ck.error("sweep.from", "u_over_j must be > 0");
            }
        }

        let noise = NoiseConfig {
            relative_error: r.float("noise", "relative_error"),
            samples: count(ck, "noise.samples", r.int("noise", "samples")),
        };
        if !(0.0..1.0).contains(&noise.relative_error) {
            ck.error("noise.relative_error", "must lie in [0, 1)");
        }

        let tolerance = r.float("numerics", "tolerance");
        positive(ck, "numerics.tolerance", tolerance);
        let max = count(ck, "numerics.max_steps", r.int("numerics", "max_steps"));
        let steps = match r.get("numerics", "steps") {
            Some(Value::Integer(n)) => StepControl::Fixed(*n as usize),
            _ => StepControl::Adaptive {
                initial: 256.min(max),
                tolerance,
                max,
            },
        };

        let name = r.text("output", "name");
        let output = OutputConfig {
            dir: PathBuf::from(r.text("output", "dir")),
            name: if name.is_empty() { kind.name().to_string() } else { name },
            format: if r.text("output", "format") == "plot" { Format::Plot } else { Format::Csv },
            timestamp: r.boolean("output", "timestamp"),
        };
        if output.name.contains(['/', '\\']) {
            ck.error("output.name", "must be a bare file stem");
        }

        let cfg = ExperimentConfig {
            kind,
            model,
            protocol,
            evolve,
            sweep,
            noise,
            steps,
            output,
            resolved,
        };
        cfg.check_protocol(ck);
        cfg
    }

    fn check_protocol(&self, ck: &mut Checker<'_>) {
        let uses_protocol = matches!(
            self.kind,
            ExperimentKind::Gate | ExperimentKind::Sweep | ExperimentKind::Noise
        );
        if !uses_protocol {
            return;
        }
        let two_site = matches!(
            self.protocol.name,
            ProtocolName::AdiabaticExchange
                | ProtocolName::AdiabaticPhase
                | ProtocolName::FastPhase
                | ProtocolName::FastExchange
        );
        if two_site && self.model.sites != 2 {
            ck.error("model.sites", format!("{} runs on 2 sites", self.protocol.name.name()));
        }
        if matches!(self.protocol.name, ProtocolName::Raman | ProtocolName::Hadamard)
            && self.protocol.site >= self.model.sites
        {
            ck.error("protocol.site", format!("must be < model.sites = {}", self.model.sites));
        }
    }

    /// The effective configuration with every default filled in.
    pub fn resolved(&self) -> &Table {
        &self.resolved
    }

    /// Resolved configuration as TOML text.
    pub fn echo(&self) -> String {
        toml::to_string(&self.resolved).expect("plain TOML values serialize")
    }

    /// Copy with one sweepable parameter replaced.
    pub fn with_parameter(&self, name: &str, value: f64) -> Option<ExperimentConfig> {
        let mut c = self.clone();
        let (section, key) = match name {
            "u_over_j" => {
                c.protocol.j_over_u = Some(1.0 / value);
                ("protocol", "j_over_u")
            }
            _ => {
                let (section, key) = name.split_once('.')?;
                match name {
                    "model.j_a" => c.model.j_a = value,
                    "model.j_b" => c.model.j_b = value,
                    "model.j_nnn_b" => c.model.j_nnn_b = value,
                    "model.j_r" => c.model.j_r = value,
                    "model.u_aa" => c.model.u_aa = value,
                    "model.u_ab" => c.model.u_ab = value,
                    "model.u_bb" => c.model.u_bb = value,
                    "protocol.j_over_u" => c.protocol.j_over_u = Some(value),
                    "protocol.action" => c.protocol.action = value,
                    "protocol.phase" => c.protocol.phase = value,
                    "protocol.ramp_fraction" => {
                        c.protocol.shape = PulseShape::SmoothRamp { ramp_fraction: value }
                    }
                    "protocol.kappa" => c.protocol.kappa = value,
                    "protocol.theta" => c.protocol.theta = value,
                    "protocol.lambda" => c.protocol.lambda = value,
                    "protocol.omega" => c.protocol.omega = value,
                    "evolve.duration" => c.evolve.duration = value,
                    _ => return None,
                }
                (section, key)
            }
        };
        let v = if name == "u_over_j" { 1.0 / value } else { value };
        if let Some(Value::Table(t)) = c.resolved.get_mut(section) {
            t.insert(key.to_string(), Value::Float(v));
        }
        Some(c)
    }

    /// Two-site couplings for the exchange protocol: `j_over_u` picks
    /// `J_a = J_b = (J/U) U_ab` and `U_aa = U_bb = 2 U_ab`, otherwise the model
    /// couplings are used as given.
    pub fn exchange_base(&self) -> CouplingSet {
        match self.protocol.j_over_u {
            Some(r) => exchange_couplings(self.model.u_ab, r),
            None => self.model.couplings(),
        }
    }
}
