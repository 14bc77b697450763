//! TOML run configuration. Parsing collects every problem before failing.
//!
//! ```toml
//! command = "squeeze"            # optional; must match the subcommand
//!
//! [space]                        # default 30 / 30
//! n_c_cut = 30
//! n_r_cut = 30
//!
//! [squeezing]                    # either g ...
//! g = [0.0, -0.25]               # complex numbers are [re, im] or a bare real
//! # ... or omega (rad/s), eta, eta_r, t (s), giving G = -i omega eta eta_r t
//!
//! [superpose]
//! weights = [[1.0, 0.0], [0.5, -0.5]]
//!
//! [general]                      # either beta_c and beta_r ...
//! beta_c = [0.0, 0.4]
//! beta_r = [0.0, 0.25]
//! # ... or t_c, t_r (s): beta_c = i eta omega t_c, beta_r = i eta_r omega t_r
//!
//! [physical]                     # validate-rwa
//! r = 0.05
//! order = "second"               # "second" | "fourth" | "exact-cosine"
//! # mass_amu, mu, nu, omega0, omega, eta, eta_r (defaults in README)
//!
//! [sweep]                        # validate-rwa, at most one axis, strictly decreasing
//! eta = [0.15, 0.10, 0.05]       # sets eta = eta_r
//! # omega_over_nu = [0.05, 0.02, 0.01]
//!
//! [tolerances]                   # expm, integrator, tail_budget, tail_margin, purity
//!
//! [output]
//! path = "report.json"
//! format = "json"                # "json" | "csv"
//! ```

use std::fmt;

use clap::ValueEnum;
use ionsqueeze::dynamics::{ExpansionOrder, PhysicalParams};
use ionsqueeze::Tolerances;
use serde::Serialize;
use toml::{Table, Value};

pub const DEFAULT_CUTOFF: i64 = 30;
const AMU: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Squeeze,
    Superpose,
    General,
    ValidateRwa,
    Conventions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Squeeze => "squeeze",
            Command::Superpose => "superpose",
            Command::General => "general",
            Command::ValidateRwa => "validate-rwa",
            Command::Conventions => "conventions",
        }
    }

    fn sections(self) -> &'static [&'static str] {
        match self {
            Command::Squeeze => &["space", "squeezing", "tolerances", "output"],
            Command::Superpose => &["space", "squeezing", "superpose", "tolerances", "output"],
            Command::General => &["space", "squeezing", "general", "tolerances", "output"],
            Command::ValidateRwa => &["space", "physical", "sweep", "tolerances", "output"],
            Command::Conventions => &["tolerances", "output"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Squeezing {
    Direct { g: [f64; 2] },
    Physical { omega: f64, eta: f64, eta_r: f64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Displacement {
    Direct { beta_c: [f64; 2], beta_r: [f64; 2] },
    Timed { t_c: f64, t_r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConfig {
    pub params: PhysicalParams,
    pub order: ExpansionOrder,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    Eta(Vec<f64>),
    OmegaOverNu(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    /// Not echoed, so reports do not depend on where they are written.
    #[serde(skip)]
    pub path: Option<String>,
    pub format: Format,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub command: Command,
    pub n_c_cut: i64,
    pub n_r_cut: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squeezing: Option<Squeezing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displacement: Option<Displacement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl ProtocolConfig {
    /// Configuration used when no file is given (only `conventions` accepts this).
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            n_c_cut: DEFAULT_CUTOFF,
            n_r_cut: DEFAULT_CUTOFF,
            squeezing: None,
            weights: None,
            displacement: None,
            physical: None,
            sweep: None,
            tolerances: Tolerances::default(),
            output: OutputConfig {
                path: None,
                format: Format::Json,
            },
        }
    }
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            field: field.into(),
            message: message.into(),
        });
    }
}

/// A table whose keys are consumed as they are read; leftovers are unknown.
struct Section {
    name: String,
    table: Table,
}

impl Section {
    fn field(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn float(&mut self, key: &str, issues: &mut Issues) -> Option<f64> {
        let v = self.take(key)?;
        let field = self.field(key);
        as_float(&v, &field, issues)
    }

    fn required_float(&mut self, key: &str, issues: &mut Issues) -> Option<f64> {
        if !self.has(key) {
            issues.push(self.field(key), "missing required key");
            return None;
        }
        self.float(key, issues)
    }

    fn complex(&mut self, key: &str, issues: &mut Issues) -> Option<[f64; 2]> {
        let v = self.take(key)?;
        let field = self.field(key);
        as_complex(&v, &field, issues)
    }

    fn string(&mut self, key: &str, issues: &mut Issues) -> Option<String> {
        match self.take(key)? {
            Value::String(s) => Some(s),
            other => {
                issues.push(self.field(key), format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn integer(&mut self, key: &str, issues: &mut Issues) -> Option<i64> {
        match self.take(key)? {
            Value::Integer(i) => Some(i),
            other => {
                issues.push(self.field(key), format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn float_list(&mut self, key: &str, issues: &mut Issues) -> Option<Vec<f64>> {
        let field = self.field(key);
        match self.take(key)? {
            Value::Array(items) => {
                let before = issues.0.len();
                let out: Vec<f64> = items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| as_float(v, &format!("{field}[{i}]"), issues))
                    .collect();
                (issues.0.len() == before).then_some(out)
            }
            other => {
                issues.push(field, format!("expected an array, found {}", other.type_str()));
                None
            }
        }
    }

    fn finish(self, issues: &mut Issues) {
        for key in self.table.keys() {
            issues.push(self.field(key), "unknown key");
        }
    }
}

fn as_float(v: &Value, field: &str, issues: &mut Issues) -> Option<f64> {
    let x = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        other => {
            issues.push(field, format!("expected a number, found {}", other.type_str()));
            return None;
        }
    };
    if !x.is_finite() {
        issues.push(field, "must be finite");
        return None;
    }
    Some(x)
}

fn as_complex(v: &Value, field: &str, issues: &mut Issues) -> Option<[f64; 2]> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let re = as_float(&parts[0], &format!("{field}[0]"), issues);
            let im = as_float(&parts[1], &format!("{field}[1]"), issues);
            Some([re?, im?])
        }
        Value::Array(parts) => {
            issues.push(field, format!("complex numbers are [re, im], found {} entries", parts.len()));
            None
        }
        other => as_float(other, field, issues).map(|re| [re, 0.0]),
    }
}

fn take_section(root: &mut Table, name: &str, issues: &mut Issues) -> Option<Section> {
    match root.remove(name)? {
        Value::Table(table) => Some(Section {
            name: name.to_string(),
            table,
        }),
        other => {
            issues.push(name, format!("expected a table, found {}", other.type_str()));
            None
        }
    }
}

fn positive(x: Option<f64>, field: String, issues: &mut Issues) -> Option<f64> {
    match x {
        Some(v) if v > 0.0 => Some(v),
        Some(v) => {
            issues.push(field, format!("must be positive, got {v}"));
            None
        }
        None => None,
    }
}

fn parse_squeezing(sec: &mut Section, issues: &mut Issues) -> Option<Squeezing> {
    let physical_keys = ["omega", "eta", "eta_r", "t"];
    let has_physical = physical_keys.iter().any(|k| sec.has(k));
    if sec.has("g") && has_physical {
        issues.push(
            sec.field("g"),
            "conflict: give either g or (omega, eta, eta_r, t), not both",
        );
        for k in ["g"].iter().chain(physical_keys.iter()) {
            sec.take(k);
        }
        return None;
    }
    if sec.has("g") {
        return sec.complex("g", issues).map(|g| Squeezing::Direct { g });
    }
    if !has_physical {
        issues.push(sec.field("g"), "missing required key (or give omega, eta, eta_r, t)");
        return None;
    }
    let mut vals = [0.0; 4];
    let mut ok = true;
    for (slot, key) in vals.iter_mut().zip(physical_keys) {
        let field = sec.field(key);
        let v = sec.required_float(key, issues);
        let v = if key == "t" {
            match v {
                Some(t) if t < 0.0 => {
                    issues.push(field, "must be non-negative");
                    None
                }
                other => other,
            }
        } else {
            positive(v, field, issues)
        };
        match v {
            Some(v) => *slot = v,
            None => ok = false,
        }
    }
    ok.then_some(Squeezing::Physical {
        omega: vals[0],
        eta: vals[1],
        eta_r: vals[2],
        t: vals[3],
    })
}

fn parse_displacement(sec: &mut Section, squeezing: Option<&Squeezing>, issues: &mut Issues) -> Option<Displacement> {
    let direct = sec.has("beta_c") || sec.has("beta_r");
    let timed = sec.has("t_c") || sec.has("t_r");
    if direct && timed {
        issues.push(sec.field("beta_c"), "conflict: give either beta_c/beta_r or t_c/t_r, not both");
        for k in ["beta_c", "beta_r", "t_c", "t_r"] {
            sec.take(k);
        }
        return None;
    }
    if timed {
        if matches!(squeezing, Some(Squeezing::Direct { .. })) {
            issues.push(sec.field("t_c"), "t_c/t_r need omega, eta, eta_r in [squeezing] instead of g");
        }
        let t_c = sec.required_float("t_c", issues);
        let t_r = sec.required_float("t_r", issues);
        for (t, key) in [(t_c, "t_c"), (t_r, "t_r")] {
            if matches!(t, Some(x) if x < 0.0) {
                issues.push(sec.field(key), "must be non-negative");
                return None;
            }
        }
        return Some(Displacement::Timed { t_c: t_c?, t_r: t_r? });
    }
    let mut get = |key: &str, issues: &mut Issues| {
        if !sec.has(key) {
            issues.push(sec.field(key), "missing required key");
            return None;
        }
        sec.complex(key, issues)
    };
    let beta_c = get("beta_c", issues);
    let beta_r = get("beta_r", issues);
    Some(Displacement::Direct {
        beta_c: beta_c?,
        beta_r: beta_r?,
    })
}

fn parse_weights(sec: &mut Section, issues: &mut Issues) -> Option<Vec<[f64; 2]>> {
    let field = sec.field("weights");
    let Some(v) = sec.take("weights") else {
        issues.push(field, "missing required key");
        return None;
    };
    let Value::Array(items) = v else {
        issues.push(field, format!("expected an array, found {}", v.type_str()));
        return None;
    };
    let before = issues.0.len();
    let weights: Vec<[f64; 2]> = items
        .iter()
        .enumerate()
        .filter_map(|(i, w)| as_complex(w, &format!("{field}[{i}]"), issues))
        .collect();
    if items.is_empty() || items.len() % 2 != 0 {
        issues.push(field, format!("needs an even, non-zero number of weights (two per cycle), got {}", items.len()));
        return None;
    }
    (issues.0.len() == before).then_some(weights)
}

fn parse_order(s: &str) -> Option<ExpansionOrder> {
    match s {
        "second" => Some(ExpansionOrder::Second),
        "fourth" => Some(ExpansionOrder::Fourth),
        "exact-cosine" => Some(ExpansionOrder::ExactCosine),
        _ => None,
    }
}

fn optional_positive(sec: &mut Section, key: &str, issues: &mut Issues) -> Result<Option<f64>, ()> {
    if !sec.has(key) {
        return Ok(None);
    }
    let field = sec.field(key);
    let before = issues.0.len();
    let v = positive(sec.float(key, issues), field, issues);
    if issues.0.len() > before {
        Err(())
    } else {
        Ok(v)
    }
}

fn parse_physical(sec: &mut Section, sweep: Option<&Sweep>, issues: &mut Issues) -> Option<PhysicalConfig> {
    let defaults = PhysicalParams::default();
    let mut ok = true;
    if let Some(sweep) = sweep {
        let clashes: &[&str] = match sweep {
            Sweep::Eta(_) => &["eta", "eta_r"],
            Sweep::OmegaOverNu(_) => &["omega"],
        };
        for key in clashes {
            if sec.take(key).is_some() {
                issues.push(sec.field(key), "conflict: this parameter is set by [sweep]");
                ok = false;
            }
        }
    }
    let mut read = |sec: &mut Section, key: &str, issues: &mut Issues| match optional_positive(sec, key, issues) {
        Ok(v) => v,
        Err(()) => {
            ok = false;
            None
        }
    };
    let mass = read(sec, "mass_amu", issues).map_or(defaults.mass, |m| m * AMU);
    let mu = read(sec, "mu", issues).unwrap_or(defaults.mu);
    let nu = read(sec, "nu", issues).unwrap_or(defaults.nu);
    let omega0 = read(sec, "omega0", issues).unwrap_or(defaults.omega0);
    let omega = read(sec, "omega", issues).unwrap_or(defaults.omega);
    let eta = read(sec, "eta", issues).unwrap_or(defaults.eta);
    let eta_r = read(sec, "eta_r", issues);
    let r = {
        let field = sec.field("r");
        positive(sec.required_float("r", issues), field, issues)
    };
    let order = match sec.string("order", issues) {
        None => ExpansionOrder::Second,
        Some(s) => parse_order(&s).unwrap_or_else(|| {
            issues.push(sec.field("order"), format!("unknown order `{s}` (second, fourth, exact-cosine)"));
            ExpansionOrder::Second
        }),
    };
    let params = PhysicalParams::with_lamb_dicke(mass, mu, nu, omega0, omega, eta, eta_r);
    match (ok, r) {
        (true, Some(r)) => Some(PhysicalConfig { params, order, r }),
        _ => None,
    }
}

fn parse_sweep(sec: &mut Section, issues: &mut Issues) -> Option<Sweep> {
    if sec.has("eta") && sec.has("omega_over_nu") {
        issues.push(sec.field("eta"), "conflict: sweep one axis per run (eta or omega_over_nu)");
        sec.take("eta");
        sec.take("omega_over_nu");
        return None;
    }
    let (key, make): (&str, fn(Vec<f64>) -> Sweep) = if sec.has("eta") {
        ("eta", Sweep::Eta)
    } else if sec.has("omega_over_nu") {
        ("omega_over_nu", Sweep::OmegaOverNu)
    } else {
        issues.push(sec.field("eta"), "missing sweep axis (eta or omega_over_nu)");
        return None;
    };
    let field = sec.field(key);
    let values = sec.float_list(key, issues)?;
    if values.is_empty() {
        issues.push(field, "needs at least one value");
        return None;
    }
    if values.iter().any(|&v| v <= 0.0) {
        issues.push(field, "values must be positive");
        return None;
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        issues.push(field, "values must be strictly decreasing");
        return None;
    }
    Some(make(values))
}

fn parse_tolerances(sec: &mut Section, issues: &mut Issues) -> Tolerances {
    let mut tol = Tolerances::default();
    let slots: [(&str, &mut f64); 5] = [
        ("expm", &mut tol.expm),
        ("integrator", &mut tol.integrator),
        ("tail_budget", &mut tol.tail_budget),
        ("tail_margin", &mut tol.tail_margin),
        ("purity", &mut tol.purity),
    ];
    for (key, slot) in slots {
        let field = sec.field(key);
        if let Some(v) = positive(sec.float(key, issues), field.clone(), issues) {
            if key == "tail_margin" && v > 1.0 {
                issues.push(field, "must not exceed 1");
            } else {
                *slot = v;
            }
        }
    }
    tol
}

/// Parses and validates a configuration for `command`.
pub fn parse_config(text: &str, command: Command) -> Result<ProtocolConfig, ConfigErrors> {
    let mut issues = Issues(Vec::new());
    let mut root: Table = match toml::from_str(text) {
        Ok(t) => t,
        Err(e) => {
            return Err(ConfigErrors(vec![ConfigIssue {
                field: "<document>".into(),
                message: e.message().to_string(),
            }]))
        }
    };
    let mut config = ProtocolConfig::defaults(command);

    let mut top = Section {
        name: String::new(),
        table: Table::new(),
    };
    if let Some(v) = root.remove("command") {
        top.table.insert("command".into(), v);
        if let Some(name) = top.string("command", &mut issues) {
            if name != command.name() {
                issues.push("command", format!("conflict: file is for `{name}`, run as `{}`", command.name()));
            }
        }
    }

    let allowed = command.sections();
    let present: Vec<String> = root.keys().cloned().collect();
    for key in &present {
        let known = [
            "space",
            "squeezing",
            "superpose",
            "general",
            "physical",
            "sweep",
            "tolerances",
            "output",
        ];
        if !known.contains(&key.as_str()) {
            issues.push(key.clone(), "unknown key");
            root.remove(key);
        } else if !allowed.contains(&key.as_str()) {
            issues.push(key.clone(), format!("section not used by `{}`", command.name()));
            root.remove(key);
        }
    }

    if let Some(mut sec) = take_section(&mut root, "space", &mut issues) {
        for (key, slot) in [("n_c_cut", &mut config.n_c_cut), ("n_r_cut", &mut config.n_r_cut)] {
            if let Some(v) = sec.integer(key, &mut issues) {
                if v < 1 {
                    issues.push(sec.field(key), format!("must be at least 1, got {v}"));
                } else {
                    *slot = v;
                }
            }
        }
        sec.finish(&mut issues);
    }

    if matches!(command, Command::Squeeze | Command::Superpose | Command::General) {
        match take_section(&mut root, "squeezing", &mut issues) {
            Some(mut sec) => {
                config.squeezing = parse_squeezing(&mut sec, &mut issues);
                sec.finish(&mut issues);
            }
            None if !issues.0.iter().any(|i| i.field == "squeezing") => {
                issues.push("squeezing", "missing required section")
            }
            None => {}
        }
    }
    if command == Command::Superpose {
        match take_section(&mut root, "superpose", &mut issues) {
            Some(mut sec) => {
                config.weights = parse_weights(&mut sec, &mut issues);
                sec.finish(&mut issues);
            }
            None => issues.push("superpose", "missing required section"),
        }
    }
    if command == Command::General {
        match take_section(&mut root, "general", &mut issues) {
            Some(mut sec) => {
                config.displacement = parse_displacement(&mut sec, config.squeezing.as_ref(), &mut issues);
                sec.finish(&mut issues);
            }
            None => issues.push("general", "missing required section"),
        }
    }
    if command == Command::ValidateRwa {
        if let Some(mut sec) = take_section(&mut root, "sweep", &mut issues) {
            config.sweep = parse_sweep(&mut sec, &mut issues);
            sec.finish(&mut issues);
        }
        match take_section(&mut root, "physical", &mut issues) {
            Some(mut sec) => {
                config.physical = parse_physical(&mut sec, config.sweep.as_ref(), &mut issues);
                sec.finish(&mut issues);
            }
            None => issues.push("physical", "missing required section"),
        }
    }

    if let Some(mut sec) = take_section(&mut root, "tolerances", &mut issues) {
        config.tolerances = parse_tolerances(&mut sec, &mut issues);
        sec.finish(&mut issues);
    }
    if let Some(mut sec) = take_section(&mut root, "output", &mut issues) {
        config.output.path = sec.string("path", &mut issues);
        if let Some(f) = sec.string("format", &mut issues) {
            match f.as_str() {
                "json" => config.output.format = Format::Json,
                "csv" => config.output.format = Format::Csv,
                other => issues.push("output.format", format!("unknown format `{other}` (json, csv)")),
            }
        }
        sec.finish(&mut issues);
    }

    if issues.0.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(issues.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(err: &ConfigErrors) -> Vec<&str> {
        err.0.iter().map(|i| i.field.as_str()).collect()
    }

    #[test]
    fn minimal_squeeze_config_uses_default_tolerances() {
        let cfg = parse_config("[space]\nn_c_cut = 20\nn_r_cut = 20\n[squeezing]\ng = [0.0, -0.25]\n", Command::Squeeze).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.squeezing, Some(Squeezing::Direct { g: [0.0, -0.25] }));
        assert_eq!((cfg.n_c_cut, cfg.n_r_cut), (20, 20));
    }

    #[test]
    fn default_cutoffs() {
        let cfg = parse_config("[squeezing]\ng = 0.1\n", Command::Squeeze).unwrap();
        assert_eq!((cfg.n_c_cut, cfg.n_r_cut), (DEFAULT_CUTOFF, DEFAULT_CUTOFF));
    }

    #[test]
    fn odd_weights_name_the_field() {
        let err = parse_config("[squeezing]\ng = 0.1\n[superpose]\nweights = [1.0, [0.0, 1.0], 2.0]\n", Command::Superpose).unwrap_err();
        assert_eq!(fields(&err), ["superpose.weights"]);
    }

    #[test]
    fn g_and_physical_coupling_conflict() {
        let err = parse_config(
            "[squeezing]\ng = 0.1\nomega = 1.0\neta = 0.1\neta_r = 0.1\nt = 1.0\n",
            Command::Squeeze,
        )
        .unwrap_err();
        assert_eq!(fields(&err), ["squeezing.g"]);
        assert!(err.0[0].message.contains("conflict"));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "bogus = 1\n[space]\nn_c_cut = 0\nn_r_cut = \"x\"\n[squeezing]\nomega = -1.0\neta = 0.1\n[tolerances]\nexpm = 0.0\nwhat = 2\n";
        let err = parse_config(text, Command::Squeeze).unwrap_err();
        let f = fields(&err);
        for want in [
            "bogus",
            "space.n_c_cut",
            "space.n_r_cut",
            "squeezing.omega",
            "squeezing.eta_r",
            "squeezing.t",
            "tolerances.expm",
            "tolerances.what",
        ] {
            assert!(f.contains(&want), "{want} missing from {f:?}");
        }
    }

    #[test]
    fn sections_must_match_command() {
        let err = parse_config("[squeezing]\ng = 0.1\n[sweep]\neta = [0.1]\n", Command::Squeeze).unwrap_err();
        assert_eq!(fields(&err), ["sweep"]);
        let err = parse_config("command = \"general\"\n[squeezing]\ng = 0.1\n", Command::Squeeze).unwrap_err();
        assert_eq!(fields(&err), ["command"]);
    }

    #[test]
    fn missing_sections() {
        let err = parse_config("", Command::General).unwrap_err();
        assert_eq!(fields(&err), ["squeezing", "general"]);
        let err = parse_config("", Command::ValidateRwa).unwrap_err();
        assert_eq!(fields(&err), ["physical"]);
        assert!(parse_config("", Command::Conventions).is_ok());
    }

    #[test]
    fn sweep_validation() {
        let base = "[physical]\nr = 0.05\n";
        let cfg = parse_config(&format!("{base}[sweep]\neta = [0.15, 0.1, 0.05]\n"), Command::ValidateRwa).unwrap();
        assert_eq!(cfg.sweep, Some(Sweep::Eta(vec![0.15, 0.1, 0.05])));
        let err = parse_config(&format!("{base}[sweep]\neta = [0.05, 0.1]\n"), Command::ValidateRwa).unwrap_err();
        assert_eq!(fields(&err), ["sweep.eta"]);
        let err = parse_config(
            "[physical]\nr = 0.05\neta = 0.1\n[sweep]\neta = [0.1, 0.05]\n",
            Command::ValidateRwa,
        )
        .unwrap_err();
        assert_eq!(fields(&err), ["physical.eta"]);
        let err = parse_config(&format!("{base}order = \"sixth\"\n"), Command::ValidateRwa).unwrap_err();
        assert_eq!(fields(&err), ["physical.order"]);
    }

    #[test]
    fn timed_displacement_needs_physical_coupling() {
        let err = parse_config("[squeezing]\ng = 0.1\n[general]\nt_c = 1.0\nt_r = 1.0\n", Command::General).unwrap_err();
        assert_eq!(fields(&err), ["general.t_c"]);
        let cfg = parse_config(
            "[squeezing]\nomega = 1.0\neta = 0.1\neta_r = 0.1\nt = 2.0\n[general]\nt_c = 1.0\nt_r = 3.0\n",
            Command::General,
        )
        .unwrap();
        assert_eq!(cfg.displacement, Some(Displacement::Timed { t_c: 1.0, t_r: 3.0 }));
    }

    #[test]
    fn syntax_errors_are_reported() {
        let err = parse_config("[space\n", Command::Squeeze).unwrap_err();
        assert_eq!(fields(&err), ["<document>"]);
    }
}
