//! Scene files: `[section]` headers, `key = value` lines, `#` comments,
//! comma-separated lists. Every section and key is checked against the
//! schema before anything is computed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use reparam_core::backgrounds::PresetSpec;
use reparam_core::brane::DngNormalization;

use crate::CliError;

type Section = BTreeMap<String, (usize, String)>;

/// Raw sections in file order, values still unparsed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    sections: BTreeMap<String, Section>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut ini = Ini::default();
        let mut current: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        config_err(format!("line {line_no}: malformed section header `{line}`"))
                    })?
                    .trim()
                    .to_string();
                if ini.sections.contains_key(&name) {
                    return Err(config_err(format!(
                        "line {line_no}: section [{name}] repeated"
                    )));
                }
                ini.sections.insert(name.clone(), Section::new());
                current = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "line {line_no}: expected `key = value`, got `{line}`"
                ))
            })?;
            let section = current
                .as_ref()
                .ok_or_else(|| config_err(format!("line {line_no}: key outside any section")))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(config_err(format!("line {line_no}: empty key")));
            }
            let entries = ini
                .sections
                .get_mut(section)
                .expect("section inserted above");
            if entries
                .insert(key.clone(), (line_no, value.trim().to_string()))
                .is_some()
            {
                return Err(config_err(format!(
                    "line {line_no}: key `{key}` repeated in [{section}]"
                )));
            }
        }
        Ok(ini)
    }

    /// Canonical text (sorted sections and keys), the input to the config hash.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            for (k, (_, v)) in entries {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        out
    }
}

struct Reader<'a> {
    name: &'a str,
    entries: Section,
}

impl<'a> Reader<'a> {
    fn new(ini: &Ini, name: &'a str, allowed: &[&str]) -> Result<Option<Self>, CliError> {
        let Some(entries) = ini.sections.get(name) else {
            return Ok(None);
        };
        if let Some((k, (line, _))) = entries.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(config_err(format!(
                "line {line}: unknown key `{k}` in [{name}]"
            )));
        }
        Ok(Some(Reader {
            name,
            entries: entries.clone(),
        }))
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(|(_, v)| v.clone())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|(line, v)| {
                parse_f64(v)
                    .map_err(|e| config_err(format!("line {line}: [{}] {key}: {e}", self.name)))
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.raw(key)
            .map(|(line, v)| {
                v.parse::<usize>().map_err(|_| {
                    config_err(format!(
                        "line {line}: [{}] {key}: `{v}` is not a count",
                        self.name
                    ))
                })
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|(line, v)| {
                parse_list(v)
                    .map_err(|e| config_err(format!("line {line}: [{}] {key}: {e}", self.name)))
            })
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        self.raw(key)
            .map(|(line, v)| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(config_err(format!(
                    "line {line}: [{}] {key}: expected true or false",
                    self.name
                ))),
            })
            .transpose()
    }

    fn require<T>(&self, key: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| config_err(format!("[{}] requires `{key}`", self.name)))
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| parse_f64(p.trim())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Root,
    Monomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianConfig {
    /// Orders of the preset's terms to keep; all when absent.
    pub orders: Option<Vec<usize>>,
    pub weights: Option<Vec<f64>>,
    pub form: Form,
    pub power: f64,
    pub expected_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaugeKind {
    ProperTime,
    TermConst(usize),
    LagrangianConst,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub tau0: f64,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateConfig {
    pub step: f64,
    pub n_steps: usize,
    pub renormalize: bool,
    /// Largest accepted `|drift|` of the gauge quantity.
    pub drift_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "jsonl" => Some(Format::Jsonl),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Unset means the command's default: JSONL trajectories, CSV sweeps.
    pub format: Option<Format>,
    pub emit_monitors: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseConfig {
    pub n_states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    FlatSheet,
    Cylinder,
    WaveSheet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BraneConfig {
    pub embedding: EmbeddingKind,
    pub rho: f64,
    pub amplitude: f64,
    pub tension: f64,
    pub one_form: Option<Vec<f64>>,
    pub normalization: DngNormalization,
    pub zetas: usize,
    pub cb_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub order: usize,
    pub panels: usize,
    pub refine: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    V0,
    Step,
    N,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    RadialAccel,
    GaugeDifference,
    StepError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub observable: Observable,
    pub values: Vec<f64>,
    pub geometric: bool,
    /// Velocity component replaced by a `v0` sweep.
    pub component: usize,
    pub tau_end: f64,
    /// When set, the fitted slope is checked against it.
    pub expected_slope: Option<f64>,
    pub slope_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub target: PresetSpec,
    pub lagrangian: LagrangianConfig,
    pub gauge: GaugeKind,
    pub initial: Option<InitialConfig>,
    pub integrate: IntegrateConfig,
    pub output: OutputConfig,
    pub diagnose: DiagnoseConfig,
    pub brane: Option<BraneConfig>,
    pub quadrature: QuadratureConfig,
    pub sweep: Option<SweepConfig>,
    /// Canonical text of the parsed file.
    pub canonical: String,
}

const SECTIONS: [&str; 10] = [
    "target",
    "lagrangian",
    "gauge",
    "initial",
    "integrate",
    "output",
    "diagnose",
    "brane",
    "quadrature",
    "sweep",
];

impl SceneConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::parse(text)?;
        if let Some(s) = ini
            .sections
            .keys()
            .find(|s| !SECTIONS.contains(&s.as_str()))
        {
            return Err(config_err(format!("unknown section [{s}]")));
        }
        Ok(SceneConfig {
            target: parse_target(&ini)?,
            lagrangian: parse_lagrangian(&ini)?,
            gauge: parse_gauge(&ini)?,
            initial: parse_initial(&ini)?,
            integrate: parse_integrate(&ini)?,
            output: parse_output(&ini)?,
            diagnose: parse_diagnose(&ini)?,
            brane: parse_brane(&ini)?,
            quadrature: parse_quadrature(&ini)?,
            sweep: parse_sweep(&ini)?,
            canonical: ini.canonical(),
        })
    }

    pub fn initial(&self) -> Result<&InitialConfig, CliError> {
        self.initial
            .as_ref()
            .ok_or_else(|| config_err("scene has no [initial] section"))
    }
}

fn parse_target(ini: &Ini) -> Result<PresetSpec, CliError> {
    let entries = ini
        .sections
        .get("target")
        .ok_or_else(|| config_err("scene has no [target] section"))?;
    let (_, preset) = entries
        .get("preset")
        .ok_or_else(|| config_err("[target] requires `preset`"))?;
    let known = PresetSpec::known_params(preset)
        .ok_or_else(|| config_err(format!("unknown preset `{preset}`")))?;
    let mut allowed = vec!["preset"];
    allowed.extend_from_slice(known);
    let r = Reader::new(ini, "target", &allowed)?.expect("section exists");
    let mut spec = PresetSpec::new(preset.clone());
    for key in known {
        if let Some(values) = r.list(key)? {
            spec = spec.with_list(key, &values);
        }
    }
    Ok(spec)
}

fn parse_lagrangian(ini: &Ini) -> Result<LagrangianConfig, CliError> {
    let mut cfg = LagrangianConfig {
        orders: None,
        weights: None,
        form: Form::Root,
        power: 1.0,
        expected_degree: 1.0,
    };
    let Some(r) = Reader::new(
        ini,
        "lagrangian",
        &["orders", "weights", "form", "power", "expected_degree"],
    )?
    else {
        return Ok(cfg);
    };
    if let Some(orders) = r.list("orders")? {
        let orders = orders
            .iter()
            .map(|o| {
                if o.fract() == 0.0 && (1.0..=6.0).contains(o) {
                    Ok(*o as usize)
                } else {
                    Err(config_err(format!(
                        "[lagrangian] order {o} must be an integer in 1..=6"
                    )))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        cfg.orders = Some(orders);
    }
    cfg.weights = r.list("weights")?;
    if let (Some(o), Some(w)) = (&cfg.orders, &cfg.weights) {
        if o.len() != w.len() {
            return Err(config_err(
                "[lagrangian] `weights` must match `orders` in length",
            ));
        }
    }
    if let Some(form) = r.string("form") {
        cfg.form = match form.as_str() {
            "root" => Form::Root,
            "monomial" => Form::Monomial,
            other => return Err(config_err(format!("[lagrangian] unknown form `{other}`"))),
        };
    }
    if let Some(p) = r.f64("power")? {
        cfg.power = p;
    }
    cfg.expected_degree = r.f64("expected_degree")?.unwrap_or(cfg.power);
    Ok(cfg)
}

fn parse_gauge(ini: &Ini) -> Result<GaugeKind, CliError> {
    let Some(r) = Reader::new(ini, "gauge", &["kind", "order"])? else {
        return Ok(GaugeKind::ProperTime);
    };
    let kind = r.require("kind", r.string("kind"))?;
    let order = r.usize("order")?;
    let g = match kind.as_str() {
        "proper_time" => GaugeKind::ProperTime,
        "term_const" => GaugeKind::TermConst(r.require("order", order)?),
        "lagrangian_const" => GaugeKind::LagrangianConst,
        "direct" => GaugeKind::Direct,
        other => return Err(config_err(format!("[gauge] unknown kind `{other}`"))),
    };
    if order.is_some() && !matches!(g, GaugeKind::TermConst(_)) {
        return Err(config_err("[gauge] `order` only applies to term_const"));
    }
    Ok(g)
}

fn parse_initial(ini: &Ini) -> Result<Option<InitialConfig>, CliError> {
    let Some(r) = Reader::new(ini, "initial", &["tau0", "x0", "v0"])? else {
        return Ok(None);
    };
    let x0 = r.require("x0", r.list("x0")?)?;
    let v0 = r.require("v0", r.list("v0")?)?;
    if x0.len() != v0.len() {
        return Err(config_err("[initial] x0 and v0 differ in length"));
    }
    Ok(Some(InitialConfig {
        tau0: r.f64("tau0")?.unwrap_or(0.0),
        x0,
        v0,
    }))
}

fn parse_integrate(ini: &Ini) -> Result<IntegrateConfig, CliError> {
    let mut cfg = IntegrateConfig {
        step: 1e-3,
        n_steps: 1000,
        renormalize: false,
        drift_tol: 1e-6,
    };
    let Some(r) = Reader::new(
        ini,
        "integrate",
        &["step", "n_steps", "drift_policy", "drift_tol"],
    )?
    else {
        return Ok(cfg);
    };
    if let Some(h) = r.f64("step")? {
        if h <= 0.0 {
            return Err(config_err("[integrate] step must be positive"));
        }
        cfg.step = h;
    }
    if let Some(n) = r.usize("n_steps")? {
        cfg.n_steps = n;
    }
    if let Some(t) = r.f64("drift_tol")? {
        cfg.drift_tol = t;
    }
    if let Some(p) = r.string("drift_policy") {
        cfg.renormalize = match p.as_str() {
            "off" => false,
            "renormalize" => true,
            other => {
                return Err(config_err(format!(
                    "[integrate] unknown drift_policy `{other}`"
                )))
            }
        };
    }
    Ok(cfg)
}

fn parse_output(ini: &Ini) -> Result<OutputConfig, CliError> {
    let mut cfg = OutputConfig {
        path: None,
        format: None,
        emit_monitors: true,
    };
    let Some(r) = Reader::new(ini, "output", &["path", "format", "emit_monitors"])? else {
        return Ok(cfg);
    };
    cfg.path = r.string("path").map(PathBuf::from);
    if let Some(f) = r.string("format") {
        cfg.format = Some(
            Format::parse(&f)
                .ok_or_else(|| config_err(format!("[output] unknown format `{f}`")))?,
        );
    }
    if let Some(b) = r.bool("emit_monitors")? {
        cfg.emit_monitors = b;
    }
    Ok(cfg)
}

fn parse_diagnose(ini: &Ini) -> Result<DiagnoseConfig, CliError> {
    let mut cfg = DiagnoseConfig { n_states: 100 };
    if let Some(r) = Reader::new(ini, "diagnose", &["n_states"])? {
        if let Some(n) = r.usize("n_states")? {
            if n == 0 {
                return Err(config_err("[diagnose] n_states must be positive"));
            }
            cfg.n_states = n;
        }
    }
    Ok(cfg)
}

fn parse_brane(ini: &Ini) -> Result<Option<BraneConfig>, CliError> {
    let Some(r) = Reader::new(
        ini,
        "brane",
        &[
            "embedding",
            "rho",
            "amplitude",
            "tension",
            "one_form",
            "normalization",
            "zetas",
            "cb_points",
        ],
    )?
    else {
        return Ok(None);
    };
    let embedding = match r.require("embedding", r.string("embedding"))?.as_str() {
        "flat_sheet" => EmbeddingKind::FlatSheet,
        "cylinder" => EmbeddingKind::Cylinder,
        "wave_sheet" => EmbeddingKind::WaveSheet,
        other => return Err(config_err(format!("[brane] unknown embedding `{other}`"))),
    };
    let normalization = match r.string("normalization") {
        None => DngNormalization::default(),
        Some(s) => DngNormalization::parse(&s)
            .ok_or_else(|| config_err(format!("[brane] unknown normalization `{s}`")))?,
    };
    let rho = r.f64("rho")?.unwrap_or(1.0);
    if rho <= 0.0 {
        return Err(config_err("[brane] rho must be positive"));
    }
    Ok(Some(BraneConfig {
        embedding,
        rho,
        amplitude: r.f64("amplitude")?.unwrap_or(0.2),
        tension: r.f64("tension")?.unwrap_or(1.0),
        one_form: r.list("one_form")?,
        normalization,
        zetas: r.usize("zetas")?.unwrap_or(5),
        cb_points: r.usize("cb_points")?.unwrap_or(20),
    }))
}

fn parse_quadrature(ini: &Ini) -> Result<QuadratureConfig, CliError> {
    let mut cfg = QuadratureConfig {
        order: 8,
        panels: 2,
        refine: 3,
        tol: 1e-10,
    };
    if let Some(r) = Reader::new(ini, "quadrature", &["order", "panels", "refine", "tol"])? {
        cfg.order = r.usize("order")?.unwrap_or(cfg.order);
        cfg.panels = r.usize("panels")?.unwrap_or(cfg.panels);
        cfg.refine = r.usize("refine")?.unwrap_or(cfg.refine);
        cfg.tol = r.f64("tol")?.unwrap_or(cfg.tol);
    }
    if cfg.order == 0 || cfg.order > 64 || cfg.panels == 0 {
        return Err(config_err(
            "[quadrature] order must be in 1..=64 and panels positive",
        ));
    }
    Ok(cfg)
}

fn parse_sweep(ini: &Ini) -> Result<Option<SweepConfig>, CliError> {
    let Some(r) = Reader::new(
        ini,
        "sweep",
        &[
            "variable",
            "observable",
            "values",
            "start",
            "stop",
            "points",
            "spacing",
            "component",
            "tau_end",
            "expected_slope",
            "slope_tol",
        ],
    )?
    else {
        return Ok(None);
    };
    let variable = match r.require("variable", r.string("variable"))?.as_str() {
        "v0" => SweepVariable::V0,
        "step" => SweepVariable::Step,
        "n" => SweepVariable::N,
        "delta" => SweepVariable::Delta,
        other => return Err(config_err(format!("[sweep] unknown variable `{other}`"))),
    };
    let observable = match r.string("observable").as_deref() {
        Some("radial_accel") => Observable::RadialAccel,
        Some("gauge_difference") => Observable::GaugeDifference,
        Some("step_error") => Observable::StepError,
        None if variable == SweepVariable::Step => Observable::StepError,
        None => Observable::RadialAccel,
        Some(other) => return Err(config_err(format!("[sweep] unknown observable `{other}`"))),
    };
    if (variable == SweepVariable::Step) != (observable == Observable::StepError) {
        return Err(config_err(
            "[sweep] step_error goes with a step sweep and only with it",
        ));
    }
    let spacing = r.string("spacing");
    let geometric = match spacing.as_deref() {
        None | Some("geometric") => true,
        Some("linear") => false,
        Some(other) => return Err(config_err(format!("[sweep] unknown spacing `{other}`"))),
    };
    let values = match r.list("values")? {
        Some(v) => {
            if r.raw("start").is_some() || r.raw("stop").is_some() || r.raw("points").is_some() {
                return Err(config_err(
                    "[sweep] give either `values` or start/stop/points",
                ));
            }
            v
        }
        None => {
            let start = r.require("start", r.f64("start")?)?;
            let stop = r.require("stop", r.f64("stop")?)?;
            let points = r.require("points", r.usize("points")?)?;
            if points < 2 {
                return Err(config_err("[sweep] points must be at least 2"));
            }
            if geometric && (start <= 0.0 || stop <= 0.0) {
                return Err(config_err(
                    "[sweep] geometric spacing needs positive endpoints",
                ));
            }
            (0..points)
                .map(|i| {
                    let f = i as f64 / (points - 1) as f64;
                    if geometric {
                        (start.ln() + f * (stop.ln() - start.ln())).exp()
                    } else {
                        start + f * (stop - start)
                    }
                })
                .collect()
        }
    };
    if values.is_empty() {
        return Err(config_err("[sweep] no values"));
    }
    Ok(Some(SweepConfig {
        variable,
        observable,
        values,
        geometric,
        component: r.usize("component")?.unwrap_or(1),
        tau_end: r.f64("tau_end")?.unwrap_or(1.0),
        expected_slope: r.f64("expected_slope")?,
        slope_tol: r.f64("slope_tol")?.unwrap_or(0.1),
    }))
}
