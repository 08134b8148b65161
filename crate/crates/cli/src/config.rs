//! JSON run configuration: parsing, defaults and validation.
//!
//! Every violated constraint is collected before reporting, so one pass over
//! a broken document lists all of its problems.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use squeezelab_core::hamiltonians::{effective_from_raman, EffectiveParams, RamanParams};
use squeezelab_core::revivals::Convention;
use squeezelab_core::states::SqueezingParam;

use crate::CliError;

pub const DEFAULT_CUTOFF: usize = 48;
pub const MIN_CUTOFF: usize = 4;
/// Largest per-mode cutoff a run will attempt.
pub const MAX_CUTOFF: usize = 200;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Spectrum,
    Evolve,
    Revival,
    Adiabatic,
    Validity,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Evolve => "evolve",
            Experiment::Revival => "revival",
            Experiment::Adiabatic => "adiabatic",
            Experiment::Validity => "validity",
        }
    }
}

/// Which two-mode state the b-mode evolution starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|xi> (x) |-xi>`, the b-mode image of the revival ladder state.
    #[default]
    ProductOpposite,
    /// `|xi> (x) |xi>`.
    ProductSame,
    /// Two-mode squeezed vacuum `S2(xi)|0,0>` in the b modes.
    TwoMode,
}

impl InitialState {
    pub fn name(&self) -> &'static str {
        match self {
            InitialState::ProductOpposite => "product_opposite",
            InitialState::ProductSame => "product_same",
            InitialState::TwoMode => "two_mode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
enum ConventionName {
    #[serde(rename = "derived")]
    Derived,
    #[serde(rename = "paper-literal", alias = "paper_literal")]
    PaperLiteral,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    params: Option<RawParams>,
    squeezing: Option<RawSqueezing>,
    cutoff: Option<i64>,
    tau_grid: Option<Vec<f64>>,
    t_grid: Option<Vec<f64>>,
    revival: Option<RawRevival>,
    initial_state: Option<InitialState>,
    output_dir: Option<PathBuf>,
    tolerances: Option<RawTolerances>,
    validity: Option<RawValidity>,
    adiabatic: Option<RawAdiabatic>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    g: Option<f64>,
    q: Option<f64>,
    chi: Option<f64>,
    g1: Option<f64>,
    g2: Option<f64>,
    g1_phase: Option<f64>,
    g2_phase: Option<f64>,
    delta: Option<f64>,
    delta1: Option<f64>,
    delta2: Option<f64>,
    #[serde(alias = "lambda11")]
    lambda1: Option<f64>,
    #[serde(alias = "lambda22")]
    lambda2: Option<f64>,
    #[serde(alias = "lambda33")]
    lambda3: Option<f64>,
    lambda12: Option<f64>,
    lambda13: Option<f64>,
    lambda23: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSqueezing {
    r: f64,
    #[serde(default)]
    theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRevival {
    #[serde(rename = "N", alias = "n")]
    n: i64,
    #[serde(rename = "M", alias = "m")]
    m: i64,
    convention: Option<ConventionName>,
    q: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    fidelity: Option<f64>,
    spectrum: Option<f64>,
    conservation: Option<f64>,
    mid_population: Option<f64>,
    adiabatic_fidelity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidity {
    scattering_length: f64,
    trap_size: f64,
    atoms: i64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdiabatic {
    ratios: Option<Vec<f64>>,
    samples: Option<i64>,
    max_sector: Option<i64>,
    gt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Effective(EffectiveParams),
    Raman(RamanParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    T(Vec<f64>),
    Tau(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalSettings {
    pub n: u64,
    pub m: u64,
    /// Convention whose fidelity the run asserts; both are always reported.
    pub convention: Convention,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub fidelity: f64,
    pub spectrum: f64,
    pub conservation: f64,
    pub mid_population: f64,
    pub adiabatic_fidelity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fidelity: 1e-8,
            spectrum: 1e-10,
            conservation: 1e-10,
            mid_population: 1e-3,
            adiabatic_fidelity: 0.99,
        }
    }
}

/// Condensate geometry for the single-mode validity estimate, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityParams {
    pub scattering_length: f64,
    pub trap_size: f64,
    pub atoms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticSettings {
    /// Detuning in units of `|g1|`.
    pub ratios: Vec<f64>,
    pub samples: usize,
    pub max_sector: usize,
    /// Evolution time in units of `1/|g|`, `g` the effective tunnelling.
    pub gt: f64,
}

impl Default for AdiabaticSettings {
    fn default() -> Self {
        AdiabaticSettings { ratios: vec![20.0, 200.0, 2000.0], samples: 40, max_sector: 6, gt: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: Option<ModelParams>,
    pub squeezing: SqueezingParam,
    pub cutoff: usize,
    pub grid: Option<TimeGrid>,
    pub revival: Option<RevivalSettings>,
    pub initial_state: InitialState,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub validity: Option<ValidityParams>,
    pub adiabatic: AdiabaticSettings,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub cutoff: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

pub fn parse_config(document: &str) -> Result<RunConfig, CliError> {
    parse_config_with(document, &Overrides::default())
}

pub fn parse_config_with(document: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig =
        serde_json::from_str(document).map_err(|e| CliError::Config(vec![format!("document: {e}")]))?;
    validate(raw, overrides)
}

struct Violations(Vec<String>);

impl Violations {
    fn push(&mut self, field: &str, message: impl std::fmt::Display) {
        self.0.push(format!("{field}: {message}"));
    }

    fn finite(&mut self, field: &str, value: f64) -> f64 {
        if !value.is_finite() {
            self.push(field, "must be finite");
        }
        value
    }

    fn positive(&mut self, field: &str, value: f64) -> f64 {
        if !(value.is_finite() && value > 0.0) {
            self.push(field, format!("must be a positive finite number, got {value}"));
        }
        value
    }

    fn grid(&mut self, field: &str, values: &[f64]) {
        if values.is_empty() {
            self.push(field, "must not be empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            self.push(field, "entries must be finite");
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            self.push(field, "must be sorted ascending");
        }
    }
}

fn validate(raw: RawConfig, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut v = Violations(Vec::new());

    let experiment = match (raw.experiment, overrides.experiment) {
        (Some(doc), Some(cli)) if doc != cli => {
            v.push("experiment", format!("document says {}, command is {}", doc.name(), cli.name()));
            cli
        }
        (_, Some(cli)) => cli,
        (Some(doc), None) => doc,
        (None, None) => {
            v.push("experiment", "missing (set it in the document or use a subcommand)");
            Experiment::Validity
        }
    };

    let cutoff = match overrides.cutoff.map(|c| c as i64).or(raw.cutoff) {
        None => DEFAULT_CUTOFF,
        Some(c) if c < MIN_CUTOFF as i64 => {
            v.push("cutoff", format!("must be at least {MIN_CUTOFF}, got {c}"));
            DEFAULT_CUTOFF
        }
        Some(c) if c > MAX_CUTOFF as i64 => {
            v.push("cutoff", format!("{c} exceeds the supported maximum {MAX_CUTOFF}"));
            DEFAULT_CUTOFF
        }
        Some(c) => c as usize,
    };

    let squeezing = match raw.squeezing {
        None => SqueezingParam::new(0.5, 0.0).expect("default squeezing is valid"),
        Some(s) => {
            let r = v.finite("squeezing.r", s.r);
            let theta = v.finite("squeezing.theta", s.theta);
            if r < 0.0 {
                v.push("squeezing.r", "must be non-negative");
            }
            SqueezingParam::new(r, theta).unwrap_or_else(|_| SqueezingParam::vacuum())
        }
    };

    let params = raw.params.map(|p| model_params(p, &mut v));

    let mut tolerances = Tolerances::default();
    if let Some(t) = raw.tolerances {
        let fields = [
            ("tolerances.fidelity", t.fidelity, &mut tolerances.fidelity),
            ("tolerances.spectrum", t.spectrum, &mut tolerances.spectrum),
            ("tolerances.conservation", t.conservation, &mut tolerances.conservation),
            ("tolerances.mid_population", t.mid_population, &mut tolerances.mid_population),
            ("tolerances.adiabatic_fidelity", t.adiabatic_fidelity, &mut tolerances.adiabatic_fidelity),
        ];
        for (field, value, slot) in fields {
            if let Some(x) = value {
                *slot = v.positive(field, x);
            }
        }
    }

    let revival = raw.revival.map(|r| {
        let q = v.finite("revival.q", r.q.unwrap_or(0.1));
        if q == 0.0 {
            v.push("revival.q", "must be nonzero");
        }
        if r.n < 1 {
            v.push("revival.N", "must be a positive integer");
        }
        if r.m < 1 {
            v.push("revival.M", "must be a positive integer");
        }
        let (n, m) = (r.n.max(1) as u64, r.m.max(1) as u64);
        if r.n >= 1 && r.m >= 1 {
            if gcd(n, m) != 1 {
                v.push("revival", format!("N = {n} and M = {m} must be coprime"));
            }
            if m > n {
                v.push("revival.M", "must not exceed N (revival time 2 pi M/N lies in (0, 2 pi])");
            }
        }
        let convention = match r.convention {
            Some(ConventionName::PaperLiteral) => Convention::PaperLiteral,
            _ => Convention::Derived,
        };
        RevivalSettings { n, m, convention, q }
    });

    let grid = match (raw.t_grid, raw.tau_grid) {
        (Some(_), Some(_)) => {
            v.push("t_grid", "give either t_grid or tau_grid, not both");
            None
        }
        (Some(t), None) => {
            v.grid("t_grid", &t);
            Some(TimeGrid::T(t))
        }
        (None, Some(tau)) => {
            v.grid("tau_grid", &tau);
            Some(TimeGrid::Tau(tau))
        }
        (None, None) => None,
    };

    let validity = raw.validity.map(|p| {
        let scattering_length = v.positive("validity.scattering_length", p.scattering_length);
        let trap_size = v.positive("validity.trap_size", p.trap_size);
        if p.atoms < 0 {
            v.push("validity.atoms", "must be non-negative");
        }
        ValidityParams { scattering_length, trap_size, atoms: p.atoms.max(0) as u64 }
    });

    let mut adiabatic = AdiabaticSettings::default();
    if let Some(a) = raw.adiabatic {
        if let Some(ratios) = a.ratios {
            v.grid("adiabatic.ratios", &ratios);
            if ratios.iter().any(|r| *r <= 0.0) {
                v.push("adiabatic.ratios", "must be positive");
            }
            adiabatic.ratios = ratios;
        }
        if let Some(s) = a.samples {
            if s < 20 {
                v.push("adiabatic.samples", format!("must be at least 20, got {s}"));
            }
            adiabatic.samples = s.max(20) as usize;
        }
        if let Some(s) = a.max_sector {
            if s < 0 {
                v.push("adiabatic.max_sector", "must be non-negative");
            }
            adiabatic.max_sector = s.max(0) as usize;
        }
        if let Some(gt) = a.gt {
            adiabatic.gt = v.positive("adiabatic.gt", gt);
        }
    }

    match experiment {
        Experiment::Spectrum | Experiment::Evolve => match params {
            None => v.push("params", format!("required for {}", experiment.name())),
            Some(ModelParams::Raman(p)) => {
                if let Err(e) = effective_from_raman(&p) {
                    v.push("params", format!("cannot reduce to (g, q, chi): {e}"));
                }
            }
            Some(ModelParams::Effective(_)) => {}
        },
        Experiment::Adiabatic => match params {
            Some(ModelParams::Raman(p)) => {
                if p.g1.norm() == 0.0 {
                    v.push("params.g1", "must be nonzero for an adiabatic sweep");
                }
            }
            _ => v.push("params", "adiabatic needs Raman couplings {g1, g2, lambda...}"),
        },
        Experiment::Revival => {
            if revival.is_none() {
                v.push("revival", "required for revival");
            }
            if matches!(grid, Some(TimeGrid::T(_))) {
                v.push("t_grid", "revival runs are indexed by tau; use tau_grid");
            }
        }
        Experiment::Validity => {
            if validity.is_none() {
                v.push("validity", "required for validity");
            }
        }
    }
    if experiment == Experiment::Evolve {
        match &grid {
            None => v.push("t_grid", "evolve needs t_grid or tau_grid"),
            Some(TimeGrid::Tau(_)) => {
                if let Some(ModelParams::Effective(p)) = params {
                    if p.q == 0.0 {
                        v.push("tau_grid", "tau = 7 q t needs q != 0; use t_grid");
                    }
                }
            }
            Some(TimeGrid::T(_)) => {}
        }
    }

    if !v.0.is_empty() {
        return Err(CliError::Config(v.0));
    }
    Ok(RunConfig {
        experiment,
        params,
        squeezing,
        cutoff,
        grid,
        revival,
        initial_state: raw.initial_state.unwrap_or_default(),
        output_dir: overrides
            .output_dir
            .clone()
            .or(raw.output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        tolerances,
        validity,
        adiabatic,
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn model_params(p: RawParams, v: &mut Violations) -> ModelParams {
    let effective = [p.g, p.q, p.chi].iter().any(Option::is_some);
    let raman = [
        p.g1, p.g2, p.g1_phase, p.g2_phase, p.delta, p.delta1, p.delta2, p.lambda1, p.lambda2, p.lambda3, p.lambda12,
        p.lambda13, p.lambda23,
    ]
    .iter()
    .any(Option::is_some);

    if effective && raman {
        v.push("params", "mixes effective {g, q, chi} and Raman {g1, g2, ...} keys");
    }
    if effective || !raman {
        let mut get = |name: &str, x: Option<f64>| match x {
            Some(x) => v.finite(&format!("params.{name}"), x),
            None => {
                v.push(&format!("params.{name}"), "missing");
                0.0
            }
        };
        let (g, q, chi) = (get("g", p.g), get("q", p.q), get("chi", p.chi));
        return ModelParams::Effective(EffectiveParams::new(g, q, chi).unwrap_or(EffectiveParams {
            g: 0.0,
            q: 0.0,
            chi: 0.0,
        }));
    }

    if p.g1.is_none() || p.g2.is_none() {
        v.push("params", "Raman parameters need both g1 and g2");
    }
    let both_detunings = p.delta.is_some() && (p.delta1.is_some() || p.delta2.is_some());
    if both_detunings {
        v.push("params.delta", "give delta or delta1/delta2, not both");
    }
    let mut num = |name: &str, x: Option<f64>| v.finite(&format!("params.{name}"), x.unwrap_or(0.0));
    let g1 = Complex64::from_polar(num("g1", p.g1), num("g1_phase", p.g1_phase));
    let g2 = Complex64::from_polar(num("g2", p.g2), num("g2_phase", p.g2_phase));
    let (delta1, delta2) = match p.delta {
        Some(d) if !both_detunings => {
            let d = num("delta", Some(d));
            (d, d)
        }
        _ => (num("delta1", p.delta1), num("delta2", p.delta2)),
    };
    ModelParams::Raman(RamanParams {
        g1,
        g2,
        delta1,
        delta2,
        lambda1: num("lambda1", p.lambda1),
        lambda2: num("lambda2", p.lambda2),
        lambda3: num("lambda3", p.lambda3),
        lambda12: num("lambda12", p.lambda12),
        lambda13: num("lambda13", p.lambda13),
        lambda23: num("lambda23", p.lambda23),
    })
}

impl RunConfig {
    /// `(g, q, chi)` for the two-mode experiments, reducing Raman couplings
    /// when needed.
    pub fn effective_params(&self) -> Result<EffectiveParams, CliError> {
        match self.params {
            Some(ModelParams::Effective(p)) => Ok(p),
            Some(ModelParams::Raman(p)) => Ok(effective_from_raman(&p)?),
            None => Err(CliError::Config(vec!["params: missing".into()])),
        }
    }

    /// Evolution times `t`, converting a tau grid with `tau = 7 q t`.
    pub fn times(&self, q: f64) -> Vec<f64> {
        match &self.grid {
            Some(TimeGrid::T(t)) => t.clone(),
            Some(TimeGrid::Tau(tau)) => tau.iter().map(|x| x / (7.0 * q)).collect(),
            None => Vec::new(),
        }
    }

    /// Fully resolved configuration, defaults included, for the manifest.
    pub fn to_json(&self) -> Value {
        let params = match self.params {
            None => Value::Null,
            Some(ModelParams::Effective(p)) => json!({ "g": p.g, "q": p.q, "chi": p.chi }),
            Some(ModelParams::Raman(p)) => json!({
                "g1": p.g1.norm(), "g1_phase": p.g1.arg(),
                "g2": p.g2.norm(), "g2_phase": p.g2.arg(),
                "delta1": p.delta1, "delta2": p.delta2,
                "lambda1": p.lambda1, "lambda2": p.lambda2, "lambda3": p.lambda3,
                "lambda12": p.lambda12, "lambda13": p.lambda13, "lambda23": p.lambda23,
            }),
        };
        let (grid_key, grid) = match &self.grid {
            None => ("t_grid", Value::Null),
            Some(TimeGrid::T(t)) => ("t_grid", json!(t)),
            Some(TimeGrid::Tau(t)) => ("tau_grid", json!(t)),
        };
        let revival = self
            .revival
            .map_or(Value::Null, |r| json!({ "N": r.n, "M": r.m, "convention": r.convention.name(), "q": r.q }));
        let validity = self.validity.map_or(
            Value::Null,
            |p| json!({ "scattering_length": p.scattering_length, "trap_size": p.trap_size, "atoms": p.atoms }),
        );
        let t = &self.tolerances;
        json!({
            "experiment": self.experiment.name(),
            "params": params,
            "squeezing": { "r": self.squeezing.r(), "theta": self.squeezing.theta() },
            "cutoff": self.cutoff,
            grid_key: grid,
            "revival": revival,
            "initial_state": self.initial_state.name(),
            "tolerances": {
                "fidelity": t.fidelity,
                "spectrum": t.spectrum,
                "conservation": t.conservation,
                "mid_population": t.mid_population,
                "adiabatic_fidelity": t.adiabatic_fidelity,
            },
            "validity": validity,
            "adiabatic": {
                "ratios": self.adiabatic.ratios,
                "samples": self.adiabatic.samples,
                "max_sector": self.adiabatic.max_sector,
                "gt": self.adiabatic.gt,
            },
        })
    }
}
