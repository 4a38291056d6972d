//! `key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Every key is optional; see
//! [`RunConfig::default`] for the defaults.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::adaptivity::Thresholds;
use crate::dg::{FrictionLaw, PhysParams};
use crate::error::{ConfigError, Error};
use crate::executor::Granularity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    DamBreakStatic,
    DamBreakDynamic,
    StillWater,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::DamBreakStatic => "dam_break_static",
            Scenario::DamBreakDynamic => "dam_break_dynamic",
            Scenario::StillWater => "still_water",
        }
    }

    pub fn is_dynamic(self) -> bool {
        self == Scenario::DamBreakDynamic
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dam_break_static" => Ok(Scenario::DamBreakStatic),
            "dam_break_dynamic" => Ok(Scenario::DamBreakDynamic),
            "still_water" => Ok(Scenario::StillWater),
            other => Err(format!(
                "unknown scenario `{other}` (expected dam_break_static, dam_break_dynamic or still_water)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    LaneA,
    LaneB,
    Heterogeneous,
    MeasureThenOptimize,
}

impl ExecMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecMode::LaneA => "lane_a",
            ExecMode::LaneB => "lane_b",
            ExecMode::Heterogeneous => "heterogeneous",
            ExecMode::MeasureThenOptimize => "measure_then_optimize",
        }
    }
}

impl FromStr for ExecMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lane_a" => Ok(ExecMode::LaneA),
            "lane_b" => Ok(ExecMode::LaneB),
            "heterogeneous" => Ok(ExecMode::Heterogeneous),
            "measure_then_optimize" => Ok(ExecMode::MeasureThenOptimize),
            other => Err(format!(
                "unknown mode `{other}` (expected lane_a, lane_b, heterogeneous or measure_then_optimize)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub nx: usize,
    pub perturbation: f64,
    pub seed: u64,
    /// Higher order `p`; the base order is `p - 1`.
    pub order: usize,
    /// Base and correction as separate kernels (`true`) or one full-order pass.
    pub separated: bool,
    /// Every `fraction`-th element uses order `p` (static runs); 0 means none.
    pub fraction: usize,
    pub theta_refine: f64,
    pub theta_coarsen: f64,
    pub dt: f64,
    pub steps: usize,
    pub params: PhysParams,
    pub mode: ExecMode,
    pub granularity: Granularity,
    pub warmup: usize,
    pub measure_substeps: usize,
    pub schedule: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub timings: Option<PathBuf>,
    pub schedule_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::StillWater,
            nx: 16,
            perturbation: 0.2,
            seed: 1,
            order: 1,
            separated: true,
            fraction: 32,
            theta_refine: 1e-3,
            theta_coarsen: 2e-4,
            dt: 1e-5,
            steps: 100,
            params: PhysParams::dam_break(),
            mode: ExecMode::LaneA,
            granularity: Granularity::Layer,
            warmup: 10,
            measure_substeps: 200,
            schedule: None,
            snapshot: None,
            timings: None,
            schedule_out: None,
        }
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "nx",
    "perturbation",
    "seed",
    "order",
    "base_order",
    "separated",
    "fraction",
    "theta_refine",
    "theta_coarsen",
    "dt",
    "steps",
    "gravity",
    "coriolis",
    "friction",
    "friction_coeff",
    "body_force_x",
    "body_force_y",
    "h_min",
    "mode",
    "granularity",
    "warmup",
    "measure_substeps",
    "schedule",
    "snapshot",
    "timings",
    "schedule_out",
];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError {
        line,
        msg: format!("`{key}` expects {}, got `{value}`", std::any::type_name::<T>()),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut friction_kind = "linear".to_string();
        let mut friction_coeff: Option<f64> = None;
        let mut base_order: Option<usize> = None;

        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError { line, msg };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(err(format!("`{key}` already set on line {prev}")));
            }
            match key {
                "scenario" => cfg.scenario = value.parse().map_err(err)?,
                "nx" => cfg.nx = parse_value(line, key, value)?,
                "perturbation" => cfg.perturbation = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "order" => cfg.order = parse_value(line, key, value)?,
                "base_order" => base_order = Some(parse_value(line, key, value)?),
                "separated" => cfg.separated = parse_value(line, key, value)?,
                "fraction" => cfg.fraction = parse_value(line, key, value)?,
                "theta_refine" => cfg.theta_refine = parse_value(line, key, value)?,
                "theta_coarsen" => cfg.theta_coarsen = parse_value(line, key, value)?,
                "dt" => cfg.dt = parse_value(line, key, value)?,
                "steps" => cfg.steps = parse_value(line, key, value)?,
                "gravity" => cfg.params.gravity = parse_value(line, key, value)?,
                "coriolis" => cfg.params.coriolis = parse_value(line, key, value)?,
                "friction" => {
                    if value != "linear" && value != "quadratic" {
                        return Err(err(format!("friction must be linear or quadratic, got `{value}`")));
                    }
                    friction_kind = value.to_string();
                }
                "friction_coeff" => friction_coeff = Some(parse_value(line, key, value)?),
                "body_force_x" => cfg.params.body_force[0] = parse_value(line, key, value)?,
                "body_force_y" => cfg.params.body_force[1] = parse_value(line, key, value)?,
                "h_min" => cfg.params.min_depth = parse_value(line, key, value)?,
                "mode" => cfg.mode = value.parse().map_err(err)?,
                "granularity" => cfg.granularity = value.parse().map_err(err)?,
                "warmup" => cfg.warmup = parse_value(line, key, value)?,
                "measure_substeps" => cfg.measure_substeps = parse_value(line, key, value)?,
                "schedule" => cfg.schedule = Some(PathBuf::from(value)),
                "snapshot" => cfg.snapshot = Some(PathBuf::from(value)),
                "timings" => cfg.timings = Some(PathBuf::from(value)),
                "schedule_out" => cfg.schedule_out = Some(PathBuf::from(value)),
                _ => unreachable!(),
            }
        }

        cfg.params.friction = match friction_kind.as_str() {
            "quadratic" => FrictionLaw::Quadratic {
                coeff: friction_coeff.unwrap_or(0.009),
            },
            _ => FrictionLaw::Linear {
                coeff: friction_coeff.unwrap_or(1e-4),
            },
        };

        let at = |key: &str| seen.get(key).copied().unwrap_or(0);
        let fail = |key: &str, msg: String| ConfigError { line: at(key), msg };
        if let Some(b) = base_order {
            if b + 1 != cfg.order {
                return Err(fail("base_order", format!("base_order must be order - 1 = {}", cfg.order as i64 - 1)));
            }
        }
        if !(1..=3).contains(&cfg.order) {
            return Err(fail("order", format!("order must be 1, 2 or 3, got {}", cfg.order)));
        }
        if cfg.scenario.is_dynamic() && seen.contains_key("fraction") {
            return Err(fail("fraction", "fraction only applies to static adaptivity".into()));
        }
        if !cfg.scenario.is_dynamic() {
            for key in ["theta_refine", "theta_coarsen"] {
                if seen.contains_key(key) {
                    return Err(fail(key, format!("{key} only applies to the dynamic scenario")));
                }
            }
        }
        if cfg.scenario.is_dynamic() {
            Thresholds::new(cfg.theta_refine, cfg.theta_coarsen)
                .map_err(|e| fail("theta_coarsen", e.to_string()))?;
        }
        if cfg.nx == 0 {
            return Err(fail("nx", "nx must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&cfg.perturbation) {
            return Err(fail("perturbation", "perturbation must lie in [0, 0.5)".into()));
        }
        if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
            return Err(fail("dt", "dt must be positive".into()));
        }
        if cfg.steps == 0 {
            return Err(fail("steps", "steps must be at least 1".into()));
        }
        cfg.params.validate().map_err(|e| {
            let key = if cfg.params.gravity > 0.0 { "h_min" } else { "gravity" };
            fail(key, e.to_string())
        })?;
        if cfg.mode == ExecMode::Heterogeneous && cfg.schedule.is_none() {
            return Err(fail("mode", "heterogeneous mode needs `schedule = <file>`".into()));
        }
        if cfg.mode == ExecMode::MeasureThenOptimize && cfg.measure_substeps == 0 {
            return Err(fail("measure_substeps", "measure_substeps must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text)?)
    }

    pub fn thresholds(&self) -> Option<Thresholds> {
        self.scenario.is_dynamic().then_some(Thresholds {
            refine: self.theta_refine,
            coarsen: self.theta_coarsen,
        })
    }

    /// Text that parses back to `self`.
    pub fn emit(&self) -> String {
        let mut o = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        kv("scenario", self.scenario.as_str().into());
        kv("nx", self.nx.to_string());
        kv("perturbation", format!("{:?}", self.perturbation));
        kv("seed", self.seed.to_string());
        kv("order", self.order.to_string());
        kv("separated", self.separated.to_string());
        if self.scenario.is_dynamic() {
            kv("theta_refine", format!("{:?}", self.theta_refine));
            kv("theta_coarsen", format!("{:?}", self.theta_coarsen));
        } else {
            kv("fraction", self.fraction.to_string());
        }
        kv("dt", format!("{:?}", self.dt));
        kv("steps", self.steps.to_string());
        kv("gravity", format!("{:?}", self.params.gravity));
        kv("coriolis", format!("{:?}", self.params.coriolis));
        let (kind, coeff) = match self.params.friction {
            FrictionLaw::Linear { coeff } => ("linear", coeff),
            FrictionLaw::Quadratic { coeff } => ("quadratic", coeff),
        };
        kv("friction", kind.into());
        kv("friction_coeff", format!("{coeff:?}"));
        kv("body_force_x", format!("{:?}", self.params.body_force[0]));
        kv("body_force_y", format!("{:?}", self.params.body_force[1]));
        kv("h_min", format!("{:?}", self.params.min_depth));
        kv("mode", self.mode.as_str().into());
        kv(
            "granularity",
            match self.granularity {
                Granularity::Layer => "layer",
                Granularity::Kernel => "kernel",
            }
            .into(),
        );
        kv("warmup", self.warmup.to_string());
        kv("measure_substeps", self.measure_substeps.to_string());
        for (k, v) in [
            ("schedule", &self.schedule),
            ("snapshot", &self.snapshot),
            ("timings", &self.timings),
            ("schedule_out", &self.schedule_out),
        ] {
            if let Some(p) = v {
                kv(k, p.display().to_string());
            }
        }
        o
    }
}
