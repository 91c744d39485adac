//! Run configuration: defaults, flat `key = value` files, JSON files and
//! `--set` overrides, merged in that order.
//!
//! Flat grammar, one entry per line:
//!
//! ```text
//! # comment
//! alpha = 1e-4            # model parameters by symbol name
//! x0 = 1000, 100, 100, 100, 100, 100
//! integration.rel_tol = 1e-9
//! sweep.param = alpha
//! analysis.window = 18250
//! lyapunov.horizon = 36500
//! ```
//!
//! Blank lines are ignored and `#` starts a comment anywhere on a line.
//! A file whose first non-blank character is `{` is read as JSON with the
//! same structure as the echo written by every command.

use std::fmt;
use std::path::Path;

use borerdyn::analysis::{AttractorSpec, SweepSpec};
use borerdyn::integrate::{IntegrationSettings, DEFAULT_X0};
use borerdyn::model::{self, ModelParameters, StateVector, PARAMETER_NAMES};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParameters,
    pub x0: StateVector,
    pub integration: IntegrationSettings,
    pub sweep: SweepSpec,
    /// Attractor classification, including the Lyapunov estimator block.
    pub analysis: AttractorSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParameters::default(),
            x0: DEFAULT_X0,
            integration: IntegrationSettings::default(),
            sweep: SweepSpec::default(),
            analysis: AttractorSpec::default(),
        }
    }
}

/// One problem with one config field.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Accumulates config layers as a JSON tree, then deserializes once.
pub struct ConfigBuilder {
    tree: Value,
    skeleton: Value,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        let tree = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
        ConfigBuilder {
            skeleton: tree.clone(),
            tree,
        }
    }
}

impl ConfigBuilder {
    /// Merge a config file, choosing JSON or flat syntax by content.
    pub fn file(&mut self, path: &Path) -> Result<(), Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![Diagnostic::new(path.display().to_string(), e.to_string())])?;
        if text.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(&text).map_err(|e| {
                vec![Diagnostic::new(path.display().to_string(), e.to_string())]
            })?;
            if !v.is_object() {
                return Err(vec![Diagnostic::new(
                    path.display().to_string(),
                    "top level must be an object",
                )]);
            }
            merge(&mut self.tree, v);
            Ok(())
        } else {
            self.flat(&text, &path.display().to_string())
        }
    }

    /// Merge flat `key = value` text. `origin` labels diagnostics.
    pub fn flat(&mut self, text: &str, origin: &str) -> Result<(), Vec<Diagnostic>> {
        let mut errs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errs.push(Diagnostic::new(
                    format!("{origin}:{}", n + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
                continue;
            };
            if let Err(d) = self.set(k.trim(), v.trim()) {
                errs.push(Diagnostic::new(
                    format!("{origin}:{}: {}", n + 1, d.field),
                    d.message,
                ));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Apply one flat `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Diagnostic> {
        let path = flat_path(key).ok_or_else(|| Diagnostic::new(key, "unknown key"))?;
        if lookup(&self.skeleton, &path).is_none() {
            return Err(Diagnostic::new(key, "unknown key"));
        }
        let v = if key == "x0" {
            let parts: Result<Vec<f64>, _> =
                value.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parts {
                Ok(xs) if xs.len() == model::DIM => Value::from(xs),
                _ => {
                    return Err(Diagnostic::new(
                        key,
                        format!("expected {} comma-separated numbers", model::DIM),
                    ))
                }
            }
        } else {
            scalar(value)
        };
        let slot = lookup_mut(&mut self.tree, &path).expect("path checked against skeleton");
        *slot = v;
        Ok(())
    }

    /// Deserialize and validate the merged tree.
    pub fn build(self) -> Result<RunConfig, Vec<Diagnostic>> {
        let cfg: RunConfig = serde_json::from_value(self.tree)
            .map_err(|e| vec![Diagnostic::new("config", e.to_string())])?;
        let errs = cfg.diagnostics();
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(errs)
        }
    }
}

impl RunConfig {
    /// Every field-level problem with this config.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out: Vec<Diagnostic> = model::validate(&self.params)
            .into_iter()
            .map(|v| Diagnostic::new(v.field, format!("violates \"{}\"", v.constraint)))
            .collect();
        if !(self.x0.is_finite() && self.x0.is_nonnegative()) {
            out.push(Diagnostic::new("x0", "components must be finite and >= 0"));
        }
        if let Err(e) = self.integration.validate() {
            out.push(Diagnostic::new("integration", e.to_string()));
        }
        if let Err(e) = self.sweep.validate() {
            out.push(Diagnostic::new("sweep", e.to_string()));
        }
        if let Err(e) = self.analysis.validate() {
            out.push(Diagnostic::new("analysis", e.to_string()));
        }
        out
    }
}

fn flat_path(key: &str) -> Option<Vec<&str>> {
    if PARAMETER_NAMES.contains(&key) {
        return Some(vec!["params", key]);
    }
    if key == "x0" {
        return Some(vec!["x0"]);
    }
    let (head, rest) = key.split_once('.')?;
    match head {
        "integration" | "sweep" | "analysis" => Some(vec![head, rest]),
        "lyapunov" => Some(vec!["analysis", "lyapunov", rest]),
        _ => None,
    }
}

fn scalar(s: &str) -> Value {
    if let Ok(i) = s.parse::<u64>() {
        return Value::from(i);
    }
    if let Ok(x) = s.parse::<f64>() {
        return Value::from(x);
    }
    match s {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(s.trim_matches('"').to_string()),
    }
}

fn lookup<'a>(v: &'a Value, path: &[&str]) -> Option<&'a Value> {
    path.iter().try_fold(v, |v, k| v.get(k))
}

fn lookup_mut<'a>(v: &'a mut Value, path: &[&str]) -> Option<&'a mut Value> {
    path.iter().try_fold(v, |v, k| v.get_mut(k))
}

/// Recursive object merge; non-objects in `top` replace what is below.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// Build a `RunConfig` from its flat-text form alone.
pub fn parse_flat(text: &str) -> Result<RunConfig, Vec<Diagnostic>> {
    let mut b = ConfigBuilder::default();
    b.flat(text, "<text>")?;
    b.build()
}

/// Build a `RunConfig` from JSON text alone.
pub fn parse_json(text: &str) -> Result<RunConfig, Vec<Diagnostic>> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("config", e.to_string())])?;
    let mut b = ConfigBuilder::default();
    merge(&mut b.tree, v);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use borerdyn::analysis::SweepParam;

    #[test]
    fn defaults_are_valid() {
        assert!(RunConfig::default().diagnostics().is_empty());
    }

    #[test]
    fn flat_keys() {
        let cfg = parse_flat(
            "# header\nalpha = 1e-4  # trailing\nK = 30000\nx0 = 1,2,3,4,5,6\n\
             integration.method = rk4-fixed\nsweep.param = alpha\nsweep.steps = 5\n\
             lyapunov.blocks = 4\nanalysis.max_period = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.params.alpha, 1e-4);
        assert_eq!(cfg.params.k, 30000.0);
        assert_eq!(cfg.x0.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(cfg.integration.method.name(), "rk4-fixed");
        assert_eq!(cfg.sweep.param, SweepParam::Alpha);
        assert_eq!(cfg.sweep.steps, 5);
        assert_eq!(cfg.analysis.lyapunov.blocks, 4);
        assert_eq!(cfg.analysis.max_period, 16);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in ["omega = 1", "integration.bogus = 1", "sweep = 3", "x1 = 4"] {
            let errs = parse_flat(text).unwrap_err();
            assert!(errs[0].message.contains("unknown key"), "{text}: {errs:?}");
        }
        assert!(parse_json(r#"{"params": {"omega": 1}}"#).is_err());
        assert!(parse_json(r#"{"extra": 1}"#).is_err());
    }

    #[test]
    fn field_level_diagnostics() {
        let errs = parse_flat("m2 = -1\nn2 = 0\n").unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|d| d.field.as_str()).collect();
        assert!(fields.contains(&"m2") && fields.contains(&"n2"), "{errs:?}");
        let errs = parse_flat("garbage line\n").unwrap_err();
        assert!(errs[0].field.ends_with(":1"));
    }

    proptest::proptest! {
        #[test]
        fn echo_round_trips(
            alpha in 1e-7f64..1e-3,
            r1 in 0.0f64..0.99,
            k in 1.0f64..1e7,
            x in proptest::array::uniform6(0.0f64..1e6),
            rtol in 1e-12f64..1e-3,
            delta0 in 1e-12f64..1e-3,
        ) {
            let mut cfg = RunConfig::default();
            cfg.params.alpha = alpha;
            cfg.params.r1 = r1;
            cfg.params.k = k;
            cfg.x0 = StateVector(x);
            cfg.integration.rel_tol = rtol;
            cfg.analysis.lyapunov.delta0 = delta0;
            let text = crate::output::to_json(&cfg);
            proptest::prop_assert_eq!(parse_json(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn json_partial_override() {
        let cfg = parse_json(r#"{"params": {"r1": 0.3}, "analysis": {"lyapunov": {"horizon": 100}}}"#)
            .unwrap();
        assert_eq!(cfg.params.r1, 0.3);
        assert_eq!(cfg.params.r0, 0.19);
        assert_eq!(cfg.analysis.lyapunov.horizon, 100.0);
    }
}
