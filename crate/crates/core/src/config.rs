//! Flat `key = value` configuration files and the resolved run
//! configuration echoed into every output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lfunc::EvalConfig;
use crate::mollifier::{ParamOverrides, PolyBudget};

/// Parsed configuration file: keys in file order are irrelevant, later
/// duplicates win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// `key = value` per line; `#` starts a comment; blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Usage(format!("config line {}: expected `key = value`, got `{raw}`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(LabError::Usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed lookup; a present but unparsable value is a usage error.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| LabError::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }
}

/// Output table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Everything a command needs, after defaults, file values and flags have
/// been merged. Serialised into output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub eval: EvalConfig,
    pub overrides: ParamOverrides,
    pub budget: PolyBudget,
    /// Command-specific settings, already in canonical string form.
    pub options: BTreeMap<String, String>,
    pub format: Format,
    pub out: Option<String>,
}

/// Keys understood in configuration files beyond command options.
pub const EVAL_KEYS: [&str; 8] =
    ["contour_c", "kernel_scale", "quad_step", "series_tol", "length_cap", "vgrid_step", "afe_c", "afe_step"];
pub const PARAM_KEYS: [&str; 6] = ["W", "X", "Y", "sigma0", "K1", "K2"];
pub const BUDGET_KEYS: [&str; 2] = ["poly_length_cap", "poly_max_terms"];

impl RunConfig {
    /// Defaults overlaid with file values for the shared sections.
    pub fn from_file(command: &str, file: &ConfigFile) -> Result<Self> {
        let mut eval = EvalConfig::default();
        macro_rules! take {
            ($target:expr, $key:expr) => {
                if let Some(v) = file.parsed($key)? {
                    $target = v;
                }
            };
        }
        take!(eval.contour_c, "contour_c");
        take!(eval.kernel_scale, "kernel_scale");
        take!(eval.quad_step, "quad_step");
        take!(eval.series_tol, "series_tol");
        take!(eval.length_cap, "length_cap");
        take!(eval.vgrid_step, "vgrid_step");
        take!(eval.afe_c, "afe_c");
        take!(eval.afe_step, "afe_step");
        let overrides = ParamOverrides {
            w: file.parsed("W")?,
            x: file.parsed("X")?,
            y: file.parsed("Y")?,
            sigma0: file.parsed("sigma0")?,
            k1: file.parsed("K1")?,
            k2: file.parsed("K2")?,
        };
        let mut budget = PolyBudget::default();
        take!(budget.length_cap, "poly_length_cap");
        take!(budget.max_terms, "poly_max_terms");
        let format = match file.get("format") {
            None => Format::Csv,
            Some(v) => Format::parse(v).ok_or_else(|| LabError::Usage(format!("config key `format`: unknown `{v}`")))?,
        };
        let options = file
            .values
            .iter()
            .filter(|(k, _)| {
                !EVAL_KEYS.contains(&k.as_str())
                    && !PARAM_KEYS.contains(&k.as_str())
                    && !BUDGET_KEYS.contains(&k.as_str())
                    && k.as_str() != "format"
                    && k.as_str() != "out"
            })
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Ok(RunConfig {
            command: command.to_string(),
            eval,
            overrides,
            budget,
            options,
            format,
            out: file.get("out").map(str::to_string),
        })
    }

    pub fn option(&self, key: &str) -> Option<&str> {
        self.options.get(key).map(String::as_str)
    }

    pub fn set_option(&mut self, key: &str, value: impl ToString) {
        self.options.insert(key.to_string(), value.to_string());
    }

    pub fn option_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.option(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| LabError::Usage(format!("option `{key}`: cannot parse `{v}`"))),
        }
    }

    /// The configuration as a file that [`ConfigFile::parse`] reads back
    /// into an equal `RunConfig`.
    pub fn to_file_text(&self) -> String {
        let mut lines = vec![format!("# {}", self.command)];
        let e = &self.eval;
        let fields: [(&str, String); 8] = [
            ("contour_c", fmt_r(e.contour_c)),
            ("kernel_scale", fmt_r(e.kernel_scale)),
            ("quad_step", fmt_r(e.quad_step)),
            ("series_tol", fmt_r(e.series_tol)),
            ("length_cap", e.length_cap.to_string()),
            ("vgrid_step", fmt_r(e.vgrid_step)),
            ("afe_c", fmt_r(e.afe_c)),
            ("afe_step", fmt_r(e.afe_step)),
        ];
        for (k, v) in fields {
            lines.push(format!("{k} = {v}"));
        }
        let o = &self.overrides;
        let params: [(&str, Option<String>); 6] = [
            ("W", o.w.map(fmt_r)),
            ("X", o.x.map(fmt_r)),
            ("Y", o.y.map(fmt_r)),
            ("sigma0", o.sigma0.map(fmt_r)),
            ("K1", o.k1.map(|v| v.to_string())),
            ("K2", o.k2.map(|v| v.to_string())),
        ];
        for (k, v) in params {
            if let Some(v) = v {
                lines.push(format!("{k} = {v}"));
            }
        }
        lines.push(format!("poly_length_cap = {}", self.budget.length_cap));
        lines.push(format!("poly_max_terms = {}", self.budget.max_terms));
        lines.push(format!("format = {}", if self.format == Format::Json { "json" } else { "csv" }));
        if let Some(out) = &self.out {
            lines.push(format!("out = {out}"));
        }
        for (k, v) in &self.options {
            lines.push(format!("{k} = {v}"));
        }
        lines.join("\n") + "\n"
    }
}

/// Shortest decimal that round-trips.
fn fmt_r(x: f64) -> String {
    format!("{x:?}")
}
