//! `RunConfig`: the TOML description of a batch run.

use std::collections::BTreeMap;

use bergman_core::diagnostics::{ReportOptions, DEFAULT_LEVELS};
use bergman_core::geometry::DomainConfig;
use bergman_core::Precision;
use serde::{Deserialize, Serialize};

/// Diagnostics `run` knows how to emit.
pub const DIAGNOSTICS: &[&str] = &[
    "basis",
    "zeros",
    "faber",
    "capacity",
    "report",
    "hessenberg",
    "corner-integral",
    "distortion",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrecisionSetting {
    Digits(u32),
    Auto(String),
}

impl Default for PrecisionSetting {
    fn default() -> Self {
        PrecisionSetting::Auto("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_levels")]
    pub levels: Vec<String>,
    #[serde(default = "default_per_level")]
    pub per_level: usize,
}

fn default_levels() -> Vec<String> {
    DEFAULT_LEVELS.iter().map(|x| x.to_string()).collect()
}

fn default_per_level() -> usize {
    20
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            levels: default_levels(),
            per_level: default_per_level(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub n_max: usize,
    #[serde(default)]
    pub precision_digits: PrecisionSetting,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_diagnostics")]
    pub diagnostics: Vec<String>,
    /// Decimal strings: `sum`, `epsilon_tail`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, String>,
}

fn default_diagnostics() -> Vec<String> {
    ["basis", "zeros", "report"].iter().map(|s| s.to_string()).collect()
}

impl RunConfig {
    /// Parse and validate; messages carry TOML line references.
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> Result<(), String> {
        let at = |key: &str| {
            text.lines()
                .position(|l| l.trim_start().starts_with(key))
                .map(|i| format!("line {}: ", i + 1))
                .unwrap_or_default()
        };
        if self.n_max < 1 {
            return Err(format!("{}n_max must be at least 1", at("n_max")));
        }
        if let PrecisionSetting::Auto(s) = &self.precision_digits {
            if s != "auto" {
                return Err(format!(
                    "{}precision_digits must be an integer or \"auto\", got {s:?}",
                    at("precision_digits")
                ));
            }
        }
        for d in &self.diagnostics {
            if !DIAGNOSTICS.contains(&d.as_str()) {
                return Err(format!(
                    "{}unknown diagnostic {d:?}; expected one of {}",
                    at("diagnostics"),
                    DIAGNOSTICS.join(", ")
                ));
            }
        }
        for l in &self.grid.levels {
            match l.parse::<f64>() {
                Ok(x) if x > 1.0 => {}
                _ => return Err(format!("{}grid level {l:?} must be a number > 1", at("levels"))),
            }
        }
        for (k, v) in &self.tolerances {
            if !matches!(k.as_str(), "sum" | "epsilon_tail") {
                return Err(format!("{}unknown tolerance {k:?}", at(k)));
            }
            if v.parse::<f64>().map(|x| x > 0.0) != Ok(true) {
                return Err(format!("{}tolerance {k} = {v:?} must be a positive number", at(k)));
            }
        }
        Ok(())
    }

    pub fn precision(&self) -> Precision {
        match self.precision_digits {
            PrecisionSetting::Digits(d) => Precision::digits(d),
            PrecisionSetting::Auto(_) => Precision::auto_for_degree(self.n_max),
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        let mut o = ReportOptions::new(self.n_max);
        o.levels = self.grid.levels.iter().map(|l| l.parse().expect("validated")).collect();
        o.per_level = self.grid.per_level;
        if let Some(t) = self.tolerances.get("sum") {
            o.sum_tolerance = t.parse().expect("validated");
        }
        if let Some(t) = self.tolerances.get("epsilon_tail") {
            o.tail_tolerance = t.parse().expect("validated");
        }
        o
    }

    pub fn enabled(&self, name: &str) -> bool {
        self.diagnostics.iter().any(|d| d == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISK: &str = r#"
n_max = 10
precision_digits = 60

[domain]
kind = "catalog"
name = "disk"
"#;

    #[test]
    fn parses_catalog_reference() {
        let c = RunConfig::parse(DISK).unwrap();
        assert_eq!(c.precision(), Precision::digits(60));
        assert!(c.enabled("report"));
    }

    #[test]
    fn auto_precision_rule() {
        let c = RunConfig::parse(&DISK.replace("precision_digits = 60", "precision_digits = \"auto\"")).unwrap();
        assert_eq!(c.precision(), Precision::digits(60));
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse(&DISK.replace("n_max = 10", "n_max = 0")).unwrap_err();
        assert!(e.starts_with("line 2:"), "{e}");
        let e = RunConfig::parse(&DISK.replace("n_max = 10", "n_max = \"ten\"")).unwrap_err();
        assert!(e.contains("line 2"), "{e}");
        let e = RunConfig::parse(&DISK.replace("[domain]", "diagnostics = [\"nope\"]\n[domain]")).unwrap_err();
        assert!(e.contains("nope"), "{e}");
    }
}
