//! `key = value` run configuration documents.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use super::{DurationGrid, Regime, RunConfig, Setup};
use crate::dynamics::IntegrationConfig;
use crate::error::{Error, Result};
use crate::model::{Scheme, SystemParams};
use crate::output::BadCavityParams;

const COMMON_KEYS: &[&str] = &[
    "scheme", "regime", "n_th", "gamma", "delta", "kappa1", "kappa2", "output",
];
const INTRACAVITY_KEYS: &[&str] = &["g1", "g2", "t_max", "dt", "sample_stride"];
const BADCAVITY_KEYS: &[&str] = &["G1", "G2", "tau_max", "tau_points"];

struct Entry {
    value: String,
    line: usize,
}

struct Document {
    entries: BTreeMap<String, Entry>,
    last_line: usize,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::config(content, line, "expected `key = value`"));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::config("", line, "empty key"));
            }
            let known = COMMON_KEYS
                .iter()
                .chain(INTRACAVITY_KEYS)
                .chain(BADCAVITY_KEYS);
            if !known.into_iter().any(|k| *k == key) {
                return Err(Error::config(key, line, "unknown key"));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(Error::config(
                    key,
                    line,
                    format!("duplicate key (first set on line {})", prev.line),
                ));
            }
            if value.is_empty() {
                return Err(Error::config(key, line, "missing value"));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries, last_line })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.last_line, |e| e.line)
    }

    fn raw(&self, key: &str) -> Result<&Entry> {
        self.entries
            .get(key)
            .ok_or_else(|| Error::config(key, self.last_line, "missing required key"))
    }

    fn real(&self, key: &str) -> Result<f64> {
        let e = self.raw(key)?;
        parse_real(key, e)
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            Some(e) => parse_real(key, e),
            None => Ok(default),
        }
    }

    fn count(&self, key: &str, default: Option<usize>) -> Result<usize> {
        let e = match (self.entries.get(key), default) {
            (Some(e), _) => e,
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(Error::config(key, self.last_line, "missing required key")),
        };
        match e.value.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(
                key,
                e.line,
                format!("expected a positive integer, got `{}`", e.value),
            )),
        }
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>> {
        let e = self.raw(key)?;
        e.value
            .split(',')
            .map(|item| {
                parse_real(
                    key,
                    &Entry {
                        value: item.trim().to_string(),
                        line: e.line,
                    },
                )
            })
            .collect()
    }

    fn reject_foreign(&self, keys: &[&str], regime: Regime) -> Result<()> {
        for key in keys {
            if let Some(e) = self.entries.get(*key) {
                return Err(Error::config(
                    *key,
                    e.line,
                    format!("not used by the {} regime", regime.label()),
                ));
            }
        }
        Ok(())
    }
}

fn parse_real(key: &str, e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::config(
            key,
            e.line,
            format!("expected a decimal number, got `{}`", e.value),
        )),
    }
}

fn positive(doc: &Document, key: &str) -> Result<f64> {
    let v = doc.real(key)?;
    if v <= 0.0 {
        return Err(Error::config(
            key,
            doc.line_of(key),
            format!("must be positive, got {v}"),
        ));
    }
    Ok(v)
}

/// Parses and validates a run configuration.
///
/// Blank lines and `#` comments are ignored; lists are comma-separated.
/// Every error names the offending key and line (missing keys report the
/// last line of the document).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = Document::parse(text)?;

    let scheme = match doc.raw("scheme")?.value.as_str() {
        "sm" => Scheme::SorensenMolmer,
        "bogoliubov" => Scheme::Bogoliubov,
        other => {
            return Err(Error::config(
                "scheme",
                doc.line_of("scheme"),
                format!("expected `sm` or `bogoliubov`, got `{other}`"),
            ))
        }
    };
    let regime = match doc.raw("regime")?.value.as_str() {
        "intracavity" => Regime::Intracavity,
        "badcavity" => Regime::BadCavity,
        other => {
            return Err(Error::config(
                "regime",
                doc.line_of("regime"),
                format!("expected `intracavity` or `badcavity`, got `{other}`"),
            ))
        }
    };

    let gamma = doc.real_or("gamma", 1.0)?;
    let delta = doc.real("delta")?;
    let kappa1 = doc.real("kappa1")?;
    let kappa2 = doc.real("kappa2")?;
    let n_th = doc.reals("n_th")?;

    let setup = match regime {
        Regime::Intracavity => {
            doc.reject_foreign(BADCAVITY_KEYS, regime)?;
            Setup::Intracavity {
                params: SystemParams {
                    g1: doc.real("g1")?,
                    g2: doc.real("g2")?,
                    kappa1,
                    kappa2,
                    delta,
                    gamma,
                    n_th: 0.0,
                },
                grid: IntegrationConfig {
                    t_max: positive(&doc, "t_max")?,
                    dt: positive(&doc, "dt")?,
                    sample_stride: doc.count("sample_stride", Some(1))?,
                },
            }
        }
        Regime::BadCavity => {
            doc.reject_foreign(INTRACAVITY_KEYS, regime)?;
            Setup::BadCavity {
                params: BadCavityParams {
                    eff_g1: doc.real("G1")?,
                    eff_g2: doc.real("G2")?,
                    kappa1,
                    kappa2,
                    delta,
                    gamma,
                    n_th: 0.0,
                },
                grid: DurationGrid {
                    tau_max: positive(&doc, "tau_max")?,
                    tau_points: doc.count("tau_points", None)?,
                },
            }
        }
    };

    let cfg = RunConfig {
        scheme,
        setup,
        n_th,
        output: doc.entries.get("output").map(|e| PathBuf::from(&e.value)),
    };
    cfg.validate().map_err(|err| match err {
        Error::InvalidParameter { name, reason } => {
            let key = match name {
                "kappa" => "kappa1",
                other => other,
            };
            Error::config(key, doc.line_of(key), reason)
        }
        other => other,
    })?;
    Ok(cfg)
}

impl RunConfig {
    /// Renders the configuration as a document that [`parse_config`] maps
    /// back to an equal value.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scheme", self.scheme.label().to_string());
        kv("regime", self.regime().label().to_string());
        match &self.setup {
            Setup::Intracavity { params, grid } => {
                kv("g1", params.g1.to_string());
                kv("g2", params.g2.to_string());
                kv("kappa1", params.kappa1.to_string());
                kv("kappa2", params.kappa2.to_string());
                kv("delta", params.delta.to_string());
                kv("gamma", params.gamma.to_string());
                kv("t_max", grid.t_max.to_string());
                kv("dt", grid.dt.to_string());
                kv("sample_stride", grid.sample_stride.to_string());
            }
            Setup::BadCavity { params, grid } => {
                kv("G1", params.eff_g1.to_string());
                kv("G2", params.eff_g2.to_string());
                kv("kappa1", params.kappa1.to_string());
                kv("kappa2", params.kappa2.to_string());
                kv("delta", params.delta.to_string());
                kv("gamma", params.gamma.to_string());
                kv("tau_max", grid.tau_max.to_string());
                kv("tau_points", grid.tau_points.to_string());
            }
        }
        let list: Vec<String> = self.n_th.iter().map(|n| n.to_string()).collect();
        kv("n_th", list.join(", "));
        if let Some(out) = &self.output {
            kv("output", out.display().to_string());
        }
        s
    }
}
