//! `name:key=value,...` engine descriptions.
//!
//! Keys: `model` (thurston|bt|davidson|elo0), `s`, `kappa`, `eta`, `beta`,
//! `eps`, `v0`, `vbar`, `k`, `sigma`. `eta` and `kappa` also accept `auto`,
//! which takes the frequency estimate from the data being rated.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use skf_core::{Algorithm, DynamicsParams, EngineConfig, ModelKind, ModelSpec};

const KEYS: [&str; 10] = ["model", "s", "kappa", "eta", "beta", "eps", "v0", "vbar", "k", "sigma"];

#[derive(Debug, Clone, PartialEq)]
pub struct EngineSpec {
    pub algorithm: Algorithm,
    text: String,
    values: BTreeMap<String, String>,
}

/// Frequency-based `(eta, kappa)` used for `auto` values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AutoParams {
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
}

impl FromStr for EngineSpec {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let algorithm = Algorithm::from_name(name.trim()).ok_or_else(|| anyhow!("unknown engine '{name}'"))?;
        let mut values = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("'{item}' in engine '{text}' is not key=value"))?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                bail!("unknown key '{key}' in engine '{text}' (expected one of {})", KEYS.join(", "));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("key '{key}' given twice in engine '{text}'");
            }
        }
        Ok(EngineSpec {
            algorithm,
            text: text.to_string(),
            values,
        })
    }
}

impl fmt::Display for EngineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl EngineSpec {
    pub fn uses_auto(&self) -> bool {
        self.values.values().any(|v| v.eq_ignore_ascii_case("auto"))
    }

    fn number(&self, key: &str, auto: Option<f64>) -> Result<Option<f64>> {
        let Some(raw) = self.values.get(key) else {
            return Ok(None);
        };
        if raw.eq_ignore_ascii_case("auto") {
            return match (key, auto) {
                ("eta" | "kappa", Some(v)) => Ok(Some(v)),
                ("eta" | "kappa", None) => bail!("{key}=auto needs outcome data with a matching model"),
                _ => bail!("{key} does not accept 'auto'"),
            };
        }
        raw.parse::<f64>()
            .map(Some)
            .with_context(|| format!("{key}='{raw}' in engine '{}' is not a number", self.text))
    }

    fn model_kind(&self, kappa: Option<f64>) -> Result<ModelKind> {
        let name = self.values.get("model").map(String::as_str).unwrap_or(match self.algorithm {
            Algorithm::Glicko | Algorithm::Elo => "bt",
            _ => "thurston",
        });
        let kind = match name.to_ascii_lowercase().as_str() {
            "thurston" => ModelKind::Thurston,
            "bt" | "bradley-terry" | "bradleyterry" => ModelKind::BradleyTerry,
            "davidson" => ModelKind::Davidson {
                kappa: kappa.ok_or_else(|| anyhow!("the davidson model needs kappa (engine '{}')", self.text))?,
            },
            "elo0" | "elo-original" => ModelKind::OriginalElo,
            other => bail!("unknown model '{other}' in engine '{}'", self.text),
        };
        if kappa.is_some() && !matches!(kind, ModelKind::Davidson { .. }) {
            bail!("kappa only applies to the davidson model (engine '{}')", self.text);
        }
        Ok(kind)
    }

    pub fn resolve(&self, auto: AutoParams) -> Result<EngineConfig> {
        let kappa = self.number("kappa", auto.kappa)?;
        let kind = self.model_kind(kappa)?;
        let s = self.number("s", None)?.unwrap_or(1.0);
        let eta = self.number("eta", auto.eta)?.unwrap_or(0.0);
        let model = ModelSpec::new(kind, s, eta)?;
        let dynamics = DynamicsParams::new(
            self.number("beta", None)?.unwrap_or(1.0),
            self.number("eps", None)?.unwrap_or(0.0),
        )?;
        let sigma = match self.algorithm {
            Algorithm::TrueSkill | Algorithm::Glicko => Some(self.number("sigma", None)?.unwrap_or(s)),
            _ => self.number("sigma", None)?,
        };
        let config = EngineConfig {
            algorithm: self.algorithm,
            model,
            dynamics,
            v0: self.number("v0", None)?,
            v_bar: self.number("vbar", None)?,
            step_k: self.number("k", None)?,
            sigma,
        };
        config
            .validate()
            .with_context(|| format!("engine '{}'", self.text))?;
        Ok(config)
    }
}
