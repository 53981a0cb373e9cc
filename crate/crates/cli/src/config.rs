//! Scenario files.
//!
//! Every section is optional and is laid over the built-in default, so a
//! file only names what it changes. Unknown keys are rejected. Any `[bs.N]`
//! section replaces the default site list; a site id that has a default
//! starts from it, a new id must give `position`.

use std::fs;
use std::path::Path;

use offload_core::model::{BaseStation, Position, TechKind};
use offload_core::{validate_config, ScenarioConfig, Violation};
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<Violation>),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

const SECTIONS: [&str; 8] = ["seed", "route", "bs", "lte", "mmwave", "blockage", "traffic", "policy"];

/// Parse and validate a scenario file; also returns its raw bytes.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<u8>), ConfigError> {
    let bytes = fs::read(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    let text = String::from_utf8_lossy(&bytes);
    let cfg = parse_config(&text)?;
    Ok((cfg, bytes))
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    for key in doc.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
    }
    let d = ScenarioConfig::default();
    let cfg = ScenarioConfig {
        seed: match doc.get("seed") {
            None => d.seed,
            Some(v) => v
                .as_integer()
                .filter(|s| *s >= 0)
                .map(|s| s as u64)
                .ok_or_else(|| ConfigError::Value { key: "seed".into(), message: "must be a non-negative integer".into() })?,
        },
        route: section(&d.route, doc.get("route"), "route")?,
        base_stations: match doc.get("bs") {
            None => d.base_stations.clone(),
            Some(v) => sites(&d.base_stations, v)?,
        },
        lte: section(&d.lte, doc.get("lte"), "lte")?,
        mmwave: section(&d.mmwave, doc.get("mmwave"), "mmwave")?,
        blockage: section(&d.blockage, doc.get("blockage"), "blockage")?,
        traffic: section(&d.traffic, doc.get("traffic"), "traffic")?,
        policy: section(&d.policy, doc.get("policy"), "policy")?,
    };
    let violations = validate_config(&cfg);
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(violations))
    }
}

fn section<T: Serialize + DeserializeOwned>(default: &T, patch: Option<&Value>, name: &str) -> Result<T, ConfigError> {
    let Some(patch) = patch else { return deserialize(to_value(default), name) };
    let mut base = to_value(default);
    merge(&mut base, patch, name)?;
    deserialize(base, name)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    Value::try_from(v).expect("defaults serialize to TOML")
}

fn deserialize<T: DeserializeOwned>(v: Value, name: &str) -> Result<T, ConfigError> {
    v.try_into().map_err(|e: toml::de::Error| ConfigError::Value { key: name.into(), message: e.message().to_string() })
}

fn merge(base: &mut Value, patch: &Value, path: &str) -> Result<(), ConfigError> {
    let (Value::Table(b), Value::Table(p)) = (&mut *base, patch) else {
        return Err(ConfigError::Value { key: path.into(), message: "expected a table".into() });
    };
    for (k, v) in p {
        let key = format!("{path}.{k}");
        match b.get_mut(k) {
            None => return Err(ConfigError::UnknownKey(key)),
            Some(slot @ Value::Table(_)) => merge(slot, v, &key)?,
            Some(slot) => *slot = v.clone(),
        }
    }
    Ok(())
}

fn sites(defaults: &[BaseStation], v: &Value) -> Result<Vec<BaseStation>, ConfigError> {
    let Value::Table(t) = v else {
        return Err(ConfigError::Value { key: "bs".into(), message: "expected [bs.N] tables".into() });
    };
    let mut out = Vec::new();
    for (id, patch) in t {
        let key = format!("bs.{id}");
        let id: u32 = id
            .parse()
            .map_err(|_| ConfigError::Value { key: key.clone(), message: "site ids must be integers".into() })?;
        let base = match defaults.iter().find(|b| b.id == id) {
            Some(b) => b.clone(),
            None => {
                if patch.get("position").is_none() {
                    return Err(ConfigError::Value { key, message: "new site needs `position`".into() });
                }
                BaseStation {
                    id,
                    position: Position::new(0.0, 0.0),
                    height_m: 10.0,
                    techs: TechKind::ALL.to_vec(),
                    nlos: Vec::new(),
                }
            }
        };
        if patch.get("id").is_some() {
            return Err(ConfigError::UnknownKey(format!("{key}.id")));
        }
        out.push(section(&base, Some(patch), &key)?);
    }
    out.sort_by_key(|b| b.id);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default_matches_built_in() {
        let text = include_str!("../../../scenarios/default.toml");
        assert_eq!(parse_config(text).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn overlays_and_nested_tables() {
        let cfg = parse_config(
            "seed = 9\n[route]\nspacing_m = 2\n[traffic]\nd_core_ms = 0\n[traffic.cc]\nbackoff = 0.7\n[mmwave]\nul_share = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.route.spacing_m, 2.0);
        assert_eq!(cfg.traffic.d_core_ms, 0.0);
        assert_eq!(cfg.traffic.cc.backoff, 0.7);
        assert_eq!(cfg.traffic.cc.probe_step_mbps, 2.0);
        assert_eq!(cfg.mmwave.ul_share, 0.5);
        assert_eq!(cfg.lte, ScenarioConfig::default().lte);
    }

    #[test]
    fn unknown_keys_are_named() {
        match parse_config("[lte]\nse_capp = 3\n") {
            Err(ConfigError::UnknownKey(k)) => assert_eq!(k, "lte.se_capp"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config("colour = 1\n"), Err(ConfigError::UnknownKey(_))));
    }

    #[test]
    fn sites_replace_defaults() {
        let cfg = parse_config("[bs.1]\nnlos = []\n[bs.7]\nposition = [5, 5]\ntechs = [\"mmwave\"]\n").unwrap();
        assert_eq!(cfg.base_stations.len(), 2);
        assert_eq!(cfg.base_stations[0].position, Position::new(20.0, 30.0));
        assert!(cfg.base_stations[0].nlos.is_empty());
        assert_eq!(cfg.base_stations[1].id, 7);
        assert_eq!(cfg.base_stations[1].techs, vec![TechKind::Mmwave]);
    }

    #[test]
    fn violations_are_listed() {
        match parse_config("[traffic]\nd_core_ms = -1\n") {
            Err(ConfigError::Invalid(v)) => assert!(v.iter().any(|x| x.to_string() == "d_core_ms negative")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config("[route]\nspacing_m = \"far\"\n"), Err(ConfigError::Value { .. })));
        assert!(matches!(parse_config("[route\n"), Err(ConfigError::Syntax(_))));
    }
}
