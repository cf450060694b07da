//! Flat `key = value` experiment files. Keys mirror the command-line flags
//! and flags win over file values.

use std::collections::BTreeMap;
use std::path::Path;

use kcirc_core::montecarlo::Tolerances;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, toml::Value>,
}

const KNOWN: &[&str] = &[
    "theorem",
    "k",
    "kk",
    "n",
    "g",
    "law",
    "universality_law",
    "trials",
    "seed",
    "radial_ks",
    "angular_grid",
    "angular_uniform_ks",
    "band_radius",
    "band_epsilon",
    "band_mass_min",
    "gumbel_ks_lambda",
    "gumbel_ks_reference",
    "universality_ks",
    "det_relative",
];

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("invalid config file: {e}")))?;
        let mut values = BTreeMap::new();
        for (key, value) in table {
            let key = key.replace('-', "_");
            if !KNOWN.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown config key '{key}'")));
            }
            if value.is_table() || value.is_array() {
                return Err(CliError::Usage(format!("config key '{key}' must be a scalar")));
            }
            values.insert(key, value);
        }
        Ok(Self { values })
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(CliError::Usage(format!(
                "config key '{key}' must be a nonnegative integer, got {v}"
            ))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(x)) => Ok(Some(*x)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(CliError::Usage(format!("config key '{key}' must be a number, got {v}"))),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(toml::Value::Integer(i)) => Ok(Some(i.to_string())),
            Some(v) => Err(CliError::Usage(format!("config key '{key}' must be a string, got {v}"))),
        }
    }

    /// Overrides the tolerance fields present in the file.
    pub fn apply_tolerances(&self, tol: &mut Tolerances) -> Result<(), CliError> {
        let fields: [(&str, &mut f64); 10] = [
            ("radial_ks", &mut tol.radial_ks),
            ("angular_grid", &mut tol.angular_grid),
            ("angular_uniform_ks", &mut tol.angular_uniform_ks),
            ("band_radius", &mut tol.band_radius),
            ("band_epsilon", &mut tol.band_epsilon),
            ("band_mass_min", &mut tol.band_mass_min),
            ("gumbel_ks_lambda", &mut tol.gumbel_ks_lambda),
            ("gumbel_ks_reference", &mut tol.gumbel_ks_reference),
            ("universality_ks", &mut tol.universality_ks),
            ("det_relative", &mut tol.det_relative),
        ];
        for (key, slot) in fields {
            if let Some(v) = self.f64(key)? {
                *slot = v;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let c = FileConfig::parse("theorem = 3\nk = 100\nn = 10001\nlaw = \"gaussian\"\nradial_ks = 0.07\n").unwrap();
        assert_eq!(c.u64("k").unwrap(), Some(100));
        assert_eq!(c.string("theorem").unwrap().as_deref(), Some("3"));
        let mut tol = Tolerances::default();
        c.apply_tolerances(&mut tol).unwrap();
        assert_eq!(tol.radial_ks, 0.07);
    }

    #[test]
    fn rejects_unknown_and_nested() {
        assert!(FileConfig::parse("colour = 1").is_err());
        assert!(FileConfig::parse("[k]\nx = 1").is_err());
        assert!(FileConfig::parse("k = -3").unwrap().u64("k").is_err());
    }
}
