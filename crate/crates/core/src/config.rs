//! Registry of default parameterizations and override handling.
//!
//! | algorithm   | parameters                                                  |
//! |-------------|-------------------------------------------------------------|
//! | `hms`       | k=5, c=1, m_low=2, m_high=5                                 |
//! | `hms-os`    | k_search=5, k_objective=10, c1=c2=1.5, m_low=2, m_high=10   |
//! | `hms-os-v1` | as `hms-os`, dual clustering off, c1=1                      |
//! | `hms-os-v2` | as `hms-os`, adaptive counts off                            |
//! | `pso`       | c1=c2=2, inertia 1 -> 0                                     |
//! | `gwo`       | none                                                        |
//!
//! Every algorithm also takes `n_pop` (default 50). The HMS family takes
//! `beta_low`/`beta_high` (default 0.3/1.99) for the stability-exponent range.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_gwo, run_pso, GwoConfig, PsoConfig};
use crate::error::{Error, Result};
use crate::hms::{run_hms, HmsConfig};
use crate::hms_os::{run_hms_os, HmsOsConfig};
use crate::population::{ObjectiveProblem, RunTrace};

pub const ALGORITHMS: [&str; 6] = ["hms", "hms-os", "hms-os-v1", "hms-os-v2", "pso", "gwo"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl ParamValue {
    fn as_real(&self, key: &str) -> Result<f64> {
        match *self {
            ParamValue::Real(v) => Ok(v),
            ParamValue::Int(v) => Ok(v as f64),
            ParamValue::Bool(_) => Err(Error::Config(format!("parameter '{key}' must be numeric"))),
        }
    }

    fn as_count(&self, key: &str) -> Result<usize> {
        match *self {
            ParamValue::Int(v) if v >= 0 => Ok(v as usize),
            ParamValue::Real(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => Err(Error::Config(format!(
                "parameter '{key}' must be a non-negative integer"
            ))),
        }
    }

    fn as_bool(&self, key: &str) -> Result<bool> {
        match *self {
            ParamValue::Bool(v) => Ok(v),
            _ => Err(Error::Config(format!(
                "parameter '{key}' must be true or false"
            ))),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Bool(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v:?}"),
        }
    }
}

pub type ParamMap = BTreeMap<String, ParamValue>;

/// A fully resolved, validated algorithm configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSettings {
    Hms(HmsConfig),
    HmsOs(HmsOsConfig),
    Pso(PsoConfig),
    Gwo(GwoConfig),
}

fn int(v: usize) -> ParamValue {
    ParamValue::Int(v as i64)
}

impl AlgorithmSettings {
    pub fn params(&self) -> ParamMap {
        let mut m = ParamMap::new();
        let mut put = |k: &str, v: ParamValue| {
            m.insert(k.to_string(), v);
        };
        match self {
            AlgorithmSettings::Hms(c) => {
                put("n_pop", int(c.n_pop));
                put("k", int(c.k_search));
                put("c", ParamValue::Real(c.c));
                put("m_low", int(c.m_low));
                put("m_high", int(c.m_high));
                put("beta_low", ParamValue::Real(c.beta_range.0));
                put("beta_high", ParamValue::Real(c.beta_range.1));
            }
            AlgorithmSettings::HmsOs(c) => {
                put("n_pop", int(c.base.n_pop));
                put("k_search", int(c.base.k_search));
                put("k_objective", int(c.k_objective));
                put("c1", ParamValue::Real(c.c1));
                put("c2", ParamValue::Real(c.c2));
                put("m_low", int(c.base.m_low));
                put("m_high", int(c.base.m_high));
                put("beta_low", ParamValue::Real(c.base.beta_range.0));
                put("beta_high", ParamValue::Real(c.base.beta_range.1));
                put("adaptive_count", ParamValue::Bool(c.adaptive_count));
                put("dual_clustering", ParamValue::Bool(c.dual_clustering));
                put("independent_r", ParamValue::Bool(c.independent_r));
            }
            AlgorithmSettings::Pso(c) => {
                put("n_pop", int(c.n_pop));
                put("c1", ParamValue::Real(c.c1));
                put("c2", ParamValue::Real(c.c2));
            }
            AlgorithmSettings::Gwo(c) => {
                put("n_pop", int(c.n_pop));
            }
        }
        m
    }

    fn apply(&mut self, key: &str, value: &ParamValue) -> Result<()> {
        let unknown = || Err(Error::Config(format!("unknown parameter '{key}'")));
        match self {
            AlgorithmSettings::Hms(c) => match key {
                "n_pop" => c.n_pop = value.as_count(key)?,
                "k" => c.k_search = value.as_count(key)?,
                "c" => c.c = value.as_real(key)?,
                "m_low" => c.m_low = value.as_count(key)?,
                "m_high" => c.m_high = value.as_count(key)?,
                "beta_low" => c.beta_range.0 = value.as_real(key)?,
                "beta_high" => c.beta_range.1 = value.as_real(key)?,
                _ => return unknown(),
            },
            AlgorithmSettings::HmsOs(c) => match key {
                "n_pop" => c.base.n_pop = value.as_count(key)?,
                "k_search" => c.base.k_search = value.as_count(key)?,
                "k_objective" => c.k_objective = value.as_count(key)?,
                "c1" => c.c1 = value.as_real(key)?,
                "c2" => c.c2 = value.as_real(key)?,
                "m_low" => c.base.m_low = value.as_count(key)?,
                "m_high" => c.base.m_high = value.as_count(key)?,
                "beta_low" => c.base.beta_range.0 = value.as_real(key)?,
                "beta_high" => c.base.beta_range.1 = value.as_real(key)?,
                "adaptive_count" => c.adaptive_count = value.as_bool(key)?,
                "dual_clustering" => c.dual_clustering = value.as_bool(key)?,
                "independent_r" => c.independent_r = value.as_bool(key)?,
                _ => return unknown(),
            },
            AlgorithmSettings::Pso(c) => match key {
                "n_pop" => c.n_pop = value.as_count(key)?,
                "c1" => c.c1 = value.as_real(key)?,
                "c2" => c.c2 = value.as_real(key)?,
                _ => return unknown(),
            },
            AlgorithmSettings::Gwo(c) => match key {
                "n_pop" => c.n_pop = value.as_count(key)?,
                _ => return unknown(),
            },
        }
        Ok(())
    }

    /// Returns a copy with `overrides` merged in, revalidated.
    pub fn with_overrides(&self, overrides: &ParamMap) -> Result<Self> {
        let mut out = self.clone();
        for (k, v) in overrides {
            out.apply(k, v)?;
        }
        out.validate()?;
        Ok(out)
    }

    pub fn set_nfe_max(&mut self, nfe_max: u64) {
        match self {
            AlgorithmSettings::Hms(c) => c.nfe_max = nfe_max,
            AlgorithmSettings::HmsOs(c) => c.base.nfe_max = nfe_max,
            AlgorithmSettings::Pso(c) => c.nfe_max = nfe_max,
            AlgorithmSettings::Gwo(c) => c.nfe_max = nfe_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmSettings::Hms(c) => c.validate(),
            AlgorithmSettings::HmsOs(c) => c.validate(),
            AlgorithmSettings::Pso(c) => c.validate(),
            AlgorithmSettings::Gwo(c) => c.validate(),
        }
    }

    pub fn run(&self, problem: &ObjectiveProblem, seed: u64) -> Result<RunTrace> {
        match self {
            AlgorithmSettings::Hms(c) => run_hms(problem, c, seed),
            AlgorithmSettings::HmsOs(c) => run_hms_os(problem, c, seed),
            AlgorithmSettings::Pso(c) => run_pso(problem, c, seed),
            AlgorithmSettings::Gwo(c) => run_gwo(problem, c, seed),
        }
    }
}

/// Default settings for a registered algorithm.
pub fn settings_for(name: &str) -> Result<AlgorithmSettings> {
    let settings = match name {
        "hms" => AlgorithmSettings::Hms(HmsConfig::default()),
        "hms-os" => AlgorithmSettings::HmsOs(HmsOsConfig::default()),
        "hms-os-v1" => AlgorithmSettings::HmsOs(HmsOsConfig::v1()),
        "hms-os-v2" => AlgorithmSettings::HmsOs(HmsOsConfig::v2()),
        "pso" => AlgorithmSettings::Pso(PsoConfig::default()),
        "gwo" => AlgorithmSettings::Gwo(GwoConfig::default()),
        _ => {
            return Err(Error::Config(format!(
                "unknown algorithm '{name}' (known: {})",
                ALGORITHMS.join(", ")
            )))
        }
    };
    Ok(settings)
}

/// Default parameter map of a registered algorithm.
pub fn defaults_for(name: &str) -> Result<ParamMap> {
    settings_for(name).map(|s| s.params())
}

/// Defaults for `name` with `overrides` merged on top and revalidated.
pub fn resolve(name: &str, overrides: &ParamMap) -> Result<AlgorithmSettings> {
    settings_for(name)?.with_overrides(overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hms_os_defaults() {
        let d = defaults_for("hms-os").unwrap();
        assert_eq!(d["c1"], ParamValue::Real(1.5));
        assert_eq!(d["c2"], ParamValue::Real(1.5));
        assert_eq!(d["k_objective"], ParamValue::Int(10));
        assert_eq!(d["k_search"], ParamValue::Int(5));
        assert_eq!(d["m_low"], ParamValue::Int(2));
        assert_eq!(d["m_high"], ParamValue::Int(10));
    }

    #[test]
    fn hms_defaults() {
        let d = defaults_for("hms").unwrap();
        assert_eq!(d["c"], ParamValue::Real(1.0));
        assert_eq!(d["k"], ParamValue::Int(5));
        assert_eq!(d["m_low"], ParamValue::Int(2));
        assert_eq!(d["m_high"], ParamValue::Int(5));
    }

    #[test]
    fn baseline_defaults() {
        let d = defaults_for("pso").unwrap();
        assert_eq!(d["c1"], ParamValue::Real(2.0));
        assert_eq!(d["c2"], ParamValue::Real(2.0));
        assert_eq!(
            defaults_for("gwo").unwrap().keys().collect::<Vec<_>>(),
            vec!["n_pop"]
        );
    }

    #[test]
    fn invariant_violating_override() {
        let mut o = ParamMap::new();
        o.insert("m_low".into(), ParamValue::Int(6));
        assert!(matches!(resolve("hms", &o), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_merge() {
        let mut o = ParamMap::new();
        o.insert("c1".into(), ParamValue::Int(2));
        o.insert("dual_clustering".into(), ParamValue::Bool(false));
        match resolve("hms-os", &o).unwrap() {
            AlgorithmSettings::HmsOs(c) => {
                assert_eq!(c.c1, 2.0);
                assert!(!c.dual_clustering);
                assert_eq!(c.c2, 1.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(defaults_for("cma-es"), Err(Error::Config(_))));
        let mut o = ParamMap::new();
        o.insert("bogus".into(), ParamValue::Int(1));
        assert!(matches!(resolve("gwo", &o), Err(Error::Config(_))));
        o.clear();
        o.insert("adaptive_count".into(), ParamValue::Int(1));
        assert!(matches!(resolve("hms-os", &o), Err(Error::Config(_))));
    }

    #[test]
    fn every_default_validates() {
        for name in ALGORITHMS {
            settings_for(name).unwrap().validate().unwrap();
            let round_trip = resolve(name, &defaults_for(name).unwrap()).unwrap();
            assert_eq!(round_trip, settings_for(name).unwrap());
        }
    }
}
