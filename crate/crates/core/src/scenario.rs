//! Scenario and dataset-generation configuration files, with the default
//! setups of the bundled benchmark systems.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{generate_dataset, SystemSpec};
use crate::dictionary::{Dictionary, DictionaryDef, LipschitzOptions};
use crate::error::{Error, Result};
use crate::errorsets::CoverOptions;
use crate::identify::Dataset;
use crate::reach::ReachOptions;
use crate::zonotope::{IntervalBox, Zonotope};

/// A single input set or one per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSets {
    One(Zonotope),
    PerStep(Vec<Zonotope>),
}

impl InputSets {
    pub fn to_vec(&self) -> Vec<Zonotope> {
        match self {
            InputSets::One(z) => vec![z.clone()],
            InputSets::PerStep(v) => v.clone(),
        }
    }
}

/// Builtin dictionary name or an explicit definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DictionarySpec {
    Builtin(String),
    Custom(DictionaryDef),
}

impl DictionarySpec {
    pub fn resolve(&self, state_dim: usize, input_dim: usize) -> Result<Dictionary> {
        match self {
            DictionarySpec::Builtin(name) => Dictionary::builtin(name, state_dim, input_dim),
            DictionarySpec::Custom(def) => Dictionary::from_def(def),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub seed: u64,
    pub samples: usize,
    pub grid_resolution: usize,
    pub inflation: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        let l = LipschitzOptions::default();
        EstimatorConfig {
            seed: l.seed,
            samples: l.samples,
            grid_resolution: CoverOptions::default().grid_resolution,
            inflation: l.inflation,
        }
    }
}

/// One file that drives reach, verify and compare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "X0")]
    pub x0: Zonotope,
    #[serde(rename = "U")]
    pub inputs: InputSets,
    #[serde(rename = "Zw")]
    pub noise: Zonotope,
    pub horizon: usize,
    #[serde(default = "default_order")]
    pub reduction_order: f64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<DictionarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<DictionarySpec>,
    #[serde(default)]
    pub fixed_point: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<IntervalBox>,
}

fn default_order() -> f64 {
    20.0
}

impl Scenario {
    pub fn input_sets(&self) -> Vec<Zonotope> {
        self.inputs.to_vec()
    }

    pub fn reach_options(&self) -> ReachOptions {
        let e = &self.estimator;
        ReachOptions {
            reduction_order: self.reduction_order,
            fixed_point: self.fixed_point,
            lipschitz: LipschitzOptions {
                samples: e.samples,
                seed: e.seed,
                inflation: e.inflation,
            },
            cover: CoverOptions {
                grid_resolution: e.grid_resolution,
                inflation: e.inflation,
            },
            domain: self.domain.clone(),
        }
    }

    /// Dictionary named by the scenario, resolved for the given dimensions.
    pub fn koopman_dictionary(&self, state_dim: usize, input_dim: usize) -> Result<Dictionary> {
        self.dictionary
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("scenario does not name a dictionary".into()))?
            .resolve(state_dim, input_dim)
    }

    /// Comparison baseline; the identity lifting unless overridden.
    pub fn baseline_dictionary(&self, state_dim: usize, input_dim: usize) -> Result<Dictionary> {
        match &self.baseline {
            Some(spec) => spec.resolve(state_dim, input_dim),
            None => Dictionary::identity_lti(state_dim, input_dim),
        }
    }

    /// Default setup of a bundled system.
    pub fn preset(system: &SystemSpec) -> Scenario {
        let (x0, u, zw) = default_sets(system);
        let (horizon, dict, grid) = match system {
            SystemSpec::Cstr(_) => (10, "poly2-exogenous", 20),
            SystemSpec::NonAffine(_) => (50, "poly2-nonaffine", 20),
            SystemSpec::Unicycle(_) => (30, "unicycle-trig", 10),
            SystemSpec::Toy(_) => (10, "toy-quadratic", 20),
        };
        Scenario {
            x0,
            inputs: InputSets::One(u),
            noise: zw,
            horizon,
            reduction_order: default_order(),
            estimator: EstimatorConfig {
                grid_resolution: grid,
                ..Default::default()
            },
            ridge: 0.0,
            dictionary: Some(DictionarySpec::Builtin(dict.to_string())),
            baseline: None,
            fixed_point: false,
            domain: None,
        }
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn zono(center: &[f64], radii: &[f64]) -> Zonotope {
    let n = center.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { radii[i] } else { 0.0 }).collect())
        .collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Zonotope::from_slices(center, &refs).expect("preset set")
}

/// (X0, U, Zw) used by default for each bundled system.
pub fn default_sets(system: &SystemSpec) -> (Zonotope, Zonotope, Zonotope) {
    match system {
        SystemSpec::Cstr(_) | SystemSpec::NonAffine(_) => (
            zono(&[0.5, 0.4], &[0.05, 0.3]),
            zono(&[-0.4, 1.4], &[0.1, 0.2]),
            Zonotope::from_slices(&[0.0, 0.0], &[&[1e-4], &[1e-4]]).expect("preset set"),
        ),
        SystemSpec::Unicycle(_) => (
            zono(&[0.0, 0.0, 0.0], &[0.1, 0.1, 0.1]),
            zono(&[1.0, 0.5], &[0.2, 0.2]),
            Zonotope::from_slices(&[0.0, 0.0, 0.0], &[&[1e-4], &[1e-4], &[1e-4]]).expect("preset set"),
        ),
        SystemSpec::Toy(_) => (zono(&[0.0, 0.0], &[1.0, 1.0]), zono(&[0.0], &[1.0]), Zonotope::zero(2)),
    }
}

/// Configuration of `simulate`: number and lengths of trajectories, the
/// sampling sets, and optional system parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    #[serde(rename = "X0", default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Zonotope>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Zonotope>,
    #[serde(rename = "Zw", default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Zonotope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
}

fn default_trajectories() -> usize {
    30
}

impl DatasetConfig {
    /// Default trajectory count and length of a bundled system.
    pub fn preset(system: &SystemSpec) -> DatasetConfig {
        let length = match system {
            // the reactor leaves its physical range after a dozen steps from X0
            SystemSpec::Cstr(_) => 10,
            SystemSpec::Toy(_) => 10,
            _ => 60,
        };
        DatasetConfig {
            trajectories: default_trajectories(),
            length: Some(length),
            lengths: None,
            x0: None,
            inputs: None,
            noise: None,
            params: None,
        }
    }

    pub fn lengths(&self) -> Result<Vec<usize>> {
        match (&self.lengths, self.length) {
            (Some(ls), _) => {
                if ls.len() != self.trajectories {
                    return Err(Error::InvalidArgument(format!(
                        "`lengths` has {} entries but `trajectories` is {}",
                        ls.len(),
                        self.trajectories
                    )));
                }
                Ok(ls.clone())
            }
            (None, Some(l)) => Ok(vec![l; self.trajectories]),
            (None, None) => Err(Error::InvalidArgument("config needs `length` or `lengths`".into())),
        }
    }

    /// The system named `name`, with `params` applied when present.
    pub fn system(&self, name: &str) -> Result<SystemSpec> {
        let base = SystemSpec::from_name(name)?;
        match &self.params {
            None => Ok(base),
            Some(p) => {
                let tagged = serde_json::json!({ "system": base.name(), "params": p });
                Ok(serde_json::from_value(tagged)?)
            }
        }
    }

    /// Simulates the configured dataset.
    pub fn generate(&self, system: &SystemSpec, seed: u64) -> Result<Dataset> {
        let (x0, u, zw) = default_sets(system);
        generate_dataset(
            system,
            self.x0.as_ref().unwrap_or(&x0),
            self.inputs.as_ref().unwrap_or(&u),
            self.noise.as_ref().unwrap_or(&zw),
            &self.lengths()?,
            seed,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_json_round_trip_and_defaults() {
        let s = Scenario::preset(&SystemSpec::from_name("nonaffine").unwrap());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&json).unwrap(), s);

        let minimal = r#"{"X0":{"center":[0,0],"generators":[[1,0],[0,1]]},
            "U":[{"center":[0],"generators":[[1]]},{"center":[1],"generators":[]}],
            "Zw":{"center":[0,0],"generators":[]},"horizon":2}"#;
        let s: Scenario = serde_json::from_str(minimal).unwrap();
        assert_eq!(s.input_sets().len(), 2);
        assert_eq!(s.reduction_order, 20.0);
        assert_eq!(s.estimator, EstimatorConfig::default());
        assert!(s.koopman_dictionary(2, 1).is_err());
        assert!(s.baseline_dictionary(2, 1).unwrap().is_linear());
    }

    #[test]
    fn dictionary_specs() {
        let b: DictionarySpec = serde_json::from_str(r#""poly2-exogenous""#).unwrap();
        assert_eq!(b.resolve(2, 2).unwrap().p_phi(), 6);
        let c: DictionarySpec =
            serde_json::from_str(r#"{"phi":["x1","x1^2"],"nu":["u1"],"state_dim":1,"input_dim":1}"#).unwrap();
        assert_eq!(c.resolve(1, 1).unwrap().p_phi(), 2);
    }

    #[test]
    fn dataset_config() {
        let c: DatasetConfig = serde_json::from_str(r#"{"trajectories":3,"length":4,"params":{"mu":0.5}}"#).unwrap();
        let sys = c.system("toy").unwrap();
        assert!(matches!(&sys, SystemSpec::Toy(p) if p.mu == 0.5 && p.lambda == 0.5));
        let d = c.generate(&sys, 1).unwrap();
        assert_eq!(d.total_transitions(), 12);
        let bad: DatasetConfig = serde_json::from_str(r#"{"trajectories":3,"lengths":[1,2]}"#).unwrap();
        assert!(bad.lengths().is_err());
        assert!(c.system("nope").is_err());
    }
}
