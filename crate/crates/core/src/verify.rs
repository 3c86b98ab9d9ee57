//! Monte Carlo soundness checks and conservatism metrics.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{stream_rng, SystemSpec};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::identify::{Dataset, KoopmanModel};
use crate::reach::{input_at, reach, ReachOptions, ReachResult};
use crate::zonotope::Zonotope;

/// Membership tolerance used by the Monte Carlo oracle.
pub const CONTAINMENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepContainment {
    pub k: usize,
    pub contained: usize,
    pub violated: usize,
    /// Samples whose LP was inconclusive; counted as not contained.
    pub indeterminate: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sample: usize,
    pub k: usize,
    pub state: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    pub seed: u64,
    pub horizon: usize,
    pub steps: Vec<StepContainment>,
    pub first_violation: Option<Violation>,
}

impl ContainmentReport {
    pub fn all_contained(&self) -> bool {
        self.steps.iter().all(|s| s.contained == self.samples)
    }

    pub fn total_violations(&self) -> usize {
        self.steps.iter().map(|s| s.violated + s.indeterminate).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Outcome {
    In,
    Out,
    Unknown,
}

type SampleRun = (Vec<Outcome>, Option<Violation>);

/// Simulates `samples` true trajectories from X0 under random admissible
/// inputs and noise, and checks x_k ∈ R′_k for k = 1..N.
pub fn monte_carlo_containment(
    system: &SystemSpec,
    x0: &Zonotope,
    inputs: &[Zonotope],
    noise: &Zonotope,
    result: &ReachResult,
    samples: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one Monte Carlo sample is required".into(),
        ));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("at least one input set is required".into()));
    }
    let n = system.state_dim();
    if x0.dim() != n || noise.dim() != n || result.projected_sets.iter().any(|z| z.dim() != n) {
        return Err(Error::dim(format!("{} has {} states", system.name(), n)));
    }
    let horizon = result.projected_sets.len();

    let runs: Vec<SampleRun> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut x = x0.sample(&mut rng);
            let mut out = vec![Outcome::Out; horizon];
            let mut first = None;
            for (k, slot) in out.iter_mut().enumerate() {
                let u = input_at(inputs, k).sample(&mut rng);
                let w = noise.sample(&mut rng);
                x = match system.step(&x, &u, &w) {
                    Ok(next) => next,
                    Err(e) => {
                        // the remaining steps stay marked as violations
                        first.get_or_insert(Violation {
                            sample: i,
                            k: k + 1,
                            state: x.iter().copied().collect(),
                            reason: format!("simulation failed: {e}"),
                        });
                        break;
                    }
                };
                let set = &result.projected_sets[k];
                *slot = match set.contains_point(&x, CONTAINMENT_TOL) {
                    Ok(true) => Outcome::In,
                    Ok(false) => {
                        if first.is_none() {
                            let norm = set.membership(&x, CONTAINMENT_TOL).map_or(f64::NAN, |m| m.min_norm);
                            first = Some(Violation {
                                sample: i,
                                k: k + 1,
                                state: x.iter().copied().collect(),
                                reason: format!("outside R'_k, minimal coefficient norm {norm}"),
                            });
                        }
                        Outcome::Out
                    }
                    Err(e) => {
                        first.get_or_insert(Violation {
                            sample: i,
                            k: k + 1,
                            state: x.iter().copied().collect(),
                            reason: e.to_string(),
                        });
                        Outcome::Unknown
                    }
                };
            }
            (out, first)
        })
        .collect();

    let steps = (0..horizon)
        .map(|k| {
            let count = |o: Outcome| runs.iter().filter(|(r, _)| r[k] == o).count();
            let contained = count(Outcome::In);
            StepContainment {
                k: k + 1,
                contained,
                violated: count(Outcome::Out),
                indeterminate: count(Outcome::Unknown),
                fraction: contained as f64 / samples as f64,
            }
        })
        .collect();
    // samples are scanned in index order, so the report is schedule-independent
    let first_violation = runs.into_iter().find_map(|(_, v)| v);
    Ok(ContainmentReport {
        samples,
        seed,
        horizon,
        steps,
        first_violation,
    })
}

/// Interval-hull widths of R′_1..R′_N.
pub fn interval_width_metrics(result: &ReachResult) -> Vec<DVector<f64>> {
    result
        .projected_sets
        .iter()
        .map(|z| z.interval_hull().widths())
        .collect()
}

/// Everything that defines one reachability run apart from the data.
#[derive(Clone, Debug)]
pub struct RunSetup<'a> {
    pub x0: &'a Zonotope,
    pub inputs: &'a [Zonotope],
    pub noise: &'a Zonotope,
    pub horizon: usize,
    pub ridge: f64,
    pub options: &'a ReachOptions,
}

/// Identification followed by reachability.
pub fn run_pipeline(data: &Dataset, dict: &Dictionary, setup: &RunSetup<'_>) -> Result<(KoopmanModel, ReachResult)> {
    let model = KoopmanModel::identify(data, dict, setup.ridge)?;
    let result = reach(
        &model,
        data,
        setup.x0,
        setup.inputs,
        setup.noise,
        setup.horizon,
        setup.options,
    )?;
    Ok((model, result))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub k: usize,
    pub dim: usize,
    pub width_koopman: f64,
    pub width_baseline: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub koopman: String,
    pub baseline: String,
    pub rows: Vec<WidthRow>,
}

impl Comparison {
    /// Rows of the last step.
    pub fn final_rows(&self) -> impl Iterator<Item = &WidthRow> {
        let last = self.rows.iter().map(|r| r.k).max().unwrap_or(0);
        self.rows.iter().filter(move |r| r.k == last)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        a / b
    }
}

/// Runs the pipeline with two dictionaries on the same data and scenario and
/// tabulates the per-step hull widths.
pub fn compare_pipelines(
    data: &Dataset,
    koopman: &Dictionary,
    baseline: &Dictionary,
    setup: &RunSetup<'_>,
) -> Result<Comparison> {
    let branch = |d: &Dictionary, label: &str| {
        run_pipeline(data, d, setup).map_err(|e| Error::Pipeline {
            branch: format!("{label} (`{}`)", d.name()),
            cause: Box::new(e),
        })
    };
    let (_, rk) = branch(koopman, "koopman")?;
    let (_, rb) = branch(baseline, "baseline")?;
    let (wk, wb) = (interval_width_metrics(&rk), interval_width_metrics(&rb));
    let rows = wk
        .iter()
        .zip(wb.iter())
        .enumerate()
        .flat_map(|(k, (a, b))| {
            (0..a.len()).map(move |i| WidthRow {
                k: k + 1,
                dim: i + 1,
                width_koopman: a[i],
                width_baseline: b[i],
                ratio: ratio(a[i], b[i]),
            })
        })
        .collect();
    Ok(Comparison {
        koopman: koopman.name().to_string(),
        baseline: baseline.name().to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::errorsets::ErrorSets;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn fake_result(sets: Vec<Zonotope>) -> ReachResult {
        ReachResult {
            horizon: sets.len(),
            lifted_sets: vec![],
            projected_sets: sets,
            error_sets: ErrorSets {
                z_wpsi: Zonotope::zero(1),
                residual_sets: vec![],
                z_eps: Zonotope::zero(1),
                l_star: vec![],
                delta: 0.0,
                l_psi: 0.0,
                residual_counts: vec![],
            },
            remainder_sets: vec![],
            linearization_points: vec![],
            options: ReachOptions::default(),
        }
    }

    fn setup() -> (SystemSpec, Zonotope, Zonotope, Zonotope) {
        (
            SystemSpec::from_name("nonaffine").unwrap(),
            Zonotope::from_slices(&[0.5, 0.4], &[&[0.05, 0.0], &[0.0, 0.3]]).unwrap(),
            Zonotope::from_slices(&[-0.4, 1.4], &[&[0.1, 0.0], &[0.0, 0.2]]).unwrap(),
            Zonotope::from_slices(&[0.0, 0.0], &[&[1e-4], &[1e-4]]).unwrap(),
        )
    }

    #[test]
    fn huge_boxes_contain_everything() {
        let (sys, x0, u, zw) = setup();
        let big = Zonotope::from_slices(&[0.0, 0.0], &[&[100.0, 0.0], &[0.0, 100.0]]).unwrap();
        let res = fake_result(vec![big; 5]);
        let rep = monte_carlo_containment(&sys, &x0, &[u], &zw, &res, 50, 1).unwrap();
        assert!(rep.all_contained());
        assert!(rep.steps.iter().all(|s| s.fraction == 1.0));
        assert!(rep.first_violation.is_none());
    }

    #[test]
    fn offset_singletons_are_caught() {
        let (sys, x0, u, zw) = setup();
        let res = fake_result(vec![Zonotope::singleton(v(&[10.0, 10.0])); 3]);
        let rep = monte_carlo_containment(&sys, &x0, std::slice::from_ref(&u), &zw, &res, 20, 1).unwrap();
        assert!(!rep.all_contained());
        assert_eq!(rep.total_violations(), 60);
        let first = rep.first_violation.clone().unwrap();
        assert_eq!((first.sample, first.k), (0, 1));
        // reproducible
        assert_eq!(monte_carlo_containment(&sys, &x0, &[u], &zw, &res, 20, 1).unwrap(), rep);
    }

    #[test]
    fn width_examples() {
        let res = fake_result(vec![
            Zonotope::singleton(v(&[1.0, 2.0])),
            Zonotope::from_slices(&[0.0, 0.0], &[&[1.0, 0.0], &[0.0, 2.0]]).unwrap(),
        ]);
        let w = interval_width_metrics(&res);
        assert_eq!(w[0], v(&[0.0, 0.0]));
        assert_eq!(w[1], v(&[2.0, 4.0]));
    }
}
