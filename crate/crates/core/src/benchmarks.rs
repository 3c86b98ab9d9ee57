//! Ground-truth simulators and the bounded-noise dataset generator.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::{Dataset, Trajectory};
use crate::zonotope::Zonotope;

/// Parameters of the discretized stirred tank reactor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CstrParams {
    pub rho: f64,
    pub cp: f64,
    pub delta_h: f64,
    pub e_r: f64,
    pub k0: f64,
    pub ua: f64,
    pub q: f64,
    pub v: f64,
    pub t_f: f64,
    pub c_af: f64,
    pub c_a0: f64,
    pub t_0: f64,
    /// Coolant temperature, used as the constant control input.
    pub t_c0: f64,
    pub t_s: f64,
}

impl Default for CstrParams {
    fn default() -> Self {
        CstrParams {
            rho: 1000.0,
            cp: 0.239,
            delta_h: -5e4,
            e_r: 8750.0,
            k0: 7.2e10,
            ua: 5e4,
            q: 100.0,
            v: 100.0,
            t_f: 350.0,
            c_af: 1.0,
            c_a0: 0.5,
            t_0: 350.0,
            t_c0: 300.0,
            t_s: 0.015,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonAffineParams {
    pub lambda: f64,
    pub mu: f64,
    pub t_s: f64,
}

impl Default for NonAffineParams {
    fn default() -> Self {
        NonAffineParams {
            lambda: 1.0,
            mu: -0.05,
            t_s: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnicycleParams {
    pub t_s: f64,
}

impl Default for UnicycleParams {
    fn default() -> Self {
        UnicycleParams { t_s: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyParams {
    pub mu: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl Default for ToyParams {
    fn default() -> Self {
        ToyParams {
            mu: 0.9,
            lambda: 0.5,
            delta: 1.0,
        }
    }
}

/// A benchmark system x⁺ = f(x, u) + w.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", content = "params", rename_all = "lowercase")]
pub enum SystemSpec {
    Cstr(CstrParams),
    NonAffine(NonAffineParams),
    Unicycle(UnicycleParams),
    Toy(ToyParams),
}

pub const SYSTEM_NAMES: [&str; 4] = ["cstr", "nonaffine", "unicycle", "toy"];

impl SystemSpec {
    /// Default-parameter system by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "cstr" => Ok(SystemSpec::Cstr(CstrParams::default())),
            "nonaffine" => Ok(SystemSpec::NonAffine(NonAffineParams::default())),
            "unicycle" => Ok(SystemSpec::Unicycle(UnicycleParams::default())),
            "toy" => Ok(SystemSpec::Toy(ToyParams::default())),
            _ => Err(Error::Unknown {
                kind: "system",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Cstr(_) => "cstr",
            SystemSpec::NonAffine(_) => "nonaffine",
            SystemSpec::Unicycle(_) => "unicycle",
            SystemSpec::Toy(_) => "toy",
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            SystemSpec::Unicycle(_) => 3,
            _ => 2,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            SystemSpec::Toy(_) => 1,
            _ => 2,
        }
    }

    /// f(x, u) + w.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        let (n, m) = (self.state_dim(), self.input_dim());
        if x.len() != n || u.len() != m || w.len() != n {
            return Err(Error::dim(format!(
                "{} expects x, u, w of lengths ({n}, {m}, {n}), got ({}, {}, {})",
                self.name(),
                x.len(),
                u.len(),
                w.len()
            )));
        }
        let next = match self {
            SystemSpec::Cstr(p) => cstr_step(p, x, u, w)?,
            SystemSpec::NonAffine(p) => nonaffine_step(p, x, u, w),
            SystemSpec::Unicycle(p) => unicycle_step(p, x, u, w),
            SystemSpec::Toy(p) => toy_step(p, x, u[0]) + w,
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("{} produced a non-finite state", self.name())));
        }
        Ok(next)
    }
}

pub fn cstr_step(p: &CstrParams, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
    let temp = x[1] + p.t_0;
    if !(temp > 0.0) {
        return Err(Error::domain(format!(
            "CSTR temperature x2 + T0 = {temp} must be positive"
        )));
    }
    let arrhenius = (-p.e_r / temp).exp();
    let conc = x[0] + p.c_a0;
    let flow = p.q * p.t_s / (2.0 * p.v);
    let cool = p.t_s * p.ua / (2.0 * p.v * p.rho * p.cp);

    let x1 = ((1.0 - flow - p.k0 * p.t_s * arrhenius) * conc + p.q / p.v * p.c_af * p.t_s) / (1.0 + flow)
        + u[0] * p.t_s
        - p.c_a0;
    let x2 = (temp * (1.0 - flow - cool) + p.t_s * (p.q / p.v * p.t_f + p.ua / (p.v * p.rho * p.cp) * p.t_c0))
        / (1.0 + flow + cool)
        - conc * p.delta_h * p.k0 * p.t_s / (p.rho * p.cp) * arrhenius
        + u[1] * p.t_s
        - p.t_0;
    Ok(DVector::from_vec(vec![x1 + w[0], x2 + w[1]]))
}

pub fn nonaffine_step(p: &NonAffineParams, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let (x1, x2, u1, u2) = (x[0], x[1], u[0], u[1]);
    let n1 = x1 + p.t_s * (p.mu * x1 - x1) + p.t_s * x1 * u1.exp();
    let n2 = x2 + p.t_s * (p.lambda * (x2 - x1 * x1) - x2) + p.t_s * (u1 * u2 + x2 * u2.exp());
    DVector::from_vec(vec![n1 + w[0], n2 + w[1]])
}

pub fn unicycle_step(p: &UnicycleParams, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let (v, omega) = (u[0], u[1]);
    DVector::from_vec(vec![
        x[0] + p.t_s * v * x[2].cos() + w[0],
        x[1] + p.t_s * v * x[2].sin() + w[1],
        x[2] + p.t_s * omega + w[2],
    ])
}

pub fn toy_step(p: &ToyParams, x: &DVector<f64>, u: f64) -> DVector<f64> {
    DVector::from_vec(vec![p.mu * x[0], p.lambda * (x[1] - x[0] * x[0]) + p.delta * u])
}

/// Per-index RNG: stream `index` of a ChaCha8 generator seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Rolls out `lengths.len()` trajectories with x₀ ∈ X0, u_k ∈ U and w_k ∈ Zw
/// drawn uniformly in the generator coefficients.
pub fn generate_dataset(
    system: &SystemSpec,
    x0: &Zonotope,
    inputs: &Zonotope,
    noise: &Zonotope,
    lengths: &[usize],
    seed: u64,
) -> Result<Dataset> {
    let (n, m) = (system.state_dim(), system.input_dim());
    if x0.dim() != n || inputs.dim() != m || noise.dim() != n {
        return Err(Error::dim(format!(
            "{} needs X0 and Zw of dimension {n} and U of dimension {m}",
            system.name()
        )));
    }
    if lengths.is_empty() || lengths.contains(&0) {
        return Err(Error::InvalidArgument("trajectory lengths must be ≥ 1".into()));
    }
    let trajectories = lengths
        .par_iter()
        .enumerate()
        .map(|(i, &len)| {
            let mut rng = stream_rng(seed, i as u64);
            let mut x = x0.sample(&mut rng);
            let mut xs = vec![x.clone()];
            let mut us = Vec::with_capacity(len);
            for k in 0..len {
                let u = inputs.sample(&mut rng);
                let w = noise.sample(&mut rng);
                x = system.step(&x, &u, &w).map_err(|e| Error::Simulation {
                    trajectory: i,
                    step: k,
                    cause: Box::new(e),
                })?;
                xs.push(x.clone());
                us.push(u);
            }
            Trajectory::from_columns(&xs, &us, m)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trajectories)
}
