//! Uncertainty sets entering the projected reachable sets: lifted noise,
//! multi-step Koopman residuals, and the covering-radius set.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identify::{Dataset, KoopmanModel};
use crate::zonotope::{IntervalBox, Zonotope};

/// ⟨0, L_ψ (‖c‖_∞ + ‖G‖_∞) I⟩ in the lifted state space, where ‖G‖_∞ is the
/// largest absolute row sum of the noise generators.
pub fn lifted_noise_zonotope(l_psi: f64, noise: &Zonotope, p_phi: usize) -> Result<Zonotope> {
    if !(l_psi >= 0.0) {
        return Err(Error::InvalidArgument(format!("L_psi must be ≥ 0, got {l_psi}")));
    }
    let c = noise.center().amax();
    let g = noise.radius().max().max(0.0);
    let r = l_psi * (c + g);
    Zonotope::axis_aligned(DVector::zeros(p_phi), &DVector::from_element(p_phi, r))
}

/// Residuals R^(k) for k = 1..N, each in the original state space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualBank {
    residuals: Vec<Vec<DVector<f64>>>,
}

impl ResidualBank {
    pub fn from_residuals(residuals: Vec<Vec<DVector<f64>>>) -> Self {
        ResidualBank { residuals }
    }

    pub fn horizon(&self) -> usize {
        self.residuals.len()
    }

    /// Residuals at step `k` (1-based).
    pub fn at(&self, k: usize) -> &[DVector<f64>] {
        &self.residuals[k - 1]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.residuals.iter().map(Vec::len).collect()
    }
}

/// Rolls the lifted model from every data column for up to `horizon` steps
/// with the measured inputs and records C(φ(x_{j+k}) − ẑ_k).
pub fn multi_step_residuals(data: &Dataset, model: &KoopmanModel, horizon: usize) -> Result<ResidualBank> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("residual horizon must be ≥ 1".into()));
    }
    let dict = model.dictionary();
    let c = dict.projection();
    let starts: Vec<(usize, usize)> = data
        .trajectories()
        .iter()
        .enumerate()
        .flat_map(|(i, t)| (0..t.len()).map(move |j| (i, j)))
        .collect();
    if starts.is_empty() {
        return Err(Error::EmptyData("dataset has no transitions".into()));
    }
    let per_start = starts
        .par_iter()
        .map(|&(i, j)| {
            let traj = &data.trajectories()[i];
            let fail = |step: usize, cause: Error| Error::Rollout {
                trajectory: i,
                start: j,
                step,
                cause: Box::new(cause),
            };
            let steps = horizon.min(traj.len() - j);
            let mut z = dict.lift_state(&traj.state(j)).map_err(|e| fail(0, e))?;
            let mut out = Vec::with_capacity(steps);
            for k in 1..=steps {
                z = model.step(&z, &traj.input(j + k - 1)).map_err(|e| fail(k, e))?;
                if z.iter().any(|v| !v.is_finite()) {
                    return Err(fail(k, Error::domain("non-finite lifted prediction")));
                }
                let truth = dict.lift_state(&traj.state(j + k)).map_err(|e| fail(k, e))?;
                out.push(c * (truth - &z));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut residuals = vec![Vec::new(); horizon];
    for rs in per_start {
        for (k, r) in rs.into_iter().enumerate() {
            residuals[k].push(r);
        }
    }
    Ok(ResidualBank { residuals })
}

/// L_k as the interval hull of the step-k residuals.
pub fn residual_zonotopes(bank: &ResidualBank) -> Result<Vec<Zonotope>> {
    (1..=bank.horizon())
        .map(|k| {
            let b = IntervalBox::bounding(bank.at(k).iter().cloned()).ok_or_else(|| {
                Error::EmptyData(format!(
                    "no residuals at step {k}; the horizon exceeds every trajectory length"
                ))
            })?;
            Zonotope::from_box(&b)
        })
        .collect()
}

/// Options for the L* / δ estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverOptions {
    /// Grid points per axis of the (x, u) domain.
    pub grid_resolution: usize,
    pub inflation: f64,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            grid_resolution: 20,
            inflation: 1.1,
        }
    }
}

/// Joint (x, u) samples of all transitions and their successors.
fn samples(data: &Dataset) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    data.transitions()
        .map(|t| {
            let s = DVector::from_iterator(
                t.state.len() + t.input.len(),
                t.state.iter().chain(t.input.iter()).copied(),
            );
            (s, t.next)
        })
        .unzip()
}

/// Bounding box of the joint (x, u) data samples.
pub fn data_domain(data: &Dataset) -> Result<IntervalBox> {
    let (s, _) = samples(data);
    IntervalBox::bounding(s).ok_or_else(|| Error::EmptyData("dataset has no transitions".into()))
}

/// Pairwise-slope estimate of the per-dimension Lipschitz constants L* of
/// f, and the covering radius δ of the data over a grid on `domain`.
pub fn estimate_lipschitz_and_delta(
    data: &Dataset,
    domain: Option<&IntervalBox>,
    opts: &CoverOptions,
) -> Result<(DVector<f64>, f64)> {
    let (s, f) = samples(data);
    if s.len() < 2 {
        return Err(Error::EmptyData("L* estimation needs at least two transitions".into()));
    }
    let n = data.state_dim();

    let best = (0..s.len())
        .into_par_iter()
        .map(|a| {
            let mut best = DVector::<f64>::zeros(n);
            let mut pairs = 0usize;
            for b in a + 1..s.len() {
                let d = (&s[a] - &s[b]).norm();
                if d == 0.0 {
                    continue;
                }
                pairs += 1;
                for i in 0..n {
                    best[i] = best[i].max((f[a][i] - f[b][i]).abs() / d);
                }
            }
            (best, pairs)
        })
        .reduce(
            || (DVector::zeros(n), 0),
            |(a, pa), (b, pb)| (a.zip_map(&b, f64::max), pa + pb),
        );
    if best.1 == 0 {
        return Err(Error::InvalidArgument(
            "all data samples coincide; L* is undefined".into(),
        ));
    }
    let l_star = best.0 * opts.inflation;

    let owned;
    let domain = match domain {
        Some(d) => d,
        None => {
            owned = data_domain(data)?;
            &owned
        }
    };
    let delta = covering_radius(&s, domain, opts.grid_resolution)?;
    Ok((l_star, delta))
}

/// max over a regular grid on `domain` of the 2-norm distance to the nearest
/// sample lying inside the domain.
pub fn covering_radius(points: &[DVector<f64>], domain: &IntervalBox, resolution: usize) -> Result<f64> {
    let dim = domain.dim();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::dim("covering samples and domain differ in dimension"));
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be ≥ 1".into()));
    }
    let inside: Vec<&DVector<f64>> = points.iter().filter(|p| domain.contains(p)).collect();
    if inside.is_empty() {
        return Err(Error::EmptyData(
            "no data sample lies inside the covering domain".into(),
        ));
    }
    // axes with zero width get a single grid point
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let (lo, hi) = (domain.lower()[i], domain.upper()[i]);
            if hi == lo || resolution == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..resolution)
                    .map(|t| lo + (hi - lo) * t as f64 / (resolution - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let worst_sq = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut g = vec![0.0; dim];
            for (i, axis) in axes.iter().enumerate() {
                g[i] = axis[idx % axis.len()];
                idx /= axis.len();
            }
            let mut nearest = f64::INFINITY;
            for p in &inside {
                let mut d = 0.0;
                for i in 0..dim {
                    let t = g[i] - p[i];
                    d += t * t;
                    if d >= nearest {
                        break;
                    }
                }
                nearest = nearest.min(d);
            }
            nearest
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst_sq.sqrt())
}

/// ⟨0, diag(L*_i δ / 2)⟩.
pub fn epsilon_zonotope(l_star: &DVector<f64>, delta: f64) -> Result<Zonotope> {
    if !(delta >= 0.0) || l_star.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument("L* and delta must be non-negative".into()));
    }
    Zonotope::axis_aligned(DVector::zeros(l_star.len()), &(l_star * (0.5 * delta)))
}

/// All uncertainty sets of one reachability run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSets {
    pub z_wpsi: Zonotope,
    pub residual_sets: Vec<Zonotope>,
    pub z_eps: Zonotope,
    pub l_star: Vec<f64>,
    pub delta: f64,
    pub l_psi: f64,
    pub residual_counts: Vec<usize>,
}
