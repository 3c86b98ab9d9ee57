//! Reachability of the identified lifted system with conservative
//! linearization, projected back to the state space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, LipschitzOptions};
use crate::error::{Error, Result};
use crate::errorsets::{
    self, estimate_lipschitz_and_delta, lifted_noise_zonotope, multi_step_residuals, residual_zonotopes, CoverOptions,
    ErrorSets,
};
use crate::identify::{Dataset, KoopmanModel};
use crate::interval::Interval;
use crate::zonotope::{IntervalBox, Zonotope};

/// φ(X0) enclosure: state coordinates are the exact image of X0, every other
/// lifted coordinate is boxed by interval evaluation over the hull of X0.
pub fn lift_initial_set(dict: &Dictionary, x0: &Zonotope) -> Result<Zonotope> {
    if x0.dim() != dict.state_dim() {
        return Err(Error::dim(format!(
            "X0 has dimension {}, dictionary `{}` expects {}",
            x0.dim(),
            dict.name(),
            dict.state_dim()
        )));
    }
    let p = dict.p_phi();
    let hull = x0.interval_hull();
    let boxed = dict.lift_box(&hull)?;
    let mut is_state = vec![false; p];
    for &i in dict.state_index() {
        is_state[i] = true;
    }

    let mut center = DVector::zeros(p);
    let mut radii = DVector::zeros(p);
    for (i, iv) in boxed.iter().enumerate() {
        if !is_state[i] {
            center[i] = iv.mid();
            radii[i] = 0.5 * iv.width();
        }
    }
    let mut lin = DMatrix::zeros(p, x0.order());
    for (s, &i) in dict.state_index().iter().enumerate() {
        center[i] = x0.center()[s];
        lin.set_row(i, &x0.generators().row(s));
    }
    Zonotope::new(center, lin)?.minkowski_sum(&Zonotope::axis_aligned(DVector::zeros(p), &radii)?)
}

/// First-order model of g(z, u) = A z + B ν(z, u) about (z*, u*).
#[derive(Clone, Debug, PartialEq)]
pub struct Linearization {
    pub z_star: DVector<f64>,
    pub u_star: DVector<f64>,
    /// [g(z*, u*), Ā, B̄].
    pub m: DMatrix<f64>,
}

impl Linearization {
    pub fn offset(&self) -> DVector<f64> {
        self.m.column(0).into_owned()
    }

    pub fn a_bar(&self) -> DMatrix<f64> {
        self.m.columns(1, self.z_star.len()).into_owned()
    }

    pub fn b_bar(&self) -> DMatrix<f64> {
        self.m.columns(1 + self.z_star.len(), self.u_star.len()).into_owned()
    }

    /// M · [1; z − z*; u − u*].
    pub fn eval(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.offset() + self.a_bar() * (z - &self.z_star) + self.b_bar() * (u - &self.u_star)
    }
}

pub fn linearize(model: &KoopmanModel, z_star: &DVector<f64>, u_star: &DVector<f64>) -> Result<Linearization> {
    let dict = model.dictionary();
    let (jz, ju) = dict.nu_jacobians(z_star, u_star)?;
    let g = model.step(z_star, u_star)?;
    let a_bar = model.a() + model.b() * jz;
    let b_bar = model.b() * ju;
    let (p, m) = (dict.p_phi(), dict.input_dim());
    let mut mat = DMatrix::zeros(p, 1 + p + m);
    mat.set_column(0, &g);
    mat.columns_mut(1, p).copy_from(&a_bar);
    mat.columns_mut(1 + p, m).copy_from(&b_bar);
    Ok(Linearization {
        z_star: z_star.clone(),
        u_star: u_star.clone(),
        m: mat,
    })
}

/// Box enclosure ⟨0, diag(b)⟩ of the Lagrange remainder with
/// b_i = ½ Δᵀ |Σ_j B_ij Hess ν_j| Δ over the joint hull.
pub fn lagrange_remainder(
    model: &KoopmanModel,
    lifted_hull: &IntervalBox,
    input_hull: &IntervalBox,
    z_star: &DVector<f64>,
    u_star: &DVector<f64>,
) -> Result<Zonotope> {
    let dict = model.dictionary();
    let p = dict.p_phi();
    if lifted_hull.dim() != p || input_hull.dim() != dict.input_dim() {
        return Err(Error::dim("remainder hulls do not match the dictionary dimensions"));
    }
    if dict.is_linear() {
        return Ok(Zonotope::zero(p));
    }
    let joint = lifted_hull.product(input_hull);
    let star = DVector::from_iterator(joint.dim(), z_star.iter().chain(u_star.iter()).copied());
    if !joint.contains(&star) {
        return Err(Error::InvalidArgument(
            "linearization point lies outside the remainder hull".into(),
        ));
    }
    let dev = DVector::from_fn(joint.dim(), |i, _| {
        (joint.upper()[i] - star[i]).max(star[i] - joint.lower()[i])
    });
    let hessians = dict.nu_hessian_bounds(&joint)?;
    let n = joint.dim();
    let b = model.b();
    let mut bounds = DVector::zeros(p);
    for i in 0..p {
        let mut bound = 0.0;
        for r in 0..n {
            for c in 0..n {
                let mut acc = Interval::point(0.0);
                for (j, h) in hessians.iter().enumerate() {
                    let bij = b[(i, j)];
                    if bij != 0.0 {
                        acc = acc + h.get(r, c).scale(bij);
                    }
                }
                bound += acc.mag() * dev[r] * dev[c];
            }
        }
        bounds[i] = 0.5 * bound;
    }
    if bounds.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("Lagrange remainder bound is not finite"));
    }
    Zonotope::axis_aligned(DVector::zeros(p), &bounds)
}

/// M·({1} × (R̄_k − z*) × (U_k − u*)) ⊕ L̄_k ⊕ Z_wψ.
pub fn propagate_step(
    lifted: &Zonotope,
    inputs: &Zonotope,
    lin: &Linearization,
    remainder: &Zonotope,
    lifted_noise: &Zonotope,
) -> Result<Zonotope> {
    let one = Zonotope::singleton(DVector::from_element(1, 1.0));
    let shifted = one
        .cartesian_product(&lifted.translate(&-&lin.z_star)?)
        .cartesian_product(&inputs.translate(&-&lin.u_star)?);
    shifted
        .linear_map(&lin.m)?
        .minkowski_sum(remainder)?
        .minkowski_sum(lifted_noise)
}

/// C·R̄ ⊕ L_k ⊕ Z_ε.
pub fn project_and_inflate(
    lifted: &Zonotope,
    projection: &DMatrix<f64>,
    residual: &Zonotope,
    eps: &Zonotope,
) -> Result<Zonotope> {
    lifted
        .linear_map(projection)?
        .minkowski_sum(residual)?
        .minkowski_sum(eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachOptions {
    pub reduction_order: f64,
    /// Re-evaluate the remainder over the hull of the current and the
    /// propagated set until it stops growing.
    pub fixed_point: bool,
    pub lipschitz: LipschitzOptions,
    pub cover: CoverOptions,
    /// (x, u) domain for δ; defaults to the data bounding box.
    pub domain: Option<IntervalBox>,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            reduction_order: 20.0,
            fixed_point: false,
            lipschitz: LipschitzOptions::default(),
            cover: CoverOptions::default(),
            domain: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationPoint {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachResult {
    pub horizon: usize,
    /// R̄_0 ..= R̄_N.
    pub lifted_sets: Vec<Zonotope>,
    /// R′_1 ..= R′_N.
    pub projected_sets: Vec<Zonotope>,
    pub error_sets: ErrorSets,
    /// L̄_0 .. L̄_{N−1}.
    pub remainder_sets: Vec<Zonotope>,
    pub linearization_points: Vec<LinearizationPoint>,
    pub options: ReachOptions,
}

impl ReachResult {
    /// Copy with every projected set scaled about its center.
    pub fn shrunk(&self, factor: f64) -> ReachResult {
        let mut out = self.clone();
        for z in &mut out.projected_sets {
            *z = z.scaled_about_center(factor);
        }
        out
    }
}

/// Domain for the L_ψ estimate: data states and X0, enlarged by 10 %, with
/// the data inputs and every input set.
fn lipschitz_domain(data: &Dataset, x0: &Zonotope, inputs: &[Zonotope]) -> Result<(IntervalBox, IntervalBox)> {
    let states = IntervalBox::bounding(
        data.trajectories()
            .iter()
            .flat_map(|t| (0..t.states().ncols()).map(move |k| t.state(k))),
    )
    .ok_or_else(|| Error::EmptyData("dataset has no states".into()))?;
    let states = states.hull(&x0.interval_hull())?.enlarged(0.1, 0.0);
    let mut us = IntervalBox::bounding(data.transitions().map(|t| t.input))
        .ok_or_else(|| Error::EmptyData("dataset has no transitions".into()))?;
    for u in inputs {
        us = us.hull(&u.interval_hull())?;
    }
    Ok((states, us))
}

/// Data-driven error sets for a run of length `horizon`.
pub fn error_sets(
    model: &KoopmanModel,
    data: &Dataset,
    x0: &Zonotope,
    inputs: &[Zonotope],
    noise: &Zonotope,
    horizon: usize,
    opts: &ReachOptions,
) -> Result<ErrorSets> {
    let dict = model.dictionary();
    let (l_star, delta) = estimate_lipschitz_and_delta(data, opts.domain.as_ref(), &opts.cover)?;
    let z_eps = errorsets::epsilon_zonotope(&l_star, delta)?;
    let (residual_sets, residual_counts) = if horizon > 0 {
        let bank = multi_step_residuals(data, model, horizon)?;
        (residual_zonotopes(&bank)?, bank.counts())
    } else {
        (Vec::new(), Vec::new())
    };
    let l_psi = match dict.lipschitz() {
        Some(l) => l,
        None => {
            let (xs, us) = lipschitz_domain(data, x0, inputs)?;
            dict.estimate_lipschitz(&xs, &us, &opts.lipschitz)?
        }
    };
    let z_wpsi = lifted_noise_zonotope(l_psi, noise, dict.p_phi())?;
    Ok(ErrorSets {
        z_wpsi,
        residual_sets,
        z_eps,
        l_star: l_star.iter().copied().collect(),
        delta,
        l_psi,
        residual_counts,
    })
}

fn check_inputs(dict: &Dictionary, x0: &Zonotope, inputs: &[Zonotope], noise: &Zonotope, horizon: usize) -> Result<()> {
    if x0.dim() != dict.state_dim() || noise.dim() != dict.state_dim() {
        return Err(Error::dim(format!(
            "X0 and Zw must have dimension {}",
            dict.state_dim()
        )));
    }
    if inputs.iter().any(|u| u.dim() != dict.input_dim()) {
        return Err(Error::dim(format!(
            "input sets must have dimension {}",
            dict.input_dim()
        )));
    }
    if horizon > 0 && inputs.len() != horizon && inputs.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected 1 or {horizon} input sets, got {}",
            inputs.len()
        )));
    }
    Ok(())
}

/// Input set for step `k` (a single set is reused for every step).
pub fn input_at(inputs: &[Zonotope], k: usize) -> &Zonotope {
    &inputs[k.min(inputs.len() - 1)]
}

/// One lifted step from R̄_k: remainder, propagation and order reduction.
fn advance(
    model: &KoopmanModel,
    lifted: &Zonotope,
    u: &Zonotope,
    z_wpsi: &Zonotope,
    opts: &ReachOptions,
) -> Result<(Linearization, Zonotope, Zonotope)> {
    let z_star = lifted.center().clone();
    let u_star = u.center().clone();
    let lin = linearize(model, &z_star, &u_star)?;
    let u_hull = u.interval_hull();
    let mut hull = lifted.interval_hull();
    let mut rem = lagrange_remainder(model, &hull, &u_hull, &z_star, &u_star)?;
    let mut next = propagate_step(lifted, u, &lin, &rem, z_wpsi)?;
    if opts.fixed_point && !model.dictionary().is_linear() {
        for _ in 0..10 {
            hull = hull.hull(&next.interval_hull())?;
            let wider = lagrange_remainder(model, &hull, &u_hull, &z_star, &u_star)?;
            if wider.radius().iter().zip(rem.radius().iter()).all(|(a, b)| a <= b) {
                break;
            }
            rem = wider;
            next = propagate_step(lifted, u, &lin, &rem, z_wpsi)?;
        }
    }
    let next = next.reduce_order(opts.reduction_order)?;
    Ok((lin, rem, next))
}

/// Reachable sets R′_1..R′_N of the unknown system from data and the
/// identified lifted model.
pub fn reach(
    model: &KoopmanModel,
    data: &Dataset,
    x0: &Zonotope,
    inputs: &[Zonotope],
    noise: &Zonotope,
    horizon: usize,
    opts: &ReachOptions,
) -> Result<ReachResult> {
    let dict = model.dictionary();
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("at least one input set is required".into()));
    }
    check_inputs(dict, x0, inputs, noise, horizon)?;
    let errs = error_sets(model, data, x0, inputs, noise, horizon, opts)?;

    let mut lifted = vec![lift_initial_set(dict, x0)?];
    let mut projected = Vec::with_capacity(horizon);
    let mut remainders = Vec::with_capacity(horizon);
    let mut points = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let wrap = |e: Error| Error::ReachStep {
            step: k,
            cause: Box::new(e),
        };
        let (lin, rem, next) = advance(model, &lifted[k], input_at(inputs, k), &errs.z_wpsi, opts).map_err(wrap)?;
        let proj = project_and_inflate(&next, dict.projection(), &errs.residual_sets[k], &errs.z_eps).map_err(wrap)?;
        points.push(LinearizationPoint {
            z: lin.z_star.iter().copied().collect(),
            u: lin.u_star.iter().copied().collect(),
        });
        remainders.push(rem);
        lifted.push(next);
        projected.push(proj);
    }
    Ok(ReachResult {
        horizon,
        lifted_sets: lifted,
        projected_sets: projected,
        error_sets: errs,
        remainder_sets: remainders,
        linearization_points: points,
        options: opts.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::stream_rng;
    use rand::Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn scalar_model(nu: &str, a: f64, b: f64) -> KoopmanModel {
        let dict = Dictionary::from_strings("s", 1, 1, &["x1"], &[nu]).unwrap();
        KoopmanModel::new(DMatrix::from_element(1, 1, a), DMatrix::from_element(1, 1, b), dict).unwrap()
    }

    #[test]
    fn identity_lifting_of_initial_set() {
        let dict = Dictionary::identity_lti(2, 1).unwrap();
        let x0 = Zonotope::from_slices(&[0.5, 0.4], &[&[0.05, 0.01], &[0.0, 0.3]]).unwrap();
        let z = lift_initial_set(&dict, &x0).unwrap();
        let expected = Zonotope::singleton(v(&[1.0])).cartesian_product(&x0);
        assert_eq!(z, expected);
    }

    #[test]
    fn square_lifting_of_initial_set() {
        let dict = Dictionary::from_strings("sq", 1, 1, &["x1", "x1^2"], &["u1"]).unwrap();
        let x0 = Zonotope::from_slices(&[0.0], &[&[1.0]]).unwrap();
        let z = lift_initial_set(&dict, &x0).unwrap();
        let h = z.interval_hull();
        assert_eq!((h.lower()[0], h.upper()[0]), (-1.0, 1.0));
        assert!(h.lower()[1] <= 0.0 && h.lower()[1] > -1e-9);
        assert!(h.upper()[1] >= 1.0 && h.upper()[1] < 1.0 + 1e-9);

        let dict = Dictionary::poly2_nonaffine();
        let x0 = Zonotope::from_slices(&[0.5, 0.4], &[&[0.05, 0.02], &[-0.1, 0.3]]).unwrap();
        let z = lift_initial_set(&dict, &x0).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..2000 {
            let x = x0.sample(&mut rng);
            assert!(z.contains_point(&dict.lift_state(&x).unwrap(), 1e-9).unwrap());
        }
    }

    #[test]
    fn scalar_linearization_by_hand() {
        let m = scalar_model("z1*u1", 0.0, 1.0);
        let lin = linearize(&m, &v(&[2.0]), &v(&[3.0])).unwrap();
        assert_eq!(lin.m, DMatrix::from_row_slice(1, 3, &[6.0, 3.0, 2.0]));

        let lti = Dictionary::identity_lti(2, 1).unwrap();
        let a = DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64 * 0.1);
        let b = DMatrix::from_fn(3, 1, |i, _| i as f64 - 1.0);
        let model = KoopmanModel::new(a.clone(), b.clone(), lti).unwrap();
        let (z, u) = (v(&[1.0, 0.3, -0.2]), v(&[0.7]));
        let lin = linearize(&model, &z, &u).unwrap();
        assert_eq!(lin.a_bar(), a);
        assert_eq!(lin.b_bar(), b);
        assert!((lin.offset() - (&a * &z + &b * &u)).amax() < 1e-15);
    }

    #[test]
    fn linearization_error_is_second_order() {
        let m = KoopmanModel::new(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.8]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 1.0]),
            Dictionary::from_strings("t", 2, 1, &["x1", "x2"], &["z1*u1", "sin(z2)*z1"]).unwrap(),
        )
        .unwrap();
        let (z, u) = (v(&[0.4, -0.2]), v(&[0.3]));
        let lin = linearize(&m, &z, &u).unwrap();
        let dir_z = v(&[0.7, -0.4]);
        let dir_u = v(&[0.5]);
        let err = |h: f64| {
            let (zz, uu) = (&z + &dir_z * h, &u + &dir_u * h);
            (m.step(&zz, &uu).unwrap() - lin.eval(&zz, &uu)).amax()
        };
        let (e1, e2) = (err(1e-2), err(1e-3));
        assert!(e2 < e1 / 50.0, "{e1} {e2}");
    }

    #[test]
    fn remainder_hand_example() {
        let m = scalar_model("z1*u1", 0.0, 1.0);
        let hz = IntervalBox::new(v(&[-1.0]), v(&[1.0])).unwrap();
        let hu = hz.clone();
        let r = lagrange_remainder(&m, &hz, &hu, &v(&[0.0]), &v(&[0.0])).unwrap();
        assert_eq!(r.order(), 1);
        assert!((r.radius()[0] - 1.0).abs() < 1e-9);

        let lti = KoopmanModel::new(
            DMatrix::identity(3, 3),
            DMatrix::zeros(3, 1),
            Dictionary::identity_lti(2, 1).unwrap(),
        )
        .unwrap();
        let hz = IntervalBox::new(v(&[1.0, -1.0, -1.0]), v(&[1.0, 1.0, 1.0])).unwrap();
        let hu = IntervalBox::new(v(&[-1.0]), v(&[1.0])).unwrap();
        assert!(lagrange_remainder(&lti, &hz, &hu, &v(&[1.0, 0.0, 0.0]), &v(&[0.0]))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn remainder_bounds_sampled_error() {
        let dict = Dictionary::poly2_nonaffine();
        let b = DMatrix::from_fn(6, 12, |i, j| ((i * 5 + j * 3) % 7) as f64 * 0.1 - 0.3);
        let model = KoopmanModel::new(DMatrix::identity(6, 6) * 0.9, b, dict).unwrap();
        let hz = IntervalBox::new(v(&[1.0, 0.3, 0.1, 0.0, 0.0, 0.0]), v(&[1.0, 0.7, 0.7, 0.5, 0.5, 0.5])).unwrap();
        let hu = IntervalBox::new(v(&[-0.5, 1.2]), v(&[-0.3, 1.6])).unwrap();
        let (zs, us) = (hz.center(), hu.center());
        let lin = linearize(&model, &zs, &us).unwrap();
        let rem = lagrange_remainder(&model, &hz, &hu, &zs, &us).unwrap();
        let bound = rem.radius();
        let mut rng = stream_rng(11, 0);
        for _ in 0..1000 {
            let z = hz.sample(&mut rng);
            let u = hu.sample(&mut rng);
            let e = model.step(&z, &u).unwrap() - lin.eval(&z, &u);
            for i in 0..6 {
                assert!(e[i].abs() <= bound[i] + 1e-12, "{i}: {} > {}", e[i], bound[i]);
            }
        }
    }

    #[test]
    fn propagate_scalar_linear() {
        let m = scalar_model("u1", 0.5, 0.0);
        let r = Zonotope::from_slices(&[1.0], &[&[0.2]]).unwrap();
        let u = Zonotope::zero(1);
        let lin = linearize(&m, &v(&[1.0]), &v(&[0.0])).unwrap();
        let next = propagate_step(&r, &u, &lin, &Zonotope::zero(1), &Zonotope::zero(1)).unwrap();
        assert!((next.center()[0] - 0.5).abs() < 1e-15);
        assert!((next.radius()[0] - 0.1).abs() < 1e-15);

        let zero = Linearization {
            z_star: v(&[1.0]),
            u_star: v(&[0.0]),
            m: DMatrix::zeros(1, 3),
        };
        let next = propagate_step(&r, &u, &zero, &Zonotope::zero(1), &Zonotope::zero(1)).unwrap();
        assert_eq!(next.center()[0], 0.0);
        assert!(next.radius()[0] == 0.0);
    }

    #[test]
    fn propagate_contains_linearized_images() {
        let dict = Dictionary::poly2_nonaffine();
        let b = DMatrix::from_fn(6, 12, |i, j| ((i + j) % 5) as f64 * 0.05);
        let model = KoopmanModel::new(DMatrix::identity(6, 6), b, dict.clone()).unwrap();
        let x0 = Zonotope::from_slices(&[0.5, 0.4], &[&[0.05, 0.0], &[0.0, 0.3]]).unwrap();
        let r = lift_initial_set(&dict, &x0).unwrap();
        let u = Zonotope::from_slices(&[-0.4, 1.4], &[&[0.1, 0.0], &[0.0, 0.2]]).unwrap();
        let lin = linearize(&model, r.center(), u.center()).unwrap();
        let next = propagate_step(&r, &u, &lin, &Zonotope::zero(6), &Zonotope::zero(6)).unwrap();
        let mut rng = stream_rng(4, 0);
        for _ in 0..300 {
            let z = r.sample(&mut rng);
            let uu = u.sample(&mut rng);
            assert!(next.contains_point(&lin.eval(&z, &uu), 1e-9).unwrap());
        }
    }

    #[test]
    fn projection_bookkeeping() {
        let c = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let r = Zonotope::from_slices(&[1.0, 2.0], &[&[0.1, 0.2, 0.0], &[0.3, 0.0, 0.4]]).unwrap();
        let plain = project_and_inflate(&r, &c, &Zonotope::zero(1), &Zonotope::zero(1)).unwrap();
        assert_eq!(plain, r.linear_map(&c).unwrap());
        let shifted = project_and_inflate(&r, &c, &Zonotope::singleton(v(&[0.5])), &Zonotope::zero(1)).unwrap();
        assert_eq!(shifted.center()[0], 2.5);
        let l = Zonotope::from_slices(&[0.0], &[&[0.1, 0.2]]).unwrap();
        let e = Zonotope::from_slices(&[0.0], &[&[0.3]]).unwrap();
        assert_eq!(project_and_inflate(&r, &c, &l, &e).unwrap().order(), 6);
    }

    fn decay_data(noise: f64) -> Dataset {
        // x⁺ = 0.9 x + u sampled densely
        let mut rng = stream_rng(8, 0);
        let trajs = (0..20)
            .map(|_| {
                let mut x = rng.random_range(-1.0..1.0);
                let mut xs = vec![DVector::from_element(1, x)];
                let mut us = Vec::new();
                for _ in 0..10 {
                    let u: f64 = rng.random_range(-0.1..0.1);
                    x = 0.9 * x + u + noise * rng.random_range(-1.0..1.0);
                    xs.push(DVector::from_element(1, x));
                    us.push(DVector::from_element(1, u));
                }
                crate::identify::Trajectory::from_columns(&xs, &us, 1).unwrap()
            })
            .collect();
        Dataset::new(trajs).unwrap()
    }

    #[test]
    fn horizon_zero_returns_lifted_initial_set() {
        let data = decay_data(0.0);
        let dict = Dictionary::identity_lti(1, 1).unwrap();
        let model = KoopmanModel::identify(&data, &dict, 0.0).unwrap();
        let x0 = Zonotope::from_slices(&[0.5], &[&[0.1]]).unwrap();
        let u = Zonotope::from_slices(&[0.0], &[&[0.1]]).unwrap();
        let r = reach(
            &model,
            &data,
            &x0,
            &[u],
            &Zonotope::zero(1),
            0,
            &ReachOptions::default(),
        )
        .unwrap();
        assert!(r.projected_sets.is_empty());
        assert_eq!(r.lifted_sets, vec![lift_initial_set(&dict, &x0).unwrap()]);
    }

    #[test]
    fn linear_decay_reach() {
        let data = decay_data(0.0);
        let dict = Dictionary::identity_lti(1, 1).unwrap();
        let model = KoopmanModel::identify(&data, &dict, 0.0).unwrap();
        let x0 = Zonotope::from_slices(&[0.5], &[&[0.1]]).unwrap();
        let u = Zonotope::zero(1);
        let opts = ReachOptions::default();
        let r = reach(&model, &data, &x0, &[u], &Zonotope::zero(1), 5, &opts).unwrap();
        let eps = r.error_sets.z_eps.radius()[0];
        for (k, set) in r.projected_sets.iter().enumerate() {
            let h = set.interval_hull();
            let scale = 0.9f64.powi(k as i32 + 1);
            assert!((h.center()[0] - 0.5 * scale).abs() < 1e-9);
            let width = h.widths()[0];
            assert!((width - 0.2 * scale).abs() <= 2.0 * eps + 1e-9, "k={k}: {width}");
            assert!(r.remainder_sets[k].is_zero());
        }
        assert_eq!(r.remainder_sets.len(), 5);
        assert_eq!(r.linearization_points.len(), 5);
        // deterministic
        let again = reach(&model, &data, &x0, &[Zonotope::zero(1)], &Zonotope::zero(1), 5, &opts).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn reach_step_failure_carries_step_index() {
        let data = decay_data(0.0);
        let dict = Dictionary::from_strings("tan", 1, 1, &["x1"], &["tan(u1)"]).unwrap();
        let model = KoopmanModel::identify(&data, &dict, 0.0).unwrap();
        let x0 = Zonotope::from_slices(&[0.5], &[&[0.1]]).unwrap();
        let u = Zonotope::from_slices(&[1.0], &[&[1.0]]).unwrap();
        let opts = ReachOptions {
            domain: None,
            ..Default::default()
        };
        let err = reach(&model, &data, &x0, &[u], &Zonotope::zero(1), 3, &opts).unwrap_err();
        assert!(matches!(err, Error::ReachStep { step: 0, .. }), "{err}");
    }
}
