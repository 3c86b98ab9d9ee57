//! Lifting dictionaries ψ(x, u) = [φ(x); ν(z, u)] with z = φ(x).
//!
//! φ is written over the states `x1..xn`, ν over the lifted coordinates
//! `z1..zp` and inputs `u1..um`. State identifiers inside ν are accepted and
//! rewritten to the lifted coordinate that carries that state.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::interval::Interval;
use crate::zonotope::IntervalBox;

/// Element-wise bounds of an interval-valued matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
}

impl IntervalMatrix {
    pub fn zeros(n: usize) -> Self {
        IntervalMatrix {
            lower: DMatrix::zeros(n, n),
            upper: DMatrix::zeros(n, n),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        Interval {
            lo: self.lower[(i, j)],
            hi: self.upper[(i, j)],
        }
    }

    fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.lower[(i, j)] = v.lo;
        self.upper[(i, j)] = v.hi;
    }

    /// Element-wise max(|lo|, |hi|).
    pub fn magnitude(&self) -> DMatrix<f64> {
        self.lower.zip_map(&self.upper, |a, b| a.abs().max(b.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().chain(self.upper.iter()).all(|v| *v == 0.0)
    }
}

/// Serializable dictionary definition (expressions in infix form).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub phi: Vec<String>,
    pub nu: Vec<String>,
    pub state_dim: usize,
    pub input_dim: usize,
    #[serde(rename = "L_psi", default, skip_serializing_if = "Option::is_none")]
    pub l_psi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LipschitzOptions {
    pub samples: usize,
    pub seed: u64,
    pub inflation: f64,
}

impl Default for LipschitzOptions {
    fn default() -> Self {
        LipschitzOptions {
            samples: 20_000,
            seed: 0,
            inflation: 1.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dictionary {
    name: String,
    state_dim: usize,
    input_dim: usize,
    phi: Vec<Expr>,
    nu: Vec<Expr>,
    state_index: Vec<usize>,
    projection: DMatrix<f64>,
    l_psi: Option<f64>,
    jac_z: Vec<Vec<Expr>>,
    jac_u: Vec<Vec<Expr>>,
    // per ν_j: nonzero upper-triangular entries (a, b, ∂²ν_j/∂a∂b) over the
    // joint variable vector (z, u)
    hessians: Vec<Vec<(usize, usize, Expr)>>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.state_dim == other.state_dim
            && self.input_dim == other.input_dim
            && self.phi == other.phi
            && self.nu == other.nu
            && self.l_psi == other.l_psi
    }
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "poly2-exogenous",
    "poly2-nonaffine",
    "unicycle-trig",
    "identity-lti",
    "toy-quadratic",
];

impl Dictionary {
    pub fn new(
        name: impl Into<String>,
        state_dim: usize,
        input_dim: usize,
        phi: Vec<Expr>,
        nu: Vec<Expr>,
    ) -> Result<Self> {
        let name = name.into();
        if state_dim == 0 {
            return Err(Error::Dictionary("state dimension must be positive".into()));
        }
        for (j, e) in phi.iter().enumerate() {
            let mut bad = None;
            e.visit_vars(&mut |v| match v {
                Var::X(i) if i < state_dim => {}
                other => bad = Some(other),
            });
            if let Some(v) = bad {
                return Err(Error::Dictionary(format!(
                    "phi[{j}] = `{e}` references `{v}`; phi may only use x1..x{state_dim}"
                )));
            }
        }
        let state_index: Vec<usize> = (0..state_dim)
            .map(|i| {
                phi.iter().position(|e| *e == Expr::Var(Var::X(i))).ok_or_else(|| {
                    Error::Dictionary(format!("phi does not contain the state x{} as a coordinate", i + 1))
                })
            })
            .collect::<Result<_>>()?;
        let p_phi = phi.len();
        let nu: Vec<Expr> = nu.into_iter().map(|e| substitute_states(e, &state_index)).collect();
        for (j, e) in nu.iter().enumerate() {
            let mut bad = None;
            e.visit_vars(&mut |v| match v {
                Var::Z(i) if i < p_phi => {}
                Var::U(i) if i < input_dim => {}
                other => bad = Some(other),
            });
            if let Some(v) = bad {
                return Err(Error::Dictionary(format!(
                    "nu[{j}] = `{e}` references `{v}` (p_phi = {p_phi}, input_dim = {input_dim})"
                )));
            }
        }
        let mut projection = DMatrix::zeros(state_dim, p_phi);
        for (i, &j) in state_index.iter().enumerate() {
            projection[(i, j)] = 1.0;
        }
        let joint: Vec<Var> = (0..p_phi).map(Var::Z).chain((0..input_dim).map(Var::U)).collect();
        let jac_z = nu
            .iter()
            .map(|e| (0..p_phi).map(|k| e.diff(Var::Z(k))).collect())
            .collect();
        let jac_u = nu
            .iter()
            .map(|e| (0..input_dim).map(|k| e.diff(Var::U(k))).collect())
            .collect();
        let hessians = nu
            .iter()
            .map(|e| {
                let mut entries = Vec::new();
                for (a, &va) in joint.iter().enumerate() {
                    let da = e.diff(va);
                    if da.is_zero() {
                        continue;
                    }
                    for (b, &vb) in joint.iter().enumerate().skip(a) {
                        let dab = da.diff(vb);
                        if !dab.is_zero() {
                            entries.push((a, b, dab));
                        }
                    }
                }
                entries
            })
            .collect();
        Ok(Dictionary {
            name,
            state_dim,
            input_dim,
            phi,
            nu,
            state_index,
            projection,
            l_psi: None,
            jac_z,
            jac_u,
            hessians,
        })
    }

    pub fn from_strings(name: &str, state_dim: usize, input_dim: usize, phi: &[&str], nu: &[&str]) -> Result<Self> {
        let phi = phi.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?;
        let nu = nu.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?;
        Dictionary::new(name, state_dim, input_dim, phi, nu)
    }

    pub fn from_def(def: &DictionaryDef) -> Result<Self> {
        let phi: Vec<&str> = def.phi.iter().map(String::as_str).collect();
        let nu: Vec<&str> = def.nu.iter().map(String::as_str).collect();
        let name = def.name.clone().unwrap_or_else(|| "custom".to_string());
        let d = Dictionary::from_strings(&name, def.state_dim, def.input_dim, &phi, &nu)?;
        match def.l_psi {
            Some(l) => d.with_lipschitz(l),
            None => Ok(d),
        }
    }

    pub fn to_def(&self) -> DictionaryDef {
        DictionaryDef {
            name: Some(self.name.clone()),
            phi: self.phi.iter().map(ToString::to_string).collect(),
            nu: self.nu.iter().map(ToString::to_string).collect(),
            state_dim: self.state_dim,
            input_dim: self.input_dim,
            l_psi: self.l_psi,
        }
    }

    /// Fixes L_ψ instead of estimating it from samples.
    pub fn with_lipschitz(mut self, l_psi: f64) -> Result<Self> {
        if !(l_psi >= 0.0) || !l_psi.is_finite() {
            return Err(Error::Dictionary(format!("L_psi must be finite and ≥ 0, got {l_psi}")));
        }
        self.l_psi = Some(l_psi);
        Ok(self)
    }

    /// Looks up one of the built-in dictionaries. The dimensions are only
    /// used by `identity-lti`; the others check them for consistency.
    pub fn builtin(name: &str, state_dim: usize, input_dim: usize) -> Result<Self> {
        let d = match name {
            "poly2-exogenous" => Dictionary::poly2_exogenous(),
            "poly2-nonaffine" => Dictionary::poly2_nonaffine(),
            "unicycle-trig" => Dictionary::unicycle_trig(),
            "toy-quadratic" => Dictionary::toy_quadratic(),
            "identity-lti" => return Dictionary::identity_lti(state_dim, input_dim),
            _ => {
                return Err(Error::Unknown {
                    kind: "dictionary",
                    name: name.to_string(),
                })
            }
        };
        if d.state_dim != state_dim || d.input_dim != input_dim {
            return Err(Error::dim(format!(
                "dictionary `{name}` is for {} states and {} inputs, data has {state_dim} and {input_dim}",
                d.state_dim, d.input_dim
            )));
        }
        Ok(d)
    }

    /// Second-order monomials with exogenous inputs: ν = u.
    pub fn poly2_exogenous() -> Self {
        Dictionary::from_strings(
            "poly2-exogenous",
            2,
            2,
            &["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"],
            &["u1", "u2"],
        )
        .expect("builtin dictionary")
    }

    /// Second-order monomials with state–input products in ν.
    pub fn poly2_nonaffine() -> Self {
        Dictionary::from_strings(
            "poly2-nonaffine",
            2,
            2,
            &["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"],
            &[
                "u1", "u2", "z2*u1", "z2*u2", "z3*u1", "z3*u2", "u1^2", "u1*u2", "u2^2", "z2^2*u1", "z3^2*u2", "1",
            ],
        )
        .expect("builtin dictionary")
    }

    /// Heading-trigonometric lifting for planar vehicles (x3 = heading).
    pub fn unicycle_trig() -> Self {
        Dictionary::from_strings(
            "unicycle-trig",
            3,
            2,
            &["1", "x1", "x2", "sin(x3)", "cos(x3)", "x3", "sin(x3)^2", "cos(x3)^2"],
            &["u1", "u2", "z5*u2", "z4*u2", "u2*tan(u1)", "u2*u1^2", "z6*u1"],
        )
        .expect("builtin dictionary")
    }

    /// The lifting [x1, x2, x1²] with ν = u, exact for the quadratic toy system.
    pub fn toy_quadratic() -> Self {
        Dictionary::from_strings("toy-quadratic", 2, 1, &["x1", "x2", "x1^2"], &["u1"]).expect("builtin dictionary")
    }

    /// φ = [1; x], ν = u: the linear (LTI) baseline.
    pub fn identity_lti(state_dim: usize, input_dim: usize) -> Result<Self> {
        let phi: Vec<String> = std::iter::once("1".to_string())
            .chain((1..=state_dim).map(|i| format!("x{i}")))
            .collect();
        let nu: Vec<String> = (1..=input_dim).map(|i| format!("u{i}")).collect();
        let phi: Vec<&str> = phi.iter().map(String::as_str).collect();
        let nu: Vec<&str> = nu.iter().map(String::as_str).collect();
        Dictionary::from_strings("identity-lti", state_dim, input_dim, &phi, &nu)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn p_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn p_nu(&self) -> usize {
        self.nu.len()
    }

    pub fn p(&self) -> usize {
        self.phi.len() + self.nu.len()
    }

    pub fn phi(&self) -> &[Expr] {
        &self.phi
    }

    pub fn nu(&self) -> &[Expr] {
        &self.nu
    }

    /// C with x = C φ(x).
    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    /// Index of the φ coordinate that carries each state.
    pub fn state_index(&self) -> &[usize] {
        &self.state_index
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.l_psi
    }

    /// True when every ν component is affine in (z, u), i.e. the lifted
    /// model is linear and has no linearization remainder.
    pub fn is_linear(&self) -> bool {
        self.nu.iter().all(Expr::is_affine)
    }

    fn check_len(&self, what: &str, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::dim(format!(
                "{what} has length {got}, dictionary `{}` expects {want}",
                self.name
            )));
        }
        Ok(())
    }

    /// φ(x).
    pub fn lift_state(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("state", x.len(), self.state_dim)?;
        let env = Env::states(x.as_slice());
        let vals = self.phi.iter().map(|e| e.eval(&env)).collect::<Result<Vec<f64>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// ν(z, u).
    pub fn eval_nu(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("lifted state", z.len(), self.p_phi())?;
        self.check_len("input", u.len(), self.input_dim)?;
        let env = Env::lifted(z.as_slice(), u.as_slice());
        let vals = self.nu.iter().map(|e| e.eval(&env)).collect::<Result<Vec<f64>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// ψ(x, u) = [φ(x); ν(φ(x), u)].
    pub fn lift_pair(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let z = self.lift_state(x)?;
        let v = self.eval_nu(&z, u)?;
        Ok(DVector::from_iterator(self.p(), z.iter().chain(v.iter()).copied()))
    }

    /// (∂ν/∂z, ∂ν/∂u) at (z*, u*).
    pub fn nu_jacobians(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        self.check_len("lifted state", z.len(), self.p_phi())?;
        self.check_len("input", u.len(), self.input_dim)?;
        let env = Env::lifted(z.as_slice(), u.as_slice());
        let mut jz = DMatrix::zeros(self.p_nu(), self.p_phi());
        let mut ju = DMatrix::zeros(self.p_nu(), self.input_dim);
        for j in 0..self.p_nu() {
            for (k, e) in self.jac_z[j].iter().enumerate() {
                if !e.is_zero() {
                    jz[(j, k)] = e.eval(&env)?;
                }
            }
            for (k, e) in self.jac_u[j].iter().enumerate() {
                if !e.is_zero() {
                    ju[(j, k)] = e.eval(&env)?;
                }
            }
        }
        Ok((jz, ju))
    }

    /// Interval enclosures of the Hessian of each ν component over a box on
    /// the joint vector (z, u).
    pub fn nu_hessian_bounds(&self, joint: &IntervalBox) -> Result<Vec<IntervalMatrix>> {
        let n = self.p_phi() + self.input_dim;
        self.check_len("joint (z, u) box", joint.dim(), n)?;
        let items = joint.intervals();
        let env = Env::lifted(&items[..self.p_phi()], &items[self.p_phi()..]);
        self.hessians
            .iter()
            .map(|entries| {
                let mut h = IntervalMatrix::zeros(n);
                for (a, b, e) in entries {
                    let v: Interval = e.eval(&env)?;
                    h.set(*a, *b, v);
                    h.set(*b, *a, v);
                }
                Ok(h)
            })
            .collect()
    }

    /// Pointwise Hessians of ν at a joint point (z, u).
    pub fn nu_hessians_at(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        let n = self.p_phi() + self.input_dim;
        let env = Env::lifted(z.as_slice(), u.as_slice());
        self.hessians
            .iter()
            .map(|entries| {
                let mut h = DMatrix::zeros(n, n);
                for (a, b, e) in entries {
                    let v: f64 = e.eval(&env)?;
                    h[(*a, *b)] = v;
                    h[(*b, *a)] = v;
                }
                Ok(h)
            })
            .collect()
    }

    /// Interval enclosure of φ over a box of states.
    pub fn lift_box(&self, states: &IntervalBox) -> Result<Vec<Interval>> {
        self.check_len("state box", states.dim(), self.state_dim)?;
        let items = states.intervals();
        let env = Env::states(&items);
        self.phi.iter().map(|e| e.eval(&env)).collect()
    }

    /// Sampled Lipschitz constant of ψ in x, uniformly over u, measured in
    /// the ∞-norm on both sides and inflated by `opts.inflation`. Half of the
    /// samples are independent pairs, half are nearby pairs probing local
    /// slopes. Returns 0 for a zero-width domain.
    pub fn estimate_lipschitz(
        &self,
        domain: &IntervalBox,
        inputs: &IntervalBox,
        opts: &LipschitzOptions,
    ) -> Result<f64> {
        self.check_len("state domain", domain.dim(), self.state_dim)?;
        self.check_len("input domain", inputs.dim(), self.input_dim)?;
        if opts.samples < 2 {
            return Err(Error::InvalidArgument("L_psi estimation needs ≥ 2 samples".into()));
        }
        let widths = domain.widths();
        if widths.iter().all(|w| *w == 0.0) {
            return Ok(0.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut best = 0.0f64;
        for s in 0..opts.samples {
            let u = inputs.sample(&mut rng);
            let x = domain.sample(&mut rng);
            let x2 = if s % 2 == 0 {
                domain.sample(&mut rng)
            } else {
                // cube vertices: the ∞-norm slope peaks along sign patterns
                let step = DVector::from_fn(x.len(), |i, _| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    1e-4 * widths[i] * sign
                });
                (&x + step).zip_zip_map(domain.lower(), domain.upper(), |v, lo, hi| v.clamp(lo, hi))
            };
            let dx = (&x - &x2).amax();
            if dx == 0.0 {
                continue;
            }
            let dpsi = (self.lift_pair(&x, &u)? - self.lift_pair(&x2, &u)?).amax();
            best = best.max(dpsi / dx);
        }
        Ok(best * opts.inflation)
    }
}

fn substitute_states(e: Expr, state_index: &[usize]) -> Expr {
    use Expr::*;
    let s = |b: Box<Expr>| Box::new(substitute_states(*b, state_index));
    match e {
        Var(crate::expr::Var::X(i)) if i < state_index.len() => Var(crate::expr::Var::Z(state_index[i])),
        Const(_) | Var(_) => e,
        Add(a, b) => Add(s(a), s(b)),
        Sub(a, b) => Sub(s(a), s(b)),
        Mul(a, b) => Mul(s(a), s(b)),
        Neg(a) => Neg(s(a)),
        Pow(a, n) => Pow(s(a), n),
        Exp(a) => Exp(s(a)),
        Sin(a) => Sin(s(a)),
        Cos(a) => Cos(s(a)),
        Tan(a) => Tan(s(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn poly2_lifting_examples() {
        let d = Dictionary::poly2_exogenous();
        assert_eq!(d.p_phi(), 6);
        assert_eq!(
            d.lift_state(&v(&[0.0, 0.0])).unwrap().as_slice(),
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            d.lift_state(&v(&[1.0, 2.0])).unwrap().as_slice(),
            &[1.0, 1.0, 2.0, 1.0, 2.0, 4.0]
        );
        assert!(d.lift_state(&v(&[1.0])).is_err());
    }

    #[test]
    fn builtin_sizes() {
        assert_eq!(Dictionary::poly2_nonaffine().p_nu(), 12);
        let u = Dictionary::unicycle_trig();
        assert_eq!((u.p_phi(), u.p_nu()), (8, 7));
        assert_eq!(u.state_index(), &[1, 2, 5]);
        let lti = Dictionary::identity_lti(3, 2).unwrap();
        assert_eq!((lti.p_phi(), lti.p_nu()), (4, 2));
        assert!(lti.is_linear());
        assert!(Dictionary::poly2_exogenous().is_linear());
        assert!(!Dictionary::poly2_nonaffine().is_linear());
        assert!(Dictionary::builtin("nope", 2, 2).is_err());
        assert!(Dictionary::builtin("poly2-nonaffine", 3, 2).is_err());
    }

    #[test]
    fn lift_pair_nonaffine_at_zero_input() {
        let d = Dictionary::poly2_nonaffine();
        let psi = d.lift_pair(&v(&[1.0, 1.0]), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(psi.len(), 18);
        assert_eq!(&psi.as_slice()[..6], &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let mut nu = vec![0.0; 12];
        nu[11] = 1.0;
        assert_eq!(&psi.as_slice()[6..], nu.as_slice());
        let lti = Dictionary::identity_lti(2, 2).unwrap();
        let psi = lti.lift_pair(&v(&[3.0, 4.0]), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(psi.as_slice(), &[1.0, 3.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn state_identifiers_in_nu_map_to_lifted_coordinates() {
        let a = Dictionary::from_strings("a", 2, 1, &["1", "x1", "x2"], &["x2*u1"]).unwrap();
        let b = Dictionary::from_strings("a", 2, 1, &["1", "x1", "x2"], &["z3*u1"]).unwrap();
        assert_eq!(a.nu(), b.nu());
    }

    #[test]
    fn rejects_non_state_inclusive() {
        let r = Dictionary::from_strings("bad", 2, 1, &["1", "x1", "x2^2"], &["u1"]);
        assert!(matches!(r, Err(Error::Dictionary(_))));
        let r = Dictionary::from_strings("bad", 1, 1, &["x1"], &["z2*u1"]);
        assert!(matches!(r, Err(Error::Dictionary(_))));
        let r = Dictionary::from_strings("bad", 1, 1, &["x1", "u1"], &["u1"]);
        assert!(matches!(r, Err(Error::Dictionary(_))));
    }

    #[test]
    fn jacobian_examples() {
        let lti = Dictionary::identity_lti(2, 2).unwrap();
        let (jz, ju) = lti.nu_jacobians(&v(&[1.0, 0.3, -0.2]), &v(&[0.5, 0.1])).unwrap();
        assert_eq!(jz, DMatrix::zeros(2, 3));
        assert_eq!(ju, DMatrix::identity(2, 2));

        let bil = Dictionary::from_strings("bil", 1, 1, &["x1"], &["z1*u1"]).unwrap();
        let (jz, ju) = bil.nu_jacobians(&v(&[2.0]), &v(&[3.0])).unwrap();
        assert_eq!(jz[(0, 0)], 3.0);
        assert_eq!(ju[(0, 0)], 2.0);
    }

    #[test]
    fn hessian_examples() {
        let lti = Dictionary::identity_lti(2, 1).unwrap();
        let bx = IntervalBox::new(v(&[1.0, -1.0, -1.0, -1.0]), v(&[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(lti.nu_hessian_bounds(&bx).unwrap().iter().all(IntervalMatrix::is_zero));

        let bil = Dictionary::from_strings("bil", 1, 1, &["x1"], &["z1*u1"]).unwrap();
        let bx = IntervalBox::new(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let h = &bil.nu_hessian_bounds(&bx).unwrap()[0];
        assert_eq!(h.lower, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(h.upper, h.lower);

        let sq = Dictionary::from_strings("sq", 1, 1, &["x1"], &["z1^2"]).unwrap();
        let h = &sq.nu_hessian_bounds(&bx).unwrap()[0];
        assert_eq!(h.get(0, 0), Interval::point(2.0));
    }

    #[test]
    fn hessian_pole_is_reported() {
        let d = Dictionary::unicycle_trig();
        let mut lo = vec![0.0; 10];
        let mut hi = vec![0.0; 10];
        lo[8] = 1.0;
        hi[8] = 2.0; // u1 spans π/2
        hi[9] = 1.0;
        let bx = IntervalBox::new(v(&lo), v(&hi)).unwrap();
        assert!(matches!(d.nu_hessian_bounds(&bx), Err(Error::Domain(_))));
    }

    #[test]
    fn lipschitz_examples() {
        let lin = Dictionary::from_strings("lin", 2, 1, &["x1", "x2"], &["u1"]).unwrap();
        let dom = IntervalBox::new(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let inp = IntervalBox::new(v(&[0.0]), v(&[1.0])).unwrap();
        let opts = LipschitzOptions {
            samples: 2000,
            ..Default::default()
        };
        let l = lin.estimate_lipschitz(&dom, &inp, &opts).unwrap();
        assert!((l - 1.1).abs() < 1e-9, "{l}");

        let dbl = Dictionary::from_strings("dbl", 2, 1, &["x1", "x2", "2*x1"], &["u1"]).unwrap();
        assert!(dbl.estimate_lipschitz(&dom, &inp, &opts).unwrap() >= 2.0);

        let pt = IntervalBox::point(&v(&[0.5, 0.5]));
        assert_eq!(dbl.estimate_lipschitz(&pt, &inp, &opts).unwrap(), 0.0);

        let sq = Dictionary::poly2_exogenous();
        let inp2 = IntervalBox::new(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let a = sq.estimate_lipschitz(&dom, &inp2, &opts).unwrap();
        let b = sq.estimate_lipschitz(&dom, &inp2, &opts).unwrap();
        assert_eq!(a, b);
        let big = IntervalBox::new(v(&[-2.0, -2.0]), v(&[2.0, 2.0])).unwrap();
        assert!(sq.estimate_lipschitz(&big, &inp2, &opts).unwrap() >= a);
    }

    #[test]
    fn definition_round_trip() {
        for d in [
            Dictionary::poly2_nonaffine(),
            Dictionary::unicycle_trig(),
            Dictionary::identity_lti(3, 1).unwrap(),
        ] {
            let def = d.to_def();
            let json = serde_json::to_string(&def).unwrap();
            let back = Dictionary::from_def(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, d);
        }
    }
}
