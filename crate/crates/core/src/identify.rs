//! Lifted snapshot matrices and least-squares identification of the
//! Koopman matrix K = [A B].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dictionary::{Dictionary, DictionaryDef};
use crate::error::{Error, Result};

/// One input–state trajectory: states are `n_x × (T+1)`, inputs `n_u × T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: DMatrix<f64>,
    inputs: DMatrix<f64>,
}

impl Trajectory {
    pub fn new(states: DMatrix<f64>, inputs: DMatrix<f64>) -> Result<Self> {
        if states.ncols() != inputs.ncols() + 1 {
            return Err(Error::dim(format!(
                "trajectory has {} state columns but {} input columns (expected one fewer)",
                states.ncols(),
                inputs.ncols()
            )));
        }
        if states.nrows() == 0 {
            return Err(Error::dim("trajectory states have zero rows"));
        }
        Ok(Trajectory { states, inputs })
    }

    pub fn from_columns(states: &[DVector<f64>], inputs: &[DVector<f64>], input_dim: usize) -> Result<Self> {
        let n = states.first().map_or(0, |s| s.len());
        if states.iter().any(|s| s.len() != n) || inputs.iter().any(|u| u.len() != input_dim) {
            return Err(Error::dim("ragged trajectory columns"));
        }
        let x = DMatrix::from_fn(n, states.len(), |i, j| states[j][i]);
        let u = DMatrix::from_fn(input_dim, inputs.len(), |i, j| inputs[j][i]);
        Trajectory::new(x, u)
    }

    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    /// Number of transitions T_i.
    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, k: usize) -> DVector<f64> {
        self.states.column(k).into_owned()
    }

    pub fn input(&self, k: usize) -> DVector<f64> {
        self.inputs.column(k).into_owned()
    }

    /// Writes rows `k, x1..xn, u1..um`; the input cells of the final state row are empty.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let (n, m) = (self.states.nrows(), self.inputs.nrows());
        let mut w = csv::Writer::from_writer(writer);
        let header = std::iter::once("k".to_string())
            .chain((1..=n).map(|i| format!("x{i}")))
            .chain((1..=m).map(|i| format!("u{i}")));
        w.write_record(header)?;
        for k in 0..self.states.ncols() {
            let mut row = vec![k.to_string()];
            row.extend(self.states.column(k).iter().map(f64::to_string));
            if k < self.len() {
                row.extend(self.inputs.column(k).iter().map(f64::to_string));
            } else {
                row.extend(std::iter::repeat_n(String::new(), m));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`Trajectory::write_csv`]. Rows must be ordered by `k`
    /// and every row except the last needs an input.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let parse_err = |msg: String| Error::Format(format!("trajectory CSV: {msg}"));
        if headers.get(0) != Some("k") {
            return Err(parse_err("first column must be `k`".into()));
        }
        let named = |prefix: char| {
            headers
                .iter()
                .skip(1)
                .filter(|h| h.starts_with(prefix) && h[1..].parse::<usize>().is_ok())
                .count()
        };
        let (n, m) = (named('x'), named('u'));
        if n == 0 || 1 + n + m != headers.len() {
            return Err(parse_err(format!(
                "unexpected header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut states = Vec::new();
        let mut inputs = Vec::new();
        let mut ended = false;
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let cell = |j: usize| -> Result<Option<f64>> {
                let c = rec.get(j).unwrap_or("").trim();
                if c.is_empty() {
                    return Ok(None);
                }
                c.parse()
                    .map(Some)
                    .map_err(|_| parse_err(format!("row {row}: bad number `{c}`")))
            };
            if cell(0)? != Some(row as f64) {
                return Err(parse_err(format!("row {row}: expected k = {row}")));
            }
            if ended {
                return Err(parse_err(format!("row {row}: state after a row without input")));
            }
            let x: Option<Vec<f64>> = (1..=n).map(cell).collect::<Result<_>>()?;
            states.push(DVector::from_vec(
                x.ok_or_else(|| parse_err(format!("row {row}: missing state")))?,
            ));
            let u: Vec<Option<f64>> = (1 + n..1 + n + m).map(cell).collect::<Result<_>>()?;
            match (u.iter().all(Option::is_some), u.iter().all(Option::is_none)) {
                _ if m == 0 => {}
                (true, _) => inputs.push(DVector::from_iterator(m, u.into_iter().flatten())),
                (_, true) => ended = true,
                _ => return Err(parse_err(format!("row {row}: partial input"))),
            }
        }
        if m > 0 && inputs.len() == states.len() {
            return Err(parse_err("last row must leave the inputs empty".into()));
        }
        if m == 0 {
            inputs = vec![DVector::zeros(0); states.len().saturating_sub(1)];
        }
        Trajectory::from_columns(&states, &inputs, m)
    }
}

/// A single transition (x_k, u_k) → x_{k+1} of some trajectory.
#[derive(Clone, Debug)]
pub struct Transition {
    pub trajectory: usize,
    pub step: usize,
    pub state: DVector<f64>,
    pub input: DVector<f64>,
    pub next: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    state_dim: usize,
    input_dim: usize,
}

impl Dataset {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| Error::EmptyData("dataset has no trajectories".into()))?;
        let (n, m) = (first.states.nrows(), first.inputs.nrows());
        for (i, t) in trajectories.iter().enumerate() {
            if t.states.nrows() != n || t.inputs.nrows() != m {
                return Err(Error::dim(format!(
                    "trajectory {i} has dimensions ({}, {}), expected ({n}, {m})",
                    t.states.nrows(),
                    t.inputs.nrows()
                )));
            }
        }
        Ok(Dataset {
            trajectories,
            state_dim: n,
            input_dim: m,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Total number of transitions T = Σ T_i.
    pub fn total_transitions(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }

    /// Transitions in trajectory-major, then time-major order.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        self.trajectories.iter().enumerate().flat_map(|(i, t)| {
            (0..t.len()).map(move |k| Transition {
                trajectory: i,
                step: k,
                state: t.state(k),
                input: t.input(k),
                next: t.state(k + 1),
            })
        })
    }

    /// Appends the trajectories of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        let mut all = self.trajectories.clone();
        all.extend(other.trajectories.iter().cloned());
        Dataset::new(all)
    }
}

/// Lifted snapshots: Ψ = [Φ(X₋); N(X₋, U₋)] (p × T) and Φ(X₊) (p_φ × T).
pub fn build_snapshots(data: &Dataset, dict: &Dictionary) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if data.state_dim() != dict.state_dim() || data.input_dim() != dict.input_dim() {
        return Err(Error::dim(format!(
            "dataset has {} states / {} inputs, dictionary `{}` expects {} / {}",
            data.state_dim(),
            data.input_dim(),
            dict.name(),
            dict.state_dim(),
            dict.input_dim()
        )));
    }
    let t = data.total_transitions();
    if t == 0 {
        return Err(Error::EmptyData("dataset has no transitions".into()));
    }
    let mut psi = DMatrix::zeros(dict.p(), t);
    let mut phi_plus = DMatrix::zeros(dict.p_phi(), t);
    for (col, tr) in data.transitions().enumerate() {
        psi.set_column(col, &dict.lift_pair(&tr.state, &tr.input)?);
        phi_plus.set_column(col, &dict.lift_state(&tr.next)?);
    }
    Ok((psi, phi_plus))
}

/// Minimizes ‖Φ₊ − K Ψ‖_F² + ridge ‖K‖_F² through an SVD of Ψᵀ. With
/// `ridge = 0` and rank-deficient Ψ the minimum-norm minimizer is returned.
pub fn fit_koopman(psi: &DMatrix<f64>, phi_plus: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    if psi.ncols() == 0 {
        return Err(Error::EmptyData("no snapshot columns".into()));
    }
    if psi.ncols() != phi_plus.ncols() {
        return Err(Error::dim(format!(
            "Psi has {} columns, PhiPlus has {}",
            psi.ncols(),
            phi_plus.ncols()
        )));
    }
    if !(ridge >= 0.0) {
        return Err(Error::InvalidArgument("ridge must be ≥ 0".into()));
    }
    let (p, t) = psi.shape();
    let q = phi_plus.nrows();
    // least squares in transposed form: Ψᵀ Kᵀ ≈ Φ₊ᵀ
    let (lhs, rhs) = if ridge > 0.0 {
        let mut lhs = DMatrix::zeros(t + p, p);
        lhs.rows_mut(0, t).copy_from(&psi.transpose());
        lhs.rows_mut(t, p).fill_diagonal(ridge.sqrt());
        let mut rhs = DMatrix::zeros(t + p, q);
        rhs.rows_mut(0, t).copy_from(&phi_plus.transpose());
        (lhs, rhs)
    } else {
        (psi.transpose(), phi_plus.transpose())
    };
    let size = lhs.nrows().max(lhs.ncols()) as f64;
    let svd = lhs.svd(true, true);
    let eps = svd.singular_values.max() * size * f64::EPSILON;
    let kt = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::InvalidArgument(format!("least-squares solve failed: {e}")))?;
    Ok(kt.transpose())
}

/// K = [A B] with A the first p_φ columns.
pub fn split_ab(k: &DMatrix<f64>, p_phi: usize, p_nu: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if k.ncols() != p_phi + p_nu {
        return Err(Error::dim(format!(
            "K has {} columns, expected p_phi + p_nu = {}",
            k.ncols(),
            p_phi + p_nu
        )));
    }
    Ok((k.columns(0, p_phi).into_owned(), k.columns(p_phi, p_nu).into_owned()))
}

/// Lifted model z⁺ = A z + B ν(z, u).
#[derive(Clone, Debug, PartialEq)]
pub struct KoopmanModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    dictionary: Dictionary,
}

impl KoopmanModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, dictionary: Dictionary) -> Result<Self> {
        let (pp, pn) = (dictionary.p_phi(), dictionary.p_nu());
        if a.shape() != (pp, pp) || b.shape() != (pp, pn) {
            return Err(Error::dim(format!(
                "A is {:?} and B is {:?}; dictionary `{}` needs ({pp}, {pp}) and ({pp}, {pn})",
                a.shape(),
                b.shape(),
                dictionary.name()
            )));
        }
        Ok(KoopmanModel { a, b, dictionary })
    }

    /// Builds snapshots, solves the least-squares problem and splits K.
    pub fn identify(data: &Dataset, dictionary: &Dictionary, ridge: f64) -> Result<Self> {
        let (psi, phi_plus) = build_snapshots(data, dictionary)?;
        let k = fit_koopman(&psi, &phi_plus, ridge)?;
        let (a, b) = split_ab(&k, dictionary.p_phi(), dictionary.p_nu())?;
        KoopmanModel::new(a, b, dictionary.clone())
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    /// g(z, u) = A z + B ν(z, u).
    pub fn step(&self, z: &DVector<f64>, u: &DVector<f64>) -> Result<DVector<f64>> {
        let nu = self.dictionary.eval_nu(z, u)?;
        Ok(&self.a * z + &self.b * nu)
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    // an empty list stands for a matrix without columns
    if ncols == 0 && (rows.is_empty() || rows.iter().all(Vec::is_empty)) {
        return Ok(DMatrix::zeros(nrows, 0));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::dim(format!("expected a {nrows}×{ncols} matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    dictionary: DictionaryDef,
}

impl Serialize for KoopmanModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelRepr {
            a: rows_of(&self.a),
            b: rows_of(&self.b),
            dictionary: self.dictionary.to_def(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KoopmanModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ModelRepr::deserialize(d)?;
        let dict = Dictionary::from_def(&repr.dictionary).map_err(D::Error::custom)?;
        let (pp, pn) = (dict.p_phi(), dict.p_nu());
        let a = matrix_from_rows(&repr.a, pp, pp).map_err(D::Error::custom)?;
        let b = matrix_from_rows(&repr.b, pp, pn).map_err(D::Error::custom)?;
        KoopmanModel::new(a, b, dict).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRepr {
    states: Vec<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    trajectories: Vec<TrajectoryRepr>,
    state_dim: usize,
    input_dim: usize,
}

fn columns_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

impl Serialize for Dataset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DatasetRepr {
            trajectories: self
                .trajectories
                .iter()
                .map(|t| TrajectoryRepr {
                    states: columns_of(&t.states),
                    inputs: columns_of(&t.inputs),
                })
                .collect(),
            state_dim: self.state_dim,
            input_dim: self.input_dim,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dataset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DatasetRepr::deserialize(d)?;
        let (n, m) = (repr.state_dim, repr.input_dim);
        let trajectories = repr
            .trajectories
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if t.states.iter().any(|c| c.len() != n) || t.inputs.iter().any(|c| c.len() != m) {
                    return Err(Error::dim(format!(
                        "trajectory {i}: columns must have state_dim = {n} / input_dim = {m} entries"
                    )));
                }
                let x = DMatrix::from_fn(n, t.states.len(), |r, c| t.states[c][r]);
                let u = DMatrix::from_fn(m, t.inputs.len(), |r, c| t.inputs[c][r]);
                Trajectory::new(x, u)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Dataset::new(trajectories).map_err(D::Error::custom)
    }
}
