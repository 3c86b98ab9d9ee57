//! Zonotopes and axis-aligned boxes.
//!
//! A zonotope `⟨c, G⟩` is the set `{ c + G β : ‖β‖_∞ ≤ 1 }`. Zero generators
//! (γ = 0) encode the singleton `{c}`; zero columns are allowed everywhere.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: DMatrix<f64>,
}

/// Per-dimension bounds `lower ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl IntervalBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dim(format!(
                "interval box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(Error::InvalidInterval(i));
        }
        Ok(IntervalBox { lower, upper })
    }

    pub fn from_intervals(items: &[Interval]) -> Self {
        IntervalBox {
            lower: DVector::from_iterator(items.len(), items.iter().map(|i| i.lo)),
            upper: DVector::from_iterator(items.len(), items.iter().map(|i| i.hi)),
        }
    }

    pub fn point(v: &DVector<f64>) -> Self {
        IntervalBox {
            lower: v.clone(),
            upper: v.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn get(&self, i: usize) -> Interval {
        Interval {
            lo: self.lower[i],
            hi: self.upper[i],
        }
    }

    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.dim()).map(|i| self.get(i)).collect()
    }

    pub fn widths(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim() && (0..x.len()).all(|i| self.lower[i] <= x[i] && x[i] <= self.upper[i])
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &IntervalBox) -> Result<IntervalBox> {
        if self.dim() != other.dim() {
            return Err(Error::dim("box hull of different dimensions"));
        }
        Ok(IntervalBox {
            lower: self.lower.zip_map(&other.lower, f64::min),
            upper: self.upper.zip_map(&other.upper, f64::max),
        })
    }

    /// Stacks `self` over `other`.
    pub fn product(&self, other: &IntervalBox) -> IntervalBox {
        let stack = |a: &DVector<f64>, b: &DVector<f64>| {
            DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
        };
        IntervalBox {
            lower: stack(&self.lower, &other.lower),
            upper: stack(&self.upper, &other.upper),
        }
    }

    /// Widens every side by `frac` of the half-width (at least `min_abs`).
    pub fn enlarged(&self, frac: f64, min_abs: f64) -> IntervalBox {
        let pad = self.widths().map(|w| (0.5 * w * frac).max(min_abs));
        IntervalBox {
            lower: &self.lower - &pad,
            upper: &self.upper + &pad,
        }
    }

    /// Bounding box of a set of points (columns).
    pub fn bounding(points: impl IntoIterator<Item = DVector<f64>>) -> Option<IntervalBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = IntervalBox::point(&first);
        for p in it {
            b.lower = b.lower.zip_map(&p, f64::min);
            b.upper = b.upper.zip_map(&p, f64::max);
        }
        Some(b)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| {
                if self.upper[i] > self.lower[i] {
                    rng.random_range(self.lower[i]..=self.upper[i])
                } else {
                    self.lower[i]
                }
            }),
        )
    }
}

/// Result of a point-containment query that did not fail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    /// Minimal ‖β‖_∞ over all representations (∞ if none exists).
    pub min_norm: f64,
}

impl Zonotope {
    pub fn new(center: DVector<f64>, generators: DMatrix<f64>) -> Result<Self> {
        if center.len() != generators.nrows() {
            return Err(Error::dim(format!(
                "center has length {} but generator matrix has {} rows",
                center.len(),
                generators.nrows()
            )));
        }
        Ok(Zonotope { center, generators })
    }

    pub fn from_slices(center: &[f64], generator_rows: &[&[f64]]) -> Result<Self> {
        let n = center.len();
        if generator_rows.len() != n {
            return Err(Error::dim("generator row count differs from center length"));
        }
        let cols = generator_rows.first().map_or(0, |r| r.len());
        if generator_rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dim("ragged generator rows"));
        }
        let g = DMatrix::from_fn(n, cols, |i, j| generator_rows[i][j]);
        Zonotope::new(DVector::from_column_slice(center), g)
    }

    pub fn singleton(point: DVector<f64>) -> Self {
        let n = point.len();
        Zonotope {
            center: point,
            generators: DMatrix::zeros(n, 0),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Zonotope::singleton(DVector::zeros(dim))
    }

    /// `⟨center, diag(radii)⟩`, dropping zero radii.
    pub fn axis_aligned(center: DVector<f64>, radii: &DVector<f64>) -> Result<Self> {
        if center.len() != radii.len() {
            return Err(Error::dim("center and radii lengths differ"));
        }
        if let Some(i) = radii.iter().position(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("negative radius in component {i}")));
        }
        let n = center.len();
        let active: Vec<usize> = (0..n).filter(|&i| radii[i] > 0.0).collect();
        let mut g = DMatrix::zeros(n, active.len());
        for (col, &i) in active.iter().enumerate() {
            g[(i, col)] = radii[i];
        }
        Ok(Zonotope { center, generators: g })
    }

    /// `⟨(l+u)/2, diag((u−l)/2)⟩`.
    pub fn from_interval(lower: &DVector<f64>, upper: &DVector<f64>) -> Result<Self> {
        let b = IntervalBox::new(lower.clone(), upper.clone())?;
        Zonotope::from_box(&b)
    }

    pub fn from_box(b: &IntervalBox) -> Result<Self> {
        let radii = (b.upper() - b.lower()) * 0.5;
        Zonotope::axis_aligned(b.center(), &radii)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn order(&self) -> usize {
        self.generators.ncols()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.center.iter().all(|v| *v == 0.0) && self.generators.iter().all(|v| *v == 0.0)
    }

    /// Exact image under `map` (m × n).
    pub fn linear_map(&self, map: &DMatrix<f64>) -> Result<Zonotope> {
        if map.ncols() != self.dim() {
            return Err(Error::dim(format!(
                "linear map with {} columns applied to a {}-dimensional zonotope",
                map.ncols(),
                self.dim()
            )));
        }
        Ok(Zonotope {
            center: map * &self.center,
            generators: map * &self.generators,
        })
    }

    /// `⟨c₁ + c₂, [G₁ G₂]⟩`.
    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::dim(format!(
                "Minkowski sum of {}- and {}-dimensional zonotopes",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        let (g1, g2) = (self.order(), other.order());
        let mut g = DMatrix::zeros(n, g1 + g2);
        g.columns_mut(0, g1).copy_from(&self.generators);
        g.columns_mut(g1, g2).copy_from(&other.generators);
        Ok(Zonotope {
            center: &self.center + &other.center,
            generators: g,
        })
    }

    /// Stacked centers with block-diagonal generators.
    pub fn cartesian_product(&self, other: &Zonotope) -> Zonotope {
        let (n1, n2) = (self.dim(), other.dim());
        let (g1, g2) = (self.order(), other.order());
        let center = DVector::from_iterator(n1 + n2, self.center.iter().chain(other.center.iter()).copied());
        let mut g = DMatrix::zeros(n1 + n2, g1 + g2);
        g.view_mut((0, 0), (n1, g1)).copy_from(&self.generators);
        g.view_mut((n1, g1), (n2, g2)).copy_from(&other.generators);
        Zonotope { center, generators: g }
    }

    pub fn translate(&self, v: &DVector<f64>) -> Result<Zonotope> {
        if v.len() != self.dim() {
            return Err(Error::dim("translation vector dimension differs from zonotope"));
        }
        Ok(Zonotope {
            center: &self.center + v,
            generators: self.generators.clone(),
        })
    }

    /// Per-dimension radius Σⱼ |g_ij|.
    pub fn radius(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.generators.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()),
        )
    }

    /// Tightest axis-aligned box containing the zonotope.
    pub fn interval_hull(&self) -> IntervalBox {
        let r = self.radius();
        IntervalBox {
            lower: &self.center - &r,
            upper: &self.center + &r,
        }
    }

    /// Scales the generators about the center.
    pub fn scaled_about_center(&self, factor: f64) -> Zonotope {
        Zonotope {
            center: self.center.clone(),
            generators: &self.generators * factor,
        }
    }

    /// `c + G β` for a given coefficient vector.
    pub fn point_at(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.center + &self.generators * beta
    }

    /// Draws β uniformly from the unit cube and returns `c + G β`.
    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        let beta = DVector::from_fn(self.order(), |_, _| rng.random_range(-1.0..=1.0));
        self.point_at(&beta)
    }

    /// Random vertex candidate: β ∈ {−1, 1}^γ.
    pub fn sample_extreme(&self, rng: &mut impl Rng) -> DVector<f64> {
        let beta = DVector::from_fn(self.order(), |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
        self.point_at(&beta)
    }

    /// Membership test with tolerance `tol` on the coefficient bound: is there
    /// a β with ‖β‖_∞ ≤ 1 + tol and `G β = x − c`? Solved as a bounded
    /// feasibility LP; solver failures are errors, never `false`.
    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        let (d, slack) = match self.precheck(x, tol, true)? {
            Precheck::Decided(m) => return Ok(m.inside),
            Precheck::Open { d, slack } => (d, slack),
        };
        bounded_preimage_exists(&self.generators, &d, &slack, 1.0 + tol)
    }

    /// Like [`Zonotope::contains_point`] but also reports the minimal
    /// coefficient norm `min ‖β‖_∞ s.t. G β = x − c`.
    pub fn membership(&self, x: &DVector<f64>, tol: f64) -> Result<Membership> {
        let (d, slack) = match self.precheck(x, tol, false)? {
            Precheck::Decided(m) => return Ok(m),
            Precheck::Open { d, slack } => (d, slack),
        };
        let min_norm = min_inf_norm_preimage(&self.generators, &d, &slack)?;
        Ok(Membership {
            inside: min_norm <= 1.0 + tol,
            min_norm,
        })
    }

    /// Validates the query. With `hull_reject`, points outside the scaled
    /// interval hull are decided without an LP; their true minimal norm is
    /// then not reported.
    fn precheck(&self, x: &DVector<f64>, tol: f64, hull_reject: bool) -> Result<Precheck> {
        if x.len() != self.dim() {
            return Err(Error::dim(format!(
                "point of dimension {} tested against a {}-dimensional zonotope",
                x.len(),
                self.dim()
            )));
        }
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument("containment tolerance must be ≥ 0".into()));
        }
        let d = x - &self.center;
        let n = self.dim();
        let scale: Vec<f64> = (0..n)
            .map(|i| 1.0 + d[i].abs() + self.generators.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .collect();
        let slack: Vec<f64> = scale.iter().map(|s| EQ_SLACK * s).collect();

        // Necessary condition: inside the (scaled) interval hull.
        let r = self.radius();
        if hull_reject && (0..n).any(|i| d[i].abs() > (1.0 + tol) * r[i] + slack[i]) {
            return Ok(Precheck::Decided(Membership {
                inside: false,
                min_norm: f64::INFINITY,
            }));
        }
        if self.order() == 0 {
            let inside = (0..n).all(|i| d[i].abs() <= slack[i]);
            return Ok(Precheck::Decided(Membership {
                inside,
                min_norm: if inside { 0.0 } else { f64::INFINITY },
            }));
        }
        Ok(Precheck::Open { d, slack })
    }

    /// Box-style order reduction: keeps the largest generators (2-norm, ties
    /// by column index) and replaces the rest by their interval hull so that
    /// at most `floor(max_order · n)` generators remain.
    pub fn reduce_order(&self, max_order: f64) -> Result<Zonotope> {
        if !(max_order >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "reduction order must be ≥ 1, got {max_order}"
            )));
        }
        let n = self.dim();
        let limit = (max_order * n as f64).floor() as usize;
        let gamma = self.order();
        if gamma <= limit || n == 0 {
            return Ok(self.clone());
        }
        let keep = limit.saturating_sub(n);
        let norms: Vec<f64> = self.generators.column_iter().map(|c| c.norm()).collect();
        let mut idx: Vec<usize> = (0..gamma).collect();
        // descending by norm; stable sort keeps lower column index first on ties
        idx.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
        let mut kept: Vec<usize> = idx[..keep].to_vec();
        kept.sort_unstable();
        let mut boxed = DVector::<f64>::zeros(n);
        for &j in &idx[keep..] {
            for i in 0..n {
                boxed[i] += self.generators[(i, j)].abs();
            }
        }
        let box_cols: Vec<usize> = (0..n).filter(|&i| boxed[i] > 0.0).collect();
        let mut g = DMatrix::zeros(n, kept.len() + box_cols.len());
        for (col, &j) in kept.iter().enumerate() {
            g.set_column(col, &self.generators.column(j));
        }
        for (k, &i) in box_cols.iter().enumerate() {
            g[(i, kept.len() + k)] = boxed[i];
        }
        Ok(Zonotope {
            center: self.center.clone(),
            generators: g,
        })
    }
}

// Relative slack on the equality constraints of the containment LP; absorbs
// rounding in `x − c` for points generated as `c + Gβ`.
const EQ_SLACK: f64 = 1e-12;

enum Precheck {
    Decided(Membership),
    Open { d: DVector<f64>, slack: Vec<f64> },
}

fn bounded_preimage_exists(g: &DMatrix<f64>, d: &DVector<f64>, slack: &[f64], bound: f64) -> Result<bool> {
    use microlp::{ComparisonOp, Error as LpError, OptimizationDirection, Problem};

    let (n, gamma) = g.shape();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let beta: Vec<_> = (0..gamma).map(|_| lp.add_var(0.0, (-bound, bound))).collect();
    for i in 0..n {
        let row: Vec<_> = beta
            .iter()
            .enumerate()
            .filter(|(j, _)| g[(i, *j)] != 0.0)
            .map(|(j, &b)| (b, g[(i, j)]))
            .collect();
        if row.is_empty() {
            if d[i].abs() > slack[i] {
                return Ok(false);
            }
            continue;
        }
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, d[i] + slack[i]);
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, d[i] - slack[i]);
    }
    match lp.solve() {
        Ok(_) => Ok(true),
        Err(LpError::Infeasible) => Ok(false),
        Err(e) => Err(Error::Indeterminate(format!("LP solver failure: {e}"))),
    }
}

fn min_inf_norm_preimage(g: &DMatrix<f64>, d: &DVector<f64>, slack: &[f64]) -> Result<f64> {
    use microlp::{ComparisonOp, Error as LpError, OptimizationDirection, Problem};

    let (n, gamma) = g.shape();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let beta: Vec<_> = (0..gamma)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for &b in &beta {
        lp.add_constraint([(b, 1.0), (t, -1.0)], ComparisonOp::Le, 0.0);
        lp.add_constraint([(b, -1.0), (t, -1.0)], ComparisonOp::Le, 0.0);
    }
    for i in 0..n {
        let row: Vec<_> = beta
            .iter()
            .enumerate()
            .filter(|(j, _)| g[(i, *j)] != 0.0)
            .map(|(j, &b)| (b, g[(i, j)]))
            .collect();
        if row.is_empty() {
            if d[i].abs() > slack[i] {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, d[i] + slack[i]);
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, d[i] - slack[i]);
    }
    match lp.solve() {
        Ok(outcome) => match outcome.solution() {
            Some(sol) => Ok(sol.objective()),
            None => Err(Error::Indeterminate("LP solve interrupted".into())),
        },
        Err(LpError::Infeasible) => Ok(f64::INFINITY),
        Err(e) => Err(Error::Indeterminate(format!("LP solver failure: {e}"))),
    }
}

#[derive(Serialize, Deserialize)]
struct ZonotopeRepr {
    center: Vec<f64>,
    generators: Vec<Vec<f64>>,
}

impl Serialize for Zonotope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ZonotopeRepr {
            center: self.center.iter().copied().collect(),
            generators: self
                .generators
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Zonotope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ZonotopeRepr::deserialize(d)?;
        let n = repr.center.len();
        // `generators: []` is accepted as the singleton
        let rows = if repr.generators.is_empty() {
            vec![Vec::new(); n]
        } else {
            repr.generators
        };
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        Zonotope::from_slices(&repr.center, &refs).map_err(D::Error::custom)
    }
}
