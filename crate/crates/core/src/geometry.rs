//! Lipschitz graphs, strips and their intersections.
//!
//! A μh-horizontal curve is the graph `y = h(x)` of a function with Lipschitz
//! constant μh over an interval of x; a μv-vertical curve is `x = v(y)`.
//! A strip is the region between two such graphs that share an interval.
//!
//! Curves carry an exact closed form where one exists (constants, lines,
//! the square-root branches bounding the Hénon strips) and a piecewise cubic
//! Hermite table otherwise. Every curve stores a Lipschitz bound that is
//! checked against its shape at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::Point2;

/// Default number of interior sample points used by width and containment checks.
pub const DEFAULT_GRID: usize = 1024;

/// Relative slack allowed when comparing a slope against a declared bound.
const SLOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn symmetric(r: f64) -> Self {
        Interval { lo: -r, hi: r }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.lo - tol && t <= self.hi + tol
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.lo, self.hi)
    }

    /// Point at fraction `u` of the way from `lo` to `hi`.
    pub fn lerp(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }

    /// `count` evenly spaced points including both ends (`count >= 2`).
    pub fn linspace(&self, count: usize) -> impl Iterator<Item = f64> + '_ {
        let last = count.max(2) - 1;
        (0..=last).map(move |k| {
            if k == last {
                self.hi
            } else {
                self.lerp(k as f64 / last as f64)
            }
        })
    }

    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        (self.lo - other.lo).abs() <= tol && (self.hi - other.hi).abs() <= tol
    }
}

/// Axis-aligned rectangle `D_x × D_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub x: Interval,
    pub y: Interval,
}

impl DomainBox {
    pub fn new(x: Interval, y: Interval) -> Self {
        DomainBox { x, y }
    }

    /// `[-r, r] × [-r, r]`.
    pub fn square(r: f64) -> Self {
        DomainBox {
            x: Interval::symmetric(r),
            y: Interval::symmetric(r),
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.x.contains(p.x, tol) && self.y.contains(p.y, tol)
    }

    pub fn diameter(&self) -> f64 {
        self.x.len().hypot(self.y.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Graph of `y = h(x)`.
    Horizontal,
    /// Graph of `x = v(y)`.
    Vertical,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    Constant {
        value: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `sign · sqrt(offset - t)`, the branches bounding the Hénon strips.
    SqrtBranch {
        offset: f64,
        sign: f64,
    },
    /// Piecewise interpolant; cubic Hermite when `slopes` is present, linear otherwise.
    Table {
        knots: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slopes: Option<Vec<f64>>,
    },
    /// Pointwise average of two curves over the same interval.
    Midline {
        lower: Box<LipschitzCurve>,
        upper: Box<LipschitzCurve>,
    },
}

/// Graph of a Lipschitz function over a closed interval.
///
/// Evaluation outside the interval clamps the argument, which extends the
/// function by constants and keeps the Lipschitz bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCurve {
    pub orientation: Orientation,
    pub interval: Interval,
    pub lipschitz_bound: f64,
    pub shape: CurveShape,
}

impl LipschitzCurve {
    /// Builds a curve and checks the declared bound against the shape.
    pub fn new(
        orientation: Orientation,
        interval: Interval,
        shape: CurveShape,
        lipschitz_bound: f64,
    ) -> Result<Self> {
        if !(lipschitz_bound.is_finite() && lipschitz_bound >= 0.0) {
            return Err(Error::InvalidCurve(format!(
                "Lipschitz bound must be finite and non-negative, got {lipschitz_bound}"
            )));
        }
        validate_shape(&shape, &interval, orientation)?;
        let curve = LipschitzCurve {
            orientation,
            interval,
            lipschitz_bound,
            shape,
        };
        let slope = curve.max_slope();
        if slope > lipschitz_bound * (1.0 + SLOPE_SLACK) + 1e-12 {
            return Err(Error::LipschitzViolation(
                orientation.name(),
                slope,
                lipschitz_bound,
            ));
        }
        Ok(curve)
    }

    pub fn constant(orientation: Orientation, interval: Interval, value: f64) -> Result<Self> {
        Self::new(orientation, interval, CurveShape::Constant { value }, 0.0)
    }

    pub fn affine(
        orientation: Orientation,
        interval: Interval,
        slope: f64,
        intercept: f64,
    ) -> Result<Self> {
        Self::new(
            orientation,
            interval,
            CurveShape::Affine { slope, intercept },
            slope.abs(),
        )
    }

    /// `sign·sqrt(offset - t)`; the declared bound is the exact maximal slope,
    /// attained at the right end of the interval.
    pub fn sqrt_branch(
        orientation: Orientation,
        interval: Interval,
        offset: f64,
        sign: f64,
    ) -> Result<Self> {
        if offset - interval.hi <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "sqrt branch offset {offset} does not exceed interval end {}",
                interval.hi
            )));
        }
        let bound = 0.5 / (offset - interval.hi).sqrt();
        Self::new(
            orientation,
            interval,
            CurveShape::SqrtBranch { offset, sign },
            bound,
        )
    }

    /// Piecewise-linear curve through `(knots[i], values[i])`.
    pub fn piecewise_linear(
        orientation: Orientation,
        knots: Vec<f64>,
        values: Vec<f64>,
        lipschitz_bound: f64,
    ) -> Result<Self> {
        let interval = table_interval(&knots)?;
        Self::new(
            orientation,
            interval,
            CurveShape::Table {
                knots,
                values,
                slopes: None,
            },
            lipschitz_bound,
        )
    }

    /// Cubic Hermite curve through samples with known derivatives.
    ///
    /// Knot slopes are clamped to `±bound`; a segment whose interpolant would
    /// still exceed the bound falls back to its secant. A secant steeper than
    /// the bound is an error.
    pub fn hermite(
        orientation: Orientation,
        knots: Vec<f64>,
        values: Vec<f64>,
        slopes: Vec<f64>,
        bound: f64,
    ) -> Result<Self> {
        let interval = table_interval(&knots)?;
        if values.len() != knots.len() || slopes.len() != knots.len() {
            return Err(Error::InvalidCurve("table length mismatch".into()));
        }
        let mut slopes: Vec<f64> = slopes.iter().map(|m| m.clamp(-bound, bound)).collect();
        let limit = bound * (1.0 + SLOPE_SLACK) + 1e-12;
        for w in 0..knots.len() - 1 {
            let secant = (values[w + 1] - values[w]) / (knots[w + 1] - knots[w]);
            if secant.abs() > limit {
                return Err(Error::LipschitzViolation(orientation.name(), secant.abs(), bound));
            }
        }
        // Flatten offending segments to their secants until every cubic fits.
        // Fixing one segment can break its neighbour, so the sweeps are
        // bounded; past that the piecewise-linear interpolant is used, whose
        // slope is the largest secant.
        let mut settled = false;
        for _ in 0..2 * knots.len() {
            let mut changed = false;
            for w in 0..knots.len() - 1 {
                let h = knots[w + 1] - knots[w];
                let secant = (values[w + 1] - values[w]) / h;
                if hermite_segment_max_slope(slopes[w], slopes[w + 1], secant) > limit {
                    slopes[w] = secant;
                    slopes[w + 1] = secant;
                    changed = true;
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        Self::new(
            orientation,
            interval,
            CurveShape::Table {
                knots,
                values,
                slopes: settled.then_some(slopes),
            },
            bound,
        )
    }

    /// Average of two curves sharing orientation and interval.
    pub fn midline(lower: &LipschitzCurve, upper: &LipschitzCurve) -> Result<Self> {
        if lower.orientation != upper.orientation {
            return Err(Error::OrientationMismatch("midline of curves"));
        }
        if !lower.interval.approx_eq(&upper.interval, 1e-12) {
            return Err(Error::InvalidCurve("midline of curves over different intervals".into()));
        }
        let bound = 0.5 * (lower.lipschitz_bound + upper.lipschitz_bound);
        Self::new(
            lower.orientation,
            lower.interval,
            CurveShape::Midline {
                lower: Box::new(lower.clone()),
                upper: Box::new(upper.clone()),
            },
            bound,
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = self.interval.clamp(t);
        match &self.shape {
            CurveShape::Constant { value } => *value,
            CurveShape::Affine { slope, intercept } => slope * t + intercept,
            CurveShape::SqrtBranch { offset, sign } => sign * (offset - t).max(0.0).sqrt(),
            CurveShape::Table {
                knots,
                values,
                slopes,
            } => table_eval(knots, values, slopes.as_deref(), t),
            CurveShape::Midline { lower, upper } => 0.5 * (lower.eval(t) + upper.eval(t)),
        }
    }

    /// Derivative of the graph function (one-sided at knots and interval ends).
    pub fn slope(&self, t: f64) -> f64 {
        let t = self.interval.clamp(t);
        match &self.shape {
            CurveShape::Constant { .. } => 0.0,
            CurveShape::Affine { slope, .. } => *slope,
            CurveShape::SqrtBranch { offset, sign } => {
                let d = (offset - t).max(f64::MIN_POSITIVE);
                -sign * 0.5 / d.sqrt()
            }
            CurveShape::Table {
                knots,
                values,
                slopes,
            } => table_slope(knots, values, slopes.as_deref(), t),
            CurveShape::Midline { lower, upper } => 0.5 * (lower.slope(t) + upper.slope(t)),
        }
    }

    /// Maximal absolute slope implied by the shape.
    pub fn max_slope(&self) -> f64 {
        match &self.shape {
            CurveShape::Constant { .. } => 0.0,
            CurveShape::Affine { slope, .. } => slope.abs(),
            CurveShape::SqrtBranch { offset, .. } => {
                let d = offset - self.interval.hi;
                if d > 0.0 {
                    0.5 / d.sqrt()
                } else {
                    f64::INFINITY
                }
            }
            CurveShape::Table {
                knots,
                values,
                slopes,
            } => {
                let mut worst = 0.0_f64;
                for w in 0..knots.len().saturating_sub(1) {
                    let secant = (values[w + 1] - values[w]) / (knots[w + 1] - knots[w]);
                    let s = match slopes {
                        Some(m) => hermite_segment_max_slope(m[w], m[w + 1], secant),
                        None => secant.abs(),
                    };
                    worst = worst.max(s);
                }
                worst
            }
            CurveShape::Midline { lower, upper } => 0.5 * (lower.max_slope() + upper.max_slope()),
        }
    }

    /// The point of the graph above (or beside) parameter `t`.
    pub fn point_at(&self, t: f64) -> Point2 {
        let v = self.eval(t);
        match self.orientation {
            Orientation::Horizontal => Point2::new(t, v),
            Orientation::Vertical => Point2::new(v, t),
        }
    }

    /// Unit-parameter tangent `(1, h')` or `(v', 1)`.
    pub fn tangent_at(&self, t: f64) -> (f64, f64) {
        let m = self.slope(t);
        match self.orientation {
            Orientation::Horizontal => (1.0, m),
            Orientation::Vertical => (m, 1.0),
        }
    }

    /// Largest pairwise slope over `samples` evenly spaced points.
    pub fn audit_lipschitz(&self, samples: usize) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .interval
            .linspace(samples)
            .map(|t| (t, self.eval(t)))
            .collect();
        let mut worst = 0.0_f64;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let dt = b.0 - a.0;
                if dt > 0.0 {
                    worst = worst.max((b.1 - a.1).abs() / dt);
                }
            }
        }
        worst
    }
}

fn table_interval(knots: &[f64]) -> Result<Interval> {
    if knots.len() < 2 {
        return Err(Error::InvalidCurve("table needs at least two knots".into()));
    }
    Interval::new(knots[0], knots[knots.len() - 1])
}

fn validate_shape(shape: &CurveShape, interval: &Interval, orientation: Orientation) -> Result<()> {
    match shape {
        CurveShape::Table {
            knots,
            values,
            slopes,
        } => {
            if knots.len() < 2 || values.len() != knots.len() {
                return Err(Error::InvalidCurve("table length mismatch".into()));
            }
            if let Some(m) = slopes {
                if m.len() != knots.len() {
                    return Err(Error::InvalidCurve("slope table length mismatch".into()));
                }
            }
            if knots.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidCurve("knots must be strictly increasing".into()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCurve("non-finite table value".into()));
            }
            if knots[0] != interval.lo || knots[knots.len() - 1] != interval.hi {
                return Err(Error::InvalidCurve("table does not span its interval".into()));
            }
        }
        CurveShape::Midline { lower, upper } => {
            if lower.orientation != orientation || upper.orientation != orientation {
                return Err(Error::OrientationMismatch("midline components"));
            }
        }
        CurveShape::Constant { value } if !value.is_finite() => {
            return Err(Error::InvalidCurve("non-finite constant".into()));
        }
        _ => {}
    }
    Ok(())
}

fn segment_index(knots: &[f64], t: f64) -> usize {
    let k = knots.partition_point(|&x| x <= t);
    k.saturating_sub(1).min(knots.len() - 2)
}

fn table_eval(knots: &[f64], values: &[f64], slopes: Option<&[f64]>, t: f64) -> f64 {
    let w = segment_index(knots, t);
    let h = knots[w + 1] - knots[w];
    let u = (t - knots[w]) / h;
    let (p0, p1) = (values[w], values[w + 1]);
    match slopes {
        None => p0 + u * (p1 - p0),
        Some(m) => {
            let u2 = u * u;
            let u3 = u2 * u;
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            h00 * p0 + h10 * h * m[w] + h01 * p1 + h11 * h * m[w + 1]
        }
    }
}

fn table_slope(knots: &[f64], values: &[f64], slopes: Option<&[f64]>, t: f64) -> f64 {
    let w = segment_index(knots, t);
    let h = knots[w + 1] - knots[w];
    let secant = (values[w + 1] - values[w]) / h;
    match slopes {
        None => secant,
        Some(m) => {
            let u = (t - knots[w]) / h;
            hermite_derivative(m[w], m[w + 1], secant, u)
        }
    }
}

/// Derivative of a Hermite cubic at fraction `u`, in terms of its end slopes and secant.
fn hermite_derivative(m0: f64, m1: f64, secant: f64, u: f64) -> f64 {
    m0 * (3.0 * u * u - 4.0 * u + 1.0) + m1 * (3.0 * u * u - 2.0 * u) + secant * (6.0 * u - 6.0 * u * u)
}

fn hermite_segment_max_slope(m0: f64, m1: f64, secant: f64) -> f64 {
    let a = 3.0 * m0 + 3.0 * m1 - 6.0 * secant;
    let b = -4.0 * m0 - 2.0 * m1 + 6.0 * secant;
    let mut worst = m0.abs().max(m1.abs());
    if a != 0.0 {
        let u = -b / (2.0 * a);
        if u > 0.0 && u < 1.0 {
            worst = worst.max(hermite_derivative(m0, m1, secant, u).abs());
        }
    }
    worst
}

/// Region between two non-intersecting curves of the same orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub orientation: Orientation,
    pub lower: LipschitzCurve,
    pub upper: LipschitzCurve,
}

impl Strip {
    pub fn new(lower: LipschitzCurve, upper: LipschitzCurve) -> Result<Self> {
        if lower.orientation != upper.orientation {
            return Err(Error::OrientationMismatch("strip boundaries"));
        }
        if !lower.interval.approx_eq(&upper.interval, 1e-12) {
            return Err(Error::InvalidStrip(
                "boundary curves have different intervals".into(),
            ));
        }
        for t in lower.interval.linspace(DEFAULT_GRID + 2) {
            let (a, b) = (lower.eval(t), upper.eval(t));
            if !(a < b) {
                return Err(Error::InvalidStrip(format!(
                    "boundaries touch or cross at {t}: {a} >= {b}"
                )));
            }
        }
        Ok(Strip {
            orientation: lower.orientation,
            lower,
            upper,
        })
    }

    pub fn interval(&self) -> Interval {
        self.lower.interval
    }

    /// Largest gap between the boundaries over `grid` interior points and both ends.
    pub fn width(&self, grid: usize) -> f64 {
        self.interval()
            .linspace(grid + 2)
            .map(|t| self.upper.eval(t) - self.lower.eval(t))
            .fold(0.0, f64::max)
    }

    pub fn max_lipschitz(&self) -> f64 {
        self.lower.lipschitz_bound.max(self.upper.lipschitz_bound)
    }

    /// Splits `p` into (parameter coordinate, value coordinate).
    pub fn coords(&self, p: Point2) -> (f64, f64) {
        match self.orientation {
            Orientation::Horizontal => (p.x, p.y),
            Orientation::Vertical => (p.y, p.x),
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let (t, v) = self.coords(p);
        self.interval().contains(t, tol)
            && v >= self.lower.eval(t) - tol
            && v <= self.upper.eval(t) + tol
    }

    /// Point at parameter `t`, a fraction `frac` of the way from lower to upper.
    pub fn point_at(&self, t: f64, frac: f64) -> Point2 {
        let a = self.lower.eval(t);
        let v = a + frac * (self.upper.eval(t) - a);
        match self.orientation {
            Orientation::Horizontal => Point2::new(t, v),
            Orientation::Vertical => Point2::new(v, t),
        }
    }

    /// Curve a fraction `frac` of the way from lower to upper.
    pub fn interpolated_value(&self, t: f64, frac: f64) -> f64 {
        let a = self.lower.eval(t);
        a + frac * (self.upper.eval(t) - a)
    }

    pub fn midline(&self) -> Result<LipschitzCurve> {
        LipschitzCurve::midline(&self.lower, &self.upper)
    }

    /// Distance from `p` to the part of the boundary that is not made of the
    /// two defining curves (the segments at the two interval ends).
    pub fn distance_to_end_segments(&self, p: Point2) -> f64 {
        let (t, v) = self.coords(p);
        let iv = self.interval();
        [iv.lo, iv.hi]
            .iter()
            .map(|&end| {
                let (a, b) = (self.lower.eval(end), self.upper.eval(end));
                let dv = if v < a {
                    a - v
                } else if v > b {
                    v - b
                } else {
                    0.0
                };
                dv.hypot(t - end)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed polygon tracing the strip boundary, `samples` points per curve.
    pub fn outline(&self, samples: usize) -> Vec<Point2> {
        let ts: Vec<f64> = self.interval().linspace(samples).collect();
        let mut pts: Vec<Point2> = ts.iter().map(|&t| self.lower.point_at(t)).collect();
        pts.extend(ts.iter().rev().map(|&t| self.upper.point_at(t)));
        pts
    }
}

pub fn strip_width(s: &Strip) -> f64 {
    s.width(DEFAULT_GRID)
}

/// True iff `inner ⊂ outer` and the end segments of `inner` lie on those of
/// `outer` (for vertical strips: same y-extent, nested boundary curves).
pub fn intersects_fully(inner: &Strip, outer: &Strip, tol: f64) -> Result<bool> {
    if inner.orientation != outer.orientation {
        return Err(Error::OrientationMismatch("full-intersection test"));
    }
    if !inner.interval().approx_eq(&outer.interval(), tol) {
        return Ok(false);
    }
    let nested = inner.interval().linspace(DEFAULT_GRID + 2).all(|t| {
        inner.lower.eval(t) >= outer.lower.eval(t) - tol
            && inner.upper.eval(t) <= outer.upper.eval(t) + tol
    });
    Ok(nested)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IntersectionOptions {
    fn default() -> Self {
        IntersectionOptions {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Iterates `y ← h(v(y))` from the midpoint of `v`'s interval.
pub fn fixed_point_iterates<'a>(
    v: &'a LipschitzCurve,
    h: &'a LipschitzCurve,
) -> impl Iterator<Item = f64> + 'a {
    let y0 = h.eval(v.eval(v.interval.mid()));
    std::iter::successors(Some(y0), move |&y| Some(h.eval(v.eval(y))))
}

/// Solves `x = v(y), y = h(x)` for graph closures by fixed-point iteration.
///
/// Converges whenever `Lip(v)·Lip(h) < 1`. Returns the point and the number
/// of iterations used.
pub fn intersect_graphs<V, H>(v: V, h: H, y0: f64, opts: IntersectionOptions) -> Result<(Point2, usize)>
where
    V: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let mut y = y0;
    let mut step = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = h(v(y));
        step = (next - y).abs();
        y = next;
        if step <= opts.tol {
            return Ok((Point2::new(v(y), y), it));
        }
        if !y.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_step: step,
    })
}

/// Unique intersection of a vertical and a horizontal Lipschitz curve.
pub fn curve_intersection(v: &LipschitzCurve, h: &LipschitzCurve) -> Result<Point2> {
    curve_intersection_with(v, h, IntersectionOptions::default())
}

pub fn curve_intersection_with(
    v: &LipschitzCurve,
    h: &LipschitzCurve,
    opts: IntersectionOptions,
) -> Result<Point2> {
    if v.orientation != Orientation::Vertical || h.orientation != Orientation::Horizontal {
        return Err(Error::OrientationMismatch(
            "curve_intersection expects (vertical, horizontal)",
        ));
    }
    let product = v.lipschitz_bound * h.lipschitz_bound;
    if product >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz product {product} must be below 1"
        )));
    }
    let y0 = h.eval(v.eval(v.interval.mid()));
    let (p, _) = intersect_graphs(|y| v.eval(y), |x| h.eval(x), y0, opts)?;
    if !(v.interval.contains(p.y, opts.tol) && h.interval.contains(p.x, opts.tol)) {
        return Err(Error::OutsideInterval(p));
    }
    Ok(p)
}

/// Approximation of the limit of a nested sequence of strips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    pub curve: LipschitzCurve,
    /// Width of the last strip; the true limit lies within this distance.
    pub error_bound: f64,
}

/// Midline of the last strip of a nested, shrinking sequence.
pub fn nested_limit(strips: &[Strip]) -> Result<LimitCurve> {
    let last = strips
        .last()
        .ok_or_else(|| Error::InvalidStrip("nested_limit needs at least one strip".into()))?;
    let tol = 1e-12;
    let mut widths = Vec::with_capacity(strips.len());
    for (i, s) in strips.iter().enumerate() {
        if s.orientation != last.orientation {
            return Err(Error::OrientationMismatch("nested_limit"));
        }
        widths.push(strip_width(s));
        if i == 0 {
            continue;
        }
        let outer = &strips[i - 1];
        if !intersects_fully(s, outer, 1e-9)? {
            return Err(Error::NestingViolation {
                index: i,
                detail: "strip is not contained in its predecessor".into(),
            });
        }
        if widths[i] > widths[i - 1] + tol {
            return Err(Error::NestingViolation {
                index: i,
                detail: format!("width grew from {} to {}", widths[i - 1], widths[i]),
            });
        }
    }
    let bound = strips
        .iter()
        .map(Strip::max_lipschitz)
        .fold(0.0, f64::max);
    let mut curve = last.midline()?;
    curve.lipschitz_bound = curve.lipschitz_bound.max(bound);
    Ok(LimitCurve {
        curve,
        error_bound: widths[widths.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn vconst(c: f64, i: Interval) -> LipschitzCurve {
        LipschitzCurve::constant(Orientation::Vertical, i, c).unwrap()
    }

    fn vstrip(a: f64, b: f64, i: Interval) -> Strip {
        Strip::new(vconst(a, i), vconst(b, i)).unwrap()
    }

    #[test]
    fn width_of_constant_vertical_strip() {
        assert_eq!(strip_width(&vstrip(-1.0, 1.0, iv(-4.0, 4.0))), 2.0);
    }

    #[test]
    fn width_attained_at_endpoints() {
        let i = iv(-2.0, 2.0);
        let lo = LipschitzCurve::constant(Orientation::Horizontal, i, 0.0).unwrap();
        let hi = LipschitzCurve::piecewise_linear(
            Orientation::Horizontal,
            vec![-2.0, 0.0, 2.0],
            vec![0.2, 1e-3, 0.2],
            0.1,
        )
        .unwrap();
        let s = Strip::new(lo, hi).unwrap();
        assert!((strip_width(&s) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn strip_rejects_crossing_boundaries() {
        let i = iv(0.0, 1.0);
        let a = LipschitzCurve::affine(Orientation::Vertical, i, 1.0, 0.0).unwrap();
        let b = vconst(0.5, i);
        assert!(matches!(Strip::new(a, b), Err(Error::InvalidStrip(_))));
    }

    #[test]
    fn strip_rejects_mixed_orientation() {
        let i = iv(0.0, 1.0);
        let a = vconst(0.0, i);
        let b = LipschitzCurve::constant(Orientation::Horizontal, i, 1.0).unwrap();
        assert!(matches!(Strip::new(a, b), Err(Error::OrientationMismatch(_))));
    }

    #[test]
    fn declared_bound_is_checked() {
        let r = LipschitzCurve::new(
            Orientation::Vertical,
            iv(0.0, 1.0),
            CurveShape::Affine {
                slope: 0.7,
                intercept: 0.0,
            },
            0.5,
        );
        assert!(matches!(r, Err(Error::LipschitzViolation(..))));
    }

    #[test]
    fn sqrt_branch_bound_is_exact() {
        let c = LipschitzCurve::sqrt_branch(Orientation::Vertical, iv(-4.0, 4.0), 5.0, 1.0).unwrap();
        assert!((c.lipschitz_bound - 0.5).abs() < 1e-15);
        assert!((c.slope(4.0).abs() - 0.5).abs() < 1e-15);
        assert!(c.audit_lipschitz(1000) <= c.lipschitz_bound + 1e-9);
        assert!(LipschitzCurve::sqrt_branch(Orientation::Vertical, iv(-4.0, 4.0), 4.0, 1.0).is_err());
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 0.01 * t * t * t - 0.05 * t;
        let df = |t: f64| 0.03 * t * t - 0.05;
        let knots: Vec<f64> = iv(-1.0, 1.0).linspace(9).collect();
        let vals = knots.iter().map(|&t| f(t)).collect();
        let slopes = knots.iter().map(|&t| df(t)).collect();
        let c = LipschitzCurve::hermite(Orientation::Horizontal, knots, vals, slopes, 0.1).unwrap();
        for t in iv(-1.0, 1.0).linspace(101) {
            assert!((c.eval(t) - f(t)).abs() < 1e-15);
            assert!((c.slope(t) - df(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn hermite_clamps_knot_slopes() {
        let c = LipschitzCurve::hermite(
            Orientation::Vertical,
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.5, 1.0],
            vec![0.9, 0.5, -0.9],
            0.5,
        )
        .unwrap();
        assert!(c.max_slope() <= 0.5 + 1e-12);
        assert!(c.audit_lipschitz(500) <= 0.5 + 1e-9);
    }

    #[test]
    fn hermite_rejects_steep_secant() {
        let r = LipschitzCurve::hermite(
            Orientation::Vertical,
            vec![0.0, 1.0],
            vec![0.0, 0.8],
            vec![0.0, 0.0],
            0.5,
        );
        assert!(matches!(r, Err(Error::LipschitzViolation(..))));
    }

    #[test]
    fn evaluation_clamps_outside_interval() {
        let c = LipschitzCurve::affine(Orientation::Horizontal, iv(0.0, 1.0), 0.5, 1.0).unwrap();
        assert_eq!(c.eval(-3.0), 1.0);
        assert_eq!(c.eval(7.0), 1.5);
    }

    #[test]
    fn intersection_of_axes() {
        let i = iv(-1.0, 1.0);
        let v = vconst(0.0, i);
        let h = LipschitzCurve::constant(Orientation::Horizontal, i, 0.0).unwrap();
        assert_eq!(curve_intersection(&v, &h).unwrap(), Point2::new(0.0, 0.0));
    }

    #[test]
    fn intersection_of_constants_is_immediate() {
        let i = iv(-1.0, 1.0);
        let v = vconst(0.3, i);
        let h = LipschitzCurve::constant(Orientation::Horizontal, i, -0.6).unwrap();
        let (p, iters) = intersect_graphs(|y| v.eval(y), |x| h.eval(x), 0.0, Default::default()).unwrap();
        assert_eq!(p, Point2::new(0.3, -0.6));
        assert!(iters <= 2);
    }

    #[test]
    fn intersection_of_lines() {
        let i = iv(-2.0, 2.0);
        let v = LipschitzCurve::affine(Orientation::Vertical, i, 0.1, 0.5).unwrap();
        let h = LipschitzCurve::affine(Orientation::Horizontal, i, 0.2, 0.0).unwrap();
        let p = curve_intersection(&v, &h).unwrap();
        // x = 0.5 + 0.1 y, y = 0.2 x  =>  x = 0.5 / 0.98
        assert!((p.x - 0.5 / 0.98).abs() < 1e-10);
        assert!((p.y - 0.1 / 0.98).abs() < 1e-10);
    }

    #[test]
    fn intersection_outside_intervals_is_rejected() {
        let v = vconst(5.0, iv(-1.0, 1.0));
        let h = LipschitzCurve::constant(Orientation::Horizontal, iv(-1.0, 1.0), 0.0).unwrap();
        assert!(matches!(curve_intersection(&v, &h), Err(Error::OutsideInterval(_))));
    }

    #[test]
    fn intersection_requires_contraction() {
        let i = iv(-1.0, 1.0);
        let v = LipschitzCurve::affine(Orientation::Vertical, i, 1.0, 0.0).unwrap();
        let h = LipschitzCurve::affine(Orientation::Horizontal, i, 1.0, 0.1).unwrap();
        assert!(matches!(curve_intersection(&v, &h), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            curve_intersection(&h, &v),
            Err(Error::OrientationMismatch(_))
        ));
    }

    #[test]
    fn full_intersection_cases() {
        let i = iv(-4.0, 4.0);
        let outer = vstrip(-1.0, 1.0, i);
        assert!(intersects_fully(&outer, &outer, 1e-12).unwrap());
        let inner = vstrip(-0.5, 0.25, i);
        assert!(intersects_fully(&inner, &outer, 1e-12).unwrap());
        // same boundaries but a shorter y-extent: the end segments float inside
        let shifted = vstrip(-0.5, 0.25, iv(-3.0, 3.5));
        assert!(!intersects_fully(&shifted, &outer, 1e-12).unwrap());
        let wider = vstrip(-2.0, 0.0, i);
        assert!(!intersects_fully(&wider, &outer, 1e-12).unwrap());
        let h = Strip::new(
            LipschitzCurve::constant(Orientation::Horizontal, i, 0.0).unwrap(),
            LipschitzCurve::constant(Orientation::Horizontal, i, 1.0).unwrap(),
        )
        .unwrap();
        assert!(intersects_fully(&h, &outer, 1e-12).is_err());
    }

    #[test]
    fn nested_limit_of_symmetric_shrink() {
        let i = iv(-4.0, 4.0);
        let strips: Vec<Strip> = (1..=20)
            .map(|k| {
                let w = 2f64.powi(-k);
                vstrip(-w, w, i)
            })
            .collect();
        let lim = nested_limit(&strips).unwrap();
        assert!((lim.error_bound - 2.0 * 2f64.powi(-20)).abs() < 1e-18);
        for t in i.linspace(11) {
            assert!(lim.curve.eval(t).abs() < 1e-15);
        }
    }

    #[test]
    fn nested_limit_single_strip() {
        let s = vstrip(0.0, 0.5, iv(0.0, 1.0));
        let lim = nested_limit(std::slice::from_ref(&s)).unwrap();
        assert_eq!(lim.error_bound, 0.5);
        assert_eq!(lim.curve.eval(0.3), 0.25);
    }

    #[test]
    fn nested_limit_detects_violation() {
        let i = iv(0.0, 1.0);
        let strips = vec![vstrip(0.0, 0.5, i), vstrip(0.4, 0.6, i)];
        assert!(matches!(
            nested_limit(&strips),
            Err(Error::NestingViolation { index: 1, .. })
        ));
        assert!(nested_limit(&[]).is_err());
    }

    #[test]
    fn curves_serialize_with_named_forms() {
        let c = LipschitzCurve::sqrt_branch(Orientation::Horizontal, iv(-1.0, 1.0), 3.0, -1.0).unwrap();
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["orientation"], "horizontal");
        assert_eq!(json["shape"]["kind"], "sqrt_branch");
        assert_eq!(json["shape"]["offset"], 3.0);
        let back: LipschitzCurve = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn distance_to_end_segments() {
        let s = vstrip(0.0, 1.0, iv(-1.0, 1.0));
        assert_eq!(s.distance_to_end_segments(Point2::new(0.5, 1.0)), 0.0);
        assert!((s.distance_to_end_segments(Point2::new(0.5, 0.75)) - 0.25).abs() < 1e-15);
        assert!((s.distance_to_end_segments(Point2::new(1.5, -1.0)) - 0.5).abs() < 1e-15);
    }
}
