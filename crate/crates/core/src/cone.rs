//! Hyperbolicity checks on strip layouts.
//!
//! * strip mapping: `H_i^{n+1} ∩ V_j^{n+1}` is a horizontal strip crossing
//!   `V_j^{n+1}`, the map is injective on the preimage, and the horizontal
//!   boundary pulls back onto the end segments of `V_i^n`;
//! * sector bundles: `Df_n` keeps `|η| ≤ μh|ξ|` on `𝒱^n` and expands `ξ`,
//!   `Df_n^{-1}` keeps `|ξ| ≤ μv|η|` on `ℋ^{n+1}` and expands `η`;
//! * the width contraction that follows from the two, both as a bound and
//!   as measured on refined strips.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curve_intersection, intersect_graphs, strip_width, LipschitzCurve, Strip};
use crate::henon::sector_threshold;
use crate::layout::{StripLayout, Symbol};
use crate::map::{MapSequence, Point2, TangentVector};
use crate::symbolic::{intersection_witness, Refiner, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeParams {
    pub mu_h: f64,
    pub mu_v: f64,
    /// Reciprocal of the required expansion.
    pub mu: f64,
}

impl ConeParams {
    pub fn new(mu_h: f64, mu_v: f64, mu: f64) -> Result<Self> {
        let finite = mu_h.is_finite() && mu_v.is_finite() && mu.is_finite();
        if !finite || mu_h <= 0.0 || mu_v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sector apertures must be positive and finite, got ({mu_h}, {mu_v})"
            )));
        }
        if mu_h * mu_v >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mu_h * mu_v = {} must be below 1",
                mu_h * mu_v
            )));
        }
        if mu <= 0.0 {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        Ok(ConeParams { mu_h, mu_v, mu })
    }

    /// `μh = μv = 0.615`, `μ = 0.618`.
    pub fn reference() -> Self {
        ConeParams {
            mu_h: 0.615,
            mu_v: 0.615,
            mu: 0.618,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `Df_n` acting on `|η| ≤ μh|ξ|` at a point of `𝒱^n`.
    ForwardUnstable,
    /// `Df_n^{-1}` acting on `|ξ| ≤ μv|η|` at a point of `ℋ^{n+1}`.
    BackwardStable,
}

impl Direction {
    fn name(self) -> &'static str {
        match self {
            Direction::ForwardUnstable => "unstable",
            Direction::BackwardStable => "stable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorMargin {
    pub image: TangentVector,
    /// `μ_target·|dominant| − |other|` of the image; positive inside the sector.
    pub sector_margin: f64,
    /// `|dominant image component| / (|dominant source component| / μ)`; above 1 when expanding enough.
    pub expansion_ratio: f64,
}

impl SectorMargin {
    pub fn pass(&self) -> bool {
        self.sector_margin > 0.0 && self.expansion_ratio > 1.0
    }
}

/// Applies the relevant Jacobian to one sector vector at `z0`.
///
/// For the forward check `z0` is a point at time `n`, for the backward check
/// a point at time `n + 1`. Only the source-sector condition on `v` is
/// enforced here; see [`check_sector_in_region`] for the region condition.
pub fn check_sector_point(
    seq: &dyn MapSequence,
    n: i64,
    z0: Point2,
    v: TangentVector,
    params: &ConeParams,
    direction: Direction,
) -> Result<SectorMargin> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let slack = 1e-12 * v.xi.abs().max(v.eta.abs());
    match direction {
        Direction::ForwardUnstable => {
            if v.eta.abs() > params.mu_h * v.xi.abs() + slack {
                return Err(Error::VectorOutsideSector {
                    xi: v.xi,
                    eta: v.eta,
                    sector: direction.name(),
                });
            }
            let image = seq.jacobian_fwd(n, z0).apply(v);
            Ok(SectorMargin {
                image,
                sector_margin: params.mu_h * image.xi.abs() - image.eta.abs(),
                expansion_ratio: params.mu * image.xi.abs() / v.xi.abs(),
            })
        }
        Direction::BackwardStable => {
            if v.xi.abs() > params.mu_v * v.eta.abs() + slack {
                return Err(Error::VectorOutsideSector {
                    xi: v.xi,
                    eta: v.eta,
                    sector: direction.name(),
                });
            }
            let image = seq.jacobian_inv(n, z0).apply(v);
            Ok(SectorMargin {
                image,
                sector_margin: params.mu_v * image.eta.abs() - image.xi.abs(),
                expansion_ratio: params.mu * image.eta.abs() / v.eta.abs(),
            })
        }
    }
}

/// [`check_sector_point`] after checking that `z0` lies in `𝒱^n` (forward)
/// or `ℋ^{n+1}` (backward).
#[allow(clippy::too_many_arguments)]
pub fn check_sector_in_region(
    layout: &dyn StripLayout,
    seq: &dyn MapSequence,
    n: i64,
    z0: Point2,
    v: TangentVector,
    params: &ConeParams,
    direction: Direction,
    tol: f64,
) -> Result<SectorMargin> {
    let in_cal_h = |z: Point2| {
        layout.horizontal_symbol(n, z, tol).is_some() && layout.vertical_symbol(n + 1, z, tol).is_some()
    };
    let inside = match direction {
        Direction::ForwardUnstable => {
            layout.vertical_symbol(n, z0, tol).is_some() && in_cal_h(seq.forward(n, z0))
        }
        Direction::BackwardStable => in_cal_h(z0),
    };
    if !inside {
        let region = match direction {
            Direction::ForwardUnstable => "preimage of the strip intersections",
            Direction::BackwardStable => "strip intersections",
        };
        return Err(Error::PointOutsideRegion(z0, region));
    }
    check_sector_point(seq, n, z0, v, params, direction)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeFailure {
    pub point: Point2,
    pub vector: TangentVector,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub n: i64,
    pub grid: usize,
    pub worst_sector_margin: f64,
    pub worst_expansion_ratio: f64,
    pub worst_stable_margin: f64,
    pub worst_unstable_margin: f64,
    /// Smallest `|y|` over `ℋ^{n+1}`, from the corners of its pieces.
    pub analytic_min_abs_y: f64,
    /// Smallest `|x|` over `𝒱^n`, from the preimages of those corners.
    pub analytic_min_abs_x: f64,
    pub grid_min_abs_y: f64,
    pub grid_min_abs_x: f64,
    /// `½(μv + 1/μv)` and `½(μh + 1/μh)`.
    pub threshold_y: f64,
    pub threshold_x: f64,
    pub analytic_pass: bool,
    pub points_checked: usize,
    pub failure_count: usize,
    /// The first few failures, in grid order.
    pub failures: Vec<ConeFailure>,
    pub pass: bool,
}

const MAX_LISTED_FAILURES: usize = 32;

struct Accum {
    stable: f64,
    unstable: f64,
    expansion: f64,
    min_y: f64,
    min_x: f64,
    count: usize,
    failure_count: usize,
    failures: Vec<ConeFailure>,
}

impl Accum {
    fn new() -> Self {
        Accum {
            stable: f64::INFINITY,
            unstable: f64::INFINITY,
            expansion: f64::INFINITY,
            min_y: f64::INFINITY,
            min_x: f64::INFINITY,
            count: 0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    fn merge(mut self, o: Accum) -> Accum {
        self.stable = self.stable.min(o.stable);
        self.unstable = self.unstable.min(o.unstable);
        self.expansion = self.expansion.min(o.expansion);
        self.min_y = self.min_y.min(o.min_y);
        self.min_x = self.min_x.min(o.min_x);
        self.count += o.count;
        self.failure_count += o.failure_count;
        let room = MAX_LISTED_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(o.failures.into_iter().take(room));
        self
    }

    fn record(&mut self, z: Point2, v: TangentVector, m: &SectorMargin, dir: Direction) {
        match dir {
            Direction::BackwardStable => self.stable = self.stable.min(m.sector_margin),
            Direction::ForwardUnstable => self.unstable = self.unstable.min(m.sector_margin),
        }
        self.expansion = self.expansion.min(m.expansion_ratio);
        if !m.pass() {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                let reason = if m.sector_margin <= 0.0 {
                    format!("{} sector not preserved (margin {:.3e})", dir.name(), m.sector_margin)
                } else {
                    format!("{} expansion ratio {:.6} not above 1", dir.name(), m.expansion_ratio)
                };
                self.failures.push(ConeFailure {
                    point: z,
                    vector: v,
                    reason,
                });
            }
        }
    }
}

/// A point of `H ∩ V` at fractions `(s, t)` across the vertical and horizontal strip.
fn lattice_point(h: &Strip, v: &Strip, s: f64, t: f64) -> Result<Point2> {
    let vx = |y: f64| v.interpolated_value(y, s);
    let hy = |x: f64| h.interpolated_value(x, t);
    let y0 = hy(vx(v.interval().mid()));
    intersect_graphs(vx, hy, y0, Default::default()).map(|(p, _)| p)
}

fn corner_points(h: &Strip, v: &Strip) -> Vec<Point2> {
    let mut out = Vec::with_capacity(4);
    for hc in [&h.lower, &h.upper] {
        for vc in [&v.lower, &v.upper] {
            if let Ok(p) = curve_intersection(vc, hc) {
                out.push(p);
            }
        }
    }
    out
}

/// Sweeps a `grid × grid` lattice over every piece of `ℋ^{n+1}` and its
/// preimage in `𝒱^n`, testing the two extremal rays of each sector.
pub fn check_a3_grid(
    seq: &dyn MapSequence,
    layout: &dyn StripLayout,
    n: i64,
    grid: usize,
    params: &ConeParams,
) -> Result<ConeReport> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!("grid must be at least 2, got {grid}")));
    }
    let mut pieces = Vec::new();
    for i in layout.symbols() {
        for j in layout.symbols() {
            let (Some(h), Some(v)) = (layout.horizontal_strip(n, i), layout.vertical_strip(n + 1, j)) else {
                continue;
            };
            if intersection_witness(&h, &v).is_some() {
                pieces.push((h, v));
            }
        }
    }
    if pieces.is_empty() {
        return Err(Error::DegenerateGeometry(format!(
            "no horizontal strip meets a vertical strip at time {}",
            n + 1
        )));
    }

    let stable_rays = [
        TangentVector::new(params.mu_v, 1.0),
        TangentVector::new(-params.mu_v, 1.0),
    ];
    let unstable_rays = [
        TangentVector::new(1.0, params.mu_h),
        TangentVector::new(1.0, -params.mu_h),
    ];
    let frac = |k: usize| k as f64 / (grid - 1) as f64;

    let mut acc = Accum::new();
    for (h, v) in &pieces {
        let part = (0..grid)
            .into_par_iter()
            .map(|a| -> Result<Accum> {
                let mut acc = Accum::new();
                for b in 0..grid {
                    let z = lattice_point(h, v, frac(a), frac(b))?;
                    let w = seq.inverse(n, z);
                    acc.count += 1;
                    acc.min_y = acc.min_y.min(z.y.abs());
                    acc.min_x = acc.min_x.min(w.x.abs());
                    for ray in stable_rays {
                        let m = check_sector_point(seq, n, z, ray, params, Direction::BackwardStable)?;
                        acc.record(z, ray, &m, Direction::BackwardStable);
                    }
                    for ray in unstable_rays {
                        let m = check_sector_point(seq, n, w, ray, params, Direction::ForwardUnstable)?;
                        acc.record(w, ray, &m, Direction::ForwardUnstable);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<Accum>>>()?
            .into_iter()
            .fold(Accum::new(), Accum::merge);
        acc = acc.merge(part);
    }

    let corners: Vec<Point2> = pieces.iter().flat_map(|(h, v)| corner_points(h, v)).collect();
    let analytic_min_abs_y = corners.iter().map(|p| p.y.abs()).fold(f64::INFINITY, f64::min);
    let analytic_min_abs_x = corners
        .iter()
        .map(|&p| seq.inverse(n, p).x.abs())
        .fold(f64::INFINITY, f64::min);
    let threshold_y = sector_threshold(params.mu_v);
    let threshold_x = sector_threshold(params.mu_h);
    let worst_sector_margin = acc.stable.min(acc.unstable);
    let pass = worst_sector_margin > 0.0 && acc.expansion > 1.0;
    Ok(ConeReport {
        n,
        grid,
        worst_sector_margin,
        worst_expansion_ratio: acc.expansion,
        worst_stable_margin: acc.stable,
        worst_unstable_margin: acc.unstable,
        analytic_min_abs_y,
        analytic_min_abs_x,
        grid_min_abs_y: acc.min_y,
        grid_min_abs_x: acc.min_x,
        threshold_y,
        threshold_x,
        analytic_pass: analytic_min_abs_y > threshold_y && analytic_min_abs_x > threshold_x,
        points_checked: acc.count,
        failure_count: acc.failure_count,
        failures: acc.failures,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Pair {
    /// Horizontal strip `H_i^{n+1}`.
    pub i: Symbol,
    /// Vertical strip `V_j^{n+1}`.
    pub j: Symbol,
    pub nonempty: bool,
    /// Crossings of the horizontal boundaries of `H_i` with the vertical boundaries of `V_j`.
    pub crossings: usize,
    /// Largest slope of the horizontal boundaries (declared or sampled).
    pub horizontal_slope: f64,
    pub injective: bool,
    /// Largest distance from a pulled-back horizontal boundary point to the end segments of `V_i^n`.
    pub boundary_distance: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Report {
    pub n: i64,
    pub samples: usize,
    pub pairs: Vec<A1Pair>,
    /// How injectivity is established.
    pub injectivity_basis: String,
    pub pass: bool,
}

/// Tolerance on the boundary pullback distance.
pub const BOUNDARY_PULLBACK_TOL: f64 = 1e-8;

fn count_crossings(h: &LipschitzCurve, v: &LipschitzCurve) -> usize {
    let phi = |x: f64| x - v.eval(h.eval(x));
    let mut count = 0;
    let mut prev = phi(h.interval.lo);
    if prev == 0.0 {
        count += 1;
    }
    for x in h.interval.linspace(4097).skip(1) {
        let cur = phi(x);
        if cur == 0.0 || (prev != 0.0 && (cur > 0.0) != (prev > 0.0)) {
            count += 1;
        }
        prev = cur;
    }
    count
}

fn max_adjacent_secant(c: &LipschitzCurve, samples: usize) -> f64 {
    let pts: Vec<(f64, f64)> = c.interval.linspace(samples).map(|t| (t, c.eval(t))).collect();
    pts.windows(2)
        .map(|w| (w[1].1 - w[0].1).abs() / (w[1].0 - w[0].0))
        .fold(0.0, f64::max)
}

/// Looks for two lattice points far apart whose images nearly coincide.
fn injective_on(points: &[Point2], images: &[Point2]) -> bool {
    let mut order: Vec<usize> = (0..images.len()).collect();
    order.sort_by(|&a, &b| images[a].x.total_cmp(&images[b].x));
    let close = 1e-9;
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if images[b].x - images[a].x > close {
                break;
            }
            if images[a].dist(images[b]) <= close && points[a].dist(points[b]) > 1e-6 {
                return false;
            }
        }
    }
    true
}

/// Checks the strip-mapping condition for every pair `(i, j)` at time `n`.
pub fn check_a1(seq: &dyn MapSequence, layout: &dyn StripLayout, n: i64, samples: usize) -> A1Report {
    let samples = samples.max(2);
    let mu_h = layout.mu_h();
    let side = (samples as f64).sqrt().ceil() as usize + 1;
    let pairs: Vec<A1Pair> = layout
        .symbols()
        .flat_map(|i| layout.symbols().map(move |j| (i, j)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| {
            let mut failures = Vec::new();
            let h = layout.horizontal_strip(n, i);
            let v_next = layout.vertical_strip(n + 1, j);
            let v_now = layout.vertical_strip(n, i);
            let (Some(h), Some(v_next), Some(v_now)) = (h, v_next, v_now) else {
                return A1Pair {
                    i,
                    j,
                    nonempty: false,
                    crossings: 0,
                    horizontal_slope: f64::NAN,
                    injective: false,
                    boundary_distance: f64::INFINITY,
                    pass: false,
                    failures: vec!["strip missing".into()],
                };
            };
            let nonempty = intersection_witness(&h, &v_next).is_some();
            if !nonempty {
                failures.push(format!("H_{i} ∩ V_{j} is empty"));
            }
            let mut crossings = 0;
            for hc in [&h.lower, &h.upper] {
                for vc in [&v_next.lower, &v_next.upper] {
                    crossings += count_crossings(hc, vc);
                }
            }
            if crossings != 4 {
                failures.push(format!("{crossings} boundary crossings instead of 4"));
            }
            let horizontal_slope = [&h.lower, &h.upper]
                .iter()
                .map(|c| c.lipschitz_bound.max(max_adjacent_secant(c, 1025)))
                .fold(0.0, f64::max);
            if horizontal_slope > mu_h {
                failures.push(format!(
                    "horizontal boundary slope {horizontal_slope:.6} exceeds mu_h = {mu_h}"
                ));
            }

            // injectivity on the part of V_i^n that lands in V_j^{n+1}
            let mut pts = Vec::new();
            let mut imgs = Vec::new();
            let iv = v_now.interval();
            for a in 0..side {
                let t = iv.lerp(a as f64 / (side - 1) as f64);
                for b in 0..side {
                    let p = v_now.point_at(t, b as f64 / (side - 1) as f64);
                    let q = seq.forward(n, p);
                    if v_next.contains(q, 0.0) {
                        pts.push(p);
                        imgs.push(q);
                    }
                }
            }
            let injective = injective_on(&pts, &imgs);
            if !injective {
                failures.push("two distinct sample points share an image".into());
            }

            // horizontal boundary of H_ij pulled back onto the ends of V_i^n
            let mut boundary_distance: f64 = 0.0;
            for hc in [&h.lower, &h.upper] {
                let ends: Vec<f64> = [&v_next.lower, &v_next.upper]
                    .iter()
                    .filter_map(|vc| curve_intersection(vc, hc).ok())
                    .map(|p| p.x)
                    .collect();
                if ends.len() != 2 {
                    boundary_distance = f64::INFINITY;
                    continue;
                }
                let (lo, hi) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
                for k in 0..samples {
                    let x = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
                    let p = seq.inverse(n, hc.point_at(x));
                    boundary_distance = boundary_distance.max(v_now.distance_to_end_segments(p));
                }
            }
            if !(boundary_distance <= BOUNDARY_PULLBACK_TOL) {
                failures.push(format!(
                    "horizontal boundary pulls back {boundary_distance:.3e} away from the ends of V_{i}"
                ));
            }
            A1Pair {
                i,
                j,
                nonempty,
                crossings,
                horizontal_slope,
                injective,
                boundary_distance,
                pass: failures.is_empty(),
                failures,
            }
        })
        .collect();
    let injectivity_basis = if seq.globally_invertible() {
        "closed-form inverse (the map is a bijection of the plane); lattice sample agrees".to_string()
    } else {
        format!("sampled on a {side}x{side} lattice only")
    };
    let pass = pairs.iter().all(|p| p.pass);
    A1Report {
        n,
        samples,
        pairs,
        injectivity_basis,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionBounds {
    pub nu_v: f64,
    pub nu_h: f64,
}

/// `ν = μ / (1 − μh·μv)`, valid when `μv < μ < 1 − μh·μv`.
pub fn derive_contraction(params: &ConeParams) -> Result<ContractionBounds> {
    let limit = 1.0 - params.mu_h * params.mu_v;
    if !(params.mu > params.mu_v) {
        return Err(Error::ContractionHypotheses(format!(
            "mu = {} must exceed mu_v = {} (mu_v < mu < 1 - mu_h*mu_v)",
            params.mu, params.mu_v
        )));
    }
    if !(params.mu < limit) {
        return Err(Error::ContractionHypotheses(format!(
            "mu = {} must be below 1 - mu_h*mu_v = {limit} (mu_v < mu < 1 - mu_h*mu_v)",
            params.mu
        )));
    }
    let nu = params.mu / limit;
    Ok(ContractionBounds { nu_v: nu, nu_h: nu })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionMeasurement {
    pub n: i64,
    pub depth: usize,
    /// Largest `width(V(s·w) at m) / width(V(w) at m+1)` per refinement round.
    pub vertical_ratios: Vec<f64>,
    /// Largest `width(H(w·s) at m+1) / width(H(w) at m)` per refinement round.
    pub horizontal_ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Refines every admissible word for `depth` rounds in each direction and
/// records the worst width ratio per round.
pub fn measure_contraction(refiner: &Refiner<'_>, n: i64, depth: usize) -> Result<ContractionMeasurement> {
    let len = depth + 1;
    let vertical = refiner.vertical_levels(n, len)?;
    let horizontal = refiner.horizontal_levels(n, len)?;
    let ratio_of = |levels: &[Tree], tail: bool| -> Vec<f64> {
        (1..levels.len())
            .map(|l| {
                levels[l]
                    .iter()
                    .filter_map(|(w, s)| {
                        let parent: Vec<Symbol> = if tail { w[1..].to_vec() } else { w[..w.len() - 1].to_vec() };
                        levels[l - 1].get(&parent).map(|p| strip_width(s) / strip_width(p))
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    let vertical_ratios = ratio_of(&vertical, true);
    let horizontal_ratios = ratio_of(&horizontal, false);
    let max_ratio = vertical_ratios
        .iter()
        .chain(&horizontal_ratios)
        .copied()
        .fold(0.0, f64::max);
    Ok(ContractionMeasurement {
        n,
        depth,
        vertical_ratios,
        horizontal_ratios,
        max_ratio,
    })
}
