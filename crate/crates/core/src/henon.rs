//! Strips, key points and the prerequisite inequalities for the
//! nonautonomous Hénon family on the square `[-R, R]²`.
//!
//! With `A = A(n)`:
//!
//! * `V_1^n = { |y| ≤ R, sqrt(A - R - y) ≤ x ≤ sqrt(A + R - y) }`, `V_2^n` its mirror in `x`;
//! * `H_1^{n+1} = f_n(V_1^n) = { |x| ≤ R, sqrt(A - R - x) ≤ y ≤ sqrt(A + R - x) }`, `H_2` its mirror in `y`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DomainBox, Interval, LipschitzCurve, Orientation, Strip};
use crate::layout::{StripLayout, Symbol};
use crate::map::{HenonParams, HenonSequence, MapSequence, Point2};

/// Default sector aperture for both cone families.
pub const DEFAULT_MU: f64 = 0.615;

/// Membership tolerance for boundary tests.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Threshold `½(μ + 1/μ)`: points with `|y| > threshold` keep the stable sector.
pub fn sector_threshold(mu: f64) -> f64 {
    0.5 * (mu + 1.0 / mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HenonGeometry {
    pub params: HenonParams,
    pub r: f64,
    pub mu_h: f64,
    pub mu_v: f64,
}

/// Validates the parameters and builds the geometry with `μh = μv = 0.615`.
///
/// Fails when `inf_n A(n) ≤ 2R`, where the inner parabolas leave the square.
pub fn build_geometry(params: HenonParams) -> Result<HenonGeometry> {
    params.validate()?;
    let r = params.radius();
    let gap = params.a_inf() - 2.0 * r;
    if gap <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "A(n) - 2R = {gap:.6} <= 0 for some n (inf A(n) = {}, 2R = {})",
            params.a_inf(),
            2.0 * r
        )));
    }
    Ok(HenonGeometry {
        params,
        r,
        mu_h: DEFAULT_MU,
        mu_v: DEFAULT_MU,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyPoints {
    pub p: [Point2; 6],
    pub q: [Point2; 6],
}

impl HenonGeometry {
    pub fn with_cones(mut self, mu_h: f64, mu_v: f64) -> Result<Self> {
        if !(mu_h > 0.0 && mu_v > 0.0 && mu_h.is_finite() && mu_v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sector apertures must be positive, got ({mu_h}, {mu_v})"
            )));
        }
        self.mu_h = mu_h;
        self.mu_v = mu_v;
        Ok(self)
    }

    pub fn a(&self, n: i64) -> f64 {
        self.params.eval_a(n)
    }

    pub fn domain_box(&self) -> DomainBox {
        DomainBox::square(self.r)
    }

    pub fn sequence(&self) -> HenonSequence {
        HenonSequence::new(self.params).expect("validated at build")
    }

    /// Largest boundary slope of any strip at time `n`, `1/(2 sqrt(A(n) - 2R))`.
    pub fn slope_bound(&self, n: i64) -> f64 {
        0.5 / (self.a(n) - 2.0 * self.r).sqrt()
    }

    /// The same bound over all times.
    pub fn global_slope_bound(&self) -> f64 {
        0.5 / (self.params.a_inf() - 2.0 * self.r).sqrt()
    }

    fn pair(&self, orientation: Orientation, a: f64, s: Symbol) -> Option<Strip> {
        let iv = Interval::symmetric(self.r);
        let inner = a - self.r;
        let outer = a + self.r;
        let (lo, hi) = match s {
            1 => (
                LipschitzCurve::sqrt_branch(orientation, iv, inner, 1.0),
                LipschitzCurve::sqrt_branch(orientation, iv, outer, 1.0),
            ),
            2 => (
                LipschitzCurve::sqrt_branch(orientation, iv, outer, -1.0),
                LipschitzCurve::sqrt_branch(orientation, iv, inner, -1.0),
            ),
            _ => return None,
        };
        Strip::new(lo.ok()?, hi.ok()?).ok()
    }

    /// `[V_1^n, V_2^n]`.
    pub fn v_strips(&self, n: i64) -> [Strip; 2] {
        [1, 2].map(|s| self.pair(Orientation::Vertical, self.a(n), s).expect("valid geometry"))
    }

    /// `[H_1^{n+1}, H_2^{n+1}]`.
    pub fn h_strips(&self, n: i64) -> [Strip; 2] {
        [1, 2].map(|s| self.pair(Orientation::Horizontal, self.a(n), s).expect("valid geometry"))
    }

    pub fn key_points(&self, n: i64) -> KeyPoints {
        key_points(&self.params, n)
    }

    /// Images of the four sides of the square under `f_n` (`forward = true`)
    /// or `f_n^{-1}`, as one closed polyline with `samples` points per side.
    pub fn domain_image(&self, n: i64, samples: usize, forward: bool) -> Vec<Point2> {
        let seq = self.sequence();
        let r = self.r;
        let corners = [
            Point2::new(-r, r),
            Point2::new(r, r),
            Point2::new(r, -r),
            Point2::new(-r, -r),
        ];
        let mut pts = Vec::with_capacity(4 * samples);
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for i in 0..samples {
                let t = i as f64 / samples as f64;
                let p = a + (b - a) * t;
                pts.push(if forward { seq.forward(n, p) } else { seq.inverse(n, p) });
            }
        }
        pts
    }

    fn band_symbol(&self, a: f64, along: f64, across: f64, tol: f64) -> Option<Symbol> {
        if along.abs() > self.r + tol {
            return None;
        }
        let lo = (a - self.r - along).max(0.0).sqrt();
        let hi = (a + self.r - along).max(0.0).sqrt();
        let m = across.abs();
        if m >= lo - tol && m <= hi + tol {
            Some(if across >= 0.0 { 1 } else { 2 })
        } else {
            None
        }
    }
}

impl StripLayout for HenonGeometry {
    fn n_symbols(&self) -> usize {
        2
    }

    fn domain(&self, _n: i64) -> DomainBox {
        self.domain_box()
    }

    fn mu_h(&self) -> f64 {
        self.mu_h
    }

    fn mu_v(&self) -> f64 {
        self.mu_v
    }

    fn vertical_strip(&self, n: i64, s: Symbol) -> Option<Strip> {
        self.pair(Orientation::Vertical, self.a(n), s)
    }

    fn horizontal_strip(&self, n: i64, s: Symbol) -> Option<Strip> {
        self.pair(Orientation::Horizontal, self.a(n), s)
    }

    fn vertical_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        self.band_symbol(self.a(n), p.y, p.x, tol)
    }

    fn horizontal_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        self.band_symbol(self.a(n), p.x, p.y, tol)
    }
}

pub fn key_points(params: &HenonParams, n: i64) -> KeyPoints {
    let a = params.eval_a(n);
    let r = params.radius();
    let r2 = r * r;
    KeyPoints {
        p: [
            Point2::new(a + r, 0.0),
            Point2::new(a - r, 0.0),
            Point2::new(a + r - r2, -r),
            Point2::new(a - r - r2, -r),
            Point2::new(a - r - r2, r),
            Point2::new(a + r - r2, r),
        ],
        q: [
            Point2::new(0.0, a + r),
            Point2::new(0.0, a - r),
            Point2::new(r, a + r - r2),
            Point2::new(r, a - r - r2),
            Point2::new(-r, a - r - r2),
            Point2::new(-r, a + r - r2),
        ],
    }
}

/// One checked inequality `lhs < rhs` (or `lhs ≤ rhs + tol`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRow {
    /// Time index, or `None` for a bound that covers every `n`.
    pub n: Option<i64>,
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl InequalityRow {
    pub fn less(n: Option<i64>, id: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        InequalityRow {
            n,
            id: id.into(),
            lhs,
            rhs,
            margin,
            pass: margin > 0.0,
        }
    }

    pub fn less_eq(n: Option<i64>, id: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        InequalityRow {
            n,
            id: id.into(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tol,
        }
    }

    pub fn describe(&self) -> String {
        let when = self.n.map_or_else(|| "all n".to_string(), |n| format!("n={n}"));
        format!(
            "{} at {when}: lhs {:.6} vs rhs {:.6} (margin {:.3e})",
            self.id, self.lhs, self.rhs, self.margin
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
}

impl InequalityReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn extend(&mut self, other: InequalityReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,id,lhs,rhs,margin,pass\n");
        for r in &self.rows {
            let n = r.n.map_or_else(|| "all".to_string(), |n| n.to_string());
            out.push_str(&format!(
                "{n},{},{:.16e},{:.16e},{:.16e},{}\n",
                r.id, r.lhs, r.rhs, r.margin, r.pass
            ));
        }
        out
    }
}

/// `A(n) > 2R`, `A(n) + R - R² ≤ -R` and that the outer key points leave the square.
///
/// Takes the parameters rather than a geometry so that it can report on
/// parameters for which no geometry exists.
pub fn check_domain_inequalities(params: &HenonParams, n_range: std::ops::RangeInclusive<i64>) -> InequalityReport {
    let r = params.radius();
    let mut rows = vec![InequalityRow::less(None, "inf A(n) > 2R", 2.0 * r, params.a_inf())];
    for n in n_range {
        let a = params.eval_a(n);
        rows.push(InequalityRow::less(Some(n), "A(n) > 2R", 2.0 * r, a));
        rows.push(InequalityRow::less_eq(
            Some(n),
            "A(n) + R - R^2 <= -R",
            a + r - r * r,
            -r,
            1e-12,
        ));
        let kp = key_points(params, n);
        let outside = [
            ("p1", kp.p[0]),
            ("p2", kp.p[1]),
            ("p4", kp.p[3]),
            ("p5", kp.p[4]),
            ("q1", kp.q[0]),
            ("q2", kp.q[1]),
            ("q4", kp.q[3]),
            ("q5", kp.q[4]),
        ];
        for (name, p) in outside {
            rows.push(InequalityRow::less(
                Some(n),
                format!("{name} outside D"),
                r,
                p.max_abs(),
            ));
        }
    }
    InequalityReport { rows }
}

/// Crossings of the lines `y = ±τ` with the strip boundaries at time `n`,
/// `τ = ½(μv + 1/μv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationPoints {
    pub tau: f64,
    /// `sqrt(A(n+1) + R - τ)`, outer vertical boundary at `y = τ`.
    pub xbar1: f64,
    /// `sqrt(A(n+1) + R + τ)`, outer vertical boundary at `y = -τ`.
    pub xbar2: f64,
    /// `A(n) - R - τ²`, inner horizontal boundary at `|y| = τ`.
    pub x1: f64,
    pub x2: f64,
}

pub fn separation_points(params: &HenonParams, mu_v: f64, n: i64) -> SeparationPoints {
    let tau = sector_threshold(mu_v);
    let r = params.radius();
    let a_next = params.eval_a(n + 1);
    let x = params.eval_a(n) - r - tau * tau;
    SeparationPoints {
        tau,
        xbar1: (a_next + r - tau).sqrt(),
        xbar2: (a_next + r + tau).sqrt(),
        x1: x,
        x2: x,
    }
}

/// Bounds on the separation points valid for every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationBounds {
    pub tau: f64,
    /// `sqrt(A* + ε + R + τ)`.
    pub xbar2_sup: f64,
    /// `A* - ε - R - τ²`.
    pub x2_inf: f64,
    /// Upper bound on `d xbar2 / dA*` for this and any larger `A*`.
    pub dxbar2_bound: f64,
    /// Lower bound on `d x2 / dA*` for this and any larger `A*`.
    pub dx2_bound: f64,
}

pub fn separation_bounds(params: &HenonParams, mu_v: f64) -> SeparationBounds {
    let tau = sector_threshold(mu_v);
    let r = params.radius();
    let low = 1.0 + params.a_inf();
    let xbar2_low = (low + low.sqrt() + tau).sqrt();
    SeparationBounds {
        tau,
        xbar2_sup: (params.a_sup() + r + tau).sqrt(),
        x2_inf: params.a_inf() - r - tau * tau,
        dxbar2_bound: (1.0 + 0.5 / low.sqrt()) / (2.0 * xbar2_low),
        dx2_bound: 1.0 - 0.5 / low.sqrt(),
    }
}

fn with_a_star(params: &HenonParams, a_star: f64) -> HenonParams {
    HenonParams { a_star, ..*params }
}

/// Orders the separation points at time `n` and checks the derivative
/// comparison that carries the ordering to larger `A*`.
pub fn strip_separation_check(params: &HenonParams, mu_v: f64, n: i64) -> InequalityReport {
    let sp = separation_points(params, mu_v, n);
    let r = params.radius();
    let b = separation_bounds(params, mu_v);
    let h = 1e-6;
    let fd = |f: &dyn Fn(&HenonParams) -> f64| {
        (f(&with_a_star(params, params.a_star + h)) - f(&with_a_star(params, params.a_star - h))) / (2.0 * h)
    };
    let dxbar2 = fd(&|p| separation_points(p, mu_v, n).xbar2);
    let dx2 = fd(&|p| separation_points(p, mu_v, n).x2);
    let rows = vec![
        InequalityRow::less(Some(n), "xbar1 < xbar2", sp.xbar1, sp.xbar2),
        InequalityRow::less(Some(n), "xbar2 < x2", sp.xbar2, sp.x2),
        InequalityRow::less(Some(n), "x2 < R", sp.x2, r),
        InequalityRow::less(None, "sup xbar2 < inf x2", b.xbar2_sup, b.x2_inf),
        InequalityRow::less_eq(Some(n), "d xbar2/dA* <= bound", dxbar2, b.dxbar2_bound, 1e-9),
        InequalityRow::less_eq(Some(n), "d x2/dA* >= bound", b.dx2_bound, dx2, 1e-9),
        InequalityRow::less(None, "d xbar2/dA* bound < d x2/dA* bound", b.dxbar2_bound, b.dx2_bound),
    ];
    InequalityReport { rows }
}
