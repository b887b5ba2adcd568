//! Nonautonomous planar map sequences.
//!
//! A [`MapSequence`] is a family of invertible C¹ maps `f_n`, one for every
//! integer time `n`, together with the Jacobians of `f_n` and `f_n^{-1}`.
//! The verification code only talks to this trait, so any family can be
//! plugged in. [`HenonSequence`] is the built-in instance:
//!
//! ```text
//! f_n(x, y)      = (A(n) - y - x², x)
//! f_n^{-1}(x, y) = (y, A(n) - x - y²)
//! A(n)           = A* + ε·cos(n)
//! ```

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainBox;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Chebyshev norm, the natural one for axis-aligned square domains.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Tangent vector `(ξ, η)` attached to some base point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TangentVector {
    pub xi: f64,
    pub eta: f64,
}

impl TangentVector {
    pub const fn new(xi: f64, eta: f64) -> Self {
        TangentVector { xi, eta }
    }

    pub fn is_zero(self) -> bool {
        self.xi == 0.0 && self.eta == 0.0
    }
}

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: TangentVector) -> TangentVector {
        let m = &self.0;
        TangentVector::new(
            m[0][0] * v.xi + m[0][1] * v.eta,
            m[1][0] * v.xi + m[1][1] * v.eta,
        )
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        worst
    }
}

/// A bi-infinite sequence of invertible planar maps `f_n: D_n -> D_{n+1}`.
///
/// Implementations must be pure: the same `(n, p)` always yields the same
/// value, and evaluation is safe from many threads at once.
pub trait MapSequence: Send + Sync {
    fn forward(&self, n: i64, p: Point2) -> Point2;

    /// Evaluates `f_n^{-1}`, which maps time `n + 1` back to time `n`.
    fn inverse(&self, n: i64, p: Point2) -> Point2;

    fn jacobian_fwd(&self, n: i64, p: Point2) -> Mat2;

    /// Jacobian of `f_n^{-1}` evaluated at a point of time `n + 1`.
    fn jacobian_inv(&self, n: i64, p: Point2) -> Mat2;

    fn domain(&self, n: i64) -> DomainBox;

    /// True when every `f_n` is a global diffeomorphism, so injectivity on
    /// strips holds by construction rather than by sampling.
    fn globally_invertible(&self) -> bool {
        false
    }
}

/// Parameters of the nonautonomous Hénon family `A(n) = A* + ε·cos(n)`, `B = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HenonParams {
    pub a_star: f64,
    pub epsilon: f64,
    pub b: f64,
}

impl HenonParams {
    /// Offset below which the construction is not claimed to verify.
    pub const VERIFIED_A_STAR: f64 = 9.5;

    pub fn new(a_star: f64, epsilon: f64) -> Result<Self> {
        let p = HenonParams {
            a_star,
            epsilon,
            b: -1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `A* = 9.5`, `ε = 0.1`.
    pub fn reference() -> Self {
        HenonParams {
            a_star: 9.5,
            epsilon: 0.1,
            b: -1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a_star.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "a_star must be finite, got {}",
                self.a_star
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        if self.b != -1.0 {
            return Err(Error::InvalidParameter(format!(
                "only b = -1 is supported, got {}",
                self.b
            )));
        }
        Ok(())
    }

    /// `A(n) = A* + ε·cos(n)`, cosine of the integer index in radians.
    pub fn eval_a(&self, n: i64) -> f64 {
        self.a_star + self.epsilon * (n as f64).cos()
    }

    /// `sup_n A(n) = A(0)`.
    pub fn a_sup(&self) -> f64 {
        self.a_star + self.epsilon
    }

    /// `inf_n A(n) = A* - ε` (approached, since cos of integers is dense in [-1, 1]).
    pub fn a_inf(&self) -> f64 {
        self.a_star - self.epsilon
    }

    /// Half-width of the square domain, `R = 1 + sqrt(1 + A(0))`.
    pub fn radius(&self) -> f64 {
        1.0 + (1.0 + self.a_sup()).sqrt()
    }
}

impl Default for HenonParams {
    fn default() -> Self {
        HenonParams::reference()
    }
}

/// Free-function form of [`HenonParams::eval_a`].
pub fn eval_a(params: &HenonParams, n: i64) -> f64 {
    params.eval_a(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonSequence {
    params: HenonParams,
    radius: f64,
}

impl HenonSequence {
    pub fn new(params: HenonParams) -> Result<Self> {
        params.validate()?;
        Ok(HenonSequence {
            params,
            radius: params.radius(),
        })
    }

    pub fn params(&self) -> &HenonParams {
        &self.params
    }

    pub fn a(&self, n: i64) -> f64 {
        self.params.eval_a(n)
    }
}

pub fn henon_sequence(params: HenonParams) -> Result<HenonSequence> {
    HenonSequence::new(params)
}

impl MapSequence for HenonSequence {
    fn forward(&self, n: i64, p: Point2) -> Point2 {
        Point2::new(self.a(n) - p.y - p.x * p.x, p.x)
    }

    fn inverse(&self, n: i64, p: Point2) -> Point2 {
        Point2::new(p.y, self.a(n) - p.x - p.y * p.y)
    }

    fn jacobian_fwd(&self, _n: i64, p: Point2) -> Mat2 {
        Mat2::new(-2.0 * p.x, -1.0, 1.0, 0.0)
    }

    fn jacobian_inv(&self, _n: i64, p: Point2) -> Mat2 {
        Mat2::new(0.0, 1.0, -1.0, -2.0 * p.y)
    }

    fn domain(&self, _n: i64) -> DomainBox {
        DomainBox::square(self.radius)
    }

    fn globally_invertible(&self) -> bool {
        true
    }
}

/// Central finite-difference Jacobian of `f_n` at `p`.
///
/// Kept as an independent cross-check of closed-form Jacobians.
pub fn jacobian_fd(seq: &dyn MapSequence, n: i64, p: Point2, h: f64) -> Result<Mat2> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonPositiveStep(h));
    }
    let dx = Point2::new(h, 0.0);
    let dy = Point2::new(0.0, h);
    let cx = (seq.forward(n, p + dx) - seq.forward(n, p - dx)) * (0.5 / h);
    let cy = (seq.forward(n, p + dy) - seq.forward(n, p - dy)) * (0.5 / h);
    Ok(Mat2::new(cx.x, cy.x, cx.y, cy.y))
}
