//! Piecewise-affine horseshoe on the unit square.
//!
//! Strip `i` is `V_i = [c_i, c_i + 1/λ] × [0, 1]`; on it the map is
//! `(x, y) ↦ (λ(x − c_i), c_i + y/λ)`, so `H_i = [0, 1] × [c_i, c_i + 1/λ]`.
//! Everything about it is solvable by hand, which makes it a good reference
//! for the generic machinery.

use crate::error::{Error, Result};
use crate::geometry::{DomainBox, Interval, LipschitzCurve, Orientation, Strip};
use crate::layout::{StripLayout, Symbol};
use crate::map::{Mat2, MapSequence, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineHorseshoe {
    lambda: f64,
    offsets: Vec<f64>,
    cone: f64,
}

impl AffineHorseshoe {
    pub fn new(lambda: f64, offsets: Vec<f64>) -> Result<Self> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("stretch factor {lambda} must exceed 1")));
        }
        if offsets.is_empty() {
            return Err(Error::InvalidParameter("at least one strip is required".into()));
        }
        let w = 1.0 / lambda;
        let mut prev_end = 0.0;
        for (i, &c) in offsets.iter().enumerate() {
            if c < prev_end - 1e-15 || c + w > 1.0 + 1e-15 {
                return Err(Error::InvalidParameter(format!(
                    "strip {} at offset {c} overlaps its neighbour or leaves the unit square",
                    i + 1
                )));
            }
            prev_end = c + w;
        }
        Ok(AffineHorseshoe {
            lambda,
            offsets,
            cone: 0.5,
        })
    }

    /// Two strips, stretch 3: fixed points at (0, 0) and (1, 1).
    pub fn two_strip() -> Self {
        Self::new(3.0, vec![0.0, 2.0 / 3.0]).expect("valid")
    }

    /// One centred strip, stretch 2: every refinement halves the width.
    pub fn halving() -> Self {
        Self::new(2.0, vec![0.25]).expect("valid")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Fixed point of branch `s`.
    pub fn fixed_point(&self, s: Symbol) -> Point2 {
        let c = self.offsets[s as usize - 1];
        let l = self.lambda;
        Point2::new(l * c / (l - 1.0), l * c / (l - 1.0))
    }

    fn branch(&self, t: f64) -> usize {
        let w = 1.0 / self.lambda;
        let dist = |c: f64| {
            if t < c {
                c - t
            } else if t > c + w {
                t - c - w
            } else {
                0.0
            }
        };
        let mut best = 0;
        for (i, &c) in self.offsets.iter().enumerate() {
            if dist(c) < dist(self.offsets[best]) {
                best = i;
            }
        }
        best
    }

    fn unit() -> Interval {
        Interval { lo: 0.0, hi: 1.0 }
    }

    fn band(&self, orientation: Orientation, s: Symbol) -> Option<Strip> {
        let c = *self.offsets.get((s as usize).checked_sub(1)?)?;
        let lo = LipschitzCurve::constant(orientation, Self::unit(), c).ok()?;
        let hi = LipschitzCurve::constant(orientation, Self::unit(), c + 1.0 / self.lambda).ok()?;
        Strip::new(lo, hi).ok()
    }
}

impl MapSequence for AffineHorseshoe {
    fn forward(&self, _n: i64, p: Point2) -> Point2 {
        let c = self.offsets[self.branch(p.x)];
        Point2::new(self.lambda * (p.x - c), c + p.y / self.lambda)
    }

    fn inverse(&self, _n: i64, p: Point2) -> Point2 {
        let c = self.offsets[self.branch(p.y)];
        Point2::new(c + p.x / self.lambda, self.lambda * (p.y - c))
    }

    fn jacobian_fwd(&self, _n: i64, _p: Point2) -> Mat2 {
        Mat2::new(self.lambda, 0.0, 0.0, 1.0 / self.lambda)
    }

    fn jacobian_inv(&self, _n: i64, _p: Point2) -> Mat2 {
        Mat2::new(1.0 / self.lambda, 0.0, 0.0, self.lambda)
    }

    fn domain(&self, _n: i64) -> DomainBox {
        DomainBox::new(Self::unit(), Self::unit())
    }
}

impl StripLayout for AffineHorseshoe {
    fn n_symbols(&self) -> usize {
        self.offsets.len()
    }

    fn domain(&self, _n: i64) -> DomainBox {
        DomainBox::new(Self::unit(), Self::unit())
    }

    fn mu_h(&self) -> f64 {
        self.cone
    }

    fn mu_v(&self) -> f64 {
        self.cone
    }

    fn vertical_strip(&self, _n: i64, s: Symbol) -> Option<Strip> {
        self.band(Orientation::Vertical, s)
    }

    fn horizontal_strip(&self, _n: i64, s: Symbol) -> Option<Strip> {
        self.band(Orientation::Horizontal, s)
    }

    fn vertical_symbol(&self, _n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        if !(-tol..=1.0 + tol).contains(&p.y) {
            return None;
        }
        let w = 1.0 / self.lambda;
        self.offsets
            .iter()
            .position(|&c| p.x >= c - tol && p.x <= c + w + tol)
            .map(|i| i as Symbol + 1)
    }

    fn horizontal_symbol(&self, _n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        if !(-tol..=1.0 + tol).contains(&p.x) {
            return None;
        }
        let w = 1.0 / self.lambda;
        self.offsets
            .iter()
            .position(|&c| p.y >= c - tol && p.y <= c + w + tol)
            .map(|i| i as Symbol + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlapping_strips() {
        assert!(AffineHorseshoe::new(3.0, vec![0.0, 0.2]).is_err());
        assert!(AffineHorseshoe::new(0.5, vec![0.0]).is_err());
        assert!(AffineHorseshoe::new(3.0, vec![0.8]).is_err());
    }

    #[test]
    fn strips_map_onto_strips() {
        let t = AffineHorseshoe::two_strip();
        for s in 1..=2 {
            let v = t.vertical_strip(0, s).unwrap();
            let h = t.horizontal_strip(0, s).unwrap();
            for i in 0..=10 {
                for j in 0..=10 {
                    let p = v.point_at(i as f64 / 10.0, j as f64 / 10.0);
                    let q = t.forward(0, p);
                    assert!(h.contains(q, 1e-12));
                    let back = t.inverse(0, q);
                    assert!(back.dist(p) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn fixed_points() {
        let t = AffineHorseshoe::two_strip();
        assert_eq!(t.fixed_point(1), Point2::new(0.0, 0.0));
        let p = t.fixed_point(2);
        assert!(p.dist(Point2::new(1.0, 1.0)) < 1e-15);
        assert!(t.forward(0, p).dist(p) < 1e-15);
    }
}
