//! The family of strips a map sequence is checked against.
//!
//! At every time `n` a layout provides the vertical strips `V_s^n` and the
//! horizontal strips `H_s^{n+1}`, where `H_s^{n+1}` is the image of `V_s^n`
//! under `f_n`. Symbols are 1-based.

use crate::geometry::{DomainBox, Strip};
use crate::map::Point2;

pub type Symbol = u8;

pub trait StripLayout: Send + Sync {
    fn n_symbols(&self) -> usize;

    fn domain(&self, n: i64) -> DomainBox;

    fn mu_h(&self) -> f64;

    fn mu_v(&self) -> f64;

    /// `V_s^n`, or `None` when the strip is absent at this time.
    fn vertical_strip(&self, n: i64, s: Symbol) -> Option<Strip>;

    /// `H_s^{n+1} = f_n(V_s^n)`; it lives at time `n + 1`.
    fn horizontal_strip(&self, n: i64, s: Symbol) -> Option<Strip>;

    /// Symbol of the vertical strip at time `n` containing `p`.
    /// Ties go to the smallest symbol.
    fn vertical_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        self.symbols()
            .find(|&s| self.vertical_strip(n, s).is_some_and(|v| v.contains(p, tol)))
    }

    /// Symbol of the horizontal strip `H_s^{n+1}` containing `p` (a point at time `n + 1`).
    fn horizontal_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        self.symbols()
            .find(|&s| self.horizontal_strip(n, s).is_some_and(|h| h.contains(p, tol)))
    }

    fn symbols(&self) -> std::ops::RangeInclusive<Symbol> {
        1..=self.n_symbols() as Symbol
    }
}

impl<L: StripLayout + ?Sized> StripLayout for &L {
    fn n_symbols(&self) -> usize {
        (**self).n_symbols()
    }
    fn domain(&self, n: i64) -> DomainBox {
        (**self).domain(n)
    }
    fn mu_h(&self) -> f64 {
        (**self).mu_h()
    }
    fn mu_v(&self) -> f64 {
        (**self).mu_v()
    }
    fn vertical_strip(&self, n: i64, s: Symbol) -> Option<Strip> {
        (**self).vertical_strip(n, s)
    }
    fn horizontal_strip(&self, n: i64, s: Symbol) -> Option<Strip> {
        (**self).horizontal_strip(n, s)
    }
    fn vertical_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        (**self).vertical_symbol(n, p, tol)
    }
    fn horizontal_symbol(&self, n: i64, p: Point2, tol: f64) -> Option<Symbol> {
        (**self).horizontal_symbol(n, p, tol)
    }
}

/// Time-independent layout given by explicit strips. Useful for building
/// small counterexamples.
#[derive(Debug, Clone)]
pub struct ExplicitLayout {
    pub domain: DomainBox,
    pub vertical: Vec<Option<Strip>>,
    pub horizontal: Vec<Option<Strip>>,
    pub mu_h: f64,
    pub mu_v: f64,
}

impl ExplicitLayout {
    pub fn new(domain: DomainBox, vertical: Vec<Option<Strip>>, horizontal: Vec<Option<Strip>>) -> Self {
        let bound = |strips: &[Option<Strip>]| {
            strips
                .iter()
                .flatten()
                .map(Strip::max_lipschitz)
                .fold(0.0, f64::max)
        };
        ExplicitLayout {
            domain,
            mu_h: bound(&horizontal),
            mu_v: bound(&vertical),
            vertical,
            horizontal,
        }
    }

    fn pick(strips: &[Option<Strip>], s: Symbol) -> Option<Strip> {
        strips.get((s as usize).checked_sub(1)?).cloned().flatten()
    }
}

impl StripLayout for ExplicitLayout {
    fn n_symbols(&self) -> usize {
        self.vertical.len().max(self.horizontal.len())
    }
    fn domain(&self, _n: i64) -> DomainBox {
        self.domain
    }
    fn mu_h(&self) -> f64 {
        self.mu_h
    }
    fn mu_v(&self) -> f64 {
        self.mu_v
    }
    fn vertical_strip(&self, _n: i64, s: Symbol) -> Option<Strip> {
        Self::pick(&self.vertical, s)
    }
    fn horizontal_strip(&self, _n: i64, s: Symbol) -> Option<Strip> {
        Self::pick(&self.horizontal, s)
    }
}
