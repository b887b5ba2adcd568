//! Transition matrices, itineraries and strip refinement along symbol words.
//!
//! A future word `s_n s_{n+1} … s_{n+k}` selects the vertical strip of points
//! at time `n` whose forward orbit visits `V_{s_{n+m}}^{n+m}` for `m = 0..=k`.
//! A past word `s_{n-d} … s_{n-1}` selects the horizontal strip of points at
//! time `n` whose backward orbit came through `V_{s_{n-m}}^{n-m}`. A point of
//! the invariant set is the intersection of the two.
//!
//! Refined boundaries are transported point by point through the map and
//! re-fitted as cubic Hermite graphs over the full strip interval.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    curve_intersection, strip_width, LipschitzCurve, Orientation, Strip,
};
use crate::layout::{StripLayout, Symbol};
use crate::map::{Mat2, MapSequence, Point2, TangentVector};

/// A finite window `s_{n-d} … s_{n-1} . s_n … s_{n+k}` of a symbol sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Itinerary {
    pub base_time: i64,
    /// `s_{n-d} … s_{n-1}`, oldest first.
    pub past: Vec<Symbol>,
    /// `s_n … s_{n+k}`.
    pub future: Vec<Symbol>,
}

impl Itinerary {
    pub fn new(base_time: i64, past: Vec<Symbol>, future: Vec<Symbol>) -> Self {
        Itinerary {
            base_time,
            past,
            future,
        }
    }

    /// The constant word `s…s.s…s`.
    pub fn constant(base_time: i64, s: Symbol, past_len: usize, future_len: usize) -> Self {
        Itinerary::new(base_time, vec![s; past_len], vec![s; future_len])
    }

    /// Parses `"112.121"`; the dot marks the present.
    pub fn parse(text: &str, base_time: i64) -> Result<Self> {
        let (past, future) = text
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("word {text:?} has no '.'")))?;
        let digits = |s: &str| -> Result<Vec<Symbol>> {
            s.chars()
                .map(|c| match c.to_digit(10) {
                    Some(d) if d >= 1 => Ok(d as Symbol),
                    _ => Err(Error::Parse(format!("bad symbol {c:?} in {text:?}"))),
                })
                .collect()
        };
        Ok(Itinerary::new(base_time, digits(past)?, digits(future)?))
    }

    /// Symbol at absolute time `m`, if inside the window.
    pub fn symbol_at(&self, m: i64) -> Option<Symbol> {
        let k = m - self.base_time;
        if k >= 0 {
            self.future.get(k as usize).copied()
        } else {
            let back = (-k) as usize;
            self.past.len().checked_sub(back).map(|i| self.past[i])
        }
    }

    /// First time covered by the window.
    pub fn start_time(&self) -> i64 {
        self.base_time - self.past.len() as i64
    }

    /// All symbols in time order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.past.iter().chain(self.future.iter()).copied()
    }

    /// Keeps the last `past` and first `future` symbols.
    pub fn truncate(&self, past: usize, future: usize) -> Result<Itinerary> {
        if past > self.past.len() || future > self.future.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate {self} to ({past}, {future})"
            )));
        }
        Ok(Itinerary::new(
            self.base_time,
            self.past[self.past.len() - past..].to_vec(),
            self.future[..future].to_vec(),
        ))
    }

    pub fn check_symbols(&self, n_symbols: usize) -> Result<()> {
        for s in self.symbols() {
            if s == 0 || s as usize > n_symbols {
                return Err(Error::InvalidSymbol(s, n_symbols));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.past {
            write!(f, "{s}")?;
        }
        f.write_str(".")?;
        for s in &self.future {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Itinerary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Itinerary::parse(s, 0)
    }
}

/// `σ̃`: advance the present by one step.
pub fn shift_word(it: &Itinerary) -> Result<Itinerary> {
    let (&first, rest) = it
        .future
        .split_first()
        .ok_or(Error::EmptyWord("future is empty"))?;
    let mut past = it.past.clone();
    past.push(first);
    Ok(Itinerary::new(it.base_time + 1, past, rest.to_vec()))
}

/// Inverse of [`shift_word`].
pub fn unshift_word(it: &Itinerary) -> Result<Itinerary> {
    let (&last, rest) = it
        .past
        .split_last()
        .ok_or(Error::EmptyWord("past is empty"))?;
    let mut future = Vec::with_capacity(it.future.len() + 1);
    future.push(last);
    future.extend_from_slice(&it.future);
    Ok(Itinerary::new(it.base_time - 1, rest.to_vec(), future))
}

/// `A^n`: entry `(i, j)` is 1 iff `H_i^{n+1} ∩ V_j^{n+1}` is nonempty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    pub n: i64,
    pub entries: Vec<Vec<u8>>,
    /// A point certified to lie in both strips, for every nonzero entry.
    pub witnesses: Vec<Vec<Option<Point2>>>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Whether `s_n = from` may be followed by `s_{n+1} = to`.
    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        let (i, j) = (from as usize, to as usize);
        i >= 1 && j >= 1 && i <= self.size() && j <= self.size() && self.entries[i - 1][j - 1] == 1
    }

    pub fn is_all_ones(&self) -> bool {
        self.entries.iter().flatten().all(|&e| e == 1)
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u8::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// A point in both strips, or `None` if sampling finds no common point.
///
/// Tries the intersection of the midlines first and falls back to a
/// lattice in the horizontal strip. Every returned point is checked
/// against both strips without tolerance.
pub fn intersection_witness(h: &Strip, v: &Strip) -> Option<Point2> {
    if h.orientation != Orientation::Horizontal || v.orientation != Orientation::Vertical {
        return None;
    }
    if let (Ok(hm), Ok(vm)) = (h.midline(), v.midline()) {
        if hm.lipschitz_bound * vm.lipschitz_bound < 1.0 {
            if let Ok(p) = curve_intersection(&vm, &hm) {
                if h.contains(p, 0.0) && v.contains(p, 0.0) {
                    return Some(p);
                }
            }
        }
    }
    let iv = h.interval();
    for t in iv.linspace(257) {
        for k in 0..=16 {
            let p = h.point_at(t, k as f64 / 16.0);
            if h.contains(p, 0.0) && v.contains(p, 0.0) {
                return Some(p);
            }
        }
    }
    None
}

pub fn compute_transition_matrix(layout: &dyn StripLayout, n: i64) -> TransitionMatrix {
    let size = layout.n_symbols();
    let mut entries = vec![vec![0u8; size]; size];
    let mut witnesses = vec![vec![None; size]; size];
    for i in 1..=size {
        let Some(h) = layout.horizontal_strip(n, i as Symbol) else {
            continue;
        };
        for j in 1..=size {
            let Some(v) = layout.vertical_strip(n + 1, j as Symbol) else {
                continue;
            };
            if let Some(p) = intersection_witness(&h, &v) {
                entries[i - 1][j - 1] = 1;
                witnesses[i - 1][j - 1] = Some(p);
            }
        }
    }
    TransitionMatrix {
        n,
        entries,
        witnesses,
    }
}

/// Transition matrices over a window of times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrixSeq {
    pub n_symbols: usize,
    pub matrices: BTreeMap<i64, TransitionMatrix>,
}

impl TransitionMatrixSeq {
    pub fn compute(layout: &dyn StripLayout, times: std::ops::RangeInclusive<i64>) -> Self {
        let matrices = times
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|n| (n, compute_transition_matrix(layout, n)))
            .collect();
        TransitionMatrixSeq {
            n_symbols: layout.n_symbols(),
            matrices,
        }
    }

    pub fn matrix(&self, n: i64) -> Option<&TransitionMatrix> {
        self.matrices.get(&n)
    }

    pub fn allows(&self, n: i64, from: Symbol, to: Symbol) -> Result<bool> {
        self.matrix(n)
            .map(|m| m.allows(from, to))
            .ok_or_else(|| Error::InvalidParameter(format!("no transition matrix for time {n}")))
    }

    /// Checks every adjacent pair of the itinerary.
    pub fn check_admissible(&self, it: &Itinerary) -> Result<()> {
        it.check_symbols(self.n_symbols)?;
        let syms: Vec<Symbol> = it.symbols().collect();
        let t0 = it.start_time();
        for (k, w) in syms.windows(2).enumerate() {
            let m = t0 + k as i64;
            if !self.allows(m, w[0], w[1])? {
                return Err(Error::Inadmissible {
                    n: m,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(())
    }

    /// Admissible words of length `len` whose first symbol sits at time `start`,
    /// in lexicographic order.
    pub fn words(&self, start: i64, len: usize) -> Result<Vec<Vec<Symbol>>> {
        let mut out: Vec<Vec<Symbol>> = Vec::new();
        if len == 0 {
            out.push(Vec::new());
            return Ok(out);
        }
        out.extend((1..=self.n_symbols as Symbol).map(|s| vec![s]));
        for k in 1..len {
            let m = start + k as i64 - 1;
            let mut next = Vec::with_capacity(out.len() * self.n_symbols);
            for w in &out {
                for s in 1..=self.n_symbols as Symbol {
                    if self.allows(m, *w.last().expect("nonempty"), s)? {
                        let mut e = w.clone();
                        e.push(s);
                        next.push(e);
                    }
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Number of admissible words of length `len` starting at `start`.
    pub fn count_words(&self, start: i64, len: usize) -> Result<u128> {
        if len == 0 {
            return Ok(1);
        }
        let n = self.n_symbols;
        let mut counts = vec![1u128; n];
        for k in 1..len {
            let m = start + k as i64 - 1;
            let mut next = vec![0u128; n];
            for (i, c) in counts.iter().enumerate() {
                for (j, slot) in next.iter_mut().enumerate() {
                    if self.allows(m, i as Symbol + 1, j as Symbol + 1)? {
                        *slot += c;
                    }
                }
            }
            counts = next;
        }
        Ok(counts.iter().sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Points used to locate the part of a boundary curve that survives.
    pub scan: usize,
    /// Knots of the re-fitted boundary.
    pub knots: usize,
    /// How far a transported end may sit from the strip's end segment.
    pub end_tol: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            scan: 1025,
            knots: 257,
            end_tol: 1e-7,
        }
    }
}

/// A point of the invariant set located from its itinerary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocatedPoint {
    pub point: Point2,
    /// Larger of the two terminal strip widths.
    pub err_bound: f64,
}

/// Refines strips along words for one map sequence and strip layout.
pub struct Refiner<'a> {
    layout: &'a dyn StripLayout,
    seq: &'a dyn MapSequence,
    opts: RefineOptions,
    matrices: Mutex<BTreeMap<i64, TransitionMatrix>>,
}

pub type Tree = BTreeMap<Vec<Symbol>, Strip>;

impl<'a> Refiner<'a> {
    pub fn new(layout: &'a dyn StripLayout, seq: &'a dyn MapSequence) -> Self {
        Self::with_options(layout, seq, RefineOptions::default())
    }

    pub fn with_options(layout: &'a dyn StripLayout, seq: &'a dyn MapSequence, opts: RefineOptions) -> Self {
        Refiner {
            layout,
            seq,
            opts,
            matrices: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn layout(&self) -> &dyn StripLayout {
        self.layout
    }

    pub fn sequence(&self) -> &dyn MapSequence {
        self.seq
    }

    pub fn transition(&self, n: i64) -> TransitionMatrix {
        if let Some(m) = self.matrices.lock().expect("poisoned").get(&n) {
            return m.clone();
        }
        let m = compute_transition_matrix(self.layout, n);
        self.matrices.lock().expect("poisoned").insert(n, m.clone());
        m
    }

    fn require(&self, n: i64, from: Symbol, to: Symbol) -> Result<()> {
        if self.transition(n).allows(from, to) {
            Ok(())
        } else {
            Err(Error::Inadmissible { n, from, to })
        }
    }

    fn base_vertical(&self, n: i64, s: Symbol) -> Result<Strip> {
        self.check_symbol(s)?;
        self.layout.vertical_strip(n, s).ok_or_else(|| Error::EmptyRefinement {
            n,
            detail: format!("strip V_{s} is absent"),
        })
    }

    fn base_horizontal(&self, n: i64, s: Symbol) -> Result<Strip> {
        self.check_symbol(s)?;
        self.layout.horizontal_strip(n, s).ok_or_else(|| Error::EmptyRefinement {
            n: n + 1,
            detail: format!("strip H_{s} is absent"),
        })
    }

    fn check_symbol(&self, s: Symbol) -> Result<()> {
        let k = self.layout.n_symbols();
        if s == 0 || s as usize > k {
            Err(Error::InvalidSymbol(s, k))
        } else {
            Ok(())
        }
    }

    /// `f_n^{-1}(next) ∩ V_s^n`, where `next` is a vertical strip at time `n + 1`.
    pub fn pull_vertical(&self, n: i64, s: Symbol, next: &Strip) -> Result<Strip> {
        let target = self.base_vertical(n, s)?;
        let seq = self.seq;
        self.transport(
            next,
            &|p| seq.inverse(n, p),
            &|p| seq.jacobian_inv(n, p),
            &target,
            n,
        )
    }

    /// `f_n(prev ∩ V_s^n)`, a horizontal strip inside `H_s^{n+1}`; `prev` lives at time `n`.
    pub fn push_horizontal(&self, n: i64, s: Symbol, prev: &Strip) -> Result<Strip> {
        let target = self.base_horizontal(n, s)?;
        let seq = self.seq;
        self.transport(
            prev,
            &|p| seq.forward(n, p),
            &|p| seq.jacobian_fwd(n, p),
            &target,
            n + 1,
        )
    }

    /// Vertical strip at time `n` selected by `future = s_n … s_{n+k}`.
    pub fn vertical(&self, n: i64, future: &[Symbol]) -> Result<Strip> {
        let (&last, _) = future
            .split_last()
            .ok_or(Error::EmptyWord("future word is empty"))?;
        let end = n + future.len() as i64 - 1;
        let mut strip = self.base_vertical(end, last)?;
        for k in (0..future.len() - 1).rev() {
            let m = n + k as i64;
            self.require(m, future[k], future[k + 1])?;
            strip = self.pull_vertical(m, future[k], &strip)?;
        }
        Ok(strip)
    }

    /// Horizontal strip at time `n` selected by `past = s_{n-d} … s_{n-1}`.
    pub fn horizontal(&self, n: i64, past: &[Symbol]) -> Result<Strip> {
        let (&first, _) = past
            .split_first()
            .ok_or(Error::EmptyWord("past word is empty"))?;
        let start = n - past.len() as i64;
        let mut strip = self.base_horizontal(start, first)?;
        for k in 1..past.len() {
            let m = start + k as i64;
            self.require(m - 1, past[k - 1], past[k])?;
            strip = self.push_horizontal(m, past[k], &strip)?;
        }
        Ok(strip)
    }

    /// `[V(s_n), V(s_n s_{n+1}), …]`, all at time `n`.
    pub fn vertical_chain(&self, n: i64, future: &[Symbol]) -> Result<Vec<Strip>> {
        (1..=future.len())
            .into_par_iter()
            .map(|k| self.vertical(n, &future[..k]))
            .collect()
    }

    /// `[H(s_{n-1}), H(s_{n-2} s_{n-1}), …]`, all at time `n`.
    pub fn horizontal_chain(&self, n: i64, past: &[Symbol]) -> Result<Vec<Strip>> {
        (1..=past.len())
            .into_par_iter()
            .map(|k| self.horizontal(n, &past[past.len() - k..]))
            .collect()
    }

    /// All vertical strips for admissible future words of lengths `1..=len`.
    ///
    /// `levels[l - 1]` holds words of length `l`, living at time `n + len - l`,
    /// so that the last level is the one at time `n`.
    pub fn vertical_levels(&self, n: i64, len: usize) -> Result<Vec<Tree>> {
        let mut levels: Vec<Tree> = Vec::with_capacity(len);
        if len == 0 {
            return Ok(levels);
        }
        let top = n + len as i64 - 1;
        let mut first = Tree::new();
        for s in self.layout.symbols() {
            if let Some(v) = self.layout.vertical_strip(top, s) {
                first.insert(vec![s], v);
            }
        }
        levels.push(first);
        for l in 2..=len {
            let m = n + (len - l) as i64;
            let tm = self.transition(m);
            let prev = levels.last().expect("nonempty");
            let jobs: Vec<(Symbol, &Vec<Symbol>, &Strip)> = self
                .layout
                .symbols()
                .flat_map(|s| prev.iter().map(move |(w, st)| (s, w, st)))
                .filter(|(s, w, _)| tm.allows(*s, w[0]))
                .collect();
            let built: Result<Vec<(Vec<Symbol>, Strip)>> = jobs
                .into_par_iter()
                .map(|(s, w, st)| {
                    let mut word = Vec::with_capacity(w.len() + 1);
                    word.push(s);
                    word.extend_from_slice(w);
                    Ok((word, self.pull_vertical(m, s, st)?))
                })
                .collect();
            levels.push(built?.into_iter().collect());
        }
        Ok(levels)
    }

    /// All horizontal strips for admissible past words of lengths `1..=len`.
    ///
    /// `levels[l - 1]` holds words of length `l`, living at time `n - len + l`.
    pub fn horizontal_levels(&self, n: i64, len: usize) -> Result<Vec<Tree>> {
        let mut levels: Vec<Tree> = Vec::with_capacity(len);
        if len == 0 {
            return Ok(levels);
        }
        let bottom = n - len as i64;
        let mut first = Tree::new();
        for s in self.layout.symbols() {
            if let Some(h) = self.layout.horizontal_strip(bottom, s) {
                first.insert(vec![s], h);
            }
        }
        levels.push(first);
        for l in 2..=len {
            // words of length l live at time t; their last symbol sits at t - 1
            let t = n - (len - l) as i64;
            let tm = self.transition(t - 2);
            let prev = levels.last().expect("nonempty");
            let jobs: Vec<(&Vec<Symbol>, Symbol, &Strip)> = prev
                .iter()
                .flat_map(|(w, st)| self.layout.symbols().map(move |s| (w, s, st)))
                .filter(|(w, s, _)| tm.allows(*w.last().expect("nonempty"), *s))
                .collect();
            let built: Result<Vec<(Vec<Symbol>, Strip)>> = jobs
                .into_par_iter()
                .map(|(w, s, st)| {
                    let mut word = w.clone();
                    word.push(s);
                    Ok((word, self.push_horizontal(t - 1, s, st)?))
                })
                .collect();
            levels.push(built?.into_iter().collect());
        }
        Ok(levels)
    }

    /// Point selected by an itinerary, as the crossing of the midlines of
    /// its two refined strips.
    pub fn itinerary_to_point(&self, it: &Itinerary) -> Result<LocatedPoint> {
        if it.past.is_empty() || it.future.is_empty() {
            return Err(Error::EmptyWord("itinerary needs past and future symbols"));
        }
        let n = it.base_time;
        self.require(n - 1, *it.past.last().expect("nonempty"), it.future[0])?;
        let v = self.vertical(n, &it.future)?;
        let h = self.horizontal(n, &it.past)?;
        locate(&v, &h)
    }

    /// `|f_n(φ⁻¹(s, n)) − φ⁻¹(σ̃(s, n))|` with both points computed from
    /// `depth` past and `depth + 1` future symbols.
    pub fn conjugacy_residual(&self, it: &Itinerary, depth: usize) -> Result<f64> {
        if depth == 0 || it.past.len() < depth || it.future.len() < depth + 2 {
            return Err(Error::InvalidParameter(format!(
                "conjugacy residual at depth {depth} needs {depth} past and {} future symbols, got {it}",
                depth + 2
            )));
        }
        let z = self.itinerary_to_point(&it.truncate(depth, depth + 1)?)?;
        let shifted = shift_word(it)?;
        let z_next = self.itinerary_to_point(&shifted.truncate(depth, depth + 1)?)?;
        Ok(self.seq.forward(it.base_time, z.point).dist(z_next.point))
    }

    fn transport(
        &self,
        source: &Strip,
        map: &(dyn Fn(Point2) -> Point2 + Sync),
        jac: &(dyn Fn(Point2) -> Mat2 + Sync),
        target: &Strip,
        n: i64,
    ) -> Result<Strip> {
        let a = self.transport_curve(&source.lower, map, jac, target, n)?;
        let b = self.transport_curve(&source.upper, map, jac, target, n)?;
        let mid = target.interval().mid();
        let (lo, hi) = if a.eval(mid) <= b.eval(mid) { (a, b) } else { (b, a) };
        Strip::new(lo, hi).map_err(|e| Error::RefinementEscape {
            n,
            detail: format!("transported boundaries do not bound a strip: {e}"),
        })
    }

    fn transport_curve(
        &self,
        curve: &LipschitzCurve,
        map: &(dyn Fn(Point2) -> Point2 + Sync),
        jac: &(dyn Fn(Point2) -> Mat2 + Sync),
        target: &Strip,
        n: i64,
    ) -> Result<LipschitzCurve> {
        let image = |u: f64| map(curve.point_at(u));
        let inside = |u: f64| target.contains(image(u), 1e-12);
        let us: Vec<f64> = curve.interval.linspace(self.opts.scan).collect();
        let flags: Vec<bool> = us.iter().map(|&u| inside(u)).collect();
        let first = flags.iter().position(|&f| f);
        let Some(first) = first else {
            return Err(Error::EmptyRefinement {
                n,
                detail: "no part of the boundary curve lands in the target strip".into(),
            });
        };
        let rising = usize::from(flags[0]) + flags.windows(2).filter(|w| !w[0] && w[1]).count();
        if rising != 1 {
            return Err(Error::RefinementEscape {
                n,
                detail: format!("boundary curve meets the target strip in {rising} pieces"),
            });
        }
        let last = flags.iter().rposition(|&f| f).expect("nonempty run");
        let edge = |inner: f64, outer: f64| {
            let (mut a, mut b) = (inner, outer);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if inside(m) {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        let ua = if first == 0 { us[0] } else { edge(us[first], us[first - 1]) };
        let ub = if last == us.len() - 1 {
            us[last]
        } else {
            edge(us[last], us[last + 1])
        };
        let iv = target.interval();
        let param = |p: Point2| target.coords(p).0;
        let ta = param(image(ua));
        let tb = param(image(ub));
        let on_end = |t: f64| {
            if (t - iv.lo).abs() <= self.opts.end_tol {
                Some(false)
            } else if (t - iv.hi).abs() <= self.opts.end_tol {
                Some(true)
            } else {
                None
            }
        };
        match (on_end(ta), on_end(tb)) {
            (Some(x), Some(y)) if x != y => {}
            _ => {
                return Err(Error::RefinementEscape {
                    n,
                    detail: format!(
                        "transported curve ends at parameters {ta} and {tb}, not on both ends of [{}, {}]",
                        iv.lo, iv.hi
                    ),
                })
            }
        }
        let k = self.opts.knots.max(2);
        let mut ts = Vec::with_capacity(k);
        let mut vs = Vec::with_capacity(k);
        let mut ms = Vec::with_capacity(k);
        for i in 0..k {
            let u = ua + (ub - ua) * (i as f64 / (k - 1) as f64);
            let q = curve.point_at(u);
            let p = map(q);
            let (tx, ty) = curve.tangent_at(u);
            let d = jac(q).apply(TangentVector::new(tx, ty));
            let (t, v) = target.coords(p);
            let (dt, dv) = match target.orientation {
                Orientation::Horizontal => (d.xi, d.eta),
                Orientation::Vertical => (d.eta, d.xi),
            };
            ts.push(t);
            vs.push(v);
            ms.push(dv / dt);
        }
        if ts[0] > ts[k - 1] {
            ts.reverse();
            vs.reverse();
            ms.reverse();
        }
        ts[0] = iv.lo;
        ts[k - 1] = iv.hi;
        if ts.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::RefinementEscape {
                n,
                detail: "transported curve is not a graph over the strip interval".into(),
            });
        }
        let bound = match target.orientation {
            Orientation::Horizontal => self.layout.mu_h(),
            Orientation::Vertical => self.layout.mu_v(),
        };
        LipschitzCurve::hermite(target.orientation, ts, vs, ms, bound)
    }
}

/// Crossing of the midlines of a vertical and a horizontal strip.
pub fn locate(v: &Strip, h: &Strip) -> Result<LocatedPoint> {
    let point = curve_intersection(&v.midline()?, &h.midline()?)?;
    Ok(LocatedPoint {
        point,
        err_bound: strip_width(v).max(strip_width(h)),
    })
}

/// Reads off the itinerary of `p` at time `n` by iterating the map.
/// Returns `None` when the orbit leaves the strips within the window.
pub fn itinerary_of_point(
    layout: &dyn StripLayout,
    seq: &dyn MapSequence,
    n: i64,
    p: Point2,
    past_len: usize,
    future_len: usize,
    tol: f64,
) -> Option<Itinerary> {
    let mut future = Vec::with_capacity(future_len);
    let mut q = p;
    for k in 0..future_len {
        let m = n + k as i64;
        future.push(layout.vertical_symbol(m, q, tol)?);
        q = seq.forward(m, q);
    }
    let mut past = Vec::with_capacity(past_len);
    let mut q = p;
    for k in 1..=past_len {
        let m = n - k as i64;
        past.push(layout.horizontal_symbol(m, q, tol)?);
        q = seq.inverse(m, q);
    }
    past.reverse();
    Some(Itinerary::new(n, past, future))
}
