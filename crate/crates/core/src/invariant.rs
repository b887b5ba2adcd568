//! Point clouds approximating the time-`n` slice of the invariant set.
//!
//! The symbolic approximation locates one point per admissible word; the
//! survivor cloud keeps the lattice points whose orbit stays in the strips.
//! The two are computed independently and compared with a directed
//! Hausdorff distance.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{curve_intersection, strip_width, LipschitzCurve};
use crate::layout::{StripLayout, Symbol};
use crate::map::{MapSequence, Point2};
use crate::symbolic::{Itinerary, Refiner};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaPoint {
    #[serde(serialize_with = "word_string")]
    pub word: Itinerary,
    pub point: Point2,
    pub err_bound: f64,
}

fn word_string<S: serde::Serializer>(w: &Itinerary, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaApproximation {
    pub n: i64,
    pub depth: usize,
    pub points: Vec<LambdaPoint>,
}

impl LambdaApproximation {
    pub fn max_err(&self) -> f64 {
        self.points.iter().map(|p| p.err_bound).fold(0.0, f64::max)
    }

    pub fn coords(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.point).collect()
    }

    /// The point of a given word, if present.
    pub fn find(&self, word: &Itinerary) -> Option<&LambdaPoint> {
        self.points
            .binary_search_by(|p| word_key(&p.word).cmp(&word_key(word)))
            .ok()
            .map(|i| &self.points[i])
    }
}

fn word_key(w: &Itinerary) -> (&[Symbol], &[Symbol]) {
    (&w.past, &w.future)
}

struct Terminal {
    word: Vec<Symbol>,
    midline: LipschitzCurve,
    width: f64,
}

fn terminals(tree: &crate::symbolic::Tree) -> Result<Vec<Terminal>> {
    tree.par_iter()
        .map(|(w, s)| {
            Ok(Terminal {
                word: w.clone(),
                midline: s.midline()?,
                width: strip_width(s),
            })
        })
        .collect()
}

/// Calls `sink` once per admissible word with `depth` past and `depth + 1`
/// future symbols, in lexicographic order of the word.
///
/// Only the strips are held in memory; the points are produced one past
/// word at a time.
pub fn stream_lambda<F>(refiner: &Refiner<'_>, n: i64, depth: usize, mut sink: F) -> Result<usize>
where
    F: FnMut(LambdaPoint) -> Result<()>,
{
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let vertical = refiner.vertical_levels(n, depth + 1)?;
    let horizontal = refiner.horizontal_levels(n, depth)?;
    let futures = terminals(vertical.last().expect("depth >= 1"))?;
    let pasts = terminals(horizontal.last().expect("depth >= 1"))?;
    let tm = refiner.transition(n - 1);
    let mut count = 0;
    for h in &pasts {
        let last = *h.word.last().expect("nonempty");
        let row: Vec<LambdaPoint> = futures
            .par_iter()
            .filter(|v| tm.allows(last, v.word[0]))
            .map(|v| {
                Ok(LambdaPoint {
                    word: Itinerary::new(n, h.word.clone(), v.word.clone()),
                    point: curve_intersection(&v.midline, &h.midline)?,
                    err_bound: v.width.max(h.width),
                })
            })
            .collect::<Result<_>>()?;
        for p in row {
            sink(p)?;
            count += 1;
        }
    }
    Ok(count)
}

/// Every admissible word of length `2·depth + 1` centred at `n`, located.
pub fn approximate_lambda(refiner: &Refiner<'_>, n: i64, depth: usize) -> Result<LambdaApproximation> {
    let mut points = Vec::new();
    stream_lambda(refiner, n, depth, |p| {
        points.push(p);
        Ok(())
    })?;
    Ok(LambdaApproximation { n, depth, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivorOptions {
    /// Refine the lattice around survivors as the window grows.
    pub adaptive: bool,
    /// Adaptive mode halves the spacing whenever fewer than this many
    /// survivors remain per surviving cell of the window.
    pub per_cell: usize,
    /// Never go below this spacing.
    pub min_spacing: f64,
}

impl Default for SurvivorOptions {
    fn default() -> Self {
        SurvivorOptions {
            adaptive: false,
            per_cell: 64,
            min_spacing: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivorCloud {
    pub n: i64,
    pub window: usize,
    pub grid: usize,
    /// Spacing of the seed lattice.
    pub seed_spacing: f64,
    /// Spacing of the lattice the points were finally tested on.
    pub spacing: f64,
    pub adaptive: bool,
    /// Survivors per window on the seed lattice alone.
    pub uniform_counts: Vec<usize>,
    pub points: Vec<Point2>,
}

impl SurvivorCloud {
    /// Half-diagonal of a final lattice cell.
    pub fn cell_radius(&self) -> f64 {
        self.spacing * std::f64::consts::SQRT_2 / 2.0
    }
}

fn survives(layout: &dyn StripLayout, seq: &dyn MapSequence, n: i64, k: usize, p: Point2) -> bool {
    let mut q = p;
    for m in 0..=k as i64 {
        if layout.vertical_symbol(n + m, q, 0.0).is_none() {
            return false;
        }
        if m < k as i64 {
            q = seq.forward(n + m, q);
        }
    }
    let mut q = p;
    for m in 0..=k as i64 {
        // the horizontal strips at time n - m are images from time n - m - 1
        if layout.horizontal_symbol(n - m - 1, q, 0.0).is_none() {
            return false;
        }
        if m < k as i64 {
            q = seq.inverse(n - m - 1, q);
        }
    }
    true
}

/// Lattice points of `D_n` whose forward orbit stays in the vertical strips
/// for `k` steps and whose backward orbit stays in the horizontal strips for
/// `k` steps.
pub fn brute_force_survivors(
    layout: &dyn StripLayout,
    seq: &dyn MapSequence,
    n: i64,
    k: usize,
    grid: usize,
    opts: SurvivorOptions,
) -> Result<SurvivorCloud> {
    if grid < 32 {
        return Err(Error::InvalidParameter(format!("grid must be at least 32, got {grid}")));
    }
    let d = layout.domain(n);
    let h0 = (d.x.len() / (grid - 1) as f64).max(d.y.len() / (grid - 1) as f64);
    let origin = Point2::new(d.x.lo, d.y.lo);
    // lattice index (i, j) at spacing h is origin + h·(i, j)
    let at = |h: f64, (i, j): (i64, i64)| Point2::new(origin.x + h * i as f64, origin.y + h * j as f64);
    let seed: Vec<(i64, i64)> = (0..grid as i64)
        .flat_map(|i| (0..grid as i64).map(move |j| (i, j)))
        .collect();

    let mut uniform_counts = Vec::with_capacity(k + 1);
    let mut uniform = seed.clone();
    for w in 0..=k {
        uniform = uniform
            .into_par_iter()
            .filter(|&ij| survives(layout, seq, n, w, at(h0, ij)))
            .collect();
        uniform_counts.push(uniform.len());
    }

    if !opts.adaptive {
        let points = uniform.iter().map(|&ij| at(h0, ij)).collect();
        return Ok(SurvivorCloud {
            n,
            window: k,
            grid,
            seed_spacing: h0,
            spacing: h0,
            adaptive: false,
            uniform_counts,
            points,
        });
    }

    let symbols = layout.n_symbols().max(1) as f64;
    let mut h = h0;
    let mut current = seed;
    for w in 0..=k {
        current = current
            .into_par_iter()
            .filter(|&ij| survives(layout, seq, n, w, at(h, ij)))
            .collect();
        if w == k {
            break;
        }
        // each surviving cell of the next window should still hold several lattice points
        let cells = symbols.powi(2 * (w as i32 + 2));
        while (current.len() as f64) < opts.per_cell as f64 * cells && h / 2.0 >= opts.min_spacing {
            let mut next: HashSet<(i64, i64)> = HashSet::with_capacity(current.len() * 8);
            for &(i, j) in &current {
                for di in -2..=2 {
                    for dj in -2..=2 {
                        next.insert((2 * i + di, 2 * j + dj));
                    }
                }
            }
            h /= 2.0;
            let mut v: Vec<(i64, i64)> = next.into_iter().collect();
            v.sort_unstable();
            current = v
                .into_par_iter()
                .filter(|&ij| d.contains(at(h, ij), 0.0) && survives(layout, seq, n, w, at(h, ij)))
                .collect();
        }
    }
    current.sort_unstable();
    Ok(SurvivorCloud {
        n,
        window: k,
        grid,
        seed_spacing: h0,
        spacing: h,
        adaptive: true,
        uniform_counts,
        points: current.iter().map(|&ij| at(h, ij)).collect(),
    })
}

struct Buckets<'a> {
    points: &'a [Point2],
    origin: Point2,
    cell: f64,
    nx: i64,
    ny: i64,
    heads: Vec<Vec<u32>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Point2]) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let per_side = ((points.len() as f64).sqrt().ceil() as i64).clamp(1, 2048);
        let cell = extent / per_side as f64;
        let nx = ((hi.x - lo.x) / cell).floor() as i64 + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as i64 + 1;
        let mut heads = vec![Vec::new(); (nx * ny) as usize];
        let mut b = Buckets {
            points,
            origin: lo,
            cell,
            nx,
            ny,
            heads: Vec::new(),
        };
        for (k, &p) in points.iter().enumerate() {
            let (i, j) = b.index(p);
            heads[(i.clamp(0, nx - 1) * ny + j.clamp(0, ny - 1)) as usize].push(k as u32);
        }
        b.heads = heads;
        b
    }

    fn index(&self, p: Point2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i64,
            ((p.y - self.origin.y) / self.cell).floor() as i64,
        )
    }

    fn nearest(&self, p: Point2) -> f64 {
        let (pi, pj) = self.index(p);
        let (ci, cj) = (pi.clamp(0, self.nx - 1), pj.clamp(0, self.ny - 1));
        // distance from p to the cell it was clamped into
        let lo = Point2::new(
            self.origin.x + ci as f64 * self.cell,
            self.origin.y + cj as f64 * self.cell,
        );
        let dx = (lo.x - p.x).max(p.x - lo.x - self.cell).max(0.0);
        let dy = (lo.y - p.y).max(p.y - lo.y - self.cell).max(0.0);
        let offset = dx.hypot(dy);
        let mut best = f64::INFINITY;
        for r in 0..=self.nx.max(self.ny) {
            for i in ci - r..=ci + r {
                if i < 0 || i >= self.nx {
                    continue;
                }
                let step = if (i - ci).abs() == r { 1 } else { (2 * r).max(1) };
                let mut j = cj - r;
                while j <= cj + r {
                    if j >= 0 && j < self.ny {
                        for &k in &self.heads[(i * self.ny + j) as usize] {
                            best = best.min(p.dist(self.points[k as usize]));
                        }
                    }
                    j += step;
                }
            }
            // anything outside ring r is at least r cells from the clamped cell
            if best <= r as f64 * self.cell - offset {
                break;
            }
        }
        best
    }
}

/// `max_{a} min_{b} |a − b|`.
pub fn directed_hausdorff(a: &[Point2], b: &[Point2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let buckets = Buckets::new(b);
    Ok(a.par_iter().map(|&p| buckets.nearest(p)).reduce(|| 0.0, f64::max))
}

/// Agreement between a symbolic approximation and a survivor cloud.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleAgreement {
    pub n: i64,
    pub depth: usize,
    pub window: usize,
    pub grid: usize,
    pub symbolic_points: usize,
    pub survivor_points: usize,
    /// Symbolic to survivors.
    pub symbolic_to_survivor: f64,
    /// Survivors to symbolic, less the survivor cell radius.
    pub survivor_to_symbolic: f64,
    pub max_err_bound: f64,
    /// `2·(2R/grid) + max err_bound`.
    pub threshold: f64,
    pub adaptive: bool,
    pub uniform_counts: Vec<usize>,
    pub pass: bool,
}

pub fn compare_with_survivors(lambda: &LambdaApproximation, cloud: &SurvivorCloud) -> Result<OracleAgreement> {
    if lambda.n != cloud.n {
        return Err(Error::Usage(format!(
            "symbolic set is at time {} but the survivor cloud is at time {}",
            lambda.n, cloud.n
        )));
    }
    let sym = lambda.coords();
    let forward = directed_hausdorff(&sym, &cloud.points)?;
    let backward = (directed_hausdorff(&cloud.points, &sym)? - cloud.cell_radius()).max(0.0);
    let max_err = lambda.max_err();
    let threshold = 2.0 * cloud.seed_spacing + max_err;
    Ok(OracleAgreement {
        n: lambda.n,
        depth: lambda.depth,
        window: cloud.window,
        grid: cloud.grid,
        symbolic_points: sym.len(),
        survivor_points: cloud.points.len(),
        symbolic_to_survivor: forward,
        survivor_to_symbolic: backward,
        max_err_bound: max_err,
        threshold,
        adaptive: cloud.adaptive,
        uniform_counts: cloud.uniform_counts.clone(),
        pass: forward < threshold && backward < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon::build_geometry;
    use crate::map::HenonParams;
    use crate::symbolic::shift_word;
    use crate::toy::AffineHorseshoe;

    #[test]
    fn hausdorff_examples() {
        let a = [Point2::new(0.0, 0.0), Point2::new(1.0, 2.0)];
        assert_eq!(directed_hausdorff(&a, &a).unwrap(), 0.0);
        let d = directed_hausdorff(&[Point2::new(0.0, 0.0)], &[Point2::new(3.0, 4.0)]).unwrap();
        assert_eq!(d, 5.0);
        assert_eq!(directed_hausdorff(&[], &a), Err(Error::EmptyPointSet));
        assert_eq!(directed_hausdorff(&a, &[]), Err(Error::EmptyPointSet));
    }

    #[test]
    fn hausdorff_matches_brute_force() {
        let pts = |seed: u64, k: usize| -> Vec<Point2> {
            let mut s = seed;
            (0..k)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let a = (s >> 11) as f64 / (1u64 << 53) as f64;
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let b = (s >> 11) as f64 / (1u64 << 53) as f64;
                    Point2::new(10.0 * a - 5.0, 3.0 * b)
                })
                .collect()
        };
        let a = pts(1, 300);
        let b = pts(2, 500);
        let slow = a
            .iter()
            .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(directed_hausdorff(&a, &b).unwrap(), slow);
    }

    #[test]
    fn toy_lambda_points_are_exact() {
        let toy = AffineHorseshoe::two_strip();
        let r = Refiner::new(&toy, &toy);
        let l = approximate_lambda(&r, 0, 2).unwrap();
        assert_eq!(l.points.len(), 32);
        let p = l.find(&Itinerary::constant(0, 2, 2, 3)).unwrap();
        assert!(p.point.dist(Point2::new(1.0, 1.0)) <= p.err_bound);
        let words: Vec<String> = l.points.iter().map(|p| p.word.to_string()).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
    }

    #[test]
    fn henon_depth_three() {
        let g = build_geometry(HenonParams::reference()).unwrap();
        let seq = g.sequence();
        let r = Refiner::new(&g, &seq);
        let l = approximate_lambda(&r, 0, 3).unwrap();
        assert_eq!(l.points.len(), 128);
        assert!(l.points.iter().all(|p| p.point.x.abs() < g.r && p.point.y.abs() < g.r));
        let next = approximate_lambda(&r, 1, 2).unwrap();
        for p in &l.points {
            let shifted = shift_word(&p.word).unwrap().truncate(2, 3).unwrap();
            let q = next.find(&shifted).unwrap();
            let image = seq.forward(0, p.point);
            assert!(image.dist(q.point) <= 4.0 * (p.err_bound + q.err_bound));
        }
    }

    #[test]
    fn survivors_shrink_with_window() {
        let g = build_geometry(HenonParams::reference()).unwrap();
        let seq = g.sequence();
        let counts: Vec<usize> = (0..4)
            .map(|k| {
                brute_force_survivors(&g, &seq, 0, k, 128, SurvivorOptions::default())
                    .unwrap()
                    .points
                    .len()
            })
            .collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
        assert!(counts[0] > 0);
        assert!(brute_force_survivors(&g, &seq, 0, 1, 16, SurvivorOptions::default()).is_err());
    }

    #[test]
    fn window_zero_is_strip_union() {
        let g = build_geometry(HenonParams::reference()).unwrap();
        let seq = g.sequence();
        let c = brute_force_survivors(&g, &seq, 0, 0, 64, SurvivorOptions::default()).unwrap();
        for p in &c.points {
            assert!(g.vertical_symbol(0, *p, 0.0).is_some());
            assert!(g.horizontal_symbol(-1, *p, 0.0).is_some());
        }
    }

    #[test]
    fn adaptive_oracle_agrees_at_small_depth() {
        let g = build_geometry(HenonParams::reference()).unwrap();
        let seq = g.sequence();
        let r = Refiner::new(&g, &seq);
        let l = approximate_lambda(&r, 0, 3).unwrap();
        let opts = SurvivorOptions {
            adaptive: true,
            ..Default::default()
        };
        let c = brute_force_survivors(&g, &seq, 0, 3, 256, opts).unwrap();
        let a = compare_with_survivors(&l, &c).unwrap();
        assert!(a.pass, "{a:?}");
        let mut other = c.clone();
        other.n = 1;
        assert!(matches!(compare_with_survivors(&l, &other), Err(Error::Usage(_))));
    }
}
