//! Randomized property suites shared by `properties.rs` and `acceptance.rs`.
//!
//! Each suite returns the number of cases it ran, or the failure message.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use horseshoe::cone::{check_sector_point, derive_contraction, ConeParams, Direction};
use horseshoe::geometry::{
    curve_intersection, intersects_fully, strip_width, Interval, LipschitzCurve, Orientation,
};
use horseshoe::henon::{build_geometry, sector_threshold, HenonGeometry};
use horseshoe::invariant::directed_hausdorff;
use horseshoe::layout::StripLayout;
use horseshoe::map::{jacobian_fd, HenonParams, MapSequence, Mat2, Point2, TangentVector};
use horseshoe::report::RunConfig;
use horseshoe::symbolic::{shift_word, unshift_word, Itinerary, Refiner, TransitionMatrixSeq};
use horseshoe::toy::AffineHorseshoe;

pub type Suite = fn() -> Result<u32, String>;

pub const SUITES: &[(&str, Suite)] = &[
    ("map inverse round trip", map_round_trip),
    ("unit determinant and inverse jacobian", unit_determinant),
    ("closed-form jacobian matches finite differences", jacobian_matches_fd),
    ("declared lipschitz bounds hold", lipschitz_audit),
    ("curve intersection lies on both curves", intersection_on_both_curves),
    ("strip points are contained", strip_points_contained),
    ("word text round trip and shift inverse", word_round_trip),
    ("admissible word counts are powers of two", word_counts),
    ("sector beyond threshold is preserved", sector_beyond_threshold),
    ("refinement nests and contracts", refinement_nests),
    ("directed hausdorff matches brute force", hausdorff_brute_force),
    ("piecewise-affine conjugacy stays within its cylinder", toy_conjugacy),
    ("config survives toml", config_round_trip),
];

fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())?;
    Ok(cases)
}

fn geometry() -> HenonGeometry {
    build_geometry(HenonParams::reference()).expect("reference geometry")
}

fn params_strategy() -> impl Strategy<Value = HenonParams> {
    (9.5f64..14.0, 0.0f64..0.5).prop_map(|(a, e)| HenonParams::new(a, e).expect("valid"))
}

pub fn map_round_trip() -> Result<u32, String> {
    run(
        2000,
        (params_strategy(), -1000i64..1000, -5.0f64..5.0, -5.0f64..5.0),
        |(p, n, x, y)| {
            let seq = horseshoe::map::HenonSequence::new(p).expect("valid");
            let z = Point2::new(x, y);
            let back = seq.inverse(n, seq.forward(n, z));
            prop_assert!(back.dist(z) <= 1e-12 * (1.0 + z.norm().powi(2)), "{z:?} -> {back:?}");
            let fwd = seq.forward(n, seq.inverse(n, z));
            prop_assert!(fwd.dist(z) <= 1e-12 * (1.0 + z.norm().powi(2)));
            Ok(())
        },
    )
}

pub fn unit_determinant() -> Result<u32, String> {
    run(
        2000,
        (params_strategy(), -1000i64..1000, -5.0f64..5.0, -5.0f64..5.0),
        |(p, n, x, y)| {
            let seq = horseshoe::map::HenonSequence::new(p).expect("valid");
            let z = Point2::new(x, y);
            let j = seq.jacobian_fwd(n, z);
            prop_assert_eq!(j.det(), 1.0);
            let prod = seq.jacobian_inv(n, seq.forward(n, z)).mul(&j);
            prop_assert!(prod.max_abs_diff(&Mat2::IDENTITY) < 1e-12);
            Ok(())
        },
    )
}

pub fn jacobian_matches_fd() -> Result<u32, String> {
    run(500, (-100i64..100, -4.0f64..4.0, -4.0f64..4.0), |(n, x, y)| {
        let seq = geometry().sequence();
        let z = Point2::new(x, y);
        let fd = jacobian_fd(&seq, n, z, 1e-5).expect("positive step");
        prop_assert!(fd.max_abs_diff(&seq.jacobian_fwd(n, z)) < 1e-8);
        Ok(())
    })
}

/// Slopes in `[-bound, bound]` with values that keep every secant within the bound.
fn hermite_strategy() -> impl Strategy<Value = LipschitzCurve> {
    (2usize..12, 0.05f64..0.9).prop_flat_map(|(k, bound)| {
        (
            Just(bound),
            proptest::collection::vec(-1.0f64..1.0, k),
            proptest::collection::vec(-1.0f64..1.0, k + 1),
        )
            .prop_map(|(bound, steps, slopes)| {
                let h = 1.0 / steps.len() as f64;
                let knots: Vec<f64> = (0..=steps.len()).map(|i| i as f64 * h).collect();
                let mut values = vec![0.0];
                for s in &steps {
                    let last = *values.last().expect("nonempty");
                    values.push(last + s * bound * h);
                }
                let slopes = slopes.iter().map(|m| m * bound).collect();
                LipschitzCurve::hermite(Orientation::Horizontal, knots, values, slopes, bound)
                    .expect("secants within bound")
            })
    })
}

pub fn lipschitz_audit() -> Result<u32, String> {
    let hermite = run(400, hermite_strategy(), |c| {
        prop_assert!(c.max_slope() <= c.lipschitz_bound * (1.0 + 1e-9) + 1e-12);
        prop_assert!(c.audit_lipschitz(1000) <= c.lipschitz_bound * (1.0 + 1e-9) + 1e-12);
        Ok(())
    })?;
    let g = geometry();
    let strips = run(200, (-200i64..200, 0u8..4), |(n, k)| {
        let s = if k < 2 {
            g.vertical_strip(n, k + 1).expect("strip")
        } else {
            g.horizontal_strip(n, k - 1).expect("strip")
        };
        for c in [&s.lower, &s.upper] {
            prop_assert!(c.audit_lipschitz(1000) <= c.lipschitz_bound * (1.0 + 1e-9));
            prop_assert!(c.lipschitz_bound <= g.global_slope_bound() + 1e-12);
        }
        Ok(())
    })?;
    Ok(hermite + strips)
}

pub fn intersection_on_both_curves() -> Result<u32, String> {
    run(
        1000,
        (-0.9f64..0.9, -0.3f64..0.3, -0.9f64..0.9, -0.3f64..0.3),
        |(a, b, c, d)| {
            let iv = Interval::new(-2.0, 2.0).expect("interval");
            let v = LipschitzCurve::affine(Orientation::Vertical, iv, a, b).expect("curve");
            let h = LipschitzCurve::affine(Orientation::Horizontal, iv, c, d).expect("curve");
            let p = curve_intersection(&v, &h).expect("product below 1");
            prop_assert!((p.x - v.eval(p.y)).abs() < 1e-9);
            prop_assert!((p.y - h.eval(p.x)).abs() < 1e-9);
            // closed form: x = a·y + b, y = c·x + d
            let y = (c * b + d) / (1.0 - a * c);
            prop_assert!((p.y - y).abs() < 1e-9);
            Ok(())
        },
    )
}

pub fn strip_points_contained() -> Result<u32, String> {
    let g = geometry();
    run(
        1000,
        (-100i64..100, 1u8..=2, 0.0f64..=1.0, 0.0f64..=1.0, any::<bool>()),
        |(n, s, t, frac, vertical)| {
            let strip = if vertical {
                g.vertical_strip(n, s)
            } else {
                g.horizontal_strip(n, s)
            }
            .expect("strip");
            let p = strip.point_at(strip.interval().lerp(t), frac);
            prop_assert!(strip.contains(p, 1e-12));
            prop_assert!(g.domain_box().contains(p, 1e-9));
            Ok(())
        },
    )
}

fn word_strategy() -> impl Strategy<Value = Itinerary> {
    (
        -50i64..50,
        proptest::collection::vec(1u8..=2, 0..8),
        proptest::collection::vec(1u8..=2, 1..8),
    )
        .prop_map(|(n, past, future)| Itinerary::new(n, past, future))
}

pub fn word_round_trip() -> Result<u32, String> {
    run(2000, word_strategy(), |w| {
        let text = w.to_string();
        prop_assert_eq!(&Itinerary::parse(&text, w.base_time).expect("parses"), &w);
        let shifted = shift_word(&w).expect("future nonempty");
        prop_assert_eq!(shifted.base_time, w.base_time + 1);
        prop_assert_eq!(&unshift_word(&shifted).expect("past nonempty"), &w);
        Ok(())
    })
}

pub fn word_counts() -> Result<u32, String> {
    let g = geometry();
    let seq = TransitionMatrixSeq::compute(&g, -20..=20);
    run(200, (-5i64..5, 1usize..=12), |(start, len)| {
        prop_assert_eq!(seq.count_words(start, len).expect("in range"), 1u128 << len);
        if len <= 8 {
            let words = seq.words(start, len).expect("in range");
            prop_assert_eq!(words.len(), 1usize << len);
            let mut sorted = words.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), words.len());
        }
        Ok(())
    })
}

/// Wherever `|y| > ½(μv + 1/μv)` every stable vector stays in the sector.
pub fn sector_beyond_threshold() -> Result<u32, String> {
    let seq = geometry().sequence();
    let p = ConeParams::reference();
    let tau = sector_threshold(p.mu_v);
    run(
        2000,
        (-100i64..100, -4.0f64..4.0, 0.0001f64..3.0, any::<bool>(), -1.0f64..=1.0, any::<bool>()),
        |(n, x, excess, neg, slope, flip)| {
            let y = if neg { -(tau + excess) } else { tau + excess };
            let v = TangentVector::new(slope * p.mu_v, if flip { -1.0 } else { 1.0 });
            let m = check_sector_point(&seq, n, Point2::new(x, y), v, &p, Direction::BackwardStable)
                .expect("vector in sector");
            prop_assert!(m.sector_margin > 0.0, "margin {} at y = {y}", m.sector_margin);
            Ok(())
        },
    )
}

pub fn refinement_nests() -> Result<u32, String> {
    let g = geometry();
    let seq = g.sequence();
    let refiner = Refiner::new(&g, &seq);
    let nu = derive_contraction(&ConeParams::reference()).expect("reference").nu_v;
    run(
        150,
        (-20i64..20, proptest::collection::vec(1u8..=2, 2..6), any::<bool>()),
        |(n, word, vertical)| {
            let (outer, inner) = if vertical {
                (
                    refiner.vertical(n, &word[..word.len() - 1]).expect("admissible"),
                    refiner.vertical(n, &word).expect("admissible"),
                )
            } else {
                (
                    refiner.horizontal(n, &word[1..]).expect("admissible"),
                    refiner.horizontal(n, &word).expect("admissible"),
                )
            };
            prop_assert!(strip_width(&inner) < strip_width(&outer));
            prop_assert!(intersects_fully(&inner, &outer, 1e-7).expect("same orientation"));
            // one more symbol at the far end: ratio against the strip one step later
            let parent = if vertical {
                refiner.vertical(n + 1, &word[1..]).expect("admissible")
            } else {
                refiner.horizontal(n - 1, &word[..word.len() - 1]).expect("admissible")
            };
            prop_assert!(strip_width(&inner) / strip_width(&parent) <= nu);
            Ok(())
        },
    )
}

fn cloud(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Point2>> {
    proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| Point2::new(x, y)), len)
}

pub fn hausdorff_brute_force() -> Result<u32, String> {
    run(300, (cloud(1..60), cloud(1..60)), |(a, b)| {
        let slow = a
            .iter()
            .map(|p| b.iter().map(|q| p.dist(*q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        prop_assert_eq!(directed_hausdorff(&a, &b).expect("nonempty"), slow);
        prop_assert_eq!(directed_hausdorff(&a, &a).expect("nonempty"), 0.0);
        Ok(())
    })
}

pub fn toy_conjugacy() -> Result<u32, String> {
    let toy = AffineHorseshoe::two_strip();
    let refiner = Refiner::new(&toy, &toy);
    run(
        200,
        (proptest::collection::vec(1u8..=2, 3), proptest::collection::vec(1u8..=2, 5)),
        |(past, future)| {
            let it = Itinerary::new(0, past, future);
            // f(z) and the shifted point share a cylinder box, so the residual
            // is at most its diagonal.
            let r = refiner.conjugacy_residual(&it, 3).expect("admissible");
            let next = refiner
                .itinerary_to_point(&shift_word(&it).expect("shiftable").truncate(3, 4).expect("long enough"))
                .expect("admissible");
            prop_assert!(r <= std::f64::consts::SQRT_2 * next.err_bound + 1e-12, "residual {r}");
            let z = refiner.itinerary_to_point(&it).expect("admissible");
            prop_assert!(StripLayout::domain(&toy, 0).contains(z.point, 1e-12));
            Ok(())
        },
    )
}

pub fn config_round_trip() -> Result<u32, String> {
    run(
        300,
        (9.5f64..20.0, 0.0f64..1.0, -500i64..0, 0i64..500, 2usize..1000, 1usize..12),
        |(a, e, lo, hi, grid, depth)| {
            let c = RunConfig {
                a_star: a,
                epsilon: e,
                n_min: lo,
                n_max: hi,
                grid,
                depth,
                ..RunConfig::default()
            };
            let back = RunConfig::from_toml_str(&c.to_toml()).expect("parses");
            prop_assert_eq!(back, c);
            Ok(())
        },
    )
}
