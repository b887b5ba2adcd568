//! Lipschitz curves, strips, and the crossing of a vertical curve with a
//! horizontal one.

use horseshoe::geometry::{curve_intersection, intersects_fully, nested_limit, Interval, LipschitzCurve, Orientation, Strip};
use horseshoe::map::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let iv = Interval::new(-1.0, 1.0)?;

    // x = 0.2·y + 0.1 and a tent-shaped y(x) through three knots.
    let v = LipschitzCurve::affine(Orientation::Vertical, iv, 0.2, 0.1)?;
    let h = LipschitzCurve::piecewise_linear(Orientation::Horizontal, vec![-1.0, 0.0, 1.0], vec![0.2, -0.1, 0.3], 0.4)?;
    let p = curve_intersection(&v, &h)?;
    println!("crossing at ({:.12}, {:.12})", p.x, p.y);
    println!("slope bounds: {} and {}", v.lipschitz_bound, h.lipschitz_bound);

    // Three nested vertical strips around x = 0.
    let band = |half: f64| -> Result<Strip, Box<dyn std::error::Error>> {
        let lo = LipschitzCurve::affine(Orientation::Vertical, iv, 0.1, -half)?;
        let hi = LipschitzCurve::affine(Orientation::Vertical, iv, 0.1, half)?;
        Ok(Strip::new(lo, hi)?)
    };
    let strips = vec![band(0.5)?, band(0.25)?, band(0.125)?];
    for (i, s) in strips.iter().enumerate() {
        println!("strip {i}: width {:.4}, contains origin {}", s.width(64), s.contains(Point2::new(0.0, 0.0), 0.0));
    }
    println!("second inside first: {}", intersects_fully(&strips[1], &strips[0], 1e-12)?);
    let limit = nested_limit(&strips)?;
    println!("limit curve at y = 0.5: x = {:.4} (within {:.3})", limit.curve.eval(0.5), limit.error_bound);
    Ok(())
}
