//! The square domain, its four strips and the inequalities that make them
//! well placed.

use horseshoe::henon::{build_geometry, check_domain_inequalities, separation_bounds, strip_separation_check};
use horseshoe::map::HenonParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = HenonParams::reference();
    let g = build_geometry(params)?;
    println!("R = {:.6}, worst boundary slope {:.6}", g.r, g.global_slope_bound());

    let kp = g.key_points(0);
    for (i, p) in kp.p.iter().enumerate() {
        println!("p{} = ({:.6}, {:.6})", i + 1, p.x, p.y);
    }
    for (s, v) in g.v_strips(0).iter().enumerate() {
        println!("V{} at n = 0: x in [{:.4}, {:.4}] on y = 0", s + 1, v.lower.eval(0.0), v.upper.eval(0.0));
    }

    let mut report = check_domain_inequalities(&params, -10..=10);
    for n in -10..=10 {
        report.extend(strip_separation_check(&params, g.mu_v, n));
    }
    println!("{} inequalities, all hold: {}, min margin {:.3e}", report.rows.len(), report.pass(), report.min_margin());

    let b = separation_bounds(&params, g.mu_v);
    println!("sup xbar2 = {:.4} < inf x2 = {:.4}", b.xbar2_sup, b.x2_inf);

    // Below the verified regime the inner parabolas leave the square.
    match build_geometry(HenonParams::new(8.0, 0.1)?) {
        Ok(_) => println!("A* = 8 builds"),
        Err(e) => println!("A* = 8: {e}"),
    }
    Ok(())
}
