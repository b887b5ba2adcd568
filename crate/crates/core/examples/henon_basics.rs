//! The nonautonomous Hénon family: evaluation, inverse, Jacobians, and the
//! forcing term dipping below the autonomous horseshoe threshold.

use horseshoe::map::{henon_sequence, jacobian_fd, HenonParams, MapSequence, Point2};
use horseshoe::report::commands::autonomous_threshold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = HenonParams::reference();
    let seq = henon_sequence(params)?;

    let p = Point2::new(0.3, -1.2);
    for n in [-2, 0, 3] {
        let q = seq.forward(n, p);
        let back = seq.inverse(n, q);
        println!(
            "n = {n:2}: A = {:.6}, f(p) = ({:.6}, {:.6}), round trip error {:.1e}",
            params.eval_a(n),
            q.x,
            q.y,
            back.dist(p)
        );
    }

    let exact = seq.jacobian_fwd(0, Point2::new(1.0, 2.0));
    let fd = jacobian_fd(&seq, 0, Point2::new(1.0, 2.0), 1e-5)?;
    println!("det Df = {}, finite-difference gap {:.1e}", exact.det(), exact.max_abs_diff(&fd));

    // cos(n) comes arbitrarily close to -1 on the integers.
    let (n, a) = (-1000..=1000)
        .map(|n| (n, params.eval_a(n)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    println!("min A(n) over |n| <= 1000: {a:.6} at n = {n}, vs {:.6}", autonomous_threshold());
    Ok(())
}
