//! Approximates the invariant set at one time slice and checks it against
//! lattice points whose orbits stay in the strips.

use horseshoe::henon::build_geometry;
use horseshoe::invariant::{approximate_lambda, brute_force_survivors, compare_with_survivors, SurvivorOptions};
use horseshoe::map::HenonParams;
use horseshoe::symbolic::Refiner;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = build_geometry(HenonParams::reference())?;
    let seq = g.sequence();
    let refiner = Refiner::new(&g, &seq);

    let lambda = approximate_lambda(&refiner, 0, 4)?;
    println!("{} symbolic points, largest error bound {:.3e}", lambda.points.len(), lambda.max_err());
    for p in lambda.points.iter().take(3) {
        println!("  {} ({:.6}, {:.6})", p.word, p.point.x, p.point.y);
    }

    let opts = SurvivorOptions {
        adaptive: true,
        ..SurvivorOptions::default()
    };
    let cloud = brute_force_survivors(&g, &seq, 0, 4, 1024, opts)?;
    println!("seed lattice survivors per window: {:?}", cloud.uniform_counts);
    let a = compare_with_survivors(&lambda, &cloud)?;
    println!(
        "symbolic -> survivors {:.3e}, survivors -> symbolic {:.3e}, threshold {:.3e}: {}",
        a.symbolic_to_survivor,
        a.survivor_to_symbolic,
        a.threshold,
        if a.pass { "agree" } else { "disagree" }
    );
    Ok(())
}
