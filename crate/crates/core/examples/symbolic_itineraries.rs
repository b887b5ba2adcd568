//! Transition matrices, admissible words, and the point an itinerary picks
//! out.

use horseshoe::henon::build_geometry;
use horseshoe::map::{HenonParams, MapSequence};
use horseshoe::symbolic::{itinerary_of_point, Itinerary, Refiner, TransitionMatrixSeq};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = build_geometry(HenonParams::reference())?;
    let seq = g.sequence();
    let matrices = TransitionMatrixSeq::compute(&g, -5..=5);
    println!("A^0 = {}", matrices.matrix(0).unwrap());
    for len in 1..=6 {
        print!("{} ", matrices.count_words(-3, len)?);
    }
    println!("admissible words of length 1..=6");

    let refiner = Refiner::new(&g, &seq);
    let it = Itinerary::parse("1212.12112", 0)?;
    let z = refiner.itinerary_to_point(&it)?;
    println!("{it} -> ({:.9}, {:.9}) within {:.1e}", z.point.x, z.point.y, z.err_bound);

    let back = itinerary_of_point(&g, &seq, 0, z.point, 4, 5, 1e-9).expect("stays in the strips");
    println!("read back as {back}");

    let next = seq.forward(0, z.point);
    println!("one step later: ({:.6}, {:.6})", next.x, next.y);

    let deep = Itinerary::parse("21121212.1221211212", 0)?;
    for depth in [2, 4, 8] {
        println!("conjugacy residual at depth {depth}: {:.3e}", refiner.conjugacy_residual(&deep, depth)?);
    }
    Ok(())
}
