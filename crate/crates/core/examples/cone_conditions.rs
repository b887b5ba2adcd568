//! Strip mapping and sector conditions at a few times, plus the contraction
//! rate they imply.

use horseshoe::cone::{check_a1, check_a3_grid, derive_contraction, measure_contraction, ConeParams};
use horseshoe::henon::build_geometry;
use horseshoe::map::HenonParams;
use horseshoe::symbolic::Refiner;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = build_geometry(HenonParams::reference())?;
    let seq = g.sequence();
    let refiner = Refiner::new(&g, &seq);
    let cones = ConeParams::reference();

    let nu = derive_contraction(&cones)?;
    println!("nu = {:.6}", nu.nu_v);

    for n in [-1, 0, 3] {
        let a1 = check_a1(&seq, &g, n, 400);
        let a3 = check_a3_grid(&seq, &g, n, 64, &cones)?;
        let m = measure_contraction(&refiner, n, 3)?;
        println!(
            "n = {n:2}: strips map {}, sector margin {:.4}, expansion {:.4}, min |y| {:.4} > {:.4}, width ratio {:.4}",
            if a1.pass { "ok" } else { "FAIL" },
            a3.worst_sector_margin,
            a3.worst_expansion_ratio,
            a3.grid_min_abs_y,
            a3.threshold_y,
            m.max_ratio
        );
    }

    // mu must sit strictly between mu_v and 1 - mu_h·mu_v.
    let tight = ConeParams::new(0.615, 0.615, 0.615)?;
    if let Err(e) = derive_contraction(&tight) {
        println!("{e}");
    }
    Ok(())
}
