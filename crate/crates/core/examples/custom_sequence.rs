//! Plugging in other dynamics: a hand-written map sequence checked against
//! finite differences, and a three-strip affine horseshoe run through the
//! same refinement machinery as the Hénon family.

use horseshoe::cone::{check_a3_grid, ConeParams};
use horseshoe::geometry::DomainBox;
use horseshoe::map::{jacobian_fd, MapSequence, Mat2, Point2};
use horseshoe::symbolic::{Itinerary, Refiner, TransitionMatrixSeq};
use horseshoe::toy::AffineHorseshoe;

/// Standard-map style kick whose strength alternates with time.
struct Kicked;

impl Kicked {
    fn k(n: i64) -> f64 {
        if n.rem_euclid(2) == 0 { 1.2 } else { 0.8 }
    }
}

impl MapSequence for Kicked {
    fn forward(&self, n: i64, p: Point2) -> Point2 {
        let y = p.y + Self::k(n) * p.x.sin();
        Point2::new(p.x + y, y)
    }

    fn inverse(&self, n: i64, p: Point2) -> Point2 {
        let x = p.x - p.y;
        Point2::new(x, p.y - Self::k(n) * x.sin())
    }

    fn jacobian_fwd(&self, n: i64, p: Point2) -> Mat2 {
        let c = Self::k(n) * p.x.cos();
        Mat2::new(1.0 + c, 1.0, c, 1.0)
    }

    fn jacobian_inv(&self, n: i64, p: Point2) -> Mat2 {
        let c = Self::k(n) * (p.x - p.y).cos();
        Mat2::new(1.0, -1.0, -c, 1.0 + c)
    }

    fn domain(&self, _n: i64) -> DomainBox {
        DomainBox::square(std::f64::consts::PI)
    }

    fn globally_invertible(&self) -> bool {
        true
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Point2::new(0.7, -0.4);
    for n in 0..2 {
        let q = Kicked.forward(n, p);
        let fd = jacobian_fd(&Kicked, n, p, 1e-5)?;
        let fd_inv = jacobian_fd(&InverseOf(&Kicked), n, q, 1e-5)?;
        println!(
            "n = {n}: round trip {:.1e}, jacobian gap {:.1e}, inverse jacobian gap {:.1e}, det {:.12}",
            Kicked.inverse(n, q).dist(p),
            Kicked.jacobian_fwd(n, p).max_abs_diff(&fd),
            Kicked.jacobian_inv(n, q).max_abs_diff(&fd_inv),
            Kicked.jacobian_fwd(n, p).det()
        );
    }

    let toy = AffineHorseshoe::new(4.0, vec![0.0, 0.375, 0.75])?;
    let matrices = TransitionMatrixSeq::compute(&toy, 0..=3);
    println!("three-strip toy: A = {}, {} words of length 4", matrices.matrix(0).unwrap(), matrices.count_words(0, 4)?);
    let refiner = Refiner::new(&toy, &toy);
    let it = Itinerary::parse("31.2213", 0)?;
    let z = refiner.itinerary_to_point(&it)?;
    println!("{it} -> ({:.6}, {:.6})", z.point.x, z.point.y);
    let cones = ConeParams::new(0.5, 0.5, 0.6)?;
    let a3 = check_a3_grid(&toy, &toy, 0, 16, &cones)?;
    println!("sector margin {:.4}, expansion {:.4}", a3.worst_sector_margin, a3.worst_expansion_ratio);
    Ok(())
}

/// Presents `f_n^{-1}` as a sequence so finite differences can check its Jacobian.
struct InverseOf<'a, M>(&'a M);

impl<M: MapSequence> MapSequence for InverseOf<'_, M> {
    fn forward(&self, n: i64, p: Point2) -> Point2 {
        self.0.inverse(n, p)
    }
    fn inverse(&self, n: i64, p: Point2) -> Point2 {
        self.0.forward(n, p)
    }
    fn jacobian_fwd(&self, n: i64, p: Point2) -> Mat2 {
        self.0.jacobian_inv(n, p)
    }
    fn jacobian_inv(&self, n: i64, p: Point2) -> Mat2 {
        self.0.jacobian_fwd(n, p)
    }
    fn domain(&self, n: i64) -> DomainBox {
        self.0.domain(n)
    }
}
