//! Poisson sampling, thinning, hard-core lanes and displacement.

use collabsense::geometry::Point2;
use collabsense::pointprocess::{displace, sample_hppp, sample_matern_lane, thin, Seed, Window};

fn main() -> collabsense::Result<()> {
    let root = Seed::new(42, 0);
    let w = Window::centered(100.0, 0.0)?;
    let pts = sample_hppp(0.01, &w, root.child(0))?;
    println!(
        "HPPP λ=0.01 on {:.0} m²: {} points (mean {:.0})",
        w.area(),
        pts.len(),
        0.01 * w.area()
    );

    let (kept, removed) = thin(&pts, 0.2, root.child(1))?;
    println!(
        "p_s=0.2 thinning: {} sensors, {} plain objects",
        kept.len(),
        removed.len()
    );

    let lane = sample_matern_lane(1000.0, 10.0, 0.07, root.child(2))?;
    let min_gap = lane.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    println!(
        "hard-core lane: {} vehicles per km, smallest gap {min_gap:.2} m",
        lane.len()
    );

    let cars: Vec<Point2> = lane.iter().map(|&x| Point2::new(x, 2.0)).collect();
    let v = vec![Point2::new(20.0, 0.0); cars.len()];
    let later = displace(&cars, &v, 1.5)?;
    println!(
        "after 1.5 s at 20 m/s the first car moved {:.1} m",
        later[0].x - cars[0].x
    );
    Ok(())
}
