//! Shapes, dilation areas and the line-of-sight predicate.

use collabsense::geometry::{
    minkowski_segment_dilation_area, segment_dilation_area_along, segment_shape_intersects, ConvexShape, PlacedShape,
    Point2, Segment,
};

fn main() -> collabsense::Result<()> {
    let car = ConvexShape::rect(4.8, 1.8, 0.0)?;
    let pole = ConvexShape::disc(1.67)?;
    println!("car area {:.2} m², perimeter {:.2} m", car.area(), car.perimeter());
    println!("disc area {:.2} m²", pole.area());

    // Area swept by a 50 m sight line: any object centered here blocks it.
    for shape in [pole, car] {
        let iso = minkowski_segment_dilation_area(50.0, &shape)?;
        let along = segment_dilation_area_along(50.0, 0.0, &shape)?;
        println!("{shape:?}: isotropic {iso:.1} m², along x {along:.1} m²");
    }

    let blocker = PlacedShape::new(Point2::new(20.0, 0.5), car);
    let sensor = Point2::ORIGIN;
    for target in [Point2::new(40.0, 0.0), Point2::new(40.0, 6.0), Point2::new(17.6, 0.5)] {
        let seg = Segment::new(sensor, target);
        let blocked = segment_shape_intersects(&seg, &blocker, target);
        println!(
            "sight line to ({:>4.1}, {:>3.1}): {}",
            target.x,
            target.y,
            if blocked { "blocked" } else { "clear" }
        );
    }
    Ok(())
}
