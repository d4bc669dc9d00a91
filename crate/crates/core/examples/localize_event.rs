//! Triangulates one event from three noisy DoA readings and reports how well
//! each sensor's axis agrees with the estimate.

use avcal::geom::{localize_event, per_sensor_consistency, Angle, Position2D, SensorPose};

fn main() -> avcal::Result<()> {
    let event = Position2D::new(2.0, 3.0);
    let sensors = [
        SensorPose::acoustic(Position2D::new(0.5, 0.5), Angle::from_degrees(30.0)),
        SensorPose::acoustic(Position2D::new(5.0, 1.0), Angle::from_degrees(120.0)),
        SensorPose::acoustic(Position2D::new(4.5, 6.0), Angle::from_degrees(-100.0)),
    ];
    let errors_deg = [0.5, -1.0, 0.3];

    let bearings: Vec<Angle> = sensors
        .iter()
        .zip(errors_deg)
        .map(|(s, e)| s.bearing(s.local_doa_to(event) + Angle::from_degrees(e)))
        .collect();
    for (s, b) in sensors.iter().zip(&bearings) {
        println!(
            "sensor at ({:.1}, {:.1}): local DoA {:7.2} deg, bearing {:7.2} deg",
            s.position.x,
            s.position.y,
            (*b - s.orientation).degrees(),
            b.degrees()
        );
    }

    let (estimate, spread) = localize_event(&sensors, &bearings)?;
    println!(
        "estimate ({:.3}, {:.3}), error {:.3} m, intersection spread {:.3} m",
        estimate.x,
        estimate.y,
        estimate.distance(event),
        spread
    );
    for (i, c) in per_sensor_consistency(&sensors, &bearings, estimate)?.iter().enumerate() {
        println!("sensor {i}: mean intersection distance {c:.3} m");
    }
    Ok(())
}
