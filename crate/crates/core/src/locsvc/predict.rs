//! Position predictors used by location servers.

use super::{LocError, LocationRecord};
use crate::geom::{Square, Vec2};

fn elapsed(record: &LocationRecord, t_now: f64) -> Result<f64, LocError> {
    let dt = t_now - record.timestamp;
    if dt < 0.0 || dt.is_nan() {
        return Err(LocError::NegativeElapsed {
            recorded: record.timestamp,
            now: t_now,
        });
    }
    Ok(dt)
}

/// Last recorded position extrapolated with the last recorded velocity,
/// clamped to `area`.
pub fn predict_linear(record: &LocationRecord, t_now: f64, area: &Square) -> Result<Vec2, LocError> {
    let dt = elapsed(record, t_now)?;
    Ok(area.clamp(record.position + record.velocity * dt))
}

/// Exponential smoothing of the velocity: `alpha * v_bar_old + (1 - alpha) * v_rec`.
pub fn update_avg_velocity(v_bar_old: Vec2, v_rec: Vec2, alpha: f64) -> Result<Vec2, LocError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LocError::AlphaOutOfRange(alpha));
    }
    Ok(v_bar_old * alpha + v_rec * (1.0 - alpha))
}

/// Last recorded position extrapolated with a smoothed velocity, clamped to `area`.
pub fn predict_avg(
    record: &LocationRecord,
    v_bar_new: Vec2,
    t_now: f64,
    area: &Square,
) -> Result<Vec2, LocError> {
    let dt = elapsed(record, t_now)?;
    Ok(area.clamp(record.position + v_bar_new * dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RegionId;
    use crate::NodeId;
    use proptest::prelude::*;

    fn area() -> Square {
        Square::new(Vec2::ZERO, 1000.0)
    }

    fn rec(pos: (f64, f64), vel: (f64, f64), t: f64) -> LocationRecord {
        LocationRecord {
            subject: NodeId(1),
            position: Vec2::new(pos.0, pos.1),
            velocity: Vec2::new(vel.0, vel.1),
            timestamp: t,
            region: RegionId::new(0, 0, 0),
        }
    }

    #[test]
    fn linear_examples() {
        let r = rec((100.0, 200.0), (5.0, -10.0), 10.0);
        assert_eq!(predict_linear(&r, 14.0, &area()).unwrap(), Vec2::new(120.0, 160.0));
        assert_eq!(predict_linear(&r, 10.0, &area()).unwrap(), r.position);
        let edge = rec((990.0, 500.0), (10.0, 0.0), 0.0);
        assert_eq!(predict_linear(&edge, 5.0, &area()).unwrap(), Vec2::new(1000.0, 500.0));
        assert!(matches!(
            predict_linear(&r, 9.0, &area()),
            Err(LocError::NegativeElapsed { .. })
        ));
    }

    #[test]
    fn smoothing_examples() {
        let v = update_avg_velocity(Vec2::new(2.0, 2.0), Vec2::new(4.0, 0.0), 0.5).unwrap();
        assert_eq!(v, Vec2::new(3.0, 1.0));
        let old = Vec2::new(-7.25, 3.5);
        let rec_v = Vec2::new(1.125, 9.0);
        assert_eq!(update_avg_velocity(old, rec_v, 0.0).unwrap(), rec_v);
        assert_eq!(update_avg_velocity(old, rec_v, 1.0).unwrap(), old);
        assert_eq!(update_avg_velocity(old, rec_v, 1.5), Err(LocError::AlphaOutOfRange(1.5)));
        assert!(update_avg_velocity(old, rec_v, -0.1).is_err());
    }

    #[test]
    fn avg_examples() {
        let r = rec((0.0, 0.0), (9.0, 9.0), 2.0);
        assert_eq!(predict_avg(&r, Vec2::new(1.0, 2.0), 5.0, &area()).unwrap(), Vec2::new(3.0, 6.0));
        assert_eq!(predict_avg(&r, Vec2::ZERO, 50.0, &area()).unwrap(), r.position);
        let v0 = update_avg_velocity(Vec2::new(3.0, -3.0), r.velocity, 0.0).unwrap();
        assert_eq!(
            predict_avg(&r, v0, 7.5, &area()).unwrap(),
            predict_linear(&r, 7.5, &area()).unwrap()
        );
        assert!(predict_avg(&r, Vec2::ZERO, 1.0, &area()).is_err());
    }

    fn any_record() -> impl Strategy<Value = LocationRecord> {
        (0.0..1000.0f64, 0.0..1000.0f64, -50.0..50.0f64, -50.0..50.0f64, 0.0..300.0f64).prop_map(
            |(x, y, vx, vy, t)| LocationRecord {
                subject: NodeId(3),
                position: Vec2::new(x, y),
                velocity: Vec2::new(vx, vy),
                timestamp: t,
                region: RegionId::new(0, 0, 0),
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn avg_with_zero_alpha_is_linear(
            r in any_record(),
            old in (-50.0..50.0f64, -50.0..50.0f64),
            dt in 0.0..100.0f64,
        ) {
            let v = update_avg_velocity(Vec2::new(old.0, old.1), r.velocity, 0.0).unwrap();
            let t = r.timestamp + dt;
            prop_assert_eq!(predict_avg(&r, v, t, &area()).unwrap(), predict_linear(&r, t, &area()).unwrap());
        }

        #[test]
        fn zero_elapsed_is_identity(r in any_record(), v in (-50.0..50.0f64, -50.0..50.0f64)) {
            prop_assert_eq!(predict_linear(&r, r.timestamp, &area()).unwrap(), r.position);
            prop_assert_eq!(predict_avg(&r, Vec2::new(v.0, v.1), r.timestamp, &area()).unwrap(), r.position);
        }

        #[test]
        fn predictions_stay_in_area(r in any_record(), dt in 0.0..1000.0f64) {
            prop_assert!(area().contains(predict_linear(&r, r.timestamp + dt, &area()).unwrap()));
        }
    }
}
