use super::{deg_to_rad, GeometryError, Pixel, PixelSet, Point2};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationSense {
    /// On screen (y down): `(1, 0)` rotated by 90 degrees becomes `(0, 1)`.
    #[default]
    Clockwise,
    CounterClockwise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySweep<T> {
    pub sense: RotationSense,
    pub max_sweep_deg: T,
    pub step_deg: T,
}

impl<T: Scalar> Default for RaySweep<T> {
    fn default() -> Self {
        RaySweep { sense: RotationSense::Clockwise, max_sweep_deg: T::lit(180.0), step_deg: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit<T> {
    /// First ray sample whose containing pixel is in the target.
    pub point: Point2<T>,
    pub pixel: Pixel,
    /// Containing pixel of the last sample before the hit that lies in a
    /// different pixel; `None` when the pivot itself is a target pixel.
    pub before: Option<Pixel>,
    pub sweep_deg: T,
}

const MARCH_STEP: f64 = 0.5;

/// Sweeps a ray around `pivot` from `start_dir` in `step_deg` increments
/// until it meets a pixel of `target` inside a `width`x`height` image.
///
/// At each angle the ray is marched in half-pixel steps from the pivot to the
/// image border. Returns `Ok(None)` if the sweep is exhausted.
pub fn rotate_ray_to_target<T: Scalar>(
    pivot: Pixel,
    start_dir: Point2<T>,
    target: &PixelSet,
    width: usize,
    height: usize,
    sweep: RaySweep<T>,
) -> Result<Option<RayHit<T>>, GeometryError> {
    if !(sweep.step_deg > T::zero() && sweep.step_deg <= T::lit(5.0)) {
        return Err(GeometryError::InvalidSweep(format!("step {} outside (0, 5]", sweep.step_deg)));
    }
    if !(sweep.max_sweep_deg > T::zero() && sweep.max_sweep_deg <= T::lit(360.0)) {
        return Err(GeometryError::InvalidSweep(format!("max sweep {} outside (0, 360]", sweep.max_sweep_deg)));
    }
    let start = start_dir.normalized().ok_or_else(|| GeometryError::InvalidSweep("zero start direction".into()))?;
    if target.is_empty() {
        return Ok(None);
    }

    let in_bounds = |p: Pixel| p.x >= 0 && p.y >= 0 && (p.x as usize) < width && (p.y as usize) < height;
    let steps = (sweep.max_sweep_deg / sweep.step_deg + T::lit(1e-9)).floor().to_i64().unwrap_or(0);
    let half = T::lit(MARCH_STEP);
    for k in 0..=steps {
        let deg = sweep.step_deg * T::from_count(k);
        let theta = match sweep.sense {
            RotationSense::Clockwise => deg_to_rad(deg),
            RotationSense::CounterClockwise => -deg_to_rad(deg),
        };
        let (s, c) = theta.sin_cos();
        let dir = Point2::new(start.x * c - start.y * s, start.x * s + start.y * c);

        let mut before = None;
        let mut last = None;
        for m in 0i64.. {
            let offset = dir * (half * T::from_count(m));
            let rel = offset.containing_pixel().expect("finite sample");
            let p = Pixel::new(pivot.x + rel.x, pivot.y + rel.y);
            if !in_bounds(p) {
                break;
            }
            if target.contains(p) {
                return Ok(Some(RayHit { point: pivot.center::<T>() + offset, pixel: p, before, sweep_deg: deg }));
            }
            if last != Some(p) {
                before = Some(p);
                last = Some(p);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(v: &[(i32, i32)]) -> PixelSet {
        PixelSet::from_pixels(&v.iter().map(|&(x, y)| Pixel::new(x, y)).collect::<Vec<_>>())
    }

    /// Independent ray-march oracle: first angle (on the step grid) whose
    /// march from the pivot reaches the target pixel.
    fn oracle_first_angle(pivot: (f64, f64), start: f64, goal: (i32, i32), w: i32, h: i32) -> Option<f64> {
        for k in 0..=180 {
            let a = (start + k as f64).to_radians();
            let (dx, dy) = (a.cos(), a.sin());
            let mut t = 0.0;
            loop {
                let (x, y) = ((pivot.0 + t * dx + 0.5).floor() as i32, (pivot.1 + t * dy + 0.5).floor() as i32);
                if x < 0 || y < 0 || x >= w || y >= h {
                    break;
                }
                if (x, y) == goal {
                    return Some(k as f64);
                }
                t += 0.5;
            }
        }
        None
    }

    #[test]
    fn quarter_turn_to_pixel_below() {
        let t = target(&[(0, 5)]);
        let hit = rotate_ray_to_target(Pixel::new(0, 0), Point2::new(1.0f64, 0.0), &t, 20, 20, RaySweep::default())
            .unwrap()
            .unwrap();
        assert_eq!(hit.pixel, Pixel::new(0, 5));
        let expected = oracle_first_angle((0.0, 0.0), 0.0, (0, 5), 20, 20).unwrap();
        assert_eq!(hit.sweep_deg, expected);
        assert!(hit.sweep_deg > 80.0 && hit.sweep_deg <= 90.0, "{}", hit.sweep_deg);
        assert_eq!(hit.before, Some(Pixel::new(0, 4)));
    }

    #[test]
    fn counter_clockwise_goes_up() {
        let t = target(&[(10, 2)]);
        let hit = rotate_ray_to_target(
            Pixel::new(10, 10),
            Point2::new(1.0f64, 0.0),
            &t,
            20,
            20,
            RaySweep { sense: RotationSense::CounterClockwise, ..RaySweep::default() },
        )
        .unwrap()
        .unwrap();
        assert_eq!(hit.pixel, Pixel::new(10, 2));
        assert!(hit.sweep_deg > 80.0 && hit.sweep_deg <= 90.0);
    }

    #[test]
    fn empty_target_misses_and_on_ray_hits_at_zero() {
        let empty = target(&[]);
        assert_eq!(
            rotate_ray_to_target(Pixel::new(0, 0), Point2::new(1.0f64, 0.0), &empty, 8, 8, RaySweep::default()),
            Ok(None)
        );
        let t = target(&[(6, 3)]);
        let hit = rotate_ray_to_target(Pixel::new(1, 3), Point2::new(1.0f64, 0.0), &t, 8, 8, RaySweep::default())
            .unwrap()
            .unwrap();
        assert_eq!((hit.pixel, hit.sweep_deg), (Pixel::new(6, 3), 0.0));
        // first half-pixel sample whose containing pixel is (6, 3)
        assert_eq!(hit.point, Point2::new(5.5, 3.0));
    }

    #[test]
    fn sweep_exhaustion_and_bounds() {
        // target directly behind the start ray is never reached within 90 degrees
        let t = target(&[(0, 5)]);
        let sweep = RaySweep { max_sweep_deg: 90.0, ..RaySweep::default() };
        assert_eq!(rotate_ray_to_target(Pixel::new(5, 5), Point2::new(1.0f64, 0.0), &t, 10, 10, sweep), Ok(None));
        for (step, max) in [(0.0, 90.0), (6.0, 90.0), (1.0, 0.0), (1.0, 361.0)] {
            let sweep = RaySweep { sense: RotationSense::Clockwise, step_deg: step, max_sweep_deg: max };
            assert!(matches!(
                rotate_ray_to_target(Pixel::new(0, 0), Point2::new(1.0f64, 0.0), &t, 10, 10, sweep),
                Err(GeometryError::InvalidSweep(_))
            ));
        }
    }
}
