use super::{GeometryError, Pixel, PixelSet, Point2};
use crate::regions::Cluster;
use crate::Scalar;

/// Ends of the line through a cluster's centroid along a given axis.
///
/// `p1` lies on the `+axis` side and `p2` on the `-axis` side. Both are pixel
/// centers of cluster members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisEndpoints<T> {
    pub p1: Point2<T>,
    pub p2: Point2<T>,
    pub pixel1: Pixel,
    pub pixel2: Pixel,
}

const WALK_STEP: f64 = 0.5;

/// Walks from the centroid along `±axis` in half-pixel steps until the
/// outline of the cluster is reached.
///
/// When the centroid pixel belongs to the cluster, each endpoint is the last
/// member sample before the first non-member. Otherwise (e.g. a C-shaped
/// cluster) the endpoints are the first and last member samples along the
/// whole line.
pub fn extend_axis_to_outline<T: Scalar>(
    cluster: &Cluster,
    axis: Point2<T>,
) -> Result<AxisEndpoints<T>, GeometryError> {
    if cluster.pixels.len() < 2 {
        return Err(GeometryError::DegenerateCluster);
    }
    let axis = axis.normalized().ok_or(GeometryError::DegenerateCluster)?;
    let set = PixelSet::from_pixels(&cluster.pixels);

    // Integer base plus fractional offset keeps the walk exact under
    // integer translation.
    let (xmin, ymin, xmax, ymax) = cluster.bbox;
    let base = Pixel::new(xmin, ymin);
    let n = T::from_count(cluster.pixels.len() as i64);
    let (sx, sy) = cluster
        .pixels
        .iter()
        .fold((0i64, 0i64), |(sx, sy), p| (sx + (p.x - xmin) as i64, sy + (p.y - ymin) as i64));
    let offset = Point2::new(T::from_count(sx) / n, T::from_count(sy) / n);

    let step = T::lit(WALK_STEP);
    let sample = |k: i64| -> Pixel {
        let rel = (offset + axis * (T::from_count(k) * step)).containing_pixel().expect("finite sample");
        Pixel::new(base.x + rel.x, base.y + rel.y)
    };
    let reach = (((xmax - xmin) + (ymax - ymin) + 4) as f64 / WALK_STEP).ceil() as i64;
    let member = |k: i64| set.contains(sample(k));

    let (k_hi, k_lo) = if member(0) {
        let mut hi = 0;
        while hi < reach && member(hi + 1) {
            hi += 1;
        }
        let mut lo = 0;
        while lo > -reach && member(lo - 1) {
            lo -= 1;
        }
        (hi, lo)
    } else {
        let mut hits = (-reach..=reach).filter(|&k| member(k));
        let lo = hits.next().ok_or(GeometryError::RayMiss)?;
        let hi = hits.next_back().unwrap_or(lo);
        (hi, lo)
    };
    let (pixel1, pixel2) = (sample(k_hi), sample(k_lo));
    Ok(AxisEndpoints { p1: pixel1.center(), p2: pixel2.center(), pixel1, pixel2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_io::classes::CYSTIC_DUCT;

    fn cluster(pixels: Vec<Pixel>) -> Cluster {
        Cluster::from_pixels(CYSTIC_DUCT, pixels)
    }

    #[test]
    fn horizontal_line() {
        let c = cluster((3..13).map(|x| Pixel::new(x, 4)).collect());
        let e = extend_axis_to_outline(&c, Point2::new(1.0f64, 0.0)).unwrap();
        assert_eq!((e.pixel1, e.pixel2), (Pixel::new(12, 4), Pixel::new(3, 4)));
        assert_eq!(e.p1, Point2::new(12.0, 4.0));
    }

    #[test]
    fn plus_shape_vertical_axis() {
        // arms of length 4 around (10, 10)
        let mut px = vec![Pixel::new(10, 10)];
        for d in 1..=4 {
            px.extend([Pixel::new(10 + d, 10), Pixel::new(10 - d, 10), Pixel::new(10, 10 + d), Pixel::new(10, 10 - d)]);
        }
        let e = extend_axis_to_outline(&cluster(px), Point2::new(0.0f64, 1.0)).unwrap();
        assert_eq!((e.pixel1, e.pixel2), (Pixel::new(10, 14), Pixel::new(10, 6)));
    }

    #[test]
    fn c_shape_uses_outer_runs() {
        // A "C": left column x=0, rows 0..=8, plus top and bottom arms to x=6.
        let mut px: Vec<Pixel> = (0..=8).map(|y| Pixel::new(0, y)).collect();
        for x in 1..=6 {
            px.push(Pixel::new(x, 0));
            px.push(Pixel::new(x, 8));
        }
        let c = cluster(px);
        // centroid (~2.0, 4.0) is outside; the horizontal ray only meets x=0
        let e = extend_axis_to_outline(&c, Point2::new(1.0f64, 0.0)).unwrap();
        assert_eq!((e.pixel1, e.pixel2), (Pixel::new(0, 4), Pixel::new(0, 4)));
        // the vertical ray through x=2 meets both arms
        let e = extend_axis_to_outline(&c, Point2::new(0.0f64, 1.0)).unwrap();
        assert_eq!((e.pixel1, e.pixel2), (Pixel::new(2, 8), Pixel::new(2, 0)));
    }

    #[test]
    fn ray_miss() {
        // Two diagonal blobs, centroid between them; a ray perpendicular to
        // the pair misses both.
        let px = vec![Pixel::new(0, 0), Pixel::new(1, 0), Pixel::new(10, 0), Pixel::new(11, 0)];
        let c = cluster(px);
        assert_eq!(extend_axis_to_outline(&c, Point2::new(0.0f64, 1.0)), Err(GeometryError::RayMiss));
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let c = cluster(vec![Pixel::new(1, 1)]);
        assert_eq!(extend_axis_to_outline(&c, Point2::new(1.0f64, 0.0)), Err(GeometryError::DegenerateCluster));
    }
}
