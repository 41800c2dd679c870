use super::{GeometryError, Pixel, Point2};
use crate::Scalar;

/// Principal axes of a pixel set.
///
/// `dir1` carries the larger variance. Each direction has non-negative x, or
/// non-negative y when x is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaAxes<T> {
    pub center: Point2<T>,
    pub dir1: Point2<T>,
    pub dir2: Point2<T>,
    pub var1: T,
    pub var2: T,
}

fn orient<T: Scalar>(d: Point2<T>) -> Point2<T> {
    let tol = T::lit(1e-12);
    if d.x > tol || (d.x.abs() <= tol && d.y >= T::zero()) {
        d
    } else {
        Point2::new(-d.x, -d.y)
    }
}

/// Population covariance PCA of integer pixel coordinates.
///
/// Second moments are accumulated exactly in integers relative to the first
/// pixel, so the axes are bit-identical for any integer translation of the set.
pub fn pca_axes<T: Scalar>(pixels: &[Pixel]) -> Result<PcaAxes<T>, GeometryError> {
    let Some(&origin) = pixels.first() else {
        return Err(GeometryError::DegenerateCluster);
    };
    let n = pixels.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for p in pixels {
        let x = (p.x - origin.x) as i128;
        let y = (p.y - origin.y) as i128;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    // n^2 * covariance, exact.
    let a = n * sxx - sx * sx;
    let c = n * syy - sy * sy;
    let b = n * sxy - sx * sy;
    if a == 0 && c == 0 {
        return Err(GeometryError::DegenerateCluster);
    }

    let to_t = |v: i128| T::from_i128(v).expect("moment fits the scalar range");
    let n2 = to_t(n * n);
    let (af, bf, cf) = (to_t(a), to_t(b), to_t(c));
    let half = T::lit(0.5);
    let mean = (af + cf) * half;
    let radius = (((af - cf) * half).powi(2) + bf * bf).sqrt();
    let l1 = mean + radius;
    let l2 = (mean - radius).max(T::zero());

    let dir1 = if b == 0 {
        if a >= c {
            Point2::new(T::one(), T::zero())
        } else {
            Point2::new(T::zero(), T::one())
        }
    } else {
        // Two algebraically equivalent eigenvector forms; take the better conditioned.
        let u = Point2::new(l1 - cf, bf);
        let v = Point2::new(bf, l1 - af);
        let pick = if u.norm() >= v.norm() { u } else { v };
        pick.normalized().expect("non-zero eigenvector")
    };
    let dir1 = orient(dir1);
    let dir2 = orient(Point2::new(-dir1.y, dir1.x));

    let center = Point2::new(
        T::from_count(origin.x as i64) + to_t(sx) / to_t(n),
        T::from_count(origin.y as i64) + to_t(sy) / to_t(n),
    );
    Ok(PcaAxes { center, dir1, dir2, var1: l1 / n2, var2: l2 / n2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(v: &[(i32, i32)]) -> Vec<Pixel> {
        v.iter().map(|&(x, y)| Pixel::new(x, y)).collect()
    }

    #[test]
    fn collinear_points() {
        let pts: Vec<Pixel> = (0..10).map(|x| Pixel::new(x, 0)).collect();
        let axes = pca_axes::<f64>(&pts).unwrap();
        assert_eq!(axes.dir1, Point2::new(1.0, 0.0));
        assert_eq!(axes.dir2, Point2::new(0.0, 1.0));
        assert_eq!(axes.var2, 0.0);
        // population variance of 0..9
        assert!((axes.var1 - 8.25).abs() < 1e-12);
        assert_eq!(axes.center, Point2::new(4.5, 0.0));
    }

    #[test]
    fn rectangle_10x2() {
        let pts: Vec<Pixel> = (0..2).flat_map(|y| (0..10).map(move |x| Pixel::new(x, y))).collect();
        let axes = pca_axes::<f32>(&pts).unwrap();
        assert_eq!(axes.dir1, Point2::new(1.0, 0.0));
        assert_eq!(axes.dir2, Point2::new(0.0, 1.0));
        assert!(axes.var1 > axes.var2);
    }

    #[test]
    fn repeated_point_is_degenerate() {
        assert_eq!(pca_axes::<f64>(&px(&[(3, 3), (3, 3)])), Err(GeometryError::DegenerateCluster));
        assert_eq!(pca_axes::<f64>(&[]), Err(GeometryError::DegenerateCluster));
    }

    #[test]
    fn diagonal_line_and_orthonormality() {
        let pts: Vec<Pixel> = (0..20).map(|i| Pixel::new(i, -i)).collect();
        let axes = pca_axes::<f64>(&pts).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((axes.dir1.x - s).abs() < 1e-12 && (axes.dir1.y + s).abs() < 1e-12);
        assert!(axes.dir1.dot(axes.dir2).abs() <= 1e-9);
        assert!((axes.dir2.norm() - 1.0).abs() <= 1e-9);
        assert!(axes.dir2.x >= 0.0);
    }

    #[test]
    fn translation_is_exact() {
        let pts = px(&[(0, 0), (3, 1), (5, 4), (2, 7), (9, 2)]);
        let moved: Vec<Pixel> = pts.iter().map(|p| p.offset(117, -40)).collect();
        let a = pca_axes::<f64>(&pts).unwrap();
        let b = pca_axes::<f64>(&moved).unwrap();
        assert_eq!((a.dir1, a.dir2, a.var1, a.var2), (b.dir1, b.dir2, b.var1, b.var2));
    }
}
