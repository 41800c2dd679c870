use super::{GeometryError, Point2};
use crate::Scalar;

/// Four-point region of interest, polygon `a -> b -> c -> d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiQuad<T> {
    pub a: Point2<T>,
    pub b: Point2<T>,
    pub c: Point2<T>,
    pub d: Point2<T>,
    /// Set when the given order self-intersected and was replaced by a
    /// simple ordering of the same four points.
    pub degenerate_fallback_used: bool,
}

fn orientation<T: Scalar>(p: Point2<T>, q: Point2<T>, r: Point2<T>) -> i8 {
    let v = (q - p).cross(r - p);
    if v > T::zero() {
        1
    } else if v < T::zero() {
        -1
    } else {
        0
    }
}

fn on_segment<T: Scalar>(p: Point2<T>, q: Point2<T>, r: Point2<T>) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

fn segments_intersect<T: Scalar>(p1: Point2<T>, p2: Point2<T>, q1: Point2<T>, q2: Point2<T>) -> bool {
    let (o1, o2, o3, o4) =
        (orientation(p1, p2, q1), orientation(p1, p2, q2), orientation(q1, q2, p1), orientation(q1, q2, p2));
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1))
        || (o4 == 0 && on_segment(q1, q2, p2))
}

fn is_simple<T: Scalar>(v: [Point2<T>; 4]) -> bool {
    !segments_intersect(v[0], v[1], v[2], v[3]) && !segments_intersect(v[1], v[2], v[3], v[0])
}

fn signed_area<T: Scalar>(v: &[Point2<T>; 4]) -> T {
    let mut s = T::zero();
    for i in 0..4 {
        s += v[i].cross(v[(i + 1) % 4]);
    }
    s * T::lit(0.5)
}

impl<T: Scalar> RoiQuad<T> {
    /// Builds a quad, reordering the points if `a, b, c, d` self-intersects.
    pub fn new(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> Result<Self, GeometryError> {
        let given = [a, b, c, d];
        if given.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidRegion("non-finite vertex".into()));
        }
        let (v, fallback) = if is_simple(given) {
            (given, false)
        } else {
            // The three distinct cyclic orders of four points; for points in
            // convex position exactly one is simple (the hull order).
            let candidates = [[a, b, d, c], [a, c, b, d]];
            let best = candidates
                .into_iter()
                .filter(|v| is_simple(*v))
                .max_by(|p, q| signed_area(p).abs().partial_cmp(&signed_area(q).abs()).expect("finite"))
                .ok_or_else(|| GeometryError::InvalidRegion("no simple ordering (collinear points)".into()))?;
            (best, true)
        };
        if signed_area(&v) == T::zero() {
            return Err(GeometryError::InvalidRegion("zero area".into()));
        }
        Ok(RoiQuad { a: v[0], b: v[1], c: v[2], d: v[3], degenerate_fallback_used: fallback })
    }

    /// Axis-aligned quad covering every pixel center of a `width`x`height` image.
    pub fn whole_image(width: usize, height: usize) -> Self {
        let h = T::lit(0.5);
        let (w, ht) = (T::from_count(width as i64) - h, T::from_count(height as i64) - h);
        RoiQuad::new(Point2::new(-h, -h), Point2::new(w, -h), Point2::new(w, ht), Point2::new(-h, ht))
            .expect("non-empty image")
    }

    pub fn vertices(&self) -> [Point2<T>; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices()).abs()
    }

    /// Area centroid of the polygon.
    pub fn centroid(&self) -> Point2<T> {
        let v = self.vertices();
        let a = signed_area(&v);
        let (mut cx, mut cy) = (T::zero(), T::zero());
        for i in 0..4 {
            let (p, q) = (v[i], v[(i + 1) % 4]);
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let k = T::one() / (T::lit(6.0) * a);
        Point2::new(cx * k, cy * k)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let v = self.vertices();
        if v.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::InvalidRegion("non-finite vertex".into()));
        }
        if !is_simple(v) {
            return Err(GeometryError::InvalidRegion("self-intersecting".into()));
        }
        if signed_area(&v) == T::zero() {
            return Err(GeometryError::InvalidRegion("zero area".into()));
        }
        Ok(())
    }

    /// Fast containment for a quad already known to be valid.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let v = self.vertices();
        let eps = T::lit(1e-9);
        for i in 0..4 {
            let (s, e) = (v[i], v[(i + 1) % 4]);
            let len = (e - s).norm();
            if ((e - s).cross(p - s)).abs() <= eps * len.max(T::one()) && {
                let pad = eps;
                p.x >= s.x.min(e.x) - pad && p.x <= s.x.max(e.x) + pad && p.y >= s.y.min(e.y) - pad && p.y <= s.y.max(e.y) + pad
            } {
                return true;
            }
        }
        let mut inside = false;
        for i in 0..4 {
            let (s, e) = (v[i], v[(i + 1) % 4]);
            if (s.y > p.y) != (e.y > p.y) {
                let x_cross = s.x + (p.y - s.y) * (e.x - s.x) / (e.y - s.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Even-odd containment with the boundary counted as inside.
pub fn point_in_quad<T: Scalar>(q: &RoiQuad<T>, p: Point2<T>) -> Result<bool, GeometryError> {
    q.validate()?;
    Ok(q.contains(p))
}
