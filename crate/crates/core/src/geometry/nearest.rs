use super::{GeometryError, Pixel};
use crate::Scalar;

/// Static 2-d tree over integer pixels, laid out as an implicit balanced tree
/// in a flat array (median of each slice at its midpoint).
///
/// Distances are exact integer squared distances, so queries agree bit for
/// bit with a brute-force scan, including tie-breaks.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Pixel>,
}

#[inline]
fn coord(p: Pixel, axis: usize) -> i32 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

impl KdTree {
    pub fn new(points: &[Pixel]) -> Self {
        let mut points = points.to_vec();
        build(&mut points, 0);
        KdTree { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point to `q`; among equidistant points the smallest in
    /// `(y, x)` order wins.
    pub fn nearest(&self, q: Pixel) -> Option<(Pixel, i64)> {
        let mut best: Option<(i64, Pixel)> = None;
        search(&self.points, 0, q, &mut best);
        best.map(|(d, p)| (p, d))
    }
}

fn build(points: &mut [Pixel], axis: usize) {
    if points.len() <= 1 {
        return;
    }
    let mid = points.len() / 2;
    points.select_nth_unstable_by_key(mid, |p| (coord(*p, axis), coord(*p, 1 - axis)));
    let (left, right) = points.split_at_mut(mid);
    build(left, 1 - axis);
    build(&mut right[1..], 1 - axis);
}

fn better(candidate: (i64, Pixel), best: &Option<(i64, Pixel)>) -> bool {
    match best {
        None => true,
        Some((d, p)) => (candidate.0, candidate.1.row_major_key()) < (*d, p.row_major_key()),
    }
}

fn search(points: &[Pixel], axis: usize, q: Pixel, best: &mut Option<(i64, Pixel)>) {
    if points.is_empty() {
        return;
    }
    let mid = points.len() / 2;
    let node = points[mid];
    let cand = (node.dist_sq(q), node);
    if better(cand, best) {
        *best = Some(cand);
    }
    let diff = coord(q, axis) as i64 - coord(node, axis) as i64;
    let (near, far) = if diff < 0 { (&points[..mid], &points[mid + 1..]) } else { (&points[mid + 1..], &points[..mid]) };
    search(near, 1 - axis, q, best);
    // Equal plane distance may still hold a tie that wins on (y, x).
    if best.is_none_or(|(d, _)| diff * diff <= d) {
        search(far, 1 - axis, q, best);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestPair<T> {
    pub a: Pixel,
    pub b: Pixel,
    pub dist_sq: i64,
    pub distance: T,
}

/// Closest pair with one point from each set.
///
/// Ties are broken by `(y, x)` of the `a` point, then of the `b` point. A k-d
/// tree over `b` keeps each query sublinear on average.
pub fn nearest_pair<T: Scalar>(a: &[Pixel], b: &[Pixel]) -> Result<NearestPair<T>, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    let tree = KdTree::new(b);
    let mut best: Option<(i64, (i32, i32), (i32, i32), Pixel, Pixel)> = None;
    for &pa in a {
        let (pb, d) = tree.nearest(pa).expect("non-empty tree");
        let key = (d, pa.row_major_key(), pb.row_major_key(), pa, pb);
        if best.as_ref().is_none_or(|k| (key.0, key.1, key.2) < (k.0, k.1, k.2)) {
            best = Some(key);
        }
    }
    let (d, _, _, pa, pb) = best.expect("non-empty input");
    Ok(NearestPair { a: pa, b: pb, dist_sq: d, distance: T::from_count(d).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(v: &[(i32, i32)]) -> Vec<Pixel> {
        v.iter().map(|&(x, y)| Pixel::new(x, y)).collect()
    }

    #[test]
    fn small_examples() {
        let r = nearest_pair::<f64>(&px(&[(0, 0), (5, 5)]), &px(&[(1, 0), (9, 9)])).unwrap();
        assert_eq!((r.a, r.b, r.distance), (Pixel::new(0, 0), Pixel::new(1, 0), 1.0));

        let r = nearest_pair::<f64>(&px(&[(2, 3)]), &px(&[(2, 3)])).unwrap();
        assert_eq!((r.a, r.b, r.distance), (Pixel::new(2, 3), Pixel::new(2, 3), 0.0));

        let r = nearest_pair::<f64>(&px(&[(0, 0)]), &px(&[(0, 1), (1, 0)])).unwrap();
        assert_eq!(r.b, Pixel::new(1, 0));
    }

    #[test]
    fn empty_sets() {
        assert_eq!(nearest_pair::<f64>(&[], &px(&[(0, 0)])), Err(GeometryError::EmptySet));
        assert_eq!(nearest_pair::<f64>(&px(&[(0, 0)]), &[]), Err(GeometryError::EmptySet));
    }

    #[test]
    fn tree_tie_prefers_row_major_smallest() {
        let tree = KdTree::new(&px(&[(5, 4), (4, 5), (6, 5), (5, 6), (5, 5)]));
        assert_eq!(tree.nearest(Pixel::new(5, 5)), Some((Pixel::new(5, 5), 0)));
        let tree = KdTree::new(&px(&[(5, 6), (6, 5), (4, 5), (5, 4)]));
        assert_eq!(tree.nearest(Pixel::new(5, 5)), Some((Pixel::new(5, 4), 1)));
    }
}
