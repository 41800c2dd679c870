//! Connected components, cluster statistics and class edges.

use thiserror::Error;

use crate::geometry::{GeometryError, Pixel, Point2, RoiQuad};
use crate::label_io::{ClassId, LabelMap};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    /// N, S, E, W neighbors.
    Four,
    /// All eight neighbors.
    #[default]
    Eight,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("unknown class id {0}")]
    UnknownClassId(u8),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
}

impl From<GeometryError> for RegionError {
    fn from(e: GeometryError) -> Self {
        RegionError::InvalidRegion(e.to_string())
    }
}

/// One connected component of a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub cls: ClassId,
    /// Member pixels in row-major order.
    pub pixels: Vec<Pixel>,
    pub size: usize,
    pub centroid: Point2<f64>,
    /// `(xmin, ymin, xmax, ymax)`, inclusive.
    pub bbox: (i32, i32, i32, i32),
    /// Members with at least one 4-neighbor outside the cluster, row-major.
    pub boundary: Vec<Pixel>,
}

impl Cluster {
    /// Builds the statistics for a non-empty pixel list. Connectivity is not
    /// checked.
    pub fn from_pixels(cls: ClassId, mut pixels: Vec<Pixel>) -> Self {
        assert!(!pixels.is_empty(), "cluster must have at least one pixel");
        pixels.sort_by_key(|p| p.row_major_key());
        pixels.dedup();
        let size = pixels.len();
        let (mut xmin, mut ymin, mut xmax, mut ymax) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for p in &pixels {
            xmin = xmin.min(p.x);
            ymin = ymin.min(p.y);
            xmax = xmax.max(p.x);
            ymax = ymax.max(p.y);
        }
        let (sx, sy) = pixels.iter().fold((0i64, 0i64), |(sx, sy), p| (sx + (p.x - xmin) as i64, sy + (p.y - ymin) as i64));
        let n = size as f64;
        let centroid = Point2::new(xmin as f64 + sx as f64 / n, ymin as f64 + sy as f64 / n);

        let set = crate::geometry::PixelSet::from_pixels(&pixels);
        let boundary = pixels
            .iter()
            .copied()
            .filter(|p| {
                [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| !set.contains(p.offset(dx, dy)))
            })
            .collect();
        Cluster { cls, pixels, size, centroid, bbox: (xmin, ymin, xmax, ymax), boundary }
    }
}

/// Pixels of one class that touch another class (4-neighborhood) or the
/// image border, in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    pub cls: ClassId,
    pub pixels: Vec<Pixel>,
}

impl EdgeSet {
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller (earlier) label as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Two-pass union-find labeling of a boolean mask.
pub(crate) fn components_of_mask(
    width: usize,
    height: usize,
    mask: &[bool],
    cls: ClassId,
    connectivity: Connectivity,
) -> Vec<Cluster> {
    const NONE: u32 = u32::MAX;
    let mut labels = vec![NONE; width * height];
    let mut ds = DisjointSet { parent: Vec::new() };
    let back: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(-1, 0), (0, -1)],
        Connectivity::Eight => &[(-1, 0), (-1, -1), (0, -1), (1, -1)],
    };
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !mask[i] {
                continue;
            }
            let mut label = NONE;
            for &(dx, dy) in back {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= width as i64 {
                    continue;
                }
                let l = labels[ny as usize * width + nx as usize];
                if l == NONE {
                    continue;
                }
                if label == NONE {
                    label = l;
                } else {
                    ds.union(label, l);
                }
            }
            if label == NONE {
                label = ds.parent.len() as u32;
                ds.parent.push(label);
            }
            labels[i] = label;
        }
    }

    // Roots in order of first appearance give row-major discovery order.
    let mut slot = vec![NONE; ds.parent.len()];
    let mut groups: Vec<Vec<Pixel>> = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let l = labels[y * width + x];
            if l == NONE {
                continue;
            }
            let root = ds.find(l) as usize;
            if slot[root] == NONE {
                slot[root] = groups.len() as u32;
                groups.push(Vec::new());
            }
            groups[slot[root] as usize].push(Pixel::new(x as i32, y as i32));
        }
    }
    let mut clusters: Vec<Cluster> = groups.into_iter().map(|px| Cluster::from_pixels(cls, px)).collect();
    sort_clusters(&mut clusters);
    clusters
}

/// Size descending, then smallest `(ymin, xmin)`; stable, so remaining ties
/// keep row-major discovery order.
pub fn sort_clusters(clusters: &mut [Cluster]) {
    clusters.sort_by(|a, b| b.size.cmp(&a.size).then((a.bbox.1, a.bbox.0).cmp(&(b.bbox.1, b.bbox.0))));
}

fn check_class(map: &LabelMap, cls: ClassId) -> Result<(), RegionError> {
    if map.palette().contains(cls) {
        Ok(())
    } else {
        Err(RegionError::UnknownClassId(cls.0))
    }
}

pub fn connected_components(
    map: &LabelMap,
    cls: ClassId,
    connectivity: Connectivity,
) -> Result<Vec<Cluster>, RegionError> {
    check_class(map, cls)?;
    let mask: Vec<bool> = map.data().iter().map(|c| *c == cls).collect();
    Ok(components_of_mask(map.width(), map.height(), &mask, cls, connectivity))
}

/// Largest 8-connected cluster of `cls`, or `None` if the class is absent
/// (or not in the palette).
pub fn largest_cluster(map: &LabelMap, cls: ClassId) -> Option<Cluster> {
    connected_components(map, cls, Connectivity::Eight).ok()?.into_iter().next()
}

pub fn class_edge(map: &LabelMap, cls: ClassId) -> EdgeSet {
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut pixels = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if map.get(x as usize, y as usize) != cls {
                continue;
            }
            let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| map.get_signed(x + dx, y + dy) != Some(cls));
            if edge {
                pixels.push(Pixel::new(x as i32, y as i32));
            }
        }
    }
    EdgeSet { cls, pixels }
}

/// Boolean mask of `cls` pixels whose centers lie in `region`.
pub fn region_mask<T: Scalar>(map: &LabelMap, cls: ClassId, region: &RoiQuad<T>) -> Vec<bool> {
    let (w, h) = (map.width(), map.height());
    let mut mask = vec![false; w * h];
    let v = region.vertices();
    let lo = |f: fn(&Point2<T>) -> T, n: usize| {
        let m = v.iter().map(f).fold(T::infinity(), T::min).floor();
        m.max(T::zero()).min(T::from_count(n as i64)).to_usize().unwrap_or(0)
    };
    let hi = |f: fn(&Point2<T>) -> T, n: usize| {
        let m = v.iter().map(f).fold(T::neg_infinity(), T::max).ceil() + T::one();
        m.max(T::zero()).min(T::from_count(n as i64)).to_usize().unwrap_or(0)
    };
    let (x0, x1) = (lo(|p| p.x, w), hi(|p| p.x, w));
    let (y0, y1) = (lo(|p| p.y, h), hi(|p| p.y, h));
    for y in y0..y1 {
        for x in x0..x1 {
            if map.get(x, y) == cls && region.contains(Pixel::new(x as i32, y as i32).center()) {
                mask[y * w + x] = true;
            }
        }
    }
    mask
}

/// Components of the `cls` pixels whose centers lie inside `region`
/// (clip first, then label).
pub fn clusters_in_region<T: Scalar>(
    map: &LabelMap,
    cls: ClassId,
    region: &RoiQuad<T>,
    connectivity: Connectivity,
) -> Result<Vec<Cluster>, RegionError> {
    check_class(map, cls)?;
    region.validate()?;
    let mask = region_mask(map, cls, region);
    Ok(components_of_mask(map.width(), map.height(), &mask, cls, connectivity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label_io::{classes::*, ClassPalette};

    fn map_from(rows: &[&str]) -> LabelMap {
        let h = rows.len();
        let w = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| if b == b'.' { BACKGROUND } else { ClassId(b - b'0') }))
            .collect();
        LabelMap::new(w, h, data, ClassPalette::fused()).unwrap()
    }

    #[test]
    fn single_pixel() {
        let m = map_from(&["...", ".4.", "..."]);
        let cs = connected_components(&m, LIVER, Connectivity::Eight).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].size, 1);
        assert_eq!(cs[0].centroid, Point2::new(1.0, 1.0));
        assert_eq!(cs[0].boundary, vec![Pixel::new(1, 1)]);
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = map_from(&["4.", ".4"]);
        assert_eq!(connected_components(&m, LIVER, Connectivity::Four).unwrap().len(), 2);
        let eight = connected_components(&m, LIVER, Connectivity::Eight).unwrap();
        assert_eq!(eight.len(), 1);
        assert_eq!(eight[0].size, 2);
    }

    #[test]
    fn empty_and_unknown_class() {
        let m = map_from(&["..", ".."]);
        assert!(connected_components(&m, LIVER, Connectivity::Eight).unwrap().is_empty());
        assert!(largest_cluster(&m, LIVER).is_none());
        assert!(class_edge(&m, LIVER).is_empty());
        let s1 = LabelMap::filled(2, 2, BACKGROUND, ClassPalette::stream1()).unwrap();
        assert_eq!(connected_components(&s1, FAT, Connectivity::Eight), Err(RegionError::UnknownClassId(7)));
    }

    #[test]
    fn largest_and_tie_break() {
        let m = map_from(&["44444.444", ".........", "........."]);
        let c = largest_cluster(&m, LIVER).unwrap();
        assert_eq!((c.size, c.bbox.0), (5, 0));

        // two size-4 clusters; the lower-left one has smaller xmin but larger ymin
        let m = map_from(&["......4444", "..........", "4444......"]);
        let cs = connected_components(&m, LIVER, Connectivity::Eight).unwrap();
        assert_eq!(cs[0].bbox, (6, 0, 9, 0));
        assert_eq!(largest_cluster(&m, LIVER).unwrap().bbox, (6, 0, 9, 0));
    }

    #[test]
    fn edge_of_solid_block() {
        let m = map_from(&[".....", ".444.", ".444.", ".444.", "....."]);
        let e = class_edge(&m, LIVER);
        assert_eq!(e.len(), 8);
        assert!(!e.pixels.contains(&Pixel::new(2, 2)));
        // border pixels count as edge even when surrounded by the same class
        let full = map_from(&["444", "444", "444"]);
        assert_eq!(class_edge(&full, LIVER).len(), 8);
    }

    fn quad(x0: f64, y0: f64, x1: f64, y1: f64) -> RoiQuad<f64> {
        RoiQuad::new(Point2::new(x0, y0), Point2::new(x1, y0), Point2::new(x1, y1), Point2::new(x0, y1)).unwrap()
    }

    #[test]
    fn region_clipping() {
        let m = map_from(&["44......", "44......", "....4444", "....4444", "4......4"]);
        // fully outside
        assert!(clusters_in_region(&m, LIVER, &quad(2.0, 0.0, 3.0, 1.0), Connectivity::Eight).unwrap().is_empty());
        // the right blob straddles x = 5.5: only columns 4..=5 are kept
        let cs = clusters_in_region(&m, LIVER, &quad(3.5, 1.5, 5.5, 3.5), Connectivity::Eight).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].size, 4);
        assert_eq!(cs[0].bbox, (4, 2, 5, 3));
        // two separated blobs inside
        let cs = clusters_in_region(&m, LIVER, &quad(0.0, 0.0, 7.0, 3.0), Connectivity::Eight).unwrap();
        assert_eq!(cs.iter().map(|c| c.size).collect::<Vec<_>>(), vec![8, 4]);
        // whole image equals unclipped labeling
        assert_eq!(
            clusters_in_region(&m, LIVER, &RoiQuad::<f64>::whole_image(8, 5), Connectivity::Four).unwrap(),
            connected_components(&m, LIVER, Connectivity::Four).unwrap()
        );
    }

    #[test]
    fn invalid_region_is_reported() {
        let m = map_from(&["4"]);
        let bad = RoiQuad {
            a: Point2::new(0.0, 0.0),
            b: Point2::new(1.0, 1.0),
            c: Point2::new(1.0, 0.0),
            d: Point2::new(0.0, 1.0),
            degenerate_fallback_used: false,
        };
        assert!(matches!(clusters_in_region(&m, LIVER, &bad, Connectivity::Eight), Err(RegionError::InvalidRegion(_))));
    }
}
