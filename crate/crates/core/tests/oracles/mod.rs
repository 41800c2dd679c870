//! Brute-force reference implementations used as test oracles. Each one is
//! written from the definitions alone and shares no code with the library
//! beyond plain data types.
#![allow(dead_code)]

use std::collections::VecDeque;

use cvs_core::label_io::{classes, ClassId, LabelMap};
use cvs_core::sobel_loss::{LossConfig, Tensor3};

/// Small deterministic generator for oracle-driven sweeps (xorshift64*).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E3779B97F4A7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Components by breadth-first flood fill: each component as its pixel list
/// in row-major order, sorted by size descending, then `(ymin, xmin)` of the
/// bounding box, then row-major discovery order.
pub fn flood_fill(w: usize, h: usize, member: &dyn Fn(usize, usize) -> bool, eight: bool) -> Vec<Vec<(i32, i32)>> {
    let mut seen = vec![false; w * h];
    let mut comps: Vec<Vec<(i32, i32)>> = Vec::new();
    let nbrs: &[(i64, i64)] = if eight {
        &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    for y in 0..h {
        for x in 0..w {
            if seen[y * w + x] || !member(x, y) {
                continue;
            }
            let mut comp = Vec::new();
            let mut q = VecDeque::from([(x, y)]);
            seen[y * w + x] = true;
            while let Some((cx, cy)) = q.pop_front() {
                comp.push((cx as i32, cy as i32));
                for &(dx, dy) in nbrs {
                    let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if !seen[ny * w + nx] && member(nx, ny) {
                        seen[ny * w + nx] = true;
                        q.push_back((nx, ny));
                    }
                }
            }
            comp.sort_by_key(|&(x, y)| (y, x));
            comps.push(comp);
        }
    }
    // stable sort keeps discovery order among equal keys
    comps.sort_by_key(|c| {
        let ymin = c.iter().map(|p| p.1).min().unwrap();
        let xmin = c.iter().map(|p| p.0).min().unwrap();
        (std::cmp::Reverse(c.len()), ymin, xmin)
    });
    comps
}

/// `(dist_sq, a, b)` minimizing distance, then `(y, x)` of `a`, then of `b`.
pub fn brute_nearest(a: &[(i32, i32)], b: &[(i32, i32)]) -> (i64, (i32, i32), (i32, i32)) {
    let mut best: Option<(i64, (i32, i32), (i32, i32))> = None;
    for &pa in a {
        for &pb in b {
            let d = (pa.0 - pb.0) as i64 * (pa.0 - pb.0) as i64 + (pa.1 - pb.1) as i64 * (pa.1 - pb.1) as i64;
            let key = (d, (pa.1, pa.0), (pb.1, pb.0));
            if best.is_none_or(|(bd, ba, bb)| key < (bd, (ba.1, ba.0), (bb.1, bb.0))) {
                best = Some((d, pa, pb));
            }
        }
    }
    best.unwrap()
}

/// Closed containment in a polygon: on an edge, or odd crossing count.
/// Exact for integer or half-integer vertices and integer queries.
pub fn in_polygon(v: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = v.len();
    for i in 0..n {
        let (s, e) = (v[i], v[(i + 1) % n]);
        let cross = (e.0 - s.0) * (p.1 - s.1) - (e.1 - s.1) * (p.0 - s.0);
        let within = p.0 >= s.0.min(e.0) && p.0 <= s.0.max(e.0) && p.1 >= s.1.min(e.1) && p.1 <= s.1.max(e.1);
        if cross == 0.0 && within {
            return true;
        }
    }
    let mut crossings = 0;
    for i in 0..n {
        let (s, e) = (v[i], v[(i + 1) % n]);
        if (s.1 > p.1) != (e.1 > p.1) {
            let t = (p.1 - s.1) / (e.1 - s.1);
            if p.0 < s.0 + t * (e.0 - s.0) {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

/// Convex polygon containment by half-planes, boundary inclusive. Vertices in
/// either winding.
pub fn in_convex(v: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = v.len();
    let signs: Vec<f64> = (0..n)
        .map(|i| {
            let (s, e) = (v[i], v[(i + 1) % n]);
            (e.0 - s.0) * (p.1 - s.1) - (e.1 - s.1) * (p.0 - s.0)
        })
        .collect();
    signs.iter().all(|&s| s >= 0.0) || signs.iter().all(|&s| s <= 0.0)
}

/// Evidence recomputed by iterating pixels directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recount {
    pub fat: usize,
    pub liver: usize,
    pub plate: usize,
    pub duct: usize,
    pub artery: usize,
}

pub fn recount(map: &LabelMap, quad: &[(f64, f64)], min_cluster: usize) -> Recount {
    let (w, h) = (map.width(), map.height());
    let inside = |x: usize, y: usize, cls: ClassId| map.get(x, y) == cls && in_polygon(quad, (x as f64, y as f64));
    let comps = |cls: ClassId| flood_fill(w, h, &|x, y| inside(x, y, cls), true);
    let mut fat = 0;
    for y in 0..h {
        for x in 0..w {
            fat += inside(x, y, classes::FAT) as usize;
        }
    }
    let largest = |cls| comps(cls).first().map_or(0, |c| c.len());
    let counted = |cls| comps(cls).iter().filter(|c| c.len() >= min_cluster).count();
    Recount {
        fat,
        liver: largest(classes::LIVER),
        plate: largest(classes::CYSTIC_PLATE),
        duct: counted(classes::CYSTIC_DUCT),
        artery: counted(classes::CYSTIC_ARTERY),
    }
}

/// Central finite differences of `f` around `p`, one entry at a time.
pub fn central_differences(
    g: &Tensor3<f64>,
    p: &Tensor3<f64>,
    cfg: &LossConfig<f64>,
    h: f64,
    f: impl Fn(&Tensor3<f64>, &Tensor3<f64>, &LossConfig<f64>) -> f64,
) -> Vec<f64> {
    let mut probe = p.clone();
    (0..p.data.len())
        .map(|k| {
            let orig = probe.data[k];
            probe.data[k] = orig + h;
            let up = f(g, &probe, cfg);
            probe.data[k] = orig - h;
            let down = f(g, &probe, cfg);
            probe.data[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Random one-hot ground truth and strictly positive, normalized prediction.
pub fn random_pair(seed: u64, c: usize, h: usize, w: usize) -> (Tensor3<f64>, Tensor3<f64>) {
    let mut rng = TestRng::new(seed);
    let n = h * w;
    let mut g = vec![0.0; c * n];
    let mut p = vec![0.0; c * n];
    for i in 0..n {
        g[rng.below(c as u64) as usize * n + i] = 1.0;
        let raw: Vec<f64> = (0..c).map(|_| 0.05 + rng.unit()).collect();
        let s: f64 = raw.iter().sum();
        for k in 0..c {
            p[k * n + i] = raw[k] / s;
        }
    }
    (Tensor3::new(c, h, w, g).unwrap(), Tensor3::new(c, h, w, p).unwrap())
}

/// Largest `|a - n| / max(|a|, |n|)`, zero where both vanish.
pub fn max_rel_err(a: &[f64], n: &[f64]) -> f64 {
    a.iter()
        .zip(n)
        .map(|(&x, &y)| {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}
