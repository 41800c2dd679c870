//! Deterministic synthetic scenes: fused label maps built from simple
//! rasterized primitives, with CVS truth labels and a reference ROI known by
//! construction.
//!
//! Layout (y grows downward):
//!
//! ```text
//!   gallbladder band, full width
//!   ---------------------------------------------
//!     |duct|  plate        A.........D liver ...
//!     |    |                :  artery  \
//!     |    |   (fat disk)   :           \
//!     |    |                :            C [fat]
//!     B                                   ...
//! ```
//!
//! Randomness comes from [`Lcg64`], a 64-bit linear congruential generator
//! with Knuth's MMIX constants, so corpora are reproducible across platforms
//! and languages. Frame `i` of a corpus is seeded with
//! `splitmix64(base_seed + splitmix64(i))`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvs_rules::{CvsLabels, RuleThresholds};
use crate::geometry::{Point2, RoiQuad};
use crate::label_io::{classes, save_label_map, ClassId, ClassPalette, LabelError, LabelMap};

pub const LCG_MULTIPLIER: u64 = 6364136223846793005;
pub const LCG_INCREMENT: u64 = 1442695040888963407;
/// Bumped whenever the generator's output for a given seed changes.
pub const GENERATOR_VERSION: u32 = 1;

/// `state <- state * 6364136223846793005 + 1442695040888963407 (mod 2^64)`.
/// Outputs are the state after the step, high bits first.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MULTIPLIER).wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi)`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo < hi, "empty range");
        lo + (self.next_f64() * (hi - lo) as f64) as i64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn frame_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(splitmix64(index)))
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] LabelError),
}

impl SynthError {
    pub fn kind(&self) -> &'static str {
        match self {
            SynthError::InvalidSpec(_) => "InvalidSpec",
            SynthError::Io(_) => "IoFailure",
        }
    }
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidSpec(msg.into())
}

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// Rectangle of `length` along the axis and `thickness` across it. The axis
/// is `(sin a, cos a)`, so angle 0 runs straight down. A pixel belongs when
/// its center offset `(u, v)` satisfies `-L/2 <= u < L/2`, `-T/2 <= v < T/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: (f64, f64),
    pub length: f64,
    pub thickness: f64,
    pub angle_deg: f64,
}

impl OrientedRect {
    /// Axis-aligned vertical strip covering columns `[x0, x0 + width)` and
    /// rows `[y0, y0 + length)`.
    pub fn vertical(x0: i64, y0: i64, width: i64, length: i64) -> Self {
        OrientedRect {
            center: (x0 as f64 + (width - 1) as f64 / 2.0, y0 as f64 + (length - 1) as f64 / 2.0),
            length: length as f64,
            thickness: width as f64,
            angle_deg: 0.0,
        }
    }

    fn axis(&self) -> (f64, f64) {
        let a = self.angle_deg.to_radians();
        (a.sin(), a.cos())
    }

    fn contains(&self, x: i64, y: i64) -> bool {
        let (ax, ay) = self.axis();
        let (dx, dy) = (x as f64 - self.center.0, y as f64 - self.center.1);
        let u = dx * ax + dy * ay;
        let v = dx * ay - dy * ax;
        let (hl, ht) = (self.length / 2.0, self.thickness / 2.0);
        (-hl..hl).contains(&u) && (-ht..ht).contains(&v)
    }

    fn bounds(&self) -> Rect {
        let r = ((self.length + self.thickness) / 2.0).ceil() as i64 + 1;
        let (cx, cy) = (self.center.0.round() as i64, self.center.1.round() as i64);
        Rect { x0: cx - r, y0: cy - r, x1: cx + r + 1, y1: cy + r + 1 }
    }

    /// Pixel-center endpoints of the axis, `(start, end)`.
    fn endpoints(&self) -> (Point2<f64>, Point2<f64>) {
        let (ax, ay) = self.axis();
        let h = (self.length - 1.0) / 2.0;
        let c = Point2::new(self.center.0, self.center.1);
        (c - Point2::new(ax, ay) * h, c + Point2::new(ax, ay) * h)
    }
}

/// Plate blob: exactly `size` pixels filled row by row inside a strip of
/// `width` columns starting at `(x0, y0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateSpec {
    pub x0: i64,
    pub y0: i64,
    pub width: i64,
    pub size: i64,
}

impl PlateSpec {
    fn contains(&self, x: i64, y: i64) -> bool {
        let (dx, dy) = (x - self.x0, y - self.y0);
        dx >= 0 && dx < self.width && dy >= 0 && dy * self.width + dx < self.size
    }

    fn bounds(&self) -> Rect {
        let rows = (self.size + self.width - 1) / self.width;
        Rect { x0: self.x0, y0: self.y0, x1: self.x0 + self.width, y1: self.y0 + rows }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FatBlob {
    pub center: (f64, f64),
    pub radius: f64,
    /// Must agree with the blob center's position relative to the reference quad.
    pub inside_roi: bool,
}

impl FatBlob {
    fn contains(&self, x: i64, y: i64) -> bool {
        let (dx, dy) = (x as f64 - self.center.0, y as f64 - self.center.1);
        dx * dx + dy * dy <= self.radius * self.radius
    }

    fn bounds(&self) -> Rect {
        let r = self.radius.ceil() as i64 + 1;
        let (cx, cy) = (self.center.0.round() as i64, self.center.1.round() as i64);
        Rect { x0: cx - r, y0: cy - r, x1: cx + r + 1, y1: cy + r + 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub count: usize,
    /// Largest speck in pixels, at most 4.
    pub max_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub size: (usize, usize),
    pub duct: OrientedRect,
    /// Zero, one or several artery segments.
    pub arteries: Vec<OrientedRect>,
    /// Full-width band; only its rows are used.
    pub gallbladder: Rect,
    /// Touches the gallbladder band from below.
    pub liver: Rect,
    pub plate: PlateSpec,
    /// Largest fat structure, outside the ROI. Point `C` sits at its outline.
    pub fat_main: Rect,
    pub fat_blobs: Vec<FatBlob>,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub map: LabelMap,
    pub truth: CvsLabels,
    pub reference_quad: RoiQuad<f64>,
}

/// Which criterion a negative scene violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    Positive,
    FailC1,
    FailC2,
    FailC3,
}

struct Canvas {
    w: i64,
    h: i64,
    data: Vec<ClassId>,
}

impl Canvas {
    fn paint(&mut self, bounds: Rect, cls: ClassId, inside: impl Fn(i64, i64) -> bool) {
        for y in bounds.y0.max(0)..bounds.y1.min(self.h) {
            for x in bounds.x0.max(0)..bounds.x1.min(self.w) {
                if inside(x, y) {
                    self.data[(y * self.w + x) as usize] = cls;
                }
            }
        }
    }

    fn get(&self, x: i64, y: i64) -> Option<ClassId> {
        (x >= 0 && y >= 0 && x < self.w && y < self.h).then(|| self.data[(y * self.w + x) as usize])
    }

    /// True when every pixel within Chebyshev distance 2 is background.
    fn clear_around(&self, x: i64, y: i64) -> bool {
        (-2..=2).all(|dy| (-2..=2).all(|dx| self.get(x + dx, y + dy).is_none_or(|c| c == classes::BACKGROUND)))
    }
}

/// Smallest clockwise angle (radians, in `[0, 2pi)`) from `from` to `to`.
fn clockwise_angle(from: Point2<f64>, to: Point2<f64>) -> f64 {
    let a = from.cross(to).atan2(from.dot(to));
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

impl SceneSpec {
    /// Reference ROI from the spec geometry: `A` where the duct meets the
    /// band, `B` the far duct end, `C` the first outline corner of the main
    /// fat block met by a clockwise sweep from `B -> A`, `D` the corner
    /// where band and liver meet.
    pub fn reference_quad(&self) -> Result<RoiQuad<f64>, SynthError> {
        let (top, bottom) = self.duct.endpoints();
        let (ax, ay) = self.duct.axis();
        let a = top - Point2::new(ax, ay) * 0.5;
        let b = bottom;
        let start = a - b;
        let f = self.fat_main;
        let corners = [(f.x0, f.y0), (f.x1, f.y0), (f.x0, f.y1), (f.x1, f.y1)]
            .map(|(x, y)| Point2::new(x as f64 - 0.5, y as f64 - 0.5));
        let c = corners
            .into_iter()
            .min_by(|p, q| {
                clockwise_angle(start, *p - b)
                    .total_cmp(&clockwise_angle(start, *q - b))
                    .then((*p - b).norm().total_cmp(&(*q - b).norm()))
            })
            .expect("four corners");
        if clockwise_angle(start, c - b) > std::f64::consts::PI {
            return Err(invalid("main fat block is not reached by a half-turn sweep"));
        }
        let d = Point2::new(self.liver.x0 as f64, self.liver.y0 as f64 - 0.5);
        RoiQuad::new(a, b, c, d).map_err(|e| invalid(format!("reference quad: {e}")))
    }

    fn truth(&self, th: &RuleThresholds) -> CvsLabels {
        let c1 = !self.fat_blobs.iter().any(|b| b.inside_roi);
        let c2 = self.plate.size as usize > th.t_cp;
        let c3 = self.arteries.len() == 1;
        CvsLabels::from_criteria(c1, c2, c3)
    }

    /// Every pixel the shape covers must lie inside the image.
    fn check_shape(&self, name: &str, bounds: Rect, inside: impl Fn(i64, i64) -> bool) -> Result<(), SynthError> {
        let img = Rect { x0: 0, y0: 0, x1: self.size.0 as i64, y1: self.size.1 as i64 };
        let escapes = (bounds.y0..bounds.y1).any(|y| (bounds.x0..bounds.x1).any(|x| inside(x, y) && !img.contains(x, y)));
        if escapes {
            return Err(invalid(format!("{name} extends outside the image")));
        }
        Ok(())
    }

    fn validate_static(&self) -> Result<(), SynthError> {
        let (w, h) = self.size;
        if !(16..=crate::label_io::MAX_DIMENSION).contains(&w) || !(16..=crate::label_io::MAX_DIMENSION).contains(&h) {
            return Err(invalid("image size must be within 16..=4096"));
        }
        let gb = self.gallbladder;
        if gb.x0 != 0 || gb.x1 != w as i64 || gb.y0 >= gb.y1 {
            return Err(invalid("gallbladder must be a non-empty full-width band"));
        }
        if self.liver.y0 != gb.y1 || self.liver.x0 >= self.liver.x1 || self.liver.y0 >= self.liver.y1 {
            return Err(invalid("liver must be non-empty and touch the band from below"));
        }
        if self.duct.length < 2.0 || self.duct.thickness < 1.0 {
            return Err(invalid("duct too small"));
        }
        if self.plate.size < 1 || self.plate.width < 1 {
            return Err(invalid("plate must have at least one pixel"));
        }
        if self.noise.max_size > 4 || (self.noise.count > 0 && self.noise.max_size == 0) {
            return Err(invalid("noise specks must have 1..=4 pixels"));
        }
        if self.fat_blobs.iter().any(|b| !(b.radius > 0.0)) {
            return Err(invalid("fat blob radius must be positive"));
        }
        self.check_shape("gallbladder", gb, |x, y| gb.contains(x, y))?;
        self.check_shape("liver", self.liver, |x, y| self.liver.contains(x, y))?;
        self.check_shape("plate", self.plate.bounds(), |x, y| self.plate.contains(x, y))?;
        self.check_shape("main fat", self.fat_main, |x, y| self.fat_main.contains(x, y))?;
        self.check_shape("duct", self.duct.bounds(), |x, y| self.duct.contains(x, y))?;
        for a in &self.arteries {
            self.check_shape("artery", a.bounds(), |x, y| a.contains(x, y))?;
        }
        for b in &self.fat_blobs {
            self.check_shape("fat blob", b.bounds(), |x, y| b.contains(x, y))?;
        }
        Ok(())
    }
}

fn rasterize(spec: &SceneSpec) -> Canvas {
    let (w, h) = (spec.size.0 as i64, spec.size.1 as i64);
    let mut cv = Canvas { w, h, data: vec![classes::BACKGROUND; (w * h) as usize] };
    cv.paint(spec.liver, classes::LIVER, |x, y| spec.liver.contains(x, y));
    cv.paint(spec.gallbladder, classes::GALLBLADDER, |x, y| spec.gallbladder.contains(x, y));
    cv.paint(spec.plate.bounds(), classes::CYSTIC_PLATE, |x, y| spec.plate.contains(x, y));
    cv.paint(spec.fat_main, classes::FAT, |x, y| spec.fat_main.contains(x, y));
    for b in &spec.fat_blobs {
        cv.paint(b.bounds(), classes::FAT, |x, y| b.contains(x, y));
    }
    cv.paint(spec.duct.bounds(), classes::CYSTIC_DUCT, |x, y| spec.duct.contains(x, y));
    for a in &spec.arteries {
        cv.paint(a.bounds(), classes::CYSTIC_ARTERY, |x, y| a.contains(x, y));
    }

    // Specks: short horizontal runs of non-fat classes, kept two pixels clear
    // of everything else so no existing structure changes.
    let mut rng = Lcg64::new(splitmix64(spec.seed ^ 0x5EEC));
    let speck_classes = [classes::CYSTIC_DUCT, classes::CYSTIC_ARTERY, classes::CYSTIC_PLATE, classes::LIVER];
    for _ in 0..spec.noise.count {
        let cls = speck_classes[rng.range(0, speck_classes.len() as i64) as usize];
        let len = rng.range(1, spec.noise.max_size as i64 + 1);
        for _attempt in 0..64 {
            let (x, y) = (rng.range(0, w - len + 1), rng.range(0, h));
            if (0..len).all(|i| cv.clear_around(x + i, y)) {
                for i in 0..len {
                    cv.data[(y * w + x + i) as usize] = cls;
                }
                break;
            }
        }
    }
    cv
}

fn validate_raster(spec: &SceneSpec, cv: &Canvas, quad: &RoiQuad<f64>, th: &RuleThresholds) -> Result<(), SynthError> {
    let is = |x: i64, y: i64, cls: ClassId| cv.get(x, y) == Some(cls);
    let touches = (0..cv.h).any(|y| {
        (0..cv.w).any(|x| is(x, y, classes::CYSTIC_DUCT) && [(0, -1), (0, 1), (-1, 0), (1, 0)].iter().any(|(dx, dy)| is(x + dx, y + dy, classes::GALLBLADDER)))
    });
    if !touches {
        return Err(invalid("duct does not touch the gallbladder band"));
    }
    let inside = |x: i64, y: i64| quad.contains(Point2::new(x as f64, y as f64));
    let f = spec.fat_main;
    if (f.y0..f.y1).any(|y| (f.x0..f.x1).any(|x| inside(x, y))) {
        return Err(invalid("main fat block overlaps the reference quad"));
    }
    for b in &spec.fat_blobs {
        let r = b.bounds();
        let any_inside = (r.y0..r.y1).any(|y| (r.x0..r.x1).any(|x| b.contains(x, y) && inside(x, y)));
        if b.inside_roi != inside(b.center.0.round() as i64, b.center.1.round() as i64) || (!b.inside_roi && any_inside) {
            return Err(invalid("fat blob inside_roi flag disagrees with the geometry"));
        }
    }
    let pr = spec.plate.bounds();
    if (pr.y0..pr.y1).any(|y| (pr.x0..pr.x1).any(|x| spec.plate.contains(x, y) && !inside(x, y))) {
        return Err(invalid("plate must lie inside the reference quad"));
    }
    for a in &spec.arteries {
        let r = a.bounds();
        if (r.y0..r.y1).any(|y| (r.x0..r.x1).any(|x| a.contains(x, y) && !inside(x, y))) {
            return Err(invalid("artery must lie inside the reference quad"));
        }
    }
    // liver inside the quad is one solid region by layout; require ample margin
    let liver_inside = (0..cv.h).flat_map(|y| (0..cv.w).map(move |x| (x, y))).filter(|&(x, y)| spec.liver.contains(x, y) && is(x, y, classes::LIVER) && inside(x, y)).count();
    if liver_inside <= 2 * th.t_liver {
        return Err(invalid("too little liver inside the reference quad"));
    }
    Ok(())
}

/// Rasterizes a scene back to front (liver, gallbladder, plate, fat, duct,
/// artery, specks) and derives its truth labels under the default rule
/// thresholds.
pub fn generate_scene(spec: &SceneSpec) -> Result<Scene, SynthError> {
    spec.validate_static()?;
    let quad = spec.reference_quad()?;
    let th = RuleThresholds::default();
    let cv = rasterize(spec);
    validate_raster(spec, &cv, &quad, &th)?;
    let map = LabelMap::new(spec.size.0, spec.size.1, cv.data, ClassPalette::fused())?;
    Ok(Scene { map, truth: spec.truth(&th), reference_quad: quad })
}

const SCENE_SIZE: usize = 256;
const PLATE_WIDTH: i64 = 16;

struct Layout {
    g0: i64,
    g1: i64,
    dx0: i64,
    dw: i64,
    len: i64,
    lx0: i64,
    fat_side: i64,
    fx0: i64,
    fy_lift: i64,
    artery_len: i64,
}

fn build(seed: u64, l: &Layout, plate_size: i64, arteries: usize, disk_radius: Option<f64>, noise: NoiseSpec) -> SceneSpec {
    let w = SCENE_SIZE as i64;
    let b_y = l.g1 + l.len - 1;
    let fy0 = b_y - l.fy_lift;
    let dcx = l.dx0 as f64 + (l.dw - 1) as f64 / 2.0;
    let art_x = l.lx0 - 10;
    let art_y = l.g1 + 30;
    let arteries = match arteries {
        0 => vec![],
        1 => vec![OrientedRect::vertical(art_x, art_y, 4, l.artery_len)],
        _ => vec![
            OrientedRect::vertical(art_x, art_y, 4, 10),
            OrientedRect::vertical(art_x, art_y + 14, 4, l.artery_len - 14),
        ],
    };
    let fat_blobs = disk_radius
        .map(|radius| vec![FatBlob { center: (dcx + 16.0, (l.g1 + 55) as f64), radius, inside_roi: true }])
        .unwrap_or_default();
    SceneSpec {
        seed,
        size: (SCENE_SIZE, SCENE_SIZE),
        duct: OrientedRect::vertical(l.dx0, l.g1, l.dw, l.len),
        arteries,
        gallbladder: Rect { x0: 0, y0: l.g0, x1: w, y1: l.g1 },
        liver: Rect { x0: l.lx0, y0: l.g1, x1: w, y1: w },
        plate: PlateSpec { x0: l.dx0 + l.dw + 3, y0: l.g1 + 4, width: PLATE_WIDTH, size: plate_size },
        fat_main: Rect { x0: l.fx0, y0: fy0, x1: l.fx0 + l.fat_side, y1: fy0 + l.fat_side },
        fat_blobs,
        noise,
    }
}

/// Fixed positive scene: one duct, one artery, a 300 px plate, no fat in the ROI.
pub fn canonical_spec() -> SceneSpec {
    let l = Layout { g0: 30, g1: 60, dx0: 60, dw: 4, len: 88, lx0: 104, fat_side: 30, fx0: 140, fy_lift: 8, artery_len: 24 };
    build(0, &l, 300, 1, None, NoiseSpec::default())
}

/// Canonical layout with a fat disk of `radius` placed inside the ROI.
pub fn canonical_spec_with_inner_fat(radius: f64) -> SceneSpec {
    let mut s = canonical_spec();
    let l = Layout { g0: 30, g1: 60, dx0: 60, dw: 4, len: 88, lx0: 104, fat_side: 30, fx0: 140, fy_lift: 8, artery_len: 24 };
    s.fat_blobs = build(0, &l, 300, 1, Some(radius), NoiseSpec::default()).fat_blobs;
    s
}

/// Randomized scene of the given kind; every random draw comes from `seed`.
pub fn random_spec(seed: u64, kind: SceneKind) -> SceneSpec {
    let mut r = Lcg64::new(seed);
    let g0 = r.range(20, 40);
    let g1 = g0 + r.range(25, 35);
    let dx0 = r.range(50, 70);
    let l = Layout {
        g0,
        g1,
        dx0,
        dw: r.range(4, 7),
        len: r.range(82, 95),
        lx0: dx0 + r.range(40, 48),
        fat_side: r.range(24, 36),
        fx0: 0,
        fy_lift: r.range(4, 13),
        artery_len: r.range(20, 30),
    };
    let l = Layout { fx0: l.lx0 + r.range(30, 40), ..l };
    let noise = NoiseSpec { count: r.range(0, 7) as usize, max_size: 4 };
    let good_plate = r.range(120, 401);
    let disk = 8.0 + r.range(0, 3) as f64;
    match kind {
        SceneKind::Positive => build(seed, &l, good_plate, 1, None, noise),
        SceneKind::FailC1 => build(seed, &l, good_plate, 1, Some(disk), noise),
        SceneKind::FailC2 => build(seed, &l, r.range(20, 101), 1, None, noise),
        SceneKind::FailC3 => build(seed, &l, good_plate, if r.chance(0.5) { 0 } else { 2 }, None, noise),
    }
}

/// Which frames of an `n`-frame corpus are positive: exactly
/// `round(n * fraction)` of them, chosen by a seeded shuffle.
pub fn positive_flags(n: usize, base_seed: u64, fraction: f64) -> Vec<bool> {
    let k = ((n as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Lcg64::new(splitmix64(base_seed ^ 0xC0FFEE));
    for i in (1..n).rev() {
        let j = rng.range(0, i as i64 + 1) as usize;
        order.swap(i, j);
    }
    let mut flags = vec![false; n];
    for &i in &order[..k] {
        flags[i] = true;
    }
    flags
}

/// Scene for frame `index` of a corpus.
pub fn corpus_scene(base_seed: u64, index: usize, positive: bool) -> Result<Scene, SynthError> {
    let seed = frame_seed(base_seed, index as u64);
    let kind = if positive {
        SceneKind::Positive
    } else {
        [SceneKind::FailC1, SceneKind::FailC2, SceneKind::FailC3][(splitmix64(seed) % 3) as usize]
    };
    generate_scene(&random_spec(seed, kind))
}

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:05}")
}

/// On-disk truth record, `<frame>.truth.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub cvs: bool,
    pub quad: [[f64; 2]; 4],
}

impl TruthRecord {
    pub fn new(truth: CvsLabels, quad: &RoiQuad<f64>) -> Self {
        TruthRecord { c1: truth.c1, c2: truth.c2, c3: truth.c3, cvs: truth.cvs, quad: quad.vertices().map(|p| [p.x, p.y]) }
    }

    pub fn labels(&self) -> CvsLabels {
        CvsLabels { c1: self.c1, c2: self.c2, c3: self.c3, cvs: self.cvs }
    }

    /// The stored quad, reordered if needed.
    pub fn roi_quad(&self) -> Result<RoiQuad<f64>, SynthError> {
        let [a, b, c, d] = self.quad.map(|[x, y]| Point2::new(x, y));
        RoiQuad::new(a, b, c, d).map_err(|e| invalid(format!("truth quad: {e}")))
    }
}

pub fn truth_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.truth.json"))
}

fn io_err(path: &Path, source: std::io::Error) -> SynthError {
    SynthError::Io(LabelError::IoFailure { path: path.to_path_buf(), source })
}

/// Writes `<name>.pgm`, its palette sidecar and `<name>.truth.json`.
pub fn write_frame(dir: &Path, name: &str, map: &LabelMap, truth: &TruthRecord) -> Result<(), SynthError> {
    save_label_map(map, &dir.join(format!("{name}.pgm")))?;
    let path = truth_path(dir, name);
    let mut json = serde_json::to_string(truth).expect("truth record serializes");
    json.push('\n');
    fs::write(&path, json).map_err(|e| io_err(&path, e))
}

pub fn read_truth(path: &Path) -> Result<TruthRecord, SynthError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Replaces each pixel, with probability `rate`, by a different class drawn
/// uniformly from the map's palette.
pub fn flip_pixels(map: &LabelMap, rate: f64, seed: u64) -> LabelMap {
    let ids: Vec<ClassId> = map.palette().ids().collect();
    let mut rng = Lcg64::new(splitmix64(seed ^ 0xF119));
    let data = map
        .data()
        .iter()
        .map(|&c| {
            if ids.len() > 1 && rng.chance(rate) {
                let others: Vec<ClassId> = ids.iter().copied().filter(|&o| o != c).collect();
                others[rng.range(0, others.len() as i64) as usize]
            } else {
                c
            }
        })
        .collect();
    LabelMap::new(map.width(), map.height(), data, map.palette().clone()).expect("same palette and size")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFrame {
    pub name: String,
    pub truth: TruthRecord,
}

/// Generates and writes an `n`-frame corpus into `dir`.
pub fn generate_corpus(n: usize, base_seed: u64, positive_fraction: f64, dir: &Path) -> Result<Vec<CorpusFrame>, SynthError> {
    if n == 0 || !(0.0..=1.0).contains(&positive_fraction) {
        return Err(invalid("need n >= 1 and 0 <= positive_fraction <= 1"));
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    positive_flags(n, base_seed, positive_fraction)
        .into_iter()
        .enumerate()
        .map(|(i, pos)| {
            let scene = corpus_scene(base_seed, i, pos)?;
            let name = frame_name(i);
            let truth = TruthRecord::new(scene.truth, &scene.reference_quad);
            write_frame(dir, &name, &scene.map, &truth)?;
            Ok(CorpusFrame { name, truth })
        })
        .collect()
}
