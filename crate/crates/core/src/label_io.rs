//! Label-map data model and binary PGM (P5) file I/O.
//!
//! A label map stores one class id per pixel. On disk it is a P5 PGM with
//! maxval 255 whose pixel values are the class ids, plus a JSON palette
//! sidecar at `<path>.palette.json` that names the classes.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 4096;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("malformed PGM: {0}")]
    MalformedPgm(String),
    #[error("unknown class id {0}")]
    UnknownClassId(u8),
    #[error("palette mismatch: {0}")]
    PaletteMismatch(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("I/O failure on {path}: {source}")]
    IoFailure { path: PathBuf, source: io::Error },
}

impl LabelError {
    /// Stable error name used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            LabelError::MissingFile(_) => "MissingFile",
            LabelError::MalformedPgm(_) => "MalformedPgm",
            LabelError::UnknownClassId(_) => "UnknownClassId",
            LabelError::PaletteMismatch(_) => "PaletteMismatch",
            LabelError::InvariantViolation(_) => "InvariantViolation",
            LabelError::IoFailure { .. } => "IoFailure",
        }
    }
}

/// Semantic class identifier stored as the pixel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u8);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed class ids. Stream 1 uses 0..=6, the fused palette adds fat.
pub mod classes {
    use super::ClassId;

    pub const BACKGROUND: ClassId = ClassId(0);
    pub const CYSTIC_ARTERY: ClassId = ClassId(1);
    pub const CYSTIC_DUCT: ClassId = ClassId(2);
    pub const GALLBLADDER: ClassId = ClassId(3);
    pub const LIVER: ClassId = ClassId(4);
    pub const INSTRUMENT: ClassId = ClassId(5);
    pub const CYSTIC_PLATE: ClassId = ClassId(6);
    pub const FAT: ClassId = ClassId(7);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stream {
    Stream1,
    Stream2,
    Fused,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub id: ClassId,
    pub name: String,
    pub rgb: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPalette {
    pub stream: Stream,
    pub classes: Vec<ClassEntry>,
}

const STREAM1_CLASSES: [(&str, [u8; 3]); 7] = [
    ("background", [0, 0, 0]),
    ("cystic_artery", [255, 0, 0]),
    ("cystic_duct", [0, 255, 0]),
    ("gallbladder", [255, 255, 0]),
    ("liver", [128, 64, 0]),
    ("instrument", [128, 128, 128]),
    ("cystic_plate", [255, 128, 255]),
];
const FAT_RGB: [u8; 3] = [255, 200, 80];

fn entries(list: &[(&str, [u8; 3])]) -> Vec<ClassEntry> {
    list.iter()
        .enumerate()
        .map(|(i, (name, rgb))| ClassEntry { id: ClassId(i as u8), name: name.to_string(), rgb: *rgb })
        .collect()
}

impl ClassPalette {
    pub fn stream1() -> Self {
        ClassPalette { stream: Stream::Stream1, classes: entries(&STREAM1_CLASSES) }
    }

    /// Fat-only stream: `{0: background, 1: fat}`.
    pub fn stream2() -> Self {
        ClassPalette { stream: Stream::Stream2, classes: entries(&[("background", [0, 0, 0]), ("fat", FAT_RGB)]) }
    }

    pub fn fused() -> Self {
        let mut classes = entries(&STREAM1_CLASSES);
        classes.push(ClassEntry { id: classes::FAT, name: "fat".into(), rgb: FAT_RGB });
        ClassPalette { stream: Stream::Fused, classes }
    }

    pub fn contains(&self, cls: ClassId) -> bool {
        (cls.0 as usize) < self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn id_of(&self, name: &str) -> Option<ClassId> {
        self.classes.iter().find(|c| c.name == name).map(|c| c.id)
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes.iter().map(|c| c.id)
    }

    /// Checks id contiguity and the per-stream class sets.
    pub fn validate(&self) -> Result<(), LabelError> {
        if self.classes.is_empty() || self.classes.len() > 256 {
            return Err(LabelError::PaletteMismatch("palette must hold 1..=256 classes".into()));
        }
        for (i, entry) in self.classes.iter().enumerate() {
            if entry.id.0 as usize != i {
                return Err(LabelError::PaletteMismatch(format!(
                    "class ids must be contiguous from 0, found {} at position {i}",
                    entry.id
                )));
            }
        }
        let ok = match self.stream {
            Stream::Stream1 => *self == Self::stream1(),
            Stream::Fused => *self == Self::fused(),
            Stream::Stream2 => self.id_of("fat").is_some(),
        };
        if ok {
            Ok(())
        } else {
            Err(LabelError::PaletteMismatch(format!("classes do not match the {:?} palette", self.stream)))
        }
    }
}

/// Row-major raster of class ids. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<ClassId>,
    palette: ClassPalette,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, data: Vec<ClassId>, palette: ClassPalette) -> Result<Self, LabelError> {
        check_dimensions(width, height)?;
        if data.len() != width * height {
            return Err(LabelError::InvariantViolation(format!(
                "data length {} != {width}x{height}",
                data.len()
            )));
        }
        palette.validate()?;
        if let Some(bad) = data.iter().find(|c| !palette.contains(**c)) {
            return Err(LabelError::UnknownClassId(bad.0));
        }
        Ok(LabelMap { width, height, data, palette })
    }

    pub fn filled(width: usize, height: usize, cls: ClassId, palette: ClassPalette) -> Result<Self, LabelError> {
        Self::new(width, height, vec![cls; width * height], palette)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn palette(&self) -> &ClassPalette {
        &self.palette
    }

    pub fn data(&self) -> &[ClassId] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> ClassId {
        self.data[y * self.width + x]
    }

    /// Bounds-checked lookup with signed coordinates.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> Option<ClassId> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(self.get(x as usize, y as usize))
        }
    }

    pub fn into_data(self) -> Vec<ClassId> {
        self.data
    }

    pub fn raw_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|c| c.0).collect()
    }

    pub fn count(&self, cls: ClassId) -> usize {
        self.data.iter().filter(|c| **c == cls).count()
    }
}

fn check_dimensions(width: usize, height: usize) -> Result<(), LabelError> {
    if width == 0 || height == 0 {
        return Err(LabelError::InvariantViolation("width and height must be >= 1".into()));
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(LabelError::InvariantViolation(format!(
            "{width}x{height} exceeds the {MAX_DIMENSION}x{MAX_DIMENSION} limit"
        )));
    }
    Ok(())
}

/// Boolean raster with the dimensions of the map it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl BinaryMask {
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }
}

pub fn class_mask(map: &LabelMap, cls: ClassId) -> Result<BinaryMask, LabelError> {
    if !map.palette.contains(cls) {
        return Err(LabelError::UnknownClassId(cls.0));
    }
    Ok(BinaryMask { width: map.width, height: map.height, bits: map.data.iter().map(|c| *c == cls).collect() })
}

/// Path of the palette sidecar belonging to `path`.
pub fn palette_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".palette.json");
    PathBuf::from(s)
}

/// Encodes raw 8-bit pixels as a P5 PGM with maxval 255.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Parses a P5 PGM, returning `(width, height, pixels)`.
///
/// Header tokens may be separated by any whitespace and `#` comments are
/// skipped; exactly one whitespace byte must follow the maxval.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), LabelError> {
    let bad = |m: &str| LabelError::MalformedPgm(m.to_string());
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("magic is not P5"));
    }
    let mut pos = 2;
    let next_token = |pos: &mut usize| -> Result<usize, LabelError> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|b| *b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| b.is_ascii_digit()) {
            *pos += 1;
        }
        if start == *pos {
            return Err(bad("expected a decimal header field"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header field out of range"))
    };
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("magic must be followed by whitespace"));
    }
    let width = next_token(&mut pos)?;
    let height = next_token(&mut pos)?;
    let maxval = next_token(&mut pos)?;
    if maxval != 255 {
        return Err(LabelError::MalformedPgm(format!("maxval {maxval}, expected 255")));
    }
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("maxval must be followed by one whitespace byte"));
    }
    pos += 1;
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(LabelError::MalformedPgm(format!("unsupported dimensions {width}x{height}")));
    }
    let body = &bytes[pos..];
    if body.len() != width * height {
        return Err(LabelError::MalformedPgm(format!(
            "expected {} data bytes, found {}",
            width * height,
            body.len()
        )));
    }
    Ok((width, height, body.to_vec()))
}

fn read_file(path: &Path) -> Result<Vec<u8>, LabelError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => LabelError::MissingFile(path.to_path_buf()),
        _ => LabelError::IoFailure { path: path.to_path_buf(), source: e },
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), LabelError> {
    fs::write(path, bytes).map_err(|e| LabelError::IoFailure { path: path.to_path_buf(), source: e })
}

pub fn load_label_map(path: &Path) -> Result<LabelMap, LabelError> {
    let (width, height, pixels) = decode_pgm(&read_file(path)?)?;
    let sidecar = read_file(&palette_path(path))?;
    let palette: ClassPalette =
        serde_json::from_slice(&sidecar).map_err(|e| LabelError::PaletteMismatch(e.to_string()))?;
    palette.validate()?;
    LabelMap::new(width, height, pixels.into_iter().map(ClassId).collect(), palette)
}

pub fn save_label_map(map: &LabelMap, path: &Path) -> Result<(), LabelError> {
    // Maps are validated on construction; re-check so a hand-built palette
    // swap can never produce an unreadable file.
    map.palette.validate()?;
    if let Some(bad) = map.data.iter().find(|c| !map.palette.contains(**c)) {
        return Err(LabelError::InvariantViolation(format!("class id {bad} not in palette")));
    }
    let mut json = serde_json::to_string_pretty(&map.palette).expect("palette serializes");
    json.push('\n');
    write_file(path, &encode_pgm(map.width, map.height, &map.raw_bytes()))?;
    write_file(&palette_path(path), json.as_bytes())
}

/// Writes raw pixels (no palette sidecar), used for overlays.
pub fn write_raw_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<(), LabelError> {
    write_file(path, &encode_pgm(width, height, pixels))
}
