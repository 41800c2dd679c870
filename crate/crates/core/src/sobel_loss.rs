//! Edge-aware segmentation loss: cross-entropy plus a smooth-L1 penalty on
//! the difference between Sobel edge maps of ground truth and prediction,
//! with exact analytic gradients.
//!
//! Sobel kernels are applied as cross-correlation (no flip) with replicate
//! border padding:
//!
//! ```text
//! Gx = [ 2 0 -2 ]      Gy = [  2  4  2 ]
//!      [ 4 0 -4 ]           [  0  0  0 ]
//!      [ 2 0 -2 ]           [ -2 -4 -2 ]
//! ```
//!
//! and the magnitude is `sqrt(Gx^2 + Gy^2 + EPS)` so it is differentiable at
//! zero. Each channel is filtered separately and the per-channel magnitudes
//! are reduced (sum or max) into one class-agnostic edge map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub const EPS: f64 = 1e-12;
/// Lower clamp for probabilities inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

const KX: [[f64; 3]; 3] = [[2.0, 0.0, -2.0], [4.0, 0.0, -4.0], [2.0, 0.0, -2.0]];
const KY: [[f64; 3]; 3] = [[2.0, 4.0, 2.0], [0.0, 0.0, 0.0], [-2.0, -4.0, -2.0]];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize, usize), (usize, usize, usize)),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
}

impl LossError {
    pub fn kind(&self) -> &'static str {
        match self {
            LossError::ShapeMismatch(..) => "ShapeMismatch",
            LossError::InvalidTensor(_) => "InvalidTensor",
        }
    }
}

/// Dense `[channel][y][x]` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self, LossError> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(LossError::InvalidTensor("all dimensions must be >= 1".into()));
        }
        if data.len() != channels * height * width {
            return Err(LossError::InvalidTensor(format!(
                "expected {} values, found {}",
                channels * height * width,
                data.len()
            )));
        }
        Ok(Tensor3 { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Tensor3 { channels, height, width, data: vec![T::zero(); channels * height * width] }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    pub fn channel(&self, c: usize) -> &[T] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }
}

/// Per-pixel class probabilities: values in `[0, 1]`, channels sum to 1
/// within `1e-6`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap<T>(Tensor3<T>);

/// One-hot ground truth: exactly one 1 per pixel, zeros elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotMap<T>(Tensor3<T>);

impl<T: Scalar> ProbMap<T> {
    pub fn new(t: Tensor3<T>) -> Result<Self, LossError> {
        let n = t.height * t.width;
        let tol = T::lit(1e-6);
        for i in 0..n {
            let mut sum = T::zero();
            for c in 0..t.channels {
                let v = t.data[c * n + i];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(LossError::InvalidTensor(format!("probability {v} outside [0, 1]")));
                }
                sum += v;
            }
            if (sum - T::one()).abs() > tol {
                return Err(LossError::InvalidTensor(format!("channel sum {sum} at pixel {i} is not 1")));
            }
        }
        Ok(ProbMap(t))
    }

    pub fn tensor(&self) -> &Tensor3<T> {
        &self.0
    }
}

impl<T: Scalar> OneHotMap<T> {
    pub fn new(t: Tensor3<T>) -> Result<Self, LossError> {
        let n = t.height * t.width;
        for i in 0..n {
            let mut ones = 0;
            for c in 0..t.channels {
                let v = t.data[c * n + i];
                if v == T::one() {
                    ones += 1;
                } else if v != T::zero() {
                    return Err(LossError::InvalidTensor(format!("one-hot value {v} is not 0 or 1")));
                }
            }
            if ones != 1 {
                return Err(LossError::InvalidTensor(format!("pixel {i} has {ones} hot channels")));
            }
        }
        Ok(OneHotMap(t))
    }

    /// One-hot encoding of a row-major label raster.
    pub fn from_labels(labels: &[usize], channels: usize, height: usize, width: usize) -> Result<Self, LossError> {
        if labels.len() != height * width {
            return Err(LossError::InvalidTensor("label count does not match height x width".into()));
        }
        let mut t = Tensor3::zeros(channels, height, width);
        for (i, &l) in labels.iter().enumerate() {
            if l >= channels {
                return Err(LossError::InvalidTensor(format!("label {l} >= {channels} channels")));
            }
            t.data[l * height * width + i] = T::one();
        }
        Self::new(t)
    }

    pub fn tensor(&self) -> &Tensor3<T> {
        &self.0
    }

    /// Probability map that puts all mass on the true class.
    pub fn as_prob_map(&self) -> ProbMap<T> {
        ProbMap(self.0.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelReduce {
    #[default]
    Sum,
    Max,
}

impl std::str::FromStr for ChannelReduce {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(ChannelReduce::Sum),
            "max" => Ok(ChannelReduce::Max),
            other => Err(format!("unknown channel reduction '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig<T> {
    /// Weight of the Sobel term.
    pub lambda: T,
    pub smooth_l1_beta: T,
    pub channel_reduce: ChannelReduce,
}

impl<T: Scalar> Default for LossConfig<T> {
    fn default() -> Self {
        LossConfig { lambda: T::one(), smooth_l1_beta: T::one(), channel_reduce: ChannelReduce::Sum }
    }
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Raw Sobel responses `(Gx, Gy)` of a row-major image.
pub fn sobel_gradients<T: Scalar>(img: &[T], width: usize, height: usize) -> (Vec<T>, Vec<T>) {
    assert_eq!(img.len(), width * height, "image size");
    let mut gx = vec![T::zero(); img.len()];
    let mut gy = vec![T::zero(); img.len()];
    for y in 0..height {
        for x in 0..width {
            let (mut sx, mut sy) = (T::zero(), T::zero());
            for (i, (kx_row, ky_row)) in KX.iter().zip(KY.iter()).enumerate() {
                let yy = clamp_index(y as isize + i as isize - 1, height);
                for j in 0..3 {
                    let xx = clamp_index(x as isize + j as isize - 1, width);
                    let v = img[yy * width + xx];
                    sx += T::lit(kx_row[j]) * v;
                    sy += T::lit(ky_row[j]) * v;
                }
            }
            gx[y * width + x] = sx;
            gy[y * width + x] = sy;
        }
    }
    (gx, gy)
}

/// `sqrt(Gx^2 + Gy^2 + EPS)` per pixel.
pub fn sobel_magnitude<T: Scalar>(img: &[T], width: usize, height: usize) -> Vec<T> {
    let (gx, gy) = sobel_gradients(img, width, height);
    let eps = T::lit(EPS);
    gx.iter().zip(&gy).map(|(&a, &b)| (a * a + b * b + eps).sqrt()).collect()
}

pub fn smooth_l1<T: Scalar>(x: T, beta: T) -> T {
    let ax = x.abs();
    if ax < beta {
        T::lit(0.5) * x * x / beta
    } else {
        ax - T::lit(0.5) * beta
    }
}

fn smooth_l1_grad<T: Scalar>(x: T, beta: T) -> T {
    if x.abs() < beta {
        x / beta
    } else {
        x.signum()
    }
}

struct EdgeMap<T> {
    /// Reduced edge value per pixel.
    edge: Vec<T>,
    /// Per-channel `(Gx, Gy, magnitude)`.
    parts: Vec<(Vec<T>, Vec<T>, Vec<T>)>,
}

fn edge_map<T: Scalar>(t: &Tensor3<T>, reduce: ChannelReduce) -> EdgeMap<T> {
    let n = t.height * t.width;
    let eps = T::lit(EPS);
    let parts: Vec<_> = (0..t.channels)
        .map(|c| {
            let (gx, gy) = sobel_gradients(t.channel(c), t.width, t.height);
            let mag: Vec<T> = gx.iter().zip(&gy).map(|(&a, &b)| (a * a + b * b + eps).sqrt()).collect();
            (gx, gy, mag)
        })
        .collect();
    let edge = (0..n)
        .map(|i| {
            let vals = parts.iter().map(|p| p.2[i]);
            match reduce {
                ChannelReduce::Sum => vals.fold(T::zero(), |a, b| a + b),
                ChannelReduce::Max => vals.fold(T::neg_infinity(), T::max),
            }
        })
        .collect();
    EdgeMap { edge, parts }
}

fn check_shapes<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>) -> Result<(), LossError> {
    if g.shape() != p.shape() {
        return Err(LossError::ShapeMismatch(g.shape(), p.shape()));
    }
    Ok(())
}

/// Sobel loss over unvalidated tensors; pixel mean, row-major accumulation.
pub fn sobel_loss_raw<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>, cfg: &LossConfig<T>) -> Result<T, LossError> {
    check_shapes(g, p)?;
    let eg = edge_map(g, cfg.channel_reduce).edge;
    let ep = edge_map(p, cfg.channel_reduce).edge;
    let mut acc = T::zero();
    for (a, b) in eg.iter().zip(&ep) {
        acc += smooth_l1(*a - *b, cfg.smooth_l1_beta);
    }
    Ok(acc / T::from_count(eg.len() as i64))
}

/// Pixel-mean cross-entropy `-log p[true class]` with `g` one-hot.
pub fn cross_entropy_raw<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>) -> Result<T, LossError> {
    check_shapes(g, p)?;
    let n = g.height * g.width;
    let floor = T::lit(PROB_FLOOR);
    let mut acc = T::zero();
    for i in 0..n {
        for c in 0..g.channels {
            if g.data[c * n + i] == T::one() {
                acc -= p.data[c * n + i].max(floor).ln();
            }
        }
    }
    Ok(acc / T::from_count(n as i64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossParts<T> {
    pub ce: T,
    pub sobel: T,
    pub total: T,
}

pub fn loss_parts_raw<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>, cfg: &LossConfig<T>) -> Result<LossParts<T>, LossError> {
    let ce = cross_entropy_raw(g, p)?;
    let sobel = sobel_loss_raw(g, p, cfg)?;
    Ok(LossParts { ce, sobel, total: ce + cfg.lambda * sobel })
}

pub fn total_loss_raw<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>, cfg: &LossConfig<T>) -> Result<T, LossError> {
    Ok(loss_parts_raw(g, p, cfg)?.total)
}

/// Analytic gradient of the total loss with respect to every entry of `p`,
/// treating entries as free variables.
pub fn grad_total_loss_raw<T: Scalar>(g: &Tensor3<T>, p: &Tensor3<T>, cfg: &LossConfig<T>) -> Result<Tensor3<T>, LossError> {
    check_shapes(g, p)?;
    let (channels, height, width) = p.shape();
    let n = height * width;
    let inv_n = T::one() / T::from_count(n as i64);
    let mut grad = Tensor3::zeros(channels, height, width);

    let floor = T::lit(PROB_FLOOR);
    for c in 0..channels {
        for i in 0..n {
            let k = c * n + i;
            if g.data[k] == T::one() && p.data[k] > floor {
                grad.data[k] = -inv_n / p.data[k];
            }
        }
    }

    if cfg.lambda == T::zero() {
        return Ok(grad);
    }
    let eg = edge_map(g, cfg.channel_reduce).edge;
    let ep = edge_map(p, cfg.channel_reduce);
    // d(lambda * S) / d edge_p
    let upstream: Vec<T> = eg
        .iter()
        .zip(&ep.edge)
        .map(|(&a, &b)| -cfg.lambda * inv_n * smooth_l1_grad(a - b, cfg.smooth_l1_beta))
        .collect();

    for (c, (gx, gy, mag)) in ep.parts.iter().enumerate() {
        let out = &mut grad.data[c * n..(c + 1) * n];
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                let share = match cfg.channel_reduce {
                    ChannelReduce::Sum => T::one(),
                    ChannelReduce::Max => {
                        // first channel attaining the max receives the gradient
                        let winner = (0..channels).find(|&cc| ep.parts[cc].2[i] == ep.edge[i]);
                        if winner == Some(c) {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                };
                if share == T::zero() {
                    continue;
                }
                let u = upstream[i] * share;
                let (ux, uy) = (u * gx[i] / mag[i], u * gy[i] / mag[i]);
                for (di, (kx_row, ky_row)) in KX.iter().zip(KY.iter()).enumerate() {
                    let yy = clamp_index(y as isize + di as isize - 1, height);
                    for dj in 0..3 {
                        let xx = clamp_index(x as isize + dj as isize - 1, width);
                        out[yy * width + xx] += ux * T::lit(kx_row[dj]) + uy * T::lit(ky_row[dj]);
                    }
                }
            }
        }
    }
    Ok(grad)
}

pub fn sobel_loss<T: Scalar>(g: &OneHotMap<T>, p: &ProbMap<T>, cfg: &LossConfig<T>) -> Result<T, LossError> {
    sobel_loss_raw(g.tensor(), p.tensor(), cfg)
}

pub fn total_loss<T: Scalar>(g: &OneHotMap<T>, p: &ProbMap<T>, cfg: &LossConfig<T>) -> Result<T, LossError> {
    total_loss_raw(g.tensor(), p.tensor(), cfg)
}

pub fn grad_total_loss<T: Scalar>(g: &OneHotMap<T>, p: &ProbMap<T>, cfg: &LossConfig<T>) -> Result<Tensor3<T>, LossError> {
    grad_total_loss_raw(g.tensor(), p.tensor(), cfg)
}

/// Central finite-difference gradient of the total loss, step `h`.
/// Uses only forward evaluations.
pub fn finite_difference_grad<T: Scalar>(
    g: &Tensor3<T>,
    p: &Tensor3<T>,
    cfg: &LossConfig<T>,
    h: T,
) -> Result<Tensor3<T>, LossError> {
    check_shapes(g, p)?;
    let mut probe = p.clone();
    let mut out = Tensor3::zeros(p.channels, p.height, p.width);
    let two_h = h + h;
    for k in 0..p.data.len() {
        let orig = probe.data[k];
        probe.data[k] = orig + h;
        let up = total_loss_raw(g, &probe, cfg)?;
        probe.data[k] = orig - h;
        let down = total_loss_raw(g, &probe, cfg)?;
        probe.data[k] = orig;
        out.data[k] = (up - down) / two_h;
    }
    Ok(out)
}

/// `||a - b||_2 / ||b||_2`, with `b` the reference (0 when both vanish).
pub fn normwise_relative_error<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>) -> T {
    let sq = |it: &mut dyn Iterator<Item = T>| it.fold(T::zero(), |s, v| s + v * v).sqrt();
    let diff = sq(&mut a.data.iter().zip(&b.data).map(|(&x, &y)| x - y));
    let scale = sq(&mut b.data.iter().copied());
    if scale == T::zero() {
        if diff == T::zero() {
            T::zero()
        } else {
            T::infinity()
        }
    } else {
        diff / scale
    }
}

/// Largest `|a - b| / max(|a|, |b|)` over entries (0 when both are 0).
pub fn max_relative_error<T: Scalar>(a: &Tensor3<T>, b: &Tensor3<T>) -> T {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            if scale == T::zero() {
                T::zero()
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_image(w: usize, h: usize, at: usize) -> Vec<f64> {
        (0..h).flat_map(|_| (0..w).map(move |x| if x < at { 0.0 } else { 1.0 })).collect()
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = vec![0.3f64; 25];
        for m in sobel_magnitude(&img, 5, 5) {
            assert!(m <= EPS.sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn vertical_step_gives_eight() {
        let (w, h) = (8, 6);
        let img = step_image(w, h, 4);
        let (gx, gy) = sobel_gradients(&img, w, h);
        for y in 0..h {
            for x in 0..w {
                let expect = if x == 3 || x == 4 { -8.0 } else { 0.0 };
                assert_eq!(gx[y * w + x], expect, "({x},{y})");
                assert_eq!(gy[y * w + x], 0.0);
            }
        }
        // transpose: the step becomes horizontal and shows up in Gy
        let t: Vec<f64> = (0..w).flat_map(|x| (0..h).map(move |y| (x, y))).map(|(x, y)| img[y * w + x]).collect();
        let (tx, ty) = sobel_gradients(&t, h, w);
        for xt in 0..h {
            for yt in 0..w {
                assert_eq!(ty[yt * h + xt], gx[xt * w + yt]);
                assert_eq!(tx[yt * h + xt], 0.0);
            }
        }
    }

    #[test]
    fn smooth_l1_values() {
        assert_eq!(smooth_l1(0.0, 1.0), 0.0);
        assert_eq!(smooth_l1(0.5, 1.0), 0.125);
        assert_eq!(smooth_l1(2.0, 1.0), 1.5);
        assert_eq!(smooth_l1(-2.0, 1.0), 1.5);
        assert_eq!(smooth_l1(1.0f32, 1.0), 0.5);
    }

    fn two_class(w: usize, h: usize) -> OneHotMap<f64> {
        let labels: Vec<usize> = (0..h).flat_map(|_| (0..w).map(|x| usize::from(x >= w / 2))).collect();
        OneHotMap::from_labels(&labels, 2, h, w).unwrap()
    }

    #[test]
    fn identical_inputs_give_zero() {
        let g = two_class(6, 5);
        let p = g.as_prob_map();
        let cfg = LossConfig::default();
        assert_eq!(sobel_loss(&g, &p, &cfg).unwrap(), 0.0);
        assert_eq!(total_loss(&g, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn uniform_prediction_sees_only_truth_edges() {
        let (w, h) = (6, 5);
        let g = two_class(w, h);
        let p = ProbMap::new(Tensor3::new(2, h, w, vec![0.5; 2 * w * h]).unwrap()).unwrap();
        let cfg = LossConfig::default();
        let eg = edge_map(g.tensor(), ChannelReduce::Sum).edge;
        let expected: f64 = eg.iter().map(|&e| smooth_l1(e, 1.0)).sum::<f64>() / (w * h) as f64;
        let got = sobel_loss(&g, &p, &cfg).unwrap();
        assert!((got - expected).abs() < 1e-5, "{got} vs {expected}");
        // symmetric in its arguments
        let swapped = sobel_loss_raw(p.tensor(), g.tensor(), &cfg).unwrap();
        assert_eq!(got, swapped);
    }

    #[test]
    fn lambda_linearity_and_ce_only() {
        let (w, h) = (5, 4);
        let g = two_class(w, h);
        let vals: Vec<f64> = (0..w * h).map(|i| 0.2 + 0.6 * ((i * 7919) % 13) as f64 / 13.0).collect();
        let mut data = vals.clone();
        data.extend(vals.iter().map(|v| 1.0 - v));
        let p = ProbMap::new(Tensor3::new(2, h, w, data).unwrap()).unwrap();
        let ce = cross_entropy_raw(g.tensor(), p.tensor()).unwrap();
        let zero = LossConfig { lambda: 0.0, ..LossConfig::default() };
        assert_eq!(total_loss(&g, &p, &zero).unwrap(), ce);
        let one = total_loss(&g, &p, &LossConfig { lambda: 1.0, ..LossConfig::default() }).unwrap() - ce;
        let two = total_loss(&g, &p, &LossConfig { lambda: 2.0, ..LossConfig::default() }).unwrap() - ce;
        assert!((two - 2.0 * one).abs() < 1e-12);
    }

    #[test]
    fn ce_gradient_at_one_hot() {
        let g = two_class(4, 4);
        let p = g.as_prob_map();
        let grad = grad_total_loss(&g, &p, &LossConfig::default()).unwrap();
        let n = 16.0;
        for (k, &v) in g.tensor().data.iter().enumerate() {
            if v == 1.0 {
                // CE part is -1/(N p) = -1/N; the Sobel part vanishes since edges match
                assert!((grad.data[k] + 1.0 / n).abs() < 1e-12);
            }
        }
        let no_sobel = grad_total_loss(&g, &p, &LossConfig { lambda: 0.0, ..LossConfig::default() }).unwrap();
        for (k, &v) in g.tensor().data.iter().enumerate() {
            assert_eq!(no_sobel.data[k], if v == 1.0 { -1.0 / n } else { 0.0 });
        }
    }

    #[test]
    fn validation_errors() {
        assert!(ProbMap::new(Tensor3::new(2, 1, 1, vec![0.7, 0.7]).unwrap()).is_err());
        assert!(ProbMap::new(Tensor3::new(2, 1, 1, vec![1.2, -0.2]).unwrap()).is_err());
        assert!(OneHotMap::new(Tensor3::new(2, 1, 1, vec![1.0, 1.0]).unwrap()).is_err());
        assert!(Tensor3::<f64>::new(2, 2, 2, vec![0.0; 7]).is_err());
        let g = two_class(4, 4);
        let p = two_class(4, 3).as_prob_map();
        assert_eq!(total_loss(&g, &p, &LossConfig::default()).unwrap_err().kind(), "ShapeMismatch");
    }
}
