//! Dense text tensor format.
//!
//! ```text
//! channels height width
//! v v v ...      <- one line per (channel, row), channel-major
//! ```
//!
//! Values are whitespace-separated decimals. Blank lines and lines starting
//! with `#` are ignored; row breaks are not significant when parsing, only
//! the total count.

use std::fmt::Write as _;

use crate::sobel_loss::{LossError, Tensor3};
use crate::Scalar;

pub fn parse_tensor<T: Scalar>(text: &str) -> Result<Tensor3<T>, LossError> {
    let mut tokens = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(str::split_whitespace);
    let mut dim = |name: &str| -> Result<usize, LossError> {
        let tok = tokens.next().ok_or_else(|| LossError::InvalidTensor(format!("missing {name} in header")))?;
        tok.parse().map_err(|_| LossError::InvalidTensor(format!("bad {name} '{tok}'")))
    };
    let (c, h, w) = (dim("channels")?, dim("height")?, dim("width")?);
    let data = tokens
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .and_then(T::from_f64)
                .ok_or_else(|| LossError::InvalidTensor(format!("bad value '{t}'")))
        })
        .collect::<Result<Vec<T>, _>>()?;
    Tensor3::new(c, h, w, data)
}

pub fn format_tensor<T: Scalar>(t: &Tensor3<T>) -> String {
    let mut out = format!("{} {} {}\n", t.channels, t.height, t.width);
    for row in t.data.chunks(t.width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v}").expect("write to string");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let t = Tensor3::new(2, 2, 3, vec![0.1, 0.2, 1.0 / 3.0, 0.0, 1.0, 1e-300, 0.9, 0.8, 2.0 / 3.0, 1.0, 0.0, 0.5]).unwrap();
        let text = format_tensor(&t);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(parse_tensor::<f64>(&text).unwrap(), t);
    }

    #[test]
    fn comments_and_bad_input() {
        let t: Tensor3<f32> = parse_tensor("# g\n1 1 2\n\n0.25 0.75\n").unwrap();
        assert_eq!(t.data, vec![0.25, 0.75]);
        assert!(parse_tensor::<f64>("1 1 2\n0.5\n").is_err());
        assert!(parse_tensor::<f64>("1 1 1\nx\n").is_err());
        assert!(parse_tensor::<f64>("1 1 1\nNaN\n").is_err());
        assert!(parse_tensor::<f64>("").is_err());
    }
}
