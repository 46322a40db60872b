//! Spatial-domain Laplacian pyramid with the separable (1, 4, 6, 4, 1)/16
//! kernel and mirror extension at the edges.

use ndarray::{Array2, Axis};

use super::max_levels;
use crate::error::{Error, Result};

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Band-pass details (fine to coarse) plus the coarsest low-pass image.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPyramid {
    pub details: Vec<Array2<f64>>,
    pub base: Array2<f64>,
}

impl LaplacianPyramid {
    pub fn depth(&self) -> usize {
        self.details.len()
    }
}

/// Mirror index without edge repetition: -1 -> 1, n -> n - 2.
fn mirror(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

fn convolve_axis(img: &Array2<f64>, axis: Axis, gain: f64) -> Array2<f64> {
    let n = img.len_of(axis);
    let mut out = Array2::zeros(img.dim());
    for (src, mut dst) in img.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        for i in 0..n {
            let mut acc = 0.0;
            for (t, w) in KERNEL.iter().enumerate() {
                acc += w * src[mirror(i as isize + t as isize - 2, n)];
            }
            dst[i] = gain * acc;
        }
    }
    out
}

fn blur(img: &Array2<f64>, gain: f64) -> Array2<f64> {
    let rows = convolve_axis(img, Axis(1), gain);
    convolve_axis(&rows, Axis(0), gain)
}

/// Blur then keep every other row and column.
pub fn reduce(img: &Array2<f64>) -> Array2<f64> {
    let b = blur(img, 1.0);
    let (rows, cols) = img.dim();
    Array2::from_shape_fn((rows / 2, cols / 2), |(r, c)| b[(2 * r, 2 * c)])
}

/// Zero-insert to `(rows, cols)` and interpolate with the same kernel.
pub fn expand(img: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let mut up = Array2::zeros((rows, cols));
    for ((r, c), &v) in img.indexed_iter() {
        up[(2 * r, 2 * c)] = v;
    }
    blur(&up, 2.0)
}

/// Decomposes `x` into `depth` detail levels and a base.
pub fn build_laplacian(x: &Array2<f64>, depth: usize) -> Result<LaplacianPyramid> {
    let (rows, cols) = x.dim();
    let max = max_levels(cols, rows);
    if depth > max {
        return Err(Error::Depth {
            requested: depth,
            max,
            width: cols,
            height: rows,
        });
    }
    let mut details = Vec::with_capacity(depth);
    let mut current = x.clone();
    for _ in 0..depth {
        let (r, c) = current.dim();
        let low = reduce(&current);
        let detail = &current - &expand(&low, r, c);
        details.push(detail);
        current = low;
    }
    Ok(LaplacianPyramid {
        details,
        base: current,
    })
}

/// Inverse of [`build_laplacian`].
pub fn reconstruct_laplacian(p: &LaplacianPyramid) -> Result<Array2<f64>> {
    let mut current = p.base.clone();
    for detail in p.details.iter().rev() {
        let (r, c) = detail.dim();
        if (r / 2, c / 2) != current.dim() || r % 2 != 0 || c % 2 != 0 {
            return Err(Error::Shape(format!(
                "detail {}x{} cannot sit above a {}x{} level",
                c,
                r,
                current.ncols(),
                current.nrows()
            )));
        }
        current = expand(&current, r, c) + detail;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_indices() {
        let got: Vec<usize> = (-3..8).map(|i| mirror(i, 5)).collect();
        assert_eq!(got, vec![3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(mirror(-2, 1), 0);
    }

    #[test]
    fn impulse_depth_one_is_exact() {
        let mut x = Array2::zeros((8, 8));
        x[(3, 5)] = 1.0;
        let p = build_laplacian(&x, 1).unwrap();
        assert_eq!(p.details.len(), 1);
        let sum = &p.details[0] + &expand(&p.base, 8, 8);
        for (a, b) in sum.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_has_no_detail() {
        let x = Array2::from_elem((16, 16), 7.0);
        let p = build_laplacian(&x, 2).unwrap();
        for d in &p.details {
            assert!(d.iter().all(|v| v.abs() < 1e-10));
        }
        assert!(p.base.iter().all(|v| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn depth_zero_is_identity() {
        let x = Array2::from_shape_fn((4, 4), |(r, c)| (r * 4 + c) as f64);
        let p = build_laplacian(&x, 0).unwrap();
        assert!(p.details.is_empty());
        assert_eq!(p.base, x);
        assert_eq!(reconstruct_laplacian(&p).unwrap(), x);
    }

    #[test]
    fn depth_checked_against_subimage_size() {
        assert!(matches!(
            build_laplacian(&Array2::zeros((8, 8)), 2),
            Err(Error::Depth { max: 1, .. })
        ));
    }

    #[test]
    fn broken_chain_is_shape_error() {
        let p = LaplacianPyramid {
            details: vec![Array2::zeros((8, 8))],
            base: Array2::zeros((3, 4)),
        };
        assert!(matches!(reconstruct_laplacian(&p), Err(Error::Shape(_))));
    }
}
