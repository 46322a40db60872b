//! 2-D DFT helpers on row-major ndarray buffers.

use ndarray::{Array2, Axis};
use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Imaginary residue tolerated when projecting an inverse transform onto the reals.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// Unnormalized forward DFT of a real image.
pub fn fft2(img: &Array2<f64>) -> Array2<Complex64> {
    let mut buf = img.mapv(|v| Complex64::new(v, 0.0));
    transform(&mut buf, FftDirection::Forward);
    buf
}

/// Inverse DFT (normalized by 1/N) projected onto the reals.
///
/// Fails when the discarded imaginary part exceeds [`IMAG_TOLERANCE`]
/// relative to the output magnitude, which means the spectrum was not
/// Hermitian and a mask is inconsistent.
pub fn ifft2_real(mut spec: Array2<Complex64>) -> Result<Array2<f64>> {
    transform(&mut spec, FftDirection::Inverse);
    let n = spec.len() as f64;
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    let out = spec.mapv(|c| {
        let c = c / n;
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
        c.re
    });
    if max_im > IMAG_TOLERANCE * max_re.max(1.0) {
        return Err(Error::Internal(format!(
            "inverse transform left an imaginary residue of {max_im:e}"
        )));
    }
    Ok(out)
}

fn transform(buf: &mut Array2<Complex64>, direction: FftDirection) {
    let (rows, cols) = buf.dim();
    let mut planner = FftPlanner::new();

    let row_fft = planner.plan_fft(cols, direction);
    let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
    for mut row in buf.axis_iter_mut(Axis(0)) {
        let slice = row.as_slice_mut().expect("standard layout");
        row_fft.process_with_scratch(slice, &mut scratch);
    }

    // columns: work on a transposed copy so each column is contiguous
    let mut cols_major = buf.t().as_standard_layout().into_owned();
    let col_fft = planner.plan_fft(rows, direction);
    scratch.resize(col_fft.get_inplace_scratch_len(), Complex64::default());
    for mut col in cols_major.axis_iter_mut(Axis(0)) {
        let slice = col.as_slice_mut().expect("standard layout");
        col_fft.process_with_scratch(slice, &mut scratch);
    }
    buf.assign(&cols_major.t());
}

/// Signed frequency index of DFT bin `i` on an axis of length `n`.
pub fn signed_freq(i: usize, n: usize) -> isize {
    if i < n.div_ceil(2) {
        i as isize
    } else {
        i as isize - n as isize
    }
}

fn bin_of(freq: isize, n: usize) -> usize {
    freq.rem_euclid(n as isize) as usize
}

/// Keeps the central `new_rows x new_cols` block of frequencies.
///
/// The result is scaled so that the DC term keeps its spatial amplitude
/// after the smaller inverse transform.
pub fn crop_spectrum(spec: &Array2<Complex64>, new_rows: usize, new_cols: usize) -> Array2<Complex64> {
    let (rows, cols) = spec.dim();
    let scale = (new_rows * new_cols) as f64 / (rows * cols) as f64;
    Array2::from_shape_fn((new_rows, new_cols), |(r, c)| {
        let src_r = bin_of(signed_freq(r, new_rows), rows);
        let src_c = bin_of(signed_freq(c, new_cols), cols);
        spec[(src_r, src_c)] * scale
    })
}

/// Inverse of [`crop_spectrum`]: embeds a spectrum in a larger zero spectrum.
pub fn pad_spectrum(spec: &Array2<Complex64>, new_rows: usize, new_cols: usize) -> Array2<Complex64> {
    let (rows, cols) = spec.dim();
    let scale = (new_rows * new_cols) as f64 / (rows * cols) as f64;
    let mut out = Array2::from_elem((new_rows, new_cols), Complex64::default());
    for ((r, c), &v) in spec.indexed_iter() {
        let dst_r = bin_of(signed_freq(r, rows), new_rows);
        let dst_c = bin_of(signed_freq(c, cols), new_cols);
        out[(dst_r, dst_c)] = v * scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(img: &Array2<f64>) -> Array2<Complex64> {
        let (h, w) = img.dim();
        Array2::from_shape_fn((h, w), |(u, v)| {
            let mut acc = Complex64::default();
            for ((y, x), &val) in img.indexed_iter() {
                let phase = -2.0
                    * std::f64::consts::PI
                    * ((u * y) as f64 / h as f64 + (v * x) as f64 / w as f64);
                acc += Complex64::from_polar(val, phase);
            }
            acc
        })
    }

    #[test]
    fn matches_naive_dft_on_rectangle() {
        let img = Array2::from_shape_fn((4, 6), |(r, c)| ((r * 7 + c * 3) % 5) as f64 - 1.5);
        let fast = fft2(&img);
        let slow = naive_dft(&img);
        for (a, b) in fast.iter().zip(slow.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        let back = ifft2_real(fast).unwrap();
        for (a, b) in back.iter().zip(img.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_freq_layout() {
        let even: Vec<isize> = (0..4).map(|i| signed_freq(i, 4)).collect();
        assert_eq!(even, vec![0, 1, -2, -1]);
        let odd: Vec<isize> = (0..5).map(|i| signed_freq(i, 5)).collect();
        assert_eq!(odd, vec![0, 1, 2, -2, -1]);
    }

    #[test]
    fn crop_then_pad_keeps_low_frequencies() {
        let spec = Array2::from_shape_fn((8, 8), |(r, c)| Complex64::new((r * 8 + c) as f64, 1.0));
        let cropped = crop_spectrum(&spec, 4, 4);
        let back = pad_spectrum(&cropped, 8, 8);
        for (r, c) in [(0usize, 0usize), (1, 1), (7, 7), (6, 1), (1, 6)] {
            assert!((back[(r, c)] - spec[(r, c)]).norm() < 1e-12);
        }
        // frequency 3 on an 8-axis is outside the kept band
        assert_eq!(back[(3, 0)], Complex64::default());
    }

    #[test]
    fn imaginary_residue_is_an_error() {
        let mut spec = Array2::from_elem((4, 4), Complex64::default());
        spec[(0, 1)] = Complex64::new(16.0, 0.0);
        assert!(matches!(ifft2_real(spec), Err(Error::Internal(_))));
    }
}
