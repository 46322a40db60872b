//! Steerable pyramid analysis and synthesis in the frequency domain.
//!
//! Boundaries are periodic. Each coarser stage is obtained by keeping the
//! central quadrant of the spectrum, scaled so that subimages keep the
//! amplitude of the input (a constant image shows up as the same constant
//! in the low-pass residual). With that convention the transform is a
//! tight frame for the area-weighted energy returned by
//! [`SteerablePyramid::weighted_energy`].

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex64;

use super::fft::{crop_spectrum, fft2, ifft2_real, pad_spectrum};
use super::filters::FilterBank;
use crate::error::{Error, Result};

/// Multi-scale, multi-orientation coefficient set.
#[derive(Debug, Clone, PartialEq)]
pub struct SteerablePyramid {
    /// Full-resolution residual above the first split.
    pub highpass: Array2<f64>,
    /// `levels[l][k]`: orientation `k` at stage `l`, size `(h >> l, w >> l)`.
    pub levels: Vec<Vec<Array2<f64>>>,
    /// Low-pass residual, size `(h >> L, w >> L)`.
    pub lowpass: Array2<f64>,
    pub width: usize,
    pub height: usize,
    pub orientations: usize,
}

impl SteerablePyramid {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Number of subbands: highpass, `L * K` oriented bands and the lowpass.
    pub fn band_count(&self) -> usize {
        2 + self.levels.iter().map(Vec::len).sum::<usize>()
    }

    /// Sum of squared coefficients, each weighted by the input area one
    /// coefficient covers (`4^l` at stage `l`).
    pub fn weighted_energy(&self) -> f64 {
        let sq = |a: &Array2<f64>| a.iter().map(|v| v * v).sum::<f64>();
        let mut total = sq(&self.highpass);
        for (l, bands) in self.levels.iter().enumerate() {
            let area = (1usize << (2 * l)) as f64;
            total += area * bands.iter().map(sq).sum::<f64>();
        }
        total + (1usize << (2 * self.depth())) as f64 * sq(&self.lowpass)
    }

    /// All subbands in a fixed order: highpass, stage 0 orientations, ..., lowpass.
    pub fn bands(&self) -> Vec<&Array2<f64>> {
        let mut out = vec![&self.highpass];
        out.extend(self.levels.iter().flatten());
        out.push(&self.lowpass);
        out
    }

    /// Rebuilds a pyramid of the same layout from subbands in [`Self::bands`] order.
    pub fn with_bands(&self, bands: Vec<Array2<f64>>) -> Result<Self> {
        if bands.len() != self.band_count() {
            return Err(Error::Shape(format!(
                "expected {} subbands, got {}",
                self.band_count(),
                bands.len()
            )));
        }
        let mut it = bands.into_iter();
        let highpass = it.next().expect("counted");
        let levels = self
            .levels
            .iter()
            .map(|l| it.by_ref().take(l.len()).collect())
            .collect();
        let lowpass = it.next().expect("counted");
        let out = Self {
            highpass,
            levels,
            lowpass,
            width: self.width,
            height: self.height,
            orientations: self.orientations,
        };
        out.check_layout()?;
        Ok(out)
    }

    fn check_layout(&self) -> Result<()> {
        let expect = |a: &Array2<f64>, rows: usize, cols: usize, what: &str| {
            if a.dim() == (rows, cols) {
                Ok(())
            } else {
                Err(Error::Shape(format!(
                    "{what} is {}x{}, expected {cols}x{rows}",
                    a.ncols(),
                    a.nrows()
                )))
            }
        };
        expect(&self.highpass, self.height, self.width, "highpass")?;
        for (l, bands) in self.levels.iter().enumerate() {
            if bands.len() != self.orientations {
                return Err(Error::Shape(format!(
                    "stage {l} holds {} orientations, expected {}",
                    bands.len(),
                    self.orientations
                )));
            }
            for (k, b) in bands.iter().enumerate() {
                expect(b, self.height >> l, self.width >> l, &format!("band ({l}, {k})"))?;
            }
        }
        let d = self.depth();
        expect(&self.lowpass, self.height >> d, self.width >> d, "lowpass")
    }
}

fn scale(spec: &Array2<Complex64>, mask: &Array2<f64>) -> Array2<Complex64> {
    let mut out = spec.clone();
    Zip::from(&mut out).and(mask).for_each(|s, &m| *s *= m);
    out
}

/// Decomposes `x` with an existing filter bank.
pub fn build_with(bank: &FilterBank, x: &Array2<f64>) -> Result<SteerablePyramid> {
    if x.dim() != (bank.height(), bank.width()) {
        return Err(Error::Shape(format!(
            "image is {}x{}, filter bank expects {}x{}",
            x.ncols(),
            x.nrows(),
            bank.width(),
            bank.height()
        )));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite sample {bad} in pyramid input")));
    }

    let spec = fft2(x);
    let highpass = ifft2_real(scale(&spec, bank.hi0()))?;
    let mut lo = scale(&spec, bank.lo0());
    let phase = bank.band_phase();

    let mut levels = Vec::with_capacity(bank.levels());
    for stage in bank.stages() {
        let bands = stage
            .angular
            .iter()
            .map(|g| {
                let mut band = lo.clone();
                Zip::from(&mut band)
                    .and(&stage.high)
                    .and(g)
                    .for_each(|s, &h, &a| *s *= phase * (h * a));
                ifft2_real(band)
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(bands);
        let masked = scale(&lo, &stage.low);
        lo = crop_spectrum(&masked, stage.rows / 2, stage.cols / 2);
    }
    let lowpass = ifft2_real(lo)?;

    Ok(SteerablePyramid {
        highpass,
        levels,
        lowpass,
        width: bank.width(),
        height: bank.height(),
        orientations: bank.orientations(),
    })
}

/// Synthesizes an image from a pyramid with an existing filter bank.
pub fn reconstruct_with(bank: &FilterBank, p: &SteerablePyramid) -> Result<Array2<f64>> {
    p.check_layout()?;
    if (p.width, p.height, p.depth(), p.orientations)
        != (bank.width(), bank.height(), bank.levels(), bank.orientations())
    {
        return Err(Error::Shape(
            "pyramid layout does not match the filter bank".into(),
        ));
    }
    let phase = bank.band_phase().conj();

    let mut lo = fft2(&p.lowpass);
    for (stage, bands) in bank.stages().iter().zip(&p.levels).rev() {
        lo = pad_spectrum(&lo, stage.rows, stage.cols);
        Zip::from(&mut lo).and(&stage.low).for_each(|s, &m| *s *= m);
        for (g, band) in stage.angular.iter().zip(bands) {
            let coef = fft2(band);
            Zip::from(&mut lo)
                .and(&coef)
                .and(&stage.high)
                .and(g)
                .for_each(|s, &c, &h, &a| *s += c * phase * (h * a));
        }
    }
    let hp = fft2(&p.highpass);
    Zip::from(&mut lo)
        .and(&hp)
        .and(bank.lo0())
        .and(bank.hi0())
        .for_each(|s, &h, &l0, &h0| *s = *s * l0 + h * h0);
    ifft2_real(lo)
}

/// Decomposes `x` into `levels` stages of `orientations` oriented bands.
pub fn build_steerable(x: &Array2<f64>, levels: usize, orientations: usize) -> Result<SteerablePyramid> {
    let (rows, cols) = x.dim();
    let bank = FilterBank::new(cols, rows, levels, orientations)?;
    build_with(&bank, x)
}

/// Inverse of [`build_steerable`].
pub fn reconstruct_steerable(p: &SteerablePyramid) -> Result<Array2<f64>> {
    p.check_layout()?;
    let bank = FilterBank::new(p.width, p.height, p.depth(), p.orientations)?;
    reconstruct_with(&bank, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_image(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut s = seed;
        Array2::from_shape_fn((rows, cols), |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn constant_lives_in_lowpass() {
        let x = Array2::from_elem((64, 64), 3.5);
        let p = build_steerable(&x, 4, 16).unwrap();
        assert_eq!(p.band_count(), 1 + 4 * 16 + 1);
        assert!(p.highpass.iter().all(|v| v.abs() < 1e-10));
        for b in p.levels.iter().flatten() {
            assert!(b.iter().all(|v| v.abs() < 1e-10));
        }
        assert_eq!(p.lowpass.dim(), (4, 4));
        assert!(p.lowpass.iter().all(|v| (v - 3.5).abs() < 1e-10));
    }

    #[test]
    fn zero_image_gives_zero_bands() {
        let p = build_steerable(&Array2::zeros((32, 32)), 3, 4).unwrap();
        assert!(p.bands().iter().all(|b| b.iter().all(|&v| v == 0.0)));
        let back = reconstruct_steerable(&p).unwrap();
        assert!(back.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lowpass_only_pyramid_reconstructs_its_mean() {
        let template = build_steerable(&Array2::zeros((64, 64)), 4, 16).unwrap();
        let mut p = template.clone();
        p.lowpass.fill(2.25);
        let img = reconstruct_steerable(&p).unwrap();
        let mean = img.mean().unwrap();
        assert!((mean - 2.25).abs() < 1e-8);
    }

    #[test]
    fn round_trip_and_energy_on_rectangle() {
        let x = lcg_image(32, 64, 9);
        let p = build_steerable(&x, 3, 4).unwrap();
        let back = reconstruct_steerable(&p).unwrap();
        let err = back.iter().zip(x.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err {err}");
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        assert!((p.weighted_energy() - e_in).abs() / e_in < 1e-8);
    }

    #[test]
    fn inconsistent_layout_is_a_shape_error() {
        let mut p = build_steerable(&lcg_image(16, 16, 1), 2, 2).unwrap();
        p.levels[1][0] = Array2::zeros((3, 3));
        assert!(matches!(reconstruct_steerable(&p), Err(Error::Shape(_))));
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut x = Array2::zeros((16, 16));
        x[(3, 3)] = f64::NAN;
        assert!(matches!(build_steerable(&x, 1, 2), Err(Error::Input(_))));
    }

    #[test]
    fn too_deep_is_a_depth_error() {
        assert!(matches!(
            build_steerable(&Array2::zeros((64, 64)), 7, 16),
            Err(Error::Depth { max: 4, .. })
        ));
    }
}
