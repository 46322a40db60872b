//! Frequency-domain masks of the steerable pyramid.
//!
//! Radial masks are raised cosines in log2-frequency. The first split
//! (`hi0`/`lo0`) has its transition over `[pi/2, pi]`; every band stage has
//! its transition over `[pi/4, pi/2]` in the stage's own frequency
//! coordinates, i.e. the cutoffs halve from one stage to the next in the
//! coordinates of the input image.
//!
//! Angular masks are `A_K * cos(theta - pi*k/K)^(K-1)`, evaluated over the
//! full circle and combined with the phase `(-i)^(K-1)`. This is the
//! Hermitian completion of the usual half-plane mask followed by a real-part
//! projection, so every oriented band is real. `A_K` is chosen so that
//! `sum_k |G_k|^2 = 1` at every angle.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use super::fft::signed_freq;
use super::max_levels;
use crate::error::{Error, Result};

/// Low-pass response with transition over `[edge, 2 * edge]`.
pub fn raised_cosine_low(radius: f64, edge: f64) -> f64 {
    if radius <= edge {
        1.0
    } else if radius >= 2.0 * edge {
        0.0
    } else {
        (FRAC_PI_2 * (radius / edge).log2()).cos()
    }
}

/// Complementary high-pass of [`raised_cosine_low`].
pub fn raised_cosine_high(radius: f64, edge: f64) -> f64 {
    let lo = raised_cosine_low(radius, edge);
    (1.0 - lo * lo).max(0.0).sqrt()
}

/// Normalizing constant `A_K` of the angular masks.
pub fn angular_gain(orientations: usize) -> f64 {
    let order = orientations - 1;
    // 4^n / C(2n, n), accumulated as a product to stay in range
    let mut ratio = 1.0f64;
    for i in 1..=order {
        ratio *= 4.0 * i as f64 / (order + i) as f64;
    }
    (ratio / orientations as f64).sqrt()
}

/// Radius and angle of every DFT bin of a `rows x cols` grid, in radians.
pub(crate) fn polar_grid(rows: usize, cols: usize) -> (Array2<f64>, Array2<f64>) {
    let wy = |r: usize| 2.0 * PI * signed_freq(r, rows) as f64 / rows as f64;
    let wx = |c: usize| 2.0 * PI * signed_freq(c, cols) as f64 / cols as f64;
    let radius = Array2::from_shape_fn((rows, cols), |(r, c)| wy(r).hypot(wx(c)));
    let angle = Array2::from_shape_fn((rows, cols), |(r, c)| wy(r).atan2(wx(c)));
    (radius, angle)
}

/// Masks for one band stage, sampled on that stage's grid.
#[derive(Debug, Clone)]
pub struct Stage {
    pub rows: usize,
    pub cols: usize,
    pub low: Array2<f64>,
    pub high: Array2<f64>,
    /// One real angular mask per orientation.
    pub angular: Vec<Array2<f64>>,
}

/// Complete set of masks for a given raster size, depth and orientation count.
#[derive(Debug, Clone)]
pub struct FilterBank {
    width: usize,
    height: usize,
    levels: usize,
    orientations: usize,
    hi0: Array2<f64>,
    lo0: Array2<f64>,
    stages: Vec<Stage>,
}

impl FilterBank {
    pub fn new(width: usize, height: usize, levels: usize, orientations: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Param(format!("empty raster {width}x{height}")));
        }
        let max = max_levels(width, height);
        if levels > max {
            return Err(Error::Depth {
                requested: levels,
                max,
                width,
                height,
            });
        }
        if orientations == 0 {
            return Err(Error::Param("at least one orientation is required".into()));
        }

        let (radius, _) = polar_grid(height, width);
        let lo0 = radius.mapv(|r| raised_cosine_low(r, FRAC_PI_2));
        let hi0 = radius.mapv(|r| raised_cosine_high(r, FRAC_PI_2));

        let gain = angular_gain(orientations);
        let order = (orientations - 1) as i32;
        let stages = (0..levels)
            .map(|l| {
                let rows = height >> l;
                let cols = width >> l;
                let (radius, angle) = polar_grid(rows, cols);
                let angular = (0..orientations)
                    .map(|k| {
                        let center = PI * k as f64 / orientations as f64;
                        angle.mapv(|t| gain * (t - center).cos().powi(order))
                    })
                    .collect();
                Stage {
                    rows,
                    cols,
                    low: radius.mapv(|r| raised_cosine_low(r, FRAC_PI_4)),
                    high: radius.mapv(|r| raised_cosine_high(r, FRAC_PI_4)),
                    angular,
                }
            })
            .collect();

        Ok(Self {
            width,
            height,
            levels,
            orientations,
            hi0,
            lo0,
            stages,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn orientations(&self) -> usize {
        self.orientations
    }

    pub fn hi0(&self) -> &Array2<f64> {
        &self.hi0
    }

    pub fn lo0(&self) -> &Array2<f64> {
        &self.lo0
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// `(-i)^(K-1)`, the phase applied to every oriented band.
    pub fn band_phase(&self) -> Complex64 {
        match (self.orientations - 1) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    }

    /// Dimensions `(rows, cols)` of the final low-pass residual.
    pub fn lowpass_dims(&self) -> (usize, usize) {
        (self.height >> self.levels, self.width >> self.levels)
    }

    /// Largest pointwise deviation of `|H0|^2 + |L0|^2` from 1.
    pub fn first_split_tiling_error(&self) -> f64 {
        self.hi0
            .iter()
            .zip(self.lo0.iter())
            .map(|(h, l)| (h * h + l * l - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise deviation of `sum_k |B_k|^2 + |L|^2` from 1, per stage.
    pub fn stage_tiling_errors(&self) -> Vec<f64> {
        self.stages
            .iter()
            .map(|s| {
                let mut worst = 0.0f64;
                for ((idx, &lo), &hi) in s.low.indexed_iter().zip(s.high.iter()) {
                    let bands: f64 = s.angular.iter().map(|g| (hi * g[idx]).powi(2)).sum();
                    worst = worst.max((bands + lo * lo - 1.0).abs());
                }
                worst
            })
            .collect()
    }
}
