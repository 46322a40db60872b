//! Synthetic ground truth and gappy satellite-like observations.
//!
//! Truth fields are superposed isotropic Gaussian cells with log-normal peak
//! intensities, soft-thresholded to a target wet fraction. Observations keep
//! the pixels inside a swath and apply multiplicative log-normal noise.
//! Everything is a pure function of the parameters and seeds.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{valid_pixel_count, GridMeta, Mask, RainGrid, MIN_VALID_PIXELS};

/// Edge length of the tiles used by [`SwathKind::RandomBlocks`].
pub const BLOCK_SIZE: usize = 8;

/// Allowed gap between the requested and achieved wet fraction.
pub const WET_FRACTION_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    /// Number of rain cells.
    pub cell_count: usize,
    /// Typical cell radius in pixels (Gaussian sigma).
    pub cell_scale: f64,
    /// Median cell peak intensity, mm/hr.
    pub intensity_scale: f64,
    pub wet_fraction_target: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            seed: 0,
            width: 64,
            height: 64,
            cell_count: 8,
            cell_scale: 4.0,
            intensity_scale: 3.0,
            wet_fraction_target: 0.3,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Param("scene dimensions must be positive".into()));
        }
        if !(self.cell_scale.is_finite() && self.cell_scale > 0.0) {
            return Err(Error::Param(format!("cell_scale must be > 0, got {}", self.cell_scale)));
        }
        if !(self.intensity_scale.is_finite() && self.intensity_scale > 0.0) {
            return Err(Error::Param(format!(
                "intensity_scale must be > 0, got {}",
                self.intensity_scale
            )));
        }
        if !(self.wet_fraction_target > 0.0 && self.wet_fraction_target < 1.0) {
            return Err(Error::Param(format!(
                "wet_fraction_target must lie in (0, 1), got {}",
                self.wet_fraction_target
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwathKind {
    /// Straight strip; `angle_deg` = 0 gives full rows, 90 full columns.
    Band,
    /// The pixels closest to a random centre.
    Disk,
    /// Random `BLOCK_SIZE` tiles.
    RandomBlocks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwathSpec {
    pub kind: SwathKind,
    pub coverage_fraction: f64,
    pub angle_deg: f64,
    /// Band position in `[0, 1]` across the grid; drawn from `seed` when `None`.
    pub offset: Option<f64>,
    /// Standard deviation of the log of the multiplicative noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SwathSpec {
    fn default() -> Self {
        Self {
            kind: SwathKind::Band,
            coverage_fraction: 0.5,
            angle_deg: 0.0,
            offset: None,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SwathSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_fraction > 0.0 && self.coverage_fraction <= 1.0) {
            return Err(Error::Param(format!(
                "coverage_fraction must lie in (0, 1], got {}",
                self.coverage_fraction
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Param(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !self.angle_deg.is_finite() {
            return Err(Error::Param("band angle must be finite".into()));
        }
        if let Some(o) = self.offset {
            if !(0.0..=1.0).contains(&o) {
                return Err(Error::Param(format!("offset must lie in [0, 1], got {o}")));
            }
        }
        Ok(())
    }
}

/// Generates a gap-free truth field.
pub fn gen_truth(p: &SceneParams) -> Result<RainGrid> {
    p.validate()?;
    let meta = GridMeta::with_size(p.width, p.height)?;
    if p.cell_count == 0 {
        return Ok(RainGrid::zeros(meta));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let peak = LogNormal::new(p.intensity_scale.ln(), 0.5).expect("finite parameters");
    let cells: Vec<(f64, f64, f64, f64)> = (0..p.cell_count)
        .map(|_| {
            let cx = rng.random_range(0.0..p.width as f64);
            let cy = rng.random_range(0.0..p.height as f64);
            let sigma = p.cell_scale * rng.random_range(0.6..1.4);
            (cx, cy, sigma, peak.sample(&mut rng))
        })
        .collect();

    let field = Array2::from_shape_fn(meta.shape(), |(r, c)| {
        cells
            .iter()
            .map(|&(cx, cy, s, a)| {
                let d2 = (c as f64 - cx).powi(2) + (r as f64 - cy).powi(2);
                a * (-d2 / (2.0 * s * s)).exp()
            })
            .sum::<f64>()
    });

    // cut at the value that leaves the target fraction strictly above it
    let mut sorted: Vec<f64> = field.iter().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let keep = ((p.wet_fraction_target * sorted.len() as f64).round() as usize).min(sorted.len() - 1);
    let cut = sorted[keep];
    let values = field.mapv(|v| (v - cut).max(0.0));

    let wet = values.iter().filter(|&&v| v > 0.0).count() as f64 / values.len() as f64;
    if (wet - p.wet_fraction_target).abs() > WET_FRACTION_TOLERANCE {
        return Err(Error::Param(format!(
            "wet fraction {:.3} cannot reach target {:.3} with these cells",
            wet, p.wet_fraction_target
        )));
    }
    RainGrid::from_values(meta, values)
}

/// A straight strip: the `round(c N)` pixels with consecutive projections
/// onto the strip normal, placed along that normal by `offset`.
fn band_mask(meta: &GridMeta, s: &SwathSpec, rng: &mut ChaCha8Rng) -> Mask {
    let theta = s.angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let n = meta.pixel_count();
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let (r, c) = (i / meta.width, i % meta.width);
            (c as f64 * sin + r as f64 * cos, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let count = (s.coverage_fraction * n as f64).round() as usize;
    let offset = s.offset.unwrap_or_else(|| rng.random_range(0.0..=1.0));
    let ideal = offset * (n - count) as f64;
    // start where the projection changes so axis-aligned bands take whole lines
    let first = (0..=n - count)
        .filter(|&i| i == 0 || order[i].0 != order[i - 1].0)
        .min_by(|&i, &j| (i as f64 - ideal).abs().total_cmp(&(j as f64 - ideal).abs()))
        .unwrap_or(0);
    let mut mask = Mask::from_elem(meta.shape(), false);
    for &(_, i) in &order[first..first + count] {
        mask[(i / meta.width, i % meta.width)] = true;
    }
    mask
}

fn disk_mask(meta: &GridMeta, s: &SwathSpec, rng: &mut ChaCha8Rng) -> Mask {
    let cx = rng.random_range(0.0..meta.width as f64);
    let cy = rng.random_range(0.0..meta.height as f64);
    let count = (s.coverage_fraction * meta.pixel_count() as f64).round() as usize;
    let mut order: Vec<(f64, usize)> = (0..meta.pixel_count())
        .map(|i| {
            let (r, c) = (i / meta.width, i % meta.width);
            ((c as f64 - cx).powi(2) + (r as f64 - cy).powi(2), i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut mask = Mask::from_elem(meta.shape(), false);
    for &(_, i) in order.iter().take(count) {
        mask[(i / meta.width, i % meta.width)] = true;
    }
    mask
}

fn blocks_mask(meta: &GridMeta, s: &SwathSpec, rng: &mut ChaCha8Rng) -> Mask {
    let bx = meta.width.div_ceil(BLOCK_SIZE);
    let by = meta.height.div_ceil(BLOCK_SIZE);
    let mut blocks: Vec<usize> = (0..bx * by).collect();
    blocks.shuffle(rng);
    let count = (s.coverage_fraction * blocks.len() as f64).round() as usize;
    let mut mask = Mask::from_elem(meta.shape(), false);
    for &b in blocks.iter().take(count) {
        let (r0, c0) = ((b / bx) * BLOCK_SIZE, (b % bx) * BLOCK_SIZE);
        for r in r0..(r0 + BLOCK_SIZE).min(meta.height) {
            for c in c0..(c0 + BLOCK_SIZE).min(meta.width) {
                mask[(r, c)] = true;
            }
        }
    }
    mask
}

/// The pixels a swath sees, before intersecting with the truth mask.
pub fn swath_mask(meta: &GridMeta, s: &SwathSpec) -> Result<Mask> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    Ok(match s.kind {
        SwathKind::Band => band_mask(meta, s, &mut rng),
        SwathKind::Disk => disk_mask(meta, s, &mut rng),
        SwathKind::RandomBlocks => blocks_mask(meta, s, &mut rng),
    })
}

/// Simulates one overpass over `truth`.
pub fn observe(truth: &RainGrid, s: &SwathSpec) -> Result<RainGrid> {
    let meta = *truth.meta();
    let swath = swath_mask(&meta, s)?;
    // separate stream so the noise does not depend on the swath geometry
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x9e37_79b9_7f4a_7c15);
    let noise = Array2::from_shape_simple_fn(meta.shape(), || {
        let z: f64 = rng.sample(StandardNormal);
        (s.noise_sigma * z).exp()
    });
    let valid = Array2::from_shape_fn(meta.shape(), |(r, c)| swath[(r, c)] && truth.is_valid(r, c));
    let values = Array2::from_shape_fn(meta.shape(), |(r, c)| {
        truth.get(r, c).map_or(0.0, |v| v * noise[(r, c)])
    });
    RainGrid::new(meta, values, valid)
}

/// Truth plus two observations of it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPair {
    pub truth: RainGrid,
    pub a: RainGrid,
    pub b: RainGrid,
}

/// Generates a truth field and observes it through two swaths.
///
/// Pairs where either observation has fewer than [`MIN_VALID_PIXELS`] valid
/// pixels are reported as [`Error::Rejected`].
pub fn gen_pair(p: &SceneParams, sa: &SwathSpec, sb: &SwathSpec) -> Result<ObservedPair> {
    let truth = gen_truth(p)?;
    let a = observe(&truth, sa)?;
    let b = observe(&truth, sb)?;
    for (name, g) in [("a", &a), ("b", &b)] {
        let valid = valid_pixel_count(g);
        if valid < MIN_VALID_PIXELS {
            return Err(Error::Rejected {
                image: name,
                valid,
                required: MIN_VALID_PIXELS,
            });
        }
    }
    Ok(ObservedPair { truth, a, b })
}

/// Recipe for a reproducible ensemble of synthetic pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub pairs: usize,
    /// Scene template; its seed is replaced per member.
    pub scene: SceneParams,
    pub coverage_min: f64,
    pub coverage_max: f64,
    pub noise_sigma: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            seed: 2011,
            pairs: 200,
            scene: SceneParams::default(),
            coverage_min: 0.3,
            coverage_max: 0.7,
            noise_sigma: 0.3,
        }
    }
}

fn mix(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.coverage_min > 0.0 && self.coverage_min <= self.coverage_max && self.coverage_max <= 1.0) {
            return Err(Error::Param(format!(
                "coverage range [{}, {}] must sit inside (0, 1]",
                self.coverage_min, self.coverage_max
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Param(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        self.scene.validate()
    }

    /// Scene and swath parameters of member `index`.
    ///
    /// The first swath is always a band; the second cycles through band,
    /// disk and random blocks.
    pub fn member(&self, index: usize) -> (SceneParams, SwathSpec, SwathSpec) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, index as u64));
        let scene = SceneParams {
            seed: rng.random(),
            ..self.scene.clone()
        };
        let mut swath = |kind| SwathSpec {
            kind,
            coverage_fraction: if self.coverage_min < self.coverage_max {
                rng.random_range(self.coverage_min..=self.coverage_max)
            } else {
                self.coverage_min
            },
            angle_deg: rng.random_range(0.0..180.0),
            offset: None,
            noise_sigma: self.noise_sigma,
            seed: rng.random(),
        };
        let sa = swath(SwathKind::Band);
        let sb = swath([SwathKind::Band, SwathKind::Disk, SwathKind::RandomBlocks][index % 3]);
        (scene, sa, sb)
    }

    /// Generates every member; rejections and errors are returned in place.
    pub fn generate(&self) -> Result<Vec<Result<ObservedPair>>> {
        self.validate()?;
        Ok((0..self.pairs)
            .into_par_iter()
            .map(|i| {
                let (scene, sa, sb) = self.member(i);
                gen_pair(&scene, &sa, &sb)
            })
            .collect())
    }
}

/// Fraction of pixels with strictly positive intensity among valid ones.
pub fn wet_fraction(g: &RainGrid) -> f64 {
    let valid = valid_pixel_count(g);
    if valid == 0 {
        return 0.0;
    }
    g.iter().flatten().filter(|&v| v > 0.0).count() as f64 / valid as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cells_give_dry_scene() {
        let p = SceneParams {
            cell_count: 0,
            ..SceneParams::default()
        };
        let g = gen_truth(&p).unwrap();
        assert!(g.is_gap_free());
        assert!(g.iter().all(|v| v == Some(0.0)));
    }

    #[test]
    fn truth_is_deterministic() {
        let p = SceneParams {
            seed: 42,
            ..SceneParams::default()
        };
        assert_eq!(gen_truth(&p).unwrap(), gen_truth(&p).unwrap());
    }

    #[test]
    fn wet_fraction_hits_target() {
        for seed in 0..10 {
            let p = SceneParams {
                seed,
                wet_fraction_target: 0.3,
                ..SceneParams::default()
            };
            let wf = wet_fraction(&gen_truth(&p).unwrap());
            assert!((0.2..=0.4).contains(&wf), "seed {seed}: {wf}");
        }
    }

    #[test]
    fn unreachable_wet_fraction_is_a_parameter_error() {
        // a single tiny cell underflows to exactly zero over most of the grid
        let p = SceneParams {
            cell_count: 1,
            cell_scale: 0.3,
            wet_fraction_target: 0.9,
            ..SceneParams::default()
        };
        assert!(matches!(gen_truth(&p), Err(Error::Param(_))));
        let bad = SceneParams {
            wet_fraction_target: 1.0,
            ..SceneParams::default()
        };
        assert!(gen_truth(&bad).is_err());
    }

    #[test]
    fn full_noiseless_swath_is_identity() {
        let truth = gen_truth(&SceneParams::default()).unwrap();
        let s = SwathSpec {
            coverage_fraction: 1.0,
            noise_sigma: 0.0,
            ..SwathSpec::default()
        };
        assert_eq!(observe(&truth, &s).unwrap(), truth);
    }

    #[test]
    fn horizontal_half_band_covers_32_rows() {
        let truth = RainGrid::zeros(GridMeta::default());
        for offset in [None, Some(0.0), Some(0.37), Some(1.0)] {
            let s = SwathSpec {
                kind: SwathKind::Band,
                coverage_fraction: 0.5,
                angle_deg: 0.0,
                offset,
                seed: 3,
                ..SwathSpec::default()
            };
            let g = observe(&truth, &s).unwrap();
            let full_rows = (0..64).filter(|&r| (0..64).all(|c| g.is_valid(r, c))).count();
            let any_rows = (0..64).filter(|&r| (0..64).any(|c| g.is_valid(r, c))).count();
            assert_eq!((full_rows, any_rows), (32, 32), "offset {offset:?}");
        }
    }

    #[test]
    fn small_coverage_falls_below_selection_rule() {
        let truth = RainGrid::zeros(GridMeta::default());
        let s = SwathSpec {
            kind: SwathKind::Disk,
            coverage_fraction: 0.005,
            ..SwathSpec::default()
        };
        let g = observe(&truth, &s).unwrap();
        assert_eq!(valid_pixel_count(&g), 20);
        assert!(valid_pixel_count(&g) < MIN_VALID_PIXELS);
        let r = gen_pair(&SceneParams::default(), &s, &SwathSpec::default());
        assert!(matches!(r, Err(Error::Rejected { image: "a", valid: 20, .. })));
    }

    #[test]
    fn observe_never_adds_valid_pixels() {
        let m = GridMeta::with_size(16, 16).unwrap();
        let px: Vec<Option<f64>> = (0..256).map(|i| (i % 3 != 0).then_some(1.0)).collect();
        let truth = RainGrid::from_options(m, &px).unwrap();
        let s = SwathSpec {
            coverage_fraction: 1.0,
            noise_sigma: 0.5,
            ..SwathSpec::default()
        };
        let g = observe(&truth, &s).unwrap();
        assert_eq!(g.mask(), truth.mask());
    }

    #[test]
    fn disk_and_blocks_coverage() {
        let truth = RainGrid::zeros(GridMeta::default());
        for kind in [SwathKind::Disk, SwathKind::RandomBlocks] {
            let s = SwathSpec {
                kind,
                coverage_fraction: 0.25,
                seed: 11,
                ..SwathSpec::default()
            };
            let g = observe(&truth, &s).unwrap();
            assert_eq!(valid_pixel_count(&g), 1024, "{kind:?}");
        }
    }

    #[test]
    fn complementary_bands_cover_everything() {
        let p = SceneParams::default();
        let left = SwathSpec {
            angle_deg: 90.0,
            offset: Some(0.0),
            ..SwathSpec::default()
        };
        let right = SwathSpec {
            offset: Some(1.0),
            ..left.clone()
        };
        let pair = gen_pair(&p, &left, &right).unwrap();
        for r in 0..64 {
            for c in 0..64 {
                assert!(pair.a.is_valid(r, c) ^ pair.b.is_valid(r, c));
                assert_eq!(pair.a.is_valid(r, c), c < 32);
            }
        }
    }

    #[test]
    fn identical_swaths_differ_only_by_noise() {
        let p = SceneParams::default();
        let s = SwathSpec {
            offset: Some(0.25),
            noise_sigma: 0.2,
            seed: 5,
            ..SwathSpec::default()
        };
        let s2 = SwathSpec { seed: 6, ..s.clone() };
        let pair = gen_pair(&p, &s, &s2).unwrap();
        assert_eq!(pair.a.mask(), pair.b.mask());
        assert_ne!(pair.a, pair.b);
        for r in 0..64 {
            for c in 0..64 {
                if let (Some(x), Some(y), Some(t)) = (pair.a.get(r, c), pair.b.get(r, c), pair.truth.get(r, c)) {
                    assert_eq!(x == 0.0, t == 0.0);
                    assert_eq!(y == 0.0, t == 0.0);
                }
            }
        }
    }

    #[test]
    fn default_ensemble_acceptance() {
        let spec = EnsembleSpec::default();
        let accepted = spec.generate().unwrap().iter().filter(|r| r.is_ok()).count();
        assert!(accepted >= 180, "accepted {accepted}");
    }
}
