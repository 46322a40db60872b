//! Raster types shared by every stage of the pipeline.
//!
//! Missing data is carried by an explicit boolean mask next to the intensity
//! array. The intensity stored under a missing pixel is an implementation
//! detail and is never handed out by the public accessors.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};

/// Default cell size of the common grid, in degrees.
pub const DEFAULT_CELL_SIZE_DEG: f64 = 0.25;

/// Default raster edge length in pixels.
pub const DEFAULT_GRID_SIZE: usize = 64;

/// Images with fewer valid pixels than this are not used.
pub const MIN_VALID_PIXELS: usize = 40;

/// Boolean per-pixel mask, `true` = valid.
pub type Mask = Array2<bool>;

/// Raster geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub width: usize,
    pub height: usize,
    pub cell_size_deg: f64,
    pub origin_lat: Option<f64>,
    pub origin_lon: Option<f64>,
}

impl GridMeta {
    pub fn new(width: usize, height: usize, cell_size_deg: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Param(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(cell_size_deg.is_finite() && cell_size_deg > 0.0) {
            return Err(Error::Param(format!(
                "cell size must be positive and finite, got {cell_size_deg}"
            )));
        }
        Ok(Self {
            width,
            height,
            cell_size_deg,
            origin_lat: None,
            origin_lon: None,
        })
    }

    /// Geometry with the default 0.25° cell size.
    pub fn with_size(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, DEFAULT_CELL_SIZE_DEG)
    }

    /// `(rows, cols)` as used by ndarray.
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn same_dims(&self, other: &GridMeta) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl Default for GridMeta {
    fn default() -> Self {
        Self {
            width: DEFAULT_GRID_SIZE,
            height: DEFAULT_GRID_SIZE,
            cell_size_deg: DEFAULT_CELL_SIZE_DEG,
            origin_lat: None,
            origin_lon: None,
        }
    }
}

pub(crate) fn check_dims(a: &GridMeta, b: &GridMeta) -> Result<()> {
    if a.same_dims(b) {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )))
    }
}

pub(crate) fn check_array_dims<A, B>(a: &Array2<A>, b: &Array2<B>) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        let (ar, ac) = a.dim();
        let (br, bc) = b.dim();
        Err(Error::Shape(format!("{ac}x{ar} vs {bc}x{br}")))
    }
}

/// Rain intensity raster (mm/hr) with a missing-pixel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RainGrid {
    meta: GridMeta,
    values: Array2<f64>,
    valid: Mask,
}

impl RainGrid {
    /// Builds a grid, rejecting negative or non-finite intensities at valid pixels.
    ///
    /// Values under missing pixels are discarded.
    pub fn new(meta: GridMeta, values: Array2<f64>, valid: Mask) -> Result<Self> {
        if values.dim() != meta.shape() || valid.dim() != meta.shape() {
            return Err(Error::Shape(format!(
                "arrays do not match declared {}x{} grid",
                meta.width, meta.height
            )));
        }
        let mut values = values;
        for ((idx, v), &ok) in values.indexed_iter_mut().zip(valid.iter()) {
            if !ok {
                *v = 0.0;
                continue;
            }
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::Input(format!(
                    "pixel (row {}, col {}) holds {} mm/hr; valid intensities must be finite and >= 0",
                    idx.0, idx.1, v
                )));
            }
            // fold -0.0 into +0.0 so serialization is canonical
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self {
            meta,
            values,
            valid,
        })
    }

    /// Gap-free grid.
    pub fn from_values(meta: GridMeta, values: Array2<f64>) -> Result<Self> {
        let valid = Mask::from_elem(meta.shape(), true);
        Self::new(meta, values, valid)
    }

    /// Grid from row-major optional values (`None` = missing).
    pub fn from_options(meta: GridMeta, pixels: &[Option<f64>]) -> Result<Self> {
        if pixels.len() != meta.pixel_count() {
            return Err(Error::Shape(format!(
                "{} pixels supplied for a {}x{} grid",
                pixels.len(),
                meta.width,
                meta.height
            )));
        }
        let values = Array2::from_shape_fn(meta.shape(), |(r, c)| {
            pixels[r * meta.width + c].unwrap_or(0.0)
        });
        let valid = Array2::from_shape_fn(meta.shape(), |(r, c)| {
            pixels[r * meta.width + c].is_some()
        });
        Self::new(meta, values, valid)
    }

    pub fn all_missing(meta: GridMeta) -> Self {
        Self {
            meta,
            values: Array2::zeros(meta.shape()),
            valid: Mask::from_elem(meta.shape(), false),
        }
    }

    pub fn zeros(meta: GridMeta) -> Self {
        Self {
            meta,
            values: Array2::zeros(meta.shape()),
            valid: Mask::from_elem(meta.shape(), true),
        }
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn width(&self) -> usize {
        self.meta.width
    }

    pub fn height(&self) -> usize {
        self.meta.height
    }

    pub fn mask(&self) -> &Mask {
        &self.valid
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[(row, col)]
    }

    /// Intensity at a pixel, `None` when missing.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        if self.valid[(row, col)] {
            Some(self.values[(row, col)])
        } else {
            None
        }
    }

    /// Row-major iterator over pixels.
    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values
            .iter()
            .zip(self.valid.iter())
            .map(|(&v, &ok)| ok.then_some(v))
    }

    /// Intensities with missing pixels replaced by `fill`.
    pub fn filled(&self, fill: f64) -> Array2<f64> {
        let mut out = self.values.clone();
        Zip::from(&mut out).and(&self.valid).for_each(|v, &ok| {
            if !ok {
                *v = fill;
            }
        });
        out
    }

    pub fn is_gap_free(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

/// Number of valid pixels.
pub fn valid_pixel_count(g: &RainGrid) -> usize {
    g.valid.iter().filter(|&&v| v).count()
}

/// Whether a grid has enough valid pixels to enter the comparison set.
pub fn passes_selection(g: &RainGrid) -> bool {
    valid_pixel_count(g) >= MIN_VALID_PIXELS
}

/// Pixels valid in every grid of the list.
pub fn common_valid_mask(grids: &[&RainGrid]) -> Result<Mask> {
    let first = grids
        .first()
        .ok_or_else(|| Error::Param("common_valid_mask needs at least one grid".into()))?;
    let mut mask = first.valid.clone();
    for g in &grids[1..] {
        check_dims(&first.meta, &g.meta)?;
        Zip::from(&mut mask)
            .and(&g.valid)
            .for_each(|m, &v| *m = *m && v);
    }
    Ok(mask)
}

/// Rain-support code of a shape pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Support {
    Missing,
    Dry,
    Rain,
}

impl Support {
    pub fn code(self) -> i8 {
        match self {
            Support::Missing => -1,
            Support::Dry => 0,
            Support::Rain => 1,
        }
    }

    pub fn from_code(code: i8) -> Result<Self> {
        match code {
            -1 => Ok(Support::Missing),
            0 => Ok(Support::Dry),
            1 => Ok(Support::Rain),
            other => Err(Error::Input(format!("shape code {other} not in {{-1, 0, 1}}"))),
        }
    }
}

/// Ternary rain-support raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGrid {
    meta: GridMeta,
    codes: Array2<Support>,
}

impl ShapeGrid {
    pub fn new(meta: GridMeta, codes: Array2<Support>) -> Result<Self> {
        if codes.dim() != meta.shape() {
            return Err(Error::Shape(format!(
                "shape codes do not match declared {}x{} grid",
                meta.width, meta.height
            )));
        }
        Ok(Self { meta, codes })
    }

    pub fn from_codes(meta: GridMeta, codes: &Array2<i8>) -> Result<Self> {
        let mut out = Array2::from_elem(codes.dim(), Support::Missing);
        for (dst, &c) in out.iter_mut().zip(codes.iter()) {
            *dst = Support::from_code(c)?;
        }
        Self::new(meta, out)
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn codes(&self) -> &Array2<Support> {
        &self.codes
    }

    pub fn get(&self, row: usize, col: usize) -> Support {
        self.codes[(row, col)]
    }

    pub fn numeric(&self) -> Array2<i8> {
        self.codes.mapv(Support::code)
    }
}
