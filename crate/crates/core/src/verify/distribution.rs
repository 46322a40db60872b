use crate::error::{Error, Result};

/// Sorted sample with a right-continuous step CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample("empirical distribution".into()));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::Input("NaN in sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let count = self.samples.partition_point(|&s| s <= x);
        count as f64 / self.samples.len() as f64
    }

    /// Distinct sample values paired with the CDF at each.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.samples.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.samples.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => out.push((v, f)),
            }
        }
        out
    }

    pub fn median(&self) -> f64 {
        let n = self.samples.len();
        if n % 2 == 1 {
            self.samples[n / 2]
        } else {
            0.5 * (self.samples[n / 2 - 1] + self.samples[n / 2])
        }
    }
}

/// CDF over the defined scores of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCdf {
    pub distribution: EmpiricalDistribution,
    /// Number of undefined (0/0) scores left out.
    pub excluded: usize,
}

/// Builds the CDF of per-image scores, excluding undefined ones.
pub fn score_cdf<I>(scores: I) -> Result<ScoreCdf>
where
    I: IntoIterator<Item = Option<f64>>,
{
    let mut excluded = 0;
    let mut defined = Vec::new();
    for s in scores {
        match s {
            Some(v) => defined.push(v),
            None => excluded += 1,
        }
    }
    if defined.is_empty() {
        return Err(Error::EmptySample(format!(
            "all {excluded} scores are undefined"
        )));
    }
    if excluded > 0 {
        log::info!("score CDF: excluded {excluded} undefined scores");
    }
    Ok(ScoreCdf {
        distribution: EmpiricalDistribution::new(defined)?,
        excluded,
    })
}

/// Fixed-width histogram starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Bins `[k w, (k + 1) w)` for `k < n_bins`; larger values land in the last bin.
    pub fn new(samples: &[f64], bin_width: f64, n_bins: usize) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::Param(format!("bin width must be > 0, got {bin_width}")));
        }
        if n_bins == 0 {
            return Err(Error::Param("histogram needs at least one bin".into()));
        }
        let mut counts = vec![0u64; n_bins];
        for &v in samples {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Input(format!("histogram sample {v} is not a rain intensity")));
            }
            let k = ((v / bin_width).floor() as usize).min(n_bins - 1);
            counts[k] += 1;
        }
        Ok(Self {
            bin_width,
            counts,
            total: samples.len() as u64,
        })
    }

    /// Number of bins needed to cover `max_value`.
    pub fn bins_for(max_value: f64, bin_width: f64) -> usize {
        (max_value / bin_width).floor() as usize + 1
    }

    /// Probability density of bin `k` (0 for an empty sample).
    pub fn density(&self, k: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[k] as f64 / (self.total as f64 * self.bin_width)
        }
    }
}
