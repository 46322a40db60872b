use ndarray::Zip;

use crate::error::Result;
use crate::grid::{check_dims, RainGrid};

/// Rain-detection agreement counts over jointly valid pixels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContingencyTable {
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_negatives: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.hits + self.misses + self.false_alarms + self.correct_negatives
    }

    /// Tallies one pixel.
    pub fn record(&mut self, truth_rain: bool, pred_rain: bool) {
        match (truth_rain, pred_rain) {
            (true, true) => self.hits += 1,
            (true, false) => self.misses += 1,
            (false, true) => self.false_alarms += 1,
            (false, false) => self.correct_negatives += 1,
        }
    }

    pub fn scores(&self) -> DetectionScores {
        DetectionScores {
            pod: pod(self),
            far: far(self),
            ts: ts(self),
        }
    }
}

impl std::ops::Add for ContingencyTable {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            hits: self.hits + o.hits,
            misses: self.misses + o.misses,
            false_alarms: self.false_alarms + o.false_alarms,
            correct_negatives: self.correct_negatives + o.correct_negatives,
        }
    }
}

/// POD, FAR and TS; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionScores {
    pub pod: Option<f64>,
    pub far: Option<f64>,
    pub ts: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// hits / (hits + misses)
pub fn pod(t: &ContingencyTable) -> Option<f64> {
    ratio(t.hits, t.hits + t.misses)
}

/// false alarms / (hits + false alarms)
pub fn far(t: &ContingencyTable) -> Option<f64> {
    ratio(t.false_alarms, t.hits + t.false_alarms)
}

/// hits / (hits + misses + false alarms)
pub fn ts(t: &ContingencyTable) -> Option<f64> {
    ratio(t.hits, t.hits + t.misses + t.false_alarms)
}

/// Counts over pixels valid in both grids; rain means intensity > `threshold`.
pub fn contingency(truth: &RainGrid, pred: &RainGrid, threshold: f64) -> Result<ContingencyTable> {
    check_dims(truth.meta(), pred.meta())?;
    let (t, p) = (truth.filled(0.0), pred.filled(0.0));
    let mut table = ContingencyTable::default();
    Zip::from(&t)
        .and(truth.mask())
        .and(&p)
        .and(pred.mask())
        .for_each(|&tv, &tok, &pv, &pok| {
            if tok && pok {
                table.record(tv > threshold, pv > threshold);
            }
        });
    Ok(table)
}
