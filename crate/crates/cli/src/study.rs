//! Evaluation of products against truth, and the synthetic comparison study.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use gapfuse::synth::{gen_pair, EnsembleSpec};
use gapfuse::verify::{
    contingency, intensity_samples, ks_two_sample, score_cdf, ContingencyTable, DetectionScores,
    EmpiricalDistribution, Histogram, KsMode, KsResult, ScoreCdf, DEFAULT_ALPHA, DEFAULT_BIN_WIDTH,
    DEFAULT_RAIN_THRESHOLD,
};
use gapfuse::{
    baseline_interpolation, common_valid_mask, produce_fused, produce_shape, produce_texture,
    produce_unconstrained, valid_pixel_count, Error, FusionConfig, RainGrid,
};

use crate::report::{num, opt, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub threshold: f64,
    pub alpha: f64,
    pub bin_width: f64,
    pub ks_mode: KsMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_RAIN_THRESHOLD,
            alpha: DEFAULT_ALPHA,
            bin_width: DEFAULT_BIN_WIDTH,
            ks_mode: KsMode::Pooled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    Pod,
    Far,
    Ts,
}

impl Score {
    pub const ALL: [Score; 3] = [Score::Pod, Score::Far, Score::Ts];

    pub fn name(self) -> &'static str {
        match self {
            Score::Pod => "POD",
            Score::Far => "FAR",
            Score::Ts => "TS",
        }
    }

    pub fn of(self, s: &DetectionScores) -> Option<f64> {
        match self {
            Score::Pod => s.pod,
            Score::Far => s.far,
            Score::Ts => s.ts,
        }
    }
}

/// One truth grid and the products to score against it.
#[derive(Debug, Clone)]
pub struct Case {
    pub image: String,
    pub truth: RainGrid,
    pub preds: Vec<RainGrid>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KsOutcome {
    Done(KsResult),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsRow {
    pub product: usize,
    /// `None` for the pooled comparison.
    pub image: Option<String>,
    pub outcome: KsOutcome,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub products: Vec<String>,
    pub images: Vec<String>,
    /// `tables[image][product]`.
    pub tables: Vec<Vec<ContingencyTable>>,
    /// Intensities on the common-valid mask, pooled over images: truth first, then each product.
    pub pooled: Vec<Vec<f64>>,
    pub ks: Vec<KsRow>,
    pub options: EvalOptions,
}

fn ks_outcome(pred: &[f64], truth: &[f64], alpha: f64) -> Result<KsOutcome> {
    if truth.is_empty() {
        return Ok(KsOutcome::Skipped("empty common-valid mask".into()));
    }
    Ok(KsOutcome::Done(ks_two_sample(pred, truth, alpha)?))
}

/// Scores every product of every case and runs the KS comparisons.
pub fn evaluate(products: Vec<String>, cases: &[Case], options: EvalOptions) -> Result<Evaluation> {
    if options.bin_width.is_nan() || options.bin_width <= 0.0 {
        bail!("bin width must be > 0, got {}", options.bin_width);
    }
    gapfuse::verify::critical_coefficient(options.alpha)?;

    let per_case = cases
        .par_iter()
        .map(|case| -> Result<_> {
            if case.preds.len() != products.len() {
                bail!("{}: expected {} products, got {}", case.image, products.len(), case.preds.len());
            }
            let tables = case
                .preds
                .iter()
                .zip(&products)
                .map(|(p, name)| {
                    contingency(&case.truth, p, options.threshold)
                        .with_context(|| format!("{}: scoring {name}", case.image))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grids = vec![&case.truth];
            grids.extend(case.preds.iter());
            let mask = common_valid_mask(&grids).with_context(|| case.image.clone())?;
            let samples = intensity_samples(&grids, &mask)?;
            Ok((tables, samples))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tables = Vec::with_capacity(cases.len());
    let mut pooled = vec![Vec::new(); products.len() + 1];
    let mut ks = Vec::new();
    for (case, (t, samples)) in cases.iter().zip(per_case) {
        tables.push(t);
        if options.ks_mode == KsMode::PerImage {
            for p in 0..products.len() {
                ks.push(KsRow {
                    product: p,
                    image: Some(case.image.clone()),
                    outcome: ks_outcome(&samples[p + 1], &samples[0], options.alpha)?,
                });
            }
        }
        for (dst, src) in pooled.iter_mut().zip(samples) {
            dst.extend(src);
        }
    }
    if options.ks_mode == KsMode::Pooled {
        for p in 0..products.len() {
            ks.push(KsRow {
                product: p,
                image: None,
                outcome: ks_outcome(&pooled[p + 1], &pooled[0], options.alpha)?,
            });
        }
    }
    for row in &ks {
        if let KsOutcome::Skipped(why) = &row.outcome {
            log::warn!(
                "KS for {} ({}) skipped: {why}",
                products[row.product],
                row.image.as_deref().unwrap_or("pooled")
            );
        }
    }
    Ok(Evaluation {
        products,
        images: cases.iter().map(|c| c.image.clone()).collect(),
        tables,
        pooled,
        ks,
        options,
    })
}

impl Evaluation {
    pub fn product_index(&self, name: &str) -> Option<usize> {
        self.products.iter().position(|p| p == name)
    }

    /// Per-image scores of one product, in image order.
    pub fn scores(&self, product: usize, score: Score) -> Vec<Option<f64>> {
        self.tables
            .iter()
            .map(|row| score.of(&row[product].scores()))
            .collect()
    }

    /// CDF over the images where the score is defined; `None` if it never is.
    pub fn score_cdf(&self, product: usize, score: Score) -> Result<Option<ScoreCdf>> {
        match score_cdf(self.scores(product, score)) {
            Ok(c) => Ok(Some(c)),
            Err(Error::EmptySample(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn median(&self, product: usize, score: Score) -> Result<Option<f64>> {
        Ok(self.score_cdf(product, score)?.map(|c| c.distribution.median()))
    }

    /// The pooled KS result for a product, if it ran.
    pub fn pooled_ks(&self, product: usize) -> Option<&KsResult> {
        self.ks.iter().find_map(|r| match (&r.outcome, &r.image) {
            (KsOutcome::Done(k), None) if r.product == product => Some(k),
            _ => None,
        })
    }

    fn sample_names(&self) -> Vec<&str> {
        std::iter::once("truth")
            .chain(self.products.iter().map(String::as_str))
            .collect()
    }

    pub fn scores_table(&self) -> Table {
        let mut t = Table::new(&[
            "product",
            "image",
            "hits",
            "misses",
            "false_alarms",
            "correct_negatives",
            "pod",
            "far",
            "ts",
        ]);
        for (p, name) in self.products.iter().enumerate() {
            for (image, row) in self.images.iter().zip(&self.tables) {
                let c = &row[p];
                let s = c.scores();
                t.row(&[
                    name.clone(),
                    image.clone(),
                    num(c.hits),
                    num(c.misses),
                    num(c.false_alarms),
                    num(c.correct_negatives),
                    opt(s.pod),
                    opt(s.far),
                    opt(s.ts),
                ]);
            }
        }
        t
    }

    /// Score CDF steps and a per-score summary with the excluded counts.
    pub fn score_cdf_tables(&self) -> Result<(Table, Table)> {
        let mut steps = Table::new(&["product", "score", "value", "cdf"]);
        let mut summary = Table::new(&["product", "score", "defined", "excluded", "median"]);
        for (p, name) in self.products.iter().enumerate() {
            for score in Score::ALL {
                match self.score_cdf(p, score)? {
                    Some(c) => {
                        for (v, f) in c.distribution.steps() {
                            steps.row(&[name.clone(), score.name().into(), num(v), num(f)]);
                        }
                        summary.row(&[
                            name.clone(),
                            score.name().into(),
                            num(c.distribution.len()),
                            num(c.excluded),
                            num(c.distribution.median()),
                        ]);
                    }
                    None => summary.row(&[
                        name.clone(),
                        score.name().into(),
                        num(0),
                        num(self.images.len()),
                        opt(None),
                    ]),
                }
            }
        }
        Ok((steps, summary))
    }

    /// Histogram densities and empirical CDFs of the pooled intensities.
    pub fn intensity_tables(&self) -> Result<(Table, Table)> {
        let w = self.options.bin_width;
        let mut pdf = Table::new(&["product", "bin_lo", "bin_hi", "count", "density"]);
        let mut cdf = Table::new(&["product", "value", "cdf"]);
        let max = self.pooled.iter().flatten().copied().fold(f64::NAN, f64::max);
        if max.is_nan() {
            return Ok((pdf, cdf));
        }
        let bins = Histogram::bins_for(max, w);
        for (name, samples) in self.sample_names().into_iter().zip(&self.pooled) {
            let h = Histogram::new(samples, w, bins)?;
            for (k, &count) in h.counts.iter().enumerate() {
                pdf.row(&[
                    name.into(),
                    num(k as f64 * w),
                    num((k + 1) as f64 * w),
                    num(count),
                    num(h.density(k)),
                ]);
            }
            let d = EmpiricalDistribution::new(samples.clone())?;
            for (v, f) in d.steps() {
                cdf.row(&[name.into(), num(v), num(f)]);
            }
        }
        Ok((pdf, cdf))
    }

    pub fn ks_table(&self) -> Table {
        let mut t = Table::new(&[
            "product",
            "image",
            "statistic",
            "critical",
            "alpha",
            "n",
            "m",
            "reject",
            "status",
        ]);
        for row in &self.ks {
            let image = row.image.clone().unwrap_or_else(|| "pooled".into());
            let name = self.products[row.product].clone();
            match &row.outcome {
                KsOutcome::Done(k) => t.row(&[
                    name,
                    image,
                    num(k.statistic),
                    num(k.critical),
                    num(k.alpha),
                    num(k.n),
                    num(k.m),
                    num(k.reject),
                    "ok".into(),
                ]),
                KsOutcome::Skipped(why) => t.row(&[
                    name,
                    image,
                    opt(None),
                    opt(None),
                    num(self.options.alpha),
                    num(0),
                    num(0),
                    opt(None),
                    format!("skipped: {why}"),
                ]),
            }
        }
        t
    }

    /// Writes every report table into `dir` and returns the paths written.
    pub fn write_reports(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let (steps, summary) = self.score_cdf_tables()?;
        let (pdf, cdf) = self.intensity_tables()?;
        let files = [
            ("scores.tsv", self.scores_table()),
            ("score_cdf.tsv", steps),
            ("score_summary.tsv", summary),
            ("intensity_pdf.tsv", pdf),
            ("intensity_cdf.tsv", cdf),
            ("ks.tsv", self.ks_table()),
        ];
        let mut written = Vec::new();
        for (name, table) in files {
            let path = dir.join(name);
            table.write(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Products compared in the synthetic study, in report order.
pub const STUDY_PRODUCTS: [&str; 5] = ["a", "b", "fused", "interp", "pyramid"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyOptions {
    pub ensemble: EnsembleSpec,
    pub fusion: FusionConfig,
    pub eval: EvalOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MemberStatus {
    Accepted { valid_a: usize, valid_b: usize },
    Rejected(String),
}

/// A comparison between two values of the study.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: Option<f64>,
    pub relation: &'static str,
    pub reference: Option<f64>,
    /// Hard checks fail the run; the others are only recorded.
    pub hard: bool,
    pub passed: bool,
}

impl Check {
    fn new(
        name: &'static str,
        value: Option<f64>,
        relation: &'static str,
        reference: Option<f64>,
        hard: bool,
    ) -> Self {
        let passed = match (value, reference) {
            (Some(v), Some(r)) => match relation {
                ">" => v > r,
                ">=" => v >= r,
                "<" => v < r,
                "<=" => v <= r,
                "==" => v == r,
                _ => unreachable!("unknown relation {relation}"),
            },
            _ => false,
        };
        Self {
            name,
            value,
            relation,
            reference,
            hard,
            passed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Study {
    pub options: StudyOptions,
    pub members: Vec<MemberStatus>,
    pub evaluation: Evaluation,
    /// Accepted pairs whose fused missing set is not the both-missing set.
    pub missing_set_violations: Vec<String>,
    pub checks: Vec<Check>,
}

struct MemberOutput {
    case: Case,
    missing_ok: bool,
    valid: (usize, usize),
}

fn run_member(options: &StudyOptions, index: usize) -> Result<Option<MemberOutput>> {
    let (scene, sa, sb) = options.ensemble.member(index);
    let pair = match gen_pair(&scene, &sa, &sb) {
        Ok(p) => p,
        Err(Error::Rejected { .. }) => return Ok(None),
        Err(e) => return Err(e).with_context(|| format!("generating pair {index}")),
    };
    let (a, b) = (&pair.a, &pair.b);
    let texture = produce_texture(a, b, &options.fusion)?;
    let shape = produce_shape(a, b, options.fusion.rain_threshold)?;
    let fused = produce_fused(&texture, &shape)?;
    let pyramid = produce_unconstrained(&texture, a.meta())?;
    let interp = baseline_interpolation(a, b)?;

    let missing_ok = fused
        .mask()
        .iter()
        .zip(a.mask().iter().zip(b.mask()))
        .all(|(&f, (&va, &vb))| f == (va || vb));
    let valid = (valid_pixel_count(a), valid_pixel_count(b));
    Ok(Some(MemberOutput {
        case: Case {
            image: pair_name(index),
            preds: vec![pair.a.clone(), pair.b.clone(), fused, interp, pyramid],
            truth: pair.truth,
        },
        missing_ok,
        valid,
    }))
}

pub fn pair_name(index: usize) -> String {
    format!("pair_{index:04}")
}

/// Generates the ensemble, runs the three fusers and scores everything.
pub fn run_study(options: StudyOptions) -> Result<Study> {
    options.ensemble.validate()?;
    let outputs = (0..options.ensemble.pairs)
        .into_par_iter()
        .map(|i| run_member(&options, i))
        .collect::<Result<Vec<_>>>()?;

    let mut members = Vec::with_capacity(outputs.len());
    let mut cases = Vec::new();
    let mut missing_set_violations = Vec::new();
    for out in outputs {
        match out {
            None => members.push(MemberStatus::Rejected(
                "fewer valid pixels than the selection rule requires".into(),
            )),
            Some(m) => {
                members.push(MemberStatus::Accepted {
                    valid_a: m.valid.0,
                    valid_b: m.valid.1,
                });
                if !m.missing_ok {
                    missing_set_violations.push(m.case.image.clone());
                }
                cases.push(m.case);
            }
        }
    }
    if cases.is_empty() {
        return Err(anyhow!("every ensemble member was rejected"));
    }
    let products = STUDY_PRODUCTS.iter().map(|s| s.to_string()).collect();
    let evaluation = evaluate(products, &cases, options.eval)?;
    let checks = study_checks(&evaluation, missing_set_violations.len())?;
    Ok(Study {
        options,
        members,
        evaluation,
        missing_set_violations,
        checks,
    })
}

fn study_checks(ev: &Evaluation, violations: usize) -> Result<Vec<Check>> {
    let idx = |name: &str| ev.product_index(name).expect("study product");
    let med = |name: &str, s: Score| ev.median(idx(name), s);
    let d = |name: &str| ev.pooled_ks(idx(name)).map(|k| k.statistic);
    let fused_ks = ev.pooled_ks(idx("fused"));
    Ok(vec![
        Check::new("far_pyramid_gt_fused", med("pyramid", Score::Far)?, ">", med("fused", Score::Far)?, true),
        Check::new("pod_fused_ge_a", med("fused", Score::Pod)?, ">=", med("a", Score::Pod)?, true),
        Check::new("pod_fused_ge_b", med("fused", Score::Pod)?, ">=", med("b", Score::Pod)?, true),
        Check::new("ts_fused_ge_a", med("fused", Score::Ts)?, ">=", med("a", Score::Ts)?, true),
        Check::new("ts_fused_ge_b", med("fused", Score::Ts)?, ">=", med("b", Score::Ts)?, true),
        Check::new("ks_fused_lt_pyramid", d("fused"), "<", d("pyramid"), true),
        Check::new("missing_set_violations", Some(violations as f64), "==", Some(0.0), true),
        Check::new(
            "ks_fused_not_rejected",
            fused_ks.map(|k| k.statistic),
            "<=",
            fused_ks.map(|k| k.critical),
            false,
        ),
    ])
}

impl Study {
    pub fn accepted(&self) -> usize {
        self.evaluation.images.len()
    }

    pub fn rejected(&self) -> usize {
        self.members.len() - self.accepted()
    }

    pub fn hard_failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.hard && !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new(&["check", "value", "relation", "reference", "kind", "status"]);
        for c in &self.checks {
            t.row(&[
                c.name.into(),
                opt(c.value),
                c.relation.into(),
                opt(c.reference),
                if c.hard { "hard" } else { "recorded" }.into(),
                if c.passed { "pass" } else { "fail" }.into(),
            ]);
        }
        t
    }

    pub fn ensemble_table(&self) -> Table {
        let mut t = Table::new(&["pair", "status", "valid_a", "valid_b"]);
        for (i, m) in self.members.iter().enumerate() {
            match m {
                MemberStatus::Accepted { valid_a, valid_b } => {
                    t.row(&[pair_name(i), "accepted".into(), num(valid_a), num(valid_b)])
                }
                MemberStatus::Rejected(_) => {
                    t.row(&[pair_name(i), "rejected".into(), opt(None), opt(None)])
                }
            }
        }
        t
    }

    pub fn write_reports(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = self.evaluation.write_reports(dir)?;
        for (name, table) in [("checks.tsv", self.checks_table()), ("ensemble.tsv", self.ensemble_table())] {
            let path = dir.join(name);
            table.write(&path)?;
            written.push(path);
        }
        Ok(written)
    }
}
