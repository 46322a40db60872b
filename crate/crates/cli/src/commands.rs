//! The four subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use gapfuse::io::{read_grid, write_grid};
use gapfuse::synth::gen_pair;
use gapfuse::{baseline_interpolation, baseline_pyramid, run_pipeline, Error, RainGrid};

use crate::args::{Command, EvalArgs, FuseArgs, Method, ReproduceArgs, SynthArgs};
use crate::manifest::RunManifest;
use crate::study::{evaluate, pair_name, run_study, Case, EvalOptions, StudyOptions};

pub const GRID_EXT: &str = "grid";

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Fuse(a) => fuse(&a),
        Command::Eval(a) => eval(&a),
        Command::Synth(a) => synth(&a),
        Command::Reproduce(a) => reproduce(&a),
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// `p` relative to the output directory that holds the manifest.
fn relative(dir: &Path, p: &Path) -> String {
    display(p.strip_prefix(dir).unwrap_or(p))
}

pub fn load(path: &Path) -> Result<RainGrid> {
    read_grid(path).with_context(|| format!("reading {}", path.display()))
}

/// `*.grid` files of a directory, sorted by name.
pub fn list_grids(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == GRID_EXT) {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| anyhow!("non UTF-8 file name in {}", dir.display()))?
                .to_string();
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn fuse_files(a_path: &Path, b_path: &Path, args: &FuseArgs) -> Result<RainGrid> {
    let a = load(a_path)?;
    let b = load(b_path)?;
    if !a.meta().same_dims(b.meta()) {
        bail!(
            "{} is {}x{} but {} is {}x{}",
            a_path.display(),
            a.width(),
            a.height(),
            b_path.display(),
            b.width(),
            b.height()
        );
    }
    let cfg = args.fusion.config();
    let out = match args.method {
        Method::Fused => run_pipeline(&a, &b, &cfg),
        Method::Interp => baseline_interpolation(&a, &b),
        Method::Pyramid => baseline_pyramid(&a, &b, &cfg),
    };
    out.with_context(|| format!("fusing {} with {}", a_path.display(), b_path.display()))
}

fn fuse(args: &FuseArgs) -> Result<ExitCode> {
    if !args.input_a.is_dir() {
        if args.input_b.is_dir() {
            bail!("{} is a directory but {} is not", args.input_b.display(), args.input_a.display());
        }
        let g = fuse_files(&args.input_a, &args.input_b, args)?;
        write_grid(&args.output, &g).with_context(|| format!("writing {}", args.output.display()))?;
        return Ok(ExitCode::SUCCESS);
    }

    // batch mode: pair files by name
    let names = list_grids(&args.input_a)?;
    for (name, _) in &names {
        let other = args.input_b.join(name);
        if !other.is_file() {
            bail!("{} has no counterpart {}", args.input_a.join(name).display(), other.display());
        }
    }
    ensure_dir(&args.output)?;
    let outputs = names
        .par_iter()
        .map(|(name, a_path)| {
            let g = fuse_files(a_path, &args.input_b.join(name), args)?;
            let out = args.output.join(name);
            write_grid(&out, &g).with_context(|| format!("writing {}", out.display()))?;
            Ok(name.clone())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut m = RunManifest::new("fuse", serde_json::to_value(args)?);
    m.inputs = names
        .iter()
        .flat_map(|(n, p)| [display(p), display(&args.input_b.join(n))])
        .collect();
    m.outputs = outputs;
    m.results = json!({ "pairs": names.len() });
    m.write(&args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn product_names(args: &EvalArgs) -> Result<Vec<String>> {
    if !args.names.is_empty() {
        if args.names.len() != args.preds.len() {
            bail!("{} names given for {} products", args.names.len(), args.preds.len());
        }
        return Ok(args.names.clone());
    }
    let names: Vec<String> = args
        .preds
        .iter()
        .map(|p| {
            let stem = if p.is_dir() { p.file_name() } else { p.file_stem() };
            stem.map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| display(p))
        })
        .collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            bail!("two products are named `{n}`; pass --names to tell them apart");
        }
    }
    Ok(names)
}

fn eval_cases(args: &EvalArgs) -> Result<Vec<Case>> {
    if !args.truth.is_dir() {
        let image = args
            .truth
            .file_name()
            .map_or_else(|| display(&args.truth), |n| n.to_string_lossy().into_owned());
        let preds = args.preds.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
        return Ok(vec![Case {
            image,
            truth: load(&args.truth)?,
            preds,
        }]);
    }
    for p in &args.preds {
        if !p.is_dir() {
            bail!("truth {} is a directory, so {} must be one too", args.truth.display(), p.display());
        }
    }
    list_grids(&args.truth)?
        .par_iter()
        .map(|(name, path)| {
            let preds = args
                .preds
                .iter()
                .map(|dir| {
                    let p = dir.join(name);
                    if !p.is_file() {
                        bail!("{} has no counterpart {}", path.display(), p.display());
                    }
                    load(&p)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Case {
                image: name.clone(),
                truth: load(path)?,
                preds,
            })
        })
        .collect()
}

fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let names = product_names(args)?;
    let cases = eval_cases(args)?;
    let options = EvalOptions {
        threshold: args.threshold,
        alpha: args.alpha,
        bin_width: args.bin_width,
        ks_mode: args.ks_mode.into(),
    };
    let ev = evaluate(names, &cases, options)?;
    ensure_dir(&args.output)?;
    let written = ev.write_reports(&args.output)?;

    let skipped = ev
        .ks
        .iter()
        .filter(|r| matches!(r.outcome, crate::study::KsOutcome::Skipped(_)))
        .count();
    if skipped > 0 {
        eprintln!("notice: {skipped} KS comparison(s) skipped (empty common-valid mask); see ks.tsv");
    }
    let mut m = RunManifest::new("eval", serde_json::to_value(args)?);
    m.inputs = std::iter::once(&args.truth).chain(&args.preds).map(|p| display(p)).collect();
    m.outputs = written.iter().map(|p| relative(&args.output, p)).collect();
    m.results = json!({ "images": ev.images.len(), "ks_skipped": skipped });
    m.write(&args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn synth(args: &SynthArgs) -> Result<ExitCode> {
    let spec = args.ensemble.spec(args.pairs);
    spec.validate()?;
    ensure_dir(&args.output)?;
    if args.pairs > 0 {
        for sub in ["truth", "a", "b"] {
            ensure_dir(&args.output.join(sub))?;
        }
    }
    let results = (0..args.pairs)
        .into_par_iter()
        .map(|i| -> Result<Option<Vec<String>>> {
            let (scene, sa, sb) = spec.member(i);
            let pair = match gen_pair(&scene, &sa, &sb) {
                Ok(p) => p,
                Err(e @ Error::Rejected { .. }) => {
                    log::info!("{}: {e}", pair_name(i));
                    return Ok(None);
                }
                Err(e) => return Err(e).with_context(|| format!("generating {}", pair_name(i))),
            };
            let file = format!("{}.{GRID_EXT}", pair_name(i));
            let mut written = Vec::new();
            for (sub, g) in [("truth", &pair.truth), ("a", &pair.a), ("b", &pair.b)] {
                let path = args.output.join(sub).join(&file);
                write_grid(&path, g).with_context(|| format!("writing {}", path.display()))?;
                written.push(format!("{sub}/{file}"));
            }
            Ok(Some(written))
        })
        .collect::<Result<Vec<_>>>()?;

    let accepted = results.iter().filter(|r| r.is_some()).count();
    let rejected: Vec<String> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| pair_name(i))
        .collect();
    let mut m = RunManifest::new("synth", serde_json::to_value(args)?);
    m.seeds = vec![spec.seed];
    m.outputs = results.into_iter().flatten().flatten().collect();
    m.results = json!({
        "requested": args.pairs,
        "accepted": accepted,
        "rejected": rejected.len(),
        "rejected_pairs": rejected,
    });
    m.write(&args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn reproduce(args: &ReproduceArgs) -> Result<ExitCode> {
    let fusion = args.fusion.config();
    let options = StudyOptions {
        ensemble: args.ensemble.spec(args.pairs),
        eval: EvalOptions {
            threshold: fusion.rain_threshold,
            alpha: args.alpha,
            bin_width: args.bin_width,
            ..EvalOptions::default()
        },
        fusion,
    };
    let study = run_study(options)?;
    ensure_dir(&args.output)?;
    let written = study.write_reports(&args.output)?;

    let checks: Vec<_> = study
        .checks
        .iter()
        .map(|c| json!({ "check": c.name, "hard": c.hard, "passed": c.passed }))
        .collect();
    let mut m = RunManifest::new("reproduce", serde_json::to_value(args)?);
    m.seeds = vec![args.ensemble.seed];
    m.outputs = written.iter().map(|p| relative(&args.output, p)).collect();
    m.results = json!({
        "requested": args.pairs,
        "accepted": study.accepted(),
        "rejected": study.rejected(),
        "checks": checks,
    });
    m.write(&args.output)?;

    let failures = study.hard_failures();
    for c in &failures {
        eprintln!(
            "check failed: {} ({} {} {})",
            c.name,
            crate::report::opt(c.value),
            c.relation,
            crate::report::opt(c.reference)
        );
    }
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
