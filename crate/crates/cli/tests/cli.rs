use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gapfuse::io::{read_grid, write_grid};
use gapfuse::synth::{gen_truth, SceneParams};
use gapfuse::{GridMeta, RainGrid};
use serde_json::Value;

fn gapfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapfuse"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1300000000")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn put(dir: &Path, name: &str, g: &RainGrid) -> PathBuf {
    let p = dir.join(name);
    write_grid(&p, g).unwrap();
    p
}

fn grid(w: usize, h: usize, px: &[Option<f64>]) -> RainGrid {
    RainGrid::from_options(GridMeta::with_size(w, h).unwrap(), px).unwrap()
}

/// Rows of a TSV file without the header, split into fields.
fn tsv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn fusing_a_scene_with_itself_returns_it() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen_truth(&SceneParams::default()).unwrap();
    let a = put(dir.path(), "x.grid", &x);
    let out = dir.path().join("f.grid");
    let o = gapfuse(&["fuse", s(&a), s(&a), "-o", s(&out), "--method", "fused"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = read_grid(&out).unwrap();
    let xv = x.filled(0.0);
    let range = xv.iter().copied().fold(0.0, f64::max);
    for ((r, c), &v) in xv.indexed_iter() {
        assert!((f.get(r, c).unwrap() - v).abs() <= 1e-6 * range);
    }
}

#[test]
fn all_missing_inputs_give_all_missing_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = put(dir.path(), "a.grid", &RainGrid::all_missing(GridMeta::default()));
    let out = dir.path().join("f.grid");
    let o = gapfuse(&["fuse", s(&a), s(&a), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(read_grid(&out).unwrap().iter().all(|v| v.is_none()));
}

#[test]
fn too_many_levels_is_a_depth_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = put(dir.path(), "a.grid", &RainGrid::zeros(GridMeta::default()));
    let out = dir.path().join("f.grid");
    let o = gapfuse(&["fuse", s(&a), s(&a), "-o", s(&out), "--levels", "7"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("a.grid"), "{err}");
    assert!(err.contains("7") && err.contains("4"), "{err}");
    assert!(!out.exists());
}

#[test]
fn errors_name_the_failing_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = put(dir.path(), "good.grid", &RainGrid::zeros(GridMeta::default()));
    let bad = dir.path().join("bad.grid");
    fs::write(&bad, "RAINGRID 1 2 1 0.25\n1 x\n").unwrap();
    let out = dir.path().join("f.grid");

    let o = gapfuse(&["fuse", s(&good), s(&bad), "-o", s(&out)]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bad.grid") && err.contains("line 2"), "{err}");

    let small = put(dir.path(), "small.grid", &RainGrid::zeros(GridMeta::with_size(32, 32).unwrap()));
    let o = gapfuse(&["fuse", s(&good), s(&small), "-o", s(&out)]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("good.grid") && err.contains("small.grid"), "{err}");

    let o = gapfuse(&["eval", s(&good), s(&dir.path().join("absent.grid")), "-o", s(dir.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("absent.grid"));
}

#[test]
fn baselines_are_selectable() {
    let dir = tempfile::tempdir().unwrap();
    let px: Vec<Option<f64>> = (0..64 * 64).map(|i| (i % 3 != 0).then_some((i % 7) as f64)).collect();
    let a = put(dir.path(), "a.grid", &grid(64, 64, &px));
    let b = put(dir.path(), "b.grid", &RainGrid::all_missing(GridMeta::default()));
    let interp = dir.path().join("i.grid");
    let pyr = dir.path().join("p.grid");
    assert!(gapfuse(&["fuse", s(&a), s(&b), "-o", s(&interp), "--method", "interp"]).status.success());
    assert!(gapfuse(&["fuse", s(&a), s(&b), "-o", s(&pyr), "--method", "pyramid"]).status.success());
    assert_eq!(read_grid(&interp).unwrap(), read_grid(&a).unwrap());
    let p = read_grid(&pyr).unwrap();
    assert!(p.is_gap_free());
    assert!(p.iter().flatten().all(|v| v >= 0.0));
}

#[test]
fn batch_fuse_pairs_files_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("syn");
    assert!(gapfuse(&["synth", "-o", s(&syn), "--pairs", "3"]).status.success());
    let out = dir.path().join("fused");
    let o = gapfuse(&["fuse", s(&syn.join("a")), s(&syn.join("b")), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["command"], "fuse");
    assert_eq!(m["results"]["pairs"], 3);
    for i in 0..3 {
        let name = format!("pair_{i:04}.grid");
        let want = gapfuse::run_pipeline(
            &read_grid(&syn.join("a").join(&name)).unwrap(),
            &read_grid(&syn.join("b").join(&name)).unwrap(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(read_grid(&out.join(&name)).unwrap(), want);
    }
}

#[test]
fn eval_of_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let t = put(dir.path(), "truth.grid", &gen_truth(&SceneParams::default()).unwrap());
    let out = dir.path().join("rep");
    let o = gapfuse(&["eval", s(&t), s(&t), "-o", s(&out), "--names", "same"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let scores = tsv(&out.join("scores.tsv"));
    assert_eq!(scores.len(), 1);
    assert_eq!(&scores[0][6..], &["1", "0", "1"]);
    let ks = tsv(&out.join("ks.tsv"));
    assert_eq!(ks[0][2], "0");
    assert_eq!(ks[0][7], "false");
    assert_eq!(ks[0][8], "ok");
    for f in ["score_cdf.tsv", "score_summary.tsv", "intensity_pdf.tsv", "intensity_cdf.tsv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(manifest(&out)["command"], "eval");
}

#[test]
fn eval_matches_a_hand_computed_four_pixel_table() {
    let dir = tempfile::tempdir().unwrap();
    let t = put(dir.path(), "truth.grid", &grid(2, 2, &[Some(2.0), Some(1.0), Some(0.0), Some(0.0)]));
    let p = put(dir.path(), "pred.grid", &grid(2, 2, &[Some(1.0), Some(0.0), Some(3.0), Some(0.0)]));
    let out = dir.path().join("rep");
    assert!(gapfuse(&["eval", s(&t), s(&p), "-o", s(&out)]).status.success());
    let rows = tsv(&out.join("scores.tsv"));
    assert_eq!(rows[0], ["pred", "truth.grid", "1", "1", "1", "1", "0.5", "0.5", "0.3333333333333333"]);
}

#[test]
fn eval_with_empty_common_mask_skips_ks() {
    let dir = tempfile::tempdir().unwrap();
    let t = put(dir.path(), "truth.grid", &grid(2, 1, &[Some(1.0), None]));
    let p = put(dir.path(), "pred.grid", &grid(2, 1, &[None, Some(1.0)]));
    let out = dir.path().join("rep");
    let o = gapfuse(&["eval", s(&t), s(&p), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("skipped"));
    let ks = tsv(&out.join("ks.tsv"));
    assert!(ks[0][8].starts_with("skipped"), "{:?}", ks[0]);
    // no jointly valid pixels: every score is undefined
    assert_eq!(tsv(&out.join("scores.tsv"))[0][6..], ["NA", "NA", "NA"]);
    assert_eq!(manifest(&out)["results"]["ks_skipped"], 1);
}

#[test]
fn eval_over_directories_per_image() {
    let dir = tempfile::tempdir().unwrap();
    let syn = dir.path().join("syn");
    assert!(gapfuse(&["synth", "-o", s(&syn), "--pairs", "4", "--seed", "3"]).status.success());
    let out = dir.path().join("rep");
    let o = gapfuse(&[
        "eval",
        s(&syn.join("truth")),
        s(&syn.join("a")),
        s(&syn.join("b")),
        "-o",
        s(&out),
        "--ks-mode",
        "per-image",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(tsv(&out.join("scores.tsv")).len(), 8);
    let ks = tsv(&out.join("ks.tsv"));
    assert_eq!(ks.len(), 8);
    assert!(ks.iter().all(|r| r[1].starts_with("pair_")));

    // a directory missing one counterpart is an error naming it
    fs::remove_file(syn.join("b").join("pair_0002.grid")).unwrap();
    let o = gapfuse(&["eval", s(&syn.join("truth")), s(&syn.join("b")), "-o", s(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("pair_0002.grid"));
}

fn dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert!(gapfuse(&["synth", "-o", s(&x), "--pairs", "1", "--seed", "7"]).status.success());
    assert!(gapfuse(&["synth", "-o", s(&y), "--pairs", "1", "--seed", "7"]).status.success());
    let (bx, by) = (dir_bytes(&x), dir_bytes(&y));
    assert_eq!(bx.len(), 4);
    assert_eq!(bx, by);
}

#[test]
fn synth_with_zero_pairs_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = gapfuse(&["synth", "-o", s(dir.path()), "--pairs", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, ["manifest.json"]);
    assert_eq!(manifest(dir.path())["results"]["accepted"], 0);
}

#[test]
fn synth_default_ensemble_acceptance_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = gapfuse(&["synth", "-o", s(dir.path()), "--pairs", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(dir.path());
    let accepted = m["results"]["accepted"].as_u64().unwrap();
    assert!(accepted >= 180, "{accepted}");
    assert_eq!(accepted + m["results"]["rejected"].as_u64().unwrap(), 200);
    assert_eq!(m["seeds"][0], 2011);
    assert_eq!(m["timestamp"], "2011-03-13T07:06:40Z");
    assert_eq!(fs::read_dir(dir.path().join("truth")).unwrap().count() as u64, accepted);
}

#[test]
fn synth_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = gapfuse(&["synth", "-o", s(dir.path()), "--wet-fraction", "1.5"]);
    assert!(!o.status.success());
    let o = gapfuse(&["synth", "-o", s(dir.path()), "--coverage-min", "0.8", "--coverage-max", "0.2"]);
    assert!(!o.status.success());
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_gapfuse"))
            .args(["synth", "-o", s(out), "--pairs", "2"])
            .env("GAPFUSE_THREADS", threads)
            .env("SOURCE_DATE_EPOCH", "0")
            .output()
            .unwrap()
    };
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert!(run("1", &x).status.success());
    assert!(run("3", &y).status.success());
    assert_eq!(dir_bytes(&x), dir_bytes(&y));
    let o = run("zero", &dir.path().join("z"));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("GAPFUSE_THREADS"));
}

#[test]
fn small_reproduce_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gapfuse(&["reproduce", "-o", s(dir.path()), "--pairs", "6"]);
    // hard-check failures set the exit code but the reports are still written
    let checks = tsv(&dir.path().join("checks.tsv"));
    let failed = checks.iter().any(|r| r[4] == "hard" && r[5] == "fail");
    assert_eq!(o.status.success(), !failed, "{}", stderr(&o));
    for f in [
        "scores.tsv",
        "score_cdf.tsv",
        "score_summary.tsv",
        "intensity_pdf.tsv",
        "intensity_cdf.tsv",
        "ks.tsv",
        "checks.tsv",
        "ensemble.tsv",
        "manifest.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let scores = tsv(&dir.path().join("scores.tsv"));
    let accepted = manifest(dir.path())["results"]["accepted"].as_u64().unwrap() as usize;
    assert_eq!(scores.len(), 5 * accepted);
}
