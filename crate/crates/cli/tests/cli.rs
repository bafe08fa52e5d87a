use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patchkit_cli::manifest::verify;

const BIN: &str = env!("CARGO_BIN_EXE_patchkit");

/// Small, coarse mono run that simulates in a couple of seconds.
const QUICK: &str = r#"
[substrate]
eps_r = 2.2
height_mm = 2.0

[targets]
f_ghz = [10.0]

[geometry]
kind = "mono"

[overrides]
gap_mm = 1.0

[simulation]
cell_mm = 1.0
max_steps = 3000
pml_cells = 8
band_ghz = [6.0, 14.0]
points = 81
pattern_step_deg = 10.0
"#;

const STACKED: &str = r#"
[substrate]
eps_r = 3.55
height_mm = 1.5

[targets]
f_ghz = [2.4, 5.8]
bands_ghz = [2.3, 5.7]

[geometry]
kind = "stacked"

[overrides]
gap_mm = 0.38
"#;

fn write_run(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn patchkit(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env("RUST_LOG", "warn");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

/// Relative paths whose contents differ or that exist on one side only.
fn differing(a: &BTreeMap<PathBuf, Vec<u8>>, b: &BTreeMap<PathBuf, Vec<u8>>) -> Vec<PathBuf> {
    a.keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect()
}

/// Every file under `root` with its bytes, keyed by relative path.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

#[test]
fn missing_substrate_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(
        tmp.path(),
        "bad.toml",
        "[targets]\nf_ghz = [5.8]\n[geometry]\nkind = \"mono\"\n",
    );
    let o = patchkit(&["design", "--run", run.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("substrate"));
}

#[test]
fn unknown_key_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "r.toml", QUICK);
    let o = patchkit(
        &[
            "design",
            "--run",
            run.to_str().unwrap(),
            "--set",
            "substrate.colour=1",
        ],
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn tiny_budget_is_a_solver_error() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "r.toml", QUICK);
    let out = tmp.path().join("out");
    let o = patchkit(
        &[
            "simulate",
            "--run",
            run.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--budget",
            "1000",
        ],
        &[],
    );
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "r.toml", QUICK);
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = blocker.join("out");
    let o = patchkit(
        &[
            "design",
            "--run",
            run.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn design_tune_and_masks_are_byte_identical_on_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "s.toml", STACKED);
    let mut trees = Vec::new();
    for n in 0..2 {
        let out = tmp.path().join(format!("out{n}"));
        for cmd in ["design", "tune", "masks"] {
            let o = patchkit(
                &[
                    cmd,
                    "--run",
                    run.to_str().unwrap(),
                    "--out",
                    out.to_str().unwrap(),
                ],
                &[],
            );
            assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        trees.push(tree(&out));
    }
    assert!(!trees[0].is_empty());
    assert_eq!(differing(&trees[0], &trees[1]), Vec::<PathBuf>::new());
}

#[test]
fn mask_counts_per_geometry() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, svgs) in [(QUICK, 2), (STACKED, 3)] {
        let run = write_run(tmp.path(), "r.toml", text);
        let out = tmp.path().join(format!("m{svgs}"));
        let o = patchkit(
            &[
                "masks",
                "--run",
                run.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let files = tree(&out);
        let n = files
            .keys()
            .filter(|p| p.extension().is_some_and(|e| e == "svg"))
            .count();
        assert_eq!(n, svgs);
        assert!(files
            .keys()
            .any(|p| p.file_name().unwrap() == "manifest.txt"));
    }
}

#[test]
fn simulate_is_deterministic_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "r.toml", QUICK);
    let mut trees = Vec::new();
    for (n, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("sim{n}"));
        let o = patchkit(
            &[
                "simulate",
                "--run",
                run.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(verify(&out).unwrap() >= 8);
        trees.push(tree(&out));
    }
    assert_eq!(differing(&trees[0], &trees[1]), Vec::<PathBuf>::new());
    assert_eq!(differing(&trees[1], &trees[2]), Vec::<PathBuf>::new());
    for name in [
        "s11.csv",
        "bands.csv",
        "summary.txt",
        "records/antenna.bin",
        "records/reference.bin",
    ] {
        assert!(trees[0].contains_key(Path::new(name)), "{name} missing");
    }
}

#[test]
fn tampered_bundle_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let run = write_run(tmp.path(), "r.toml", QUICK);
    let out = tmp.path().join("d");
    let o = patchkit(
        &[
            "design",
            "--run",
            run.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(verify(&out).unwrap(), 2);
    std::fs::write(out.join("design.txt"), "edited").unwrap();
    assert!(verify(&out).is_err());
}

#[test]
fn plot_rerenders_s11_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("s.csv");
    let mut text = String::from("f_hz,re_s11,im_s11,mag_db\n");
    for i in 0..11 {
        let f = 1e9 + 1e8 * i as f64;
        let m = 0.2 + 0.05 * i as f64;
        text.push_str(&format!("{f:e},{m},0,{}\n", 20.0 * m.log10()));
    }
    std::fs::write(&csv, text).unwrap();
    let svg = tmp.path().join("s.svg");
    let o = patchkit(
        &[
            "plot",
            csv.to_str().unwrap(),
            "--out",
            svg.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = std::fs::read_to_string(&svg).unwrap();
    assert!(s.starts_with("<svg") || s.starts_with("<?xml"));
    assert!(s.contains("id=\"rule\""));
}
