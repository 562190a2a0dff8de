//! Helpers shared by the CLI integration tests and the acceptance target.
//!
//! Golden files hold the expected `::` lines of one command, in order. A line
//! is matched exactly unless its value has one of these forms:
//!
//! - `<= BOUND`: a float no larger than `BOUND`
//! - `~ VALUE RTOL`: a float within `RTOL` relative of `VALUE`
//! - `*`: any value

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use tenkit::io::read_ten;
use tenkit::Tensor;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    /// The `::` lines of stdout.
    pub fn machine(&self) -> String {
        self.stdout
            .lines()
            .filter(|l| l.starts_with("::"))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    pub fn value(&self, key: &str) -> Option<String> {
        let prefix = format!("::{key}");
        self.stdout.lines().find_map(|l| {
            let rest = l.strip_prefix(&prefix)?;
            if rest.is_empty() {
                Some(String::new())
            } else {
                rest.strip_prefix(' ').map(str::to_string)
            }
        })
    }
}

pub fn tenkit<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_tenkit"))
        .args(args)
        .output()
        .expect("tenkit binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn split_line(l: &str) -> (&str, &str) {
    let l = l.trim_start_matches("::");
    l.split_once(' ').unwrap_or((l, ""))
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    s.parse().map_err(|_| format!("{what}: '{s}' is not a number"))
}

/// Compares the `::` block of a run against a golden file.
pub fn check_golden(name: &str, run: &Run) -> Result<(), String> {
    let path = golden(name);
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let got = run.machine();
    let want: Vec<&str> = want.lines().filter(|l| !l.is_empty()).collect();
    let got: Vec<&str> = got.lines().collect();
    if want.len() != got.len() {
        return Err(format!(
            "{name}: expected {} :: lines, got {}:\n{}",
            want.len(),
            got.len(),
            got.join("\n")
        ));
    }
    for (w, g) in want.iter().zip(&got) {
        let (wk, wv) = split_line(w);
        let (gk, gv) = split_line(g);
        if wk != gk {
            return Err(format!("{name}: expected key '{wk}', got '{gk}'"));
        }
        let ok = if wv == "*" {
            true
        } else if let Some(bound) = wv.strip_prefix("<= ") {
            parse_f64(gv, wk)? <= parse_f64(bound, wk)?
        } else if let Some(rest) = wv.strip_prefix("~ ") {
            let (v, rtol) = rest.split_once(' ').ok_or(format!("{name}: bad golden '{w}'"))?;
            let (v, rtol) = (parse_f64(v, wk)?, parse_f64(rtol, wk)?);
            (parse_f64(gv, wk)? - v).abs() <= rtol * v.abs()
        } else {
            wv == gv
        };
        if !ok {
            return Err(format!("{name}: '{g}' does not match golden '{w}'"));
        }
    }
    Ok(())
}

/// Exact shape and bitwise data equality of two `.ten` files.
pub fn same_tensor(got: &Path, want: &Path) -> Result<(), String> {
    let a: Tensor = read_ten(got).map_err(|e| format!("{}: {e}", got.display()))?;
    let b: Tensor = read_ten(want).map_err(|e| format!("{}: {e}", want.display()))?;
    if a.extents() != b.extents() {
        return Err(format!("{}: shape {} but expected {}", got.display(), a.shape(), b.shape()));
    }
    let same = a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits());
    if !same {
        return Err(format!("{}: data differ from {}", got.display(), want.display()));
    }
    Ok(())
}

fn expect_code(name: &str, run: &Run, code: i32) -> Result<(), String> {
    if run.code != code {
        return Err(format!(
            "{name}: exit {} (expected {code}); stderr: {}",
            run.code, run.stderr
        ));
    }
    Ok(())
}

fn case<S: AsRef<std::ffi::OsStr>>(name: &str, args: &[S], code: i32) -> Result<Run, String> {
    let run = tenkit(args);
    expect_code(name, &run, code)?;
    check_golden(&format!("{name}.txt"), &run)?;
    Ok(run)
}

/// Runs every golden-file case with outputs under `tmp`; one entry per case.
pub fn golden_suite(tmp: &Path) -> Vec<(&'static str, Result<(), String>)> {
    let f = |n: &str| fixture(n).to_string_lossy().into_owned();
    let t = |n: &str| tmp.join(n).to_string_lossy().into_owned();
    let mut out: Vec<(&'static str, Result<(), String>)> = Vec::new();

    out.push(("info_ramp234", case("info_ramp234", &["info", &f("ramp234.ten")], 0).map(drop)));
    out.push(("info_scalar", case("info_scalar", &["info", &f("scalar.ten")], 0).map(drop)));

    let reshapes: [(&'static str, &str, &[&str], &str); 4] = [
        ("reshape_permute231", "ramp234.ten", &["permute", "2", "3", "1"], "ramp234_permute231.ten"),
        ("reshape_unfold2", "ramp234.ten", &["unfold", "2"], "ramp234_unfold2.ten"),
        ("reshape_kunfold2", "ramp234.ten", &["kunfold", "2"], "ramp234_kunfold2.ten"),
        ("reshape_fold22", "vec4.ten", &["fold", "2", "2"], "vec4_fold22.ten"),
    ];
    for (name, input, action, expected) in reshapes {
        let target = t(&format!("{name}.ten"));
        let mut args = vec!["reshape".to_string(), f(input), "--out".into(), target.clone()];
        args.extend(action.iter().map(|a| a.to_string()));
        let r = case(name, &args, 0)
            .and_then(|_| same_tensor(Path::new(&target), &golden(expected)));
        out.push((name, r));
    }

    let hosvd_dir = t("hosvd");
    let thosvd_dir = t("thosvd");
    out.push((
        "decompose_hosvd",
        case("decompose_hosvd", &["decompose", &f("rand345.ten"), "--out", &hosvd_dir, "hosvd"], 0)
            .map(drop),
    ));
    out.push((
        "decompose_thosvd",
        case(
            "decompose_thosvd",
            &["decompose", &f("rand345.ten"), "--out", &thosvd_dir, "thosvd", "2", "2", "2"],
            0,
        )
        .map(drop),
    ));
    out.push((
        "decompose_tt",
        case("decompose_tt", &["decompose", &f("tt12321.ten"), "--out", &t("tt"), "tt"], 0).map(drop),
    ));
    out.push((
        "decompose_cp",
        case(
            "decompose_cp",
            &["decompose", &f("cp_rank3.ten"), "--out", &t("cp"), "--seed", "7", "cp", "3"],
            0,
        )
        .map(drop),
    ));
    out.push((
        "verify_hosvd",
        case("verify_hosvd", &["verify", &f("rand345.ten"), &hosvd_dir], 0).map(drop),
    ));
    out.push((
        "verify_thosvd",
        case("verify_thosvd", &["verify", &f("rand345.ten"), &thosvd_dir], 1).map(drop),
    ));

    let abv_out = t("abv.ten");
    out.push((
        "contract_abv",
        case("contract_abv", &["contract", &f("abv.tn"), "--report-cost", "--out", &abv_out], 0)
            .and_then(|_| same_tensor(Path::new(&abv_out), &fixture("abv_expected.ten"))),
    ));
    out.push((
        "contract_abv_given",
        case(
            "contract_abv_given",
            &[
                "contract",
                &f("abv.tn"),
                "--strategy",
                "given",
                "--step",
                "A,B",
                "--step",
                "A,v",
                "--report-cost",
            ],
            0,
        )
        .map(drop),
    ));
    let mm_out = t("matmul.ten");
    out.push((
        "contract_matmul",
        case("contract_matmul", &["contract", &f("matmul.tn"), "--out", &mm_out], 0)
            .and_then(|_| same_tensor(Path::new(&mm_out), &fixture("matmul_expected.ten"))),
    ));
    out
}

/// Runs the seeded commands twice and compares the `::` blocks byte for byte,
/// along with every file the runs wrote.
pub fn reproducibility(tmp: &Path) -> Result<(), String> {
    let f = |n: &str| fixture(n).to_string_lossy().into_owned();
    let mut blocks = Vec::new();
    for k in 0..2 {
        let dir = tmp.join(format!("repro{k}"));
        let cp = tenkit(&[
            "decompose",
            &f("cp_rank3.ten"),
            "--out",
            &dir.join("cp").to_string_lossy(),
            "--seed",
            "11",
            "cp",
            "3",
        ]);
        let tt = tenkit(&["decompose", &f("rand345.ten"), "--out", &dir.join("tt").to_string_lossy(), "tt"]);
        let con = tenkit(&[
            "contract",
            &f("abv.tn"),
            "--strategy",
            "greedy",
            "--report-cost",
            "--out",
            &dir.join("abv.ten").to_string_lossy(),
        ]);
        for r in [&cp, &tt, &con] {
            expect_code("reproducibility", r, 0)?;
        }
        blocks.push((cp.machine(), tt.machine(), con.machine(), dir));
    }
    let (a, b) = (&blocks[0], &blocks[1]);
    if a.0 != b.0 || a.1 != b.1 || a.2 != b.2 {
        return Err("'::' blocks differ between identical seeded runs".into());
    }
    for rel in [
        "cp/model.txt",
        "cp/weights.ten",
        "cp/factor_1.ten",
        "cp/factor_2.ten",
        "cp/factor_3.ten",
        "tt/model.txt",
        "tt/core_1.ten",
        "tt/core_2.ten",
        "tt/core_3.ten",
        "abv.ten",
    ] {
        let x = std::fs::read(a.3.join(rel)).map_err(|e| format!("{rel}: {e}"))?;
        let y = std::fs::read(b.3.join(rel)).map_err(|e| format!("{rel}: {e}"))?;
        if x != y {
            return Err(format!("{rel} differs between identical seeded runs"));
        }
    }
    Ok(())
}
