use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lab::{read_rows, Row};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

fn run(cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn equality_family_config_passes() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&config("equality_family.cfg"), t.path(), &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let rows = read_rows(&t.path().join("equality_family.jsonl")).unwrap();
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r.gap.abs() <= 1e-8));
}

#[test]
fn noncentered_counterexample_is_expected_to_fail() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&config("noncentered_counterexample.cfg"), t.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_rows(t.path()).unwrap();
    assert!(rows.iter().all(|r| r.verdict == "violated"));
}

#[test]
fn malformed_config_exits_2_with_location() {
    let t = tempfile::tempdir().unwrap();
    let cases = [
        (
            "syntax.cfg",
            "[a]\nchecker = \"equality_family\"\ncases = = 3\n\n[b]\nchecker = \"lsi_deficit\"\n",
            ":3:",
        ),
        ("unknown.cfg", "[a]\nchecker = \"no_such_checker\"\n", ":2:"),
        (
            "key.cfg",
            "[a]\nchecker = \"lsi_deficit\"\nmu_var = 1.0\nwidth = 3\n",
            ":4:",
        ),
        (
            "type.cfg",
            "[a]\nchecker = \"equality_family\"\ncases = \"many\"\n",
            ":3:",
        ),
    ];
    for (name, text, loc) in cases {
        let cfg = write(t.path(), name, text);
        let o = run(&cfg, &t.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(&format!("{name}{loc}")), "{name}: {err}");
    }
    assert!(!t.path().join("out").exists());
}

#[test]
fn unexpected_outcome_exits_1() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.cfg",
        "[wrong]\nchecker = \"noncentered_counterexample\"\nm1 = [1.0]\nm2 = [-1.0]\nexpect = \"holds\"\n",
    );
    assert_eq!(run(&cfg, &t.path().join("out"), &[]).status.code(), Some(1));
}

#[test]
fn checker_errors_become_rows() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.cfg",
        "[not_centered]\nchecker = \"gaussian_pair\"\nmu_mean = 1.0\n",
    );
    let out = t.path().join("out");
    assert_eq!(run(&cfg, &out, &[]).status.code(), Some(1));
    let rows = read_rows(&out.join("not_centered.jsonl")).unwrap();
    assert_eq!(rows[0].verdict, "error");
    assert!(rows[0].error.contains("not centered"), "{}", rows[0].error);
    assert!(rows[0].lhs.is_nan());
}

fn sample_config(dir: &Path) -> String {
    write(
        dir,
        "sample.cfg",
        "[sweep]\nchecker = \"talagrand_sweep\"\ncases = 24\n\n\
         [family]\nchecker = \"equality_family\"\ncases = 5\ndims = [1, 3]\n\n\
         [ball]\nchecker = \"concentration\"\nset = \"ball\"\ndim = 2\nradius = 1.0\nradii = [0.5, 1.0]\nsamples = 200000\n\n\
         [interval]\nchecker = \"concentration\"\nintervals = [[-1, 1]]\nradii = [0, 0.5, 1, 2]\n",
    )
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn runs_are_reproducible_bit_for_bit() {
    let t = tempfile::tempdir().unwrap();
    let cfg = sample_config(t.path());
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    assert_eq!(
        run(&cfg, &a, &["--seed", "5", "--jobs", "1"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&cfg, &b, &["--seed", "5", "--jobs", "4"]).status.code(),
        Some(0)
    );
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{x:?}");
    }
    let c = t.path().join("c");
    run(&cfg, &c, &["--seed", "6"]);
    assert_ne!(
        fs::read(a.join("sweep.jsonl")).unwrap(),
        fs::read(c.join("sweep.jsonl")).unwrap()
    );
}

#[test]
fn summary_and_enlargement_tables() {
    let t = tempfile::tempdir().unwrap();
    let cfg = sample_config(t.path());
    let out = t.path().join("out");
    run(&cfg, &out, &[]);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: usize = ["sweep", "family", "ball", "interval"]
        .iter()
        .map(|s| read_rows(&out.join(format!("{s}.jsonl"))).unwrap().len())
        .sum();
    assert_eq!(rows, 24 + 10 + 2 + 4);
    assert_eq!(summary.lines().count(), rows + 1);
    assert!(summary.lines().skip(1).all(|l| l.split(',').count() == 11));
    let csv = fs::read_to_string(out.join("interval.enlargement.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("kind,params,r,gamma_A,gamma_Ar,tail,bound,maurey_bound,stderr"));
    assert!(out.join("ball.enlargement.csv").exists());
}

fn rewrite(path: &Path, f: impl Fn(&mut Row)) {
    let mut rows = read_rows(path).unwrap();
    rows.iter_mut().for_each(f);
    let text: String = rows.iter().map(|r| r.to_json() + "\n").collect();
    fs::write(path, text).unwrap();
}

#[test]
fn diff_against_goldens() {
    let t = tempfile::tempdir().unwrap();
    let cfg = sample_config(t.path());
    let golden = t.path().join("golden");
    run(&cfg, &golden, &[]);
    let copy = |name: &str| {
        let dir = t.path().join(name);
        fs::create_dir_all(&dir).unwrap();
        for f in files(&golden) {
            fs::copy(&f, dir.join(f.file_name().unwrap())).unwrap();
        }
        dir
    };
    let g = golden.to_str().unwrap();

    let same = copy("same");
    assert_eq!(
        lab(&["diff", same.to_str().unwrap(), g]).status.code(),
        Some(0)
    );

    let nudged = copy("nudged");
    rewrite(&nudged.join("sweep.jsonl"), |r| {
        r.gap += 1e-12 * r.gap.abs().max(1.0)
    });
    assert_eq!(
        lab(&["diff", nudged.to_str().unwrap(), g]).status.code(),
        Some(0)
    );

    let flipped = copy("flipped");
    rewrite(&flipped.join("family.jsonl"), |r| {
        r.verdict = "violated".into()
    });
    let o = lab(&["diff", flipped.to_str().unwrap(), g]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stdout);
    assert!(
        msg.contains("scenario family") && msg.contains("verdict"),
        "{msg}"
    );

    let moved = copy("moved");
    rewrite(&moved.join("interval.jsonl"), |r| r.rhs *= 1.0 + 1e-6);
    let o = lab(&["diff", moved.to_str().unwrap(), g]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("scenario interval"));

    let broken = copy("broken");
    let p = broken.join("ball.jsonl");
    let text = fs::read_to_string(&p)
        .unwrap()
        .replacen("\"gap\"", "\"slack\"", 1);
    fs::write(&p, text).unwrap();
    let o = lab(&["diff", broken.to_str().unwrap(), g]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema mismatch"));
}

#[test]
fn list_checkers_names_every_checker() {
    let o = lab(&["list-checkers"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for c in lab::Checker::ALL {
        assert!(text.contains(c.name()));
    }
}
