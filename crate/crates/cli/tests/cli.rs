//! End-to-end runs of the `bchlab` binary.

use std::io::Write;
use std::process::{Command, Output};

struct Row {
    quantity: String,
    re: f64,
    im: f64,
    reference: String,
    abs_err: Option<f64>,
}

fn bchlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bchlab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn rows(o: &Output) -> Vec<Row> {
    assert!(o.stdout.starts_with(b"# bchlab seed="));
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(o.stdout.as_slice())
        .records()
        .map(|r| {
            let r = r.unwrap();
            Row {
                quantity: r[0].to_string(),
                re: r[1].parse().unwrap(),
                im: r[2].parse().unwrap(),
                reference: r[3].to_string(),
                abs_err: if r[4].is_empty() {
                    None
                } else {
                    Some(r[4].parse().unwrap())
                },
            }
        })
        .collect()
}

fn find<'a>(rows: &'a [Row], q: &str) -> &'a Row {
    rows.iter()
        .find(|r| r.quantity == q)
        .unwrap_or_else(|| panic!("no row {q}"))
}

#[test]
fn chern_number_of_the_tautological_line() {
    let o = bchlab(&["chern", "--bundle", "cp1-tautological", "--quad", "128"]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    let n = find(&rows, "chern_number");
    assert!((n.re + 1.0).abs() <= 1e-6);
    assert_eq!(n.reference, "-1");
    assert!(n.abs_err.unwrap() <= 1e-6);
}

#[test]
fn flat_plane_bundle_has_vanishing_chern_form() {
    let o = bchlab(&["chern", "--bundle", "flat-r2"]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r.re.abs() <= 1e-12 && r.abs_err.unwrap() <= 1e-12);
    }
}

#[test]
fn flux_torus_integrates_to_its_charge() {
    let o = bchlab(&["chern", "--bundle", "t2-flux:k=2", "--quad", "256"]);
    assert_eq!(code(&o), 0);
    assert!((find(&rows(&o), "chern_number").re - 2.0).abs() <= 1e-5);
}

#[test]
fn bch_routes_agree_along_a_latitude() {
    let o = bchlab(&[
        "bch",
        "--bundle",
        "cp1-tautological",
        "--loop",
        "latitude:alpha=1.0",
        "--fields",
        "random:p=2,seed=7",
    ]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    let w = find(&rows, "wilson_loop");
    for q in ["bch_ode.deg0", "bch_loop_deloop.deg0"] {
        let r = find(&rows, q);
        assert!((r.re - w.re).abs() + (r.im - w.im).abs() <= 1e-10);
    }
    let ode = find(&rows, "bch_ode.deg2");
    let ld = find(&rows, "bch_loop_deloop.deg2");
    assert!(ode.re.abs() + ode.im.abs() > 1e-4);
    assert!((ode.re - ld.re).abs() + (ode.im - ld.im).abs() <= 1e-7);
    assert!(find(&rows, "discrepancy.deg2").abs_err.unwrap() <= 1e-7);
}

#[test]
fn bch_on_a_constant_loop_is_the_chern_character() {
    let o = bchlab(&[
        "bch",
        "--bundle",
        "cp1-dual",
        "--loop",
        "constant:north",
        "--fields",
        "random:p=2,seed=3",
        "--steps",
        "64",
    ]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    let deg2 = find(&rows, "bch_ode.deg2");
    assert!(deg2.re.abs() > 1e-3);
    assert!(deg2.abs_err.unwrap() <= 1e-9);
    assert!(find(&rows, "bch_loop_deloop.deg2").abs_err.unwrap() <= 1e-9);
}

#[test]
fn bch_of_a_flat_bundle_is_rank_then_zero() {
    let o = bchlab(&[
        "bch",
        "--bundle",
        "flat-s2:r=3",
        "--loop",
        "great-circle",
        "--steps",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    assert_eq!(find(&rows, "bch_ode.deg0").re, 3.0);
    assert!(find(&rows, "bch_ode.deg2").re.abs() <= 1e-12);
}

#[test]
fn sp_dumps_the_transport_and_its_residuals() {
    let o = bchlab(&[
        "sp",
        "--bundle",
        "cp1-whitney",
        "--loop",
        "random-fourier:modes=2,seed=1",
        "--steps",
        "256",
    ]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    // the Whitney sum has rank 2
    assert_eq!(find(&rows, "slev.sp0@t=0.tr[1]").re, 2.0);
    assert!(rows.iter().any(|r| r.quantity == "slev.sp1@t=1.tr[eta0]"));
    for q in [
        "residual.slev",
        "residual.levp",
        "residual.levp_inverse_slev",
        "residual.slev_inverse_levp",
    ] {
        assert!(find(&rows, q).abs_err.unwrap() <= 1e-6);
    }
}

#[test]
fn verify_superfunction_is_exact() {
    let o = bchlab(&["verify", "--suite", "superfunction"]);
    assert_eq!(code(&o), 0);
    let rows = rows(&o);
    assert_eq!(rows.len(), 5);
    for q in [
        "superfunction.D^2=d/dt",
        "superfunction.Q^2=-d/dt",
        "superfunction.[D,Q]=0",
        "superfunction.mu_associativity",
    ] {
        assert_eq!(find(&rows, q).abs_err, Some(0.0));
    }
}

#[test]
fn verify_bch_passes_at_the_requested_tolerance() {
    let o = bchlab(&["verify", "--suite", "bch", "--tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(rows(&o).iter().all(|r| r.abs_err.unwrap() <= 1e-6));
}

#[test]
fn verify_all_passes() {
    let start = std::time::Instant::now();
    let o = bchlab(&["verify", "--suite", "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(start.elapsed().as_secs() < 300);
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 failed"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&bchlab(&["verify", "--suite", "nonsense"])), 2);
    assert_eq!(code(&bchlab(&["chern", "--bundle", "no-such-bundle"])), 2);
    assert_eq!(code(&bchlab(&["bch", "--loop", "spiral"])), 2);
    assert_eq!(code(&bchlab(&["bch", "--method", "euler"])), 2);
    assert_eq!(code(&bchlab(&["chern", "--quad"])), 2);
    assert_eq!(code(&bchlab(&["frobnicate"])), 2);
    // a coarse grid misses the Chern number by far more than 1e-12
    assert_eq!(
        code(&bchlab(&[
            "chern",
            "--bundle",
            "cp1-tautological",
            "--quad",
            "4",
            "--tol",
            "1e-12"
        ])),
        1
    );
    // the origin has no retraction onto the sphere
    assert_eq!(
        code(&bchlab(&["bch", "--loop", "constant:0,0,0", "--fields", "none"])),
        3
    );
}

fn strip_runtime(bytes: &[u8]) -> Vec<String> {
    String::from_utf8(bytes.to_vec())
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn output_is_deterministic_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_bchlab"))
            .env("BCHLAB_THREADS", threads)
            .args([
                "bch",
                "--bundle",
                "r2-su2-poly",
                "--loop",
                "random-fourier:modes=3,seed=5",
                "--fields",
                "random:p=4",
            ])
            .args(["--seed", "11", "--steps", "256", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    assert_eq!(strip_runtime(&a), strip_runtime(&b));
    assert!(String::from_utf8_lossy(&a).starts_with("# bchlab seed=11 prng=chacha8\n"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# flux torus\nbundle = t2-flux:k=3\nquad = 64\nseed = 2").unwrap();
    drop(f);
    let cfg = path.to_str().unwrap();

    let o = bchlab(&["chern", "--config", cfg]);
    assert_eq!(code(&o), 0);
    assert!((find(&rows(&o), "chern_number").re - 3.0).abs() <= 1e-6);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("# bchlab seed=2 "));

    let o = bchlab(&["chern", "--config", cfg, "--bundle", "cp1-dual"]);
    assert_eq!(code(&o), 0);
    assert!((find(&rows(&o), "chern_number").re - 1.0).abs() <= 1e-6);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "colour = red\n").unwrap();
    assert_eq!(code(&bchlab(&["chern", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn thread_count_must_be_a_number() {
    let o = Command::new(env!("CARGO_BIN_EXE_bchlab"))
        .env("BCHLAB_THREADS", "lots")
        .args(["chern", "--bundle", "flat-r2"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
