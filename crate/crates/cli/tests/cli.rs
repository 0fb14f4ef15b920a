use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mdts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdts"))
        .args(args)
        .env_remove("MDTS_THREADS")
        .output()
        .expect("spawn mdts")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
        .unwrap_or_else(|| panic!("no {key} in {stdout}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn constant_array_estimates_zero() {
    let dir = scratch("const");
    let f = dir.join("const.mda");
    ok(&mdts(&[
        "gen",
        "--model",
        "periodic:1x1:0",
        "--dims",
        "64x64",
        "--out",
        p(&f),
    ]));
    let out = ok(&mdts(&["estimate", "--in", p(&f), "--k", "4"]));
    assert_eq!(out.lines().next(), Some("estimate_bits_per_site=0.000000"));
    assert_eq!(value(&out, "k_used"), "4");
    assert_eq!(value(&out, "k_bound"), "explicit");
    assert_eq!(value(&out, "total_blocks"), "256");
}

#[test]
fn compress_decompress_is_byte_identical() {
    let dir = scratch("roundtrip");
    for (model, dims) in [
        ("markov:0.9,0.1/0.1,0.9", "100x37"),
        ("uniform:5", "9x10x11"),
        ("bernoulli:0.05", "5000"),
    ] {
        let (x, z, y) = (dir.join("x.mda"), dir.join("x.mdtc"), dir.join("y.mda"));
        ok(&mdts(&[
            "gen",
            "--model",
            model,
            "--dims",
            dims,
            "--seed",
            "4",
            "--out",
            p(&x),
        ]));
        ok(&mdts(&["compress", "--in", p(&x), "--out", p(&z)]));
        ok(&mdts(&["decompress", "--in", p(&z), "--out", p(&y)]));
        assert_eq!(
            std::fs::read(&x).unwrap(),
            std::fs::read(&y).unwrap(),
            "{model}"
        );
    }
    let (x, z, y) = (dir.join("h.mda"), dir.join("h.mdtc"), dir.join("h2.mda"));
    ok(&mdts(&[
        "gen",
        "--model",
        "bernoulli:0.2",
        "--dims",
        "64x64",
        "--out",
        p(&x),
    ]));
    let out = ok(&mdts(&[
        "compress",
        "--in",
        p(&x),
        "--out",
        p(&z),
        "--codec",
        "lz78-hilbert",
    ]));
    assert_eq!(value(&out, "mode"), "LZ78-HILBERT");
    let total: u64 = value(&out, "total_bits").parse().unwrap();
    assert_eq!(std::fs::metadata(&z).unwrap().len() * 8, total);
    ok(&mdts(&["decompress", "--in", p(&z), "--out", p(&y)]));
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    assert_eq!(mdts(&["estimate", "--bogus"]).status.code(), Some(2));
    assert_eq!(mdts(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        mdts(&["gen", "--model", "gauss:1", "--dims", "4", "--out", "x"])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.join("bad.mda");
    std::fs::write(&bad, b"MDA1 not really").unwrap();
    let out = mdts(&["estimate", "--in", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert_eq!(
        mdts(&["decompress", "--in", p(&bad), "--out", p(&dir.join("o"))])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        mdts(&["estimate", "--in", p(&dir.join("missing.mda"))])
            .status
            .code(),
        Some(1)
    );
    assert!(mdts(&["--help"]).status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let x = dir.join("x.mda");
    let cfg = dir.join("gen.cfg");
    std::fs::write(
        &cfg,
        format!(
            "model = bernoulli:0.5\ndims = 32x32\nseed = 1\nout = {}\n",
            p(&x)
        ),
    )
    .unwrap();
    ok(&mdts(&["gen", "--config", p(&cfg)]));
    let a = std::fs::read(&x).unwrap();
    ok(&mdts(&["gen", "--config", p(&cfg), "--seed", "2"]));
    let b = std::fs::read(&x).unwrap();
    assert_ne!(a, b);
    ok(&mdts(&["gen", "--config", p(&cfg), "--seed=1"]));
    assert_eq!(std::fs::read(&x).unwrap(), a);

    let est = dir.join("est.cfg");
    std::fs::write(&est, format!("in = {}\nk = 2\n", p(&x))).unwrap();
    assert_eq!(
        value(&ok(&mdts(&["estimate", "--config", p(&est)])), "k_used"),
        "2"
    );
    assert_eq!(
        value(
            &ok(&mdts(&["estimate", "--config", p(&est), "--k", "3"])),
            "k_used"
        ),
        "3"
    );
    std::fs::write(
        &est,
        format!("in = {}\nno_guard = true\nwhatever = 1\n", p(&x)),
    )
    .unwrap();
    assert_eq!(
        mdts(&["estimate", "--config", p(&est)]).status.code(),
        Some(2)
    );
}

#[test]
fn typical_packing_and_coverage() {
    let dir = scratch("typical");
    let x = dir.join("x.mda");
    let lib = dir.join("lib.txt");
    ok(&mdts(&[
        "gen",
        "--model",
        "bernoulli:0.1",
        "--dims",
        "64x64",
        "--seed",
        "9",
        "--out",
        p(&x),
    ]));
    let out = ok(&mdts(&[
        "typical",
        "--in",
        p(&x),
        "--h0",
        "0.6",
        "--k",
        "3",
    ]));
    assert_eq!(value(&out, "member"), "true");
    assert_eq!(value(&out, "k_used"), "3");
    let out = ok(&mdts(&[
        "typical",
        "--in",
        p(&x),
        "--h0",
        "0.2",
        "--k",
        "3",
    ]));
    assert_eq!(value(&out, "member"), "false");

    // entropy-typical 2x2 blocks of Bernoulli(0.1) at delta 0.5: at most one symbol 1
    let out = ok(&mdts(&[
        "packing",
        "--in",
        p(&x),
        "--typical-of",
        "bernoulli:0.1",
        "--m",
        "2",
        "--delta",
        "0.5",
        "--save-library",
        p(&lib),
    ]));
    for key in [
        "best_shift",
        "lambda",
        "shifted_fraction",
        "overlap_fraction",
        "delta_used",
    ] {
        value(&out, key);
    }
    let text = std::fs::read_to_string(&lib).unwrap();
    assert_eq!(text.lines().next(), Some("# blockset d=2 m=2 alphabet=2"));
    assert_eq!(text.lines().count(), 1 + 5);

    let out = ok(&mdts(&["coverage", "--in", p(&x), "--library", p(&lib)]));
    let c: f64 = value(&out, "coverage").parse().unwrap();
    // P(at most one 1 among 4) = 0.9^4 + 4 · 0.1 · 0.9^3
    assert!((c - 0.9477).abs() < 0.03, "{c}");
    assert_eq!(value(&out, "library_log2_size"), "2.321928");

    let out = ok(&mdts(&[
        "typical",
        "--in",
        p(&x),
        "--set",
        "sampling",
        "--library",
        p(&lib),
        "--delta",
        "0.9",
    ]));
    assert_eq!(value(&out, "member"), "true");
    assert_eq!(mdts(&["coverage", "--in", p(&x)]).status.code(), Some(2));
    assert_eq!(
        mdts(&[
            "coverage",
            "--in",
            p(&x),
            "--library",
            p(&lib),
            "--random-size",
            "3",
            "--m",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
}

const HEADER: &str = "cell,model,n,d,k,delta,alpha,h0,seed,replicate,metric,value,wall_ms";

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        HEADER
    );
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn experiment_is_deterministic() {
    let dir = scratch("experiment");
    let spec = dir.join("sweep.cfg");
    std::fs::write(
        &spec,
        "models = bernoulli:0.1 | markov:0.9,0.1/0.1,0.9:1\ndims = 32x32, 16x64\nk = auto, 2\n\
         h0 = 0.6\nreplicates = 2\nmetrics = estimate, universal_member, coverage, block_rate\n",
    )
    .unwrap();
    let a = ok(&mdts(&["experiment", "--spec", p(&spec), "--seed", "7"]));
    let b = ok(&mdts(&["experiment", "--spec", p(&spec), "--seed", "7"]));
    assert_eq!(a, b);
    let single = Command::new(env!("CARGO_BIN_EXE_mdts"))
        .args(["experiment", "--spec", p(&spec), "--seed", "7"])
        .env("MDTS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(ok(&single), a);
    let out = dir.join("rows.csv");
    ok(&mdts(&[
        "experiment",
        "--spec",
        p(&spec),
        "--seed",
        "7",
        "--out",
        p(&out),
    ]));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a);
    let c = ok(&mdts(&["experiment", "--spec", p(&spec), "--seed", "8"]));
    assert_ne!(a, c);

    let rows = parse_csv(&a);
    assert_eq!(rows.len(), 2 * 2 * 2 * 4 * 2);
    assert!(rows.iter().all(|r| r.len() == 13 && r[12] == "0"));
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows.last().unwrap()[0], "31");
    assert!(rows.iter().any(|r| r[2] == "16x64"));
}

#[test]
fn one_cell_three_replicates() {
    let out = ok(&mdts(&[
        "experiment",
        "--replicates",
        "3",
        "--dims",
        "16x16",
    ]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(HEADER));
    assert_eq!(lines.count(), 3);
    assert_eq!(
        mdts(&["experiment", "--metrics", ""]).status.code(),
        Some(2)
    );
    assert_eq!(
        mdts(&["experiment", "--replicates", "0"]).status.code(),
        Some(2)
    );
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn estimates_approach_the_rate_as_n_grows() {
    let out = ok(&mdts(&[
        "experiment",
        "--models",
        "bernoulli:0.1",
        "--dims",
        "64x64,128x128,256x256,512x512",
        "--replicates",
        "9",
        "--metrics",
        "estimate",
        "--seed",
        "11",
    ]));
    let rows = parse_csv(&out);
    let medians: Vec<f64> = ["64", "128", "256", "512"]
        .iter()
        .map(|n| {
            median(
                rows.iter()
                    .filter(|r| r[2] == *n)
                    .map(|r| r[11].parse().unwrap())
                    .collect(),
            )
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[0] < w[1]), "{medians:?}");
    assert!((medians[3] - 0.468996).abs() < 0.005, "{medians:?}");
}

#[test]
fn universal_membership_frequencies() {
    let out = ok(&mdts(&[
        "experiment",
        "--models",
        "bernoulli:0.1|bernoulli:0.5",
        "--dims",
        "256x256",
        "--k",
        "3",
        "--h0",
        "0.6",
        "--replicates",
        "100",
        "--metrics",
        "universal_member",
        "--seed",
        "2024",
    ]));
    let rows = parse_csv(&out);
    let freq = |model: &str| {
        let v: Vec<_> = rows.iter().filter(|r| r[1] == model).collect();
        assert_eq!(v.len(), 100);
        v.iter().filter(|r| r[11] == "1").count() as f64 / 100.0
    };
    assert!(freq("bernoulli:0.1") >= 0.95);
    assert!(freq("bernoulli:0.5") <= 0.05);
}
