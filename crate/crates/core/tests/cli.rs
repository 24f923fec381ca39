use std::path::Path;
use std::process::{Command, Output};

fn pcbrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcbrs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pcb_sample_at_quarter_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.bin");
    let o = pcbrs(&[
        "sample",
        "--synth",
        "n=100000",
        "--method",
        "pcb-rs",
        "--ratio",
        "0.25",
        "--grid",
        "64x64x16",
        "--seed",
        "7",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::metadata(&out).unwrap().len(), 25_000 * 16);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(side["method"], "pcb-rs");
    assert_eq!(side["seed"], 7);
    assert_eq!(side["m"], 25_000);
    assert_eq!(side["n_input"], 100_000);
    assert_eq!(side["grid"]["n_radial"], 64);
}

#[test]
fn rs_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = pcbrs(&[
            "sample",
            "--synth",
            "n=20000,seed=2",
            "--method",
            "rs",
            "--m",
            "3000",
            "--seed",
            "11",
            "--out",
            path_str(&out),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(out).unwrap()
    };
    let a = run("a.bin");
    assert_eq!(a.len(), 3000 * 16);
    assert_eq!(a, run("b.bin"));
}

#[test]
fn recorded_seed_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.bin");
    assert_eq!(
        code(&pcbrs(&[
            "sample",
            "--synth",
            "n=5000",
            "--method",
            "pcb-rs",
            "--m",
            "500",
            "--out",
            path_str(&first)
        ])),
        0
    );
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("first.json")).unwrap()).unwrap();
    assert_eq!(side["seed_source"], "random");
    let seed = side["seed"].as_u64().unwrap().to_string();
    let again = dir.path().join("again.bin");
    let o = pcbrs(&[
        "sample",
        "--synth",
        "n=5000",
        "--method",
        "pcb-rs",
        "--m",
        "500",
        "--seed",
        &seed,
        "--out",
        path_str(&again),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn labels_follow_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.bin");
    let labels = dir.path().join("scan.label");
    let pts: Vec<u8> = (0..50)
        .flat_map(|i| [i as f32 + 1.0, 0.5, 0.0, 0.1 * i as f32])
        .flat_map(f32::to_le_bytes)
        .collect();
    std::fs::write(&scan, &pts).unwrap();
    // upper half carries an instance id that must survive untouched
    let lab: Vec<u8> = (0..50u32).flat_map(|i| ((7 << 16) | i).to_le_bytes()).collect();
    std::fs::write(&labels, &lab).unwrap();
    let out = dir.path().join("out.bin");
    let o = pcbrs(&[
        "sample",
        "--in",
        path_str(&scan),
        "--labels",
        path_str(&labels),
        "--method",
        "rs",
        "--m",
        "10",
        "--seed",
        "3",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let bin = std::fs::read(&out).unwrap();
    let lab_out = std::fs::read(dir.path().join("out.label")).unwrap();
    assert_eq!(lab_out.len(), 10 * 4);
    for (rec, l) in bin.chunks(16).zip(lab_out.chunks(4)) {
        let x = f32::from_le_bytes(rec[..4].try_into().unwrap());
        let raw = u32::from_le_bytes(l.try_into().unwrap());
        assert_eq!(raw, (7 << 16) | (x as u32 - 1));
    }
}

#[test]
fn fps_beyond_cloud_size_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.bin");
    let o = pcbrs(&[
        "sample",
        "--synth",
        "n=100",
        "--method",
        "fps",
        "--m",
        "101",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert!(!dir.path().join("f.json").exists());
}

#[test]
fn usage_errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.bin");
    let cases: [&[&str]; 4] = [
        &["sample", "--synth", "n=100", "--method", "rs", "--out", path_str(&out)],
        &[
            "sample",
            "--synth",
            "n=100",
            "--method",
            "rs",
            "--ratio",
            "1.5",
            "--out",
            path_str(&out),
        ],
        &[
            "sample",
            "--synth",
            "n=100",
            "--method",
            "nearest",
            "--m",
            "5",
            "--out",
            path_str(&out),
        ],
        &[
            "sample",
            "--synth",
            "n=100",
            "--method",
            "pcb-rs",
            "--m",
            "5",
            "--grid",
            "64x0x16",
            "--out",
            path_str(&out),
        ],
    ];
    for args in cases {
        assert_eq!(code(&pcbrs(args)), 1, "{args:?}");
        assert!(!out.exists(), "{args:?} left output behind");
    }
    assert_eq!(code(&pcbrs(&["frobnicate"])), 1);
    assert_eq!(code(&pcbrs(&["--help"])), 0);
}

#[test]
fn missing_input_is_a_data_error() {
    let o = pcbrs(&["stats", "--in", "/nonexistent/scan.bin"]);
    assert_eq!(code(&o), 2);
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn stats_histograms() {
    let o = pcbrs(&["stats", "--synth", "n=10000,seed=4"]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    assert_eq!(csv.lines().next().unwrap(), "band_lo_m,band_hi_m,count,fraction");
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[5][1], "inf");
    assert_eq!(rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum::<u64>(), 10_000);

    let custom = csv_rows(&stdout(&pcbrs(&[
        "stats",
        "--synth",
        "n=10000,seed=4",
        "--edges",
        "0,5,10",
    ])));
    assert_eq!(custom.len(), 3);

    let json: serde_json::Value = serde_json::from_str(&stdout(&pcbrs(&[
        "stats",
        "--synth",
        "n=10000,seed=4",
        "--format",
        "json",
    ])))
    .unwrap();
    let json = json.as_array().unwrap();
    assert_eq!(json.len(), rows.len());
    for (j, r) in json.iter().zip(&rows) {
        assert_eq!(j["band_lo_m"].as_f64().unwrap(), r[0].parse::<f64>().unwrap());
        assert_eq!(j["count"].as_u64().unwrap(), r[2].parse::<u64>().unwrap());
        assert_eq!(j["fraction"].as_f64().unwrap(), r[3].parse::<f64>().unwrap());
    }
    assert!(json[5]["band_hi_m"].is_null());

    assert_eq!(code(&pcbrs(&["stats", "--synth", "n=100", "--edges", "10,5"])), 1);
}

#[test]
fn stats_compare_reports_both_methods() {
    let o = pcbrs(&[
        "stats",
        "--synth",
        "n=20000,seed=5",
        "--compare",
        "--ratio",
        "0.0625",
        "--seeds",
        "4",
        "--seed",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m"], 1250);
    assert_eq!(v["rs"]["per_seed"].as_array().unwrap().len(), 4);
    assert!(v["pcb_rs"]["cv_bins"].as_f64().unwrap() < v["rs"]["cv_bins"].as_f64().unwrap());
}

#[test]
fn loss_check_passes_and_is_deterministic() {
    let o = pcbrs(&["loss-check"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let a = pcbrs(&["loss-check", "--trials", "1000", "--seed", "3", "--format", "json"]);
    let b = pcbrs(&["loss-check", "--trials", "1000", "--seed", "3", "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    // an impossible tolerance must be reported as a failed check
    assert_eq!(code(&pcbrs(&["loss-check", "--trials", "5", "--tol", "1e-30"])), 3);
}

#[test]
fn bench_table4_preset() {
    let o = pcbrs(&[
        "bench",
        "--preset",
        "table4",
        "--runs",
        "1",
        "--repeats",
        "1",
        "--seed",
        "0",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for label in [
        "(4096->1024)",
        "(4096->1024->256)",
        "(4096->1024->256->64)",
        "(4096->1024->256->64->16)",
    ] {
        assert!(text.contains(&format!("{label}x1,")), "missing {label} in\n{text}");
    }
    let o = pcbrs(&[
        "bench",
        "--sizes",
        "512,128",
        "--runs",
        "1",
        "--repeats",
        "2",
        "--methods",
        "rs,fps",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.to_string().contains("(512->128)x2"));
    assert_eq!(code(&pcbrs(&["bench", "--sizes", "128,512"])), 1);
}
