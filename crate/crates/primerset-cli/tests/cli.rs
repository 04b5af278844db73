use std::path::Path;
use std::process::{Command, Output};

fn primerset(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primerset"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = primerset(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = primerset(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_solve_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "-n", "6", "-L", "60", "-k", "5", "--seed", "3", "-o", "x.mpssl"]);
    ok(d, &["solve", "x.mpssl", "--algo", "gpot", "-o", "r.json", "--csv", "r.csv"]);

    let report = read_json(&d.join("r.json"));
    let count = report["count"].as_u64().unwrap();
    assert!(count >= 1 && count <= 12, "count {count}");
    assert_eq!(report["witnesses"].as_array().unwrap().len(), 6);
    assert_eq!(report["algorithm"], "gpot");
    assert_eq!(report["parameters"]["n"], 6);

    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(csv.starts_with("record,algorithm,target_id"));
    assert_eq!(csv.lines().count(), 8); // header, 6 witnesses, summary

    let out = ok(d, &["verify", "r.json", "x.mpssl"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));
}

#[test]
fn solve_is_deterministic_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "-n", "5", "-L", "50", "-k", "4", "--seed", "11", "-o", "x.mpssl"]);
    ok(d, &["solve", "x.mpssl", "--algo", "gfix", "-o", "a.json"]);
    ok(d, &["solve", "x.mpssl", "--algo", "gfix", "-o", "b.json"]);
    let mut a = read_json(&d.join("a.json"));
    let mut b = read_json(&d.join("b.json"));
    assert!(a["seconds"].is_number());
    a["seconds"] = 0.into();
    b["seconds"] = 0.into();
    assert_eq!(a, b);
}

#[test]
fn brute_matches_greedy_scale() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "-n", "2", "-L", "20", "-k", "3", "--seed", "9", "-o", "x.mpssl"]);
    ok(d, &["solve", "x.mpssl", "--algo", "gpot", "-o", "g.json"]);
    ok(d, &["solve", "x.mpssl", "--algo", "brute", "-o", "b.json"]);
    let greedy = read_json(&d.join("g.json"))["count"].as_u64().unwrap();
    let brute = read_json(&d.join("b.json"))["count"].as_u64().unwrap();
    assert!(brute <= greedy, "brute {brute} > greedy {greedy}");
    let out = ok(d, &["verify", "b.json", "x.mpssl"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));
}

#[test]
fn candidate_file_restricts_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "-n", "3", "-L", "30", "-k", "4", "--seed", "2", "-o", "x.mpssl"]);
    ok(d, &["solve", "x.mpssl", "--algo", "gpot", "-o", "full.json"]);
    let full = read_json(&d.join("full.json"));
    let mut pool = String::from("# selected pool\n");
    for p in full["primers"].as_array().unwrap() {
        pool.push_str(p.as_str().unwrap());
        pool.push('\n');
    }
    std::fs::write(d.join("pool.txt"), pool).unwrap();
    ok(d, &["solve", "x.mpssl", "--algo", "gpot", "--candidates", "pool.txt", "-o", "r.json"]);
    let narrowed = read_json(&d.join("r.json"));
    assert!(narrowed["count"].as_u64().unwrap() <= full["count"].as_u64().unwrap());

    std::fs::write(d.join("bad.txt"), "acgtacgt\n").unwrap();
    let err = fails(d, &["solve", "x.mpssl", "--algo", "gpot", "--candidates", "bad.txt"]);
    assert!(err.contains("length"), "{err}");
}

#[test]
fn extract_cuts_flanks_from_a_genome() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut genome = String::from(">contig\n");
    let bases = ['a', 'c', 'g', 't'];
    for i in 0..400 {
        genome.push(bases[(i * 7 + i / 13) % 4]);
        if i % 60 == 59 {
            genome.push('\n');
        }
    }
    genome.push('\n');
    std::fs::write(d.join("g.fa"), genome).unwrap();
    std::fs::write(d.join("loci.txt"), "120\n250\t3\n").unwrap();
    ok(
        d,
        &["extract", "--genome", "g.fa", "--loci", "loci.txt", "-L", "50", "-k", "5", "-o", "e.mpssl"],
    );
    let text = std::fs::read_to_string(d.join("e.mpssl")).unwrap();
    assert!(text.starts_with("MPSSL 1 n=2 L=50 k=5"));
    assert!(text.lines().nth(2).unwrap().ends_with("\t3"));

    let err = fails(
        d,
        &["extract", "--genome", "g.fa", "--loci", "loci.txt", "-L", "500", "-k", "5", "-o", "no.mpssl"],
    );
    assert!(err.contains("locus"), "{err}");
    assert!(!d.join("no.mpssl").exists());
}

#[test]
fn mcs_runs_on_instances_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "-n", "3", "-L", "16", "-k", "3", "--seed", "1", "-o", "x.mpssl"]);
    ok(
        d,
        &["mcs", "x.mpssl", "--seed", "4", "-o", "m.json", "--graph-out", "g.mcsg"],
    );
    let report = read_json(&d.join("m.json"));
    assert_eq!(report["algorithm"], "mcs-round");
    assert_eq!(report["n_classes"], 3);
    assert!(report["lp_objective"].as_f64().unwrap() >= 1.0);
    assert_eq!(
        report["count"].as_u64().unwrap() as usize,
        report["vertices"].as_array().unwrap().len()
    );
    let out = ok(d, &["verify", "m.json", "x.mpssl"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok:"));

    ok(d, &["mcs", "g.mcsg", "--algo", "trivial", "-o", "t.json"]);
    let trivial = read_json(&d.join("t.json"));
    assert!(trivial.get("lp_objective").is_none());
    assert!(trivial.get("instance_sha256").is_none());
    ok(d, &["verify", "t.json", "g.mcsg"]);
    let with_primers = ok(d, &["verify", "m.json", "g.mcsg"]);
    assert!(String::from_utf8_lossy(&with_primers.stdout).starts_with("ok:"));
}

#[test]
fn gap_reports_certificate_and_relaxation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gap", "-n", "8", "-s", "2", "--seed", "1", "-o", "gap.json", "--graph-out", "gap.mcsg"]);
    let report = read_json(&d.join("gap.json"));
    assert_eq!(report["certificate_objective"], 4.0);
    assert!(report["lp_objective"].as_f64().unwrap() <= 4.0 + 1e-6);
    assert_eq!(report["n_classes"], 8);
    let rounded = report["rounded"]["vertices"].as_array().unwrap();
    assert!(!rounded.is_empty());
    let dump = std::fs::read_to_string(d.join("gap.mcsg")).unwrap();
    assert!(dump.starts_with("MCSG 1 n=8"));
}

#[test]
fn bench_emits_predictable_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "bench", "--algos", "gpot,mcs-trivial", "-n", "3,4", "-k", "3", "-L", "20",
            "--seed", "1", "--reps", "2", "-o", "b.csv", "--report-dir", "reports",
        ],
    );
    let csv = std::fs::read_to_string(d.join("b.csv")).unwrap();
    // header + 2*1*2*2 runs + 2*1*2 means
    assert_eq!(csv.lines().count(), 1 + 8 + 4);
    assert!(d.join("reports/gpot_n3_k3_s1.json").exists());
    let report = read_json(&d.join("reports/mcs-trivial_n4_k3_s2.json"));
    assert_eq!(report["algorithm"], "mcs-trivial");
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let err = fails(d, &["solve", "missing.mpssl", "--algo", "gpot"]);
    assert!(err.contains("missing.mpssl"), "{err}");

    ok(d, &["gen", "-n", "2", "-L", "20", "-k", "3", "--seed", "0", "-o", "x.mpssl"]);
    let err = fails(d, &["solve", "x.mpssl", "--algo", "fancy"]);
    assert!(err.contains("fancy"), "{err}");

    let out = primerset(d, &["solve", "x.mpssl", "--frobnicate"]);
    assert!(!out.status.success());

    std::fs::write(d.join("trunc.mpssl"), "MPSSL 1 n=3 L=20 k=3 delta=1\n").unwrap();
    let err = fails(d, &["solve", "trunc.mpssl", "--algo", "gpot"]);
    assert!(err.contains("expected 3 records"), "{err}");

    // a tampered report must fail verification
    ok(d, &["solve", "x.mpssl", "--algo", "gpot", "-o", "r.json"]);
    let mut report = read_json(&d.join("r.json"));
    report["primers"] = serde_json::json!(["aaa"]);
    report["count"] = 1.into();
    std::fs::write(d.join("bad.json"), report.to_string()).unwrap();
    let err = fails(d, &["verify", "bad.json", "x.mpssl"]);
    assert!(err.contains("not covered") || err.contains("witnesses"), "{err}");
}
