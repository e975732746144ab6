//! End-to-end checks of the `pmots` binary: exit codes, export files,
//! reproducibility and the tensor cache.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pmots() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pmots"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing {name} in {}: {e}", dir.display()))
}

fn run_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn toy_run_writes_the_full_front_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = pmots()
        .args(["run".as_ref(), scenario_path("toy-small.toml").as_os_str()])
        .arg("--output-dir")
        .arg(&out)
        .output()
        .unwrap();
    run_ok(&output);

    let front = read(&out, "front.csv");
    assert_eq!(front.lines().count(), 17); // header + 16 rows
    assert!(front.starts_with("id,f1,f2,encoding\n"));
    let trace = read(&out, "trace.jsonl");
    assert_eq!(trace.lines().count(), 50);
    let manifest = read(&out, "manifest.json");
    assert!(manifest.contains("scenario_sha256"));
    assert!(manifest.contains("\"seed\": 2024"));
    let json = read(&out, "front.json");
    assert!(json.trim_start().starts_with('['));
}

#[test]
fn reruns_are_byte_identical_and_seed_override_changes_them() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for out in [&a, &b] {
        let output = pmots()
            .args(["run".as_ref(), scenario_path("wsn-small.toml").as_os_str()])
            .arg("--output-dir")
            .arg(out)
            .output()
            .unwrap();
        run_ok(&output);
    }
    assert_eq!(read(&a, "front.csv"), read(&b, "front.csv"));
    assert_eq!(read(&a, "front.json"), read(&b, "front.json"));
    assert_eq!(read(&a, "trace.jsonl"), read(&b, "trace.jsonl"));
    // Manifests agree except for wall-clock timings.
    let strip_timings = |text: String| -> String {
        text.lines()
            .filter(|l| {
                let key = l.trim_start();
                !(key.starts_with("\"search\"")
                    || key.starts_with("\"total\"")
                    || key.starts_with("\"tensor\""))
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip_timings(read(&a, "manifest.json")),
        strip_timings(read(&b, "manifest.json"))
    );

    let output = pmots()
        .args(["run".as_ref(), scenario_path("wsn-small.toml").as_os_str()])
        .args(["--seed", "777"])
        .arg("--output-dir")
        .arg(&c)
        .output()
        .unwrap();
    run_ok(&output);
    assert!(read(&c, "manifest.json").contains("\"seed\": 777"));
    // Same scenario file, same hash, different seed recorded.
    let hash = |text: &str| {
        text.lines()
            .find(|l| l.contains("scenario_sha256"))
            .unwrap()
            .to_string()
    };
    assert_eq!(
        hash(&read(&a, "manifest.json")),
        hash(&read(&c, "manifest.json"))
    );
}

#[test]
fn manifest_hash_tracks_scenario_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let original = std::fs::read_to_string(scenario_path("toy-small.toml")).unwrap();
    let copy_a = dir.path().join("same.toml");
    let copy_b = dir.path().join("tweaked.toml");
    std::fs::write(&copy_a, &original).unwrap();
    std::fs::write(&copy_b, format!("{original}# tweak\n")).unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (scenario, out) in [(&copy_a, &out_a), (&copy_b, &out_b)] {
        let output = pmots()
            .arg("run")
            .arg(scenario)
            .arg("--output-dir")
            .arg(out)
            .output()
            .unwrap();
        run_ok(&output);
    }
    let hash = |dir: &Path| {
        read(dir, "manifest.json")
            .lines()
            .find(|l| l.contains("scenario_sha256"))
            .unwrap()
            .to_string()
    };
    assert_ne!(hash(&out_a), hash(&out_b));
    // Identical bytes give the identical hash: compare against the original.
    let out_c = dir.path().join("c");
    let output = pmots()
        .args(["run".as_ref(), scenario_path("toy-small.toml").as_os_str()])
        .arg("--output-dir")
        .arg(&out_c)
        .output()
        .unwrap();
    run_ok(&output);
    assert_eq!(hash(&out_a), hash(&out_c));
}

#[test]
fn invalid_scenarios_exit_2_with_field_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(scenario_path("toy-small.toml"))
        .unwrap()
        .replace("tenure_min = 2", "tenure_min = 9");
    std::fs::write(&bad, text).unwrap();
    let output = pmots().arg("run").arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("pmots.tenure_min"), "{stderr}");

    let unknown = dir.path().join("unknown.toml");
    let text =
        std::fs::read_to_string(scenario_path("toy-small.toml")).unwrap() + "\nmystery = true\n";
    std::fs::write(&unknown, text).unwrap();
    let output = pmots().arg("run").arg(&unknown).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    let output = pmots().arg("run").arg(&missing).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn oracle_writes_exact_front_and_respects_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = pmots()
        .args([
            "oracle".as_ref(),
            scenario_path("toy-small.toml").as_os_str(),
        ])
        .arg("--output-dir")
        .arg(&out)
        .output()
        .unwrap();
    run_ok(&output);
    assert_eq!(read(&out, "front.csv").lines().count(), 17);

    // A tiny cap refuses with exit 4 and reports the count.
    let output = pmots()
        .args([
            "oracle".as_ref(),
            scenario_path("wsn-small.toml").as_os_str(),
        ])
        .args(["--cap", "10"])
        .arg("--output-dir")
        .arg(dir.path().join("capped"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("256"), "{stderr}"); // 2^8 eligible patterns
}

#[test]
fn oracle_empty_space_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    let text = std::fs::read_to_string(scenario_path("toy-small.toml"))
        .unwrap()
        .replace("size = 16", "size = 0");
    std::fs::write(&empty, text).unwrap();
    let output = pmots().arg("oracle").arg(&empty).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn select_subsets_and_passes_rows_through() {
    let dir = tempfile::tempdir().unwrap();
    // Synthetic 148-row front.
    let mut csv = String::from("id,f1,f2,encoding\n");
    for i in 0..148 {
        csv.push_str(&format!(
            "{i},{},{},x{i}\n",
            i as f64 * 0.5,
            (147 - i) as f64 * 0.25
        ));
    }
    let front = dir.path().join("front.csv");
    std::fs::write(&front, &csv).unwrap();

    let out = dir.path().join("out");
    let output = pmots()
        .arg("select")
        .arg(&front)
        .args(["--count", "15"])
        .arg("--output-dir")
        .arg(&out)
        .output()
        .unwrap();
    run_ok(&output);
    let selected = read(&out, "selected.csv");
    assert_eq!(selected.lines().count(), 16); // header + 15
    for line in selected.lines().skip(1) {
        assert!(
            csv.contains(&format!("{line}\n")),
            "row not verbatim: {line}"
        );
    }

    // Fewer rows than requested: the whole front comes back.
    let small = dir.path().join("small.csv");
    let head: String = csv.lines().take(11).map(|l| format!("{l}\n")).collect();
    std::fs::write(&small, head).unwrap();
    let out2 = dir.path().join("out2");
    let output = pmots()
        .arg("select")
        .arg(&small)
        .args(["--count", "15"])
        .arg("--output-dir")
        .arg(&out2)
        .output()
        .unwrap();
    run_ok(&output);
    assert_eq!(read(&out2, "selected.csv").lines().count(), 11);

    // Malformed input exits 2.
    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "not,a,front\n1,2\n").unwrap();
    let output = pmots()
        .arg("select")
        .arg(&garbage)
        .args(["--count", "3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn select_reads_json_exports_too() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let output = pmots()
        .args(["run".as_ref(), scenario_path("toy-small.toml").as_os_str()])
        .arg("--output-dir")
        .arg(&out)
        .output()
        .unwrap();
    run_ok(&output);
    let sel = dir.path().join("sel");
    let output = pmots()
        .arg("select")
        .arg(out.join("front.json"))
        .args(["--count", "4"])
        .arg("--output-dir")
        .arg(&sel)
        .output()
        .unwrap();
    run_ok(&output);
    assert_eq!(read(&sel, "selected.csv").lines().count(), 5);
}

#[test]
fn validate_wsn_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let output = pmots()
        .args([
            "validate-wsn".as_ref(),
            scenario_path("wsn-small.toml").as_os_str(),
        ])
        .args(["--trials", "20000", "--random-solutions", "2"])
        .arg("--output-dir")
        .arg(dir.path().join("val"))
        .output()
        .unwrap();
    run_ok(&output);
    let table = read(&dir.path().join("val"), "validation.csv");
    assert!(table.starts_with("solution,criterion,dp,estimate,std_error,z\n"));
    assert!(table.lines().count() >= 10); // header + 3 solutions x 3 criteria

    // Zero trials are invalid.
    let output = pmots()
        .args([
            "validate-wsn".as_ref(),
            scenario_path("wsn-small.toml").as_os_str(),
        ])
        .args(["--trials", "0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Non-wsn scenarios are rejected.
    let output = pmots()
        .args([
            "validate-wsn".as_ref(),
            scenario_path("toy-small.toml").as_os_str(),
        ])
        .args(["--trials", "100"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn wlp_run_uses_the_tensor_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for _ in 0..2 {
        let output = pmots()
            .args(["run".as_ref(), scenario_path("wlp-small.toml").as_os_str()])
            .arg("--output-dir")
            .arg(&out)
            .output()
            .unwrap();
        run_ok(&output);
    }
    let cache: Vec<_> = std::fs::read_dir(out.join("cache"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(cache.len(), 1, "one tensor cached, got {cache:?}");
    assert!(cache[0].starts_with("tensor-") && cache[0].ends_with(".json"));
}

#[test]
fn stalled_paths_warn_but_exit_zero() {
    // Two nodes, no eligible forwarders: the single path has an empty
    // neighborhood at every iteration.
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("stall.toml");
    std::fs::write(
        &scenario,
        r#"
kind = "wsn"
seed = 1
threads = 1

[pmots]
paths = 1
iterations = 5
rank_max = 1
tenure_min = 1
tenure_max = 1

[wsn]
radius = 100.0
sources = [0]
destinations = [1]
probability_levels = [0.0, 1.0]
initial_forwarders = 0
max_hops = 2

[[wsn.nodes]]
position = [0.0, 0.0]
tx_power_w = 0.05
tx_energy_j = 1.0

[[wsn.nodes]]
position = [5.0, 0.0]
tx_power_w = 0.05
tx_energy_j = 1.0

[wsn.link]
path_loss_exponent = 2.5
gamma = 0.0625
noise_w = 4.0e-5
beta = 2.0
"#,
    )
    .unwrap();
    let output = pmots()
        .arg("run")
        .arg(&scenario)
        .arg("--output-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("stalled"), "{stderr}");
}

#[test]
fn output_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from-env");
    let output = pmots()
        .args(["run".as_ref(), scenario_path("toy-small.toml").as_os_str()])
        .env("PMOTS_OUTPUT_DIR", &out)
        .output()
        .unwrap();
    run_ok(&output);
    assert!(out.join("front.csv").is_file());
}
