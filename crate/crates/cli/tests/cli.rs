use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_degenpop"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = "[problem]\nnx = 17\nnt = 16\n";

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve"], Some("[solve]\nschem = \"crank_nicolson\"\n"), &dir.path().join("a"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
}

#[test]
fn strict_hypotheses_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[problem]\nnx = 17\nnt = 16\ncoefficient = { kind = \"boundary0\", alpha = 2.0 }\n";
    let o = run(&["solve", "--strict-hypotheses"], Some(cfg), &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve"], Some(cfg), &dir.path().join("l"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn solve_writes_slab_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let o = run(&["solve"], Some(&format!("{SMALL}[solve]\ncsv = true\n")), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let header = json(&out.join("state.json"));
    assert_eq!(header["shape"], serde_json::json!([17, 33, 17]));
    assert_eq!(fs::metadata(out.join("state.f64")).unwrap().len(), 8 * 17 * 33 * 17);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["problem"]["nx"], 17);
    assert_eq!(manifest["timing"], "timing.json");
    assert!(json(&out.join("timing.json"))["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn control_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run(&["control"], Some("[problem]\nnx = 33\nnt = 32\n[control]\ntwo_phase = true\n"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("control.json"));
    assert!(s["relative_residual"].as_f64().unwrap() < 1e-3);
    assert!(s["converged"].as_bool().unwrap());
    assert!(s["phase1"]["handover_norm"].as_f64().unwrap() < s["phase1"]["initial_norm"].as_f64().unwrap());
}

#[test]
fn stalled_cg_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["control"], Some(&format!("{SMALL}[control]\ncg_max_iters = 1\n")), &dir.path().join("c"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_hardy_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = run(&["verify", "hardy"], Some(SMALL), &out);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&out.join("reports/hardy.json"));
    assert!(r["effective_constant"].as_f64().unwrap() <= 4.2);
    assert!(out.join("reports/hardy.csv").exists());
}

#[test]
fn unknown_family_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "poincare"], Some(SMALL), &dir.path().join("v"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_covers_grid_product() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let cfg = "[sweep]\ngrids = [[17, 16], [33, 32]]\ns = [1.0, 4.0]\nfamilies = [\"duality\"]\nepsilon = [1e-6]\n";
    let o = run(&["sweep", "--jobs", "2"], Some(cfg), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count(), 1 + 2 * 3);
}

fn files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.json" {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn selftest_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = run(&["selftest", "--jobs", "2"], None, &a);
    let ob = run(&["selftest"], None, &b);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stdout));
    assert_eq!(ob.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&oa.stdout).lines().count(), 10);
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.iter().any(|(n, _)| n == "acceptance.json"));
    assert_eq!(fa, fb);
}

#[test]
fn shipped_configs_parse() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["reference", "interior"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"));
        let cfg = fs::read_to_string(path).unwrap();
        // a coarse lattice keeps this quick; only parsing and setup matter here
        let cfg = cfg.replace("nx = 65", "nx = 17").replace("nt = 64", "nt = 16");
        let o = run(&["solve"], Some(&cfg), &dir.path().join(name));
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
