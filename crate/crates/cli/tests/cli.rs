use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SINAI_SMALL: &str = r#"
version = 1

[table]
class = "sinai_torus"
centers = [[0.5, 0.5]]
radii = [0.2]

[hole]
center_s = 0.3
radii = [0.05, 0.02]

[run]
n_orbits = 400
t_max = 3.0
seed = 11

[checks]
cones = true
kac = true
invariance = true
short_returns = true
quasi_section = true
cone_points = 2000
cone_vectors = 4
kac_samples = 5000
invariance_samples = 5000
short_return_hits = 200
quasi_section_samples = 500

[thresholds]
ks = 0.5
tv = 0.5
kac_defect = 0.05
cone_violations = 0
invariance_ks = 0.1
"#;

const STADIUM_SMALL: &str = r#"
version = 1

[table]
class = "stadium"
flat_length = 2.0

[hole]
center_s = 0.7
radii = [0.05]

[run]
n_orbits = 200
t_max = 2.0
seed = 3
"#;

fn billiards(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiards"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_summary_and_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "sinai.toml", SINAI_SMALL);
    let out = dir.path().join("out");
    let o = billiards(&["run", s(&cfg), "--out", s(&out), "--enforce"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let summary = read_json(&out.join("summary.json"));
    for key in ["ks", "tv", "kac_defect", "cone_violations"] {
        assert!(summary[key].is_number(), "{key} missing in {summary}");
    }
    assert_eq!(summary["kac_defect"], 0.0);
    assert_eq!(summary["radii"].as_array().unwrap().len(), 2);

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["run"]["seed"], 11);
    assert_eq!(manifest["config"]["table"]["class"], "sinai_torus");
    assert!(out.join("diagnostics.json").exists());
    assert!(out.join("tail.csv").exists());

    let r = out.join(summary["radii"][1]["dir"].as_str().unwrap());
    let header = |f: &str| fs::read_to_string(r.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("hits.csv"), "orbit,index,normalized_time");
    assert_eq!(header("survival.csv"), "t,empirical,exponential");
    assert_eq!(header("counts.csv"), "orbit,interval,count");
    assert_eq!(
        fs::read_to_string(out.join("tail.csv")).unwrap().lines().next(),
        Some("n,survival,count")
    );
}

#[test]
fn csvs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "stadium.toml", STADIUM_SMALL);
    let run = |threads: &str, out: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_billiards"))
            .args(["run", s(&cfg), "--out", s(out)])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run("1", &a);
    run("4", &b);
    for f in ["hits.csv", "survival.csv", "counts.csv"] {
        let fa = fs::read(a.join("r0_0.05").join(f)).unwrap();
        let fb = fs::read(b.join("r0_0.05").join(f)).unwrap();
        assert!(fa == fb, "{f} differs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "stadium.toml", STADIUM_SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(billiards(&["run", s(&cfg), "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(billiards(&["run", s(&cfg), "--out", s(&b), "--seed", "99"]).status.code(), Some(0));
    assert_eq!(read_json(&b.join("manifest.json"))["config"]["run"]["seed"], 99);
    let hits = |d: &Path| fs::read(d.join("r0_0.05/hits.csv")).unwrap();
    assert_ne!(hits(&a), hits(&b));
}

#[test]
fn enforce_turns_breaches_into_exit_3() {
    let dir = TempDir::new().unwrap();
    let strict = STADIUM_SMALL.to_string() + "\n[thresholds]\nks = 1e-9\n";
    let cfg = write_config(&dir, "strict.toml", &strict);
    let out = dir.path().join("out");
    let o = billiards(&["run", s(&cfg), "--out", s(&out), "--enforce"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ks"), "{}", stderr(&o));
    let o = billiards(&["run", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!read_json(&out.join("summary.json"))["breaches"].as_array().unwrap().is_empty());
}

#[test]
fn validate_accepts_a_clean_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "stadium.toml", STADIUM_SMALL);
    let out = dir.path().join("v");
    let o = billiards(&["validate", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_json(&out.join("validation.json"))["valid"], true);
}

#[test]
fn validate_reports_hole_on_a_junction() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &STADIUM_SMALL.replace("center_s = 0.7", "center_s = 1.98"));
    let out = dir.path().join("v");
    let o = billiards(&["validate", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("placement:"), "{}", stderr(&o));
    let report = read_json(&out.join("validation.json"));
    assert_eq!(report["issues"].as_array().unwrap().len(), 1);
}

#[test]
fn validate_reports_negative_radius_as_schema_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &STADIUM_SMALL.replace("radii = [0.05]", "radii = [-0.05]"));
    let o = billiards(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(stderr(&o).starts_with("schema:"));
}

/// Reference flower with its first petal cut to 3/4 of a half circle and
/// the following dispersing arc bent to radius 2, so the petal's circle
/// crosses that arc.
fn crossing_flower_toml() -> String {
    let polar = |c: (f64, f64), r: f64, a: f64| (c.0 + r * a.cos(), c.1 + r * a.sin());
    let focus = [(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)];
    let disp = [(3.0, 3.0), (-3.0, 3.0), (-3.0, -3.0), (3.0, -3.0)];
    let arc = |c: (f64, f64), r: f64, a0: f64, a1: f64, kind: &str| {
        format!(
            "[[table.components]]\nkind = \"arc\"\ncenter = [{}, {}]\nradius = {r}\nstart_angle = {a0}\nend_angle = {a1}\norientation = \"{kind}\"\n",
            c.0, c.1
        )
    };
    let mut out = String::new();
    for k in 0..4 {
        let a0 = -PI / 2.0 + k as f64 * PI / 2.0;
        let to = polar(focus[(k + 1) % 4], 1.0, a0 + PI / 2.0);
        if k == 0 {
            let tip = polar(focus[0], 1.0, PI / 4.0);
            out += &arc(focus[0], 1.0, a0, PI / 4.0, "focusing");
            let mid = ((tip.0 + to.0) / 2.0, (tip.1 + to.1) / 2.0);
            let (dx, dy) = (to.0 - tip.0, to.1 - tip.1);
            let len = dx.hypot(dy);
            let mut n = (-dy / len, dx / len);
            if n.0 * mid.0 + n.1 * mid.1 < 0.0 {
                n = (-n.0, -n.1);
            }
            let h = (4.0 - len * len / 4.0).sqrt();
            let c = (mid.0 + n.0 * h, mid.1 + n.1 * h);
            let ang = |p: (f64, f64)| (p.1 - c.1).atan2(p.0 - c.0);
            out += &arc(c, 2.0, ang(tip), ang(to), "dispersing");
        } else {
            let from = polar(focus[k], 1.0, a0 + PI);
            out += &arc(focus[k], 1.0, a0, a0 + PI, "focusing");
            let c = disp[k];
            let ang = |p: (f64, f64)| (p.1 - c.1).atan2(p.0 - c.0);
            out += &arc(c, 5f64.sqrt(), ang(from), ang(to), "dispersing");
        }
    }
    out
}

#[test]
fn validate_rejects_flower_breaking_the_focusing_condition() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "version = 1\n\n[hole]\ncenter_s = 0.5\nradii = [0.05]\n\n[run]\nn_orbits = 10\nseed = 1\n\n[table]\nclass = \"flower\"\n{}",
        crossing_flower_toml()
    );
    let cfg = write_config(&dir, "flower.toml", &text);
    let o = billiards(&["validate", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("focusing condition violated"), "{}", stderr(&o));
}

#[test]
fn check_and_inducing_subcommands_write_reports() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "sinai.toml", SINAI_SMALL);
    let out = dir.path().join("out");
    for (args, file) in [
        (vec!["check", "cones"], "cones.json"),
        (vec!["check", "invariants"], "invariants.json"),
        (vec!["inducing"], "inducing.json"),
    ] {
        let mut full = args.clone();
        full.extend([s(&cfg), "--out", s(&out), "--enforce"]);
        let o = billiards(&full);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        assert!(out.join(file).exists(), "{file}");
    }
    assert_eq!(read_json(&out.join("cones.json"))["unstable_violations"], 0);
    assert_eq!(read_json(&out.join("inducing.json"))["kac"]["defect"], 0.0);
}

#[test]
fn io_problems_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(billiards(&["run", s(&missing)]).status.code(), Some(1));

    let cfg = write_config(&dir, "stadium.toml", STADIUM_SMALL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = billiards(&["run", s(&cfg), "--out", s(&blocker)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn example_configs_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["sinai.toml", "stadium.toml"] {
        let o = billiards(&["validate", s(&root.join(name))]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
    }
}
