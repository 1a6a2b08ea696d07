use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_singlet-frame");

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("sf-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("SINGLET_FRAME_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("SINGLET_FRAME_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SAMPLED: &str = r#"
mode = "sampled"
seed = 7
trials = 20
batch = 2000
rounds = 2

[alice]
direction = { theta = 0.8, phi = 1.0 }

[prior]
poles = [{ theta = 0.6, phi = 1.2 }]
"#;

#[test]
fn figure_commands_write_csv_and_sidecar() {
    let s = Scratch::new("figs");
    for (args, name, header, rows) in [
        (vec!["mi-curve", "--resolution", "11"], "mi_curve.csv", "theta,mutual_information", 11),
        (vec!["mi-surface", "--resolution", "5"], "mi_surface.csv", "theta_y,phi_y,mutual_information", 50),
        (vec!["posterior-family", "--resolution", "9"], "posterior_family.csv", "n_plus,n_minus,theta,density", 36),
        (
            vec!["posterior-family", "--tallies", "5:6,1:0", "--resolution", "3"],
            "posterior_family.csv",
            "n_plus,n_minus,theta,density",
            6,
        ),
    ] {
        let out = run(&args, Some(&s.0));
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(s.path(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header));
        assert_eq!(lines.count(), rows);
        let log = std::fs::read_to_string(s.path(&format!("{name}.log"))).unwrap();
        assert!(log.contains("wall_seconds="));
    }
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let s = Scratch::new("run");
    std::fs::write(s.path("c.toml"), SAMPLED).unwrap();
    let cfg = s.path("c.toml");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (s.path("a.json"), s.path("b.json"));
    for out in [&a, &b] {
        let o = run(&["run", "--config", cfg, "--out", out.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = run(&["run", "--config", cfg, "--seed", "8", "--out", b.to_str().unwrap()], None);
    assert!(o.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let report = json(&a);
    let err = report["axes"][0]["angular_error"].as_f64().unwrap();
    assert!(err.is_finite() && err >= 0.0);
}

#[test]
fn run_default_output_goes_to_env_dir() {
    let s = Scratch::new("env");
    std::fs::write(s.path("c.toml"), SAMPLED.replace("mode = \"sampled\"", "mode = \"exact\"")).unwrap();
    let o = run(&["run", "--config", s.path("c.toml").to_str().unwrap()], Some(&s.0));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(s.path("run_report.json").exists());
    assert!(s.path("run_report.json.log").exists());
}

#[test]
fn bayes_from_tally_and_record() {
    let s = Scratch::new("bayes");
    let o = run(&["bayes", "--tally", "5:6"], Some(&s.0));
    assert!(o.status.success());
    let summary = json(&s.path("posterior_summary.json"));
    assert_eq!(summary["map_cos_theta"].as_f64().unwrap(), 1.0 / 11.0);

    let mut csv = String::from("index,a,b\n");
    for i in 0..40 {
        let a = if i % 3 == 0 { 1 } else { -1 };
        csv.push_str(&format!("{i},{a},{}\n", -a));
    }
    std::fs::write(s.path("r.csv"), csv).unwrap();
    let out = s.path("r.json");
    let o = run(
        &["bayes", "--record", s.path("r.csv").to_str().unwrap(), "--out", out.to_str().unwrap()],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&out);
    assert_eq!(summary["map_cos_theta"].as_f64().unwrap(), 1.0);
    assert_eq!(summary["n_plus"].as_u64().unwrap(), 0);
    assert_eq!(summary["n_minus"].as_u64().unwrap(), 40);
}

#[test]
fn exit_codes() {
    let s = Scratch::new("codes");
    // Validation: sampled mode without a seed.
    std::fs::write(s.path("noseed.toml"), SAMPLED.replace("seed = 7\n", "")).unwrap();
    let o = run(&["run", "--config", s.path("noseed.toml").to_str().unwrap()], Some(&s.0));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    // Parse error carries a line number.
    std::fs::write(s.path("bad.toml"), "mode = \"exact\"\ntrials = [\n").unwrap();
    let o = run(&["run", "--config", s.path("bad.toml").to_str().unwrap()], Some(&s.0));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml:2:"));

    // Bad arguments.
    assert_eq!(run(&["bayes", "--tally", "x"], Some(&s.0)).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"], None).status.code(), Some(1));
    assert_eq!(run(&["--help"], None).status.code(), Some(0));

    // I/O: missing config, output under a regular file.
    let o = run(&["run", "--config", s.path("missing.toml").to_str().unwrap()], Some(&s.0));
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(s.path("plain"), "").unwrap();
    let o = run(&["mi-curve", "--out", s.path("plain/x.csv").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
}
