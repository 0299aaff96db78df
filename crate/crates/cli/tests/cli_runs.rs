use std::fs;
use std::process::Command;

use cosetc::{execute, parse_config, run, Overrides};
use cosetc_core::complex::GraphExport;
use serde_json::Value;

const C4: &str = "[pair]\ngroup = \"raag\"\ngenerators = [\"a\", \"b\", \"c\", \"d\"]\nedges = [[\"a\", \"b\"], [\"b\", \"c\"], [\"c\", \"d\"], [\"d\", \"a\"]]\n";

fn only(text: &str) -> String {
    let c = parse_config(text).unwrap();
    let mut a = run(&c).unwrap();
    assert_eq!(a.len(), 1);
    a.pop().unwrap().contents
}

fn report(text: &str) -> Value {
    serde_json::from_str(&only(text)).unwrap()
}

#[test]
fn baumslag_solitar_ball_is_edgeless() {
    let g = GraphExport::from_json(&only(
        "command = \"build-complex\"\nradius = 3\n[pair]\ngroup = \"bs\"\nk = 2\nperipherals = [[\"t\"]]\n",
    ))
    .unwrap();
    assert!(g.vertices.len() > 1);
    assert!(g.edges.is_empty());
}

#[test]
fn c4_core_finds_four_stars() {
    let r = report(&format!("command = \"core\"\nseed = 1\nsamples = 20\n{C4}peripherals = \"stars\"\n"));
    assert_eq!(r["verdict"], "star-subgroups");
    assert_eq!(r["seed"], 1);
    let subgroups = r["evidence"][0]["subgroups"].as_array().unwrap();
    assert_eq!(subgroups.len(), 4);
    assert_eq!(subgroups[0], serde_json::json!(["a", "b", "d"]));
}

#[test]
fn height_of_square_subgroup() {
    let r = report(
        "command = \"height\"\nradius = 3\n[pair]\ngroup = \"free\"\ngenerators = [\"x\", \"y\"]\nperipherals = [[\"x^2\"]]\n",
    );
    assert_eq!(r["verdict"], "2");
    let r = report(
        "command = \"height\"\nradius = 3\n[pair]\ngroup = \"free\"\ngenerators = [\"x\", \"y\"]\nperipherals = [[\"x\"]]\n",
    );
    assert_eq!(r["verdict"], "1");
}

#[test]
fn c4_dot_export_is_a_four_cycle_on_the_base() {
    let dot = only(&format!(
        "command = \"build-complex\"\nradius = 0\n[output]\nformat = \"dot\"\n{C4}peripherals = \"maximal-standard-abelians\"\n"
    ));
    assert!(dot.starts_with("graph "));
    assert_eq!(dot.matches(" -- ").count(), 4);
    assert_eq!(dot.matches("shape=ellipse").count(), 4);
}

#[test]
fn outputs_are_reproducible() {
    let text = format!("command = \"qi-chain\"\nradius = 2\nsamples = 50\n{C4}peripherals = \"maximal-standard-abelians\"\n");
    let ov = Overrides { seed: Some(9), ..Overrides::default() };
    let (a, wa) = execute(&text, &ov).unwrap();
    let (b, _) = execute(&text, &ov).unwrap();
    assert!(!wa);
    assert_eq!(a, b);
}

#[test]
fn binary_writes_artifacts_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(
        &good,
        "command = \"malnormal\"\nradius = 3\n[pair]\ngroup = \"free\"\ngenerators = [\"x\", \"y\"]\nperipherals = [[\"x\"]]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_cosetc"))
        .args(["--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("malnormal.json")).unwrap()).unwrap();
    assert_eq!(r["verdict"], "malnormal");

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "command = \"core\"\n[pair]\ngroup = \"free\"\nrank = 2\nperipherals = [[\"x0\"]]\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cosetc")).args(["--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["messages"].as_array().unwrap().len() >= 2);
}
