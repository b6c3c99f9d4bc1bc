use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condensate"))
        .args(args)
        .env_remove("CONDENSATE_BOUND")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("condensate-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn classify_square() {
    let o = run(&["poset", "classify", &data("square.poset")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "pseudo=true supported=true almost=true\n");
}

#[test]
fn ring_lattice_of_m2_is_m3() {
    let o = run(&["ring", "lattice", "mat 2 gf 2", "--emit-poset"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("isomorphic to M3"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("elem ")).count(), 5);

    // The emitted lattice is itself a poset file.
    let dir = scratch("ring");
    let f = dir.join("l.poset");
    std::fs::write(&f, &out).unwrap();
    let c = run(&["poset", "classify", f.to_str().unwrap()]);
    assert_eq!(stdout(&c), "pseudo=true supported=true almost=true\n");
}

#[test]
fn m3_square_has_no_lift_within_bound() {
    let o = run(&["metr", "lift-search", "m3-square", "--bound", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("none-within-bound"));
}

#[test]
fn degenerate_square_lifts() {
    let dir = scratch("lift");
    let w = dir.join("w.txt");
    let o = run(&["metr", "lift-search", "degenerate-square", "--bound", "2", "--witness", w.to_str().unwrap()]);
    assert_eq!(stdout(&o), "found\n");
    let text = std::fs::read_to_string(&w).unwrap();
    assert!(text.contains("# B3") && text.contains("# chi0"));
}

#[test]
fn parse_error_reports_position_and_exits_2() {
    let o = run(&["poset", "classify", &data("bad.poset")]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 2, column 6"), "{e}");
    assert!(e.contains("bad.poset"), "{e}");
}

#[test]
fn domain_error_exits_1() {
    let o = run(&["scaled", "quotient", &data("alg.sc"), "u", "v"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("improper ideal"));
}

#[test]
fn unknown_square_is_an_input_error() {
    let o = run(&["metr", "square-check", "k4-square"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_carries_schema() {
    let o = run(&["--json", "poset", "classify", &data("vee.poset")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "poset classify");
    assert_eq!(v["almost"], true);

    let o = run(&["--json", "poset", "classify", &data("bad.poset")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 2);
}

#[test]
fn bound_from_environment_and_hard_cap() {
    let o = Command::new(env!("CARGO_BIN_EXE_condensate"))
        .args(["con", "lattice", &data("chain3.lat")])
        .env("CONDENSATE_BOUND", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("size limit"));

    let o = run(&["con", "lattice", &data("chain3.lat"), "--bound", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--no-cap"));
    let o = run(&["con", "lattice", &data("chain3.lat"), "--bound", "40", "--no-cap"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn congruence_counts() {
    let o = run(&["--json", "con", "lattice", &data("chain3.lat")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["size"], 4);
    let o = run(&["--json", "con", "lattice", &data("m3.lat")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["size"], 2);
}

#[test]
fn quotient_round_trips_through_the_structure_format() {
    let dir = scratch("quot");
    let o = run(&["con", "quotient", &data("chain3.lat"), "a=1"]);
    let f = dir.join("q.lat");
    std::fs::write(&f, stdout(&o)).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["--json", "con", "lattice", f.to_str().unwrap()]))).unwrap();
    assert_eq!(v["size"], 2);
}

#[test]
fn natural_space_round_trips() {
    let dir = scratch("nat");
    let o = run(&["metr", "natural", &data("chain3.lat")]);
    let f = dir.join("c3.sp");
    std::fs::write(&f, stdout(&o)).unwrap();
    let v = run(&["metr", "validate", f.to_str().unwrap()]);
    assert_eq!(stdout(&v), "space points=3 values=4\n");

    // Starring every point breaks the Parallelogram Rule for the 3-chain.
    let mut cover = stdout(&o);
    cover.push_str("star 0 a 1\n");
    std::fs::write(&f, cover).unwrap();
    let v = run(&["metr", "validate", f.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stderr(&v).contains("Parallelogram Rule fails"));
    let again = run(&["metr", "natural", &data("chain3.lat")]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn scaled_product_round_trips() {
    let dir = scratch("prod");
    std::fs::copy(data("two.poset"), dir.join("two.poset")).unwrap();
    let o = run(&["scaled", "product", &data("alg.sc"), &data("top.sc")]);
    let f = dir.join("p.sc");
    std::fs::write(&f, stdout(&o)).unwrap();
    let s = run(&["scaled", "stone", f.to_str().unwrap()]);
    assert!(stdout(&s).ends_with("clop-ult-iso=true ult-clop-iso=true\n"));
}

#[test]
fn tensor_and_condensate_agree_on_identity_covering() {
    let t = run(&["tensor", &data("chain.dia"), &data("alg.sc")]);
    let c = run(&["condensate", &data("chain.dia"), &data("chain.cov")]);
    assert_eq!(t.status.code(), Some(0));
    let body = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&t), body(&c));
    assert!(stdout(&t).contains("# 1  v  1  3"));
}

#[test]
fn ring_subcommands() {
    let o = run(&["ring", "ops", "mat 2 gf 2", "[10;00]", "[10;01]"]);
    assert!(stdout(&o).contains("section complement of aR in bR: [00;01]R"));
    let o = run(&["--json", "ring", "neutral", "prod gf 2 gf 2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 4);
    let o = run(&["ring", "corner", "mat 2 gf 2", "[10;00]"]);
    assert_eq!(stdout(&o), "e = [10;00]  |eRe| = 2\n");
    let o = run(&["ring", "lattice", "gf 4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn poset_and_fx_subcommands() {
    assert_eq!(stdout(&run(&["poset", "closure", &data("vee.poset"), "a", "b"])), "{o, a, b}\n");
    assert_eq!(stdout(&run(&["poset", "nabla", &data("vee.poset"), "a", "b"])), "{}\n");
    let o = run(&["poset", "freemap", &data("square.poset"), "--k", "6", "--map", &data("k3.map")]);
    assert!(stdout(&o).starts_with("free map "));
    let o = run(&["fx", "pi", &data("chain.cov"), "x"]);
    assert!(stdout(&o).ends_with("normal=true\n"));
    let o = run(&["scaled", "normal", &data("proj.mor")]);
    assert_eq!(stdout(&o), "normal=true isomorphism=false level-preserving=true\n");
}

#[test]
fn witness_for_a_chain_quotient() {
    let o = run(&["con", "witness", &data("chain3.lat"), "a=1", "--variety", "lattices"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ε bijective=true"));
}
