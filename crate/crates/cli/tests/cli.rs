use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const S1: &str = "AB AC AD BC BE CD DF EF EG FG";
const S4: &str = "AB AC AD AE AG BF CD CG DG EF";

fn blockplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockplan"))
        .args(args)
        .env_remove("BLOCKPLAN_CATALOG")
        .output()
        .expect("run blockplan")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_s4_is_infeasible() {
    let o = blockplan(&["analyze", "--n", "7", "--q", "2", "--interactions", S4]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("chromatic number 4; infeasible for q=2"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn analyze_empty_request() {
    let o = blockplan(&[
        "analyze",
        "--n",
        "5",
        "--q",
        "1",
        "--interactions",
        "",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["chromatic_number"], 1);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["phi_max"], 0);
}

#[test]
fn analyze_s1_lists_profiles() {
    let o = blockplan(&["analyze", "--n", "7", "--q", "2", "--interactions", S1]);
    let out = stdout(&o);
    assert!(out.contains("feasible for q=2"));
    assert!(out.contains("⟨3,2,2⟩=16"), "{out}");
}

#[test]
fn construct_s4_exits_infeasible_with_advice() {
    let o = blockplan(&["construct", "--n", "7", "--q", "2", "--interactions", S4]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "infeasible");
    let fixes: Vec<&str> = v["advice"]["single_edge_fixes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(fixes, ["AC", "AD", "AG", "CD", "CG", "DG"]);
}

#[test]
fn construct_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("design.json");
    let o = blockplan(&[
        "construct",
        "--n",
        "8",
        "--p",
        "2",
        "--q",
        "2",
        "--interactions",
        "AB BC BD BE BF BG BH AC CH DG EG",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "success");
    assert_eq!(v["estimable_count"], 19);
    let o = blockplan(&["verify", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verification passed"));
}

#[test]
fn request_document_example_8() {
    let dir = tempfile::tempdir().unwrap();
    let req = dir.path().join("req.json");
    std::fs::write(
        &req,
        r#"{"n": 6, "q": 2, "interactions": ["AB", "AC", "AD", "AE", "EF"]}"#,
    )
    .unwrap();
    let o = blockplan(&["construct", "--request", path(&req)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["estimable_count"], 12);
    assert_eq!(v["grouping"].as_array().unwrap().len(), 3);
}

#[test]
fn example_7_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.txt");
    let mut text = String::from("# every pair except among G, H, I\n");
    for a in 'A'..='I' {
        for b in (a as u8 + 1..=b'I').map(char::from) {
            if !("GHI".contains(a) && "GHI".contains(b)) {
                text += &format!("{a}{b} ");
            }
        }
        text.push('\n');
    }
    std::fs::write(&file, text).unwrap();
    let o = blockplan(&[
        "construct",
        "--n",
        "9",
        "--q",
        "3",
        "--fraction",
        "ABEGH ABCDEFI",
        "--interactions",
        path(&file),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["profile"], serde_json::json!([3, 1, 1, 1, 1, 1, 1]));
    assert_eq!(
        v["design"]["defining_words"],
        serde_json::json!(["ABEGH", "ABCDEFI"])
    );
    assert_eq!(v["estimable_count"], 33);
}

#[test]
fn partial_design_exit_code() {
    let o = blockplan(&[
        "construct",
        "--n",
        "5",
        "--q",
        "2",
        "--fraction",
        "ABCE",
        "--interactions",
        "AB CE",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("inestimable required interactions"));
}

#[test]
fn tampered_design_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = blockplan(&[
        "construct",
        "--n",
        "5",
        "--q",
        "2",
        "--interactions",
        "AB",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let blocks = v["design"]["blocks"].as_array_mut().unwrap();
    let moved = blocks[0].as_array_mut().unwrap().remove(1);
    blocks[1].as_array_mut().unwrap().push(moved);
    std::fs::write(&out, v.to_string()).unwrap();
    let o = blockplan(&["verify", path(&out)]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn catalog_filters() {
    let o = blockplan(&["catalog", "--n", "8", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 5);
    let o = blockplan(&["catalog", "--n", "8", "--p", "2", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 5);
    let o = blockplan(&["catalog", "--n", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn catalog_override_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cat.txt");
    std::fs::write(
        &file,
        "fraction 5-1.1 F1F2F3F4F5\n\
         template res5 5 1 3,1,1 7 5-1.1 1,2,5|3|4 -\n\
         template res5 5 1 2,2,1 8 5-1.1 1,2|3,4|5 -\n",
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_blockplan"))
        .args(["catalog", "--format", "csv"])
        .env("BLOCKPLAN_CATALOG", &file)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2, "{}", stdout(&o));
    assert!(
        stderr(&o).contains("quarantined 5-1.1 ⟨2,2,1⟩"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn export_s1_dot() {
    let o = blockplan(&["export-dot", "--n", "7", "--interactions", S1]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.starts_with("graph requirements {"));
    assert_eq!(dot.matches(" -- ").count(), 10);
}

#[test]
fn input_errors_report_position() {
    let o = blockplan(&["analyze", "--n", "4", "--q", "2", "--interactions", "AB AQ"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("<inline>:1:4"), "{}", stderr(&o));
    let o = blockplan(&["construct", "--n", "4"]);
    assert_eq!(o.status.code(), Some(4));
    let o = blockplan(&["verify", "/nonexistent/design.json"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn output_is_deterministic() {
    let args = ["construct", "--n", "7", "--q", "2", "--interactions", S1];
    assert_eq!(blockplan(&args).stdout, blockplan(&args).stdout);
}
