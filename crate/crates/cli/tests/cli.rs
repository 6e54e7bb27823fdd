use std::path::Path;
use std::process::{Command, Output};

use einsum_core::bindings::parse_bindings;
use einsum_core::{eval, parse_expression, Arithmetic};
use serde_json::Value;

fn einsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_einsum"))
        .args(args)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus"))
        .output()
        .unwrap()
}

fn json_line(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().expect("no output")).unwrap()
}

#[test]
fn structured_eval_reports_shape_and_values() {
    let out = einsum(&[
        "--format",
        "structured",
        "eval",
        "--bindings",
        "bindings/basic.json",
        "#(ij,jk->ik; A, B)",
    ]);
    assert!(out.status.success());
    let v = json_line(&out);
    assert_eq!(v["shape"], serde_json::json!([2, 2]));
    assert_eq!(v["values"], serde_json::json!([19, 22, 43, 50]));
    assert_eq!(v["semiring"], "int");
}

#[test]
fn semiring_flag_changes_the_result() {
    let expr = "#(ij,jk->ik; A, B)";
    let int = einsum(&["eval", "--bindings", "bindings/basic.json", expr]);
    let trop = einsum(&[
        "eval",
        "--semiring",
        "tropical",
        "--bindings",
        "bindings/basic.json",
        expr,
    ]);
    // min over j of A[i][j] + B[j][k]
    assert_eq!(
        String::from_utf8_lossy(&trop.stdout),
        "shape: 2x2\nvalues: [6, 7, 8, 9]\n"
    );
    assert_ne!(int.stdout, trop.stdout);
}

/// The printed counterexample, fed back through `eval`, shows the difference.
#[test]
fn counterexamples_recheck() {
    let (left, right) = ("#(ij,jk->ik; A, B)", "#(ij,jk->ik; B, A)");
    let out = einsum(&[
        "--format",
        "structured",
        "equiv",
        "--dims",
        "2",
        left,
        right,
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_line(&out);
    assert_eq!(report["equal"], false);
    let c = &report["counterexample"];
    let bindings = parse_bindings(&c["bindings"].to_string(), &Arithmetic).unwrap();
    let l = eval(&parse_expression(left).unwrap(), &bindings, &Arithmetic).unwrap();
    let r = eval(&parse_expression(right).unwrap(), &bindings, &Arithmetic).unwrap();
    let at: Vec<usize> = c["position"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(Value::from(*l.get(&at).unwrap()), c["left"]);
    assert_eq!(Value::from(*r.get(&at).unwrap()), c["right"]);
    assert_ne!(l.get(&at), r.get(&at));
}

#[test]
fn seeds_make_reports_reproducible() {
    let args = [
        "--format",
        "structured",
        "--seed",
        "7",
        "equiv",
        "--dims",
        "1..4",
        "#(ij,jk->ik; A, B)",
        "#(ij,jk->ik; B, A)",
    ];
    assert_eq!(einsum(&args).stdout, einsum(&args).stdout);
}

#[test]
fn exhaustive_mode_enumerates_small_inputs() {
    let out = einsum(&[
        "--format",
        "structured",
        "equiv",
        "--exhaustive",
        "--dims",
        "2",
        "#(ij->ji; A)",
        "#(ji->ij; A)",
    ]);
    assert!(out.status.success());
    assert_eq!(json_line(&out)["trials"], 81);
    let too_big = einsum(&[
        "equiv",
        "--exhaustive",
        "--dims",
        "4",
        "#(ij->ji; A)",
        "#(ji->ij; A)",
    ]);
    assert_eq!(too_big.status.code(), Some(2));
}

#[test]
fn at_addresses_nested_nodes_one_based() {
    let out = einsum(&[
        "rewrite",
        "--at",
        "2",
        "#(ij,j->i; A, #(jk,k->j; B, #(k->k; v)))",
        "restricted-denest",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "#(ij,j->i; A, #(jk,k->j; B, v))\n"
    );
}

#[test]
fn rule_failures_carry_reason_codes() {
    let out = einsum(&[
        "--format",
        "structured",
        "rewrite",
        "#(ij,jk->ik; A, B)",
        "restricted-denest",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_line(&out);
    assert_eq!(v["code"], "not-nested");
    assert_eq!(v["message"], "operand 1 is not a nested einsum");
}

#[test]
fn violations_point_into_the_source() {
    let out = einsum(&[
        "--format",
        "structured",
        "validate",
        "--bindings",
        "bindings/diag.json",
        "#(ij,jk->ik; A, C)",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_line(&out);
    let violation = &v["violations"][0];
    assert_eq!(violation["at"], serde_json::json!([2]));
    assert_eq!(violation["span"], serde_json::json!([16, 17]));
    let human = einsum(&["validate", "#(ij,jk->iz; A, B)"]);
    let err = String::from_utf8_lossy(&human.stderr);
    assert!(err.contains("constraint III") && err.contains('^'), "{err}");
}

#[test]
fn syntax_errors_exit_two_with_a_caret() {
    let out = einsum(&["eval", "#(ij,jk->ik; A B)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('^'));
}

#[test]
fn expressions_can_come_from_files() {
    let dir = std::env::temp_dir().join(format!("einsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("chain.ein");
    std::fs::write(&file, "#(ij,jk,k->i;\n  A, B, v)\n").unwrap();
    let arg = format!("@{}", file.display());
    let out = einsum(&["eval", "--bindings", "bindings/chain.json", &arg]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "shape: 2\nvalues: [33, 6]\n"
    );
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn rules_lists_every_rule() {
    let v = json_line(&einsum(&["--format", "structured", "rules"]));
    assert_eq!(v.as_object().unwrap().len(), 16);
    assert!(v.get("general-denest").is_some());
}
