use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"))
        .join("cli")
        .join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, value: &Value) -> String {
    let path = dir.join(file);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn wclone(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wclone"))
        .args(args)
        .env_remove("WCLONE_OP_CAP")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json_of(stdout: &str) -> Value {
    serde_json::from_str(stdout).unwrap()
}

fn eq_language() -> Value {
    json!({ "eq": { "d": 2, "m": 2, "entries": [
        { "tuple": [0, 0], "value": "0" }, { "tuple": [1, 1], "value": "0" } ] } })
}

fn submodular() -> Value {
    json!({ "d": 2, "k": 2, "terms": [
        { "op": { "table": [0, 0, 1, 1] }, "weight": "-1" },
        { "op": { "table": [0, 1, 0, 1] }, "weight": "-1" },
        { "op": { "table": [0, 0, 0, 1] }, "weight": "1" },
        { "op": { "table": [0, 1, 1, 1] }, "weight": "1" } ] })
}

fn binary(values: [&str; 4]) -> Value {
    json!({ "d": 2, "m": 2, "default": "inf", "entries": [
        { "tuple": [0, 0], "value": values[0] }, { "tuple": [0, 1], "value": values[1] },
        { "tuple": [1, 0], "value": values[2] }, { "tuple": [1, 1], "value": values[3] } ] })
}

fn tiny_instance(dir: &Path) -> String {
    let language = json!({
        "eq": { "d": 2, "m": 2, "entries": [
            { "tuple": [0, 0], "value": "0" }, { "tuple": [1, 1], "value": "0" } ] },
        "u1": { "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "3" }, { "tuple": [1], "value": "1" } ] },
        "u2": { "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "2" }, { "tuple": [1], "value": "0" } ] },
    });
    write(dir, "tiny_lang.json", &language);
    write(
        dir,
        "tiny.json",
        &json!({ "n": 2, "language": "tiny_lang.json", "constraints": [
            { "rel": "eq", "scope": [0, 1] }, { "rel": "u1", "scope": [0] }, { "rel": "u2", "scope": [1] } ] }),
    )
}

#[test]
fn pol_lists_all_binary_operations_for_equality() {
    let dir = workdir("pol");
    let lang = write(&dir, "eq.json", &eq_language());
    let (code, out, _) = wclone(&["pol", "--language", &lang, "--arity", "2"]);
    assert_eq!(code, 0);
    let v = json_of(&out);
    assert_eq!(v["count"], 16);
    assert_eq!(v["operations"].as_array().unwrap().len(), 16);
}

#[test]
fn wpol_check_verdicts() {
    let dir = workdir("wpol_check");
    let sub = write(&dir, "sub.json", &submodular());
    let xor = write(&dir, "xor.json", &binary(["0", "1", "1", "0"]));
    let anti = write(&dir, "anti.json", &binary(["1", "0", "0", "1"]));
    let (code, out, _) = wclone(&["wpol-check", "--weighting", &sub, "--relation", &xor]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out)["verdict"], true);
    let (code, out, _) = wclone(&["wpol-check", "--weighting", &sub, "--relation", &anti]);
    assert_eq!(code, 1);
    assert_eq!(json_of(&out)["verdict"], false);
}

#[test]
fn solve_and_delta_with_language_path() {
    let dir = workdir("solve");
    let tiny = tiny_instance(&dir);
    let (code, out, _) = wclone(&["solve", "--instance", &tiny]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out), json!({ "optimum": "1", "argmin": [1, 1] }));
    let (code, out, _) = wclone(&["delta", "--instance", &tiny]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out), json!({ "delta": "4" }));
}

#[test]
fn imp_member_and_express_round_trip() {
    let dir = workdir("imp");
    let lang = write(
        &dir,
        "lang.json",
        &json!({ "u": { "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "0" }, { "tuple": [1], "value": "1" } ] } }),
    );
    let rho = write(
        &dir,
        "rho.json",
        &json!({ "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "0" }, { "tuple": [1], "value": "2" } ] }),
    );
    let (code, out, _) = wclone(&["imp-member", "--language", &lang, "--relation", &rho]);
    assert_eq!(code, 0);
    let verdict = json_of(&out);
    assert_eq!(verdict["verdict"], "member");
    let witness = write(&dir, "verdict.json", &verdict);
    let (code, out, _) = wclone(&["express", "--language", &lang, "--witness", &witness]);
    assert_eq!(code, 0);
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(&rho).unwrap()).unwrap();
    let got = json_of(&out);
    assert_eq!(got["m"], expected["m"]);
    let rel: wclone::WeightedRelation = serde_json::from_value(got).unwrap();
    let want: wclone::WeightedRelation = serde_json::from_value(expected).unwrap();
    assert_eq!(rel, want);

    let neg = write(
        &dir,
        "neg.json",
        &json!({ "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "0" }, { "tuple": [1], "value": "-1" } ] }),
    );
    let (code, out, _) = wclone(&["imp-member", "--language", &lang, "--relation", &neg]);
    assert_eq!(code, 1);
    assert_eq!(json_of(&out)["verdict"], "separated");
}

#[test]
fn error_exit_codes() {
    let dir = workdir("errors");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ \"eq\": ").unwrap();
    let (code, out, err) = wclone(&["pol", "--language", bad.to_str().unwrap(), "--arity", "1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("line 1"), "{err}");

    let (code, _, _) = wclone(&["no-such-command"]);
    assert_eq!(code, 2);

    let lang = write(&dir, "eq.json", &eq_language());
    let (code, _, err) = wclone(&["pol", "--language", &lang, "--arity", "5"]);
    assert_eq!(code, 3);
    assert!(err.contains("cap"), "{err}");
    let (code, _, _) = wclone(&["--op-cap", "15", "pol", "--language", &lang, "--arity", "2"]);
    assert_eq!(code, 3);

    let status = Command::new(env!("CARGO_BIN_EXE_wclone"))
        .args(["pol", "--language", &lang, "--arity", "2"])
        .env("WCLONE_OP_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let status = Command::new(env!("CARGO_BIN_EXE_wclone"))
        .args(["pol", "--op-cap", "16", "--language", &lang, "--arity", "2"])
        .env("WCLONE_OP_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
}

#[test]
fn outputs_are_deterministic_and_reparse() {
    let dir = workdir("determinism");
    let tiny = tiny_instance(&dir);
    let lang = write(&dir, "eq.json", &eq_language());
    for args in [
        vec!["solve", "--instance", &tiny],
        vec!["improve-rows", "--language", &lang, "--arity", "1"],
        vec!["wpol-find", "--language", &lang, "--arity", "2"],
        vec![
            "counterexample",
            "--u",
            "13/10",
            "--v",
            "3/2",
            "--loose-u",
            "1",
            "--loose-v",
            "2",
        ],
    ] {
        let (c1, a, _) = wclone(&args);
        let (c2, b, _) = wclone(&args);
        assert_eq!((c1, &a), (c2, &b));
        let v = json_of(&a);
        assert_eq!(
            serde_json::from_str::<Value>(&serde_json::to_string(&v).unwrap()).unwrap(),
            v
        );
    }
}

#[test]
fn reductions_and_wclone_membership() {
    let dir = workdir("reductions");
    let language = json!({
        "g": { "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "0" }, { "tuple": [1], "value": "1" } ] },
        "og": { "d": 2, "m": 1, "entries": [ { "tuple": [0], "value": "0" } ] },
    });
    let inst = write(
        &dir,
        "inst.json",
        &json!({ "n": 1, "language": language, "constraints": [ { "rel": "og", "scope": [0] } ] }),
    );
    let (code, out, _) = wclone(&[
        "reduce-opt",
        "--instance",
        &inst,
        "--gamma",
        "g",
        "--opt",
        "og",
    ]);
    assert_eq!(code, 0);
    let v = json_of(&out);
    assert_eq!(v["meta"]["kind"], "opt");
    assert!(v["language"].get("og").is_none());

    let scaled = write(
        &dir,
        "scaled.json",
        &json!({ "n": 1, "language": { "g": language["g"].clone() },
                 "constraints": [ { "rel": "g", "scope": [0], "factor": "1/3" } ] }),
    );
    let (code, out, _) = wclone(&["reduce-scale", "--instance", &scaled, "--epsilon", "1/10"]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out)["meta"]["kind"], "scale");
    let (code, _, _) = wclone(&["reduce-scale", "--instance", &scaled, "--epsilon", "0.1"]);
    assert_eq!(code, 2);

    let omegas = write(&dir, "omegas.json", &json!([submodular()]));
    let mu = write(&dir, "mu.json", &submodular());
    let (code, out, _) = wclone(&["wclone-member", "--weightings", &omegas, "--weighting", &mu]);
    assert_eq!(code, 0);
    assert_eq!(json_of(&out)["verdict"], "member");
}
