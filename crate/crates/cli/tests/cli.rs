use std::process::{Command, Output};

use serde_json::Value;

fn hecke(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke")).args(args).output().expect("run hecke")
}

fn json(args: &[&str]) -> Value {
    let out = hecke(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn parse_errors_exit_with_two() {
    for args in [
        &["residual", "--algebra", "X9[q]"][..],
        &["packets", "--family", "nope"],
        &["residual"],
        &["bogus"],
        &["hii", "--family", "pcsp", "--n", "1"],
        &["--jobs", "0", "packets", "--family", "pgl", "--n", "1"],
    ] {
        let out = hecke(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn residual_orbit_counts() {
    let v = json(&["residual", "--algebra", "C2(0.5,0.5)[q]"]);
    assert_eq!(v["algebra"], "C2(1/2,1/2)[q]");
    assert_eq!(v["orbits"], 3);
    assert_eq!(v["positive_real_orbits"], 1);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(points.iter().filter(|p| p["positive_real"] == true).count(), 1);
    let g2 = json(&["residual", "--algebra", "G2(3,1)[q]"]);
    assert_eq!(g2["orbits"], 4);
}

#[test]
fn packets_and_hii_shape() {
    let packets = json(&["packets", "--family", "pgl", "--n", "2"]);
    let packets = packets.as_array().unwrap();
    assert_eq!(packets.len(), 3);
    for pk in packets {
        assert_eq!(pk["family"], "PGL");
        assert_eq!(pk["members"].as_array().unwrap().len(), 3);
        for m in pk["members"].as_array().unwrap() {
            assert_eq!(m["fdeg_qfactor"], "1 * [3]^-1");
        }
    }
    let hii = json(&["hii", "--family", "pcsp", "--n", "2"]);
    assert_eq!(hii["family"], "PCSp");
    assert_eq!(hii["n"], 2);
    assert_eq!(hii["pass"], true);
    assert!(!hii["packets"].as_array().unwrap().is_empty());
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["packets", "--family", "so-odd", "--n", "3"][..],
        &["residual", "--algebra", "C3(1,2)[q]"],
        &["hii", "--family", "pco-star", "--n", "4", "--format", "tsv"],
    ] {
        let a = hecke(args);
        let b = hecke(&[&["--jobs", "1"][..], args].concat());
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn table_formats() {
    let out = hecke(&["fdeg", "--algebra", "C2(0.5,1.5)[q]", "--format", "tsv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(header[0], "pi_minus");
    assert!(header.contains(&"agree"));
    for line in lines.filter(|l| !l.is_empty()) {
        assert_eq!(line.split('\t').count(), header.len(), "{line}");
        assert!(line.ends_with("pass"), "{line}");
    }
    let out = hecke(&["residual", "--algebra", "G2(3,1)[q]", "--format", "pretty"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4 orbits"), "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("-----"));
}

#[test]
fn stm_verify_reports_constants() {
    let out = hecke(&["stm-verify", "--algebra", "C1(2.5,0.5)[q]", "--format", "tsv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("C3(3/2,1/2)[q]"), "{text}");
}
