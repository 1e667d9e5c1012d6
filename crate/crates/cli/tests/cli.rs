use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bitsmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitsmm"))
        .args(args)
        .env_remove("BITSMM_OUT_DIR")
        .output()
        .expect("spawn bitsmm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(csv: &'a str, row: usize, name: &str) -> &'a str {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.nth(row).unwrap().split(',').nth(idx).unwrap()
}

#[test]
fn mac_single_product() {
    let out = bitsmm(&["mac", "--a", "6", "--b", "-2", "--width", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert_eq!(field(&s, 0, "result"), "-12");
    assert_eq!(field(&s, 0, "cycles"), "8");
    assert_eq!(field(&s, 0, "status"), "PASS");
}

#[test]
fn mac_dot_latency() {
    let out = bitsmm(&[
        "mac", "--dot", "--n", "1000", "--width", "16", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&stdout(&out), 0, "cycles"), "16016");
}

#[test]
fn mac_json_zero_width_one() {
    let out = bitsmm(&[
        "mac", "--a", "0", "--b", "0", "--width", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(s.contains("\"cycles\": 2"), "{s}");
}

#[test]
fn out_of_range_operand_is_usage_error() {
    let out = bitsmm(&["mac", "--a", "8", "--b", "1", "--width", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn matmul_default_array() {
    let out = bitsmm(&[
        "matmul", "--rows", "4", "--cols", "16", "--width", "8", "--n", "32", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert_eq!(field(&s, 0, "status"), "PASS");
    assert_eq!(field(&s, 0, "readout_cycles"), "64");
    assert_eq!(
        field(&s, 0, "measured_op_per_cycle_without_fill"),
        field(&s, 0, "model_op_per_cycle")
    );
}

#[test]
fn matmul_identity_and_product_file() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.csv");
    let out = bitsmm(&[
        "matmul",
        "--identity",
        "--topo",
        "8x4",
        "--m",
        "4",
        "--n",
        "4",
        "--p",
        "8",
        "--width",
        "6",
        "--seed",
        "3",
        "--c-out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&c).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
}

#[test]
fn matmul_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    fs::write(&a, "width,4\n1,2\n-3,4\n").unwrap();
    fs::write(&b, "width,4\n5,-6\n7,0\n").unwrap();
    let out = bitsmm(&[
        "matmul",
        "--topo",
        "2x2",
        "--a-file",
        a.to_str().unwrap(),
        "--b-file",
        b.to_str().unwrap(),
        "--c-out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&c).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows, ["19,-6", "13,18"]);
}

#[test]
fn sweep_published_contains_fpga_point() {
    let out = bitsmm(&["sweep", "--preset", "published"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert!(
        s.lines()
            .any(|l| l == "fpga,64x16,16,,300,64.0,64,19.2,19.2"),
        "{s}"
    );
    let alias = bitsmm(&["sweep", "--preset", "paper"]);
    assert_eq!(stdout(&alias), s);
}

#[test]
fn sweep_width_axis() {
    let out = bitsmm(&["sweep", "--widths", "1..16", "--topo", "32x8"]);
    assert_eq!(out.status.code(), Some(0));
    let s = stdout(&out);
    assert_eq!(s.lines().count(), 17);
    assert_eq!(field(&s, 0, "op_per_cycle_exact"), "256");
    assert_eq!(field(&s, 15, "op_per_cycle_exact"), "16");
}

#[test]
fn sweep_bad_axes_are_usage_errors() {
    assert_eq!(bitsmm(&["sweep", "--widths", ""]).status.code(), Some(2));
    assert_eq!(bitsmm(&["sweep", "--widths", "17"]).status.code(), Some(2));
    assert_eq!(
        bitsmm(&["sweep", "--freqs-mhz", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_quick_passes_and_is_deterministic() {
    let first = bitsmm(&["verify", "--seed", "42", "--quick"]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).lines().last().unwrap().ends_with(",0,PASS"));
    let second = bitsmm(&["verify", "--seed", "42", "--quick"]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn verify_detects_injected_fault() {
    let out = bitsmm(&["verify", "--seed", "42", "--quick", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
    let all = format!("{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(all.contains("reproduce: bitsmm mac"), "{all}");
}

fn trace_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn trace_single_product() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let vcd = dir.path().join("t.vcd");
    let out = bitsmm(&[
        "trace",
        "--a",
        "6",
        "--b",
        "-2",
        "--width",
        "4",
        "--out",
        path.to_str().unwrap(),
        "--vcd",
        vcd.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = trace_rows(&path);
    assert_eq!(rows.len(), 1 + 9);
    let text = rows.join("\n");
    let actions: Vec<&str> = (0..9)
        .map(|i| field(&text, i, "action"))
        .filter(|a| *a != "-")
        .collect();
    assert_eq!(actions, ["NOP", "SUB", "NOP", "NOP"]);
    assert_eq!(field(&text, 8, "read_port"), "-12");
    assert!(fs::read_to_string(&vcd)
        .unwrap()
        .contains("$enddefinitions $end"));

    let again = dir.path().join("u.csv");
    bitsmm(&[
        "trace",
        "--a",
        "6",
        "--b",
        "-2",
        "--width",
        "4",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn trace_defaults_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested");
    let out = Command::new(env!("CARGO_BIN_EXE_bitsmm"))
        .args([
            "trace", "--topo", "4x2", "--n", "3", "--width", "5", "--seed", "9", "--probe", "1,3",
        ])
        .env("BITSMM_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = trace_rows(&target.join("trace.csv"));
    // fill + compute + readout for a 2x4 array at n = 3, width 5
    assert_eq!(rows.len() - 1, 4 + 20 + 8);
}

#[test]
fn bad_probe_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = bitsmm(&[
        "trace",
        "--topo",
        "2x2",
        "--n",
        "2",
        "--width",
        "4",
        "--seed",
        "1",
        "--probe",
        "5,0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
