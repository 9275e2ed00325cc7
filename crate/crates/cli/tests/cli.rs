use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use dhm_cli::config::RunConfig;
use dhm_cli::fieldfile::{FieldFile, FieldFileError, HEADER_LEN};
use dhm_cli::scenario;
use dhm_core::DomainChart;

fn dhm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhm")).args(args).current_dir(dir).env("DHM_THREADS", "2").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const SMALL_TWISTOR: &str = "[chart]\nn = 32\n[scenario]\nkind = twistor\nnumerator = 0.1-0.1i, 1+0.2i\npsi1 = 0.3i, 0.2\n";

#[test]
fn field_files_round_trip_bit_exactly() {
    let cfg = RunConfig::parse(SMALL_TWISTOR).unwrap();
    let (phi, psi) = scenario::build(&cfg, 32).unwrap();
    for file in [FieldFile::from_map(&phi), FieldFile::from_spinor(&psi, phi.target())] {
        let bytes = file.encode();
        let back = FieldFile::decode(&bytes).unwrap();
        assert_eq!(back.encode(), bytes);
        assert!(back.payload.iter().zip(&file.payload).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
    let chart = Arc::new(FieldFile::from_map(&phi).header.chart().unwrap());
    let phi2 = FieldFile::decode(&FieldFile::from_map(&phi).encode()).unwrap().to_map(chart.clone()).unwrap();
    let psi2 =
        FieldFile::decode(&FieldFile::from_spinor(&psi, phi.target()).encode()).unwrap().to_spinor(chart).unwrap();
    assert_eq!(phi2.comps(), phi.comps());
    assert_eq!(psi2.comps(), psi.comps());
}

#[test]
fn payload_layout_is_node_major() {
    let chart = Arc::new(DomainChart::torus(8, 1.0).unwrap());
    let cfg = RunConfig::parse("[scenario]\nkind = random\n").unwrap();
    let (phi, psi) = dhm_core::exact::random_smooth_pair(chart, cfg.target, 3).unwrap();
    let m = FieldFile::from_map(&phi);
    assert_eq!(m.payload[3 * 9 + 2], phi.comps()[2][9]);
    let s = FieldFile::from_spinor(&psi, phi.target());
    let node = 11;
    let parts = psi.comps()[1][node].parts();
    assert_eq!(&s.payload[12 * node + 4..12 * node + 8], &parts);
}

#[test]
fn malformed_headers_have_distinct_codes() {
    let cfg = RunConfig::parse(SMALL_TWISTOR).unwrap();
    let (phi, _) = scenario::build(&cfg, 16).unwrap();
    let good = FieldFile::from_map(&phi).encode();
    let code = |bytes: &[u8]| FieldFile::decode(bytes).unwrap_err().code();
    let patched = |offset: usize, value: &[u8]| {
        let mut b = good.clone();
        b[offset..offset + value.len()].copy_from_slice(value);
        b
    };
    let mut codes = vec![
        code(&good[..40]),
        code(&patched(0, b"DHM2")),
        code(&patched(4, &7u16.to_le_bytes())),
        code(&patched(6, &[9])),
        code(&patched(7, &[9])),
        code(&patched(8, &[9])),
        code(&patched(12, &2u32.to_le_bytes())),
        code(&patched(36, &5u32.to_le_bytes())),
        code(&good[..good.len() - 8]),
        code(&patched(HEADER_LEN + 3, &[0xff])),
    ];
    assert_eq!(
        codes,
        [
            "E_TRUNCATED",
            "E_MAGIC",
            "E_VERSION",
            "E_TOPOLOGY",
            "E_KIND",
            "E_TARGET",
            "E_HEADER",
            "E_LAYOUT",
            "E_LENGTH",
            "E_CHECKSUM"
        ]
    );
    codes.sort();
    codes.dedup();
    assert_eq!(codes.len(), 10);
    assert!(matches!(FieldFile::decode(&patched(0, b"XXXX")), Err(FieldFileError::BadMagic(_))));
}

#[test]
fn exact_writes_fields_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.cfg", "[scenario]\nkind = constant\nspinor = 1, 0.5i\n[chart]\nn = 16\n");
    let out = dhm(&["exact", "--config", "c.cfg", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("o/summary.json")).unwrap()).unwrap();
    let level = &summary["result"]["levels"][0];
    assert_eq!(level["dirichlet"], 0.0);
    assert_eq!(level["action"], 0.0);
    assert_eq!(level["map_residual_sup"], 0.0);
    assert!(tmp.path().join("o/phi.dhm").exists() && tmp.path().join("o/psi.dhm").exists());
}

#[test]
fn config_errors_exit_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "bad.cfg", "seed = 1\n[chart]\nn = 16\ncolour = red\n");
    let out = dhm(&["exact", "--config", "bad.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("colour"), "{err}");
}

#[test]
fn verify_and_flow_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.cfg", SMALL_TWISTOR);
    write(
        tmp.path(),
        "f.cfg",
        "seed = 5\n[chart]\nn = 16\nside = 1.0\nwindow = none\n[scenario]\nkind = perturbation\nspinor = 0.6, 0.3i\n[solver]\nmax_iters = 50\n",
    );
    let run = |args: &[&str]| {
        let out = dhm(args, tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    assert_eq!(run(&["verify", "--config", "t.cfg"]), run(&["verify", "--config", "t.cfg"]));
    let a = run(&["flow", "--config", "f.cfg", "--out", "a"]);
    let b = run(&["flow", "--config", "f.cfg", "--out", "b"]);
    assert_eq!(a, b);
    for f in ["trace.csv", "phi.dhm", "psi.dhm", "flow.json"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn verify_from_files_checks_chart_compatibility() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.cfg", SMALL_TWISTOR);
    for (dir, n) in [("c", "32"), ("f", "64"), ("x", "48")] {
        let out = dhm(&["exact", "--config", "t.cfg", "--grid", n, "--out", dir], tmp.path());
        assert!(out.status.success());
    }
    let ok = dhm(&["verify", "--coarse", "c", "--fine", "f"], tmp.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = dhm(&["verify", "--coarse", "c", "--fine", "x"], tmp.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("incompatible charts"));
}

#[test]
fn verify_fails_on_random_fields() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "r.cfg", "[chart]\nn = 64\n[scenario]\nkind = random\n");
    let out = dhm(&["verify", "--config", "r.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pass = |name: &str| {
        report["result"]["identities"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap()["pass"].as_bool().unwrap()
    };
    assert!(pass("self_adjointness") && pass("weitzenboeck"));
    assert!(!pass("em_divergence") && !pass("hopf_holomorphy") && !pass("el_map_residual"));
}

#[test]
fn probe_tables() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.cfg", "[scenario]\nkind = constant\nspinor = 0, 0\n[chart]\nn = 32\n");
    write(tmp.path(), "t.cfg", SMALL_TWISTOR);
    assert!(dhm(&["exact", "--config", "c.cfg", "--out", "c"], tmp.path()).status.success());
    assert!(dhm(&["exact", "--config", "t.cfg", "--out", "t"], tmp.path()).status.success());
    let table = |dir: &str| -> Vec<Vec<f64>> {
        let out = dhm(&["probe", "--fields", dir], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap().lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
    };
    for row in table("c") {
        assert!(row[1..].iter().all(|v| *v == 0.0), "{row:?}");
    }
    let t = table("t");
    assert!(t.len() >= 3);
    assert!(t.windows(2).all(|w| w[1][9] >= w[0][9]));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dhm")).args(["exact"]).current_dir(tmp.path()).env("DHM_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
