use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use transducer_core::coupling::FieldKind;
use transducer_core::{
    Complex64, Grid3D, MaterialTensorSet, ModeField, SweepResult, TransducerParams,
};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transducer"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn read_json(p: &Path) -> Value {
    json(&std::fs::read(p).unwrap())
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn optimize_reports_the_optimum() {
    let v = json(&ok(&["optimize"]));
    let eta = v["max_efficiency"].as_f64().unwrap();
    assert!((eta - 0.4685).abs() < 1e-3, "{eta}");
    let c = &v["cooperativities"];
    let (com, c12) = (c["c_om"].as_f64().unwrap(), c["c_12"].as_f64().unwrap());
    assert!((com - c12 - 1.0).abs() < 1e-9 * com);
    assert!(v["critical_photon_number"].as_f64().unwrap() > 0.0);
}

#[test]
fn presets_change_the_optimum() {
    let nominal = json(&ok(&["optimize"]))["max_efficiency"].as_f64().unwrap();
    let lowloss = json(&ok(&["optimize", "--preset", "5gem-5kex2-10G-lowloss"]))["max_efficiency"]
        .as_f64()
        .unwrap();
    assert!(lowloss > 0.9 && lowloss > nominal);
}

#[test]
fn params_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let file = p(&dir, "p.json");
    std::fs::write(&file, TransducerParams::nominal().to_json_string().unwrap()).unwrap();
    assert_eq!(ok(&["optimize", "--params", &file]), ok(&["optimize"]));
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = run(&["optimize", "--preset", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: invalid-parameter:"));

    let file = p(&dir, "bad.json");
    let mut v: Value =
        serde_json::from_str(&TransducerParams::nominal().to_json_string().unwrap()).unwrap();
    v["kappa_1_hz"] = Value::from(-1.0);
    std::fs::write(&file, v.to_string()).unwrap();
    assert_eq!(run(&["optimize", "--params", &file]).status.code(), Some(2));

    v["kappa_1_hz"] = Value::from(1e9);
    v["g_bar_hz"] = Value::from(0.0);
    std::fs::write(&file, v.to_string()).unwrap();
    let out = run(&["optimize", "--params", &file]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("undefined-optimum"));

    assert_eq!(
        run(&["optimize", "--params", &p(&dir, "missing.json")])
            .status
            .code(),
        Some(2)
    );
    let coarse = run(&["spectrum", "--out", &p(&dir, "s.csv"), "--grid-points", "3"]);
    assert_eq!(coarse.status.code(), Some(2));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn spectrum_writes_csv_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "spec.csv");
    ok(&["spectrum", "--out", &out, "--grid-points", "4001"]);
    let sweep = SweepResult::from_csv_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sweep.columns, ["frequency_hz", "efficiency"]);
    assert_eq!(sweep.rows.len(), 4001);
    let side = read_json(&dir.path().join("spec.json"));
    for key in [
        "peak_shift_mhz",
        "fwhm_mhz",
        "broad_peak",
        "peak_efficiency",
        "params",
    ] {
        assert!(!side[key].is_null(), "{key}");
    }
    let peak = sweep.rows.iter().map(|r| r[1]).fold(0.0, f64::max);
    assert!((peak - side["peak_efficiency"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    ok(&["spectrum", "--out", &a, "--grid-points", "2001"]);
    ok(&["spectrum", "--out", &b, "--grid-points", "2001"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    let args = [
        "contour",
        "--gem-grid-points",
        "9",
        "--kex2-grid-points",
        "7",
    ];
    assert_eq!(ok(&args), ok(&args));
    assert_eq!(ok(&["efficiency-curve"]), ok(&["efficiency-curve"]));
}

#[test]
fn contour_centre_matches_optimize() {
    let eta = json(&ok(&["optimize"]))["max_efficiency"].as_f64().unwrap();
    let s = SweepResult::from_csv_str(&String::from_utf8(ok(&["contour"])).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 41 * 41);
    let centre = s.rows[20 * 41 + 20][2];
    // twelve significant digits in the CSV
    assert!((centre - eta).abs() < 1e-10 * eta, "{centre} vs {eta}");
}

#[test]
fn efficiency_curve_has_one_peak() {
    let s =
        SweepResult::from_csv_str(&String::from_utf8(ok(&["efficiency-curve"])).unwrap()).unwrap();
    assert_eq!(s.columns, ["power_w", "intra_ring_photons", "efficiency"]);
    let eta: Vec<f64> = s.rows.iter().map(|r| r[2]).collect();
    let turns = eta
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count();
    assert_eq!(turns, 1);
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "c.csv");
    ok(&[
        "efficiency-curve",
        "--grid-start",
        "1e-3",
        "--grid-stop",
        "1",
        "--grid-points",
        "11",
        "--out",
        &out,
    ]);
    let s = SweepResult::from_csv_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 11);
    assert!((s.rows[0][0] - 1e-3).abs() < 1e-15 && (s.rows[10][0] - 1.0).abs() < 1e-12);
}

#[test]
fn rings_sidecar_lists_critical_points() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "r.csv");
    ok(&[
        "rings",
        "--round-trip-s",
        "1e-10",
        "--j-hz",
        "1e9",
        "--loss",
        "0.999",
        "--bus",
        "0.02",
        "--grid-points",
        "3001",
        "--wavelength-m",
        "1.55e-6",
        "--n-eff-sym",
        "1.90",
        "--n-eff-asym",
        "1.89",
        "--out",
        &out,
    ]);
    let s = SweepResult::from_csv_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s.rows.len(), 3001);
    assert!(s.rows.iter().all(|r| (0.0..=1.0).contains(&r[1])));
    let side = read_json(&dir.path().join("r.json"));
    let crit = side["critical_frequencies"].as_array().unwrap();
    let f: Vec<f64> = crit
        .iter()
        .map(|c| c["frequency_hz"].as_f64().unwrap())
        .collect();
    assert!(f.windows(2).all(|w| w[0] <= w[1]));
    assert!(f.iter().any(|&x| (x - 4e9).abs() < 1.0) && f.iter().any(|&x| (x - 6e9).abs() < 1.0));
    let lc = side["coupler"]["beat_length_m"].as_f64().unwrap();
    assert!((lc - 1.55e-6 / 0.02).abs() < 1e-12);
}

#[test]
fn materials_ranking_and_filter() {
    let csv = String::from_utf8(ok(&["materials", "--rank", "om"])).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "rank,name,fom,undefined_reason,fab");
    assert!(lines.next().unwrap().starts_with("1,BaTiO3,"));
    let em = String::from_utf8(ok(&["materials", "--rank", "em"])).unwrap();
    assert!(em.lines().nth(1).unwrap().starts_with("1,AlN,"));
    let all = String::from_utf8(ok(&["materials"])).unwrap();
    assert_eq!(all.lines().count(), 26);
    let proven = String::from_utf8(ok(&["materials", "--fab", "proven"])).unwrap();
    assert!(proven.lines().count() < 26);
    assert!(proven.lines().skip(1).all(|l| l.ends_with(",yes")));
    assert_eq!(run(&["materials", "--rank", "xx"]).status.code(), Some(2));
}

#[test]
fn materials_custom_data() {
    let dir = TempDir::new().unwrap();
    let file = p(&dir, "m.csv");
    let bundled = transducer_core::materials::bundled_csv();
    let mut lines: Vec<&str> = bundled.lines().collect();
    lines.truncate(3);
    std::fs::write(&file, lines.join("\n") + "\n").unwrap();
    let out = String::from_utf8(ok(&["materials", "--data", &file])).unwrap();
    assert_eq!(out.lines().count(), 3);
    std::fs::write(&file, "not,a,table\n1,2\n").unwrap();
    assert_eq!(run(&["materials", "--data", &file]).status.code(), Some(2));
}

#[test]
fn coupling_from_field_files() {
    let dir = TempDir::new().unwrap();
    let grid = Grid3D::periodic_box([1e-6, 1e-6, 2e-6], [3, 3, 256]).unwrap();
    let q = TAU / 2e-6;
    let (z, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let (we, wm) = (1.2e15, 2.0e10);
    let e = ModeField::plane_wave(
        grid,
        FieldKind::Electromagnetic,
        we,
        [z, z, one],
        [0.0, 0.0, -q],
    )
    .unwrap();
    let w =
        ModeField::plane_wave(grid, FieldKind::Mechanical, wm, [z, z, one], [0.0, 0.0, q]).unwrap();
    let mut mat = MaterialTensorSet::isotropic(4650.0, 4.0);
    mat.h[2][2] = Some(2.0e9);
    let (ef, mf, tf) = (p(&dir, "e.csv"), p(&dir, "m.csv"), p(&dir, "t.json"));
    e.write_csv(std::fs::File::create(&ef).unwrap()).unwrap();
    w.write_csv(std::fs::File::create(&mf).unwrap()).unwrap();
    std::fs::write(&tf, serde_json::to_string(&mat).unwrap()).unwrap();

    let v = json(&ok(&[
        "coupling",
        "--em",
        &ef,
        "--mech",
        &mf,
        "--material",
        &tf,
        "--component",
        "3,3,3",
    ]));
    let closed = -(we / wm).sqrt() * 2.0e9 * q / (4.0 * (mat.eta_eff() * mat.rho).sqrt()) / TAU;
    let g = v["piezo_component"]["g_hz"]["re"].as_f64().unwrap();
    // second-order stencil on 256 points: about 1e-4 relative
    assert!((g - closed).abs() < 1e-3 * closed.abs(), "{g} vs {closed}");
    assert!((v["piezo_total_hz"]["re"].as_f64().unwrap() - g).abs() < 1e-9 * g.abs());
    assert!((v["v_mech_m3"].as_f64().unwrap() - 2e-18).abs() < 1e-27);

    mat.h[2][2] = None;
    std::fs::write(&tf, serde_json::to_string(&mat).unwrap()).unwrap();
    let out = run(&["coupling", "--em", &ef, "--mech", &mf, "--material", &tf]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("h_33"));
}

#[test]
fn failed_write_leaves_no_partial_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("nested/missing/s.csv");
    let r = run(&[
        "spectrum",
        "--out",
        out.to_str().unwrap(),
        "--grid-points",
        "2001",
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).starts_with("error: io:"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn spectrum_defaults_to_working_directory() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_transducer"))
        .args(["spectrum", "--preset", "nominal", "--grid-points", "2001"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let side = read_json(&dir.path().join("spectrum.json"));
    assert_eq!(side["preset"], "nominal");
    assert!(dir.path().join("spectrum.csv").exists());
}
