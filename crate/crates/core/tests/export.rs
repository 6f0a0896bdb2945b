use std::process::Command;

use dlin::lpbuild::{build_delsarte, build_delsarte_lin, VariantSpec};
use dlin::solver::{export_lp, write_lp, ExportFormat, ExportOptions};

fn highs_available() -> bool {
    Command::new("python3").args(["-c", "import highspy"]).output().is_ok_and(|o| o.status.success())
}

/// Objective value reported by HiGHS, or `None` when it is not installed.
fn external_optimum(path: &std::path::Path) -> Option<f64> {
    if !highs_available() {
        eprintln!("highspy not installed; skipping external solve of {}", path.display());
        return None;
    }
    let script = format!(
        "import highspy\nh = highspy.Highs()\nh.setOptionValue('output_flag', False)\n\
         assert h.readModel({:?}) == highspy.HighsStatus.kOk\nh.run()\n\
         assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal\n\
         print(h.getInfo().objective_function_value)\n",
        path.to_str().unwrap()
    );
    let out = Command::new("python3").args(["-c", &script]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Some(String::from_utf8(out.stdout).unwrap().trim().parse().unwrap())
}

#[test]
fn exports_are_byte_identical() {
    let m = build_delsarte_lin(2, 10, 4, VariantSpec::default()).unwrap();
    for format in [ExportFormat::Lp, ExportFormat::Mps] {
        let a = write_lp(&m, format, &ExportOptions::default()).unwrap();
        let b = write_lp(&build_delsarte_lin(2, 10, 4, VariantSpec::default()).unwrap(), format, &ExportOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.is_ascii());
        assert!(!a.contains('\r'));
    }
}

#[test]
fn classic_program_solves_externally() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_delsarte(13, 6).unwrap();
    for format in [ExportFormat::Lp, ExportFormat::Mps] {
        let path = dir.path().join(format!("delsarte.{}", format.extension()));
        export_lp(&m, format, &path, &ExportOptions::default()).unwrap();
        if let Some(v) = external_optimum(&path) {
            assert!((v - 40.0).abs() < 1e-6, "{format:?}: {v}");
        }
    }
}

#[test]
fn r2_n20_d8_solves_externally() {
    let dir = tempfile::tempdir().unwrap();
    let m = build_delsarte_lin(2, 20, 8, VariantSpec::default()).unwrap();
    for format in [ExportFormat::Lp, ExportFormat::Mps] {
        let path = dir.path().join(format!("m.{}", format.extension()));
        export_lp(&m, format, &path, &ExportOptions::default()).unwrap();
        if let Some(v) = external_optimum(&path) {
            assert!((v - 256.0).abs() < 1e-6, "{format:?}: {v}");
        }
    }
}
