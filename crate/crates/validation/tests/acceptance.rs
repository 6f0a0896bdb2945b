//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::path::PathBuf;
use std::process::Command;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dlin::krawtchouk::{check_orthogonality, check_symmetries};
use dlin::lpbuild::{build_delsarte, build_delsarte_lin, ConstraintMode, VariantSpec};
use dlin::oracle::{
    optimum, verify_contingency_agreement, verify_dual_lift, verify_even_reduction, verify_fourier_symmetries,
    verify_gl_consequences, verify_level_set_identity, verify_strength_theorems, verify_symmetrization_equivalence,
    verify_tensor_feasibility, verify_univariate, LinearCode, Report, Sampling, StrengthOptions,
};
use dlin::rational::{fraction_string, ratio, to_f64};
use dlin::Rational;

/// Tolerance on classic Delsarte values against the printed (rounded) table.
const CLASSIC_TOL: f64 = 0.5;
/// Tolerance on two-decimal r = 2 values.
const DECIMAL_TOL: f64 = 0.01;
/// Tolerance on the (17, 4) target.
const N17_D4_TOL: f64 = 1.0;
const CLASSIC_TIME: Duration = Duration::from_secs(1);
const R2_TIME: Duration = Duration::from_secs(30 * 60);
const EQUIVALENCE_TIME: Duration = Duration::from_secs(10 * 60);
const SEED: u64 = 2024;
const R3_SAMPLES: usize = 24;

struct Outcome {
    lines: Vec<(bool, String)>,
}

impl Outcome {
    fn record(&mut self, id: &str, ok: bool, what: &str, detail: String) {
        let line = format!("{} [{id}] {what}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((ok, line));
    }

    fn note(&self, id: &str, ok: bool, what: &str, detail: String) {
        println!("{} [{id}] {what} (informational): {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

/// The `dlin` binary next to this test executable, built on demand when this
/// package is tested on its own.
fn dlin_binary() -> PathBuf {
    if let Some(p) = std::env::var_os("DLIN_BIN") {
        return p.into();
    }
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|deps| deps.parent()).expect("target/<profile>/deps");
    let bin = profile_dir.join(format!("dlin{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let profile = match profile_dir.file_name().and_then(|s| s.to_str()) {
            Some("debug") | None => "dev",
            Some(other) => other,
        };
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "dlin-cli", "--bin", "dlin", "--profile", profile])
            .status()
            .unwrap();
        assert!(status.success(), "building dlin failed");
    }
    bin
}

/// Exact value reported by `dlin bound --output json`, and the elapsed time.
fn cli_bound(args: &[&str]) -> (Option<Rational>, Duration) {
    let started = Instant::now();
    let out = Command::new(dlin_binary())
        .arg("bound")
        .args(args)
        .args(["--output", "json"])
        .env_remove("DLIN_CACHE_DIR")
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    if !out.status.success() {
        eprintln!("dlin bound {args:?}: {}", String::from_utf8_lossy(&out.stderr));
        return (None, elapsed);
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = format!("{}/{}", v["value"]["num"].as_str().unwrap(), v["value"]["den"].as_str().unwrap());
    (Rational::from_str(&q).ok(), elapsed)
}

fn show(q: &Option<Rational>) -> String {
    q.as_ref().map_or("none".into(), |q| format!("{} ({:.4})", fraction_string(q), to_f64(q)))
}

fn summary(report: &Report) -> String {
    let failed: Vec<String> = report.failures().take(3).map(|e| format!("{} [{}]", e.check, e.params)).collect();
    if failed.is_empty() {
        format!("{} checks, {} comparisons", report.len(), report.comparisons())
    } else {
        format!("{} checks; failing: {}", report.len(), failed.join(", "))
    }
}

fn merged(parts: impl IntoIterator<Item = dlin::Result<Report>>) -> Report {
    let mut report = Report::new();
    for p in parts {
        match p {
            Ok(r) => report.merge(r),
            Err(e) => report.assert_true("error", "", false, e.to_string()),
        }
    }
    report
}

fn within(q: &Option<Rational>, target: f64, tol: f64) -> bool {
    q.as_ref().is_some_and(|q| (to_f64(q) - target).abs() <= tol)
}

#[test]
fn acceptance() {
    let mut out = Outcome { lines: Vec::new() };

    // 1. Classic Delsarte through the command line.
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, d, target) in [(20, 6, 2373.0), (20, 8, 291.0), (22, 8, 1024.0), (24, 10, 280.0), (13, 6, 40.0)] {
        let (q, t) = cli_bound(&["-r", "1", "-n", &n.to_string(), "-d", &d.to_string()]);
        ok &= within(&q, target, CLASSIC_TOL) && t < CLASSIC_TIME;
        detail.push(format!("({n},{d})={} vs {target} in {:.2}s", show(&q), t.as_secs_f64()));
    }
    out.record("1", ok, "classic Delsarte", detail.join("; "));

    // 2. r = 2, C2/Obj, through the command line.
    let mut r2 = Vec::new();
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, d, target, tol) in [
        (13, 6, 24.26, DECIMAL_TOL),
        (16, 6, 131.72, DECIMAL_TOL),
        (17, 6, 256.0, 0.0),
        (16, 8, 32.0, 0.0),
        (17, 4, 3075.0, N17_D4_TOL),
    ] {
        let (q, t) = cli_bound(&["-r", "2", "-n", &n.to_string(), "-d", &d.to_string()]);
        let hit = if tol == 0.0 { q == Some(ratio(target as i64, 1)) } else { within(&q, target, tol) };
        ok &= hit && t < R2_TIME;
        detail.push(format!("({n},{d})={} vs {target}±{tol} in {:.1}s{}", show(&q), t.as_secs_f64(), if hit { "" } else { " MISS" }));
        r2.push(((n, d), q));
    }
    out.record("2", ok, "DelsarteLin r=2 C2/Obj", detail.join("; "));
    let n17 = r2.iter().find(|(k, _)| *k == (17, 4)).and_then(|(_, q)| q.clone());
    out.note("2", within(&n17, 3072.96, DECIMAL_TOL), "(17,4) against the DelsarteLin column 3072.96", show(&n17));

    // 3. C2 <= C2' <= Delsarte on every internally solved instance.
    let mut ok = true;
    let mut detail = Vec::new();
    let weak = VariantSpec { constraint_mode: ConstraintMode::C2Weak, ..VariantSpec::default() };
    for ((n, d), c2) in &r2 {
        let w = build_delsarte_lin(2, *n, *d, weak).and_then(|m| optimum(&m)).map(|v| v.0);
        let classic = build_delsarte(*n, *d).and_then(|m| optimum(&m)).map(|v| v.0);
        let hit = match (c2, &w, &classic) {
            (Some(c2), Ok(w), Ok(cl)) => c2 <= w && w <= cl,
            _ => false,
        };
        ok &= hit;
        let fmt = |r: &dlin::Result<Rational>| r.as_ref().map_or("error".into(), |q| format!("{:.2}", to_f64(q)));
        detail.push(format!("({n},{d}) {:.2} <= {} <= {}", c2.as_ref().map_or(f64::NAN, to_f64), fmt(&w), fmt(&classic)));
    }
    out.record("3", ok, "variant ordering", detail.join("; "));

    // 4. Cube primal = symmetrized = fused = cube dual.
    let started = Instant::now();
    let equivalence = merged([(1, 3, 2), (1, 4, 2), (2, 3, 2)].map(|(r, n, d)| verify_symmetrization_equivalence(r, n, d)));
    let t = started.elapsed();
    out.record(
        "4",
        equivalence.all_passed() && t < EQUIVALENCE_TIME,
        "oracle equivalence",
        format!("{} in {:.1}s", summary(&equivalence), t.as_secs_f64()),
    );

    // 5. Krawtchouk identities.
    let mut parts = Vec::new();
    for r in 1..=2 {
        for n in 1..=6 {
            parts.push(check_orthogonality(r, n));
            parts.push(verify_contingency_agreement(r, n));
        }
        for n in 1..=4 {
            parts.push(verify_level_set_identity(r, n));
        }
    }
    parts.extend((1..=8).map(verify_univariate));
    let kraw = merged(parts);
    out.record("5", kraw.all_passed(), "Krawtchouk properties", summary(&kraw));

    // 6. Symmetry propositions.
    let mut parts = Vec::new();
    for n in 1..=3 {
        parts.push(verify_fourier_symmetries(2, n, Sampling::Exhaustive, SEED));
        parts.push(verify_gl_consequences(2, n, Sampling::Exhaustive, SEED));
        parts.push(verify_fourier_symmetries(3, n, Sampling::Random { samples: R3_SAMPLES }, SEED));
        parts.push(verify_gl_consequences(3, n, Sampling::Random { samples: R3_SAMPLES }, SEED));
        parts.push(check_symmetries(2, n));
        parts.push(check_symmetries(3, n));
    }
    let sym = merged(parts);
    out.record("6", sym.all_passed(), "symmetry propositions", summary(&sym));

    // 7. Theorem orderings.
    let mut parts = Vec::new();
    for n in 2..=4 {
        for d in 2..=n {
            parts.push(verify_strength_theorems(n, d, StrengthOptions::default()));
        }
    }
    let repetition = LinearCode::from_generator(&[0b111], 3).unwrap();
    let even = LinearCode::from_generator(&[0b0011, 0b0110, 0b1100], 4).unwrap();
    parts.push(verify_tensor_feasibility(&repetition, 2, 3));
    parts.push(verify_tensor_feasibility(&even, 2, 2));
    for r in 1..=2 {
        for n in 2..=10 {
            for d in (2..=n).step_by(2) {
                parts.push(verify_even_reduction(r, n, d));
            }
        }
    }
    let mut theorems = merged(parts);
    let r2_13_6 = r2.iter().find(|(k, _)| *k == (13, 6)).and_then(|(_, q)| q.clone());
    let classic = build_delsarte(13, 6).and_then(|m| optimum(&m)).map(|v| v.0).ok();
    let mono = matches!((&r2_13_6, &classic), (Some(a), Some(b)) if a <= b);
    theorems.assert_true("r_monotone_symmetrized", "n=13 d=6", mono, format!("{} <= {}", show(&r2_13_6), show(&classic)));
    let cube_mono = theorems.entries().iter().filter(|e| e.check == "strength.r_monotone_cube").count();
    out.record(
        "7",
        theorems.all_passed() && cube_mono > 0,
        "theorem orderings",
        format!("{}; {cube_mono} cube-scale r-monotonicity checks", summary(&theorems)),
    );

    // 8. Strong duality and dual lifting.
    let duality: Vec<_> = equivalence.entries().iter().filter(|e| e.check == "equivalence.primal_vs_dual").cloned().collect();
    let lift = merged([verify_dual_lift(1, 3, 2)]);
    let names = ["dual.lift_feasible", "dual.lift_value"];
    let lifted = names.iter().all(|c| lift.entries().iter().any(|e| e.check == *c));
    let dual_ok = duality.len() == 3 && duality.iter().all(|e| e.status == dlin::oracle::Status::Pass);
    out.record(
        "8",
        dual_ok && lift.all_passed() && lifted,
        "dual machinery",
        format!("{} strong-duality equalities; lift 1->2 n=3 d=2: {}", duality.len(), summary(&lift)),
    );

    let failed: Vec<&String> = out.lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "{} criteria failed:\n{}", failed.len(), failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n"));
}
