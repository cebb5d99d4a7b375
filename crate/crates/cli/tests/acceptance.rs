//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use lieblab::conjugate::{mollify, ConjugateDirection, ConjugateFn, SearchConfig};
use lieblab::lieb::{
    epstein_probe, epstein_tolerance, epstein_value, lieb_trace, perturbed_candidates, variational_inf,
    variational_sup, LiebSpec, LineSegment, PosLinMap, EPSTEIN_STEP,
};
use lieblab::matrix::{random_posdef_with, HermMatrix, PosDefMatrix, TrialRng};
use lieblab::scalar::{FnClass, ScalarFn};
use lieblab::verifier::{compression_counterexample, DIRECT_TOL};
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Outcome = Result<String, String>;

fn lieblab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lieblab"))
        .args(args)
        .env_remove("LIEBLAB_SUITE_DIR")
        .output()
        .expect("binary runs")
}

/// Runs a suite with the report written to `out`, returning the parsed
/// report and the wall-clock time.
fn run_suite(args: &[&str], out: &Path) -> Result<(Value, Duration), String> {
    let mut full = vec!["verify"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let start = Instant::now();
    let output = lieblab(&full);
    let elapsed = start.elapsed();
    let code = output.status.code();
    let report: Value = std::fs::read_to_string(out)
        .map_err(|e| format!("no report ({e}); stderr: {}", String::from_utf8_lossy(&output.stderr)))
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))?;
    let passed = report["passed"].as_bool() == Some(true);
    if passed != (code == Some(0)) {
        return Err(format!("exit code {code:?} disagrees with report passed = {passed}"));
    }
    Ok((report, elapsed))
}

fn points(report: &Value) -> &Vec<Value> {
    report["points"].as_array().expect("points array")
}

fn violations(report: &Value) -> u64 {
    points(report).iter().map(|p| p["violations"].as_u64().unwrap()).sum()
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1(dir: &Path) -> Outcome {
    let (report, elapsed) = run_suite(&["thm2.1", "--seed", "42"], &dir.join("thm2_1_a.json"))?;
    let pts = points(&report);
    let trials_ok = pts.iter().all(|p| p["trials"].as_u64() == Some(1000));
    let concave: Vec<&Value> = pts.iter().filter(|p| p["params"]["expected"] == "concave").collect();
    let mirror = concave.iter().filter(|p| p["params"]["p"].as_f64().unwrap() < 0.0).count();
    let picks = concave
        .iter()
        .filter(|p| p["params"]["f"]["kind"] == "compose")
        .count();
    let v = violations(&report);
    require(trials_ok, || "not every point ran 1000 trials".into())?;
    require(mirror > 0 && picks > 0, || format!("grid lacks mirror ({mirror}) or pick ({picks}) points"))?;
    require(v == 0, || format!("{v} violations"))?;
    require(elapsed <= Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} points ({} concave, {mirror} in the negative box, {picks} pick-based), 0 violations in {:.1}s",
        pts.len(),
        concave.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_2(dir: &Path) -> Outcome {
    let (report, _) = run_suite(
        &["falsify", "--p", "1", "--q", "1", "--s", "0.6", "--dims", "2", "--trials", "10000"],
        &dir.join("falsify.json"),
    )?;
    let target = &points(&report)[0];
    let v = target["violations"].as_u64().unwrap();
    let run = target["trials"].as_u64().unwrap();
    require(v >= 1 && run <= 10_000, || format!("{v} violations in {run} trials"))?;
    require(!target["witness"].is_null(), || "no witness recorded".into())?;
    Ok(format!(
        "{v} violations within the first {run} trials, worst gap {:.3e}",
        target["worst_gap"].as_f64().unwrap()
    ))
}

fn criterion_3() -> Outcome {
    let r = compression_counterexample(4.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    require(r.lhs == 2.5 && r.rhs == 1.6, || format!("closed forms gave ({}, {})", r.lhs, r.rhs))?;
    require(r.direct_deviation <= DIRECT_TOL, || format!("direct deviation {:e}", r.direct_deviation))?;
    let out = lieblab(&["counterexample", "remark4.6", "--t", "4", "--p", "1", "--s", "1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    require(text.trim() == "lhs=2.5 rhs=1.6 VIOLATED", || format!("CLI printed {text:?}"))?;
    Ok(format!("(lhs, rhs) = (2.5, 1.6), direct deviation {:.1e}", r.direct_deviation))
}

fn criterion_4(dir: &Path) -> Outcome {
    let (report, elapsed) = run_suite(&["thm3.1", "--trials", "500"], &dir.join("thm3_1.json"))?;
    let pts = points(&report);
    let (mut concave, mut convex) = (0, 0);
    for p in pts {
        match p["params"]["expected"].as_str() {
            Some("concave") => concave += 1,
            _ => convex += 1,
        }
    }
    let v = violations(&report);
    require(v == 0, || format!("{v} violations"))?;
    Ok(format!(
        "{concave} anti-norm concavity and {convex} norm convexity points at 500 trials, 0 violations in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn sup_error(f: &ScalarFn, direction: ConjugateDirection) -> Result<f64, String> {
    let once = ConjugateFn::new(f.clone(), direction, SearchConfig::default()).map_err(|e| e.to_string())?;
    let twice =
        ConjugateFn::unscreened(once.to_scalar_fn(), direction, SearchConfig::default()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=99 {
        let x = 0.1 + 9.9 * i as f64 / 99.0;
        let v = twice.eval(x).map_err(|e| format!("{}: {e}", f.label()))?;
        worst = worst.max((v - f.eval(x)).abs());
    }
    Ok(worst)
}

fn criterion_5() -> Outcome {
    let up_convex = FnClass::NON_DECREASING | FnClass::CONVEX;
    let convex = [
        ScalarFn::power(2.0),
        ScalarFn::custom("x^3/3", up_convex, |x| x.powi(3) / 3.0),
        ScalarFn::custom("x^2+x", up_convex, |x| x * x + x),
    ];
    let concave = [ScalarFn::power(0.5), ScalarFn::power(0.3), ScalarFn::log()];
    let mut worst = 0.0f64;
    for f in &convex {
        let e = sup_error(f, ConjugateDirection::Hat)?;
        require(e <= 1e-4, || format!("hat(hat({})) off by {e:e}", f.label()))?;
        worst = worst.max(e);
    }
    for f in &concave {
        let e = sup_error(f, ConjugateDirection::Check)?;
        require(e <= 1e-4, || format!("check(check({})) off by {e:e}", f.label()))?;
        worst = worst.max(e);
    }
    let hat = ConjugateFn::new(ScalarFn::power(2.0), ConjugateDirection::Hat, SearchConfig::default()).unwrap();
    let check = ConjugateFn::new(ScalarFn::power(0.5), ConjugateDirection::Check, SearchConfig::default()).unwrap();
    let mut spot = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        spot = spot.max((hat.eval(t).unwrap() - t * t / 4.0).abs());
        spot = spot.max((check.eval(t).unwrap() + 1.0 / (4.0 * t)).abs());
    }
    require(spot <= 1e-6, || format!("closed-form spot checks off by {spot:e}"))?;
    Ok(format!("worst involution error {worst:.1e}, worst spot-check error {spot:.1e}"))
}

fn random_instance(rng: &mut TrialRng, n: usize) -> (PosLinMap, PosLinMap, PosDefMatrix, PosDefMatrix, f64, f64) {
    let phi = PosLinMap::random(rng, n, n, 2).unwrap();
    let psi = PosLinMap::random(rng, n, n, 2).unwrap();
    let a = random_posdef_with(rng, n, 100.0);
    let b = random_posdef_with(rng, n, 100.0);
    let p = rng.random_range(-1.0..1.0);
    let q = rng.random_range(-1.0..1.0);
    (phi, psi, a, b, p, q)
}

fn criterion_6() -> Outcome {
    let inf_fns = [ScalarFn::power(0.5), ScalarFn::power(0.3), ScalarFn::log()];
    let sup_fns = [ScalarFn::power(2.0), ScalarFn::power(1.5)];
    let (mut slack, mut at_opt) = (f64::INFINITY, 0.0f64);
    let mut count = 0;
    for n in [2, 3] {
        for i in 0..50u64 {
            let mut rng = TrialRng::seed_from_u64(1000 * n as u64 + i);
            let (phi, psi, a, b, p, q) = random_instance(&mut rng, n);
            for (fs, is_inf) in [(&inf_fns[..], true), (&sup_fns[..], false)] {
                let f = fs[i as usize % fs.len()].clone();
                let spec = LiebSpec::new(f, phi.clone(), psi.clone(), p, q).map_err(|e| e.to_string())?;
                let exact = lieb_trace(&spec, &a, &b).map_err(|e| e.to_string())?;
                let opt = lieblab::lieb::variational_optimizer(&spec, &a, &b).map_err(|e| e.to_string())?;
                let mut cands = perturbed_candidates(&mut rng, &opt, 6, 0.3);
                cands.push(PosDefMatrix::identity(n));
                let est = if is_inf {
                    variational_inf(&spec, &a, &b, &cands)
                } else {
                    variational_sup(&spec, &a, &b, &cands)
                }
                .map_err(|e| format!("n={n} i={i}: {e}"))?;
                let scale = 1.0 + exact.abs();
                let margin = if is_inf { est.value - exact } else { exact - est.value } / scale;
                let candidate_margin = est
                    .candidate_values
                    .iter()
                    .map(|&v| if is_inf { v - exact } else { exact - v } / scale)
                    .fold(f64::INFINITY, f64::min);
                slack = slack.min(margin.min(candidate_margin));
                at_opt = at_opt.max((est.at_optimizer - exact).abs() / scale);
                count += 1;
            }
        }
    }
    require(slack >= -1e-6, || format!("an estimate crossed the trace value by {:e}", -slack))?;
    require(at_opt <= 1e-6, || format!("optimizer value off by {at_opt:e}"))?;
    Ok(format!(
        "{count} instances, smallest sandwich slack {slack:.1e}, worst optimizer error {at_opt:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100u64 {
        let mut rng = TrialRng::seed_from_u64(7000 + i);
        let n = 2 + (i % 2) as usize;
        let sign = if i % 4 < 2 { 1.0 } else { -1.0 };
        let p = sign * rng.random_range(0.05..=1.0);
        let q = sign * rng.random_range(0.05..=1.0);
        let phi = PosLinMap::random(&mut rng, n, n, 2).unwrap();
        let psi = PosLinMap::random(&mut rng, n, n, 2).unwrap();
        let spec = LiebSpec::new(ScalarFn::power(1.0), phi, psi, p, q).unwrap();
        let a0 = random_posdef_with(&mut rng, n, 100.0);
        let b0 = random_posdef_with(&mut rng, n, 100.0);
        let seg = LineSegment::random(&mut rng, a0, b0, 0.1).map_err(|e| e.to_string())?;
        for x in [0.01, 0.05, 0.1] {
            let g = epstein_value(&spec, &seg, x).map_err(|e| e.to_string())?;
            let d = epstein_probe(&spec, &seg, x, EPSTEIN_STEP).map_err(|e| e.to_string())?;
            let ratio = d / epstein_tolerance(g);
            worst = worst.max(ratio);
            require(ratio <= 1.0, || format!("segment {i} x={x}: second derivative {d:e}"))?;
        }
    }
    let spec = LiebSpec::identity_maps(ScalarFn::power(1.0), 1, 1.0, 1.0).unwrap();
    let one = || PosDefMatrix::scalar(1, 1.0);
    let unit = || HermMatrix::from_real_diagonal(&[1.0]);
    let seg = LineSegment::new(one(), unit(), one(), unit(), 1.0).unwrap();
    let d = epstein_probe(&spec, &seg, 0.0, EPSTEIN_STEP).unwrap();
    require((d + 0.25).abs() <= 1e-6, || format!("scalar fixture gave {d}"))?;
    Ok(format!(
        "300 probes, largest probe/tolerance ratio {worst:.2}; scalar fixture g''(0) = {d:.9}"
    ))
}

fn criterion_8(dir: &Path) -> Outcome {
    let mut parts = Vec::new();
    for suite in ["thm5.2", "thm5.3", "thm5.4", "range_ii", "thm5.6", "range_iv"] {
        let (report, _) = run_suite(&[suite, "--trials", "500"], &dir.join(format!("{suite}.json")))?;
        let v = violations(&report);
        require(v == 0, || format!("{suite}: {v} violations"))?;
        parts.push(format!("{suite} {}", points(&report).len()));
    }
    Ok(format!("0 violations at 500 trials/point ({} points)", parts.join(", ")))
}

fn criterion_9() -> Outcome {
    let f = ScalarFn::power(2.0);
    let base = ConjugateFn::new(f.clone(), ConjugateDirection::Hat, SearchConfig::default()).unwrap();
    let grid: Vec<f64> = (0..=60).map(|i| 0.5 + 1.5 * i as f64 / 60.0).collect();
    let mut errs = Vec::new();
    for eps in [0.4, 0.2, 0.1, 0.05] {
        let fe = mollify(&f, eps).map_err(|e| e.to_string())?;
        let hat = ConjugateFn::new(fe, ConjugateDirection::Hat, SearchConfig::default()).map_err(|e| e.to_string())?;
        let err = grid
            .iter()
            .map(|&t| (hat.eval(t).unwrap() - base.eval(t).unwrap()).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    require(errs.windows(2).all(|w| w[1] < w[0]), || format!("errors not decreasing: {errs:?}"))?;
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(format!("sup errors {}", shown.join(" > ")))
}

fn without_runtime(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"runtime_ms\""))
        .map(String::from)
        .collect())
}

fn criterion_10(dir: &Path) -> Outcome {
    let first = dir.join("thm2_1_a.json");
    let second = dir.join("thm2_1_b.json");
    run_suite(&["thm2.1", "--seed", "42"], &second)?;
    let (a, b) = (without_runtime(&first)?, without_runtime(&second)?);
    require(a.len() > 100, || "first report missing or too short".into())?;
    let diff = a.iter().zip(&b).position(|(x, y)| x != y);
    require(a.len() == b.len() && diff.is_none(), || {
        format!("reports differ at line {}", diff.map_or(a.len().min(b.len()), |d| d + 1))
    })?;
    Ok(format!("{} report lines identical apart from runtime_ms", a.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 10] = [
        ("thm2.1 suite and mirror box", Box::new(|| criterion_1(d))),
        ("boundary falsification at s = 0.6", Box::new(|| criterion_2(d))),
        ("compression counterexample fixture", Box::new(criterion_3)),
        ("thm3.1 anti-norm and norm suites", Box::new(|| criterion_4(d))),
        ("conjugate involution and closed forms", Box::new(criterion_5)),
        ("variational sandwich", Box::new(criterion_6)),
        ("Epstein probe", Box::new(criterion_7)),
        ("negative-exponent and range suites", Box::new(|| criterion_8(d))),
        ("mollifier convergence", Box::new(criterion_9)),
        ("determinism of thm2.1 reports", Box::new(|| criterion_10(d))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
