//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any FAIL.

mod common;

use common::*;
use srgkit::analysis::Verdict;
use srgkit::models::{self, Relation, ReproduceOptions, Reproduction};
use srgkit::region::DiskAlgebraRegion;
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn run(n: u8) -> (Result<Reproduction, String>, Duration) {
    let t = Instant::now();
    let r = models::reproduce(n, &ReproduceOptions::default()).map_err(|e| e.to_string());
    (r, t.elapsed())
}

fn rows_near(rep: &Reproduction) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &rep.rows {
        let value_ok = match r.relation {
            Relation::Near => r.rel_err().abs() <= 0.10,
            Relation::Below => r.computed < r.reference,
        };
        ok &= value_ok && r.verdict == Verdict::Certified;
        parts.push(format!("{}: {:.4} vs {} ({:?}, {:?})", r.case, r.computed, r.reference, r.relation, r.verdict));
    }
    (ok, parts.join("; "))
}

fn reproduction(n: u8, limit: f64, rep: &(Result<Reproduction, String>, Duration)) -> Outcome {
    let (r, dt) = rep;
    let secs = dt.as_secs_f64();
    match r {
        Err(e) => outcome(false, format!("error: {e}")),
        Ok(rep) => {
            let (ok, detail) = rows_near(rep);
            let mut ok = ok && secs < limit;
            let mut detail = format!("{detail}; {secs:.1} s (limit {limit} s)");
            if n == 2 {
                let table = &rep.reports[0].1.tau_table;
                let min = table.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                ok &= !table.is_empty() && min > 0.0;
                detail.push_str(&format!("; min separation over {} tau values {min:.4}", table.len()));
            }
            outcome(ok, detail)
        }
    }
}

fn soundness() -> Outcome {
    let l = lti_soundness(50, 10_000, 11);
    let s = sector_soundness(20, 10_000, 12);
    outcome(
        l.violations == 0 && s.violations == 0 && l.samples >= 450_000 && s.samples >= 180_000,
        format!(
            "LTI: {} systems, {} samples, {} violations; sectors: {} bounds, {} samples, {} violations",
            l.systems, l.samples, l.violations, s.systems, s.samples, s.violations
        ),
    )
}

fn oracle_consistency(reps: &[&(Result<Reproduction, String>, Duration)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, _) in reps {
        let Ok(rep) = r else {
            ok = false;
            parts.push("reproduction failed".to_string());
            continue;
        };
        for (tag, report) in &rep.reports {
            if report.verdict != Verdict::Certified {
                continue;
            }
            match rep.gains.iter().find(|g| &g.0 == tag) {
                Some((_, g)) => {
                    ok &= g.value <= report.gain_bound;
                    parts.push(format!("{tag}: {:.4} <= {:.4} over {} pairs", g.value, report.gain_bound, g.num_pairs));
                }
                None => {
                    ok = false;
                    parts.push(format!("{tag}: no simulation"));
                }
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn calculus() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    let disks = [(1.0, 0.5), (-2.0, 1.0), (0.0, 1.5), (2.5, 2.0)];
    for &a in &disks {
        for &b in &disks {
            for (alpha, shift) in [(2.0, -1.0), (-0.5, 0.7)] {
                count += 1;
                if let Err(e) = disk_identities(a, b, alpha, shift, 120) {
                    failures.push(format!("identities {a:?} {b:?}: {e}"));
                }
            }
        }
    }
    for (c, r) in [(1.0, 2.0), (-3.0, 0.5), (0.0, 1.0)] {
        count += 1;
        if let Err(e) = circle_chord(c, r, 150) {
            failures.push(format!("chord of circle ({c}, {r}): {e}"));
        }
    }
    let pairs = [
        (annulus(2.0, 1.0, 0.5), annulus(-1.0, 0.8, 0.3)),
        (annulus(-1.5, 1.0, 0.6), DiskAlgebraRegion::disk(0.5, 0.4)),
    ];
    for (a, b) in &pairs {
        count += 1;
        if let Err(e) = improved_inclusions(a, b, 120) {
            failures.push(format!("improved completions: {e}"));
        }
    }
    let detail = if failures.is_empty() { format!("{count} cases") } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn tightness() -> Outcome {
    let ns = [5, 11, 41, 161];
    let r = tightness_trend(&ns, 400);
    let ok = r.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok, format!("rmin for |Y| = {ns:?}: {r:.5?}"))
}

fn loop_transform() -> Outcome {
    let errs = [loop_transform_error(2.0, 3.0), loop_transform_error(0.5, 1.5)];
    outcome(errs.iter().all(|e| *e < 1e-9), format!("max relative error {:.2e}, {:.2e}", errs[0], errs[1]))
}

fn main() {
    let ex1 = run(1);
    let ex2 = run(2);
    let ex3 = run(3);
    let results = [
        ("example 1 reproduction", reproduction(1, 60.0, &ex1)),
        ("example 2 reproduction", reproduction(2, 120.0, &ex2)),
        ("example 3 reproduction", reproduction(3, 60.0, &ex3)),
        ("soundness suite", soundness()),
        ("simulation below certified gain", oracle_consistency(&[&ex1, &ex2, &ex3])),
        ("region calculus properties", calculus()),
        ("LTI bound tightness trend", tightness()),
        ("loop-transform equivalence", loop_transform()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("{} criterion {}: {name}: {}", if o.ok { "PASS" } else { "FAIL" }, k + 1, o.detail);
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
