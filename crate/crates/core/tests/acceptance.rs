//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use suslov_hk::cli::{compare_closedform, convergence_study, preset, relative_drift, Mode};
use suslov_hk::closedform::{u_step, Branch};
use suslov_hk::model3::{
    constraint_residual, energy, first_integral, hk_step, planar_step, step_residual, to_planar,
    BodyOmega, Inertia3, StepSize,
};
use suslov_hk::modeln::{
    continuous_rhs_nd, hk_step_nd, hk_step_nd_back, steady_rotation, step_residual_nd, NDInertia,
    NDOmega,
};
use suslov_hk::SuslovError;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn eps(v: f64) -> StepSize {
    StepSize::new(v).unwrap()
}

fn random_inertia(r: &mut ChaCha8Rng) -> Inertia3 {
    Inertia3::new(
        r.random_range(0.1..10.0),
        r.random_range(0.1..10.0),
        r.random_range(-1.0..1.0),
        r.random_range(-1.0..1.0),
    )
    .unwrap()
}

fn random_omega(r: &mut ChaCha8Rng) -> BodyOmega {
    BodyOmega::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0))
}

fn random_nd(r: &mut ChaCha8Rng, n: usize) -> NDInertia {
    let diag = (0..n).map(|_| r.random_range(0.2..5.0)).collect();
    let off = (0..n - 1).map(|_| r.random_range(-1.0..1.0)).collect();
    NDInertia::new(diag, off).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn fig3d(k: i64) -> (Inertia3, StepSize) {
    let cfg = preset(k).unwrap();
    (cfg.inertia3.unwrap(), cfg.step_size().unwrap())
}

fn criterion_1() -> Outcome {
    let (inertia, e) = fig3d(1);
    let (drift, dt) = timed(|| {
        let mut w = BodyOmega::new(1.0, 1.0);
        let mut f = vec![first_integral(w, &inertia, e)];
        for _ in 0..10_000 {
            w = hk_step(w, &inertia, e).unwrap();
            f.push(first_integral(w, &inertia, e));
        }
        relative_drift(&f)
    });
    let pass = drift < 1e-9 && dt.as_secs_f64() < 0.1;
    Outcome::new(
        pass,
        format!("F drift {drift:.3e} over 1e4 steps in {dt:?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let (res, dt) = timed(|| {
        let mut worst = 0.0_f64;
        let mut accepted = 0;
        for _ in 0..1000 {
            let inertia = random_inertia(&mut r);
            let w = random_omega(&mut r);
            let e = r.random_range(0.001..1.0);
            match hk_step(w, &inertia, eps(e)) {
                Ok(next) => {
                    let [r1, r2] = step_residual(w, next, &inertia, e);
                    worst = worst.max(r1).max(r2);
                    accepted += 1;
                }
                Err(SuslovError::DegenerateStep { .. }) => {}
                Err(other) => panic!("{other}"),
            }
        }
        (worst, accepted)
    });
    let (worst, accepted) = res;
    let pass = worst <= 1e-12 && dt.as_secs_f64() < 1.0;
    Outcome::new(
        pass,
        format!("max relative residual {worst:.3e} over {accepted} accepted steps in {dt:?}"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (worst, dt) = timed(|| {
        let mut worst = 0.0_f64;
        for _ in 0..1000 {
            let inertia = random_inertia(&mut r);
            // power-of-two scale keeps the point exactly on the line
            let t = f64::powi(2.0, r.random_range(-4..3)) * if r.random() { 1.0 } else { -1.0 };
            let w = BodyOmega::new(-inertia.i23() * t, inertia.i13() * t);
            assert_eq!(inertia.i13() * w.omega1 + inertia.i23() * w.omega2, 0.0);
            let next = hk_step(w, &inertia, eps(r.random_range(0.001..1.0))).unwrap();
            let scale = w.norm().max(f64::MIN_POSITIVE);
            worst = worst.max((next.omega1 - w.omega1).hypot(next.omega2 - w.omega2) / scale);
        }
        worst
    });
    let pass = worst <= 1e-14 && dt.as_secs_f64() < 1.0;
    Outcome::new(
        pass,
        format!("max relative displacement {worst:.3e} in {dt:?}"),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0_f64;
    let mut n = 0;
    while n < 1000 {
        let inertia = random_inertia(&mut r);
        if inertia.is_degenerate() {
            continue;
        }
        let w = random_omega(&mut r);
        let e = eps(r.random_range(0.001..1.0));
        let (Ok(next), Ok(pnext)) = (
            hk_step(w, &inertia, e),
            planar_step(to_planar(w, &inertia), &inertia, e),
        ) else {
            continue;
        };
        let lhs = to_planar(next, &inertia);
        let scale = lhs.x.hypot(lhs.y).max(pnext.x.hypot(pnext.y));
        if scale > 0.0 {
            worst = worst.max((lhs.x - pnext.x).hypot(lhs.y - pnext.y) / scale);
        }
        n += 1;
    }
    Outcome::new(worst <= 1e-12, format!("max relative mismatch {worst:.3e}"))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for k in [1, 3] {
        let mut cfg = preset(k).unwrap();
        cfg.mode = Mode::ClosedForm;
        cfg.steps = 500;
        let (exec, dt) = timed(|| compare_closedform(&cfg).unwrap());
        let diff = exec.summary.max_closedform_diff.unwrap();
        pass &= exec.pole.is_none() && diff < 1e-8 && dt.as_secs_f64() < 0.1;
        lines.push(format!("fig-{k} max diff {diff:.3e} in {dt:?}"));
    }
    Outcome::new(pass, lines.join("; "))
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for k in 1..=4 {
        let (inertia, e) = fig3d(k);
        let mut w = BodyOmega::new(1.0, 1.0);
        let start = constraint_residual(w, &inertia);
        for _ in 0..5000 {
            w = hk_step(w, &inertia, e).unwrap();
        }
        let end = constraint_residual(w, &inertia).abs();
        if start == 0.0 {
            lines.push(format!("fig-{k} skipped"));
            continue;
        }
        pass &= end < 1e-6;
        lines.push(format!("fig-{k} {end:.3e}"));
    }
    Outcome::new(
        pass,
        format!("|I13 W1 + I23 W2| at n=5000: {}", lines.join(", ")),
    )
}

fn dd_relation(u: f64, next: f64, c: f64) -> f64 {
    let one = TwoFloat::from(1.0);
    let (u, v, c) = (TwoFloat::from(u), TwoFloat::from(next), TwoFloat::from(c));
    f64::from((u * (v * v + one).sqrt() - v * (u * u + one).sqrt() - c).abs())
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst_rel = 0.0_f64;
    for _ in 0..10_000 {
        let u = r.random_range(-10.0..10.0);
        let c = r.random_range(-5.0..5.0);
        worst_rel = worst_rel.max(dd_relation(u, u_step(u, c, Branch::First), c));
    }
    let mut worst_id = 0.0_f64;
    for _ in 0..10_000 {
        let theta: f64 = r.random_range(-3.0..3.0);
        let k1e: f64 = r.random_range(-2.0..2.0);
        // c = sinh(-k1 eps)
        let c = (-k1e).sinh();
        let got = u_step(theta.sinh(), c, Branch::First);
        let want = (theta + k1e).sinh();
        let scale = (c.abs() * theta.cosh()) + (theta.sinh().abs() * (c * c + 1.0).sqrt());
        worst_id = worst_id.max((got - want).abs() / scale);
    }
    let pass = worst_rel <= 1e-13 && worst_id <= 1e-12;
    Outcome::new(
        pass,
        format!("relation residual {worst_rel:.3e} (abs), addition identity {worst_id:.3e} (rel)"),
    )
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let (worst, dt) = timed(|| {
        let mut worst = 0.0_f64;
        for n in [3, 4, 6, 10] {
            for _ in 0..100 {
                let inertia = random_nd(&mut r, n);
                let c = r.random_range(-3.0..3.0);
                let w = steady_rotation(&inertia, c);
                let next = hk_step_nd(&w, &inertia, eps(r.random_range(0.01..1.0))).unwrap();
                let norm = w.values().iter().map(|v| v * v).sum::<f64>().sqrt();
                let diff = w
                    .values()
                    .iter()
                    .zip(next.values())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if norm > 0.0 {
                    worst = worst.max(diff / norm);
                }
            }
        }
        worst
    });
    let pass = worst <= 1e-13 && dt.as_secs_f64() < 1.0;
    Outcome::new(
        pass,
        format!("max relative displacement {worst:.3e} in {dt:?}"),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let mut worst_res = 0.0_f64;
    let mut worst_lim = 0.0_f64;
    let mut accepted = 0;
    for _ in 0..100 {
        let inertia = random_nd(&mut r, 5);
        let w = NDOmega((0..4).map(|_| r.random_range(-2.0..2.0)).collect());
        let e = r.random_range(0.01..0.5);
        if let Ok(next) = hk_step_nd(&w, &inertia, eps(e)) {
            let res = step_residual_nd(&w, &next, &inertia, e).unwrap();
            worst_res = res.into_iter().fold(worst_res, f64::max);
            accepted += 1;
        }
        let h = 1e-4;
        let fwd = hk_step_nd(&w, &inertia, eps(h)).unwrap();
        let back = hk_step_nd_back(&w, &inertia, eps(h)).unwrap();
        let rhs = continuous_rhs_nd(&w, &inertia).unwrap();
        let norm = rhs.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = fwd
            .values()
            .iter()
            .zip(back.values())
            .zip(rhs.values())
            .map(|((a, b), f)| ((a - b) / (2.0 * h) - f).powi(2))
            .sum::<f64>()
            .sqrt();
        worst_lim = worst_lim.max(diff / norm);
    }
    let pass = worst_res <= 1e-11 && worst_lim <= 1e-6;
    Outcome::new(
        pass,
        format!(
            "residual {worst_res:.3e} over {accepted} steps, divided difference {worst_lim:.3e}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut cfg = preset(1).unwrap();
    cfg.mode = Mode::Convergence;
    cfg.epsilon = 0.1;
    let (exec, dt) = timed(|| convergence_study(&cfg).unwrap());
    let orders = exec.summary.orders.unwrap();
    let get = |name: &str| {
        orders
            .iter()
            .find(|o| o.method == name)
            .map(|o| o.estimated_order)
            .unwrap()
    };
    let (euler, hkp, hk3) = (get("euler_planar"), get("hk_planar"), get("hk_3d"));
    let pass = (0.85..=1.15).contains(&euler) && hkp >= 1.9 && hk3 >= 1.9 && dt.as_secs_f64() < 5.0;
    Outcome::new(
        pass,
        format!("euler {euler:.4}, hk planar {hkp:.4}, hk 3d {hk3:.4} in {dt:?}"),
    )
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let mut changed = 0;
    let mut total = 0;
    while total < 100 {
        let inertia = random_inertia(&mut r);
        let w = random_omega(&mut r);
        if constraint_residual(w, &inertia).abs() < 1e-3 {
            continue;
        }
        let Ok(next) = hk_step(w, &inertia, eps(0.2)) else {
            continue;
        };
        total += 1;
        if (energy(next, &inertia) - energy(w, &inertia)).abs() > 1e-8 {
            changed += 1;
        }
    }
    Outcome::new(
        changed >= 95,
        format!("{changed}/{total} steps change the energy"),
    )
}

fn run_fig2(out: &Path) -> serde_json::Value {
    let output = Command::new(env!("CARGO_BIN_EXE_suslov-hk"))
        .args(["figures", "--figure", "2", "--out"])
        .arg(out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stderr).unwrap()
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let summary = run_fig2(&a);
    run_fig2(&b);
    let (bytes_a, bytes_b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let identical = bytes_a == bytes_b;
    let text = String::from_utf8(bytes_a).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "F").unwrap();
    let f: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    let recomputed = relative_drift(&f);
    let reported = summary["max_F_drift"].as_f64().unwrap();
    let pass = identical && recomputed == reported;
    Outcome::new(
        pass,
        format!(
            "byte-identical {identical}, drift reported {reported:e}, recomputed {recomputed:e}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("first-integral conservation", criterion_1),
        ("step residual", criterion_2),
        ("fixed-point line", criterion_3),
        ("planar conjugacy", criterion_4),
        ("closed-form equivalence", criterion_5),
        ("asymptotic line", criterion_6),
        ("u-recursion", criterion_7),
        ("n-D steady rotation", criterion_8),
        ("n-D residual and limit", criterion_9),
        ("convergence order", criterion_10),
        ("energy not conserved", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
