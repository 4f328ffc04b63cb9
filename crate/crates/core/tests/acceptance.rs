//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Reference values are computed here from closed forms, independently of
//! the library code paths they check.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use folia::bundle::{
    dbar_residual_lift, holonomy_transport, leafwise_constancy, transport_polyline, ConeAction,
    ConeFunction, Constancy, FiberPoint, LeafPoint, LeafwiseFunction, ProjAction,
};
use folia::cone::{cone_act, invariance_residual, ConePoint};
use folia::fuchsian::{
    evaluate_word, genus2_octagon_representation, SurfaceGroupPresentation, MAX_STEPS,
};
use folia::holspace::{orbit_limit_probe, precompose_action, HolConfig, HoloFunction, OrbitLimit};
use folia::kahler::{identity_residual_grid, laplacian_dbar, wirtinger_derivs, ConformalMetric};
use folia::projdyn::{
    classify_action, convergence_probe, proximality_gap, su11_matrix, CMatrix, Classification,
    ClassifyParams, Field, LinearRep, ProbeParams, ProjPoint,
};
use folia::{sampling, DiscPoint, Su11Element, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(conj(a) z - b) / (a - conj(b) z)`, written out independently of the library.
fn cone_oracle(z: C64, a: C64, b: C64) -> C64 {
    (a.conj() * z - b) / (a - b.conj() * z)
}

fn cone_invariance() -> Outcome {
    let mut rng = sampling::rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let g = sampling::su11(&mut rng, 3.0);
        let z = sampling::disc_point(&mut rng, 0.95);
        let p = sampling::cone_point(&mut rng, 0.95);
        worst = worst.max(invariance_residual(&g, z, &p).unwrap());
        // Same identity with the action and the function written out by hand.
        let (a, b) = (g.alpha(), g.beta());
        let gz = (a * z.z() + b) / (b.conj() * z.z() + a.conj());
        let z1 = a * p.z1() + b * p.z2().conj();
        let z2 = a * p.z2() + b * p.z1().conj();
        worst = worst.max((cone_oracle(gz, z1, z2) - cone_oracle(z.z(), p.z1(), p.z2())).norm());
    }
    check(
        worst < 1e-10,
        format!("max residual {worst:.3e} < 1e-10 over 1e4 triples"),
    )
}

fn cone_preservation() -> Outcome {
    let mut rng = sampling::rng(2);
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let g = sampling::su11(&mut rng, 3.0);
        let p = if k % 4 == 0 {
            sampling::null_cone_point(&mut rng)
        } else {
            sampling::cone_point(&mut rng, 0.95)
        };
        let q = cone_act(&g, &p);
        let defect = (q.z1().norm_sqr() - q.z2().norm_sqr() - q.t() * q.t()).abs();
        worst = worst.max(defect);
    }
    check(
        worst < 1e-10,
        format!("max cone defect {worst:.3e} < 1e-10 over 1e4 samples"),
    )
}

fn non_plainness() -> Outcome {
    let rep = genus2_octagon_representation().unwrap();
    let action = ConeAction { rep: &rep };
    let unit = FiberPoint::Cone(ConePoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.0).unwrap());
    let lp = LeafPoint::new(&rep, DiscPoint::origin(), unit).unwrap();
    let there =
        holonomy_transport(&rep, &action, &lp, DiscPoint::from_re_im(0.5, 0.0).unwrap()).unwrap();
    let f0 = ConeFunction.eval(lp.base().z(), lp.fiber()).unwrap();
    let f1 = ConeFunction.eval(there.base().z(), there.fiber()).unwrap();
    let delta = (f1 - f0).norm();
    let witness_ok = (delta - 0.5).abs() < 1e-12;

    let mut rng = sampling::rng(3);
    let mut spread: f64 = 0.0;
    let mut all_constant = true;
    for k in 0..16 {
        let x = FiberPoint::Cone(sampling::null_cone_point(&mut rng));
        let lp = LeafPoint::new(&rep, DiscPoint::origin(), x).unwrap();
        match leafwise_constancy(&ConeFunction, &rep, &action, &lp, 64, k, 1e-10).unwrap() {
            Constancy::Constant { spread: s } => spread = spread.max(s),
            Constancy::Witness { spread: s, .. } => {
                all_constant = false;
                spread = spread.max(s);
            }
        }
    }
    check(
        witness_ok && all_constant && spread < 1e-10,
        format!(
            "|f(0)-f(0.5)| = {delta:.15} (0.5 +- 1e-12); 16 null leaves constant: {all_constant}, spread {spread:.3e}"
        ),
    )
}

fn leafwise_holomorphy() -> Outcome {
    let mut rng = sampling::rng(4);
    let mut fibers = vec![
        ConePoint::new(c(1.0, 0.0), c(0.0, 0.0), 1.0).unwrap(),
        ConePoint::new(c(1.0, 0.0), c(0.3, 0.2), (1.0f64 - 0.13).sqrt()).unwrap(),
        sampling::null_cone_point(&mut rng),
    ];
    fibers.extend((0..8).map(|_| sampling::cone_point(&mut rng, 0.4)));
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for p in &fibers {
        let x = FiberPoint::Cone(*p);
        for i in 0..21 {
            for j in 0..21 {
                let z = c(-0.7 + 0.07 * i as f64, -0.7 + 0.07 * j as f64);
                if z.norm() > 0.7 + 1e-12 {
                    continue;
                }
                points += 1;
                worst = worst.max(dbar_residual_lift(&ConeFunction, z, &x, 1e-4).unwrap());
            }
        }
    }
    check(
        worst < 1e-8,
        format!("max dbar residual {worst:.3e} < 1e-8 ({points} grid evaluations, step 1e-4)"),
    )
}

/// Octagon area by polar quadrature of the Poincaré area form, with the sides
/// rebuilt from the closing translation length.
fn area_oracle() -> f64 {
    let l = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    let r0 = (l / 4.0).tanh();
    let d = (1.0 + r0 * r0) / (2.0 * r0);
    let boundary = |phi: f64| {
        (0..8)
            .map(|j| {
                let k = d * (phi - j as f64 * PI / 4.0).cos();
                if k > 1.0 {
                    k - (k * k - 1.0).sqrt()
                } else {
                    1.0
                }
            })
            .fold(1.0, f64::min)
    };
    // The integrand is smooth between vertices, which sit at odd multiples of pi/8.
    let mut total = 0.0;
    for arc in 0..8 {
        let (a, b) = (
            (2 * arc) as f64 * PI / 8.0 - PI / 8.0,
            (2 * arc + 1) as f64 * PI / 8.0,
        );
        let n = 2000;
        let h = (b - a) / n as f64;
        for k in 0..=n {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let r = boundary(a + k as f64 * h);
            total += w * 2.0 * r * r / (1.0 - r * r) * h / 3.0;
        }
    }
    total
}

fn fuchsian_construction() -> Outcome {
    let rep = genus2_octagon_representation().unwrap();
    let rel = rep.relator_residual();
    let area = rep.area();
    let quad = area_oracle();

    let mut rng = sampling::rng(5);
    let z0 = DiscPoint::from_re_im(0.1, 0.05).unwrap();
    let relator = rep.presentation().relator().clone();
    let vertices: Vec<DiscPoint> = (1..=relator.len())
        .map(|k| {
            evaluate_word(&rep, &relator.prefix(k))
                .unwrap()
                .apply_disc(z0)
        })
        .collect();
    let mut holonomy: f64 = 0.0;
    let mut tested = 0;
    let cone = ConeAction { rep: &rep };
    let mut cone_fibers: Vec<FiberPoint> = (0..8)
        .map(|_| FiberPoint::Cone(sampling::cone_point(&mut rng, 0.9)))
        .collect();
    cone_fibers.push(FiberPoint::Cone(sampling::null_cone_point(&mut rng)));
    for x in &cone_fibers {
        let lp = LeafPoint::new(&rep, z0, x.clone()).unwrap();
        let t = transport_polyline(&rep, &cone, &lp, &vertices, MAX_STEPS).unwrap();
        holonomy = holonomy.max(t.end.fiber().distance(x).unwrap());
        tested += 1;
    }
    let linear = LinearRep::from_su11(rep.images()).unwrap();
    let proj = ProjAction { rep: &linear };
    for _ in 0..8 {
        let v = sampling::sphere(&mut rng, 2, false);
        let x = FiberPoint::Proj(ProjPoint::from_slice(&v).unwrap());
        let lp = LeafPoint::new(&rep, z0, x.clone()).unwrap();
        let t = transport_polyline(&rep, &proj, &lp, &vertices, MAX_STEPS).unwrap();
        holonomy = holonomy.max(t.end.fiber().distance(&x).unwrap());
        tested += 1;
    }
    let ok = rel < 1e-9
        && (area - 4.0 * PI).abs() < 1e-6
        && (quad - 4.0 * PI).abs() < 1e-6
        && holonomy < 1e-8;
    check(
        ok,
        format!(
            "relator {rel:.3e} < 1e-9; area {area:.12} (quadrature {quad:.12}) vs 4pi; loop holonomy {holonomy:.3e} < 1e-8 over {tested} fibers"
        ),
    )
}

fn real(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    CMatrix::from_fn(n, n, |i, j| c(rows[i][j], 0.0))
}

fn proximality() -> Outcome {
    let g1 = proximality_gap(&real(&[&[2.0, 0.0], &[0.0, 1.0]])).unwrap();
    let g2 = proximality_gap(&real(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
    // Characteristic polynomial x^2 - 3x + 1.
    let (l1, l2) = ((3.0 + 5f64.sqrt()) / 2.0, (3.0 - 5f64.sqrt()) / 2.0);
    let expect = 1.0 - l2 / l1;
    let closed = 2.0 * 5f64.sqrt() / (3.0 + 5f64.sqrt());
    let t = 0.8f64;
    let g3 = proximality_gap(&real(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]])).unwrap();
    check(
        g1 == 0.5 && (g2 - expect).abs() < 1e-10 && (expect - closed).abs() < 1e-14 && g3 < 1e-12,
        format!("gap(diag(2,1)) = {g1}; gap([[2,1],[1,1]]) = {g2:.15} vs {closed:.15}; rotation gap {g3:.1e}"),
    )
}

fn convergence() -> Outcome {
    let g = Su11Element::translation(2.0);
    let report = convergence_probe(
        &su11_matrix(&g),
        ProbeParams {
            samples: 1000,
            iterations: 200,
            seed: 6,
            conv_tol: 1e-6,
            field: Field::Complex,
        },
    )
    .unwrap();
    // The translation along the real axis attracts towards z = 1, i.e. [1 : 1].
    let oracle = ProjPoint::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let d = report.attractor.distance(&oracle);
    check(
        report.converged_fraction >= 0.99 && d < 1e-9,
        format!(
            "converged fraction {:.4} >= 0.99; attractor distance to [1:1] {d:.1e}",
            report.converged_fraction
        ),
    )
}

fn classification() -> Outcome {
    let pres = SurfaceGroupPresentation::opposite_sides(2).unwrap();
    let rot = |t: f64| {
        real(&[
            &[t.cos(), -t.sin(), 0.0],
            &[t.sin(), t.cos(), 0.0],
            &[0.0, 0.0, 1.0],
        ])
    };
    let unitary =
        LinearRep::new(Field::Real, vec![rot(0.3), rot(1.1), rot(2.0), rot(0.7)]).unwrap();
    let a = classify_action(&unitary, &pres, 4, ClassifyParams::default()).unwrap();
    let compact = matches!(a.classification, Classification::PlainByCompactness { .. });

    let d = real(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let id = CMatrix::identity(3, 3);
    let rep = LinearRep::new(Field::Real, vec![d, id.clone(), id.clone(), id]).unwrap();
    let b = classify_action(&rep, &pres, 4, ClassifyParams::default()).unwrap();
    let verified = match &b.classification {
        Classification::PlainByProximal { witness, gap } => {
            // Only the first generator is nontrivial, so the witness is diag(2^k, 1, 1)
            // with gap 1 - 2^-|k|.
            let k: i64 = witness
                .letters()
                .iter()
                .map(|l| {
                    if l.generator == 0 {
                        l.exponent as i64
                    } else {
                        0
                    }
                })
                .sum();
            let expect = 1.0 - 2f64.powi(-(k.abs() as i32));
            k != 0 && (gap - expect).abs() < 1e-12
        }
        _ => false,
    };
    check(
        compact && verified,
        format!(
            "unitary -> {}; diag(2,1,1) -> {}",
            serde_json::to_string(&a.classification).unwrap(),
            serde_json::to_string(&b.classification).unwrap()
        ),
    )
}

fn kahler_identity() -> Outcome {
    let m = ConformalMetric::poincare();
    let p = ConePoint::new(c(1.0, 0.0), c(0.3, 0.2), (1.0f64 - 0.13).sqrt()).unwrap();
    let cone = move |z: C64| cone_oracle(z, p.z1(), p.z2());
    let fs: [(&str, Box<dyn Fn(C64) -> C64>); 3] = [
        ("z", Box::new(|z| z)),
        ("z^2", Box::new(|z| z * z)),
        ("cone", Box::new(cone)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, f) in &fs {
        let worst = identity_residual_grid(f.as_ref(), &m, 21, 0.7, 1e-3)
            .unwrap()
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max);
        ok &= worst < 1e-5;
        parts.push(format!("{name}: {worst:.2e}"));
    }
    // At 0 the metric factor is 4 and |f'| = 1 for f = z.
    let lhs = laplacian_dbar(
        &|z: C64| c(z.norm_sqr(), 0.0),
        DiscPoint::origin(),
        &m,
        1e-3,
    )
    .unwrap();
    let (d, _) = wirtinger_derivs(&|z: C64| z, DiscPoint::origin(), 1e-3).unwrap();
    let rhs = -2.0 / 4.0 * d.norm_sqr();
    ok &= (lhs - c(-0.5, 0.0)).norm() < 1e-6 && (rhs + 0.5).abs() < 1e-6;
    check(
        ok,
        format!(
            "grid residuals < 1e-5 ({}); value at 0: {:.9} and {:.9}",
            parts.join(", "),
            lhs.re,
            rhs
        ),
    )
}

fn universal_space() -> Outcome {
    let cfg = HolConfig::default();
    let mut rng = sampling::rng(10);
    let p = sampling::cone_point(&mut rng, 0.3);
    let fs = [
        HoloFunction::identity(&cfg).unwrap(),
        HoloFunction::fit(|z| cone_oracle(z, p.z1(), p.z2()), &cfg).unwrap(),
    ];
    let mut law: f64 = 0.0;
    for _ in 0..16 {
        let g = sampling::su11(&mut rng, 0.5);
        let h = sampling::su11(&mut rng, 0.5);
        for f in &fs {
            let a = precompose_action(&g.compose(&h), f, &cfg).unwrap();
            let b = precompose_action(&g, &precompose_action(&h, f, &cfg).unwrap(), &cfg).unwrap();
            for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
                law = law.max((x - y).norm());
            }
        }
    }
    let seq: Vec<_> = (1..=40)
        .map(|n| Su11Element::translation(n as f64))
        .collect();
    let (limit_ok, detail) = match orbit_limit_probe(&seq, &fs[0], 0.5).unwrap() {
        OrbitLimit::LimitConstant { value, .. } => {
            ((value + 1.0).norm() < 1e-6, format!("limit {value:.9}"))
        }
        other => (false, format!("{other:?}")),
    };
    check(
        law < 1e-9 && limit_ok,
        format!("action law {law:.2e} < 1e-9 per coefficient; translations n <= 40: {detail}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_folia");
    let dir = tempfile::tempdir().unwrap();
    let mut same = true;
    let mut ran = Vec::new();
    for cmd in [
        "verify-cone",
        "classify",
        "laplacian-check",
        "universal-orbit",
        "leaf-grid",
    ] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}-{run}"));
            let o = Command::new(bin)
                .args([cmd, "--seed", "42", "--no-timestamp", "--out"])
                .arg(&out)
                .output()
                .unwrap();
            let report = std::fs::read(out.join(format!("{cmd}.json"))).unwrap();
            same &= o.stdout == report;
            outputs.push(report);
        }
        same &= outputs[0] == outputs[1];
        ran.push(cmd);
    }
    check(
        same,
        format!("byte-identical reports for {}", ran.join(", ")),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("cone invariance", cone_invariance),
        ("cone preservation", cone_preservation),
        ("non-plainness witness", non_plainness),
        ("leafwise holomorphy", leafwise_holomorphy),
        ("fuchsian construction", fuchsian_construction),
        ("proximality", proximality),
        ("convergence probe", convergence),
        ("classification", classification),
        ("kahler identity", kahler_identity),
        ("universal space", universal_space),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
