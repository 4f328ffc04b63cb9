use std::f64::consts::PI;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use super::config::Config;
use super::report::{Record, Report, Status};
use crate::bundle::{
    dbar_residual_lift, descent_residual, holonomy_transport, leaf_grid, leafwise_constancy,
    transport_polyline, ConeAction, ConeFunction, Constancy, FiberPoint, LeafPoint,
    LeafwiseFunction,
};
use crate::cone::{cone_act, cone_function, invariance_residual, ConePoint};
use crate::error::{Error, Result};
use crate::fuchsian::{
    evaluate_word, genus2_octagon_representation_with, FuchsianRepresentation,
    SurfaceGroupPresentation, MAX_STEPS,
};
use crate::holspace::{
    orbit_limit_probe, precompose_action, tautological_phi, HoloFunction, OrbitLimit,
};
use crate::kahler::{
    disc_grid, div_grad, identity_residual, identity_residual_grid, laplacian_dbar, ConformalMetric,
};
use crate::moebius::{DiscPoint, Su11Element, C64};
use crate::projdyn::{
    classify_action, convergence_probe_labeled, find_proximal, finite_orbit_search, Classification,
    ClassifyParams, LinearRep, ProbeParams, ProjPoint,
};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyCone,
    Classify,
    LaplacianCheck,
    UniversalOrbit,
    LeafGrid,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyCone => "verify-cone",
            Command::Classify => "classify",
            Command::LaplacianCheck => "laplacian-check",
            Command::UniversalOrbit => "universal-orbit",
            Command::LeafGrid => "leaf-grid",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for the report and any grids. Without it only `leaf-grid`
    /// writes files, into the working directory.
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

/// Runs one command and writes `<out>/<command>.json` when an output directory is set.
pub fn run(command: Command, config: &Config, opts: &RunOptions) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    if let Some(dir) = &opts.out {
        fs::create_dir_all(dir)?;
    }
    let records = match command {
        Command::VerifyCone => verify_cone(config)?,
        Command::Classify => classify(config)?,
        Command::LaplacianCheck => laplacian_check(config, opts.out.as_deref())?,
        Command::UniversalOrbit => universal_orbit(config)?,
        Command::LeafGrid => {
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
            leaf_grid_command(config, &dir)?
        }
    };
    let report = Report {
        command: command.name().to_string(),
        config: config.clone(),
        records,
        wall_time_seconds: opts.timestamp.then(|| start.elapsed().as_secs_f64()),
    };
    if let Some(dir) = &opts.out {
        fs::write(
            dir.join(format!("{}.json", command.name())),
            report.to_json(),
        )?;
    }
    Ok(report)
}

fn octagon(config: &Config) -> Result<FuchsianRepresentation> {
    genus2_octagon_representation_with(config.rel_tol)
}

fn cone_fiber(z1: C64, z2: C64) -> Result<FiberPoint> {
    let t = (z1.norm_sqr() - z2.norm_sqr()).max(0.0).sqrt();
    Ok(FiberPoint::Cone(ConePoint::new(z1, z2, t)?))
}

fn verify_cone(config: &Config) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    let mut rng = sampling::rng(config.seed);

    let mut defect: f64 = 0.0;
    let mut worst = (0.0f64, json!(null));
    for k in 0..config.samples {
        let g = sampling::su11(&mut rng, 3.0);
        let z = sampling::disc_point(&mut rng, 0.95);
        let p = if k % 10 == 9 {
            sampling::null_cone_point(&mut rng)
        } else {
            sampling::cone_point(&mut rng, 0.9)
        };
        defect = defect.max(cone_act(&g, &p).cone_defect());
        let r = invariance_residual(&g, z, &p)?;
        if r > worst.0 {
            worst = (r, json!({ "g": g, "z": z.z(), "p": p }));
        }
    }
    records.push(Record::below("cone_preservation", defect, config.cone_tol));
    records.push(
        Record::below("cone_invariance", worst.0, config.invariance_tol).with_witness(worst.1),
    );

    // Leafwise holomorphy in lifted coordinates on the sampling grid.
    let mut fibers = vec![
        cone_fiber(C64::new(1.0, 0.0), C64::new(0.0, 0.0))?,
        FiberPoint::Cone(sampling::null_cone_point(&mut rng)),
    ];
    fibers.extend(
        (0..config.dbar_fibers)
            .map(|_| FiberPoint::Cone(sampling::cone_point(&mut rng, config.dbar_fiber_ratio))),
    );
    let mut dbar: f64 = 0.0;
    for x in &fibers {
        for z in disc_grid(config.grid_size, config.grid_radius) {
            dbar = dbar.max(dbar_residual_lift(
                &ConeFunction,
                z.z(),
                x,
                config.dbar_step,
            )?);
        }
    }
    records.push(Record::below("dbar_sweep", dbar, config.dbar_tol));

    let rep = octagon(config)?;
    let action = ConeAction { rep: &rep };
    let det = rep
        .images()
        .iter()
        .map(|g| g.det_defect())
        .fold(0.0, f64::max);
    records.push(Record::below("generator_determinants", det, config.det_tol));
    records.push(Record::below(
        "relator_residual",
        rep.relator_residual(),
        config.rel_tol,
    ));
    records.push(
        Record::below(
            "octagon_area",
            (rep.area() - 4.0 * PI).abs(),
            config.area_tol,
        )
        .with_witness(json!({ "area": rep.area() })),
    );

    let descent_samples: Vec<_> = (0..32)
        .map(|_| {
            (
                sampling::disc_point(&mut rng, 0.6),
                FiberPoint::Cone(sampling::cone_point(&mut rng, 0.9)),
            )
        })
        .collect();
    records.push(Record::below(
        "descent",
        descent_residual(&ConeFunction, &rep, &action, &descent_samples)?,
        config.descent_tol,
    ));

    let z0 = DiscPoint::from_re_im(0.1, 0.05)?;
    let relator = rep.presentation().relator().clone();
    let loop_vertices = (1..=relator.len())
        .map(|k| Ok(evaluate_word(&rep, &relator.prefix(k))?.apply_disc(z0)))
        .collect::<Result<Vec<_>>>()?;
    let mut holonomy: f64 = 0.0;
    let mut loop_fibers: Vec<FiberPoint> = (0..config.holonomy_fibers)
        .map(|_| FiberPoint::Cone(sampling::cone_point(&mut rng, 0.9)))
        .collect();
    loop_fibers.push(FiberPoint::Cone(sampling::null_cone_point(&mut rng)));
    for x in &loop_fibers {
        let lp = LeafPoint::new(&rep, z0, x.clone())?;
        let t = transport_polyline(&rep, &action, &lp, &loop_vertices, MAX_STEPS)?;
        holonomy = holonomy
            .max(t.end.fiber().distance(x)?)
            .max((t.end.base().z() - z0.z()).norm());
    }
    records.push(Record::below(
        "relator_holonomy",
        holonomy,
        config.holonomy_tol,
    ));

    let unit = cone_fiber(C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    let lp = LeafPoint::new(&rep, DiscPoint::origin(), unit)?;
    let there = holonomy_transport(&rep, &action, &lp, DiscPoint::from_re_im(0.5, 0.0)?)?;
    let v0 = ConeFunction.eval(lp.base().z(), lp.fiber())?;
    let v1 = ConeFunction.eval(there.base().z(), there.fiber())?;
    let delta = (v1 - v0).norm();
    records.push(
        Record::below(
            "leaf_values_differ",
            (delta - 0.5).abs(),
            config.witness_tol,
        )
        .with_witness(json!({ "f_at_0": v0, "f_at_half": v1, "difference": delta })),
    );
    let verdict = leafwise_constancy(
        &ConeFunction,
        &rep,
        &action,
        &lp,
        config.leaf_samples,
        config.seed,
        config.const_tol,
    )?;
    let record = match &verdict {
        Constancy::Witness { spread, .. } => {
            Record::new("nonconstant_leaf", Status::Pass, *spread, config.const_tol)
        }
        Constancy::Constant { spread } => {
            Record::new("nonconstant_leaf", Status::Fail, *spread, config.const_tol)
        }
    };
    records.push(record.with_witness(&verdict));

    let mut spread: f64 = 0.0;
    let mut constant = true;
    for k in 0..config.null_leaves {
        let x = FiberPoint::Cone(sampling::null_cone_point(&mut rng));
        let lp = LeafPoint::new(&rep, DiscPoint::origin(), x)?;
        match leafwise_constancy(
            &ConeFunction,
            &rep,
            &action,
            &lp,
            config.leaf_samples,
            config.seed.wrapping_add(k as u64 + 1),
            config.const_tol,
        )? {
            Constancy::Constant { spread: s } => spread = spread.max(s),
            Constancy::Witness { spread: s, .. } => {
                constant = false;
                spread = spread.max(s);
            }
        }
    }
    let status = if constant { Status::Pass } else { Status::Fail };
    records.push(Record::new(
        "null_leaves_constant",
        status,
        spread,
        config.const_tol,
    ));
    Ok(records)
}

fn load_representation(config: &Config) -> Result<LinearRep> {
    match &config.representation {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            LinearRep::from_json(&text)
        }
        None => LinearRep::from_su11(octagon(config)?.images()),
    }
}

fn classify(config: &Config) -> Result<Vec<Record>> {
    let rep = load_representation(config)?;
    let n = rep.generators().len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Config {
            location: "representation".into(),
            message: format!(
                "a closed surface group needs an even number of generators, found {n}"
            ),
        });
    }
    let presentation = SurfaceGroupPresentation::opposite_sides(n / 2)?;
    let mut records = Vec::new();

    let params = ClassifyParams {
        prox_tol: config.prox_tol,
        comp_bound: config.comp_bound,
    };
    let report = classify_action(&rep, &presentation, config.word_radius, params)?;
    let record = match &report.classification {
        Classification::PlainByProximal { gap, .. } => {
            Record::new("classification", Status::Pass, *gap, config.prox_tol)
        }
        Classification::PlainByCompactness { max_norm, .. } => {
            Record::new("classification", Status::Pass, *max_norm, config.comp_bound)
        }
        Classification::Undetermined { best_gap, .. } => Record::new(
            "classification",
            Status::Undetermined,
            *best_gap,
            config.prox_tol,
        ),
    };
    records.push(record.with_witness(&report));

    match find_proximal(&rep, &presentation, config.word_radius, config.prox_tol)? {
        Some((word, gap)) => {
            let m = rep.evaluate_word(&word)?;
            let probe = convergence_probe_labeled(
                &m,
                ProbeParams {
                    samples: config.probe_samples,
                    iterations: config.probe_iterations,
                    seed: config.seed,
                    conv_tol: config.conv_tol,
                    field: rep.field(),
                },
                &word.to_string(),
            )?;
            records.push(
                Record::at_least("proximal_convergence", probe.converged_fraction, 0.99)
                    .with_witness(json!({ "gap": gap, "probe": probe })),
            );
        }
        None => records.push(Record::new(
            "proximal_convergence",
            Status::Undetermined,
            0.0,
            0.99,
        )),
    }

    let mut rng = sampling::rng(config.seed);
    let dim = rep.dim();
    let mut points: Vec<ProjPoint> = (0..dim)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[i] = C64::new(1.0, 0.0);
            ProjPoint::from_slice(&e)
        })
        .collect::<Result<_>>()?;
    for _ in 0..config.orbit_points {
        let v = sampling::sphere(&mut rng, dim, rep.field() == crate::projdyn::Field::Real);
        points.push(ProjPoint::from_slice(&v)?);
    }
    let mut found = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if let Some(size) = finite_orbit_search(&rep, p, config.orbit_bound)? {
            found.push(json!({ "point": i, "orbit_size": size }));
        }
    }
    records.push(
        Record::new(
            "finite_orbits",
            Status::Pass,
            found.len() as f64,
            config.orbit_bound as f64,
        )
        .with_witness(json!({ "points_tested": points.len(), "finite": found })),
    );
    Ok(records)
}

fn laplacian_check(config: &Config, out: Option<&Path>) -> Result<Vec<Record>> {
    let metric = ConformalMetric::poincare();
    let step = config.laplacian_step;
    let cone_fiber = ConePoint::new(
        C64::new(1.0, 0.0),
        C64::new(0.3, 0.2),
        (1.0f64 - 0.13).sqrt(),
    )?;
    let cone = move |z: C64| {
        cone_function(z, cone_fiber.z1(), cone_fiber.z2()).unwrap_or(C64::new(f64::NAN, 0.0))
    };
    let functions: [(&str, Box<dyn Fn(C64) -> C64>); 3] = [
        ("z", Box::new(|z| z)),
        ("z_squared", Box::new(|z| z * z)),
        ("cone", Box::new(cone)),
    ];
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (name, f) in &functions {
        let grid = identity_residual_grid(
            f.as_ref(),
            &metric,
            config.grid_size,
            config.grid_radius,
            step,
        )?;
        let worst = grid.iter().map(|r| r.residual).fold(0.0, f64::max);
        records.push(Record::below(
            &format!("identity_{name}"),
            worst,
            config.identity_tol,
        ));
        rows.extend(grid.into_iter().map(|r| (*name, r)));
    }

    let at_origin = laplacian_dbar(
        &|z: C64| C64::new(z.norm_sqr(), 0.0),
        DiscPoint::origin(),
        &metric,
        step,
    )?;
    records.push(
        Record::below(
            "origin_value",
            (at_origin - C64::new(-0.5, 0.0)).norm(),
            config.laplacian_tol,
        )
        .with_witness(json!({ "value": at_origin })),
    );
    let point = identity_residual(&|z: C64| z, DiscPoint::origin(), &metric, step)?;
    records.push(Record::below(
        "origin_identity",
        point,
        config.laplacian_tol,
    ));

    let mut kernel: f64 = 0.0;
    let mut routes: f64 = 0.0;
    for z in disc_grid(config.grid_size, config.grid_radius) {
        let f = |w: C64| w * w;
        kernel = kernel
            .max(laplacian_dbar(&f, z, &metric, step)?.norm())
            .max(laplacian_dbar(&|w: C64| f(w).conj(), z, &metric, step)?.norm());
        let h = |w: C64| cone(w).norm_sqr();
        let a = laplacian_dbar(&|w: C64| C64::new(h(w), 0.0), z, &metric, step)?.re;
        let b = -0.5 * div_grad(&h, z, &metric, step)?;
        routes = routes.max((a - b).abs());
    }
    records.push(Record::below(
        "holomorphic_kernel",
        kernel,
        config.laplacian_tol,
    ));
    records.push(Record::below(
        "laplacian_routes_agree",
        routes,
        config.identity_tol,
    ));

    let cubic = |w: C64| w * w * w;
    let z = DiscPoint::from_re_im(0.3, 0.2)?;
    let coarse = identity_residual(&cubic, z, &metric, 1e-2)?;
    let fine = identity_residual(&cubic, z, &metric, 5e-3)?;
    let ratio = coarse / fine;
    let status = if (2.0..=8.0).contains(&ratio) {
        Status::Pass
    } else {
        Status::Fail
    };
    records.push(
        Record::new("second_order_convergence", status, ratio, 4.0)
            .with_witness(json!({ "coarse": coarse, "fine": fine })),
    );

    if let Some(dir) = out {
        let mut text = String::from("function,re_z,im_z,residual\n");
        for (name, r) in rows {
            text.push_str(&format!("{name},{},{},{}\n", r.z.re, r.z.im, r.residual));
        }
        fs::write(dir.join("laplacian_residuals.csv"), text)?;
    }
    Ok(records)
}

fn universal_orbit(config: &Config) -> Result<Vec<Record>> {
    let cfg = config.hol();
    let mut rng = sampling::rng(config.seed);
    let mut records = Vec::new();

    let p = sampling::cone_point(&mut rng, 0.3);
    let bases = [
        HoloFunction::identity(&cfg)?,
        HoloFunction::fit(
            |z| cone_function(z, p.z1(), p.z2()).unwrap_or(C64::new(f64::NAN, 0.0)),
            &cfg,
        )?,
    ];
    let mut law: f64 = 0.0;
    let mut growth = f64::NEG_INFINITY;
    for _ in 0..config.action_pairs {
        let g = sampling::su11(&mut rng, 0.5);
        let h = sampling::su11(&mut rng, 0.5);
        for f in &bases {
            let direct = precompose_action(&g.compose(&h), f, &cfg)?;
            let stepwise = precompose_action(&g, &precompose_action(&h, f, &cfg)?, &cfg)?;
            let d = direct
                .coefficients()
                .iter()
                .zip(stepwise.coefficients())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            law = law.max(d);
            let before = f.sup_on_circle(1.0, cfg.check_angles);
            let after = direct.sup_on_circle(1.0, cfg.check_angles);
            growth = growth.max(after - before);
        }
    }
    records.push(Record::below("action_law", law, config.action_tol));
    records.push(Record::below("sup_nonincreasing", growth, config.sup_tol));

    let mut taut: f64 = 0.0;
    for _ in 0..config.action_pairs {
        let g = sampling::su11(&mut rng, 0.5);
        let moved = precompose_action(&g, &bases[1], &cfg)?;
        for _ in 0..16 {
            let z = sampling::disc_point(&mut rng, 0.5);
            taut = taut.max(
                (tautological_phi(g.apply_disc(z), &moved) - tautological_phi(z, &bases[1])).norm(),
            );
        }
    }
    records.push(Record::below(
        "tautological_equivariance",
        taut,
        config.action_tol,
    ));

    let mut sup_excess = f64::NEG_INFINITY;
    let mut null_defect: f64 = 0.0;
    for _ in 0..config.action_pairs {
        let p = sampling::cone_point(&mut rng, 0.7);
        let f = HoloFunction::fit(
            |z| cone_function(z, p.z1(), p.z2()).unwrap_or(C64::new(f64::NAN, 0.0)),
            &cfg,
        )?;
        sup_excess = sup_excess.max(f.certified_sup() - 1.0);
        let q = sampling::null_cone_point(&mut rng);
        let k = HoloFunction::fit(
            |z| cone_function(z, q.z1(), q.z2()).unwrap_or(C64::new(f64::NAN, 0.0)),
            &cfg,
        )?;
        let c = k.coefficients();
        null_defect = null_defect
            .max((c[0].norm() - 1.0).abs())
            .max(c[1..].iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    records.push(Record::below("cone_bridge_sup", sup_excess, config.sup_tol));
    records.push(Record::below(
        "cone_bridge_null_constant",
        null_defect,
        config.const_tol,
    ));

    let id = HoloFunction::identity(&cfg)?;
    let translations: Vec<_> = (1..=config.orbit_terms)
        .map(|n| Su11Element::translation(n as f64))
        .collect();
    let record = match orbit_limit_probe(&translations, &id, config.compact_radius)? {
        OrbitLimit::LimitConstant {
            value,
            unimodular,
            sup_distance,
        } => Record::below("translation_limit", (value + 1.0).norm(), config.limit_tol)
            .with_witness(
                json!({ "value": value, "unimodular": unimodular, "sup_distance": sup_distance }),
            ),
        OrbitLimit::NoLimit { sup_distance } => Record::new(
            "translation_limit",
            Status::Fail,
            sup_distance,
            config.limit_tol,
        ),
    };
    records.push(record);

    let rotations: Vec<_> = (1..=config.orbit_terms)
        .map(|n| Su11Element::rotation(0.3 * n as f64))
        .collect();
    let record = match orbit_limit_probe(&rotations, &id, config.compact_radius)? {
        OrbitLimit::NoLimit { sup_distance } => Record::new(
            "rotation_no_limit",
            Status::Pass,
            sup_distance,
            config.limit_tol,
        ),
        OrbitLimit::LimitConstant { sup_distance, .. } => Record::new(
            "rotation_no_limit",
            Status::Fail,
            sup_distance,
            config.limit_tol,
        ),
    };
    records.push(record);

    let inner = HoloFunction::constant(C64::new(0.3, 0.0), &cfg)?;
    let record = match orbit_limit_probe(&translations, &inner, config.compact_radius)? {
        OrbitLimit::LimitConstant {
            value,
            unimodular: false,
            ..
        } => Record::new("interior_constant_flagged", Status::Pass, value.norm(), 1.0),
        other => {
            Record::new("interior_constant_flagged", Status::Fail, 0.3, 1.0).with_witness(&other)
        }
    };
    records.push(record);
    Ok(records)
}

fn leaf_grid_command(config: &Config, dir: &Path) -> Result<Vec<Record>> {
    fs::create_dir_all(dir)?;
    let rep = octagon(config)?;
    let action = ConeAction { rep: &rep };
    let fiber = FiberPoint::Cone(config.fiber_point()?);
    let grid = leaf_grid(&ConeFunction, &rep, &fiber, config.leaf_grid_size)?;
    grid.write_csv(BufWriter::new(fs::File::create(dir.join("leaf_grid.csv"))?))?;
    grid.write_pgm(BufWriter::new(fs::File::create(dir.join("leaf_grid.pgm"))?))?;

    let inside: Vec<_> = grid
        .cells
        .iter()
        .filter_map(|(z, v)| v.map(|v| (*z, v)))
        .collect();
    let max_modulus = inside.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let mut records = vec![
        Record::below("bounded_by_one", max_modulus, 1.0 + 1e-12).with_witness(json!({
            "cells": inside.len(),
            "csv": "leaf_grid.csv",
            "pgm": "leaf_grid.pgm",
        })),
    ];
    let stride = (inside.len() / 64).max(1);
    let samples: Vec<_> = inside
        .iter()
        .step_by(stride)
        .map(|(z, _)| Ok((DiscPoint::new(*z)?, fiber.clone())))
        .collect::<Result<_>>()?;
    records.push(Record::below(
        "descent",
        descent_residual(&ConeFunction, &rep, &action, &samples)?,
        config.descent_tol,
    ));
    Ok(records)
}
