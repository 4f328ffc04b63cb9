use std::f64::consts::PI;

use proptest::prelude::*;

use folia::bundle::{transport_polyline, ConeAction, FiberPoint, LeafPoint};
use folia::cone::{cone_act, invariance_residual, ConePoint};
use folia::fuchsian::{
    evaluate_word, genus2_octagon_representation, locate_in_domain, word_ball,
    FuchsianRepresentation, Letter, SurfaceGroupPresentation, Word, MAX_STEPS,
};
use folia::holspace::{precompose_action, HolConfig, HoloFunction};
use folia::kahler::{laplacian_dbar, ConformalMetric};
use folia::moebius::hyperbolic_distance;
use folia::projdyn::{proximality_gap, CMatrix, Field, LinearRep};
use folia::{DiscPoint, Su11Element, C64};

fn su11(max_length: f64) -> impl Strategy<Value = Su11Element> {
    (0.0..2.0 * PI, 0.0..max_length, 0.0..2.0 * PI).prop_map(|(a, l, b)| {
        Su11Element::rotation(a)
            .compose(&Su11Element::translation(l))
            .compose(&Su11Element::rotation(b))
    })
}

fn disc(radius: f64) -> impl Strategy<Value = DiscPoint> {
    (0.0..radius, 0.0..2.0 * PI).prop_map(|(r, t)| DiscPoint::new(C64::from_polar(r, t)).unwrap())
}

fn cone(max_ratio: f64) -> impl Strategy<Value = ConePoint> {
    (0.0..2.0 * PI, 0.0..max_ratio, 0.0..2.0 * PI).prop_map(|(a, r, b)| {
        ConePoint::new(
            C64::from_polar(1.0, a),
            C64::from_polar(r, b),
            (1.0 - r * r).sqrt(),
        )
        .unwrap()
    })
}

fn octagon() -> &'static FuchsianRepresentation {
    use std::sync::OnceLock;
    static REP: OnceLock<FuchsianRepresentation> = OnceLock::new();
    REP.get_or_init(|| genus2_octagon_representation().unwrap())
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0usize..4, prop::bool::ANY), 0..=max_len).prop_map(|v| {
        Word::reduce(
            v.into_iter()
                .map(|(g, p)| if p { Letter::pos(g) } else { Letter::neg(g) }),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn group_laws(g in su11(3.0), h in su11(3.0), k in su11(3.0)) {
        let a = g.compose(&h).compose(&k);
        let b = g.compose(&h.compose(&k));
        prop_assert!(a.distance_mod_center(&b) < 1e-9);
        prop_assert!(g.compose(&g.inverse()).eq_mod_center(&Su11Element::identity(), 1e-9));
        prop_assert!(a.det_defect() < 1e-9);
    }

    #[test]
    fn action_law_and_isometry(g in su11(3.0), h in su11(3.0), z in disc(0.9), w in disc(0.9)) {
        let lhs = g.compose(&h).apply(z.z());
        let rhs = g.apply(h.apply(z.z()));
        prop_assert!((lhs - rhs).norm() < 1e-9);
        let d0 = hyperbolic_distance(z.z(), w.z());
        let d1 = hyperbolic_distance(g.apply(z.z()), g.apply(w.z()));
        prop_assert!((d0 - d1).abs() < 1e-7 * (1.0 + d0));
    }

    #[test]
    fn cone_is_preserved_and_f_is_invariant(g in su11(3.0), z in disc(0.95), p in cone(0.95)) {
        prop_assert!(cone_act(&g, &p).cone_defect() < 1e-10);
        prop_assert!(invariance_residual(&g, z, &p).unwrap() < 1e-10);
    }

    #[test]
    fn cone_function_is_bounded(z in disc(0.999), p in cone(0.999)) {
        prop_assert!(folia::cone::f_eval(z, &p).unwrap().norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn gap_is_conjugation_invariant(d1 in 1.1f64..4.0, d2 in 0.2f64..1.0, t in 0.0..PI, s in 0.2f64..3.0) {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(if i == j { [d1, d2][i] } else { 0.0 }, 0.0));
        let p = CMatrix::from_fn(2, 2, |i, j| {
            C64::new([[t.cos(), s], [t.sin(), 1.0 + t.cos() * s]][i][j], 0.0)
        });
        let pinv = p.clone().try_inverse().unwrap();
        let conj = &p * &m * &pinv;
        let a = proximality_gap(&m).unwrap();
        let b = proximality_gap(&conj).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!((a - (1.0 - d2 / d1)).abs() < 1e-12);
    }

    #[test]
    fn words_reduce_and_invert(w in word(12), v in word(12)) {
        let rep = octagon();
        let wv = evaluate_word(rep, &w.concat(&v)).unwrap();
        let prod = evaluate_word(rep, &w).unwrap().compose(&evaluate_word(rep, &v).unwrap());
        prop_assert!(wv.distance_mod_center(&prod) < 1e-6 * (1.0 + prod.distance_to_center()).exp());
        prop_assert!(w.concat(&w.inverse()).is_empty());
    }

    #[test]
    fn word_json_round_trip(w in word(12)) {
        let text = serde_json::to_string(&w).unwrap();
        let back: Word = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn reduction_lands_in_domain(z in disc(0.99)) {
        let rep = octagon();
        let (w, p) = locate_in_domain(rep, z).unwrap();
        prop_assert!(rep.contains(p.z(), 1e-10));
        let moved = evaluate_word(rep, &w).unwrap().apply(z.z());
        prop_assert!((moved - p.z()).norm() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transport_is_path_independent(b in disc(0.9), c in disc(0.9), p in cone(0.9)) {
        let rep = octagon();
        let action = ConeAction { rep };
        let x = FiberPoint::Cone(p);
        let lp = LeafPoint::new(rep, DiscPoint::from_re_im(0.05, -0.1).unwrap(), x.clone()).unwrap();
        let straight = transport_polyline(rep, &action, &lp, &[c], MAX_STEPS).unwrap();
        let bent = transport_polyline(rep, &action, &lp, &[b, c], MAX_STEPS).unwrap();
        prop_assert!(straight.end.fiber().distance(bent.end.fiber()).unwrap() < 1e-8);
        prop_assert!((straight.end.base().z() - bent.end.base().z()).norm() < 1e-8);

        // Groupoid law: A -> B, then B -> C in the frame of the intermediate point.
        let ab = transport_polyline(rep, &action, &lp, &[b], MAX_STEPS).unwrap();
        let frame = evaluate_word(rep, &ab.word).unwrap();
        let c_there = frame.apply_disc(c);
        let bc = transport_polyline(rep, &action, &ab.end, &[c_there], MAX_STEPS).unwrap();
        prop_assert!(bc.end.fiber().distance(straight.end.fiber()).unwrap() < 1e-8);
        prop_assert!((bc.end.base().z() - straight.end.base().z()).norm() < 1e-8);

        // The endpoint matches reducing the lifted target directly.
        let (w, base) = locate_in_domain(rep, c).unwrap();
        let expect = folia::bundle::FiberAction::act_word(&action, &w, &x).unwrap();
        prop_assert!(straight.end.fiber().distance(&expect).unwrap() < 1e-8);
        prop_assert!((straight.end.base().z() - base.z()).norm() < 1e-8);
    }

    #[test]
    fn precomposition_law_and_sup(g in su11(0.5), h in su11(0.5), p in cone(0.3)) {
        let cfg = HolConfig::default();
        let f = HoloFunction::fit(|z| folia::cone::cone_function(z, p.z1(), p.z2()).unwrap(), &cfg).unwrap();
        let a = precompose_action(&g.compose(&h), &f, &cfg).unwrap();
        let b = precompose_action(&g, &precompose_action(&h, &f, &cfg).unwrap(), &cfg).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            prop_assert!((x - y).norm() < 1e-9);
        }
        prop_assert!(a.sup_on_circle(1.0, 2048) <= f.sup_on_circle(1.0, 2048) + cfg.sup_tol);
        prop_assert!(a.certified_sup() <= 1.0 + cfg.sup_tol);
    }

    #[test]
    fn holomorphic_kernel(a in -1.0f64..1.0, b in -1.0f64..1.0, z in disc(0.6)) {
        let m = ConformalMetric::poincare();
        let f = move |w: C64| C64::new(a, b) * w * w + w * w * w * 0.5;
        prop_assert!(laplacian_dbar(&f, z, &m, 1e-3).unwrap().norm() < 1e-6);
        prop_assert!(laplacian_dbar(&|w: C64| f(w).conj(), z, &m, 1e-3).unwrap().norm() < 1e-6);
    }
}

#[test]
fn representation_json_round_trips() {
    let rep = octagon();
    let back = FuchsianRepresentation::from_json(&rep.to_json()).unwrap();
    for (a, b) in rep.images().iter().zip(back.images()) {
        assert!((a.alpha() - b.alpha()).norm() <= 1e-15 * a.alpha().norm());
        assert!((a.beta() - b.beta()).norm() <= 1e-15 * a.beta().norm());
    }
    assert_eq!(back.translation_length(), rep.translation_length());

    let lin = LinearRep::from_su11(rep.images()).unwrap();
    let again = LinearRep::from_json(&lin.to_json()).unwrap();
    assert_eq!(again.generators(), lin.generators());
    assert_eq!(again.field(), Field::Complex);
}

#[test]
fn word_ball_sizes() {
    let pres = SurfaceGroupPresentation::opposite_sides(2).unwrap();
    assert_eq!(word_ball(&pres, 0).unwrap(), vec![Word::empty()]);
    assert_eq!(word_ball(&pres, 1).unwrap().len(), 8);
    // 8 + 8 * 7 reduced words of length at most two.
    assert_eq!(word_ball(&pres, 2).unwrap().len(), 64);
}
