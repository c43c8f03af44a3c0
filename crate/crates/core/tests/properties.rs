mod common;

use aaklab::catalog::AnalyticFunctionSpec;
use aaklab::diagnostics::rate_extrapolate;
use aaklab::doc::KvDoc;
use aaklab::num::{poly, C64};
use aaklab::potential::{
    balayage_to_circle, green, green_potential, log_potential, pseudo_hyperbolic, Arc, ArcChain, DiscreteMeasure, Mobius,
};
use aaklab::rational::{balayage_mass, balayage_scheme_of};
use proptest::prelude::*;

fn inner(max: f64) -> impl Strategy<Value = C64> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn measure(max_points: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((inner(0.85), 0.01f64..1.0), 1..max_points).prop_map(|v| {
        let (p, w): (Vec<C64>, Vec<f64>) = v.into_iter().unzip();
        DiscreteMeasure::new(p, w).unwrap()
    })
}

fn automorphism() -> impl Strategy<Value = Mobius> {
    (0.0..std::f64::consts::TAU, inner(0.7)).prop_map(|(t, a)| Mobius::disk_automorphism(t, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arc_text_round_trip(a in inner(0.9), b in inner(0.9), m in automorphism()) {
        for arc in [
            Arc::Segment { a, b },
            Arc::Geodesic { a, b },
            Arc::Circle { center: a * 0.5, radius: 0.1 },
            Arc::Mapped { base: Box::new(Arc::Segment { a, b }), map: m },
        ] {
            prop_assert_eq!(Arc::from_text(&arc.to_text()).unwrap(), arc);
        }
    }

    #[test]
    fn measure_doc_round_trip(mu in measure(12)) {
        let text = mu.to_doc().render();
        let back = DiscreteMeasure::from_doc(&KvDoc::parse(&text).unwrap()).unwrap();
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn chain_doc_round_trip(a in inner(0.8), b in inner(0.8)) {
        prop_assume!((a - b).norm() > 0.05);
        let chain = ArcChain::single(Arc::Segment { a, b }, 0.01).unwrap();
        let back = ArcChain::from_doc(&KvDoc::parse(&chain.to_doc().render()).unwrap()).unwrap();
        prop_assert_eq!(back, chain);
    }

    #[test]
    fn spec_doc_round_trip(p in prop::collection::vec(inner(0.9), 1..4)) {
        let res: Vec<C64> = p.iter().map(|z| z * 0.5 + 1.0).collect();
        let spec = AnalyticFunctionSpec::pole_sum(p, res).unwrap();
        let back = AnalyticFunctionSpec::from_doc(&KvDoc::parse(&spec.to_doc().render()).unwrap()).unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn green_is_mobius_invariant(z in inner(0.9), w in inner(0.9), m in automorphism()) {
        prop_assume!((z - w).norm() > 1e-3);
        let g = green(z, w);
        prop_assert!((green(m.apply(z), m.apply(w)) - g).abs() <= 1e-9 * g.abs().max(1.0));
        prop_assert!((green(w, z) - g).abs() <= 1e-12 * g.abs().max(1.0));
        let d = pseudo_hyperbolic(z, w);
        prop_assert!((pseudo_hyperbolic(m.apply(z), m.apply(w)) - d).abs() <= 1e-10);
    }

    #[test]
    fn balayage_preserves_mass_and_exterior_potential(mu in measure(6), z in inner(0.95)) {
        let bal = balayage_to_circle(&mu).unwrap();
        prop_assert!((bal.total_mass - mu.total_mass).abs() <= 1e-13 * mu.total_mass);
        prop_assume!(mu.points.iter().all(|p| (p - z).norm() > 1e-6));
        let lhs = log_potential(&mu, z) - log_potential(&bal, z);
        prop_assert!((lhs - green_potential(&mu, z)).abs() <= 1e-8);
        let far = z / z.norm().max(1e-3) * 1.7;
        prop_assert!((log_potential(&mu, far) - log_potential(&bal, far)).abs() <= 1e-8);
    }

    #[test]
    fn balayage_nodes_split_equal_mass(mu in measure(5), n in 0usize..8) {
        let s = balayage_scheme_of(&mu.normalized(), n);
        prop_assert_eq!(s.angles.len(), 2 * n + 1);
        let base = s.angles[0];
        let mut prev = 0.0;
        for (j, t) in s.angles.iter().enumerate().skip(1) {
            let off = (t - base).rem_euclid(std::f64::consts::TAU);
            prop_assert!(off > prev);
            let mass = balayage_mass(&mu.normalized(), base, off);
            prop_assert!((mass - j as f64 / (2 * n + 1) as f64).abs() <= 1e-9, "{} {}", j, mass);
            prev = off;
        }
    }

    #[test]
    fn rate_fit_is_scale_equivariant(rate in 0.01f64..0.9, scale in 1e-6f64..1e6, wiggle in 0.0f64..0.3) {
        let base: Vec<(usize, f64)> = (1..=30).map(|n| (n, rate.powi(n as i32) * (1.0 + wiggle * (n as f64).sin()))).collect();
        let scaled: Vec<(usize, f64)> = base.iter().map(|(n, v)| (*n, v * scale)).collect();
        let a = rate_extrapolate(&base, None, 0.0).unwrap();
        let b = rate_extrapolate(&scaled, None, 0.0).unwrap();
        prop_assert!((a.limit - b.limit).abs() <= 1e-10 * a.limit);
        prop_assert!((b.intercept - a.intercept - scale.ln()).abs() <= 1e-8);
        prop_assert!((a.residual - b.residual).abs() <= 1e-8);
    }

    #[test]
    fn polynomial_roots_are_recovered(rs in prop::collection::vec(inner(0.95), 1..8)) {
        for i in 0..rs.len() {
            for j in 0..i {
                prop_assume!((rs[i] - rs[j]).norm() > 0.05);
            }
        }
        let p = poly::from_roots(&rs);
        let found = poly::roots(&p).roots;
        prop_assert_eq!(found.len(), rs.len());
        for r in &rs {
            let best = found.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "{} {}", r, best);
        }
    }
}

#[test]
fn agm_oracle_matches_frozen_capacities() {
    assert!((common::segment_capacity(0.6) - 0.842567705570911).abs() < 1e-13);
    assert!((common::segment_capacity(0.5) - 0.725544161609597).abs() < 1e-13);
    assert!((common::segment_capacity(0.2679491924311227) - 0.497646288072919).abs() < 1e-13);
}
