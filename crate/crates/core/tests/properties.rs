use std::collections::BTreeSet;

use proptest::prelude::*;
use qbnet::density::{rho_out, DensityMatrix};
use qbnet::entexpr::{self, shannon_entropy, EntropyExpr};
use qbnet::infotheory::{channel, holevo, maximize_accessible_info_with, mutual_info, Ensemble, SearchOptions};
use qbnet::linalg::{self, eigh, CMat};
use qbnet::measure::{dilation_residual, dilation_unitary, measure_probs, pom_net, DilationVariant, Pom};
use qbnet::netcore::{parent_cb_net, stories, validate, ViolationKind};
use qbnet::protocols;
use qbnet::qprob::{closure_check, p_gamma};
use qbnet::random::{self, Rng};
use qbnet::suites::random_qb_net;

fn random_pom(rng: &mut Rng, d: usize, m: usize) -> Pom {
    let gs: Vec<CMat> = (0..m)
        .map(|_| {
            let a = random::complex_gaussian_matrix(rng, d, d);
            &a * a.adjoint()
        })
        .collect();
    let total = gs.iter().fold(CMat::zeros(d, d), |acc, g| acc + g);
    let t = eigh(&total).unwrap().map(|x| 1.0 / x.sqrt());
    Pom::new(gs.iter().map(|g| &t * g * &t).collect()).unwrap()
}

fn random_ensemble(rng: &mut Rng, d: usize, n: usize) -> Ensemble {
    let w = random::probability_vector(rng, n);
    let signals = (0..n)
        .map(|_| {
            let rank = 1 + random::below(rng, d);
            random::density_matrix(rng, d, rank)
        })
        .collect();
    Ensemble::new(w, signals).unwrap()
}

fn expr_strategy() -> impl Strategy<Value = EntropyExpr> {
    let leaf = prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(EntropyExpr::atom);
    leaf.prop_recursive(4, 16, 2, |inner| {
        (inner.clone(), inner, 0..3u8).prop_map(|(l, r, op)| {
            let (l, r) = (Box::new(l), Box::new(r));
            match op {
                0 => EntropyExpr::Comma(l, r),
                1 => EntropyExpr::Colon(l, r),
                _ => EntropyExpr::Bar(l, r),
            }
        })
    })
}

/// Set denoted by an expression when each atom is a set of integers.
fn set_of(e: &EntropyExpr, assign: &dyn Fn(&str) -> BTreeSet<u32>) -> BTreeSet<u32> {
    match e {
        EntropyExpr::Atom(a) => assign(a),
        EntropyExpr::Comma(l, r) => &set_of(l, assign) | &set_of(r, assign),
        EntropyExpr::Colon(l, r) => &set_of(l, assign) & &set_of(r, assign),
        EntropyExpr::Bar(l, r) => &set_of(l, assign) - &set_of(r, assign),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_nets_have_unit_total_norm(seed in any::<u64>()) {
        let net = random_qb_net(&mut random::seeded(seed));
        // Column checks hold by construction; the external-node condition
        // is not implied by them once a node has children.
        let report = validate(&net);
        prop_assert!(report.violations.iter().all(|v| v.kind == ViolationKind::ExternalNorm), "{}", report);
        prop_assert!(net.dag().story_count() <= 1 << 12);
        let cb = parent_cb_net(&net);
        let mut total = 0.0;
        for s in stories(net.dag()).unwrap() {
            let a = net.story_amplitude(&s).unwrap();
            let p = cb.story_value(&s).unwrap();
            prop_assert!((p - a.norm_sqr()).abs() < 1e-14);
            total += a.norm_sqr();
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn node_classes_partition(seed in any::<u64>()) {
        let net = random_qb_net(&mut random::seeded(seed));
        let dag = net.dag();
        let (internal, external) = dag.classify_nodes();
        let mut all: Vec<usize> = internal.iter().chain(&external).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..dag.len()).collect::<Vec<_>>());
        for &i in &internal {
            prop_assert!(!dag.children_of(i).is_empty());
        }
        for &i in &external {
            prop_assert!(dag.children_of(i).is_empty());
        }
    }

    #[test]
    fn probability_families_are_closed(seed in any::<u64>()) {
        let net = random_qb_net(&mut random::seeded(seed));
        let r = closure_check(&net).unwrap();
        // The net-level family is not closed in general (interference).
        prop_assert!(r.p_mu_residual < 1e-10, "{:?}", r);
        prop_assert!(r.p_mu_vs_cb < 1e-10, "{:?}", r);
        let names: Vec<String> = net.dag().names(&(0..net.dag().len()).collect::<Vec<_>>());
        for k in 1..=names.len() {
            let t = p_gamma(&net, &names[..k]).unwrap();
            prop_assert!((t.total() - 1.0).abs() < 1e-10);
            prop_assert!(t.values.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn display_parse_round_trip(e in expr_strategy()) {
        let back = entexpr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(entexpr::expand(&back).unwrap(), entexpr::expand(&e).unwrap());
    }

    #[test]
    fn expansion_matches_set_measure(e in expr_strategy(), sets in prop::collection::vec(prop::collection::btree_set(0u32..12, 0..8), 4)) {
        let assign = |name: &str| sets[(name.as_bytes()[0] - b'a') as usize].clone();
        let direct = set_of(&e, &assign).len() as i64;
        let sum = entexpr::expand(&e).unwrap();
        let via: i64 = sum
            .terms
            .iter()
            .map(|(c, vars)| c * vars.iter().fold(BTreeSet::new(), |acc, v| &acc | &assign(v)).len() as i64)
            .sum();
        prop_assert_eq!(direct, via);
    }

    #[test]
    fn quantum_entropy_bounds(seed in any::<u64>(), k in 2usize..4) {
        let mut rng = random::seeded(seed);
        let names = ["x", "y", "z"];
        let n = 1 << k;
        let rank = 1 + random::below(&mut rng, n);
        let axes = names[..k].iter().map(|a| qbnet::density::Axis::new(a, 2)).collect();
        let rho = DensityMatrix::new(axes, random::density_matrix(&mut rng, n, rank)).unwrap();
        for a in &names[..k] {
            let (s, h) = (rho.s(a).unwrap(), rho.h(a).unwrap());
            prop_assert!(-1e-10 <= s && s <= h + 1e-10 && h <= 1.0 + 1e-10);
        }
        let all = names[..k].join(",");
        let u = random::unitary(&mut rng, n);
        prop_assert!((rho.conjugate(&u).unwrap().s(&all).unwrap() - rho.s(&all).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn poms_measure_and_dilate(seed in any::<u64>(), d in 1usize..4, m in 1usize..5) {
        let mut rng = random::seeded(seed);
        let pom = random_pom(&mut rng, d, m);
        let rank = 1 + random::below(&mut rng, d);
        let beta = random::density_matrix(&mut rng, d, rank);
        let rho = DensityMatrix::single("q", beta.clone()).unwrap();
        let probs = measure_probs(&rho, &pom).unwrap();
        prop_assert!((probs.total() - 1.0).abs() < 1e-10);
        prop_assert!(probs.values.iter().all(|&v| v >= -1e-12));
        for variant in [DilationVariant::OrthogonalProjector, DilationVariant::General] {
            let u = dilation_unitary(&pom, variant).unwrap();
            prop_assert!(linalg::unitarity_residual(&u) < 1e-9);
            prop_assert!(dilation_residual(&pom, variant, &u).unwrap() < 1e-10);
            if (d * m).pow(6) > 1 << 20 {
                continue;
            }
            let prep = qbnet::density::mixed_state_net(&beta).unwrap();
            let out = pom_net(&pom, &prep, variant).unwrap().outcome_density().unwrap();
            for (b, p) in probs.values.iter().enumerate() {
                prop_assert!((out.matrix()[(b, b)].re - p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn holevo_bounds_mutual_information(seed in any::<u64>(), d in 1usize..4, n in 1usize..4, m in 1usize..5) {
        let mut rng = random::seeded(seed);
        let e = random_ensemble(&mut rng, d, n);
        let p = random_pom(&mut rng, d, m);
        prop_assert!(mutual_info(&channel(&e, &p).unwrap()) <= holevo(&e).unwrap() + 1e-8);
    }
}

#[test]
fn holevo_information_special_cases() {
    let mut rng = random::seeded(11);
    for _ in 0..20 {
        let d = 2 + random::below(&mut rng, 2);
        let n = 1 + random::below(&mut rng, 3);
        let w = random::probability_vector(&mut rng, n);

        let pure: Vec<_> = (0..n).map(|_| random::pure_state(&mut rng, d)).collect();
        let e = Ensemble::pure(w.clone(), &pure).unwrap();
        let avg = qbnet::infotheory::ensemble_avg(&e).von_neumann_entropy().unwrap();
        assert!((holevo(&e).unwrap() - avg).abs() < 1e-9);

        let same = random::density_matrix(&mut rng, d, d);
        let e = Ensemble::new(w.clone(), vec![same; n]).unwrap();
        assert!(holevo(&e).unwrap().abs() < 1e-9);

        let u = random::unitary(&mut rng, d);
        let k = n.min(d);
        let cols: Vec<_> = (0..k).map(|j| u.column(j).into_owned()).collect();
        let wk: Vec<f64> = {
            let s: f64 = w[..k].iter().sum();
            w[..k].iter().map(|x| x / s).collect()
        };
        let e = Ensemble::pure(wk.clone(), &cols).unwrap();
        assert!((holevo(&e).unwrap() - shannon_entropy(&wk)).abs() < 1e-9);

        // Commuting signals share the eigenbasis of u: χ is the classical
        // H(a:b) with P(b|a) the eigenvalues of signal a.
        let spectra: Vec<Vec<f64>> = (0..n).map(|_| random::probability_vector(&mut rng, d)).collect();
        let signals: Vec<CMat> = spectra
            .iter()
            .map(|p| &u * CMat::from_diagonal(&p.iter().map(|&x| linalg::re(x)).collect::<Vec<_>>().into()) * u.adjoint())
            .collect();
        let e = Ensemble::new(w.clone(), signals).unwrap();
        let pb: Vec<f64> = (0..d).map(|b| w.iter().zip(&spectra).map(|(wa, p)| wa * p[b]).sum()).collect();
        let cond: f64 = w.iter().zip(&spectra).map(|(wa, p)| wa * shannon_entropy(p)).sum();
        assert!((holevo(&e).unwrap() - (shannon_entropy(&pb) - cond)).abs() < 1e-9);
    }
}

#[test]
fn optimizer_best_is_monotone_in_restarts() {
    let e = qbnet::infotheory::trine_ensemble();
    let opts = SearchOptions { sweeps: 4, ..SearchOptions::default() };
    let r = maximize_accessible_info_with(&e, Some(3), 6, 5, &[], &opts).unwrap();
    assert!(r.best_by_restart.windows(2).all(|w| w[0] <= w[1]));
    let fewer = maximize_accessible_info_with(&e, Some(3), 3, 5, &[], &opts).unwrap();
    assert_eq!(fewer.best_by_restart[..], r.best_by_restart[..3]);
}

#[test]
fn expression_grammar_cases() {
    let e = |s: &str| entexpr::expand(&entexpr::parse(s).unwrap()).unwrap();
    assert_eq!(e("a,a,b"), e("a,b"));
    assert_eq!(entexpr::parse("a:b,c").unwrap(), entexpr::parse("a:(b,c)").unwrap());
    assert_eq!(entexpr::parse("a|b:c").unwrap(), entexpr::parse("a|(b:c)").unwrap());
    assert_eq!(entexpr::parse("a:b:c").unwrap(), entexpr::parse("(a:b):c").unwrap());
}

#[test]
fn protocol_nets_are_valid_and_rho_out_is_pure() {
    let mut rng = random::seeded(2);
    let nets = vec![
        protocols::epr_net().net,
        protocols::eraser_net().net,
        protocols::teleport_net(&protocols::demo_alpha2()).unwrap().net,
        protocols::dense_coding_net(&protocols::demo_alpha4()).unwrap().net,
        protocols::sys_env_net(1, &protocols::SysEnvParams::random(&mut rng, 1, 2, 2, 2)).unwrap().net,
        protocols::two_mixtures_net(&protocols::TwoMixParams::random(&mut rng, [2, 2], [2, 1])).unwrap().net,
    ];
    for net in nets {
        assert!(validate(&net).is_valid());
        let out = rho_out(&net).unwrap();
        let vals = out.eig().unwrap().values;
        assert!((vals[0] - 1.0).abs() < 1e-9, "{vals:?}");
        assert!(vals[1..].iter().all(|v| v.abs() < 1e-9));
    }
}

#[test]
fn general_variant_outcome_density_is_diagonal() {
    let mut rng = random::seeded(9);
    for _ in 0..20 {
        let d = 2 + random::below(&mut rng, 2);
        let m = if d == 2 { 2 + random::below(&mut rng, 3) } else { 2 + random::below(&mut rng, 2) };
        let pom = random_pom(&mut rng, d, m);
        let beta = random::density_matrix(&mut rng, d, d);
        let prep = qbnet::density::mixed_state_net(&beta).unwrap();
        let out = pom_net(&pom, &prep, DilationVariant::General).unwrap().outcome_density().unwrap();
        let off = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| out.matrix()[(i, j)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-10);
    }
}
