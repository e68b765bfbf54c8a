mod common;

use std::collections::BTreeSet;

use cohmin_core::coherence::{coherent_equiv_bounded, MinimizeOptions};
use cohmin_core::fixtures;
use cohmin_core::format::parse_sfst;
use cohmin_core::random::{random_expr, random_valued_trace};
use cohmin_core::symbolic::{
    expand, expand_with, guard_equiv, is_symbolic_protocol, sfst_bisim_minimize,
    sfst_coherent_minimize, sfst_coherent_simulation, sfst_run, BinOp, Expr, GuardMode, Sfst,
    Type, ValuedRound, DEFAULT_EXPANSION_CAP,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn vr(pairs: &[(&str, Option<i64>)]) -> ValuedRound {
    ValuedRound::from_pairs(pairs).unwrap()
}

#[test]
fn adder_runs() {
    let adder = fixtures::adder();
    let ok = sfst_run(&adder, &[vr(&[("x", Some(2))]), vr(&[("x", Some(3))]), vr(&[("r", Some(5))])])
        .unwrap();
    let names: Vec<String> = ok.iter().map(|c| c.to_string()).collect();
    assert_eq!(names, ["A[y=2,z=3]"]);
    let bad = [vr(&[("x", Some(2))]), vr(&[("x", Some(-3))]), vr(&[("r", Some(-1))])];
    assert!(sfst_run(&adder, &bad).unwrap().is_empty());
    let start: Vec<String> = sfst_run(&adder, &[]).unwrap().iter().map(|c| c.to_string()).collect();
    assert_eq!(start, ["A[y=0,z=0]"]);
}

#[test]
fn adder_expansion_examples() {
    let e = expand(&fixtures::adder(), -2, 2).unwrap();
    let yes = [vr(&[("x", Some(2))]), vr(&[("x", Some(-1))]), vr(&[("r", Some(1))])];
    let no = [vr(&[("x", Some(1))]), vr(&[("x", Some(-1))]), vr(&[("r", Some(0))])];
    assert!(e.transducer.accepts(&e.encode(&yes).unwrap()));
    assert!(!e.transducer.accepts(&e.encode(&no).unwrap()));
}

fn adequacy(t: &Sfst, lo: i64, hi: i64, seed: u64, samples: usize) {
    let e = expand(t, lo, hi).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..samples {
        let len = rng.gen_range(0..=4);
        let w = random_valued_trace(&mut rng, t, &e.valued, len, lo, hi);
        let explicit = e.transducer.accepts(&e.encode(&w).unwrap());
        assert_eq!(explicit, !sfst_run(t, &w).unwrap().is_empty(), "{w:?}");
    }
}

#[test]
fn expansion_is_adequate_on_fixtures() {
    adequacy(&fixtures::adder(), -2, 2, 11, 300);
    adequacy(&fixtures::inplace_map().0, -1, 1, 12, 300);
    adequacy(&Sfst::from_transducer(&fixtures::fix3()), 0, 0, 13, 100);
}

#[test]
fn control_only_expansion_is_the_skeleton() {
    let f1 = Sfst::from_transducer(&fixtures::fix1());
    let e = expand(&f1, -3, 3).unwrap();
    assert!(e.valued.is_empty());
    assert_eq!(e.transducer, fixtures::fix1());
}

#[test]
fn literal_outside_domain_is_rejected() {
    assert!(matches!(
        expand(&fixtures::inplace_map().0, 1, 2),
        Err(cohmin_core::Error::DomainExceeded { .. })
    ));
}

fn inplace_protocol() -> (Sfst, Sfst) {
    let (t, p) = fixtures::inplace_map();
    (t, Sfst::from_transducer(&p))
}

#[test]
fn inplace_map_counts_and_classes() {
    let (t, p) = inplace_protocol();
    assert_eq!(t.states().len(), 13);
    let c = sfst_coherent_minimize(&t, &p, GuardMode::Structural, MinimizeOptions::default()).unwrap();
    assert_eq!(c.model.states().len(), 7);
    assert_eq!(
        c.merged_classes(),
        BTreeSet::from([
            common::names(&["D", "F"]),
            common::names(&["0", "B", "H", "J", "L"]),
            common::names(&["C", "M"]),
        ])
    );
    assert_eq!(c.model.registers(), t.registers());
    let b = sfst_bisim_minimize(&t, GuardMode::Structural, MinimizeOptions::default()).unwrap();
    assert_eq!(b.model.states().len(), 12);
    assert_eq!(b.merged_classes(), BTreeSet::from([common::names(&["C", "M"])]));

    let rel = sfst_coherent_simulation(&t, &p, GuardMode::Structural).unwrap();
    for s in t.states() {
        assert!(rel.contains(s, s));
    }
}

#[test]
fn inplace_minimisation_is_sound_in_both_modes() {
    let (t, p) = inplace_protocol();
    let valued = t.valued_ports();
    let ex = |m: &Sfst| expand_with(m, -1, 1, &valued, DEFAULT_EXPANSION_CAP).unwrap().transducer;
    let (et, ep) = (ex(&t), ex(&p));
    for mode in [GuardMode::Structural, GuardMode::BoundedSemantic { lo: -1, hi: 1 }] {
        let m = sfst_coherent_minimize(&t, &p, mode, MinimizeOptions::default()).unwrap();
        assert!(coherent_equiv_bounded(&et, &ex(&m.model), &ep, 6).unwrap(), "{mode}");
    }
}

#[test]
fn differing_guards_block_the_pair() {
    let text = "signature in x, s; out o;
states I, A, B, C;
initial I;
registers y;
trans I -> A : {s};
trans I -> B : {s};
trans A -> C : {x} when y > 0;
trans B -> C : {x} when y > 1;
";
    let t = parse_sfst(text).unwrap();
    let p = Sfst::from_transducer(&fixtures::universal_protocol(t.signature()).unwrap());
    let structural = sfst_coherent_simulation(&t, &p, GuardMode::Structural).unwrap();
    assert!(!structural.contains("A", "B") && !structural.contains("B", "A"));
    let same = parse_sfst(&text.replace("y > 1", "0 < y")).unwrap();
    let rel = sfst_coherent_simulation(&same, &p, GuardMode::Structural).unwrap();
    assert!(rel.contains("A", "B") && rel.contains("B", "A"));
}

#[test]
fn symbolic_protocol_recognition() {
    assert!(is_symbolic_protocol(&Sfst::from_transducer(&fixtures::pr1())));
    assert!(!is_symbolic_protocol(&fixtures::adder()));
    let ident = parse_sfst(
        "signature in a; out;
states s;
initial s;
registers y;
trans s -> s : {a} when true do y := y;
",
    )
    .unwrap();
    assert!(is_symbolic_protocol(&ident));
    let adder = fixtures::adder();
    assert!(matches!(
        sfst_coherent_simulation(&adder, &adder, GuardMode::Structural),
        Err(cohmin_core::Error::NotAProtocol(_))
    ));
}

/// Rewrites into a semantically equal expression by commuting operands and flipping comparisons.
fn shuffle(e: &Expr, rng: &mut StdRng) -> Expr {
    match e {
        Expr::Neg(x) => Expr::Neg(Box::new(shuffle(x, rng))),
        Expr::Not(x) => Expr::Not(Box::new(shuffle(x, rng))),
        Expr::Bin(op, a, b) => {
            let (a, b) = (shuffle(a, rng), shuffle(b, rng));
            let swap = rng.gen_bool(0.5);
            match op {
                BinOp::Add | BinOp::Mul | BinOp::Eq | BinOp::And | BinOp::Or if swap => {
                    Expr::bin(*op, b, a)
                }
                BinOp::Lt if swap => Expr::bin(BinOp::Gt, b, a),
                BinOp::Gt if swap => Expr::bin(BinOp::Lt, b, a),
                BinOp::Le if swap => Expr::bin(BinOp::Ge, b, a),
                BinOp::Ge if swap => Expr::bin(BinOp::Le, b, a),
                _ => Expr::bin(*op, a, b),
            }
        }
        other => other.clone(),
    }
}

#[test]
fn structural_equivalence_is_sound() {
    let mut rng = StdRng::seed_from_u64(2024);
    let semantic = GuardMode::DEFAULT_SEMANTIC;
    let mut equated = 0;
    for i in 0..1000 {
        let g = random_expr(&mut rng, &["y", "z"], Type::Bool, 3);
        let h = if i % 2 == 0 {
            shuffle(&g, &mut rng)
        } else {
            random_expr(&mut rng, &["y", "z"], Type::Bool, 3)
        };
        if guard_equiv(&g, &h, GuardMode::Structural).unwrap() {
            equated += 1;
            match guard_equiv(&g, &h, semantic) {
                Ok(same) => assert!(same, "{g} vs {h}"),
                Err(e) => assert!(matches!(e, cohmin_core::Error::Overflow(_)), "{e}"),
            }
        }
    }
    assert!(equated >= 400, "only {equated} pairs equated");
}

#[test]
fn guard_examples() {
    let p = |s: &str| Expr::parse(s).unwrap();
    assert!(guard_equiv(&p("y + z > 0"), &p("z + y > 0"), GuardMode::Structural).unwrap());
    assert!(!guard_equiv(&p("y > 0"), &p("y >= 1"), GuardMode::Structural).unwrap());
    assert!(guard_equiv(&p("y > 0"), &p("y >= 1"), GuardMode::DEFAULT_SEMANTIC).unwrap());
}
