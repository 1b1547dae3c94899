use std::fs;
use std::io::BufReader;

use lpembed::disintegration::{Disintegration, FiniteTree, LiftOptions, TreeIso};
use lpembed::embedding::{build_embedding, dyadic_disintegration};
use lpembed::logic::{
    build_tn_model, build_tn_model_mc, check_theory, eval, parse_formula, t_lp_grid, theory_tn, Interpretation,
    LatticeModel, PhiPsiGrid, QuantifierBudget, Theory,
};
use lpembed::stable::{read_binary, sample_symmetric_stable, StableSpec};
use lpembed::{DyadicStep, PNorm, ScalarField, StepSpace};
use proptest::prelude::*;

fn pn(p: f64) -> PNorm {
    PNorm::new(p).unwrap()
}

#[test]
fn samples_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let sv = sample_symmetric_stable(StableSpec::complex(1.5, 2.0).unwrap(), 500, 3, 7).unwrap();
    sv.write_binary(fs::File::create(&path).unwrap()).unwrap();
    let back = read_binary(BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, sv);
}

#[test]
fn disintegration_text_round_trip_keeps_the_lift() {
    let d = dyadic_disintegration(pn(1.5), 3);
    let back = Disintegration::<StepSpace>::from_text(&d.to_text()).unwrap();
    let f = TreeIso::identity(d.tree());
    let lifted = lpembed::disintegration::lift_isomorphism(&d, &back, &f, LiftOptions::default()).unwrap();
    for (n, v) in d.iter() {
        assert!(lifted.image(n).unwrap().same_function(v));
    }
}

#[test]
fn theory_file_round_trip_gives_the_same_values() {
    let th = theory_tn(1, 1.0, 2.0, &t_lp_grid(2), &PhiPsiGrid::rational(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.txt");
    fs::write(&path, th.to_text()).unwrap();
    let back = Theory::parse(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, th);

    let basis = build_embedding(2.0, pn(1.0), 2, 20_000, 5, ScalarField::Real).unwrap();
    let model = build_tn_model_mc(1, &basis, true).unwrap();
    let budget = QuantifierBudget::default();
    let a = check_theory(&model.interp, &th, &budget, 0.05);
    let b = check_theory(&model.interp, &back, &budget, 0.05);
    assert_eq!(a, b);
    assert!(a.pass, "{:?}", a.worst);
}

#[test]
fn l1_model_built_by_hand_from_disjoint_leaves() {
    // Four disjoint unit-norm leaves in l^1_4 read as an L^1 model of T_2.
    let model = LatticeModel::new(pn(1.0), vec![0.25; 4]).unwrap();
    let basis: Vec<Vec<f64>> = (0..4).map(|j| (0..4).map(|i| if i == j { 4.0 } else { 0.0 }).collect()).collect();
    let interp = build_tn_model(2, 1.0, model, &basis).unwrap();
    let th = theory_tn(2, 1.0, 1.0, &t_lp_grid(4), &PhiPsiGrid::rational(4)).unwrap();
    let rep = check_theory(&interp, &th, &QuantifierBudget::default(), 1e-12);
    assert!(rep.pass, "{:?} {}", rep.worst, rep.max_value);
}

#[test]
fn parsed_sentence_matches_closed_form() {
    // sup over the ball of d(x, c) is (1 + ||c||) / 2.
    let mut interp = Interpretation::new(LatticeModel::lp(pn(2.0), 3).unwrap());
    interp.set_constant("c", vec![0.6, 0.0, 0.0]).unwrap();
    let f = parse_formula("sup x . d(x, c)").unwrap();
    let v = eval(&f, &interp, &QuantifierBudget::default()).unwrap();
    assert!(v.lower <= 0.8 + 1e-12 && 0.8 <= v.upper + 1e-12, "{v:?}");
    assert!((v.value - 0.8).abs() < 1e-6, "{v:?}");
}

fn arb_tree() -> impl Strategy<Value = FiniteTree> {
    any::<u64>().prop_map(|seed| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        FiniteTree::random(&mut rng, 4, 3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn step_records_round_trip(level in 0u32..5, seed in any::<u64>(), complex in any::<bool>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let field = if complex { ScalarField::Complex } else { ScalarField::Real };
        let v = DyadicStep::random(&mut rng, level, field);
        let back = DyadicStep::from_text(&v.to_text()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn relabeling_preserves_shape(tree in arb_tree(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (f, image) = TreeIso::random_relabeling(&tree, &mut rng);
        prop_assert_eq!(image.len(), tree.len());
        prop_assert_eq!(image.terminals().len(), tree.terminals().len());
        for n in tree.nodes() {
            let m = f.get(n).unwrap();
            prop_assert_eq!(m.len(), n.len());
            prop_assert_eq!(tree.children(n).len(), image.children(m).len());
        }
    }
}
