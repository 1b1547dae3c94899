//! End-to-end acceptance checks. Runs every criterion, prints one line per
//! criterion and exits non-zero if any failed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use lpembed::complexify::{check_abstract_complex_lp, modulus_theta_grid, ComplexModel, ComplexNorm, ComplexPair};
use lpembed::disintegration::{
    collapse_to_leaves, lift_isomorphism, summation_relation, Disintegration, FiniteTree, LiftOptions, Node, TreeIso,
};
use lpembed::embedding::build_embedding;
use lpembed::logic::{
    axioms_t_lp_real, build_tn_model_exact, build_tn_model_mc, check_theory, t_lp_grid, theory_tn, Interpretation,
    LatticeModel, PhiPsiGrid, QuantifierBudget, Scalar, Theory, DEFAULT_MAX_DENOMINATOR,
};
use lpembed::spaces::{disjointify, is_disjointly_supported, is_formally_disjoint, StepValues};
use lpembed::stable::{independent_family, sample_symmetric_stable, NormEstimator, StableSpec};
use lpembed::{Complex64, DyadicStep, PNorm, ScalarField, StepSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn pn(p: f64) -> PNorm {
    PNorm::new(p).unwrap()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn real_values(v: &DyadicStep) -> Vec<f64> {
    match v.values() {
        StepValues::Real(x) => x.clone(),
        StepValues::Complex(_) => panic!("expected a real step"),
    }
}

fn stable_cf() -> Outcome {
    let ts = [-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0];
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (i, r) in [1.0, 1.5, 2.0].into_iter().enumerate() {
        let spec = StableSpec::real(r, 1.0).unwrap();
        let sv = sample_symmetric_stable(spec, 100_000, 11, i as u64).unwrap();
        let err = ts
            .iter()
            .map(|&t| (sv.empirical_cf(Complex64::new(t, 0.0)) - (-f64::abs(t).powf(r)).exp()).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        detail.push(format!("r={r}: {err:.4}"));
    }
    verdict(worst <= 0.02, format!("max CF error {} (bound 0.02)", detail.join(", ")))
}

fn gaussian_l1() -> Outcome {
    let sv = sample_symmetric_stable(StableSpec::real(2.0, 1.0).unwrap(), 1_000_000, 12, 0).unwrap();
    let est = sv.samples.lp_norm(pn(1.0), NormEstimator::PlainMean);
    let target = 2.0 / PI.sqrt();
    let rel = (est / target - 1.0).abs();
    verdict(rel <= 0.01, format!("||g||_1 = {est:.5} vs 2/sqrt(pi) = {target:.5}, rel {rel:.2e}"))
}

fn embedding_isometry() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut detail = Vec::new();
    for field in [ScalarField::Real, ScalarField::Complex] {
        for (r, p) in [(2.0, 1.0), (1.5, 1.0), (1.3, 1.2)] {
            let basis = build_embedding(r, pn(p), 4, 1_000_000, 13, field).unwrap();
            let rep = basis.verify_isometry(20, Some(0.05), 14).unwrap();
            ok &= rep.max_relative_error <= 0.05;
            worst = worst.max(rep.max_relative_error);
            detail.push(format!("{field}({r},{p})={:.4}", rep.max_relative_error));
        }
    }
    verdict(ok, format!("max relative error {worst:.4} (bound 0.05): {}", detail.join(" ")))
}

fn stability_identity() -> Outcome {
    let mut worst = 0.0f64;
    for r in [1.0, 1.5, 2.0] {
        let spec = StableSpec::real(r, 1.0).unwrap();
        let fam = independent_family(spec, 3, 1_000_000, 15).unwrap();
        let a = 0.5f64.powf(1.0 / r);
        let b = a;
        let mut mix = fam[0].samples.scale(a);
        mix.axpy(Complex64::new(b, 0.0), &fam[1].samples).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let z = Complex64::new(t, 0.0);
            worst = worst.max((mix.empirical_cf(z) - fam[2].samples.empirical_cf(z)).abs());
        }
    }
    verdict(worst <= 0.01, format!("max CF gap {worst:.4} over r in {{1, 1.5, 2}} (bound 0.01)"))
}

/// Leaves get random values on disjoint blocks of cells; each node is the sum
/// of the leaves below it.
fn random_summative<R: Rng>(rng: &mut R, tree: &FiniteTree, p: PNorm) -> Disintegration<StepSpace> {
    let leaves = tree.terminals();
    let level = (usize::BITS - (leaves.len().max(1) - 1).leading_zeros()) + 1;
    let cells = 1usize << level;
    let per = cells / leaves.len();
    let mut leaf_vec = BTreeMap::new();
    for (i, leaf) in leaves.iter().enumerate() {
        let mut v = vec![0.0; cells];
        for x in &mut v[i * per..(i + 1) * per] {
            *x = rng.random_range(-1.0..=1.0);
        }
        v[i * per] = 0.5 + rng.random_range(0.0..1.0);
        leaf_vec.insert(leaf.clone(), DyadicStep::real(level, v).unwrap());
    }
    Disintegration::from_fn(StepSpace::real(p), tree.clone(), p, |n| {
        let mut acc = DyadicStep::zero(level, ScalarField::Real);
        for (leaf, v) in &leaf_vec {
            if n.is_prefix_of(leaf) {
                acc = acc.try_add(v).unwrap();
            }
        }
        acc
    })
}

fn random_coeffs<R: Rng>(rng: &mut R, tree: &FiniteTree) -> BTreeMap<Node, Complex64> {
    tree.nodes().map(|n| (n.clone(), Complex64::new(rng.random_range(-1.0..=1.0), 0.0))).collect()
}

fn leaf_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let tree = FiniteTree::random(&mut rng, 5, 3);
        let d = random_summative(&mut rng, &tree, pn(1.5));
        let beta = random_coeffs(&mut rng, &tree);
        let gamma = collapse_to_leaves(&tree, &beta).unwrap();
        let direct = d.combine(&beta).unwrap();
        let collapsed = d.combine(&gamma).unwrap();
        worst = worst.max(direct.sup_distance(&collapsed).unwrap());
    }
    verdict(worst <= 1e-12, format!("500 instances, max pointwise gap {worst:.2e} (bound 1e-12)"))
}

/// A copy of `d0` on the relabeled tree: every leaf vector is moved to its
/// own fresh block of cells (a random permutation of blocks, with random
/// signs), so that node norms match while the vectors differ.
fn norm_matched_copy<R: Rng>(
    rng: &mut R,
    d0: &Disintegration<StepSpace>,
    f: &TreeIso,
    target: &FiniteTree,
) -> Disintegration<StepSpace> {
    let leaves = d0.tree().terminals();
    let level = d0.vector(&leaves[0]).unwrap().level() + 1;
    let blocks = 1usize << level;
    let src_len = 1usize << (level - 1);
    let mut order: Vec<usize> = (0..leaves.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut image_leaf = BTreeMap::new();
    for (i, leaf) in leaves.iter().enumerate() {
        let v = real_values(d0.vector(leaf).unwrap());
        let mut w = vec![0.0; blocks];
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        // Each value occupies two half cells, keeping its L^p mass.
        let start = order[i] * 2 * src_len / leaves.len();
        let support: Vec<f64> = v.iter().copied().filter(|x| *x != 0.0).collect();
        for (k, x) in support.iter().enumerate() {
            w[start + 2 * k] = sign * x;
            w[start + 2 * k + 1] = sign * x;
        }
        image_leaf.insert(f.get(leaf).unwrap().clone(), DyadicStep::real(level, w).unwrap());
    }
    let p = d0.exponent();
    Disintegration::from_fn(StepSpace::real(p), target.clone(), p, |n| {
        let mut acc = DyadicStep::zero(level, ScalarField::Real);
        for (leaf, v) in &image_leaf {
            if n.is_prefix_of(leaf) {
                acc = acc.try_add(v).unwrap();
            }
        }
        acc
    })
}

fn lifting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut node_gap, mut iso_gap, mut kernel) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..50 {
        let p = [1.0, 1.5, 2.0][i % 3];
        let tree = FiniteTree::random(&mut rng, 4, 3);
        let d0 = random_summative(&mut rng, &tree, pn(p));
        let (f, target) = TreeIso::random_relabeling(&tree, &mut rng);
        let d1 = norm_matched_copy(&mut rng, &d0, &f, &target);
        let lifted = lift_isomorphism(&d0, &d1, &f, LiftOptions { tol: 1e-10, trials: 8, seed: i as u64 })
            .map_err(|e| format!("pair {i}: {e}"))?;
        for n in tree.nodes() {
            let single = BTreeMap::from([(n.clone(), Complex64::new(1.0, 0.0))]);
            let image = lifted.apply(&single).unwrap();
            let expected = d1.vector(f.get(n).unwrap()).unwrap();
            node_gap = node_gap.max(image.sup_distance(expected).unwrap());
        }
        for _ in 0..100 {
            let beta = random_coeffs(&mut rng, &tree);
            let x = d0.combine(&beta).unwrap();
            let tx = lifted.apply(&beta).unwrap();
            iso_gap = iso_gap.max((tx.lp_norm(pn(p)) - x.lp_norm(pn(p))).abs());
        }
        for n in tree.nodes().filter(|n| !tree.is_terminal(n)) {
            let rel = summation_relation(&tree, n);
            kernel = kernel.max(lifted.apply(&rel).unwrap().lp_norm(pn(p)));
            kernel = kernel.max(lifted.apply_direct(&rel).unwrap().lp_norm(pn(p)));
        }
    }
    verdict(
        node_gap <= 1e-12 && iso_gap <= 1e-10 && kernel <= 1e-12,
        format!("node images {node_gap:.1e}, norm gap {iso_gap:.1e} (1e-10), kernel {kernel:.1e} (1e-12)"),
    )
}

fn tn_satisfaction() -> Outcome {
    let budget = QuantifierBudget::default();
    let grid = PhiPsiGrid::rational(DEFAULT_MAX_DENOMINATOR);
    let tlp = t_lp_grid(DEFAULT_MAX_DENOMINATOR);

    let exact = build_tn_model_exact(3, 2.0).unwrap();
    let th = theory_tn(3, 2.0, 2.0, &tlp, &grid).unwrap();
    let rep = check_theory(&exact.interp, &th, &budget, 1e-12);
    let exact_ok = rep.pass;
    let exact_detail = format!("exact n=3: {} sentences, max {:.1e}", th.len(), rep.max_value);

    let basis = build_embedding(2.0, pn(1.0), 4, 1_000_000, 18, ScalarField::Real).unwrap();
    let mc = build_tn_model_mc(2, &basis, true).unwrap();
    let th = theory_tn(2, 1.0, 2.0, &tlp, &grid).unwrap();
    let rep = check_theory(&mc.interp, &th, &budget, 0.05);
    let (phi, gamma, psi, tlp_max) =
        (rep.max_value_of("Phi"), rep.max_value_of("Gamma"), rep.max_value_of("Psi"), rep.max_value_of("TLp"));
    let mc_ok = phi <= 1e-9 && gamma <= 1e-9 && psi <= 0.05 && tlp_max <= 1e-9;
    verdict(
        exact_ok && mc_ok,
        format!(
            "{exact_detail}; mc n=2: Phi {phi:.1e}, Gamma {gamma:.1e}, Psi {psi:.4}, TLp {tlp_max:.1e}, weight shift {:.1e}",
            mc.calibration_shift.unwrap_or(0.0)
        ),
    )
}

fn t_lp_discrimination() -> Outcome {
    let half = Scalar::Ratio(1, 2);
    let mut th = Theory::new();
    th.extend(axioms_t_lp_real(1.0, &[(half, half)]).unwrap());
    let budget = QuantifierBudget::default();
    let l1 = Interpretation::new(LatticeModel::lp(pn(1.0), 2).unwrap());
    let l2 = Interpretation::new(LatticeModel::lp(pn(2.0), 2).unwrap());
    let s1 = check_theory(&l1, &th, &budget, 0.0).sentences.remove(0);
    let s2 = check_theory(&l2, &th, &budget, 0.0).sentences.remove(0);
    let width = s1.bracket[1] - s1.bracket[0];
    verdict(
        s1.value <= width && s2.value >= 0.05,
        format!("l1_2: {:.1e} (bracket width {width:.3}); l2_2: {:.4} (>= 0.05)", s1.value, s2.value),
    )
}

fn random_step<R: Rng>(rng: &mut R, field: ScalarField) -> DyadicStep {
    let level = rng.random_range(0..=5);
    let v = DyadicStep::random(rng, level, field);
    let keep: Vec<bool> = (0..v.len()).map(|_| rng.random_bool(0.6)).collect();
    match v.values() {
        StepValues::Real(x) => {
            DyadicStep::real(level, x.iter().zip(&keep).map(|(x, k)| if *k { *x } else { 0.0 }).collect()).unwrap()
        }
        StepValues::Complex(x) => DyadicStep::complex(
            level,
            x.iter().zip(&keep).map(|(x, k)| if *k { *x } else { Complex64::default() }).collect(),
        )
        .unwrap(),
    }
}

fn disjointify_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut all_disjoint = true;
    for _ in 0..1000 {
        let f0 = random_step(&mut rng, ScalarField::Real);
        let f1 = random_step(&mut rng, ScalarField::Real);
        let (g0, g1) = disjointify(&f0, &f1).unwrap();
        all_disjoint &= is_disjointly_supported(&g0, &g1).unwrap();
        let overlap = f0.abs().unwrap().meet(&f1.abs().unwrap()).unwrap();
        for p in [1.0, 2.0] {
            let bound = overlap.lp_norm(pn(p));
            let moved = g0.try_sub(&f0).unwrap().lp_norm(pn(p)).max(g1.try_sub(&f1).unwrap().lp_norm(pn(p)));
            worst_excess = worst_excess.max(moved - bound);
        }
    }
    verdict(
        all_disjoint && worst_excess <= 1e-12,
        format!("1000 pairs, disjoint outputs: {all_disjoint}, max(||g-f|| - bound) = {worst_excess:.1e}"),
    )
}

fn complex_characterization() -> Outcome {
    let mut worst = 0.0f64;
    let mut corrupted_min = f64::INFINITY;
    let mut ok = true;
    for p in [1.0, 1.5, 2.0] {
        let rep = check_abstract_complex_lp(&ComplexModel::genuine(pn(p)), 200, 1e-10, 20).unwrap();
        ok &= rep.pass;
        worst = worst
            .max(rep.condition1_residual)
            .max(rep.condition2_residual)
            .max(rep.remark_residual)
            .max(rep.g_residual);
        let bad =
            check_abstract_complex_lp(&ComplexModel::new(pn(p), ComplexNorm::SumOfParts), 200, 1e-10, 20).unwrap();
        ok &= !bad.pass && bad.witness_residual >= 0.1;
        corrupted_min = corrupted_min.min(bad.witness_residual);
    }
    verdict(
        ok,
        format!("genuine worst residual {worst:.1e} (1e-10); ||a||+||b|| witness residual >= {corrupted_min:.3}"),
    )
}

fn theta_modulus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ks = [8usize, 64, 256];
    let (mut bound_ok, mut monotone) = (true, true);
    let mut worst_ratio = 0.0f64;
    for _ in 0..200 {
        let level = rng.random_range(0..=5);
        let v = ComplexPair::from_complex(&DyadicStep::random(&mut rng, level, ScalarField::Complex));
        let exact = real_values(&v.modulus());
        let mut prev: Option<Vec<f64>> = None;
        for &k in &ks {
            let g = real_values(&modulus_theta_grid(&v, k).unwrap());
            let slack = 1.0 - (PI / k as f64).cos();
            for (e, x) in exact.iter().zip(&g) {
                let err = e - x;
                bound_ok &= err >= -1e-12 && err <= slack * e + 1e-12;
                if *e > 0.0 {
                    worst_ratio = worst_ratio.max(err / (slack * e));
                }
            }
            if let Some(prev) = &prev {
                monotone &= prev.iter().zip(&g).all(|(a, b)| a <= b);
            }
            prev = Some(g);
        }
    }
    verdict(
        bound_ok && monotone,
        format!("K in {{8, 64, 256}}: within bound {bound_ok} (max error/bound {worst_ratio:.3}), monotone {monotone}"),
    )
}

fn lamperti() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let p = pn(1.5);
    let (mut agree, mut disjoint_count) = (0, 0);
    for i in 0..200 {
        let f = random_step(&mut rng, ScalarField::Real);
        let g = random_step(&mut rng, ScalarField::Real);
        let formal = is_formally_disjoint(&[f.clone(), g.clone()], p, 16, 1e-9, i).unwrap().holds;
        let support = is_disjointly_supported(&f, &g).unwrap();
        disjoint_count += support as usize;
        agree += (formal == support) as usize;
    }
    let f = DyadicStep::real(1, vec![1.0, 1.0]).unwrap();
    let g = DyadicStep::real(1, vec![1.0, -1.0]).unwrap();
    let formal2 = is_formally_disjoint(&[f.clone(), g.clone()], pn(2.0), 64, 1e-12, 0).unwrap().holds;
    let support2 = is_disjointly_supported(&f, &g).unwrap();
    verdict(
        agree == 200 && formal2 && !support2,
        format!(
            "p=1.5: {agree}/200 agree ({disjoint_count} disjoint pairs); p=2: (1,1),(1,-1) formally disjoint {formal2}, disjoint supports {support2}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("stable characteristic function", stable_cf),
        ("gaussian L1 norm", gaussian_l1),
        ("embedding isometry", embedding_isometry),
        ("stability identity", stability_identity),
        ("leaf collapse", leaf_collapse),
        ("isomorphism lifting", lifting),
        ("T_n satisfaction", tn_satisfaction),
        ("abstract L^p axiom discrimination", t_lp_discrimination),
        ("disjointification bound", disjointify_bound),
        ("complex characterization", complex_characterization),
        ("theta-grid modulus", theta_modulus),
        ("formal vs support disjointness", lamperti),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {label}: PASS [{secs:.1}s] {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {label}: FAIL [{secs:.1}s] {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
