use formality_core::algebra::rational::rat;
use formality_core::algebra::{MultiIndex, Poly};
use formality_core::dmodule::{FlatModule, ModuleVec};
use formality_core::formality::*;
use formality_core::polydiff::PolyDiffOp;
use formality_core::polyvector::PolyVector;
use formality_core::random::{random_flat_module, random_module_vec, random_poly};
use formality_core::weighted::Weighted;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mc() -> McConfig {
    McConfig { samples: 200_000, seed: 21 }
}

/// `P ∘ P` for constant-coefficient `P = Σ c ∂^α ⊗ ∂^β`.
fn square(p: &PolyDiffOp) -> PolyDiffOp {
    let mut out = PolyDiffOp::zero(p.dim());
    for (k1, c1) in p.terms() {
        for (k2, c2) in p.terms() {
            out.add_term(vec![k1[0].add(&k2[0]), k1[1].add(&k2[1])], c1 * c2);
        }
    }
    out
}

fn so3() -> PoissonInput {
    let x = |i| Poly::var(3, i);
    let pi = PolyVector::bivector(3, &[((0, 1), x(2)), ((1, 2), x(0)), ((0, 2), -&x(1))]);
    PoissonInput::new(pi).unwrap()
}

#[test]
fn constant_pi_matches_moyal() {
    let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::one(2))])).unwrap();
    let mut src = WeightSource::new(mc());
    let s = build_star(&pi, 2, &mut src).unwrap();
    let p = bivector_operator(pi.pi());
    // exp(hP/2): P/2 at h¹, P²/8 at h²
    let d1 = s.coeff(1).sub(&Weighted::exact(p.scale(&rat(1, 2))));
    let d2 = s.coeff(2).sub(&Weighted::exact(square(&p).scale(&rat(1, 8))));
    for d in [d1, d2] {
        let e = d.evaluate(s.table());
        assert!(e.vanishes_within(3.0), "{e:?}");
    }
    // only the double wedge survives at h² for constant π
    assert_eq!(s.coeff(2).terms().count(), 1);
}

#[test]
fn linear_pi_commutator_is_bracket() {
    let pi = so3();
    let mut src = WeightSource::new(mc());
    let s = build_star(&pi, 1, &mut src).unwrap();
    let f = Poly::parse(3, "x1^2*x2 + x3").unwrap();
    let g = Poly::parse(3, "x2*x3 - 2*x1").unwrap();
    let fg = s.star_apply(&f, &g).unwrap();
    let gf = s.star_apply(&g, &f).unwrap();
    let comm = fg.coeff(1).sub(gf.coeff(1));
    let bracket = poisson_bracket(pi.pi(), &f, &g).unwrap();
    assert!(!bracket.is_zero());
    let e = comm.sub(&Weighted::exact(bracket)).evaluate(s.table());
    assert!(e.vanishes_within(3.0), "{e:?}");
}

#[test]
fn constant_pi_is_associative_to_second_order() {
    let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::constant(2, rat(3, 2)))])).unwrap();
    let mut src = WeightSource::new(mc());
    let s = build_star(&pi, 2, &mut src).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let (f, g, k) = (random_poly(&mut rng, 2, 3, 3), random_poly(&mut rng, 2, 3, 3), random_poly(&mut rng, 2, 3, 3));
        let d = assoc_defect(&s, &f, &g, &k).unwrap();
        assert!(d.order(0).exact_zero && d.order(1).exact_zero);
        assert!(d.within(3.0), "{:?}", d.order(2));
    }
}

#[test]
fn linear_pi_is_associative_to_second_order() {
    let pi = so3();
    let mut src = WeightSource::new(mc());
    let s = build_star(&pi, 2, &mut src).unwrap();
    let f = Poly::parse(3, "x1*x2").unwrap();
    let g = Poly::parse(3, "x2^2 + x3").unwrap();
    let k = Poly::parse(3, "x1*x3").unwrap();
    let d = assoc_defect(&s, &f, &g, &k).unwrap();
    assert!(d.order(1).exact_zero);
    assert!(!d.order(2).exact_zero);
    assert!(d.within(3.0), "{:?}", d.order(2));
}

#[test]
fn bimodule_compatibility_at_first_order() {
    let pi = so3();
    let mut src = WeightSource::new(mc());
    let s = build_star(&pi, 1, &mut src).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let module = random_flat_module(&mut rng, 3, 2, 1);
    for _ in 0..3 {
        let a = random_poly(&mut rng, 3, 2, 3);
        let b = random_poly(&mut rng, 3, 2, 3);
        let m = random_module_vec(&mut rng, &module, 2);
        let d = bimodule_defect(&s, &a, &b, &m).unwrap();
        assert!(d.within(3.0));
        assert!(d.left.order(1).exact_zero && d.middle.order(1).exact_zero && d.right.order(1).exact_zero);
    }
}

#[test]
fn twisted_morphism_is_a_chain_map_at_first_order() {
    let pi = so3();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let module = random_flat_module(&mut rng, 3, 2, 1);
    let mut y = formality_core::polyvector::PolyVectorM::zero(module.clone());
    y.add_term(vec![0, 1], random_module_vec(&mut rng, &module, 1));
    y.add_term(vec![1, 2], ModuleVec::basis(module.clone(), 0).mul_poly(&Poly::var(3, 0)));
    let mut src = WeightSource::new(mc());
    let r = twisted_residual_h1(&pi, &y, &mut src).unwrap();
    assert!(src.skipped().is_empty());
    assert!(!r.boundary.is_zero() && !r.action.is_zero());
    let e = r.residual.evaluate(src.table());
    assert!(e.vanishes_within(3.0), "{e:?}");
}

#[test]
fn weight_cache_feeds_star_products() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weights.jsonl");
    let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::var(2, 0))])).unwrap();
    let run = || {
        let cache = formality_core::weights::WeightCache::open(&path).unwrap();
        let mut src = WeightSource::with_cache(McConfig { samples: 20_000, seed: 2 }, cache);
        let s = build_star(&pi, 2, &mut src).unwrap();
        s.coeff(2).evaluate(s.table())
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let _ = (FlatModule::trivial(2, 1), MultiIndex::zeros(2));
}
