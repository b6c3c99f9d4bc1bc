mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use condensate::poset::{enumerate_posets, Poset};
use condensate::pscaled::*;

fn ab(p: &Poset, na: usize, nb: usize) -> PScaledBA {
    PScaledBA::new(p, vec!["a".into(), "b".into()], vec![na, nb]).unwrap()
}

#[test]
fn two_levels() {
    let p = Poset::chain(3);
    let t = two(&p, 1);
    assert_eq!(t.level(0).unwrap().len(), 2);
    assert_eq!(t.level(1).unwrap().len(), 2);
    assert_eq!(t.level(2).unwrap(), vec![Vec::<usize>::new()]);
    let x = ult(&t);
    assert_eq!(x.norm, vec![vec![0, 1]]);
}

#[test]
fn clop_of_singleton_is_two() {
    let p = Poset::square();
    let x = PNormedSpace::new(&p, vec!["*".into()], vec![p.down(2)]).unwrap();
    assert_eq!(clop(&x).unwrap(), two(&p, 2));
    assert!(PNormedSpace::new(&p, vec!["*".into()], vec![vec![]]).is_err());
    assert!(PNormedSpace::new(&p, vec!["*".into()], vec![vec![1, 2]]).is_err());
}

#[test]
fn eps_and_normality() {
    let p = Poset::chain(2);
    assert_eq!(eps(&p, 0, 0).unwrap(), ScaledMorphism::identity(&two(&p, 0)));
    let e = eps(&p, 0, 1).unwrap();
    assert!(!e.is_normal() && e.preserves_levels());
    assert!(!common::normal(&e.src, &e.dst, |x| e.apply(x)));
    assert!(eps(&p, 1, 0).unwrap_err().is_input());
}

#[test]
fn normal_agrees_with_the_definition() {
    // Every morphism between small algebras: the dual criterion against
    // surjectivity plus f``(A^(p)) = B^(p).
    for p in [Poset::chain(2), Poset::square(), Poset::numbered(3, &[(0, 1), (0, 2)]).unwrap()] {
        let n = p.len();
        for na in 1..=3usize {
            for nb in 1..=2usize {
                for ca in 0..n.pow(na as u32) {
                    let a = PScaledBA::numbered(&p, common::tuple(ca, na, n)).unwrap();
                    for cb in 0..n.pow(nb as u32) {
                        let b = PScaledBA::numbered(&p, common::tuple(cb, nb, n)).unwrap();
                        for cd in 0..na.pow(nb as u32) {
                            let Ok(f) = ScaledMorphism::new(&a, &b, common::tuple(cd, nb, na)) else { continue };
                            assert!(f.preserves_levels());
                            assert_eq!(f.is_normal(), common::normal(&a, &b, |x| f.apply(x)));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn morphisms_must_shrink_norms() {
    let p = Poset::chain(2);
    let a = two(&p, 1);
    let b = two(&p, 0);
    assert!(ScaledMorphism::new(&a, &b, vec![0]).unwrap_err().to_string().contains("norm"));
}

#[test]
fn quotients() {
    let p = Poset::chain(2);
    let a = ab(&p, 0, 1);
    let (q, pi) = quotient(&a, &[]).unwrap();
    assert_eq!(q, a);
    assert!(pi.is_isomorphism());
    let (q, pi) = quotient(&a, &[1]).unwrap();
    assert_eq!(q.labels(), &["a".to_string()]);
    assert_eq!(pi.dual, vec![0]);
    assert!(pi.is_normal());
    assert!(quotient(&a, &[0, 1]).unwrap_err().to_string().contains("improper"));
}

#[test]
fn random_quotients_are_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let p = common::random_poset(&mut rng, 4);
        let a = common::random_scaled(&mut rng, &p, 4);
        let ideal: Vec<usize> = (0..a.atom_count()).filter(|_| rng.gen_bool(0.3)).collect();
        if ideal.len() == a.atom_count() {
            continue;
        }
        let (_, pi) = quotient(&a, &ideal).unwrap();
        assert!(pi.is_normal());
        assert!(common::normal(&pi.src, &pi.dst, |x| pi.apply(x)));
    }
}

#[test]
fn products() {
    let p = Poset::chain(3);
    let (prod, proj) = product(&[two(&p, 0), two(&p, 2)]).unwrap();
    assert_eq!(prod.atom_count(), 2);
    assert_eq!((prod.top_norm(0), prod.top_norm(1)), (0, 2));
    assert!(proj.iter().all(|f| f.is_normal()));
    let a = ab(&p, 1, 2);
    let (single, _) = product(std::slice::from_ref(&a)).unwrap();
    assert!(single.isomorphism(&a).is_some());
    assert!(product(&[]).is_err());

    // Universal property: a cone into the factors pairs into a unique morphism.
    let c = ab(&p, 0, 1);
    let cone = [ScaledMorphism::new(&c, &two(&p, 0), vec![0]).unwrap(), ScaledMorphism::new(&c, &two(&p, 2), vec![1]).unwrap()];
    let h = product_pairing(&prod, &cone).unwrap();
    for (f, pr) in cone.iter().zip(&proj) {
        assert_eq!(&h.then(pr).unwrap(), f);
    }
}

#[test]
fn composition_is_contravariant_on_duals() {
    let p = Poset::chain(3);
    let a = PScaledBA::numbered(&p, vec![0, 1, 0]).unwrap();
    let b = PScaledBA::numbered(&p, vec![1, 2]).unwrap();
    let c = PScaledBA::numbered(&p, vec![2, 2, 1]).unwrap();
    let f = ScaledMorphism::new(&a, &b, vec![1, 0]).unwrap();
    let g = ScaledMorphism::new(&b, &c, vec![1, 1, 0]).unwrap();
    let gf = f.then(&g).unwrap();
    assert_eq!(gf.dual, g.dual.iter().map(|&x| f.dual[x]).collect::<Vec<_>>());
    for x in common::elements(&a) {
        assert_eq!(gf.apply(&x), g.apply(&f.apply(&x)));
    }
    assert!(g.then(&f).is_err());
}

#[test]
fn scaling_axioms_hold_for_every_small_algebra() {
    for n in 1..=4 {
        for p in enumerate_posets(n) {
            for code in 0..n.pow(2) {
                let a = PScaledBA::numbered(&p, common::tuple(code, 2, n)).unwrap();
                a.check_axioms().unwrap();
                for x in 0..n {
                    for y in 0..n {
                        if p.leq(x, y) {
                            assert!(common::level(&a, y).is_subset(&common::level(&a, x)));
                        }
                    }
                    let ours: std::collections::BTreeSet<Vec<usize>> = a.level(x).unwrap().into_iter().collect();
                    assert_eq!(ours, common::level(&a, x));
                }
            }
        }
    }
}

#[test]
fn sigma_of_small_algebras() {
    let p = Poset::chain(2);
    let a = ab(&p, 0, 1);
    let s = sigma_enumerate(&a).unwrap();
    assert!(s.directed && s.union_ok);
    let top = &s.members[s.top];
    assert_eq!(top.blocks.len(), 2);
    assert!(s.members.iter().all(|m| m.below(top, &p)));
    // Partitions {a}{b} with labels ≤ |u|, plus {ab} labelled 0.
    assert_eq!(s.members.len(), 2 + 1);
    let big = PScaledBA::numbered(&p, vec![0; 7]).unwrap();
    assert!(sigma_enumerate(&big).is_err());
}

#[test]
fn text_round_trip() {
    let p = Poset::square();
    let a = ab(&p, 1, 3);
    let b = PScaledBA::parse(&a.to_text("sq.poset"), &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(PScaledBA::header_path(&a.to_text("sq.poset")).unwrap(), "sq.poset");
}
