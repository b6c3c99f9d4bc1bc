mod common;

use condensate::freecover::*;
use condensate::poset::{nabla, NormCovering, Poset};
use condensate::pscaled::{eps, ScaledMorphism};

fn cover(x: Poset, p: &Poset, bd: Vec<usize>) -> NormCovering {
    NormCovering::new(x, p.clone(), bd).unwrap()
}

fn named(labels: &[&str], pairs: &[(usize, usize)]) -> Poset {
    Poset::new(labels.iter().map(|s| s.to_string()).collect(), pairs).unwrap()
}

#[test]
fn antichain_gives_complementary_atoms() {
    let p = Poset::chain(2);
    let fx = build_fx(&cover(Poset::antichain(2), &p, vec![0, 1]));
    assert_eq!(fx.algebra.atom_count(), 2);
    assert_eq!(fx.gen, vec![vec![0], vec![1]]);
    assert!(nabla(&fx.cover.x, &[0, 1]).is_empty());
}

#[test]
fn chain_gives_top_and_atom() {
    let p = Poset::chain(2);
    let fx = build_fx(&cover(Poset::chain(2), &p, vec![0, 1]));
    assert_eq!(fx.gen[0], vec![0, 1]);
    assert_eq!(fx.gen[1], vec![1]);
    let single = build_fx(&cover(Poset::chain(1), &p, vec![1]));
    assert_eq!(single.gen, vec![vec![0]]);
}

#[test]
fn identity_assignment_extends_to_identity() {
    let p = Poset::square();
    let fx = build_fx(&NormCovering::identity(&p));
    let h = fx.universal_extend(p.len(), &fx.gen).unwrap().unwrap();
    assert_eq!(h.dual, (0..p.len()).collect::<Vec<_>>());
}

#[test]
fn indicator_of_an_ideal_is_pi() {
    let p = Poset::chain(2);
    let fx = build_fx(&cover(Poset::chain(2), &p, vec![0, 1]));
    let h = fx.universal_extend(1, &[vec![0], vec![]]).unwrap().unwrap();
    let pi = fx.pi_u(&[0]).unwrap();
    assert_eq!(h.dual, pi.dual);
    assert_eq!(pi.apply(&fx.gen[0]), vec![0]);
    assert_eq!(pi.apply(&fx.gen[1]), Vec::<usize>::new());
    assert!(pi.is_normal());
}

#[test]
fn non_directed_lower_set_fails_the_meet_relation() {
    // o < a, o < b: {o, a, b} is lower but a, b have no upper bound inside.
    let x = named(&["o", "a", "b"], &[(0, 1), (0, 2)]);
    let fx = build_fx(&cover(x, &Poset::chain(1), vec![0, 0, 0]));
    let r = fx.universal_extend(1, &[vec![0], vec![0], vec![0]]).unwrap();
    assert_eq!(r, Err(RelationFailure::Meet { u: 1, v: 2 }));
    let r = fx.universal_extend(1, &[vec![], vec![0], vec![]]).unwrap();
    assert_eq!(r, Err(RelationFailure::Antitone { u: 0, v: 1 }));
    let r = fx.universal_extend(1, &[vec![], vec![], vec![]]).unwrap();
    assert_eq!(r, Err(RelationFailure::Top));
}

#[test]
fn pi_requires_an_ideal() {
    let x = named(&["o", "a", "b"], &[(0, 1), (0, 2)]);
    let fx = build_fx(&cover(x, &Poset::chain(1), vec![0, 0, 0]));
    assert!(fx.pi_u(&[0, 1, 2]).unwrap_err().is_input());
}

#[test]
fn f_xy_examples() {
    let p = Poset::chain(2);
    let y = cover(named(&["u", "v"], &[(0, 1)]), &p, vec![0, 1]);
    let x = cover(named(&["u"], &[]), &p, vec![0]);
    let f = f_xy(&x, &y).unwrap();
    assert_eq!(f.dual, vec![0, 0]);
    assert!(f.preserves_levels());
    let id = f_xy(&y, &y).unwrap();
    assert_eq!(id, ScaledMorphism::identity(&build_fx(&y).algebra));
    // {v} misses Min Y.
    let top = cover(named(&["v"], &[]), &p, vec![1]);
    assert!(f_xy(&top, &y).unwrap_err().is_input());
}

#[test]
fn f_xy_sends_generators_to_generators() {
    let p = Poset::chain(3);
    let y = cover(named(&["o", "a", "b", "t"], &[(0, 1), (0, 2), (1, 3), (2, 3)]), &p, vec![0, 1, 1, 2]);
    let x = cover(named(&["o", "a"], &[(0, 1)]), &p, vec![0, 1]);
    let f = f_xy(&x, &y).unwrap();
    let (fx, fy) = (build_fx(&x), build_fx(&y));
    for u in 0..2 {
        assert_eq!(f.apply(&fx.gen[u]), fy.gen[u]);
    }
    assert!(f.preserves_levels());
}

#[test]
fn f_xy_is_functorial_and_coherent_with_pi() {
    let p = Poset::chain(3);
    let z = cover(named(&["o", "a", "b", "t"], &[(0, 1), (0, 2), (1, 3), (2, 3)]), &p, vec![0, 1, 1, 2]);
    let y = cover(named(&["o", "a", "b", "t"], &[(0, 1), (0, 2), (1, 3), (2, 3)]).sub(&[0, 1]), &p, vec![0, 1]);
    let x = cover(named(&["o"], &[]), &p, vec![0]);
    let (fxy, fyz, fxz) = (f_xy(&x, &y).unwrap(), f_xy(&y, &z).unwrap(), f_xy(&x, &z).unwrap());
    assert_eq!(fxy.then(&fyz).unwrap(), fxz);

    // π^Z_𝐯 ∘ f_Y^Z = ε ∘ π^Y_{𝐯∩Y} for every ideal 𝐯 of Z.
    let (fy, fz) = (build_fx(&y), build_fx(&z));
    for v in common::ideals(&z.x) {
        let meet: Vec<usize> = v.iter().copied().filter(|&i| i < 2).collect();
        let lhs = fyz.then(&fz.pi_u(&v).unwrap()).unwrap();
        let piy = fy.pi_u(&meet).unwrap();
        let e = eps(&p, piy.dst.top_norm(0), lhs.dst.top_norm(0)).unwrap();
        assert_eq!(piy.then(&e).unwrap(), lhs);
    }
}

#[test]
fn generators_separate_atoms() {
    let x = named(&["o", "a", "b", "t"], &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    let fx = build_fx(&cover(x, &Poset::chain(1), vec![0; 4]));
    for s in 0..4 {
        for t in s + 1..4 {
            assert!(fx.gen.iter().any(|g| g.contains(&s) != g.contains(&t)));
        }
    }
}
