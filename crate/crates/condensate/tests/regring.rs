use std::collections::BTreeSet;

use condensate::poset::Poset;
use condensate::regring::*;

fn m2() -> FinRing {
    FinRing::matrix(2, 2).unwrap()
}

fn m3() -> Poset {
    Poset::numbered(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).unwrap()
}

fn el(r: &FinRing, s: &str) -> usize {
    r.element(s).unwrap()
}

// Every xR computed straight from the multiplication table, ordered by inclusion.
fn principal_oracle(r: &FinRing) -> Poset {
    let sets: BTreeSet<Vec<usize>> = (0..r.len())
        .map(|x| {
            let s: BTreeSet<usize> = (0..r.len()).map(|y| r.mul(x, y)).collect();
            s.into_iter().collect()
        })
        .collect();
    let sets: Vec<Vec<usize>> = sets.into_iter().collect();
    let leq = sets.iter().map(|a| sets.iter().map(|b| a.iter().all(|x| b.contains(x))).collect()).collect();
    Poset::from_matrix((0..sets.len()).map(|i| i.to_string()).collect(), leq).unwrap()
}

#[test]
fn quasi_inverses() {
    let g3 = FinRing::gf(3).unwrap();
    assert_eq!(g3.quasi_inverse(0), Some(0));
    assert_eq!(g3.quasi_inverse(2), Some(2));
    let z4 = FinRing::new(
        (0..4).map(|i| i.to_string()).collect(),
        (0..16).map(|i| (i / 4 + i % 4) % 4).collect(),
        (0..16).map(|i| (i / 4) * (i % 4) % 4).collect(),
    )
    .unwrap();
    assert_eq!(z4.quasi_inverse(2), None);
    assert!(lattice_l(&z4).is_err());
}

#[test]
fn lattices_of_small_rings() {
    let g2 = FinRing::gf(2).unwrap();
    assert!(lattice_l(&g2).unwrap().poset().is_isomorphic(&Poset::chain(2)));
    let l = lattice_l(&m2()).unwrap();
    assert!(l.poset().is_isomorphic(&m3()));
    assert!(l.poset().is_isomorphic(&principal_oracle(&m2())));
    let p = FinRing::product(&g2, &g2).unwrap();
    assert!(lattice_l(&p).unwrap().poset().is_isomorphic(&Poset::square()));
}

#[test]
fn formulas_match_set_level_on_all_idempotent_pairs() {
    let r = m2();
    let l = lattice_l(&r).unwrap();
    for a in r.idempotents() {
        for b in r.idempotents() {
            let f = join_meet_via_formulas(&l, a, b).unwrap();
            assert!(f.join_matches && f.meet_matches);
        }
    }
}

#[test]
fn section_complements_in_m2() {
    let r = m2();
    let l = lattice_l(&r).unwrap();
    for a in r.idempotents() {
        for b in r.idempotents() {
            let res = section_complement(&l, a, b);
            if l.leq(l.of(a), l.of(b)) {
                let c = res.unwrap();
                assert_eq!(l.join(l.of(a), c), l.of(b));
                assert_eq!(l.meet(l.of(a), c), 0);
            } else {
                assert!(res.unwrap_err().is_input());
            }
        }
    }
}

#[test]
fn module_isomorphism_of_idempotents() {
    let r = m2();
    let (e11, e22, one) = (el(&r, "[10;00]"), el(&r, "[00;01]"), el(&r, "[10;01]"));
    assert!(idempotents_module_iso(&r, e11, e11).unwrap());
    assert!(idempotents_module_iso(&r, e11, e22).unwrap());
    assert!(!idempotents_module_iso(&r, e11, one).unwrap());
    assert!(idempotents_module_iso(&r, el(&r, "[11;00]"), e11).unwrap());
    for a in r.idempotents() {
        for b in r.idempotents() {
            let iii = module_iso_witness(&r, a, b).unwrap().is_some();
            let ii = module_iso_quasi_inverse_witness(&r, a, b).unwrap().is_some();
            assert_eq!(ii, iii);
        }
    }
}

#[test]
fn ideal_correspondence() {
    let g2 = FinRing::gf(2).unwrap();
    let g3 = FinRing::gf(3).unwrap();
    let c = neutral_ideal_correspondence(&m2()).unwrap();
    assert_eq!(c.ideals.len(), 2);
    let c = neutral_ideal_correspondence(&FinRing::product(&g2, &g2).unwrap()).unwrap();
    assert_eq!(c.ideals.len(), 4);
    let c = neutral_ideal_correspondence(&FinRing::product(&m2(), &g3).unwrap()).unwrap();
    assert_eq!(c.ideals.len(), 4);
}

#[test]
fn corners() {
    let r = m2();
    let all: Vec<usize> = (0..r.len()).collect();
    let e = faith_utumi_corner(&r, &all).unwrap();
    assert_eq!(Some(e), r.unit());
    let e11 = el(&r, "[10;00]");
    let e = faith_utumi_corner(&r, &[e11]).unwrap();
    assert!(r.is_idempotent(e));
    assert_eq!(faith_utumi_corner(&r, &[]).unwrap(), r.zero());
}

#[test]
fn quotient_of_product() {
    let g2 = FinRing::gf(2).unwrap();
    let p = FinRing::product(&g2, &g2).unwrap();
    let first: Vec<usize> = ["(0,0)", "(1,0)"].iter().map(|s| el(&p, s)).collect();
    let q = quotient_l_iso(&p, &first).unwrap();
    assert!(q.quotient.poset().is_isomorphic(&Poset::chain(2)));
    assert!(quotient_l_iso(&m2(), &[el(&m2(), "[10;00]"), 0]).is_err());
}
