mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use condensate::poset::Poset;
use condensate::structures::*;

fn lat(p: &Poset) -> FinStructure {
    FinStructure::lattice(p).unwrap()
}

fn m3() -> FinStructure {
    lat(&Poset::numbered(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).unwrap())
}

fn n5() -> FinStructure {
    lat(&Poset::numbered(5, &[(0, 1), (1, 2), (0, 3), (2, 4), (3, 4)]).unwrap())
}

fn chain(n: usize) -> FinStructure {
    lat(&Poset::chain(n))
}

fn digraph(n: usize, edges: &[(usize, usize)]) -> FinStructure {
    let lang = Language::new(vec![], vec![], vec![("e".into(), 2)]).unwrap();
    let mut r = vec![false; n * n];
    for &(a, b) in edges {
        r[a * n + b] = true;
    }
    FinStructure::new(lang, (0..n).map(|i| i.to_string()).collect(), vec![], vec![], vec![r]).unwrap()
}

#[test]
fn congruence_lattice_sizes() {
    assert_eq!(con_lattice(&chain(2), DEFAULT_CON_BOUND).unwrap().len(), 2);
    assert_eq!(con_lattice(&m3(), DEFAULT_CON_BOUND).unwrap().len(), 2);
    let c3 = con_lattice(&chain(3), DEFAULT_CON_BOUND).unwrap();
    assert!(c3.poset().is_isomorphic(&Poset::square()));
    assert!(con_lattice(&chain(13), DEFAULT_CON_BOUND).is_err());
}

#[test]
fn relational_congruences_match_oracle() {
    let d = digraph(3, &[(0, 1), (1, 2)]);
    let ours = con_lattice(&d, DEFAULT_CON_BOUND).unwrap().members;
    assert_eq!(ours, common::congruences(&d));
    for c in &ours {
        d.check_congruence(c).unwrap();
    }
}

#[test]
fn extreme_quotients() {
    let a = n5();
    let (q, pi) = quotient(&a, &a.zero_cong()).unwrap();
    assert_eq!(q.size(), 5);
    assert!(pi.is_isomorphism());
    let d = digraph(3, &[(0, 1)]);
    let (q, _) = quotient(&d, &d.full_cong()).unwrap();
    assert_eq!(q.size(), 1);
    assert_eq!(q.rel_table(0), &[true]);
}

#[test]
fn non_congruences_are_rejected() {
    let a = chain(3);
    let bad = Congruence { part: vec![0, 1, 0], rels: vec![] };
    assert!(quotient(&a, &bad).is_err());
}

#[test]
fn kernels() {
    let a = chain(2);
    let b = chain(3);
    let emb = Hom::new(&a, &b, vec![0, 2]).unwrap();
    assert_eq!(kernel(&emb), a.zero_cong());
    let one = chain(1);
    let c = Hom::new(&b, &one, vec![0, 0, 0]).unwrap();
    assert_eq!(kernel(&c), b.full_cong());
    assert!(Hom::new(&a, &b, vec![2, 0]).is_err());
}

#[test]
fn kernel_of_composite_is_restricted_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let objs = [chain(2), chain(3), lat(&Poset::square()), m3(), n5()];
    let mut checked = 0;
    while checked < 40 {
        let (a, b, c) = (&objs[rng.gen_range(0..5)], &objs[rng.gen_range(0..5)], &objs[rng.gen_range(0..5)]);
        let (fs, gs) = (common::homs(a, b), common::homs(b, c));
        if fs.is_empty() || gs.is_empty() {
            continue;
        }
        let f = Hom::new(a, b, fs[rng.gen_range(0..fs.len())].clone()).unwrap();
        let g = Hom::new(b, c, gs[rng.gen_range(0..gs.len())].clone()).unwrap();
        assert_eq!(kernel(&f.then(&g).unwrap()), res(&f, &kernel(&g)));
        checked += 1;
    }
}

#[test]
fn relative_congruences() {
    let all = VarietyOracle::All;
    assert_eq!(con_v(&n5(), &all, 12).unwrap().members, con_lattice(&n5(), 12).unwrap().members);
    let l = con_v(&n5(), &VarietyOracle::lattices(), 12).unwrap();
    assert_eq!(l.members, common::congruences(&n5()));
    let e = con_v(&m3(), &VarietyOracle::distributive_lattices(), 12).unwrap_err();
    assert!(e.to_string().contains("not in V"));
    let d = con_v(&n5(), &VarietyOracle::distributive_lattices(), 12);
    assert!(d.is_err());
}

#[test]
fn principal_congruences() {
    let c = chain(3);
    let v = VarietyOracle::lattices();
    let z = principal_vcong(&c, &v, &Seed::Pair(1, 1), 12).unwrap();
    assert_eq!(z, c.zero_cong());
    let t = principal_vcong(&c, &v, &Seed::Pair(0, 1), 12).unwrap();
    assert_eq!(t.classes(), vec![vec![0, 1], vec![2]]);
    assert_eq!(t, c.principal(0, 1));
    assert!(principal_vcong(&c, &v, &Seed::Pair(0, 7), 12).unwrap_err().is_input());
}

#[test]
fn every_congruence_is_a_join_of_principals() {
    for a in [chain(3), lat(&Poset::square()), m3(), n5(), digraph(3, &[(0, 1), (2, 2)])] {
        for c in common::congruences(&a) {
            let n = a.size();
            let mut acc = a.zero_cong();
            for x in 0..n {
                for y in 0..n {
                    if c.related(x, y) {
                        acc = a.join(&acc, &a.principal(x, y));
                    }
                }
            }
            for (r, &(_, k)) in a.lang().rels.iter().enumerate() {
                for idx in 0..n.pow(k as u32) {
                    let t = common::tuple(idx, k, n);
                    if c.contains_tuple(r, &t) {
                        acc = a.join(&acc, &a.generate(&[], &[(r, t)]));
                    }
                }
            }
            assert_eq!(acc, c);
        }
    }
}

#[test]
fn con_maps_send_principals_to_principals() {
    let v = VarietyOracle::lattices();
    let (a, b) = (chain(3), lat(&Poset::square()));
    for f in common::homs(&a, &b) {
        let h = Hom::new(&a, &b, f.clone()).unwrap();
        let cm = concv_map(&h, &v, 12).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let src = cm.src.principal(&Seed::Pair(x, y)).unwrap();
                let dst = cm.dst.principal(&Seed::Pair(f[x], f[y])).unwrap();
                assert_eq!(cm.map[src], dst);
            }
        }
        // Adjunction: Con f(α) ≤ β iff α ≤ Res f(β).
        for (i, al) in cm.src.members.iter().enumerate() {
            for (j, be) in cm.dst.members.iter().enumerate() {
                assert_eq!(cm.dst.leq(cm.map[i], j), al.leq(&res(&h, be)));
            }
        }
    }
}

#[test]
fn con_of_identity_and_projections() {
    let v = VarietyOracle::lattices();
    let a = n5();
    let id = concv_map(&Hom::identity(&a), &v, 12).unwrap();
    assert_eq!(id.map, (0..id.src.len()).collect::<Vec<_>>());
    for theta in common::congruences(&a) {
        let (_, pi) = quotient(&a, &theta).unwrap();
        let cm = concv_map(&pi, &v, 12).unwrap();
        for (i, al) in cm.src.members.iter().enumerate() {
            let want = push_forward(&pi, &a.join(al, &theta));
            assert_eq!(cm.dst.members[cm.map[i]], want);
        }
    }
}

#[test]
fn con_functor_composes() {
    let v = VarietyOracle::lattices();
    let (a, b, c) = (chain(2), chain(3), lat(&Poset::square()));
    for f in common::homs(&a, &b) {
        for g in common::homs(&b, &c) {
            let (f, g) = (Hom::new(&a, &b, f.clone()).unwrap(), Hom::new(&b, &c, g).unwrap());
            let (cf, cg) = (concv_map(&f, &v, 12).unwrap(), concv_map(&g, &v, 12).unwrap());
            let cgf = concv_map(&f.then(&g).unwrap(), &v, 12).unwrap();
            assert_eq!(cgf.map, cf.map.iter().map(|&x| cg.map[x]).collect::<Vec<_>>());
        }
    }
}

fn three_chain_semilattice() -> FinCommMonoid {
    FinCommMonoid::join_semilattice(&Poset::chain(3)).unwrap()
}

#[test]
fn o_ideal_quotients() {
    let m = three_chain_semilattice();
    let (q, pi) = o_ideal_quotient(&m, &[0]).unwrap();
    assert_eq!(q.len(), 3);
    assert!(pi.is_bijective());
    let (q, pi) = o_ideal_quotient(&m, &[0, 1, 2]).unwrap();
    assert_eq!(q.len(), 1);
    assert!(is_ideal_induced(&pi) && q.is_conical());
    let (_, pi) = o_ideal_quotient(&m, &[0, 1]).unwrap();
    assert!(is_ideal_induced(&pi) && is_weakly_distributive(&pi));
    assert!(o_ideal_quotient(&m, &[1]).unwrap_err().is_input());
}

#[test]
fn embeddings_are_not_ideal_induced() {
    let two = FinCommMonoid::join_semilattice(&Poset::chain(2)).unwrap();
    let m = three_chain_semilattice();
    let e = MonoidHom::new(&two, &m, vec![0, 2]).unwrap();
    assert!(!is_ideal_induced(&e));
    let id = MonoidHom::new(&m, &m, vec![0, 1, 2]).unwrap();
    assert!(is_ideal_induced(&id) && is_weakly_distributive(&id));
}

#[test]
fn con_of_surjections_is_ideal_induced() {
    let v = VarietyOracle::lattices();
    for a in [chain(3), lat(&Poset::square()), n5()] {
        for theta in common::congruences(&a) {
            let (_, pi) = quotient(&a, &theta).unwrap();
            assert!(is_ideal_induced(&concv_map(&pi, &v, 12).unwrap().hom().unwrap()));
        }
    }
}

#[test]
fn witness_for_isomorphisms_and_chains() {
    let v = VarietyOracle::lattices();
    let c = chain(3);
    let cv = con_v(&c, &v, 12).unwrap();
    let m = cv.monoid().unwrap();
    let (_, id) = o_ideal_quotient(&m, &[m.zero()]).unwrap();
    let w = projectability_witness(&cv, &v, &id, 12).unwrap();
    assert_eq!(w.theta, c.zero_cong());
    assert!(w.proj.is_isomorphism());

    // Collapse one atom of Con_c of the 3-chain.
    let atom = cv.index_of(&c.principal(0, 1)).unwrap();
    let (_, phi) = o_ideal_quotient(&m, &[m.zero(), atom]).unwrap();
    let w = projectability_witness(&cv, &v, &phi, 12).unwrap();
    assert_eq!(w.theta, c.principal(0, 1));
    assert_eq!(w.proj.dst.size(), 2);
    assert!(w.eps.is_bijective());
}

#[test]
fn witness_recovers_the_kernel_of_a_projection() {
    let v = VarietyOracle::lattices();
    let a = n5();
    let cv = con_v(&a, &v, 12).unwrap();
    for theta in common::congruences(&a) {
        let (_, pi) = quotient(&a, &theta).unwrap();
        let phi = concv_map(&pi, &v, 12).unwrap().hom().unwrap();
        let w = projectability_witness(&cv, &v, &phi, 12).unwrap();
        assert_eq!(w.theta, theta);
    }
}

#[test]
fn witness_needs_ideal_induced() {
    let v = VarietyOracle::lattices();
    let c = chain(2);
    let cv = con_v(&c, &v, 12).unwrap();
    let m = cv.monoid().unwrap();
    let big = three_chain_semilattice();
    let z = m.zero();
    let e = MonoidHom::new(&m, &big, (0..m.len()).map(|x| if x == z { 0 } else { 2 }).collect()).unwrap();
    assert!(projectability_witness(&cv, &v, &e, 12).is_err());
}

#[test]
fn structure_text_round_trip() {
    for a in [m3(), digraph(3, &[(0, 1), (1, 2)])] {
        let b = FinStructure::parse(&a.to_text()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn quasi_identity_oracle_from_text() {
    let src = "# semilattice laws for join only\njoin x x = x\n";
    let v = VarietyOracle::parse(src, &Language::lattice()).unwrap();
    assert!(v.accepts(&m3()));
    assert!(VarietyOracle::parse("join x = x\n", &Language::lattice()).is_err());
}
