mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use condensate::metric::natural;
use condensate::poset::{enumerate_posets, nabla, nabla_closure, Poset};
use condensate::pscaled::{clop, quotient, ult, PScaledBA};
use condensate::structures::{con_lattice, kernel, res, FinStructure, Hom};

fn posets() -> &'static [Poset] {
    static ALL: OnceLock<Vec<Poset>> = OnceLock::new();
    ALL.get_or_init(|| (1..=5).flat_map(enumerate_posets).collect())
}

fn lattices() -> &'static [FinStructure] {
    static ALL: OnceLock<Vec<FinStructure>> = OnceLock::new();
    ALL.get_or_init(|| (1..=5).flat_map(enumerate_posets).filter(|p| p.is_lattice()).map(|p| FinStructure::lattice(&p).unwrap()).collect())
}

fn poset_and_subset() -> impl Strategy<Value = (Poset, Vec<usize>)> {
    (0..posets().len(), any::<u32>()).prop_map(|(i, mask)| {
        let p = posets()[i].clone();
        let x = (0..p.len()).filter(|&j| mask >> j & 1 == 1).collect();
        (p, x)
    })
}

fn scaled() -> impl Strategy<Value = PScaledBA> {
    (0..posets().len(), prop::collection::vec(any::<usize>(), 1..=4)).prop_map(|(i, raw)| {
        let p = &posets()[i];
        PScaledBA::numbered(p, raw.iter().map(|r| r % p.len()).collect()).unwrap()
    })
}

fn lattice_pair() -> impl Strategy<Value = (FinStructure, FinStructure, usize)> {
    (0..lattices().len(), 0..lattices().len(), any::<usize>())
        .prop_filter_map("no homomorphisms", |(i, j, k)| {
            let (a, b) = (lattices()[i].clone(), lattices()[j].clone());
            let hs = common::homs(&a, &b);
            (!hs.is_empty()).then(|| (a, b, k % hs.len()))
        })
}

proptest! {
    #[test]
    fn nabla_is_an_antichain_of_minimal_upper_bounds((p, x) in poset_and_subset()) {
        let nb = nabla(&p, &x);
        let ub = p.upper_bounds(&x);
        prop_assert!(nb.iter().all(|m| ub.contains(m)));
        prop_assert!(ub.iter().all(|&u| nb.iter().any(|&m| p.leq(m, u))));
        prop_assert!(nb.iter().all(|&a| nb.iter().all(|&b| a == b || !p.leq(a, b))));
    }

    #[test]
    fn closure_is_idempotent_and_extensive((p, x) in poset_and_subset()) {
        let c = nabla_closure(&p, &x);
        prop_assert!(x.iter().all(|a| c.contains(a)));
        prop_assert_eq!(nabla_closure(&p, &c), c.clone());
        for s in common::subsets(&c) {
            prop_assert!(nabla(&p, &s).iter().all(|m| c.contains(m)));
        }
    }

    #[test]
    fn duality_round_trip(a in scaled()) {
        let back = clop(&ult(&a)).unwrap();
        prop_assert!(common::scaled_isomorphic(&a, &back));
    }

    #[test]
    fn levels_shrink_as_the_scale_grows(a in scaled()) {
        let p = a.poset().clone();
        for x in 0..p.len() {
            for y in p.up(x) {
                prop_assert!(common::level(&a, y).is_subset(&common::level(&a, x)));
            }
        }
    }

    #[test]
    fn normal_maps_compose(a in scaled(), m1 in any::<u8>(), m2 in any::<u8>()) {
        let n = a.atom_count();
        let i1: Vec<usize> = (0..n).filter(|&u| m1 >> u & 1 == 1).collect();
        prop_assume!(i1.len() < n);
        let (q, f) = quotient(&a, &i1).unwrap();
        let i2: Vec<usize> = (0..q.atom_count()).filter(|&u| m2 >> u & 1 == 1).collect();
        prop_assume!(i2.len() < q.atom_count());
        let (_, g) = quotient(&q, &i2).unwrap();
        let gf = f.then(&g).unwrap();
        prop_assert!(gf.is_normal());
        prop_assert!(common::normal(&gf.src, &gf.dst, |x| gf.apply(x)));
    }

    #[test]
    fn natural_distance_is_an_ultrametric(i in 0..lattices().len()) {
        let a = &lattices()[i];
        let s = natural(a, 12).unwrap();
        let zero = s.values().zero();
        for x in 0..s.len() {
            prop_assert_eq!(s.dist(x, x), zero);
            for y in 0..s.len() {
                prop_assert_eq!(s.dist(x, y), s.dist(y, x));
                prop_assert_eq!(x == y, s.dist(x, y) == zero);
                for z in 0..s.len() {
                    prop_assert!(s.le(s.dist(x, z), s.join(s.dist(x, y), s.dist(y, z))));
                }
            }
        }
    }

    #[test]
    fn congruences_form_a_lattice(i in 0..lattices().len()) {
        let a = &lattices()[i];
        let con = con_lattice(a, 12).unwrap();
        for al in &con.members {
            for be in &con.members {
                let (j, m) = (a.join(al, be), a.meet(al, be));
                prop_assert!(con.members.contains(&j) && con.members.contains(&m));
                prop_assert!(al.leq(&j) && be.leq(&j) && m.leq(al) && m.leq(be));
                for g in &con.members {
                    if al.leq(g) && be.leq(g) {
                        prop_assert!(j.leq(g));
                    }
                    if g.leq(al) && g.leq(be) {
                        prop_assert!(g.leq(&m));
                    }
                }
            }
        }
    }

    #[test]
    fn restriction_is_monotone_and_contains_the_kernel((a, b, k) in lattice_pair()) {
        let f = Hom::new(&a, &b, common::homs(&a, &b)[k].clone()).unwrap();
        let con = con_lattice(&b, 12).unwrap();
        for al in &con.members {
            prop_assert!(kernel(&f).leq(&res(&f, al)));
            for be in &con.members {
                if al.leq(be) {
                    prop_assert!(res(&f, al).leq(&res(&f, be)));
                }
            }
        }
    }
}
