mod common;

use std::collections::{BTreeSet, HashMap};

use condensate::poset::*;

fn vee_up() -> Poset {
    // m0, m1 < t
    Poset::numbered(3, &[(0, 2), (1, 2)]).unwrap()
}

#[test]
fn loader_closes_the_order_and_rejects_cycles() {
    let p = Poset::parse("elem a\nelem b\nelem c\nle a b\nle b c\n").unwrap();
    assert!(p.leq(0, 2));
    let e = Poset::parse("elem a\nelem b\nle a b\nle b a\n").unwrap_err();
    assert!(e.is_input());
    assert!(Poset::parse("# nothing\n").is_err());
}

#[test]
fn text_round_trip() {
    for p in enumerate_posets(4) {
        let q = Poset::parse(&p.to_text()).unwrap();
        assert_eq!(p, q);
    }
}

#[test]
fn nabla_examples() {
    let v = vee_up();
    assert_eq!(nabla(&v, &[]), vec![0, 1]);
    assert_eq!(nabla(&v, &[0, 1]), vec![2]);
    let vee = Poset::numbered(3, &[(0, 1), (0, 2)]).unwrap();
    assert_eq!(nabla(&vee, &[1, 2]), Vec::<usize>::new());
    assert_eq!(nabla_closure(&vee, &[1, 2]), vec![0, 1, 2]);
}

#[test]
fn nabla_matches_oracle_everywhere() {
    for n in 1..=5 {
        for p in enumerate_posets(n) {
            for x in common::subsets(&common::all(n)) {
                assert_eq!(nabla(&p, &x), common::nabla(&p, &x));
                assert_eq!(nabla_closure(&p, &x), common::closure(&p, &x));
                let ub = p.upper_bounds(&x);
                let nb = nabla(&p, &x);
                assert!(ub.iter().all(|&u| nb.iter().any(|&m| p.leq(m, u))));
                assert!(nb.iter().all(|&a| nb.iter().all(|&b| a == b || !p.leq(a, b))));
            }
        }
    }
}

#[test]
fn empty_part_breaks_associativity_equality() {
    // ▽∅ = {m0, m1} and ▽{m0} = {m0}, but (▽∅)▽(▽{m0}) also picks up t.
    let p = vee_up();
    assert!(classify(&p).almost);
    let rhs = nabla_of_sets(&p, &[nabla(&p, &[]), nabla(&p, &[0])]);
    assert_eq!(nabla(&p, &[0]), vec![0]);
    assert_eq!(rhs, vec![0, 2]);
}

#[test]
fn classification_chain_of_implications() {
    let mut seen_non_almost = false;
    for n in 1..=6 {
        for p in enumerate_posets(n) {
            let c = classify(&p);
            assert!(!c.almost || c.supported);
            assert!(!c.supported || c.pseudo);
            assert!(c.supported);
            seen_non_almost |= !c.almost;
        }
    }
    assert!(seen_non_almost);
}

#[test]
fn two_minimal_below_two_maximal_is_not_almost() {
    // a, b < c, d < t: ↓t has no join of a and b.
    let p = Poset::numbered(5, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
    let c = classify(&p);
    assert!(c.pseudo && c.supported && !c.almost);
}

#[test]
fn enumeration_counts() {
    let counts: Vec<usize> = (1..=6).map(|n| enumerate_posets(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 5, 16, 63, 318]);
}

#[test]
fn ideals_match_oracle_and_rebuild_the_poset() {
    for n in 1..=5 {
        for p in enumerate_posets(n) {
            let ours: BTreeSet<Vec<usize>> = ideals(&p).into_iter().collect();
            let oracle: BTreeSet<Vec<usize>> = common::ideals(&p).into_iter().collect();
            assert_eq!(ours, oracle);
            if classify(&p).almost && p.least().is_some() {
                let ids: Vec<Vec<usize>> = ours.into_iter().collect();
                let leq = ids.iter().map(|a| ids.iter().map(|b| a.iter().all(|x| b.contains(x))).collect()).collect();
                let q = Poset::from_matrix((0..ids.len()).map(|i| i.to_string()).collect(), leq).unwrap();
                assert!(q.is_isomorphic(&p));
            }
        }
    }
}

#[test]
fn pk_of_two_chain_with_one_letter() {
    let pk = construct_pk(&Poset::chain(2), 1).unwrap();
    let got: BTreeSet<(usize, Vec<(usize, usize)>)> = pk.elements.iter().map(|e| (e.a, e.map.clone())).collect();
    let want: BTreeSet<(usize, Vec<(usize, usize)>)> =
        [(0, vec![]), (0, vec![(0, 0)]), (1, vec![(1, 0)]), (1, vec![(0, 0), (1, 0)])].into_iter().collect();
    assert_eq!(got, want);
}

#[test]
fn pk_elements_are_exactly_the_defining_pairs() {
    for (p, k) in [(Poset::square(), 1), (Poset::chain(3), 2), (Poset::square(), 2)] {
        let pk = construct_pk(&p, k).unwrap();
        let mut oracle = BTreeSet::new();
        for a in 0..p.len() {
            let below: Vec<usize> = (0..p.len()).filter(|&x| p.leq(x, a)).collect();
            for dom in common::subsets(&below) {
                if common::nabla(&p, &dom).contains(&a) {
                    for code in 0..k.pow(dom.len() as u32) {
                        let vals = common::tuple(code, dom.len(), k);
                        oracle.insert((a, dom.iter().copied().zip(vals).collect::<Vec<_>>()));
                    }
                }
            }
        }
        let got: BTreeSet<(usize, Vec<(usize, usize)>)> = pk.elements.iter().map(|e| (e.a, e.map.clone())).collect();
        assert_eq!(got, oracle);
        let x = &pk.cover.x;
        assert!(classify(x).almost);
        assert!((0..x.len()).all(|i| pk.cover.bd[i] == pk.elements[i].a));
    }
}

#[test]
fn pk_nabla_of_pairs() {
    // (a₀,x₀)▽(a₁,x₁) = (a₀▽a₁) × {x₀ ∪ x₁} whenever the pair is bounded.
    let p = Poset::square();
    let pk = construct_pk(&p, 2).unwrap();
    let x = &pk.cover.x;
    let els = &pk.elements;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let got: BTreeSet<usize> = nabla(x, &[i, j]).into_iter().collect();
            if got.is_empty() {
                continue;
            }
            let mut union: Vec<(usize, usize)> = els[i].map.iter().chain(&els[j].map).copied().collect();
            union.sort_unstable();
            union.dedup();
            let want: BTreeSet<usize> = nabla(&p, &[els[i].a, els[j].a])
                .into_iter()
                .filter_map(|a| els.iter().position(|e| e.a == a && e.map == union))
                .collect();
            assert_eq!(got, want, "pair {i}, {j}");
        }
    }
}

#[test]
fn pk_needs_an_almost_join_semilattice() {
    let p = Poset::numbered(5, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
    assert!(construct_pk(&p, 1).is_err());
}

#[test]
fn free_map_trivial_cases() {
    let p = Poset::square();
    let none = |_: &[usize]| Vec::new();
    assert_eq!(free_map_search(&p, 5, &none), Some(vec![0, 1, 2, 3]));
    assert_eq!(free_map_search(&p, 3, &none), None);
    let all = |_: &[usize]| (0..5).collect::<Vec<_>>();
    assert_eq!(free_map_search(&Poset::antichain(3), 5, &all), Some(vec![0, 1, 2]));
    // F(S) = everything forces f``(P↓y) ⊆ f``(P↓x) for x < y, impossible for injections.
    assert_eq!(free_map_search(&Poset::chain(2), 5, &all), None);
}

fn injections(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..k.pow(n as u32))
        .map(|c| common::tuple(c, n, k))
        .filter(|f| f.iter().collect::<BTreeSet<_>>().len() == n)
        .collect()
}

#[test]
fn free_map_agrees_with_enumeration_on_small_posets() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for n in 1..=4 {
        for p in enumerate_posets(n) {
            for k in n..=5 {
                let table: HashMap<Vec<usize>, Vec<usize>> = common::subsets(&common::all(k))
                    .into_iter()
                    .map(|s| (s, (0..k).filter(|_| rng.gen_bool(0.4)).collect()))
                    .collect();
                let f = |s: &[usize]| table[s].clone();
                let first = injections(n, k).into_iter().find(|g| is_free_map(&p, g, &f));
                assert_eq!(free_map_search(&p, k, &f), first);
            }
        }
    }
}

#[test]
fn free_sections() {
    let p = Poset::chain(3);
    let fam = IdealFamily::all(NormCovering::identity(&p));
    let s = HashMap::new();
    let sigma = free_section_search(&fam, &s).unwrap().unwrap();
    for a in 0..3 {
        assert_eq!(fam.ideals[sigma[a]], p.down(a));
    }
    let cover = NormCovering::identity(&p);
    let missing = IdealFamily::new(cover.clone(), vec![vec![0], vec![0, 1]]).unwrap();
    assert_eq!(free_section_search(&missing, &s).unwrap(), None);
    let bad: HashMap<usize, Vec<usize>> = [(2, vec![0])].into_iter().collect();
    assert!(free_section_search(&fam, &bad).unwrap_err().is_input());
}

#[test]
fn free_sections_agree_with_enumeration_on_pk() {
    let pk = construct_pk(&Poset::chain(2), 2).unwrap();
    let fam = IdealFamily::all(pk.cover.clone());
    let nonmax = fam.nonmax();
    let x = fam.cover.x.len();
    let m = fam.ideals.len();
    for seed in 0..20usize {
        let s: HashMap<usize, Vec<usize>> =
            nonmax.iter().enumerate().map(|(i, &id)| (id, (0..x).filter(|v| (v * 7 + i * 3 + seed) % 4 == 0).collect())).collect();
        let brute = (0..m * m).map(|c| common::tuple(c, 2, m)).find(|sigma| is_free_section(&fam, &s, sigma));
        assert_eq!(free_section_search(&fam, &s).unwrap(), brute, "seed {seed}");
    }
}

#[test]
fn dot_output_lists_covers() {
    let dot = Poset::chain(3).to_dot();
    assert_eq!(dot.matches("->").count(), 2);
}
