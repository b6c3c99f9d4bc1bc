//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library routine it is meant to check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use condensate::poset::Poset;
use condensate::pscaled::PScaledBA;
use condensate::regring::FinRing;
use condensate::structures::{Congruence, FinStructure};
use rand::Rng;

pub fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (0u32..1 << items.len())
        .map(|m| (0..items.len()).filter(|&i| m >> i & 1 == 1).map(|i| items[i]).collect())
        .collect()
}

pub fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn le(p: &Poset, a: usize, b: usize) -> bool {
    p.matrix()[a][b]
}

pub fn upper_bounds(p: &Poset, x: &[usize]) -> Vec<usize> {
    (0..p.len()).filter(|&u| x.iter().all(|&a| le(p, a, u))).collect()
}

pub fn minimal(p: &Poset, s: &[usize]) -> Vec<usize> {
    s.iter().copied().filter(|&a| !s.iter().any(|&b| b != a && le(p, b, a))).collect()
}

pub fn nabla(p: &Poset, x: &[usize]) -> Vec<usize> {
    minimal(p, &upper_bounds(p, x))
}

/// The n-ary ▽ of sets: ▽{a₀,…} over every choice aᵢ ∈ Xᵢ.
pub fn nabla_sets(p: &Poset, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut out = BTreeSet::new();
    let mut picks: Vec<Vec<usize>> = vec![vec![]];
    for s in sets {
        picks = picks.iter().flat_map(|pk| s.iter().map(move |&a| [pk.clone(), vec![a]].concat())).collect();
    }
    for pk in picks {
        out.extend(nabla(p, &pk));
    }
    out.into_iter().collect()
}

/// Least set containing `x` with ▽Y inside for every Y inside, by iterating over all subsets.
pub fn closure(p: &Poset, x: &[usize]) -> Vec<usize> {
    let mut cur: BTreeSet<usize> = x.iter().copied().collect();
    loop {
        let items: Vec<usize> = cur.iter().copied().collect();
        let mut next = cur.clone();
        for y in subsets(&items) {
            next.extend(nabla(p, &y));
        }
        if next == cur {
            return items;
        }
        cur = next;
    }
}

/// Whether P⇑X is generated by its minimal elements, for every X ⊆ P.
fn pseudo(p: &Poset) -> bool {
    subsets(&all(p.len())).iter().all(|x| {
        let ub = upper_bounds(p, x);
        let gens = minimal(p, &ub);
        ub.iter().all(|&u| gens.iter().any(|&g| le(p, g, u)))
    })
}

pub fn classify(p: &Poset) -> (bool, bool, bool) {
    let ps = pseudo(p);
    let supported = ps && subsets(&all(p.len())).iter().all(|x| closure(p, x).len() <= p.len());
    let almost = ps
        && (0..p.len()).all(|a| {
            let d: Vec<usize> = (0..p.len()).filter(|&x| le(p, x, a)).collect();
            d.iter().all(|&x| {
                d.iter().all(|&y| {
                    let ub: Vec<usize> = d.iter().copied().filter(|&z| le(p, x, z) && le(p, y, z)).collect();
                    ub.iter().any(|&z| ub.iter().all(|&w| le(p, z, w)))
                })
            })
        });
    (ps, supported, almost)
}

/// Nonempty directed lower subsets.
pub fn ideals(p: &Poset) -> Vec<Vec<usize>> {
    subsets(&all(p.len()))
        .into_iter()
        .filter(|s| {
            !s.is_empty()
                && s.iter().all(|&a| (0..p.len()).all(|b| !le(p, b, a) || s.contains(&b)))
                && s.iter().all(|&a| s.iter().all(|&b| s.iter().any(|&c| le(p, a, c) && le(p, b, c))))
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for q in permutations(n - 1) {
        for i in 0..=q.len() {
            let mut r = q.clone();
            r.insert(i, n - 1);
            out.push(r);
        }
    }
    out
}

fn code(m: &[Vec<bool>], perm: &[usize]) -> u64 {
    let n = m.len();
    let mut c = 0u64;
    for i in 0..n {
        for j in 0..n {
            c = c << 1 | m[perm[i]][perm[j]] as u64;
        }
    }
    c
}

/// Canonical code of an order matrix: the least code over all relabellings.
pub fn canonical(m: &[Vec<bool>]) -> u64 {
    permutations(m.len()).iter().map(|p| code(m, p)).min().unwrap()
}

/// Canonical codes of all n-element posets, found by closing every strict
/// relation compatible with the natural order and keeping the transitive ones.
pub fn poset_codes(n: usize) -> BTreeSet<u64> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << pairs.len() {
        let mut m = vec![vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                m[i][j] = true;
            }
        }
        let transitive = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| !(m[a][b] && m[b][c]) || m[a][c])));
        if transitive {
            out.insert(canonical(&m));
        }
    }
    out
}

/// Restricted growth strings, as "least member of the class" vectors.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(x: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if x == n {
            out.push(cur.clone());
            return;
        }
        let reps: BTreeSet<usize> = cur.iter().copied().collect();
        for r in reps.into_iter().chain(std::iter::once(x)) {
            cur.push(r);
            go(x + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

pub fn tuple(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for i in (0..k).rev() {
        t[i] = idx % n;
        idx /= n;
    }
    t
}

pub fn index(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |a, &x| a * n + x)
}

/// Every congruence (compatible partition plus saturated enlarged relations), sorted.
pub fn congruences(a: &FinStructure) -> Vec<Congruence> {
    let n = a.size();
    let lang = a.lang();
    let mut out = Vec::new();
    for part in partitions(n) {
        let compatible = lang.ops.iter().enumerate().all(|(i, &(_, k))| {
            let table = a.op_table(i);
            let len = n.pow(k as u32);
            (0..len).all(|s| {
                (0..len).all(|t| {
                    let (ts, tt) = (tuple(s, k, n), tuple(t, k, n));
                    !ts.iter().zip(&tt).all(|(x, y)| part[*x] == part[*y]) || part[table[s]] == part[table[t]]
                })
            })
        });
        if !compatible {
            continue;
        }
        // Per relation: class tuples forced by R^A, and the free ones.
        let mut options: Vec<Vec<Vec<bool>>> = Vec::new();
        for (r, &(_, k)) in lang.rels.iter().enumerate() {
            let len = n.pow(k as u32);
            let class_of = |idx: usize| index(&tuple(idx, k, n).iter().map(|&x| part[x]).collect::<Vec<_>>(), n);
            let classes: BTreeSet<usize> = (0..len).map(class_of).collect();
            let forced: BTreeSet<usize> = (0..len).filter(|&i| a.rel_table(r)[i]).map(class_of).collect();
            let free: Vec<usize> = classes.difference(&forced).copied().collect();
            let mut opts = Vec::new();
            for chosen in subsets(&all(free.len())) {
                let on: BTreeSet<usize> = forced.iter().copied().chain(chosen.iter().map(|&c| free[c])).collect();
                opts.push((0..len).map(|i| on.contains(&class_of(i))).collect());
            }
            options.push(opts);
        }
        let mut combos: Vec<Vec<Vec<bool>>> = vec![vec![]];
        for opts in &options {
            combos = combos.iter().flat_map(|c| opts.iter().map(move |o| [c.clone(), vec![o.clone()]].concat())).collect();
        }
        for rels in combos {
            out.push(Congruence { part: part.clone(), rels });
        }
    }
    out.sort();
    out
}

/// All maps A → B that preserve operations and relations.
pub fn homs(a: &FinStructure, b: &FinStructure) -> Vec<Vec<usize>> {
    let (n, m) = (a.size(), b.size());
    let mut out = Vec::new();
    for code in 0..m.pow(n as u32) {
        let f = tuple(code, n, m);
        let ops_ok = a.lang().ops.iter().enumerate().all(|(i, &(_, k))| {
            (0..n.pow(k as u32)).all(|s| {
                let t = tuple(s, k, n);
                let img: Vec<usize> = t.iter().map(|&x| f[x]).collect();
                f[a.op_table(i)[s]] == b.op_table(i)[index(&img, m)]
            })
        });
        let rels_ok = a.lang().rels.iter().enumerate().all(|(i, &(_, k))| {
            (0..n.pow(k as u32)).filter(|&s| a.rel_table(i)[s]).all(|s| {
                let img: Vec<usize> = tuple(s, k, n).iter().map(|&x| f[x]).collect();
                b.rel_table(i)[index(&img, m)]
            })
        });
        if ops_ok && rels_ok {
            out.push(f);
        }
    }
    out
}

/// Atom bijection between scaled algebras matching norms, by trying every permutation.
pub fn scaled_isomorphic(a: &PScaledBA, b: &PScaledBA) -> bool {
    let n = a.atom_count();
    n == b.atom_count()
        && permutations(n).iter().any(|perm| (0..n).all(|i| a.top_norm(i) == b.top_norm(perm[i])))
}

/// The Boolean algebra of a scaled algebra: all atom sets.
pub fn elements(a: &PScaledBA) -> Vec<Vec<usize>> {
    subsets(&all(a.atom_count()))
}

/// A^(p) read off from atom norms: x ∈ A^(p) iff p ≤ |a| for every atom a of x.
pub fn level(a: &PScaledBA, p: usize) -> BTreeSet<Vec<usize>> {
    let m = a.poset().matrix();
    elements(a).into_iter().filter(|x| x.iter().all(|&at| m[p][a.top_norm(at)])).collect()
}

/// Normal per the definition: surjective, and f``(A^(p)) = B^(p) for each p.
pub fn normal(src: &PScaledBA, dst: &PScaledBA, apply: impl Fn(&[usize]) -> Vec<usize>) -> bool {
    let img: BTreeSet<Vec<usize>> = elements(src).iter().map(|x| apply(x)).collect();
    img.len() == 1 << dst.atom_count()
        && (0..src.poset().len()).all(|p| level(src, p).iter().map(|x| apply(x)).collect::<BTreeSet<_>>() == level(dst, p))
}

/// A random poset with at most `max` elements, from the shared enumeration.
pub fn random_poset(rng: &mut impl Rng, max: usize) -> Poset {
    let n = rng.gen_range(1..=max);
    let all = condensate::poset::enumerate_posets(n);
    all[rng.gen_range(0..all.len())].clone()
}

pub fn random_scaled(rng: &mut impl Rng, p: &Poset, max_atoms: usize) -> PScaledBA {
    let k = rng.gen_range(1..=max_atoms);
    PScaledBA::numbered(p, (0..k).map(|_| rng.gen_range(0..p.len())).collect()).unwrap()
}

/// Right ideal x·R as a set.
pub fn right_multiples(r: &FinRing, x: usize) -> BTreeSet<usize> {
    (0..r.len()).map(|y| r.mul(x, y)).collect()
}

fn add_closure(r: &FinRing, mut s: BTreeSet<usize>) -> BTreeSet<usize> {
    s.insert(r.zero());
    loop {
        let items: Vec<usize> = s.iter().copied().collect();
        let before = s.len();
        for &a in &items {
            for &b in &items {
                s.insert(r.add(a, b));
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

/// Sum of two additive subgroups.
pub fn sum(r: &FinRing, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> BTreeSet<usize> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| r.add(x, y))).collect()
}

/// All two-sided ideals: sums of principal ideals R x R, closed under sums.
pub fn two_sided_ideals(r: &FinRing) -> BTreeSet<BTreeSet<usize>> {
    let n = r.len();
    let principal: BTreeSet<BTreeSet<usize>> = (0..n)
        .map(|x| {
            let gens: BTreeSet<usize> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| r.mul(r.mul(a, x), b)).collect();
            let mut with_x = gens;
            with_x.insert(x);
            let mut s = add_closure(r, with_x);
            loop {
                let items: Vec<usize> = s.iter().copied().collect();
                let more: BTreeSet<usize> = items.iter().flat_map(|&y| (0..n).flat_map(move |a| [r.mul(a, y), r.mul(y, a)])).collect();
                let next = add_closure(r, &s | &more);
                if next == s {
                    break s;
                }
                s = next;
            }
        })
        .collect();
    let mut out: BTreeSet<BTreeSet<usize>> = principal.clone();
    loop {
        let items: Vec<BTreeSet<usize>> = out.iter().cloned().collect();
        let before = out.len();
        for a in &items {
            for b in &principal {
                out.insert(sum(r, a, b));
            }
        }
        if out.len() == before {
            return out;
        }
    }
}
