//! Finite P-scaled Boolean algebras, stored by their atoms.
//!
//! A finite Boolean algebra is the powerset of its atoms; an element is a
//! sorted list of atom indices. Each atom `a` carries a principal norm
//! `P↓|a|`, and `A^(p)` is the ideal of elements all of whose atoms have
//! `p ≤ |a|`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::poset::Poset;
use crate::text;

pub type Element = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PScaledBA {
    p: Poset,
    labels: Vec<String>,
    norm: Vec<usize>,
}

impl PScaledBA {
    /// Atoms with the given labels; `norm[i]` generates the norm ideal of atom `i`.
    pub fn new(p: &Poset, labels: Vec<String>, norm: Vec<usize>) -> Result<PScaledBA> {
        if labels.is_empty() {
            return Err(Error::domain("a P-scaled Boolean algebra needs at least one atom"));
        }
        if labels.len() != norm.len() || norm.iter().any(|&v| v >= p.len()) {
            return Err(Error::input("atom norms do not match the atom list"));
        }
        let mut seen = BTreeSet::new();
        if let Some(l) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::input(format!("duplicate atom `{l}`")));
        }
        Ok(PScaledBA { p: p.clone(), labels, norm })
    }

    /// Atoms named `0..n`.
    pub fn numbered(p: &Poset, norm: Vec<usize>) -> Result<PScaledBA> {
        PScaledBA::new(p, (0..norm.len()).map(|i| i.to_string()).collect(), norm)
    }

    /// Atoms given with explicit norm ideals, each of which must be an ideal of P.
    pub fn from_norm_ideals(p: &Poset, labels: Vec<String>, ideals: &[Vec<usize>]) -> Result<PScaledBA> {
        let mut norm = Vec::with_capacity(ideals.len());
        for (l, id) in labels.iter().zip(ideals) {
            if !p.is_ideal(id) {
                return Err(Error::domain(format!("norm of atom `{l}` is not a nonempty directed lower subset")));
            }
            norm.push(p.greatest_of(id).expect("finite ideals have a maximum"));
        }
        PScaledBA::new(p, labels, norm)
    }

    pub fn poset(&self) -> &Poset {
        &self.p
    }

    pub fn atom_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn atom_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::input(format!("unknown atom `{label}`")))
    }

    /// |a|, the largest element of the norm of atom `a`.
    pub fn top_norm(&self, a: usize) -> usize {
        self.norm[a]
    }

    /// ‖a‖ = P↓|a|.
    pub fn atom_norm(&self, a: usize) -> Vec<usize> {
        self.p.down(self.norm[a])
    }

    pub fn top(&self) -> Element {
        (0..self.atom_count()).collect()
    }

    /// The largest element t_p of A^(p).
    pub fn level_top(&self, p: usize) -> Element {
        (0..self.atom_count()).filter(|&a| self.p.leq(p, self.norm[a])).collect()
    }

    pub fn in_level(&self, x: &[usize], p: usize) -> bool {
        x.iter().all(|&a| self.p.leq(p, self.norm[a]))
    }

    /// All members of A^(p); refuses levels with more than 2^20 elements.
    pub fn level(&self, p: usize) -> Result<Vec<Element>> {
        let t = self.level_top(p);
        if t.len() > 20 {
            return Err(Error::Size(format!("A^(p) has 2^{} elements", t.len())));
        }
        Ok(subsets(&t))
    }

    /// ‖x‖ = {p : x ∈ A^(p)}.
    pub fn element_norm(&self, x: &[usize]) -> Vec<usize> {
        (0..self.p.len()).filter(|&p| self.in_level(x, p)).collect()
    }

    /// Re-checks the scaling axioms and compactness on the atom representation.
    pub fn check_axioms(&self) -> Result<()> {
        let n = self.p.len();
        let mut covered = vec![false; self.atom_count()];
        for p in 0..n {
            for a in self.level_top(p) {
                covered[a] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(Error::domain("the levels do not join to 1"));
        }
        for p in 0..n {
            for q in 0..n {
                let tp = self.level_top(p);
                let tq = self.level_top(q);
                let meet: Element = tp.iter().copied().filter(|a| tq.contains(a)).collect();
                let mut join = BTreeSet::new();
                for r in self.p.upper_bounds(&[p, q]) {
                    join.extend(self.level_top(r));
                }
                if meet != join.into_iter().collect::<Vec<_>>() {
                    return Err(Error::domain(format!(
                        "A^({}) ∩ A^({}) is not generated by the levels above both",
                        self.p.label(p),
                        self.p.label(q)
                    )));
                }
            }
        }
        for a in 0..self.atom_count() {
            if self.p.greatest_of(&self.atom_norm(a)).is_none() {
                return Err(Error::domain("atom norm without a largest element"));
            }
        }
        Ok(())
    }

    /// Atom permutation `self → other` preserving norms, if the algebras are isomorphic.
    pub fn isomorphism(&self, other: &PScaledBA) -> Option<Vec<usize>> {
        if self.p != other.p || self.atom_count() != other.atom_count() {
            return None;
        }
        let mut used = vec![false; other.atom_count()];
        let mut map = Vec::with_capacity(self.atom_count());
        for a in 0..self.atom_count() {
            let b = (0..other.atom_count()).find(|&b| !used[b] && other.norm[b] == self.norm[a])?;
            used[b] = true;
            map.push(b);
        }
        Some(map)
    }

    /// Header line `poset <path>` of a scaled-algebra file.
    pub fn header_path(src: &str) -> Result<String> {
        let first = text::lines(src)
            .into_iter()
            .next()
            .ok_or_else(|| Error::input("empty scaled-algebra file"))?;
        if first.word(0) != Some("poset") {
            return Err(first.err(0, "expected `poset <path>` header"));
        }
        first.expect_len(2)?;
        Ok(first.word(1).unwrap_or_default().to_string())
    }

    /// Lines `atom <label> norm <p>` after the header.
    pub fn parse(src: &str, p: &Poset) -> Result<PScaledBA> {
        let mut labels = Vec::new();
        let mut norm = Vec::new();
        for line in text::lines(src) {
            match line.word(0) {
                Some("poset") => {}
                Some("atom") => {
                    line.expect_len(4)?;
                    if line.word(2) != Some("norm") {
                        return Err(line.err(2, "expected `norm`"));
                    }
                    let w = line.need(3, "norm generator")?;
                    let v = p.index(w).map_err(|_| line.err(3, format!("unknown element `{w}`")))?;
                    labels.push(line.need(1, "atom label")?.to_string());
                    norm.push(v);
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        PScaledBA::new(p, labels, norm)
    }

    pub fn to_text(&self, poset_path: &str) -> String {
        let mut s = format!("poset {poset_path}\n");
        for (l, &v) in self.labels.iter().zip(&self.norm) {
            s.push_str(&format!("atom {l} norm {}\n", self.p.label(v)));
        }
        s
    }
}

pub(crate) fn subsets(set: &[usize]) -> Vec<Element> {
    let mut out = Vec::with_capacity(1 << set.len());
    for mask in 0u64..(1u64 << set.len()) {
        out.push((0..set.len()).filter(|&i| mask >> i & 1 == 1).map(|i| set[i]).collect());
    }
    out
}

/// A finite P-normed (discrete) space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PNormedSpace {
    pub p: Poset,
    pub points: Vec<String>,
    pub norm: Vec<Vec<usize>>,
}

impl PNormedSpace {
    pub fn new(p: &Poset, points: Vec<String>, norm: Vec<Vec<usize>>) -> Result<PNormedSpace> {
        if points.len() != norm.len() {
            return Err(Error::input("point norms do not match the point list"));
        }
        for (x, n) in points.iter().zip(&norm) {
            if !p.is_ideal(n) {
                return Err(Error::domain(format!("norm of point `{x}` is not an ideal of P")));
            }
        }
        Ok(PNormedSpace { p: p.clone(), points, norm })
    }

    pub fn isomorphic(&self, other: &PNormedSpace) -> bool {
        let key = |s: &PNormedSpace| {
            let mut v: Vec<Vec<usize>> = s.norm.iter().map(|n| {
                let mut n = n.clone();
                n.sort_unstable();
                n
            }).collect();
            v.sort();
            v
        };
        self.p == other.p && key(self) == key(other)
    }
}

/// Stone dual: each atom generates an ultrafilter, whose norm is {p : 𝔞 ∩ A^(p) ≠ ∅}.
pub fn ult(a: &PScaledBA) -> PNormedSpace {
    let norm = (0..a.atom_count())
        .map(|at| (0..a.p.len()).filter(|&p| a.in_level(&[at], p)).collect())
        .collect();
    PNormedSpace { p: a.p.clone(), points: a.labels.clone(), norm }
}

/// Clopen algebra of a finite normed space.
pub fn clop(x: &PNormedSpace) -> Result<PScaledBA> {
    PScaledBA::from_norm_ideals(&x.p, x.points.clone(), &x.norm)
}

/// A morphism stored by its Stone-dual map `atoms(dst) → atoms(src)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledMorphism {
    pub src: PScaledBA,
    pub dst: PScaledBA,
    pub dual: Vec<usize>,
}

impl ScaledMorphism {
    pub fn new(src: &PScaledBA, dst: &PScaledBA, dual: Vec<usize>) -> Result<ScaledMorphism> {
        if src.p != dst.p {
            return Err(Error::input("morphism between algebras over different posets"));
        }
        if dual.len() != dst.atom_count() || dual.iter().any(|&a| a >= src.atom_count()) {
            return Err(Error::input("dual map does not match the atom sets"));
        }
        for (b, &a) in dual.iter().enumerate() {
            if !src.p.leq(src.norm[a], dst.norm[b]) {
                return Err(Error::domain(format!(
                    "dual map sends atom `{}` to `{}`, whose norm is not contained in it",
                    dst.labels[b], src.labels[a]
                )));
            }
        }
        Ok(ScaledMorphism { src: src.clone(), dst: dst.clone(), dual })
    }

    pub fn identity(a: &PScaledBA) -> ScaledMorphism {
        ScaledMorphism { src: a.clone(), dst: a.clone(), dual: (0..a.atom_count()).collect() }
    }

    /// The Boolean map: f(x) = {b : dual(b) ∈ x}.
    pub fn apply(&self, x: &[usize]) -> Element {
        (0..self.dst.atom_count()).filter(|&b| x.contains(&self.dual[b])).collect()
    }

    /// `g ∘ self`; dual maps compose in the opposite order.
    pub fn then(&self, g: &ScaledMorphism) -> Result<ScaledMorphism> {
        if g.src != self.dst {
            return Err(Error::input("morphisms are not composable"));
        }
        let dual = g.dual.iter().map(|&b| self.dual[b]).collect();
        Ok(ScaledMorphism { src: self.src.clone(), dst: g.dst.clone(), dual })
    }

    /// Injective, norm-preserving dual map.
    pub fn is_normal(&self) -> bool {
        let mut seen = vec![false; self.src.atom_count()];
        self.dual.iter().enumerate().all(|(b, &a)| {
            let fresh = !std::mem::replace(&mut seen[a], true);
            fresh && self.src.norm[a] == self.dst.norm[b]
        })
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_normal() && self.src.atom_count() == self.dst.atom_count()
    }

    /// f``(A^(p)) ⊆ B^(p) for every p, checked on level tops.
    pub fn preserves_levels(&self) -> bool {
        (0..self.src.p.len()).all(|p| self.dst.in_level(&self.apply(&self.src.level_top(p)), p))
    }

    pub fn parse(src_text: &str, a: &PScaledBA, b: &PScaledBA) -> Result<ScaledMorphism> {
        let mut dual = vec![usize::MAX; b.atom_count()];
        for line in text::lines(src_text) {
            match line.word(0) {
                Some("src") | Some("dst") => {}
                Some("dual") => {
                    line.expect_len(3)?;
                    let bw = line.need(1, "target atom")?;
                    let aw = line.need(2, "source atom")?;
                    let bi = b.atom_index(bw).map_err(|_| line.err(1, format!("unknown atom `{bw}`")))?;
                    let ai = a.atom_index(aw).map_err(|_| line.err(2, format!("unknown atom `{aw}`")))?;
                    dual[bi] = ai;
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        if let Some(b0) = dual.iter().position(|&v| v == usize::MAX) {
            return Err(Error::input(format!("no dual line for atom `{}`", b.labels[b0])));
        }
        ScaledMorphism::new(a, b, dual)
    }

    /// Header value of a `src`/`dst` line in a morphism file.
    pub fn header(src_text: &str, key: &str) -> Result<String> {
        for line in text::lines(src_text) {
            if line.word(0) == Some(key) {
                line.expect_len(2)?;
                return Ok(line.word(1).unwrap_or_default().to_string());
            }
        }
        Err(Error::input(format!("morphism file has no `{key}` line")))
    }
}

/// 2[p]: one atom with norm P↓p.
pub fn two(p: &Poset, pt: usize) -> PScaledBA {
    PScaledBA::new(p, vec!["*".into()], vec![pt]).expect("2[p]")
}

/// ε_p^q: 2[p] → 2[q], the identity on the underlying algebra.
pub fn eps(p: &Poset, a: usize, b: usize) -> Result<ScaledMorphism> {
    if !p.leq(a, b) {
        return Err(Error::input(format!("ε needs {} ≤ {}", p.label(a), p.label(b))));
    }
    ScaledMorphism::new(&two(p, a), &two(p, b), vec![0])
}

/// A/I with the canonical projection; `ideal` lists the atoms generating I.
pub fn quotient(a: &PScaledBA, ideal: &[usize]) -> Result<(PScaledBA, ScaledMorphism)> {
    if ideal.iter().any(|&i| i >= a.atom_count()) {
        return Err(Error::input("ideal names an atom outside the algebra"));
    }
    let keep: Vec<usize> = (0..a.atom_count()).filter(|i| !ideal.contains(i)).collect();
    if keep.is_empty() {
        return Err(Error::domain("quotient by the improper ideal"));
    }
    let q = PScaledBA {
        p: a.p.clone(),
        labels: keep.iter().map(|&i| a.labels[i].clone()).collect(),
        norm: keep.iter().map(|&i| a.norm[i]).collect(),
    };
    let pi = ScaledMorphism { src: a.clone(), dst: q.clone(), dual: keep };
    Ok((q, pi))
}

/// Finite product with its projections. Atom `j` of factor `i` is labelled `i.j`.
pub fn product(factors: &[PScaledBA]) -> Result<(PScaledBA, Vec<ScaledMorphism>)> {
    let first = factors.first().ok_or_else(|| Error::input("empty product"))?;
    if factors.iter().any(|f| f.p != first.p) {
        return Err(Error::input("product factors over different posets"));
    }
    let mut labels = Vec::new();
    let mut norm = Vec::new();
    let mut offsets = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        offsets.push(labels.len());
        for j in 0..f.atom_count() {
            labels.push(format!("{i}.{}", f.labels[j]));
            norm.push(f.norm[j]);
        }
    }
    let prod = PScaledBA { p: first.p.clone(), labels, norm };
    let projections = factors
        .iter()
        .zip(&offsets)
        .map(|(f, &o)| ScaledMorphism {
            src: prod.clone(),
            dst: f.clone(),
            dual: (o..o + f.atom_count()).collect(),
        })
        .collect();
    Ok((prod, projections))
}

/// Mediating morphism `C → ∏ A_i` for a cone of morphisms `C → A_i`.
pub fn product_pairing(prod: &PScaledBA, cone: &[ScaledMorphism]) -> Result<ScaledMorphism> {
    let src = &cone.first().ok_or_else(|| Error::input("empty cone"))?.src;
    let dual: Vec<usize> = cone.iter().flat_map(|f| f.dual.iter().copied()).collect();
    ScaledMorphism::new(src, prod, dual)
}

/// A member f of Σ_A: a partition of the atoms (the atoms of a finite
/// subalgebra U) with a label f(u) ∈ P for each block, u ∈ A^(f(u)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaMember {
    pub blocks: Vec<Element>,
    pub label: Vec<usize>,
}

impl SigmaMember {
    fn block_of(&self, atom: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&atom)).expect("partition covers every atom")
    }

    /// A_f^(p): joins of blocks u with p ≤ f(u).
    pub fn level(&self, p: &Poset, pt: usize) -> Vec<Element> {
        let good: Vec<usize> = (0..self.blocks.len()).filter(|&u| p.leq(pt, self.label[u])).collect();
        subsets(&good)
            .into_iter()
            .map(|bs| {
                let mut e: Element = bs.iter().flat_map(|&u| self.blocks[u].iter().copied()).collect();
                e.sort_unstable();
                e
            })
            .collect()
    }

    /// f ⊑ g: U_f ⊆ U_g and f(v^{U_f}) ≤ g(v) for every atom v of U_g.
    pub fn below(&self, g: &SigmaMember, p: &Poset) -> bool {
        g.blocks.iter().enumerate().all(|(v, block)| {
            let u = self.block_of(block[0]);
            block.iter().all(|&a| self.blocks[u].contains(&a)) && p.leq(self.label[u], g.label[v])
        })
    }
}

#[derive(Clone, Debug)]
pub struct Sigma {
    pub members: Vec<SigmaMember>,
    /// `order[i][j]` iff members[i] ⊑ members[j].
    pub order: Vec<Vec<bool>>,
    pub directed: bool,
    /// Index of f_max, the singleton partition labelled by |u|.
    pub top: usize,
    /// A^(p) = ⋃ A_f^(p) for every p, and A = ⋃ A_f.
    pub union_ok: bool,
}

/// Enumerates Σ_A; refuses algebras with more than 6 atoms.
pub fn sigma_enumerate(a: &PScaledBA) -> Result<Sigma> {
    let n = a.atom_count();
    if n > 6 {
        return Err(Error::Size(format!("Σ_A over {n} atoms is beyond the enumeration bound of 6")));
    }
    let p = &a.p;
    let mut members = Vec::new();
    for blocks in set_partitions(n) {
        let options: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| (0..p.len()).filter(|&r| a.in_level(b, r)).collect())
            .collect();
        let mut pick = vec![0usize; blocks.len()];
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        loop {
            members.push(SigmaMember {
                blocks: blocks.clone(),
                label: pick.iter().zip(&options).map(|(&i, o)| o[i]).collect(),
            });
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < options[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    let m = members.len();
    let order: Vec<Vec<bool>> =
        (0..m).map(|i| (0..m).map(|j| members[i].below(&members[j], p)).collect()).collect();
    let directed = (0..m).all(|i| (0..m).all(|j| (0..m).any(|k| order[i][k] && order[j][k])));
    let top = members
        .iter()
        .position(|f| f.blocks.len() == n && f.blocks.iter().zip(&f.label).all(|(b, &l)| l == a.norm[b[0]]))
        .expect("f_max is always a member");
    let mut union_ok = true;
    for pt in 0..p.len() {
        let mut seen: BTreeSet<Element> = BTreeSet::new();
        for f in &members {
            seen.extend(f.level(p, pt));
        }
        let want: BTreeSet<Element> = subsets(&a.level_top(pt)).into_iter().collect();
        union_ok &= seen == want;
    }
    union_ok &= members[top].blocks.len() == n;
    Ok(Sigma { members, order, directed, top, union_ok })
}

/// Set partitions of `0..n` in restricted-growth order, blocks sorted.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<Element>> {
    let mut out = Vec::new();
    let mut rg = vec![0usize; n];
    fn go(i: usize, max: usize, rg: &mut Vec<usize>, out: &mut Vec<Vec<Element>>) {
        if i == rg.len() {
            let k = rg.iter().copied().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); k];
            for (x, &b) in rg.iter().enumerate() {
                blocks[b].push(x);
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max {
            rg[i] = b;
            go(i + 1, max.max(b + 1), rg, out);
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    go(1, 1, &mut rg, &mut out);
    out
}
