//! Finite posets and the ▽ calculus.
//!
//! Elements are numbered `0..n` in load order; every search in this module
//! explores candidates in that numbering, so results are deterministic.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::par;
use crate::text;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl Poset {
    /// Builds the reflexive-transitive closure of `pairs` (each `(a, b)` read as `a ≤ b`).
    pub fn new(labels: Vec<String>, pairs: &[(usize, usize)]) -> Result<Poset> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::input("posets must be nonempty"));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::input(format!("duplicate element label `{l}`")));
            }
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::input(format!("order pair ({a}, {b}) outside 0..{n}")));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(Error::input(format!(
                        "order relation has a cycle through `{}` and `{}`",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Poset { labels, leq })
    }

    /// Poset on `0..n` labelled by the decimal indices.
    pub fn numbered(n: usize, pairs: &[(usize, usize)]) -> Result<Poset> {
        Poset::new((0..n).map(|i| i.to_string()).collect(), pairs)
    }

    /// Accepts an explicit order matrix after checking the partial order axioms.
    pub fn from_matrix(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Poset> {
        let n = labels.len();
        if n == 0 || leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::input("order matrix does not match the label list"));
        }
        for i in 0..n {
            if !leq[i][i] {
                return Err(Error::input("order matrix is not reflexive"));
            }
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::input("order matrix is not antisymmetric"));
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] && !leq[i][k] {
                        return Err(Error::input("order matrix is not transitive"));
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        if let Some(l) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::input(format!("duplicate element label `{l}`")));
        }
        Ok(Poset { labels, leq })
    }

    pub fn chain(n: usize) -> Poset {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Poset::numbered(n, &pairs).expect("chain")
    }

    pub fn antichain(n: usize) -> Poset {
        Poset::numbered(n, &[]).expect("antichain")
    }

    /// The square {0,1}², elements labelled `00`, `10`, `01`, `11`.
    pub fn square() -> Poset {
        let labels = ["00", "10", "01", "11"].iter().map(|s| s.to_string()).collect();
        Poset::new(labels, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("square")
    }

    /// Cartesian product with the componentwise order; labels are `(a,b)`.
    pub fn product(&self, other: &Poset) -> Poset {
        let (n, m) = (self.len(), other.len());
        let mut labels = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                labels.push(format!("({},{})", self.labels[i], other.labels[j]));
            }
        }
        let mut leq = vec![vec![false; n * m]; n * m];
        for a in 0..n * m {
            for b in 0..n * m {
                leq[a][b] = self.leq[a / m][b / m] && other.leq[a % m][b % m];
            }
        }
        Poset { labels, leq }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::input(format!("unknown element `{label}`")))
    }

    pub fn indices(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut v: Vec<usize> = labels.iter().map(|l| self.index(l)).collect::<Result<_>>()?;
        v.sort_unstable();
        v.dedup();
        Ok(v)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.leq
    }

    /// P↓a
    pub fn down(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq[x][a]).collect()
    }

    /// P↑a
    pub fn up(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq[a][x]).collect()
    }

    pub fn minimal_of(&self, set: &[usize]) -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&x| !set.iter().any(|&y| self.lt(y, x)))
            .collect()
    }

    pub fn maximal_of(&self, set: &[usize]) -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&x| !set.iter().any(|&y| self.lt(x, y)))
            .collect()
    }

    pub fn minimal(&self) -> Vec<usize> {
        self.minimal_of(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn maximal(&self) -> Vec<usize> {
        self.maximal_of(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn is_maximal(&self, a: usize) -> bool {
        !(0..self.len()).any(|y| self.lt(a, y))
    }

    /// P⇑X, the common upper bounds of `x` (all of P when `x` is empty).
    pub fn upper_bounds(&self, x: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&u| x.iter().all(|&a| self.leq[a][u])).collect()
    }

    pub fn lower_bounds(&self, x: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|&u| x.iter().all(|&a| self.leq[u][a])).collect()
    }

    /// Least element of `set`, if any.
    pub fn least_of(&self, set: &[usize]) -> Option<usize> {
        set.iter().copied().find(|&m| set.iter().all(|&x| self.leq[m][x]))
    }

    pub fn greatest_of(&self, set: &[usize]) -> Option<usize> {
        set.iter().copied().find(|&m| set.iter().all(|&x| self.leq[x][m]))
    }

    pub fn least(&self) -> Option<usize> {
        self.least_of(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn greatest(&self) -> Option<usize> {
        self.greatest_of(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.least_of(&self.upper_bounds(&[a, b]))
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.greatest_of(&self.lower_bounds(&[a, b]))
    }

    pub fn is_lattice(&self) -> bool {
        (0..self.len()).all(|a| (0..self.len()).all(|b| self.join(a, b).is_some() && self.meet(a, b).is_some()))
    }

    pub fn is_lower(&self, set: &[usize]) -> bool {
        set.iter().all(|&a| self.down(a).iter().all(|x| set.contains(x)))
    }

    pub fn is_upper(&self, set: &[usize]) -> bool {
        set.iter().all(|&a| self.up(a).iter().all(|x| set.contains(x)))
    }

    /// Nonempty, lower, and upward directed.
    pub fn is_ideal(&self, set: &[usize]) -> bool {
        if set.is_empty() || !self.is_lower(set) {
            return false;
        }
        set.iter().all(|&a| {
            set.iter()
                .all(|&b| self.upper_bounds(&[a, b]).iter().any(|u| set.contains(u)))
        })
    }

    /// Covering pairs `(a, b)` with `a ≺ b`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) && !(0..n).any(|c| self.lt(a, c) && self.lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Induced subposet on `elems` (kept in the given order).
    pub fn sub(&self, elems: &[usize]) -> Poset {
        Poset {
            labels: elems.iter().map(|&i| self.labels[i].clone()).collect(),
            leq: elems.iter().map(|&i| elems.iter().map(|&j| self.leq[i][j]).collect()).collect(),
        }
    }

    /// Same order, relabelled.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Poset> {
        if labels.len() != self.len() {
            return Err(Error::input("relabelling changes the number of elements"));
        }
        Poset::from_matrix(labels, self.leq.clone())
    }

    pub fn parse(src: &str) -> Result<Poset> {
        let mut labels: Vec<String> = Vec::new();
        let mut pos: HashMap<String, usize> = HashMap::new();
        let mut pairs = Vec::new();
        for line in text::lines(src) {
            match line.word(0) {
                Some("elem") => {
                    line.expect_len(2)?;
                    let l = line.word(1).unwrap_or_default().to_string();
                    if pos.contains_key(&l) {
                        return Err(line.err(1, format!("element `{l}` declared twice")));
                    }
                    pos.insert(l.clone(), labels.len());
                    labels.push(l);
                }
                Some("le") => {
                    line.expect_len(3)?;
                    let mut ends = [0; 2];
                    for (k, e) in ends.iter_mut().enumerate() {
                        let w = line.need(k + 1, "element label")?;
                        *e = *pos
                            .get(w)
                            .ok_or_else(|| line.err(k + 1, format!("unknown element `{w}`")))?;
                    }
                    pairs.push((ends[0], ends[1]));
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        Poset::new(labels, &pairs)
    }

    /// Text form: every element, then the covering pairs.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l in &self.labels {
            s.push_str(&format!("elem {l}\n"));
        }
        for (a, b) in self.covers() {
            s.push_str(&format!("le {} {}\n", self.labels[a], self.labels[b]));
        }
        s
    }

    /// Hasse diagram in DOT, edges pointing upward.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph hasse {\n  rankdir=BT;\n");
        for l in &self.labels {
            s.push_str(&format!("  \"{l}\";\n"));
        }
        for (a, b) in self.covers() {
            s.push_str(&format!("  \"{}\" -> \"{}\";\n", self.labels[a], self.labels[b]));
        }
        s.push_str("}\n");
        s
    }

    /// An order isomorphism `self → other` as an index map, if one exists.
    pub fn isomorphism(&self, other: &Poset) -> Option<Vec<usize>> {
        let n = self.len();
        if n != other.len() {
            return None;
        }
        let sig = |p: &Poset, a: usize| (p.down(a).len(), p.up(a).len());
        let mut a: Vec<_> = (0..n).map(|i| sig(self, i)).collect();
        let mut b: Vec<_> = (0..n).map(|i| sig(other, i)).collect();
        let (sa, sb) = (a.clone(), b.clone());
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return None;
        }
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn go(
            i: usize,
            p: &Poset,
            q: &Poset,
            sa: &[(usize, usize)],
            sb: &[(usize, usize)],
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if i == p.len() {
                return true;
            }
            for j in 0..q.len() {
                if used[j] || sa[i] != sb[j] {
                    continue;
                }
                if (0..i).all(|k| p.leq[k][i] == q.leq[map[k]][j] && p.leq[i][k] == q.leq[j][map[k]]) {
                    map[i] = j;
                    used[j] = true;
                    if go(i + 1, p, q, sa, sb, map, used) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        if go(0, self, other, &sa, &sb, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }

    pub fn is_isomorphic(&self, other: &Poset) -> bool {
        self.isomorphism(other).is_some()
    }
}

/// ▽X: the minimal elements of P⇑X. With X empty this is Min P.
pub fn nabla(p: &Poset, x: &[usize]) -> Vec<usize> {
    p.minimal_of(&p.upper_bounds(x))
}

/// X₀▽⋯▽Xₙ₋₁: the union of ▽{a₀,…,aₙ₋₁} over all choices aᵢ ∈ Xᵢ.
pub fn nabla_of_sets(p: &Poset, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut out = BTreeSet::new();
    let mut pick = Vec::with_capacity(sets.len());
    fn go(p: &Poset, sets: &[Vec<usize>], pick: &mut Vec<usize>, out: &mut BTreeSet<usize>) {
        if pick.len() == sets.len() {
            out.extend(nabla(p, pick));
            return;
        }
        for &a in &sets[pick.len()] {
            pick.push(a);
            go(p, sets, pick, out);
            pick.pop();
        }
    }
    go(p, sets, &mut pick, &mut out);
    out.into_iter().collect()
}

/// Least ▽-closed superset of `x`.
///
/// Closure under ▽∅ and under ▽ of pairs suffices: ▽(Y ∪ {x}) ⊆ (▽Y)▽{x}.
pub fn nabla_closure(p: &Poset, x: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; p.len()];
    for &a in x.iter().chain(nabla(p, &[]).iter()) {
        inside[a] = true;
    }
    loop {
        let cur: Vec<usize> = (0..p.len()).filter(|&i| inside[i]).collect();
        let mut grew = false;
        for (k, &a) in cur.iter().enumerate() {
            for &b in &cur[k + 1..] {
                for c in nabla(p, &[a, b]) {
                    if !inside[c] {
                        inside[c] = true;
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            return cur;
        }
    }
}

pub fn is_nabla_closed(p: &Poset, x: &[usize]) -> bool {
    nabla_closure(p, x).len() == {
        let mut v = x.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub pseudo: bool,
    pub supported: bool,
    pub almost: bool,
}

/// Pseudo join-semilattice, supported, and almost join-semilattice tests.
pub fn classify(p: &Poset) -> Classification {
    let n = p.len();
    let generated = |x: &[usize]| {
        let ub = p.upper_bounds(x);
        let gens = p.minimal_of(&ub);
        ub.iter().all(|&u| gens.iter().any(|&g| p.leq(g, u)))
    };
    let mut pseudo = generated(&[]);
    for a in 0..n {
        for b in a + 1..n {
            pseudo &= generated(&[a, b]);
        }
    }
    // The closure of every finite subset is finite: each closure computed below
    // stays inside P, and closures of larger sets are unions of these.
    let supported = pseudo && (0..n).all(|a| (a..n).all(|b| nabla_closure(p, &[a, b]).len() <= n));
    let almost = pseudo
        && (0..n).all(|top| {
            let d = p.down(top);
            d.iter().all(|&x| {
                d.iter().all(|&y| {
                    let ub: Vec<usize> = p.upper_bounds(&[x, y]).into_iter().filter(|u| d.contains(u)).collect();
                    p.least_of(&ub).is_some()
                })
            })
        });
    Classification { pseudo, supported, almost }
}

/// Connected components of the comparability graph, each sorted.
pub fn components(p: &Poset) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut members = Vec::new();
        while let Some(a) = stack.pop() {
            members.push(a);
            for b in 0..n {
                if comp[b] == usize::MAX && (p.leq(a, b) || p.leq(b, a)) {
                    comp[b] = id;
                    stack.push(b);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Splits P into its components, requiring each to have a least element.
pub fn decompose_zero_components(p: &Poset) -> Result<Vec<Poset>> {
    let comps = components(p);
    let bad: Vec<String> = comps
        .iter()
        .filter(|c| p.least_of(c).is_none())
        .map(|c| format!("{{{}}}", c.iter().map(|&i| p.label(i)).collect::<Vec<_>>().join(",")))
        .collect();
    if !bad.is_empty() {
        return Err(Error::domain(format!("components without zero: {}", bad.join(" "))));
    }
    Ok(comps.iter().map(|c| p.sub(c)).collect())
}

/// All ideals of a finite poset; these are the principal ideals P↓x, listed by x.
pub fn ideals(p: &Poset) -> Vec<Vec<usize>> {
    (0..p.len()).map(|a| p.down(a)).collect()
}

/// A poset X with an isotone norm ∂: X → P.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormCovering {
    pub x: Poset,
    pub p: Poset,
    pub bd: Vec<usize>,
}

impl NormCovering {
    pub fn new(x: Poset, p: Poset, bd: Vec<usize>) -> Result<NormCovering> {
        if bd.len() != x.len() || bd.iter().any(|&v| v >= p.len()) {
            return Err(Error::input("norm map does not match the covering poset"));
        }
        for a in 0..x.len() {
            for b in 0..x.len() {
                if x.leq(a, b) && !p.leq(bd[a], bd[b]) {
                    return Err(Error::domain(format!(
                        "norm is not isotone: {} ≤ {} but ∂ values {} ≰ {}",
                        x.label(a),
                        x.label(b),
                        p.label(bd[a]),
                        p.label(bd[b])
                    )));
                }
            }
        }
        Ok(NormCovering { x, p, bd })
    }

    /// X = P with ∂ the identity.
    pub fn identity(p: &Poset) -> NormCovering {
        NormCovering { x: p.clone(), p: p.clone(), bd: (0..p.len()).collect() }
    }

    /// ∂𝐮 = ∂(max 𝐮) for an ideal 𝐮 of X.
    pub fn ideal_norm(&self, ideal: &[usize]) -> Result<usize> {
        if !self.x.is_ideal(ideal) {
            return Err(Error::input("not an ideal of the covering poset"));
        }
        let top = self.x.greatest_of(ideal).expect("finite ideals have a maximum");
        Ok(self.bd[top])
    }

    /// Parses the poset format for X plus `norm <x> <p>` lines; `p` is resolved in `target`.
    pub fn parse(src: &str, target: &Poset) -> Result<NormCovering> {
        let mut poset_part = String::new();
        let mut norms = Vec::new();
        for line in text::lines(src) {
            match line.word(0) {
                Some("norm") => {
                    line.expect_len(3)?;
                    let t = line.need(2, "target element")?;
                    let v = target.index(t).map_err(|_| line.err(2, format!("unknown target element `{t}`")))?;
                    norms.push((line.no, line.need(1, "element")?.to_string(), v));
                }
                Some("poset") => {}
                _ => {
                    let toks: Vec<&str> = line.toks.iter().map(|t| t.1).collect();
                    poset_part.push_str(&toks.join(" "));
                }
            }
            poset_part.push('\n');
        }
        let x = Poset::parse(&poset_part)?;
        let mut bd = vec![usize::MAX; x.len()];
        for (no, l, v) in norms {
            let i = x
                .index(&l)
                .map_err(|_| Error::Parse { line: no, col: 6, msg: format!("unknown element `{l}`") })?;
            bd[i] = v;
        }
        if let Some(i) = bd.iter().position(|&v| v == usize::MAX) {
            return Err(Error::input(format!("element `{}` has no norm line", x.label(i))));
        }
        NormCovering::new(x, target.clone(), bd)
    }

    pub fn to_text(&self, target_path: &str) -> String {
        let mut s = format!("poset {target_path}\n");
        s.push_str(&self.x.to_text());
        for i in 0..self.x.len() {
            s.push_str(&format!("norm {} {}\n", self.x.label(i), self.p.label(self.bd[i])));
        }
        s
    }
}

/// An element (a, x) of P⟨K⟩: `map` lists the pairs of the partial function x, sorted by argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PkElement {
    pub a: usize,
    pub map: Vec<(usize, usize)>,
}

impl PkElement {
    pub fn domain(&self) -> Vec<usize> {
        self.map.iter().map(|m| m.0).collect()
    }

    /// True when `other.map` extends `self.map`.
    pub fn extended_by(&self, other: &PkElement) -> bool {
        self.map.iter().all(|m| other.map.contains(m))
    }
}

#[derive(Clone, Debug)]
pub struct Pk {
    pub cover: NormCovering,
    pub elements: Vec<PkElement>,
}

/// P⟨K⟩ for an almost join-semilattice P whose components have zero, with K = {0,…,k-1}.
pub fn construct_pk(p: &Poset, k: usize) -> Result<Pk> {
    if !classify(p).almost {
        return Err(Error::domain("P⟨K⟩ needs an almost join-semilattice"));
    }
    decompose_zero_components(p)?;
    let mut elements = Vec::new();
    for a in 0..p.len() {
        let d = p.down(a);
        for mask in 0u64..(1u64 << d.len()) {
            let dom: Vec<usize> = (0..d.len()).filter(|&i| mask >> i & 1 == 1).map(|i| d[i]).collect();
            if !nabla(p, &dom).contains(&a) {
                continue;
            }
            let combos = k.checked_pow(dom.len() as u32).ok_or_else(|| Error::Size("P⟨K⟩ too large".into()))?;
            if elements.len() + combos > 1 << 16 {
                return Err(Error::Size(format!("P⟨K⟩ would exceed {} elements", 1 << 16)));
            }
            for mut code in 0..combos {
                let mut map = Vec::with_capacity(dom.len());
                for &e in &dom {
                    map.push((e, code % k));
                    code /= k;
                }
                elements.push(PkElement { a, map });
            }
        }
    }
    let n = elements.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && p.leq(elements[i].a, elements[j].a) && elements[i].extended_by(&elements[j]) {
                pairs.push((i, j));
            }
        }
    }
    let labels = elements
        .iter()
        .map(|e| {
            let m: Vec<String> = e.map.iter().map(|&(x, v)| format!("{}:{}", p.label(x), v)).collect();
            format!("{}[{}]", p.label(e.a), m.join(","))
        })
        .collect();
    let x = Poset::new(labels, &pairs)?;
    let bd = elements.iter().map(|e| e.a).collect();
    Ok(Pk { cover: NormCovering::new(x, p.clone(), bd)?, elements })
}

/// Memoizing wrapper for a set mapping F on subsets of K.
struct Memo<'a, F> {
    f: &'a F,
    cache: HashMap<Vec<usize>, Vec<usize>>,
}

impl<F: Fn(&[usize]) -> Vec<usize>> Memo<'_, F> {
    fn get(&mut self, set: &[usize]) -> &[usize] {
        if !self.cache.contains_key(set) {
            let mut v = (self.f)(set);
            v.sort_unstable();
            v.dedup();
            self.cache.insert(set.to_vec(), v);
        }
        &self.cache[set]
    }
}

/// Checks F(f``(P↓x)) ∩ f``(P↓y) ⊆ f``(P↓x) for every x ≤ y.
pub fn is_free_map<F: Fn(&[usize]) -> Vec<usize>>(p: &Poset, f: &[usize], setmap: &F) -> bool {
    let image = |a: usize| {
        let mut v: Vec<usize> = p.down(a).iter().map(|&i| f[i]).collect();
        v.sort_unstable();
        v
    };
    for x in 0..p.len() {
        let fx = image(x);
        let big_f = {
            let mut v = setmap(&fx);
            v.sort_unstable();
            v
        };
        for y in p.up(x) {
            let fy = image(y);
            if big_f.iter().any(|v| fy.contains(v) && !fx.contains(v)) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically first injective free map f: P → {0,…,k-1}, if any.
pub fn free_map_search<F>(p: &Poset, k: usize, setmap: &F) -> Option<Vec<usize>>
where
    F: Fn(&[usize]) -> Vec<usize> + Sync,
{
    let n = p.len();
    if k < n {
        return None;
    }
    // need[y]: the element whose assignment completes f``(P↓y)
    let need: Vec<usize> = (0..n).map(|y| *p.down(y).iter().max().unwrap()).collect();
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for y in 0..n {
        for x in p.down(y) {
            if x != y {
                checks[need[y]].push((x, y));
            }
        }
    }
    let firsts: Vec<usize> = (0..k).collect();
    par::find_map_first(&firsts, |&v0| {
        let mut memo = Memo { f: setmap, cache: HashMap::new() };
        let mut f = vec![usize::MAX; n];
        let mut used = vec![false; k];
        f[0] = v0;
        used[v0] = true;
        if !checks_hold(p, &f, &checks[0], &mut memo) {
            return None;
        }
        if assign(1, p, k, &checks, &mut f, &mut used, &mut memo) {
            Some(f)
        } else {
            None
        }
    })
}

fn checks_hold<F: Fn(&[usize]) -> Vec<usize>>(
    p: &Poset,
    f: &[usize],
    pairs: &[(usize, usize)],
    memo: &mut Memo<'_, F>,
) -> bool {
    let image = |a: usize| {
        let mut v: Vec<usize> = p.down(a).iter().map(|&i| f[i]).collect();
        v.sort_unstable();
        v
    };
    pairs.iter().all(|&(x, y)| {
        let fx = image(x);
        let fy = image(y);
        memo.get(&fx).iter().all(|v| !fy.contains(v) || fx.contains(v))
    })
}

fn assign<F: Fn(&[usize]) -> Vec<usize>>(
    i: usize,
    p: &Poset,
    k: usize,
    checks: &[Vec<(usize, usize)>],
    f: &mut Vec<usize>,
    used: &mut Vec<bool>,
    memo: &mut Memo<'_, F>,
) -> bool {
    if i == p.len() {
        return true;
    }
    for v in 0..k {
        if used[v] {
            continue;
        }
        f[i] = v;
        used[v] = true;
        if checks_hold(p, f, &checks[i], memo) && assign(i + 1, p, k, checks, f, used, memo) {
            return true;
        }
        used[v] = false;
    }
    f[i] = usize::MAX;
    false
}

/// A set of ideals of a norm-covering X → P.
#[derive(Clone, Debug)]
pub struct IdealFamily {
    pub cover: NormCovering,
    pub ideals: Vec<Vec<usize>>,
}

impl IdealFamily {
    pub fn new(cover: NormCovering, mut ideals: Vec<Vec<usize>>) -> Result<IdealFamily> {
        for id in ideals.iter_mut() {
            id.sort_unstable();
            id.dedup();
            if !cover.x.is_ideal(id) {
                return Err(Error::input("family member is not an ideal of X"));
            }
        }
        Ok(IdealFamily { cover, ideals })
    }

    /// Every ideal of X.
    pub fn all(cover: NormCovering) -> IdealFamily {
        let ideals = ideals(&cover.x);
        IdealFamily { cover, ideals }
    }

    pub fn norm(&self, i: usize) -> usize {
        let top = self.cover.x.greatest_of(&self.ideals[i]).expect("ideal maximum");
        self.cover.bd[top]
    }

    /// 𝐗⁼: members whose norm is not maximal in P.
    pub fn nonmax(&self) -> Vec<usize> {
        (0..self.ideals.len()).filter(|&i| !self.cover.p.is_maximal(self.norm(i))).collect()
    }
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Checks that σ (indices into `fam.ideals`) is an isotone section of ∂ with
/// S(σ(a)) ∩ σ(b) ⊆ σ(a) whenever a < b.
pub fn is_free_section(fam: &IdealFamily, s: &HashMap<usize, Vec<usize>>, sigma: &[usize]) -> bool {
    let p = &fam.cover.p;
    if sigma.len() != p.len() {
        return false;
    }
    let empty = Vec::new();
    (0..p.len()).all(|a| fam.norm(sigma[a]) == a)
        && (0..p.len()).all(|a| {
            p.up(a).into_iter().all(|b| {
                let (ia, ib) = (&fam.ideals[sigma[a]], &fam.ideals[sigma[b]]);
                let sa = s.get(&sigma[a]).unwrap_or(&empty);
                subset(ia, ib) && (a == b || sa.iter().all(|v| !ib.contains(v) || ia.contains(v)))
            })
        })
}

/// First isotone free section σ: P → `fam.ideals` in lexicographic order of member indices.
pub fn free_section_search(fam: &IdealFamily, s: &HashMap<usize, Vec<usize>>) -> Result<Option<Vec<usize>>> {
    let nonmax = fam.nonmax();
    if let Some(bad) = s.keys().find(|k| !nonmax.contains(k)) {
        return Err(Error::input(format!("S is defined on family member {bad}, which is not in 𝐗⁼")));
    }
    let p = &fam.cover.p;
    let cands: Vec<Vec<usize>> =
        (0..p.len()).map(|a| (0..fam.ideals.len()).filter(|&i| fam.norm(i) == a).collect()).collect();
    if cands.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    let empty = Vec::new();
    let ok_pair = |a: usize, b: usize, sigma: &[usize]| {
        let (ia, ib) = (&fam.ideals[sigma[a]], &fam.ideals[sigma[b]]);
        let sa = s.get(&sigma[a]).unwrap_or(&empty);
        subset(ia, ib) && sa.iter().all(|v| !ib.contains(v) || ia.contains(v))
    };
    fn go(
        i: usize,
        p: &Poset,
        cands: &[Vec<usize>],
        sigma: &mut Vec<usize>,
        ok_pair: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if i == p.len() {
            return true;
        }
        for &c in &cands[i] {
            sigma[i] = c;
            let fine = (0..i).all(|j| (!p.lt(j, i) || ok_pair(j, i, sigma)) && (!p.lt(i, j) || ok_pair(i, j, sigma)));
            if fine && go(i + 1, p, cands, sigma, ok_pair) {
                return true;
            }
        }
        false
    }
    let mut sigma = vec![0; p.len()];
    Ok(if go(0, p, &cands, &mut sigma, &ok_pair) { Some(sigma) } else { None })
}

/// Strict-order bit code of the poset under an element permutation.
fn code_under(p: &Poset, perm: &[usize]) -> u64 {
    let n = p.len();
    let mut c = 0u64;
    for i in 0..n {
        for j in 0..n {
            c <<= 1;
            if i != j && p.leq[perm[i]][perm[j]] {
                c |= 1;
            }
        }
    }
    c
}

fn canonical_code(p: &Poset) -> u64 {
    let n = p.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    permute(&mut perm, 0, &mut |q| {
        let c = code_under(p, q);
        if c < best {
            best = c;
        }
    });
    best
}

pub(crate) fn permute(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// All posets with exactly `n` elements up to isomorphism (n ≤ 7), labelled `0..n`.
pub fn enumerate_posets(n: usize) -> Vec<Poset> {
    assert!((1..=7).contains(&n), "poset enumeration supports 1..=7 elements");
    let mut level = vec![Poset::antichain(1)];
    for _ in 1..n {
        // Every poset arises from a smaller one by adding a maximal element above a lower set.
        let grown: Vec<Vec<(u64, Poset)>> = par::map(&level, |q| {
            let m = q.len();
            let mut out = Vec::new();
            for mask in 0u64..(1u64 << m) {
                let below: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
                if !q.is_lower(&below) {
                    continue;
                }
                let mut pairs: Vec<(usize, usize)> = Vec::new();
                for a in 0..m {
                    for b in 0..m {
                        if q.lt(a, b) {
                            pairs.push((a, b));
                        }
                    }
                }
                pairs.extend(below.iter().map(|&a| (a, m)));
                let r = Poset::numbered(m + 1, &pairs).expect("extension stays acyclic");
                out.push((canonical_code(&r), r));
            }
            out
        });
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (c, r) in grown.into_iter().flatten() {
            if seen.insert(c) {
                next.push((c, r));
            }
        }
        next.sort_by_key(|e| e.0);
        level = next.into_iter().map(|e| e.1).collect();
    }
    level
}
