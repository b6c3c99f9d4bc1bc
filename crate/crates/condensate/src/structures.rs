//! Finite first-order structures, their congruences, and the relative
//! congruence machinery used by projectability witnesses.
//!
//! Tuples over a universe of size `n` are stored by their mixed-radix index
//! `t[0]·n^(k-1) + … + t[k-1]`; operation tables and relation indicators are
//! indexed the same way.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par;
use crate::poset::Poset;
use crate::text;

/// Default universe bound for congruence enumeration.
pub const DEFAULT_CON_BOUND: usize = 12;
/// Largest congruence lattice that will be enumerated.
pub const MAX_CONGRUENCES: usize = 1 << 16;

pub(crate) fn tuple_index(t: &[usize], n: usize) -> usize {
    t.iter().fold(0, |acc, &x| acc * n + x)
}

pub(crate) fn tuple_of(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut t = vec![0; k];
    for slot in t.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

fn pow(n: usize, k: usize) -> Result<usize> {
    n.checked_pow(k as u32)
        .filter(|&v| v <= 1 << 22)
        .ok_or_else(|| Error::Size(format!("{n}^{k} table entries")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Language {
    pub consts: Vec<String>,
    pub ops: Vec<(String, usize)>,
    pub rels: Vec<(String, usize)>,
}

impl Language {
    pub fn new(consts: Vec<String>, ops: Vec<(String, usize)>, rels: Vec<(String, usize)>) -> Result<Language> {
        let mut seen = BTreeSet::new();
        let names = consts.iter().chain(ops.iter().map(|o| &o.0)).chain(rels.iter().map(|r| &r.0));
        for name in names {
            if !seen.insert(name.clone()) {
                return Err(Error::input(format!("symbol `{name}` declared twice")));
            }
        }
        if let Some((s, _)) = ops.iter().chain(&rels).find(|s| s.1 == 0) {
            return Err(Error::input(format!("symbol `{s}` has arity 0")));
        }
        Ok(Language { consts, ops, rels })
    }

    /// The lattice language {join/2, meet/2}.
    pub fn lattice() -> Language {
        Language { consts: vec![], ops: vec![("join".into(), 2), ("meet".into(), 2)], rels: vec![] }
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.0 == name)
    }

    pub fn rel_index(&self, name: &str) -> Option<usize> {
        self.rels.iter().position(|r| r.0 == name)
    }

    pub fn const_index(&self, name: &str) -> Option<usize> {
        self.consts.iter().position(|c| c == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinStructure {
    lang: Language,
    size: usize,
    names: Vec<String>,
    consts: Vec<usize>,
    ops: Vec<Vec<usize>>,
    rels: Vec<Vec<bool>>,
}

impl FinStructure {
    pub fn new(
        lang: Language,
        names: Vec<String>,
        consts: Vec<usize>,
        ops: Vec<Vec<usize>>,
        rels: Vec<Vec<bool>>,
    ) -> Result<FinStructure> {
        let n = names.len();
        if n == 0 {
            return Err(Error::input("structures must have a nonempty universe"));
        }
        let mut seen = BTreeSet::new();
        if let Some(x) = names.iter().find(|x| !seen.insert(x.as_str())) {
            return Err(Error::input(format!("duplicate element name `{x}`")));
        }
        if consts.len() != lang.consts.len() || ops.len() != lang.ops.len() || rels.len() != lang.rels.len() {
            return Err(Error::input("interpretation does not match the language"));
        }
        if consts.iter().any(|&c| c >= n) {
            return Err(Error::input("constant outside the universe"));
        }
        for ((name, k), table) in lang.ops.iter().zip(&ops) {
            if table.len() != pow(n, *k)? || table.iter().any(|&v| v >= n) {
                return Err(Error::input(format!("table of `{name}` is not a total operation on the universe")));
            }
        }
        for ((name, k), r) in lang.rels.iter().zip(&rels) {
            if r.len() != pow(n, *k)? {
                return Err(Error::input(format!("relation `{name}` has the wrong shape")));
            }
        }
        Ok(FinStructure { lang, size: n, names, consts, ops, rels })
    }

    /// A finite lattice as an algebra with `join` and `meet`.
    pub fn lattice(p: &Poset) -> Result<FinStructure> {
        let n = p.len();
        let mut join = vec![0; n * n];
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                join[a * n + b] = p.join(a, b).ok_or_else(|| Error::domain("poset is not a lattice"))?;
                meet[a * n + b] = p.meet(a, b).ok_or_else(|| Error::domain("poset is not a lattice"))?;
            }
        }
        FinStructure::new(Language::lattice(), p.labels().to_vec(), vec![], vec![join, meet], vec![])
    }

    /// Lattice order of an algebra with a `join` operation (a ≤ b iff a ∨ b = b).
    pub fn lattice_order(&self) -> Result<Poset> {
        let j = self.lang.op_index("join").ok_or_else(|| Error::input("structure has no `join` operation"))?;
        let n = self.size;
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.ops[j][a * n + b] == b {
                    pairs.push((a, b));
                }
            }
        }
        Poset::new(self.names.clone(), &pairs)
    }

    pub fn lang(&self) -> &Language {
        &self.lang
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::input(format!("unknown element `{name}`")))
    }

    pub fn constant(&self, i: usize) -> usize {
        self.consts[i]
    }

    pub fn op(&self, i: usize, args: &[usize]) -> usize {
        self.ops[i][tuple_index(args, self.size)]
    }

    pub fn op_table(&self, i: usize) -> &[usize] {
        &self.ops[i]
    }

    pub fn rel(&self, i: usize, t: &[usize]) -> bool {
        self.rels[i][tuple_index(t, self.size)]
    }

    pub fn rel_table(&self, i: usize) -> &[bool] {
        &self.rels[i]
    }

    pub fn has_relations(&self) -> bool {
        !self.lang.rels.is_empty()
    }

    /// Parses the structure format. Lines led by a word in `extra` are returned untouched.
    pub(crate) fn parse_with<'a>(src: &'a str, extra: &[&str]) -> Result<(FinStructure, Vec<text::Line<'a>>)> {
        enum Block {
            None,
            Op(usize),
            Rel(usize),
        }
        let mut size = None;
        let mut names: Option<Vec<String>> = None;
        let mut lang = Language::default();
        let mut consts_raw: Vec<(usize, String, String)> = Vec::new();
        let mut op_rows: Vec<Vec<(usize, Vec<(usize, String)>)>> = Vec::new();
        let mut rel_rows: Vec<Vec<(usize, Vec<String>)>> = Vec::new();
        let mut block = Block::None;
        let mut rest = Vec::new();
        let lines = text::lines(src);
        for line in lines {
            let head = line.word(0).unwrap_or_default();
            match head {
                "sort" => {
                    line.expect_len(2)?;
                    if size.is_some() {
                        return Err(line.err(0, "universe size given twice"));
                    }
                    let n = line.usize_at(1, "universe size")?;
                    if n == 0 {
                        return Err(line.err(1, "universe must be nonempty"));
                    }
                    size = Some(n);
                    block = Block::None;
                }
                "names" => {
                    names = Some(line.toks[1..].iter().map(|t| t.1.to_string()).collect());
                    block = Block::None;
                }
                "const" => {
                    line.expect_len(4)?;
                    if line.word(2) != Some("=") {
                        return Err(line.err(2, "expected `=`"));
                    }
                    lang.consts.push(line.word(1).unwrap_or_default().to_string());
                    consts_raw.push((line.no, line.word(1).unwrap_or_default().into(), line.word(3).unwrap_or_default().into()));
                    block = Block::None;
                }
                "op" | "rel" => {
                    line.expect_len(2)?;
                    let w = line.word(1).unwrap_or_default();
                    let (name, k) = w.split_once('/').ok_or_else(|| line.err(1, "expected `name/arity`"))?;
                    let k: usize = k.parse().map_err(|_| line.err(1, format!("bad arity in `{w}`")))?;
                    if k == 0 {
                        return Err(line.err(1, "arity must be at least 1"));
                    }
                    if head == "op" {
                        lang.ops.push((name.to_string(), k));
                        op_rows.push(Vec::new());
                        block = Block::Op(lang.ops.len() - 1);
                    } else {
                        lang.rels.push((name.to_string(), k));
                        rel_rows.push(Vec::new());
                        block = Block::Rel(lang.rels.len() - 1);
                    }
                }
                w if extra.contains(&w) => {
                    block = Block::None;
                    rest.push(line);
                }
                _ => match block {
                    Block::Op(i) => {
                        op_rows[i].push((line.no, line.toks.iter().map(|t| (t.0, t.1.to_string())).collect()));
                    }
                    Block::Rel(i) => {
                        rel_rows[i].push((line.no, line.toks.iter().map(|t| t.1.to_string()).collect()));
                    }
                    Block::None => return Err(line.err(0, format!("unknown directive `{head}`"))),
                },
            }
        }
        let n = size.ok_or_else(|| Error::input("missing `sort <n>` line"))?;
        let names = match names {
            Some(v) if v.len() != n => {
                return Err(Error::input(format!("`names` lists {} elements, universe has {n}", v.len())))
            }
            Some(v) => v,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let lookup = |w: &str| -> Option<usize> {
            names.iter().position(|x| x == w).or_else(|| w.parse().ok().filter(|&v: &usize| v < n))
        };
        let mut consts = Vec::new();
        for (no, c, v) in consts_raw {
            consts.push(lookup(&v).ok_or_else(|| Error::Parse { line: no, col: 1, msg: format!("constant `{c}` has unknown value `{v}`") })?);
        }
        let mut ops = Vec::new();
        for (i, rows) in op_rows.iter().enumerate() {
            let (name, k) = &lang.ops[i];
            let want_rows = pow(n, k - 1)?;
            if rows.len() != want_rows {
                return Err(Error::input(format!("operation `{name}` needs {want_rows} rows, found {}", rows.len())));
            }
            let mut table = Vec::with_capacity(want_rows * n);
            for (no, row) in rows {
                if row.len() != n {
                    return Err(Error::Parse { line: *no, col: 1, msg: format!("row of `{name}` needs {n} entries") });
                }
                for (col, w) in row {
                    let v = lookup(w).ok_or_else(|| Error::Parse { line: *no, col: *col, msg: format!("unknown element `{w}`") })?;
                    table.push(v);
                }
            }
            ops.push(table);
        }
        let mut rels = Vec::new();
        for (i, rows) in rel_rows.iter().enumerate() {
            let (name, k) = &lang.rels[i];
            let mut r = vec![false; pow(n, *k)?];
            for (no, row) in rows {
                if row.len() != *k {
                    return Err(Error::Parse { line: *no, col: 1, msg: format!("tuple of `{name}` needs {k} entries") });
                }
                let t: Vec<usize> = row
                    .iter()
                    .map(|w| lookup(w).ok_or_else(|| Error::Parse { line: *no, col: 1, msg: format!("unknown element `{w}`") }))
                    .collect::<Result<_>>()?;
                r[tuple_index(&t, n)] = true;
            }
            rels.push(r);
        }
        let lang = Language::new(lang.consts, lang.ops, lang.rels)?;
        Ok((FinStructure::new(lang, names, consts, ops, rels)?, rest))
    }

    pub fn parse(src: &str) -> Result<FinStructure> {
        FinStructure::parse_with(src, &[]).map(|r| r.0)
    }

    pub fn to_text(&self) -> String {
        let n = self.size;
        let mut s = format!("sort {n}\n");
        let numbered = self.names.iter().enumerate().all(|(i, x)| *x == i.to_string());
        if !numbered {
            s.push_str(&format!("names {}\n", self.names.join(" ")));
        }
        for (c, &v) in self.lang.consts.iter().zip(&self.consts) {
            s.push_str(&format!("const {c} = {}\n", self.names[v]));
        }
        for ((name, k), table) in self.lang.ops.iter().zip(&self.ops) {
            s.push_str(&format!("op {name}/{k}\n"));
            for row in table.chunks(n) {
                let cells: Vec<&str> = row.iter().map(|&v| self.names[v].as_str()).collect();
                s.push_str(&cells.join(" "));
                s.push('\n');
            }
        }
        for ((name, k), r) in self.lang.rels.iter().zip(&self.rels) {
            s.push_str(&format!("rel {name}/{k}\n"));
            for (idx, _) in r.iter().enumerate().filter(|e| *e.1) {
                let t: Vec<&str> = tuple_of(idx, *k, n).iter().map(|&v| self.names[v].as_str()).collect();
                s.push_str(&t.join(" "));
                s.push('\n');
            }
        }
        s
    }

    /// 𝟎_A = (identity, R^A).
    pub fn zero_cong(&self) -> Congruence {
        Congruence { part: (0..self.size).collect(), rels: self.rels.clone() }
    }

    /// 𝟏_A: everything collapsed, every relation full.
    pub fn full_cong(&self) -> Congruence {
        Congruence { part: vec![0; self.size], rels: self.rels.iter().map(|r| vec![true; r.len()]).collect() }
    }

    /// Checks the congruence axioms, naming the first failure.
    pub fn check_congruence(&self, c: &Congruence) -> Result<()> {
        let n = self.size;
        if c.part.len() != n || c.rels.len() != self.rels.len() {
            return Err(Error::input("congruence does not match the structure"));
        }
        for x in 0..n {
            if c.part[x] > x || c.part[c.part[x]] != c.part[x] {
                return Err(Error::input("partition vector is not in canonical form"));
            }
        }
        for (i, (name, k)) in self.lang.ops.iter().enumerate() {
            for idx in 0..self.ops[i].len() {
                let t = tuple_of(idx, *k, n);
                let rep: Vec<usize> = t.iter().map(|&x| c.part[x]).collect();
                if c.part[self.ops[i][idx]] != c.part[self.op(i, &rep)] {
                    return Err(Error::domain(format!("partition is not compatible with `{name}`")));
                }
            }
        }
        for (i, (name, k)) in self.lang.rels.iter().enumerate() {
            if c.rels[i].len() != self.rels[i].len() {
                return Err(Error::input(format!("relation `{name}` has the wrong shape")));
            }
            for idx in 0..self.rels[i].len() {
                if self.rels[i][idx] && !c.rels[i][idx] {
                    return Err(Error::domain(format!("enlarged `{name}` does not contain the original relation")));
                }
                let rep = class_index(&c.part, idx, *k, n);
                if c.rels[i][idx] != c.rels[i][rep] {
                    return Err(Error::domain(format!("enlarged `{name}` is not closed under the partition")));
                }
            }
        }
        Ok(())
    }

    /// Least congruence containing the given pairs and relation tuples.
    pub fn generate(&self, pairs: &[(usize, usize)], tuples: &[(usize, Vec<usize>)]) -> Congruence {
        let part = self.close_partition(&(0..self.size).collect::<Vec<_>>(), pairs);
        let mut seeds: Vec<Vec<bool>> = self.rels.clone();
        for (r, t) in tuples {
            seeds[*r][tuple_index(t, self.size)] = true;
        }
        let rels = self.saturate(&part, &seeds);
        Congruence { part, rels }
    }

    /// ⟨x = y⟩ in Con A.
    pub fn principal(&self, x: usize, y: usize) -> Congruence {
        self.generate(&[(x, y)], &[])
    }

    /// Closes an equivalence (given canonically) plus extra pairs under the operations.
    fn close_partition(&self, base: &[usize], pairs: &[(usize, usize)]) -> Vec<usize> {
        let n = self.size;
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut queue: Vec<(usize, usize)> = Vec::new();
        let union = |uf: &mut Vec<usize>, q: &mut Vec<(usize, usize)>, a: usize, b: usize| {
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra != rb {
                uf[ra.max(rb)] = ra.min(rb);
                q.push((a, b));
            }
        };
        for x in 0..n {
            union(&mut uf, &mut queue, x, base[x]);
        }
        for &(a, b) in pairs {
            union(&mut uf, &mut queue, a, b);
        }
        while let Some((a, b)) = queue.pop() {
            for (i, &(_, k)) in self.lang.ops.iter().enumerate() {
                let others = n.pow(k as u32 - 1);
                for pos in 0..k {
                    for o in 0..others {
                        let mut t = tuple_of(o, k - 1, n);
                        t.insert(pos, a);
                        let fa = self.op(i, &t);
                        t[pos] = b;
                        let fb = self.op(i, &t);
                        union(&mut uf, &mut queue, fa, fb);
                    }
                }
            }
        }
        let mut part = vec![0; n];
        let mut least: HashMap<usize, usize> = HashMap::new();
        for x in 0..n {
            let r = find(&mut uf, x);
            part[x] = *least.entry(r).or_insert(x);
        }
        part
    }

    /// Smallest θ-saturated relations containing `seeds`.
    fn saturate(&self, part: &[usize], seeds: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = self.size;
        self.lang
            .rels
            .iter()
            .zip(seeds)
            .map(|(&(_, k), seed)| {
                let mut classes = vec![false; seed.len()];
                for idx in (0..seed.len()).filter(|&i| seed[i]) {
                    classes[class_index(part, idx, k, n)] = true;
                }
                (0..seed.len()).map(|idx| classes[class_index(part, idx, k, n)]).collect()
            })
            .collect()
    }

    pub fn join(&self, a: &Congruence, b: &Congruence) -> Congruence {
        let pairs: Vec<(usize, usize)> = (0..self.size).map(|x| (x, b.part[x])).collect();
        let part = self.close_partition(&a.part, &pairs);
        let seeds: Vec<Vec<bool>> =
            a.rels.iter().zip(&b.rels).map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p || *q).collect()).collect();
        let rels = self.saturate(&part, &seeds);
        Congruence { part, rels }
    }

    pub fn meet(&self, a: &Congruence, b: &Congruence) -> Congruence {
        let n = self.size;
        let mut part = vec![0; n];
        for x in 0..n {
            part[x] = (0..=x).find(|&y| a.part[y] == a.part[x] && b.part[y] == b.part[x]).unwrap_or(x);
        }
        let rels =
            a.rels.iter().zip(&b.rels).map(|(x, y)| x.iter().zip(y).map(|(p, q)| *p && *q).collect()).collect();
        Congruence { part, rels }
    }
}

/// Index of the tuple of class representatives of tuple `idx`.
fn class_index(part: &[usize], idx: usize, k: usize, n: usize) -> usize {
    let t = tuple_of(idx, k, n);
    t.iter().fold(0, |acc, &x| acc * n + part[x])
}

/// A congruence: a compatible partition (each element points at the least
/// member of its class) and, per relation, the enlarged relation R_θ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    pub part: Vec<usize>,
    pub rels: Vec<Vec<bool>>,
}

impl Congruence {
    pub fn related(&self, x: usize, y: usize) -> bool {
        self.part[x] == self.part[y]
    }

    pub fn leq(&self, other: &Congruence) -> bool {
        (0..self.part.len()).all(|x| other.part[x] == other.part[self.part[x]])
            && self.rels.iter().zip(&other.rels).all(|(a, b)| a.iter().zip(b).all(|(p, q)| !p || *q))
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = HashMap::new();
        for (x, &r) in self.part.iter().enumerate() {
            let i = *slot.entry(r).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[i].push(x);
        }
        out
    }

    pub fn contains_tuple(&self, r: usize, t: &[usize]) -> bool {
        self.rels[r][tuple_index(t, self.part.len())]
    }

    /// Human form such as `{0,a}{1}`.
    pub fn describe(&self, a: &FinStructure) -> String {
        self.classes()
            .iter()
            .map(|c| format!("{{{}}}", c.iter().map(|&x| a.name(x)).collect::<Vec<_>>().join(",")))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ConLattice {
    pub members: Vec<Congruence>,
}

impl ConLattice {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.members[i].leq(&self.members[j])
    }

    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.members.binary_search(c).ok()
    }

    /// The order as a poset with labels `0..len`.
    pub fn poset(&self) -> Poset {
        let m = self.len();
        let leq = (0..m).map(|i| (0..m).map(|j| self.leq(i, j)).collect()).collect();
        Poset::from_matrix((0..m).map(|i| i.to_string()).collect(), leq).expect("componentwise order")
    }
}

/// All congruences, sorted; the universe may have at most `bound` elements.
pub fn con_lattice(a: &FinStructure, bound: usize) -> Result<ConLattice> {
    let n = a.size;
    if n > bound {
        return Err(Error::Size(format!("universe of {n} elements exceeds the congruence bound {bound}")));
    }
    let mut principals: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            principals.push(a.close_partition(&(0..n).collect::<Vec<_>>(), &[(x, y)]));
        }
    }
    principals.sort();
    principals.dedup();
    let mut parts: BTreeSet<Vec<usize>> = BTreeSet::new();
    parts.insert((0..n).collect());
    let mut frontier: Vec<Vec<usize>> = parts.iter().cloned().collect();
    while !frontier.is_empty() {
        let grown: Vec<Vec<Vec<usize>>> = par::map(&frontier, |p| {
            principals.iter().map(|q| join_partitions(p, q)).collect()
        });
        frontier.clear();
        for q in grown.into_iter().flatten() {
            if parts.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    let parts: Vec<Vec<usize>> = parts.into_iter().collect();
    let mut total = 0usize;
    let mut free_counts = Vec::with_capacity(parts.len());
    for p in &parts {
        let f = free_classes(a, p).iter().map(|v| v.len()).sum::<usize>();
        total = total.saturating_add(if f >= 63 { usize::MAX } else { 1 << f });
        if total > MAX_CONGRUENCES {
            return Err(Error::Size(format!("more than {MAX_CONGRUENCES} congruences")));
        }
        free_counts.push(f);
    }
    let per_part: Vec<Vec<Congruence>> = par::map(&parts, |p| {
        let base = a.saturate(p, &a.rels);
        let free = free_classes(a, p);
        let flat: Vec<(usize, usize)> =
            free.iter().enumerate().flat_map(|(r, v)| v.iter().map(move |&c| (r, c))).collect();
        let mut out = Vec::with_capacity(1 << flat.len());
        for mask in 0u64..(1u64 << flat.len()) {
            let mut rels = base.clone();
            for (bit, &(r, c)) in flat.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    let k = a.lang.rels[r].1;
                    for idx in 0..rels[r].len() {
                        if class_index(p, idx, k, n) == c {
                            rels[r][idx] = true;
                        }
                    }
                }
            }
            out.push(Congruence { part: p.clone(), rels });
        }
        out
    });
    let mut members: Vec<Congruence> = per_part.into_iter().flatten().collect();
    members.sort();
    Ok(ConLattice { members })
}

/// Per relation, the representative tuples whose class is not forced into R_θ.
fn free_classes(a: &FinStructure, part: &[usize]) -> Vec<Vec<usize>> {
    let n = a.size;
    let base = a.saturate(part, &a.rels);
    a.lang
        .rels
        .iter()
        .zip(&base)
        .map(|(&(_, k), r)| (0..r.len()).filter(|&idx| class_index(part, idx, k, n) == idx && !r[idx]).collect())
        .collect()
}

fn join_partitions(p: &[usize], q: &[usize]) -> Vec<usize> {
    let n = p.len();
    let mut lab: Vec<usize> = p.to_vec();
    loop {
        let mut changed = false;
        for x in 0..n {
            let m = lab[x].min(lab[q[x]]).min(lab[p[x]]);
            for y in [x, q[x], p[x]] {
                if lab[y] != m {
                    lab[y] = m;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut part = vec![0; n];
    for x in 0..n {
        part[x] = (0..=x).find(|&y| lab[y] == lab[x]).unwrap_or(x);
    }
    part
}

/// A homomorphism; the source language must be contained in the target's (the reduct is used).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hom {
    pub src: FinStructure,
    pub dst: FinStructure,
    pub map: Vec<usize>,
    op_map: Vec<usize>,
    rel_map: Vec<usize>,
}

impl Hom {
    pub fn new(src: &FinStructure, dst: &FinStructure, map: Vec<usize>) -> Result<Hom> {
        if map.len() != src.size || map.iter().any(|&v| v >= dst.size) {
            return Err(Error::input("map does not match the universes"));
        }
        let mut op_map = Vec::new();
        for (name, k) in &src.lang.ops {
            let j = dst
                .lang
                .op_index(name)
                .filter(|&j| dst.lang.ops[j].1 == *k)
                .ok_or_else(|| Error::input(format!("target lacks operation `{name}/{k}`")))?;
            op_map.push(j);
        }
        let mut rel_map = Vec::new();
        for (name, k) in &src.lang.rels {
            let j = dst
                .lang
                .rel_index(name)
                .filter(|&j| dst.lang.rels[j].1 == *k)
                .ok_or_else(|| Error::input(format!("target lacks relation `{name}/{k}`")))?;
            rel_map.push(j);
        }
        for (i, c) in src.lang.consts.iter().enumerate() {
            let j = dst.lang.const_index(c).ok_or_else(|| Error::input(format!("target lacks constant `{c}`")))?;
            if map[src.consts[i]] != dst.consts[j] {
                return Err(Error::input(format!("map does not preserve constant `{c}`")));
            }
        }
        for (i, (name, k)) in src.lang.ops.iter().enumerate() {
            for idx in 0..src.ops[i].len() {
                let t = tuple_of(idx, *k, src.size);
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                if map[src.ops[i][idx]] != dst.op(op_map[i], &img) {
                    return Err(Error::input(format!("map does not preserve operation `{name}`")));
                }
            }
        }
        for (i, (name, k)) in src.lang.rels.iter().enumerate() {
            for idx in (0..src.rels[i].len()).filter(|&idx| src.rels[i][idx]) {
                let img: Vec<usize> = tuple_of(idx, *k, src.size).iter().map(|&x| map[x]).collect();
                if !dst.rel(rel_map[i], &img) {
                    return Err(Error::input(format!("map does not preserve relation `{name}`")));
                }
            }
        }
        Ok(Hom { src: src.clone(), dst: dst.clone(), map, op_map, rel_map })
    }

    pub fn identity(a: &FinStructure) -> Hom {
        Hom::new(a, a, (0..a.size).collect()).expect("identity")
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &Hom) -> Result<Hom> {
        if g.src != self.dst {
            return Err(Error::input("homomorphisms are not composable"));
        }
        Hom::new(&self.src, &g.dst, self.map.iter().map(|&x| g.map[x]).collect())
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.dst.size];
        for &y in &self.map {
            hit[y] = true;
        }
        hit.iter().all(|h| *h)
    }

    /// Injective and relation-reflecting.
    pub fn is_embedding(&self) -> bool {
        let injective = (0..self.map.len()).all(|x| (0..x).all(|y| self.map[x] != self.map[y]));
        injective && kernel(self) == self.src.zero_cong()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_embedding() && self.is_surjective()
    }

    /// Image of a tuple index of source relation `r`, as a tuple.
    fn image_tuple(&self, r: usize, idx: usize) -> Vec<usize> {
        let k = self.src.lang.rels[r].1;
        tuple_of(idx, k, self.src.size).iter().map(|&x| self.map[x]).collect()
    }

    /// For surjective `p: A → C` and `self: A → B` with Ker p ≤ Ker self, the g: C → B with self = g ∘ p.
    pub fn factor_through(&self, p: &Hom) -> Option<Hom> {
        if p.src != self.src || !p.is_surjective() {
            return None;
        }
        let mut g = vec![usize::MAX; p.dst.size];
        for x in 0..self.src.size {
            let slot = &mut g[p.map[x]];
            if *slot == usize::MAX {
                *slot = self.map[x];
            } else if *slot != self.map[x] {
                return None;
            }
        }
        Hom::new(&p.dst, &self.dst, g).ok()
    }

    pub fn parse(src_text: &str, a: &FinStructure, b: &FinStructure) -> Result<Hom> {
        for line in text::lines(src_text) {
            match line.word(0) {
                Some("src") | Some("dst") => {}
                Some("map") => {
                    let words: Vec<&str> = line.toks[1..].iter().map(|t| t.1).collect();
                    if words.len() != a.size {
                        return Err(line.err(0, format!("map needs {} images", a.size)));
                    }
                    let map = words
                        .iter()
                        .enumerate()
                        .map(|(i, w)| b.element(w).map_err(|_| line.err(i + 1, format!("unknown element `{w}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    return Hom::new(a, b, map);
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        Err(Error::input("homomorphism file has no `map` line"))
    }
}

/// Ker f: same image, and tuples whose image lies in R^B.
pub fn kernel(f: &Hom) -> Congruence {
    res(f, &f.dst.zero_cong())
}

/// (Res f)(β): pairs with β-related images, tuples whose images lie in R_β.
pub fn res(f: &Hom, beta: &Congruence) -> Congruence {
    let a = &f.src;
    let n = a.size;
    let mut part = vec![0; n];
    for x in 0..n {
        part[x] = (0..=x).find(|&y| beta.related(f.map[x], f.map[y])).unwrap_or(x);
    }
    let rels = (0..a.lang.rels.len())
        .map(|r| {
            (0..a.rels[r].len())
                .map(|idx| beta.contains_tuple(f.rel_map[r], &f.image_tuple(r, idx)))
                .collect()
        })
        .collect();
    Congruence { part, rels }
}

/// Image of a congruence under a surjective homomorphism `p` whose kernel lies below it (β ↦ β/α).
pub fn push_forward(p: &Hom, beta: &Congruence) -> Congruence {
    let c = &p.dst;
    let n = c.size;
    let mut rep = vec![usize::MAX; n];
    for x in 0..p.src.size {
        if rep[p.map[x]] == usize::MAX {
            rep[p.map[x]] = x;
        }
    }
    let mut part = vec![0; n];
    for u in 0..n {
        part[u] = (0..=u).find(|&v| beta.related(rep[u], rep[v])).unwrap_or(u);
    }
    let rels = c
        .lang
        .rels
        .iter()
        .map(|(name, k)| {
            let r = p.src.lang.rel_index(name).expect("same language");
            (0..pow(n, *k).unwrap_or(0))
                .map(|idx| {
                    let t: Vec<usize> = tuple_of(idx, *k, n).iter().map(|&u| rep[u]).collect();
                    beta.contains_tuple(r, &t)
                })
                .collect()
        })
        .collect();
    Congruence { part, rels }
}

/// A/θ with its canonical projection. Classes are numbered by their least element.
pub fn quotient(a: &FinStructure, theta: &Congruence) -> Result<(FinStructure, Hom)> {
    a.check_congruence(theta)?;
    let n = a.size;
    let reps: Vec<usize> = (0..n).filter(|&x| theta.part[x] == x).collect();
    let m = reps.len();
    let mut block = vec![0; n];
    for x in 0..n {
        block[x] = reps.iter().position(|&r| r == theta.part[x]).expect("canonical partition");
    }
    let names: Vec<String> = reps
        .iter()
        .map(|&r| {
            let members: Vec<&str> = (0..n).filter(|&x| theta.part[x] == r).map(|x| a.name(x)).collect();
            if members.len() == 1 {
                members[0].to_string()
            } else {
                format!("[{}]", members.join(","))
            }
        })
        .collect();
    let consts = a.consts.iter().map(|&c| block[c]).collect();
    let mut ops = Vec::new();
    for (i, &(_, k)) in a.lang.ops.iter().enumerate() {
        let size = pow(m, k)?;
        ops.push(
            (0..size)
                .map(|idx| {
                    let t: Vec<usize> = tuple_of(idx, k, m).iter().map(|&b| reps[b]).collect();
                    block[a.op(i, &t)]
                })
                .collect(),
        );
    }
    let mut rels = Vec::new();
    for (r, &(_, k)) in a.lang.rels.iter().enumerate() {
        rels.push(
            (0..pow(m, k)?)
                .map(|idx| {
                    let t: Vec<usize> = tuple_of(idx, k, m).iter().map(|&b| reps[b]).collect();
                    theta.contains_tuple(r, &t)
                })
                .collect(),
        );
    }
    let q = FinStructure::new(a.lang.clone(), names, consts, ops, rels)?;
    let pi = Hom::new(a, &q, block)?;
    Ok((q, pi))
}

/// A term in Polish notation; `Sym` with no arguments is a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Sym(String, Vec<Term>),
}

/// premises ⇒ conclusion, each an equation between terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIdentity {
    pub premises: Vec<(Term, Term)>,
    pub conclusion: (Term, Term),
    pub vars: Vec<String>,
}

enum Resolved {
    Var(usize),
    Const(usize),
    Op(usize, Vec<Resolved>),
}

impl Resolved {
    fn eval(&self, a: &FinStructure, env: &[usize]) -> usize {
        match self {
            Resolved::Var(v) => env[*v],
            Resolved::Const(c) => a.consts[*c],
            Resolved::Op(i, args) => {
                let vals: Vec<usize> = args.iter().map(|t| t.eval(a, env)).collect();
                a.op(*i, &vals)
            }
        }
    }
}

fn resolve(t: &Term, a: &FinStructure) -> Option<Resolved> {
    Some(match t {
        Term::Var(v) => Resolved::Var(*v),
        Term::Sym(name, args) if args.is_empty() && a.lang.const_index(name).is_some() => {
            Resolved::Const(a.lang.const_index(name)?)
        }
        Term::Sym(name, args) => {
            let i = a.lang.op_index(name).filter(|&i| a.lang.ops[i].1 == args.len())?;
            Resolved::Op(i, args.iter().map(|s| resolve(s, a)).collect::<Option<_>>()?)
        }
    })
}

impl QuasiIdentity {
    /// Parses `s = t`, or `s1 = t1 & s2 = t2 => s = t`; symbols are resolved in `lang`,
    /// every other token is a variable.
    pub fn parse(line: &str, lang: &Language) -> Result<QuasiIdentity> {
        let (prem, concl) = match line.split_once("=>") {
            Some((p, c)) => (Some(p), c),
            None => (None, line),
        };
        let mut vars = Vec::new();
        let eq = |src: &str, vars: &mut Vec<String>| -> Result<(Term, Term)> {
            let (l, r) = src
                .split_once('=')
                .ok_or_else(|| Error::input(format!("equation `{}` lacks `=`", src.trim())))?;
            Ok((parse_term(l, lang, vars)?, parse_term(r, lang, vars)?))
        };
        let premises = match prem {
            Some(p) => p.split('&').map(|e| eq(e, &mut vars)).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let conclusion = eq(concl, &mut vars)?;
        Ok(QuasiIdentity { premises, conclusion, vars })
    }

    /// Holds in `a` under every assignment; false when `a` lacks a symbol.
    pub fn holds(&self, a: &FinStructure) -> bool {
        let res = |(l, r): &(Term, Term)| Some((resolve(l, a)?, resolve(r, a)?));
        let Some(prem) = self.premises.iter().map(res).collect::<Option<Vec<_>>>() else {
            return false;
        };
        let Some(concl) = res(&self.conclusion) else {
            return false;
        };
        let v = self.vars.len();
        let n = a.size;
        let Some(total) = n.checked_pow(v as u32) else {
            return false;
        };
        (0..total).all(|code| {
            let env = tuple_of(code, v, n);
            !prem.iter().all(|(l, r)| l.eval(a, &env) == r.eval(a, &env)) || concl.0.eval(a, &env) == concl.1.eval(a, &env)
        })
    }
}

fn parse_term(src: &str, lang: &Language, vars: &mut Vec<String>) -> Result<Term> {
    let toks: Vec<&str> = src.split_whitespace().collect();
    let mut pos = 0;
    fn go(toks: &[&str], pos: &mut usize, lang: &Language, vars: &mut Vec<String>) -> Result<Term> {
        let w = *toks.get(*pos).ok_or_else(|| Error::input("term ends early"))?;
        *pos += 1;
        if lang.const_index(w).is_some() {
            return Ok(Term::Sym(w.into(), vec![]));
        }
        if let Some(i) = lang.op_index(w) {
            let args = (0..lang.ops[i].1).map(|_| go(toks, pos, lang, vars)).collect::<Result<_>>()?;
            return Ok(Term::Sym(w.into(), args));
        }
        let v = vars.iter().position(|x| x == w).unwrap_or_else(|| {
            vars.push(w.to_string());
            vars.len() - 1
        });
        Ok(Term::Var(v))
    }
    let t = go(&toks, &mut pos, lang, vars)?;
    if pos != toks.len() {
        return Err(Error::input(format!("trailing tokens in term `{}`", src.trim())));
    }
    Ok(t)
}

/// Membership test for a class of structures.
///
/// Closure under the class conditions (products, substructures, quotient
/// constructions) is the caller's contract; [`con_v`] spot-checks meet closure.
#[derive(Clone)]
pub enum VarietyOracle {
    All,
    Laws(Vec<QuasiIdentity>),
    Predicate(Arc<dyn Fn(&FinStructure) -> bool + Send + Sync>),
}

impl fmt::Debug for VarietyOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarietyOracle::All => write!(f, "All"),
            VarietyOracle::Laws(l) => write!(f, "Laws({})", l.len()),
            VarietyOracle::Predicate(_) => write!(f, "Predicate"),
        }
    }
}

const LATTICE_LAWS: &str = "join x y = join y x
meet x y = meet y x
join x join y z = join join x y z
meet x meet y z = meet meet x y z
join x meet x y = x
meet x join x y = x";

impl VarietyOracle {
    pub fn lattices() -> VarietyOracle {
        VarietyOracle::parse(LATTICE_LAWS, &Language::lattice()).expect("built-in laws")
    }

    pub fn distributive_lattices() -> VarietyOracle {
        let src = format!("{LATTICE_LAWS}\nmeet x join y z = join meet x y meet x z");
        VarietyOracle::parse(&src, &Language::lattice()).expect("built-in laws")
    }

    /// One quasi-identity per non-comment line.
    pub fn parse(src: &str, lang: &Language) -> Result<VarietyOracle> {
        let mut laws = Vec::new();
        for line in text::lines(src) {
            let body: Vec<&str> = line.toks.iter().map(|t| t.1).collect();
            laws.push(QuasiIdentity::parse(&body.join(" "), lang).map_err(|e| line.err(0, e.to_string()))?);
        }
        Ok(VarietyOracle::Laws(laws))
    }

    pub fn accepts(&self, a: &FinStructure) -> bool {
        match self {
            VarietyOracle::All => true,
            VarietyOracle::Laws(l) => l.iter().all(|q| q.holds(a)),
            VarietyOracle::Predicate(p) => p(a),
        }
    }
}

/// Con^V A with its induced order.
#[derive(Clone, Debug)]
pub struct ConV {
    pub structure: FinStructure,
    pub members: Vec<Congruence>,
}

/// {θ ∈ Con A : A/θ ∈ V}; requires A ∈ V and checks meet closure.
pub fn con_v(a: &FinStructure, v: &VarietyOracle, bound: usize) -> Result<ConV> {
    if !v.accepts(a) {
        return Err(Error::domain("structure is not in V, so 𝟎_A is not a V-congruence"));
    }
    let all = con_lattice(a, bound)?;
    let members: Vec<Congruence> = match v {
        VarietyOracle::All => all.members,
        _ => {
            let keep = par::map(&all.members, |t| quotient(a, t).map(|(q, _)| v.accepts(&q)).unwrap_or(false));
            all.members.into_iter().zip(keep).filter(|e| e.1).map(|e| e.0).collect()
        }
    };
    let found: BTreeSet<&Congruence> = members.iter().collect();
    for (i, x) in members.iter().enumerate() {
        for y in &members[i + 1..] {
            if !found.contains(&a.meet(x, y)) {
                return Err(Error::domain(format!(
                    "oracle is not closed under meets: {} ∧ {} is missing",
                    x.describe(a),
                    y.describe(a)
                )));
            }
        }
    }
    Ok(ConV { structure: a.clone(), members })
}

/// What a principal congruence is generated by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Seed {
    Pair(usize, usize),
    Tuple(usize, Vec<usize>),
}

impl ConV {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, c: &Congruence) -> Option<usize> {
        self.members.binary_search(c).ok()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.members[i].leq(&self.members[j])
    }

    /// Meet of the members satisfying `pred`, if any.
    fn meet_of(&self, pred: impl Fn(&Congruence) -> bool) -> Option<usize> {
        let a = &self.structure;
        let m = self.members.iter().filter(|c| pred(c)).fold(None, |acc: Option<Congruence>, c| {
            Some(match acc {
                None => c.clone(),
                Some(x) => a.meet(&x, c),
            })
        })?;
        self.index_of(&m)
    }

    pub fn bottom(&self) -> usize {
        self.meet_of(|_| true).expect("Con^V A contains 𝟎_A")
    }

    /// Least member above both.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let (x, y) = (&self.members[i], &self.members[j]);
        self.meet_of(|c| x.leq(c) && y.leq(c))
    }

    pub fn principal(&self, seed: &Seed) -> Result<usize> {
        let n = self.structure.size;
        match seed {
            Seed::Pair(x, y) if *x >= n || *y >= n => return Err(Error::input("pair outside the universe")),
            Seed::Tuple(r, t)
                if *r >= self.structure.lang.rels.len()
                    || t.len() != self.structure.lang.rels[*r].1
                    || t.iter().any(|&x| x >= n) =>
            {
                return Err(Error::input("tuple does not fit the relation"))
            }
            _ => {}
        }
        self.meet_of(|c| match seed {
            Seed::Pair(x, y) => c.related(*x, *y),
            Seed::Tuple(r, t) => c.contains_tuple(*r, t),
        })
        .ok_or_else(|| Error::domain("no V-congruence contains the seed"))
    }

    /// Con_c^V A as a join-semilattice monoid (all members are compact at finite size).
    pub fn monoid(&self) -> Result<FinCommMonoid> {
        let m = self.len();
        let mut add = vec![0; m * m];
        for i in 0..m {
            for j in 0..m {
                add[i * m + j] = self.join(i, j).ok_or_else(|| Error::domain("Con^V A has no join for a pair"))?;
            }
        }
        FinCommMonoid::new((0..m).map(|i| format!("c{i}")).collect(), add, self.bottom())
    }
}

/// ⟨seed⟩ in Con^V A.
pub fn principal_vcong(a: &FinStructure, v: &VarietyOracle, seed: &Seed, bound: usize) -> Result<Congruence> {
    let cv = con_v(a, v, bound)?;
    let i = cv.principal(seed)?;
    Ok(cv.members[i].clone())
}

/// Con^V f as a map between member indices: the left adjoint of Res f.
#[derive(Clone, Debug)]
pub struct ConVMap {
    pub src: ConV,
    pub dst: ConV,
    pub map: Vec<usize>,
}

impl ConVMap {
    pub fn hom(&self) -> Result<MonoidHom> {
        MonoidHom::new(&self.src.monoid()?, &self.dst.monoid()?, self.map.clone())
    }
}

pub fn concv_map(f: &Hom, v: &VarietyOracle, bound: usize) -> Result<ConVMap> {
    let src = con_v(&f.src, v, bound)?;
    let dst = con_v(&f.dst, v, bound)?;
    let restricted: Vec<Congruence> = par::map(&dst.members, |b| res(f, b));
    let map = src
        .members
        .iter()
        .map(|alpha| {
            dst.meet_of_indices((0..dst.len()).filter(|&j| alpha.leq(&restricted[j])))
                .ok_or_else(|| Error::domain("no V-congruence of the target lies above the image"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConVMap { src, dst, map })
}

impl ConV {
    fn meet_of_indices(&self, idx: impl Iterator<Item = usize>) -> Option<usize> {
        let chosen: BTreeSet<usize> = idx.collect();
        self.meet_of(|c| chosen.iter().any(|&j| &self.members[j] == c))
    }
}

/// A finite commutative monoid given by its addition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCommMonoid {
    names: Vec<String>,
    add: Vec<usize>,
    zero: usize,
}

impl FinCommMonoid {
    pub fn new(names: Vec<String>, add: Vec<usize>, zero: usize) -> Result<FinCommMonoid> {
        let n = names.len();
        if n == 0 || add.len() != n * n || zero >= n || add.iter().any(|&v| v >= n) {
            return Err(Error::input("monoid table does not match its carrier"));
        }
        let m = FinCommMonoid { names, add, zero };
        for x in 0..n {
            if m.sum(zero, x) != x {
                return Err(Error::domain(format!("`{}` is not neutral", m.names[zero])));
            }
            for y in 0..n {
                if m.sum(x, y) != m.sum(y, x) {
                    return Err(Error::domain("addition is not commutative"));
                }
                for z in 0..n {
                    if m.sum(m.sum(x, y), z) != m.sum(x, m.sum(y, z)) {
                        return Err(Error::domain("addition is not associative"));
                    }
                }
            }
        }
        Ok(m)
    }

    /// The join-semilattice of a finite lattice with zero.
    pub fn join_semilattice(p: &Poset) -> Result<FinCommMonoid> {
        let n = p.len();
        let zero = p.least().ok_or_else(|| Error::domain("semilattice needs a least element"))?;
        let mut add = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                add[a * n + b] = p.join(a, b).ok_or_else(|| Error::domain("poset is not a join-semilattice"))?;
            }
        }
        FinCommMonoid::new(p.labels().to_vec(), add, zero)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn with_names(&self, names: Vec<String>) -> Result<FinCommMonoid> {
        FinCommMonoid::new(names, self.add.clone(), self.zero)
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn sum(&self, x: usize, y: usize) -> usize {
        self.add[x * self.len() + y]
    }

    /// Algebraic preorder: x ≤ y iff x + z = y for some z.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        (0..self.len()).any(|z| self.sum(x, z) == y)
    }

    pub fn is_conical(&self) -> bool {
        (0..self.len()).all(|x| (0..self.len()).all(|y| self.sum(x, y) != self.zero || (x == self.zero && y == self.zero)))
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.len()).all(|x| self.sum(x, x) == x)
    }

    /// x + y ∈ I iff x, y ∈ I; the error names a witness.
    pub fn check_o_ideal(&self, ideal: &[usize]) -> Result<()> {
        if ideal.is_empty() {
            return Err(Error::input("o-ideals are nonempty"));
        }
        for x in 0..self.len() {
            for y in 0..self.len() {
                let both = ideal.contains(&x) && ideal.contains(&y);
                if both != ideal.contains(&self.sum(x, y)) {
                    return Err(Error::input(format!(
                        "not an o-ideal: {} + {} = {}",
                        self.names[x],
                        self.names[y],
                        self.names[self.sum(x, y)]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoidHom {
    pub src: FinCommMonoid,
    pub dst: FinCommMonoid,
    pub map: Vec<usize>,
}

impl MonoidHom {
    pub fn new(src: &FinCommMonoid, dst: &FinCommMonoid, map: Vec<usize>) -> Result<MonoidHom> {
        if map.len() != src.len() || map.iter().any(|&v| v >= dst.len()) {
            return Err(Error::input("map does not match the monoids"));
        }
        if map[src.zero] != dst.zero {
            return Err(Error::input("map does not preserve 0"));
        }
        for x in 0..src.len() {
            for y in 0..src.len() {
                if map[src.sum(x, y)] != dst.sum(map[x], map[y]) {
                    return Err(Error::input("map does not preserve addition"));
                }
            }
        }
        Ok(MonoidHom { src: src.clone(), dst: dst.clone(), map })
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &MonoidHom) -> Result<MonoidHom> {
        if g.src != self.dst {
            return Err(Error::input("monoid homomorphisms are not composable"));
        }
        MonoidHom::new(&self.src, &g.dst, self.map.iter().map(|&x| g.map[x]).collect())
    }

    pub fn is_surjective(&self) -> bool {
        (0..self.dst.len()).all(|y| self.map.contains(&y))
    }

    pub fn is_bijective(&self) -> bool {
        self.is_surjective() && self.src.len() == self.dst.len()
    }
}

/// M/I by x ≡_I y iff x + u = y + v for some u, v ∈ I.
pub fn o_ideal_quotient(m: &FinCommMonoid, ideal: &[usize]) -> Result<(FinCommMonoid, MonoidHom)> {
    m.check_o_ideal(ideal)?;
    let n = m.len();
    let equiv = |x: usize, y: usize| ideal.iter().any(|&u| ideal.iter().any(|&v| m.sum(x, u) == m.sum(y, v)));
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if let Some(c) = reps.iter().position(|&r| equiv(r, x)) {
            class[x] = c;
        } else {
            class[x] = reps.len();
            reps.push(x);
        }
    }
    let k = reps.len();
    let mut add = vec![0; k * k];
    for a in 0..k {
        for b in 0..k {
            add[a * k + b] = class[m.sum(reps[a], reps[b])];
        }
    }
    let names = reps
        .iter()
        .map(|&r| {
            let members: Vec<&str> = (0..n).filter(|&x| class[x] == class[r]).map(|x| m.names[x].as_str()).collect();
            if members.len() == 1 {
                members[0].to_string()
            } else {
                format!("[{}]", members.join(","))
            }
        })
        .collect();
    let q = FinCommMonoid::new(names, add, class[m.zero])?;
    let pi = MonoidHom::new(m, &q, class)?;
    Ok((q, pi))
}

/// Surjective, and φ(x) = φ(y) implies x + u = y + v for some u, v ∈ φ⁻¹(0).
pub fn is_ideal_induced(phi: &MonoidHom) -> bool {
    let m = &phi.src;
    let zeros: Vec<usize> = (0..m.len()).filter(|&x| phi.map[x] == phi.dst.zero).collect();
    phi.is_surjective()
        && (0..m.len()).all(|x| {
            (0..m.len()).all(|y| {
                phi.map[x] != phi.map[y]
                    || zeros.iter().any(|&u| zeros.iter().any(|&v| m.sum(x, u) == m.sum(y, v)))
            })
        })
}

/// φ(z) ≤ u + v implies z ≤ x + y with φ(x) ≤ u, φ(y) ≤ v for some x, y.
pub fn is_weakly_distributive(phi: &MonoidHom) -> bool {
    let (m, s) = (&phi.src, &phi.dst);
    (0..m.len()).all(|z| {
        (0..s.len()).all(|u| {
            (0..s.len()).all(|v| {
                !s.leq(phi.map[z], s.sum(u, v))
                    || (0..m.len()).any(|x| {
                        s.leq(phi.map[x], u)
                            && (0..m.len()).any(|y| s.leq(phi.map[y], v) && m.leq(z, m.sum(x, y)))
                    })
            })
        })
    })
}

/// A projectability witness (a: A ↠ Ā, ε: Con_c^V Ā ≅ S) for φ: Con_c^V A → S.
#[derive(Clone, Debug)]
pub struct ProjWitness {
    pub theta: Congruence,
    pub proj: Hom,
    pub conv_bar: ConV,
    pub eps: MonoidHom,
}

/// Builds the witness with θ the join of all α such that φ(α) = 0; `phi.src`
/// must be `cv.monoid()`.
pub fn projectability_witness(cv: &ConV, v: &VarietyOracle, phi: &MonoidHom, bound: usize) -> Result<ProjWitness> {
    if phi.src != cv.monoid()? {
        return Err(Error::input("φ is not defined on Con_c^V A"));
    }
    if !is_ideal_induced(phi) {
        return Err(Error::domain("φ is not ideal-induced"));
    }
    let a = &cv.structure;
    let mut theta = cv.bottom();
    for i in 0..cv.len() {
        if phi.map[i] == phi.dst.zero {
            theta = cv.join(theta, i).ok_or_else(|| Error::domain("Con^V A lacks a join"))?;
        }
    }
    let theta_c = cv.members[theta].clone();
    let (abar, proj) = quotient(a, &theta_c)?;
    if !v.accepts(&abar) {
        return Err(Error::domain("A/θ is not in V"));
    }
    let cm = concv_map(&proj, v, bound)?;
    let mut eps = vec![usize::MAX; cm.dst.len()];
    for (alpha, &gamma) in cm.map.iter().enumerate() {
        if eps[gamma] == usize::MAX {
            eps[gamma] = phi.map[alpha];
        } else if eps[gamma] != phi.map[alpha] {
            return Err(Error::domain("φ does not factor through Con^V of the projection"));
        }
    }
    if eps.contains(&usize::MAX) {
        return Err(Error::domain("Con^V of the projection is not surjective"));
    }
    let eps = MonoidHom::new(&cm.dst.monoid()?, &phi.dst, eps)?;
    if !eps.is_bijective() {
        return Err(Error::domain("ε is not an isomorphism"));
    }
    Ok(ProjWitness { theta: theta_c, proj, conv_bar: cm.dst, eps })
}

impl ProjWitness {
    /// Clause (iv): given f: A → X and η: Con_c^V Ā → Con_c^V X with
    /// Con f = η ∘ Con a, returns g: Ā → X with f = g ∘ a and η = Con g.
    pub fn factor(&self, f: &Hom, eta: &MonoidHom, v: &VarietyOracle, bound: usize) -> Result<Hom> {
        let conf = concv_map(f, v, bound)?;
        let cona = concv_map(&self.proj, v, bound)?;
        let composite: Vec<usize> = cona.map.iter().map(|&g| eta.map[g]).collect();
        if conf.map != composite {
            return Err(Error::input("Con f ≠ η ∘ Con a"));
        }
        let g = f.factor_through(&self.proj).ok_or_else(|| Error::domain("f does not factor through a"))?;
        let cong = concv_map(&g, v, bound)?;
        if cong.map != eta.map {
            return Err(Error::domain("η ≠ Con g"));
        }
        Ok(g)
    }
}
