//! Finite rings, principal right ideals, and the lattice L(R).
//!
//! Rings are associative and need not have a unit. Elements are indices
//! into the carrier; right ideals are sorted element sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::par;
use crate::poset::Poset;
use crate::structures::FinStructure;

/// Largest carrier accepted by the constructors.
pub const DEFAULT_RING_BOUND: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinRing {
    names: Vec<String>,
    add: Vec<usize>,
    mul: Vec<usize>,
    zero: usize,
    neg: Vec<usize>,
}

impl FinRing {
    pub fn new(names: Vec<String>, add: Vec<usize>, mul: Vec<usize>) -> Result<FinRing> {
        let n = names.len();
        if n == 0 || add.len() != n * n || mul.len() != n * n || add.iter().chain(&mul).any(|&v| v >= n) {
            return Err(Error::input("ring tables do not match the carrier"));
        }
        if n > DEFAULT_RING_BOUND {
            return Err(Error::Size(format!("ring has {n} elements, bound is {DEFAULT_RING_BOUND}")));
        }
        let zero = (0..n)
            .find(|&z| (0..n).all(|x| add[z * n + x] == x))
            .ok_or_else(|| Error::domain("addition has no neutral element"))?;
        let neg = (0..n)
            .map(|x| (0..n).find(|&y| add[x * n + y] == zero).ok_or_else(|| Error::domain(format!("`{}` has no negative", names[x]))))
            .collect::<Result<Vec<_>>>()?;
        let r = FinRing { names, add, mul, zero, neg };
        let bad = par::range_map(n, |x| {
            for y in 0..n {
                if r.add(x, y) != r.add(y, x) {
                    return Some("addition is not commutative");
                }
                for z in 0..n {
                    if r.add(r.add(x, y), z) != r.add(x, r.add(y, z)) {
                        return Some("addition is not associative");
                    }
                    if r.mul(r.mul(x, y), z) != r.mul(x, r.mul(y, z)) {
                        return Some("multiplication is not associative");
                    }
                    if r.mul(x, r.add(y, z)) != r.add(r.mul(x, y), r.mul(x, z))
                        || r.mul(r.add(y, z), x) != r.add(r.mul(y, x), r.mul(z, x))
                    {
                        return Some("multiplication does not distribute over addition");
                    }
                }
            }
            None
        });
        if let Some(msg) = bad.into_iter().flatten().next() {
            return Err(Error::domain(msg));
        }
        Ok(r)
    }

    /// GF(p) for a prime p.
    pub fn gf(p: usize) -> Result<FinRing> {
        if p < 2 || (2..p).any(|d| p % d == 0) {
            return Err(Error::input(format!("{p} is not a prime")));
        }
        if p > DEFAULT_RING_BOUND {
            return Err(Error::Size(format!("GF({p}) exceeds the ring bound {DEFAULT_RING_BOUND}")));
        }
        let names = (0..p).map(|x| x.to_string()).collect();
        let add = (0..p * p).map(|i| (i / p + i % p) % p).collect();
        let mul = (0..p * p).map(|i| (i / p) * (i % p) % p).collect();
        FinRing::new(names, add, mul)
    }

    /// n×n matrices over GF(p), entries stored row-major in base p.
    pub fn matrix(n: usize, p: usize) -> Result<FinRing> {
        FinRing::gf(p)?;
        if n == 0 {
            return Err(Error::input("matrix size must be positive"));
        }
        let size = (p as f64).powi((n * n) as i32);
        if size > DEFAULT_RING_BOUND as f64 {
            return Err(Error::Size(format!("M{n}(GF({p})) has {size} elements, bound is {DEFAULT_RING_BOUND}")));
        }
        let size = size as usize;
        let k = n * n;
        let digits = |mut x: usize| -> Vec<usize> {
            let mut d = vec![0; k];
            for slot in d.iter_mut() {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let encode = |d: &[usize]| d.iter().rev().fold(0, |acc, &v| acc * p + v);
        let mats: Vec<Vec<usize>> = (0..size).map(digits).collect();
        let names = mats
            .iter()
            .map(|m| {
                let sep = if p > 10 { "," } else { "" };
                let rows: Vec<String> =
                    (0..n).map(|i| (0..n).map(|j| m[i * n + j].to_string()).collect::<Vec<_>>().join(sep)).collect();
                format!("[{}]", rows.join(";"))
            })
            .collect();
        let mut add = vec![0; size * size];
        let mut mul = vec![0; size * size];
        for a in 0..size {
            for b in 0..size {
                let (x, y) = (&mats[a], &mats[b]);
                let s: Vec<usize> = (0..k).map(|i| (x[i] + y[i]) % p).collect();
                let m: Vec<usize> = (0..k)
                    .map(|ij| {
                        let (i, j) = (ij / n, ij % n);
                        (0..n).map(|l| x[i * n + l] * y[l * n + j]).sum::<usize>() % p
                    })
                    .collect();
                add[a * size + b] = encode(&s);
                mul[a * size + b] = encode(&m);
            }
        }
        FinRing::new(names, add, mul)
    }

    pub fn product(a: &FinRing, b: &FinRing) -> Result<FinRing> {
        let (n, m) = (a.len(), b.len());
        if n * m > DEFAULT_RING_BOUND {
            return Err(Error::Size(format!("product has {} elements, bound is {DEFAULT_RING_BOUND}", n * m)));
        }
        let size = n * m;
        let names = (0..size).map(|i| format!("({},{})", a.names[i / m], b.names[i % m])).collect();
        let op = |f: &dyn Fn(usize, usize) -> (usize, usize)| -> Vec<usize> {
            (0..size * size)
                .map(|k| {
                    let (x, y) = (k / size, k % size);
                    let (p, q) = f(x, y);
                    p * m + q
                })
                .collect()
        };
        let add = op(&|x, y| (a.add(x / m, y / m), b.add(x % m, y % m)));
        let mul = op(&|x, y| (a.mul(x / m, y / m), b.mul(x % m, y % m)));
        FinRing::new(names, add, mul)
    }

    /// A structure file with operations `add/2` and `mul/2`.
    pub fn from_structure(s: &FinStructure) -> Result<FinRing> {
        let lang = s.lang();
        let a = lang.op_index("add").filter(|&i| lang.ops[i].1 == 2);
        let m = lang.op_index("mul").filter(|&i| lang.ops[i].1 == 2);
        let (a, m) = a.zip(m).ok_or_else(|| Error::input("ring tables need `op add/2` and `op mul/2`"))?;
        FinRing::new(s.names().to_vec(), s.op_table(a).to_vec(), s.op_table(m).to_vec())
    }

    /// `gf p`, `mat n gf p`, `prod <spec> <spec>`, or `table <file>`.
    pub fn from_spec(spec: &str, load: &dyn Fn(&str) -> Result<String>) -> Result<FinRing> {
        let toks: Vec<&str> = spec.split_whitespace().collect();
        let mut pos = 0;
        let r = spec_ring(&toks, &mut pos, load)?;
        if pos != toks.len() {
            return Err(Error::input(format!("unexpected `{}` in ring spec", toks[pos])));
        }
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let n = self.len();
        let mut out = format!("sort {n}\nnames {}\n", self.names.join(" "));
        for (name, t) in [("add", &self.add), ("mul", &self.mul)] {
            out.push_str(&format!("op {name}/2\n"));
            for a in 0..n {
                let row: Vec<&str> = (0..n).map(|b| self.names[t[a * n + b]].as_str()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
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

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|x| x == name).ok_or_else(|| Error::input(format!("unknown ring element `{name}`")))
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.len() + y]
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.len() + y]
    }

    pub fn neg(&self, x: usize) -> usize {
        self.neg[x]
    }

    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg[y])
    }

    pub fn unit(&self) -> Option<usize> {
        (0..self.len()).find(|&e| (0..self.len()).all(|x| self.mul(e, x) == x && self.mul(x, e) == x))
    }

    pub fn is_idempotent(&self, x: usize) -> bool {
        self.mul(x, x) == x
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.is_idempotent(x)).collect()
    }

    /// Some b with aba = a.
    pub fn quasi_inverse(&self, a: usize) -> Option<usize> {
        (0..self.len()).find(|&b| self.mul(self.mul(a, b), a) == a)
    }

    /// An element without quasi-inverse, if any.
    pub fn non_regular_witness(&self) -> Option<usize> {
        par::range_map(self.len(), |a| self.quasi_inverse(a).is_none()).iter().position(|&bad| bad)
    }

    pub fn is_regular(&self) -> bool {
        self.non_regular_witness().is_none()
    }

    fn require_regular(&self) -> Result<()> {
        match self.non_regular_witness() {
            Some(a) => Err(Error::domain(format!("ring is not regular: `{}` has no quasi-inverse", self.names[a]))),
            None => Ok(()),
        }
    }

    /// xR = {xr : r ∈ R}.
    pub fn right_multiples(&self, x: usize) -> Vec<usize> {
        let s: BTreeSet<usize> = (0..self.len()).map(|r| self.mul(x, r)).collect();
        s.into_iter().collect()
    }

    /// Idempotent e with eR = xR, namely x·x' for a quasi-inverse x'.
    pub fn idempotent_generator(&self, x: usize) -> Result<usize> {
        let q = self.quasi_inverse(x).ok_or_else(|| Error::domain(format!("`{}` has no quasi-inverse", self.names[x])))?;
        Ok(self.mul(x, q))
    }

    /// Additive span of X ∪ RX ∪ XR ∪ RXR.
    pub fn ideal_generated(&self, xs: &[usize]) -> Vec<usize> {
        let n = self.len();
        let mut seed: BTreeSet<usize> = BTreeSet::from([self.zero]);
        for &x in xs {
            seed.insert(x);
            for r in 0..n {
                seed.insert(self.mul(r, x));
                seed.insert(self.mul(x, r));
                for s in 0..n {
                    seed.insert(self.mul(self.mul(r, x), s));
                }
            }
        }
        self.additive_closure(seed)
    }

    fn additive_closure(&self, seed: BTreeSet<usize>) -> Vec<usize> {
        let mut have = vec![false; self.len()];
        let mut stack: Vec<usize> = seed.into_iter().collect();
        let mut members = Vec::new();
        while let Some(x) = stack.pop() {
            if have[x] {
                continue;
            }
            have[x] = true;
            members.push(x);
            for &y in &members.clone() {
                let s = self.add(x, y);
                if !have[s] {
                    stack.push(s);
                }
            }
        }
        (0..self.len()).filter(|&x| have[x]).collect()
    }

    pub fn is_two_sided_ideal(&self, set: &[usize]) -> bool {
        let n = self.len();
        set.contains(&self.zero)
            && set.iter().all(|&x| {
                set.iter().all(|&y| set.contains(&self.sub(x, y)))
                    && (0..n).all(|r| set.contains(&self.mul(r, x)) && set.contains(&self.mul(x, r)))
            })
    }

    /// All two-sided ideals, as sums of principal ones, sorted by size then content.
    pub fn two_sided_ideals(&self) -> Vec<Vec<usize>> {
        let principal: BTreeSet<Vec<usize>> = par::range_map(self.len(), |x| self.ideal_generated(&[x])).into_iter().collect();
        let mut all: BTreeSet<Vec<usize>> = principal.clone();
        loop {
            let mut next = all.clone();
            for a in &all {
                for b in &principal {
                    let seed: BTreeSet<usize> = a.iter().chain(b).copied().collect();
                    next.insert(self.additive_closure(seed));
                }
            }
            if next.len() == all.len() {
                break;
            }
            all = next;
        }
        let mut v: Vec<Vec<usize>> = all.into_iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        v
    }

    /// R/I with the projection, classes named `x+I` after their least member.
    pub fn quotient(&self, ideal: &[usize]) -> Result<(FinRing, Vec<usize>)> {
        if !self.is_two_sided_ideal(ideal) {
            return Err(Error::input("not a two-sided ideal"));
        }
        let n = self.len();
        let mut class = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if class[x] != usize::MAX {
                continue;
            }
            for &i in ideal {
                class[self.add(x, i)] = reps.len();
            }
            reps.push(x);
        }
        let k = reps.len();
        let names = reps
            .iter()
            .map(|&r| if k == n { self.names[r].clone() } else { format!("{}+I", self.names[r]) })
            .collect();
        let table = |f: &dyn Fn(usize, usize) -> usize| (0..k * k).map(|i| class[f(reps[i / k], reps[i % k])]).collect();
        let add = table(&|x, y| self.add(x, y));
        let mul = table(&|x, y| self.mul(x, y));
        Ok((FinRing::new(names, add, mul)?, class))
    }
}

fn spec_ring(toks: &[&str], pos: &mut usize, load: &dyn Fn(&str) -> Result<String>) -> Result<FinRing> {
    let next = |pos: &mut usize, what: &str| -> Result<String> {
        let t = toks.get(*pos).ok_or_else(|| Error::input(format!("ring spec ends early, expected {what}")))?;
        *pos += 1;
        Ok(t.to_string())
    };
    let num = |pos: &mut usize, what: &str| -> Result<usize> {
        let t = next(pos, what)?;
        t.parse().map_err(|_| Error::input(format!("expected {what}, found `{t}`")))
    };
    match next(pos, "`gf`, `mat`, `prod` or `table`")?.as_str() {
        "gf" => FinRing::gf(num(pos, "a prime")?),
        "mat" => {
            let n = num(pos, "a matrix size")?;
            let kw = next(pos, "`gf`")?;
            if kw != "gf" {
                return Err(Error::input(format!("expected `gf`, found `{kw}`")));
            }
            FinRing::matrix(n, num(pos, "a prime")?)
        }
        "prod" => {
            let a = spec_ring(toks, pos, load)?;
            let b = spec_ring(toks, pos, load)?;
            FinRing::product(&a, &b)
        }
        "table" => {
            let path = next(pos, "a file name")?;
            FinRing::from_structure(&FinStructure::parse(&load(&path)?)?)
        }
        w => Err(Error::input(format!("unknown ring constructor `{w}`"))),
    }
}

/// A principal right ideal with an idempotent generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightIdeal {
    pub members: Vec<usize>,
    pub gen: usize,
}

/// L(R) ordered by containment, smallest first.
#[derive(Clone, Debug)]
pub struct LatticeL {
    pub ring: FinRing,
    pub members: Vec<RightIdeal>,
}

pub fn lattice_l(r: &FinRing) -> Result<LatticeL> {
    r.require_regular()?;
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut members = Vec::new();
    for e in r.idempotents() {
        let m = r.right_multiples(e);
        if seen.insert(m.clone()) {
            members.push(RightIdeal { members: m, gen: e });
        }
    }
    members.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members)));
    let l = LatticeL { ring: r.clone(), members };
    for x in 0..r.len() {
        if l.index_of(&r.right_multiples(x)).is_none() {
            return Err(Error::domain(format!("`{}`R is not generated by an idempotent", r.name(x))));
        }
    }
    l.check_sectionally_complemented_modular()?;
    Ok(l)
}

fn contains(big: &[usize], small: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

impl LatticeL {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn index_of(&self, set: &[usize]) -> Option<usize> {
        self.members.iter().position(|m| m.members == set)
    }

    /// Index of xR.
    pub fn of(&self, x: usize) -> usize {
        self.index_of(&self.ring.right_multiples(x)).expect("every xR is in L(R)")
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        contains(&self.members[j].members, &self.members[i].members)
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.len() - 1
    }

    /// Index of the set-level sum X + Y.
    pub fn join(&self, i: usize, j: usize) -> usize {
        let r = &self.ring;
        let s: BTreeSet<usize> = self.members[i]
            .members
            .iter()
            .flat_map(|&x| self.members[j].members.iter().map(move |&y| r.add(x, y)))
            .collect();
        self.index_of(&s.into_iter().collect::<Vec<_>>()).expect("L(R) is closed under sums")
    }

    /// Index of the set-level intersection X ∩ Y.
    pub fn meet(&self, i: usize, j: usize) -> usize {
        let s: Vec<usize> = self.members[i].members.iter().copied().filter(|x| self.members[j].members.binary_search(x).is_ok()).collect();
        self.index_of(&s).expect("L(R) is closed under intersections")
    }

    fn check_sectionally_complemented_modular(&self) -> Result<()> {
        let n = self.len();
        let sums = |i: usize, j: usize| -> Option<usize> {
            let r = &self.ring;
            let s: BTreeSet<usize> = self.members[i]
                .members
                .iter()
                .flat_map(|&x| self.members[j].members.iter().map(move |&y| r.add(x, y)))
                .collect();
            self.index_of(&s.into_iter().collect::<Vec<_>>())
        };
        for i in 0..n {
            for j in 0..n {
                if sums(i, j).is_none() {
                    return Err(Error::domain("L(R) is not closed under sums"));
                }
                let m: Vec<usize> = self.members[i].members.iter().copied().filter(|x| self.members[j].members.binary_search(x).is_ok()).collect();
                if self.index_of(&m).is_none() {
                    return Err(Error::domain("L(R) is not closed under intersections"));
                }
            }
        }
        for b in 0..n {
            for a in (0..n).filter(|&a| self.leq(a, b)) {
                let ok = (0..n).any(|c| self.leq(c, b) && self.join(a, c) == b && self.meet(a, c) == 0);
                if !ok {
                    return Err(Error::domain("L(R) is not sectionally complemented"));
                }
            }
        }
        for a in 0..n {
            for c in (0..n).filter(|&c| self.leq(a, c)) {
                for b in 0..n {
                    if self.join(a, self.meet(b, c)) != self.meet(self.join(a, b), c) {
                        return Err(Error::domain("L(R) is not modular"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Labels `0` and `eR` with e the stored idempotent generator.
    pub fn poset(&self) -> Poset {
        let labels = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| if i == 0 { "0".to_string() } else { format!("{}R", self.ring.name(m.gen)) })
            .collect();
        let leq = (0..self.len()).map(|i| (0..self.len()).map(|j| self.leq(i, j)).collect()).collect();
        Poset::from_matrix(labels, leq).expect("containment is a partial order")
    }
}

/// Witnesses of aR + bR = (a+c)R and aR ∩ bR = (b−bd)R.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formulas {
    /// Idempotent generators actually used.
    pub a: usize,
    pub b: usize,
    pub u: usize,
    pub c: usize,
    pub d: usize,
    pub join: usize,
    pub meet: usize,
    pub join_matches: bool,
    pub meet_matches: bool,
}

/// Join and meet of aR and bR through the idempotent formulas; `a` and `b`
/// are first replaced by idempotent generators.
pub fn join_meet_via_formulas(l: &LatticeL, a: usize, b: usize) -> Result<Formulas> {
    let r = &l.ring;
    let (a, b) = (r.idempotent_generator(a)?, r.idempotent_generator(b)?);
    let bab = r.sub(b, r.mul(a, b));
    let u = r.quasi_inverse(bab).ok_or_else(|| Error::domain("b − ab has no quasi-inverse"))?;
    let c = r.mul(bab, u);
    let d = r.mul(u, bab);
    let join_el = r.add(a, c);
    let meet_el = r.sub(b, r.mul(b, d));
    let (ia, ib) = (l.of(a), l.of(b));
    let (join, meet) = (l.of(join_el), l.of(meet_el));
    Ok(Formulas { a, b, u, c, d, join, meet, join_matches: join == l.join(ia, ib), meet_matches: meet == l.meet(ia, ib) })
}

/// (b − ab)R, a complement of aR inside bR.
pub fn section_complement(l: &LatticeL, a: usize, b: usize) -> Result<usize> {
    let r = &l.ring;
    let (a, b) = (r.idempotent_generator(a)?, r.idempotent_generator(b)?);
    let (ia, ib) = (l.of(a), l.of(b));
    if !l.leq(ia, ib) {
        return Err(Error::input("aR is not contained in bR"));
    }
    let c = l.of(r.sub(b, r.mul(a, b)));
    if !l.leq(c, ib) || l.join(ia, c) != ib || l.meet(ia, c) != l.bottom() {
        return Err(Error::domain("(b − ab)R is not a complement of aR in bR"));
    }
    Ok(c)
}

fn require_idempotents(r: &FinRing, a: usize, b: usize) -> Result<()> {
    for x in [a, b] {
        if !r.is_idempotent(x) {
            return Err(Error::input(format!("`{}` is not idempotent", r.name(x))));
        }
    }
    Ok(())
}

/// Some x, y with a = yx and b = xy.
pub fn module_iso_witness(r: &FinRing, a: usize, b: usize) -> Result<Option<(usize, usize)>> {
    require_idempotents(r, a, b)?;
    let n = r.len();
    Ok((0..n).flat_map(|x| (0..n).map(move |y| (x, y))).find(|&(x, y)| r.mul(y, x) == a && r.mul(x, y) == b))
}

/// Mutually quasi-inverse x, y with a = yx and b = xy.
pub fn module_iso_quasi_inverse_witness(r: &FinRing, a: usize, b: usize) -> Result<Option<(usize, usize)>> {
    require_idempotents(r, a, b)?;
    let n = r.len();
    Ok((0..n).flat_map(|x| (0..n).map(move |y| (x, y))).find(|&(x, y)| {
        r.mul(y, x) == a && r.mul(x, y) == b && r.mul(r.mul(x, y), x) == x && r.mul(r.mul(y, x), y) == y
    }))
}

pub fn idempotents_module_iso(r: &FinRing, a: usize, b: usize) -> Result<bool> {
    Ok(module_iso_witness(r, a, b)?.is_some())
}

/// xR ≅ yR for members of L(R), through idempotent generators.
pub fn l_isomorphic(l: &LatticeL, i: usize, j: usize) -> bool {
    module_iso_witness(&l.ring, l.members[i].gen, l.members[j].gen).expect("stored generators are idempotent").is_some()
}

/// Id R ≅ NId L(R). Neutral ideals are stored by their greatest member.
#[derive(Clone, Debug)]
pub struct Correspondence {
    pub lattice: LatticeL,
    pub ideals: Vec<Vec<usize>>,
    pub neutral: Vec<usize>,
    /// phi[k] = index in `ideals` of {x : xR ∈ ↓neutral[k]}.
    pub phi: Vec<usize>,
    /// psi[i] = index in `neutral` of L(R)↓ideals[i].
    pub psi: Vec<usize>,
}

/// Principal lattice ideals ↓m closed under isomorphism.
pub fn neutral_ideals(l: &LatticeL) -> Vec<usize> {
    let n = l.len();
    let iso: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| l_isomorphic(l, i, j)).collect()).collect();
    (0..n)
        .filter(|&m| (0..n).filter(|&x| l.leq(x, m)).all(|x| (0..n).all(|y| !iso[x][y] || l.leq(y, m))))
        .collect()
}

pub fn neutral_ideal_correspondence(r: &FinRing) -> Result<Correspondence> {
    let l = lattice_l(r)?;
    let ideals = r.two_sided_ideals();
    let neutral = neutral_ideals(&l);
    let phi = neutral
        .iter()
        .map(|&m| {
            let set: Vec<usize> = (0..r.len()).filter(|&x| l.leq(l.of(x), m)).collect();
            ideals.iter().position(|i| *i == set).ok_or_else(|| Error::domain("φ of a neutral ideal is not a two-sided ideal"))
        })
        .collect::<Result<Vec<_>>>()?;
    let psi = ideals
        .iter()
        .map(|i| {
            let below: Vec<usize> = (0..l.len()).filter(|&k| contains(i, &l.members[k].members)).collect();
            let top = below.iter().copied().find(|&t| below.iter().all(|&k| l.leq(k, t)));
            top.and_then(|t| neutral.iter().position(|&m| m == t))
                .ok_or_else(|| Error::domain("ψ of a two-sided ideal is not a neutral ideal"))
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, &i) in phi.iter().enumerate() {
        if psi[i] != k {
            return Err(Error::domain("ψ ∘ φ is not the identity"));
        }
    }
    for (i, &k) in psi.iter().enumerate() {
        if phi[k] != i {
            return Err(Error::domain("φ ∘ ψ is not the identity"));
        }
    }
    for a in 0..neutral.len() {
        for b in 0..neutral.len() {
            let lattice_le = l.leq(neutral[a], neutral[b]);
            let ring_le = contains(&ideals[phi[b]], &ideals[phi[a]]);
            if lattice_le != ring_le {
                return Err(Error::domain("φ is not an order isomorphism"));
            }
        }
    }
    Ok(Correspondence { lattice: l, ideals, neutral, phi, psi })
}

/// L(R)/𝐈 → L(R/I) with 𝐈 = L(R)↓I.
#[derive(Clone, Debug)]
pub struct QuotientLIso {
    pub lattice: LatticeL,
    pub quotient: LatticeL,
    /// Congruence classes of L(R) modulo 𝐈, as member indices.
    pub classes: Vec<Vec<usize>>,
    /// map[c] = index in `quotient` of (x + I)(R/I) for xR in class c.
    pub map: Vec<usize>,
}

pub fn quotient_l_iso(r: &FinRing, ideal: &[usize]) -> Result<QuotientLIso> {
    let mut ideal = ideal.to_vec();
    ideal.sort_unstable();
    ideal.dedup();
    let (q, proj) = r.quotient(&ideal)?;
    let l = lattice_l(r)?;
    let lq = lattice_l(&q)?;
    let n = l.len();
    let in_i: Vec<bool> = (0..n).map(|k| contains(&ideal, &l.members[k].members)).collect();
    // X ≡ Y iff (X ∧ Y) ∨ Z = X ∨ Y for some Z in 𝐈.
    let equiv = |x: usize, y: usize| (0..n).any(|z| in_i[z] && l.join(l.meet(x, y), z) == l.join(x, y));
    let mut class = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if class[x] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&y| equiv(x, y)).collect();
        for &y in &members {
            if class[y] != usize::MAX {
                return Err(Error::domain("the relation modulo 𝐈 is not an equivalence"));
            }
            class[y] = classes.len();
        }
        classes.push(members);
    }
    for x in 0..n {
        for y in 0..n {
            if class[x] == class[y] {
                for z in 0..n {
                    if class[l.join(x, z)] != class[l.join(y, z)] || class[l.meet(x, z)] != class[l.meet(y, z)] {
                        return Err(Error::domain("the relation modulo 𝐈 is not a congruence"));
                    }
                }
            }
        }
    }
    let image = |k: usize| lq.of(proj[l.members[k].gen]);
    let mut map = Vec::new();
    for c in &classes {
        let m = image(c[0]);
        if c.iter().any(|&k| image(k) != m) {
            return Err(Error::domain("ψ is not well defined on a class"));
        }
        map.push(m);
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    if distinct.len() != map.len() || map.len() != lq.len() {
        return Err(Error::domain("ψ is not a bijection"));
    }
    for a in 0..classes.len() {
        for b in 0..classes.len() {
            let (x, y) = (classes[a][0], classes[b][0]);
            let below = class[l.join(x, y)] == b;
            if below != lq.leq(map[a], map[b]) {
                return Err(Error::domain("ψ is not an order isomorphism"));
            }
        }
    }
    Ok(QuotientLIso { lattice: l, quotient: lq, classes, map })
}

/// An idempotent e with X ⊆ eRe, built by joining left then right
/// principal ideals.
pub fn faith_utumi_corner(r: &FinRing, xs: &[usize]) -> Result<usize> {
    r.require_regular()?;
    if let Some(&x) = xs.iter().find(|&&x| x >= r.len()) {
        return Err(Error::input(format!("element index {x} outside the ring")));
    }
    let zero = r.zero();
    // Right version: idempotent g with aR + bR = gR.
    let right_join = |a: usize, b: usize| -> Result<usize> {
        let bab = r.sub(b, r.mul(a, b));
        let u = r.quasi_inverse(bab).expect("regular");
        r.idempotent_generator(r.add(a, r.mul(bab, u)))
    };
    // Same formula in the opposite ring: Ra + Rb = Rg.
    let left_join = |a: usize, b: usize| -> Result<usize> {
        let bab = r.sub(b, r.mul(b, a));
        let u = r.quasi_inverse(bab).expect("regular");
        let g = r.add(a, r.mul(u, bab));
        let q = r.quasi_inverse(g).expect("regular");
        Ok(r.mul(q, g))
    };
    let mut f = zero;
    for &x in xs {
        let q = r.quasi_inverse(x).expect("regular");
        f = left_join(f, r.mul(q, x))?;
    }
    let mut g = r.idempotent_generator(f)?;
    for &x in xs {
        g = right_join(g, r.idempotent_generator(x)?)?;
    }
    let e = r.sub(r.add(f, g), r.mul(f, g));
    if !r.is_idempotent(e) {
        return Err(Error::domain("f + g − fg is not idempotent"));
    }
    if let Some(&x) = xs.iter().find(|&&x| r.mul(r.mul(e, x), e) != x) {
        return Err(Error::domain(format!("`{}` is not in eRe", r.name(x))));
    }
    Ok(e)
}

/// The ring eRe with elements named as in R.
pub fn corner_ring(r: &FinRing, e: usize) -> Result<FinRing> {
    if !r.is_idempotent(e) {
        return Err(Error::input(format!("`{}` is not idempotent", r.name(e))));
    }
    let set: BTreeSet<usize> = (0..r.len()).map(|x| r.mul(r.mul(e, x), e)).collect();
    let elems: Vec<usize> = set.into_iter().collect();
    let k = elems.len();
    let pos = |x: usize| elems.binary_search(&x).expect("eRe is closed");
    let names = elems.iter().map(|&x| r.name(x).to_string()).collect();
    let add = (0..k * k).map(|i| pos(r.add(elems[i / k], elems[i % k]))).collect();
    let mul = (0..k * k).map(|i| pos(r.mul(elems[i / k], elems[i % k]))).collect();
    FinRing::new(names, add, mul)
}

#[derive(Clone, Debug)]
pub struct RingHom {
    pub src: FinRing,
    pub dst: FinRing,
    pub map: Vec<usize>,
}

impl RingHom {
    pub fn new(src: &FinRing, dst: &FinRing, map: Vec<usize>) -> Result<RingHom> {
        if map.len() != src.len() || map.iter().any(|&y| y >= dst.len()) {
            return Err(Error::input("map does not match the rings"));
        }
        for x in 0..src.len() {
            for y in 0..src.len() {
                if map[src.add(x, y)] != dst.add(map[x], map[y]) {
                    return Err(Error::input("map does not preserve addition"));
                }
                if map[src.mul(x, y)] != dst.mul(map[x], map[y]) {
                    return Err(Error::input("map does not preserve multiplication"));
                }
            }
        }
        Ok(RingHom { src: src.clone(), dst: dst.clone(), map })
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &RingHom) -> Result<RingHom> {
        if g.src != self.dst {
            return Err(Error::input("ring homomorphisms are not composable"));
        }
        RingHom::new(&self.src, &g.dst, self.map.iter().map(|&x| g.map[x]).collect())
    }
}

/// L(f): xR ↦ f(x)S as a map between member indices.
#[derive(Clone, Debug)]
pub struct LHom {
    pub src: LatticeL,
    pub dst: LatticeL,
    pub map: Vec<usize>,
}

pub fn l_of_hom(f: &RingHom) -> Result<LHom> {
    let src = lattice_l(&f.src)?;
    let dst = lattice_l(&f.dst)?;
    let mut map = vec![usize::MAX; src.len()];
    for x in 0..f.src.len() {
        let (i, j) = (src.of(x), dst.of(f.map[x]));
        if map[i] != usize::MAX && map[i] != j {
            return Err(Error::domain("f(x)S depends on the choice of generator of xR"));
        }
        map[i] = j;
    }
    if map[src.bottom()] != dst.bottom() {
        return Err(Error::domain("L(f) does not preserve 0"));
    }
    for a in 0..src.len() {
        for b in 0..src.len() {
            if map[src.join(a, b)] != dst.join(map[a], map[b]) || map[src.meet(a, b)] != dst.meet(map[a], map[b]) {
                return Err(Error::domain("L(f) is not a lattice homomorphism"));
            }
        }
    }
    Ok(LHom { src, dst, map })
}
