//! Semilattice-metric spaces and covers, and liftings of squares of spaces.
//!
//! Value semilattices are idempotent [`FinCommMonoid`]s, so `x ≤ y` means
//! `x + y = y`. A cover keeps its distinguished subset A* as sorted indices.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::par;
use crate::poset::{enumerate_posets, Poset};
use crate::structures::{
    con_v, concv_map, o_ideal_quotient, FinCommMonoid, FinStructure, Hom, MonoidHom, Seed, VarietyOracle,
};
use crate::text;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemMetricSpace {
    points: Vec<String>,
    values: FinCommMonoid,
    delta: Vec<usize>,
}

impl SemMetricSpace {
    pub fn new(points: Vec<String>, values: FinCommMonoid, delta: Vec<usize>) -> Result<SemMetricSpace> {
        let n = points.len();
        if n == 0 {
            return Err(Error::input("a space needs at least one point"));
        }
        if delta.len() != n * n || delta.iter().any(|&v| v >= values.len()) {
            return Err(Error::input("distance table does not match the points and values"));
        }
        let mut seen = BTreeSet::new();
        if let Some(x) = points.iter().find(|x| !seen.insert(x.as_str())) {
            return Err(Error::input(format!("duplicate point `{x}`")));
        }
        if !values.is_idempotent() {
            return Err(Error::domain("value monoid is not a semilattice"));
        }
        let s = SemMetricSpace { points, values, delta };
        let zero = s.values.zero();
        for x in 0..n {
            if s.dist(x, x) != zero {
                return Err(Error::domain(format!("δ({0},{0}) ≠ 0", s.points[x])));
            }
            for y in 0..n {
                if s.dist(x, y) != s.dist(y, x) {
                    return Err(Error::domain(format!("δ is not symmetric at {}, {}", s.points[x], s.points[y])));
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !s.le(s.dist(x, z), s.join(s.dist(x, y), s.dist(y, z))) {
                        return Err(Error::domain(format!(
                            "triangle inequality fails: δ({x},{z}) ≰ δ({x},{y}) ∨ δ({y},{z})",
                            x = s.points[x],
                            y = s.points[y],
                            z = s.points[z]
                        )));
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_name(&self, x: usize) -> &str {
        &self.points[x]
    }

    pub fn point(&self, name: &str) -> Result<usize> {
        self.points.iter().position(|p| p == name).ok_or_else(|| Error::input(format!("unknown point `{name}`")))
    }

    pub fn values(&self) -> &FinCommMonoid {
        &self.values
    }

    pub fn value_name(&self, v: usize) -> &str {
        &self.values.names()[v]
    }

    pub fn dist(&self, x: usize, y: usize) -> usize {
        self.delta[x * self.len() + y]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.values.sum(a, b)
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.values.sum(a, b) == b
    }

    pub fn parse(src: &str) -> Result<SemMetricSpace> {
        let (space, star) = parse_space(src)?;
        if star.is_some() {
            return Err(Error::input("`star` lines belong to covers, not spaces"));
        }
        Ok(space)
    }

    pub fn to_text(&self) -> String {
        self.text_with(None)
    }

    fn text_with(&self, star: Option<&[usize]>) -> String {
        let m = self.values.len();
        let names = self.values.names();
        let mut out = format!("sort {m}\nnames {}\nop join/2\n", names.join(" "));
        for a in 0..m {
            let row: Vec<&str> = (0..m).map(|b| names[self.join(a, b)].as_str()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str(&format!("point {}\n", self.points.join(" ")));
        for x in 0..self.len() {
            for y in x + 1..self.len() {
                out.push_str(&format!("dist {} {} {}\n", self.points[x], self.points[y], names[self.dist(x, y)]));
            }
        }
        if let Some(star) = star {
            let s: Vec<&str> = star.iter().map(|&x| self.points[x].as_str()).collect();
            out.push_str(&format!("star {}\n", s.join(" ")));
        }
        out
    }

    /// An isomorphism as (point bijection, value bijection).
    pub fn isomorphism(&self, other: &SemMetricSpace) -> Option<(Vec<usize>, Vec<usize>)> {
        let (n, m) = (self.len(), self.values.len());
        if n != other.len() || m != other.values.len() {
            return None;
        }
        let mut pts = vec![usize::MAX; n];
        let mut vals = vec![usize::MAX; m];
        vals[self.values.zero()] = other.values.zero();
        if self.iso_points(other, 0, &mut pts, &mut vals) {
            Some((pts, vals))
        } else {
            None
        }
    }

    fn iso_points(&self, other: &SemMetricSpace, x: usize, pts: &mut [usize], vals: &mut Vec<usize>) -> bool {
        if x == self.len() {
            return self.iso_values(other, vals);
        }
        for y in 0..other.len() {
            if pts[..x].contains(&y) {
                continue;
            }
            pts[x] = y;
            let saved = vals.clone();
            let ok = (0..=x).all(|w| {
                let (a, b) = (self.dist(w, x), other.dist(pts[w], y));
                if vals[a] == usize::MAX && !vals.contains(&b) {
                    vals[a] = b;
                }
                vals[a] == b
            });
            if ok && self.iso_points(other, x + 1, pts, vals) {
                return true;
            }
            *vals = saved;
        }
        false
    }

    fn iso_values(&self, other: &SemMetricSpace, vals: &mut [usize]) -> bool {
        let m = vals.len();
        match (0..m).find(|&v| vals[v] == usize::MAX) {
            None => (0..m).all(|a| (0..m).all(|b| vals[self.join(a, b)] == other.join(vals[a], vals[b]))),
            Some(v) => {
                for w in 0..m {
                    if !vals.contains(&w) {
                        vals[v] = w;
                        if self.iso_values(other, vals) {
                            return true;
                        }
                        vals[v] = usize::MAX;
                    }
                }
                false
            }
        }
    }
}

fn parse_space(src: &str) -> Result<(SemMetricSpace, Option<Vec<usize>>)> {
    let (vals, rest) = FinStructure::parse_with(src, &["point", "dist", "star"])?;
    let j = vals.lang().op_index("join").ok_or_else(|| Error::input("value semilattice needs `op join/2`"))?;
    let m = vals.size();
    let table = vals.op_table(j).to_vec();
    let zero = (0..m)
        .find(|&z| (0..m).all(|x| table[z * m + x] == x))
        .ok_or_else(|| Error::domain("value semilattice has no zero"))?;
    let values = FinCommMonoid::new(vals.names().to_vec(), table, zero)?;
    let mut points: Vec<String> = Vec::new();
    for line in rest.iter().filter(|l| l.word(0) == Some("point")) {
        for (i, t) in line.toks.iter().enumerate().skip(1) {
            if points.iter().any(|p| p == t.1) {
                return Err(line.err(i, format!("duplicate point `{}`", t.1)));
            }
            points.push(t.1.to_string());
        }
    }
    if points.is_empty() {
        return Err(Error::input("missing `point` lines"));
    }
    let n = points.len();
    let mut delta = vec![usize::MAX; n * n];
    for x in 0..n {
        delta[x * n + x] = zero;
    }
    let mut star: Option<Vec<usize>> = None;
    for line in &rest {
        let pt = |i: usize| -> Result<usize> {
            let w = line.need(i, "a point")?;
            points.iter().position(|p| p == w).ok_or_else(|| line.err(i, format!("unknown point `{w}`")))
        };
        match line.word(0) {
            Some("dist") => {
                line.expect_len(4)?;
                let (x, y) = (pt(1)?, pt(2)?);
                let w = line.need(3, "a value")?;
                let v = vals.element(w).map_err(|_| line.err(3, format!("unknown value `{w}`")))?;
                for (a, b) in [(x, y), (y, x)] {
                    if delta[a * n + b] != usize::MAX && delta[a * n + b] != v {
                        return Err(line.err(0, format!("conflicting distance for {} {}", points[x], points[y])));
                    }
                    delta[a * n + b] = v;
                }
            }
            Some("star") => {
                let s = star.get_or_insert_with(Vec::new);
                for i in 1..line.toks.len() {
                    s.push(pt(i)?);
                }
            }
            _ => {}
        }
    }
    if let Some(k) = delta.iter().position(|&v| v == usize::MAX) {
        return Err(Error::input(format!("no distance given for {} {}", points[k / n], points[k % n])));
    }
    Ok((SemMetricSpace::new(points, values, delta)?, star))
}

/// A morphism (f, f̃) with δ_B(f x, f y) = f̃(δ_A(x, y)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetrMorphism {
    pub src: SemMetricSpace,
    pub dst: SemMetricSpace,
    pub f: Vec<usize>,
    pub ft: MonoidHom,
}

impl MetrMorphism {
    pub fn new(src: &SemMetricSpace, dst: &SemMetricSpace, f: Vec<usize>, ft: Vec<usize>) -> Result<MetrMorphism> {
        if f.len() != src.len() || f.iter().any(|&y| y >= dst.len()) {
            return Err(Error::input("point map does not match the spaces"));
        }
        let ft = MonoidHom::new(&src.values, &dst.values, ft)?;
        for x in 0..src.len() {
            for y in 0..src.len() {
                let want = ft.map[src.dist(x, y)];
                if dst.dist(f[x], f[y]) != want {
                    return Err(Error::input(format!(
                        "not a morphism: f̃ δ({},{}) = {} but δ({},{}) = {}",
                        src.points[x],
                        src.points[y],
                        dst.value_name(want),
                        dst.points[f[x]],
                        dst.points[f[y]],
                        dst.value_name(dst.dist(f[x], f[y]))
                    )));
                }
            }
        }
        Ok(MetrMorphism { src: src.clone(), dst: dst.clone(), f, ft })
    }

    pub fn identity(a: &SemMetricSpace) -> MetrMorphism {
        MetrMorphism::new(a, a, (0..a.len()).collect(), (0..a.values.len()).collect()).expect("identity")
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &MetrMorphism) -> Result<MetrMorphism> {
        if g.src != self.dst {
            return Err(Error::input("morphisms are not composable"));
        }
        let f = self.f.iter().map(|&x| g.f[x]).collect();
        let ft = self.ft.map.iter().map(|&v| g.ft.map[v]).collect();
        MetrMorphism::new(&self.src, &g.dst, f, ft)
    }

    pub fn is_double_arrow(&self) -> bool {
        (0..self.dst.len()).all(|y| self.f.contains(&y))
    }

    /// Lines `map <x> <y>` and `vmap <s> <t>`.
    pub fn parse(src_text: &str, a: &SemMetricSpace, b: &SemMetricSpace) -> Result<MetrMorphism> {
        let mut f = vec![usize::MAX; a.len()];
        let mut ft = vec![usize::MAX; a.values.len()];
        for line in text::lines(src_text) {
            line.expect_len(3)?;
            let (x, y) = (line.need(1, "a source name")?, line.need(2, "a target name")?);
            match line.word(0) {
                Some("map") => {
                    let i = a.point(x).map_err(|_| line.err(1, format!("unknown point `{x}`")))?;
                    f[i] = b.point(y).map_err(|_| line.err(2, format!("unknown point `{y}`")))?;
                }
                Some("vmap") => {
                    let pos = |s: &SemMetricSpace, w: &str, tok: usize| {
                        s.values.names().iter().position(|n| n == w).ok_or_else(|| line.err(tok, format!("unknown value `{w}`")))
                    };
                    ft[pos(a, x, 1)?] = pos(b, y, 2)?;
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        if let Some(x) = f.iter().position(|&v| v == usize::MAX) {
            return Err(Error::input(format!("no image for point `{}`", a.points[x])));
        }
        if let Some(v) = ft.iter().position(|&v| v == usize::MAX) {
            return Err(Error::input(format!("no image for value `{}`", a.value_name(v))));
        }
        MetrMorphism::new(a, b, f, ft)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, &y) in self.f.iter().enumerate() {
            out.push_str(&format!("map {} {}\n", self.src.points[x], self.dst.points[y]));
        }
        for (v, &w) in self.ft.map.iter().enumerate() {
            out.push_str(&format!("vmap {} {}\n", self.src.value_name(v), self.dst.value_name(w)));
        }
        out
    }
}

/// (A*, A, δ, S) satisfying the Parallelogram Rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemMetricCover {
    pub space: SemMetricSpace,
    star: Vec<usize>,
}

impl SemMetricCover {
    pub fn new(space: SemMetricSpace, star: Vec<usize>) -> Result<SemMetricCover> {
        let c = SemMetricCover::unchecked(space, star)?;
        if let Some((x, y, z)) = c.parallelogram_failure() {
            let p = |i: usize| c.space.point_name(i);
            return Err(Error::domain(format!(
                "Parallelogram Rule fails for x = {}, y = {}, z = {}",
                p(x),
                p(y),
                p(z)
            )));
        }
        Ok(c)
    }

    /// Range checks only; the Parallelogram Rule is left to the caller.
    pub fn unchecked(space: SemMetricSpace, mut star: Vec<usize>) -> Result<SemMetricCover> {
        star.sort_unstable();
        star.dedup();
        if star.is_empty() {
            return Err(Error::input("A* must be nonempty"));
        }
        if star.iter().any(|&x| x >= space.len()) {
            return Err(Error::input("A* is not a subset of A"));
        }
        Ok(SemMetricCover { space, star })
    }

    pub fn star(&self) -> &[usize] {
        &self.star
    }

    /// Some t with δ(x,t) ≤ δ(y,z) and δ(t,z) ≤ δ(x,y).
    pub fn parallelogram_witness(&self, x: usize, y: usize, z: usize) -> Option<usize> {
        let s = &self.space;
        (0..s.len()).find(|&t| s.le(s.dist(x, t), s.dist(y, z)) && s.le(s.dist(t, z), s.dist(x, y)))
    }

    pub fn parallelogram_failure(&self) -> Option<(usize, usize, usize)> {
        for &x in &self.star {
            for &y in &self.star {
                for &z in &self.star {
                    if self.parallelogram_witness(x, y, z).is_none() {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// (A*, δ restricted, S): the value semilattice is kept whole.
    pub fn flat(&self) -> SemMetricSpace {
        let s = &self.space;
        let points = self.star.iter().map(|&x| s.points[x].clone()).collect();
        let delta = self.star.iter().flat_map(|&x| self.star.iter().map(move |&y| s.dist(x, y))).collect();
        SemMetricSpace { points, values: s.values.clone(), delta }
    }

    pub fn parse(src: &str) -> Result<SemMetricCover> {
        let (space, star) = parse_space(src)?;
        let star = star.unwrap_or_else(|| (0..space.len()).collect());
        SemMetricCover::new(space, star)
    }

    pub fn to_text(&self) -> String {
        self.space.text_with(Some(&self.star))
    }
}

/// ♭ applied to a cover morphism: checks f(A*) ⊆ B* and restricts.
pub fn flat_morphism(m: &MetrMorphism, a: &SemMetricCover, b: &SemMetricCover) -> Result<MetrMorphism> {
    if m.src != a.space || m.dst != b.space {
        return Err(Error::input("morphism does not run between the given covers"));
    }
    let f = a
        .star
        .iter()
        .map(|&x| {
            b.star.iter().position(|&y| y == m.f[x]).ok_or_else(|| {
                Error::input(format!("not a cover morphism: {} ∈ A* is sent outside B*", a.space.points[x]))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MetrMorphism::new(&a.flat(), &b.flat(), f, m.ft.map.clone())
}

/// A♮ = (A, ⟨x = y⟩, Con_c A).
pub fn natural(a: &FinStructure, bound: usize) -> Result<SemMetricSpace> {
    if a.has_relations() {
        return Err(Error::input("A♮ needs an algebra, but relation symbols are present"));
    }
    let cv = con_v(a, &VarietyOracle::All, bound)?;
    let names = cv.members.iter().map(|c| c.describe(a)).collect();
    let values = cv.monoid()?.with_names(names)?;
    let n = a.size();
    let mut delta = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            delta[x * n + y] = cv.principal(&Seed::Pair(x, y))?;
        }
    }
    SemMetricSpace::new(a.names().to_vec(), values, delta)
}

/// f♮ = (f, Con_c f).
pub fn natural_hom(f: &Hom, bound: usize) -> Result<MetrMorphism> {
    let a = natural(&f.src, bound)?;
    let b = natural(&f.dst, bound)?;
    let m = concv_map(f, &VarietyOracle::All, bound)?;
    MetrMorphism::new(&a, &b, f.map.clone(), m.map)
}

/// A/I with its canonical projection.
pub fn quotient_space(a: &SemMetricSpace, ideal: &[usize]) -> Result<(SemMetricSpace, MetrMorphism)> {
    a.values.check_o_ideal(ideal)?;
    let (q, pi) = o_ideal_quotient(&a.values, ideal)?;
    let n = a.len();
    let rel = |x: usize, y: usize| ideal.contains(&a.dist(x, y));
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if rel(x, y) && rel(y, z) && !rel(x, z) {
                    return Err(Error::domain("δ ∈ I is not transitive"));
                }
            }
        }
    }
    let mut class = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for x in 0..n {
        match reps.iter().position(|&r| rel(r, x)) {
            Some(c) => class[x] = c,
            None => {
                class[x] = reps.len();
                reps.push(x);
            }
        }
    }
    let k = reps.len();
    let delta: Vec<usize> = (0..k * k).map(|i| pi.map[a.dist(reps[i / k], reps[i % k])]).collect();
    for x in 0..n {
        for y in 0..n {
            if delta[class[x] * k + class[y]] != pi.map[a.dist(x, y)] {
                return Err(Error::domain("quotient distance is not well defined"));
            }
        }
    }
    let names = reps
        .iter()
        .map(|&r| {
            let members: Vec<&str> = (0..n).filter(|&x| class[x] == class[r]).map(|x| a.points[x].as_str()).collect();
            if members.len() == 1 {
                members[0].to_string()
            } else {
                format!("[{}]", members.join(","))
            }
        })
        .collect();
    let space = SemMetricSpace::new(names, q, delta)?;
    let proj = MetrMorphism::new(a, &space, class, pi.map)?;
    Ok((space, proj))
}

/// A square A0 → A1, A2 → A of spaces with marked points and values.
#[derive(Clone, Debug)]
pub struct SquareData {
    /// A0, A1, A2, A.
    pub spaces: [SemMetricSpace; 4],
    pub f: [MetrMorphism; 2],
    pub g: [MetrMorphism; 2],
    pub zero: usize,
    pub one: usize,
    pub a0: usize,
    pub a: [usize; 2],
    pub alpha: usize,
    pub beta: usize,
}

impl SquareData {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f: [MetrMorphism; 2],
        g: [MetrMorphism; 2],
        zero: usize,
        one: usize,
        a0: usize,
        a: [usize; 2],
        alpha: usize,
        beta: usize,
    ) -> Result<SquareData> {
        let bottom = f[0].src.clone();
        for i in 0..2 {
            if f[i].src != bottom || g[i].src != f[i].dst || g[i].dst != g[0].dst {
                return Err(Error::input("arrows do not form a square A0 → A1, A2 → A"));
            }
        }
        let (l, r) = (f[0].then(&g[0])?, f[1].then(&g[1])?);
        if l.f != r.f || l.ft.map != r.ft.map {
            return Err(Error::input("square does not commute"));
        }
        if [zero, one, a0].iter().any(|&x| x >= bottom.len())
            || (0..2).any(|i| a[i] >= f[i].dst.len())
            || alpha >= bottom.values.len()
            || beta >= bottom.values.len()
        {
            return Err(Error::input("marked element outside its space"));
        }
        let spaces = [bottom, f[0].dst.clone(), f[1].dst.clone(), g[0].dst.clone()];
        Ok(SquareData { spaces, f, g, zero, one, a0, a, alpha, beta })
    }

    pub fn top(&self) -> &SemMetricSpace {
        &self.spaces[3]
    }

    /// δ_A(a1, a2), computed through g1 and g2.
    pub fn top_distance(&self) -> usize {
        self.top().dist(self.g[0].f[self.a[0]], self.g[1].f[self.a[1]])
    }
}

/// Failed hypotheses, one line each; empty when all hold.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SquareCheck {
    pub failures: Vec<String>,
}

impl SquareCheck {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// No nonzero z lies below both x and y.
pub fn orthogonal(s: &SemMetricSpace, x: usize, y: usize) -> bool {
    let zero = s.values.zero();
    (0..s.values.len()).all(|z| z == zero || !(s.le(z, x) && s.le(z, y)))
}

pub fn check_square_hypotheses(d: &SquareData) -> SquareCheck {
    let mut failures = Vec::new();
    let injective = |f: &[usize]| (0..f.len()).all(|x| (0..x).all(|y| f[x] != f[y]));
    for i in 0..2 {
        if !injective(&d.f[i].f) {
            failures.push(format!("(i) f{} is not an inclusion", i + 1));
        }
        if !injective(&d.g[i].f) {
            failures.push(format!("(i) g{} is not an inclusion", i + 1));
        }
    }
    let a0 = &d.spaces[0];
    let le0 = |x: usize, y: usize, v: usize| a0.le(a0.dist(x, y), v);
    if !le0(d.zero, d.a0, d.alpha) {
        failures.push("(iii) δ(0,a0) ≰ α in A0".into());
    }
    if !le0(d.a0, d.one, d.beta) {
        failures.push("(iv) δ(a0,1) ≰ β in A0".into());
    }
    for i in 0..2 {
        let s = &d.spaces[i + 1];
        let (fa, fb) = (d.f[i].ft.map[d.alpha], d.f[i].ft.map[d.beta]);
        let (zero, one) = (d.f[i].f[d.zero], d.f[i].f[d.one]);
        if !orthogonal(s, fa, fb) {
            failures.push(format!("(ii) f̃{0}(α) and f̃{0}(β) are not orthogonal in A{0}", i + 1));
        }
        if !s.le(s.dist(d.a[i], one), fa) {
            failures.push(format!("(iii) δ(a{0},1) ≰ f̃{0}(α) in A{0}", i + 1));
        }
        if !s.le(s.dist(zero, d.a[i]), fb) {
            failures.push(format!("(iv) δ(0,a{0}) ≰ f̃{0}(β) in A{0}", i + 1));
        }
    }
    SquareCheck { failures }
}

fn lattice_square(top: &Poset, bottom: [&str; 3], sides: [[&str; 4]; 2], a: [&str; 2]) -> Result<SquareData> {
    let bound = crate::structures::DEFAULT_CON_BOUND;
    let whole = FinStructure::lattice(top)?;
    let sub = |labels: &[&str]| -> Result<(FinStructure, Hom)> {
        let idx = top.indices(labels)?;
        let s = FinStructure::lattice(&top.sub(&idx))?;
        let h = Hom::new(&s, &whole, idx)?;
        Ok((s, h))
    };
    let (b, _) = sub(&bottom)?;
    let mut f = Vec::new();
    let mut g = Vec::new();
    for side in &sides {
        let (s, into_top) = sub(side)?;
        let map = bottom.iter().map(|l| s.element(l)).collect::<Result<Vec<_>>>()?;
        f.push(natural_hom(&Hom::new(&b, &s, map)?, bound)?);
        g.push(natural_hom(&into_top, bound)?);
    }
    let a0 = &f[0].src;
    let (z, x, o) = (a0.point(bottom[0])?, a0.point(bottom[1])?, a0.point(bottom[2])?);
    let (alpha, beta) = (a0.dist(z, x), a0.dist(x, o));
    let marks = [f[0].dst.point(a[0])?, f[1].dst.point(a[1])?];
    let (f1, f0) = (f.pop().expect("two sides"), f.pop().expect("two sides"));
    let (g1, g0) = (g.pop().expect("two sides"), g.pop().expect("two sides"));
    SquareData::new([f0, f1], [g0, g1], z, o, x, marks, alpha, beta)
}

fn named_poset(labels: &[&str], pairs: &[(&str, &str)]) -> Poset {
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let idx = |w: &str| labels.iter().position(|l| l == w).expect("known label");
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (idx(a), idx(b))).collect();
    Poset::new(labels, &pairs).expect("fixed poset")
}

/// The diamond M3 = {0, a0, q1, q2, 1} with the chain {0, a0, 1} at the bottom.
pub fn build_m3_square() -> SquareData {
    let m3 = named_poset(
        &["0", "a0", "q1", "q2", "1"],
        &[("0", "a0"), ("0", "q1"), ("0", "q2"), ("a0", "1"), ("q1", "1"), ("q2", "1")],
    );
    lattice_square(&m3, ["0", "a0", "1"], [["0", "a0", "q1", "1"], ["0", "a0", "q2", "1"]], ["q1", "q2"])
        .expect("M3 square")
}

/// The pentagon 0 < a < b < 1, 0 < c < 1 with the chain {0, c, 1} at the bottom.
pub fn build_n5_square() -> SquareData {
    let n5 = named_poset(&["0", "a", "b", "c", "1"], &[("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")]);
    lattice_square(&n5, ["0", "c", "1"], [["0", "c", "a", "1"], ["0", "c", "b", "1"]], ["a", "b"]).expect("N5 square")
}

/// Four copies of the two-element lattice with identities; a1 = a2 = 1.
pub fn build_degenerate_square() -> SquareData {
    let two = FinStructure::lattice(&Poset::chain(2)).expect("chain");
    let id = natural_hom(&Hom::identity(&two), crate::structures::DEFAULT_CON_BOUND).expect("identity");
    let s = &id.src;
    let zero = s.values.zero();
    let full = s.dist(0, 1);
    SquareData::new([id.clone(), id.clone()], [id.clone(), id], 0, 1, 0, [1, 1], zero, full).expect("degenerate square")
}

/// Covers B0, B1, B2, B over the square with cover morphisms u, v and
/// χ_j: B_j♭ → A_j.
#[derive(Clone, Debug)]
pub struct Lifting {
    pub covers: [SemMetricCover; 4],
    pub u: [MetrMorphism; 2],
    pub v: [MetrMorphism; 2],
    pub chi: [MetrMorphism; 4],
}

impl Lifting {
    /// B_j = A_j with A_j* = A_j and χ the identity; a lifting only when
    /// every A_j satisfies the Parallelogram Rule.
    pub fn from_square(d: &SquareData) -> Result<Lifting> {
        let covers = d.spaces.clone().map(|s| {
            let all = (0..s.len()).collect();
            SemMetricCover::unchecked(s, all).expect("full star")
        });
        let chi = d.spaces.clone().map(|s| MetrMorphism::identity(&s));
        Ok(Lifting { covers, u: d.f.clone(), v: d.g.clone(), chi })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftVerdict {
    Accepted { trace: Vec<String> },
    Rejected { step: String, trace: Vec<String> },
}

impl LiftVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, LiftVerdict::Accepted { .. })
    }
}

/// Checks that `l` is a natural family of double arrows over `d` and replays
/// the computation forcing δ_A(a1, a2) = 0.
pub fn verify_lifting(d: &SquareData, l: &Lifting) -> Result<LiftVerdict> {
    let hyp = check_square_hypotheses(d);
    if !hyp.holds() {
        return Err(Error::domain(format!("square data violates its hypotheses: {}", hyp.failures.join("; "))));
    }
    let c = &l.covers;
    for i in 0..2 {
        if l.u[i].src != c[0].space || l.u[i].dst != c[i + 1].space {
            return Err(Error::input(format!("u{0} does not run from B0 to B{0}", i + 1)));
        }
        if l.v[i].src != c[i + 1].space || l.v[i].dst != c[3].space {
            return Err(Error::input(format!("v{0} does not run from B{0} to B", i + 1)));
        }
        flat_morphism(&l.u[i], &c[0], &c[i + 1]).map_err(|e| Error::input(format!("u{}: {e}", i + 1)))?;
        flat_morphism(&l.v[i], &c[i + 1], &c[3]).map_err(|e| Error::input(format!("v{}: {e}", i + 1)))?;
    }
    for j in 0..4 {
        if l.chi[j].src != c[j].flat() {
            return Err(Error::input(format!("χ{j} is not defined on the flat of B{j}")));
        }
        if l.chi[j].dst != d.spaces[j] {
            return Err(Error::input(format!("χ{j} does not land in A{j}")));
        }
    }
    let (w1, w2) = (l.u[0].then(&l.v[0])?, l.u[1].then(&l.v[1])?);
    if w1.f != w2.f || w1.ft.map != w2.ft.map {
        return Err(Error::input("the square of covers does not commute"));
    }
    // Faces (0 → i) for i = 1, 2 and (i → top).
    for (lo, hi, cm, am) in [(0, 1, &l.u[0], &d.f[0]), (0, 2, &l.u[1], &d.f[1]), (1, 3, &l.v[0], &d.g[0]), (2, 3, &l.v[1], &d.g[1])] {
        let face = |what: &str| Error::input(format!("χ is not natural on the face A{lo} → A{hi}: {what}"));
        let pos = |x: usize| c[hi].star.iter().position(|&y| y == x).expect("cover morphism");
        for (k, &x) in c[lo].star.iter().enumerate() {
            if l.chi[hi].f[pos(cm.f[x])] != am.f[l.chi[lo].f[k]] {
                return Err(face(&format!("point {}", c[lo].space.points[x])));
            }
        }
        for v in 0..c[lo].space.values.len() {
            if l.chi[hi].ft.map[cm.ft.map[v]] != am.ft.map[l.chi[lo].ft.map[v]] {
                return Err(face(&format!("value {}", c[lo].space.value_name(v))));
            }
        }
    }
    for j in 0..3 {
        if !l.chi[j].is_double_arrow() {
            return Err(Error::domain(format!("χ{j} is not surjective, so it is not a double arrow")));
        }
    }
    let mut trace = Vec::new();
    for (j, cover) in c.iter().enumerate() {
        if let Some((x, y, z)) = cover.parallelogram_failure() {
            let p = |i: usize| cover.space.point_name(i);
            let step = format!("Parallelogram Rule in B{j} at ({}, {}, {})", p(x), p(y), p(z));
            return Ok(LiftVerdict::Rejected { step, trace });
        }
    }
    let pre = |j: usize, a: usize| {
        let k = l.chi[j].f.iter().position(|&y| y == a).expect("surjective");
        c[j].star[k]
    };
    let (z0, z1, za) = (pre(0, d.zero), pre(0, d.one), pre(0, d.a0));
    let b0 = &c[0].space;
    trace.push(format!("0̇ = {}, 1̇ = {}, ȧ0 = {}", b0.points[z0], b0.points[z1], b0.points[za]));
    let x = c[0].parallelogram_witness(z0, za, z1).expect("Parallelogram Rule checked");
    trace.push(format!("ẋ = {}", b0.points[x]));
    let dots = [pre(1, d.a[0]), pre(2, d.a[1])];
    let top = &c[3].space;
    let chit = &l.chi[3].ft.map;
    let top_zero = d.spaces[3].values.zero();
    for i in 0..2 {
        let b = &c[i + 1].space;
        let ai = &d.spaces[i + 1];
        let ct = &l.chi[i + 1].ft.map;
        let u = &l.u[i].f;
        let (fa, fb) = (d.f[i].ft.map[d.alpha], d.f[i].ft.map[d.beta]);
        let n = i + 1;
        let steps = [
            (format!("χ̃{n} δ(ȧ{n}, u{n}0̇) ≤ f̃{n}(β)"), ct[b.dist(dots[i], u[z0])], fb),
            (format!("χ̃{n} δ(u{n}0̇, u{n}ẋ) ≤ f̃{n}(β)"), ct[b.dist(u[z0], u[x])], fb),
            (format!("χ̃{n} δ(ȧ{n}, u{n}ẋ) ≤ f̃{n}(β)"), ct[b.dist(dots[i], u[x])], fb),
            (format!("χ̃{n} δ(ȧ{n}, u{n}1̇) ≤ f̃{n}(α)"), ct[b.dist(dots[i], u[z1])], fa),
            (format!("χ̃{n} δ(u{n}1̇, u{n}ẋ) ≤ f̃{n}(α)"), ct[b.dist(u[z1], u[x])], fa),
            (format!("χ̃{n} δ(ȧ{n}, u{n}ẋ) ≤ f̃{n}(α)"), ct[b.dist(dots[i], u[x])], fa),
            (format!("χ̃{n} δ(ȧ{n}, u{n}ẋ) = 0"), ct[b.dist(dots[i], u[x])], ai.values.zero()),
        ];
        for (step, lhs, rhs) in steps {
            if !ai.le(lhs, rhs) {
                return Ok(LiftVerdict::Rejected { step, trace });
            }
            trace.push(format!("{step}: {} ≤ {}", ai.value_name(lhs), ai.value_name(rhs)));
        }
        let v = &l.v[i].f;
        let e = chit[top.dist(v[dots[i]], v[u[x]])];
        let step = format!("χ̃ δ(v{n}ȧ{n}, wẋ) = 0");
        if e != top_zero {
            return Ok(LiftVerdict::Rejected { step, trace });
        }
        trace.push(step);
    }
    let e = chit[top.dist(l.v[0].f[dots[0]], l.v[1].f[dots[1]])];
    let step = "χ̃ δ(v1ȧ1, v2ȧ2) = 0".to_string();
    if e != top_zero {
        return Ok(LiftVerdict::Rejected { step, trace });
    }
    trace.push(step);
    let dist = d.top_distance();
    if dist != top_zero {
        let step = format!("conclusion δ(a1,a2) = 0 contradicts δ(a1,a2) = {}", d.top().value_name(dist));
        return Ok(LiftVerdict::Rejected { step, trace });
    }
    trace.push("δ(a1,a2) = 0".into());
    Ok(LiftVerdict::Accepted { trace })
}

/// Per-vertex size limits for [`search_lifting`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiftBounds {
    pub points: usize,
    pub star: usize,
    pub values: usize,
}

impl Default for LiftBounds {
    fn default() -> Self {
        LiftBounds { points: 6, star: 4, values: 8 }
    }
}

/// Largest estimated number of local candidates a search will enumerate.
pub const SEARCH_LIMIT: f64 = 2e7;

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<Lifting>),
    NoneWithinBound { reason: String },
}

// Value semilattices in the search have zero 0 and a flat join table.
struct Slat {
    n: usize,
    join: Vec<usize>,
}

impl Slat {
    fn le(&self, a: usize, b: usize) -> bool {
        self.join[a * self.n + b] == b
    }
}

/// Join-semilattices with zero of size 1..=max up to isomorphism, zero first.
fn semilattices(max: usize) -> Vec<Slat> {
    let mut out = vec![Slat { n: 1, join: vec![0] }];
    for n in 2..=max {
        let inner = if n == 2 { vec![None] } else { enumerate_posets(n - 2).into_iter().map(Some).collect() };
        for q in inner {
            let leq = |a: usize, b: usize| -> bool {
                a == 0 || b == n - 1 || a == b || (a < n - 1 && b > 0 && q.as_ref().is_some_and(|q| q.leq(a - 1, b - 1)))
            };
            let mut join = vec![0; n * n];
            let mut ok = true;
            'outer: for a in 0..n {
                for b in 0..n {
                    let ub: Vec<usize> = (0..n).filter(|&c| leq(a, c) && leq(b, c)).collect();
                    match ub.iter().find(|&&c| ub.iter().all(|&d| leq(c, d))) {
                        Some(&c) => join[a * n + b] = c,
                        None => {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            if ok {
                out.push(Slat { n, join });
            }
        }
    }
    out
}

fn generated(s: &Slat, gens: &[usize]) -> Vec<bool> {
    let mut have = vec![false; s.n];
    have[0] = true;
    for &g in gens {
        have[g] = true;
    }
    loop {
        let mut grew = false;
        for a in 0..s.n {
            for b in 0..s.n {
                if have[a] && have[b] && !have[s.join[a * s.n + b]] {
                    have[s.join[a * s.n + b]] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            return have;
        }
    }
}

fn space_generated_count(a: &SemMetricSpace, pts: &[usize]) -> usize {
    let mut have: BTreeSet<usize> = BTreeSet::from([a.values.zero()]);
    for &x in pts {
        for &y in pts {
            have.insert(a.dist(x, y));
        }
    }
    loop {
        let next: BTreeSet<usize> = have.iter().flat_map(|&x| have.iter().map(move |&y| (x, y))).map(|(x, y)| a.join(x, y)).collect();
        if next.len() == have.len() {
            return have.len();
        }
        have = next;
    }
}

fn homs(s: &Slat, t: &SemMetricSpace) -> Vec<Vec<usize>> {
    let m = t.values.len();
    let mut out = Vec::new();
    let mut h = vec![0; s.n];
    h[0] = t.values.zero();
    fn rec(s: &Slat, t: &SemMetricSpace, m: usize, i: usize, h: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == s.n {
            out.push(h.clone());
            return;
        }
        for v in 0..m {
            h[i] = v;
            let ok = (0..=i).all(|a| {
                (0..=i).all(|b| {
                    let c = s.join[a * s.n + b];
                    c > i || h[c] == t.join(h[a], h[b])
                })
            });
            if ok {
                rec(s, t, m, i + 1, h, out);
            }
        }
    }
    if s.n == 1 {
        return vec![h];
    }
    rec(s, t, m, 1, &mut h, &mut out);
    out
}

#[derive(Clone, Debug)]
struct Local {
    n: usize,
    s: usize,
    sl: usize,
    delta: Vec<usize>,
    chi: Vec<usize>,
    chit: Vec<usize>,
}

struct VertexSpec<'a> {
    target: &'a SemMetricSpace,
    surjective: bool,
    min_star: usize,
    min_values: usize,
}

fn pair_order(n: usize) -> Vec<(usize, usize)> {
    (1..n).flat_map(|y| (0..y).map(move |x| (x, y))).collect()
}

fn locals(spec: &VertexSpec, b: &LiftBounds, sls: &[Slat]) -> Vec<Local> {
    let mut shapes = Vec::new();
    for n in spec.min_star..=b.points {
        for s in spec.min_star..=n.min(b.star) {
            for (k, sl) in sls.iter().enumerate() {
                if sl.n >= spec.min_values {
                    shapes.push((n, s, k));
                }
            }
        }
    }
    let per_shape = par::map(&shapes, |&(n, s, k)| {
        let sl = &sls[k];
        let hs = homs(sl, spec.target);
        let mut out = Vec::new();
        let mut delta = vec![0; n * n];
        let pairs = pair_order(n);
        distances(sl, n, &pairs, 0, &mut delta, &mut |delta| {
            let vals: Vec<usize> = pairs.iter().map(|&(x, y)| delta[x * n + y]).collect();
            if generated(sl, &vals).iter().any(|&h| !h) || !parallelogram(sl, n, s, delta) {
                return;
            }
            charts(spec, n, s, delta, &hs, &mut |chi, chit| {
                out.push(Local { n, s, sl: k, delta: delta.to_vec(), chi: chi.to_vec(), chit: chit.to_vec() })
            });
        });
        out
    });
    per_shape.into_iter().flatten().collect()
}

fn distances(sl: &Slat, n: usize, pairs: &[(usize, usize)], i: usize, delta: &mut [usize], emit: &mut dyn FnMut(&[usize])) {
    if i == pairs.len() {
        emit(delta);
        return;
    }
    let (x, y) = pairs[i];
    for v in 0..sl.n {
        delta[x * n + y] = v;
        delta[y * n + x] = v;
        let ok = (0..x).all(|w| {
            let (a, b, c) = (delta[w * n + x], delta[w * n + y], v);
            let j = |p: usize, q: usize| sl.join[p * sl.n + q];
            sl.le(a, j(b, c)) && sl.le(b, j(a, c)) && sl.le(c, j(a, b))
        });
        if ok {
            distances(sl, n, pairs, i + 1, delta, emit);
        }
    }
    delta[x * n + y] = 0;
    delta[y * n + x] = 0;
}

fn parallelogram(sl: &Slat, n: usize, s: usize, delta: &[usize]) -> bool {
    (0..s).all(|x| {
        (0..s).all(|y| {
            (0..s).all(|z| (0..n).any(|t| sl.le(delta[x * n + t], delta[y * n + z]) && sl.le(delta[t * n + z], delta[x * n + y])))
        })
    })
}

fn charts(
    spec: &VertexSpec,
    n: usize,
    s: usize,
    delta: &[usize],
    hs: &[Vec<usize>],
    emit: &mut dyn FnMut(&[usize], &[usize]),
) {
    let t = spec.target;
    let m = t.len();
    let mut chi = vec![0; s];
    loop {
        let onto = !spec.surjective || (0..m).all(|a| chi.contains(&a));
        if onto {
            for h in hs {
                let fits = (0..s).all(|x| (0..s).all(|y| h[delta[x * n + y]] == t.dist(chi[x], chi[y])));
                if fits {
                    emit(&chi, h);
                }
            }
        }
        if !odometer(&mut chi, m) {
            break;
        }
    }
}

fn odometer(v: &mut [usize], base: usize) -> bool {
    for d in v.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Value map induced by a point map, when it is a well-defined homomorphism.
fn induced(src: &Local, ssl: &Slat, dst: &Local, dsl: &Slat, p: &[usize]) -> Option<Vec<usize>> {
    let mut h = vec![usize::MAX; ssl.n];
    h[0] = 0;
    for x in 0..src.n {
        for y in 0..src.n {
            let (a, b) = (src.delta[x * src.n + y], dst.delta[p[x] * dst.n + p[y]]);
            if h[a] == usize::MAX {
                h[a] = b;
            } else if h[a] != b {
                return None;
            }
        }
    }
    loop {
        let mut grew = false;
        for a in 0..ssl.n {
            for b in 0..ssl.n {
                if h[a] != usize::MAX && h[b] != usize::MAX {
                    let c = ssl.join[a * ssl.n + b];
                    let w = dsl.join[h[a] * dsl.n + h[b]];
                    if h[c] == usize::MAX {
                        h[c] = w;
                        grew = true;
                    } else if h[c] != w {
                        return None;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    if h.contains(&usize::MAX) {
        return None;
    }
    Some(h)
}

/// Cover morphisms src → dst whose point and value squares commute with
/// `am` through the charts.
fn arrows(src: &Local, dst: &Local, sls: &[Slat], am: &MetrMorphism) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut p = vec![0; src.n];
    loop {
        let stars = (0..src.s).all(|k| p[k] < dst.s && dst.chi[p[k]] == am.f[src.chi[k]]);
        if stars {
            if let Some(h) = induced(src, &sls[src.sl], dst, &sls[dst.sl], &p) {
                if (0..h.len()).all(|v| dst.chit[h[v]] == am.ft.map[src.chit[v]]) {
                    out.push((p.clone(), h));
                }
            }
        }
        if !odometer(&mut p, dst.n) {
            return out;
        }
    }
}

fn vertex_specs<'a>(d: &'a SquareData) -> [VertexSpec<'a>; 4] {
    let reach: BTreeSet<usize> = (0..2).flat_map(|i| d.g[i].f.iter().copied()).collect();
    let reach: Vec<usize> = reach.into_iter().collect();
    let side = |j: usize| {
        let all: Vec<usize> = (0..d.spaces[j].len()).collect();
        VertexSpec {
            target: &d.spaces[j],
            surjective: true,
            min_star: d.spaces[j].len(),
            min_values: space_generated_count(&d.spaces[j], &all),
        }
    };
    [
        side(0),
        side(1),
        side(2),
        VertexSpec {
            target: &d.spaces[3],
            surjective: false,
            min_star: reach.len(),
            min_values: space_generated_count(&d.spaces[3], &reach),
        },
    ]
}

/// Number of raw local candidates the search would enumerate.
pub fn search_estimate(d: &SquareData, b: &LiftBounds) -> f64 {
    let sizes: Vec<usize> = if b.values <= 9 {
        semilattices(b.values).iter().map(|s| s.n).collect()
    } else {
        return f64::INFINITY;
    };
    vertex_specs(d)
        .iter()
        .map(|v| {
            let mut total = 0.0;
            for n in v.min_star..=b.points {
                for s in v.min_star..=n.min(b.star) {
                    for &k in sizes.iter().filter(|&&k| k >= v.min_values) {
                        let pairs = (n * (n - 1) / 2) as i32;
                        total += (k as f64).powi(pairs) * (v.target.len() as f64).powi(s as i32);
                    }
                }
            }
            total
        })
        .sum()
}

pub fn search_lifting(d: &SquareData, b: &LiftBounds) -> Result<SearchOutcome> {
    search_lifting_with_limit(d, b, SEARCH_LIMIT)
}

/// Exhaustive search for a [`Lifting`] within `b`.
///
/// Each B_j is taken with A* = {0..s}, with its value semilattice generated
/// by distances, and up to isomorphism of value semilattices.
pub fn search_lifting_with_limit(d: &SquareData, b: &LiftBounds, limit: f64) -> Result<SearchOutcome> {
    if b.points == 0 || b.star == 0 || b.values == 0 {
        return Err(Error::input("bounds must be positive"));
    }
    let specs = vertex_specs(d);
    for (j, v) in specs.iter().enumerate() {
        let star_need = v.min_star;
        if star_need > b.star.min(b.points) {
            let why = if j < 3 {
                format!("χ{j} is onto A{j}, so B{j}* needs {star_need} points")
            } else {
                format!("χ(B*) contains g1(A1) ∪ g2(A2), so B* needs {star_need} points")
            };
            return Ok(SearchOutcome::NoneWithinBound { reason: format!("{why}; bound is {}", b.star.min(b.points)) });
        }
        if v.min_values > b.values {
            return Ok(SearchOutcome::NoneWithinBound {
                reason: format!("the value semilattice of B{j} needs {} elements; bound is {}", v.min_values, b.values),
            });
        }
    }
    let estimate = search_estimate(d, b);
    if estimate > limit {
        return Err(Error::Size(format!("search space of about {estimate:.3e} local candidates exceeds {limit:.3e}")));
    }
    let sls = semilattices(b.values);
    let cands: Vec<Vec<Local>> = specs.iter().map(|v| locals(v, b, &sls)).collect();
    let found = par::find_map_first(&cands[0], |c0| {
        let sides: Vec<Vec<(usize, Vec<usize>, Vec<usize>)>> = (0..2)
            .map(|i| {
                cands[i + 1]
                    .iter()
                    .enumerate()
                    .flat_map(|(k, ci)| arrows(c0, ci, &sls, &d.f[i]).into_iter().map(move |(p, h)| (k, p, h)))
                    .collect()
            })
            .collect();
        for (k1, p1, h1) in &sides[0] {
            for (k2, p2, h2) in &sides[1] {
                let (c1, c2) = (&cands[1][*k1], &cands[2][*k2]);
                for c3 in &cands[3] {
                    let v1s = arrows(c1, c3, &sls, &d.g[0]);
                    if v1s.is_empty() {
                        continue;
                    }
                    let v2s = arrows(c2, c3, &sls, &d.g[1]);
                    for (q1, e1) in &v1s {
                        for (q2, e2) in &v2s {
                            let pts = (0..c0.n).all(|x| q1[p1[x]] == q2[p2[x]]);
                            let vals = (0..h1.len()).all(|v| e1[h1[v]] == e2[h2[v]]);
                            if pts && vals {
                                return Some((
                                    [c0.clone(), c1.clone(), c2.clone(), c3.clone()],
                                    [(p1.clone(), h1.clone()), (p2.clone(), h2.clone())],
                                    [(q1.clone(), e1.clone()), (q2.clone(), e2.clone())],
                                ));
                            }
                        }
                    }
                }
            }
        }
        None
    });
    match found {
        None => Ok(SearchOutcome::NoneWithinBound {
            reason: format!("exhaustive search over {} + {} + {} + {} local candidates", cands[0].len(), cands[1].len(), cands[2].len(), cands[3].len()),
        }),
        Some((locs, us, vs)) => Ok(SearchOutcome::Found(Box::new(materialize(d, &sls, &locs, &us, &vs)?))),
    }
}

type MapPair = (Vec<usize>, Vec<usize>);

fn materialize(d: &SquareData, sls: &[Slat], locs: &[Local; 4], us: &[MapPair; 2], vs: &[MapPair; 2]) -> Result<Lifting> {
    let covers = locs
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let sl = &sls[l.sl];
            let names = (0..sl.n).map(|v| format!("s{v}")).collect();
            let values = FinCommMonoid::new(names, sl.join.clone(), 0)?;
            let points = (0..l.n).map(|x| format!("b{j}.{x}")).collect();
            SemMetricCover::new(SemMetricSpace::new(points, values, l.delta.clone())?, (0..l.s).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mor = |a: usize, b: usize, m: &MapPair| MetrMorphism::new(&covers[a].space, &covers[b].space, m.0.clone(), m.1.clone());
    let u = [mor(0, 1, &us[0])?, mor(0, 2, &us[1])?];
    let v = [mor(1, 3, &vs[0])?, mor(2, 3, &vs[1])?];
    let chi = [0, 1, 2, 3].map(|j| MetrMorphism::new(&covers[j].flat(), &d.spaces[j], locs[j].chi.clone(), locs[j].chit.clone()));
    let [c0, c1, c2, c3] = chi;
    let covers: [SemMetricCover; 4] = covers.try_into().expect("four covers");
    Ok(Lifting { covers, u, v, chi: [c0?, c1?, c2?, c3?] })
}

/// From a CPCP-extension e: A ↪ B, the cover (e(A), B♮) and the double
/// arrow (id, (Con_c e)⁻¹) onto A♮.
pub fn cpcp_retract(e: &Hom, bound: usize) -> Result<(SemMetricCover, MetrMorphism)> {
    if !e.is_embedding() {
        return Err(Error::domain("the map is not an embedding"));
    }
    let m = concv_map(e, &VarietyOracle::All, bound)?;
    let bijective = m.map.len() == m.dst.len() && (0..m.dst.len()).all(|j| m.map.contains(&j));
    if !bijective {
        return Err(Error::domain("Con e is not an isomorphism, so B is not a CP-extension of A"));
    }
    let nb = natural(&e.dst, bound)?;
    let cover = SemMetricCover::new(nb, e.map.clone())
        .map_err(|err| Error::domain(format!("B is not a CPCP-extension of A: {err}")))?;
    let na = natural(&e.src, bound)?;
    let f = cover.star().iter().map(|&y| e.map.iter().position(|&x| x == y).expect("image")).collect();
    let ft = (0..m.dst.len()).map(|j| m.map.iter().position(|&i| i == j).expect("bijective")).collect();
    let chi = MetrMorphism::new(&cover.flat(), &na, f, ft)?;
    Ok((cover, chi))
}
