//! Poset-indexed diagrams of finite structures and the tensor `B ⊗ D`.
//!
//! `B ⊗ D` is the product of the objects `D(|u|)` over the atoms `u` of `B`.
//! Products are kept as factor lists; elements are coordinate vectors.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::freecover::build_fx;
use crate::poset::{NormCovering, Poset};
use crate::pscaled::{PScaledBA, ScaledMorphism};
use crate::structures::{tuple_of, FinStructure, Hom};
use crate::text;

#[derive(Clone, Debug)]
pub struct Diagram {
    pub p: Poset,
    objs: Vec<FinStructure>,
    arr: Vec<Vec<Option<Hom>>>,
}

impl Diagram {
    /// `arrows` must include every covering pair; the rest are composed and
    /// every triple p ≤ q ≤ r is checked.
    pub fn new(p: &Poset, objs: Vec<FinStructure>, arrows: Vec<(usize, usize, Hom)>) -> Result<Diagram> {
        let n = p.len();
        if objs.len() != n {
            return Err(Error::input("one object per poset element is required"));
        }
        if objs.iter().any(|o| o.lang() != objs[0].lang()) {
            return Err(Error::input("diagram objects use different languages"));
        }
        let mut given: Vec<Vec<Option<Hom>>> = vec![vec![None; n]; n];
        for (a, b, h) in arrows {
            if !p.leq(a, b) {
                return Err(Error::input(format!("arrow {} → {} against the order", p.label(a), p.label(b))));
            }
            if h.src != objs[a] || h.dst != objs[b] {
                return Err(Error::input(format!("arrow {} → {} has the wrong endpoints", p.label(a), p.label(b))));
            }
            given[a][b] = Some(h);
        }
        let mut arr: Vec<Vec<Option<Hom>>> = vec![vec![None; n]; n];
        for a in 0..n {
            arr[a][a] = Some(Hom::identity(&objs[a]));
        }
        let covers = p.covers();
        for &(a, b) in &covers {
            if given[a][b].is_none() {
                return Err(Error::input(format!("missing arrow for the cover {} ≺ {}", p.label(a), p.label(b))));
            }
        }
        // Fill arr[a][b] by increasing interval length: first cover above a, then up.
        let mut order: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| p.lt(a, b)).collect();
        order.sort_by_key(|&(a, b)| (0..n).filter(|&c| p.leq(a, c) && p.leq(c, b)).count());
        for (a, b) in order {
            let &(_, c) = covers.iter().find(|&&(x, c)| x == a && p.leq(c, b)).expect("interval has a cover");
            let first = given[a][c].clone().expect("cover arrow");
            let rest = arr[c][b].clone().expect("shorter interval");
            arr[a][b] = Some(first.then(&rest)?);
        }
        for a in 0..n {
            for b in 0..n {
                if let Some(h) = &given[a][b] {
                    if Some(h) != arr[a][b].as_ref() {
                        return Err(Error::domain(format!(
                            "diagram does not commute: given arrow {} → {} differs from the composite",
                            p.label(a),
                            p.label(b)
                        )));
                    }
                }
            }
        }
        for a in 0..n {
            for b in p.up(a) {
                for c in p.up(b) {
                    let via = arr[a][b].as_ref().unwrap().then(arr[b][c].as_ref().unwrap())?;
                    if Some(&via) != arr[a][c].as_ref() {
                        return Err(Error::domain(format!(
                            "diagram does not commute on {} ≤ {} ≤ {}",
                            p.label(a),
                            p.label(b),
                            p.label(c)
                        )));
                    }
                }
            }
        }
        Ok(Diagram { p: p.clone(), objs, arr })
    }

    pub fn obj(&self, a: usize) -> &FinStructure {
        &self.objs[a]
    }

    /// The arrow D(a) → D(b) for a ≤ b.
    pub fn arrow(&self, a: usize, b: usize) -> Result<&Hom> {
        self.arr[a][b]
            .as_ref()
            .ok_or_else(|| Error::input(format!("{} ≰ {}", self.p.label(a), self.p.label(b))))
    }

    /// For a directed subset (which has a largest element m), the colimit is D(m)
    /// with cocone the arrows into m.
    pub fn directed_colimit(&self, subset: &[usize]) -> Result<(usize, Vec<Hom>)> {
        let m = self.p.greatest_of(subset).ok_or_else(|| Error::domain("subset is not directed"))?;
        let cocone = subset.iter().map(|&a| self.arrow(a, m).cloned()).collect::<Result<Vec<_>>>()?;
        Ok((m, cocone))
    }

    /// Diagram file: `poset <file>`, `object <p> <file>`, `arrow <p> <q>` followed by a line of images.
    pub fn parse(src: &str, load: &dyn Fn(&str) -> Result<String>) -> Result<Diagram> {
        let lines = text::lines(src);
        let mut p: Option<Poset> = None;
        let mut objs: Vec<Option<FinStructure>> = Vec::new();
        let mut pending: Option<(usize, usize, usize)> = None;
        let mut raw_arrows: Vec<(usize, usize, usize, Vec<(usize, String)>)> = Vec::new();
        for line in &lines {
            if let Some((a, b, no)) = pending.take() {
                raw_arrows.push((a, b, no, line.toks.iter().map(|t| (t.0, t.1.to_string())).collect()));
                continue;
            }
            match line.word(0) {
                Some("poset") => {
                    line.expect_len(2)?;
                    let q = Poset::parse(&load(line.word(1).unwrap_or_default())?)?;
                    objs = vec![None; q.len()];
                    p = Some(q);
                }
                Some("object") | Some("arrow") => {
                    line.expect_len(3)?;
                    let q = p.as_ref().ok_or_else(|| line.err(0, "`poset` line must come first"))?;
                    let idx = |i: usize| {
                        let w = line.word(i).unwrap_or_default();
                        q.index(w).map_err(|_| line.err(i, format!("unknown poset element `{w}`")))
                    };
                    let a = idx(1)?;
                    if line.word(0) == Some("object") {
                        objs[a] = Some(FinStructure::parse(&load(line.word(2).unwrap_or_default())?)?);
                    } else {
                        pending = Some((a, idx(2)?, line.no));
                    }
                }
                Some(w) => return Err(line.err(0, format!("unknown directive `{w}`"))),
                None => {}
            }
        }
        if let Some((_, _, no)) = pending {
            return Err(Error::Parse { line: no, col: 1, msg: "arrow without an image line".into() });
        }
        let p = p.ok_or_else(|| Error::input("diagram file has no `poset` line"))?;
        let objs: Vec<FinStructure> = objs
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| Error::input(format!("no object for `{}`", p.label(i)))))
            .collect::<Result<_>>()?;
        let mut arrows = Vec::new();
        for (a, b, no, words) in raw_arrows {
            let map = words
                .iter()
                .map(|(col, w)| {
                    objs[b].element(w).map_err(|_| Error::Parse { line: no + 1, col: *col, msg: format!("unknown element `{w}`") })
                })
                .collect::<Result<Vec<_>>>()?;
            arrows.push((a, b, Hom::new(&objs[a], &objs[b], map)?));
        }
        Diagram::new(&p, objs, arrows)
    }
}

/// A finite product of structures over one language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStructure {
    pub factors: Vec<FinStructure>,
}

impl ProductStructure {
    pub fn new(factors: Vec<FinStructure>) -> Result<ProductStructure> {
        if factors.is_empty() {
            return Err(Error::input("empty product"));
        }
        if factors.iter().any(|f| f.lang() != factors[0].lang()) {
            return Err(Error::input("product factors use different languages"));
        }
        Ok(ProductStructure { factors })
    }

    /// Number of elements, if it fits in a usize.
    pub fn size(&self) -> Option<usize> {
        self.factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.size()))
    }

    pub fn decode(&self, mut code: usize) -> Vec<usize> {
        let mut v = vec![0; self.factors.len()];
        for (i, f) in self.factors.iter().enumerate().rev() {
            v[i] = code % f.size();
            code /= f.size();
        }
        v
    }

    pub fn encode(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.factors).fold(0, |acc, (&c, f)| acc * f.size() + c)
    }

    pub fn op(&self, i: usize, args: &[Vec<usize>]) -> Vec<usize> {
        (0..self.factors.len())
            .map(|c| {
                let coords: Vec<usize> = args.iter().map(|a| a[c]).collect();
                self.factors[c].op(i, &coords)
            })
            .collect()
    }

    pub fn rel(&self, i: usize, t: &[Vec<usize>]) -> bool {
        (0..self.factors.len()).all(|c| {
            let coords: Vec<usize> = t.iter().map(|a| a[c]).collect();
            self.factors[c].rel(i, &coords)
        })
    }

    /// The product as an explicit structure, refusing more than `cap` elements.
    pub fn materialize(&self, cap: usize) -> Result<FinStructure> {
        let n = self.size().filter(|&n| n <= cap).ok_or_else(|| {
            Error::Size(format!("product has more than {cap} elements"))
        })?;
        let lang = self.factors[0].lang().clone();
        let names: Vec<String> = (0..n)
            .map(|code| {
                let x = self.decode(code);
                let parts: Vec<&str> = x.iter().zip(&self.factors).map(|(&c, f)| f.name(c)).collect();
                if parts.len() == 1 {
                    parts[0].to_string()
                } else {
                    format!("({})", parts.join(","))
                }
            })
            .collect();
        let consts = (0..lang.consts.len())
            .map(|i| self.encode(&self.factors.iter().map(|f| f.constant(i)).collect::<Vec<_>>()))
            .collect();
        let mut ops = Vec::new();
        for (i, &(_, k)) in lang.ops.iter().enumerate() {
            let len = n.checked_pow(k as u32).filter(|&l| l <= 1 << 22).ok_or_else(|| Error::Size("operation table too large".into()))?;
            ops.push(
                (0..len)
                    .map(|idx| {
                        let args: Vec<Vec<usize>> = tuple_of(idx, k, n).iter().map(|&c| self.decode(c)).collect();
                        self.encode(&self.op(i, &args))
                    })
                    .collect(),
            );
        }
        let mut rels = Vec::new();
        for (i, &(_, k)) in lang.rels.iter().enumerate() {
            let len = n.checked_pow(k as u32).filter(|&l| l <= 1 << 22).ok_or_else(|| Error::Size("relation too large".into()))?;
            rels.push(
                (0..len)
                    .map(|idx| {
                        let t: Vec<Vec<usize>> = tuple_of(idx, k, n).iter().map(|&c| self.decode(c)).collect();
                        self.rel(i, &t)
                    })
                    .collect(),
            );
        }
        FinStructure::new(lang, names, consts, ops, rels)
    }
}

/// A homomorphism between products whose coordinate `v` is `comps[v].1`
/// applied to source coordinate `comps[v].0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductHom {
    pub src: ProductStructure,
    pub dst: ProductStructure,
    pub comps: Vec<(usize, Hom)>,
}

impl ProductHom {
    pub fn new(src: &ProductStructure, dst: &ProductStructure, comps: Vec<(usize, Hom)>) -> Result<ProductHom> {
        if comps.len() != dst.factors.len() {
            return Err(Error::input("one component per target factor is required"));
        }
        for (v, (u, h)) in comps.iter().enumerate() {
            if *u >= src.factors.len() || h.src != src.factors[*u] || h.dst != dst.factors[v] {
                return Err(Error::input(format!("component {v} has the wrong endpoints")));
            }
        }
        Ok(ProductHom { src: src.clone(), dst: dst.clone(), comps })
    }

    pub fn identity(p: &ProductStructure) -> ProductHom {
        let comps = p.factors.iter().enumerate().map(|(i, f)| (i, Hom::identity(f))).collect();
        ProductHom { src: p.clone(), dst: p.clone(), comps }
    }

    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        self.comps.iter().map(|(u, h)| h.map[x[*u]]).collect()
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ProductHom) -> Result<ProductHom> {
        if g.src != self.dst {
            return Err(Error::input("product maps are not composable"));
        }
        let comps = g
            .comps
            .iter()
            .map(|(v, h)| {
                let (u, f) = &self.comps[*v];
                Ok((*u, f.then(h)?))
            })
            .collect::<Result<_>>()?;
        Ok(ProductHom { src: self.src.clone(), dst: g.dst.clone(), comps })
    }

    /// Pointwise equality, checked on every source element up to `cap`.
    pub fn same_function(&self, other: &ProductHom, cap: usize) -> Result<bool> {
        let n = self.src.size().filter(|&n| n <= cap).ok_or_else(|| Error::Size(format!("product has more than {cap} elements")))?;
        Ok(self.src == other.src
            && self.dst == other.dst
            && (0..n).all(|c| {
                let x = self.src.decode(c);
                self.apply(&x) == other.apply(&x)
            }))
    }
}

/// `B ⊗ D` with its canonical projections δ^u (coordinate `u`).
#[derive(Clone, Debug)]
pub struct TensorResult {
    pub algebra: PScaledBA,
    pub product: ProductStructure,
}

impl TensorResult {
    /// δ^u: B ⊗ D → D(|u|), as a map onto a one-factor product.
    pub fn projection(&self, u: usize) -> ProductHom {
        let f = &self.product.factors[u];
        ProductHom {
            src: self.product.clone(),
            dst: ProductStructure { factors: vec![f.clone()] },
            comps: vec![(u, Hom::identity(f))],
        }
    }
}

pub fn tensor(b: &PScaledBA, d: &Diagram) -> Result<TensorResult> {
    if b.poset() != &d.p {
        return Err(Error::input("algebra and diagram are indexed by different posets"));
    }
    let factors = (0..b.atom_count()).map(|u| d.obj(b.top_norm(u)).clone()).collect();
    Ok(TensorResult { algebra: b.clone(), product: ProductStructure::new(factors)? })
}

/// φ ⊗ D: coordinate v of the target reads coordinate v^φ of the source through σ_{|v^φ|}^{|v|}.
pub fn tensor_morphism(phi: &ScaledMorphism, d: &Diagram) -> Result<ProductHom> {
    let src = tensor(&phi.src, d)?;
    let dst = tensor(&phi.dst, d)?;
    let comps = phi
        .dual
        .iter()
        .enumerate()
        .map(|(v, &u)| Ok((u, d.arrow(phi.src.top_norm(u), phi.dst.top_norm(v))?.clone())))
        .collect::<Result<_>>()?;
    ProductHom::new(&src.product, &dst.product, comps)
}

/// F(X) ⊗ D.
pub fn condensate(x: &NormCovering, d: &Diagram) -> Result<TensorResult> {
    tensor(&build_fx(x).algebra, d)
}

/// Whether `h` is an isomorphism composed with the projection onto some set
/// of source coordinates, decided elementwise on at most `cap` source elements.
pub fn is_projection_up_to_iso(h: &ProductHom, cap: usize) -> Result<bool> {
    let src = &h.src;
    let n = src.size().filter(|&n| n <= cap).ok_or_else(|| Error::Size(format!("product has more than {cap} elements")))?;
    let Some(m) = h.dst.size() else { return Ok(false) };
    let elems: Vec<Vec<usize>> = (0..n).map(|c| src.decode(c)).collect();
    let images: Vec<usize> = elems.iter().map(|x| h.dst.encode(&h.apply(x))).collect();
    let distinct: std::collections::HashSet<usize> = images.iter().copied().collect();
    if distinct.len() != m {
        return Ok(false);
    }
    // J: the coordinates the map depends on.
    let k = src.factors.len();
    let depends: Vec<bool> = (0..k)
        .map(|i| {
            (0..n).any(|c| {
                let mut x = elems[c].clone();
                (0..src.factors[i].size()).any(|v| {
                    x[i] = v;
                    images[src.encode(&x)] != images[c]
                })
            })
        })
        .collect();
    let key = |x: &[usize]| -> Vec<usize> { (0..k).filter(|&i| depends[i]).map(|i| x[i]).collect() };
    let mut by_key: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut by_img: HashMap<usize, Vec<usize>> = HashMap::new();
    for c in 0..n {
        let kx = key(&elems[c]);
        if *by_key.entry(kx.clone()).or_insert(images[c]) != images[c] {
            return Ok(false);
        }
        if *by_img.entry(images[c]).or_insert_with(|| kx.clone()) != kx {
            return Ok(false);
        }
    }
    // Relations: h(t) ∈ R iff every chosen coordinate of t lies in R.
    let lang = src.factors[0].lang();
    for (r, &(_, arity)) in lang.rels.iter().enumerate() {
        let total = n.checked_pow(arity as u32).filter(|&t| t <= cap * cap).ok_or_else(|| {
            Error::Size("too many relation tuples to compare".into())
        })?;
        for idx in 0..total {
            let t: Vec<Vec<usize>> = tuple_of(idx, arity, n).iter().map(|&c| elems[c].clone()).collect();
            let img: Vec<Vec<usize>> = t.iter().map(|x| h.apply(x)).collect();
            let projected = (0..k).filter(|&i| depends[i]).all(|i| {
                let coords: Vec<usize> = t.iter().map(|x| x[i]).collect();
                src.factors[i].rel(r, &coords)
            });
            if h.dst.rel(r, &img) != projected {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
