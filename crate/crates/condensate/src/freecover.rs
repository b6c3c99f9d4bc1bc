//! The algebra F(X) of a norm-covering X → P.
//!
//! For finite X the ideals are the principal ideals X↓x, so atom `x` of
//! F(X) stands for X↓x and the generator ũ is the set of atoms x ≥ u.

use crate::error::{Error, Result};
use crate::poset::{nabla, NormCovering};
use crate::pscaled::{two, Element, PScaledBA, ScaledMorphism};

#[derive(Clone, Debug)]
pub struct FreeScaled {
    pub cover: NormCovering,
    pub algebra: PScaledBA,
    /// gen[u] = ũ, the atoms whose ideal contains u.
    pub gen: Vec<Element>,
}

/// Which defining relation of F(X) an assignment violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationFailure {
    /// ṽ ≤ ũ fails for u ≤ v.
    Antitone { u: usize, v: usize },
    /// ũ ∧ ṽ differs from ⋁{w̃ : w ∈ u▽v}.
    Meet { u: usize, v: usize },
    /// ⋁{ũ : u ∈ Min X} differs from 1.
    Top,
}

impl std::fmt::Display for RelationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RelationFailure::Antitone { u, v } => write!(f, "antitone relation fails for {u} ≤ {v}"),
            RelationFailure::Meet { u, v } => write!(f, "meet relation fails for the pair {u}, {v}"),
            RelationFailure::Top => write!(f, "the generators of minimal elements do not join to 1"),
        }
    }
}

/// A Boolean homomorphism F(X) → 2^m given by its dual map atoms(2^m) → atoms(F(X)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolHom {
    pub dual: Vec<usize>,
}

impl BoolHom {
    pub fn apply(&self, x: &[usize]) -> Element {
        (0..self.dual.len()).filter(|&b| x.contains(&self.dual[b])).collect()
    }
}

pub fn build_fx(cover: &NormCovering) -> FreeScaled {
    let x = &cover.x;
    let labels = (0..x.len()).map(|i| format!("↓{}", x.label(i))).collect();
    let algebra = PScaledBA::new(&cover.p, labels, cover.bd.clone()).expect("F(X) has |X| ≥ 1 atoms");
    let gen = (0..x.len()).map(|u| x.up(u)).collect();
    FreeScaled { cover: cover.clone(), algebra, gen }
}

impl FreeScaled {
    /// Checks an assignment X → 2^m against the defining relations, in the
    /// order antitone, meet, top.
    pub fn check_relations(&self, m: usize, assign: &[Element]) -> std::result::Result<(), RelationFailure> {
        let x = &self.cover.x;
        let n = x.len();
        let set = |e: &Element| {
            let mut v = e.clone();
            v.sort_unstable();
            v.dedup();
            v
        };
        for u in 0..n {
            for v in x.up(u) {
                if !assign[v].iter().all(|b| assign[u].contains(b)) {
                    return Err(RelationFailure::Antitone { u, v });
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let meet: Element = set(&assign[u]).into_iter().filter(|b| assign[v].contains(b)).collect();
                let mut join: Element = nabla(x, &[u, v]).iter().flat_map(|&w| assign[w].iter().copied()).collect();
                join = set(&join);
                if meet != join {
                    return Err(RelationFailure::Meet { u, v });
                }
            }
        }
        let mut top: Element = x.minimal().iter().flat_map(|&u| assign[u].iter().copied()).collect();
        top = set(&top);
        if top != (0..m).collect::<Vec<_>>() {
            return Err(RelationFailure::Top);
        }
        Ok(())
    }

    /// The homomorphism F(X) → 2^m extending `assign`, when the relations hold.
    /// Atom β of 2^m is sent to the ideal {u : β ∈ assign(u)}.
    pub fn universal_extend(&self, m: usize, assign: &[Element]) -> Result<std::result::Result<BoolHom, RelationFailure>> {
        let x = &self.cover.x;
        if assign.len() != x.len() || assign.iter().flatten().any(|&b| b >= m) {
            return Err(Error::input("assignment does not match X and the target algebra"));
        }
        if let Err(f) = self.check_relations(m, assign) {
            return Ok(Err(f));
        }
        let dual = (0..m)
            .map(|beta| {
                let ideal: Vec<usize> = (0..x.len()).filter(|&u| assign[u].contains(&beta)).collect();
                debug_assert!(x.is_ideal(&ideal));
                x.greatest_of(&ideal).expect("relations force an ideal")
            })
            .collect();
        Ok(Ok(BoolHom { dual }))
    }

    /// π^X_𝐮: F(X) → 2[∂𝐮], ṽ ↦ 1 iff v ∈ 𝐮.
    pub fn pi_u(&self, ideal: &[usize]) -> Result<ScaledMorphism> {
        let norm = self.cover.ideal_norm(ideal)?;
        let top = self.cover.x.greatest_of(ideal).expect("ideal maximum");
        ScaledMorphism::new(&self.algebra, &two(&self.cover.p, norm), vec![top])
    }

    /// F(X)^(p) is the ideal generated by {ũ : p ≤ ∂u}.
    pub fn level_generated(&self, p: usize) -> bool {
        let mut gen: Element = (0..self.cover.x.len())
            .filter(|&u| self.cover.p.leq(p, self.cover.bd[u]))
            .flat_map(|u| self.gen[u].iter().copied())
            .collect();
        gen.sort_unstable();
        gen.dedup();
        gen == self.algebra.level_top(p)
    }
}

/// f_X^Y: F(X) → F(Y) for X a ▽-closed subcovering of Y (matched by labels).
pub fn f_xy(xsub: &NormCovering, ysup: &NormCovering) -> Result<ScaledMorphism> {
    let (x, y) = (&xsub.x, &ysup.x);
    if xsub.p != ysup.p {
        return Err(Error::input("coverings over different posets"));
    }
    let emb: Vec<usize> = (0..x.len())
        .map(|i| y.index(x.label(i)).map_err(|_| Error::input(format!("`{}` is not an element of Y", x.label(i)))))
        .collect::<Result<_>>()?;
    for i in 0..x.len() {
        if xsub.bd[i] != ysup.bd[emb[i]] {
            return Err(Error::input(format!("norm of `{}` differs in X and Y", x.label(i))));
        }
        for j in 0..x.len() {
            if x.leq(i, j) != y.leq(emb[i], emb[j]) {
                return Err(Error::input(format!("order between `{}` and `{}` differs in X and Y", x.label(i), x.label(j))));
            }
        }
    }
    let lift = |s: Vec<usize>| {
        let mut v: Vec<usize> = s.into_iter().map(|i| emb[i]).collect();
        v.sort_unstable();
        v
    };
    if lift(x.minimal()) != y.minimal() {
        return Err(Error::input("X is not ▽-closed in Y: Min X ≠ Min Y"));
    }
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if lift(nabla(x, &[i, j])) != nabla(y, &[emb[i], emb[j]]) {
                return Err(Error::input(format!(
                    "X is not ▽-closed in Y: ▽ of `{}`, `{}` differs",
                    x.label(i),
                    x.label(j)
                )));
            }
        }
    }
    let fx = build_fx(xsub);
    let fy = build_fx(ysup);
    let dual = (0..y.len())
        .map(|v| {
            let meet: Vec<usize> = (0..x.len()).filter(|&i| y.leq(emb[i], v)).collect();
            if !x.is_ideal(&meet) {
                return Err(Error::domain(format!("↓{} ∩ X is not an ideal of X", y.label(v))));
            }
            Ok(x.greatest_of(&meet).expect("ideal maximum"))
        })
        .collect::<Result<Vec<_>>>()?;
    ScaledMorphism::new(&fx.algebra, &fy.algebra, dual)
}
