use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::{json, Map, Value};

use condensate::diagrams::{condensate as condense, tensor, Diagram, TensorResult};
use condensate::freecover::{build_fx, f_xy};
use condensate::metric::{
    build_degenerate_square, build_m3_square, build_n5_square, check_square_hypotheses, natural, quotient_space,
    search_lifting, LiftBounds, SearchOutcome, SemMetricCover, SemMetricSpace, SquareData,
};
use condensate::poset::{
    classify, construct_pk, free_map_search, ideals, nabla, nabla_closure, NormCovering, Poset,
};
use condensate::pscaled::{self, clop, sigma_enumerate, ult, PScaledBA, ScaledMorphism};
use condensate::regring::{
    corner_ring, faith_utumi_corner, join_meet_via_formulas, lattice_l, neutral_ideal_correspondence,
    quotient_l_iso, section_complement, FinRing, LatticeL,
};
use condensate::structures::{
    con_lattice, con_v, concv_map, o_ideal_quotient, projectability_witness, quotient as struct_quotient, FinStructure,
    Hom, Seed, VarietyOracle, DEFAULT_CON_BOUND,
};
use condensate::Error;

const BOUND_ENV: &str = "CONDENSATE_BOUND";
const CON_CAP: usize = 16;
const LIFT_CAP: usize = 7;
const PRODUCT_DEFAULT: usize = 4096;
const PRODUCT_CAP: usize = 1 << 20;

#[derive(Parser)]
#[command(name = "condensate", version, about = "Finite P-scaled algebras, congruences and condensates")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite posets: classification, ▽, ideals, P⟨K⟩, free maps.
    #[command(subcommand)]
    Poset(PosetCmd),
    /// P-scaled Boolean algebras and their morphisms.
    #[command(subcommand)]
    Scaled(ScaledCmd),
    /// The free algebra F(X) of a norm-covering.
    #[command(subcommand)]
    Fx(FxCmd),
    /// Congruences of finite structures, relative to a quasivariety.
    #[command(subcommand)]
    Con(ConCmd),
    /// B ⊗ D for a scaled algebra B and a diagram D.
    Tensor {
        diagram: PathBuf,
        algebra: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// F(X) ⊗ D for a norm-covering X over the diagram's poset.
    Condensate {
        diagram: PathBuf,
        cover: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Semilattice-valued metric spaces and lifting squares.
    #[command(subcommand)]
    Metr(MetrCmd),
    /// Finite regular rings and their principal right ideal lattices.
    #[command(subcommand)]
    Ring(RingCmd),
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    /// Search or enumeration bound; defaults to $CONDENSATE_BOUND or a built-in value.
    #[arg(long)]
    bound: Option<usize>,
    /// Allow bounds above the hard cap.
    #[arg(long)]
    no_cap: bool,
}

#[derive(Subcommand)]
enum PosetCmd {
    /// Pseudo join-semilattice, supported, almost join-semilattice.
    Classify {
        file: PathBuf,
        /// Also print the Hasse diagram in DOT.
        #[arg(long)]
        dot: bool,
    },
    /// ▽X for a finite subset X.
    Nabla { file: PathBuf, elems: Vec<String> },
    /// The ▽-closure of X.
    Closure { file: PathBuf, elems: Vec<String> },
    /// All ideals.
    Ideals { file: PathBuf },
    /// The norm-covering P⟨K⟩ with K = {0,…,k-1}.
    Pk {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Print the covering in norm-covering format.
        #[arg(long)]
        emit: bool,
    },
    /// First injective free map P → K for a set mapping on K.
    Freemap {
        file: PathBuf,
        /// Set-mapping file: lines `set <k…> : <k…>`; unlisted sets map to ∅.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum ScaledCmd {
    /// Ultrafilter space and the two Stone round trips.
    Stone { file: PathBuf },
    /// Normality of a morphism file with `src`, `dst` and `dual` lines.
    Normal { file: PathBuf },
    /// A/I for the ideal generated by the listed atoms.
    Quotient { file: PathBuf, atoms: Vec<String> },
    /// Finite product of algebras over one poset.
    Product {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// The poset Σ_A of finite subalgebras with labellings.
    Sigma { file: PathBuf },
}

#[derive(Subcommand)]
enum FxCmd {
    /// Atom and generator tables of F(X).
    Build {
        cover: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// π_𝐮 for the ideal X↓x.
    Pi {
        cover: PathBuf,
        elem: String,
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// F(X) → F(Y) for a ▽-closed subcovering X of Y.
    Restrict {
        sub: PathBuf,
        sup: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ConCmd {
    /// All congruences.
    Lattice {
        file: PathBuf,
        #[arg(long)]
        emit_poset: bool,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// A/θ for θ generated by pairs `x=y`.
    Quotient { file: PathBuf, pairs: Vec<String> },
    /// The congruence generated by one pair.
    Principal { file: PathBuf, x: String, y: String },
    /// Con^V f for a homomorphism file with `map` lines.
    Concmap {
        src: PathBuf,
        dst: PathBuf,
        hom: PathBuf,
        #[arg(long, default_value = "all")]
        variety: String,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Projectability witness for the quotient of Con_c^V A killing the pairs `x=y`.
    Witness {
        file: PathBuf,
        pairs: Vec<String>,
        #[arg(long, default_value = "all")]
        variety: String,
        #[command(flatten)]
        bound: BoundArgs,
    },
}

#[derive(Subcommand)]
enum MetrCmd {
    /// Checks a space or cover file, including the Parallelogram Rule.
    Validate { file: PathBuf },
    /// The natural space A♮ of a structure.
    Natural {
        file: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Quotient by the o-ideal generated by the listed values.
    Quotient { file: PathBuf, values: Vec<String> },
    /// Hypotheses of a built-in square: m3-square, n5-square, degenerate-square.
    SquareCheck { square: String },
    /// Exhaustive search for a lifting of a built-in square.
    LiftSearch {
        square: String,
        /// Largest |B_j|.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        star: Option<usize>,
        #[arg(long)]
        values: Option<usize>,
        #[arg(long)]
        no_cap: bool,
        /// Write a found lifting here instead of stdout.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RingCmd {
    /// L(R) for a ring spec such as "mat 2 gf 2".
    Lattice {
        spec: String,
        #[arg(long)]
        emit_poset: bool,
    },
    /// Join, meet and section complement of aR and bR.
    Ops { spec: String, a: String, b: String },
    /// Neutral ideals of L(R) against two-sided ideals of R.
    Neutral { spec: String },
    /// L(R)/𝐈 ≅ L(R/I) for the ideal generated by the listed elements.
    #[command(name = "quotLiso")]
    QuotLiso { spec: String, elems: Vec<String> },
    /// An idempotent e with the listed elements in eRe.
    Corner { spec: String, elems: Vec<String> },
}

struct Fail {
    file: Option<PathBuf>,
    err: Error,
}

impl From<Error> for Fail {
    fn from(err: Error) -> Self {
        Fail { file: None, err }
    }
}

type Res<T> = std::result::Result<T, Fail>;

struct Out {
    text: String,
    json: Map<String, Value>,
}

impl Out {
    fn new() -> Self {
        Out { text: String::new(), json: Map::new() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn set(&mut self, k: &str, v: Value) {
        self.json.insert(k.to_string(), v);
    }
}

fn input(msg: impl Into<String>) -> Fail {
    Error::Input(msg.into()).into()
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Fail {
        file: Some(path.to_path_buf()),
        err: Error::Input(format!("cannot read: {e}")),
    })
}

/// Reads and parses one file, tagging errors with its path.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> condensate::Result<T>) -> Res<T> {
    let src = read(path)?;
    parse(&src).map_err(|err| Fail { file: Some(path.to_path_buf()), err })
}

/// Resolver for file references inside `path`, relative to its directory.
fn loader(path: &Path) -> impl Fn(&str) -> condensate::Result<String> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    move |rel: &str| {
        let p = base.join(rel);
        std::fs::read_to_string(&p).map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))
    }
}

fn load_poset(path: &Path) -> Res<Poset> {
    load(path, Poset::parse)
}

fn load_scaled(path: &Path) -> Res<PScaledBA> {
    let src = read(path)?;
    let tag = |err| Fail { file: Some(path.to_path_buf()), err };
    let pp = PScaledBA::header_path(&src).map_err(tag)?;
    let p = load_poset(&path.parent().unwrap_or(Path::new("")).join(pp))?;
    PScaledBA::parse(&src, &p).map_err(tag)
}

fn load_cover(path: &Path, target: Option<&Path>) -> Res<NormCovering> {
    let src = read(path)?;
    let tpath = match target {
        Some(t) => t.to_path_buf(),
        None => {
            let h = PScaledBA::header_path(&src).map_err(|err| Fail { file: Some(path.to_path_buf()), err })?;
            path.parent().unwrap_or(Path::new("")).join(h)
        }
    };
    let p = load_poset(&tpath)?;
    NormCovering::parse(&src, &p).map_err(|err| Fail { file: Some(path.to_path_buf()), err })
}

fn load_structure(path: &Path) -> Res<FinStructure> {
    load(path, FinStructure::parse)
}

fn bound(args: &BoundArgs, default: usize, cap: usize) -> Res<usize> {
    pick_bound(args.bound, args.no_cap, default, cap)
}

fn pick_bound(given: Option<usize>, no_cap: bool, default: usize, cap: usize) -> Res<usize> {
    let b = match given {
        Some(b) => b,
        None => match std::env::var(BOUND_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| input(format!("{BOUND_ENV}={v} is not a number")))?,
            Err(_) => default,
        },
    };
    if b > cap && !no_cap {
        return Err(input(format!("bound {b} is above the hard cap {cap}; pass --no-cap to allow it")));
    }
    Ok(b)
}

fn variety(spec: &str, lang_src: &FinStructure) -> Res<VarietyOracle> {
    Ok(match spec {
        "all" => VarietyOracle::All,
        "lattices" => VarietyOracle::lattices(),
        "distributive" => VarietyOracle::distributive_lattices(),
        file => load(Path::new(file), |s| VarietyOracle::parse(s, lang_src.lang()))?,
    })
}

fn labels(p: &Poset, xs: &[usize]) -> Vec<String> {
    xs.iter().map(|&i| p.label(i).to_string()).collect()
}

fn set_text(xs: &[String]) -> String {
    format!("{{{}}}", xs.join(", "))
}

fn elems(p: &Poset, names: &[String]) -> Res<Vec<usize>> {
    names.iter().map(|n| p.index(n).map_err(Fail::from)).collect()
}

fn poset(cmd: PosetCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        PosetCmd::Classify { file, dot } => {
            let p = load_poset(&file)?;
            let c = classify(&p);
            o.line(format!("pseudo={} supported={} almost={}", c.pseudo, c.supported, c.almost));
            o.set("pseudo", json!(c.pseudo));
            o.set("supported", json!(c.supported));
            o.set("almost", json!(c.almost));
            if dot {
                o.text.push_str(&p.to_dot());
                o.set("dot", json!(p.to_dot()));
            }
        }
        PosetCmd::Nabla { file, elems: names } => {
            let p = load_poset(&file)?;
            let r = labels(&p, &nabla(&p, &elems(&p, &names)?));
            o.line(set_text(&r));
            o.set("result", json!(r));
        }
        PosetCmd::Closure { file, elems: names } => {
            let p = load_poset(&file)?;
            let r = labels(&p, &nabla_closure(&p, &elems(&p, &names)?));
            o.line(set_text(&r));
            o.set("result", json!(r));
        }
        PosetCmd::Ideals { file } => {
            let p = load_poset(&file)?;
            let mut all = Vec::new();
            for (x, id) in ideals(&p).iter().enumerate() {
                let l = labels(&p, id);
                o.line(format!("↓{} = {}", p.label(x), set_text(&l)));
                all.push(json!({"top": p.label(x), "members": l}));
            }
            o.set("ideals", Value::Array(all));
        }
        PosetCmd::Pk { file, k, emit } => {
            let p = load_poset(&file)?;
            let pk = construct_pk(&p, k)?;
            let x = &pk.cover.x;
            if emit {
                o.text.push_str(&pk.cover.to_text(&file.display().to_string()));
            } else {
                o.line(format!("|P⟨K⟩| = {}", x.len()));
                for i in 0..x.len() {
                    o.line(format!("{}  norm {}", x.label(i), p.label(pk.cover.bd[i])));
                }
            }
            o.set("size", json!(x.len()));
            o.set(
                "elements",
                json!((0..x.len()).map(|i| json!({"label": x.label(i), "norm": p.label(pk.cover.bd[i])})).collect::<Vec<_>>()),
            );
        }
        PosetCmd::Freemap { file, map, k } => {
            let p = load_poset(&file)?;
            let table = load(&map, |s| parse_setmap(s, k))?;
            let f = |s: &[usize]| table.get(s).cloned().unwrap_or_default();
            match free_map_search(&p, k, &f) {
                Some(m) => {
                    let pairs: Vec<String> = (0..p.len()).map(|i| format!("{}:{}", p.label(i), m[i])).collect();
                    o.line(format!("free map {}", pairs.join(" ")));
                    o.set("found", json!(true));
                    o.set("map", json!((0..p.len()).map(|i| (p.label(i).to_string(), m[i])).collect::<HashMap<_, _>>()));
                }
                None => {
                    o.line("no free map");
                    o.set("found", json!(false));
                }
            }
        }
    }
    Ok(o)
}

fn parse_setmap(src: &str, k: usize) -> condensate::Result<HashMap<Vec<usize>, Vec<usize>>> {
    let mut table = HashMap::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let err = |col: usize, msg: String| Error::Parse { line: no + 1, col, msg };
        let rest = line.strip_prefix("set").ok_or_else(|| err(1, "expected `set <k…> : <k…>`".into()))?;
        let (lhs, rhs) = rest.split_once(':').ok_or_else(|| err(1, "missing `:`".into()))?;
        let nums = |s: &str| -> condensate::Result<Vec<usize>> {
            let mut v = s
                .split_whitespace()
                .map(|w| match w.parse::<usize>() {
                    Ok(n) if n < k => Ok(n),
                    _ => Err(err(raw.find(w).map_or(1, |c| c + 1), format!("`{w}` is not an element of K"))),
                })
                .collect::<condensate::Result<Vec<_>>>()?;
            v.sort_unstable();
            v.dedup();
            Ok(v)
        };
        table.insert(nums(lhs)?, nums(rhs)?);
    }
    Ok(table)
}

fn atoms(a: &PScaledBA, names: &[String]) -> Res<Vec<usize>> {
    names.iter().map(|n| a.atom_index(n).map_err(Fail::from)).collect()
}

fn scaled(cmd: ScaledCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        ScaledCmd::Stone { file } => {
            let a = load_scaled(&file)?;
            let x = ult(&a);
            let back = clop(&x)?;
            let round_a = back.isomorphism(&a).is_some();
            let round_x = ult(&back).isomorphic(&x);
            let mut pts = Vec::new();
            for (pt, n) in x.points.iter().zip(&x.norm) {
                let l = labels(&x.p, n);
                o.line(format!("point {pt} norm {}", set_text(&l)));
                pts.push(json!({"point": pt, "norm": l}));
            }
            o.line(format!("clop-ult-iso={round_a} ult-clop-iso={round_x}"));
            o.set("points", Value::Array(pts));
            o.set("clop_ult_iso", json!(round_a));
            o.set("ult_clop_iso", json!(round_x));
        }
        ScaledCmd::Normal { file } => {
            let src = read(&file)?;
            let tag = |err| Fail { file: Some(file.clone()), err };
            let dir = file.parent().unwrap_or(Path::new("")).to_path_buf();
            let a = load_scaled(&dir.join(ScaledMorphism::header(&src, "src").map_err(tag)?))?;
            let b = load_scaled(&dir.join(ScaledMorphism::header(&src, "dst").map_err(tag)?))?;
            let f = ScaledMorphism::parse(&src, &a, &b).map_err(tag)?;
            let (n, i, l) = (f.is_normal(), f.is_isomorphism(), f.preserves_levels());
            o.line(format!("normal={n} isomorphism={i} level-preserving={l}"));
            o.set("normal", json!(n));
            o.set("isomorphism", json!(i));
            o.set("level_preserving", json!(l));
        }
        ScaledCmd::Quotient { file, atoms: names } => {
            let a = load_scaled(&file)?;
            let (q, _) = pscaled::quotient(&a, &atoms(&a, &names)?)?;
            let header = PScaledBA::header_path(&read(&file)?)?;
            o.text = q.to_text(&header);
            o.set("atoms", json!(q.labels()));
            o.set("text", json!(o.text));
        }
        ScaledCmd::Product { files } => {
            let fs = files.iter().map(|f| load_scaled(f)).collect::<Res<Vec<_>>>()?;
            let (prod, _) = pscaled::product(&fs)?;
            let header = PScaledBA::header_path(&read(&files[0])?)?;
            o.text = prod.to_text(&header);
            o.set("atoms", json!(prod.labels()));
            o.set("text", json!(o.text));
        }
        ScaledCmd::Sigma { file } => {
            let a = load_scaled(&file)?;
            let s = sigma_enumerate(&a)?;
            o.line(format!("members={} directed={} union={}", s.members.len(), s.directed, s.union_ok));
            for (i, m) in s.members.iter().enumerate() {
                let blocks: Vec<String> = m
                    .blocks
                    .iter()
                    .zip(&m.label)
                    .map(|(b, &l)| {
                        let at: Vec<&str> = b.iter().map(|&x| a.labels()[x].as_str()).collect();
                        format!("{}↦{}", set_text(&at.iter().map(|s| s.to_string()).collect::<Vec<_>>()), a.poset().label(l))
                    })
                    .collect();
                o.line(format!("{}{}", blocks.join(" "), if i == s.top { "  (top)" } else { "" }));
            }
            o.set("members", json!(s.members.len()));
            o.set("directed", json!(s.directed));
            o.set("union", json!(s.union_ok));
        }
    }
    Ok(o)
}

fn fx(cmd: FxCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        FxCmd::Build { cover, target } => {
            let c = load_cover(&cover, target.as_deref())?;
            let f = build_fx(&c);
            let (x, p) = (&c.x, &c.p);
            let mut at = Vec::new();
            o.line("atom  norm");
            for i in 0..x.len() {
                o.line(format!("{}  {}", f.algebra.labels()[i], p.label(c.bd[i])));
                at.push(json!({"atom": f.algebra.labels()[i], "norm": p.label(c.bd[i])}));
            }
            o.line("generator  atoms");
            let mut gens = Vec::new();
            for u in 0..x.len() {
                let l: Vec<String> = f.gen[u].iter().map(|&a| f.algebra.labels()[a].clone()).collect();
                o.line(format!("~{}  {}", x.label(u), set_text(&l)));
                gens.push(json!({"generator": x.label(u), "atoms": l}));
            }
            o.set("atoms", Value::Array(at));
            o.set("generators", Value::Array(gens));
        }
        FxCmd::Pi { cover, elem, target } => {
            let c = load_cover(&cover, target.as_deref())?;
            let f = build_fx(&c);
            let u = c.x.index(&elem)?;
            let pi = f.pi_u(&c.x.down(u))?;
            let norm = c.p.label(pi.dst.top_norm(0));
            let kept = &f.algebra.labels()[pi.dual[0]];
            o.line(format!("π onto 2[{norm}] keeps atom {kept}; normal={}", pi.is_normal()));
            o.set("norm", json!(norm));
            o.set("atom", json!(kept));
            o.set("normal", json!(pi.is_normal()));
        }
        FxCmd::Restrict { sub, sup, target } => {
            let x = load_cover(&sub, target.as_deref())?;
            let y = load_cover(&sup, target.as_deref())?;
            let m = f_xy(&x, &y)?;
            let mut dual = Map::new();
            for (v, &u) in m.dual.iter().enumerate() {
                o.line(format!("{} ↦ {}", m.dst.labels()[v], m.src.labels()[u]));
                dual.insert(m.dst.labels()[v].clone(), json!(m.src.labels()[u]));
            }
            o.line(format!("normal={}", m.is_normal()));
            o.set("dual", Value::Object(dual));
            o.set("normal", json!(m.is_normal()));
        }
    }
    Ok(o)
}

fn pair_seeds(a: &FinStructure, pairs: &[String]) -> Res<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|s| {
            let (x, y) = s.split_once('=').ok_or_else(|| input(format!("`{s}` is not of the form x=y")))?;
            Ok((a.element(x)?, a.element(y)?))
        })
        .collect()
}

fn con(cmd: ConCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        ConCmd::Lattice { file, emit_poset, bound: b } => {
            let a = load_structure(&file)?;
            let cl = con_lattice(&a, bound(&b, DEFAULT_CON_BOUND, CON_CAP)?)?;
            if emit_poset {
                o.text = cl.poset().to_text();
            } else {
                o.line(format!("|Con A| = {}", cl.len()));
                for (i, c) in cl.members.iter().enumerate() {
                    o.line(format!("{i}: {}", c.describe(&a)));
                }
            }
            o.set("size", json!(cl.len()));
            o.set("members", json!(cl.members.iter().map(|c| c.describe(&a)).collect::<Vec<_>>()));
        }
        ConCmd::Quotient { file, pairs } => {
            let a = load_structure(&file)?;
            let theta = a.generate(&pair_seeds(&a, &pairs)?, &[]);
            let (q, _) = struct_quotient(&a, &theta)?;
            o.text = q.to_text();
            o.set("size", json!(q.size()));
            o.set("text", json!(o.text));
        }
        ConCmd::Principal { file, x, y } => {
            let a = load_structure(&file)?;
            let c = a.principal(a.element(&x)?, a.element(&y)?);
            o.line(c.describe(&a));
            o.set("congruence", json!(c.describe(&a)));
        }
        ConCmd::Concmap { src, dst, hom, variety: v, bound: b } => {
            let a = load_structure(&src)?;
            let bb = load_structure(&dst)?;
            let f = load(&hom, |s| Hom::parse(s, &a, &bb))?;
            let v = variety(&v, &a)?;
            let m = concv_map(&f, &v, bound(&b, DEFAULT_CON_BOUND, CON_CAP)?)?;
            let mut rows = Vec::new();
            for (i, &j) in m.map.iter().enumerate() {
                let (l, r) = (m.src.members[i].describe(&a), m.dst.members[j].describe(&bb));
                o.line(format!("{l} ↦ {r}"));
                rows.push(json!([l, r]));
            }
            o.set("map", Value::Array(rows));
        }
        ConCmd::Witness { file, pairs, variety: v, bound: b } => {
            let a = load_structure(&file)?;
            let v = variety(&v, &a)?;
            let bound = bound(&b, DEFAULT_CON_BOUND, CON_CAP)?;
            let cv = con_v(&a, &v, bound)?;
            let m = cv.monoid()?;
            let mut theta = cv.bottom();
            for (x, y) in pair_seeds(&a, &pairs)? {
                let g = cv.principal(&Seed::Pair(x, y))?;
                theta = cv.join(theta, g).ok_or_else(|| Error::Domain("Con^V A lacks a join".into()))?;
            }
            let ideal: Vec<usize> = (0..cv.len()).filter(|&i| cv.leq(i, theta)).collect();
            let (_, phi) = o_ideal_quotient(&m, &ideal)?;
            let w = projectability_witness(&cv, &v, &phi, bound)?;
            o.line(format!("θ = {}", w.theta.describe(&a)));
            o.line(format!("|A/θ| = {}", w.proj.dst.size()));
            o.line(format!("|Con_c^V(A/θ)| = {}  ε bijective={}", w.conv_bar.len(), w.eps.is_bijective()));
            o.set("theta", json!(w.theta.describe(&a)));
            o.set("quotient_size", json!(w.proj.dst.size()));
            o.set("eps", json!(w.eps.map));
        }
    }
    Ok(o)
}

fn tensor_out(o: &mut Out, t: &TensorResult, cap: usize) -> Res<()> {
    let m = t.product.materialize(cap)?;
    o.text.push_str(&m.to_text());
    o.line("# coordinate  atom  norm  size");
    let mut rows = Vec::new();
    for (u, f) in t.product.factors.iter().enumerate() {
        let (atom, norm) = (&t.algebra.labels()[u], t.algebra.poset().label(t.algebra.top_norm(u)));
        o.line(format!("# {u}  {atom}  {norm}  {}", f.size()));
        rows.push(json!({"coordinate": u, "atom": atom, "norm": norm, "size": f.size()}));
    }
    o.set("size", json!(m.size()));
    o.set("structure", json!(m.to_text()));
    o.set("projections", Value::Array(rows));
    Ok(())
}

fn load_diagram(path: &Path) -> Res<Diagram> {
    let l = loader(path);
    load(path, |s| Diagram::parse(s, &l))
}

fn builtin_square(name: &str) -> Res<SquareData> {
    match name {
        "m3-square" => Ok(build_m3_square()),
        "n5-square" => Ok(build_n5_square()),
        "degenerate-square" => Ok(build_degenerate_square()),
        _ => Err(input(format!("unknown square `{name}`; expected m3-square, n5-square or degenerate-square"))),
    }
}

fn metr(cmd: MetrCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        MetrCmd::Validate { file } => {
            let src = read(&file)?;
            let is_cover = src.lines().any(|l| l.split_whitespace().next() == Some("star"));
            let tag = |err| Fail { file: Some(file.clone()), err };
            if is_cover {
                let c = SemMetricCover::parse(&src).map_err(tag)?;
                let s = &c.space;
                o.line(format!("cover points={} values={} star={} parallelogram=ok", s.len(), s.values().len(), c.star().len()));
                o.set("kind", json!("cover"));
                o.set("points", json!(s.len()));
                o.set("values", json!(s.values().len()));
                o.set("star", json!(c.star().len()));
            } else {
                let s = SemMetricSpace::parse(&src).map_err(tag)?;
                o.line(format!("space points={} values={}", s.len(), s.values().len()));
                o.set("kind", json!("space"));
                o.set("points", json!(s.len()));
                o.set("values", json!(s.values().len()));
            }
        }
        MetrCmd::Natural { file, bound: b } => {
            let a = load_structure(&file)?;
            let s = natural(&a, bound(&b, DEFAULT_CON_BOUND, CON_CAP)?)?;
            o.text = s.to_text();
            o.set("text", json!(o.text));
        }
        MetrCmd::Quotient { file, values } => {
            let s = load(&file, SemMetricSpace::parse)?;
            let vals = s.values();
            let mut top = vals.zero();
            for v in &values {
                let i = vals.names().iter().position(|n| n == v).ok_or_else(|| input(format!("unknown value `{v}`")))?;
                top = vals.sum(top, i);
            }
            let ideal: Vec<usize> = (0..vals.len()).filter(|&v| vals.leq(v, top)).collect();
            let (q, _) = quotient_space(&s, &ideal)?;
            o.text = q.to_text();
            o.set("text", json!(o.text));
        }
        MetrCmd::SquareCheck { square } => {
            let d = builtin_square(&square)?;
            let c = check_square_hypotheses(&d);
            if !c.holds() {
                return Err(Error::Domain(format!("square hypotheses fail: {}", c.failures.join("; "))).into());
            }
            let top = d.top();
            let dist = top.value_name(d.top_distance()).to_string();
            o.line(format!("hypotheses hold; δ(a1,a2) = {dist}"));
            o.set("holds", json!(true));
            o.set("top_distance", json!(dist));
        }
        MetrCmd::LiftSearch { square, bound: pts, star, values, no_cap, witness } => {
            let d = builtin_square(&square)?;
            let def = LiftBounds::default();
            let b = LiftBounds {
                points: pick_bound(pts, no_cap, def.points, LIFT_CAP)?,
                star: star.unwrap_or(def.star),
                values: values.unwrap_or(def.values),
            };
            match search_lifting(&d, &b)? {
                SearchOutcome::NoneWithinBound { reason } => {
                    o.line("none-within-bound");
                    o.line(format!("# {reason}"));
                    o.set("verdict", json!("none-within-bound"));
                    o.set("reason", json!(reason));
                }
                SearchOutcome::Found(l) => {
                    let mut w = String::new();
                    for (j, c) in l.covers.iter().enumerate() {
                        w.push_str(&format!("# B{j}\n{}", c.to_text()));
                    }
                    for (j, chi) in l.chi.iter().enumerate() {
                        w.push_str(&format!("# chi{j}\n{}", chi.to_text()));
                    }
                    o.line("found");
                    o.set("verdict", json!("found"));
                    match witness {
                        Some(path) => std::fs::write(&path, &w)
                            .map_err(|e| Fail { file: Some(path.clone()), err: Error::Input(format!("cannot write: {e}")) })?,
                        None => o.text.push_str(&w),
                    }
                    o.set("witness", json!(w));
                }
            }
            o.set("bounds", json!({"points": b.points, "star": b.star, "values": b.values}));
        }
    }
    Ok(o)
}

fn ring_of(spec: &str) -> Res<FinRing> {
    let l = loader(Path::new("./x"));
    Ok(FinRing::from_spec(spec, &l)?)
}

fn ring_elems(r: &FinRing, names: &[String]) -> Res<Vec<usize>> {
    names.iter().map(|n| r.element(n).map_err(Fail::from)).collect()
}

fn height(p: &Poset) -> usize {
    let mut h = vec![0usize; p.len()];
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&a| p.down(a).len());
    for &a in &order {
        h[a] = p.down(a).into_iter().filter(|&b| b != a).map(|b| h[b] + 1).max().unwrap_or(0);
    }
    h.into_iter().max().unwrap_or(0)
}

/// Names a few small lattices up to isomorphism.
fn lattice_name(p: &Poset) -> Option<String> {
    let m3 = Poset::numbered(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).expect("M3");
    let n5 = Poset::numbered(5, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).expect("N5");
    let two = Poset::chain(2);
    let mut known = vec![("M3".to_string(), m3), ("N5".to_string(), n5)];
    let mut cube = two.clone();
    for k in 2..=4 {
        cube = cube.product(&two);
        known.push((format!("2^{k}"), cube.clone()));
    }
    for n in 1..=8 {
        known.push((format!("chain {n}"), Poset::chain(n)));
    }
    known.into_iter().find(|(_, q)| q.is_isomorphic(p)).map(|(n, _)| n)
}

fn ring(cmd: RingCmd) -> Res<Out> {
    let mut o = Out::new();
    match cmd {
        RingCmd::Lattice { spec, emit_poset } => {
            let r = ring_of(&spec)?;
            let l = lattice_l(&r)?;
            let p = l.poset();
            let atoms = p.minimal_of(&(0..p.len()).filter(|&x| Some(x) != p.least()).collect::<Vec<_>>()).len();
            let name = lattice_name(&p);
            if emit_poset {
                o.text.push_str(&p.to_text());
            }
            let iso = name.as_deref().map(|n| format!(" isomorphic to {n}")).unwrap_or_default();
            o.line(format!("# |L(R)| = {} atoms={atoms} height={}{iso}", p.len(), height(&p)));
            o.set("size", json!(p.len()));
            o.set("atoms", json!(atoms));
            o.set("height", json!(height(&p)));
            o.set("isomorphic_to", json!(name));
            o.set("poset", json!(p.to_text()));
        }
        RingCmd::Ops { spec, a, b } => {
            let r = ring_of(&spec)?;
            let l = lattice_l(&r)?;
            let (x, y) = (r.element(&a)?, r.element(&b)?);
            let f = join_meet_via_formulas(&l, x, y)?;
            let lab = |i: usize| ideal_label(&l, i);
            o.line(format!("aR + bR = {}  (formula matches: {})", lab(f.join), f.join_matches));
            o.line(format!("aR ∩ bR = {}  (formula matches: {})", lab(f.meet), f.meet_matches));
            o.set("join", json!(lab(f.join)));
            o.set("meet", json!(lab(f.meet)));
            o.set("join_matches", json!(f.join_matches));
            o.set("meet_matches", json!(f.meet_matches));
            if l.leq(l.of(x), l.of(y)) {
                let c = section_complement(&l, x, y)?;
                o.line(format!("section complement of aR in bR: {}", lab(c)));
                o.set("section_complement", json!(lab(c)));
            }
        }
        RingCmd::Neutral { spec } => {
            let r = ring_of(&spec)?;
            let c = neutral_ideal_correspondence(&r)?;
            let mut rows = Vec::new();
            o.line(format!("{} neutral ideals, {} two-sided ideals", c.neutral.len(), c.ideals.len()));
            for (k, &m) in c.neutral.iter().enumerate() {
                let id = &c.ideals[c.phi[k]];
                o.line(format!("↓{} ↔ ideal of size {}", ideal_label(&c.lattice, m), id.len()));
                rows.push(json!({"neutral_top": ideal_label(&c.lattice, m), "ideal_size": id.len()}));
            }
            o.set("pairs", Value::Array(rows));
        }
        RingCmd::QuotLiso { spec, elems: names } => {
            let r = ring_of(&spec)?;
            let gens = ring_elems(&r, &names)?;
            let ideal = r.ideal_generated(&gens);
            let q = quotient_l_iso(&r, &ideal)?;
            o.line(format!("|L(R)/𝐈| = {}  |L(R/I)| = {}", q.classes.len(), q.quotient.len()));
            let mut rows = Vec::new();
            for (c, members) in q.classes.iter().enumerate() {
                let from: Vec<String> = members.iter().map(|&i| ideal_label(&q.lattice, i)).collect();
                let to = ideal_label(&q.quotient, q.map[c]);
                o.line(format!("{} ↦ {to}", set_text(&from)));
                rows.push(json!({"class": from, "image": to}));
            }
            o.set("map", Value::Array(rows));
        }
        RingCmd::Corner { spec, elems: names } => {
            let r = ring_of(&spec)?;
            let xs = ring_elems(&r, &names)?;
            let e = faith_utumi_corner(&r, &xs)?;
            let c = corner_ring(&r, e)?;
            o.line(format!("e = {}  |eRe| = {}", r.name(e), c.len()));
            o.set("e", json!(r.name(e)));
            o.set("corner_size", json!(c.len()));
        }
    }
    Ok(o)
}

fn ideal_label(l: &LatticeL, i: usize) -> String {
    l.poset().label(i).to_string()
}

fn run(cli: Cli) -> Res<Out> {
    Ok(match cli.cmd {
        Cmd::Poset(c) => poset(c)?,
        Cmd::Scaled(c) => scaled(c)?,
        Cmd::Fx(c) => fx(c)?,
        Cmd::Con(c) => con(c)?,
        Cmd::Tensor { diagram, algebra, bound: b } => {
            let d = load_diagram(&diagram)?;
            let a = load_scaled(&algebra)?;
            let mut o = Out::new();
            tensor_out(&mut o, &tensor(&a, &d)?, bound(&b, PRODUCT_DEFAULT, PRODUCT_CAP)?)?;
            o
        }
        Cmd::Condensate { diagram, cover, bound: b } => {
            let d = load_diagram(&diagram)?;
            let x = load(&cover, |s| NormCovering::parse(s, &d.p))?;
            let mut o = Out::new();
            tensor_out(&mut o, &condense(&x, &d)?, bound(&b, PRODUCT_DEFAULT, PRODUCT_CAP)?)?;
            o
        }
        Cmd::Metr(c) => metr(c)?,
        Cmd::Ring(c) => ring(c)?,
    })
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let json_mode = cli.json;
    let mut command = Vec::new();
    let mut m = &matches;
    while let Some((name, sub)) = m.subcommand() {
        command.push(name);
        m = sub;
    }
    match run(cli) {
        Ok(out) => {
            if json_mode {
                let mut m = Map::new();
                m.insert("schema".into(), json!(1));
                m.insert("command".into(), json!(command.join(" ")));
                m.insert("ok".into(), json!(true));
                m.extend(out.json);
                println!("{}", Value::Object(m));
            } else {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(Fail { file, err }) => {
            let code = if err.is_input() { 2 } else { 1 };
            let file = file.map(|f| f.display().to_string());
            let prefix = file.as_ref().map(|f| format!("{f}: ")).unwrap_or_default();
            eprintln!("condensate: {prefix}{err}");
            if json_mode {
                let (kind, line, col) = match &err {
                    Error::Parse { line, col, .. } => ("parse", Some(*line), Some(*col)),
                    Error::Input(_) => ("input", None, None),
                    Error::Domain(_) => ("domain", None, None),
                    Error::Size(_) => ("size", None, None),
                };
                let v = json!({
                    "schema": 1,
                    "command": command.join(" "),
                    "ok": false,
                    "error": {"kind": kind, "message": err.to_string(), "file": file, "line": line, "col": col},
                });
                println!("{v}");
            }
            ExitCode::from(code)
        }
    }
}
