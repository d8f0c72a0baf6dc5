//! Scene files: `key = value` lines grouped under `[kind NAME]` headers.
//!
//! ```text
//! p = 3
//! n = 1
//!
//! [set X]
//! boxes = box(0; 0)
//!
//! [schwartz f]
//! support_level = 0
//! constancy_level = 1
//! value (0) = 1
//! value (1) = 1/2 - i
//!
//! [cexp g]
//! expr = abs(x1)^2
//!
//! [graph W]
//! base = box(0; 0)
//! map = x1^2
//!
//! [distribution xi]
//! kind = density
//! expr = g
//! set = X
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use padlab::cexp::{parse, parse_constant, parse_term, CexpExpr, RationalTerm};
use padlab::distributions::{Distribution, GraphManifold};
use padlab::poly::Poly;
use padlab::resolution::{certify_resolution, resolve, DEFAULT_LEVEL, DEFAULT_PREC};
use padlab::{ClopenSet, Prime, Rat, SchwartzBruhat};

use crate::error::CliError;
use crate::text::{fmt_point, fmt_points, parse_clopen, parse_point, parse_points, split_list};

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub p: Prime,
    pub n: usize,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub name: String,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Set(ClopenSet),
    Schwartz(SchwartzBruhat),
    Cexp(CexpExpr),
    Graph(GraphManifold),
    Distribution(DistSpec),
}

impl Body {
    fn kind(&self) -> &'static str {
        match self {
            Body::Set(_) => "set",
            Body::Schwartz(_) => "schwartz",
            Body::Cexp(_) => "cexp",
            Body::Graph(_) => "graph",
            Body::Distribution(_) => "distribution",
        }
    }
}

/// A set given by name or inline.
#[derive(Debug, Clone, PartialEq)]
pub enum SetRef {
    Named(String),
    Inline(ClopenSet),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistSpec {
    Dirac(Vec<Rat>),
    Haar(SetRef),
    Graph(String),
    Density { expr: String, set: SetRef, singular: bool },
    Loci { expr: String, strata: Vec<String> },
    Pushforward { inner: String, f: Vec<RationalTerm>, exponent: u64, chart: usize, prec: i64 },
}

struct Block {
    kind: String,
    name: String,
    line: usize,
    keys: Vec<(String, String, usize)>,
    values: Vec<(Vec<Rat>, String, usize)>,
}

impl Block {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.keys
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str) -> Result<(&str, usize), CliError> {
        self.get(key).ok_or_else(|| {
            CliError::parse(self.line, format!("[{} {}] is missing `{key}`", self.kind, self.name))
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let mut seen = HashSet::new();
        for (k, _, l) in &self.keys {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::parse(*l, format!("unknown key `{k}` in [{} {}]", self.kind, self.name)));
            }
            if !seen.insert(k) {
                return Err(CliError::parse(*l, format!("duplicate key `{k}`")));
            }
        }
        if !self.values.is_empty() && self.kind != "schwartz" {
            return Err(CliError::parse(self.values[0].2, "`value` lines belong to [schwartz] blocks"));
        }
        Ok(())
    }
}

fn int_value<T: std::str::FromStr>(v: &str, line: usize, what: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::parse(line, format!("`{v}` is not a valid {what}")))
}

fn at(line: usize) -> impl Fn(String) -> CliError {
    move |m| CliError::parse(line, m)
}

fn at_lib(line: usize) -> impl Fn(padlab::Error) -> CliError {
    move |e| CliError::parse(line, e.to_string())
}

impl Scene {
    pub fn parse(src: &str) -> Result<Scene, CliError> {
        let mut header: BTreeMap<String, (String, usize)> = BTreeMap::new();
        let mut blocks: Vec<Block> = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            if let Some(h) = text.strip_prefix('[') {
                let h = h
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::parse(line, "unterminated section header"))?;
                let mut parts = h.split_whitespace();
                let (Some(kind), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(CliError::parse(line, "section header must be `[kind NAME]`"));
                };
                if !["set", "schwartz", "cexp", "graph", "distribution"].contains(&kind) {
                    return Err(CliError::parse(line, format!("unknown section kind `{kind}`")));
                }
                blocks.push(Block {
                    kind: kind.into(),
                    name: name.into(),
                    line,
                    keys: Vec::new(),
                    values: Vec::new(),
                });
                continue;
            }
            if let Some(rest) = text.strip_prefix("value") {
                let rest = rest.trim_start();
                if rest.starts_with('(') {
                    let close = rest.find(')').ok_or_else(|| CliError::parse(line, "unterminated coset tuple"))?;
                    let point = parse_point(&rest[..=close]).map_err(at(line))?;
                    let lit = rest[close + 1..]
                        .trim_start()
                        .strip_prefix('=')
                        .ok_or_else(|| CliError::parse(line, "expected `=` after the coset tuple"))?;
                    let block = blocks
                        .last_mut()
                        .ok_or_else(|| CliError::parse(line, "`value` outside a section"))?;
                    block.values.push((point, lit.trim().to_string(), line));
                    continue;
                }
            }
            let (k, v) = text
                .split_once('=')
                .ok_or_else(|| CliError::parse(line, format!("expected `key = value`, found `{text}`")))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            match blocks.last_mut() {
                Some(b) => b.keys.push((k, v, line)),
                None => {
                    if header.insert(k.clone(), (v, line)).is_some() {
                        return Err(CliError::parse(line, format!("duplicate key `{k}`")));
                    }
                }
            }
        }
        let (pv, pl) = header
            .remove("p")
            .ok_or_else(|| CliError::parse(1, "scene must declare `p = <prime>`"))?;
        let p = Prime::new(int_value(&pv, pl, "prime")?).map_err(at_lib(pl))?;
        let n = match header.remove("n") {
            Some((v, l)) => int_value(&v, l, "dimension")?,
            None => 1,
        };
        if let Some((k, (_, l))) = header.into_iter().next() {
            return Err(CliError::parse(l, format!("unknown scene key `{k}`")));
        }
        let mut scene = Scene { p, n, items: Vec::new() };
        for b in &blocks {
            if scene.items.iter().any(|it| it.name == b.name) {
                return Err(CliError::parse(b.line, format!("name `{}` defined twice", b.name)));
            }
            let body = scene.parse_block(b)?;
            scene.items.push(Item {
                name: b.name.clone(),
                body,
            });
        }
        Ok(scene)
    }

    fn parse_block(&self, b: &Block) -> Result<Body, CliError> {
        let p = self.p;
        match b.kind.as_str() {
            "set" => {
                b.check_keys(&["boxes"])?;
                let (v, l) = b.require("boxes")?;
                Ok(Body::Set(parse_clopen(v, p).map_err(at(l))?))
            }
            "cexp" => {
                b.check_keys(&["expr"])?;
                let (v, l) = b.require("expr")?;
                Ok(Body::Cexp(parse(v, p).map_err(at_lib(l))?))
            }
            "schwartz" => {
                b.check_keys(&["dim", "support_level", "constancy_level"])?;
                let n = match b.get("dim") {
                    Some((v, l)) => int_value(v, l, "dimension")?,
                    None => self.n,
                };
                let (m, ml) = b.require("support_level")?;
                let (k, kl) = b.require("constancy_level")?;
                let m: i64 = int_value(m, ml, "level")?;
                let k: i64 = int_value(k, kl, "level")?;
                let shell = SchwartzBruhat::new(p, n, m, k, BTreeMap::new()).map_err(at_lib(kl))?;
                let mut table = BTreeMap::new();
                for (x, lit, l) in &b.values {
                    if x.len() != n {
                        return Err(CliError::parse(*l, format!("coset tuple has {} coordinates, expected {n}", x.len())));
                    }
                    let idx = shell
                        .index_at(x)
                        .ok_or_else(|| CliError::parse(*l, format!("{} lies outside the support box", fmt_point(x))))?;
                    let v = parse_constant(lit, p).map_err(at_lib(*l))?;
                    if table.insert(idx, v).is_some() {
                        return Err(CliError::parse(*l, format!("coset of {} given twice", fmt_point(x))));
                    }
                }
                Ok(Body::Schwartz(SchwartzBruhat::new(p, n, m, k, table).map_err(at_lib(b.line))?))
            }
            "graph" => {
                b.check_keys(&["point", "base", "coords", "map", "exclude"])?;
                if let Some((v, l)) = b.get("point") {
                    if b.keys.len() > 1 {
                        return Err(CliError::parse(l, "a point graph takes no other keys"));
                    }
                    return Ok(Body::Graph(GraphManifold::point(p, parse_point(v).map_err(at(l))?)));
                }
                let (v, l) = b.require("base")?;
                let base = parse_clopen(v, p).map_err(at(l))?;
                let map = match b.get("map") {
                    Some((v, l)) => split_list(v)
                        .iter()
                        .map(|t| parse_term(t).map_err(at_lib(l)))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                let coords = match b.get("coords") {
                    Some((v, l)) => split_list(v)
                        .iter()
                        .map(|c| {
                            let c: usize = int_value(c, l, "coordinate")?;
                            c.checked_sub(1).ok_or_else(|| CliError::parse(l, "coordinates start at 1"))
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                    None => (0..base.dim()).collect(),
                };
                let mut w = GraphManifold::new(base, coords, map).map_err(at_lib(b.line))?;
                if let Some((v, l)) = b.get("exclude") {
                    w = w.excluding(parse_points(v).map_err(at(l))?).map_err(at_lib(l))?;
                }
                Ok(Body::Graph(w))
            }
            "distribution" => self.parse_distribution(b).map(Body::Distribution),
            _ => unreachable!("kinds are checked at the header"),
        }
    }

    fn set_ref(&self, v: &str, line: usize) -> Result<SetRef, CliError> {
        if v.starts_with("box(") || v.starts_with("empty(") {
            Ok(SetRef::Inline(parse_clopen(v, self.p).map_err(at(line))?))
        } else {
            self.expect_kind(v, "set", line)?;
            Ok(SetRef::Named(v.to_string()))
        }
    }

    fn expect_kind(&self, name: &str, kind: &str, line: usize) -> Result<(), CliError> {
        match self.items.iter().find(|it| it.name == name) {
            Some(it) if it.body.kind() == kind => Ok(()),
            Some(it) => Err(CliError::parse(line, format!("`{name}` is a {}, expected a {kind}", it.body.kind()))),
            None => Err(CliError::parse(line, format!("unknown {kind} `{name}` (define it above its first use)"))),
        }
    }

    fn parse_distribution(&self, b: &Block) -> Result<DistSpec, CliError> {
        let (kind, kl) = b.require("kind")?;
        match kind {
            "dirac" => {
                b.check_keys(&["kind", "point"])?;
                let (v, l) = b.require("point")?;
                Ok(DistSpec::Dirac(parse_point(v).map_err(at(l))?))
            }
            "haar" => {
                b.check_keys(&["kind", "set"])?;
                let (v, l) = b.require("set")?;
                Ok(DistSpec::Haar(self.set_ref(v, l)?))
            }
            "graph" => {
                b.check_keys(&["kind", "manifold"])?;
                let (v, l) = b.require("manifold")?;
                self.expect_kind(v, "graph", l)?;
                Ok(DistSpec::Graph(v.into()))
            }
            "density" => {
                b.check_keys(&["kind", "expr", "set", "singular"])?;
                let (e, el) = b.require("expr")?;
                self.expect_kind(e, "cexp", el)?;
                let (s, sl) = b.require("set")?;
                let singular = match b.get("singular") {
                    Some(("true", _)) => true,
                    Some(("false", _)) | None => false,
                    Some((v, l)) => return Err(CliError::parse(l, format!("`singular` must be true or false, found `{v}`"))),
                };
                Ok(DistSpec::Density {
                    expr: e.into(),
                    set: self.set_ref(s, sl)?,
                    singular,
                })
            }
            "loci" => {
                b.check_keys(&["kind", "expr", "strata"])?;
                let (e, el) = b.require("expr")?;
                self.expect_kind(e, "cexp", el)?;
                let (s, sl) = b.require("strata")?;
                let strata = split_list(s);
                for s in &strata {
                    self.expect_kind(s, "graph", sl)?;
                }
                Ok(DistSpec::Loci { expr: e.into(), strata })
            }
            "pushforward" => {
                b.check_keys(&["kind", "inner", "f", "exponent", "chart", "prec"])?;
                let (inner, il) = b.require("inner")?;
                self.expect_kind(inner, "distribution", il)?;
                let (f, fl) = b.require("f")?;
                let f = f
                    .split(';')
                    .map(|t| parse_term(t.trim()).map_err(at_lib(fl)))
                    .collect::<Result<Vec<_>, _>>()?;
                let (e, el) = b.require("exponent")?;
                let (c, cl) = b.require("chart")?;
                let prec = match b.get("prec") {
                    Some((v, l)) => int_value(v, l, "precision")?,
                    None => DEFAULT_PREC,
                };
                Ok(DistSpec::Pushforward {
                    inner: inner.into(),
                    f,
                    exponent: int_value(e, el, "exponent")?,
                    chart: int_value(c, cl, "chart index")?,
                    prec,
                })
            }
            other => Err(CliError::parse(kl, format!("unknown distribution kind `{other}`"))),
        }
    }

    /// Canonical text; `Scene::parse` reads it back to an equal scene.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "n = {}", self.n);
        for it in &self.items {
            let _ = writeln!(s, "\n[{} {}]", it.body.kind(), it.name);
            match &it.body {
                Body::Set(set) => {
                    let _ = writeln!(s, "boxes = {set}");
                }
                Body::Cexp(e) => {
                    let _ = writeln!(s, "expr = {e}");
                }
                Body::Schwartz(f) => {
                    if f.dim() != self.n {
                        let _ = writeln!(s, "dim = {}", f.dim());
                    }
                    let _ = writeln!(s, "support_level = {}", f.support_level());
                    let _ = writeln!(s, "constancy_level = {}", f.constancy_level());
                    for (idx, v) in f.table() {
                        let _ = writeln!(s, "value {} = {v}", fmt_point(&f.point(idx)));
                    }
                }
                Body::Graph(w) => write_graph(&mut s, w),
                Body::Distribution(d) => write_distribution(&mut s, d),
            }
        }
        s
    }

    fn item(&self, name: &str, kind: &str) -> Result<&Body, CliError> {
        match self.items.iter().find(|it| it.name == name) {
            Some(it) if it.body.kind() == kind => Ok(&it.body),
            Some(it) => Err(CliError::Usage(format!("`{name}` is a {}, not a {kind}", it.body.kind()))),
            None => Err(CliError::Usage(format!("no {kind} named `{name}` in the scene"))),
        }
    }

    pub fn schwartz(&self, name: &str) -> Result<&SchwartzBruhat, CliError> {
        match self.item(name, "schwartz")? {
            Body::Schwartz(f) => Ok(f),
            _ => unreachable!(),
        }
    }

    pub fn cexp(&self, name: &str) -> Result<&CexpExpr, CliError> {
        match self.item(name, "cexp")? {
            Body::Cexp(e) => Ok(e),
            _ => unreachable!(),
        }
    }

    pub fn set(&self, name: &str) -> Result<&ClopenSet, CliError> {
        match self.item(name, "set")? {
            Body::Set(x) => Ok(x),
            _ => unreachable!(),
        }
    }

    pub fn graph(&self, name: &str) -> Result<&GraphManifold, CliError> {
        match self.item(name, "graph")? {
            Body::Graph(w) => Ok(w),
            _ => unreachable!(),
        }
    }

    /// A set by name, or inline box-union text.
    pub fn resolve_set(&self, text: &str) -> Result<ClopenSet, CliError> {
        if text.starts_with("box(") || text.starts_with("empty(") {
            parse_clopen(text, self.p).map_err(CliError::Usage)
        } else {
            self.set(text).cloned()
        }
    }

    fn set_of(&self, r: &SetRef) -> Result<ClopenSet, CliError> {
        match r {
            SetRef::Named(n) => self.set(n).cloned(),
            SetRef::Inline(s) => Ok(s.clone()),
        }
    }

    pub fn distribution(&self, name: &str) -> Result<Distribution, CliError> {
        let Body::Distribution(spec) = self.item(name, "distribution")? else {
            unreachable!()
        };
        let p = self.p;
        let d = match spec {
            DistSpec::Dirac(a) => Distribution::dirac(p, a.clone()),
            DistSpec::Haar(r) => Distribution::haar_on(self.set_of(r)?),
            DistSpec::Graph(w) => Distribution::graph_measure(self.graph(w)?.clone())?,
            DistSpec::Density { expr, set, singular } => {
                let (e, x) = (self.cexp(expr)?.clone(), self.set_of(set)?);
                if *singular {
                    Distribution::density_singular(e, x)?
                } else {
                    Distribution::density(e, x)?
                }
            }
            DistSpec::Loci { expr, strata } => {
                let strata = strata
                    .iter()
                    .map(|s| self.graph(s).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                Distribution::loci(self.cexp(expr)?.clone(), strata)?
            }
            DistSpec::Pushforward { inner, f, exponent, chart, prec } => {
                let xi = self.distribution(inner)?;
                let n = xi.dim();
                let polys = f
                    .iter()
                    .map(|t| polynomial(t, n))
                    .collect::<Result<Vec<_>, _>>()?;
                let charts = resolve(&polys, p, *exponent, *prec)?;
                let c = charts.get(*chart).ok_or_else(|| {
                    CliError::Usage(format!("chart {chart} out of range (0..{})", charts.len()))
                })?;
                let cert = certify_resolution(&charts, &polys, DEFAULT_LEVEL, 0);
                if !cert.passes() {
                    return Err(CliError::Cert(cert.report()));
                }
                Distribution::pushforward_chart(&xi, c.chart_map(true))?
            }
        };
        Ok(d.with_label(name))
    }
}

/// A rational term that is a polynomial in `n` variables.
pub fn polynomial(t: &RationalTerm, n: usize) -> Result<Poly, CliError> {
    let (num, den) = t.to_fraction(n)?;
    match den.as_constant() {
        Some(c) => Ok(num.scale(&c.recip())),
        None => Err(CliError::Usage(format!("`{t}` is not a polynomial"))),
    }
}

fn write_graph(s: &mut String, w: &GraphManifold) {
    if w.is_point() {
        let pt: Vec<Rat> = w.embedding_terms().iter().map(|t| t.eval(&[]).expect("constant")).collect();
        let _ = writeln!(s, "point = {}", fmt_point(&pt));
        return;
    }
    let _ = writeln!(s, "base = {}", w.base());
    if w.base_coords().iter().enumerate().any(|(i, &c)| i != c) {
        let c: Vec<String> = w.base_coords().iter().map(|c| (c + 1).to_string()).collect();
        let _ = writeln!(s, "coords = {}", c.join(", "));
    }
    if !w.map().is_empty() {
        let m: Vec<String> = w.map().iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "map = {}", m.join(", "));
    }
    if !w.excluded().is_empty() {
        let _ = writeln!(s, "exclude = {}", fmt_points(w.excluded()));
    }
}

fn fmt_set_ref(r: &SetRef) -> String {
    match r {
        SetRef::Named(n) => n.clone(),
        SetRef::Inline(s) => s.to_string(),
    }
}

fn write_distribution(s: &mut String, d: &DistSpec) {
    let _ = match d {
        DistSpec::Dirac(a) => writeln!(s, "kind = dirac\npoint = {}", fmt_point(a)),
        DistSpec::Haar(r) => writeln!(s, "kind = haar\nset = {}", fmt_set_ref(r)),
        DistSpec::Graph(w) => writeln!(s, "kind = graph\nmanifold = {w}"),
        DistSpec::Density { expr, set, singular } => {
            let _ = writeln!(s, "kind = density\nexpr = {expr}\nset = {}", fmt_set_ref(set));
            if *singular {
                writeln!(s, "singular = true")
            } else {
                Ok(())
            }
        }
        DistSpec::Loci { expr, strata } => writeln!(s, "kind = loci\nexpr = {expr}\nstrata = {}", strata.join(", ")),
        DistSpec::Pushforward { inner, f, exponent, chart, prec } => {
            let f: Vec<String> = f.iter().map(ToString::to_string).collect();
            writeln!(
                s,
                "kind = pushforward\ninner = {inner}\nf = {}\nexponent = {exponent}\nchart = {chart}\nprec = {prec}",
                f.join("; ")
            )
        }
    };
}
