//! The plain-text workspace format.
//!
//! A workspace is a sequence of `[kind NAME ...]` sections, each followed by
//! `key: value` lines. Values continue onto following lines that do not
//! start a new key. List items are separated by commas or line breaks.
//! `//` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use impasm::algebra::ImplicativeAlgebra;
use impasm::assembly::{AsmMorphism, Assembly};
use impasm::excomp::{validate_pseudo_groupoid, PseudoGroupoid};
use impasm::lambda::{parse, Term};
use impasm::order::{ElemSet, ImplicativeStructure, Lattice};
use impasm::seta::{validate_frel, validate_implicative_set, FunctionalRelation, ImplicativeSet};
use impasm::Elem;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraEntry {
    pub name: String,
    pub algebra: ImplicativeAlgebra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetEntry {
    pub name: String,
    pub algebra: String,
    pub members: ElemSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssemblyEntry {
    pub name: String,
    pub algebra: String,
    pub assembly: Arc<Assembly>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismEntry {
    pub name: String,
    pub source: String,
    pub target: String,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidEntry {
    pub name: String,
    pub vertices: String,
    pub edges: String,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub rho: Vec<usize>,
    pub sigma: Vec<usize>,
    /// `(e, f) -> g`, sorted.
    pub tau: BTreeMap<(usize, usize), usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetEntry {
    pub name: String,
    pub algebra: String,
    pub set: Arc<ImplicativeSet>,
}

/// Source and target name an implicative set or a groupoid, the latter
/// standing for its image under `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationEntry {
    pub name: String,
    pub source: String,
    pub target: String,
    pub values: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermEntry {
    pub name: String,
    pub term: Term,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Workspace {
    pub algebras: Vec<AlgebraEntry>,
    pub subsets: Vec<SubsetEntry>,
    pub assemblies: Vec<AssemblyEntry>,
    pub morphisms: Vec<MorphismEntry>,
    pub groupoids: Vec<GroupoidEntry>,
    pub sets: Vec<SetEntry>,
    pub relations: Vec<RelationEntry>,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub validate: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { validate: true }
    }
}

struct Section {
    file: String,
    line: usize,
    kind: String,
    head: Vec<String>,
    /// `(line, key, value)`; a term body is stored under the key `body`.
    fields: Vec<(usize, String, String)>,
}

impl Section {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse { file: self.file.clone(), line, message: message.into() }
    }

    fn here(&self, message: impl Into<String>) -> CliError {
        self.err(self.line, message)
    }

    fn field(&self, key: &str) -> Result<(usize, &str), CliError> {
        self.field_opt(key).ok_or_else(|| self.here(format!("missing `{key}:`")))
    }

    fn field_opt(&self, key: &str) -> Option<(usize, &str)> {
        self.fields.iter().find(|f| f.1 == key).map(|f| (f.0, f.2.as_str()))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let mut seen = BTreeSet::new();
        for (line, key, _) in &self.fields {
            if !allowed.contains(&key.as_str()) {
                return Err(self.err(*line, format!("unexpected key `{key}` in {} section", self.kind)));
            }
            if !seen.insert(key) {
                return Err(self.err(*line, format!("duplicate key `{key}`")));
            }
        }
        Ok(())
    }

    fn name(&self) -> &str {
        &self.head[0]
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find("//") {
        Some(i) => &line[..i],
        None => line,
    }
}

fn key_of(line: &str) -> Option<(&str, &str)> {
    if line.starts_with(char::is_whitespace) {
        return None;
    }
    let (k, v) = line.split_once(':')?;
    if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        Some((k, v.trim()))
    } else {
        None
    }
}

fn split_sections(file: &str, text: &str) -> Result<Vec<Section>, CliError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = strip_comment(raw).trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let t = line.trim();
        if t.starts_with('[') {
            let inner = t
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| CliError::Parse { file: file.into(), line: n, message: "unterminated section header".into() })?;
            let mut words = inner.split_whitespace().map(String::from);
            let kind = words.next().unwrap_or_default();
            let head: Vec<String> = words.collect();
            if head.is_empty() {
                return Err(CliError::Parse { file: file.into(), line: n, message: "section header needs a name".into() });
            }
            out.push(Section { file: file.into(), line: n, kind, head, fields: Vec::new() });
            continue;
        }
        let sec = out
            .last_mut()
            .ok_or_else(|| CliError::Parse { file: file.into(), line: n, message: "content before the first section".into() })?;
        if sec.kind == "term" {
            match sec.fields.last_mut() {
                Some(f) => {
                    f.2.push('\n');
                    f.2.push_str(t);
                }
                None => sec.fields.push((n, "body".into(), t.into())),
            }
            continue;
        }
        match key_of(line) {
            Some((k, v)) => sec.fields.push((n, k.into(), v.into())),
            None => match sec.fields.last_mut() {
                Some(f) => {
                    f.2.push('\n');
                    f.2.push_str(t);
                }
                None => return Err(sec.err(n, format!("expected `key: value`, found `{t}`"))),
            },
        }
    }
    Ok(out)
}

fn items(value: &str) -> impl Iterator<Item = &str> {
    value.split([',', '\n']).map(str::trim).filter(|s| !s.is_empty())
}

fn words(value: &str) -> Vec<&str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect()
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || ",()[]:=/".contains(c)) && !s.contains("->") && !s.contains("<=")
}

/// Parses `(x, y)`.
fn pair(s: &str) -> Option<(&str, &str)> {
    let (x, y) = s.trim().strip_prefix('(')?.strip_suffix(')')?.split_once(',')?;
    Some((x.trim(), y.trim()))
}

/// Resolves every element of a map given as `from -> to` items.
fn parse_map(
    sec: &Section,
    key: &str,
    domain: &[String],
    codomain: &[String],
) -> Result<Vec<usize>, CliError> {
    let (line, v) = sec.field(key)?;
    let mut out = vec![None; domain.len()];
    for item in items(v) {
        let (x, y) = item.split_once("->").ok_or_else(|| sec.err(line, format!("`{key}`: expected `x -> y`, found `{item}`")))?;
        let (x, y) = (x.trim(), y.trim());
        let i = domain.iter().position(|d| d == x).ok_or_else(|| sec.err(line, format!("`{key}`: unknown point `{x}`")))?;
        let j = codomain.iter().position(|d| d == y).ok_or_else(|| sec.err(line, format!("`{key}`: unknown point `{y}`")))?;
        if out[i].replace(j).is_some() {
            return Err(sec.err(line, format!("`{key}`: `{x}` is mapped twice")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, j)| j.ok_or_else(|| sec.err(line, format!("`{key}`: no image for `{}`", domain[i]))))
        .collect()
}

/// Resolves a table of `(x, y) = e` items over `rows x cols`.
fn parse_matrix(
    sec: &Section,
    key: &str,
    rows: &[String],
    cols: &[String],
    a: &ImplicativeAlgebra,
) -> Result<Vec<Elem>, CliError> {
    let (line, v) = sec.field(key)?;
    let mut out = vec![None; rows.len() * cols.len()];
    for item in items_paired(v) {
        let (lhs, rhs) = item.split_once('=').ok_or_else(|| sec.err(line, format!("`{key}`: expected `(x, y) = value`, found `{item}`")))?;
        let (x, y) = pair(lhs).ok_or_else(|| sec.err(line, format!("`{key}`: expected a pair, found `{}`", lhs.trim())))?;
        let i = rows.iter().position(|d| d == x).ok_or_else(|| sec.err(line, format!("`{key}`: unknown point `{x}`")))?;
        let j = cols.iter().position(|d| d == y).ok_or_else(|| sec.err(line, format!("`{key}`: unknown point `{y}`")))?;
        let e = a.elem(rhs.trim()).map_err(|e| sec.err(line, e.to_string()))?;
        if out[i * cols.len() + j].replace(e).is_some() {
            return Err(sec.err(line, format!("`{key}`: ({x}, {y}) given twice")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(k, e)| {
            e.ok_or_else(|| sec.err(line, format!("`{key}`: no value for ({}, {})", rows[k / cols.len()], cols[k % cols.len()])))
        })
        .collect()
}

/// Splits on commas outside parentheses and on line breaks.
fn items_paired(value: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | '\n' if depth == 0 => {
                out.push(&value[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&value[start..]);
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn names(sec: &Section, key: &str) -> Result<Vec<String>, CliError> {
    let (line, v) = sec.field(key)?;
    let ws = words(v);
    let mut seen = BTreeSet::new();
    for w in &ws {
        if !valid_name(w) {
            return Err(sec.err(line, format!("`{w}` is not a valid name")));
        }
        if !seen.insert(*w) {
            return Err(sec.err(line, format!("duplicate name `{w}`")));
        }
    }
    Ok(ws.into_iter().map(String::from).collect())
}

fn elem_set(sec: &Section, line: usize, ws: &[&str], a: &ImplicativeStructure) -> Result<ElemSet, CliError> {
    ws.iter().map(|w| a.elem(w).map_err(|e| sec.err(line, e.to_string()))).collect()
}

/// Expects header `NAME <word> OTHER`.
fn head_over<'a>(sec: &'a Section, word: &str) -> Result<&'a str, CliError> {
    match sec.head.as_slice() {
        [_, w, other] if w == word => Ok(other),
        _ => Err(sec.here(format!("expected `[{} NAME {word} NAME]`", sec.kind))),
    }
}

/// Expects header `NAME : A -> B`.
fn head_arrow(sec: &Section) -> Result<(&str, &str), CliError> {
    match sec.head.as_slice() {
        [_, c, a, arrow, b] if c == ":" && arrow == "->" => Ok((a, b)),
        _ => Err(sec.here(format!("expected `[{} NAME : SOURCE -> TARGET]`", sec.kind))),
    }
}

impl Workspace {
    pub fn parse(file: &str, text: &str, opts: LoadOptions) -> Result<Workspace, CliError> {
        let mut ws = Workspace::default();
        ws.extend(file, text, opts)?;
        Ok(ws)
    }

    /// Loads several files into one workspace, in order.
    pub fn load(paths: &[std::path::PathBuf], opts: LoadOptions) -> Result<Workspace, CliError> {
        let mut ws = Workspace::default();
        for p in paths {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            ws.extend(&p.display().to_string(), &text, opts)?;
        }
        Ok(ws)
    }

    pub fn extend(&mut self, file: &str, text: &str, opts: LoadOptions) -> Result<(), CliError> {
        for sec in split_sections(file, text)? {
            if !valid_name(sec.name()) {
                return Err(sec.here(format!("`{}` is not a valid name", sec.name())));
            }
            if self.kind_of(sec.name()).is_some() {
                return Err(sec.here(format!("`{}` is already defined", sec.name())));
            }
            match sec.kind.as_str() {
                "algebra" => self.add_algebra(&sec, opts)?,
                "subset" => self.add_subset(&sec, opts)?,
                "assembly" => self.add_assembly(&sec, opts)?,
                "morphism" => self.add_morphism(&sec, opts)?,
                "groupoid" => self.add_groupoid(&sec, opts)?,
                "implicative-set" => self.add_set(&sec, opts)?,
                "relation" => self.add_relation(&sec, opts)?,
                "term" => self.add_term(&sec)?,
                k => return Err(sec.here(format!("unknown section kind `{k}`"))),
            }
        }
        Ok(())
    }

    /// The section kind defining `name`, if any.
    pub fn kind_of(&self, name: &str) -> Option<&'static str> {
        let names: [(&'static str, Vec<&str>); 8] = [
            ("algebra", self.algebras.iter().map(|e| e.name.as_str()).collect()),
            ("subset", self.subsets.iter().map(|e| e.name.as_str()).collect()),
            ("assembly", self.assemblies.iter().map(|e| e.name.as_str()).collect()),
            ("morphism", self.morphisms.iter().map(|e| e.name.as_str()).collect()),
            ("groupoid", self.groupoids.iter().map(|e| e.name.as_str()).collect()),
            ("implicative-set", self.sets.iter().map(|e| e.name.as_str()).collect()),
            ("relation", self.relations.iter().map(|e| e.name.as_str()).collect()),
            ("term", self.terms.iter().map(|e| e.name.as_str()).collect()),
        ];
        names.into_iter().find(|(_, ns)| ns.contains(&name)).map(|(k, _)| k)
    }

    fn add_algebra(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["elements", "order", "imp", "separator"])?;
        let elements = names(sec, "elements")?;
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some((line, v)) = sec.field_opt("order") {
            for item in items(v) {
                let chain: Vec<&str> = item.split("<=").map(str::trim).collect();
                if chain.len() < 2 || chain.iter().any(|c| c.is_empty()) {
                    return Err(sec.err(line, format!("expected `a <= b`, found `{item}`")));
                }
                for w in chain.windows(2) {
                    pairs.push((w[0].into(), w[1].into()));
                }
            }
        }
        let lattice = Lattice::new(&elements, &pairs).map_err(|e| sec.here(e.to_string()))?;
        let (line, imp) = sec.field("imp")?;
        let mut imp_items = items(imp);
        let structure = match imp_items.next() {
            Some("heyting") => {
                if let Some(extra) = imp_items.next() {
                    return Err(sec.err(line, format!("unexpected `{extra}` after `heyting`")));
                }
                ImplicativeStructure::derive_heyting(lattice).map_err(|e| sec.err(line, e.to_string()))?
            }
            Some("table") => {
                let mut table = BTreeMap::new();
                for row in imp_items {
                    let parsed = row
                        .split_once("->")
                        .and_then(|(a, rest)| rest.split_once('=').map(|(b, c)| (a.trim(), b.trim(), c.trim())));
                    let (a, b, c) = parsed.ok_or_else(|| sec.err(line, format!("expected `a -> b = c`, found `{row}`")))?;
                    let get = |n: &str| lattice.elem(n).map_err(|e| sec.err(line, e.to_string()));
                    if table.insert((get(a)?, get(b)?), get(c)?).is_some() {
                        return Err(sec.err(line, format!("`{a} -> {b}` given twice")));
                    }
                }
                for x in lattice.elems() {
                    for y in lattice.elems() {
                        if !table.contains_key(&(x, y)) {
                            return Err(sec.err(
                                line,
                                format!("implication table is incomplete: missing `{} -> {}`", lattice.name(x), lattice.name(y)),
                            ));
                        }
                    }
                }
                let l = lattice.clone();
                if opts.validate {
                    ImplicativeStructure::new(l, |x, y| table[&(x, y)]).map_err(|e| sec.err(line, e.to_string()))?
                } else {
                    ImplicativeStructure::from_table(l, |x, y| table[&(x, y)])
                }
            }
            _ => return Err(sec.err(line, "expected `heyting` or `table`")),
        };
        let (line, sep) = sec.field("separator")?;
        let ws = words(sep);
        let (mode, rest) = ws.split_first().ok_or_else(|| sec.err(line, "expected `generators ...` or `members ...`"))?;
        let set = elem_set(sec, line, rest, &structure)?;
        let members = match *mode {
            "generators" => structure.lattice().up_closure(set),
            "members" => set,
            m => return Err(sec.err(line, format!("expected `generators` or `members`, found `{m}`"))),
        };
        if opts.validate {
            let report = ImplicativeAlgebra::unchecked(structure.clone(), members).validate();
            if let Some(v) = report.violations.first() {
                return Err(sec.err(line, format!("separator: {v}")));
            }
        }
        let algebra = canonical_algebra(structure, members);
        self.algebras.push(AlgebraEntry { name: sec.name().into(), algebra });
        Ok(())
    }

    pub fn algebra(&self, name: &str) -> Result<&ImplicativeAlgebra, CliError> {
        self.algebras
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.algebra)
            .ok_or_else(|| self.unknown("algebra", name))
    }

    fn unknown(&self, kind: &'static str, name: &str) -> CliError {
        match self.kind_of(name) {
            Some(k) => CliError::Usage(format!("`{name}` is a {k}, not a {kind}")),
            None => CliError::Unknown { kind, name: name.into() },
        }
    }

    fn resolve<'a>(&self, sec: &Section, r: Result<&'a ImplicativeAlgebra, CliError>) -> Result<&'a ImplicativeAlgebra, CliError> {
        r.map_err(|e| sec.here(e.to_string()))
    }

    fn add_subset(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["members"])?;
        let alg_name = head_over(sec, "of")?;
        let a = self.resolve(sec, self.algebra(alg_name))?;
        let (line, v) = sec.field("members")?;
        let members = elem_set(sec, line, &words(v), a.structure())?;
        if opts.validate {
            if members.is_empty() {
                return Err(sec.err(line, "subset is empty"));
            }
            if !members.is_subset(a.separator()) {
                return Err(sec.err(line, format!("{} lies outside the separator", a.fmt_set(members.minus(a.separator())))));
            }
        }
        self.subsets.push(SubsetEntry { name: sec.name().into(), algebra: alg_name.into(), members });
        Ok(())
    }

    pub fn subset(&self, name: &str) -> Result<&SubsetEntry, CliError> {
        self.subsets.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("subset", name))
    }

    fn add_assembly(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["carrier", "exist"])?;
        let alg_name = head_over(sec, "over")?;
        let a = self.resolve(sec, self.algebra(alg_name))?;
        let carrier = names(sec, "carrier")?;
        let (line, v) = sec.field("exist")?;
        let mut exist = vec![None; carrier.len()];
        for item in items(v) {
            let (x, e) = item.split_once('=').ok_or_else(|| sec.err(line, format!("expected `x = value`, found `{item}`")))?;
            let i = carrier.iter().position(|c| c == x.trim()).ok_or_else(|| sec.err(line, format!("unknown point `{}`", x.trim())))?;
            let e = a.elem(e.trim()).map_err(|err| sec.err(line, err.to_string()))?;
            if exist[i].replace(e).is_some() {
                return Err(sec.err(line, format!("`{}` given twice", x.trim())));
            }
        }
        let exist = exist
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| sec.err(line, format!("no existence value for `{}`", carrier[i]))))
            .collect::<Result<Vec<Elem>, CliError>>()?;
        let assembly = if opts.validate { Assembly::new(carrier, exist, a) } else { Assembly::unchecked(carrier, exist) }
            .map_err(|e| sec.err(line, e.to_string()))?;
        self.assemblies.push(AssemblyEntry { name: sec.name().into(), algebra: alg_name.into(), assembly: Arc::new(assembly) });
        Ok(())
    }

    pub fn assembly(&self, name: &str) -> Result<&AssemblyEntry, CliError> {
        self.assemblies.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("assembly", name))
    }

    fn add_morphism(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["map"])?;
        let (src, tgt) = head_arrow(sec)?;
        let x = self.assembly(src).map_err(|e| sec.here(e.to_string()))?;
        let y = self.assembly(tgt).map_err(|e| sec.here(e.to_string()))?;
        if x.algebra != y.algebra {
            return Err(sec.here(format!("`{src}` and `{tgt}` live over different algebras")));
        }
        let map = parse_map(sec, "map", x.assembly.labels(), y.assembly.labels())?;
        let entry = MorphismEntry { name: sec.name().into(), source: src.into(), target: tgt.into(), map };
        if opts.validate {
            self.build_morphism(&entry).map_err(|e| sec.here(e.to_string()))?;
        }
        self.morphisms.push(entry);
        Ok(())
    }

    pub fn morphism(&self, name: &str) -> Result<&MorphismEntry, CliError> {
        self.morphisms.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("morphism", name))
    }

    /// The algebra a morphism lives over.
    pub fn morphism_algebra(&self, m: &MorphismEntry) -> Result<&ImplicativeAlgebra, CliError> {
        self.algebra(&self.assembly(&m.source)?.algebra)
    }

    /// Fails when the map is not tracked.
    pub fn build_morphism(&self, m: &MorphismEntry) -> Result<AsmMorphism, CliError> {
        let (x, y) = (self.assembly(&m.source)?, self.assembly(&m.target)?);
        let a = self.algebra(&x.algebra)?;
        Ok(AsmMorphism::new(x.assembly.clone(), y.assembly.clone(), m.map.clone(), a)?)
    }

    fn add_groupoid(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["vertices", "edges", "s", "t", "rho", "sigma", "tau"])?;
        if sec.head.len() != 1 {
            return Err(sec.here("expected `[groupoid NAME]`"));
        }
        let one = |key: &str| -> Result<String, CliError> {
            let (line, v) = sec.field(key)?;
            match words(v).as_slice() {
                [n] => Ok(n.to_string()),
                _ => Err(sec.err(line, format!("`{key}` takes one assembly name"))),
            }
        };
        let (vn, en) = (one("vertices")?, one("edges")?);
        let v = self.assembly(&vn).map_err(|e| sec.here(e.to_string()))?;
        let e = self.assembly(&en).map_err(|e| sec.here(e.to_string()))?;
        if v.algebra != e.algebra {
            return Err(sec.here("vertices and edges live over different algebras"));
        }
        let (vl, el) = (v.assembly.labels(), e.assembly.labels());
        let s = parse_map(sec, "s", el, vl)?;
        let t = parse_map(sec, "t", el, vl)?;
        let rho = parse_map(sec, "rho", vl, el)?;
        let sigma = parse_map(sec, "sigma", el, el)?;
        let (line, tv) = sec.field("tau")?;
        let mut tau = BTreeMap::new();
        for item in items_paired(tv) {
            let (lhs, g) = item.split_once("->").ok_or_else(|| sec.err(line, format!("`tau`: expected `(e, f) -> g`, found `{item}`")))?;
            let (x, y) = pair(lhs).ok_or_else(|| sec.err(line, format!("`tau`: expected a pair, found `{}`", lhs.trim())))?;
            let idx = |n: &str| el.iter().position(|l| l == n).ok_or_else(|| sec.err(line, format!("`tau`: unknown edge `{n}`")));
            if tau.insert((idx(x)?, idx(y)?), idx(g.trim())?).is_some() {
                return Err(sec.err(line, format!("`tau`: ({x}, {y}) given twice")));
            }
        }
        let entry = GroupoidEntry { name: sec.name().into(), vertices: vn, edges: en, s, t, rho, sigma, tau };
        let built = self.build_groupoid(&entry).map_err(|e| sec.here(e.to_string()))?;
        if opts.validate {
            let a = self.algebra(&v.algebra)?;
            let report = validate_pseudo_groupoid(&built, a);
            if let Some(v) = report.violations.first() {
                return Err(sec.here(format!("not a pseudo-groupoid: {v}")));
            }
        }
        self.groupoids.push(entry);
        Ok(())
    }

    pub fn groupoid(&self, name: &str) -> Result<&GroupoidEntry, CliError> {
        self.groupoids.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("groupoid", name))
    }

    pub fn groupoid_algebra(&self, g: &GroupoidEntry) -> Result<&ImplicativeAlgebra, CliError> {
        self.algebra(&self.assembly(&g.vertices)?.algebra)
    }

    /// Needs `s` and `t` tracked; the structure equations are not checked.
    pub fn build_groupoid(&self, g: &GroupoidEntry) -> Result<PseudoGroupoid, CliError> {
        let (v, e) = (self.assembly(&g.vertices)?, self.assembly(&g.edges)?);
        let a = self.algebra(&v.algebra)?;
        let s = AsmMorphism::new(e.assembly.clone(), v.assembly.clone(), g.s.clone(), a)
            .map_err(|err| CliError::Usage(format!("s: {err}")))?;
        let t = AsmMorphism::new(e.assembly.clone(), v.assembly.clone(), g.t.clone(), a)
            .map_err(|err| CliError::Usage(format!("t: {err}")))?;
        Ok(PseudoGroupoid::new(s, t, g.rho.clone(), g.sigma.clone(), |x, y| g.tau.get(&(x, y)).copied(), a)?)
    }

    fn add_set(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["carrier", "eq"])?;
        let alg_name = head_over(sec, "over")?;
        let a = self.resolve(sec, self.algebra(alg_name))?;
        let carrier = names(sec, "carrier")?;
        let eq = parse_matrix(sec, "eq", &carrier, &carrier, a)?;
        let set = ImplicativeSet::new(carrier, eq).map_err(|e| sec.here(e.to_string()))?;
        if opts.validate {
            let r = validate_implicative_set(&set, a);
            if let Some(c) = r.checks.iter().find(|c| !c.holds) {
                return Err(sec.here(format!("not an implicative set: {} is {}", c.name, c.value)));
            }
        }
        self.sets.push(SetEntry { name: sec.name().into(), algebra: alg_name.into(), set: Arc::new(set) });
        Ok(())
    }

    pub fn set(&self, name: &str) -> Result<&SetEntry, CliError> {
        self.sets.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("implicative-set", name))
    }

    /// An implicative set by name, or the image under `K` of a groupoid.
    pub fn set_like(&self, name: &str) -> Result<(Arc<ImplicativeSet>, &ImplicativeAlgebra), CliError> {
        if let Ok(s) = self.set(name) {
            return Ok((s.set.clone(), self.algebra(&s.algebra)?));
        }
        if let Ok(g) = self.groupoid(name) {
            let a = self.groupoid_algebra(g)?;
            return Ok((Arc::new(impasm::seta::k_object(&self.build_groupoid(g)?, a)), a));
        }
        Err(match self.kind_of(name) {
            Some(k) => CliError::Usage(format!("`{name}` is a {k}, not an implicative set or groupoid")),
            None => CliError::Unknown { kind: "implicative set or groupoid", name: name.into() },
        })
    }

    fn add_relation(&mut self, sec: &Section, opts: LoadOptions) -> Result<(), CliError> {
        sec.check_keys(&["values"])?;
        let (src, tgt) = head_arrow(sec)?;
        let (x, a) = self.set_like(src).map_err(|e| sec.here(e.to_string()))?;
        let (y, b) = self.set_like(tgt).map_err(|e| sec.here(e.to_string()))?;
        if a != b {
            return Err(sec.here(format!("`{src}` and `{tgt}` live over different algebras")));
        }
        let values = parse_matrix(sec, "values", x.labels(), y.labels(), a)?;
        if opts.validate {
            let rel = FunctionalRelation::new(x, y, values.clone()).map_err(|e| sec.here(e.to_string()))?;
            let r = validate_frel(&rel, a);
            if let Some(c) = r.checks.iter().find(|c| !c.holds) {
                return Err(sec.here(format!("not a functional relation: {} is {}", c.name, c.value)));
            }
        }
        self.relations.push(RelationEntry { name: sec.name().into(), source: src.into(), target: tgt.into(), values });
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Result<&RelationEntry, CliError> {
        self.relations.iter().find(|e| e.name == name).ok_or_else(|| self.unknown("relation", name))
    }

    pub fn build_relation(&self, r: &RelationEntry) -> Result<(FunctionalRelation, &ImplicativeAlgebra), CliError> {
        let (x, a) = self.set_like(&r.source)?;
        let (y, _) = self.set_like(&r.target)?;
        Ok((FunctionalRelation::new(x, y, r.values.clone())?, a))
    }

    fn add_term(&mut self, sec: &Section) -> Result<(), CliError> {
        if sec.head.len() != 1 {
            return Err(sec.here("expected `[term NAME]`"));
        }
        let (line, body) = sec.field("body").map_err(|_| sec.here("term section is empty"))?;
        let term = parse(body).map_err(|e| match e {
            impasm::Error::Syntax { line: l, col, message } => {
                sec.err(line + l - 1, format!("column {col}: {message}"))
            }
            other => sec.err(line, other.to_string()),
        })?;
        self.terms.push(TermEntry { name: sec.name().into(), term });
        Ok(())
    }

    pub fn term(&self, name: &str) -> Option<&TermEntry> {
        self.terms.iter().find(|e| e.name == name)
    }

    /// Re-runs every validation and lists the failures.
    pub fn validation_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.algebras {
            for v in e.algebra.validate().violations {
                out.push(format!("algebra {}: separator: {v}", e.name));
            }
            for v in e.algebra.structure().validate() {
                out.push(format!("algebra {}: {v}", e.name));
            }
        }
        for e in &self.subsets {
            if let Ok(a) = self.algebra(&e.algebra) {
                if e.members.is_empty() {
                    out.push(format!("subset {}: empty", e.name));
                } else if !e.members.is_subset(a.separator()) {
                    out.push(format!("subset {}: {} lies outside the separator", e.name, a.fmt_set(e.members.minus(a.separator()))));
                }
            }
        }
        for e in &self.assemblies {
            if let Ok(a) = self.algebra(&e.algebra) {
                for (i, &x) in e.assembly.exist_values().iter().enumerate() {
                    if !a.in_sep(x) {
                        out.push(format!("assembly {}: existence of `{}` is {}, outside the separator", e.name, e.assembly.label(i), a.name(x)));
                    }
                }
            }
        }
        for e in &self.morphisms {
            if let Err(err) = self.build_morphism(e) {
                out.push(format!("morphism {}: {err}", e.name));
            }
        }
        for e in &self.groupoids {
            match self.build_groupoid(e).and_then(|g| Ok((g, self.groupoid_algebra(e)?))) {
                Ok((g, a)) => {
                    for v in validate_pseudo_groupoid(&g, a).violations {
                        out.push(format!("groupoid {}: {v}", e.name));
                    }
                }
                Err(err) => out.push(format!("groupoid {}: {err}", e.name)),
            }
        }
        for e in &self.sets {
            if let Ok(a) = self.algebra(&e.algebra) {
                for c in validate_implicative_set(&e.set, a).checks.iter().filter(|c| !c.holds) {
                    out.push(format!("implicative-set {}: {} is {}", e.name, c.name, c.value));
                }
            }
        }
        for e in &self.relations {
            match self.build_relation(e) {
                Ok((rel, a)) => {
                    for c in validate_frel(&rel, a).checks.iter().filter(|c| !c.holds) {
                        out.push(format!("relation {}: {} is {}", e.name, c.name, c.value));
                    }
                }
                Err(err) => out.push(format!("relation {}: {err}", e.name)),
            }
        }
        out
    }

    /// The canonical text form; parsing it gives back an equal workspace.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for e in &self.algebras {
            emit_algebra(&mut out, &e.name, &e.algebra);
        }
        for e in &self.subsets {
            let a = self.algebra(&e.algebra).expect("resolved on load");
            let _ = writeln!(out, "[subset {} of {}]\nmembers: {}\n", e.name, e.algebra, set_words(a, e.members));
        }
        for e in &self.assemblies {
            let a = self.algebra(&e.algebra).expect("resolved on load");
            let x = &e.assembly;
            let exist: Vec<String> = (0..x.len()).map(|i| format!("{} = {}", x.label(i), a.name(x.exist(i)))).collect();
            let _ = writeln!(
                out,
                "[assembly {} over {}]\ncarrier: {}\nexist: {}\n",
                e.name,
                e.algebra,
                x.labels().join(" "),
                exist.join(", ")
            );
        }
        for e in &self.morphisms {
            let (x, y) = (&self.assembly(&e.source).expect("resolved").assembly, &self.assembly(&e.target).expect("resolved").assembly);
            let _ = writeln!(out, "[morphism {} : {} -> {}]\nmap: {}\n", e.name, e.source, e.target, fmt_map(&e.map, x, y));
        }
        for e in &self.groupoids {
            let v = &self.assembly(&e.vertices).expect("resolved").assembly;
            let ed = &self.assembly(&e.edges).expect("resolved").assembly;
            let _ = writeln!(out, "[groupoid {}]\nvertices: {}\nedges: {}", e.name, e.vertices, e.edges);
            let _ = writeln!(out, "s: {}", fmt_map(&e.s, ed, v));
            let _ = writeln!(out, "t: {}", fmt_map(&e.t, ed, v));
            let _ = writeln!(out, "rho: {}", fmt_map(&e.rho, v, ed));
            let _ = writeln!(out, "sigma: {}", fmt_map(&e.sigma, ed, ed));
            let tau: Vec<String> =
                e.tau.iter().map(|(&(x, y), &g)| format!("({}, {}) -> {}", ed.label(x), ed.label(y), ed.label(g))).collect();
            let _ = writeln!(out, "tau: {}\n", tau.join(", "));
        }
        for e in &self.sets {
            let a = self.algebra(&e.algebra).expect("resolved on load");
            let s = &e.set;
            let _ = writeln!(out, "[implicative-set {} over {}]\ncarrier: {}", e.name, e.algebra, s.labels().join(" "));
            let rows: Vec<String> = (0..s.len())
                .map(|i| {
                    (0..s.len()).map(|j| format!("({}, {}) = {}", s.label(i), s.label(j), a.name(s.equal(i, j)))).collect::<Vec<_>>().join(", ")
                })
                .collect();
            let _ = writeln!(out, "eq: {}\n", rows.join("\n  "));
        }
        for e in &self.relations {
            let (rel, a) = self.build_relation(e).expect("resolved on load");
            let rows: Vec<String> = (0..rel.source.len())
                .map(|i| {
                    (0..rel.target.len())
                        .map(|j| format!("({}, {}) = {}", rel.source.label(i), rel.target.label(j), a.name(rel.get(i, j))))
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .collect();
            let _ = writeln!(out, "[relation {} : {} -> {}]\nvalues: {}\n", e.name, e.source, e.target, rows.join("\n  "));
        }
        for e in &self.terms {
            let _ = writeln!(out, "[term {}]\n{}\n", e.name, e.term);
        }
        out
    }
}

/// Stores the separator by its minimal members so that equal separators
/// compare equal however they were written.
fn canonical_algebra(structure: ImplicativeStructure, members: ElemSet) -> ImplicativeAlgebra {
    let probe = ImplicativeAlgebra::unchecked(structure.clone(), members);
    let minimal = probe.minimal_members();
    if structure.lattice().up_closure(minimal) == members {
        // An invalid separator survives only under `--no-validate`.
        ImplicativeAlgebra::new(structure, minimal).unwrap_or(probe)
    } else {
        probe
    }
}

fn set_words(a: &ImplicativeAlgebra, s: ElemSet) -> String {
    s.iter().map(|e| a.name(e).to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_map(map: &[usize], x: &Assembly, y: &Assembly) -> String {
    map.iter().enumerate().map(|(i, &j)| format!("{} -> {}", x.label(i), y.label(j))).collect::<Vec<_>>().join(", ")
}

fn emit_algebra(out: &mut String, name: &str, a: &ImplicativeAlgebra) {
    let s = a.structure();
    let l = s.lattice();
    let _ = writeln!(out, "[algebra {name}]\nelements: {}", l.names().join(" "));
    let covers: Vec<String> = l.covers().into_iter().map(|(x, y)| format!("{} <= {}", l.name(x), l.name(y))).collect();
    if !covers.is_empty() {
        let _ = writeln!(out, "order: {}", covers.join(", "));
    }
    let heyting = ImplicativeStructure::derive_heyting(l.clone()).map(|h| h == *s).unwrap_or(false);
    if heyting {
        let _ = writeln!(out, "imp: heyting");
    } else {
        let _ = writeln!(out, "imp: table");
        for x in l.elems() {
            for y in l.elems() {
                let _ = writeln!(out, "  {} -> {} = {}", l.name(x), l.name(y), l.name(s.imp(x, y)));
            }
        }
    }
    let sep = a.separator();
    if l.up_closure(sep) == sep {
        let _ = writeln!(out, "separator: generators {}\n", set_words(a, a.minimal_members()));
    } else {
        let _ = writeln!(out, "separator: members {}\n", set_words(a, sep));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
// three-element chain
[algebra H3]
elements: 0 h 1
order: 0 <= h <= 1
imp: heyting
separator: members 1 h

[subset top-only of H3]
members: 1

[assembly X over H3]
carrier: a b
exist: a = 1, b = h

[morphism f : X -> X]
map: a -> a, b -> b

[term id]
lam z . z
";

    #[test]
    fn parses_and_round_trips() {
        let ws = Workspace::parse("sample", SAMPLE, LoadOptions::default()).unwrap();
        assert_eq!(ws.algebras.len(), 1);
        assert_eq!(ws.algebra("H3").unwrap().separator().len(), 2);
        let text = ws.emit();
        let again = Workspace::parse("emitted", &text, LoadOptions::default()).unwrap();
        assert_eq!(ws, again);
        assert_eq!(text, again.emit());
    }

    #[test]
    fn errors_carry_locations() {
        let bad = SAMPLE.replace("exist: a = 1, b = h", "exist: a = 1, b = q");
        let err = Workspace::parse("f.ws", &bad, LoadOptions::default()).unwrap_err().to_string();
        assert!(err.starts_with("f.ws:13:"), "{err}");
        assert!(err.contains("`q`"), "{err}");
    }

    #[test]
    fn dangling_references_are_reported() {
        let bad = SAMPLE.replace("[morphism f : X -> X]", "[morphism f : X -> Y]");
        let err = Workspace::parse("f.ws", &bad, LoadOptions::default()).unwrap_err().to_string();
        assert!(err.contains("unknown assembly `Y`"), "{err}");
    }

    #[test]
    fn validation_can_be_deferred() {
        let bad = SAMPLE.replace("exist: a = 1, b = h", "exist: a = 1, b = 0");
        assert!(Workspace::parse("f.ws", &bad, LoadOptions::default()).is_err());
        let ws = Workspace::parse("f.ws", &bad, LoadOptions { validate: false }).unwrap();
        let failures = ws.validation_failures();
        assert!(failures.iter().any(|f| f.contains("assembly X")), "{failures:?}");
    }

    #[test]
    fn incomplete_tables_are_rejected() {
        let text = "[algebra T]\nelements: 0 1\norder: 0 <= 1\nimp: table\n  0 -> 0 = 1\nseparator: generators 1\n";
        let err = Workspace::parse("t", text, LoadOptions::default()).unwrap_err().to_string();
        assert!(err.contains("missing"), "{err}");
    }
}
