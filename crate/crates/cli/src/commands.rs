//! One function per subcommand. Each returns a [`Report`]; errors are
//! reserved for bad input.

use std::sync::Arc;

use impasm::algebra::{is_joins_compatible, ImplicativeAlgebra, TrackerCheck, Valuation};
use impasm::assembly::{
    equalizer, factors_uniquely, image_factorization, image_trackers, is_tracked, product, projection_trackers, pullback,
    tracked_maps, AsmMorphism, Assembly,
};
use impasm::excomp::{
    composition_well_defined, ex_hom, homotopy_equivalence, quiver_morphisms, validate_pseudo_groupoid, PseudoGroupoid,
};
use impasm::lambda::{interp, parse, Env};
use impasm::order::ElemSet;
use impasm::regcomp::{check_u_equivalence, decide_density, is_compact, is_dense, is_generator, Strategy};
use impasm::seta::{
    frel_equiv, ghost_partition, k_fullness_search, k_morphism, k_object, k_object_checked, k_morphism_checked, k_relation,
};

use crate::report::{Report, Verdict};
use crate::workspace::{GroupoidEntry, Workspace};
use crate::CliError;

type Res<T> = Result<T, CliError>;

/// Cones tried per limit when checking the universal property.
pub const MAX_CONES: usize = 1024;
/// Quiver morphisms per groupoid pair before `exlex`/`kcheck` give up.
pub const MAX_QUIVER_MORPHISMS: usize = 5000;

/// The named algebra, or the only one in the workspace.
pub fn pick_algebra<'a>(ws: &'a Workspace, name: Option<&str>) -> Res<(&'a str, &'a ImplicativeAlgebra)> {
    match name {
        Some(n) => {
            let e = ws.algebras.iter().find(|e| e.name == n).ok_or_else(|| CliError::Unknown { kind: "algebra", name: n.into() })?;
            Ok((&e.name, &e.algebra))
        }
        None => match ws.algebras.as_slice() {
            [one] => Ok((&one.name, &one.algebra)),
            [] => Err(CliError::Usage("the workspace defines no algebra".into())),
            _ => Err(CliError::Usage("the workspace defines several algebras; pass --algebra".into())),
        },
    }
}

fn subset<'a>(ws: &'a Workspace, name: &str) -> Res<(ElemSet, &'a ImplicativeAlgebra)> {
    let s = ws.subset(name)?;
    Ok((s.members, ws.algebra(&s.algebra)?))
}

fn tracker_lines(r: &mut Report, checks: &[TrackerCheck]) {
    for c in checks {
        if c.passes() {
            r.witness(c.to_string());
        } else {
            r.violation(c.to_string());
        }
    }
}

pub fn check(ws: &Workspace) -> Report {
    let mut r = Report::new("check");
    r.witness(format!(
        "{} algebras, {} subsets, {} assemblies, {} morphisms, {} groupoids, {} implicative sets, {} relations, {} terms",
        ws.algebras.len(),
        ws.subsets.len(),
        ws.assemblies.len(),
        ws.morphisms.len(),
        ws.groupoids.len(),
        ws.sets.len(),
        ws.relations.len(),
        ws.terms.len()
    ));
    for v in ws.validation_failures() {
        r.violation(v);
    }
    r
}

/// Parses `x=elem` bindings.
fn env_of(bindings: &[String], a: &ImplicativeAlgebra) -> Res<Env> {
    let mut env = Env::new();
    for b in bindings {
        let (x, v) = b.split_once('=').ok_or_else(|| CliError::Usage(format!("expected NAME=ELEMENT, found `{b}`")))?;
        env.bind(x.trim(), a.elem(v.trim())?)?;
    }
    Ok(env)
}

/// `term` is the name of a term section or the text of a term.
pub fn interp_term(ws: &Workspace, algebra: Option<&str>, term: &str, bindings: &[String]) -> Res<Report> {
    let (alg_name, a) = pick_algebra(ws, algebra)?;
    let t = match ws.term(term) {
        Some(e) => e.term.clone(),
        None => parse(term)?,
    };
    let env = env_of(bindings, a)?;
    let v = interp(&t, &env, a.structure())?;
    let mut r = Report::new(format!("interp -t {term}"));
    r.witness(format!("[[{t}]] = {} over {alg_name}", a.name(v)));
    r.witness(format!("in separator: {}", if a.in_sep(v) { "yes" } else { "no" }));
    Ok(r)
}

pub fn tracked(ws: &Workspace, mor: &str) -> Res<Report> {
    let m = ws.morphism(mor)?;
    let a = ws.morphism_algebra(m)?;
    let (x, y) = (&ws.assembly(&m.source)?.assembly, &ws.assembly(&m.target)?.assembly);
    let t = is_tracked(&m.map, x, y, a)?;
    let mut r = Report::new(format!("tracked -f {mor}"));
    r.witness(format!("best witness {}", a.name(t.witness)));
    if !t.tracked {
        r.violation(format!("{mor} is not tracked: {} lies outside the separator", a.name(t.witness)));
    }
    Ok(r)
}

pub fn image(ws: &Workspace, mor: &str) -> Res<Report> {
    let m = ws.morphism(mor)?;
    let a = ws.morphism_algebra(m)?;
    let f = ws.build_morphism(m)?;
    let img = image_factorization(&f, a)?;
    let mut r = Report::new(format!("image -f {mor}"));
    for (i, c) in img.classes.iter().enumerate() {
        let pts: Vec<&str> = c.iter().map(|&p| f.source().label(p)).collect();
        r.witness(format!("{} = {{{}}} with existence {}", img.object.label(i), pts.join(", "), a.name(img.object.exist(i))));
    }
    r.witness(format!("fbar: {}", img.fbar.describe()));
    r.witness(format!("iota: {}", img.iota.describe()));
    if img.fbar.then(&img.iota, a)?.map() != f.map() {
        r.violation("iota . fbar differs from f");
    }
    tracker_lines(&mut r, &image_trackers(&f, &img, a)?);
    Ok(r)
}

/// Assemblies of the workspace over `a`, with names.
fn assemblies_over<'a>(ws: &'a Workspace, alg: &str) -> Vec<(&'a str, &'a Arc<Assembly>)> {
    ws.assemblies.iter().filter(|e| e.algebra == alg).map(|e| (e.name.as_str(), &e.assembly)).collect()
}

/// Checks the universal property of a two-legged limit against cones from
/// every workspace assembly, up to [`MAX_CONES`] cones.
fn cone_check(
    r: &mut Report,
    what: &str,
    legs: &[AsmMorphism; 2],
    commutes: impl Fn(&AsmMorphism, &AsmMorphism) -> bool,
    sources: &[(&str, &Arc<Assembly>)],
    a: &ImplicativeAlgebra,
) -> Res<()> {
    let mut cones = 0;
    'outer: for (_, w) in sources {
        for p in tracked_maps(w, legs[0].target(), a) {
            for q in tracked_maps(w, legs[1].target(), a) {
                if !commutes(&p, &q) {
                    continue;
                }
                if cones == MAX_CONES {
                    r.warnings.push(format!("{what}: stopped after {MAX_CONES} cones"));
                    break 'outer;
                }
                cones += 1;
                if !factors_uniquely(&[p.clone(), q.clone()], legs, a)? {
                    r.violation(format!("{what}: the cone ({}, {}) does not factor uniquely", p.describe(), q.describe()));
                }
            }
        }
    }
    r.witness(format!("{what}: {cones} cones factor uniquely"));
    Ok(())
}

pub fn limits(ws: &Workspace, algebra: Option<&str>) -> Res<Report> {
    let (alg, a) = pick_algebra(ws, algebra)?;
    let mut r = Report::new("limits");
    let objs = assemblies_over(ws, alg);
    let terminal = Arc::new(Assembly::terminal(a));
    for (n, x) in &objs {
        let to_one = tracked_maps(x, &terminal, a).len();
        if to_one != 1 {
            r.violation(format!("{n} has {to_one} tracked maps to the terminal object"));
        }
    }
    r.witness(format!("terminal: {} assemblies map uniquely", objs.len()));
    for (i, (nx, x)) in objs.iter().enumerate() {
        for (ny, y) in &objs[i..] {
            let p = product(x, y, a)?;
            let what = format!("{nx} x {ny}");
            for c in projection_trackers(&p, a)? {
                if !c.passes() {
                    r.violation(format!("{what}: {c}"));
                }
            }
            cone_check(&mut r, &what, &[p.p0.clone(), p.p1.clone()], |_, _| true, &objs, a)?;
        }
    }
    let mors: Vec<(&str, AsmMorphism)> = ws
        .morphisms
        .iter()
        .filter(|m| ws.assembly(&m.source).map(|x| x.algebra == alg).unwrap_or(false))
        .map(|m| Ok((m.name.as_str(), ws.build_morphism(m)?)))
        .collect::<Res<_>>()?;
    for (i, (nf, f)) in mors.iter().enumerate() {
        for (ng, g) in &mors[i..] {
            if f.target() == g.target() {
                let p = pullback(f, g, a)?;
                let what = format!("pullback of {nf}, {ng}");
                for c in projection_trackers(&p, a)? {
                    if !c.passes() {
                        r.violation(format!("{what}: {c}"));
                    }
                }
                let commutes = |u: &AsmMorphism, v: &AsmMorphism| {
                    (0..u.source().len()).all(|k| f.apply(u.apply(k)) == g.apply(v.apply(k)))
                };
                cone_check(&mut r, &what, &[p.p0.clone(), p.p1.clone()], commutes, &objs, a)?;
            }
            if nf != ng && f.source() == g.source() && f.target() == g.target() {
                let e = equalizer(f, g, a)?;
                let what = format!("equalizer of {nf}, {ng}");
                let mut cones = 0;
                for (_, w) in &objs {
                    for u in tracked_maps(w, f.source(), a) {
                        if (0..w.len()).all(|k| f.apply(u.apply(k)) == g.apply(u.apply(k))) {
                            cones += 1;
                            if !factors_uniquely(&[u.clone()], &[e.inclusion.clone()], a)? {
                                r.violation(format!("{what}: {} does not factor uniquely", u.describe()));
                            }
                        }
                    }
                }
                r.witness(format!("{what}: {} points, {cones} cones factor uniquely", e.object.len()));
            }
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityStrategy {
    /// Canonical first, then exhaustive.
    Auto,
    Canonical,
    Exhaustive,
}

/// Parses `s: m m; s: m` over the separator, in any order.
pub fn parse_valuation(text: &str, m: ElemSet, a: &ImplicativeAlgebra) -> Res<Valuation> {
    let sep: Vec<_> = a.separator().iter().collect();
    let mut values = vec![None; sep.len()];
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (s, rest) = part.split_once(':').ok_or_else(|| CliError::Usage(format!("expected `s: m ...`, found `{part}`")))?;
        let s = a.elem(s.trim())?;
        let i = sep.iter().position(|&x| x == s).ok_or_else(|| CliError::Usage(format!("{} is not in the separator", a.name(s))))?;
        let set = rest
            .split(|c: char| c.is_whitespace() || ",{}".contains(c))
            .filter(|w| !w.is_empty())
            .map(|w| a.elem(w))
            .collect::<Result<ElemSet, _>>()?;
        values[i] = Some(set);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::Usage(format!("no value for {}", a.name(sep[i])))))
        .collect::<Res<Vec<_>>>()?;
    Ok(Valuation::new(m, values)?)
}

pub fn density(ws: &Workspace, sub: &str, strategy: DensityStrategy, with: Option<&str>) -> Res<Report> {
    let (m, a) = subset(ws, sub)?;
    let d = match (with, strategy) {
        (Some(text), _) => is_dense(m, a, &Strategy::User(parse_valuation(text, m, a)?))?,
        (None, DensityStrategy::Auto) => decide_density(m, a)?,
        (None, DensityStrategy::Canonical) => is_dense(m, a, &Strategy::Canonical)?,
        (None, DensityStrategy::Exhaustive) => is_dense(m, a, &Strategy::Exhaustive)?,
    };
    let mut r = Report::new(format!("density -M {sub}"));
    r.witness(format!("strategy {}", d.strategy));
    if let Some(v) = d.describe_valuation(a) {
        r.witness(format!("valuation {v}"));
    }
    r.witness(d.detail.clone());
    match d.dense {
        Some(true) => {}
        Some(false) => r.violation(format!("{sub} is not dense: {}", d.detail)),
        None => {
            r.cap(Verdict::Undecided);
            r.warnings.push(d.detail.clone());
        }
    }
    Ok(r)
}

pub fn compactness(ws: &Workspace, sub: &str, bound: usize) -> Res<Report> {
    let (m, a) = subset(ws, sub)?;
    let c = is_compact(m, a, bound)?;
    let mut r = Report::new(format!("compactness -M {sub}"));
    r.bound = Some(bound);
    r.witness(format!("{} instances checked", c.instances));
    if let Some((x, y, z)) = &c.algebraic.witness {
        r.violation(format!("{sub} is not algebraic: {x} /\\ {y} = {z} leaves it"));
    }
    if let Some((u, nu)) = &c.counterexample {
        r.violation(format!("no uniform bound for u = ({}) below nu = ({})", u.join(", "), nu.join(", ")));
    }
    r.cap(Verdict::from_option(c.compact));
    Ok(r)
}

pub fn generator(ws: &Workspace, sub: &str, bound: usize) -> Res<Report> {
    let (m, a) = subset(ws, sub)?;
    let g = is_generator(m, a, bound)?;
    let mut r = Report::new(format!("generator -M {sub}"));
    r.bound = Some(bound);
    r.witness(format!("algebraic: {}", g.algebraic.algebraic));
    r.witness(format!("dense: {} ({})", fmt_opt(g.density.dense), g.density.detail));
    if let Some(v) = g.density.describe_valuation(a) {
        r.witness(format!("valuation {v}"));
    }
    r.witness(format!("compact: {} ({} instances)", fmt_opt(g.compactness.compact), g.compactness.instances));
    match g.generator {
        Some(true) => {}
        Some(false) => r.violation(format!("{sub} is not a generator")),
        None => {
            r.cap(Verdict::Undecided);
            r.warnings.push("density or compactness undecided".into());
        }
    }
    Ok(r)
}

fn fmt_opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "undecided",
    }
}

pub fn reglex(ws: &Workspace, sub: &str, bound: usize) -> Res<Report> {
    let (m, a) = subset(ws, sub)?;
    let u = check_u_equivalence(m, a, bound)?;
    let mut r = Report::new(format!("reglex -M {sub}"));
    r.bound = Some(bound);
    r.witness(format!("generator: {}", fmt_opt(u.generator.generator)));
    for (name, c) in [
        ("valuation existence", &u.valuations),
        ("essential surjectivity", &u.essentially_surjective),
        ("lifting", &u.lifts),
        ("fullness", &u.fullness.full),
    ] {
        r.witness(format!("{name}: {} ({} checked)", if c.holds { "holds" } else { "fails" }, c.checked));
        if let Some(why) = &c.counterexample {
            r.witness(format!("{name} counterexample: {why}"));
        }
    }
    r.witness(format!("faithful: {} on {} objects", u.fullness.faithful, u.fullness.objects));
    if !u.equivalence() {
        r.violation("U is not an equivalence at this bound");
    }
    if !u.consistent {
        r.violation("the definitional and categorical checks disagree");
    }
    Ok(r)
}

fn built_groupoids(ws: &Workspace) -> Res<Vec<(&GroupoidEntry, PseudoGroupoid, &ImplicativeAlgebra)>> {
    ws.groupoids.iter().map(|g| Ok((g, ws.build_groupoid(g)?, ws.groupoid_algebra(g)?))).collect()
}

pub fn exlex(ws: &Workspace) -> Res<Report> {
    let mut r = Report::new("exlex");
    let gs = built_groupoids(ws)?;
    for (e, g, a) in &gs {
        for v in validate_pseudo_groupoid(g, a).violations {
            r.violation(format!("{}: {v}", e.name));
        }
    }
    if r.verdict != Verdict::Pass {
        return Ok(r);
    }
    for (ex, x, a) in &gs {
        for (ey, y, b) in &gs {
            if a != b {
                continue;
            }
            let count = quiver_morphisms(x, y, a).len();
            if count > MAX_QUIVER_MORPHISMS {
                r.warnings.push(format!("{} -> {}: {count} quiver morphisms, skipped", ex.name, ey.name));
                r.cap(Verdict::Undecided);
                continue;
            }
            let eq = homotopy_equivalence(x, y, a)?;
            let classes = ex_hom(x, y, a).len();
            r.witness(format!("{} -> {}: {} quiver morphisms in {classes} classes", ex.name, ey.name, eq.morphisms));
            if !eq.holds() {
                r.violation(format!("{} -> {}: homotopy is not an equivalence relation ({eq:?})", ex.name, ey.name));
            }
            if !composition_well_defined(x, y, x, a)? {
                r.violation(format!("{} -> {} -> {}: composition depends on representatives", ex.name, ey.name, ex.name));
            }
        }
    }
    Ok(r)
}

pub fn kcheck(ws: &Workspace, sub: Option<&str>) -> Res<Report> {
    let mut r = Report::new("kcheck");
    let gs = built_groupoids(ws)?;
    for (e, g, a) in &gs {
        match k_object_checked(g, a) {
            Ok(k) => {
                r.witness(format!("K({}) has {} points", e.name, k.set.len()));
                for c in k.validation.checks.iter().filter(|c| !c.holds) {
                    r.violation(format!("K({}): {} is {}", e.name, c.name, c.value));
                }
                for c in &k.trackers {
                    if !c.passes() {
                        r.violation(format!("K({}): {c}", e.name));
                    }
                }
            }
            Err(err) => r.violation(format!("{}: {err}", e.name)),
        }
    }
    if r.verdict != Verdict::Pass {
        return Ok(r);
    }
    for (ex, x, a) in &gs {
        for (ey, y, b) in &gs {
            if a != b {
                continue;
            }
            let pair = format!("{} -> {}", ex.name, ey.name);
            if quiver_morphisms(x, y, a).len() > MAX_QUIVER_MORPHISMS {
                r.warnings.push(format!("{pair}: too many quiver morphisms, skipped"));
                r.cap(Verdict::Undecided);
                continue;
            }
            let classes = ex_hom(x, y, a);
            let mut trackers = 0;
            for f in classes.iter().flatten() {
                let km = k_morphism_checked(x, y, f, a)?;
                for c in km.validation.checks.iter().filter(|c| !c.holds) {
                    r.violation(format!("{pair} {}: {} is {}", f.describe(), c.name, c.value));
                }
                for c in &km.trackers {
                    trackers += 1;
                    if !c.passes() {
                        r.violation(format!("{pair} {}: {c}", f.describe()));
                    }
                }
            }
            let (kx, ky) = (Arc::new(k_object(x, a)), Arc::new(k_object(y, a)));
            let rels: Vec<_> = classes.iter().map(|c| k_morphism(x, y, &c[0], &kx, &ky, a)).collect();
            for i in 0..rels.len() {
                for j in i + 1..rels.len() {
                    if frel_equiv(&rels[i], &rels[j], a)?.equivalent() {
                        r.violation(format!("{pair}: classes {i} and {j} have equivalent images (not faithful)"));
                    }
                }
            }
            r.witness(format!("{pair}: {} classes, {trackers} trackers checked", classes.len()));
        }
    }
    for rel in &ws.relations {
        let (Ok(x), Ok(y)) = (ws.groupoid(&rel.source), ws.groupoid(&rel.target)) else {
            continue;
        };
        let (f, a) = ws.build_relation(rel)?;
        let out = k_fullness_search(&ws.build_groupoid(x)?, &ws.build_groupoid(y)?, &f, a)?;
        match (&out.morphism, &out.violation) {
            (Some(m), _) => r.witness(format!("{} is K of {}", rel.name, m.describe())),
            (None, Some(v)) => r.violation(format!("{}: {v}", rel.name)),
            (None, None) => r.violation(format!("{}: no representing quiver morphism", rel.name)),
        }
    }
    for s in &ws.sets {
        let a = ws.algebra(&s.algebra)?;
        let m = match sub {
            Some(name) => {
                let e = ws.subset(name)?;
                if e.algebra != s.algebra {
                    continue;
                }
                e.members
            }
            None => a.separator(),
        };
        let ghosts = !ghost_partition(&s.set, a).ghosts.is_empty();
        let kr = match k_relation(&s.set, m, a) {
            Ok(k) => k,
            Err(err) => {
                r.violation(format!("{}: {err}", s.name));
                continue;
            }
        };
        for c in kr.validation.checks.iter().filter(|c| !c.holds) {
            r.violation(format!("{}: comparison relation: {} is {}", s.name, c.name, c.value));
        }
        for c in &kr.trackers {
            if !c.passes() {
                r.violation(format!("{}: {c}", s.name));
            }
        }
        r.witness(format!(
            "{}: {} points, ghosts: {}, Inj = {}, Surj = {}",
            s.name,
            s.set.len(),
            if ghosts { "yes" } else { "no" },
            kr.injective.value,
            kr.surjective.value
        ));
        if !ghosts && !kr.injective.holds {
            r.violation(format!("{}: comparison relation is not internally injective", s.name));
        }
        if (!ghosts || is_joins_compatible(a.structure())) && !kr.surjective.holds {
            r.violation(format!("{}: comparison relation is not internally surjective", s.name));
        }
    }
    Ok(r)
}

/// Every check that applies to the workspace, at `bound`.
pub fn report_all(ws: &Workspace, bound: usize) -> Res<Report> {
    let mut r = Report::new("report");
    r.bound = Some(bound);
    r.absorb(check(ws));
    for m in &ws.morphisms {
        if ws.build_morphism(m).is_ok() {
            r.absorb(image(ws, &m.name)?);
        } else {
            r.absorb(tracked(ws, &m.name)?);
        }
    }
    for s in &ws.subsets {
        r.absorb(generator(ws, &s.name, bound)?);
    }
    if !ws.groupoids.is_empty() {
        r.absorb(exlex(ws)?);
    }
    if !ws.groupoids.is_empty() || !ws.sets.is_empty() {
        r.absorb(kcheck(ws, None)?);
    }
    let failing: Vec<String> = r.reports.iter().filter(|s| s.verdict != Verdict::Pass).map(|s| format!("{}: {}", s.command, s.verdict)).collect();
    for f in failing {
        r.violations.push(f);
    }
    Ok(r)
}
