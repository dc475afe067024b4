//! The regular completion of `Asm_M`, the comparison functor `U` into the
//! assemblies over the whole algebra, and the density, compactness and
//! generator procedures.
//!
//! Every search here is exhaustive over finite carriers. Verdicts that
//! depend on a carrier bound carry that bound.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{ImplicativeAlgebra, Valuation};
use crate::assembly::{
    enumerate_assemblies, find_iso, image_factorization, is_tracked, set_maps, tracked_maps, AsmMorphism, Assembly,
    Image,
};
use crate::error::{Error, Result};
use crate::order::{Elem, ElemSet};

/// Default cap on `|S|` for the exhaustive density search.
pub const DENSITY_MAX_S: usize = 6;
/// Default cap on `|M|` for the exhaustive density search.
pub const DENSITY_MAX_M: usize = 4;

fn check_subset(m: ElemSet, a: &ImplicativeAlgebra) -> Result<()> {
    if m.is_empty() {
        return Err(Error::Invalid("M is empty".into()));
    }
    if !m.is_subset(a.separator()) {
        return Err(Error::OutsideSeparator(a.fmt_set(m.minus(a.separator()))));
    }
    Ok(())
}

/// An object of the completion: a morphism between M-assemblies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegObject {
    f: AsmMorphism,
}

impl RegObject {
    pub fn new(f: AsmMorphism, m: ElemSet) -> Result<RegObject> {
        for x in [f.source(), f.target()] {
            if !x.is_m_assembly(m) {
                return Err(Error::Invalid("existence values leave M".into()));
            }
        }
        Ok(RegObject { f })
    }

    /// The image of the insertion: `id_X`.
    pub fn identity(x: Arc<Assembly>, m: ElemSet, a: &ImplicativeAlgebra) -> Result<RegObject> {
        RegObject::new(AsmMorphism::identity(x, a), m)
    }

    pub fn arrow(&self) -> &AsmMorphism {
        &self.f
    }

    pub fn source(&self) -> &Arc<Assembly> {
        self.f.source()
    }

    /// Points of the source grouped by their value under the arrow.
    pub fn kernel(&self) -> Vec<usize> {
        canonical_kernel(self.f.map())
    }
}

/// Relabels a map by order of first appearance, so equal kernels compare equal.
fn canonical_kernel(map: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    map.iter()
        .map(|v| match seen.iter().position(|w| w == v) {
            Some(i) => i,
            None => {
                seen.push(*v);
                seen.len() - 1
            }
        })
        .collect()
}

/// A class `[l]` of maps between the sources of two objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegMorphism {
    pub source: RegObject,
    pub target: RegObject,
    /// The representative, the lexicographically least map in its class.
    pub l: AsmMorphism,
    /// `f' . l`, which determines the class.
    pub canonical: Vec<usize>,
}

/// Whether `f' . l` identifies everything `f` identifies.
pub fn coequalises(f: &AsmMorphism, l: &[usize], f2: &AsmMorphism) -> bool {
    let n = f.source().len();
    (0..n).all(|x| (x + 1..n).all(|y| f.apply(x) != f.apply(y) || f2.apply(l[x]) == f2.apply(l[y])))
}

impl RegMorphism {
    pub fn new(source: &RegObject, target: &RegObject, l: AsmMorphism) -> Result<RegMorphism> {
        if *l.source() != *source.f.source() || *l.target() != *target.f.source() {
            return Err(Error::Invalid("representative has the wrong endpoints".into()));
        }
        if !coequalises(&source.f, l.map(), &target.f) {
            return Err(Error::Invalid(format!("{} does not respect the kernel of the source", l.describe())));
        }
        let canonical = l.map().iter().map(|&i| target.f.apply(i)).collect();
        Ok(RegMorphism { source: source.clone(), target: target.clone(), l, canonical })
    }

    pub fn identity(obj: &RegObject, a: &ImplicativeAlgebra) -> RegMorphism {
        RegMorphism::new(obj, obj, AsmMorphism::identity(obj.source().clone(), a)).expect("identity coequalises")
    }

    /// `other . self`.
    pub fn then(&self, other: &RegMorphism, a: &ImplicativeAlgebra) -> Result<RegMorphism> {
        RegMorphism::new(&self.source, &other.target, self.l.then(&other.l, a)?)
    }

    pub fn same_class(&self, other: &RegMorphism) -> bool {
        self.canonical == other.canonical
    }
}

/// Every class of morphisms `f -> f'`, one representative each.
pub fn reg_hom(f: &RegObject, f2: &RegObject, a: &ImplicativeAlgebra) -> Vec<RegMorphism> {
    let mut classes: BTreeMap<Vec<usize>, RegMorphism> = BTreeMap::new();
    for l in tracked_maps(f.source(), f2.source(), a) {
        if let Ok(m) = RegMorphism::new(f, f2, l) {
            classes.entry(m.canonical.clone()).or_insert(m);
        }
    }
    classes.into_values().collect()
}

/// `U(f) = Im(f)`.
pub fn u_functor(obj: &RegObject, a: &ImplicativeAlgebra) -> Result<Image> {
    image_factorization(&obj.f, a)
}

/// `U([l])([x]) = [l x]`.
pub fn u_on_morphism(m: &RegMorphism, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
    let src = u_functor(&m.source, a)?;
    let tgt = u_functor(&m.target, a)?;
    let map = src.classes.iter().map(|c| tgt.fbar.apply(m.l.apply(c[0]))).collect();
    AsmMorphism::new(src.object, tgt.object, map, a)
}

/// Whether every element of `m` meets `m` in an element of `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Algebraicity {
    pub algebraic: bool,
    /// `(m1, m2, m1 /\ m2)` leaving `M`.
    pub witness: Option<(String, String, String)>,
}

pub fn is_algebraic(m: ElemSet, a: &ImplicativeAlgebra) -> Algebraicity {
    for x in m.iter() {
        for y in m.iter() {
            let z = a.encoded_meet(x, y);
            if !m.contains(z) {
                let w = (a.name(x).into(), a.name(y).into(), a.name(z).into());
                return Algebraicity { algebraic: false, witness: Some(w) };
            }
        }
    }
    Algebraicity { algebraic: true, witness: None }
}

/// A valuation `nu` with `u ~= e_exists . nu`, or `None`.
///
/// At each index only the candidate sets whose pair of entailment
/// witnesses is not dominated by another candidate are kept; since the
/// separator is upward closed this loses no solutions.
pub fn find_valuation(u: &[Elem], m: ElemSet, a: &ImplicativeAlgebra) -> Option<Valuation> {
    let table: Vec<(ElemSet, Elem)> = m.subsets().skip(1).map(|v| (v, a.e_exists(v))).collect();
    let fronts: Vec<Vec<(Elem, Elem, ElemSet)>> = u
        .iter()
        .map(|&ux| {
            let mut front: Vec<(Elem, Elem, ElemSet)> = Vec::new();
            for &(v, e) in &table {
                let (fw, bw) = (a.imp(ux, e), a.imp(e, ux));
                if !a.in_sep(fw) || !a.in_sep(bw) || front.iter().any(|&(f, b, _)| a.leq(fw, f) && a.leq(bw, b)) {
                    continue;
                }
                front.retain(|&(f, b, _)| !(a.leq(f, fw) && a.leq(b, bw)));
                front.push((fw, bw, v));
            }
            front
        })
        .collect();
    let mut chosen = Vec::with_capacity(u.len());
    if pick(&fronts, a.top(), a.top(), &mut chosen, a) {
        Some(Valuation::new(m, chosen).expect("nonempty subsets of M"))
    } else {
        None
    }
}

fn pick(fronts: &[Vec<(Elem, Elem, ElemSet)>], fw: Elem, bw: Elem, chosen: &mut Vec<ElemSet>, a: &ImplicativeAlgebra) -> bool {
    let i = chosen.len();
    if i == fronts.len() {
        return true;
    }
    for &(f, b, v) in &fronts[i] {
        let (f2, b2) = (a.meet_iter([fw, f]), a.meet_iter([bw, b]));
        if a.in_sep(f2) && a.in_sep(b2) {
            chosen.push(v);
            if pick(fronts, f2, b2, chosen, a) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// How to look for the valuation witnessing density.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// `nu(s) = { m in M | m <= s }`.
    Canonical,
    /// Every valuation, within [`DENSITY_MAX_S`] and [`DENSITY_MAX_M`].
    Exhaustive,
    /// A supplied valuation, indexed by the separator in element order.
    User(Valuation),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub strategy: String,
    /// `None` when the strategy could not decide.
    pub dense: Option<bool>,
    /// Members of the separator, the index of the valuation.
    pub index: Vec<String>,
    pub valuation: Option<Valuation>,
    pub detail: String,
}

impl DensityReport {
    fn new(strategy: &str, a: &ImplicativeAlgebra) -> DensityReport {
        DensityReport {
            strategy: strategy.into(),
            dense: None,
            index: a.separator().iter().map(|s| a.name(s).to_string()).collect(),
            valuation: None,
            detail: String::new(),
        }
    }

    /// Renders the witness as `s: {m, ...}` pairs.
    pub fn describe_valuation(&self, a: &ImplicativeAlgebra) -> Option<String> {
        let nu = self.valuation.as_ref()?;
        let parts: Vec<String> = self.index.iter().zip(&nu.values).map(|(s, &v)| format!("{s}: {}", a.fmt_set(v))).collect();
        Some(parts.join(", "))
    }
}

/// Compares `id_S` with `e_exists . nu`, returning both entailment witnesses.
fn check_density_valuation(nu: &Valuation, a: &ImplicativeAlgebra) -> (Elem, Elem) {
    let s: Vec<Elem> = a.separator().iter().collect();
    let e: Vec<Elem> = nu.values.iter().map(|&v| a.e_exists(v)).collect();
    (a.entailment_witness(&s, &e), a.entailment_witness(&e, &s))
}

/// Decides density of `m` with the given strategy.
pub fn is_dense(m: ElemSet, a: &ImplicativeAlgebra, strategy: &Strategy) -> Result<DensityReport> {
    check_subset(m, a)?;
    let sep: Vec<Elem> = a.separator().iter().collect();
    match strategy {
        Strategy::Canonical => {
            let mut r = DensityReport::new("canonical", a);
            let values: Vec<ElemSet> = sep.iter().map(|&s| m.iter().filter(|&x| a.leq(x, s)).collect()).collect();
            if let Some(i) = values.iter().position(|v| v.is_empty()) {
                r.detail = format!("no element of M lies below {}; try the exhaustive strategy", a.name(sep[i]));
                return Ok(r);
            }
            let nu = Valuation::new(m, values)?;
            let (fw, bw) = check_density_valuation(&nu, a);
            if a.in_sep(fw) && a.in_sep(bw) {
                r.dense = Some(true);
                r.detail = format!("entailment witnesses {} and {}", a.name(fw), a.name(bw));
            } else {
                r.detail = format!(
                    "canonical valuation fails (witnesses {} and {}); try the exhaustive strategy",
                    a.name(fw),
                    a.name(bw)
                );
            }
            r.valuation = Some(nu);
            Ok(r)
        }
        Strategy::Exhaustive => {
            let mut r = DensityReport::new("exhaustive", a);
            if sep.len() > DENSITY_MAX_S || m.len() > DENSITY_MAX_M {
                r.detail = format!(
                    "search space exceeds the cap (|S| <= {DENSITY_MAX_S}, |M| <= {DENSITY_MAX_M}); supply a valuation"
                );
                return Ok(r);
            }
            match find_valuation(&sep, m, a) {
                Some(nu) => {
                    let (fw, bw) = check_density_valuation(&nu, a);
                    r.dense = Some(true);
                    r.detail = format!("entailment witnesses {} and {}", a.name(fw), a.name(bw));
                    r.valuation = Some(nu);
                }
                None => {
                    r.dense = Some(false);
                    r.detail = "no valuation of the separator into M is isomorphic to the identity".into();
                }
            }
            Ok(r)
        }
        Strategy::User(nu) => {
            let mut r = DensityReport::new("user", a);
            if nu.len() != sep.len() || !nu.m.is_subset(m) {
                return Err(Error::IndexMismatch(format!(
                    "valuation has {} values, the separator {} members",
                    nu.len(),
                    sep.len()
                )));
            }
            let nu = Valuation::new(m, nu.values.clone())?;
            let (fw, bw) = check_density_valuation(&nu, a);
            if a.in_sep(fw) && a.in_sep(bw) {
                r.dense = Some(true);
            }
            r.detail = format!("entailment witnesses {} and {}", a.name(fw), a.name(bw));
            r.valuation = Some(nu);
            Ok(r)
        }
    }
}

/// Canonical strategy, falling back to the exhaustive one when it does not succeed.
pub fn decide_density(m: ElemSet, a: &ImplicativeAlgebra) -> Result<DensityReport> {
    let r = is_dense(m, a, &Strategy::Canonical)?;
    if r.dense == Some(true) {
        return Ok(r);
    }
    is_dense(m, a, &Strategy::Exhaustive)
}

/// Outcome of a search bounded by carrier size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundedCheck {
    pub holds: bool,
    pub bound: usize,
    pub checked: usize,
    /// The first failing instance, rendered.
    pub counterexample: Option<String>,
}

impl BoundedCheck {
    fn pass(bound: usize, checked: usize) -> BoundedCheck {
        BoundedCheck { holds: true, bound, checked, counterexample: None }
    }

    fn fail(bound: usize, checked: usize, why: String) -> BoundedCheck {
        BoundedCheck { holds: false, bound, checked, counterexample: Some(why) }
    }
}

fn fmt_values(v: &[Elem], a: &ImplicativeAlgebra) -> String {
    let names: Vec<&str> = v.iter().map(|&e| a.name(e)).collect();
    format!("({})", names.join(", "))
}

/// Non-decreasing sequences of length `1..=bound` over `values`.
fn multisets(values: ElemSet, bound: usize) -> Vec<Vec<Elem>> {
    let vals: Vec<Elem> = values.iter().collect();
    let mut out = Vec::new();
    for n in 1..=bound {
        for c in set_maps(n, vals.len()) {
            if c.windows(2).all(|w| w[0] <= w[1]) {
                out.push(c.iter().map(|&i| vals[i]).collect());
            }
        }
    }
    out
}

/// Every family `u` valued in S over at most `bound` indices is
/// isomorphic to `e_exists . nu` for some valuation into `m`.
///
/// Families are taken up to permutation of the index set.
pub fn valuation_existence(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<BoundedCheck> {
    check_subset(m, a)?;
    let mut checked = 0;
    for u in multisets(a.separator(), bound) {
        checked += 1;
        if find_valuation(&u, m, a).is_none() {
            return Ok(BoundedCheck::fail(bound, checked, format!("family {} has no valuation", fmt_values(&u, a))));
        }
    }
    Ok(BoundedCheck::pass(bound, checked))
}

/// Every assembly with at most `bound` points is isomorphic to `U(g)` for
/// some `g` between M-assemblies.
///
/// The candidates are the covers `g: A -> B` where `A` lists, over each
/// point `x`, one point per element of a nonempty `V_x` of `M`, and `B`
/// has one point per `x`. Up to isomorphism of images these are all
/// objects of the completion whose image has the right size.
pub fn essential_surjectivity(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<BoundedCheck> {
    check_subset(m, a)?;
    let subsets: Vec<ElemSet> = m.subsets().skip(1).collect();
    let mvals: Vec<Elem> = m.iter().collect();
    let mut checked = 0;
    for x in enumerate_assemblies(bound, a.separator(), a) {
        checked += 1;
        let x = Arc::new(x);
        let n = x.len();
        let hit = set_maps(n, subsets.len()).any(|choice| {
            let points: Vec<(usize, Elem)> =
                choice.iter().enumerate().flat_map(|(i, &k)| subsets[k].iter().map(move |v| (i, v))).collect();
            let src = Arc::new(
                Assembly::from_values(points.iter().map(|p| p.1).collect(), a).expect("M lies in the separator"),
            );
            let fibres: Vec<usize> = points.iter().map(|p| p.0).collect();
            set_maps(n, mvals.len()).any(|t| {
                let tgt = Arc::new(Assembly::from_values(t.iter().map(|&k| mvals[k]).collect(), a).expect("in S"));
                let Ok(g) = AsmMorphism::new(src.clone(), tgt, fibres.clone(), a) else {
                    return false;
                };
                let img = image_factorization(&g, a).expect("images of tracked maps exist");
                find_iso(&x, &img.object, a).is_some()
            })
        });
        if !hit {
            let why = format!("assembly with existence {} is not an image", fmt_values(x.exist_values(), a));
            return Ok(BoundedCheck::fail(bound, checked, why));
        }
    }
    Ok(BoundedCheck::pass(bound, checked))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompactnessReport {
    pub algebraic: Algebraicity,
    /// `None` when `M` is not algebraic.
    pub compact: Option<bool>,
    pub bound: usize,
    pub instances: usize,
    /// `(u, nu)` with `u <= e_exists . nu` but no bound `b` inside `nu`.
    pub counterexample: Option<(Vec<String>, Vec<String>)>,
}

/// Searches for `u in M^X`, `nu` with `u <= e_exists . nu` and no
/// `b in prod nu(x)` with `u <= b <= e_exists . nu`, for `|X| <= bound`.
pub fn is_compact(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<CompactnessReport> {
    check_subset(m, a)?;
    let algebraic = is_algebraic(m, a);
    let mut r = CompactnessReport { algebraic, compact: None, bound, instances: 0, counterexample: None };
    if !r.algebraic.algebraic {
        return Ok(r);
    }
    let subsets: Vec<(ElemSet, Elem)> = m.subsets().skip(1).map(|v| (v, a.e_exists(v))).collect();
    let mvals: Vec<Elem> = m.iter().collect();
    for n in 1..=bound {
        for nu in set_maps(n, subsets.len()) {
            let e: Vec<Elem> = nu.iter().map(|&k| subsets[k].1).collect();
            for u in set_maps(n, mvals.len()) {
                let u: Vec<Elem> = u.iter().map(|&k| mvals[k]).collect();
                if !a.in_sep(a.entailment_witness(&u, &e)) {
                    continue;
                }
                r.instances += 1;
                let choices: Vec<Vec<Elem>> = nu.iter().map(|&k| subsets[k].0.iter().collect()).collect();
                let found = product_indices(&choices).any(|b| {
                    a.in_sep(a.entailment_witness(&u, &b)) && a.in_sep(a.entailment_witness(&b, &e))
                });
                if !found {
                    r.compact = Some(false);
                    r.counterexample = Some((
                        u.iter().map(|&x| a.name(x).to_string()).collect(),
                        nu.iter().map(|&k| a.fmt_set(subsets[k].0)).collect(),
                    ));
                    return Ok(r);
                }
            }
        }
    }
    r.compact = Some(true);
    Ok(r)
}

/// Every tuple picking one entry from each list, in lexicographic order.
fn product_indices(choices: &[Vec<Elem>]) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let sizes: Vec<usize> = choices.iter().map(Vec::len).collect();
    let mut cur = if sizes.iter().any(|&s| s == 0) { None } else { Some(vec![0; sizes.len()]) };
    std::iter::from_fn(move || {
        let c = cur.take()?;
        let out = c.iter().zip(choices).map(|(&i, ch)| ch[i]).collect();
        let mut next = c;
        for i in (0..sizes.len()).rev() {
            next[i] += 1;
            if next[i] < sizes[i] {
                cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

/// A tracked `l: X -> A` with `gbar . l = k`, for `k: X -> Im(g)`.
pub fn lift_search(g: &AsmMorphism, k: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Option<AsmMorphism>> {
    let img = image_factorization(g, a)?;
    if **k.target() != *img.object {
        return Err(Error::Invalid("k does not land in the image of g".into()));
    }
    let x = k.source();
    for l in set_maps(x.len(), g.source().len()) {
        if (0..x.len()).all(|i| img.fbar.apply(l[i]) == k.apply(i)) && is_tracked(&l, x, g.source(), a)?.tracked {
            return Ok(Some(AsmMorphism::new(x.clone(), g.source().clone(), l, a)?));
        }
    }
    Ok(None)
}

/// Restricted growth strings: the set partitions of `0..n`.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let next = cur.iter().max().map_or(0, |&m| m + 1);
        for b in 0..=next {
            cur.push(b);
            go(n, cur, out);
            cur.pop();
        }
    }
    go(n, &mut cur, &mut out);
    out
}

/// One object per M-assembly with at most `bound` points (up to
/// reordering) and kernel partition. The target of each arrow is the set
/// of blocks, with the first existence values in `M` that make it tracked;
/// partitions admitting no such target are skipped.
///
/// Images, hom-classes and `U` only depend on the source and the kernel.
pub fn reg_objects(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Vec<RegObject> {
    let mvals: Vec<Elem> = m.iter().collect();
    let mut out = Vec::new();
    for x in enumerate_assemblies(bound, m, a) {
        let x = Arc::new(x);
        for p in set_partitions(x.len()) {
            let blocks = p.iter().max().map_or(0, |&b| b + 1);
            let arrow = set_maps(blocks, mvals.len()).find_map(|t| {
                let y = Arc::new(Assembly::from_values(t.iter().map(|&k| mvals[k]).collect(), a).ok()?);
                AsmMorphism::new(x.clone(), y, p.clone(), a).ok()
            });
            if let Some(f) = arrow {
                out.push(RegObject { f });
            }
        }
    }
    out
}

/// Instances `(g, k)` for the lifting property: `g` from [`reg_objects`],
/// `X` an M-assembly with at most `bound` points, `k: X -> Im(g)` tracked.
pub fn lifting_instances(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<Vec<(AsmMorphism, AsmMorphism)>> {
    let xs: Vec<Arc<Assembly>> = enumerate_assemblies(bound, m, a).into_iter().map(Arc::new).collect();
    let mut out = Vec::new();
    for g in reg_objects(m, a, bound) {
        let img = image_factorization(g.arrow(), a)?;
        for x in &xs {
            for k in tracked_maps(x, &img.object, a) {
                out.push((g.arrow().clone(), k));
            }
        }
    }
    Ok(out)
}

/// Every lifting instance at `bound` has a lift.
pub fn all_lifts(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<BoundedCheck> {
    let instances = lifting_instances(m, a, bound)?;
    for (i, (g, k)) in instances.iter().enumerate() {
        if lift_search(g, k, a)?.is_none() {
            let why = format!(
                "k = {} into the image of g = {} over {} has no lift",
                k.describe(),
                g.describe(),
                fmt_values(g.source().exist_values(), a)
            );
            return Ok(BoundedCheck::fail(bound, i + 1, why));
        }
    }
    Ok(BoundedCheck::pass(bound, instances.len()))
}

/// `U` is full and faithful on the objects of [`reg_objects`] at `bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullnessReport {
    pub full: BoundedCheck,
    pub faithful: bool,
    pub objects: usize,
}

pub fn fullness(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<FullnessReport> {
    check_subset(m, a)?;
    let objs = reg_objects(m, a, bound);
    let images = objs.iter().map(|o| u_functor(o, a)).collect::<Result<Vec<Image>>>()?;
    let mut faithful = true;
    let mut checked = 0;
    for (p, ip) in objs.iter().zip(&images) {
        for (q, iq) in objs.iter().zip(&images) {
            let hits = reg_hom(p, q, a).iter().map(|c| u_on_morphism(c, a).map(|h| h.map().to_vec())).collect::<Result<Vec<_>>>()?;
            let mut distinct = hits.clone();
            distinct.sort();
            distinct.dedup();
            faithful &= distinct.len() == hits.len();
            for h in tracked_maps(&ip.object, &iq.object, a) {
                checked += 1;
                if !hits.iter().any(|x| x == h.map()) {
                    let why = format!(
                        "{} between the images of kernels {:?} over {} and {:?} over {} is not U of any class",
                        h.describe(),
                        p.kernel(),
                        fmt_values(p.source().exist_values(), a),
                        q.kernel(),
                        fmt_values(q.source().exist_values(), a)
                    );
                    return Ok(FullnessReport { full: BoundedCheck::fail(bound, checked, why), faithful, objects: objs.len() });
                }
            }
        }
    }
    Ok(FullnessReport { full: BoundedCheck::pass(bound, checked), faithful, objects: objs.len() })
}

/// Everything needed to compare `Asm_M` with the regular completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorReport {
    pub bound: usize,
    pub algebraic: Algebraicity,
    pub density: DensityReport,
    pub compactness: CompactnessReport,
    pub generator: Option<bool>,
}

/// Algebraic, dense and compact at `bound`.
pub fn is_generator(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<GeneratorReport> {
    let algebraic = is_algebraic(m, a);
    let density = decide_density(m, a)?;
    let compactness = is_compact(m, a, bound)?;
    let generator = match (algebraic.algebraic, density.dense, compactness.compact) {
        (false, _, _) | (_, Some(false), _) | (_, _, Some(false)) => Some(false),
        (true, Some(true), Some(true)) => Some(true),
        _ => None,
    };
    Ok(GeneratorReport { bound, algebraic, density, compactness, generator })
}

/// Bounded evidence that `U` is an equivalence, with the cross-checks
/// between the definitions and the categorical statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UEquivalenceReport {
    pub bound: usize,
    pub generator: GeneratorReport,
    pub valuations: BoundedCheck,
    pub essentially_surjective: BoundedCheck,
    pub lifts: BoundedCheck,
    pub fullness: FullnessReport,
    /// Density agrees with both bounded density procedures, and
    /// compactness with fullness and the lifting search.
    pub consistent: bool,
}

impl UEquivalenceReport {
    pub fn equivalence(&self) -> bool {
        self.essentially_surjective.holds && self.fullness.full.holds && self.fullness.faithful
    }
}

pub fn check_u_equivalence(m: ElemSet, a: &ImplicativeAlgebra, bound: usize) -> Result<UEquivalenceReport> {
    let generator = is_generator(m, a, bound)?;
    let valuations = valuation_existence(m, a, bound)?;
    let essentially_surjective = essential_surjectivity(m, a, bound)?;
    let lifts = all_lifts(m, a, bound)?;
    let fullness = fullness(m, a, bound)?;
    let dense = generator.density.dense;
    let compact = generator.compactness.compact;
    let consistent = dense.map_or(true, |d| d == valuations.holds && d == essentially_surjective.holds)
        && compact.map_or(true, |c| c == lifts.holds && c == fullness.full.holds);
    Ok(UEquivalenceReport { bound, generator, valuations, essentially_surjective, lifts, fullness, consistent })
}
