//! Assemblies over a finite implicative algebra and their tracked maps.

use std::collections::HashSet;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{check_tracker, Family, ImplicativeAlgebra, TrackerCheck, Valuation};
use crate::error::{Error, Result};
use crate::lambda::Env;
use crate::order::{Elem, ElemSet};

/// A finite set with an existence predicate valued in the separator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Assembly {
    labels: Vec<String>,
    exist: Vec<Elem>,
}

impl Assembly {
    pub fn new(labels: Vec<String>, exist: Vec<Elem>, a: &ImplicativeAlgebra) -> Result<Assembly> {
        let x = Assembly::unchecked(labels, exist)?;
        if let Some(&e) = x.exist.iter().find(|&&e| !a.in_sep(e)) {
            return Err(Error::OutsideSeparator(a.name(e).into()));
        }
        Ok(x)
    }

    /// Labels `x0, x1, ...`.
    pub fn from_values(exist: Vec<Elem>, a: &ImplicativeAlgebra) -> Result<Assembly> {
        let labels = (0..exist.len()).map(|i| format!("x{i}")).collect();
        Assembly::new(labels, exist, a)
    }

    /// Skips the separator check, keeping the label checks.
    pub fn unchecked(labels: Vec<String>, exist: Vec<Elem>) -> Result<Assembly> {
        if labels.len() != exist.len() {
            return Err(Error::NonTotalMap(format!("{} points but {} existence values", labels.len(), exist.len())));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateName(l.clone()));
            }
        }
        Ok(Assembly { labels, exist })
    }

    /// The one-point assembly with existence top.
    pub fn terminal(a: &ImplicativeAlgebra) -> Assembly {
        Assembly { labels: vec!["*".into()], exist: vec![a.top()] }
    }

    /// The chaotic assembly on a set: existence is constantly top.
    pub fn chaotic(labels: Vec<String>, a: &ImplicativeAlgebra) -> Result<Assembly> {
        let exist = vec![a.top(); labels.len()];
        Assembly::unchecked(labels, exist)
    }

    /// The separator as an assembly, each member existing as itself.
    pub fn separator_object(a: &ImplicativeAlgebra) -> Assembly {
        let members: Vec<Elem> = a.separator().iter().collect();
        Assembly { labels: members.iter().map(|&e| a.name(e).to_string()).collect(), exist: members }
    }

    pub fn len(&self) -> usize {
        self.exist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exist.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn exist(&self, i: usize) -> Elem {
        self.exist[i]
    }

    pub fn exist_values(&self) -> &[Elem] {
        &self.exist
    }

    pub fn point(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownElement(label.into()))
    }

    pub fn is_m_assembly(&self, m: ElemSet) -> bool {
        self.exist.iter().all(|&e| m.contains(e))
    }
}

/// All maps `0..n -> 0..m` as vectors, in lexicographic order.
pub fn set_maps(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = if m == 0 && n > 0 { None } else { Some(vec![0; n]) };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = n;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < m {
                cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

/// All bijections `0..n -> 0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    set_maps(n, n)
        .filter(|p| {
            let mut seen = vec![false; n];
            p.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
        })
        .collect()
}

fn check_total(map: &[usize], x: &Assembly, y: &Assembly) -> Result<()> {
    if map.len() != x.len() {
        return Err(Error::NonTotalMap(format!("{} images for {} points", map.len(), x.len())));
    }
    if let Some(&bad) = map.iter().find(|&&j| j >= y.len()) {
        return Err(Error::NonTotalMap(format!("image index {bad} outside a target of {} points", y.len())));
    }
    Ok(())
}

/// `meet_x (e_X(x) -> e_Y(f x))`.
pub fn tracking_witness(map: &[usize], x: &Assembly, y: &Assembly, a: &ImplicativeAlgebra) -> Elem {
    a.meet_iter(map.iter().enumerate().map(|(i, &j)| a.imp(x.exist(i), y.exist(j))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tracking {
    pub tracked: bool,
    pub witness: Elem,
}

/// Decides whether a set map is tracked, returning the best witness.
pub fn is_tracked(map: &[usize], x: &Assembly, y: &Assembly, a: &ImplicativeAlgebra) -> Result<Tracking> {
    check_total(map, x, y)?;
    let w = tracking_witness(map, x, y, a);
    Ok(Tracking { tracked: a.in_sep(w), witness: w })
}

/// A tracked map between assemblies with its cached witness.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AsmMorphism {
    source: Arc<Assembly>,
    target: Arc<Assembly>,
    map: Vec<usize>,
    tracker: Elem,
}

impl AsmMorphism {
    pub fn new(source: Arc<Assembly>, target: Arc<Assembly>, map: Vec<usize>, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
        let t = is_tracked(&map, &source, &target, a)?;
        if !t.tracked {
            return Err(Error::Untracked(a.name(t.witness).into()));
        }
        Ok(AsmMorphism { source, target, map, tracker: t.witness })
    }

    pub fn identity(x: Arc<Assembly>, a: &ImplicativeAlgebra) -> AsmMorphism {
        let map = (0..x.len()).collect();
        AsmMorphism::new(x.clone(), x, map, a).expect("identities are tracked")
    }

    pub fn source(&self) -> &Arc<Assembly> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Assembly> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// The computed witness `meet_x (e(x) -> e(f x))`.
    pub fn tracker(&self) -> Elem {
        self.tracker
    }

    /// `g . self`.
    pub fn then(&self, g: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
        if *self.target != *g.source {
            return Err(Error::Invalid("composite of non-composable morphisms".into()));
        }
        let map = self.map.iter().map(|&i| g.map[i]).collect();
        AsmMorphism::new(self.source.clone(), g.target.clone(), map, a)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> =
            self.map.iter().enumerate().map(|(i, &j)| format!("{} -> {}", self.source.label(i), self.target.label(j))).collect();
        parts.join(", ")
    }
}

/// Every tracked map `x -> y`.
pub fn tracked_maps(x: &Arc<Assembly>, y: &Arc<Assembly>, a: &ImplicativeAlgebra) -> Vec<AsmMorphism> {
    set_maps(x.len(), y.len()).filter_map(|m| AsmMorphism::new(x.clone(), y.clone(), m, a).ok()).collect()
}

/// The existence predicate as a family.
pub fn xi(x: &Assembly) -> Family {
    Family { index: x.labels.clone(), values: x.exist.clone() }
}

/// The assembly of a family whose values lie in the separator.
pub fn xi_inv(u: &Family, a: &ImplicativeAlgebra) -> Result<Assembly> {
    Assembly::new(u.index.clone(), u.values.clone(), a)
}

/// Reindexing `f* v` of a family along a map.
pub fn reindex(v: &Family, map: &[usize], index: &[String]) -> Family {
    Family { index: index.to_vec(), values: map.iter().map(|&j| v.values[j]).collect() }
}

/// The product with encoded-meet existence and its projections.
#[derive(Debug, Clone)]
pub struct Product {
    pub object: Arc<Assembly>,
    pub pairs: Vec<(usize, usize)>,
    pub p0: AsmMorphism,
    pub p1: AsmMorphism,
}

fn pair_object(
    x: &Arc<Assembly>,
    y: &Arc<Assembly>,
    pairs: Vec<(usize, usize)>,
    a: &ImplicativeAlgebra,
) -> Result<Product> {
    let labels = pairs.iter().map(|&(i, j)| format!("({},{})", x.label(i), y.label(j))).collect();
    let exist = pairs.iter().map(|&(i, j)| a.encoded_meet(x.exist(i), y.exist(j))).collect();
    let object = Arc::new(Assembly::new(labels, exist, a)?);
    let p0 = AsmMorphism::new(object.clone(), x.clone(), pairs.iter().map(|p| p.0).collect(), a)?;
    let p1 = AsmMorphism::new(object.clone(), y.clone(), pairs.iter().map(|p| p.1).collect(), a)?;
    Ok(Product { object, pairs, p0, p1 })
}

pub fn product(x: &Arc<Assembly>, y: &Arc<Assembly>, a: &ImplicativeAlgebra) -> Result<Product> {
    let pairs = (0..x.len()).flat_map(|i| (0..y.len()).map(move |j| (i, j))).collect();
    pair_object(x, y, pairs, a)
}

/// Pullback of `f: X -> Z` and `g: Y -> Z`, computed on carriers.
pub fn pullback(f: &AsmMorphism, g: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Product> {
    if *f.target != *g.target {
        return Err(Error::Invalid("pullback of maps with different codomains".into()));
    }
    let pairs =
        (0..f.source.len()).flat_map(|i| (0..g.source.len()).map(move |j| (i, j))).filter(|&(i, j)| f.map[i] == g.map[j]).collect();
    pair_object(&f.source, &g.source, pairs, a)
}

/// Kernel pair of `f` with the two projections.
pub fn kernel_pair(f: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Product> {
    pullback(f, f, a)
}

/// The projection trackers of a kernel pair (or any pair object).
pub fn projection_trackers(p: &Product, a: &ImplicativeAlgebra) -> Result<Vec<TrackerCheck>> {
    Ok(vec![
        check_tracker("first projection", "lam z . z (lam x y . x)", &Env::new(), p.p0.tracker(), a)?,
        check_tracker("second projection", "lam z . z (lam x y . y)", &Env::new(), p.p1.tracker(), a)?,
    ])
}

#[derive(Debug, Clone)]
pub struct Equalizer {
    pub object: Arc<Assembly>,
    pub inclusion: AsmMorphism,
}

/// Equalizer of parallel maps: the subassembly where they agree.
pub fn equalizer(f: &AsmMorphism, g: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Equalizer> {
    if *f.source != *g.source || *f.target != *g.target {
        return Err(Error::Invalid("equalizer of non-parallel maps".into()));
    }
    let keep: Vec<usize> = (0..f.source.len()).filter(|&i| f.map[i] == g.map[i]).collect();
    let labels = keep.iter().map(|&i| f.source.label(i).to_string()).collect();
    let exist = keep.iter().map(|&i| f.source.exist(i)).collect();
    let object = Arc::new(Assembly::new(labels, exist, a)?);
    let inclusion = AsmMorphism::new(object.clone(), f.source.clone(), keep, a)?;
    Ok(Equalizer { object, inclusion })
}

/// Maps `w -> apex` commuting with the legs, and whether each is tracked.
pub fn mediating_maps(
    cone: &[AsmMorphism],
    legs: &[AsmMorphism],
    a: &ImplicativeAlgebra,
) -> Result<Vec<(Vec<usize>, bool)>> {
    let w = cone.first().ok_or_else(|| Error::Invalid("empty cone".into()))?.source.clone();
    let apex = legs.first().ok_or_else(|| Error::Invalid("empty limit".into()))?.source.clone();
    let mut out = Vec::new();
    for m in set_maps(w.len(), apex.len()) {
        let commutes = cone.iter().zip(legs).all(|(c, l)| (0..w.len()).all(|i| l.map[m[i]] == c.map[i]));
        if commutes {
            let t = is_tracked(&m, &w, &apex, a)?.tracked;
            out.push((m, t));
        }
    }
    Ok(out)
}

/// Whether a cone factors through the limit legs uniquely and trackedly.
pub fn factors_uniquely(cone: &[AsmMorphism], legs: &[AsmMorphism], a: &ImplicativeAlgebra) -> Result<bool> {
    let ms = mediating_maps(cone, legs, a)?;
    Ok(ms.len() == 1 && ms[0].1)
}

/// Image factorization `f = iota . fbar`.
#[derive(Debug, Clone)]
pub struct Image {
    pub object: Arc<Assembly>,
    /// Fibres `f^-1(f(x))`, ordered by first point.
    pub classes: Vec<Vec<usize>>,
    pub fbar: AsmMorphism,
    pub iota: AsmMorphism,
}

pub fn image_factorization(f: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Image> {
    let x = &f.source;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0; x.len()];
    let mut image_of: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        match image_of.iter().position(|&y| y == f.map[i]) {
            Some(c) => {
                classes[c].push(i);
                class_of[i] = c;
            }
            None => {
                image_of.push(f.map[i]);
                classes.push(vec![i]);
                class_of[i] = classes.len() - 1;
            }
        }
    }
    let labels = classes.iter().map(|c| format!("[{}]", x.label(c[0]))).collect();
    let exist = classes.iter().map(|c| a.e_exists(c.iter().map(|&i| x.exist(i)).collect())).collect();
    let object = Arc::new(Assembly::new(labels, exist, a)?);
    let fbar = AsmMorphism::new(x.clone(), object.clone(), class_of, a)?;
    let iota = AsmMorphism::new(object.clone(), f.target.clone(), image_of, a)?;
    Ok(Image { object, classes, fbar, iota })
}

/// The two trackers displayed for an image factorization.
pub fn image_trackers(f: &AsmMorphism, img: &Image, a: &ImplicativeAlgebra) -> Result<Vec<TrackerCheck>> {
    let env = Env::new().with("tau", f.tracker());
    Ok(vec![
        check_tracker("projection onto the image", "lam x z . z x", &Env::new(), img.fbar.tracker(), a)?,
        check_tracker("inclusion of the image", "lam z . z tau", &env, img.iota.tracker(), a)?,
    ])
}

pub fn is_mono(f: &AsmMorphism) -> bool {
    f.is_injective()
}

/// The inverse of a bijective morphism, when tracked.
pub fn inverse(f: &AsmMorphism, a: &ImplicativeAlgebra) -> Option<AsmMorphism> {
    if !(f.is_injective() && f.is_surjective()) {
        return None;
    }
    let mut inv = vec![0; f.target.len()];
    for (i, &j) in f.map.iter().enumerate() {
        inv[j] = i;
    }
    AsmMorphism::new(f.target.clone(), f.source.clone(), inv, a).ok()
}

pub fn is_iso(f: &AsmMorphism, a: &ImplicativeAlgebra) -> bool {
    inverse(f, a).is_some()
}

/// Surjective with an isomorphic image inclusion.
pub fn is_regular_epi(f: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<bool> {
    if !f.is_surjective() {
        return Ok(false);
    }
    Ok(is_iso(&image_factorization(f, a)?.iota, a))
}

/// An isomorphism between two assemblies, if any.
pub fn find_iso(x: &Arc<Assembly>, y: &Arc<Assembly>, a: &ImplicativeAlgebra) -> Option<AsmMorphism> {
    if x.len() != y.len() {
        return None;
    }
    permutations(x.len())
        .into_iter()
        .filter_map(|p| AsmMorphism::new(x.clone(), y.clone(), p, a).ok())
        .find(|f| is_iso(f, a))
}

/// `[x] |-> { e_X(x') | x' in [x] }` over the image of `f`.
pub fn induced_valuation(f: &AsmMorphism, a: &ImplicativeAlgebra) -> Result<Valuation> {
    let img = image_factorization(f, a)?;
    let values = img.classes.iter().map(|c| c.iter().map(|&i| f.source.exist(i)).collect()).collect();
    Valuation::new(a.separator(), values)
}

/// The cover of a valuation: `g: hatX -> checkX` and the image comparison.
#[derive(Debug, Clone)]
pub struct ValuationCover {
    pub hat: Arc<Assembly>,
    pub check: Arc<Assembly>,
    /// `(x, m)` for each point of `hat`.
    pub points: Vec<(usize, Elem)>,
    pub g: AsmMorphism,
    pub image: Image,
    /// Whether `(X, e_exists . nu)` and `Im(g)` have entailing existence both ways.
    pub iso: bool,
    pub tracker: TrackerCheck,
}

pub fn valuation_cover(labels: &[String], nu: &Valuation, m0: Elem, a: &ImplicativeAlgebra) -> Result<ValuationCover> {
    if labels.len() != nu.len() {
        return Err(Error::IndexMismatch(format!("{} labels for a valuation of {} points", labels.len(), nu.len())));
    }
    if !nu.m.contains(m0) {
        return Err(Error::Invalid(format!("{} is not in M", a.name(m0))));
    }
    if let Some(i) = nu.values.iter().position(|v| v.is_empty()) {
        return Err(Error::EmptyValuation(i));
    }
    let points: Vec<(usize, Elem)> = nu.values.iter().enumerate().flat_map(|(i, v)| v.iter().map(move |m| (i, m))).collect();
    let hat = Arc::new(Assembly::new(
        points.iter().map(|&(i, m)| format!("({},{})", labels[i], a.name(m))).collect(),
        points.iter().map(|p| p.1).collect(),
        a,
    )?);
    let check = Arc::new(Assembly::new(labels.to_vec(), vec![m0; labels.len()], a)?);
    let g = AsmMorphism::new(hat.clone(), check.clone(), points.iter().map(|p| p.0).collect(), a)?;
    let image = image_factorization(&g, a)?;
    let exists: Vec<Elem> = nu.values.iter().map(|&v| a.e_exists(v)).collect();
    // Classes of g are the fibres over each x, listed in order of x.
    let im_vals: Vec<Elem> = image.object.exist_values().to_vec();
    let iso = a.in_sep(a.entailment_witness(&exists, &im_vals)) && a.in_sep(a.entailment_witness(&im_vals, &exists));
    let tracker = check_tracker("cover map", "lam x . m0", &Env::new().with("m0", m0), g.tracker(), a)?;
    Ok(ValuationCover { hat, check, points, g, image, iso, tracker })
}

/// Outcome of the pre-embedding test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreEmbedding {
    pub holds: bool,
    /// `meet_x ((e_Y(f x) /\ top) -> e_X(x))`: the inverse of the comparison
    /// map into the pullback of `Delta |f|` along the unit of `Y`.
    pub witness: Elem,
}

/// Whether the unit square at `f` is a pullback.
///
/// The pullback of `Y -> Delta|Y| <- Delta|X|` has carrier `{(f x, x)}`
/// with existence `e_Y(f x) /\ top`; the comparison from `X` is bijective
/// and tracked, so the square is a pullback iff its inverse is tracked.
pub fn is_pre_embedding(f: &AsmMorphism, a: &ImplicativeAlgebra) -> PreEmbedding {
    let x = &f.source;
    let w = a.meet_iter((0..x.len()).map(|i| a.imp(a.encoded_meet(f.target.exist(f.map[i]), a.top()), x.exist(i))));
    PreEmbedding { holds: a.in_sep(w), witness: w }
}

/// For each assembly, whether `x |-> e_X(x)` into the separator object is a pre-embedding.
pub fn generic_object_check(corpus: &[Arc<Assembly>], a: &ImplicativeAlgebra) -> Result<Vec<bool>> {
    let s = Arc::new(Assembly::separator_object(a));
    let members: Vec<Elem> = a.separator().iter().collect();
    corpus
        .iter()
        .map(|x| {
            let map = x.exist_values().iter().map(|e| members.iter().position(|m| m == e).expect("existence in S")).collect();
            let f = AsmMorphism::new(x.clone(), s.clone(), map, a)?;
            Ok(is_pre_embedding(&f, a).holds)
        })
        .collect()
}

/// Assemblies with at most `max_len` points and existence drawn from
/// `values`, one per isomorphism class of labelled multisets.
pub fn enumerate_assemblies(max_len: usize, values: ElemSet, a: &ImplicativeAlgebra) -> Vec<Assembly> {
    let vals: Vec<Elem> = values.intersect(a.separator()).iter().collect();
    let mut out = Vec::new();
    for n in 1..=max_len {
        for choice in set_maps(n, vals.len()) {
            if choice.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let exist = choice.iter().map(|&k| vals[k]).collect();
            out.push(Assembly::from_values(exist, a).expect("values lie in the separator"));
        }
    }
    out
}

/// Result of a bounded projectivity search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Projectivity {
    pub projective: bool,
    pub bound: usize,
    pub epis_checked: usize,
    /// A regular epi `A -> X` with no tracked section, as (existence of A, map).
    pub counterexample: Option<(Vec<String>, Vec<usize>)>,
}

/// Looks for a regular epi `A -> X` with `|A| <= bound` and no tracked section.
pub fn is_projective(x: &Arc<Assembly>, bound: usize, a: &ImplicativeAlgebra) -> Result<Projectivity> {
    let mut checked = 0;
    for cand in enumerate_assemblies(bound, a.separator(), a) {
        let cand = Arc::new(cand);
        for e in tracked_maps(&cand, x, a) {
            if !is_regular_epi(&e, a)? {
                continue;
            }
            checked += 1;
            let has_section = set_maps(x.len(), cand.len())
                .filter(|s| s.iter().enumerate().all(|(i, &j)| e.map[j] == i))
                .any(|s| is_tracked(&s, x, &cand, a).map(|t| t.tracked).unwrap_or(false));
            if !has_section {
                let ex = cand.exist_values().iter().map(|&v| a.name(v).to_string()).collect();
                return Ok(Projectivity { projective: false, bound, epis_checked: checked, counterexample: Some((ex, e.map.clone())) });
            }
        }
    }
    Ok(Projectivity { projective: true, bound, epis_checked: checked, counterexample: None })
}

/// Diagonal fill-ins `d` of a square `m . u = v . e` with `d . e = u`, `m . d = v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FillIn {
    pub fillers: usize,
    pub tracked: bool,
}

pub fn diagonal_fill(
    e: &AsmMorphism,
    m: &AsmMorphism,
    u: &AsmMorphism,
    v: &AsmMorphism,
    a: &ImplicativeAlgebra,
) -> Result<FillIn> {
    let b = &e.target;
    let c = &m.source;
    let commutes = (0..e.source.len()).all(|i| m.map[u.map[i]] == v.map[e.map[i]]);
    if !commutes {
        return Err(Error::Invalid("square does not commute".into()));
    }
    let mut fillers = 0;
    let mut tracked = true;
    for d in set_maps(b.len(), c.len()) {
        let ok = (0..e.source.len()).all(|i| d[e.map[i]] == u.map[i]) && (0..b.len()).all(|j| m.map[d[j]] == v.map[j]);
        if ok {
            fillers += 1;
            tracked &= is_tracked(&d, b, c, a)?.tracked;
        }
    }
    Ok(FillIn { fillers, tracked: tracked && fillers > 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fam_entails;
    use crate::corpus;
    use crate::lambda::{combinator, Combinator};

    fn asm(a: &ImplicativeAlgebra, vals: &[&str]) -> Arc<Assembly> {
        Arc::new(Assembly::from_values(vals.iter().map(|v| a.elem(v).unwrap()).collect(), a).unwrap())
    }

    #[test]
    fn identity_and_top_targets_are_tracked() {
        let a = corpus::h3h();
        let x = asm(&a, &["h", "1"]);
        let id = AsmMorphism::identity(x.clone(), &a);
        assert!(a.leq(combinator(Combinator::I, a.structure()), id.tracker()));
        let t = Arc::new(Assembly::terminal(&a));
        for m in set_maps(2, 1) {
            assert!(is_tracked(&m, &x, &t, &a).unwrap().tracked);
        }
        assert!(is_tracked(&[0], &x, &t, &a).is_err());
    }

    #[test]
    fn legality_of_existence() {
        let a = corpus::h3();
        let h = a.elem("h").unwrap();
        assert_eq!(Assembly::from_values(vec![h], &a), Err(Error::OutsideSeparator("h".into())));
        // With S = {h, 1} the map from e=1 to e=h is tracked: 1 -> h = h.
        let a = corpus::h3h();
        let (x, y) = (asm(&a, &["1"]), asm(&a, &["h"]));
        let t = is_tracked(&[0], &x, &y, &a).unwrap();
        assert_eq!(a.name(t.witness), "h");
        assert!(t.tracked);
    }

    #[test]
    fn xi_round_trip_and_functoriality() {
        let a = corpus::h3h();
        let x = asm(&a, &["h", "1", "h"]);
        assert_eq!(xi_inv(&xi(&x), &a).unwrap(), *x);
        let y = asm(&a, &["1", "h"]);
        for m in set_maps(3, 2) {
            let t = is_tracked(&m, &x, &y, &a).unwrap();
            let e = fam_entails(&xi(&x), &reindex(&xi(&y), &m, x.labels()), &a).unwrap();
            assert_eq!(t.tracked, e.holds);
            assert_eq!(t.witness, e.witness);
        }
        let b2 = corpus::b2();
        assert_eq!(xi(&asm(&b2, &["1", "1"])).values, vec![b2.top(), b2.top()]);
    }

    #[test]
    fn kernel_pairs() {
        let a = corpus::b2();
        let x = asm(&a, &["1", "1"]);
        let id = AsmMorphism::identity(x.clone(), &a);
        let k = kernel_pair(&id, &a).unwrap();
        assert_eq!(k.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(k.p0.map(), k.p1.map());
        let pt = asm(&a, &["1"]);
        let c = AsmMorphism::new(x.clone(), pt, vec![0, 0], &a).unwrap();
        let k = kernel_pair(&c, &a).unwrap();
        assert_eq!(k.pairs.len(), 4);
        for t in projection_trackers(&k, &a).unwrap() {
            assert!(t.passes(), "{t}");
        }
    }

    #[test]
    fn limits() {
        let a = corpus::h3h();
        let x = asm(&a, &["h", "1"]);
        let t = Arc::new(Assembly::terminal(&a));
        let p = product(&x, &t, &a).unwrap();
        let back = AsmMorphism::new(x.clone(), p.object.clone(), vec![0, 1], &a).unwrap();
        assert!(is_iso(&back, &a));
        let f = AsmMorphism::new(x.clone(), t.clone(), vec![0, 0], &a).unwrap();
        let eq = equalizer(&f, &f, &a).unwrap();
        assert!(is_iso(&eq.inclusion, &a));
        // Pullback over a point is the product.
        let y = asm(&a, &["1", "h"]);
        let g = AsmMorphism::new(y.clone(), t.clone(), vec![0, 0], &a).unwrap();
        let pb = pullback(&f, &g, &a).unwrap();
        let pr = product(&x, &y, &a).unwrap();
        assert_eq!(pb.object, pr.object);
        // Universal property on all cones from small assemblies.
        for w in enumerate_assemblies(2, a.separator(), &a) {
            let w = Arc::new(w);
            for c0 in tracked_maps(&w, &x, &a) {
                for c1 in tracked_maps(&w, &y, &a) {
                    assert!(factors_uniquely(&[c0.clone(), c1], &[pr.p0.clone(), pr.p1.clone()], &a).unwrap());
                }
            }
        }
    }

    #[test]
    fn image_factorizations() {
        let a = corpus::b2();
        let x = asm(&a, &["1", "1"]);
        let pt = asm(&a, &["1"]);
        let c = AsmMorphism::new(x.clone(), pt.clone(), vec![0, 0], &a).unwrap();
        let img = image_factorization(&c, &a).unwrap();
        assert_eq!(img.classes, vec![vec![0, 1]]);
        assert_eq!(img.object.exist_values(), &[a.top()]);
        assert!(is_mono(&img.iota));
        assert!(is_regular_epi(&img.fbar, &a).unwrap());
        for t in image_trackers(&c, &img, &a).unwrap() {
            assert!(t.passes(), "{t}");
        }
        let id = AsmMorphism::identity(x.clone(), &a);
        let img = image_factorization(&id, &a).unwrap();
        assert!(img.classes.iter().all(|c| c.len() == 1));
        assert!(is_iso(&img.iota, &a));
    }

    #[test]
    fn induced_valuation_matches_image() {
        for a in [corpus::h3h(), corpus::c3x(), corpus::sq_l()] {
            let vals: Vec<Elem> = a.separator().iter().collect();
            let x = Arc::new(Assembly::from_values(vals.clone(), &a).unwrap());
            let y = Arc::new(Assembly::from_values(vec![a.top(), a.top()], &a).unwrap());
            for f in tracked_maps(&x, &y, &a) {
                let nu = induced_valuation(&f, &a).unwrap();
                let img = image_factorization(&f, &a).unwrap();
                let ex: Vec<Elem> = nu.values.iter().map(|&u| a.e_exists(u)).collect();
                assert_eq!(ex, img.object.exist_values());
            }
        }
    }

    #[test]
    fn valuation_covers() {
        let a = corpus::h3h();
        let (h, one) = (a.elem("h").unwrap(), a.elem("1").unwrap());
        let m = a.separator();
        let labels = vec!["a".to_string(), "b".to_string()];
        let nu = Valuation::new(m, vec![ElemSet::singleton(h), ElemSet::singleton(one)]).unwrap();
        let cov = valuation_cover(&labels, &nu, h, &a).unwrap();
        assert_eq!(cov.hat.len(), 2);
        assert!(cov.iso);
        assert!(cov.tracker.passes(), "{}", cov.tracker);
        assert_eq!(cov.image.object.exist_values(), &[a.e_exists(ElemSet::singleton(h)), a.e_exists(ElemSet::singleton(one))]);
        let nu = Valuation::new(m, vec![ElemSet::singleton(h); 2]).unwrap();
        let cov = valuation_cover(&labels, &nu, h, &a).unwrap();
        assert!(find_iso(&cov.hat, &cov.check, &a).is_some());
        assert_eq!(
            valuation_cover(&labels, &Valuation { m, values: vec![ElemSet::EMPTY, m] }, h, &a).unwrap_err(),
            Error::EmptyValuation(0)
        );
    }

    #[test]
    fn pre_embeddings_and_generic_object() {
        let a = corpus::h3h();
        let x = asm(&a, &["h", "1"]);
        assert!(is_pre_embedding(&AsmMorphism::identity(x.clone(), &a), &a).holds);
        let corpus: Vec<Arc<Assembly>> = enumerate_assemblies(2, a.separator(), &a).into_iter().map(Arc::new).collect();
        assert!(generic_object_check(&corpus, &a).unwrap().into_iter().all(|b| b));
    }

    #[test]
    fn set_map_enumeration() {
        assert_eq!(set_maps(2, 3).count(), 9);
        assert_eq!(set_maps(0, 3).count(), 1);
        assert_eq!(set_maps(2, 0).count(), 0);
        assert_eq!(permutations(3).len(), 6);
    }
}
