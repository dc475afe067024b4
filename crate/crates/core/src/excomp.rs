//! Pseudo-groupoids in `Asm_M`, quiver morphisms, homotopies and the
//! hom-sets of the exact completion.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{ImplicativeAlgebra, PartialValuation};
use crate::assembly::{is_tracked, pullback, set_maps, tracked_maps, AsmMorphism, Assembly, Product};
use crate::error::{Error, Result};
use crate::order::{Elem, ElemSet};

/// A pseudo-groupoid: vertices `x0`, edges `x1`, source and target, and
/// the structure maps. `tau` is indexed like `composable.pairs`, the
/// pairs `(e, e')` with `t(e) = s(e')`.
#[derive(Debug, Clone)]
pub struct PseudoGroupoid {
    pub s: AsmMorphism,
    pub t: AsmMorphism,
    pub rho: Vec<usize>,
    pub sigma: Vec<usize>,
    pub composable: Product,
    pub tau: Vec<usize>,
}

impl PseudoGroupoid {
    /// Assembles the data without checking the structure equations.
    pub fn new(
        s: AsmMorphism,
        t: AsmMorphism,
        rho: Vec<usize>,
        sigma: Vec<usize>,
        tau: impl Fn(usize, usize) -> Option<usize>,
        a: &ImplicativeAlgebra,
    ) -> Result<PseudoGroupoid> {
        if *s.source() != *t.source() || *s.target() != *t.target() {
            return Err(Error::Invalid("source and target maps are not parallel".into()));
        }
        let (n0, n1) = (s.target().len(), s.source().len());
        if rho.len() != n0 || rho.iter().any(|&e| e >= n1) {
            return Err(Error::NonTotalMap("rho".into()));
        }
        if sigma.len() != n1 || sigma.iter().any(|&e| e >= n1) {
            return Err(Error::NonTotalMap("sigma".into()));
        }
        let composable = pullback(&t, &s, a)?;
        let tau = composable
            .pairs
            .iter()
            .map(|&(e, f)| match tau(e, f) {
                Some(g) if g < n1 => Ok(g),
                _ => Err(Error::NonTotalMap(format!(
                    "tau at ({}, {})",
                    s.source().label(e),
                    s.source().label(f)
                ))),
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(PseudoGroupoid { s, t, rho, sigma, composable, tau })
    }

    /// `id, id: X => X`.
    pub fn discrete(x: Arc<Assembly>, a: &ImplicativeAlgebra) -> PseudoGroupoid {
        let id = AsmMorphism::identity(x.clone(), a);
        let n = x.len();
        PseudoGroupoid::new(id.clone(), id, (0..n).collect(), (0..n).collect(), |e, _| Some(e), a)
            .expect("discrete structure is total")
    }

    /// `X x X => X` with the diagonal, the swap and the outer pair.
    pub fn codiscrete(x: Arc<Assembly>, a: &ImplicativeAlgebra) -> Result<PseudoGroupoid> {
        let n = x.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let labels = pairs.iter().map(|&(i, j)| format!("({},{})", x.label(i), x.label(j))).collect();
        let exist = pairs.iter().map(|&(i, j)| a.encoded_meet(x.exist(i), x.exist(j))).collect();
        let x1 = Arc::new(Assembly::new(labels, exist, a)?);
        let s = AsmMorphism::new(x1.clone(), x.clone(), pairs.iter().map(|p| p.0).collect(), a)?;
        let t = AsmMorphism::new(x1, x, pairs.iter().map(|p| p.1).collect(), a)?;
        let rho = (0..n).map(|i| i * n + i).collect();
        let sigma = pairs.iter().map(|&(i, j)| j * n + i).collect();
        PseudoGroupoid::new(s, t, rho, sigma, |e, f| Some(pairs[e].0 * n + pairs[f].1), a)
    }

    pub fn vertices(&self) -> &Arc<Assembly> {
        self.s.target()
    }

    pub fn edge_object(&self) -> &Arc<Assembly> {
        self.s.source()
    }

    /// `X(x, x')`.
    pub fn edges(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.edge_object().len()).filter(|&e| self.s.apply(e) == x && self.t.apply(e) == y).collect()
    }

    pub fn composable_index(&self, e: usize, f: usize) -> Option<usize> {
        self.composable.pairs.iter().position(|&p| p == (e, f))
    }

    pub fn rho_map(&self, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
        AsmMorphism::new(self.vertices().clone(), self.edge_object().clone(), self.rho.clone(), a)
    }

    pub fn sigma_map(&self, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
        AsmMorphism::new(self.edge_object().clone(), self.edge_object().clone(), self.sigma.clone(), a)
    }

    pub fn tau_map(&self, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
        AsmMorphism::new(self.composable.object.clone(), self.edge_object().clone(), self.tau.clone(), a)
    }

    /// Existence value of an edge.
    pub fn edge_exist(&self, e: usize) -> Elem {
        self.edge_object().exist(e)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroupoidReport {
    pub violations: Vec<String>,
}

impl GroupoidReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The six structure equations and the trackedness of `rho`, `sigma`, `tau`.
pub fn validate_pseudo_groupoid(g: &PseudoGroupoid, a: &ImplicativeAlgebra) -> GroupoidReport {
    let mut r = GroupoidReport::default();
    let (v, e) = (g.vertices(), g.edge_object());
    for x in 0..v.len() {
        let l = g.rho[x];
        if g.s.apply(l) != x {
            r.violations.push(format!("s . rho = id fails at {}", v.label(x)));
        }
        if g.t.apply(l) != x {
            r.violations.push(format!("t . rho = id fails at {}", v.label(x)));
        }
    }
    for d in 0..e.len() {
        if g.s.apply(g.sigma[d]) != g.t.apply(d) {
            r.violations.push(format!("s . sigma = t fails at {}", e.label(d)));
        }
        if g.t.apply(g.sigma[d]) != g.s.apply(d) {
            r.violations.push(format!("t . sigma = s fails at {}", e.label(d)));
        }
    }
    for (k, &(d1, d2)) in g.composable.pairs.iter().enumerate() {
        if g.s.apply(g.tau[k]) != g.s.apply(d1) {
            r.violations.push(format!("s . tau = s . p0 fails at ({}, {})", e.label(d1), e.label(d2)));
        }
        if g.t.apply(g.tau[k]) != g.t.apply(d2) {
            r.violations.push(format!("t . tau = t . p1 fails at ({}, {})", e.label(d1), e.label(d2)));
        }
    }
    let checks = [
        ("rho", is_tracked(&g.rho, v, e, a)),
        ("sigma", is_tracked(&g.sigma, e, e, a)),
        ("tau", is_tracked(&g.tau, &g.composable.object, e, a)),
    ];
    for (name, t) in checks {
        match t {
            Ok(t) if t.tracked => {}
            Ok(t) => r.violations.push(format!("{name} is not tracked (best witness {})", a.name(t.witness))),
            Err(err) => r.violations.push(format!("{name}: {err}")),
        }
    }
    r
}

/// `nu_X(x, x') = { e_X1(e) | e in X(x, x') }`, row-major over `X0 x X0`.
pub fn induced_nu(g: &PseudoGroupoid) -> PartialValuation {
    let n = g.vertices().len();
    let values = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .map(|(x, y)| g.edges(x, y).into_iter().map(|e| g.edge_exist(e)).collect::<ElemSet>())
        .collect();
    PartialValuation { values }
}

/// A morphism of quivers between two pseudo-groupoids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverMorphism {
    pub f0: AsmMorphism,
    pub f1: AsmMorphism,
}

impl QuiverMorphism {
    pub fn new(x: &PseudoGroupoid, y: &PseudoGroupoid, f0: Vec<usize>, f1: Vec<usize>, a: &ImplicativeAlgebra) -> Result<QuiverMorphism> {
        let f0 = AsmMorphism::new(x.vertices().clone(), y.vertices().clone(), f0, a)?;
        let f1 = AsmMorphism::new(x.edge_object().clone(), y.edge_object().clone(), f1, a)?;
        for e in 0..x.edge_object().len() {
            if y.s.apply(f1.apply(e)) != f0.apply(x.s.apply(e)) || y.t.apply(f1.apply(e)) != f0.apply(x.t.apply(e)) {
                return Err(Error::Invalid(format!("edge {} is not sent along its endpoints", x.edge_object().label(e))));
            }
        }
        Ok(QuiverMorphism { f0, f1 })
    }

    pub fn identity(x: &PseudoGroupoid, a: &ImplicativeAlgebra) -> QuiverMorphism {
        QuiverMorphism {
            f0: AsmMorphism::identity(x.vertices().clone(), a),
            f1: AsmMorphism::identity(x.edge_object().clone(), a),
        }
    }

    /// `g . self`.
    pub fn then(&self, g: &QuiverMorphism, a: &ImplicativeAlgebra) -> Result<QuiverMorphism> {
        Ok(QuiverMorphism { f0: self.f0.then(&g.f0, a)?, f1: self.f1.then(&g.f1, a)? })
    }

    pub fn describe(&self) -> String {
        format!("vertices {}; edges {}", self.f0.describe(), self.f1.describe())
    }
}

/// A tracked choice of one candidate per source point, lexicographically
/// first, pruning as soon as the partial tracking witness leaves S.
pub fn tracked_choice(
    source: &Assembly,
    target: &Assembly,
    candidates: &[Vec<usize>],
    a: &ImplicativeAlgebra,
) -> Option<Vec<usize>> {
    fn go(
        i: usize,
        acc: Elem,
        source: &Assembly,
        target: &Assembly,
        candidates: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        a: &ImplicativeAlgebra,
    ) -> bool {
        if i == candidates.len() {
            return true;
        }
        for &c in &candidates[i] {
            let next = a.meet_iter([acc, a.imp(source.exist(i), target.exist(c))]);
            if a.in_sep(next) {
                chosen.push(c);
                if go(i + 1, next, source, target, candidates, chosen, a) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::with_capacity(candidates.len());
    go(0, a.top(), source, target, candidates, &mut chosen, a).then_some(chosen)
}

/// Every quiver morphism `x -> y`.
pub fn quiver_morphisms(x: &PseudoGroupoid, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Vec<QuiverMorphism> {
    let mut out = Vec::new();
    let (xe, ye) = (x.edge_object(), y.edge_object());
    for f0 in tracked_maps(x.vertices(), y.vertices(), a) {
        let cands: Vec<Vec<usize>> =
            (0..xe.len()).map(|e| y.edges(f0.apply(x.s.apply(e)), f0.apply(x.t.apply(e)))).collect();
        if cands.iter().any(Vec::is_empty) {
            continue;
        }
        let sizes: Vec<usize> = cands.iter().map(Vec::len).collect();
        for pick in product_of(&sizes) {
            let f1: Vec<usize> = pick.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
            if let Ok(f1) = AsmMorphism::new(xe.clone(), ye.clone(), f1, a) {
                out.push(QuiverMorphism { f0: f0.clone(), f1 });
            }
        }
    }
    out
}

/// All index tuples below `sizes`, lexicographically.
fn product_of(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out.into_iter().flat_map(|p| (0..s).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Whether `h: X0 -> Y1` is a homotopy from `f` to `g`.
pub fn is_homotopy(h: &AsmMorphism, f: &QuiverMorphism, g: &QuiverMorphism, y: &PseudoGroupoid) -> bool {
    *h.target() == *y.edge_object()
        && (0..h.source().len()).all(|x| y.s.apply(h.apply(x)) == f.f0.apply(x) && y.t.apply(h.apply(x)) == g.f0.apply(x))
}

/// A homotopy `f => g`, the lexicographically first tracked one.
pub fn is_homotopic(f: &QuiverMorphism, g: &QuiverMorphism, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Option<AsmMorphism> {
    let x0 = f.f0.source();
    let cands: Vec<Vec<usize>> = (0..x0.len()).map(|x| y.edges(f.f0.apply(x), g.f0.apply(x))).collect();
    let h = tracked_choice(x0, y.edge_object(), &cands, a)?;
    Some(AsmMorphism::new(x0.clone(), y.edge_object().clone(), h, a).expect("choice is tracked"))
}

/// `rho_Y . f0 : f => f`.
pub fn reflexivity(f: &QuiverMorphism, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
    f.f0.then(&y.rho_map(a)?, a)
}

/// `sigma_Y . h : g => f` for `h : f => g`.
pub fn symmetry(h: &AsmMorphism, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
    h.then(&y.sigma_map(a)?, a)
}

/// `tau_Y . <h1, h2> : f => k` for `h1 : f => g`, `h2 : g => k`.
pub fn transitivity(h1: &AsmMorphism, h2: &AsmMorphism, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Result<AsmMorphism> {
    let pair = (0..h1.source().len())
        .map(|x| {
            y.composable_index(h1.apply(x), h2.apply(x))
                .ok_or_else(|| Error::Invalid("homotopies are not composable".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let pair = AsmMorphism::new(h1.source().clone(), y.composable.object.clone(), pair, a)?;
    pair.then(&y.tau_map(a)?, a)
}

/// Homotopy classes of quiver morphisms, in order of first member.
pub fn ex_hom(x: &PseudoGroupoid, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Vec<Vec<QuiverMorphism>> {
    let mut classes: Vec<Vec<QuiverMorphism>> = Vec::new();
    for f in quiver_morphisms(x, y, a) {
        match classes.iter_mut().find(|c| is_homotopic(&c[0], &f, y, a).is_some()) {
            Some(c) => c.push(f),
            None => classes.push(vec![f]),
        }
    }
    classes
}

/// Index of the class of `f` in `classes`.
pub fn class_of(classes: &[Vec<QuiverMorphism>], f: &QuiverMorphism, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Option<usize> {
    classes.iter().position(|c| is_homotopic(&c[0], f, y, a).is_some())
}

/// The homotopy relation on `x -> y` checked against the witnesses built
/// from `rho`, `sigma` and `tau`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub morphisms: usize,
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    /// Every constructed witness is a tracked homotopy, so the search finds one too.
    pub witnesses_valid: bool,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.reflexive && self.symmetric && self.transitive && self.witnesses_valid
    }
}

pub fn homotopy_equivalence(x: &PseudoGroupoid, y: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Result<EquivalenceReport> {
    let ms = quiver_morphisms(x, y, a);
    let n = ms.len();
    let mut rel: Vec<Vec<Option<AsmMorphism>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            rel[i][j] = is_homotopic(&ms[i], &ms[j], y, a);
        }
    }
    let mut r = EquivalenceReport { morphisms: n, reflexive: true, symmetric: true, transitive: true, witnesses_valid: true };
    for i in 0..n {
        let refl = reflexivity(&ms[i], y, a)?;
        r.witnesses_valid &= is_homotopy(&refl, &ms[i], &ms[i], y);
        r.reflexive &= rel[i][i].is_some();
        for j in 0..n {
            let Some(h) = &rel[i][j] else { continue };
            let back = symmetry(h, y, a)?;
            r.witnesses_valid &= is_homotopy(&back, &ms[j], &ms[i], y);
            r.symmetric &= rel[j][i].is_some();
            for k in 0..n {
                let Some(h2) = &rel[j][k] else { continue };
                let comp = transitivity(h, h2, y, a)?;
                r.witnesses_valid &= is_homotopy(&comp, &ms[i], &ms[k], y);
                r.transitive &= rel[i][k].is_some();
            }
        }
    }
    Ok(r)
}

/// Composition of classes is independent of representatives, checked on
/// every pair of members.
pub fn composition_well_defined(
    x: &PseudoGroupoid,
    y: &PseudoGroupoid,
    z: &PseudoGroupoid,
    a: &ImplicativeAlgebra,
) -> Result<bool> {
    let (xy, yz, xz) = (ex_hom(x, y, a), ex_hom(y, z, a), ex_hom(x, z, a));
    for c1 in &xy {
        for c2 in &yz {
            let target = class_of(&xz, &c1[0].then(&c2[0], a)?, z, a);
            for f in c1 {
                for g in c2 {
                    if class_of(&xz, &f.then(g, a)?, z, a) != target {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Associativity of class composition on `x -> y -> z -> w`.
pub fn composition_associative(
    objs: [&PseudoGroupoid; 4],
    a: &ImplicativeAlgebra,
) -> Result<bool> {
    let [x, y, z, w] = objs;
    let xw = ex_hom(x, w, a);
    for f in ex_hom(x, y, a) {
        for g in ex_hom(y, z, a) {
            for h in ex_hom(z, w, a) {
                let left = f[0].then(&g[0], a)?.then(&h[0], a)?;
                let right = f[0].then(&g[0].then(&h[0], a)?, a)?;
                if class_of(&xw, &left, w, a) != class_of(&xw, &right, w, a) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Valid pseudo-groupoids with at most `max_vertices` vertices and
/// `max_edges` edges, existence values in `m`, one per isomorphism class
/// of the underlying quiver. Structure maps are the lexicographically
/// first tracked choices.
pub fn enumerate_groupoids(m: ElemSet, a: &ImplicativeAlgebra, max_vertices: usize, max_edges: usize) -> Vec<PseudoGroupoid> {
    let vals: Vec<Elem> = m.iter().collect();
    let nv = vals.len();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n0 in 1..=max_vertices {
        for vchoice in set_maps(n0, vals.len()) {
            if vchoice.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let types: Vec<(usize, usize, usize)> =
                (0..n0).flat_map(|s| (0..n0).flat_map(move |t| (0..nv).map(move |v| (s, t, v)))).collect();
            for n1 in n0..=max_edges {
                for pick in set_maps(n1, types.len()) {
                    if pick.windows(2).any(|w| w[0] > w[1]) {
                        continue;
                    }
                    let edges: Vec<(usize, usize, usize)> = pick.iter().map(|&k| types[k]).collect();
                    let key = canonical_key(&vchoice, &edges, n0);
                    if !seen.insert(key) {
                        continue;
                    }
                    if let Some(g) = build_groupoid(&vchoice, &edges, &vals, a) {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

fn canonical_key(vchoice: &[usize], edges: &[(usize, usize, usize)], n0: usize) -> (Vec<usize>, Vec<(usize, usize, usize)>) {
    crate::assembly::permutations(n0)
        .into_iter()
        .map(|p| {
            let mut v = vec![0; n0];
            for (i, &j) in p.iter().enumerate() {
                v[j] = vchoice[i];
            }
            let mut e: Vec<(usize, usize, usize)> = edges.iter().map(|&(s, t, x)| (p[s], p[t], x)).collect();
            e.sort();
            (v, e)
        })
        .min()
        .expect("at least one permutation")
}

fn build_groupoid(vchoice: &[usize], edges: &[(usize, usize, usize)], vals: &[Elem], a: &ImplicativeAlgebra) -> Option<PseudoGroupoid> {
    let x0 = Arc::new(Assembly::new(
        (0..vchoice.len()).map(|i| format!("v{i}")).collect(),
        vchoice.iter().map(|&k| vals[k]).collect(),
        a,
    ).ok()?);
    let x1 = Arc::new(Assembly::new(
        (0..edges.len()).map(|i| format!("e{i}")).collect(),
        edges.iter().map(|e| vals[e.2]).collect(),
        a,
    ).ok()?);
    let s = AsmMorphism::new(x1.clone(), x0.clone(), edges.iter().map(|e| e.0).collect(), a).ok()?;
    let t = AsmMorphism::new(x1.clone(), x0.clone(), edges.iter().map(|e| e.1).collect(), a).ok()?;
    let between = |x: usize, y: usize| -> Vec<usize> { (0..edges.len()).filter(|&e| edges[e].0 == x && edges[e].1 == y).collect() };
    let rho_c: Vec<Vec<usize>> = (0..x0.len()).map(|x| between(x, x)).collect();
    let rho = tracked_choice(&x0, &x1, &rho_c, a)?;
    let sigma_c: Vec<Vec<usize>> = edges.iter().map(|e| between(e.1, e.0)).collect();
    let sigma = tracked_choice(&x1, &x1, &sigma_c, a)?;
    let comp = pullback(&t, &s, a).ok()?;
    let tau_c: Vec<Vec<usize>> = comp.pairs.iter().map(|&(e, f)| between(edges[e].0, edges[f].1)).collect();
    let tau = tracked_choice(&comp.object, &x1, &tau_c, a)?;
    let pairs = comp.pairs.clone();
    let g = PseudoGroupoid::new(s, t, rho, sigma, |e, f| pairs.iter().position(|&p| p == (e, f)).map(|k| tau[k]), a).ok()?;
    validate_pseudo_groupoid(&g, a).is_valid().then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn asm(a: &ImplicativeAlgebra, vals: &[&str]) -> Arc<Assembly> {
        Arc::new(Assembly::from_values(vals.iter().map(|v| a.elem(v).unwrap()).collect(), a).unwrap())
    }

    #[test]
    fn discrete_and_codiscrete_are_valid() {
        let a = corpus::c4b();
        let x = asm(&a, &["b", "1"]);
        assert!(validate_pseudo_groupoid(&PseudoGroupoid::discrete(x.clone(), &a), &a).is_valid());
        let c = PseudoGroupoid::codiscrete(x, &a).unwrap();
        assert!(validate_pseudo_groupoid(&c, &a).is_valid());
        assert_eq!(c.edges(0, 1).len(), 1);
    }

    #[test]
    fn dropping_the_swap_is_reported() {
        let a = corpus::b2();
        let x = asm(&a, &["1", "1"]);
        let c = PseudoGroupoid::codiscrete(x, &a).unwrap();
        let broken = PseudoGroupoid::new(c.s.clone(), c.t.clone(), c.rho.clone(), (0..4).collect(), |e, f| {
            c.composable_index(e, f).map(|k| c.tau[k])
        }, &a)
        .unwrap();
        let r = validate_pseudo_groupoid(&broken, &a);
        assert!(r.violations.iter().any(|v| v.starts_with("s . sigma = t fails at (x0,x1)")));
    }

    #[test]
    fn discrete_hom_is_tracked_maps() {
        let a = corpus::h3h();
        let x = asm(&a, &["h", "1"]);
        let y = asm(&a, &["1", "h"]);
        let (dx, dy) = (PseudoGroupoid::discrete(x.clone(), &a), PseudoGroupoid::discrete(y.clone(), &a));
        let classes = ex_hom(&dx, &dy, &a);
        assert_eq!(classes.len(), tracked_maps(&x, &y, &a).len());
        assert!(classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn codiscrete_point_is_terminal() {
        let a = corpus::c4();
        let pt = PseudoGroupoid::codiscrete(Arc::new(Assembly::terminal(&a)), &a).unwrap();
        let x = PseudoGroupoid::codiscrete(asm(&a, &["1", "1"]), &a).unwrap();
        assert_eq!(ex_hom(&x, &pt, &a).len(), 1);
        let ms = quiver_morphisms(&pt, &x, &a);
        assert_eq!(ms.len(), 2);
        assert!(is_homotopic(&ms[0], &ms[1], &x, &a).is_some());
        let d = PseudoGroupoid::discrete(asm(&a, &["1", "1"]), &a);
        let ms = quiver_morphisms(&pt, &d, &a);
        assert!(is_homotopic(&ms[0], &ms[1], &d, &a).is_none());
    }

    #[test]
    fn induced_nu_of_discrete_and_codiscrete() {
        let a = corpus::c4b();
        let x = asm(&a, &["b", "1"]);
        let nu = induced_nu(&PseudoGroupoid::discrete(x.clone(), &a));
        let b = a.elem("b").unwrap();
        assert_eq!(nu.values, vec![ElemSet::singleton(b), ElemSet::EMPTY, ElemSet::EMPTY, ElemSet::singleton(a.top())]);
        let nu = induced_nu(&PseudoGroupoid::codiscrete(x, &a).unwrap());
        assert_eq!(nu.values[1], ElemSet::singleton(a.encoded_meet(b, a.top())));
    }

    #[test]
    fn homotopy_is_an_equivalence_on_small_groupoids() {
        let a = corpus::h3h();
        let gs = enumerate_groupoids(a.separator(), &a, 2, 4);
        assert!(gs.iter().any(|g| g.edges(0, 1).len() == 1));
        for x in gs.iter().take(6) {
            for y in &gs {
                assert!(homotopy_equivalence(x, y, &a).unwrap().holds());
            }
        }
    }
}
