//! Implicative sets, functional relations and the functor `K` from
//! pseudo-groupoids into them.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{check_tracker, ImplicativeAlgebra, PartialValuation, TrackerCheck};
use crate::assembly::{is_tracked, set_maps, AsmMorphism, Assembly};
use crate::error::{Error, Result};
use crate::excomp::{induced_nu, quiver_morphisms, tracked_choice, validate_pseudo_groupoid, PseudoGroupoid, QuiverMorphism};
use crate::lambda::{interp_str, Env};
use crate::order::{Elem, ElemSet};
use crate::regcomp::{find_valuation, is_algebraic};

/// Tracker terms as they appear in the proofs, in the surface syntax.
pub mod terms {
    pub const SET_SYM: &str = r"lam u v w . u /\ v /\ (lam z . z (xi (w I)))";
    pub const SET_TRANS: &str = r"lam u _ w _ v w' . u /\ v /\ (lam z . chi ((w I) /\ (w' I)))";
    pub const RF_IMPLIES: &str = r"lam u v w . v /\ (xi u) /\ w";
    pub const EXT: &str =
        r"lam _ _ w _ v w' _ v' w'' . v /\ v' /\ (lam z . z (varpi ((varpi (kappa (w'' I))) /\ (w I) /\ (chi (w' I)))))";
    pub const STR: &str = r"lam u v _ . u /\ (lam z . z (kappa u)) /\ v /\ (lam z . z (kappa' v))";
    pub const SV: &str = r"lam _ v w _ v' w' . v /\ v' /\ (lam z . z (varpi ((w I) /\ (xi (w' I)))))";
    pub const TOT: &str = r"lam u v . (chi u) /\ (lam z . kappa (chi u)) /\ u /\ (lam z . kappa (chi u))";
    pub const HAT_S: &str = "pi0";
    pub const HAT_T: &str = "pi2";
    pub const HAT_RHO: &str = "I";
    pub const HAT_SIGMA: &str = r"lam u m v . v /\ ((symp (lam z . z m)) I) /\ u";
    pub const HAT_TAU: &str = r"lam u _ _ m n v . u /\ ((transp (lam z . z m) (lam z . z n)) I) /\ v";
    /// As printed; the second `v` should be `w`.
    pub const REL_EXT_AS_PRINTED: &str = "lam u _ _ v w . transx (symx v) (transx u v)";
    pub const REL_EXT: &str = "lam u _ _ v w . transx (symx v) (transx u w)";
    /// As printed; the last conjunct mentions an unbound `p`.
    pub const REL_STR_AS_PRINTED: &str = r"let eps = lam p . transx p (symx p) in let eps' = lam q . lamd (eps q) in lam r . (eps' r) /\ (eps r) /\ (transx (symx p) p)";
    pub const REL_STR: &str = r"let eps = lam p . transx p (symx p) in let eps' = lam q . lamd (eps q) in lam r . (eps' r) /\ (eps r) /\ (transx (symx r) r)";
    pub const REL_TOT: &str = "lam _ p . xi p";
    pub const INJ: &str = r"let j = lam p q . transx p (symx q) in let e1 = lam p . transx (symx p) p in let e2 = lam p . transx p (symx p) in let delta = lam p . lamd p in lam p q . let eps = j p q in (delta (e1 eps)) /\ (delta (e2 eps)) /\ (chi eps)";
    pub const FULL_PHI: &str = "lam p . lamphi p";
}

/// A finite set with an algebra-valued equality, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImplicativeSet {
    labels: Vec<String>,
    eq: Vec<Elem>,
}

impl ImplicativeSet {
    pub fn new(labels: Vec<String>, eq: Vec<Elem>) -> Result<ImplicativeSet> {
        if eq.len() != labels.len() * labels.len() {
            return Err(Error::IndexMismatch(format!("{} labels but {} equality values", labels.len(), eq.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateName(l.clone()));
            }
        }
        Ok(ImplicativeSet { labels, eq })
    }

    pub fn from_fn(labels: Vec<String>, f: impl Fn(usize, usize) -> Elem) -> ImplicativeSet {
        let n = labels.len();
        let eq = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        ImplicativeSet { labels, eq }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn point(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownElement(label.into()))
    }

    /// `|x ~ y|`.
    pub fn equal(&self, x: usize, y: usize) -> Elem {
        self.eq[x * self.len() + y]
    }

    /// `Ex(x) = |x ~ x|`.
    pub fn ex(&self, x: usize) -> Elem {
        self.equal(x, x)
    }
}

/// A named meet and whether it lies in the separator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeetCheck {
    pub name: String,
    pub value: String,
    pub holds: bool,
}

impl MeetCheck {
    fn new(name: &str, v: Elem, a: &ImplicativeAlgebra) -> MeetCheck {
        MeetCheck { name: name.into(), value: a.name(v).into(), holds: a.in_sep(v) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<MeetCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)))
}

/// `a /\ (b /\ c)` with encoded meets.
fn enc3(a: &ImplicativeAlgebra, x: Elem, y: Elem, z: Elem) -> Elem {
    a.encoded_meet(x, a.encoded_meet(y, z))
}

pub fn sym_meet(e: &ImplicativeSet, a: &ImplicativeAlgebra) -> Elem {
    a.meet_iter(pairs(e.len()).map(|(x, y)| a.imp(e.equal(x, y), e.equal(y, x))))
}

pub fn trans_meet(e: &ImplicativeSet, a: &ImplicativeAlgebra) -> Elem {
    let n = e.len();
    a.meet_iter(
        pairs(n).flat_map(|(x, y)| (0..n).map(move |z| (x, y, z))).map(|(x, y, z)| a.imp(a.encoded_meet(e.equal(x, y), e.equal(y, z)), e.equal(x, z))),
    )
}

pub fn validate_implicative_set(e: &ImplicativeSet, a: &ImplicativeAlgebra) -> ValidationReport {
    ValidationReport { checks: vec![MeetCheck::new("Sym", sym_meet(e, a), a), MeetCheck::new("Trans", trans_meet(e, a), a)] }
}

/// Non-ghosts, ghosts and valid equalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GhostPartition {
    pub ngh: Vec<usize>,
    pub ghosts: Vec<usize>,
    pub equ_plus: Vec<(usize, usize)>,
}

pub fn ghost_partition(e: &ImplicativeSet, a: &ImplicativeAlgebra) -> GhostPartition {
    let (ngh, ghosts) = (0..e.len()).partition(|&x| a.in_sep(e.ex(x)));
    let equ_plus = pairs(e.len()).filter(|&(x, y)| a.in_sep(e.equal(x, y))).collect();
    GhostPartition { ngh, ghosts, equ_plus }
}

/// A relation `F : X x Y -> A`, row-major over `X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionalRelation {
    pub source: Arc<ImplicativeSet>,
    pub target: Arc<ImplicativeSet>,
    values: Vec<Elem>,
}

impl FunctionalRelation {
    pub fn new(source: Arc<ImplicativeSet>, target: Arc<ImplicativeSet>, values: Vec<Elem>) -> Result<FunctionalRelation> {
        if values.len() != source.len() * target.len() {
            return Err(Error::IndexMismatch(format!(
                "relation needs {} values, got {}",
                source.len() * target.len(),
                values.len()
            )));
        }
        Ok(FunctionalRelation { source, target, values })
    }

    pub fn from_fn(source: Arc<ImplicativeSet>, target: Arc<ImplicativeSet>, f: impl Fn(usize, usize) -> Elem) -> FunctionalRelation {
        let values = (0..source.len()).flat_map(|x| (0..target.len()).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect();
        FunctionalRelation { source, target, values }
    }

    pub fn get(&self, x: usize, y: usize) -> Elem {
        self.values[x * self.target.len() + y]
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }
}

pub fn ext_meet(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> Elem {
    let (x, y) = (&f.source, &f.target);
    a.meet_iter(pairs(x.len()).flat_map(|(x0, x1)| {
        pairs(y.len()).map(move |(y0, y1)| a.imp(enc3(a, f.get(x0, y0), x.equal(x0, x1), y.equal(y0, y1)), f.get(x1, y1)))
    }))
}

pub fn str_meet(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> Elem {
    let (x, y) = (&f.source, &f.target);
    a.meet_iter(pairs_xy(x.len(), y.len()).map(|(i, j)| a.imp(f.get(i, j), a.encoded_meet(x.ex(i), y.ex(j)))))
}

pub fn sv_meet(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> Elem {
    let y = &f.target;
    a.meet_iter(
        (0..f.source.len())
            .flat_map(|i| pairs(y.len()).map(move |(j, k)| (i, j, k)))
            .map(|(i, j, k)| a.imp(a.encoded_meet(f.get(i, j), f.get(i, k)), y.equal(j, k))),
    )
}

pub fn tot_meet(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> Elem {
    let (x, y) = (&f.source, &f.target);
    a.meet_iter((0..x.len()).map(|i| {
        let wit: ElemSet = (0..y.len()).map(|j| a.encoded_meet(y.ex(j), f.get(i, j))).collect();
        a.imp(x.ex(i), a.e_exists(wit))
    }))
}

fn pairs_xy(n: usize, m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..m).map(move |j| (i, j)))
}

pub fn validate_frel(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> ValidationReport {
    ValidationReport {
        checks: vec![
            MeetCheck::new("Ext", ext_meet(f, a), a),
            MeetCheck::new("Str", str_meet(f, a), a),
            MeetCheck::new("Sv", sv_meet(f, a), a),
            MeetCheck::new("Tot", tot_meet(f, a), a),
        ],
    }
}

pub fn id_frel(e: &Arc<ImplicativeSet>) -> FunctionalRelation {
    FunctionalRelation { source: e.clone(), target: e.clone(), values: e.eq.clone() }
}

/// `(F; G)(x, z) = exists y. F(x, y) /\ G(y, z)`.
pub fn compose_frel(f: &FunctionalRelation, g: &FunctionalRelation, a: &ImplicativeAlgebra) -> Result<FunctionalRelation> {
    if f.target != g.source {
        return Err(Error::Invalid("composite of relations with different middle objects".into()));
    }
    let mid = f.target.len();
    Ok(FunctionalRelation::from_fn(f.source.clone(), g.target.clone(), |x, z| {
        a.e_exists((0..mid).map(|y| a.encoded_meet(f.get(x, y), g.get(y, z))).collect())
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrelEquiv {
    /// `meet (F -> G)` lies in the separator.
    pub forward: bool,
    pub backward: bool,
}

impl FrelEquiv {
    pub fn equivalent(&self) -> bool {
        self.forward && self.backward
    }

    /// For valid relations one direction should force the other.
    pub fn one_sided_agrees(&self) -> bool {
        self.forward == self.backward
    }
}

pub fn frel_equiv(f: &FunctionalRelation, g: &FunctionalRelation, a: &ImplicativeAlgebra) -> Result<FrelEquiv> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::Invalid("relations between different objects".into()));
    }
    let dir = |p: &FunctionalRelation, q: &FunctionalRelation| {
        a.in_sep(a.meet_iter(p.values.iter().zip(&q.values).map(|(&u, &v)| a.imp(u, v))))
    };
    Ok(FrelEquiv { forward: dir(f, g), backward: dir(g, f) })
}

/// `meet_{x1, x2, y} (F(x1, y) /\ F(x2, y) -> |x1 ~ x2|)`.
pub fn internal_injective(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> MeetCheck {
    let x = &f.source;
    let v = a.meet_iter(
        pairs(x.len())
            .flat_map(|(i, j)| (0..f.target.len()).map(move |y| (i, j, y)))
            .map(|(i, j, y)| a.imp(a.encoded_meet(f.get(i, y), f.get(j, y)), x.equal(i, j))),
    );
    MeetCheck::new("Inj", v, a)
}

/// `meet_y (Ex(y) -> exists x. F(x, y))`.
pub fn internal_surjective(f: &FunctionalRelation, a: &ImplicativeAlgebra) -> MeetCheck {
    let y = &f.target;
    let v = a.meet_iter((0..y.len()).map(|j| {
        let wit: ElemSet = (0..f.source.len()).map(|i| f.get(i, j)).collect();
        a.imp(y.ex(j), a.e_exists(wit))
    }));
    MeetCheck::new("Surj", v, a)
}

/// Runs a tracker check, folding evaluation errors into a failing check.
fn tracker(label: &str, term: &str, env: &Env, target: Elem, a: &ImplicativeAlgebra) -> TrackerCheck {
    check_tracker(label, term, env, target, a).unwrap_or_else(|err| TrackerCheck {
        label: label.into(),
        term: term.into(),
        value: format!("error: {err}"),
        target: a.name(target).into(),
        in_separator: false,
        below_target: false,
    })
}

/// `|x ~ x'| = e(x) /\ e(x') /\ exists nu_X(x, x')` on the vertices.
pub fn k_object(x: &PseudoGroupoid, a: &ImplicativeAlgebra) -> ImplicativeSet {
    let v = x.vertices();
    let nu = induced_nu(x);
    let n = v.len();
    ImplicativeSet::from_fn(v.labels().to_vec(), |i, j| enc3(a, v.exist(i), v.exist(j), a.e_exists(nu.values[i * n + j])))
}

#[derive(Debug, Clone, Serialize)]
pub struct KObject {
    pub set: Arc<ImplicativeSet>,
    pub validation: ValidationReport,
    pub trackers: Vec<TrackerCheck>,
}

pub fn k_object_checked(x: &PseudoGroupoid, a: &ImplicativeAlgebra) -> Result<KObject> {
    let r = validate_pseudo_groupoid(x, a);
    if !r.is_valid() {
        return Err(Error::Invalid(format!("not a pseudo-groupoid: {}", r.violations.join("; "))));
    }
    let set = Arc::new(k_object(x, a));
    let env = Env::new().with("xi", x.sigma_map(a)?.tracker()).with("chi", x.tau_map(a)?.tracker());
    let trackers = vec![
        tracker("symmetry", terms::SET_SYM, &env, sym_meet(&set, a), a),
        tracker("transitivity", terms::SET_TRANS, &env, trans_meet(&set, a), a),
    ];
    Ok(KObject { validation: validate_implicative_set(&set, a), set, trackers })
}

/// `R_f(x, y) = e(x) /\ e(y) /\ exists nu_Y(y, f0 x)`.
pub fn k_morphism(
    x: &PseudoGroupoid,
    y: &PseudoGroupoid,
    f: &QuiverMorphism,
    kx: &Arc<ImplicativeSet>,
    ky: &Arc<ImplicativeSet>,
    a: &ImplicativeAlgebra,
) -> FunctionalRelation {
    let (xv, yv) = (x.vertices(), y.vertices());
    let nu = induced_nu(y);
    let n = yv.len();
    FunctionalRelation::from_fn(kx.clone(), ky.clone(), |i, j| {
        enc3(a, xv.exist(i), yv.exist(j), a.e_exists(nu.values[j * n + f.f0.apply(i)]))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KMorphism {
    pub relation: FunctionalRelation,
    pub validation: ValidationReport,
    pub trackers: Vec<TrackerCheck>,
}

/// `meet_{x, y} (R_f(x, y) -> |y ~ f0 x|)`.
pub fn rf_meet(rel: &FunctionalRelation, f: &QuiverMorphism, a: &ImplicativeAlgebra) -> Elem {
    a.meet_iter(pairs_xy(rel.source.len(), rel.target.len()).map(|(i, j)| a.imp(rel.get(i, j), rel.target.equal(j, f.f0.apply(i)))))
}

pub fn k_morphism_checked(
    x: &PseudoGroupoid,
    y: &PseudoGroupoid,
    f: &QuiverMorphism,
    a: &ImplicativeAlgebra,
) -> Result<KMorphism> {
    let (kx, ky) = (Arc::new(k_object(x, a)), Arc::new(k_object(y, a)));
    let rel = k_morphism(x, y, f, &kx, &ky, a);
    let (rho_x, rho_y) = (x.rho_map(a)?.tracker(), y.rho_map(a)?.tracker());
    let (sigma_y, tau_y) = (y.sigma_map(a)?.tracker(), y.tau_map(a)?.tracker());
    let (f0, f1) = (f.f0.tracker(), f.f1.tracker());
    let trackers = vec![
        tracker("relation implies equality", terms::RF_IMPLIES, &Env::new().with("xi", f0), rf_meet(&rel, f, a), a),
        tracker(
            "extensional",
            terms::EXT,
            &Env::new().with("chi", f1).with("kappa", sigma_y).with("varpi", tau_y),
            ext_meet(&rel, a),
            a,
        ),
        tracker("strict", terms::STR, &Env::new().with("kappa", rho_x).with("kappa'", rho_y), str_meet(&rel, a), a),
        tracker("single-valued", terms::SV, &Env::new().with("xi", sigma_y).with("varpi", tau_y), sv_meet(&rel, a), a),
        tracker("total", terms::TOT, &Env::new().with("chi", f0).with("kappa", rho_y), tot_meet(&rel, a), a),
    ];
    Ok(KMorphism { validation: validate_frel(&rel, a), relation: rel, trackers })
}

/// Outcome of extracting a quiver morphism from a functional relation.
#[derive(Debug, Clone)]
pub struct FullnessOutcome {
    pub morphism: Option<QuiverMorphism>,
    /// The lexicographic construction succeeded without falling back.
    pub guided: bool,
    pub phi_check: Option<TrackerCheck>,
    pub violation: Option<String>,
}

/// `lam phi = meet_a (a -> phi(a))` for a map given on some elements and
/// `T` elsewhere.
fn lam_of(pairs: &[(Elem, Elem)], a: &ImplicativeAlgebra) -> Elem {
    a.meet_iter(a.elems().map(|u| {
        let v = pairs.iter().find(|p| p.0 == u).map_or(a.top(), |p| p.1);
        a.imp(u, v)
    }))
}

pub fn k_fullness_search(
    x: &PseudoGroupoid,
    y: &PseudoGroupoid,
    rel: &FunctionalRelation,
    a: &ImplicativeAlgebra,
) -> Result<FullnessOutcome> {
    let (kx, ky) = (rel.source.clone(), rel.target.clone());
    let matches = |f: &QuiverMorphism| -> Result<bool> { Ok(frel_equiv(&k_morphism(x, y, f, &kx, &ky, a), rel, a)?.equivalent()) };
    let mut phi_check = None;
    let guided = (|| -> Result<Option<QuiverMorphism>> {
        let mut f0 = Vec::new();
        for i in 0..kx.len() {
            match (0..ky.len()).find(|&j| a.in_sep(rel.get(i, j))) {
                Some(j) => f0.push(j),
                None => return Ok(None),
            }
        }
        let xe = x.edge_object();
        let mut f1 = Vec::new();
        for e in 0..xe.len() {
            match y.edges(f0[x.s.apply(e)], f0[x.t.apply(e)]).first() {
                Some(&d) => f1.push(d),
                None => return Ok(None),
            }
        }
        // phi sends an edge existence value to the image of one of its
        // edges; every choice of edge is tried.
        let mut keys: Vec<Elem> = Vec::new();
        for e in 0..xe.len() {
            if !keys.contains(&xe.exist(e)) {
                keys.push(xe.exist(e));
            }
        }
        let options: Vec<Vec<Elem>> = keys
            .iter()
            .map(|&k| {
                let mut v: Vec<Elem> = Vec::new();
                for e in (0..xe.len()).filter(|&e| xe.exist(e) == k) {
                    if !v.contains(&y.edge_exist(f1[e])) {
                        v.push(y.edge_exist(f1[e]));
                    }
                }
                v
            })
            .collect();
        let target = is_tracked(&f1, xe, y.edge_object(), a)?.witness;
        let sizes: Vec<usize> = options.iter().map(Vec::len).collect();
        for pick in index_product(&sizes) {
            let phi: Vec<(Elem, Elem)> = keys.iter().zip(&pick).zip(&options).map(|((&k, &i), o)| (k, o[i])).collect();
            let check = tracker("edge map", terms::FULL_PHI, &Env::new().with("lamphi", lam_of(&phi, a)), target, a);
            let ok = check.passes();
            if phi_check.is_none() || ok {
                phi_check = Some(check);
            }
            if ok {
                break;
            }
        }
        let Ok(f) = QuiverMorphism::new(x, y, f0, f1, a) else { return Ok(None) };
        Ok(matches(&f)?.then_some(f))
    })()?;
    if let Some(f) = guided {
        return Ok(FullnessOutcome { morphism: Some(f), guided: true, phi_check, violation: None });
    }
    for f in quiver_morphisms(x, y, a) {
        if matches(&f)? {
            return Ok(FullnessOutcome { morphism: Some(f), guided: false, phi_check, violation: None });
        }
    }
    Ok(FullnessOutcome {
        morphism: None,
        guided: false,
        phi_check,
        violation: Some("THEOREM VIOLATION: no quiver morphism represents the relation".into()),
    })
}

/// The pseudo-groupoid built from an implicative set.
#[derive(Debug, Clone)]
pub struct HatGroupoid {
    pub groupoid: PseudoGroupoid,
    pub partition: GhostPartition,
    /// Over `X x X`, empty off the valid equalities.
    pub nu: PartialValuation,
    /// `c(x)` for each non-ghost, in the order of `partition.ngh`.
    pub c: Vec<Elem>,
    /// Edges `(vertex, vertex, m)`, vertices indexing `partition.ngh`.
    pub edges: Vec<(usize, usize, Elem)>,
    pub sym_prime: Elem,
    pub trans_prime: Elem,
    /// Edges where the extracted witness lies in the right fibre and was kept.
    pub sigma_extracted: usize,
    pub tau_extracted: usize,
    pub trackers: Vec<TrackerCheck>,
}

impl HatGroupoid {
    pub fn nu_exists(&self, x: usize, y: usize, a: &ImplicativeAlgebra) -> Elem {
        a.e_exists(self.nu.values[x * self.n() + y])
    }

    fn n(&self) -> usize {
        (self.nu.values.len() as f64).sqrt() as usize
    }
}

pub fn hat_groupoid(e: &ImplicativeSet, m: ElemSet, a: &ImplicativeAlgebra, nu: Option<PartialValuation>) -> Result<HatGroupoid> {
    let alg = is_algebraic(m, a);
    if !alg.algebraic {
        return Err(Error::Invalid("M is not algebraic".into()));
    }
    let n = e.len();
    let partition = ghost_partition(e, a);
    let nu = match nu {
        Some(nu) => {
            if nu.values.len() != n * n {
                return Err(Error::IndexMismatch("valuation must cover X x X".into()));
            }
            nu
        }
        None => {
            let u: Vec<Elem> = partition.equ_plus.iter().map(|&(x, y)| e.equal(x, y)).collect();
            let found = find_valuation(&u, m, a)
                .ok_or_else(|| Error::Invalid("density prerequisite unmet: no valuation for the valid equalities".into()))?;
            let mut values = vec![ElemSet::EMPTY; n * n];
            for (k, &(x, y)) in partition.equ_plus.iter().enumerate() {
                values[x * n + y] = found.values[k];
            }
            PartialValuation { values }
        }
    };
    for &(x, y) in &partition.equ_plus {
        if nu.values[x * n + y].is_empty() || !nu.values[x * n + y].is_subset(m) {
            return Err(Error::Invalid(format!("valuation at ({}, {}) must be a nonempty subset of M", e.label(x), e.label(y))));
        }
    }
    let ex_nu = |x: usize, y: usize| a.e_exists(nu.values[x * n + y]);
    let ngh = &partition.ngh;
    let c: Vec<Elem> = ngh.iter().map(|&x| nu.values[x * n + x].first().expect("diagonal of a non-ghost is valid")).collect();
    let pos = |x: usize| ngh.iter().position(|&g| g == x).expect("valid equalities join non-ghosts");
    let mut edges = Vec::new();
    for &(x, y) in &partition.equ_plus {
        for mm in nu.values[x * n + y].iter() {
            edges.push((pos(x), pos(y), mm));
        }
    }
    let x0 = Arc::new(Assembly::new(ngh.iter().map(|&x| e.label(x).to_string()).collect(), c.clone(), a)?);
    let x1 = Arc::new(Assembly::new(
        edges.iter().map(|&(i, j, mm)| format!("({},{}):{}", x0.label(i), x0.label(j), a.name(mm))).collect(),
        edges.iter().map(|&(i, j, mm)| enc3(a, c[i], mm, c[j])).collect(),
        a,
    )?);
    let s = AsmMorphism::new(x1.clone(), x0.clone(), edges.iter().map(|t| t.0).collect(), a)?;
    let t = AsmMorphism::new(x1.clone(), x0.clone(), edges.iter().map(|t| t.1).collect(), a)?;
    let edge_index = |i: usize, j: usize, mm: Elem| edges.iter().position(|&d| d == (i, j, mm));
    let rho: Vec<usize> = (0..ngh.len()).map(|i| edge_index(i, i, c[i]).expect("c(x) is in nu(x, x)")).collect();

    let sym_prime = a.meet_iter(ngh.iter().flat_map(|&x| ngh.iter().map(move |&y| (x, y))).map(|(x, y)| a.imp(ex_nu(x, y), ex_nu(y, x))));
    let trans_prime = a.meet_iter(
        ngh.iter()
            .flat_map(|&x| ngh.iter().flat_map(move |&y| ngh.iter().map(move |&z| (x, y, z))))
            .map(|(x, y, z)| a.imp(a.encoded_meet(ex_nu(x, y), ex_nu(y, z)), ex_nu(x, z))),
    );
    let st = a.structure();
    let ret = |mm: Elem| interp_str("lam z . z m", &Env::new().with("m", mm), st).expect("closed up to m");
    let i_comb = interp_str("I", &Env::new(), st)?;

    // Extracted witness first, then the rest of the fibre.
    let ordered = |want: Option<usize>, i: usize, j: usize| -> Vec<usize> {
        let mut v: Vec<usize> = (0..edges.len()).filter(|&d| edges[d].0 == i && edges[d].1 == j).collect();
        if let Some(w) = want {
            v.retain(|&d| d != w);
            v.insert(0, w);
        }
        v
    };
    let sigma_want: Vec<Option<usize>> = edges
        .iter()
        .map(|&(i, j, mm)| edge_index(j, i, a.app(a.app(sym_prime, ret(mm)), i_comb)))
        .collect();
    let sigma_c: Vec<Vec<usize>> = edges.iter().enumerate().map(|(d, &(i, j, _))| ordered(sigma_want[d], j, i)).collect();
    let sigma = tracked_choice(&x1, &x1, &sigma_c, a).ok_or_else(|| Error::Invalid("no tracked symmetry map".into()))?;
    let sigma_extracted = sigma.iter().zip(&sigma_want).filter(|(s, w)| Some(**s) == **w).count();

    let comp = crate::assembly::pullback(&t, &s, a)?;
    let tau_want: Vec<Option<usize>> = comp
        .pairs
        .iter()
        .map(|&(d1, d2)| {
            let w = a.app(a.app(a.app(trans_prime, ret(edges[d1].2)), ret(edges[d2].2)), i_comb);
            edge_index(edges[d1].0, edges[d2].1, w)
        })
        .collect();
    let tau_c: Vec<Vec<usize>> =
        comp.pairs.iter().enumerate().map(|(k, &(d1, d2))| ordered(tau_want[k], edges[d1].0, edges[d2].1)).collect();
    let tau = tracked_choice(&comp.object, &x1, &tau_c, a).ok_or_else(|| Error::Invalid("no tracked composition map".into()))?;
    let tau_extracted = tau.iter().zip(&tau_want).filter(|(s, w)| Some(**s) == **w).count();

    let pairs_c = comp.pairs.clone();
    let groupoid = PseudoGroupoid::new(s, t, rho, sigma, |d1, d2| pairs_c.iter().position(|&p| p == (d1, d2)).map(|k| tau[k]), a)?;
    let report = validate_pseudo_groupoid(&groupoid, a);
    if !report.is_valid() {
        return Err(Error::Invalid(format!("constructed groupoid is invalid: {}", report.violations.join("; "))));
    }
    let env = Env::new().with("symp", sym_prime).with("transp", trans_prime);
    let trackers = vec![
        tracker("source", terms::HAT_S, &env, groupoid.s.tracker(), a),
        tracker("target", terms::HAT_T, &env, groupoid.t.tracker(), a),
        tracker("reflexivity", terms::HAT_RHO, &env, groupoid.rho_map(a)?.tracker(), a),
        tracker("symmetry", terms::HAT_SIGMA, &env, groupoid.sigma_map(a)?.tracker(), a),
        tracker("composition", terms::HAT_TAU, &env, groupoid.tau_map(a)?.tracker(), a),
    ];
    Ok(HatGroupoid {
        groupoid,
        partition,
        nu,
        c,
        edges,
        sym_prime,
        trans_prime,
        sigma_extracted,
        tau_extracted,
        trackers,
    })
}

/// The comparison relation from `K(X^)` back to the implicative set.
#[derive(Debug, Clone)]
pub struct KRelation {
    pub hat: HatGroupoid,
    pub relation: FunctionalRelation,
    pub validation: ValidationReport,
    /// `K(X^)` agrees with `c(x) /\ c(x') /\ exists nu(x, x')` on valid
    /// equalities and with `F` elsewhere.
    pub display_matches: bool,
    pub trackers: Vec<TrackerCheck>,
    /// The printed forms of the two terms that needed a correction.
    pub printed_trackers: Vec<TrackerCheck>,
    pub injective: MeetCheck,
    pub surjective: MeetCheck,
}

pub fn k_relation(e: &Arc<ImplicativeSet>, m: ElemSet, a: &ImplicativeAlgebra) -> Result<KRelation> {
    let hat = hat_groupoid(e, m, a, None)?;
    let ks = Arc::new(k_object(&hat.groupoid, a));
    let ngh = hat.partition.ngh.clone();
    let relation = FunctionalRelation::from_fn(ks.clone(), e.clone(), |i, x| e.equal(ngh[i], x));
    let nn = e.len();
    let in_equ = |x: usize, y: usize| hat.partition.equ_plus.contains(&(x, y));
    let display_matches = pairs(ngh.len()).all(|(i, j)| {
        let want = if in_equ(ngh[i], ngh[j]) { enc3(a, hat.c[i], hat.c[j], hat.nu_exists(ngh[i], ngh[j], a)) } else { a.bot() };
        ks.equal(i, j) == want
    });

    let symx = sym_meet(e, a);
    let transx = trans_meet(e, a);
    let ext_prime = a.meet_iter(hat.partition.equ_plus.iter().flat_map(|&(x1, x2)| {
        let (c1, c2) = (hat.c[pos_of(&ngh, x1)], hat.c[pos_of(&ngh, x2)]);
        pairs(nn).map(move |(y1, y2)| {
            let ante = a.encoded_meet(e.equal(x1, y1), a.encoded_meet(c1, a.encoded_meet(c2, a.encoded_meet(e.equal(x1, x2), e.equal(y1, y2)))));
            a.imp(ante, e.equal(x2, y2))
        })
    }));
    let str_prime = a.meet_iter(
        ngh.iter().enumerate().flat_map(|(i, &x)| (0..nn).map(move |y| (i, x, y))).map(|(i, x, y)| a.imp(e.equal(x, y), enc3(a, hat.c[i], e.ex(x), e.ex(y)))),
    );
    let xi = a.meet_iter(ngh.iter().map(|&x| a.imp(hat.nu_exists(x, x, a), e.ex(x))));
    let chi = a.meet_iter(ngh.iter().flat_map(|&x| ngh.iter().map(move |&y| (x, y))).map(|(x, y)| a.imp(e.equal(x, y), hat.nu_exists(x, y, a))));
    let inj = internal_injective(&relation, a);
    let inj_value = a.elem(&inj.value)?;

    // The map d on existence values; several non-ghosts may share a value,
    // so every choice of representative is tried.
    let mut keys: Vec<Elem> = Vec::new();
    for &x in &ngh {
        if !keys.contains(&e.ex(x)) {
            keys.push(e.ex(x));
        }
    }
    let options: Vec<Vec<Elem>> = keys
        .iter()
        .map(|&k| {
            let mut v: Vec<Elem> = ngh.iter().enumerate().filter(|(_, &x)| e.ex(x) == k).map(|(i, _)| hat.c[i]).collect();
            v.dedup();
            v
        })
        .collect();
    let base = Env::new().with("symx", symx).with("transx", transx).with("xi", xi).with("chi", chi);
    let run = |lamd: Elem, str_term: &str, ext_term: &str| -> Vec<TrackerCheck> {
        let env = base.clone().with("lamd", lamd);
        vec![
            tracker("relation extensional", ext_term, &env, ext_prime, a),
            tracker("relation strict", str_term, &env, str_prime, a),
            tracker("relation total", terms::REL_TOT, &env, tot_meet(&relation, a), a),
            tracker("internally injective", terms::INJ, &env, inj_value, a),
            TrackerCheck {
                label: "d-map".into(),
                term: "lamd".into(),
                value: a.name(lamd).into(),
                target: a.name(a.top()).into(),
                in_separator: a.in_sep(lamd),
                below_target: true,
            },
        ]
    };
    let sizes: Vec<usize> = options.iter().map(Vec::len).collect();
    let mut chosen = None;
    let mut first = None;
    for pick in index_product(&sizes) {
        let d: Vec<(Elem, Elem)> = keys.iter().zip(&pick).zip(&options).map(|((&k, &i), o)| (k, o[i])).collect();
        let lamd = lam_of(&d, a);
        let checks = run(lamd, terms::REL_STR, terms::REL_EXT);
        let ok = checks.iter().all(TrackerCheck::passes);
        if first.is_none() {
            first = Some((lamd, checks.clone()));
        }
        if ok {
            chosen = Some((lamd, checks));
            break;
        }
    }
    let (lamd, trackers) = chosen.or(first).expect("at least one choice of d");
    let printed = run(lamd, terms::REL_STR_AS_PRINTED, terms::REL_EXT_AS_PRINTED);
    let printed_trackers = printed.into_iter().take(2).collect();

    Ok(KRelation {
        validation: validate_frel(&relation, a),
        surjective: internal_surjective(&relation, a),
        injective: inj,
        hat,
        relation,
        display_matches,
        trackers,
        printed_trackers,
    })
}

fn pos_of(ngh: &[usize], x: usize) -> usize {
    ngh.iter().position(|&g| g == x).expect("non-ghost")
}

fn index_product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out.into_iter().flat_map(|p: Vec<usize>| (0..s).map(move |i| [p.clone(), vec![i]].concat())).collect();
    }
    out
}

/// Every valid implicative set with at most `max_len` points, equality
/// matrices in row-major lexicographic order.
pub fn enumerate_implicative_sets(a: &ImplicativeAlgebra, max_len: usize) -> Vec<ImplicativeSet> {
    let elems: Vec<Elem> = a.elems().collect();
    let mut out = Vec::new();
    for n in 1..=max_len {
        let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        for pick in set_maps(n * n, elems.len()) {
            let e = ImplicativeSet { labels: labels.clone(), eq: pick.iter().map(|&k| elems[k]).collect() };
            if validate_implicative_set(&e, a).is_valid() {
                out.push(e);
            }
        }
    }
    out
}

/// Search for an implicative set whose comparison relation is not
/// internally surjective.
#[derive(Debug, Clone, Serialize)]
pub struct SurjectivitySearch {
    pub examined: usize,
    pub failure: Option<SurjectivityFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurjectivityFailure {
    pub set: ImplicativeSet,
    pub ghosts: Vec<String>,
    pub surj: String,
}

pub fn surjectivity_failure_search(m: ElemSet, a: &ImplicativeAlgebra, max_len: usize) -> Result<SurjectivitySearch> {
    let mut examined = 0;
    for e in enumerate_implicative_sets(a, max_len) {
        if ghost_partition(&e, a).ngh.is_empty() {
            continue;
        }
        examined += 1;
        let e = Arc::new(e);
        let k = k_relation(&e, m, a)?;
        if !k.surjective.holds {
            let ghosts = ghost_partition(&e, a).ghosts.iter().map(|&g| e.label(g).to_string()).collect();
            return Ok(SurjectivitySearch {
                examined,
                failure: Some(SurjectivityFailure { set: (*e).clone(), ghosts, surj: k.surjective.value }),
            });
        }
    }
    Ok(SurjectivitySearch { examined, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::excomp::enumerate_groupoids;

    fn set(a: &ImplicativeAlgebra, rows: &[&[&str]]) -> Arc<ImplicativeSet> {
        let n = rows.len();
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let eq = rows.iter().flat_map(|r| r.iter().map(|v| a.elem(v).unwrap())).collect();
        Arc::new(ImplicativeSet::new(labels, eq).unwrap())
    }

    fn asm(a: &ImplicativeAlgebra, vals: &[&str]) -> Arc<Assembly> {
        Arc::new(Assembly::from_values(vals.iter().map(|v| a.elem(v).unwrap()).collect(), a).unwrap())
    }

    #[test]
    fn constant_top_and_diagonal_are_valid() {
        let a = corpus::c4();
        assert!(validate_implicative_set(&set(&a, &[&["1", "1"], &["1", "1"]]), &a).is_valid());
        assert!(validate_implicative_set(&set(&a, &[&["1", "0"], &["0", "1"]]), &a).is_valid());
        assert!(!validate_implicative_set(&set(&a, &[&["1", "1"], &["0", "1"]]), &a).is_valid());
    }

    #[test]
    fn bottom_relation_is_not_total() {
        let a = corpus::h3();
        let e = set(&a, &[&["1"]]);
        let f = FunctionalRelation::from_fn(e.clone(), e, |_, _| a.bot());
        let r = validate_frel(&f, &a);
        assert!(!r.checks.iter().find(|c| c.name == "Tot").unwrap().holds);
        assert!(r.checks.iter().find(|c| c.name == "Ext").unwrap().holds);
    }

    #[test]
    fn identity_is_neutral() {
        let a = corpus::h3h();
        let e = set(&a, &[&["1", "h"], &["h", "h"]]);
        let id = id_frel(&e);
        assert!(validate_frel(&id, &a).is_valid());
        let comp = compose_frel(&id, &id, &a).unwrap();
        assert!(frel_equiv(&comp, &id, &a).unwrap().equivalent());
        assert!(internal_injective(&id, &a).holds && internal_surjective(&id, &a).holds);
    }

    #[test]
    fn k_of_a_discrete_point() {
        let a = corpus::c4();
        let g = PseudoGroupoid::discrete(Arc::new(Assembly::terminal(&a)), &a);
        let k = k_object_checked(&g, &a).unwrap();
        let t = a.top();
        assert_eq!(k.set.equal(0, 0), a.encoded_meet(t, a.encoded_meet(t, a.e_exists(ElemSet::singleton(t)))));
        assert!(k.validation.is_valid());
        assert!(k.trackers.iter().all(TrackerCheck::passes));
    }

    #[test]
    fn missing_edges_give_an_empty_existential() {
        let a = corpus::h3h();
        let g = PseudoGroupoid::discrete(asm(&a, &["1", "h"]), &a);
        let k = k_object(&g, &a);
        let h = a.elem("h").unwrap();
        assert_eq!(k.equal(0, 1), enc3(&a, a.top(), h, a.e_exists(ElemSet::EMPTY)));
        assert!(ghost_partition(&k, &a).ghosts.is_empty());
    }

    #[test]
    fn k_faithful_on_discrete_points() {
        let a = corpus::b2();
        let x = PseudoGroupoid::discrete(Arc::new(Assembly::terminal(&a)), &a);
        let y = PseudoGroupoid::discrete(asm(&a, &["1", "1"]), &a);
        let ms = quiver_morphisms(&x, &y, &a);
        assert_eq!(ms.len(), 2);
        let r0 = k_morphism_checked(&x, &y, &ms[0], &a).unwrap();
        let r1 = k_morphism_checked(&x, &y, &ms[1], &a).unwrap();
        assert!(r0.validation.is_valid() && r0.trackers.iter().all(TrackerCheck::passes));
        assert!(!frel_equiv(&r0.relation, &r1.relation, &a).unwrap().equivalent());
    }

    #[test]
    fn identity_morphism_goes_to_identity_relation() {
        let a = corpus::h3h();
        for g in enumerate_groupoids(a.separator(), &a, 2, 3) {
            let id = QuiverMorphism::identity(&g, &a);
            let r = k_morphism_checked(&g, &g, &id, &a).unwrap();
            let kid = id_frel(&r.relation.source);
            assert!(frel_equiv(&r.relation, &kid, &a).unwrap().equivalent());
        }
    }

    #[test]
    fn fullness_recovers_known_morphisms() {
        let a = corpus::h3h();
        let gs = enumerate_groupoids(a.separator(), &a, 2, 3);
        for x in gs.iter().take(4) {
            for y in gs.iter().take(4) {
                for g in quiver_morphisms(x, y, &a) {
                    let rel = k_morphism_checked(x, y, &g, &a).unwrap().relation;
                    let out = k_fullness_search(x, y, &rel, &a).unwrap();
                    let f = out.morphism.expect("a representative");
                    assert!(crate::excomp::is_homotopic(&f, &g, y, &a).is_some());
                }
            }
        }
    }

    #[test]
    fn top_equality_gives_the_codiscrete_groupoid() {
        let a = corpus::h3();
        let e = set(&a, &[&["1", "1"], &["1", "1"]]);
        let m = ElemSet::singleton(a.top());
        let hat = hat_groupoid(&e, m, &a, None).unwrap();
        let g = &hat.groupoid;
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edge_object().len(), 4);
        assert!((0..2).all(|i| (0..2).all(|j| g.edges(i, j).len() == 1)));
        assert!(hat.trackers.iter().all(TrackerCheck::passes));
    }

    #[test]
    fn ghosts_are_left_out() {
        let a = corpus::h3();
        let e = set(&a, &[&["1", "0"], &["0", "h"]]);
        let hat = hat_groupoid(&e, a.separator(), &a, None).unwrap();
        assert_eq!(hat.partition.ghosts, vec![1]);
        assert_eq!(hat.groupoid.vertices().len(), 1);
    }

    #[test]
    fn comparison_relation_on_a_ghostless_set() {
        let a = corpus::h3h();
        let e = set(&a, &[&["1", "h"], &["h", "h"]]);
        let k = k_relation(&e, a.separator(), &a).unwrap();
        assert!(k.validation.is_valid());
        assert!(k.injective.holds && k.surjective.holds);
        assert!(k.display_matches);
        assert!(k.trackers.iter().all(TrackerCheck::passes), "{:?}", k.trackers);
        assert!(k.printed_trackers[1].value.starts_with("error: unbound variable `p`"));
    }

    #[test]
    fn an_isolated_ghost_blocks_surjectivity() {
        // Ex(p1) = h is neither in S nor bottom.
        let a = corpus::h3();
        let e = set(&a, &[&["1", "0"], &["0", "h"]]);
        let k = k_relation(&e, a.separator(), &a).unwrap();
        assert!(!k.surjective.holds);
        let e = set(&a, &[&["1", "0"], &["0", "0"]]);
        assert!(k_relation(&e, a.separator(), &a).unwrap().surjective.holds);
    }
}
