//! Separators, implicative algebras, families and valuations.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambda::{combinator, interp, parse, Combinator, Env};
use crate::order::{Elem, ElemSet, ImplicativeStructure};

/// Largest carrier for which joins-compatibility scans every subset.
pub const JOINS_EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SeparatorViolation {
    NotUpwardClosed { member: String, above: String },
    NotApplicationClosed { f: String, x: String, result: String },
    MissingK { k: String },
    MissingS { s: String },
}

impl fmt::Display for SeparatorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparatorViolation::NotUpwardClosed { member, above } => {
                write!(f, "not upward closed: {member} is a member but {above} is not")
            }
            SeparatorViolation::NotApplicationClosed { f: a, x, result } => {
                write!(f, "not closed under application: {a} {x} = {result}")
            }
            SeparatorViolation::MissingK { k } => write!(f, "K = {k} is not a member"),
            SeparatorViolation::MissingS { s } => write!(f, "S = {s} is not a member"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeparatorReport {
    pub violations: Vec<SeparatorViolation>,
    pub warnings: Vec<String>,
}

impl SeparatorReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the separator axioms for a literal member set.
pub fn validate_separator(a: &ImplicativeStructure, members: ElemSet) -> SeparatorReport {
    let mut r = SeparatorReport::default();
    let l = a.lattice();
    for m in members.iter() {
        for b in l.up_set(m).minus(members).iter() {
            r.violations.push(SeparatorViolation::NotUpwardClosed { member: a.name(m).into(), above: a.name(b).into() });
        }
    }
    let k = combinator(Combinator::K, a);
    let s = combinator(Combinator::S, a);
    if !members.contains(k) {
        r.violations.push(SeparatorViolation::MissingK { k: a.name(k).into() });
    }
    if !members.contains(s) {
        r.violations.push(SeparatorViolation::MissingS { s: a.name(s).into() });
    }
    for x in members.iter() {
        for y in members.iter() {
            let z = a.app(x, y);
            if !members.contains(z) {
                r.violations.push(SeparatorViolation::NotApplicationClosed {
                    f: a.name(x).into(),
                    x: a.name(y).into(),
                    result: a.name(z).into(),
                });
            }
        }
    }
    if members.contains(a.bot()) {
        r.warnings.push("degenerate separator: it contains bottom, so every element is a member".into());
    }
    r
}

/// An implicative structure with a separator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicativeAlgebra {
    structure: ImplicativeStructure,
    separator: ElemSet,
    generators: ElemSet,
}

impl ImplicativeAlgebra {
    /// Closes `generators` upward and validates the result.
    pub fn new(structure: ImplicativeStructure, generators: ElemSet) -> Result<ImplicativeAlgebra> {
        let members = structure.lattice().up_closure(generators);
        let alg = ImplicativeAlgebra { structure, separator: members, generators };
        alg.check()?;
        Ok(alg)
    }

    /// Takes `members` literally, without upward closure.
    pub fn with_members(structure: ImplicativeStructure, members: ElemSet) -> Result<ImplicativeAlgebra> {
        let alg = ImplicativeAlgebra { structure, separator: members, generators: members };
        alg.check()?;
        Ok(alg)
    }

    /// Builds from generator names.
    pub fn from_names(structure: ImplicativeStructure, generators: &[&str]) -> Result<ImplicativeAlgebra> {
        let g = generators.iter().map(|n| structure.elem(n)).collect::<Result<ElemSet>>()?;
        ImplicativeAlgebra::new(structure, g)
    }

    pub fn unchecked(structure: ImplicativeStructure, members: ElemSet) -> ImplicativeAlgebra {
        ImplicativeAlgebra { structure, separator: members, generators: members }
    }

    fn check(&self) -> Result<()> {
        match self.validate().violations.into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Invalid(format!("separator: {v}"))),
        }
    }

    pub fn validate(&self) -> SeparatorReport {
        validate_separator(&self.structure, self.separator)
    }

    pub fn structure(&self) -> &ImplicativeStructure {
        &self.structure
    }

    pub fn separator(&self) -> ElemSet {
        self.separator
    }

    /// The generators the algebra was built from.
    pub fn generators(&self) -> ElemSet {
        self.generators
    }

    /// Minimal members of the separator.
    pub fn minimal_members(&self) -> ElemSet {
        let l = self.structure.lattice();
        self.separator.iter().filter(|&m| self.separator.iter().all(|o| o == m || !l.leq(o, m))).collect()
    }

    pub fn in_sep(&self, e: Elem) -> bool {
        self.separator.contains(e)
    }

    pub fn is_degenerate(&self) -> bool {
        self.separator.contains(self.structure.bot())
    }

    /// Whether the separator is closed under binary lattice meets.
    pub fn is_filter(&self) -> bool {
        let l = self.structure.lattice();
        self.separator.iter().all(|a| self.separator.iter().all(|b| self.separator.contains(l.meet2(a, b))))
    }

    pub fn name(&self, e: Elem) -> &str {
        self.structure.name(e)
    }

    pub fn elem(&self, name: &str) -> Result<Elem> {
        self.structure.elem(name)
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + Clone {
        self.structure.elems()
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.structure.leq(a, b)
    }

    pub fn imp(&self, a: Elem, b: Elem) -> Elem {
        self.structure.imp(a, b)
    }

    pub fn app(&self, a: Elem, b: Elem) -> Elem {
        self.structure.app(a, b)
    }

    pub fn top(&self) -> Elem {
        self.structure.top()
    }

    pub fn bot(&self) -> Elem {
        self.structure.bot()
    }

    pub fn meet_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        self.structure.meet_iter(it)
    }

    pub fn join_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        self.structure.join_iter(it)
    }

    pub fn fmt_set(&self, s: ElemSet) -> String {
        self.structure.lattice().fmt_set(s)
    }

    /// The encoded meet `a /\ b`.
    pub fn encoded_meet(&self, a: Elem, b: Elem) -> Elem {
        self.structure.enc(a, b)
    }

    /// Implicative existence over `u`.
    pub fn e_exists(&self, u: ElemSet) -> Elem {
        e_exists(&self.structure, u)
    }

    /// `meet_x (u_x -> v_x)`, the entailment witness between two families.
    pub fn entailment_witness(&self, u: &[Elem], v: &[Elem]) -> Elem {
        self.meet_iter(u.iter().zip(v).map(|(&x, &y)| self.imp(x, y)))
    }
}

/// Whether a tracker term lands in the separator and below its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrackerCheck {
    pub label: String,
    pub term: String,
    pub value: String,
    pub target: String,
    pub in_separator: bool,
    pub below_target: bool,
}

impl TrackerCheck {
    pub fn passes(&self) -> bool {
        self.in_separator && self.below_target
    }
}

impl fmt::Display for TrackerCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passes() { "ok" } else { "FAILS" };
        write!(f, "{}: `{}` = {} against {} ({verdict}", self.label, self.term, self.value, self.target)?;
        if !self.in_separator {
            write!(f, ", outside the separator")?;
        }
        if !self.below_target {
            write!(f, ", not below the target")?;
        }
        write!(f, ")")
    }
}

/// Interprets `term` under `env` and compares it with `target`.
pub fn check_tracker(label: &str, term: &str, env: &Env, target: Elem, a: &ImplicativeAlgebra) -> Result<TrackerCheck> {
    let v = cached_interp(term, env, a.structure())?;
    Ok(TrackerCheck {
        label: label.into(),
        term: term.into(),
        value: a.name(v).into(),
        target: a.name(target).into(),
        in_separator: a.in_sep(v),
        below_target: a.leq(v, target),
    })
}

type InterpKey = (u64, String, Vec<(String, Elem)>);

/// Tracker terms are re-checked against many targets under few
/// environments, so their values are memoized.
fn cached_interp(term: &str, env: &Env, a: &ImplicativeStructure) -> Result<Elem> {
    static CACHE: OnceLock<Mutex<HashMap<InterpKey, Elem>>> = OnceLock::new();
    let key = (a.fingerprint(), term.to_string(), env.iter().map(|(k, v)| (k.to_string(), v)).collect());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v);
    }
    let v = interp(&parse(term)?, env, a)?;
    cache.lock().expect("cache lock").insert(key, v);
    Ok(v)
}

/// `meet_c ((meet_{u in U} (u -> c)) -> c)`.
pub fn e_exists(a: &ImplicativeStructure, u: ElemSet) -> Elem {
    a.meet_iter(a.elems().map(|c| {
        let ante = a.meet_iter(u.iter().map(|x| a.imp(x, c)));
        a.imp(ante, c)
    }))
}

/// An element of a fibre: a family of algebra elements indexed by a finite set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Family {
    pub index: Vec<String>,
    pub values: Vec<Elem>,
}

impl Family {
    pub fn new(index: Vec<String>, values: Vec<Elem>) -> Result<Family> {
        if index.len() != values.len() {
            return Err(Error::NonTotalMap(format!("{} indices but {} values", index.len(), values.len())));
        }
        Ok(Family { index, values })
    }

    /// Indices labelled `0..n`.
    pub fn anonymous(values: Vec<Elem>) -> Family {
        Family { index: (0..values.len()).map(|i| i.to_string()).collect(), values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Result of comparing two families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Entailment {
    pub holds: bool,
    pub witness: Elem,
}

/// Decides `u |- v` in the fibre: is `meet_x (u_x -> v_x)` in the separator.
pub fn fam_entails(u: &Family, v: &Family, a: &ImplicativeAlgebra) -> Result<Entailment> {
    if u.index != v.index {
        return Err(Error::IndexMismatch(format!("{} vs {} indices", u.len(), v.len())));
    }
    let w = a.entailment_witness(&u.values, &v.values);
    Ok(Entailment { holds: a.in_sep(w), witness: w })
}

/// Entailment both ways.
pub fn fam_iso(u: &Family, v: &Family, a: &ImplicativeAlgebra) -> Result<bool> {
    Ok(fam_entails(u, v, a)?.holds && fam_entails(v, u, a)?.holds)
}

/// A map from a finite index set to nonempty subsets of a designated `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Valuation {
    pub m: ElemSet,
    pub values: Vec<ElemSet>,
}

impl Valuation {
    pub fn new(m: ElemSet, values: Vec<ElemSet>) -> Result<Valuation> {
        for (i, v) in values.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::EmptyValuation(i));
            }
            if !v.is_subset(m) {
                return Err(Error::Invalid(format!("valuation value at index {i} leaves M")));
            }
        }
        Ok(Valuation { m, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn partial(&self) -> PartialValuation {
        PartialValuation { values: self.values.clone() }
    }
}

/// Like [`Valuation`] but values may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialValuation {
    pub values: Vec<ElemSet>,
}

impl PartialValuation {
    pub fn existence(&self, a: &ImplicativeStructure) -> Vec<Elem> {
        self.values.iter().map(|&u| e_exists(a, u)).collect()
    }
}

/// The family `x |-> e_exists(nu(x))`.
pub fn e_exists_valuation(nu: &Valuation, index: Vec<String>, a: &ImplicativeAlgebra) -> Result<Family> {
    Family::new(index, nu.values.iter().map(|&u| a.e_exists(u)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum JoinsCompatibility {
    Yes { exhaustive: bool },
    Counterexample { subset: String, b: String },
}

/// Checks `meet_{a in U} (a -> b) = (join U) -> b`.
///
/// All subsets are scanned for carriers up to [`JOINS_EXHAUSTIVE_LIMIT`];
/// larger carriers only see subsets of at most `size_cap` elements.
pub fn compatible_with_joins(a: &ImplicativeStructure, size_cap: usize) -> JoinsCompatibility {
    let exhaustive = a.len() <= JOINS_EXHAUSTIVE_LIMIT;
    let l = a.lattice();
    for u in l.all().subsets() {
        if !exhaustive && u.len() > size_cap {
            continue;
        }
        for b in a.elems() {
            let lhs = a.meet_iter(u.iter().map(|x| a.imp(x, b)));
            if lhs != a.imp(l.join(u), b) {
                return JoinsCompatibility::Counterexample { subset: l.fmt_set(u), b: a.name(b).into() };
            }
        }
    }
    JoinsCompatibility::Yes { exhaustive }
}

pub fn is_joins_compatible(a: &ImplicativeStructure) -> bool {
    matches!(compatible_with_joins(a, a.len()), JoinsCompatibility::Yes { .. })
}

/// One attempt at extracting an existential witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractionCase {
    pub u: String,
    pub a: String,
    pub chi: String,
    pub witness: Option<String>,
}

/// For each `U` and each `a` in S with `chi = a -> e_exists(U)` in S, look
/// for `u in U` with `chi a' <= lam z . z u` for every `a' <= a` in S.
///
/// Failures are collected; nothing is asserted.
pub fn witness_extraction(a: &ImplicativeAlgebra) -> Vec<ExtractionCase> {
    let s = a.structure();
    let l = s.lattice();
    let mut out = Vec::new();
    for u in l.all().subsets() {
        let ex = a.e_exists(u);
        for x in a.separator().iter() {
            let chi = a.imp(x, ex);
            if !a.in_sep(chi) {
                continue;
            }
            let below: Vec<Elem> = l.down_set(x).intersect(a.separator()).iter().collect();
            let witness = u.iter().find(|&w| {
                let lz = s.meet_iter(s.elems().map(|z| s.imp(z, s.app(z, w))));
                below.iter().all(|&x2| s.leq(s.app(chi, x2), lz))
            });
            out.push(ExtractionCase {
                u: l.fmt_set(u),
                a: a.name(x).into(),
                chi: a.name(chi).into(),
                witness: witness.map(|w| a.name(w).to_string()),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::interp_str;
    use crate::order::Lattice;

    fn heyting(names: &[&str]) -> ImplicativeStructure {
        ImplicativeStructure::derive_heyting(Lattice::chain(names).unwrap()).unwrap()
    }

    fn set(a: &ImplicativeStructure, names: &[&str]) -> ElemSet {
        names.iter().map(|n| a.elem(n).unwrap()).collect()
    }

    #[test]
    fn separator_examples() {
        let b2 = heyting(&["0", "1"]);
        assert!(validate_separator(&b2, set(&b2, &["1"])).is_valid());
        let r = validate_separator(&b2, set(&b2, &["0", "1"]));
        assert!(r.is_valid());
        assert_eq!(r.warnings.len(), 1);
        let h3 = heyting(&["0", "h", "1"]);
        let r = validate_separator(&h3, set(&h3, &["h"]));
        assert!(r.violations.iter().any(|v| matches!(v, SeparatorViolation::NotUpwardClosed { .. })));
        // Generators are closed upward, so {h} becomes {h, 1}.
        let alg = ImplicativeAlgebra::from_names(h3.clone(), &["h"]).unwrap();
        assert_eq!(alg.separator(), set(&h3, &["h", "1"]));
        assert!(ImplicativeAlgebra::with_members(h3, set(&heyting(&["0", "h", "1"]), &["h"])).is_err());
    }

    #[test]
    fn encoded_meet_b2() {
        let b2 = heyting(&["0", "1"]);
        let (z, o) = (b2.elem("0").unwrap(), b2.elem("1").unwrap());
        // Oracle: per-c table of (a -> b -> c) -> c, then meet.
        let oracle = |a: Elem, b: Elem| b2.meet_iter(b2.elems().map(|c| b2.imp(b2.imp(a, b2.imp(b, c)), c)));
        assert_eq!(b2.enc(o, z), z);
        assert_eq!(b2.enc(o, o), o);
        for x in b2.elems() {
            for y in b2.elems() {
                assert_eq!(b2.enc(x, y), oracle(x, y));
            }
        }
    }

    #[test]
    fn encoded_meet_is_meet_in_h3() {
        let h3 = heyting(&["0", "h", "1"]);
        for x in h3.elems() {
            for y in h3.elems() {
                assert_eq!(h3.enc(x, y), h3.lattice().meet2(x, y));
            }
        }
    }

    #[test]
    fn e_exists_examples() {
        let b2 = heyting(&["0", "1"]);
        assert_eq!(b2.name(e_exists(&b2, ElemSet::EMPTY)), "0");
        assert_eq!(b2.name(e_exists(&b2, b2.lattice().all())), "1");
        let h3 = heyting(&["0", "h", "1"]);
        for u in h3.lattice().all().subsets() {
            assert_eq!(e_exists(&h3, u), h3.join(u));
            for x in u.iter() {
                let lz = interp_str("lam z . z u", &Env::new().with("u", x), &h3).unwrap();
                assert!(h3.leq(lz, e_exists(&h3, u)));
            }
        }
    }

    #[test]
    fn entailment_examples() {
        let b2 = ImplicativeAlgebra::from_names(heyting(&["0", "1"]), &["1"]).unwrap();
        let (z, o) = (b2.elem("0").unwrap(), b2.elem("1").unwrap());
        let u = Family::anonymous(vec![o, z]);
        let e = fam_entails(&u, &u, &b2).unwrap();
        assert!(e.holds);
        let i = combinator(Combinator::I, b2.structure());
        assert!(b2.leq(i, e.witness));
        let zeros = Family::anonymous(vec![z, z]);
        assert!(fam_entails(&zeros, &u, &b2).unwrap().holds);
        let ones = Family::anonymous(vec![o, o]);
        let e = fam_entails(&ones, &zeros, &b2).unwrap();
        assert!(!e.holds);
        assert_eq!(e.witness, z);
        assert!(fam_entails(&ones, &Family::anonymous(vec![o]), &b2).is_err());
    }

    #[test]
    fn joins_compatibility() {
        assert_eq!(compatible_with_joins(&heyting(&["0", "1"]), 4), JoinsCompatibility::Yes { exhaustive: true });
        assert!(is_joins_compatible(&heyting(&["0", "h", "1"])));
    }

    #[test]
    fn valuation_family() {
        let b2 = ImplicativeAlgebra::from_names(heyting(&["0", "1"]), &["1"]).unwrap();
        let m = b2.separator();
        let nu = Valuation::new(m, vec![m, m]).unwrap();
        let fam = e_exists_valuation(&nu, vec!["a".into(), "b".into()], &b2).unwrap();
        assert_eq!(fam.values, vec![b2.top(), b2.top()]);
        let empty = Valuation::new(m, vec![]).unwrap();
        assert!(e_exists_valuation(&empty, vec![], &b2).unwrap().is_empty());
        assert_eq!(Valuation::new(m, vec![ElemSet::EMPTY]), Err(Error::EmptyValuation(0)));
    }
}
