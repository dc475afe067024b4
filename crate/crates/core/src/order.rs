//! Finite complete lattices and implicative structures.

use std::collections::HashMap;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Carriers above this size get a sampled completeness check.
pub const EXHAUSTIVE_LIMIT: usize = 16;
const SAMPLE_SEED: u64 = 0x5eed;
const SAMPLE_COUNT: usize = 4096;

/// Index of an element in a lattice carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Elem(pub u8);

impl Elem {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A subset of a carrier of at most 64 elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct ElemSet(pub u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn full(n: usize) -> ElemSet {
        if n == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: Elem) -> ElemSet {
        ElemSet(1 << e.0)
    }

    pub fn contains(self, e: Elem) -> bool {
        self.0 >> e.0 & 1 == 1
    }

    pub fn insert(&mut self, e: Elem) {
        self.0 |= 1 << e.0;
    }

    pub fn with(self, e: Elem) -> ElemSet {
        ElemSet(self.0 | 1 << e.0)
    }

    pub fn union(self, o: ElemSet) -> ElemSet {
        ElemSet(self.0 | o.0)
    }

    pub fn intersect(self, o: ElemSet) -> ElemSet {
        ElemSet(self.0 & o.0)
    }

    pub fn minus(self, o: ElemSet) -> ElemSet {
        ElemSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: ElemSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn first(self) -> Option<Elem> {
        (self.0 != 0).then(|| Elem(self.0.trailing_zeros() as u8))
    }

    pub fn iter(self) -> impl Iterator<Item = Elem> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Elem(i as u8))
        })
    }

    /// All subsets of `self`, starting from the empty set.
    pub fn subsets(self) -> impl Iterator<Item = ElemSet> {
        let full = self.0;
        let mut cur: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full { None } else { Some((c.wrapping_sub(full)) & full) };
            Some(ElemSet(c))
        })
    }
}

impl FromIterator<Elem> for ElemSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

/// A finite complete lattice with named elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    names: Vec<String>,
    index: HashMap<String, Elem>,
    down: Vec<ElemSet>,
    up: Vec<ElemSet>,
    meet2: Vec<Elem>,
    join2: Vec<Elem>,
    top: Elem,
    bot: Elem,
    sampled: bool,
}

impl Lattice {
    /// Builds a lattice from element names and generating pairs `a <= b`.
    ///
    /// The order is closed reflexively and transitively. Posets that are
    /// not antisymmetric or not complete lattices are rejected.
    pub fn new<S: AsRef<str>>(names: &[S], pairs: &[(S, S)]) -> Result<Lattice> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NotALattice("empty carrier".into()));
        }
        if n > 64 {
            return Err(Error::TooLarge(n));
        }
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            let name = name.as_ref().to_string();
            if index.insert(name.clone(), Elem(i as u8)).is_some() {
                return Err(Error::DuplicateName(name));
            }
        }
        let lookup = |s: &str| index.get(s).copied().ok_or_else(|| Error::UnknownElement(s.into()));
        let mut up: Vec<ElemSet> = (0..n).map(|i| ElemSet::singleton(Elem(i as u8))).collect();
        for (a, b) in pairs {
            let (a, b) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
            up[a.index()].insert(b);
        }
        // Warshall closure on bitsets.
        for k in 0..n {
            for i in 0..n {
                if up[i].contains(Elem(k as u8)) {
                    up[i] = up[i].union(up[k]);
                }
            }
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                if up[i].contains(Elem(j as u8)) && up[j].contains(Elem(i as u8)) {
                    return Err(Error::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        Self::from_up_sets(names, index, up)
    }

    /// Builds a lattice from an order predicate on indices `0..n`.
    pub fn from_leq<S: AsRef<str>>(names: &[S], leq: impl Fn(usize, usize) -> bool) -> Result<Lattice> {
        let mut pairs = Vec::new();
        for i in 0..names.len() {
            for j in 0..names.len() {
                if i != j && leq(i, j) {
                    pairs.push((names[i].as_ref().to_string(), names[j].as_ref().to_string()));
                }
            }
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        Lattice::new(&names, &pairs)
    }

    /// The chain `names[0] < names[1] < ...`.
    pub fn chain<S: AsRef<str>>(names: &[S]) -> Result<Lattice> {
        Lattice::from_leq(names, |i, j| i <= j)
    }

    fn from_up_sets(names: Vec<String>, index: HashMap<String, Elem>, up: Vec<ElemSet>) -> Result<Lattice> {
        let n = names.len();
        let mut down = vec![ElemSet::EMPTY; n];
        for (i, u) in up.iter().enumerate() {
            for j in u.iter() {
                down[j.index()].insert(Elem(i as u8));
            }
        }
        let all = ElemSet::full(n);
        let glb = |s: ElemSet| -> Option<Elem> {
            let lbs = s.iter().fold(all, |acc, x| acc.intersect(down[x.index()]));
            lbs.iter().find(|c| lbs.is_subset(down[c.index()]))
        };
        let lub = |s: ElemSet| -> Option<Elem> {
            let ubs = s.iter().fold(all, |acc, x| acc.intersect(up[x.index()]));
            ubs.iter().find(|c| ubs.is_subset(up[c.index()]))
        };
        let describe = |s: ElemSet| {
            let v: Vec<&str> = s.iter().map(|e| names[e.index()].as_str()).collect();
            format!("{{{}}}", v.join(", "))
        };
        let top = glb(ElemSet::EMPTY).ok_or_else(|| Error::NotALattice("no top element".into()))?;
        let bot = lub(ElemSet::EMPTY).ok_or_else(|| Error::NotALattice("no bottom element".into()))?;
        let mut meet2 = vec![top; n * n];
        let mut join2 = vec![bot; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = ElemSet::singleton(Elem(i as u8)).with(Elem(j as u8));
                meet2[i * n + j] = glb(s).ok_or_else(|| Error::NotALattice(format!("{} has no meet", describe(s))))?;
                join2[i * n + j] = lub(s).ok_or_else(|| Error::NotALattice(format!("{} has no join", describe(s))))?;
            }
        }
        // Binary meets and a top already make a finite poset complete; the
        // subset scan below re-checks this directly.
        let sampled = n > EXHAUSTIVE_LIMIT;
        let check = |s: ElemSet| -> Result<()> {
            if glb(s).is_none() {
                return Err(Error::NotALattice(format!("{} has no meet", describe(s))));
            }
            if lub(s).is_none() {
                return Err(Error::NotALattice(format!("{} has no join", describe(s))));
            }
            Ok(())
        };
        if sampled {
            let mut rng = StdRng::seed_from_u64(SAMPLE_SEED);
            for _ in 0..SAMPLE_COUNT {
                check(ElemSet(rng.gen::<u64>() & all.0))?;
            }
        } else {
            for s in all.subsets() {
                check(s)?;
            }
        }
        Ok(Lattice { names, index, down, up, meet2, join2, top, bot, sampled })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Whether completeness was established by sampling rather than exhaustion.
    pub fn completeness_sampled(&self) -> bool {
        self.sampled
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.names.len() as u8).map(Elem)
    }

    pub fn all(&self) -> ElemSet {
        ElemSet::full(self.len())
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn elem(&self, name: &str) -> Result<Elem> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownElement(name.into()))
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn bot(&self) -> Elem {
        self.bot
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.up[a.index()].contains(b)
    }

    pub fn up_set(&self, a: Elem) -> ElemSet {
        self.up[a.index()]
    }

    pub fn down_set(&self, a: Elem) -> ElemSet {
        self.down[a.index()]
    }

    pub fn meet2(&self, a: Elem, b: Elem) -> Elem {
        self.meet2[a.index() * self.len() + b.index()]
    }

    pub fn join2(&self, a: Elem, b: Elem) -> Elem {
        self.join2[a.index() * self.len() + b.index()]
    }

    pub fn meet(&self, s: ElemSet) -> Elem {
        s.iter().fold(self.top, |acc, x| self.meet2(acc, x))
    }

    pub fn join(&self, s: ElemSet) -> Elem {
        s.iter().fold(self.bot, |acc, x| self.join2(acc, x))
    }

    pub fn meet_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        it.into_iter().fold(self.top, |acc, x| self.meet2(acc, x))
    }

    pub fn join_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        it.into_iter().fold(self.bot, |acc, x| self.join2(acc, x))
    }

    /// Meet of a set given by names.
    pub fn meet_named(&self, names: &[&str]) -> Result<Elem> {
        let s: Result<ElemSet> = names.iter().map(|n| self.elem(n)).collect();
        Ok(self.meet(s?))
    }

    /// Join of a set given by names.
    pub fn join_named(&self, names: &[&str]) -> Result<Elem> {
        let s: Result<ElemSet> = names.iter().map(|n| self.elem(n)).collect();
        Ok(self.join(s?))
    }

    /// The upward closure of a set.
    pub fn up_closure(&self, s: ElemSet) -> ElemSet {
        s.iter().fold(ElemSet::EMPTY, |acc, x| acc.union(self.up[x.index()]))
    }

    /// Generating pairs of the covering relation, for canonical output.
    pub fn covers(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for a in self.elems() {
            for b in self.up_set(a).iter() {
                if a == b {
                    continue;
                }
                let between = self.up_set(a).intersect(self.down_set(b));
                if between.len() == 2 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn fmt_set(&self, s: ElemSet) -> String {
        let v: Vec<&str> = s.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", v.join(", "))
    }
}

impl Lattice {
    /// Cartesian product of two lattices, elements named `a.b`.
    pub fn product(l: &Lattice, r: &Lattice) -> Result<Lattice> {
        let mut names = Vec::new();
        let mut coords = Vec::new();
        for a in l.elems() {
            for b in r.elems() {
                names.push(format!("{}.{}", l.name(a), r.name(b)));
                coords.push((a, b));
            }
        }
        Lattice::from_leq(&names, |i, j| {
            l.leq(coords[i].0, coords[j].0) && r.leq(coords[i].1, coords[j].1)
        })
    }
}

/// One failed axiom instance of an implicative structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// `a2 <= a` and `b <= b2` but `a -> b` is not below `a2 -> b2`.
    Variance { a: String, a2: String, b: String, b2: String },
    /// `a -> meet(B)` differs from the meet of `a -> b`.
    Distribution { a: String, family: String },
    /// `meet(c, a) <= b` and `c <= a -> b` disagree.
    Adjunction { a: String, b: String, c: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Variance { a, a2, b, b2 } => {
                write!(f, "variance: {a2} <= {a} and {b} <= {b2} but ({a} -> {b}) is not below ({a2} -> {b2})")
            }
            Violation::Distribution { a, family } => {
                write!(f, "distribution: {a} -> meet {family} differs from the meet of the implications")
            }
            Violation::Adjunction { a, b, c } => {
                write!(f, "adjunction: meet({c}, {a}) <= {b} does not match {c} <= ({a} -> {b})")
            }
        }
    }
}

/// A finite complete lattice with an implication table.
///
/// Application and the encoded meet are tabulated on construction since
/// every downstream computation leans on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicativeStructure {
    lattice: Lattice,
    imp: Vec<Elem>,
    app: Vec<Elem>,
    enc: Vec<Elem>,
}

impl ImplicativeStructure {
    /// Wraps a table without validation. Use [`ImplicativeStructure::new`]
    /// to reject tables that break the axioms.
    pub fn from_table(lattice: Lattice, imp: impl Fn(Elem, Elem) -> Elem) -> ImplicativeStructure {
        let n = lattice.len();
        let mut table = Vec::with_capacity(n * n);
        for a in lattice.elems() {
            for b in lattice.elems() {
                table.push(imp(a, b));
            }
        }
        let mut s = ImplicativeStructure { lattice, imp: table, app: Vec::new(), enc: Vec::new() };
        let app: Vec<Elem> = s
            .pairs()
            .map(|(a, b)| s.lattice.meet_iter(s.lattice.elems().filter(|&c| s.lattice.leq(a, s.imp(b, c)))))
            .collect();
        s.app = app;
        let enc: Vec<Elem> = s
            .pairs()
            .map(|(a, b)| s.lattice.meet_iter(s.lattice.elems().map(|c| s.imp(s.imp(a, s.imp(b, c)), c))))
            .collect();
        s.enc = enc;
        s
    }

    /// Validating constructor.
    pub fn new(lattice: Lattice, imp: impl Fn(Elem, Elem) -> Elem) -> Result<ImplicativeStructure> {
        let s = ImplicativeStructure::from_table(lattice, imp);
        match s.validate().into_iter().next() {
            None => Ok(s),
            Some(v) => Err(Error::NotImplicative(v.to_string())),
        }
    }

    /// Builds from a table of names, `rows[a][b] = a -> b`.
    pub fn from_named_rows(lattice: Lattice, rows: &[&[&str]]) -> Result<ImplicativeStructure> {
        let n = lattice.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("implication table must be {n}x{n}")));
        }
        let mut table = vec![Elem(0); n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                table[i * n + j] = lattice.elem(v)?;
            }
        }
        ImplicativeStructure::new(lattice, |a, b| table[a.index() * n + b.index()])
    }

    /// The Heyting implication `a -> b = join { c | meet(c, a) <= b }`.
    ///
    /// Fails unless the candidate is an implicative structure that is
    /// also right adjoint to the meet.
    pub fn derive_heyting(lattice: Lattice) -> Result<ImplicativeStructure> {
        let l = lattice.clone();
        let s = ImplicativeStructure::from_table(lattice, |a, b| {
            l.join_iter(l.elems().filter(|&c| l.leq(l.meet2(c, a), b)))
        });
        let mut violations = s.validate();
        violations.extend(s.adjunction_violations());
        match violations.into_iter().next() {
            None => Ok(s),
            Some(v) => Err(Error::NotImplicative(v.to_string())),
        }
    }

    fn pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.lattice.elems().flat_map(move |a| self.lattice.elems().map(move |b| (a, b)))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> + Clone {
        self.lattice.elems()
    }

    pub fn top(&self) -> Elem {
        self.lattice.top()
    }

    pub fn bot(&self) -> Elem {
        self.lattice.bot()
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.lattice.leq(a, b)
    }

    pub fn name(&self, e: Elem) -> &str {
        self.lattice.name(e)
    }

    pub fn elem(&self, name: &str) -> Result<Elem> {
        self.lattice.elem(name)
    }

    pub fn meet(&self, s: ElemSet) -> Elem {
        self.lattice.meet(s)
    }

    pub fn join(&self, s: ElemSet) -> Elem {
        self.lattice.join(s)
    }

    pub fn meet_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        self.lattice.meet_iter(it)
    }

    pub fn join_iter(&self, it: impl IntoIterator<Item = Elem>) -> Elem {
        self.lattice.join_iter(it)
    }

    /// A hash of the order and the implication table, enough to tell
    /// structures apart in caches.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.lattice.down.hash(&mut h);
        self.imp.hash(&mut h);
        h.finish()
    }

    pub fn imp(&self, a: Elem, b: Elem) -> Elem {
        self.imp[a.index() * self.len() + b.index()]
    }

    /// Application `meet { c | a <= b -> c }`.
    pub fn app(&self, a: Elem, b: Elem) -> Elem {
        self.app[a.index() * self.len() + b.index()]
    }

    /// Encoded meet `meet_c ((a -> b -> c) -> c)`.
    pub fn enc(&self, a: Elem, b: Elem) -> Elem {
        self.enc[a.index() * self.len() + b.index()]
    }

    /// Every failing instance of variance and meet distribution.
    ///
    /// Distribution is checked over all subsets up to [`EXHAUSTIVE_LIMIT`]
    /// elements; above that, over the empty family and all pairs, which is
    /// equivalent on finite carriers.
    pub fn validate(&self) -> Vec<Violation> {
        let l = &self.lattice;
        let mut out = Vec::new();
        for (a, b) in self.pairs() {
            for a2 in l.down_set(a).iter() {
                for b2 in l.up_set(b).iter() {
                    if !l.leq(self.imp(a, b), self.imp(a2, b2)) {
                        out.push(Violation::Variance {
                            a: l.name(a).into(),
                            a2: l.name(a2).into(),
                            b: l.name(b).into(),
                            b2: l.name(b2).into(),
                        });
                    }
                }
            }
        }
        let families: Vec<ElemSet> = if l.len() <= EXHAUSTIVE_LIMIT {
            l.all().subsets().collect()
        } else {
            let mut f = vec![ElemSet::EMPTY];
            for (a, b) in self.pairs() {
                if a < b {
                    f.push(ElemSet::singleton(a).with(b));
                }
            }
            f
        };
        for a in l.elems() {
            for &fam in &families {
                let lhs = self.imp(a, l.meet(fam));
                let rhs = l.meet_iter(fam.iter().map(|b| self.imp(a, b)));
                if lhs != rhs {
                    out.push(Violation::Distribution { a: l.name(a).into(), family: l.fmt_set(fam) });
                }
            }
        }
        out
    }

    /// Instances where `->` fails to be right adjoint to the lattice meet.
    pub fn adjunction_violations(&self) -> Vec<Violation> {
        let l = &self.lattice;
        let mut out = Vec::new();
        for (a, b) in self.pairs() {
            for c in l.elems() {
                if l.leq(l.meet2(c, a), b) != l.leq(c, self.imp(a, b)) {
                    out.push(Violation::Adjunction { a: l.name(a).into(), b: l.name(b).into(), c: l.name(c).into() });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Lattice {
        Lattice::chain(&["0", "1"]).unwrap()
    }

    fn h3() -> Lattice {
        Lattice::chain(&["0", "h", "1"]).unwrap()
    }

    // Brute-force greatest lower bound, independent of the tables.
    fn glb_scan(l: &Lattice, s: &[Elem]) -> Elem {
        let lbs: Vec<Elem> = l.elems().filter(|&c| s.iter().all(|&x| l.leq(c, x))).collect();
        *lbs.iter().find(|&&c| lbs.iter().all(|&d| l.leq(d, c))).unwrap()
    }

    fn lub_scan(l: &Lattice, s: &[Elem]) -> Elem {
        let ubs: Vec<Elem> = l.elems().filter(|&c| s.iter().all(|&x| l.leq(x, c))).collect();
        *ubs.iter().find(|&&c| ubs.iter().all(|&d| l.leq(c, d))).unwrap()
    }

    #[test]
    fn meets_and_joins() {
        let l = b2();
        assert_eq!(l.name(l.meet(ElemSet::EMPTY)), "1");
        assert_eq!(l.name(l.meet(l.all())), "0");
        assert_eq!(l.name(l.join(ElemSet::EMPTY)), "0");
        assert_eq!(l.name(l.join(l.all())), "1");
        let l = h3();
        let (h, one, zero) = (l.elem("h").unwrap(), l.elem("1").unwrap(), l.elem("0").unwrap());
        assert_eq!(l.meet_named(&["h", "1"]).unwrap(), glb_scan(&l, &[h, one]));
        assert_eq!(l.meet_named(&["h", "1"]).unwrap(), h);
        assert_eq!(l.join_named(&["0", "h"]).unwrap(), lub_scan(&l, &[zero, h]));
        assert_eq!(l.join_named(&["0", "h"]).unwrap(), h);
        assert!(matches!(l.meet_named(&["x"]), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn rejects_bad_orders() {
        let cyc = Lattice::new(&["a", "b"], &[("a", "b"), ("b", "a")]);
        assert!(matches!(cyc, Err(Error::NotAntisymmetric(..))));
        let anti = Lattice::new(&["a", "b"], &[]);
        assert!(matches!(anti, Err(Error::NotALattice(_))));
        // Two maximal elements above a bowtie.
        let bow = Lattice::new(
            &["0", "a", "b", "c", "d", "1"],
            &[("0", "a"), ("0", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "1"), ("d", "1")],
        );
        assert!(matches!(bow, Err(Error::NotALattice(_))));
        assert!(matches!(Lattice::new(&["a", "a"], &[]), Err(Error::DuplicateName(_))));
    }

    #[test]
    fn heyting_on_chains() {
        let s = ImplicativeStructure::derive_heyting(b2()).unwrap();
        let (z, o) = (s.elem("0").unwrap(), s.elem("1").unwrap());
        assert_eq!(s.imp(o, z), z);
        assert_eq!(s.imp(z, z), o);
        assert_eq!(s.imp(z, o), o);
        assert_eq!(s.imp(o, o), o);
        let s = ImplicativeStructure::derive_heyting(h3()).unwrap();
        for a in s.elems() {
            for b in s.elems() {
                let expect = if s.leq(a, b) { s.top() } else { b };
                assert_eq!(s.imp(a, b), expect);
            }
        }
        assert!(s.validate().is_empty());
    }

    #[test]
    fn diamond_is_rejected() {
        let m3 = Lattice::new(
            &["0", "p", "q", "r", "1"],
            &[("0", "p"), ("0", "q"), ("0", "r"), ("p", "1"), ("q", "1"), ("r", "1")],
        )
        .unwrap();
        assert!(matches!(ImplicativeStructure::derive_heyting(m3), Err(Error::NotImplicative(_))));
    }

    #[test]
    fn constant_bottom_breaks_variance_and_top() {
        let l = b2();
        let bot = l.bot();
        let s = ImplicativeStructure::from_table(l, |_, _| bot);
        let v = s.validate();
        assert!(!v.is_empty());
        assert!(v.iter().any(|v| matches!(v, Violation::Distribution { family, .. } if family == "{}")));
    }

    #[test]
    fn adjunction_holds_for_derived() {
        let sq = Lattice::product(&b2(), &b2()).unwrap();
        let c4 = Lattice::chain(&["0", "a", "b", "1"]).unwrap();
        for l in [b2(), h3(), sq, c4] {
            let s = ImplicativeStructure::derive_heyting(l).unwrap();
            assert!(s.adjunction_violations().is_empty());
            for a in s.elems() {
                assert_eq!(s.imp(a, s.top()), s.top());
            }
        }
    }

    #[test]
    fn subsets_enumerates_all() {
        let s = ElemSet(0b1011);
        let subs: Vec<ElemSet> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
        assert_eq!(ElemSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn covers_regenerate_order() {
        let l = Lattice::product(&b2(), &h3()).unwrap();
        let names: Vec<String> = l.names().to_vec();
        let pairs: Vec<(String, String)> =
            l.covers().into_iter().map(|(a, b)| (l.name(a).to_string(), l.name(b).to_string())).collect();
        assert_eq!(Lattice::new(&names, &pairs).unwrap(), l);
    }
}
