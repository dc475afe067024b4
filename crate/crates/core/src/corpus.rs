//! Named small algebras used by tests, acceptance checks and samples.

use crate::algebra::ImplicativeAlgebra;
use crate::error::Result;
use crate::order::{Elem, ElemSet, ImplicativeStructure, Lattice};

fn heyting_chain(names: &[&str], sep: &[&str]) -> ImplicativeAlgebra {
    let s = ImplicativeStructure::derive_heyting(Lattice::chain(names).expect("chain")).expect("chains are Heyting");
    ImplicativeAlgebra::from_names(s, sep).expect("valid separator")
}

/// Two-element Boolean algebra `0 < 1` with separator `{1}`.
pub fn b2() -> ImplicativeAlgebra {
    heyting_chain(&["0", "1"], &["1"])
}

/// Three-element chain `0 < h < 1`, Heyting, separator `{1}`.
pub fn h3() -> ImplicativeAlgebra {
    heyting_chain(&["0", "h", "1"], &["1"])
}

/// The same chain with separator `{h, 1}`.
pub fn h3h() -> ImplicativeAlgebra {
    heyting_chain(&["0", "h", "1"], &["h"])
}

/// Four-element chain `0 < a < b < 1`, separator `{1}`.
pub fn c4() -> ImplicativeAlgebra {
    heyting_chain(&["0", "a", "b", "1"], &["1"])
}

/// Four-element chain with separator `{b, 1}`.
pub fn c4b() -> ImplicativeAlgebra {
    heyting_chain(&["0", "a", "b", "1"], &["b"])
}

pub fn square_lattice() -> Lattice {
    Lattice::new(&["0", "l", "r", "1"], &[("0", "l"), ("0", "r"), ("l", "1"), ("r", "1")]).expect("square")
}

/// The Boolean square `{0, l, r, 1}` with separator `{1}`.
pub fn sq() -> ImplicativeAlgebra {
    let s = ImplicativeStructure::derive_heyting(square_lattice()).expect("Boolean");
    ImplicativeAlgebra::from_names(s, &["1"]).expect("valid separator")
}

/// The Boolean square with the separator generated by `l`.
pub fn sq_l() -> ImplicativeAlgebra {
    let s = ImplicativeStructure::derive_heyting(square_lattice()).expect("Boolean");
    ImplicativeAlgebra::from_names(s, &["l"]).expect("valid separator")
}

/// The five-element diamond, which carries no Heyting implication.
pub fn m3_lattice() -> Lattice {
    Lattice::new(
        &["0", "p", "q", "r", "1"],
        &[("0", "p"), ("0", "q"), ("0", "r"), ("p", "1"), ("q", "1"), ("r", "1")],
    )
    .expect("diamond")
}

/// A non-Heyting implication on the chain `0 < h < 1`, with `0 -> 0 = h`.
///
/// Separator `{h, 1}`; it is not compatible with joins.
pub fn c3x() -> ImplicativeAlgebra {
    let l = Lattice::chain(&["0", "h", "1"]).expect("chain");
    let s = ImplicativeStructure::from_named_rows(l, &[&["h", "h", "1"], &["0", "h", "1"], &["0", "h", "1"]])
        .expect("valid table");
    ImplicativeAlgebra::from_names(s, &["h"]).expect("valid separator")
}

/// Name of a subset of applicative points: `0` for the empty set,
/// otherwise the points joined with `+`.
pub fn subset_name(points: &[&str], s: u64) -> String {
    if s == 0 {
        return "0".into();
    }
    let v: Vec<&str> = (0..points.len()).filter(|i| s >> i & 1 == 1).map(|i| points[i]).collect();
    v.join("+")
}

/// The implicative algebra of subsets of a total applicative structure:
/// `A -> B = { c | c a in B for all a in A }`, separator the nonempty sets.
pub fn powerset_algebra(points: &[&str], app: impl Fn(usize, usize) -> usize) -> Result<ImplicativeAlgebra> {
    let n = points.len();
    let count = 1usize << n;
    let names: Vec<String> = (0..count as u64).map(|s| subset_name(points, s)).collect();
    let lattice = Lattice::from_leq(&names, |i, j| i & !j == 0)?;
    let imp = |a: Elem, b: Elem| {
        let (sa, sb) = (a.index(), b.index());
        let mut out = 0usize;
        for c in 0..n {
            if (0..n).filter(|x| sa >> x & 1 == 1).all(|x| sb >> app(c, x) & 1 == 1) {
                out |= 1 << c;
            }
        }
        Elem(out as u8)
    };
    let s = ImplicativeStructure::new(lattice, imp)?;
    let singletons: ElemSet = (0..n).map(|i| Elem(1 << i)).collect();
    ImplicativeAlgebra::new(s, singletons)
}

/// Subsets of the one-point combinatory algebra, `{0, p}`.
pub fn pca1() -> ImplicativeAlgebra {
    powerset_algebra(&["p"], |_, _| 0).expect("one-point algebra")
}

/// The singletons of a powerset algebra.
pub fn singletons(a: &ImplicativeAlgebra) -> ElemSet {
    a.elems().filter(|e| e.index().count_ones() == 1).collect()
}

/// Every named corpus algebra.
pub fn all() -> Vec<(&'static str, ImplicativeAlgebra)> {
    vec![
        ("B2", b2()),
        ("H3", h3()),
        ("H3h", h3h()),
        ("C4", c4()),
        ("C4b", c4b()),
        ("SQ", sq()),
        ("SQl", sq_l()),
        ("PCA1", pca1()),
        ("C3x", c3x()),
    ]
}
