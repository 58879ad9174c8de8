//! Alphabets with involution and finite group actions on letters and words.
//!
//! Letters are interned ids; the involution and the action are explicit tables.
//! Nothing is encoded in names: `f(a) = ā` and `a = ā` are both legal, which
//! rules out any "uppercase means bar" convention.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Index into a [`GroupSpec`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElem(pub u8);

impl fmt::Debug for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// A finite group given by its full multiplication table.
///
/// Groups here are tiny (every fixture has `|G| <= 12`), so table form keeps
/// stabilizer and orbit computations trivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    names: Vec<String>,
    identity: usize,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not total or not square")]
    MalformedTable,
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} is not neutral on both sides")]
    BadIdentity(usize),
    #[error("inverse table wrong at element {0}")]
    BadInverse(usize),
}

impl GroupSpec {
    /// The one-element group.
    pub fn trivial() -> Self {
        GroupSpec {
            names: vec!["1".into()],
            identity: 0,
            mul: vec![vec![0]],
            inv: vec![0],
        }
    }

    /// Builds a group from a raw multiplication table; `names[identity]` is the
    /// neutral element. Validates the axioms.
    pub fn from_table(
        names: Vec<String>,
        identity: usize,
        mul: Vec<Vec<usize>>,
    ) -> Result<Self, GroupError> {
        let n = names.len();
        if mul.len() != n || mul.iter().any(|r| r.len() != n) {
            return Err(GroupError::MalformedTable);
        }
        if mul.iter().flatten().any(|&x| x >= n) {
            return Err(GroupError::MalformedTable);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        for a in 0..n {
            if mul[identity][a] != a || mul[a][identity] != a {
                return Err(GroupError::BadIdentity(a));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| mul[a][b] == identity && mul[b][a] == identity) {
                Some(b) => inv[a] = b,
                None => return Err(GroupError::BadInverse(a)),
            }
        }
        Ok(GroupSpec {
            names,
            identity,
            mul,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn id(&self) -> GroupElem {
        GroupElem(self.identity as u8)
    }

    pub fn mul(&self, a: GroupElem, b: GroupElem) -> GroupElem {
        GroupElem(self.mul[a.0 as usize][b.0 as usize] as u8)
    }

    pub fn inv(&self, a: GroupElem) -> GroupElem {
        GroupElem(self.inv[a.0 as usize] as u8)
    }

    pub fn name(&self, a: GroupElem) -> &str {
        &self.names[a.0 as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<GroupElem> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| GroupElem(i as u8))
    }

    pub fn elems(&self) -> impl Iterator<Item = GroupElem> + '_ {
        (0..self.order()).map(|i| GroupElem(i as u8))
    }

    /// `a^k` for `k >= 0`.
    pub fn pow(&self, a: GroupElem, k: usize) -> GroupElem {
        let mut acc = self.id();
        for _ in 0..k {
            acc = self.mul(acc, a);
        }
        acc
    }

    /// Builds the closure of a set of named letter-permutations under
    /// composition, together with the induced multiplication table. The
    /// identity permutation is added if missing. Composite elements get
    /// concatenated names.
    ///
    /// `gens[i]` acts on letters `0..k` by `gens[i].1[j]`.
    pub fn generate(
        gens: Vec<(String, Vec<usize>)>,
        k: usize,
    ) -> Result<(Self, Vec<Vec<usize>>), GroupError> {
        let id_perm: Vec<usize> = (0..k).collect();
        let mut names: Vec<String> = Vec::new();
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let push = |name: String,
                        perm: Vec<usize>,
                        names: &mut Vec<String>,
                        perms: &mut Vec<Vec<usize>>,
                        index: &mut HashMap<Vec<usize>, usize>| {
            if !index.contains_key(&perm) {
                index.insert(perm.clone(), perms.len());
                names.push(name);
                perms.push(perm);
            }
        };
        push(
            "1".into(),
            id_perm.clone(),
            &mut names,
            &mut perms,
            &mut index,
        );
        for (name, perm) in gens {
            if perm.len() != k || perm.iter().any(|&x| x >= k) {
                return Err(GroupError::MalformedTable);
            }
            push(name, perm, &mut names, &mut perms, &mut index);
        }
        // close under composition
        let mut changed = true;
        while changed {
            changed = false;
            let cur = perms.len();
            for i in 0..cur {
                for j in 0..cur {
                    let comp: Vec<usize> = (0..k).map(|x| perms[i][perms[j][x]]).collect();
                    if !index.contains_key(&comp) {
                        let name = format!("{}{}", names[i], names[j]);
                        index.insert(comp.clone(), perms.len());
                        names.push(name);
                        perms.push(comp);
                        changed = true;
                    }
                    if perms.len() > 64 {
                        return Err(GroupError::MalformedTable);
                    }
                }
            }
        }
        let n = perms.len();
        let mut mul = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                let comp: Vec<usize> = (0..k).map(|x| perms[i][perms[j][x]]).collect();
                mul[i][j] = index[&comp];
            }
        }
        let identity = index[&id_perm];
        let spec = GroupSpec::from_table(names, identity, mul)?;
        Ok((spec, perms))
    }
}

/// Interned letter id. Attributes (bar partner, orbit, constraint value) live
/// in the containing [`Alphabet`] or in the solver's letter universe.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(pub u32);

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

/// An alphabet with involution and a `G`-action, as tables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    bar: Vec<Letter>,
    /// `act[g][letter]`
    act: Vec<Vec<Letter>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("structural: {0}")]
    Structural(String),
    #[error("axiom violated: {0}")]
    Axiom(String),
}

impl Alphabet {
    pub fn new(names: Vec<String>, bar: Vec<Letter>, act: Vec<Vec<Letter>>) -> Self {
        Alphabet { names, bar, act }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| Letter(i as u32))
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.names[a.0 as usize]
    }

    pub fn by_name(&self, name: &str) -> Option<Letter> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Letter(i as u32))
    }

    pub fn bar(&self, a: Letter) -> Letter {
        self.bar[a.0 as usize]
    }

    pub fn act(&self, g: GroupElem, a: Letter) -> Letter {
        self.act[g.0 as usize][a.0 as usize]
    }

    /// Letterwise action on a word. Length preserving.
    pub fn act_word(&self, g: GroupElem, w: &[Letter]) -> Vec<Letter> {
        w.iter().map(|&a| self.act(g, a)).collect()
    }

    /// `w̄`: reverse, then bar letterwise.
    pub fn involute_word(&self, w: &[Letter]) -> Vec<Letter> {
        w.iter().rev().map(|&a| self.bar(a)).collect()
    }

    /// Checks every alphabet/action axiom; returns all violations.
    pub fn validate(&self, group: &GroupSpec) -> Vec<AlphabetError> {
        let mut errs = Vec::new();
        let n = self.len();
        if self.bar.len() != n {
            errs.push(AlphabetError::Structural(format!(
                "bar table has {} entries for {} letters",
                self.bar.len(),
                n
            )));
            return errs;
        }
        if self.act.len() != group.order() || self.act.iter().any(|r| r.len() != n) {
            errs.push(AlphabetError::Structural(
                "action table is not total on G x letters".into(),
            ));
            return errs;
        }
        if self
            .bar
            .iter()
            .chain(self.act.iter().flatten())
            .any(|l| l.0 as usize >= n)
        {
            errs.push(AlphabetError::Structural("table entry out of range".into()));
            return errs;
        }
        for a in self.letters() {
            if self.bar(self.bar(a)) != a {
                errs.push(AlphabetError::Axiom(format!(
                    "bar(bar({})) != {}",
                    self.name(a),
                    self.name(a)
                )));
            }
        }
        for a in self.letters() {
            if self.act(group.id(), a) != a {
                errs.push(AlphabetError::Axiom(format!(
                    "identity does not fix {}",
                    self.name(a)
                )));
            }
            for f in group.elems() {
                if self.act(f, self.bar(a)) != self.bar(self.act(f, a)) {
                    errs.push(AlphabetError::Axiom(format!(
                        "action of {} does not commute with bar at {}",
                        group.name(f),
                        self.name(a)
                    )));
                }
                for g in group.elems() {
                    if self.act(f, self.act(g, a)) != self.act(group.mul(f, g), a) {
                        errs.push(AlphabetError::Axiom(format!(
                            "act({},act({},{})) != act({}*{},{})",
                            group.name(f),
                            group.name(g),
                            self.name(a),
                            group.name(f),
                            group.name(g),
                            self.name(a)
                        )));
                    }
                }
            }
        }
        errs
    }

    /// Letters `a` such that `f(a)` occurs in `w` for some `f`.
    pub fn g_visible(&self, group: &GroupSpec, constants: &[Letter]) -> Vec<Letter> {
        let mut seen = vec![false; self.len()];
        for &c in constants {
            for f in group.elems() {
                seen[self.act(f, c).0 as usize] = true;
            }
        }
        // a is visible iff some f(a) occurs, i.e. a is in the orbit of an occurring letter
        self.letters().filter(|&a| seen[a.0 as usize]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A = {a, abar, b, bbar}, f swapping a<->b, g(a)=abar, g(b)=b.
    /// This is the running alphabet of most fixtures.
    pub fn fixture() -> (GroupSpec, Alphabet) {
        // letters: 0=a 1=abar 2=b 3=bbar
        let f = vec![2usize, 3, 0, 1];
        let g = vec![1usize, 0, 2, 3];
        let (spec, perms) =
            GroupSpec::generate(vec![("f".into(), f), ("g".into(), g)], 4).unwrap();
        let act = perms
            .iter()
            .map(|p| p.iter().map(|&x| Letter(x as u32)).collect())
            .collect();
        let alph = Alphabet::new(
            vec!["a".into(), "~a".into(), "b".into(), "~b".into()],
            vec![Letter(1), Letter(0), Letter(3), Letter(2)],
            act,
        );
        (spec, alph)
    }

    #[test]
    fn fixture_validates() {
        let (g, a) = fixture();
        assert_eq!(a.validate(&g), vec![]);
        // f, g of order 2 generating a dihedral group of order 8
        assert_eq!(g.order(), 8);
    }

    #[test]
    fn identity_alphabet_validates() {
        let g = GroupSpec::trivial();
        let a = Alphabet::new(vec!["a".into()], vec![Letter(0)], vec![vec![Letter(0)]]);
        assert_eq!(a.validate(&g), vec![]);
    }

    #[test]
    fn broken_bar_is_structural_error() {
        let g = GroupSpec::trivial();
        // bar table too short: declared 3 letters, 2 bar entries
        let a = Alphabet {
            names: vec!["a".into(), "~a".into(), "x".into()],
            bar: vec![Letter(1), Letter(0)],
            act: vec![vec![Letter(0), Letter(1), Letter(2)]],
        };
        let errs = a.validate(&g);
        assert!(matches!(errs[0], AlphabetError::Structural(_)));
    }

    #[test]
    fn non_involutive_bar_is_axiom_error() {
        let g = GroupSpec::trivial();
        let a = Alphabet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Letter(1), Letter(2), Letter(0)], // 3-cycle, not an involution
            vec![vec![Letter(0), Letter(1), Letter(2)]],
        );
        let errs = a.validate(&g);
        assert!(errs.iter().any(|e| matches!(e, AlphabetError::Axiom(_))));
    }

    fn w(alph: &Alphabet, s: &[&str]) -> Vec<Letter> {
        s.iter().map(|n| alph.by_name(n).unwrap()).collect()
    }

    #[test]
    fn act_word_swaps_letters() {
        let (g, a) = fixture();
        let f = g.by_name("f").unwrap();
        assert_eq!(a.act_word(f, &w(&a, &["b", "a", "b"])), w(&a, &["a", "b", "a"]));
        assert_eq!(a.act_word(g.id(), &w(&a, &["b", "a", "b"])), w(&a, &["b", "a", "b"]));
        let gg = g.by_name("g").unwrap();
        assert_eq!(a.act_word(gg, &w(&a, &["b", "a", "b"])), w(&a, &["b", "~a", "b"]));
    }

    #[test]
    fn involute_word_reverses_and_bars() {
        let (_, a) = fixture();
        assert_eq!(
            a.involute_word(&w(&a, &["~b", "a", "a", "~b"])),
            w(&a, &["b", "~a", "~a", "b"])
        );
        assert_eq!(a.involute_word(&[]), vec![]);
        // palindrome over self-involuting letters
        let g = GroupSpec::trivial();
        let selfinv = Alphabet::new(
            vec!["a".into(), "b".into()],
            vec![Letter(0), Letter(1)],
            vec![vec![Letter(0), Letter(1)]],
        );
        assert_eq!(selfinv.validate(&g), vec![]);
        let p = vec![Letter(0), Letter(1), Letter(0)];
        assert_eq!(selfinv.involute_word(&p), p);
    }

    #[test]
    fn g_visible_is_orbit_closure() {
        let (g, a) = fixture();
        // W = "b": f(a)=b makes a visible; the G-orbit of b is everything here
        let vis = a.g_visible(&g, &w(&a, &["b"]));
        assert_eq!(vis.len(), 4);
        // no constants: nothing visible
        assert!(a.g_visible(&g, &[]).is_empty());
        // trivial group: only the letter itself
        let t = GroupSpec::trivial();
        let u = Alphabet::new(vec!["a".into()], vec![Letter(0)], vec![vec![Letter(0)]]);
        assert_eq!(u.g_visible(&t, &[Letter(0)]), vec![Letter(0)]);
    }

    proptest::proptest! {
        #[test]
        fn action_laws(seed in 0u64..200, len in 0usize..12) {
            use rand::{Rng, SeedableRng};
            let (g, a) = fixture();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let word: Vec<Letter> = (0..len).map(|_| Letter(rng.random_range(0..4))).collect();
            let f = GroupElem(rng.random_range(0..g.order() as u8));
            let h = GroupElem(rng.random_range(0..g.order() as u8));
            // act(f, act(h, w)) = act(f*h, w)
            proptest::prop_assert_eq!(
                a.act_word(f, &a.act_word(h, &word)),
                a.act_word(g.mul(f, h), &word)
            );
            // involution commutes with the action
            proptest::prop_assert_eq!(
                a.involute_word(&a.act_word(f, &word)),
                a.act_word(f, &a.involute_word(&word))
            );
            proptest::prop_assert_eq!(a.act_word(f, &word).len(), word.len());
            // involution is an involution
            proptest::prop_assert_eq!(a.involute_word(&a.involute_word(&word)), word);
        }
    }
}
