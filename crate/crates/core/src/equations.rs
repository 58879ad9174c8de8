//! Twisted words, equation systems, solutions, the brute-force oracle,
//! triangulation and the initial equation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, GroupElem, GroupSpec, Letter};
use crate::monoid::{ConstraintMonoid, Elem};

/// Interned variable id. `X` and `X̄` are distinct ids linked by `bar`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(pub u32);

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// One symbol of a twisted word: a constant or a twisted variable `(f, X)`.
/// `(1, X)` prints as plain `X`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TSym {
    C(Letter),
    V(GroupElem, Var),
}

impl fmt::Debug for TSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TSym::C(a) => write!(f, "{:?}", a),
            TSym::V(g, x) => write!(f, "({:?},{:?})", g, x),
        }
    }
}

pub type TWord = Vec<TSym>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LetterInfo {
    pub name: String,
    pub bar: Letter,
    /// `act[g]` = image letter under the group element with index `g`.
    pub act: Vec<Letter>,
    pub mu: Elem,
    /// Letter of the input alphabet `A` (markers included).
    pub base: bool,
    pub marker: bool,
    /// Retired fresh letters may be re-allocated with fresh attributes.
    pub retired: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub bar: Var,
    pub mu: Elem,
    /// Variable of the input system (before triangulation).
    pub base: bool,
}

/// The shared letter/variable universe of a system and of every solver state
/// derived from it. Grows monotonically; letters may be retired and reused so
/// that recurring solver situations are concretely identical.
#[derive(Clone, Debug)]
pub struct Universe {
    pub group: Arc<GroupSpec>,
    pub monoid: Arc<ConstraintMonoid>,
    pub letters: Vec<LetterInfo>,
    pub vars: Vec<VarInfo>,
}

impl Universe {
    pub fn new(group: Arc<GroupSpec>, monoid: Arc<ConstraintMonoid>) -> Self {
        Universe {
            group,
            monoid,
            letters: Vec::new(),
            vars: Vec::new(),
        }
    }

    /// Imports a validated base alphabet with constraint values.
    pub fn from_alphabet(
        group: Arc<GroupSpec>,
        monoid: Arc<ConstraintMonoid>,
        alphabet: &Alphabet,
        mu: &[Elem],
    ) -> Self {
        let mut u = Universe::new(group, monoid);
        for a in alphabet.letters() {
            u.letters.push(LetterInfo {
                name: alphabet.name(a).to_string(),
                bar: alphabet.bar(a),
                act: u
                    .group
                    .elems()
                    .map(|g| alphabet.act(g, a))
                    .collect::<Vec<_>>(),
                mu: mu[a.0 as usize].clone(),
                base: true,
                marker: false,
                retired: false,
            });
        }
        u
    }

    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    pub fn name(&self, a: Letter) -> &str {
        &self.letters[a.0 as usize].name
    }

    pub fn bar(&self, a: Letter) -> Letter {
        self.letters[a.0 as usize].bar
    }

    pub fn act(&self, f: GroupElem, a: Letter) -> Letter {
        self.letters[a.0 as usize].act[f.0 as usize]
    }

    pub fn mu_letter(&self, a: Letter) -> &Elem {
        &self.letters[a.0 as usize].mu
    }

    pub fn is_marker(&self, a: Letter) -> bool {
        self.letters[a.0 as usize].marker
    }

    pub fn act_word(&self, f: GroupElem, w: &[Letter]) -> Vec<Letter> {
        w.iter().map(|&a| self.act(f, a)).collect()
    }

    pub fn involute_word(&self, w: &[Letter]) -> Vec<Letter> {
        w.iter().rev().map(|&a| self.bar(a)).collect()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.vars[v.0 as usize].name
    }

    pub fn var_bar(&self, v: Var) -> Var {
        self.vars[v.0 as usize].bar
    }

    pub fn mu_var(&self, v: Var) -> &Elem {
        &self.vars[v.0 as usize].mu
    }

    pub fn set_mu_var(&mut self, v: Var, mu: Elem) {
        let vb = self.var_bar(v);
        let inv = self.monoid.inv(&mu);
        self.vars[v.0 as usize].mu = mu;
        self.vars[vb.0 as usize].mu = inv;
    }

    /// The representative of a bar pair (the smaller id).
    pub fn var_rep(&self, v: Var) -> Var {
        self.var_bar(v).min(v)
    }

    /// Adds a variable pair `X, X̄`; returns `X`. `mu` is the value of `X`.
    pub fn add_var_pair(&mut self, name: &str, mu: Elem, base: bool) -> Var {
        let x = Var(self.vars.len() as u32);
        let xb = Var(self.vars.len() as u32 + 1);
        let mu_inv = self.monoid.inv(&mu);
        self.vars.push(VarInfo {
            name: name.to_string(),
            bar: xb,
            mu,
            base,
        });
        self.vars.push(VarInfo {
            name: format!("~{name}"),
            bar: x,
            mu: mu_inv,
            base,
        });
        x
    }

    /// Adds a base letter pair (or a single self-involuting letter when
    /// `selfbar`), fixed by `G`. Used for markers.
    pub fn add_fixed_letter(&mut self, name: &str, mu: Elem, selfbar: bool, marker: bool) -> Letter {
        let a = Letter(self.letters.len() as u32);
        if selfbar {
            self.letters.push(LetterInfo {
                name: name.to_string(),
                bar: a,
                act: self.group.elems().map(|_| a).collect(),
                mu,
                base: true,
                marker,
                retired: false,
            });
            a
        } else {
            let ab = Letter(self.letters.len() as u32 + 1);
            let mu_inv = self.monoid.inv(&mu);
            self.letters.push(LetterInfo {
                name: name.to_string(),
                bar: ab,
                act: self.group.elems().map(|_| a).collect(),
                mu,
                base: true,
                marker,
                retired: false,
            });
            self.letters.push(LetterInfo {
                name: format!("~{name}"),
                bar: a,
                act: self.group.elems().map(|_| ab).collect(),
                mu: mu_inv,
                base: true,
                marker,
                retired: false,
            });
            a
        }
    }

    /// Applies `f` to a twisted symbol: constants through the letter action,
    /// `f · (g, X) = (f g, X)`.
    pub fn act_sym(&self, f: GroupElem, s: TSym) -> TSym {
        match s {
            TSym::C(a) => TSym::C(self.act(f, a)),
            TSym::V(g, x) => TSym::V(self.group.mul(f, g), x),
        }
    }

    pub fn act_tword(&self, f: GroupElem, w: &[TSym]) -> TWord {
        w.iter().map(|&s| self.act_sym(f, s)).collect()
    }

    /// Involution on twisted words: reverse, bar constants, bar variables.
    pub fn involute_tword(&self, w: &[TSym]) -> TWord {
        w.iter()
            .rev()
            .map(|&s| match s {
                TSym::C(a) => TSym::C(self.bar(a)),
                TSym::V(f, x) => TSym::V(f, self.var_bar(x)),
            })
            .collect()
    }

    /// `mu` of a twisted word: product over symbols, `mu(f, X) = f · mu(X)`.
    pub fn mu_tword(&self, w: &[TSym]) -> Elem {
        let mut acc = self.monoid.unit();
        for s in w {
            let m = match s {
                TSym::C(a) => self.mu_letter(*a).clone(),
                TSym::V(f, x) => self
                    .monoid
                    .act(&self.group, *f, self.mu_var(*x))
                    .expect("variable constraint value must be action-lifted"),
            };
            acc = self.monoid.mul(&acc, &m);
        }
        acc
    }

    pub fn mu_word(&self, w: &[Letter]) -> Elem {
        let mut acc = self.monoid.unit();
        for &a in w {
            acc = self.monoid.mul(&acc, self.mu_letter(a));
        }
        acc
    }

    pub fn display_tword(&self, w: &[TSym]) -> String {
        let mut out = String::new();
        for s in w {
            match s {
                TSym::C(a) => {
                    out.push_str(self.name(*a));
                    out.push(' ');
                }
                TSym::V(f, x) => {
                    if *f == self.group.id() {
                        out.push_str(self.var_name(*x));
                    } else {
                        out.push_str(&format!("({},{})", self.group.name(*f), self.var_name(*x)));
                    }
                    out.push(' ');
                }
            }
        }
        out.trim_end().to_string()
    }

    pub fn display_word(&self, w: &[Letter]) -> String {
        w.iter().map(|&a| self.name(a)).collect::<Vec<_>>().join(" ")
    }

    // ----- fresh letters with orbits (used by compression transitions) -----

    /// Structural key of an orbit block, used to reuse retired letters so that
    /// recurring solver states are concretely identical.
    fn block_key(&self, words: &[Vec<Letter>]) -> String {
        // words are the distinct orbit words in creation order; the key
        // records how G and bar permute them plus their mu values.
        let pos = |u: &Vec<Letter>| words.iter().position(|w| w == u).unwrap();
        let mut key = String::new();
        for w in words {
            for f in self.group.elems() {
                key.push_str(&format!("{},", pos(&self.act_word(f, w))));
            }
            key.push_str(&format!("b{};", pos(&self.involute_word(w))));
            key.push_str(&format!("m{:?};", self.mu_word(w)));
        }
        key
    }

    /// Allocates (or reuses) a block of fresh letters representing the orbit
    /// of `image` under `G` and bar. Returns the letter standing for `image`
    /// itself plus the full map `orbit word index -> letter`.
    ///
    /// The returned letters are not yet bound to `image` anywhere; binding is
    /// the business of the compression arc that requested them.
    pub fn alloc_fresh_block(&mut self, image: &[Letter], avoid: &BTreeSet<Letter>) -> FreshBlock {
        // distinct orbit words, deterministic order: f(w) for f in G order,
        // then f(wbar)
        let mut words: Vec<Vec<Letter>> = Vec::new();
        let wbar = self.involute_word(image);
        for base in [image.to_vec(), wbar] {
            for f in self.group.elems() {
                let u = self.act_word(f, &base);
                if !words.contains(&u) {
                    words.push(u);
                }
            }
        }
        let key = self.block_key(&words);
        // try to reuse a retired block with the same structure
        let reusable = self.find_retired_block(words.len(), &key, avoid);
        let letters: Vec<Letter> = match reusable {
            Some(ls) => ls,
            None => {
                let start = self.letters.len();
                for (i, u) in words.iter().enumerate() {
                    self.letters.push(LetterInfo {
                        name: format!("c{}", start + i),
                        bar: Letter(0),     // fixed below
                        act: vec![],        // fixed below
                        mu: self.mu_word(u),
                        base: false,
                        marker: false,
                        retired: false,
                    });
                }
                (0..words.len())
                    .map(|i| Letter((start + i) as u32))
                    .collect()
            }
        };
        // (re)wire attributes
        let pos = |u: &Vec<Letter>| words.iter().position(|w| w == u).unwrap();
        for (i, u) in words.iter().enumerate() {
            let li = letters[i].0 as usize;
            let bar = letters[pos(&self.involute_word(u))];
            let act: Vec<Letter> = self
                .group
                .elems()
                .map(|f| letters[pos(&self.act_word(f, u))])
                .collect();
            let mu = self.mu_word(u);
            let info = &mut self.letters[li];
            info.bar = bar;
            info.act = act;
            info.mu = mu;
            info.retired = false;
        }
        FreshBlock {
            rep: letters[0],
            letters,
            words,
        }
    }

    fn find_retired_block(
        &mut self,
        len: usize,
        _key: &str,
        avoid: &BTreeSet<Letter>,
    ) -> Option<Vec<Letter>> {
        // Scan for `len` consecutive retired non-base letters not in `avoid`.
        // Attribute equality is re-imposed by the caller, so structural match
        // of the key is not required for soundness, only block length.
        let n = self.letters.len();
        let mut run: Vec<Letter> = Vec::new();
        for i in 0..n {
            let l = Letter(i as u32);
            if !self.letters[i].base && self.letters[i].retired && !avoid.contains(&l) {
                run.push(l);
                if run.len() == len {
                    for &r in &run {
                        self.letters[r.0 as usize].retired = false;
                    }
                    return Some(run);
                }
            } else {
                run.clear();
            }
        }
        None
    }

    /// Marks fresh letters outside `keep` as reusable.
    pub fn retire_unused(&mut self, keep: &BTreeSet<Letter>) {
        for i in 0..self.letters.len() {
            let l = Letter(i as u32);
            if !self.letters[i].base && !keep.contains(&l) {
                self.letters[i].retired = true;
            }
        }
    }
}

/// A fresh orbit block: `letters[i]` stands for `words[i]`, `rep = letters[0]`
/// stands for the requested image.
#[derive(Clone, Debug)]
pub struct FreshBlock {
    pub rep: Letter,
    pub letters: Vec<Letter>,
    pub words: Vec<Vec<Letter>>,
}

// ---------------------------------------------------------------------------
// solutions
// ---------------------------------------------------------------------------

/// A (partial) assignment of constant words to variables. Bar consistency
/// `σ(X̄) = involute(σ(X))` is maintained by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    words: BTreeMap<Var, Vec<Letter>>,
}

impl Solution {
    pub fn new() -> Self {
        Solution::default()
    }

    pub fn get(&self, v: Var) -> Option<&Vec<Letter>> {
        self.words.get(&v)
    }

    pub fn set(&mut self, uni: &Universe, v: Var, w: Vec<Letter>) {
        let wb = uni.involute_word(&w);
        self.words.insert(uni.var_bar(v), wb);
        self.words.insert(v, w);
    }

    pub fn unset(&mut self, uni: &Universe, v: Var) {
        self.words.remove(&uni.var_bar(v));
        self.words.remove(&v);
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.words.keys().copied()
    }
}

/// `σ` applied to a twisted word; every variable must be assigned.
pub fn apply_solution(uni: &Universe, sol: &Solution, w: &[TSym]) -> Result<Vec<Letter>, Var> {
    let mut out = Vec::new();
    for s in w {
        match s {
            TSym::C(a) => out.push(*a),
            TSym::V(f, x) => {
                let word = sol.get(*x).ok_or(*x)?;
                out.extend(uni.act_word(*f, word));
            }
        }
    }
    Ok(out)
}

/// Per-equation report from [`is_solution`].
#[derive(Clone, Debug)]
pub struct EqCheck {
    pub index: usize,
    pub lhs: Vec<Letter>,
    pub rhs: Vec<Letter>,
    pub ok: bool,
}

/// Checks all word equalities and the constraint condition
/// `mu(σ(X)) = mu(X)` for every variable.
pub fn is_solution(system: &System, sol: &Solution) -> (bool, Vec<EqCheck>) {
    let uni = &system.uni;
    let mut ok = !system.unsat_const;
    let mut reports = Vec::new();
    for (i, (u, v)) in system.equations.iter().enumerate() {
        let lhs = apply_solution(uni, sol, u);
        let rhs = apply_solution(uni, sol, v);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                let eq = l == r;
                ok &= eq;
                reports.push(EqCheck {
                    index: i,
                    lhs: l,
                    rhs: r,
                    ok: eq,
                });
            }
            _ => {
                ok = false;
                reports.push(EqCheck {
                    index: i,
                    lhs: vec![],
                    rhs: vec![],
                    ok: false,
                });
            }
        }
    }
    for v in 0..uni.vars.len() {
        let var = Var(v as u32);
        if let Some(w) = sol.get(var) {
            if uni.mu_word(w) != *uni.mu_var(var) {
                ok = false;
            }
        } else {
            ok = false;
        }
    }
    (ok, reports)
}

// ---------------------------------------------------------------------------
// systems
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct System {
    pub uni: Universe,
    pub equations: Vec<(TWord, TWord)>,
    /// One representative per bar pair of the input variables, input order.
    pub original_vars: Vec<Var>,
    /// A constant-only equation failed its consistency check.
    pub unsat_const: bool,
}

impl System {
    /// All variable-pair representatives (input + fresh), ascending.
    pub fn all_var_reps(&self) -> Vec<Var> {
        (0..self.uni.vars.len())
            .map(|i| Var(i as u32))
            .filter(|&v| self.uni.var_rep(v) == v)
            .collect()
    }

    /// `‖S‖ = |G| + |A| + |V| + s + Σ |U_i V_i|`.
    pub fn size(&self) -> usize {
        self.uni.group.order()
            + self.uni.letters.iter().filter(|l| !l.marker).count()
            + self.uni.vars.len()
            + self.equations.len()
            + self
                .equations
                .iter()
                .map(|(u, v)| u.len() + v.len())
                .sum::<usize>()
    }
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle node budget exhausted after {visited} nodes; results are partial")]
    Budget { visited: u64 },
}

/// All solutions with `|σ(X)| <= max_len` for every variable, as tuples over
/// the original variables (one entry per bar-pair representative).
///
/// Enumeration is length-lex per variable with constraint-based pruning:
/// a prefix `u` survives only if some `mu`-value reachable within the
/// remaining length can complete it to the variable's target value.
pub fn oracle_enumerate(
    system: &System,
    max_len: usize,
    node_budget: u64,
) -> Result<BTreeSet<Vec<Vec<Letter>>>, OracleError> {
    let uni = &system.uni;
    let mut out = BTreeSet::new();
    if system.unsat_const {
        return Ok(out);
    }
    let reps: Vec<Var> = system.all_var_reps();
    let letters: Vec<Letter> = (0..uni.letter_count())
        .map(|i| Letter(i as u32))
        .filter(|&l| !uni.is_marker(l))
        .collect();

    // mu values reachable by words of length <= k
    let mut reachable: Vec<BTreeSet<Elem>> = vec![BTreeSet::new()];
    reachable[0].insert(uni.monoid.unit());
    for _ in 0..max_len {
        let prev = reachable.last().unwrap().clone();
        let mut next = prev.clone();
        for e in &prev {
            for &a in &letters {
                next.insert(uni.monoid.mul(e, uni.mu_letter(a)));
            }
        }
        reachable.push(next);
    }

    struct Ctx<'a> {
        system: &'a System,
        letters: Vec<Letter>,
        reps: Vec<Var>,
        max_len: usize,
        budget: u64,
        visited: u64,
        reachable: Vec<BTreeSet<Elem>>,
    }

    fn consistent(system: &System, sol: &Solution, max_len: usize) -> bool {
        let uni = &system.uni;
        for (u, v) in &system.equations {
            let info = |w: &TWord| -> (usize, usize, Vec<Letter>, Vec<Letter>) {
                // (min len, max len, determined prefix, determined suffix)
                let mut lo = 0usize;
                let mut hi = 0usize;
                let mut prefix = Vec::new();
                let mut broken = false;
                for s in w {
                    match s {
                        TSym::C(a) => {
                            lo += 1;
                            hi += 1;
                            if !broken {
                                prefix.push(*a);
                            }
                        }
                        TSym::V(f, x) => match sol.get(*x) {
                            Some(word) => {
                                lo += word.len();
                                hi += word.len();
                                if !broken {
                                    prefix.extend(uni.act_word(*f, word));
                                }
                            }
                            None => {
                                hi += max_len;
                                broken = true;
                            }
                        },
                    }
                }
                let mut suffix = Vec::new();
                let mut sbroken = false;
                for s in w.iter().rev() {
                    match s {
                        TSym::C(a) => {
                            if !sbroken {
                                suffix.push(*a);
                            }
                        }
                        TSym::V(f, x) => match sol.get(*x) {
                            Some(word) => {
                                if !sbroken {
                                    let img = uni.act_word(*f, word);
                                    suffix.extend(img.iter().rev());
                                }
                            }
                            None => sbroken = true,
                        },
                    }
                }
                suffix.reverse();
                (lo, hi, prefix, suffix)
            };
            let (llo, lhi, lp, ls) = info(u);
            let (rlo, rhi, rp, rs) = info(v);
            if lhi < rlo || rhi < llo {
                return false;
            }
            let k = lp.len().min(rp.len());
            if lp[..k] != rp[..k] {
                return false;
            }
            let k = ls.len().min(rs.len());
            if ls[ls.len() - k..] != rs[rs.len() - k..] {
                return false;
            }
        }
        true
    }

    /// Assigns variables forced by equations with one side fully determined
    /// and the other of shape `prefix (f,X) suffix`. Returns false on
    /// contradiction.
    fn propagate(system: &System, sol: &mut Solution) -> bool {
        let uni = &system.uni;
        loop {
            let mut changed = false;
            for (u, v) in &system.equations {
                for (det, open) in [(u, v), (v, u)] {
                    let det_word = match apply_solution(uni, sol, det) {
                        Ok(w) => w,
                        Err(_) => continue,
                    };
                    // decompose `open` as constants + one unassigned var + constants
                    let mut pre = Vec::new();
                    let mut var: Option<(GroupElem, Var)> = None;
                    let mut post = Vec::new();
                    let mut fits = true;
                    for s in open {
                        match s {
                            TSym::C(a) => {
                                if var.is_none() {
                                    pre.push(*a)
                                } else {
                                    post.push(*a)
                                }
                            }
                            TSym::V(f, x) => {
                                if let Some(w) = sol.get(*x) {
                                    let img = uni.act_word(*f, w);
                                    if var.is_none() {
                                        pre.extend(img)
                                    } else {
                                        post.extend(img)
                                    }
                                } else if var.is_none() {
                                    var = Some((*f, *x));
                                } else {
                                    fits = false;
                                    break;
                                }
                            }
                        }
                    }
                    let Some((f, x)) = var else { continue };
                    if !fits {
                        continue;
                    }
                    if det_word.len() < pre.len() + post.len()
                        || det_word[..pre.len()] != pre[..]
                        || det_word[det_word.len() - post.len()..] != post[..]
                    {
                        return false;
                    }
                    let mid = &det_word[pre.len()..det_word.len() - post.len()];
                    let word = uni.act_word(uni.group.inv(f), mid);
                    sol.set(uni, x, word);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(ctx: &mut Ctx, sol: &mut Solution, out: &mut BTreeSet<Vec<Vec<Letter>>>) -> Result<(), OracleError> {
        ctx.visited += 1;
        if ctx.visited > ctx.budget {
            return Err(OracleError::Budget {
                visited: ctx.visited,
            });
        }
        let uni = &ctx.system.uni;
        let next = ctx
            .reps
            .iter()
            .copied()
            .find(|&v| sol.get(v).is_none());
        let Some(v) = next else {
            let (ok, _) = is_solution(ctx.system, sol);
            if ok {
                let tuple: Vec<Vec<Letter>> = ctx
                    .system
                    .original_vars
                    .iter()
                    .map(|&x| sol.get(x).unwrap().clone())
                    .collect();
                out.insert(tuple);
            }
            return Ok(());
        };
        // propagation may have filled v transitively; enumerate candidates
        let target = uni.mu_var(v).clone();
        let mut stack: Vec<Vec<Letter>> = vec![vec![]];
        while let Some(word) = stack.pop() {
            // candidate extension pruning via reachable mu sets
            let prefix_mu = uni.mu_word(&word);
            let rest = ctx.max_len - word.len();
            let completable = ctx.reachable[rest]
                .iter()
                .any(|r| uni.monoid.mul(&prefix_mu, r) == target);
            if completable {
                let mut trial = sol.clone();
                trial.set(uni, v, word.clone());
                if propagate(ctx.system, &mut trial)
                    && trial
                        .vars()
                        .all(|x| trial.get(x).map_or(true, |w| w.len() <= ctx.max_len))
                    && consistent(ctx.system, &trial, ctx.max_len)
                {
                    search(ctx, &mut trial, out)?;
                }
            }
            if word.len() < ctx.max_len {
                // deterministic length-lex order via stack: push in reverse
                for &a in ctx.letters.iter().rev() {
                    let mut w2 = word.clone();
                    w2.push(a);
                    stack.push(w2);
                }
            }
        }
        Ok(())
    }

    let mut ctx = Ctx {
        system,
        letters,
        reps,
        max_len,
        budget: node_budget,
        visited: 0,
        reachable,
    };
    let mut sol = Solution::new();
    if propagate(system, &mut sol) && consistent(system, &sol, max_len) {
        search(&mut ctx, &mut sol, &mut out)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// triangulation
// ---------------------------------------------------------------------------

/// Result of [`triangulate`]: the rewritten system plus the data needed to
/// extend a solution of the original variables to the fresh ones.
#[derive(Clone, Debug)]
pub struct Triangulated {
    pub system: System,
    /// Fresh variables with their defining twisted words, in creation order.
    pub fresh_defs: Vec<(Var, TWord)>,
}

impl Triangulated {
    /// Extends an assignment of the original variables to all variables.
    pub fn extend_solution(&self, sol: &Solution) -> Result<Solution, Var> {
        let uni = &self.system.uni;
        let mut full = sol.clone();
        for (v, def) in &self.fresh_defs {
            let w = apply_solution(uni, &full, def)?;
            full.set(uni, *v, w);
        }
        Ok(full)
    }
}

/// Rewrites every equation so that the left side has at most two symbols (and
/// at most two variables) and the right side is a single symbol with at most
/// one variable, untwisted whenever it is a variable. Constant-only equations
/// are consistency-checked and dropped.
pub fn triangulate(system: &System) -> Triangulated {
    let mut uni = system.uni.clone();
    let mut fresh_defs: Vec<(Var, TWord)> = Vec::new();
    let mut eqs: Vec<(TWord, TWord)> = Vec::new();
    let mut unsat = system.unsat_const;
    let mut fresh_n = 0usize;

    let fold =
        |side: &TWord,
         uni: &mut Universe,
         eqs: &mut Vec<(TWord, TWord)>,
         fresh_defs: &mut Vec<(Var, TWord)>,
         fresh_n: &mut usize|
         -> TSym {
            if side.is_empty() {
                // fresh E with EE = E forces σ(E) = ε
                *fresh_n += 1;
                let e = uni.add_var_pair(&format!("E{fresh_n}"), uni.monoid.unit(), false);
                fresh_defs.push((e, vec![]));
                eqs.push((
                    vec![TSym::V(uni.group.id(), e), TSym::V(uni.group.id(), e)],
                    vec![TSym::V(uni.group.id(), e)],
                ));
                return TSym::V(uni.group.id(), e);
            }
            if side.len() == 1 {
                return side[0];
            }
            let mut acc = side[0];
            for (i, &s) in side.iter().enumerate().skip(1) {
                let def: TWord = vec![acc, s];
                let is_last = i + 1 == side.len();
                let _ = is_last;
                *fresh_n += 1;
                let mu = uni.mu_tword(&def);
                let z = uni.add_var_pair(&format!("Z{fresh_n}"), mu, false);
                fresh_defs.push((z, def.clone()));
                eqs.push((def, vec![TSym::V(uni.group.id(), z)]));
                acc = TSym::V(uni.group.id(), z);
            }
            acc
        };

    for (u, v) in &system.equations {
        // tautology or constant-only handling first
        let const_word = |w: &TWord| -> Option<Vec<Letter>> {
            w.iter()
                .map(|s| match s {
                    TSym::C(a) => Some(*a),
                    _ => None,
                })
                .collect()
        };
        if let (Some(cu), Some(cv)) = (const_word(u), const_word(v)) {
            if cu != cv {
                unsat = true;
            }
            continue;
        }
        if u == v {
            continue;
        }
        // fold the longer side first so that the shorter can target it
        let (long, short) = if u.len() >= v.len() { (u, v) } else { (v, u) };
        if short.len() == 1 {
            if long.len() == 1 {
                eqs.push((vec![long[0]], vec![short[0]]));
            } else if long.len() == 2 {
                eqs.push((long.clone(), vec![short[0]]));
            } else {
                // fold long down to its last pair, then equate to short
                let head: TWord = long[..long.len() - 1].to_vec();
                let t = fold(&head, &mut uni, &mut eqs, &mut fresh_defs, &mut fresh_n);
                eqs.push((vec![t, long[long.len() - 1]], vec![short[0]]));
            }
        } else {
            let t_long = fold(long, &mut uni, &mut eqs, &mut fresh_defs, &mut fresh_n);
            // fold short, targeting t_long at the final step
            let head: TWord = short[..short.len() - 1].to_vec();
            let t = fold(&head, &mut uni, &mut eqs, &mut fresh_defs, &mut fresh_n);
            eqs.push((vec![t, short[short.len() - 1]], vec![t_long]));
        }
    }

    // normalize: right side a variable => untwist it; two-sided single
    // variables oriented with the variable right
    let group = uni.group.clone();
    let eqs = eqs
        .into_iter()
        .map(|(mut l, mut r)| {
            if let [TSym::V(h, z)] = r[..] {
                if h != group.id() {
                    let hinv = group.inv(h);
                    l = uni.act_tword(hinv, &l);
                    r = vec![TSym::V(group.id(), z)];
                }
            }
            (l, r)
        })
        .collect();

    Triangulated {
        system: System {
            uni,
            equations: eqs,
            original_vars: system.original_vars.clone(),
            unsat_const: unsat,
        },
        fresh_defs,
    }
}

/// True if every equation is in the triangulated shape.
pub fn is_triangular(system: &System) -> bool {
    system.equations.iter().all(|(u, v)| {
        let vars = |w: &TWord| w.iter().filter(|s| matches!(s, TSym::V(..))).count();
        vars(u) <= 2 && vars(v) <= 1
    })
}

// ---------------------------------------------------------------------------
// the initial equation
// ---------------------------------------------------------------------------

/// `W_init` together with the bookkeeping the solver needs.
#[derive(Clone, Debug)]
pub struct InitialEquation {
    /// The system with markers adjoined and trivial equations appended.
    pub system: System,
    pub word: TWord,
    /// `n = |W_init|`.
    pub n: usize,
    /// Variable-pair representatives in block order.
    pub block_vars: Vec<Var>,
    pub marker: Letter,
}

/// Builds the initial equation
/// `W_init = #X_1#...#X_k#U# involute(#X_1#...#X_k#V#)` with
/// `U = U_1#..#U_s#Ū_1#..#Ū_s` and `V` alike, after adjoining marker letters
/// with `mu = 0` and one trivial equation `a = a` per base letter pair.
pub fn build_initial(tri: &Triangulated) -> Result<InitialEquation, String> {
    if !is_triangular(&tri.system) {
        return Err("system is not triangulated".into());
    }
    let mut system = tri.system.clone();
    let uni = &mut system.uni;
    if uni.letters.iter().any(|l| l.name == "#") {
        return Err("marker letter id collision".into());
    }
    let marker = uni.add_fixed_letter("#", Elem::Zero, false, true);

    // trivial equations keep base letters visible
    let base_reps: Vec<Letter> = (0..uni.letter_count())
        .map(|i| Letter(i as u32))
        .filter(|&l| {
            let info = &uni.letters[l.0 as usize];
            info.base && !info.marker && uni.bar(l).0 >= l.0
        })
        .collect();
    for a in base_reps {
        system.equations.push((vec![TSym::C(a)], vec![TSym::C(a)]));
    }

    let uni = &system.uni;
    let id = uni.group.id();
    let block_vars: Vec<Var> = (0..uni.vars.len())
        .map(|i| Var(i as u32))
        .filter(|&v| uni.var_rep(v) == v)
        .collect();

    let hash = TSym::C(marker);
    let half = |side: fn(&(TWord, TWord)) -> &TWord| -> TWord {
        let mut w: TWord = vec![hash];
        for &v in &block_vars {
            w.push(TSym::V(id, v));
            w.push(hash);
        }
        for eq in &system.equations {
            w.extend_from_slice(side(eq));
            w.push(hash);
        }
        for eq in &system.equations {
            w.extend(uni.involute_tword(side(eq)));
            w.push(hash);
        }
        w
    };
    let first = half(|e| &e.0);
    let second = half(|e| &e.1);
    let mut word = first;
    word.extend(uni.involute_tword(&second));
    let n = word.len();
    Ok(InitialEquation {
        word,
        n,
        block_vars,
        marker,
        system,
    })
}

// ---------------------------------------------------------------------------

/// Convenience: `σ(W) = σ(W̄)` check used by the initial-equation tests.
pub fn sigma_palindrome(uni: &Universe, sol: &Solution, w: &[TSym]) -> Result<bool, Var> {
    let img = apply_solution(uni, sol, w)?;
    Ok(img == uni.involute_word(&img))
}
