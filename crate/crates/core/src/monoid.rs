//! Finite recognizing monoids for regular constraints.
//!
//! Constraint values are Boolean matrices (transition monoids of constraint
//! NFAs), lifted so that the involution and the `G`-action exist:
//!
//! * `N × N^T` supplies the involution: elements are pairs `(p, q^T)` realized
//!   as block matrices `diag(p, q^T)`, with `inv(p, q^T) = (q, p^T)`.
//! * `N^G` supplies the action: `|G|`-tuples with pointwise multiplication,
//!   `f · (n_g)_g = (n_{gf})_g`.
//!
//! A fresh absorbing zero and a fresh neutral unit are kept outside the matrix
//! representation, so `mu(w) = 1` can only hold for `w = 1` and markers can be
//! sent to zero. The monoid is never enumerated; products are computed lazily.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, GroupElem, GroupSpec, Letter};

/// Dense Boolean matrix, rows as bit sets. Dimension is capped well below 64.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoolMat {
    pub n: usize,
    pub rows: Vec<u64>,
}

impl fmt::Debug for BoolMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            for c in 0..self.n {
                write!(f, "{}", if self.get(r, c) { '1' } else { '0' })?;
            }
            if r + 1 < self.n {
                write!(f, "/")?;
            }
        }
        Ok(())
    }
}

impl BoolMat {
    pub fn zero(n: usize) -> Self {
        BoolMat {
            n,
            rows: vec![0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.rows[i] |= 1 << i;
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r] >> c & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize) {
        self.rows[r] |= 1 << c;
    }

    pub fn mul(&self, other: &BoolMat) -> BoolMat {
        debug_assert_eq!(self.n, other.n);
        let mut out = BoolMat::zero(self.n);
        for r in 0..self.n {
            let mut acc = 0u64;
            let mut row = self.rows[r];
            while row != 0 {
                let k = row.trailing_zeros() as usize;
                row &= row - 1;
                acc |= other.rows[k];
            }
            out.rows[r] = acc;
        }
        out
    }

    pub fn transpose(&self) -> BoolMat {
        let mut out = BoolMat::zero(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                if self.get(r, c) {
                    out.set(c, r);
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }
}

/// A constraint-monoid element.
///
/// `One`/`Zero` are the adjoined fresh unit and zero: self-involuting, fixed by
/// `G`, neutral/absorbing. `Pair` lives in `N × N^T`, `Tuple` in `M^G`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Elem {
    One,
    Zero,
    Mat(Arc<BoolMat>),
    Pair(Arc<(Elem, Elem)>),
    Tuple(Arc<Vec<Elem>>),
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::One => write!(f, "1"),
            Elem::Zero => write!(f, "0"),
            Elem::Mat(m) => write!(f, "[{:?}]", m),
            Elem::Pair(p) => write!(f, "({:?},{:?}^T)", p.0, p.1),
            Elem::Tuple(t) => {
                write!(f, "<")?;
                for (i, e) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{:?}", e)?;
                }
                write!(f, ">")
            }
        }
    }
}

impl Elem {
    pub fn mat(m: BoolMat) -> Elem {
        Elem::Mat(Arc::new(m))
    }

    pub fn pair(p: Elem, q: Elem) -> Elem {
        Elem::Pair(Arc::new((p, q)))
    }

    pub fn tuple(es: Vec<Elem>) -> Elem {
        Elem::Tuple(Arc::new(es))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Elem::Zero)
    }

    /// Realizes the element as one Boolean matrix: pairs become
    /// `diag(p, q^T)`, tuples become block diagonals over `G` in element
    /// order. Used for display and for the block-form law tests.
    pub fn realize(&self, dim_hint: usize) -> BoolMat {
        match self {
            Elem::One => BoolMat::identity(dim_hint),
            Elem::Zero => BoolMat::zero(dim_hint),
            Elem::Mat(m) => (**m).clone(),
            Elem::Pair(p) => {
                let a = p.0.realize(dim_hint / 2);
                let b = p.1.realize(dim_hint / 2).transpose();
                let n = a.n + b.n;
                let mut out = BoolMat::zero(n);
                for r in 0..a.n {
                    out.rows[r] = a.rows[r];
                }
                for r in 0..b.n {
                    out.rows[a.n + r] = b.rows[r] << a.n;
                }
                out
            }
            Elem::Tuple(t) => {
                let per = dim_hint / t.len().max(1);
                let blocks: Vec<BoolMat> = t.iter().map(|e| e.realize(per)).collect();
                let n: usize = blocks.iter().map(|b| b.n).sum();
                let mut out = BoolMat::zero(n);
                let mut off = 0;
                for b in &blocks {
                    for r in 0..b.n {
                        out.rows[off + r] = b.rows[r] << off;
                    }
                    off += b.n;
                }
                out
            }
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MonoidError {
    #[error("matrix dimension {0} exceeds the configured cap {1}")]
    DimCap(usize, usize),
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no constraint value assigned to {0}")]
    Unassigned(String),
    #[error("action by a nontrivial group element on an unlifted element")]
    UnliftedAction,
}

/// Describes the monoid constraint values live in. Elements are never
/// enumerated; this carries the shape (for validation and realization) and a
/// memo table for products.
#[derive(Debug)]
pub struct ConstraintMonoid {
    /// Dimension of the raw transition matrices (1 for the trivial monoid).
    pub raw_dim: usize,
    /// `|G|` of the action lift (1 when unlifted).
    pub tuple_len: usize,
    memo: std::sync::Mutex<HashMap<(Elem, Elem), Elem>>,
}

impl ConstraintMonoid {
    pub fn new(raw_dim: usize, tuple_len: usize, cap: usize) -> Result<Arc<Self>, MonoidError> {
        if raw_dim > cap {
            return Err(MonoidError::DimCap(raw_dim, cap));
        }
        Ok(Arc::new(ConstraintMonoid {
            raw_dim,
            tuple_len,
            memo: std::sync::Mutex::new(HashMap::new()),
        }))
    }

    /// The trivial monoid: only `One`, `Zero` and the 1x1 matrices.
    pub fn trivial() -> Arc<Self> {
        Self::new(1, 1, 16).unwrap()
    }

    /// Realized block dimension of a fully lifted element.
    pub fn realized_dim(&self) -> usize {
        2 * self.raw_dim * self.tuple_len
    }

    pub fn unit(&self) -> Elem {
        Elem::One
    }

    pub fn zero(&self) -> Elem {
        Elem::Zero
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::One, x) | (x, Elem::One) => x.clone(),
            (Elem::Zero, _) | (_, Elem::Zero) => Elem::Zero,
            _ => {
                if let Some(hit) = self.memo.lock().unwrap().get(&(a.clone(), b.clone())) {
                    return hit.clone();
                }
                let out = raw_mul(a, b);
                self.memo
                    .lock()
                    .unwrap()
                    .insert((a.clone(), b.clone()), out.clone());
                out
            }
        }
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        match a {
            Elem::One => Elem::One,
            Elem::Zero => Elem::Zero,
            // transposition is a legitimate involution on raw matrices
            Elem::Mat(m) => Elem::mat(m.transpose()),
            Elem::Pair(p) => Elem::pair(p.1.clone(), p.0.clone()),
            Elem::Tuple(t) => Elem::tuple(t.iter().map(|e| self.inv(e)).collect()),
        }
    }

    /// `f · x`. Tuples permute coordinates by `g -> g f`; the fresh unit and
    /// zero are fixed; anything else admits only the identity action.
    pub fn act(&self, group: &GroupSpec, f: GroupElem, a: &Elem) -> Result<Elem, MonoidError> {
        match a {
            Elem::One => Ok(Elem::One),
            Elem::Zero => Ok(Elem::Zero),
            Elem::Tuple(t) => {
                let out = group
                    .elems()
                    .map(|g| t[group.mul(g, f).0 as usize].clone())
                    .collect();
                Ok(Elem::tuple(out))
            }
            _ if f == group.id() => Ok(a.clone()),
            _ => Err(MonoidError::UnliftedAction),
        }
    }
}

fn raw_mul(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::One, x) | (x, Elem::One) => x.clone(),
        (Elem::Zero, _) | (_, Elem::Zero) => Elem::Zero,
        (Elem::Mat(x), Elem::Mat(y)) => {
            let m = x.mul(y);
            if m.is_zero() {
                // zero matrix stays a matrix: it is not the adjoined Zero
                Elem::mat(m)
            } else {
                Elem::mat(m)
            }
        }
        (Elem::Pair(x), Elem::Pair(y)) => {
            // (x1, y1^T)(x2, y2^T) = (x1 x2, (y2 y1)^T)
            Elem::pair(raw_mul(&x.0, &y.0), raw_mul(&y.1, &x.1))
        }
        (Elem::Tuple(x), Elem::Tuple(y)) => {
            debug_assert_eq!(x.len(), y.len());
            Elem::tuple(
                x.iter()
                    .zip(y.iter())
                    .map(|(p, q)| raw_mul(p, q))
                    .collect(),
            )
        }
        _ => panic!("constraint elements of incompatible shapes: {:?} * {:?}", a, b),
    }
}

/// A tiny NFA over letters, used to specify regular constraints.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintNfa {
    pub states: usize,
    pub edges: Vec<(usize, Letter, usize)>,
}

/// Adjacency matrices of a constraint NFA: `M_a[i][j] = 1` iff `i --a--> j`.
/// The assignment extends to a morphism by matrix product.
pub fn transition_monoid(nfa: &ConstraintNfa) -> Result<HashMap<Letter, BoolMat>, MonoidError> {
    if nfa.edges.is_empty() && nfa.states == 0 {
        return Err(MonoidError::EmptyAlphabet);
    }
    let mut out: HashMap<Letter, BoolMat> = HashMap::new();
    for &(src, a, dst) in &nfa.edges {
        if src >= nfa.states || dst >= nfa.states {
            return Err(MonoidError::Shape(format!(
                "edge ({src},{dst}) out of range for {} states",
                nfa.states
            )));
        }
        out.entry(a)
            .or_insert_with(|| BoolMat::zero(nfa.states))
            .set(src, dst);
    }
    Ok(out)
}

/// Lift of a plain element into `N × N^T`: `iota(x) = (x, 1)`.
pub fn lift_involution(x: &Elem) -> Elem {
    Elem::pair(x.clone(), Elem::One)
}

/// Unique lift of `rho` respecting the involution: `rho_hat(a) = (rho(a), rho(abar)^T)`.
pub fn lift_involution_hom(rho_a: &Elem, rho_abar: &Elem) -> Elem {
    Elem::pair(rho_a.clone(), rho_abar.clone())
}

/// Projection onto the first component; `project_involution(lift_involution(x)) = x`.
pub fn project_involution(x: &Elem) -> Option<Elem> {
    match x {
        Elem::Pair(p) => Some(p.0.clone()),
        _ => None,
    }
}

/// Constant-tuple embedding into `M^G`.
pub fn lift_action(group: &GroupSpec, x: &Elem) -> Elem {
    Elem::tuple(group.elems().map(|_| x.clone()).collect())
}

/// Lift of a morphism value: `h_hat(x) = (h(g x))_g`, here given the already
/// computed images of the orbit `g -> h(g x)`.
pub fn lift_action_hom(images_by_g: Vec<Elem>) -> Elem {
    Elem::tuple(images_by_g)
}

/// First-coordinate projection; `project_action(lift_action(g, x)) = x`.
pub fn project_action(group: &GroupSpec, x: &Elem) -> Option<Elem> {
    match x {
        Elem::Tuple(t) => t.get(group.id().0 as usize).cloned(),
        _ => None,
    }
}

/// Constraint values for letters and variables, with the target monoid.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub monoid: Arc<ConstraintMonoid>,
    pub letter_mu: Vec<Elem>,
    pub var_mu: Vec<Elem>,
}

impl Morphism {
    pub fn trivial() -> Morphism {
        Morphism {
            monoid: ConstraintMonoid::trivial(),
            letter_mu: Vec::new(),
            var_mu: Vec::new(),
        }
    }

    pub fn letter(&self, a: Letter) -> &Elem {
        &self.letter_mu[a.0 as usize]
    }

    pub fn var(&self, v: usize) -> &Elem {
        &self.var_mu[v]
    }

    /// Product of letter images over a constant word.
    pub fn eval_word(&self, w: &[Letter]) -> Elem {
        let mut acc = self.monoid.unit();
        for &a in w {
            acc = self.monoid.mul(&acc, self.letter(a));
        }
        acc
    }

    /// Checks `mu(abar) = inv mu(a)` and `mu(f(a)) = f mu(a)` on all letters,
    /// plus the same involution law on variables.
    pub fn validate(
        &self,
        group: &GroupSpec,
        alphabet: &Alphabet,
        var_bar: &[usize],
    ) -> Vec<String> {
        let mut errs = Vec::new();
        for a in alphabet.letters() {
            let ma = self.letter(a);
            if self.letter(alphabet.bar(a)) != &self.monoid.inv(ma) {
                errs.push(format!("mu(bar {}) != inv mu({})", alphabet.name(a), alphabet.name(a)));
            }
            for f in group.elems() {
                match self.monoid.act(group, f, ma) {
                    Ok(fa) => {
                        if self.letter(alphabet.act(f, a)) != &fa {
                            errs.push(format!(
                                "mu({}({})) != {} mu({})",
                                group.name(f),
                                alphabet.name(a),
                                group.name(f),
                                alphabet.name(a)
                            ));
                        }
                    }
                    Err(e) => errs.push(format!("{e}")),
                }
            }
        }
        for (v, &vb) in var_bar.iter().enumerate() {
            if v < self.var_mu.len() && vb < self.var_mu.len() {
                if self.var_mu[vb] != self.monoid.inv(&self.var_mu[v]) {
                    errs.push(format!("mu(var bar {v}) != inv mu(var {v})"));
                }
                if self.var_mu[v].is_zero() {
                    errs.push(format!("mu(var {v}) is zero"));
                }
            }
        }
        errs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rand_mat(rng: &mut impl Rng, n: usize) -> BoolMat {
        let mut m = BoolMat::zero(n);
        for r in 0..n {
            for c in 0..n {
                if rng.random_bool(0.4) {
                    m.set(r, c);
                }
            }
        }
        m
    }

    #[test]
    fn transition_monoid_basics() {
        // 1-state NFA with a self-loop on a: M_a = [1]
        let nfa = ConstraintNfa {
            states: 1,
            edges: vec![(0, Letter(0), 0)],
        };
        let m = transition_monoid(&nfa).unwrap();
        assert_eq!(m[&Letter(0)], BoolMat::identity(1));

        // 2-state chain p -> q on a: M_a = [[0,1],[0,0]]; M_a^2 = 0
        let nfa = ConstraintNfa {
            states: 2,
            edges: vec![(0, Letter(0), 1)],
        };
        let m = transition_monoid(&nfa).unwrap();
        let ma = &m[&Letter(0)];
        assert!(ma.get(0, 1) && !ma.get(0, 0) && !ma.get(1, 0) && !ma.get(1, 1));
        assert!(ma.mul(ma).is_zero());
    }

    #[test]
    fn involution_lift_block_form() {
        // inv(diag(P, Q^T)) = diag(Q, P^T), checked through the realization
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let monoid = ConstraintMonoid::new(3, 1, 16).unwrap();
        for _ in 0..50 {
            let p = Elem::mat(rand_mat(&mut rng, 3));
            let q = Elem::mat(rand_mat(&mut rng, 3));
            let x = Elem::pair(p.clone(), q.clone());
            let inv = monoid.inv(&x);
            let lhs = inv.realize(6);
            let rhs = Elem::pair(q, p).realize(6);
            assert_eq!(lhs, rhs);
        }
        // iota(unit) is fixed by the involution
        let i = lift_involution(&Elem::One);
        assert_eq!(monoid.inv(&i), i);
        assert_eq!(project_involution(&i), Some(Elem::One));
    }

    #[test]
    fn involution_lift_is_antiautomorphism() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let monoid = ConstraintMonoid::new(3, 1, 16).unwrap();
        for d in 1..=3usize {
            for _ in 0..200 {
                let x = Elem::pair(
                    Elem::mat(rand_mat(&mut rng, d)),
                    Elem::mat(rand_mat(&mut rng, d)),
                );
                let y = Elem::pair(
                    Elem::mat(rand_mat(&mut rng, d)),
                    Elem::mat(rand_mat(&mut rng, d)),
                );
                let lhs = monoid.inv(&monoid.mul(&x, &y));
                let rhs = monoid.mul(&monoid.inv(&y), &monoid.inv(&x));
                assert_eq!(lhs, rhs);
                assert_eq!(monoid.inv(&monoid.inv(&x)), x);
            }
        }
    }

    #[test]
    fn action_lift_laws() {
        use crate::alphabet::GroupSpec;
        // G = Z/2
        let g = GroupSpec::from_table(
            vec!["1".into(), "f".into()],
            0,
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        let f = g.by_name("f").unwrap();
        let monoid = ConstraintMonoid::new(2, 2, 16).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        // f swaps the two coordinates
        let n1 = Elem::mat(rand_mat(&mut rng, 2));
        let n2 = Elem::mat(rand_mat(&mut rng, 2));
        let t = Elem::tuple(vec![n1.clone(), n2.clone()]);
        assert_eq!(
            monoid.act(&g, f, &t).unwrap(),
            Elem::tuple(vec![n2, n1])
        );
        // project . embed = id
        let x = Elem::mat(rand_mat(&mut rng, 2));
        let e = lift_action(&g, &x);
        assert_eq!(project_action(&g, &e), Some(x));
        // |G|=1 leaves elements as singleton tuples: embed/project invert
        let t1 = GroupSpec::trivial();
        let y = Elem::mat(rand_mat(&mut rng, 2));
        assert_eq!(project_action(&t1, &lift_action(&t1, &y)), Some(y));
    }

    #[test]
    fn zero_and_unit_laws() {
        let monoid = ConstraintMonoid::trivial();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = Elem::mat(rand_mat(&mut rng, 1));
            assert_eq!(monoid.mul(&Elem::Zero, &x), Elem::Zero);
            assert_eq!(monoid.mul(&x, &Elem::Zero), Elem::Zero);
            assert_eq!(monoid.mul(&Elem::One, &x), x);
            assert_eq!(monoid.mul(&x, &Elem::One), x);
        }
        assert_eq!(monoid.inv(&Elem::Zero), Elem::Zero);
        let g = GroupSpec::trivial();
        assert_eq!(monoid.act(&g, g.id(), &Elem::Zero).unwrap(), Elem::Zero);
        assert_eq!(monoid.inv(&Elem::One), Elem::One);
    }

    #[test]
    fn dim_cap_is_enforced() {
        assert_eq!(
            ConstraintMonoid::new(17, 1, 16).err(),
            Some(MonoidError::DimCap(17, 16))
        );
    }
}
