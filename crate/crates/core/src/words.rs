//! Combinatorics on words: primitivity, periods, delta-periodic
//! classification and factorization, and twisted conjugacy.
//!
//! The periodicity kernel is generic over the symbol type; the twisted
//! conjugacy operations need the alphabet action.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, GroupElem, GroupSpec, Letter};

/// Border array (failure function): `b[i]` = length of the longest proper
/// border of `w[..=i]`.
pub fn border_array<L: Eq>(w: &[L]) -> Vec<usize> {
    let mut b = vec![0usize; w.len()];
    for i in 1..w.len() {
        let mut k = b[i - 1];
        loop {
            if w[i] == w[k] {
                b[i] = k + 1;
                break;
            }
            if k == 0 {
                break;
            }
            k = b[k - 1];
        }
    }
    b
}

/// Least period of a nonempty word.
pub fn min_period<L: Eq>(w: &[L]) -> usize {
    assert!(!w.is_empty(), "min_period of the empty word");
    let b = border_array(w);
    w.len() - b[w.len() - 1]
}

/// All periods of a nonempty word, ascending (the trivial period `|w|`
/// included). Follows the border chain of the failure function.
pub fn periods<L: Eq>(w: &[L]) -> Vec<usize> {
    assert!(!w.is_empty(), "periods of the empty word");
    let b = border_array(w);
    let mut out = Vec::new();
    let mut k = b[w.len() - 1];
    out.push(w.len()); // border 0
    while k > 0 {
        out.push(w.len() - k);
        k = b[k - 1];
    }
    out.sort_unstable();
    out
}

/// `(p, k)` with `w = p^k`, `p` primitive and `k` maximal. Errors on empty
/// input.
pub fn primitive_root<L: Eq + Clone>(w: &[L]) -> Result<(Vec<L>, usize), String> {
    if w.is_empty() {
        return Err("primitive_root of the empty word".into());
    }
    let p = min_period(w);
    if w.len() % p == 0 {
        Ok((w[..p].to_vec(), w.len() / p))
    } else {
        Ok((w.to_vec(), 1))
    }
}

/// A nonempty word is primitive iff it is not a proper power. The empty word
/// is not primitive.
pub fn is_primitive<L: Eq + Clone>(w: &[L]) -> bool {
    match primitive_root(w) {
        Ok((_, k)) => k == 1,
        Err(_) => false,
    }
}

/// Classification of a word against a periodicity bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeriodicClass {
    /// No period `<= delta`.
    Not,
    /// Some period `<= delta`, `|w| < 3 delta`.
    Periodic,
    /// `|w| >= 3 delta`.
    Long,
    /// `|w| >= 10 delta`.
    VeryLong,
}

pub fn classify_delta_periodic<L: Eq>(w: &[L], delta: usize) -> PeriodicClass {
    assert!(delta >= 1);
    if w.is_empty() || min_period(w) > delta {
        return PeriodicClass::Not;
    }
    if w.len() >= 10 * delta {
        PeriodicClass::VeryLong
    } else if w.len() >= 3 * delta {
        PeriodicClass::Long
    } else {
        PeriodicClass::Periodic
    }
}

pub fn is_delta_periodic<L: Eq>(w: &[L], delta: usize) -> bool {
    !w.is_empty() && min_period(w) <= delta
}

/// `w = p^e r` with `p` primitive, `|p| <= delta`, `r` a nonempty prefix of
/// `p`. Unique when `w` is delta-periodic and `|w| >= 2 delta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicFactorization<L> {
    pub p: Vec<L>,
    pub e: usize,
    pub r: Vec<L>,
}

impl<L: Clone> PeriodicFactorization<L> {
    pub fn reconstruct(&self) -> Vec<L> {
        let mut out = Vec::with_capacity(self.e * self.p.len() + self.r.len());
        for _ in 0..self.e {
            out.extend_from_slice(&self.p);
        }
        out.extend_from_slice(&self.r);
        out
    }
}

pub fn unique_periodic_factorization<L: Eq + Clone>(
    w: &[L],
    delta: usize,
) -> Result<PeriodicFactorization<L>, String> {
    if w.len() < 2 * delta {
        return Err(format!("|w| = {} < 2 delta = {}", w.len(), 2 * delta));
    }
    let p = min_period(w);
    if p > delta {
        return Err(format!("least period {} exceeds delta = {}", p, delta));
    }
    let root = w[..p].to_vec();
    debug_assert!(is_primitive(&root));
    let (e, r) = if w.len() % p == 0 {
        (w.len() / p - 1, root.clone())
    } else {
        (w.len() / p, w[w.len() / p * p..].to_vec())
    };
    Ok(PeriodicFactorization { p: root, e, r })
}

/// An occurrence `w[start..end]` (half-open) of a maximal delta-periodic
/// factor, with its factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorOccurrence<L> {
    pub start: usize,
    pub end: usize,
    pub factorization: PeriodicFactorization<L>,
}

/// All occurrences of delta-periodic factors of length `>= min_len` that are
/// not extendable by one letter to either side while staying delta-periodic.
///
/// For each start `i`, `reach(i)` = the largest `j` with `w[i..j]`
/// delta-periodic; `reach` is nondecreasing, and the maximal spans are the
/// `[i, reach(i))` where `reach` strictly increases.
pub fn maximal_delta_periodic_factors<L: Eq + Clone>(
    w: &[L],
    delta: usize,
    min_len: usize,
) -> Vec<FactorOccurrence<L>> {
    let n = w.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let reach = |i: usize| -> usize {
        // largest j such that w[i..j] is delta-periodic
        let mut best = i;
        // incremental border computation over w[i..]
        let mut b: Vec<usize> = Vec::with_capacity(n - i);
        for j in i..n {
            if j == i {
                b.push(0);
            } else {
                let mut k = b[j - i - 1];
                loop {
                    if w[j] == w[i + k] {
                        b.push(k + 1);
                        break;
                    }
                    if k == 0 {
                        b.push(0);
                        break;
                    }
                    k = b[k - 1];
                }
            }
            let len = j - i + 1;
            if len - b[j - i] <= delta {
                best = j + 1;
            }
        }
        best
    };
    let mut prev_reach = 0usize;
    for i in 0..n {
        let r = reach(i);
        if r > i && (i == 0 || r > prev_reach) && r - i >= min_len.max(1) {
            if let Ok(f) = unique_periodic_factorization_any(&w[i..r], delta) {
                out.push(FactorOccurrence {
                    start: i,
                    end: r,
                    factorization: f,
                });
            }
        }
        if r > prev_reach {
            prev_reach = r;
        }
    }
    out
}

/// Like [`unique_periodic_factorization`] but without the `2 delta` length
/// hypothesis (the result may then not be unique in the Lemma sense).
fn unique_periodic_factorization_any<L: Eq + Clone>(
    w: &[L],
    delta: usize,
) -> Result<PeriodicFactorization<L>, String> {
    let p = min_period(w);
    if p > delta {
        return Err("not delta-periodic".into());
    }
    let root = w[..p].to_vec();
    let (e, r) = if w.len() % p == 0 {
        (w.len() / p - 1, root.clone())
    } else {
        (w.len() / p, w[w.len() / p * p..].to_vec())
    };
    Ok(PeriodicFactorization { p: root, e, r })
}

/// The solution word of a twisted conjugacy equation:
/// `z = ((rs) f(rs) ... f^{|G|-1}(rs))^e  f^0(rs) ... f^{j-1}(rs) f^j(r)`.
pub fn twisted_conjugate_generate(
    group: &GroupSpec,
    alphabet: &Alphabet,
    r: &[Letter],
    s: &[Letter],
    e: usize,
    j: usize,
    f: GroupElem,
) -> Result<Vec<Letter>, String> {
    if r.is_empty() {
        return Err("r must be nonempty".into());
    }
    if j >= group.order() {
        return Err(format!("j = {} out of range for |G| = {}", j, group.order()));
    }
    let mut rs = r.to_vec();
    rs.extend_from_slice(s);
    let mut z = Vec::new();
    for _ in 0..e {
        for i in 0..group.order() {
            z.extend(alphabet.act_word(group.pow(f, i), &rs));
        }
    }
    for i in 0..j {
        z.extend(alphabet.act_word(group.pow(f, i), &rs));
    }
    z.extend(alphabet.act_word(group.pow(f, j), r));
    Ok(z)
}

/// Literal check of `z g(y) = h(x) f(z)`.
pub fn twisted_conjugacy_check(
    group: &GroupSpec,
    alphabet: &Alphabet,
    z: &[Letter],
    x: &[Letter],
    y: &[Letter],
    f: GroupElem,
    g: GroupElem,
    h: GroupElem,
) -> bool {
    let mut lhs = z.to_vec();
    lhs.extend(alphabet.act_word(g, y));
    let mut rhs = alphabet.act_word(h, x);
    rhs.extend(alphabet.act_word(f, z));
    lhs == rhs
}

/// Derived helper from the twisted-conjugacy analysis:
/// `y = g^{-1} f^j (s f(r))`. Exposed for tests only.
pub fn twisted_conjugate_partner(
    group: &GroupSpec,
    alphabet: &Alphabet,
    r: &[Letter],
    s: &[Letter],
    j: usize,
    f: GroupElem,
    g: GroupElem,
) -> Vec<Letter> {
    let mut sfr = s.to_vec();
    sfr.extend(alphabet.act_word(f, r));
    let fj = group.pow(f, j);
    alphabet.act_word(group.mul(group.inv(g), fj), &sfr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::GroupSpec;

    fn b(s: &str) -> Vec<u8> {
        s.bytes().collect()
    }

    /// Brute-force period check straight from the definition; the test oracle
    /// guarding the failure-function implementation.
    fn periods_brute(w: &[u8]) -> Vec<usize> {
        (1..=w.len())
            .filter(|&p| (0..w.len().saturating_sub(p)).all(|i| w[i] == w[i + p]))
            .collect()
    }

    #[test]
    fn periods_match_the_running_example() {
        assert_eq!(periods(&b("aabaabaa")), vec![3, 6, 7, 8]);
        assert_eq!(periods(&b("aaaa")), vec![1, 2, 3, 4]);
        assert_eq!(periods(&b("ab")), periods_brute(&b("ab")));
        assert_eq!(periods(&b("ab")), vec![2]);
    }

    proptest::proptest! {
        #[test]
        fn periods_agree_with_brute_force(w in proptest::collection::vec(0u8..3, 1..40)) {
            proptest::prop_assert_eq!(periods(&w), periods_brute(&w));
        }

        #[test]
        fn primitive_root_reconstructs(w in proptest::collection::vec(0u8..3, 1..40)) {
            let (p, k) = primitive_root(&w).unwrap();
            let mut rec = Vec::new();
            for _ in 0..k { rec.extend_from_slice(&p); }
            proptest::prop_assert_eq!(rec, w.clone());
            proptest::prop_assert!(is_primitive(&p));
            // maximality: p is the shortest root
            for d in 1..p.len() {
                if w.len() % d == 0 {
                    let cand = &w[..d];
                    let ok = w.chunks(d).all(|c| c == cand);
                    proptest::prop_assert!(!ok);
                }
            }
        }
    }

    #[test]
    fn primitivity_cases() {
        assert!(is_primitive(&b("aab")));
        assert_eq!(primitive_root(&b("abab")).unwrap(), (b("ab"), 2));
        assert!(is_primitive(&b("a")));
        assert!(!is_primitive::<u8>(&[]));
        assert!(primitive_root::<u8>(&[]).is_err());
    }

    #[test]
    fn classification_thresholds() {
        // min period 2, |w| = 30, delta 3: very long
        let w: Vec<u8> = b("ab").repeat(15);
        assert_eq!(classify_delta_periodic(&w, 3), PeriodicClass::VeryLong);
        assert_eq!(classify_delta_periodic(&b("abcabc"), 1), PeriodicClass::Not);
        let w: Vec<u8> = b("ab").repeat(5);
        assert_eq!(classify_delta_periodic(&w, 2), PeriodicClass::Long);
    }

    /// Brute-force enumeration of all valid (p, e, r) triples; Lemma-style
    /// uniqueness says it is a singleton under the hypotheses.
    fn factorizations_brute(w: &[u8], delta: usize) -> Vec<(Vec<u8>, usize, Vec<u8>)> {
        let mut out = Vec::new();
        for plen in 1..=delta.min(w.len()) {
            let p = &w[..plen];
            if !is_primitive(p) {
                continue;
            }
            for e in 0..=w.len() / plen {
                let rlen = w.len() as i64 - (e * plen) as i64;
                if rlen < 1 || rlen > plen as i64 {
                    continue;
                }
                let mut rec: Vec<u8> = Vec::new();
                for _ in 0..e {
                    rec.extend_from_slice(p);
                }
                rec.extend_from_slice(&p[..rlen as usize]);
                if rec == w {
                    out.push((p.to_vec(), e, p[..rlen as usize].to_vec()));
                }
            }
        }
        out
    }

    #[test]
    fn factorization_examples() {
        // (ab)^3 a, delta 2
        let w = b("abababa");
        let f = unique_periodic_factorization(&w, 2).unwrap();
        assert_eq!((f.p.clone(), f.e, f.r.clone()), (b("ab"), 3, b("a")));
        assert_eq!(f.reconstruct(), w);
        let brute = factorizations_brute(&w, 2);
        assert_eq!(brute.len(), 1);
        assert_eq!(brute[0], (f.p, f.e, f.r));

        // a^5, delta 1
        let f = unique_periodic_factorization(&b("aaaaa"), 1).unwrap();
        assert_eq!((f.p, f.e, f.r), (b("a"), 4, b("a")));

        // |w| < 2 delta is rejected
        assert!(unique_periodic_factorization(&b("ab"), 2).is_err());
    }

    #[test]
    fn factorization_unique_whenever_hypotheses_hold() {
        // exhaustive over binary words |w| <= 12, delta <= 4
        for delta in 1..=4usize {
            for len in (2 * delta).max(1)..=12 {
                for bits in 0u32..1 << len {
                    let w: Vec<u8> = (0..len).map(|i| (bits >> i & 1) as u8).collect();
                    if !is_delta_periodic(&w, delta) {
                        continue;
                    }
                    let brute = factorizations_brute(&w, delta);
                    assert_eq!(brute.len(), 1, "w={w:?} delta={delta}");
                    let f = unique_periodic_factorization(&w, delta).unwrap();
                    assert_eq!(brute[0], (f.p, f.e, f.r));
                }
            }
        }
    }

    /// Definition-level oracle for maximal factors.
    fn maximal_brute(w: &[u8], delta: usize, min_len: usize) -> Vec<(usize, usize)> {
        let ok = |i: usize, j: usize| is_delta_periodic(&w[i..j], delta);
        let mut out = Vec::new();
        for i in 0..w.len() {
            for j in i + 1..=w.len() {
                if j - i >= min_len.max(1)
                    && ok(i, j)
                    && (i == 0 || !ok(i - 1, j))
                    && (j == w.len() || !ok(i, j + 1))
                {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[test]
    fn maximal_factor_edge_cases() {
        assert_eq!(maximal_delta_periodic_factors(&b("abc"), 1, 2), vec![]);
        let runs = maximal_delta_periodic_factors(&b("aaaa"), 1, 1);
        assert_eq!(runs.len(), 1);
        assert_eq!((runs[0].start, runs[0].end), (0, 4));
    }

    proptest::proptest! {
        #[test]
        fn maximal_factors_agree_with_brute(
            w in proptest::collection::vec(0u8..2, 1..28),
            delta in 1usize..4,
            min_len in 1usize..4,
        ) {
            let fast: Vec<(usize, usize)> = maximal_delta_periodic_factors(&w, delta, min_len)
                .into_iter().map(|o| (o.start, o.end)).collect();
            proptest::prop_assert_eq!(fast, maximal_brute(&w, delta, min_len));
        }
    }

    #[test]
    fn appendix_host_factors_at_small_scale() {
        // The popped local-equation host from the delta-periodic compression
        // example, at omega = eta = 16, delta = 3. Expected spans verified by
        // the definition-level oracle.
        let om = 16usize;
        let mut host = Vec::new();
        host.extend(b("bbab"));
        host.extend(b("ba"));
        for _ in 0..om - 1 {
            host.extend(b("bba"));
        }
        for _ in 0..om - 1 {
            host.extend(b("ab"));
        }
        host.extend(b("a"));
        host.extend(b("b"));
        for _ in 0..om {
            host.extend(b("ab"));
        }
        host.extend(b("bb"));
        for _ in 0..om {
            host.extend(b("ab"));
        }
        host.extend(b("aabaa"));
        host.extend(b("b"));
        for _ in 0..om - 1 {
            host.extend(b("aab"));
        }
        host.extend(b("aa"));
        host.extend(b("b"));
        host.extend(b("bba"));

        let fast: Vec<(usize, usize)> = maximal_delta_periodic_factors(&host, 3, 30)
            .into_iter()
            .map(|o| (o.start, o.end))
            .collect();
        let brute = maximal_brute(&host, 3, 30);
        assert_eq!(fast, brute);
        // four very long maximal factors: the (bba)-run, the (ab)-run, the
        // (ba)-run and the run around (aab)^{eta+2}
        assert_eq!(fast.len(), 4);
        let roots: Vec<Vec<u8>> = maximal_delta_periodic_factors(&host, 3, 30)
            .into_iter()
            .map(|o| o.factorization.p)
            .collect();
        assert_eq!(roots[0], b("bba"));
        assert_eq!(roots[1], b("ab"));
        assert_eq!(roots[2], b("ba"));
        assert_eq!(roots[3], b("aba"));
    }

    // ----- twisted conjugacy -----

    fn fixture() -> (GroupSpec, Alphabet) {
        // {a, b} with f swapping them, no bars (identity involution)
        let (spec, perms) = GroupSpec::generate(vec![("f".into(), vec![1, 0])], 2).unwrap();
        let act = perms
            .iter()
            .map(|p| p.iter().map(|&x| Letter(x as u32)).collect())
            .collect();
        let alph = Alphabet::new(
            vec!["a".into(), "b".into()],
            vec![Letter(0), Letter(1)],
            act,
        );
        (spec, alph)
    }

    #[test]
    fn generate_formula_examples() {
        let (g, a) = fixture();
        let f = g.by_name("f").unwrap();
        let la = Letter(0);
        let lb = Letter(1);
        // r = "a", s = "", e = 1, j = 1: ((a)f(a))^1 a = ab a? — |G| = 2:
        // z = (a f(a))^1 * f^0(a) = ab a ... spelled out: a b a? No: e=1 block
        // is (rs) f(rs) = a b, then j=1 adds f^0(rs) = a, then f^1(r) = b.
        let z = twisted_conjugate_generate(&g, &a, &[la], &[], 1, 1, f).unwrap();
        assert_eq!(z, vec![la, lb, la, lb]);
        // cross-check: z really is twisted-conjugate with x = rs and the
        // derived partner y
        let x = vec![la];
        let y = twisted_conjugate_partner(&g, &a, &[la], &[], 1, f, g.id());
        assert!(twisted_conjugacy_check(&g, &a, &z, &x, &y, f, g.id(), g.id()));

        // e = 0, j = 0 gives r itself
        let z = twisted_conjugate_generate(&g, &a, &[la, lb], &[], 0, 0, f).unwrap();
        assert_eq!(z, vec![la, lb]);

        // untwisted case matches the classical z = (rs)^e r
        let z = twisted_conjugate_generate(&g, &a, &[la], &[lb], 2, 0, g.id()).unwrap();
        assert_eq!(z, vec![la, lb, la, lb, la]);

        assert!(twisted_conjugate_generate(&g, &a, &[la], &[], 0, 2, f).is_err());
        assert!(twisted_conjugate_generate(&g, &a, &[], &[la], 0, 0, f).is_err());
    }

    #[test]
    fn classical_conjugacy_check() {
        let (g, a) = fixture();
        let la = Letter(0);
        let lb = Letter(1);
        // z = aba, x = ab, y = ba: zy = xz classically
        assert!(twisted_conjugacy_check(
            &g,
            &a,
            &[la, lb, la],
            &[la, lb],
            &[lb, la],
            g.id(),
            g.id(),
            g.id()
        ));
        // empty z: holds iff g(y) = h(x)
        assert!(!twisted_conjugacy_check(
            &g,
            &a,
            &[],
            &[la],
            &[lb],
            g.id(),
            g.id(),
            g.id()
        ));
        assert!(twisted_conjugacy_check(
            &g,
            &a,
            &[],
            &[la],
            &[la],
            g.id(),
            g.id(),
            g.id()
        ));
    }
}
