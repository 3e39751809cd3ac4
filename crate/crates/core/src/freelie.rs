//! Truncated free Lie algebra on weighted letters, in the Lyndon basis with
//! standard bracketing. Coefficients in this basis are integers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::QMatrix;
use crate::nilpotent::NilpotentAlgebra;
use crate::rational::q;
use crate::weight::WeightVector;

type Word = Vec<u8>;
type Assoc = BTreeMap<Word, i64>;

pub struct FreeLie {
    letter_weights: Vec<WeightVector>,
    words: Vec<Word>,
    weights: Vec<WeightVector>,
    expansions: Vec<Assoc>,
    index: BTreeMap<Word, usize>,
    /// Standard factorization `w = uv` as basis indices; `None` for letters.
    factors: Vec<Option<(usize, usize)>>,
    cap: WeightVector,
}

impl FreeLie {
    /// All Lyndon words whose weight is `⪯ cap`, ordered by length then
    /// lexicographically (so letters come first, in order).
    pub fn new(letter_weights: Vec<WeightVector>, cap: WeightVector) -> Self {
        let m = letter_weights.len();
        let max_len = cap.total() as usize;
        let mut words: Vec<Word> = Vec::new();
        if m > 0 {
            for w in duval(m, max_len) {
                let wt = word_weight(&letter_weights, &w, cap.nu());
                if wt.preceq(&cap) {
                    words.push(w);
                }
            }
        }
        words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: BTreeMap<Word, usize> =
            words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let weights = words
            .iter()
            .map(|w| word_weight(&letter_weights, w, cap.nu()))
            .collect();
        let mut factors = Vec::with_capacity(words.len());
        let mut expansions: Vec<Assoc> = Vec::with_capacity(words.len());
        for w in &words {
            if w.len() == 1 {
                factors.push(None);
                let mut e = Assoc::new();
                e.insert(w.clone(), 1);
                expansions.push(e);
                continue;
            }
            let split = (1..w.len())
                .find(|&s| is_lyndon(&w[s..]))
                .expect("a single letter is a Lyndon suffix");
            let (u, v) = (index[&w[..split]], index[&w[split..]]);
            factors.push(Some((u, v)));
            let e = commutator(&expansions[u], &expansions[v]);
            expansions.push(e);
        }
        FreeLie {
            letter_weights,
            words,
            weights,
            expansions,
            index,
            factors,
            cap,
        }
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn weights(&self) -> &[WeightVector] {
        &self.weights
    }

    pub fn word(&self, i: usize) -> &[u8] {
        &self.words[i]
    }

    pub fn factors(&self, i: usize) -> Option<(usize, usize)> {
        self.factors[i]
    }

    pub fn letter_weights(&self) -> &[WeightVector] {
        &self.letter_weights
    }

    /// The truncated free algebra `L(letters) / (weights ⋠ cap)`.
    pub fn algebra(&self) -> NilpotentAlgebra {
        let mut consts = Vec::new();
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                for (k, c) in self.bracket(i, j) {
                    consts.push((i, j, k, q(c)));
                }
            }
        }
        NilpotentAlgebra::from_upper(self.weights.clone(), consts).expect("graded by construction")
    }

    /// `[bᵢ, bⱼ]` in the basis, zero when the weight exceeds the cap.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<(usize, i64)> {
        if !self.weights[i].add(&self.weights[j]).preceq(&self.cap) {
            return Vec::new();
        }
        self.reduce(commutator(&self.expansions[i], &self.expansions[j]))
    }

    /// Expresses a Lie polynomial in the Lyndon basis using `P(w) = w + (larger words)`.
    fn reduce(&self, mut p: Assoc) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        while let Some((w, c)) = p.iter().next().map(|(w, c)| (w.clone(), *c)) {
            let idx = *self
                .index
                .get(&w)
                .expect("leading word of a Lie polynomial is Lyndon");
            for (u, d) in &self.expansions[idx] {
                let e = p.entry(u.clone()).or_insert(0);
                *e -= c * d;
                if *e == 0 {
                    p.remove(u);
                }
            }
            out.push((idx, c));
        }
        out.sort();
        out
    }
}

/// A seeded graded nilpotent algebra: a truncated free algebra on two or
/// three letters (ν ∈ {1, 2}, dimension ≤ 14) in a random basis that is
/// unimodular within each weight space.
pub fn random_graded_algebra(seed: u64) -> NilpotentAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |n: u32| rng.next_u32() % n;
    loop {
        let nu = 1 + pick(2) as usize;
        let letters: Vec<WeightVector> = (0..2 + pick(2))
            .map(|_| loop {
                let w = WeightVector((0..nu).map(|_| pick(2)).collect());
                if !w.is_zero() {
                    break w;
                }
            })
            .collect();
        let top = letters.iter().fold(WeightVector::zero(nu), |a, w| a.join(w));
        let cap = WeightVector(top.0.iter().map(|&e| e + pick(4)).collect());
        let fl = FreeLie::new(letters, cap);
        if fl.dim() > 14 {
            continue;
        }
        let alg = fl.algebra();
        let n = alg.dim();
        // unit lower-triangular times unit upper-triangular inside each weight block
        let mut p = QMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && alg.weight(i) == alg.weight(j) {
                    let mut l = QMatrix::identity(n);
                    l[(i, j)] = q(pick(5) as i64 - 2);
                    p = p.mul(&l);
                }
            }
        }
        return alg.change_basis(&p, alg.weights().to_vec()).expect("invertible");
    }
}

fn word_weight(letters: &[WeightVector], w: &[u8], nu: usize) -> WeightVector {
    w.iter()
        .fold(WeightVector::zero(nu), |acc, &l| acc.add(&letters[l as usize]))
}

fn commutator(a: &Assoc, b: &Assoc) -> Assoc {
    let mut out = Assoc::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut uv = u.clone();
            uv.extend_from_slice(v);
            *out.entry(uv).or_insert(0) += x * y;
            let mut vu = v.clone();
            vu.extend_from_slice(u);
            *out.entry(vu).or_insert(0) -= x * y;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn is_lyndon(w: &[u8]) -> bool {
    (1..w.len()).all(|i| w[i..] > *w)
}

/// Lyndon words over `{0..m}` of length `1..=n` (Duval's generation).
fn duval(m: usize, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut w: Vec<usize> = alloc::vec![0];
    loop {
        out.push(w.iter().map(|&c| c as u8).collect());
        let len = w.len();
        while w.len() < n {
            let c = w[w.len() - len];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == m - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn lyndon_counts() {
        // Witt formula for 2 letters: 2, 1, 2, 3, 6
        let all = duval(2, 5);
        let by_len: Vec<usize> = (1..=5).map(|l| all.iter().filter(|w| w.len() == l).count()).collect();
        assert_eq!(by_len, vec![2, 1, 2, 3, 6]);
    }

    #[test]
    fn free_brackets_are_consistent() {
        let w1 = WeightVector(vec![1]);
        let fl = FreeLie::new(vec![w1.clone(), w1], WeightVector(vec![3]));
        assert_eq!(fl.dim(), 5);
        // [a, b] is the basis word "ab"
        assert_eq!(fl.bracket(0, 1), vec![(2, 1)]);
        assert_eq!(fl.bracket(1, 0), vec![(2, -1)]);
        // basis: a, b, ab, aab = [a,[a,b]], abb = [[a,b],b]
        assert_eq!(fl.bracket(0, 2), vec![(3, 1)]);
        assert_eq!(fl.bracket(1, 2), vec![(4, -1)]);
        // bracket beyond the cap truncates
        assert!(fl.bracket(2, 3).is_empty());
    }
}
