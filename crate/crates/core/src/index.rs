//! Index-tuple enumeration and antisymmetric component storage.

use crate::field::ScalarField;

/// Strictly increasing `k`-tuples drawn from `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All `k`-tuples over `0..n` (with repetition), lexicographic.
pub fn all_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Sorts `t` ascending and returns the permutation sign, or `None` when an
/// index repeats.
pub fn sort_with_sign(t: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = t.to_vec();
    let mut sign = 1.0;
    // insertion sort keeps the transposition count explicit
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Lexicographic rank of a strictly increasing tuple over `0..n` among
/// all increasing tuples of the same length.
pub fn tuple_rank(n: usize, sorted: &[usize]) -> usize {
    let k = sorted.len();
    let mut r = 0;
    let mut prev = 0;
    for (pos, &i) in sorted.iter().enumerate() {
        for skipped in prev..i {
            r += binomial(n - skipped - 1, k - pos - 1);
        }
        prev = i + 1;
    }
    r
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Components of a totally antisymmetric `k`-index array over `0..n`,
/// stored on strictly increasing tuples.
#[derive(Clone, Debug)]
pub struct Alternating {
    n: usize,
    k: usize,
    comps: Vec<ScalarField>,
}

impl Alternating {
    pub fn zero(n: usize, k: usize) -> Self {
        Alternating {
            n,
            k,
            comps: vec![ScalarField::zero(); binomial(n, k)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn rank(&self, sorted: &[usize]) -> usize {
        tuple_rank(self.n, sorted)
    }

    /// Component on an arbitrary tuple, with antisymmetry applied.
    pub fn get(&self, t: &[usize]) -> ScalarField {
        assert_eq!(t.len(), self.k, "index tuple length");
        assert!(t.iter().all(|&i| i < self.n), "index out of range");
        match sort_with_sign(t) {
            None => ScalarField::zero(),
            Some((s, sign)) => self.comps[self.rank(&s)].scale(sign),
        }
    }

    /// Sets the component on `t`; the increasing representative receives
    /// the sign of the sorting permutation. Repeated indices are rejected.
    pub fn set(&mut self, t: &[usize], f: ScalarField) {
        assert_eq!(t.len(), self.k, "index tuple length");
        let (s, sign) = sort_with_sign(t).expect("repeated index in antisymmetric slot");
        let r = self.rank(&s);
        self.comps[r] = f.scale(sign);
    }

    /// `(increasing tuple, component)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarField)> {
        increasing_tuples(self.n, self.k).into_iter().zip(self.comps.iter())
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Alternating {
            n: self.n,
            k: self.k,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        assert_eq!((self.n, self.k), (other.n, other.k), "shape mismatch");
        Alternating {
            n: self.n,
            k: self.k,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn from_fn(n: usize, k: usize, f: impl Fn(&[usize]) -> ScalarField) -> Self {
        Alternating {
            n,
            k,
            comps: increasing_tuples(n, k).iter().map(|t| f(t)).collect(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.iter().all(ScalarField::is_zero)
    }
}
