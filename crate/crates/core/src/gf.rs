//! Prime-field arithmetic and small linear algebra over `F_q^k`.
//!
//! Layer `i` (1-based) is coordinate `i - 1` of a [`CoeffVector`]. The
//! height of a vector is the highest layer with a non-zero coefficient, and
//! [`Subspace`] keeps its basis echelonized on heights, so that vectors of a
//! subspace with height at most `h` are exactly the combinations of basis
//! rows of height at most `h`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    q: u32,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    pub fn new(q: u32) -> Result<Self> {
        if is_prime(q) {
            Ok(Self { q })
        } else {
            Err(Error::NotPrime(q))
        }
    }

    /// The smallest prime field with more than `n` elements.
    pub fn smallest_above(n: usize) -> Self {
        let mut q = (n as u32).saturating_add(1).max(2);
        while !is_prime(q) {
            q += 1;
        }
        Self { q }
    }

    pub fn size(self) -> u32 {
        self.q
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.q as u64) as u32
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.q as u64 - b as u64) % self.q as u64) as u32
    }

    pub fn neg(self, a: u32) -> u32 {
        self.sub(0, a)
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Multiplicative inverse; `a` must be non-zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.q), "zero has no inverse");
        self.pow(a, self.q as u64 - 2)
    }

    pub fn reduce(self, a: i64) -> u32 {
        a.rem_euclid(self.q as i64) as u32
    }

    pub fn dot(self, a: &CoeffVector, b: &CoeffVector) -> u32 {
        debug_assert_eq!(a.len(), b.len());
        let s = a.0.iter().zip(&b.0).fold(0u64, |acc, (&x, &y)| (acc + x as u64 * y as u64) % self.q as u64);
        s as u32
    }

    /// `a + alpha * b`
    pub fn axpy(self, a: &CoeffVector, alpha: u32, b: &CoeffVector) -> CoeffVector {
        CoeffVector(a.0.iter().zip(&b.0).map(|(&x, &y)| self.add(x, self.mul(alpha, y))).collect())
    }

    pub fn scale(self, alpha: u32, a: &CoeffVector) -> CoeffVector {
        CoeffVector(a.0.iter().map(|&x| self.mul(alpha, x)).collect())
    }

    pub fn vector(self, entries: &[i64]) -> CoeffVector {
        CoeffVector(entries.iter().map(|&x| self.reduce(x)).collect())
    }
}

/// Coefficients of the `k` layers carried on an arc.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffVector(pub Vec<u32>);

impl CoeffVector {
    pub fn zero(k: usize) -> Self {
        Self(vec![0; k])
    }

    /// Unit vector of layer `i` (1-based).
    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![0; k];
        v[i - 1] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Highest layer with a non-zero coefficient, 0 for the zero vector.
    pub fn height(&self) -> usize {
        self.0.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1)
    }

    /// Coefficient of layer `i` (1-based).
    pub fn layer(&self, i: usize) -> u32 {
        self.0[i - 1]
    }
}

impl fmt::Display for CoeffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Free function form of [`CoeffVector::height`].
pub fn height(v: &CoeffVector) -> usize {
    v.height()
}

/// A subspace of `F_q^k` with a canonical basis.
///
/// Rows have pairwise distinct heights, each row's top coefficient is 1 and
/// that coordinate is zero in every other row. Equal subspaces therefore have
/// identical bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    field: Field,
    k: usize,
    // sorted by ascending height
    basis: Vec<CoeffVector>,
}

impl Subspace {
    pub fn zero(field: Field, k: usize) -> Self {
        Self { field, k, basis: Vec::new() }
    }

    pub fn span<'a>(field: Field, k: usize, vectors: impl IntoIterator<Item = &'a CoeffVector>) -> Self {
        let mut sub = Self::zero(field, k);
        for v in vectors {
            sub.insert(v);
        }
        sub
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CoeffVector] {
        &self.basis
    }

    pub fn field(&self) -> Field {
        self.field
    }

    fn reduce(&self, v: &CoeffVector) -> CoeffVector {
        let f = self.field;
        let mut r = v.clone();
        for row in self.basis.iter().rev() {
            let h = row.height();
            let c = r.layer(h);
            if c != 0 {
                r = f.axpy(&r, f.neg(c), row);
            }
        }
        r
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: &CoeffVector) -> bool {
        assert_eq!(v.len(), self.k, "vector length must equal the layer count");
        let f = self.field;
        let r = self.reduce(v);
        let h = r.height();
        if h == 0 {
            return false;
        }
        let r = f.scale(f.inv(r.layer(h)), &r);
        for row in &mut self.basis {
            let c = row.layer(h);
            if c != 0 {
                *row = f.axpy(row, f.neg(c), &r);
            }
        }
        let at = self.basis.partition_point(|row| row.height() < h);
        self.basis.insert(at, r);
        true
    }

    pub fn contains(&self, v: &CoeffVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Largest `i` such that layers `1..=i` all lie in the subspace.
    pub fn decodable_prefix(&self) -> usize {
        // layers 1..=i are contained iff rows of heights 1..=i are exactly e_1..e_i
        let mut i = 0;
        for row in &self.basis {
            if row.height() == i + 1 && row.0.iter().take(i).all(|&x| x == 0) {
                i += 1;
            } else {
                break;
            }
        }
        i
    }

    /// Basis of the vectors in this subspace with height at most `h`.
    pub fn below_height(&self, h: usize) -> Vec<CoeffVector> {
        self.basis.iter().filter(|row| row.height() <= h).cloned().collect()
    }

    /// A non-zero vector supported on layers `1..=h` orthogonal to every
    /// vector of the subspace that is itself supported on layers `1..=h`.
    /// Returns `None` when that part of the subspace is everything.
    pub fn orthogonal_within(&self, h: usize) -> Option<CoeffVector> {
        let rows = self.below_height(h);
        // rows are reduced: pivot coordinates are free of other rows
        let pivots: Vec<usize> = rows.iter().map(|r| r.height()).collect();
        let free = (1..=h).find(|i| !pivots.contains(i))?;
        let f = self.field;
        let mut y = CoeffVector::unit(self.k, free);
        for row in &rows {
            // row . y = row[free] + row[pivot] * y[pivot], and row[pivot] = 1
            let p = row.height();
            y.0[p - 1] = f.neg(row.layer(free));
        }
        Some(y)
    }
}

/// Control vectors of a basis `v_1..v_n` of the first `n` layers: `y_j` is
/// supported on the first `n` layers, `v_j . y_j = 1` and `v_i . y_j = 0`
/// for `i != j`.
pub fn control_vectors(basis: &[CoeffVector], field: Field) -> Result<Vec<CoeffVector>> {
    let n = basis.len();
    let Some(k) = basis.first().map(|v| v.len()) else {
        return Ok(Vec::new());
    };
    if n > k || basis.iter().any(|v| v.len() != k || v.height() > n) {
        return Err(Error::NotABasis);
    }
    let f = field;
    // Gauss-Jordan on [V | I] where V is the leading n x n block
    let mut m: Vec<Vec<u32>> = basis
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = v.0[..n].to_vec();
            row.extend((0..n).map(|j| u32::from(i == j)));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != 0).ok_or(Error::NotABasis)?;
        m.swap(col, pivot);
        let inv = f.inv(m[col][col]);
        for x in &mut m[col] {
            *x = f.mul(*x, inv);
        }
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let c = m[r][col];
                for j in 0..2 * n {
                    let sub = f.mul(c, m[col][j]);
                    m[r][j] = f.sub(m[r][j], sub);
                }
            }
        }
    }
    // V * W = I, so column j of W = V^{-1} is y_j
    Ok((0..n)
        .map(|j| {
            let mut y = vec![0; k];
            for (i, slot) in y.iter_mut().enumerate().take(n) {
                *slot = m[i][n + j];
            }
            CoeffVector(y)
        })
        .collect())
}

/// One step of the incremental combination procedure, on scalar products.
///
/// `current[j]` is `b . y_j` for the pairs handled so far (all non-zero),
/// `column[j]` is `x_new . y_j`, `pending` is `b . y_new` and `diagonal` is
/// `x_new . y_new` (non-zero). Returns `(beta, alpha)` such that
/// `beta * b + alpha * x_new` has non-zero product with every `y`, trying
/// `beta = 1` with the smallest `alpha` first and `x_new` alone last.
pub fn combination_step(
    field: Field,
    current: &[u32],
    column: &[u32],
    pending: u32,
    diagonal: u32,
) -> Option<(u32, u32)> {
    if pending != 0 {
        return Some((1, 0));
    }
    let f = field;
    let ok = |beta: u32, alpha: u32| {
        f.add(f.mul(beta, pending), f.mul(alpha, diagonal)) != 0
            && current.iter().zip(column).all(|(&c, &x)| f.add(f.mul(beta, c), f.mul(alpha, x)) != 0)
    };
    (1..f.size()).map(|alpha| (1, alpha)).chain([(0, 1)]).find(|&(b, a)| ok(b, a))
}

/// A combination `b` of the `x_i` with `b . y_i != 0` for every pair.
///
/// Requires `x_i . y_i != 0` and at most `q` pairs.
pub fn coding_lemma_combine(pairs: &[(CoeffVector, CoeffVector)], field: Field) -> Result<CoeffVector> {
    let f = field;
    let Some((x0, _)) = pairs.first() else {
        return Err(Error::PreconditionViolated("no pairs given".into()));
    };
    if pairs.len() > f.size() as usize {
        return Err(Error::PreconditionViolated(format!(
            "{} pairs exceed the field size {}",
            pairs.len(),
            f.size()
        )));
    }
    if let Some(i) = pairs.iter().position(|(x, y)| f.dot(x, y) == 0) {
        return Err(Error::PreconditionViolated(format!("pair {i} has x . y = 0")));
    }
    let mut b = x0.clone();
    let mut products = vec![f.dot(&b, &pairs[0].1)];
    for (x, y) in &pairs[1..] {
        let column: Vec<u32> = pairs[..products.len()].iter().map(|(_, yj)| f.dot(x, yj)).collect();
        let pending = f.dot(&b, y);
        let (beta, alpha) = combination_step(f, &products, &column, pending, f.dot(x, y))
            .expect("a working coefficient exists while the pair count is at most q");
        if (beta, alpha) != (1, 0) {
            b = f.axpy(&f.scale(beta, &b), alpha, x);
            for (p, c) in products.iter_mut().zip(&column) {
                *p = f.add(f.mul(beta, *p), f.mul(alpha, *c));
            }
        }
        products.push(f.dot(&b, y));
    }
    Ok(b)
}
