use std::collections::HashMap;

use super::Exponent;

/// Monomials of total degree at most `degree` in `dim` variables, listed in
/// graded-lexicographic order. [`MonomialBasis::new`] gives all of them;
/// [`MonomialBasis::subset`] keeps a sub-list in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    dim: usize,
    degree: u32,
    exponents: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: u32) -> Self {
        let mut exponents = Vec::with_capacity(binomial(dim as u64 + degree as u64, degree as u64) as usize);
        for k in 0..=degree {
            let mut buf = vec![0u32; dim];
            compositions(k, 0, &mut buf, &mut exponents);
        }
        let index = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        MonomialBasis {
            dim,
            degree,
            exponents,
            index,
        }
    }

    /// The elements satisfying `keep`, in the same order.
    pub fn subset(&self, keep: impl Fn(&Exponent) -> bool) -> Self {
        let exponents: Vec<Exponent> = self.exponents.iter().filter(|e| keep(e)).cloned().collect();
        let index = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        MonomialBasis {
            dim: self.dim,
            degree: self.degree,
            exponents,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    pub fn get(&self, i: usize) -> &Exponent {
        &self.exponents[i]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Number of basis elements of degree at most `k` (a prefix, by grading).
    pub fn prefix_len(&self, k: u32) -> usize {
        self.exponents.partition_point(|e| e.degree() <= k)
    }

    /// Values of every basis monomial at `point`.
    pub fn eval<T>(&self, point: &[T]) -> Vec<T>
    where
        T: Clone + num_traits::One + std::ops::Mul<Output = T>,
    {
        self.exponents.iter().map(|e| e.eval(point)).collect()
    }
}

fn compositions(remaining: u32, pos: usize, buf: &mut Vec<u32>, out: &mut Vec<Exponent>) {
    let dim = buf.len();
    if dim == 0 {
        if remaining == 0 {
            out.push(Exponent::new(Vec::new()));
        }
        return;
    }
    if pos == dim - 1 {
        buf[pos] = remaining;
        out.push(Exponent::new(buf.clone()));
        buf[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        buf[pos] = a;
        compositions(remaining - a, pos + 1, buf, out);
    }
    buf[pos] = 0;
}

/// `C(n, k)` in u64; callers stay far from overflow at desk scale.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_basis() {
        let b = MonomialBasis::new(1, 2);
        let e: Vec<_> = b.exponents().iter().map(|e| e.entries()[0]).collect();
        assert_eq!(e, vec![0, 1, 2]);
    }

    #[test]
    fn lengths_match_binomials() {
        assert_eq!(MonomialBasis::new(2, 3).len(), 10);
        assert_eq!(MonomialBasis::new(3, 0).len(), 1);
        assert_eq!(MonomialBasis::new(3, 4).len(), binomial(7, 4) as usize);
        assert_eq!(MonomialBasis::new(2, 3).prefix_len(1), 3);
    }

    #[test]
    fn strictly_increasing_with_constant_first() {
        let b = MonomialBasis::new(3, 3);
        assert!(b.get(0).is_zero());
        assert!(b.exponents().windows(2).all(|w| w[0] < w[1]));
        for (i, e) in b.exponents().iter().enumerate() {
            assert_eq!(b.index_of(e), Some(i));
        }
    }
}
