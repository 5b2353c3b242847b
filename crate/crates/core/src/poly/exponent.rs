use std::cmp::Ordering;
use std::fmt;

/// Multi-index `α ∈ ℕ₀^d` identifying the monomial `x^α`.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// vectors compared so that `x₁` precedes `x₂` within a degree
/// (`1, x, y, x², xy, y², …` for two variables).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Exponent(vec![0; dim])
    }

    /// The exponent of the coordinate function `x_j`.
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        Exponent(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.dim(), other.dim());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other` when `other ≤ self` componentwise.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    /// Evaluates `x^α`.
    pub fn eval<T>(&self, point: &[T]) -> T
    where
        T: Clone + num_traits::One + std::ops::Mul<Output = T>,
    {
        let mut acc = T::one();
        for (x, &a) in point.iter().zip(&self.0) {
            for _ in 0..a {
                acc = acc * x.clone();
            }
        }
        acc
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "1");
        }
        let mut first = true;
        for (j, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", j + 1)?;
            if a > 1 {
                write!(f, "^{a}")?;
            }
        }
        Ok(())
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let one = Exponent::new(vec![0, 0]);
        let x = Exponent::new(vec![1, 0]);
        let y = Exponent::new(vec![0, 1]);
        let x2 = Exponent::new(vec![2, 0]);
        let xy = Exponent::new(vec![1, 1]);
        let mut v = vec![xy.clone(), y.clone(), x2.clone(), one.clone(), x.clone()];
        v.sort();
        assert_eq!(v, vec![one, x, y, x2, xy]);
    }

    #[test]
    fn display_and_arithmetic() {
        let a = Exponent::new(vec![2, 0, 1]);
        assert_eq!(a.to_string(), "x1^2*x3");
        assert_eq!(a.degree(), 3);
        let b = Exponent::new(vec![1, 0, 1]);
        assert_eq!(a.checked_sub(&b).unwrap(), Exponent::new(vec![1, 0, 0]));
        assert!(b.checked_sub(&a).is_none());
        assert_eq!(a.eval(&[2.0, 5.0, 3.0]), 12.0);
    }
}
