//! Kronecker block structure: `m1` modules of `m2` nodes each.

use super::MatrixError;

/// The pair `(m1, m2)`: `m1` modules, `m2` nodes per module, flat dimension
/// `m = m1·m2`. Defines the map between block coordinates `(j,k,i,l)` and
/// flat matrix positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KroneckerShape {
    m1: usize,
    m2: usize,
}

impl KroneckerShape {
    pub fn new(m1: usize, m2: usize) -> Result<Self, MatrixError> {
        if m1 == 0 {
            return Err(MatrixError::Empty("m1 must be >= 1"));
        }
        if m2 == 0 {
            return Err(MatrixError::Empty("m2 must be >= 1"));
        }
        Ok(KroneckerShape { m1, m2 })
    }

    #[inline]
    pub fn m1(&self) -> usize {
        self.m1
    }

    #[inline]
    pub fn m2(&self) -> usize {
        self.m2
    }

    /// Flat dimension `m = m1·m2`.
    #[inline]
    pub fn flat_dim(&self) -> usize {
        self.m1 * self.m2
    }

    /// One-based block indexing: module indices `j,k` in `1..=m1` and node
    /// indices `i,l` in `1..=m2` map to the one-based flat position
    /// `((j−1)·m2 + i, (k−1)·m2 + l)`.
    pub fn block_index(
        &self,
        j: usize,
        k: usize,
        i: usize,
        l: usize,
    ) -> Result<(usize, usize), MatrixError> {
        let check = |what: &'static str, v: usize, max: usize| {
            if v < 1 || v > max {
                Err(MatrixError::IndexOutOfRange { what, got: v, max })
            } else {
                Ok(())
            }
        };
        check("j", j, self.m1)?;
        check("k", k, self.m1)?;
        check("i", i, self.m2)?;
        check("l", l, self.m2)?;
        Ok(((j - 1) * self.m2 + i, (k - 1) * self.m2 + l))
    }

    /// Zero-based flat index of node `i0` in module `j0`.
    #[inline]
    pub fn flat0(&self, j0: usize, i0: usize) -> usize {
        debug_assert!(j0 < self.m1 && i0 < self.m2);
        j0 * self.m2 + i0
    }

    /// Inverse of [`flat0`](Self::flat0): `(module, node)` of a zero-based
    /// flat index.
    #[inline]
    pub fn unflat0(&self, a: usize) -> (usize, usize) {
        debug_assert!(a < self.flat_dim());
        (a / self.m2, a % self.m2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn block_index_examples() {
        let s = KroneckerShape::new(2, 2).unwrap();
        assert_eq!(s.block_index(1, 2, 2, 1).unwrap(), (2, 3));
        assert_eq!(s.block_index(1, 1, 1, 1).unwrap(), (1, 1));

        let s = KroneckerShape::new(3, 4).unwrap();
        // direct evaluation: ((2-1)*4+4, (3-1)*4+1)
        assert_eq!(s.block_index(2, 3, 4, 1).unwrap(), (8, 9));
    }

    #[test]
    fn block_index_rejects_out_of_range() {
        let s = KroneckerShape::new(2, 3).unwrap();
        assert!(s.block_index(0, 1, 1, 1).is_err());
        assert!(s.block_index(3, 1, 1, 1).is_err());
        assert!(s.block_index(1, 1, 4, 1).is_err());
        assert!(s.block_index(1, 1, 1, 0).is_err());
    }

    #[test]
    fn block_index_is_a_bijection() {
        for (m1, m2) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            let s = KroneckerShape::new(m1, m2).unwrap();
            let m = s.flat_dim();
            let mut seen = HashSet::new();
            for j in 1..=m1 {
                for k in 1..=m1 {
                    for i in 1..=m2 {
                        for l in 1..=m2 {
                            let (r, c) = s.block_index(j, k, i, l).unwrap();
                            assert!((1..=m).contains(&r) && (1..=m).contains(&c));
                            assert!(seen.insert((r, c)), "collision at {:?}", (j, k, i, l));
                        }
                    }
                }
            }
            assert_eq!(seen.len(), m * m);
        }
    }

    #[test]
    fn flat_roundtrip() {
        let s = KroneckerShape::new(3, 5).unwrap();
        for a in 0..s.flat_dim() {
            let (j, i) = s.unflat0(a);
            assert_eq!(s.flat0(j, i), a);
        }
    }
}
