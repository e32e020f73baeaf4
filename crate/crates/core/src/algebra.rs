//! Finite-dimensional von Neumann algebras and their elements.
//!
//! An algebra is a finite direct sum of full matrix algebras, stored as the
//! ordered list of block sizes `[n_1, …, n_K]`. The order is significant:
//! every multiplicity matrix downstream indexes blocks by this order.
//! Elements are tuples of complex matrices, one per block, and all
//! operations act blockwise.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    blocks: Vec<usize>,
}

impl Algebra {
    /// Builds the algebra `⊕_k M_{n_k}` from its block sizes.
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("algebra needs at least one block".into()));
        }
        if blocks.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput("algebra block sizes must be positive".into()));
        }
        Ok(Algebra { blocks })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Linear dimension `Σ n_k²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// The block/row/column triples `(k, p, q)` indexing the matrix-unit
    /// basis, in the normative order: blocks ascending, rows major.
    pub fn unit_indices(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for (k, &n) in self.blocks.iter().enumerate() {
            for p in 0..n {
                for q in 0..n {
                    out.push((k, p, q));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    parent: Algebra,
    data: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn new(parent: Algebra, data: Vec<CMatrix>) -> Result<Self> {
        if data.len() != parent.block_count() {
            return Err(Error::InvalidInput(format!(
                "element has {} blocks, algebra has {}",
                data.len(),
                parent.block_count()
            )));
        }
        for (k, (m, &n)) in data.iter().zip(parent.blocks()).enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "block {k} has shape {}×{}, expected {n}×{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(AlgebraElement { parent, data })
    }

    pub fn zero(parent: &Algebra) -> Self {
        let data = parent.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        AlgebraElement {
            parent: parent.clone(),
            data,
        }
    }

    /// The unit: the identity matrix in every block.
    pub fn unit(parent: &Algebra) -> Self {
        let data = parent.blocks().iter().map(|&n| CMatrix::identity(n, n)).collect();
        AlgebraElement {
            parent: parent.clone(),
            data,
        }
    }

    /// The matrix unit `E^{(k)}_{pq}`.
    pub fn matrix_unit(parent: &Algebra, k: usize, p: usize, q: usize) -> Result<Self> {
        let n = *parent
            .blocks()
            .get(k)
            .ok_or_else(|| Error::InvalidInput(format!("block index {k} out of range")))?;
        if p >= n || q >= n {
            return Err(Error::InvalidInput(format!("unit ({p},{q}) out of range for block size {n}")));
        }
        let mut e = Self::zero(parent);
        e.data[k][(p, q)] = Complex64::new(1.0, 0.0);
        Ok(e)
    }

    pub fn parent(&self) -> &Algebra {
        &self.parent
    }

    pub fn data(&self) -> &[CMatrix] {
        &self.data
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.data[k]
    }

    fn check_parent(&self, other: &Self) -> Result<()> {
        if self.parent != other.parent {
            return Err(Error::InvalidInput("elements of different algebras".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_parent(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(AlgebraElement {
            parent: self.parent.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_parent(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(AlgebraElement {
            parent: self.parent.clone(),
            data,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        AlgebraElement {
            parent: self.parent.clone(),
            data: self.data.iter().map(|m| m * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_parent(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(AlgebraElement {
            parent: self.parent.clone(),
            data,
        })
    }

    pub fn adjoint(&self) -> Self {
        AlgebraElement {
            parent: self.parent.clone(),
            data: self.data.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(linalg::opnorm).fold(0.0, f64::max)
    }

    /// Sum of the diagonal entries over all blocks (the unnormalized trace).
    pub fn trace(&self) -> Complex64 {
        self.data.iter().map(|m| m.diagonal().iter().sum::<Complex64>()).sum()
    }

    pub fn fro_dist(&self, other: &Self) -> Result<f64> {
        self.check_parent(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| linalg::fro_dist(a, b))
            .fold(0.0, f64::max))
    }

    /// Positivity test: every block Hermitian within `tol` and with minimum
    /// eigenvalue above `−tol · (block norm + 1)`. The scaling keeps the
    /// verdict invariant under rescaling of the element.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.data.iter().all(|m| {
            if !linalg::is_hermitian(m, tol) {
                return false;
            }
            linalg::min_eigenvalue(m) >= -tol * (linalg::opnorm(m) + 1.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_element(alg: &Algebra, seed: u64) -> AlgebraElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = alg
            .blocks()
            .iter()
            .map(|&n| CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        AlgebraElement::new(alg.clone(), data).unwrap()
    }

    #[test]
    fn constructor_validates_blocks() {
        assert!(Algebra::new(vec![]).is_err());
        assert!(Algebra::new(vec![1, 0]).is_err());
        assert_eq!(Algebra::new(vec![1]).unwrap().dim(), 1);
        assert_eq!(Algebra::new(vec![2]).unwrap().dim(), 4);
        assert_eq!(Algebra::new(vec![1, 2]).unwrap().dim(), 5);
    }

    #[test]
    fn unit_blocks_are_identities() {
        let a = Algebra::new(vec![1, 2]).unwrap();
        let u = AlgebraElement::unit(&a);
        assert_eq!(u.block(0), &CMatrix::identity(1, 1));
        assert_eq!(u.block(1), &CMatrix::identity(2, 2));
    }

    #[test]
    fn unit_is_two_sided_identity() {
        let a = Algebra::new(vec![2, 3]).unwrap();
        let x = random_element(&a, 7);
        let u = AlgebraElement::unit(&a);
        assert!(x.mul(&u).unwrap().fro_dist(&x).unwrap() < 1e-14);
        assert!(u.mul(&x).unwrap().fro_dist(&x).unwrap() < 1e-14);
    }

    #[test]
    fn adjoint_is_involutive() {
        let a = Algebra::new(vec![1, 3]).unwrap();
        let x = random_element(&a, 11);
        assert!(x.adjoint().adjoint().fro_dist(&x).unwrap() == 0.0);
    }

    #[test]
    fn norm_of_nilpotent_is_two() {
        let a = Algebra::new(vec![2]).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let x = AlgebraElement::new(a, vec![m]).unwrap();
        assert!((x.norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_examples() {
        let m2 = Algebra::new(vec![2]).unwrap();
        assert!(AlgebraElement::unit(&m2).is_positive(1e-10));

        let diag = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let x = AlgebraElement::new(m2.clone(), vec![diag]).unwrap();
        assert!(!x.is_positive(1e-10));

        for seed in 0..20 {
            let y = random_element(&m2, seed);
            assert!(y.adjoint().mul(&y).unwrap().is_positive(1e-10));
        }
    }

    #[test]
    fn parent_mismatch_is_rejected() {
        let a = Algebra::new(vec![2]).unwrap();
        let b = Algebra::new(vec![1, 2]).unwrap();
        let x = random_element(&a, 1);
        let y = random_element(&b, 2);
        assert!(x.add(&y).is_err());
        assert!(x.mul(&y).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // C*-identity ‖x†x‖ = ‖x‖² on random elements of ℂ ⊕ M₂ ⊕ M₃.
        #[test]
        fn cstar_identity(seed in 0u64..10_000) {
            let a = Algebra::new(vec![1, 2, 3]).unwrap();
            let x = random_element(&a, seed);
            let lhs = x.adjoint().mul(&x).unwrap().norm();
            let rhs = x.norm() * x.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn multiplication_is_associative(seed in 0u64..10_000) {
            let a = Algebra::new(vec![2, 3]).unwrap();
            let x = random_element(&a, seed);
            let y = random_element(&a, seed.wrapping_add(1));
            let z = random_element(&a, seed.wrapping_add(2));
            let lhs = x.mul(&y).unwrap().mul(&z).unwrap();
            let rhs = x.mul(&y.mul(&z).unwrap()).unwrap();
            prop_assert!(lhs.fro_dist(&rhs).unwrap() < 1e-10);
        }
    }
}
