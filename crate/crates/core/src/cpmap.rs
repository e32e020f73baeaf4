//! Linear maps between algebras with block Choi data.
//!
//! A map `f: ⊕_i M_{a_i} → ⊕_j M_{b_j}` decomposes into components
//! `f_ij: M_{a_i} → M_{b_j}` (compress to source block `i`, apply, read
//! target block `j`). Each component is stored as its Choi matrix under the
//! source-major Kronecker convention
//!
//! ```text
//!   C^{(i,j)}[(p·b_j + m), (q·b_j + n)] = f_ij(E_pq)[m, n].
//! ```
//!
//! The map is completely positive iff every Choi block is positive
//! semidefinite. This is a checked property rather than a constructor
//! invariant: the type also carries non-CP linear maps so failures can be
//! reported with the offending block. Kraus and Stinespring forms are
//! derived views of the Choi blocks.

use crate::algebra::{Algebra, AlgebraElement};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    source: Algebra,
    target: Algebra,
    choi: Vec<CMatrix>,
}

impl CpMap {
    /// Builds a map from explicit Choi blocks in lexicographic `(i, j)` order.
    pub fn new(source: Algebra, target: Algebra, choi: Vec<CMatrix>) -> Result<Self> {
        let expected = source.block_count() * target.block_count();
        if choi.len() != expected {
            return Err(Error::InvalidInput(format!(
                "map has {} Choi blocks, expected {expected}",
                choi.len()
            )));
        }
        for (i, &a) in source.blocks().iter().enumerate() {
            for (j, &b) in target.blocks().iter().enumerate() {
                let c = &choi[i * target.block_count() + j];
                let d = a * b;
                if c.nrows() != d || c.ncols() != d {
                    return Err(Error::InvalidInput(format!(
                        "Choi block ({i},{j}) has shape {}×{}, expected {d}×{d}",
                        c.nrows(),
                        c.ncols()
                    )));
                }
            }
        }
        Ok(CpMap {
            source,
            target,
            choi,
        })
    }

    /// Builds a map from the images of the matrix-unit basis of the source,
    /// listed in the normative order (blocks ascending, rows major).
    pub fn from_action(source: Algebra, target: Algebra, images: &[AlgebraElement]) -> Result<Self> {
        if images.len() != source.dim() {
            return Err(Error::InvalidInput(format!(
                "action lists {} images, source dimension is {}",
                images.len(),
                source.dim()
            )));
        }
        for im in images {
            if im.parent() != &target {
                return Err(Error::InvalidInput("action image lies in the wrong algebra".into()));
            }
        }
        let cols = target.block_count();
        let mut choi: Vec<CMatrix> = source
            .blocks()
            .iter()
            .flat_map(|&a| target.blocks().iter().map(move |&b| CMatrix::zeros(a * b, a * b)))
            .collect();
        for (idx, &(i, p, q)) in source.unit_indices().iter().enumerate() {
            for (j, &b) in target.blocks().iter().enumerate() {
                let img = images[idx].block(j);
                let c = &mut choi[i * cols + j];
                for m in 0..b {
                    for n in 0..b {
                        c[(p * b + m, q * b + n)] = img[(m, n)];
                    }
                }
            }
        }
        CpMap::new(source, target, choi)
    }

    /// Builds a CP map `x ↦ Σ_t K_t x K_t†` from Kraus blocks; `kraus[i][j]`
    /// lists the operators of the component `M_{a_i} → M_{b_j}` as
    /// `b_j × a_i` matrices.
    pub fn from_kraus(source: Algebra, target: Algebra, kraus: &[Vec<Vec<CMatrix>>]) -> Result<Self> {
        if kraus.len() != source.block_count() || kraus.iter().any(|row| row.len() != target.block_count()) {
            return Err(Error::InvalidInput("Kraus table shape does not match the algebras".into()));
        }
        let cols = target.block_count();
        let mut choi = Vec::with_capacity(source.block_count() * cols);
        for (i, &a) in source.blocks().iter().enumerate() {
            for (j, &b) in target.blocks().iter().enumerate() {
                let mut c = CMatrix::zeros(a * b, a * b);
                for k in &kraus[i][j] {
                    if k.nrows() != b || k.ncols() != a {
                        return Err(Error::InvalidInput(format!(
                            "Kraus operator for component ({i},{j}) has shape {}×{}, expected {b}×{a}",
                            k.nrows(),
                            k.ncols()
                        )));
                    }
                    for p in 0..a {
                        for m in 0..b {
                            for q in 0..a {
                                for n in 0..b {
                                    c[(p * b + m, q * b + n)] += k[(m, p)] * k[(n, q)].conj();
                                }
                            }
                        }
                    }
                }
                choi.push(c);
            }
        }
        CpMap::new(source, target, choi)
    }

    pub fn zero(source: &Algebra, target: &Algebra) -> Self {
        let choi = source
            .blocks()
            .iter()
            .flat_map(|&a| target.blocks().iter().map(move |&b| CMatrix::zeros(a * b, a * b)))
            .collect();
        CpMap {
            source: source.clone(),
            target: target.clone(),
            choi,
        }
    }

    pub fn identity(alg: &Algebra) -> Self {
        let images: Vec<AlgebraElement> = alg
            .unit_indices()
            .iter()
            .map(|&(i, p, q)| AlgebraElement::matrix_unit(alg, i, p, q).expect("valid unit"))
            .collect();
        CpMap::from_action(alg.clone(), alg.clone(), &images).expect("identity action")
    }

    pub fn source(&self) -> &Algebra {
        &self.source
    }

    pub fn target(&self) -> &Algebra {
        &self.target
    }

    pub fn choi_block(&self, i: usize, j: usize) -> &CMatrix {
        &self.choi[i * self.target.block_count() + j]
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.parent() != &self.source {
            return Err(Error::InvalidInput("element does not belong to the source algebra".into()));
        }
        let mut data: Vec<CMatrix> = self.target.blocks().iter().map(|&b| CMatrix::zeros(b, b)).collect();
        for (j, &b) in self.target.blocks().iter().enumerate() {
            let block = &mut data[j];
            for (i, &asz) in self.source.blocks().iter().enumerate() {
                let c = self.choi_block(i, j);
                let x = a.block(i);
                for p in 0..asz {
                    for q in 0..asz {
                        let coeff = x[(p, q)];
                        if coeff == Complex64::ZERO {
                            continue;
                        }
                        for m in 0..b {
                            for n in 0..b {
                                block[(m, n)] += coeff * c[(p * b + m, q * b + n)];
                            }
                        }
                    }
                }
            }
        }
        AlgebraElement::new(self.target.clone(), data)
    }

    /// Smallest Hermitian-part eigenvalue over the Choi blocks, penalized by
    /// the Hermiticity defect, with the block that attains it.
    pub fn cp_violation(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, f64::INFINITY);
        for i in 0..self.source.block_count() {
            for j in 0..self.target.block_count() {
                let c = self.choi_block(i, j);
                if c.nrows() == 0 {
                    continue;
                }
                let herm_defect = linalg::opnorm(&(c - c.adjoint()));
                let min_eig = linalg::min_eigenvalue(c) - herm_defect;
                if min_eig < worst.2 {
                    worst = (i, j, min_eig);
                }
            }
        }
        if worst.2 == f64::INFINITY {
            worst.2 = 0.0;
        }
        worst
    }

    /// Every Choi block Hermitian and PSD within `tol · (1 + block norm)`.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.choi.iter().all(|c| {
            if c.nrows() == 0 {
                return true;
            }
            linalg::is_hermitian(c, tol) && linalg::min_eigenvalue(c) >= -tol * (1.0 + linalg::opnorm(c))
        })
    }

    pub fn ensure_completely_positive(&self, tol: f64) -> Result<()> {
        if self.is_completely_positive(tol) {
            return Ok(());
        }
        let (i, j, eig) = self.cp_violation();
        Err(Error::NotCompletelyPositive {
            block_row: i,
            block_col: j,
            eigenvalue: eig,
        })
    }

    pub fn unitality_defect(&self) -> f64 {
        let img = self.apply(&AlgebraElement::unit(&self.source)).expect("unit applies");
        img.sub(&AlgebraElement::unit(&self.target)).expect("same algebra").norm()
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect() <= tol
    }

    /// Minimal Kraus operators per component, from the eigendecomposition of
    /// the Choi blocks. Eigenvectors are ordered by descending eigenvalue
    /// with deterministic tie-breaking and phases, so the output is
    /// reproducible across runs.
    pub fn kraus_decomposition(&self, tol: &Tolerances) -> Result<Vec<Vec<Vec<CMatrix>>>> {
        self.ensure_completely_positive(tol.eq)?;
        let mut out = Vec::with_capacity(self.source.block_count());
        for (i, &a) in self.source.blocks().iter().enumerate() {
            let mut row = Vec::with_capacity(self.target.block_count());
            for (j, &b) in self.target.blocks().iter().enumerate() {
                let c = self.choi_block(i, j);
                let (values, vectors) = linalg::hermitian_eigen_sorted(c);
                let rank = linalg::numerical_rank(&values, tol.rank);
                let mut ops = Vec::with_capacity(rank);
                for t in 0..rank {
                    let scale = values[t].sqrt();
                    let mut k = CMatrix::zeros(b, a);
                    for p in 0..a {
                        for m in 0..b {
                            k[(m, p)] = vectors[(p * b + m, t)] * scale;
                        }
                    }
                    ops.push(k);
                }
                row.push(ops);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Composition in application order: `compose(f, g) = g ∘ f`.
    pub fn compose(&self, g: &CpMap) -> Result<CpMap> {
        if self.target != g.source {
            return Err(Error::InvalidInput("maps not composable".into()));
        }
        let images: Result<Vec<AlgebraElement>> = self
            .source
            .unit_indices()
            .iter()
            .map(|&(i, p, q)| {
                let unit = AlgebraElement::matrix_unit(&self.source, i, p, q)?;
                g.apply(&self.apply(&unit)?)
            })
            .collect();
        CpMap::from_action(self.source.clone(), g.target.clone(), &images?)
    }

    /// Entrywise Choi combination `self + c · other`.
    pub fn add_scaled(&self, other: &CpMap, c: f64) -> Result<CpMap> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::InvalidInput("maps of different types".into()));
        }
        let w = Complex64::new(c, 0.0);
        let choi = self
            .choi
            .iter()
            .zip(&other.choi)
            .map(|(x, y)| x + y * w)
            .collect();
        CpMap::new(self.source.clone(), self.target.clone(), choi)
    }

    /// Largest blockwise Frobenius distance between Choi data.
    pub fn distance(&self, other: &CpMap) -> Result<f64> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::InvalidInput("maps of different types".into()));
        }
        Ok(self
            .choi
            .iter()
            .zip(&other.choi)
            .map(|(x, y)| linalg::fro_dist(x, y))
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alg(blocks: &[usize]) -> Algebra {
        Algebra::new(blocks.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_kraus_map(source: &Algebra, target: &Algebra, count: usize, seed: u64) -> CpMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kraus: Vec<Vec<Vec<CMatrix>>> = source
            .blocks()
            .iter()
            .map(|&a| {
                target
                    .blocks()
                    .iter()
                    .map(|&b| {
                        (0..count)
                            .map(|_| {
                                CMatrix::from_fn(b, a, |_, _| {
                                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CpMap::from_kraus(source.clone(), target.clone(), &kraus).unwrap()
    }

    fn transpose_map() -> CpMap {
        let m2 = alg(&[2]);
        let images: Vec<AlgebraElement> = m2
            .unit_indices()
            .iter()
            .map(|&(i, p, q)| AlgebraElement::matrix_unit(&m2, i, q, p).unwrap())
            .collect();
        CpMap::from_action(m2.clone(), m2, &images).unwrap()
    }

    fn depolarizing() -> CpMap {
        let m2 = alg(&[2]);
        let images: Vec<AlgebraElement> = m2
            .unit_indices()
            .iter()
            .map(|&(_, p, q)| AlgebraElement::unit(&m2).scale(c(if p == q { 0.5 } else { 0.0 }, 0.0)))
            .collect();
        CpMap::from_action(m2.clone(), m2, &images).unwrap()
    }

    #[test]
    fn identity_choi_is_maximally_entangled_gram() {
        let id = CpMap::identity(&alg(&[2]));
        // C = Σ_pq E_pq ⊗ E_pq, assembled by hand.
        let mut expect = CMatrix::zeros(4, 4);
        for p in 0..2 {
            for q in 0..2 {
                expect[(p * 2 + p, q * 2 + q)] = c(1.0, 0.0);
            }
        }
        assert_eq!(id.choi_block(0, 0), &expect);
        let (values, _) = linalg::hermitian_eigen_sorted(id.choi_block(0, 0));
        assert_eq!(linalg::numerical_rank(&values, 1e-9), 1);
    }

    #[test]
    fn trace_map_choi_is_identity() {
        let m2 = alg(&[2]);
        let cc = alg(&[1]);
        let images: Vec<AlgebraElement> = m2
            .unit_indices()
            .iter()
            .map(|&(_, p, q)| {
                AlgebraElement::new(
                    cc.clone(),
                    vec![CMatrix::from_element(1, 1, c(if p == q { 1.0 } else { 0.0 }, 0.0))],
                )
                .unwrap()
            })
            .collect();
        let tr = CpMap::from_action(m2, cc, &images).unwrap();
        assert_eq!(tr.choi_block(0, 0), &CMatrix::identity(2, 2));

        let e12 = AlgebraElement::matrix_unit(tr.source(), 0, 0, 1).unwrap();
        assert!(tr.apply(&e12).unwrap().norm() < 1e-15);
    }

    #[test]
    fn zero_map_has_zero_choi_and_empty_kraus() {
        let z = CpMap::zero(&alg(&[2]), &alg(&[1, 2]));
        assert!(z.is_completely_positive(1e-10));
        let kraus = z.kraus_decomposition(&Tolerances::default()).unwrap();
        assert!(kraus.iter().flatten().all(|ops| ops.is_empty()));
    }

    #[test]
    fn transpose_is_not_completely_positive() {
        let t = transpose_map();
        assert!(!t.is_completely_positive(1e-8));
        let (_, _, eig) = t.cp_violation();
        assert!((eig - (-1.0)).abs() < 1e-10);
        assert!(matches!(
            t.kraus_decomposition(&Tolerances::default()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn depolarizing_choi_and_kraus() {
        let d = depolarizing();
        assert_eq!(d.choi_block(0, 0), &(CMatrix::identity(4, 4) * c(0.5, 0.0)));
        assert!(d.is_completely_positive(1e-10));
        assert!(d.is_unital(1e-10));
        let kraus = d.kraus_decomposition(&Tolerances::default()).unwrap();
        assert_eq!(kraus[0][0].len(), 4);
    }

    #[test]
    fn identity_kraus_is_single_identity_operator() {
        let id = CpMap::identity(&alg(&[2]));
        let kraus = id.kraus_decomposition(&Tolerances::default()).unwrap();
        assert_eq!(kraus[0][0].len(), 1);
        let k = &kraus[0][0][0];
        let off = (k - CMatrix::identity(2, 2) * k[(0, 0)]).norm();
        assert!(off < 1e-10, "single Kraus operator should be proportional to the identity");
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kraus_reconstruction_round_trips() {
        let source = alg(&[2, 1]);
        let target = alg(&[1, 3]);
        for seed in 0..10 {
            let f = random_kraus_map(&source, &target, 2, seed);
            let kraus = f.kraus_decomposition(&Tolerances::default()).unwrap();
            let g = CpMap::from_kraus(source.clone(), target.clone(), &kraus).unwrap();
            assert!(f.distance(&g).unwrap() < 1e-8);
        }
    }

    #[test]
    fn apply_matches_choi_partial_trace_on_unit() {
        let source = alg(&[2, 2]);
        let target = alg(&[3]);
        let f = random_kraus_map(&source, &target, 3, 99);
        let via_apply = f.apply(&AlgebraElement::unit(&source)).unwrap();
        // f(1)_j = Σ_{i,p} C^{(i,j)}[(p,m),(p,n)]: partial trace over the
        // source factor.
        let mut expect = CMatrix::zeros(3, 3);
        for i in 0..2 {
            let cblk = f.choi_block(i, 0);
            for p in 0..2 {
                for m in 0..3 {
                    for n in 0..3 {
                        expect[(m, n)] += cblk[(p * 3 + m, p * 3 + n)];
                    }
                }
            }
        }
        assert!(linalg::fro_dist(via_apply.block(0), &expect) < 1e-12);
    }

    #[test]
    fn action_choi_round_trip_is_exact() {
        let source = alg(&[2, 1]);
        let target = alg(&[1, 2]);
        let f = random_kraus_map(&source, &target, 2, 5);
        let images: Vec<AlgebraElement> = source
            .unit_indices()
            .iter()
            .map(|&(i, p, q)| {
                f.apply(&AlgebraElement::matrix_unit(&source, i, p, q).unwrap()).unwrap()
            })
            .collect();
        let g = CpMap::from_action(source, target, &images).unwrap();
        assert!(f.distance(&g).unwrap() < 1e-12);
    }

    #[test]
    fn composition_examples() {
        let m2 = alg(&[2]);
        let f = random_kraus_map(&m2, &alg(&[1, 2]), 2, 7);
        let id = CpMap::identity(&alg(&[1, 2]));
        assert!(f.compose(&id).unwrap().distance(&f).unwrap() < 1e-12);

        let g = random_kraus_map(&alg(&[1, 2]), &m2, 2, 8);
        let comp = f.compose(&g).unwrap();
        assert!(comp.is_completely_positive(1e-8));
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = AlgebraElement::new(
                m2.clone(),
                vec![CMatrix::from_fn(2, 2, |_, _| {
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })],
            )
            .unwrap();
            let lhs = comp.apply(&x).unwrap();
            let rhs = g.apply(&f.apply(&x).unwrap()).unwrap();
            assert!(lhs.fro_dist(&rhs).unwrap() < 1e-10);
        }
    }

    #[test]
    fn random_kraus_maps_are_cp() {
        let source = alg(&[2]);
        let target = alg(&[2]);
        for seed in 0..100 {
            let f = random_kraus_map(&source, &target, 1 + (seed as usize % 3), seed);
            assert!(f.is_completely_positive(1e-8));
        }
    }
}
