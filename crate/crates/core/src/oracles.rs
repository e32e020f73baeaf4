//! Seeded random generators and independent brute-force oracles.
//!
//! The oracles recompute everything from definitions — Gram matrices of the
//! GNS inner product, vectorized rank checks on Kraus products — and share
//! only the matrix primitive layer with the main algorithms, so agreement
//! between the two is meaningful evidence. Generators are deterministic in
//! the seed; parallel test shards should use disjoint seed ranges. All
//! oracles are desk-scale: they may be exponential in block size and are
//! meant for blocks of size at most four.

use crate::algebra::{Algebra, AlgebraElement};
use crate::config::Tolerances;
use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_element(alg: &Algebra, seed: u64) -> AlgebraElement {
    let mut rng = rng_from_seed(seed);
    let data = alg.blocks().iter().map(|&n| gaussian_matrix(&mut rng, n, n)).collect();
    AlgebraElement::new(alg.clone(), data).expect("shapes match")
}

pub fn random_hermitian(alg: &Algebra, seed: u64) -> AlgebraElement {
    let x = random_element(alg, seed);
    x.add(&x.adjoint()).expect("same algebra").scale(Complex64::new(0.5, 0.0))
}

/// Haar-distributed unitary via QR of a Gaussian matrix, with the phases of
/// the R diagonal absorbed.
pub fn haar_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..n {
            u[(row, k)] *= phase;
        }
    }
    u
}

pub fn random_unitary_element(alg: &Algebra, seed: u64) -> AlgebraElement {
    let mut rng = rng_from_seed(seed);
    let data = alg.blocks().iter().map(|&n| haar_unitary(&mut rng, n)).collect();
    AlgebraElement::new(alg.clone(), data).expect("shapes match")
}

/// CP map `x ↦ Σ_t K_t x K_t†` with `kraus_count` Gaussian operators per
/// component, scaled so typical norms stay of order one.
pub fn random_cp_map(source: &Algebra, target: &Algebra, kraus_count: usize, seed: u64) -> CpMap {
    let mut rng = rng_from_seed(seed);
    let kraus: Vec<Vec<Vec<CMatrix>>> = source
        .blocks()
        .iter()
        .map(|&a| {
            target
                .blocks()
                .iter()
                .map(|&b| {
                    let scale = 1.0 / ((kraus_count * a * b) as f64).sqrt();
                    (0..kraus_count)
                        .map(|_| gaussian_matrix(&mut rng, b, a) * Complex64::new(scale, 0.0))
                        .collect()
                })
                .collect()
        })
        .collect();
    CpMap::from_kraus(source.clone(), target.clone(), &kraus).expect("shapes match")
}

/// Unital CP map: Gaussian Kraus blocks renormalized per target block by
/// `S_j^{-1/2}` where `S_j = Σ_{i,t} K K†` is the unit image. Singular `S_j`
/// triggers a resample, at most 100 times.
pub fn random_channel(
    source: &Algebra,
    target: &Algebra,
    kraus_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CpMap> {
    let mut rng = rng_from_seed(seed);
    const ATTEMPTS: usize = 100;
    'attempt: for _ in 0..ATTEMPTS {
        let mut kraus: Vec<Vec<Vec<CMatrix>>> = source
            .blocks()
            .iter()
            .map(|&a| {
                target
                    .blocks()
                    .iter()
                    .map(|&b| (0..kraus_count).map(|_| gaussian_matrix(&mut rng, b, a)).collect())
                    .collect()
            })
            .collect();
        for (j, &b) in target.blocks().iter().enumerate() {
            let mut s = CMatrix::zeros(b, b);
            for row in kraus.iter() {
                for k in &row[j] {
                    s += k * k.adjoint();
                }
            }
            let (values, vectors) = linalg::hermitian_eigen_sorted(&s);
            let max = values.first().cloned().unwrap_or(0.0);
            if values.iter().any(|&v| v <= tol.rank * max.max(1.0)) {
                continue 'attempt;
            }
            let mut inv_sqrt = CMatrix::zeros(b, b);
            for (t, &v) in values.iter().enumerate() {
                let w = Complex64::new(1.0 / v.sqrt(), 0.0);
                let col = vectors.column(t);
                for r in 0..b {
                    for c in 0..b {
                        inv_sqrt[(r, c)] += col[r] * w * col[c].conj();
                    }
                }
            }
            for row in kraus.iter_mut() {
                for k in &mut row[j] {
                    *k = &inv_sqrt * &*k;
                }
            }
        }
        return CpMap::from_kraus(source.clone(), target.clone(), &kraus);
    }
    Err(Error::GeneratorFailure { attempts: ATTEMPTS })
}

/// State `a ↦ Σ_i Tr(ρ_i a_i)` on the algebra, from a random density matrix
/// with prescribed ranks per block (total trace one). A rank of zero means
/// the block does not support the state.
pub fn random_density_state(alg: &Algebra, ranks: &[usize], seed: u64) -> Result<(CpMap, Vec<CMatrix>)> {
    if ranks.len() != alg.block_count() {
        return Err(Error::InvalidInput("one rank per block required".into()));
    }
    if ranks.iter().sum::<usize>() == 0 {
        return Err(Error::InvalidInput("the zero density is not a state".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut densities = Vec::new();
    for (&n, &r) in alg.blocks().iter().zip(ranks) {
        if r > n {
            return Err(Error::InvalidInput(format!("rank {r} exceeds block size {n}")));
        }
        let mut rho = CMatrix::zeros(n, n);
        for _ in 0..r {
            let v = gaussian_matrix(&mut rng, n, 1);
            let w: f64 = rng.random_range(0.2..1.0);
            rho += (&v * v.adjoint()) * Complex64::new(w, 0.0);
        }
        densities.push(rho);
    }
    let total: Complex64 = densities.iter().map(|m| m.diagonal().iter().sum::<Complex64>()).sum();
    for rho in &mut densities {
        *rho /= total;
    }
    let scalar = Algebra::new(vec![1])?;
    let images: Vec<AlgebraElement> = alg
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| {
            // Tr(ρ_i E_pq) = ρ_i[q, p]
            AlgebraElement::new(scalar.clone(), vec![CMatrix::from_element(1, 1, densities[i][(q, p)])])
        })
        .collect::<Result<_>>()?;
    let state = CpMap::from_action(alg.clone(), scalar, &images)?;
    Ok((state, densities))
}

/// Unital *-homomorphism `⊕_i M_{a_i} → ⊕_j M_{b_j}` determined by a
/// multiplicity table (`mult[j][i]` copies of source block `i` inside target
/// block `j`, so `b_j = Σ_i mult[j][i] a_i`), conjugated by Haar unitaries.
pub fn random_star_homomorphism(source: &Algebra, mult: &[Vec<usize>], seed: u64) -> Result<(Algebra, CpMap)> {
    if mult.iter().any(|row| row.len() != source.block_count()) {
        return Err(Error::InvalidInput("multiplicity rows must match the source blocks".into()));
    }
    let b: Vec<usize> = mult
        .iter()
        .map(|row| row.iter().zip(source.blocks()).map(|(&m, &a)| m * a).sum())
        .collect();
    if b.iter().any(|&x| x == 0) {
        return Err(Error::InvalidInput("every target block needs at least one copy".into()));
    }
    let target = Algebra::new(b)?;
    let mut rng = rng_from_seed(seed);
    let unitaries: Vec<CMatrix> = target.blocks().iter().map(|&n| haar_unitary(&mut rng, n)).collect();

    let embed = |x: &AlgebraElement| -> AlgebraElement {
        let data = target
            .blocks()
            .iter()
            .enumerate()
            .map(|(j, &bj)| {
                let mut block = CMatrix::zeros(bj, bj);
                let mut off = 0;
                for (i, &a) in source.blocks().iter().enumerate() {
                    for _ in 0..mult[j][i] {
                        for r in 0..a {
                            for c in 0..a {
                                block[(off + r, off + c)] = x.block(i)[(r, c)];
                            }
                        }
                        off += a;
                    }
                }
                &unitaries[j] * block * unitaries[j].adjoint()
            })
            .collect();
        AlgebraElement::new(target.clone(), data).expect("shapes match")
    };

    let images: Vec<AlgebraElement> = source
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| embed(&AlgebraElement::matrix_unit(source, i, p, q).expect("valid unit")))
        .collect();
    let f = CpMap::from_action(source.clone(), target.clone(), &images)?;
    Ok((target, f))
}

/// Direct algebraic test for a unital *-homomorphism: multiplicativity on
/// the matrix-unit basis, unitality, and adjoint preservation, all within
/// `tol`.
pub fn direct_star_homomorphism_check(f: &CpMap, tol: f64) -> bool {
    if !f.is_unital(tol) {
        return false;
    }
    let source = f.source();
    let units: Vec<AlgebraElement> = source
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| AlgebraElement::matrix_unit(source, i, p, q).expect("valid unit"))
        .collect();
    let images: Vec<AlgebraElement> = units.iter().map(|u| f.apply(u).expect("applies")).collect();
    for (u, fu) in units.iter().zip(&images) {
        let adj = f.apply(&u.adjoint()).expect("applies");
        if adj.fro_dist(&fu.adjoint()).expect("same algebra") > tol {
            return false;
        }
    }
    for (u, fu) in units.iter().zip(&images) {
        for (v, fv) in units.iter().zip(&images) {
            let lhs = f.apply(&u.mul(v).expect("same algebra")).expect("applies");
            let rhs = fu.mul(fv).expect("same algebra");
            if lhs.fro_dist(&rhs).expect("same algebra") > tol {
                return false;
            }
        }
    }
    true
}

/// Choi's extremality criterion for a CP map between single-block algebras,
/// recomputed from scratch: extract minimal Kraus operators from an
/// eigendecomposition of the Choi matrix assembled out of `apply`, then test
/// linear independence of the products.
///
/// With the convention `f(a) = Σ_t K_t a K_t†`, the adjoint (Schrödinger)
/// operators are `A_t = K_t†` and Choi's criterion asks for independence of
/// `{A_t† A_u} = {K_t K_u†}`.
pub fn choi_independence_oracle(f: &CpMap, tol: &Tolerances) -> Result<bool> {
    if f.source().block_count() != 1 || f.target().block_count() != 1 {
        return Err(Error::Unsupported(
            "the Choi independence oracle covers single-block algebras only".into(),
        ));
    }
    let a = f.source().blocks()[0];
    let b = f.target().blocks()[0];
    let mut choi = CMatrix::zeros(a * b, a * b);
    for p in 0..a {
        for q in 0..a {
            let img = f
                .apply(&AlgebraElement::matrix_unit(f.source(), 0, p, q)?)
                .expect("applies");
            for m in 0..b {
                for n in 0..b {
                    choi[(p * b + m, q * b + n)] = img.block(0)[(m, n)];
                }
            }
        }
    }
    let (values, vectors) = linalg::hermitian_eigen_sorted(&choi);
    let rank = linalg::numerical_rank(&values, tol.rank);
    if rank == 0 {
        return Ok(true);
    }
    let mut kraus = Vec::with_capacity(rank);
    for t in 0..rank {
        let scale = values[t].sqrt();
        let mut k = CMatrix::zeros(b, a);
        for p in 0..a {
            for m in 0..b {
                k[(m, p)] = vectors[(p * b + m, t)] * scale;
            }
        }
        kraus.push(k);
    }
    let mut stacked = CMatrix::zeros(b * b, rank * rank);
    for (t, kt) in kraus.iter().enumerate() {
        for (u, ku) in kraus.iter().enumerate() {
            let prod = kt * ku.adjoint();
            for r in 0..b {
                for c in 0..b {
                    stacked[(r * b + c, t * rank + u)] = prod[(r, c)];
                }
            }
        }
    }
    let (_, svals, _) = linalg::svd_parts(&stacked);
    Ok(linalg::numerical_rank(&svals, tol.rank) == rank * rank)
}

/// Gram matrix of the GNS semi-inner product
/// `⟨a₁⊗b₁, a₂⊗b₂⟩ = Tr(b₁† f(a₁† a₂) b₂)` over the matrix-unit basis of
/// `source ⊙ target`, assembled entry by entry with algebra operations.
/// Positive semidefiniteness of this matrix is equivalent to complete
/// positivity of `f`.
pub fn gns_gram_oracle(f: &CpMap) -> CMatrix {
    let source = f.source();
    let target = f.target();
    let src_units: Vec<AlgebraElement> = source
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| AlgebraElement::matrix_unit(source, i, p, q).expect("valid unit"))
        .collect();
    let tgt_units: Vec<AlgebraElement> = target
        .unit_indices()
        .iter()
        .map(|&(j, u, v)| AlgebraElement::matrix_unit(target, j, u, v).expect("valid unit"))
        .collect();
    let nr = src_units.len();
    let ns = tgt_units.len();
    let mut gram = CMatrix::zeros(nr * ns, nr * ns);
    for (ai, a1) in src_units.iter().enumerate() {
        for (bi, b1) in tgt_units.iter().enumerate() {
            for (aj, a2) in src_units.iter().enumerate() {
                for (bj, b2) in tgt_units.iter().enumerate() {
                    let mid = f.apply(&a1.adjoint().mul(a2).expect("same algebra")).expect("applies");
                    let val = b1.adjoint().mul(&mid).expect("same algebra").mul(b2).expect("same algebra");
                    gram[(ai * ns + bi, aj * ns + bj)] = val.trace();
                }
            }
        }
    }
    gram
}

/// PSD verdict for a Hermitian-intended Gram matrix.
pub fn gram_is_psd(gram: &CMatrix, tol: f64) -> bool {
    linalg::is_hermitian(gram, tol) && linalg::min_eigenvalue(gram) >= -tol * (1.0 + linalg::opnorm(gram))
}
