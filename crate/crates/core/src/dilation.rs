//! Stinespring representations of CP maps between endomorphism algebras.
//!
//! A generating module `X` over `r` is a bimodule `ℂ → r` whose multiplicity
//! row has no zero entry, so `End(X) = ⊕_i M_{x_i}`. Given generating
//! modules `X` over `r` and `Y` over `s` and a CP map
//! `f: End(X) → End(Y)`, a representation is a pair `(E, V)` of an
//! `r,s`-bimodule `E` (the environment) and an intertwiner
//! `V: Y → X ⊗ E` with `f(a) = V† (a ⊗ id_E) V`. The minimal representation
//! has environment multiplicities equal to the Choi ranks of the components
//! of `f`; every other representation receives a unique partial-isometric
//! comparison morphism `σ: E_min → E` with `V = (id ⊗ σ) V_min`.
//!
//! Two constructions are provided. [`dilate_minimal`] extracts Kraus
//! operators blockwise from the Choi data. [`dilate_gns`] runs the GNS
//! construction on the algebraic tensor product of the two algebras for the
//! standard generating modules, quotients by the kernel of the induced
//! Gram matrix, and decomposes the resulting bimodule into standard form;
//! it serves as an independent route to the same minimal representation.

use crate::algebra::{Algebra, AlgebraElement};
use crate::bimodule::{
    amplify_intertwiner, classify_intertwiner, endomorphism_algebra, fuse, fuse_offset, Bimodule,
    Intertwiner, IntertwinerClass,
};
use crate::config::Tolerances;
use crate::cpmap::CpMap;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;

/// A generating right module over `base`, i.e. every multiplicity positive.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingModule {
    base: Algebra,
    mult: Vec<usize>,
}

impl GeneratingModule {
    pub fn new(base: Algebra, mult: Vec<usize>) -> Result<Self> {
        if mult.len() != base.block_count() {
            return Err(Error::InvalidInput(format!(
                "module lists {} multiplicities, base algebra has {} blocks",
                mult.len(),
                base.block_count()
            )));
        }
        if mult.iter().any(|&x| x == 0) {
            return Err(Error::InvalidInput(
                "a generating module needs every multiplicity positive".into(),
            ));
        }
        Ok(GeneratingModule { base, mult })
    }

    /// The standard module `L²(r)`: each block with multiplicity equal to
    /// its size, so `End` is the algebra itself.
    pub fn standard(alg: &Algebra) -> Self {
        GeneratingModule {
            base: alg.clone(),
            mult: alg.blocks().to_vec(),
        }
    }

    pub fn base(&self) -> &Algebra {
        &self.base
    }

    pub fn mult(&self) -> &[usize] {
        &self.mult
    }

    /// The module as a `ℂ, base`-bimodule.
    pub fn bimodule(&self) -> Bimodule {
        let scalar = Algebra::new(vec![1]).expect("ℂ is a valid algebra");
        Bimodule::new(scalar, self.base.clone(), vec![self.mult.clone()]).expect("row shape matches")
    }

    /// `End(X) = ⊕_i M_{x_i}`.
    pub fn end_algebra(&self) -> Algebra {
        Algebra::new(self.mult.clone()).expect("positive multiplicities")
    }
}

/// A Stinespring representation `(E, V: Y → X ⊗ E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub environment: Bimodule,
    pub v: Intertwiner,
}

impl Representation {
    /// Checks that the pair is shaped like a representation for `(x, y)`.
    pub fn validate(&self, x: &GeneratingModule, y: &GeneratingModule) -> Result<()> {
        if self.environment.left() != x.base() || self.environment.right() != y.base() {
            return Err(Error::InvalidInput(
                "environment algebras do not match the generating modules".into(),
            ));
        }
        if self.v.source() != &y.bimodule() {
            return Err(Error::InvalidInput("V must start at the target module".into()));
        }
        let fused = fuse(&x.bimodule(), &self.environment)?;
        if self.v.target() != &fused {
            return Err(Error::InvalidInput("V must land in X ⊗ E".into()));
        }
        Ok(())
    }

    pub fn environment_mult(&self) -> &[Vec<usize>] {
        self.environment.mult()
    }
}

/// Mode unfolding of the `V` block at `(i, j)`: the `e_ij × (x_i·y_j)`
/// matrix `M[t, p·y_j + m] = V_j[(i, p, t), m]`. Everything about a
/// representation — reconstruction, minimization, comparison morphisms —
/// reads off this matrix.
pub(crate) fn unfolding(
    rep: &Representation,
    x: &GeneratingModule,
    y: &GeneratingModule,
    i: usize,
    j: usize,
) -> CMatrix {
    let e = rep.environment.mult_at(i, j);
    let xi = x.mult()[i];
    let yj = y.mult()[j];
    let vj = rep.v.block(0, j);
    let off: usize = (0..i).map(|ip| x.mult()[ip] * rep.environment.mult_at(ip, j)).sum();
    CMatrix::from_fn(e, xi * yj, |t, col| {
        let p = col / yj;
        let m = col % yj;
        vj[(off + p * e + t, m)]
    })
}

fn check_map_types(x: &GeneratingModule, y: &GeneratingModule, f: &CpMap) -> Result<()> {
    if f.source() != &x.end_algebra() {
        return Err(Error::InvalidInput("map source is not End of the first module".into()));
    }
    if f.target() != &y.end_algebra() {
        return Err(Error::InvalidInput("map target is not End of the second module".into()));
    }
    Ok(())
}

/// Minimal representation by blockwise Kraus extraction: the environment
/// multiplicity at `(i, j)` is the Choi rank of the component
/// `f_ij: M_{x_i} → M_{y_j}` and `V` packs the Kraus operators,
/// `V_j[(i,p,t), m] = conj(K^{ij}_t[m,p])`.
pub fn dilate_minimal(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    tol: &Tolerances,
) -> Result<Representation> {
    check_map_types(x, y, f)?;
    let kraus = f.kraus_decomposition(tol)?;
    let e_mult: Vec<Vec<usize>> = kraus.iter().map(|row| row.iter().map(|ops| ops.len()).collect()).collect();
    let environment = Bimodule::new(x.base().clone(), y.base().clone(), e_mult)?;
    let fused = fuse(&x.bimodule(), &environment)?;

    let mut blocks = Vec::new();
    for (j, &yj) in y.mult().iter().enumerate() {
        let zj = fused.mult_at(0, j);
        let mut vj = CMatrix::zeros(zj, yj);
        let mut off = 0;
        for (i, &xi) in x.mult().iter().enumerate() {
            let ops = &kraus[i][j];
            let e = ops.len();
            for (t, k) in ops.iter().enumerate() {
                for p in 0..xi {
                    for m in 0..yj {
                        vj[(off + p * e + t, m)] = k[(m, p)].conj();
                    }
                }
            }
            off += xi * e;
        }
        blocks.push(vj);
    }
    let v = Intertwiner::new(y.bimodule(), fused, blocks)?;
    Ok(Representation { environment, v })
}

/// The CP map `a ↦ V† (a ⊗ id_E) V` determined by a representation.
///
/// The Choi block of the result at `(i, j)` is `M† M` for the unfolding `M`
/// of `V`, so the output is completely positive by construction; it is
/// unital exactly when `V` is an isometry.
pub fn reconstruct(x: &GeneratingModule, y: &GeneratingModule, rep: &Representation) -> Result<CpMap> {
    rep.validate(x, y)?;
    let cols = y.base().block_count();
    let mut choi = Vec::with_capacity(x.base().block_count() * cols);
    for i in 0..x.mult().len() {
        for j in 0..cols {
            let m = unfolding(rep, x, y, i, j);
            choi.push(m.adjoint() * m);
        }
    }
    CpMap::new(x.end_algebra(), y.end_algebra(), choi)
}

/// Compresses the environment onto the span actually reached by `V`.
///
/// Per block `(i, j)` the reachable subspace of `ℂ^{e_ij}` is the column
/// space of the unfolding; an orthonormal basis of it compresses `E` and
/// `V`, and the returned isometry `ι: E_min → E` satisfies
/// `V = (id ⊗ ι) V_min` exactly, so reconstruction is unchanged.
pub fn minimize_representation(
    x: &GeneratingModule,
    y: &GeneratingModule,
    rep: &Representation,
    tol: &Tolerances,
) -> Result<(Representation, Intertwiner)> {
    rep.validate(x, y)?;
    let rows = x.base().block_count();
    let cols = y.base().block_count();
    let mut bases: Vec<CMatrix> = Vec::with_capacity(rows * cols);
    let mut new_mult = vec![vec![0usize; cols]; rows];
    for i in 0..rows {
        for j in 0..cols {
            let m = unfolding(rep, x, y, i, j);
            let basis = linalg::column_space_basis(&m, tol.rank);
            new_mult[i][j] = basis.ncols();
            bases.push(basis);
        }
    }
    let minimal_env = Bimodule::new(x.base().clone(), y.base().clone(), new_mult)?;
    let fused = fuse(&x.bimodule(), &minimal_env)?;

    let mut blocks = Vec::new();
    for (j, &yj) in y.mult().iter().enumerate() {
        let zj = fused.mult_at(0, j);
        let mut vj = CMatrix::zeros(zj, yj);
        let mut off = 0;
        for (i, &xi) in x.mult().iter().enumerate() {
            let m = unfolding(rep, x, y, i, j);
            let u = &bases[i * cols + j];
            let compressed = u.adjoint() * &m; // e' × (x_i·y_j)
            let e_new = u.ncols();
            for t in 0..e_new {
                for p in 0..xi {
                    for mm in 0..yj {
                        vj[(off + p * e_new + t, mm)] = compressed[(t, p * yj + mm)];
                    }
                }
            }
            off += xi * e_new;
        }
        blocks.push(vj);
    }
    let v = Intertwiner::new(y.bimodule(), fused, blocks)?;
    let iota_blocks: Vec<CMatrix> = bases;
    let iota = Intertwiner::new(minimal_env.clone(), rep.environment.clone(), iota_blocks)?;
    Ok((
        Representation {
            environment: minimal_env,
            v,
        },
        iota,
    ))
}

/// Solves `V₂ = (id_X ⊗ σ) V₁` for the comparison morphism `σ: E₁ → E₂` in
/// the least-squares sense, blockwise by pseudoinverse.
///
/// Both representations must reconstruct to the same CP map within `tol.eq`
/// (checked). When `rep1` is minimal the solution is the unique morphism of
/// the representation category; `None` is returned when the residual stays
/// above `tol.eq`, meaning no comparison morphism exists.
pub fn representation_morphism(
    rep1: &Representation,
    rep2: &Representation,
    x: &GeneratingModule,
    y: &GeneratingModule,
    tol: &Tolerances,
) -> Result<Option<Intertwiner>> {
    let f1 = reconstruct(x, y, rep1)?;
    let f2 = reconstruct(x, y, rep2)?;
    let distance = f1.distance(&f2)?;
    if distance > tol.eq {
        return Err(Error::RepresentationsInequivalent { distance });
    }
    let rows = x.base().block_count();
    let cols = y.base().block_count();
    let mut blocks = Vec::with_capacity(rows * cols);
    let mut residual: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let m1 = unfolding(rep1, x, y, i, j);
            let m2 = unfolding(rep2, x, y, i, j);
            let sigma = &m2 * linalg::pinv(&m1, tol.rank);
            residual = residual.max(linalg::fro_dist(&(&sigma * &m1), &m2));
            blocks.push(sigma);
        }
    }
    if residual > tol.eq {
        return Ok(None);
    }
    Ok(Some(Intertwiner::new(
        rep1.environment.clone(),
        rep2.environment.clone(),
        blocks,
    )?))
}

/// GNS construction of the minimal representation for a CP map between the
/// standard generating modules of its source and target algebras.
///
/// Builds the Gram matrix of `⟨a₁⊗b₁, a₂⊗b₂⟩ = Tr(b₁† f(a₁†a₂) b₂)` over
/// the matrix-unit basis of `r ⊙ s`, quotients by its numerical kernel,
/// reads off the left and right module actions on the quotient, decomposes
/// that bimodule into standard form, and extracts `V` from the class of
/// `1_r ⊗ 1_s`. The result is then passed through
/// [`minimize_representation`] (a no-op for this construction).
pub fn dilate_gns(f: &CpMap, tol: &Tolerances) -> Result<Representation> {
    f.ensure_completely_positive(tol.eq)?;
    let r = f.source().clone();
    let s = f.target().clone();
    let x = GeneratingModule::standard(&r);
    let y = GeneratingModule::standard(&s);

    let r_units = r.unit_indices();
    let s_units = s.unit_indices();
    let nr = r_units.len();
    let ns = s_units.len();
    let n = nr * ns;

    // Images of the source matrix units under f, reused throughout.
    let images: Vec<AlgebraElement> = r_units
        .iter()
        .map(|&(i, p, q)| f.apply(&AlgebraElement::matrix_unit(&r, i, p, q).expect("valid unit")))
        .collect::<Result<_>>()?;
    let image_index = |i: usize, p: usize, q: usize| -> usize {
        let prev: usize = r.blocks()[..i].iter().map(|n| n * n).sum();
        prev + p * r.blocks()[i] + q
    };

    // Gram matrix in closed form:
    // G[(i,p,q,j,u,v), (i',p',q',j',u',v')] = δ_ii' δ_pp' δ_jj' δ_vv' · f(E_qq')_j[u,u'].
    let mut gram = CMatrix::zeros(n, n);
    for (ai, &(i, p, q)) in r_units.iter().enumerate() {
        for (aj, &(i2, p2, q2)) in r_units.iter().enumerate() {
            if i != i2 || p != p2 {
                continue;
            }
            let fq = &images[image_index(i, q, q2)];
            for (bi, &(j, u, v)) in s_units.iter().enumerate() {
                for (bj, &(j2, u2, v2)) in s_units.iter().enumerate() {
                    if j != j2 || v != v2 {
                        continue;
                    }
                    gram[(ai * ns + bi, aj * ns + bj)] = fq.block(j)[(u, u2)];
                }
            }
        }
    }

    // Quotient by the numerical kernel: coordinates z_t(x) = √λ_t · v_t† c.
    let (values, vectors) = linalg::hermitian_eigen_sorted(&gram);
    let d = linalg::numerical_rank(&values, tol.rank);
    let q_map = CMatrix::from_fn(d, n, |t, g| vectors[(g, t)].conj() * values[t].sqrt());
    let q_pinv = CMatrix::from_fn(n, d, |g, t| vectors[(g, t)] / values[t].sqrt());

    if d == 0 {
        // The zero map: zero environment and zero V.
        let environment = Bimodule::new(
            r.clone(),
            s.clone(),
            vec![vec![0; s.block_count()]; r.block_count()],
        )?;
        let fused = fuse(&x.bimodule(), &environment)?;
        let v = Intertwiner::zero(&y.bimodule(), &fused)?;
        return Ok(Representation { environment, v });
    }

    // Module actions on the quotient: left multiplication on the r leg and
    // right multiplication on the s leg of the coefficient space.
    let left_action = |i0: usize, p0: usize, q0: usize| -> CMatrix {
        let mut act = CMatrix::zeros(n, n);
        for (ai, &(i, p, q)) in r_units.iter().enumerate() {
            if i != i0 || p != q0 {
                continue;
            }
            let ai_new = image_index(i, p0, q) * ns;
            for b in 0..ns {
                act[(ai_new + b, ai * ns + b)] = Complex64::new(1.0, 0.0);
            }
        }
        &q_map * act * &q_pinv
    };
    let s_index = |j: usize, u: usize, v: usize| -> usize {
        let prev: usize = s.blocks()[..j].iter().map(|n| n * n).sum();
        prev + u * s.blocks()[j] + v
    };
    let right_action = |j0: usize, u0: usize, v0: usize| -> CMatrix {
        let mut act = CMatrix::zeros(n, n);
        for (bi, &(j, u, v)) in s_units.iter().enumerate() {
            if j != j0 || v != u0 {
                continue;
            }
            let bi_new = s_index(j, u, v0);
            for a in 0..nr {
                act[(a * ns + bi_new, a * ns + bi)] = Complex64::new(1.0, 0.0);
            }
        }
        &q_map * act * &q_pinv
    };

    // Corner projections pick one vector per copy of the irreducible
    // M_{n_i} ⊗ M_{m_j}^op representation; translating the corners with the
    // matrix units yields an orthonormal standard-form basis.
    let mut env_mult = vec![vec![0usize; s.block_count()]; r.block_count()];
    let mut columns: Vec<CMatrix> = Vec::new();
    for (i, &ni) in r.blocks().iter().enumerate() {
        let left_p0: Vec<CMatrix> = (0..ni).map(|p| left_action(i, p, 0)).collect();
        for (j, &mj) in s.blocks().iter().enumerate() {
            let right_0m: Vec<CMatrix> = (0..mj).map(|m| right_action(j, 0, m)).collect();
            let corner = &left_p0[0].adjoint() * &left_p0[0] * (right_0m[0].adjoint() * &right_0m[0]);
            // π_L(E_00) = π_L(E_0p)π_L(E_p0); as a projection it equals
            // L(0,0)·R(0,0)... compute directly instead:
            let proj = left_action(i, 0, 0) * right_action(j, 0, 0);
            let _ = corner;
            let (pvals, pvecs) = linalg::hermitian_eigen_sorted(&proj);
            let e_ij = pvals.iter().filter(|&&v| v > 0.5).count();
            env_mult[i][j] = e_ij;
            for p in 0..ni {
                for t in 0..e_ij {
                    for m in 0..mj {
                        let w = CMatrix::from_fn(d, 1, |row, _| pvecs[(row, t)]);
                        let beta = &left_p0[p] * (&right_0m[m] * w);
                        columns.push(beta);
                    }
                }
            }
        }
    }

    let environment = Bimodule::new(r.clone(), s.clone(), env_mult)?;
    if environment.dim() != d {
        return Err(Error::NumericalFailure(format!(
            "GNS decomposition dimension mismatch: bimodule dim {}, Gram rank {d}",
            environment.dim()
        )));
    }

    // ω = W† Ω, the class of 1_r ⊗ 1_s in the standard-form basis.
    let mut unit_coeff = CMatrix::zeros(n, 1);
    for (ai, &(_, p, q)) in r_units.iter().enumerate() {
        if p != q {
            continue;
        }
        for (bi, &(_, u, v)) in s_units.iter().enumerate() {
            if u != v {
                continue;
            }
            unit_coeff[(ai * ns + bi, 0)] = Complex64::new(1.0, 0.0);
        }
    }
    let omega = &q_map * unit_coeff;
    let omega_coords: Vec<Complex64> = columns
        .iter()
        .map(|beta| (beta.adjoint() * &omega)[(0, 0)])
        .collect();

    // Read off V: g_j[(i,p,t), u] = ω at standard index (i,j,p,t,m=u).
    let fused = fuse(&x.bimodule(), &environment)?;
    let std_offset = |i: usize, j: usize| -> usize {
        let mut off = 0;
        for (a, b) in environment.block_pairs() {
            if (a, b) == (i, j) {
                break;
            }
            off += r.blocks()[a] * environment.mult_at(a, b) * s.blocks()[b];
        }
        off
    };
    let mut blocks = Vec::new();
    for (j, &mj) in s.blocks().iter().enumerate() {
        let zj = fused.mult_at(0, j);
        let mut vj = CMatrix::zeros(zj, mj);
        for (i, &ni) in r.blocks().iter().enumerate() {
            let e_ij = environment.mult_at(i, j);
            let row_off = fuse_offset(&x.bimodule(), &environment, 0, j, i);
            for p in 0..ni {
                for t in 0..e_ij {
                    for u in 0..mj {
                        let std_idx = std_offset(i, j) + p * (e_ij * mj) + t * mj + u;
                        vj[(row_off + p * e_ij + t, u)] = omega_coords[std_idx];
                    }
                }
            }
        }
        blocks.push(vj);
    }
    let v = Intertwiner::new(y.bimodule(), fused, blocks)?;
    let rep = Representation { environment, v };
    let (minimal, _) = minimize_representation(&x, &y, &rep, tol)?;
    Ok(minimal)
}

/// A CP map is a unital *-homomorphism iff the `V` of its minimal
/// representation is unitary.
pub fn is_star_homomorphism(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    tol: &Tolerances,
) -> Result<bool> {
    let rep = dilate_minimal(x, y, f, tol)?;
    Ok(classify_intertwiner(&rep.v, tol.eq) == IntertwinerClass::Unitary)
}

/// Factorization of `f` through `End(X ⊗ E)`: a unital *-homomorphism
/// `ρ = (- ⊗ id_E)` followed by the compression `ν = V† ∘ - ∘ V`.
pub fn paschke_dilation(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    tol: &Tolerances,
) -> Result<(Algebra, CpMap, CpMap)> {
    let rep = dilate_minimal(x, y, f, tol)?;
    let fused = fuse(&x.bimodule(), &rep.environment)?;
    let end_fused = endomorphism_algebra(&fused);
    let p_alg = end_fused.algebra()?.clone();
    let end_y = endomorphism_algebra(&y.bimodule());

    let source = x.end_algebra();
    let x_bim = x.bimodule();
    let rho_images: Vec<AlgebraElement> = source
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| {
            let unit = AlgebraElement::matrix_unit(&source, i, p, q)?;
            let lifted = amplify_intertwiner(&unit, &x_bim, &rep.environment)?;
            end_fused.decode(&lifted)
        })
        .collect::<Result<_>>()?;
    let rho = CpMap::from_action(source, p_alg.clone(), &rho_images)?;

    let nu_images: Vec<AlgebraElement> = p_alg
        .unit_indices()
        .iter()
        .map(|&(k, t, u)| {
            let unit = AlgebraElement::matrix_unit(&p_alg, k, t, u)?;
            let mid = end_fused.encode(&unit)?;
            let compressed = rep.v.adjoint().compose(&mid)?.compose(&rep.v)?;
            end_y.decode(&compressed)
        })
        .collect::<Result<_>>()?;
    let nu = CpMap::from_action(p_alg.clone(), y.end_algebra(), &nu_images)?;
    Ok((p_alg, rho, nu))
}
