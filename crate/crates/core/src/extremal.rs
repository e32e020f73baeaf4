//! Extremality of CP maps with a fixed unit image.
//!
//! Fix generating modules `X`, `Y` and the convex set of CP maps
//! `f: End(X) → End(Y)` with a common value `K = f(1)`. A map with minimal
//! representation `(E, V)` is extremal in that set iff the linear map
//!
//! ```text
//!   L: End(E) → End(Y),   m ↦ V† (id_X ⊗ m) V
//! ```
//!
//! has trivial kernel. A nontrivial kernel yields a Hermitian witness `m`
//! (the kernel is closed under adjoints since `L(m†) = L(m)†`), normalized
//! so `−id ≤ m ≤ id`, and the perturbations
//! `f±(a) = f(a) ± V† (a ⊗ m) V` are distinct CP maps with the same unit
//! image averaging back to `f`, which is the constructive non-extremality
//! certificate.

use crate::algebra::AlgebraElement;
use crate::bimodule::{endomorphism_algebra, Bimodule};
use crate::config::Tolerances;
use crate::cpmap::CpMap;
use crate::dilation::{dilate_minimal, minimize_representation, unfolding, GeneratingModule, Representation};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct ExtremalityReport {
    pub cp_map: CpMap,
    /// The common value `K = f(1)` fixing the convex set.
    pub unit_image: AlgebraElement,
    /// Environment of the minimal representation used for the test.
    pub environment: Bimodule,
    pub kernel_dimension: usize,
    /// Hermitian, operator-norm-one element of `End(E)` annihilated by `L`;
    /// present exactly when the map is not extremal.
    pub witness: Option<AlgebraElement>,
    pub extremal: bool,
}

/// Column index bases for `End(E)`: one `e_ij × e_ij` block per environment
/// block pair with positive multiplicity, vectorized row-major, blocks in
/// lexicographic order.
fn env_block_layout(env: &Bimodule) -> (Vec<(usize, usize)>, Vec<usize>, usize) {
    let positions: Vec<(usize, usize)> = env.block_pairs().filter(|&(i, j)| env.mult_at(i, j) >= 1).collect();
    let mut offsets = Vec::with_capacity(positions.len());
    let mut total = 0;
    for &(i, j) in &positions {
        offsets.push(total);
        total += env.mult_at(i, j) * env.mult_at(i, j);
    }
    (positions, offsets, total)
}

/// Explicit matrix of `L: End(E) → End(Y)`, `m ↦ V† (id_X ⊗ m) V`, over the
/// matrix-unit bases. The representation must be minimal (checked through
/// [`minimize_representation`] idempotence), since the extremality criterion
/// is stated for minimal representations.
pub fn extremality_map(
    x: &GeneratingModule,
    y: &GeneratingModule,
    rep: &Representation,
    tol: &Tolerances,
) -> Result<CMatrix> {
    rep.validate(x, y)?;
    let (minimal, _) = minimize_representation(x, y, rep, tol)?;
    if minimal.environment.mult() != rep.environment.mult() {
        return Err(Error::MustBeMinimal {
            found: rep.environment.mult().to_vec(),
            minimal: minimal.environment.mult().to_vec(),
        });
    }
    let env = &rep.environment;
    let (positions, offsets, cols) = env_block_layout(env);
    let y_offsets: Vec<usize> = {
        let mut acc = 0;
        y.mult()
            .iter()
            .map(|&yj| {
                let off = acc;
                acc += yj * yj;
                off
            })
            .collect()
    };
    let rows: usize = y.mult().iter().map(|&yj| yj * yj).sum();

    let mut l = CMatrix::zeros(rows, cols);
    for (k, &(i, j)) in positions.iter().enumerate() {
        let e = env.mult_at(i, j);
        let yj = y.mult()[j];
        let m = unfolding(rep, x, y, i, j);
        let xi = x.mult()[i];
        // L(E^{(ij)}_{tu})_j[m', n] = Σ_p conj(M[t,(p,m')]) M[u,(p,n)]
        for t in 0..e {
            for u in 0..e {
                let col = offsets[k] + t * e + u;
                for mm in 0..yj {
                    for nn in 0..yj {
                        let mut val = Complex64::ZERO;
                        for p in 0..xi {
                            val += m[(t, p * yj + mm)].conj() * m[(u, p * yj + nn)];
                        }
                        l[(y_offsets[j] + mm * yj + nn, col)] = val;
                    }
                }
            }
        }
    }
    Ok(l)
}

/// Extremality test via the kernel of the map `L` of the minimal
/// representation.
pub fn is_extremal(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    tol: &Tolerances,
) -> Result<ExtremalityReport> {
    let rep = dilate_minimal(x, y, f, tol)?;
    let l = extremality_map(x, y, &rep, tol)?;
    let unit_image = f.apply(&AlgebraElement::unit(f.source()))?;
    let (_, svals, _) = linalg::svd_parts(&l);
    let rank = linalg::numerical_rank(&svals, tol.rank);
    let kernel_dimension = l.ncols() - rank;

    let witness = if kernel_dimension == 0 {
        None
    } else {
        // Kernel basis from the Gram matrix of L; the kernel is closed under
        // the adjoint since L(m†) = L(m)†, so a Hermitian combination of a
        // kernel vector stays in the kernel.
        let gram = l.adjoint() * &l;
        let (_, vectors) = linalg::hermitian_eigen_sorted(&gram);
        let kernel_vec = vectors.column(l.ncols() - 1).into_owned();

        let env_end = endomorphism_algebra(&rep.environment);
        let env_alg = env_end.algebra()?.clone();
        let (positions, offsets, _) = env_block_layout(&rep.environment);
        let mut data = Vec::with_capacity(positions.len());
        for (k, &(i, j)) in positions.iter().enumerate() {
            let e = rep.environment.mult_at(i, j);
            data.push(CMatrix::from_fn(e, e, |t, u| kernel_vec[offsets[k] + t * e + u]));
        }
        let m0 = AlgebraElement::new(env_alg, data)?;
        let herm = m0.add(&m0.adjoint())?;
        let skew = m0.sub(&m0.adjoint())?.scale(Complex64::new(0.0, 1.0));
        let pick = if herm.norm() >= skew.norm() { herm } else { skew };
        let witness = pick.scale(Complex64::new(1.0 / pick.norm(), 0.0));

        // The Hermitian reduction is verified, not assumed: the witness must
        // still be annihilated by L.
        let mut wvec = CMatrix::zeros(l.ncols(), 1);
        for (k, &(i, j)) in positions.iter().enumerate() {
            let e = rep.environment.mult_at(i, j);
            let blk = witness.block(k);
            for t in 0..e {
                for u in 0..e {
                    wvec[(offsets[k] + t * e + u, 0)] = blk[(t, u)];
                }
            }
        }
        let residual = linalg::fro_norm(&(&l * wvec));
        if residual > tol.eq * (1.0 + linalg::opnorm(&l)) {
            return Err(Error::NumericalFailure(format!(
                "Hermitian kernel witness has residual {residual:.3e}"
            )));
        }
        Some(witness)
    };

    Ok(ExtremalityReport {
        cp_map: f.clone(),
        unit_image,
        environment: rep.environment.clone(),
        kernel_dimension,
        witness,
        extremal: kernel_dimension == 0,
    })
}

/// Constructive convex decomposition `f = ½(f₊ + f₋)` of a non-extremal
/// map, with `f±(a) = f(a) ± V†(a ⊗ m)V` for the report's witness `m`.
pub fn decompose_nonextremal(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    report: &ExtremalityReport,
    tol: &Tolerances,
) -> Result<(CpMap, CpMap)> {
    if report.extremal {
        return Err(Error::NoDecomposition);
    }
    let witness = report.witness.as_ref().ok_or(Error::NoDecomposition)?;
    let rep = dilate_minimal(x, y, f, tol)?;
    if rep.environment.mult() != report.environment.mult() {
        return Err(Error::NumericalFailure("report does not match the minimal representation".into()));
    }

    // Choi blocks of the perturbation: C_G^{(i,j)} = M† m_ij M for the
    // unfolding M at (i, j).
    let (positions, _, _) = env_block_layout(&rep.environment);
    let cols = y.base().block_count();
    let mut choi = Vec::new();
    for i in 0..x.base().block_count() {
        for j in 0..cols {
            let m = unfolding(&rep, x, y, i, j);
            let e = rep.environment.mult_at(i, j);
            if e == 0 {
                let d = x.mult()[i] * y.mult()[j];
                choi.push(CMatrix::zeros(d, d));
                continue;
            }
            let k = positions.iter().position(|&p| p == (i, j)).expect("position exists");
            choi.push(m.adjoint() * witness.block(k) * &m);
        }
    }
    let perturbation = CpMap::new(x.end_algebra(), y.end_algebra(), choi)?;
    let plus = f.add_scaled(&perturbation, 1.0)?;
    let minus = f.add_scaled(&perturbation, -1.0)?;

    for half in [&plus, &minus] {
        half.ensure_completely_positive(tol.eq)?;
        let k_dist = half
            .apply(&AlgebraElement::unit(f.source()))?
            .fro_dist(&report.unit_image)?;
        if k_dist > tol.eq * (1.0 + report.unit_image.norm()) {
            return Err(Error::NumericalFailure(format!(
                "decomposition half moves the unit image by {k_dist:.3e}"
            )));
        }
    }
    let separation = plus.distance(&minus)?;
    if separation <= tol.eq {
        return Err(Error::NumericalFailure(format!(
            "decomposition halves coincide (distance {separation:.3e})"
        )));
    }
    Ok((plus, minus))
}

/// A state on `End(X)` is pure iff its minimal environment is an
/// irreducible module: the multiplicity column has a single unit entry.
/// Returns the verdict together with that multiplicity vector.
pub fn is_pure_state(
    x: &GeneratingModule,
    state: &CpMap,
    tol: &Tolerances,
) -> Result<(bool, Vec<usize>)> {
    if state.target().blocks() != [1] {
        return Err(Error::InvalidInput("a state must land in the one-dimensional algebra".into()));
    }
    let y = GeneratingModule::standard(state.target());
    let rep = dilate_minimal(x, &y, state, tol)?;
    let mult: Vec<usize> = rep.environment.mult().iter().map(|row| row[0]).collect();
    let pure = mult.iter().sum::<usize>() == 1;
    Ok((pure, mult))
}
