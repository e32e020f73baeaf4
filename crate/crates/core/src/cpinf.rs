//! The category of generating modules and minimal representations, and the
//! classification of endomorphism algebras.
//!
//! Objects are generating modules out of the scalars; a morphism `X → Y` is
//! an equivalence class of intertwiners `V: Y → X ⊗ E`, two being equivalent
//! when a partial isometry between the environments carries one to the
//! other. Each class is stored by its canonical representative, the minimal
//! representation, so equality reduces to finding a unitary comparison
//! morphism. Composition fuses environments:
//! `V = α ∘ (V₁ ⊗ id_{E₂}) ∘ V₂` followed by minimization, where `α` is the
//! associator.
//!
//! The same machinery classifies algebras: `End(X)` and `End(Y)` are
//! Morita equivalent iff the base algebras have equally many blocks, and
//! *-isomorphic iff the multiplicity multisets of `X` and `Y` coincide; both
//! witnesses are permutation bimodules with explicit unitaries.

use crate::algebra::{Algebra, AlgebraElement};
use crate::bimodule::{
    amplify_intertwiner, associator, classify_intertwiner, endomorphism_algebra, fuse,
    fuse_intertwiners, Bimodule, Intertwiner, IntertwinerClass,
};
use crate::config::Tolerances;
use crate::cpmap::CpMap;
use crate::dilation::{
    dilate_minimal, minimize_representation, reconstruct, representation_morphism, GeneratingModule,
    Representation,
};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CpInfObject {
    pub module: GeneratingModule,
}

impl CpInfObject {
    pub fn new(module: GeneratingModule) -> Self {
        CpInfObject { module }
    }
}

/// A morphism in normal form: the minimal representation of its CP map.
#[derive(Debug, Clone)]
pub struct CpInfMorphism {
    source: GeneratingModule,
    target: GeneratingModule,
    normal_form: Representation,
}

impl CpInfMorphism {
    /// Wraps an arbitrary representation after minimizing it.
    pub fn from_representation(
        source: GeneratingModule,
        target: GeneratingModule,
        rep: &Representation,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (normal_form, _) = minimize_representation(&source, &target, rep, tol)?;
        Ok(CpInfMorphism {
            source,
            target,
            normal_form,
        })
    }

    pub fn source(&self) -> &GeneratingModule {
        &self.source
    }

    pub fn target(&self) -> &GeneratingModule {
        &self.target
    }

    pub fn normal_form(&self) -> &Representation {
        &self.normal_form
    }
}

/// Builds the morphism represented by a CP map. With `channel` set, only
/// unital maps are accepted (their normal forms have isometric `V`).
pub fn cpinf_from_cpmap(
    x: &GeneratingModule,
    y: &GeneratingModule,
    f: &CpMap,
    channel: bool,
    tol: &Tolerances,
) -> Result<CpInfMorphism> {
    if channel && !f.is_unital(tol.eq) {
        return Err(Error::NotUnital {
            deviation: f.unitality_defect(),
        });
    }
    let normal_form = dilate_minimal(x, y, f, tol)?;
    Ok(CpInfMorphism {
        source: x.clone(),
        target: y.clone(),
        normal_form,
    })
}

pub fn cpinf_to_cpmap(m: &CpInfMorphism) -> Result<CpMap> {
    reconstruct(&m.source, &m.target, &m.normal_form)
}

pub fn identity_morphism(x: &GeneratingModule, tol: &Tolerances) -> Result<CpInfMorphism> {
    cpinf_from_cpmap(x, x, &CpMap::identity(&x.end_algebra()), false, tol)
}

/// Composition by environment fusion, then normalization.
pub fn cpinf_compose(m1: &CpInfMorphism, m2: &CpInfMorphism, tol: &Tolerances) -> Result<CpInfMorphism> {
    if m1.target != m2.source {
        return Err(Error::InvalidInput("morphisms not composable".into()));
    }
    let e1 = &m1.normal_form.environment;
    let e2 = &m2.normal_form.environment;
    let alpha = associator(&m1.source.bimodule(), e1, e2)?;
    let lifted = fuse_intertwiners(&m1.normal_form.v, &Intertwiner::identity(e2))?;
    let v = alpha.compose(&lifted)?.compose(&m2.normal_form.v)?;
    let candidate = Representation {
        environment: fuse(e1, e2)?,
        v,
    };
    CpInfMorphism::from_representation(m1.source.clone(), m2.target.clone(), &candidate, tol)
}

/// Equality of morphisms: a unitary comparison morphism must connect the
/// two normal forms. The equivalent CP-map test is run alongside; the two
/// verdicts disagreeing means the tolerances cannot separate the inputs and
/// is reported as a numerical failure.
pub fn cpinf_equal(m1: &CpInfMorphism, m2: &CpInfMorphism, tol: &Tolerances) -> Result<bool> {
    if m1.source != m2.source || m1.target != m2.target {
        return Err(Error::InvalidInput("morphisms of different types".into()));
    }
    let sigma_verdict = match representation_morphism(&m1.normal_form, &m2.normal_form, &m1.source, &m1.target, tol)
    {
        Ok(Some(sigma)) => classify_intertwiner(&sigma, tol.eq) == IntertwinerClass::Unitary,
        Ok(None) => false,
        Err(Error::RepresentationsInequivalent { .. }) => false,
        Err(e) => return Err(e),
    };
    let cp_verdict = cpinf_to_cpmap(m1)?.distance(&cpinf_to_cpmap(m2)?)? <= tol.eq;
    if sigma_verdict != cp_verdict {
        return Err(Error::NumericalFailure(
            "normal-form and CP-map equality tests disagree".into(),
        ));
    }
    Ok(sigma_verdict)
}

/// Permutation equivalence bimodule between algebras with equally many
/// blocks, pairing block `i` of `r` with block `perm[i]` of `s`, together
/// with its inverse and the unitaries onto the identity bimodules.
fn equivalence_pair(r: &Algebra, s: &Algebra, perm: &[usize]) -> Result<(Bimodule, Bimodule, Intertwiner, Intertwiner)> {
    let k = r.block_count();
    let fwd_mult: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..k).map(|j| usize::from(perm[i] == j)).collect())
        .collect();
    let inv_mult: Vec<Vec<usize>> = (0..k)
        .map(|j| (0..k).map(|i| usize::from(perm[i] == j)).collect())
        .collect();
    let forward = Bimodule::new(r.clone(), s.clone(), fwd_mult)?;
    let inverse = Bimodule::new(s.clone(), r.clone(), inv_mult)?;

    let unit_of = |fused: Bimodule, unit: Bimodule| -> Result<Intertwiner> {
        let blocks = fused
            .block_pairs()
            .map(|(i, j)| CMatrix::identity(unit.mult_at(i, j), fused.mult_at(i, j)))
            .collect();
        Intertwiner::new(fused, unit, blocks)
    };
    let to_identity_left = unit_of(fuse(&forward, &inverse)?, Bimodule::identity(r))?;
    let to_identity_right = unit_of(fuse(&inverse, &forward)?, Bimodule::identity(s))?;
    Ok((forward, inverse, to_identity_left, to_identity_right))
}

#[derive(Debug, Clone)]
pub struct MoritaWitness {
    pub forward: Bimodule,
    pub inverse: Bimodule,
    /// Unitary `forward ⊗ inverse → L²(r)`.
    pub to_identity_left: Intertwiner,
    /// Unitary `inverse ⊗ forward → L²(s)`.
    pub to_identity_right: Intertwiner,
}

/// Finite-dimensional algebras are Morita equivalent iff they have the same
/// number of blocks; the witness pairs blocks in order.
pub fn morita_equivalent(r: &Algebra, s: &Algebra) -> Option<MoritaWitness> {
    if r.block_count() != s.block_count() {
        return None;
    }
    let perm: Vec<usize> = (0..r.block_count()).collect();
    let (forward, inverse, to_identity_left, to_identity_right) =
        equivalence_pair(r, s, &perm).expect("permutation witness is well formed");
    Some(MoritaWitness {
        forward,
        inverse,
        to_identity_left,
        to_identity_right,
    })
}

#[derive(Debug, Clone)]
pub struct IsoWitness {
    /// Equivalence bimodule `r → s` realizing the unitary equivalence.
    pub equivalence: Bimodule,
    pub inverse: Bimodule,
    pub to_identity_left: Intertwiner,
    pub to_identity_right: Intertwiner,
    /// Unitary `U: Y → X ⊗ E`; conjugation by it is the *-isomorphism.
    pub unitary: Intertwiner,
}

/// `End(X) ≅ End(Y)` iff the multiplicity multisets coincide. The witness
/// permutation pairs equal multiplicities, sorted descending with index
/// order breaking ties, so witnesses are deterministic.
pub fn star_isomorphic(x: &GeneratingModule, y: &GeneratingModule) -> Option<IsoWitness> {
    if x.base().block_count() != y.base().block_count() {
        return None;
    }
    let k = x.base().block_count();
    let order = |mult: &[usize]| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by_key(|&i| (std::cmp::Reverse(mult[i]), i));
        idx
    };
    let ord_x = order(x.mult());
    let ord_y = order(y.mult());
    for t in 0..k {
        if x.mult()[ord_x[t]] != y.mult()[ord_y[t]] {
            return None;
        }
    }
    let mut perm = vec![0usize; k];
    for t in 0..k {
        perm[ord_x[t]] = ord_y[t];
    }
    let (equivalence, inverse, to_identity_left, to_identity_right) =
        equivalence_pair(x.base(), y.base(), &perm).expect("permutation witness is well formed");

    let fused = fuse(&x.bimodule(), &equivalence).expect("modules compose");
    let blocks: Vec<CMatrix> = fused
        .block_pairs()
        .map(|(_, j)| CMatrix::identity(fused.mult_at(0, j), y.mult()[j]))
        .collect();
    let unitary = Intertwiner::new(y.bimodule(), fused, blocks).expect("unitary witness shapes");
    Some(IsoWitness {
        equivalence,
        inverse,
        to_identity_left,
        to_identity_right,
        unitary,
    })
}

/// The *-isomorphism `ad_U: End(X) → End(Y)`, `a ↦ U† (a ⊗ id_E) U`,
/// induced by a unitary equivalence witness.
pub fn induced_isomorphism(
    x: &GeneratingModule,
    y: &GeneratingModule,
    witness: &IsoWitness,
) -> Result<CpMap> {
    let source = x.end_algebra();
    let end_y = endomorphism_algebra(&y.bimodule());
    let x_bim = x.bimodule();
    let images: Vec<AlgebraElement> = source
        .unit_indices()
        .iter()
        .map(|&(i, p, q)| {
            let unit = AlgebraElement::matrix_unit(&source, i, p, q)?;
            let lifted = amplify_intertwiner(&unit, &x_bim, &witness.equivalence)?;
            let conj = witness.unitary.adjoint().compose(&lifted)?.compose(&witness.unitary)?;
            end_y.decode(&conj)
        })
        .collect::<Result<_>>()?;
    CpMap::from_action(source, y.end_algebra(), &images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;

    fn alg(blocks: &[usize]) -> Algebra {
        Algebra::new(blocks.to_vec()).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn cpmap_round_trip() {
        let x = GeneratingModule::standard(&alg(&[2]));
        let y = GeneratingModule::standard(&alg(&[1, 2]));
        for seed in 0..10u64 {
            let f = oracles::random_cp_map(&x.end_algebra(), &y.end_algebra(), 2, 100 + seed);
            let m = cpinf_from_cpmap(&x, &y, &f, false, &tol()).unwrap();
            let back = cpinf_to_cpmap(&m).unwrap();
            assert!(back.distance(&f).unwrap() < 1e-8);
        }
    }

    #[test]
    fn channel_flag_restricts_to_unital_maps() {
        let x = GeneratingModule::standard(&alg(&[2]));
        let f = oracles::random_cp_map(&x.end_algebra(), &x.end_algebra(), 2, 3);
        assert!(f.unitality_defect() > 1e-3);
        assert!(cpinf_from_cpmap(&x, &x, &f, false, &tol()).is_ok());
        assert!(matches!(
            cpinf_from_cpmap(&x, &x, &f, true, &tol()),
            Err(Error::NotUnital { .. })
        ));

        let ch = oracles::random_channel(&x.end_algebra(), &x.end_algebra(), 2, 4, &tol()).unwrap();
        let m = cpinf_from_cpmap(&x, &x, &ch, true, &tol()).unwrap();
        let class = classify_intertwiner(&m.normal_form.v, 1e-8);
        assert!(class == IntertwinerClass::Isometry || class == IntertwinerClass::Unitary);
    }

    #[test]
    fn identity_morphism_has_unitary_normal_form() {
        let x = GeneratingModule::new(alg(&[1, 2]), vec![2, 2]).unwrap();
        let id = identity_morphism(&x, &tol()).unwrap();
        assert_eq!(classify_intertwiner(&id.normal_form.v, 1e-10), IntertwinerClass::Unitary);
    }

    #[test]
    fn composition_with_identities_and_functor_property() {
        let x = GeneratingModule::standard(&alg(&[2]));
        let y = GeneratingModule::standard(&alg(&[1, 2]));
        let z = GeneratingModule::standard(&alg(&[2, 1]));
        for seed in 0..8u64 {
            let f = oracles::random_cp_map(&x.end_algebra(), &y.end_algebra(), 2, 500 + seed);
            let g = oracles::random_cp_map(&y.end_algebra(), &z.end_algebra(), 2, 600 + seed);
            let mf = cpinf_from_cpmap(&x, &y, &f, false, &tol()).unwrap();
            let mg = cpinf_from_cpmap(&y, &z, &g, false, &tol()).unwrap();

            let composed = cpinf_compose(&mf, &mg, &tol()).unwrap();
            let via_cpmaps = f.compose(&g).unwrap();
            assert!(cpinf_to_cpmap(&composed).unwrap().distance(&via_cpmaps).unwrap() < 1e-8);

            let idx = identity_morphism(&x, &tol()).unwrap();
            let idy = identity_morphism(&y, &tol()).unwrap();
            let left = cpinf_compose(&idx, &mf, &tol()).unwrap();
            let right = cpinf_compose(&mf, &idy, &tol()).unwrap();
            assert!(cpinf_equal(&left, &mf, &tol()).unwrap());
            assert!(cpinf_equal(&right, &mf, &tol()).unwrap());
        }
    }

    #[test]
    fn composition_is_associative_up_to_equality() {
        let x = GeneratingModule::standard(&alg(&[2]));
        let y = GeneratingModule::standard(&alg(&[1, 2]));
        let z = GeneratingModule::standard(&alg(&[2]));
        let w = GeneratingModule::standard(&alg(&[1, 1]));
        for seed in 0..6u64 {
            let f = cpinf_from_cpmap(
                &x,
                &y,
                &oracles::random_cp_map(&x.end_algebra(), &y.end_algebra(), 2, 700 + seed),
                false,
                &tol(),
            )
            .unwrap();
            let g = cpinf_from_cpmap(
                &y,
                &z,
                &oracles::random_cp_map(&y.end_algebra(), &z.end_algebra(), 2, 800 + seed),
                false,
                &tol(),
            )
            .unwrap();
            let h = cpinf_from_cpmap(
                &z,
                &w,
                &oracles::random_cp_map(&z.end_algebra(), &w.end_algebra(), 2, 900 + seed),
                false,
                &tol(),
            )
            .unwrap();
            let left = cpinf_compose(&cpinf_compose(&f, &g, &tol()).unwrap(), &h, &tol()).unwrap();
            let right = cpinf_compose(&f, &cpinf_compose(&g, &h, &tol()).unwrap(), &tol()).unwrap();
            assert!(cpinf_equal(&left, &right, &tol()).unwrap());
        }
    }

    #[test]
    fn equality_test_examples() {
        let x = GeneratingModule::standard(&alg(&[2]));
        let f = oracles::random_cp_map(&x.end_algebra(), &x.end_algebra(), 2, 42);
        let m = cpinf_from_cpmap(&x, &x, &f, false, &tol()).unwrap();
        assert!(cpinf_equal(&m, &m, &tol()).unwrap());

        // An environment-rotated copy of the normal form is the same morphism.
        let rep = &m.normal_form;
        let mut rng = oracles::rng_from_seed(77);
        let u_blocks: Vec<CMatrix> = rep
            .environment
            .block_pairs()
            .map(|(i, j)| oracles::haar_unitary(&mut rng, rep.environment.mult_at(i, j)))
            .collect();
        let u = Intertwiner::new(rep.environment.clone(), rep.environment.clone(), u_blocks).unwrap();
        let rotated_v = fuse_intertwiners(&Intertwiner::identity(&x.bimodule()), &u)
            .unwrap()
            .compose(&rep.v)
            .unwrap();
        let rotated = Representation {
            environment: rep.environment.clone(),
            v: rotated_v,
        };
        let m_rot = CpInfMorphism::from_representation(x.clone(), x.clone(), &rotated, &tol()).unwrap();
        assert!(cpinf_equal(&m, &m_rot, &tol()).unwrap());

        // Identity vs depolarizing.
        let id = identity_morphism(&x, &tol()).unwrap();
        let m2 = x.end_algebra();
        let dep_images: Vec<AlgebraElement> = m2
            .unit_indices()
            .iter()
            .map(|&(_, p, q)| {
                AlgebraElement::unit(&m2).scale(Complex64::new(if p == q { 0.5 } else { 0.0 }, 0.0))
            })
            .collect();
        let dep = CpMap::from_action(m2.clone(), m2, &dep_images).unwrap();
        let m_dep = cpinf_from_cpmap(&x, &x, &dep, false, &tol()).unwrap();
        assert!(!cpinf_equal(&id, &m_dep, &tol()).unwrap());
    }

    #[test]
    fn morita_classification() {
        // M₂ and M₃ are Morita equivalent with the trivial pairing.
        let w = morita_equivalent(&alg(&[2]), &alg(&[3])).unwrap();
        assert_eq!(w.forward.mult(), &[vec![1]]);
        assert_eq!(fuse(&w.forward, &w.inverse).unwrap().mult(), Bimodule::identity(&alg(&[2])).mult());
        assert_eq!(classify_intertwiner(&w.to_identity_left, 0.0), IntertwinerClass::Unitary);
        assert_eq!(classify_intertwiner(&w.to_identity_right, 0.0), IntertwinerClass::Unitary);

        // Different block counts are inequivalent.
        assert!(morita_equivalent(&alg(&[1, 2]), &alg(&[2])).is_none());

        // Self-equivalence through the identity pairing.
        let w = morita_equivalent(&alg(&[1, 2]), &alg(&[1, 2])).unwrap();
        assert_eq!(w.forward, Bimodule::identity(&alg(&[1, 2])));
    }

    #[test]
    fn star_isomorphism_classification() {
        // End = M₂ ⊕ M₃ on both sides, with swapped block order and
        // different base algebras.
        let x = GeneratingModule::new(alg(&[1, 2]), vec![2, 3]).unwrap();
        let y = GeneratingModule::new(alg(&[2, 5]), vec![3, 2]).unwrap();
        let w = star_isomorphic(&x, &y).unwrap();
        assert_eq!(classify_intertwiner(&w.unitary, 0.0), IntertwinerClass::Unitary);
        let ad_u = induced_isomorphism(&x, &y, &w).unwrap();
        assert!(oracles::direct_star_homomorphism_check(&ad_u, 1e-10));
        // Bijective: the action on the basis spans the target.
        let source = x.end_algebra();
        let dim = source.dim();
        let mut stacked = CMatrix::zeros(dim, dim);
        for (col, &(i, p, q)) in source.unit_indices().iter().enumerate() {
            let img = ad_u
                .apply(&AlgebraElement::matrix_unit(&source, i, p, q).unwrap())
                .unwrap();
            let mut row = 0;
            for blk in img.data() {
                for r in 0..blk.nrows() {
                    for c in 0..blk.ncols() {
                        stacked[(row, col)] = blk[(r, c)];
                        row += 1;
                    }
                }
            }
        }
        let (_, svals, _) = crate::linalg::svd_parts(&stacked);
        assert_eq!(crate::linalg::numerical_rank(&svals, 1e-9), dim);

        // M₂ and M₃ are not isomorphic.
        let a = GeneratingModule::new(alg(&[1]), vec![2]).unwrap();
        let b = GeneratingModule::new(alg(&[1]), vec![3]).unwrap();
        assert!(star_isomorphic(&a, &b).is_none());

        // Self-isomorphism with the identity witness.
        let w = star_isomorphic(&x, &x).unwrap();
        assert_eq!(w.equivalence, Bimodule::identity(x.base()));
        let ad_u = induced_isomorphism(&x, &x, &w).unwrap();
        assert!(ad_u.distance(&CpMap::identity(&x.end_algebra())).unwrap() < 1e-12);
    }
}
