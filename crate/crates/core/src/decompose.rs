//! Isotypic decomposition of a representation by character projection.

use crate::error::{Error, Result};
use crate::groups::Representation;
use crate::numerics::{CMatrix, CVector, C64};

/// Deviation from an integer tolerated in character inner products.
pub const MULTIPLICITY_TOL: f64 = 1e-6;
/// Required normalization accuracy for input states.
pub const STATE_NORM_TOL: f64 = 1e-10;

/// One invariant subspace `H_p` of a representation.
#[derive(Debug, Clone)]
pub struct IsotypicComponent {
    pub label: usize,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    /// Orthogonal projector `1_p`.
    pub projector: CMatrix,
    /// Orthonormal basis of the range of `1_p`, in deterministic pivot order.
    pub basis: Vec<CVector>,
}

impl IsotypicComponent {
    pub fn subspace_dim(&self) -> usize {
        self.irrep_dim * self.multiplicity
    }

    /// Deterministic unit vector in the subspace.
    pub fn first_basis_vector(&self) -> &CVector {
        &self.basis[0]
    }
}

#[derive(Debug, Clone)]
pub struct IsotypicDecomposition {
    rep: Representation,
    /// `(label, m_p)` for every irrep of the group, in label order.
    multiplicities: Vec<(usize, usize)>,
    components: Vec<IsotypicComponent>,
}

impl IsotypicDecomposition {
    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn multiplicities(&self) -> &[(usize, usize)] {
        &self.multiplicities
    }

    /// Components with `m_p ≥ 1`, in label order.
    pub fn components(&self) -> &[IsotypicComponent] {
        &self.components
    }

    pub fn component(&self, label: usize) -> Option<&IsotypicComponent> {
        self.components.iter().find(|c| c.label == label)
    }

    pub fn present_labels(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.label).collect()
    }

    pub fn group_order(&self) -> usize {
        self.rep.group().order()
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.components.iter().all(|c| c.multiplicity <= 1)
    }
}

/// Computes `1_p = (d_p/|G|) Σ_g χ_p(g)* U(g)` and the multiplicities
/// `m_p = (1/|G|) Σ_g χ_p(g)* χ_U(g)`.
pub fn isotypic_projectors(rep: &Representation) -> Result<IsotypicDecomposition> {
    let group = rep.group();
    let order = group.order() as f64;
    let chi_u = rep.character();
    let mut multiplicities = Vec::new();
    let mut components = Vec::new();
    for irrep in group.irreps() {
        let chi = irrep.character();
        let ip: C64 = chi.iter().zip(&chi_u).map(|(a, b)| a.conj() * b).sum::<C64>() / order;
        let rounded = ip.re.round();
        if (ip.re - rounded).abs() > MULTIPLICITY_TOL || ip.im.abs() > MULTIPLICITY_TOL || rounded < 0.0 {
            return Err(Error::NonIntegerMultiplicity { label: irrep.label, value: ip.re });
        }
        let m = rounded as usize;
        multiplicities.push((irrep.label, m));
        if m == 0 {
            continue;
        }
        let mut proj = CMatrix::zeros(rep.dim(), rep.dim());
        for (g, u) in rep.matrices().iter().enumerate() {
            proj += &u.scale(chi[g].conj());
        }
        let projector = proj.scale_real(irrep.dim as f64 / order).hermitian_part();
        let basis = range_basis(&projector, m * irrep.dim);
        components.push(IsotypicComponent { label: irrep.label, irrep_dim: irrep.dim, multiplicity: m, projector, basis });
    }
    Ok(IsotypicDecomposition { rep: rep.clone(), multiplicities, components })
}

/// Column-pivoted Gram-Schmidt on the columns of a projector. Ties go to the lowest
/// column index.
fn range_basis(projector: &CMatrix, rank: usize) -> Vec<CVector> {
    let n = projector.cols();
    let mut residuals: Vec<CVector> = (0..n).map(|j| projector.column(j)).collect();
    let mut basis: Vec<CVector> = Vec::with_capacity(rank);
    while basis.len() < rank {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(j, r)| (j, r.norm()))
            .fold((0, -1.0), |acc, (j, nrm)| if nrm > acc.1 + 1e-12 { (j, nrm) } else { acc });
        if norm <= 1e-8 {
            break;
        }
        let mut v = residuals[best].scale((1.0 / norm).into());
        // second pass against accumulated rounding
        for b in &basis {
            v = &v - &b.scale(b.inner(&v));
        }
        let v = v.normalized().expect("pivot has positive norm");
        for r in residuals.iter_mut() {
            *r = &*r - &v.scale(v.inner(r));
        }
        basis.push(v);
    }
    basis
}

/// `‖1_p φ‖` for each present label.
pub fn component_norms(dec: &IsotypicDecomposition, phi: &CVector) -> Result<Vec<(usize, f64)>> {
    if phi.dim() != dec.rep().dim() {
        return Err(Error::DimensionMismatch { expected: dec.rep().dim(), found: phi.dim() });
    }
    if !phi.is_normalized(STATE_NORM_TOL) {
        return Err(Error::InvalidInput(format!("state norm {} != 1", phi.norm())));
    }
    Ok(dec.components().iter().map(|c| (c.label, c.projector.mul_vec(phi).norm())).collect())
}

/// Fails with the offending labels when any irrep occurs more than once.
pub fn assert_multiplicity_free(dec: &IsotypicDecomposition) -> Result<()> {
    let repeated: Vec<usize> =
        dec.components().iter().filter(|c| c.multiplicity > 1).map(|c| c.label).collect();
    if repeated.is_empty() {
        Ok(())
    } else {
        Err(Error::RepeatedIrrep(repeated))
    }
}

/// Residuals of the projector identities, useful for reports.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct ProjectorResiduals {
    pub idempotence: f64,
    pub hermiticity: f64,
    pub trace: f64,
    pub completeness: f64,
    pub orthogonality: f64,
    pub commutation: f64,
}

impl ProjectorResiduals {
    pub fn max(&self) -> f64 {
        [self.idempotence, self.hermiticity, self.trace, self.completeness, self.orthogonality, self.commutation]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub fn projector_residuals(dec: &IsotypicDecomposition) -> ProjectorResiduals {
    let d = dec.rep().dim();
    let mut r = ProjectorResiduals::default();
    let mut sum = CMatrix::zeros(d, d);
    for (i, c) in dec.components().iter().enumerate() {
        let p = &c.projector;
        r.idempotence = r.idempotence.max((p * p).max_abs_diff(p));
        r.hermiticity = r.hermiticity.max(p.hermiticity_error());
        r.trace = r.trace.max((p.trace().re - c.subspace_dim() as f64).abs());
        for other in dec.components().iter().skip(i + 1) {
            r.orthogonality = r.orthogonality.max((p * &other.projector).max_abs());
        }
        for u in dec.rep().matrices() {
            r.commutation = r.commutation.max((p * u).max_abs_diff(&(u * p)));
        }
        sum += p;
    }
    r.completeness = sum.max_abs_diff(&CMatrix::identity(d));
    r
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::groups::{cyclic_group, dihedral_group, direct_sum_rep, tensor_product_rep};
    use crate::numerics::CMatrix;

    fn d3_gamma3_squared() -> Representation {
        let g = Arc::new(dihedral_group(3).unwrap());
        let g3 = Representation::irrep(g, 3).unwrap();
        tensor_product_rep(&g3, &g3).unwrap()
    }

    #[test]
    fn gamma3_squared_multiplicities() {
        let dec = isotypic_projectors(&d3_gamma3_squared()).unwrap();
        assert_eq!(dec.multiplicities(), &[(1, 1), (2, 1), (3, 1)]);
        assert!(assert_multiplicity_free(&dec).is_ok());
        assert!(projector_residuals(&dec).max() < 1e-12);
    }

    #[test]
    fn gamma3_squared_singlet_projector() {
        let dec = isotypic_projectors(&d3_gamma3_squared()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let v1 = CVector::from_real(&[h, 0.0, 0.0, h]);
        let v2 = CVector::from_real(&[0.0, h, -h, 0.0]);
        assert!(dec.component(1).unwrap().projector.max_abs_diff(&CMatrix::projector(&v1)) < 1e-12);
        assert!(dec.component(2).unwrap().projector.max_abs_diff(&CMatrix::projector(&v2)) < 1e-12);
        assert!(dec.component(1).unwrap().first_basis_vector().max_abs_diff(&v1) < 1e-12);
    }

    #[test]
    fn cyclic_projectors_are_coordinate_units() {
        let g = Arc::new(cyclic_group(4).unwrap());
        let rep = direct_sum_rep(g.clone(), &g.labels()).unwrap();
        let dec = isotypic_projectors(&rep).unwrap();
        for (i, c) in dec.components().iter().enumerate() {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            assert!(c.projector.max_abs_diff(&CMatrix::diag_real(&e)) < 1e-12);
        }
    }

    #[test]
    fn component_norms_d3_example() {
        let g = Arc::new(dihedral_group(3).unwrap());
        let rep = direct_sum_rep(g, &[1, 2, 3]).unwrap();
        let dec = isotypic_projectors(&rep).unwrap();
        let c = [0.5, -0.5, 0.6, 0.2];
        let phi = CVector::from_real(&c).normalized().unwrap();
        let c: Vec<f64> = phi.as_slice().iter().map(|z| z.re).collect();
        let norms = component_norms(&dec, &phi).unwrap();
        assert!((norms[0].1 - c[0].abs()).abs() < 1e-14);
        assert!((norms[1].1 - c[1].abs()).abs() < 1e-14);
        assert!((norms[2].1 - (c[2] * c[2] + c[3] * c[3]).sqrt()).abs() < 1e-14);

        let inside = CVector::from_real(&[0.0, 0.0, 0.0, 1.0]);
        let norms = component_norms(&dec, &inside).unwrap();
        for (n, e) in norms.iter().zip([0.0, 0.0, 1.0]) {
            assert!((n.1 - e).abs() < 1e-14);
        }
    }

    #[test]
    fn component_norms_equal_weights() {
        let g = Arc::new(dihedral_group(3).unwrap());
        let dec = isotypic_projectors(&direct_sum_rep(g, &[1, 2, 3]).unwrap()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let psi = CVector::from_real(&[s, s, s, 0.0]);
        for (_, n) in component_norms(&dec, &psi).unwrap() {
            assert!((n - s).abs() < 1e-14);
        }
    }

    #[test]
    fn component_norms_errors() {
        let g = Arc::new(cyclic_group(3).unwrap());
        let dec = isotypic_projectors(&direct_sum_rep(g, &[0, 1, 2]).unwrap()).unwrap();
        assert!(matches!(
            component_norms(&dec, &CVector::basis(2, 0)),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(component_norms(&dec, &CVector::from_real(&[1.0, 1.0, 0.0])).is_err());
    }

    #[test]
    fn repeated_trivial_irrep_detected() {
        let g = Arc::new(cyclic_group(2).unwrap());
        let g0 = Representation::irrep(g.clone(), 0).unwrap();
        let twice = Representation::block_sum(&[&g0, &g0]).unwrap();
        let dec = isotypic_projectors(&twice).unwrap();
        assert_eq!(dec.multiplicities(), &[(0, 2), (1, 0)]);
        assert!(matches!(assert_multiplicity_free(&dec), Err(Error::RepeatedIrrep(v)) if v == vec![0]));
        assert_eq!(dec.component(0).unwrap().basis.len(), 2);
    }

    #[test]
    fn single_irrep_is_multiplicity_free() {
        let g = Arc::new(dihedral_group(3).unwrap());
        let dec = isotypic_projectors(&Representation::irrep(g, 3).unwrap()).unwrap();
        assert!(assert_multiplicity_free(&dec).is_ok());
        assert!(dec.component(3).unwrap().projector.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }
}
