//! l1 coherence and its equivalence with cyclic-group discrimination.
//!
//! For the regular representation of `C_n` every irrep is one-dimensional, so the
//! success probability for a pure state is `P_s = (1/n)(Σ_p |c_p|)²` in the irrep
//! basis. Expanding the square gives
//!
//! ```text
//! n·(P_s − 1/n) = Σ_{p≠q} |ρ_pq| = C_l1(ρ)
//! ```
//!
//! The factor `n` on the left is forced by the algebra; the relation is checked in
//! this form.

use std::sync::Arc;

use serde::Serialize;

use crate::decompose::isotypic_projectors;
use crate::discrimination::success_probability_pure;
use crate::error::{Error, Result};
use crate::groups::{cyclic_group, direct_sum_rep};
use crate::numerics::{check_density, CMatrix, CVector};

const DENSITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceResult {
    pub c_l1: f64,
    pub basis_dim: usize,
    /// `P_s − 1/n`
    pub ps_minus_guess: f64,
    /// `n·(P_s − 1/n) − C_l1`, zero up to rounding.
    pub ratio_check: f64,
}

/// `Σ_{p≠q} |ρ_pq|`
pub fn l1_coherence(rho: &CMatrix, n: usize) -> Result<f64> {
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::InvalidDensity(format!("expected {n}×{n}, found {}×{}", rho.rows(), rho.cols())));
    }
    check_density(rho, DENSITY_TOL).map_err(|e| Error::InvalidDensity(e.to_string()))?;
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                total += rho[(p, q)].norm();
            }
        }
    }
    Ok(total)
}

/// Compares `P_s` for the full regular representation of `C_n` with `C_l1(|φ⟩⟨φ|)`.
/// The direct sum `Γ_0 ⊕ … ⊕ Γ_{n−1}` is diagonal, so its irrep basis is the
/// computational basis.
pub fn cyclic_equivalence_check(n: usize, phi: &CVector) -> Result<CoherenceResult> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("cyclic order must be at least 2, got {n}")));
    }
    if phi.dim() != n {
        return Err(Error::InvalidInput(format!("state has dimension {}, expected {n}", phi.dim())));
    }
    if !phi.is_normalized(1e-10) {
        return Err(Error::InvalidInput(format!("state has norm {}", phi.norm())));
    }
    let group = Arc::new(cyclic_group(n)?);
    let labels: Vec<usize> = (0..n).collect();
    let dec = isotypic_projectors(&direct_sum_rep(group, &labels)?)?;
    let ps = success_probability_pure(&dec, phi)?;
    let c_l1 = l1_coherence(&CMatrix::projector(phi), n)?;
    let ps_minus_guess = ps - 1.0 / n as f64;
    Ok(CoherenceResult { c_l1, basis_dim: n, ps_minus_guess, ratio_check: n as f64 * ps_minus_guess - c_l1 })
}
