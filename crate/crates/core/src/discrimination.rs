//! Minimum-error discrimination of group orbits.
//!
//! For a multiplicity-free representation and a pure input `φ`, the optimal success
//! probability for telling apart `{U(g)|φ⟩}` under uniform priors has the closed form
//! `(Σ_p √(d_p/|G|) ‖φ_p‖)²`, attained by a rank-one covariant POVM. The general
//! iterative solver below knows nothing about groups and serves as an independent
//! check of that formula; its answers are certified with the Holevo optimality
//! conditions rather than trusted.

use serde::Serialize;

use crate::decompose::{assert_multiplicity_free, component_norms, IsotypicDecomposition, STATE_NORM_TOL};
use crate::error::{Error, Result};
use crate::groups::Representation;
use crate::numerics::{check_density, hermitian_eigensystem, psd_floor, psd_pinv_sqrt, CMatrix, CVector, C64};

/// PSD and completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-9;
/// Accepted Holevo certificate floor.
pub const CERTIFICATE_TOL: f64 = 1e-7;
/// Solver stops once the success probability moves less than this between sweeps.
pub const SOLVER_STEP_TOL: f64 = 1e-12;
pub const SOLVER_MAX_ITERATIONS: usize = 10_000;
/// Eigenvalues of the iteration's normalizing operator below this are exact zeros.
pub const PINV_CUTOFF: f64 = 1e-12;
const INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    /// Validates positivity (`λ_min ≥ −1e-9`) and completeness (`‖Σ Π − 1‖_max ≤ 1e-9`).
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let povm = Self { elements };
        povm.validate()?;
        Ok(povm)
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for e in &self.elements {
            sum += e;
        }
        sum.max_abs_diff(&CMatrix::identity(d))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.elements.iter().try_fold(f64::INFINITY, |acc, e| Ok(acc.min(psd_floor(&e.hermitian_part())?)))
    }

    fn validate(&self) -> Result<()> {
        let first = self.elements.first().ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.rows();
        for (i, e) in self.elements.iter().enumerate() {
            if e.rows() != d || e.cols() != d {
                return Err(Error::InvalidPovm(format!("element {i} has the wrong shape")));
            }
            if !e.is_hermitian(POVM_TOL) {
                return Err(Error::InvalidPovm(format!("element {i} is not Hermitian")));
            }
            let floor = psd_floor(&e.hermitian_part())?;
            if floor < -POVM_TOL {
                return Err(Error::InvalidPovm(format!("element {i} has eigenvalue {floor:e}")));
            }
        }
        let err = self.completeness_error();
        if err > POVM_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {err:e}")));
        }
        Ok(())
    }

    /// `Σ_k p_k Tr(ρ_k Π_k)`
    pub fn success_probability(&self, states: &[CMatrix], priors: &[f64]) -> f64 {
        states
            .iter()
            .zip(priors)
            .zip(&self.elements)
            .map(|((rho, p), e)| p * rho.trace_product(e).re)
            .sum()
    }
}

/// A covariant POVM `Π_g = U(g) Π_e U(g)†`, stored through its seed `Π_e`.
#[derive(Debug, Clone)]
pub struct CovariantPovm {
    seed: CMatrix,
    rep: Representation,
}

impl CovariantPovm {
    /// Validates that the expansion over the group is a POVM.
    pub fn new(rep: Representation, seed: CMatrix) -> Result<Self> {
        if seed.rows() != rep.dim() || seed.cols() != rep.dim() {
            return Err(Error::DimensionMismatch { expected: rep.dim(), found: seed.rows() });
        }
        let povm = Self { seed, rep };
        povm.expand()?;
        Ok(povm)
    }

    pub fn seed(&self) -> &CMatrix {
        &self.seed
    }

    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn element(&self, g: usize) -> CMatrix {
        self.seed.conjugate_by(self.rep.matrix(g))
    }

    pub fn expand(&self) -> Result<Povm> {
        Povm::new((0..self.rep.group().order()).map(|g| self.element(g)).collect())
    }

    pub fn completeness_error(&self) -> f64 {
        let d = self.rep.dim();
        let mut sum = CMatrix::zeros(d, d);
        for g in 0..self.rep.group().order() {
            sum += &self.element(g);
        }
        sum.max_abs_diff(&CMatrix::identity(d))
    }

    /// Success probability on the uniform orbit `{U(g) ρ U(g)†}`, which is `Tr(Π_e ρ)`.
    pub fn orbit_success(&self, rho: &CMatrix) -> f64 {
        self.seed.trace_product(rho).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Trivial,
    Helstrom,
    FixedPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscriminationResult {
    pub povm: Povm,
    pub success_probability: f64,
    /// `min_h λ_min(Σ_k p_k ρ_k Π_k − p_h ρ_h)`; non-negative at the optimum.
    pub certificate_floor: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; the best iterate is returned.
    pub converged: bool,
    pub method: SolverMethod,
}

impl DiscriminationResult {
    pub fn certified(&self) -> bool {
        self.converged && self.certificate_floor >= -CERTIFICATE_TOL
    }
}

/// `(Σ_p √(d_p/|G|) ‖φ_p‖)²` for a multiplicity-free representation.
pub fn success_probability_pure(dec: &IsotypicDecomposition, phi: &CVector) -> Result<f64> {
    assert_multiplicity_free(dec)?;
    let order = dec.group_order() as f64;
    let norms = component_norms(dec, phi)?;
    let amp: f64 = dec
        .components()
        .iter()
        .zip(&norms)
        .map(|(c, (_, n))| (c.irrep_dim as f64 / order).sqrt() * n)
        .sum();
    Ok(amp * amp)
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalPureState {
    /// `(label, ‖φ_p‖)` with `‖φ_p‖ = √(d_p / Σ d)`.
    pub weights: Vec<(usize, f64)>,
    /// `Σ_p d_p / |G|`
    pub p_max: f64,
    /// A state attaining `p_max`, built from the first basis vector of each subspace.
    pub state: CVector,
}

pub fn optimal_pure_state(dec: &IsotypicDecomposition) -> Result<OptimalPureState> {
    assert_multiplicity_free(dec)?;
    let total: usize = dec.components().iter().map(|c| c.irrep_dim).sum();
    let weights: Vec<(usize, f64)> =
        dec.components().iter().map(|c| (c.label, (c.irrep_dim as f64 / total as f64).sqrt())).collect();
    let mut state = CVector::zeros(dec.rep().dim());
    for (c, (_, w)) in dec.components().iter().zip(&weights) {
        state = &state + &c.first_basis_vector().scale((*w).into());
    }
    Ok(OptimalPureState { weights, p_max: total as f64 / dec.group_order() as f64, state })
}

/// Robustness of asymmetry from the optimal orbit success probability:
/// `A_R = |G|·P_s − 1`, with round-off below zero clamped.
pub fn robustness_from_ps(ps: f64, group_order: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&ps) || group_order == 0 {
        return Err(Error::OutOfRange(ps));
    }
    let ar = group_order as f64 * ps - 1.0;
    if ar < -1e-9 {
        return Err(Error::OutOfRange(ps));
    }
    Ok(ar.max(0.0))
}

/// Rank-one covariant seed `|X⟩⟨X|` with `X_p = e^{iθ_p} √(d_p/|G|) φ_p/‖φ_p‖`.
/// Components where `φ_p` vanishes fall back to the first basis vector of the subspace.
pub fn build_covariant_povm(dec: &IsotypicDecomposition, phi: &CVector, phases: &[f64]) -> Result<CovariantPovm> {
    assert_multiplicity_free(dec)?;
    if phases.len() != dec.components().len() {
        return Err(Error::CountMismatch { expected: dec.components().len(), found: phases.len() });
    }
    if phi.dim() != dec.rep().dim() {
        return Err(Error::DimensionMismatch { expected: dec.rep().dim(), found: phi.dim() });
    }
    if !phi.is_normalized(STATE_NORM_TOL) {
        return Err(Error::InvalidInput(format!("state norm {} != 1", phi.norm())));
    }
    let order = dec.group_order() as f64;
    let mut x = CVector::zeros(dec.rep().dim());
    for (comp, &theta) in dec.components().iter().zip(phases) {
        let part = comp.projector.mul_vec(phi);
        let dir = if part.norm() > 1e-12 {
            part.normalized().expect("non-zero component")
        } else {
            comp.first_basis_vector().clone()
        };
        let amp = C64::from_polar((comp.irrep_dim as f64 / order).sqrt(), theta);
        x = &x + &dir.scale(amp);
    }
    CovariantPovm::new(dec.rep().clone(), CMatrix::projector(&x))
}

/// Seed `Ω = (1/|G|) Σ_g U(g)† Π̃_g U(g)` of the covariant POVM with the same orbit
/// success probability as `povm` (element `g` is the guess for `U(g) ρ U(g)†`).
pub fn covariantize_povm(rep: &Representation, povm: &Povm) -> Result<CovariantPovm> {
    let order = rep.group().order();
    if povm.len() != order {
        return Err(Error::InvalidPovm(format!("expected {order} elements, found {}", povm.len())));
    }
    if povm.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: povm.dim() });
    }
    povm.validate()?;
    let mut omega = CMatrix::zeros(rep.dim(), rep.dim());
    for (g, e) in povm.elements().iter().enumerate() {
        omega += &e.conjugate_by(&rep.matrix(g).adjoint());
    }
    CovariantPovm::new(rep.clone(), omega.scale_real(1.0 / order as f64).hermitian_part())
}

/// `{U(g) ρ U(g)†}` in element order.
pub fn orbit(rep: &Representation, rho: &CMatrix) -> Vec<CMatrix> {
    rep.matrices().iter().map(|u| rho.conjugate_by(u).hermitian_part()).collect()
}

/// Group twirl `(1/|G|) Σ_g U(g) ρ U(g)†`.
pub fn twirl(rep: &Representation, rho: &CMatrix) -> CMatrix {
    let mut acc = CMatrix::zeros(rho.rows(), rho.cols());
    for s in orbit(rep, rho) {
        acc += &s;
    }
    acc.scale_real(1.0 / rep.group().order() as f64)
}

fn check_ensemble(states: &[CMatrix], priors: &[f64]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    if states.len() != priors.len() {
        return Err(Error::CountMismatch { expected: states.len(), found: priors.len() });
    }
    let d = states[0].rows();
    for (i, s) in states.iter().enumerate() {
        if s.rows() != d || s.cols() != d {
            return Err(Error::InvalidInput(format!("state {i} has the wrong shape")));
        }
        check_density(s, INPUT_TOL).map_err(|e| Error::InvalidInput(format!("state {i}: {e}")))?;
    }
    if priors.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(Error::InvalidInput("priors must be non-negative".into()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > INPUT_TOL {
        return Err(Error::InvalidInput(format!("priors sum to {total}")));
    }
    Ok(())
}

/// `min_h λ_min(H − p_h ρ_h)` with `H` the Hermitian part of `Σ_k p_k ρ_k Π_k`.
pub fn holevo_certificate(states: &[CMatrix], priors: &[f64], povm: &Povm) -> Result<f64> {
    check_ensemble(states, priors)?;
    if povm.len() != states.len() || povm.dim() != states[0].rows() {
        return Err(Error::InvalidInput("POVM does not match the ensemble".into()));
    }
    certificate_unchecked(states, priors, povm.elements())
}

fn certificate_unchecked(states: &[CMatrix], priors: &[f64], elements: &[CMatrix]) -> Result<f64> {
    let d = states[0].rows();
    let mut gamma = CMatrix::zeros(d, d);
    for ((rho, &p), e) in states.iter().zip(priors).zip(elements) {
        gamma += &(rho * e).scale_real(p);
    }
    let gamma = gamma.hermitian_part();
    let mut floor = f64::INFINITY;
    for (rho, &p) in states.iter().zip(priors) {
        floor = floor.min(psd_floor(&(&gamma - &rho.scale_real(p)))?);
    }
    Ok(floor)
}

/// Minimum-error discrimination of an arbitrary ensemble.
///
/// One state is trivial and two states use the Helstrom projective measurement.
/// Larger ensembles run the fixed-point iteration
/// `Π_j ← S^{-1/2} p_j ρ_j Π_j ρ_j p_j S^{-1/2}`, `S = Σ_k p_k² ρ_k Π_k ρ_k`,
/// seeded with the square-root measurement. Whatever part of the identity lies
/// outside the ensemble's support is assigned to the first element.
pub fn solve_min_error(states: &[CMatrix], priors: &[f64]) -> Result<DiscriminationResult> {
    check_ensemble(states, priors)?;
    let states: Vec<CMatrix> = states.iter().map(CMatrix::hermitian_part).collect();
    match states.len() {
        1 => {
            let povm = Povm { elements: vec![CMatrix::identity(states[0].rows())] };
            finish(&states, priors, povm, 0, true, SolverMethod::Trivial)
        }
        2 => helstrom(&states, priors),
        _ => fixed_point(&states, priors),
    }
}

fn finish(
    states: &[CMatrix],
    priors: &[f64],
    povm: Povm,
    iterations: usize,
    converged: bool,
    method: SolverMethod,
) -> Result<DiscriminationResult> {
    let success_probability = povm.success_probability(states, priors);
    let certificate_floor = certificate_unchecked(states, priors, povm.elements())?;
    Ok(DiscriminationResult { povm, success_probability, certificate_floor, iterations, converged, method })
}

fn helstrom(states: &[CMatrix], priors: &[f64]) -> Result<DiscriminationResult> {
    let d = states[0].rows();
    let diff = &states[0].scale_real(priors[0]) - &states[1].scale_real(priors[1]);
    let es = hermitian_eigensystem(&diff.hermitian_part())?;
    let positive = es.map(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let rest = &CMatrix::identity(d) - &positive;
    finish(states, priors, Povm { elements: vec![positive, rest] }, 0, true, SolverMethod::Helstrom)
}

fn fixed_point(states: &[CMatrix], priors: &[f64]) -> Result<DiscriminationResult> {
    let d = states[0].rows();
    let weighted: Vec<CMatrix> = states.iter().zip(priors).map(|(s, &p)| s.scale_real(p)).collect();

    let mut total = CMatrix::zeros(d, d);
    for w in &weighted {
        total += w;
    }
    let (inv_sqrt, _) = psd_pinv_sqrt(&total.hermitian_part(), PINV_CUTOFF)?;
    let mut elements: Vec<CMatrix> = weighted.iter().map(|w| w.conjugate_by(&inv_sqrt).hermitian_part()).collect();
    complete(&mut elements);

    let success = |els: &[CMatrix]| -> f64 { weighted.iter().zip(els).map(|(w, e)| w.trace_product(e).re).sum() };
    let mut current = success(&elements);
    let mut best = (current, elements.clone());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < SOLVER_MAX_ITERATIONS {
        iterations += 1;
        let sandwiched: Vec<CMatrix> = weighted.iter().zip(&elements).map(|(w, e)| &(w * e) * w).collect();
        let mut s = CMatrix::zeros(d, d);
        for m in &sandwiched {
            s += m;
        }
        let (r, _) = psd_pinv_sqrt(&s.hermitian_part(), PINV_CUTOFF)?;
        elements = sandwiched.iter().map(|m| m.conjugate_by(&r).hermitian_part()).collect();
        complete(&mut elements);
        let next = success(&elements);
        if next > best.0 {
            best = (next, elements.clone());
        }
        let step = (next - current).abs();
        current = next;
        if step < SOLVER_STEP_TOL {
            converged = true;
            break;
        }
    }
    finish(states, priors, Povm { elements: best.1 }, iterations, converged, SolverMethod::FixedPoint)
}

/// Adds `1 − Σ Π` (the unsupported remainder) to the first element.
fn complete(elements: &mut [CMatrix]) {
    let d = elements[0].rows();
    let mut sum = CMatrix::zeros(d, d);
    for e in elements.iter() {
        sum += e;
    }
    let rest = (&CMatrix::identity(d) - &sum).hermitian_part();
    elements[0] += &rest;
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::decompose::isotypic_projectors;
    use crate::groups::{cyclic_group, dihedral_group, direct_sum_rep};

    fn d3_full() -> IsotypicDecomposition {
        let g = Arc::new(dihedral_group(3).unwrap());
        isotypic_projectors(&direct_sum_rep(g, &[1, 2, 3]).unwrap()).unwrap()
    }

    fn cyclic_full(n: usize) -> IsotypicDecomposition {
        let g = Arc::new(cyclic_group(n).unwrap());
        let labels = g.labels();
        isotypic_projectors(&direct_sum_rep(g, &labels).unwrap()).unwrap()
    }

    fn pure(v: &CVector) -> CMatrix {
        CMatrix::projector(v)
    }

    #[test]
    fn closed_form_d3_optimum() {
        let dec = d3_full();
        let h = 0.5f64;
        let phi = CVector::from_real(&[h, h, 1.0 / 2f64.sqrt(), 0.0]);
        assert!((success_probability_pure(&dec, &phi).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_equal_norms() {
        let dec = d3_full();
        let s = 1.0 / 3f64.sqrt();
        let phi = CVector::from_real(&[s, s, 0.0, s]);
        let expected = (3.0 + 2.0 * 2f64.sqrt()) / 9.0;
        assert!((success_probability_pure(&dec, &phi).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.647_603_0).abs() < 1e-7);
    }

    #[test]
    fn closed_form_random_guess() {
        let dec = cyclic_full(2);
        let p = success_probability_pure(&dec, &CVector::from_real(&[1.0, 0.0])).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn optimal_state_weights() {
        let opt = optimal_pure_state(&d3_full()).unwrap();
        let w: Vec<f64> = opt.weights.iter().map(|x| x.1).collect();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
        assert!((w[2] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((opt.p_max - 2.0 / 3.0).abs() < 1e-15);
        assert!((success_probability_pure(&d3_full(), &opt.state).unwrap() - opt.p_max).abs() < 1e-14);

        let opt = optimal_pure_state(&cyclic_full(5)).unwrap();
        assert!((opt.p_max - 1.0).abs() < 1e-15);
        assert!(opt.weights.iter().all(|w| (w.1 - 5f64.sqrt().recip()).abs() < 1e-15));

        let g = Arc::new(dihedral_group(3).unwrap());
        let single = isotypic_projectors(&Representation::irrep(g, 3).unwrap()).unwrap();
        let opt = optimal_pure_state(&single).unwrap();
        assert_eq!(opt.weights, vec![(3, 1.0)]);
        assert!((opt.p_max - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn robustness_examples() {
        assert!(robustness_from_ps(1.0 / 6.0, 6).unwrap().abs() < 1e-15);
        assert!((robustness_from_ps(2.0 / 3.0, 6).unwrap() - 3.0).abs() < 1e-14);
        assert!((robustness_from_ps(1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(robustness_from_ps(1.5, 2), Err(Error::OutOfRange(_))));
        assert!(matches!(robustness_from_ps(-0.1, 2), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn covariant_povm_attains_closed_form() {
        let dec = d3_full();
        let opt = optimal_pure_state(&dec).unwrap();
        let povm = build_covariant_povm(&dec, &opt.state, &[0.0; 3]).unwrap();
        assert!(povm.completeness_error() < 1e-12);
        assert!((povm.orbit_success(&pure(&opt.state)) - 2.0 / 3.0).abs() < 1e-14);
        let order = dec.group_order() as f64;
        for c in dec.components() {
            let tr = (&(&c.projector * povm.seed()) * &c.projector).trace().re;
            assert!((tr - c.irrep_dim as f64 / order).abs() < 1e-14);
        }
    }

    #[test]
    fn covariant_povm_c2_plus_state() {
        let dec = cyclic_full(2);
        let h = 0.5f64.sqrt();
        let plus = CVector::from_real(&[h, h]);
        let povm = build_covariant_povm(&dec, &plus, &[0.0, 0.0]).unwrap();
        assert!(povm.seed().max_abs_diff(&pure(&plus)) < 1e-15);
        assert!((povm.orbit_success(&pure(&plus)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn covariant_povm_zero_component_fallback() {
        let dec = d3_full();
        let phi = CVector::basis(4, 0);
        let povm = build_covariant_povm(&dec, &phi, &[0.3, 1.0, -2.0]).unwrap();
        assert!(povm.completeness_error() < 1e-12);
        assert!((povm.orbit_success(&pure(&phi)) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn covariantize_fixed_point_and_guessing() {
        let dec = d3_full();
        let rep = dec.rep().clone();
        let opt = optimal_pure_state(&dec).unwrap();
        let cov = build_covariant_povm(&dec, &opt.state, &[0.0; 3]).unwrap();
        let again = covariantize_povm(&rep, &cov.expand().unwrap()).unwrap();
        assert!(again.seed().max_abs_diff(cov.seed()) < 1e-12);

        let guess = Povm::new(vec![CMatrix::identity(4).scale_real(1.0 / 6.0); 6]).unwrap();
        let cov = covariantize_povm(&rep, &guess).unwrap();
        assert!(cov.seed().max_abs_diff(&CMatrix::identity(4).scale_real(1.0 / 6.0)) < 1e-15);
        assert!((cov.orbit_success(&pure(&opt.state)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn covariantize_rejects_wrong_size() {
        let dec = d3_full();
        let povm = Povm::new(vec![CMatrix::identity(4)]).unwrap();
        assert!(matches!(covariantize_povm(dec.rep(), &povm), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn invalid_povm_rejected() {
        assert!(Povm::new(vec![CMatrix::identity(2).scale_real(0.6); 2]).is_err());
        assert!(Povm::new(vec![CMatrix::diag_real(&[1.5, 0.5]), CMatrix::diag_real(&[-0.5, 0.5])]).is_err());
    }

    #[test]
    fn solver_orthogonal_pair() {
        let a = pure(&CVector::basis(2, 0));
        let b = pure(&CVector::basis(2, 1));
        let r = solve_min_error(&[a, b], &[0.5, 0.5]).unwrap();
        assert!((r.success_probability - 1.0).abs() < 1e-15);
        assert!(r.certified());
    }

    #[test]
    fn solver_helstrom_pair() {
        let h = 0.5f64.sqrt();
        let a = pure(&CVector::basis(2, 0));
        let b = pure(&CVector::from_real(&[h, h]));
        let r = solve_min_error(&[a, b], &[0.5, 0.5]).unwrap();
        let expected = 0.5 * (1.0 + 0.5f64.sqrt());
        assert!((r.success_probability - expected).abs() < 1e-14);
        assert!(r.certificate_floor >= -1e-9);
        assert_eq!(r.method, SolverMethod::Helstrom);
    }

    #[test]
    fn fixed_point_matches_helstrom_on_pairs() {
        // Three states where the third has zero prior reduce to a pair.
        let h = 0.5f64.sqrt();
        let a = pure(&CVector::basis(2, 0));
        let b = pure(&CVector::from_real(&[h, h]));
        let c = pure(&CVector::basis(2, 1));
        let r = solve_min_error(&[a, b, c], &[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(r.method, SolverMethod::FixedPoint);
        assert!((r.success_probability - 0.5 * (1.0 + 0.5f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn solver_d3_orbit_of_optimal_state() {
        let dec = d3_full();
        let opt = optimal_pure_state(&dec).unwrap();
        let states = orbit(dec.rep(), &pure(&opt.state));
        let r = solve_min_error(&states, &[1.0 / 6.0; 6]).unwrap();
        assert!((r.success_probability - 2.0 / 3.0).abs() < 1e-6, "{}", r.success_probability);
        assert!(r.certified(), "floor {}", r.certificate_floor);
    }

    #[test]
    fn certificate_of_optimal_covariant_povm() {
        let dec = d3_full();
        let opt = optimal_pure_state(&dec).unwrap();
        let states = orbit(dec.rep(), &pure(&opt.state));
        let cov = build_covariant_povm(&dec, &opt.state, &[0.0; 3]).unwrap();
        let floor = holevo_certificate(&states, &[1.0 / 6.0; 6], &cov.expand().unwrap()).unwrap();
        assert!(floor >= -1e-7, "{floor}");
    }

    #[test]
    fn certificate_rejects_random_guessing() {
        let h = 0.5f64.sqrt();
        let states = vec![pure(&CVector::basis(2, 0)), pure(&CVector::from_real(&[h, h]))];
        let guess = Povm::new(vec![CMatrix::identity(2).scale_real(0.5); 2]).unwrap();
        assert!(holevo_certificate(&states, &[0.5, 0.5], &guess).unwrap() < -1e-3);
    }

    #[test]
    fn solver_rejects_bad_input() {
        let a = CMatrix::diag_real(&[0.7, 0.7]);
        assert!(matches!(solve_min_error(&[a], &[1.0]), Err(Error::InvalidInput(_))));
        let a = pure(&CVector::basis(2, 0));
        assert!(solve_min_error(&[a.clone(), a], &[0.7, 0.7]).is_err());
    }

    #[test]
    fn twirl_is_invariant() {
        let dec = d3_full();
        let rho = pure(&CVector::from_real(&[0.5, 0.5, 0.5, 0.5]));
        let t = twirl(dec.rep(), &rho);
        for u in dec.rep().matrices() {
            assert!(t.conjugate_by(u).max_abs_diff(&t) < 1e-14);
        }
        let states = orbit(dec.rep(), &t);
        let r = solve_min_error(&states, &[1.0 / 6.0; 6]).unwrap();
        assert!((r.success_probability - 1.0 / 6.0).abs() < 1e-9);
    }
}
