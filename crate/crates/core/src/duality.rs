//! Tagged states and the channel-discrimination / tag-discrimination duality.
//!
//! A multiplicity-free representation `U = ⊕_{p=1}^N Γ_p` acts on the system; each
//! invariant subspace is tagged by an ancilla state `|η_p⟩`, giving
//! `|Ψ⟩ = N^{-1/2} Σ_p |u_p⟩|η_p⟩`. Two success probabilities compete: telling the
//! channels `U(g)` apart from the reduced system state (`P_Ug`), and telling the tags
//! apart from the reduced ancilla state (`P_Hp`). They satisfy
//!
//! ```text
//! (P_Ug − D)² + (P_Hp − 1/N)² ≤ M̃ (1 − 1/N)²
//! ```
//!
//! with `D = Σ_p d_p / (N|G|)` and `M̃ = 1 + max_{p≠p'} max(N² d_p d_p' / |G|² − 1, 0)`.
//!
//! `M̃` bounds the maximum `M` of `1 + (N² d_p d_p'/|G|² − 1)|⟨η_p|η_p'⟩|²` over tag sets.
//! The bracket is affine in the squared overlap, and both overlap extremes 0 and 1 are
//! realized by valid ensembles, so `M = M̃`; the report uses `M̃` throughout.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::decompose::{assert_multiplicity_free, IsotypicDecomposition};
use crate::discrimination::{
    build_covariant_povm, covariantize_povm, orbit, solve_min_error,
};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigensystem, kron, partial_trace_first, CMatrix, CVector, C64};
use crate::random::{random_unit_vector, sample_rng};

/// Normalization tolerance for tags.
pub const TAG_NORM_TOL: f64 = 1e-12;
/// Tolerance for the duality inequality and the probability ordering.
pub const DUALITY_TOL: f64 = 1e-9;
const SUBSPACE_TOL: f64 = 1e-10;
const PHASE_SWEEPS: usize = 500;

/// Ancilla tags `{|η_p⟩}` with Gram matrix `G_pq = ⟨η_p|η_q⟩`.
#[derive(Debug, Clone)]
pub struct TagEnsemble {
    tags: Vec<CVector>,
    gram: CMatrix,
}

impl TagEnsemble {
    pub fn new(tags: Vec<CVector>) -> Result<Self> {
        let first = tags.first().ok_or_else(|| Error::InvalidInput("no tags".into()))?;
        let dim = first.dim();
        for (p, t) in tags.iter().enumerate() {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: t.dim() });
            }
            if !t.is_normalized(TAG_NORM_TOL) {
                return Err(Error::InvalidInput(format!("tag {p} has norm {}", t.norm())));
            }
        }
        let n = tags.len();
        let gram = CMatrix::from_fn(n, n, |p, q| tags[p].inner(&tags[q]));
        Ok(Self { tags, gram })
    }

    /// Normalizes each vector first; zero vectors are rejected.
    pub fn from_unnormalized(tags: Vec<CVector>) -> Result<Self> {
        let tags = tags
            .into_iter()
            .enumerate()
            .map(|(p, t)| t.normalized().ok_or_else(|| Error::InvalidInput(format!("tag {p} is zero"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tags)
    }

    /// `N` orthonormal tags in dimension `N`.
    pub fn orthogonal(n: usize) -> Self {
        Self::new((0..n).map(|p| CVector::basis(n, p)).collect()).expect("basis vectors")
    }

    /// `N` copies of the first basis vector of an `amb_dim`-dimensional ancilla.
    pub fn identical(n: usize, amb_dim: usize) -> Self {
        Self::new(vec![CVector::basis(amb_dim, 0); n]).expect("basis vectors")
    }

    /// Tags with every pairwise overlap equal to `overlap ∈ [0, 1]`:
    /// `|η_p⟩ = √t |0⟩ + √(1−t) |p+1⟩` in dimension `N + 1`.
    pub fn uniform_overlap(n: usize, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::OutOfRange(overlap));
        }
        let a = overlap.sqrt();
        let b = (1.0 - overlap).sqrt();
        Self::new(
            (0..n)
                .map(|p| {
                    let mut v = CVector::basis(n + 1, 0).scale(a.into());
                    v[p + 1] = b.into();
                    v
                })
                .collect(),
        )
    }

    /// Block embedding `√(1−t) |η_p⟩ ⊕ √t |p⟩`, which scales every overlap by `1 − t`:
    /// `t = 0` returns the ensemble itself and `t = 1` an orthonormal set.
    pub fn interpolate_to_orthogonal(&self, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(t));
        }
        let n = self.n();
        let a = (1.0 - t).sqrt();
        let b = t.sqrt();
        Self::new(
            self.tags
                .iter()
                .enumerate()
                .map(|(p, eta)| {
                    let mut data: Vec<C64> = eta.as_slice().iter().map(|&z| z * a).collect();
                    data.extend((0..n).map(|q| if q == p { C64::new(b, 0.0) } else { C64::new(0.0, 0.0) }));
                    CVector::new(data)
                })
                .collect(),
        )
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, amb_dim: usize) -> Self {
        Self::new((0..n).map(|_| random_unit_vector(rng, amb_dim)).collect()).expect("unit vectors")
    }

    pub fn n(&self) -> usize {
        self.tags.len()
    }

    pub fn amb_dim(&self) -> usize {
        self.tags[0].dim()
    }

    pub fn tags(&self) -> &[CVector] {
        &self.tags
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// `⟨η_p|η_q⟩`
    pub fn overlap(&self, p: usize, q: usize) -> C64 {
        self.gram[(p, q)]
    }

    /// `1 − |⟨η_p|η_q⟩|²`, computed as `Σ_{i<j} |a_i b_j − a_j b_i|²` so that parallel
    /// tags give exactly zero instead of rounding noise amplified by a square root.
    pub fn distinguishability_sqr(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (self.tags[p].as_slice(), self.tags[q].as_slice());
        let mut total = 0.0;
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                total += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
            }
        }
        (total / (self.tags[p].norm_sqr() * self.tags[q].norm_sqr())).clamp(0.0, 1.0)
    }

    pub fn max_abs_overlap(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    m = m.max(self.gram[(p, q)].norm());
                }
            }
        }
        m
    }
}

/// `|Ψ⟩ = N^{-1/2} Σ_p |u_p⟩|η_p⟩` together with its ingredients.
#[derive(Debug, Clone)]
pub struct TaggedState {
    dec: IsotypicDecomposition,
    unit_components: Vec<CVector>,
    tags: TagEnsemble,
    joint: CVector,
}

/// The first basis vector of each invariant subspace, in label order.
pub fn default_unit_components(dec: &IsotypicDecomposition) -> Vec<CVector> {
    dec.components().iter().map(|c| c.first_basis_vector().clone()).collect()
}

pub fn build_tagged_state(
    dec: &IsotypicDecomposition,
    unit_components: Vec<CVector>,
    tags: TagEnsemble,
) -> Result<TaggedState> {
    assert_multiplicity_free(dec)?;
    let n = dec.components().len();
    if unit_components.len() != n {
        return Err(Error::CountMismatch { expected: n, found: unit_components.len() });
    }
    if tags.n() != n {
        return Err(Error::CountMismatch { expected: n, found: tags.n() });
    }
    let d = dec.rep().dim();
    for (i, (u, comp)) in unit_components.iter().zip(dec.components()).enumerate() {
        if u.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: u.dim() });
        }
        if !u.is_normalized(SUBSPACE_TOL) {
            return Err(Error::InvalidInput(format!("unit component {i} has norm {}", u.norm())));
        }
        let outside = (u - &comp.projector.mul_vec(u)).norm();
        if outside > SUBSPACE_TOL {
            return Err(Error::SubspaceViolation(comp.label, outside));
        }
    }
    let joint = tag_vectors(&unit_components, &tags);
    Ok(TaggedState { dec: dec.clone(), unit_components, tags, joint })
}

fn tag_vectors(components: &[CVector], tags: &TagEnsemble) -> CVector {
    let n = components.len();
    let mut joint = CVector::zeros(components[0].dim() * tags.amb_dim());
    for (u, eta) in components.iter().zip(tags.tags()) {
        joint = &joint + &u.kron(eta);
    }
    joint.scale((1.0 / (n as f64).sqrt()).into())
}

impl TaggedState {
    pub fn decomposition(&self) -> &IsotypicDecomposition {
        &self.dec
    }

    pub fn unit_components(&self) -> &[CVector] {
        &self.unit_components
    }

    pub fn tags(&self) -> &TagEnsemble {
        &self.tags
    }

    pub fn joint(&self) -> &CVector {
        &self.joint
    }

    pub fn n(&self) -> usize {
        self.unit_components.len()
    }

    pub fn system_dim(&self) -> usize {
        self.dec.rep().dim()
    }

    /// `(U(g) ⊗ 1)|Ψ⟩`
    pub fn after_channel(&self, g: usize) -> CVector {
        let u = kron(self.dec.rep().matrix(g), &CMatrix::identity(self.tags.amb_dim()));
        u.mul_vec(&self.joint)
    }

    /// Tags applied to `U(g)|u_p⟩`, i.e. the channel acting before the tagging gate.
    pub fn tagged_after_channel(&self, g: usize) -> CVector {
        let u = self.dec.rep().matrix(g);
        let moved: Vec<CVector> = self.unit_components.iter().map(|c| u.mul_vec(c)).collect();
        tag_vectors(&moved, &self.tags)
    }

    /// The (untagged) system state `N^{-1/2} Σ_p |u_p⟩`.
    pub fn untagged_state(&self) -> CVector {
        let mut psi = CVector::zeros(self.system_dim());
        for u in &self.unit_components {
            psi = &psi + u;
        }
        psi.scale((1.0 / (self.n() as f64).sqrt()).into())
    }

    /// `ρ_e = (1/N) Σ_{p,p'} |u_p⟩⟨u_p'| ⟨η_p'|η_p⟩`
    pub fn rho_e(&self) -> CMatrix {
        let n = self.n();
        let d = self.system_dim();
        let mut rho = CMatrix::zeros(d, d);
        for p in 0..n {
            for q in 0..n {
                let w = self.tags.overlap(q, p) / n as f64;
                rho += &CMatrix::outer(&self.unit_components[p], &self.unit_components[q]).scale(w);
            }
        }
        rho.hermitian_part()
    }
}

/// `ρ_g = U(g) ρ_e U(g)†`
pub fn reduced_system_state(ts: &TaggedState, g: usize) -> Result<CMatrix> {
    let order = ts.dec.group_order();
    if g >= order {
        return Err(Error::InvalidInput(format!("element {g} out of range for order {order}")));
    }
    Ok(ts.rho_e().conjugate_by(ts.dec.rep().matrix(g)).hermitian_part())
}

/// `Tr_S |Ψ⟩⟨Ψ|`, which equals `(1/N) Σ_p |η_p⟩⟨η_p|`.
pub fn reduced_ancilla_state(ts: &TaggedState) -> CMatrix {
    ancilla_of(&ts.joint, ts.system_dim(), ts.tags.amb_dim())
}

/// `Tr_S |v⟩⟨v|` for a joint vector.
pub fn ancilla_of(joint: &CVector, sys_dim: usize, amb_dim: usize) -> CMatrix {
    partial_trace_first(&CMatrix::projector(joint), sys_dim, amb_dim)
}

/// `D = Σ_p d_p / (N|G|)`, the channel success probability with orthogonal tags.
pub fn baseline_d(dec: &IsotypicDecomposition) -> Result<f64> {
    assert_multiplicity_free(dec)?;
    let n = dec.components().len() as f64;
    let total: usize = dec.components().iter().map(|c| c.irrep_dim).sum();
    Ok(total as f64 / (n * dec.group_order() as f64))
}

/// `M̃ = 1 + max_{p≠p'} max(N² d_p d_p' / |G|² − 1, 0)`
pub fn m_tilde(dec: &IsotypicDecomposition) -> Result<f64> {
    assert_multiplicity_free(dec)?;
    let dims: Vec<usize> = dec.components().iter().map(|c| c.irrep_dim).collect();
    m_tilde_from_dims(&dims, dec.group_order())
}

/// `M̃` from the irrep dimensions of the `N` subspaces and the group order.
pub fn m_tilde_from_dims(dims: &[usize], order: usize) -> Result<f64> {
    if dims.len() < 2 {
        return Err(Error::NeedTwoSubspaces);
    }
    let n = dims.len() as f64;
    let order = order as f64;
    let mut excess = 0.0f64;
    for (i, &a) in dims.iter().enumerate() {
        for &b in &dims[i + 1..] {
            excess = excess.max(n * n * (a * b) as f64 / (order * order) - 1.0);
        }
    }
    Ok(1.0 + excess)
}

/// Upper bound on `P_Ug`: `(1/(N|G|)) Σ_{p,p'} √(d_p d_p') |⟨η_p'|η_p⟩|`.
pub fn channel_disc_bound(ts: &TaggedState) -> f64 {
    let comps = ts.dec.components();
    let n = comps.len();
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            total += ((comps[p].irrep_dim * comps[q].irrep_dim) as f64).sqrt() * ts.tags.overlap(q, p).norm();
        }
    }
    total / (n as f64 * ts.dec.group_order() as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelDiscrimination {
    /// Larger of the two routes below.
    pub p_ug: f64,
    /// Phases `θ_p` of the best rank-one seed.
    pub phases: Vec<f64>,
    /// `Tr(Π_e ρ_e)` for the rank-one seed with optimized phases.
    pub rank_one: f64,
    /// General solver on the orbit `{ρ_g}`, followed by covariantization.
    pub solver: f64,
    pub solver_certificate_floor: f64,
    pub solver_certified: bool,
}

/// Channel discrimination with the reduced system state, by two routes: a rank-one
/// covariant seed with optimized relative phases and the general solver on the orbit.
pub fn channel_disc_achieved(ts: &TaggedState) -> Result<ChannelDiscrimination> {
    let rho_e = ts.rho_e();
    let phases = optimize_phases(ts);
    let seed = build_covariant_povm(&ts.dec, &ts.untagged_state(), &phases)?;
    let rank_one = seed.orbit_success(&rho_e);

    let order = ts.dec.group_order();
    let states = orbit(ts.dec.rep(), &rho_e);
    let priors = vec![1.0 / order as f64; order];
    let result = solve_min_error(&states, &priors)?;
    let covariant = covariantize_povm(ts.dec.rep(), &result.povm)?;
    let solver = covariant.orbit_success(&rho_e);

    Ok(ChannelDiscrimination {
        p_ug: rank_one.max(solver),
        phases,
        rank_one,
        solver,
        solver_certificate_floor: result.certificate_floor,
        solver_certified: result.certified(),
    })
}

/// Maximizes `z† K z` over unit-modulus `z`, with `K_pq = √(d_p d_q) ⟨η_q|η_p⟩`.
///
/// Three starts (all zero, greedy by conditional expectation, phases of the leading
/// eigenvector of `K`) are each refined by exact coordinate ascent; every coordinate
/// update is a closed-form maximization. The greedy start alone already guarantees
/// a value of at least `D`, the average over independent uniform phases.
fn optimize_phases(ts: &TaggedState) -> Vec<f64> {
    let comps = ts.dec.components();
    let n = comps.len();
    let k = CMatrix::from_fn(n, n, |p, q| {
        ((comps[p].irrep_dim * comps[q].irrep_dim) as f64).sqrt() * ts.tags.overlap(q, p)
    });
    let value = |z: &[C64]| -> f64 {
        let mut v = C64::new(0.0, 0.0);
        for p in 0..n {
            for q in 0..n {
                v += z[p].conj() * k[(p, q)] * z[q];
            }
        }
        v.re
    };
    let unit = |w: C64| if w.norm() > 1e-300 { w / w.norm() } else { C64::new(1.0, 0.0) };
    let field = |z: &[C64], q: usize, upto: usize| -> C64 {
        (0..upto).filter(|&p| p != q).map(|p| k[(q, p)] * z[p]).sum()
    };

    let mut starts: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0); n]];
    let mut greedy = vec![C64::new(1.0, 0.0); n];
    for q in 1..n {
        greedy[q] = unit(field(&greedy, q, q));
    }
    starts.push(greedy);
    if let Ok(es) = hermitian_eigensystem(&k.hermitian_part()) {
        let top = es.eigenvectors.column(n - 1);
        starts.push(top.as_slice().iter().map(|&w| unit(w)).collect());
    }

    let mut best: Option<(f64, Vec<C64>)> = None;
    for mut z in starts {
        let mut current = value(&z);
        for _ in 0..PHASE_SWEEPS {
            for q in 0..n {
                let b = field(&z, q, n);
                if b.norm() > 1e-300 {
                    z[q] = b / b.norm();
                }
            }
            let next = value(&z);
            let gain = next - current;
            current = next;
            if gain <= 1e-15 * current.abs().max(1.0) {
                break;
            }
        }
        if best.as_ref().is_none_or(|(v, _)| current > *v) {
            best = Some((current, z));
        }
    }
    best.expect("at least one start").1.iter().map(|z| z.arg()).collect()
}

/// `1/N + (1/N²) Σ_{p≠p'} √(1 − |⟨η_p|η_p'⟩|²)`
pub fn tag_disc_bound(tags: &TagEnsemble) -> Result<f64> {
    let n = tags.n();
    if n < 2 {
        return Err(Error::NeedTwoSubspaces);
    }
    let mut total = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                total += tags.distinguishability_sqr(p, q).sqrt();
            }
        }
    }
    let nf = n as f64;
    Ok(1.0 / nf + total / (nf * nf))
}

#[derive(Debug, Clone, Serialize)]
pub struct TagDiscrimination {
    pub p_hp: f64,
    pub certificate_floor: f64,
    pub certified: bool,
}

/// Optimal minimum-error discrimination of the uniform tag ensemble: Helstrom's
/// formula for two tags, the certified solver otherwise.
pub fn tag_disc_achieved(tags: &TagEnsemble) -> Result<TagDiscrimination> {
    let n = tags.n();
    if n < 2 {
        return Err(Error::NeedTwoSubspaces);
    }
    if n == 2 {
        let p_hp = 0.5 * (1.0 + tags.distinguishability_sqr(0, 1).sqrt());
        return Ok(TagDiscrimination { p_hp, certificate_floor: 0.0, certified: true });
    }
    let states: Vec<CMatrix> = tags.tags().iter().map(CMatrix::projector).collect();
    let r = solve_min_error(&states, &vec![1.0 / n as f64; n])?;
    Ok(TagDiscrimination { p_hp: r.success_probability, certificate_floor: r.certificate_floor, certified: r.certified() })
}

/// `‖v_pp'‖` for one unordered pair of subspaces.
#[derive(Debug, Clone, Serialize)]
pub struct PairNorm {
    pub p: usize,
    pub q: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub n_subspaces: usize,
    pub group_order: usize,
    pub amb_dim: usize,
    pub max_abs_overlap: f64,
    pub d_baseline: f64,
    pub m_tilde: f64,
    pub p_ug_bound: f64,
    pub p_ug_achieved: f64,
    pub p_ug_rank_one: f64,
    pub p_ug_solver: f64,
    /// `p_ug_bound − p_ug_achieved`; positive when the overlap phases cannot all be aligned.
    pub p_ug_gap: f64,
    pub phases: Vec<f64>,
    pub p_hp_bound: f64,
    pub p_hp_achieved: f64,
    /// `(P_Ug − D)² + (P_Hp − 1/N)²` from the achieved values.
    pub lhs: f64,
    /// `M̃ (1 − 1/N)²`
    pub rhs: f64,
    pub slack: f64,
    pub inequality_holds: bool,
    /// Both solver runs converged with a valid optimality certificate.
    pub certified: bool,
    pub v_norms: Vec<PairNorm>,
}

pub fn duality_report(ts: &TaggedState) -> Result<DualityReport> {
    let n = ts.n();
    if n < 2 {
        return Err(Error::NeedTwoSubspaces);
    }
    let comps = ts.dec.components();
    let order = ts.dec.group_order() as f64;
    let nf = n as f64;
    let d_baseline = baseline_d(&ts.dec)?;
    let m_tilde = m_tilde(&ts.dec)?;
    let channel = channel_disc_achieved(ts)?;
    let tag = tag_disc_achieved(&ts.tags)?;
    let lhs = (channel.p_ug - d_baseline).powi(2) + (tag.p_hp - 1.0 / nf).powi(2);
    let rhs = m_tilde * (1.0 - 1.0 / nf).powi(2);
    let slack = rhs - lhs;

    let mut v_norms = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            let o = ts.tags.overlap(p, q).norm();
            let a = ts.tags.distinguishability_sqr(p, q).sqrt() / nf;
            let b = ((comps[p].irrep_dim * comps[q].irrep_dim) as f64).sqrt() / order * o;
            v_norms.push(PairNorm { p: comps[p].label, q: comps[q].label, norm: a.hypot(b) });
        }
    }

    let p_ug_bound = channel_disc_bound(ts);
    Ok(DualityReport {
        n_subspaces: n,
        group_order: ts.dec.group_order(),
        amb_dim: ts.tags.amb_dim(),
        max_abs_overlap: ts.tags.max_abs_overlap(),
        d_baseline,
        m_tilde,
        p_ug_bound,
        p_ug_gap: p_ug_bound - channel.p_ug,
        p_ug_achieved: channel.p_ug,
        p_ug_rank_one: channel.rank_one,
        p_ug_solver: channel.solver,
        phases: channel.phases,
        p_hp_bound: tag_disc_bound(&ts.tags)?,
        p_hp_achieved: tag.p_hp,
        lhs,
        rhs,
        slack,
        inequality_holds: slack >= -DUALITY_TOL,
        certified: channel.solver_certified && tag.certified,
        v_norms,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepOptions {
    pub samples: usize,
    pub seed: u64,
    pub amb_dim: usize,
    /// Worker threads; 0 picks the default.
    pub threads: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub sample_id: usize,
    pub seed: u64,
    pub report: DualityReport,
}

/// Duality reports for `samples` random tag ensembles. Sample `i` draws its tags from
/// the stream `(seed, i)`, so results do not depend on the thread count.
pub fn random_tag_sweep(
    dec: &IsotypicDecomposition,
    opts: &SweepOptions,
    unit_components: Option<&[CVector]>,
) -> Result<Vec<SweepRecord>> {
    if opts.samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if opts.amb_dim == 0 {
        return Err(Error::InvalidInput("ancilla dimension must be at least 1".into()));
    }
    assert_multiplicity_free(dec)?;
    let n = dec.components().len();
    let components = match unit_components {
        Some(c) => c.to_vec(),
        None => default_unit_components(dec),
    };
    // validate once up front
    build_tagged_state(dec, components.clone(), TagEnsemble::identical(n, opts.amb_dim))?;

    let run = |i: usize| -> Result<SweepRecord> {
        let mut rng = sample_rng(opts.seed, i as u64);
        let tags = TagEnsemble::random(&mut rng, n, opts.amb_dim);
        let ts = build_tagged_state(dec, components.clone(), tags)?;
        Ok(SweepRecord { sample_id: i, seed: opts.seed, report: duality_report(&ts)? })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| (0..opts.samples).into_par_iter().map(run).collect())
}

pub const SWEEP_CSV_HEADER: &str = "sample_id,seed,n_subspaces,amb_dim,max_abs_overlap,p_ug_bound,p_ug_achieved,\
p_hp_bound,p_hp_achieved,d_baseline,m_tilde,lhs,rhs,slack,certified";

/// Writes the sweep as CSV with floats at 17 significant digits.
pub fn write_sweep_csv<W: Write>(out: &mut W, records: &[SweepRecord]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for rec in records {
        let r = &rec.report;
        let floats = [
            r.max_abs_overlap,
            r.p_ug_bound,
            r.p_ug_achieved,
            r.p_hp_bound,
            r.p_hp_achieved,
            r.d_baseline,
            r.m_tilde,
            r.lhs,
            r.rhs,
            r.slack,
        ];
        write!(out, "{},{},{},{}", rec.sample_id, rec.seed, r.n_subspaces, r.amb_dim)?;
        for x in floats {
            write!(out, ",{}", format_sig17(x))?;
        }
        writeln!(out, ",{}", u8::from(r.certified))?;
    }
    Ok(())
}

/// `printf("%.17g")`-style formatting.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::decompose::isotypic_projectors;
    use crate::groups::{cyclic_group, dihedral_group, direct_sum_rep, Representation};

    fn d3() -> IsotypicDecomposition {
        let g = Arc::new(dihedral_group(3).unwrap());
        isotypic_projectors(&direct_sum_rep(g, &[1, 2, 3]).unwrap()).unwrap()
    }

    fn cyclic(n: usize, labels: &[usize]) -> IsotypicDecomposition {
        let g = Arc::new(cyclic_group(n).unwrap());
        isotypic_projectors(&direct_sum_rep(g, labels).unwrap()).unwrap()
    }

    fn tagged(dec: &IsotypicDecomposition, tags: TagEnsemble) -> TaggedState {
        build_tagged_state(dec, default_unit_components(dec), tags).unwrap()
    }

    #[test]
    fn baseline_values() {
        assert!((baseline_d(&d3()).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((baseline_d(&cyclic(5, &[0, 1, 2, 3, 4])).unwrap() - 0.2).abs() < 1e-15);
        let g = Arc::new(dihedral_group(3).unwrap());
        let single = isotypic_projectors(&Representation::irrep(g, 3).unwrap()).unwrap();
        assert!((baseline_d(&single).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn m_tilde_values() {
        assert_eq!(m_tilde(&d3()).unwrap(), 1.0);
        assert_eq!(m_tilde(&cyclic(4, &[0, 1, 2, 3])).unwrap(), 1.0);
        assert_eq!(m_tilde(&cyclic(3, &[0, 1])).unwrap(), 1.0);
        assert!((baseline_d(&cyclic(4, &[0, 1, 2, 3])).unwrap() - 0.25).abs() < 1e-15);
        let g = Arc::new(dihedral_group(3).unwrap());
        let single = isotypic_projectors(&Representation::irrep(g, 3).unwrap()).unwrap();
        assert!(matches!(m_tilde(&single), Err(Error::NeedTwoSubspaces)));
    }

    #[test]
    fn m_tilde_exceeds_one_for_large_blocks() {
        assert_eq!(m_tilde_from_dims(&[1, 1], 2).unwrap(), 1.0);
        assert_eq!(m_tilde_from_dims(&[2, 2, 1], 6).unwrap(), 1.0);
        assert_eq!(m_tilde_from_dims(&[3, 2], 4).unwrap(), 1.0 + 4.0 * 6.0 / 16.0 - 1.0);
    }

    #[test]
    fn single_tag_gives_product_state() {
        let g = Arc::new(dihedral_group(3).unwrap());
        let dec = isotypic_projectors(&Representation::irrep(g, 3).unwrap()).unwrap();
        let ts = tagged(&dec, TagEnsemble::identical(1, 2));
        let expected = dec.components()[0].first_basis_vector().kron(&CVector::basis(2, 0));
        assert!(ts.joint().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn identical_tags_factorize() {
        let dec = d3();
        let ts = tagged(&dec, TagEnsemble::identical(3, 2));
        let expected = ts.untagged_state().kron(&CVector::basis(2, 0));
        assert!(ts.joint().max_abs_diff(&expected) < 1e-15);
        let rho_a = reduced_ancilla_state(&ts);
        assert!(rho_a.max_abs_diff(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn orthogonal_tags_maximally_entangled() {
        let dec = d3();
        let ts = tagged(&dec, TagEnsemble::orthogonal(3));
        let rho_a = reduced_ancilla_state(&ts);
        assert!(rho_a.max_abs_diff(&CMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-15);
        let rho_e = reduced_system_state(&ts, 0).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        for u in ts.unit_components() {
            expected += &CMatrix::projector(u).scale_real(1.0 / 3.0);
        }
        assert!(rho_e.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn reduced_system_state_matches_partial_trace() {
        let dec = d3();
        let mut rng = sample_rng(5, 0);
        let ts = tagged(&dec, TagEnsemble::random(&mut rng, 3, 3));
        for g in 0..6 {
            let v = ts.after_channel(g);
            let direct = crate::numerics::partial_trace_second(&CMatrix::projector(&v), 4, 3);
            assert!(reduced_system_state(&ts, g).unwrap().max_abs_diff(&direct) < 1e-14);
        }
        assert!(reduced_system_state(&ts, 6).is_err());
    }

    #[test]
    fn channel_bound_values() {
        let dec = d3();
        assert!((channel_disc_bound(&tagged(&dec, TagEnsemble::orthogonal(3))) - 2.0 / 9.0).abs() < 1e-15);
        let identical = channel_disc_bound(&tagged(&dec, TagEnsemble::identical(3, 1)));
        assert!((identical - (3.0 + 2.0 * 2f64.sqrt()) / 9.0).abs() < 1e-15);
        let c4 = cyclic(4, &[0, 1, 2, 3]);
        assert!((channel_disc_bound(&tagged(&c4, TagEnsemble::identical(4, 2))) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aligned_complex_overlaps_reach_bound() {
        // overlaps with consistent phases: η_p = e^{iα_p} η, bound reached after rephasing
        let dec = d3();
        let eta = CVector::from_real(&[0.6, 0.8]);
        let tags = TagEnsemble::new((0..3).map(|p| eta.scale(C64::from_polar(1.0, 0.7 * p as f64))).collect()).unwrap();
        let ts = tagged(&dec, tags);
        let achieved = channel_disc_achieved(&ts).unwrap();
        assert!((achieved.p_ug - channel_disc_bound(&ts)).abs() < 1e-9);
    }

    #[test]
    fn reduced_states_are_densities() {
        let dec = d3();
        let ts = tagged(&dec, TagEnsemble::random(&mut sample_rng(8, 1), 3, 2));
        crate::numerics::check_density(&reduced_ancilla_state(&ts), 1e-10).unwrap();
        let spectrum = |m: &CMatrix| hermitian_eigensystem(m).unwrap().eigenvalues;
        let base = spectrum(&ts.rho_e());
        for g in 0..6 {
            let rho = reduced_system_state(&ts, g).unwrap();
            crate::numerics::check_density(&rho, 1e-10).unwrap();
            for (a, b) in spectrum(&rho).iter().zip(&base) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!((ts.joint().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_achieved_orthogonal_and_identical() {
        let dec = d3();
        let orth = channel_disc_achieved(&tagged(&dec, TagEnsemble::orthogonal(3))).unwrap();
        assert!((orth.p_ug - 2.0 / 9.0).abs() < 1e-9);
        let ident = channel_disc_achieved(&tagged(&dec, TagEnsemble::identical(3, 2))).unwrap();
        assert!((ident.p_ug - (3.0 + 2.0 * 2f64.sqrt()) / 9.0).abs() < 1e-9);
        assert!((ident.rank_one - (3.0 + 2.0 * 2f64.sqrt()) / 9.0).abs() < 1e-12);
    }

    #[test]
    fn channel_achieved_with_unalignable_phases() {
        // Three tags with overlaps whose phases cannot all be aligned at once.
        let dec = cyclic(3, &[0, 1, 2]);
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let s = (0.5f64).sqrt();
        let tags = TagEnsemble::new(vec![
            CVector::new(vec![s.into(), s.into(), 0.0.into()]),
            CVector::new(vec![(w * s), 0.0.into(), s.into()]),
            CVector::new(vec![0.0.into(), s.into(), (w * s)]),
        ])
        .unwrap();
        let ts = tagged(&dec, tags);
        let bound = channel_disc_bound(&ts);
        let achieved = channel_disc_achieved(&ts).unwrap();
        assert!(achieved.p_ug < bound - 1e-3, "{} vs {bound}", achieved.p_ug);
        assert!(achieved.p_ug >= baseline_d(&dec).unwrap() - 1e-9);
        let report = duality_report(&ts).unwrap();
        assert!((report.p_ug_gap - (bound - achieved.p_ug)).abs() < 1e-15);
    }

    #[test]
    fn tag_bounds_and_achieved() {
        assert!((tag_disc_bound(&TagEnsemble::orthogonal(4)).unwrap() - 1.0).abs() < 1e-15);
        assert!((tag_disc_bound(&TagEnsemble::identical(4, 2)).unwrap() - 0.25).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let pair = TagEnsemble::new(vec![CVector::basis(2, 0), CVector::from_real(&[h, h])]).unwrap();
        let expected = 0.5 + 0.25 * 2.0 * h;
        assert!((tag_disc_bound(&pair).unwrap() - expected).abs() < 1e-15);
        assert!((tag_disc_achieved(&pair).unwrap().p_hp - expected).abs() < 1e-15);
        assert!((tag_disc_achieved(&TagEnsemble::orthogonal(3)).unwrap().p_hp - 1.0).abs() < 1e-12);
        assert!((tag_disc_achieved(&TagEnsemble::identical(3, 2)).unwrap().p_hp - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(tag_disc_bound(&TagEnsemble::identical(1, 2)), Err(Error::NeedTwoSubspaces)));
    }

    #[test]
    fn report_d3_orthogonal_equality() {
        let r = duality_report(&tagged(&d3(), TagEnsemble::orthogonal(3))).unwrap();
        assert!((r.lhs - 4.0 / 9.0).abs() < 1e-9);
        assert!((r.rhs - 4.0 / 9.0).abs() < 1e-15);
        assert!(r.inequality_holds);
        assert!(r.certified);
    }

    #[test]
    fn report_d3_identical() {
        let r = duality_report(&tagged(&d3(), TagEnsemble::identical(3, 3))).unwrap();
        let expected = ((1.0 + 2.0 * 2f64.sqrt()) / 9.0).powi(2);
        assert!((r.lhs - expected).abs() < 1e-9, "{}", r.lhs);
        assert!((r.lhs - 0.18095).abs() < 1e-4);
        assert!(r.slack > 0.0);
    }

    #[test]
    fn interpolation_is_monotone() {
        let dec = cyclic(3, &[0, 1, 2]);
        let base = TagEnsemble::random(&mut sample_rng(3, 0), 3, 2);
        let mut last: Option<(f64, f64)> = None;
        for step in 0..=10 {
            let tags = base.interpolate_to_orthogonal(step as f64 / 10.0).unwrap();
            let expected = base.overlap(0, 1) * (1.0 - step as f64 / 10.0);
            assert!((tags.overlap(0, 1) - expected).norm() < 1e-14);
            let hp = tag_disc_achieved(&tags).unwrap().p_hp;
            let ug = channel_disc_bound(&tagged(&dec, tags));
            if let Some((h0, u0)) = last {
                assert!(hp >= h0 - 1e-9 && ug <= u0 + 1e-9);
            }
            last = Some((hp, ug));
        }
        assert!((last.unwrap().0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn build_rejects_bad_components() {
        let dec = d3();
        let mut comps = default_unit_components(&dec);
        comps.swap(0, 2);
        assert!(matches!(
            build_tagged_state(&dec, comps, TagEnsemble::orthogonal(3)),
            Err(Error::SubspaceViolation(..))
        ));
        assert!(matches!(
            build_tagged_state(&dec, default_unit_components(&dec), TagEnsemble::orthogonal(2)),
            Err(Error::CountMismatch { .. })
        ));
    }

    #[test]
    fn sweep_is_deterministic_and_thread_independent() {
        let dec = cyclic(3, &[0, 1, 2]);
        let a = random_tag_sweep(&dec, &SweepOptions { samples: 6, seed: 9, amb_dim: 3, threads: 1 }, None).unwrap();
        let b = random_tag_sweep(&dec, &SweepOptions { samples: 6, seed: 9, amb_dim: 3, threads: 3 }, None).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_sweep_csv(&mut x, &a).unwrap();
        write_sweep_csv(&mut y, &b).unwrap();
        assert_eq!(x, y);
        assert!(a.iter().all(|r| r.report.inequality_holds));
    }

    #[test]
    fn sweep_amb_dim_one_is_identical_limit() {
        let dec = cyclic(2, &[0, 1]);
        let recs = random_tag_sweep(&dec, &SweepOptions { samples: 5, seed: 1, amb_dim: 1, threads: 0 }, None).unwrap();
        for r in recs {
            assert!((r.report.max_abs_overlap - 1.0).abs() < 1e-12);
            assert!((r.report.p_hp_achieved - 0.5).abs() < 1e-9, "{}", r.report.p_hp_achieved);
            assert!((r.report.p_ug_achieved - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sig17_formatting() {
        assert_eq!(format_sig17(0.0), "0");
        assert_eq!(format_sig17(1.0), "1");
        assert_eq!(format_sig17(0.5), "0.5");
        assert_eq!(format_sig17(2.0 / 9.0), "0.22222222222222221");
        assert_eq!(format_sig17(-1e-12), "-9.9999999999999998e-13");
        assert_eq!(format_sig17(1.0e20), "1e+20");
        for x in [2.0 / 9.0, 4.0 / 9.0, 1e-7, 123.456, -3.3e-10] {
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
