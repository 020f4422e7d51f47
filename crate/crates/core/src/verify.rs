//! Invariant suite run by `gasym verify`.
//!
//! Each check evaluates one property over built-in groups (and an optional extra
//! group) on seeded random inputs, and reports the worst residual against its
//! tolerance. Tolerances are named so they can be overridden individually.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::coherence::{cyclic_equivalence_check, l1_coherence};
use crate::decompose::{component_norms, isotypic_projectors, IsotypicDecomposition};
use crate::discrimination::{
    build_covariant_povm, covariantize_povm, orbit, solve_min_error, success_probability_pure, twirl, Povm,
};
use crate::duality::{
    baseline_d, build_tagged_state, channel_disc_bound, default_unit_components, duality_report,
    m_tilde, reduced_ancilla_state, tag_disc_achieved, TagEnsemble,
};
use crate::error::{Error, Result};
use crate::groups::{
    cyclic_group, dihedral_group, direct_sum_rep, tensor_product_rep, GroupWithIrreps, Representation,
};
use crate::numerics::{hermitian_eigensystem, kron, psd_sqrt, CMatrix, CVector, C64};
use crate::random::{
    complex_normal, random_density, random_hermitian, random_povm_elements, random_unit_vector, sample_rng,
};

/// Named tolerances with their defaults.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let entries = [
            ("structural", 1e-9),
            ("solver", 1e-6),
            ("certificate", 1e-7),
            ("eigen", 1e-10),
            ("group", 1e-10),
            ("exact", 1e-12),
            ("covariantization", 1e-10),
            ("coherence", 1e-10),
        ];
        Self(entries.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {key} must be a non-negative number")));
        }
        match self.0.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!(
                "unknown tolerance {key}; known: {}",
                self.0.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random trials per check.
    pub trials: usize,
    pub tolerances: Tolerances,
    /// Adds `ε|b⟩⟨b|` to one isotypic projector before the completeness check.
    pub perturb: Option<f64>,
    /// Extra group checked alongside the built-ins.
    #[serde(skip)]
    pub extra_group: Option<Arc<GroupWithIrreps>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, trials: 20, tolerances: Tolerances::default(), perturb: None, extra_group: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst violation observed; a check passes when it is at most `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Running maximum of a residual over many cases.
struct Tally {
    worst: f64,
    cases: usize,
    detail: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, cases: 0, detail: None }
    }

    fn add(&mut self, residual: f64, context: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN counts as the worst possible residual
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if r > self.worst || (self.cases == 1 && r > 0.0) {
            self.worst = r;
            self.detail = Some(context());
        }
    }
}

struct Suite<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<CheckResult>,
}

impl Suite<'_> {
    fn rng(&self, check: usize) -> ChaCha20Rng {
        sample_rng(self.opts.seed, check as u64)
    }

    fn record(&mut self, name: &str, tol_key: &str, tally: Tally) {
        let tolerance = self.opts.tolerances.get(tol_key);
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: tally.worst <= tolerance,
            residual: tally.worst,
            tolerance,
            cases: tally.cases,
            detail: tally.detail,
        });
    }

    fn fail(&mut self, name: &str, tol_key: &str, err: Error) {
        let tolerance = self.opts.tolerances.get(tol_key);
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: false,
            residual: f64::INFINITY,
            tolerance,
            cases: 0,
            detail: Some(err.to_string()),
        });
    }

    fn run(&mut self, name: &str, tol_key: &str, body: impl FnOnce(&mut ChaCha20Rng, &mut Tally) -> Result<()>) {
        let mut rng = self.rng(self.checks.len());
        let mut tally = Tally::new();
        match body(&mut rng, &mut tally) {
            Ok(()) => self.record(name, tol_key, tally),
            Err(e) => self.fail(name, tol_key, e),
        }
    }
}

fn builtin_groups() -> Vec<Arc<GroupWithIrreps>> {
    let mut groups: Vec<Arc<GroupWithIrreps>> =
        (2..=6).map(|n| Arc::new(cyclic_group(n).expect("built-in cyclic group"))).collect();
    groups.extend([3, 5].map(|n| Arc::new(dihedral_group(n).expect("built-in dihedral group"))));
    groups
}

fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<CMatrix> {
    Ok(hermitian_eigensystem(&random_hermitian(rng, dim))?.eigenvectors)
}

/// Random multiplicity-free representation: a random nonempty subset of irreps in
/// random order, in a random orthonormal basis.
fn random_mf_rep<R: Rng + ?Sized>(rng: &mut R, group: &Arc<GroupWithIrreps>) -> Result<IsotypicDecomposition> {
    let mut labels = group.labels();
    labels.shuffle(rng);
    let keep = rng.random_range(1..=labels.len());
    labels.truncate(keep);
    let rep = direct_sum_rep(group.clone(), &labels)?;
    let v = random_unitary(rng, rep.dim())?;
    let rotated = rep.matrices().iter().map(|m| m.conjugate_by(&v)).collect();
    isotypic_projectors(&Representation::from_matrices(group.clone(), rotated)?)
}

fn full_rep(group: &Arc<GroupWithIrreps>) -> Result<IsotypicDecomposition> {
    isotypic_projectors(&direct_sum_rep(group.clone(), &group.labels())?)
}

fn random_state_in<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    random_unit_vector(rng, dim)
}

fn solver_ps(rep: &Representation, rho: &CMatrix) -> Result<(f64, bool)> {
    let order = rep.group().order();
    let r = solve_min_error(&orbit(rep, rho), &vec![1.0 / order as f64; order])?;
    Ok((r.success_probability, r.certified()))
}

pub fn run_verification(opts: &VerifyOptions) -> VerifyReport {
    let mut groups = builtin_groups();
    if let Some(extra) = &opts.extra_group {
        groups.push(extra.clone());
    }
    let trials = opts.trials.max(1);
    let mut s = Suite { opts, checks: Vec::new() };

    // numerics
    s.run("numerics.eigen_reconstruction", "eigen", |rng, t| {
        for i in 0..trials {
            let dim = 1 + i % 10;
            let m = random_hermitian(rng, dim);
            let r = hermitian_eigensystem(&m)?.reconstruct().max_abs_diff(&m);
            t.add(r, || format!("dim {dim}"));
        }
        Ok(())
    });
    s.run("numerics.psd_sqrt_square", "structural", |rng, t| {
        for i in 0..trials {
            let dim = 1 + i % 8;
            let a = crate::random::random_matrix(rng, dim, dim);
            let m = (&a.adjoint() * &a).hermitian_part();
            let root = psd_sqrt(&m)?;
            t.add((&root * &root).max_abs_diff(&m), || format!("dim {dim}"));
        }
        Ok(())
    });
    s.run("numerics.kron_associativity", "exact", |rng, t| {
        let small_int = |rng: &mut ChaCha20Rng, r: usize, c: usize| {
            CMatrix::from_fn(r, c, |_, _| {
                C64::new(rng.random_range(-4..=4) as f64, rng.random_range(-4..=4) as f64)
            })
        };
        for _ in 0..trials {
            let dims: Vec<usize> = (0..6).map(|_| rng.random_range(1..=3)).collect();
            let a = small_int(rng, dims[0], dims[1]);
            let b = small_int(rng, dims[2], dims[3]);
            let c = small_int(rng, dims[4], dims[5]);
            let r = kron(&kron(&a, &b), &c).max_abs_diff(&kron(&a, &kron(&b, &c)));
            t.add(r, || format!("shapes {dims:?}"));
        }
        Ok(())
    });
    s.run("numerics.kron_trace", "exact", |rng, t| {
        for _ in 0..trials {
            let (da, db) = (rng.random_range(1..=4), rng.random_range(1..=4));
            let a = random_hermitian(rng, da);
            let b = random_hermitian(rng, db);
            t.add((kron(&a, &b).trace() - a.trace() * b.trace()).norm(), || format!("dims {da},{db}"));
        }
        Ok(())
    });

    // groups
    s.run("groups.structure", "group", |_, t| {
        for g in &groups {
            t.add(group_structure_residual(g), || g.name().to_string());
        }
        Ok(())
    });
    s.run("groups.character_orthonormality", "group", |_, t| {
        for g in &groups {
            t.add(character_orthonormality_residual(g), || g.name().to_string());
        }
        Ok(())
    });
    s.run("groups.grand_orthogonality", "group", |_, t| {
        for g in groups.iter().filter(|g| g.order() <= 12) {
            t.add(grand_orthogonality_residual(g), || g.name().to_string());
        }
        Ok(())
    });
    s.run("groups.tensor_character", "exact", |_, t| {
        for g in &groups {
            for a in g.labels() {
                for b in g.labels() {
                    let ra = Representation::irrep(g.clone(), a)?;
                    let rb = Representation::irrep(g.clone(), b)?;
                    let chi = tensor_product_rep(&ra, &rb)?.character();
                    let (ca, cb) = (ra.character(), rb.character());
                    let r = (0..g.order()).map(|h| (chi[h] - ca[h] * cb[h]).norm()).fold(0.0, f64::max);
                    t.add(r, || format!("{} Γ{a}⊗Γ{b}", g.name()));
                }
            }
        }
        Ok(())
    });

    // decompose
    let perturb = opts.perturb;
    s.run("decompose.completeness", "structural", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let mut sum = CMatrix::zeros(d, d);
                for (i, c) in dec.components().iter().enumerate() {
                    match perturb {
                        Some(eps) if i == 0 => {
                            sum += &(&c.projector + &CMatrix::projector(&c.basis[0]).scale_real(eps))
                        }
                        _ => sum += &c.projector,
                    }
                }
                t.add(sum.max_abs_diff(&CMatrix::identity(d)), || format!("{} labels {:?}", g.name(), dec.present_labels()));
            }
        }
        Ok(())
    });
    s.run("decompose.projector_algebra", "structural", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let r = crate::decompose::projector_residuals(&dec);
                let worst = r.idempotence.max(r.hermiticity).max(r.orthogonality).max(r.commutation).max(r.trace);
                t.add(worst, || format!("{} labels {:?}", g.name(), dec.present_labels()));
            }
        }
        Ok(())
    });
    s.run("decompose.averaging_identity", "group", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let x = CVector::new((0..dec.rep().dim()).map(|_| complex_normal(rng)).collect());
                let lhs = twirl(dec.rep(), &CMatrix::projector(&x));
                let d = dec.rep().dim();
                let mut rhs = CMatrix::zeros(d, d);
                for c in dec.components() {
                    let w = c.projector.mul_vec(&x).norm_sqr() / c.irrep_dim as f64;
                    rhs += &c.projector.scale_real(w);
                }
                t.add(lhs.max_abs_diff(&rhs), || format!("{} labels {:?}", g.name(), dec.present_labels()));
            }
        }
        Ok(())
    });
    s.run("decompose.norms_sum", "group", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let phi = random_state_in(rng, dec.rep().dim());
                let total: f64 = component_norms(&dec, &phi)?.iter().map(|(_, n)| n * n).sum();
                t.add((total - 1.0).abs(), || g.name().to_string());
            }
        }
        Ok(())
    });

    // discrimination
    s.run("discrimination.covariant_upper_bound", "structural", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let phi = random_state_in(rng, d);
                let bound = success_probability_pure(&dec, &phi)?;
                let povm = Povm::new(random_povm_elements(rng, d, g.order()))?;
                let cov = covariantize_povm(dec.rep(), &povm)?;
                let value = cov.seed().sandwich(&phi, &phi).re;
                t.add((value - bound).max(0.0), || format!("{} value {value} bound {bound}", g.name()));
            }
        }
        Ok(())
    });
    s.run("discrimination.trace_constraint", "structural", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let phases: Vec<f64> = dec.components().iter().map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                let seeds = [
                    build_covariant_povm(&dec, &random_state_in(rng, d), &phases)?.seed().clone(),
                    covariantize_povm(dec.rep(), &Povm::new(random_povm_elements(rng, d, g.order()))?)?.seed().clone(),
                ];
                for seed in &seeds {
                    for c in dec.components() {
                        let expected = c.irrep_dim as f64 / g.order() as f64;
                        let got = c.projector.trace_product(seed).re;
                        t.add((got - expected).abs(), || format!("{} Γ{}", g.name(), c.label));
                    }
                }
            }
        }
        Ok(())
    });
    let solver_groups: Vec<Arc<GroupWithIrreps>> = groups.iter().filter(|g| g.order() <= 10).cloned().collect();
    let mut certificate = Tally::new();
    s.run("discrimination.solver_matches_closed_form", "solver", |rng, t| {
        for g in &solver_groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let phi = random_state_in(rng, dec.rep().dim());
                let closed = success_probability_pure(&dec, &phi)?;
                let order = g.order();
                let r = solve_min_error(&orbit(dec.rep(), &CMatrix::projector(&phi)), &vec![1.0 / order as f64; order])?;
                t.add((r.success_probability - closed).abs(), || format!("{} closed {closed}", g.name()));
                if r.converged {
                    certificate.add((-r.certificate_floor).max(0.0), || g.name().to_string());
                }
            }
        }
        Ok(())
    });
    s.record("discrimination.holevo_certificate", "certificate", certificate);
    s.run("discrimination.twirl_monotonicity", "solver", |rng, t| {
        for g in &solver_groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let rank = rng.random_range(1..=2);
                let rho = random_density(rng, d, rank);
                let (base, _) = solver_ps(dec.rep(), &rho)?;
                let tw = twirl(dec.rep(), &rho);
                for lambda in [0.25, 0.5, 0.75, 1.0] {
                    let mixed = (&tw.scale_real(lambda) + &rho.scale_real(1.0 - lambda)).hermitian_part();
                    let (p, _) = solver_ps(dec.rep(), &mixed)?;
                    t.add((p - base).max(0.0), || format!("{} λ={lambda}", g.name()));
                }
            }
        }
        Ok(())
    });
    s.run("discrimination.convexity", "solver", |rng, t| {
        for g in &solver_groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let terms = rng.random_range(2..=3);
                let raw: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let mut mixture = CMatrix::zeros(d, d);
                let mut average = 0.0;
                for w in raw {
                    let rho = random_density(rng, d, 1);
                    mixture += &rho.scale_real(w / total);
                    average += w / total * solver_ps(dec.rep(), &rho)?.0;
                }
                let (p, _) = solver_ps(dec.rep(), &mixture.hermitian_part())?;
                t.add((p - average).max(0.0), || format!("{} {terms} terms", g.name()));
            }
        }
        Ok(())
    });
    let mut cov_completeness = Tally::new();
    s.run("discrimination.covariantization_preserves_success", "covariantization", |rng, t| {
        for g in &groups {
            for _ in 0..trials.div_ceil(4) {
                let dec = random_mf_rep(rng, g)?;
                let d = dec.rep().dim();
                let rho = CMatrix::projector(&random_state_in(rng, d));
                let povm = Povm::new(random_povm_elements(rng, d, g.order()))?;
                let order = g.order();
                let before = povm.success_probability(&orbit(dec.rep(), &rho), &vec![1.0 / order as f64; order]);
                let cov = covariantize_povm(dec.rep(), &povm)?;
                t.add((cov.orbit_success(&rho) - before).abs(), || g.name().to_string());
                cov_completeness.add(cov.completeness_error(), || g.name().to_string());
            }
        }
        Ok(())
    });
    s.record("discrimination.covariantization_completeness", "structural", cov_completeness);

    // duality
    let duality_decs: Vec<IsotypicDecomposition> = groups
        .iter()
        .filter(|g| g.order() <= 10 && g.irreps().len() >= 2)
        .filter_map(|g| full_rep(g).ok())
        .collect();
    let mut order_chain = Tally::new();
    let mut invariance = Tally::new();
    let mut commutation = Tally::new();
    s.run("duality.inequality", "structural", |rng, t| {
        for dec in &duality_decs {
            let n = dec.components().len();
            for _ in 0..trials.div_ceil(4) {
                let amb = rng.random_range(1..=n);
                let tags = TagEnsemble::random(rng, n, amb);
                let ts = build_tagged_state(dec, default_unit_components(dec), tags)?;
                let r = duality_report(&ts)?;
                let name = dec.rep().group().name().to_string();
                t.add((-r.slack).max(0.0), || format!("{name} amb_dim {amb}"));
                let chain = [
                    r.d_baseline - r.p_ug_achieved,
                    r.p_ug_achieved - r.p_ug_bound,
                    1.0 / n as f64 - r.p_hp_achieved,
                    r.p_hp_achieved - r.p_hp_bound,
                ];
                order_chain.add(chain.iter().fold(0.0f64, |a, &b| a.max(b)), || name.clone());
                let rho_a = reduced_ancilla_state(&ts);
                let sys = ts.system_dim();
                for g in 0..dec.group_order() {
                    let moved = crate::duality::ancilla_of(&ts.after_channel(g), sys, amb);
                    invariance.add(moved.max_abs_diff(&rho_a), || format!("{name} g={g}"));
                    commutation.add(ts.after_channel(g).max_abs_diff(&ts.tagged_after_channel(g)), || {
                        format!("{name} g={g}")
                    });
                }
            }
        }
        Ok(())
    });
    s.record("duality.order_chain", "structural", order_chain);
    s.record("duality.ancilla_invariance", "exact", invariance);
    s.record("duality.tag_channel_commutation", "exact", commutation);
    s.run("duality.monotone_interpolation", "structural", |rng, t| {
        for dec in &duality_decs {
            let n = dec.components().len();
            let amb = rng.random_range(1..=n);
            let base = TagEnsemble::random(rng, n, amb);
            let mut last: Option<(f64, f64)> = None;
            for step in 0..=8 {
                let tags = base.interpolate_to_orthogonal(step as f64 / 8.0)?;
                let hp = tag_disc_achieved(&tags)?.p_hp;
                let ug = channel_disc_bound(&build_tagged_state(dec, default_unit_components(dec), tags)?);
                if let Some((h0, u0)) = last {
                    t.add((h0 - hp).max(ug - u0).max(0.0), || format!("{} step {step}", dec.rep().group().name()));
                }
                last = Some((hp, ug));
            }
        }
        Ok(())
    });
    s.run("duality.d3_constants", "exact", |_, t| {
        let dec = full_rep(&Arc::new(dihedral_group(3)?))?;
        t.add((baseline_d(&dec)? - 2.0 / 9.0).abs(), || "D".into());
        t.add((m_tilde(&dec)? - 1.0).abs(), || "M̃".into());
        let r = duality_report(&build_tagged_state(&dec, default_unit_components(&dec), TagEnsemble::orthogonal(3))?)?;
        t.add((r.rhs - 4.0 / 9.0).abs(), || "rhs".into());
        Ok(())
    });

    // coherence
    s.run("coherence.cyclic_identity", "coherence", |rng, t| {
        for n in 2..=8 {
            for _ in 0..trials.div_ceil(4) {
                let r = cyclic_equivalence_check(n, &random_unit_vector(rng, n))?;
                t.add(r.ratio_check.abs(), || format!("n={n}"));
            }
        }
        Ok(())
    });
    s.run("coherence.phase_invariance", "exact", |rng, t| {
        for n in 2..=8 {
            let rank = rng.random_range(1..=n);
            let rho = random_density(rng, n, rank);
            let phases: Vec<C64> = (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
            let moved = rho.conjugate_by(&CMatrix::diag(&phases)).hermitian_part();
            t.add((l1_coherence(&moved, n)? - l1_coherence(&rho, n)?).abs(), || format!("n={n}"));
        }
        Ok(())
    });
    s.run("coherence.nonnegative", "exact", |rng, t| {
        for n in 2..=8 {
            let rho = random_density(rng, n, n);
            t.add((-l1_coherence(&rho, n)?).max(0.0), || format!("n={n}"));
            let diag: Vec<f64> = (0..n).map(|i| rho[(i, i)].re).collect();
            t.add(l1_coherence(&CMatrix::diag_real(&diag), n)?, || format!("diagonal n={n}"));
        }
        Ok(())
    });

    let checks = s.checks;
    VerifyReport { passed: checks.iter().all(|c| c.passed), checks }
}

/// Latin square, associativity, identity and `Σ d_p² = |G|`; 1 for a structural
/// failure, otherwise 0.
fn group_structure_residual(g: &GroupWithIrreps) -> f64 {
    let n = g.order();
    let table = g.cayley();
    let latin = (0..n).all(|i| {
        let mut row: Vec<usize> = table[i].clone();
        let mut col: Vec<usize> = (0..n).map(|j| table[j][i]).collect();
        row.sort_unstable();
        col.sort_unstable();
        row.iter().copied().eq(0..n) && col.iter().copied().eq(0..n)
    });
    let assoc = (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c)))));
    let dims: usize = g.irreps().iter().map(|r| r.dim * r.dim).sum();
    if latin && assoc && dims == n {
        0.0
    } else {
        1.0
    }
}

/// `max |(1/|G|) Σ_g χ_p(g)* χ_q(g) − δ_pq|`
fn character_orthonormality_residual(g: &GroupWithIrreps) -> f64 {
    let chars: Vec<Vec<C64>> = g.irreps().iter().map(|r| r.character()).collect();
    let mut worst = 0.0f64;
    for (p, a) in chars.iter().enumerate() {
        for (q, b) in chars.iter().enumerate() {
            let s: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() / g.order() as f64;
            let target = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// `(d_p/|G|) Σ_g Γ_p(g)_ij Γ_q(g)*_kl = δ_pq δ_ik δ_jl`
fn grand_orthogonality_residual(g: &GroupWithIrreps) -> f64 {
    let mut worst = 0.0f64;
    for (p, a) in g.irreps().iter().enumerate() {
        for (q, b) in g.irreps().iter().enumerate() {
            for i in 0..a.dim {
                for j in 0..a.dim {
                    for k in 0..b.dim {
                        for l in 0..b.dim {
                            let s: C64 = (0..g.order()).map(|h| a.matrices[h][(i, j)] * b.matrices[h][(k, l)].conj()).sum();
                            let v = s * (a.dim as f64 / g.order() as f64);
                            let target = if p == q && i == k && j == l { 1.0 } else { 0.0 };
                            worst = worst.max((v - target).norm());
                        }
                    }
                }
            }
        }
    }
    worst
}
