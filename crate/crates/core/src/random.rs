//! Seeded random states, density matrices and POVMs.
//!
//! Per-sample generators are ChaCha streams keyed by `(seed, index)`, so a sweep
//! produces the same numbers no matter how samples are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::numerics::{psd_pinv_sqrt, CMatrix, CVector, C64};

/// Generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unit vector (normalized complex Gaussian).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    loop {
        let v = CVector::new((0..dim).map(|_| complex_normal(rng)).collect());
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Random Hermitian matrix with entries bounded by 1 in modulus.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim, dim).hermitian_part();
    let m = a.max_abs();
    if m > 0.0 {
        a.scale_real(1.0 / m)
    } else {
        a
    }
}

/// Random density matrix `A A† / Tr(A A†)` with `A` of shape `dim × rank`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let a = random_matrix(rng, dim, rank.max(1));
    let rho = (&a * &a.adjoint()).hermitian_part();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Random POVM with `count` full-rank elements, normalized as `S^{-1/2} A_k S^{-1/2}`.
pub fn random_povm_elements<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..count)
        .map(|_| {
            let a = random_matrix(rng, dim, dim);
            (&a * &a.adjoint()).hermitian_part()
        })
        .collect();
    let mut total = CMatrix::zeros(dim, dim);
    for r in &raw {
        total += r;
    }
    let (inv, _) = psd_pinv_sqrt(&total, 0.0).expect("sum of Gram matrices is PSD");
    raw.iter().map(|r| r.conjugate_by(&inv).hermitian_part()).collect()
}
