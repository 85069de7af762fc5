//! Convex-split construction, catalytic-decoupling size formulas, superdense
//! compression, random decoupling trials, generalized Pauli operators, and
//! the equivalence between decoupling and erasure by random unitaries.

use crate::channels::{ChannelError, UnitaryEnsemble};
use crate::entropy::{h_max, h_min_cond_fixed, mutual_info, EntropyError};
use crate::metrics::{purified_distance, MetricError};
use crate::states::{bell_basis, MultiState, StateError};
use crate::tensorlab::{
    partial_trace, permute_systems, random_unitary_rng, tensor, CMatrix, LinalgError, Shape,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecouplingError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("delta must lie in (0, 1/6), got {0}")]
    BadDelta(f64),
    #[error("total dimension {0} exceeds the guard {1}")]
    DimGuard(usize, usize),
    #[error("split {0}x{1} does not factor dimension {2}")]
    BadSplit(usize, usize, usize),
    #[error("{0}")]
    Invalid(String),
}

/// Number of mixture terms, with the target overlap k (a max-relative
/// entropy, in bits) and the error parameter δ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    pub k: f64,
    pub delta: f64,
    pub n: usize,
}

/// Outcome of a decoupling attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoupleResult {
    pub remainder_bits: f64,
    pub distance: f64,
    pub target: MultiState,
}

/// Mixture size for the convex split: n = 1 when k ≤ 3δ, otherwise
/// ⌈8·2^k·log₂(k/δ)/δ³⌉ (logarithm base 2).
pub fn convex_split_n(k: f64, delta: f64) -> Result<SplitSpec, DecouplingError> {
    if !(delta > 0.0 && delta < 1.0 / 6.0) {
        return Err(DecouplingError::BadDelta(delta));
    }
    if k < 0.0 {
        return Err(DecouplingError::Invalid("k must be nonnegative".into()));
    }
    let n = if k <= 3.0 * delta {
        1
    } else {
        (8.0 * k.exp2() * (k / delta).log2() / delta.powi(3)).ceil() as usize
    };
    Ok(SplitSpec { k, delta, n })
}

/// The convex-split mixture τ_{A E₁…E_n} = (1/n) Σ_j ρ_{AE_j} ⊗ σ^{⊗(n−1)}.
pub fn convex_split_state(
    rho_ae: &MultiState,
    sigma_e: &CMatrix,
    n: usize,
) -> Result<MultiState, DecouplingError> {
    if rho_ae.shape.n_subsystems() != 2 {
        return Err(DecouplingError::Invalid(
            "input must be bipartite with subsystems (A, E)".into(),
        ));
    }
    if n == 0 {
        return Err(DecouplingError::Invalid("n must be positive".into()));
    }
    let da = rho_ae.shape.dims[0];
    let de = rho_ae.shape.dims[1];
    if sigma_e.rows != de {
        return Err(DecouplingError::Invalid(
            "ancilla dimension must match E".into(),
        ));
    }
    let total = da
        .checked_mul(de.checked_pow(n as u32).unwrap_or(usize::MAX))
        .unwrap_or(usize::MAX);
    if total > crate::DIM_GUARD {
        return Err(DecouplingError::DimGuard(total, crate::DIM_GUARD));
    }
    let mut dims = vec![da];
    dims.extend(std::iter::repeat(de).take(n));
    let shape = Shape::new(dims);
    let mut acc = CMatrix::zeros(total, total);
    for j in 0..n {
        // build on order (A, E_j, E_others...) then permute E_j into place
        let mut term = rho_ae.matrix.clone();
        for _ in 0..(n - 1) {
            term = tensor(&term, sigma_e);
        }
        // current order: A, E_j, then the remaining copies in ascending slot
        // order; permutation maps target slot -> current position.
        let mut perm = vec![0usize; n + 1];
        perm[0] = 0;
        let mut next_other = 2;
        for slot in 0..n {
            perm[slot + 1] = if slot == j {
                1
            } else {
                let p = next_other;
                next_other += 1;
                p
            };
        }
        let build_shape = {
            let mut d = vec![da, de];
            d.extend(std::iter::repeat(de).take(n - 1));
            Shape::new(d)
        };
        let placed = permute_systems(&term, &build_shape, &perm)?;
        acc = acc.add(&placed.scale_re(1.0 / n as f64));
    }
    Ok(MultiState {
        matrix: acc,
        shape,
        normalization: rho_ae.normalization,
    })
}

/// The two closeness figures of a convex-split state: the mutual information
/// I(A : E₁…E_n) and the purified distance P(τ_A ⊗ τ_{E₁…E_n}, τ).
pub fn convex_split_figures(tau: &MultiState) -> Result<(f64, f64), DecouplingError> {
    let n_env: Vec<usize> = (1..tau.shape.n_subsystems()).collect();
    let mi = mutual_info(tau, &[0], &n_env)?;
    let tau_a = tau.marginal(&[0])?;
    let tau_e = tau.marginal(&n_env)?;
    let product = MultiState {
        matrix: tensor(&tau_a.matrix, &tau_e.matrix),
        shape: tau.shape.clone(),
        normalization: tau.normalization,
    };
    let p = purified_distance(&product, tau)?;
    Ok((mi, p))
}

/// Controlled cyclic-assignment unitary U = Σ_j P_{(1 j)} ⊗ |j−1⟩⟨j−1| on
/// A₁…A_n ⊗ control: the control value j−1 swaps copy 1 with copy j (control
/// |0⟩ acts as the identity).
pub fn cds_unitary(n: usize, da: usize) -> Result<CMatrix, DecouplingError> {
    if n == 0 {
        return Err(DecouplingError::Invalid("n must be positive".into()));
    }
    let body = da.pow(n as u32);
    let total = body * n;
    if total > crate::DIM_GUARD {
        return Err(DecouplingError::DimGuard(total, crate::DIM_GUARD));
    }
    let copies = Shape::new(vec![da; n]);
    let mut u = CMatrix::zeros(total, total);
    for j in 0..n {
        // permutation of copies swapping slot 0 and slot j
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, j);
        for idx in 0..body {
            let multi = copies.unflatten(idx);
            let swapped: Vec<usize> = (0..n).map(|s| multi[perm[s]]).collect();
            let out = copies.flatten(&swapped);
            u[(out * n + j, idx * n + j)] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(u)
}

/// Basis-change unitary mapping the computational basis index m·k+l to the
/// generalized Bell state |ψ_kl⟩ on C^m ⊗ C^m.
pub fn superdense_compress(m: usize) -> Result<CMatrix, DecouplingError> {
    if !(2..=8).contains(&m) {
        return Err(DecouplingError::Invalid("m must lie in 2..=8".into()));
    }
    let basis = bell_basis(m)?;
    let d = m * m;
    let mut u = CMatrix::zeros(d, d);
    for (col, psi) in basis.iter().enumerate() {
        for (row, &a) in psi.amplitudes.iter().enumerate() {
            u[(row, col)] = a;
        }
    }
    Ok(u)
}

/// One random decoupling attempt: apply a Haar unitary on A, discard the
/// d₂ factor, and report the purified distance to τ_{d₁} ⊗ ρ_E.
pub fn random_decouple_trial(
    rho_ae: &MultiState,
    split: (usize, usize),
    seed: u64,
) -> Result<DecoupleResult, DecouplingError> {
    let (d1, d2) = split;
    if rho_ae.shape.n_subsystems() != 2 {
        return Err(DecouplingError::Invalid(
            "input must be bipartite with subsystems (A, E)".into(),
        ));
    }
    let da = rho_ae.shape.dims[0];
    let de = rho_ae.shape.dims[1];
    if d1 * d2 != da {
        return Err(DecouplingError::BadSplit(d1, d2, da));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let u = random_unitary_rng(da, &mut rng);
    let big = tensor(&u, &CMatrix::identity(de));
    let rotated = big.mul(&rho_ae.matrix).mul(&big.dagger());
    let fine = Shape::new(vec![d1, d2, de]);
    let kept = partial_trace(&rotated, &fine, &[0, 2])?;
    let rho_e = rho_ae.marginal(&[1])?;
    let target = MultiState {
        matrix: tensor(
            &CMatrix::identity(d1).scale_re(1.0 / d1 as f64),
            &rho_e.matrix,
        ),
        shape: Shape::new(vec![d1, de]),
        normalization: rho_ae.normalization,
    };
    let result = MultiState {
        matrix: kept,
        shape: Shape::new(vec![d1, de]),
        normalization: rho_ae.normalization,
    };
    let distance = purified_distance(&result, &target)?;
    Ok(DecoupleResult {
        remainder_bits: (d1 as f64).log2(),
        distance,
        target,
    })
}

/// One-shot decoupling cost evaluator at the unsmoothed operating point:
/// ½(H_max(A)_ρ − H_min(A|E)_ρ) with the fixed-reference conditional
/// min-entropy.
pub fn decoupling_bound(rho_ae: &MultiState) -> Result<f64, DecouplingError> {
    let rho_a = rho_ae.marginal(&[0])?;
    Ok(0.5 * (h_max(&rho_a.matrix)? - h_min_cond_fixed(rho_ae, &[0], &[1])?))
}

/// Catalytic remainder-size evaluator ½(v + max(0, log₂ log₂ v)) +
/// 4·log₂(1/δ); the additive constant 4 is a fixed labeled convention.
pub fn catalytic_size_bound(i_max_value: f64, delta: f64) -> Result<f64, DecouplingError> {
    if i_max_value < 0.0 {
        return Err(DecouplingError::Invalid(
            "max-mutual-information value must be nonnegative".into(),
        ));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(DecouplingError::Invalid("delta must lie in (0,1)".into()));
    }
    let v = i_max_value;
    let loglog = if v > 1.0 { v.log2().log2().max(0.0) } else { 0.0 };
    Ok(0.5 * (v + loglog) + 4.0 * (1.0 / delta).log2())
}

/// Generalized Pauli operators on C^N: Σ = diag(e^{2πij/N}) and the cyclic
/// shift Ξ|s⟩ = |s+1 mod N⟩, obeying ΣΞ = e^{2πi/N} ΞΣ.
pub fn gen_pauli(n: usize) -> Result<(CMatrix, CMatrix), DecouplingError> {
    if n < 2 {
        return Err(DecouplingError::Invalid("N must be at least 2".into()));
    }
    let omega = |j: usize| {
        let a = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        Complex64::new(a.cos(), a.sin())
    };
    let sigma = CMatrix::diag(&(0..n).map(omega).collect::<Vec<_>>());
    let mut xi = CMatrix::zeros(n, n);
    for s in 0..n {
        xi[((s + 1) % n, s)] = Complex64::new(1.0, 0.0);
    }
    Ok((sigma, xi))
}

/// Average over the full Heisenberg–Weyl orbit:
/// (1/N²) Σ_{ij} Ξ^iΣ^j X Σ^{−j}Ξ^{−i} = tr(X)·1/N.
pub fn heisenberg_twirl(x: &CMatrix, n: usize) -> Result<CMatrix, DecouplingError> {
    if x.rows != n || x.cols != n {
        return Err(DecouplingError::Invalid(
            "operand dimension must equal N".into(),
        ));
    }
    let (sigma, xi) = gen_pauli(n)?;
    let mut acc = CMatrix::zeros(n, n);
    let mut xi_i = CMatrix::identity(n);
    for _ in 0..n {
        let mut w = xi_i.clone();
        for _ in 0..n {
            acc = acc.add(&w.mul(x).mul(&w.dagger()));
            w = w.mul(&sigma);
        }
        xi_i = xi_i.mul(&xi);
    }
    Ok(acc.scale_re(1.0 / (n * n) as f64))
}

/// From a decoupling unitary U on A = A₁⊗A₂ to an erasure ensemble: the
/// |A₂|² uniform unitaries V_ij = (1_{A₁} ⊗ Ξ^iΣ^j) U.
pub fn erasure_from_decoupling(
    u: &CMatrix,
    d1: usize,
    d2: usize,
) -> Result<UnitaryEnsemble, DecouplingError> {
    if u.rows != d1 * d2 {
        return Err(DecouplingError::BadSplit(d1, d2, u.rows));
    }
    if d2 < 2 {
        // trivial discarded factor: nothing to erase beyond U itself
        return Ok(UnitaryEnsemble::uniform(vec![u.clone()])?);
    }
    let (sigma, xi) = gen_pauli(d2)?;
    let id1 = CMatrix::identity(d1);
    let mut unitaries = Vec::with_capacity(d2 * d2);
    let mut xi_i = CMatrix::identity(d2);
    for _ in 0..d2 {
        let mut w = xi_i.clone();
        for _ in 0..d2 {
            unitaries.push(tensor(&id1, &w).mul(u));
            w = w.mul(&sigma);
        }
        xi_i = xi_i.mul(&xi);
    }
    Ok(UnitaryEnsemble::uniform(unitaries)?)
}

/// From an erasure ensemble back to a decoupling protocol: the classical
/// control register (diagonal ancilla of the weights) and the controlled
/// unitary Σ_i U_i ⊗ |i⟩⟨i| on A ⊗ control, with the split (|A|, N).
pub fn decoupling_from_erasure(
    ens: &UnitaryEnsemble,
) -> Result<(CMatrix, CMatrix, (usize, usize)), DecouplingError> {
    let n = ens.unitaries.len();
    let d = ens.dim();
    let total = d * n;
    if total > crate::DIM_GUARD {
        return Err(DecouplingError::DimGuard(total, crate::DIM_GUARD));
    }
    let ancilla = CMatrix::diag(
        &ens.weights
            .iter()
            .map(|&w| Complex64::new(w, 0.0))
            .collect::<Vec<_>>(),
    );
    let mut ctrl = CMatrix::zeros(total, total);
    for (i, u) in ens.unitaries.iter().enumerate() {
        for r in 0..d {
            for c in 0..d {
                ctrl[(r * n + i, c * n + i)] = u[(r, c)];
            }
        }
    }
    Ok((ancilla, ctrl, (d, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, max_mixed, Normalization};
    use crate::tensorlab::{random_density, random_density_rng};
    use rand::Rng;

    #[test]
    fn convex_split_n_examples() {
        assert_eq!(convex_split_n(0.01, 0.1).unwrap().n, 1);
        assert_eq!(convex_split_n(1.0, 0.1).unwrap().n, 53151);
        let mut prev = 0;
        for k in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let n = convex_split_n(k, 0.1).unwrap().n;
            assert!(n >= prev);
            prev = n;
        }
        assert!(convex_split_n(1.0, 0.2).is_err());
    }

    #[test]
    fn convex_split_state_basics() {
        let rho = MultiState {
            matrix: random_density(4, 4, 1),
            shape: Shape::new(vec![2, 2]),
            normalization: Normalization::Normalized,
        };
        let sigma = random_density(2, 2, 2);
        // n = 1 returns the input itself
        let tau1 = convex_split_state(&rho, &sigma, 1).unwrap();
        assert!(tau1.matrix.sub(&rho.matrix).frobenius_norm() < 1e-12);
        // marginal on A equals ρ_A for any n
        let tau = convex_split_state(&rho, &sigma, 4).unwrap();
        let ma = tau.marginal(&[0]).unwrap();
        let ra = rho.marginal(&[0]).unwrap();
        assert!(ma.matrix.sub(&ra.matrix).frobenius_norm() < 1e-12);
        // product input stays product with a symmetric E block
        let prod = MultiState {
            matrix: tensor(&random_density(2, 2, 3), &sigma),
            shape: Shape::new(vec![2, 2]),
            normalization: Normalization::Normalized,
        };
        let taup = convex_split_state(&prod, &sigma, 3).unwrap();
        let (mi, _) = convex_split_figures(&taup).unwrap();
        assert!(mi.abs() < 1e-9);
    }

    #[test]
    fn convex_split_conclusions_qubit() {
        // small-overlap qubit instance with n from the formula, in guard
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..5 {
            let sigma = random_density_rng(2, 2, &mut rng);
            // ρ_AE close to ρ_A ⊗ σ so that the overlap k is small
            let rho_a = random_density_rng(2, 2, &mut rng);
            let noise = random_density_rng(4, 4, &mut rng);
            let eps = 0.01;
            let mix = tensor(&rho_a, &sigma)
                .scale_re(1.0 - eps)
                .add(&noise.scale_re(eps));
            let rho = MultiState {
                matrix: mix,
                shape: Shape::new(vec![2, 2]),
                normalization: Normalization::Normalized,
            };
            let k = crate::entropy::d_max(&rho.matrix, &tensor(&rho.marginal(&[0]).unwrap().matrix, &sigma))
                .unwrap()
                .max(0.0);
            let delta = (k / 3.0 + 0.02).min(0.16);
            let spec = convex_split_n(k, delta).unwrap();
            let n = spec.n.min(5); // guard; any larger n only helps
            let tau = convex_split_state(&rho, &sigma, n).unwrap();
            let (mi, p) = convex_split_figures(&tau).unwrap();
            assert!(mi <= 3.0 * delta + 1e-8, "I = {mi}, 3δ = {}", 3.0 * delta);
            assert!(p <= (6.0 * delta).sqrt() + 1e-6, "P = {p}");
        }
    }

    #[test]
    fn cds_unitary_properties() {
        let u = cds_unitary(3, 2).unwrap();
        assert!(u.unitarity_residual() < 1e-10);
        // control |0⟩ block is the identity on the copies
        let body = 8;
        for idx in 0..body {
            for out in 0..body {
                let v = u[(out * 3, idx * 3)];
                let expect = if out == idx { 1.0 } else { 0.0 };
                assert!((v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn superdense_compress_properties() {
        let u = superdense_compress(2).unwrap();
        assert!(u.unitarity_residual() < 1e-10);
        let basis = bell_basis(2).unwrap();
        for (col, psi) in basis.iter().enumerate() {
            for (row, &a) in psi.amplitudes.iter().enumerate() {
                assert!((u[(row, col)] - a).norm() < 1e-12);
            }
        }
        // each compressed basis state has maximally mixed one-sided marginal
        let u3 = superdense_compress(3).unwrap();
        for col in 0..9 {
            let v: Vec<Complex64> = (0..9).map(|r| u3[(r, col)]).collect();
            let rho = crate::tensorlab::outer(&v, &v);
            let m = partial_trace(&rho, &Shape::new(vec![3, 3]), &[0]).unwrap();
            assert!(m.sub(&max_mixed(3).matrix).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn random_trial_examples() {
        // fully discarded product state decouples exactly
        let prod = MultiState {
            matrix: tensor(&random_density(2, 2, 11), &random_density(2, 2, 12)),
            shape: Shape::new(vec![2, 2]),
            normalization: Normalization::Normalized,
        };
        let r = random_decouple_trial(&prod, (1, 2), 1).unwrap();
        assert!(r.distance < 1e-6, "distance {}", r.distance);

        // φ⁺ with nothing discarded stays correlated
        let phi = max_entangled(2).density();
        for seed in 0..20u64 {
            let r = random_decouple_trial(&phi, (2, 1), seed).unwrap();
            assert!(r.distance > 0.5, "distance {}", r.distance);
        }
    }

    #[test]
    fn random_trial_trend() {
        // average distance decreases as more of A is discarded
        let rho = MultiState {
            matrix: random_density(8, 8, 21),
            shape: Shape::new(vec![4, 2]),
            normalization: Normalization::Normalized,
        };
        let avg = |split: (usize, usize)| -> f64 {
            (0..50)
                .map(|s| random_decouple_trial(&rho, split, s).unwrap().distance)
                .sum::<f64>()
                / 50.0
        };
        let a0 = avg((4, 1));
        let a1 = avg((2, 2));
        let a2 = avg((1, 4));
        assert!(a0 > a1 && a1 > a2, "trend {a0} {a1} {a2}");
    }

    #[test]
    fn bound_examples() {
        let pure = crate::states::PureVec::basis_state(2, 0);
        let prod = MultiState {
            matrix: tensor(&pure.density().matrix, &pure.density().matrix),
            shape: Shape::new(vec![2, 2]),
            normalization: Normalization::Normalized,
        };
        assert!(decoupling_bound(&prod).unwrap().abs() < 1e-8);

        let phi = max_entangled(2).density();
        assert!((decoupling_bound(&phi).unwrap() - 1.0).abs() < 1e-8);

        let v = catalytic_size_bound(2.0, 0.1).unwrap();
        let expect = 0.5 * 2.0 + 4.0 * 10f64.log2();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn gen_pauli_properties() {
        let (sigma, xi) = gen_pauli(2).unwrap();
        assert!(sigma.sub(&CMatrix::diag_real(&[1.0, -1.0])).frobenius_norm() < 1e-12);
        assert!(xi.sub(&CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])).frobenius_norm() < 1e-12);

        // commutation phase for N = 4
        let (s4, x4) = gen_pauli(4).unwrap();
        let lhs = s4.mul(&x4);
        let a = 2.0 * std::f64::consts::PI / 4.0;
        let rhs = x4.mul(&s4).scale(Complex64::new(a.cos(), a.sin()));
        assert!(lhs.sub(&rhs).frobenius_norm() < 1e-12);
    }

    #[test]
    fn heisenberg_twirl_depolarizes() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for n in 2..=6usize {
            let x = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let tw = heisenberg_twirl(&x, n).unwrap();
            let target = CMatrix::identity(n).scale(x.trace() / Complex64::new(n as f64, 0.0));
            assert!(tw.sub(&target).max_abs_entry() < 1e-10);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        assert!(tw[(i, j)].norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn erasure_equivalence() {
        // trivial discarded factor → singleton ensemble
        let triv = erasure_from_decoupling(&CMatrix::identity(2), 2, 1).unwrap();
        assert_eq!(triv.unitaries.len(), 1);

        // φ⁺ erased by the 4-element qubit ensemble (|A₂| = 2, U = 1)
        let phi = max_entangled(2).density();
        let ens = erasure_from_decoupling(&CMatrix::identity(2), 1, 2).unwrap();
        assert_eq!(ens.unitaries.len(), 4);
        assert!((ens.unitaries.len() as f64).log2() == 2.0 * (2f64).log2());
        let mut avg = CMatrix::zeros(4, 4);
        for (u, &w) in ens.unitaries.iter().zip(ens.weights.iter()) {
            let big = tensor(u, &CMatrix::identity(2));
            avg = avg.add(&big.mul(&phi.matrix).mul(&big.dagger()).scale_re(w));
        }
        let rho_e = phi.marginal(&[1]).unwrap();
        let target = tensor(&max_mixed(2).matrix, &rho_e.matrix);
        let dist = crate::metrics::herm_trace_norm(&avg.sub(&target)).unwrap() * 0.5;
        assert!(dist < 1e-10, "distance {dist}");

        // round trip: controlled unitary with the diagonal ancilla reproduces
        // the mixture channel exactly
        let (ancilla, ctrl, (d, nk)) = decoupling_from_erasure(&ens).unwrap();
        assert_eq!((d, nk), (2, 4));
        let joint = tensor(&phi.matrix, &ancilla);
        // order: A, E, K — move K next to A for the controlled action
        let fine = Shape::new(vec![2, 2, 4]);
        let perm = permute_systems(&joint, &fine, &[0, 2, 1]).unwrap(); // A,K,E
        let big = tensor(&ctrl, &CMatrix::identity(2));
        let evolved = big.mul(&perm).mul(&big.dagger());
        let back = partial_trace(&evolved, &Shape::new(vec![2, 4, 2]), &[0, 2]).unwrap();
        assert!(back.sub(&avg).frobenius_norm() < 1e-9);
    }
}
