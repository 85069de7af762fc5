//! Distance and similarity measures on states and channels: trace distance,
//! (generalized) fidelity, purified distance, and closed-form diamond-norm
//! distances between unitary channels.

use crate::channels::{cj_state, tensor_ch, Channel, ChannelError};
use crate::states::{max_entangled, MultiState, StateError};
use crate::tensorlab::{
    herm_eig, mat_func, outer, random_pure_rng, CMatrix, LinalgError, MatFunc, Shape,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("input is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Trace distance, fidelity and purified distance of one pair of states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceReport {
    pub trace_distance: f64,
    pub fidelity: f64,
    pub purified_distance: f64,
}

/// Trace norm of a Hermitian matrix: sum of absolute eigenvalues.
pub fn herm_trace_norm(h: &CMatrix) -> Result<f64, MetricError> {
    let (eigs, _) = herm_eig(h)?;
    Ok(eigs.iter().map(|l| l.abs()).sum())
}

/// Trace distance δ(ρ,σ) = ½(‖ρ−σ‖₁ + |tr(ρ−σ)|), valid for subnormalized
/// inputs; reduces to ½‖ρ−σ‖₁ when both traces agree.
pub fn trace_distance(rho: &MultiState, sigma: &MultiState) -> Result<f64, MetricError> {
    trace_distance_matrices(&rho.matrix, &sigma.matrix)
}

pub fn trace_distance_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, MetricError> {
    if rho.rows != sigma.rows {
        return Err(MetricError::DimMismatch(rho.rows, sigma.rows));
    }
    let diff = rho.sub(sigma);
    let tn = herm_trace_norm(&diff)?;
    Ok(0.5 * (tn + diff.trace().re.abs()))
}

/// Fidelity ‖√ρ√σ‖₁, computed as Σ √eig(√σ ρ √σ).
pub fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, MetricError> {
    if rho.rows != sigma.rows {
        return Err(MetricError::DimMismatch(rho.rows, sigma.rows));
    }
    let ssig = mat_func(sigma, MatFunc::Sqrt)?;
    let inner = ssig.mul(rho).mul(&ssig);
    let (eigs, _) = herm_eig(&inner)?;
    Ok(eigs.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// Generalized fidelity F(ρ,σ) = ‖√ρ√σ‖₁ + √((1−trρ)(1−trσ)), clamped to
/// [0,1] against rounding.
pub fn generalized_fidelity(rho: &MultiState, sigma: &MultiState) -> Result<f64, MetricError> {
    let base = fidelity_matrices(&rho.matrix, &sigma.matrix)?;
    let ta = (1.0 - rho.matrix.trace().re).max(0.0);
    let tb = (1.0 - sigma.matrix.trace().re).max(0.0);
    Ok((base + (ta * tb).sqrt()).clamp(0.0, 1.0))
}

/// Purified distance P = √(1−F²).
pub fn purified_distance(rho: &MultiState, sigma: &MultiState) -> Result<f64, MetricError> {
    let f = generalized_fidelity(rho, sigma)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

pub fn distance_report(rho: &MultiState, sigma: &MultiState) -> Result<DistanceReport, MetricError> {
    let f = generalized_fidelity(rho, sigma)?;
    Ok(DistanceReport {
        trace_distance: trace_distance(rho, sigma)?,
        fidelity: f,
        purified_distance: (1.0 - f * f).max(0.0).sqrt(),
    })
}

/// Eigenphases of a unitary matrix, via a Hermitian linear combination of
/// W and W† whose eigenvectors diagonalize W; the combination is retried from
/// a fixed angle list if a degeneracy collision is detected.
pub fn unitary_eigenphases(w: &CMatrix) -> Result<Vec<f64>, MetricError> {
    let r = w.unitarity_residual();
    if r > 1e-8 {
        return Err(MetricError::NotUnitary { residual: r });
    }
    let n = w.rows;
    let wdag = w.dagger();
    let re_part = w.add(&wdag).scale_re(0.5);
    let im_part = w.sub(&wdag).scale(Complex64::new(0.0, -0.5));
    for &angle in &[1.0f64, 0.3, 2.1, 0.73, 1.77] {
        let h = re_part
            .scale_re(angle.cos())
            .add(&im_part.scale_re(angle.sin()));
        let (_, v) = herm_eig(&h)?;
        let mut phases = Vec::with_capacity(n);
        let mut ok = true;
        for k in 0..n {
            let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            let wv = w.mul(&CMatrix::col_vec(&col));
            let lam: Complex64 = col.iter().zip(wv.data.iter()).map(|(a, b)| a.conj() * b).sum();
            let resid: f64 = wv
                .data
                .iter()
                .zip(col.iter())
                .map(|(a, b)| (a - lam * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if resid > 1e-8 || (lam.norm() - 1.0).abs() > 1e-8 {
                ok = false;
                break;
            }
            phases.push(lam.arg());
        }
        if ok {
            return Ok(phases);
        }
    }
    Err(MetricError::Invalid(
        "failed to compute unitary eigenphases (degenerate combinations)".into(),
    ))
}

/// Diamond-norm distance ‖U·U† − V·V†‖⋄ between two unitary channels: the
/// diameter of the smallest disk containing the eigenvalues of UV†. If the
/// origin lies in the convex hull of the eigenvalues the distance is 2;
/// otherwise it is the chord between the endpoints of the minimal covering
/// arc of eigenphases.
pub fn diamond_unitary_diff(u: &CMatrix, v: &CMatrix) -> Result<f64, MetricError> {
    if u.rows != v.rows {
        return Err(MetricError::DimMismatch(u.rows, v.rows));
    }
    let w = u.mul(&v.dagger());
    let mut phases = unitary_eigenphases(&w)?;
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = phases.len();
    if n == 1 {
        return Ok(0.0);
    }
    // Angular gaps between consecutive eigenvalues (wrapping). The largest
    // gap determines the minimal covering arc; origin-in-hull is equivalent
    // to every gap being < π (the sign-of-area predicate sin(gap) > 0 for
    // angle-sorted points, with 1e-12 slack). Ties go to the first index.
    let mut best_gap = f64::NEG_INFINITY;
    let mut best_idx = 0usize;
    for i in 0..n {
        let next = phases[(i + 1) % n] + if i + 1 == n { 2.0 * std::f64::consts::PI } else { 0.0 };
        let gap = next - phases[i];
        if gap > best_gap + 1e-15 {
            best_gap = gap;
            best_idx = i;
        }
    }
    if best_gap < std::f64::consts::PI - 1e-12 {
        return Ok(2.0);
    }
    // Arc runs from the phase after the gap around to the phase before it.
    let first = phases[(best_idx + 1) % n];
    let last = phases[best_idx];
    let za = Complex64::new(first.cos(), first.sin());
    let zb = Complex64::new(last.cos(), last.sin());
    Ok((za - zb).norm().min(2.0))
}

/// Entanglement fidelity F(Λ) = F(η_Λ, φ⁺).
pub fn entanglement_fidelity(ch: &Channel) -> Result<f64, MetricError> {
    if ch.in_dim() != ch.out_dim() {
        return Err(MetricError::Invalid(
            "entanglement fidelity needs a square channel".into(),
        ));
    }
    let eta = cj_state(ch);
    let phi = max_entangled(ch.in_dim());
    // pure target: F = √(⟨φ⁺|η|φ⁺⟩)
    let v = CMatrix::col_vec(&phi.amplitudes);
    let val = v.dagger().mul(&eta.matrix).mul(&v)[(0, 0)].re;
    Ok(val.max(0.0).sqrt().min(1.0))
}

/// Two-sided bounds on ‖Λ − id‖⋄/2 from the entanglement fidelity:
/// 1−F² ≤ ‖Λ−id‖⋄/2 ≤ |A|√(1−F²).
pub fn ef_diamond_bounds(f: f64, d_a: usize) -> (f64, f64) {
    let s = (1.0 - f * f).max(0.0);
    (s, d_a as f64 * s.sqrt())
}

/// Diamond-norm upper bound from Choi states of TP maps:
/// ‖Λ₀ − Λ₁‖⋄ ≤ |A|·‖η₀ − η₁‖₁. Errors if either reference marginal is not
/// maximally mixed (the input would not be a TP map's Choi state).
pub fn cj_to_diamond_bound(
    eta0: &MultiState,
    eta1: &MultiState,
    d_a: usize,
) -> Result<f64, MetricError> {
    for eta in [eta0, eta1] {
        if eta.shape.n_subsystems() != 2 {
            return Err(MetricError::Invalid("Choi state must be bipartite".into()));
        }
        let dref = *eta.shape.dims.last().unwrap();
        let marg = eta.marginal(&[1])?;
        let resid = marg
            .matrix
            .sub(&CMatrix::identity(dref).scale_re(1.0 / dref as f64))
            .max_abs_entry();
        if resid > 1e-6 {
            return Err(MetricError::Invalid(format!(
                "reference marginal deviates from maximally mixed by {resid:.3e}"
            )));
        }
    }
    Ok(d_a as f64 * herm_trace_norm(&eta0.matrix.sub(&eta1.matrix))?)
}

/// Monte-Carlo lower bound on ‖Λ₀ − Λ₁‖⋄: maximum of ‖(Λ₀−Λ₁)⊗id (ψ)‖₁ over
/// Haar-random pure inputs with a reference of equal dimension.
pub fn diamond_lower_sample(
    l0: &Channel,
    l1: &Channel,
    trials: usize,
    seed: u64,
) -> Result<f64, MetricError> {
    if l0.in_dim() != l1.in_dim() || l0.out_dim() != l1.out_dim() {
        return Err(MetricError::DimMismatch(l0.in_dim(), l1.in_dim()));
    }
    let d = l0.in_dim();
    let idref = Channel::identity(d);
    let big0 = tensor_ch(l0, &idref);
    let big1 = tensor_ch(l1, &idref);
    let shape = Shape::new(vec![d, d]);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let psi = random_pure_rng(&shape, &mut rng);
        let rho = outer(&psi, &psi);
        let diff = big0.apply_matrix(&rho).sub(&big1.apply_matrix(&rho));
        best = best.max(herm_trace_norm(&diff)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{embed_subnormalized, max_mixed, PureVec};
    use crate::tensorlab::{random_density_rng, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn simple(m: CMatrix) -> MultiState {
        MultiState::simple(m).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let rho = simple(crate::tensorlab::random_density(3, 3, 1));
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);

        let p0 = PureVec::basis_state(2, 0).density();
        let p1 = PureVec::basis_state(2, 1).density();
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);

        let half = embed_subnormalized(&rho, 0.5).unwrap();
        assert!((trace_distance(&rho, &half).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn fidelity_examples() {
        let rho = simple(crate::tensorlab::random_density(3, 2, 2));
        assert!((generalized_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        assert!(purified_distance(&rho, &rho).unwrap() < 1e-5);

        let tau = max_mixed(2);
        let p0 = PureVec::basis_state(2, 0).density();
        let f = generalized_fidelity(&tau, &p0).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn fuchs_van_de_graaf_chain() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..100 {
            let d = 2 + rand::Rng::gen_range(&mut rng, 0..7) as usize;
            let rho = simple(random_density_rng(d, d, &mut rng));
            let sigma = simple(random_density_rng(d, 1 + d / 2, &mut rng));
            let delta = trace_distance(&rho, &sigma).unwrap();
            let p = purified_distance(&rho, &sigma).unwrap();
            let lhs = 1.0 - (1.0 - p * p).max(0.0).sqrt();
            assert!(0.5 * p * p <= lhs + 1e-9);
            assert!(lhs <= delta + 1e-9);
            assert!(delta <= p + 1e-9);
        }
    }

    #[test]
    fn monotone_under_partial_trace() {
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        let shape = Shape::new(vec![2, 2, 2]);
        for _ in 0..50 {
            let a = MultiState::new(
                random_density_rng(8, 8, &mut rng),
                shape.clone(),
                crate::states::Normalization::Normalized,
            )
            .unwrap();
            let b = MultiState::new(
                random_density_rng(8, 8, &mut rng),
                shape.clone(),
                crate::states::Normalization::Normalized,
            )
            .unwrap();
            let d_full = trace_distance(&a, &b).unwrap();
            let p_full = purified_distance(&a, &b).unwrap();
            let am = a.marginal(&[0, 1]).unwrap();
            let bm = b.marginal(&[0, 1]).unwrap();
            assert!(trace_distance(&am, &bm).unwrap() <= d_full + 1e-9);
            assert!(purified_distance(&am, &bm).unwrap() <= p_full + 1e-9);
        }
    }

    #[test]
    fn diamond_unitary_examples() {
        let u = random_unitary(3, 5);
        assert!(diamond_unitary_diff(&u, &u).unwrap() < 1e-9);

        // diag(1, i) vs 1 → |1−i| = √2
        let u2 = CMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let id = CMatrix::identity(2);
        assert!((diamond_unitary_diff(&u2, &id).unwrap() - 2.0f64.sqrt()).abs() < 1e-9);

        // Z vs 1 → antipodal eigenvalues → 2
        let z = CMatrix::diag_real(&[1.0, -1.0]);
        assert!((diamond_unitary_diff(&z, &id).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entanglement_fidelity_examples() {
        let id = Channel::identity(2);
        let f = entanglement_fidelity(&id).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let (lo, hi) = ef_diamond_bounds(f, 2);
        assert!(lo.abs() < 1e-10 && hi.abs() < 1e-5);

        let dep = Channel::depolarizing(2);
        assert!((entanglement_fidelity(&dep).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn unitary_channel_bound_consistency() {
        for seed in 0..10u64 {
            let u = random_unitary(2, 60 + seed);
            let ch = Channel::from_unitary(&u).unwrap();
            let f = entanglement_fidelity(&ch).unwrap();
            let dd = diamond_unitary_diff(&u, &CMatrix::identity(2)).unwrap();
            assert!(2.0 * (1.0 - f * f) <= dd + 1e-9);
        }
    }

    #[test]
    fn cj_bound_examples() {
        let id = Channel::identity(2);
        let eta = cj_state(&id);
        assert!(cj_to_diamond_bound(&eta, &eta, 2).unwrap() < 1e-10);

        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let chx = Channel::from_unitary(&x).unwrap();
        let etax = cj_state(&chx);
        let bound = cj_to_diamond_bound(&eta, &etax, 2).unwrap();
        let sampled = diamond_lower_sample(&id, &chx, 100, 1).unwrap();
        assert!(bound >= sampled - 1e-9);

        // marginal check rejects a non-TP Choi input
        let bad = MultiState::new(
            CMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]),
            Shape::new(vec![2, 2]),
            crate::states::Normalization::Normalized,
        )
        .unwrap();
        assert!(cj_to_diamond_bound(&bad, &eta, 2).is_err());
    }

    #[test]
    fn diamond_lower_sample_examples() {
        let id = Channel::identity(2);
        assert!(diamond_lower_sample(&id, &id, 10, 1).unwrap() < 1e-12);

        let z = Channel::from_unitary(&CMatrix::diag_real(&[1.0, -1.0])).unwrap();
        let v = diamond_lower_sample(&id, &z, 1000, 2).unwrap();
        assert!(v > 1.9 && v <= 2.0 + 1e-9, "sampled {v}");
    }

    #[test]
    fn pure_state_norm_bridge() {
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let shape = Shape::new(vec![4]);
        for _ in 0..50 {
            let a = crate::tensorlab::random_pure_rng(&shape, &mut rng);
            let b = crate::tensorlab::random_pure_rng(&shape, &mut rng);
            let tn = herm_trace_norm(&outer(&a, &a).sub(&outer(&b, &b))).unwrap();
            let two_norm: f64 = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(tn <= 2.0 * two_norm + 1e-9);
        }
    }

    #[test]
    fn sampled_diamond_close_to_closed_form() {
        let u = random_unitary(2, 71);
        let v = random_unitary(2, 72);
        let exact = diamond_unitary_diff(&u, &v).unwrap();
        let chu = Channel::from_unitary(&u).unwrap();
        let chv = Channel::from_unitary(&v).unwrap();
        let sampled = diamond_lower_sample(&chu, &chv, 2000, 3).unwrap();
        assert!(sampled <= exact + 1e-9);
        assert!(exact - sampled < 0.05, "gap {}", exact - sampled);
    }
}
