//! Port-based teleportation with a maximally entangled resource and the
//! pretty good measurement: protocol assembly, entanglement fidelity,
//! covariance checking, port-count lower bounds, projective-unitary metric,
//! and covering/program-register bound evaluators.

use crate::channels::{channel_from_cj, Channel, ChannelError, Povm};
use crate::metrics::{herm_trace_norm, unitary_eigenphases, MetricError};
use crate::states::{max_entangled, MultiState, Normalization, StateError};
use crate::tensorlab::{
    mat_func, partial_trace, permute_systems, random_density_rng, random_unitary_rng, tensor,
    CMatrix, LinalgError, MatFunc, Shape,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest measured-register dimension d^{N+1} accepted by the PGM
/// constructors; the fidelity path only ever materializes objects of this
/// side length, never the full protocol space.
pub const PGM_DIM_GUARD: usize = 512;

#[derive(Debug, Error)]
pub enum PbtError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("measured register dimension {0} exceeds the guard {1}")]
    DimGuard(usize, usize),
    #[error("{0}")]
    Invalid(String),
}

/// Protocol data: port dimension, port count, the maximally entangled
/// resource φ⁺^{⊗N} (subsystem order A₁,B₁,…,A_N,B_N), and the pretty good
/// measurement on A₀A₁…A_N.
#[derive(Debug, Clone)]
pub struct PbtInstance {
    pub d: usize,
    pub n: usize,
    pub resource: MultiState,
    pub povm: Povm,
}

/// Port-count bounds at a given (d, ε) operating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_lower_comm: f64,
    pub n_lower_ns: f64,
    pub n_lower_combined: f64,
    pub n_achievable: f64,
}

fn measured_dim(d: usize, n: usize) -> Result<usize, PbtError> {
    if d < 2 || n == 0 {
        return Err(PbtError::Invalid("require d >= 2 and N >= 1".into()));
    }
    let dim = d
        .checked_pow((n + 1) as u32)
        .ok_or_else(|| PbtError::DimGuard(usize::MAX, PGM_DIM_GUARD))?;
    if dim > PGM_DIM_GUARD {
        return Err(PbtError::DimGuard(dim, PGM_DIM_GUARD));
    }
    Ok(dim)
}

/// Signal state ζ_i = φ⁺_{A₀A_i} ⊗ τ_{A_{i^c}} on A₀A₁…A_N (port index i is
/// 1-based).
fn signal_state(d: usize, n: usize, i: usize) -> Result<CMatrix, PbtError> {
    let phi = max_entangled(d).density();
    let tau = CMatrix::identity(d).scale_re(1.0 / d as f64);
    // build on order (A₀, A_i, others ascending), then permute A_i into place
    let mut m = phi.matrix;
    for _ in 0..(n - 1) {
        m = tensor(&m, &tau);
    }
    let mut perm = vec![0usize; n + 1];
    let mut next_other = 2;
    for slot in 1..=n {
        perm[slot] = if slot == i {
            1
        } else {
            let p = next_other;
            next_other += 1;
            p
        };
    }
    Ok(permute_systems(&m, &Shape::new(vec![d; n + 1]), &perm)?)
}

/// The pretty good measurement effects E_i = ζ^{−1/2}(ζ_i/N)ζ^{−1/2}, with
/// the kernel of ζ = (1/N)Σζ_i shared equally among the N effects.
pub fn pgm_effects(d: usize, n: usize) -> Result<Vec<CMatrix>, PbtError> {
    let dim = measured_dim(d, n)?;
    let signals: Vec<CMatrix> = (1..=n)
        .map(|i| signal_state(d, n, i))
        .collect::<Result<_, _>>()?;
    let mut zeta = CMatrix::zeros(dim, dim);
    for s in &signals {
        zeta = zeta.add(s);
    }
    zeta = zeta.scale_re(1.0 / n as f64);
    let z = mat_func(&zeta, MatFunc::PinvSqrt)?;
    let pi_ker = CMatrix::identity(dim).sub(&z.mul(&zeta).mul(&z));
    let mut effects = Vec::with_capacity(n);
    for s in &signals {
        let e = z
            .mul(&s.scale_re(1.0 / n as f64))
            .mul(&z)
            .add(&pi_ker.scale_re(1.0 / n as f64));
        effects.push(e);
    }
    Ok(effects)
}

/// The pretty good measurement as a validated POVM on A₀A₁…A_N.
pub fn pgm_povm(d: usize, n: usize) -> Result<Povm, PbtError> {
    Ok(Povm::new(pgm_effects(d, n)?)?)
}

impl PbtInstance {
    pub fn new(d: usize, n: usize) -> Result<PbtInstance, PbtError> {
        let povm = pgm_povm(d, n)?;
        let phi = max_entangled(d).density();
        let mut m = phi.matrix.clone();
        for _ in 0..(n - 1) {
            m = tensor(&m, &phi.matrix);
        }
        let resource = MultiState {
            matrix: m,
            shape: Shape::new(vec![d; 2 * n]),
            normalization: Normalization::Normalized,
        };
        Ok(PbtInstance {
            d,
            n,
            resource,
            povm,
        })
    }
}

/// Choi state of the teleportation channel (output-first convention,
/// subsystems [B_selected, reference]), assembled without materializing the
/// full protocol space: feeding one half of φ⁺ through the protocol leaves
/// the mirror register in Σ_i tr_{B_{i^c}}(E_iᵀ)/d^{N+1}.
pub fn pbt_choi(d: usize, n: usize) -> Result<CMatrix, PbtError> {
    let dim = measured_dim(d, n)?;
    let effects = pgm_effects(d, n)?;
    let mirror = Shape::new(vec![d; n + 1]);
    let mut eta = CMatrix::zeros(d * d, d * d);
    for (idx, e) in effects.iter().enumerate() {
        let i = idx + 1;
        let et = CMatrix::from_fn(dim, dim, |r, c| e[(c, r)]);
        // mirror slot 0 is the reference, slot i the selected port output
        let kept = partial_trace(&et, &mirror, &[0, i])?; // order (ref, B_i)
        let swapped = permute_systems(&kept, &Shape::new(vec![d, d]), &[1, 0])?;
        eta = eta.add(&swapped);
    }
    Ok(eta.scale_re(1.0 / dim as f64))
}

/// The teleportation channel Λ(X) = Σ_i tr_{A₀A^N B_{i^c}} E_i (X ⊗ ρ).
pub fn pbt_channel(d: usize, n: usize) -> Result<Channel, PbtError> {
    Ok(channel_from_cj(&pbt_choi(d, n)?, d, d)?)
}

/// Entanglement fidelity F = √⟨φ⁺|η|φ⁺⟩ of the teleportation channel.
pub fn pbt_fidelity(d: usize, n: usize) -> Result<f64, PbtError> {
    let eta = pbt_choi(d, n)?;
    let phi = max_entangled(d);
    let mut acc = Complex64::new(0.0, 0.0);
    let dd = d * d;
    for r in 0..dd {
        for c in 0..dd {
            acc += phi.amplitudes[r].conj() * eta[(r, c)] * phi.amplitudes[c];
        }
    }
    Ok(acc.re.clamp(0.0, 1.0).sqrt())
}

/// Sampled covariance defect: max over Haar unitaries U and random inputs ρ
/// of ‖U†Λ(UρU†)U − Λ(ρ)‖₁.
pub fn covariance_check(ch: &Channel, trials: usize, seed: u64) -> Result<f64, PbtError> {
    let d = ch.in_dim();
    if ch.out_dim() != d {
        return Err(PbtError::Invalid("channel must be square".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let rho = random_density_rng(d, d, &mut rng);
        let u = random_unitary_rng(d, &mut rng);
        let rotated = ch.apply_matrix(&u.mul(&rho).mul(&u.dagger()));
        let back = u.dagger().mul(&rotated).mul(&u);
        let diff = back.sub(&ch.apply_matrix(&rho));
        worst = worst.max(herm_trace_norm(&diff)?);
    }
    Ok(worst)
}

/// Port-count bounds for a (d, ε) protocol: the communication bound
/// d²(1−ε²)², the non-signalling bound d/(2√(2ε)), their combination
/// d·max(1/(2√(2ε)), d(1−ε²)²), and the achievable count ⌈d²/ε²⌉.
pub fn pbt_bounds(d: usize, eps: f64) -> Result<BoundReport, PbtError> {
    if d < 2 {
        return Err(PbtError::Invalid("require d >= 2".into()));
    }
    if !(eps > 0.0 && eps <= std::f64::consts::FRAC_1_SQRT_2) {
        return Err(PbtError::Invalid("require 0 < eps <= 1/sqrt(2)".into()));
    }
    let df = d as f64;
    let comm = df * df * (1.0 - eps * eps).powi(2);
    let ns = df / (2.0 * (2.0 * eps).sqrt());
    let combined = df * (1.0 / (2.0 * (2.0 * eps).sqrt())).max(df * (1.0 - eps * eps).powi(2));
    let achievable = (df * df / (eps * eps)).ceil();
    Ok(BoundReport {
        n_lower_comm: comm,
        n_lower_ns: ns,
        n_lower_combined: combined,
        n_achievable: achievable,
    })
}

/// Port-guessing probabilities (p_real, p_ideal) = (1/d², 1/N + (N−1)/(Nd²)).
pub fn guessing_probabilities(d: usize, n: usize) -> Result<(f64, f64), PbtError> {
    if d == 0 || n == 0 {
        return Err(PbtError::Invalid("require d, N >= 1".into()));
    }
    let dd = (d * d) as f64;
    let nf = n as f64;
    Ok((1.0 / dd, 1.0 / nf + (nf - 1.0) / (nf * dd)))
}

/// Projective-unitary distance min over global phases of ‖U − zV‖_∞,
/// computed as √(2 − 2cos(Δφ/2)) where Δφ is the minimal arc covering the
/// eigenphases of UV†.
pub fn pu_metric(u: &CMatrix, v: &CMatrix) -> Result<f64, PbtError> {
    if u.rows != v.rows || u.cols != v.cols || !u.is_square() {
        return Err(PbtError::Invalid("require square unitaries of equal dimension".into()));
    }
    let w = u.mul(&v.dagger());
    let mut phases = unitary_eigenphases(&w)?;
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut max_gap = phases[0] + two_pi - phases[phases.len() - 1];
    for k in 1..phases.len() {
        max_gap = max_gap.max(phases[k] - phases[k - 1]);
    }
    let arc = (two_pi - max_gap).max(0.0);
    Ok((2.0 - 2.0 * (arc / 2.0).cos()).max(0.0).sqrt())
}

/// Program-register dimension bounds for ε-approximate universal programming
/// of U(d). With δ₁ = 2(√(2ε)+7ε+2√2ε^{3/2}+3ε²) and δ₂ = 2ε+ε², the primary
/// bound applies when 8δ₁+δ₂ < 1/2; the alternative bound needs the caller
/// to supply its universal constant η.
pub fn upqp_bounds(d: usize, eps: f64, eta: Option<f64>) -> Result<(Option<f64>, Option<f64>), PbtError> {
    if d < 2 || eps <= 0.0 {
        return Err(PbtError::Invalid("require d >= 2 and eps > 0".into()));
    }
    let df = d as f64;
    let d1 = 2.0
        * ((2.0 * eps).sqrt()
            + 7.0 * eps
            + 2.0 * std::f64::consts::SQRT_2 * eps.powf(1.5)
            + 3.0 * eps * eps);
    let d2 = 2.0 * eps + eps * eps;
    let d4 = 8.0 * d1 + d2;
    let primary = if d4 < 0.5 {
        let s = 4.0 * d1 + d2;
        let base = (std::f64::consts::PI * df / std::f64::consts::E).powf(df) * s * s;
        Some((1.0 / (2.0 * s * s)) * base.powf(2.0 / (df * df + 1.0)).min(1.0))
    } else {
        None
    };
    let alt = match eta {
        Some(c) if c > 0.0 && d4 < 1.0 => {
            let num = c * (df * (std::f64::consts::PI * df / std::f64::consts::E).ln() + df * df - 1.0);
            Some(num / (2.0 * d4 * d4 * (1.0 / d4).ln()))
        }
        _ => None,
    };
    Ok((primary, alt))
}

/// Covering-number figures on the projective unitary group: the metric
/// entropy lower bound π^d·d!/(4ε)^{d²−1}, its reciprocal as a ball-volume
/// upper bound, and the almost-orthogonal-set cardinality bound with its
/// three regimes switching at ε = 1/(2d) and ε = 1/√(2d) (η supplied by the
/// caller for the last regime).
pub fn covering_bounds(d: usize, eps: f64, eta: f64) -> Result<(f64, f64, f64), PbtError> {
    if d < 2 || !(eps > 0.0 && eps < std::f64::consts::FRAC_PI_2) || eta <= 0.0 {
        return Err(PbtError::Invalid(
            "require d >= 2, 0 < eps < pi/2, eta > 0".into(),
        ));
    }
    let df = d as f64;
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    let metric_entropy_lb = std::f64::consts::PI.powf(df) * fact / (4.0 * eps).powf(df * df - 1.0);
    let ball_volume_ub = 1.0 / metric_entropy_lb;
    let almost_orth_ub = if eps < 1.0 / (2.0 * df) {
        2.0 * df
    } else if eps < 1.0 / (2.0 * df).sqrt() {
        4.0 * df
    } else {
        eps.powf(-(2.0 / eta) * eps * eps * df)
    };
    Ok((metric_entropy_lb, ball_volume_ub, almost_orth_ub))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Channel;
    use crate::tensorlab::random_unitary_rng;
    use rand::SeedableRng;

    #[test]
    fn pgm_small_cases() {
        // N = 1: completeness forces the single effect to be the identity
        let povm = pgm_povm(2, 1).unwrap();
        assert_eq!(povm.effects.len(), 1);
        assert!(povm.effects[0].sub(&CMatrix::identity(4)).max_abs_entry() < 1e-10);

        // d=2, N=2: PSD and complete (validated inside Povm::new)
        let povm = pgm_povm(2, 2).unwrap();
        assert_eq!(povm.effects.len(), 2);

        // permutation covariance: swapping ports 1 and 2 maps E_1 <-> E_2
        let s = Shape::new(vec![2, 2, 2]);
        let swapped = permute_systems(&povm.effects[0], &s, &[0, 2, 1]).unwrap();
        assert!(swapped.sub(&povm.effects[1]).max_abs_entry() < 1e-9);
    }

    #[test]
    fn instance_construction() {
        let inst = PbtInstance::new(2, 2).unwrap();
        assert_eq!(inst.resource.shape.dims, vec![2, 2, 2, 2]);
        assert!((inst.resource.matrix.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_small_cases() {
        // single unread port: only the maximally mixed marginal arrives
        for d in 2..=3usize {
            let f = pbt_fidelity(d, 1).unwrap();
            assert!((f - 1.0 / d as f64).abs() < 1e-10, "d={d}, F={f}");
        }
        // monotone in the port count at d = 2
        let mut prev = 0.0;
        for n in 1..=4usize {
            let f = pbt_fidelity(2, n).unwrap();
            assert!(f >= prev - 1e-12, "N={n}: {f} < {prev}");
            assert!(f < 1.0);
            prev = f;
        }
    }

    #[test]
    fn choi_matches_channel_route() {
        let eta = pbt_choi(2, 2).unwrap();
        assert!((eta.trace().re - 1.0).abs() < 1e-10);
        let ch = pbt_channel(2, 2).unwrap();
        assert!(ch.tp_residual() < 1e-8);
        let back = crate::channels::cj_state(&ch);
        assert!(back.matrix.sub(&eta).max_abs_entry() < 1e-9);
        // fidelity agrees with the channel-level entanglement fidelity
        let f1 = pbt_fidelity(2, 2).unwrap();
        let f2 = crate::metrics::entanglement_fidelity(&ch).unwrap();
        assert!((f1 - f2).abs() < 1e-9);
    }

    #[test]
    fn covariance_examples() {
        let dep = Channel::depolarizing(2);
        assert!(covariance_check(&dep, 20, 1).unwrap() < 1e-9);

        let ch = pbt_channel(2, 2).unwrap();
        assert!(covariance_check(&ch, 20, 2).unwrap() < 1e-8);

        // amplitude-damping-like map is not covariant
        let g: f64 = 0.5;
        let k0 = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
        let k1 = CMatrix::from_real(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]);
        let ad = Channel::new(vec![k0, k1], Shape::new(vec![2]), Shape::new(vec![2])).unwrap();
        assert!(covariance_check(&ad, 50, 3).unwrap() > 0.1);
    }

    #[test]
    fn bounds_arithmetic() {
        let b = pbt_bounds(2, 0.1).unwrap();
        assert!((b.n_lower_comm - 4.0 * 0.99f64.powi(2)).abs() < 1e-12);
        assert!((b.n_lower_ns - 2.0 / (2.0 * 0.2f64.sqrt())).abs() < 1e-12);
        assert!((b.n_lower_combined - 3.9204).abs() < 1e-10);
        assert!((b.n_achievable - 400.0).abs() < 1e-12);
        for eps in [0.02, 0.1, 0.3, std::f64::consts::FRAC_1_SQRT_2] {
            let b = pbt_bounds(3, eps).unwrap();
            assert!(b.n_lower_combined >= b.n_lower_ns - 1e-12);
            assert!(b.n_lower_combined >= b.n_lower_comm - 1e-12);
            assert!(b.n_lower_combined.is_finite());
        }
        assert!(pbt_bounds(2, 0.8).is_err());
    }

    #[test]
    fn guessing_arithmetic() {
        assert_eq!(guessing_probabilities(3, 1).unwrap().1, 1.0);
        let (pr, pi) = guessing_probabilities(2, 4).unwrap();
        assert!((pr - 0.25).abs() < 1e-15);
        assert!((pi - 7.0 / 16.0).abs() < 1e-15);
        for d in 2..=4usize {
            for n in 1..=6usize {
                let (pr, pi) = guessing_probabilities(d, n).unwrap();
                assert!(pi > pr);
            }
        }
    }

    #[test]
    fn pu_metric_properties() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let u = random_unitary_rng(3, &mut rng);
        let z = Complex64::new(0.6f64.cos(), 0.6f64.sin());
        assert!(pu_metric(&u, &u.scale(z)).unwrap() < 1e-9);

        let v = CMatrix::diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]);
        let expect = (2.0 - 2.0 * (std::f64::consts::PI / 4.0).cos()).sqrt();
        assert!((pu_metric(&v, &CMatrix::identity(2)).unwrap() - expect).abs() < 1e-9);

        // triangle inequality and left invariance on random triples
        for _ in 0..30 {
            let a = random_unitary_rng(2, &mut rng);
            let b = random_unitary_rng(2, &mut rng);
            let c = random_unitary_rng(2, &mut rng);
            let ab = pu_metric(&a, &b).unwrap();
            let bc = pu_metric(&b, &c).unwrap();
            let ac = pu_metric(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9, "{ac} > {ab} + {bc}");
            let w = random_unitary_rng(2, &mut rng);
            let shifted = pu_metric(&w.mul(&a), &w.mul(&b)).unwrap();
            assert!((shifted - ab).abs() < 1e-9);
        }
    }

    #[test]
    fn upqp_examples() {
        // large eps violates the stated precondition
        let (p, _) = upqp_bounds(2, 0.2, None).unwrap();
        assert!(p.is_none());

        let (p, a) = upqp_bounds(2, 1e-6, Some(1.0)).unwrap();
        let p = p.unwrap();
        assert!(p.is_finite() && p > 0.0);
        assert!(a.unwrap() > 0.0);

        // non-increasing in eps below threshold
        let mut prev = f64::INFINITY;
        for eps in [1e-6, 1e-5, 1e-4, 2e-4] {
            let (p, _) = upqp_bounds(2, eps, None).unwrap();
            let p = p.unwrap();
            assert!(p <= prev + 1e-12);
            prev = p;
        }
    }

    #[test]
    fn covering_examples() {
        let (me, bv, _) = covering_bounds(2, 0.5, 1.0).unwrap();
        assert!((me - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-12);
        assert!((bv - 4.0 / std::f64::consts::PI.powi(2)).abs() < 1e-12);

        // regime switches at 1/(2d) and 1/sqrt(2d) for d = 8
        let (_, _, r1) = covering_bounds(8, 0.05, 1.0).unwrap();
        assert_eq!(r1, 16.0);
        let (_, _, r2) = covering_bounds(8, 0.2, 1.0).unwrap();
        assert_eq!(r2, 32.0);
        let (_, _, r3) = covering_bounds(8, 0.3, 1.0).unwrap();
        assert!((r3 - 0.3f64.powf(-2.0 * 0.09 * 8.0)).abs() < 1e-12);

        // ball volume bound stays finite near the upper end of the range
        let (_, bv, _) = covering_bounds(2, std::f64::consts::FRAC_PI_2 - 1e-9, 1.0).unwrap();
        assert!(bv.is_finite());
    }
}
