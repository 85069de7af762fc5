//! Entropic quantities, all in bits: Shannon and von Neumann families,
//! relative and max-relative entropy, Rényi min/max entropies, max-mutual
//! information, and continuity-bound evaluators.

use crate::states::{MultiState, StateError};
use crate::tensorlab::{
    herm_eig, mat_func, partial_trace, tensor, CMatrix, LinalgError, MatFunc, Shape,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Eigenvalue cutoff for support/rank decisions.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("probability vector invalid: {0}")]
    BadProbabilities(String),
    #[error("subsystem sets overlap or fall outside the shape")]
    BadSubsystems,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyValue {
    pub kind: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrictions: Option<String>,
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon(p: &[f64]) -> Result<f64, EntropyError> {
    if p.iter().any(|&x| x < 0.0) {
        return Err(EntropyError::BadProbabilities("negative entry".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(EntropyError::BadProbabilities(format!("sum {s}")));
    }
    Ok(-p.iter().map(|&x| xlogx(x)).sum::<f64>())
}

/// Binary entropy h(q) = −q log q − (1−q) log(1−q).
pub fn binary_h(q: f64) -> Result<f64, EntropyError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(EntropyError::BadProbabilities(format!("q = {q}")));
    }
    Ok(-xlogx(q) - xlogx(1.0 - q))
}

/// Von Neumann entropy of a density matrix, in bits.
pub fn von_neumann_matrix(rho: &CMatrix) -> Result<f64, EntropyError> {
    let (eigs, _) = herm_eig(rho)?;
    Ok(-eigs.iter().map(|&l| xlogx(l.max(0.0))).sum::<f64>())
}

pub fn von_neumann(rho: &MultiState) -> Result<f64, EntropyError> {
    von_neumann_matrix(&rho.matrix)
}

fn check_disjoint(shape: &Shape, sets: &[&[usize]]) -> Result<(), EntropyError> {
    let n = shape.n_subsystems();
    let mut seen = vec![false; n];
    for set in sets {
        for &i in *set {
            if i >= n || seen[i] {
                return Err(EntropyError::BadSubsystems);
            }
            seen[i] = true;
        }
    }
    Ok(())
}

/// Entropy of the marginal on a union of subsystem sets; the empty union has
/// entropy exactly 0.
pub fn subset_entropy(rho: &MultiState, subsets: &[&[usize]]) -> Result<f64, EntropyError> {
    let mut keep: Vec<usize> = subsets.iter().flat_map(|s| s.iter().cloned()).collect();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let m = partial_trace(&rho.matrix, &rho.shape, &keep)?;
    von_neumann_matrix(&m)
}

/// Conditional entropy H(A|B) = H(AB) − H(B).
pub fn cond_entropy(rho: &MultiState, a: &[usize], b: &[usize]) -> Result<f64, EntropyError> {
    check_disjoint(&rho.shape, &[a, b])?;
    Ok(subset_entropy(rho, &[a, b])? - subset_entropy(rho, &[b])?)
}

/// Mutual information I(A:B) = H(A) + H(B) − H(AB).
pub fn mutual_info(rho: &MultiState, a: &[usize], b: &[usize]) -> Result<f64, EntropyError> {
    check_disjoint(&rho.shape, &[a, b])?;
    Ok(subset_entropy(rho, &[a])? + subset_entropy(rho, &[b])? - subset_entropy(rho, &[a, b])?)
}

/// Conditional mutual information
/// I(A:B|C) = H(AC) + H(BC) − H(ABC) − H(C).
pub fn cond_mutual_info(
    rho: &MultiState,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64, EntropyError> {
    check_disjoint(&rho.shape, &[a, b, c])?;
    Ok(subset_entropy(rho, &[a, c])? + subset_entropy(rho, &[b, c])?
        - subset_entropy(rho, &[a, b, c])?
        - subset_entropy(rho, &[c])?)
}

/// Projector onto the kernel of a PSD matrix (eigenvalues below the support
/// cutoff).
fn kernel_projector(m: &CMatrix) -> Result<CMatrix, EntropyError> {
    let (eigs, v) = herm_eig(m)?;
    let n = m.rows;
    let mut p = CMatrix::zeros(n, n);
    for (k, &lam) in eigs.iter().enumerate() {
        if lam < SUPPORT_CUTOFF {
            let col: Vec<_> = (0..n).map(|i| v[(i, k)]).collect();
            p = p.add(&crate::tensorlab::outer(&col, &col));
        }
    }
    Ok(p)
}

fn support_violated(rho: &CMatrix, sigma: &CMatrix) -> Result<bool, EntropyError> {
    let pker = kernel_projector(sigma)?;
    Ok(pker.mul(rho).trace().re > SUPPORT_CUTOFF)
}

/// Relative entropy D(ρ‖σ) = tr ρ(log ρ − log σ) in bits; +∞ when the
/// support of ρ leaks outside the support of σ.
pub fn rel_entropy(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, EntropyError> {
    if rho.rows != sigma.rows {
        return Err(EntropyError::DimMismatch(rho.rows, sigma.rows));
    }
    if support_violated(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let log_sigma = mat_func(sigma, MatFunc::Log2)?;
    let (eigs, _) = herm_eig(rho)?;
    let tr_rho_log_rho: f64 = eigs.iter().map(|&l| xlogx(l.max(0.0))).sum();
    let tr_rho_log_sigma = rho.frobenius_inner(&log_sigma).re;
    Ok(tr_rho_log_rho - tr_rho_log_sigma)
}

/// Max-relative entropy D_max(ρ‖σ) = log₂ max eig σ^{−1/2} ρ σ^{−1/2};
/// +∞ on support violation. σ may be an unnormalized positive operator.
pub fn d_max(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, EntropyError> {
    if rho.rows != sigma.rows {
        return Err(EntropyError::DimMismatch(rho.rows, sigma.rows));
    }
    if support_violated(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt = mat_func(sigma, MatFunc::PinvSqrt)?;
    let sandwich = inv_sqrt.mul(rho).mul(&inv_sqrt);
    let (eigs, _) = herm_eig(&sandwich)?;
    let max = eigs.last().copied().unwrap_or(0.0).max(0.0);
    if max == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(max.log2())
}

/// Min-entropy H_min = −log₂ ‖ρ‖_∞.
pub fn h_min(rho: &CMatrix) -> Result<f64, EntropyError> {
    let (eigs, _) = herm_eig(rho)?;
    let top = eigs.last().copied().unwrap_or(0.0).max(0.0);
    Ok(-top.log2())
}

/// Max-entropy H_max = 2 log₂ tr √ρ.
pub fn h_max(rho: &CMatrix) -> Result<f64, EntropyError> {
    let (eigs, _) = herm_eig(rho)?;
    // eigenvalues below the support cutoff are treated as exact zeros so that
    // numerically pure states report exactly zero
    let s: f64 = eigs
        .iter()
        .map(|&l| if l < SUPPORT_CUTOFF { 0.0 } else { l.sqrt() })
        .sum();
    Ok(2.0 * s.log2())
}

/// Rényi-0 entropy H₀ = log₂ rank, with the support eigenvalue cutoff.
pub fn h0(rho: &CMatrix) -> Result<f64, EntropyError> {
    let (eigs, _) = herm_eig(rho)?;
    let rank = eigs.iter().filter(|&&l| l >= SUPPORT_CUTOFF).count();
    Ok((rank as f64).log2())
}

/// Reorder a state so the A subsystems come first, then the B subsystems;
/// other subsystems are traced out. Returns (matrix on A⊗B, |A|, |B|).
fn bipartite_block(
    rho: &MultiState,
    a: &[usize],
    b: &[usize],
) -> Result<(CMatrix, usize, usize), EntropyError> {
    check_disjoint(&rho.shape, &[a, b])?;
    let keep: Vec<usize> = a.iter().chain(b.iter()).cloned().collect();
    let mut keep_sorted = keep.clone();
    keep_sorted.sort_unstable();
    let m = partial_trace(&rho.matrix, &rho.shape, &keep_sorted)?;
    let kept_shape = Shape::new(keep_sorted.iter().map(|&i| rho.shape.dims[i]).collect());
    // position of each original index within keep_sorted
    let pos = |orig: usize| keep_sorted.iter().position(|&k| k == orig).unwrap();
    let perm: Vec<usize> = keep.iter().map(|&orig| pos(orig)).collect();
    let reordered = crate::tensorlab::permute_systems(&m, &kept_shape, &perm)?;
    let da: usize = a.iter().map(|&i| rho.shape.dims[i]).product();
    let db: usize = b.iter().map(|&i| rho.shape.dims[i]).product();
    Ok((reordered, da, db))
}

/// Conditional min-entropy with the reference fixed to ρ_B:
/// H_min(A|B) = −D_max(ρ_AB ‖ 1_A ⊗ ρ_B). This lower-bounds the
/// σ_B-optimized conditional min-entropy.
pub fn h_min_cond_fixed(rho: &MultiState, a: &[usize], b: &[usize]) -> Result<f64, EntropyError> {
    let (m, da, db) = bipartite_block(rho, a, b)?;
    let rho_b = partial_trace(&m, &Shape::new(vec![da, db]), &[1])?;
    let reference = tensor(&CMatrix::identity(da), &rho_b);
    Ok(-d_max(&m, &reference)?)
}

/// Max-mutual information with the product reference fixed to ρ_A ⊗ ρ_B:
/// I_max(A:B) = D_max(ρ_AB ‖ ρ_A⊗ρ_B). This upper-bounds the σ_A-optimized
/// max-mutual information.
pub fn i_max_fixed(rho: &MultiState, a: &[usize], b: &[usize]) -> Result<f64, EntropyError> {
    let (m, da, db) = bipartite_block(rho, a, b)?;
    let s = Shape::new(vec![da, db]);
    let rho_a = partial_trace(&m, &s, &[0])?;
    let rho_b = partial_trace(&m, &s, &[1])?;
    d_max(&m, &tensor(&rho_a, &rho_b))
}

fn bloch_state(x: f64, y: f64, z: f64) -> CMatrix {
    let c = num_complex::Complex64::new;
    CMatrix {
        rows: 2,
        cols: 2,
        data: vec![
            c(0.5 * (1.0 + z), 0.0),
            c(0.5 * x, -0.5 * y),
            c(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z), 0.0),
        ],
    }
}

/// Grid-optimized max-mutual information min_{σ_A} D_max(ρ_AB ‖ σ_A⊗ρ_B)
/// for a qubit A: Bloch-ball grid search with up to 4 refinements around the
/// running minimum. The fixed reference σ_A = ρ_A is always a candidate, so
/// the result never exceeds [`i_max_fixed`].
pub fn i_max_opt(
    rho: &MultiState,
    a: &[usize],
    b: &[usize],
    grid_depth: usize,
) -> Result<f64, EntropyError> {
    let (m, da, db) = bipartite_block(rho, a, b)?;
    if da != 2 {
        return Err(EntropyError::Invalid(
            "grid optimizer supports |A| = 2 only".into(),
        ));
    }
    let depth = grid_depth.min(4);
    let s = Shape::new(vec![da, db]);
    let rho_a = partial_trace(&m, &s, &[0])?;
    let rho_b = partial_trace(&m, &s, &[1])?;
    let eval = |sigma_a: &CMatrix| -> Result<f64, EntropyError> {
        d_max(&m, &tensor(sigma_a, &rho_b))
    };
    let mut best = eval(&rho_a)?;
    // Bloch coordinates of ρ_A as the starting centre.
    let mut cx = 2.0 * rho_a[(0, 1)].re;
    let mut cy = 2.0 * rho_a[(1, 0)].im;
    let mut cz = rho_a[(0, 0)].re - rho_a[(1, 1)].re;
    let mut half = 1.0f64;
    let steps = 4i32;
    for _ in 0..=depth {
        let mut improved = (cx, cy, cz);
        for ix in -steps..=steps {
            for iy in -steps..=steps {
                for iz in -steps..=steps {
                    let x = cx + half * ix as f64 / steps as f64;
                    let y = cy + half * iy as f64 / steps as f64;
                    let z = cz + half * iz as f64 / steps as f64;
                    let r2 = x * x + y * y + z * z;
                    if r2 > 1.0 {
                        continue;
                    }
                    // shrink slightly inside the ball so σ has full support
                    let shrink = 1.0 - 1e-9;
                    let v = eval(&bloch_state(x * shrink, y * shrink, z * shrink))?;
                    if v < best {
                        best = v;
                        improved = (x, y, z);
                    }
                }
            }
        }
        (cx, cy, cz) = improved;
        half /= steps as f64;
    }
    Ok(best)
}

/// Continuity-bound right-hand sides for ‖ρ−ρ'‖₁ ≤ ε, in order:
/// single-system entropy, conditional entropy, mutual information,
/// conditional mutual information.
pub fn fannes_bounds(eps: f64, da: usize, db: usize) -> Result<[f64; 4], EntropyError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(EntropyError::Invalid("epsilon must be in [0,1)".into()));
    }
    let log_a_minus = if da > 1 { ((da - 1) as f64).log2() } else { 0.0 };
    let log_a = (da as f64).log2();
    let log_min = (da.min(db) as f64).log2();
    let h_half = binary_h(eps / 2.0)?;
    let h = binary_h(eps)?;
    Ok([
        eps / 2.0 * log_a_minus + h_half,
        4.0 * eps * log_a + 2.0 * h,
        5.0 * eps * log_min + 3.0 * h,
        8.0 * eps * log_min + 4.0 * h,
    ])
}

/// ε→0 surrogate bracket for the smoothed Rényi-0 entropy:
/// (H_max(ρ), H₀(ρ) + 2 log(1/ε)).
pub fn h0_hmax_bracket(rho: &CMatrix, eps: f64) -> Result<(f64, f64), EntropyError> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(EntropyError::Invalid("epsilon must be in (0,1)".into()));
    }
    Ok((h_max(rho)?, h0(rho)? + 2.0 * (1.0 / eps).log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{cq_state, max_entangled, max_mixed, MultiState, Normalization, PureVec};
    use crate::tensorlab::{random_density, random_density_rng, random_pure_rng, outer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn shannon_examples() {
        assert!((shannon(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert!(binary_h(0.0).unwrap().abs() < 1e-15);
        assert!(binary_h(1.0).unwrap().abs() < 1e-15);
        assert!((binary_h(0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(shannon(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn von_neumann_examples() {
        for d in [2usize, 3, 5] {
            let h = von_neumann(&max_mixed(d)).unwrap();
            assert!((h - (d as f64).log2()).abs() < 1e-10);
        }
        let phi = max_entangled(2).density();
        assert!(von_neumann(&phi).unwrap().abs() < 1e-9);
        assert!((mutual_info(&phi, &[0], &[1]).unwrap() - 2.0).abs() < 1e-9);
        // negative conditional entropy, exactly −1 for d=2
        assert!((cond_entropy(&phi, &[0], &[1]).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn cq_mutual_info_one_bit() {
        let p0 = PureVec::basis_state(2, 0).density();
        let p1 = PureVec::basis_state(2, 1).density();
        let cq = cq_state(&[0.5, 0.5], &[p0, p1]).unwrap();
        assert!((mutual_info(&cq, &[0], &[1]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chain_rule_four_party() {
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        let shape = Shape::new(vec![2, 2, 2, 2]);
        for _ in 0..10 {
            let rho = MultiState::new(
                random_density_rng(16, 16, &mut rng),
                shape.clone(),
                Normalization::Normalized,
            )
            .unwrap();
            let lhs = cond_mutual_info(&rho, &[0], &[1, 2], &[3]).unwrap();
            let rhs = cond_mutual_info(&rho, &[0], &[1], &[3]).unwrap()
                + cond_mutual_info(&rho, &[0], &[2], &[1, 3]).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn rel_entropy_examples() {
        let rho = random_density(3, 3, 61);
        assert!(rel_entropy(&rho, &rho).unwrap().abs() < 1e-8);

        let p0 = PureVec::basis_state(2, 0).density().matrix;
        let tau = max_mixed(2).matrix;
        assert!((rel_entropy(&p0, &tau).unwrap() - 1.0).abs() < 1e-10);
        assert!(rel_entropy(&tau, &p0).unwrap().is_infinite());
    }

    #[test]
    fn pinsker() {
        let mut rng = ChaCha12Rng::seed_from_u64(63);
        for _ in 0..100 {
            let d = 2 + rand::Rng::gen_range(&mut rng, 0..4) as usize;
            let rho = random_density_rng(d, d, &mut rng);
            let sigma = random_density_rng(d, d, &mut rng);
            let dval = rel_entropy(&rho, &sigma).unwrap();
            let tn = crate::metrics::herm_trace_norm(&rho.sub(&sigma)).unwrap();
            assert!(dval >= 0.5 * tn * tn - 1e-9);
            assert!(dval >= -1e-9);
        }
    }

    #[test]
    fn d_max_examples() {
        let rho = random_density(3, 3, 65);
        assert!(d_max(&rho, &rho).unwrap().abs() < 1e-8);
        let p0 = PureVec::basis_state(2, 0).density().matrix;
        let tau = max_mixed(2).matrix;
        assert!(d_max(&tau, &p0).unwrap().is_infinite());
        assert!((d_max(&p0, &tau).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn d_max_dominates_d() {
        let mut rng = ChaCha12Rng::seed_from_u64(67);
        for _ in 0..50 {
            let d = 2 + rand::Rng::gen_range(&mut rng, 0..3) as usize;
            let rho = random_density_rng(d, d, &mut rng);
            let sigma = random_density_rng(d, d, &mut rng);
            let dv = rel_entropy(&rho, &sigma).unwrap();
            let dm = d_max(&rho, &sigma).unwrap();
            assert!(dm >= dv - 1e-8);
        }
    }

    #[test]
    fn renyi_ordering() {
        for d in [2usize, 3, 5] {
            let tau = max_mixed(d).matrix;
            let l = (d as f64).log2();
            assert!((h_min(&tau).unwrap() - l).abs() < 1e-10);
            assert!((h_max(&tau).unwrap() - l).abs() < 1e-10);
            assert!((h0(&tau).unwrap() - l).abs() < 1e-10);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(69);
        for _ in 0..100 {
            let d = 2 + rand::Rng::gen_range(&mut rng, 0..5) as usize;
            let rho = random_density_rng(d, d, &mut rng);
            let hm = h_min(&rho).unwrap();
            let h = von_neumann_matrix(&rho).unwrap();
            let hx = h_max(&rho).unwrap();
            let h0v = h0(&rho).unwrap();
            assert!(hm <= h + 1e-9 && h <= hx + 1e-9 && hx <= h0v + 1e-9);
        }
        // pure state: all zero
        let mut rng2 = ChaCha12Rng::seed_from_u64(70);
        let v = random_pure_rng(&Shape::new(vec![4]), &mut rng2);
        let pure = outer(&v, &v);
        assert!(h_min(&pure).unwrap().abs() < 1e-9);
        assert!(h_max(&pure).unwrap().abs() < 1e-8);
        assert!(h0(&pure).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fixed_reference_quantities() {
        // product state → i_max_fixed = 0
        let rho = random_density(2, 2, 81);
        let sigma = random_density(3, 3, 82);
        let prod = MultiState::new(
            tensor(&rho, &sigma),
            Shape::new(vec![2, 3]),
            Normalization::Normalized,
        )
        .unwrap();
        assert!(i_max_fixed(&prod, &[0], &[1]).unwrap().abs() < 1e-8);

        for d in [2usize, 3, 4] {
            let phi = max_entangled(d).density();
            let expect = 2.0 * (d as f64).log2();
            assert!((i_max_fixed(&phi, &[0], &[1]).unwrap() - expect).abs() < 1e-8);
            assert!((h_min_cond_fixed(&phi, &[0], &[1]).unwrap() + (d as f64).log2()).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_optimizer() {
        let rho = random_density(2, 2, 83);
        let sigma = random_density(2, 2, 84);
        let prod = MultiState::new(
            tensor(&rho, &sigma),
            Shape::new(vec![2, 2]),
            Normalization::Normalized,
        )
        .unwrap();
        assert!(i_max_opt(&prod, &[0], &[1], 2).unwrap().abs() < 1e-6);

        let phi = max_entangled(2).density();
        let fixed = i_max_fixed(&phi, &[0], &[1]).unwrap();
        let mut prev = f64::INFINITY;
        for depth in 0..=3 {
            let v = i_max_opt(&phi, &[0], &[1], depth).unwrap();
            assert!(v <= fixed + 1e-12);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        assert!((prev - 2.0).abs() < 1e-3);
    }

    #[test]
    fn fannes_and_bracket() {
        let b = fannes_bounds(1e-12, 4, 4).unwrap();
        for v in b {
            assert!(v.abs() < 1e-9);
        }
        // entropy continuity verified on perturbed pairs at eps = 0.01
        let mut rng = ChaCha12Rng::seed_from_u64(91);
        for _ in 0..50 {
            let rho = random_density_rng(4, 4, &mut rng);
            let noise = random_density_rng(4, 4, &mut rng);
            let mix = rho.scale_re(1.0 - 0.004).add(&noise.scale_re(0.004));
            let eps = crate::metrics::herm_trace_norm(&rho.sub(&mix)).unwrap();
            assert!(eps <= 0.01);
            let bounds = fannes_bounds(0.01, 4, 4).unwrap();
            let dh = (von_neumann_matrix(&rho).unwrap() - von_neumann_matrix(&mix).unwrap()).abs();
            assert!(dh <= bounds[0] + 1e-9);
        }
        // mutual information bound on perturbed bipartite pairs
        let shape = Shape::new(vec![2, 2]);
        for _ in 0..50 {
            let a = MultiState::new(
                random_density_rng(4, 4, &mut rng),
                shape.clone(),
                Normalization::Normalized,
            )
            .unwrap();
            let noise = random_density_rng(4, 4, &mut rng);
            let mixm = a.matrix.scale_re(1.0 - 0.004).add(&noise.scale_re(0.004));
            let b2 = MultiState::new(mixm, shape.clone(), Normalization::Normalized).unwrap();
            let eps = crate::metrics::herm_trace_norm(&a.matrix.sub(&b2.matrix)).unwrap();
            assert!(eps <= 0.01);
            let bounds = fannes_bounds(0.01, 2, 2).unwrap();
            let di = (mutual_info(&a, &[0], &[1]).unwrap() - mutual_info(&b2, &[0], &[1]).unwrap())
                .abs();
            assert!(di <= bounds[2] + 1e-9);
        }

        let rho = random_density(4, 2, 93);
        let (lo, hi) = h0_hmax_bracket(&rho, 0.1).unwrap();
        assert!(lo <= hi + 1e-12);
    }

    #[test]
    fn ssa_and_weak_monotonicity_sample() {
        let mut rng = ChaCha12Rng::seed_from_u64(95);
        for &dims in &[[2usize, 2, 2], [2, 3, 2]] {
            let shape = Shape::new(dims.to_vec());
            let d = shape.total_dim();
            for _ in 0..50 {
                let rho = MultiState::new(
                    random_density_rng(d, d, &mut rng),
                    shape.clone(),
                    Normalization::Normalized,
                )
                .unwrap();
                assert!(cond_mutual_info(&rho, &[0], &[1], &[2]).unwrap() >= -1e-9);
                let wm = cond_entropy(&rho, &[1], &[0]).unwrap()
                    + cond_entropy(&rho, &[1], &[2]).unwrap();
                assert!(wm >= -1e-9);
            }
        }
    }

    #[test]
    fn data_processing_on_b() {
        use crate::channels::{tensor_ch, Channel};
        let mut rng = ChaCha12Rng::seed_from_u64(97);
        let shape = Shape::new(vec![2, 2, 2]);
        for seed in 0..10u64 {
            let rho = MultiState::new(
                random_density_rng(8, 8, &mut rng),
                shape.clone(),
                Normalization::Normalized,
            )
            .unwrap();
            // random channel on B (middle subsystem)
            let u = crate::tensorlab::random_unitary(4, 200 + seed);
            let kraus: Vec<CMatrix> = (0..2)
                .map(|e| CMatrix::from_fn(2, 2, |i, j| u[(i * 2 + e, j)]))
                .collect();
            let lam = Channel::new(kraus, Shape::new(vec![2]), Shape::new(vec![2])).unwrap();
            let full = tensor_ch(
                &tensor_ch(&Channel::identity(2), &lam),
                &Channel::identity(2),
            );
            let out = MultiState::new(
                full.apply_matrix(&rho.matrix),
                shape.clone(),
                Normalization::Normalized,
            )
            .unwrap();
            let before = cond_mutual_info(&rho, &[0], &[1], &[2]).unwrap();
            let after = cond_mutual_info(&out, &[0], &[1], &[2]).unwrap();
            assert!(after <= before + 1e-8);
        }
    }
}
