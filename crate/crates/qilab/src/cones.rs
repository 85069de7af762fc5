//! Entropy vectors of multipartite states, linear entropy inequalities
//! (strong subadditivity, weak monotonicity, monotonicity), the constrained
//! four-party inequality I(C:AB) ≤ I(C:D) + I(A:B|D) under double Markov
//! constraints, Markov-structured state generation, and conic-membership
//! certification by linear programming.

use crate::entropy::{subset_entropy, EntropyError};
use crate::states::{MultiState, Normalization};
use crate::tensorlab::{
    outer, permute_systems, random_density_rng, tensor_all, CMatrix, Shape,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("party count {0} exceeds the supported maximum of 4")]
    TooManyParties(usize),
    #[error("party counts differ: {0} vs {1}")]
    PartyMismatch(usize, usize),
    #[error("invalid subset arguments: {0}")]
    BadSubsets(String),
    #[error("{0}")]
    Invalid(String),
}

/// Entropies of all 2^n marginals of an n-party state, indexed by subset
/// bitmask with party 0 as the least significant bit; the empty set entry is
/// exactly 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyVector {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl EntropyVector {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, ConeError> {
        if n > 4 {
            return Err(ConeError::TooManyParties(n));
        }
        if entries.len() != 1 << n {
            return Err(ConeError::Invalid(format!(
                "expected {} entries, got {}",
                1 << n,
                entries.len()
            )));
        }
        if entries[0] != 0.0 {
            return Err(ConeError::Invalid("empty-set entry must be 0".into()));
        }
        Ok(EntropyVector { n, entries })
    }

    pub fn h(&self, mask: usize) -> f64 {
        self.entries[mask]
    }

    /// I(X:Y) = H(X) + H(Y) − H(XY) for disjoint masks.
    pub fn mutual(&self, x: usize, y: usize) -> f64 {
        self.h(x) + self.h(y) - self.h(x | y)
    }

    /// I(X:Y|Z) = H(XZ) + H(YZ) − H(XYZ) − H(Z) for disjoint masks.
    pub fn cond_mutual(&self, x: usize, y: usize, z: usize) -> f64 {
        self.h(x | z) + self.h(y | z) - self.h(x | y | z) - self.h(z)
    }
}

/// Coefficient vector of a linear entropy inequality, same indexing as
/// [`EntropyVector`]; (f, h) ≥ 0 is the asserted inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IneqVector {
    pub n: usize,
    pub entries: Vec<f64>,
    pub kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IneqKind {
    /// Strong subadditivity Δ[I,J]: H(I)+H(J)−H(I∪J)−H(I∩J) ≥ 0.
    Ssa,
    /// Weak monotonicity E[I,J]: H(I)+H(J)−H(I\J)−H(J\I) ≥ 0.
    Wm,
    /// Monotonicity m[I,J] (J ⊆ I): H(I)−H(J) ≥ 0 for classical states.
    Mono,
}

/// Compute the entropy vector of a state with at most 4 subsystems.
pub fn entropy_vector(rho: &MultiState) -> Result<EntropyVector, ConeError> {
    let n = rho.shape.n_subsystems();
    if n > 4 {
        return Err(ConeError::TooManyParties(n));
    }
    let mut entries = vec![0.0; 1 << n];
    for (mask, slot) in entries.iter_mut().enumerate().skip(1) {
        let keep: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let sets: Vec<&[usize]> = vec![&keep];
        *slot = subset_entropy(rho, &sets)?;
    }
    EntropyVector::new(n, entries)
}

/// Build the coefficient vector of a named inequality family member.
pub fn inequality_vector(
    kind: IneqKind,
    i_mask: usize,
    j_mask: usize,
    n: usize,
) -> Result<IneqVector, ConeError> {
    if n > 4 {
        return Err(ConeError::TooManyParties(n));
    }
    let full = (1usize << n) - 1;
    if i_mask > full || j_mask > full {
        return Err(ConeError::BadSubsets("mask out of range".into()));
    }
    let mut entries = vec![0.0; 1 << n];
    let name;
    match kind {
        IneqKind::Ssa => {
            if i_mask == 0 || j_mask == 0 {
                return Err(ConeError::BadSubsets("SSA needs nonempty I and J".into()));
            }
            entries[i_mask] += 1.0;
            entries[j_mask] += 1.0;
            entries[i_mask | j_mask] -= 1.0;
            entries[i_mask & j_mask] -= 1.0;
            entries[0] = 0.0;
            name = format!("SSA[{i_mask:#b},{j_mask:#b}]");
        }
        IneqKind::Wm => {
            if i_mask & j_mask == 0 {
                return Err(ConeError::BadSubsets("WM needs intersecting I and J".into()));
            }
            entries[i_mask] += 1.0;
            entries[j_mask] += 1.0;
            entries[i_mask & !j_mask] -= 1.0;
            entries[j_mask & !i_mask] -= 1.0;
            entries[0] = 0.0;
            name = format!("WM[{i_mask:#b},{j_mask:#b}]");
        }
        IneqKind::Mono => {
            if j_mask & !i_mask != 0 {
                return Err(ConeError::BadSubsets("MONO needs J ⊆ I".into()));
            }
            entries[i_mask] += 1.0;
            entries[j_mask] -= 1.0;
            entries[0] = 0.0;
            name = format!("MONO[{i_mask:#b},{j_mask:#b}]");
        }
    }
    Ok(IneqVector {
        n,
        entries,
        kind: name,
    })
}

/// Inner product (f, v).
pub fn eval_inequality(f: &IneqVector, v: &EntropyVector) -> Result<f64, ConeError> {
    if f.n != v.n {
        return Err(ConeError::PartyMismatch(f.n, v.n));
    }
    Ok(f.entries
        .iter()
        .zip(v.entries.iter())
        .map(|(a, b)| a * b)
        .sum())
}

/// All strong-subadditivity generators Δ[I,J] for n parties (unordered pairs
/// of distinct nonempty subsets).
pub fn all_ssa_vectors(n: usize) -> Vec<IneqVector> {
    let full = (1usize << n) - 1;
    let mut out = Vec::new();
    for i in 1..=full {
        for j in (i + 1)..=full {
            out.push(inequality_vector(IneqKind::Ssa, i, j, n).unwrap());
        }
    }
    out
}

/// All weak-monotonicity generators E[I,J] for n parties (unordered pairs
/// with nonempty intersection).
pub fn all_wm_vectors(n: usize) -> Vec<IneqVector> {
    let full = (1usize << n) - 1;
    let mut out = Vec::new();
    for i in 1..=full {
        for j in i..=full {
            if i & j != 0 {
                out.push(inequality_vector(IneqKind::Wm, i, j, n).unwrap());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VnTypeReport {
    pub passed: bool,
    pub violations: Vec<(String, f64)>,
}

/// Check a vector against every Δ and E generator; report each violation
/// beyond the tolerance together with its gap.
pub fn check_vn_type(v: &EntropyVector, tol: f64) -> Result<VnTypeReport, ConeError> {
    let mut violations = Vec::new();
    for gen in all_ssa_vectors(v.n).into_iter().chain(all_wm_vectors(v.n)) {
        let val = eval_inequality(&gen, v)?;
        if val < -tol {
            violations.push((gen.kind.clone(), val));
        }
    }
    Ok(VnTypeReport {
        passed: violations.is_empty(),
        violations,
    })
}

// Four-party masks with party order (A, B, C, D) = bits (0, 1, 2, 3).
pub const MA: usize = 1;
pub const MB: usize = 2;
pub const MC: usize = 4;
pub const MD: usize = 8;

/// The 16-entry vector of Cadney, Linden and Winter that satisfies all
/// von-Neumann-type inequalities yet violates I(C:D) ≥ I(C:AB) under the
/// double Markov constraints.
pub fn cadney_vector() -> EntropyVector {
    let mut entries = vec![0.0; 16];
    let table: &[(usize, f64)] = &[
        (MA, 5.0),
        (MB, 5.0),
        (MC, 2.0),
        (MD, 4.0),
        (MA | MB, 6.0),
        (MA | MC, 5.0),
        (MA | MD, 5.0),
        (MB | MC, 5.0),
        (MB | MD, 5.0),
        (MC | MD, 6.0),
        (MA | MB | MC, 6.0),
        (MA | MB | MD, 6.0),
        (MA | MC | MD, 5.0),
        (MB | MC | MD, 5.0),
        (MA | MB | MC | MD, 4.0),
    ];
    for &(mask, val) in table {
        entries[mask] = val;
    }
    EntropyVector { n: 4, entries }
}

fn require_four(v: &EntropyVector) -> Result<(), ConeError> {
    if v.n != 4 {
        return Err(ConeError::PartyMismatch(v.n, 4));
    }
    Ok(())
}

/// Gap of the constrained inequality I(C:AB) ≤ I(C:D) + I(A:B|D):
/// RHS − LHS, nonnegative means satisfied.
pub fn genliwi_gap(v: &EntropyVector) -> Result<f64, ConeError> {
    require_four(v)?;
    Ok(v.mutual(MC, MD) + v.cond_mutual(MA, MB, MD) - v.mutual(MC, MA | MB))
}

/// Gap of I(C:D) ≥ I(C:AB): RHS-to-LHS difference I(C:D) − I(C:AB).
pub fn liwi_gap(v: &EntropyVector) -> Result<f64, ConeError> {
    require_four(v)?;
    Ok(v.mutual(MC, MD) - v.mutual(MC, MA | MB))
}

/// The four constrained four-party inequality values (each asserted ≥ 0 when
/// I(A:C|B) = I(B:C|A) = 0). The fourth uses I(AB:C) in its final term.
pub fn cadney_gaps(v: &EntropyVector) -> Result<[f64; 4], ConeError> {
    require_four(v)?;
    let iabd = v.cond_mutual(MA, MB, MD);
    let iabc = v.cond_mutual(MA, MB, MC);
    let iabcd = v.cond_mutual(MA, MB, MC | MD);
    let i_ab_c = v.mutual(MA | MB, MC);
    let h = |m: usize| v.h(m);
    let g1 = iabd + iabcd + (h(MC | MD) - h(MC)) - i_ab_c;
    let g2 = iabd + iabc + v.mutual(MC, MD) - v.mutual(MC, MA | MB);
    let g3 = iabd + iabc + iabcd + h(MD) + h(MC) + (h(MA | MB | MC | MD) - h(MA | MB))
        - 2.0 * i_ab_c;
    let g4 = 2.0 * iabc + h(MC) + (h(MA | MB | MC) - h(MA | MB)) - i_ab_c;
    Ok([g1, g2, g3, g4])
}

/// The Markov-constraint residuals (I(A:C|B), I(B:C|A), I(A:B|D)).
pub fn constraint_residuals(v: &EntropyVector) -> Result<[f64; 3], ConeError> {
    require_four(v)?;
    Ok([
        v.cond_mutual(MA, MC, MB),
        v.cond_mutual(MB, MC, MA),
        v.cond_mutual(MA, MB, MD),
    ])
}

/// Coefficient vector of the constrained inequality gap
/// I(C:D) + I(A:B|D) − I(C:AB) as a linear functional on entropy vectors.
pub fn genliwi_vector() -> IneqVector {
    let mut entries = vec![0.0; 16];
    // I(C:D): +H(C)+H(D)−H(CD)
    entries[MC] += 1.0;
    entries[MD] += 1.0;
    entries[MC | MD] -= 1.0;
    // I(A:B|D): +H(AD)+H(BD)−H(ABD)−H(D)
    entries[MA | MD] += 1.0;
    entries[MB | MD] += 1.0;
    entries[MA | MB | MD] -= 1.0;
    entries[MD] -= 1.0;
    // −I(C:AB): −H(C)−H(AB)+H(ABC)
    entries[MC] -= 1.0;
    entries[MA | MB] -= 1.0;
    entries[MA | MB | MC] += 1.0;
    IneqVector {
        n: 4,
        entries,
        kind: "I(C:D)+I(A:B|D)-I(C:AB)".into(),
    }
}

/// Coefficient vector of the conditional mutual information I(X:Y|Z).
pub fn cmi_vector(x: usize, y: usize, z: usize, n: usize) -> IneqVector {
    let mut entries = vec![0.0; 1 << n];
    entries[x | z] += 1.0;
    entries[y | z] += 1.0;
    entries[x | y | z] -= 1.0;
    if z != 0 {
        entries[z] -= 1.0;
    }
    entries[0] = 0.0;
    IneqVector {
        n,
        entries,
        kind: format!("I({x:#b}:{y:#b}|{z:#b})"),
    }
}

/// Parameters of the doubly-Markov four-party state generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovParams {
    /// block count of the A-side classical register (≤ 2)
    pub k: usize,
    /// block count of the B-side classical register (≤ 2)
    pub l: usize,
    /// local dimension of the correlated A_b/B_a pair (each ≤ 2)
    pub dim_ab: usize,
    pub dim_ba: usize,
    /// local dimensions of the side registers A_c, B_c and of C (each ≤ 2)
    pub dim_ac: usize,
    pub dim_bc: usize,
    pub dim_c: usize,
    /// label maps with f(i) = g(j) required wherever p_{ij} > 0
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    /// weight of the fresh-noise admixture on the D register, in [0,1]
    pub noise_weight: f64,
}

impl MarkovParams {
    pub fn default_correlated() -> Self {
        MarkovParams {
            k: 2,
            l: 2,
            dim_ab: 2,
            dim_ba: 2,
            dim_ac: 2,
            dim_bc: 2,
            dim_c: 2,
            f: vec![0, 1],
            g: vec![0, 1],
            noise_weight: 0.2,
        }
    }
}

/// Sample a four-party state ρ_ABCD in which both A−B−C and B−A−C are exact
/// Markov chains by construction:
/// ρ = Σ_{ij} p_{ij} |i,j⟩⟨i,j| ⊗ ρ^{(ij)}_{A_bB_a} ⊗ ρ^{(i)}_{A_c} ⊗
/// ρ^{(j)}_{B_c} ⊗ ρ_C^{k(i,j)}, with k(i,j) = f(i) = g(j) on the support of
/// p, A = (K_A, A_b, A_c) and B = (K_B, B_a, B_c). D carries a classical copy
/// of the common label mixed with fresh noise at the configured weight.
pub fn markov_state(params: &MarkovParams, seed: u64) -> Result<MultiState, ConeError> {
    let p = params;
    if p.k == 0 || p.l == 0 || p.k > 2 || p.l > 2 {
        return Err(ConeError::Invalid("block counts must be in 1..=2".into()));
    }
    for &d in &[p.dim_ab, p.dim_ba, p.dim_ac, p.dim_bc, p.dim_c] {
        if d == 0 || d > 2 {
            return Err(ConeError::Invalid("local dims must be in 1..=2".into()));
        }
    }
    if p.f.len() != p.k || p.g.len() != p.l {
        return Err(ConeError::Invalid("label map lengths must match k, l".into()));
    }
    if !(0.0..=1.0).contains(&p.noise_weight) {
        return Err(ConeError::Invalid("noise weight must be in [0,1]".into()));
    }
    // support of p: pairs with a common label
    let support: Vec<(usize, usize)> = (0..p.k)
        .flat_map(|i| (0..p.l).map(move |j| (i, j)))
        .filter(|&(i, j)| p.f[i] == p.g[j])
        .collect();
    if support.is_empty() {
        return Err(ConeError::Invalid(
            "label maps leave no consistent (i,j) support".into(),
        ));
    }
    let n_labels = p
        .f
        .iter()
        .chain(p.g.iter())
        .copied()
        .max()
        .unwrap()
        + 1;
    let dim_d = n_labels.max(2);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // probabilities on the support
    let mut probs: Vec<f64> = support.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    for q in probs.iter_mut() {
        *q /= total;
    }
    // per-label C states
    let c_states: Vec<CMatrix> = (0..n_labels)
        .map(|_| random_density_rng(p.dim_c, p.dim_c, &mut rng))
        .collect();
    let ac_states: Vec<CMatrix> = (0..p.k)
        .map(|_| random_density_rng(p.dim_ac, p.dim_ac, &mut rng))
        .collect();
    let bc_states: Vec<CMatrix> = (0..p.l)
        .map(|_| random_density_rng(p.dim_bc, p.dim_bc, &mut rng))
        .collect();

    // fine-grained shape in build order: K_A, K_B, A_b, B_a, A_c, B_c, C, D
    let fine = Shape::new(vec![
        p.k, p.l, p.dim_ab, p.dim_ba, p.dim_ac, p.dim_bc, p.dim_c, dim_d,
    ]);
    let total_dim = fine.total_dim();
    if total_dim > crate::DIM_GUARD {
        return Err(ConeError::Invalid(format!(
            "total dimension {total_dim} exceeds guard {}",
            crate::DIM_GUARD
        )));
    }
    let mut acc = CMatrix::zeros(total_dim, total_dim);
    let tau_d = CMatrix::identity(dim_d).scale_re(1.0 / dim_d as f64);
    for (&(i, j), &pij) in support.iter().zip(probs.iter()) {
        let ka = basis_proj(p.k, i);
        let kb = basis_proj(p.l, j);
        let ab_ba = random_density_rng(p.dim_ab * p.dim_ba, p.dim_ab * p.dim_ba, &mut rng);
        let label = p.f[i];
        let d_state = basis_proj(dim_d, label)
            .scale_re(1.0 - p.noise_weight)
            .add(&tau_d.scale_re(p.noise_weight));
        let term = tensor_all(&[
            &ka,
            &kb,
            &ab_ba,
            &ac_states[i],
            &bc_states[j],
            &c_states[label],
            &d_state,
        ]);
        acc = acc.add(&term.scale_re(pij));
    }
    // regroup to A = (K_A, A_b, A_c), B = (K_B, B_a, B_c), C, D
    let grouped = permute_systems(&acc, &fine, &[0, 2, 4, 1, 3, 5, 6, 7])
        .map_err(EntropyError::from)?;
    let da = p.k * p.dim_ab * p.dim_ac;
    let db = p.l * p.dim_ba * p.dim_bc;
    Ok(MultiState {
        matrix: grouped,
        shape: Shape::new(vec![da, db, p.dim_c, dim_d]),
        normalization: Normalization::Normalized,
    })
}

fn basis_proj(d: usize, i: usize) -> CMatrix {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[i] = Complex64::new(1.0, 0.0);
    outer(&v, &v)
}

/// Outcome of a conic-membership query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ConicResult {
    /// f is a nonnegative combination of the generators plus a free
    /// combination of the constraint span.
    Inside { coefficients: Vec<f64> },
    /// f is outside; w separates: (f,w) < −tol while (gen,w) ≥ −tol for every
    /// generator and |(span,w)| ≤ tol-scale for the span vectors.
    Outside { certificate: Vec<f64> },
}

/// Decide whether f = Σ λ_i gen_i + Σ ν_m span_m with λ ≥ 0 is feasible, by
/// phase-1 simplex with Bland's rule; on infeasibility return a verified
/// separating certificate.
pub fn conic_membership(
    f: &IneqVector,
    generators: &[IneqVector],
    constraint_span: &[IneqVector],
    tol: f64,
) -> Result<ConicResult, ConeError> {
    let dim = f.entries.len();
    for g in generators.iter().chain(constraint_span.iter()) {
        if g.entries.len() != dim {
            return Err(ConeError::PartyMismatch(g.n, f.n));
        }
    }
    // Columns: generators (λ ≥ 0), then ±span (free ν split into positives).
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for g in generators {
        cols.push(g.entries.clone());
    }
    for g in constraint_span {
        cols.push(g.entries.clone());
        cols.push(g.entries.iter().map(|x| -x).collect());
    }
    let n_cols = cols.len();
    let b = f.entries.clone();

    // Phase-1 tableau: rows scaled so b ≥ 0, artificial basis.
    let mut sign = vec![1.0; dim];
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for r in 0..dim {
        if b[r] < 0.0 {
            sign[r] = -1.0;
        }
        let mut row: Vec<f64> = (0..n_cols).map(|c| sign[r] * cols[c][r]).collect();
        // artificial columns
        for a in 0..dim {
            row.push(if a == r { 1.0 } else { 0.0 });
        }
        row.push(sign[r] * b[r]); // RHS
        tab.push(row);
    }
    let total_cols = n_cols + dim;
    let mut basis: Vec<usize> = (0..dim).map(|r| n_cols + r).collect();
    // cost row for minimizing Σ artificials: reduced costs r_j = c_j − Σ rows
    let mut cost = vec![0.0f64; total_cols + 1];
    for j in 0..total_cols {
        let cj = if j >= n_cols { 1.0 } else { 0.0 };
        cost[j] = cj - tab.iter().map(|row| row[j]).sum::<f64>();
    }
    cost[total_cols] = -tab.iter().map(|row| row[total_cols]).sum::<f64>();

    let max_iter = 100_000;
    for _ in 0..max_iter {
        // Bland: entering = smallest index with negative reduced cost
        let mut entering = None;
        for (j, &cj) in cost.iter().take(total_cols).enumerate() {
            if cj < -1e-12 {
                entering = Some(j);
                break;
            }
        }
        let Some(e) = entering else { break };
        // ratio test with Bland tie-break (smallest basis index)
        let mut leave: Option<(usize, f64)> = None;
        for (r, row) in tab.iter().enumerate() {
            if row[e] > 1e-12 {
                let ratio = row[total_cols] / row[e];
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15
                            || ((ratio - lratio).abs() <= 1e-15 && basis[r] < basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((lr, _)) = leave else {
            // unbounded phase-1 cannot happen (objective bounded below by 0)
            return Err(ConeError::Invalid("simplex failed to terminate".into()));
        };
        // pivot on (lr, e)
        let piv = tab[lr][e];
        for x in tab[lr].iter_mut() {
            *x /= piv;
        }
        let pivot_row = tab[lr].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r != lr && row[e].abs() > 0.0 {
                let factor = row[e];
                for (x, &p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= factor * p;
                }
            }
        }
        let factor = cost[e];
        if factor.abs() > 0.0 {
            for (x, &p) in cost.iter_mut().zip(pivot_row.iter()) {
                *x -= factor * p;
            }
        }
        basis[lr] = e;
    }

    let objective = -cost[total_cols];
    if objective <= tol {
        // feasible: recover generator coefficients
        let mut coeff = vec![0.0; generators.len()];
        for (r, &bj) in basis.iter().enumerate() {
            if bj < generators.len() {
                coeff[bj] = tab[r][total_cols];
            }
        }
        return Ok(ConicResult::Inside { coefficients: coeff });
    }

    // Infeasible: the phase-1 duals give a separating functional.
    // Reduced cost of artificial a is 1 − y_a·sign_a, so y = (1 − r_art)·sign.
    let mut w: Vec<f64> = (0..dim)
        .map(|r| -(1.0 - cost[n_cols + r]) * sign[r])
        .collect();
    // Independent re-check of the certificate.
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let scale: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for x in w.iter_mut() {
        *x /= scale;
    }
    if dot(&w, &b) >= -tol {
        return Err(ConeError::Invalid(
            "certificate failed verification against f".into(),
        ));
    }
    for g in generators {
        if dot(&w, &g.entries) < -tol {
            return Err(ConeError::Invalid(
                "certificate failed verification against a generator".into(),
            ));
        }
    }
    for g in constraint_span {
        if dot(&w, &g.entries).abs() > tol * 1e3 {
            return Err(ConeError::Invalid(
                "certificate failed verification against the constraint span".into(),
            ));
        }
    }
    Ok(ConicResult::Outside { certificate: w })
}
