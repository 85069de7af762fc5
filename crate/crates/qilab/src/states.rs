//! Quantum states and canonical constructions: maximally entangled and
//! maximally mixed states, classical-quantum states, Bell bases,
//! purification and Schmidt decomposition.

use crate::tensorlab::{
    herm_eig, mat_func, outer, partial_trace, tensor, CMatrix, LinalgError, MatFunc, Shape,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("state is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("trace {trace:.6} incompatible with normalization {expected}")]
    BadTrace { trace: f64, expected: String },
    #[error("probabilities must be nonnegative and sum to 1 (sum {sum:.6})")]
    BadProbabilities { sum: f64 },
    #[error("vector norm {norm:.6} is not 1")]
    NotNormalized { norm: f64 },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Normalized,
    Subnormalized,
}

/// Density operator on an ordered list of subsystems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiState {
    pub matrix: CMatrix,
    pub shape: Shape,
    pub normalization: Normalization,
}

impl MultiState {
    /// Validating constructor: PSD within 1e-10 and trace compatible with the
    /// declared normalization.
    pub fn new(
        matrix: CMatrix,
        shape: Shape,
        normalization: Normalization,
    ) -> Result<Self, StateError> {
        shape.check_against(&matrix)?;
        let (eigs, _) = herm_eig(&matrix)?;
        if let Some(&min) = eigs.first() {
            if min < -1e-10 {
                return Err(StateError::NotPsd { eigenvalue: min });
            }
        }
        let tr = matrix.trace().re;
        match normalization {
            Normalization::Normalized => {
                if (tr - 1.0).abs() > 1e-10 {
                    return Err(StateError::BadTrace {
                        trace: tr,
                        expected: "normalized (tr = 1)".into(),
                    });
                }
            }
            Normalization::Subnormalized => {
                if tr <= 0.0 || tr > 1.0 + 1e-10 {
                    return Err(StateError::BadTrace {
                        trace: tr,
                        expected: "subnormalized (0 < tr <= 1)".into(),
                    });
                }
            }
        }
        Ok(MultiState {
            matrix,
            shape,
            normalization,
        })
    }

    pub fn normalized(matrix: CMatrix, shape: Shape) -> Result<Self, StateError> {
        MultiState::new(matrix, shape, Normalization::Normalized)
    }

    /// Single-subsystem normalized state.
    pub fn simple(matrix: CMatrix) -> Result<Self, StateError> {
        let d = matrix.rows;
        MultiState::normalized(matrix, Shape::new(vec![d]))
    }

    pub fn total_dim(&self) -> usize {
        self.shape.total_dim()
    }

    /// Marginal on the listed subsystems, keeping the normalization flag.
    pub fn marginal(&self, keep: &[usize]) -> Result<MultiState, StateError> {
        let m = partial_trace(&self.matrix, &self.shape, keep)?;
        let dims = keep.iter().map(|&i| self.shape.dims[i]).collect();
        Ok(MultiState {
            matrix: m,
            shape: Shape::new(dims),
            normalization: self.normalization,
        })
    }
}

/// Pure state vector on an ordered list of subsystems.
#[derive(Debug, Clone)]
pub struct PureVec {
    pub amplitudes: Vec<Complex64>,
    pub shape: Shape,
}

#[derive(Serialize, Deserialize)]
struct PureVecWire {
    re: Vec<f64>,
    im: Vec<f64>,
    shape: Shape,
}

impl Serialize for PureVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PureVecWire {
            re: self.amplitudes.iter().map(|z| z.re).collect(),
            im: self.amplitudes.iter().map(|z| z.im).collect(),
            shape: self.shape.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PureVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = PureVecWire::deserialize(d)?;
        Ok(PureVec {
            amplitudes: w
                .re
                .iter()
                .zip(w.im.iter())
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
            shape: w.shape,
        })
    }
}

impl PureVec {
    pub fn new(amplitudes: Vec<Complex64>, shape: Shape) -> Result<Self, StateError> {
        if amplitudes.len() != shape.total_dim() {
            return Err(StateError::Invalid(
                "amplitude count does not match shape".into(),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(StateError::NotNormalized { norm });
        }
        Ok(PureVec { amplitudes, shape })
    }

    pub fn density(&self) -> MultiState {
        MultiState {
            matrix: outer(&self.amplitudes, &self.amplitudes),
            shape: self.shape.clone(),
            normalization: Normalization::Normalized,
        }
    }

    pub fn basis_state(d: usize, i: usize) -> PureVec {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[i] = Complex64::new(1.0, 0.0);
        PureVec {
            amplitudes: amps,
            shape: Shape::new(vec![d]),
        }
    }
}

/// The standard maximally entangled state |φ⁺⟩ = d^{-1/2} Σ_i |ii⟩ on two
/// d-dimensional subsystems.
pub fn max_entangled(d: usize) -> PureVec {
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        amps[i * d + i] = Complex64::new(a, 0.0);
    }
    PureVec {
        amplitudes: amps,
        shape: Shape::new(vec![d, d]),
    }
}

/// The maximally mixed state τ_d = 1/d.
pub fn max_mixed(d: usize) -> MultiState {
    MultiState {
        matrix: CMatrix::identity(d).scale_re(1.0 / d as f64),
        shape: Shape::new(vec![d]),
        normalization: Normalization::Normalized,
    }
}

/// Classical-quantum state Σ_i p_i |i⟩⟨i| ⊗ ρ^{(i)}.
pub fn cq_state(p: &[f64], states: &[MultiState]) -> Result<MultiState, StateError> {
    if p.len() != states.len() || p.is_empty() {
        return Err(StateError::Invalid(
            "probability and state lists must have equal nonzero length".into(),
        ));
    }
    if p.iter().any(|&x| x < 0.0) {
        return Err(StateError::BadProbabilities {
            sum: p.iter().sum(),
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(StateError::BadProbabilities { sum });
    }
    let db = states[0].total_dim();
    if states.iter().any(|s| s.total_dim() != db) {
        return Err(StateError::Invalid(
            "all conditional states must share one dimension".into(),
        ));
    }
    let k = p.len();
    let mut out = CMatrix::zeros(k * db, k * db);
    for (i, (&pi, st)) in p.iter().zip(states.iter()).enumerate() {
        for r in 0..db {
            for cidx in 0..db {
                out[(i * db + r, i * db + cidx)] = st.matrix[(r, cidx)] * pi;
            }
        }
    }
    MultiState::new(
        out,
        Shape::new(vec![k, db]),
        Normalization::Normalized,
    )
}

/// Canonical purification |ρ⟩ = √d · (ρ^{1/2} ⊗ 1)|φ⁺⟩; tracing the second
/// (primed) subsystem recovers ρ.
pub fn purify(rho: &MultiState) -> Result<PureVec, StateError> {
    if rho.normalization != Normalization::Normalized {
        return Err(StateError::Invalid(
            "purification requires a normalized state".into(),
        ));
    }
    let d = rho.total_dim();
    let sqrt = mat_func(&rho.matrix, MatFunc::Sqrt)?;
    // √d·(ρ^{1/2}⊗1)|φ⁺⟩ has amplitudes (ρ^{1/2})_{ij} on |i⟩|j⟩.
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            amps[i * d + j] = sqrt[(i, j)];
        }
    }
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in amps.iter_mut() {
        *z /= norm;
    }
    PureVec::new(amps, Shape::new(vec![d, d]))
}

/// Schmidt decomposition across the cut given by a subset of subsystem
/// indices. Returns descending coefficients and matching orthonormal bases
/// (columns of the two returned matrices).
pub fn schmidt(
    v: &PureVec,
    cut: &[usize],
) -> Result<(Vec<f64>, CMatrix, CMatrix), StateError> {
    let n = v.shape.n_subsystems();
    if cut.is_empty() || cut.len() >= n {
        return Err(StateError::Invalid(
            "cut must be a proper nonempty subset of subsystems".into(),
        ));
    }
    let mut cut_sorted = cut.to_vec();
    cut_sorted.sort_unstable();
    cut_sorted.dedup();
    if cut_sorted.len() != cut.len() || *cut_sorted.last().unwrap() >= n {
        return Err(StateError::Invalid("invalid cut subset".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|i| !cut_sorted.contains(i)).collect();
    let d_l: usize = cut_sorted.iter().map(|&i| v.shape.dims[i]).product();
    let d_r: usize = rest.iter().map(|&i| v.shape.dims[i]).product();

    // Amplitude matrix M with rows indexed by the cut subsystems.
    let perm: Vec<usize> = cut_sorted.iter().chain(rest.iter()).cloned().collect();
    let reordered = crate::tensorlab::permute_vec(&v.amplitudes, &v.shape, &perm);
    let m = CMatrix::from_fn(d_l, d_r, |i, j| reordered[i * d_r + j]);

    // Eigendecomposition of MM† gives left vectors and squared coefficients.
    let mm = m.mul(&m.dagger());
    let (eigs, u) = herm_eig(&mm)?;
    let mut pairs: Vec<(f64, usize)> = eigs
        .iter()
        .enumerate()
        .map(|(i, &l)| (l.max(0.0), i))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut coeffs = Vec::new();
    let mut left_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut right_cols: Vec<Vec<Complex64>> = Vec::new();
    for &(lam, idx) in &pairs {
        let s = lam.sqrt();
        if s < 1e-9 {
            continue;
        }
        let mut lvec: Vec<Complex64> = (0..d_l).map(|r| u[(r, idx)]).collect();
        // Phase fix: first nonzero amplitude real positive.
        if let Some(z) = lvec.iter().find(|z| z.norm() > 1e-9) {
            let phase = z.conj() / z.norm();
            for a in lvec.iter_mut() {
                *a *= phase;
            }
        }
        // Right vector chosen so that v = Σ_k c_k |l_k⟩⊗|r_k⟩ holds
        // entrywise: |r_k⟩ = conj(M†|l_k⟩) / s.
        let lcol = CMatrix::col_vec(&lvec);
        let rcol = m.dagger().mul(&lcol);
        let rvec: Vec<Complex64> = rcol.data.iter().map(|z| z.conj() / s).collect();
        coeffs.push(s);
        left_cols.push(lvec);
        right_cols.push(rvec);
    }
    let k = coeffs.len();
    let left = CMatrix::from_fn(d_l, k, |i, j| left_cols[j][i]);
    let right = CMatrix::from_fn(d_r, k, |i, j| right_cols[j][i]);
    Ok((coeffs, left, right))
}

/// Generalized Bell basis on C^m ⊗ C^m:
/// |ψ_kl⟩ = m^{-1/2} Σ_s e^{2πiks/m} |s⟩|s+l mod m⟩, ordered by (k,l).
pub fn bell_basis(m: usize) -> Result<Vec<PureVec>, StateError> {
    if m < 2 {
        return Err(StateError::Invalid("bell_basis requires m >= 2".into()));
    }
    let mut out = Vec::with_capacity(m * m);
    let a = 1.0 / (m as f64).sqrt();
    for k in 0..m {
        for l in 0..m {
            let mut amps = vec![Complex64::new(0.0, 0.0); m * m];
            for s in 0..m {
                let phi = 2.0 * std::f64::consts::PI * (k * s) as f64 / m as f64;
                amps[s * m + (s + l) % m] = Complex64::new(phi.cos(), phi.sin()) * a;
            }
            out.push(PureVec {
                amplitudes: amps,
                shape: Shape::new(vec![m, m]),
            });
        }
    }
    Ok(out)
}

/// Scale a normalized state to trace `t` and flag it subnormalized
/// (normalized when t = 1).
pub fn embed_subnormalized(rho: &MultiState, t: f64) -> Result<MultiState, StateError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(StateError::Invalid(
            "trace target must lie in (0, 1]".into(),
        ));
    }
    let tr = rho.matrix.trace().re;
    Ok(MultiState {
        matrix: rho.matrix.scale_re(t / tr),
        shape: rho.shape.clone(),
        normalization: if t == 1.0 {
            Normalization::Normalized
        } else {
            Normalization::Subnormalized
        },
    })
}

/// Density of the tensor product of a state with itself n times.
pub fn power_state(rho: &MultiState, n: usize) -> MultiState {
    assert!(n >= 1);
    let mut m = rho.matrix.clone();
    let mut dims = rho.shape.dims.clone();
    for _ in 1..n {
        m = tensor(&m, &rho.matrix);
        dims.extend_from_slice(&rho.shape.dims);
    }
    MultiState {
        matrix: m,
        shape: Shape::new(dims),
        normalization: rho.normalization,
    }
}
