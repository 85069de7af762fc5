//! Symmetric-key quantum encryption: scheme construction (Pauli, Clifford,
//! tagged, block-injection variants), effective attack channels and their
//! closed-form characterization, non-malleability gap evaluation, the
//! plaintext-injection separation demo, and the two authentication residuals
//! (averaged accept/reject split and per-key accept-projected simulation).

use crate::channels::{
    cj_state, clifford_1q, clifford_2q, pauli_group, tensor_ch, channel_from_cj, Channel,
    ChannelError,
};
use crate::entropy::{binary_h, mutual_info, EntropyError};
use crate::metrics::{herm_trace_norm, MetricError};
use crate::states::{max_entangled, MultiState, Normalization, StateError};
use crate::tensorlab::{
    mat_func, partial_trace, permute_systems, random_unitary_rng, tensor, CMatrix, LinalgError,
    MatFunc, Shape,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Key count used for the two-qubit Clifford scheme: the full group of
/// 11520 elements is subsampled with a fixed stride of 24.
pub const CLIFFORD_2Q_SCHEME_KEYS: usize = 480;

#[derive(Debug, Error)]
pub enum QesError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("scheme correctness violated at key {key}: residual {residual:.3e}")]
    NotCorrect { key: usize, residual: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Tag metadata carried by schemes built with [`tagged_scheme`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TagInfo {
    pub tag_dim: usize,
    /// Average accept weight of the maximally mixed ciphertext,
    /// Σ_k w_k Σ_{a'} ⟨a'⊗ψ| D_k(τ_C) |a'⊗ψ⟩.
    pub gamma_hat: f64,
}

/// Symmetric-key encryption scheme: weighted keys, per-key encryption
/// channels A→C and decryption channels C→Ā, where Ā = A ⊕ C|⊥⟩ carries an
/// extra reject vector as its last basis element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scheme {
    pub key_weights: Vec<f64>,
    pub enc: Vec<Channel>,
    pub dec: Vec<Channel>,
    /// (plaintext dimension |A|, ciphertext dimension |C|)
    pub dims: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tag: Option<TagInfo>,
}

/// Adversarial map on ciphertext plus side information, C⊗B → C⊗B̃.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Attack {
    pub channel: Channel,
}

impl Attack {
    pub fn new(channel: Channel) -> Result<Attack, QesError> {
        if channel.in_shape.n_subsystems() != 2 || channel.out_shape.n_subsystems() != 2 {
            return Err(QesError::Invalid(
                "attack must declare subsystems (C, B) -> (C, B~)".into(),
            ));
        }
        if channel.in_shape.dims[0] != channel.out_shape.dims[0] {
            return Err(QesError::Invalid(
                "attack must return the ciphertext space unchanged in dimension".into(),
            ));
        }
        if channel.tp_residual() > 1e-9 {
            return Err(QesError::Invalid("attack must be trace preserving".into()));
        }
        Ok(Attack { channel })
    }

    pub fn dc(&self) -> usize {
        self.channel.in_shape.dims[0]
    }
    pub fn db(&self) -> usize {
        self.channel.in_shape.dims[1]
    }
    pub fn db_tilde(&self) -> usize {
        self.channel.out_shape.dims[1]
    }
}

/// Single-Kraus embedding A → Ā appending the reject vector as an extra,
/// never-populated basis element.
fn embed_kraus(da: usize) -> CMatrix {
    let mut v = CMatrix::zeros(da + 1, da);
    for i in 0..da {
        v[(i, i)] = Complex64::new(1.0, 0.0);
    }
    v
}

fn embed_channel(da: usize) -> Channel {
    Channel::new(
        vec![embed_kraus(da)],
        Shape::new(vec![da]),
        Shape::new(vec![da + 1]),
    )
    .expect("embedding is an isometry")
}

impl Scheme {
    pub fn new(
        key_weights: Vec<f64>,
        enc: Vec<Channel>,
        dec: Vec<Channel>,
        dims: (usize, usize),
    ) -> Result<Scheme, QesError> {
        let (da, dc) = dims;
        let n = key_weights.len();
        if n == 0 || enc.len() != n || dec.len() != n {
            return Err(QesError::Invalid("key list length mismatch".into()));
        }
        let wsum: f64 = key_weights.iter().sum();
        if key_weights.iter().any(|&w| w < 0.0) || (wsum - 1.0).abs() > 1e-10 {
            return Err(QesError::Invalid("key weights must be a distribution".into()));
        }
        let target = cj_state(&embed_channel(da)).matrix;
        for k in 0..n {
            if enc[k].in_dim() != da || enc[k].out_dim() != dc {
                return Err(QesError::Invalid("encryption channel dimensions".into()));
            }
            if dec[k].in_dim() != dc || dec[k].out_dim() != da + 1 {
                return Err(QesError::Invalid("decryption channel dimensions".into()));
            }
            let round = crate::channels::compose(&dec[k], &enc[k])?;
            let residual = cj_state(&round).matrix.sub(&target).max_abs_entry();
            if residual > 1e-9 {
                return Err(QesError::NotCorrect { key: k, residual });
            }
        }
        Ok(Scheme {
            key_weights,
            enc,
            dec,
            dims,
            tag: None,
        })
    }

    pub fn key_count(&self) -> usize {
        self.key_weights.len()
    }

    /// Key-averaged encryption channel applied to a matrix on A.
    pub fn enc_avg(&self, x: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dims.1, self.dims.1);
        for (e, &w) in self.enc.iter().zip(self.key_weights.iter()) {
            acc = acc.add(&e.apply_matrix(x).scale_re(w));
        }
        acc
    }

    /// Key-averaged decryption channel applied to a matrix on C.
    pub fn dec_avg(&self, y: &CMatrix) -> CMatrix {
        let da = self.dims.0;
        let mut acc = CMatrix::zeros(da + 1, da + 1);
        for (d, &w) in self.dec.iter().zip(self.key_weights.iter()) {
            acc = acc.add(&d.apply_matrix(y).scale_re(w));
        }
        acc
    }
}

fn unitary_scheme(unitaries: &[CMatrix]) -> Result<Scheme, QesError> {
    let n = unitaries.len();
    let da = unitaries[0].rows;
    let emb = embed_kraus(da);
    let mut enc = Vec::with_capacity(n);
    let mut dec = Vec::with_capacity(n);
    for u in unitaries {
        enc.push(Channel::from_unitary(u)?);
        dec.push(Channel::new(
            vec![emb.mul(&u.dagger())],
            Shape::new(vec![da]),
            Shape::new(vec![da + 1]),
        )?);
    }
    Scheme::new(vec![1.0 / n as f64; n], enc, dec, (da, da))
}

/// Pauli one-time pad on n ≤ 2 qubits: uniform keys over the Pauli group,
/// decryption is the inverse conjugation followed by the reject embedding.
pub fn pauli_otp(n: usize) -> Result<Scheme, QesError> {
    let group = pauli_group(n)?;
    unitary_scheme(&group.unitaries)
}

/// Clifford scheme on n qubits: n = 1 uses all 24 single-qubit Cliffords;
/// n = 2 subsamples the 11520-element group with a fixed stride down to
/// [`CLIFFORD_2Q_SCHEME_KEYS`] keys.
pub fn clifford_scheme(n: usize) -> Result<Scheme, QesError> {
    match n {
        1 => unitary_scheme(&clifford_1q().unitaries),
        2 => {
            let all = &clifford_2q().unitaries;
            let stride = all.len() / CLIFFORD_2Q_SCHEME_KEYS;
            let picked: Vec<CMatrix> = all.iter().step_by(stride).cloned().collect();
            unitary_scheme(&picked)
        }
        _ => Err(QesError::Invalid("only n = 1 or 2 supported".into())),
    }
}

/// Tagged scheme: the plaintext is shrunk by a tag factor T that is set to a
/// fixed state before encryption; decryption projects onto the tag and
/// routes failures to the reject vector.
pub fn tagged_scheme(
    base: &Scheme,
    tag_dim: usize,
    tag_state: &[Complex64],
) -> Result<Scheme, QesError> {
    let (da, dc) = base.dims;
    if tag_dim < 2 || da % tag_dim != 0 {
        return Err(QesError::Invalid(
            "tag dimension must be >= 2 and divide the plaintext dimension".into(),
        ));
    }
    if tag_state.len() != tag_dim {
        return Err(QesError::Invalid("tag state length".into()));
    }
    let norm: f64 = tag_state.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QesError::Invalid("tag state must be normalized".into()));
    }
    let dap = da / tag_dim; // shrunk plaintext A'
    // orthonormal basis of T starting with the tag state (Gram-Schmidt over
    // the standard basis, skipping near-dependent vectors)
    let mut t_basis: Vec<Vec<Complex64>> = vec![tag_state.to_vec()];
    for j in 0..tag_dim {
        let mut v: Vec<Complex64> = (0..tag_dim)
            .map(|i| {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        for b in &t_basis {
            let ip: Complex64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
            for i in 0..tag_dim {
                v[i] -= ip * b[i];
            }
        }
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv > 1e-8 {
            for z in v.iter_mut() {
                *z /= nv;
            }
            t_basis.push(v);
        }
        if t_basis.len() == tag_dim {
            break;
        }
    }
    // W : A' -> A = A'⊗T appends the tag state (tag is the minor factor)
    let mut w = CMatrix::zeros(da, dap);
    for ap in 0..dap {
        for t in 0..tag_dim {
            w[(ap * tag_dim + t, ap)] = tag_state[t];
        }
    }
    // reducer R : Ā -> Ā' with accept Kraus P = Σ_{a'} |a'⟩⟨a'⊗ψ| and one
    // reject Kraus |⊥'⟩⟨e| per orthogonal direction (tag failures and the
    // base reject vector)
    let mut r_kraus = Vec::new();
    let mut p = CMatrix::zeros(dap + 1, da + 1);
    for ap in 0..dap {
        for t in 0..tag_dim {
            p[(ap, ap * tag_dim + t)] = tag_state[t].conj();
        }
    }
    r_kraus.push(p);
    for b in t_basis.iter().skip(1) {
        for ap in 0..dap {
            let mut k = CMatrix::zeros(dap + 1, da + 1);
            for t in 0..tag_dim {
                k[(dap, ap * tag_dim + t)] = b[t].conj();
            }
            r_kraus.push(k);
        }
    }
    let mut k_bot = CMatrix::zeros(dap + 1, da + 1);
    k_bot[(dap, da)] = Complex64::new(1.0, 0.0);
    r_kraus.push(k_bot);
    let reducer = Channel::new(r_kraus, Shape::new(vec![da + 1]), Shape::new(vec![dap + 1]))?;

    let mut enc = Vec::with_capacity(base.key_count());
    let mut dec = Vec::with_capacity(base.key_count());
    for k in 0..base.key_count() {
        let ek = Channel::new(
            base.enc[k].kraus.iter().map(|m| m.mul(&w)).collect(),
            Shape::new(vec![dap]),
            Shape::new(vec![dc]),
        )?;
        enc.push(ek);
        dec.push(crate::channels::compose(&reducer, &base.dec[k])?);
    }
    let tau_c = CMatrix::identity(dc).scale_re(1.0 / dc as f64);
    let dk_tau = base.dec_avg(&tau_c);
    let mut gamma_hat = 0.0;
    for ap in 0..dap {
        for t in 0..tag_dim {
            for t2 in 0..tag_dim {
                gamma_hat += (tag_state[t].conj()
                    * dk_tau[(ap * tag_dim + t, ap * tag_dim + t2)]
                    * tag_state[t2])
                    .re;
            }
        }
    }
    let mut s = Scheme::new(base.key_weights.clone(), enc, dec, (dap, dc))?;
    s.tag = Some(TagInfo {
        tag_dim,
        gamma_hat,
    });
    Ok(s)
}

/// Block-extended scheme with ciphertext C′ = C ⊕ Â (Â a plaintext-sized
/// block): encryption never populates Â, decryption measures the block and
/// passes Â contents through unchanged.
pub fn injection_scheme(base: &Scheme) -> Result<Scheme, QesError> {
    let (da, dc) = base.dims;
    let dcp = dc + da;
    // block embeddings/projections inside C'
    let mut j_c = CMatrix::zeros(dcp, dc);
    for i in 0..dc {
        j_c[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let mut p_hat = CMatrix::zeros(da, dcp);
    for i in 0..da {
        p_hat[(i, dc + i)] = Complex64::new(1.0, 0.0);
    }
    let emb = embed_kraus(da);
    let mut enc = Vec::with_capacity(base.key_count());
    let mut dec = Vec::with_capacity(base.key_count());
    for k in 0..base.key_count() {
        enc.push(Channel::new(
            base.enc[k].kraus.iter().map(|m| j_c.mul(m)).collect(),
            Shape::new(vec![da]),
            Shape::new(vec![dcp]),
        )?);
        let mut kraus: Vec<CMatrix> = base.dec[k]
            .kraus
            .iter()
            .map(|m| m.mul(&j_c.dagger()))
            .collect();
        kraus.push(emb.mul(&p_hat));
        dec.push(Channel::new(
            kraus,
            Shape::new(vec![dcp]),
            Shape::new(vec![da + 1]),
        )?);
    }
    Scheme::new(base.key_weights.clone(), enc, dec, (da, dcp))
}

/// Key-averaged effective channel tr_K D(Λ(E(· ⊗ τ_K))) on A⊗B → Ā⊗B̃,
/// returned via its Choi state to keep the Kraus rank minimal.
pub fn effective_choi(s: &Scheme, a: &Attack) -> Result<CMatrix, QesError> {
    let (da, dc) = s.dims;
    if a.dc() != dc {
        return Err(QesError::Invalid("attack ciphertext dimension".into()));
    }
    let db = a.db();
    let dbt = a.db_tilde();
    let side = (da + 1) * dbt * da * db;
    let mut acc = CMatrix::zeros(side, side);
    for k in 0..s.key_count() {
        let pre = tensor_ch(&s.enc[k], &Channel::identity(db));
        let post = tensor_ch(&s.dec[k], &Channel::identity(dbt));
        let theta = crate::channels::compose(
            &post,
            &crate::channels::compose(&a.channel, &pre)?,
        )?;
        acc = acc.add(&cj_state(&theta).matrix.scale_re(s.key_weights[k]));
    }
    Ok(acc)
}

/// Key-averaged effective channel as a [`Channel`] (Kraus form recovered
/// from the Choi state).
pub fn effective_channel(s: &Scheme, a: &Attack) -> Result<Channel, QesError> {
    let (da, _) = s.dims;
    let db = a.db();
    let dbt = a.db_tilde();
    let choi = effective_choi(s, a)?;
    let flat = channel_from_cj(&choi, da * db, (da + 1) * dbt)?;
    Ok(Channel::new(
        flat.kraus,
        Shape::new(vec![da, db]),
        Shape::new(vec![da + 1, dbt]),
    )?)
}

/// Identity-overlap component of an attack: the map
/// Λ′(σ_B) = tr_{CC'}[φ⁺_{CC'} Λ(φ⁺_{CC'} ⊗ σ_B)] on B → B̃.
fn lambda_prime(a: &Attack, x_b: &CMatrix) -> Result<(CMatrix, CMatrix), QesError> {
    let dc = a.dc();
    let db = a.db();
    let dbt = a.db_tilde();
    let phi = max_entangled(dc).density().matrix;
    // input ordered (C, B, C'); attack extended by the idle reference C'
    let raw = tensor(&phi, x_b);
    let input = permute_systems(&raw, &Shape::new(vec![dc, dc, db]), &[0, 2, 1])?;
    let ext = tensor_ch(&a.channel, &Channel::identity(dc));
    let out = ext.apply_matrix(&input); // on (C, B̃, C')
    let mut lp = CMatrix::zeros(dbt, dbt);
    for bt in 0..dbt {
        for bt2 in 0..dbt {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dc {
                for d in 0..dc {
                    acc += out[((c * dbt + bt) * dc + c, (d * dbt + bt2) * dc + d)];
                }
            }
            lp[(bt, bt2)] = acc / dc as f64;
        }
    }
    let full = partial_trace(&out, &Shape::new(vec![dc, dbt, dc]), &[1])?;
    let lpp = full.sub(&lp);
    Ok((lp, lpp))
}

/// Probability weight of the identity map inside an attack:
/// p_= = tr[(φ⁺_{CC'} ⊗ 1_B̃) Λ(φ⁺_{CC'} ⊗ ρ_B)].
pub fn p_equals(a: &Attack, rho_b: &CMatrix) -> Result<f64, QesError> {
    let (lp, _) = lambda_prime(a, rho_b)?;
    Ok(lp.trace().re.clamp(0.0, 1.0))
}

/// Choi states of the identity-overlap and orthogonal components of an
/// attack, both maps B → B̃.
fn lambda_parts_choi(a: &Attack) -> Result<(CMatrix, CMatrix), QesError> {
    let db = a.db();
    let dbt = a.db_tilde();
    let mut cp = CMatrix::zeros(dbt * db, dbt * db);
    let mut cpp = CMatrix::zeros(dbt * db, dbt * db);
    for b in 0..db {
        for b2 in 0..db {
            let mut unit = CMatrix::zeros(db, db);
            unit[(b, b2)] = Complex64::new(1.0, 0.0);
            let (lp, lpp) = lambda_prime(a, &unit)?;
            for bt in 0..dbt {
                for bt2 in 0..dbt {
                    cp[(bt * db + b, bt2 * db + b2)] += lp[(bt, bt2)] / db as f64;
                    cpp[(bt * db + b, bt2 * db + b2)] += lpp[(bt, bt2)] / db as f64;
                }
            }
        }
    }
    Ok((cp, cpp))
}

/// Choi state of the identity map A → Ā (reject vector never populated).
fn choi_id_embedded(da: usize) -> CMatrix {
    cj_state(&embed_channel(da)).matrix
}

/// Closed-form effective channel predicted for exact-design schemes:
/// Λ̃ = id ⊗ Λ′ + (|C|²⟨D_K(τ_C)⟩ − id)/(|C|²−1) ⊗ Λ″, as a Choi state on
/// (Ā, B̃, A, B).
pub fn exact_effective_choi(s: &Scheme, a: &Attack) -> Result<CMatrix, QesError> {
    let (da, dc) = s.dims;
    if a.dc() != dc {
        return Err(QesError::Invalid("attack ciphertext dimension".into()));
    }
    let db = a.db();
    let dbt = a.db_tilde();
    let (cp, cpp) = lambda_parts_choi(a)?;
    let choi_id = choi_id_embedded(da);
    let tau_c = CMatrix::identity(dc).scale_re(1.0 / dc as f64);
    let dk_tau = s.dec_avg(&tau_c);
    let choi_const = tensor(&dk_tau, &CMatrix::identity(da).scale_re(1.0 / da as f64));
    let c2 = (dc * dc) as f64;
    let part2 = choi_const.scale_re(c2).sub(&choi_id).scale_re(1.0 / (c2 - 1.0));
    // assemble Choi(Θ_A ⊗ Φ_B): tensor gives (Āout, Aref, B̃out, Bref);
    // reorder to (Āout, B̃out, Aref, Bref)
    let fine = Shape::new(vec![da + 1, da, dbt, db]);
    let term1 = permute_systems(&tensor(&choi_id, &cp), &fine, &[0, 2, 1, 3])?;
    let term2 = permute_systems(&tensor(&part2, &cpp), &fine, &[0, 2, 1, 3])?;
    Ok(term1.add(&term2))
}

/// Closed-form effective channel in Kraus form; errors when the assembled
/// Choi state is not completely positive (i.e. the scheme is not an exact
/// 2-design for this attack).
pub fn exact_effective(s: &Scheme, a: &Attack) -> Result<Channel, QesError> {
    let (da, _) = s.dims;
    let db = a.db();
    let dbt = a.db_tilde();
    let choi = exact_effective_choi(s, a)?;
    let flat = channel_from_cj(&choi, da * db, (da + 1) * dbt)?;
    Ok(Channel::new(
        flat.kraus,
        Shape::new(vec![da, db]),
        Shape::new(vec![da + 1, dbt]),
    )?)
}

/// Non-malleability gap I(ĀR:B̃)_out − I(AR:B)_in − h(p_=) for an input
/// ρ_ABR; values ≤ ε certify the instance.
pub fn nm_gap(s: &Scheme, a: &Attack, rho_abr: &MultiState) -> Result<f64, QesError> {
    if rho_abr.shape.n_subsystems() != 3 {
        return Err(QesError::Invalid("input must have subsystems (A, B, R)".into()));
    }
    let (da, _) = s.dims;
    let db = a.db();
    let dbt = a.db_tilde();
    let dr = rho_abr.shape.dims[2];
    if rho_abr.shape.dims[0] != da || rho_abr.shape.dims[1] != db {
        return Err(QesError::Invalid("input dimensions must match scheme/attack".into()));
    }
    let i_before = mutual_info(rho_abr, &[0, 2], &[1])?;
    let rho_b = rho_abr.marginal(&[1])?.matrix;
    let eff = effective_channel(s, a)?;
    let big = tensor_ch(&eff, &Channel::identity(dr));
    let out = MultiState {
        matrix: big.apply_matrix(&rho_abr.matrix),
        shape: Shape::new(vec![da + 1, dbt, dr]),
        normalization: rho_abr.normalization,
    };
    let i_after = mutual_info(&out, &[0, 2], &[1])?;
    Ok(i_after - i_before - binary_h(p_equals(a, &rho_b)?)?)
}

/// The block-injection attack on a scheme with ciphertext C′ = C ⊕ Â:
/// discard the ciphertext and place half of a maximally entangled pair in
/// the Â block, keeping the other half as side output.
pub fn injection_attack(dc_prime: usize, da: usize) -> Result<Attack, QesError> {
    if da < 2 || dc_prime <= da {
        return Err(QesError::Invalid("need |C| >= 2 and |Â| = |A| >= 2".into()));
    }
    let dc = dc_prime - da;
    // |χ⟩ on C'⊗B̃ supported on the Â block
    let mut chi = vec![Complex64::new(0.0, 0.0); dc_prime * da];
    let amp = 1.0 / (da as f64).sqrt();
    for m in 0..da {
        chi[(dc + m) * da + m] = Complex64::new(amp, 0.0);
    }
    let kraus: Vec<CMatrix> = (0..dc_prime)
        .map(|i| {
            let mut k = CMatrix::zeros(dc_prime * da, dc_prime);
            for (r, &z) in chi.iter().enumerate() {
                k[(r, i)] = z;
            }
            k
        })
        .collect();
    Attack::new(Channel::new(
        kraus,
        Shape::new(vec![dc_prime, 1]),
        Shape::new(vec![dc_prime, da]),
    )?)
}

/// Figures produced by [`injection_demo`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InjectionReport {
    /// Mutual information I(ĀR:B̃) after the attack, in bits.
    pub i_ar_bt: f64,
    /// Allowed budget h(p_=) in bits.
    pub h_budget: f64,
    /// Gap i_ar_bt − h_budget (input correlations are zero).
    pub gap: f64,
    /// Least-squares residual of the averaged plaintext map against the
    /// span of the identity and all constant maps.
    pub average_map_residual: f64,
}

/// Distance of a plaintext-map Choi state (A → Ā) from the linear span of
/// the identity map and all constant maps, in Frobenius norm.
pub fn abw_residual(choi: &CMatrix, da: usize) -> Result<f64, QesError> {
    let dab = da + 1;
    if choi.rows != dab * da {
        return Err(QesError::Invalid("Choi side must be (|A|+1)·|A|".into()));
    }
    let mut basis: Vec<CMatrix> = vec![choi_id_embedded(da)];
    for p in 0..dab {
        for q in 0..dab {
            let mut m = CMatrix::zeros(dab, dab);
            m[(p, q)] = Complex64::new(1.0, 0.0);
            basis.push(tensor(&m, &CMatrix::identity(da).scale_re(1.0 / da as f64)));
        }
    }
    let n = basis.len();
    let ip = |x: &CMatrix, y: &CMatrix| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..x.rows {
            for c in 0..x.cols {
                acc += x[(r, c)].conj() * y[(r, c)];
            }
        }
        acc
    };
    let mut g = CMatrix::zeros(n, n);
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = ip(&basis[i], &basis[j]);
        }
        b[i] = ip(&basis[i], choi);
    }
    let z = mat_func(&g, MatFunc::PinvSqrt)?;
    let g_pinv = z.mul(&z);
    let mut quad = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            quad += b[i].conj() * g_pinv[(i, j)] * b[j];
        }
    }
    let norm2 = ip(choi, choi).re;
    Ok((norm2 - quad.re).max(0.0).sqrt())
}

/// Run the block-injection separation: the attack transfers a full
/// maximally entangled plaintext to the receiver (I(ĀR:B̃) = 2·log|A|) while
/// the averaged plaintext map still lies in the identity/constant-map span.
pub fn injection_demo(base: &Scheme) -> Result<InjectionReport, QesError> {
    let s = injection_scheme(base)?;
    let (da, dcp) = s.dims;
    let a = injection_attack(dcp, da)?;
    let phi = max_entangled(da).density();
    let rho = MultiState {
        matrix: phi.matrix.clone(),
        shape: Shape::new(vec![da, 1, da]),
        normalization: Normalization::Normalized,
    };
    let eff = effective_channel(&s, &a)?;
    let big = tensor_ch(&eff, &Channel::identity(da));
    let out = MultiState {
        matrix: big.apply_matrix(&rho.matrix),
        shape: Shape::new(vec![da + 1, da, da]),
        normalization: Normalization::Normalized,
    };
    let i_ar_bt = mutual_info(&out, &[0, 2], &[1])?;
    let p = 1.0 / ((dcp * dcp) as f64);
    let h_budget = binary_h(p)?;
    // averaged plaintext map: trivial side input, side output traced out
    let plain_choi = {
        let trivial = Attack::new(Channel::new(
            a.channel.kraus.clone(),
            Shape::new(vec![dcp, 1]),
            Shape::new(vec![dcp, da]),
        )?)?;
        let full = effective_choi(&s, &trivial)?;
        // subsystems (Ā, B̃, A, B=1): trace out B̃
        partial_trace(&full, &Shape::new(vec![da + 1, da, da, 1]), &[0, 2, 3])?
    };
    let average_map_residual = abw_residual(&plain_choi, da)?;
    Ok(InjectionReport {
        i_ar_bt,
        h_budget,
        gap: i_ar_bt - h_budget,
        average_map_residual,
    })
}

fn apply_on_second<F>(rho: &CMatrix, da: usize, db: usize, dbt: usize, f: F) -> CMatrix
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut out = CMatrix::zeros(da * dbt, da * dbt);
    for i in 0..da {
        for j in 0..da {
            let mut block = CMatrix::zeros(db, db);
            for b in 0..db {
                for b2 in 0..db {
                    block[(b, b2)] = rho[(i * db + b, j * db + b2)];
                }
            }
            let mapped = f(&block);
            for bt in 0..dbt {
                for bt2 in 0..dbt {
                    out[(i * dbt + bt, j * dbt + bt2)] = mapped[(bt, bt2)];
                }
            }
        }
    }
    out
}

/// Averaged-authentication residual: distance of the effective channel's
/// output from an accept branch that leaves the plaintext alone plus a
/// reject branch that only sees the side information, maximized over the
/// supplied inputs ρ_AB. Accept/reject maps are assembled from the attack's
/// identity-overlap decomposition and the scheme's tag metadata.
pub fn dns_check(s: &Scheme, a: &Attack, inputs: &[MultiState]) -> Result<f64, QesError> {
    let tag = s
        .tag
        .as_ref()
        .ok_or_else(|| QesError::Invalid("scheme must carry tag metadata".into()))?;
    let (da, dc) = s.dims;
    let db = a.db();
    let dbt = a.db_tilde();
    let c2 = (dc * dc) as f64;
    let gamma = tag.gamma_hat.max(1.0 / c2);
    let acc_w = (gamma * c2 - 1.0) / (c2 - 1.0);
    let rej_w = (1.0 - gamma) * c2 / (c2 - 1.0);
    let eff = effective_channel(s, a)?;
    let mut worst = 0.0f64;
    for rho in inputs {
        if rho.shape.dims != vec![da, db] {
            return Err(QesError::Invalid("input must live on (A, B)".into()));
        }
        let actual = eff.apply_matrix(&rho.matrix);
        let rho_b = partial_trace(&rho.matrix, &rho.shape, &[1])?;
        let acc_part = apply_on_second(&rho.matrix, da, db, dbt, |blk| {
            let (lp, lpp) = lambda_prime(a, blk).expect("component maps");
            lp.add(&lpp.scale_re(acc_w))
        });
        // embed the accept branch A⊗B̃ into Ā⊗B̃ and add the reject branch
        let mut sim = CMatrix::zeros((da + 1) * dbt, (da + 1) * dbt);
        for i in 0..da {
            for j in 0..da {
                for bt in 0..dbt {
                    for bt2 in 0..dbt {
                        sim[(i * dbt + bt, j * dbt + bt2)] =
                            acc_part[(i * dbt + bt, j * dbt + bt2)];
                    }
                }
            }
        }
        let (lp_b, lpp_b) = lambda_prime(a, &rho_b)?;
        let rej = lpp_b.scale_re(rej_w);
        let _ = lp_b;
        for bt in 0..dbt {
            for bt2 in 0..dbt {
                sim[(da * dbt + bt, da * dbt + bt2)] = rej[(bt, bt2)];
            }
        }
        worst = worst.max(herm_trace_norm(&actual.sub(&sim))?);
    }
    Ok(worst)
}

/// Per-key accept-projected authentication residual for a single-Kraus
/// (isometric) attack: the accepted output is compared against the fixed
/// simulator Γ_V = tr_C V/|C| acting on the side information only, averaged
/// over keys and maximized over the supplied inputs ρ_AB.
pub fn gyz_check(s: &Scheme, a: &Attack, inputs: &[MultiState]) -> Result<f64, QesError> {
    if a.channel.kraus.len() != 1 {
        return Err(QesError::Invalid("attack must be isometric (single Kraus)".into()));
    }
    let v = &a.channel.kraus[0];
    let iso = v.dagger().mul(v).sub(&CMatrix::identity(v.cols)).max_abs_entry();
    if iso > 1e-9 {
        return Err(QesError::Invalid("attack Kraus operator must be an isometry".into()));
    }
    let (da, dc) = s.dims;
    let db = a.db();
    let dbt = a.db_tilde();
    let mut gamma_v = CMatrix::zeros(dbt, db);
    for bt in 0..dbt {
        for b in 0..db {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dc {
                acc += v[(c * dbt + bt, c * db + b)];
            }
            gamma_v[(bt, b)] = acc / dc as f64;
        }
    }
    let big_gamma = tensor(&CMatrix::identity(da), &gamma_v);
    let mut pi = CMatrix::zeros((da + 1) * dbt, da * dbt);
    for i in 0..da {
        for bt in 0..dbt {
            pi[(i * dbt + bt, i * dbt + bt)] = Complex64::new(1.0, 0.0);
        }
    }
    let mut worst = 0.0f64;
    for rho in inputs {
        if rho.shape.dims != vec![da, db] {
            return Err(QesError::Invalid("input must live on (A, B)".into()));
        }
        let ideal = big_gamma.mul(&rho.matrix).mul(&big_gamma.dagger());
        let ideal_emb = pi.mul(&ideal).mul(&pi.dagger());
        let mut avg = 0.0;
        for k in 0..s.key_count() {
            let pre = tensor_ch(&s.enc[k], &Channel::identity(db));
            let post = tensor_ch(&s.dec[k], &Channel::identity(dbt));
            let out =
                post.apply_matrix(&a.channel.apply_matrix(&pre.apply_matrix(&rho.matrix)));
            // project onto the accept block of Ā
            let mut acc_blk = CMatrix::zeros((da + 1) * dbt, (da + 1) * dbt);
            for i in 0..da {
                for j in 0..da {
                    for bt in 0..dbt {
                        for bt2 in 0..dbt {
                            acc_blk[(i * dbt + bt, j * dbt + bt2)] =
                                out[(i * dbt + bt, j * dbt + bt2)];
                        }
                    }
                }
            }
            avg += s.key_weights[k] * herm_trace_norm(&acc_blk.sub(&ideal_emb))?;
        }
        worst = worst.max(avg);
    }
    Ok(worst)
}

/// Ceiling 4·(1/|T| + 3δ)^{1/3} on the per-key accept-projected residual of
/// a tagged exact/approximate 2-design scheme.
pub fn gyz_bound(tag_dim: usize, delta: f64) -> f64 {
    4.0 * (1.0 / tag_dim as f64 + 3.0 * delta).powf(1.0 / 3.0)
}

/// A Haar-random isometric attack V: C⊗B → C⊗B̃ with B̃ = B (a random
/// unitary, the generic single-Kraus adversary).
pub fn random_isometric_attack(dc: usize, db: usize, seed: u64) -> Result<Attack, QesError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let u = random_unitary_rng(dc * db, &mut rng);
    Attack::new(Channel::new(
        vec![u],
        Shape::new(vec![dc, db]),
        Shape::new(vec![dc, db]),
    )?)
}

/// A random CPTP attack with the given environment dimension, built from a
/// Haar isometry.
pub fn random_attack(
    dc: usize,
    db: usize,
    dbt: usize,
    denv: usize,
    seed: u64,
) -> Result<Attack, QesError> {
    let din = dc * db;
    let dout = dc * dbt;
    if dout * denv < din {
        return Err(QesError::Invalid("environment too small for an isometry".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let u = random_unitary_rng(dout * denv, &mut rng);
    let kraus: Vec<CMatrix> = (0..denv)
        .map(|e| {
            CMatrix::from_fn(dout, din, |r, c| u[(r * denv + e, c)])
        })
        .collect();
    Attack::new(Channel::new(
        kraus,
        Shape::new(vec![dc, db]),
        Shape::new(vec![dc, dbt]),
    )?)
}

/// Identity attack (no side information transformation) for a given
/// ciphertext dimension and side dimension.
pub fn identity_attack(dc: usize, db: usize) -> Result<Attack, QesError> {
    Attack::new(Channel::new(
        vec![CMatrix::identity(dc * db)],
        Shape::new(vec![dc, db]),
        Shape::new(vec![dc, db]),
    )?)
}

/// Attack that replaces the ciphertext with a fixed state σ_C, discarding
/// the original (no side information).
pub fn replace_attack(sigma_c: &CMatrix) -> Result<Attack, QesError> {
    let dc = sigma_c.rows;
    let (eigs, vecs) = crate::tensorlab::herm_eig(sigma_c)?;
    let mut kraus = Vec::new();
    for (idx, &lam) in eigs.iter().enumerate() {
        if lam < 1e-14 {
            continue;
        }
        for i in 0..dc {
            let mut k = CMatrix::zeros(dc, dc);
            for r in 0..dc {
                k[(r, i)] = vecs[(r, idx)] * lam.sqrt();
            }
            kraus.push(k);
        }
    }
    Attack::new(Channel::new(
        kraus,
        Shape::new(vec![dc, 1]),
        Shape::new(vec![dc, 1]),
    )?)
}

/// Attack that applies a fixed unitary W to the ciphertext.
pub fn unitary_attack(w: &CMatrix) -> Result<Attack, QesError> {
    let dc = w.rows;
    Attack::new(Channel::new(
        vec![w.clone()],
        Shape::new(vec![dc, 1]),
        Shape::new(vec![dc, 1]),
    )?)
}

/// Coin attack: with equal probability conjugate the ciphertext by W₀ or
/// W₁, recording the choice in a fresh side-output qubit.
pub fn coin_attack(w0: &CMatrix, w1: &CMatrix) -> Result<Attack, QesError> {
    let dc = w0.rows;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |w: &CMatrix, bit: usize| -> CMatrix {
        let mut k = CMatrix::zeros(dc * 2, dc);
        for r in 0..dc {
            for c in 0..dc {
                k[(r * 2 + bit, c)] = w[(r, c)] * half;
            }
        }
        k
    };
    Attack::new(Channel::new(
        vec![mk(w0, 0), mk(w1, 1)],
        Shape::new(vec![dc, 1]),
        Shape::new(vec![dc, 2]),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::pauli_1q;
    use crate::entropy::shannon;
    use crate::states::PureVec;
    use crate::tensorlab::random_density;

    fn phi_abr(da: usize) -> MultiState {
        MultiState {
            matrix: max_entangled(da).density().matrix,
            shape: Shape::new(vec![da, 1, da]),
            normalization: Normalization::Normalized,
        }
    }

    #[test]
    fn pauli_otp_is_constant_on_average() {
        let s = pauli_otp(1).unwrap();
        assert_eq!(s.key_count(), 4);
        for seed in 0..3 {
            let rho = random_density(2, 2, seed);
            let out = s.enc_avg(&rho);
            let tau = CMatrix::identity(2).scale_re(0.5);
            assert!(out.sub(&tau).max_abs_entry() < 1e-10);
        }
    }

    #[test]
    fn clifford_scheme_counts_and_secrecy() {
        let s = clifford_scheme(1).unwrap();
        assert_eq!(s.key_count(), 24);
        let rho = random_density(2, 2, 7);
        let tau = CMatrix::identity(2).scale_re(0.5);
        assert!(s.enc_avg(&rho).sub(&tau).max_abs_entry() < 1e-9);
    }

    #[test]
    fn effective_channel_examples() {
        let s = clifford_scheme(1).unwrap();
        let id = identity_attack(2, 1).unwrap();
        let choi = effective_choi(&s, &id).unwrap();
        let target = choi_id_embedded(2);
        // side dimensions are trivial, so the Chois match directly
        assert!(choi.sub(&target).max_abs_entry() < 1e-9);

        // replacement attack on the Pauli pad: constant map to D_K(σ)
        let p = pauli_otp(1).unwrap();
        let sigma = random_density(2, 2, 3);
        let rep = replace_attack(&sigma).unwrap();
        let eff = effective_channel(&p, &rep).unwrap();
        for seed in 0..3 {
            let rho = random_density(2, 1, seed);
            let out = eff.apply_matrix(&rho);
            let expect = p.dec_avg(&sigma);
            assert!(out.sub(&expect).max_abs_entry() < 1e-9);
        }
    }

    #[test]
    fn p_equals_examples() {
        let id = identity_attack(2, 1).unwrap();
        let one = CMatrix::identity(1);
        assert!((p_equals(&id, &one).unwrap() - 1.0).abs() < 1e-10);

        let tau = CMatrix::identity(2).scale_re(0.5);
        let rep = replace_attack(&tau).unwrap();
        assert!((p_equals(&rep, &one).unwrap() - 0.25).abs() < 1e-10);

        let paulis = pauli_1q();
        for w in &paulis {
            let at = unitary_attack(w).unwrap();
            let expect = w.trace().norm_sqr() / 4.0;
            assert!((p_equals(&at, &one).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn effective_matches_exact_for_two_design() {
        let s = clifford_scheme(1).unwrap();
        for seed in 0..5u64 {
            let a = random_attack(2, 2, 2, 2, seed).unwrap();
            let eff = effective_choi(&s, &a).unwrap();
            let exact = exact_effective_choi(&s, &a).unwrap();
            let d = eff.sub(&exact).frobenius_norm();
            assert!(d < 1e-8, "seed {seed}: {d}");
        }
        // the Pauli pad is only a 1-design: a Z attack separates the two
        let p = pauli_otp(1).unwrap();
        let z = &pauli_1q()[3];
        let a = unitary_attack(z).unwrap();
        let d = effective_choi(&p, &a)
            .unwrap()
            .sub(&exact_effective_choi(&p, &a).unwrap())
            .frobenius_norm();
        assert!(d > 0.1, "{d}");
    }

    #[test]
    fn nm_gap_examples() {
        let s = clifford_scheme(1).unwrap();
        let rho = phi_abr(2);
        let id = identity_attack(2, 1).unwrap();
        assert!(nm_gap(&s, &id, &rho).unwrap().abs() < 1e-8);

        // coin-controlled Pauli conjugation: malleability witness for the
        // Pauli pad, harmless against the Clifford scheme
        let paulis = pauli_1q();
        let coin = coin_attack(&paulis[1], &paulis[3]).unwrap();
        let p = pauli_otp(1).unwrap();
        let g = nm_gap(&p, &coin, &rho).unwrap();
        assert!(g > 0.5, "pauli gap {g}");
        let g = nm_gap(&s, &coin, &rho).unwrap();
        assert!(g <= 1e-6, "clifford gap {g}");
    }

    #[test]
    fn tagged_scheme_properties() {
        let base = pauli_otp(2).unwrap();
        let tag = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let s = tagged_scheme(&base, 2, &tag).unwrap();
        assert_eq!(s.dims, (2, 4));
        let info = s.tag.as_ref().unwrap();
        assert!((info.gamma_hat - 0.5).abs() < 1e-10);
        // accept probability of the maximally mixed ciphertext is 1/|T|
        let tau_c = CMatrix::identity(4).scale_re(0.25);
        let out = s.dec_avg(&tau_c);
        let mut acc = 0.0;
        for i in 0..2 {
            acc += out[(i, i)].re;
        }
        assert!((acc - 0.5).abs() < 1e-10);
    }

    #[test]
    fn injection_separation() {
        let base = clifford_scheme(1).unwrap();
        let report = injection_demo(&base).unwrap();
        assert!((report.i_ar_bt - 2.0).abs() < 1e-6, "{}", report.i_ar_bt);
        assert!(report.h_budget < 0.4);
        assert!(report.gap >= 2.0 - binary_h(1.0 / 16.0).unwrap() - 1e-6);
        assert!(report.average_map_residual < 1e-8);
    }

    #[test]
    fn auth_residuals() {
        let base = clifford_scheme(1).unwrap();
        let tag = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let s = tagged_scheme(&base, 2, &tag).unwrap();
        let inputs = vec![MultiState {
            matrix: tensor(
                &PureVec::basis_state(1, 0).density().matrix,
                &random_density(2, 2, 5),
            ),
            shape: Shape::new(vec![1, 2]),
            normalization: Normalization::Normalized,
        }];
        let id = identity_attack(2, 2).unwrap();
        assert!(dns_check(&s, &id, &inputs).unwrap() < 1e-8);
        assert!(gyz_check(&s, &id, &inputs).unwrap() < 1e-8);

        let ceiling = gyz_bound(2, 0.0);
        assert!((ceiling - 3.174802103936399).abs() < 1e-9);
        assert!((gyz_bound(16, 0.0) - 4.0 / 16f64.powf(1.0 / 3.0)).abs() < 1e-9);
        for seed in 0..3u64 {
            let a = random_isometric_attack(2, 2, seed).unwrap();
            let r = gyz_check(&s, &a, &inputs).unwrap();
            assert!(r <= ceiling, "seed {seed}: {r}");
            let rd = dns_check(&s, &a, &inputs).unwrap();
            assert!(rd <= ceiling, "seed {seed}: {rd}");
        }
    }

    #[test]
    fn classical_restriction_is_non_malleable() {
        // classical one-time pad on two symbols, attack flips the ciphertext
        // (so the new ciphertext never equals the old one); the induced
        // distribution over (X, C, C~, X~) must satisfy I(X~:C~|X C) = 0
        let mut joint = std::collections::HashMap::new();
        for x in 0..2usize {
            for k in 0..2usize {
                let c = x ^ k;
                let ct = c ^ 1;
                let xt = ct ^ k;
                *joint.entry((x, c, ct, xt)).or_insert(0.0) += 0.25;
            }
        }
        // I(X~:C~|XC) = H(X~|XC) + H(C~|XC) − H(X~C~|XC)
        let mut cmi = 0.0;
        for x in 0..2 {
            for c in 0..2 {
                let slice: Vec<((usize, usize), f64)> = joint
                    .iter()
                    .filter(|((xx, cc, _, _), _)| *xx == x && *cc == c)
                    .map(|((_, _, ct, xt), &p)| ((*ct, *xt), p))
                    .collect();
                let pxc: f64 = slice.iter().map(|(_, p)| p).sum();
                if pxc < 1e-15 {
                    continue;
                }
                let cond: Vec<f64> = slice.iter().map(|(_, p)| p / pxc).collect();
                let mut m_ct = [0.0; 2];
                let mut m_xt = [0.0; 3];
                for (((ct, xt), p), _) in slice.iter().zip(0..) {
                    m_ct[*ct] += p / pxc;
                    m_xt[*xt] += p / pxc;
                }
                cmi += pxc
                    * (shannon(&m_ct).unwrap() + shannon(&m_xt).unwrap()
                        - shannon(&cond).unwrap());
            }
        }
        assert!(cmi.abs() < 1e-10, "cmi {cmi}");
    }
}
