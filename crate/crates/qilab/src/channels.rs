//! Channel calculus: Kraus/Choi/Stinespring representations, twirls over
//! unitary ensembles, Pauli and Clifford groups, and design-defect
//! measurement.

use crate::states::{max_entangled, MultiState, Normalization, StateError};
use crate::tensorlab::{
    herm_eig, partial_trace, swap_operator, tensor, CMatrix, LinalgError, Shape,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("channel is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("reference marginal of Choi state deviates from maximally mixed by {residual:.3e}")]
    BadChoiMarginal { residual: f64 },
    #[error("ensemble member is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Channel {
    pub kraus: Vec<CMatrix>,
    pub in_shape: Shape,
    pub out_shape: Shape,
}

impl Channel {
    pub fn new(kraus: Vec<CMatrix>, in_shape: Shape, out_shape: Shape) -> Result<Self, ChannelError> {
        if kraus.is_empty() {
            return Err(ChannelError::Invalid("empty Kraus list".into()));
        }
        let din = in_shape.total_dim();
        let dout = out_shape.total_dim();
        for k in &kraus {
            if k.rows != dout || k.cols != din {
                return Err(ChannelError::ShapeMismatch(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.rows, k.cols, dout, din
                )));
            }
        }
        let ch = Channel {
            kraus,
            in_shape,
            out_shape,
        };
        let residual = ch.tp_residual();
        if residual > 1e-9 {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    pub fn tp_residual(&self) -> f64 {
        let din = self.in_shape.total_dim();
        let mut acc = CMatrix::zeros(din, din);
        for k in &self.kraus {
            acc = acc.add(&k.dagger().mul(k));
        }
        acc.sub(&CMatrix::identity(din)).max_abs_entry()
    }

    pub fn in_dim(&self) -> usize {
        self.in_shape.total_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_shape.total_dim()
    }

    pub fn identity(d: usize) -> Channel {
        Channel {
            kraus: vec![CMatrix::identity(d)],
            in_shape: Shape::new(vec![d]),
            out_shape: Shape::new(vec![d]),
        }
    }

    pub fn from_unitary(u: &CMatrix) -> Result<Channel, ChannelError> {
        let r = u.unitarity_residual();
        if r > 1e-8 {
            return Err(ChannelError::NotUnitary { residual: r });
        }
        Ok(Channel {
            kraus: vec![u.clone()],
            in_shape: Shape::new(vec![u.cols]),
            out_shape: Shape::new(vec![u.rows]),
        })
    }

    /// Completely depolarizing channel: everything goes to τ_d.
    pub fn depolarizing(d: usize) -> Channel {
        let mut kraus = Vec::with_capacity(d * d);
        let a = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = Complex64::new(a, 0.0);
                kraus.push(k);
            }
        }
        Channel {
            kraus,
            in_shape: Shape::new(vec![d]),
            out_shape: Shape::new(vec![d]),
        }
    }

    /// Apply to a raw density matrix.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim(), self.out_dim());
        for k in &self.kraus {
            out = out.add(&k.mul(rho).mul(&k.dagger()));
        }
        out
    }
}

/// Apply a channel to a state.
pub fn apply(ch: &Channel, rho: &MultiState) -> Result<MultiState, ChannelError> {
    if rho.total_dim() != ch.in_dim() {
        return Err(ChannelError::ShapeMismatch(format!(
            "state dim {} vs channel input {}",
            rho.total_dim(),
            ch.in_dim()
        )));
    }
    Ok(MultiState {
        matrix: ch.apply_matrix(&rho.matrix),
        shape: ch.out_shape.clone(),
        normalization: rho.normalization,
    })
}

/// Composition Λ₂ ∘ Λ₁ (Λ₁ first).
pub fn compose(l2: &Channel, l1: &Channel) -> Result<Channel, ChannelError> {
    if l1.out_dim() != l2.in_dim() {
        return Err(ChannelError::ShapeMismatch(
            "inner dimensions do not match".into(),
        ));
    }
    let mut kraus = Vec::with_capacity(l1.kraus.len() * l2.kraus.len());
    for k2 in &l2.kraus {
        for k1 in &l1.kraus {
            kraus.push(k2.mul(k1));
        }
    }
    Ok(Channel {
        kraus,
        in_shape: l1.in_shape.clone(),
        out_shape: l2.out_shape.clone(),
    })
}

/// Tensor product Λ ⊗ Γ.
pub fn tensor_ch(l: &Channel, g: &Channel) -> Channel {
    let mut kraus = Vec::with_capacity(l.kraus.len() * g.kraus.len());
    for kl in &l.kraus {
        for kg in &g.kraus {
            kraus.push(tensor(kl, kg));
        }
    }
    let mut in_dims = l.in_shape.dims.clone();
    in_dims.extend_from_slice(&g.in_shape.dims);
    let mut out_dims = l.out_shape.dims.clone();
    out_dims.extend_from_slice(&g.out_shape.dims);
    Channel {
        kraus,
        in_shape: Shape::new(in_dims),
        out_shape: Shape::new(out_dims),
    }
}

/// Choi state η_Λ = (Λ ⊗ id)(φ⁺), channel acting on the first tensor factor.
/// Output subsystems: [out, reference(in)].
pub fn cj_state(ch: &Channel) -> MultiState {
    let d = ch.in_dim();
    let phi = max_entangled(d).density();
    let idref = CMatrix::identity(d);
    let mut out = CMatrix::zeros(ch.out_dim() * d, ch.out_dim() * d);
    for k in &ch.kraus {
        let big = tensor(k, &idref);
        out = out.add(&big.mul(&phi.matrix).mul(&big.dagger()));
    }
    MultiState {
        matrix: out,
        shape: Shape::new(vec![ch.out_dim(), d]),
        normalization: Normalization::Normalized,
    }
}

/// Reconstruct a channel from its Choi state (first-factor convention):
/// Kraus operators from the eigendecomposition of |A|·η.
pub fn channel_from_cj(eta: &CMatrix, din: usize, dout: usize) -> Result<Channel, ChannelError> {
    if eta.rows != din * dout {
        return Err(ChannelError::ShapeMismatch(format!(
            "Choi matrix side {} vs expected {}",
            eta.rows,
            din * dout
        )));
    }
    let shape = Shape::new(vec![dout, din]);
    let ref_marg = partial_trace(eta, &shape, &[1])?;
    let residual = ref_marg
        .sub(&CMatrix::identity(din).scale_re(1.0 / din as f64))
        .max_abs_entry();
    if residual > 1e-8 {
        return Err(ChannelError::BadChoiMarginal { residual });
    }
    let scaled = eta.scale_re(din as f64);
    let (eigs, v) = herm_eig(&scaled)?;
    let mut kraus = Vec::new();
    for (idx, &lam) in eigs.iter().enumerate() {
        if lam < 1e-12 {
            continue;
        }
        let s = lam.sqrt();
        let mut k = CMatrix::zeros(dout, din);
        for i in 0..dout {
            for j in 0..din {
                k[(i, j)] = v[(i * din + j, idx)] * s;
            }
        }
        kraus.push(k);
    }
    Channel::new(kraus, Shape::new(vec![din]), Shape::new(vec![dout]))
}

/// Stinespring isometry V = Σ_i K_i ⊗ |i⟩_E with environment dimension equal
/// to the number of Kraus operators; tr_E VρV† = Λ(ρ).
pub fn stinespring(ch: &Channel) -> CMatrix {
    let ne = ch.kraus.len();
    let dout = ch.out_dim();
    let din = ch.in_dim();
    let mut v = CMatrix::zeros(dout * ne, din);
    for (i, k) in ch.kraus.iter().enumerate() {
        for r in 0..dout {
            for cidx in 0..din {
                v[(r * ne + i, cidx)] = k[(r, cidx)];
            }
        }
    }
    v
}

/// Finite set of unitaries with sampling weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitaryEnsemble {
    pub unitaries: Vec<CMatrix>,
    pub weights: Vec<f64>,
}

impl UnitaryEnsemble {
    pub fn uniform(unitaries: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let n = unitaries.len();
        if n == 0 {
            return Err(ChannelError::Invalid("empty ensemble".into()));
        }
        for u in &unitaries {
            let r = u.unitarity_residual();
            if r > 1e-9 {
                return Err(ChannelError::NotUnitary { residual: r });
            }
        }
        Ok(UnitaryEnsemble {
            unitaries,
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].rows
    }
}

/// Positive operator-valued measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Povm {
    pub effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self, ChannelError> {
        if effects.is_empty() {
            return Err(ChannelError::Invalid("empty POVM".into()));
        }
        let d = effects[0].rows;
        let mut acc = CMatrix::zeros(d, d);
        for e in &effects {
            let (eigs, _) = herm_eig(e)?;
            if let Some(&min) = eigs.first() {
                if min < -1e-10 {
                    return Err(ChannelError::Invalid(format!(
                        "POVM effect has negative eigenvalue {min:.3e}"
                    )));
                }
            }
            acc = acc.add(e);
        }
        let resid = acc.sub(&CMatrix::identity(d)).max_abs_entry();
        if resid > 1e-9 {
            return Err(ChannelError::Invalid(format!(
                "POVM effects sum deviates from identity by {resid:.3e}"
            )));
        }
        Ok(Povm { effects })
    }
}

/// Ensemble twirl Σ_w w · U^{⊗t} M (U^{⊗t})† for t ∈ {1, 2}.
pub fn t_twirl(d_ens: &UnitaryEnsemble, t: usize, m: &CMatrix) -> Result<CMatrix, ChannelError> {
    if !(t == 1 || t == 2) {
        return Err(ChannelError::Invalid("t must be 1 or 2".into()));
    }
    let mut out = CMatrix::zeros(m.rows, m.cols);
    for (u, &w) in d_ens.unitaries.iter().zip(d_ens.weights.iter()) {
        let ut = if t == 1 { u.clone() } else { tensor(u, u) };
        if ut.rows != m.rows {
            return Err(ChannelError::ShapeMismatch(
                "operand dimension does not match ensemble".into(),
            ));
        }
        out = out.add(&ut.mul(m).mul(&ut.dagger()).scale_re(w));
    }
    Ok(out)
}

/// Closed-form Haar 2-fold twirl of M on (C^d)^{⊗2} ⊗ B:
/// 1⊗R¹ + F⊗R^F with R¹ = (d·tr₁₂M − tr₁₂FM)/(d(d²−1)),
/// R^F = (d·tr₁₂FM − tr₁₂M)/(d(d²−1)), partial traces over the two twirled
/// copies. Without a side system the R's are scalars.
pub fn haar_2_twirl(m: &CMatrix, d: usize) -> Result<CMatrix, ChannelError> {
    let dd = d * d;
    if m.rows % dd != 0 || m.rows != m.cols {
        return Err(ChannelError::ShapeMismatch(
            "operand not on (C^d)^{⊗2} ⊗ B".into(),
        ));
    }
    let db = m.rows / dd;
    let shape = Shape::new(vec![dd, db]);
    let f = swap_operator(d);
    let f_full = tensor(&f, &CMatrix::identity(db));
    let tr_m = partial_trace(m, &shape, &[1])?;
    let tr_fm = partial_trace(&f_full.mul(m), &shape, &[1])?;
    let denom = (d as f64) * ((dd - 1) as f64);
    let r1 = tr_m
        .scale_re(d as f64)
        .sub(&tr_fm)
        .scale_re(1.0 / denom);
    let rf = tr_fm
        .scale_re(d as f64)
        .sub(&tr_m)
        .scale_re(1.0 / denom);
    Ok(tensor(&CMatrix::identity(dd), &r1).add(&tensor(&f, &rf)))
}

/// Twirl Σ_w w (U⊗Ū) X (U⊗Ū)†.
pub fn u_ubar_twirl(d_ens: &UnitaryEnsemble, x: &CMatrix) -> Result<CMatrix, ChannelError> {
    let mut out = CMatrix::zeros(x.rows, x.cols);
    for (u, &w) in d_ens.unitaries.iter().zip(d_ens.weights.iter()) {
        let uu = tensor(u, &u.conj());
        if uu.rows != x.rows {
            return Err(ChannelError::ShapeMismatch(
                "operand dimension does not match ensemble".into(),
            ));
        }
        out = out.add(&uu.mul(x).mul(&uu.dagger()).scale_re(w));
    }
    Ok(out)
}

/// Channel twirl: the channel whose Choi state is the U⊗Ū twirl of η_Λ.
pub fn channel_twirl(d_ens: &UnitaryEnsemble, ch: &Channel) -> Result<Channel, ChannelError> {
    if ch.in_dim() != ch.out_dim() {
        return Err(ChannelError::ShapeMismatch(
            "channel twirl needs a square channel".into(),
        ));
    }
    let eta = cj_state(ch);
    let twirled = u_ubar_twirl(d_ens, &eta.matrix)?;
    channel_from_cj(&twirled, ch.in_dim(), ch.out_dim())
}

pub fn pauli_1q() -> [CMatrix; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        CMatrix::identity(2),
        CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) }),
        CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        }),
        CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]),
    ]
}

/// The n-qubit Pauli group modulo phase, as a uniform ensemble (n ≤ 2).
pub fn pauli_group(n: usize) -> Result<UnitaryEnsemble, ChannelError> {
    if !(n == 1 || n == 2) {
        return Err(ChannelError::Invalid("pauli_group supports n in {1,2}".into()));
    }
    let p1 = pauli_1q();
    let unitaries: Vec<CMatrix> = if n == 1 {
        p1.to_vec()
    } else {
        let mut v = Vec::with_capacity(16);
        for a in &p1 {
            for b in &p1 {
                v.push(tensor(a, b));
            }
        }
        v
    };
    UnitaryEnsemble::uniform(unitaries)
}

const PHASE_COUNT: usize = 8;

fn phase_ring() -> [Complex64; PHASE_COUNT] {
    // ⟨e^{iπ/4}⟩: the global phases generated by H and P products.
    let mut out = [Complex64::new(0.0, 0.0); PHASE_COUNT];
    for (k, slot) in out.iter_mut().enumerate() {
        let a = std::f64::consts::FRAC_PI_4 * k as f64;
        *slot = Complex64::new(a.cos(), a.sin());
    }
    out
}

/// Canonical key of a unitary modulo the 8 global phases: the
/// lexicographically smallest entrywise rounding (1e-8 grid) over all phase
/// representatives.
fn phase_canonical_key(u: &CMatrix) -> Vec<i64> {
    let mut best: Option<Vec<i64>> = None;
    for p in phase_ring() {
        let mut key = Vec::with_capacity(2 * u.data.len());
        for z in &u.data {
            let w = z * p;
            let mut re = (w.re * 1e8).round();
            let mut im = (w.im * 1e8).round();
            if re == 0.0 {
                re = 0.0;
            }
            if im == 0.0 {
                im = 0.0;
            }
            key.push(re as i64);
            key.push(im as i64);
        }
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap()
}

fn bfs_closure(generators: &[CMatrix], expected: usize) -> Result<Vec<CMatrix>, ChannelError> {
    use std::collections::BTreeMap;
    let d = generators[0].rows;
    // BTreeMap keeps the returned enumeration in canonical-key order, so the
    // element order is identical across processes and platforms
    let mut seen: BTreeMap<Vec<i64>, CMatrix> = BTreeMap::new();
    let id = CMatrix::identity(d);
    let mut frontier = vec![id.clone()];
    seen.insert(phase_canonical_key(&id), id);
    while let Some(u) = frontier.pop() {
        for g in generators {
            let v = g.mul(&u);
            let key = phase_canonical_key(&v);
            if !seen.contains_key(&key) {
                seen.insert(key, v.clone());
                frontier.push(v);
            }
        }
        if seen.len() > expected {
            return Err(ChannelError::Invalid(format!(
                "group closure exceeded expected order {expected}"
            )));
        }
    }
    if seen.len() != expected {
        return Err(ChannelError::Invalid(format!(
            "group closure reached {} elements, expected {expected}",
            seen.len()
        )));
    }
    Ok(seen.into_values().collect())
}

fn hadamard() -> CMatrix {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_real(2, 2, &[a, a, a, -a])
}

fn phase_gate() -> CMatrix {
    CMatrix::diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = Complex64::new(1.0, 0.0);
    }
    m
}

static CLIFFORD_1Q: OnceLock<UnitaryEnsemble> = OnceLock::new();
static CLIFFORD_2Q: OnceLock<UnitaryEnsemble> = OnceLock::new();

/// Single-qubit Clifford group modulo phase: 24 elements from closure over
/// {H, P}.
pub fn clifford_1q() -> &'static UnitaryEnsemble {
    CLIFFORD_1Q.get_or_init(|| {
        let us = bfs_closure(&[hadamard(), phase_gate()], 24).expect("clifford_1q closure");
        UnitaryEnsemble::uniform(us).expect("clifford_1q ensemble")
    })
}

/// Two-qubit Clifford group modulo phase: 11520 elements from closure over
/// {H⊗1, 1⊗H, P⊗1, 1⊗P, CNOT}.
pub fn clifford_2q() -> &'static UnitaryEnsemble {
    CLIFFORD_2Q.get_or_init(|| {
        let i2 = CMatrix::identity(2);
        let gens = vec![
            tensor(&hadamard(), &i2),
            tensor(&i2, &hadamard()),
            tensor(&phase_gate(), &i2),
            tensor(&i2, &phase_gate()),
            cnot(),
        ];
        let us = bfs_closure(&gens, 11520).expect("clifford_2q closure");
        UnitaryEnsemble::uniform(us).expect("clifford_2q ensemble")
    })
}

/// Defect of an ensemble as a t-design (t ∈ {1,2}): the operator norm of the
/// superoperator difference between the ensemble twirl and the closed-form
/// Haar twirl, induced by the Frobenius norm and evaluated exactly on the
/// matrix-unit basis. This is zero iff the ensemble is an exact t-design; it
/// lower-bounds the diamond-norm defect and converts to an upper bound with a
/// factor d^t.
pub fn design_defect(d_ens: &UnitaryEnsemble, t: usize) -> Result<f64, ChannelError> {
    if !(t == 1 || t == 2) {
        return Err(ChannelError::Invalid("t must be 1 or 2".into()));
    }
    let d = d_ens.dim();
    let dt = d.pow(t as u32);
    if dt > 64 {
        return Err(ChannelError::Invalid("d^t must be at most 64".into()));
    }
    // Superoperator difference columns on matrix units E_ij.
    let n2 = dt * dt;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n2);
    for i in 0..dt {
        for j in 0..dt {
            let mut e = CMatrix::zeros(dt, dt);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let tw = t_twirl(d_ens, t, &e)?;
            let haar = if t == 1 {
                CMatrix::identity(d).scale(e.trace() / Complex64::new(d as f64, 0.0))
            } else {
                haar_2_twirl(&e, d)?
            };
            cols.push(tw.sub(&haar).data);
        }
    }
    // Largest singular value of the n2×n2 difference by power iteration on
    // Δ†Δ (deterministic start, enough iterations for a 1e-12-level result).
    let mut v = vec![Complex64::new(0.0, 0.0); n2];
    for (i, slot) in v.iter_mut().enumerate() {
        *slot = Complex64::new(1.0 + (i as f64) * 0.37, 0.19 * (i as f64 + 1.0));
    }
    let matvec = |x: &[Complex64]| -> Vec<Complex64> {
        // y = Δ x (columns stored), then z = Δ† y
        let mut y = vec![Complex64::new(0.0, 0.0); n2];
        for (c, col) in cols.iter().enumerate() {
            let xc = x[c];
            if xc.norm_sqr() == 0.0 {
                continue;
            }
            for (r, &val) in col.iter().enumerate() {
                y[r] += val * xc;
            }
        }
        let mut z = vec![Complex64::new(0.0, 0.0); n2];
        for (c, col) in cols.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, &val) in col.iter().enumerate() {
                acc += val.conj() * y[r];
            }
            z[c] = acc;
        }
        z
    };
    let mut lam = 0.0f64;
    for _ in 0..300 {
        let w = matvec(&v);
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-30 {
            return Ok(0.0);
        }
        lam = norm;
        v = w.iter().map(|z| z / norm).collect();
    }
    Ok(lam.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, max_mixed, MultiState};
    use crate::tensorlab::{random_density, random_unitary, sym_antisym_projectors};

    #[test]
    fn identity_and_compose() {
        let rho = MultiState::simple(random_density(3, 3, 1)).unwrap();
        let id = Channel::identity(3);
        let out = apply(&id, &rho).unwrap();
        assert!(out.matrix.sub(&rho.matrix).frobenius_norm() < 1e-12);

        let u = random_unitary(3, 2);
        let cu = Channel::from_unitary(&u).unwrap();
        let cud = Channel::from_unitary(&u.dagger()).unwrap();
        let comp = compose(&cud, &cu).unwrap();
        let out2 = apply(&comp, &rho).unwrap();
        assert!(out2.matrix.sub(&rho.matrix).frobenius_norm() < 1e-10);
    }

    #[test]
    fn depolarizer_tensor_on_entangled() {
        let dep = Channel::depolarizing(2);
        let both = tensor_ch(&dep, &dep);
        let phi = max_entangled(2).density();
        let out = both.apply_matrix(&phi.matrix);
        let tau4 = CMatrix::identity(4).scale_re(0.25);
        assert!(out.sub(&tau4).frobenius_norm() < 1e-10);
    }

    #[test]
    fn cj_examples_and_roundtrip() {
        let id = Channel::identity(2);
        let eta = cj_state(&id);
        let phi = max_entangled(2).density();
        assert!(eta.matrix.sub(&phi.matrix).frobenius_norm() < 1e-12);

        let dep = Channel::depolarizing(2);
        let eta_dep = cj_state(&dep);
        assert!(
            eta_dep
                .matrix
                .sub(&CMatrix::identity(4).scale_re(0.25))
                .frobenius_norm()
                < 1e-10
        );

        for seed in 0..10u64 {
            let eta_rand = cj_state(&random_channel(2, 3, seed));
            let back = channel_from_cj(&eta_rand.matrix, 2, 2).unwrap();
            let eta_back = cj_state(&back);
            assert!(eta_back.matrix.sub(&eta_rand.matrix).frobenius_norm() < 1e-8);
        }
    }

    /// Random channel by truncating a Haar unitary on in ⊗ env.
    fn random_channel(d: usize, n_kraus: usize, seed: u64) -> Channel {
        let u = random_unitary(d * n_kraus, 1000 + seed);
        // isometry V: |in⟩ → first d·n_kraus components; Kraus K_e[(i,j)] = U[(i*n+e, j)]
        let kraus: Vec<CMatrix> = (0..n_kraus)
            .map(|e| CMatrix::from_fn(d, d, |i, j| u[(i * n_kraus + e, j)]))
            .collect();
        Channel::new(kraus, Shape::new(vec![d]), Shape::new(vec![d])).unwrap()
    }

    #[test]
    fn stinespring_examples() {
        let id = Channel::identity(2);
        let v = stinespring(&id);
        assert_eq!(v.rows, 2);
        assert!(v.sub(&CMatrix::identity(2)).frobenius_norm() < 1e-12);

        // qubit dephasing
        let k0 = CMatrix::diag_real(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]);
        let k1 = CMatrix::diag_real(&[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2]);
        let deph = Channel::new(vec![k0, k1], Shape::new(vec![2]), Shape::new(vec![2])).unwrap();
        let v = stinespring(&deph);
        assert!(v.dagger().mul(&v).sub(&CMatrix::identity(2)).max_abs_entry() < 1e-10);
        let rho = random_density(2, 2, 5);
        let big = v.mul(&rho).mul(&v.dagger());
        let traced = partial_trace(&big, &Shape::new(vec![2, 2]), &[0]).unwrap();
        assert!(traced.sub(&deph.apply_matrix(&rho)).frobenius_norm() < 1e-10);

        let ch3 = random_channel(3, 3, 7);
        let v3 = stinespring(&ch3);
        assert!(v3.dagger().mul(&v3).sub(&CMatrix::identity(3)).max_abs_entry() < 1e-9);
    }

    #[test]
    fn haar_2_twirl_examples() {
        // φ⁺ projector → Π⁺/3 for d=2
        let phi = max_entangled(2).density();
        let tw = haar_2_twirl(&phi.matrix, 2).unwrap();
        let (pp, _) = sym_antisym_projectors(2);
        assert!(tw.sub(&pp.scale_re(1.0 / 3.0)).frobenius_norm() < 1e-12);

        // identity fixed
        let tw_id = haar_2_twirl(&CMatrix::identity(9), 3).unwrap();
        assert!(tw_id.sub(&CMatrix::identity(9)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn pauli_one_design() {
        let p = pauli_group(1).unwrap();
        let x = random_density(2, 2, 9);
        let tw = t_twirl(&p, 1, &x).unwrap();
        assert!(tw.sub(&max_mixed(2).matrix).frobenius_norm() < 1e-12);
    }

    #[test]
    fn clifford_1q_is_2_design() {
        let c = clifford_1q();
        assert_eq!(c.unitaries.len(), 24);
        assert!(design_defect(c, 1).unwrap() < 1e-10);
        assert!(design_defect(c, 2).unwrap() < 1e-10);
    }

    #[test]
    fn singleton_not_a_design() {
        let e = UnitaryEnsemble::uniform(vec![CMatrix::identity(2)]).unwrap();
        assert!(design_defect(&e, 1).unwrap() > 0.1);
    }

    #[test]
    fn u_ubar_fixes_max_entangled() {
        let phi = max_entangled(2).density();
        let c = clifford_1q();
        let tw = u_ubar_twirl(c, &phi.matrix).unwrap();
        assert!(tw.sub(&phi.matrix).frobenius_norm() < 1e-10);
    }

    #[test]
    fn channel_twirl_gives_depolarizing_family() {
        let ch = random_channel(2, 2, 11);
        let tw = channel_twirl(clifford_1q(), &ch).unwrap();
        let eta = cj_state(&tw);
        // fit η = α φ⁺ + (1−α) τ₄
        let phi = max_entangled(2).density().matrix;
        let tau = CMatrix::identity(4).scale_re(0.25);
        let alpha = (eta.matrix.frobenius_inner(&phi).re - 0.25) / 0.75;
        let fit = phi.scale_re(alpha).add(&tau.scale_re(1.0 - alpha));
        assert!(eta.matrix.sub(&fit).frobenius_norm() < 1e-9);

        // singleton twirl is the identity on channels
        let single = UnitaryEnsemble::uniform(vec![CMatrix::identity(2)]).unwrap();
        let same = channel_twirl(&single, &ch).unwrap();
        assert!(
            cj_state(&same)
                .matrix
                .sub(&cj_state(&ch).matrix)
                .frobenius_norm()
                < 1e-9
        );
    }

    #[test]
    #[ignore = "expensive group enumeration; run explicitly or via acceptance"]
    fn clifford_2q_order() {
        assert_eq!(clifford_2q().unitaries.len(), 11520);
    }
}
