//! Dense complex linear algebra and multipartite index bookkeeping.
//!
//! Everything downstream works with [`CMatrix`] (row-major dense complex
//! matrix) and [`Shape`] (ordered subsystem dimensions). Matrices are small
//! (total dimension ≤ 4096, eigenproblems ≤ 64), so a cyclic Jacobi
//! eigensolver and explicit Kronecker products are all we need.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Construction tolerance: identities that should hold exactly up to rounding.
pub const TOL_CONSTRUCT: f64 = 1e-12;
/// Verification tolerance: derived identities checked after computation.
pub const TOL_VERIFY: f64 = 1e-10;
/// Eigenvalue cutoff below which a PSD matrix is treated as singular.
pub const PSD_CUTOFF: f64 = 1e-12;
/// Eigenvalues in (−1e-10, PSD_CUTOFF) are clamped to zero.
pub const PSD_NEG_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("shape dims product {product} does not match matrix side {side}")]
    ShapeMismatch { product: usize, side: usize },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CMatrixWire {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CMatrixWire {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = CMatrixWire::deserialize(d)?;
        if w.re.len() != w.rows * w.cols || w.im.len() != w.rows * w.cols {
            return Err(serde::de::Error::custom("entry count mismatch"));
        }
        Ok(CMatrix {
            rows: w.rows,
            cols: w.cols,
            data: w
                .re
                .iter()
                .zip(w.im.iter())
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        })
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        CMatrix::diag(
            &entries
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Column vector from amplitudes.
    pub fn col_vec(amps: &[Complex64]) -> Self {
        CMatrix {
            rows: amps.len(),
            cols: 1,
            data: amps.to_vec(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dagger(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(Complex64::new(a, 0.0))
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.dagger()
            .mul(self)
            .sub(&CMatrix::identity(self.rows))
            .max_abs_entry()
    }

    /// tr(A†B), the Frobenius inner product.
    pub fn frobenius_inner(&self, other: &CMatrix) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Ordered subsystem dimensions for a multipartite operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(dims.iter().all(|&d| d >= 1), "subsystem dims must be >= 1");
        Shape {
            dims,
            labels: Vec::new(),
        }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn check_against(&self, m: &CMatrix) -> Result<(), LinalgError> {
        let p = self.total_dim();
        if m.rows != p || m.cols != p {
            return Err(LinalgError::ShapeMismatch {
                product: p,
                side: m.rows,
            });
        }
        Ok(())
    }

    /// Decompose a flat index into per-subsystem indices.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (pos, &d) in self.dims.iter().enumerate().rev() {
            out[pos] = idx % d;
            idx /= d;
        }
        out
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (pos, &d) in self.dims.iter().enumerate() {
            idx = idx * d + multi[pos];
        }
        idx
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in ascending order and a unitary whose columns are the
/// matching eigenvectors. Convergence: off-diagonal Frobenius norm below
/// 1e-13 relative to the matrix norm, at most 100 sweeps.
pub fn herm_eig(h: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let res = h.hermiticity_residual();
    if res > 1e-10 {
        return Err(LinalgError::NotHermitian { residual: res });
    }
    let n = h.rows;
    // Symmetrize to kill rounding-level asymmetry before iterating.
    let mut a = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let threshold = 1e-13 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = a[(p, q)];
                let gnorm = gamma.norm();
                if gnorm <= threshold / (n as f64) {
                    continue;
                }
                let phase = gamma / gnorm; // e^{iφ}
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                // Real Jacobi angle for the phase-stripped 2x2 block.
                let theta = (beta - alpha) / (2.0 * gnorm);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = P·R with P = diag(1, e^{-iφ}); columns (p,q) update.
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                // A ← G† A G: right-multiply columns, left-multiply rows.
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * g_pp + arq * g_qp;
                    a[(r, q)] = arp * g_pq + arq * g_qq;
                }
                for cidx in 0..n {
                    let apc = a[(p, cidx)];
                    let aqc = a[(q, cidx)];
                    a[(p, cidx)] = g_pp.conj() * apc + g_qp.conj() * aqc;
                    a[(q, cidx)] = g_pq.conj() * apc + g_qq.conj() * aqc;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * g_pp + vrq * g_qp;
                    v[(r, q)] = vrp * g_pq + vrq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((eigenvalues, vectors))
}

/// Scalar function applied eigenvalue-wise to a PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatFunc {
    Sqrt,
    Log2,
    Pow(f64),
    PinvSqrt,
}

/// Apply a scalar function to a PSD matrix through its eigendecomposition.
///
/// Eigenvalues below the PSD cutoff are treated as exact zeros: `Log2` and
/// `PinvSqrt` act only on the support (kernel maps to zero).
pub fn mat_func(p: &CMatrix, f: MatFunc) -> Result<CMatrix, LinalgError> {
    let (eigs, v) = herm_eig(p)?;
    if let Some(&min) = eigs.first() {
        if min < -PSD_NEG_TOL {
            return Err(LinalgError::NotPsd { eigenvalue: min });
        }
    }
    let mapped: Vec<f64> = eigs
        .iter()
        .map(|&lam| {
            let lam = if lam < PSD_CUTOFF { 0.0 } else { lam };
            match f {
                MatFunc::Sqrt => lam.sqrt(),
                MatFunc::Log2 => {
                    if lam == 0.0 {
                        0.0
                    } else {
                        lam.log2()
                    }
                }
                MatFunc::Pow(s) => {
                    if lam == 0.0 {
                        if s == 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        lam.powf(s)
                    }
                }
                MatFunc::PinvSqrt => {
                    if lam == 0.0 {
                        0.0
                    } else {
                        1.0 / lam.sqrt()
                    }
                }
            }
        })
        .collect();
    let d = CMatrix::diag_real(&mapped);
    Ok(v.mul(&d).mul(&v.dagger()))
}

/// Kronecker product A ⊗ B.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let x = a[(ia, ja)];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

pub fn tensor_all(ms: &[&CMatrix]) -> CMatrix {
    let mut it = ms.iter();
    let first = it.next().expect("tensor_all of empty list");
    it.fold((*first).clone(), |acc, m| tensor(&acc, m))
}

/// Partial trace keeping the subsystems listed in `keep` (in their original
/// order).
pub fn partial_trace(m: &CMatrix, s: &Shape, keep: &[usize]) -> Result<CMatrix, LinalgError> {
    s.check_against(m)?;
    let n = s.n_subsystems();
    for &k in keep {
        if k >= n {
            return Err(LinalgError::SubsystemOutOfRange { index: k, count: n });
        }
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(LinalgError::Invalid("duplicate subsystem in keep".into()));
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dim: usize = keep_sorted.iter().map(|&i| s.dims[i]).product();
    let trace_dim: usize = traced.iter().map(|&i| s.dims[i]).product();
    let keep_shape = Shape::new(keep_sorted.iter().map(|&i| s.dims[i]).collect());
    let trace_shape = Shape::new(traced.iter().map(|&i| s.dims[i]).collect());

    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for ik in 0..keep_dim {
        let ik_multi = keep_shape.unflatten(ik);
        for jk in 0..keep_dim {
            let jk_multi = keep_shape.unflatten(jk);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..trace_dim {
                let t_multi = trace_shape.unflatten(t);
                let mut row = vec![0; n];
                let mut col = vec![0; n];
                for (pos, &sys) in keep_sorted.iter().enumerate() {
                    row[sys] = ik_multi[pos];
                    col[sys] = jk_multi[pos];
                }
                for (pos, &sys) in traced.iter().enumerate() {
                    row[sys] = t_multi[pos];
                    col[sys] = t_multi[pos];
                }
                acc += m[(s.flatten(&row), s.flatten(&col))];
            }
            out[(ik, jk)] = acc;
        }
    }
    Ok(out)
}

/// Conjugate by the permutation unitary that reorders subsystems so that the
/// new subsystem `i` is the old subsystem `perm[i]`.
pub fn permute_systems(m: &CMatrix, s: &Shape, perm: &[usize]) -> Result<CMatrix, LinalgError> {
    s.check_against(m)?;
    let n = s.n_subsystems();
    if perm.len() != n {
        return Err(LinalgError::Invalid("permutation length mismatch".into()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(LinalgError::SubsystemOutOfRange { index: p, count: n });
        }
        if seen[p] {
            return Err(LinalgError::Invalid("permutation repeats an index".into()));
        }
        seen[p] = true;
    }
    let new_shape = Shape::new(perm.iter().map(|&p| s.dims[p]).collect());
    let d = s.total_dim();
    let map = |new_idx: usize| -> usize {
        let multi_new = new_shape.unflatten(new_idx);
        let mut multi_old = vec![0; n];
        for (pos, &p) in perm.iter().enumerate() {
            multi_old[p] = multi_new[pos];
        }
        s.flatten(&multi_old)
    };
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        let oi = map(i);
        for j in 0..d {
            out[(i, j)] = m[(oi, map(j))];
        }
    }
    Ok(out)
}

/// Permute the subsystems of a column vector.
pub fn permute_vec(v: &[Complex64], s: &Shape, perm: &[usize]) -> Vec<Complex64> {
    let n = s.n_subsystems();
    let new_shape = Shape::new(perm.iter().map(|&p| s.dims[p]).collect());
    let d = s.total_dim();
    assert_eq!(v.len(), d);
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (new_idx, slot) in out.iter_mut().enumerate() {
        let multi_new = new_shape.unflatten(new_idx);
        let mut multi_old = vec![0; n];
        for (pos, &p) in perm.iter().enumerate() {
            multi_old[p] = multi_new[pos];
        }
        *slot = v[s.flatten(&multi_old)];
    }
    out
}

/// The swap operator F on C^d ⊗ C^d.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// Projectors onto the symmetric and antisymmetric subspaces, (1 ± F)/2.
pub fn sym_antisym_projectors(d: usize) -> (CMatrix, CMatrix) {
    let f = swap_operator(d);
    let id = CMatrix::identity(d * d);
    (id.add(&f).scale_re(0.5), id.sub(&f).scale_re(0.5))
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box–Muller; fine at these sample counts.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(standard_normal(rng), standard_normal(rng))
    })
}

/// Haar-random unitary: Ginibre matrix, Gram–Schmidt, then fix column phases
/// so the implicit triangular factor has a positive real diagonal.
pub fn random_unitary_rng(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<Complex64>> = (0..d)
        .map(|j| (0..d).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        // r_jj before normalization: ⟨e_j-residual, original⟩ is the norm.
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
        // Phase fix: rotate so that the diagonal of R, r_jj = q_j† g_j, is
        // positive real. After orthonormalization r_jj = ⟨q_j, g_j⟩.
        let r_jj: Complex64 = (0..d).map(|i| cols[j][i].conj() * g[(i, j)]).sum();
        let phase = r_jj / r_jj.norm();
        for z in cols[j].iter_mut() {
            *z *= phase;
        }
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

pub fn random_unitary(d: usize, seed: u64) -> CMatrix {
    random_unitary_rng(d, &mut ChaCha12Rng::seed_from_u64(seed))
}

/// Random density matrix GG†/tr with G a d×rank Ginibre matrix.
pub fn random_density_rng(d: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rank >= 1 && rank <= d, "rank must be in 1..=d");
    let g = ginibre(d, rank, rng);
    let gg = g.mul(&g.dagger());
    let t = gg.trace().re;
    gg.scale_re(1.0 / t)
}

pub fn random_density(d: usize, rank: usize, seed: u64) -> CMatrix {
    random_density_rng(d, rank, &mut ChaCha12Rng::seed_from_u64(seed))
}

/// Haar-random pure state vector on the given shape.
pub fn random_pure_rng(shape: &Shape, rng: &mut impl Rng) -> Vec<Complex64> {
    let d = shape.total_dim();
    let g = ginibre(d, 1, rng);
    let norm: f64 = g.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    g.data.iter().map(|z| z / norm).collect()
}

pub fn random_pure(shape: &Shape, seed: u64) -> Vec<Complex64> {
    random_pure_rng(shape, &mut ChaCha12Rng::seed_from_u64(seed))
}

/// Outer product |v⟩⟨w|.
pub fn outer(v: &[Complex64], w: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
}
