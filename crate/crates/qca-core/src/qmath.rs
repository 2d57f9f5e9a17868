//! Numerical kernel: small dense complex matrices, tensor product, partial
//! trace, Bloch-vector conversions, and hand-rolled real 3×3 symmetric
//! eigenvalues / SVD plus an n×n Hermitian eigenvalue solver for the 2×2 and
//! 4×4 matrices this domain produces.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances;

/// Small dense complex matrix, row-major. In practice 2×2 or 4×4.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    /// Build from row-major complex entries.
    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Shape("matrix needs at least one row".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    /// 2×2 convenience constructor from row-major entries.
    pub fn mat2(entries: [Complex64; 4]) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: entries.to_vec(),
        }
    }

    /// 2×2 constructor from real row-major entries.
    pub fn mat2_real(entries: [f64; 4]) -> Self {
        Self::mat2(entries.map(|x| Complex64::new(x, 0.0)))
    }

    /// Column vector |v⟩⟨v| outer product.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("add: dimension mismatch".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise absolute difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Hermiticity defect: `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.hermiticity_defect() <= tol
    }

    /// Unitarity defect: `‖A·A† − 𝟙‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        match self.mul(&self.adjoint()) {
            Ok(p) => p.max_abs_diff(&Self::identity(self.rows)),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_defect() <= tol
    }

    /// Density-matrix check: Hermitian, unit trace, eigenvalues above the PSD
    /// floor.
    pub fn is_density(&self) -> bool {
        if self.rows != self.cols || !self.is_hermitian(tolerances::ALGEBRAIC) {
            return false;
        }
        if (self.trace() - Complex64::ONE).norm() > tolerances::ALGEBRAIC {
            return false;
        }
        match hermitian_eigenvalues(self) {
            Ok(evs) => evs.iter().all(|&e| e >= tolerances::PSD_FLOOR),
            Err(_) => false,
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

/// Pauli σx.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::mat2_real([0.0, 1.0, 1.0, 0.0])
}

/// Pauli σy.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::mat2([
        Complex64::ZERO,
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        Complex64::ZERO,
    ])
}

/// Pauli σz.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::mat2_real([1.0, 0.0, 0.0, -1.0])
}

/// The Pauli triple (σ1, σ2, σ3).
pub fn paulis() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Kronecker product of two 2×2 matrices, system factor first:
/// `out[(2i+k),(2j+l)] = a[i,j]·b[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != 2 || a.cols != 2 || b.rows != 2 || b.cols != 2 {
        return Err(Error::Shape(
            "tensor_product expects two 2x2 matrices".into(),
        ));
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Trace out the second (environment) factor of a 4×4 joint matrix:
/// `out[i,j] = Σ_k r[2i+k, 2j+k]`.
pub fn partial_trace_env(r: &ComplexMatrix) -> Result<ComplexMatrix> {
    if r.rows != 4 || r.cols != 4 {
        return Err(Error::Shape(
            "partial_trace_env expects a 4x4 matrix".into(),
        ));
    }
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                out[(i, j)] += r[(2 * i + k, 2 * j + k)];
            }
        }
    }
    Ok(out)
}

/// Bloch vector: the real 3-vector `r` of `ρ = (𝟙 + r·σ)/2`.
/// Serializes as a plain `[r1, r2, r3]` array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct BlochVector {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl From<BlochVector> for [f64; 3] {
    fn from(r: BlochVector) -> Self {
        r.as_array()
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(a: [f64; 3]) -> Self {
        Self::from_array(a)
    }
}

impl BlochVector {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Self {
        Self { r1, r2, r3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.r1 - other.r1)
            .abs()
            .max((self.r2 - other.r2).abs())
            .max((self.r3 - other.r3).abs())
    }

    /// Physical-state check: inside the unit ball up to tolerance.
    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + tolerances::UNIT_BALL
    }
}

/// `ρ = (𝟙 + r·σ)/2`.
pub fn bloch_to_density(r: &BlochVector) -> ComplexMatrix {
    let half = Complex64::new(0.5, 0.0);
    ComplexMatrix::mat2([
        Complex64::new(1.0 + r.r3, 0.0) * half,
        Complex64::new(r.r1, -r.r2) * half,
        Complex64::new(r.r1, r.r2) * half,
        Complex64::new(1.0 - r.r3, 0.0) * half,
    ])
}

/// Inverse of [`bloch_to_density`]: `rᵢ = Tr(ρ σᵢ)`. Rejects matrices that are
/// not Hermitian unit-trace within tolerance.
pub fn density_to_bloch(rho: &ComplexMatrix) -> Result<BlochVector> {
    if rho.rows != 2 || rho.cols != 2 {
        return Err(Error::Shape("density_to_bloch expects a 2x2 matrix".into()));
    }
    let herm = rho.hermiticity_defect();
    if herm > tolerances::TRACE_PRESERVING {
        return Err(Error::Validation(format!(
            "density_to_bloch: Hermiticity defect {herm:.3e}"
        )));
    }
    let tr = rho.trace();
    if (tr - Complex64::ONE).norm() > tolerances::TRACE_PRESERVING {
        return Err(Error::Validation(format!(
            "density_to_bloch: trace {tr} is not 1"
        )));
    }
    let r1 = (rho[(0, 1)] + rho[(1, 0)]).re;
    let r2 = (rho[(1, 0)] - rho[(0, 1)]).im;
    let r3 = (rho[(0, 0)] - rho[(1, 1)]).re;
    Ok(BlochVector::new(r1, r2, r3))
}

/// Real 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix3(pub [[f64; 3]; 3]);

impl RealMatrix3 {
    pub fn zeros() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diag([1.0, 1.0, 1.0])
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.0[0][0], self.0[1][1], self.0[2][2]]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zeros())
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    /// Orthogonality defect: `‖AᵀA − 𝟙‖_max`.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().mul(self).max_abs_diff(&Self::identity())
    }

    /// Gram matrix `MᵀM` (symmetric PSD).
    pub fn gram(&self) -> Self {
        self.transpose().mul(self)
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, by the trigonometric
/// (Cardano) closed form. The `acos` argument is clamped into `[−1, 1]` so
/// near-degenerate inputs stay in range. Closely spaced pairs are
/// ill-conditioned for any characteristic-polynomial method (root error grows
/// like √eps as a gap closes), so when the spectrum has a small relative gap
/// the values are refined by Jacobi rotations, which stay eps-accurate there.
pub fn symmetric_eigen3(m: &RealMatrix3) -> Result<[f64; 3]> {
    let defect = m.symmetry_defect();
    if defect > tolerances::ALGEBRAIC {
        return Err(Error::Validation(format!(
            "symmetric_eigen3: symmetry defect {defect:.3e} exceeds {:.0e}",
            tolerances::ALGEBRAIC
        )));
    }
    let q = m.trace() / 3.0;
    let mut b = *m;
    for i in 0..3 {
        b.0[i][i] -= q;
    }
    // tr(B²)/6 for symmetric B.
    let p2 = (b.0[0][0] * b.0[0][0]
        + b.0[1][1] * b.0[1][1]
        + b.0[2][2] * b.0[2][2]
        + 2.0 * (b.0[0][1] * b.0[0][1] + b.0[0][2] * b.0[0][2] + b.0[1][2] * b.0[1][2]))
        / 6.0;
    if p2 <= 0.0 {
        return Ok([q, q, q]);
    }
    let p = p2.sqrt();
    let r = (b.det() / (2.0 * p2 * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3 * 2.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    let mut evs = [e1, e2, e3];
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let scale = evs[0].abs().max(evs[2].abs()).max(1e-300);
    let min_gap = (evs[0] - evs[1]).min(evs[1] - evs[2]);
    if min_gap < 1e-3 * scale {
        let (vals, _) = jacobi_sym3(m);
        evs = vals;
        evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    }
    Ok(evs)
}

/// Jacobi eigen-decomposition of a symmetric 3×3 matrix: returns unsorted
/// eigenvalues and the orthogonal matrix whose columns are the matching
/// eigenvectors. Robust under the degenerate spectra this domain produces.
fn jacobi_sym3(m: &RealMatrix3) -> ([f64; 3], RealMatrix3) {
    let mut a = *m;
    let mut v = RealMatrix3::identity();
    let scale = a.max_abs().max(1e-300);
    for _sweep in 0..64 {
        let off = a.0[0][1] * a.0[0][1] + a.0[0][2] * a.0[0][2] + a.0[1][2] * a.0[1][2];
        if off <= (1e-16 * scale) * (1e-16 * scale) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a.0[p][q];
            if apq.abs() <= 1e-300 {
                continue;
            }
            let theta = (a.0[q][q] - a.0[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // Rotate rows/columns p and q of `a`.
            for k in 0..3 {
                let akp = a.0[k][p];
                let akq = a.0[k][q];
                a.0[k][p] = c * akp - s * akq;
                a.0[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a.0[p][k];
                let aqk = a.0[q][k];
                a.0[p][k] = c * apk - s * aqk;
                a.0[q][k] = s * apk + c * aqk;
            }
            // Accumulate the rotation into the eigenvector columns.
            for k in 0..3 {
                let vkp = v.0[k][p];
                let vkq = v.0[k][q];
                v.0[k][p] = c * vkp - s * vkq;
                v.0[k][q] = s * vkp + c * vkq;
            }
        }
    }
    (a.diagonal(), v)
}

/// Result of [`svd3`]: `m = u · diag(d) · v` with `u`, `v` orthogonal and the
/// singular values `d` nonnegative, descending. Note the convention: the
/// right factor `v` is NOT transposed in the reconstruction.
#[derive(Clone, Copy, Debug)]
pub struct Svd3 {
    pub u: RealMatrix3,
    pub d: [f64; 3],
    pub v: RealMatrix3,
}

impl Svd3 {
    pub fn reconstruct(&self) -> RealMatrix3 {
        self.u.mul(&RealMatrix3::diag(self.d)).mul(&self.v)
    }
}

/// Singular value decomposition of a real 3×3 matrix via the Jacobi
/// eigen-decomposition of `MᵀM`, with rank-deficient directions completed by
/// cross products. Always defined.
pub fn svd3(m: &RealMatrix3) -> Svd3 {
    let (_evals, w) = jacobi_sym3(&m.gram());
    // Candidate left directions and their strengths. Using ‖M·wᵢ‖ directly
    // (rather than √λᵢ) keeps the reconstruction Σ dᵢ uᵢ wᵢᵀ = M·Σ wᵢwᵢᵀ exact
    // to machine precision even for ill-conditioned inputs.
    let mut cols: Vec<([f64; 3], f64)> = (0..3)
        .map(|i| {
            let wi = [w.0[0][i], w.0[1][i], w.0[2][i]];
            let mw = m.mul_vec(wi);
            let n = (mw[0] * mw[0] + mw[1] * mw[1] + mw[2] * mw[2]).sqrt();
            (wi, n)
        })
        .collect();
    cols.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let d_max = cols[0].1;

    let mut d = [0.0; 3];
    let mut u_cols: [Option<[f64; 3]>; 3] = [None, None, None];
    let mut accepted: Vec<[f64; 3]> = Vec::new();
    for (i, (wi, n)) in cols.iter().enumerate() {
        d[i] = *n;
        if d_max <= 0.0 {
            break;
        }
        // Orthogonalize M·wᵢ against the columns already accepted; a tiny
        // remainder means this direction is numerically rank-deficient.
        let mut u = m.mul_vec(*wi);
        for a in &accepted {
            let dot = u[0] * a[0] + u[1] * a[1] + u[2] * a[2];
            for k in 0..3 {
                u[k] -= dot * a[k];
            }
        }
        let rem = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if *n > 1e-12 * d_max && rem > 1e-12 * d_max {
            let ui = [u[0] / rem, u[1] / rem, u[2] / rem];
            u_cols[i] = Some(ui);
            accepted.push(ui);
        }
    }
    // Complete missing columns to an orthonormal basis.
    for i in 0..3 {
        if u_cols[i].is_some() {
            continue;
        }
        let ui = orthonormal_completion(&accepted);
        u_cols[i] = Some(ui);
        accepted.push(ui);
    }
    let mut u = RealMatrix3::zeros();
    for (i, c) in u_cols.iter().enumerate() {
        let c = c.unwrap();
        for k in 0..3 {
            u.0[k][i] = c[k];
        }
    }
    // Right factor in the non-transposed convention: rows are the wᵢ.
    let mut v = RealMatrix3::zeros();
    for (i, (wi, _)) in cols.iter().enumerate() {
        v.0[i] = *wi;
    }
    Svd3 { u, d, v }
}

/// One unit vector orthogonal to every vector in `existing` (at most two).
fn orthonormal_completion(existing: &[[f64; 3]]) -> [f64; 3] {
    match existing.len() {
        0 => [1.0, 0.0, 0.0],
        1 => {
            let a = existing[0];
            // Cross with the axis least aligned with `a`.
            let axis = if a[0].abs() <= a[1].abs() && a[0].abs() <= a[2].abs() {
                [1.0, 0.0, 0.0]
            } else if a[1].abs() <= a[2].abs() {
                [0.0, 1.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            };
            normalize(cross(a, axis))
        }
        _ => normalize(cross(existing[0], existing[1])),
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Eigenvalues of a Hermitian matrix (any small n), ascending, via cyclic
/// complex Jacobi rotations. The input is symmetrized first; a Hermiticity
/// defect beyond reconstruction tolerance is rejected.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows != m.cols {
        return Err(Error::Shape(
            "hermitian_eigenvalues expects a square matrix".into(),
        ));
    }
    let defect = m.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::Validation(format!(
            "hermitian_eigenvalues: Hermiticity defect {defect:.3e}"
        )));
    }
    let n = m.rows;
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * Complex64::new(0.5, 0.0);
        }
    }
    let scale = a.max_abs().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off <= (1e-16 * scale) * (1e-16 * scale) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase that makes the pivot real, then a real rotation.
                let phase = apq / Complex64::new(r, 0.0);
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← J† A J with the plane rotation J[(p,p)] = c,
                // J[(p,q)] = s·phase, J[(q,p)] = −s·conj(phase), J[(q,q)] = c,
                // which zeroes the pivot for this choice of t.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * phase.conj();
                    a[(k, q)] = akp * s * phase + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * phase;
                    a[(q, k)] = apk * s * phase.conj() + aqk * c;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(evs)
}
