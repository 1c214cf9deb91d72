//! Dense complex linear algebra kernel.
//!
//! Everything downstream (spectra, flows, winding counts) sits on the
//! operations here: eigenvalues sorted by real part, ordered invariant
//! subspaces via unitary triangularization plus reordering, log-scaled
//! determinants, and orthonormal frames.

mod expm;
mod qr;
mod schur;

pub use expm::expm;
pub use qr::{qr_plain, qr_rank};
pub use schur::{eigvec_from_schur, reorder_schur, schur, Schur};

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major entries, rejecting NaN/Inf.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Real entries convenience constructor.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn columns(&self, lo: usize, hi: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows, hi - lo);
        for i in 0..self.rows {
            for j in lo..hi {
                out[(i, j - lo)] = self[(i, j)];
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "hstack: {} rows vs {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for k in 0..self.cols {
                acc += self[(i, k)] * v[k];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(
        &self,
        other: &ComplexMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a matrix ordered by descending real part, ties broken by
/// descending imaginary part, residual ties by triangularization order.
/// Multiple eigenvalues are repeated according to multiplicity.
#[derive(Debug, Clone)]
pub struct SortedSpectrum {
    pub values: Vec<Complex64>,
    /// Grouping of numerically coincident eigenvalues: `cluster_ids[j]` is the
    /// cluster index of `values[j]`; clusters are numbered in sorted order.
    pub cluster_ids: Vec<usize>,
    /// Positions of the sorted values in the triangular factor, so invariant
    /// subspaces can be carved out of the same decomposition.
    pub schur_positions: Vec<usize>,
}

impl SortedSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distance between the `i`-th and `(i+1)`-th sorted values.
    pub fn separation(&self, i: usize) -> f64 {
        (self.values[i] - self.values[i + 1]).norm()
    }
}

/// Sort key shared by every eigenvalue ordering in the crate.
fn sort_eigenvalues(values: &[Complex64], tie_tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .re
            .partial_cmp(&values[a].re)
            .unwrap()
            .then(values[b].im.partial_cmp(&values[a].im).unwrap())
            .then(a.cmp(&b))
    });
    // Repair pass: real parts that agree only to rounding still count as
    // ties, so enforce descending imaginary part within tie_tol bands.
    let n = order.len();
    for _ in 0..n * n {
        let mut swapped = false;
        for i in 0..n.saturating_sub(1) {
            let (a, b) = (values[order[i]], values[order[i + 1]]);
            if (a.re - b.re).abs() <= tie_tol && b.im > a.im + tie_tol {
                order.swap(i, i + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    order
}

fn cluster_ids(values: &[Complex64], cluster_tol: f64) -> Vec<usize> {
    let mut ids = Vec::with_capacity(values.len());
    let mut current = 0usize;
    for (j, &v) in values.iter().enumerate() {
        if j > 0 {
            let anchor = values[ids.iter().position(|&id| id == current).unwrap()];
            if (v - anchor).norm() > cluster_tol {
                current += 1;
            }
        }
        ids.push(current);
    }
    ids
}

/// All eigenvalues of `a`, sorted by the documented key.
pub fn eig_sorted(a: &ComplexMatrix, tol: &Tolerances) -> Result<SortedSpectrum> {
    let dec = schur(a)?;
    sorted_from_schur(a, &dec, tol)
}

/// Sort arbitrary complex values by the crate's eigenvalue key (descending
/// real part, ties by descending imaginary part); returns the permutation.
pub fn sort_complex_desc(values: &[Complex64], tie_tol: f64) -> Vec<usize> {
    sort_eigenvalues(values, tie_tol)
}

fn sorted_from_schur(a: &ComplexMatrix, dec: &Schur, tol: &Tolerances) -> Result<SortedSpectrum> {
    let n = a.rows();
    let scale = 1.0 + a.norm_inf();
    let raw: Vec<Complex64> = (0..n).map(|i| dec.t[(i, i)]).collect();
    let order = sort_eigenvalues(&raw, tol.cluster_rel * scale);
    let values: Vec<Complex64> = order.iter().map(|&i| raw[i]).collect();
    let ids = cluster_ids(&values, tol.cluster_rel * scale);
    Ok(SortedSpectrum { values, cluster_ids: ids, schur_positions: order })
}

/// k-dimensional subspace of C^N held as an orthonormal column frame.
#[derive(Debug, Clone)]
pub struct Subspace {
    frame: ComplexMatrix,
}

impl Subspace {
    /// Orthonormalize the given spanning columns. Errors if the columns are
    /// numerically dependent.
    pub fn from_columns(span: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let k = span.cols();
        if k == 0 || k > span.rows() {
            return Err(Error::ShapeMismatch(format!(
                "subspace dimension {} in ambient dimension {}",
                k,
                span.rows()
            )));
        }
        let (q, rank) = qr_rank(span, tol.rank_rel);
        if rank < k {
            return Err(Error::RankDeficient { expected: k, found: rank });
        }
        Ok(Subspace { frame: q.columns(0, k) })
    }

    /// Wrap a frame that is already orthonormal (checked).
    pub fn from_orthonormal(frame: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let k = frame.cols();
        let gram = frame.adjoint().mul(&frame)?;
        let dev = gram.sub(&ComplexMatrix::identity(k))?.max_abs();
        if dev > tol.frame_orth.max(1e-10) {
            return Err(Error::Precondition(format!(
                "frame is not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Subspace { frame })
    }

    pub fn span_of_basis_vector(ambient: usize, index: usize) -> Self {
        let mut frame = ComplexMatrix::zeros(ambient, 1);
        frame[(index, 0)] = ONE;
        Subspace { frame }
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }
}

/// Invariant subspace of the `count` leading eigenvalues in sorted order,
/// via unitary triangularization followed by eigenvalue reordering.
pub fn ordered_invariant_subspace(
    a: &ComplexMatrix,
    count: usize,
    tol: &Tolerances,
) -> Result<Subspace> {
    ordered_invariant_subspace_mapped(a, count, tol, |z| z)
}

/// Same, but eigenvalues are ranked (and cluster-checked) after mapping them
/// through `key`. Monodromy matrices rank by Floquet exponents this way.
pub fn ordered_invariant_subspace_mapped(
    a: &ComplexMatrix,
    count: usize,
    tol: &Tolerances,
    key: impl Fn(Complex64) -> Complex64,
) -> Result<Subspace> {
    let n = a.require_square()?;
    if count == 0 || count > n {
        return Err(Error::ShapeMismatch(format!(
            "invariant subspace of dimension {count} in dimension {n}"
        )));
    }
    let mut dec = schur(a)?;
    let mapped: Vec<Complex64> = (0..n).map(|i| key(dec.t[(i, i)])).collect();
    let scale = 1.0 + mapped.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let order = sort_eigenvalues(&mapped, tol.cluster_rel * scale);
    if count < n {
        let sep = (mapped[order[count - 1]] - mapped[order[count]]).norm();
        if sep <= tol.cluster_rel * scale {
            return Err(Error::ClusterSplit { index: count, separation: sep });
        }
    }
    reorder_schur(&mut dec, &order[..count]);
    Ok(Subspace { frame: dec.q.columns(0, count) })
}

/// Log-scaled determinant: `det M = exp(log_magnitude) * phase` with
/// `|phase| = 1`; exactly singular matrices report `-inf` magnitude.
pub fn det_logscaled(m: &ComplexMatrix) -> Result<(f64, Complex64)> {
    let n = m.require_square()?;
    let mut lu = m.clone();
    let mut log_mag = 0.0f64;
    let mut phase = ONE;
    for k in 0..n {
        // partial pivoting
        let mut p = k;
        let mut best = lu[(k, k)].norm();
        for i in k + 1..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Ok((f64::NEG_INFINITY, ONE));
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            phase = -phase;
        }
        let piv = lu[(k, k)];
        log_mag += piv.norm().ln();
        phase *= piv / piv.norm();
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            if f == ZERO {
                continue;
            }
            for j in k + 1..n {
                let s = f * lu[(k, j)];
                lu[(i, j)] -= s;
            }
        }
    }
    Ok((log_mag, phase))
}

/// Singular values of `m`, descending, via the Hermitian eigenvalues of
/// `m^H m`. Adequate here: rank decisions go through pivoted QR, and the
/// principal-angle tests only need accuracy near sigma = 1.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let gram = m.adjoint().mul(m)?;
    let dec = schur(&gram)?;
    let mut sv: Vec<f64> = (0..gram.rows()).map(|i| dec.t[(i, i)].re.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

/// Number of principal angles equal to zero between two subspaces: the count
/// of singular values of U^H V equal to 1 within `tol`.
pub fn intersection_dimension(u: &Subspace, v: &Subspace, tol: f64) -> Result<usize> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "ambient dimensions {} vs {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let overlap = u.frame().adjoint().mul(v.frame())?;
    let sv = singular_values(&overlap)?;
    Ok(sv.iter().filter(|&&s| (s - 1.0).abs() <= tol).count())
}

/// Smallest relevant singular value of the horizontal concatenation of two
/// frames: the margin for "the subspaces together span the ambient space".
/// Values below ~sqrt(eps) are indistinguishable from zero because the
/// computation goes through the Gram matrix; use [`spans_ambient`] for the
/// rank decision itself.
pub fn span_margin(u: &Subspace, v: &Subspace) -> Result<f64> {
    let joint = u.frame().hstack(v.frame())?;
    let sv = singular_values(&joint)?;
    let idx = joint.rows().min(joint.cols());
    Ok(sv.get(idx - 1).copied().unwrap_or(0.0))
}

/// Do the two subspaces together span the ambient space? Decided by the
/// pivoted-QR rank of the concatenated frames.
pub fn spans_ambient(u: &Subspace, v: &Subspace, rank_rel: f64) -> Result<bool> {
    let joint = u.frame().hstack(v.frame())?;
    let n = joint.rows();
    // Householder wants rows >= cols; rank is invariant under adjoint.
    let (_, rank) = if joint.cols() > n { qr_rank(&joint.adjoint(), rank_rel) } else { qr_rank(&joint, rank_rel) };
    Ok(rank == n.min(joint.cols()) && rank == n)
}

#[cfg(test)]
pub mod tests;
