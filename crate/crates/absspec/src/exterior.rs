//! Exterior-power machinery: additive compound matrices, the Pluecker
//! embedding of subspaces, and the projection chart onto the invariant
//! sphere spanned by the two leading compound eigendirections.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_sorted, reorder_schur, schur, ComplexMatrix, Subspace, ONE, ZERO,
};

/// All k-element subsets of {0..n-1} in lexicographic order: the canonical
/// coordinate order for the k-th exterior power.
#[derive(Debug, Clone)]
pub struct IndexBasis {
    pub n: usize,
    pub k: usize,
    pub subsets: Vec<Vec<usize>>,
}

impl IndexBasis {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::ShapeMismatch(format!("exterior power k={k} of dimension {n}")));
        }
        let mut subsets = Vec::new();
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            subsets.push(cur.clone());
            // next lexicographic k-subset
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(IndexBasis { n, k, subsets });
                }
                i -= 1;
                if cur[i] != i + n - k {
                    break;
                }
            }
            cur[i] += 1;
            for j in i + 1..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.subsets.len()
    }

    pub fn position(&self, subset: &[usize]) -> Option<usize> {
        self.subsets.iter().position(|s| s == subset)
    }
}

/// Binomial coefficient, for sizing checks.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// The m x m additive compound of A: the generator of the induced flow on
/// the k-th exterior power. Entry (I, J) is the diagonal trace sum when
/// I = J, a signed single entry of A when I and J differ in one element,
/// zero otherwise.
pub fn compound_matrix(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    let basis = IndexBasis::new(n, k)?;
    let m = basis.m();
    let mut out = ComplexMatrix::zeros(m, m);
    for (ri, seti) in basis.subsets.iter().enumerate() {
        for (cj, setj) in basis.subsets.iter().enumerate() {
            if ri == cj {
                let mut acc = ZERO;
                for &i in seti {
                    acc += a[(i, i)];
                }
                out[(ri, cj)] = acc;
                continue;
            }
            // they must differ by exactly one element
            let extra_i: Vec<usize> = seti.iter().copied().filter(|x| !setj.contains(x)).collect();
            let extra_j: Vec<usize> = setj.iter().copied().filter(|x| !seti_contains(seti, *x)).collect();
            if extra_i.len() != 1 {
                continue;
            }
            let i = extra_i[0];
            let j = extra_j[0];
            let p = seti.iter().position(|&x| x == i).unwrap();
            let q = setj.iter().position(|&x| x == j).unwrap();
            let sign = if (p + q) % 2 == 0 { ONE } else { -ONE };
            out[(ri, cj)] = sign * a[(i, j)];
        }
    }
    Ok(out)
}

fn seti_contains(set: &[usize], x: usize) -> bool {
    set.contains(&x)
}

/// Projective point in CP^{m-1}, normalized so the largest-modulus
/// coordinate is exactly 1 (zero phase).
#[derive(Debug, Clone)]
pub struct PlueckerPoint {
    coords: Vec<Complex64>,
}

impl PlueckerPoint {
    /// Normalize raw homogeneous coordinates.
    pub fn new(raw: Vec<Complex64>) -> Result<Self> {
        let (idx, max) = raw
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        if max == 0.0 {
            return Err(Error::Precondition("projective point has all-zero coordinates".into()));
        }
        let pivot = raw[idx];
        let coords = raw.iter().map(|&z| z / pivot).collect();
        Ok(PlueckerPoint { coords })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn chordal_distance(&self, other: &PlueckerPoint) -> f64 {
        chordal(&self.coords, &other.coords)
    }
}

/// Fubini-Study chordal distance between homogeneous coordinate vectors.
pub fn chordal(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let mut dot = ZERO;
    for (x, y) in a.iter().zip(b) {
        dot += x.conj() * y;
    }
    let cos2 = (dot.norm_sqr() / (na * nb)).min(1.0);
    (1.0 - cos2).max(0.0).sqrt()
}

fn small_det(m: &mut Vec<Vec<Complex64>>) -> Complex64 {
    let k = m.len();
    let mut det = ONE;
    for col in 0..k {
        let mut piv = col;
        let mut best = m[col][col].norm();
        for r in col + 1..k {
            if m[r][col].norm() > best {
                best = m[r][col].norm();
                piv = r;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for r in col + 1..k {
            let f = m[r][col] / p;
            for c in col..k {
                let s = f * m[col][c];
                m[r][c] -= s;
            }
        }
    }
    det
}

/// Raw wedge coordinates of a frame: the k x k minors over row subsets in
/// lexicographic order.
pub fn wedge_minors(frame: &ComplexMatrix, basis: &IndexBasis) -> Vec<Complex64> {
    let k = basis.k;
    basis
        .subsets
        .iter()
        .map(|set| {
            let mut sub: Vec<Vec<Complex64>> =
                set.iter().map(|&i| (0..k).map(|j| frame[(i, j)]).collect()).collect();
            small_det(&mut sub)
        })
        .collect()
}

/// Pluecker embedding of a k-dimensional subspace: the projective point of
/// its k x k frame minors. Equal subspaces map to equal points.
pub fn pluecker(u: &Subspace, basis: &IndexBasis) -> Result<PlueckerPoint> {
    if u.ambient_dim() != basis.n || u.dim() != basis.k {
        return Err(Error::ShapeMismatch(format!(
            "subspace {}-in-{} vs index basis {}-in-{}",
            u.dim(),
            u.ambient_dim(),
            basis.k,
            basis.n
        )));
    }
    PlueckerPoint::new(wedge_minors(u.frame(), basis))
}

/// Signed dual pairing of a k-vector with the (N-k)-wedge of a frame:
/// the Laplace expansion of det[G | U] over the first k columns. Vanishes
/// exactly when the subspaces intersect nontrivially.
pub fn complement_pairing(
    coords: &[Complex64],
    u: &Subspace,
    basis: &IndexBasis,
) -> Result<Complex64> {
    let n = basis.n;
    let kc = n - basis.k;
    if u.dim() != kc || u.ambient_dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "complement pairing needs a {kc}-dimensional subspace of C^{n}"
        )));
    }
    let cobasis = IndexBasis::new(n, kc)?;
    let cominors = wedge_minors(u.frame(), &cobasis);
    let mut acc = ZERO;
    for (pos, set) in basis.subsets.iter().enumerate() {
        let comp: Vec<usize> = (0..n).filter(|i| !set.contains(i)).collect();
        let copos = cobasis.position(&comp).unwrap();
        // parity of sum of (0-based) indices relative to the leading block
        let sum: usize = set.iter().sum();
        let base: usize = (0..basis.k).sum();
        let sign = if (sum - base) % 2 == 0 { ONE } else { -ONE };
        acc += sign * coords[pos] * cominors[copos];
    }
    Ok(acc)
}

/// Eigencoordinate chart near the two leading compound eigendirections:
/// unit eigenvectors w1, w2 for the leading pair, dual functionals that
/// vanish on the complementary invariant subspace, and the projection
/// sending a projective point to its (Z1 : Z2) component.
#[derive(Debug, Clone)]
pub struct ProjectionFrame {
    pub nu1: Complex64,
    pub nu2: Complex64,
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
}

impl ProjectionFrame {
    /// (Z1, Z2) components of a projective point in this chart.
    pub fn project(&self, p: &PlueckerPoint) -> (Complex64, Complex64) {
        self.project_raw(p.coords())
    }

    pub fn project_raw(&self, coords: &[Complex64]) -> (Complex64, Complex64) {
        let mut z1 = ZERO;
        let mut z2 = ZERO;
        for (i, &c) in coords.iter().enumerate() {
            z1 += self.f1[i] * c;
            z2 += self.f2[i] * c;
        }
        (z1, z2)
    }

    /// Inhomogeneous coordinate Z1/Z2 on the invariant sphere.
    pub fn zeta(&self, p: &PlueckerPoint) -> Complex64 {
        let (z1, z2) = self.project(p);
        z1 / z2
    }

    /// Chordal distance of the projected point to the attractor-candidate
    /// [1 : 0] (the w1 direction).
    pub fn dist_to_pn(&self, p: &PlueckerPoint) -> f64 {
        let (z1, z2) = self.project(p);
        let denom = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        z2.norm() / denom
    }

    /// Chordal distance of the projected point to [0 : 1] (the w2 direction).
    pub fn dist_to_ps(&self, p: &PlueckerPoint) -> f64 {
        let (z1, z2) = self.project(p);
        let denom = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        z1.norm() / denom
    }

    /// Relative size of the point's component along span{w1, w2} (oblique,
    /// along the complementary invariant subspace). Small values mean the
    /// projection chart is unreliable for this point.
    pub fn leading_fraction(&self, p: &PlueckerPoint) -> f64 {
        let (z1, z2) = self.project(p);
        let m = p.len();
        let mut comp = vec![ZERO; m];
        for i in 0..m {
            comp[i] = z1 * self.w1[i] + z2 * self.w2[i];
        }
        let num: f64 = comp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = p.coords().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        num / den
    }

    /// Rotate the eigenvector phases to align with a reference chart;
    /// removes gauge jumps along parameter paths.
    pub fn gauge_align(&mut self, reference: &ProjectionFrame) {
        for (w, f, rw) in [
            (&mut self.w1, &mut self.f1, &reference.w1),
            (&mut self.w2, &mut self.f2, &reference.w2),
        ] {
            let mut dot = ZERO;
            for (r, v) in rw.iter().zip(w.iter()) {
                dot += r.conj() * *v;
            }
            if dot.norm() == 0.0 {
                continue;
            }
            let phase = dot / dot.norm();
            for v in w.iter_mut() {
                *v *= phase.conj();
            }
            for v in f.iter_mut() {
                *v *= phase;
            }
        }
    }
}

/// Build the projection chart from the compound matrix of a tail.
/// Requires the two leading eigenvalues to be simple and to lead the rest.
pub fn projection_frame(compound: &ComplexMatrix, tol: &Tolerances) -> Result<ProjectionFrame> {
    let m = compound.require_square()?;
    if m < 2 {
        return Err(Error::ShapeMismatch("projection chart needs dimension >= 2".into()));
    }
    let spectrum = eig_sorted(compound, tol)?;
    let scale = 1.0 + compound.norm_inf();
    let ctol = tol.cluster_rel * scale;
    let nu1 = spectrum.values[0];
    let nu2 = spectrum.values[1];
    if (nu1 - nu2).norm() <= ctol {
        return Err(Error::Ordering {
            detail: format!("leading pair coincides: nu1 = {nu1}, nu2 = {nu2}"),
        });
    }
    if m > 2 {
        let re2 = nu2.re;
        let re3 = spectrum.values[2].re;
        if re2 - re3 <= ctol {
            return Err(Error::Ordering {
                detail: format!("Re nu2 = {re2} does not lead Re nu3 = {re3}"),
            });
        }
    }
    let mut dec = schur(compound)?;
    reorder_schur(&mut dec, &spectrum.schur_positions[..2]);

    let t12 = dec.t[(0, 1)];
    let alpha = t12 / (nu2 - nu1);
    // Sylvester block decoupling: T11 R - R T22 = T12.
    let tail = m - 2;
    let mut r = vec![[ZERO; 2]; tail]; // column-major: r[j] = column j of R
    for j in 0..tail {
        let mut rhs = [dec.t[(0, j + 2)], dec.t[(1, j + 2)]];
        for i in 0..j {
            let t_ij = dec.t[(i + 2, j + 2)];
            rhs[0] += r[i][0] * t_ij;
            rhs[1] += r[i][1] * t_ij;
        }
        let d = dec.t[(j + 2, j + 2)];
        // (T11 - d I) r_j = rhs with T11 = [[nu1, t12],[0, nu2]]
        let a11 = dec.t[(0, 0)] - d;
        let a22 = dec.t[(1, 1)] - d;
        let x2 = rhs[1] / a22;
        let x1 = (rhs[0] - t12 * x2) / a11;
        r[j] = [x1, x2];
    }

    let qh = dec.q.adjoint();
    // u-rows = [I2 | R] Q^H, the pair coordinates in the Schur basis
    let mut u0 = vec![ZERO; m];
    let mut u1 = vec![ZERO; m];
    for col in 0..m {
        let mut acc0 = qh[(0, col)];
        let mut acc1 = qh[(1, col)];
        for j in 0..tail {
            acc0 += r[j][0] * qh[(j + 2, col)];
            acc1 += r[j][1] * qh[(j + 2, col)];
        }
        u0[col] = acc0;
        u1[col] = acc1;
    }

    let w1: Vec<Complex64> = dec.q.column(0);
    let mut w2: Vec<Complex64> = (0..m).map(|i| alpha * dec.q[(i, 0)] + dec.q[(i, 1)]).collect();
    let w2norm = w2.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for v in &mut w2 {
        *v /= w2norm;
    }
    let f1: Vec<Complex64> = (0..m).map(|i| u0[i] - alpha * u1[i]).collect();
    let f2: Vec<Complex64> = (0..m).map(|i| u1[i] * w2norm).collect();

    let mut frame = ProjectionFrame { nu1, nu2, w1, w2, f1, f2 };
    // deterministic phase: largest component of each eigenvector positive real
    fix_phase(&mut frame.w1, &mut frame.f1);
    fix_phase(&mut frame.w2, &mut frame.f2);
    Ok(frame)
}

fn fix_phase(w: &mut [Complex64], f: &mut [Complex64]) {
    let (idx, _) = w
        .iter()
        .enumerate()
        .fold((0usize, 0.0f64), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
    let pivot = w[idx];
    let phase = pivot / pivot.norm();
    for v in w.iter_mut() {
        *v *= phase.conj();
    }
    for v in f.iter_mut() {
        *v *= phase;
    }
}
