//! Periodic boundary conditions through the doubling construction: the
//! system gains N frozen components, periodic identification becomes a pair
//! of separated boundary subspaces, and gamma-twisted eigenvalues fall out
//! of the same Evans-type winding machinery. A direct monodromy determinant
//! cross-checks every count.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::flow::{EvansSample, Propagator};
use crate::linalg::{det_logscaled, eig_sorted, eigvec_from_schur, schur, ComplexMatrix, Subspace};
use crate::problem::{diagonal_subspace, CoefficientProfile};
use crate::spectra::{certify_nondegenerate, gap, Side};

/// The doubled problem: base profile plus the twisted boundary
/// identification Y(ell) = gamma Y(-ell).
#[derive(Debug, Clone)]
pub struct DoubledProblem {
    pub profile: CoefficientProfile,
    pub gamma: Complex64,
    /// Diagonal subspace {(Y, Y)}.
    pub u_minus: Subspace,
    /// Twisted diagonal {(gamma Y, Y)}.
    pub u_gamma: Subspace,
}

/// Extend the system by N frozen equations so that the periodic
/// identification becomes separated boundary data.
pub fn double_system(profile: &CoefficientProfile, gamma: Complex64) -> Result<DoubledProblem> {
    if (gamma.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!(
            "twist factor must be unimodular, got |gamma| = {}",
            gamma.norm()
        )));
    }
    let n = profile.dim;
    Ok(DoubledProblem {
        profile: profile.clone(),
        gamma,
        u_minus: diagonal_subspace(n, Complex64::new(1.0, 0.0)),
        u_gamma: diagonal_subspace(n, gamma),
    })
}

impl DoubledProblem {
    /// The doubled generator A(x;lambda) + 0: the lower-right N x N block is
    /// identically zero.
    pub fn evaluate_doubled(&self, x: f64, lambda: Complex64) -> Result<ComplexMatrix> {
        let n = self.profile.dim;
        let a = self.profile.evaluate(x, lambda)?;
        let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = a[(i, j)];
            }
        }
        Ok(out)
    }

    /// Evans-type determinant of the doubled problem: propagate the diagonal
    /// subspace (only the upper block evolves; the doubled fundamental
    /// matrix is Phi + I assembled from the N-dimensional propagation) and
    /// pair with the twisted diagonal.
    pub fn boundary_determinant(
        &self,
        ell: f64,
        lambda: Complex64,
        tol: &Tolerances,
    ) -> Result<EvansSample> {
        if ell <= self.profile.ell0 {
            return Err(Error::Precondition(format!(
                "interval half-length {ell} must exceed the middle half-width {}",
                self.profile.ell0
            )));
        }
        let prop = Propagator::new(&self.profile, lambda, tol)?;
        let (frame, log_scale) =
            prop.propagate_doubled_frame(-ell, ell, self.u_minus.frame().clone())?;
        let joint = frame.hstack(self.u_gamma.frame())?;
        let (log_magnitude, phase) = det_logscaled(&joint)?;
        Ok(EvansSample { log_magnitude, phase, propagation_log_scale: log_scale })
    }

    /// Direct criterion det(Phi(ell,-ell;lambda) - gamma I) in log-scaled
    /// form, computed from the max-normalized transfer matrix: with
    /// Phi = M e^s the determinant is e^{Ns} det(M - gamma e^{-s} I).
    ///
    /// Valid only while the fold factor e^{-s} stays above the rounding
    /// noise of the Schur complement; see [`MONODROMY_FOLD_LIMIT`].
    pub fn monodromy_determinant(
        &self,
        ell: f64,
        lambda: Complex64,
        tol: &Tolerances,
    ) -> Result<(f64, Complex64)> {
        let n = self.profile.dim;
        let prop = Propagator::new(&self.profile, lambda, tol)?;
        let (m, s) = prop.transfer_matrix_scaled(-ell, ell)?;
        let fold = (-s).exp();
        let shifted = m.sub(&ComplexMatrix::identity(n).scale(self.gamma * fold))?;
        let (lm, phase) = det_logscaled(&shifted)?;
        Ok((lm + n as f64 * s, phase))
    }

    /// Transfer log-scale at a point, used to decide whether the direct
    /// monodromy determinant is numerically trustworthy.
    pub fn transfer_scale(&self, ell: f64, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
        let prop = Propagator::new(&self.profile, lambda, tol)?;
        let (_, s) = prop.transfer_matrix_scaled(-ell, ell)?;
        Ok(s)
    }
}

/// Beyond this transfer log-scale the fold factor gamma e^{-s} sinks below
/// the double-precision noise of the determinant evaluation and the direct
/// monodromy criterion carries no information; the cross-check is skipped.
pub const MONODROMY_FOLD_LIMIT: f64 = 30.0;

/// Winding report of the doubled determinant together with the monodromy
/// cross-check (None when the transfer scale puts the direct determinant
/// below the double-precision noise floor).
#[derive(Debug, Clone)]
pub struct PeriodicWindingReport {
    pub report: crate::counting::WindingReport,
    pub monodromy_winding: Option<i64>,
}

/// Count gamma-eigenvalues in a disk by the doubled-determinant winding and
/// assert agreement with the direct monodromy criterion: the two
/// determinants differ by a nonvanishing analytic factor, so their windings
/// must coincide wherever the direct determinant is computable.
pub fn periodic_count(
    doubled: &DoubledProblem,
    ell: f64,
    center: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<PeriodicWindingReport> {
    let report = crate::counting::winding_of(
        |lambda| {
            let sample = doubled.boundary_determinant(ell, lambda, tol)?;
            Ok((sample.log_magnitude, sample.phase))
        },
        center,
        radius,
        tol,
    )?;
    // pre-scan the transfer scale on a coarse ring before trusting the
    // direct determinant
    let mut max_scale = 0.0f64;
    for j in 0..8 {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
        let lambda = center + Complex64::new(0.0, theta).exp() * radius;
        max_scale = max_scale.max(doubled.transfer_scale(ell, lambda, tol)?);
    }
    let monodromy_winding = if max_scale <= MONODROMY_FOLD_LIMIT {
        let mono = crate::counting::winding_of(
            |lambda| doubled.monodromy_determinant(ell, lambda, tol),
            center,
            radius,
            tol,
        )?;
        if mono.winding != report.winding {
            return Err(Error::Inconsistency(format!(
                "doubled-determinant winding {} disagrees with monodromy winding {} at \
                 ell = {ell}, center = {center}, radius = {radius}",
                report.winding, mono.winding
            )));
        }
        Some(mono.winding)
    } else {
        None
    };
    Ok(PeriodicWindingReport { report, monodromy_winding })
}

// ---------------------------------------------------------------------------
// Extrapolated-set probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetClass {
    /// Counts grow past the cap: the point attracts unboundedly many
    /// eigenvalues.
    In,
    /// Counts stabilized at or below the cap over the top half of the
    /// lengths.
    Out,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct CandidateReport {
    pub lambda: Complex64,
    /// Certification at the candidate: None when off the essential locus,
    /// Some(false) when on it but degenerate.
    pub certified: Option<bool>,
    pub counts: Vec<(f64, i64)>,
    pub class: SetClass,
}

/// Classify candidate points by how their eigenvalue counts behave as the
/// interval grows: unbounded growth puts the point in the extrapolated
/// essential spectral set, a stabilized bounded count keeps it out.
pub fn extrapolated_set_probe(
    doubled: &DoubledProblem,
    candidates: &[Complex64],
    radius: f64,
    ells: &[f64],
    n_cap: i64,
    tol: &Tolerances,
) -> Result<Vec<CandidateReport>> {
    if ells.len() < 4 {
        return Err(Error::Precondition("the length list needs at least 4 entries".into()));
    }
    if ells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("the length list must increase".into()));
    }
    let boundary = crate::problem::BoundaryData::new(
        doubled.u_minus.clone(),
        doubled.u_gamma.clone(),
    )?;
    let mut out = Vec::with_capacity(candidates.len());
    for &lambda in candidates {
        let certified = match gap(&doubled.profile, &boundary, Side::Zero, lambda, tol) {
            Ok(g) if g.unsigned.abs() <= tol.on_locus => Some(
                certify_nondegenerate(&doubled.profile, &boundary, Side::Zero, lambda, tol)
                    .map(|r| r.nondegenerate())
                    .unwrap_or(false),
            ),
            _ => None,
        };
        let mut counts = Vec::with_capacity(ells.len());
        for &ell in ells {
            let r = periodic_count(doubled, ell, lambda, radius, tol)?;
            counts.push((ell, r.report.winding));
        }
        let class = if certified == Some(false) {
            SetClass::Undecided
        } else {
            classify_counts(&counts, n_cap)
        };
        out.push(CandidateReport { lambda, certified, counts, class });
    }
    Ok(out)
}

fn classify_counts(counts: &[(f64, i64)], n_cap: i64) -> SetClass {
    let values: Vec<i64> = counts.iter().map(|&(_, c)| c).collect();
    let last = *values.last().unwrap();
    let first = values[0];
    let nondecreasing = values.windows(2).all(|w| w[1] >= w[0] - 1);
    let top_half = &values[values.len() / 2..];
    let stabilized = top_half.windows(2).all(|w| w[0] == w[1]);
    if stabilized && top_half[0] <= n_cap {
        SetClass::Out
    } else if nondecreasing && last > n_cap && last > first {
        SetClass::In
    } else {
        SetClass::Undecided
    }
}

// ---------------------------------------------------------------------------
// Center-subspace endpoint diagnostic
// ---------------------------------------------------------------------------

/// Projected endpoint of the tracked intersection line inside the
/// (N+1)-dimensional crossing-plus-constant subspace, in the coordinates
/// where the restricted flow is diag(mu_0^k, 0, ..., 0).
#[derive(Debug, Clone)]
pub struct CenterProbe {
    pub lambda: Complex64,
    /// The crossing eigenvalue mu_0^k.
    pub crossing: Complex64,
    /// Chordal distance of the tracked line to the crossing direction.
    pub dist_to_pn: f64,
    /// Chordal distance to the constant-block class.
    pub dist_to_ps: f64,
}

/// Track the line V(x) = Phi U_- meet Ebar_0 to x = ell and report its
/// position in the quotient sphere. For Re mu_0^k > 0 the crossing
/// direction attracts at rate e^{-Re mu_0^k * 2 ell}; for Re mu_0^k < 0
/// the constant class does.
///
/// The starting line is closed-form: (Y, Y) lies in Ebar_0 exactly when
/// Y is a multiple of the crossing eigenvector, so V(-ell) = span (v_k, v_k)
/// and the line itself is propagated. Re-intersecting propagated subspaces
/// at the far end degenerates numerically (the whole propagated subspace
/// leans into Ebar_0 as ell grows), which this construction avoids.
pub fn center_endpoint(
    doubled: &DoubledProblem,
    ell: f64,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<CenterProbe> {
    let n = doubled.profile.dim;
    let a0 = doubled.profile.right_tail(lambda);
    let spec = eig_sorted(&a0, tol)?;
    let k = (0..n)
        .min_by(|&a, &b| spec.values[a].re.abs().partial_cmp(&spec.values[b].re.abs()).unwrap())
        .unwrap();
    let crossing = spec.values[k];
    let scale = 1.0 + a0.norm_inf();
    if crossing.norm() <= tol.cluster_rel * scale {
        return Err(Error::Precondition(
            "the crossing branch vanishes; the doubled splitting is degenerate here".into(),
        ));
    }
    let dec = schur(&a0)?;
    let vk = eigvec_from_schur(&dec, spec.schur_positions[k]);

    // V(-ell) = span (v_k, v_k)
    let mut start = ComplexMatrix::zeros(2 * n, 1);
    for i in 0..n {
        start[(i, 0)] = vk[i];
        start[(n + i, 0)] = vk[i];
    }
    let prop = Propagator::new(&doubled.profile, lambda, tol)?;
    let (line, _) = prop.propagate_doubled_frame(-ell, ell, start)?;

    // Ebar_0 coordinates: z1 along (v_k, 0), z_c the frozen block
    let top: Vec<Complex64> = (0..n).map(|i| line[(i, 0)]).collect();
    let z1: Complex64 = vk.iter().zip(&top).map(|(v, t)| v.conj() * *t).sum();
    let zc_norm: f64 = (0..n).map(|i| line[(n + i, 0)].norm_sqr()).sum::<f64>().sqrt();
    let total = (z1.norm_sqr() + zc_norm * zc_norm).sqrt();
    if total == 0.0 {
        return Err(Error::Precondition(
            "the tracked line collapsed; the center diagnostic is undefined here".into(),
        ));
    }
    Ok(CenterProbe {
        lambda,
        crossing,
        dist_to_pn: zc_norm / total,
        dist_to_ps: z1.norm() / total,
    })
}
