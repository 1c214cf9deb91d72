//! Propagation of the linear system, its subspace flow, and its
//! Pluecker-coordinate flow across the interval, with per-step
//! renormalization and log-scale bookkeeping.
//!
//! Constant-coefficient stretches always propagate by matrix exponentials in
//! norm-limited chunks; x-dependent stretches use an adaptive embedded
//! Runge-Kutta 5(4) pair. Frames renormalize by QR with the positive-diagonal
//! convention, so the discarded scale factors are positive reals and the
//! winding of the Evans-type determinant is unaffected.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exterior::{compound_matrix, pluecker, IndexBasis, PlueckerPoint};
use crate::linalg::{det_logscaled, expm, qr_plain, ComplexMatrix, Subspace};
use crate::problem::{BoundaryData, CoefficientProfile, ProfileKind};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
}

impl IntegratorSettings {
    pub fn from_tolerances(profile: &CoefficientProfile, tol: &Tolerances) -> Self {
        IntegratorSettings {
            rel_tol: tol.ode_rel,
            abs_tol: tol.ode_abs,
            max_step: (profile.ell0 * tol.max_step_frac).max(1e-6),
        }
    }
}

/// Immutable propagation context for one (profile, lambda) pair.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    pub profile: &'a CoefficientProfile,
    pub lambda: Complex64,
    pub settings: IntegratorSettings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum GeneratorKind {
    /// d/dx S = A(x) S
    Base,
    /// State is a 2N x k frame; only the top N rows evolve, W' = 0.
    DoubledTop,
    /// d/dx S = A^(k)(x) S on the k-th exterior power.
    Compound(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RenormKind {
    /// QR with positive diagonal; log scale is sum of ln R_jj.
    Qr,
    /// Divide by the largest modulus entry.
    MaxAbs,
}

/// Log-scaled value of the Evans-type boundary determinant.
#[derive(Debug, Clone, Copy)]
pub struct EvansSample {
    /// log |det [frame(Phi U_-) | frame(U_+)]|; <= 0 for orthonormal blocks.
    pub log_magnitude: f64,
    /// Unit-modulus phase of the determinant.
    pub phase: Complex64,
    /// Sum of the positive logs discarded during propagation, reported
    /// separately; the analytic determinant is exp(log_magnitude +
    /// propagation_log_scale) * phase.
    pub propagation_log_scale: f64,
}

impl EvansSample {
    /// Normalized determinant value phase * exp(log_magnitude).
    pub fn normalized(&self) -> Complex64 {
        self.phase * self.log_magnitude.exp()
    }
}

impl<'a> Propagator<'a> {
    pub fn new(
        profile: &'a CoefficientProfile,
        lambda: Complex64,
        tol: &Tolerances,
    ) -> Result<Self> {
        if !profile.domain.contains(lambda) {
            return Err(Error::DomainViolation(format!(
                "lambda = {lambda} outside the declared domain of '{}'",
                profile.name
            )));
        }
        Ok(Propagator {
            profile,
            lambda,
            settings: IntegratorSettings::from_tolerances(profile, tol),
        })
    }

    fn generator(&self, kind: GeneratorKind, x: f64) -> ComplexMatrix {
        let a = self.profile.evaluate_unchecked(x, self.lambda);
        match kind {
            GeneratorKind::Base | GeneratorKind::DoubledTop => a,
            GeneratorKind::Compound(k) => {
                compound_matrix(&a, k).expect("compound of evaluated profile")
            }
        }
    }

    fn apply_generator(
        &self,
        kind: GeneratorKind,
        gen: &ComplexMatrix,
        state: &ComplexMatrix,
    ) -> ComplexMatrix {
        match kind {
            GeneratorKind::Base | GeneratorKind::Compound(_) => {
                gen.mul(state).expect("generator application")
            }
            GeneratorKind::DoubledTop => {
                let n = gen.rows();
                let k = state.cols();
                let mut out = ComplexMatrix::zeros(state.rows(), k);
                for i in 0..n {
                    for j in 0..k {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for l in 0..n {
                            acc += gen[(i, l)] * state[(l, j)];
                        }
                        out[(i, j)] = acc;
                    }
                }
                out
            }
        }
    }

    fn exp_apply(
        &self,
        kind: GeneratorKind,
        gen: &ComplexMatrix,
        h: f64,
        state: &ComplexMatrix,
    ) -> ComplexMatrix {
        let e = expm(&gen.scale(Complex64::new(h, 0.0)));
        match kind {
            GeneratorKind::Base | GeneratorKind::Compound(_) => e.mul(state).unwrap(),
            GeneratorKind::DoubledTop => {
                let n = gen.rows();
                let mut out = state.clone();
                for j in 0..state.cols() {
                    for i in 0..n {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for l in 0..n {
                            acc += e[(i, l)] * state[(l, j)];
                        }
                        out[(i, j)] = acc;
                    }
                }
                out
            }
        }
    }

    fn renormalize(&self, kind: RenormKind, state: ComplexMatrix) -> (ComplexMatrix, f64) {
        match kind {
            RenormKind::Qr => {
                let (q, r) = qr_plain(&state);
                let mut log = 0.0;
                for j in 0..r.rows() {
                    let d = r[(j, j)].re;
                    if d > 0.0 {
                        log += d.ln();
                    } else {
                        // dependent columns collapse the frame; report -inf
                        log = f64::NEG_INFINITY;
                    }
                }
                (q, log)
            }
            RenormKind::MaxAbs => {
                let m = state.max_abs();
                if m == 0.0 {
                    return (state, f64::NEG_INFINITY);
                }
                (state.scale(Complex64::new(1.0 / m, 0.0)), m.ln())
            }
        }
    }

    /// True when the generator is x-independent over the open interval
    /// (x0, x1), so exponential stepping is exact.
    fn segment_constant(&self, x0: f64, x1: f64) -> bool {
        let ell0 = self.profile.ell0;
        let mid = 0.5 * (x0 + x1);
        let (left, right, middle) = self.profile.families();
        if matches!(self.profile.kind, ProfileKind::PeriodicTail { .. }) && mid.abs() >= ell0 {
            return false;
        }
        if mid <= -ell0 {
            !left.depends_on_x()
        } else if mid >= ell0 {
            !right.depends_on_x()
        } else {
            !middle.depends_on_x()
        }
    }

    /// Split [from, to] at the seams into same-region segments, in travel
    /// order.
    fn segments(&self, from: f64, to: f64) -> Vec<(f64, f64)> {
        let ell0 = self.profile.ell0;
        let mut cuts = vec![from];
        let mut interior: Vec<f64> = [-ell0, ell0]
            .into_iter()
            .filter(|&s| (s - from) * (s - to) < 0.0)
            .collect();
        interior.sort_by(|a, b| {
            if from <= to {
                a.partial_cmp(b).unwrap()
            } else {
                b.partial_cmp(a).unwrap()
            }
        });
        cuts.extend(interior);
        cuts.push(to);
        cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| a != b).collect()
    }

    fn propagate_state(
        &self,
        kind: GeneratorKind,
        renorm: RenormKind,
        from: f64,
        to: f64,
        state: ComplexMatrix,
    ) -> Result<(ComplexMatrix, f64)> {
        let mut s = state;
        let mut log_scale = 0.0;
        for (a, b) in self.segments(from, to) {
            let (ns, dl) = if self.segment_constant(a, b) {
                self.exponential_segment(kind, renorm, a, b, s)?
            } else {
                self.rk_segment(kind, renorm, a, b, s)?
            };
            s = ns;
            log_scale += dl;
        }
        Ok((s, log_scale))
    }

    fn exponential_segment(
        &self,
        kind: GeneratorKind,
        renorm: RenormKind,
        from: f64,
        to: f64,
        state: ComplexMatrix,
    ) -> Result<(ComplexMatrix, f64)> {
        let mid = 0.5 * (from + to);
        let gen = self.generator(kind, mid);
        let span = to - from;
        let norm = gen.norm_inf().max(1e-12);
        // keep per-chunk growth below e^20 so doubles never overflow
        let chunk = (20.0 / norm).min(span.abs().max(1e-12));
        let steps = (span.abs() / chunk).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let mut s = state;
        let mut log_scale = 0.0;
        for _ in 0..steps {
            s = self.exp_apply(kind, &gen, h, &s);
            let (ns, dl) = self.renormalize(renorm, s);
            s = ns;
            log_scale += dl;
        }
        Ok((s, log_scale))
    }

    fn rk_segment(
        &self,
        kind: GeneratorKind,
        renorm: RenormKind,
        from: f64,
        to: f64,
        state: ComplexMatrix,
    ) -> Result<(ComplexMatrix, f64)> {
        let span = to - from;
        let dir = span.signum();
        let mut x = from;
        let mut s = state;
        let mut log_scale = 0.0;
        let mut h = dir * self.settings.max_step.min(span.abs());
        let min_step = 1e-14 * (1.0 + span.abs());
        let mut guard = 0usize;
        while (to - x) * dir > 1e-14 * (1.0 + span.abs()) {
            guard += 1;
            if guard > 2_000_000 {
                return Err(Error::IntegratorFailure { position: x });
            }
            if (x + h - to) * dir > 0.0 {
                h = to - x;
            }
            let (next, err) = self.dp45_step(kind, x, h, &s);
            if err <= 1.0 {
                x += h;
                let (ns, dl) = self.renormalize(renorm, next);
                s = ns;
                log_scale += dl;
                let factor = if err > 0.0 { 0.8 * err.powf(-0.2) } else { 3.0 };
                h *= factor.clamp(0.2, 3.0);
                if h.abs() > self.settings.max_step {
                    h = dir * self.settings.max_step;
                }
            } else {
                h *= (0.8 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h.abs() < min_step {
                    return Err(Error::IntegratorFailure { position: x });
                }
            }
        }
        Ok((s, log_scale))
    }

    /// One Dormand-Prince 5(4) step; returns the 5th-order solution and the
    /// scaled error estimate.
    fn dp45_step(
        &self,
        kind: GeneratorKind,
        x: f64,
        h: f64,
        y: &ComplexMatrix,
    ) -> (ComplexMatrix, f64) {
        const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        const A: [[f64; 6]; 7] = [
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const E: [f64; 7] = [
            35.0 / 384.0 - 5179.0 / 57600.0,
            0.0,
            500.0 / 1113.0 - 7571.0 / 16695.0,
            125.0 / 192.0 - 393.0 / 640.0,
            -2187.0 / 6784.0 + 92097.0 / 339200.0,
            11.0 / 84.0 - 187.0 / 2100.0,
            -1.0 / 40.0,
        ];

        let mut stages: Vec<ComplexMatrix> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = y.clone();
            for (j, stage) in stages.iter().enumerate().take(i) {
                if A[i][j] != 0.0 {
                    yi = yi.add(&stage.scale(Complex64::new(h * A[i][j], 0.0))).unwrap();
                }
            }
            let gen = self.generator(kind, x + C[i] * h);
            stages.push(self.apply_generator(kind, &gen, &yi));
        }
        // 5th order solution is row 6 of A (FSAL layout)
        let mut y5 = y.clone();
        let mut err = ComplexMatrix::zeros(y.rows(), y.cols());
        for (j, stage) in stages.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                y5 = y5.add(&stage.scale(Complex64::new(h * A[6][j], 0.0))).unwrap();
            }
        }
        for (j, stage) in stages.iter().enumerate() {
            if E[j] != 0.0 {
                err = err.add(&stage.scale(Complex64::new(h * E[j], 0.0))).unwrap();
            }
        }
        let mut scaled = 0.0f64;
        for i in 0..y.rows() {
            for j in 0..y.cols() {
                let tol = self.settings.abs_tol
                    + self.settings.rel_tol * y[(i, j)].norm().max(y5[(i, j)].norm());
                scaled = scaled.max(err[(i, j)].norm() / tol);
            }
        }
        (y5, scaled)
    }

    /// Propagate a subspace frame; returns the propagated subspace and the
    /// accumulated log of the discarded normalization factors.
    pub fn propagate_subspace(
        &self,
        from: f64,
        to: f64,
        u: &Subspace,
    ) -> Result<(Subspace, f64)> {
        let (frame, log_scale) =
            self.propagate_state(GeneratorKind::Base, RenormKind::Qr, from, to, u.frame().clone())?;
        let tol = Tolerances::default();
        Ok((Subspace::from_orthonormal(frame, &tol)?, log_scale))
    }

    /// Propagate a projective point of the k-th exterior power.
    pub fn propagate_pluecker(
        &self,
        k: usize,
        from: f64,
        to: f64,
        p: &PlueckerPoint,
    ) -> Result<(PlueckerPoint, f64)> {
        let m = p.len();
        let state = ComplexMatrix::new(m, 1, p.coords().to_vec())?;
        let (out, log_scale) =
            self.propagate_state(GeneratorKind::Compound(k), RenormKind::MaxAbs, from, to, state)?;
        Ok((PlueckerPoint::new(out.column(0))?, log_scale))
    }

    /// Propagate a doubled-system frame (2N rows; the lower block is frozen).
    pub fn propagate_doubled_frame(
        &self,
        from: f64,
        to: f64,
        frame: ComplexMatrix,
    ) -> Result<(ComplexMatrix, f64)> {
        if frame.rows() != 2 * self.profile.dim {
            return Err(Error::ShapeMismatch("doubled frame must have 2N rows".into()));
        }
        self.propagate_state(GeneratorKind::DoubledTop, RenormKind::Qr, from, to, frame)
    }

    /// Full transfer matrix in scaled form: returns (M, s) with
    /// Phi(to, from) = M * exp(s) and max |M_ij| = 1.
    pub fn transfer_matrix_scaled(&self, from: f64, to: f64) -> Result<(ComplexMatrix, f64)> {
        let n = self.profile.dim;
        self.propagate_state(
            GeneratorKind::Base,
            RenormKind::MaxAbs,
            from,
            to,
            ComplexMatrix::identity(n),
        )
    }

    /// Evans-type determinant: propagate U_- across the interval and pair
    /// with U_+. Zero magnitude exactly at eigenvalues of the truncated
    /// boundary-value problem.
    pub fn boundary_determinant(
        &self,
        ell: f64,
        boundary: &BoundaryData,
    ) -> Result<EvansSample> {
        if ell <= self.profile.ell0 {
            return Err(Error::Precondition(format!(
                "interval half-length {ell} must exceed the middle half-width {}",
                self.profile.ell0
            )));
        }
        let (prop, log_scale) = self.propagate_subspace(-ell, ell, &boundary.left)?;
        let joint = prop.frame().hstack(boundary.right.frame())?;
        let (log_magnitude, phase) = det_logscaled(&joint)?;
        Ok(EvansSample { log_magnitude, phase, propagation_log_scale: log_scale })
    }

    /// Monodromy matrix of an x-periodic tail over one period.
    pub fn monodromy(&self, side_right: bool) -> Result<ComplexMatrix> {
        let period = match self.profile.kind {
            ProfileKind::PeriodicTail { period_minus, period_plus } => {
                if side_right {
                    period_plus
                } else {
                    period_minus
                }
            }
            _ => {
                return Err(Error::Precondition(
                    "monodromy is defined for periodic-tail profiles".into(),
                ))
            }
        };
        let ell0 = self.profile.ell0;
        let (from, to) =
            if side_right { (ell0, ell0 + period) } else { (-ell0 - period, -ell0) };
        let (m, s) = self.transfer_matrix_scaled(from, to)?;
        Ok(m.scale(Complex64::new(s.exp(), 0.0)))
    }
}

/// Sampled trajectory of the subspace flow and its embedded image.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub samples: Vec<TrajectorySample>,
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub x: f64,
    pub subspace: Subspace,
    pub pluecker: PlueckerPoint,
    pub log_scale_subspace: f64,
    pub log_scale_pluecker: f64,
}

/// Record the two coupled flows on an evenly spaced grid; the embedded image
/// of the frame flow stays projectively consistent with the compound flow.
pub fn record_trajectory(
    prop: &Propagator,
    from: f64,
    to: f64,
    u: &Subspace,
    points: usize,
) -> Result<TrajectoryRecord> {
    let k = u.dim();
    let basis = IndexBasis::new(u.ambient_dim(), k)?;
    let mut samples = Vec::with_capacity(points + 1);
    let mut current = u.clone();
    let mut p = pluecker(&current, &basis)?;
    let mut ls = 0.0;
    let mut lp = 0.0;
    samples.push(TrajectorySample {
        x: from,
        subspace: current.clone(),
        pluecker: p.clone(),
        log_scale_subspace: ls,
        log_scale_pluecker: lp,
    });
    for step in 1..=points {
        let x0 = from + (to - from) * (step - 1) as f64 / points as f64;
        let x1 = from + (to - from) * step as f64 / points as f64;
        let (next_u, dls) = prop.propagate_subspace(x0, x1, &current)?;
        let (next_p, dlp) = prop.propagate_pluecker(k, x0, x1, &p)?;
        current = next_u;
        p = next_p;
        ls += dls;
        lp += dlp;
        samples.push(TrajectorySample {
            x: x1,
            subspace: current.clone(),
            pluecker: p.clone(),
            log_scale_subspace: ls,
            log_scale_pluecker: lp,
        });
    }
    Ok(TrajectoryRecord { samples })
}
