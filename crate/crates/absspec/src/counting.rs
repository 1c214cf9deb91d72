//! Eigenvalue counting in parameter disks through the winding of the
//! Evans-type boundary determinant, the projected covering trace along the
//! locus, and secant refinement of individual eigenvalues.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::exterior::{compound_matrix, pluecker, projection_frame, IndexBasis, ProjectionFrame};
use crate::flow::Propagator;
use crate::problem::{BoundaryData, CoefficientProfile};
use crate::spectra::{certify_nondegenerate, gap, HalfDiskClass, Side};

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * std::f64::consts::PI);
    if x > std::f64::consts::PI {
        x -= 2.0 * std::f64::consts::PI;
    } else if x <= -std::f64::consts::PI {
        x += 2.0 * std::f64::consts::PI;
    }
    x
}

/// Cumulative unwrapped phase along a sequence of nonzero complex values,
/// starting at 0; also returns the largest absolute increment.
pub fn unwrap_phases(values: &[Complex64]) -> (Vec<f64>, f64) {
    let mut cumulative = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    let mut max_inc = 0.0f64;
    cumulative.push(0.0);
    for w in values.windows(2) {
        let inc = wrap_angle((w[1] / w[0]).arg());
        max_inc = max_inc.max(inc.abs());
        acc += inc;
        cumulative.push(acc);
    }
    (cumulative, max_inc)
}

#[derive(Debug, Clone)]
pub struct ContourSample {
    pub lambda: Complex64,
    pub log_magnitude: f64,
    pub phase: Complex64,
}

/// Contour, sampled determinant phase, and the resulting integer winding.
#[derive(Debug, Clone)]
pub struct WindingReport {
    pub center: Complex64,
    pub radius: f64,
    /// Radius actually used after zero-on-contour perturbations.
    pub used_radius: f64,
    pub samples: Vec<ContourSample>,
    pub winding: i64,
    pub refinement_depth: usize,
}

const LOG_ZERO_ON_CONTOUR: f64 = -30.0;

/// Winding number of an analytic-up-to-positive-factor map around a circle.
/// Samples start at `contour_start` points and double until all adjacent
/// phase increments fall below pi/2; the radius is perturbed by +-1% (three
/// attempts) if the value vanishes on the contour.
pub fn winding_of<F>(
    value: F,
    center: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<WindingReport>
where
    F: Fn(Complex64) -> Result<(f64, Complex64)> + Sync,
{
    let mut log = Vec::new();
    for (attempt, factor) in [1.0, 1.01, 0.99, 1.02].into_iter().enumerate() {
        let r = radius * factor;
        match winding_at_radius(&value, center, r, tol)? {
            WindingOutcome::Done(mut report) => {
                report.radius = radius;
                report.used_radius = r;
                return Ok(report);
            }
            WindingOutcome::ZeroOnContour(lambda) => {
                log.push(format!(
                    "attempt {attempt}: |E| below e^{LOG_ZERO_ON_CONTOUR} at lambda = {lambda}"
                ));
            }
        }
    }
    Err(Error::Contour { attempts: 3, log })
}

enum WindingOutcome {
    Done(WindingReport),
    ZeroOnContour(Complex64),
}

fn winding_at_radius<F>(
    value: &F,
    center: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<WindingOutcome>
where
    F: Fn(Complex64) -> Result<(f64, Complex64)> + Sync,
{
    let mut n = tol.contour_start.max(8);
    let mut depth = 0usize;
    let mut samples: Vec<ContourSample> = Vec::new();
    loop {
        // reuse existing samples at even positions when doubling
        let lambdas: Vec<(usize, Complex64)> = (0..n)
            .filter(|j| depth == 0 || j % 2 == 1)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                (j, center + Complex64::new(0.0, theta).exp() * radius)
            })
            .collect();
        let computed = crate::par::map(&lambdas, |(_, l)| value(*l))?;
        let mut merged: Vec<ContourSample> = Vec::with_capacity(n);
        let mut new_iter = lambdas.iter().zip(computed.into_iter());
        let mut old_iter = samples.iter();
        for j in 0..n {
            if depth > 0 && j % 2 == 0 {
                merged.push(old_iter.next().expect("old sample present").clone());
            } else {
                let ((_, lambda), (log_magnitude, phase)) =
                    new_iter.next().expect("new sample present");
                merged.push(ContourSample { lambda: *lambda, log_magnitude, phase });
            }
        }
        samples = merged;

        if let Some(hit) = samples.iter().find(|s| s.log_magnitude < LOG_ZERO_ON_CONTOUR) {
            return Ok(WindingOutcome::ZeroOnContour(hit.lambda));
        }

        // closed loop: replicate the first sample at the end
        let mut phases: Vec<Complex64> = samples.iter().map(|s| s.phase).collect();
        phases.push(samples[0].phase);
        let (cumulative, max_inc) = unwrap_phases(&phases);
        if max_inc < std::f64::consts::FRAC_PI_2 {
            let total = cumulative.last().copied().unwrap_or(0.0);
            let turns = total / (2.0 * std::f64::consts::PI);
            let winding = turns.round();
            debug_assert!(
                (turns - winding).abs() <= 1e-6,
                "winding {turns} not an integer"
            );
            return Ok(WindingOutcome::Done(WindingReport {
                center,
                radius,
                used_radius: radius,
                samples,
                winding: winding as i64,
                refinement_depth: depth,
            }));
        }
        if 2 * n > tol.contour_cap {
            return Ok(WindingOutcome::ZeroOnContour(
                samples
                    .iter()
                    .min_by(|a, b| a.log_magnitude.partial_cmp(&b.log_magnitude).unwrap())
                    .map(|s| s.lambda)
                    .unwrap_or(center),
            ));
        }
        n *= 2;
        depth += 1;
    }
}

/// Number of eigenvalues of the truncated boundary-value problem inside
/// B(center, radius), counted with multiplicity by the argument principle
/// applied to the Evans-type determinant.
pub fn winding_count(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    ell: f64,
    center: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<WindingReport> {
    winding_of(
        |lambda| {
            let prop = Propagator::new(profile, lambda, tol)?;
            let sample = prop.boundary_determinant(ell, boundary)?;
            Ok((sample.log_magnitude, sample.phase))
        },
        center,
        radius,
        tol,
    )
}

/// One row of the accumulation experiment.
#[derive(Debug, Clone, Copy)]
pub struct AccumulationRow {
    pub ell: f64,
    pub ell_bar: f64,
    pub count: i64,
}

#[derive(Debug, Clone)]
pub struct AccumulationTable {
    pub center: Complex64,
    pub radius: f64,
    /// Certification outcome at the disk center; None when the center is
    /// not on the locus at all (counts are then expected to stay zero).
    pub certified: Option<bool>,
    pub rows: Vec<AccumulationRow>,
    /// Least-squares slope of count against ell through the origin.
    pub slope: f64,
}

/// Count eigenvalues in the disk for each interval half-length; eigenvalues
/// accumulate linearly in ell exactly when the disk meets the relevant
/// locus.
pub fn accumulation_experiment(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    center: Complex64,
    radius: f64,
    ells: &[f64],
    tol: &Tolerances,
) -> Result<AccumulationTable> {
    let certified = match gap(profile, boundary, side, center, tol) {
        Ok(g) if g.unsigned.abs() <= tol.on_locus => {
            Some(certify_nondegenerate(profile, boundary, side, center, tol)
                .map(|r| r.nondegenerate())
                .unwrap_or(false))
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(ells.len());
    for &ell in ells {
        let report = winding_count(profile, boundary, ell, center, radius, tol)?;
        rows.push(AccumulationRow { ell, ell_bar: ell - profile.ell0, count: report.winding });
    }
    let num: f64 = rows.iter().map(|r| r.ell * r.count as f64).sum();
    let den: f64 = rows.iter().map(|r| r.ell * r.ell).sum();
    let slope = if den > 0.0 { num / den } else { 0.0 };
    Ok(AccumulationTable { center, radius, certified, rows, slope })
}

// ---------------------------------------------------------------------------
// Covering trace
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TraceSample {
    /// Arclength-like parameter in [0, 1] along the locus segment.
    pub s: f64,
    pub lambda: Complex64,
    /// Projected inhomogeneous coordinate Z1/Z2 at x = ell.
    pub zeta: Complex64,
    pub cumulative_turns: f64,
    pub in_exclusion: bool,
}

/// Projected covering data along a locus segment: the argument variation of
/// the projected coordinate measures how often the propagated boundary
/// subspace wraps the invariant sphere.
#[derive(Debug, Clone)]
pub struct CoveringTrace {
    pub ell: f64,
    pub ell_bar: f64,
    pub samples: Vec<TraceSample>,
    /// Total argument variation / 2 pi.
    pub turn_count: f64,
    /// Smallest relative size of the leading-plane component seen along the
    /// trace; small values indicate the propagated subspace hugging the
    /// complementary invariant set.
    pub min_leading_fraction: f64,
}

/// Compute the projection chart at lambda for the problem's compound flow.
pub fn chart_at(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<ProjectionFrame> {
    let k = boundary.i_minus();
    let tail = profile.right_tail(lambda);
    let comp = compound_matrix(&tail, k)?;
    projection_frame(&comp, tol)
}

/// Trace the projected endpoint along a polyline of locus points.
/// `anchor` fixes the eigenvector gauge at the first sample; follow-up
/// samples align to their predecessor, so the recorded argument variation is
/// free of chart jumps.
pub fn covering_trace(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    ell: f64,
    segment: &[Complex64],
    anchor: Option<&ProjectionFrame>,
    tol: &Tolerances,
) -> Result<CoveringTrace> {
    if segment.len() < 2 {
        return Err(Error::Precondition("covering trace needs at least two segment points".into()));
    }
    if !tol.exclusions_disjoint() {
        return Err(Error::Config(format!(
            "exclusion radius {} leaves the attractor and repeller neighborhoods overlapping",
            tol.exclusion_radius
        )));
    }
    let k = boundary.i_minus();
    let basis = IndexBasis::new(profile.dim, k)?;
    let mut refined: Vec<Complex64> = segment.to_vec();
    let mut depth = 0usize;
    loop {
        let trace = trace_once(profile, boundary, ell, &refined, anchor, &basis, tol)?;
        let max_inc = trace
            .samples
            .windows(2)
            .map(|w| (w[1].cumulative_turns - w[0].cumulative_turns).abs())
            .fold(0.0f64, f64::max)
            * 2.0
            * std::f64::consts::PI;
        if max_inc < std::f64::consts::FRAC_PI_2 || depth >= 8 {
            return Ok(trace);
        }
        // double the sampling by inserting midpoints
        let mut denser = Vec::with_capacity(refined.len() * 2 - 1);
        for w in refined.windows(2) {
            denser.push(w[0]);
            denser.push((w[0] + w[1]) * 0.5);
        }
        denser.push(*refined.last().unwrap());
        refined = denser;
        depth += 1;
    }
}

fn trace_once(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    ell: f64,
    points: &[Complex64],
    anchor: Option<&ProjectionFrame>,
    basis: &IndexBasis,
    tol: &Tolerances,
) -> Result<CoveringTrace> {
    let k = boundary.i_minus();
    let p0 = pluecker(&boundary.left, basis)?;
    // endpoint Pluecker points per sample (independent propagations)
    let endpoints = crate::par::map(points, |&lambda| {
        let prop = Propagator::new(profile, lambda, tol)?;
        let (p, _) = prop.propagate_pluecker(k, -ell, ell, &p0)?;
        Ok(p)
    })?;

    let mut samples: Vec<TraceSample> = Vec::with_capacity(points.len());
    let mut previous: Option<ProjectionFrame> = None;
    let mut zetas: Vec<Complex64> = Vec::with_capacity(points.len());
    let mut min_fraction = f64::INFINITY;
    for (idx, (&lambda, endpoint)) in points.iter().zip(endpoints.iter()).enumerate() {
        let tail = profile.right_tail(lambda);
        let comp = compound_matrix(&tail, k)?;
        let mut chart = projection_frame(&comp, tol)?;
        match (&previous, anchor, idx) {
            (_, Some(a), 0) => chart.gauge_align(a),
            (Some(prev), _, _) => chart.gauge_align(prev),
            _ => {}
        }
        // The eigenvalue-target point on the invariant sphere: [Z1 : Z2]
        // with Z1 L(w1) + Z2 L(w2) = 0, where L pairs against U_+. It must
        // stay clear of the exclusion neighborhoods or the wrap count says
        // nothing about eigenvalue hits.
        let a_pair = crate::exterior::complement_pairing(&chart.w1, &boundary.right, basis)?;
        let b_pair = crate::exterior::complement_pairing(&chart.w2, &boundary.right, basis)?;
        let target_norm = (a_pair.norm_sqr() + b_pair.norm_sqr()).sqrt();
        let target_dist_pn = a_pair.norm() / target_norm;
        let target_dist_ps = b_pair.norm() / target_norm;
        if target_dist_pn <= tol.exclusion_radius || target_dist_ps <= tol.exclusion_radius {
            return Err(Error::Config(format!(
                "eigenvalue-target point sits inside an exclusion neighborhood at lambda = \
                 {lambda} (distances {target_dist_pn:.3e} / {target_dist_ps:.3e}, radius {})",
                tol.exclusion_radius
            )));
        }
        let (z1, z2) = chart.project(endpoint);
        let zeta = z1 / z2;
        let dist_pn = chart.dist_to_pn(endpoint);
        let dist_ps = chart.dist_to_ps(endpoint);
        if dist_pn <= tol.exclusion_radius && dist_ps <= tol.exclusion_radius {
            return Err(Error::Config(
                "projected point inside both exclusion neighborhoods".into(),
            ));
        }
        let in_exclusion = dist_pn <= tol.exclusion_radius || dist_ps <= tol.exclusion_radius;
        min_fraction = min_fraction.min(chart.leading_fraction(endpoint));
        zetas.push(zeta);
        samples.push(TraceSample {
            s: idx as f64 / (points.len() - 1) as f64,
            lambda,
            zeta,
            cumulative_turns: 0.0,
            in_exclusion,
        });
        previous = Some(chart);
    }
    let (cumulative, _) = unwrap_phases(&zetas);
    for (sample, turns) in samples.iter_mut().zip(cumulative.iter()) {
        sample.cumulative_turns = turns / (2.0 * std::f64::consts::PI);
    }
    let turn_count = samples.last().map(|s| s.cumulative_turns).unwrap_or(0.0)
        - samples.first().map(|s| s.cumulative_turns).unwrap_or(0.0);
    Ok(CoveringTrace {
        ell,
        ell_bar: ell - profile.ell0,
        samples,
        turn_count: turn_count.abs(),
        min_leading_fraction: min_fraction,
    })
}

/// Endpoint behavior of one off-locus sample: which half-disk it belongs to
/// and how close the projected endpoint sits to the attractor/repeller pair.
#[derive(Debug, Clone)]
pub struct AttractionProbe {
    pub lambda: Complex64,
    pub class: HalfDiskClass,
    pub dist_to_pn: f64,
    pub dist_to_ps: f64,
    /// Relative size of the leading-plane component at x = ell; values near
    /// zero would mean the propagated subspace is trapped in the
    /// complementary invariant set (the flow-transversality margin).
    pub leading_fraction: f64,
}

pub fn endpoint_attraction(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    ell: f64,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<AttractionProbe> {
    let k = boundary.i_minus();
    let basis = IndexBasis::new(profile.dim, k)?;
    let g = gap(profile, boundary, side, lambda, tol)?;
    let class = if g.signed.is_nan() || g.signed.abs() <= tol.on_locus {
        HalfDiskClass::OnLocus
    } else if g.signed > 0.0 {
        HalfDiskClass::B1
    } else {
        HalfDiskClass::B2
    };
    let chart = chart_at(profile, boundary, lambda, tol)?;
    let prop = Propagator::new(profile, lambda, tol)?;
    let p0 = pluecker(&boundary.left, &basis)?;
    let (endpoint, _) = prop.propagate_pluecker(k, -ell, ell, &p0)?;
    // The attractor and repeller are labeled by the branches continued from
    // the B1 side. The chart sorts pointwise by real part, so in B2 (order
    // exchanged across the locus) its leading direction is the continued
    // repeller: swap the reported distances there.
    let (d_sorted_first, d_sorted_second) =
        (chart.dist_to_pn(&endpoint), chart.dist_to_ps(&endpoint));
    let (dist_to_pn, dist_to_ps) = if class == HalfDiskClass::B2 {
        (d_sorted_second, d_sorted_first)
    } else {
        (d_sorted_first, d_sorted_second)
    };
    Ok(AttractionProbe {
        lambda,
        class,
        dist_to_pn,
        dist_to_ps,
        leading_fraction: chart.leading_fraction(&endpoint),
    })
}

// ---------------------------------------------------------------------------
// Eigenvalue refinement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RefinedEigenvalue {
    pub lambda: Complex64,
    /// Normalized determinant magnitude at the refined point.
    pub residual: f64,
    /// Winding of a small disk around the refined point.
    pub multiplicity: i64,
}

/// Secant refinement of a single eigenvalue seeded inside a winding-one
/// disk. The starting point is the phase-weighted centroid of the contour
/// (the discrete argument-principle first moment), which for a single zero
/// lands close to it.
pub fn refine_eigenvalue(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    ell: f64,
    seed: Complex64,
    seed_radius: f64,
    tol: &Tolerances,
) -> Result<RefinedEigenvalue> {
    let report = winding_count(profile, boundary, ell, seed, seed_radius, tol)?;
    if report.winding != 1 {
        return Err(Error::Precondition(format!(
            "seed disk winding is {}, need exactly 1",
            report.winding
        )));
    }
    let mut moment = Complex64::new(0.0, 0.0);
    let n = report.samples.len();
    for j in 0..n {
        let a = &report.samples[j];
        let b = &report.samples[(j + 1) % n];
        let inc = wrap_angle((b.phase / a.phase).arg());
        moment += (a.lambda + b.lambda) * 0.5 * inc;
    }
    let estimate = moment / (2.0 * std::f64::consts::PI);

    let evans = |lambda: Complex64| -> Result<Complex64> {
        let prop = Propagator::new(profile, lambda, tol)?;
        Ok(prop.boundary_determinant(ell, boundary)?.normalized())
    };

    let starts = [
        estimate,
        seed,
        seed + Complex64::new(0.37, 0.21) * seed_radius,
        seed - Complex64::new(0.29, 0.41) * seed_radius,
    ];
    for &start in &starts {
        let mut x0 = start;
        let mut x1 = start + Complex64::new(1e-3, 5e-4) * (1.0 + start.norm());
        let Ok(mut f0) = evans(x0) else { continue };
        let Ok(mut f1) = evans(x1) else { continue };
        for _ in 0..100 {
            if f1.norm() <= tol.refine_target {
                if (x1 - seed).norm() > seed_radius {
                    break; // converged to a zero outside the seed disk
                }
                let multiplicity =
                    winding_count(profile, boundary, ell, x1, 1e-4 * (1.0 + x1.norm()), tol)
                        .map(|r| r.winding)
                        .unwrap_or(1);
                return Ok(RefinedEigenvalue { lambda: x1, residual: f1.norm(), multiplicity });
            }
            let denom = f1 - f0;
            if denom.norm() == 0.0 {
                break;
            }
            let mut x2 = x1 - f1 * (x1 - x0) / denom;
            if (x2 - seed).norm() > 2.0 * seed_radius {
                x2 = seed + (x2 - seed) * (2.0 * seed_radius / (x2 - seed).norm());
            }
            x0 = x1;
            f0 = f1;
            x1 = x2;
            match evans(x1) {
                Ok(v) => f1 = v,
                Err(_) => break,
            }
        }
    }
    Err(Error::NonConvergence { iterations: 100 })
}

/// Locate all zeros in a disk of winding w by recursive quadrisection plus
/// secant refinement; zeros are deduplicated by proximity.
pub fn locate_zeros(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    ell: f64,
    center: Complex64,
    radius: f64,
    depth: usize,
    tol: &Tolerances,
) -> Result<Vec<RefinedEigenvalue>> {
    let report = winding_count(profile, boundary, ell, center, radius, tol)?;
    if report.winding == 0 {
        return Ok(Vec::new());
    }
    if report.winding == 1 {
        let z = refine_eigenvalue(profile, boundary, ell, center, radius, tol)?;
        return Ok(vec![z]);
    }
    if depth == 0 {
        return Err(Error::Precondition(format!(
            "quadrisection depth exhausted with winding {} still clustered",
            report.winding
        )));
    }
    let mut found: Vec<RefinedEigenvalue> = Vec::new();
    let half = radius * 0.5;
    for (dx, dy) in [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)] {
        let sub_center = center + Complex64::new(dx * radius, dy * radius);
        // radius 0.75 r covers the quadrant with overlap
        let subs = locate_zeros(profile, boundary, ell, sub_center, half * 1.5, depth - 1, tol)?;
        for z in subs {
            if (z.lambda - center).norm() > radius {
                continue;
            }
            if found.iter().all(|f| (f.lambda - z.lambda).norm() > 1e-6 * (1.0 + z.lambda.norm()))
            {
                found.push(z);
            }
        }
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

pub fn accumulation_csv(table: &AccumulationTable) -> String {
    let mut out = String::from("# schema: absspec.counts.v1\n");
    out.push_str("ell,ell_bar,count\n");
    for r in &table.rows {
        out.push_str(&format!("{:.16e},{:.16e},{}\n", r.ell, r.ell_bar, r.count));
    }
    out
}

pub fn trace_csv(trace: &CoveringTrace) -> String {
    let mut out = String::from("# schema: absspec.trace.v1\n");
    out.push_str("s,re_lambda,im_lambda,re_zeta,im_zeta,cumulative_turns\n");
    for s in &trace.samples {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.s, s.lambda.re, s.lambda.im, s.zeta.re, s.zeta.im, s.cumulative_turns
        ));
    }
    out
}

#[cfg(test)]
mod tests;
