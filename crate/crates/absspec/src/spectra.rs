//! Gap functions, loci of the absolute and asymptotic essential spectra,
//! non-degeneracy certification, and the half-disk partition around
//! certified locus points.
//!
//! The absolute-spectrum gap at sorted index i is Re mu^i - Re mu^{i+1},
//! which is nonnegative by construction; the signed variant multiplies by
//! the sign of Im(mu^i - mu^{i+1}) so that it changes sign across the locus
//! and marching squares can trace the zero set. Crossings where the
//! refined |gap| stays large are discontinuity artifacts of the sorting and
//! are discarded.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    eig_sorted, ordered_invariant_subspace, ordered_invariant_subspace_mapped, sort_complex_desc,
    ComplexMatrix, Subspace,
};
use crate::problem::{BoundaryData, CoefficientProfile, ParameterDomain, ProfileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Right tail, gap at index i_-.
    Plus,
    /// Left tail, gap at index i_+.
    Minus,
    /// Shared tail of the periodic problem; essential-spectrum gap.
    Zero,
}

/// Spectral data of a tail: a constant generator or the monodromy of an
/// x-periodic tail. Exponents of the monodromy are principal logs divided by
/// the period, so both cases rank by growth rate.
#[derive(Debug, Clone)]
pub enum TailGenerator {
    Constant(ComplexMatrix),
    Monodromy { matrix: ComplexMatrix, period: f64 },
}

impl TailGenerator {
    /// Growth exponents sorted by descending real part (ties by descending
    /// imaginary part), with multiplicity.
    pub fn exponents(&self, tol: &Tolerances) -> Result<Vec<Complex64>> {
        match self {
            TailGenerator::Constant(a) => Ok(eig_sorted(a, tol)?.values),
            TailGenerator::Monodromy { matrix, period } => {
                let raw = eig_sorted(matrix, tol)?;
                let mapped: Vec<Complex64> = raw
                    .values
                    .iter()
                    .map(|rho| principal_log(*rho) / *period)
                    .collect();
                let scale = 1.0 + mapped.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let order = sort_complex_desc(&mapped, tol.cluster_rel * scale);
                Ok(order.into_iter().map(|i| mapped[i]).collect())
            }
        }
    }

    /// Invariant subspace of the `count` fastest-growing directions.
    pub fn leading_subspace(&self, count: usize, tol: &Tolerances) -> Result<Subspace> {
        match self {
            TailGenerator::Constant(a) => ordered_invariant_subspace(a, count, tol),
            TailGenerator::Monodromy { matrix, period } => {
                let t = *period;
                ordered_invariant_subspace_mapped(matrix, count, tol, move |rho| {
                    principal_log(rho) / t
                })
            }
        }
    }
}

fn principal_log(rho: Complex64) -> Complex64 {
    let r = rho.norm().max(f64::MIN_POSITIVE);
    Complex64::new(r.ln(), rho.arg())
}

/// Tail spectral generator for the requested side.
pub fn tail_generator(
    profile: &CoefficientProfile,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<TailGenerator> {
    if !profile.domain.contains(lambda) {
        return Err(Error::DomainViolation(format!(
            "lambda = {lambda} outside the declared domain of '{}'",
            profile.name
        )));
    }
    match profile.kind {
        ProfileKind::PeriodicTail { period_minus, period_plus } => {
            let prop = crate::flow::Propagator::new(profile, lambda, tol)?;
            let (matrix, period) = match side {
                Side::Minus => (prop.monodromy(false)?, period_minus),
                Side::Plus | Side::Zero => (prop.monodromy(true)?, period_plus),
            };
            Ok(TailGenerator::Monodromy { matrix, period })
        }
        _ => {
            let a = match side {
                Side::Minus => profile.left_tail(lambda),
                Side::Plus | Side::Zero => profile.right_tail(lambda),
            };
            Ok(TailGenerator::Constant(a))
        }
    }
}

/// Constant tail matrix (or monodromy) used by hypothesis validation.
pub fn tail_matrix(
    profile: &CoefficientProfile,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    Ok(match tail_generator(profile, side, lambda, tol)? {
        TailGenerator::Constant(a) => a,
        TailGenerator::Monodromy { matrix, .. } => matrix,
    })
}

/// Pointwise gap evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GapValue {
    /// Sign-carrying gap; changes sign across the locus. NaN when the
    /// defining eigenvalue pair is a numerical cluster (branch point).
    pub signed: f64,
    /// The gap magnitude per its definition.
    pub unsigned: f64,
    /// The two eigenvalues whose real parts define the gap. For the
    /// essential gap both hold the crossing branch.
    pub mu_upper: Complex64,
    pub mu_lower: Complex64,
    /// Set when the split is numerically ambiguous.
    pub cluster_ambiguous: bool,
}

fn gap_index(boundary: &BoundaryData, side: Side) -> usize {
    match side {
        Side::Plus => boundary.i_minus(),
        Side::Minus => boundary.i_plus(),
        Side::Zero => 0,
    }
}

/// Gap function g(lambda) for the chosen side.
///
/// Absolute case: Re mu^i - Re mu^{i+1} at i = i_- (plus side) or i_+
/// (minus side), with the sign of Im(mu^i - mu^{i+1}) attached.
/// Essential case: min_j |Re mu_0^j|, signed by the real part of the
/// crossing branch.
pub fn gap(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<GapValue> {
    let exps = tail_generator(profile, side, lambda, tol)?.exponents(tol)?;
    gap_from_exponents(&exps, boundary, side, tol)
}

fn gap_from_exponents(
    exps: &[Complex64],
    boundary: &BoundaryData,
    side: Side,
    tol: &Tolerances,
) -> Result<GapValue> {
    let n = exps.len();
    let scale = 1.0 + exps.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ctol = tol.cluster_rel * scale;
    match side {
        Side::Plus | Side::Minus => {
            let i = gap_index(boundary, side);
            if i == 0 || i >= n {
                return Err(Error::Precondition(format!(
                    "gap index {i} out of range for dimension {n}"
                )));
            }
            let upper = exps[i - 1];
            let lower = exps[i];
            let d = upper - lower;
            let ambiguous = d.norm() <= ctol;
            let sign = if d.im >= 0.0 { 1.0 } else { -1.0 };
            let signed = if ambiguous { f64::NAN } else { sign * d.re };
            Ok(GapValue {
                signed,
                unsigned: d.re,
                mu_upper: upper,
                mu_lower: lower,
                cluster_ambiguous: ambiguous,
            })
        }
        Side::Zero => {
            let min_abs = exps.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
            // crossing candidates: all branches whose |Re| ties the minimum
            let mut best: Option<Complex64> = None;
            for &z in exps {
                if z.re.abs() <= min_abs + ctol {
                    best = match best {
                        None => Some(z),
                        Some(b) => {
                            if z.im > b.im + ctol || ((z.im - b.im).abs() <= ctol && z.re > b.re) {
                                Some(z)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let crossing = best.expect("nonempty spectrum");
            // degenerate when the crossing value collides with another branch
            let ambiguous = exps
                .iter()
                .filter(|&&z| (z - crossing).norm() <= ctol)
                .count()
                > 1;
            Ok(GapValue {
                signed: if ambiguous { f64::NAN } else { crossing.re },
                unsigned: min_abs,
                mu_upper: crossing,
                mu_lower: crossing,
                cluster_ambiguous: ambiguous,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Branch-matched eigenvalue derivative
// ---------------------------------------------------------------------------

/// Greedy globally-closest matching of `sample` onto `center`; returns the
/// sample value assigned to each center position.
fn match_branches(center: &[Complex64], sample: &[Complex64]) -> Vec<Complex64> {
    let n = center.len();
    let mut assigned = vec![Complex64::new(f64::NAN, 0.0); n];
    let mut used_c = vec![false; n];
    let mut used_s = vec![false; n];
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for (ci, &cv) in center.iter().enumerate() {
            if used_c[ci] {
                continue;
            }
            for (si, &sv) in sample.iter().enumerate() {
                if used_s[si] {
                    continue;
                }
                let d = (cv - sv).norm();
                if d < best.2 {
                    best = (ci, si, d);
                }
            }
        }
        let (ci, si, _) = best;
        used_c[ci] = true;
        used_s[si] = true;
        assigned[ci] = sample[si];
    }
    assigned
}

/// Complex derivative of a branch-tracked function of the tail exponents by
/// a central 4-point stencil along the real lambda direction. `extract`
/// receives the exponents branch-matched to the center ordering.
fn branch_derivative(
    profile: &CoefficientProfile,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
    extract: impl Fn(&[Complex64]) -> Complex64,
) -> Result<Complex64> {
    let h = tol.fd_step * (1.0 + lambda.norm());
    let center = tail_generator(profile, side, lambda, tol)?.exponents(tol)?;
    let mut values = Vec::with_capacity(4);
    for offset in [2.0 * h, h, -h, -2.0 * h] {
        let exps =
            tail_generator(profile, side, lambda + Complex64::new(offset, 0.0), tol)?.exponents(tol)?;
        let matched = match_branches(&center, &exps);
        values.push(extract(&matched));
    }
    Ok((-values[0] + values[1] * 8.0 - values[2] * 8.0 + values[3]) / Complex64::new(12.0 * h, 0.0))
}

// ---------------------------------------------------------------------------
// Non-degeneracy certification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NondegeneracyReport {
    pub lambda: Complex64,
    pub side: Side,
    /// Strict-ordering margin above the crossing pair (Re mu^{i-1} - Re mu^i),
    /// infinity when there is no branch above.
    pub margin_above: f64,
    /// Strict-ordering margin below (Re mu^{i+1} - Re mu^{i+2}).
    pub margin_below: f64,
    /// |mu^i - mu^{i+1}|: the crossing branches must stay distinct values.
    pub distinctness: f64,
    /// d/dlambda of the gap-defining quantity, branch-matched.
    pub derivative: Complex64,
    pub derivative_nonzero: bool,
    /// min |Re derivative| over nearby off-locus samples (the
    /// "not purely imaginary" condition); reported, not thresholded.
    pub ir_margin: f64,
    pub degenerate_flags: Vec<String>,
}

impl NondegeneracyReport {
    pub fn nondegenerate(&self) -> bool {
        self.degenerate_flags.is_empty()
    }
}

/// Certify the non-degeneracy conditions at a locus point: strict ordering
/// away from the crossing pair, distinct crossing values, and a nonzero
/// lambda-derivative of the crossing quantity.
pub fn certify_nondegenerate(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<NondegeneracyReport> {
    let g = gap(profile, boundary, side, lambda, tol)?;
    if !g.unsigned.abs().is_finite() || g.unsigned.abs() > tol.on_locus {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} is not on the locus (|gap| = {:.3e})",
            g.unsigned.abs()
        )));
    }
    let exps = tail_generator(profile, side, lambda, tol)?.exponents(tol)?;
    let n = exps.len();
    let scale = 1.0 + exps.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ctol = tol.cluster_rel * scale;
    let mut flags = Vec::new();

    let (margin_above, margin_below, distinctness, derivative) = match side {
        Side::Plus | Side::Minus => {
            let i = gap_index(boundary, side);
            let above = if i >= 2 { exps[i - 2].re - exps[i - 1].re } else { f64::INFINITY };
            let below = if i + 2 <= n {
                if i + 2 == n { f64::INFINITY } else { exps[i].re - exps[i + 1].re }
            } else {
                f64::INFINITY
            };
            let dist = (exps[i - 1] - exps[i]).norm();
            let deriv = branch_derivative(profile, side, lambda, tol, |m| m[i - 1] - m[i])?;
            (above, below, dist, deriv)
        }
        Side::Zero => {
            // single-crossing margin: distance of the next-closest branch to
            // the imaginary axis
            let crossing = g.mu_upper;
            let mut others: Vec<f64> = exps
                .iter()
                .filter(|&&z| (z - crossing).norm() > ctol)
                .map(|z| z.re.abs())
                .collect();
            others.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let above = others.first().copied().unwrap_or(f64::INFINITY);
            let dist = exps
                .iter()
                .filter(|&&z| (z - crossing).norm() > ctol)
                .map(|z| (z - crossing).norm())
                .fold(f64::INFINITY, f64::min);
            let cidx = exps
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - crossing).norm().partial_cmp(&(b.1 - crossing).norm()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let deriv = branch_derivative(profile, side, lambda, tol, |m| m[cidx])?;
            (above, f64::INFINITY, dist, deriv)
        }
    };

    if g.cluster_ambiguous || distinctness <= ctol {
        flags.push(format!("crossing branches coincide (distance {distinctness:.3e})"));
    }
    if margin_above <= tol.on_locus {
        flags.push(format!("no strict ordering above the crossing pair (margin {margin_above:.3e})"));
    }
    if margin_below <= tol.on_locus {
        flags.push(format!("no strict ordering below the crossing pair (margin {margin_below:.3e})"));
    }
    let derivative_nonzero = derivative.norm() > tol.on_locus;
    if !derivative_nonzero {
        flags.push(format!("crossing derivative vanishes ({:.3e})", derivative.norm()));
    }

    // off-locus samples for the "derivative != i r" condition
    let h = 10.0 * tol.fd_step * (1.0 + lambda.norm());
    let mut ir_margin = f64::INFINITY;
    for theta in [0.25, 0.75, 1.25, 1.75] {
        let probe = lambda
            + Complex64::new(0.0, theta * std::f64::consts::PI).exp() * h;
        let d = match side {
            Side::Plus | Side::Minus => {
                let i = gap_index(boundary, side);
                branch_derivative(profile, side, probe, tol, |m| m[i - 1] - m[i])?
            }
            Side::Zero => {
                let crossing = g.mu_upper;
                let center = tail_generator(profile, side, probe, tol)?.exponents(tol)?;
                let cidx = center
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        (a.1 - crossing).norm().partial_cmp(&(b.1 - crossing).norm()).unwrap()
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                branch_derivative(profile, side, probe, tol, |m| m[cidx])?
            }
        };
        ir_margin = ir_margin.min(d.re.abs());
    }

    Ok(NondegeneracyReport {
        lambda,
        side,
        margin_above,
        margin_below,
        distinctness,
        derivative,
        derivative_nonzero,
        ir_margin,
        degenerate_flags: flags,
    })
}

// ---------------------------------------------------------------------------
// Locus tracing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LocusVertex {
    pub lambda: Complex64,
    pub signed_gap: f64,
    pub mu_upper: Complex64,
    pub mu_lower: Complex64,
    pub dgap_dlambda: Complex64,
    pub nondegenerate: bool,
}

/// Zero locus of the gap function: polylines of refined vertices ordered by
/// arc continuation.
#[derive(Debug, Clone)]
pub struct SpectrumLocus {
    pub polylines: Vec<Vec<LocusVertex>>,
}

impl SpectrumLocus {
    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    /// Vertices flagged non-degenerate (the dense subset the half-disk
    /// partition is built on).
    pub fn nondegenerate_vertices(&self) -> impl Iterator<Item = &LocusVertex> {
        self.polylines.iter().flatten().filter(|v| v.nondegenerate)
    }
}

fn sign_of(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Trace the gap zero locus over the domain grid by marching squares with
/// bisection refinement of every crossing. Crossings that refuse to refine
/// below the vertex tolerance are sorting discontinuities, not locus points,
/// and are dropped.
pub fn trace_locus(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    domain: &ParameterDomain,
    tol: &Tolerances,
) -> Result<SpectrumLocus> {
    let res = domain.resolution();
    if res < 8 {
        return Err(Error::Precondition("locus tracing needs resolution >= 8".into()));
    }
    let (re0, re1, im0, im1) = domain.bounds();
    let nx = res;
    let ny = res;
    let dre = (re1 - re0) / (nx - 1) as f64;
    let dim = (im1 - im0) / (ny - 1) as f64;
    let node = |i: usize, j: usize| Complex64::new(re0 + i as f64 * dre, im0 + j as f64 * dim);

    let signed_at = |lambda: Complex64| -> Result<f64> {
        Ok(gap(profile, boundary, side, lambda, tol)?.signed)
    };

    // grid values (row-major over j, i)
    let lambdas: Vec<Complex64> =
        (0..ny).flat_map(|j| (0..nx).map(move |i| node(i, j))).collect();
    let values = crate::par::map(&lambdas, |&l| signed_at(l))?;
    let value = |i: usize, j: usize| values[j * nx + i];

    // refine a sign change along the segment [a, b]
    let refine = |a: Complex64, fa: f64, b: Complex64, fb: f64| -> Result<Option<LocusVertex>> {
        let (mut a, mut fa, mut b, mut _fb) = (a, fa, b, fb);
        let mut best = (a, fa);
        for _ in 0..80 {
            let mid = (a + b) * 0.5;
            let fm = signed_at(mid)?;
            if fm.is_nan() {
                break;
            }
            if fm.abs() < best.1.abs() {
                best = (mid, fm);
            }
            if fm.abs() <= tol.locus_vertex_gap {
                break;
            }
            if sign_of(fm) == sign_of(fa) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                _fb = fm;
            }
        }
        let (lambda, signed) = best;
        if signed.abs() > tol.locus_vertex_gap {
            return Ok(None); // sorting discontinuity, not a locus point
        }
        let g = gap(profile, boundary, side, lambda, tol)?;
        let deriv = vertex_derivative(profile, boundary, side, lambda, tol)?;
        let nondeg = certify_nondegenerate(profile, boundary, side, lambda, tol)
            .map(|r| r.nondegenerate())
            .unwrap_or(false);
        Ok(Some(LocusVertex {
            lambda,
            signed_gap: signed,
            mu_upper: g.mu_upper,
            mu_lower: g.mu_lower,
            dgap_dlambda: deriv,
            nondegenerate: nondeg,
        }))
    };

    // edge ids: horizontal (i,j)-(i+1,j) and vertical (i,j)-(i,j+1)
    let h_id = |i: usize, j: usize| 2 * (j * nx + i);
    let v_id = |i: usize, j: usize| 2 * (j * nx + i) + 1;
    let mut vertices: std::collections::BTreeMap<usize, LocusVertex> =
        std::collections::BTreeMap::new();

    let crossing = |id: usize,
                        a: Complex64,
                        fa: f64,
                        b: Complex64,
                        fb: f64,
                        vertices: &mut std::collections::BTreeMap<usize, LocusVertex>|
     -> Result<bool> {
        if fa.is_nan() || fb.is_nan() || sign_of(fa) == sign_of(fb) {
            return Ok(false);
        }
        if let Some(v) = refine(a, fa, b, fb)? {
            vertices.insert(id, v);
            Ok(true)
        } else {
            Ok(false)
        }
    };

    let mut h_crossed = vec![false; 2 * nx * ny];
    for j in 0..ny {
        for i in 0..nx - 1 {
            let id = h_id(i, j);
            h_crossed[id] =
                crossing(id, node(i, j), value(i, j), node(i + 1, j), value(i + 1, j), &mut vertices)?;
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            let id = v_id(i, j);
            h_crossed[id] =
                crossing(id, node(i, j), value(i, j), node(i, j + 1), value(i, j + 1), &mut vertices)?;
        }
    }

    // assemble cell segments
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let bottom = h_id(i, j);
            let top = h_id(i, j + 1);
            let left = v_id(i, j);
            let right = v_id(i + 1, j);
            let mut crossed: Vec<usize> = [bottom, right, top, left]
                .into_iter()
                .filter(|&e| h_crossed[e] && vertices.contains_key(&e))
                .collect();
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let center = (node(i, j) + node(i + 1, j + 1)) * 0.5;
                    let fc = signed_at(center)?;
                    let f00 = value(i, j);
                    if !fc.is_nan() && sign_of(fc) == sign_of(f00) {
                        // the f00-region connects diagonally
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((bottom, left));
                        segments.push((top, right));
                    }
                    crossed.clear();
                }
                _ => {}
            }
        }
    }

    // chain segments into polylines
    let mut adjacency: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for &(a, b) in &segments {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    let mut used: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
    let mark = |a: usize, b: usize, used: &mut std::collections::BTreeSet<(usize, usize)>| {
        used.insert((a.min(b), a.max(b)));
    };
    let is_used = |a: usize, b: usize, used: &std::collections::BTreeSet<(usize, usize)>| {
        used.contains(&(a.min(b), a.max(b)))
    };

    let mut polylines: Vec<Vec<usize>> = Vec::new();
    // open chains first (degree-1 endpoints), then closed loops
    let endpoints: Vec<usize> = adjacency
        .iter()
        .filter(|(_, nb)| nb.len() == 1)
        .map(|(&e, _)| e)
        .collect();
    let starts = endpoints.into_iter().chain(adjacency.keys().copied().collect::<Vec<_>>());
    for start in starts {
        // walk from `start` along unused segments
        let mut chain = vec![start];
        let mut cur = start;
        loop {
            let next = adjacency[&cur]
                .iter()
                .copied()
                .find(|&nb| !is_used(cur, nb, &used));
            match next {
                Some(nb) => {
                    mark(cur, nb, &mut used);
                    chain.push(nb);
                    cur = nb;
                }
                None => break,
            }
        }
        if chain.len() > 1 {
            polylines.push(chain);
        }
    }

    let polylines = polylines
        .into_iter()
        .map(|chain| chain.into_iter().filter_map(|e| vertices.get(&e).cloned()).collect())
        .filter(|p: &Vec<LocusVertex>| !p.is_empty())
        .collect();
    Ok(SpectrumLocus { polylines })
}

fn vertex_derivative(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<Complex64> {
    match side {
        Side::Plus | Side::Minus => {
            let i = gap_index(boundary, side);
            branch_derivative(profile, side, lambda, tol, |m| m[i - 1] - m[i])
        }
        Side::Zero => {
            let g = gap(profile, boundary, side, lambda, tol)?;
            let crossing = g.mu_upper;
            let center = tail_generator(profile, side, lambda, tol)?.exponents(tol)?;
            let cidx = center
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - crossing).norm().partial_cmp(&(b.1 - crossing).norm()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            branch_derivative(profile, side, lambda, tol, |m| m[cidx])
        }
    }
}

/// CSV emission: one row per locus vertex.
pub fn locus_csv(locus: &SpectrumLocus) -> String {
    let mut out = String::from("# schema: absspec.locus.v1\n");
    out.push_str(
        "re_lambda,im_lambda,gap,mu_i_re,mu_i_im,mu_ip1_re,mu_ip1_im,dgap_dlambda_re,dgap_dlambda_im,nondegenerate\n",
    );
    for poly in &locus.polylines {
        for v in poly {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                v.lambda.re,
                v.lambda.im,
                v.signed_gap,
                v.mu_upper.re,
                v.mu_upper.im,
                v.mu_lower.re,
                v.mu_lower.im,
                v.dgap_dlambda.re,
                v.dgap_dlambda.im,
                if v.nondegenerate { 1 } else { 0 }
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Half-disk partition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfDiskClass {
    /// Positive signed gap: the sorted order continues the leading order.
    B1,
    /// Negative signed gap: the crossing pair exchanged order.
    B2,
    OnLocus,
}

/// Classifier of a certified disk around a locus point into the two
/// half-disks separated by the locus.
#[derive(Debug, Clone)]
pub struct DiskPartition {
    pub center: Complex64,
    pub radius: f64,
    pub side: Side,
    /// |signed gap| below this counts as on-locus.
    pub on_tol: f64,
}

impl DiskPartition {
    pub fn classify(
        &self,
        profile: &CoefficientProfile,
        boundary: &BoundaryData,
        lambda: Complex64,
        tol: &Tolerances,
    ) -> Result<HalfDiskClass> {
        let g = gap(profile, boundary, self.side, lambda, tol)?;
        if g.signed.is_nan() || g.signed.abs() <= self.on_tol {
            Ok(HalfDiskClass::OnLocus)
        } else if g.signed > 0.0 {
            Ok(HalfDiskClass::B1)
        } else {
            Ok(HalfDiskClass::B2)
        }
    }
}

/// Build the half-disk partition around a certified locus point. Fails with
/// DiskTooLarge when the locus crosses the disk in more than one arc or an
/// arc terminates inside it.
pub fn partition_disk(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    side: Side,
    center: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<DiskPartition> {
    let report = certify_nondegenerate(profile, boundary, side, center, tol)?;
    if !report.nondegenerate() {
        return Err(Error::Precondition(format!(
            "disk center is a degenerate locus point: {}",
            report.degenerate_flags.join("; ")
        )));
    }
    let res = 48usize;
    let domain = ParameterDomain::disk(center, radius, res)?;
    let locus = trace_locus(profile, boundary, side, &domain, tol)?;
    // arcs restricted to the disk
    let cell = 2.0 * radius / (res - 1) as f64;
    let boundary_band = 2.0 * cell;
    let mut arcs_inside = 0usize;
    let mut interior_endpoint = false;
    let mut degenerate_inside = false;
    for poly in &locus.polylines {
        let inside: Vec<&LocusVertex> =
            poly.iter().filter(|v| (v.lambda - center).norm() <= radius).collect();
        if inside.is_empty() {
            continue;
        }
        arcs_inside += 1;
        if inside.iter().any(|v| !v.nondegenerate) {
            degenerate_inside = true;
        }
        for end in [poly.first().unwrap(), poly.last().unwrap()] {
            let r = (end.lambda - center).norm();
            if r < radius - boundary_band {
                interior_endpoint = true;
            }
        }
    }
    if arcs_inside != 1 || interior_endpoint || degenerate_inside {
        return Err(Error::DiskTooLarge {
            arcs: arcs_inside,
            detail: format!(
                "interior endpoint: {interior_endpoint}, degenerate vertices: {degenerate_inside}"
            ),
        });
    }
    Ok(DiskPartition { center, radius, side, on_tol: tol.on_locus })
}
