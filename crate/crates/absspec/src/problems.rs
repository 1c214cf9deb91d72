//! Built-in example problems with closed-form oracles, and problem-file
//! ingestion.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Subspace, ONE};
use crate::problem::{
    parse_problem_text, BoundaryData, CoefficientProfile, MatrixFamily, ParameterDomain,
    ProfileKind,
};
use crate::spectra::Side;

/// Documented disk and sampling rule for the attractor/repeller probes.
#[derive(Debug, Clone, Copy)]
pub struct AttractorDisk {
    pub center: Complex64,
    pub radius: f64,
    /// Radius at which the half-disk samples are placed.
    pub sample_radius: f64,
    /// Angular window for B1 samples (radians, measured from the center).
    pub b1_window: (f64, f64),
    /// B2 samples mirror by conjugation (real-axis loci) or by the
    /// antipodal angle (transversal loci).
    pub b2_antipodal: bool,
}

impl AttractorDisk {
    pub fn b1_samples(&self, count: usize) -> Vec<Complex64> {
        let (lo, hi) = self.b1_window;
        (0..count)
            .map(|j| {
                let theta = lo + (hi - lo) * (j as f64 + 0.5) / count as f64;
                self.center + Complex64::new(0.0, theta).exp() * self.sample_radius
            })
            .collect()
    }

    pub fn b2_samples(&self, count: usize) -> Vec<Complex64> {
        let (lo, hi) = self.b1_window;
        (0..count)
            .map(|j| {
                let theta = lo + (hi - lo) * (j as f64 + 0.5) / count as f64;
                let mirrored =
                    if self.b2_antipodal { theta + std::f64::consts::PI } else { -theta };
                self.center + Complex64::new(0.0, mirrored).exp() * self.sample_radius
            })
            .collect()
    }
}

/// Closed-form reference data for a built-in problem.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Scalar advection-diffusion reduction A = [[0,1],[lambda,-c]].
    AdvDiff { c: f64 },
    /// Two constant tails joined by a tanh front; no closed-form spectrum.
    AdvDiffFront { c_minus: f64, c_plus: f64 },
    /// Two-component constant system with diffusion B = diag(1, b2) and
    /// symmetric Jacobian J.
    TwoComponent { b2: f64, j11: f64, j12: f64, j22: f64 },
    /// Same scalar tail under periodic boundary conditions.
    PeriodicAdvDiff { c: f64 },
}

impl Oracle {
    /// Real endpoint of the absolute-spectrum ray {Im lambda = 0,
    /// Re lambda <= end} for the plus side, when the locus is a ray.
    pub fn abs_ray_end(&self) -> Option<f64> {
        match self {
            Oracle::AdvDiff { c } => Some(-c * c / 4.0),
            Oracle::AdvDiffFront { c_plus, .. } => Some(-c_plus * c_plus / 4.0),
            Oracle::TwoComponent { .. } => Some(self.two_component_branch_end()?),
            Oracle::PeriodicAdvDiff { .. } => None,
        }
    }

    fn two_component_branch_end(&self) -> Option<f64> {
        if let Oracle::TwoComponent { j11, j12, j22, .. } = self {
            // kappa_min = 0 crossing: lambda = max eigenvalue of J
            let tr = j11 + j22;
            let det = j11 * j22 - j12 * j12;
            Some((tr + (tr * tr - 4.0 * det).sqrt()) / 2.0)
        } else {
            None
        }
    }

    /// Gap of the plus tail, closed form.
    pub fn gap(&self, lambda: Complex64) -> Option<f64> {
        match self {
            Oracle::AdvDiff { c } | Oracle::AdvDiffFront { c_plus: c, .. } => {
                Some((Complex64::new(c * c, 0.0) + lambda * 4.0).sqrt().re)
            }
            _ => None,
        }
    }

    /// d/dlambda (mu^i - mu^{i+1}), closed form.
    pub fn gap_derivative(&self, lambda: Complex64) -> Option<Complex64> {
        match self {
            Oracle::AdvDiff { c } | Oracle::AdvDiffFront { c_plus: c, .. } => {
                Some(Complex64::new(2.0, 0.0) / (Complex64::new(c * c, 0.0) + lambda * 4.0).sqrt())
            }
            _ => None,
        }
    }

    /// Rotation frequency on the invariant sphere: Im(nu1 - nu2).
    pub fn omega(&self, lambda: Complex64) -> Option<f64> {
        match self {
            Oracle::AdvDiff { c } => {
                Some((Complex64::new(c * c, 0.0) + lambda * 4.0).sqrt().im)
            }
            _ => None,
        }
    }

    /// All separated-boundary (Dirichlet) eigenvalues inside a disk, by
    /// enumeration of the dispersion relation.
    pub fn dirichlet_eigenvalues_in(
        &self,
        ell: f64,
        center: Complex64,
        radius: f64,
    ) -> Option<Vec<Complex64>> {
        match self {
            Oracle::AdvDiff { c } => {
                // p'' + c p' = lambda p, p(+-ell) = 0:
                // lambda_n = -c^2/4 - (n pi / (2 ell))^2
                let mut out = Vec::new();
                let shift = -c * c / 4.0;
                for n in 1..100_000 {
                    let k = n as f64 * std::f64::consts::PI / (2.0 * ell);
                    let lambda = Complex64::new(shift - k * k, 0.0);
                    if (lambda - center).norm() < radius {
                        out.push(lambda);
                    }
                    if shift - k * k < center.re - radius - 1.0 {
                        break;
                    }
                }
                Some(out)
            }
            Oracle::TwoComponent { b2, j11, j12, j22 } => {
                let mut out = Vec::new();
                for n in 1..100_000 {
                    let k = n as f64 * std::f64::consts::PI / (2.0 * ell);
                    let k2 = k * k;
                    // eigenvalues of J - k^2 B
                    let a = j11 - k2;
                    let d = j22 - b2 * k2;
                    let tr = a + d;
                    let disc = ((a - d) * (a - d) / 4.0 + j12 * j12).sqrt();
                    for lam in [tr / 2.0 + disc, tr / 2.0 - disc] {
                        let lambda = Complex64::new(lam, 0.0);
                        if (lambda - center).norm() < radius {
                            out.push(lambda);
                        }
                    }
                    if tr / 2.0 + disc < center.re - radius - 1.0 {
                        break;
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// All gamma-twisted periodic eigenvalues inside a disk: solutions
    /// e^{i k x} with e^{2 i k ell} = gamma, one eigenvalue per admissible k
    /// (multiplicity comes out through repeated lambda values).
    pub fn gamma_eigenvalues_in(
        &self,
        ell: f64,
        gamma: Complex64,
        center: Complex64,
        radius: f64,
    ) -> Option<Vec<Complex64>> {
        match self {
            Oracle::PeriodicAdvDiff { c } => {
                let theta = gamma.arg();
                let mut out = Vec::new();
                let nmax = (2.0 * ell * (center.norm() + radius + 2.0) / std::f64::consts::PI)
                    .ceil() as i64
                    + 2;
                for n in -nmax..=nmax {
                    let k = (theta + 2.0 * std::f64::consts::PI * n as f64) / (2.0 * ell);
                    let lambda = Complex64::new(-k * k, c * k);
                    if (lambda - center).norm() < radius {
                        out.push(lambda);
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }
}

/// A configured example problem: profile, boundary data, documented disks,
/// and the closed-form oracle used by the verification suites.
#[derive(Debug, Clone)]
pub struct BuiltinProblem {
    pub name: String,
    pub profile: CoefficientProfile,
    pub boundary: BoundaryData,
    /// Locus side the documented disks certify.
    pub side: Side,
    /// Certified disk (center, radius) on the locus.
    pub default_disk: (Complex64, f64),
    pub attractor_disk: AttractorDisk,
    /// Rectangle on which the oracle claims (locus shape, hypothesis
    /// checks) are documented to hold. Strictly inside the profile's
    /// declared analyticity domain.
    pub documented_domain: ParameterDomain,
    pub oracle: Oracle,
    pub doc: &'static str,
}

fn real_consts(pairs: &[(&str, f64)]) -> BTreeMap<String, Complex64> {
    pairs.iter().map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0))).collect()
}

fn dirichlet_boundary_2() -> BoundaryData {
    let mut span = ComplexMatrix::zeros(2, 1);
    span[(1, 0)] = ONE;
    let tol = Tolerances::default();
    let u = Subspace::from_columns(&span, &tol).unwrap();
    BoundaryData::new(u.clone(), u).unwrap()
}

fn adv_diff(c: f64) -> Result<BuiltinProblem> {
    let consts = real_consts(&[("c", c)]);
    let fam = MatrixFamily::parse(&[vec!["0", "1"], vec!["lambda", "-c"]], &consts)?;
    let domain = ParameterDomain::rect(-60.0, 20.0, -30.0, 30.0, 64)?;
    let profile = CoefficientProfile::new(
        format!("adv-diff(c={c})"),
        1.0,
        ProfileKind::SeparatedAsymptotic,
        fam.clone(),
        fam.clone(),
        fam,
        domain,
        consts,
        &Tolerances::default(),
    )?;
    let center = Complex64::new(-c * c / 4.0 - 1.0, 0.0);
    let documented_domain =
        ParameterDomain::rect(-c * c / 4.0 - 3.0, -c * c / 4.0 + 2.0, -1.0, 1.0, 64)?;
    Ok(BuiltinProblem {
        name: format!("adv-diff(c={c})"),
        profile,
        boundary: dirichlet_boundary_2(),
        side: Side::Plus,
        default_disk: (center, 0.5),
        attractor_disk: AttractorDisk {
            center,
            radius: 0.5,
            sample_radius: 0.45,
            b1_window: (std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3),
            b2_antipodal: false,
        },
        documented_domain,
        oracle: Oracle::AdvDiff { c },
        doc: "Scalar advection-diffusion reduction with constant tail A = [[0,1],[lambda,-c]] \
              and Dirichlet data span{(0,1)} on both ends. Absolute spectrum: the real ray \
              left of -c^2/4; Dirichlet spectrum lambda_n = -c^2/4 - (n pi / (2 ell))^2.",
    })
}

fn adv_diff_front(c_minus: f64, c_plus: f64) -> Result<BuiltinProblem> {
    let consts = real_consts(&[("cm", c_minus), ("cp", c_plus)]);
    let left = MatrixFamily::parse(&[vec!["0", "1"], vec!["lambda", "-cm"]], &consts)?;
    let right = MatrixFamily::parse(&[vec!["0", "1"], vec!["lambda", "-cp"]], &consts)?;
    let middle = MatrixFamily::parse(
        &[
            vec!["0", "1"],
            vec!["lambda", "-(0.5*(cm+cp) + 0.5*(cp-cm)*tanh(3*x))"],
        ],
        &consts,
    )?;
    let domain = ParameterDomain::rect(-40.0, 10.0, -15.0, 15.0, 64)?;
    let profile = CoefficientProfile::new(
        format!("adv-diff-front(c-={c_minus},c+={c_plus})"),
        4.0,
        ProfileKind::SeparatedAsymptotic,
        left,
        right,
        middle,
        domain,
        consts,
        &Tolerances::default(),
    )?;
    let center = Complex64::new(-c_plus * c_plus / 4.0 - 0.5, 0.0);
    let att_center = Complex64::new(-c_plus * c_plus / 4.0 - 0.7, 0.0);
    let end = -c_plus * c_plus / 4.0;
    let far_end = -c_minus * c_minus / 4.0;
    let documented_domain =
        ParameterDomain::rect(far_end.max(end - 2.5) + 0.15, end + 1.5, -1.0, 1.0, 64)?;
    Ok(BuiltinProblem {
        name: format!("adv-diff-front(c-={c_minus},c+={c_plus})"),
        profile,
        boundary: dirichlet_boundary_2(),
        side: Side::Plus,
        default_disk: (center, 0.35),
        attractor_disk: AttractorDisk {
            center: att_center,
            radius: 0.6,
            sample_radius: 0.55,
            b1_window: (0.42 * std::f64::consts::PI, 0.58 * std::f64::consts::PI),
            b2_antipodal: false,
        },
        documented_domain,
        oracle: Oracle::AdvDiffFront { c_minus, c_plus },
        doc: "Speeds c- and c+ interpolated by tanh(3x) over [-4, 4] with Dirichlet data. \
              The plus-side absolute spectrum is the real ray left of -c+^2/4; the slower \
              minus-side ray sits further left, so the documented disk sees a single arc.",
    })
}

fn two_component() -> Result<BuiltinProblem> {
    // B = diag(1, 2), J = [[-1, 0.5], [0.5, -2]]: q' = B^{-1}(lambda - J) p
    let consts = real_consts(&[]);
    let rows = vec![
        vec!["0", "0", "1", "0"],
        vec!["0", "0", "0", "1"],
        vec!["lambda + 1", "-0.5", "0", "0"],
        vec!["-0.25", "0.5*lambda + 1", "0", "0"],
    ];
    let fam = MatrixFamily::parse(&rows, &consts)?;
    let domain = ParameterDomain::rect(-30.0, 5.0, -10.0, 10.0, 64)?;
    let profile = CoefficientProfile::new(
        "two-component",
        1.0,
        ProfileKind::SeparatedAsymptotic,
        fam.clone(),
        fam.clone(),
        fam,
        domain,
        consts,
        &Tolerances::default(),
    )?;
    let tol = Tolerances::default();
    let mut span = ComplexMatrix::zeros(4, 2);
    span[(2, 0)] = ONE;
    span[(3, 1)] = ONE;
    let u = Subspace::from_columns(&span, &tol)?;
    let boundary = BoundaryData::new(u.clone(), u)?;
    let center = Complex64::new(-1.2, 0.0);
    let documented_domain = ParameterDomain::rect(-2.0, -0.4, -1.0, 1.0, 64)?;
    Ok(BuiltinProblem {
        name: "two-component".into(),
        profile,
        boundary,
        side: Side::Plus,
        default_disk: (center, 0.25),
        attractor_disk: AttractorDisk {
            center,
            radius: 0.25,
            sample_radius: 0.24,
            b1_window: (std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3),
            b2_antipodal: false,
        },
        documented_domain,
        oracle: Oracle::TwoComponent { b2: 2.0, j11: -1.0, j12: 0.5, j22: -2.0 },
        doc: "Two-component constant-coefficient system with diffusion diag(1,2) and \
              symmetric Jacobian [[-1,0.5],[0.5,-2]]; boundary subspaces of dimension 2/2, \
              so the order-2 compound (m = 6) carries the flow. The documented rectangle \
              [-2,-0.4]x[-i,i] contains the clean branch of the absolute spectrum: the real \
              segment left of (-3+sqrt(2))/2. Dirichlet spectrum: eig(J - k_n^2 B) over \
              k_n = n pi / (2 ell).",
    })
}

fn periodic_adv_diff(c: f64) -> Result<BuiltinProblem> {
    let consts = real_consts(&[("c", c)]);
    let fam = MatrixFamily::parse(&[vec!["0", "1"], vec!["lambda", "-c"]], &consts)?;
    let domain = ParameterDomain::rect(-60.0, 20.0, -30.0, 30.0, 64)?;
    let profile = CoefficientProfile::new(
        format!("periodic-adv-diff(c={c})"),
        1.0,
        ProfileKind::PeriodicAsymptotic,
        fam.clone(),
        fam.clone(),
        fam,
        domain,
        consts,
        &Tolerances::default(),
    )?;
    // disk center on the dispersion parabola lambda = -k^2 + i c k
    let (center, radius, att_center, att_radius, att_sample) = if c == 0.0 {
        (Complex64::new(-1.0, 0.0), 0.45, Complex64::new(-1.0, 0.0), 0.45, 0.42)
    } else {
        (
            Complex64::new(-1.0, c),
            0.3,
            Complex64::new(-0.25 * c * c, 0.5 * c),
            0.45,
            0.42,
        )
    };
    let documented_domain = ParameterDomain::rect(-4.0, 1.0, -2.0, 2.0 + c.abs(), 64)?;
    Ok(BuiltinProblem {
        name: format!("periodic-adv-diff(c={c})"),
        profile,
        boundary: dirichlet_boundary_2(),
        side: Side::Zero,
        default_disk: (center, radius),
        attractor_disk: AttractorDisk {
            center: att_center,
            radius: att_radius,
            sample_radius: att_sample,
            b1_window: (std::f64::consts::FRAC_PI_4 - 0.5, std::f64::consts::FRAC_PI_4 + 0.3),
            b2_antipodal: true,
        },
        documented_domain,
        oracle: Oracle::PeriodicAdvDiff { c },
        doc: "Scalar advection-diffusion tail under periodic boundary conditions. The \
              asymptotic essential spectrum is the parabola lambda = -k^2 + i c k; \
              gamma-eigenvalues sit at k = (arg gamma + 2 pi n) / (2 ell).",
    })
}

/// Names accepted by [`builtin`].
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("adv-diff", "scalar advection-diffusion tails, separated boundary conditions (param c, default 2)"),
        ("adv-diff-front", "tanh front between two advection speeds (params c_minus, c_plus; defaults 3, 2)"),
        ("two-component", "4-dimensional two-component system, order-2 compound flow"),
        ("periodic-adv-diff", "scalar tail under periodic boundary conditions (param c, default 1)"),
    ]
}

/// Construct a built-in problem by name with optional parameter overrides.
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<BuiltinProblem> {
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        "adv-diff" => adv_diff(get("c", 2.0)),
        "adv-diff-front" => adv_diff_front(get("c_minus", 3.0), get("c_plus", 2.0)),
        "two-component" => two_component(),
        "periodic-adv-diff" => periodic_adv_diff(get("c", 1.0)),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// Parse a problem spec: either `builtin:<name>[,key=value...]` or a path to
/// a problem file.
pub fn load_spec(spec: &str, tol: &Tolerances) -> Result<(CoefficientProfile, BoundaryData, Option<BuiltinProblem>)> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        let mut parts = rest.split(',');
        let name = parts.next().unwrap_or("");
        let mut params = BTreeMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::Parse {
                context: spec.to_string(),
                line: 1,
                column: 1,
                message: format!("malformed parameter '{p}', expected key=value"),
            })?;
            let value: f64 = v.parse().map_err(|_| Error::Parse {
                context: spec.to_string(),
                line: 1,
                column: 1,
                message: format!("parameter '{k}' is not a number: '{v}'"),
            })?;
            params.insert(k.to_string(), value);
        }
        let b = builtin(name, &params)?;
        Ok((b.profile.clone(), b.boundary.clone(), Some(b)))
    } else {
        let (profile, boundary) = load_problem(spec, tol)?;
        Ok((profile, boundary, None))
    }
}

/// Load and validate a problem file.
pub fn load_problem(path: &str, tol: &Tolerances) -> Result<(CoefficientProfile, BoundaryData)> {
    let raw = std::fs::read_to_string(path)?;
    parse_problem_text(&raw, path, tol)
}

#[cfg(test)]
mod tests;
