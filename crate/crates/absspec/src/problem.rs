//! The spectral problem: coefficient family A(x;lambda), boundary subspaces,
//! parameter domain, and validation of the structural requirements that the
//! locus tracing and counting machinery relies on.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::linalg::{
    eig_sorted, intersection_dimension, span_margin, spans_ambient, ComplexMatrix, Subspace, ONE,
};

/// A square matrix family whose entries are expressions in x and lambda.
#[derive(Debug, Clone)]
pub struct MatrixFamily {
    n: usize,
    entries: Vec<Expr>,
}

impl MatrixFamily {
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "matrix family needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(MatrixFamily { n, entries })
    }

    /// Parse an n x n grid of expression strings.
    pub fn parse(
        rows: &[Vec<&str>],
        consts: &BTreeMap<String, Complex64>,
    ) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch(format!("row {i} has {} entries, need {n}", row.len())));
            }
            for (j, text) in row.iter().enumerate() {
                let e = expr::parse(text, consts).map_err(|err| Error::Parse {
                    context: format!("matrix entry ({i},{j})"),
                    line: 1,
                    column: err.column,
                    message: err.message,
                })?;
                entries.push(e);
            }
        }
        Ok(MatrixFamily { n, entries })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: f64, lambda: Complex64) -> ComplexMatrix {
        let data: Vec<Complex64> = self.entries.iter().map(|e| e.eval(x, lambda)).collect();
        ComplexMatrix::new(self.n, self.n, data).expect("matrix family produced non-finite entry")
    }

    pub fn depends_on_x(&self) -> bool {
        self.entries.iter().any(|e| e.depends_on_x())
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }
}

/// Shape of the coefficient family outside the compact middle interval.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Constant tails A_-(lambda), A_+(lambda); separated boundary conditions.
    SeparatedAsymptotic,
    /// Constant and equal tails A_0(lambda); periodic boundary conditions.
    PeriodicAsymptotic,
    /// x-periodic tails; spectra come from monodromy over one period.
    PeriodicTail { period_minus: f64, period_plus: f64 },
}

/// The family A(x;lambda): constant (or x-periodic) tails outside
/// [-ell0, ell0] and a smooth middle, evaluable at any (x, lambda) in the
/// declared parameter domain.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    pub name: String,
    pub dim: usize,
    pub ell0: f64,
    pub kind: ProfileKind,
    left: MatrixFamily,
    right: MatrixFamily,
    middle: MatrixFamily,
    pub domain: ParameterDomain,
    pub constants: BTreeMap<String, Complex64>,
    middle_constant_in_x: bool,
}

impl CoefficientProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        ell0: f64,
        kind: ProfileKind,
        left: MatrixFamily,
        right: MatrixFamily,
        middle: MatrixFamily,
        domain: ParameterDomain,
        constants: BTreeMap<String, Complex64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = left.dim();
        if right.dim() != dim || middle.dim() != dim {
            return Err(Error::ShapeMismatch("tail and middle dimensions differ".into()));
        }
        if !(ell0 > 0.0) {
            return Err(Error::Hypothesis("ell0 must be positive".into()));
        }
        let middle_constant_in_x = !middle.depends_on_x();
        let profile = CoefficientProfile {
            name: name.into(),
            dim,
            ell0,
            kind,
            left,
            right,
            middle,
            domain,
            constants,
            middle_constant_in_x,
        };
        profile.check_seams(tol)?;
        profile.check_periodic_tails_equal(tol)?;
        Ok(profile)
    }

    /// Seam continuity: middle(+-ell0) must match the tails there.
    fn check_seams(&self, tol: &Tolerances) -> Result<()> {
        for lambda in self.domain.probe_points() {
            for (seam, tail) in [(-self.ell0, &self.left), (self.ell0, &self.right)] {
                let m = self.middle.eval(seam, lambda);
                let t = tail.eval(seam, lambda);
                let scale = 1.0 + t.max_abs();
                let dev = m.sub(&t)?.max_abs();
                if dev > tol.seam * scale {
                    return Err(Error::Continuity { seam, deviation: dev });
                }
            }
        }
        Ok(())
    }

    /// The periodic-asymptotic kind promises A_- = A_+.
    fn check_periodic_tails_equal(&self, tol: &Tolerances) -> Result<()> {
        if self.kind != ProfileKind::PeriodicAsymptotic {
            return Ok(());
        }
        for lambda in self.domain.probe_points() {
            let l = self.left.eval(self.ell0, lambda);
            let r = self.right.eval(self.ell0, lambda);
            if l.sub(&r)?.max_abs() > tol.seam * (1.0 + r.max_abs()) {
                return Err(Error::Hypothesis(
                    "periodic-asymptotic profile has unequal tails".into(),
                ));
            }
        }
        Ok(())
    }

    /// A(x; lambda). Tail evaluations are bit-identical to the tail family.
    pub fn evaluate(&self, x: f64, lambda: Complex64) -> Result<ComplexMatrix> {
        if !self.domain.contains(lambda) {
            return Err(Error::DomainViolation(format!(
                "lambda = {lambda} outside domain of '{}'",
                self.name
            )));
        }
        Ok(self.evaluate_unchecked(x, lambda))
    }

    /// Evaluation without the domain check, for inner loops that verified
    /// containment up front.
    pub fn evaluate_unchecked(&self, x: f64, lambda: Complex64) -> ComplexMatrix {
        if x <= -self.ell0 {
            self.left.eval(x, lambda)
        } else if x >= self.ell0 {
            self.right.eval(x, lambda)
        } else {
            self.middle.eval(x, lambda)
        }
    }

    pub fn left_tail(&self, lambda: Complex64) -> ComplexMatrix {
        self.left.eval(-self.ell0, lambda)
    }

    pub fn right_tail(&self, lambda: Complex64) -> ComplexMatrix {
        self.right.eval(self.ell0, lambda)
    }

    /// True when the whole profile is constant in x (tails constant and
    /// middle matching them), so propagation can use exponentials end to end.
    pub fn constant_in_x(&self) -> bool {
        match self.kind {
            ProfileKind::PeriodicTail { .. } => false,
            _ => self.middle_constant_in_x && !self.left.depends_on_x() && !self.right.depends_on_x(),
        }
    }

    pub fn middle_constant_in_x(&self) -> bool {
        self.middle_constant_in_x
    }

    pub fn families(&self) -> (&MatrixFamily, &MatrixFamily, &MatrixFamily) {
        (&self.left, &self.right, &self.middle)
    }
}

/// Boundary subspaces U_- and U_+ with dim U_- + dim U_+ = N and
/// dim U_- <= dim U_+.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub left: Subspace,
    pub right: Subspace,
}

impl BoundaryData {
    pub fn new(left: Subspace, right: Subspace) -> Result<Self> {
        if left.ambient_dim() != right.ambient_dim() {
            return Err(Error::ShapeMismatch("boundary subspaces in different ambient spaces".into()));
        }
        let n = left.ambient_dim();
        let (im, ip) = (left.dim(), right.dim());
        if im + ip != n {
            return Err(Error::Hypothesis(format!(
                "boundary dimensions must sum to the system dimension: {im} + {ip} != {n}"
            )));
        }
        if im > ip {
            return Err(Error::Hypothesis(format!(
                "left boundary dimension must not exceed the right one: {im} > {ip}"
            )));
        }
        Ok(BoundaryData { left, right })
    }

    pub fn i_minus(&self) -> usize {
        self.left.dim()
    }

    pub fn i_plus(&self) -> usize {
        self.right.dim()
    }
}

/// Rectangle or disk in the complex lambda-plane with a grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum ParameterDomain {
    Rect { re: (f64, f64), im: (f64, f64), resolution: usize },
    Disk { center: Complex64, radius: f64, resolution: usize },
}

impl ParameterDomain {
    pub fn rect(re0: f64, re1: f64, im0: f64, im1: f64, resolution: usize) -> Result<Self> {
        if !(re1 > re0 && im1 > im0) {
            return Err(Error::Hypothesis("parameter rectangle has empty interior".into()));
        }
        if resolution < 8 {
            return Err(Error::Hypothesis("domain resolution must be at least 8".into()));
        }
        Ok(ParameterDomain::Rect { re: (re0, re1), im: (im0, im1), resolution })
    }

    pub fn disk(center: Complex64, radius: f64, resolution: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Hypothesis("parameter disk has empty interior".into()));
        }
        if resolution < 8 {
            return Err(Error::Hypothesis("domain resolution must be at least 8".into()));
        }
        Ok(ParameterDomain::Disk { center, radius, resolution })
    }

    pub fn resolution(&self) -> usize {
        match self {
            ParameterDomain::Rect { resolution, .. } | ParameterDomain::Disk { resolution, .. } => {
                *resolution
            }
        }
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        const SLACK: f64 = 1e-9;
        match self {
            ParameterDomain::Rect { re, im, .. } => {
                lambda.re >= re.0 - SLACK
                    && lambda.re <= re.1 + SLACK
                    && lambda.im >= im.0 - SLACK
                    && lambda.im <= im.1 + SLACK
            }
            ParameterDomain::Disk { center, radius, .. } => {
                (lambda - center).norm() <= radius + SLACK
            }
        }
    }

    /// Bounding box (re0, re1, im0, im1).
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match self {
            ParameterDomain::Rect { re, im, .. } => (re.0, re.1, im.0, im.1),
            ParameterDomain::Disk { center, radius, .. } => (
                center.re - radius,
                center.re + radius,
                center.im - radius,
                center.im + radius,
            ),
        }
    }

    /// A handful of deterministic points for construction-time checks.
    pub fn probe_points(&self) -> Vec<Complex64> {
        self.sample_halton(5)
    }

    /// Prefix-stable low-discrepancy samples inside the domain: the first k
    /// samples of a larger request coincide with a smaller request's.
    pub fn sample_halton(&self, count: usize) -> Vec<Complex64> {
        let (re0, re1, im0, im1) = self.bounds();
        let mut out = Vec::with_capacity(count);
        let mut index = 1usize;
        while out.len() < count && index < 1_000_000 {
            let u = halton(index, 2);
            let v = halton(index, 3);
            index += 1;
            let z = Complex64::new(re0 + (re1 - re0) * u, im0 + (im1 - im0) * v);
            if self.contains(z) {
                out.push(z);
            }
        }
        out
    }
}

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarFile {
    Real(f64),
    Pair([f64; 2]),
}

impl ScalarFile {
    fn to_complex(&self) -> Complex64 {
        match self {
            ScalarFile::Real(x) => Complex64::new(*x, 0.0),
            ScalarFile::Pair([re, im]) => Complex64::new(*re, *im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum EntryFile {
    Real(f64),
    Pair([f64; 2]),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TailPeriods {
    period_minus: f64,
    period_plus: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum KindFile {
    Named(String),
    Tail {
        #[serde(rename = "periodic-tail")]
        periodic_tail: TailPeriods,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum DomainFile {
    Rect { re: [f64; 2], im: [f64; 2], resolution: usize },
    Disk { center: [f64; 2], radius: f64, resolution: usize },
}

/// On-disk problem description. Matrices are arrays of entry expressions;
/// complex scalars are written as [re, im].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    name: String,
    #[serde(rename = "N")]
    n: usize,
    ell0: f64,
    kind: KindFile,
    #[serde(default)]
    constants: BTreeMap<String, ScalarFile>,
    #[serde(rename = "A_minus")]
    a_minus: Vec<Vec<EntryFile>>,
    #[serde(rename = "A_plus")]
    a_plus: Vec<Vec<EntryFile>>,
    middle: Vec<Vec<EntryFile>>,
    #[serde(rename = "U_minus")]
    u_minus: Vec<Vec<ScalarFile>>,
    #[serde(rename = "U_plus")]
    u_plus: Vec<Vec<ScalarFile>>,
    domain: DomainFile,
}

/// Locate a needle inside raw text, 1-based (line, column); best effort for
/// diagnostics on semantically invalid fields.
fn locate(raw: &str, needle: &str) -> (usize, usize) {
    if let Some(pos) = raw.find(needle) {
        let prefix = &raw[..pos];
        let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
        let col = pos - prefix.rfind('\n').map_or(0, |p| p + 1) + 1;
        (line, col)
    } else {
        (0, 0)
    }
}

fn parse_matrix(
    rows: &[Vec<EntryFile>],
    n: usize,
    field: &str,
    raw: &str,
    consts: &BTreeMap<String, Complex64>,
) -> Result<MatrixFamily> {
    if rows.len() != n {
        let (line, column) = locate(raw, field);
        return Err(Error::Parse {
            context: field.to_string(),
            line,
            column,
            message: format!("expected {n} rows, got {}", rows.len()),
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            let (line, column) = locate(raw, field);
            return Err(Error::Parse {
                context: format!("{field}[{i}]"),
                line,
                column,
                message: format!("expected {n} entries, got {}", row.len()),
            });
        }
        for (j, entry) in row.iter().enumerate() {
            let e = match entry {
                EntryFile::Real(x) => Expr::Num(Complex64::new(*x, 0.0)),
                EntryFile::Pair([re, im]) => Expr::Num(Complex64::new(*re, *im)),
                EntryFile::Text(text) => expr::parse(text, consts).map_err(|err| {
                    let (line, column) = locate(raw, text);
                    Error::Parse {
                        context: format!("{field}[{i}][{j}]"),
                        line,
                        column: if column > 0 { column + err.column - 1 } else { err.column },
                        message: err.message,
                    }
                })?,
            };
            entries.push(e);
        }
    }
    MatrixFamily::new(n, entries)
}

fn parse_subspace(
    vectors: &[Vec<ScalarFile>],
    n: usize,
    field: &str,
    raw: &str,
    tol: &Tolerances,
) -> Result<Subspace> {
    if vectors.is_empty() || vectors.len() > n {
        let (line, column) = locate(raw, field);
        return Err(Error::Parse {
            context: field.to_string(),
            line,
            column,
            message: format!("need between 1 and {n} basis vectors, got {}", vectors.len()),
        });
    }
    let k = vectors.len();
    let mut span = ComplexMatrix::zeros(n, k);
    for (j, vecj) in vectors.iter().enumerate() {
        if vecj.len() != n {
            let (line, column) = locate(raw, field);
            return Err(Error::Parse {
                context: format!("{field}[{j}]"),
                line,
                column,
                message: format!("vector has {} entries, need {n}", vecj.len()),
            });
        }
        for (i, s) in vecj.iter().enumerate() {
            span[(i, j)] = s.to_complex();
        }
    }
    Subspace::from_columns(&span, tol)
}

/// Parse and validate a problem file's raw JSON text.
pub fn parse_problem_text(
    raw: &str,
    context: &str,
    tol: &Tolerances,
) -> Result<(CoefficientProfile, BoundaryData)> {
    let file: ProblemFile = serde_json::from_str(raw).map_err(|e| Error::Parse {
        context: context.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let consts: BTreeMap<String, Complex64> =
        file.constants.iter().map(|(k, v)| (k.clone(), v.to_complex())).collect();
    let n = file.n;
    if n == 0 {
        let (line, column) = locate(raw, "\"N\"");
        return Err(Error::Parse {
            context: context.to_string(),
            line,
            column,
            message: "system dimension N must be positive".into(),
        });
    }
    let kind = match &file.kind {
        KindFile::Named(s) => match s.as_str() {
            "separated-asymptotic" => ProfileKind::SeparatedAsymptotic,
            "periodic-asymptotic" => ProfileKind::PeriodicAsymptotic,
            other => {
                let (line, column) = locate(raw, other);
                return Err(Error::Parse {
                    context: context.to_string(),
                    line,
                    column,
                    message: format!(
                        "unknown kind '{other}' (expected separated-asymptotic, periodic-asymptotic, or periodic-tail)"
                    ),
                });
            }
        },
        KindFile::Tail { periodic_tail } => ProfileKind::PeriodicTail {
            period_minus: periodic_tail.period_minus,
            period_plus: periodic_tail.period_plus,
        },
    };
    let a_minus = parse_matrix(&file.a_minus, n, "A_minus", raw, &consts)?;
    let a_plus = parse_matrix(&file.a_plus, n, "A_plus", raw, &consts)?;
    let middle = parse_matrix(&file.middle, n, "middle", raw, &consts)?;
    let domain = match &file.domain {
        DomainFile::Rect { re, im, resolution } => {
            ParameterDomain::rect(re[0], re[1], im[0], im[1], *resolution)?
        }
        DomainFile::Disk { center, radius, resolution } => {
            ParameterDomain::disk(Complex64::new(center[0], center[1]), *radius, *resolution)?
        }
    };
    let left = parse_subspace(&file.u_minus, n, "U_minus", raw, tol)?;
    let right = parse_subspace(&file.u_plus, n, "U_plus", raw, tol)?;
    let boundary = BoundaryData::new(left, right)?;
    let profile = CoefficientProfile::new(
        file.name.clone(),
        file.ell0,
        kind,
        a_minus,
        a_plus,
        middle,
        domain,
        consts,
        tol,
    )?;
    Ok((profile, boundary))
}

fn matrix_to_file(fam: &MatrixFamily) -> Vec<Vec<EntryFile>> {
    let n = fam.dim();
    (0..n)
        .map(|i| (0..n).map(|j| EntryFile::Text(fam.entry(i, j).canonical())).collect())
        .collect()
}

fn subspace_to_file(s: &Subspace) -> Vec<Vec<ScalarFile>> {
    (0..s.dim())
        .map(|j| {
            (0..s.ambient_dim())
                .map(|i| {
                    let z = s.frame()[(i, j)];
                    ScalarFile::Pair([z.re, z.im])
                })
                .collect()
        })
        .collect()
}

/// Serialize a problem back to the file schema. Expressions are written in
/// canonical form with constants substituted, so loading the result gives
/// identical evaluations.
pub fn problem_to_json(profile: &CoefficientProfile, boundary: &BoundaryData) -> String {
    let (left, right, middle) = profile.families();
    let kind = match &profile.kind {
        ProfileKind::SeparatedAsymptotic => KindFile::Named("separated-asymptotic".into()),
        ProfileKind::PeriodicAsymptotic => KindFile::Named("periodic-asymptotic".into()),
        ProfileKind::PeriodicTail { period_minus, period_plus } => KindFile::Tail {
            periodic_tail: TailPeriods { period_minus: *period_minus, period_plus: *period_plus },
        },
    };
    let domain = match &profile.domain {
        ParameterDomain::Rect { re, im, resolution } => DomainFile::Rect {
            re: [re.0, re.1],
            im: [im.0, im.1],
            resolution: *resolution,
        },
        ParameterDomain::Disk { center, radius, resolution } => DomainFile::Disk {
            center: [center.re, center.im],
            radius: *radius,
            resolution: *resolution,
        },
    };
    let file = ProblemFile {
        name: profile.name.clone(),
        n: profile.dim,
        ell0: profile.ell0,
        kind,
        constants: BTreeMap::new(),
        a_minus: matrix_to_file(left),
        a_plus: matrix_to_file(right),
        middle: matrix_to_file(middle),
        u_minus: subspace_to_file(&boundary.left),
        u_plus: subspace_to_file(&boundary.right),
        domain,
    };
    serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
}

/// Stable fingerprint of a problem: FNV-1a over the canonical serialization.
pub fn problem_hash(profile: &CoefficientProfile, boundary: &BoundaryData) -> u64 {
    expr::fnv1a(problem_to_json(profile, boundary).as_bytes())
}

// ---------------------------------------------------------------------------
// Hypothesis validation
// ---------------------------------------------------------------------------

/// Per-sample outcome of the structural checks.
#[derive(Debug, Clone)]
pub struct HypothesisSample {
    pub lambda: Complex64,
    /// sigma_min of [Ebar_+ | U_+]; full span of the ambient space when > 0.
    pub sum_margin_plus: f64,
    pub sum_margin_minus: f64,
    pub intersect_plus: usize,
    pub intersect_minus: usize,
    /// Eigenvalue clusters blocked one of the invariant-subspace splits.
    pub cluster_flag: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub samples: Vec<HypothesisSample>,
    pub failures: usize,
    pub flagged: usize,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// Check, over `sample_count` low-discrepancy points of the domain, that the
/// leading invariant subspaces of the tails together with the boundary
/// subspaces span the ambient space, and that each meets its boundary
/// subspace in exactly one dimension. For the periodic kind the same checks
/// run on the doubled system's center-plus-crossing subspace.
pub fn validate_hypotheses(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    domain: &ParameterDomain,
    sample_count: usize,
    tol: &Tolerances,
) -> HypothesisReport {
    let lambdas = domain.sample_halton(sample_count);
    let periodic = matches!(profile.kind, ProfileKind::PeriodicAsymptotic);
    let samples: Vec<HypothesisSample> = lambdas
        .into_iter()
        .map(|lambda| {
            if periodic {
                periodic_sample(profile, lambda, tol)
            } else {
                separated_sample(profile, boundary, lambda, tol)
            }
        })
        .collect();
    let failures = samples.iter().filter(|s| !s.pass).count();
    let flagged = samples.iter().filter(|s| s.cluster_flag).count();
    HypothesisReport { samples, failures, flagged }
}

fn separated_sample(
    profile: &CoefficientProfile,
    boundary: &BoundaryData,
    lambda: Complex64,
    tol: &Tolerances,
) -> HypothesisSample {
    let (im, ip) = (boundary.i_minus(), boundary.i_plus());
    let gen_plus = crate::spectra::tail_generator(profile, crate::spectra::Side::Plus, lambda, tol);
    let gen_minus =
        crate::spectra::tail_generator(profile, crate::spectra::Side::Minus, lambda, tol);
    let mut cluster_flag = false;
    let mut sum_plus = 0.0;
    let mut sum_minus = 0.0;
    let mut spans_plus = false;
    let mut spans_minus = false;
    let mut int_plus = 0;
    let mut int_minus = 0;
    match gen_plus.and_then(|g| g.leading_subspace(im + 1, tol)) {
        Ok(ebar_plus) => {
            sum_plus = span_margin(&ebar_plus, &boundary.right).unwrap_or(0.0);
            spans_plus = spans_ambient(&ebar_plus, &boundary.right, tol.rank_rel).unwrap_or(false);
            int_plus = intersection_dimension(&ebar_plus, &boundary.right, tol.on_locus)
                .unwrap_or(usize::MAX);
        }
        Err(Error::ClusterSplit { .. }) => cluster_flag = true,
        Err(_) => {}
    }
    match gen_minus.and_then(|g| g.leading_subspace(ip + 1, tol)) {
        Ok(ebar_minus) => {
            sum_minus = span_margin(&ebar_minus, &boundary.left).unwrap_or(0.0);
            spans_minus = spans_ambient(&ebar_minus, &boundary.left, tol.rank_rel).unwrap_or(false);
            int_minus = intersection_dimension(&ebar_minus, &boundary.left, tol.on_locus)
                .unwrap_or(usize::MAX);
        }
        Err(Error::ClusterSplit { .. }) => cluster_flag = true,
        Err(_) => {}
    }
    let pass = !cluster_flag && spans_plus && spans_minus && int_plus == 1 && int_minus == 1;
    HypothesisSample {
        lambda,
        sum_margin_plus: sum_plus,
        sum_margin_minus: sum_minus,
        intersect_plus: int_plus,
        intersect_minus: int_minus,
        cluster_flag,
        pass,
    }
}

/// Doubled-system checks: Ebar_0 spans the crossing eigendirection plus the
/// constant block, U_- is the diagonal subspace.
fn periodic_sample(
    profile: &CoefficientProfile,
    lambda: Complex64,
    tol: &Tolerances,
) -> HypothesisSample {
    let n = profile.dim;
    let fail = |cluster_flag| HypothesisSample {
        lambda,
        sum_margin_plus: 0.0,
        sum_margin_minus: 0.0,
        intersect_plus: 0,
        intersect_minus: 0,
        cluster_flag,
        pass: false,
    };
    let a0 = profile.right_tail(lambda);
    let spec = match eig_sorted(&a0, tol) {
        Ok(s) => s,
        Err(_) => return fail(true),
    };
    // crossing branch: smallest |Re|
    let k = (0..n)
        .min_by(|&a, &b| spec.values[a].re.abs().partial_cmp(&spec.values[b].re.abs()).unwrap())
        .unwrap();
    let mu_k = spec.values[k];
    let scale = 1.0 + a0.norm_inf();
    // the doubled construction needs an invertible A_0 and a simple branch
    if mu_k.norm() <= tol.cluster_rel * scale {
        return fail(true);
    }
    if spec.values.iter().enumerate().any(|(j, &v)| j != k && (v - mu_k).norm() <= tol.cluster_rel * scale)
    {
        return fail(true);
    }
    let dec = match crate::linalg::schur(&a0) {
        Ok(d) => d,
        Err(_) => return fail(true),
    };
    let vk = crate::linalg::eigvec_from_schur(&dec, spec.schur_positions[k]);
    // Ebar_0 = span{(v_k, 0)} + {0} x C^N, orthonormal by construction.
    let mut frame = ComplexMatrix::zeros(2 * n, n + 1);
    for i in 0..n {
        frame[(i, 0)] = vk[i];
        frame[(n + i, i + 1)] = ONE;
    }
    let ebar0 = match Subspace::from_orthonormal(frame, tol) {
        Ok(s) => s,
        Err(_) => return fail(false),
    };
    let u = diagonal_subspace(n, ONE);
    let sum = span_margin(&ebar0, &u).unwrap_or(0.0);
    let spans = spans_ambient(&ebar0, &u, tol.rank_rel).unwrap_or(false);
    let inter = intersection_dimension(&ebar0, &u, tol.on_locus).unwrap_or(usize::MAX);
    let pass = spans && inter == 1;
    HypothesisSample {
        lambda,
        sum_margin_plus: sum,
        sum_margin_minus: sum,
        intersect_plus: inter,
        intersect_minus: inter,
        cluster_flag: false,
        pass,
    }
}

/// Frame of the twisted diagonal subspace {(gamma Y, Y)} in C^{2N}.
pub fn diagonal_subspace(n: usize, gamma: Complex64) -> Subspace {
    let mut frame = ComplexMatrix::zeros(2 * n, n);
    let s = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
    for i in 0..n {
        frame[(i, i)] = gamma * s;
        frame[(n + i, i)] = s;
    }
    Subspace::from_orthonormal(frame, &Tolerances::default())
        .expect("twisted diagonal frame is orthonormal")
}
