//! Lagrangian contact problems in the standard symplectic space (ℝ²ⁿ, ω):
//! two Lagrangian submanifolds meeting in an isolated point, an affine
//! Darboux frame normalizing the reference manifold to the zero section, and
//! the computation of generating functions and families whose stable
//! right-equivalence class is the invariant of the problem.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_reduced, stably_right_equivalent_with, ClassifyOptions, EquivalenceReason,
    EquivalenceVerdict,
};
use crate::error::{Error, Result};
use crate::jet::{Jet, MultiIndex};
use crate::linalg::{gauss_legendre, standard_symplectic_matrix};
use crate::oracle::jet_from_oracle;
use crate::splitting::split_family;

/// Jet degree used by equivalence deciders when the caller does not pick one.
pub const DEFAULT_JET_DEGREE: usize = 5;

/// Classifier tolerance for jets obtained by sampling rather than exact
/// algebra; matches the finite-difference estimation error.
pub fn sampled_classify_options() -> ClassifyOptions {
    ClassifyOptions {
        zero_tol: 1e-5,
        ..ClassifyOptions::default()
    }
}

/// An affine symplectic map `p ↦ M p + offset` of (ℝ²ⁿ, ω).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineSymplectic {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl AffineSymplectic {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim % 2 != 0 || matrix.ncols() != dim || offset.len() != dim {
            return Err(Error::InvalidInput(
                "affine symplectic map needs a square even-dimensional matrix".into(),
            ));
        }
        let defect = crate::linalg::symplectic_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "matrix is not symplectic: defect {defect:.3e}"
            )));
        }
        Ok(AffineSymplectic {
            matrix: (0..dim)
                .map(|i| (0..dim).map(|j| matrix[(i, j)]).collect())
                .collect(),
            offset: offset.iter().copied().collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        AffineSymplectic {
            matrix: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            offset: vec![0.0; dim],
        }
    }

    /// Translation `p ↦ p − z` (symplectic for any z).
    pub fn translation_to_origin(z: &[f64]) -> Self {
        AffineSymplectic {
            matrix: (0..z.len())
                .map(|i| (0..z.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            offset: z.iter().map(|v| -v).collect(),
        }
    }

    /// Fibre shear `(x, ξ) ↦ (x + S ξ, ξ)` for symmetric S; fixes the zero
    /// section pointwise and tilts the fibres.
    pub fn fibre_shear(s: &DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        if (s - s.transpose()).iter().any(|v| v.abs() > 1e-12) {
            return Err(Error::InvalidInput("shear matrix must be symmetric".into()));
        }
        let mut m = DMatrix::identity(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(s);
        AffineSymplectic::new(m, DVector::zeros(2 * n))
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.matrix[i][j])
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.offset.clone();
        for (i, row) in self.matrix.iter().enumerate().take(d) {
            for (j, m) in row.iter().enumerate() {
                out[i] += m * p[j];
            }
        }
        out
    }

    /// Composition `self ∘ inner`.
    pub fn compose(&self, inner: &AffineSymplectic) -> Result<AffineSymplectic> {
        let m = self.matrix() * inner.matrix();
        let b = self.matrix() * DVector::from_column_slice(&inner.offset)
            + DVector::from_column_slice(&self.offset);
        AffineSymplectic::new(m, b)
    }

    /// Inverse map, using `M⁻¹ = −J Mᵀ J` for symplectic M.
    pub fn inverse(&self) -> AffineSymplectic {
        let d = self.dim();
        let j = standard_symplectic_matrix(d / 2);
        let m_inv = -(&j) * self.matrix().transpose() * &j;
        let b = -(&m_inv) * DVector::from_column_slice(&self.offset);
        AffineSymplectic {
            matrix: (0..d)
                .map(|i| (0..d).map(|jj| m_inv[(i, jj)]).collect())
                .collect(),
            offset: b.iter().copied().collect(),
        }
    }
}

/// The Lagrangian coordinate plane a potential graph sits over: for indices
/// in `momentum_axes` the plane uses the ξ-axis instead of the x-axis.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BasePlane {
    pub momentum_axes: Vec<usize>,
}

impl BasePlane {
    pub fn horizontal() -> Self {
        BasePlane {
            momentum_axes: vec![],
        }
    }
}

/// Chart map: parameters near 0 to points of the manifold near `z`.
pub type ChartFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// One Lagrangian submanifold, either as the graph of a potential over a
/// Lagrangian coordinate plane or as a sampled chart.
#[derive(Clone)]
pub enum LagrangianSpec {
    PotentialGraph { potential: Jet, base: BasePlane },
    ImplicitSampler { dim: usize, chart: ChartFn },
}

impl fmt::Debug for LagrangianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagrangianSpec::PotentialGraph { potential, .. } => f
                .debug_struct("PotentialGraph")
                .field("nvars", &potential.nvars())
                .field("degree", &potential.degree())
                .finish(),
            LagrangianSpec::ImplicitSampler { dim, .. } => f
                .debug_struct("ImplicitSampler")
                .field("dim", dim)
                .finish(),
        }
    }
}

impl Serialize for LagrangianSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LagrangianSpec::PotentialGraph { potential, base } => {
                let mut st = serializer.serialize_struct("LagrangianSpec", 3)?;
                st.serialize_field("kind", "potential_graph")?;
                st.serialize_field("potential", potential)?;
                st.serialize_field("base", base)?;
                st.end()
            }
            LagrangianSpec::ImplicitSampler { .. } => Err(serde::ser::Error::custom(
                "sampled Lagrangian specs have no serialized form",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for LagrangianSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            kind: String,
            potential: Jet,
            base: BasePlane,
        }
        let repr = Repr::deserialize(deserializer)?;
        if repr.kind != "potential_graph" {
            return Err(serde::de::Error::custom(format!(
                "unsupported Lagrangian kind {:?}",
                repr.kind
            )));
        }
        Ok(LagrangianSpec::PotentialGraph {
            potential: repr.potential,
            base: repr.base,
        })
    }
}

impl LagrangianSpec {
    /// Zero section of the standard structure.
    pub fn zero_section(n: usize, degree: usize) -> Self {
        LagrangianSpec::PotentialGraph {
            potential: Jet::zero(n, degree),
            base: BasePlane::horizontal(),
        }
    }

    /// Graph of `d(potential)` over the horizontal plane.
    pub fn graph(potential: Jet) -> Self {
        LagrangianSpec::PotentialGraph {
            potential,
            base: BasePlane::horizontal(),
        }
    }

    pub fn half_dim(&self) -> usize {
        match self {
            LagrangianSpec::PotentialGraph { potential, .. } => potential.nvars(),
            LagrangianSpec::ImplicitSampler { dim, .. } => *dim,
        }
    }

    /// Chart map of the manifold in ambient coordinates.
    pub fn chart(&self) -> ChartFn {
        match self {
            LagrangianSpec::PotentialGraph { potential, base } => {
                let potential = potential.clone();
                let momentum: Vec<bool> = {
                    let n = potential.nvars();
                    let mut mask = vec![false; n];
                    for &i in &base.momentum_axes {
                        mask[i] = true;
                    }
                    mask
                };
                Arc::new(move |s: &[f64]| {
                    let n = potential.nvars();
                    let mut point = vec![0.0; 2 * n];
                    let grads: Vec<f64> = (0..n).map(|i| potential.partial(i).eval(s)).collect();
                    for i in 0..n {
                        if momentum[i] {
                            point[n + i] = s[i];
                            point[i] = -grads[i];
                        } else {
                            point[i] = s[i];
                            point[n + i] = grads[i];
                        }
                    }
                    point
                })
            }
            LagrangianSpec::ImplicitSampler { chart, .. } => chart.clone(),
        }
    }

    /// Pushes the manifold forward through an affine symplectic map.
    pub fn transformed(&self, map: &AffineSymplectic) -> LagrangianSpec {
        let chart = self.chart();
        let map = map.clone();
        let dim = self.half_dim();
        LagrangianSpec::ImplicitSampler {
            dim,
            chart: Arc::new(move |s: &[f64]| map.apply(&chart(s))),
        }
    }

    /// Largest sampled ω-pairing of two estimated tangent vectors; a genuine
    /// Lagrangian chart keeps this at round-off level.
    pub fn lagrangian_defect(&self) -> f64 {
        let n = self.half_dim();
        let chart = self.chart();
        let h = 1e-4;
        let sample_params: Vec<Vec<f64>> = {
            let mut pts = vec![vec![0.0; n]];
            for i in 0..n {
                let mut p = vec![0.0; n];
                p[i] = 0.05;
                pts.push(p);
            }
            pts.push(vec![0.03; n]);
            pts
        };
        let mut defect = 0.0f64;
        for s in sample_params {
            let mut tangents = Vec::with_capacity(n);
            for i in 0..n {
                let mut plus = s.clone();
                let mut minus = s.clone();
                plus[i] += h;
                minus[i] -= h;
                let cp = chart(&plus);
                let cm = chart(&minus);
                let t: Vec<f64> = cp.iter().zip(&cm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
                tangents.push(t);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let mut omega = 0.0;
                    for k in 0..n {
                        omega += tangents[i][k] * tangents[j][n + k]
                            - tangents[i][n + k] * tangents[j][k];
                    }
                    let scale = norm(&tangents[i]) * norm(&tangents[j]);
                    defect = defect.max(omega.abs() / scale.max(1e-300));
                }
            }
        }
        defect
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A Lagrangian contact problem: the reference manifold `x`, the manifold
/// `lambda` meeting it at `z`, and the affine Darboux frame taking `z` to the
/// origin and `x` to the zero section.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContactProblem {
    pub x: LagrangianSpec,
    pub lambda: LagrangianSpec,
    pub z: Vec<f64>,
    pub frame: AffineSymplectic,
}

impl ContactProblem {
    pub fn new(
        x: LagrangianSpec,
        lambda: LagrangianSpec,
        z: Vec<f64>,
        frame: AffineSymplectic,
    ) -> Result<Self> {
        let n = x.half_dim();
        if lambda.half_dim() != n || z.len() != 2 * n || frame.dim() != 2 * n {
            return Err(Error::InvalidInput(
                "dimensions of the specs, base point and frame disagree".into(),
            ));
        }
        for (name, spec) in [("x", &x), ("lambda", &lambda)] {
            let at_zero = spec.chart()(&vec![0.0; n]);
            let dev = at_zero
                .iter()
                .zip(&z)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if dev > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "base point is off the {name} manifold by {dev:.3e}"
                )));
            }
            if let LagrangianSpec::ImplicitSampler { .. } = spec {
                let defect = spec.lagrangian_defect();
                if defect > 1e-8 {
                    return Err(Error::InvalidInput(format!(
                        "sampled {name} manifold is not Lagrangian: defect {defect:.3e}"
                    )));
                }
            }
        }
        let z_framed = frame.apply(&z);
        if z_framed.iter().any(|v| v.abs() > 1e-9) {
            return Err(Error::InvalidInput(
                "frame does not send the base point to the origin".into(),
            ));
        }
        // The frame must flatten x onto the zero section.
        let chart = x.chart();
        for probe in sample_params(n) {
            let framed = frame.apply(&chart(&probe));
            let fibre_norm = framed[n..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if fibre_norm > 1e-8 {
                return Err(Error::InvalidInput(format!(
                    "frame does not flatten the reference manifold (fibre residue {fibre_norm:.3e})"
                )));
            }
        }
        Ok(ContactProblem { x, lambda, z, frame })
    }

    /// Standard problem: X the zero section, Λ the graph of `d(potential)`,
    /// meeting at the origin, identity frame.
    pub fn standard(potential: Jet) -> Result<Self> {
        let n = potential.nvars();
        let scale = potential.max_coefficient().max(1.0);
        if potential.constant_term().abs() > 1e-12 * scale
            || potential
                .linear_part()
                .iter()
                .any(|c| c.abs() > 1e-12 * scale)
        {
            return Err(Error::InvalidInput(
                "standard problems need a potential with vanishing value and gradient at 0".into(),
            ));
        }
        let degree = potential.degree();
        ContactProblem::new(
            LagrangianSpec::zero_section(n, degree),
            LagrangianSpec::graph(potential),
            vec![0.0; 2 * n],
            AffineSymplectic::identity(2 * n),
        )
    }

    /// The image problem under an ambient affine symplectic map.
    pub fn transformed(&self, map: &AffineSymplectic) -> Result<ContactProblem> {
        ContactProblem::new(
            self.x.transformed(map),
            self.lambda.transformed(map),
            map.apply(&self.z),
            self.frame.compose(&map.inverse())?,
        )
    }
}

fn sample_params(n: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![];
    for i in 0..n {
        for v in [0.05, -0.07] {
            let mut p = vec![0.0; n];
            p[i] = v;
            pts.push(p);
        }
    }
    pts.push(vec![0.02; n]);
    pts
}

/// Generating function of the contact problem defined by two potentials over
/// the same reference manifold: the difference, constant-normalized.
pub fn generating_from_potentials(phi_lambda: &Jet, phi_x: &Jet) -> Result<Jet> {
    let mut diff = phi_lambda.sub(phi_x)?;
    diff.set_coefficient(&vec![0u32; diff.nvars()], 0.0);
    if diff.is_zero() {
        return Err(Error::NonIsolated);
    }
    let scale = diff.max_coefficient().max(1.0);
    let grad_norm = diff
        .linear_part()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    if grad_norm > 1e-9 * scale {
        return Err(Error::NoIntersection(grad_norm));
    }
    for i in 0..diff.nvars() {
        let mi = MultiIndex::unit(diff.nvars(), i);
        diff.set_coefficient(mi.exponents(), 0.0);
    }
    Ok(diff)
}

/// Newton solver presenting a chart as a section `ξ = g(x)` over the base of
/// the framed coordinates.
struct GraphSection {
    chart: ChartFn,
    frame: AffineSymplectic,
    n: usize,
    seed_matrix: DMatrix<f64>,
    /// Smallest relative singular value of the projection linearization; the
    /// graphicality margin of this frame.
    margin: f64,
}

impl GraphSection {
    fn new(chart: ChartFn, frame: AffineSymplectic, n: usize) -> Result<Self> {
        // Linearization of base ∘ chart at 0 for Newton seeding.
        let h = 1e-6;
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut plus = vec![0.0; n];
            let mut minus = vec![0.0; n];
            plus[j] += h;
            minus[j] -= h;
            let fp = frame.apply(&chart(&plus));
            let fm = frame.apply(&chart(&minus));
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let svd = jac.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
        let margin = if sigma_max > 0.0 { sigma_min / sigma_max } else { 0.0 };
        let seed_matrix = jac
            .try_inverse()
            .ok_or(Error::NotGraphicalAfterRetry)?;
        Ok(GraphSection {
            chart,
            frame,
            n,
            seed_matrix,
            margin,
        })
    }

    fn framed_point(&self, s: &[f64]) -> Vec<f64> {
        self.frame.apply(&(self.chart)(s))
    }

    /// Solves base(chart(s)) = x and returns the fibre part.
    fn fibre_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let xv = DVector::from_column_slice(x);
        let mut s = &self.seed_matrix * &xv;
        for _ in 0..60 {
            let p = self.framed_point(s.as_slice());
            let mut residual = DVector::zeros(n);
            for i in 0..n {
                residual[i] = p[i] - x[i];
            }
            if residual.amax() < 1e-13 {
                return Ok(p[n..].to_vec());
            }
            let h = 1e-7;
            let mut jac = DMatrix::zeros(n, n);
            for j in 0..n {
                let mut plus = s.clone();
                let mut minus = s.clone();
                plus[j] += h;
                minus[j] -= h;
                let fp = self.framed_point(plus.as_slice());
                let fm = self.framed_point(minus.as_slice());
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let delta = jac
                .lu()
                .solve(&residual)
                .ok_or(Error::NotGraphicalAfterRetry)?;
            s -= delta;
        }
        let p = self.framed_point(s.as_slice());
        let residual = (0..n).fold(0.0f64, |m, i| m.max((p[i] - x[i]).abs()));
        if residual < 1e-10 {
            Ok(p[n..].to_vec())
        } else {
            Err(Error::OracleFailure(format!(
                "graph solve stalled with residual {residual:.3e}"
            )))
        }
    }
}

/// Catalogue of fibre shears tried when the manifold is not graphical in the
/// given frame.
fn shear_catalogue(n: usize) -> Vec<DMatrix<f64>> {
    let mut list = vec![DMatrix::zeros(n, n)];
    for t in [1.0, -1.0, 0.5, -0.5, 2.0, -2.0] {
        list.push(DMatrix::from_diagonal_element(n, n, t));
    }
    if n >= 2 {
        for t in [1.0, -1.0] {
            let mut s = DMatrix::identity(n, n);
            s[(0, 1)] = 0.5;
            s[(1, 0)] = 0.5;
            list.push(s * t);
        }
    }
    list
}

/// Builds a graph section for `spec` in `frame`, shearing the fibres to make
/// the projection as well-conditioned as possible (the shear fixes the zero
/// section pointwise, so the reference manifold is unaffected). Among the
/// candidate frames the one with the largest graphicality margin wins; a
/// marginal projection would fold inside the sampling box and corrupt the
/// fitted jets.
fn graph_with_retries(
    spec: &LagrangianSpec,
    frame: &AffineSymplectic,
    n: usize,
) -> Result<(GraphSection, AffineSymplectic)> {
    let mut best: Option<(GraphSection, AffineSymplectic)> = None;
    for shear in shear_catalogue(n) {
        let candidate = if shear.iter().all(|v| *v == 0.0) {
            frame.clone()
        } else {
            AffineSymplectic::fibre_shear(&shear)?.compose(frame)?
        };
        if let Ok(section) = GraphSection::new(spec.chart(), candidate.clone(), n) {
            let probe = vec![0.01; n];
            if section.fibre_at(&vec![0.0; n]).is_ok() && section.fibre_at(&probe).is_ok() {
                let better = match &best {
                    Some((current, _)) => section.margin > current.margin,
                    None => true,
                };
                if better {
                    best = Some((section, candidate));
                }
            }
        }
    }
    best.ok_or(Error::NotGraphicalAfterRetry)
}

/// Sampling controls for [`generating_from_problem`].
#[derive(Clone, Copy, Debug)]
pub struct SamplingOptions {
    /// Stencil spacing of the jet fit.
    pub step: f64,
    /// Spacing of the dedicated low-order refinement.
    pub refine_step: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            step: 0.03,
            refine_step: 2e-3,
        }
    }
}

/// Computes a generating function of the problem at the requested degree:
/// solves the section `ξ = g(x)` per base point, checks closedness of
/// `Σ gᵢ dxᵢ`, integrates radially from the origin with a 32-node
/// Gauss–Legendre rule, and fits the jet from point samples.
pub fn generating_from_problem(problem: &ContactProblem, degree: usize) -> Result<Jet> {
    generating_from_problem_with(problem, degree, &SamplingOptions::default())
}

pub fn generating_from_problem_with(
    problem: &ContactProblem,
    degree: usize,
    opts: &SamplingOptions,
) -> Result<Jet> {
    let n = problem.x.half_dim();
    let (section, _frame) = graph_with_retries(&problem.lambda, &problem.frame, n)?;
    section_jet(&section, n, degree, opts)
}

/// Shared core: jet of the potential of one graph section.
fn section_jet(
    section: &GraphSection,
    n: usize,
    degree: usize,
    opts: &SamplingOptions,
) -> Result<Jet> {
    // Closedness of the section's 1-form at a few probes. One Richardson
    // step keeps the finite-difference truncation error well under the gate
    // even for stiff sections.
    let mut asym_max = 0.0f64;
    for probe in [vec![0.0; n], vec![0.04; n]] {
        let jacobian_at = |h: f64| -> Result<DMatrix<f64>> {
            let mut jac = DMatrix::zeros(n, n);
            for j in 0..n {
                let mut plus = probe.clone();
                let mut minus = probe.clone();
                plus[j] += h;
                minus[j] -= h;
                let gp = section.fibre_at(&plus)?;
                let gm = section.fibre_at(&minus)?;
                for i in 0..n {
                    jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            Ok(jac)
        };
        let h = 5e-4;
        let coarse = jacobian_at(h)?;
        let fine = jacobian_at(h / 2.0)?;
        let jac = (fine * 4.0 - coarse) / 3.0;
        let asym = (&jac - jac.transpose())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        asym_max = asym_max.max(asym);
    }
    if asym_max > 1e-6 {
        return Err(Error::ClosednessViolation(asym_max));
    }

    // Jet of the section itself: fitting g instead of its primitive keeps
    // every coefficient one derivative order cheaper, which matters when the
    // flow map has large high-order derivatives.
    let g_degree = degree.saturating_sub(1);
    let mut g_jets = Vec::with_capacity(n);
    for i in 0..n {
        let jet_i = jet_from_oracle(
            |x: &[f64]| Ok(section.fibre_at(x)?[i]),
            n,
            g_degree,
            opts.step,
        )?;
        g_jets.push(jet_i);
    }

    // Radial Poincaré primitive, performed exactly on the fitted jets:
    // the coefficient of x^α in ∫₀¹ Σ gᵢ(tx) xᵢ dt is Σᵢ gᵢ[α−eᵢ] / |α|.
    let mut jet = Jet::zero(n, degree);
    for mi in crate::oracle::multi_indices(n, degree) {
        let m = mi.degree();
        if m == 0 {
            continue;
        }
        let mut acc = 0.0;
        for i in 0..n {
            if mi.exponent(i) == 0 {
                continue;
            }
            let mut shifted = mi.exponents().to_vec();
            shifted[i] -= 1;
            acc += g_jets[i].coefficient(&shifted);
        }
        if acc != 0.0 {
            jet.set_coefficient(mi.exponents(), acc / m as f64);
        }
    }

    // Consistency probe: the quadrature primitive along two rays must match
    // the assembled jet to the sampling accuracy.
    let (nodes, weights) = gauss_legendre(32);
    for probe in [0.25 * opts.step, -0.4 * opts.step] {
        let x = vec![probe; n];
        let mut quad = 0.0;
        for (node, w) in nodes.iter().zip(&weights) {
            let t = 0.5 * (node + 1.0);
            let scaled: Vec<f64> = x.iter().map(|v| t * v).collect();
            let g = section.fibre_at(&scaled)?;
            let pairing: f64 = g.iter().zip(&x).map(|(gi, xi)| gi * xi).sum();
            quad += 0.5 * w * pairing;
        }
        let fitted = jet.eval(&x);
        let scale = quad.abs().max(jet.max_coefficient()).max(1.0);
        if (quad - fitted).abs() > 1e-4 * scale {
            return Err(Error::Internal(format!(
                "radial primitive disagrees with the fitted jet by {:.3e}",
                (quad - fitted).abs()
            )));
        }
    }

    // Low orders refined straight from the section: value is 0 by
    // construction, the gradient is the fibre at the origin, the Hessian is
    // the section's Jacobian at a dedicated small step.
    jet.set_coefficient(&vec![0u32; n], 0.0);
    let g0 = section.fibre_at(&vec![0.0; n])?;
    let gscale = g0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (i, gi) in g0.iter().enumerate() {
        let mi = MultiIndex::unit(n, i);
        if gi.abs() > 1e-6 * gscale {
            return Err(Error::NoIntersection(gi.abs()));
        }
        jet.set_coefficient(mi.exponents(), 0.0);
    }
    if degree >= 2 {
        let hess = refined_section_jacobian(section, n, opts.refine_step)?;
        for i in 0..n {
            for j in i..n {
                let mut exps = vec![0u32; n];
                if i == j {
                    exps[i] = 2;
                } else {
                    exps[i] = 1;
                    exps[j] = 1;
                }
                let coef = if i == j { hess[(i, i)] / 2.0 } else { hess[(i, j)] };
                jet.set_coefficient(&exps, if coef.abs() < 1e-11 { 0.0 } else { coef });
            }
        }
    }
    if jet.is_zero() {
        return Err(Error::NonIsolated);
    }
    Ok(jet)
}

/// Central-difference Jacobian of the section at 0 with one Richardson step,
/// symmetrized.
fn refined_section_jacobian(section: &GraphSection, n: usize, h: f64) -> Result<DMatrix<f64>> {
    let estimate = |h: f64| -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut plus = vec![0.0; n];
            let mut minus = vec![0.0; n];
            plus[j] += h;
            minus[j] -= h;
            let gp = section.fibre_at(&plus)?;
            let gm = section.fibre_at(&minus)?;
            for i in 0..n {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    };
    let coarse = estimate(h)?;
    let fine = estimate(h / 2.0)?;
    let jac = (fine * 4.0 - coarse) / 3.0;
    Ok((&jac + jac.transpose()) / 2.0)
}

/// Contact equivalence through the stable right-equivalence of generating
/// functions, at the default jet degree.
pub fn contact_equivalent(p1: &ContactProblem, p2: &ContactProblem) -> Result<EquivalenceVerdict> {
    contact_equivalent_at(p1, p2, DEFAULT_JET_DEGREE)
}

pub fn contact_equivalent_at(
    p1: &ContactProblem,
    p2: &ContactProblem,
    degree: usize,
) -> Result<EquivalenceVerdict> {
    let f = generating_from_problem(p1, degree)?;
    let g = generating_from_problem(p2, degree)?;
    stably_right_equivalent_with(&f, &g, &sampled_classify_options())
}

/// Parameter-dependent generating data for a family of contact problems,
/// fibred over the first `nparams` variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratingFamily {
    pub family: Jet,
    pub nparams: usize,
}

impl GeneratingFamily {
    pub fn new(family: Jet, nparams: usize) -> Result<Self> {
        if nparams > family.nvars() {
            return Err(Error::InvalidInput(
                "parameter count exceeds the variable count".into(),
            ));
        }
        let scale = family.max_coefficient().max(1.0);
        if family.constant_term().abs() > 1e-9 * scale {
            return Err(Error::NonzeroValueAtOrigin {
                value: family.constant_term(),
            });
        }
        let total = family.nvars();
        for i in nparams..total {
            let mi = MultiIndex::unit(total, i);
            if family.coefficient(mi.exponents()).abs() > 1e-9 * scale {
                return Err(Error::NotCritical {
                    gradient_norm: family.coefficient(mi.exponents()).abs(),
                });
            }
        }
        Ok(GeneratingFamily { family, nparams })
    }

    pub fn nx(&self) -> usize {
        self.family.nvars() - self.nparams
    }
}

/// A family of contact problems over a parameter `μ`, sharing one ambient
/// space, base point and Darboux frame (the frame of the `μ = 0` member).
#[derive(Clone)]
pub struct ProblemFamily {
    pub nparams: usize,
    pub half_dim: usize,
    pub x_at: Arc<dyn Fn(&[f64]) -> LagrangianSpec + Send + Sync>,
    pub lambda_at: Arc<dyn Fn(&[f64]) -> LagrangianSpec + Send + Sync>,
    pub frame: AffineSymplectic,
}

impl ProblemFamily {
    /// Family with constant reference manifold = zero section and Λ_μ the
    /// graph of a fibred potential `P(μ, x)` (potential in `nparams + n`
    /// variables).
    pub fn graph_family(potential: Jet, nparams: usize) -> Result<Self> {
        let total = potential.nvars();
        let n = total - nparams;
        let degree = potential.degree();
        let pot = potential.clone();
        Ok(ProblemFamily {
            nparams,
            half_dim: n,
            x_at: Arc::new(move |_mu| LagrangianSpec::zero_section(n, degree)),
            lambda_at: Arc::new(move |mu: &[f64]| {
                let mu = mu.to_vec();
                let pot = pot.clone();
                let n_inner = n;
                LagrangianSpec::ImplicitSampler {
                    dim: n_inner,
                    chart: Arc::new(move |s: &[f64]| {
                        let mut args: Vec<f64> = mu.clone();
                        args.extend_from_slice(s);
                        let mut point = vec![0.0; 2 * n_inner];
                        point[..n_inner].copy_from_slice(s);
                        for i in 0..n_inner {
                            point[n_inner + i] = pot.partial(mu.len() + i).eval(&args);
                        }
                        point
                    }),
                }
            }),
            frame: AffineSymplectic::identity(2 * n),
        })
    }
}

/// Computes a generating family `ρ(μ, x) = φ_μ(x) − ψ_μ(x)` for the problem
/// family: both manifolds expressed as sections in the shared frame per
/// parameter value, potentials recovered radially, and the fibred jet fitted
/// over `(μ, x)`.
pub fn generating_family_from_problem(
    family: &ProblemFamily,
    degree: usize,
) -> Result<GeneratingFamily> {
    generating_family_from_problem_with(family, degree, &SamplingOptions::default())
}

pub fn generating_family_from_problem_with(
    family: &ProblemFamily,
    degree: usize,
    opts: &SamplingOptions,
) -> Result<GeneratingFamily> {
    let n = family.half_dim;
    let l = family.nparams;

    // Fit the section difference g_Λ − g_X as jets over (μ, x), then apply
    // the radial Poincaré integral in the x variables coefficient-wise.
    let g_degree = degree.saturating_sub(1);
    let mut g_jets = Vec::with_capacity(n);
    for i in 0..n {
        let jet_i = jet_from_oracle(
            |args: &[f64]| {
                let (mu, x) = args.split_at(l);
                let lam_section =
                    GraphSection::new((family.lambda_at)(mu).chart(), family.frame.clone(), n)?;
                let x_section =
                    GraphSection::new((family.x_at)(mu).chart(), family.frame.clone(), n)?;
                Ok(lam_section.fibre_at(x)?[i] - x_section.fibre_at(x)?[i])
            },
            l + n,
            g_degree,
            opts.step,
        )?;
        g_jets.push(jet_i);
    }

    let mut jet = Jet::zero(l + n, degree);
    for mi in crate::oracle::multi_indices(l + n, degree) {
        let x_degree: u32 = mi.exponents()[l..].iter().sum();
        if x_degree == 0 {
            // Pure parameter terms vanish: each slice potential is gauged to
            // zero at the base point.
            continue;
        }
        let mut acc = 0.0;
        for i in 0..n {
            if mi.exponent(l + i) == 0 {
                continue;
            }
            let mut shifted = mi.exponents().to_vec();
            shifted[l + i] -= 1;
            acc += g_jets[i].coefficient(&shifted);
        }
        if acc != 0.0 {
            jet.set_coefficient(mi.exponents(), acc / x_degree as f64);
        }
    }

    // Clean the invariants at the origin: value, x-gradient at μ = 0, and the
    // x-Hessian block of the μ = 0 slice from refined estimates.
    jet.set_coefficient(&vec![0u32; l + n], 0.0);
    let lambda0 = (family.lambda_at)(&vec![0.0; l]);
    let x0 = (family.x_at)(&vec![0.0; l]);
    let lam_section = GraphSection::new(lambda0.chart(), family.frame.clone(), n)?;
    let x_section = GraphSection::new(x0.chart(), family.frame.clone(), n)?;
    let g_lam0 = lam_section.fibre_at(&vec![0.0; n])?;
    let g_x0 = x_section.fibre_at(&vec![0.0; n])?;
    for i in 0..n {
        let g = g_lam0[i] - g_x0[i];
        if g.abs() > 1e-6 {
            return Err(Error::NoIntersection(g.abs()));
        }
        let mi = MultiIndex::unit(l + n, l + i);
        jet.set_coefficient(mi.exponents(), 0.0);
    }
    let h_lam = refined_section_jacobian(&lam_section, n, opts.refine_step)?;
    let h_x = refined_section_jacobian(&x_section, n, opts.refine_step)?;
    let hess = h_lam - h_x;
    for i in 0..n {
        for j in i..n {
            let mut exps = vec![0u32; l + n];
            if i == j {
                exps[l + i] = 2;
            } else {
                exps[l + i] = 1;
                exps[l + j] = 1;
            }
            let coef = if i == j { hess[(i, i)] / 2.0 } else { hess[(i, j)] };
            jet.set_coefficient(&exps, if coef.abs() < 1e-11 { 0.0 } else { coef });
        }
    }
    GeneratingFamily::new(jet, l)
}

/// Decides stable right equivalence of two unfoldings by Morse reduction and
/// recognition against the versal A-series catalogue (fold, cusp,
/// swallowtail, butterfly). Families outside the catalogue, or with a
/// degenerate induced parameter map, come back `Indeterminate`.
pub fn unfolding_equivalent(
    f: &GeneratingFamily,
    g: &GeneratingFamily,
) -> Result<EquivalenceVerdict> {
    unfolding_equivalent_with(f, g, &sampled_classify_options())
}

pub fn unfolding_equivalent_with(
    f: &GeneratingFamily,
    g: &GeneratingFamily,
    opts: &ClassifyOptions,
) -> Result<EquivalenceVerdict> {
    let rf = match recognize_unfolding(f, opts) {
        Ok(r) => r,
        Err(e) if e.is_indeterminate() => {
            return Ok(EquivalenceVerdict {
                equivalent: false,
                witness_class: None,
                reason: EquivalenceReason::Indeterminate,
            })
        }
        Err(e) => return Err(e),
    };
    let rg = match recognize_unfolding(g, opts) {
        Ok(r) => r,
        Err(e) if e.is_indeterminate() => {
            return Ok(EquivalenceVerdict {
                equivalent: false,
                witness_class: None,
                reason: EquivalenceReason::Indeterminate,
            })
        }
        Err(e) => return Err(e),
    };
    let equal = rf.class == rg.class;
    Ok(EquivalenceVerdict {
        equivalent: equal,
        witness_class: Some((rf.class, rg.class)),
        reason: if equal {
            EquivalenceReason::Equal
        } else {
            EquivalenceReason::ClassMismatch
        },
    })
}

/// A recognized versal unfolding: the organizing-centre class plus the fact
/// that the induced parameter map has full rank.
struct RecognizedUnfolding {
    class: crate::classify::SingularityClass,
}

fn recognize_unfolding(
    family: &GeneratingFamily,
    opts: &ClassifyOptions,
) -> Result<RecognizedUnfolding> {
    let l = family.nparams;
    let fs = split_family(&family.family, l)?;
    let c = fs.corank();

    // Organizing centre: the μ = 0 slice of the reduced family.
    let mut slice = Jet::zero(c, fs.reduced_family.degree());
    for (mi, coef) in fs.reduced_family.terms() {
        if mi.exponents()[..l].iter().all(|e| *e == 0) {
            slice.set_coefficient(&mi.exponents()[l..], coef);
        }
    }
    if c == 0 {
        // Morse organizing centre: versal with no parameters at all.
        return Ok(RecognizedUnfolding {
            class: "Morse".parse().expect("label"),
        });
    }
    let class = classify_reduced(&slice, opts)?;
    if c != 1 || class.k > 5 {
        return Err(Error::Indeterminate(format!(
            "organizing centre {class} is outside the versal catalogue"
        )));
    }
    let k = class.k as usize;

    // Versality: the μ-linear slices must span the local algebra of the
    // organizing centre modulo its Jacobian ideal and constants, i.e. the
    // reduced coefficient matrix on x¹..x^{k−1} has rank k−1.
    let degree = fs.reduced_family.degree();
    let mut fprime = vec![0.0; degree.max(k + 1)];
    {
        let deriv = slice.partial(0);
        for (mi, coef) in deriv.terms() {
            fprime[mi.degree() as usize] = coef;
        }
    }
    let lead = fprime[k];
    if lead.abs() < 1e-12 {
        return Err(Error::Indeterminate(
            "organizing centre derivative degenerated".into(),
        ));
    }

    let mut rows: Vec<Vec<f64>> = vec![];
    for p in 0..l {
        // μ_p-linear slice as a polynomial in x.
        let mut b = vec![0.0; degree + 1];
        for (mi, coef) in fs.reduced_family.terms() {
            let mu_part = &mi.exponents()[..l];
            if mu_part[p] == 1 && mu_part.iter().sum::<u32>() == 1 {
                b[mi.exponents()[l] as usize] = coef;
            }
        }
        // Reduce modulo the derivative ideal: clear degrees ≥ k bottom-up.
        for m in k..=degree {
            let cm = b[m];
            if cm == 0.0 {
                continue;
            }
            let factor = cm / lead;
            for (d, fp) in fprime.iter().enumerate() {
                let target = m - k + d;
                if target <= degree {
                    b[target] -= factor * fp;
                }
            }
        }
        rows.push(b[1..k].to_vec());
    }

    let rank = if k == 1 {
        k - 1
    } else {
        let mat = DMatrix::from_fn(l.max(1), k - 1, |i, j| {
            if i < rows.len() {
                rows[i][j]
            } else {
                0.0
            }
        });
        let svd = mat.svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        svd.singular_values
            .iter()
            .filter(|s| **s > 1e-6 * sigma_max.max(1e-9))
            .count()
    };
    if rank != k - 1 {
        return Err(Error::Indeterminate(format!(
            "induced parameter map has rank {rank}, expected {}",
            k - 1
        )));
    }
    Ok(RecognizedUnfolding { class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_with;

    fn jet(nvars: usize, degree: usize, monomials: &[(f64, &[u32])]) -> Jet {
        Jet::from_monomials(nvars, degree, monomials).unwrap()
    }

    #[test]
    fn difference_of_potentials() {
        let lam = jet(1, 4, &[(1.0, &[3]), (1.0, &[2])]);
        let x = jet(1, 4, &[(1.0, &[2])]);
        let out = generating_from_potentials(&lam, &x).unwrap();
        assert_eq!(out, jet(1, 4, &[(1.0, &[3])]));
    }

    #[test]
    fn equal_potentials_flag_non_isolated() {
        let p = jet(1, 4, &[(1.0, &[2])]);
        assert!(matches!(
            generating_from_potentials(&p, &p),
            Err(Error::NonIsolated)
        ));
    }

    #[test]
    fn disjoint_graphs_flag_no_intersection() {
        let lam = jet(1, 4, &[(1.0, &[1]), (1.0, &[3])]);
        let x = Jet::zero(1, 4);
        assert!(matches!(
            generating_from_potentials(&lam, &x),
            Err(Error::NoIntersection(_))
        ));
    }

    #[test]
    fn transversal_sine_graph_is_morse() {
        // sin recentred at π/2 has a critical point there: the jet is
        // 1 − u²/2 + u⁴/24; against the zero section the class is Morse.
        let lam = jet(
            1,
            4,
            &[(1.0, &[0]), (-0.5, &[2]), (1.0 / 24.0, &[4])],
        );
        let x = Jet::zero(1, 4);
        let rho = generating_from_potentials(&lam, &x).unwrap();
        let class = crate::classify::classify(&rho).unwrap();
        assert_eq!(class.label(), "Morse");
        let ms = crate::splitting::split(&rho).unwrap();
        assert_eq!(ms.signature, (0, 1));
    }

    #[test]
    fn sheared_structure_flips_signature_but_not_class() {
        // The fibre shear realizing the structure potential with the constant
        // block (1/4)(B⁻¹DB⁻¹ − B⁻¹), B = 1, D = −1, regrafts the same
        // manifold with the quadratic part D.
        let phi = jet(2, 5, &[(1.0, &[3, 0]), (1.0, &[0, 2])]);
        let problem = ContactProblem::standard(phi).unwrap();
        let jet_alpha = generating_from_problem(&problem, 5).unwrap();

        let mut shear = DMatrix::zeros(2, 2);
        shear[(1, 1)] = 2.0 * 0.25 * (-1.0 - 1.0);
        let frame_beta = AffineSymplectic::fibre_shear(&shear)
            .unwrap()
            .compose(&problem.frame)
            .unwrap();
        let problem_beta = ContactProblem::new(
            problem.x.clone(),
            problem.lambda.clone(),
            problem.z.clone(),
            frame_beta,
        )
        .unwrap();
        let jet_beta = generating_from_problem(&problem_beta, 5).unwrap();

        let opts = sampled_classify_options();
        let ca = classify_with(&jet_alpha, &opts).unwrap();
        let cb = classify_with(&jet_beta, &opts).unwrap();
        assert_eq!(ca.label(), "A2");
        assert_eq!(cb.label(), "A2");
        let sa = crate::splitting::split(&jet_alpha).unwrap();
        let sb = crate::splitting::split(&jet_beta).unwrap();
        assert_eq!(sa.signature, (1, 0));
        assert_eq!(sb.signature, (0, 1));
    }

    #[test]
    fn standard_problem_round_trips_cubic() {
        let phi = jet(1, 4, &[(1.0, &[3])]);
        let p = ContactProblem::standard(phi.clone()).unwrap();
        let out = generating_from_problem(&p, 4).unwrap();
        assert!(out.max_deviation(&phi) < 1e-6, "dev {}", out.max_deviation(&phi));
    }

    #[test]
    fn rotated_zero_section_is_morse() {
        // Λ = image of the zero section under a symplectic rotation in each
        // conjugate pair; graphical over the base for small angles, with a
        // quadratic generating function.
        let n = 1;
        let theta: f64 = 0.3;
        let (s, c) = theta.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let map = AffineSymplectic::new(rot, DVector::zeros(2)).unwrap();
        let lambda = LagrangianSpec::zero_section(n, 4).transformed(&map);
        let p = ContactProblem::new(
            LagrangianSpec::zero_section(n, 4),
            lambda,
            vec![0.0; 2],
            AffineSymplectic::identity(2),
        )
        .unwrap();
        let out = generating_from_problem(&p, 4).unwrap();
        let class = classify_with(&out, &sampled_classify_options()).unwrap();
        assert_eq!(class.label(), "Morse");
        // tan(θ)/2·x² is the expected potential of the rotated section.
        let expect = (theta.tan()) / 2.0;
        assert!((out.coefficient(&[2]) - expect).abs() < 1e-6);
    }

    #[test]
    fn transformed_problem_stays_contact_equivalent() {
        let phi = jet(1, 5, &[(1.0, &[3])]);
        let p = ContactProblem::standard(phi).unwrap();
        // A shear composed with a translation along the manifold.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 1.0]);
        let map = AffineSymplectic::new(m, DVector::from_column_slice(&[0.0, 0.0])).unwrap();
        let q = p.transformed(&map).unwrap();
        let v = contact_equivalent(&p, &q).unwrap();
        assert!(v.equivalent, "verdict {:?}", v.reason);
        let classes = v.witness_class.unwrap();
        assert_eq!(classes.0.label(), "A2");
    }

    #[test]
    fn stabilized_problem_is_stably_contact_equivalent() {
        let p1 = ContactProblem::standard(jet(1, 5, &[(1.0, &[3])])).unwrap();
        let p2 = ContactProblem::standard(jet(
            2,
            5,
            &[(1.0, &[3, 0]), (1.0, &[0, 2])],
        ))
        .unwrap();
        let v = contact_equivalent(&p1, &p2).unwrap();
        assert!(v.equivalent);
    }

    #[test]
    fn distinct_classes_are_not_contact_equivalent() {
        let p1 = ContactProblem::standard(jet(1, 5, &[(1.0, &[3])])).unwrap();
        let p2 = ContactProblem::standard(jet(1, 5, &[(1.0, &[4])])).unwrap();
        let v = contact_equivalent(&p1, &p2).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.reason, EquivalenceReason::ClassMismatch);
    }

    #[test]
    fn fold_family_generates_directly() {
        // Λ_μ = graph d(x³ + μx), X = zero section → family x³ + μx.
        let pot = jet(2, 4, &[(1.0, &[0, 3]), (1.0, &[1, 1])]);
        let fam = ProblemFamily::graph_family(pot, 1).unwrap();
        let gf = generating_family_from_problem(&fam, 4).unwrap();
        let expect = jet(2, 4, &[(1.0, &[0, 3]), (1.0, &[1, 1])]);
        assert!(
            gf.family.max_deviation(&expect) < 1e-5,
            "dev {}",
            gf.family.max_deviation(&expect)
        );
    }

    #[test]
    fn x_family_shift_cancels() {
        // X_μ = graph d(μx), Λ_μ = graph d(x³ + μx) → constant unfolding x³.
        let n = 1usize;
        let degree = 4usize;
        let fam = ProblemFamily {
            nparams: 1,
            half_dim: n,
            x_at: Arc::new(move |mu: &[f64]| {
                let m = mu[0];
                LagrangianSpec::ImplicitSampler {
                    dim: n,
                    chart: Arc::new(move |s: &[f64]| vec![s[0], m]),
                }
            }),
            lambda_at: Arc::new(move |mu: &[f64]| {
                let m = mu[0];
                LagrangianSpec::ImplicitSampler {
                    dim: n,
                    chart: Arc::new(move |s: &[f64]| vec![s[0], 3.0 * s[0] * s[0] + m]),
                }
            }),
            frame: AffineSymplectic::identity(2 * n),
        };
        let gf = generating_family_from_problem(&fam, degree).unwrap();
        let expect = jet(2, degree, &[(1.0, &[0, 3])]);
        assert!(
            gf.family.max_deviation(&expect) < 1e-5,
            "dev {}",
            gf.family.max_deviation(&expect)
        );
    }

    #[test]
    fn mu_translated_fold_family_reduces_to_a_fold() {
        // Λ_μ: the graph of d(x³ + μx) translated by μ in the base direction;
        // X the zero section. The fibred reduction recovers a fold slice.
        let n = 1usize;
        let degree = 4usize;
        let fam = ProblemFamily {
            nparams: 1,
            half_dim: n,
            x_at: Arc::new(move |_mu| LagrangianSpec::zero_section(n, degree)),
            lambda_at: Arc::new(move |mu: &[f64]| {
                let m = mu[0];
                LagrangianSpec::ImplicitSampler {
                    dim: n,
                    chart: Arc::new(move |s: &[f64]| {
                        vec![s[0] + m, 3.0 * s[0] * s[0] + m]
                    }),
                }
            }),
            frame: AffineSymplectic::identity(2 * n),
        };
        let gf = generating_family_from_problem(&fam, degree).unwrap();
        let fs = split_family(&gf.family, 1).unwrap();
        assert_eq!(fs.corank(), 1);
        // μ = 0 slice of the reduced family classifies as the fold germ.
        let mut slice = Jet::zero(1, degree);
        for (mi, c) in fs.reduced_family.terms() {
            if mi.exponent(0) == 0 {
                slice.set_coefficient(&[mi.exponent(1)], c);
            }
        }
        let class = crate::classify::classify_reduced(&slice, &sampled_classify_options()).unwrap();
        assert_eq!(class.label(), "A2");
        assert!(
            crate::splitting::family_reconstruction_error(&gf.family, &fs).unwrap() < 1e-6
        );
    }

    #[test]
    fn unfolding_dead_parameter_is_constant_padding() {
        let f = GeneratingFamily::new(jet(2, 4, &[(1.0, &[0, 3]), (1.0, &[1, 1])]), 1).unwrap();
        let g = GeneratingFamily::new(
            jet(3, 4, &[(1.0, &[0, 0, 3]), (1.0, &[1, 0, 1])]),
            2,
        )
        .unwrap();
        let v = unfolding_equivalent(&f, &g).unwrap();
        assert!(v.equivalent);
    }

    #[test]
    fn unfolding_cubic_reparameterization_degenerates() {
        let f = GeneratingFamily::new(jet(2, 4, &[(1.0, &[0, 3]), (1.0, &[1, 1])]), 1).unwrap();
        let g = GeneratingFamily::new(jet(2, 6, &[(1.0, &[0, 3]), (1.0, &[3, 1])]), 1).unwrap();
        let v = unfolding_equivalent(&f, &g).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.reason, EquivalenceReason::Indeterminate);
    }

    #[test]
    fn unfolding_cusp_with_swapped_parameters_and_stabilization() {
        let f = GeneratingFamily::new(
            jet(
                4,
                5,
                &[
                    (1.0, &[0, 0, 4, 0]),
                    (1.0, &[1, 0, 2, 0]),
                    (1.0, &[0, 1, 1, 0]),
                    (1.0, &[0, 0, 0, 2]),
                ],
            ),
            2,
        )
        .unwrap();
        let g = GeneratingFamily::new(
            jet(
                4,
                5,
                &[
                    (1.0, &[0, 0, 4, 0]),
                    (1.0, &[0, 1, 2, 0]),
                    (1.0, &[1, 0, 1, 0]),
                    (-1.0, &[0, 0, 0, 2]),
                ],
            ),
            2,
        )
        .unwrap();
        let v = unfolding_equivalent(&f, &g).unwrap();
        assert!(v.equivalent, "reason {:?}", v.reason);
        assert_eq!(v.witness_class.unwrap().0.label(), "A3+");
    }

    #[test]
    fn problem_serialization_round_trips_potentials() {
        let p = ContactProblem::standard(jet(1, 4, &[(1.0, &[3])])).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("potential_graph"));
        let back: ContactProblem = serde_json::from_str(&json).unwrap();
        match back.lambda {
            LagrangianSpec::PotentialGraph { potential, .. } => {
                assert_eq!(potential, jet(1, 4, &[(1.0, &[3])]));
            }
            _ => panic!("expected a potential graph"),
        }
        // Sampled specs refuse to serialize.
        let sampled = p.lambda.transformed(&AffineSymplectic::identity(2));
        assert!(serde_json::to_string(&sampled).is_err());
    }
}
