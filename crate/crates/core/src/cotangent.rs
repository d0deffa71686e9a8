//! Transitions between cotangent-bundle structures and their effect on
//! generating functions: the quadratic-in-momenta potential `H(x, ξ)` that
//! relates two structures, the graphicality test through the transformed
//! fibre block, the homotopy-method construction of the right equivalence,
//! and cotangent lifts of base diffeomorphisms with symmetry checks.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{CoordinateChange, Jet, MultiIndex};
use crate::linalg::{self, invertible_under_tolerance, RANK_ZERO_REL};

/// Shape of the momentum-quadratic potential.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockProfile {
    /// No block constraint.
    Full,
    /// The lower-right fibre block vanishes identically; `base_dim` is the
    /// number of leading (reduced) variables.
    ZeroH22 { base_dim: usize },
}

/// A change of cotangent-bundle structure, represented by the symmetric
/// matrix of jets `h_ij(x, ξ)` of the potential `H(x, ξ) = Σ h_ij ξ_i ξ_j`.
/// Entries are jets in `2n` variables, the base coordinates first.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct StructureChange {
    #[serde(rename = "h_matrix")]
    h: Vec<Vec<Jet>>,
    #[serde(rename = "block_profile")]
    profile: BlockProfile,
}

impl StructureChange {
    pub fn new(h: Vec<Vec<Jet>>, profile: BlockProfile) -> Result<Self> {
        let n = h.len();
        for row in &h {
            if row.len() != n {
                return Err(Error::InvalidInput("h_matrix must be square".into()));
            }
        }
        let degree = h
            .first()
            .and_then(|r| r.first())
            .map(|j| j.degree())
            .unwrap_or(0);
        for (i, row) in h.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if entry.nvars() != 2 * n {
                    return Err(Error::VarCountMismatch {
                        expected: 2 * n,
                        got: entry.nvars(),
                    });
                }
                if entry.degree() != degree {
                    return Err(Error::DegreeMismatch {
                        expected: degree,
                        got: entry.degree(),
                    });
                }
                if h[i][j] != h[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "h_matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if let BlockProfile::ZeroH22 { base_dim } = profile {
            if base_dim > n {
                return Err(Error::InvalidInput(
                    "base_dim exceeds the matrix dimension".into(),
                ));
            }
            for i in base_dim..n {
                for j in base_dim..n {
                    if !h[i][j].is_zero() {
                        return Err(Error::InvalidInput(format!(
                            "ZeroH22 profile violated at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(StructureChange { h, profile })
    }

    pub fn zero(n: usize, degree: usize) -> Self {
        let h = vec![vec![Jet::zero(2 * n, degree); n]; n];
        StructureChange {
            h,
            profile: BlockProfile::Full,
        }
    }

    /// Constant coefficient matrix: `H(x, ξ) = ξᵀ C ξ`.
    pub fn from_constant_matrix(c: &DMatrix<f64>, degree: usize, profile: BlockProfile) -> Result<Self> {
        let n = c.nrows();
        let mut h = vec![vec![Jet::zero(2 * n, degree); n]; n];
        for i in 0..n {
            for j in 0..n {
                if c[(i, j)] != 0.0 {
                    h[i][j] = Jet::constant(2 * n, degree, c[(i, j)]);
                }
            }
        }
        StructureChange::new(h, profile)
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn degree(&self) -> usize {
        self.h
            .first()
            .and_then(|r| r.first())
            .map(|j| j.degree())
            .unwrap_or(0)
    }

    pub fn profile(&self) -> &BlockProfile {
        &self.profile
    }

    pub fn entries(&self) -> &[Vec<Jet>] {
        &self.h
    }

    /// Pulls the entries back along the graph of `∇phi`: returns the matrix
    /// of jets `x ↦ h_ij(x, ∇phi(x))`. Exact polynomial substitution, so a
    /// nonzero gradient at zero is fine.
    pub fn on_gradient_graph(&self, phi: &Jet) -> Result<Vec<Vec<Jet>>> {
        let n = self.dim();
        if phi.nvars() != n {
            return Err(Error::VarCountMismatch {
                expected: n,
                got: phi.nvars(),
            });
        }
        let degree = phi.degree();
        let mut inner: Vec<Jet> = (0..n).map(|i| Jet::variable(n, degree, i)).collect();
        for g in phi.gradient() {
            inner.push(g.with_degree(degree));
        }
        let mut out = vec![vec![Jet::zero(n, degree.min(self.degree())); n]; n];
        for i in 0..n {
            for j in 0..n {
                if !self.h[i][j].is_zero() {
                    out[i][j] = self.h[i][j].substitute(&inner)?;
                }
            }
        }
        Ok(out)
    }
}

/// Generating function of the same Lagrangian graph seen through the other
/// structure: `x ↦ phi(x) + H(x, ∇phi(x))`, with the value at the origin
/// re-normalized to `phi(0)`.
pub fn transition_generating(phi: &Jet, structure: &StructureChange) -> Result<Jet> {
    let n = phi.nvars();
    if structure.dim() != n {
        return Err(Error::VarCountMismatch {
            expected: n,
            got: structure.dim(),
        });
    }
    let degree = phi.degree();
    let calh = structure.on_gradient_graph(phi)?;
    let grads: Vec<Jet> = phi.gradient().into_iter().map(|g| g.with_degree(degree)).collect();
    let mut result = phi.clone();
    for i in 0..n {
        for j in 0..n {
            if calh[i][j].is_zero() {
                continue;
            }
            let term = calh[i][j].with_degree(degree).mul(&grads[i])?.mul(&grads[j])?;
            result = result.add(&term)?;
        }
    }
    let drift = result.constant_term() - phi.constant_term();
    if drift != 0.0 {
        result.set_coefficient(&vec![0u32; n], phi.constant_term());
    }
    Ok(result)
}

/// Detected split structure of a jet `f(x̄) + x̲ᵀ B x̲`.
struct SplitShape {
    /// Indices of the reduced (kernel) variables.
    base: Vec<usize>,
    /// Indices of the regular variables.
    regular: Vec<usize>,
    /// The quadratic form matrix B over the regular indices.
    b: DMatrix<f64>,
}

fn detect_split_shape(phi: &Jet) -> Result<SplitShape> {
    let n = phi.nvars();
    let hess = phi.hessian_at_zero();
    let scale = hess.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut base = vec![];
    let mut regular = vec![];
    for i in 0..n {
        let row_norm = (0..n).fold(0.0f64, |m, j| m.max(hess[(i, j)].abs()));
        if row_norm < RANK_ZERO_REL * scale {
            base.push(i);
        } else {
            regular.push(i);
        }
    }
    // Every term must be pure in the base variables or a quadratic in the
    // regular ones.
    for (mi, _) in phi.terms() {
        let reg_deg: u32 = regular.iter().map(|i| mi.exponent(*i)).sum();
        if reg_deg == 0 {
            continue;
        }
        if mi.degree() == 2 && reg_deg == 2 {
            continue;
        }
        return Err(Error::NotSplitCoordinates(format!(
            "term with exponents {:?} mixes the blocks",
            mi.exponents()
        )));
    }
    let m = regular.len();
    let mut b = DMatrix::zeros(m, m);
    for (ri, &i) in regular.iter().enumerate() {
        for (rj, &j) in regular.iter().enumerate() {
            b[(ri, rj)] = hess[(i, j)] / 2.0;
        }
    }
    Ok(SplitShape { base, regular, b })
}

/// Report of the graphicality test `B′(0) = B + 4 B ℋ²²(0) B`.
#[derive(Clone, Debug)]
pub struct GraphicalityReport {
    pub graphical: bool,
    pub b_prime: DMatrix<f64>,
    /// Number of reduced (kernel) variables detected.
    pub base_dim: usize,
}

/// Tests whether the Lagrangian graph stays graphical after the structure
/// change, by invertibility of the transformed fibre block at the origin.
pub fn graphical_in_structure(phi: &Jet, structure: &StructureChange) -> Result<GraphicalityReport> {
    let n = phi.nvars();
    if structure.dim() != n {
        return Err(Error::VarCountMismatch {
            expected: n,
            got: structure.dim(),
        });
    }
    let shape = detect_split_shape(phi)?;
    let calh = structure.on_gradient_graph(phi)?;
    let m = shape.regular.len();
    let mut h22 = DMatrix::zeros(m, m);
    for (ri, &i) in shape.regular.iter().enumerate() {
        for (rj, &j) in shape.regular.iter().enumerate() {
            h22[(ri, rj)] = calh[i][j].constant_term();
        }
    }
    let b_prime = &shape.b + 4.0 * &shape.b * h22 * &shape.b;
    let graphical = invertible_under_tolerance(&b_prime)?;
    Ok(GraphicalityReport {
        graphical,
        b_prime,
        base_dim: shape.base.len(),
    })
}

/// Sampling box for the numeric verifications: the cube |x|∞ ≤ `half_width`
/// with `points_per_axis` samples per axis.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: 0.1,
            points_per_axis: 5,
        }
    }
}

impl GridSpec {
    pub fn points(&self, nvars: usize) -> Vec<Vec<f64>> {
        let k = self.points_per_axis.max(1);
        let axis: Vec<f64> = if k == 1 {
            vec![0.0]
        } else {
            (0..k)
                .map(|i| -self.half_width + 2.0 * self.half_width * i as f64 / (k - 1) as f64)
                .collect()
        };
        let mut points = vec![vec![]];
        for _ in 0..nvars {
            let mut next = Vec::with_capacity(points.len() * k);
            for p in &points {
                for a in &axis {
                    let mut q = p.clone();
                    q.push(*a);
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }
}

/// Outcome of the homotopy construction of the right equivalence.
#[derive(Clone, Debug)]
pub struct HomotopyReport {
    /// max over the grid of |ψ₁(f₁(x)) − φ(x)|.
    pub residual: f64,
    /// |f₁(0)|.
    pub origin_drift: f64,
    /// Sampled diffeomorphism: pairs (x, f₁(x)).
    pub map_samples: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Verifies the hypotheses of the homotopy construction: either the full
/// 2-jet of `phi` vanishes, or `phi` is split and the structure has the
/// zero fibre-block profile over the matching base.
fn check_homotopy_hypotheses(phi: &Jet, structure: &StructureChange) -> Result<()> {
    let scale = phi.max_coefficient().max(1.0);
    if phi.constant_term().abs() > 1e-10 * scale {
        return Err(Error::OutOfHypothesis("phi(0) must vanish".into()));
    }
    let grad_norm = phi.linear_part().iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if grad_norm > 1e-10 * scale {
        return Err(Error::OutOfHypothesis("∇phi(0) must vanish".into()));
    }
    let hess = phi.hessian_at_zero();
    let hess_norm = hess.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if hess_norm <= 1e-10 * scale {
        // Vanishing 2-jet: any potential is admissible.
        return Ok(());
    }
    // Split case: needs the zero fibre block over the reduced variables.
    let shape = detect_split_shape(phi).map_err(|e| {
        Error::OutOfHypothesis(format!(
            "phi has a nondegenerate quadratic part but is not split: {e}"
        ))
    })?;
    match structure.profile() {
        BlockProfile::ZeroH22 { base_dim } if *base_dim == shape.base.len() => {
            // The regular indices must occupy the trailing positions for the
            // declared profile to mean what it says.
            let expected: Vec<usize> = (shape.base.len()..phi.nvars()).collect();
            if shape.regular == expected {
                Ok(())
            } else {
                Err(Error::OutOfHypothesis(
                    "regular variables are not the trailing block".into(),
                ))
            }
        }
        BlockProfile::ZeroH22 { base_dim } => Err(Error::OutOfHypothesis(format!(
            "profile base_dim {} does not match the detected reduced block {}",
            base_dim,
            shape.base.len()
        ))),
        BlockProfile::Full => Err(Error::OutOfHypothesis(
            "phi has a nondegenerate quadratic part; the fibre block of H must vanish".into(),
        )),
    }
}

/// Integrates the homotopy flow and measures how well the constructed map
/// conjugates the transitioned potential back to `phi` on the grid.
pub fn homotopy_equivalence(
    phi: &Jet,
    structure: &StructureChange,
    grid: &GridSpec,
) -> Result<HomotopyReport> {
    homotopy_equivalence_with_step(phi, structure, grid, 1e-3)
}

pub fn homotopy_equivalence_with_step(
    phi: &Jet,
    structure: &StructureChange,
    grid: &GridSpec,
    dt: f64,
) -> Result<HomotopyReport> {
    check_homotopy_hypotheses(phi, structure)?;
    let n = phi.nvars();

    // Lift everything to a degree that holds every polynomial product
    // exactly, so the residual measures only the ODE error and not jet
    // truncation: the transitioned potential has degree up to
    // (deg H + 2)·(deg φ − 1).
    let d_phi = phi.max_term_degree().max(2);
    let d_h = structure
        .entries()
        .iter()
        .flatten()
        .map(|e| e.max_term_degree())
        .max()
        .unwrap_or(0);
    let degree = ((d_h + 2) * (d_phi - 1)).max(d_phi);
    let phi = &phi.with_degree(degree);
    let structure = &StructureChange::new(
        structure
            .entries()
            .iter()
            .map(|row| row.iter().map(|e| e.with_degree(degree)).collect())
            .collect(),
        structure.profile().clone(),
    )?;

    let calh = structure.on_gradient_graph(phi)?;
    let grads: Vec<Jet> = phi.gradient().into_iter().map(|g| g.with_degree(degree)).collect();
    let seconds: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|l| grads[i].partial(l).with_degree(degree))
                .collect()
        })
        .collect();
    // B(t, x) = I + t·B1(x) with B1[l][j] = Σ_i (∂ℋ_ij/∂x_l ∂φ/∂x_i + 2 ℋ_ij ∂²φ/∂x_i∂x_l).
    let mut b1 = vec![vec![Jet::zero(n, degree); n]; n];
    for l in 0..n {
        for j in 0..n {
            let mut acc = Jet::zero(n, degree);
            for i in 0..n {
                if !calh[i][j].is_zero() {
                    let dh = calh[i][j].partial(l).with_degree(degree);
                    acc = acc.add(&dh.mul(&grads[i])?)?;
                    acc = acc.add(&calh[i][j].with_degree(degree).mul(&seconds[i][l])?.scale(2.0))?;
                }
            }
            b1[l][j] = acc;
        }
    }
    let psi1 = transition_generating(phi, structure)?;

    let calh_c: Vec<Vec<CompiledJet>> = calh
        .iter()
        .map(|row| row.iter().map(CompiledJet::new).collect())
        .collect();
    let grads_c: Vec<CompiledJet> = grads.iter().map(CompiledJet::new).collect();
    let b1_c: Vec<Vec<CompiledJet>> = b1
        .iter()
        .map(|row| row.iter().map(CompiledJet::new).collect())
        .collect();

    // dy/dt = w(y, t) = −B(t,y)⁻ᵀ ℋ(y) ∇φ(y).
    let rhs = |y: &[f64], t: f64, out: &mut [f64]| -> Result<()> {
        let mut bt = vec![0.0; n * n];
        for l in 0..n {
            for j in 0..n {
                // Transposed system: row j, column l of Bᵀ is B[l][j].
                bt[j * n + l] = if l == j { 1.0 } else { 0.0 } + t * b1_c[l][j].eval(y);
            }
        }
        let det = det_dense(&bt, n);
        if det.abs() < 1e-8 {
            return Err(Error::HomotopyMatrixSingular { t, det });
        }
        let g: Vec<f64> = grads_c.iter().map(|c| c.eval(y)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += calh_c[i][j].eval(y) * g[j];
            }
            *o = -acc;
        }
        linalg::solve_dense_inplace(&mut bt, out, n)?;
        Ok(())
    };

    let mut points = grid.points(n);
    points.insert(0, vec![0.0; n]);
    let steps = (1.0 / dt).round() as usize;
    let mut residual = 0.0f64;
    let mut origin_drift = 0.0;
    let mut samples = Vec::with_capacity(points.len());
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    for (idx, x0) in points.iter().enumerate() {
        let mut y = x0.clone();
        for s in 0..steps {
            let t = s as f64 * dt;
            rhs(&y, t, &mut k1)?;
            for i in 0..n {
                stage[i] = y[i] + 0.5 * dt * k1[i];
            }
            rhs(&stage, t + 0.5 * dt, &mut k2)?;
            for i in 0..n {
                stage[i] = y[i] + 0.5 * dt * k2[i];
            }
            rhs(&stage, t + 0.5 * dt, &mut k3)?;
            for i in 0..n {
                stage[i] = y[i] + dt * k3[i];
            }
            rhs(&stage, t + dt, &mut k4)?;
            for i in 0..n {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        let value = psi1.eval(&y) - phi.eval(x0);
        residual = residual.max(value.abs());
        if idx == 0 {
            origin_drift = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        samples.push((x0.clone(), y));
    }
    Ok(HomotopyReport {
        residual,
        origin_drift,
        map_samples: samples,
    })
}

fn det_dense(a: &[f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {
            let m = DMatrix::from_row_slice(n, n, a);
            m.lu().determinant()
        }
    }
}

/// Monomial list form of a jet for fast repeated evaluation.
struct CompiledJet {
    nvars: usize,
    exps: Vec<u32>,
    coefs: Vec<f64>,
}

impl CompiledJet {
    fn new(jet: &Jet) -> Self {
        let nvars = jet.nvars();
        let mut exps = vec![];
        let mut coefs = vec![];
        for (mi, c) in jet.terms() {
            exps.extend_from_slice(mi.exponents());
            coefs.push(c);
        }
        CompiledJet { nvars, exps, coefs }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, c) in self.coefs.iter().enumerate() {
            let mut v = *c;
            for i in 0..self.nvars {
                let e = self.exps[t * self.nvars + i];
                if e > 0 {
                    v *= x[i].powi(e as i32);
                }
            }
            acc += v;
        }
        acc
    }
}

/// Cotangent lift of a base diffeomorphism:
/// `(x, ξ) ↦ (h⁻¹(x), Dh(h⁻¹(x))ᵀ ξ)`.
#[derive(Clone, Debug)]
pub struct CotangentLift {
    base: CoordinateChange,
}

pub fn cotangent_lift(base: CoordinateChange) -> CotangentLift {
    CotangentLift { base }
}

impl CotangentLift {
    pub fn base(&self) -> &CoordinateChange {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.nvars()
    }

    /// Applies the lifted map to a phase-space point `(x, ξ)`.
    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if point.len() != 2 * n {
            return Err(Error::VarCountMismatch {
                expected: 2 * n,
                got: point.len(),
            });
        }
        let (x, xi) = point.split_at(n);
        let y = self.base.eval_inverse(x)?;
        let jac = self.base.jacobian_at(&y);
        let mut out = y.clone();
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += jac[(i, j)] * xi[i];
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Max-norm defect of the symplectic condition at a point, via a central
    /// finite-difference Jacobian of the lifted map.
    pub fn symplectic_defect_at(&self, point: &[f64]) -> Result<f64> {
        let n2 = 2 * self.dim();
        let h = 1e-5;
        let mut jac = DMatrix::zeros(n2, n2);
        for j in 0..n2 {
            let mut plus = point.to_vec();
            let mut minus = point.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let fp = self.apply(&plus)?;
            let fm = self.apply(&minus)?;
            for i in 0..n2 {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Ok(linalg::symplectic_defect(&jac))
    }
}

/// Report of the symmetry check `phi ∘ h = phi` and graph preservation under
/// the cotangent lift.
#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub invariant: bool,
    /// Largest coefficient deviation of `phi ∘ h − phi`.
    pub jet_defect: f64,
    /// Exponents of the worst-deviating coefficient, when the jet check fails.
    pub witness_coefficient: Option<Vec<u32>>,
    /// Largest distance of a lifted graph sample from the graph, when checked.
    pub graph_defect: Option<f64>,
    /// Sample point violating graph preservation, when one exists.
    pub witness_point: Option<Vec<f64>>,
}

/// Tolerance for the jet identity `phi ∘ h = phi`.
const SYMMETRY_JET_TOL: f64 = 1e-10;
/// Tolerance for graph preservation under the lift.
const SYMMETRY_GRAPH_TOL: f64 = 1e-8;

/// Checks invariance of `phi` under `h` at jet level and, when it holds,
/// verifies numerically that the cotangent lift maps the gradient graph onto
/// itself.
pub fn check_symmetry_invariance(
    phi: &Jet,
    h: &CoordinateChange,
    grid: &GridSpec,
) -> Result<SymmetryReport> {
    let composed = h.apply_to(phi)?;
    let diff = composed.sub(phi)?;
    let jet_defect = diff.max_coefficient();
    if jet_defect > SYMMETRY_JET_TOL {
        let witness = diff
            .terms()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(mi, _)| mi.exponents().to_vec());
        return Ok(SymmetryReport {
            invariant: false,
            jet_defect,
            witness_coefficient: witness,
            graph_defect: None,
            witness_point: None,
        });
    }

    let lift = cotangent_lift(h.clone());
    let grads: Vec<Jet> = phi.gradient();
    let mut graph_defect = 0.0f64;
    let mut witness_point = None;
    for x in grid.points(phi.nvars()) {
        let mut point = x.clone();
        point.extend(grads.iter().map(|g| g.eval(&x)));
        let image = lift.apply(&point)?;
        let (y, eta) = image.split_at(phi.nvars());
        let mut dev = 0.0f64;
        for (i, g) in grads.iter().enumerate() {
            dev = dev.max((eta[i] - g.eval(y)).abs());
        }
        if dev > graph_defect {
            graph_defect = dev;
            if dev > SYMMETRY_GRAPH_TOL {
                witness_point = Some(point.clone());
            }
        }
    }
    Ok(SymmetryReport {
        invariant: graph_defect <= SYMMETRY_GRAPH_TOL,
        jet_defect,
        witness_coefficient: None,
        graph_defect: Some(graph_defect),
        witness_point,
    })
}

/// Convenience: the exponent list of the worst coefficient as a MultiIndex.
pub fn worst_coefficient(diff: &Jet) -> Option<MultiIndex> {
    diff.terms()
        .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
        .map(|(mi, _)| mi.clone())
}
