//! Pseudo-arclength continuation of boundary value solutions over one or two
//! parameters, fold detection by sign changes of the shooting-Jacobian
//! determinant, bisection refinement of the fold points, and a Newton
//! locator for cusp points of one-dimensional shooting problems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::integrate::SymplecticMapSpec;
use super::solve::{bvp_residual, classify_singular_solution, newton_from_seed, BoundaryCondition};
use crate::classify::SingularityClass;
use crate::error::{Error, Result};


#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchPoint {
    pub mu: Vec<f64>,
    pub z: Vec<f64>,
    pub residual: f64,
    pub det_jacobian: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub points: Vec<BranchPoint>,
    /// Populated when the branch ended for a reason other than leaving the
    /// parameter box or the step budget.
    pub termination: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularPoint {
    pub mu: Vec<f64>,
    pub z: Vec<f64>,
    /// Catastrophe label; `None` when the classifier refused.
    pub class: Option<SingularityClass>,
    pub label: String,
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub branches: Vec<Branch>,
    pub singular_points: Vec<SingularPoint>,
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationOptions {
    /// Initial arclength step.
    pub ds: f64,
    pub min_ds: f64,
    pub max_ds: f64,
    pub max_steps: usize,
    /// Jet degree used when classifying detected singular solutions.
    pub classify_degree: usize,
    /// Grid resolution of the second parameter when two are active.
    pub second_param_slices: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            ds: 0.02,
            min_ds: 1e-7,
            max_ds: 0.05,
            max_steps: 2000,
            classify_degree: 4,
            second_param_slices: 11,
        }
    }
}

/// Traces solution branches over the parameter box (one or two parameters).
/// With two parameters the second is sliced on a uniform grid and the first
/// is continued per slice.
pub fn continue_branches(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    param_box: &[(f64, f64)],
    seeds: &[Vec<f64>],
    opts: &ContinuationOptions,
) -> Result<BifurcationDiagram> {
    if spec.system.nparams != param_box.len() {
        return Err(Error::InvalidInput(format!(
            "parameter box has {} entries but the system has {} parameters",
            param_box.len(),
            spec.system.nparams
        )));
    }
    match param_box.len() {
        1 => {
            let mut diagram = BifurcationDiagram {
                branches: vec![],
                singular_points: vec![],
            };
            for seed in seeds {
                // A branch may live only near one edge of the box (folds), so
                // both edges are tried as starting lines.
                for from_end in [false, true] {
                    let id = diagram.branches.len();
                    trace_branch(
                        spec,
                        bc,
                        param_box[0],
                        &[],
                        seed,
                        id,
                        from_end,
                        opts,
                        &mut diagram,
                    )?;
                }
            }
            Ok(diagram)
        }
        2 => {
            let mut diagram = BifurcationDiagram {
                branches: vec![],
                singular_points: vec![],
            };
            let slices = opts.second_param_slices.max(2);
            for si in 0..slices {
                let mu2 = param_box[1].0
                    + (param_box[1].1 - param_box[1].0) * si as f64 / (slices - 1) as f64;
                for seed in seeds {
                    for from_end in [false, true] {
                        let id = diagram.branches.len();
                        trace_branch(
                            spec,
                            bc,
                            param_box[0],
                            &[mu2],
                            seed,
                            id,
                            from_end,
                            opts,
                            &mut diagram,
                        )?;
                    }
                }
            }
            Ok(diagram)
        }
        k => Err(Error::InvalidInput(format!(
            "continuation supports 1 or 2 active parameters, got {k}"
        ))),
    }
}

/// Full parameter vector: the active value first, then the fixed tail.
fn full_mu(active: f64, rest: &[f64]) -> Vec<f64> {
    let mut mu = Vec::with_capacity(1 + rest.len());
    mu.push(active);
    mu.extend_from_slice(rest);
    mu
}

#[allow(clippy::too_many_arguments)]
fn trace_branch(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    range: (f64, f64),
    rest: &[f64],
    seed: &[f64],
    id: usize,
    from_end: bool,
    opts: &ContinuationOptions,
    diagram: &mut BifurcationDiagram,
) -> Result<()> {
    let n = spec.system.nvars;
    let m = bc.unknown_dim(n);
    let mu_start = if from_end { range.1 } else { range.0 };
    let mu0 = full_mu(mu_start, rest);
    let Some(y0) = newton_from_seed(spec, bc, &mu0, seed)? else {
        return Ok(());
    };

    // Skip if an existing branch on the same slice already passes through
    // this starting point (a branch that folded back covers both edge
    // solutions, so compare against whole polylines at step resolution).
    let z0 = bc.start_point(&y0, n);
    for b in &diagram.branches {
        for p in &b.points {
            if p.mu[1..] == *rest
                && (p.mu[0] - mu_start).abs() < 2.0 * opts.max_ds
                && p.z.iter().zip(&z0).all(|(a, c)| (a - c).abs() < 1e-4)
            {
                return Ok(());
            }
        }
    }

    let mut branch = Branch {
        id,
        points: vec![],
        termination: None,
    };

    let mut u = augmented(mu_start, &y0);
    let mut tangent = branch_tangent(spec, bc, rest, &u, None)?;
    let into_box = if from_end { -1.0 } else { 1.0 };
    if tangent[0] * into_box < 0.0 {
        tangent = -tangent;
    }
    record_point(spec, bc, rest, &u, &mut branch)?;

    let mut ds = opts.ds;
    let mut prev_det = branch.points.last().unwrap().det_jacobian;
    for _ in 0..opts.max_steps {
        let predictor = &u + &tangent * ds;
        match correct(spec, bc, rest, &predictor, &tangent) {
            Ok(Some(next)) => {
                let mu_active = next[0];
                record_point(spec, bc, rest, &next, &mut branch)?;
                let det = branch.points.last().unwrap().det_jacobian;
                if det * prev_det < 0.0 {
                    refine_fold(spec, bc, rest, &u, &next, opts, diagram)?;
                }
                prev_det = det;
                let new_tangent = branch_tangent(spec, bc, rest, &next, Some(&tangent))?;
                tangent = new_tangent;
                u = next;
                ds = (ds * 1.3).min(opts.max_ds);
                if mu_active < range.0 - 1e-12 || mu_active > range.1 + 1e-12 {
                    break;
                }
            }
            Ok(None) => {
                ds *= 0.5;
                if ds < opts.min_ds {
                    branch.termination = Some("step size underflow".into());
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    if branch.points.len() > 1 || branch.termination.is_some() {
        diagram.branches.push(branch);
    } else if !branch.points.is_empty() {
        diagram.branches.push(branch);
    }
    let _ = m;
    Ok(())
}

fn augmented(mu: f64, y: &[f64]) -> DVector<f64> {
    let mut u = DVector::zeros(1 + y.len());
    u[0] = mu;
    for (i, v) in y.iter().enumerate() {
        u[1 + i] = *v;
    }
    u
}

/// Residual and full Jacobian [J_μ | J_y] at an augmented point.
fn augmented_system(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    rest: &[f64],
    u: &DVector<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let y: Vec<f64> = u.as_slice()[1..].to_vec();
    let mu = full_mu(u[0], rest);
    let (r, j_y) = bvp_residual(spec, bc, &mu, &y)?;
    let m = r.len();
    let h = 1e-6;
    let mu_p = full_mu(u[0] + h, rest);
    let mu_m = full_mu(u[0] - h, rest);
    let (rp, _) = bvp_residual(spec, bc, &mu_p, &y)?;
    let (rm, _) = bvp_residual(spec, bc, &mu_m, &y)?;
    let mut jac = DMatrix::zeros(m, m + 1);
    for i in 0..m {
        jac[(i, 0)] = (rp[i] - rm[i]) / (2.0 * h);
        for j in 0..m {
            jac[(i, 1 + j)] = j_y[(i, j)];
        }
    }
    Ok((r, jac))
}

/// Unit tangent of the branch: null vector of the augmented Jacobian,
/// oriented along the previous tangent when one exists.
fn branch_tangent(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    rest: &[f64],
    u: &DVector<f64>,
    previous: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let (_, jac) = augmented_system(spec, bc, rest, u)?;
    let m = jac.nrows();
    // Append the previous tangent (or e_mu) as a normalization row and solve.
    let mut a = DMatrix::zeros(m + 1, m + 1);
    a.view_mut((0, 0), (m, m + 1)).copy_from(&jac);
    let norm_row: DVector<f64> = match previous {
        Some(t) => t.clone(),
        None => {
            let mut e = DVector::zeros(m + 1);
            e[0] = 1.0;
            e
        }
    };
    for j in 0..m + 1 {
        a[(m, j)] = norm_row[j];
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let t = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("branch tangent system is singular".into()))?;
    let norm = t.norm();
    if norm == 0.0 {
        return Err(Error::Internal("zero branch tangent".into()));
    }
    Ok(&t / norm)
}

/// Corrector: Newton on the residual augmented with the hyperplane through
/// the predictor orthogonal to the tangent.
fn correct(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    rest: &[f64],
    predictor: &DVector<f64>,
    tangent: &DVector<f64>,
) -> Result<Option<DVector<f64>>> {
    let mut u = predictor.clone();
    for _ in 0..25 {
        let (r, jac) = match augmented_system(spec, bc, rest, &u) {
            Ok(v) => v,
            Err(Error::StageDivergence { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let m = r.len();
        let plane = tangent.dot(&(&u - predictor));
        let mut err = plane.abs();
        for v in &r {
            err = err.max(v.abs());
        }
        if err < 1e-11 {
            return Ok(Some(u));
        }
        let mut a = DMatrix::zeros(m + 1, m + 1);
        a.view_mut((0, 0), (m, m + 1)).copy_from(&jac);
        for j in 0..m + 1 {
            a[(m, j)] = tangent[j];
        }
        let mut rhs = DVector::zeros(m + 1);
        for (i, v) in r.iter().enumerate() {
            rhs[i] = *v;
        }
        rhs[m] = plane;
        let Some(delta) = a.lu().solve(&rhs) else {
            return Ok(None);
        };
        if delta.amax() > 1e3 {
            return Ok(None);
        }
        u -= delta;
    }
    Ok(None)
}

fn record_point(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    rest: &[f64],
    u: &DVector<f64>,
    branch: &mut Branch,
) -> Result<()> {
    let n = spec.system.nvars;
    let y: Vec<f64> = u.as_slice()[1..].to_vec();
    let mu = full_mu(u[0], rest);
    let (r, jac) = bvp_residual(spec, bc, &mu, &y)?;
    branch.points.push(BranchPoint {
        mu,
        z: bc.start_point(&y, n),
        residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        det_jacobian: jac.lu().determinant(),
    });
    Ok(())
}

/// Bisection along the branch segment until the determinant magnitude drops
/// under 1e-10, then classification of the fold point.
#[allow(clippy::too_many_arguments)]
fn refine_fold(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    rest: &[f64],
    u_a: &DVector<f64>,
    u_b: &DVector<f64>,
    opts: &ContinuationOptions,
    diagram: &mut BifurcationDiagram,
) -> Result<()> {
    let n = spec.system.nvars;
    let det_at = |u: &DVector<f64>| -> Result<f64> {
        let y: Vec<f64> = u.as_slice()[1..].to_vec();
        let mu = full_mu(u[0], rest);
        let (_, jac) = bvp_residual(spec, bc, &mu, &y)?;
        Ok(jac.lu().determinant())
    };
    let mut a = u_a.clone();
    let mut b = u_b.clone();
    let mut det_a = det_at(&a)?;
    let mut best = a.clone();
    let mut best_det = det_a;
    for _ in 0..80 {
        let secant = &b - &a;
        let norm = secant.norm();
        if norm == 0.0 {
            break;
        }
        let tangent = &secant / norm;
        let mid = (&a + &b) * 0.5;
        let Some(c) = correct(spec, bc, rest, &mid, &tangent)? else {
            break;
        };
        let det_c = det_at(&c)?;
        if det_c.abs() < best_det.abs() {
            best = c.clone();
            best_det = det_c;
        }
        if det_c.abs() < 1e-10 {
            break;
        }
        if det_a * det_c < 0.0 {
            b = c;
        } else {
            a = c;
            det_a = det_c;
        }
    }

    let y: Vec<f64> = best.as_slice()[1..].to_vec();
    let mu = full_mu(best[0], rest);
    let z = bc.start_point(&y, n);

    // The same fold can be crossed by several traced branches.
    for s in &diagram.singular_points {
        if s.mu.iter().zip(&mu).all(|(a, b)| (a - b).abs() < 1e-6)
            && s.z.iter().zip(&z).all(|(a, b)| (a - b).abs() < 1e-6)
        {
            return Ok(());
        }
    }

    let (_, jac) = bvp_residual(spec, bc, &mu, &y)?;
    let condition = degeneracy_condition(&jac);
    let (class, label) = match classify_singular_solution(spec, bc, &mu, &z, opts.classify_degree) {
        Ok(c) => (Some(c), c.label()),
        Err(e) if e.is_indeterminate() => (None, "indeterminate".into()),
        Err(e) => return Err(e),
    };
    diagram.singular_points.push(SingularPoint {
        mu,
        z,
        class,
        label,
        condition,
    });
    Ok(())
}

/// Degeneracy measure with the O(1) scale floor, so one-dimensional shooting
/// Jacobians report how singular they are rather than a trivial ratio.
fn degeneracy_condition(jac: &DMatrix<f64>) -> f64 {
    let svd = jac.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
    if sigma_min == 0.0 {
        f64::INFINITY
    } else {
        sigma_max.max(1.0) / sigma_min
    }
}

/// A located cusp point of a one-dimensional shooting problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuspPoint {
    pub mu: Vec<f64>,
    pub z: Vec<f64>,
    pub class: Option<SingularityClass>,
    pub label: String,
}

/// Newton refinement of a cusp of a Dirichlet problem with one degree of
/// freedom: solves `R = ∂R/∂p = ∂²R/∂p² = 0` for `(p, μ₁, μ₂)` from the
/// given seed, then classifies the germ there.
pub fn locate_cusp(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    seed_p: f64,
    seed_mu: &[f64],
    classify_degree: usize,
) -> Result<CuspPoint> {
    let n = spec.system.nvars;
    if n != 1 || !matches!(bc, BoundaryCondition::Dirichlet { .. }) {
        return Err(Error::InvalidInput(
            "cusp refinement supports Dirichlet problems with one degree of freedom".into(),
        ));
    }
    if spec.system.nparams != 2 || seed_mu.len() != 2 {
        return Err(Error::InvalidInput(
            "cusp refinement needs exactly two parameters".into(),
        ));
    }

    // G(p, μ₁, μ₂) = (R, ∂R/∂p, ∂²R/∂p²).
    let g = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let p = v[0];
        let mu = [v[1], v[2]];
        let (r, jac) = bvp_residual(spec, bc, &mu, &[p])?;
        let h = 1e-5;
        let (_, jp) = bvp_residual(spec, bc, &mu, &[p + h])?;
        let (_, jm) = bvp_residual(spec, bc, &mu, &[p - h])?;
        let second = (jp[(0, 0)] - jm[(0, 0)]) / (2.0 * h);
        Ok(DVector::from_column_slice(&[r[0], jac[(0, 0)], second]))
    };

    let mut v = DVector::from_column_slice(&[seed_p, seed_mu[0], seed_mu[1]]);
    for _ in 0..60 {
        let gv = g(&v)?;
        if gv.amax() < 1e-9 {
            break;
        }
        let h = 1e-6;
        let mut jac = DMatrix::zeros(3, 3);
        for j in 0..3 {
            let mut plus = v.clone();
            let mut minus = v.clone();
            plus[j] += h;
            minus[j] -= h;
            let gp = g(&plus)?;
            let gm = g(&minus)?;
            for i in 0..3 {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let delta = jac
            .lu()
            .solve(&gv)
            .ok_or_else(|| Error::Internal("cusp Newton system is singular".into()))?;
        v -= delta;
    }
    let gv = g(&v)?;
    if gv.amax() > 1e-7 {
        return Err(Error::Internal(format!(
            "cusp refinement stalled with residual {:.3e}",
            gv.amax()
        )));
    }

    // The finite-difference Newton bottoms out around 1e-9. Polish the plain
    // residual by a secant in μ₁ at fixed (p, μ₂): the residual is cubic-flat
    // in p at a cusp but responds at first order to μ₁, so this reaches
    // machine-level residuals while moving the parameters by ~1e-10 and
    // leaving the degeneracy intact.
    let p_star = v[0];
    let mu2_star = v[2];
    let res_at = |mu1: f64| -> Result<f64> {
        let (r, _) = bvp_residual(spec, bc, &[mu1, mu2_star], &[p_star])?;
        Ok(r[0])
    };
    let mut a0 = v[1] - 1e-6;
    let mut a1 = v[1];
    let mut r0 = res_at(a0)?;
    let mut r1 = res_at(a1)?;
    for _ in 0..30 {
        if r1.abs() < 1e-13 || (r1 - r0).abs() < 1e-300 {
            break;
        }
        let a2 = a1 - r1 * (a1 - a0) / (r1 - r0);
        a0 = a1;
        r0 = r1;
        a1 = a2;
        r1 = res_at(a1)?;
    }
    if r1.abs() < res_at(v[1])?.abs() {
        v[1] = a1;
    }

    let mu = vec![v[1], v[2]];
    let z = bc.start_point(&[v[0]], n);
    let (class, label) = match classify_singular_solution(spec, bc, &mu, &z, classify_degree) {
        Ok(c) => (Some(c), c.label()),
        Err(e) if e.is_indeterminate() => (None, "indeterminate".into()),
        Err(e) => return Err(e),
    };
    Ok(CuspPoint {
        mu,
        z,
        class,
        label,
    })
}
