//! Boundary value problems for the time-T map: residual formulations for the
//! supported boundary conditions, a damped-Newton multiple-seed solver, and
//! the reduction of a solution to a Lagrangian contact problem in the product
//! space carrying `Ω = pr*ω − pr′*ω′`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::integrate::SymplecticMapSpec;
use crate::classify::{classify_with, SingularityClass};
use crate::contact::{
    generating_from_problem, sampled_classify_options, AffineSymplectic, ContactProblem,
    LagrangianSpec,
};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::condition_estimate;

/// Boundary data as a Lagrangian submanifold of the product space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Fixed start and end positions: `q(0) = q_start`, `q(T) = q_end`.
    Dirichlet { q_start: Vec<f64>, q_end: Vec<f64> },
    /// Fixed points of the map.
    Periodic,
    /// Graph of `d(potential)` over the product base `(q, q′)` in the
    /// product-standard coordinates.
    GraphicalLagrangian { potential: Jet },
}

impl BoundaryCondition {
    /// Dimension of the shooting unknown for an n-degree-of-freedom system.
    pub fn unknown_dim(&self, n: usize) -> usize {
        match self {
            BoundaryCondition::Dirichlet { .. } => n,
            BoundaryCondition::Periodic => 2 * n,
            BoundaryCondition::GraphicalLagrangian { .. } => 2 * n,
        }
    }

    /// Start point of the trajectory encoded by an unknown vector.
    pub fn start_point(&self, y: &[f64], _n: usize) -> Vec<f64> {
        match self {
            BoundaryCondition::Dirichlet { q_start, .. } => {
                let mut z = q_start.clone();
                z.extend_from_slice(y);
                z
            }
            _ => y.to_vec(),
        }
    }
}

/// Residual and shooting Jacobian of the boundary value problem at an
/// unknown vector.
pub fn bvp_residual(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    mu: &[f64],
    y: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = spec.system.nvars;
    let z0 = bc.start_point(y, n);
    let (zt, m) = spec.time_map_with_tangent(mu, &z0)?;
    match bc {
        BoundaryCondition::Dirichlet { q_end, .. } => {
            let r: Vec<f64> = (0..n).map(|i| zt[i] - q_end[i]).collect();
            // ∂(q-part of Φ)/∂p.
            let jac = DMatrix::from_fn(n, n, |i, j| m[(i, n + j)]);
            Ok((r, jac))
        }
        BoundaryCondition::Periodic => {
            let dim = 2 * n;
            let r: Vec<f64> = (0..dim).map(|i| zt[i] - y[i]).collect();
            let jac = DMatrix::from_fn(dim, dim, |i, j| m[(i, j)] - if i == j { 1.0 } else { 0.0 });
            Ok((r, jac))
        }
        BoundaryCondition::GraphicalLagrangian { potential } => {
            let dim = 2 * n;
            // In product-standard coordinates Q = (q, q′), P = (p, −p′):
            // residual P − ∇W(Q).
            let q_coords: Vec<f64> = z0[..n].iter().chain(zt[..n].iter()).copied().collect();
            let grads: Vec<f64> = (0..dim).map(|i| potential.partial(i).eval(&q_coords)).collect();
            let mut r = vec![0.0; dim];
            for i in 0..n {
                r[i] = z0[n + i] - grads[i];
                r[n + i] = -zt[n + i] - grads[n + i];
            }
            // Jacobian by the chain rule through (z0, zt(z0)).
            let mut jac = DMatrix::zeros(dim, dim);
            let hess_w = {
                let mut h = DMatrix::zeros(dim, dim);
                for a in 0..dim {
                    for b in 0..dim {
                        let pa = potential.partial(a).partial(b).eval(&q_coords);
                        h[(a, b)] = pa;
                    }
                }
                h
            };
            for j in 0..dim {
                // dQ/dz0_j = (e_j-part of q, dq′/dz0_j).
                let mut dq = vec![0.0; dim];
                if j < n {
                    dq[j] = 1.0;
                }
                for i in 0..n {
                    dq[n + i] = m[(i, j)];
                }
                for i in 0..n {
                    let dw: f64 = (0..dim).map(|b| hess_w[(i, b)] * dq[b]).sum();
                    jac[(i, j)] = if j == n + i { 1.0 } else { 0.0 } - dw;
                    let dwp: f64 = (0..dim).map(|b| hess_w[(n + i, b)] * dq[b]).sum();
                    jac[(n + i, j)] = -m[(n + i, j)] - dwp;
                }
            }
            Ok((r, jac))
        }
    }
}

/// A converged boundary value solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BvpSolution {
    /// Phase point at the start of the trajectory.
    pub point: Vec<f64>,
    /// Shooting unknown that produced it.
    pub unknown: Vec<f64>,
    pub residual: f64,
    pub det_jacobian: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition: f64,
}

impl BvpSolution {
    /// True when the shooting Jacobian is numerically singular. The scale
    /// floor of 1 keeps the test meaningful for 1×1 Jacobians, where the
    /// ratio of singular values carries no information, and leaves room for
    /// the O(h²) discretization floor of near-resonant maps.
    pub fn is_degenerate(&self) -> bool {
        self.sigma_min < 1e-4 * self.sigma_max.max(1.0)
    }
}

const SOLVE_TOL: f64 = 1e-11;
const DEDUP_TOL: f64 = 1e-8;

/// Damped Newton from every seed; converged solutions are deduplicated and
/// reported with residual, Jacobian determinant and condition estimate.
/// Non-convergent seeds are dropped.
pub fn solve_bvp(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    mu: &[f64],
    seeds: &[Vec<f64>],
) -> Result<Vec<BvpSolution>> {
    let n = spec.system.nvars;
    let dim = bc.unknown_dim(n);
    let mut solutions: Vec<BvpSolution> = vec![];
    for seed in seeds {
        if seed.len() != dim {
            return Err(Error::InvalidInput(format!(
                "seed length {} does not match the unknown dimension {dim}",
                seed.len()
            )));
        }
        let Some(y) = newton_from_seed(spec, bc, mu, seed)? else {
            continue;
        };
        if solutions
            .iter()
            .any(|s| max_dist(&s.unknown, &y) < DEDUP_TOL)
        {
            continue;
        }
        let (r, jac) = bvp_residual(spec, bc, mu, &y)?;
        let residual = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let det = jac.clone().lu().determinant();
        let condition = condition_estimate(&jac);
        let svd = jac.svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
        solutions.push(BvpSolution {
            point: bc.start_point(&y, n),
            unknown: y,
            residual,
            det_jacobian: det,
            sigma_min,
            sigma_max,
            condition,
        });
    }
    Ok(solutions)
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Newton with backtracking; `Ok(None)` when the seed does not converge.
pub(crate) fn newton_from_seed(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    mu: &[f64],
    seed: &[f64],
) -> Result<Option<Vec<f64>>> {
    let mut y = seed.to_vec();
    let (mut r, mut jac) = match bvp_residual(spec, bc, mu, &y) {
        Ok(v) => v,
        Err(Error::StageDivergence { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut r_norm = norm_inf(&r);
    for _ in 0..80 {
        if r_norm < SOLVE_TOL {
            return Ok(Some(y));
        }
        let rhs = nalgebra::DVector::from_column_slice(&r);
        let Some(delta) = jac.clone().lu().solve(&rhs) else {
            // Singular Jacobian: accept if already converged, else give up.
            return Ok(if r_norm < SOLVE_TOL { Some(y) } else { None });
        };
        let mut lambda = 1.0;
        loop {
            let candidate: Vec<f64> = y
                .iter()
                .zip(delta.iter())
                .map(|(a, d)| a - lambda * d)
                .collect();
            match bvp_residual(spec, bc, mu, &candidate) {
                Ok((r_new, jac_new)) => {
                    let n_new = norm_inf(&r_new);
                    if n_new < (1.0 - 0.25 * lambda) * r_norm || n_new < SOLVE_TOL {
                        y = candidate;
                        r = r_new;
                        jac = jac_new;
                        r_norm = n_new;
                        break;
                    }
                }
                Err(Error::StageDivergence { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return Ok(None);
            }
        }
    }
    Ok(if r_norm < SOLVE_TOL { Some(y) } else { None })
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Builds the Lagrangian contact problem of a boundary value solution in the
/// product space: Λ is the graph of the time-T map, X the boundary
/// manifold, and the chart closures already normalize Ω to the standard form
/// (sign flip on the second factor) and X to the zero section.
pub fn product_contact_problem(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    mu: &[f64],
    z_star: &[f64],
) -> Result<ContactProblem> {
    let n = spec.system.nvars;
    let dim = 2 * n;
    let zt_star = spec.time_map(mu, z_star)?;

    // Solution quality gate.
    let residual = match bc {
        BoundaryCondition::Dirichlet { q_start, q_end } => {
            let mut r = (0..n).fold(0.0f64, |m, i| m.max((zt_star[i] - q_end[i]).abs()));
            r = r.max((0..n).fold(0.0f64, |m, i| m.max((z_star[i] - q_start[i]).abs())));
            r
        }
        BoundaryCondition::Periodic => z_star
            .iter()
            .zip(&zt_star)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        BoundaryCondition::GraphicalLagrangian { potential } => {
            let q_coords: Vec<f64> = z_star[..n]
                .iter()
                .chain(zt_star[..n].iter())
                .copied()
                .collect();
            let mut r = 0.0f64;
            for i in 0..n {
                r = r.max((z_star[n + i] - potential.partial(i).eval(&q_coords)).abs());
                r = r.max((-zt_star[n + i] - potential.partial(n + i).eval(&q_coords)).abs());
            }
            r
        }
    };
    if residual > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "point does not solve the boundary value problem: residual {residual:.3e}"
        )));
    }

    // Normalizer N per boundary kind, mapping raw pairs (z, z′) to standard
    // coordinates with X = zero section and the solution at the origin.
    let normalizer: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync> = match bc {
        BoundaryCondition::Dirichlet { q_start, q_end } => {
            let p_star: Vec<f64> = z_star[n..].to_vec();
            let pp_star: Vec<f64> = zt_star[n..].to_vec();
            let q_start = q_start.clone();
            let q_end = q_end.clone();
            Arc::new(move |z: &[f64], zp: &[f64]| {
                // Base (p − p*, −(p′ − p′*)), fibre (q* − q, Q* − q′).
                let mut w = Vec::with_capacity(4 * z_start_len(&q_start));
                for i in 0..q_start.len() {
                    w.push(z[q_start.len() + i] - p_star[i]);
                }
                for i in 0..q_start.len() {
                    w.push(-(zp[q_start.len() + i] - pp_star[i]));
                }
                for i in 0..q_start.len() {
                    w.push(q_start[i] - z[i]);
                }
                for i in 0..q_start.len() {
                    w.push(q_end[i] - zp[i]);
                }
                w
            })
        }
        BoundaryCondition::Periodic => {
            let z_star = z_star.to_vec();
            Arc::new(move |z: &[f64], zp: &[f64]| {
                let n = z.len() / 2;
                let mut w = Vec::with_capacity(2 * z.len());
                // Base ((q+q′)/2 − q*, (p+p′)/2 − p*), fibre (p − p′, q′ − q).
                for i in 0..n {
                    w.push(0.5 * (z[i] + zp[i]) - z_star[i]);
                }
                for i in 0..n {
                    w.push(0.5 * (z[n + i] + zp[n + i]) - z_star[n + i]);
                }
                for i in 0..n {
                    w.push(z[n + i] - zp[n + i]);
                }
                for i in 0..n {
                    w.push(zp[i] - z[i]);
                }
                w
            })
        }
        BoundaryCondition::GraphicalLagrangian { potential } => {
            let potential = potential.clone();
            let q_star: Vec<f64> = z_star[..n]
                .iter()
                .chain(zt_star[..n].iter())
                .copied()
                .collect();
            Arc::new(move |z: &[f64], zp: &[f64]| {
                let n = z.len() / 2;
                let q_coords: Vec<f64> = z[..n].iter().chain(zp[..n].iter()).copied().collect();
                let mut w = Vec::with_capacity(2 * z.len());
                for i in 0..2 * n {
                    w.push(q_coords[i] - q_star[i]);
                }
                for i in 0..n {
                    w.push(z[n + i] - potential.partial(i).eval(&q_coords));
                }
                for i in 0..n {
                    w.push(-zp[n + i] - potential.partial(n + i).eval(&q_coords));
                }
                w
            })
        }
    };

    let spec_clone = spec.clone();
    let mu_vec = mu.to_vec();
    let z_star_vec = z_star.to_vec();
    let norm_lambda = normalizer.clone();
    let lambda_chart = Arc::new(move |s: &[f64]| {
        let z: Vec<f64> = z_star_vec.iter().zip(s).map(|(a, b)| a + b).collect();
        let zp = spec_clone
            .time_map(&mu_vec, &z)
            .unwrap_or_else(|_| vec![f64::NAN; z.len()]);
        norm_lambda(&z, &zp)
    });

    let x_spec = LagrangianSpec::zero_section(dim, 2);
    let lambda_spec = LagrangianSpec::ImplicitSampler {
        dim,
        chart: lambda_chart,
    };
    ContactProblem::new(
        x_spec,
        lambda_spec,
        vec![0.0; 2 * dim],
        AffineSymplectic::identity(2 * dim),
    )
}

fn z_start_len(q: &[f64]) -> usize {
    q.len()
}

/// Classifies a singular boundary value solution through the generating
/// function of its product contact problem.
pub fn classify_singular_solution(
    spec: &SymplecticMapSpec,
    bc: &BoundaryCondition,
    mu: &[f64],
    z_star: &[f64],
    degree: usize,
) -> Result<SingularityClass> {
    let n = spec.system.nvars;
    let unknown: Vec<f64> = match bc {
        BoundaryCondition::Dirichlet { .. } => z_star[n..].to_vec(),
        _ => z_star.to_vec(),
    };
    let (_, jac) = bvp_residual(spec, bc, mu, &unknown)?;
    let condition = condition_estimate(&jac);
    let svd = jac.svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
    // Scale floor 1 so one-dimensional shooting Jacobians are judged against
    // the natural O(1) scale rather than themselves.
    if sigma_min >= 1e-6 * sigma_max.max(1.0) {
        return Err(Error::RegularSolution { condition });
    }
    let problem = product_contact_problem(spec, bc, mu, z_star)?;
    let jet = generating_from_problem(&problem, degree)?;
    classify_with(&jet, &sampled_classify_options())
}
