//! Time-T maps of Hamiltonian families by the implicit midpoint rule, with
//! the variational tangent map integrated alongside.
//!
//! The midpoint stage is solved by Newton iteration to tolerance 1e-13; the
//! tangent update is the Cayley factor `(I − h/2·J·S)⁻¹ (I + h/2·J·S)` at the
//! converged midpoint, which is exactly symplectic for symmetric S.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::linalg::solve_dense_inplace;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImplicitMidpoint,
}

/// A symplectic map realized as N implicit-midpoint steps of size T/N.
#[derive(Clone, Debug)]
pub struct SymplecticMapSpec {
    pub system: HamiltonianSystem,
    pub total_time: f64,
    pub steps: usize,
    pub scheme: Scheme,
}

const STAGE_TOL: f64 = 1e-13;
const STAGE_MAX_ITER: usize = 50;

impl SymplecticMapSpec {
    pub fn new(system: HamiltonianSystem, total_time: f64, steps: usize, scheme: Scheme) -> Result<Self> {
        if !(total_time > 0.0) {
            return Err(Error::InvalidInput("total_time must be positive".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidInput("steps must be at least 1".into()));
        }
        Ok(SymplecticMapSpec {
            system,
            total_time,
            steps,
            scheme,
        })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// The time-T map.
    pub fn time_map(&self, mu: &[f64], z0: &[f64]) -> Result<Vec<f64>> {
        self.integrate(mu, z0, false).map(|(z, _)| z)
    }

    /// The time-T map together with its tangent map.
    pub fn time_map_with_tangent(&self, mu: &[f64], z0: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (z, m) = self.integrate(mu, z0, true)?;
        Ok((z, m.expect("tangent requested")))
    }

    fn integrate(
        &self,
        mu: &[f64],
        z0: &[f64],
        want_tangent: bool,
    ) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
        let dim = self.dim();
        if z0.len() != dim {
            return Err(Error::VarCountMismatch {
                expected: dim,
                got: z0.len(),
            });
        }
        if mu.len() != self.system.nparams {
            return Err(Error::VarCountMismatch {
                expected: self.system.nparams,
                got: mu.len(),
            });
        }
        let n = self.system.nvars;
        let h = self.total_time / self.steps as f64;
        // μ is constant along the trajectory; fold it into the coefficients.
        let system = self.system.at_parameters(mu);
        let mu: &[f64] = &[];
        let mut z = z0.to_vec();
        let mut tangent = if want_tangent {
            Some(DMatrix::<f64>::identity(dim, dim))
        } else {
            None
        };

        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        let mut mid = vec![0.0; dim];
        let mut z_next = vec![0.0; dim];
        let mut residual = vec![0.0; dim];
        let mut jac = vec![0.0; dim * dim];

        for step in 0..self.steps {
            // Predictor: explicit Euler.
            system.gradient(&z, mu, &mut grad);
            for i in 0..dim {
                z_next[i] = z[i] + h * j_apply(&grad, i, n);
            }
            // Modified Newton: the stage matrix is frozen at the predictor
            // midpoint (recomputed only if convergence drags), which changes
            // the iteration count, never the converged stage.
            let mut jac_fresh = false;
            let mut converged = false;
            for iter in 0..STAGE_MAX_ITER {
                for i in 0..dim {
                    mid[i] = 0.5 * (z[i] + z_next[i]);
                }
                system.gradient(&mid, mu, &mut grad);
                let mut err = 0.0f64;
                let mut scale = 1.0f64;
                for i in 0..dim {
                    residual[i] = z_next[i] - z[i] - h * j_apply(&grad, i, n);
                    err = err.max(residual[i].abs());
                    scale = scale.max(z_next[i].abs());
                }
                if err < STAGE_TOL * scale {
                    converged = true;
                    break;
                }
                if !jac_fresh || iter == 8 {
                    // Newton matrix I − (h/2) J S(mid).
                    system.hessian(&mid, mu, &mut hess);
                    for r in 0..dim {
                        for c in 0..dim {
                            let js = j_row_of_matrix(&hess, r, c, n, dim);
                            jac[r * dim + c] = if r == c { 1.0 } else { 0.0 } - 0.5 * h * js;
                        }
                    }
                    jac_fresh = true;
                }
                let mut rhs = residual.clone();
                let mut a = jac.clone();
                solve_dense_inplace(&mut a, &mut rhs, dim)
                    .map_err(|_| Error::StageDivergence { step })?;
                for i in 0..dim {
                    z_next[i] -= rhs[i];
                }
            }
            if !converged {
                return Err(Error::StageDivergence { step });
            }
            if let Some(m) = tangent.as_mut() {
                for i in 0..dim {
                    mid[i] = 0.5 * (z[i] + z_next[i]);
                }
                system.hessian(&mid, mu, &mut hess);
                let mut minus = DMatrix::<f64>::identity(dim, dim);
                let mut plus = DMatrix::<f64>::identity(dim, dim);
                for r in 0..dim {
                    for c in 0..dim {
                        let js = j_row_of_matrix(&hess, r, c, n, dim);
                        minus[(r, c)] -= 0.5 * h * js;
                        plus[(r, c)] += 0.5 * h * js;
                    }
                }
                let cayley = minus
                    .lu()
                    .solve(&plus)
                    .ok_or(Error::StageDivergence { step })?;
                *m = cayley * m.clone();
            }
            std::mem::swap(&mut z, &mut z_next);
        }
        Ok((z, tangent))
    }
}

/// Component i of J·v for v = (∂H/∂q, ∂H/∂p): (∂H/∂p, −∂H/∂q).
#[inline]
fn j_apply(v: &[f64], i: usize, n: usize) -> f64 {
    if i < n {
        v[n + i]
    } else {
        -v[i - n]
    }
}

/// Entry (r, c) of J·S for a row-major symmetric S.
#[inline]
fn j_row_of_matrix(s: &[f64], r: usize, c: usize, n: usize, dim: usize) -> f64 {
    if r < n {
        s[(n + r) * dim + c]
    } else {
        -s[(r - n) * dim + c]
    }
}
