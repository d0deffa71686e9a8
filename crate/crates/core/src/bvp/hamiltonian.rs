//! Polynomial Hamiltonian families `H(q, p; μ)` given as explicit term lists,
//! with analytic gradients and Hessians for the integrator and its tangent
//! map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One monomial `coef · q^{q_exps} · p^{p_exps} · μ^{mu_exps}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub q_exps: Vec<u32>,
    pub p_exps: Vec<u32>,
    pub mu_exps: Vec<u32>,
    pub coef: f64,
}

/// A family of polynomial Hamiltonians on ℝ²ⁿ with `nparams` parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianSystem {
    pub nvars: usize,
    pub nparams: usize,
    pub terms: Vec<HamiltonianTerm>,
}

impl HamiltonianSystem {
    pub fn new(nvars: usize, nparams: usize, terms: Vec<HamiltonianTerm>) -> Result<Self> {
        for (idx, t) in terms.iter().enumerate() {
            if t.q_exps.len() != nvars || t.p_exps.len() != nvars || t.mu_exps.len() != nparams {
                return Err(Error::InvalidInput(format!(
                    "hamiltonian.coeffs[{idx}]: exponent lengths must be ({nvars}, {nvars}, {nparams})"
                )));
            }
            if !t.coef.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    value: t.coef,
                    context: format!("hamiltonian.coeffs[{idx}]"),
                });
            }
        }
        Ok(HamiltonianSystem {
            nvars,
            nparams,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.nvars
    }

    /// Folds the parameter powers into the coefficients; the result evaluates
    /// without touching μ again (the integrator holds μ fixed per trajectory).
    pub fn at_parameters(&self, mu: &[f64]) -> HamiltonianSystem {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut coef = t.coef;
                for (i, e) in t.mu_exps.iter().enumerate() {
                    if *e > 0 {
                        coef *= mu[i].powi(*e as i32);
                    }
                }
                HamiltonianTerm {
                    q_exps: t.q_exps.clone(),
                    p_exps: t.p_exps.clone(),
                    mu_exps: vec![],
                    coef,
                }
            })
            .filter(|t| t.coef != 0.0)
            .collect();
        HamiltonianSystem {
            nvars: self.nvars,
            nparams: 0,
            terms,
        }
    }

    pub fn eval(&self, z: &[f64], mu: &[f64]) -> f64 {
        let n = self.nvars;
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for (i, e) in t.q_exps.iter().enumerate() {
                if *e > 0 {
                    v *= z[i].powi(*e as i32);
                }
            }
            for (i, e) in t.p_exps.iter().enumerate() {
                if *e > 0 {
                    v *= z[n + i].powi(*e as i32);
                }
            }
            for (i, e) in t.mu_exps.iter().enumerate() {
                if *e > 0 {
                    v *= mu[i].powi(*e as i32);
                }
            }
            acc += v;
        }
        acc
    }

    /// Gradient (∂H/∂q, ∂H/∂p) into `out` (length 2n).
    pub fn gradient(&self, z: &[f64], mu: &[f64], out: &mut [f64]) {
        let n = self.nvars;
        out.iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            let mut mu_factor = t.coef;
            for (i, e) in t.mu_exps.iter().enumerate() {
                if *e > 0 {
                    mu_factor *= mu[i].powi(*e as i32);
                }
            }
            if mu_factor == 0.0 {
                continue;
            }
            for target in 0..2 * n {
                let (exps, base): (&[u32], usize) = if target < n {
                    (&t.q_exps, 0)
                } else {
                    (&t.p_exps, n)
                };
                let k = target - base;
                let e = exps[k];
                if e == 0 {
                    continue;
                }
                let mut v = mu_factor * e as f64;
                for (i, eq) in t.q_exps.iter().enumerate() {
                    let mut exp = *eq;
                    if base == 0 && i == k {
                        exp -= 1;
                    }
                    if exp > 0 {
                        v *= z[i].powi(exp as i32);
                    }
                }
                for (i, ep) in t.p_exps.iter().enumerate() {
                    let mut exp = *ep;
                    if base == n && i == k {
                        exp -= 1;
                    }
                    if exp > 0 {
                        v *= z[n + i].powi(exp as i32);
                    }
                }
                out[target] += v;
            }
        }
    }

    /// Hessian into `out` (row-major, (2n)²).
    pub fn hessian(&self, z: &[f64], mu: &[f64], out: &mut [f64]) {
        let dim = 2 * self.nvars;
        out.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..dim {
            for b in a..dim {
                let mut acc = 0.0;
                for t in &self.terms {
                    acc += second_partial(t, z, mu, self.nvars, a, b);
                }
                out[a * dim + b] = acc;
                out[b * dim + a] = acc;
            }
        }
    }
}

fn second_partial(
    t: &HamiltonianTerm,
    z: &[f64],
    mu: &[f64],
    n: usize,
    a: usize,
    b: usize,
) -> f64 {
    let exp_of = |target: usize| -> u32 {
        if target < n {
            t.q_exps[target]
        } else {
            t.p_exps[target - n]
        }
    };
    let ea = exp_of(a);
    let eb = exp_of(b);
    let mut factor = t.coef;
    let (da, db) = if a == b {
        if ea < 2 {
            return 0.0;
        }
        factor *= (ea * (ea - 1)) as f64;
        (2u32, 0u32)
    } else {
        if ea == 0 || eb == 0 {
            return 0.0;
        }
        factor *= (ea * eb) as f64;
        (1u32, 1u32)
    };
    for (i, e) in t.mu_exps.iter().enumerate() {
        if *e > 0 {
            factor *= mu[i].powi(*e as i32);
        }
    }
    let mut v = factor;
    for target in 0..2 * n {
        let mut exp = exp_of(target);
        if target == a {
            exp -= da;
        }
        if target == b {
            exp -= db;
        }
        if exp > 0 {
            v *= z[target].powi(exp as i32);
        }
    }
    v
}
