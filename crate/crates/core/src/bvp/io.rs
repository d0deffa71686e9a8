//! File formats of the boundary-value pipeline: the TOML system
//! specification and the CSV/JSON diagram artifacts.

use serde::{Deserialize, Serialize};

use super::continuation::{BifurcationDiagram, ContinuationOptions};
use super::hamiltonian::{HamiltonianSystem, HamiltonianTerm};
use super::integrate::{Scheme, SymplecticMapSpec};
use super::solve::BoundaryCondition;
use crate::error::{Error, Result};
use crate::jet::Jet;

/// On-disk system specification.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemConfig {
    pub hamiltonian: HamiltonianSection,
    pub integrator: IntegratorSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub continuation: Option<ContinuationSection>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HamiltonianSection {
    pub nvars: usize,
    pub nparams: usize,
    pub coeffs: Vec<HamiltonianTerm>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntegratorSection {
    pub scheme: Scheme,
    pub time: f64,
    pub steps: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundarySection {
    pub kind: String,
    #[serde(default)]
    pub q_start: Option<Vec<f64>>,
    #[serde(default)]
    pub q_end: Option<Vec<f64>>,
    #[serde(default)]
    pub potential: Option<Jet>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ContinuationSection {
    pub param_box: Vec<Vec<f64>>,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub ds: Option<f64>,
    #[serde(default)]
    pub seeds: Vec<Vec<f64>>,
}

/// Parsed and validated runtime objects.
pub struct SystemSetup {
    pub spec: SymplecticMapSpec,
    pub boundary: BoundaryCondition,
    pub param_box: Vec<(f64, f64)>,
    pub seeds: Vec<Vec<f64>>,
    pub options: ContinuationOptions,
}

pub fn parse_system_toml(text: &str) -> Result<SystemSetup> {
    let config: SystemConfig = toml::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("TOML schema violation: {e}")))?;
    build_setup(config)
}

fn build_setup(config: SystemConfig) -> Result<SystemSetup> {
    let system = HamiltonianSystem::new(
        config.hamiltonian.nvars,
        config.hamiltonian.nparams,
        config.hamiltonian.coeffs,
    )?;
    let n = system.nvars;
    let spec = SymplecticMapSpec::new(
        system,
        config.integrator.time,
        config.integrator.steps,
        config.integrator.scheme,
    )?;
    let boundary = match config.boundary.kind.as_str() {
        "dirichlet" => {
            let q_start = config.boundary.q_start.ok_or_else(|| {
                Error::InvalidInput("boundary.q_start is required for kind=dirichlet".into())
            })?;
            let q_end = config.boundary.q_end.ok_or_else(|| {
                Error::InvalidInput("boundary.q_end is required for kind=dirichlet".into())
            })?;
            if q_start.len() != n || q_end.len() != n {
                return Err(Error::InvalidInput(format!(
                    "boundary.q_start/q_end must have length {n}"
                )));
            }
            BoundaryCondition::Dirichlet { q_start, q_end }
        }
        "periodic" => BoundaryCondition::Periodic,
        "graphical" => {
            let potential = config.boundary.potential.ok_or_else(|| {
                Error::InvalidInput("boundary.potential is required for kind=graphical".into())
            })?;
            if potential.nvars() != 2 * n {
                return Err(Error::InvalidInput(format!(
                    "boundary.potential must have {} variables",
                    2 * n
                )));
            }
            BoundaryCondition::GraphicalLagrangian { potential }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "boundary.kind {other:?} is not one of dirichlet | periodic | graphical"
            )))
        }
    };
    let (param_box, seeds, options) = match config.continuation {
        Some(c) => {
            let mut param_box = vec![];
            for (i, pair) in c.param_box.iter().enumerate() {
                if pair.len() != 2 || pair[0] >= pair[1] {
                    return Err(Error::InvalidInput(format!(
                        "continuation.param_box[{i}] must be [lo, hi] with lo < hi"
                    )));
                }
                param_box.push((pair[0], pair[1]));
            }
            let mut options = ContinuationOptions::default();
            if let Some(ds) = c.ds {
                options.ds = ds;
            }
            if let Some(ms) = c.max_steps {
                options.max_steps = ms;
            }
            (param_box, c.seeds, options)
        }
        None => (vec![], vec![], ContinuationOptions::default()),
    };
    Ok(SystemSetup {
        spec,
        boundary,
        param_box,
        seeds,
        options,
    })
}

/// CSV rendering of the branches: fixed column order
/// `branch_id, mu_1.., z_1.., residual, det_jacobian`.
pub fn diagram_csv(diagram: &BifurcationDiagram, nparams: usize, state_dim: usize) -> String {
    let mut out = String::from("branch_id");
    for i in 1..=nparams {
        out.push_str(&format!(",mu_{i}"));
    }
    for i in 1..=state_dim {
        out.push_str(&format!(",z_{i}"));
    }
    out.push_str(",residual,det_jacobian\n");
    for branch in &diagram.branches {
        for p in &branch.points {
            out.push_str(&branch.id.to_string());
            for v in &p.mu {
                out.push_str(&format!(",{:.17e}", v));
            }
            for v in &p.z {
                out.push_str(&format!(",{:.17e}", v));
            }
            out.push_str(&format!(",{:.3e},{:.17e}\n", p.residual, p.det_jacobian));
        }
    }
    out
}

/// JSON sidecar with the classified singular points.
pub fn singular_points_json(diagram: &BifurcationDiagram) -> Result<String> {
    #[derive(Serialize)]
    struct Entry<'a> {
        mu: &'a [f64],
        z: &'a [f64],
        class: &'a str,
        condition: f64,
    }
    let entries: Vec<Entry> = diagram
        .singular_points
        .iter()
        .map(|s| Entry {
            mu: &s.mu,
            z: &s.z,
            class: &s.label,
            condition: s.condition,
        })
        .collect();
    serde_json::to_string_pretty(&entries)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))
}
