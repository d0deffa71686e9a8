//! Recognition of the stable right-equivalence class of a critical jet and
//! equivalence decisions for germ pairs.
//!
//! The classifier is sound rather than complete: whenever a decision would
//! rest on a coefficient inside a tolerance band, or a germ falls outside the
//! recognized catalogue (corank ≥ 3, modality > 0, insufficient jet degree),
//! it refuses with `Indeterminate` instead of guessing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{CoordinateChange, Jet};
use crate::splitting::{split, MorseSplit};

/// Series of the recognized classes.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Family {
    Morse,
    A,
    D,
    E,
}

/// Stable right-equivalence invariant of a critical germ.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SingularityClass {
    pub family: Family,
    pub k: u32,
    /// Sign datum for the classes that carry one: A_k with odd k and all D_k.
    pub sign: Option<i8>,
    pub corank: usize,
    pub milnor: u32,
}

impl SingularityClass {
    fn morse() -> Self {
        SingularityClass {
            family: Family::Morse,
            k: 1,
            sign: None,
            corank: 0,
            milnor: 1,
        }
    }

    fn a(k: u32, sign: Option<i8>) -> Self {
        SingularityClass {
            family: Family::A,
            k,
            sign,
            corank: 1,
            milnor: k,
        }
    }

    fn d(k: u32, sign: i8) -> Self {
        SingularityClass {
            family: Family::D,
            k,
            sign: Some(sign),
            corank: 2,
            milnor: k,
        }
    }

    fn e(k: u32) -> Self {
        SingularityClass {
            family: Family::E,
            k,
            sign: None,
            corank: 2,
            milnor: k,
        }
    }

    /// Compact label, e.g. `A2`, `A3+`, `D4-`, `E6`, `Morse`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SingularityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Morse => write!(f, "Morse"),
            Family::A => {
                write!(f, "A{}", self.k)?;
                match self.sign {
                    Some(1) => write!(f, "+"),
                    Some(-1) => write!(f, "-"),
                    _ => Ok(()),
                }
            }
            Family::D => {
                write!(f, "D{}", self.k)?;
                match self.sign {
                    Some(1) => write!(f, "+"),
                    Some(-1) => write!(f, "-"),
                    _ => Ok(()),
                }
            }
            Family::E => write!(f, "E{}", self.k),
        }
    }
}

impl FromStr for SingularityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "Morse" {
            return Ok(SingularityClass::morse());
        }
        let bad = || Error::InvalidInput(format!("unrecognized class label {s:?}"));
        let (head, sign) = match s.as_bytes().last() {
            Some(b'+') => (&s[..s.len() - 1], Some(1i8)),
            Some(b'-') => (&s[..s.len() - 1], Some(-1i8)),
            _ => (s, None),
        };
        if head.len() < 2 {
            return Err(bad());
        }
        let k: u32 = head[1..].parse().map_err(|_| bad())?;
        let class = match (&head[..1], sign) {
            ("A", None) if k >= 2 && k % 2 == 0 => SingularityClass::a(k, None),
            ("A", Some(sg)) if k >= 3 && k % 2 == 1 => SingularityClass::a(k, Some(sg)),
            ("D", Some(sg)) if k >= 4 => SingularityClass::d(k, sg),
            ("E", None) if (6..=8).contains(&k) => SingularityClass::e(k),
            _ => return Err(bad()),
        };
        Ok(class)
    }
}

/// Tuning knobs of the classifier.
#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// A coefficient counts as zero when its magnitude is below
    /// `zero_tol × (largest coefficient of the reduced germ)`. The default
    /// suits exact jet input; sampled pipelines pass a looser value matching
    /// their estimation error.
    pub zero_tol: f64,
    /// Cap on normal-form reduction rounds before refusing.
    pub max_rounds: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            zero_tol: 1e-9,
            max_rounds: 10,
        }
    }
}

/// Tolerance for deciding the real-root structure of the binary cubic on
/// normalized coefficients.
const DISC_DECIDE: f64 = 1e-9;
/// Below this the discriminant counts as exactly zero (repeated root).
const DISC_ZERO: f64 = 1e-11;

/// Classifies a critical jet. Applies [`split`] first; the reduced part
/// carries the class.
pub fn classify(f: &Jet) -> Result<SingularityClass> {
    classify_with(f, &ClassifyOptions::default())
}

pub fn classify_with(f: &Jet, opts: &ClassifyOptions) -> Result<SingularityClass> {
    let (class, _) = classify_split(f, opts)?;
    Ok(class)
}

/// Classification plus the underlying Morse split (for callers that also
/// need the quadratic signature).
pub fn classify_split(f: &Jet, opts: &ClassifyOptions) -> Result<(SingularityClass, MorseSplit)> {
    let ms = split(f)?;
    let class = classify_reduced(&ms.reduced, opts)?;
    Ok((class, ms))
}

/// Classifies an already fully reduced germ (vanishing 2-jet).
pub fn classify_reduced(reduced: &Jet, opts: &ClassifyOptions) -> Result<SingularityClass> {
    match reduced.nvars() {
        0 => Ok(SingularityClass::morse()),
        1 => classify_corank_one(reduced, opts),
        2 => classify_corank_two(reduced, opts),
        c => Err(Error::Indeterminate(format!(
            "corank {c} is outside the recognized catalogue"
        ))),
    }
}

fn classify_corank_one(reduced: &Jet, opts: &ClassifyOptions) -> Result<SingularityClass> {
    let scale = reduced.max_coefficient();
    if scale == 0.0 {
        return Err(Error::Indeterminate(
            "reduced germ vanishes to truncation order".into(),
        ));
    }
    let threshold = opts.zero_tol * scale;
    let mut m = None;
    for (mi, c) in reduced.terms() {
        if c.abs() >= threshold {
            m = Some((mi.degree() as usize, c));
            break;
        }
    }
    let Some((m, leading)) = m else {
        return Err(Error::Indeterminate(
            "reduced germ vanishes to truncation order".into(),
        ));
    };
    debug_assert!(m >= 3);
    let k = (m - 1) as u32;
    if k > 6 {
        return Err(Error::Indeterminate(format!(
            "A-series index {k} exceeds the supported range"
        )));
    }
    let sign = if m % 2 == 0 {
        Some(if leading > 0.0 { 1 } else { -1 })
    } else {
        None
    };
    Ok(SingularityClass::a(k, sign))
}

/// Coefficients (a, b, c, d) of the cubic part a·x³ + b·x²y + c·xy² + d·y³.
fn cubic_coefficients(g: &Jet) -> [f64; 4] {
    [
        g.coefficient(&[3, 0]),
        g.coefficient(&[2, 1]),
        g.coefficient(&[1, 2]),
        g.coefficient(&[0, 3]),
    ]
}

fn classify_corank_two(reduced: &Jet, opts: &ClassifyOptions) -> Result<SingularityClass> {
    let overall = reduced.max_coefficient();
    if overall == 0.0 {
        return Err(Error::Indeterminate(
            "reduced germ vanishes to truncation order".into(),
        ));
    }
    let cubic = cubic_coefficients(reduced);
    let cubic_scale = cubic.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if cubic_scale < opts.zero_tol * overall {
        return Err(Error::Indeterminate(
            "cubic part vanishes; germ is not simple or jet degree is insufficient".into(),
        ));
    }

    // Rotate to a frame where the t³ coefficient is healthy, so root finding
    // in the chart (t, 1) sees no line at infinity. Deterministic angles.
    let mut g = reduced.clone();
    let mut coeffs = cubic.map(|c| c / cubic_scale);
    if coeffs[0].abs() < 0.1 {
        for angle in [0.37f64, 0.83, 1.21] {
            let rotated = rotate2(reduced, angle)?;
            let rc = cubic_coefficients(&rotated);
            let rs = rc.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if rc[0].abs() / rs >= 0.1 {
                g = rotated;
                coeffs = rc.map(|c| c / rs);
                break;
            }
        }
        if coeffs[0].abs() < 0.1 {
            return Err(Error::Indeterminate(
                "could not orient the cubic away from the coordinate axes".into(),
            ));
        }
    }

    let [a, b, c, d] = coeffs;
    let disc = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
        - 4.0 * a * c.powi(3)
        - 27.0 * a * a * d * d;

    if disc >= DISC_DECIDE {
        // Three distinct real lines.
        return Ok(SingularityClass::d(4, -1));
    }
    if disc <= -DISC_DECIDE {
        // One real line, a complex-conjugate pair.
        return Ok(SingularityClass::d(4, 1));
    }
    if disc.abs() >= DISC_ZERO {
        return Err(Error::Indeterminate(format!(
            "cubic discriminant {disc:.3e} lies in the dead band"
        )));
    }

    // Repeated factor. Perfect cube iff the Hessian covariant vanishes.
    let h1 = b * b - 3.0 * a * c;
    let h2 = b * c - 9.0 * a * d;
    let h3 = c * c - 3.0 * b * d;
    let covariant = h1.abs().max(h2.abs()).max(h3.abs());
    if covariant < 1e-9 {
        classify_e_series(&g, a, b, opts)
    } else {
        classify_d_series(&g, [a, b, c, d], opts)
    }
}

/// Rotation of a 2-variable jet by `angle`.
fn rotate2(g: &Jet, angle: f64) -> Result<Jet> {
    let (s, c) = angle.sin_cos();
    let rot = nalgebra::DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    CoordinateChange::linear(&rot, g.degree())?.apply_to(g)
}

/// D_k for k ≥ 5: cubic with a repeated (not triple) linear factor.
fn classify_d_series(g: &Jet, coeffs: [f64; 4], opts: &ClassifyOptions) -> Result<SingularityClass> {
    let [a, b, c, d] = coeffs;
    // Double root of p(t) = at³ + bt² + ct + d is a root of p'.
    let disc_p = b * b - 3.0 * a * c;
    if disc_p < 0.0 {
        return Err(Error::Indeterminate(
            "derivative of the cubic has no real root".into(),
        ));
    }
    let sq = disc_p.sqrt();
    let candidates = [(-b + sq) / (3.0 * a), (-b - sq) / (3.0 * a)];
    let p = |t: f64| ((a * t + b) * t + c) * t + d;
    let double = if p(candidates[0]).abs() <= p(candidates[1]).abs() {
        candidates[0]
    } else {
        candidates[1]
    };
    if p(double).abs() > 1e-5 {
        return Err(Error::Indeterminate(
            "repeated root of the cubic could not be located".into(),
        ));
    }
    // Vieta: double + double + simple = −b/a.
    let simple = -b / a - 2.0 * double;
    if (double - simple).abs() < 1e-6 {
        return Err(Error::Indeterminate(
            "cubic is too close to a perfect cube".into(),
        ));
    }

    // Send the double line to {x = 0}… precisely: with u = x − double·y and
    // v = x − simple·y the cubic becomes κ·u²·v.
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, -double, 1.0, -simple]);
    let m_inv = m.try_inverse().expect("distinct roots give an invertible change");
    let mut g = CoordinateChange::linear(&m_inv, g.degree())?.apply_to(g)?;

    let kappa = g.coefficient(&[2, 1]);
    snap_cubic(&mut g, &[(2, 1, kappa)])?;

    // Normalize the u²v coefficient to 1.
    let lam = kappa.abs().powf(-1.0 / 3.0);
    let nu = kappa.signum() * lam;
    let scale_m = nalgebra::DMatrix::from_row_slice(2, 2, &[lam, 0.0, 0.0, nu]);
    g = CoordinateChange::linear(&scale_m, g.degree())?.apply_to(&g)?;
    let lead = g.coefficient(&[2, 1]);
    snap_cubic(&mut g, &[(2, 1, lead)])?;
    g.set_coefficient(&[2, 1], 1.0);

    // Eliminate x-divisible monomials above the cubic.
    g = eliminate_x_divisible(&g, opts)?;

    // The first surviving pure power of y fixes the index.
    let scale = g.max_coefficient().max(1.0);
    for j in 4..=g.degree() {
        let mut e = vec![0u32, j as u32];
        e[0] = 0;
        let cj = g.coefficient(&[0, j as u32]);
        if cj.abs() >= opts.zero_tol * scale {
            let k = (j + 1) as u32;
            if k > 6 {
                return Err(Error::Indeterminate(format!(
                    "D-series index {k} exceeds the supported range"
                )));
            }
            return Ok(SingularityClass::d(k, if cj > 0.0 { 1 } else { -1 }));
        }
    }
    Err(Error::Indeterminate(
        "no pure power term found up to the truncation degree".into(),
    ))
}

/// E₆/E₇/E₈: cubic is a perfect cube.
fn classify_e_series(g: &Jet, a: f64, b: f64, opts: &ClassifyOptions) -> Result<SingularityClass> {
    let triple = -b / (3.0 * a);
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, -triple, 0.0, 1.0]);
    let m_inv = m.try_inverse().expect("shear is invertible");
    let mut g = CoordinateChange::linear(&m_inv, g.degree())?.apply_to(g)?;

    let kappa = g.coefficient(&[3, 0]);
    if kappa.abs() < 1e-9 {
        return Err(Error::Indeterminate("cube normalization degenerated".into()));
    }
    snap_cubic(&mut g, &[(3, 0, kappa)])?;
    let lam = kappa.signum() * kappa.abs().powf(-1.0 / 3.0);
    let scale_m = nalgebra::DMatrix::from_row_slice(2, 2, &[lam, 0.0, 0.0, 1.0]);
    g = CoordinateChange::linear(&scale_m, g.degree())?.apply_to(&g)?;
    let lead = g.coefficient(&[3, 0]);
    snap_cubic(&mut g, &[(3, 0, lead)])?;
    g.set_coefficient(&[3, 0], 1.0);

    if g.degree() < 4 {
        return Err(Error::Indeterminate(
            "jet degree too low for the E-series determinator".into(),
        ));
    }

    g = kill_x2_divisible(&g, 4)?;
    let scale = g.max_coefficient().max(1.0);
    let threshold = opts.zero_tol * scale;
    let c_xy3 = g.coefficient(&[1, 3]);
    let c_y4 = g.coefficient(&[0, 4]);

    if c_y4.abs() >= threshold {
        // A shear in y removes the xy³ term against y⁴.
        let alpha = -c_xy3 / (4.0 * c_y4);
        let shear = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, alpha, 1.0]);
        g = CoordinateChange::linear(&shear, g.degree())?.apply_to(&g)?;
        g = kill_x2_divisible(&g, 4)?;
        if g.coefficient(&[1, 3]).abs() > 1e-7 * scale {
            return Err(Error::Indeterminate(
                "quartic normalization stalled".into(),
            ));
        }
        return Ok(SingularityClass::e(6));
    }
    if c_xy3.abs() >= threshold {
        return Ok(SingularityClass::e(7));
    }

    if g.degree() < 5 {
        return Err(Error::Indeterminate(
            "jet degree too low to separate E₈ from worse".into(),
        ));
    }
    g = kill_x2_divisible(&g, 5)?;
    let c_xy4 = g.coefficient(&[1, 4]);
    let c_y5 = g.coefficient(&[0, 5]);
    if c_y5.abs() >= threshold {
        let beta = -c_xy4 / (5.0 * c_y5);
        let shear = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, beta, 1.0]);
        g = CoordinateChange::linear(&shear, g.degree())?.apply_to(&g)?;
        g = kill_x2_divisible(&g, 5)?;
        if g.coefficient(&[1, 4]).abs() > 1e-7 * scale {
            return Err(Error::Indeterminate(
                "quintic normalization stalled".into(),
            ));
        }
        return Ok(SingularityClass::e(8));
    }
    Err(Error::Indeterminate(
        "germ is not simple within the E-series determinator".into(),
    ))
}

/// Verifies that the cubic part consists of the expected monomials only
/// (up to root-finding round-off) and deletes the residue.
fn snap_cubic(g: &mut Jet, keep: &[(u32, u32, f64)]) -> Result<()> {
    let scale = keep.iter().fold(0.0f64, |m, (_, _, c)| m.max(c.abs())).max(1e-300);
    for (i, j) in [(3u32, 0u32), (2, 1), (1, 2), (0, 3)] {
        if keep.iter().any(|(ki, kj, _)| *ki == i && *kj == j) {
            continue;
        }
        let c = g.coefficient(&[i, j]);
        if c.abs() > 1e-7 * scale {
            return Err(Error::Indeterminate(format!(
                "cubic normalization left residue {c:.3e} at x^{i} y^{j}"
            )));
        }
        g.set_coefficient(&[i, j], 0.0);
    }
    Ok(())
}

/// Round-based elimination of monomials x^i y^j (i ≥ 1, degree ≥ 4) against
/// the leading x²y term.
fn eliminate_x_divisible(g: &Jet, opts: &ClassifyOptions) -> Result<Jet> {
    let degree = g.degree();
    let mut g = g.clone();
    for _ in 0..opts.max_rounds {
        let offending: Vec<(u32, u32, f64)> = g
            .terms()
            .filter(|(mi, _)| mi.degree() >= 4 && mi.exponent(0) >= 1)
            .map(|(mi, c)| (mi.exponent(0), mi.exponent(1), c))
            .collect();
        let Some(lowest) = offending.iter().map(|(i, j, _)| i + j).min() else {
            return Ok(g);
        };
        let mut dx = Jet::zero(2, degree);
        let mut dy = Jet::zero(2, degree);
        for (i, j, c) in &offending {
            if i + j != lowest {
                continue;
            }
            if *i >= 2 {
                // x²y absorbs it through a shift of y.
                let e = [*i - 2, *j];
                dy.set_coefficient(&e, dy.coefficient(&e) - c);
            } else {
                // i == 1: 2xy absorbs it through a shift of x.
                let e = [0u32, *j - 1];
                dx.set_coefficient(&e, dx.coefficient(&e) - c / 2.0);
            }
        }
        let comp_x = Jet::variable(2, degree, 0).add(&dx)?;
        let comp_y = Jet::variable(2, degree, 1).add(&dy)?;
        let step = CoordinateChange::new(vec![comp_x, comp_y])?;
        g = step.apply_to(&g)?;
    }
    let leftovers = g
        .terms()
        .any(|(mi, _)| mi.degree() >= 4 && mi.exponent(0) >= 1);
    if leftovers {
        Err(Error::Indeterminate(
            "normal-form reduction stalled before clearing the regular block".into(),
        ))
    } else {
        Ok(g)
    }
}

/// Kills x²-divisible monomials of the given degree against the x³ term.
fn kill_x2_divisible(g: &Jet, upto_degree: usize) -> Result<Jet> {
    let degree = g.degree();
    let mut g = g.clone();
    for target in 4..=upto_degree {
        for _ in 0..3 {
            let offending: Vec<(u32, u32, f64)> = g
                .terms()
                .filter(|(mi, _)| {
                    mi.degree() as usize == target && mi.exponent(0) >= 2
                })
                .map(|(mi, c)| (mi.exponent(0), mi.exponent(1), c))
                .collect();
            if offending.is_empty() {
                break;
            }
            let mut dx = Jet::zero(2, degree);
            for (i, j, c) in &offending {
                let e = [*i - 2, *j];
                dx.set_coefficient(&e, dx.coefficient(&e) - c / 3.0);
            }
            let comp_x = Jet::variable(2, degree, 0).add(&dx)?;
            let comp_y = Jet::variable(2, degree, 1);
            let step = CoordinateChange::new(vec![comp_x, comp_y])?;
            g = step.apply_to(&g)?;
        }
    }
    Ok(g)
}

/// Outcome of an equivalence decision.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum EquivalenceReason {
    Equal,
    ClassMismatch,
    SignatureMismatch,
    VarCountMismatch,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub witness_class: Option<(SingularityClass, SingularityClass)>,
    pub reason: EquivalenceReason,
}

impl EquivalenceVerdict {
    fn indeterminate() -> Self {
        EquivalenceVerdict {
            equivalent: false,
            witness_class: None,
            reason: EquivalenceReason::Indeterminate,
        }
    }
}

/// Decides stable right equivalence through the classification invariant.
/// The residual quadratic signatures are deliberately not compared: adding
/// fresh square variables can absorb them.
pub fn stably_right_equivalent(f: &Jet, g: &Jet) -> Result<EquivalenceVerdict> {
    stably_right_equivalent_with(f, g, &ClassifyOptions::default())
}

pub fn stably_right_equivalent_with(
    f: &Jet,
    g: &Jet,
    opts: &ClassifyOptions,
) -> Result<EquivalenceVerdict> {
    let cf = match classify_with(f, opts) {
        Ok(c) => c,
        Err(e) if e.is_indeterminate() => return Ok(EquivalenceVerdict::indeterminate()),
        Err(e) => return Err(e),
    };
    let cg = match classify_with(g, opts) {
        Ok(c) => c,
        Err(e) if e.is_indeterminate() => return Ok(EquivalenceVerdict::indeterminate()),
        Err(e) => return Err(e),
    };
    let equal = cf == cg;
    Ok(EquivalenceVerdict {
        equivalent: equal,
        witness_class: Some((cf, cg)),
        reason: if equal {
            EquivalenceReason::Equal
        } else {
            EquivalenceReason::ClassMismatch
        },
    })
}

/// Right equivalence for germs in the same number of variables: stable
/// equivalence plus matching Hessian signatures (the cancellation law makes
/// this complete on the recognized simple classes).
pub fn right_equivalent_same_vars(f: &Jet, g: &Jet) -> Result<EquivalenceVerdict> {
    right_equivalent_same_vars_with(f, g, &ClassifyOptions::default())
}

pub fn right_equivalent_same_vars_with(
    f: &Jet,
    g: &Jet,
    opts: &ClassifyOptions,
) -> Result<EquivalenceVerdict> {
    if f.nvars() != g.nvars() {
        return Err(Error::VarCountMismatch {
            expected: f.nvars(),
            got: g.nvars(),
        });
    }
    let split_f = split(f)?;
    let split_g = split(g)?;
    let stable = stably_right_equivalent_with(f, g, opts)?;
    if stable.reason == EquivalenceReason::Indeterminate {
        return Ok(stable);
    }
    if !stable.equivalent {
        return Ok(stable);
    }
    if split_f.signature != split_g.signature {
        return Ok(EquivalenceVerdict {
            equivalent: false,
            witness_class: stable.witness_class,
            reason: EquivalenceReason::SignatureMismatch,
        });
    }
    Ok(EquivalenceVerdict {
        equivalent: true,
        witness_class: stable.witness_class,
        reason: EquivalenceReason::Equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(nvars: usize, degree: usize, monomials: &[(f64, &[u32])]) -> Jet {
        Jet::from_monomials(nvars, degree, monomials).unwrap()
    }

    #[test]
    fn recognizes_a2() {
        let c = classify(&jet(1, 4, &[(1.0, &[3])])).unwrap();
        assert_eq!(c.label(), "A2");
        assert_eq!(c.corank, 1);
        assert_eq!(c.milnor, 2);
    }

    #[test]
    fn recognizes_a_series_signs() {
        let c = classify(&jet(1, 5, &[(1.0, &[4])])).unwrap();
        assert_eq!(c.label(), "A3+");
        let c = classify(&jet(1, 5, &[(-1.0, &[4])])).unwrap();
        assert_eq!(c.label(), "A3-");
        // Odd-power leading terms carry no sign: x³ ~ −x³.
        let c = classify(&jet(1, 4, &[(-1.0, &[3])])).unwrap();
        assert_eq!(c.label(), "A2");
        let c = classify(&jet(1, 6, &[(2.0, &[5])])).unwrap();
        assert_eq!(c.label(), "A4");
    }

    #[test]
    fn low_order_term_dominates() {
        // x⁴ + εx³ is A₂: the cubic term wins.
        let c = classify(&jet(1, 5, &[(1.0, &[4]), (0.1, &[3])])).unwrap();
        assert_eq!(c.label(), "A2");
    }

    #[test]
    fn recognizes_d4_variants() {
        // x²y − y³ factors into three distinct real lines.
        let c = classify(&jet(2, 4, &[(1.0, &[2, 1]), (-1.0, &[0, 3])])).unwrap();
        assert_eq!(c.label(), "D4-");
        assert_eq!(c.corank, 2);
        assert_eq!(c.milnor, 4);
        // x³ + xy² = x(x² + y²) has a single real line.
        let c = classify(&jet(2, 4, &[(1.0, &[3, 0]), (1.0, &[1, 2])])).unwrap();
        assert_eq!(c.label(), "D4+");
    }

    #[test]
    fn recognizes_higher_d_series() {
        let c = classify(&jet(2, 5, &[(1.0, &[2, 1]), (1.0, &[0, 4])])).unwrap();
        assert_eq!(c.label(), "D5+");
        assert_eq!(c.milnor, 5);
        let c = classify(&jet(2, 5, &[(1.0, &[2, 1]), (-1.0, &[0, 4])])).unwrap();
        assert_eq!(c.label(), "D5-");
        let c = classify(&jet(2, 6, &[(1.0, &[2, 1]), (1.0, &[0, 5])])).unwrap();
        assert_eq!(c.label(), "D6+");
    }

    #[test]
    fn recognizes_e_series() {
        let c = classify(&jet(2, 5, &[(1.0, &[3, 0]), (1.0, &[0, 4])])).unwrap();
        assert_eq!(c.label(), "E6");
        let c = classify(&jet(2, 5, &[(1.0, &[3, 0]), (-1.0, &[0, 4])])).unwrap();
        assert_eq!(c.label(), "E6");
        let c = classify(&jet(2, 5, &[(1.0, &[3, 0]), (1.0, &[1, 3])])).unwrap();
        assert_eq!(c.label(), "E7");
        assert_eq!(c.milnor, 7);
        let c = classify(&jet(2, 6, &[(1.0, &[3, 0]), (1.0, &[0, 5])])).unwrap();
        assert_eq!(c.label(), "E8");
    }

    #[test]
    fn morse_and_stabilized_forms() {
        let c = classify(&jet(2, 4, &[(1.0, &[2, 0]), (-1.0, &[0, 2])])).unwrap();
        assert_eq!(c.label(), "Morse");
        assert_eq!(c.milnor, 1);
        // A₂ ⊕ quadratic block.
        let c = classify(&jet(
            3,
            4,
            &[(1.0, &[3, 0, 0]), (1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])],
        ))
        .unwrap();
        assert_eq!(c.label(), "A2");
    }

    #[test]
    fn zero_jet_is_indeterminate() {
        let r = classify(&Jet::zero(2, 4));
        assert!(matches!(r, Err(Error::Indeterminate(_))));
        // Zero cubic in corank 2: x⁴ + y⁴ is not simple.
        let r = classify(&jet(2, 5, &[(1.0, &[4, 0]), (1.0, &[0, 4])]));
        assert!(matches!(r, Err(Error::Indeterminate(_))));
    }

    #[test]
    fn labels_round_trip() {
        for label in ["Morse", "A2", "A3+", "A3-", "A4", "A5-", "A6", "D4+", "D4-", "D5+", "D6-", "E6", "E7", "E8"] {
            let class: SingularityClass = label.parse().unwrap();
            assert_eq!(class.label(), label);
        }
        assert!("A3".parse::<SingularityClass>().is_err());
        assert!("D4".parse::<SingularityClass>().is_err());
        assert!("E6+".parse::<SingularityClass>().is_err());
        assert!("B2".parse::<SingularityClass>().is_err());
    }

    #[test]
    fn stable_equivalence_ignores_quadratic_blocks() {
        let f = jet(2, 4, &[(1.0, &[3, 0]), (1.0, &[0, 2])]);
        let g = jet(3, 4, &[(1.0, &[3, 0, 0]), (-1.0, &[0, 2, 0]), (-1.0, &[0, 0, 2])]);
        let v = stably_right_equivalent(&f, &g).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.reason, EquivalenceReason::Equal);
    }

    #[test]
    fn distinct_normal_forms_are_not_equivalent() {
        let f = jet(1, 5, &[(1.0, &[3])]);
        let g = jet(1, 5, &[(1.0, &[4])]);
        let v = stably_right_equivalent(&f, &g).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.reason, EquivalenceReason::ClassMismatch);
    }

    #[test]
    fn strict_equivalence_sees_signatures() {
        let f = jet(2, 4, &[(1.0, &[3, 0]), (1.0, &[0, 2])]);
        let v = right_equivalent_same_vars(&f, &f).unwrap();
        assert!(v.equivalent);

        let g = jet(2, 4, &[(1.0, &[3, 0]), (-1.0, &[0, 2])]);
        let v = right_equivalent_same_vars(&f, &g).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.reason, EquivalenceReason::SignatureMismatch);

        let h = jet(1, 4, &[(1.0, &[3])]);
        assert!(matches!(
            right_equivalent_same_vars(&f, &h),
            Err(Error::VarCountMismatch { .. })
        ));
    }

    #[test]
    fn classification_survives_a_linear_shear() {
        // (x+y)³ + y² is still A₂.
        let phi = jet(
            2,
            5,
            &[
                (1.0, &[3, 0]),
                (3.0, &[2, 1]),
                (3.0, &[1, 2]),
                (1.0, &[0, 3]),
                (1.0, &[0, 2]),
            ],
        );
        assert_eq!(classify(&phi).unwrap().label(), "A2");
    }
}
