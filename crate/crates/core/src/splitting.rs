//! Morse splitting of critical jets: separates a nondegenerate quadratic form
//! from a fully reduced part, with the witnessing coordinate change, in both
//! the plain and the parameter-dependent (fibred) version.
//!
//! The reduction is constructive and works entirely in truncated jet
//! arithmetic:
//!
//! 1. orthogonal diagonalization of the Hessian splits kernel directions
//!    (`x̄`) from regular directions (`x̲`) and normalizes the quadratic part
//!    to ±1 entries;
//! 2. a jet-Newton solve of `∇_{x̲} φ = 0` shifts the regular block so that no
//!    term linear in `x̲` survives;
//! 3. a degree-by-degree completion of squares removes every remaining term
//!    containing `x̲` beyond the diagonal quadratic.
//!
//! Each step composes an explicit coordinate change, so the reconstruction
//! identity can be checked coefficient-wise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::{CoordinateChange, Jet, MultiIndex};
use crate::linalg::classified_spectrum;

/// Relative threshold for snapping numerically-zero low-order coefficients of
/// the reduced part. Residue above this aborts with an internal error rather
/// than corrupting downstream classification.
const SNAP_REL: f64 = 1e-7;

/// Offending coefficients below this relative size count as sampling noise in
/// the square-completion ladder: a shift of half their size would vanish
/// under the canonical coefficient drop, so they are zeroed directly.
const NOISE_SNAP_REL: f64 = 1e-10;

/// Result of splitting a critical jet: `phi ∘ change = reduced(x̄) + Σ ±x̲ᵢ²
/// + constant` up to truncation.
#[derive(Clone, Debug)]
pub struct MorseSplit {
    /// Fully reduced jet in `corank` variables; vanishing 2-jet.
    pub reduced: Jet,
    /// Counts of +1 and −1 entries of the normalized quadratic form.
    pub signature: (usize, usize),
    /// The witnessing change; identity on the kernel block after the initial
    /// linear split.
    pub change: CoordinateChange,
    /// Value of the input at the origin.
    pub constant: f64,
}

impl MorseSplit {
    pub fn corank(&self) -> usize {
        self.reduced.nvars()
    }

    /// The model jet `reduced(x̄) + Σ ±x̲ᵢ² + constant` in the full variable
    /// set; positive squares come before negative ones.
    pub fn model(&self) -> Jet {
        let n = self.change.nvars();
        let degree = self.reduced.degree();
        let mut model = self.reduced.embed(n, 0);
        let c = self.corank();
        for i in 0..self.signature.0 {
            let mut e = vec![0u32; n];
            e[c + i] = 2;
            model.set_coefficient(&e, 1.0);
        }
        for i in 0..self.signature.1 {
            let mut e = vec![0u32; n];
            e[c + self.signature.0 + i] = 2;
            model.set_coefficient(&e, -1.0);
        }
        if self.constant != 0.0 {
            let mut with_const = Jet::constant(n, degree, self.constant);
            with_const = with_const.add(&model).expect("same shape");
            return with_const;
        }
        model
    }
}

/// Fibred splitting of a family `Φ(μ, x)`: the change preserves the parameter
/// block and `Φ ∘ change = reduced_family(μ, x̄) + Σ ±x̲ᵢ² + chi(μ)`.
#[derive(Clone, Debug)]
pub struct FamilySplit {
    /// Jet in `nparams + corank` variables, fibred over the parameters.
    pub reduced_family: Jet,
    pub signature: (usize, usize),
    /// Change in all `nparams + n` variables; identity on the parameters.
    pub change_family: CoordinateChange,
    /// Additive reparameterization in the parameters alone, `chi(0) = 0`.
    pub chi: Jet,
    pub nparams: usize,
}

impl FamilySplit {
    pub fn corank(&self) -> usize {
        self.reduced_family.nvars() - self.nparams
    }

    /// Model jet in the full `(μ, x)` variable set.
    pub fn model(&self) -> Jet {
        let total = self.change_family.nvars();
        let head = self.nparams + self.corank();
        let mut model = self.reduced_family.embed(total, 0);
        for i in 0..self.signature.0 {
            let mut e = vec![0u32; total];
            e[head + i] = 2;
            model.set_coefficient(&e, 1.0);
        }
        for i in 0..self.signature.1 {
            let mut e = vec![0u32; total];
            e[head + self.signature.0 + i] = 2;
            model.set_coefficient(&e, -1.0);
        }
        model
            .add(&self.chi.embed(total, 0))
            .expect("same shape")
    }
}

/// Splits a critical jet into reduced part plus diagonal quadratic form.
pub fn split(phi: &Jet) -> Result<MorseSplit> {
    let constant = phi.constant_term();
    let mut body = phi.clone();
    body.set_coefficient(&vec![0u32; phi.nvars()], 0.0);

    let scale = body.max_coefficient().max(1.0);
    let linear = body.linear_part();
    let gradient_norm = linear.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if gradient_norm >= 1e-9 * scale {
        return Err(Error::NotCritical { gradient_norm });
    }
    for i in 0..body.nvars() {
        let mi = MultiIndex::unit(body.nvars(), i);
        body.set_coefficient(mi.exponents(), 0.0);
    }

    let red = reduce(&body, 0)?;
    let reduced = extract_reduced(&red, 0)?;
    Ok(MorseSplit {
        reduced,
        signature: red.signature,
        change: red.change,
        constant,
    })
}

/// Fibred splitting of `Φ` in `nparams + n` variables, the parameters first.
pub fn split_family(phi: &Jet, nparams: usize) -> Result<FamilySplit> {
    let total = phi.nvars();
    if nparams > total {
        return Err(Error::InvalidInput(format!(
            "nparams {nparams} exceeds variable count {total}"
        )));
    }
    let scale = phi.max_coefficient().max(1.0);
    let constant = phi.constant_term();
    if constant.abs() >= 1e-9 * scale {
        return Err(Error::NonzeroValueAtOrigin { value: constant });
    }
    let mut body = phi.clone();
    body.set_coefficient(&vec![0u32; total], 0.0);

    // Zero x-gradient of the μ = 0 slice.
    let mut gradient_norm = 0.0f64;
    for i in nparams..total {
        let mi = MultiIndex::unit(total, i);
        gradient_norm = gradient_norm.max(body.coefficient(mi.exponents()).abs());
    }
    if gradient_norm >= 1e-9 * scale {
        return Err(Error::NotCritical { gradient_norm });
    }
    for i in nparams..total {
        let mi = MultiIndex::unit(total, i);
        body.set_coefficient(mi.exponents(), 0.0);
    }

    let red = reduce(&body, nparams)?;
    for (i, comp) in red.change.components().iter().enumerate().take(nparams) {
        let id = Jet::variable(total, phi.degree(), i);
        if comp.max_deviation(&id) > 0.0 {
            return Err(Error::FibrednessViolation(format!(
                "parameter component {i} was modified"
            )));
        }
    }

    let head = nparams + red.corank;
    let full_reduced = red.body.restrict_to_prefix(head);

    // Gauge: chi takes the linear pure-parameter terms, so the reduced family
    // vanishes at the origin together with its parameter gradient.
    let mut chi = Jet::zero(nparams, phi.degree());
    let mut reduced_family = full_reduced.clone();
    for i in 0..nparams {
        let mi = MultiIndex::unit(head, i);
        let c = full_reduced.coefficient(mi.exponents());
        if c != 0.0 {
            chi.set_coefficient(MultiIndex::unit(nparams, i).exponents(), c);
            reduced_family.set_coefficient(mi.exponents(), 0.0);
        }
    }

    let reduced = extract_slice_check(&reduced_family, nparams, red.corank)?;
    drop(reduced);

    Ok(FamilySplit {
        reduced_family,
        signature: red.signature,
        change_family: red.change,
        chi,
        nparams,
    })
}

struct Reduction {
    corank: usize,
    signature: (usize, usize),
    change: CoordinateChange,
    /// Fully reduced jet in the full variable set: parameters, kernel block,
    /// then the ±1 quadratic block.
    body: Jet,
}

/// Core reduction. The first `fixed` variables are parameters and are never
/// touched; the remaining block is split by its Hessian at the origin.
fn reduce(phi: &Jet, fixed: usize) -> Result<Reduction> {
    let total = phi.nvars();
    let degree = phi.degree();
    let nx = total - fixed;

    // Hessian of the parameter-zero slice in the x-block.
    let full_hessian = slice_hessian(phi, fixed);
    let spectrum = classified_spectrum(&full_hessian)?;
    let corank = spectrum.kernel.len();
    let rank = nx - corank;
    let signature = (spectrum.positive.len(), spectrum.negative.len());

    // Column order: kernel, then positive, then negative eigenvectors.
    let mut order: Vec<usize> = vec![];
    order.extend(&spectrum.kernel);
    order.extend(&spectrum.positive);
    order.extend(&spectrum.negative);
    let mut linear_x = DMatrix::zeros(nx, nx);
    for (new_col, old_col) in order.iter().enumerate() {
        let scale = if new_col < corank {
            1.0
        } else {
            (2.0 / spectrum.values[*old_col].abs()).sqrt()
        };
        for row in 0..nx {
            linear_x[(row, new_col)] = spectrum.vectors[(row, *old_col)] * scale;
        }
    }
    let mut linear_full = DMatrix::identity(total, total);
    linear_full.view_mut((fixed, fixed), (nx, nx)).copy_from(&linear_x);

    let mut change = CoordinateChange::linear(&linear_full, degree)?;
    let mut body = change.apply_to(phi)?;

    // Snap the normalized quadratic block to exact ±1 and clear round-off in
    // the kernel block quadratics.
    snap_quadratic(&mut body, fixed, corank, signature)?;

    if rank > 0 {
        // Phase A: shift the regular block by the implicit critical point over
        // the parameters, killing every term linear in the regular variables.
        let shift = implicit_shift(&body, fixed + corank)?;
        body = shift.apply_to(&body)?;
        change = change.compose(&shift)?;
        snap_quadratic(&mut body, fixed, corank, signature)?;

        // Phase B: degree-by-degree completion of squares. Offenders within
        // two decades of the canonical drop threshold cannot be eliminated by
        // composition (their shifts fall below the jet resolution), so they
        // are treated as sampling noise and snapped away instead.
        let noise_floor = NOISE_SNAP_REL * body.max_coefficient().max(1.0);
        let mut eps = vec![1.0f64; 0];
        eps.extend(std::iter::repeat(1.0).take(signature.0));
        eps.extend(std::iter::repeat(-1.0).take(signature.1));
        let head = fixed + corank;
        let mut last_degree = 0usize;
        for _round in 0..=degree + 1 {
            for (mi, coef) in offending_terms(&body, head) {
                if coef.abs() < noise_floor {
                    body.set_coefficient(mi.exponents(), 0.0);
                }
            }
            let offending = offending_terms(&body, head);
            let Some(lowest) = offending.iter().map(|(mi, _)| mi.degree()).min() else {
                break;
            };
            let lowest = lowest as usize;
            if lowest <= last_degree && last_degree > 0 {
                return Err(Error::Internal(format!(
                    "square completion stalled at degree {lowest}"
                )));
            }
            last_degree = lowest;

            // Divide each offending monomial at the lowest degree by one of
            // its regular variables and absorb it into the matching shift.
            let mut shifts: Vec<Jet> = (0..total - head).map(|_| Jet::zero(total, degree)).collect();
            for (mi, coef) in &offending {
                if mi.degree() as usize != lowest {
                    continue;
                }
                let j = (head..total)
                    .find(|j| mi.exponent(*j) > 0)
                    .expect("offending term contains a regular variable");
                let mut exps = mi.exponents().to_vec();
                exps[j] -= 1;
                let mut s = shifts[j - head].clone();
                s.set_coefficient(&exps, s.coefficient(&exps) + coef);
                shifts[j - head] = s;
            }
            // The shift coefficients can sit below the canonical drop
            // threshold (half of a near-noise offender), so build the
            // components exactly instead of through canonicalizing arithmetic.
            let mut components: Vec<Jet> = (0..total)
                .map(|i| Jet::variable(total, degree, i))
                .collect();
            for (k, s) in shifts.iter().enumerate() {
                if s.is_zero() {
                    continue;
                }
                let j = head + k;
                let mut comp = components[j].clone();
                for (mi, c) in s.terms() {
                    let cur = comp.coefficient(mi.exponents());
                    comp.set_coefficient(mi.exponents(), cur - c / (2.0 * eps[k]));
                }
                components[j] = comp;
            }
            let step = CoordinateChange::new(components)?;
            body = step.apply_to(&body)?;
            change = change.compose(&step)?;
            snap_quadratic(&mut body, fixed, corank, signature)?;
        }
        if !offending_terms(&body, fixed + corank).is_empty() {
            return Err(Error::Internal(
                "square completion left terms in the regular block".into(),
            ));
        }
    }

    Ok(Reduction {
        corank,
        signature,
        change,
        body,
    })
}

/// Hessian of the zero-parameter slice over the x-block.
fn slice_hessian(phi: &Jet, fixed: usize) -> DMatrix<f64> {
    let total = phi.nvars();
    let nx = total - fixed;
    let mut h = DMatrix::zeros(nx, nx);
    for (mi, c) in phi.terms() {
        if mi.degree() != 2 {
            continue;
        }
        if mi.exponents()[..fixed].iter().any(|e| *e > 0) {
            continue;
        }
        let nz: Vec<(usize, u32)> = mi
            .exponents()
            .iter()
            .enumerate()
            .skip(fixed)
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| (i - fixed, *e))
            .collect();
        match nz.as_slice() {
            [(i, 2)] => h[(*i, *i)] = 2.0 * c,
            [(i, 1), (j, 1)] => {
                h[(*i, *j)] = c;
                h[(*j, *i)] = c;
            }
            _ => {}
        }
    }
    h
}

/// Terms that live in the regular block but are not the diagonal quadratic.
fn offending_terms(body: &Jet, head: usize) -> Vec<(MultiIndex, f64)> {
    let total = body.nvars();
    body.terms()
        .filter(|(mi, _)| {
            let reg_degree: u32 = mi.exponents()[head..].iter().sum();
            if reg_degree == 0 {
                return false;
            }
            // Diagonal quadratic: exactly one regular variable squared and
            // nothing else.
            if mi.degree() == 2 && reg_degree == 2 {
                let squares = (head..total).filter(|j| mi.exponent(*j) == 2).count();
                if squares == 1 {
                    return false;
                }
            }
            true
        })
        .map(|(mi, c)| (mi.clone(), c))
        .collect()
}

/// Verifies the diagonal quadratic coefficients are ±1 up to round-off and
/// snaps them exact; clears sub-tolerance parameter-free quadratics in the
/// kernel block.
fn snap_quadratic(body: &mut Jet, fixed: usize, corank: usize, signature: (usize, usize)) -> Result<()> {
    let total = body.nvars();
    let head = fixed + corank;
    let scale = body.max_coefficient().max(1.0);
    for k in 0..signature.0 + signature.1 {
        let expect = if k < signature.0 { 1.0 } else { -1.0 };
        let mut e = vec![0u32; total];
        e[head + k] = 2;
        let got = body.coefficient(&e);
        if (got - expect).abs() > SNAP_REL * scale {
            return Err(Error::Internal(format!(
                "normalized quadratic coefficient drifted to {got}"
            )));
        }
        body.set_coefficient(&e, expect);
    }
    // Kernel-block quadratics of the parameter-free slice are zero by the
    // rank split; remove eigen round-off.
    let kernel_range = fixed..head;
    let snap: Vec<Vec<u32>> = body
        .terms()
        .filter(|(mi, c)| {
            mi.degree() == 2
                && mi.exponents().iter().enumerate().all(|(i, e)| {
                    *e == 0 || kernel_range.contains(&i)
                })
                && c.abs() < SNAP_REL * scale
        })
        .map(|(mi, _)| mi.exponents().to_vec())
        .collect();
    for e in snap {
        body.set_coefficient(&e, 0.0);
    }
    Ok(())
}

/// Solves `∇_regular φ (params, σ(params)) = 0` for the shift jet σ by Newton
/// iteration in the jet ring and returns the change `x̲ ↦ x̲ + σ`.
fn implicit_shift(body: &Jet, head: usize) -> Result<CoordinateChange> {
    let total = body.nvars();
    let degree = body.degree();
    let m = total - head;

    let grads: Vec<Jet> = (head..total)
        .map(|j| body.partial(j).with_degree(degree))
        .collect();

    // Constant part of the regular Hessian block (2·diag(±1) after the
    // linear normalization, but read it off to stay honest).
    let mut m0 = DMatrix::zeros(m, m);
    for (i, g) in grads.iter().enumerate() {
        for j in 0..m {
            let mi = MultiIndex::unit(total, head + j);
            m0[(i, j)] = g.coefficient(mi.exponents());
        }
    }
    let m0_inv = m0
        .try_inverse()
        .ok_or_else(|| Error::Internal("regular Hessian block not invertible".into()))?;

    let mut sigma: Vec<Jet> = (0..m).map(|_| Jet::zero(head, degree)).collect();
    let param_vars: Vec<Jet> = (0..head).map(|i| Jet::variable(head, degree, i)).collect();
    for _ in 0..=degree {
        // Residual G(σ) in the parameters.
        let inner: Vec<Jet> = param_vars.iter().cloned().chain(sigma.iter().cloned()).collect();
        let residual: Vec<Jet> = grads
            .iter()
            .map(|g| g.compose(&inner))
            .collect::<Result<_>>()?;
        if residual.iter().all(|r| r.is_zero()) {
            break;
        }
        for i in 0..m {
            let mut update = Jet::zero(head, degree);
            for (j, r) in residual.iter().enumerate() {
                update = update.add(&r.scale(m0_inv[(i, j)]))?;
            }
            sigma[i] = sigma[i].sub(&update)?;
        }
    }

    let inner: Vec<Jet> = param_vars.iter().cloned().chain(sigma.iter().cloned()).collect();
    let residual_norm = grads
        .iter()
        .map(|g| Ok(g.compose(&inner)?.max_coefficient()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    if residual_norm > 1e-9 * body.max_coefficient().max(1.0) {
        return Err(Error::Internal(format!(
            "implicit shift did not converge: residual {residual_norm:.3e}"
        )));
    }

    let mut components: Vec<Jet> = (0..total).map(|i| Jet::variable(total, degree, i)).collect();
    for (k, s) in sigma.iter().enumerate() {
        components[head + k] = components[head + k].add(&s.embed(total, 0))?;
    }
    CoordinateChange::new(components)
}

/// Extracts the reduced jet of a plain split and verifies its 2-jet vanishes.
fn extract_reduced(red: &Reduction, fixed: usize) -> Result<Jet> {
    let head = fixed + red.corank;
    let mut reduced = red.body.restrict_to_prefix(head).restrict_to_prefix(head);
    let scale = red.body.max_coefficient().max(1.0);
    let low: Vec<Vec<u32>> = reduced
        .terms()
        .filter(|(mi, _)| mi.degree() <= 2)
        .map(|(mi, _)| mi.exponents().to_vec())
        .collect();
    for e in low {
        let c = reduced.coefficient(&e);
        if c.abs() > SNAP_REL * scale {
            return Err(Error::Internal(format!(
                "reduced part carries a 2-jet coefficient {c:.3e}"
            )));
        }
        reduced.set_coefficient(&e, 0.0);
    }
    Ok(reduced)
}

/// Checks the μ = 0 slice of the reduced family has a vanishing 2-jet.
fn extract_slice_check(reduced_family: &Jet, nparams: usize, corank: usize) -> Result<Jet> {
    let mut slice = Jet::zero(corank, reduced_family.degree());
    for (mi, c) in reduced_family.terms() {
        if mi.exponents()[..nparams].iter().all(|e| *e == 0) {
            slice.set_coefficient(&mi.exponents()[nparams..], c);
        }
    }
    let scale = reduced_family.max_coefficient().max(1.0);
    for (mi, c) in slice.terms() {
        if mi.degree() <= 2 && c.abs() > SNAP_REL * scale {
            return Err(Error::Internal(format!(
                "family slice carries a 2-jet coefficient {c:.3e}"
            )));
        }
    }
    Ok(slice)
}

/// Coefficient-wise error of the reconstruction identity
/// `phi ∘ change = model`.
pub fn reconstruction_error(phi: &Jet, split: &MorseSplit) -> Result<f64> {
    let lhs = split.change.apply_to(phi)?;
    Ok(lhs.max_deviation(&split.model()))
}

/// Coefficient-wise error of the fibred reconstruction identity.
pub fn family_reconstruction_error(phi: &Jet, split: &FamilySplit) -> Result<f64> {
    let lhs = split.change_family.apply_to(phi)?;
    Ok(lhs.max_deviation(&split.model()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(nvars: usize, degree: usize, monomials: &[(f64, &[u32])]) -> Jet {
        Jet::from_monomials(nvars, degree, monomials).unwrap()
    }

    #[test]
    fn already_split_cubic() {
        // x³ + y² → reduced x̄³, signature (1, 0), constant 0.
        let phi = jet(2, 4, &[(1.0, &[3, 0]), (1.0, &[0, 2])]);
        let s = split(&phi).unwrap();
        assert_eq!(s.corank(), 1);
        assert_eq!(s.signature, (1, 0));
        assert_eq!(s.constant, 0.0);
        let expect = jet(1, 4, &[(1.0, &[3])]);
        assert!(s.reduced.max_deviation(&expect) < 1e-9);
        assert!(reconstruction_error(&phi, &s).unwrap() < 1e-9);
    }

    #[test]
    fn morse_point_with_cross_term() {
        // x³ + xy + y²: Hessian [[0,1],[1,2]] has determinant −1, so this is a
        // Morse point of signature (1, 1).
        let phi = jet(2, 4, &[(1.0, &[3, 0]), (1.0, &[1, 1]), (1.0, &[0, 2])]);
        let s = split(&phi).unwrap();
        assert_eq!(s.corank(), 0);
        assert_eq!(s.signature, (1, 1));
        assert!(s.reduced.is_zero());
        assert!(reconstruction_error(&phi, &s).unwrap() < 1e-9);
    }

    #[test]
    fn sheared_cubic_reduces_to_corank_one() {
        // (x+y)³ + y² has corank 1; the reduced germ stays a cubic unit times
        // x̄³ up to higher terms.
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
        let s = split(&phi).unwrap();
        assert_eq!(s.corank(), 1);
        assert_eq!(s.signature, (1, 0));
        assert!(reconstruction_error(&phi, &s).unwrap() < 1e-9);
        // Leading term of the reduced germ is cubic and nonzero.
        let c3 = s.reduced.coefficient(&[3]);
        assert!(c3.abs() > 1e-6);
        assert!(s.reduced.coefficient(&[0]).abs() < 1e-12);
        assert!(s.reduced.coefficient(&[1]).abs() < 1e-12);
        assert!(s.reduced.coefficient(&[2]).abs() < 1e-12);
    }

    #[test]
    fn rejects_noncritical_input() {
        let phi = jet(1, 3, &[(1.0, &[1])]);
        assert!(matches!(split(&phi), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn keeps_constant_term() {
        let phi = jet(1, 3, &[(2.5, &[0]), (1.0, &[2])]);
        let s = split(&phi).unwrap();
        assert_eq!(s.constant, 2.5);
        assert!(reconstruction_error(&phi, &s).unwrap() < 1e-9);
    }

    #[test]
    fn family_fold_normal_form_passes_through() {
        // Φ(μ, x, y) = x³ + μx + y² is already a fold family.
        let phi = jet(3, 4, &[(1.0, &[0, 3, 0]), (1.0, &[1, 1, 0]), (1.0, &[0, 0, 2])]);
        let s = split_family(&phi, 1).unwrap();
        assert_eq!(s.corank(), 1);
        assert_eq!(s.signature, (1, 0));
        assert!(s.chi.is_zero());
        let expect = jet(2, 4, &[(1.0, &[0, 3]), (1.0, &[1, 1])]);
        assert!(s.reduced_family.max_deviation(&expect) < 1e-9);
        assert!(family_reconstruction_error(&phi, &s).unwrap() < 1e-9);
    }

    #[test]
    fn family_extracts_additive_parameter_term() {
        // Φ(μ, x) = x³ + μ → reduced x̄³, chi = μ.
        let phi = jet(2, 3, &[(1.0, &[0, 3]), (1.0, &[1, 0])]);
        let s = split_family(&phi, 1).unwrap();
        let expect_chi = jet(1, 3, &[(1.0, &[1])]);
        assert!(s.chi.max_deviation(&expect_chi) < 1e-12);
        let expect_red = jet(2, 3, &[(1.0, &[0, 3])]);
        assert!(s.reduced_family.max_deviation(&expect_red) < 1e-9);
        assert!(family_reconstruction_error(&phi, &s).unwrap() < 1e-9);
    }

    #[test]
    fn family_shifted_fold_reconstructs() {
        // Φ(μ, x, y) = (x+μ)³ − 3μ²(x+μ) + y² = x³ + 3μx² − 2μ³ + y².
        let phi = jet(
            3,
            5,
            &[
                (1.0, &[0, 3, 0]),
                (3.0, &[1, 2, 0]),
                (-2.0, &[3, 0, 0]),
                (1.0, &[0, 0, 2]),
            ],
        );
        let s = split_family(&phi, 1).unwrap();
        assert_eq!(s.corank(), 1);
        assert_eq!(s.signature, (1, 0));
        assert!(family_reconstruction_error(&phi, &s).unwrap() < 1e-9);
        // μ = 0 slice of the reduced family is x̄³.
        let slice: Vec<(Vec<u32>, f64)> = s
            .reduced_family
            .terms()
            .filter(|(mi, _)| mi.exponent(0) == 0)
            .map(|(mi, c)| (mi.exponents().to_vec(), c))
            .collect();
        assert_eq!(slice, vec![(vec![0, 3], 1.0)]);
    }

    #[test]
    fn family_with_parameter_linear_regular_terms() {
        // Φ(μ, x) = x² + μx: completing the square leaves −μ²/4.
        let phi = jet(2, 4, &[(1.0, &[0, 2]), (1.0, &[1, 1])]);
        let s = split_family(&phi, 1).unwrap();
        assert_eq!(s.corank(), 0);
        assert_eq!(s.signature, (1, 0));
        assert!(family_reconstruction_error(&phi, &s).unwrap() < 1e-9);
        let expect = jet(1, 4, &[(-0.25, &[2])]);
        assert!(s.reduced_family.max_deviation(&expect) < 1e-9);
    }
}
