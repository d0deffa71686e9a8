//! Exact truncated polynomial algebra in `n` variables up to a fixed degree.
//!
//! A [`Jet`] stores the Taylor coefficients of a germ at the origin in a
//! canonical sparse form: no term above the truncation degree, no coefficient
//! smaller in magnitude than [`CANONICAL_EPS`]. All arithmetic is exact up to
//! truncation and the canonical drop, so equality of jets is plain structural
//! equality.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with |c| below this are dropped after every operation.
pub const CANONICAL_EPS: f64 = 1e-12;

/// Relative tolerance under which a linear part counts as singular.
pub const LINEAR_RANK_EPS: f64 = 1e-8;

/// Exponent vector of a monomial. Ordered by total degree first, then
/// lexicographically, so that sorted iteration is graded-lexicographic.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The exponent vector of the variable `i`.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i]
    }

    fn sum(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Truncated Taylor polynomial of a germ at the origin.
#[derive(Clone, PartialEq, Debug)]
pub struct Jet {
    nvars: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Jet {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        Jet {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, degree: usize, value: f64) -> Self {
        let mut jet = Jet::zero(nvars, degree);
        jet.add_term(MultiIndex::zero(nvars), value);
        jet
    }

    /// The coordinate function of variable `i`.
    pub fn variable(nvars: usize, degree: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        assert!(degree >= 1, "degree must admit a linear term");
        let mut jet = Jet::zero(nvars, degree);
        jet.add_term(MultiIndex::unit(nvars, i), 1.0);
        jet
    }

    /// Builds a jet from `(coefficient, exponents)` pairs. Terms above the
    /// truncation degree are rejected; repeated exponents accumulate.
    pub fn from_monomials(nvars: usize, degree: usize, monomials: &[(f64, &[u32])]) -> Result<Self> {
        let mut jet = Jet::zero(nvars, degree);
        for (coef, exps) in monomials {
            if exps.len() != nvars {
                return Err(Error::VarCountMismatch {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            if !coef.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    value: *coef,
                    context: format!("monomial {exps:?}"),
                });
            }
            let mi = MultiIndex::new(exps.to_vec());
            if mi.degree() as usize > degree {
                return Err(Error::InvalidInput(format!(
                    "monomial {exps:?} exceeds truncation degree {degree}"
                )));
            }
            jet.add_term(mi, *coef);
        }
        Ok(jet)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        debug_assert_eq!(exponents.len(), self.nvars);
        self.terms
            .get(&MultiIndex::new(exponents.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.terms
            .get(&MultiIndex::zero(self.nvars))
            .copied()
            .unwrap_or(0.0)
    }

    /// Coefficients of the degree-1 terms.
    pub fn linear_part(&self) -> Vec<f64> {
        (0..self.nvars)
            .map(|i| self.coefficient(MultiIndex::unit(self.nvars, i).exponents()))
            .collect()
    }

    /// Largest coefficient magnitude; 0 for the zero jet.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Highest total degree of a stored term (0 for the zero jet); can be
    /// lower than the truncation bound.
    pub fn max_term_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|mi| mi.degree() as usize)
            .max()
            .unwrap_or(0)
    }

    // Exact zeros never stored; the 1e-12 drop happens only in
    // `canonicalize`, which every arithmetic operation calls before
    // returning. Plain construction keeps tiny nonzero coefficients so that
    // serialization round-trips arbitrary finite doubles.
    fn add_term(&mut self, mi: MultiIndex, coef: f64) {
        use std::collections::btree_map::Entry;
        if mi.degree() as usize > self.degree {
            return;
        }
        match self.terms.entry(mi) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if coef != 0.0 {
                    e.insert(coef);
                }
            }
        }
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, c| c.abs() >= CANONICAL_EPS);
    }

    /// Sets the coefficient of a monomial exactly (used by reductions that
    /// snap nearly-zero structure coefficients).
    pub fn set_coefficient(&mut self, exponents: &[u32], value: f64) {
        let mi = MultiIndex::new(exponents.to_vec());
        if value == 0.0 {
            self.terms.remove(&mi);
        } else {
            self.terms.insert(mi, value);
        }
    }

    /// Re-bounds the truncation degree, dropping terms above `degree`.
    pub fn with_degree(&self, degree: usize) -> Jet {
        let mut terms = self.terms.clone();
        terms.retain(|mi, _| mi.degree() as usize <= degree);
        Jet {
            nvars: self.nvars,
            degree,
            terms,
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (mi, c) in &other.terms {
            out.add_term(mi.clone(), *c);
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Jet {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Jet {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.canonicalize();
        out
    }

    /// Product truncated to the common degree.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.mul_trunc(other, self.degree))
    }

    fn mul_trunc(&self, other: &Jet, degree: usize) -> Jet {
        let mut out = Jet::zero(self.nvars, degree);
        for (ma, ca) in &self.terms {
            let da = ma.degree() as usize;
            if da > degree {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() as usize > degree {
                    continue;
                }
                out.add_term(ma.sum(mb), ca * cb);
            }
        }
        out.canonicalize();
        out
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    /// Composition `self ∘ inner` for origin-preserving inner maps: every
    /// component of `inner` must have zero constant term. The output degree is
    /// the minimum of all truncation degrees involved.
    pub fn compose(&self, inner: &[Jet]) -> Result<Jet> {
        for (i, g) in inner.iter().enumerate() {
            let c = g.constant_term();
            if c != 0.0 {
                return Err(Error::NonzeroConstantTerm { index: i, value: c });
            }
        }
        self.substitute(inner)
    }

    /// General polynomial substitution; inner components may carry constant
    /// terms (exact Taylor recentering of a polynomial).
    pub fn substitute(&self, inner: &[Jet]) -> Result<Jet> {
        if inner.len() != self.nvars {
            return Err(Error::VarCountMismatch {
                expected: self.nvars,
                got: inner.len(),
            });
        }
        let out_nvars = match inner.first() {
            Some(g) => g.nvars,
            None => {
                // Zero-variable jet: the constant survives.
                return Ok(self.clone());
            }
        };
        let mut out_degree = self.degree;
        for g in inner {
            if g.nvars != out_nvars {
                return Err(Error::VarCountMismatch {
                    expected: out_nvars,
                    got: g.nvars,
                });
            }
            out_degree = out_degree.min(g.degree);
        }

        // Highest power of each variable actually needed.
        let mut max_exp = vec![0u32; self.nvars];
        for mi in self.terms.keys() {
            for (i, e) in mi.exponents().iter().enumerate() {
                max_exp[i] = max_exp[i].max(*e);
            }
        }
        let mut powers: Vec<Vec<Jet>> = Vec::with_capacity(self.nvars);
        for i in 0..self.nvars {
            let mut p = vec![Jet::constant(out_nvars, out_degree, 1.0)];
            let base = inner[i].with_degree(out_degree);
            for k in 1..=max_exp[i] as usize {
                let next = p[k - 1].mul_trunc(&base, out_degree);
                p.push(next);
            }
            powers.push(p);
        }

        let mut out = Jet::zero(out_nvars, out_degree);
        for (mi, coef) in &self.terms {
            let mut term = Jet::constant(out_nvars, out_degree, *coef);
            for (i, e) in mi.exponents().iter().enumerate() {
                if *e > 0 {
                    term = term.mul_trunc(&powers[i][*e as usize], out_degree);
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `i`, truncated one degree
    /// lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(i < self.nvars);
        let degree = self.degree.saturating_sub(1);
        let mut out = Jet::zero(self.nvars, degree);
        for (mi, c) in &self.terms {
            let e = mi.exponent(i);
            if e == 0 {
                continue;
            }
            let mut exps = mi.exponents().to_vec();
            exps[i] -= 1;
            out.add_term(MultiIndex::new(exps), c * e as f64);
        }
        out.canonicalize();
        out
    }

    /// All first partial derivatives.
    pub fn gradient(&self) -> Vec<Jet> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Hessian matrix at the origin, read off the degree-2 coefficients.
    pub fn hessian_at_zero(&self) -> DMatrix<f64> {
        let n = self.nvars;
        let mut h = DMatrix::zeros(n, n);
        for (mi, c) in &self.terms {
            if mi.degree() != 2 {
                continue;
            }
            let nz: Vec<(usize, u32)> = mi
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, e)| (i, *e))
                .collect();
            match nz.as_slice() {
                [(i, 2)] => h[(*i, *i)] = 2.0 * c,
                [(i, 1), (j, 1)] => {
                    h[(*i, *j)] = *c;
                    h[(*j, *i)] = *c;
                }
                _ => unreachable!(),
            }
        }
        h
    }

    /// Numeric evaluation at a point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (mi, c) in &self.terms {
            let mut term = *c;
            for (i, e) in mi.exponents().iter().enumerate() {
                if *e > 0 {
                    term *= x[i].powi(*e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// Re-embeds the jet into a larger variable set, shifting variables by
    /// `offset`.
    pub fn embed(&self, total_vars: usize, offset: usize) -> Jet {
        assert!(offset + self.nvars <= total_vars);
        let mut out = Jet::zero(total_vars, self.degree);
        for (mi, c) in &self.terms {
            let mut exps = vec![0u32; total_vars];
            exps[offset..offset + self.nvars].copy_from_slice(mi.exponents());
            out.add_term(MultiIndex::new(exps), *c);
        }
        out
    }

    /// Restriction to the first `k` variables: keeps terms whose exponents
    /// vanish beyond index `k` and drops the rest.
    pub fn restrict_to_prefix(&self, k: usize) -> Jet {
        assert!(k <= self.nvars);
        let mut out = Jet::zero(k, self.degree);
        for (mi, c) in &self.terms {
            if mi.exponents()[k..].iter().all(|e| *e == 0) {
                out.add_term(MultiIndex::new(mi.exponents()[..k].to_vec()), *c);
            }
        }
        out
    }

    /// Direct sum `self(x) + other(y)` in disjoint variables.
    pub fn direct_sum(&self, other: &Jet) -> Result<Jet> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let total = self.nvars + other.nvars;
        self.embed(total, 0).add(&other.embed(total, self.nvars))
    }

    /// Largest coefficient-wise deviation from `other`.
    pub fn max_deviation(&self, other: &Jet) -> f64 {
        let mut dev: f64 = 0.0;
        for (mi, c) in &self.terms {
            dev = dev.max((c - other.terms.get(mi).copied().unwrap_or(0.0)).abs());
        }
        for (mi, c) in &other.terms {
            if !self.terms.contains_key(mi) {
                dev = dev.max(c.abs());
            }
        }
        dev
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exps: Vec<u32>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
struct JetRepr {
    nvars: usize,
    degree: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for Jet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = JetRepr {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(mi, c)| TermRepr {
                    exps: mi.exponents().to_vec(),
                    coef: *c,
                })
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Jet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = JetRepr::deserialize(deserializer)?;
        let mut jet = Jet::zero(repr.nvars, repr.degree);
        for term in repr.terms {
            if term.exps.len() != repr.nvars {
                return Err(D::Error::custom(format!(
                    "exponent vector {:?} does not match nvars {}",
                    term.exps, repr.nvars
                )));
            }
            let mi = MultiIndex::new(term.exps);
            if mi.degree() as usize > repr.degree {
                return Err(D::Error::custom(format!(
                    "term of degree {} exceeds truncation degree {}",
                    mi.degree(),
                    repr.degree
                )));
            }
            if !term.coef.is_finite() {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            if term.coef != 0.0 {
                jet.terms.insert(mi, term.coef);
            }
        }
        Ok(jet)
    }
}

/// A germ of a diffeomorphism fixing the origin: `n` jets in `n` variables
/// with zero constant terms and an invertible linear part.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CoordinateChange {
    components: Vec<Jet>,
    linear_part: Vec<Vec<f64>>,
}

impl CoordinateChange {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        let n = components.len();
        for (i, c) in components.iter().enumerate() {
            if c.nvars() != n {
                return Err(Error::VarCountMismatch {
                    expected: n,
                    got: c.nvars(),
                });
            }
            let value = c.constant_term();
            if value != 0.0 {
                return Err(Error::NonzeroConstantTerm { index: i, value });
            }
        }
        let linear = DMatrix::from_fn(n, n, |i, j| components[i].linear_part()[j]);
        let svd = linear.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
        let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
        if n > 0 && sigma_min < LINEAR_RANK_EPS * sigma_max.max(1.0) {
            return Err(Error::SingularLinearPart { sigma_min });
        }
        let linear_part = (0..n)
            .map(|i| (0..n).map(|j| linear[(i, j)]).collect())
            .collect();
        Ok(CoordinateChange {
            components,
            linear_part,
        })
    }

    pub fn identity(nvars: usize, degree: usize) -> Self {
        let components = (0..nvars)
            .map(|i| Jet::variable(nvars, degree, i))
            .collect();
        CoordinateChange::new(components).expect("identity is invertible")
    }

    /// A linear change `x ↦ A x`.
    pub fn linear(matrix: &DMatrix<f64>, degree: usize) -> Result<Self> {
        let n = matrix.nrows();
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut jet = Jet::zero(n, degree);
            for j in 0..n {
                jet.add_term(MultiIndex::unit(n, j), matrix[(i, j)]);
            }
            jet.canonicalize();
            components.push(jet);
        }
        CoordinateChange::new(components)
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> usize {
        self.components.first().map(|c| c.degree()).unwrap_or(0)
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn linear_matrix(&self) -> DMatrix<f64> {
        let n = self.nvars();
        DMatrix::from_fn(n, n, |i, j| self.linear_part[i][j])
    }

    /// Applies the change on the right: returns `f ∘ self`.
    pub fn apply_to(&self, f: &Jet) -> Result<Jet> {
        f.compose(&self.components)
    }

    /// Composition `self ∘ inner` as maps.
    pub fn compose(&self, inner: &CoordinateChange) -> Result<CoordinateChange> {
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        CoordinateChange::new(components)
    }

    /// Jet inverse: `self ∘ inverse = identity` up to the truncation degree.
    ///
    /// Splits `self = A + h` with `A` the linear part and iterates the
    /// fixed-point map `k ← A⁻¹ (id − h∘k)`, which gains one correct degree
    /// per round.
    pub fn inverse(&self) -> Result<CoordinateChange> {
        let n = self.nvars();
        let degree = self.degree();
        let linear = self.linear_matrix();
        let a_inv = linear
            .clone()
            .try_inverse()
            .ok_or(Error::SingularLinearPart { sigma_min: 0.0 })?;

        // Higher-order part of each component.
        let higher: Vec<Jet> = self
            .components
            .iter()
            .map(|c| {
                let mut h = c.clone();
                for j in 0..n {
                    let mi = MultiIndex::unit(n, j);
                    h.set_coefficient(mi.exponents(), 0.0);
                }
                h
            })
            .collect();

        let apply_a_inv = |v: &[Jet]| -> Vec<Jet> {
            (0..n)
                .map(|i| {
                    let mut acc = Jet::zero(n, degree);
                    for (j, vj) in v.iter().enumerate() {
                        acc = acc.add(&vj.scale(a_inv[(i, j)])).expect("same shape");
                    }
                    acc
                })
                .collect()
        };

        let identity: Vec<Jet> = (0..n).map(|i| Jet::variable(n, degree, i)).collect();
        let mut k = apply_a_inv(&identity);
        for _ in 0..degree.max(1) {
            let mut rhs = Vec::with_capacity(n);
            for i in 0..n {
                let corr = higher[i].compose(&k)?;
                rhs.push(identity[i].sub(&corr)?);
            }
            k = apply_a_inv(&rhs);
        }

        let inverse = CoordinateChange::new(k)?;
        // Sanity: self ∘ inverse must reproduce the identity to truncation.
        let check = self.compose(&inverse)?;
        for (i, comp) in check.components.iter().enumerate() {
            let dev = comp.max_deviation(&identity[i]);
            if dev > 1e-9 * (1.0 + self.components[i].max_coefficient()) {
                return Err(Error::Internal(format!(
                    "jet inversion did not converge: component {i} deviates by {dev:.3e}"
                )));
            }
        }
        Ok(inverse)
    }

    /// Numeric evaluation of the map at a point.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// Jacobian matrix of the map at a point.
    pub fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.nvars();
        let mut jac = DMatrix::zeros(n, n);
        for (i, comp) in self.components.iter().enumerate() {
            for j in 0..n {
                jac[(i, j)] = comp.partial(j).eval(x);
            }
        }
        jac
    }

    /// Numerically inverts the map near the origin by Newton iteration.
    pub fn eval_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let a_inv = self
            .linear_matrix()
            .try_inverse()
            .ok_or(Error::SingularLinearPart { sigma_min: 0.0 })?;
        let yv = nalgebra::DVector::from_column_slice(y);
        let mut x = &a_inv * &yv;
        for _ in 0..50 {
            let fx = nalgebra::DVector::from_vec(self.eval(x.as_slice()));
            let r = &fx - &yv;
            if r.norm() < 1e-14 {
                return Ok(x.as_slice().to_vec());
            }
            let jac = self.jacobian_at(x.as_slice());
            let delta = jac
                .lu()
                .solve(&r)
                .ok_or(Error::SingularLinearPart { sigma_min: 0.0 })?;
            x -= delta;
        }
        let fx = nalgebra::DVector::from_vec(self.eval(x.as_slice()));
        if (&fx - &yv).norm() < 1e-10 {
            Ok(x.as_slice().to_vec())
        } else {
            Err(Error::Internal(
                "Newton inversion of coordinate change failed".into(),
            ))
        }
    }
}
