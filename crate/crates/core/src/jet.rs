//! Truncated Taylor jets in real variables with complex coefficients.
//!
//! A [`JetSpace`] fixes the variable count and truncation order and owns the
//! graded monomial list plus the multiplication table; jets are dense
//! coefficient vectors over it.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, RMat};

pub const DEFAULT_ORDER: usize = 3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: BTreeMap<Vec<u8>, usize>,
    mul: Vec<(u32, u32, u32)>,
    // (index of e - unit(var), var) for the first nonzero var of e
    parent: Vec<(usize, usize)>,
    // lower[i * nvars + v] = index of e_i - unit(v), if e_i[v] > 0
    lower: Vec<Option<usize>>,
}

fn push_monomials(nvars: usize, deg: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() == nvars - 1 {
        prefix.push(deg as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=deg).rev() {
        prefix.push(k as u8);
        push_monomials(nvars, deg - k, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<JetSpace> {
        assert!(nvars > 0, "jet space needs at least one variable");
        let mut exps = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..=order {
            let before = exps.len();
            push_monomials(nvars, d, &mut Vec::new(), &mut exps);
            degrees.extend(std::iter::repeat_n(d, exps.len() - before));
        }
        let index: BTreeMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut mul = Vec::new();
        for i in 0..exps.len() {
            for j in 0..exps.len() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let e: Vec<u8> = exps[i].iter().zip(&exps[j]).map(|(a, b)| a + b).collect();
                mul.push((i as u32, j as u32, index[&e] as u32));
            }
        }
        let mut parent = vec![(0, 0); exps.len()];
        let mut lower = vec![None; exps.len() * nvars];
        for (i, e) in exps.iter().enumerate() {
            for v in 0..nvars {
                if e[v] > 0 {
                    let mut f = e.clone();
                    f[v] -= 1;
                    lower[i * nvars + v] = Some(index[&f]);
                }
            }
            if let Some(v) = e.iter().position(|&k| k > 0) {
                parent[i] = (lower[i * nvars + v].unwrap(), v);
            }
        }
        Arc::new(JetSpace {
            nvars,
            order,
            exps,
            degrees,
            index,
            mul,
            parent,
            lower,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.degrees[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Index of the linear monomial in variable `v`.
    pub fn linear_index(&self, v: usize) -> usize {
        // degree-1 monomials come right after the constant, x_0 first
        1 + v
    }

    fn same(&self, other: &JetSpace) -> bool {
        self.nvars == other.nvars && self.order == other.order
    }
}

/// A jet: dense coefficients over a shared [`JetSpace`].
#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

/// Binary jet operations exposed through [`Jet::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet {
            space: space.clone(),
            coeffs: vec![ZERO; space.len()],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, c: Complex64) -> Jet {
        let mut j = Jet::zero(space);
        j.coeffs[0] = c;
        j
    }

    pub fn variable(space: &Arc<JetSpace>, v: usize) -> Jet {
        assert!(v < space.nvars, "variable index out of range");
        let mut j = Jet::zero(space);
        if space.order >= 1 {
            j.coeffs[space.linear_index(v)] = ONE;
        }
        j
    }

    pub fn monomial(space: &Arc<JetSpace>, exps: &[u8], c: Complex64) -> Result<Jet> {
        let mut j = Jet::zero(space);
        j.set_coeff(exps, c)?;
        Ok(j)
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<Complex64>) -> Result<Jet> {
        if coeffs.len() != space.len() {
            return Err(Error::DimensionMismatch {
                context: "jet coefficients",
                expected: space.len(),
                found: coeffs.len(),
            });
        }
        Ok(Jet {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn num_vars(&self) -> usize {
        self.space.nvars
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the monomial with the given exponents; zero beyond the
    /// truncation order.
    pub fn coeff(&self, exps: &[u8]) -> Complex64 {
        self.space.index_of(exps).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, exps: &[u8], c: Complex64) -> Result<()> {
        if exps.len() != self.space.nvars {
            return Err(Error::DimensionMismatch {
                context: "jet exponent length",
                expected: self.space.nvars,
                found: exps.len(),
            });
        }
        let deg: usize = exps.iter().map(|&e| e as usize).sum();
        if deg > self.space.order {
            return Err(Error::DimensionMismatch {
                context: "jet monomial degree",
                expected: self.space.order,
                found: deg,
            });
        }
        let i = self.space.index[exps];
        self.coeffs[i] = c;
        Ok(())
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if !self.space.same(&other.space) {
            let (e, f) = if self.space.nvars != other.space.nvars {
                (self.space.nvars, other.space.nvars)
            } else {
                (self.space.order, other.space.order)
            };
            return Err(Error::DimensionMismatch {
                context: "jet arithmetic",
                expected: e,
                found: f,
            });
        }
        Ok(())
    }

    pub fn arith(&self, other: &Jet, op: JetOp) -> Result<Jet> {
        self.check(other)?;
        Ok(match op {
            JetOp::Add => self.add_unchecked(other, ONE),
            JetOp::Sub => self.add_unchecked(other, -ONE),
            JetOp::Mul => self.mul_unchecked(other),
        })
    }

    fn add_unchecked(&self, other: &Jet, s: Complex64) -> Jet {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect();
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }

    fn mul_unchecked(&self, other: &Jet) -> Jet {
        let mut out = vec![ZERO; self.coeffs.len()];
        for &(i, j, k) in &self.space.mul {
            let a = self.coeffs[i as usize];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            out[k as usize] += a * other.coeffs[j as usize];
        }
        Jet {
            space: self.space.clone(),
            coeffs: out,
        }
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Jet {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Coefficient-wise conjugate; for real variables this is the jet of the
    /// conjugate function.
    pub fn conj(&self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn re(&self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| Complex64::new(a.re, 0.0)).collect(),
        }
    }

    pub fn im(&self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|a| Complex64::new(a.im, 0.0)).collect(),
        }
    }

    /// Partial derivative in variable `v`. The top-degree part of the result
    /// is lost to truncation, so it is exact through order N-1.
    pub fn derivative(&self, v: usize) -> Jet {
        let sp = &self.space;
        let mut out = vec![ZERO; self.coeffs.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(t) = sp.lower[i * sp.nvars + v] {
                out[t] += c * (sp.exps[i][v] as f64);
            }
        }
        Jet {
            space: self.space.clone(),
            coeffs: out,
        }
    }

    pub fn homogeneous(&self, d: usize) -> Jet {
        let mut j = self.clone();
        for (i, c) in j.coeffs.iter_mut().enumerate() {
            if self.space.degrees[i] != d {
                *c = ZERO;
            }
        }
        j
    }

    pub fn truncated(&self, d: usize) -> Jet {
        let mut j = self.clone();
        for (i, c) in j.coeffs.iter_mut().enumerate() {
            if self.space.degrees[i] > d {
                *c = ZERO;
            }
        }
        j
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Evaluate the truncated polynomial at a (possibly complex) point.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.space.nvars, "jet evaluation point length");
        let sp = &self.space;
        let mut pw = vec![ONE; sp.len()];
        let mut acc = self.coeffs[0];
        for i in 1..sp.len() {
            let (p, v) = sp.parent[i];
            pw[i] = pw[p] * x[v];
            acc += self.coeffs[i] * pw[i];
        }
        acc
    }

    pub fn eval_real(&self, x: &[f64]) -> Complex64 {
        let xc: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        self.eval(&xc)
    }

    /// Nonzero terms as (exponents, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(move |(i, c)| (self.space.exps[i].as_slice(), *c))
    }

    /// `self(inner_1, ..., inner_k)` where `self` has k variables.
    pub fn compose(&self, inner: &JetMap) -> Result<Jet> {
        Ok(compose_many(core::slice::from_ref(self), inner)?.pop().unwrap())
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.space.same(&other.space) && self.coeffs == other.coeffs
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $op:expr) => {
        impl<'a> $tr<&'a Jet> for &'a Jet {
            type Output = Jet;
            fn $f(self, rhs: &'a Jet) -> Jet {
                self.arith(rhs, $op).expect("jet spaces differ")
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $f(self, rhs: Jet) -> Jet {
                self.arith(&rhs, $op).expect("jet spaces differ")
            }
        }
    };
}
binop!(Add, add, JetOp::Add);
binop!(Sub, sub, JetOp::Sub);
binop!(Mul, mul, JetOp::Mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

impl Mul<Complex64> for &Jet {
    type Output = Jet;
    fn mul(self, c: Complex64) -> Jet {
        self.scale(c)
    }
}

/// Ordered list of jets over one space: a map from R^k into C^len.
#[derive(Clone, Debug)]
pub struct JetMap {
    space: Arc<JetSpace>,
    components: Vec<Jet>,
}

impl PartialEq for JetMap {
    fn eq(&self, other: &JetMap) -> bool {
        self.space.same(&other.space) && self.components == other.components
    }
}

impl JetMap {
    pub fn new(space: &Arc<JetSpace>, components: Vec<Jet>) -> Result<JetMap> {
        for c in &components {
            if !c.space.same(space) {
                return Err(Error::DimensionMismatch {
                    context: "jet map component space",
                    expected: space.nvars,
                    found: c.space.nvars,
                });
            }
        }
        Ok(JetMap {
            space: space.clone(),
            components,
        })
    }

    pub fn identity(space: &Arc<JetSpace>) -> JetMap {
        JetMap {
            space: space.clone(),
            components: (0..space.nvars).map(|v| Jet::variable(space, v)).collect(),
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn domain_vars(&self) -> usize {
        self.space.nvars
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Jet> {
        self.components
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &JetMap) -> Result<JetMap> {
        let comps = compose_many(&self.components, inner)?;
        JetMap::new(&inner.space, comps)
    }

    /// Complex linear part as a len x nvars matrix.
    pub fn linear_part(&self) -> linalg::CMat {
        let sp = &self.space;
        linalg::CMat::from_fn(self.len(), sp.nvars, |r, v| {
            if sp.order == 0 {
                ZERO
            } else {
                self.components[r].coeffs[sp.linear_index(v)]
            }
        })
    }

    pub fn max_abs_diff(&self, other: &JetMap) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Reparametrization `phi` with `S o self o phi = id`, where `S` selects
    /// the real coordinates `graph_vars` of the target. Real coordinate
    /// `2j` is Re of component `j` and `2j + 1` is its Im.
    pub fn graph_invert(&self, graph_vars: &[usize]) -> Result<JetMap> {
        let sp = &self.space;
        let k = sp.nvars;
        if graph_vars.len() != k {
            return Err(Error::DimensionMismatch {
                context: "graph variable count",
                expected: k,
                found: graph_vars.len(),
            });
        }
        let mut sel = Vec::with_capacity(k);
        for &g in graph_vars {
            let comp = self.components.get(g / 2).ok_or(Error::DimensionMismatch {
                context: "graph variable index",
                expected: 2 * self.len(),
                found: g,
            })?;
            let s = if g % 2 == 0 { comp.re() } else { comp.im() };
            if s.constant_term().norm() != 0.0 {
                return Err(Error::NonzeroConstantTerm { component: g / 2 });
            }
            sel.push(s);
        }
        let lin = RMat::from_fn(k, k, |r, v| sel[r].coeffs[sp.linear_index(v)].re);
        let linv = linalg::invert_real(&lin)?;
        let nonlin: Vec<Jet> = sel
            .iter()
            .map(|s| {
                let mut t = s.clone();
                for v in 0..k {
                    t.coeffs[sp.linear_index(v)] = ZERO;
                }
                t
            })
            .collect();
        let y: Vec<Jet> = (0..k).map(|v| Jet::variable(sp, v)).collect();
        let apply_linv = |rhs: &[Jet]| -> Vec<Jet> {
            (0..k)
                .map(|r| {
                    let mut acc = Jet::zero(sp);
                    for (cidx, t) in rhs.iter().enumerate() {
                        let w = linv[(r, cidx)];
                        if w != 0.0 {
                            acc = acc.add_unchecked(t, Complex64::new(w, 0.0));
                        }
                    }
                    acc
                })
                .collect()
        };
        let mut phi = JetMap {
            space: sp.clone(),
            components: apply_linv(&y),
        };
        for _ in 0..sp.order {
            let n_phi = compose_many(&nonlin, &phi)?;
            let rhs: Vec<Jet> = y.iter().zip(&n_phi).map(|(a, b)| a - b).collect();
            phi = JetMap {
                space: sp.clone(),
                components: apply_linv(&rhs),
            };
        }
        Ok(phi)
    }
}

/// Compose each outer jet with the inner map, sharing one power table.
pub fn compose_many(outer: &[Jet], inner: &JetMap) -> Result<Vec<Jet>> {
    let Some(first) = outer.first() else {
        return Ok(Vec::new());
    };
    let osp = first.space.clone();
    for o in outer {
        if !o.space.same(&osp) {
            return Err(Error::DimensionMismatch {
                context: "outer jet spaces",
                expected: osp.nvars,
                found: o.space.nvars,
            });
        }
    }
    if osp.nvars != inner.len() {
        return Err(Error::DimensionMismatch {
            context: "composition arity",
            expected: osp.nvars,
            found: inner.len(),
        });
    }
    for (i, c) in inner.components.iter().enumerate() {
        if c.constant_term().norm() != 0.0 {
            return Err(Error::NonzeroConstantTerm { component: i });
        }
    }
    let isp = &inner.space;
    // powers[i] = monomial i of the outer space evaluated on the inner jets
    let mut powers: Vec<Jet> = Vec::with_capacity(osp.len());
    powers.push(Jet::constant(isp, ONE));
    for i in 1..osp.len() {
        let (p, v) = osp.parent[i];
        if osp.degrees[i] > isp.order {
            powers.push(Jet::zero(isp));
        } else {
            let next = powers[p].mul_unchecked(&inner.components[v]);
            powers.push(next);
        }
    }
    Ok(outer
        .iter()
        .map(|o| {
            let mut acc = vec![ZERO; isp.len()];
            for (i, c) in o.coeffs.iter().enumerate() {
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                for (a, b) in acc.iter_mut().zip(&powers[i].coeffs) {
                    *a += c * b;
                }
            }
            Jet {
                space: isp.clone(),
                coeffs: acc,
            }
        })
        .collect())
}

/// Re-express a jet in (x1, y1, x2, ...) as a jet in the formal variables
/// (z1, zbar1, x2, ...): x1 = (z1 + zbar1)/2, y1 = (z1 - zbar1)/(2i).
pub fn to_zbar_basis(j: &Jet) -> Jet {
    let sp = j.space.clone();
    assert!(sp.nvars >= 2, "z-basis needs at least two variables");
    let w = Jet::variable(&sp, 0);
    let wb = Jet::variable(&sp, 1);
    let mut comps = Vec::with_capacity(sp.nvars);
    comps.push((&w + &wb).scale_real(0.5));
    comps.push((&w - &wb).scale(Complex64::new(0.0, -0.5)));
    for v in 2..sp.nvars {
        comps.push(Jet::variable(&sp, v));
    }
    j.compose(&JetMap::new(&sp, comps).unwrap()).unwrap()
}

/// Inverse of [`to_zbar_basis`]: z1 = x1 + i y1, zbar1 = x1 - i y1.
pub fn from_zbar_basis(j: &Jet) -> Jet {
    let sp = j.space.clone();
    assert!(sp.nvars >= 2, "z-basis needs at least two variables");
    let x = Jet::variable(&sp, 0);
    let y = Jet::variable(&sp, 1);
    let mut comps = Vec::with_capacity(sp.nvars);
    comps.push(&x + &y.scale(Complex64::new(0.0, 1.0)));
    comps.push(&x - &y.scale(Complex64::new(0.0, 1.0)));
    for v in 2..sp.nvars {
        comps.push(Jet::variable(&sp, v));
    }
    j.compose(&JetMap::new(&sp, comps).unwrap()).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn monomial_counts() {
        let s = JetSpace::new(3, 3);
        assert_eq!(s.len(), 20);
        assert_eq!(s.exponents(0), &[0, 0, 0]);
        assert_eq!(s.exponents(1), &[1, 0, 0]);
        assert_eq!(s.exponents(3), &[0, 0, 1]);
    }

    #[test]
    fn difference_of_squares() {
        let s = JetSpace::new(2, 3);
        let one = Jet::constant(&s, c(1.0, 0.0));
        let x = Jet::variable(&s, 0);
        let p = &(&one + &x) * &(&one - &x);
        let mut expect = one.clone();
        expect.set_coeff(&[2, 0], c(-1.0, 0.0)).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn degree_four_truncates() {
        let s = JetSpace::new(3, 3);
        let x = |v| Jet::variable(&s, v);
        let p = &(&(&x(0) * &x(1)) * &x(2)) * &x(0);
        assert_eq!(p, Jet::zero(&s));
    }

    #[test]
    fn z_times_zbar() {
        let s = JetSpace::new(2, 3);
        let x = Jet::variable(&s, 0);
        let y = Jet::variable(&s, 1);
        let z = &x + &y.scale(c(0.0, 1.0));
        let p = &z * &z.conj();
        assert_eq!(p.coeff(&[2, 0]), c(1.0, 0.0));
        assert_eq!(p.coeff(&[0, 2]), c(1.0, 0.0));
        assert_eq!(p.coeff(&[1, 1]), c(0.0, 0.0));
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = Jet::zero(&JetSpace::new(2, 3));
        let b = Jet::zero(&JetSpace::new(3, 3));
        assert!(a.arith(&b, JetOp::Add).is_err());
    }

    #[test]
    fn square_of_sum() {
        let s1 = JetSpace::new(1, 3);
        let s2 = JetSpace::new(2, 3);
        let u = Jet::variable(&s1, 0);
        let outer = &u * &u;
        let inner = JetMap::new(&s2, vec![&Jet::variable(&s2, 0) + &Jet::variable(&s2, 1)]).unwrap();
        let r = outer.compose(&inner).unwrap();
        assert_eq!(r.coeff(&[2, 0]), c(1.0, 0.0));
        assert_eq!(r.coeff(&[1, 1]), c(2.0, 0.0));
        assert_eq!(r.coeff(&[0, 2]), c(1.0, 0.0));
    }

    #[test]
    fn constant_inner_rejected() {
        let s = JetSpace::new(1, 3);
        let inner = JetMap::new(&s, vec![Jet::constant(&s, c(1.0, 0.0))]).unwrap();
        assert_eq!(
            Jet::variable(&s, 0).compose(&inner),
            Err(Error::NonzeroConstantTerm { component: 0 })
        );
    }

    #[test]
    fn shear_inverse() {
        let s = JetSpace::new(2, 3);
        let x = |v| Jet::variable(&s, v);
        let shear = JetMap::new(&s, vec![&x(0) + &x(1).scale_real(2.0), x(1)]).unwrap();
        let inv = shear.graph_invert(&[0, 2]).unwrap();
        assert_eq!(inv.component(0), &(&x(0) - &x(1).scale_real(2.0)));
        assert_eq!(inv.component(1), &x(1));
    }

    #[test]
    fn singular_graph_rejected() {
        let s = JetSpace::new(2, 3);
        let x = Jet::variable(&s, 0);
        let m = JetMap::new(&s, vec![x.clone(), x]).unwrap();
        assert!(matches!(m.graph_invert(&[0, 2]), Err(Error::SingularLinearization { .. })));
    }

    #[test]
    fn zbar_basis_round_trip() {
        let s = JetSpace::new(3, 3);
        let mut j = Jet::zero(&s);
        j.set_coeff(&[2, 0, 0], c(1.0, 0.0)).unwrap();
        j.set_coeff(&[0, 1, 1], c(0.3, -2.0)).unwrap();
        let z = to_zbar_basis(&j);
        assert!(from_zbar_basis(&z).max_abs_diff(&j) < 1e-15);
        // x1^2 = (z^2 + 2|z|^2 + zbar^2)/4
        let mut only = Jet::zero(&s);
        only.set_coeff(&[2, 0, 0], c(1.0, 0.0)).unwrap();
        let zz = to_zbar_basis(&only);
        assert!((zz.coeff(&[1, 1, 0]) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((zz.coeff(&[0, 2, 0]) - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_and_eval() {
        let s = JetSpace::new(2, 3);
        let mut j = Jet::zero(&s);
        j.set_coeff(&[2, 1], c(3.0, 0.0)).unwrap();
        let d = j.derivative(0);
        assert_eq!(d.coeff(&[1, 1]), c(6.0, 0.0));
        assert_eq!(j.eval_real(&[2.0, 0.5]), c(6.0, 0.0));
    }
}
