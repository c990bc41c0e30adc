//! Sparse polynomials in real variables with complex coefficients.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Polynomial {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn variable(nvars: usize, v: usize) -> Polynomial {
        let mut e = vec![0; nvars];
        e[v] = 1;
        let mut p = Polynomial::zero(nvars);
        p.add_term(e, Complex64::new(1.0, 0.0));
        p
    }

    pub fn monomial(exps: Vec<u32>, c: Complex64) -> Polynomial {
        let mut p = Polynomial::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Polynomial>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    context: "monomial exponent length",
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Accumulate a term; exact zeros are dropped.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Complex64) {
        debug_assert_eq!(exps.len(), self.nvars);
        let e = self.terms.entry(exps).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.re == 0.0 && e.im == 0.0 {
            self.terms.retain(|_, v| v.re != 0.0 || v.im != 0.0);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Complex64 {
        self.terms.get(exps).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        let mut p = Polynomial::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    pub fn conj(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.conj())).collect(),
        }
    }

    pub fn derivative(&self, v: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut f = e.clone();
                f[v] -= 1;
                p.add_term(f, c * (e[v] as f64));
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars, "polynomial evaluation point length");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= xi.powi(k as i32);
                }
            }
            acc += c * m;
        }
        acc
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars, "polynomial evaluation point length");
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = Complex64::new(1.0, 0.0);
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    m *= xi;
                }
            }
            acc += c * m;
        }
        acc
    }

    /// `self(inner_1, ..., inner_k)`.
    pub fn compose(&self, inner: &[Polynomial]) -> Result<Polynomial> {
        if inner.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                context: "polynomial composition arity",
                expected: self.nvars,
                found: inner.len(),
            });
        }
        let k = inner.first().map_or(0, |p| p.nvars);
        if inner.iter().any(|p| p.nvars != k) {
            return Err(Error::DimensionMismatch {
                context: "inner polynomial variables",
                expected: k,
                found: inner.iter().map(|p| p.nvars).find(|&v| v != k).unwrap_or(k),
            });
        }
        let maxdeg: Vec<u32> = (0..self.nvars)
            .map(|v| self.terms.keys().map(|e| e[v]).max().unwrap_or(0))
            .collect();
        // pows[v][d] = inner[v]^d
        let pows: Vec<Vec<Polynomial>> = (0..self.nvars)
            .map(|v| {
                let mut row = vec![Polynomial::constant(k, Complex64::new(1.0, 0.0))];
                for d in 1..=maxdeg[v] as usize {
                    let next = &row[d - 1] * &inner[v];
                    row.push(next);
                }
                row
            })
            .collect();
        let mut out = Polynomial::zero(k);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(k, *c);
            for (v, &d) in e.iter().enumerate() {
                if d > 0 {
                    t = &t * &pows[v][d as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Taylor jet at `p` in the shifted variables.
    pub fn taylor_jet(&self, p: &[f64], space: &Arc<JetSpace>) -> Result<Jet> {
        if p.len() != self.nvars || space.nvars() != self.nvars {
            return Err(Error::DimensionMismatch {
                context: "taylor jet basepoint",
                expected: self.nvars,
                found: p.len(),
            });
        }
        let shifted = if p.iter().all(|&t| t == 0.0) {
            self.clone()
        } else {
            let inner: Vec<Polynomial> = (0..self.nvars)
                .map(|v| {
                    &Polynomial::variable(self.nvars, v)
                        + &Polynomial::constant(self.nvars, Complex64::new(p[v], 0.0))
                })
                .collect();
            self.compose(&inner)?
        };
        let mut j = Jet::zero(space);
        for (e, c) in &shifted.terms {
            if e.iter().map(|&k| k as usize).sum::<usize>() <= space.order() {
                let e8: Vec<u8> = e.iter().map(|&k| k as u8).collect();
                let idx = space.index_of(&e8).expect("monomial within order");
                j.coeffs_mut()[idx] += c;
            }
        }
        Ok(j)
    }

    pub fn from_jet(j: &Jet) -> Polynomial {
        let mut p = Polynomial::zero(j.num_vars());
        for (e, c) in j.terms() {
            p.add_term(e.iter().map(|&k| k as u32).collect(), c);
        }
        p
    }

    /// Interpret the variables as (z1, zbar1, x2, ...) and expand with
    /// z1 = x1 + i y1.
    pub fn expand_zbar(&self) -> Result<Polynomial> {
        if self.nvars < 2 {
            return Err(Error::DimensionMismatch {
                context: "zbar form variables",
                expected: 2,
                found: self.nvars,
            });
        }
        let k = self.nvars;
        let x = Polynomial::variable(k, 0);
        let iy = Polynomial::variable(k, 1).scale(Complex64::new(0.0, 1.0));
        let mut inner = vec![&x + &iy, &x - &iy];
        for v in 2..k {
            inner.push(Polynomial::variable(k, v));
        }
        self.compose(&inner)
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// Bound on |p| over the box with the given per-coordinate radii
    /// (centered at `center`).
    pub fn sup_bound(&self, center: &[f64], radius: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = c.norm();
                for v in 0..self.nvars {
                    if e[v] > 0 {
                        m *= (center[v].abs() + radius[v]).powi(e[v] as i32);
                    }
                }
                m
            })
            .sum()
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable counts differ");
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial variable counts differ");
        let mut out: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (e, a) in &self.terms {
            for (f, b) in &rhs.terms {
                let g: Vec<u32> = e.iter().zip(f).map(|(x, y)| x + y).collect();
                *out.entry(g).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        out.retain(|_, v| v.re != 0.0 || v.im != 0.0);
        Polynomial {
            nvars: self.nvars,
            terms: out,
        }
    }
}
