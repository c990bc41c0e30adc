//! Polynomial chart embeddings f: R^m -> C^n and their complexified
//! Jacobians.
//!
//! Source variables are ordered (x1, y1, x2, ..., x_{m-1}); the complex
//! Jacobian row j is d(Re f_j) + i d(Im f_j), which equals the
//! complexification of the interleaved real Jacobian.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{JetMap, JetSpace};
use crate::linalg::{self, CMat, RMat, RankResult, DEFAULT_RANK_TOL};
use crate::poly::Polynomial;

#[derive(Clone, Debug)]
pub struct EmbeddingMap {
    m: usize,
    n: usize,
    components: Vec<Polynomial>,
    label: Option<String>,
    d1: Vec<Vec<Polynomial>>,
    d2: Vec<Vec<Vec<Polynomial>>>,
}

impl PartialEq for EmbeddingMap {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.n == other.n && self.components == other.components
    }
}

/// df_C at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexifiedJacobian {
    pub matrix: CMat,
    pub basepoint: Vec<f64>,
}

impl EmbeddingMap {
    pub fn new(m: usize, components: Vec<Polynomial>) -> Result<EmbeddingMap> {
        let n = components.len();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("embedding needs m >= 1 and n >= 1"));
        }
        if m > n {
            return Err(Error::DimensionRange {
                m,
                n,
                reason: "analysis requires m <= n",
            });
        }
        for c in &components {
            if c.nvars() != m {
                return Err(Error::DimensionMismatch {
                    context: "component variable count",
                    expected: m,
                    found: c.nvars(),
                });
            }
        }
        let d1: Vec<Vec<Polynomial>> = components
            .iter()
            .map(|c| (0..m).map(|k| c.derivative(k)).collect())
            .collect();
        let d2 = d1
            .iter()
            .map(|row| row.iter().map(|p| (0..m).map(|l| p.derivative(l)).collect()).collect())
            .collect();
        Ok(EmbeddingMap {
            m,
            n,
            components,
            label: None,
            d1,
            d2,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                context: "evaluation point",
                expected: self.m,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.check_point(x)?;
        Ok(self.components.iter().map(|p| p.eval(x)).collect())
    }

    /// df_C(x): n x m complex matrix of partial derivatives.
    pub fn jacobian(&self, x: &[f64]) -> Result<CMat> {
        self.check_point(x)?;
        Ok(CMat::from_fn(self.n, self.m, |j, k| self.d1[j][k].eval(x)))
    }

    /// Interleaved real Jacobian (rows Re f_j, Im f_j).
    pub fn real_jacobian(&self, x: &[f64]) -> Result<RMat> {
        Ok(linalg::realify_rows(&self.jacobian(x)?))
    }

    pub fn gauss_map(&self, x: &[f64]) -> Result<ComplexifiedJacobian> {
        let j = self.real_jacobian(x)?;
        Ok(ComplexifiedJacobian {
            matrix: linalg::complexify(&j)?,
            basepoint: x.to_vec(),
        })
    }

    /// d/dx_l of df_C, for l = 0..m.
    pub fn jacobian_derivatives(&self, x: &[f64]) -> Result<Vec<CMat>> {
        self.check_point(x)?;
        Ok((0..self.m)
            .map(|l| CMat::from_fn(self.n, self.m, |j, k| self.d2[j][k][l].eval(x)))
            .collect())
    }

    pub fn second_derivative_polys(&self) -> &Vec<Vec<Vec<Polynomial>>> {
        &self.d2
    }

    pub fn first_derivative_polys(&self) -> &Vec<Vec<Polynomial>> {
        &self.d1
    }

    /// Taylor jet of f at p (values included).
    pub fn taylor(&self, p: &[f64], space: &Arc<JetSpace>) -> Result<JetMap> {
        self.check_point(p)?;
        let comps = self
            .components
            .iter()
            .map(|c| c.taylor_jet(p, space))
            .collect::<Result<Vec<_>>>()?;
        JetMap::new(space, comps)
    }

    /// x' -> M (f(p + V x') - f(p)), with V real m x m and M complex n x n.
    pub fn reframe(&self, p: &[f64], v: &RMat, mm: &CMat) -> Result<EmbeddingMap> {
        self.check_point(p)?;
        let m = self.m;
        let inner: Vec<Polynomial> = (0..m)
            .map(|r| {
                let mut q = Polynomial::constant(m, Complex64::new(p[r], 0.0));
                for k in 0..m {
                    if v[(r, k)] != 0.0 {
                        q = &q + &Polynomial::variable(m, k).scale(Complex64::new(v[(r, k)], 0.0));
                    }
                }
                q
            })
            .collect();
        let fp = self.eval(p)?;
        let moved: Vec<Polynomial> = self
            .components
            .iter()
            .zip(&fp)
            .map(|(c, v0)| {
                let q = c.compose(&inner)?;
                Ok(&q - &Polynomial::constant(m, *v0))
            })
            .collect::<Result<_>>()?;
        let out: Vec<Polynomial> = (0..self.n)
            .map(|r| {
                let mut acc = Polynomial::zero(m);
                for (k, q) in moved.iter().enumerate() {
                    let w = mm[(r, k)];
                    if w.norm() != 0.0 {
                        acc = &acc + &q.scale(w);
                    }
                }
                acc.pruned(1e-15)
            })
            .collect();
        let mut e = EmbeddingMap::new(m, out)?;
        e.label = self.label.clone();
        Ok(e)
    }

    /// Replace the components, keeping m and the label.
    pub fn with_components(&self, comps: Vec<Polynomial>) -> Result<EmbeddingMap> {
        let mut e = EmbeddingMap::new(self.m, comps)?;
        e.label = self.label.clone();
        Ok(e)
    }
}

/// Real rank and complex rank of the Jacobian at x.
pub fn jacobian_ranks(f: &EmbeddingMap, x: &[f64], tol: f64) -> Result<(RankResult, RankResult)> {
    let jr = f.real_jacobian(x)?;
    let real = linalg::numerical_rank_real(&jr, tol)?;
    let cplx = linalg::numerical_rank(&linalg::complexify(&jr)?, tol)?;
    Ok((real, cplx))
}

/// CR order nu = m - rank_C df_C(x), refusing non-immersion points.
pub fn cr_order(f: &EmbeddingMap, x: &[f64]) -> Result<usize> {
    cr_order_tol(f, x, DEFAULT_RANK_TOL)
}

pub fn cr_order_tol(f: &EmbeddingMap, x: &[f64], tol: f64) -> Result<usize> {
    let (real, cplx) = jacobian_ranks(f, x, tol)?;
    if real.rank < f.m() {
        return Err(Error::NotImmersion {
            rank: real.rank,
            expected: f.m(),
        });
    }
    Ok(f.m() - cplx.rank)
}
