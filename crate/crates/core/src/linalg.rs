//! Dense linear algebra helpers and tolerance-based rank decisions.
//!
//! Every rank decision in the crate goes through [`numerical_rank`] so the
//! margin/gap bookkeeping is uniform.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Outcome of a numerical rank computation.
#[derive(Clone, Debug, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Smallest retained singular value (0 when the rank is 0).
    pub margin: f64,
    /// First discarded singular value (0 when the matrix has full rank).
    pub gap: f64,
    /// Relative tolerance used.
    pub tolerance: f64,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
}

impl RankResult {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn threshold(&self) -> f64 {
        self.tolerance * self.sigma_max()
    }

    /// Singular value `k` (0-based) divided by the largest one.
    pub fn relative(&self, k: usize) -> f64 {
        let s = self.sigma_max();
        match self.singular_values.get(k) {
            Some(&v) if s > 0.0 => v / s,
            _ => 0.0,
        }
    }

    pub fn relative_margin(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.relative(self.rank - 1)
        }
    }

    /// The singular value lying within a factor 10 of the threshold, if any.
    pub fn indeterminate_sigma(&self) -> Option<f64> {
        let thr = self.threshold();
        if thr <= 0.0 {
            return None;
        }
        self.singular_values
            .iter()
            .copied()
            .find(|&s| s > thr / 10.0 && s < thr * 10.0)
    }

    pub fn is_indeterminate(&self) -> bool {
        self.indeterminate_sigma().is_some()
    }

    /// Decide `rank >= required`.
    pub fn decide_at_least(&self, required: usize) -> RankTest {
        let holds = self.rank >= required;
        let thr = self.threshold();
        let s = if required == 0 {
            self.sigma_max()
        } else {
            self.singular_values.get(required - 1).copied().unwrap_or(0.0)
        };
        let smax = self.sigma_max();
        let margin = if required == 0 {
            1.0
        } else if holds {
            s / smax
        } else if thr > 0.0 {
            1.0 - s / thr
        } else {
            1.0
        };
        let indeterminate = required > 0 && thr > 0.0 && s > thr / 10.0 && s < thr * 10.0;
        RankTest {
            holds,
            margin,
            indeterminate,
            rank: self.clone(),
        }
    }
}

/// A boolean rank test. The margin is the relative deciding singular value
/// when the test holds and the fraction of threshold headroom when it fails.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTest {
    pub holds: bool,
    pub margin: f64,
    pub indeterminate: bool,
    pub rank: RankResult,
}

fn check_tol(tol_rel: f64) -> Result<()> {
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::InvalidArgument("tol_rel must lie in (0, 1)"));
    }
    Ok(())
}

pub fn rank_from_singular_values(mut sv: Vec<f64>, tol_rel: f64) -> RankResult {
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = tol_rel * smax;
    let rank = if smax > 0.0 { sv.iter().filter(|&&s| s > thr).count() } else { 0 };
    let margin = if rank > 0 { sv[rank - 1] } else { 0.0 };
    let gap = sv.get(rank).copied().unwrap_or(0.0);
    RankResult {
        rank,
        margin,
        gap,
        tolerance: tol_rel,
        singular_values: sv,
    }
}

pub fn numerical_rank(m: &CMat, tol_rel: f64) -> Result<RankResult> {
    check_tol(tol_rel)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(rank_from_singular_values(sv.iter().copied().collect(), tol_rel))
}

pub fn numerical_rank_real(m: &RMat, tol_rel: f64) -> Result<RankResult> {
    check_tol(tol_rel)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(rank_from_singular_values(sv.iter().copied().collect(), tol_rel))
}

/// Thin SVD with singular values sorted in decreasing order.
/// `u` is rows x k, `v` is cols x k with k = min(rows, cols), and
/// `m = u diag(sigma) v^*`.
pub struct Svd {
    pub sigma: Vec<f64>,
    pub u: CMat,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let s = m.clone().svd(true, true);
    let u0 = s.u.expect("u requested");
    let vt = s.v_t.expect("v_t requested");
    let k = s.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        s.singular_values[b]
            .partial_cmp(&s.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut u = CMat::zeros(m.nrows(), k);
    let mut v = CMat::zeros(m.ncols(), k);
    let mut sigma = Vec::with_capacity(k);
    for (j, &o) in order.iter().enumerate() {
        sigma.push(s.singular_values[o]);
        u.set_column(j, &u0.column(o));
        for r in 0..m.ncols() {
            v[(r, j)] = vt[(o, r)].conj();
        }
    }
    Svd { sigma, u, v }
}

/// Combine interleaved (Re-row, Im-row) pairs of a real 2n x m matrix into
/// the complex n x m matrix with rows a + i c.
pub fn complexify(j: &RMat) -> Result<CMat> {
    if !j.nrows().is_multiple_of(2) {
        return Err(Error::OddRowCount(j.nrows()));
    }
    let n = j.nrows() / 2;
    Ok(CMat::from_fn(n, j.ncols(), |r, c| {
        Complex64::new(j[(2 * r, c)], j[(2 * r + 1, c)])
    }))
}

/// Inverse of [`complexify`]: row k becomes the pair (Re row, Im row).
pub fn realify_rows(c: &CMat) -> RMat {
    RMat::from_fn(2 * c.nrows(), c.ncols(), |r, k| {
        let z = c[(r / 2, k)];
        if r % 2 == 0 {
            z.re
        } else {
            z.im
        }
    })
}

/// Rotate `v` so its largest-modulus entry is real and positive
/// (ties broken by lowest index).
pub fn normalize_phase(v: &mut CVec) {
    let mut best = 0;
    let mut bn = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > bn * (1.0 + 1e-12) {
            bn = a;
            best = i;
        }
    }
    if bn > 0.0 {
        let ph = v[best].conj() / bn;
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
}

/// Orthonormal basis of the orthogonal complement of `span(given)` in
/// C^dim, built by pivoted Gram-Schmidt over the standard basis. Each new
/// vector has its largest entry real positive, so the output is
/// deterministic.
pub fn orthonormal_complement(given: &[CVec], dim: usize) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for g in given {
        let mut w = g.clone();
        for b in &basis {
            let p = b.dotc(&w);
            w -= b * p;
        }
        let nw = w.norm();
        if nw > 1e-12 {
            basis.push(w / Complex64::new(nw, 0.0));
        }
    }
    let mut out = Vec::new();
    while basis.len() < dim {
        let mut best: Option<(f64, CVec)> = None;
        for k in 0..dim {
            let mut w = CVec::zeros(dim);
            w[k] = Complex64::new(1.0, 0.0);
            for b in &basis {
                let p = b.dotc(&w);
                w -= b * p;
            }
            let nw = w.norm();
            if best.as_ref().is_none_or(|(bn, _)| nw > *bn + 1e-12) {
                best = Some((nw, w));
            }
        }
        let (nw, w) = best.expect("dim > 0");
        let mut w = w / Complex64::new(nw, 0.0);
        normalize_phase(&mut w);
        basis.push(w.clone());
        out.push(w);
    }
    out
}

/// Real version of [`orthonormal_complement`].
pub fn orthonormal_complement_real(given: &[RVec], dim: usize) -> Vec<RVec> {
    let cg: Vec<CVec> = given.iter().map(|g| g.map(|x| Complex64::new(x, 0.0))).collect();
    orthonormal_complement(&cg, dim)
        .into_iter()
        .map(|v| v.map(|z| z.re))
        .collect()
}

/// Inverse of a square complex matrix, refusing near-singular input.
pub fn invert(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "invert",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let r = numerical_rank(m, 1e-12)?;
    if r.rank < m.nrows() {
        return Err(Error::SingularLinearization {
            sigma_min: *r.singular_values.last().unwrap_or(&0.0),
        });
    }
    m.clone().try_inverse().ok_or(Error::SingularLinearization { sigma_min: 0.0 })
}

pub fn invert_real(m: &RMat) -> Result<RMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "invert_real",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let r = numerical_rank_real(m, 1e-12)?;
    if r.rank < m.nrows() {
        return Err(Error::SingularLinearization {
            sigma_min: *r.singular_values.last().unwrap_or(&0.0),
        });
    }
    m.clone().try_inverse().ok_or(Error::SingularLinearization { sigma_min: 0.0 })
}

/// Minimum-norm least-squares solution of `a x = b`, singular values below
/// `rel_cut * sigma_max` treated as zero.
pub fn lstsq_min_norm(a: &RMat, b: &RVec, rel_cut: f64) -> RVec {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RVec::zeros(a.ncols());
    }
    let s = a.clone().svd(true, true);
    let smax = s.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (rel_cut * smax).max(f64::MIN_POSITIVE);
    s.solve(b, eps).unwrap_or_else(|_| RVec::zeros(a.ncols()))
}

pub fn cvec_from(v: &[Complex64]) -> CVec {
    CVec::from_column_slice(v)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_full_rank() {
        let m = CMat::identity(3, 3);
        let r = numerical_rank(&m, 1e-8).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.gap, 0.0);
        assert!((r.margin - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tiny_singular_value_is_discarded() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1e-12, 0.0);
        let r = numerical_rank(&m, 1e-8).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.gap - 1e-12).abs() < 1e-20);
        assert!(r.margin > r.threshold() && r.threshold() >= r.gap);
        assert!(!r.is_indeterminate());
    }

    #[test]
    fn band_is_indeterminate() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(2e-8, 0.0);
        assert!(numerical_rank(&m, 1e-8).unwrap().is_indeterminate());
    }

    #[test]
    fn empty_and_bad_tolerance() {
        assert_eq!(numerical_rank(&CMat::zeros(0, 3), 1e-8), Err(Error::EmptyMatrix));
        assert!(numerical_rank(&CMat::identity(2, 2), 1.5).is_err());
    }

    #[test]
    fn complexify_rule() {
        let j = RMat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let cm = complexify(&j).unwrap();
        assert_eq!(cm[(0, 0)], c(1.0, 0.0));
        assert_eq!(cm[(0, 1)], c(0.0, 1.0));
        assert_eq!(cm[(1, 0)], c(0.0, 0.0));
        assert_eq!(realify_rows(&cm), j);
        assert_eq!(complexify(&RMat::zeros(3, 2)), Err(Error::OddRowCount(3)));
        assert_eq!(complexify(&RMat::zeros(4, 2)).unwrap(), CMat::zeros(2, 2));
    }

    #[test]
    fn complement_is_orthonormal() {
        let g = CVec::from_column_slice(&[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let comp = orthonormal_complement(std::slice::from_ref(&g), 3);
        assert_eq!(comp.len(), 2);
        for v in &comp {
            assert!(v.dotc(&g).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!(comp[0].dotc(&comp[1]).norm() < 1e-12);
    }

    #[test]
    fn svd_reconstructs() {
        let m = CMat::from_fn(4, 3, |i, j| c((i * 3 + j) as f64 * 0.1 + 1.0, (i as f64) - (j as f64)));
        let s = svd(&m);
        let d = CMat::from_diagonal(&CVec::from_iterator(3, s.sigma.iter().map(|&x| c(x, 0.0))));
        let r = &s.u * d * s.v.adjoint();
        assert!(max_abs(&(r - &m)) < 1e-12);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
    }
}
