//! Polynomial hull probe. A point z0 is separated from a sampled set K at
//! degree d when some polynomial P of degree <= d has |P(z0)| > max_K |P|.
//! Certificates are one-sided evidence: a sampled K and a bounded degree
//! never prove that a point lies in the hull.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

pub const MAX_BASIS: usize = 5000;
pub const DEFAULT_PHASES: usize = 16;
/// Bound on Re P(z0) that keeps the LP bounded.
pub const OBJECTIVE_CAP: f64 = 2.0;
const VERIFY_SLACK: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

/// Optimum of max c.x subject to A x <= b, x >= 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// Dense simplex on the condensed tableau, Bland's rule. Needs b >= 0 so
/// that the slack basis is feasible.
pub fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let nv = c.len();
    let nr = a.len();
    if b.len() != nr || a.iter().any(|r| r.len() != nv) {
        return Err(Error::DimensionMismatch {
            context: "LP shape",
            expected: nr,
            found: b.len(),
        });
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::LpInfeasible);
    }
    let w = nv + 1;
    let mut t = vec![0.0; (nr + 1) * w];
    for i in 0..nr {
        t[i * w..i * w + nv].copy_from_slice(&a[i]);
        t[i * w + nv] = b[i];
    }
    for j in 0..nv {
        t[nr * w + j] = -c[j];
    }
    let mut col_label: Vec<usize> = (0..nv).collect();
    let mut row_label: Vec<usize> = (nv..nv + nr).collect();
    let mut pivots = 0;
    loop {
        let mut q = None;
        for j in 0..nv {
            if t[nr * w + j] < -PIVOT_EPS && q.is_none_or(|qq: usize| col_label[j] < col_label[qq]) {
                q = Some(j);
            }
        }
        let Some(q) = q else { break };
        let mut p: Option<(usize, f64)> = None;
        for i in 0..nr {
            let aiq = t[i * w + q];
            if aiq > PIVOT_EPS {
                let ratio = t[i * w + nv] / aiq;
                p = match p {
                    None => Some((i, ratio)),
                    Some((pi, pr)) => {
                        if ratio < pr - 1e-14 || (ratio <= pr + 1e-14 && row_label[i] < row_label[pi]) {
                            Some((i, ratio))
                        } else {
                            Some((pi, pr))
                        }
                    }
                };
            }
        }
        let Some((p, _)) = p else {
            return Err(Error::LpUnbounded);
        };
        pivot(&mut t, w, nr + 1, p, q);
        core::mem::swap(&mut col_label[q], &mut row_label[p]);
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Divergence {
                iterations: pivots,
                residual: f64::NAN,
            });
        }
    }
    let mut x = vec![0.0; nv];
    for i in 0..nr {
        if row_label[i] < nv {
            x[row_label[i]] = t[i * w + nv];
        }
    }
    Ok(LpSolution {
        x,
        value: t[nr * w + nv],
        pivots,
    })
}

fn pivot(t: &mut [f64], w: usize, rows: usize, p: usize, q: usize) {
    let piv = t[p * w + q];
    let prow: Vec<f64> = t[p * w..(p + 1) * w].to_vec();
    for i in 0..rows {
        if i == p {
            continue;
        }
        let f = t[i * w + q] / piv;
        if f != 0.0 {
            for j in 0..w {
                if j != q {
                    t[i * w + j] -= f * prow[j];
                }
            }
        }
        t[i * w + q] = -f;
    }
    for j in 0..w {
        if j != q {
            t[p * w + j] = prow[j] / piv;
        }
    }
    t[p * w + q] = 1.0 / piv;
}

/// Exponent vectors of total degree <= d in n variables, graded.
pub fn monomial_basis(n: usize, d: usize) -> Result<Vec<Vec<u32>>> {
    // C(n + d, d) without overflow for the sizes we accept
    let mut count: u128 = 1;
    for i in 1..=d as u128 {
        count = count * (n as u128 + i) / i;
        if count > MAX_BASIS as u128 {
            return Err(Error::BasisTooLarge {
                terms: usize::try_from(count).unwrap_or(usize::MAX),
                limit: MAX_BASIS,
            });
        }
    }
    let mut out = Vec::with_capacity(count as usize);
    for deg in 0..=d {
        let mut e = vec![0u32; n];
        push_degree(&mut out, &mut e, 0, deg as u32);
    }
    Ok(out)
}

fn push_degree(out: &mut Vec<Vec<u32>>, e: &mut Vec<u32>, k: usize, left: u32) {
    if k + 1 == e.len() {
        e[k] = left;
        out.push(e.clone());
        e[k] = 0;
        return;
    }
    if e.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for v in (0..=left).rev() {
        e[k] = v;
        push_degree(out, e, k + 1, left - v);
    }
    e[k] = 0;
}

fn eval_monomials(basis: &[Vec<u32>], scale: &[f64], z: &[Complex64], d: usize) -> Vec<Complex64> {
    let pows: Vec<Vec<Complex64>> = z
        .iter()
        .zip(scale)
        .map(|(&zj, &s)| {
            let w = zj / s;
            let mut p = vec![Complex64::new(1.0, 0.0); d + 1];
            for k in 1..=d {
                p[k] = p[k - 1] * w;
            }
            p
        })
        .collect();
    basis
        .iter()
        .map(|e| e.iter().enumerate().map(|(j, &k)| pows[j][k as usize]).product())
        .collect()
}

fn coordinate_scale(samples: &[Vec<Complex64>], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = samples.iter().map(|z| z[j].norm()).fold(0.0, f64::max);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect()
}

fn check_points(samples: &[Vec<Complex64>], n: usize) -> Result<()> {
    for z in samples {
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                context: "sample dimension",
                expected: n,
                found: z.len(),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullProblem {
    pub samples: Vec<Vec<Complex64>>,
    pub query: Vec<Complex64>,
    pub degree: usize,
    pub phases: usize,
}

impl HullProblem {
    pub fn new(samples: Vec<Vec<Complex64>>, query: Vec<Complex64>, degree: usize) -> HullProblem {
        HullProblem {
            samples,
            query,
            degree,
            phases: DEFAULT_PHASES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HullStatus {
    Separated,
    NotSeparated,
}

/// P = sum coefficients[k] * prod (z_j / scale_j)^monomials[k][j].
#[derive(Clone, Debug, PartialEq)]
pub struct HullCertificate {
    pub monomials: Vec<Vec<u32>>,
    pub scale: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub value_at_query: f64,
    pub sup_on_samples: f64,
    pub lp_value: f64,
    pub status: HullStatus,
}

impl HullCertificate {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let d = self.monomials.iter().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0) as usize;
        eval_monomials(&self.monomials, &self.scale, z, d)
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| m * c)
            .sum()
    }

    /// Direct re-evaluation, independent of the LP.
    pub fn verify(&self, samples: &[Vec<Complex64>], query: &[Complex64]) -> bool {
        let sup = samples.iter().map(|z| self.eval(z).norm()).fold(0.0, f64::max);
        self.eval(query).norm() > sup * (1.0 + VERIFY_SLACK)
    }
}

/// Deterministic right-hand-side perturbation below 1e-7; the sampled
/// constraints are massively degenerate (e.g. all samples agree on the
/// constant monomial) and Bland's rule stalls on exact ties in floating
/// point. Certificates are re-verified, so the relaxation costs nothing.
fn rhs_jitter(i: usize) -> f64 {
    let g = 0.618_033_988_749_894_9 * (i as f64 + 1.0);
    1e-7 * (g - g.floor())
}

/// Maximize Re P(z0) subject to Re(e^{i theta_k} P(z_i)) <= 1 and
/// Re P(z0) <= 2; the result is Separated only if re-evaluation confirms
/// |P(z0)| > max_i |P(z_i)|.
pub fn separation_lp(prob: &HullProblem) -> Result<HullCertificate> {
    if prob.samples.is_empty() {
        return Err(Error::LpUnbounded);
    }
    if prob.degree == 0 || prob.phases == 0 {
        return Err(Error::InvalidArgument("degree and phase count must be positive"));
    }
    let n = prob.query.len();
    check_points(&prob.samples, n)?;
    let basis = monomial_basis(n, prob.degree)?;
    let nb = basis.len();
    let scale = coordinate_scale(&prob.samples, n);
    // variables: u+, u-, v+, v- for each coefficient a = u + i v
    let row = |m: &[Complex64], rot: Complex64| -> Vec<f64> {
        let mut r = vec![0.0; 4 * nb];
        for (k, mk) in m.iter().enumerate() {
            let w = rot * mk;
            r[4 * k] = w.re;
            r[4 * k + 1] = -w.re;
            r[4 * k + 2] = -w.im;
            r[4 * k + 3] = w.im;
        }
        r
    };
    let one = Complex64::new(1.0, 0.0);
    let mut a = Vec::with_capacity(prob.samples.len() * prob.phases + 1);
    let mut b = Vec::with_capacity(a.capacity());
    for z in &prob.samples {
        let m = eval_monomials(&basis, &scale, z, prob.degree);
        for k in 0..prob.phases {
            let th = 2.0 * core::f64::consts::PI * k as f64 / prob.phases as f64;
            a.push(row(&m, Complex64::from_polar(1.0, th)));
            b.push(1.0 + rhs_jitter(b.len()));
        }
    }
    let mq = eval_monomials(&basis, &scale, &prob.query, prob.degree);
    let obj = row(&mq, one);
    a.push(obj.clone());
    b.push(OBJECTIVE_CAP);
    let sol = simplex_max(&obj, &a, &b)?;
    let coefficients: Vec<Complex64> = (0..nb)
        .map(|k| {
            let x = &sol.x[4 * k..4 * k + 4];
            Complex64::new(x[0] - x[1], x[2] - x[3])
        })
        .collect();
    let mut cert = HullCertificate {
        monomials: basis,
        scale,
        coefficients,
        value_at_query: 0.0,
        sup_on_samples: 0.0,
        lp_value: sol.value,
        status: HullStatus::NotSeparated,
    };
    cert.value_at_query = cert.eval(&prob.query).norm();
    cert.sup_on_samples = prob.samples.iter().map(|z| cert.eval(z).norm()).fold(0.0, f64::max);
    if sol.value > 1.0 && cert.value_at_query > cert.sup_on_samples * (1.0 + VERIFY_SLACK) {
        cert.status = HullStatus::Separated;
    }
    Ok(cert)
}

/// Label each grid point; the NotSeparated points approximate the hull
/// from outside.
pub fn hull_scan(samples: &[Vec<Complex64>], grid: &[Vec<Complex64>], degree: usize) -> Result<Vec<HullStatus>> {
    grid.iter()
        .map(|q| {
            let prob = HullProblem::new(samples.to_vec(), q.clone(), degree);
            Ok(separation_lp(&prob)?.status)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFit {
    pub monomials: Vec<Vec<u32>>,
    pub scale: Vec<f64>,
    pub coefficients: Vec<Complex64>,
    pub sup_error: f64,
}

/// Least-squares fit of target values by polynomials of degree <= d.
pub fn polynomial_fit(samples: &[Vec<Complex64>], targets: &[Complex64], degree: usize) -> Result<PolynomialFit> {
    let Some(first) = samples.first() else {
        return Err(Error::EmptyMatrix);
    };
    let n = first.len();
    check_points(samples, n)?;
    if targets.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            context: "fit targets",
            expected: samples.len(),
            found: targets.len(),
        });
    }
    let basis = monomial_basis(n, degree)?;
    let scale = coordinate_scale(samples, n);
    let rows: Vec<Vec<Complex64>> = samples.iter().map(|z| eval_monomials(&basis, &scale, z, degree)).collect();
    let a = CMat::from_fn(samples.len(), basis.len(), |i, k| rows[i][k]);
    let r = linalg::numerical_rank(&a, 1e-10)?;
    if r.rank < basis.len() {
        return Err(Error::RankDeficientFit {
            rank: r.rank,
            cols: basis.len(),
        });
    }
    let y = CVec::from_column_slice(targets);
    let sol = a.clone().svd(true, true).solve(&y, 0.0).map_err(|_| Error::RankDeficientFit {
        rank: r.rank,
        cols: basis.len(),
    })?;
    let resid = &a * &sol - &y;
    let sup_error = resid.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(PolynomialFit {
        monomials: basis,
        scale,
        coefficients: sol.iter().copied().collect(),
        sup_error,
    })
}
