//! The CR-singular set: grid detection, Gauss-Newton refinement, the
//! defining system B_u and the kernel field in graph coordinates, and the
//! frame-free projection matrices used for classification away from a
//! normal form.
//!
//! Frame-free quantities use the Schur complement S(x) = A22 - A21 A11^{-1} A12
//! of A = U^* df_C(x) V in a unitary frame (U, V) frozen at a reference point.
//! Near the reference point S vanishes exactly on the order-1 locus, and
//! V [-A11^{-1} A12; 1] spans ker df_C there.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::embedding::{self, EmbeddingMap};
use crate::error::{Error, Result};
use crate::jet::{self, Jet, JetMap, JetSpace, DEFAULT_ORDER};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, RankResult, DEFAULT_RANK_TOL};
use crate::normal_form::{self, GraphForm, PreNormalForm};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct SingularPoint {
    pub location: Vec<f64>,
    pub order: usize,
    /// Spans ker df_C (the conjugate of the complex tangent line).
    pub kernel_vector: CVec,
    /// Smallest singular value of df_C at the location.
    pub residual: f64,
    /// Complex rank decision at the location.
    pub rank: RankResult,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions {
    /// Convergence when sigma_min <= tol * max(1, sigma_max).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

fn check_box(f: &EmbeddingMap, bbox: &[(f64, f64)]) -> Result<()> {
    if bbox.len() != f.m() {
        return Err(Error::DimensionMismatch {
            context: "box dimension",
            expected: f.m(),
            found: bbox.len(),
        });
    }
    if bbox.iter().any(|&(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::EmptyBox);
    }
    Ok(())
}

/// Upper bound for the Lipschitz constant of x -> df_C(x) (Frobenius norm)
/// over the box, from coefficient bounds of the second derivatives.
pub fn lipschitz_bound(f: &EmbeddingMap, bbox: &[(f64, f64)]) -> Result<f64> {
    check_box(f, bbox)?;
    let center: Vec<f64> = bbox.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    let radius: Vec<f64> = bbox.iter().map(|&(a, b)| 0.5 * (b - a)).collect();
    let mut acc = 0.0;
    for row in f.second_derivative_polys() {
        for col in row {
            for p in col {
                let s = p.sup_bound(&center, &radius);
                acc += s * s;
            }
        }
    }
    Ok(acc.sqrt())
}

fn smallest_sigma(f: &EmbeddingMap, x: &[f64]) -> Result<(f64, f64)> {
    let d = f.jacobian(x)?;
    let sv = d.singular_values();
    let mut mx: f64 = 0.0;
    let mut mn = f64::INFINITY;
    for &s in sv.iter() {
        mx = mx.max(s);
        mn = mn.min(s);
    }
    Ok((mn, mx))
}

/// Grid points where sigma_min(df_C) is below 3 L diag and is a discrete
/// local minimum along every axis, sorted by sigma_min (then position).
pub fn scan_singular(f: &EmbeddingMap, bbox: &[(f64, f64)], grid: usize) -> Result<Vec<Vec<f64>>> {
    check_box(f, bbox)?;
    if grid < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2"));
    }
    let m = f.m();
    let total = (grid as f64).powi(m as i32);
    if total > 2.0e7 {
        return Err(Error::InvalidArgument("grid too large"));
    }
    let total = total as usize;
    let step: Vec<f64> = bbox.iter().map(|&(a, b)| (b - a) / (grid - 1) as f64).collect();
    let diag = step.iter().map(|h| h * h).sum::<f64>().sqrt();
    let thr = 3.0 * lipschitz_bound(f, bbox)? * diag;
    let point = |mut idx: usize| -> Vec<f64> {
        let mut x = vec![0.0; m];
        for k in 0..m {
            x[k] = bbox[k].0 + step[k] * (idx % grid) as f64;
            idx /= grid;
        }
        x
    };
    let mut vals = Vec::with_capacity(total);
    for i in 0..total {
        vals.push(smallest_sigma(f, &point(i))?.0);
    }
    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut stride = vec![1usize; m];
    for k in 1..m {
        stride[k] = stride[k - 1] * grid;
    }
    for i in 0..total {
        let v = vals[i];
        if v > thr {
            continue;
        }
        let mut is_min = true;
        for k in 0..m {
            let pos = (i / stride[k]) % grid;
            if pos > 0 && vals[i - stride[k]] < v {
                is_min = false;
            }
            if pos + 1 < grid && vals[i + stride[k]] < v {
                is_min = false;
            }
        }
        if is_min {
            seeds.push((v, point(i)));
        }
    }
    seeds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| lex(&a.1, &b.1)));
    Ok(seeds.into_iter().map(|(_, x)| x).collect())
}

fn lex(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    core::cmp::Ordering::Equal
}

/// Unitary frame (U full n x n, V m x m) from the SVD of df_C at x.
#[derive(Clone, Debug)]
pub struct SchurFrame {
    u: CMat,
    v: CMat,
}

/// Schur data at a point, in a frozen frame.
#[derive(Clone, Debug)]
pub struct SchurEval {
    /// S(x), length n - m + 1.
    pub s: CVec,
    /// dS, (n - m + 1) x m; column l is d/dx_l.
    pub ds: CMat,
    /// Spans ker df_C wherever S vanishes.
    pub kernel: CVec,
}

impl SchurFrame {
    pub fn at(f: &EmbeddingMap, x: &[f64]) -> Result<SchurFrame> {
        let d = f.jacobian(x)?;
        let s = linalg::svd(&d);
        let cols: Vec<CVec> = (0..s.u.ncols()).map(|j| s.u.column(j).into_owned()).collect();
        let mut all = cols.clone();
        all.extend(linalg::orthonormal_complement(&cols, f.n()));
        Ok(SchurFrame {
            u: CMat::from_columns(&all),
            v: s.v,
        })
    }

    pub fn eval(&self, f: &EmbeddingMap, x: &[f64]) -> Result<SchurEval> {
        let (m, n) = (f.m(), f.n());
        let k = n - m + 1;
        let a = self.u.adjoint() * f.jacobian(x)? * &self.v;
        let a11 = a.view((0, 0), (m - 1, m - 1)).into_owned();
        let a12 = a.view((0, m - 1), (m - 1, 1)).into_owned();
        let a21 = a.view((m - 1, 0), (k, m - 1)).into_owned();
        let a22 = a.view((m - 1, m - 1), (k, 1)).into_owned();
        let inv = linalg::invert(&a11)?;
        let y = &inv * &a12;
        let s = (&a22 - &a21 * &y).column(0).into_owned();
        let mut kf = CVec::zeros(m);
        for r in 0..m - 1 {
            kf[r] = -y[(r, 0)];
        }
        kf[m - 1] = c(1.0, 0.0);
        let kernel = &self.v * kf;
        let dd = f.jacobian_derivatives(x)?;
        let mut ds = CMat::zeros(k, m);
        let a21inv = &a21 * &inv;
        for (l, dl) in dd.iter().enumerate() {
            let da = self.u.adjoint() * dl * &self.v;
            let da11 = da.view((0, 0), (m - 1, m - 1)).into_owned();
            let da12 = da.view((0, m - 1), (m - 1, 1)).into_owned();
            let da21 = da.view((m - 1, 0), (k, m - 1)).into_owned();
            let da22 = da.view((m - 1, m - 1), (k, 1)).into_owned();
            let col = da22 - da21 * &y - &a21inv * (da12 - da11 * &y);
            ds.set_column(l, &col.column(0));
        }
        Ok(SchurEval { s, ds, kernel })
    }
}

fn realify_vec(v: &CVec) -> RVec {
    RVec::from_fn(2 * v.len(), |r, _| if r % 2 == 0 { v[r / 2].re } else { v[r / 2].im })
}

/// Gauss-Newton on the Schur residual, re-framing at every iterate.
pub fn refine_singular(f: &EmbeddingMap, seed: &[f64], opts: RefineOptions) -> Result<SingularPoint> {
    let m = f.m();
    if seed.len() != m {
        return Err(Error::DimensionMismatch {
            context: "seed",
            expected: m,
            found: seed.len(),
        });
    }
    let mut x = seed.to_vec();
    let (mut smin, mut smax) = smallest_sigma(f, &x)?;
    for it in 0..=opts.max_iter {
        if smin <= opts.tol * smax.max(1.0) {
            return finish(f, x, it);
        }
        if it == opts.max_iter {
            break;
        }
        let fr = SchurFrame::at(f, &x)?;
        let e = fr.eval(f, &x)?;
        let jr = linalg::realify_rows(&e.ds);
        let r = realify_vec(&e.s);
        let step = linalg::lstsq_min_norm(&jr, &(-r), 1e-12);
        let xn: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
        if step.norm() <= 1e-15 * (1.0 + xn) {
            return Err(Error::ConvergedNonsingular { residual: smin });
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            let (cmin, cmax) = smallest_sigma(f, &cand)?;
            if cmin < smin {
                x = cand;
                smin = cmin;
                smax = cmax;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::ConvergedNonsingular { residual: smin });
        }
    }
    Err(Error::Divergence {
        iterations: opts.max_iter,
        residual: smin,
    })
}

fn finish(f: &EmbeddingMap, x: Vec<f64>, iterations: usize) -> Result<SingularPoint> {
    let order = embedding::cr_order(f, &x)?;
    if order == 0 {
        let (smin, _) = smallest_sigma(f, &x)?;
        return Err(Error::ConvergedNonsingular { residual: smin });
    }
    let d = f.jacobian(&x)?;
    let rank = linalg::numerical_rank(&d, DEFAULT_RANK_TOL)?;
    let s = linalg::svd(&d);
    let mut k: CVec = s.v.column(f.m() - 1).into_owned();
    linalg::normalize_phase(&mut k);
    Ok(SingularPoint {
        location: x,
        order,
        kernel_vector: k,
        residual: *s.sigma.last().unwrap_or(&0.0),
        rank,
        iterations,
    })
}

/// Scan, refine every seed (failures dropped), merge points within 1e-6 and
/// sort lexicographically. At most `max_seeds` seeds are refined.
pub fn locate_singular(
    f: &EmbeddingMap,
    bbox: &[(f64, f64)],
    grid: usize,
    max_seeds: usize,
    opts: RefineOptions,
) -> Result<Vec<SingularPoint>> {
    let seeds = scan_singular(f, bbox, grid)?;
    let mut out: Vec<SingularPoint> = Vec::new();
    for s in seeds.iter().take(max_seeds) {
        if let Ok(p) = refine_singular(f, s, opts) {
            push_unique(&mut out, p);
        }
    }
    out.sort_by(|a, b| lex(&a.location, &b.location));
    Ok(out)
}

pub fn push_unique(points: &mut Vec<SingularPoint>, p: SingularPoint) {
    let close = points.iter().any(|q| {
        q.location
            .iter()
            .zip(&p.location)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            <= 1e-6
    });
    if !close {
        points.push(p);
    }
}

/// B_m..B_n of a graph form as jets (exact through degree N-1):
/// B = (J - K H^{-1} G) / 2.
pub fn graph_b(g: &GraphForm) -> Result<Vec<Jet>> {
    let (hg, _) = hinv_g(g)?;
    Ok(g
        .normal
        .iter()
        .map(|h| {
            let j = &h.derivative(0) + &h.derivative(1).scale(I);
            let mut acc = j;
            for (t, w) in hg.iter().enumerate() {
                let k = h.derivative(t + 2).scale(I);
                acc = &acc - &(&k * w);
            }
            acc.scale_real(0.5)
        })
        .collect())
}

/// (H^{-1} G, H^{-1}) with H = I + i dH/dx and G_t = dH_t/dx1 + i dH_t/dy1.
fn hinv_g(g: &GraphForm) -> Result<(Vec<Jet>, Vec<Vec<Jet>>)> {
    let sp = g.space().clone();
    let t = g.m() - 2;
    let gv: Vec<Jet> = g
        .tangential
        .iter()
        .map(|h| &h.derivative(0) + &h.derivative(1).scale(I))
        .collect();
    // N = i dH/dx, vanishing at 0; H^{-1} = sum (-N)^k
    let nmat: Vec<Vec<Jet>> = (0..t)
        .map(|s| (0..t).map(|r| g.tangential[s].derivative(r + 2).scale(I)).collect())
        .collect();
    let id = |s: usize, r: usize| if s == r { Jet::constant(&sp, c(1.0, 0.0)) } else { Jet::zero(&sp) };
    let mut inv: Vec<Vec<Jet>> = (0..t).map(|s| (0..t).map(|r| id(s, r)).collect()).collect();
    let mut term = inv.clone();
    for _ in 0..sp.order() {
        // term <- -N * term
        let mut next = vec![vec![Jet::zero(&sp); t]; t];
        for s in 0..t {
            for r in 0..t {
                let mut acc = Jet::zero(&sp);
                for q in 0..t {
                    acc = &acc - &(&nmat[s][q] * &term[q][r]);
                }
                next[s][r] = acc;
            }
        }
        term = next;
        for s in 0..t {
            for r in 0..t {
                inv[s][r] = &inv[s][r] + &term[s][r];
            }
        }
    }
    let hg = (0..t)
        .map(|s| {
            let mut acc = Jet::zero(&sp);
            for r in 0..t {
                acc = &acc + &(&inv[s][r] * &gv[r]);
            }
            acc
        })
        .collect();
    Ok((hg, inv))
}

/// Kernel field V = d/dz1 + O(1) on S_1 in graph coordinates: components
/// (1/2, -i/2, conj(a_s)) with a = -(i/2) H^{-1} G, so that
/// df_C conj(V) = (0, ..., 0, B_m, ..., B_n).
pub fn kernel_field(g: &GraphForm) -> Result<Vec<Jet>> {
    let sp = g.space().clone();
    let (hg, _) = hinv_g(g)?;
    let mut v = vec![Jet::constant(&sp, c(0.5, 0.0)), Jet::constant(&sp, c(0.0, -0.5))];
    for w in &hg {
        v.push(w.scale(c(0.0, -0.5)).conj());
    }
    Ok(v)
}

/// Kernel field at an order-1 point of f, in the adapted graph coordinates.
pub fn kernel_field_at(f: &EmbeddingMap, p: &SingularPoint) -> Result<(GraphForm, Vec<Jet>)> {
    if p.order != 1 {
        return Err(Error::OrderMismatch {
            expected: 1,
            found: p.order,
        });
    }
    let g = adapted_graph(f, &p.location)?;
    let v = kernel_field(&g)?;
    Ok((g, v))
}

/// Adapted, un-normalized graph form at a point.
pub fn adapted_graph(f: &EmbeddingMap, p: &[f64]) -> Result<GraphForm> {
    let frame = normal_form::adapt_frame(f, p)?;
    let mut g = normal_form::graph_form(&frame.apply(f)?, DEFAULT_ORDER)?;
    g.frame = Some(frame);
    Ok(g)
}

/// Defining functions of S_1 near an adapted point.
#[derive(Clone, Debug)]
pub struct DefiningSystem {
    /// B_m..B_n through degree 2.
    pub b: Vec<Jet>,
    /// d(Re B_m, Im B_m, ..., Re B_n, Im B_n)(0), 2(n-m+1) x m.
    pub jacobian_at_base: RMat,
    /// All B_u have vanishing linear part.
    pub degenerate: bool,
}

pub fn defining_system(nf: &PreNormalForm) -> Result<DefiningSystem> {
    let g = nf.to_graph_form(DEFAULT_ORDER)?;
    defining_system_graph(&g)
}

pub fn defining_system_graph(g: &GraphForm) -> Result<DefiningSystem> {
    let b: Vec<Jet> = graph_b(g)?.iter().map(|j| j.truncated(2)).collect();
    let sp = g.space().clone();
    let lin = JetMap::new(&sp, b.clone())?.linear_part();
    let jac = linalg::realify_rows(&lin);
    let degenerate = jac.iter().all(|v| v.abs() <= 1e-14);
    Ok(DefiningSystem {
        b,
        jacobian_at_base: jac,
        degenerate,
    })
}

/// The displayed expansion of B_u through degree 2 from the coefficients.
pub fn b_display(nf: &PreNormalForm) -> Result<Vec<Jet>> {
    let m = nf.m;
    let sp = JetSpace::new(m, DEFAULT_ORDER);
    let t = m - 2;
    let e = |a: u8, b: u8, xs: &[usize]| {
        let mut v = vec![0u8; m];
        v[0] = a;
        v[1] = b;
        for &s in xs {
            v[s] += 1;
        }
        v
    };
    let mut out = Vec::new();
    for u in 0..nf.codim() {
        let mut z = Jet::zero(&sp);
        let mut add = |ex: Vec<u8>, v: Complex64| {
            let cur = z.coeff(&ex);
            z.set_coeff(&ex, cur + v).expect("degree within order");
        };
        let eb: Complex64 = (0..t).map(|s| nf.epsilon_u_s[u][s] * nf.beta_s[s]).sum();
        add(e(1, 0, &[]), c(nf.beta_u[u], 0.0));
        add(e(0, 1, &[]), nf.gamma_u[u] * 2.0);
        add(e(1, 1, &[]), -I * eb + nf.theta_u[u] * 2.0);
        add(e(2, 0, &[]), nf.kappa_u[u]);
        add(e(0, 2, &[]), nf.pi_u[u] * 3.0);
        for s in 0..t {
            add(e(0, 0, &[s + 2]), nf.epsilon_u_s[u][s]);
            add(e(1, 0, &[s + 2]), nf.phi_u_s[u][s]);
            add(e(0, 1, &[s + 2]), nf.psi_u_s[u][s] * 2.0);
            for q in 0..t {
                add(e(0, 0, &[s + 2, q + 2]), nf.sigma_u_st[u][s][q]);
            }
        }
        out.push(jet::from_zbar_basis(&z));
    }
    Ok(out)
}

/// Exact B_u at x for a graph embedding (z1, x_s + i H_s, h_u), from the
/// derivatives of f at x.
pub fn graph_b_at(f: &EmbeddingMap, x: &[f64]) -> Result<CVec> {
    let (m, n) = (f.m(), f.n());
    let d = f.jacobian(x)?;
    let t = m - 2;
    // rows 1..m-1: dx_s + i dH_s, so i dH_s = row - e_{s+1}
    let mut hm = CMat::zeros(t, t);
    let mut gv = CVec::zeros(t);
    for s in 0..t {
        for r in 0..t {
            hm[(s, r)] = d[(s + 1, r + 2)];
        }
        // i(dH/dx1 + i dH/dy1) = d[s+1,0] + i d[s+1,1]; G = that / i
        gv[s] = (d[(s + 1, 0)] + I * d[(s + 1, 1)]) * (-I);
    }
    let hg = if t > 0 { linalg::invert(&hm)? * gv } else { gv };
    let mut b = CVec::zeros(n - m + 1);
    for u in 0..n - m + 1 {
        let row = m - 1 + u;
        let mut v = d[(row, 0)] + I * d[(row, 1)];
        for r in 0..t {
            v -= I * d[(row, r + 2)] * hg[r];
        }
        b[u] = v * 0.5;
    }
    Ok(b)
}

/// Projection matrices at a singular point from the frame-free Schur data.
#[derive(Clone, Debug)]
pub struct Projection {
    /// dS as a real 2k x m matrix (rows Re, Im).
    pub ds_real: RMat,
    /// [dS(Re w), dS(Im w)] with w the complex tangent direction.
    pub pi_real: RMat,
    /// [dS w, dS conj(w)].
    pub pi_complex: CMat,
}

pub fn projection_at(f: &EmbeddingMap, x: &[f64]) -> Result<Projection> {
    let fr = SchurFrame::at(f, x)?;
    let e = fr.eval(f, x)?;
    Ok(projection_from(&e))
}

fn projection_from(e: &SchurEval) -> Projection {
    let w = e.kernel.map(|z| z.conj());
    let wn = w.norm();
    let w = if wn > 0.0 { w / c(wn, 0.0) } else { w };
    let dsr = linalg::realify_rows(&e.ds);
    let re = w.map(|z| z.re);
    let im = w.map(|z| z.im);
    let mut pr = RMat::zeros(dsr.nrows(), 2);
    pr.set_column(0, &(&dsr * re));
    pr.set_column(1, &(&dsr * im));
    let mut pc = CMat::zeros(e.ds.nrows(), 2);
    pc.set_column(0, &(&e.ds * &w));
    pc.set_column(1, &(&e.ds * w.map(|z| z.conj())));
    Projection {
        ds_real: dsr,
        pi_real: pr,
        pi_complex: pc,
    }
}

/// m - rank dS at an order-1 point, computed from the defining system in
/// adapted coordinates. An indeterminate rank decision is an error.
pub fn local_dimension_estimate(f: &EmbeddingMap, p: &SingularPoint) -> Result<usize> {
    let (dim, r) = local_dimension_detail(f, p)?;
    if let Some(sigma) = r.indeterminate_sigma() {
        return Err(Error::Indeterminate {
            sigma,
            threshold: r.threshold(),
        });
    }
    Ok(dim)
}

pub fn local_dimension_detail(f: &EmbeddingMap, p: &SingularPoint) -> Result<(usize, RankResult)> {
    if p.order != 1 {
        return Err(Error::OrderMismatch {
            expected: 1,
            found: p.order,
        });
    }
    let g = adapted_graph(f, &p.location)?;
    let ds = defining_system_graph(&g)?;
    let r = linalg::numerical_rank_real(&ds.jacobian_at_base, DEFAULT_RANK_TOL)?;
    Ok((f.m() - r.rank, r))
}

/// A located point of C_1 together with the local dimension of the zero set
/// of the defining tuple there.
#[derive(Clone, Debug)]
pub struct C1Point {
    pub location: Vec<f64>,
    pub residual: f64,
    pub dimension: usize,
    pub rank: RankResult,
}

fn c1_residual(f: &EmbeddingMap, fr: &SchurFrame, x: &[f64]) -> Result<RVec> {
    let e = fr.eval(f, x)?;
    let p = projection_from(&e);
    let k = e.s.len();
    let mut out = Vec::with_capacity(2 * k + k * (k - 1));
    for z in e.s.iter() {
        out.push(z.re);
        out.push(z.im);
    }
    let pc = &p.pi_complex;
    for i in 0..k {
        for j in i + 1..k {
            let d = pc[(i, 0)] * pc[(j, 1)] - pc[(i, 1)] * pc[(j, 0)];
            out.push(d.re);
            out.push(d.im);
        }
    }
    Ok(RVec::from_vec(out))
}

fn fd_jacobian(f: &EmbeddingMap, fr: &SchurFrame, x: &[f64], h: f64) -> Result<RMat> {
    let r0 = c1_residual(f, fr, x)?;
    let mut j = RMat::zeros(r0.len(), x.len());
    for l in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[l] += h;
        xm[l] -= h;
        let d = (c1_residual(f, fr, &xp)? - c1_residual(f, fr, &xm)?) / (2.0 * h);
        j.set_column(l, &d);
    }
    Ok(j)
}

/// Gauss-Newton for a point where df_C has corank 1 and the complex
/// projection has rank <= 1, frame frozen at the seed. Returns None when
/// the iteration does not reach `tol`.
pub fn locate_c1(f: &EmbeddingMap, seed: &[f64], tol: f64, max_iter: usize) -> Result<Option<C1Point>> {
    if f.n() - f.m() + 1 < 2 {
        return Ok(None);
    }
    let fr = SchurFrame::at(f, seed)?;
    let mut x = seed.to_vec();
    let mut r = match c1_residual(f, &fr, &x) {
        Ok(r) => r,
        Err(_) => return Ok(None),
    };
    for _ in 0..max_iter {
        if r.norm() <= tol {
            break;
        }
        let j = fd_jacobian(f, &fr, &x, 1e-6)?;
        let step = linalg::lstsq_min_norm(&j, &(-&r), 1e-10);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if let Ok(rc) = c1_residual(f, &fr, &cand) {
                if rc.norm() < r.norm() {
                    x = cand;
                    r = rc;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if r.norm() > tol {
        return Ok(None);
    }
    let j = fd_jacobian(f, &fr, &x, 1e-5)?;
    let rank = linalg::numerical_rank_real(&j, 1e-6)?;
    Ok(Some(C1Point {
        location: x,
        residual: r.norm(),
        dimension: f.m() - rank.rank,
        rank,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coffman45() -> EmbeddingMap {
        let mut nf = PreNormalForm::zero(4, 5).unwrap();
        nf.gamma_u[0] = c(1.0, 0.0);
        nf.beta_u[1] = 1.0;
        nf.epsilon_u_s[1][0] = c(1.0, 0.0);
        nf.epsilon_u_s[1][1] = c(0.0, 1.0);
        nf.to_embedding().unwrap()
    }

    #[test]
    fn refine_coffman_seed() {
        let f = coffman45();
        let p = refine_singular(&f, &[0.01, -0.02, 0.005, 0.0], RefineOptions::default()).unwrap();
        assert!(p.location.iter().all(|v| v.abs() <= 1e-10), "{:?}", p.location);
        assert_eq!(p.order, 1);
        let d = f.jacobian(&p.location).unwrap();
        assert!((d * &p.kernel_vector).norm() <= 1e-8);
    }

    #[test]
    fn totally_real_seed_fails() {
        let comps = (0..3).map(|j| if j < 2 { Polynomial::variable(2, j) } else { Polynomial::zero(2) }).collect();
        let f = EmbeddingMap::new(2, comps).unwrap();
        assert!(matches!(
            refine_singular(&f, &[0.3, 0.2], RefineOptions::default()),
            Err(Error::ConvergedNonsingular { .. })
        ));
        assert!(scan_singular(&f, &[(-1.0, 1.0), (-1.0, 1.0)], 11).unwrap().is_empty());
    }

    #[test]
    fn graph_b_matches_display() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(m, n) in &[(4, 5), (5, 6), (6, 7)] {
            let nf = PreNormalForm::random(m, n, 1.0, &mut rng).unwrap();
            let ds = defining_system(&nf).unwrap();
            let disp = b_display(&nf).unwrap();
            for (a, b) in ds.b.iter().zip(&disp) {
                assert!(a.max_abs_diff(&b.truncated(2)) < 1e-12);
            }
        }
    }

    #[test]
    fn graph_b_at_matches_jets_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nf = PreNormalForm::random(5, 6, 1.0, &mut rng).unwrap();
        let f = nf.to_embedding().unwrap();
        let b = graph_b(&nf.to_graph_form(3).unwrap()).unwrap();
        let x = [1e-3, -2e-3, 5e-4, 1e-3, -1e-3];
        let exact = graph_b_at(&f, &x).unwrap();
        for (u, j) in b.iter().enumerate() {
            assert!((j.eval_real(&x) - exact[u]).norm() < 1e-7);
        }
    }

    #[test]
    fn coffman_defining_system() {
        let mut nf = PreNormalForm::zero(4, 5).unwrap();
        nf.gamma_u[0] = c(1.0, 0.0);
        nf.beta_u[1] = 1.0;
        nf.epsilon_u_s[1][0] = c(1.0, 0.0);
        nf.epsilon_u_s[1][1] = c(0.0, 1.0);
        let ds = defining_system(&nf).unwrap();
        // B_m = 2 zbar1, B_{m+1} = z1 + x2 + i x3
        let sp = ds.b[0].space().clone();
        let zb = &Jet::variable(&sp, 0) - &Jet::variable(&sp, 1).scale(I);
        assert!(ds.b[0].max_abs_diff(&zb.scale_real(2.0)) < 1e-14);
        let r = linalg::numerical_rank_real(&ds.jacobian_at_base, 1e-8).unwrap();
        assert_eq!(r.rank, 4);
        assert!(defining_system(&PreNormalForm::zero(4, 5).unwrap()).unwrap().degenerate);
    }

    #[test]
    fn kernel_field_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let nf = PreNormalForm::random(5, 6, 0.5, &mut rng).unwrap();
        let g = nf.to_graph_form(3).unwrap();
        let v = kernel_field(&g).unwrap();
        assert!((v[0].constant_term() - c(0.5, 0.0)).norm() < 1e-15);
        assert!((v[1].constant_term() - c(0.0, -0.5)).norm() < 1e-15);
        // df_C conj V = (0, .., B): check row by row at a small point
        let f = nf.to_embedding().unwrap();
        let x = [2e-3, 1e-3, -1e-3, 3e-3, 1e-3];
        let d = f.jacobian(&x).unwrap();
        let cv = CVec::from_iterator(5, v.iter().map(|j| j.eval_real(&x).conj()));
        let r = d * cv;
        let b = graph_b_at(&f, &x).unwrap();
        for k in 0..4 {
            assert!(r[k].norm() < 1e-7, "row {k}: {}", r[k]);
        }
        for u in 0..2 {
            assert!((r[4 + u] - b[u]).norm() < 1e-7);
        }
    }

    #[test]
    fn projection_ranks_on_model() {
        let f = coffman45();
        let p = projection_at(&f, &[0.0; 4]).unwrap();
        assert_eq!(linalg::numerical_rank_real(&p.ds_real, 1e-8).unwrap().rank, 4);
        assert_eq!(linalg::numerical_rank_real(&p.pi_real, 1e-8).unwrap().rank, 2);
        assert_eq!(linalg::numerical_rank(&p.pi_complex, 1e-8).unwrap().rank, 2);
        let sp = refine_singular(&f, &[0.0; 4], RefineOptions::default()).unwrap();
        assert_eq!(local_dimension_estimate(&f, &sp).unwrap(), 0);
    }

    #[test]
    fn scan_finds_origin_of_model() {
        let f = coffman45();
        let b = [(-1.0, 1.0); 4];
        let pts = locate_singular(&f, &b, 9, 50, RefineOptions::default()).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().any(|p| p.location.iter().all(|v| v.abs() < 1e-9)));
    }
}
