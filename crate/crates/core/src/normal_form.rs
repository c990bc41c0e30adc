//! Pre-normal form at an order-1 CR singular point.
//!
//! The pipeline is: adapt a frame so that df_C(0) has the standard shape,
//! write the manifold as a graph over (x1, y1, x2, ..., x_{m-1}), remove the
//! holomorphic quadratic and cubic terms by holomorphic changes of C^n, rotate
//! normal coordinates so beta_u is real, then read the coefficients.
//!
//! Ambient coordinates: component 0 is z1, components 1..m-1 are z_2..z_{m-1}
//! and components m-1..n are z_m..z_n. Source variable k >= 2 pairs with
//! ambient component k - 1.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::embedding::EmbeddingMap;
use crate::error::{Error, Result};
use crate::jet::{self, Jet, JetMap, JetSpace, DEFAULT_ORDER};
use crate::linalg::{self, c, CMat, CVec, RMat, RVec, DEFAULT_RANK_TOL};
use crate::poly::Polynomial;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const FORBIDDEN_TOL: f64 = 1e-8;

/// Affine holomorphic frame at a singular point: the adapted map is
/// x -> M (f(p + V x) - f(p)).
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedFrame {
    pub basepoint: Vec<f64>,
    pub offset: Vec<Complex64>,
    pub source: RMat,
    pub ambient: CMat,
    /// Phase-normalized kernel vector of df_C(p).
    pub kernel: CVec,
    /// sigma_{m-1} / sigma_max of df_C(p).
    pub margin: f64,
}

impl AdaptedFrame {
    pub fn identity(m: usize, n: usize) -> AdaptedFrame {
        let mut k = CVec::zeros(m);
        if m >= 2 {
            k[0] = c(1.0 / 2f64.sqrt(), 0.0);
            k[1] = c(0.0, 1.0 / 2f64.sqrt());
        }
        AdaptedFrame {
            basepoint: vec![0.0; m],
            offset: vec![c(0.0, 0.0); n],
            source: RMat::identity(m, m),
            ambient: CMat::identity(n, n),
            kernel: k,
            margin: 1.0,
        }
    }

    pub fn apply(&self, f: &EmbeddingMap) -> Result<EmbeddingMap> {
        f.reframe(&self.basepoint, &self.source, &self.ambient)
    }
}

/// The standard differential at an adapted point.
pub fn standard_differential(m: usize, n: usize) -> CMat {
    let mut d = CMat::zeros(n, m);
    d[(0, 0)] = c(1.0, 0.0);
    d[(0, 1)] = I;
    for s in 1..m.saturating_sub(1) {
        d[(s, s + 1)] = c(1.0, 0.0);
    }
    d
}

/// Frame at an order-1 point p.
pub fn adapt_frame(f: &EmbeddingMap, p: &[f64]) -> Result<AdaptedFrame> {
    let (m, n) = (f.m(), f.n());
    let order = crate::embedding::cr_order(f, p)?;
    if order != 1 {
        return Err(Error::OrderMismatch {
            expected: 1,
            found: order,
        });
    }
    let d = f.jacobian(p)?;
    let s = linalg::svd(&d);
    let smax = s.sigma[0];
    let margin = if smax > 0.0 { s.sigma[m - 2] / smax } else { 0.0 };
    let mut k: CVec = s.v.column(m - 1).into_owned();
    linalg::normalize_phase(&mut k);

    let a: RVec = k.map(|z| z.re);
    let b: RVec = k.map(|z| z.im);
    let to_c = |v: &RVec| v.map(|x| c(x, 0.0));
    let wa = &d * to_c(&a);
    let scale = wa.norm();
    if scale < 1e-12 {
        return Err(Error::IllConditioned { margin: scale });
    }
    let a = a / scale;
    let b = b / scale;
    let w = wa / c(scale, 0.0);
    let vs = linalg::orthonormal_complement_real(&[a.clone(), b.clone()], m);

    let mut v = RMat::zeros(m, m);
    v.set_column(0, &a);
    v.set_column(1, &b);
    for (j, col) in vs.iter().enumerate() {
        v.set_column(j + 2, col);
    }

    let mut tcols: Vec<CVec> = vec![w];
    for col in &vs {
        tcols.push(&d * to_c(col));
    }
    let comp = linalg::orthonormal_complement(&tcols, n);
    tcols.extend(comp);
    if tcols.len() != n {
        return Err(Error::IllConditioned { margin: 0.0 });
    }
    let t = CMat::from_columns(&tcols);
    let tr = linalg::numerical_rank(&t, DEFAULT_RANK_TOL)?;
    if tr.rank < n {
        return Err(Error::IllConditioned {
            margin: tr.relative(n - 1),
        });
    }
    let ambient = linalg::invert(&t)?;
    Ok(AdaptedFrame {
        basepoint: p.to_vec(),
        offset: f.eval(p)?,
        source: v,
        ambient,
        kernel: k,
        margin,
    })
}

/// Real source coordinates selected for graphing: Re/Im of z1 and Re of
/// z_2..z_{m-1}, in the interleaved real indexing of [`JetMap::graph_invert`].
pub fn graph_vars(m: usize) -> Vec<usize> {
    let mut g = vec![0, 1];
    g.extend((1..m - 1).map(|j| 2 * j));
    g
}

/// Holomorphic polynomial map of C^n, truncated, acting on image jets by
/// composition.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloMap {
    map: JetMap,
}

impl HoloMap {
    pub fn identity(n: usize, order: usize) -> HoloMap {
        HoloMap {
            map: JetMap::identity(&JetSpace::new(n, order)),
        }
    }

    pub fn linear(l: &CMat, order: usize) -> Result<HoloMap> {
        let n = l.nrows();
        if l.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "holomorphic linear map",
                expected: n,
                found: l.ncols(),
            });
        }
        let sp = JetSpace::new(n, order);
        let comps = (0..n)
            .map(|r| {
                let mut j = Jet::zero(&sp);
                for k in 0..n {
                    if l[(r, k)] != c(0.0, 0.0) {
                        j = &j + &Jet::variable(&sp, k).scale(l[(r, k)]);
                    }
                }
                j
            })
            .collect();
        Ok(HoloMap {
            map: JetMap::new(&sp, comps)?,
        })
    }

    /// Identity plus the given corrections (one jet per component).
    pub fn from_corrections(corrections: Vec<Jet>) -> Result<HoloMap> {
        let Some(first) = corrections.first() else {
            return Err(Error::InvalidArgument("empty holomorphic map"));
        };
        let sp = first.space().clone();
        let comps = corrections
            .iter()
            .enumerate()
            .map(|(k, p)| p.arith(&Jet::variable(&sp, k), jet::JetOp::Add))
            .collect::<Result<Vec<_>>>()?;
        Ok(HoloMap {
            map: JetMap::new(&sp, comps)?,
        })
    }

    pub fn jets(&self) -> &JetMap {
        &self.map
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.map.max_abs_diff(&JetMap::identity(self.map.space())) <= tol
    }

    /// Image jet of `f` under this map.
    pub fn apply(&self, f: &JetMap) -> Result<JetMap> {
        self.map.compose(f)
    }

    /// `next o self`.
    pub fn then(&self, next: &HoloMap) -> Result<HoloMap> {
        Ok(HoloMap {
            map: next.map.compose(&self.map)?,
        })
    }
}

/// Graph presentation y_s = H_s, z_u = h_u over (x1, y1, x2, ..., x_{m-1}).
#[derive(Clone, Debug)]
pub struct GraphForm {
    m: usize,
    n: usize,
    /// H_2..H_{m-1}, real coefficients.
    pub tangential: Vec<Jet>,
    /// h_m..h_n.
    pub normal: Vec<Jet>,
    pub frame: Option<AdaptedFrame>,
    /// Source reparametrization accumulated since the initial jet.
    pub reparam: JetMap,
    /// Holomorphic changes applied so far, in order.
    pub steps: Vec<HoloMap>,
}

impl GraphForm {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.reparam.space()
    }

    /// Graph a jet map whose graphed differential has the standard shape.
    pub fn from_jet_map(map: &JetMap, frame: Option<AdaptedFrame>) -> Result<GraphForm> {
        let m = map.domain_vars();
        let n = map.len();
        if m < 2 || m > n {
            return Err(Error::DimensionRange {
                m,
                n,
                reason: "graph form needs 2 <= m <= n",
            });
        }
        for (k, cpt) in map.components().iter().enumerate() {
            if cpt.constant_term().norm() > FORBIDDEN_TOL {
                return Err(Error::NonzeroConstantTerm { component: k });
            }
        }
        let phi = map.graph_invert(&graph_vars(m))?;
        let g = map.compose(&phi)?;
        let res = linalg::max_abs(&(g.linear_part() - standard_differential(m, n)));
        if res > FORBIDDEN_TOL {
            return Err(Error::ConstraintViolation {
                what: "adapted differential shape",
                residual: res,
            });
        }
        let comps = g.components();
        Ok(GraphForm {
            m,
            n,
            tangential: (1..m - 1).map(|s| comps[s].im()).collect(),
            normal: comps[m - 1..].to_vec(),
            frame,
            reparam: phi,
            steps: Vec::new(),
        })
    }

    /// Graph jets written as a map (z1, x_s + i H_s, h_u).
    pub fn full_map(&self) -> JetMap {
        let sp = self.space().clone();
        let mut comps = Vec::with_capacity(self.n);
        comps.push(&Jet::variable(&sp, 0) + &Jet::variable(&sp, 1).scale(I));
        for (s, h) in self.tangential.iter().enumerate() {
            comps.push(&Jet::variable(&sp, s + 2) + &h.scale(I));
        }
        comps.extend(self.normal.iter().cloned());
        JetMap::new(&sp, comps).expect("graph components share a space")
    }

    /// Product of the recorded holomorphic steps (identity if none).
    pub fn total_transformation(&self) -> HoloMap {
        let mut acc = HoloMap::identity(self.n, self.space().order());
        for h in &self.steps {
            acc = acc.then(h).expect("holomorphic steps share a space");
        }
        acc
    }

    /// Apply a holomorphic change and re-graph.
    pub fn apply_holo(&self, h: HoloMap) -> Result<GraphForm> {
        let image = h.apply(&self.full_map())?;
        let mut g = GraphForm::from_jet_map(&image, self.frame.clone())?;
        g.reparam = self.reparam.compose(&g.reparam)?;
        g.steps = self.steps.clone();
        g.steps.push(h);
        Ok(g)
    }

    /// Largest |Im| over the tangential coefficients; zero by construction.
    pub fn tangential_imag(&self) -> f64 {
        self.tangential.iter().map(|h| h.max_imag()).fold(0.0, f64::max)
    }

    /// Tangential and normal jets in the (z1, zbar1, x...) basis.
    pub fn zbar_jets(&self) -> (Vec<Jet>, Vec<Jet>) {
        (
            self.tangential.iter().map(jet::to_zbar_basis).collect(),
            self.normal.iter().map(jet::to_zbar_basis).collect(),
        )
    }
}

/// Graph form of an adapted embedding (df_C(0) in standard shape).
pub fn graph_form(f_adapted: &EmbeddingMap, order: usize) -> Result<GraphForm> {
    let sp = JetSpace::new(f_adapted.m(), order);
    let map = f_adapted.taylor(&vec![0.0; f_adapted.m()], &sp)?;
    GraphForm::from_jet_map(&map, None)
}

/// Holomorphic exponent vector in C^n for a z-basis monomial with no zbar1.
fn holo_exps(z: &[u8], n: usize) -> Vec<u8> {
    let mut e = vec![0u8; n];
    e[0] = z[0];
    for (k, &p) in z.iter().enumerate().skip(2) {
        e[k - 1] = p;
    }
    e
}

/// Remove the holomorphic terms of degree `deg` (z1^a x^c, no zbar1) from
/// H_s and h_u with z_alpha -> z_alpha + P_alpha.
fn remove_holomorphic(g: &GraphForm, deg: usize) -> Result<GraphForm> {
    let (m, n) = (g.m, g.n);
    let hsp = JetSpace::new(n, g.space().order());
    let (tz, nz) = g.zbar_jets();
    let mut corr = vec![Jet::zero(&hsp); n];
    for (s, h) in tz.iter().enumerate() {
        for (e, q) in h.terms() {
            if e[1] != 0 || e.iter().map(|&x| x as usize).sum::<usize>() != deg {
                continue;
            }
            // H_s contains Re(2 q z1^a x^c) (a > 0) or q x^c (pure x);
            // Im of -i(2q z1^a x^c) or -i q x^c cancels it.
            let k = if e[0] > 0 { 2.0 } else { 1.0 };
            corr[s + 1].set_coeff(&holo_exps(e, n), -I * q * k)?;
        }
    }
    for (u, h) in nz.iter().enumerate() {
        for (e, q) in h.terms() {
            if e[1] != 0 || e.iter().map(|&x| x as usize).sum::<usize>() != deg {
                continue;
            }
            corr[m - 1 + u].set_coeff(&holo_exps(e, n), -q)?;
        }
    }
    g.apply_holo(HoloMap::from_corrections(corr)?)
}

/// Remove z1^2, z1 x_t, x_t x_r (and conjugates in H_s).
pub fn normalize_quadratic(g: &GraphForm) -> Result<GraphForm> {
    remove_holomorphic(g, 2)
}

/// Remove z1^3, z1^2 x_s, z1 x_s x_t, x_s x_t x_r (and conjugates in H_s).
pub fn normalize_cubic(g: &GraphForm) -> Result<GraphForm> {
    remove_holomorphic(g, 3)
}

/// Rotation angle making beta real with the smallest |angle|; a purely
/// imaginary beta goes to +|beta|.
fn phase_angle(beta: Complex64) -> f64 {
    if beta.im.abs() <= 1e-14 * beta.norm().max(1.0) {
        return 0.0;
    }
    let a = -beta.arg();
    let b = if a > 0.0 {
        a - core::f64::consts::PI
    } else {
        a + core::f64::consts::PI
    };
    if a.abs() < b.abs() - 1e-14 {
        a
    } else if b.abs() < a.abs() - 1e-14 {
        b
    } else if (beta * Complex64::from_polar(1.0, a)).re >= 0.0 {
        a
    } else {
        b
    }
}

/// Rotate z_u so that beta_u is real.
pub fn normalize_phase(g: &GraphForm) -> Result<GraphForm> {
    let (m, n) = (g.m, g.n);
    let mut l = CMat::identity(n, n);
    let mut trivial = true;
    for (u, h) in g.normal.iter().enumerate() {
        let beta = jet::to_zbar_basis(h).coeff(&beta_exps(m));
        let t = phase_angle(beta);
        if t != 0.0 {
            trivial = false;
        }
        l[(m - 1 + u, m - 1 + u)] = Complex64::from_polar(1.0, t);
    }
    if trivial {
        return Ok(g.clone());
    }
    g.apply_holo(HoloMap::linear(&l, g.space().order())?)
}

/// Quadratic, cubic and phase normalization.
pub fn pre_normalize(g: &GraphForm) -> Result<GraphForm> {
    let g = normalize_quadratic(g)?;
    let g = normalize_cubic(&g)?;
    normalize_phase(&g)
}

fn zexp(m: usize, a: u8, b: u8, xs: &[usize]) -> Vec<u8> {
    let mut e = vec![0u8; m];
    e[0] = a;
    e[1] = b;
    for &s in xs {
        e[s] += 1;
    }
    e
}

fn beta_exps(m: usize) -> Vec<u8> {
    zexp(m, 1, 1, &[])
}

/// Coefficient record of the pre-normal form. Index s runs over
/// 0..m-2 (for s = 2..m-1), index u over 0..n-m+1 (for u = m..n).
#[derive(Clone, Debug, PartialEq)]
pub struct PreNormalForm {
    pub m: usize,
    pub n: usize,
    pub beta_s: Vec<f64>,
    pub mu_s: Vec<Complex64>,
    pub lambda_s_t: Vec<Vec<f64>>,
    pub beta_u: Vec<f64>,
    pub gamma_u: Vec<Complex64>,
    pub epsilon_u_s: Vec<Vec<Complex64>>,
    pub kappa_u: Vec<Complex64>,
    pub theta_u: Vec<Complex64>,
    pub pi_u: Vec<Complex64>,
    pub phi_u_s: Vec<Vec<Complex64>>,
    pub psi_u_s: Vec<Vec<Complex64>>,
    /// Symmetric in (s, t).
    pub sigma_u_st: Vec<Vec<Vec<Complex64>>>,
}

fn max_diff_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_diff_r(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

impl PreNormalForm {
    pub fn zero(m: usize, n: usize) -> Result<PreNormalForm> {
        if m < 2 || m > n {
            return Err(Error::DimensionRange {
                m,
                n,
                reason: "pre-normal form needs 2 <= m <= n",
            });
        }
        let t = m - 2;
        let k = n - m + 1;
        let z = c(0.0, 0.0);
        Ok(PreNormalForm {
            m,
            n,
            beta_s: vec![0.0; t],
            mu_s: vec![z; t],
            lambda_s_t: vec![vec![0.0; t]; t],
            beta_u: vec![0.0; k],
            gamma_u: vec![z; k],
            epsilon_u_s: vec![vec![z; t]; k],
            kappa_u: vec![z; k],
            theta_u: vec![z; k],
            pi_u: vec![z; k],
            phi_u_s: vec![vec![z; t]; k],
            psi_u_s: vec![vec![z; t]; k],
            sigma_u_st: vec![vec![vec![z; t]; t]; k],
        })
    }

    /// Random record, each real part drawn uniformly from [-scale, scale].
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, scale: f64, rng: &mut R) -> Result<PreNormalForm> {
        let mut nf = PreNormalForm::zero(m, n)?;
        let r = |rng: &mut R| rng.gen_range(-1.0..=1.0) * scale;
        let cz = |rng: &mut R| c(r(rng), r(rng));
        let t = m - 2;
        for s in 0..t {
            nf.beta_s[s] = r(rng);
            nf.mu_s[s] = cz(rng);
            for q in 0..t {
                nf.lambda_s_t[s][q] = r(rng);
            }
        }
        for u in 0..n - m + 1 {
            nf.beta_u[u] = r(rng);
            nf.gamma_u[u] = cz(rng);
            nf.kappa_u[u] = cz(rng);
            nf.theta_u[u] = cz(rng);
            nf.pi_u[u] = cz(rng);
            for s in 0..t {
                nf.epsilon_u_s[u][s] = cz(rng);
                nf.phi_u_s[u][s] = cz(rng);
                nf.psi_u_s[u][s] = cz(rng);
                for q in s..t {
                    let v = cz(rng);
                    nf.sigma_u_st[u][s][q] = v;
                    nf.sigma_u_st[u][q][s] = v;
                }
            }
        }
        Ok(nf)
    }

    pub fn codim(&self) -> usize {
        self.n - self.m + 1
    }

    pub fn max_abs_diff(&self, o: &PreNormalForm) -> f64 {
        if self.m != o.m || self.n != o.n {
            return f64::INFINITY;
        }
        let mut d = max_diff_r(&self.beta_s, &o.beta_s)
            .max(max_diff_c(&self.mu_s, &o.mu_s))
            .max(max_diff_r(&self.beta_u, &o.beta_u))
            .max(max_diff_c(&self.gamma_u, &o.gamma_u))
            .max(max_diff_c(&self.kappa_u, &o.kappa_u))
            .max(max_diff_c(&self.theta_u, &o.theta_u))
            .max(max_diff_c(&self.pi_u, &o.pi_u));
        for (a, b) in self.lambda_s_t.iter().zip(&o.lambda_s_t) {
            d = d.max(max_diff_r(a, b));
        }
        for u in 0..self.codim() {
            d = d
                .max(max_diff_c(&self.epsilon_u_s[u], &o.epsilon_u_s[u]))
                .max(max_diff_c(&self.phi_u_s[u], &o.phi_u_s[u]))
                .max(max_diff_c(&self.psi_u_s[u], &o.psi_u_s[u]));
            for (a, b) in self.sigma_u_st[u].iter().zip(&o.sigma_u_st[u]) {
                d = d.max(max_diff_c(a, b));
            }
        }
        d
    }

    /// Graph jets H_s, h_u in real variables, truncated at `order`.
    pub fn to_graph_form(&self, order: usize) -> Result<GraphForm> {
        let (m, n) = (self.m, self.n);
        let sp = JetSpace::new(m, order);
        let t = m - 2;
        let mut tang = Vec::with_capacity(t);
        for s in 0..t {
            let mut h = Jet::zero(&sp);
            let mu = self.mu_s[s];
            h.set_coeff(&zexp(m, 1, 1, &[]), c(self.beta_s[s], 0.0))?;
            if order >= 3 {
                h.set_coeff(&zexp(m, 2, 1, &[]), mu)?;
                h.set_coeff(&zexp(m, 1, 2, &[]), mu.conj())?;
                for q in 0..t {
                    h.set_coeff(&zexp(m, 1, 1, &[q + 2]), c(self.lambda_s_t[s][q], 0.0))?;
                }
            }
            tang.push(jet::from_zbar_basis(&h).re());
        }
        let mut norm = Vec::with_capacity(self.codim());
        for u in 0..self.codim() {
            let mut h = Jet::zero(&sp);
            h.set_coeff(&zexp(m, 1, 1, &[]), c(self.beta_u[u], 0.0))?;
            h.set_coeff(&zexp(m, 0, 2, &[]), self.gamma_u[u])?;
            for s in 0..t {
                h.set_coeff(&zexp(m, 0, 1, &[s + 2]), self.epsilon_u_s[u][s])?;
            }
            if order >= 3 {
                h.set_coeff(&zexp(m, 2, 1, &[]), self.kappa_u[u])?;
                h.set_coeff(&zexp(m, 1, 2, &[]), self.theta_u[u])?;
                h.set_coeff(&zexp(m, 0, 3, &[]), self.pi_u[u])?;
                for s in 0..t {
                    h.set_coeff(&zexp(m, 1, 1, &[s + 2]), self.phi_u_s[u][s])?;
                    h.set_coeff(&zexp(m, 0, 2, &[s + 2]), self.psi_u_s[u][s])?;
                    for q in s..t {
                        let v = if q == s {
                            self.sigma_u_st[u][s][s]
                        } else {
                            self.sigma_u_st[u][s][q] + self.sigma_u_st[u][q][s]
                        };
                        h.set_coeff(&zexp(m, 0, 1, &[s + 2, q + 2]), v)?;
                    }
                }
            }
            norm.push(jet::from_zbar_basis(&h));
        }
        Ok(GraphForm {
            m,
            n,
            tangential: tang,
            normal: norm,
            frame: None,
            reparam: JetMap::identity(&sp),
            steps: Vec::new(),
        })
    }

    /// The graph embedding (z1, x_s + i H_s, h_u) as polynomials.
    pub fn to_embedding(&self) -> Result<EmbeddingMap> {
        let g = self.to_graph_form(DEFAULT_ORDER)?;
        let comps = g.full_map().components().iter().map(Polynomial::from_jet).collect();
        EmbeddingMap::new(self.m, comps)
    }

    /// Change of normal coordinates z_u -> L z_u (L of size n-m+1), then a
    /// phase rotation of each row so that beta_u stays real.
    pub fn apply_normal_linear(&self, l: &CMat) -> Result<PreNormalForm> {
        let k = self.codim();
        if l.nrows() != k || l.ncols() != k {
            return Err(Error::DimensionMismatch {
                context: "normal linear change",
                expected: k,
                found: l.nrows(),
            });
        }
        let mut out = self.clone();
        let mix = |v: &[Complex64], r: usize| -> Complex64 { (0..k).map(|j| l[(r, j)] * v[j]).sum() };
        let col = |f: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> { (0..k).map(f).collect() };
        let beta_c: Vec<Complex64> = self.beta_u.iter().map(|&b| c(b, 0.0)).collect();
        let t = self.m - 2;
        let mut beta_new = vec![c(0.0, 0.0); k];
        for r in 0..k {
            beta_new[r] = mix(&beta_c, r);
            out.gamma_u[r] = mix(&self.gamma_u, r);
            out.kappa_u[r] = mix(&self.kappa_u, r);
            out.theta_u[r] = mix(&self.theta_u, r);
            out.pi_u[r] = mix(&self.pi_u, r);
            for s in 0..t {
                out.epsilon_u_s[r][s] = mix(&col(&|u| self.epsilon_u_s[u][s]), r);
                out.phi_u_s[r][s] = mix(&col(&|u| self.phi_u_s[u][s]), r);
                out.psi_u_s[r][s] = mix(&col(&|u| self.psi_u_s[u][s]), r);
                for q in 0..t {
                    out.sigma_u_st[r][s][q] = mix(&col(&|u| self.sigma_u_st[u][s][q]), r);
                }
            }
        }
        for (r, b) in beta_new.iter().enumerate() {
            let t = phase_angle(*b);
            out.beta_u[r] = (b * Complex64::from_polar(1.0, t)).re;
            if t != 0.0 {
                out.rotate_row(r, Complex64::from_polar(1.0, t));
            }
        }
        Ok(out)
    }

    fn rotate_row(&mut self, r: usize, rot: Complex64) {
        self.gamma_u[r] *= rot;
        self.kappa_u[r] *= rot;
        self.theta_u[r] *= rot;
        self.pi_u[r] *= rot;
        for s in 0..self.m - 2 {
            self.epsilon_u_s[r][s] *= rot;
            self.phi_u_s[r][s] *= rot;
            self.psi_u_s[r][s] *= rot;
            for q in 0..self.m - 2 {
                self.sigma_u_st[r][s][q] *= rot;
            }
        }
    }
}

fn forbidden(what: &str, e: &[u8], mag: f64) -> Error {
    Error::NotNormalized {
        term: format!("{what} {e:?}"),
        magnitude: mag,
    }
}

/// Read the coefficients of a fully normalized graph form.
pub fn extract_coefficients(g: &GraphForm) -> Result<PreNormalForm> {
    let (m, n) = (g.m, g.n);
    let mut nf = PreNormalForm::zero(m, n)?;
    let t = m - 2;
    let (tz, nz) = g.zbar_jets();
    let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();
    for (s, h) in tz.iter().enumerate() {
        for (e, q) in h.terms() {
            let d = deg(e);
            if (d == 2 || d == 3) && (e[0] == 0 || e[1] == 0) && q.norm() > FORBIDDEN_TOL {
                return Err(forbidden(&format!("H_{}", s + 2), e, q.norm()));
            }
        }
        nf.beta_s[s] = h.coeff(&zexp(m, 1, 1, &[])).re;
        let mu = h.coeff(&zexp(m, 2, 1, &[]));
        let mu_bar = h.coeff(&zexp(m, 1, 2, &[]));
        if (mu.conj() - mu_bar).norm() > FORBIDDEN_TOL {
            return Err(Error::ConstraintViolation {
                what: "H_s is not real",
                residual: (mu.conj() - mu_bar).norm(),
            });
        }
        nf.mu_s[s] = mu;
        for q in 0..t {
            nf.lambda_s_t[s][q] = h.coeff(&zexp(m, 1, 1, &[q + 2])).re;
        }
    }
    for (u, h) in nz.iter().enumerate() {
        for (e, q) in h.terms() {
            let d = deg(e);
            if (d == 2 || d == 3) && e[1] == 0 && q.norm() > FORBIDDEN_TOL {
                return Err(forbidden(&format!("h_{}", m + u), e, q.norm()));
            }
        }
        let beta = h.coeff(&zexp(m, 1, 1, &[]));
        if beta.im.abs() > FORBIDDEN_TOL {
            return Err(forbidden(&format!("Im beta_{}", m + u), &zexp(m, 1, 1, &[]), beta.im.abs()));
        }
        nf.beta_u[u] = beta.re;
        nf.gamma_u[u] = h.coeff(&zexp(m, 0, 2, &[]));
        nf.kappa_u[u] = h.coeff(&zexp(m, 2, 1, &[]));
        nf.theta_u[u] = h.coeff(&zexp(m, 1, 2, &[]));
        nf.pi_u[u] = h.coeff(&zexp(m, 0, 3, &[]));
        for s in 0..t {
            nf.epsilon_u_s[u][s] = h.coeff(&zexp(m, 0, 1, &[s + 2]));
            nf.phi_u_s[u][s] = h.coeff(&zexp(m, 1, 1, &[s + 2]));
            nf.psi_u_s[u][s] = h.coeff(&zexp(m, 0, 2, &[s + 2]));
            for q in s..t {
                let v = h.coeff(&zexp(m, 0, 1, &[s + 2, q + 2]));
                if q == s {
                    nf.sigma_u_st[u][s][s] = v;
                } else {
                    nf.sigma_u_st[u][s][q] = v * 0.5;
                    nf.sigma_u_st[u][q][s] = v * 0.5;
                }
            }
        }
    }
    Ok(nf)
}

/// Frame, normalized graph and coefficients at an order-1 point.
#[derive(Clone, Debug)]
pub struct NormalFormResult {
    pub frame: AdaptedFrame,
    pub graph: GraphForm,
    pub coefficients: PreNormalForm,
}

pub fn normal_form_at(f: &EmbeddingMap, p: &[f64]) -> Result<NormalFormResult> {
    let frame = adapt_frame(f, p)?;
    let fa = frame.apply(f)?;
    let mut g = graph_form(&fa, DEFAULT_ORDER)?;
    g.frame = Some(frame.clone());
    let g = pre_normalize(&g)?;
    let coefficients = extract_coefficients(&g)?;
    Ok(NormalFormResult {
        frame,
        graph: g,
        coefficients,
    })
}
