//! Rank criteria at an order-1 point: transversality, Webster and Coffman
//! classes, Coffman's reduced form and second condition, the C_1 defining
//! system, expected stratum dimensions and the Coffman model.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::embedding::EmbeddingMap;
use crate::error::{Error, Result};
use crate::jet::{self, Jet, JetMap, DEFAULT_ORDER};
use crate::linalg::{self, c, CMat, RMat, RankResult, RankTest, DEFAULT_RANK_TOL};
use crate::locus;
use crate::normal_form::{self, HoloMap, PreNormalForm};
use crate::perturb::{self, QuadPerturbation};

/// Tolerance for the reduced-form constraints.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// A rank class decision. `margin` is the smaller of the relative last
/// retained singular value and the threshold headroom of the first
/// discarded one; both are 1 when absent.
#[derive(Clone, Debug, PartialEq)]
pub struct RankClass {
    pub class: usize,
    pub margin: f64,
    pub indeterminate: bool,
    pub rank: RankResult,
}

impl RankClass {
    pub fn from_rank(rank: RankResult) -> RankClass {
        let r = rank.rank;
        let kept = if r > 0 { rank.relative(r - 1) } else { 1.0 };
        let thr = rank.threshold();
        let dropped = match rank.singular_values.get(r) {
            Some(&s) if thr > 0.0 => 1.0 - s / thr,
            _ => 1.0,
        };
        RankClass {
            class: r,
            margin: kept.min(dropped),
            indeterminate: rank.is_indeterminate(),
            rank,
        }
    }
}

fn rank_real(mat: &RMat) -> Result<RankResult> {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return Ok(linalg::rank_from_singular_values(Vec::new(), DEFAULT_RANK_TOL));
    }
    linalg::numerical_rank_real(mat, DEFAULT_RANK_TOL)
}

fn rank_complex(mat: &CMat) -> Result<RankResult> {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return Ok(linalg::rank_from_singular_values(Vec::new(), DEFAULT_RANK_TOL));
    }
    linalg::numerical_rank(mat, DEFAULT_RANK_TOL)
}

/// dS(0): 2(n-m+1) x m real matrix with row pairs
/// [b+2Re g, 2Im g, Re e..] and [2Im g, b-2Re g, Im e..].
pub fn nondeg_matrix(nf: &PreNormalForm) -> RMat {
    let k = nf.codim();
    let mut a = RMat::zeros(2 * k, nf.m);
    for u in 0..k {
        let (b, g) = (nf.beta_u[u], nf.gamma_u[u]);
        a[(2 * u, 0)] = b + 2.0 * g.re;
        a[(2 * u, 1)] = 2.0 * g.im;
        a[(2 * u + 1, 0)] = 2.0 * g.im;
        a[(2 * u + 1, 1)] = b - 2.0 * g.re;
        for (s, e) in nf.epsilon_u_s[u].iter().enumerate() {
            a[(2 * u, s + 2)] = e.re;
            a[(2 * u + 1, s + 2)] = e.im;
        }
    }
    a
}

/// rank dS(0) >= 2(n-m+1). Fails automatically when 2(n-m+1) > m.
pub fn transversality_test(nf: &PreNormalForm) -> Result<RankTest> {
    Ok(rank_real(&nondeg_matrix(nf))?.decide_at_least(2 * nf.codim()))
}

/// Row pairs [2Im g, b-2Re g] and [b+2Re g, 2Im g].
pub fn webster_matrix(nf: &PreNormalForm) -> RMat {
    let k = nf.codim();
    let mut a = RMat::zeros(2 * k, 2);
    for u in 0..k {
        let (b, g) = (nf.beta_u[u], nf.gamma_u[u]);
        a[(2 * u, 0)] = 2.0 * g.im;
        a[(2 * u, 1)] = b - 2.0 * g.re;
        a[(2 * u + 1, 0)] = b + 2.0 * g.re;
        a[(2 * u + 1, 1)] = 2.0 * g.im;
    }
    a
}

pub fn webster_class(nf: &PreNormalForm) -> Result<RankClass> {
    Ok(RankClass::from_rank(rank_real(&webster_matrix(nf))?))
}

/// Rows (beta_u, gamma_u).
pub fn coffman_matrix(nf: &PreNormalForm) -> CMat {
    let k = nf.codim();
    CMat::from_fn(k, 2, |u, j| if j == 0 { c(nf.beta_u[u], 0.0) } else { nf.gamma_u[u] })
}

pub fn coffman_class(nf: &PreNormalForm) -> Result<RankClass> {
    Ok(RankClass::from_rank(rank_complex(&coffman_matrix(nf))?))
}

/// Webster and Coffman classes read off the frame-free projection matrices
/// at a point of f (the numerical cross-check of the coefficient route).
pub fn projected_classes(f: &EmbeddingMap, x: &[f64]) -> Result<(RankClass, RankClass)> {
    let p = locus::projection_at(f, x)?;
    Ok((
        RankClass::from_rank(rank_real(&p.pi_real)?),
        RankClass::from_rank(rank_complex(&p.pi_complex)?),
    ))
}

/// Largest violation of the reduced-form constraints.
pub fn reduction_residual(nf: &PreNormalForm) -> f64 {
    let k = nf.codim();
    if k < 2 {
        return f64::INFINITY;
    }
    let mut r: f64 = 0.0;
    for u in 0..k {
        let (b_want, g_want) = match u {
            _ if u == k - 1 => (1.0, 0.0),
            _ if u == k - 2 => (0.0, 1.0),
            _ => (0.0, 0.0),
        };
        r = r.max((nf.beta_u[u] - b_want).abs());
        r = r.max((nf.gamma_u[u] - c(g_want, 0.0)).norm());
    }
    for e in &nf.epsilon_u_s[k - 2] {
        r = r.max(e.norm());
    }
    r
}

/// Holomorphic change bringing a C_2 record to the reduced form
/// beta = e_n, gamma = e_{n-1}, eps_{n-1} = 0.
pub fn coffman_reduction(nf: &PreNormalForm) -> Result<PreNormalForm> {
    let cls = coffman_class(nf)?;
    if cls.class < 2 {
        return Err(Error::RankTooLow {
            found: cls.class,
            required: 2,
        });
    }
    let k = nf.codim();
    let beta = linalg::cvec_from(&nf.beta_u.iter().map(|&b| c(b, 0.0)).collect::<Vec<_>>());
    let gamma = linalg::cvec_from(&nf.gamma_u);
    let comp = linalg::orthonormal_complement(&[beta.clone(), gamma.clone()], k);
    let mut y = CMat::zeros(k, k);
    let mut e = CMat::zeros(k, k);
    y.set_column(0, &beta);
    y.set_column(1, &gamma);
    e[(k - 1, 0)] = c(1.0, 0.0);
    e[(k - 2, 1)] = c(1.0, 0.0);
    for (i, v) in comp.iter().enumerate() {
        y.set_column(i + 2, v);
        e[(i, i + 2)] = c(1.0, 0.0);
    }
    let l = e * linalg::invert(&y)?;
    let a = nf.apply_normal_linear(&l)?;

    // z1 -> z1 + sum c_s z_s removes eps_{n-1}: eps' = eps - beta c - 2 gamma conj(c).
    let g = a.to_graph_form(DEFAULT_ORDER)?;
    let n = nf.n;
    let hsp = jet::JetSpace::new(n, DEFAULT_ORDER);
    let mut corr = vec![Jet::zero(&hsp); n];
    for (s, eps) in a.epsilon_u_s[k - 2].iter().enumerate() {
        if eps.norm() > 0.0 {
            corr[0] = &corr[0] + &Jet::variable(&hsp, s + 1).scale(eps.conj() * 0.5);
        }
    }
    let g = g.apply_holo(HoloMap::from_corrections(corr)?)?;
    let g = normal_form::pre_normalize(&g)?;
    let out = normal_form::extract_coefficients(&g)?;
    let res = reduction_residual(&out);
    if res > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation {
            what: "reduced form",
            residual: res,
        });
    }
    Ok(out)
}

/// Rank test of the Re/Im eps_u^s rows (u != n-1) against 2(n-m).
pub fn second_nondegeneracy(nf: &PreNormalForm) -> Result<RankTest> {
    let res = reduction_residual(nf);
    if res > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation {
            what: "reduced form",
            residual: res,
        });
    }
    let k = nf.codim();
    let t = nf.m - 2;
    let rows: Vec<usize> = (0..k).filter(|&u| u != k - 2).collect();
    let mut a = RMat::zeros(2 * rows.len(), t);
    for (i, &u) in rows.iter().enumerate() {
        for s in 0..t {
            a[(2 * i, s)] = nf.epsilon_u_s[u][s].re;
            a[(2 * i + 1, s)] = nf.epsilon_u_s[u][s].im;
        }
    }
    Ok(rank_real(&a)?.decide_at_least(2 * (nf.n - nf.m)))
}

/// The C_1 defining data at a normalized point.
#[derive(Clone, Debug)]
pub struct C1System {
    /// The record after z_m <-> z_j and z_j -> z_j - lambda_j z_m.
    pub normalized: PreNormalForm,
    /// Displayed formulas, j = m+1..n.
    pub tilde_beta: Vec<Complex64>,
    pub tilde_gamma: Vec<Complex64>,
    pub tilde_epsilon: Vec<Vec<Complex64>>,
    /// The same coefficients read from the jet of B~_j.
    pub jet_tilde_beta: Vec<Complex64>,
    pub jet_tilde_gamma: Vec<Complex64>,
    pub jet_tilde_epsilon: Vec<Vec<Complex64>>,
    /// dC(0), (4n-4m+2) x m.
    pub dc_matrix: RMat,
    pub psi_transversal: RankTest,
}

/// Linear change making (beta_m, gamma_m) the only nonzero row of a C_1 record.
pub fn c1_normalize(nf: &PreNormalForm) -> Result<PreNormalForm> {
    let cls = coffman_class(nf)?;
    if cls.class != 1 {
        return Err(Error::ClassMismatch {
            expected: 1,
            found: cls.class,
        });
    }
    let k = nf.codim();
    let row = |u: usize| (c(nf.beta_u[u], 0.0), nf.gamma_u[u] * 2.0);
    let norm2 = |u: usize| {
        let (a, b) = row(u);
        a.norm_sqr() + b.norm_sqr()
    };
    let j = (0..k)
        .max_by(|&a, &b| norm2(a).partial_cmp(&norm2(b)).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut p = CMat::identity(k, k);
    p.swap_rows(0, j);
    let (b0, g0) = row(j);
    let d = norm2(j);
    let mut s = CMat::identity(k, k);
    for r in 1..k {
        let u = if r == j { 0 } else { r };
        let (br, gr) = row(u);
        s[(r, 0)] = -(br * b0.conj() + gr * g0.conj()) / d;
    }
    let mut out = nf.apply_normal_linear(&(s * p))?;
    let mut res: f64 = 0.0;
    for u in 1..k {
        res = res.max(out.beta_u[u].abs()).max(out.gamma_u[u].norm());
        out.beta_u[u] = 0.0;
        out.gamma_u[u] = c(0.0, 0.0);
    }
    let scale = out.beta_u[0].abs().max(out.gamma_u[0].norm());
    if res > CONSTRAINT_TOL * scale.max(1.0) {
        return Err(Error::ConstraintViolation {
            what: "C1 normalization",
            residual: res,
        });
    }
    Ok(out)
}

fn apply_field(field: &[Jet], f: &Jet) -> Jet {
    let mut acc = Jet::zero(f.space());
    for (l, v) in field.iter().enumerate() {
        acc = &acc + &(v * &f.derivative(l));
    }
    acc
}

fn zexp(m: usize, a: u8, b: u8, x: Option<usize>) -> Vec<u8> {
    let mut e = vec![0u8; m];
    e[0] = a;
    e[1] = b;
    if let Some(s) = x {
        e[s] += 1;
    }
    e
}

pub fn c1_system(nf: &PreNormalForm) -> Result<C1System> {
    let norm = c1_normalize(nf)?;
    let (m, k, t) = (norm.m, norm.codim(), norm.m - 2);
    let (bm, gm) = (c(norm.beta_u[0], 0.0), norm.gamma_u[0]);
    let i = c(0.0, 1.0);
    let mut tb = Vec::with_capacity(k - 1);
    let mut tg = Vec::with_capacity(k - 1);
    let mut te = Vec::with_capacity(k - 1);
    for j in 1..k {
        let eb: Complex64 = (0..t).map(|s| norm.epsilon_u_s[j][s] * norm.beta_s[s]).sum();
        tb.push(bm * norm.theta_u[j] * 2.0 - i * bm * eb - gm * norm.kappa_u[j] * 4.0);
        tg.push(bm * norm.pi_u[j] * 3.0 - gm * norm.theta_u[j] * 2.0 + i * gm * eb);
        te.push(
            (0..t)
                .map(|s| (bm * norm.psi_u_s[j][s] - gm * norm.phi_u_s[j][s]) * 2.0)
                .collect::<Vec<_>>(),
        );
    }

    let g = norm.to_graph_form(DEFAULT_ORDER)?;
    let b = locus::graph_b(&g)?;
    let v = locus::kernel_field(&g)?;
    let vbar: Vec<Jet> = v.iter().map(Jet::conj).collect();
    let vb: Vec<Jet> = b.iter().map(|x| apply_field(&v, x)).collect();
    let vbb: Vec<Jet> = b.iter().map(|x| apply_field(&vbar, x)).collect();
    let mut rows: Vec<Jet> = b.clone();
    let mut jb = Vec::with_capacity(k - 1);
    let mut jg = Vec::with_capacity(k - 1);
    let mut je = Vec::with_capacity(k - 1);
    for j in 1..k {
        let bt = &(&vb[0] * &vbb[j]) - &(&vbb[0] * &vb[j]);
        let z = jet::to_zbar_basis(&bt);
        jb.push(z.coeff(&zexp(m, 1, 0, None)));
        jg.push(z.coeff(&zexp(m, 0, 1, None)) * 0.5);
        je.push((0..t).map(|s| z.coeff(&zexp(m, 0, 0, Some(s + 2)))).collect::<Vec<_>>());
        rows.push(bt);
    }
    let lin = JetMap::new(g.space(), rows)?.linear_part();
    let dc = linalg::realify_rows(&lin);
    let psi = rank_real(&dc)?.decide_at_least(4 * k - 2);
    Ok(C1System {
        normalized: norm,
        tilde_beta: tb,
        tilde_gamma: tg,
        tilde_epsilon: te,
        jet_tilde_beta: jb,
        jet_tilde_gamma: jg,
        jet_tilde_epsilon: je,
        dc_matrix: dc,
        psi_transversal: psi,
    })
}

/// Expected stratum dimensions; `None` means empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedDimensions {
    pub m: usize,
    pub n: usize,
    /// dim S_nu for nu = 1, 2, ...
    pub s_nu: Vec<Option<usize>>,
    pub w0: Option<usize>,
    pub w1: Option<usize>,
    pub c1: Option<usize>,
    pub case_label: Option<&'static str>,
}

fn nonneg(d: i64) -> Option<usize> {
    usize::try_from(d).ok()
}

pub fn expected_dimensions(m: usize, n: usize) -> ExpectedDimensions {
    let (mi, ni) = (m as i64, n as i64);
    let s_nu = (1..=(m / 2).max(1) as i64)
        .map(|nu| nonneg(mi - 2 * nu * (ni - mi + nu)))
        .collect();
    ExpectedDimensions {
        m,
        n,
        s_nu,
        w0: nonneg(7 * mi - 6 * ni - 6),
        w1: nonneg(5 * mi - 4 * ni - 3),
        c1: nonneg(5 * mi - 4 * ni - 2),
        case_label: case_label(m, n),
    }
}

/// Case of the main theorem; only for n = floor(5m/4).
pub fn case_label(m: usize, n: usize) -> Option<&'static str> {
    if m == 0 || n != 5 * m / 4 {
        return None;
    }
    Some(match m % 4 {
        0 => "m≡0: S=C₂",
        1 => "m≡1: S=C₂",
        2 => "m≡2: S=C₂⊔C₁, dim C₁=0",
        _ => "m≡3: S=C₂⊔(C₁∩W₂)⊔(C₁∩W₁), dim C₁=1, dim W₁=0",
    })
}

/// Everything the classifier knows about an order-1 point.
#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub transversal: RankTest,
    pub webster: RankClass,
    pub coffman: RankClass,
    /// Second condition on the reduced record; only for class C_2.
    pub coffman_second: Option<RankTest>,
    pub psi_matrix: RMat,
    pub expected: ExpectedDimensions,
    pub stratum: String,
}

impl ClassificationReport {
    pub fn indeterminate(&self) -> bool {
        self.transversal.indeterminate
            || self.webster.indeterminate
            || self.coffman.indeterminate
            || self.coffman_second.as_ref().is_some_and(|t| t.indeterminate)
    }
}

pub fn classify(nf: &PreNormalForm) -> Result<ClassificationReport> {
    let transversal = transversality_test(nf)?;
    let webster = webster_class(nf)?;
    let coffman = coffman_class(nf)?;
    let coffman_second = if coffman.class == 2 {
        coffman_reduction(nf).and_then(|r| second_nondegeneracy(&r)).ok()
    } else {
        None
    };
    let psi_matrix = perturb::psi_matrix(nf, &QuadPerturbation::zero(nf.codim()));
    let stratum = if transversal.holds {
        format!("C{}∩W{}", coffman.class, webster.class)
    } else {
        String::from("unstratified")
    };
    Ok(ClassificationReport {
        transversal,
        webster,
        coffman,
        coffman_second,
        psi_matrix,
        expected: expected_dimensions(nf.m, nf.n),
        stratum,
    })
}

fn check_model_range(m: usize, n: usize) -> Result<()> {
    if m >= n || 3 * m < 2 * (n + 1) {
        return Err(Error::DimensionRange {
            m,
            n,
            reason: "Coffman model needs 2(n+1)/3 <= m < n",
        });
    }
    Ok(())
}

/// Coefficients of the Coffman model: z_m = zbar1^2,
/// z_{m+1} = |z1|^2 + zbar1 (x2 + i x3), z_l = zbar1 (x_{2(l-m)} + i x_{2(l-m)+1}).
pub fn coffman_model_nf(m: usize, n: usize) -> Result<PreNormalForm> {
    check_model_range(m, n)?;
    let mut nf = PreNormalForm::zero(m, n)?;
    nf.gamma_u[0] = c(1.0, 0.0);
    nf.beta_u[1] = 1.0;
    nf.epsilon_u_s[1][0] = c(1.0, 0.0);
    nf.epsilon_u_s[1][1] = c(0.0, 1.0);
    for l in m + 2..=n {
        let s = 2 * (l - m) - 2;
        nf.epsilon_u_s[l - m][s] = c(1.0, 0.0);
        nf.epsilon_u_s[l - m][s + 1] = c(0.0, 1.0);
    }
    Ok(nf)
}

pub fn coffman_model(m: usize, n: usize) -> Result<EmbeddingMap> {
    Ok(coffman_model_nf(m, n)?.to_embedding()?.with_label(format!("coffman({m},{n})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bishop(g: f64) -> PreNormalForm {
        let mut nf = PreNormalForm::zero(2, 2).unwrap();
        nf.beta_u[0] = 1.0;
        nf.gamma_u[0] = c(g, 0.0);
        nf
    }

    #[test]
    fn bishop_webster() {
        for g in [0.0, 0.25, 0.75, 2.0] {
            assert_eq!(webster_class(&bishop(g)).unwrap().class, 2);
        }
        let w = webster_class(&bishop(0.5)).unwrap();
        assert_eq!(w.class, 1);
        assert!(!w.indeterminate);
    }

    #[test]
    fn coffman_rows() {
        let mut nf = PreNormalForm::zero(4, 5).unwrap();
        nf.beta_u = vec![1.0, 2.0];
        nf.gamma_u = vec![c(0.3, 0.0), c(0.6, 0.0)];
        assert_eq!(coffman_class(&nf).unwrap().class, 1);
        let z = PreNormalForm::zero(4, 5).unwrap();
        assert_eq!(coffman_class(&z).unwrap().class, 0);
        assert_eq!(webster_class(&z).unwrap().class, 0);
        assert!(!transversality_test(&z).unwrap().holds);
    }

    #[test]
    fn coffman_model_classes() {
        for (m, n) in [(4, 5), (6, 8), (7, 8), (6, 7)] {
            let nf = coffman_model_nf(m, n).unwrap();
            let r = classify(&nf).unwrap();
            assert!(r.transversal.holds, "{m},{n}");
            assert_eq!(r.webster.class, 2);
            assert_eq!(r.coffman.class, 2);
            assert!(r.coffman_second.as_ref().unwrap().holds);
            let red = coffman_reduction(&nf).unwrap();
            assert!(reduction_residual(&red) < 1e-10);
        }
        assert!(matches!(coffman_model(4, 7), Err(Error::DimensionRange { .. })));
    }

    #[test]
    fn coffman_model_components() {
        let f = coffman_model(4, 5).unwrap();
        let v = f.eval(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let want = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).norm() < 1e-14);
        }
        // z_8 = zbar1 (x4 + i x5) on (6,8)
        let f = coffman_model(6, 8).unwrap();
        let v = f.eval(&[0.0, 1.0, 0.0, 0.0, 2.0, 3.0]).unwrap();
        assert!((v[7] - c(0.0, -1.0) * c(2.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn reduction_of_random_c2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let nf = PreNormalForm::random(6, 7, 1.0, &mut rng).unwrap();
            let red = coffman_reduction(&nf).unwrap();
            assert!(reduction_residual(&red) < 1e-10);
            let (a, b) = (transversality_test(&nf).unwrap(), transversality_test(&red).unwrap());
            assert_eq!(a.holds, b.holds);
            assert_eq!(coffman_class(&red).unwrap().class, 2);
            assert_eq!(second_nondegeneracy(&red).unwrap().holds, a.holds);
            // fixed point
            let again = coffman_reduction(&red).unwrap();
            assert!(again.max_abs_diff(&red) < 1e-9);
        }
    }

    #[test]
    fn second_condition_all_zero_eps() {
        let mut nf = coffman_model_nf(4, 5).unwrap();
        nf.epsilon_u_s[1] = vec![c(0.0, 0.0); 2];
        assert!(!second_nondegeneracy(&nf).unwrap().holds);
        let bad = PreNormalForm::zero(4, 5).unwrap();
        assert!(matches!(second_nondegeneracy(&bad), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn tilde_epsilon_example() {
        let mut nf = PreNormalForm::zero(4, 5).unwrap();
        nf.beta_u[0] = 1.0;
        for s in 0..2 {
            nf.psi_u_s[1][s] = c(0.5, 0.0);
            nf.phi_u_s[1][s] = c(0.7, -0.2);
            nf.epsilon_u_s[0][s] = c(0.3 * s as f64, 1.0);
        }
        let sys = c1_system(&nf).unwrap();
        for s in 0..2 {
            assert!((sys.tilde_epsilon[0][s] - c(1.0, 0.0)).norm() < 1e-12);
            assert!((sys.jet_tilde_epsilon[0][s] - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn c1_no_cubic_terms() {
        let mut nf = PreNormalForm::zero(7, 8).unwrap();
        nf.beta_u[0] = 1.0;
        nf.gamma_u[0] = c(0.2, 0.1);
        nf.epsilon_u_s[1][0] = c(1.0, 0.5);
        let sys = c1_system(&nf).unwrap();
        assert!(sys.tilde_beta.iter().chain(&sys.tilde_gamma).all(|z| z.norm() == 0.0));
        assert!(sys.tilde_epsilon.iter().flatten().all(|z| z.norm() == 0.0));
        assert!(!sys.psi_transversal.holds);
        assert!(matches!(c1_system(&coffman_model_nf(7, 8).unwrap()), Err(Error::ClassMismatch { .. })));
    }

    #[test]
    fn c1_random_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let mut nf = PreNormalForm::random(7, 8, 1.0, &mut rng).unwrap();
            // force class 1: second row proportional to the first
            nf.beta_u[1] = 0.5 * nf.beta_u[0];
            nf.gamma_u[1] = nf.gamma_u[0] * 0.5;
            let sys = c1_system(&nf).unwrap();
            assert_eq!(sys.dc_matrix.nrows(), 6);
            assert!(sys.psi_transversal.holds);
            assert_eq!(sys.psi_transversal.rank.rank, 6);
            let n = &sys.normalized;
            assert!(n.beta_u[1] == 0.0 && n.gamma_u[1].norm() == 0.0);
            for (a, b) in sys.tilde_epsilon[0].iter().zip(&sys.jet_tilde_epsilon[0]) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn dimensions() {
        let d = expected_dimensions(4, 5);
        assert_eq!(d.s_nu[0], Some(0));
        assert_eq!(d.c1, None);
        assert_eq!(d.case_label, Some("m≡0: S=C₂"));
        let d = expected_dimensions(7, 8);
        assert_eq!((d.s_nu[0], d.c1, d.w1, d.w0), (Some(3), Some(1), Some(0), None));
        assert!(d.case_label.unwrap().starts_with("m≡3"));
        let d = expected_dimensions(6, 7);
        assert_eq!((d.s_nu[0], d.c1), (Some(2), Some(0)));
        assert!(d.case_label.unwrap().starts_with("m≡2"));
        assert_eq!(case_label(6, 8), None);
    }
}
