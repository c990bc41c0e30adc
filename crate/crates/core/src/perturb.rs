//! Perturbations that repair degenerate points: the quadratic family
//! z_u -> z_u + b_u |z1|^2 + c_u zbar1^2, seeded general-position noise,
//! and the cubic steering of the C_1 tangent.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classify::{self, RankClass};
use crate::embedding::EmbeddingMap;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, RVec, DEFAULT_RANK_TOL};
use crate::normal_form::PreNormalForm;
use crate::poly::Polynomial;

/// z_u -> z_u + b_u |z1|^2 + c_u zbar1^2 for u = m..n.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPerturbation {
    pub b: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub cutoff_radius: Option<f64>,
}

impl QuadPerturbation {
    pub fn zero(k: usize) -> QuadPerturbation {
        QuadPerturbation {
            b: vec![c(0.0, 0.0); k],
            c: vec![c(0.0, 0.0); k],
            cutoff_radius: None,
        }
    }

    pub fn norm(&self) -> f64 {
        self.b.iter().chain(&self.c).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.b.iter().chain(&self.c).all(|z| z.norm() == 0.0)
    }

    /// The record obtained by adding b to beta and c to gamma. Only valid
    /// for real b (beta must stay real).
    pub fn apply_to_record(&self, nf: &PreNormalForm) -> Result<PreNormalForm> {
        check_len(nf, self)?;
        if self.b.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidArgument("record update needs real b"));
        }
        let mut out = nf.clone();
        for u in 0..nf.codim() {
            out.beta_u[u] += self.b[u].re;
            out.gamma_u[u] += self.c[u];
        }
        Ok(out)
    }
}

fn check_len(nf: &PreNormalForm, q: &QuadPerturbation) -> Result<()> {
    let k = nf.codim();
    for len in [q.b.len(), q.c.len()] {
        if len != k {
            return Err(Error::DimensionMismatch {
                context: "quadratic perturbation",
                expected: k,
                found: len,
            });
        }
    }
    Ok(())
}

/// Row pairs [2Im g + Im b + 2Im c, beta + 2Re g + Re b - 2Re c] and
/// [beta - 2Re g + Re b + 2Re c, 2Im g - Im b + 2Im c].
pub fn psi_matrix(nf: &PreNormalForm, q: &QuadPerturbation) -> RMat {
    let k = nf.codim();
    let mut a = RMat::zeros(2 * k, 2);
    let zero = c(0.0, 0.0);
    for u in 0..k {
        let (be, g) = (nf.beta_u[u], nf.gamma_u[u]);
        let b = q.b.get(u).copied().unwrap_or(zero);
        let cc = q.c.get(u).copied().unwrap_or(zero);
        a[(2 * u, 0)] = 2.0 * g.im + b.im + 2.0 * cc.im;
        a[(2 * u, 1)] = be + 2.0 * g.re + b.re - 2.0 * cc.re;
        a[(2 * u + 1, 0)] = be - 2.0 * g.re + b.re + 2.0 * cc.re;
        a[(2 * u + 1, 1)] = 2.0 * g.im - b.im + 2.0 * cc.im;
    }
    a
}

/// The exact (b, c) with psi_matrix(nf, (b, c)) = target.
pub fn solve_psi_target(nf: &PreNormalForm, target: &RMat) -> Result<QuadPerturbation> {
    let k = nf.codim();
    if target.nrows() != 2 * k || target.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            context: "psi target",
            expected: 2 * k,
            found: target.nrows(),
        });
    }
    let base = psi_matrix(nf, &QuadPerturbation::zero(k));
    let d = target - base;
    let mut q = QuadPerturbation::zero(k);
    for u in 0..k {
        let (d00, d01, d10, d11) = (d[(2 * u, 0)], d[(2 * u, 1)], d[(2 * u + 1, 0)], d[(2 * u + 1, 1)]);
        q.b[u] = c((d01 + d10) / 2.0, (d00 - d11) / 2.0);
        q.c[u] = c((d10 - d01) / 4.0, (d00 + d11) / 4.0);
    }
    Ok(q)
}

/// Which rank the repair should reach (as a lower bound).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepairTarget {
    Webster(usize),
    Coffman(usize),
}

impl RepairTarget {
    fn rank(self) -> usize {
        match self {
            RepairTarget::Webster(r) | RepairTarget::Coffman(r) => r,
        }
    }
}

/// The target-th singular value (absolute) of the perturbed class matrix.
fn target_sigma(nf: &PreNormalForm, q: &QuadPerturbation, target: RepairTarget) -> Result<f64> {
    let r = target.rank();
    if r == 0 {
        return Ok(f64::INFINITY);
    }
    let cls = match target {
        RepairTarget::Webster(_) => RankClass::from_rank(linalg::numerical_rank_real(&psi_matrix(nf, q), DEFAULT_RANK_TOL)?),
        RepairTarget::Coffman(_) => classify::coffman_class(&q.apply_to_record(nf)?)?,
    };
    if cls.class < r {
        return Ok(0.0);
    }
    Ok(cls.rank.singular_values.get(r - 1).copied().unwrap_or(0.0))
}

/// A (b, c) of norm <= epsilon reaching the target rank with the target
/// singular value >= epsilon / 10. The search runs over b real, c purely
/// imaginary, where the record stays in pre-normal form.
pub fn solve_nondegenerate_bc(nf: &PreNormalForm, target: RepairTarget, epsilon: f64) -> Result<QuadPerturbation> {
    if !(epsilon >= 10.0 * DEFAULT_RANK_TOL) {
        return Err(Error::EpsilonTooSmall { epsilon });
    }
    let k = nf.codim();
    let r = target.rank();
    let reachable = match target {
        RepairTarget::Webster(r) => r <= 2,
        RepairTarget::Coffman(r) => r <= 2 && r <= k,
    };
    if !reachable {
        return Err(Error::UnreachableTarget(r));
    }
    let zero = QuadPerturbation::zero(k);
    if target_sigma(nf, &zero, target)? >= epsilon / 10.0 {
        return Ok(zero);
    }
    // unit directions in (r_0, t_0, r_1, t_1, ...) with b_u = r_u, c_u = i t_u
    let dim = 2 * k;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        for sgn in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = sgn;
            dirs.push(v);
        }
        for j in i + 1..dim {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0)] {
                let mut v = vec![0.0; dim];
                v[i] = a;
                v[j] = b;
                dirs.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..64 {
        dirs.push((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect());
    }
    let mut best: Option<(f64, QuadPerturbation)> = None;
    for d in dirs {
        let nrm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            continue;
        }
        let mut q = QuadPerturbation::zero(k);
        for u in 0..k {
            q.b[u] = c(epsilon * d[2 * u] / nrm, 0.0);
            q.c[u] = c(0.0, epsilon * d[2 * u + 1] / nrm);
        }
        let s = target_sigma(nf, &q, target)?;
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, q));
        }
    }
    match best {
        Some((s, q)) if s >= epsilon / 10.0 => Ok(q),
        _ => Err(Error::UnreachableTarget(r)),
    }
}

/// chi(x) = 1 - (|x - p|^2 / r^2)^2: equal to 1 through third order at p,
/// zero on the sphere of radius r.
pub fn bump(p: &[f64], radius: f64) -> Polynomial {
    let nv = p.len();
    let mut d = Polynomial::zero(nv);
    for (l, &pl) in p.iter().enumerate() {
        let t = &Polynomial::variable(nv, l) - &Polynomial::constant(nv, c(pl, 0.0));
        d = &d + &(&t * &t);
    }
    let d2 = (&d * &d).scale(c(-1.0 / radius.powi(4), 0.0));
    &Polynomial::constant(nv, c(1.0, 0.0)) + &d2
}

/// Add b_u |w|^2 + c_u wbar^2 (times the bump, if any) to z_u, where
/// w = z1 - z1(p). `f` must be adapted at p.
pub fn apply_quad_perturbation(f: &EmbeddingMap, p: &[f64], q: &QuadPerturbation) -> Result<EmbeddingMap> {
    let (m, n) = (f.m(), f.n());
    let k = n - m + 1;
    if q.b.len() != k || q.c.len() != k {
        return Err(Error::DimensionMismatch {
            context: "quadratic perturbation",
            expected: k,
            found: q.b.len(),
        });
    }
    if p.len() != m {
        return Err(Error::DimensionMismatch {
            context: "basepoint",
            expected: m,
            found: p.len(),
        });
    }
    if q.is_zero() {
        return Ok(f.clone());
    }
    let z0 = f.eval(p)?[0];
    let w = &f.components()[0] - &Polynomial::constant(m, z0);
    let wb = w.conj();
    let abs2 = &w * &wb;
    let wb2 = &wb * &wb;
    let chi = q.cutoff_radius.map(|r| bump(p, r));
    let mut comps = f.components().to_vec();
    for u in 0..k {
        let mut add = &abs2.scale(q.b[u]) + &wb2.scale(q.c[u]);
        if let Some(chi) = &chi {
            add = &add * chi;
        }
        comps[m - 1 + u] = &comps[m - 1 + u] + &add;
    }
    f.with_components(comps)
}

/// Add seeded random affine and homogeneous quadratic terms, each
/// coefficient of modulus <= scale, to every component.
pub fn random_general_position(f: &EmbeddingMap, scale: f64, seed: u64) -> Result<EmbeddingMap> {
    if !(scale >= 0.0) {
        return Err(Error::InvalidArgument("scale must be nonnegative"));
    }
    if scale == 0.0 {
        return Ok(f.clone());
    }
    let m = f.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = scale / core::f64::consts::SQRT_2;
    let mut draw = || c(rng.gen_range(-a..=a), rng.gen_range(-a..=a));
    let mut exps: Vec<Vec<u32>> = vec![vec![0; m]];
    for l in 0..m {
        let mut e = vec![0; m];
        e[l] = 1;
        exps.push(e);
    }
    for l in 0..m {
        for r in l..m {
            let mut e = vec![0; m];
            e[l] += 1;
            e[r] += 1;
            exps.push(e);
        }
    }
    let comps = f
        .components()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            for e in &exps {
                p.add_term(e.clone(), draw());
            }
            p
        })
        .collect();
    f.with_components(comps)
}

fn det_without(r: &RMat, skip_row: Option<usize>, skip_cols: &[usize]) -> f64 {
    let rows: Vec<usize> = (0..r.nrows()).filter(|&i| Some(i) != skip_row).collect();
    let cols: Vec<usize> = (0..r.ncols()).filter(|j| !skip_cols.contains(j)).collect();
    if rows.len() != cols.len() {
        return 0.0;
    }
    if rows.is_empty() {
        return 1.0;
    }
    RMat::from_fn(rows.len(), cols.len(), |i, j| r[(rows[i], cols[j])]).determinant()
}

/// Generalized cross product of the rows of an (m-1) x m matrix:
/// component k is (-1)^(m+k) det(R without column k), 1-based.
pub fn cross_product(rows: &RMat) -> Result<RVec> {
    let m = rows.ncols();
    if m < 2 || rows.nrows() + 1 != m {
        return Err(Error::DimensionMismatch {
            context: "cross product",
            expected: m.saturating_sub(1),
            found: rows.nrows(),
        });
    }
    Ok(RVec::from_fn(m, |k, _| {
        let sign = if (m + k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * det_without(rows, None, &[k])
    }))
}

/// Outcome of steering the C_1 tangent by the entries r_{m-1,m}, r_{m-2,m}.
#[derive(Clone, Debug)]
pub struct TangentSteer {
    /// The matrix actually used (after the small repair, if any).
    pub r: RMat,
    pub j0: usize,
    pub k0: usize,
    pub sigma_j0: f64,
    pub sigma_k0: f64,
    /// True when r_{m-1,j0} was nudged to find k0.
    pub repaired: bool,
    pub tangent: RVec,
    pub tangent_j0: RVec,
    pub tangent_k0: RVec,
    pub omega_j0: RVec,
    pub omega_k0: RVec,
    /// Smallest singular value of the 3 x m tangent stack.
    pub independence: f64,
}

const MINOR_TOL: f64 = 1e-12;

fn best_column(r: &RMat, skip_row: usize, exclude: Option<usize>) -> (usize, f64) {
    let m = r.ncols();
    (0..m - 1)
        .filter(|&j| Some(j) != exclude)
        .map(|j| (j, det_without(r, Some(skip_row), &[j, m - 1]).abs()))
        .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a })
}

pub fn steer_tangent(r: &RMat, sigma: f64) -> Result<TangentSteer> {
    let m = r.ncols();
    if m < 3 || r.nrows() + 1 != m {
        return Err(Error::DimensionMismatch {
            context: "steering matrix",
            expected: m.saturating_sub(1),
            found: r.nrows(),
        });
    }
    let scale = r.norm().max(f64::MIN_POSITIVE);
    let last = m - 2;
    let lastrow = (0..m - 1).map(|j| r[(last, j)].abs()).fold(0.0, f64::max);
    if lastrow <= MINOR_TOL * scale {
        return Err(Error::MinorVanishes {
            which: "last row without the last column",
            value: lastrow,
        });
    }
    let lead = det_without(r, None, &[m - 1]);
    if lead.abs() <= MINOR_TOL * scale.powi(m as i32 - 1) {
        return Err(Error::MinorVanishes {
            which: "leading (m-1)x(m-1) minor",
            value: lead.abs(),
        });
    }
    let tiny = MINOR_TOL * scale.powi(m as i32 - 2);
    let (j0, dj) = best_column(r, last, None);
    if dj <= tiny {
        return Err(Error::MinorVanishes {
            which: "j0 minor",
            value: dj,
        });
    }
    let mut rr = r.clone();
    let mut repaired = false;
    let (mut k0, mut dk) = best_column(&rr, last - 1, Some(j0));
    if dk <= tiny {
        rr[(last, j0)] += 1e-6 * scale;
        repaired = true;
        (k0, dk) = best_column(&rr, last - 1, Some(j0));
        if dk <= tiny {
            return Err(Error::MinorVanishes {
                which: "k0 minor",
                value: dk,
            });
        }
    }
    let t0 = cross_product(&rr)?;
    let mut r1 = rr.clone();
    r1[(last, m - 1)] += sigma;
    let t1 = cross_product(&r1)?;
    let mut r2 = rr.clone();
    r2[(last - 1, m - 1)] += sigma;
    let t2 = cross_product(&r2)?;
    let stack = RMat::from_fn(3, m, |i, j| [&t0, &t1, &t2][i][j]);
    let sv = stack.singular_values();
    let independence = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TangentSteer {
        omega_j0: &t1 - &t0,
        omega_k0: &t2 - &t0,
        r: rr,
        j0,
        k0,
        sigma_j0: sigma,
        sigma_k0: sigma,
        repaired,
        tangent: t0,
        tangent_j0: t1,
        tangent_k0: t2,
        independence,
    })
}

/// Shift eps~_n^{m-1} by `delta` through psi_n^{m-1} and phi_n^{m-1} of a
/// C_1-normalized record; in dC(0) this moves r_{m-2,m} by Re delta and
/// r_{m-1,m} by Im delta (when dC(0) has m-1 rows).
pub fn realize_steer(normalized: &PreNormalForm, delta: Complex64) -> Result<PreNormalForm> {
    let k = normalized.codim();
    let t = normalized.m - 2;
    if k < 2 || t == 0 {
        return Err(Error::DimensionRange {
            m: normalized.m,
            n: normalized.n,
            reason: "steering needs n > m and m > 2",
        });
    }
    let (bm, gm) = (normalized.beta_u[0], normalized.gamma_u[0]);
    let d = 2.0 * (bm * bm + gm.norm_sqr());
    if d == 0.0 {
        return Err(Error::ClassMismatch { expected: 1, found: 0 });
    }
    let mut out = normalized.clone();
    out.psi_u_s[k - 1][t - 1] += delta * bm / d;
    out.phi_u_s[k - 1][t - 1] -= delta * gm.conj() / d;
    Ok(out)
}

/// Complex matrix whose rows are (beta_u + b_u, gamma_u + c_u).
pub fn perturbed_coffman_matrix(nf: &PreNormalForm, q: &QuadPerturbation) -> CMat {
    let k = nf.codim();
    CMat::from_fn(k, 2, |u, j| {
        if j == 0 {
            c(nf.beta_u[u], 0.0) + q.b[u]
        } else {
            nf.gamma_u[u] + q.c[u]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{c1_system, webster_class};

    fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> RMat {
        RMat::from_fn(r, c, |_, _| rng.gen_range(-1.0..=1.0))
    }

    #[test]
    fn psi_example() {
        let nf = PreNormalForm::zero(4, 5).unwrap();
        let mut q = QuadPerturbation::zero(2);
        q.c[0] = c(0.5, 0.0);
        let a = psi_matrix(&nf, &q);
        assert_eq!((a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]), (0.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn surjective() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nf = PreNormalForm::random(6, 8, 1.0, &mut rng).unwrap();
        let t = rand_mat(&mut rng, 6, 2);
        let q = solve_psi_target(&nf, &t).unwrap();
        assert!((psi_matrix(&nf, &q) - t).amax() < 1e-14);
    }

    #[test]
    fn repair_degenerate() {
        let nf = PreNormalForm::zero(4, 5).unwrap();
        let q = solve_nondegenerate_bc(&nf, RepairTarget::Webster(2), 0.1).unwrap();
        assert!(q.norm() <= 0.1 + 1e-15);
        let rep = q.apply_to_record(&nf).unwrap();
        let w = webster_class(&rep).unwrap();
        assert_eq!(w.class, 2);
        assert!(w.rank.singular_values[1] >= 0.01);
        assert!(matches!(
            solve_nondegenerate_bc(&nf, RepairTarget::Webster(2), 1e-9),
            Err(Error::EpsilonTooSmall { .. })
        ));
        let nf = classify::coffman_model_nf(4, 5).unwrap();
        assert!(solve_nondegenerate_bc(&nf, RepairTarget::Webster(2), 0.1).unwrap().is_zero());
    }

    #[test]
    fn repair_coffman() {
        let mut nf = PreNormalForm::zero(4, 5).unwrap();
        nf.beta_u = vec![1.0, 2.0];
        nf.gamma_u = vec![c(0.3, 0.0), c(0.6, 0.0)];
        let q = solve_nondegenerate_bc(&nf, RepairTarget::Coffman(2), 0.05).unwrap();
        assert_eq!(classify::coffman_class(&q.apply_to_record(&nf).unwrap()).unwrap().class, 2);
    }

    #[test]
    fn cross_product_basics() {
        let r = RMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let x = cross_product(&r).unwrap();
        assert_eq!(x.as_slice(), &[0.0, 0.0, 1.0]);
        let d = RMat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(cross_product(&d).unwrap().norm() < 1e-14);
    }

    #[test]
    fn steer_small_example() {
        let r = RMat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let s = steer_tangent(&r, 0.1).unwrap();
        assert_eq!((s.j0, s.k0), (1, 0));
        assert!((s.tangent.clone() - RVec::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-15);
        assert_eq!(s.omega_j0[2], 0.0);
        assert!(s.independence > 0.0);
        let z = steer_tangent(&r, 0.0).unwrap();
        assert_eq!(z.omega_j0.norm() + z.omega_k0.norm(), 0.0);
    }

    #[test]
    fn steer_realized_in_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut nf = PreNormalForm::random(7, 8, 1.0, &mut rng).unwrap();
        nf.beta_u[1] = 0.0;
        nf.gamma_u[1] = c(0.0, 0.0);
        let sys = c1_system(&nf).unwrap();
        let moved = realize_steer(&sys.normalized, c(1e-2, 2e-2)).unwrap();
        let sys2 = c1_system(&moved).unwrap();
        let d = &sys2.dc_matrix - &sys.dc_matrix;
        for i in 0..6 {
            for j in 0..7 {
                let want = match (i, j) {
                    (4, 6) => 1e-2,
                    (5, 6) => 2e-2,
                    _ => 0.0,
                };
                assert!((d[(i, j)] - want).abs() < 1e-10, "{i},{j}: {}", d[(i, j)]);
            }
        }
    }

    #[test]
    fn general_position_determinism() {
        let f = classify::coffman_model(4, 5).unwrap();
        assert_eq!(random_general_position(&f, 0.0, 3).unwrap(), f);
        let a = random_general_position(&f, 1e-2, 3).unwrap();
        let b = random_general_position(&f, 1e-2, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, f);
    }

    #[test]
    fn quad_perturbation_zero_and_jet() {
        let f = classify::coffman_model(4, 5).unwrap();
        let p = [0.0; 4];
        assert_eq!(apply_quad_perturbation(&f, &p, &QuadPerturbation::zero(2)).unwrap(), f);
        let mut q = QuadPerturbation::zero(2);
        q.b[0] = c(0.3, 0.0);
        q.c[1] = c(0.0, 0.2);
        q.cutoff_radius = Some(0.5);
        let g = apply_quad_perturbation(&f, &p, &q).unwrap();
        let nf = crate::normal_form::normal_form_at(&g, &p).unwrap().coefficients;
        let want = q.apply_to_record(&classify::coffman_model_nf(4, 5).unwrap()).unwrap();
        assert!(nf.max_abs_diff(&want) < 1e-9, "{}", nf.max_abs_diff(&want));
        // bump vanishes on the sphere
        let chi = bump(&p, 0.5);
        assert!(chi.eval(&[0.5, 0.0, 0.0, 0.0]).norm() < 1e-14);
    }
}
