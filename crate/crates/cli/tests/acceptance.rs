//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the summary is always printed.

use std::time::{Duration, Instant};

use crsing::classify;
use crsing::fixtures;
use crsing::hull::{self, HullProblem, HullStatus};
use crsing::jet::{Jet, JetMap, JetSpace};
use crsing::linalg::{c, RMat};
use crsing::locus::{self, RefineOptions};
use crsing::normal_form::{self, PreNormalForm};
use crsing::perturb;
use crsing::Complex64;
use crsing_cli::{parse_spec, run_pipeline, to_embedding, PipelineOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    check(t <= limit, || format!("{what} took {t:.1?}, limit {limit:?}"))
}

/// Coffman models: singular set, order, class, transversality, second condition.
fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (m, n) in [(4, 5), (6, 8), (7, 8), (6, 7)] {
        let t0 = Instant::now();
        let f = to_embedding(&parse_spec(&format!("coffman({m},{n})")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let opts = PipelineOptions {
            grid: 3,
            max_seeds: 12,
            ..PipelineOptions::default()
        };
        let r = run_pipeline(&f, &opts).map_err(|e| e.to_string())?;
        check(!r.points.is_empty(), || format!("({m},{n}): no singular point"))?;
        let zero = 2 * (n - m) + 1;
        for p in &r.points {
            check(p.residual <= 1e-8, || format!("({m},{n}): residual {:e}", p.residual))?;
            check(p.location[..zero].iter().all(|v| v.abs() <= 1e-8), || format!("({m},{n}): off the model set {:?}", p.location))?;
            check(p.order == 1, || format!("({m},{n}): order {}", p.order))?;
            let cls = p.classification.as_ref().ok_or("missing classification")?;
            check(cls.coffman.class == 2, || format!("({m},{n}): class C{}", cls.coffman.class))?;
            check(cls.transversal.holds, || format!("({m},{n}): not transversal"))?;
            check(cls.coffman_second.as_ref().is_some_and(|t| t.holds), || format!("({m},{n}): second condition fails"))?;
            check(p.local_dimension == Some(m - 2 * (n - m + 1)), || format!("({m},{n}): local dimension {:?}", p.local_dimension))?;
        }
        check(r.indeterminate.is_empty(), || format!("({m},{n}): indeterminate {:?}", r.indeterminate))?;
        within(t0, Duration::from_secs(30), &format!("coffman({m},{n})"))?;
        notes.push(format!("({m},{n}) {} pts {:.1?}", r.points.len(), t0.elapsed()));
    }
    Ok(notes.join(", "))
}

/// Record -> graph embedding -> record.
fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for (m, n) in [(4, 5), (6, 7), (7, 8)] {
        for seed in 0..100u64 {
            let nf = fixtures::random_record(m, n, 1000 + seed).map_err(|e| e.to_string())?;
            let f = nf.to_embedding().map_err(|e| e.to_string())?;
            let back = normal_form::normal_form_at(&f, &vec![0.0; m]).map_err(|e| format!("({m},{n}) seed {seed}: {e}"))?;
            worst = worst.max(nf.max_abs_diff(&back.coefficients));
        }
    }
    check(worst <= 1e-9, || format!("max coefficient error {worst:e}"))?;
    within(t0, Duration::from_secs(120), "round trips")?;
    Ok(format!("300 records, max error {worst:.1e}, {:.1?}", t0.elapsed()))
}

/// Second nondegeneracy of the reduction agrees with transversality.
fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut compared, mut holds, mut disagree, mut skipped, mut drawn) = (0, 0, 0, 0, 0);
    while compared + skipped < 200 {
        drawn += 1;
        let (m, n) = [(4, 5), (6, 7), (6, 8), (7, 8)][rng.gen_range(0..4)];
        let mut nf = PreNormalForm::random(m, n, 1.0, &mut rng).map_err(|e| e.to_string())?;
        degrade_epsilon(&mut nf, &mut rng);
        if classify::coffman_class(&nf).map_err(|e| e.to_string())?.class != 2 {
            continue;
        }
        let t = classify::transversality_test(&nf).map_err(|e| e.to_string())?;
        let red = classify::coffman_reduction(&nf).map_err(|e| e.to_string())?;
        let s = classify::second_nondegeneracy(&red).map_err(|e| e.to_string())?;
        if t.margin < 1e-6 || s.margin < 1e-6 {
            skipped += 1;
            continue;
        }
        compared += 1;
        holds += usize::from(t.holds);
        disagree += usize::from(t.holds != s.holds);
    }
    check(disagree == 0, || format!("{disagree} disagreements of {compared}"))?;
    check(holds > 0 && holds < compared, || format!("outcomes not mixed: {holds} of {compared} transversal"))?;
    Ok(format!("{compared} compared ({holds} transversal), {skipped} below margin, {drawn} drawn, 0 disagreements"))
}

/// Half the records get a rank-deficient epsilon block.
fn degrade_epsilon(nf: &mut PreNormalForm, rng: &mut ChaCha8Rng) {
    let k = nf.codim();
    match rng.gen_range(0..4) {
        0 => {
            for row in nf.epsilon_u_s.iter_mut() {
                row.iter_mut().for_each(|e| *e = c(0.0, 0.0));
            }
        }
        1 => {
            let base = nf.epsilon_u_s[0].clone();
            for u in 1..k {
                let t = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                nf.epsilon_u_s[u] = base.iter().map(|e| e * t).collect();
            }
        }
        _ => {}
    }
}

/// Local dimensions, C_1 dimensions and absence of higher order points.
fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let mut notes = Vec::new();
    for (m, n) in [(4, 5), (6, 7), (7, 8)] {
        let want = classify::expected_dimensions(m, n);
        let s1 = want.s_nu[0].ok_or("S_1 expected empty")?;
        let (mut npts, mut empty, mut c1dims) = (0, 0, Vec::new());
        for seed in 0..20u64 {
            let f = fixtures::c1_seeded(m, n, seed, 1e-2).map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts = Vec::new();
            for k in 0..8 {
                let s: Vec<f64> = (0..m).map(|_| if k == 0 { 0.0 } else { rng.gen_range(-0.1..0.1) }).collect();
                if let Ok(p) = locus::refine_singular(&f, &s, RefineOptions::default()) {
                    locus::push_unique(&mut pts, p);
                }
            }
            // a perturbed degenerate point may leave no real singular point nearby
            empty += usize::from(pts.is_empty());
            for p in &pts {
                check(p.order == 1, || format!("({m},{n}) seed {seed}: order {} point", p.order))?;
                let d = locus::local_dimension_estimate(&f, p).map_err(|e| e.to_string())?;
                check(d == s1, || format!("({m},{n}) seed {seed}: local dimension {d}, expected {s1}"))?;
                if let Some(cp) = locus::locate_c1(&f, &p.location, 1e-9, 60).map_err(|e| e.to_string())? {
                    c1dims.push(cp.dimension);
                }
            }
            npts += pts.len();
        }
        check(npts > 0, || format!("({m},{n}): no point refined for any seed"))?;
        match want.c1 {
            None => check(c1dims.is_empty(), || format!("({m},{n}): C1 points {c1dims:?} where none expected"))?,
            Some(d) => check(!c1dims.is_empty() && c1dims.iter().all(|&x| x == d), || format!("({m},{n}): C1 dims {c1dims:?}, expected {d}"))?,
        }
        notes.push(format!("({m},{n}) {npts} pts dim {s1} ({empty} seeds empty), C1 {}", want.c1.map_or("empty".to_string(), |d| format!("dim {d} x{}", c1dims.len()))));
    }
    Ok(format!("{}, {:.1?}", notes.join("; "), t0.elapsed()))
}

/// Exact psi targets and end-to-end repair of a degenerate fixture.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (m, n) = [(4, 5), (6, 7), (7, 8), (7, 9)][rng.gen_range(0..4)];
        let nf = PreNormalForm::random(m, n, 1.0, &mut rng).map_err(|e| e.to_string())?;
        let k = nf.codim();
        let t = RMat::from_fn(2 * k, 2, |_, _| rng.gen_range(-2.0..2.0));
        let q = perturb::solve_psi_target(&nf, &t).map_err(|e| e.to_string())?;
        worst = worst.max((perturb::psi_matrix(&nf, &q) - t).amax());
    }
    check(worst <= 1e-12, || format!("psi residual {worst:e}"))?;
    let mut notes = Vec::new();
    for b in ["degenerate(4,5,2)", "degenerate(7,8,2)"] {
        let f = to_embedding(&parse_spec(b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let opts = PipelineOptions {
            grid: 2,
            radius: 0.0,
            max_seeds: 1,
            repair: true,
            audit_starts: 0,
            ..PipelineOptions::default()
        };
        let r = run_pipeline(&f, &opts).map_err(|e| e.to_string())?;
        let rep = r.repairs.first().ok_or_else(|| format!("{b}: nothing repaired"))?;
        check(rep.before.webster.class == 0, || format!("{b}: fixture not degenerate"))?;
        check(rep.after.webster.class == 2 && rep.after.webster.margin >= 1e-3, || {
            format!("{b}: after repair class {} margin {:e}", rep.after.webster.class, rep.after.webster.margin)
        })?;
        check(rep.predicted_webster == rep.after.webster.class, || format!("{b}: prediction differs from re-extraction"))?;
        notes.push(format!("{b} -> W2 margin {:.2}", rep.after.webster.margin));
    }
    Ok(format!("50 targets, residual {worst:.1e}; {}", notes.join(", ")))
}

fn bishop_record(gamma: f64) -> PreNormalForm {
    let mut nf = PreNormalForm::zero(2, 2).expect("valid dimensions");
    nf.beta_u[0] = 1.0;
    nf.gamma_u[0] = c(gamma, 0.0);
    nf
}

/// Bishop family: elliptic/hyperbolic rank 2, parabolic rank 1, margins.
fn criterion_6() -> Outcome {
    for (g, want) in [(0.0, 2), (0.25, 2), (0.5, 1), (0.75, 2), (2.0, 2)] {
        let rec = classify::webster_class(&bishop_record(g)).map_err(|e| e.to_string())?;
        check(rec.class == want, || format!("record gamma {g}: rank {}", rec.class))?;
        check(!rec.indeterminate, || format!("record gamma {g}: indeterminate"))?;
        let f = fixtures::bishop(g).map_err(|e| e.to_string())?;
        let nf = normal_form::normal_form_at(&f, &[0.0, 0.0]).map_err(|e| e.to_string())?.coefficients;
        let surf = classify::webster_class(&nf).map_err(|e| e.to_string())?;
        check(surf.class == want, || format!("surface gamma {g}: rank {}", surf.class))?;
    }
    let below: Vec<f64> = (0..20).map(|i| 0.3 + 0.0099 * i as f64).collect();
    let above: Vec<f64> = (0..20).map(|i| 0.7 - 0.0099 * i as f64).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for side in [below, above] {
        let mut prev = f64::INFINITY;
        for g in side {
            let r = classify::webster_class(&bishop_record(g)).map_err(|e| e.to_string())?;
            check(r.class == 2, || format!("gamma {g}: rank {}", r.class))?;
            check(r.margin < prev, || format!("gamma {g}: margin not decreasing toward 0.5"))?;
            prev = r.margin;
            let ratio = r.margin / (4.0 * g * g - 1.0).abs();
            check((0.1..=10.0).contains(&ratio), || format!("gamma {g}: margin/|4g^2-1| = {ratio}"))?;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok(format!("classes match, margin/|4g^2-1| in [{lo:.2}, {hi:.2}] on 0.3..0.7"))
}

/// Three independent tangent vectors after steering.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ok, mut rejected, mut worst) = (0, 0, f64::INFINITY);
    while ok < 50 {
        let r = RMat::from_fn(6, 7, |_, _| rng.gen_range(-1.0..1.0));
        match perturb::steer_tangent(&r, 1e-2) {
            Ok(s) => {
                ok += 1;
                worst = worst.min(s.independence);
            }
            Err(crsing::Error::MinorVanishes { .. }) => rejected += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    check(worst >= 1e-6, || format!("smallest singular value {worst:e}"))?;
    Ok(format!("50 matrices ({rejected} inadmissible skipped), min sigma {worst:.2e}"))
}

fn rand_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Certificates re-verify; circle center never separated; finite sets are.
fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut separated = 0;
    for i in 0..1000 {
        let n = rng.gen_range(1..=2);
        let k = rng.gen_range(1..=10);
        let samples: Vec<_> = (0..k).map(|_| rand_point(&mut rng, n)).collect();
        let q = rand_point(&mut rng, n);
        let d = rng.gen_range(1..=3);
        let cert = hull::separation_lp(&HullProblem::new(samples.clone(), q.clone(), d)).map_err(|e| format!("instance {i}: {e}"))?;
        if cert.status == HullStatus::Separated {
            separated += 1;
            check(cert.verify(&samples, &q) && cert.value_at_query > cert.sup_on_samples, || format!("instance {i}: certificate fails"))?;
        }
    }
    let circle: Vec<Vec<Complex64>> = (0..64)
        .map(|j| vec![Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 64.0)])
        .collect();
    for d in 1..=10 {
        let cert = hull::separation_lp(&HullProblem::new(circle.clone(), vec![c(0.0, 0.0)], d)).map_err(|e| e.to_string())?;
        check(cert.status == HullStatus::NotSeparated, || format!("circle center separated at degree {d}"))?;
    }
    let mut max_d = 0;
    for i in 0..60 {
        let n = 1 + i % 2;
        let k = rng.gen_range(1..=5);
        let samples: Vec<_> = (0..k).map(|_| rand_point(&mut rng, n)).collect();
        let q = rand_point(&mut rng, n);
        let hit = (1..=k).find(|&d| {
            hull::separation_lp(&HullProblem::new(samples.clone(), q.clone(), d)).is_ok_and(|c| c.status == HullStatus::Separated)
        });
        let d = hit.ok_or_else(|| format!("finite set {i} (|K| = {k}) not separated"))?;
        max_d = max_d.max(d);
    }
    within(t0, Duration::from_secs(300), "hull instances")?;
    Ok(format!("1000 instances ({separated} separated, all verified), circle NotSeparated d<=10, 60 finite sets by d<={max_d}, {:.1?}", t0.elapsed()))
}

fn rand_jet(sp: &std::sync::Arc<JetSpace>, rng: &mut ChaCha8Rng, constant: bool) -> Jet {
    let coeffs = (0..sp.len())
        .map(|i| {
            if i == 0 && !constant {
                c(0.0, 0.0)
            } else {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    Jet::from_coeffs(sp, coeffs).expect("length matches the space")
}

/// Randomized jet algebra checks.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut checks, mut worst) = (0usize, 0.0f64);
    while checks < 10_000 {
        let nv = rng.gen_range(1..=3);
        let sp = JetSpace::new(nv, rng.gen_range(1..=3));
        let (a, b, cc) = (rand_jet(&sp, &mut rng, true), rand_jet(&sp, &mut rng, true), rand_jet(&sp, &mut rng, true));
        worst = worst.max((&(&a * &b) * &cc).max_abs_diff(&(&a * &(&b * &cc))));
        let g = JetMap::new(&sp, (0..nv).map(|_| rand_jet(&sp, &mut rng, false)).collect()).map_err(|e| e.to_string())?;
        let h = JetMap::new(&sp, (0..nv).map(|_| rand_jet(&sp, &mut rng, false)).collect()).map_err(|e| e.to_string())?;
        let l = a.compose(&g.compose(&h).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let r = a.compose(&g).map_err(|e| e.to_string())?.compose(&h).map_err(|e| e.to_string())?;
        worst = worst.max(l.max_abs_diff(&r));
        // graph inversion: (1+i) x_j plus nonlinear terms, inverted on real parts
        let comps = (0..nv)
            .map(|j| {
                let mut nl = rand_jet(&sp, &mut rng, false).scale_real(0.3);
                for v in 0..nv {
                    nl.coeffs_mut()[sp.linear_index(v)] = c(0.0, 0.0);
                }
                &(&Jet::variable(&sp, j) * c(1.0, 1.0)) + &nl
            })
            .collect();
        let f = JetMap::new(&sp, comps).map_err(|e| e.to_string())?;
        let sel: Vec<usize> = (0..nv).map(|j| 2 * j).collect();
        let phi = f.graph_invert(&sel).map_err(|e| e.to_string())?;
        let fg = f.compose(&phi).map_err(|e| e.to_string())?;
        for j in 0..nv {
            worst = worst.max(fg.component(j).re().max_abs_diff(&Jet::variable(&sp, j)));
        }
        checks += 3;
    }
    check(worst <= 1e-10, || format!("max residual {worst:e}"))?;
    Ok(format!("{checks} checks, max residual {worst:.1e}"))
}

fn main() {
    // cargo test passes libtest flags; listing must not run anything
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (i, f) in criteria {
        let t0 = Instant::now();
        match f() {
            Ok(msg) => println!("criterion {i}: PASS ({msg}) [{:.1?}]", t0.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("criterion {i}: FAIL ({msg}) [{:.1?}]", t0.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
