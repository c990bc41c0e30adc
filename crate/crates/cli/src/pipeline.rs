//! locate -> normalize -> classify -> audit -> repair -> probe.

use std::fmt;

use crsing::classify::{self, ClassificationReport};
use crsing::embedding::EmbeddingMap;
use crsing::hull::{self, HullProblem};
use crsing::locus::{self, RefineOptions, SingularPoint};
use crsing::normal_form::{self, NormalFormResult};
use crsing::perturb::{self, RepairTarget};
use crsing::poly::Polynomial;
use crsing::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Locate,
    Normalize,
    Classify,
    Audit,
    Repair,
    Probe,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Locate => "locate",
            Stage::Normalize => "normalize",
            Stage::Classify => "classify",
            Stage::Audit => "audit",
            Stage::Repair => "repair",
            Stage::Probe => "probe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage{}: {source}", point.map(|p| format!(" (point {p})")).unwrap_or_default())]
pub struct PipelineError {
    pub stage: Stage,
    pub point: Option<usize>,
    pub source: crsing::Error,
}

fn tag(stage: Stage, point: Option<usize>) -> impl Fn(crsing::Error) -> PipelineError {
    move |source| PipelineError { stage, point, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Locate,
    Classify,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub tol: f64,
    pub grid: usize,
    /// Search box is [-radius, radius]^m.
    pub radius: f64,
    pub max_seeds: usize,
    pub seed: u64,
    pub repair: bool,
    pub repair_epsilon: f64,
    /// Hull probe degree; no probe when `None`.
    pub degree: Option<usize>,
    pub probe_radius: f64,
    pub probe_samples: usize,
    /// Extra random starts per point for the C_1 search.
    pub audit_starts: usize,
    pub depth: Depth,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            tol: 1e-10,
            grid: 7,
            radius: 0.5,
            max_seeds: 40,
            seed: 0,
            repair: false,
            repair_epsilon: 0.1,
            degree: None,
            probe_radius: 0.1,
            probe_samples: 48,
            audit_starts: 2,
            depth: Depth::Full,
        }
    }
}

struct Analyzed {
    point: SingularPoint,
    nf: Option<NormalFormResult>,
    class: Option<ClassificationReport>,
}

fn note_test(out: &mut Vec<String>, what: String, indeterminate: bool) {
    if indeterminate {
        out.push(what);
    }
}

/// Ambient polynomial map of the normalizing holomorphic change, applied
/// to the adapted embedding: the chart in which the record is read off.
pub fn normalized_embedding(f: &EmbeddingMap, nf: &NormalFormResult) -> crsing::Result<EmbeddingMap> {
    let fa = nf.frame.apply(f)?;
    let h = nf.graph.total_transformation();
    if h.is_identity(1e-15) {
        return Ok(fa);
    }
    let comps = h
        .jets()
        .components()
        .iter()
        .map(|j| Polynomial::from_jet(j).pruned(1e-15).compose(fa.components()).map(|p| p.pruned(1e-15)))
        .collect::<crsing::Result<Vec<_>>>()?;
    fa.with_components(comps)
}

fn class_pair(nf: &crsing::normal_form::PreNormalForm) -> crsing::Result<ClassPair> {
    Ok(ClassPair {
        webster: (&classify::webster_class(nf)?).into(),
        coffman: (&classify::coffman_class(nf)?).into(),
    })
}

fn options_dto(o: &PipelineOptions) -> OptionsDto {
    OptionsDto {
        tol: o.tol,
        grid: o.grid,
        radius: o.radius,
        max_seeds: o.max_seeds,
        seed: o.seed,
        repair: o.repair,
        repair_epsilon: o.repair_epsilon,
        degree: o.degree,
    }
}

/// Deterministic for fixed (f, options).
pub fn run_pipeline(f: &EmbeddingMap, opts: &PipelineOptions) -> Result<AnalysisReport, PipelineError> {
    let m = f.m();
    let mut indeterminate = Vec::new();

    // locate
    let bbox = vec![(-opts.radius, opts.radius); m];
    let refine = RefineOptions {
        tol: opts.tol,
        ..RefineOptions::default()
    };
    let located = locus::locate_singular(f, &bbox, opts.grid, opts.max_seeds, refine).map_err(tag(Stage::Locate, None))?;

    // normalize + classify (order-1 points only)
    let mut analyzed = Vec::with_capacity(located.len());
    for (i, p) in located.into_iter().enumerate() {
        if p.order != 1 || opts.depth == Depth::Locate {
            analyzed.push(Analyzed { point: p, nf: None, class: None });
            continue;
        }
        let nf = normal_form::normal_form_at(f, &p.location).map_err(tag(Stage::Normalize, Some(i)))?;
        let class = classify::classify(&nf.coefficients).map_err(tag(Stage::Classify, Some(i)))?;
        note_test(&mut indeterminate, format!("point {i}: transversal"), class.transversal.indeterminate);
        note_test(&mut indeterminate, format!("point {i}: webster"), class.webster.indeterminate);
        note_test(&mut indeterminate, format!("point {i}: coffman"), class.coffman.indeterminate);
        if let Some(t) = &class.coffman_second {
            note_test(&mut indeterminate, format!("point {i}: coffman_second"), t.indeterminate);
        }
        analyzed.push(Analyzed {
            point: p,
            nf: Some(nf),
            class: Some(class),
        });
    }

    let mut points = Vec::with_capacity(analyzed.len());
    for (i, a) in analyzed.iter().enumerate() {
        let mut c1 = None;
        if let (Some(nf), Some(cls)) = (&a.nf, &a.class) {
            if cls.coffman.class == 1 {
                let sys = classify::c1_system(&nf.coefficients).map_err(tag(Stage::Classify, Some(i)))?;
                note_test(&mut indeterminate, format!("point {i}: c1_transversal"), sys.psi_transversal.indeterminate);
                c1 = Some((&sys).into());
            }
        }
        let local_dimension = if opts.depth == Depth::Full && a.point.order == 1 {
            Some(locus::local_dimension_estimate(f, &a.point).map_err(tag(Stage::Audit, Some(i)))?)
        } else {
            None
        };
        points.push(PointReport {
            location: a.point.location.clone(),
            order: a.point.order,
            residual: a.point.residual,
            local_dimension,
            normal_form: a.nf.as_ref().map(|n| (&n.coefficients).into()),
            classification: a.class.as_ref().map(Into::into),
            c1,
        });
    }

    let mut report = AnalysisReport {
        tool: "crsing".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        label: f.label().map(str::to_string),
        m,
        n: f.n(),
        options: options_dto(opts),
        points,
        audit: None,
        repairs: Vec::new(),
        probes: Vec::new(),
        indeterminate: Vec::new(),
    };
    if opts.depth != Depth::Full {
        report.indeterminate = indeterminate;
        return Ok(report);
    }

    report.audit = Some(audit(f, &analyzed, &report.points, opts)?);
    if opts.repair {
        for (i, a) in analyzed.iter().enumerate() {
            if let Some(r) = repair_point(f, i, a, opts)? {
                note_test(&mut indeterminate, format!("repair {i}: webster"), r.after.webster.indeterminate);
                note_test(&mut indeterminate, format!("repair {i}: coffman"), r.after.coffman.indeterminate);
                report.repairs.push(r);
            }
        }
    }
    if let Some(d) = opts.degree {
        for (i, a) in analyzed.iter().enumerate() {
            report.probes.push(probe_point(f, i, &a.point, d, opts)?);
        }
    }
    report.indeterminate = indeterminate;
    Ok(report)
}

fn audit(
    f: &EmbeddingMap,
    analyzed: &[Analyzed],
    points: &[PointReport],
    opts: &PipelineOptions,
) -> Result<AuditSummary, PipelineError> {
    let expected = classify::expected_dimensions(f.m(), f.n());
    let s1 = expected.s_nu.first().copied().flatten();
    let s1_consistent = points.iter().filter(|p| p.order == 1).all(|p| p.local_dimension == s1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found: Vec<C1PointDto> = Vec::new();
    for (i, a) in analyzed.iter().enumerate().filter(|(_, a)| a.point.order == 1) {
        for k in 0..=opts.audit_starts {
            let start: Vec<f64> = a
                .point
                .location
                .iter()
                .map(|&v| if k == 0 { v } else { v + rng.gen_range(-0.05..0.05) })
                .collect();
            let hit = locus::locate_c1(f, &start, opts.tol, 60).map_err(tag(Stage::Audit, Some(i)))?;
            if let Some(cp) = hit {
                let dup = found.iter().any(|q| {
                    q.location.iter().zip(&cp.location).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt() <= 1e-6
                });
                if !dup {
                    found.push(C1PointDto {
                        location: cp.location,
                        residual: cp.residual,
                        dimension: cp.dimension,
                    });
                }
            }
        }
    }
    found.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap_or(std::cmp::Ordering::Equal));
    let c1_consistent = match expected.c1 {
        None => found.is_empty(),
        Some(d) => found.iter().all(|p| p.dimension == d),
    };
    Ok(AuditSummary {
        expected: (&expected).into(),
        s1_consistent,
        c1_points: found,
        c1_consistent,
        higher_order_points: points.iter().filter(|p| p.order >= 2).count(),
    })
}

fn repair_point(f: &EmbeddingMap, i: usize, a: &Analyzed, opts: &PipelineOptions) -> Result<Option<RepairReport>, PipelineError> {
    let (Some(nfr), Some(cls)) = (&a.nf, &a.class) else {
        return Ok(None);
    };
    let nf = &nfr.coefficients;
    let k = nf.codim();
    let target = if k >= 2 { RepairTarget::Coffman(2) } else { RepairTarget::Webster(2) };
    let done = match target {
        RepairTarget::Coffman(r) => cls.coffman.class >= r,
        RepairTarget::Webster(r) => cls.webster.class >= r,
    };
    if done {
        return Ok(None);
    }
    let err = tag(Stage::Repair, Some(i));
    let q = perturb::solve_nondegenerate_bc(nf, target, opts.repair_epsilon).map_err(&err)?;
    let predicted = crsing::linalg::numerical_rank_real(&perturb::psi_matrix(nf, &q), crsing::linalg::DEFAULT_RANK_TOL)
        .map_err(&err)?
        .rank;
    let chart = normalized_embedding(f, nfr).map_err(&err)?;
    let origin = vec![0.0; f.m()];
    let g = perturb::apply_quad_perturbation(&chart, &origin, &q).map_err(&err)?;
    let refine = RefineOptions {
        tol: opts.tol,
        ..RefineOptions::default()
    };
    let p = locus::refine_singular(&g, &origin, refine).map_err(&err)?;
    let after = normal_form::normal_form_at(&g, &p.location).map_err(&err)?.coefficients;
    Ok(Some(RepairReport {
        point: i,
        target: format!("{target:?}"),
        b: cxs(&q.b),
        c: cxs(&q.c),
        norm: q.norm(),
        before: class_pair(nf).map_err(&err)?,
        predicted_webster: predicted,
        after: class_pair(&after).map_err(&err)?,
        location_shift: p.location.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }))
}

fn probe_point(f: &EmbeddingMap, i: usize, p: &SingularPoint, degree: usize, opts: &PipelineOptions) -> Result<ProbeReport, PipelineError> {
    let err = tag(Stage::Probe, Some(i));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let m = f.m();
    let mut samples = Vec::with_capacity(opts.probe_samples);
    for _ in 0..opts.probe_samples {
        let d: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let x: Vec<f64> = p.location.iter().zip(&d).map(|(a, v)| a + opts.probe_radius * v / nrm).collect();
        samples.push(f.eval(&x).map_err(&err)?);
    }
    let query: Vec<Complex64> = f.eval(&p.location).map_err(&err)?;
    let cert = hull::separation_lp(&HullProblem::new(samples.clone(), query.clone(), degree)).map_err(&err)?;
    let verified = cert.verify(&samples, &query);
    Ok(ProbeReport {
        point: i,
        degree,
        radius: opts.probe_radius,
        samples: samples.len(),
        certificate: CertificateDto::new(&cert, verified),
    })
}
