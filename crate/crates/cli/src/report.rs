//! Serializable report records. Field order is the declaration order.

use crsing::classify::{C1System, ClassificationReport, ExpectedDimensions, RankClass};
use crsing::hull::{HullCertificate, HullStatus};
use crsing::linalg::{RMat, RankResult, RankTest};
use crsing::normal_form::PreNormalForm;
use crsing::Complex64;
use serde::Serialize;

pub type Cx = [f64; 2];

pub fn cx(z: Complex64) -> Cx {
    [z.re, z.im]
}

pub fn cxs(v: &[Complex64]) -> Vec<Cx> {
    v.iter().copied().map(cx).collect()
}

fn cxss(v: &[Vec<Complex64>]) -> Vec<Vec<Cx>> {
    v.iter().map(|r| cxs(r)).collect()
}

pub fn rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RankDto {
    pub rank: usize,
    pub margin: f64,
    pub indeterminate: bool,
    pub singular_values: Vec<f64>,
}

impl From<&RankResult> for RankDto {
    fn from(r: &RankResult) -> Self {
        RankDto {
            rank: r.rank,
            margin: r.margin,
            indeterminate: r.is_indeterminate(),
            singular_values: r.singular_values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TestDto {
    pub holds: bool,
    pub margin: f64,
    pub indeterminate: bool,
    pub rank: RankDto,
}

impl From<&RankTest> for TestDto {
    fn from(t: &RankTest) -> Self {
        TestDto {
            holds: t.holds,
            margin: t.margin,
            indeterminate: t.indeterminate,
            rank: (&t.rank).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassDto {
    pub class: usize,
    pub margin: f64,
    pub indeterminate: bool,
    pub singular_values: Vec<f64>,
}

impl From<&RankClass> for ClassDto {
    fn from(c: &RankClass) -> Self {
        ClassDto {
            class: c.class,
            margin: c.margin,
            indeterminate: c.indeterminate,
            singular_values: c.rank.singular_values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormDto {
    pub beta_s: Vec<f64>,
    pub mu_s: Vec<Cx>,
    pub lambda_s_t: Vec<Vec<f64>>,
    pub beta_u: Vec<f64>,
    pub gamma_u: Vec<Cx>,
    pub epsilon_u_s: Vec<Vec<Cx>>,
    pub kappa_u: Vec<Cx>,
    pub theta_u: Vec<Cx>,
    pub pi_u: Vec<Cx>,
    pub phi_u_s: Vec<Vec<Cx>>,
    pub psi_u_s: Vec<Vec<Cx>>,
    pub sigma_u_st: Vec<Vec<Vec<Cx>>>,
}

impl From<&PreNormalForm> for NormalFormDto {
    fn from(nf: &PreNormalForm) -> Self {
        NormalFormDto {
            beta_s: nf.beta_s.clone(),
            mu_s: cxs(&nf.mu_s),
            lambda_s_t: nf.lambda_s_t.clone(),
            beta_u: nf.beta_u.clone(),
            gamma_u: cxs(&nf.gamma_u),
            epsilon_u_s: cxss(&nf.epsilon_u_s),
            kappa_u: cxs(&nf.kappa_u),
            theta_u: cxs(&nf.theta_u),
            pi_u: cxs(&nf.pi_u),
            phi_u_s: cxss(&nf.phi_u_s),
            psi_u_s: cxss(&nf.psi_u_s),
            sigma_u_st: nf.sigma_u_st.iter().map(|s| cxss(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectedDto {
    pub s_nu: Vec<Option<usize>>,
    pub w0: Option<usize>,
    pub w1: Option<usize>,
    pub c1: Option<usize>,
    pub case_label: Option<String>,
}

impl From<&ExpectedDimensions> for ExpectedDto {
    fn from(e: &ExpectedDimensions) -> Self {
        ExpectedDto {
            s_nu: e.s_nu.clone(),
            w0: e.w0,
            w1: e.w1,
            c1: e.c1,
            case_label: e.case_label.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationDto {
    pub stratum: String,
    pub transversal: TestDto,
    pub webster: ClassDto,
    pub coffman: ClassDto,
    pub coffman_second: Option<TestDto>,
    pub psi_matrix: Vec<Vec<f64>>,
}

impl From<&ClassificationReport> for ClassificationDto {
    fn from(r: &ClassificationReport) -> Self {
        ClassificationDto {
            stratum: r.stratum.clone(),
            transversal: (&r.transversal).into(),
            webster: (&r.webster).into(),
            coffman: (&r.coffman).into(),
            coffman_second: r.coffman_second.as_ref().map(Into::into),
            psi_matrix: rows(&r.psi_matrix),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct C1Dto {
    pub tilde_beta: Vec<Cx>,
    pub tilde_gamma: Vec<Cx>,
    pub tilde_epsilon: Vec<Vec<Cx>>,
    pub psi_transversal: TestDto,
}

impl From<&C1System> for C1Dto {
    fn from(s: &C1System) -> Self {
        C1Dto {
            tilde_beta: cxs(&s.tilde_beta),
            tilde_gamma: cxs(&s.tilde_gamma),
            tilde_epsilon: cxss(&s.tilde_epsilon),
            psi_transversal: (&s.psi_transversal).into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub location: Vec<f64>,
    pub order: usize,
    pub residual: f64,
    pub local_dimension: Option<usize>,
    pub normal_form: Option<NormalFormDto>,
    pub classification: Option<ClassificationDto>,
    pub c1: Option<C1Dto>,
}

#[derive(Debug, Clone, Serialize)]
pub struct C1PointDto {
    pub location: Vec<f64>,
    pub residual: f64,
    pub dimension: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub expected: ExpectedDto,
    /// Every order-1 point has local dimension equal to dim S_1.
    pub s1_consistent: bool,
    pub c1_points: Vec<C1PointDto>,
    /// Observed C_1 dimensions match (and C_1 is unseen when expected empty).
    pub c1_consistent: bool,
    pub higher_order_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassPair {
    pub webster: ClassDto,
    pub coffman: ClassDto,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairReport {
    pub point: usize,
    pub target: String,
    pub b: Vec<Cx>,
    pub c: Vec<Cx>,
    pub norm: f64,
    pub before: ClassPair,
    pub predicted_webster: usize,
    /// Classes re-extracted from the perturbed embedding (normalized chart).
    pub after: ClassPair,
    pub location_shift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateDto {
    pub status: String,
    pub verified: bool,
    pub value_at_query: f64,
    pub sup_on_samples: f64,
    pub lp_value: f64,
    pub scale: Vec<f64>,
    pub monomials: Vec<Vec<u32>>,
    pub coefficients: Vec<Cx>,
}

pub fn status_name(s: HullStatus) -> &'static str {
    match s {
        HullStatus::Separated => "separated",
        HullStatus::NotSeparated => "not_separated",
    }
}

impl CertificateDto {
    pub fn new(cert: &HullCertificate, verified: bool) -> Self {
        CertificateDto {
            status: status_name(cert.status).to_string(),
            verified,
            value_at_query: cert.value_at_query,
            sup_on_samples: cert.sup_on_samples,
            lp_value: cert.lp_value,
            scale: cert.scale.clone(),
            monomials: cert.monomials.clone(),
            coefficients: cxs(&cert.coefficients),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub point: usize,
    pub degree: usize,
    pub radius: f64,
    pub samples: usize,
    pub certificate: CertificateDto,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsDto {
    pub tol: f64,
    pub grid: usize,
    pub radius: f64,
    pub max_seeds: usize,
    pub seed: u64,
    pub repair: bool,
    pub repair_epsilon: f64,
    pub degree: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub label: Option<String>,
    pub m: usize,
    pub n: usize,
    pub options: OptionsDto,
    pub points: Vec<PointReport>,
    pub audit: Option<AuditSummary>,
    pub repairs: Vec<RepairReport>,
    pub probes: Vec<ProbeReport>,
    /// Every rank decision that fell inside its indeterminate band.
    pub indeterminate: Vec<String>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// CSV with a header row: index, order, coordinates.
    pub fn points_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string(), "order".to_string()];
        header.extend(crate::spec::default_variables(self.m, false));
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut rec = vec![i.to_string(), p.order.to_string()];
            rec.extend(p.location.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
