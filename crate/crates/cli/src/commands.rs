use std::time::Instant;

use radon_hgf::characters::{branch_cut_blocks, chi_lambda};
use radon_hgf::grassmann::z_lambda_member;
use radon_hgf::hgs::{check_all_pairs, RadonFunction, StencilPlan};
use radon_hgf::integrands::{FamilyTag, NamedFamily};
use radon_hgf::integrator::{
    integrate_haar_mc, integrate_invariant, integrate_r1_family, radon_hgf, Budget, IntegralEstimate, IntegratorError,
    Method,
};
use radon_hgf::jordan::theta_symbolic;
use radon_hgf::normal_form::reduce;
use radon_hgf::numeric::{CMatrix, Cplx, RandomStream};
use radon_hgf::oracles::{beta_r_closed, gamma_r_closed};
use radon_hgf::suite::{self, classical_grid, classical_points, covariance_check, SuiteLevel, CLASSICAL_TOL};
use serde_json::{json, Value};

use crate::args::*;
use crate::input::{self, ElementJson, MatrixList};
use crate::CliError;

/// Results and overall pass flag of one command.
pub type Outcome = Result<(Value, bool), CliError>;

fn c(x: f64) -> Cplx {
    Cplx::new(x, 0.0)
}

fn rel(a: Cplx, b: Cplx) -> f64 {
    (a - b).norm() / b.norm()
}

/// Non-convergence is a failed computation; everything else is bad input.
fn integration<T>(r: Result<T, IntegratorError>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        IntegratorError::NonConvergent { .. } => CliError::failed(e.to_string()),
        other => CliError::from_error(other),
    })
}

pub fn run(cmd: &Command, seed: u64) -> Outcome {
    match cmd {
        Command::Theta(a) => theta(a),
        Command::Chi(a) => chi(a),
        Command::Zcheck(a) => zcheck(a),
        Command::NormalForm(a) => normal_form(a),
        Command::Eval(a) => eval(a, seed),
        Command::Radon(a) => radon(a, seed),
        Command::VerifyGamma(a) => verify_gamma(a),
        Command::VerifyBeta(a) => verify_beta(a),
        Command::VerifyClassical(a) => verify_classical(a),
        Command::VerifyCovariance(a) => verify_covariance(a, seed),
        Command::VerifyPde(a) => verify_pde(a, seed),
        Command::Suite(a) => run_suite(a, seed),
    }
}

fn theta(a: &ThetaArgs) -> Outcome {
    let polys = theta_symbolic(a.p).map_err(CliError::from_error)?;
    let rendered: Vec<String> = polys.iter().map(|t| if a.latex { t.to_latex() } else { t.to_text() }).collect();
    Ok((json!({ "p": a.p, "format": if a.latex { "latex" } else { "text" }, "theta": rendered }), true))
}

fn chi(a: &ChiArgs) -> Outcome {
    let h = input::read_json::<ElementJson>(&a.element_json)?.into_element()?;
    let pw = input::weight(&a.partition, &a.weight, h.r())?;
    if h.partition() != a.partition {
        return Err(CliError::input(format!("element has block sizes {:?}, partition is {:?}", h.partition(), a.partition)));
    }
    let value = chi_lambda(&h, &pw).map_err(CliError::from_error)?;
    let leading: Vec<CMatrix> = h.blocks().iter().map(|b| b.coeff(0).clone()).collect();
    Ok((json!({ "value": value, "branch_cut_blocks": branch_cut_blocks(&leading) }), true))
}

fn zcheck(a: &ZcheckArgs) -> Outcome {
    let z = input::coord_matrix(&a.partition, &a.z_json, a.r)?;
    let m = z_lambda_member(&z).map_err(CliError::from_error)?;
    Ok((json!({ "member": m.member, "failing": m.failing }), true))
}

fn normal_form(a: &NormalFormArgs) -> Outcome {
    let z = input::coord_matrix(&a.partition, &a.z_json, a.r)?;
    let res = reduce(&z, a.variant).map_err(CliError::from_error)?;
    Ok((
        json!({
            "g": res.g,
            "h": ElementJson::from_element(&res.h),
            "x": res.x,
            "form_id": res.form_id,
            "form_label": res.form_id.to_string(),
            "residual": res.residual,
        }),
        true,
    ))
}

fn need(v: Option<f64>, name: &str, family: FamilyTag) -> Result<Cplx, CliError> {
    v.map(c).ok_or_else(|| CliError::input(format!("--{name} is required for {family}")))
}

fn family(a: &EvalArgs) -> Result<NamedFamily, CliError> {
    let tag: FamilyTag = a.family.parse().map_err(CliError::input)?;
    let xs = match &a.x_json {
        Some(p) => input::read_json::<MatrixList>(p)?.into_vec(),
        None => Vec::new(),
    };
    let one_x = || -> Result<CMatrix, CliError> {
        match xs.as_slice() {
            [x] => Ok(x.clone()),
            _ => Err(CliError::input(format!("--X-json must hold one {0}×{0} matrix for {tag}", a.r))),
        }
    };
    let b_one = || -> Result<Cplx, CliError> {
        match a.b.as_deref() {
            Some([b]) => Ok(c(*b)),
            _ => Err(CliError::input(format!("--b takes one value for {tag}"))),
        }
    };
    let r = a.r;
    let f = match tag {
        FamilyTag::BetaR => NamedFamily::beta_r(r, need(a.a, "a", tag)?, b_one()?),
        FamilyTag::GammaR => NamedFamily::gamma_r(r, need(a.a, "a", tag)?),
        FamilyTag::GaussianR => NamedFamily::gaussian_r(r),
        FamilyTag::Gauss => NamedFamily::gauss(r, need(a.a, "a", tag)?, b_one()?, need(a.c, "c", tag)?, one_x()?),
        FamilyTag::Kummer => NamedFamily::kummer(r, need(a.a, "a", tag)?, need(a.c, "c", tag)?, one_x()?),
        FamilyTag::Bessel => NamedFamily::bessel(r, need(a.c, "c", tag)?, one_x()?),
        FamilyTag::HermiteWeber => NamedFamily::hermite_weber(r, need(a.c, "c", tag)?, one_x()?),
        FamilyTag::Airy => NamedFamily::airy(r, one_x()?),
        FamilyTag::LauricellaFd => {
            let b: Vec<Cplx> = a.b.as_deref().unwrap_or_default().iter().map(|&v| c(v)).collect();
            NamedFamily::lauricella_fd(r, need(a.a, "a", tag)?, b, need(a.c, "c", tag)?, xs.clone())
        }
    };
    f.map_err(CliError::from_error)
}

fn estimate_family(f: &NamedFamily, chain: Option<&str>, budget: &Budget) -> Result<IntegralEstimate, CliError> {
    let chain = input::chain(chain, f.r)?;
    let method = budget.method.unwrap_or(if f.r == 1 {
        Method::Adaptive1d
    } else if f.is_invariant() {
        Method::EigenTensor
    } else {
        Method::HaarMc
    });
    match method {
        Method::Adaptive1d if f.r == 1 => integration(integrate_r1_family(f, chain, budget.tol)),
        Method::EigenTensor => integration(integrate_invariant(f, budget.nodes)),
        Method::HaarMc => integration(integrate_haar_mc(f, budget.samples, &RandomStream::new(budget.seed))),
        other => Err(CliError::input(format!("method {other:?} is not available here for r = {}", f.r))),
    }
}

fn eval(a: &EvalArgs, seed: u64) -> Outcome {
    let f = family(a)?;
    let budget = input::budget(&a.budget, seed)?;
    let est = estimate_family(&f, a.chain.as_deref(), &budget)?;
    let pref = f.euler_prefactor().map_err(CliError::from_error)?;
    let normalized = pref.map(|p| est.scaled(p));
    Ok((json!({ "family": f.tag.to_string(), "estimate": est, "euler_prefactor": pref, "normalized": normalized }), true))
}

fn radon(a: &RadonArgs, seed: u64) -> Outcome {
    let z = input::coord_matrix(&a.partition, &a.z_json, a.r)?;
    let pw = input::weight(&a.partition, &a.weight, z.r())?;
    let mut budget = input::budget(&a.budget, seed)?;
    budget.variant = a.variant;
    budget.fixed_rule = a.fixed_rule.as_deref().map(input::pair).transpose()?;
    let chain = input::chain(a.chain.as_deref(), z.r())?;
    let est = integration(radon_hgf(&z, &pw, chain, &budget))?;
    let form = reduce(&z, a.variant).map_err(CliError::from_error)?.form_id;
    Ok((json!({ "estimate": est, "normal_form": form.to_string() }), true))
}

fn verify_gamma(a: &VerifyGammaArgs) -> Outcome {
    let f = NamedFamily::gamma_r(a.r, c(a.a)).map_err(CliError::from_error)?;
    let est = integration(integrate_invariant(&f, a.nodes))?;
    let closed = gamma_r_closed(a.r, c(a.a)).map_err(CliError::from_error)?;
    let err = rel(est.value, closed);
    let pass = err < a.tol;
    Ok((json!({ "estimate": est, "closed_form": closed, "rel_err": err, "tolerance": a.tol, "pass": pass }), pass))
}

fn verify_beta(a: &VerifyBetaArgs) -> Outcome {
    let f = NamedFamily::beta_r(a.r, c(a.a), c(a.b)).map_err(CliError::from_error)?;
    let est = integration(integrate_invariant(&f, a.nodes))?;
    let closed = beta_r_closed(a.r, c(a.a), c(a.b)).map_err(CliError::from_error)?;
    let err = rel(est.value, closed);
    let pass = err < a.tol;
    Ok((json!({ "estimate": est, "closed_form": closed, "rel_err": err, "tolerance": a.tol, "pass": pass }), pass))
}

fn verify_classical(a: &VerifyClassicalArgs) -> Outcome {
    let xs = a.x.clone().unwrap_or_else(classical_grid);
    let pts = classical_points(a.a, a.b, a.c, &xs).map_err(|e| CliError::input(e.0))?;
    let max = pts.iter().map(|p| p.rel_err).fold(0.0, f64::max);
    let pass = max < CLASSICAL_TOL;
    let method = Method::Adaptive1d;
    Ok((json!({ "method": method, "points": pts, "max_rel_err": max, "tolerance": CLASSICAL_TOL, "pass": pass }), pass))
}

fn verify_covariance(a: &VerifyCovarianceArgs, seed: u64) -> Outcome {
    let z = input::coord_matrix(&a.partition, &a.z_json, Some(1))?;
    let pw = input::weight(&a.partition, &a.weight, 1)?;
    let rep = covariance_check(&pw, &z, a.trials, a.gl_trials, &mut RandomStream::new(seed)).map_err(|e| CliError::input(e.0))?;
    let pass = rep.pass();
    Ok((
        json!({
            "method": Method::Adaptive1d,
            "report": rep,
            "h_tolerance": suite::COVARIANCE_H_TOL,
            "gl_tolerance": suite::COVARIANCE_GL_TOL,
            "pass": pass,
        }),
        pass,
    ))
}

fn verify_pde(a: &VerifyPdeArgs, seed: u64) -> Outcome {
    let z = input::coord_matrix(&a.partition, &a.z_json, Some(a.r))?;
    let pw = input::weight(&a.partition, &a.weight, a.r)?;
    let budget = Budget { seed, fixed_rule: Some(input::pair(&a.fixed_rule)?), ..Budget::default() };
    let f = RadonFunction { pw, budget };
    let plan = StencilPlan { base: a.h, richardson: !a.no_richardson };
    let report = check_all_pairs(&f, z.matrix(), a.r, &plan, a.tol).map_err(|e| CliError::failed(e.to_string()))?;
    let pairs: Vec<Value> = report
        .pairs
        .iter()
        .map(|p| json!({ "I": p.pair.i, "J": p.pair.j, "residual": p.residual, "scale": p.scale, "relative": p.relative() }))
        .collect();
    Ok((json!({ "pairs": pairs, "max_relative": report.max_relative, "tolerance": a.tol, "pass": report.pass }), report.pass))
}

fn run_suite(a: &SuiteArgs, seed: u64) -> Outcome {
    let level: SuiteLevel = a.level.parse().map_err(CliError::input)?;
    let ids = a.only.clone().unwrap_or_else(|| (1..=suite::CRITERIA).collect());
    if let Some(bad) = ids.iter().find(|&&id| suite::title(id).is_none()) {
        return Err(CliError::input(format!("no criterion {bad} (valid: 1..={})", suite::CRITERIA)));
    }
    let start = Instant::now();
    let criteria: Vec<_> = ids.iter().map(|&id| suite::run_criterion(id, level, seed)).collect();
    for rep in &criteria {
        eprintln!("{rep}");
    }
    let pass = criteria.iter().all(|r| r.pass);
    Ok((json!({ "level": level, "criteria": criteria, "suite_time_s": start.elapsed().as_secs_f64(), "pass": pass }), pass))
}
