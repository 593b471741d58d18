//! Command implementations and their on-disk artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gngs_core::constants::{
    quotient_extremality, ratio_identity_check, verify_gn_inequality, verify_sobolev_inequality,
    BestConstants,
};
use gngs_core::error::{Error, Result};
use gngs_core::exponents::{
    check_admissible, critical_exponent, gn_exponents, homogeneous_dimension, IndexSet,
};
use gngs_core::functionals::{Functionals, ProblemSpec};
use gngs_core::io::{load_field, save_field};
use gngs_core::rational::{format_rational, parse_rational, Rat};
use gngs_core::solver::{lambda_derivative_residual, solve_ground_state, GroundStateResult};

use crate::config::{Command, RunConfig};

/// Everything `solve` writes into report.json.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub environment: EnvironmentStamp,
    pub result: ResultSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnvironmentStamp {
    pub version: String,
    pub grid_points: Vec<usize>,
    pub grid_half_lengths: Vec<f64>,
    pub seed: u64,
    pub threads: usize,
    pub runtime_seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultSummary {
    pub d: f64,
    pub term_seminorms: Vec<f64>,
    pub lq_mass: f64,
    pub lp_mass: f64,
    pub el_residual: f64,
    pub nehari_residual: f64,
    pub pohozaev_residuals: Vec<f64>,
    pub lambda_residual: f64,
    pub iterations: usize,
    pub boundary_mass: f64,
    pub converged: bool,
    pub iteration_converged: bool,
    pub run_index: usize,
    pub multistart_energies: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConstantsSummary {
    pub a1: String,
    pub a2: String,
    pub p: String,
    pub q: String,
    pub q_hom: String,
    pub c_s_from_mass: f64,
    pub c_s_from_d: f64,
    pub c_gn_from_norm: f64,
    pub c_gn_from_d: f64,
    pub ratio_factor: f64,
    pub ratio_value: f64,
    pub ratio_residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub samples: usize,
    pub seed: u64,
    pub worst_gn_margin: f64,
    pub worst_sobolev_margin: f64,
    pub min_quotient_ratio: f64,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn constants_summary(bc: &BestConstants) -> ConstantsSummary {
    ConstantsSummary {
        a1: format_rational(&bc.indices.a1),
        a2: format_rational(&bc.indices.a2),
        p: format_rational(&bc.indices.p),
        q: format_rational(&bc.indices.q),
        q_hom: format_rational(&bc.q_hom),
        c_s_from_mass: bc.c_s_from_mass,
        c_s_from_d: bc.c_s_from_d,
        c_gn_from_norm: bc.c_gn_from_norm,
        c_gn_from_d: bc.c_gn_from_d,
        ratio_factor: bc.ratio_factor.value(),
        ratio_value: bc.ratio_value(),
        ratio_residual: ratio_identity_check(bc),
    }
}

fn constants_csv(summary: Option<&ConstantsSummary>, idx: &IndexSet, q_hom: Rat, d: f64) -> String {
    let mut csv = String::from(
        "a1,a2,p,q,Q,d,c_s_from_mass,c_s_from_d,c_gn_from_norm,c_gn_from_d,ratio_value,ratio_residual\n",
    );
    match summary {
        Some(s) => csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.a1,
            s.a2,
            s.p,
            s.q,
            s.q_hom,
            d,
            s.c_s_from_mass,
            s.c_s_from_d,
            s.c_gn_from_norm,
            s.c_gn_from_d,
            s.ratio_value,
            s.ratio_residual
        )),
        None => csv.push_str(&format!(
            "{},{},{},{},{},{},,,,,,\n",
            format_rational(&idx.a1),
            format_rational(&idx.a2),
            format_rational(&idx.p),
            format_rational(&idx.q),
            format_rational(&q_hom),
            d
        )),
    }
    csv
}

fn iterations_csv(res: &GroundStateResult) -> String {
    let mut csv = String::from("iter,energy,nehari_residual,el_residual,step\n");
    for rec in &res.trace {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.iter, rec.energy, rec.nehari_residual, rec.el_residual, rec.step
        ));
    }
    csv
}

/// Builds the best-constant block when the problem shape admits one
/// (two terms, zero-order second term).
fn try_constants(res: &GroundStateResult, ps: &ProblemSpec) -> Option<BestConstants> {
    BestConstants::from_result(res, ps).ok()
}

pub fn run_solve(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<()> {
    let started = std::time::Instant::now();
    let ps = cfg.problem_spec()?;
    let opts = cfg.solver_options(seed)?;
    let res = solve_ground_state(&ps, &opts)?;
    let lambda = lambda_derivative_residual(&ps, &res.phi)?;

    fs::create_dir_all(out_dir)?;
    save_field(&out_dir.join("phi.bin"), &res.phi, ps.weights())?;
    write_file(&out_dir.join("iterations.csv"), &iterations_csv(&res))?;

    let bc = try_constants(&res, &ps);
    let summary = bc.as_ref().map(constants_summary);
    write_file(
        &out_dir.join("constants.csv"),
        &constants_csv(summary.as_ref(), &ps.index_set(), ps.homogeneous_dimension(), res.d),
    )?;

    let samples = cfg.verify_samples();
    let verification = match &bc {
        Some(bc) if samples > 0 => Some(VerificationSummary {
            samples,
            seed,
            worst_gn_margin: verify_gn_inequality(&ps, bc.c_gn_from_norm, samples, seed)?,
            worst_sobolev_margin: verify_sobolev_inequality(&ps, bc.c_s_from_mass, samples, seed)?,
            min_quotient_ratio: quotient_extremality(&ps, &res.phi, samples, seed)?,
        }),
        _ => None,
    };

    let report = RunReport {
        config: cfg.clone_with_seed(seed, out_dir),
        environment: EnvironmentStamp {
            version: env!("CARGO_PKG_VERSION").to_string(),
            grid_points: ps.grid().points().to_vec(),
            grid_half_lengths: ps.grid().half_lengths().to_vec(),
            seed,
            threads: rayon::current_num_threads(),
            runtime_seconds: started.elapsed().as_secs_f64(),
        },
        result: ResultSummary {
            d: res.d,
            term_seminorms: res.term_seminorms.clone(),
            lq_mass: res.lq_mass,
            lp_mass: res.lp_mass,
            el_residual: res.el_residual,
            nehari_residual: res.nehari_residual,
            pohozaev_residuals: res.pohozaev_residuals.clone(),
            lambda_residual: lambda,
            iterations: res.iterations,
            boundary_mass: res.boundary_mass,
            converged: res.converged,
            iteration_converged: res.iteration_converged,
            run_index: res.run_index,
            multistart_energies: res.multistart_energies.clone(),
        },
        constants: summary,
        verification,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Format(format!("report encode: {e}")))?;
    write_file(&out_dir.join("report.json"), &json)?;
    Ok(())
}

pub fn run_exponents(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let ec = cfg
        .exponents
        .as_ref()
        .ok_or_else(|| Error::Format("config needs an `exponents` section".into()))?;
    let a1 = parse_rational(&ec.a1)?;
    let a2 = parse_rational(&ec.a2)?;
    let p = parse_rational(&ec.p)?;
    let qs: Vec<Rat> = ec
        .q
        .iter()
        .map(|s| parse_rational(s))
        .collect::<Result<_>>()?;

    let mut csv = String::from(
        "Q,a1,a2,p,q,critical_q_a1,critical_q_a2,admissible_strict,theta1,theta2\n",
    );
    for qh in &ec.hom_dims {
        let q_hom = homogeneous_dimension(&[parse_rational(qh)?])?;
        let crit1 = critical_exponent(q_hom, a1, p)
            .map(|r| format_rational(&r))
            .unwrap_or_default();
        let crit2 = critical_exponent(q_hom, a2, p)
            .map(|r| format_rational(&r))
            .unwrap_or_default();
        if qs.is_empty() {
            csv.push_str(&format!(
                "{},{},{},{},,{},{},,,\n",
                format_rational(&q_hom),
                format_rational(&a1),
                format_rational(&a2),
                format_rational(&p),
                crit1,
                crit2
            ));
            continue;
        }
        for q in &qs {
            let idx = IndexSet::new(a1, a2, p, *q);
            let verdict = check_admissible(&idx, q_hom, true);
            let (t1, t2) = match gn_exponents(&idx, q_hom) {
                Ok(e) => (format_rational(&e.theta1), format_rational(&e.theta2)),
                Err(_) => (String::new(), String::new()),
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                format_rational(&q_hom),
                format_rational(&a1),
                format_rational(&a2),
                format_rational(&p),
                format_rational(q),
                crit1,
                crit2,
                verdict.admissible,
                t1,
                t2
            ));
        }
    }
    fs::create_dir_all(out_dir)?;
    write_file(&out_dir.join("exponents.csv"), &csv)?;
    Ok(())
}

pub fn run_constants(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    let input = cfg
        .input_dir
        .as_ref()
        .ok_or_else(|| Error::Format("`constants` needs input_dir".into()))?;
    let ps = cfg.problem_spec()?;
    let (phi, weights) = load_field(&input.join("phi.bin"))?;
    if &weights != ps.weights() {
        return Err(Error::Format("snapshot weights disagree with the problem".into()));
    }
    let f = Functionals::new(&ps);
    let report = f.report(&phi)?;
    let res = synthetic_result(&phi, &report, &ps)?;
    let bc = BestConstants::from_result(&res, &ps)?;
    let summary = constants_summary(&bc);
    fs::create_dir_all(out_dir)?;
    write_file(
        &out_dir.join("constants.csv"),
        &constants_csv(Some(&summary), &ps.index_set(), ps.homogeneous_dimension(), res.d),
    )?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Format(format!("constants encode: {e}")))?;
    write_file(&out_dir.join("constants.json"), &json)?;
    Ok(())
}

/// Wraps a recomputed functional report in the result shape the constant
/// formulas take.
fn synthetic_result(
    phi: &gngs_core::grid::GridFunction,
    report: &gngs_core::functionals::FunctionalReport,
    ps: &ProblemSpec,
) -> Result<GroundStateResult> {
    Ok(GroundStateResult {
        phi: phi.clone(),
        d: report.energy,
        term_seminorms: report.term_seminorms.clone(),
        lq_mass: report.lq_mass,
        lp_mass: report.lp_mass,
        el_residual: f64::NAN,
        nehari_residual: report.nehari.abs()
            / report.term_seminorms.iter().sum::<f64>().max(f64::MIN_POSITIVE),
        pohozaev_residuals: gngs_core::solver::pohozaev_check(ps, phi)?,
        iterations: 0,
        boundary_mass: phi.boundary_mass(ps.p_f64(), 0.1),
        converged: false,
        iteration_converged: false,
        run_index: 0,
        multistart_energies: vec![],
        trace: vec![],
    })
}

pub fn run_verify(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<()> {
    let input = cfg
        .input_dir
        .as_ref()
        .ok_or_else(|| Error::Format("`verify` needs input_dir".into()))?;
    let report_json = fs::read_to_string(input.join("report.json"))?;
    let report: RunReport = serde_json::from_str(&report_json)
        .map_err(|e| Error::Format(format!("report parse: {e}")))?;
    let constants = report
        .constants
        .as_ref()
        .ok_or_else(|| Error::Format("run has no constants block to verify".into()))?;
    let ps = cfg.problem_spec()?;
    let (phi, _) = load_field(&input.join("phi.bin"))?;
    let samples = cfg.verify_samples();
    let summary = VerificationSummary {
        samples,
        seed,
        worst_gn_margin: verify_gn_inequality(&ps, constants.c_gn_from_norm, samples, seed)?,
        worst_sobolev_margin: verify_sobolev_inequality(
            &ps,
            constants.c_s_from_mass,
            samples,
            seed,
        )?,
        min_quotient_ratio: quotient_extremality(&ps, &phi, samples, seed)?,
    };
    fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Format(format!("verify encode: {e}")))?;
    write_file(&out_dir.join("verify.json"), &json)?;
    Ok(())
}

pub fn run_report(cfg: &RunConfig, strict: bool, out_dir: &Path) -> Result<()> {
    let dirs = cfg
        .run_dirs
        .as_ref()
        .ok_or_else(|| Error::Format("`report` needs run_dirs".into()))?;
    let mut sorted: Vec<PathBuf> = dirs.clone();
    sorted.sort();
    let mut seen = std::collections::BTreeSet::new();
    let mut rows = Vec::new();
    let mut missing = 0usize;
    for dir in sorted {
        if !seen.insert(dir.clone()) {
            eprintln!("warning: duplicate run dir {} skipped", dir.display());
            continue;
        }
        match read_run_row(&dir) {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("warning: {}: {e}", dir.display());
                rows.push(format!("{},error,,,,,,,,,,", dir.display()));
                missing += 1;
            }
        }
    }
    let mut csv = String::from(
        "dir,status,a1,a2,p,q,Q,d,c_s_from_mass,c_gn_from_norm,ratio_value,el_residual\n",
    );
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    fs::create_dir_all(out_dir)?;
    write_file(&out_dir.join("report.csv"), &csv)?;
    if strict && missing > 0 {
        return Err(Error::Format(format!("{missing} run dir(s) lacked a readable report.json")));
    }
    Ok(())
}

fn read_run_row(dir: &Path) -> Result<String> {
    let json = fs::read_to_string(dir.join("report.json"))?;
    let report: RunReport =
        serde_json::from_str(&json).map_err(|e| Error::Format(format!("report parse: {e}")))?;
    let (a1, a2, p, q, q_hom, cs, cgn, ratio) = match &report.constants {
        Some(c) => (
            c.a1.clone(),
            c.a2.clone(),
            c.p.clone(),
            c.q.clone(),
            c.q_hom.clone(),
            c.c_s_from_mass.to_string(),
            c.c_gn_from_norm.to_string(),
            c.ratio_value.to_string(),
        ),
        None => match &report.config.problem {
            Some(pc) => {
                let weights: Vec<Rat> = pc
                    .weights
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<_>>()?;
                let q_hom = homogeneous_dimension(&weights)?;
                (
                    pc.terms.first().map(|t| t.order.clone()).unwrap_or_default(),
                    pc.terms.last().map(|t| t.order.clone()).unwrap_or_default(),
                    pc.p.clone(),
                    pc.q.clone(),
                    format_rational(&q_hom),
                    String::new(),
                    String::new(),
                    String::new(),
                )
            }
            None => Default::default(),
        },
    };
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        dir.display(),
        if report.result.converged { "converged" } else { "unconverged" },
        a1,
        a2,
        p,
        q,
        q_hom,
        report.result.d,
        cs,
        cgn,
        ratio,
        report.result.el_residual
    ))
}

impl RunConfig {
    /// Echo of the effective configuration (CLI overrides folded in).
    fn clone_with_seed(&self, seed: u64, out_dir: &Path) -> RunConfig {
        let mut c = self.clone();
        c.seed = seed;
        c.output_dir = out_dir.to_path_buf();
        c
    }
}

pub fn dispatch(cfg: &RunConfig, seed: u64, out_dir: &Path, strict: bool) -> Result<()> {
    match cfg.command {
        Command::Solve => run_solve(cfg, seed, out_dir),
        Command::Exponents => run_exponents(cfg, out_dir),
        Command::Constants => run_constants(cfg, out_dir),
        Command::Verify => run_verify(cfg, seed, out_dir),
        Command::Report => run_report(cfg, strict, out_dir),
    }
}
