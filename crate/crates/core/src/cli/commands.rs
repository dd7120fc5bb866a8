use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::output::{num, rates_svg, read_dataset, RunStamp, Table};
use crate::error::{Error, Result};
use crate::estimator::{eigencoeffs, gram, DualSolver};
use crate::lowerbound::{fano_instance, kl_divergence, packing::hamming, AlternativeFamily};
use crate::mercer::Dataset;
use crate::rates::{lambda_rule, run_rate_experiment, RateConfig};
use crate::spectrum::lemmas::{effective_dimension_factor, effective_dimension_grid, suite};
use crate::spectrum::DecayBound;

/// Codes whose pairwise KL is written in full; every code is additionally
/// paired with the reference.
const KL_PAIR_CODES: usize = 32;

pub struct Context {
    pub config: ExperimentConfig,
    pub stamp: RunStamp,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl Context {
    fn write(&self, table: &Table, name: &str, written: &mut Vec<PathBuf>) -> Result<()> {
        written.push(table.write(&self.out_dir, name, &self.stamp)?);
        Ok(())
    }
}

/// What a command produced: files written and a human-readable summary.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn spectrum_report(ctx: &Context) -> Result<Outcome> {
    let profile = ctx.config.profile()?;
    let r = ctx.config.problem.r;
    let mut out = Outcome::default();

    let mut eig = Table::new(&["j", "mu"]);
    for (j, &mu) in profile.values().iter().enumerate() {
        eig.push(vec![(j + 1).to_string(), num(mu)]);
    }
    ctx.write(&eig, "eigenvalues.csv", &mut out.files)?;

    let mut spec = Table::new(&["t", "F", "G"]);
    for (t, f) in profile.breakpoints() {
        let g = profile.gee(t, r)?.finite().map(num).unwrap_or_else(|| "inf".into());
        spec.push(vec![num(t), f.to_string(), g]);
    }
    ctx.write(&spec, "spectrum.csv", &mut out.files)?;

    let factor = effective_dimension_factor(profile.nu_lower());
    let mut eff = Table::new(&["lambda", "N", "F", "bound"]);
    for lam in effective_dimension_grid(&profile, 50) {
        let f = profile.count(lam)?;
        eff.push(vec![num(lam), num(profile.effective_dimension(lam)?), f.to_string(), num(f as f64 * factor)]);
    }
    ctx.write(&eff, "effdim.csv", &mut out.files)?;

    let decay = profile.verify_decay();
    let mut props = Table::new(&["property", "checks", "violations", "passed"]);
    let upper = decay.violating_indices(DecayBound::Upper);
    let lower = decay.violating_indices(DecayBound::Lower);
    props.push(vec![
        format!("EIGUP mu_2j/mu_j <= 2^-{}", profile.nu_upper()),
        decay.checked.to_string(),
        upper.len().to_string(),
        decay.eigup_ok.to_string(),
    ]);
    props.push(vec![
        format!("EIGLOW mu_2j/mu_j >= 2^-{}", profile.nu_lower()),
        decay.checked.to_string(),
        lower.len().to_string(),
        decay.eiglow_ok.to_string(),
    ]);
    for check in suite(&profile, r) {
        props.push(vec![
            check.name.clone(),
            check.checks.to_string(),
            check.violations.len().to_string(),
            check.passed().to_string(),
        ]);
        for v in check.violations.iter().take(3) {
            out.summary.push(format!("  {}: {v}", check.name));
        }
    }
    ctx.write(&props, "properties.csv", &mut out.files)?;

    let mut viol = Table::new(&["j", "ratio", "bound"]);
    for v in &decay.violations {
        let bound = match v.bound {
            DecayBound::Upper => "EIGUP",
            DecayBound::Lower => "EIGLOW",
        };
        viol.push(vec![v.j.to_string(), num(v.ratio), bound.into()]);
    }
    ctx.write(&viol, "decay_violations.csv", &mut out.files)?;

    let verdict = |ok: bool| if ok { "ok" } else { "FAILED" };
    out.summary.insert(0, format!("spectrum {} with p={}", profile.kind().tag(), profile.p()));
    out.summary.insert(1, format!("EIGUP (nu_upper={}): {}", profile.nu_upper(), verdict(decay.eigup_ok)));
    out.summary.insert(
        2,
        format!(
            "EIGLOW (nu_lower={}): {}{}",
            profile.nu_lower(),
            verdict(decay.eiglow_ok),
            if lower.is_empty() { String::new() } else { format!(" at j = {}", join_head(&lower, 10)) }
        ),
    );
    if !upper.is_empty() {
        out.summary.insert(3, format!("EIGUP violated at j = {}", join_head(&upper, 10)));
    }
    Ok(out)
}

fn join_head(v: &[usize], k: usize) -> String {
    let mut s: Vec<String> = v.iter().take(k).map(|j| j.to_string()).collect();
    if v.len() > k {
        s.push(format!("... ({} total)", v.len()));
    }
    s.join(", ")
}

pub fn fit(ctx: &Context, data_path: Option<&Path>) -> Result<Outcome> {
    let cfg = &ctx.config;
    let problem = cfg.problem()?;
    let filter = cfg.filter()?;
    let section = cfg.fit.clone().unwrap_or(super::config::FitSection { n: None, lambda: None, jitter: false });
    let (data, synthetic) = match data_path {
        Some(path) => {
            let (x, y) = read_dataset(path)?;
            if let Some(bad) = x.iter().find(|&&v| !problem.basis().contains(v)) {
                return Err(Error::Data(format!(
                    "input {bad} lies outside the domain of the {} basis",
                    problem.basis().tag()
                )));
            }
            (Dataset::new(x, y, cfg.seed).map_err(|e| Error::Data(e.to_string()))?, false)
        }
        None => {
            let n = section
                .n
                .ok_or_else(|| Error::Config("fit needs fit.n or a --data file".into()))?;
            (problem.sample(n, cfg.seed).map_err(|e| Error::Config(e.to_string()))?, true)
        }
    };
    let n = data.len();
    let (lambda, lambda_source) = match section.lambda {
        Some(l) if l > 0.0 && l.is_finite() => (l, "config"),
        Some(l) => return Err(Error::Config(format!("fit.lambda must be positive, got {l}"))),
        None => (lambda_rule(&cfg.model_params(&problem)?, n)?, "rule"),
    };

    let k = gram(&problem, &data.x)?;
    let result = DualSolver::new(&k, problem.kappa_sq(), section.jitter)?.fit(&data.y, &filter, lambda)?;
    let coeffs = eigencoeffs(&problem, &data.x, &result.alpha)?;

    let mut out = Outcome::default();
    let mut alpha = Table::new(&["i", "x", "y", "alpha"]);
    for (i, ((&x, &y), &a)) in data.x.iter().zip(&data.y).zip(&result.alpha).enumerate() {
        alpha.push(vec![i.to_string(), num(x), num(y), num(a)]);
    }
    ctx.write(&alpha, "fit_alpha.csv", &mut out.files)?;

    let mut coef = Table::new(&["l", "mu", "coefficient", "target"]);
    for (l, ((&c, &t), &mu)) in coeffs.iter().zip(problem.target_coeffs()).zip(problem.profile().values()).enumerate() {
        coef.push(vec![(l + 1).to_string(), num(mu), num(c), num(t)]);
    }
    ctx.write(&coef, "fit_coefficients.csv", &mut out.files)?;

    let mut meta = Table::new(&["key", "value"]);
    let mut kv = |k: &str, v: String| meta.push(vec![k.to_string(), v]);
    kv("source", if synthetic { "synthetic".into() } else { "data".into() });
    kv("n", n.to_string());
    kv("filter", filter.kind().tag().into());
    kv("lambda", num(lambda));
    kv("lambda_source", lambda_source.into());
    kv("kappa_sq", num(problem.kappa_sq()));
    kv("jitter", section.jitter.to_string());
    out.summary.push(format!("fit {} on n={n} at lambda={} ({lambda_source})", filter.kind().tag(), num(lambda)));
    if synthetic {
        for s in [0.0, 0.5] {
            let e = problem.error_norm(&coeffs, s)?;
            kv(&format!("error_s{s}"), num(e));
            out.summary.push(format!("||B^{s}(f_hat - f)|| = {}", num(e)));
        }
    }
    ctx.write(&meta, "fit_meta.csv", &mut out.files)?;
    Ok(out)
}

pub fn rates(ctx: &Context, svg: bool) -> Result<Outcome> {
    let cfg = &ctx.config;
    let section = cfg.rates.as_ref().ok_or_else(|| Error::Config("rates needs a [rates] table".into()))?;
    let problem = cfg.problem()?;
    problem.profile().require_upper_decay()?;
    let params = cfg.model_params(&problem)?;
    let report = run_rate_experiment(&RateConfig {
        problem,
        params,
        filter: cfg.filter()?,
        n_grid: section.n_grid.clone(),
        replicates: section.replicates,
        s: cfg.problem.s,
        seed: cfg.seed,
        jobs: ctx.jobs,
    })?;

    let mut out = Outcome::default();
    let mut rows = Table::new(&["n", "lambda", "theo_rate", "mean_err", "median_err", "q10", "q90"]);
    for r in &report.rows {
        rows.push(vec![r.n.to_string(), num(r.lambda), num(r.theoretical_rate), num(r.mean), num(r.median), num(r.q10), num(r.q90)]);
    }
    ctx.write(&rows, "rates.csv", &mut out.files)?;

    let mut slopes = Table::new(&["fitted_slope", "theoretical_slope", "gap", "warnings"]);
    slopes.push(vec![
        num(report.fitted_slope),
        num(report.theoretical_slope),
        num(report.slope_gap()),
        report.warnings.join("; "),
    ]);
    ctx.write(&slopes, "slopes.csv", &mut out.files)?;

    if svg {
        let path = ctx.out_dir.join("rates.svg");
        fs::write(&path, rates_svg(&report))?;
        out.files.push(path);
    }
    out.summary.push(format!(
        "fitted slope {:.4}, theoretical slope {:.4}, gap {:.4}",
        report.fitted_slope,
        report.theoretical_slope,
        report.slope_gap()
    ));
    out.summary.extend(report.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(out)
}

pub fn lowerbound(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let section = cfg
        .lowerbound
        .as_ref()
        .ok_or_else(|| Error::Config("lowerbound needs a [lowerbound] table".into()))?;
    let problem = cfg.problem()?;
    problem.profile().require_lower_decay()?;
    let params = cfg.model_params(&problem)?;

    let mut out = Outcome::default();
    let mut summary = Table::new(&[
        "s",
        "n",
        "epsilon",
        "m",
        "construction",
        "log_capacity",
        "mean_kl",
        "max_kl",
        "kl_bound_stated",
        "kl_bound_derived",
        "omega",
        "lower_bound_prob",
        "valid",
        "reason",
    ]);
    let mut pairs = Table::new(&["s", "i", "j", "hamming", "separation_sq", "kl"]);
    for (idx, &s) in section.s.iter().enumerate() {
        let (report, family) = fano_instance(&params, s, section.n, cfg.seed)?;
        summary.push(vec![
            num(s),
            section.n.to_string(),
            num(report.epsilon),
            report.m.map(|m| m.to_string()).unwrap_or_default(),
            report.construction.clone().unwrap_or_default(),
            num(report.log_capacity),
            num(report.mean_kl),
            num(report.max_kl),
            num(report.kl_bound_stated),
            num(report.kl_bound_derived),
            num(report.omega),
            num(report.lower_bound_prob),
            report.valid.to_string(),
            report.reason.clone().unwrap_or_default(),
        ]);
        out.summary.push(format!(
            "s={s}: m={} omega={} P(error)>={} {}",
            report.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into()),
            num(report.omega),
            num(report.lower_bound_prob),
            if report.valid { "valid".to_string() } else { format!("invalid ({})", report.reason.unwrap_or_default()) }
        ));
        if let Some(family) = family {
            push_pairs(&mut pairs, &family, s, section.n)?;
            let mut codes = Table::new(
                &std::iter::once("code".to_string())
                    .chain((1..=family.m).map(|l| format!("b{l}")))
                    .collect::<Vec<_>>(),
            );
            for (i, code) in family.packing.codes.iter().enumerate() {
                codes.push(std::iter::once(i.to_string()).chain(code.iter().map(|b| b.to_string())).collect());
            }
            ctx.write(&codes, &format!("packing_{idx}.csv"), &mut out.files)?;
        }
    }
    ctx.write(&summary, "lowerbound.csv", &mut out.files)?;
    ctx.write(&pairs, "kl_pairs.csv", &mut out.files)?;
    Ok(out)
}

fn push_pairs(table: &mut Table, family: &AlternativeFamily, s: f64, n: usize) -> Result<()> {
    let reference = family.reference();
    let head = family.len().min(KL_PAIR_CODES);
    let mut push = |i: usize, j: usize| -> Result<()> {
        table.push(vec![
            num(s),
            i.to_string(),
            j.to_string(),
            hamming(&family.packing.codes[i], &family.packing.codes[j]).to_string(),
            num(family.separation_sq(i, j)?),
            num(kl_divergence(family, i, j, n)?),
        ]);
        Ok(())
    };
    for i in 0..head {
        for j in i + 1..head {
            if j != reference {
                push(i, j)?;
            }
        }
    }
    for i in 0..reference {
        push(i, reference)?;
    }
    Ok(())
}

pub fn filter_check(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let filter = cfg.filter()?;
    let grid = cfg.filter.grid_size;
    let constants = filter.verify_constants(grid).map_err(|e| Error::Config(e.to_string()))?;
    let quals = filter
        .measure_qualification(&cfg.filter.qualification, grid)
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut out = Outcome::default();
    let mut table = Table::new(&["condition", "declared", "measured", "worst_lambda", "worst_t", "holds"]);
    for row in &constants.rows {
        table.push(vec![
            row.condition.clone(),
            num(row.declared),
            num(row.measured),
            num(row.worst_lambda),
            num(row.worst_t),
            row.holds().to_string(),
        ]);
    }
    ctx.write(&table, "filter_constants.csv", &mut out.files)?;

    let mut qual = Table::new(&["q", "sup_1e-2", "sup_1e-4", "sup_1e-6", "saturates", "declared_gamma"]);
    for m in &quals {
        qual.push(vec![
            num(m.q),
            num(m.sup_by_refinement[0]),
            num(m.sup_by_refinement[1]),
            num(m.sup_by_refinement[2]),
            m.saturates.to_string(),
            m.declared.map(num).unwrap_or_default(),
        ]);
    }
    ctx.write(&qual, "filter_qualification.csv", &mut out.files)?;

    out.summary.push(format!(
        "{}: declared constants {}",
        filter.kind().tag(),
        if constants.holds { "hold" } else { "FAIL" }
    ));
    for m in &quals {
        out.summary.push(format!("q={}: {}", m.q, if m.saturates { "saturates" } else { "bounded" }));
    }
    if !constants.holds {
        let failed: Vec<String> = constants.failures().map(|r| r.condition.clone()).collect();
        return Err(Error::Gate(format!("declared filter constants violated: {}", failed.join(", "))));
    }
    Ok(out)
}
