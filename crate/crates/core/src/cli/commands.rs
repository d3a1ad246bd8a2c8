use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::inference::{fit, simulate_from_pi, wald_p_value, CountTable, FitOptions, FitResult, ModelSpec};
use crate::params::{self, Link, ParamError, ParamKind, ParamMatrix};
use crate::risk::{self, IndependenceSource};
use crate::selection::{
    average_effects, backward_staged_selection, forward_margin_selection, SelectionTrace, StagePolicy,
};

use super::io::{
    export_cases, export_counts, fmt_num, fmt_opt, format_zero_set, ingest, json_num, json_opt, matrix_json,
    read_matrix, read_zero_set, render_matrix, TSV_DECIMALS,
};
use super::{Cli, CliError, Command, InputFormat, OutputFormat, Procedure, RunConfig};

/// Runs a parsed command line and returns the rendered output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = RunConfig::from_args(&cli.common)?;
    match &cli.command {
        Command::Fit => cmd_fit(&cfg),
        Command::Transform => cmd_transform(&cfg),
        Command::Select { procedure } => cmd_select(&cfg, *procedure),
        Command::Risk => cmd_risk(&cfg),
        Command::Simulate { totals } => cmd_simulate(&cfg, totals),
        Command::PlotData => cmd_plot_data(&cfg),
    }
}

fn options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        smooth: cfg.smooth,
        allow_missing_cells: cfg.allow_missing_cells,
        ..FitOptions::default()
    }
}

fn require_converged(f: FitResult) -> Result<FitResult, CliError> {
    if f.converged {
        Ok(f)
    } else {
        Err(CliError::Numerical(format!(
            "fit did not converge after {} iterations (score norm {:.3e})",
            f.iterations, f.gradient_norm
        )))
    }
}

fn fit_with(cfg: &RunConfig, data: &CountTable, link: Link) -> Result<FitResult, CliError> {
    let spec = ModelSpec::new(link, read_zero_set(cfg)?)?;
    spec.check_dims(data.responses(), data.covariates())?;
    require_converged(fit(&spec, data, &options(cfg))?)
}

/// One coefficient table: estimate, standard error and p-value per cell.
struct CoefTable<'a> {
    beta: &'a ParamMatrix,
    se: Box<dyn Fn(usize, usize) -> Option<f64> + 'a>,
    constrained: Box<dyn Fn(usize, usize) -> bool + 'a>,
}

impl CoefTable<'_> {
    fn p(&self, d: usize, e: usize) -> Option<f64> {
        (self.se)(d, e).and_then(|s| wald_p_value(self.beta.get(d, e), s))
    }

    fn tsv(&self, out: &mut String) {
        let rows = self.beta.rows();
        let cols = self.beta.cols();
        let order = cols.display_order();
        out.push('D');
        for &e in &order {
            let c = cols.format(e);
            let _ = write!(out, "\t{c}:est\t{c}:se\t{c}:p");
        }
        out.push('\n');
        for d in rows.display_order().into_iter().filter(|d| *d != 0) {
            out.push_str(&rows.format(d));
            for &e in &order {
                if (self.constrained)(d, e) {
                    out.push_str("\t·\t·\t·");
                } else {
                    let _ = write!(
                        out,
                        "\t{}\t{}\t{}",
                        fmt_num(self.beta.get(d, e)),
                        fmt_opt((self.se)(d, e)),
                        fmt_opt(self.p(d, e))
                    );
                }
            }
            out.push('\n');
        }
    }

    fn json(&self) -> Value {
        let rows = self.beta.rows();
        let cols = self.beta.cols();
        let mut entries = Vec::new();
        for d in rows.display_order().into_iter().filter(|d| *d != 0) {
            for e in cols.display_order() {
                let constrained = (self.constrained)(d, e);
                entries.push(json!({
                    "D": rows.format(d),
                    "E": cols.format(e),
                    "constrained": constrained,
                    "estimate": json_num(self.beta.get(d, e)),
                    "se": if constrained { Value::Null } else { json_opt((self.se)(d, e)) },
                    "p": if constrained { Value::Null } else { json_opt(self.p(d, e)) },
                }));
            }
        }
        json!({ "kind": self.beta.kind().name(), "coefficients": entries })
    }
}

fn primary_table(f: &FitResult) -> CoefTable<'_> {
    CoefTable {
        beta: &f.beta_hat,
        se: Box::new(move |d, e| f.std_error(d, e)),
        constrained: Box::new(move |d, e| f.spec.is_zero(d, e)),
    }
}

fn induced_beta_mu(f: &FitResult) -> Result<(ParamMatrix, Option<Vec<f64>>), CliError> {
    let beta_mu = params::beta_mu_from_beta_gamma(&f.beta_hat)?;
    let ses = f.mapped_std_errors(|unit| {
        params::beta_mu_from_beta_gamma(unit).expect("unit matrix has the fit's coefficient kind")
    });
    Ok((beta_mu, ses))
}

fn fit_tsv(f: &FitResult, out: &mut String) -> Result<(), CliError> {
    let _ = writeln!(out, "link\t{}", f.link().name());
    let _ = writeln!(out, "coefficients\t{}", f.beta_hat.kind().name());
    primary_table(f).tsv(out);
    if f.link() == Link::Lml {
        let (beta_mu, ses) = induced_beta_mu(f)?;
        let n_cols = beta_mu.n_cols();
        let table = CoefTable {
            beta: &beta_mu,
            se: Box::new(|d, e| ses.as_ref().map(|s| s[d * n_cols + e])),
            constrained: Box::new(|_, _| false),
        };
        let _ = writeln!(out, "\ninduced\t{}", beta_mu.kind().name());
        table.tsv(out);
    }
    let excluded: Vec<String> = f.excluded_columns.iter().map(|&e| f.beta_hat.cols().format(e)).collect();
    let _ = write!(
        out,
        "\ndeviance\t{}\ndf\t{}\np_value\t{}\nconverged\t{}\niterations\t{}\nexcluded_cells\t{}\nsmoothing\t{}\n",
        fmt_num(f.deviance),
        f.df,
        fmt_num(f.deviance_p),
        f.converged,
        f.iterations,
        if excluded.is_empty() { "-".to_string() } else { excluded.join(" ") },
        fmt_opt(f.smoothing),
    );
    Ok(())
}

fn fit_json(f: &FitResult) -> Result<Value, CliError> {
    let mut v = json!({
        "link": f.link().name(),
        "responses": f.beta_hat.rows().labels(),
        "covariates": f.beta_hat.cols().labels(),
        "estimates": primary_table(f).json(),
        "deviance": json_num(f.deviance),
        "df": f.df,
        "p_value": json_num(f.deviance_p),
        "loglik": json_num(f.loglik),
        "converged": f.converged,
        "iterations": f.iterations,
        "excluded_cells": f.excluded_columns.iter().map(|&e| f.beta_hat.cols().format(e)).collect::<Vec<_>>(),
        "smoothing": json_opt(f.smoothing),
    });
    if f.link() == Link::Lml {
        let (beta_mu, ses) = induced_beta_mu(f)?;
        let n_cols = beta_mu.n_cols();
        let table = CoefTable {
            beta: &beta_mu,
            se: Box::new(|d, e| ses.as_ref().map(|s| s[d * n_cols + e])),
            constrained: Box::new(|_, _| false),
        };
        v["induced"] = table.json();
    }
    Ok(v)
}

fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Fits the configured model.
pub fn cmd_fit(cfg: &RunConfig) -> Result<String, CliError> {
    let data = ingest(cfg)?;
    let f = fit_with(cfg, &data, cfg.link)?;
    match cfg.out {
        OutputFormat::Tsv => {
            let mut out = String::new();
            fit_tsv(&f, &mut out)?;
            Ok(out)
        }
        OutputFormat::Json => Ok(to_json_string(&fit_json(&f)?)),
    }
}

/// Cell probabilities of any invertible parameterization. Boundary
/// failures name the offending cell with its labels.
fn pi_of(m: &ParamMatrix) -> Result<ParamMatrix, CliError> {
    let pi = match m.kind() {
        ParamKind::Pi => m.validate().map(|_| m.clone()),
        ParamKind::Mu => params::pi_from_mu(m),
        ParamKind::LogMu => params::mu_from_log_mu(m).and_then(|mu| params::pi_from_mu(&mu)),
        ParamKind::Gamma => params::mu_from_gamma(m).and_then(|mu| params::pi_from_mu(&mu)),
        ParamKind::BetaMu => params::pi_from_beta(m, Link::Lm),
        ParamKind::BetaGamma => params::pi_from_beta(m, Link::Lml),
        ParamKind::RefB => {
            return Err(CliError::Config(
                "reference coefficients do not determine the other parameters".into(),
            ))
        }
    };
    pi.map_err(|e| match e {
        ParamError::Boundary { row, col, value } => CliError::Numerical(format!(
            "{} is outside the parameter space: cell D={}, E={} gets probability {value:.6e}",
            m.kind().name(),
            m.rows().format(row),
            m.cols().format(col)
        )),
        other => other.into(),
    })
}

/// Reads one parameter matrix and emits every parameterization.
pub fn cmd_transform(cfg: &RunConfig) -> Result<String, CliError> {
    let pi = pi_of(&read_matrix(cfg)?)?;
    let mu = params::mu_from_pi(&pi)?;
    let log_mu = params::log_mu_from_mu(&mu)?;
    let gamma = params::gamma_from_mu(&mu)?;
    let beta_mu = params::coeffs_from_link(&log_mu)?;
    let beta_gamma = params::coeffs_from_link(&gamma)?;
    let ref_b = risk::reference_coeffs(&beta_mu)?;
    let all = [pi, mu, log_mu, gamma, beta_mu, beta_gamma, ref_b];
    Ok(match cfg.out {
        OutputFormat::Tsv => all
            .iter()
            .map(|m| render_matrix(m, TSV_DECIMALS))
            .collect::<Vec<_>>()
            .join("\n"),
        OutputFormat::Json => to_json_string(&Value::Array(all.iter().map(matrix_json).collect())),
    })
}

fn coef_label(data: &CountTable, (d, e): (usize, usize)) -> String {
    format!("{};{}", data.responses().format(d), data.covariates().format(e))
}

/// Runs forward per-margin or backward staged selection.
pub fn cmd_select(cfg: &RunConfig, procedure: Procedure) -> Result<String, CliError> {
    let data = ingest(cfg)?;
    let opts = options(cfg);
    let trace: SelectionTrace = match procedure {
        Procedure::Forward => forward_margin_selection(&data, cfg.link, cfg.alpha, &opts)?,
        Procedure::Backward => backward_staged_selection(
            &data,
            cfg.link,
            cfg.alpha,
            &StagePolicy::default_for(data.responses().ground_size()),
            &opts,
        )?,
    };
    let final_fit = require_converged(trace.final_fit.clone())?;
    let name = match procedure {
        Procedure::Forward => "forward",
        Procedure::Backward => "backward",
    };
    let margin = |m: Option<usize>| m.map_or_else(|| "-".to_string(), |d| data.responses().format(d));
    match cfg.out {
        OutputFormat::Tsv => {
            let mut out = format!("procedure\t{name}\nalpha\t{}\n\n", fmt_num(cfg.alpha));
            out.push_str("stage\tmargin\tdeviance\tdf\tp\tdropped\n");
            for s in &trace.steps {
                let dropped: Vec<String> = s.dropped.iter().map(|&c| coef_label(&data, c)).collect();
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    s.stage,
                    margin(s.margin),
                    fmt_num(s.deviance),
                    s.df,
                    fmt_num(s.p_value),
                    match (&s.error, dropped.is_empty()) {
                        (Some(e), _) => format!("error: {e}"),
                        (None, true) => "-".into(),
                        (None, false) => dropped.join(" "),
                    }
                );
            }
            out.push('\n');
            fit_tsv(&final_fit, &mut out)?;
            out.push_str("\nzero_set\n");
            out.push_str(&format_zero_set(trace.final_spec.zero_set(), data.responses(), data.covariates()));
            Ok(out)
        }
        OutputFormat::Json => {
            let steps: Vec<Value> = trace
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "stage": s.stage,
                        "margin": s.margin.map(|d| data.responses().format(d)),
                        "deviance": json_num(s.deviance),
                        "df": s.df,
                        "p_value": json_num(s.p_value),
                        "dropped": s.dropped.iter().map(|&c| coef_label(&data, c)).collect::<Vec<_>>(),
                        "error": s.error,
                    })
                })
                .collect();
            let zeros: Vec<String> = format_zero_set(trace.final_spec.zero_set(), data.responses(), data.covariates())
                .lines()
                .map(String::from)
                .collect();
            Ok(to_json_string(&json!({
                "procedure": name,
                "alpha": json_num(cfg.alpha),
                "steps": steps,
                "final": fit_json(&final_fit)?,
                "zero_set": zeros,
            })))
        }
    }
}

/// Relative risks of the fitted model plus the independencies implied by
/// its zero pattern.
pub fn cmd_risk(cfg: &RunConfig) -> Result<String, CliError> {
    let data = ingest(cfg)?;
    let f = fit_with(cfg, &data, cfg.link)?;
    let report = risk::risk_report(&f.beta_hat, Some(&f.spec))?;
    let (v, u) = (data.responses(), data.covariates());
    let resp = risk::implied_response_independencies(IndependenceSource::Spec {
        spec: &f.spec,
        responses: v,
        covariates: u,
    });
    let cov = risk::implied_covariate_independencies(&f.spec, v, u);
    let exp = |x: Option<f64>| x.map(f64::exp);
    match cfg.out {
        OutputFormat::Tsv => {
            let mut out =
                String::from("D\tu\tE\tlog_rr\trr\tlog_ref_rr\tref_rr\tlog_ratio\tratio\tconstrained\n");
            for r in &report.entries {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    v.format(r.response),
                    u.labels()[r.covariate],
                    u.format(r.context),
                    fmt_num(r.log_rr),
                    fmt_num(r.log_rr.exp()),
                    fmt_opt(r.log_ref_rr),
                    fmt_opt(exp(r.log_ref_rr)),
                    fmt_opt(r.log_ratio),
                    fmt_opt(exp(r.log_ratio)),
                    r.constrained
                );
            }
            out.push_str("\nresponse_independence\tD\tA\tB\n");
            for r in &resp {
                let _ = writeln!(out, "\t{}\t{}\t{}", v.format(r.pattern), v.format(r.left), v.format(r.right));
            }
            out.push_str("\ncovariate_independence\tD\tcovariates\n");
            for c in &cov {
                let _ = writeln!(out, "\t{}\t{}", v.format(c.responses), u.format(c.covariates));
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let entries: Vec<Value> = report
                .entries
                .iter()
                .map(|r| {
                    json!({
                        "D": v.format(r.response),
                        "u": u.labels()[r.covariate],
                        "E": u.format(r.context),
                        "log_rr": json_num(r.log_rr),
                        "rr": json_num(r.log_rr.exp()),
                        "log_ref_rr": json_opt(r.log_ref_rr),
                        "ref_rr": json_opt(exp(r.log_ref_rr)),
                        "log_ratio": json_opt(r.log_ratio),
                        "ratio": json_opt(exp(r.log_ratio)),
                        "constrained": r.constrained,
                    })
                })
                .collect();
            Ok(to_json_string(&json!({
                "link": f.link().name(),
                "relative_risks": entries,
                "response_independencies": resp.iter().map(|r| json!({
                    "D": v.format(r.pattern), "A": v.format(r.left), "B": v.format(r.right),
                })).collect::<Vec<_>>(),
                "covariate_independencies": cov.iter().map(|c| json!({
                    "D": v.format(c.responses), "covariates": u.format(c.covariates),
                })).collect::<Vec<_>>(),
            })))
        }
    }
}

/// Parses `--totals`: a single total split as evenly as possible over the
/// covariate cells (remainder to the first cells), or one total per cell.
pub fn parse_totals(text: &str, n_cells: usize) -> Result<Vec<u64>, CliError> {
    let parts = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("invalid total {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match parts.as_slice() {
        [n] => {
            let cells = n_cells as u64;
            Ok((0..cells).map(|i| n / cells + u64::from(i < n % cells)).collect())
        }
        _ if parts.len() == n_cells => Ok(parts),
        _ => Err(CliError::Config(format!(
            "--totals needs one value or {n_cells} values, got {}",
            parts.len()
        ))),
    }
}

/// Draws a data set from any invertible parameter matrix (typically
/// `beta_mu` or `beta_gamma`) and writes it in the configured input format.
pub fn cmd_simulate(cfg: &RunConfig, totals: &str) -> Result<String, CliError> {
    let m = read_matrix(cfg)?;
    let totals = parse_totals(totals, m.n_cols())?;
    let table = simulate_from_pi(&pi_of(&m)?, &totals, cfg.seed)?;
    Ok(match cfg.format {
        InputFormat::Cases => export_cases(&table),
        InputFormat::Counts => export_counts(&table),
    })
}

/// Average effects of every covariate over response patterns of each size,
/// under both links, with 95% confidence intervals.
pub fn cmd_plot_data(cfg: &RunConfig) -> Result<String, CliError> {
    let data = ingest(cfg)?;
    let mut rows = Vec::new();
    for link in [Link::Lm, Link::Lml] {
        let f = fit_with(cfg, &data, link)?;
        for u in 0..data.covariates().ground_size() {
            for eff in average_effects(&f, &data, u)? {
                rows.push((link, u, eff));
            }
        }
    }
    let labels = data.covariates().labels();
    Ok(match cfg.out {
        OutputFormat::Tsv => {
            let mut out = String::from("link\tcovariate\tk\testimate\tse\tci_lo\tci_hi\n");
            for (link, u, e) in &rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    link.name(),
                    labels[*u],
                    e.k,
                    fmt_num(e.estimate),
                    fmt_num(e.se),
                    fmt_num(e.ci.0),
                    fmt_num(e.ci.1)
                );
            }
            out
        }
        OutputFormat::Json => to_json_string(&Value::Array(
            rows.iter()
                .map(|(link, u, e)| {
                    json!({
                        "link": link.name(),
                        "covariate": labels[*u],
                        "k": e.k,
                        "estimate": json_num(e.estimate),
                        "se": json_num(e.se),
                        "ci_lo": json_num(e.ci.0),
                        "ci_hi": json_num(e.ci.1),
                    })
                })
                .collect(),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_split_evenly() {
        assert_eq!(parse_totals("10", 4).unwrap(), vec![3, 3, 2, 2]);
        assert_eq!(parse_totals("1,2", 2).unwrap(), vec![1, 2]);
        assert!(parse_totals("1,2,3", 2).is_err());
        assert!(parse_totals("x", 2).is_err());
    }
}
