use std::collections::{BTreeSet, HashMap};
use std::fs;

use log::warn;
use serde_json::{json, Value};

use crate::inference::CountTable;
use crate::lattice::SubsetLattice;
use crate::params::{ParamKind, ParamMatrix};

use super::{CliError, InputFormat, RunConfig};

pub(crate) const TSV_DECIMALS: usize = 3;
pub(crate) const JSON_DECIMALS: i32 = 6;

/// Fixed-point rendering; `-0.000` collapses to `0.000` and non-finite
/// values print as `NA`.
pub(crate) fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let s = format!("{x:.TSV_DECIMALS$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_num)
}

/// JSON number rounded to six decimals; non-finite values become `null`.
pub(crate) fn json_num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let scale = 10f64.powi(JSON_DECIMALS);
    let r = (x * scale).round() / scale;
    json!(if r == 0.0 { 0.0 } else { r })
}

pub(crate) fn json_opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_num)
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Reads the configured input file into a count table.
pub fn ingest(cfg: &RunConfig) -> Result<CountTable, CliError> {
    let text = read_file(&cfg.input)?;
    let table = ingest_str(&text, cfg.format, &cfg.response_lattice()?, &cfg.covariate_lattice()?)?;
    let missing = table.missing_columns();
    if !missing.is_empty() {
        let cells: Vec<String> = missing.iter().map(|&e| table.covariates().format(e)).collect();
        warn!("covariate cells without observations: {}", cells.join(" "));
    }
    Ok(table)
}

/// Parses comma-separated data. In `cases` format every row is one subject
/// with 0/1 values; in `counts` format a `count` column gives the
/// multiplicity of each row and duplicate rows add up.
pub fn ingest_str(
    text: &str,
    format: InputFormat,
    responses: &SubsetLattice,
    covariates: &SubsetLattice,
) -> Result<CountTable, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("input has no column `{name}`")))
    };
    let ycols = responses.labels().iter().map(|l| column(l)).collect::<Result<Vec<_>, _>>()?;
    let xcols = covariates.labels().iter().map(|l| column(l)).collect::<Result<Vec<_>, _>>()?;
    let count_col = match format {
        InputFormat::Counts => Some(column("count")?),
        InputFormat::Cases => None,
    };

    let mut table = CountTable::zeros(responses.clone(), covariates.clone());
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        let bit = |col: usize, name: &str| -> Result<usize, CliError> {
            match record.get(col) {
                Some("0") => Ok(0),
                Some("1") => Ok(1),
                other => Err(CliError::Data(format!(
                    "line {line}: column `{name}` must be 0 or 1, got {:?}",
                    other.unwrap_or("")
                ))),
            }
        };
        let mut y = 0;
        for (k, &c) in ycols.iter().enumerate() {
            y |= bit(c, &responses.labels()[k])? << k;
        }
        let mut x = 0;
        for (k, &c) in xcols.iter().enumerate() {
            x |= bit(c, &covariates.labels()[k])? << k;
        }
        let n = match count_col {
            None => 1,
            Some(c) => {
                let raw = record.get(c).unwrap_or("");
                raw.parse::<u64>().map_err(|_| {
                    CliError::Data(format!("line {line}: count must be a nonnegative integer, got {raw:?}"))
                })?
            }
        };
        table.add(y, x, n);
    }
    Ok(table)
}

fn header_line(table: &CountTable, extra: Option<&str>) -> String {
    let mut cols: Vec<&str> = table
        .responses()
        .labels()
        .iter()
        .chain(table.covariates().labels())
        .map(String::as_str)
        .collect();
    cols.extend(extra);
    cols.join(",")
}

fn pattern_cells(table: &CountTable, y: usize, x: usize) -> String {
    let p = table.responses().ground_size();
    let q = table.covariates().ground_size();
    (0..p)
        .map(|k| y >> k & 1)
        .chain((0..q).map(|k| x >> k & 1))
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes the nonzero cells in `counts` format.
pub fn export_counts(table: &CountTable) -> String {
    let mut out = header_line(table, Some("count"));
    out.push('\n');
    for x in 0..table.n_cols() {
        for y in 0..table.n_rows() {
            let n = table.get(y, x);
            if n > 0 {
                out.push_str(&format!("{},{n}\n", pattern_cells(table, y, x)));
            }
        }
    }
    out
}

/// Writes one row per subject in `cases` format.
pub fn export_cases(table: &CountTable) -> String {
    let mut out = header_line(table, None);
    out.push('\n');
    for x in 0..table.n_cols() {
        for y in 0..table.n_rows() {
            let row = pattern_cells(table, y, x);
            for _ in 0..table.get(y, x) {
                out.push_str(&row);
                out.push('\n');
            }
        }
    }
    out
}

/// Parses a zero-set file: one `D;E` pair per line in brace notation, with
/// `#` starting a comment.
pub fn parse_zero_set(
    text: &str,
    responses: &SubsetLattice,
    covariates: &SubsetLattice,
) -> Result<BTreeSet<(usize, usize)>, CliError> {
    let mut zeros = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Config(format!("zero set, line {}: {msg}", i + 1));
        let (d, e) = line
            .split_once(';')
            .ok_or_else(|| bad(format!("expected `D;E`, got {line:?}")))?;
        let d = responses.parse(d).map_err(|e| bad(e.to_string()))?;
        let e = covariates.parse(e).map_err(|e| bad(e.to_string()))?;
        if d == 0 {
            return Err(bad("the empty response set cannot be constrained".into()));
        }
        zeros.insert((d, e));
    }
    Ok(zeros)
}

pub fn format_zero_set(
    zeros: &BTreeSet<(usize, usize)>,
    responses: &SubsetLattice,
    covariates: &SubsetLattice,
) -> String {
    let mut pairs: Vec<_> = zeros.iter().copied().collect();
    pairs.sort_by_key(|&(d, e)| crate::inference::coefficient_order(d, e));
    pairs
        .iter()
        .map(|&(d, e)| format!("{};{}\n", responses.format(d), covariates.format(e)))
        .collect()
}

pub(crate) fn read_zero_set(cfg: &RunConfig) -> Result<BTreeSet<(usize, usize)>, CliError> {
    match &cfg.zeros {
        None => Ok(BTreeSet::new()),
        Some(path) => parse_zero_set(&read_file(path)?, &cfg.response_lattice()?, &cfg.covariate_lattice()?),
    }
}

/// Parses a tab-separated parameter matrix. The first header cell names the
/// kind (`pi`, `mu`, `log_mu`, `gamma`, `beta_mu`, `beta_gamma`), the rest
/// are covariate subsets; each following row starts with a response subset.
/// Every cell must appear exactly once, in any order.
pub fn parse_matrix(
    text: &str,
    responses: &SubsetLattice,
    covariates: &SubsetLattice,
) -> Result<ParamMatrix, CliError> {
    let mut lines = text
        .lines()
        .map(str::trim_end)
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| CliError::Data("empty matrix file".into()))?;
    let mut cells = header.split('\t');
    let kind_name = cells.next().unwrap_or("").trim();
    let kind = ParamKind::from_name(kind_name)
        .ok_or_else(|| CliError::Data(format!("unknown parameter kind {kind_name:?}")))?;
    let cols = cells.map(|c| covariates.parse(c)).collect::<Result<Vec<_>, _>>()?;
    let col_set: BTreeSet<usize> = cols.iter().copied().collect();
    if col_set.len() != covariates.size() || cols.len() != covariates.size() {
        return Err(CliError::Data(format!(
            "matrix header must list each of the {} covariate subsets once",
            covariates.size()
        )));
    }
    let mut values = vec![f64::NAN; responses.size() * covariates.size()];
    let mut seen = HashMap::new();
    for (i, line) in lines {
        let mut cells = line.split('\t');
        let d = responses.parse(cells.next().unwrap_or(""))?;
        if seen.insert(d, i).is_some() {
            return Err(CliError::Data(format!("line {}: row {} repeated", i + 1, responses.format(d))));
        }
        let row: Vec<&str> = cells.collect();
        if row.len() != cols.len() {
            return Err(CliError::Data(format!(
                "line {}: expected {} values, got {}",
                i + 1,
                cols.len(),
                row.len()
            )));
        }
        for (&e, raw) in cols.iter().zip(row) {
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Data(format!("line {}: not a number: {raw:?}", i + 1)))?;
            values[d * covariates.size() + e] = v;
        }
    }
    if seen.len() != responses.size() {
        return Err(CliError::Data(format!(
            "matrix must have one row per response subset ({} expected, {} given)",
            responses.size(),
            seen.len()
        )));
    }
    Ok(ParamMatrix::new(kind, responses.clone(), covariates.clone(), values)?)
}

/// Renders a matrix in the format read by [`parse_matrix`], rows and columns
/// in display order, with `decimals` fractional digits.
pub fn render_matrix(m: &ParamMatrix, decimals: usize) -> String {
    let rows = m.rows().display_order();
    let cols = m.cols().display_order();
    let mut out = m.kind().name().to_string();
    for &e in &cols {
        out.push('\t');
        out.push_str(&m.cols().format(e));
    }
    out.push('\n');
    for &d in &rows {
        out.push_str(&m.rows().format(d));
        for &e in &cols {
            let v = m.get(d, e);
            out.push('\t');
            out.push_str(&if decimals == TSV_DECIMALS { fmt_num(v) } else { format!("{v:.decimals$}") });
        }
        out.push('\n');
    }
    out
}

pub(crate) fn matrix_json(m: &ParamMatrix) -> Value {
    let rows = m.rows().display_order();
    let cols = m.cols().display_order();
    json!({
        "kind": m.kind().name(),
        "columns": cols.iter().map(|&e| m.cols().format(e)).collect::<Vec<_>>(),
        "rows": rows.iter().map(|&d| json!({
            "D": m.rows().format(d),
            "values": cols.iter().map(|&e| json_num(m.get(d, e))).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub(crate) fn read_matrix(cfg: &RunConfig) -> Result<ParamMatrix, CliError> {
    parse_matrix(&read_file(&cfg.input)?, &cfg.response_lattice()?, &cfg.covariate_lattice()?)
}
