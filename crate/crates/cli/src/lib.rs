//! Command implementations behind the `rdtm` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use rdtm_core::{
    absolute_error_grid, builtin_model, closed_form_agreement, export_figure_data, parse_expr,
    parse_spec_file, render_table, residual_order_check, solve_series, to_latex, Axis, ErrorTable,
    Expr, FigureData, Grid2D, ModelId, PdeSpec, PrecisionContext, Rational, SeriesSolution,
    SweepAxis, TableStyle, Tie,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Table,
    Figure,
    Check,
    Demo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Latex,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "latex" => Ok(OutputFormat::Latex),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected text, latex, csv or json)")),
        }
    }
}

/// A built-in model name or a path to a problem file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Builtin(ModelId),
    File(PathBuf),
}

impl Input {
    pub fn parse(s: &str) -> Input {
        match s.parse::<ModelId>() {
            Ok(id) => Input::Builtin(id),
            Err(_) => Input::File(PathBuf::from(s)),
        }
    }

    fn load(&self) -> Result<PdeSpec> {
        match self {
            Input::Builtin(id) => Ok(builtin_model(*id)),
            Input::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                parse_spec_file(&text).with_context(|| format!("{}", path.display()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandConfig {
    pub subcommand: Subcommand,
    /// Absent only for `demo`.
    pub input: Option<Input>,
    pub order: Option<usize>,
    pub precision: u32,
    pub format: OutputFormat,
    pub grid: Option<String>,
    pub slice: Option<String>,
    pub digits: usize,
    pub out: Option<PathBuf>,
}

impl CommandConfig {
    pub fn new(subcommand: Subcommand, input: Option<Input>) -> Self {
        CommandConfig {
            subcommand,
            input,
            order: None,
            precision: 50,
            format: OutputFormat::Text,
            grid: None,
            slice: None,
            digits: 5,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.order {
            if n < 2 {
                bail!("--order must be at least 2, got {n}");
            }
        }
        if self.precision < 15 {
            bail!("--precision must be at least 15 digits, got {}", self.precision);
        }
        if !(1..=6).contains(&self.digits) {
            bail!("--digits must be between 1 and 6, got {}", self.digits);
        }
        if self.subcommand != Subcommand::Demo && self.input.is_none() {
            bail!("an input (ex1, ex2, ex3 or a problem file) is required");
        }
        Ok(())
    }
}

/// What a command produced: text for the output stream and whether any
/// check failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub success: bool,
}

fn builtin_of(input: &Input) -> Option<ModelId> {
    match input {
        Input::Builtin(id) => Some(*id),
        Input::File(_) => None,
    }
}

fn default_order(sub: Subcommand, model: Option<ModelId>) -> usize {
    match (sub, model) {
        (Subcommand::Table, Some(ModelId::Ex1)) => 8,
        (Subcommand::Table, Some(ModelId::Ex2)) => 16,
        (Subcommand::Table, Some(ModelId::Ex3)) => 20,
        (Subcommand::Figure, Some(ModelId::Ex1)) => 6,
        (Subcommand::Figure, Some(ModelId::Ex2)) => 8,
        _ => 10,
    }
}

/// Parses an exact number such as `0.1`, `-3` or `1/2`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    parse_expr(text.trim(), &[])
        .ok()
        .and_then(|e| e.to_normal().ok())
        .and_then(|nf| nf.as_constant())
        .ok_or_else(|| anyhow!("`{text}` is not an exact number"))
}

enum GridEntry {
    Range(Rational, Rational, Rational),
    Value(Rational),
    Tie(String),
}

/// `t=0.1:1:0.1;x=0.1:1:0.1;y=x` as ordered `(name, entry)` pairs.
fn parse_grid_entries(text: &str) -> Result<Vec<(String, GridEntry)>> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("grid entry `{part}` needs the form name=value"))?;
        let (name, value) = (name.trim().to_string(), value.trim());
        let entry = if value.contains(':') {
            let bounds: Vec<&str> = value.split(':').collect();
            let [a, b, step] = bounds[..] else {
                bail!("range `{value}` needs the form start:stop:step");
            };
            GridEntry::Range(parse_rational(a)?, parse_rational(b)?, parse_rational(step)?)
        } else if value.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            GridEntry::Tie(value.to_string())
        } else {
            GridEntry::Value(parse_rational(value)?)
        };
        out.push((name, entry));
    }
    Ok(out)
}

fn default_table_grid(spec: &PdeSpec, model: Option<ModelId>) -> String {
    let range = if model == Some(ModelId::Ex1) { "0.1:1:0.1" } else { "0.2:1:0.2" };
    let mut text = format!("t={range};{}={range}", spec.spatial_vars[0]);
    for v in &spec.spatial_vars[1..] {
        write!(text, ";{v}={}", spec.spatial_vars[0]).unwrap();
    }
    text
}

/// Builds a table grid: the first two entries are the row and column axes,
/// later entries tie a variable to an axis or fix it.
pub fn parse_table_grid(text: &str) -> Result<Grid2D> {
    let mut entries = parse_grid_entries(text)?.into_iter();
    let mut axis = |role: &str| -> Result<Axis> {
        match entries.next() {
            Some((name, GridEntry::Range(a, b, s))) => Ok(Axis::range(&name, &a, &b, &s)?),
            Some((name, GridEntry::Value(v))) => Ok(Axis::new(&name, vec![v])?),
            Some((name, GridEntry::Tie(_))) => bail!("{role} axis `{name}` must be a range"),
            None => bail!("grid needs a {role} axis"),
        }
    };
    let row = axis("row")?;
    let col = axis("column")?;
    let mut grid = Grid2D::new(row, col);
    for (name, entry) in entries {
        let tie = match entry {
            GridEntry::Tie(target) if target == grid.row.name => Tie::Row,
            GridEntry::Tie(target) if target == grid.col.name => Tie::Col,
            GridEntry::Tie(target) => bail!("`{name}={target}`: `{target}` is not a grid axis"),
            GridEntry::Value(v) => Tie::Fixed(v),
            GridEntry::Range(..) => bail!("`{name}`: tables have exactly two ranged axes"),
        };
        grid = grid.with_tie(&name, tie);
    }
    Ok(grid)
}

fn parse_bindings(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for (name, entry) in parse_grid_entries(text)? {
        match entry {
            GridEntry::Value(v) => {
                out.insert(name, v);
            }
            _ => bail!("slice entry `{name}` must be a single number"),
        }
    }
    Ok(out)
}

fn parse_sweep(text: &str) -> Result<Vec<SweepAxis>> {
    parse_grid_entries(text)?
        .into_iter()
        .map(|(name, entry)| match entry {
            GridEntry::Range(a, b, s) => Ok(SweepAxis::range(&name, &a, &b, &s)?),
            GridEntry::Value(v) => Ok(SweepAxis::new(&name, vec![v])?),
            GridEntry::Tie(_) => bail!("sweep entry `{name}` must be a number or a range"),
        })
        .collect()
}

fn exact_for(spec: &PdeSpec) -> Result<&Expr> {
    spec.exact
        .as_ref()
        .ok_or_else(|| anyhow!("problem `{}` has no exact solution; add an `exact:` field", spec.name))
}

fn solve_output(sol: &SeriesSolution, format: OutputFormat) -> Result<String> {
    let mut out = String::new();
    match format {
        OutputFormat::Text => {
            for (k, v) in sol.spectra.iter().enumerate() {
                writeln!(out, "V_{k} = {v}")?;
            }
            writeln!(out, "u = {}", sol.series_text()?)?;
        }
        OutputFormat::Latex => {
            for (k, v) in sol.spectra.iter().enumerate() {
                writeln!(out, "V_{{{k}}} = {}", to_latex(v))?;
            }
            writeln!(out, "u = {}", to_latex(&sol.series_expr()?))?;
        }
        OutputFormat::Csv => {
            out.push_str("k,V_k\n");
            for (k, v) in sol.spectra.iter().enumerate() {
                writeln!(out, "{k},\"{v}\"")?;
            }
        }
        OutputFormat::Json => {
            let value = json!({
                "problem": sol.spec.name,
                "order": sol.order,
                "spectra": sol.spectra.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "series": sol.series_expr()?.to_string(),
            });
            out = serde_json::to_string_pretty(&value)? + "\n";
        }
    }
    Ok(out)
}

fn axis_json(axis: &Axis) -> Value {
    json!({
        "name": axis.name,
        "values": axis.values.iter().map(rdtm_core::rational_to_decimal).collect::<Vec<_>>(),
    })
}

fn table_output(table: &ErrorTable, format: OutputFormat, digits: usize) -> Result<String> {
    Ok(match format {
        OutputFormat::Text => render_table(table, TableStyle::Plain, digits),
        OutputFormat::Csv => render_table(table, TableStyle::Csv, digits),
        OutputFormat::Latex => render_table(table, TableStyle::Latex, digits),
        OutputFormat::Json => {
            let ties: BTreeMap<&String, String> = table
                .grid
                .ties
                .iter()
                .map(|(v, t)| {
                    let text = match t {
                        Tie::Row => table.grid.row.name.clone(),
                        Tie::Col => table.grid.col.name.clone(),
                        Tie::Fixed(q) => rdtm_core::rational_to_decimal(q),
                    };
                    (v, text)
                })
                .collect();
            let value = json!({
                "order": table.truncation_order,
                "precision": table.precision,
                "rows": axis_json(&table.grid.row),
                "cols": axis_json(&table.grid.col),
                "ties": ties,
                "values": table
                    .values
                    .iter()
                    .map(|r| r.iter().map(|v| v.to_scientific(digits)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&value)? + "\n"
        }
    })
}

fn figure_output(data: &FigureData, format: OutputFormat, digits: usize) -> Result<String> {
    Ok(match format {
        OutputFormat::Text | OutputFormat::Csv => data.to_csv(digits),
        OutputFormat::Json => {
            let rows: Vec<Vec<String>> = data
                .rows
                .iter()
                .map(|r| {
                    let mut cells: Vec<String> = r.coords.iter().map(rdtm_core::rational_to_decimal).collect();
                    cells.extend([&r.series, &r.exact, &r.error].map(|v| v.to_scientific(digits)));
                    cells
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "columns": data.columns, "rows": rows }))? + "\n"
        }
        OutputFormat::Latex => bail!("figure data supports text, csv and json output"),
    })
}

struct CheckSummary {
    text: String,
    json: Value,
    ok: bool,
}

fn check_solution(sol: &SeriesSolution) -> Result<CheckSummary> {
    let report = residual_order_check(sol)?;
    let required = sol.order.saturating_sub(3);
    let residual_ok = report.vanishing_through.is_some_and(|m| m >= required);
    let mut text = match report.vanishing_through {
        Some(m) => format!("residual vanishes through t^{m}"),
        None => "residual does not vanish at t^0".to_string(),
    };
    if !residual_ok {
        write!(text, " (expected through t^{required})")?;
    }
    let mut mismatch = None;
    if let Some(exact) = &sol.spec.exact {
        mismatch = closed_form_agreement(sol, exact)?;
        match mismatch {
            None => write!(text, "; spectra match the Taylor coefficients of {exact} for k<{}", sol.order)?,
            Some(k) => write!(text, "; spectrum V_{k} differs from the Taylor coefficient of {exact}")?,
        }
    }
    let ok = residual_ok && mismatch.is_none();
    let json = json!({
        "problem": sol.spec.name,
        "order": sol.order,
        "residual_vanishing_through": report.vanishing_through,
        "checked_through": report.checked_through,
        "closed_form_mismatch": mismatch,
        "ok": ok,
    });
    Ok(CheckSummary { text, json, ok })
}

fn run_demo(cfg: &CommandConfig, ctx: &PrecisionContext) -> Result<Outcome> {
    let mut out = String::new();
    let mut success = true;
    for id in ModelId::ALL {
        let spec = builtin_model(id);
        let order = default_order(Subcommand::Table, Some(id));
        let sol = solve_series(&spec, order)?;
        let check = check_solution(&sol)?;
        success &= check.ok;
        let grid = parse_table_grid(&default_table_grid(&spec, Some(id)))?;
        let table = absolute_error_grid(&sol, exact_for(&spec)?, &grid, ctx)?;
        let last = table.values.last().and_then(|r| r.last()).expect("non-empty grid");
        writeln!(out, "{id} (N = {order})")?;
        writeln!(out, "  series: u = {}", sol.series_text()?)?;
        writeln!(out, "  check:  {}", check.text)?;
        writeln!(
            out,
            "  table:  {}x{} grid, error at (t=1, {}=1) is {}",
            grid.row.values.len(),
            grid.col.values.len(),
            grid.col.name,
            last.to_scientific(cfg.digits)
        )?;
    }
    Ok(Outcome { output: out, success })
}

/// Executes one command. Errors are reported by the caller; a failed check
/// yields `success: false` with its report in `output`.
pub fn run(cfg: &CommandConfig) -> Result<Outcome> {
    cfg.validate()?;
    let ctx = PrecisionContext::new(cfg.precision)?;
    let outcome = if cfg.subcommand == Subcommand::Demo {
        run_demo(cfg, &ctx)?
    } else {
        let input = cfg.input.as_ref().expect("validated");
        let model = builtin_of(input);
        let spec = input.load()?;
        let order = cfg.order.unwrap_or_else(|| default_order(cfg.subcommand, model));
        let sol = solve_series(&spec, order)?;
        match cfg.subcommand {
            Subcommand::Solve => Outcome {
                output: solve_output(&sol, cfg.format)?,
                success: true,
            },
            Subcommand::Table => {
                let grid_text = cfg.grid.clone().unwrap_or_else(|| default_table_grid(&spec, model));
                let grid = parse_table_grid(&grid_text)?;
                let table = absolute_error_grid(&sol, exact_for(&spec)?, &grid, &ctx)?;
                Outcome {
                    output: table_output(&table, cfg.format, cfg.digits)?,
                    success: true,
                }
            }
            Subcommand::Figure => {
                let slice = match &cfg.slice {
                    Some(s) => parse_bindings(s)?,
                    None if model == Some(ModelId::Ex1) => parse_bindings("y=1/2")?,
                    None => BTreeMap::new(),
                };
                let sweep = match &cfg.grid {
                    Some(g) => parse_sweep(g)?,
                    None => {
                        let mut text = String::from("t=0:1:0.1");
                        for v in spec.spatial_vars.iter().filter(|v| !slice.contains_key(*v)) {
                            write!(text, ";{v}=0:1:0.1")?;
                        }
                        parse_sweep(&text)?
                    }
                };
                let data = export_figure_data(&sol, exact_for(&spec)?, &slice, &sweep, &ctx)?;
                Outcome {
                    output: figure_output(&data, cfg.format, cfg.digits)?,
                    success: true,
                }
            }
            Subcommand::Check => {
                let check = check_solution(&sol)?;
                let output = match cfg.format {
                    OutputFormat::Json => serde_json::to_string_pretty(&check.json)? + "\n",
                    _ => check.text + "\n",
                };
                Outcome {
                    output,
                    success: check.ok,
                }
            }
            Subcommand::Demo => unreachable!(),
        }
    };
    if let Some(path) = &cfg.out {
        std::fs::write(path, &outcome.output).with_context(|| format!("cannot write {}", path.display()))?;
        return Ok(Outcome {
            output: String::new(),
            success: outcome.success,
        });
    }
    Ok(outcome)
}
