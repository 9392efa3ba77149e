//! `hqc`: command-line access to hybrid brackets, consistency checks and
//! Heisenberg-picture simulation.

pub mod config;
pub mod error;
pub mod parse;
pub mod simulate;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use hybrid_core::consistency::{
    associator, certify_subalgebra, jacobi_residual, kappa_linear, leibniz_residual, minimal_membership, nogo_scan,
    ConsistencyError, Product, ResidualReport, Verdict,
};
use hybrid_core::products::{ast_product, hybrid_bracket_form, poisson, quantum_bracket, star_q, SectorSel};
use hybrid_core::{BracketForm, Expression, ProductSpec, Sector, SigmaSpec};

pub use config::RunConfig;
pub use error::CliError;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "HQC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "hqc", version, about = "Hybrid quantum-classical bracket toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Jacobi,
    Leibniz,
    Assoc,
    Reduction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProductKind {
    Ast,
    Star,
    Hybrid,
    Pointwise,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hybrid bracket in all four forms.
    Bracket {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
        /// C-sector scheme `a,b,c`.
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma: String,
        /// Q-sector scheme `a,b,c`.
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma_q: String,
    },
    /// Quantum star product.
    Star {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma_q: String,
    },
    /// Classical-sector product.
    Ast {
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma: String,
    },
    /// Exact identity checks; a nonzero residual is reported, not an error.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[arg(allow_hyphen_values = true)]
        u: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
        #[arg(allow_hyphen_values = true)]
        w: Option<String>,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma: String,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma_q: String,
        /// Product for `assoc`; chosen from the sectors of the inputs when absent.
        #[arg(long, value_enum)]
        product: Option<ProductKind>,
    },
    /// Certify associativity of the algebra generated by classical expressions.
    Certify {
        #[arg(long, num_args = 1.., required = true)]
        generators: Vec<String>,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        sigma: String,
        #[arg(long)]
        max_degree: u32,
    },
    /// Linear generators of the minimal associative subalgebra.
    Kappa {
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
    },
    /// Search for non-associative triples on a grid of schemes.
    NogoScan {
        /// `unit` for {-1,0,1}^3, or `a,b,c;a,b,c;...`.
        #[arg(long, default_value = "unit", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 4)]
        degree: u32,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a simulation described by a JSON configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parse `a,b,c` with each entry a constant expression.
pub fn parse_sigma(text: &str) -> Result<SigmaSpec, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated constants `a,b,c`, got `{text}`"));
    }
    let mut out = Vec::with_capacity(3);
    for (name, part) in ["a", "b", "c"].iter().zip(parts) {
        let e = parse::parse(part).map_err(|e| format!("{name}: {e}"))?;
        let c = e.as_constant().ok_or_else(|| format!("{name} = `{part}` is not a constant"))?;
        out.push(c);
    }
    let c = out.pop().expect("three entries");
    let b = out.pop().expect("three entries");
    let a = out.pop().expect("three entries");
    Ok(SigmaSpec::new(a, b, c))
}

fn expr(text: &str) -> Result<Expression, CliError> {
    parse::parse(text).map_err(|error| CliError::Parse { source_text: text.to_string(), error })
}

fn sigma(text: &str) -> Result<SigmaSpec, CliError> {
    parse_sigma(text).map_err(|e| CliError::Input(format!("--sigma: {e}")))
}

fn spec(sigma_c: &str, sigma_q: &str) -> Result<ProductSpec, CliError> {
    ProductSpec::new(sigma(sigma_c)?, sigma(sigma_q)?).map_err(|e| CliError::Input(e.to_string()))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), error: e }
}

fn verdict(is_zero: bool) -> &'static str {
    if is_zero {
        "zero"
    } else {
        "nonzero"
    }
}

fn write_report(out: &mut dyn Write, label: &str, r: &ResidualReport) -> std::io::Result<()> {
    writeln!(out, "{label}verdict: {}", verdict(r.is_zero))?;
    writeln!(out, "{label}residual: {}", r.residual)
}

fn bracket_command(out: &mut dyn Write, u: &str, v: &str, s: &str, sq: &str) -> Result<(), CliError> {
    let (u, v, spec) = (expr(u)?, expr(v)?, spec(s, sq)?);
    let forms = BracketForm::ALL
        .iter()
        .map(|f| hybrid_bracket_form(&u, &v, &spec, *f).map_err(|e| CliError::Compute(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    writeln!(out, "{}", forms[0]).map_err(io_err)?;
    if forms.iter().all(|f| *f == forms[0]) {
        writeln!(out, "forms F1 F2 F3 F4: agree").map_err(io_err)?;
    } else {
        writeln!(out, "forms F1 F2 F3 F4: disagree").map_err(io_err)?;
        for (name, f) in ["F1", "F2", "F3", "F4"].iter().zip(&forms) {
            writeln!(out, "{name}: {f}").map_err(io_err)?;
        }
    }
    Ok(())
}

fn auto_product(inputs: &[&Expression]) -> ProductKind {
    if inputs.iter().all(|e| e.is_pure(Sector::C)) {
        ProductKind::Ast
    } else if inputs.iter().all(|e| e.is_pure(Sector::Q)) {
        ProductKind::Star
    } else {
        ProductKind::Hybrid
    }
}

/// `{[u, v]}` against the reduced forms for a pure `u`.
fn reduction_residual(u: &Expression, v: &Expression, spec: &ProductSpec) -> Result<Expression, CliError> {
    let full = hybrid_bracket_form(u, v, spec, BracketForm::F3).map_err(|e| CliError::Compute(e.to_string()))?;
    let mut reduced = Expression::zero();
    if u.is_pure(Sector::Q) {
        for (vq, vc) in v.sector_decompose() {
            let qb = quantum_bracket(u, &vq, spec).map_err(|e| CliError::Compute(e.to_string()))?;
            reduced = &reduced + &(&vc * &qb);
        }
    } else if u.is_pure(Sector::C) {
        for (vq, vc) in v.sector_decompose() {
            reduced = &reduced + &(&vq * &poisson(u, &vc, SectorSel::C));
        }
    } else {
        return Err(CliError::Input(format!("reduction needs a pure quantum or pure classical u, got `{u}`")));
    }
    Ok(&full - &reduced)
}

#[allow(clippy::too_many_arguments)]
fn check_command(
    out: &mut dyn Write,
    kind: CheckKind,
    u: &str,
    v: &str,
    w: Option<&str>,
    s: &str,
    sq: &str,
    product: Option<ProductKind>,
) -> Result<(), CliError> {
    let (u, v, spec) = (expr(u)?, expr(v)?, spec(s, sq)?);
    let name = format!("{kind:?}").to_lowercase();
    let w = match (kind, w) {
        (CheckKind::Reduction, Some(_)) => return Err(CliError::Input("check reduction takes two expressions".into())),
        (CheckKind::Reduction, None) => None,
        (_, None) => return Err(CliError::Input(format!("check {name} needs three expressions u v w"))),
        (_, Some(w)) => Some(expr(w)?),
    };
    writeln!(out, "check: {name}").map_err(io_err)?;
    writeln!(out, "sigma: {} sigma_q: {}", spec.sigma_c, spec.sigma_q).map_err(io_err)?;
    match (kind, w) {
        (CheckKind::Jacobi, Some(w)) => write_report(out, "", &jacobi_residual(&u, &v, &w, &spec)).map_err(io_err)?,
        (CheckKind::Leibniz, Some(w)) => {
            let r = leibniz_residual(&u, &v, &w, &spec);
            write_report(out, "hybrid ", &r.hybrid).map_err(io_err)?;
            write_report(out, "pointwise ", &r.pointwise).map_err(io_err)?;
        }
        (CheckKind::Assoc, Some(w)) => {
            let kind = product.unwrap_or_else(|| auto_product(&[&u, &v, &w]));
            let p = match kind {
                ProductKind::Ast => Product::Ast(&spec.sigma_c),
                ProductKind::Star => Product::Star(&spec),
                ProductKind::Hybrid => Product::Hybrid(&spec),
                ProductKind::Pointwise => Product::Pointwise,
            };
            let a = associator(&u, &v, &w, p);
            writeln!(out, "product: {}", format!("{kind:?}").to_lowercase()).map_err(io_err)?;
            writeln!(out, "verdict: {}", verdict(a.is_zero())).map_err(io_err)?;
            writeln!(out, "residual: {a}").map_err(io_err)?;
        }
        (CheckKind::Reduction, None) => {
            let r = reduction_residual(&u, &v, &spec)?;
            writeln!(out, "verdict: {}", verdict(r.is_zero())).map_err(io_err)?;
            writeln!(out, "residual: {r}").map_err(io_err)?;
        }
        _ => unreachable!("arity checked above"),
    }
    Ok(())
}

fn certify_command(out: &mut dyn Write, generators: &[String], s: &str, max_degree: u32) -> Result<(), CliError> {
    let gens = generators.iter().map(|g| expr(g)).collect::<Result<Vec<_>, _>>()?;
    let s = sigma(s)?;
    let names: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
    writeln!(out, "sigma: {s}").map_err(io_err)?;
    writeln!(out, "generators: {}", names.join(", ")).map_err(io_err)?;
    writeln!(out, "max degree: {max_degree}").map_err(io_err)?;
    match certify_subalgebra(&gens, &s, max_degree) {
        Ok(cert) => {
            writeln!(out, "basis size: {}", cert.basis.len()).map_err(io_err)?;
            match cert.verdict {
                Verdict::Certified => writeln!(out, "verdict: certified").map_err(io_err)?,
                Verdict::Refuted { u, v, w, associator } => {
                    writeln!(out, "verdict: refuted").map_err(io_err)?;
                    writeln!(out, "witness: ({u}) ({v}) ({w})").map_err(io_err)?;
                    writeln!(out, "associator: {associator}").map_err(io_err)?;
                }
            }
        }
        Err(ConsistencyError::ClosureEscape { op, u, v }) => {
            writeln!(out, "verdict: not closed").map_err(io_err)?;
            writeln!(out, "escape: {op} of ({u}) and ({v})").map_err(io_err)?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn kappa_command(out: &mut dyn Write, s: &str) -> Result<(), CliError> {
    let s = sigma(s)?;
    let roots = kappa_linear(&s)?;
    writeln!(out, "sigma: {s}").map_err(io_err)?;
    for k in roots {
        match k.to_expression() {
            Some(e) => {
                let m = minimal_membership(&e, &s)?;
                writeln!(out, "kappa: {e}").map_err(io_err)?;
                writeln!(out, "  residual: {}", k.membership_residual(&s)).map_err(io_err)?;
                writeln!(out, "  product check: {}", verdict(m.is_zero)).map_err(io_err)?;
            }
            None => {
                writeln!(out, "kappa: {k}").map_err(io_err)?;
                writeln!(out, "  residual: {}", k.membership_residual(&s)).map_err(io_err)?;
            }
        }
    }
    Ok(())
}

fn nogo_command(out: &mut dyn Write, grid: &str, degree: u32, trials: usize, seed: u64) -> Result<(), CliError> {
    let schemes = if grid == "unit" {
        SigmaSpec::unit_grid()
    } else {
        grid.split(';').map(sigma).collect::<Result<Vec<_>, _>>()?
    };
    match nogo_scan(&schemes, degree, trials, seed) {
        Ok(found) => {
            for w in found {
                writeln!(out, "{}: ({}) ({}) ({}) -> {}", w.sigma, w.u, w.v, w.w, w.associator).map_err(io_err)?;
            }
            writeln!(out, "verdict: every scheme is non-associative").map_err(io_err)?;
        }
        Err(ConsistencyError::WitnessNotFound(missing)) => {
            let names: Vec<String> = missing.iter().map(|s| s.to_string()).collect();
            writeln!(out, "verdict: no witness found for {}", names.join(", ")).map_err(io_err)?;
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|error| CliError::Io { path: path.display().to_string(), error })
}

fn simulate_command(out: &mut dyn Write, path: &std::path::Path) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let config = RunConfig::from_json(&text)?;
    let base = path.parent().unwrap_or_else(|| std::path::Path::new("."));
    let run = config.build(base)?;
    let artifacts = simulate::simulate(&config, &run)?;
    write_file(&run.csv_path, &artifacts.csv)?;
    write_file(&run.json_path, &artifacts.json)?;
    let pass = |b: bool| if b { "pass" } else { "fail" };
    writeln!(out, "rows: {}", artifacts.rows).map_err(io_err)?;
    writeln!(out, "csv: {}", config.output.csv.display()).map_err(io_err)?;
    writeln!(out, "json: {}", config.output.json.display()).map_err(io_err)?;
    writeln!(out, "hybrid audit: {}", pass(artifacts.hybrid_audit_pass)).map_err(io_err)?;
    writeln!(out, "energy drift: {}", pass(artifacts.energy_pass)).map_err(io_err)?;
    Ok(())
}

/// Execute one command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Bracket { u, v, sigma, sigma_q } => bracket_command(out, u, v, sigma, sigma_q),
        Command::Star { u, v, sigma_q } => {
            let spec = spec("0,0,0", sigma_q)?;
            writeln!(out, "{}", star_q(&expr(u)?, &expr(v)?, &spec)).map_err(io_err)
        }
        Command::Ast { u, v, sigma: s } => {
            let s = sigma(s)?;
            writeln!(out, "{}", ast_product(&expr(u)?, &expr(v)?, &s)).map_err(io_err)
        }
        Command::Check { kind, u, v, w, sigma, sigma_q, product } => {
            check_command(out, *kind, u, v, w.as_deref(), sigma, sigma_q, *product)
        }
        Command::Certify { generators, sigma, max_degree } => certify_command(out, generators, sigma, *max_degree),
        Command::Kappa { sigma } => kappa_command(out, sigma),
        Command::NogoScan { grid, degree, trials, seed } => nogo_command(out, grid, *degree, *trials, *seed),
        Command::Simulate { config } => simulate_command(out, config),
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}
