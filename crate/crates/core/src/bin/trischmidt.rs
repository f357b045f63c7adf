use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use trischmidt::entanglement::{
    closed_form_purity, jacobi_coefficients, makarov_lambda, mode_spectrum, Axis, Bipartition,
};
use trischmidt::report::{
    fmt17, fmt9, to_json, CoefficientDocument, ReductionDocument, SpectrumDocument, SurfaceDocument,
};
use trischmidt::surface::{purity_surface, SurfaceRequest, DEFAULT_GRID_POINTS};
use trischmidt::verify::{self, VerifyConfig};
use trischmidt::{coefficients_k16, coefficients_sum, mixing_matrix, Angles, Error, Excitation};

#[derive(Parser)]
#[command(name = "trischmidt", version, about = "Schmidt decompositions of three coupled harmonic oscillators")]
struct Cli {
    /// TOML file with run settings (tolerance, quadrature_order, skip, seed, format, out)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the output document here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Doc,
}

#[derive(Subcommand)]
enum Command {
    /// Schmidt amplitudes A^{k,l} of one eigenstate
    Coeffs {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Route::Sum)]
        route: Route,
    },
    /// Mode spectrum and purity for one bipartition
    Purity {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value = "A")]
        bipartition: String,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Purity over a (theta, phi) grid at fixed vphi
    Surface {
        #[arg(long, default_value = "A")]
        bipartition: String,
        #[arg(long, value_parser = parse_excitation, default_value = "0,0,1")]
        n: Excitation,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        vphi: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        theta_range: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        phi_range: Option<(f64, f64)>,
    },
    /// Two-oscillator reduction at theta = vphi = 0
    Reduce {
        #[arg(long)]
        n1: u32,
        #[arg(long)]
        n2: u32,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// Run the self-verification suite
    Verify {
        /// Stage to skip; repeat or separate with commas
        #[arg(long, value_delimiter = ',')]
        skip: Vec<String>,
        /// Replace every upper-bound tolerance
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        quadrature_order: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct StateArgs {
    /// Quantum numbers n1,n2,n3
    #[arg(long, value_parser = parse_excitation)]
    n: Excitation,
    /// Mixing angles theta,vphi,phi in radians
    #[arg(long, value_parser = parse_angles, default_value = "0,0,0", allow_hyphen_values = true)]
    angles: Angles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Sum,
    K16,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Direct,
    Closed,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    units: Option<String>,
    tolerance: Option<f64>,
    quadrature_order: Option<usize>,
    #[serde(default)]
    skip: Vec<String>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(u) = &cfg.units {
            if u != "dimensionless" {
                return Err(CliError::Usage(format!(
                    "{}: unsupported unit system '{u}' (only 'dimensionless')",
                    path.display()
                )));
            }
        }
        if let Some(t) = cfg.tolerance {
            if !(t > 0.0) {
                return Err(CliError::Usage(format!("{}: tolerance must be positive", path.display())));
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn parse_triple<T: std::str::FromStr>(s: &str, what: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated {what}, got '{s}'"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("'{p}' is not a valid {what}"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

fn parse_excitation(s: &str) -> Result<Excitation, String> {
    let [a, b, c] = parse_triple::<u32>(s, "non-negative integers")?;
    Excitation::new(a, b, c).map_err(|e| e.to_string())
}

fn parse_angles(s: &str) -> Result<Angles, String> {
    let [t, v, p] = parse_triple::<f64>(s, "decimal numbers")?;
    if ![t, v, p].iter().all(|x| x.is_finite()) {
        return Err("angles must be finite".into());
    }
    Ok(Angles::new(t, v, p))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|_| format!("'{a}' is not a decimal number"))?;
            let b: f64 = b.parse().map_err(|_| format!("'{b}' is not a decimal number"))?;
            Ok((a, b))
        }
        _ => Err(format!("expected lo,hi, got '{s}'")),
    }
}

struct Output {
    path: Option<PathBuf>,
    format: Option<Format>,
}

impl Output {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// Writes the document; the summary goes to stdout when a file was written
    /// and to stderr otherwise.
    fn emit(&self, document: &str, summary: &str) -> Result<(), CliError> {
        match &self.path {
            Some(path) => {
                fs::write(path, document)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                print!("{summary}");
            }
            None => {
                std::io::stdout()
                    .write_all(document.as_bytes())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
                eprint!("{summary}");
            }
        }
        Ok(())
    }
}

fn parse_bipartition(s: &str) -> Result<Bipartition, CliError> {
    s.parse().map_err(CliError::from)
}

fn cmd_coeffs(state: &StateArgs, route: Route, out: &Output) -> Result<(), CliError> {
    let m = mixing_matrix(&state.angles);
    let doc = match route {
        Route::Sum => CoefficientDocument::new(&coefficients_sum(&state.n, &m), &state.angles, "sum"),
        Route::K16 => {
            let k = coefficients_k16(&state.n, &m);
            let mut doc = CoefficientDocument::new(&k.matrix, &state.angles, "k16");
            doc.fallback_entries = Some(k.fallback_count());
            doc
        }
        Route::Both => {
            let sum = coefficients_sum(&state.n, &m);
            let k = coefficients_k16(&state.n, &m);
            let mut doc = CoefficientDocument::new(&sum, &state.angles, "both");
            doc.discrepancy = Some(sum.max_abs_diff(&k.matrix));
            doc.fallback_entries = Some(k.fallback_count());
            doc
        }
    };
    let text = match out.format_or(Format::Doc) {
        Format::Doc => to_json(&doc),
        Format::Csv => doc.to_csv(),
    };
    let mut summary = format!("{} entries, norm^2 = {}\n", doc.entries.len(), fmt9(doc.entries.iter().map(|e| e.value * e.value).sum()));
    if let Some(d) = doc.discrepancy {
        summary.push_str(&format!("max |sum - k16| = {}\n", fmt9(d)));
    }
    out.emit(&text, &summary)
}

fn cmd_purity(state: &StateArgs, bipartition: &str, method: Method, out: &Output) -> Result<(), CliError> {
    let p = parse_bipartition(bipartition)?;
    let single = Axis::of(&state.n);
    if method == Method::Closed && single.is_none() {
        return Err(CliError::Usage(format!(
            "--method closed needs a single-axis excitation (exactly one of n1, n2, n3 non-zero), got {:?}",
            state.n.as_array()
        )));
    }
    let spectrum = mode_spectrum(&coefficients_sum(&state.n, &mixing_matrix(&state.angles)), p);
    let method_name = match method {
        Method::Direct => "direct",
        Method::Closed => "closed",
    };
    let mut doc = SpectrumDocument::new(&state.n, &state.angles, &spectrum, method_name);
    if let Some((axis, n)) = single {
        let closed = closed_form_purity(axis, p, n, &state.angles)?;
        doc.closed_form_purity = Some(closed);
        doc.difference = Some(closed - spectrum.purity());
        if method == Method::Closed {
            doc.purity = closed;
        }
    }
    let text = match out.format_or(Format::Doc) {
        Format::Doc => to_json(&doc),
        Format::Csv => doc.to_csv(),
    };
    out.emit(&text, &doc.to_table())
}

fn cmd_surface(req: SurfaceRequest, out: &Output) -> Result<(), CliError> {
    let surface = purity_surface(&req)?;
    let csv = surface.to_csv();
    let summary = format!(
        "{} x {} grid, bipartition {}, n = {:?}, vphi = {}\nmin purity {}\nmax purity {}\n",
        surface.thetas.len(),
        surface.phis.len(),
        req.bipartition,
        req.excitation.as_array(),
        fmt9(req.vphi),
        fmt9(surface.min()),
        fmt9(surface.max())
    );
    let text = match out.format_or(Format::Csv) {
        Format::Csv => csv,
        Format::Doc => to_json(&SurfaceDocument::from(&surface)),
    };
    out.emit(&text, &summary)
}

fn cmd_reduce(n1: u32, n2: u32, phi: f64, out: &Output) -> Result<(), CliError> {
    let coefficients = jacobi_coefficients(n1, n2, phi)?;
    let lambda = makarov_lambda(n1, n2, phi)?;
    let n = Excitation::new(n1, n2, 0)?;
    let tri = coefficients_sum(&n, &mixing_matrix(&Angles::new(0.0, 0.0, phi)));
    let total = n1 + n2;
    let deviation = tri
        .iter()
        .map(|(k, l, _, v)| {
            let want = if l == total - k { coefficients[k as usize] } else { 0.0 };
            (v - want).abs()
        })
        .fold(0.0, f64::max);
    let doc = ReductionDocument {
        n1,
        n2,
        phi,
        lambda_sum: lambda.iter().sum(),
        coefficients,
        lambda,
        deviation,
    };
    let text = match out.format_or(Format::Doc) {
        Format::Doc => to_json(&doc),
        Format::Csv => doc.to_csv(),
    };
    out.emit(&text, &doc.to_table())
}

fn cmd_verify(config: VerifyConfig, out: &Output) -> Result<(), CliError> {
    let start = Instant::now();
    let report = verify::run(&config)?;
    let elapsed = start.elapsed();
    let text = match out.format_or(Format::Doc) {
        Format::Doc => to_json(&report),
        Format::Csv => {
            let mut s = String::from("name,stage,bound,observed,tolerance,margin,pass\n");
            for c in &report.checks {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.name,
                    c.stage,
                    match c.bound {
                        verify::Bound::AtMost => "at_most",
                        verify::Bound::AtLeast => "at_least",
                    },
                    fmt17(c.observed),
                    fmt17(c.tolerance),
                    fmt17(c.margin),
                    c.pass
                ));
            }
            s
        }
    };
    let summary = format!("{}elapsed {:.2} s\n", report.to_table(), elapsed.as_secs_f64());
    out.emit(&text, &summary)?;
    if report.passed {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Failed(format!("failing checks: {}", names.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = Output {
        path: cli.out.or(cfg.out.clone()),
        format: cli.format.or(cfg.format),
    };
    match cli.command {
        Command::Coeffs { state, route } => cmd_coeffs(&state, route, &out),
        Command::Purity { state, bipartition, method } => cmd_purity(&state, &bipartition, method, &out),
        Command::Surface { bipartition, n, vphi, grid_points, theta_range, phi_range } => {
            let mut req = SurfaceRequest::new(parse_bipartition(&bipartition)?, n, vphi);
            req.grid_points = grid_points;
            if let Some(r) = theta_range {
                req.theta_range = r;
            }
            if let Some(r) = phi_range {
                req.phi_range = r;
            }
            cmd_surface(req, &out)
        }
        Command::Reduce { n1, n2, phi } => cmd_reduce(n1, n2, phi, &out),
        Command::Verify { skip, tolerance, quadrature_order, seed } => {
            let defaults = VerifyConfig::default();
            let config = VerifyConfig {
                tolerance: tolerance.or(cfg.tolerance),
                quadrature_order: quadrature_order.or(cfg.quadrature_order),
                skip: if skip.is_empty() { cfg.skip.clone() } else { skip },
                seed: seed.or(cfg.seed).unwrap_or(defaults.seed),
            };
            cmd_verify(config, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
    }
}
