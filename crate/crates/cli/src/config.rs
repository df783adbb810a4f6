//! Flag and config-file resolution into a validated [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use wishart_core::priors::canonical_hyperparams;
use wishart_core::{ConeElement, ConeSpec, Execution, GridSpec, HyperS, HyperT, McConfig, Partition, PriorKind};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "wishart-risk", version, about = "KL prediction risks of Wishart predictive distributions")]
pub struct Cli {
    /// Worker thread cap for grid scans and Monte Carlo.
    #[arg(long, global = true, env = "WISHART_THREADS")]
    pub threads: Option<usize>,
    /// TOML file with default values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical hyperparameters t_J, t_C, t_R and partition dimensions.
    Priors {
        #[command(flatten)]
        cone: ConeArgs,
    },
    /// Exact risk report as JSON.
    Risk {
        #[command(flatten)]
        cone: ConeArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// NRD grid for a two-block split as CSV.
    Scan {
        #[command(flatten)]
        cone: ConeArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        /// Several sample sizes; the output is the pointwise intersection.
        #[arg(long, allow_hyphen_values = true)]
        mu_list: Option<String>,
        /// t1_min:t1_max:n,t2_min:t2_max:n
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo risk estimate against the exact value.
    Mc {
        #[command(flatten)]
        cone: ConeArgs,
        #[command(flatten)]
        sizes: SizeArgs,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        n_outer: Option<usize>,
        #[arg(long)]
        n_inner: Option<usize>,
        /// JSON matrix file for a proper-prior scale s.
        #[arg(long)]
        s: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact block risks against their large-μ expansion as CSV.
    Asympt {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        nu: Option<f64>,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, allow_hyphen_values = true)]
        mu_list: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Wishart draws as CSV.
    Sample {
        #[command(flatten)]
        cone: ConeArgs,
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Number of draws.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Peirce invariant: 1 real, 2 complex.
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Block sizes, e.g. 1,2.
    #[arg(long)]
    pub partition: Option<String>,
    /// Two-block split (k, r − k).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// jeffreys, reference, right_invariant, or explicit values a,b,...
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON matrix file for ξ; the identity when absent.
    #[arg(long)]
    pub xi: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// A list given either as a comma-separated string or as an array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Flex {
    Text(String),
    Numbers(Vec<f64>),
}

impl Flex {
    fn into_text(self) -> String {
        match self {
            Flex::Text(s) => s,
            Flex::Numbers(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        }
    }
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub threads: Option<usize>,
    pub d: Option<u32>,
    pub r: Option<usize>,
    pub partition: Option<Flex>,
    pub k: Option<usize>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub t: Option<Flex>,
    pub mu_list: Option<Flex>,
    pub grid: Option<String>,
    pub seed: Option<u64>,
    pub xi: Option<PathBuf>,
    pub s: Option<PathBuf>,
    pub n_outer: Option<usize>,
    pub n_inner: Option<usize>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Priors,
    Risk,
    Scan,
    Mc,
    Asympt,
    Sample,
}

/// Fully validated run description; echoed into every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub d: u32,
    pub r: usize,
    pub partition: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<HyperT>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<ConeElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<ConeElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_draws: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn partition(&self) -> Partition {
        Partition::new(ConeSpec::new(self.d, self.r).expect("validated"), self.partition.clone()).expect("validated")
    }

    pub fn cone(&self) -> ConeSpec {
        ConeSpec::new(self.d, self.r).expect("validated")
    }

    pub fn hyper_s(&self) -> HyperS {
        let p = self.partition();
        match &self.s {
            Some(s) => HyperS::from_matrix(&p, s).expect("validated"),
            None => HyperS::zero(&p),
        }
    }

    pub fn xi_or_identity(&self) -> ConeElement {
        self.xi.clone().unwrap_or_else(|| ConeElement::identity(self.d, self.r))
    }
}

const DEFAULT_SEED: u64 = 1;
const DEFAULT_N_OUTER: usize = 100_000;
const DEFAULT_N_INNER: usize = 4;
const DEFAULT_DRAWS: usize = 1000;
const DEFAULT_ASYMPT_MUS: [f64; 7] = [10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses a real, accepting the Unicode minus sign.
fn parse_real(s: &str, what: &str) -> Result<f64, CliError> {
    let cleaned = s.trim().replace('\u{2212}', "-");
    let v: f64 = cleaned.parse().map_err(|_| usage(format!("{what}: cannot parse '{s}' as a number")))?;
    if !v.is_finite() {
        return Err(usage(format!("{what} must be finite")));
    }
    Ok(v)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|x| parse_real(x, what)).collect()
}

fn parse_blocks(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|x| {
            let v = parse_real(x, "partition")?;
            if v < 1.0 || v.fract() != 0.0 {
                return Err(usage(format!("partition entries must be positive integers, got '{}'", x.trim())));
            }
            Ok(v as usize)
        })
        .collect()
}

pub fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let axes: Vec<&str> = s.split(',').collect();
    if axes.len() != 2 {
        return Err(usage("grid must look like t1_min:t1_max:n,t2_min:t2_max:n"));
    }
    let mut parsed = Vec::new();
    for axis in axes {
        let parts: Vec<&str> = axis.split(':').collect();
        if parts.len() != 3 {
            return Err(usage("grid must look like t1_min:t1_max:n,t2_min:t2_max:n"));
        }
        let n: usize = parts[2].trim().parse().map_err(|_| usage(format!("grid resolution '{}' is not a count", parts[2])))?;
        parsed.push((parse_real(parts[0], "grid")?, parse_real(parts[1], "grid")?, n));
    }
    if parsed[0].2 != parsed[1].2 {
        return Err(usage("grid resolution must be the same on both axes"));
    }
    GridSpec::new((parsed[0].0, parsed[0].1), (parsed[1].0, parsed[1].1), parsed[0].2).map_err(CliError::from)
}

fn read_matrix(path: &Path, d: u32, r: usize, what: &str) -> Result<ConeElement, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {what} file {}: {e}", path.display())))?;
    let m = ConeElement::from_json_str(d, &text).map_err(|e| usage(format!("{what}: {e}")))?;
    if m.rank() != r {
        return Err(usage(format!("{what} must be {r}x{r}, got rank {}", m.rank())));
    }
    Ok(m)
}

fn resolve_hyper(p: &Partition, text: &str) -> Result<(HyperT, String), CliError> {
    if let Ok(kind) = text.parse::<PriorKind>() {
        return Ok((canonical_hyperparams(p, kind), kind.name().to_string()));
    }
    let t = HyperT(parse_list(text, "t").map_err(|_| {
        usage(format!("t must be jeffreys, reference, right_invariant or a list of {} numbers, got '{text}'", p.h()))
    })?);
    t.check(p)?;
    Ok((t, "explicit".to_string()))
}

/// Values supplied for one run, after merging flags over the config file.
struct Merged {
    d: Option<u32>,
    r: Option<usize>,
    partition: Option<String>,
    k: Option<usize>,
}

impl Merged {
    fn new(cone: &ConeArgs, file: &Settings) -> Self {
        Merged {
            d: cone.d.or(file.d),
            r: cone.r.or(file.r),
            partition: cone.partition.clone().or_else(|| file.partition.clone().map(Flex::into_text)),
            k: cone.k.or(file.k),
        }
    }

    fn partition(&self) -> Result<Partition, CliError> {
        let d = self.d.ok_or_else(|| usage("--d is required"))?;
        let cone = ConeSpec::new(d, self.r.unwrap_or(0).max(1))?;
        let blocks = match (&self.partition, self.k) {
            (Some(_), Some(_)) => return Err(usage("give either --partition or --k, not both")),
            (Some(text), None) => parse_blocks(text)?,
            (None, Some(k)) => {
                let r = self.r.ok_or_else(|| usage("--r is required"))?;
                if k == 0 || k >= r {
                    return Err(usage(format!("k must satisfy 0 < k < r = {r}, got {k}")));
                }
                vec![k, r - k]
            }
            (None, None) => vec![self.r.ok_or_else(|| usage("--r is required"))?],
        };
        let total: usize = blocks.iter().sum();
        let r = self.r.unwrap_or(total);
        if total != r {
            return Err(usage(format!("partition {blocks:?} does not sum to r = {r}")));
        }
        Ok(Partition::new(ConeSpec::new(cone.d(), r)?, blocks)?)
    }
}

fn required(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

fn check_size(cone: ConeSpec, v: f64, name: &str) -> Result<f64, CliError> {
    if !v.is_finite() {
        return Err(usage(format!("{name} must be finite")));
    }
    let lo = cone.gamma_threshold();
    if v <= lo {
        return Err(usage(format!("{name} must exceed (r-1)d/2 = {lo}, got {v}")));
    }
    Ok(v)
}

fn check_proper(p: &Partition, t: &HyperT, mu: f64) -> Result<(), CliError> {
    if !t.in_domain(p, mu) {
        let bounds: Vec<f64> = (0..p.h()).map(|i| wishart_core::priors::domain_bound(p, i, mu)).collect();
        return Err(usage(format!(
            "t = {:?} must exceed -mu - (r_(i)-k^(i))d/2 - 1 = {bounds:?} componentwise",
            t.values()
        )));
    }
    Ok(())
}

/// Parses argv (including the program name) and validates every constraint
/// the selected subcommand depends on.
pub fn parse_and_validate<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    resolve(cli)
}

pub fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(usage("threads must be at least 1"));
    }
    let list = |flag: &Option<String>, key: &Option<Flex>| flag.clone().or_else(|| key.clone().map(Flex::into_text));

    let (kind, cone_args) = match &cli.command {
        Command::Priors { cone } => (CommandKind::Priors, cone),
        Command::Risk { cone, .. } => (CommandKind::Risk, cone),
        Command::Scan { cone, .. } => (CommandKind::Scan, cone),
        Command::Mc { cone, .. } => (CommandKind::Mc, cone),
        Command::Asympt { cone, .. } => (CommandKind::Asympt, cone),
        Command::Sample { cone, .. } => (CommandKind::Sample, cone),
    };
    let p = Merged::new(cone_args, &file).partition()?;
    let cone = p.cone();
    let mut cfg = RunConfig {
        command: kind,
        threads,
        d: cone.d(),
        r: cone.r(),
        partition: p.blocks().to_vec(),
        mu: None,
        nu: None,
        mu_list: None,
        t: None,
        t_source: None,
        grid: None,
        xi: None,
        s: None,
        mc: None,
        n_draws: None,
        output: None,
    };

    match cli.command {
        Command::Priors { .. } => {}
        Command::Risk { sizes, hyper, out, .. } => {
            let mu = check_size(cone, required(sizes.mu.or(file.mu), "mu")?, "mu")?;
            let nu = check_size(cone, required(sizes.nu.or(file.nu), "nu")?, "nu")?;
            let text = list(&hyper.t, &file.t).ok_or_else(|| usage("--t is required"))?;
            let (t, source) = resolve_hyper(&p, &text)?;
            check_proper(&p, &t, mu)?;
            cfg.mu = Some(mu);
            cfg.nu = Some(nu);
            cfg.t = Some(t);
            cfg.t_source = Some(source);
            cfg.output = out.output.or(file.output);
        }
        Command::Scan { sizes, mu_list, grid, out, .. } => {
            if p.h() != 2 {
                return Err(usage(format!("scan needs a two-block partition, got {:?}", p.blocks())));
            }
            let nu = check_size(cone, required(sizes.nu.or(file.nu), "nu")?, "nu")?;
            let mus = match (sizes.mu.or(file.mu), list(&mu_list, &file.mu_list)) {
                (Some(_), Some(_)) if sizes.mu.is_some() && mu_list.is_some() => {
                    return Err(usage("give either --mu or --mu-list, not both"))
                }
                // a flag beats the config file, whichever of the two it is
                (Some(mu), _) if sizes.mu.is_some() => vec![mu],
                (_, Some(text)) if mu_list.is_some() => parse_list(&text, "mu-list")?,
                (Some(mu), None) => vec![mu],
                (None, Some(text)) => parse_list(&text, "mu-list")?,
                (Some(_), Some(_)) => return Err(usage("config gives both mu and mu_list")),
                (None, None) => return Err(usage("--mu or --mu-list is required")),
            };
            if mus.is_empty() {
                return Err(usage("mu-list must not be empty"));
            }
            for &mu in &mus {
                check_size(cone, mu, "mu")?;
            }
            let grid_text = grid.or(file.grid).ok_or_else(|| usage("--grid is required"))?;
            cfg.grid = Some(parse_grid(&grid_text)?);
            cfg.nu = Some(nu);
            if mus.len() == 1 {
                cfg.mu = Some(mus[0]);
            } else {
                cfg.mu_list = Some(mus);
            }
            cfg.output = out.output.or(file.output);
        }
        Command::Mc { sizes, hyper, sampling, n_outer, n_inner, s, out, .. } => {
            let mu = check_size(cone, required(sizes.mu.or(file.mu), "mu")?, "mu")?;
            let nu = check_size(cone, required(sizes.nu.or(file.nu), "nu")?, "nu")?;
            let text = list(&hyper.t, &file.t).ok_or_else(|| usage("--t is required"))?;
            let (t, source) = resolve_hyper(&p, &text)?;
            check_proper(&p, &t, mu)?;
            let xi = match sampling.xi.or(file.xi) {
                Some(path) => read_matrix(&path, cone.d(), cone.r(), "xi")?,
                None => ConeElement::identity(cone.d(), cone.r()),
            };
            if !xi.is_pd() {
                return Err(CliError::Numerical("xi is not positive definite".into()));
            }
            if let Some(path) = s.or(file.s) {
                let m = read_matrix(&path, cone.d(), cone.r(), "s")?;
                HyperS::from_matrix(&p, &m)?;
                cfg.s = Some(m);
            }
            let mc = McConfig {
                seed: sampling.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
                n_outer: n_outer.or(file.n_outer).unwrap_or(DEFAULT_N_OUTER),
                n_inner: n_inner.or(file.n_inner).unwrap_or(DEFAULT_N_INNER),
                execution: Execution::Parallel,
            };
            mc.check()?;
            cfg.mu = Some(mu);
            cfg.nu = Some(nu);
            cfg.t = Some(t);
            cfg.t_source = Some(source);
            cfg.xi = Some(xi);
            cfg.mc = Some(mc);
            cfg.output = out.output.or(file.output);
        }
        Command::Asympt { nu, hyper, mu_list, out, .. } => {
            let nu = check_size(cone, required(nu.or(file.nu), "nu")?, "nu")?;
            let text = list(&hyper.t, &file.t).unwrap_or_else(|| "right_invariant".to_string());
            let (t, source) = resolve_hyper(&p, &text)?;
            let mus = match list(&mu_list, &file.mu_list) {
                Some(text) => parse_list(&text, "mu-list")?,
                None => DEFAULT_ASYMPT_MUS.to_vec(),
            };
            for &mu in &mus {
                check_size(cone, mu, "mu")?;
                check_proper(&p, &t, mu)?;
            }
            cfg.nu = Some(nu);
            cfg.mu_list = Some(mus);
            cfg.t = Some(t);
            cfg.t_source = Some(source);
            cfg.output = out.output.or(file.output);
        }
        Command::Sample { mu, sampling, n, out, .. } => {
            let mu = check_size(cone, required(mu.or(file.mu), "mu")?, "mu")?;
            let xi = match sampling.xi.or(file.xi) {
                Some(path) => read_matrix(&path, cone.d(), cone.r(), "xi")?,
                None => ConeElement::identity(cone.d(), cone.r()),
            };
            if !xi.is_pd() {
                return Err(CliError::Numerical("xi is not positive definite".into()));
            }
            let n = n.or(file.n).unwrap_or(DEFAULT_DRAWS);
            if n == 0 {
                return Err(usage("n must be at least 1"));
            }
            cfg.mu = Some(mu);
            cfg.xi = Some(xi);
            cfg.mc = Some(McConfig {
                seed: sampling.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
                n_outer: n,
                n_inner: 1,
                execution: Execution::Parallel,
            });
            cfg.n_draws = Some(n);
            cfg.output = out.output.or(file.output);
        }
    }
    Ok(cfg)
}
