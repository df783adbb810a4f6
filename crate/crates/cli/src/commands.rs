//! Subcommand bodies. Every function writes one artifact and, for
//! stochastic commands, a metadata record carrying the seed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use wishart_core::montecarlo::{mc_risk, mc_risk_via_moments, stream, WishartSampler};
use wishart_core::priors::canonical_hyperparams;
use wishart_core::regions::{conjecture_diagnostic, v_estimate};
use wishart_core::risk::{asympt_part_risk, exact_risk, leading_part_risk, part_risk_exact};
use wishart_core::{ConeElement, Execution, McConfig, Partition, PriorKind};

use crate::config::{CommandKind, RunConfig};
use crate::CliError;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn meta_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Sidecar for CSV artifacts: next to the file, or on stderr for stdout runs.
fn write_meta(output: Option<&Path>, meta: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(meta).map_err(io::Error::from)?;
    match output {
        Some(p) => std::fs::write(meta_path(p), text + "\n")?,
        None => eprintln!("{text}"),
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        CommandKind::Priors => priors(cfg),
        CommandKind::Risk => risk(cfg),
        CommandKind::Scan => scan(cfg),
        CommandKind::Mc => mc(cfg),
        CommandKind::Asympt => asympt(cfg),
        CommandKind::Sample => sample(cfg),
    }
}

fn execution(cfg: &RunConfig) -> Execution {
    if cfg.threads == Some(1) {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn dimensions(p: &Partition) -> Value {
    json!({
        "n": p.cone().n(),
        "h": p.h(),
        "blocks": p.blocks(),
        "cum_rank": (0..p.h()).map(|i| p.cum_rank(i)).collect::<Vec<_>>(),
        "cum_dim": (0..p.h()).map(|i| p.cum_dim(i)).collect::<Vec<_>>(),
        "ratio": (0..p.h()).map(|i| p.ratio(i)).collect::<Vec<_>>(),
    })
}

fn priors(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.partition();
    let t = |kind| canonical_hyperparams(&p, kind).0;
    let out = json!({
        "config": cfg,
        "t_jeffreys": t(PriorKind::Jeffreys),
        "t_reference": t(PriorKind::Reference),
        "t_right_invariant": t(PriorKind::RightInvariant),
        "dimensions": dimensions(&p),
    });
    write_json(cfg.output.as_deref(), &out)
}

fn risk(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.partition();
    let report = exact_risk(&p, cfg.t.as_ref().expect("validated"), cfg.mu.unwrap(), cfg.nu.unwrap())?;
    write_json(cfg.output.as_deref(), &json!({ "config": cfg, "report": report }))
}

fn scan(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.partition();
    let mus = match (&cfg.mu_list, cfg.mu) {
        (Some(list), _) => list.clone(),
        (None, Some(mu)) => vec![mu],
        (None, None) => unreachable!("validated"),
    };
    let grid = cfg.grid.expect("validated");
    let k = p.block(0);
    let region = v_estimate(cfg.cone(), k, cfg.nu.unwrap(), &mus, &grid, execution(cfg))?;
    let mut w = open_output(cfg.output.as_deref())?;
    region.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    let meta = json!({
        "config": cfg,
        "member_count": region.member_count(),
        "grid_points": grid.len(),
        "conjecture": conjecture_diagnostic(cfg.cone(), k, &region)?,
    });
    write_meta(cfg.output.as_deref(), &meta)
}

fn mc(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.partition();
    let t = cfg.t.as_ref().expect("validated");
    let (mu, nu) = (cfg.mu.unwrap(), cfg.nu.unwrap());
    let xi = cfg.xi_or_identity();
    let mc_cfg = McConfig { execution: execution(cfg), ..cfg.mc.expect("validated") };
    let s = cfg.hyper_s();
    let est = mc_risk(&p, &s, t, mu, nu, &xi, &mc_cfg)?;
    let (target, target_se, method) = if s.is_zero() {
        (exact_risk(&p, t, mu, nu)?.total, 0.0, "exact")
    } else {
        // an independent stream for the moment-based reference value
        let ref_cfg = McConfig { seed: mc_cfg.seed.wrapping_add(1), ..mc_cfg };
        let r = mc_risk_via_moments(&p, &s, t, mu, nu, &xi, &ref_cfg)?;
        (r.mean, r.std_error, "log_det_moments")
    };
    let z = (est.mean - target) / (est.std_error.powi(2) + target_se.powi(2)).sqrt();
    let out = json!({
        "config": cfg,
        "metadata": { "seed": mc_cfg.seed, "n_outer": mc_cfg.n_outer, "n_inner": mc_cfg.n_inner },
        "estimate": est.mean,
        "std_error": est.std_error,
        "n_total": est.n_total,
        "exact": target,
        "exact_std_error": target_se,
        "exact_method": method,
        "z_score": z,
    });
    write_json(cfg.output.as_deref(), &out)
}

fn asympt(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.partition();
    let t = cfg.t.as_ref().expect("validated");
    let nu = cfg.nu.unwrap();
    let mut w = open_output(cfg.output.as_deref())?;
    writeln!(w, "mu,block,exact,asympt,abs_error,leading")?;
    for &mu in cfg.mu_list.as_ref().expect("validated") {
        for i in 0..p.h() {
            let exact = part_risk_exact(&p, i, t[i], mu, nu)?;
            let approx = asympt_part_risk(&p, i, t[i], mu, nu);
            let lead = leading_part_risk(&p, i, mu, nu);
            writeln!(w, "{mu},{},{exact},{approx},{},{lead}", i + 1, (exact - approx).abs())?;
        }
    }
    w.flush()?;
    drop(w);
    write_meta(cfg.output.as_deref(), &json!({ "config": cfg }))
}

fn sample(cfg: &RunConfig) -> Result<(), CliError> {
    let cone = cfg.cone();
    let xi = cfg.xi_or_identity();
    let sampler = WishartSampler::new(cone, cfg.mu.unwrap(), &xi)?;
    let seed = cfg.mc.expect("validated").seed;
    let mut w = open_output(cfg.output.as_deref())?;
    writeln!(w, "draw,row,col,re,im")?;
    for j in 0..cfg.n_draws.expect("validated") {
        let x: ConeElement = sampler.sample(&mut stream(seed, j as u64));
        for a in 0..cone.r() {
            for b in 0..cone.r() {
                let z = x.get(a, b);
                writeln!(w, "{j},{a},{b},{},{}", z.re, z.im)?;
            }
        }
    }
    w.flush()?;
    drop(w);
    write_meta(cfg.output.as_deref(), &json!({ "config": cfg, "metadata": { "seed": seed } }))
}
