use std::fmt::Write as _;
use std::fs;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use graphon_core::config::{
    build_graphon, cases, parse, Case, GlqrConfig, GsscConfig, SampleConfig, SpectraConfig, SweepConfig, X0Spec,
};
use graphon_core::dynamics::default_steps;
use graphon_core::lqr::{glqr_table, GlqrPlan};
use graphon_core::min_energy::{gssc_table, GsscPlan};
use graphon_core::sampling::{distance_table, grid_network, network_distance, sample_network};
use graphon_core::{Error, GridFunction, Result};

use crate::output::{config_hash, now_unix, Integrator, Manifest, Output};
use crate::{CliError, Format, Kind, Options, SEED_ENV};

/// Named result files of one run, before anything touches the disk.
struct Artifacts {
    files: Vec<(&'static str, String)>,
    cases: usize,
    integrator: Option<Integrator>,
}

pub fn run(kind: Kind, opts: &Options) -> std::result::Result<(), CliError> {
    let bytes = fs::read(&opts.config).map_err(|e| CliError::io(&opts.config, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config(e.to_string()))?;
    let seed = seed_override()?;
    let hash = config_hash(&bytes, seed);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::io(&opts.out, std::io::Error::other(e)))?;
    let art = pool.install(|| compute(kind, text, seed, opts.format))?;

    let mut out = Output::new(&opts.out, format!("{}-{}", kind.name(), &hash[..12]))?;
    let mut names = Vec::new();
    for (suffix, contents) in &art.files {
        let name = out.file_name(suffix, opts.format.extension());
        out.write(&name, contents)?;
        names.push(name);
    }
    let manifest = Manifest {
        command: kind.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: opts.config.display().to_string(),
        config_sha256: hash.clone(),
        seed_override: seed,
        format: opts.format.extension(),
        jobs: pool.current_num_threads(),
        cases: art.cases,
        integrator: art.integrator.unwrap_or_else(|| Integrator::rk4(None, None)),
        outputs: names,
        created_unix: now_unix(),
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    let name = out.file_name("manifest", "json");
    out.write(&name, &(body + "\n"))?;
    for p in out.commit() {
        println!("{}", p.display());
    }
    Ok(())
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn compute(kind: Kind, text: &str, seed: Option<u64>, format: Format) -> Result<Artifacts> {
    match kind {
        Kind::Spectra => spectra(parse(text)?, format),
        Kind::Sample => sample(with_seed_sample(parse(text)?, seed), format),
        Kind::Gssc => gssc(with_seed_gssc(parse(text)?, seed), format),
        Kind::Glqr => glqr(with_seed_glqr(parse(text)?, seed), format),
        Kind::Sweep => {
            let art = match parse::<SweepConfig>(text)? {
                SweepConfig::Sample(c) => sample(with_seed_sample(c, seed), format)?,
                SweepConfig::Gssc(c) => gssc(with_seed_gssc(c, seed), format)?,
                SweepConfig::Glqr(c) => glqr(with_seed_glqr(c, seed), format)?,
            };
            // an empty sweep leaves only the manifest
            if art.cases == 0 {
                return Ok(Artifacts {
                    files: Vec::new(),
                    ..art
                });
            }
            Ok(art)
        }
    }
}

fn with_seed_sample(mut c: SampleConfig, seed: Option<u64>) -> SampleConfig {
    if let Some(s) = seed {
        c.seeds = vec![s];
    }
    c
}

fn with_seed_gssc(mut c: GsscConfig, seed: Option<u64>) -> GsscConfig {
    if let Some(s) = seed {
        c.seeds = vec![s];
    }
    c
}

fn with_seed_glqr(mut c: GlqrConfig, seed: Option<u64>) -> GlqrConfig {
    if let Some(s) = seed {
        c.seeds = vec![s];
        if let X0Spec::UniformRandom { seed, .. } = &mut c.x0 {
            *seed = Some(s);
        }
    }
    c
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn spectra(cfg: SpectraConfig, format: Format) -> Result<Artifacts> {
    let g = build_graphon(&cfg.graphon)?;
    let n = cfg.n.unwrap_or_else(|| g.resolution());
    let dec = g.discretize(n)?.spectral_decomposition(cfg.k)?;
    let tables: Vec<&[f64]> = dec.eigenfunctions().iter().map(|f| f.values().values()).collect();
    let files = match format {
        Format::Json => vec![(
            "",
            to_json(&json!({
                "n": n,
                "eigenvalues": dec.eigenvalues(),
                "eigenfunctions": tables,
            }))?,
        )],
        Format::Csv => {
            let mut values = String::from("index,eigenvalue\n");
            for (i, l) in dec.eigenvalues().iter().enumerate() {
                let _ = writeln!(values, "{},{l}", i + 1);
            }
            let mut funcs = String::from("x");
            for i in 0..tables.len() {
                let _ = write!(funcs, ",f_{}", i + 1);
            }
            funcs.push('\n');
            for j in 0..n {
                let _ = write!(funcs, "{}", (j as f64 + 0.5) / n as f64);
                for t in &tables {
                    let _ = write!(funcs, ",{}", t[j]);
                }
                funcs.push('\n');
            }
            vec![("", values), ("eigenfunctions", funcs)]
        }
    };
    Ok(Artifacts {
        files,
        cases: 1,
        integrator: None,
    })
}

#[derive(Serialize)]
struct SampleRow {
    n: usize,
    seed: Option<u64>,
    op: f64,
    l2: f64,
    cut_lo: f64,
    cut_hi: f64,
}

fn sample(cfg: SampleConfig, format: Format) -> Result<Artifacts> {
    let g = build_graphon(&cfg.graphon)?;
    let todo = cases(cfg.network, &cfg.ns, &cfg.seeds);
    let rows = todo
        .par_iter()
        .map(|&Case { n, seed }| {
            let net = match seed {
                Some(s) => sample_network(&g, n, s)?,
                None => grid_network(&g, n)?,
            };
            Ok((n, seed, network_distance(&net, &g, cfg.resolution)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match format {
        Format::Csv => distance_table(&rows),
        Format::Json => to_json(
            &rows
                .iter()
                .map(|(n, seed, d)| SampleRow {
                    n: *n,
                    seed: *seed,
                    op: d.op,
                    l2: d.l2,
                    cut_lo: d.cut_lower,
                    cut_hi: d.cut_upper,
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Artifacts {
        files: vec![("", body)],
        cases: rows.len(),
        integrator: None,
    })
}

fn gssc(cfg: GsscConfig, format: Format) -> Result<Artifacts> {
    let plan = GsscPlan::new(&cfg)?;
    let rows = plan
        .cases()
        .par_iter()
        .map(|&c| plan.run_case(c))
        .collect::<Result<Vec<_>>>()?;
    let achieved = plan.limit_terminal()?;
    let target = plan.target();
    let spectrum = &plan.law().gramian().spectrum;
    let mut modes = Vec::new();
    for (l, f) in spectrum.eigenvalues().iter().zip(spectrum.eigenfunctions()) {
        modes.push((*l, target.inner(f.values())?, achieved.inner(f.values())?));
    }
    let files = match format {
        Format::Json => vec![(
            "",
            to_json(&json!({
                "rows": rows,
                "energy": plan.law().energy(),
                "target": target.values(),
                "achieved": achieved.values(),
                "modes": modes
                    .iter()
                    .map(|(l, t, a)| json!({"eigenvalue": l, "target": t, "achieved": a}))
                    .collect::<Vec<_>>(),
            }))?,
        )],
        Format::Csv => vec![
            ("", gssc_table(&rows)),
            ("terminal", terminal_table(target, &achieved)),
            ("modes", modes_table(&modes, plan.law().energy())),
        ],
    };
    let steps = cfg.steps.unwrap_or_else(|| default_steps(cfg.horizon));
    Ok(Artifacts {
        files,
        cases: rows.len(),
        integrator: Some(Integrator::rk4(Some(steps), None)),
    })
}

fn terminal_table(target: &GridFunction, achieved: &GridFunction) -> String {
    let m = target.resolution();
    let mut out = String::from("x,target,achieved\n");
    for (i, (t, a)) in target.values().iter().zip(achieved.values()).enumerate() {
        let _ = writeln!(out, "{},{t},{a}", (i as f64 + 0.5) / m as f64);
    }
    out
}

fn modes_table(modes: &[(f64, f64, f64)], energy: f64) -> String {
    let mut out = String::from("index,eigenvalue,target,achieved\n");
    for (i, (l, t, a)) in modes.iter().enumerate() {
        let _ = writeln!(out, "{},{l},{t},{a}", i + 1);
    }
    let _ = writeln!(out, "energy,{energy},,");
    out
}

fn glqr(cfg: GlqrConfig, format: Format) -> Result<Artifacts> {
    let plan = GlqrPlan::new(&cfg)?;
    let rows = plan
        .cases()
        .par_iter()
        .map(|&c| plan.run_case(c))
        .collect::<Result<Vec<_>>>()?;
    let body = match format {
        Format::Csv => glqr_table(&rows),
        Format::Json => to_json(&rows)?,
    };
    let steps = cfg.steps.unwrap_or_else(|| default_steps(cfg.horizon));
    Ok(Artifacts {
        files: vec![("", body)],
        cases: rows.len(),
        integrator: Some(Integrator::rk4(Some(steps), Some(2 * steps))),
    })
}
