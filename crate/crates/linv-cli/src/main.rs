//! Command-line interface: parse filtered-module JSON, run the pipeline,
//! the verification suites, and the pairing-table generator.
//!
//! Exit codes: 0 success, 2 a required condition failed, 3 input error.

use clap::{Parser, Subcommand, ValueEnum};
use linv::engine::{self, PipelineStatus};
use linv::error::EngineError;
use linv::io;
use linv::robba::oracle;
use linv::scalar::parse_rational;
use linv::stcoh;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "linv",
    about = "Exact p-adic computation of L-invariants of semistable filtered (phi,N)-modules",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input JSON file (see the README for the schema).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Capped precision in p-adic digits for inexact quantities.
    #[arg(long, global = true, default_value_t = 30)]
    precision: i64,
    /// Series window LO:HI for the oracle commands.
    #[arg(long, global = true, default_value = "-8:80")]
    window: String,
    /// Cache file for generated pairing tables.
    #[arg(long, global = true)]
    table_cache: Option<PathBuf>,
    /// Report only the local factor even when global data is present.
    #[arg(long, global = true)]
    local_only: bool,
    /// Build the two-dimensional semistable demo input instead of reading a
    /// file: three KEY=VALUE arguments p=, k=, lambda=.
    #[arg(long, global = true, num_args = 1.., value_name = "KEY=VALUE")]
    demo_modular: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a module and print its Hodge/Newton summary.
    Inspect,
    /// Compute the canonical filtration of (module, D) and verify its
    /// characterizing properties.
    Filtration,
    /// Dimensions of the crystalline and semistable cohomology.
    Cohomology,
    /// Translate a full stable flag into rank-1 character parameters.
    Triangulate,
    /// Run the full pipeline: conditions, decomposition, L-invariant,
    /// interpolation factor.
    LInvariant,
    /// Extract the slope of the two-dimensional semistable shape.
    FmExtract,
    /// Run the series-oracle identity suite and the cohomology dimension
    /// identities on random modules.
    Verify,
    /// Generate the duality pairing tables over a grid of twists.
    Tables {
        /// Prime for the table generator.
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Required certified digits.
        #[arg(long, default_value_t = 15)]
        digits: i64,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            report_error(&cli, &e);
            match e {
                CliError::Input(_) => ExitCode::from(3),
                CliError::Conditions(_) => ExitCode::from(2),
                CliError::Other(_) => ExitCode::from(1),
            }
        }
    }
}

enum CliError {
    Input(String),
    Conditions(String),
    Other(String),
}

impl From<io::IoError> for CliError {
    fn from(e: io::IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::ConditionFailed(_)
            | EngineError::C4Violation(_)
            | EngineError::RhoCNotInvertible
            | EngineError::RankDefect { .. }
            | EngineError::DualizeFirst => CliError::Conditions(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

fn report_error(cli: &Cli, e: &CliError) {
    let (kind, message) = match e {
        CliError::Input(m) => ("input-error", m),
        CliError::Conditions(m) => ("condition-failure", m),
        CliError::Other(m) => ("error", m),
    };
    if cli.format == Format::Json {
        println!(
            "{}",
            serde_json::json!({ "error": { "kind": kind, "message": message } })
        );
    } else {
        eprintln!("{kind}: {message}");
    }
}

fn load_input(
    cli: &Cli,
) -> Result<(engine::LInvariantInput, Option<Vec<linv::linalg::Subspace>>), CliError> {
    if let Some(kvs) = &cli.demo_modular {
        let mut p = None;
        let mut k = None;
        let mut lambda = None;
        for kv in kvs {
            let Some((key, value)) = kv.split_once('=') else {
                return Err(CliError::Input(format!(
                    "demo argument {kv:?} is not KEY=VALUE"
                )));
            };
            match key {
                "p" => p = value.parse::<u64>().ok(),
                "k" => k = value.parse::<i64>().ok(),
                "lambda" => lambda = Some(value.to_string()),
                other => {
                    return Err(CliError::Input(format!("unknown demo key {other:?}")));
                }
            }
        }
        let p = p.ok_or_else(|| CliError::Input("demo needs p=<odd prime>".into()))?;
        let k = k.ok_or_else(|| CliError::Input("demo needs k=<weight>".into()))?;
        let lam_str =
            lambda.ok_or_else(|| CliError::Input("demo needs lambda=<rational>".into()))?;
        let lam =
            parse_rational(p, &lam_str).map_err(|e| CliError::Input(format!("lambda: {e}")))?;
        if k < 1 {
            return Err(CliError::Input("demo weight k must be >= 1".into()));
        }
        linv::scalar::check_prime(p).map_err(|e| CliError::Input(e.to_string()))?;
        return Ok((engine::modular_form_module(p, k, &lam), None));
    }
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("no --input file and no --demo-modular".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(io::parse_input_str(&text)?)
}

fn parse_window(s: &str) -> Result<(i64, i64), CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("window {s:?} is not LO:HI")))?;
    let lo: i64 = lo.parse().map_err(|_| CliError::Input("window LO".into()))?;
    let hi: i64 = hi.parse().map_err(|_| CliError::Input("window HI".into()))?;
    if !(lo < 0 && 0 < hi) {
        return Err(CliError::Input("window must satisfy LO < 0 < HI".into()));
    }
    Ok((lo, hi))
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Inspect => {
            let (input, _) = load_input(cli)?;
            let validation = input.module.validate();
            let hn = input.module.hodge_newton();
            if cli.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "valid": validation.all_pass(),
                        "checks": validation.items.iter().map(|i| serde_json::json!({
                            "name": i.name, "pass": i.pass, "detail": i.detail,
                        })).collect::<Vec<_>>(),
                        "hodge_jumps": hn.hodge_jumps,
                        "hodge_total": hn.hodge_total,
                        "newton_valuation": hn.newton_valuation,
                        "weakly_admissible": hn.weakly_admissible,
                        "lattice_fully_checked": hn.lattice_fully_checked,
                    })
                );
            } else {
                for i in &validation.items {
                    println!("{:28} {}", i.name, if i.pass { "pass" } else { "FAIL" });
                }
                println!("hodge jumps                  {:?}", hn.hodge_jumps);
                println!("hodge total                  {}", hn.hodge_total);
                println!("newton valuation             {}", hn.newton_valuation);
                println!(
                    "weakly admissible            {}{}",
                    hn.weakly_admissible,
                    if hn.lattice_fully_checked {
                        ""
                    } else {
                        " (lattice check truncated)"
                    }
                );
            }
            Ok(if validation.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Filtration => {
            let (input, _) = load_input(cli)?;
            let triple = input
                .module
                .canonical_filtration(&input.d_sub)
                .map_err(|e| CliError::Conditions(e.to_string()))?;
            let props = input
                .module
                .verify_filtration_properties(&input.d_sub, &triple);
            let dims = (triple.0.dim(), triple.1.dim(), triple.2.dim());
            let dual_check = input.module.dual_filtration_check(&input.d_sub).ok();
            if cli.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "dims": [dims.0, dims.1, dims.2],
                        "properties": props.items.iter().map(|i| serde_json::json!({
                            "name": i.name, "pass": i.pass,
                        })).collect::<Vec<_>>(),
                        "dual_check": dual_check,
                    })
                );
            } else {
                println!(
                    "canonical filtration dims    {} <= {} <= {}",
                    dims.0, dims.1, dims.2
                );
                for i in &props.items {
                    println!("{:34} {}", i.name, if i.pass { "pass" } else { "FAIL" });
                }
                println!("dual filtration check        {:?}", dual_check);
            }
            Ok(if props.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Cohomology => {
            let (input, _) = load_input(cli)?;
            let cris = stcoh::h_cris(&input.module);
            let st = stcoh::h_st(&input.module);
            let (c0, c1) = cris.dims();
            let (h0, h1, h2) = st.dims();
            if cli.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "crystalline": {"h0": c0, "h1": c1},
                        "semistable": {"h0": h0, "h1": h1, "h2": h2},
                        "tangent_dim": input.module.tangent_dim(),
                    })
                );
            } else {
                println!("crystalline complex          H0 = {c0}, H1 = {c1}");
                println!("semistable complex           H0 = {h0}, H1 = {h1}, H2 = {h2}");
                println!("tangent dimension            {}", input.module.tangent_dim());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Triangulate => {
            let (input, flag) = load_input(cli)?;
            let flag = flag.ok_or_else(|| {
                CliError::Input("triangulate needs a \"flag\" field in the input".into())
            })?;
            let params = input
                .module
                .refinement_to_parameters(&flag)
                .map_err(|e| CliError::Conditions(e.to_string()))?;
            if cli.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "parameters": params.iter().map(|c| serde_json::json!({
                            "weight": c.weight,
                            "delta_p": c.phi_value.approx().to_string(),
                        })).collect::<Vec<_>>(),
                    })
                );
            } else {
                for (i, c) in params.iter().enumerate() {
                    println!("step {i}: weight {:3}, delta(p) = {}", c.weight, c.phi_value);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::LInvariant => {
            let (mut input, _) = load_input(cli)?;
            if cli.local_only {
                input.global_subspace = None;
            }
            let report = engine::run_pipeline(&input)?;
            if cli.format == Format::Json {
                println!("{}", io::report_to_json(&report));
            } else {
                print_report_text(&report);
            }
            Ok(match report.status {
                PipelineStatus::Complete => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            })
        }
        Command::FmExtract => {
            let (input, _) = load_input(cli)?;
            let lam = engine::fontaine_mazur_extract(&input.module)?;
            if cli.format == Format::Json {
                println!("{}", serde_json::json!({ "slope": io::scalar_to_json(&lam) }));
            } else {
                println!("slope                        {lam}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let (lo, hi) = parse_window(&cli.window)?;
            let p = 3u64;
            let mut rng = linv::sample::rng(2024);
            let oracle_rep = oracle::verify_identities(p, 6, lo, hi, 20, &mut rng, 50)
                .map_err(|e| CliError::Other(e.to_string()))?;
            let mut all = oracle_rep.all_pass();
            let mut lines: Vec<(String, bool, String)> = oracle_rep
                .items
                .iter()
                .map(|i| (i.name.clone(), i.pass, i.detail.clone()))
                .collect();
            // cohomology dimension identities on random modules
            let mut euler_ok = true;
            for _ in 0..25 {
                let dim = 1 + (rand::Rng::gen_range(&mut rng, 0..4));
                let m = linv::sample::random_module(&mut rng, p, dim);
                let st = stcoh::h_st(&m);
                let (h0, h1, h2) = st.dims();
                let cris = stcoh::h_cris(&m);
                let (c0, c1) = cris.dims();
                let t = m.tangent_dim() as i64;
                if h0 as i64 - h1 as i64 + h2 as i64 != -t
                    || c1 as i64 - c0 as i64 != t
                    || h1 - c1 != stcoh::twisted_dual_fixed_dim(&m)
                {
                    euler_ok = false;
                }
            }
            lines.push((
                "cohomology_dimension_identities".into(),
                euler_ok,
                "25 random modules".into(),
            ));
            all = all && euler_ok;
            if cli.format == Format::Json {
                println!(
                    "{}",
                    serde_json::json!({
                        "pass": all,
                        "items": lines.iter().map(|(n, p, d)| serde_json::json!({
                            "name": n, "pass": p, "detail": d,
                        })).collect::<Vec<_>>(),
                    })
                );
            } else {
                for (n, pss, d) in &lines {
                    println!("{:36} {}  {d}", n, if *pss { "pass" } else { "FAIL" });
                }
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Tables { p, digits } => {
            if let Some(path) = &cli.table_cache {
                if let Ok(text) = std::fs::read_to_string(path) {
                    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                        if v["p"] == serde_json::json!(p) && v["digits"] == serde_json::json!(digits)
                        {
                            println!("{}", v);
                            return Ok(ExitCode::SUCCESS);
                        }
                    }
                }
            }
            let gen = oracle::CupOracle::new(*p, 5, *digits)
                .map_err(|e| CliError::Other(e.to_string()))?;
            let mut cells = Vec::new();
            for m in 1..=3u32 {
                for k in 0..=2u32 {
                    let t = gen
                        .table(m, k)
                        .map_err(|e| CliError::Other(e.to_string()))?;
                    cells.push(serde_json::json!({
                        "m": m,
                        "k": k,
                        "cells": t.cells.iter().map(io::scalar_to_json).collect::<Vec<_>>(),
                        "window": [t.window.0, t.window.1],
                        "certified_digits": t.certified_digits,
                        "beta_row_orientation": t.beta_row_orientation,
                    }));
                }
            }
            let doc = serde_json::json!({
                "p": p,
                "digits": digits,
                "chi_gamma": format!("{}", 1 + p),
                "tables": cells,
            });
            if let Some(path) = &cli.table_cache {
                std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())
                    .map_err(|e| CliError::Other(format!("cannot write cache: {e}")))?;
            }
            println!("{}", doc);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_report_text(rep: &engine::LInvariantReport) {
    for i in &rep.conditions.items {
        println!(
            "{:28} {}  {}",
            i.name,
            if i.pass { "pass" } else { "FAIL" },
            i.detail
        );
    }
    if let Some((a, b, c)) = rep.filtration_dims {
        println!("canonical filtration dims    {a} <= {b} <= {c}");
    }
    if let (Some(r), Some(s)) = (rep.r, rep.s) {
        println!(
            "block ranks                  r = {r}, s = {s} (w0 rank {:?})",
            rep.w0_rank
        );
    }
    match rep.status {
        PipelineStatus::DualizeFirst => {
            println!("status                       rerun on the dualized input");
        }
        PipelineStatus::ConditionsFailed => {
            println!("status                       conditions failed");
        }
        PipelineStatus::Complete => {
            if let Some(l) = &rep.l_local {
                println!("l_local                      {l}");
            }
            if rep.needs_global_data {
                println!("l_invariant                  requires global cohomology data (s > 0)");
            } else {
                if let Some(l) = &rep.l_global {
                    println!("l_global                     {l}");
                }
                if let Some(l) = &rep.l_full {
                    println!("l_invariant                  {l}");
                }
            }
            if let Some(e) = &rep.interpolation {
                println!("interpolation factor         {e}");
            }
            println!(
                "precision floor              {}",
                rep.precision_floor
                    .map(|f| f.to_string())
                    .unwrap_or_else(|| "exact".into())
            );
        }
    }
}
