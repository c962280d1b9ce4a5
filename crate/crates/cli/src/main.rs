// SPDX-License-Identifier: Apache-2.0

//! `reveal`: recover the architecture of an optimized multiplier and check
//! it against a reference template.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use reveal::aig::{max_output_level, read_aiger, write_aiger, Aig, AigerFormat};
use reveal::blocks::{annotate_blocks, BlockAnnotation};
use reveal::cec::{portfolio_verify, solve_cnf, Budget, Cnf, Engine, PortfolioConfig, Verdict};
use reveal::cones::{
    default_lsb_outputs, detect_ppg, extract_lsb_cone, extract_msb_cone, k_cut_depth, operand_width, Cone,
};
use reveal::features::{graph_stats, node_features, undirected_adjacency, GraphFeatures, NODE_FEATURE_NAMES};
use reveal::gnn::{
    accuracy, grid_dataset, load_model, predict, save_model, train, GraphSample, ModelKind, TrainConfig,
};
use reveal::mulgen::{build_template_library, generate_multiplier, Architecture, ArchitectureLabel, LibraryIndex};
use reveal::obfuscate::{inject_bug, optimize, RewriteConfig};
use reveal::pipeline::{run_pipeline, PipelineConfig};

use config::Config;

/// Exit status for errors; 0, 1 and 2 are verdicts.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "reveal", version, about = "Multiplier architecture recovery and equivalence checking")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Wall-clock limit of equivalence checking, in seconds.
    #[arg(long, global = true)]
    budget_secs: Option<f64>,
    /// Worker threads for library generation.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// `key = value` file with library, model and solver settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one multiplier template.
    Gen {
        /// Architecture label such as SP_WT_BK_8.
        #[arg(long)]
        label: String,
        #[arg(long)]
        out: PathBuf,
        /// Write ASCII AIGER instead of binary.
        #[arg(long)]
        ascii: bool,
        /// Also write the cell instantiation counts as JSON.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Generate, check and index a template library.
    Library {
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        /// Architectures such as SP_WT_BK; all 90 when omitted.
        #[arg(long, value_delimiter = ',')]
        archs: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Restructure a circuit without changing its function.
    Obfuscate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `dc2like`, `resyn3like` or a comma list of passes.
        #[arg(long, default_value = "dc2like")]
        passes: String,
        #[arg(long)]
        rounds: Option<u32>,
    },
    /// Inject a functional bug.
    Bug {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the distinguishing input pattern as JSON.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Extract the LSB and MSB cones.
    Cones {
        #[arg(long = "in")]
        input: PathBuf,
        /// LSB outputs; 8, or half the width below 16, by default.
        #[arg(long)]
        lsb: Option<usize>,
        #[arg(long, default_value_t = 8)]
        msb: usize,
        /// Cut depth, or `auto` for 5 + 2 floor(log2 N).
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recover half and full adders.
    Blocks {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode node features and graph statistics of a cone.
    Features {
        #[arg(long)]
        cone: PathBuf,
        /// Annotation from `reveal blocks`; computed when omitted.
        #[arg(long)]
        annotation: Option<PathBuf>,
        /// Whole circuit, for the logic depth; the cone's own when omitted.
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on obfuscated templates.
    Train {
        /// `ppa` or `fsa`.
        #[arg(long)]
        kind: ModelKind,
        #[arg(long, value_delimiter = ',', default_value = "8,10,12,14")]
        widths: Vec<usize>,
        /// Held-out widths, reported and used for model selection.
        #[arg(long, value_delimiter = ',')]
        val_widths: Vec<usize>,
        /// Obfuscated copies per template.
        #[arg(long, default_value_t = 1)]
        variants: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[arg(long, default_value_t = 64)]
        hidden: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a circuit.
    Infer {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ppa_model: Option<PathBuf>,
        #[arg(long)]
        fsa_model: Option<PathBuf>,
    },
    /// Check two circuits for equivalence.
    Verify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Engines to race; the default portfolio when omitted.
        #[arg(long, value_delimiter = ',')]
        engines: Vec<String>,
    },
    /// Classify, look up templates and verify.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        ppa_model: Option<PathBuf>,
        #[arg(long)]
        fsa_model: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        top_k: usize,
        /// Try ranks up to 5 when the first templates stay inconclusive.
        #[arg(long)]
        widen: bool,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve a DIMACS CNF file with the built-in solver.
    Solve { cnf: PathBuf },
}

fn read_circuit(path: &Path) -> Result<Aig> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_aiger(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_circuit(aig: &Aig, path: &Path) -> Result<()> {
    let format = if path.extension().is_some_and(|e| e == "aag") {
        AigerFormat::Ascii
    } else {
        AigerFormat::Binary
    };
    fs::write(path, write_aiger(aig, format)).with_context(|| format!("writing {}", path.display()))
}

fn write_json(value: &impl serde::Serialize, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn budget(secs: Option<f64>) -> Budget {
    Budget {
        deadline: secs.map(|s| Instant::now() + Duration::from_secs_f64(s)),
        ..Budget::default()
    }
}

fn pick(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| anyhow!("no {what} given; pass --{} or set it in --config", what.replace(' ', "-")))
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Equivalent => 0,
        Verdict::NotEquivalent { .. } => 1,
        Verdict::Unknown { .. } => 2,
    }
}

fn cone_summary(c: &Cone) -> serde_json::Value {
    json!({
        "nodes": c.sub_aig.num_nodes(),
        "gates": c.sub_aig.num_ands(),
        "boundary_inputs": c.boundary_inputs,
        "root_outputs": c.root_outputs,
        "cut_depth": c.cut_depth_used,
    })
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let budget_secs = cli.budget_secs.or(cfg.budget_secs);
    match cli.cmd {
        Cmd::Gen { label, out, ascii, log } => {
            let label: ArchitectureLabel = label.parse()?;
            let (aig, inst) = generate_multiplier(&label)?;
            let format = if ascii { AigerFormat::Ascii } else { AigerFormat::Binary };
            fs::write(&out, write_aiger(&aig, format))?;
            if let Some(p) = log {
                write_json(&inst, &p)?;
            }
            eprintln!("{label}: {} gates", aig.num_ands());
        }
        Cmd::Library { widths, archs, out_dir } => {
            let archs: Vec<Architecture> = if archs.is_empty() {
                Architecture::all()
            } else {
                archs.iter().map(|a| a.parse()).collect::<Result<_, _>>()?
            };
            let idx = build_template_library(&widths, &archs, &out_dir, cli.jobs, cli.seed)?;
            eprintln!("{} templates indexed in {}", idx.entries.len(), out_dir.display());
        }
        Cmd::Obfuscate { input, out, passes, rounds } => {
            let aig = read_circuit(&input)?;
            let mut rc = RewriteConfig::parse(&passes, cli.seed)?;
            if let Some(r) = rounds {
                rc = rc.with_rounds(r);
            }
            let opt = optimize(&aig, &rc)?;
            write_circuit(&opt, &out)?;
            eprintln!("{} -> {} gates", aig.num_ands(), opt.num_ands());
        }
        Cmd::Bug { input, out, witness } => {
            let aig = read_circuit(&input)?;
            let (bug, pattern) = inject_bug(&aig, cli.seed)?;
            write_circuit(&bug, &out)?;
            if let Some(p) = witness {
                write_json(&pattern, &p)?;
            }
        }
        Cmd::Cones { input, lsb, msb, k, out_dir } => {
            let aig = read_circuit(&input)?;
            let width = operand_width(&aig);
            let k = if k == "auto" { k_cut_depth(width) } else { k.parse().context("--k takes a depth or `auto`")? };
            let l = extract_lsb_cone(&aig, lsb.unwrap_or_else(|| default_lsb_outputs(width)))?;
            let m = extract_msb_cone(&aig, msb, k)?;
            fs::create_dir_all(&out_dir)?;
            write_circuit(&l.sub_aig, &out_dir.join("lsb.aig"))?;
            write_circuit(&m.sub_aig, &out_dir.join("msb.aig"))?;
            let side = json!({
                "width": width,
                "ppg": detect_ppg(&aig)?,
                "lsb": cone_summary(&l),
                "msb": cone_summary(&m),
            });
            write_json(&side, &out_dir.join("cones.json"))?;
        }
        Cmd::Blocks { input, out } => {
            let aig = read_circuit(&input)?;
            let ann = annotate_blocks(&aig);
            write_json(&ann, &out)?;
            eprintln!("{} pairs recovered", ann.pairs.len());
        }
        Cmd::Features {
            cone,
            annotation,
            circuit,
            out,
        } => {
            let g = read_circuit(&cone)?;
            let ann: BlockAnnotation = match annotation {
                Some(p) => serde_json::from_str(&fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => annotate_blocks(&g),
            };
            let x = node_features(&g, &ann)?;
            let level = match circuit {
                Some(p) => max_output_level(&read_circuit(&p)?),
                None => max_output_level(&g),
            };
            let (density, clustering, avg_degree) = graph_stats(&undirected_adjacency(&g), Some(0));
            let gf = GraphFeatures {
                input_count: g.num_inputs(),
                gate_count: g.num_ands(),
                density,
                clustering,
                avg_degree,
                f_level: level,
                f_fan: g.num_inputs(),
            };
            let rows: Vec<Vec<f32>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
            write_json(&json!({ "columns": NODE_FEATURE_NAMES, "nodes": rows, "graph": gf }), &out)?;
        }
        Cmd::Train {
            kind,
            widths,
            val_widths,
            variants,
            epochs,
            lr,
            batch_size,
            hidden,
            out,
        } => {
            let archs = Architecture::all();
            let t = Instant::now();
            let tr = grid_dataset(&widths, &archs, variants, cli.seed)?;
            let va = grid_dataset(&val_widths, &archs, 1, cli.seed ^ 1)?;
            eprintln!("{} training and {} validation samples in {:.1}s", tr.len(), va.len(), t.elapsed().as_secs_f64());
            let tc = TrainConfig {
                epochs,
                learning_rate: lr,
                batch_size,
                hidden,
                seed: cli.seed,
                ..TrainConfig::default()
            };
            let (w, report) = train(kind, tr.examples(kind), va.examples(kind), &tc)?;
            save_model(&w, &out)?;
            let top = if kind == ModelKind::Fsa { 3 } else { 1 };
            let summary = json!({
                "alpha": report.alpha,
                "best_epoch": report.best_epoch,
                "selection_accuracy": report.best_accuracy,
                "final_loss": report.epoch_loss.last(),
                "train_top1": accuracy(&w, tr.examples(kind), 1)?,
                format!("validation_top{top}"): accuracy(&w, va.examples(kind), top)?,
                "seconds": t.elapsed().as_secs_f64(),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Cmd::Infer {
            input,
            ppa_model,
            fsa_model,
        } => {
            let aig = read_circuit(&input)?;
            let ppa = load_model(&pick(ppa_model, &cfg.ppa_model, "ppa model")?)?;
            let fsa = load_model(&pick(fsa_model, &cfg.fsa_model, "fsa model")?)?;
            let p = predict(&ppa, &GraphSample::from_circuit(&aig, ModelKind::Ppa)?)?;
            let f = predict(&fsa, &GraphSample::from_circuit(&aig, ModelKind::Fsa)?)?;
            let out = json!({
                "width": operand_width(&aig),
                "ppg": detect_ppg(&aig)?,
                "ppa_ranking": p.ppa_ranking,
                "topology": f.topo,
                "fsa_ranking": f.fsa_ranking,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Verify { a, b, engines } => {
            let (x, y) = (read_circuit(&a)?, read_circuit(&b)?);
            let mut pc = PortfolioConfig {
                seed: cli.seed,
                external_command: cfg.external_solver.clone(),
                ..PortfolioConfig::default()
            };
            if !engines.is_empty() {
                pc.engines = engines.iter().map(|e| e.parse::<Engine>()).collect::<Result<_, _>>()?;
            } else if pc.external_command.is_some() {
                pc.engines.push(Engine::ExternalDimacs);
            }
            let r = portfolio_verify(&x, &y, &pc, &budget(budget_secs))?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            return Ok(verdict_code(&r.verdict));
        }
        Cmd::Pipeline {
            input,
            library,
            ppa_model,
            fsa_model,
            top_k,
            widen,
            report,
        } => {
            let aig = read_circuit(&input)?;
            let lib = LibraryIndex::load(pick(library, &cfg.library, "library")?)?;
            let ppa = load_model(&pick(ppa_model, &cfg.ppa_model, "ppa model")?)?;
            let fsa = load_model(&pick(fsa_model, &cfg.fsa_model, "fsa model")?)?;
            let mut portfolio = PortfolioConfig {
                seed: cli.seed,
                external_command: cfg.external_solver.clone(),
                ..PortfolioConfig::default()
            };
            if portfolio.external_command.is_some() {
                portfolio.engines.push(Engine::ExternalDimacs);
            }
            let pc = PipelineConfig {
                top_k,
                widen_to: widen.then_some(5),
                portfolio,
                budget_secs: budget_secs.or(PipelineConfig::default().budget_secs),
            };
            let r = run_pipeline(&aig, &input.display().to_string(), &lib, &ppa, &fsa, &pc)?;
            eprintln!("{}", r.summary());
            match report {
                Some(p) => write_json(&r, &p)?,
                None => println!("{}", serde_json::to_string_pretty(&r)?),
            }
            return Ok(r.exit_code() as u8);
        }
        Cmd::Solve { cnf } => {
            let text = fs::read_to_string(&cnf).with_context(|| format!("reading {}", cnf.display()))?;
            let f = Cnf::parse_dimacs(&text)?;
            let r = solve_cnf(&f, &budget(budget_secs));
            print!("{}", reveal::cec::format_solver_output(&r));
            // Exit statuses of the SAT competition.
            return Ok(match r {
                reveal::cec::CnfResult::Sat(_) => 10,
                reveal::cec::CnfResult::Unsat => 20,
                reveal::cec::CnfResult::Unknown(_) => 0,
            });
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

