//! Command-line front end: instance generation, the partition pipeline,
//! certificate verification, tournament cycle tools, brute-force oracles,
//! and DOT export.
//!
//! Exit codes: 0 success or accept, 2 verified reject, 3 structured
//! pipeline/library failure, 64 usage error, 65 input parse error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dipart::connectivity::{find_disjoint_path_fans_with, oracle, FanOptions, FanStrategy};
use dipart::digraph::{Digraph, Vertex, VertexSet};
use dipart::engine::{run_pipeline, Mode, Parameters, Scale};
use dipart::instances::{gen_dense_digraph, gen_strong_tournament, gen_tournament};
use dipart::tournament::{cycle_through_vertex, disjoint_cycles};
use dipart::verify::{brute_force_partition, re_verify, PartitionCertificate};

const EXIT_OK: u8 = 0;
const EXIT_REJECT: u8 = 2;
const EXIT_FAILURE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_PARSE: u8 = 65;

#[derive(Parser)]
#[command(name = "dipart", version, about = "Certified digraph bipartitions and tournament cycles")]
struct Cli {
    /// Worker cap for the parallel sweeps; results are identical at any
    /// setting.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic instance and write it in the text format.
    Generate(GenerateArgs),
    /// Run the partition pipeline and emit a certificate plus a claim log.
    Partition(PartitionArgs),
    /// Re-verify a certificate against a graph.
    Verify(VerifyArgs),
    /// Find cycles of prescribed length in strong tournaments.
    Cycles(CyclesArgs),
    /// Brute-force reference oracles (small inputs only).
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Render a graph, optionally overlaid with a certificate, as DOT text.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = ["tournament", "dense", "strong-tournament"])]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long, value_parser = ["strict", "scaled"], default_value = "scaled")]
    mode: String,
    /// Threshold multiplier as a rational, e.g. 1/8.
    #[arg(long, default_value = "1/8")]
    scale: String,
    #[arg(long)]
    cert_out: Option<PathBuf>,
    #[arg(long)]
    log_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Args)]
struct CyclesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    v: Vertex,
    #[arg(long)]
    t: usize,
    /// JSON file with fields v1 and v2; switches to the two-cycle mode.
    #[arg(long)]
    partition: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Deletion-oracle strong k-connectivity.
    Kconn(OracleKconnArgs),
    /// Exhaustive search for a verifying bipartition.
    Partition(OraclePartitionArgs),
    /// Exact disjoint-path fan search with validation.
    Paths(OraclePathsArgs),
}

#[derive(Args)]
struct OracleKconnArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct OraclePartitionArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
}

#[derive(Args)]
struct OraclePathsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Terminal pairs as x:y[,x:y...]
    #[arg(long)]
    pairs: String,
    #[arg(long)]
    s: usize,
    /// Greedy shortest-path peeling instead of the exact search; the
    /// result is still validated before printing.
    #[arg(long)]
    heuristic: bool,
}

#[derive(Args)]
struct ExportDotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const ORACLE_MAX_N: usize = 12;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let code = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Cycles(args) => cmd_cycles(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::ExportDot(args) => cmd_export_dot(args),
    };
    ExitCode::from(code)
}

fn read_graph(path: &PathBuf) -> Result<Digraph, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    Digraph::parse_text(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> Result<(), u8> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_FAILURE
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> u8 {
    let result = match args.model.as_str() {
        "tournament" => gen_tournament(args.n, args.seed),
        "dense" => gen_dense_digraph(args.n, args.l, args.seed),
        "strong-tournament" => gen_strong_tournament(args.n, args.seed),
        _ => unreachable!("clap validates the model"),
    };
    match result {
        Ok(g) => match write_or_print(&args.out, &g.to_text()) {
            Ok(()) => EXIT_OK,
            Err(code) => code,
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn parse_scale(s: &str) -> Option<Scale> {
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse().ok()?;
        let den: u64 = den.trim().parse().ok()?;
        if num == 0 || den == 0 {
            return None;
        }
        Some(Scale::new(num, den))
    } else {
        let num: u64 = s.trim().parse().ok()?;
        if num == 0 {
            return None;
        }
        Some(Scale::new(num, 1))
    }
}

fn cmd_partition(args: PartitionArgs) -> u8 {
    let d = match read_graph(&args.input) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let Some(scale) = parse_scale(&args.scale) else {
        eprintln!("error: --scale must be a positive rational like 1/8");
        return EXIT_USAGE;
    };
    let params = Parameters {
        k: args.k,
        l: args.l,
        n1: args.n1,
        n2: args.n2,
        mode: if args.mode == "strict" { Mode::Strict } else { Mode::Scaled },
        scale,
        c: None,
        long_gate: None,
        search_budget: 2_000_000,
    };
    match run_pipeline(&d, &params) {
        Ok(outcome) => {
            let log_text = outcome.log.render();
            if let Some(path) = &args.log_out {
                if fs::write(path, &log_text).is_err() {
                    eprintln!("error: cannot write {}", path.display());
                    return EXIT_FAILURE;
                }
            }
            let cert_json = outcome.certificate.to_json();
            if let Some(path) = &args.cert_out {
                if fs::write(path, &cert_json).is_err() {
                    eprintln!("error: cannot write {}", path.display());
                    return EXIT_FAILURE;
                }
            }
            println!(
                "partition {}: |V1|={} |V2|={} excluded={} checks={}",
                if outcome.certificate.accepted { "accepted" } else { "rejected" },
                outcome.v1.len(),
                outcome.v2.len(),
                outcome.excluded.len(),
                outcome.log.checks.len(),
            );
            if outcome.certificate.accepted {
                EXIT_OK
            } else {
                EXIT_REJECT
            }
        }
        Err(failure) => {
            let mut log_text = failure.log.render();
            log_text.push_str(&format!(
                "ABORT {} {}\n",
                failure.error.claim, failure.error.phase
            ));
            if let Some(path) = &args.log_out {
                let _ = fs::write(path, &log_text);
            }
            eprintln!("pipeline failure: {failure}");
            EXIT_FAILURE
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> u8 {
    let d = match read_graph(&args.input) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let cert_text = match fs::read_to_string(&args.cert) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.cert.display());
            return EXIT_PARSE;
        }
    };
    let cert = match PartitionCertificate::from_json(&cert_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    match re_verify(&d, &cert) {
        Ok(rv) => {
            if !rv.hash_match {
                println!("verify rejected: graph hash mismatch (certificate is stale or tampered)");
                return EXIT_REJECT;
            }
            for c in &rv.structural {
                println!("{}", c.log_line());
            }
            if let Some(report) = &rv.report {
                for c in &report.checks {
                    println!("{}", c.log_line());
                }
            }
            if rv.accepted {
                println!(
                    "verify accepted (agrees with certificate: {})",
                    rv.agrees_with_certificate
                );
                EXIT_OK
            } else {
                println!(
                    "verify rejected (agrees with certificate: {})",
                    rv.agrees_with_certificate
                );
                EXIT_REJECT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn parse_partition_file(path: &PathBuf) -> Result<(VertexSet, VertexSet), u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_PARSE
    })?;
    let side = |key: &str| -> Option<VertexSet> {
        value[key]
            .as_array()?
            .iter()
            .map(|x| x.as_u64().map(|v| v as usize))
            .collect()
    };
    match (side("v1"), side("v2")) {
        (Some(v1), Some(v2)) => Ok((v1, v2)),
        _ => {
            eprintln!("error: partition file needs integer arrays v1 and v2");
            Err(EXIT_PARSE)
        }
    }
}

fn cmd_cycles(args: CyclesArgs) -> u8 {
    let d = match read_graph(&args.input) {
        Ok(d) => d,
        Err(code) => return code,
    };
    match &args.partition {
        None => match cycle_through_vertex(&d, args.v, args.t) {
            Ok(c) => {
                println!("cycle length={} vertices={}", c.length(), join_ids(&c.vertices));
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Some(path) => {
            let (v1, v2) = match parse_partition_file(path) {
                Ok(p) => p,
                Err(code) => return code,
            };
            match disjoint_cycles(&d, args.v, args.t, (&v1, &v2)) {
                Ok((c1, c2)) => {
                    println!("cycle1 length={} vertices={}", c1.length(), join_ids(&c1.vertices));
                    println!("cycle2 length={} vertices={}", c2.length(), join_ids(&c2.vertices));
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_FAILURE
                }
            }
        }
    }
}

fn join_ids(ids: &[Vertex]) -> String {
    ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn cmd_oracle(cmd: OracleCommand) -> u8 {
    match cmd {
        OracleCommand::Kconn(args) => {
            let d = match read_graph(&args.input) {
                Ok(d) => d,
                Err(code) => return code,
            };
            if d.vertex_count() > ORACLE_MAX_N {
                eprintln!("error: oracle size guard: n <= {ORACLE_MAX_N}");
                return EXIT_FAILURE;
            }
            if args.k == 0 {
                eprintln!("error: k must be at least 1");
                return EXIT_USAGE;
            }
            let verdict = oracle::is_strongly_k_connected_bruteforce(&d, args.k);
            println!("kconn k={} {}", args.k, verdict);
            EXIT_OK
        }
        OracleCommand::Partition(args) => {
            let d = match read_graph(&args.input) {
                Ok(d) => d,
                Err(code) => return code,
            };
            match brute_force_partition(&d, args.k, args.n1, args.n2) {
                Ok(Some((v1, v2))) => {
                    println!(
                        "partition found v1={} v2={}",
                        join_ids(&v1.iter().copied().collect::<Vec<_>>()),
                        join_ids(&v2.iter().copied().collect::<Vec<_>>())
                    );
                    EXIT_OK
                }
                Ok(None) => {
                    println!("partition none");
                    EXIT_REJECT
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_FAILURE
                }
            }
        }
        OracleCommand::Paths(args) => {
            let d = match read_graph(&args.input) {
                Ok(d) => d,
                Err(code) => return code,
            };
            if d.vertex_count() > 16 {
                eprintln!("error: oracle size guard: n <= 16");
                return EXIT_FAILURE;
            }
            let mut pairs = Vec::new();
            for part in args.pairs.split(',') {
                let Some((x, y)) = part.split_once(':') else {
                    eprintln!("error: --pairs expects x:y[,x:y...]");
                    return EXIT_USAGE;
                };
                let (Ok(x), Ok(y)) = (x.trim().parse::<usize>(), y.trim().parse::<usize>()) else {
                    eprintln!("error: --pairs expects integer ids");
                    return EXIT_USAGE;
                };
                pairs.push((x, y));
            }
            let opts = FanOptions {
                strategy: if args.heuristic {
                    FanStrategy::Heuristic
                } else {
                    FanStrategy::Exact
                },
                ..FanOptions::default()
            };
            match find_disjoint_path_fans_with(&d, &pairs, args.s, &VertexSet::new(), opts) {
                Ok(fan) => {
                    if !fan.validate(&d, &VertexSet::new()) {
                        eprintln!("error: fan failed post-hoc validation");
                        return EXIT_FAILURE;
                    }
                    for (pi, ps) in fan.paths.iter().enumerate() {
                        for (j, p) in ps.iter().enumerate() {
                            println!(
                                "path pair={pi} rank={} vertices={}",
                                j + 1,
                                join_ids(&p.vertices)
                            );
                        }
                    }
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_FAILURE
                }
            }
        }
    }
}

fn cmd_export_dot(args: ExportDotArgs) -> u8 {
    let d = match read_graph(&args.input) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let mut part_of: Vec<Option<u8>> = vec![None; d.vertex_count()];
    if let Some(path) = &args.cert {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_PARSE;
            }
        };
        let cert = match PartitionCertificate::from_json(&text) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_PARSE;
            }
        };
        for &v in &cert.v1 {
            if v < part_of.len() {
                part_of[v] = Some(1);
            }
        }
        for &v in &cert.v2 {
            if v < part_of.len() {
                part_of[v] = Some(2);
            }
        }
    }
    let mut dot = String::from("digraph G {\n");
    #[allow(clippy::needless_range_loop)]
    for v in 0..d.vertex_count() {
        let attrs = match part_of[v] {
            Some(1) => " [color=red, style=filled, fillcolor=mistyrose]",
            Some(2) => " [color=blue, style=filled, fillcolor=lightcyan]",
            _ => "",
        };
        dot.push_str(&format!("  {v}{attrs};\n"));
    }
    for (u, v) in d.arcs() {
        dot.push_str(&format!("  {u} -> {v};\n"));
    }
    dot.push_str("}\n");
    match write_or_print(&args.out, &dot) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
