//! `mgs` — command line tools for quiver mutation, maximal green sequence
//! checking and search, and the staged surface construction.
//!
//! Exit status: 0 success/verified, 1 verified-false, 2 input error,
//! 3 internal error.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mgs_core::construct::{construct, serialize_trace};
use mgs_core::quiver::{apply_green_sequence, parse_quiver, serialize_quiver, IceQuiver, Verdict};
use mgs_core::search::{
    build_catalog, default_max_len, enumerate_class, search_mgs, seed, serialize_catalog,
    SearchOutcome,
};
use mgs_core::surface::{parse_triangulation, serialize_triangulation};

#[derive(Parser)]
#[command(name = "mgs", version, about = "quiver mutation and maximal green sequence tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Input {
    /// Input file; `-` or omitted reads stdin.
    #[arg(short, long)]
    input: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply a mutation sequence to an iceq-v1 quiver.
    Mutate {
        #[command(flatten)]
        input: Input,
        /// Comma-separated vertex ids.
        seq: String,
    },
    /// Check a candidate green sequence against an iceq-v1 quiver.
    Check {
        #[command(flatten)]
        input: Input,
        /// File holding comma- or whitespace-separated vertex ids.
        seq_file: String,
    },
    /// Operations on tagtri-v1 triangulations.
    Surface {
        #[command(subcommand)]
        cmd: SurfaceCmd,
    },
    /// Mutation class enumeration and catalogs for the named seeds.
    Class {
        #[command(subcommand)]
        cmd: ClassCmd,
    },
    /// Breadth-first search for a shortest maximal green sequence.
    Search {
        #[command(flatten)]
        input: Input,
        /// Search a registered seed instead of a file.
        #[arg(long, conflicts_with = "input")]
        seed: Option<String>,
        #[arg(long)]
        max_len: Option<usize>,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Print the quiver of a triangulation as iceq-v1.
    Quiver {
        #[command(flatten)]
        input: Input,
    },
    /// Flip one arc and print the new triangulation.
    Flip {
        #[command(flatten)]
        input: Input,
        arc: u32,
    },
    /// Run the staged maximal green sequence construction.
    Construct {
        #[command(flatten)]
        input: Input,
        /// Emit the full trace-v1 document instead of the plain sequence.
        #[arg(long)]
        trace: bool,
    },
}

#[derive(Subcommand)]
enum ClassCmd {
    /// Print the size of the seed's mutation class.
    Enumerate {
        #[arg(long)]
        seed: String,
        /// Abort if the class grows beyond this many members.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
    /// Build a catalog with one searched certificate per member.
    Catalog {
        #[arg(long)]
        seed: String,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Output file; omitted writes to stdout.
        #[arg(short, long)]
        output: Option<String>,
        /// Worker threads for the per-member searches.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn read_input(input: &Input) -> Result<String, String> {
    match input.input.as_deref() {
        None | Some("-") => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| e.to_string())?;
            Ok(buf)
        }
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}")),
    }
}

fn parse_seq(text: &str) -> Result<Vec<u32>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|e| format!("bad vertex {s:?}: {e}")))
        .collect()
}

fn load_quiver(input: &Input) -> Result<IceQuiver, String> {
    parse_quiver(&read_input(input)?).map_err(|e| e.to_string())
}

/// 0 success, 1 verified-false, 2 input error.
fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Mutate { input, seq } => {
            let q = load_quiver(&input)?;
            let seq = parse_seq(&seq)?;
            let out = q.mutate_seq(&seq).map_err(|e| e.to_string())?;
            println!("{}", serialize_quiver(&out));
            Ok(0)
        }
        Cmd::Check { input, seq_file } => {
            let q = load_quiver(&input)?;
            let text = std::fs::read_to_string(&seq_file).map_err(|e| format!("{seq_file}: {e}"))?;
            let seq = parse_seq(&text)?;
            let framed = q.framed().map_err(|e| e.to_string())?;
            let res = apply_green_sequence(&framed, &seq).map_err(|e| e.to_string())?;
            println!("{:?}", res.verdict);
            Ok(if res.verdict == Verdict::ValidMaximalGreen {
                0
            } else {
                1
            })
        }
        Cmd::Surface { cmd } => match cmd {
            SurfaceCmd::Quiver { input } => {
                let t = parse_triangulation(&read_input(&input)?).map_err(|e| e.to_string())?;
                let q = t.quiver().map_err(|e| e.to_string())?;
                println!("{}", serialize_quiver(&q));
                Ok(0)
            }
            SurfaceCmd::Flip { input, arc } => {
                let t = parse_triangulation(&read_input(&input)?).map_err(|e| e.to_string())?;
                let next = t.flip(arc).map_err(|e| e.to_string())?;
                println!("{}", serialize_triangulation(&next).map_err(|e| e.to_string())?);
                Ok(0)
            }
            SurfaceCmd::Construct { input, trace } => {
                let t = parse_triangulation(&read_input(&input)?).map_err(|e| e.to_string())?;
                let tr = construct(&t).map_err(|e| e.to_string())?;
                if trace {
                    println!("{}", serialize_trace(&tr));
                } else {
                    let steps: Vec<String> = tr.full.iter().map(u32::to_string).collect();
                    println!("{}", steps.join(","));
                }
                Ok(if tr.verdict == Verdict::ValidMaximalGreen {
                    0
                } else {
                    1
                })
            }
        },
        Cmd::Class { cmd } => match cmd {
            ClassCmd::Enumerate { seed: name, cap } => {
                let q = seed(&name).map_err(|e| e.to_string())?;
                let class = enumerate_class(&q, cap).map_err(|e| e.to_string())?;
                println!("{}", class.len());
                Ok(0)
            }
            ClassCmd::Catalog {
                seed: name,
                max_len,
                cap,
                output,
                jobs,
            } => {
                if let Some(n) = jobs {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global()
                        .map_err(|e| e.to_string())?;
                }
                let q = seed(&name).map_err(|e| e.to_string())?;
                let max_len = max_len.unwrap_or_else(|| default_max_len(q.n_mutable()));
                let cat = build_catalog(&name, max_len, cap).map_err(|e| e.to_string())?;
                let text = serialize_catalog(&cat);
                match output {
                    Some(path) => {
                        std::fs::write(&path, text).map_err(|e| format!("{path}: {e}"))?;
                        eprintln!(
                            "{name}: {} members, {} certified",
                            cat.class_size(),
                            cat.certified()
                        );
                    }
                    None => println!("{text}"),
                }
                Ok(0)
            }
        },
        Cmd::Search {
            input,
            seed: seed_name,
            max_len,
        } => {
            let q = match seed_name {
                Some(name) => seed(&name).map_err(|e| e.to_string())?,
                None => load_quiver(&input)?,
            };
            let max_len = max_len.unwrap_or_else(|| default_max_len(q.n_mutable()));
            match search_mgs(&q, max_len).map_err(|e| e.to_string())? {
                SearchOutcome::Found(seq) => {
                    let steps: Vec<String> = seq.iter().map(u32::to_string).collect();
                    println!("Found {}", steps.join(","));
                    Ok(0)
                }
                SearchOutcome::NotFoundWithin { max_len, states } => {
                    println!("NotFoundWithin {max_len} ({states} states)");
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}
