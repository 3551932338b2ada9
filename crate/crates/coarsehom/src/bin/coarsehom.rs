//! Command line entry points: compute coarsified (co)homology towers, run the
//! axiom verification suites, export Rips complexes, and discretize spaces.
//!
//! `COARSEHOM_CAP` bounds simplex and tuple counts for every subcommand.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coarsehom::harness::{
    compute_coarsified, generate, verify_suite, CoarsifiedConfig, ExampleSpec, SuiteConfig,
    TheoryKind,
};
use coarsehom::jsonio::{self, homology_csv, parse_ring, MapJson, SpaceJson};
use coarsehom::maps::{discretize, GreedySeed};
use coarsehom::rips::{build_rips, to_dot, to_off};

#[derive(Parser)]
#[command(name = "coarsehom", about = "Coarse (co)homology at desk scale", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coarsified (co)homology pipeline on an example spec.
    Compute {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "Z")]
        ring: String,
        #[arg(long, default_value = "homology")]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<u32>>,
        #[arg(long, default_value_t = 1)]
        max_degree: usize,
    },
    /// Run axiom suites; exit code is nonzero on any failure.
    Verify {
        #[arg(long)]
        suite: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the Rips complex of a space at a level and export it.
    Rips {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "json")]
        export: String,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy (optionally equivariant) discretization of a space.
    Discretize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        sep: usize,
        #[arg(long, default_value_t = false)]
        equivariant: bool,
        /// JSON action ({"generators": {"name": [images]}, ...}) overriding
        /// the spec's built-in action.
        #[arg(long)]
        action: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn cap_from_env(default: usize) -> usize {
    std::env::var("COARSEHOM_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

/// A spec file is either an example-family spec or a raw space presentation.
fn load_example(path: &PathBuf) -> anyhow_free::Result<ExampleSpec> {
    let text = fs::read_to_string(path)?;
    if let Ok(spec) = serde_json::from_str::<ExampleSpec>(&text) {
        return Ok(spec);
    }
    let space: SpaceJson = serde_json::from_str(&text)?;
    Ok(ExampleSpec::new(coarsehom::harness::Family::Custom(space), 1))
}

mod anyhow_free {
    pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;
}

fn run() -> anyhow_free::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute { spec, ring, kind, out, csv, windows, max_degree } => {
            let example = load_example(&spec)?;
            let ring = parse_ring(&ring)?;
            let kind = match kind.as_str() {
                "homology" => TheoryKind::Homology,
                "cohomology" => TheoryKind::Cohomology,
                other => return Err(format!("unknown kind {other}").into()),
            };
            let mut config = CoarsifiedConfig { max_degree, ..Default::default() };
            if let Some(w) = windows {
                config.windows = w;
            }
            config.cap = cap_from_env(config.cap);
            let report = compute_coarsified(&example, ring, kind, &config)?;
            let json = serde_json::to_string_pretty(&report)?;
            match &out {
                Some(p) => fs::write(p, &json)?,
                None => println!("{json}"),
            }
            if let Some(p) = csv {
                fs::write(p, homology_csv(report.stable_groups()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, out } => {
            let config: SuiteConfig = match suite {
                Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
                None => SuiteConfig::default(),
            };
            let report = verify_suite(&config)?;
            for item in &report.items {
                println!("{:?} {:?} {} {}", item.verdict, item.axiom, item.name, item.detail);
            }
            if let Some(p) = out {
                fs::write(p, serde_json::to_string_pretty(&report)?)?;
            }
            if report.failures() == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} failures", report.failures());
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Rips { spec, level, export, max_dim, out } => {
            let example = load_example(&spec)?;
            let space = generate(&example)?.space;
            let all = space.subset(space.points())?;
            let cap = cap_from_env(500_000);
            let cx = build_rips(&space, &all, space.chain().level(level), max_dim, cap)?;
            let body = match export.as_str() {
                "off" => to_off(&cx),
                "dot" => to_dot(&cx, &|p| space.label(p).to_string()),
                "json" => serde_json::to_string_pretty(&jsonio::simplices_json(&space, &cx))?,
                other => return Err(format!("unknown export {other}").into()),
            };
            match out {
                Some(p) => fs::write(p, body)?,
                None => println!("{body}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Discretize { spec, sep, equivariant, action, out } => {
            let example = load_example(&spec)?;
            let generated = generate(&example)?;
            let loaded = match action {
                Some(path) => {
                    let j: MapJson = serde_json::from_str(&fs::read_to_string(path)?)?;
                    Some(j.to_action(generated.space.len())?)
                }
                None => None,
            };
            let action = if equivariant {
                Some(loaded.as_ref().or(generated.action.as_ref()).ok_or("spec has no action")?)
            } else {
                None
            };
            let d = discretize(&generated.space, sep, action, GreedySeed::Ascending)?;
            let space = &generated.space;
            let chosen: Vec<&str> = d.chosen.members.iter().map(|&p| space.label(p)).collect();
            let projection: std::collections::BTreeMap<&str, &str> = space
                .points()
                .map(|p| (space.label(p), space.label(d.projection[p.idx()])))
                .collect();
            let json = serde_json::json!({
                "chosen": chosen,
                "projection": projection,
                "separated": d.separated,
                "dense": d.dense,
                "closeness_level": d.closeness,
                "equivariant": d.equivariant,
            });
            let body = serde_json::to_string_pretty(&json)?;
            match out {
                Some(p) => fs::write(p, body)?,
                None => println!("{body}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
