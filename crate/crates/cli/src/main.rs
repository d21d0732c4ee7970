//! Batch command-line interface.
//!
//! Exit codes: 0 success, 1 mathematical verification failure (an invariant
//! violated at runtime: a bug or a falsified hypothesis), 2 invalid input,
//! 3 resource bound exceeded.

mod commands;
mod harness;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "curvecoh", version, about = "Curve cohomology over Z/n via covering towers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// override the document's modulus
    #[arg(long, global = true)]
    n: Option<u64>,
    /// tower depth (defaults per command)
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// cohomology backend: generic | abelian | auto
    #[arg(long, global = true, default_value = "auto")]
    backend: String,
    /// cap on any materialized group order
    #[arg(long, global = true)]
    max_order: Option<u64>,
    /// cache directory (no caching when absent)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// output format: text | json
    #[arg(long, global = true, default_value = "text")]
    emit: String,
    /// seed for randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Curve-level operations
    Curve {
        #[command(subcommand)]
        op: CurveOp,
    },
    /// Covering constructions and verification
    Cover {
        #[command(subcommand)]
        op: CoverOp,
    },
    /// Cohomology of the sheaf in the document
    Cohomology {
        #[command(subcommand)]
        op: CohomologyOp,
    },
    /// Cup product pairings
    Cup {
        #[command(subcommand)]
        op: CupOp,
    },
    /// Verification harnesses
    Check {
        #[command(subcommand)]
        op: CheckOp,
    },
    /// Cache maintenance
    Cache {
        #[command(subcommand)]
        op: CacheOp,
    },
}

#[derive(Subcommand)]
enum CurveOp {
    /// Validate the curve model and report its combinatorics
    Validate { doc: PathBuf },
    /// H¹(X, Λ) with the Picard/abelianization cross-check
    H1 { doc: PathBuf },
}

#[derive(Subcommand)]
enum CoverOp {
    /// The covering with deck group H¹(X,Λ)^∨, both routes cross-checked
    BuildXn { doc: PathBuf },
    /// The singular-point covering Yᵢ
    BuildYi {
        doc: PathBuf,
        /// singular point index
        #[arg(long, default_value_t = 0)]
        point: usize,
    },
    /// Lift the ⟨n⟩-cover of the normalization through the singular points
    Lift { doc: PathBuf },
    /// Extend the ⟨n⟩-cover of one component across a reducible curve
    Extend {
        doc: PathBuf,
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// Build the ⟨n⟩-covering and run every combinatorial check
    Verify {
        doc: PathBuf,
        /// corrupt a gluing before verifying: point:branch:sheet1:sheet2
        #[arg(long)]
        corrupt_gluing: Option<String>,
    },
}

#[derive(Subcommand)]
enum CohomologyOp {
    H0 {
        doc: PathBuf,
    },
    H1 {
        doc: PathBuf,
        /// corrupt a certified cocycle before re-verification
        #[arg(long, default_value_t = false)]
        corrupt_cocycle: bool,
    },
    H2 {
        doc: PathBuf,
        #[arg(long, default_value_t = false)]
        corrupt_cocycle: bool,
    },
    H3 {
        doc: PathBuf,
    },
    Rgamma {
        doc: PathBuf,
    },
}

#[derive(Subcommand)]
enum CupOp {
    /// H¹ × H¹ → H² over a separably closed base
    #[command(name = "11")]
    Cup11 { doc: PathBuf },
    /// H¹ × H² → H³ over a finite base field
    #[command(name = "12")]
    Cup12 { doc: PathBuf },
}

#[derive(Subcommand)]
enum CheckOp {
    /// Effaceability of H¹ or H² at finite level
    Effaceability {
        doc: PathBuf,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value_t = false)]
        ell_restricted: bool,
    },
    /// Synthetic-tower harnesses for the spectral-sequence toolkit
    Lemma {
        /// one of: 4.1, 4.2, 4.3, 4.4, 4.5
        which: String,
    },
}

#[derive(Subcommand)]
enum CacheOp {
    /// Delete every cache entry
    Gc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = commands::Options {
        n: cli.n,
        depth: cli.depth,
        backend: cli.backend.clone(),
        max_order: cli.max_order,
        cache_dir: cli.cache_dir.clone(),
        emit_json: cli.emit == "json",
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Curve { op } => match op {
            CurveOp::Validate { doc } => commands::curve_validate(doc, &opts),
            CurveOp::H1 { doc } => commands::curve_h1(doc, &opts),
        },
        Command::Cover { op } => match op {
            CoverOp::BuildXn { doc } => commands::cover_build_xn(doc, &opts),
            CoverOp::BuildYi { doc, point } => commands::cover_build_yi(doc, *point, &opts),
            CoverOp::Lift { doc } => commands::cover_lift(doc, &opts),
            CoverOp::Extend { doc, component } => commands::cover_extend(doc, *component, &opts),
            CoverOp::Verify {
                doc,
                corrupt_gluing,
            } => commands::cover_verify(doc, corrupt_gluing.as_deref(), &opts),
        },
        Command::Cohomology { op } => match op {
            CohomologyOp::H0 { doc } => commands::cohomology(doc, 0, false, &opts),
            CohomologyOp::H1 {
                doc,
                corrupt_cocycle,
            } => commands::cohomology(doc, 1, *corrupt_cocycle, &opts),
            CohomologyOp::H2 {
                doc,
                corrupt_cocycle,
            } => commands::cohomology(doc, 2, *corrupt_cocycle, &opts),
            CohomologyOp::H3 { doc } => commands::cohomology(doc, 3, false, &opts),
            CohomologyOp::Rgamma { doc } => commands::rgamma(doc, &opts),
        },
        Command::Cup { op } => match op {
            CupOp::Cup11 { doc } => commands::cup11_cmd(doc, &opts),
            CupOp::Cup12 { doc } => commands::cup12_cmd(doc, &opts),
        },
        Command::Check { op } => match op {
            CheckOp::Effaceability {
                doc,
                degree,
                ell_restricted,
            } => commands::effaceability(doc, *degree, *ell_restricted, &opts),
            CheckOp::Lemma { which } => harness::lemma(which, &opts),
        },
        Command::Cache { op } => match op {
            CacheOp::Gc => commands::cache_gc(&opts),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
