//! `hecke`: residual points, formal degrees, transfer morphisms and unipotent
//! packets from the command line.

mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hecke_core::unipotent::{Family, InnerForm};
use hecke_core::HeckeError;

use commands::AlgebraSpec;
use output::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "hecke", version, about = "Exact residues, formal degrees and transfer morphisms for affine Hecke algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weyl orbits of residual points of an algebra, with their residues.
    Residual(AlgebraArgs),
    /// Formal degrees of the discrete series of an algebra (tau(1) = 1),
    /// against the closed forms where they apply.
    Fdeg(AlgebraArgs),
    /// Verifies the transfer morphisms out of a type C algebra.
    StmVerify(AlgebraArgs),
    /// Unipotent types of a family.
    Types(FamilyArgs),
    /// Unipotent discrete series packets of a family.
    Packets(FamilyArgs),
    /// Checks the formal degrees of every packet against the component groups.
    Hii(FamilyArgs),
    /// Runs the closed form, transfer morphism and packet sweeps.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct AlgebraArgs {
    /// Algebra literal such as "C2(0.5,0.5)[q]", "A3[q^2]" or "G2(3,1)[q]".
    #[arg(long)]
    algebra: Option<String>,
    /// Rank of the type C algebra.
    #[arg(long)]
    rank: Option<usize>,
    /// Parameter m_- (decimal or fraction).
    #[arg(long, allow_hyphen_values = true)]
    m_minus: Option<String>,
    /// Parameter m_+ (decimal or fraction).
    #[arg(long, allow_hyphen_values = true)]
    m_plus: Option<String>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// pgl, pu-even, pu-odd, so-odd, pcsp, pco-plus, pco-star, 3d4, g2-split.
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Rank parameter of the family (ignored for the exceptional families).
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Restrict to one inner form (types only).
    #[arg(long, value_parser = parse_inner_form)]
    inner_form: Option<InnerForm>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Bound on |u_-| + |u_+| for the closed form sweep.
    #[arg(long, default_value_t = 13)]
    max_rank: u32,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: HeckeError| e.to_string())
}

fn parse_inner_form(s: &str) -> Result<InnerForm, String> {
    s.parse().map_err(|e: HeckeError| e.to_string())
}

impl From<&AlgebraArgs> for AlgebraSpec {
    fn from(a: &AlgebraArgs) -> Self {
        AlgebraSpec { algebra: a.algebra.clone(), rank: a.rank, m_minus: a.m_minus.clone(), m_plus: a.m_plus.clone() }
    }
}

fn family_rank(a: &FamilyArgs) -> Result<u32, HeckeError> {
    match a.family {
        Family::G2Split | Family::ThreeD4 => Ok(0),
        f if a.n < f.min_rank() => Err(HeckeError::Parse(format!("{f} needs --n >= {}", f.min_rank()))),
        _ => Ok(a.n),
    }
}

fn dispatch(cmd: &Command) -> Result<Report, HeckeError> {
    match cmd {
        Command::Residual(a) => commands::residual(&a.into()),
        Command::Fdeg(a) => commands::fdeg(&a.into()),
        Command::StmVerify(a) => commands::stm_verify(&a.into()),
        Command::Types(a) => commands::types(a.family, family_rank(a)?, a.inner_form),
        Command::Packets(a) => commands::packets(a.family, family_rank(a)?),
        Command::Hii(a) => commands::hii(a.family, family_rank(a)?),
        Command::Selftest(a) => commands::selftest(a.max_rank),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match dispatch(&cli.command) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(report.render(cli.format).as_bytes());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ HeckeError::Parse(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
