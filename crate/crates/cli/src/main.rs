use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hclass_core::cohen::{
    cohen_eisenstein_series, holomorphic_eisenstein_coefficients, shadow_preimage_series,
    shintani_trace_series, QSeries,
};
use hclass_core::config::{Overrides, RunConfig};
use hclass_core::kloosterman::{
    paired_two_kappa, plus_zeta_closed, plus_zeta_direct, zeta_k_constants, zeta_k_level,
    ConstantKind,
};
use hclass_core::qform::{imag_trace, real_trace_unfolded};
use hclass_core::verify::{self, format_value, VerificationReport, ZetaPath};
use hclass_core::Result;

/// Generalized Hurwitz class numbers, Kloosterman zeta values and
/// quadratic traces, with a verification harness for the identities
/// relating them.
#[derive(Parser)]
#[command(name = "hclass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generalized Hurwitz class numbers H_{k,ell,N}(n) for 0 <= n <= nmax.
    Hurwitz {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        ell: u64,
        #[arg(long, default_value_t = 1)]
        level: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// q-expansions of the derived series.
    Series {
        #[arg(value_enum)]
        kind: SeriesKind,
        #[arg(long)]
        k: u32,
        /// Level N, or the prime p for the trace series.
        #[arg(long, default_value_t = 1)]
        level: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Kloosterman zeta values.
    Zeta {
        #[command(subcommand)]
        which: ZetaCommand,
    },
    /// Traces of the weight 0 Eisenstein series over quadratic forms.
    Trace {
        #[command(subcommand)]
        which: TraceCommand,
    },
    /// Run identity suites and print their reports as a JSON array.
    /// Exits with status 1 if any report fails.
    Verify {
        #[command(subcommand)]
        suite: Suite,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesKind {
    /// The Cohen–Eisenstein series with ell = N.
    Cohen,
    /// The class number combination whose shadow is the plus space Eisenstein series.
    ShadowPreimage,
    /// The normalized trace generating series at prime level (scalar plus series).
    ShintaniTraces,
    /// The holomorphic Eisenstein series of weight 2k and level N.
    Eisenstein,
}

#[derive(Subcommand)]
enum ZetaCommand {
    /// The level N zeta value at s = 2k, exactly. n = 0 gives the numeric constant.
    Level {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u32,
    },
    /// The constant term zeta value over moduli coprime to N.
    Modified {
        #[arg(long)]
        level: u64,
        #[arg(long)]
        k: u32,
    },
    /// The plus space zeta value at s = k + 1/2.
    Plus {
        #[arg(long)]
        level: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        k: u32,
        /// Sum the Kloosterman series up to --c-max instead of using the closed form.
        #[arg(long)]
        direct: bool,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Real quadratic trace at a positive non-square discriminant.
    Real {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        disc: i64,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Trace over Heegner points of discriminant -disc.
    Imag {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        level: u64,
        /// |D|; a negative value is accepted as the discriminant itself.
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        /// Also count the negative definite classes.
        #[arg(long)]
        mirror: bool,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Subcommand)]
enum Suite {
    /// Class number combination against the plus space zeta values.
    ShadowPreimage {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 3, 15])]
        level: Vec<u64>,
        #[arg(long, default_value_t = 60)]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = PathArg::Both)]
        path: PathArg,
    },
    /// Real quadratic traces at prime level against the class number series.
    ShintaniTraces {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
        p: Vec<u64>,
        #[arg(long, default_value_t = 40)]
        nmax: u64,
    },
    /// Square discriminants: two closed routes to the same coefficient.
    SquareTraces {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1i64, 4, 9, 16, 25])]
        disc: Vec<i64>,
    },
    /// Heegner traces of the weight 0 Eisenstein series against plus space zeta values.
    HeegnerTraces {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [3i64, 4, 7, 8, 11, 12])]
        disc: Vec<i64>,
    },
    /// Constant term of the Millson lift.
    MillsonConstant {
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4])]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [3u64, 5])]
        p: Vec<u64>,
    },
    /// Kloosterman, local factor, Kohnen, theta integral and exact constant checks.
    Primitives,
    /// Every suite on its default grid.
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Closed,
    Direct,
    Both,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Tolerance for every non-exact comparison.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    a_max: Option<u64>,
    #[arg(long, global = true)]
    c_max: Option<u64>,
    #[arg(long, global = true)]
    lattice_bound: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Halve every truncation bound and use the relaxed tolerances.
    #[arg(long, global = true)]
    quick: bool,
    /// Record wall time per report (otherwise runtime_ms is 0 and output is reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

impl RunFlags {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_env()?;
        cfg.apply(&Overrides {
            a_max: self.a_max,
            c_max: self.c_max,
            lattice_bound: self.lattice_bound,
            tol: self.tol,
            seed: self.seed,
            quick: self.quick.then_some(true),
            timing: self.timing.then_some(true),
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_series(s: &QSeries, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", s.to_json()?),
        Format::Csv => print!("{}", s.to_csv()),
    }
    Ok(())
}

fn run_suite(suite: &Suite, cfg: &RunConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    match suite {
        Suite::ShadowPreimage {
            k,
            level,
            nmax,
            path,
        } => {
            let paths: &[ZetaPath] = match path {
                PathArg::Closed => &[ZetaPath::Closed],
                PathArg::Direct => &[ZetaPath::Direct],
                PathArg::Both => &[ZetaPath::Closed, ZetaPath::Direct],
            };
            for &k in k {
                for &n in level {
                    for &p in paths {
                        out.extend(verify::suite_shadow_preimage(k, n, *nmax, p, cfg)?);
                    }
                }
            }
        }
        Suite::ShintaniTraces { k, p, nmax } => {
            for &k in k {
                for &p in p {
                    out.extend(verify::suite_shintani_traces(k, p, *nmax, cfg)?);
                }
            }
        }
        Suite::SquareTraces { k, p, disc } => {
            for &k in k {
                for &p in p {
                    out.extend(verify::suite_square_traces(k, p, disc, cfg)?);
                }
            }
        }
        Suite::HeegnerTraces { k, p, disc } => {
            for &k in k {
                for &p in p {
                    out.extend(verify::suite_heegner_traces(k, p, disc, cfg)?);
                }
            }
        }
        Suite::MillsonConstant { k, p } => {
            for &k in k {
                for &p in p {
                    out.push(verify::suite_millson_constant(k, p, cfg)?);
                }
            }
        }
        Suite::Primitives => out = verify::suite_primitives(cfg)?,
        Suite::All => out = verify::full_run(cfg)?,
    }
    out.sort_by(|a, b| (&a.identity_id, &a.parameters).cmp(&(&b.identity_id, &b.parameters)));
    Ok(out)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Hurwitz {
            k,
            ell,
            level,
            nmax,
            format,
        } => print_series(&cohen_eisenstein_series(k, ell, level, nmax)?, format)?,
        Command::Series {
            kind,
            k,
            level,
            nmax,
            format,
        } => match kind {
            SeriesKind::Cohen => {
                print_series(&cohen_eisenstein_series(k, level, level, nmax)?, format)?
            }
            SeriesKind::ShadowPreimage => {
                print_series(&shadow_preimage_series(k, level, nmax)?, format)?
            }
            SeriesKind::Eisenstein => print_series(
                &holomorphic_eisenstein_coefficients(k, level, nmax)?,
                format,
            )?,
            SeriesKind::ShintaniTraces => {
                let (scalar, series) = shintani_trace_series(k, level, nmax)?;
                match format {
                    Format::Json => println!(
                        "{}",
                        serde_json::to_string_pretty(
                            &json!({ "scalar": scalar, "series": series })
                        )?
                    ),
                    Format::Csv => {
                        eprintln!("scalar: {} * sqrt({})", scalar.coefficient, scalar.radicand);
                        print_series(&series, format)?;
                    }
                }
            }
        },
        Command::Zeta { which } => {
            let value = match which {
                ZetaCommand::Level { level, n, k } if n > 0 => {
                    let exact = zeta_k_level(level, n as i64, k)?;
                    json!({ "exact": exact.to_string(), "value": exact.to_f64() })
                }
                ZetaCommand::Level { level, k, .. } => {
                    json!({ "value": zeta_k_constants(level, k, ConstantKind::LevelInfinity)? })
                }
                ZetaCommand::Modified { level, k } => {
                    json!({ "value": zeta_k_constants(level, k, ConstantKind::Modified)? })
                }
                ZetaCommand::Plus {
                    level,
                    n,
                    k,
                    direct,
                    run,
                } => {
                    if direct {
                        let cfg = run.config()?;
                        let t = plus_zeta_direct(
                            paired_two_kappa(k),
                            level,
                            n,
                            k,
                            cfg.effective_truncation().c_max,
                        )?;
                        json!({ "value": format_value(t.value), "tail_bound": t.tail_bound })
                    } else {
                        json!({ "value": format_value(plus_zeta_closed(k, level, n)?) })
                    }
                }
            };
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        Command::Trace { which } => {
            let t = match which {
                TraceCommand::Real {
                    k,
                    level,
                    disc,
                    run,
                } => real_trace_unfolded(k, level, disc, &run.config()?.effective_truncation())?,
                TraceCommand::Imag {
                    k,
                    level,
                    disc,
                    mirror,
                    run,
                } => imag_trace(
                    k,
                    level,
                    -disc.abs(),
                    mirror,
                    &run.config()?.effective_truncation(),
                )?,
            };
            println!("{}", serde_json::to_string_pretty(&t)?);
        }
        Command::Verify { suite, run } => {
            let reports = run_suite(&suite, &run.config()?)?;
            println!("{}", verify::to_json(&reports)?);
            return Ok(verify::all_pass(&reports));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
