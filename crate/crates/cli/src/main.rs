use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nilflat::algebra::parse_vectors;
use nilflat::batch::{parse_strategy, run_batch, BatchOptions, TorusSource};
use nilflat::exactlin::{derivation_space, diagonal_derivations, DiagonalTorus, RationalMatrix};
use nilflat::filtration::{search_filtration_with, SearchOptions};
use nilflat::grading::{enumerate_g_sequences, g1_obstructions, grading_from_torus, parse_weights};
use nilflat::metric::{
    build_filtration_metric, build_grading_metric, parse_sigma, ricci_formula, ricci_koszul, sigma_diagonal_metric,
    sigma_string, verify_ricci_flat, MetricSpec, VerifyMode,
};
use nilflat::rational::parse_rational;
use nilflat::{parse_algebra, LieAlgebra, Rational};

// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! say_raw {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "nilflat", version, about = "Ricci-flat metrics on nilpotent Lie algebras")]
struct Cli {
    /// Parameter value, e.g. `--subst lambda=3`; repeatable.
    #[arg(long, global = true, value_name = "NAME=RAT")]
    subst: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TorusArg {
    Diagonal,
    FromFile,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Text,
    Json,
    LatexTable,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an algebra and print its basic invariants.
    Parse {
        algebra: String,
        /// Rewrite in this frame, e.g. `e1+e2,e2,e3`.
        #[arg(long)]
        frame: Option<String>,
    },
    /// Derivation algebra and diagonal torus.
    Derivations {
        algebra: String,
        #[arg(long)]
        frame: Option<String>,
    },
    /// Weight sequences satisfying (G1)-(G5) and the resulting metric.
    Grading {
        algebra: String,
        #[arg(long)]
        frame: Option<String>,
        /// Torus weights per basis vector; the diagonal torus otherwise.
        #[arg(long)]
        weights: Option<String>,
        /// Print up to this many sequences.
        #[arg(long, default_value_t = 1)]
        limit: usize,
    },
    /// Search for an adapted positive filtration.
    Filtration {
        algebra: String,
        #[arg(long)]
        frame: Option<String>,
        /// Print the inequality systems explored.
        #[arg(long)]
        verbose: bool,
    },
    /// Ricci tensor of a metric, by both methods.
    Ricci {
        algebra: String,
        /// Gram matrix rows separated by `;`, entries by `,`.
        #[arg(long)]
        metric: String,
    },
    /// Check a σ-diagonal metric, at given or random parameters.
    VerifySigma {
        algebra: String,
        /// Cycles of σ, e.g. `18 26 37`.
        #[arg(long)]
        sigma: String,
        /// g1,...,gn; random σ-invariant values when omitted.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Resolve every algebra in a classification file.
    Batch {
        file: PathBuf,
        #[arg(long, default_value = "g,f,s")]
        strategy: String,
        #[arg(long, value_enum, default_value_t = TorusArg::FromFile)]
        torus: TorusArg,
        #[arg(long, value_enum, default_value_t = ReportArg::Text)]
        report: ReportArg,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
}

fn parse_subst(items: &[String]) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item.split_once('=').with_context(|| format!("expected NAME=RAT, got `{item}`"))?;
        let q = parse_rational(v.trim()).with_context(|| format!("bad rational `{v}`"))?;
        out.insert(k.trim().to_string(), q);
    }
    Ok(out)
}

fn parse_rationals(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(|s| parse_rational(s.trim()).with_context(|| format!("bad rational `{s}`"))).collect()
}

fn load(text: &str, frame: Option<&str>, subst: &BTreeMap<String, Rational>) -> Result<LieAlgebra> {
    let mut l = parse_algebra(text, subst)?;
    if let Some(f) = frame {
        let cols = parse_vectors(f, l.dim())?;
        l = l.change_basis(&RationalMatrix::from_columns(&cols)?)?;
    }
    if let Err(v) = l.jacobi_check() {
        bail!("Jacobi identity fails: {}", v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
    }
    Ok(l)
}

fn print_certificate(l: &LieAlgebra, m: &MetricSpec) -> Result<()> {
    let v = verify_ricci_flat(l, m, VerifyMode::Exact)?;
    let (p, q) = m.signature();
    say!("metric: {m}");
    say!("signature: ({p},{q})");
    say!("ricci: {} (formula {}, koszul {})", v.describe(), v.formula_zero, v.koszul_zero);
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let subst = parse_subst(&cli.subst)?;
    match cli.command {
        Command::Parse { algebra, frame } => {
            let l = load(&algebra, frame.as_deref(), &subst)?;
            let nice = l.is_nice_basis();
            say!("{l}");
            say!("dimension: {}", l.dim());
            say!("lower central series: {:?}", l.lower_central_series());
            say!("nilpotent: {}", l.is_nilpotent());
            say!("nice basis: {}", nice.is_nice);
        }
        Command::Derivations { algebra, frame } => {
            let l = load(&algebra, frame.as_deref(), &subst)?;
            let t = diagonal_derivations(&l);
            say!("dim Der: {}", derivation_space(&l).dim());
            say!("diagonal torus rank: {}", t.rank());
            for (i, w) in t.weight_rows().iter().enumerate() {
                let w: Vec<String> = w.iter().map(ToString::to_string).collect();
                say!("  e{}: ({})", i + 1, w.join(", "));
            }
        }
        Command::Grading { algebra, frame, weights, limit } => {
            let l = load(&algebra, frame.as_deref(), &subst)?;
            let torus = match weights {
                Some(w) => DiagonalTorus::from_weight_rows(&l, parse_weights(&w)?.into_iter().map(|x| x.0).collect())?,
                None => diagonal_derivations(&l),
            };
            let g = grading_from_torus(&l, &torus)?;
            for (w, idx) in g.layers() {
                let basis: Vec<String> = idx.iter().map(|i| format!("e{}", i + 1)).collect();
                say!("layer {w}: {}", basis.join(","));
            }
            let seqs: Vec<_> = enumerate_g_sequences(&g).take(limit.max(1)).collect();
            if seqs.is_empty() {
                if g.has_zero_weight() {
                    say!("no sequence: 0 is a weight");
                } else if !g1_obstructions(&g).is_empty() {
                    for ob in g1_obstructions(&g) {
                        say!("no sequence: {ob}");
                    }
                } else {
                    say!("no sequence satisfies (G1)-(G5)");
                }
                return Ok(false);
            }
            for s in &seqs {
                say!("sequence: {}  {}", s.basis_string(), s.weights_string());
            }
            print_certificate(&l, &build_grading_metric(&l, &g, &seqs[0])?)?;
        }
        Command::Filtration { algebra, frame, verbose } => {
            let l = load(&algebra, frame.as_deref(), &subst)?;
            let search = search_filtration_with(&l, &SearchOptions::default());
            if verbose {
                say!("orders: {}, systems: {}", search.orders, search.systems);
            }
            match search.witness {
                Some(w) => {
                    say!("filtration: {w}");
                    print_certificate(&l, &build_filtration_metric(&l, &w)?)?;
                }
                None => {
                    say!("no adapted filtration in this basis");
                    return Ok(false);
                }
            }
        }
        Command::Ricci { algebra, metric } => {
            let l = load(&algebra, None, &subst)?;
            let rows = metric.split(';').map(parse_rationals).collect::<Result<Vec<_>>>()?;
            let m = MetricSpec::explicit(RationalMatrix::from_rows(rows)?)?;
            let f = ricci_formula(&l, &m)?;
            let k = ricci_koszul(&l, &m)?;
            say!("metric: {m}");
            say!("ricci (formula):\n{}", f.ric);
            say!("ricci (koszul):\n{}", k.ric);
            if f.ric != k.ric {
                bail!("the two Ricci computations disagree");
            }
            say!("{}", if f.is_flat { "Ricci-flat" } else { "not Ricci-flat" });
            return Ok(f.is_flat);
        }
        Command::VerifySigma { algebra, sigma, params, samples, seed } => {
            let l = load(&algebra, None, &subst)?;
            let s = parse_sigma(&sigma, l.dim())?;
            let v = match params {
                Some(p) => {
                    let m = sigma_diagonal_metric(&s, &parse_rationals(&p)?)?;
                    say!("metric: {m}");
                    verify_ricci_flat(&l, &m, VerifyMode::Exact)?
                }
                None => {
                    let ones = vec![Rational::from_integer(1.into()); l.dim()];
                    let m = sigma_diagonal_metric(&s, &ones)?;
                    verify_ricci_flat(&l, &m, VerifyMode::Generic { samples, seed })?
                }
            };
            say!("sigma: {}", sigma_string(&s));
            say!("{} ({} sample(s))", v.describe(), v.samples);
            if let Some(c) = &v.counterexample {
                let c: Vec<String> = c.iter().map(ToString::to_string).collect();
                say!("counterexample: {}", c.join(","));
            }
            return Ok(v.flat);
        }
        Command::Batch { file, strategy, torus, report, jobs, seed, samples } => {
            let opts = BatchOptions {
                strategies: parse_strategy(&strategy)?,
                torus: match torus {
                    TorusArg::Diagonal => TorusSource::Diagonal,
                    TorusArg::FromFile => TorusSource::FromFile,
                },
                jobs,
                seed,
                samples,
            };
            let r = run_batch(&file, &subst, &opts)?;
            match report {
                ReportArg::Text => say_raw!("{}", r.to_text()),
                ReportArg::Json => say!("{}", serde_json::to_string_pretty(&r.to_json())?),
                ReportArg::LatexTable => say_raw!("{}", r.to_latex_table()),
            }
            return Ok(r.mismatches().is_empty());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
