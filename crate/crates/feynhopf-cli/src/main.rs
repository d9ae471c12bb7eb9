//! `feynhopf`: enumerate graphs and run the verification suites on a theory
//! file.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use feynhopf::bv::{check_master, has_bv_action, toy};
use feynhopf::diffeo::{check_comodule, check_fdb, check_semidirect, check_simple_coaction};
use feynhopf::graphs::Model;
use feynhopf::green::{
    check_cop_green, check_cop_y, check_hopf_ideal, check_quotient_identities, check_quotient_x, green_coefficient,
    st_identities, Greens,
};
use feynhopf::hopf::{check_axioms, check_grading, Hopf};
use feynhopf::rational::fmt_q;
use feynhopf::renorm::{birkhoff_table, check_birkhoff, check_rg, check_st_rg, ToyRules};
use feynhopf::report::Check;
use feynhopf::theory::{parse_theory, TheorySpec};
use feynhopf::{q, Q};

const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "feynhopf", version, about = "Hopf-algebraic checks on Feynman graphs of a gauge theory")]
struct Cli {
    /// Theory file (JSON), or `qed` / `ym` for the bundled theories.
    #[arg(long, global = true, default_value = "ym")]
    theory: String,
    /// Loop cutoff; defaults to the theory's `loop_cutoff`.
    #[arg(long = "Lmax", global = true)]
    lmax: Option<u32>,
    /// Series order D for diffeomorphism checks.
    #[arg(long, global = true, default_value_t = 4)]
    order: u32,
    /// Highest power of z kept in Laurent series; defaults to 2·Lmax + 2.
    #[arg(long, global = true, allow_negative_numbers = true)]
    zmax: Option<i32>,
    /// Seed for toy Feynman rules and random samples.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the 1PI graphs of one residue with symmetry factors and gradings.
    Enumerate {
        /// Residue name (an edge or vertex type).
        residue: String,
        /// Only this loop order.
        #[arg(long)]
        loops: Option<u32>,
    },
    /// Run one verification suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Birkhoff decomposition table of the seeded toy rules, then its checks.
    Birkhoff,
    /// Master-equation constraints on the coupling constants.
    Master,
    /// Every suite in a fixed order.
    ReportAll,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Coassoc,
    Grading,
    CopGreen,
    CopY,
    HopfIdeal,
    QuotientX,
    Fdb,
    Comodule,
    Birkhoff,
    Rg,
    Master,
    St,
}

struct Config {
    spec: TheorySpec,
    lmax: u32,
    order: u32,
    zmax: i32,
    seed: u64,
    format: Format,
}

fn load_theory(arg: &str) -> Result<TheorySpec, String> {
    let path = PathBuf::from(arg);
    if !path.exists() {
        match arg {
            "qed" => return Ok(TheorySpec::qed()),
            "ym" | "yang-mills" => return Ok(TheorySpec::yang_mills()),
            _ => {}
        }
    }
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_theory(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_suite(cfg: &Config, h: &Hopf, suite: Suite) -> Check {
    let gr = Greens::new(h);
    match suite {
        Suite::Coassoc => check_axioms(h, cfg.lmax),
        Suite::Grading => check_grading(h, cfg.lmax),
        Suite::CopGreen => {
            let mut c = Check::new("cop-green");
            for r in h.model.spec.residues() {
                let mut one = check_cop_green(&gr, r);
                one.name = format!("G^{}", h.model.spec.res_name(r));
                c.extend(one);
            }
            c
        }
        Suite::CopY => check_cop_y(&gr, &[q(1, 1), q(-1, 1), q(1, 2)]),
        Suite::HopfIdeal => check_hopf_ideal(&gr),
        Suite::QuotientX => check_quotient_x(&gr),
        Suite::Fdb => {
            let mut c = check_fdb(cfg.seed, 50, 2 * cfg.order, cfg.order);
            c.extend(check_semidirect(cfg.seed, 20, 2, 2, cfg.order));
            c
        }
        Suite::Comodule => {
            let mut c = check_comodule(&gr);
            c.extend(check_simple_coaction(&gr));
            c
        }
        Suite::Birkhoff => check_birkhoff(&ToyRules::new(h, cfg.seed, cfg.zmax), 50, cfg.seed),
        Suite::Rg => {
            let (mut c, _) = check_rg(&ToyRules::new(h, cfg.seed, cfg.zmax));
            if gr.x_vertex().is_some() {
                c.extend(check_st_rg(&gr, cfg.seed, cfg.zmax));
            }
            c
        }
        Suite::Master => {
            let mut c = check_master(&cfg.spec);
            c.extend(toy::check_toy(cfg.seed, 60));
            c
        }
        Suite::St => check_quotient_identities(&gr, &st_identities(&gr)),
    }
}

/// Write to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn render(cfg: &Config, c: &Check) -> String {
    match cfg.format {
        Format::Text => c.render_text(),
        Format::Records => c.render_records(),
    }
}

fn header(cfg: &Config) -> String {
    let fields = [
        ("theory", cfg.spec.name.clone()),
        ("Lmax", cfg.lmax.to_string()),
        ("order", cfg.order.to_string()),
        ("zmax", cfg.zmax.to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    match cfg.format {
        Format::Text => {
            let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("# {}\n", parts.join(" "))
        }
        Format::Records => fields.iter().map(|(k, v)| format!("config:{k}\tvalue:{v}\n")).collect(),
    }
}

fn skipped(cfg: &Config, name: &str, why: &str) -> String {
    match cfg.format {
        Format::Text => format!("# skipped {name}: {why}\n"),
        Format::Records => format!("check:{name}\tskipped:{why}\n"),
    }
}

fn enumerate(cfg: &Config, h: &Hopf, residue: &str, loops: Option<u32>) -> Result<String, String> {
    let spec = &h.model.spec;
    let r = spec.residue_by_name(residue).ok_or_else(|| {
        let known: Vec<&str> = spec.residues().into_iter().map(|r| spec.res_name(r)).collect();
        format!("unknown residue `{residue}` (known: {})", known.join(", "))
    })?;
    let range = match loops {
        Some(l) => l..=l,
        None => 1..=cfg.lmax,
    };
    let names: Vec<&str> = spec.vertices.iter().map(|v| v.name.as_str()).collect();
    let mut out = String::new();
    for l in range {
        if l == 0 || l > cfg.lmax {
            continue;
        }
        for &g in h.generators(r, l).iter() {
            let info = h.info(g);
            let sym = Q::from_integer(1.into()) / green_coefficient(h, g);
            let d: Vec<String> = names.iter().zip(&info.d).filter(|(_, &d)| d != 0).map(|(n, d)| format!("{n}:{d}")).collect();
            match cfg.format {
                Format::Text => {
                    out.push_str(&format!("L={} sym={} d=[{}] {}\n", info.loop_number, fmt_q(&sym), d.join(" "), info.key))
                }
                Format::Records => out.push_str(&format!(
                    "graph:{}\tresidue:{residue}\tloops:{}\tsym:{}\tdegree:{}\n",
                    info.key,
                    info.loop_number,
                    fmt_q(&sym),
                    d.join(",")
                )),
            }
        }
    }
    Ok(out)
}

const ALL_SUITES: [Suite; 12] = [
    Suite::Coassoc,
    Suite::Grading,
    Suite::CopGreen,
    Suite::CopY,
    Suite::HopfIdeal,
    Suite::QuotientX,
    Suite::Fdb,
    Suite::Comodule,
    Suite::Birkhoff,
    Suite::Rg,
    Suite::Master,
    Suite::St,
];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let spec = match load_theory(&cli.theory) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let lmax = cli.lmax.unwrap_or(spec.loop_cutoff);
    let cfg = Config {
        zmax: cli.zmax.unwrap_or(2 * lmax as i32 + 2),
        order: cli.order,
        seed: cli.seed,
        format: cli.format,
        lmax,
        spec,
    };
    let h = Hopf::new(Model::with_window(cfg.spec.clone(), cfg.lmax, cfg.lmax));
    let checks: Vec<Check> = match cli.command {
        Command::Enumerate { residue, loops } => {
            return match enumerate(&cfg, &h, &residue, loops) {
                Ok(s) => {
                    emit(&s);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
        Command::Check { suite: Suite::Master } | Command::Master if !has_bv_action(&cfg.spec) => {
            eprintln!("error: no BV action for theory `{}`", cfg.spec.name);
            return ExitCode::from(EXIT_USAGE);
        }
        Command::Check { suite } => vec![run_suite(&cfg, &h, suite)],
        Command::Birkhoff => {
            let rules = ToyRules::new(&h, cfg.seed, cfg.zmax);
            emit(&birkhoff_table(&rules));
            vec![check_birkhoff(&rules, 50, cfg.seed)]
        }
        Command::Master => vec![run_suite(&cfg, &h, Suite::Master)],
        Command::ReportAll => {
            emit(&header(&cfg));
            let mut suites = ALL_SUITES.to_vec();
            if !has_bv_action(&cfg.spec) {
                suites.retain(|&s| s != Suite::Master);
                emit(&skipped(&cfg, "master", "no BV action for this theory"));
            }
            suites.into_iter().map(|s| run_suite(&cfg, &h, s)).collect()
        }
    };
    for c in &checks {
        emit(&render(&cfg, c));
    }
    // fail beats undecidable beats pass
    let code = checks.iter().map(|c| c.exit_code()).fold(0, |a, b| match (a, b) {
        (1, _) | (_, 1) => 1,
        (2, _) | (_, 2) => 2,
        _ => 0,
    });
    ExitCode::from(code as u8)
}
