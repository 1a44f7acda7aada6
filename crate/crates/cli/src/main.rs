use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mplred::identities::{
    build_phi5, build_phi5_doubleprime, build_phi5_prime, catalog, census_by_indices, find, golden_names,
    reference_census, reference_total, start_term, terms_with, CensusTable, IdentityRecord, WEIGHT5_ORDER,
};
use mplred::mpl::{expr_to_json, hexpr_to_mpl, render_expr};
use mplred::reduction::{reduce, Scheme};
use mplred::symbolic::{Verdict, DEFAULT_SEED};
use mplred::Error;

#[derive(Parser)]
#[command(name = "mplred", about = "Depth reduction of multiple logarithms and symbol-level identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    #[value(name = "all_n")]
    AllN,
    #[value(name = "odd_n")]
    OddN,
    Naive,
}

impl Mode {
    fn scheme(self) -> Scheme {
        match self {
            Mode::AllN => Scheme::Efficient,
            Mode::OddN => Scheme::Odd,
            Mode::Naive => Scheme::Naive,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::AllN => "all_n",
            Mode::OddN => "odd_n",
            Mode::Naive => "naive",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Reduce [a | b, c, .. | last] and print the part involving a.
    Reduce {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::AllN)]
        mode: Mode,
    },
    /// Check catalog identities at random rational points.
    Verify {
        /// A catalog name, or `all`.
        #[arg(long, default_value = "all")]
        identity: String,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Falls back to MPLRED_SEED, then to the built-in default.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the weight 5 census tables next to the reference counts.
    Census,
    /// List catalog identities and transcribed expressions.
    List,
}

enum Failure {
    Usage(String),
    Verification,
    Internal(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::UnknownIdentity(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            e => Failure::Internal(e),
        }
    }
}

fn seed_from_env(seed: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var("MPLRED_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("MPLRED_SEED is not an integer: `{v}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_reduce(n: usize, mode: Mode, format: Format) -> Result<(), Failure> {
    if n < 3 {
        return Err(Failure::Usage(format!("weight must be at least 3, got {n}")));
    }
    if n > 25 {
        return Err(Failure::Usage(format!("weight {n} is too large")));
    }
    if mode == Mode::OddN && n % 2 == 0 {
        return Err(Failure::Usage(format!("odd_n needs an odd weight, got {n}")));
    }
    let start = start_term(n);
    let raw = hexpr_to_mpl(&reduce(&start, mode.scheme())?)?;
    let phi = terms_with(&raw, &start.lower);
    let order: Vec<&[u32]> = if n == 5 { WEIGHT5_ORDER.to_vec() } else { Vec::new() };
    let census = census_by_indices(&format!("phi{n} ({})", mode.name()), &phi, &order);
    match format {
        Format::Json => print_json(&json!({
            "command": "reduce",
            "n": n,
            "mode": mode.name(),
            "start": start.to_string(),
            "terms": expr_to_json(&phi),
            "census": census,
            "total": census.total(),
        })),
        Format::Text => {
            println!("{start} = phi({}) - phi({}) modulo products, with phi =", start.lower, start.upper);
            print!("{}", render_expr(&phi, true));
            println!();
            print!("{census}");
        }
    }
    Ok(())
}

fn verify_records(records: &[&IdentityRecord], trials: usize, seed: u64) -> Vec<mplred::Result<Verdict>> {
    // independent records run in parallel; results stay in catalog order
    std::thread::scope(|s| {
        let handles: Vec<_> = records.iter().map(|r| s.spawn(move || r.verify(trials, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("verification thread")).collect()
    })
}

fn cmd_verify(identity: &str, trials: usize, seed: Option<u64>, format: Format) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    let seed = seed_from_env(seed)?;
    let records: Vec<&IdentityRecord> =
        if identity == "all" { catalog().iter().collect() } else { vec![find(identity)?] };
    let verdicts = verify_records(&records, trials, seed).into_iter().collect::<mplred::Result<Vec<_>>>()?;
    let all_pass = verdicts.iter().all(|v| v.pass);
    match format {
        Format::Json => print_json(&json!({
            "command": "verify",
            "seed": seed,
            "trials": trials,
            "pass": all_pass,
            "verdicts": verdicts,
        })),
        Format::Text => {
            for (r, v) in records.iter().zip(&verdicts) {
                let residues: Vec<String> = v.results.iter().map(|t| t.residue.to_string()).collect();
                println!(
                    "{:<16} mod {:<5} {}  ({} trials, residues {})",
                    r.name,
                    v.level,
                    if v.pass { "pass" } else { "FAIL" },
                    v.trials,
                    residues.join(",")
                );
            }
            let passed = verdicts.iter().filter(|v| v.pass).count();
            println!("{passed}/{} passed, seed {seed}", verdicts.len());
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn census_entry(name: &str, table: &CensusTable) -> Result<Value, Failure> {
    let reference = reference_census(name)?;
    Ok(json!({
        "name": name,
        "found": table,
        "found_total": table.total(),
        "reference": reference,
        "reference_total": reference_total(name)?,
        "matches": table.diff(&reference).is_empty() && table.total() == reference_total(name)?,
        "differences": table.diff(&reference),
    }))
}

fn cmd_census(format: Format) -> Result<(), Failure> {
    let odd = build_phi5(Scheme::Odd)?;
    let all = build_phi5(Scheme::Efficient)?;
    let prime = build_phi5_prime(&odd)?;
    let doubleprime = build_phi5_doubleprime(&prime)?;
    let tables = [
        ("phi5_odd_n", &odd.census),
        ("phi5_all_n", &all.census),
        ("phi5_prime", &prime.census),
        ("phi5_doubleprime", &doubleprime.census),
    ];
    match format {
        Format::Json => {
            let entries = tables.iter().map(|(n, t)| census_entry(n, t)).collect::<Result<Vec<_>, _>>()?;
            print_json(&json!({ "command": "census", "tables": entries }));
        }
        Format::Text => {
            for (name, table) in tables {
                let reference = reference_census(name)?;
                print!("{}", table.render(Some(&reference)));
                let stated = reference_total(name)?;
                if stated != reference.total() {
                    println!("  (stated reference total {stated}, rows sum to {})", reference.total());
                }
                println!();
            }
        }
    }
    Ok(())
}

fn cmd_list(format: Format) {
    match format {
        Format::Json => {
            let records: Vec<Value> = catalog()
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name,
                        "level": r.level,
                        "source": r.source,
                        "lhs_terms": r.lhs.len(),
                        "rhs_terms": r.rhs.len(),
                    })
                })
                .collect();
            print_json(&json!({ "identities": records, "golden": golden_names() }));
        }
        Format::Text => {
            for r in catalog() {
                println!("{:<16} mod {:<5} {:>4} terms  {}", r.name, r.level, r.lhs.len() + r.rhs.len(), r.source);
            }
            println!();
            println!("transcribed: {}", golden_names().join(", "));
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reduce { n, mode } => cmd_reduce(n, mode, cli.format),
        Command::Verify { identity, trials, seed } => cmd_verify(&identity, trials, seed, cli.format),
        Command::Census => cmd_census(cli.format),
        Command::List => {
            cmd_list(cli.format);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
