//! `udk`: exact moments, unitary t-group certificates, the group catalog and
//! symplectic transitivity checks from the command line.

mod error;
mod reproduce;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use udk_core::catalog::{self, Verification};
use udk_core::designs::{self, McOptions, DEFAULT_T_CAP};
use udk_core::format::GroupFile;
use udk_core::haar::{haar_moment, mc_haar_estimate};
use udk_core::matrep::{FiniteMatrixGroup, DEFAULT_CAP};
use udk_core::symplectic::{self, SympGroup};

use error::{CliError, Exit};
use reproduce::Status;

#[derive(Parser)]
#[command(name = "udk", version, about = "Exact unitary t-group certification for finite matrix groups")]
struct Cli {
    /// Print machine-readable JSON (errors included)
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Haar moment of U(d), optionally with a Monte Carlo estimate
    Haar {
        /// Dimension d of U(d)
        #[arg(long)]
        dim: usize,
        /// Moment index: computes M_2t
        #[arg(long)]
        t: usize,
        /// Monte Carlo sample count
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Exact moment of a group given by a group file
    Moment {
        /// Group file (JSON)
        #[arg(long)]
        group: PathBuf,
        /// Moment index: computes M_2t
        #[arg(long)]
        t: usize,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Largest t with group moment equal to the Haar moment
    Certify {
        /// Group file (JSON)
        #[arg(long)]
        group: PathBuf,
        /// Largest t scanned
        #[arg(long, default_value_t = DEFAULT_T_CAP)]
        tmax: usize,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Also estimate the Haar moments by Monte Carlo with this many samples
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Built-in and curated groups
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Orbit sizes of a symplectic group file on nonzero vectors
    Orbits {
        /// Symplectic group file (JSON with a modulus)
        #[arg(long)]
        group: PathBuf,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Transitive subgroups of Sp2(p) up to conjugacy
    SearchTransitive {
        /// One of 3, 5, 7, 11, 13
        #[arg(long)]
        p: u32,
    },
    /// Curated transitive witnesses in higher rank
    Witness {
        /// Witness name; all witnesses if omitted
        name: Option<String>,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Recompute the anchored values and print expected against computed
    Reproduce {
        /// Section to run
        #[arg(long, default_value = "all", value_parser = ["lemma7", "table1", "dim2", "dim3", "dim4", "symplectic", "all"])]
        section: String,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Monte Carlo samples per dimension for the Haar cross-check
        #[arg(long, default_value_t = 1_000_000)]
        mc: u64,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List catalog entries
    List,
    /// Write the canonical group file of an entry
    Emit {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Close, count and check an entry against its expectations
    Verify {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

/// Successful output: human text and the JSON equivalent, plus exit status.
struct Output {
    text: String,
    json: Value,
    exit: Exit,
}

impl Output {
    fn ok(text: String, json: Value) -> Output {
        Output { text, json, exit: Exit::Ok }
    }
}

fn read_group(path: &Path) -> Result<GroupFile, CliError> {
    Ok(GroupFile::read(path)?)
}

fn unitary_group(path: &Path) -> Result<FiniteMatrixGroup, CliError> {
    let f = read_group(path)?;
    if f.is_symplectic() {
        return Err(CliError::input(format!("{} is a symplectic (modulus) file", path.display())));
    }
    Ok(f.group()?)
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Haar { dim, t, mc, seed } => {
            if *dim == 0 || *t == 0 {
                return Err(CliError::input("--dim and --t must be positive"));
            }
            let m = haar_moment(*dim, *t);
            let mut text = m.to_string();
            let mut j = json!({ "dim": dim, "t": t, "moment": m.to_string() });
            if let Some(n) = mc {
                let e = mc_haar_estimate(*dim, *t, *n, *seed);
                text.push_str(&format!("\nmonte carlo: {:.6} +- {:.6} ({} samples, seed {seed})", e.mean, e.stderr, e.samples));
                j["monte_carlo"] = json!({ "mean": e.mean, "stderr": e.stderr, "samples": e.samples, "seed": seed });
            }
            Ok(Output::ok(text, j))
        }
        Command::Moment { group, t, cap } => {
            if *t == 0 {
                return Err(CliError::input("--t must be positive"));
            }
            let mut g = unitary_group(group)?;
            g.enumerate(*cap)?;
            let m = designs::moment(&g, *t)?;
            let h = haar_moment(g.dim(), *t);
            Ok(Output::ok(
                m.to_string(),
                json!({ "group": g.name(), "dim": g.dim(), "order": g.order()?.to_string(), "t": t, "moment": m.to_string(), "haar": h.to_string() }),
            ))
        }
        Command::Certify { group, tmax, cap, mc, seed } => {
            let mut g = unitary_group(group)?;
            g.enumerate(*cap)?;
            let opts = mc.map(|samples| McOptions { samples, seed: *seed });
            let rep = designs::certify(&g, *tmax, opts)?;
            let mut text = format!("{} (dim {}, order {})\n", rep.group, rep.dim, rep.order);
            for row in &rep.rows {
                text.push_str(&format!(
                    "t = {}: moment {} haar {} {}\n",
                    row.t,
                    row.moment,
                    row.haar,
                    if row.equal { "equal" } else { "differs" }
                ));
            }
            for row in &rep.monte_carlo {
                text.push_str(&format!("t = {}: monte carlo {:.4} +- {:.4}\n", row.t, row.mean, row.stderr));
            }
            text.push_str(&format!("max t = {} (scanned up to {})", rep.max_t, rep.t_cap));
            Ok(Output::ok(text, serde_json::to_value(&rep).expect("serializable")))
        }
        Command::Catalog { action } => catalog_command(action),
        Command::Orbits { group, cap } => {
            let h = SympGroup::from_file(&read_group(group)?)?;
            let orbits = h.orbits();
            let cert = h.transitivity_certificate(*cap)?;
            let text = format!(
                "orbit sizes {:?}\ntransitive: {}{}",
                orbits,
                cert.is_some(),
                cert.as_ref()
                    .map(|c| format!(" (order {} = {} x {})", c.order, c.orbit, c.stabilizer))
                    .unwrap_or_default()
            );
            Ok(Output::ok(text, json!({ "p": h.p(), "dimension": 2 * h.n(), "orbits": orbits, "transitive": cert.is_some(), "certificate": cert })))
        }
        Command::SearchTransitive { p } => {
            let classes = symplectic::search_transitive_2dim(*p)?;
            let mut text = String::new();
            for c in &classes {
                let f = &c.fingerprint;
                text.push_str(&format!(
                    "order {} center {} derived {} class size {} element orders {:?}\n",
                    f.order, f.center_order, f.derived_order, c.class_size, f.order_histogram
                ));
            }
            text.pop();
            Ok(Output::ok(text, json!({ "p": p, "classes": classes })))
        }
        Command::Witness { name, cap } => {
            let names: Vec<&str> = match name {
                Some(n) => vec![n.as_str()],
                None => symplectic::WITNESSES.to_vec(),
            };
            let mut text = String::new();
            let mut reports = Vec::new();
            let mut ok = true;
            for n in names {
                let rep = symplectic::verify_witness(n, *cap)?;
                ok &= rep.passed();
                text.push_str(&format!("{}: {}\n", n, if rep.passed() { "pass" } else { "FAIL" }));
                for c in &rep.checks {
                    text.push_str(&format!("  {}: expected {}, computed {}\n", c.property, c.expected, c.computed));
                }
                reports.push(rep);
            }
            text.pop();
            Ok(Output {
                text,
                json: json!({ "witnesses": reports }),
                exit: if ok { Exit::Ok } else { Exit::Violation },
            })
        }
        Command::Reproduce { section, cap, mc } => {
            let mut ctx = reproduce::Context::new(*cap, *mc);
            let rows = reproduce::run(section, &mut ctx)?;
            let failed = rows.iter().any(|r| r.status == Status::Fail);
            let mut text = String::new();
            for r in &rows {
                let tag = match r.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                    Status::Note => "NOTE",
                };
                text.push_str(&format!("[{tag}] {:<10} {} | expected {} | computed {}\n", r.section, r.anchor, r.expected, r.computed));
            }
            text.push_str(&format!(
                "{} rows: {} pass, {} fail, {} skipped, {} notes",
                rows.len(),
                rows.iter().filter(|r| r.status == Status::Pass).count(),
                rows.iter().filter(|r| r.status == Status::Fail).count(),
                rows.iter().filter(|r| r.status == Status::Skipped).count(),
                rows.iter().filter(|r| r.status == Status::Note).count(),
            ));
            Ok(Output {
                text,
                json: json!({ "section": section, "rows": rows, "passed": !failed }),
                exit: if failed { Exit::Violation } else { Exit::Ok },
            })
        }
    }
}

fn verification_json(v: &Verification, g: &FiniteMatrixGroup) -> Value {
    json!({
        "name": v.name,
        "order": g.order().map(|o| o.to_string()).unwrap_or_default(),
        "passed": v.passed(),
        "checks": v.checks.iter().map(|c| json!({
            "property": c.property, "expected": c.expected, "computed": c.computed, "pass": c.pass
        })).collect::<Vec<_>>(),
    })
}

fn catalog_command(action: &CatalogAction) -> Result<Output, CliError> {
    match action {
        CatalogAction::List => {
            let entries = catalog::list_catalog();
            let text = entries
                .iter()
                .map(|e| format!("{:<22} dim {:<3} {:<13} {}", e.name, e.dim, e.kind.as_str(), e.description))
                .collect::<Vec<_>>()
                .join("\n");
            let j = entries
                .iter()
                .map(|e| json!({ "name": e.name, "dim": e.dim, "kind": e.kind.as_str(), "description": e.description }))
                .collect::<Vec<_>>();
            Ok(Output::ok(text, json!({ "entries": j })))
        }
        CatalogAction::Emit { name, out } => match out {
            Some(path) => {
                catalog::emit(name, path)?;
                Ok(Output::ok(format!("wrote {}", path.display()), json!({ "name": name, "path": path })))
            }
            None => {
                let f = catalog::group_file(name)?;
                let text = f.to_json();
                Ok(Output::ok(text.trim_end().to_string(), serde_json::to_value(&f).expect("serializable")))
            }
        },
        CatalogAction::Verify { name, all, cap } => {
            let names: Vec<&str> = match (name, all) {
                (Some(n), false) => vec![n.as_str()],
                (None, true) => catalog::list_catalog().iter().map(|e| e.name).collect(),
                _ => return Err(CliError::input("give either an entry name or --all")),
            };
            let mut text = String::new();
            let mut reports = Vec::new();
            let mut ok = true;
            let many = names.len() > 1;
            for n in names {
                match catalog::verify(n, *cap) {
                    Ok((g, v)) => {
                        ok &= v.passed();
                        text.push_str(&format!("{}: {}\n", n, if v.passed() { "pass" } else { "FAIL" }));
                        for c in &v.checks {
                            text.push_str(&format!("  {}: expected {}, computed {}\n", c.property, c.expected, c.computed));
                        }
                        reports.push(verification_json(&v, &g));
                    }
                    Err(udk_core::catalog::CatalogError::DataMissing { name, path }) if many => {
                        text.push_str(&format!("{name}: skipped, no data at {path}\n"));
                        reports.push(json!({ "name": name, "skipped": format!("no data at {path}") }));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            text.pop();
            Ok(Output {
                text,
                json: json!({ "entries": reports }),
                exit: if ok { Exit::Ok } else { Exit::Violation },
            })
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `udk ... | head`) is not an error.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}").and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                emit(&serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                emit(&out.text);
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            if cli.json {
                emit(&serde_json::to_string_pretty(&e.to_json()).expect("serializable"));
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.exit as u8)
        }
    }
}
