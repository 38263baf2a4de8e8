//! Command-line front end. Every report is a JSON object on stdout carrying
//! `"v": 1`; exact numbers are rational strings. Exit codes: 0 success or
//! certified, 1 refuted, 2 input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::binquad::{check_iso_design, d_constant, enumerate_isotropic, maximal_families, spread, SigmaSet};
use crate::clifford::{build_design, compare_sigma_paths, verify_tt_with};
use crate::error::{Error, Result};
use crate::exactalg::rational::{format_rational, parse_rational, pow2};
use crate::grassmann::{expected_constant, verify_design, Configuration};
use crate::lattice::{catalog, check_eutaxy, check_perfection, minimal_sections, rankin_from, Lattice};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "grassdex", version, about = "Exact Grassmannian design certificates")]
pub struct Cli {
    /// Worker threads (defaults to available parallelism)
    #[arg(long, global = true, env = "GRASSDEX_WORKERS")]
    pub workers: Option<usize>,

    /// Suppress progress messages on stderr
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify or refute a configuration file as a 2t-design
    Verify {
        /// Configuration JSON
        file: PathBuf,
        #[arg(long, short)]
        t: u32,
    },
    /// Minimal sections, Rankin invariants and perfection of a lattice
    Lattice {
        /// Catalog name (Z<n>, D4, E6, E7, E8, BW4, BW8, BW16) or lattice JSON file
        target: String,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Enumerate minimal m-sections and verify them as a design
        #[arg(long)]
        sections: bool,
        #[arg(long)]
        rankin: bool,
        /// Perfection and eutaxy of the section set
        #[arg(long)]
        perfection: bool,
        /// Largest t tested on the sections
        #[arg(long, short, default_value_t = 3)]
        t: u32,
        /// Norm bound for the vector search (rational string)
        #[arg(long)]
        search_bound: Option<String>,
        /// Write the section configuration as JSON
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
    /// Build D_Sigma from isotropic subspaces and verify it
    Clifford {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        w: usize,
        #[arg(long, value_enum, default_value_t = SigmaSource::All)]
        sigma: SigmaSource,
        #[arg(long, short, default_value_t = 2)]
        t: u32,
        /// Compare fast sigma against projector traces on every pair
        #[arg(long)]
        pairwise: bool,
        /// Write D_Sigma as configuration JSON
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
    /// Exact constants c_{m,n}(2t) or d_{w,k}(t) with the bridging identity
    Constants {
        #[arg(long, requires = "n", conflicts_with_all = ["k", "w"])]
        m: Option<usize>,
        #[arg(long, requires = "m")]
        n: Option<usize>,
        #[arg(long, requires = "w")]
        k: Option<usize>,
        #[arg(long, requires = "k")]
        w: Option<usize>,
        #[arg(long, short)]
        t: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SigmaSource {
    /// every totally isotropic w-subspace
    All,
    /// a spread of w-subspaces
    Spread,
}

struct Outcome {
    inputs: Value,
    result: Value,
    exit: i32,
    caveats: Vec<String>,
}

struct Progress<'a> {
    quiet: bool,
    err: &'a mut (dyn Write + Send),
}

impl Progress<'_> {
    fn say(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.err, "grassdex: {msg}");
        }
    }
}

fn r(x: &crate::exactalg::rational::Rational) -> Value {
    Value::String(format_rational(x))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let pool = match cli.workers {
        Some(0) => {
            let _ = writeln!(err, "grassdex: --workers must be positive");
            return EXIT_INPUT;
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "grassdex: {e}");
            return EXIT_INPUT;
        }
    };
    let workers = pool.current_num_threads();
    let name = command_name(&cli.command);
    let start = Instant::now();
    let mut progress = Progress { quiet: cli.quiet, err };
    let outcome = pool.install(|| execute(&cli.command, &mut progress));
    let elapsed_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok(o) => {
            let doc = json!({
                "v": SCHEMA_VERSION,
                "command": name,
                "inputs": o.inputs,
                "result": o.result,
                "caveats": o.caveats,
                "workers": workers,
                "elapsed_ms": elapsed_ms,
            });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json value"));
            o.exit
        }
        Err(e) => {
            let doc = json!({ "v": SCHEMA_VERSION, "command": name, "error": e.to_string() });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json value"));
            progress.say(&format!("error: {e}"));
            EXIT_INPUT
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Verify { .. } => "verify",
        Command::Lattice { .. } => "lattice",
        Command::Clifford { .. } => "clifford",
        Command::Constants { .. } => "constants",
    }
}

fn execute(cmd: &Command, progress: &mut Progress) -> Result<Outcome> {
    match cmd {
        Command::Verify { file, t } => cmd_verify(file, *t, progress),
        Command::Lattice {
            target,
            m,
            sections,
            rankin,
            perfection,
            t,
            search_bound,
            emit_config,
        } => cmd_lattice(
            LatticeArgs {
                target,
                m: *m,
                sections: *sections,
                rankin: *rankin,
                perfection: *perfection,
                t: *t,
                search_bound: search_bound.as_deref(),
                emit_config: emit_config.as_deref(),
            },
            progress,
        ),
        Command::Clifford {
            k,
            w,
            sigma,
            t,
            pairwise,
            emit_config,
        } => cmd_clifford(*k, *w, *sigma, *t, *pairwise, emit_config.as_deref(), progress),
        Command::Constants { m, n, k, w, t } => cmd_constants(*m, *n, *k, *w, *t),
    }
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn write_config(path: &Path, cfg: &Configuration) -> Result<()> {
    Ok(std::fs::write(path, cfg.to_json_string())?)
}

fn cmd_verify(file: &Path, t: u32, progress: &mut Progress) -> Result<Outcome> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let cfg = Configuration::from_json_str(&read_text(file)?)?;
    progress.say(&format!("{} points in G({}, {}), pair sums up to t = {t}", cfg.len(), cfg.m(), cfg.n()));
    let report = verify_design(&cfg, t)?;
    let certified = report.strength >= t;
    Ok(Outcome {
        inputs: json!({ "file": file.display().to_string(), "t": t }),
        result: json!({ "certified": certified, "design": 2 * t, "report": report }),
        exit: if certified { EXIT_OK } else { EXIT_REFUTED },
        caveats: vec![],
    })
}

struct LatticeArgs<'a> {
    target: &'a str,
    m: usize,
    sections: bool,
    rankin: bool,
    perfection: bool,
    t: u32,
    search_bound: Option<&'a str>,
    emit_config: Option<&'a Path>,
}

fn load_lattice(target: &str) -> Result<Lattice> {
    let path = Path::new(target);
    if path.is_file() {
        Lattice::from_json_str(&read_text(path)?)
    } else {
        catalog(target)
    }
}

fn cmd_lattice(a: LatticeArgs, progress: &mut Progress) -> Result<Outcome> {
    let lat = load_lattice(a.target)?;
    let bound = a.search_bound.map(parse_rational).transpose()?;
    progress.say(&format!("lattice of rank {}, searching minimal {}-sections", lat.n(), a.m));
    let sections = minimal_sections(&lat, a.m, bound)?;
    let mut result = json!({
        "rank": lat.n(),
        "det": r(&lat.det()),
        "minimum": r(&lat.minimum()),
        "is_integral": lat.is_integral(),
        "is_even": lat.is_even(),
        "m": a.m,
        "delta_m": r(&sections.delta),
        "section_count": sections.len(),
        "search_bound": r(&sections.search_bound),
    });
    let caveats = vec![format!(
        "sections are complete among lattice vectors of norm at most {}",
        format_rational(&sections.search_bound)
    )];
    if a.sections {
        let cfg = sections.configuration(&lat)?;
        progress.say(&format!("verifying {} sections up to t = {}", cfg.len(), a.t));
        let report = verify_design(&cfg, a.t)?;
        result["design"] = json!({
            "strength": report.strength,
            "verdicts": report.levels.iter().map(|l| json!({"t": l.t, "design": 2 * l.t, "is_design": l.is_design})).collect::<Vec<_>>(),
            "report": report,
        });
        if let Some(path) = a.emit_config {
            write_config(path, &cfg)?;
            result["config_file"] = json!(path.display().to_string());
        }
    }
    if a.rankin {
        result["rankin"] = serde_json::to_value(rankin_from(&lat, &sections))?;
    }
    if a.perfection {
        result["perfection"] = serde_json::to_value(check_perfection(&lat, &sections))?;
        result["eutaxy"] = serde_json::to_value(check_eutaxy(&lat, &sections)?)?;
    }
    Ok(Outcome {
        inputs: json!({
            "target": a.target,
            "m": a.m,
            "sections": a.sections,
            "rankin": a.rankin,
            "perfection": a.perfection,
            "t": a.t,
        }),
        result,
        exit: EXIT_OK,
        caveats,
    })
}

fn tt_block(sigma: &SigmaSet, t: u32, pairwise: bool, progress: &mut Progress) -> Result<(Value, Configuration)> {
    progress.say(&format!("building D_Sigma from {} subspaces", sigma.len()));
    let build = build_design(sigma)?;
    progress.say(&format!("{} points, checking t = 1..={t} by fast and trace paths", build.configuration.len()));
    let report = verify_tt_with(sigma, &build, t)?;
    let mut v = json!({
        "sigma_size": sigma.len(),
        "points": report.design_size,
        "distinct": report.distinct,
        "collisions": report.collisions,
        "subspace_dim": 1usize << report.s,
        "ambient_dim": 1usize << report.k,
        "identities_hold": report.identities_hold(),
        "is_design": report.is_design(t),
        "levels": report.levels,
    });
    if pairwise {
        progress.say("comparing sigma pairwise");
        v["pairwise"] = serde_json::to_value(compare_sigma_paths(sigma, &build)?)?;
    }
    Ok((v, build.configuration))
}

fn cmd_clifford(
    k: usize,
    w: usize,
    source: SigmaSource,
    t: u32,
    pairwise: bool,
    emit: Option<&Path>,
    progress: &mut Progress,
) -> Result<Outcome> {
    if !(1..=4).contains(&k) || w == 0 || w > k {
        return Err(Error::InvalidArgument(format!("need 1 <= w <= k <= 4, got k = {k}, w = {w}")));
    }
    let sigma = match source {
        SigmaSource::All => enumerate_isotropic(k, w)?,
        SigmaSource::Spread => spread(k, w)?,
    };
    let (mut result, cfg) = tt_block(&sigma, t, pairwise, progress)?;
    result["iso_checks"] = serde_json::to_value(
        (0..t)
            .map(|j| check_iso_design(&sigma, j))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let mut caveats = Vec::new();
    if source == SigmaSource::Spread && t > 2 {
        caveats.push("spread levels beyond t = 2 are reported as data".to_string());
    }
    if source == SigmaSource::All && w == k && sigma.len() > 1 {
        let (fa, fb) = maximal_families(&sigma)?;
        let mut fams = Vec::new();
        for fam in [fa, fb] {
            fams.push(tt_block(&fam, t, false, progress)?.0);
        }
        result["families"] = Value::Array(fams);
        caveats.push("family split is reported as data; no correspondence with lattice constructions is asserted".into());
    }
    if let Some(path) = emit {
        write_config(path, &cfg)?;
        result["config_file"] = json!(path.display().to_string());
    }
    Ok(Outcome {
        inputs: json!({
            "k": k,
            "w": w,
            "sigma": match source { SigmaSource::All => "all", SigmaSource::Spread => "spread" },
            "t": t,
        }),
        result,
        exit: EXIT_OK,
        caveats,
    })
}

fn cmd_constants(m: Option<usize>, n: Option<usize>, k: Option<usize>, w: Option<usize>, t: u32) -> Result<Outcome> {
    match (m, n, k, w) {
        (Some(m), Some(n), None, None) => {
            let c = expected_constant(m, n, t)?;
            Ok(Outcome {
                inputs: json!({ "m": m, "n": n, "t": t }),
                result: json!({ "c": r(&c) }),
                exit: EXIT_OK,
                caveats: vec![],
            })
        }
        (None, None, Some(k), Some(w)) => {
            if w == 0 || w > k || k > 8 {
                return Err(Error::InvalidArgument(format!("need 1 <= w <= k <= 8, got k = {k}, w = {w}")));
            }
            let d = d_constant(k, w, t)?;
            let mut result = json!({ "d": r(&d) });
            if (1..=3).contains(&t) && k < 63 {
                let s = k - w;
                let c = expected_constant(1 << s, 1 << k, t)?;
                let scaled = pow2(-((2 * s as i64 - k as i64) * i64::from(t))) * &c;
                let d_prev = d_constant(k, w, t - 1)?;
                result["bridge"] = json!({
                    "s": s,
                    "c": r(&c),
                    "scaled_c": r(&scaled),
                    "d_prev": r(&d_prev),
                    "holds": scaled == d_prev,
                });
            }
            Ok(Outcome {
                inputs: json!({ "k": k, "w": w, "t": t }),
                result,
                exit: EXIT_OK,
                caveats: vec![],
            })
        }
        _ => Err(Error::InvalidArgument("give either --m and --n, or --k and --w".into())),
    }
}

/// Exact verdict helper shared with the acceptance suite: `2^-((2s-k)t) c_{2^s,2^k}(2t)`.
pub fn bridge_lhs(k: usize, s: usize, t: u32) -> Result<crate::exactalg::rational::Rational> {
    let c = expected_constant(1 << s, 1 << k, t)?;
    Ok(pow2(-((2 * s as i64 - k as i64) * i64::from(t))) * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, Value) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["grassdex", "--quiet"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        let v = serde_json::from_slice(&out).unwrap_or(Value::Null);
        (code, v)
    }

    #[test]
    fn constants_line() {
        let (code, v) = call(&["constants", "--m", "1", "--n", "4", "--t", "1"]);
        assert_eq!(code, 0);
        assert_eq!(v["v"], 1);
        assert_eq!(v["result"]["c"], "1/4");
    }

    #[test]
    fn constants_bridge() {
        let (_, v) = call(&["constants", "--k", "2", "--w", "2", "--t", "1"]);
        assert_eq!(v["result"]["d"], "2");
        let (_, v) = call(&["constants", "--k", "2", "--w", "1", "--t", "2"]);
        assert_eq!(v["result"]["bridge"]["c"], "10/9");
        assert_eq!(v["result"]["bridge"]["d_prev"], "10/9");
        assert_eq!(v["result"]["bridge"]["holds"], true);
        assert!(bridge_lhs(2, 1, 2).unwrap() == crate::exactalg::rational::ratio(10, 9));
    }

    #[test]
    fn bad_usage_is_input_error() {
        assert_eq!(call(&["constants", "--t", "1"]).0, EXIT_INPUT);
        assert_eq!(call(&["nonsense"]).0, EXIT_INPUT);
        assert_eq!(call(&["lattice", "NOPE"]).0, EXIT_INPUT);
    }
}
