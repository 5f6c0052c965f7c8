//! Batch front end for the toric workbench. Every subcommand reads files,
//! writes files into `--out`, and prints a terse summary; identical
//! configuration always produces byte-identical output files.
//!
//! Exit codes: 0 all checks pass; 2 a check was performed and came out false;
//! 3 invalid input; 4 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use toric_workbench::bott::{build_fan, BottTowerSpec, RayLabel};
use toric_workbench::divisors::{
    canonical_divisor, intersection_number, picard_rank, principal_divisor, walls, ToricDivisor,
};
use toric_workbench::error::Error;
use toric_workbench::fan::random_point_location_check;
use toric_workbench::logfano::{
    classify, complement, complexity, dual_complex, free_lines, is_log_fano, is_maximal,
    ratio_string, verify_structure, LogFanoPair, StructureReport,
};
use toric_workbench::snc::{build_xn, dss_check, search_models, snc_fano_check, DssReport};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_INVALID_INPUT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "toric", about = "Exact toric log Fano workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory for result files
    #[arg(long, env = "TORIC_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (results are identical for any count)
    #[arg(long, env = "TORIC_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Seed for the randomized sanity oracles
    #[arg(long, env = "TORIC_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Build the fan of a tower spec; emit the canonical fan, wall table,
    /// and Picard rank
    Fan {
        /// Tower spec file (JSON: {"dims": [...], "twists": [...]})
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide log Fano / maximality for a pair and emit a full certificate
    Check {
        /// Tower spec file
        spec: PathBuf,
        /// Boundary rays as labels "i.k" separated by commas, e.g. "1.1,2.1"
        #[arg(long)]
        boundary: String,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate maximal log Fano tower pairs up to isomorphism
    Classify {
        #[arg(long, env = "TORIC_DIM")]
        dim: usize,
        /// Twist bound: coefficients range over [-bound, bound]
        #[arg(long, env = "TORIC_BOUND")]
        bound: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Build the maximal d-semistable snc Fano model and verify it
    Maxdeg {
        #[arg(long, env = "TORIC_DIM")]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive search for maximal d-semistable models at desk scale
    Search {
        #[arg(long, env = "TORIC_DIM")]
        dim: usize,
        #[arg(long, env = "TORIC_BOUND")]
        bound: i64,
        /// Disable the d-semistability filter (for comparison runs)
        #[arg(long)]
        no_dss: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Box<dyn FnOnce() -> Result<bool, Error> + Send>) =
        match &cli.command {
            Command::Fan { spec, common } => {
                let (spec, out, seed) = (spec.clone(), common.out.clone(), common.seed);
                (common, Box::new(move || cmd_fan(&spec, &out, seed)))
            }
            Command::Check {
                spec,
                boundary,
                common,
            } => {
                let (spec, boundary, out, seed) = (
                    spec.clone(),
                    boundary.clone(),
                    common.out.clone(),
                    common.seed,
                );
                (
                    common,
                    Box::new(move || cmd_check(&spec, &boundary, &out, seed)),
                )
            }
            Command::Classify { dim, bound, common } => {
                let (dim, bound, out) = (*dim, *bound, common.out.clone());
                (common, Box::new(move || cmd_classify(dim, bound, &out)))
            }
            Command::Maxdeg { dim, common } => {
                let (dim, out) = (*dim, common.out.clone());
                (common, Box::new(move || cmd_maxdeg(dim, &out)))
            }
            Command::Search {
                dim,
                bound,
                no_dss,
                common,
            } => {
                let (dim, bound, dss, out) = (*dim, *bound, !*no_dss, common.out.clone());
                (common, Box::new(move || cmd_search(dim, bound, dss, &out)))
            }
        };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID_INPUT);
        }
    };
    match pool.install(run) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(EXIT_INTERNAL),
                _ => ExitCode::from(EXIT_INVALID_INPUT),
            }
        }
    }
}

fn read_spec(path: &Path) -> Result<BottTowerSpec, Error> {
    let text = fs::read_to_string(path)?;
    let spec: BottTowerSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization: {e}")))?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

#[derive(Serialize)]
struct WallRecord {
    rays: Vec<usize>,
    v: usize,
    v_prime: usize,
    b: Vec<i64>,
    canonical_degree: i64,
}

fn cmd_fan(spec_path: &Path, out: &Path, seed: u64) -> Result<bool, Error> {
    let spec = read_spec(spec_path)?;
    let fan = build_fan(&spec)?;
    let report = toric_workbench::fan::validate_fan(&fan);
    if !report.pass() {
        return Err(Error::Internal(format!(
            "built fan failed validation: {report:?}"
        )));
    }
    // randomized cross-check: sampled lattice points must locate in the fan
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !random_point_location_check(&fan, &mut rng, 200) {
        return Err(Error::Internal(
            "point location failed on a complete fan".into(),
        ));
    }

    let k = canonical_divisor(&fan);
    let wall_records: Vec<WallRecord> = walls(&fan)?
        .into_iter()
        .map(|w| WallRecord {
            canonical_degree: intersection_number(&k, &w),
            rays: w.rays.clone(),
            v: w.v,
            v_prime: w.v_prime,
            b: w.b,
        })
        .collect();

    let fan_path = write_text(out, "fan.txt", &fan.to_canonical_text())?;
    let walls_path = write_json(out, "walls.json", &wall_records)?;
    println!(
        "fan: {} rays, {} maximal cones, picard rank {}",
        fan.rays().len(),
        fan.max_cones().len(),
        picard_rank(&fan)
    );
    println!("wrote {}", fan_path.display());
    println!("wrote {}", walls_path.display());
    Ok(true)
}

fn parse_boundary(spec: &BottTowerSpec, text: &str) -> Result<Vec<RayLabel>, Error> {
    let mut labels = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let (i, k) = part
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("boundary label `{part}`: expected i.k")))?;
        let i: usize = i
            .parse()
            .map_err(|_| Error::Parse(format!("bad stage in `{part}`")))?;
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad slot in `{part}`")))?;
        let stages = spec.stages();
        let valid = (k == 0 && (1..=stages).contains(&i))
            || (i >= 1 && i <= stages && k >= 1 && k <= spec.dims[i - 1]);
        if !valid {
            return Err(Error::InvalidInput(format!(
                "boundary label {i}.{k} is out of range for this tower"
            )));
        }
        labels.push((i, k));
    }
    labels.sort_unstable();
    labels.dedup();
    Ok(labels)
}

#[derive(Serialize)]
struct Certificate {
    log_fano: bool,
    maximal: bool,
    failing_wall: Option<WallRecord>,
    tau: Option<String>,
    rho: usize,
    dual_complex_cells: Option<Vec<Vec<usize>>>,
    gamma_components: Option<usize>,
    complexity: String,
    free_lines: Option<usize>,
    structure: Option<StructureReport>,
    structure_ok: Option<bool>,
}

fn cmd_check(spec_path: &Path, boundary: &str, out: &Path, seed: u64) -> Result<bool, Error> {
    let spec = read_spec(spec_path)?;
    let fan = build_fan(&spec)?;
    let labels = parse_boundary(&spec, boundary)?;
    let boundary_rays: std::collections::BTreeSet<usize> =
        labels.iter().map(|&l| spec.ray_index(l)).collect();

    // randomized sanity oracle: intersection numbers only depend on the class
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = canonical_divisor(&fan);
    let all_walls = walls(&fan)?;
    for _ in 0..100 {
        let m: Vec<i64> = (0..fan.ambient_rank())
            .map(|_| rng.gen_range(-5..=5))
            .collect();
        let shifted = k.add(&principal_divisor(&fan, &m));
        for w in &all_walls {
            if intersection_number(&k, w) != intersection_number(&shifted, w) {
                return Err(Error::Internal(
                    "intersection number not invariant under a principal shift".into(),
                ));
            }
        }
    }

    let rho = picard_rank(&fan);
    let delta = ToricDivisor::boundary(&fan, boundary_rays.iter().copied());
    let log_fano = is_log_fano(&fan, &boundary_rays)?;
    if !log_fano {
        // diagnostic: a wall on which L = -K - Delta fails to be positive
        let l = k.scale(-1).sub(&delta);
        let bad = all_walls
            .iter()
            .find(|w| intersection_number(&l, w) <= 0)
            .map(|w| WallRecord {
                canonical_degree: intersection_number(&k, w),
                rays: w.rays.clone(),
                v: w.v,
                v_prime: w.v_prime,
                b: w.b.clone(),
            });
        let cert = Certificate {
            log_fano,
            maximal: false,
            failing_wall: bad,
            tau: None,
            rho,
            dual_complex_cells: None,
            gamma_components: None,
            complexity: ratio_string(complexity(&fan, &delta)),
            free_lines: None,
            structure: None,
            structure_ok: None,
        };
        let path = write_json(out, "certificate.json", &cert)?;
        println!("check: not log Fano");
        println!("wrote {}", path.display());
        return Ok(false);
    }

    let pair = LogFanoPair::new(fan.clone(), boundary_rays)?;
    let maximal = is_maximal(&pair)?;
    let dc = dual_complex(&pair);
    let tau = {
        let (t, _) = toric_workbench::divisors::nef_value(&fan, &pair.l)?;
        ratio_string(t)
    };
    let (gamma_components, free, structure) = if maximal {
        let gamma = complement(&pair)?;
        let count = gamma.coeffs.iter().filter(|&&c| c != 0).count();
        let free = free_lines(&pair)?.len();
        let report = verify_structure(&pair)?;
        (Some(count), Some(free), Some(report))
    } else {
        (None, None, None)
    };
    let structure_ok = structure.as_ref().map(|s| s.all_ok(rho));
    let cert = Certificate {
        log_fano,
        maximal,
        failing_wall: None,
        tau: Some(tau.clone()),
        rho,
        dual_complex_cells: Some(dc.cells.iter().cloned().collect()),
        gamma_components,
        complexity: ratio_string(complexity(&fan, &pair.delta())),
        free_lines: free,
        structure,
        structure_ok,
    };
    let path = write_json(out, "certificate.json", &cert)?;
    println!(
        "check: log Fano, maximal = {maximal}, tau = {tau}, rho = {rho}, structure_ok = {}",
        structure_ok.map_or("n/a".into(), |b| b.to_string())
    );
    println!("wrote {}", path.display());
    Ok(structure_ok.unwrap_or(true))
}

fn cmd_classify(dim: usize, bound: i64, out: &Path) -> Result<bool, Error> {
    let entries = classify(dim, bound)?;
    let json_path = write_json(out, "classification.json", &entries)?;
    let mut table = String::new();
    table.push_str("dims | twists | boundary | rho | tau | gamma | free | structure\n");
    for e in &entries {
        let twists = serde_json::to_string(&e.spec.twists).unwrap_or_default();
        let boundary = e
            .boundary
            .iter()
            .map(|&(i, k)| format!("{i}.{k}"))
            .collect::<Vec<_>>()
            .join(",");
        table.push_str(&format!(
            "{:?} | {} | {} | {} | {} | {} | {} | {}\n",
            e.spec.dims,
            twists,
            boundary,
            e.rho,
            e.tau,
            e.gamma_components,
            e.free_lines,
            if e.structure_ok { "ok" } else { "FAIL" }
        ));
    }
    let table_path = write_text(out, "classification.txt", &table)?;
    println!(
        "classify: {} entries (dim {dim}, bound {bound})",
        entries.len()
    );
    println!("wrote {}", json_path.display());
    println!("wrote {}", table_path.display());
    Ok(entries.iter().all(|e| e.structure_ok))
}

#[derive(Serialize)]
struct ComponentCertificate {
    index: usize,
    rho: usize,
    log_fano: bool,
    maximal: bool,
}

fn cmd_maxdeg(dim: usize, out: &Path) -> Result<bool, Error> {
    let model = build_xn(dim)?;
    let (fano, maximal) = snc_fano_check(&model)?;
    let report: DssReport = dss_check(&model)?;
    let model_path = write_json(out, "model.json", &model.to_file())?;
    let dss_path = write_json(out, "dss_report.json", &report)?;
    let certs: Vec<ComponentCertificate> = model
        .components
        .iter()
        .enumerate()
        .map(|(index, c)| {
            Ok(ComponentCertificate {
                index,
                rho: picard_rank(&c.fan),
                log_fano: is_log_fano(&c.fan, &c.boundary)?,
                maximal: is_maximal(c)?,
            })
        })
        .collect::<Result<_, Error>>()?;
    let certs_path = write_json(out, "components.json", &certs)?;
    println!(
        "maxdeg: {} components, fano = {fano}, maximal = {maximal}, dss pairs = {} ({} pass)",
        model.components.len(),
        report.pairs.len(),
        report.pairs.iter().filter(|p| p.trivial).count()
    );
    for p in [&model_path, &dss_path, &certs_path] {
        println!("wrote {}", p.display());
    }
    if let Some(bad) = report.pairs.iter().find(|p| !p.trivial) {
        eprintln!("d-semistability fails on pair ({}, {})", bad.i, bad.j);
        return Ok(false);
    }
    Ok(fano && maximal)
}

fn cmd_search(dim: usize, bound: i64, dss: bool, out: &Path) -> Result<bool, Error> {
    let survivors = search_models(dim, bound, dss)?;
    let files: Vec<_> = survivors.iter().map(|m| m.to_file()).collect();
    let path = write_json(out, "survivors.json", &files)?;
    println!(
        "search: {} survivor(s) (dim {dim}, bound {bound}, dss filter {})",
        survivors.len(),
        if dss { "on" } else { "off" }
    );
    println!("wrote {}", path.display());
    Ok(!survivors.is_empty())
}
