use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use outfn::folds::{edge_table, stallings_factorize};
use outfn::graph::{cyclic_tighten, Circuit, Path};
use outfn::lamination::{
    build_nonattracting, full_irreducibility_certificate, least_ct_power, singular_lines, singular_rays,
    weak_attraction_test, z_is_invariant, Attraction, Certificate,
};
use outfn::nielsen::{self, nielsen_search, NielsenCaps, NielsenCatalog};
use outfn::pingpong::{pingpong_search, BetaSource, PingPongSetup};
use outfn::strata::{classify_strata, compute_filtration, Filtration, StratumKind};
use outfn::text::{self, MapFile};
use outfn::train_track::{verify_ct, Splitter, Status};
use outfn::{Error, GraphMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Powers tried when a command needs a CT representative.
const CT_POWERS: usize = 4;

#[derive(Parser)]
#[command(name = "outfn", version, about = "Train tracks, Nielsen paths and ping-pong for free group outer automorphisms")]
struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for sampled inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stallings fold factorization of the map.
    Fold { file: PathBuf },
    /// Invariant filtration and stratum classification.
    Strata { file: PathBuf },
    /// Relative train track and CT checklist.
    CtVerify {
        file: PathBuf,
        /// Largest power searched for a CT when the map itself is not one.
        #[arg(long, default_value_t = CT_POWERS)]
        kmax: usize,
    },
    /// Catalog of indivisible periodic Nielsen paths.
    Nielsen {
        file: PathBuf,
        /// Length cap; defaults to 4 times the edge count.
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 4)]
        period: usize,
    },
    /// Nonattracting subgraph and groupoid of an EG stratum.
    Zsystem {
        file: PathBuf,
        /// Defaults to the highest EG stratum.
        #[arg(long)]
        stratum: Option<usize>,
    },
    /// Weak attraction of circuits to the top EG lamination.
    Attract {
        file: PathBuf,
        /// Circuit to test; random circuits are sampled when absent.
        #[arg(long)]
        class: Vec<String>,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Full irreducibility certificate.
    Certify { file: PathBuf },
    /// Singular rays and lines from principal directions.
    Singular {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Search the grid of composites for attracting neighborhoods.
    Pingpong {
        phi: PathBuf,
        psi: PathBuf,
        #[arg(long, default_value_t = 3)]
        mmax: usize,
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// `tiles` or `explicit:<word>`.
        #[arg(long, default_value = "tiles")]
        beta_from: String,
        /// Tile exponent used by `--beta-from tiles`.
        #[arg(long, default_value_t = 2)]
        tile_depth: usize,
    },
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Verdict {
    Conclusive,
    Inconclusive,
}

struct Report {
    result: Value,
    witnesses: Value,
    caps: Value,
    verdict: Verdict,
    text: String,
}

fn main() -> ExitCode {
    // exit code 2 is reserved for inconclusive verdicts
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok((name, digest, report)) => {
            if cli.json {
                let out = json!({
                    "command": name,
                    "input_digest": digest,
                    "result": report.result,
                    "witnesses": report.witnesses,
                    "caps": report.caps,
                });
                println!("{}", serde_json::to_string_pretty(&out).expect("report is plain JSON"));
            } else {
                print!("{}", report.text);
            }
            match report.verdict {
                Verdict::Conclusive => ExitCode::SUCCESS,
                Verdict::Inconclusive => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(&'static str, String, Report), Error> {
    Ok(match &cli.command {
        Command::Fold { file } => {
            let (digest, mf) = load(&[file])?;
            ("fold", digest, fold(&mf[0])?)
        }
        Command::Strata { file } => {
            let (digest, mf) = load(&[file])?;
            ("strata", digest, strata(&mf[0])?)
        }
        Command::CtVerify { file, kmax } => {
            let (digest, mf) = load(&[file])?;
            ("ct-verify", digest, ct_verify(&mf[0], *kmax)?)
        }
        Command::Nielsen { file, len, period } => {
            let (digest, mf) = load(&[file])?;
            ("nielsen", digest, nielsen_cmd(&mf[0], *len, *period)?)
        }
        Command::Zsystem { file, stratum } => {
            let (digest, mf) = load(&[file])?;
            ("zsystem", digest, zsystem(&mf[0], *stratum)?)
        }
        Command::Attract { file, class, kmax, samples } => {
            let (digest, mf) = load(&[file])?;
            ("attract", digest, attract(&mf[0], class, *kmax, *samples, cli.seed)?)
        }
        Command::Certify { file } => {
            let (digest, mf) = load(&[file])?;
            ("certify", digest, certify(&mf[0])?)
        }
        Command::Singular { file, depth } => {
            let (digest, mf) = load(&[file])?;
            ("singular", digest, singular(&mf[0], *depth)?)
        }
        Command::Pingpong { phi, psi, mmax, kmax, beta_from, tile_depth } => {
            let (digest, mf) = load(&[phi, psi])?;
            ("pingpong", digest, pingpong(&mf[0], &mf[1], *mmax, *kmax, beta_from, *tile_depth)?)
        }
    })
}

// SHA-256 over the raw bytes of every input, in argument order
fn load(files: &[&PathBuf]) -> Result<(String, Vec<MapFile>), Error> {
    let mut hasher = Sha256::new();
    let mut out = Vec::new();
    for f in files {
        let src = std::fs::read_to_string(f)
            .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", f.display()) })?;
        hasher.update(src.as_bytes());
        out.push(text::parse(&src)?);
    }
    Ok((hex::encode(hasher.finalize()), out))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn period_one_caps(f: &GraphMap) -> NielsenCaps {
    NielsenCaps { length: 4 * f.graph().edge_count().max(3), period: 1 }
}

fn top_eg(f: &GraphMap, filt: &Filtration) -> Option<usize> {
    let kinds = classify_strata(f, filt);
    (0..filt.len()).rev().find(|&r| kinds[r].kind == StratumKind::Eg)
}

fn fold(mf: &MapFile) -> Result<Report, Error> {
    let f = mf.representative()?;
    let fac = stallings_factorize(f)?;
    let steps: Vec<_> = fac.steps.iter().map(|s| s.summary()).collect();
    let he = fac.is_homotopy_equivalence();
    let mut text = String::new();
    for (i, s) in steps.iter().enumerate() {
        text += &format!("{:>3}  {:?} fold of {} {}  segment {}\n", i + 1, s.class, s.turn[0], s.turn[1], s.segment);
    }
    text += &format!("{} folds, homotopy equivalence: {he}\n", steps.len());
    Ok(Report {
        result: json!({ "steps": to_json(&steps), "terminal": to_json(&edge_table(&fac.terminal)), "homotopy_equivalence": he }),
        witnesses: json!({ "recomposes": fac.recompose()?.edge_images() == f.edge_images() }),
        caps: json!({}),
        verdict: Verdict::Conclusive,
        text,
    })
}

fn strata(mf: &MapFile) -> Result<Report, Error> {
    let f = mf.representative()?;
    let filt = compute_filtration(f);
    let reps = classify_strata(f, &filt);
    let mut text = String::new();
    for r in &reps {
        let lambda = r.pf.as_ref().map(|p| format!("  λ = {:.6}", p.lambda)).unwrap_or_default();
        text += &format!("H_{}  {:?}  [{}]{lambda}\n", r.height, r.kind, r.edges.join(" "));
    }
    Ok(Report { result: to_json(&reps), witnesses: json!({}), caps: json!({}), verdict: Verdict::Conclusive, text })
}

fn ct_verify(mf: &MapFile, kmax: usize) -> Result<Report, Error> {
    let f = mf.representative()?;
    let filt = compute_filtration(f);
    let caps = period_one_caps(f);
    let catalog = nielsen_search(f, &filt, caps)?;
    let report = verify_ct(f, &filt, &catalog);
    let power = if report.is_ct() { Some(1) } else { least_ct_power(f, kmax)?.map(|c| c.k) };
    let statuses = report
        .rtt
        .iter()
        .flat_map(|r| [&r.directions, &r.connecting, &r.legality])
        .chain(report.axioms.iter().map(|a| &a.check));
    let open = statuses.clone().any(|c| c.status == Status::Inconclusive) || !report.catalog_complete;
    let failures: Vec<Value> = report
        .failures()
        .iter()
        .map(|a| json!({ "axiom": to_json(&a.axiom), "witness": a.check.witness }))
        .collect();
    let mut text = format!("CT: {}\n", report.is_ct());
    for a in &report.axioms {
        text += &format!("  {:?}: {:?}{}\n", a.axiom, a.check.status, a.check.witness.as_deref().map(|w| format!("  {w}")).unwrap_or_default());
    }
    text += &match power {
        Some(k) => format!("least CT power: {k}\n"),
        None => format!("no power up to {kmax} is a CT\n"),
    };
    Ok(Report {
        result: json!({ "report": to_json(&report), "is_ct": report.is_ct(), "least_ct_power": power }),
        witnesses: json!(failures),
        caps: json!({ "kmax": kmax, "nielsen": to_json(&caps) }),
        verdict: if open { Verdict::Inconclusive } else { Verdict::Conclusive },
        text,
    })
}

fn nielsen_cmd(mf: &MapFile, len: Option<usize>, period: usize) -> Result<Report, Error> {
    let f = mf.representative()?;
    let g = f.graph();
    let filt = compute_filtration(f);
    let caps = NielsenCaps { length: len.unwrap_or(4 * g.edge_count()), period };
    let catalog = nielsen_search(f, &filt, caps)?;
    let paths: Vec<_> = catalog.paths.iter().map(|p| nielsen::report(g, p)).collect();
    let mut text = String::new();
    for p in &paths {
        text += &format!("period {}  height {}  {}\n", p.period, p.height, p.path);
    }
    text += &format!("{} paths, complete: {}\n", paths.len(), catalog.complete);
    Ok(Report {
        result: json!({ "paths": to_json(&paths), "complete": catalog.complete }),
        witnesses: json!({}),
        caps: json!({ "length": caps.length, "period": caps.period, "bcc": catalog.bcc }),
        verdict: if catalog.complete { Verdict::Conclusive } else { Verdict::Inconclusive },
        text,
    })
}

fn eg_stratum(f: &GraphMap, filt: &Filtration, stratum: Option<usize>) -> Result<usize, Error> {
    let kinds = classify_strata(f, filt);
    match stratum {
        Some(r) if r < filt.len() && kinds[r].kind == StratumKind::Eg => Ok(r),
        Some(r) => Err(Error::Setup(format!("stratum {r} is not an EG stratum"))),
        None => top_eg(f, filt).ok_or_else(|| Error::Setup("the map has no EG stratum".into())),
    }
}

fn zsystem(mf: &MapFile, stratum: Option<usize>) -> Result<Report, Error> {
    let f = mf.representative()?;
    let g = f.graph();
    let filt = compute_filtration(f);
    let r = eg_stratum(f, &filt, stratum)?;
    let caps = period_one_caps(f);
    let catalog = nielsen_search(f, &filt, caps)?;
    let ns = build_nonattracting(f, &filt, r, &catalog)?;
    let report = ns.report(g);
    let invariant = z_is_invariant(f, &ns);
    let text = format!(
        "H_{r}: Z = [{}], ρ̂ = {}, K has {} vertices and {} edges, undecided strata {:?}\n",
        report.z.join(" "),
        if report.rho_trivial { "trivial".to_string() } else { report.rho_hat.clone() },
        report.k_vertices,
        report.k_edges,
        report.undecided
    );
    Ok(Report {
        result: json!({ "system": to_json(&report), "z_invariant": invariant }),
        witnesses: json!({ "rho_hat": report.rho_hat }),
        caps: json!({ "nielsen": to_json(&caps) }),
        verdict: if ns.is_decided() { Verdict::Conclusive } else { Verdict::Inconclusive },
        text,
    })
}

fn random_circuit(rng: &mut ChaCha8Rng, f: &GraphMap, max_len: usize) -> Option<Circuit> {
    let g = f.graph();
    let dirs: Vec<_> = g.oedges().collect();
    let start = dirs[rng.gen_range(0..dirs.len())];
    let mut w = vec![start];
    while w.len() < max_len {
        let here = g.term(*w.last().unwrap());
        let next: Vec<_> = g.directions_at(here).into_iter().filter(|&d| d != w.last().unwrap().inv()).collect();
        w.push(next[rng.gen_range(0..next.len())]);
        if g.term(*w.last().unwrap()) == g.init(start) && rng.gen_bool(0.3) {
            break;
        }
    }
    if g.term(*w.last().unwrap()) != g.init(start) {
        return None;
    }
    cyclic_tighten(g, &w).ok().filter(|c| !c.is_empty())
}

fn attract(mf: &MapFile, classes: &[String], kmax: usize, samples: usize, seed: u64) -> Result<Report, Error> {
    let f = mf.representative()?;
    let g = f.graph();
    let mut circuits = Vec::new();
    for c in classes {
        circuits.push(cyclic_tighten(g, &g.parse_word(c)?)?);
    }
    if classes.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tries = 0;
        while circuits.len() < samples && tries < 100 * samples.max(1) {
            tries += 1;
            if let Some(c) = random_circuit(&mut rng, f, 8) {
                circuits.push(c);
            }
        }
    }
    let Some(ct) = least_ct_power(f, CT_POWERS)? else {
        return Ok(Report {
            result: json!({ "power": null }),
            witnesses: json!({}),
            caps: json!({ "kmax": kmax, "ct_powers": CT_POWERS }),
            verdict: Verdict::Inconclusive,
            text: format!("no power up to {CT_POWERS} passes the CT checklist\n"),
        });
    };
    let r = top_eg(&ct.map, &ct.filtration).ok_or_else(|| Error::Setup("the map has no EG stratum".into()))?;
    let ns = build_nonattracting(&ct.map, &ct.filtration, r, &ct.catalog)?;
    let mut sp = Splitter::new(&ct.map, &ct.filtration, &ct.catalog);
    // f^k is iterated, so kmax iterates of f are kmax / k of f^k
    let iterations = (kmax / ct.k).max(1);
    let mut verdicts = Vec::new();
    let mut open = false;
    let mut text = format!("testing on f^{} (H_{r}), {iterations} iterations\n", ct.k);
    for c in &circuits {
        let v = weak_attraction_test(&mut sp, &ns, c, iterations)?;
        open |= matches!(v, Attraction::Inconclusive { .. });
        text += &format!("  {}  {v:?}\n", c.display(g));
        verdicts.push(json!({ "class": c.display(g), "attraction": to_json(&v) }));
    }
    Ok(Report {
        result: json!({ "power": ct.k, "stratum": r, "verdicts": verdicts }),
        witnesses: json!({ "rho_hat": ns.rho_hat.display(g).to_string() }),
        caps: json!({ "kmax": kmax, "iterations": iterations, "ct_powers": CT_POWERS, "seed": seed }),
        verdict: if open { Verdict::Inconclusive } else { Verdict::Conclusive },
        text,
    })
}

fn certify(mf: &MapFile) -> Result<Report, Error> {
    let f = mf.representative()?;
    let report = full_irreducibility_certificate(f, CT_POWERS)?;
    let (verdict, text) = match &report.certificate {
        Certificate::Certified => (Verdict::Conclusive, format!("fully irreducible (certified on power {:?})\n", report.power)),
        Certificate::NotCertified { reason } => (Verdict::Conclusive, format!("not certified: {reason}\n")),
        Certificate::Inconclusive { reason } => (Verdict::Inconclusive, format!("inconclusive: {reason}\n")),
    };
    Ok(Report {
        result: to_json(&report),
        witnesses: json!({}),
        caps: json!({ "ct_powers": CT_POWERS }),
        verdict,
        text,
    })
}

fn singular(mf: &MapFile, depth: usize) -> Result<Report, Error> {
    let f = mf.representative()?;
    let g = f.graph();
    let filt = compute_filtration(f);
    let caps = period_one_caps(f);
    let catalog: NielsenCatalog = nielsen_search(f, &filt, caps)?;
    let rays = singular_rays(f, &filt, &catalog, depth)?;
    let lines = singular_lines(g, &rays, &catalog);
    let ray_json: Vec<Value> = rays
        .iter()
        .map(|r| json!({ "direction": g.fmt_oedge(r.direction), "nested": r.nested, "prefix": r.prefix().display(g).to_string() }))
        .collect();
    let line_json: Vec<Value> = lines
        .iter()
        .map(|l| {
            json!({
                "left": g.fmt_oedge(l.left),
                "connector": l.connector.display(g).to_string(),
                "right": g.fmt_oedge(l.right),
                "window": g.fmt_word(&l.window),
            })
        })
        .collect();
    let mut text = String::new();
    for r in &rays {
        text += &format!("ray {}  nested {}  length {}\n", g.fmt_oedge(r.direction), r.nested, r.prefix().len());
    }
    for l in &lines {
        text += &format!("line {} | {} | {}\n", g.fmt_oedge(l.left), l.connector.display(g), g.fmt_oedge(l.right));
    }
    Ok(Report {
        result: json!({ "rays": ray_json, "lines": line_json }),
        witnesses: json!({}),
        caps: json!({ "depth": depth, "nielsen": to_json(&caps) }),
        verdict: Verdict::Conclusive,
        text,
    })
}

fn pingpong(phi: &MapFile, psi: &MapFile, mmax: usize, kmax: usize, beta_from: &str, tile_depth: usize) -> Result<Report, Error> {
    let setup = PingPongSetup::new(phi, psi)?;
    let betas = match beta_from.split_once(':') {
        Some(("explicit", w)) => BetaSource::Explicit(Path::parse(setup.g_psi.graph(), w)?),
        None if beta_from == "tiles" => BetaSource::Tiles { depth: tile_depth },
        _ => return Err(Error::Setup(format!("--beta-from must be `tiles` or `explicit:<word>`, got {beta_from:?}"))),
    };
    let report = pingpong_search(&setup, mmax, &betas, kmax)?;
    let hits: Vec<Value> = report
        .hits()
        .map(|c| json!({ "m": c.m, "n": c.n, "beta": c.beta, "hit": to_json(&c.hit) }))
        .collect();
    let mut text = String::new();
    for c in &report.cells {
        let found = match &c.hit {
            Some(h) => format!("hit k = {} β = {}", h.k, c.beta.as_deref().unwrap_or("?")),
            None => "no hit".to_string(),
        };
        text += &format!("m = {} n = {}  class {}  {found}\n", c.m, c.n, if c.class_ok { "ok" } else { "MISMATCH" });
    }
    // no hit is not a proof that none exists
    let verdict = if mmax == 0 || !hits.is_empty() { Verdict::Conclusive } else { Verdict::Inconclusive };
    Ok(Report {
        result: to_json(&report),
        witnesses: json!(hits),
        caps: json!({ "mmax": mmax, "kmax": kmax, "beta_from": beta_from, "tile_depth": tile_depth }),
        verdict,
        text,
    })
}
