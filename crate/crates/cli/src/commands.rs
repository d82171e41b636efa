use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde_json::json;

use oriperc::duality::{
    complementarity_on, detect_b_plus, detect_circuit, dualize, dualize_on, exhaustive_counts,
    DualLattice, DualVariant, EXHAUSTIVE_EDGE_CAP,
};
use oriperc::estimators::{
    circuit_cell, reach_cell, saw_census, sweep, McOptions, SweepRow, SweepTable,
};
use oriperc::reach::{crosses, reach};
use oriperc::slab::enriched_reach_cell;
use oriperc::svg::{render_arcs, render_config, SvgOptions};
use oriperc::{ArcSet, Bits, Config, Lattice, ModelSpec, Region, Site};

use crate::grid::{parse_grid, parse_sizes};
use crate::manifest::{set_flag, RunManifest, FORMAT};
use crate::{
    CircuitArgs, Cli, Command, DualCheckArgs, Event, Format, Highlight, ModelName, OracleArgs,
    RenderArgs, SawArgs, SlabArgs, SweepArgs,
};

/// What a command produced.
struct Output {
    /// Goes to `--out`, or stdout without one.
    body: String,
    /// Always printed to stdout after the body.
    report: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    violation: bool,
}

impl Output {
    fn new(body: String, out: &Option<PathBuf>, seed: Option<u64>) -> Self {
        Output { body, report: None, out: out.clone(), seed, violation: false }
    }
}

/// Parses and runs one invocation; returns the process exit code.
pub fn run(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(std::iter::once("oriperc".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match execute(cli, &argv) {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            2
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize> {
    let n = match std::env::var("ORIPERC_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().with_context(|| format!("ORIPERC_THREADS={v:?} is not a thread count"))?
        }
        _ => flag.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    if n == 0 {
        bail!("thread count must be at least 1");
    }
    Ok(n)
}

fn execute(cli: Cli, argv: &[String]) -> Result<bool> {
    if let Command::Replay(r) = &cli.command {
        let m = RunManifest::read(&r.manifest)?;
        let mut args = m.argv.clone();
        if let Some(out) = &r.out {
            args = set_flag(&args, "--out", &out.to_string_lossy());
        }
        if let Some(t) = cli.threads {
            args = set_flag(&args, "--threads", &t.to_string());
        }
        return match run(args) {
            0 => Ok(false),
            1 => Ok(true),
            code => Err(anyhow!("replayed command failed with exit code {code}")),
        };
    }
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let started = chrono::Utc::now().to_rfc3339();
    let (name, output) = pool.install(|| -> Result<(&str, Output)> {
        Ok(match &cli.command {
            Command::Sweep(a) => ("sweep", cmd_sweep(a)?),
            Command::Oracle(a) => ("oracle", cmd_oracle(a)?),
            Command::DualCheck(a) => ("dual-check", cmd_dual_check(a)?),
            Command::Circuit(a) => ("circuit", cmd_circuit(a)?),
            Command::Slab(a) => ("slab", cmd_slab(a)?),
            Command::Saw(a) => ("saw", cmd_saw(a)?),
            Command::Render(a) => ("render", cmd_render(a)?),
            Command::Replay(_) => unreachable!("handled above"),
        })
    })?;
    match &output.out {
        Some(path) => {
            write_file(path, &output.body)?;
            RunManifest {
                format: FORMAT.to_string(),
                command: name.to_string(),
                argv: argv.to_vec(),
                seed: output.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                threads,
                started,
                finished: chrono::Utc::now().to_rfc3339(),
                outputs: vec![path.to_string_lossy().into_owned()],
            }
            .write(path)?;
        }
        None => print!("{}", output.body),
    }
    if let Some(r) = &output.report {
        print!("{r}");
    }
    Ok(output.violation)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn model_for(name: ModelName, p: f64) -> Result<ModelSpec> {
    let m = match name {
        ModelName::Grimmett => ModelSpec::Grimmett2D { p },
        ModelName::H => ModelSpec::HModel { p },
        ModelName::Ne => ModelSpec::NEQuadrant { p },
        ModelName::Slab => ModelSpec::Grimmett3DSlab { p },
        ModelName::Arcs => bail!("the arcs model takes --a and --b, not --p"),
    };
    Ok(m.validate()?)
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        bail!("--level must lie strictly between 0 and 1, got {level}");
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<Output> {
    check_level(a.level)?;
    let models: Vec<ModelSpec> = if a.model == ModelName::Arcs {
        let (Some(ga), Some(gb)) = (&a.a, &a.b) else { bail!("the arcs model needs --a and --b") };
        let (ga, gb) = (parse_grid(ga)?, parse_grid(gb)?);
        let mut v = Vec::new();
        for &x in &ga {
            for &y in &gb {
                v.push(ModelSpec::IndependentArcs { a: x, b: y }.validate()?);
            }
        }
        v
    } else {
        let p = a.p.as_ref().ok_or_else(|| anyhow!("--p is required for --model {:?}", a.model))?;
        parse_grid(p)?.into_iter().map(|p| model_for(a.model, p)).collect::<Result<_>>()?
    };
    let sizes = parse_sizes(&a.sizes)?;
    if sizes.contains(&0) {
        bail!("sizes must be at least 1");
    }
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let opts = McOptions {
        level: a.level,
        common_random_numbers: a.common_random_numbers,
        coin_arcs_only: a.outward_only,
    };
    let table = sweep(&models, &sizes, a.samples, a.seed, &opts)?;
    let body = match a.format {
        Format::Csv => table.to_csv(),
        Format::Jsonl => table.to_jsonl(),
    };
    Ok(Output::new(body, &a.out, Some(a.seed)))
}

fn cmd_oracle(a: &OracleArgs) -> Result<Output> {
    let region: Region = a.region.parse()?;
    let model = model_for(a.model, a.p)?;
    let lattice = Lattice::new(region)?;
    if lattice.num_edges() > EXHAUSTIVE_EDGE_CAP {
        bail!("{region} has {} edges; the exhaustive oracle is capped at {EXHAUSTIVE_EDGE_CAP}", lattice.num_edges());
    }
    let probe = Config::from_fn(&lattice, model, |_| true);
    let counts = match a.event {
        Event::Reach => exhaustive_counts(model, region, |c| crosses(c.lattice(), c))?,
        Event::Bplus => {
            let dl = DualLattice::new(&lattice)?;
            detect_b_plus(&dualize_on(&dl, &probe, DualVariant::U), a.start, 0, None)?;
            exhaustive_counts(model, region, |c| {
                let u = dualize_on(&dl, c, DualVariant::U);
                detect_b_plus(&u, a.start, 0, None).expect("start checked").is_some()
            })?
        }
        Event::Circuit => {
            let Region::Box { n } = region else { bail!("the circuit event needs a box:N region") };
            let annulus = Region::Annulus { inner: a.inner, outer: n }.validate()?;
            let dl = DualLattice::new(&lattice)?;
            detect_circuit(&dualize_on(&dl, &probe, DualVariant::U), annulus, DualVariant::U)?;
            exhaustive_counts(model, region, |c| {
                let u = dualize_on(&dl, c, DualVariant::U);
                detect_circuit(&u, annulus, DualVariant::U).expect("annulus checked").is_some()
            })?
        }
    };
    let event = match a.event {
        Event::Reach => "reach",
        Event::Bplus => "bplus",
        Event::Circuit => "circuit",
    };
    let body = serde_json::to_string_pretty(&json!({
        "model": model,
        "region": region.to_string(),
        "event": event,
        "edges": counts.edges,
        "configurations": counts.configurations(),
        "hits": counts.hits(),
        "by_coins": counts.by_coins,
        "probability": counts.probability(a.p),
    }))? + "\n";
    Ok(Output::new(body, &a.out, None))
}

fn cmd_dual_check(a: &DualCheckArgs) -> Result<Output> {
    let region = Region::QuadrantBox { n: a.size };
    let lattice = Lattice::new(region)?;
    let e = lattice.num_edges();
    if e > EXHAUSTIVE_EDGE_CAP {
        bail!("{region} has {e} edges; the exhaustive check is capped at {EXHAUSTIVE_EDGE_CAP}");
    }
    let dl = DualLattice::new(&lattice)?;
    let model = ModelSpec::NEQuadrant { p: 0.5 };
    let total = 1u64 << e;
    let check = |idx: u64| {
        let c = Config::new(lattice.clone(), model, Bits::from_word(e, idx)).expect("sized bits");
        let r = complementarity_on(&dl, &c).expect("quadrant window");
        (c, r)
    };
    let (violations, body) = if a.out.is_some() {
        let lines: Vec<(bool, String)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let (c, r) = check(idx);
                let rec = json!({
                    "config": c.bits().to_hex(),
                    "primal_crossing": r.primal_crossing,
                    "dual_blocking": r.dual_blocking,
                    "holds": r.holds(),
                });
                (!r.holds(), rec.to_string() + "\n")
            })
            .collect();
        (lines.iter().filter(|l| l.0).count(), lines.into_iter().map(|l| l.1).collect())
    } else {
        ((0..total).into_par_iter().filter(|&idx| !check(idx).1.holds()).count(), String::new())
    };
    let mut out = Output::new(body, &a.out, None);
    out.report = Some(format!("window: {region}\nconfigurations: {total}\nviolations: {violations}\n"));
    out.violation = violations > 0;
    Ok(out)
}

fn cmd_circuit(a: &CircuitArgs) -> Result<Output> {
    check_level(a.level)?;
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let opts = McOptions { level: a.level, ..McOptions::default() };
    let mut table = SweepTable { rows: Vec::new(), seed: a.seed, samples: a.samples };
    for (pi, p) in parse_grid(&a.p)?.into_iter().enumerate() {
        let est = circuit_cell(p, a.inner, a.outer, a.samples, a.seed, (pi as u64, 0), &opts)?;
        table.rows.push(SweepRow::new(ModelSpec::HModel { p }, a.inner, &est, a.seed));
    }
    let outer = vec![a.outer.to_string(); table.rows.len()];
    let mut buf = Vec::new();
    table.write_csv_with(&mut buf, Some(("outer", &outer)))?;
    Ok(Output::new(String::from_utf8(buf)?, &a.out, Some(a.seed)))
}

fn cmd_slab(a: &SlabArgs) -> Result<Output> {
    check_level(a.level)?;
    if a.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let sizes = parse_sizes(&a.sizes)?;
    if sizes.contains(&0) {
        bail!("sizes must be at least 1");
    }
    let opts = McOptions { level: a.level, ..McOptions::default() };
    let mut table = SweepTable { rows: Vec::new(), seed: a.seed, samples: a.samples };
    let mut layer = Vec::new();
    let mut lift_failures = 0;
    for (pi, p) in parse_grid(&a.p)?.into_iter().enumerate() {
        for (ni, &n) in sizes.iter().enumerate() {
            let idx = (pi as u64, ni as u64);
            let plane = ModelSpec::Grimmett2D { p }.validate()?;
            let est = reach_cell(plane, n, a.samples, a.seed, idx, &opts)?;
            table.rows.push(SweepRow::new(plane, n, &est, a.seed));
            layer.push("plane".to_string());
            let slab = ModelSpec::Grimmett3DSlab { p };
            let est = reach_cell(slab, n, a.samples, a.seed, idx, &opts)?;
            table.rows.push(SweepRow::new(slab, n, &est, a.seed));
            layer.push("slab".to_string());
            if p >= 0.5 {
                let (est, fails) = enriched_reach_cell(p, n, a.samples, a.seed, idx, &opts)?;
                lift_failures += fails;
                table.rows.push(SweepRow::new(slab, n, &est, a.seed));
                layer.push("enriched".to_string());
            }
        }
    }
    let mut buf = Vec::new();
    table.write_csv_with(&mut buf, Some(("layer_model", &layer)))?;
    let mut out = Output::new(String::from_utf8(buf)?, &a.out, Some(a.seed));
    if lift_failures > 0 {
        eprintln!("lift check failed on {lift_failures} samples");
        out.violation = true;
    }
    Ok(out)
}

fn cmd_saw(a: &SawArgs) -> Result<Output> {
    Ok(Output::new(saw_census(a.max_len)?.to_csv(), &a.out, None))
}

fn cmd_render(a: &RenderArgs) -> Result<Output> {
    let mut opts = SvgOptions::default();
    let svg = if a.model == ModelName::Arcs {
        let (Some(x), Some(y)) = (a.a, a.b) else { bail!("the arcs model needs --a and --b") };
        let lattice = Lattice::new(Region::Box { n: a.size })?;
        let arcs = ArcSet::sample(&lattice, x, y, a.seed)?;
        match a.highlight {
            Some(Highlight::Path) => opts.path = witness_path(&lattice, &arcs)?,
            Some(Highlight::Circuit) => bail!("circuit highlighting needs an orientation model"),
            None => {}
        }
        render_arcs(&arcs, &opts)?
    } else {
        let model = model_for(a.model, a.p)?;
        let region = model.crossing_region(a.size);
        let config = Config::sample(&Lattice::new(region)?, model, a.seed)?;
        match a.highlight {
            Some(Highlight::Path) => opts.path = witness_path(config.lattice(), &config)?,
            Some(Highlight::Circuit) => {
                let Region::Box { n } = region else { bail!("circuit highlighting needs a centred box") };
                if n == 0 {
                    bail!("circuit highlighting needs --size >= 1");
                }
                let u = dualize(&config, DualVariant::U)?;
                let found = detect_circuit(&u, Region::Annulus { inner: 0, outer: n }, DualVariant::U)?;
                if found.is_none() {
                    eprintln!("no encircling circuit in this sample");
                }
                opts.circuit = found.map(|w| w.cycle);
            }
            None => {}
        }
        render_config(&config, &opts)?
    };
    Ok(Output::new(svg, &a.out, Some(a.seed)))
}

fn witness_path<A: oriperc::reach::ArcSource>(lattice: &Lattice, arcs: &A) -> Result<Option<Vec<Site>>> {
    let region = lattice.region().ok_or_else(|| anyhow!("lattice without a region"))?;
    let path = reach(lattice, arcs, Site::ORIGIN, &region.outer_boundary())?;
    if path.is_none() {
        eprintln!("the origin does not reach the rim in this sample");
    }
    Ok(path)
}
