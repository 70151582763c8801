//! `bq`: command line front end for bound quiver computations.

mod golden;
mod random;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use bq_core::cover::{
    check_covering, is_galois, lift_automorphism, lift_transvection, smash_product, theorem_b_pipeline,
    universal_cover, CoverError, CoverMorphism, CoverQuiver, CoverReport, FiniteGroup, Galois, Grading,
};
use bq_core::dsl::{parse_document, Document};
use bq_core::gamma::{
    check_surjection, explore_gamma, find_sources, GammaError, GammaOptions, Surjection,
};
use bq_core::homotopy::{Decision, HomotopyError, HomotopyOptions, HomotopyRelation};
use bq_core::serial::{cover_to_dot, cover_to_dsl, gamma_to_dot, quiver_to_dot, CoverDto, GammaDto, IdealDto, Pi1Dto};
use bq_core::transform::{Dilatation, PathAutomorphism, Transvection};
use bq_core::{Field, Ideal, Quiver};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bq", version, about = "Homotopy relations, fundamental groups and covers of bound quivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Input file with quiver, ideal and automorphism blocks
    file: PathBuf,
    /// Ideal to work with; optional when the file declares exactly one
    #[arg(long)]
    ideal: Option<String>,
    /// Field characteristic, overriding the declared one (0 or a prime)
    #[arg(long = "char")]
    characteristic: Option<u64>,
    /// Base vertex for fundamental groups and covers
    #[arg(long)]
    base: Option<String>,
    /// Length bound on walks visited by the homotopy search
    #[arg(long)]
    cap: Option<usize>,
    /// Ball radius for universal covers
    #[arg(long)]
    radius: Option<usize>,
    /// Comma separated τ values probed on each bypass, e.g. `1,-1,1/2`
    #[arg(long = "tau-schedule", value_delimiter = ',', allow_hyphen_values = true)]
    tau_schedule: Vec<String>,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
    /// Also write a DOT drawing to this path
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GradingArgs {
    /// Order of the cyclic grading group
    #[arg(long, default_value_t = 1)]
    cyclic: usize,
    /// Arrow degrees as `arrow=k`; unlisted arrows have degree 0
    #[arg(long = "degree", value_delimiter = ',')]
    degrees: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the file and check that every ideal is admissible
    Check(Common),
    /// List paths, bypasses and double bypasses
    Paths(Common),
    /// Reduced echelon bases of the ideal per pair of vertices
    Groebner(Common),
    /// Presentation and abelian invariants of the fundamental group
    Pi1(Common),
    /// Decide whether two walks are homotopic
    Homotopic {
        #[command(flatten)]
        common: Common,
        u: String,
        v: String,
    },
    /// Explore the graph of homotopy relations reachable by transvections
    Gamma(Common),
    /// Sources of the graph of homotopy relations
    Source(Common),
    /// Whether the identity on walks gives a surjection of fundamental groups
    Surjection {
        #[command(flatten)]
        common: Common,
        source: String,
        target: String,
    },
    /// Universal cover, possibly truncated to a ball
    Cover {
        #[command(flatten)]
        common: Common,
        /// Write the cover as quiver, ideal, projection and action blocks
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Smash product with a cyclic grading
    Smash {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grading: GradingArgs,
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Lift an automorphism to universal covers
    Lift {
        #[command(flatten)]
        common: Common,
        /// Transvection as `arrow:path:tau`, e.g. `a:c*b:-1`
        #[arg(long, allow_hyphen_values = true)]
        transvection: Option<String>,
        /// Dilatation scales as `arrow=scale`; unlisted arrows keep scale 1
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dilatation: Vec<String>,
        /// Automorphism declared in the file
        #[arg(long)]
        automorphism: Option<String>,
    },
    /// Compose lifts from the ideal to the smash product of a target ideal
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Ideal whose smash product is the target cover
        #[arg(long)]
        target: String,
        #[command(flatten)]
        grading: GradingArgs,
    },
    /// Print a seeded random bound quiver in the input language
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        /// Number of generating relations
        #[arg(long, default_value_t = 2)]
        relations: usize,
        #[arg(long = "char", default_value_t = 0)]
        characteristic: u64,
    },
    /// Run the bundled examples and compare with the golden JSON files
    Examples {
        /// Directory holding the golden files
        #[arg(long)]
        data: Option<PathBuf>,
        /// Rewrite the golden files instead of comparing
        #[arg(long)]
        bless: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Ok = 0,
    Refuted = 1,
    Unknown = 2,
}

struct Workspace {
    doc: Document,
    common: Common,
}

impl Workspace {
    fn load(common: &Common) -> Result<Workspace> {
        let text = fs::read_to_string(&common.file).with_context(|| format!("reading {}", common.file.display()))?;
        let doc = parse_document(&text).with_context(|| format!("parsing {}", common.file.display()))?;
        Ok(Workspace { doc, common: common.clone() })
    }

    fn ideal_name(&self) -> Result<String> {
        if let Some(n) = &self.common.ideal {
            return Ok(n.clone());
        }
        match self.doc.ideal_names().as_slice() {
            [one] => Ok(one.clone()),
            [] => bail!("the file declares no ideal"),
            many => bail!("several ideals declared ({}); pick one with --ideal", many.join(", ")),
        }
    }

    fn named_ideal(&self, name: &str) -> Result<Ideal> {
        self.doc.ideal(name, self.common.characteristic).with_context(|| format!("ideal `{name}`"))
    }

    fn ideal(&self) -> Result<(String, Ideal)> {
        let name = self.ideal_name()?;
        let i = self.named_ideal(&name)?;
        Ok((name, i))
    }

    fn quiver(&self) -> Result<Arc<Quiver>> {
        if self.common.ideal.is_some() || self.doc.quivers.len() != 1 {
            return Ok(self.ideal()?.1.quiver_arc().clone());
        }
        Ok(self.doc.quivers[0].clone())
    }

    fn base(&self, q: &Quiver) -> Result<usize> {
        match &self.common.base {
            Some(v) => Ok(q.vertex_id(v)?),
            None => Ok(0),
        }
    }

    fn homotopy_options(&self) -> HomotopyOptions {
        HomotopyOptions { cap: self.common.cap, ..HomotopyOptions::default() }
    }

    fn gamma_options(&self, field: Field) -> Result<GammaOptions> {
        let schedule = if self.common.tau_schedule.is_empty() {
            None
        } else {
            let values = self
                .common
                .tau_schedule
                .iter()
                .map(|s| field.parse(s.trim()).with_context(|| format!("τ value `{s}`")))
                .collect::<Result<Vec<_>>>()?;
            if values.iter().any(|v| v.is_zero()) {
                bail!("the τ schedule must not contain zero");
            }
            Some(values)
        };
        Ok(GammaOptions { schedule, homotopy: self.homotopy_options(), ..GammaOptions::default() })
    }

    fn write_dot(&self, text: impl FnOnce() -> String) -> Result<()> {
        if let Some(p) = &self.common.dot {
            fs::write(p, text()).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }
}

fn print_json<T: serde::Serialize + ?Sized>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn group_name(rank: usize, torsion: &[u64]) -> String {
    let mut parts: Vec<String> = torsion.iter().map(|d| format!("Z/{d}")).collect();
    match rank {
        0 => {}
        1 => parts.push("Z".into()),
        r => parts.push(format!("Z^{r}")),
    }
    if parts.is_empty() {
        "trivial".into()
    } else {
        parts.join(" x ")
    }
}

fn check(ws: &Workspace) -> Result<Status> {
    let mut quivers = Vec::new();
    for q in &ws.doc.quivers {
        quivers.push(json!({
            "name": q.name(),
            "vertices": q.vertex_count(),
            "arrows": q.arrow_count(),
            "paths": q.enumerate_paths().len(),
            "bypasses": q.find_bypasses().len(),
            "double_bypasses": q.find_double_bypasses().len(),
        }));
    }
    let mut ideals = Vec::new();
    for name in ws.doc.ideal_names() {
        let i = ws.named_ideal(&name)?;
        let q = i.quiver();
        ideals.push(json!({
            "name": name,
            "quiver": q.name(),
            "characteristic": i.field().characteristic(),
            "minimal_relations": i.minimal_relations().iter().map(|r| r.display(q).to_string()).collect::<Vec<_>>(),
            "constricted": i.is_constricted(),
        }));
    }
    let out = json!({ "quivers": quivers, "ideals": ideals });
    if ws.common.json {
        return print_json(&out).map(|_| Status::Ok);
    }
    for q in &out["quivers"].as_array().cloned().unwrap_or_default() {
        println!(
            "quiver {}: {} vertices, {} arrows, {} paths, {} bypasses, {} double bypasses",
            q["name"].as_str().unwrap_or(""),
            q["vertices"],
            q["arrows"],
            q["paths"],
            q["bypasses"],
            q["double_bypasses"]
        );
    }
    for i in &out["ideals"].as_array().cloned().unwrap_or_default() {
        let rels: Vec<&str> = i["minimal_relations"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
        println!(
            "ideal {} over {}({}): admissible{}, {}",
            i["name"].as_str().unwrap_or(""),
            i["quiver"].as_str().unwrap_or(""),
            i["characteristic"],
            if i["constricted"].as_bool() == Some(true) { ", constricted" } else { "" },
            if rels.is_empty() { "zero".to_string() } else { rels.join("; ") }
        );
    }
    Ok(Status::Ok)
}

fn paths(ws: &Workspace) -> Result<Status> {
    let q = ws.quiver()?;
    ws.write_dot(|| quiver_to_dot(&q))?;
    let paths: Vec<Value> = q
        .enumerate_paths()
        .iter()
        .filter(|p| !p.is_trivial())
        .map(|p| {
            json!({
                "source": q.vertex_name(p.source),
                "target": q.vertex_name(p.target),
                "path": p.display(&q).to_string(),
            })
        })
        .collect();
    let bypasses: Vec<String> = q.find_bypasses().iter().map(|b| b.label(&q)).collect();
    let doubles: Vec<[String; 2]> =
        q.find_double_bypasses().iter().map(|(x, y)| [x.label(&q), y.label(&q)]).collect();
    if ws.common.json {
        print_json(&json!({ "paths": paths, "bypasses": bypasses, "double_bypasses": doubles }))?;
        return Ok(Status::Ok);
    }
    for p in &paths {
        println!("{} -> {}: {}", p["source"].as_str().unwrap(), p["target"].as_str().unwrap(), p["path"].as_str().unwrap());
    }
    println!("{} paths of positive length", paths.len());
    println!("bypasses: {}", if bypasses.is_empty() { "none".into() } else { bypasses.join(", ") });
    for [x, y] in &doubles {
        println!("double bypass: {x} with {y}");
    }
    Ok(Status::Ok)
}

fn groebner(ws: &Workspace) -> Result<Status> {
    let (name, i) = ws.ideal()?;
    let q = i.quiver();
    let mut pairs = Vec::new();
    for (x, y) in q.hom_pairs() {
        pairs.push(json!({
            "source": q.vertex_name(x),
            "target": q.vertex_name(y),
            "dim_ideal": i.dim_ideal(x, y),
            "dim_quotient": i.dim_quotient(x, y),
            "basis": i.groebner_basis(x, y).iter().map(|r| r.display(q).to_string()).collect::<Vec<_>>(),
        }));
    }
    if ws.common.json {
        print_json(&json!({ "ideal": IdealDto::from_ideal(&i), "hom_pairs": pairs }))?;
        return Ok(Status::Ok);
    }
    println!("ideal {name} over {}({})", q.name(), i.field().characteristic());
    for p in &pairs {
        println!(
            "{} -> {}: dim I = {}, dim A = {}",
            p["source"].as_str().unwrap(),
            p["target"].as_str().unwrap(),
            p["dim_ideal"],
            p["dim_quotient"]
        );
        for b in p["basis"].as_array().unwrap() {
            println!("  {}", b.as_str().unwrap());
        }
    }
    Ok(Status::Ok)
}

fn relation_for(ws: &Workspace, i: &Ideal) -> Result<HomotopyRelation> {
    let base = ws.base(i.quiver())?;
    Ok(HomotopyRelation::from_ideal(Arc::new(i.clone()), base, ws.homotopy_options())?)
}

fn pi1(ws: &Workspace) -> Result<Status> {
    let (name, i) = ws.ideal()?;
    let h = relation_for(ws, &i)?;
    let inv = h.abelianization();
    if ws.common.json {
        print_json(&Pi1Dto::from(&inv))?;
        return Ok(Status::Ok);
    }
    let p = h.presentation();
    let q = i.quiver();
    println!("pi1 of {name} at {}", q.vertex_name(h.base()));
    println!("generators: {}", if p.generators.is_empty() { "none".into() } else { p.generators.join(", ") });
    for r in &p.relators {
        println!("relator: {}", p.word_to_string(r));
    }
    println!("abelianization: {}", group_name(inv.rank, &inv.torsion));
    Ok(Status::Ok)
}

fn homotopic(ws: &Workspace, u: &str, v: &str) -> Result<Status> {
    let (_, i) = ws.ideal()?;
    let q = i.quiver();
    let (wu, wv) = (q.walk(u).with_context(|| format!("walk `{u}`"))?, q.walk(v).with_context(|| format!("walk `{v}`"))?);
    if wu.source != wv.source || wu.target != wv.target {
        bail!("walks `{u}` and `{v}` do not share endpoints");
    }
    let h = relation_for(ws, &i)?;
    let decision = h.decide(&wu, &wv)?;
    let (status, out) = match &decision {
        Decision::Homotopic(chain) => (
            Status::Ok,
            json!({
                "status": "Homotopic",
                "chain": chain.steps.iter().map(|w| w.display(q).to_string()).collect::<Vec<_>>(),
            }),
        ),
        Decision::NotHomotopic(cert) => (Status::Refuted, json!({ "status": "NotHomotopic", "certificate": cert })),
        Decision::Unknown => (Status::Unknown, json!({ "status": "Unknown" })),
    };
    if ws.common.json {
        print_json(&out)?;
        return Ok(status);
    }
    println!("{}", out["status"].as_str().unwrap());
    if let Decision::Homotopic(chain) = &decision {
        for (k, w) in chain.steps.iter().enumerate() {
            println!("  {k:>3}  {}", w.display(q));
        }
    }
    if let Decision::NotHomotopic(cert) = &decision {
        println!("  certificate: {}", serde_json::to_string(cert)?);
    }
    Ok(status)
}

fn gamma(ws: &Workspace) -> Result<Status> {
    let (_, i) = ws.ideal()?;
    let opts = ws.gamma_options(i.field())?;
    let g = explore_gamma(&i, &opts)?;
    ws.write_dot(|| gamma_to_dot(&g))?;
    let broken = g.check_invariants(&opts.homotopy)?;
    let status = if broken.is_empty() { Status::Ok } else { Status::Refuted };
    let dto = GammaDto::from_gamma(&g);
    if ws.common.json {
        print_json(&dto)?;
        return Ok(status);
    }
    for (k, v) in dto.vertices.iter().enumerate() {
        let mark = if dto.sources.contains(&k) { " (source)" } else { "" };
        println!("v{k} {}{mark}: pi1 {}", &v.fingerprint[..12], group_name(v.pi1.abelian_rank, &v.pi1.torsion));
        for r in &v.relations {
            println!("    {r}");
        }
    }
    for e in &dto.edges {
        println!("v{} -> v{} by {}", e.from, e.to, e.transvection);
    }
    for d in &dto.diagnostics {
        println!("note: {d}");
    }
    for b in &broken {
        println!("invariant violated: {b}");
    }
    Ok(status)
}

fn source(ws: &Workspace) -> Result<Status> {
    let (_, i) = ws.ideal()?;
    let g = explore_gamma(&i, &ws.gamma_options(i.field())?)?;
    ws.write_dot(|| gamma_to_dot(&g))?;
    let report = find_sources(&g);
    let q = i.quiver();
    let sources: Vec<Value> = report
        .sources
        .iter()
        .map(|(hash, ideal)| {
            json!({
                "fingerprint": hash,
                "relations": ideal.minimal_relations().iter().map(|r| r.display(q).to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if ws.common.json {
        print_json(&json!({ "sources": sources, "warnings": report.warnings }))?;
        return Ok(Status::Ok);
    }
    println!("{} source{}", sources.len(), if sources.len() == 1 { "" } else { "s" });
    for s in &sources {
        let rels: Vec<&str> = s["relations"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
        println!("  {}: {}", &s["fingerprint"].as_str().unwrap()[..12], rels.join("; "));
    }
    Ok(Status::Ok)
}

fn surjection(ws: &Workspace, source: &str, target: &str) -> Result<Status> {
    let (i0, i) = (ws.named_ideal(source)?, ws.named_ideal(target)?);
    let q = i0.quiver();
    let (status, out) = match check_surjection(&i0, &i, &ws.homotopy_options())? {
        Surjection::Confirmed => (Status::Ok, json!({ "result": "Confirmed" })),
        Surjection::Refuted { u, v } => (
            Status::Refuted,
            json!({ "result": "Refuted", "u": u.display(q).to_string(), "v": v.display(q).to_string() }),
        ),
        Surjection::Unknown { u, v } => (
            Status::Unknown,
            json!({ "result": "Unknown", "u": u.display(q).to_string(), "v": v.display(q).to_string() }),
        ),
    };
    if ws.common.json {
        print_json(&out)?;
    } else {
        match status {
            Status::Ok => println!("Confirmed: pi1({source}) maps onto pi1({target})"),
            _ => println!(
                "{}: generating pair {} ~ {} of {source} is not known to hold in {target}",
                out["result"].as_str().unwrap(),
                out["u"].as_str().unwrap(),
                out["v"].as_str().unwrap()
            ),
        }
    }
    Ok(status)
}

fn galois_json(g: &Galois) -> Value {
    match g {
        Galois::Galois { order, .. } => json!({ "galois": true, "order": order }),
        Galois::NotGalois { orphan } => json!({ "galois": false, "orphan": orphan }),
        Galois::Truncated => json!({ "galois": Value::Null }),
    }
}

fn report_cover(ws: &Workspace, cov: &CoverQuiver, base_name: &str, export: Option<&PathBuf>) -> Result<Status> {
    ws.write_dot(|| cover_to_dot(cov))?;
    if let Some(p) = export {
        fs::write(p, cover_to_dsl(cov, base_name)).with_context(|| format!("writing {}", p.display()))?;
    }
    let report: CoverReport = check_covering(cov)?;
    // deck transformations are only meaningful on a connected cover
    let connected = cov.quiver.is_connected();
    let galois = if connected { is_galois(cov)? } else { Galois::Truncated };
    let status = if !report.is_clean() || matches!(galois, Galois::NotGalois { .. }) {
        Status::Refuted
    } else if !cov.complete {
        Status::Unknown
    } else {
        Status::Ok
    };
    if ws.common.json {
        print_json(&json!({
            "cover": CoverDto::from_cover(cov),
            "violations": report.violations,
            "checked_vertices": report.checked_vertices,
            "connected": connected,
            "galois": galois_json(&galois),
        }))?;
        return Ok(status);
    }
    let bq = cov.base.quiver();
    println!(
        "{}: {} vertices, {} arrows, {}",
        cov.quiver.name(),
        cov.vertex_count(),
        cov.quiver.arrow_count(),
        if cov.complete { "complete".to_string() } else { format!("truncated at radius {}", cov.radius.unwrap_or(0)) }
    );
    let fibers: Vec<String> =
        cov.fiber_sizes().iter().enumerate().map(|(x, n)| format!("{}:{n}", bq.vertex_name(x))).collect();
    println!("fiber sizes: {}", fibers.join(" "));
    println!("covering checks on {} vertices: {}", report.checked_vertices, if report.is_clean() { "clean" } else { "violated" });
    for v in &report.violations {
        println!("  {v}");
    }
    match galois {
        Galois::Galois { order, .. } => println!("Galois with group of order {order}"),
        Galois::NotGalois { orphan } => println!("not Galois: no deck map reaches {}", cov.quiver.vertex_name(orphan)),
        Galois::Truncated if !connected => println!("cover is disconnected"),
        Galois::Truncated => println!("Galois property withheld: cover is truncated"),
    }
    Ok(status)
}

fn cover(ws: &Workspace, export: Option<&PathBuf>) -> Result<Status> {
    let (name, i) = ws.ideal()?;
    let base = ws.base(i.quiver())?;
    let cov = universal_cover(&i, base, ws.common.radius, &ws.homotopy_options())?;
    report_cover(ws, &cov, &name, export)
}

fn grading(q: &Quiver, args: &GradingArgs) -> Result<Grading> {
    if args.cyclic == 0 {
        bail!("the cyclic group order must be positive");
    }
    let mut degrees = vec![0; q.arrow_count()];
    for d in &args.degrees {
        let (a, k) = d.split_once('=').ok_or_else(|| anyhow!("degree `{d}` is not of the form arrow=k"))?;
        let k: i64 = k.trim().parse().with_context(|| format!("degree `{d}`"))?;
        degrees[q.arrow_id(a.trim())?] = k.rem_euclid(args.cyclic as i64) as usize;
    }
    Ok(Grading { group: FiniteGroup::cyclic(args.cyclic), degrees })
}

fn smash(ws: &Workspace, args: &GradingArgs, export: Option<&PathBuf>) -> Result<Status> {
    let (name, i) = ws.ideal()?;
    let cov = smash_product(&i, &grading(i.quiver(), args)?)?;
    report_cover(ws, &cov, &name, export)
}

fn parse_transvection(q: &Quiver, field: Field, text: &str) -> Result<Transvection> {
    let parts: Vec<&str> = text.split(':').collect();
    let [arrow, path, tau] = parts.as_slice() else {
        bail!("transvection `{text}` is not of the form arrow:path:tau");
    };
    let tau = field.parse(tau.trim()).with_context(|| format!("τ in `{text}`"))?;
    Ok(Transvection::new(q, q.arrow_id(arrow.trim())?, q.path(path.trim())?, tau)?)
}

fn parse_dilatation(q: &Quiver, field: Field, entries: &[String]) -> Result<Dilatation> {
    let mut scales = vec![field.one(); q.arrow_count()];
    for e in entries {
        let (a, s) = e.split_once('=').ok_or_else(|| anyhow!("scale `{e}` is not of the form arrow=scale"))?;
        scales[q.arrow_id(a.trim())?] = field.parse(s.trim()).with_context(|| format!("scale `{e}`"))?;
    }
    Ok(Dilatation::new(q, scales)?)
}

fn morphism_json(target: &CoverQuiver, m: &CoverMorphism) -> Value {
    json!({
        "target_vertices": target.vertex_count(),
        "target_complete": target.complete,
        "squares_checked": m.squares_checked,
        "relations_checked": m.relations_checked,
        "equivariance_checked": m.equivariance_checked,
        "violations": m.violations,
        "kernel": {
            "rank": m.kernel.kernel_rank,
            "torsion": m.kernel.kernel_torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
        },
        "fiber_sizes": m.fiber_sizes,
    })
}

fn lift(ws: &Workspace, transvection: Option<&str>, dilatation: &[String], automorphism: Option<&str>) -> Result<Status> {
    let (_, i) = ws.ideal()?;
    let q = i.quiver_arc().clone();
    let field = i.field();
    let opts = ws.homotopy_options();
    let base = ws.base(&q)?;
    let cov = universal_cover(&i, base, ws.common.radius, &opts)?;
    let chosen = [transvection.is_some(), !dilatation.is_empty(), automorphism.is_some()].iter().filter(|b| **b).count();
    if chosen != 1 {
        bail!("give exactly one of --transvection, --dilatation, --automorphism");
    }
    let (label, (target, m)) = if let Some(t) = transvection {
        let t = parse_transvection(&q, field, t)?;
        (t.label(&q), lift_transvection(&cov, &t, &opts)?)
    } else if let Some(name) = automorphism {
        let (aq, afield, images) = ws.doc.automorphism_images(name, ws.common.characteristic)?;
        if aq.name() != q.name() || afield != field {
            bail!("automorphism `{name}` lives over another quiver or field");
        }
        let phi = PathAutomorphism::from_partial(&q, field, &images)?;
        (name.to_string(), lift_automorphism(&cov, &phi, &opts)?)
    } else {
        let d = parse_dilatation(&q, field, dilatation)?;
        let phi = d.to_automorphism(&q, field);
        (d.label(&q), lift_automorphism(&cov, &phi, &opts)?)
    };
    let status = if m.is_clean() { Status::Ok } else { Status::Refuted };
    let out = morphism_json(&target, &m);
    if ws.common.json {
        print_json(&out)?;
        return Ok(status);
    }
    println!("lift of {label}: {} -> {} vertices", cov.vertex_count(), target.vertex_count());
    println!(
        "{} squares, {} relations, {} equivariance checks: {}",
        m.squares_checked,
        m.relations_checked,
        m.equivariance_checked,
        if m.is_clean() { "clean" } else { "violated" }
    );
    for v in &m.violations {
        println!("  {v}");
    }
    let torsion: Vec<u64> = m.kernel.kernel_torsion.iter().filter_map(|d| u64::try_from(d).ok()).collect();
    println!("kernel on abelianizations: {}", group_name(m.kernel.kernel_rank, &torsion));
    let fibers: Vec<String> = m.fiber_sizes.iter().map(|(k, n)| format!("{k} preimages over {n}")).collect();
    println!("fibers: {}", fibers.join(", "));
    Ok(status)
}

fn pipeline(ws: &Workspace, target: &str, args: &GradingArgs) -> Result<Status> {
    let (_, i0) = ws.ideal()?;
    let j = ws.named_ideal(target)?;
    let cov = smash_product(&j, &grading(j.quiver(), args)?)?;
    let report = theorem_b_pipeline(&i0, &cov, ws.common.radius, &ws.gamma_options(i0.field())?)?;
    let q = i0.quiver();
    let status = if report.violations.is_empty() { Status::Ok } else { Status::Refuted };
    let chain: Vec<String> = report.chain.iter().map(|t| t.label(q)).collect();
    let out = json!({
        "chain": chain,
        "dilatation": report.dilatation.label(q),
        "source_pi1": Pi1Dto::from(&report.source_abelianization),
        "source_order": report.source_order,
        "group_order": args.cyclic,
        "kernel_index": report.kernel_index,
        "kernel_trivial": report.kernel_trivial,
        "violations": report.violations,
    });
    if ws.common.json {
        print_json(&out)?;
        return Ok(status);
    }
    println!("chain: {}", if chain.is_empty() { "empty".into() } else { chain.join(" then ") });
    println!("dilatation: {}", report.dilatation.label(q));
    let inv = &report.source_abelianization;
    println!("pi1 of the privileged ideal: abelianization {}", group_name(inv.rank, &inv.torsion));
    if let Some(n) = report.source_order {
        println!("pi1 of the privileged ideal has order {n}");
    }
    println!("target group order {}, index of the kernel {}", args.cyclic, report.kernel_index);
    match report.kernel_trivial {
        Some(true) => println!("kernel is trivial"),
        Some(false) => println!("kernel is not trivial"),
        None => println!("kernel triviality withheld: source cover is truncated"),
    }
    for v in &report.violations {
        println!("  {v}");
    }
    Ok(status)
}

/// 2 for undecided computations, 1 for unreachable targets, 3 for input errors.
fn error_code(err: &anyhow::Error) -> u8 {
    fn homotopy(e: &HomotopyError) -> Option<u8> {
        matches!(e, HomotopyError::Inconclusive(..)).then_some(2)
    }
    fn gamma(e: &GammaError) -> Option<u8> {
        match e {
            GammaError::Homotopy(h) => homotopy(h),
            GammaError::UnknownFingerprint(_) | GammaError::TooLarge(_) => Some(2),
            GammaError::Unreachable => Some(1),
            _ => None,
        }
    }
    let code = if let Some(e) = err.downcast_ref::<HomotopyError>() {
        homotopy(e)
    } else if let Some(e) = err.downcast_ref::<GammaError>() {
        gamma(e)
    } else if let Some(e) = err.downcast_ref::<CoverError>() {
        match e {
            CoverError::Homotopy(h) => homotopy(h),
            CoverError::Gamma(g) => gamma(g),
            CoverError::NotHomotopicInImage(_) => Some(1),
            _ => None,
        }
    } else {
        None
    };
    code.unwrap_or(3)
}

fn dispatch(cli: Cli) -> Result<u8> {
    let status = match &cli.command {
        Command::Examples { data, bless, json } => return golden::run(data.clone(), *bless, *json),
        Command::Random { seed, vertices, relations, characteristic } => {
            print!("{}", random::document(*seed, *vertices, *relations, *characteristic)?);
            Status::Ok
        }
        Command::Check(c) => check(&Workspace::load(c)?)?,
        Command::Paths(c) => paths(&Workspace::load(c)?)?,
        Command::Groebner(c) => groebner(&Workspace::load(c)?)?,
        Command::Pi1(c) => pi1(&Workspace::load(c)?)?,
        Command::Homotopic { common, u, v } => homotopic(&Workspace::load(common)?, u, v)?,
        Command::Gamma(c) => gamma(&Workspace::load(c)?)?,
        Command::Source(c) => source(&Workspace::load(c)?)?,
        Command::Surjection { common, source, target } => surjection(&Workspace::load(common)?, source, target)?,
        Command::Cover { common, export } => cover(&Workspace::load(common)?, export.as_ref())?,
        Command::Smash { common, grading, export } => smash(&Workspace::load(common)?, grading, export.as_ref())?,
        Command::Lift { common, transvection, dilatation, automorphism } => {
            lift(&Workspace::load(common)?, transvection.as_deref(), dilatation, automorphism.as_deref())?
        }
        Command::Pipeline { common, target, grading } => pipeline(&Workspace::load(common)?, target, grading)?,
    };
    Ok(status as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
