mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use blockplan::catalog::Catalog;
use blockplan::design::{self, phi_max, BlockedDesign, DesignDocument};
use blockplan::graphs::{self, check_sufficient_conditions, dot, pair_name, ConditionReport};
use blockplan::oracle::{verify_design, Prediction};
use blockplan::synth::{
    self, Infeasible, ResultDocument, ScanConfig, SynthesisOutcome, SynthesisRequest,
    SynthesisResult,
};
use blockplan::{Error, ProfileSet, RequirementsGraph};

use input::{input_error, InputError, RequestDocument};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_PARTIAL: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Blocked two-level factorial designs that keep main effects and chosen
/// two-factor interactions estimable.
#[derive(Parser)]
#[command(name = "blockplan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chromatic number, sufficient conditions and achievable profile sets.
    Analyze {
        #[command(flatten)]
        request: RequestArgs,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// Build a design, verify it, and write it out.
    Construct {
        #[command(flatten)]
        request: RequestArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Check a design (or construct output) by enumerating every contrast.
    Verify {
        design: PathBuf,
        #[arg(long, value_enum, default_value_t = TextFormat::Text)]
        format: TextFormat,
    },
    /// List catalog templates.
    Catalog {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, value_enum, default_value_t = CatalogFormat::Text)]
        format: CatalogFormat,
    },
    /// Graphviz rendering of the requirements or estimability graph.
    ExportDot {
        #[command(flatten)]
        request: RequestArgs,
        #[arg(long, value_enum, default_value_t = GraphKind::Requirements)]
        graph: GraphKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RequestArgs {
    /// JSON request document; other request flags override its fields.
    #[arg(long)]
    request: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<u32>,
    /// File of interactions, or the list itself (e.g. "AB AC BD").
    #[arg(long)]
    interactions: Option<String>,
    #[arg(long)]
    objective: Option<synth::Objective>,
    /// Defining words of the fraction, e.g. "ABCDH BCEFG".
    #[arg(long)]
    fraction: Option<String>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on assignments visited by a fraction scan.
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKind {
    Requirements,
    Estimability,
}

impl RequestArgs {
    fn document(&self) -> Result<RequestDocument> {
        let mut doc = match &self.request {
            Some(path) => input::read_request_document(path)?,
            None => RequestDocument::default(),
        };
        if let Some(n) = self.n {
            doc.n = n;
        }
        if let Some(p) = self.p {
            doc.p = p;
        }
        if let Some(q) = self.q {
            doc.q = q;
        }
        if let Some(o) = self.objective {
            doc.objective = o;
        }
        if let Some(f) = &self.fraction {
            doc.fraction = Some(f.split_whitespace().map(String::from).collect());
        }
        if doc.n == 0 {
            return input_error("the number of factors is required (--n or a request file)");
        }
        if doc.q == 0 && self.request.is_none() && self.q.is_none() {
            return input_error("the block-size exponent is required (--q or a request file)");
        }
        Ok(doc)
    }

    fn load(&self) -> Result<SynthesisRequest> {
        let doc = self.document()?;
        let mut req = doc.to_request(self.budget)?;
        if let Some(arg) = &self.interactions {
            req.interactions = input::read_interactions(doc.n, arg)?;
        }
        Ok(req)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn names(pairs: &[(usize, usize)], n: usize) -> Vec<String> {
    pairs.iter().map(|&(a, b)| pair_name(a, b, n)).collect()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

fn conditions_text(r: &ConditionReport) -> String {
    let k = (1usize << r.q) - 1;
    let mut out = format!(
        "sufficient conditions for a {k}-colouring:\n  max degree <= {k} and no {}-clique: {}\n  fewer than {} factors of degree >= {k}: {}\n",
        k + 1,
        yes_no(r.degree_and_clique),
        k + 1,
        yes_no(r.few_high_degree),
    );
    out += &format!(
        "  acyclic or all cycles share a factor: {}\n",
        flag(r.cycles_share_vertex)
    );
    out += &format!(
        "sufficient conditions for an equitable 3-colouring:\n  acyclic with max degree bound: {}\n  forest with max degree <= 4: {}\n",
        flag(r.bollobas_guy),
        flag(r.forest_degree_four),
    );
    out
}

fn catalog() -> Result<Catalog> {
    Catalog::from_env().map_err(|e| InputError(e.to_string()).into())
}

/// Profile sets offered by the fraction route: the user fraction's scan or
/// the catalog templates.
fn fraction_profiles(req: &SynthesisRequest, cat: &Catalog) -> Result<Vec<ProfileSet>> {
    if let Some(f) = &req.fraction {
        let cfg = ScanConfig {
            budget: req.budget,
            ..ScanConfig::default()
        };
        return Ok(synth::scan_profiles(f, req.q, &cfg)?
            .into_keys()
            .rev()
            .collect());
    }
    let mut out: Vec<ProfileSet> = cat
        .templates(req.n, req.p, req.q)
        .into_iter()
        .map(|t| t.profile.clone())
        .collect();
    out.dedup();
    Ok(out)
}

fn analyze(req: &SynthesisRequest, format: TextFormat) -> Result<u8> {
    let g = &req.interactions;
    let n = req.n;
    let k = (1usize << req.q) - 1;
    let report = check_sufficient_conditions(g, req.q);
    let exact = graphs::chromatic_number(g).ok();
    let chi_text = match exact {
        Some(chi) => format!("chromatic number {chi}"),
        None => format!(
            "chromatic number <= {} (exact search is limited to 24 factors)",
            report.max_degree + 1
        ),
    };
    let colourable = match exact {
        Some(chi) => Some(chi <= k),
        None if report.colorable() => Some(true),
        None => None,
    };
    let achievable: Vec<ProfileSet> = if exact.is_some() {
        graphs::colorings_by_profile(g, req.q)?
            .into_keys()
            .rev()
            .collect()
    } else {
        Vec::new()
    };
    let templates = if req.p > 0 || req.fraction.is_some() {
        Some(fraction_profiles(req, &catalog()?)?)
    } else {
        None
    };
    let feasible = match (&templates, colourable) {
        (_, Some(false)) => Some(false),
        (Some(t), Some(true)) => Some(exact.is_none() || t.iter().any(|p| achievable.contains(p))),
        (None, c) => c,
        (Some(_), None) => None,
    };
    let verdict = match feasible {
        Some(true) => format!("feasible for q={}", req.q),
        Some(false) => format!("infeasible for q={}", req.q),
        None => format!("feasibility for q={} undecided", req.q),
    };
    match format {
        TextFormat::Text => {
            let mut out = format!(
                "{n} factors, p={}: {} runs in blocks of {}\n",
                req.p,
                1u64 << (n - req.p),
                k + 1
            );
            out += &format!("interactions ({}): {}\n", g.edge_count(), g.render_edges());
            out += &format!("{chi_text}; {verdict}\n");
            out += &format!(
                "max degree {}; acyclic: {}\n",
                report.max_degree,
                yes_no(report.forest)
            );
            out += &conditions_text(&report);
            out += &format!("phi_max {}\n", phi_max(n, req.q));
            if exact.is_some() {
                out += "achievable profile sets:";
                if achievable.is_empty() {
                    out += " none";
                }
                for p in &achievable {
                    out += &format!(" {p}={}", design::count_estimable(p));
                }
                out += "\n";
            }
            if let Some(t) = &templates {
                let list: Vec<String> = t.iter().map(ToString::to_string).collect();
                out += &format!(
                    "fraction profile sets: {}\n",
                    if list.is_empty() {
                        "none".into()
                    } else {
                        list.join(" ")
                    }
                );
            }
            print!("{out}");
        }
        TextFormat::Json => {
            let doc = json!({
                "n": n,
                "p": req.p,
                "q": req.q,
                "interactions": names(&g.edges(), n),
                "chromatic_number": exact,
                "chromatic_upper_bound": report.max_degree + 1,
                "feasible": feasible,
                "conditions": report,
                "phi_max": phi_max(n, req.q),
                "achievable_profiles": achievable.iter().map(|p| json!({
                    "profile": p.to_string(),
                    "estimable": design::count_estimable(p),
                })).collect::<Vec<_>>(),
                "fraction_profiles": templates.map(|t| t.iter().map(ToString::to_string).collect::<Vec<_>>()),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(0)
}

fn infeasible_json(inf: &Infeasible, n: usize) -> Value {
    json!({
        "status": "infeasible",
        "reason": inf.reason,
        "chromatic_number": inf.chromatic_number,
        "diagnostics": inf.diagnostics,
        "achievable_profiles": inf.achievable_profiles.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "template_profiles": inf.template_profiles.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "advice": inf.advice.as_ref().map(|a| json!({
            "single_edge_fixes": names(&a.single_edge_fixes, n),
            "greedy_removal": names(&a.greedy_removal, n),
        })),
    })
}

fn infeasible_text(inf: &Infeasible, n: usize) -> String {
    let mut out = format!("infeasible: {}\n", inf.reason);
    if let Some(chi) = inf.chromatic_number {
        out += &format!("chromatic number {chi}\n");
    }
    if !inf.achievable_profiles.is_empty() {
        let list: Vec<String> = inf
            .achievable_profiles
            .iter()
            .map(ToString::to_string)
            .collect();
        out += &format!("achievable profile sets: {}\n", list.join(" "));
    }
    if !inf.template_profiles.is_empty() {
        let list: Vec<String> = inf
            .template_profiles
            .iter()
            .map(ToString::to_string)
            .collect();
        out += &format!("template profile sets: {}\n", list.join(" "));
    }
    if let Some(a) = &inf.advice {
        if !a.single_edge_fixes.is_empty() {
            out += &format!(
                "dropping any one of {} makes it feasible\n",
                names(&a.single_edge_fixes, n).join(", ")
            );
        }
        if !a.greedy_removal.is_empty() {
            out += &format!("or drop {}\n", names(&a.greedy_removal, n).join(", "));
        }
    }
    out
}

/// Cross-group pairs that are still inestimable.
fn aliased_pairs(r: &SynthesisResult) -> Vec<(usize, usize)> {
    let group_of = r.grouping.group_of();
    let n = group_of.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if group_of[a] != group_of[b] && !r.estimable.contains(&(a, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

fn render_result(
    r: &SynthesisResult,
    req: &SynthesisRequest,
    format: OutputFormat,
) -> Result<String> {
    Ok(match format {
        OutputFormat::Json => serde_json::to_string_pretty(&r.to_document())? + "\n",
        OutputFormat::Csv => r.design.run_sheet_csv(),
        OutputFormat::Dot => {
            dot::estimability_dot(&r.grouping, Some(&req.interactions), &aliased_pairs(r))
        }
    })
}

fn construct(req: &SynthesisRequest, out: Option<&Path>, format: OutputFormat) -> Result<u8> {
    let cat = catalog()?;
    let outcome = synth::synthesize(req, Some(&cat))?;
    let r = match &outcome {
        SynthesisOutcome::Infeasible(inf) => {
            eprint!("{}", infeasible_text(inf, req.n));
            if matches!(format, OutputFormat::Json) {
                write_output(
                    out,
                    &(serde_json::to_string_pretty(&infeasible_json(inf, req.n))? + "\n"),
                )?;
            }
            return Ok(EXIT_INFEASIBLE);
        }
        SynthesisOutcome::Success(r) | SynthesisOutcome::Partial(r) => r,
    };
    let report = verify_design(&r.design, Some(&r.prediction()))?;
    if !report.passed() {
        eprint!("{}", report.to_table());
        return Ok(EXIT_VERIFY);
    }
    write_output(out, &render_result(r, req, format)?)?;
    eprintln!(
        "{} with profile set {}: {} interactions estimable, {} of {} required",
        if r.is_success() {
            "design"
        } else {
            "partial design"
        },
        r.profile,
        r.estimable_count(),
        r.required.len() - r.inestimable_required.len(),
        r.required.len()
    );
    for note in &r.notes {
        eprintln!("note: {note}");
    }
    if r.is_success() {
        Ok(0)
    } else {
        let lost: Vec<(usize, usize)> = r.inestimable_required.iter().map(|i| i.pair).collect();
        eprintln!(
            "inestimable required interactions: {}",
            names(&lost, req.n).join(", ")
        );
        Ok(EXIT_PARTIAL)
    }
}

fn verify(path: &Path, format: TextFormat) -> Result<u8> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        InputError(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let (doc, prediction): (DesignDocument, Option<Prediction>) = if value.get("design").is_some() {
        let r: ResultDocument =
            serde_json::from_value(value).map_err(|e| InputError(e.to_string()))?;
        let p = r.prediction().map_err(|e| InputError(e.to_string()))?;
        (r.design, Some(p))
    } else {
        let d = serde_json::from_value(value).map_err(|e| InputError(e.to_string()))?;
        (d, None)
    };
    let design = BlockedDesign::from_document(&doc).map_err(|e| InputError(e.to_string()))?;
    let report = verify_design(&design, prediction.as_ref())?;
    match format {
        TextFormat::Text => print!("{}", report.to_table()),
        TextFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY })
}

fn catalog_cmd(n: Option<usize>, p: Option<usize>, format: CatalogFormat) -> Result<u8> {
    let cat = catalog()?;
    match format {
        CatalogFormat::Csv => print!("{}", cat.dump_csv(n, p)),
        CatalogFormat::Json => println!("{}", cat.dump_json(n, p)),
        CatalogFormat::Text => {
            let rows = cat.dump_rows(n, p);
            println!(
                "{:<5} {:>2} {:>2} {:>4}  {:<14} {:>3}  {:<7} {:<28} {:<24} provenance",
                "sect", "n", "p", "runs", "profile", "int", "frac", "grouping", "aliased"
            );
            for r in rows {
                println!(
                    "{:<5} {:>2} {:>2} {:>4}  {:<14} {:>3}  {:<7} {:<28} {:<24} {}",
                    r.section.to_string(),
                    r.n,
                    r.p,
                    r.runs,
                    r.profile,
                    r.int,
                    r.fraction,
                    r.grouping,
                    r.aliased,
                    r.provenance
                );
            }
        }
    }
    for q in cat.quarantined() {
        eprintln!(
            "quarantined {}: {}",
            q.record.label(),
            q.discrepancies.join("; ")
        );
    }
    Ok(0)
}

fn export_dot(req: &SynthesisRequest, kind: GraphKind, out: Option<&Path>) -> Result<u8> {
    let text = match kind {
        GraphKind::Requirements => {
            let k = (1usize << req.q) - 1;
            let coloring = graphs::find_coloring(&req.interactions, k);
            dot::requirements_dot(&req.interactions, coloring.as_ref(), &[])
        }
        GraphKind::Estimability => {
            let cat = catalog()?;
            match synth::synthesize(req, Some(&cat))? {
                SynthesisOutcome::Infeasible(inf) => {
                    eprint!("{}", infeasible_text(&inf, req.n));
                    return Ok(EXIT_INFEASIBLE);
                }
                SynthesisOutcome::Success(r) | SynthesisOutcome::Partial(r) => {
                    dot::estimability_dot(&r.grouping, Some(&req.interactions), &aliased_pairs(&r))
                }
            }
        }
    };
    write_output(out, &text)?;
    Ok(0)
}

fn graph_only(args: &RequestArgs) -> Result<SynthesisRequest> {
    // the requirements graph needs no q; default to blocks of four
    if args.q.is_none() && args.request.is_none() {
        let n = args.n.ok_or_else(|| InputError("--n is required".into()))?;
        let g = match &args.interactions {
            Some(arg) => input::read_interactions(n, arg)?,
            None => RequirementsGraph::new(n).map_err(|e| InputError(e.to_string()))?,
        };
        return Ok(SynthesisRequest::full(n, 2, g));
    }
    args.load()
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze { request, format } => analyze(&request.load()?, format),
        Command::Construct {
            request,
            out,
            format,
        } => construct(&request.load()?, out.as_deref(), format),
        Command::Verify { design, format } => verify(&design, format),
        Command::Catalog { n, p, format } => catalog_cmd(n, p, format),
        Command::ExportDot {
            request,
            graph,
            out,
        } => {
            let req = match graph {
                GraphKind::Requirements => graph_only(&request)?,
                GraphKind::Estimability => request.load()?,
            };
            export_dot(&req, graph, out.as_deref())
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Consistency(_) | Error::Overflow) => EXIT_VERIFY,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
