//! The `modelweave` command line.
//!
//! Exit codes: 0 on success, 1 when a model fails to parse or validate, a
//! weave conflicts or a bound is exceeded, 2 on usage and I/O errors.
//! Reports go to stdout, diagnostics to stderr, files only through `-o`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::aspect_model::AspectModel;
use crate::core_model::CoreModel;
use crate::dsl::{
    self, decode_source, export_diagram, export_structured, export_woven_diagram, Document, Parsed, SourceKind,
};
use crate::report::ValidationReport;
use crate::requirements::{validate_graph, DecompositionGraph, DEFAULT_MAX_LEAVES};
use crate::weaver::{WeaveError, WeaveOptions, Weaver};
use crate::weaving_model::{digest_check, validate_weaving, DigestStatus, RightModel, WeavingModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "modelweave",
    version,
    about = "Weave aspect models into class-diagram core models"
)]
struct Cli {
    /// Suppress the report on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Structured,
    Diagram,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate model files (.core, .aspect, .weave, .reqs).
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Weave additional and aspect models into a core model.
    Weave {
        core: PathBuf,
        /// Additional core model; must be followed by --with-weaving.
        #[arg(long, value_name = "FILE")]
        additional: Vec<PathBuf>,
        /// Aspect model; must be followed by --with-weaving.
        #[arg(long, value_name = "FILE")]
        aspects: Vec<PathBuf>,
        /// Weaving model for the preceding --additional or --aspects.
        #[arg(long, value_name = "FILE")]
        with_weaving: Vec<PathBuf>,
        #[arg(short, long, required_unless_present = "plan")]
        output: Option<PathBuf>,
        /// Print the weave plans without writing anything.
        #[arg(long)]
        plan: bool,
        /// Fail on stale content digests instead of warning.
        #[arg(long)]
        strict: bool,
        /// Settle equal-priority conflicts by aspect declaration order.
        #[arg(long)]
        force_first: bool,
    },
    /// Export a model as JSON or Graphviz DOT.
    Export {
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Query a requirements decomposition graph.
    Reqs {
        graph: PathBuf,
        #[arg(long, conflicts_with_all = ["eval", "cr"])]
        check_redundancy: bool,
        /// Comma-separated satisfied leaf ids.
        #[arg(long, value_name = "IDS", requires = "cr")]
        eval: Option<String>,
        #[arg(long, requires = "eval")]
        cr: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_LEAVES)]
        max_leaves: usize,
    },
}

/// An early exit. Its message, if any, has already been written.
struct Exit(i32);

type Run<T> = Result<T, Exit>;

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    quiet: bool,
}

impl Ctx<'_> {
    fn report(&mut self, s: &str) {
        if !self.quiet {
            let _ = self.out.write_all(s.as_bytes());
        }
    }

    fn diag(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{s}");
    }

    fn fail<T>(&mut self, code: i32, s: impl std::fmt::Display) -> Run<T> {
        self.diag(s);
        Err(Exit(code))
    }

    fn read(&mut self, path: &Path) -> Run<String> {
        let name = path.display().to_string();
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) => return self.fail(EXIT_USAGE, format!("{name}: error: cannot read: {e}")),
        };
        decode_source(&bytes, &name).or_else(|d| self.fail(EXIT_FAILURE, d))
    }

    fn parsed<T>(&mut self, p: Parsed<T>) -> Run<T> {
        for d in &p.diagnostics {
            self.diag(d);
        }
        p.value.ok_or(Exit(EXIT_FAILURE))
    }

    fn load_core(&mut self, path: &Path) -> Run<CoreModel> {
        let text = self.read(path)?;
        self.parsed(dsl::parse_core(&text, &path.display().to_string()))
    }

    fn load_aspect(&mut self, path: &Path) -> Run<AspectModel> {
        let text = self.read(path)?;
        self.parsed(dsl::parse_aspect(&text, &path.display().to_string()))
    }

    fn load_weaving(&mut self, path: &Path) -> Run<WeavingModel> {
        let text = self.read(path)?;
        self.parsed(dsl::parse_weaving(&text, &path.display().to_string()))
    }

    fn load_graph(&mut self, path: &Path) -> Run<DecompositionGraph> {
        let text = self.read(path)?;
        self.parsed(dsl::parse_requirements(&text, &path.display().to_string()))
    }

    fn digests(&mut self, w: &WeavingModel, left: &CoreModel, right: RightModel<'_>, strict: bool) -> Run<()> {
        if let DigestStatus::Stale(refs) = digest_check(w, left, right) {
            for r in refs {
                let msg = format!(
                    "weaving {}: model {} ({}) changed since its digest was recorded",
                    w.name, r.logical_name, r.source_path
                );
                if strict {
                    return self.fail(EXIT_FAILURE, format!("error: {msg}"));
                }
                self.diag(format!("warning: {msg}"));
            }
        }
        Ok(())
    }
}

fn report_lines(name: &str, report: &ValidationReport) -> String {
    match report.len() {
        0 => format!("{name}: ok\n"),
        n => {
            let mut s = format!("{name}: {n} violation{}\n", if n == 1 { "" } else { "s" });
            for v in report.iter() {
                s.push_str(&format!("  {v}\n"));
            }
            s
        }
    }
}

fn referenced(weave_path: &Path, source: &str) -> PathBuf {
    weave_path.parent().unwrap_or(Path::new("")).join(source)
}

fn validate_one(ctx: &mut Ctx<'_>, path: &Path) -> Run<()> {
    let name = path.display().to_string();
    let Some(kind) = SourceKind::from_path(path) else {
        return ctx.fail(
            EXIT_USAGE,
            format!("{name}: error: unknown file kind (expected .core, .aspect, .weave or .reqs)"),
        );
    };
    let report = match kind {
        SourceKind::Core => ctx.load_core(path)?.validate(),
        SourceKind::Aspect => ctx.load_aspect(path)?.validate(),
        SourceKind::Requirements => validate_graph(&ctx.load_graph(path)?),
        SourceKind::Weaving => {
            let w = ctx.load_weaving(path)?;
            let left = ctx.load_core(&referenced(path, &w.left.source_path))?;
            let right_path = referenced(path, &w.right.source_path);
            let result = match w.kind {
                crate::weaving_model::WeavingKind::CoreAspect => {
                    let right = ctx.load_aspect(&right_path)?;
                    ctx.digests(&w, &left, RightModel::Aspect(&right), false)?;
                    validate_weaving(&w, &left, RightModel::Aspect(&right))
                }
                crate::weaving_model::WeavingKind::CoreAdditional => {
                    let right = ctx.load_core(&right_path)?;
                    ctx.digests(&w, &left, RightModel::Core(&right), false)?;
                    validate_weaving(&w, &left, RightModel::Core(&right))
                }
            };
            match result {
                Ok(r) => r,
                Err(e) => return ctx.fail(EXIT_FAILURE, format!("{name}: error: {e}")),
            }
        }
    };
    ctx.report(&report_lines(&name, &report));
    if report.is_empty() {
        Ok(())
    } else {
        Err(Exit(EXIT_FAILURE))
    }
}

fn cmd_validate(ctx: &mut Ctx<'_>, paths: &[PathBuf]) -> Run<()> {
    let mut code = EXIT_OK;
    for p in paths {
        if let Err(Exit(c)) = validate_one(ctx, p) {
            code = code.max(c);
        }
    }
    if code == EXIT_OK {
        Ok(())
    } else {
        Err(Exit(code))
    }
}

enum Pairing {
    Additional(PathBuf, PathBuf),
    Aspects(PathBuf, PathBuf),
}

/// Pairs each --additional / --aspects flag with the --with-weaving that
/// follows it on the command line.
fn pair_inputs(m: &ArgMatches) -> Result<Vec<Pairing>, String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Flag {
        Additional,
        Aspects,
        Weaving,
    }
    let mut events: Vec<(usize, Flag, PathBuf)> = Vec::new();
    for (id, flag) in [
        ("additional", Flag::Additional),
        ("aspects", Flag::Aspects),
        ("with_weaving", Flag::Weaving),
    ] {
        if let (Some(idx), Some(vals)) = (m.indices_of(id), m.get_many::<PathBuf>(id)) {
            events.extend(idx.zip(vals).map(|(i, v)| (i, flag, v.clone())));
        }
    }
    events.sort_by_key(|e| e.0);
    let mut out = Vec::new();
    let mut it = events.into_iter();
    while let Some((_, flag, model)) = it.next() {
        if flag == Flag::Weaving {
            return Err(format!(
                "--with-weaving {} does not follow --additional or --aspects",
                model.display()
            ));
        }
        match it.next() {
            Some((_, Flag::Weaving, w)) => out.push(match flag {
                Flag::Additional => Pairing::Additional(model, w),
                _ => Pairing::Aspects(model, w),
            }),
            _ => return Err(format!("{} must be followed by --with-weaving", model.display())),
        }
    }
    Ok(out)
}

fn write_file(ctx: &mut Ctx<'_>, path: &Path, content: &str) -> Run<()> {
    fs::write(path, content).or_else(|e| ctx.fail(EXIT_USAGE, format!("{}: error: cannot write: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_weave(
    ctx: &mut Ctx<'_>,
    matches: &ArgMatches,
    core_path: &Path,
    output: Option<&Path>,
    plan_only: bool,
    strict: bool,
    force_first: bool,
) -> Run<()> {
    let pairs = match pair_inputs(matches) {
        Ok(p) => p,
        Err(msg) => return ctx.fail(EXIT_USAGE, format!("error: {msg}")),
    };
    let core = ctx.load_core(core_path)?;
    let weave_err = |ctx: &mut Ctx<'_>, e: WeaveError| -> Exit {
        if let WeaveError::Unresolved(cs) = &e {
            let mut s = String::from("unresolved conflicts:\n");
            for c in cs {
                s.push_str(&format!("  {c}\n"));
            }
            ctx.report(&s);
        }
        ctx.diag(format!("error: {e}"));
        Exit(EXIT_FAILURE)
    };
    let mut weaver = Weaver::new(&core, WeaveOptions { force_first }).map_err(|e| weave_err(ctx, e))?;

    // additional weavings always run first, whatever the flag order
    let (additional, aspects): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|p| matches!(p, Pairing::Additional(..)));
    for p in additional.iter().chain(&aspects) {
        match p {
            Pairing::Additional(m, w) => {
                let model = ctx.load_core(m)?;
                let w = ctx.load_weaving(w)?;
                ctx.digests(&w, &core, RightModel::Core(&model), strict)?;
                weaver.weave_additional(&model, &w).map_err(|e| weave_err(ctx, e))?;
            }
            Pairing::Aspects(m, w) => {
                let model = ctx.load_aspect(m)?;
                let w = ctx.load_weaving(w)?;
                ctx.digests(&w, &core, RightModel::Aspect(&model), strict)?;
                if plan_only {
                    let planned = weaver.plan_aspects(&model, &w).map_err(|e| weave_err(ctx, e))?;
                    let mut s = format!("plan {}:\n{}", w.name, planned.outcome.plan);
                    for c in &planned.outcome.conflicts {
                        s.push_str(&format!("conflict: {c}\n"));
                    }
                    for d in &planned.resolution.decisions {
                        s.push_str(&format!("resolved: {d}\n"));
                    }
                    ctx.report(&s);
                }
                weaver.weave_aspects(&model, &w).map_err(|e| weave_err(ctx, e))?;
            }
        }
    }
    let outcome = weaver.finish();
    if plan_only {
        return Ok(());
    }
    ctx.report(&outcome.report.to_string());
    let path = output.expect("clap requires -o without --plan");
    write_file(ctx, path, &dsl::print_woven(&outcome.woven))
}

fn cmd_export(ctx: &mut Ctx<'_>, input: &Path, format: Format, output: &Path) -> Run<()> {
    let name = input.display().to_string();
    let Some(kind) = SourceKind::from_path(input) else {
        return ctx.fail(EXIT_USAGE, format!("{name}: error: unknown file kind"));
    };
    let text = ctx.read(input)?;
    let doc = match kind {
        SourceKind::Core => {
            let w = ctx.parsed(dsl::parse_woven(&text, &name))?;
            if w.ordering_constraints.is_empty() && w.provenance.is_empty() {
                Document::Core(w.base)
            } else {
                Document::Woven(w)
            }
        }
        SourceKind::Aspect => Document::Aspect(ctx.parsed(dsl::parse_aspect(&text, &name))?),
        SourceKind::Weaving => Document::Weaving(ctx.parsed(dsl::parse_weaving(&text, &name))?),
        SourceKind::Requirements => Document::Requirements(ctx.parsed(dsl::parse_requirements(&text, &name))?),
    };
    let content = match (format, &doc) {
        (Format::Structured, _) => export_structured(&doc),
        (Format::Diagram, Document::Core(m)) => export_diagram(m),
        (Format::Diagram, Document::Woven(w)) => export_woven_diagram(w),
        (Format::Diagram, _) => {
            return ctx.fail(EXIT_USAGE, format!("{name}: error: diagram export needs a core model"))
        }
    };
    write_file(ctx, output, &content)
}

fn cmd_reqs(
    ctx: &mut Ctx<'_>,
    path: &Path,
    check_redundancy: bool,
    eval: Option<&str>,
    cr: Option<&str>,
    max_leaves: usize,
) -> Run<()> {
    let g = ctx.load_graph(path)?;
    let report = validate_graph(&g);
    if !report.is_empty() {
        ctx.report(&report_lines(&path.display().to_string(), &report));
        return Err(Exit(EXIT_FAILURE));
    }
    if check_redundancy {
        let found = g
            .redundant_crs(max_leaves)
            .or_else(|e| ctx.fail(EXIT_FAILURE, format!("error: {e}")))?;
        let mut s = String::new();
        if found.is_empty() {
            s.push_str("no redundant requirements\n");
        }
        for r in found {
            let sets: Vec<String> = r
                .inferred_from
                .iter()
                .map(|w| format!("{{{}}}", w.join(", ")))
                .collect();
            s.push_str(&format!("{} is inferable from {}\n", r.cr, sets.join(" or ")));
        }
        ctx.report(&s);
        return Ok(());
    }
    match (eval, cr) {
        (Some(ids), Some(cr)) => {
            let satisfied: BTreeSet<String> = ids
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            let leaves: BTreeSet<&str> = g.leaves().map(|n| n.id.as_str()).collect();
            if let Some(bad) = satisfied.iter().find(|s| !leaves.contains(s.as_str())) {
                return ctx.fail(EXIT_FAILURE, format!("error: `{bad}` is not a leaf requirement"));
            }
            let expr = g
                .expression_of(cr)
                .or_else(|e| ctx.fail(EXIT_FAILURE, format!("error: {e}")))?;
            let value = g
                .evaluate(cr, &satisfied)
                .or_else(|e| ctx.fail(EXIT_FAILURE, format!("error: {e}")))?;
            ctx.report(&format!("{cr} = {expr}\n{value}\n"));
            Ok(())
        }
        _ => ctx.fail(
            EXIT_USAGE,
            "error: reqs needs --check-redundancy or --eval <ids> --cr <id>",
        ),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = err.write_all(e.render().to_string().as_bytes());
            return EXIT_USAGE;
        }
    };
    let mut ctx = Ctx {
        out,
        err,
        quiet: cli.quiet,
    };
    let result = match &cli.command {
        Command::Validate { paths } => cmd_validate(&mut ctx, paths),
        Command::Weave {
            core,
            output,
            plan,
            strict,
            force_first,
            ..
        } => {
            let sub = matches.subcommand_matches("weave").expect("weave subcommand");
            cmd_weave(&mut ctx, sub, core, output.as_deref(), *plan, *strict, *force_first)
        }
        Command::Export { input, format, output } => cmd_export(&mut ctx, input, *format, output),
        Command::Reqs {
            graph,
            check_redundancy,
            eval,
            cr,
            max_leaves,
        } => cmd_reqs(
            &mut ctx,
            graph,
            *check_redundancy,
            eval.as_deref(),
            cr.as_deref(),
            *max_leaves,
        ),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Exit(code)) => code,
    }
}
