mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use locus_core::branch::{cb_rank, gbi_check, quotient_presentation, varpi, BranchFrames};
use locus_core::corpus::{corpus, DEFAULT_MAX_SIZE};
use locus_core::frame::points::spatial_reflection;
use locus_core::nonarch::{
    build_tree_base, canonical_decomposition, chain_closure, check_nonarch_base, NonArchBase, TreeBase,
};
use locus_core::nuclei::{assembly, enumerate_nuclei, quotient, verify_quot, DEFAULT_NUCLEUS_BOUND};
use locus_core::padic::{qp_ball_tree, trichotomy, verify_relations, zp_tree};
use locus_core::verify::{frame_law_defect, verify_paper};
use locus_core::{ClosureMap, EnumerationBound, FiniteFrame, Mask, PAdicBall, Tree};

use input::{load_base, load_frame, load_nucleus, TreeSource};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("parse error in {}: line {line}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("bound exceeded: {0}")]
    Bound(String),
}

impl CliError {
    fn from_core(e: impl std::fmt::Display) -> Self {
        let msg = e.to_string();
        if msg.contains("exceed") || msg.contains("bound") {
            CliError::Bound(msg)
        } else {
            CliError::Invalid(msg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "locus", version, about = "Checks finite frames, non-archimedean bases, branch spaces and p-adic balls")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite frames: laws, points, separation properties.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Non-archimedean bases and their tree bases.
    #[command(subcommand)]
    Nonarch(NonarchCmd),
    /// Nuclei and quotient frames.
    #[command(subcommand)]
    Nuclei(NucleiCmd),
    /// Branch spaces of finite trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Balls in the p-adic numbers.
    #[command(subcommand)]
    Padic(PadicCmd),
    /// Run every structural check over the generated corpus.
    VerifyPaper {
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include per-check wall times (makes the report nondeterministic).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Debug, Subcommand)]
enum FrameCmd {
    /// Frame laws and Heyting adjunction.
    Check { frame: PathBuf },
    /// Points, cross-checked three ways.
    Points { frame: PathBuf },
    /// Zero-dimensionality, regularity, complete regularity, fitness.
    Separations { frame: PathBuf },
}

#[derive(Debug, Subcommand)]
enum NonarchCmd {
    /// Trichotomy table of a base.
    Check {
        frame: PathBuf,
        /// JSON array of labels, inline or in a file. Defaults to the join-irreducibles.
        #[arg(long)]
        base: Option<String>,
    },
    /// Tree base of the chain closure of a base.
    TreeBase {
        frame: PathBuf,
        #[arg(long)]
        base: Option<String>,
    },
    /// Maximal basics below an element.
    Decompose {
        frame: PathBuf,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        element: String,
    },
}

#[derive(Debug, Subcommand)]
enum NucleiCmd {
    /// Every nucleus of a frame, with their assembly.
    Enumerate {
        frame: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NUCLEUS_BOUND)]
        bound: usize,
    },
    /// Fixed-point frame of a nucleus.
    Quotient {
        frame: PathBuf,
        #[arg(long)]
        nucleus: PathBuf,
    },
    /// Image bases of every nucleus quotient.
    VerifyQuot {
        frame: PathBuf,
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NUCLEUS_BOUND)]
        bound: usize,
    },
}

#[derive(Debug, Subcommand)]
enum TreeCmd {
    /// Branches and the frames of upsets and opens.
    Branches(TreeSource),
    /// Number of derivative steps from the empty upset to the fixpoint.
    Rank(TreeSource),
    /// Table of the kernel nucleus on upsets.
    Ker(TreeSource),
    /// Table of the nucleus induced on upsets by a nucleus on the opens.
    Ler {
        #[command(flatten)]
        tree: TreeSource,
        /// Nucleus on the opens, labelled by sets of branch indices.
        #[arg(long)]
        nucleus: PathBuf,
    },
    /// Bar induction and the comparison of der, ker and ler.
    Gbi(TreeSource),
    /// Presentation of a frame from the tree base of its base.
    Eta {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        base: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum PadicCmd {
    /// Coset tree of depth `d`, or a window of balls with `--vmin`.
    Tree {
        #[arg(short)]
        p: i128,
        #[arg(short)]
        d: usize,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        vmin: i32,
    },
    /// Separation relations between all balls of a window.
    Verify {
        #[arg(short)]
        p: i128,
        #[arg(short)]
        d: i32,
    },
    /// Relation between two balls, each written `p^m*Zp+c`.
    Trichotomy { first: String, second: String },
}

/// Result of a command in every output form it supports.
struct Output {
    value: Value,
    text: String,
    dot: Option<String>,
    passed: bool,
}

impl Output {
    fn new(value: Value, text: String) -> Self {
        Self {
            value,
            text,
            dot: None,
            passed: true,
        }
    }

    fn dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }

    fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

fn labels(f: &FiniteFrame, m: &Mask) -> Vec<String> {
    m.iter().map(|a| f.label(a).to_string()).collect()
}

fn labels_of(f: &FiniteFrame, xs: &[usize]) -> Vec<String> {
    xs.iter().map(|&a| f.label(a).to_string()).collect()
}

fn frame_cmd(cmd: &FrameCmd) -> Result<Output, CliError> {
    match cmd {
        FrameCmd::Check { frame } => {
            let f = load_frame(frame)?;
            let defect = frame_law_defect(&f);
            let value = json!({
                "size": f.size(),
                "frame_laws": defect.is_none(),
                "defect": defect,
            });
            let text = match &defect {
                None => format!("frame with {} elements: laws hold\n", f.size()),
                Some(d) => format!("frame laws fail: {d}\n"),
            };
            Ok(Output::new(value, text)
                .dot(f.order().hasse_dot())
                .passed(defect.is_none()))
        }
        FrameCmd::Points { frame } => {
            let f = load_frame(frame)?;
            let sr = spatial_reflection(&f).map_err(CliError::from_core)?;
            let pts: Vec<Vec<String>> = sr.points.iter().map(|p| labels(&f, &p.kernel)).collect();
            let value = json!({
                "points": pts,
                "meet_irreducibles": labels(&f, &f.meet_irreducibles()),
                "spatial": sr.injective,
            });
            let mut text = format!("{} points\n", pts.len());
            for p in &pts {
                text.push_str(&format!("  {}\n", p.join(" ")));
            }
            Ok(Output::new(value, text))
        }
        FrameCmd::Separations { frame } => {
            let f = load_frame(frame)?;
            let (zd, comp) = f.zero_dimensional();
            let cr = f.is_completely_regular();
            let reg = f.is_regular();
            let fit = f.is_fit();
            let consistent = (!zd || cr) && (!cr || reg) && (!reg || fit);
            let value = json!({
                "zero_dimensional": zd,
                "complemented": labels(&f, &comp),
                "completely_regular": cr,
                "regular": reg,
                "fit": fit,
                "implications_hold": consistent,
            });
            let text = format!(
                "zero-dimensional {zd}\ncompletely regular {cr}\nregular {reg}\nfit {fit}\n"
            );
            Ok(Output::new(value, text).passed(consistent))
        }
    }
}

fn closed_base(f: &FiniteFrame, base: Option<&str>) -> Result<(Mask, NonArchBase), CliError> {
    let m = load_base(f, base)?;
    let closure = chain_closure(f, &m).map_err(CliError::from_core)?;
    let nb = NonArchBase::new(f, closure).map_err(CliError::from_core)?;
    Ok((m, nb))
}

fn tree_base_json(f: &FiniteFrame, tb: &TreeBase) -> Value {
    json!({
        "tree": tb.tree.to_json(),
        "elements": labels_of(f, &tb.node_element),
        "levels": tb.levels.iter().map(|l| l.iter().map(|&v| f.label(tb.node_element[v]).to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn nonarch_cmd(cmd: &NonarchCmd) -> Result<Output, CliError> {
    match cmd {
        NonarchCmd::Check { frame, base } => {
            let f = load_frame(frame)?;
            let m = load_base(&f, base.as_deref())?;
            let r = check_nonarch_base(&f, &m);
            let table: Vec<Value> = r
                .table
                .iter()
                .map(|(a, b, rel)| json!([f.label(*a), f.label(*b), rel]))
                .collect();
            let value = json!({
                "base": labels(&f, &m),
                "trichotomy": r.holds,
                "is_base": r.base_defect.is_none(),
                "non_archimedean": r.is_nonarch_base(),
                "violating_pair": r.violating_pair.map(|(a, b)| [f.label(a), f.label(b)]),
                "base_defect": r.base_defect.map(|a| f.label(a)),
                "not_zero_dimensional": r.not_zero_dimensional,
                "table": table,
            });
            let mut text = format!(
                "base {{{}}}: non-archimedean {}\n",
                labels(&f, &m).join(", "),
                r.is_nonarch_base()
            );
            if r.not_zero_dimensional {
                text.push_str("flag: non-archimedean base on a frame that is not zero-dimensional\n");
            }
            Ok(Output::new(value, text).passed(r.is_nonarch_base()))
        }
        NonarchCmd::TreeBase { frame, base } => {
            let f = load_frame(frame)?;
            let (_, nb) = closed_base(&f, base.as_deref())?;
            match build_tree_base(&f, &nb) {
                Ok(tb) => {
                    let text = format!(
                        "tree base with {} nodes over {} levels\n",
                        tb.tree.size(),
                        tb.levels.len()
                    );
                    Ok(Output::new(tree_base_json(&f, &tb), text).dot(tb.tree.to_dot()))
                }
                Err(e) => Ok(Output::new(json!({"error": e.to_string()}), format!("{e}\n")).passed(false)),
            }
        }
        NonarchCmd::Decompose { frame, base, element } => {
            let f = load_frame(frame)?;
            let (_, nb) = closed_base(&f, base.as_deref())?;
            let a = f.element(element).map_err(CliError::from_core)?;
            let d = canonical_decomposition(&f, &nb, a).map_err(CliError::from_core)?;
            let parts = labels_of(&f, &d);
            let text = format!("{element} = {}\n", parts.join(" v "));
            Ok(Output::new(json!({"element": element, "parts": parts}), text))
        }
    }
}

fn nuclei_cmd(cmd: &NucleiCmd) -> Result<Output, CliError> {
    match cmd {
        NucleiCmd::Enumerate { frame, bound } => {
            let f = load_frame(frame)?;
            let ns = enumerate_nuclei(&f, *bound).map_err(CliError::from_core)?;
            let asm = assembly(&f, &ns).map_err(CliError::from_core)?;
            let value = json!({
                "count": ns.len(),
                "nuclei": ns.iter().map(|j| j.to_json()).collect::<Vec<_>>(),
                "assembly_checked": asm.fully_checked,
            });
            Ok(Output::new(value, format!("{} nuclei\n", ns.len())))
        }
        NucleiCmd::Quotient { frame, nucleus } => {
            let f = load_frame(frame)?;
            let spec = load_nucleus(nucleus)?;
            let j = ClosureMap::from_json(&f, &spec).map_err(CliError::from_core)?;
            let q = quotient(&j).map_err(CliError::from_core)?;
            let value = json!({
                "fixed": labels_of(&f, &q.fixed_elements),
                "frame": q.frame.to_json(),
            });
            let text = format!("quotient with {} elements\n", q.frame.size());
            Ok(Output::new(value, text).dot(q.frame.order().hasse_dot()))
        }
        NucleiCmd::VerifyQuot { frame, base, bound } => {
            let f = load_frame(frame)?;
            let m = load_base(&f, base.as_deref())?;
            let nb = NonArchBase::new(&f, m).map_err(CliError::from_core)?;
            let records = verify_quot(&f, &nb, *bound).map_err(CliError::from_core)?;
            let failed = records.iter().filter(|r| !r.passed).count();
            let value = json!({
                "nuclei": records.len(),
                "failed": failed,
                "records": records.iter().map(|r| json!({
                    "nucleus": labels_of(&f, &r.nucleus),
                    "fixed": labels_of(&f, &r.fixed),
                    "witness": labels_of(&f, &r.witness),
                    "passed": r.passed,
                    "failure": r.failure,
                })).collect::<Vec<_>>(),
            });
            let text = format!("{} nuclei, {failed} without a non-archimedean image base\n", records.len());
            Ok(Output::new(value, text).passed(failed == 0))
        }
    }
}

fn branch_frames(t: &Tree) -> Result<BranchFrames, CliError> {
    BranchFrames::new(t, EnumerationBound::from_env()).map_err(CliError::from_core)
}

fn upset_labels(bf: &BranchFrames, u: usize) -> Vec<String> {
    bf.upsets.set(u).iter().map(|v| bf.tree().label(v).to_string()).collect()
}

fn tree_cmd(cmd: &TreeCmd) -> Result<Output, CliError> {
    match cmd {
        TreeCmd::Branches(src) => {
            let t = src.load()?;
            let bs = locus_core::BranchSet::new(&t);
            let branches: Vec<Vec<String>> = bs
                .branches()
                .iter()
                .map(|b| b.iter().map(|v| t.label(v).to_string()).collect())
                .collect();
            let mut text = format!("{} branches\n", branches.len());
            for b in &branches {
                text.push_str(&format!("  {}\n", b.join(" ")));
            }
            let value = json!({"tree": t.to_json(), "branches": branches});
            Ok(Output::new(value, text).dot(t.to_dot()))
        }
        TreeCmd::Rank(src) => {
            let t = src.load()?;
            let r = cb_rank(&t);
            Ok(Output::new(json!({"rank": r}), format!("{r}\n")).dot(t.to_dot()))
        }
        TreeCmd::Ker(src) => {
            let t = src.load()?;
            let bf = branch_frames(&t)?;
            let ker = bf.ker().map_err(CliError::from_core)?;
            map_output(&bf, &ker, "ker")
        }
        TreeCmd::Ler { tree, nucleus } => {
            let t = tree.load()?;
            let bf = branch_frames(&t)?;
            let spec = load_nucleus(nucleus)?;
            let j = ClosureMap::from_json(&bf.opens.frame, &spec).map_err(CliError::from_core)?;
            let ler = bf.ler(&j).map_err(CliError::from_core)?;
            map_output(&bf, &ler, "ler")
        }
        TreeCmd::Gbi(src) => {
            let t = src.load()?;
            let bf = branch_frames(&t)?;
            let nuclei = bf.enumerable_opens_nuclei().map_err(CliError::from_core)?;
            let mut reports = Vec::new();
            let mut agree = true;
            for j in &nuclei {
                let r = gbi_check(&bf, j).map_err(CliError::from_core)?;
                agree &= r.agree;
                reports.push(json!({"nucleus": j.to_json(), "report": r}));
            }
            let id = ClosureMap::identity(&bf.opens.frame);
            let base = gbi_check(&bf, &id).map_err(CliError::from_core)?;
            let text = format!(
                "{} nuclei on opens; conditions agree for all: {agree}\nidentity: bar induction {}, tables equal {}, perfect fixed {}, spatial {}\n",
                nuclei.len(),
                base.bar_induction,
                base.tables_equal,
                base.perfect_fixed,
                base.der_quotient_spatial
            );
            let ok = agree && base.tables_equal;
            Ok(Output::new(json!({"identity": base, "nuclei": reports}), text).passed(ok))
        }
        TreeCmd::Eta { frame, base } => {
            let f = load_frame(frame)?;
            let (_, nb) = closed_base(&f, base.as_deref())?;
            let tb = build_tree_base(&f, &nb).map_err(CliError::from_core)?;
            let p = quotient_presentation(&f, &tb).map_err(CliError::from_core)?;
            let v = varpi(&f, &tb).map_err(CliError::from_core)?;
            let text = format!(
                "eta: surjective {}, morphism {}, fixes basics {}, injective {}\nbranch map: continuous {}, injective {}, surjective {}\n",
                p.surjective, p.morphism, p.fixes_basics, p.injective, v.continuous, v.injective, v.surjective
            );
            let ok = p.passed() && v.continuous;
            let eta: Vec<String> = p.eta.iter().map(|&a| f.label(a).to_string()).collect();
            let value = json!({
                "tree_base": tree_base_json(&f, &tb),
                "eta": eta,
                "presentation": p,
                "branch_map": {"continuous": v.continuous, "injective": v.injective, "surjective": v.surjective},
            });
            Ok(Output::new(value, text).dot(tb.tree.to_dot()).passed(ok))
        }
    }
}

fn map_output(bf: &BranchFrames, c: &ClosureMap<'_>, name: &str) -> Result<Output, CliError> {
    let rows: Vec<Value> = bf
        .upsets
        .frame
        .elements()
        .map(|u| json!([upset_labels(bf, u), upset_labels(bf, c.apply(u))]))
        .collect();
    let mut text = String::new();
    for u in bf.upsets.frame.elements() {
        text.push_str(&format!(
            "{name}{{{}}} = {{{}}}\n",
            upset_labels(bf, u).join(","),
            upset_labels(bf, c.apply(u)).join(",")
        ));
    }
    Ok(Output::new(json!({"map": name, "table": rows, "fixed": c.fixed().count()}), text))
}

fn ball_tree_json(t: &Tree, balls: &[PAdicBall]) -> (Value, Tree) {
    let labelled = t.clone().with_labels(balls.iter().map(|b| b.to_string()).collect());
    (json!({"tree": labelled.to_json(), "balls": balls}), labelled)
}

fn padic_cmd(cmd: &PadicCmd) -> Result<Output, CliError> {
    match cmd {
        PadicCmd::Tree { p, d, vmin } => {
            if *vmin == 0 {
                let (t, balls) = zp_tree(*p, *d).map_err(CliError::from_core)?;
                let (value, labelled) = ball_tree_json(&t, &balls);
                let text = format!("{} balls, {} leaves\n", t.size(), t.leaves().len());
                Ok(Output::new(value, text).dot(labelled.to_dot()))
            } else {
                let forest = qp_ball_tree(*p, *vmin, *d).map_err(CliError::from_core)?;
                let mut values = Vec::new();
                let mut dot = String::new();
                for (t, balls) in &forest {
                    let (v, labelled) = ball_tree_json(t, balls);
                    values.push(v);
                    dot.push_str(&labelled.to_dot());
                }
                let text = format!("{} roots\n", forest.len());
                Ok(Output::new(json!({"forest": values}), text).dot(dot))
            }
        }
        PadicCmd::Verify { p, d } => {
            let r = verify_relations(*p, *d).map_err(CliError::from_core)?;
            let text = format!(
                "{} balls, {} pairs: separation defects {}, grid covered {}, split defects {}\n",
                r.balls, r.pairs, r.separation_defects, r.grid_covered, r.split_defects
            );
            let ok = r.passed();
            Ok(Output::new(serde_json::to_value(&r).expect("report serializes"), text).passed(ok))
        }
        PadicCmd::Trichotomy { first, second } => {
            let parse = |s: &str| {
                s.parse::<PAdicBall>().map_err(|e| CliError::Parse {
                    path: PathBuf::from(s),
                    line: 1,
                    column: 1,
                    message: e.to_string(),
                })
            };
            let (a, b) = (parse(first)?, parse(second)?);
            let r = trichotomy(&a, &b).map_err(CliError::from_core)?;
            Ok(Output::new(json!({"first": a, "second": b, "relation": r}), format!("{r:?}\n")))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Frame(c) => frame_cmd(c),
        Command::Nonarch(c) => nonarch_cmd(c),
        Command::Nuclei(c) => nuclei_cmd(c),
        Command::Tree(c) => tree_cmd(c),
        Command::Padic(c) => padic_cmd(c),
        Command::VerifyPaper { max_size, seed, timing } => {
            if *max_size == 0 {
                return Err(CliError::Usage("--max-size must be positive".into()));
            }
            let c = corpus(*seed, *max_size);
            let report = verify_paper(&c, *timing);
            let passed = report.all_pass();
            let text = report.to_text();
            let value = serde_json::to_value(&report).expect("report serializes");
            Ok(Output::new(value, text).passed(passed))
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.value).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Text => out.text.clone(),
        Format::Dot => out
            .dot
            .clone()
            .ok_or_else(|| CliError::Usage("this command has no DOT output".into()))?,
    };
    match &cli.output {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io(path.clone(), e.to_string())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| emit(&cli, &out).map(|_| out.passed));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
