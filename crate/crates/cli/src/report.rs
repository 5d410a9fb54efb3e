//! `check-graph` and `table1`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;

use consensus_privacy::adversary::{PrivacyParams, PrivacyReport};
use consensus_privacy::experiment::spec::{bundled_graphs, TOPOLOGY_CORRUPTED};
use consensus_privacy::graph::{connected_geometric_graph, default_radius_sq, honest_component, is_connected};
use consensus_privacy::graph::pdmm_edge_matrices;
use consensus_privacy::linear::{check_consensus_conditions, metropolis_weights};
use consensus_privacy::pdmm::subspace_projector;
use consensus_privacy::{CorruptionModel, Error, Graph, MechanismKind};

use crate::{prepare_out_dir, write_file, Failure};

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge-list file (`n m` header, one `i j` pair per line, 0-based).
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Bundled graph: `G` or `G'`.
    #[arg(long)]
    bundled: Option<String>,
    /// Nodes of a generated geometric graph.
    #[arg(long)]
    n: Option<usize>,
    /// Seed of a generated geometric graph.
    #[arg(long)]
    graph_seed: Option<u64>,
    /// Squared connection radius; defaults to 2 ln n / n.
    #[arg(long)]
    radius_sq: Option<f64>,
    /// Corrupted nodes, 1-based, comma separated.
    #[arg(long)]
    corrupted: Option<String>,
    /// Target node, 1-based.
    #[arg(long, default_value_t = 1)]
    target: usize,
    /// Also write the graph as an edge list.
    #[arg(long)]
    write: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[command(flatten)]
    graph: GraphArgs,
    /// DP noise variance.
    #[arg(long, default_value_t = 1.0)]
    sigma_sq: f64,
    /// Private-data variance.
    #[arg(long, default_value_t = 1.0)]
    sigma_s_sq: f64,
}

enum Source {
    Generated,
    Bundled,
}

fn parse_nodes(text: &str, n: usize) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<usize>() {
            Ok(0) | Err(_) => Err(Failure::Usage(format!("node ids are 1-based integers, got `{t}`"))),
            Ok(v) if v > n => Err(Error::NodeOutOfRange { node: v - 1, n }.into()),
            Ok(v) => Ok(v - 1),
        })
        .collect()
}

impl GraphArgs {
    /// The graph, a description, and whether it is the bundled `G`/`G'`.
    fn load(&self, fallback: Source) -> Result<(Graph, String, bool), Failure> {
        if let Some(p) = &self.graph_file {
            return Ok((Graph::read_edge_list(p)?, format!("file {}", p.display()), false));
        }
        let bundled = match (&self.bundled, fallback) {
            (Some(name), _) => Some(name.as_str()),
            (None, Source::Bundled) if self.n.is_none() && self.graph_seed.is_none() => Some("G"),
            _ => None,
        };
        if let Some(name) = bundled {
            let (label, g) = bundled_graphs()
                .into_iter()
                .find(|(l, _)| l.eq_ignore_ascii_case(name))
                .ok_or_else(|| Failure::Usage(format!("unknown bundled graph `{name}`; use G or G'")))?;
            return Ok((g, format!("bundled {label}"), true));
        }
        let n = self.n.unwrap_or(10);
        let seed = self.graph_seed.unwrap_or(1);
        let r2 = self.radius_sq.unwrap_or_else(|| default_radius_sq(n));
        let (g, used) = connected_geometric_graph(n, r2, seed)?;
        Ok((g, format!("geometric n={n} radius_sq={r2} seed={used}"), false))
    }

    fn target(&self, n: usize) -> Result<usize, Failure> {
        Ok(parse_nodes(&self.target.to_string(), n)?[0])
    }
}

fn one_based(nodes: &[usize]) -> String {
    nodes.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn check_graph(args: &GraphArgs) -> Result<(), Failure> {
    let (g, desc, _) = args.load(Source::Generated)?;
    if let Some(p) = &args.write {
        g.write_edge_list(p)?;
    }
    let (count, _) = g.components();
    println!("graph: {desc}");
    println!("nodes: {}  edges: {}  components: {count}  bipartite: {}", g.n(), g.m(), g.is_bipartite());
    println!("degrees: {}", g.degrees().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "));
    if !is_connected(&g) {
        return Err(Error::Disconnected.into());
    }
    let w = metropolis_weights(&g)?;
    let rep = check_consensus_conditions(&w);
    println!(
        "metropolis weights: column sums {}, row sums {}, spectral radius of W - 11'/n {:.6}",
        if rep.cond_i { "ok" } else { "fail" },
        if rep.cond_ii { "ok" } else { "fail" },
        rep.rho
    );
    let proj = subspace_projector(&pdmm_edge_matrices(&g)?);
    println!("dual subspace: rank {} of {}, non-convergent dimension {}", proj.rank(), 2 * g.m(), proj.complement_dim());
    if g.m() < g.n() {
        println!("warning: m < n, subspace perturbation has too few dual directions");
    }
    if let Some(text) = &args.corrupted {
        let i = args.target(g.n())?;
        let cm = CorruptionModel::new(&g, parse_nodes(text, g.n())?)?;
        let comp = honest_component(&g, &cm, i)?;
        println!("corrupted: {}  honest: {}", one_based(cm.corrupted()), cm.honest().len());
        println!("honest component of node {}: {} ({} nodes)", i + 1, one_based(&comp), comp.len());
        for kind in [MechanismKind::Dp, MechanismKind::Smpc, MechanismKind::Dosp] {
            println!("k_{} under {kind}: {}", i + 1, consensus_privacy::adversary::robustness(kind, &g, i));
        }
        cm.check_observed(&g)?;
        println!("every honest node has a corrupted neighbour");
    }
    Ok(())
}

fn bits(b: f64) -> String {
    if b.is_infinite() {
        "inf".into()
    } else {
        format!("{b:.4}")
    }
}

pub fn table1(args: &Table1Args, out_dir: &Path) -> Result<(), Failure> {
    let (g, desc, bundled) = args.graph.load(Source::Bundled)?;
    let i = args.graph.target(g.n())?;
    let corrupted = match (&args.graph.corrupted, bundled) {
        (Some(text), _) => parse_nodes(text, g.n())?,
        (None, true) => TOPOLOGY_CORRUPTED.to_vec(),
        (None, false) => (0..g.n()).filter(|&j| j != i).collect(),
    };
    let cm = CorruptionModel::new(&g, corrupted)?;
    if cm.corrupted().is_empty() {
        return Err(Error::NoCorruptedNodes.into());
    }
    let h = honest_component(&g, &cm, i)?.len();
    let p = PrivacyParams { n: g.n(), sigma_sq: args.sigma_sq, sigma_s_sq: args.sigma_s_sq, h, n_h: cm.honest().len() };
    let kinds = [MechanismKind::Dp, MechanismKind::Smpc, MechanismKind::Dosp];
    let reports: Vec<PrivacyReport> =
        kinds.iter().map(|&k| PrivacyReport::analytic(k, &p, &g, i)).collect::<Result<_, _>>()?;
    let value = |e: &consensus_privacy::info::MIEstimate| format!("{} bits (nmi {:.4})", bits(e.value_bits), e.nmi);
    let node = i + 1;
    let d = g.degree(i);
    let mut rows: Vec<[String; 4]> = vec![
        ["".into(), "DP".into(), "SMPC".into(), "DOSP".into()],
        ["Adversary models".into(), "passive, eavesdropping".into(), "passive, eavesdropping".into(), "passive, eavesdropping".into()],
        ["Coordinated noise insertion".into(), "no".into(), "yes".into(), "no".into()],
        ["Output utility".into(), "I(Y;Y+R_bar)".into(), "I(Y;Y)".into(), "I(Y;Y)".into()],
        ["".into(), value(&reports[0].utility), value(&reports[1].utility), value(&reports[2].utility)],
        ["Individual privacy".into(), "I(S_i;S_i+R_i)".into(), "I(S_i;sum over N_h' of S_j)".into(), "I(S_i;sum over N_h' of S_j)".into()],
        ["".into(), value(&reports[0].privacy), value(&reports[1].privacy), value(&reports[2].privacy)],
        ["Lower bound on privacy".into(), "I(S_i;S_i+R)".into(), "I(S_i;sum over N_h of S_j)".into(), "I(S_i;sum over N_h of S_j)".into()],
        ["".into(), value(&reports[0].lower_bound), value(&reports[1].lower_bound), value(&reports[2].lower_bound)],
        [
            "Max corrupted nodes k_i".into(),
            format!("n-1 = {} of {}", reports[0].robustness, g.n()),
            format!("d_i-1 = {} of {d}", reports[1].robustness),
            format!("d_i-1 = {} of {d}", reports[2].robustness),
        ],
        ["Channel encryption cost".into(), "0".into(), "1 (initialization)".into(), "1 (initialization)".into()],
    ];
    let widths: Vec<usize> = (0..4).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut text = String::new();
    writeln!(text, "# graph: {desc}").unwrap();
    writeln!(
        text,
        "# target node {node}, corrupted {}, |N_h| = {}, |N_h'| = {h}, sigma_sq = {}, sigma_s_sq = {}",
        one_based(cm.corrupted()),
        p.n_h,
        p.sigma_sq,
        p.sigma_s_sq
    )
    .unwrap();
    for r in rows.iter_mut() {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(text, "| {} |", cells.join(" | ")).unwrap();
    }
    print!("{text}");
    prepare_out_dir(out_dir)?;
    let mut csv = String::new();
    writeln!(csv, "{}", PrivacyReport::CSV_HEADER).unwrap();
    for r in &reports {
        writeln!(csv, "{}", r.csv_row()).unwrap();
    }
    write_file(&out_dir.join("table1.csv"), &csv)?;
    Ok(())
}
