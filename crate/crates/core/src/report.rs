//! The combined analysis of one matrix document.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::certify::{is_stably_dissipative, OutcomeJson};
use crate::dynamics::{self, fmt17, AffineSet, Monitors};
use crate::error::Result;
use crate::foliation::{self, equilibria_set, exact_rank};
use crate::graph::{build_graph, GraphJson};
use crate::model::{render_rational, render_vector, LvSystem, MatrixDocument};
use crate::reduction::{reduce_full, reduce_simplified, AttractorClass, MarkedJson};
use crate::trim::{trim_to_core, TrimReportJson};
use crate::CertifyOutcome;

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    #[serde(flatten)]
    pub graph: GraphJson,
    pub strong_links: usize,
    pub every_cycle_has_strong_link: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionSummary {
    pub full: MarkedJson,
    pub simplified: MarkedJson,
    pub classification: AttractorClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankSummary {
    pub exact: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSummary {
    pub kernel: Vec<Vec<String>>,
    pub kernel_transpose: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriaSummary {
    pub base: Vec<String>,
    pub directions: Vec<Vec<String>>,
    /// Bounds of `s` in `q + s·v`; `null` is unbounded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[Option<String>; 2]>,
}

#[derive(Clone, Debug)]
pub struct SimulationRequest {
    pub x0: Vec<f64>,
    pub t_final: f64,
    pub step: f64,
    pub plane: Option<AffineSet>,
}

/// Empirical: a finite trajectory, not a proof.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub kind: &'static str,
    pub t_final: String,
    pub step: String,
    pub x0: Vec<String>,
    pub x_final: Vec<String>,
    pub max_relative_level_drift: String,
    pub max_hdot: String,
    pub final_plane_residual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub input_sha256: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSummary>,
    pub certification: OutcomeJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trim: Option<TrimReportJson>,
    pub rank: RankSummary,
    pub kernels: KernelSummary,
    pub foliation_dimension: usize,
    pub equilibria: EquilibriaSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(skip)]
    pub outcome: CertifyOutcome,
}

pub fn digest(doc: &MatrixDocument) -> String {
    let hash = Sha256::digest(doc.render().as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn analyze(doc: &MatrixDocument, simulation: Option<&SimulationRequest>) -> Result<AnalysisReport> {
    let a = &doc.matrix;
    let n = a.n();
    let outcome = is_stably_dissipative(a);
    let graph = build_graph(a).ok();

    let graph_summary = graph.as_ref().map(|g| GraphSummary {
        graph: g.to_json(),
        strong_links: g
            .edges()
            .iter()
            .filter(|&&(i, j)| g.is_black(i) && g.is_black(j))
            .count(),
        every_cycle_has_strong_link: g.is_stably_dissipative(),
    });
    let reduction = graph.as_ref().map(|g| {
        let full = reduce_full(g);
        ReductionSummary {
            classification: full.classify(),
            full: full.to_json(),
            simplified: reduce_simplified(g).to_json(),
        }
    });
    let trim = graph.as_ref().and_then(|g| trim_to_core(g).ok());
    let rank = RankSummary {
        exact: exact_rank(a),
        graph: trim.as_ref().map(|t| t.rank),
    };
    let kernels = KernelSummary {
        kernel: foliation::kernel_basis(a).to_json(),
        kernel_transpose: foliation::kernel_basis_t(a).to_json(),
    };

    let system = match doc.system()? {
        Some(s) => s,
        None => LvSystem::with_unit_equilibrium(a.clone()),
    };
    let e = equilibria_set(&system);
    let equilibria = EquilibriaSummary {
        base: render_vector(&e.base),
        directions: e.directions.to_json(),
        interval: e
            .interval
            .map(|(lo, hi)| [lo.as_ref().map(render_rational), hi.as_ref().map(render_rational)]),
    };
    let simulation = match simulation {
        Some(req) => Some(simulate_summary(&system, &outcome, req)?),
        None => None,
    };

    Ok(AnalysisReport {
        input_sha256: digest(doc),
        n,
        graph: graph_summary,
        certification: outcome.to_json(),
        reduction,
        trim: trim.map(|t| t.to_json()),
        foliation_dimension: rank.exact,
        rank,
        kernels,
        equilibria,
        simulation,
        outcome,
    })
}

fn simulate_summary(
    system: &LvSystem,
    outcome: &CertifyOutcome,
    req: &SimulationRequest,
) -> Result<SimulationSummary> {
    let monitors = Monitors {
        certificate: outcome.certificate().cloned(),
        plane: req.plane.clone(),
        record_every: 1,
    };
    let traj = dynamics::integrate(system, &req.x0, req.t_final, req.step, &monitors)?;
    Ok(SimulationSummary {
        kind: "empirical",
        t_final: fmt17(req.t_final),
        step: fmt17(req.step),
        x0: req.x0.iter().map(|v| fmt17(*v)).collect(),
        x_final: traj.last_state().iter().map(|v| fmt17(*v)).collect(),
        max_relative_level_drift: fmt17(traj.max_relative_level_drift()),
        max_hdot: fmt17(traj.hdot.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        final_plane_residual: fmt17(*traj.dist.last().expect("nonempty")),
    })
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input sha256: {}", self.input_sha256);
        let _ = writeln!(s, "n: {}", self.n);
        if let Some(g) = &self.graph {
            let _ = writeln!(s, "black: {:?}", g.graph.black);
            let _ = writeln!(s, "edges: {:?}", g.graph.edges);
            let _ = writeln!(s, "strong links: {}", g.strong_links);
            let _ = writeln!(s, "every cycle has a strong link: {}", g.every_cycle_has_strong_link);
        }
        let _ = write!(s, "certification: {}", self.certification.outcome);
        if let Some(c) = &self.certification.certificate {
            let _ = write!(s, " c = ({})", c.join(", "));
        }
        if let Some(r) = &self.certification.reason {
            let _ = write!(s, " ({r})");
        }
        s.push('\n');
        if let Some(r) = &self.reduction {
            let _ = writeln!(s, "reduction (full): bullet {:?} cross {:?} circ {:?}", r.full.bullet, r.full.cross, r.full.circ);
            let _ = writeln!(s, "reduction (simplified): bullet {:?}", r.simplified.bullet);
            let _ = writeln!(s, "classification: {:?}", r.classification);
        }
        if let Some(t) = &self.trim {
            let _ = writeln!(s, "trim components: {:?} discarded {:?}", t.final_components, t.discarded);
        }
        let _ = write!(s, "rank: {}", self.rank.exact);
        if let Some(g) = self.rank.graph {
            let _ = write!(s, " (graph rank {g})");
        }
        s.push('\n');
        for v in &self.kernels.kernel {
            let _ = writeln!(s, "kernel: ({})", v.join(", "));
        }
        for v in &self.kernels.kernel_transpose {
            let _ = writeln!(s, "kernel of transpose: ({})", v.join(", "));
        }
        let _ = writeln!(s, "foliation dimension: {}", self.foliation_dimension);
        if let Some(sim) = &self.simulation {
            let _ = writeln!(s, "simulation (empirical): x(T) = ({})", sim.x_final.join(", "));
            let _ = writeln!(s, "  max relative level drift {}", sim.max_relative_level_drift);
            let _ = writeln!(s, "  final plane residual {}", sim.final_plane_residual);
        }
        s
    }
}
