use cosetc_core::complex::{
    build_ball, build_coned_off, build_extension_graph, clique_and_dimension_stats, edge_orbit_census, export_ball,
    export_extension, verify_witnesses, BallParams, ComplexBall, GraphExport,
};
use cosetc_core::oracles::{GroupSpec, Oracle};
use cosetc_core::qilab::{
    component_of, four_point_delta, malnormal_crosscheck, packing_radius, qi_chain, star_core, Report,
};
use cosetc_core::stallings::{height_exact_free, Height, DEFAULT_STATE_CAP};
use cosetc_core::words::DefiningGraph;
use cosetc_core::{Error, Result};
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig};

/// A named output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

enum Output {
    Graph(GraphExport),
    Report(Report),
}

fn params(c: &RunConfig, max_dim: usize) -> BallParams {
    BallParams { radius: c.radius(), max_dim, tau: None, caps: c.caps() }
}

fn defining_graph(c: &RunConfig) -> Result<&DefiningGraph> {
    match &c.spec.group {
        GroupSpec::Raag { graph } => Ok(graph),
        _ => Err(Error::Capability(format!("`{}` needs a raag pair", c.command))),
    }
}

fn labels(o: &Oracle, ball: &ComplexBall, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| o.format_coset(&ball.vertices[v])).collect()
}

fn report(c: &RunConfig, pair: &Value) -> Report {
    let mut r = Report::new(c.command.name(), pair.clone()).param("radius", c.radius());
    if c.command.needs_seed() {
        r.seed = c.seed;
    }
    r
}

/// Execute the configured command. Output depends only on the
/// configuration and the crate version.
pub fn run(c: &RunConfig) -> Result<Vec<Artifact>> {
    let o = c.oracle()?;
    let pair = serde_json::to_value(&c.spec).expect("spec serializes");
    let out = match c.command {
        Command::BuildComplex | Command::Ktau => {
            let mut p = params(c, c.max_dim());
            p.tau = c.tau;
            let ball = build_ball(&o, &p)?;
            verify_witnesses(&o, &ball)?;
            Output::Graph(export_ball(&o, &ball))
        }
        Command::ConedOff => {
            let s = c.relative_words(o.alphabet())?;
            Output::Graph(build_coned_off(&o, c.radius(), &s, c.extended(), &c.caps())?)
        }
        Command::ExtensionGraph => {
            let graph = defining_graph(c)?;
            let ext = build_extension_graph(graph, c.radius(), &c.caps())?;
            Output::Graph(export_extension(graph, o.alphabet(), pair, &ext))
        }
        Command::Height => Output::Report(height(c, &o, &pair)?),
        Command::WidthLowerBound => {
            let ball = build_ball(&o, &params(c, 1))?;
            let stats = clique_and_dimension_stats(&ball);
            let mut r = report(c, &pair);
            r.verdict = format!(">={}", stats.max_clique_cardinality);
            r.evidence.push(json!({
                "source": "ball",
                "vertex_count": stats.vertex_count,
                "edge_count": stats.edge_count,
                "max_clique_cardinality": stats.max_clique_cardinality,
                "clique": labels(&o, &ball, &stats.max_clique),
            }));
            Output::Report(r)
        }
        Command::Malnormal => Output::Report(malnormal(c, &o, &pair)?),
        Command::Core => {
            let core = star_core(defining_graph(c)?, c.samples(), c.seed())?;
            let mut r = report(c, &pair).param("samples", c.samples());
            let ok = core.records.iter().filter(|rec| rec.ok()).count();
            r.verdict = if ok == core.records.len() { "star-subgroups".into() } else { "violations".into() };
            let names: Vec<Vec<&str>> =
                core.subgroups.iter().map(|s| s.iter().map(|&v| o.alphabet().name(v)).collect()).collect();
            r.evidence.push(json!({ "subgroups": names, "records_ok": ok, "records": core.records.len() }));
            r.evidence.extend(core.records.iter().map(|rec| {
                json!({
                    "g": o.alphabet().format(&rec.g),
                    "generator": o.alphabet().name(rec.generator),
                    "slice_size": rec.slice_size,
                    "members_stabilize": [rec.members_stabilize, rec.members_tested],
                    "nonmembers_move": [rec.nonmembers_move, rec.nonmembers_tested],
                })
            }));
            Output::Report(r)
        }
        Command::Packing => {
            let ball = build_ball(&o, &params(c, c.max_dim()))?;
            let p = packing_radius(&o, &ball)?;
            let mut r = report(c, &pair).param("max_dim", c.max_dim());
            r.verdict = if p.exact { p.estimate.to_string() } else { format!("<={}", p.estimate) };
            r.evidence.push(json!({
                "exact": p.exact,
                "simplices": p.simplices,
                "worst": p.worst.as_ref().map(|s| labels(&o, &ball, s)),
            }));
            Output::Report(r)
        }
        Command::Fence => {
            let ball = build_ball(&o, &params(c, 1))?;
            let census = edge_orbit_census(&o, &ball)?;
            let mut r = report(c, &pair);
            r.verdict = census.fence.to_string();
            r.evidence.push(json!({ "exact": census.exact, "orbits": census.orbits.len(), "edges": ball.edges().len() }));
            r.evidence.extend(census.orbits.iter().map(|orbit| {
                json!({
                    "peripherals": [orbit.peripherals.0, orbit.peripherals.1],
                    "double_coset_rep": o.alphabet().format(&orbit.double_coset_rep),
                    "distance": orbit.distance,
                    "edge_count": orbit.edge_count,
                    "example": labels(&o, &ball, &[orbit.example.0, orbit.example.1]),
                })
            }));
            Output::Report(r)
        }
        Command::QiChain => {
            let q = qi_chain(defining_graph(c)?, c.radius(), c.samples(), c.seed(), &c.caps())?;
            let mut r = report(c, &pair).param("samples", c.samples());
            r.verdict = if q.consistent { "consistent".into() } else { "inconsistent".into() };
            r.evidence.push(serde_json::to_value(&q).expect("report serializes"));
            Output::Report(r)
        }
        Command::Delta => {
            let (graph, adj) = match &c.spec.group {
                GroupSpec::Raag { graph } => {
                    ("extension-graph", build_extension_graph(graph, c.radius(), &c.caps())?.adjacency())
                }
                _ => ("complex", build_ball(&o, &params(c, 1))?.adjacency()),
            };
            let (sub, _) = component_of(&adj, 0);
            let d = four_point_delta(&sub, c.seed())?;
            let mut r = report(c, &pair);
            r.verdict = d.delta.to_string();
            r.evidence.push(json!({ "graph": graph, "ball_vertices": adj.len(), "component": d }));
            Output::Report(r)
        }
    };
    let name = c.command.name();
    Ok(vec![match out {
        Output::Graph(g) => match c.format() {
            Format::Json => Artifact { name: format!("{name}.json"), contents: g.to_json() },
            Format::Dot => Artifact { name: format!("{name}.dot"), contents: g.to_dot() },
        },
        Output::Report(r) => Artifact { name: format!("{name}.json"), contents: r.to_json() },
    }])
}

fn height(c: &RunConfig, o: &Oracle, pair: &Value) -> Result<Report> {
    let ball = build_ball(o, &params(c, c.max_dim()))?;
    let stats = clique_and_dimension_stats(&ball);
    let seen = stats.max_simplex_cardinality;
    let mut r = report(c, pair).param("max_dim", c.max_dim());
    r.evidence.push(json!({
        "source": "ball",
        "max_simplex_cardinality": seen,
        "simplex": labels(o, &ball, &stats.max_simplex),
        "dimension_capped": stats.dimension_capped,
    }));
    r.verdict = match o.free_cores() {
        Some(cores) => {
            let cap = c.caps().max_dim + 1;
            match height_exact_free(cores, cap, DEFAULT_STATE_CAP)? {
                Height::Exact(h) => {
                    if seen > h {
                        return Err(Error::Witness(format!("ball has a simplex of {seen} cosets but the height is {h}")));
                    }
                    r.evidence.push(json!({ "source": "certificate", "height": h }));
                    h.to_string()
                }
                Height::ExceedsCap(k) => {
                    r.evidence.push(json!({ "source": "certificate", "exceeds": k }));
                    format!(">{k}")
                }
            }
        }
        None => format!(">={seen}"),
    };
    Ok(r)
}

fn malnormal(c: &RunConfig, o: &Oracle, pair: &Value) -> Result<Report> {
    let mut r = report(c, pair);
    if o.free_cores().is_some() {
        let m = malnormal_crosscheck(o, c.radius(), &c.caps())?;
        if !m.agree {
            return Err(Error::Witness(format!(
                "certificate says malnormal = {} but the ball has {} edges",
                m.certificate_malnormal, m.ball_edges
            )));
        }
        r.verdict = if m.certificate_malnormal { "malnormal".into() } else { "not-malnormal".into() };
        r.evidence.push(json!({
            "source": "certificate",
            "witness": m.witness.as_ref().map(|(i, j, g)| json!({ "i": i, "j": j, "g": o.alphabet().format(g) })),
        }));
        r.evidence.push(json!({ "source": "ball", "edges": m.ball_edges }));
        return Ok(r);
    }
    let ball = build_ball(o, &params(c, 1))?;
    let edges = ball.edges();
    r.verdict = if edges.is_empty() { "no-violation-within-radius".into() } else { "not-malnormal".into() };
    r.evidence.push(json!({
        "source": "ball",
        "edges": edges.len(),
        "example": edges.first().map(|e| labels(o, &ball, &e.vertices)),
    }));
    Ok(r)
}
