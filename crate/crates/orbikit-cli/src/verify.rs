//! Self-verification suites.  Each suite re-proves one library guarantee at
//! the requested shape with exhaustive or seeded-random checks and reports a
//! machine-readable summary; `all` runs whatever fits the size caps.

use std::collections::{BTreeMap, BTreeSet};

use orbikit::digraph::{self, Arc, Digraph, Node};
use orbikit::formulations::{
    compact_system, compact_vector, extended_system, extended_vector, from_compact, objective_on_x,
    to_compact, ExtendedPoint,
};
use orbikit::lifting::{lift, Flow};
use orbikit::linsys::Direction;
use orbikit::lp_oracle::{
    enumerate_integral_extended_points, enumerate_paths, enumerate_vertices, paths_between,
    simplex_max,
};
use orbikit::sci::{enumerate_scis, sci_system};
use orbikit::{
    index_set, optimize_packing, optimize_partitioning, rat, ratio, Cell, Error, Kind, OrbiMatrix,
    Params, Rational,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteArg {
    All,
    /// Flow-cut identities, exhaustive over paths and unit path flows.
    Cuts,
    /// LP optima over the flow system are attained by 0/1 points.
    Integrality,
    /// Integral flow-system points project exactly onto the vertices.
    Projection,
    /// Shifted-column cuts are valid, and their LP reaches the true optimum.
    Sci,
    /// The accumulated system is an equivalent reshaping of the flow system.
    Transform,
}

fn name_of(s: SuiteArg) -> &'static str {
    match s {
        SuiteArg::All => "all",
        SuiteArg::Cuts => "cuts",
        SuiteArg::Integrality => "integrality",
        SuiteArg::Projection => "projection",
        SuiteArg::Sci => "sci",
        SuiteArg::Transform => "transform",
    }
}

/// Largest p a suite accepts; enumeration cost explodes beyond these.
fn cap_of(s: SuiteArg) -> u32 {
    match s {
        SuiteArg::All => u32::MAX,
        SuiteArg::Sci => 6,
        _ => 5,
    }
}

#[derive(Serialize, Deserialize)]
pub struct Report {
    pub p: u32,
    pub q: u32,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub ok: bool,
}

#[derive(Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub status: String,
    pub checks: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_endpoints: Option<usize>,
}

/// Accumulates pass/fail checks, keeping only the first few failure messages.
struct Checker {
    checks: usize,
    failures: Vec<String>,
    dropped: usize,
}

impl Checker {
    fn new() -> Self {
        Checker {
            checks: 0,
            failures: Vec::new(),
            dropped: 0,
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            if self.failures.len() < 8 {
                self.failures.push(msg());
            } else {
                self.dropped += 1;
            }
        }
    }

    fn into_report(mut self, name: &str) -> SuiteReport {
        if self.dropped > 0 {
            self.failures
                .push(format!("... and {} more failures", self.dropped));
        }
        SuiteReport {
            name: name.to_string(),
            status: if self.failures.is_empty() {
                "ok"
            } else {
                "failed"
            }
            .to_string(),
            checks: self.checks,
            failures: self.failures,
            note: None,
            scis: None,
            vertices: None,
            integral_endpoints: None,
        }
    }
}

pub fn run(params: Params, suite: SuiteArg, seed: u64) -> Result<Report, Error> {
    let selected = match suite {
        SuiteArg::All => vec![
            SuiteArg::Cuts,
            SuiteArg::Integrality,
            SuiteArg::Projection,
            SuiteArg::Sci,
            SuiteArg::Transform,
        ],
        s => vec![s],
    };
    let explicit = suite != SuiteArg::All;
    let mut suites = Vec::new();
    for s in selected {
        let cap = cap_of(s);
        if params.p() > cap {
            if explicit {
                return Err(Error::SizeCap(format!(
                    "suite {} supports p <= {cap}, got p = {}",
                    name_of(s),
                    params.p()
                )));
            }
            suites.push(SuiteReport {
                name: name_of(s).to_string(),
                status: "skipped".to_string(),
                checks: 0,
                failures: Vec::new(),
                note: Some(format!("p = {} above the suite cap {cap}", params.p())),
                scis: None,
                vertices: None,
                integral_endpoints: None,
            });
            continue;
        }
        let rep = match s {
            SuiteArg::All => unreachable!("expanded above"),
            SuiteArg::Cuts => suite_cuts(params),
            SuiteArg::Integrality => suite_integrality(params, seed),
            SuiteArg::Projection => suite_projection(params),
            SuiteArg::Sci => suite_sci(params, seed),
            SuiteArg::Transform => suite_transform(params, seed),
        };
        match &rep.note {
            Some(note) => eprintln!("suite {}: {} — {note}", rep.name, rep.status),
            None => eprintln!("suite {}: {} ({} checks)", rep.name, rep.status, rep.checks),
        }
        suites.push(rep);
    }
    let ok = suites.iter().all(|s| s.status != "failed");
    Ok(Report {
        p: params.p(),
        q: params.q(),
        seed,
        suites,
        ok,
    })
}

fn random_objective(params: Params, rng: &mut ChaCha8Rng) -> OrbiMatrix {
    let entries: Vec<_> = index_set(params)
        .into_iter()
        .map(|c| ((c.i(), c.j()), rat(rng.gen_range(-9i64..=9))))
        .collect();
    OrbiMatrix::from_entries(params, entries).expect("cells are in range")
}

fn random_combo(params: Params, verts: &[OrbiMatrix], rng: &mut ChaCha8Rng) -> OrbiMatrix {
    let k = rng.gen_range(1..=4usize.min(verts.len()));
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
    let den: i64 = weights.iter().sum();
    let mut acc: BTreeMap<Cell, Rational> = BTreeMap::new();
    for w in weights {
        let v = &verts[rng.gen_range(0..verts.len())];
        for (c, val) in v.entries() {
            *acc.entry(c).or_insert_with(|| rat(0)) += ratio(w, den) * val;
        }
    }
    let entries = acc.into_iter().map(|(c, v)| ((c.i(), c.j()), v));
    OrbiMatrix::from_entries(params, entries).expect("cells are in range")
}

/// Exhaustive flow-cut identities: the diagonal inflow of an upper column
/// segment equals the flow through the row tail at its lower end; for a path
/// from the main diagonal, inflow minus vertical escape equals the tail flow;
/// for a path from column zero the same holds after adding one unit, and the
/// bare form holds exactly when every vertical arc stays in column zero.
fn suite_cuts(params: Params) -> SuiteReport {
    let mut ck = Checker::new();
    let g = Digraph::build(params);
    let flows: Vec<Flow> = enumerate_paths(params)
        .iter()
        .map(|p| Flow::unit_path(params, p))
        .collect();

    for cell in index_set(params) {
        let seg: BTreeSet<Node> = digraph::column_segment(params, cell)
            .into_iter()
            .map(Node::cell)
            .collect();
        let cut = g.cut_sets(&seg).diagonal_incoming;
        let tail = digraph::bar(params, cell);
        for y in &flows {
            ck.check(y.over(&cut) == y.through(&tail), || {
                format!("column cut at {cell} misses the tail flow")
            });
        }
    }

    for k in 1..=params.q() {
        for cell in index_set(params) {
            for path in paths_between(params, Node::grid(k, k), Node::cell(cell)) {
                let (s, t) = digraph::path_node_sets(params, &path);
                let din = g.cut_sets(&s).diagonal_incoming;
                let vout = g.cut_sets(&t).vertical_outgoing;
                let tail = digraph::bar(params, cell);
                for y in &flows {
                    ck.check(y.over(&din) - y.over(&vout) == y.through(&tail), || {
                        format!("diagonal-start cut ({k},{k}) to {cell} fails")
                    });
                }
            }
        }
    }

    for k in 0..params.p() {
        for cell in index_set(params) {
            for path in paths_between(params, Node::grid(k, 0), Node::cell(cell)) {
                let (s, t) = digraph::path_node_sets(params, &path);
                let din = g.cut_sets(&s).diagonal_incoming;
                let vout = g.cut_sets(&t).vertical_outgoing;
                let tail = digraph::bar(params, cell);
                let qualifying = path
                    .arcs(params)
                    .iter()
                    .all(|a| !matches!(a, Arc::Vertical { j, .. } if *j != 0));
                ck.check(qualifying == din.is_empty(), || {
                    format!("entry-cut emptiness mismatch ({k},0) to {cell}")
                });
                for y in &flows {
                    ck.check(
                        rat(1) + y.over(&din) - y.over(&vout) == y.through(&tail),
                        || format!("column-zero-start cut ({k},0) to {cell} fails"),
                    );
                    if qualifying {
                        ck.check(rat(1) - y.over(&vout) == y.through(&tail), || {
                            format!("bare column-zero cut ({k},0) to {cell} fails")
                        });
                    }
                }
            }
        }
    }
    ck.into_report("cuts")
}

/// Seeded LP runs over the flow system: the optimum equals the exact sweep
/// value and is attained by an enumerated 0/1 point; endpoint integrality is
/// counted, not asserted, since degenerate ties may stop elsewhere.
fn suite_integrality(params: Params, seed: u64) -> SuiteReport {
    let mut ck = Checker::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut endpoints = 0usize;
    for kind in [Kind::Packing, Kind::Partitioning] {
        let pts = enumerate_integral_extended_points(params, kind);
        for t in 0..20 {
            let d = random_objective(params, &mut rng);
            let dp = match kind {
                Kind::Packing => optimize_packing(&d).value,
                Kind::Partitioning => optimize_partitioning(&d).value,
            };
            let mut sys = extended_system(params, kind);
            let coeffs = objective_on_x(&sys, &d);
            sys.set_objective(Direction::Maximize, coeffs);
            match simplex_max(&sys) {
                Ok(res) => {
                    ck.check(res.value == dp, || {
                        format!(
                            "{kind} LP value {} != sweep value {dp} (run {t})",
                            res.value
                        )
                    });
                    if res.point.iter().all(|v| *v == rat(0) || *v == rat(1)) {
                        endpoints += 1;
                    }
                    ck.check(pts.iter().any(|pt| d.dot(&pt.x) == dp), || {
                        format!("{kind} optimum unreached by 0/1 points (run {t})")
                    });
                }
                Err(e) => ck.check(false, || format!("{kind} LP failed: {e} (run {t})")),
            }
        }
    }
    let mut rep = ck.into_report("integrality");
    rep.integral_endpoints = Some(endpoints);
    rep.note = Some(format!("{endpoints}/40 LP endpoints integral"));
    rep
}

/// Exhaustive projection: x-parts of integral flow-system points coincide
/// with the vertex set, in both directions.
fn suite_projection(params: Params) -> SuiteReport {
    let mut ck = Checker::new();
    for kind in [Kind::Packing, Kind::Partitioning] {
        let xs: BTreeSet<Vec<Cell>> = enumerate_integral_extended_points(params, kind)
            .iter()
            .map(|pt| pt.x.support())
            .collect();
        let vs: BTreeSet<Vec<Cell>> = enumerate_vertices(params, kind)
            .iter()
            .map(|v| v.support())
            .collect();
        for x in &xs {
            ck.check(vs.contains(x), || {
                format!("{kind} projection {x:?} is not a vertex")
            });
        }
        for v in &vs {
            ck.check(xs.contains(v), || {
                format!("{kind} vertex {v:?} has no integral lift")
            });
        }
    }
    ck.into_report("projection")
}

/// Shifted-column cuts: every enumerated cut is valid at every vertex, and
/// the cut LP reproduces the exact optimum on seeded objectives.
fn suite_sci(params: Params, seed: u64) -> SuiteReport {
    let mut ck = Checker::new();
    let scis = match enumerate_scis(params, Some(1_000_000)) {
        Ok(s) => s,
        Err(e) => {
            ck.check(false, || format!("cut enumeration failed: {e}"));
            return ck.into_report("sci");
        }
    };
    let verts = enumerate_vertices(params, Kind::Packing);
    for sci in &scis {
        for v in &verts {
            ck.check(sci.holds(v), || {
                format!("cut with bar at {} rejects a vertex", sci.bar)
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    for t in 0..10 {
        let d = random_objective(params, &mut rng);
        let dp = optimize_packing(&d).value;
        let mut sys = match sci_system(params, Kind::Packing, Some(1_000_000)) {
            Ok(s) => s,
            Err(e) => {
                ck.check(false, || format!("cut system build failed: {e}"));
                break;
            }
        };
        let coeffs = objective_on_x(&sys, &d);
        sys.set_objective(Direction::Maximize, coeffs);
        match simplex_max(&sys) {
            Ok(res) => ck.check(res.value == dp, || {
                format!("cut LP value {} != sweep value {dp} (run {t})", res.value)
            }),
            Err(e) => ck.check(false, || format!("cut LP failed: {e} (run {t})")),
        }
    }
    let label = if scis.len() == 1 { "SCI" } else { "SCIs" };
    let mut rep = ck.into_report("sci");
    rep.note = Some(format!(
        "{} {label} checked against {} vertices",
        scis.len(),
        verts.len()
    ));
    rep.scis = Some(scis.len());
    rep.vertices = Some(verts.len());
    rep
}

/// The accumulated system: round trips with the flow system on all integral
/// points and on seeded fractional combinations, preserving feasibility both
/// ways, with the documented size bounds at this shape.
fn suite_transform(params: Params, seed: u64) -> SuiteReport {
    let mut ck = Checker::new();
    for kind in [Kind::Packing, Kind::Partitioning] {
        let esys = extended_system(params, kind);
        let csys = compact_system(params, kind);
        let pts = enumerate_integral_extended_points(params, kind);
        let mut images: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for pt in &pts {
            let c = to_compact(pt);
            let cv = compact_vector(&csys, &c);
            ck.check(csys.is_feasible(&cv), || {
                format!("{kind} accumulated image is infeasible")
            });
            let back = from_compact(&c);
            ck.check(back == *pt, || format!("{kind} round trip moved a point"));
            ck.check(esys.is_feasible(&extended_vector(&esys, &back)), || {
                format!("{kind} returned point is infeasible")
            });
            images.insert(cv);
        }
        ck.check(images.len() == pts.len(), || {
            format!("{kind} transform is not injective")
        });
    }

    let verts = enumerate_vertices(params, Kind::Packing);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    for t in 0..10 {
        let x = random_combo(params, &verts, &mut rng);
        let y = match lift(&x) {
            Ok(y) => y,
            Err(e) => {
                ck.check(false, || format!("lift failed on combo {t}: {e}"));
                continue;
            }
        };
        let pt = ExtendedPoint::new(x, y).expect("lift output is well-formed");
        let back = from_compact(&to_compact(&pt));
        ck.check(back == pt, || {
            format!("fractional round trip moved combo {t}")
        });
    }

    if params.q() >= 2 {
        let bound = (params.p() * params.q()) as usize;
        let stats = compact_system(params, Kind::Packing).stats();
        ck.check(stats.vars < 2 * bound, || {
            format!("vars {} reach 2pq = {}", stats.vars, 2 * bound)
        });
        ck.check(stats.rows_main < 4 * bound, || {
            format!("rows {} reach 4pq = {}", stats.rows_main, 4 * bound)
        });
        ck.check(stats.nonzeros < 10 * bound, || {
            format!("nonzeros {} reach 10pq = {}", stats.nonzeros, 10 * bound)
        });
    }
    ck.into_report("transform")
}
