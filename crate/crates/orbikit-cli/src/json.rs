//! JSON readers and writers for every subcommand.  Each writer here has a
//! matching reader so any output the binary produces can be fed back in.

use std::fs;
use std::path::Path;

use orbikit::lifting::Flow;
use orbikit::linsys::{Direction, LinearSystem, Sense};
use orbikit::sci::SCInequality;
use orbikit::{parse_rational, Error, OrbiMatrix, Params};
use serde::{Deserialize, Serialize};

fn bad_json(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Objective input: the matrix format with every field optional, so `{}` and
/// an empty file both mean the zero objective.  A stated shape must match
/// the command-line flags.
#[derive(Deserialize)]
struct ObjectiveRepr {
    p: Option<u32>,
    q: Option<u32>,
    #[serde(default)]
    entries: Vec<EntryRepr>,
}

#[derive(Deserialize)]
struct EntryRepr {
    i: u32,
    j: u32,
    v: String,
}

fn check_shape(params: Params, p: Option<u32>, q: Option<u32>) -> Result<(), Error> {
    let stated = (p.unwrap_or(params.p()), q.unwrap_or(params.q()));
    if stated != (params.p(), params.q()) {
        return Err(Error::InvalidInput(format!(
            "input is for a {}x{} matrix but the flags say {}x{}",
            stated.0,
            stated.1,
            params.p(),
            params.q()
        )));
    }
    Ok(())
}

pub fn parse_objective(params: Params, text: &str) -> Result<OrbiMatrix, Error> {
    if text.trim().is_empty() {
        return Ok(OrbiMatrix::zero(params));
    }
    let repr: ObjectiveRepr = serde_json::from_str(text).map_err(bad_json)?;
    check_shape(params, repr.p, repr.q)?;
    let entries = repr
        .entries
        .iter()
        .map(|e| Ok(((e.i, e.j), parse_rational(&e.v)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    OrbiMatrix::from_entries(params, entries)
}

pub fn read_objective(params: Params, path: Option<&Path>) -> Result<OrbiMatrix, Error> {
    match path {
        None => Ok(OrbiMatrix::zero(params)),
        Some(p) => parse_objective(params, &fs::read_to_string(p)?),
    }
}

/// Strict matrix input for `lift` and `separate`: the full serialized form,
/// shape-checked against the flags.
pub fn read_matrix(params: Params, path: &Path) -> Result<OrbiMatrix, Error> {
    let text = fs::read_to_string(path)?;
    let x: OrbiMatrix = serde_json::from_str(&text).map_err(bad_json)?;
    if x.params() != params {
        return Err(Error::InvalidInput(format!(
            "input is for a {}x{} matrix but the flags say {}x{}",
            x.params().p(),
            x.params().q(),
            params.p(),
            params.q()
        )));
    }
    Ok(x)
}

pub fn lift_to_json(x: &OrbiMatrix, y: &Flow) -> String {
    let flow: serde_json::Value =
        serde_json::from_str(&y.to_json()).expect("flow JSON is well-formed");
    let v = serde_json::json!({ "x": x, "y": flow });
    serde_json::to_string_pretty(&v).expect("lift serialization cannot fail") + "\n"
}

pub fn parse_lift(params: Params, text: &str) -> Result<(OrbiMatrix, Flow), Error> {
    #[derive(Deserialize)]
    struct LiftRepr {
        x: OrbiMatrix,
        y: serde_json::Value,
    }
    let repr: LiftRepr = serde_json::from_str(text).map_err(bad_json)?;
    let y = Flow::from_json(params, &repr.y.to_string())?;
    Ok((repr.x, y))
}

pub fn separation_to_json(cut: Option<&SCInequality>) -> String {
    let v = serde_json::json!({ "cut": cut });
    serde_json::to_string_pretty(&v).expect("cut serialization cannot fail") + "\n"
}

pub fn parse_separation(text: &str) -> Result<Option<SCInequality>, Error> {
    #[derive(Deserialize)]
    struct SepRepr {
        cut: Option<SCInequality>,
    }
    Ok(serde_json::from_str::<SepRepr>(text).map_err(bad_json)?.cut)
}

/// The optimizer's output, as read back: exact value, sparse vertex, path.
#[derive(Serialize, Deserialize)]
pub struct OptResultRepr {
    pub value: String,
    pub x: OrbiMatrix,
    pub path: Vec<String>,
}

pub fn parse_opt_result(text: &str) -> Result<OptResultRepr, Error> {
    let repr: OptResultRepr = serde_json::from_str(text).map_err(bad_json)?;
    parse_rational(&repr.value)?;
    Ok(repr)
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    name: String,
    vars: Vec<String>,
    constraints: Vec<RowRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<ObjRepr>,
}

#[derive(Serialize, Deserialize)]
struct RowRepr {
    name: String,
    terms: Vec<TermRepr>,
    sense: String,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    var: String,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct ObjRepr {
    direction: String,
    terms: Vec<TermRepr>,
}

fn terms_of(sys: &LinearSystem, coeffs: &[(usize, orbikit::Rational)]) -> Vec<TermRepr> {
    coeffs
        .iter()
        .map(|(idx, c)| TermRepr {
            var: sys.vars()[*idx].clone(),
            coeff: c.to_string(),
        })
        .collect()
}

pub fn system_to_json(sys: &LinearSystem) -> String {
    let repr = SystemRepr {
        name: sys.name().to_string(),
        vars: sys.vars().to_vec(),
        constraints: sys
            .constraints()
            .iter()
            .map(|c| RowRepr {
                name: c.name.clone(),
                terms: terms_of(sys, &c.coeffs),
                sense: c.sense.to_string(),
                rhs: c.rhs.to_string(),
            })
            .collect(),
        objective: sys.objective().map(|o| ObjRepr {
            direction: match o.direction {
                Direction::Maximize => "maximize".into(),
                Direction::Minimize => "minimize".into(),
            },
            terms: terms_of(sys, &o.coeffs),
        }),
    };
    serde_json::to_string_pretty(&repr).expect("system serialization cannot fail") + "\n"
}

pub fn system_from_json(text: &str) -> Result<LinearSystem, Error> {
    let repr: SystemRepr = serde_json::from_str(text).map_err(bad_json)?;
    let mut sys = LinearSystem::new(repr.name);
    for v in &repr.vars {
        sys.add_var(v.clone());
    }
    let lookup = |sys: &LinearSystem, terms: &[TermRepr]| {
        terms
            .iter()
            .map(|t| {
                let idx = sys
                    .var_index(&t.var)
                    .ok_or_else(|| Error::Parse(format!("unknown variable {:?}", t.var)))?;
                Ok((idx, parse_rational(&t.coeff)?))
            })
            .collect::<Result<Vec<_>, Error>>()
    };
    for row in &repr.constraints {
        let sense = match row.sense.as_str() {
            "<=" => Sense::Le,
            "=" => Sense::Eq,
            ">=" => Sense::Ge,
            other => return Err(Error::Parse(format!("unknown sense {other:?}"))),
        };
        let coeffs = lookup(&sys, &row.terms)?;
        sys.add_constraint(row.name.clone(), coeffs, sense, parse_rational(&row.rhs)?);
    }
    if let Some(obj) = &repr.objective {
        let direction = match obj.direction.as_str() {
            "maximize" => Direction::Maximize,
            "minimize" => Direction::Minimize,
            other => return Err(Error::Parse(format!("unknown direction {other:?}"))),
        };
        let coeffs = lookup(&sys, &obj.terms)?;
        sys.set_objective(direction, coeffs);
    }
    Ok(sys)
}
