//! The subcommands as pure functions from a loaded instance to JSON or CSV text.

use std::collections::BTreeMap;

use cics_core::curve::{dominance_1st_witness, dominance_2nd_witness};
use cics_core::select::grab_probabilities;
use cics_core::variants::{PboiBox, PbpiAction};
use cics_core::{
    apply_commitment, brute_force_opt, commitment_gap, enumerate_commitments, index_policy_value, local_approx_factor,
    mdp_curve, mdp_surrogate, semilocal_compose, water_fill, Chain, Commitment, Dist, Mdp, Method, Mode,
};
use serde_json::{json, Value};

use crate::canon;
use crate::error::CliError;
use crate::schema::{Alternative, Loaded, Variant};

type Result<T> = std::result::Result<T, CliError>;

fn dist_json(d: &Dist) -> Value {
    Value::Array(d.atoms().map(|(v, p)| json!([v, p])).collect())
}

/// `null` for non-finite values, which JSON cannot carry.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn method_json(m: Method) -> Value {
    match m {
        Method::Exact => json!("exact"),
        Method::MonteCarlo { seed, reps } => json!({"monte_carlo": {"seed": seed, "reps": reps}}),
    }
}

/// Parses `seed,reps`.
///
/// # Errors
///
/// Anything other than two comma-separated integers with `reps > 0`.
pub fn parse_mc(spec: &str) -> Result<Method> {
    let bad = || CliError::parse(format!("expected SEED,REPS, got {spec:?}"));
    let (s, r) = spec.split_once(',').ok_or_else(bad)?;
    let seed = s.trim().parse().map_err(|_| bad())?;
    let reps: u64 = r.trim().parse().map_err(|_| bad())?;
    if reps == 0 {
        return Err(bad());
    }
    Ok(Method::MonteCarlo { seed, reps })
}

/// Parses `BETA,P` for the semilocal check.
///
/// # Errors
///
/// Anything other than two comma-separated numbers.
pub fn parse_pair(spec: &str) -> Result<(f64, f64)> {
    let bad = || CliError::parse(format!("expected two comma-separated numbers, got {spec:?}"));
    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Index of an alternative in the local game: the smallest (min) or largest (max)
/// surrogate value, which is the root water level for chains.
fn root_index(w: &Dist, mode: Mode) -> f64 {
    match mode {
        Mode::Min => w.min(),
        Mode::Max => w.max(),
    }
}

/// `index`: root index and variant scalars per alternative.
///
/// # Errors
///
/// A malformed surrogate curve or a variant-specific failure.
pub fn index(l: &Loaded) -> Result<Value> {
    let mode = l.mode();
    let mut out = Vec::new();
    for (i, alt) in l.alternatives.iter().enumerate() {
        // The weighing-scale surrogate has a closed form; its full tree may be huge.
        let w = match &alt.variant {
            Variant::Ws(a) => a.surrogate_reference(),
            _ => mdp_surrogate(&alt.mdp()?, mode)?,
        };
        let mut obj = json!({
            "alt": i,
            "type": l.file.alternatives[i].kind(),
            "index": root_index(&w, mode),
        });
        let extra = match &alt.variant {
            Variant::Mdp => json!({}),
            Variant::Pb { .. } => json!({"g": root_index(&w, mode)}),
            Variant::Pbpi(b) => {
                let c = b.commit();
                json!({
                    "g_open": num(b.g_open()),
                    "g_peek": num(b.g_peek()),
                    "commit": match c.action { PbpiAction::Open => "open", PbpiAction::Peek => "peek" },
                    "nontrivial": b.is_nontrivial(),
                })
            }
            Variant::Additive(b) => {
                let s = b.static_commit()?;
                json!({"static_ordering": s.ordering, "static_index": s.index})
            }
            Variant::Ws(a) => {
                let p = a.params();
                json!({"mu": p.mu, "median": p.median, "g": p.g, "h": p.h, "kappa": p.kappa.map_or(Value::Null, num)})
            }
            Variant::Pboi(b) => {
                let p = b.params();
                json!({"mu": p.mu, "g": p.g, "h": p.h, "degenerate": b.is_degenerate()})
            }
        };
        obj.as_object_mut()
            .expect("object")
            .extend(extra.as_object().expect("object").clone());
        out.push(obj);
    }
    Ok(json!({"alternatives": out}))
}

/// `curve`: CSV table `y,f,slope` of the optimality curve at its breakpoints, with the
/// slope to the right of each breakpoint.
///
/// # Errors
///
/// An alternative index out of range.
pub fn curve_csv(l: &Loaded, alt: usize) -> Result<String> {
    let f = mdp_curve(&l.alternative(alt)?.mdp()?, l.mode());
    let mut s = String::from("y,f,slope\n");
    for (y, slope) in f.breakpoints() {
        s.push_str(&format!(
            "{},{},{}\n",
            canon::number(y),
            canon::number(f.eval(y)),
            canon::number(slope)
        ));
    }
    Ok(s)
}

/// `surrogate`: atoms of the surrogate distribution.
///
/// # Errors
///
/// An alternative index out of range or a malformed curve.
pub fn surrogate(l: &Loaded, alt: usize) -> Result<Value> {
    Ok(dist_json(&mdp_surrogate(&l.alternative(alt)?.mdp()?, l.mode())?))
}

/// A committed chain and a JSON description of the commitment.
struct Committed {
    chain: Chain,
    describe: Value,
}

fn labelled(mdp: &Mdp, pi: &Commitment) -> Result<Committed> {
    Ok(Committed {
        chain: apply_commitment(mdp, pi)?,
        describe: json!(pi.describe(mdp)),
    })
}

/// Default commitment rule of each variant. General MDPs take the deterministic
/// commitment with the best local approximation factor (first on ties).
fn default_commit(alt: &Alternative, mode: Mode, beta: f64) -> Result<Committed> {
    if let Variant::Ws(a) = &alt.variant {
        let h = a.commit();
        return Ok(Committed {
            describe: json!({"halving_thresholds": h.thresholds}),
            chain: h.chain,
        });
    }
    let mdp = &alt.mdp()?;
    match &alt.variant {
        Variant::Mdp => {
            if let Some(chain) = alt.as_chain() {
                return Ok(Committed {
                    describe: json!(Commitment::trivial(mdp).describe(mdp)),
                    chain,
                });
            }
            let w = mdp_surrogate(mdp, mode)?;
            let mut best: Option<(f64, Committed)> = None;
            for pi in enumerate_commitments(mdp)? {
                let c = labelled(mdp, &pi)?;
                let a = local_approx_factor(&water_fill(&c.chain, mode).surrogate, &w, mode)?;
                if best.as_ref().is_none_or(|(b, _)| mode.better(a, *b)) {
                    best = Some((a, c));
                }
            }
            Ok(best.expect("every MDP has a commitment").1)
        }
        Variant::Pb { .. } => labelled(mdp, &Commitment::trivial(mdp)),
        Variant::Pbpi(b) => labelled(mdp, &b.commitment(mdp, b.commit().action)),
        Variant::Additive(b) => {
            let s = b.static_commit()?;
            let (m, probes) = b.build_indexed()?;
            let pi = b.static_commitment(&m, &probes, &s.ordering);
            Ok(Committed {
                chain: apply_commitment(&m, &pi)?,
                describe: json!({"static_ordering": s.ordering}),
            })
        }
        Variant::Ws(_) => unreachable!("handled above"),
        Variant::Pboi(b) => {
            // Grab with the rule's probability, open otherwise.
            let p = b.semilocal_rule(beta).p;
            let pi = Commitment::randomized(
                (0..mdp.len())
                    .map(|id| (id == mdp.root()).then(|| vec![p, 1.0 - p]))
                    .collect(),
            );
            labelled(mdp, &pi)
        }
    }
}

/// Commitment from a node-id to label map; unlisted decision nodes take their first
/// action.
fn explicit_commit(mdp: &Mdp, spec: &serde_json::Map<String, Value>) -> Result<Commitment> {
    let mut picks: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, v) in spec {
        let id: usize = k
            .parse()
            .map_err(|_| CliError::parse(format!("node id {k:?} is not an integer")))?;
        let label = v
            .as_str()
            .ok_or_else(|| CliError::parse(format!("node {id}: label must be a string")))?;
        if id >= mdp.len() {
            return Err(CliError::domain(format!("node {id} out of range")));
        }
        let pos = mdp
            .node(id)
            .actions()
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| CliError::domain(format!("node {id} has no action {label:?}")))?;
        picks.insert(id, pos);
    }
    Ok(Commitment::from_fn(mdp, |id| picks.get(&id).copied().unwrap_or(0)))
}

fn commitments(l: &Loaded, spec: Option<&str>, beta: f64) -> Result<Vec<Committed>> {
    let mode = l.mode();
    let entries: Vec<Value> = match spec {
        None => vec![json!("rule"); l.alternatives.len()],
        Some(text) => {
            let v: Value = serde_json::from_str(text).map_err(|e| CliError::parse(format!("--commit: {e}")))?;
            match v {
                Value::Array(a) if a.len() == l.alternatives.len() => a,
                _ => {
                    return Err(CliError::parse(format!(
                        "--commit must be an array with one entry per alternative ({})",
                        l.alternatives.len()
                    )))
                }
            }
        }
    };
    l.alternatives
        .iter()
        .zip(entries)
        .enumerate()
        .map(|(i, (alt, e))| match e {
            Value::String(s) if s == "rule" => default_commit(alt, mode, beta),
            Value::Object(map) => {
                let mdp = alt.mdp()?;
                labelled(&mdp, &explicit_commit(&mdp, &map)?)
            }
            other => Err(CliError::parse(format!(
                "--commit entry {i}: expected \"rule\" or an object, got {other}"
            ))),
        })
        .collect()
}

/// `eval`: index-policy value under the given or default commitments.
///
/// # Errors
///
/// Malformed commitment specs or an index-policy cap.
pub fn eval(l: &Loaded, commit: Option<&str>, method: Method, beta: f64) -> Result<Value> {
    let cs = commitments(l, commit, beta)?;
    let chains: Vec<Chain> = cs.iter().map(|c| c.chain.clone()).collect();
    let value = index_policy_value(&chains, &l.matroid, l.mode(), method)?;
    Ok(json!({
        "value": num(value),
        "method": method_json(method),
        "commitments": cs.into_iter().map(|c| c.describe).collect::<Vec<_>>(),
    }))
}

/// `opt`: brute-force optimum and the first optimal move.
///
/// # Errors
///
/// The brute-force state cap.
pub fn opt(l: &Loaded) -> Result<Value> {
    let r = brute_force_opt(&l.instance()?)?;
    Ok(json!({"value": num(r.value), "root_action": r.root_action}))
}

/// `gap`: commitment gap and the best deterministic tuple.
///
/// # Errors
///
/// Tuple or state caps.
pub fn gap(l: &Loaded) -> Result<Value> {
    let inst = l.instance()?;
    let r = commitment_gap(&inst)?;
    let best: Vec<Value> = r
        .best
        .iter()
        .zip(&inst.mdps)
        .map(|(pi, m)| json!(pi.describe(m)))
        .collect();
    Ok(json!({"opt": num(r.opt), "committed": num(r.committed), "gap": num(r.gap), "best": best}))
}

/// Which approximation notion `verify` checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    Local,
    Pointwise,
    Semilocal { beta: f64, p: f64 },
}

/// `verify`: checks the committed surrogate of one alternative against its surrogate
/// scaled by `alpha`, returning a witness `y` (local, semilocal) or quantile level `q`
/// (pointwise) on failure.
///
/// # Errors
///
/// Semilocal checks on non-optional-inspection alternatives, bad indices or commitments.
pub fn verify(l: &Loaded, alt: usize, alpha: f64, check: Check, commit: Option<&str>, beta: f64) -> Result<Value> {
    let a = l.alternative(alt)?;
    let mode = l.mode();
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(CliError::domain(format!("alpha must be positive, got {alpha}")));
    }
    let (name, witness) = match check {
        Check::Semilocal { beta, p } => {
            let Variant::Pboi(b) = &a.variant else {
                return Err(CliError::domain(
                    "the semilocal check needs an optional-inspection (pboi) alternative",
                ));
            };
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::domain(format!("grab probability {p} outside [0, 1]")));
            }
            ("semilocal", b.semilocal_witness(p, alpha, beta))
        }
        Check::Local | Check::Pointwise => {
            let cs = commitments(l, commit, beta)?;
            let c = cs.into_iter().nth(alt).expect("one commitment per alternative");
            let w_pi = water_fill(&c.chain, mode).surrogate;
            let scaled = mdp_surrogate(&a.mdp()?, mode)?.scale(alpha);
            if check == Check::Local {
                ("local", dominance_2nd_witness(&w_pi, &scaled, mode))
            } else {
                let q = match mode {
                    Mode::Min => dominance_1st_witness(&w_pi, &scaled),
                    Mode::Max => dominance_1st_witness(&scaled, &w_pi),
                };
                ("pointwise", q)
            }
        }
    };
    let key = if name == "pointwise" { "witness_q" } else { "witness_y" };
    Ok(json!({
        "alt": alt,
        "check": name,
        "alpha": alpha,
        "pass": witness.is_none(),
        key: witness.map_or(Value::Null, num),
    }))
}

/// `compose-semilocal`: value of the randomized grab-or-open composition with
/// rule-derived grab probabilities.
///
/// # Errors
///
/// Non-pboi alternatives, min-mode instances, or caps.
pub fn compose_semilocal(l: &Loaded, beta: f64, method: Method) -> Result<Value> {
    if l.mode() != Mode::Max {
        return Err(CliError::domain("compose-semilocal needs a max-mode instance"));
    }
    let boxes: Vec<PboiBox> = l
        .alternatives
        .iter()
        .enumerate()
        .map(|(i, a)| match &a.variant {
            Variant::Pboi(b) => Ok(b.clone()),
            _ => Err(CliError::domain(format!(
                "alternative {i} is not an optional-inspection (pboi) box"
            ))),
        })
        .collect::<Result<_>>()?;
    let probs = grab_probabilities(&boxes, beta);
    let alphas: Vec<f64> = boxes.iter().map(|b| b.semilocal_rule(beta).alpha).collect();
    let value = semilocal_compose(&boxes, &l.matroid, &probs, method)?;
    Ok(json!({
        "value": num(value),
        "beta": beta,
        "probabilities": probs,
        "alphas": alphas,
        "method": method_json(method),
    }))
}
