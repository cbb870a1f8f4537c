use std::cmp::Ordering;
use std::path::Path;

use pvlab_core::counting::{
    brute_force_j, count_j, diagonal_count, loglog_slope, lower_bound_exponent, regime_analysis, upper_bound_exponent,
    CountConfig,
};
use pvlab_core::exact::{int, parse_rational, ratio};
use pvlab_core::expsum::{
    box_lower_probe, implied_exponent, quadrature_moment, ExpSumSpec, GridSpec, MomentMethod, QuadConfig,
};
use pvlab_core::numerology::{
    ball_inflation_constraints, contradiction_scan, critical_exponent_table, eta, lambda0, max_admissible_u,
    series_sums, EtaParams, NumerologyReport, ScanConfig,
};
use pvlab_core::seeding::task_rng;
use pvlab_core::transversality::{
    appendix_lemma_checks, bl_condition_check, full_collection, square_transversality_probe, verify_conjecture_samples,
    MinorCertificate, PointConfig, RankDrop, Subspace,
};
use pvlab_core::{LabError, MonomialSystem, Poly, Rational};
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::report::{exact, exact_int, exact_list, exact_rationals, quadrature, sampled, sampled_list, validate};

/// Payload of one command before it is wrapped into a report.
pub struct Output {
    pub results: Value,
    pub flags: Map<String, Value>,
    pub extra_timing: Map<String, Value>,
}

impl Output {
    fn new(results: Value) -> Self {
        Output {
            results,
            flags: Map::new(),
            extra_timing: Map::new(),
        }
    }

    fn flag(mut self, key: &str, v: bool) -> Self {
        self.flags.insert(key.into(), json!(v));
        self
    }
}

pub struct Context {
    pub seed: u64,
    pub mem_cap: u64,
    pub threads: usize,
}

type Res<T> = pvlab_core::Result<T>;

fn rational(name: &str, text: &str) -> Res<Rational> {
    parse_rational(text).map_err(|e| match e {
        LabError::Parameter(m) => LabError::param(format!("--{name}: {m}")),
        other => other,
    })
}

fn rational_list(name: &str, text: &str) -> Res<Vec<Rational>> {
    text.split(',').map(|t| rational(name, t.trim())).collect()
}

fn int_list<T: std::str::FromStr>(name: &str, text: &str) -> Res<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| LabError::param(format!("--{name}: not an integer: {t:?}")))
        })
        .collect()
}

/// `6`, `2..6` (inclusive) or `2,3,5`.
pub fn parse_n_values(text: &str) -> Res<Vec<u64>> {
    let values = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| LabError::param("--N: bad range start"))?;
        let b: u64 = b.trim().parse().map_err(|_| LabError::param("--N: bad range end"))?;
        if a > b {
            return Err(LabError::param("--N: empty range"));
        }
        (a..=b).collect()
    } else {
        int_list("N", text)?
    };
    if values.iter().any(|&n| n < 1) {
        return Err(LabError::param("--N: values must be >= 1"));
    }
    Ok(values)
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> Res<Output> {
    match cmd {
        Command::Count(a) => count(a, ctx),
        Command::Sums(SumsCommand::Moment(a)) => moment(a, ctx),
        Command::Sums(SumsCommand::Probe(a)) => probe(a, ctx),
        Command::Numerology(NumerologyCommand::Report(a)) => numerology_report(a),
        Command::Numerology(NumerologyCommand::Scan(a)) => scan(a),
        Command::Numerology(NumerologyCommand::Ball(a)) => ball(a),
        Command::Numerology(NumerologyCommand::Table) => table(),
        Command::Transversality(TransversalityCommand::Conjecture(a)) => conjecture(a, ctx),
        Command::Transversality(TransversalityCommand::Appendix(a)) => appendix(a, ctx),
        Command::Transversality(TransversalityCommand::Bl(a)) => bl(a, ctx),
        Command::Transversality(TransversalityCommand::Squares(a)) => squares(a, ctx),
        Command::Report(ReportCommand::Bounds(a)) => bounds(a),
        Command::Report(ReportCommand::Validate(a)) => validate_file(&a.file),
    }
}

fn count(a: &CountArgs, ctx: &Context) -> Res<Output> {
    let sys = if a.linear {
        MonomialSystem::linear_fixture()
    } else {
        MonomialSystem::new(a.d.expect("clap requires d"), a.k.expect("clap requires k"))?
    };
    let ns = parse_n_values(&a.n)?;
    let mut cfg = CountConfig {
        mem_cap_bytes: ctx.mem_cap,
        split: a.split,
        shards: ctx.threads.max(1),
        ..CountConfig::default()
    };
    if let Some(cap) = a.enum_cap {
        cfg.enum_cap = cap;
    }
    let mut rows = Vec::new();
    let mut seconds = Vec::new();
    let mut points = Vec::new();
    for &n in &ns {
        let res = match a.method {
            CountMethod::Mitm => count_j(&sys, a.s, n, &cfg)?,
            CountMethod::Brute => brute_force_j(&sys, a.s, n, &cfg)?,
        };
        rows.push(json!({
            "N": exact_int(n),
            "J": exact_int(&res.j),
            "diagonal": exact_int(diagonal_count(sys.d(), a.s, n)),
        }));
        seconds.push(json!(res.elapsed.as_secs_f64()));
        points.push((n, res.j));
    }
    let method = match a.method {
        CountMethod::Mitm => "mitm",
        CountMethod::Brute => "brute",
    };
    let mut results = json!({
        "system": sys.to_string(),
        "d": exact_int(sys.d()),
        "k": exact_int(sys.k()),
        "s": exact_int(a.s),
        "method": method,
        "rows": rows,
    });
    if points.len() == 1 {
        results["N"] = exact_int(points[0].0);
        results["J"] = exact_int(&points[0].1);
    }
    if let Some(slope) = loglog_slope(&points) {
        results["loglog_slope"] = sampled(slope);
    }
    let mut out = Output::new(results).flag("exact", true);
    out.extra_timing.insert("per_N".into(), Value::Array(seconds));
    Ok(out)
}

fn moment(a: &MomentArgs, ctx: &Context) -> Res<Output> {
    let sys = MonomialSystem::new(a.d, a.k)?;
    let spec = ExpSumSpec::ones(sys.clone(), a.n)?;
    let grid = if a.grid == "auto" {
        GridSpec::adequate(&sys, a.n, a.p)
    } else {
        GridSpec::new(int_list("grid", &a.grid)?)?
    };
    let mut cfg = QuadConfig {
        method: match a.method {
            QuadMethod::Auto => MomentMethod::Auto,
            QuadMethod::Direct => MomentMethod::Direct,
            QuadMethod::Fft => MomentMethod::Fft,
        },
        fallback_samples: a.samples,
        seed: ctx.seed,
        ..QuadConfig::default()
    };
    if let Some(cap) = a.point_cap {
        cfg.point_cap = cap;
    }
    let r = quadrature_moment(&spec, a.p, &grid, &cfg)?;
    let value = if r.method == MomentMethod::Sampled {
        sampled(r.value)
    } else {
        quadrature(r.value)
    };
    let method = match r.method {
        MomentMethod::Direct => "direct",
        MomentMethod::Fft => "fft",
        MomentMethod::Sampled => "sampled",
        MomentMethod::Auto => "auto",
    };
    let results = json!({
        "system": sys.to_string(),
        "N": exact_int(a.n),
        "p": exact_int(a.p),
        "value": value,
        "adequate": r.adequate,
        "exact": r.exact,
        "method": method,
        "grid": exact_list(&r.grid),
        "required_grid": exact_list(&r.required_grid),
        "points": exact_int(r.points),
    });
    Ok(Output::new(results).flag("exact", r.exact))
}

fn probe(a: &ProbeArgs, ctx: &Context) -> Res<Output> {
    let c = rational("c", &a.c)?;
    let r = box_lower_probe(a.n, &c, a.samples, ctx.seed)?;
    let mut implied = Vec::new();
    if let Some(q) = &a.q {
        for q in rational_list("q", q)? {
            implied.push(json!({"q": exact(&q), "exponent": exact(&implied_exponent(&q)?)}));
        }
    }
    let n = int(a.n as i64);
    let results = json!({
        "N": exact_int(a.n),
        "c": exact(&c),
        "samples": exact_int(a.samples),
        "min_abs": sampled(r.min_abs),
        "threshold": exact(&(&n * &n / int(2))),
        "certified": r.certified,
        "implied_exponents": implied,
    });
    Ok(Output::new(results).flag("exact", false).flag("certified", r.certified))
}

fn sign_text(s: Option<Ordering>) -> Value {
    match s {
        Some(Ordering::Less) => json!("negative"),
        Some(Ordering::Equal) => json!("zero"),
        Some(Ordering::Greater) => json!("positive"),
        None => Value::Null,
    }
}

fn numerology_json(rep: &NumerologyReport) -> Value {
    let p = &rep.params;
    json!({
        "p": exact(&p.p),
        "mu": exact(&p.mu),
        "u": exact(&p.u),
        "r": exact_int(p.r),
        "M": exact_int(p.m),
        "eta_p": exact(&p.eta_p),
        "alpha1": exact(&rep.coeffs.alpha1),
        "alpha2": exact(&rep.coeffs.alpha2),
        "beta2": exact(&rep.coeffs.beta2),
        "convergence_ratio": exact(&rep.convergence_ratio),
        "s_bgamma": exact(&rep.series.s_bgamma),
        "s_bw": exact(&rep.series.s_bw),
        "s_btau": exact(&rep.series.s_btau),
        "lambda0": exact(&rep.lambda0),
        "finite_b_gamma": exact(&rep.finite_b_gamma),
        "finite_b_w": exact(&rep.finite_b_w),
        "finite_b_tau": exact(&rep.finite_b_tau),
        "geometric_factor": exact(&rep.geometric_factor),
        "eta": exact(&rep.eta),
        "eta_tilde": exact(&rep.eta_tilde),
        "leading_coefficient": exact(&rep.leading_coefficient),
        "leading_coefficient_limit": exact(&rep.leading_coefficient_limit),
        "dominant_term": exact(&rep.dominant_term),
        "normalized_gap": rep.normalized_gap.as_ref().map_or(Value::Null, exact),
        "sign": sign_text(rep.sign),
    })
}

fn numerology_report(a: &NumReportArgs) -> Res<Output> {
    let p = rational("p", &a.p)?;
    let cap = max_admissible_u(a.r, a.m);
    let (u, capped) = match &a.u {
        Some(u) => (rational("u", u)?, false),
        None => {
            let req = ratio(1, 1_000_000);
            if req > cap {
                (cap, true)
            } else {
                (req, false)
            }
        }
    };
    let rep = eta(&EtaParams {
        p,
        mu: rational("mu", &a.mu)?,
        u,
        r: a.r,
        m: a.m,
        eta_p: rational("eta-p", &a.eta_p)?,
    })?;
    let mut results = numerology_json(&rep);
    results["u_capped_to_admissible"] = json!(capped);
    Ok(Output::new(results).flag("exact", true))
}

fn scan(a: &ScanArgs) -> Res<Output> {
    let window = rational_list("p-window", &a.p_window)?;
    if window.len() != 2 {
        return Err(LabError::param("--p-window takes lo,hi"));
    }
    let mut cfg = ScanConfig::new(
        rational("eta-p", &a.eta_p)?,
        window[0].clone(),
        window[1].clone(),
        a.r_max,
        a.m_max,
    );
    cfg.mu = rational("mu", &a.mu)?;
    cfg.u = rational("u", &a.u)?;
    cfg.ladder_len = a.ladder;
    let out = contradiction_scan(&cfg)?;
    let witness = match &out.witness {
        None => Value::Null,
        Some(w) => json!({
            "p": exact(&w.p),
            "r": exact_int(w.r),
            "M": exact_int(w.m),
            "mu": exact(&w.mu),
            "u": exact(&w.u),
            "gap": exact(&w.gap),
            "eta_tilde": exact(&w.report.eta_tilde),
            "eta_tilde_below_eta_p": w.eta_tilde_below_eta_p,
        }),
    };
    // the dominant coefficient in the limit r -> inf at the top of the window
    let limit = match (lambda0(&cfg.p_hi), series_sums(&cfg.p_hi)) {
        (Ok(l), Ok(s)) => exact(&(l - ratio(1, 2) * (&cfg.mu + &cfg.eta_p) * s.s_btau)),
        _ => Value::Null,
    };
    let results = json!({
        "p_window": exact_rationals(&window),
        "eta_p": exact(&cfg.eta_p),
        "r_max": exact_int(cfg.r_max),
        "M_max": exact_int(cfg.m_max),
        "rungs": exact_int(out.rungs.len()),
        "evaluations": exact_int(out.evaluations),
        "exact_fallbacks": exact_int(out.exact_fallbacks),
        "leading_coefficient_limit_at_p_hi": limit,
        "witness": witness,
    });
    Ok(Output::new(results)
        .flag("exact", true)
        .flag("witness_found", out.witness.is_some()))
}

fn ball(a: &BallArgs) -> Res<Output> {
    let b = ball_inflation_constraints(a.l, a.n, &rational("p", &a.p)?)?;
    let results = json!({
        "l": exact_int(b.l),
        "n": exact_int(b.n),
        "p_min": exact(&b.p_min),
        "q_max": exact(&b.q_max),
        "p_admissible": b.p_admissible,
        "q_window": exact_rationals(&[b.q_window.0.clone(), b.q_window.1.clone()]),
    });
    Ok(Output::new(results).flag("exact", true))
}

fn table() -> Res<Output> {
    let rows: Vec<Value> = critical_exponent_table()
        .iter()
        .map(|row| {
            let values: Map<String, Value> = row.values.iter().map(|(k, v)| (k.clone(), exact(v))).collect();
            json!({"label": row.label, "formula": row.formula, "holds": row.holds, "values": values})
        })
        .collect();
    let all = critical_exponent_table().iter().all(|r| r.holds);
    Ok(Output::new(json!({ "rows": rows }))
        .flag("exact", true)
        .flag("all_hold", all))
}

fn poly_json(p: &Poly) -> Value {
    let terms: Vec<Value> = p
        .to_sparse()
        .iter()
        .map(|t| {
            json!({
                "exponents": exact_list(&t.exponents),
                "coeff": {"provenance": crate::report::EXACT, "value": t.coeff},
            })
        })
        .collect();
    Value::Array(terms)
}

fn certificate_json(c: &MinorCertificate) -> Value {
    json!({
        "rows": exact_list(&c.rows),
        "cols": exact_list(&c.cols),
        "order": exact_int(c.order),
        "determinant": poly_json(&c.determinant),
        "witness": exact_rationals(&c.witness),
        "value": exact(&c.value),
        "verified": c.verify(),
    })
}

fn basis_json(v: &Subspace) -> Value {
    Value::Array(v.basis().iter().map(|row| exact_rationals(row)).collect())
}

fn conjecture(a: &ConjectureArgs, ctx: &Context) -> Res<Output> {
    let dims: Vec<usize> = match &a.dims {
        Some(d) => int_list("dims", d)?,
        None => (1..=9).collect(),
    };
    let rep = verify_conjecture_samples(2, 3, a.l, &dims, a.trials, ctx.seed, a.entry_bound)?;
    let per_dim: Vec<Value> = rep
        .dims
        .iter()
        .map(|d| {
            json!({
                "dim": exact_int(d.dim),
                "order": exact_int(d.order.order),
                "feasible": d.order.feasible,
                "skipped": d.skipped,
                "trials": exact_int(d.trials),
                "certified": exact_int(d.certified),
                "reverified": exact_int(d.reverified),
                "certificates": d.certificates.iter().map(certificate_json).collect::<Vec<_>>(),
                "failures": d.failures.iter().map(|f| json!({"trial": exact_int(f.trial), "basis": basis_json(&f.subspace)})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let ok = rep.all_certified();
    let results = json!({
        "d": exact_int(rep.d),
        "k": exact_int(rep.k),
        "l": exact_int(rep.l),
        "entry_bound": exact_int(rep.entry_bound),
        "dims": per_dim,
        "all_certified": ok,
    });
    Ok(Output::new(results).flag("exact", true).flag("all_certified", ok))
}

fn drop_json(d: &RankDrop) -> Value {
    json!({
        "trial": exact_int(d.trial),
        "xi": exact_rationals(&[d.xi.0.clone(), d.xi.1.clone()]),
        "vectors": d.vectors.iter().map(|v| exact_rationals(v)).collect::<Vec<_>>(),
        "rank": exact_int(d.rank),
        "on_locus": d.on_locus,
    })
}

fn appendix(a: &AppendixArgs, ctx: &Context) -> Res<Output> {
    let rep = appendix_lemma_checks(ctx.seed, a.trials)?;
    let lemmas: Vec<Value> = rep
        .lemmas
        .iter()
        .map(|l| {
            json!({
                "name": l.name,
                "expected_rank": exact_int(l.expected_rank),
                "trials": exact_int(l.trials),
                "full_rank": exact_int(l.full_rank),
                "rate": if l.trials == 0 { Value::Null } else { exact(&Rational::new(l.full_rank.into(), l.trials.into())) },
                "drops_explained": l.drops_explained(),
                "drops": l.drops.iter().map(drop_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let explained = rep.lemmas.iter().all(|l| l.drops_explained());
    Ok(Output::new(json!({"trials": exact_int(a.trials), "lemmas": lemmas}))
        .flag("exact", true)
        .flag("drops_explained", explained))
}

/// Reads `{"points": [["a/b","c/d"], ...]}`; entries may be rational strings or integers.
pub fn read_points(path: &Path) -> Res<PointConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| LabError::param(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| LabError::param(format!("bad points file: {e}")))?;
    let list = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| LabError::param("points file needs a \"points\" array"))?;
    let coord = |x: &Value| -> Res<Rational> {
        match x {
            Value::String(s) => parse_rational(s),
            Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().expect("i64"))),
            other => Err(LabError::param(format!(
                "point coordinate must be \"a/b\", got {other}"
            ))),
        }
    };
    let points = list
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([r, s]) => Ok((coord(r)?, coord(s)?)),
            _ => Err(LabError::param("each point must be a pair")),
        })
        .collect::<Res<Vec<_>>>()?;
    PointConfig::new(points)
}

fn bl(a: &BlArgs, ctx: &Context) -> Res<Output> {
    let sys = MonomialSystem::new(a.d, a.k)?;
    let points = match (&a.points, a.random_points) {
        (Some(path), _) => read_points(path)?,
        (None, Some(m)) => PointConfig::random(m, &mut task_rng(ctx.seed, &[0xb2])),
        (None, None) => return Err(LabError::param("give --points FILE or --random-points M")),
    };
    let rep = bl_condition_check(&sys, &points, a.l, a.samples, ctx.seed)?;
    let pts: Vec<Value> = points
        .points()
        .iter()
        .map(|(r, s)| exact_rationals(&[r.clone(), s.clone()]))
        .collect();
    let violations: Vec<Value> = rep
        .violations
        .iter()
        .map(|v| {
            json!({
                "sample": exact_int(v.sample),
                "dim": exact_int(v.eval.dim),
                "rank_sum": exact_int(v.eval.rank_sum),
                "rhs": exact(&v.eval.rhs),
                "basis": basis_json(&v.subspace),
            })
        })
        .collect();
    let results = json!({
        "system": sys.to_string(),
        "l": exact_int(rep.l),
        "d0": exact_int(rep.d0),
        "n": exact_int(rep.n),
        "points": pts,
        "samples": exact_int(rep.samples),
        "violations": violations,
    });
    Ok(Output::new(results)
        .flag("exact", true)
        .flag("no_violations", rep.violations.is_empty()))
}

fn parse_squares(text: &str) -> Res<Vec<(u32, u32)>> {
    text.split(',')
        .map(|item| {
            let (i, j) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| LabError::param(format!("--squares: expected i:j, got {item:?}")))?;
            let p = |x: &str| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| LabError::param("--squares: bad index"))
            };
            Ok((p(i)?, p(j)?))
        })
        .collect()
}

fn squares(a: &SquaresArgs, ctx: &Context) -> Res<Output> {
    let sq = match &a.squares {
        Some(t) => parse_squares(t)?,
        None => full_collection(a.k),
    };
    let extra = a
        .probe
        .iter()
        .map(|p| {
            rational_list("probe", p).map(|v| {
                v.iter()
                    .map(|q| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN))
                    .collect::<Vec<f64>>()
            })
        })
        .collect::<Res<Vec<_>>>()?;
    let r = square_transversality_probe(a.k, &sq, a.degree, a.polys, a.grid, ctx.seed, &extra)?;
    let flagged: Vec<Value> = r.flagged.iter().map(|&(i, j)| exact_list(&[i, j])).collect();
    let results = json!({
        "K": exact_int(r.k),
        "squares": exact_int(r.squares),
        "degree_bound": exact_int(r.degree_bound),
        "subset_size": exact_int(r.subset_size),
        "estimate": sampled(r.estimate),
        "worst_poly": sampled_list(&r.worst_poly),
        "flagged": flagged,
        "probes": exact_int(r.probes),
        "label": r.label,
        "expensive_degree": a.degree > 10,
    });
    Ok(Output::new(results).flag("exact", false).flag("approximate", true))
}

fn bounds(a: &BoundsArgs) -> Res<Output> {
    let sys = MonomialSystem::new(a.d, a.k)?;
    let regimes: Vec<Value> = regime_analysis(a.d, a.k)?
        .iter()
        .map(|r| {
            json!({
                "from": exact(&r.from),
                "from_closed": r.from_closed,
                "to": r.to.as_ref().map_or(Value::Null, exact),
                "term": r.term.to_string(),
            })
        })
        .collect();
    let mut results = json!({"system": sys.to_string(), "regimes": regimes});
    if let Some(s) = a.s {
        let (e, terms) = lower_bound_exponent(a.d, a.k, s)?;
        results["s"] = exact_int(s);
        results["lower_bound_exponent"] = exact(&e);
        results["maximizers"] = json!(terms.iter().map(|t| t.to_string()).collect::<Vec<_>>());
        results["upper_bound_exponent"] = match upper_bound_exponent(a.d, a.k, s) {
            Ok(u) => exact(&u),
            Err(LabError::Unsupported(_)) => json!("conjectural only"),
            Err(e) => return Err(e),
        };
    }
    Ok(Output::new(results).flag("exact", true))
}

fn validate_file(path: &Path) -> Res<Output> {
    let text =
        std::fs::read_to_string(path).map_err(|e| LabError::param(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| LabError::param(format!("not JSON: {e}")))?;
    let problems = validate(&v);
    if !problems.is_empty() {
        return Err(LabError::param(format!(
            "provenance check failed: {}",
            problems.join("; ")
        )));
    }
    Ok(Output::new(json!({"valid": true, "file": path.display().to_string()})))
}
