use paley_esh::bounds::{assemble_report, BoundReport, ReportOptions};
use paley_esh::certify::{paley_theta_solution, verify_stagnation_with, CertifyError, Coverage, StagnationReport};
use paley_esh::conic::SdpOptions;
use paley_esh::esc::{esc_check, EscCheckOutcome};
use paley_esh::gf::{local_graph, paley_graph};
use paley_esh::graph::{brute_force_alpha, Graph, GraphError};
use paley_esh::hierarchy::{binomial, ell, k_subsets, vtesh_level, z_level, BoundKind, BoundResult, Exactness, HierarchyError, Mode, EXHAUSTIVE_LIMIT};
use paley_esh::theta::{theta_lifted_with, theta_schrijver_with};
use serde::Serialize;
use serde_json::json;

use crate::config::{Command, Format, GraphScope, TableMode, ThetaFlavor};
use crate::render::{self, aligned, envelope, fixed4, header};
use crate::{check_order, execution, CliError, Outcome, RunConfig, EXIT_VERIFICATION};

/// Largest SDP order `theta` will attempt.
const THETA_MAX_ORDER: usize = 113;
/// Largest order for which `verify` computes `α` to decide level `ℓ + 1`.
const VERIFY_ALPHA_MAX_Q: u64 = 101;

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.command {
        Command::Paley { q } => paley(cfg, *q).map(ok),
        Command::Alpha { q } => alpha(cfg, *q).map(ok),
        Command::Theta { q, variant, graph } => theta(cfg, *q, *variant, *graph).map(ok),
        Command::Bounds { qs } => bounds(cfg, qs),
        Command::Esh { q, level } => hierarchy(cfg, *q, *level, BoundKind::Esh).map(ok),
        Command::Vtesh { q, level } => hierarchy(cfg, *q, *level, BoundKind::Vtesh).map(ok),
        Command::Verify { q, level } => verify(cfg, *q, *level),
        Command::Table { qs, levels, kind, mode } => table(cfg, qs, levels, *kind, *mode),
    }
}

fn ok(body: String) -> Outcome {
    Outcome { body, exit_code: 0 }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn graph_error(e: GraphError) -> CliError {
    match e {
        GraphError::TooLarge(_) => CliError::Guard(e.to_string()),
        other => runtime(other),
    }
}

fn hierarchy_error(e: HierarchyError) -> CliError {
    match e {
        HierarchyError::CombinatorialBlowup { .. } => CliError::Guard(e.to_string()),
        other => runtime(other),
    }
}

fn load(q: u64) -> Result<Graph, CliError> {
    check_order(q)?;
    paley_graph(q).map_err(|e| CliError::Input(e.to_string()))
}

fn sdp_options(cfg: &RunConfig) -> SdpOptions {
    SdpOptions {
        execution: execution(cfg.threads),
        ..SdpOptions::default()
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exhaustive => "exhaustive",
        Mode::Heuristic => "heuristic",
    }
}

fn kind_name(k: BoundKind) -> &'static str {
    match k {
        BoundKind::Esh => "esh",
        BoundKind::Vtesh => "vtesh",
    }
}

fn exactness_name(e: Exactness) -> &'static str {
    match e {
        Exactness::Exact => "exact",
        Exactness::UpperBound => "upper_bound",
    }
}

fn paley(cfg: &RunConfig, q: u64) -> Result<String, CliError> {
    let g = load(q)?;
    let edges = g.edges();
    Ok(match cfg.format {
        Format::Json => envelope(
            "paley",
            cfg.seed,
            json!({ "q": q, "order": g.order(), "degree": (q - 1) / 2, "edges": edges }),
        ),
        Format::Text => {
            let mut s = header("paley", cfg.seed);
            s.push_str(&format!("P_{q}: {} vertices, {} edges, degree {}\n", g.order(), edges.len(), (q - 1) / 2));
            for v in 0..g.order() {
                let nb: Vec<String> = g.neighbors(v).iter().map(|u| u.to_string()).collect();
                s.push_str(&format!("{v}: {}\n", nb.join(" ")));
            }
            s
        }
        _ => edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect(),
    })
}

fn alpha(cfg: &RunConfig, q: u64) -> Result<String, CliError> {
    let g = load(q)?;
    let w = brute_force_alpha(&g).map_err(graph_error)?;
    Ok(match cfg.format {
        Format::Json => envelope("alpha", cfg.seed, json!({ "q": q, "alpha": w.size, "witness": w.witness })),
        _ => {
            let ws: Vec<String> = w.witness.iter().map(|v| v.to_string()).collect();
            format!("{}alpha {}\nwitness {}\n", header("alpha", cfg.seed), w.size, ws.join(" "))
        }
    })
}

fn theta(cfg: &RunConfig, q: u64, variant: ThetaFlavor, scope: GraphScope) -> Result<String, CliError> {
    let full = load(q)?;
    let g = match scope {
        GraphScope::Full => full,
        GraphScope::Local => local_graph(&full, 0).0,
    };
    if g.order() + 1 > THETA_MAX_ORDER {
        return Err(CliError::Guard(format!(
            "SDP of order {} exceeds the limit {THETA_MAX_ORDER}; theta(P_q) = sqrt(q) in closed form",
            g.order() + 1
        )));
    }
    let opts = sdp_options(cfg);
    let sol = match variant {
        ThetaFlavor::Lovasz => theta_lifted_with(&g, &opts),
        ThetaFlavor::Schrijver => theta_schrijver_with(&g, &opts),
    }
    .map_err(runtime)?;
    let (variant_name, scope_name) = (
        match variant {
            ThetaFlavor::Lovasz => "lovasz",
            ThetaFlavor::Schrijver => "schrijver",
        },
        match scope {
            GraphScope::Full => "full",
            GraphScope::Local => "local",
        },
    );
    // on the local graph the bound on α(P_q) is one more than theta
    let bound = match scope {
        GraphScope::Full => sol.value,
        GraphScope::Local => 1.0 + sol.value,
    };
    Ok(match cfg.format {
        Format::Json => envelope(
            "theta",
            cfg.seed,
            json!({
                "q": q,
                "variant": variant_name,
                "graph": scope_name,
                "order": g.order(),
                "theta": sol.value,
                "bound": bound,
                "solver_gap": sol.solver_gap,
                "iterations": sol.iterations,
            }),
        ),
        _ => format!(
            "{}q {q}\nvariant {variant_name}\ngraph {scope_name} ({} vertices)\ntheta {}\nbound {}\nsolver_gap {:.1e}\n",
            header("theta", cfg.seed),
            g.order(),
            fixed4(sol.value),
            fixed4(bound),
            sol.solver_gap
        ),
    })
}

const BOUND_COLUMNS: [&str; 10] = ["q", "alpha", "theta", "hoffman", "maistrelli", "hanson", "cohen_lower", "b_M", "b_M_star", "ell"];

fn bound_row(r: &BoundReport) -> Vec<String> {
    vec![
        r.q.to_string(),
        render::int_cell(&r.alpha),
        render::cell(&r.theta),
        render::cell(&r.hoffman),
        render::cell(&r.maistrelli),
        render::cell(&r.hanson),
        render::cell(&r.cohen_lower),
        render::cell(&r.b_m),
        render::cell(&r.b_m_star),
        r.ell.to_string(),
    ]
}

#[derive(Serialize)]
#[serde(untagged)]
enum Row<T> {
    Ok(T),
    Err { q: u64, error: String },
}

fn bounds(cfg: &RunConfig, qs: &[u64]) -> Result<Outcome, CliError> {
    let opts = ReportOptions::default();
    let rows: Vec<Row<BoundReport>> = qs
        .iter()
        .map(|&q| {
            check_order(q)
                .and_then(|_| assemble_report(q, &opts).map_err(runtime))
                .map_or_else(|e| Row::Err { q, error: e.to_string() }, Row::Ok)
        })
        .collect();
    let all_failed = rows.iter().all(|r| matches!(r, Row::Err { .. }));
    let body = match cfg.format {
        Format::Json => envelope("bounds", cfg.seed, json!({ "columns": BOUND_COLUMNS, "rows": render::to_value(&rows)? })),
        f => {
            let mut table = vec![BOUND_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            let mut notes = Vec::new();
            for r in &rows {
                table.push(match r {
                    Row::Ok(rep) => bound_row(rep),
                    Row::Err { q, error } => {
                        notes.push(format!("# q = {q}: {error}"));
                        std::iter::once(q.to_string())
                            .chain(std::iter::repeat_n("error".to_string(), BOUND_COLUMNS.len() - 1))
                            .collect()
                    }
                });
            }
            if f == Format::Csv {
                render::csv(&table)?
            } else {
                let mut s = header("bounds", cfg.seed);
                s.push_str(&aligned(&table));
                for n in notes {
                    s.push_str(&n);
                    s.push('\n');
                }
                s
            }
        }
    };
    Ok(Outcome {
        body,
        exit_code: if all_failed { 2 } else { 0 },
    })
}

fn solve_level(g: &Graph, kind: BoundKind, cfg: &RunConfig, level: usize, mode: Mode) -> Result<BoundResult, HierarchyError> {
    let hc = cfg.hierarchy(level, mode);
    match kind {
        BoundKind::Esh => z_level(g, &hc),
        BoundKind::Vtesh => vtesh_level(g, &hc),
    }
}

#[derive(Serialize)]
struct LevelReport<'a> {
    q: u64,
    kind: &'static str,
    level: usize,
    mode: &'static str,
    value: f64,
    exactness: &'static str,
    converged: bool,
    solver_gap: f64,
    cuts: usize,
    trace: &'a [paley_esh::hierarchy::RoundTrace],
}

fn hierarchy(cfg: &RunConfig, q: u64, level: usize, kind: BoundKind) -> Result<String, CliError> {
    if level == 0 {
        return Err(CliError::Input("level must be at least 1".into()));
    }
    let g = load(q)?;
    let mode = cfg.search.mode;
    let r = solve_level(&g, kind, cfg, level, mode).map_err(hierarchy_error)?;
    let rep = LevelReport {
        q,
        kind: kind_name(kind),
        level: r.level,
        mode: mode_name(mode),
        value: r.value,
        exactness: exactness_name(r.exactness),
        converged: r.converged,
        solver_gap: r.solver_gap,
        cuts: r.cuts.len(),
        trace: &r.trace,
    };
    let name = kind_name(kind);
    Ok(match cfg.format {
        Format::Json => envelope(name, cfg.seed, render::to_value(&rep)?),
        _ => {
            let mut s = header(name, cfg.seed);
            s.push_str(&format!(
                "q {q}\nlevel {}\nmode {}\nvalue {}\nexactness {}\nconverged {}\nsolver_gap {:.1e}\ncuts {}\n",
                rep.level,
                rep.mode,
                fixed4(rep.value),
                rep.exactness,
                rep.converged,
                rep.solver_gap,
                rep.cuts
            ));
            let mut rows = vec![vec!["round".to_string(), "objective".into(), "active_cuts".into(), "new_cuts".into()]];
            for (i, t) in r.trace.iter().enumerate() {
                rows.push(vec![(i + 1).to_string(), format!("{:.6}", t.objective), t.active_cuts.to_string(), t.new_cuts.to_string()]);
            }
            s.push_str(&aligned(&rows));
            s
        }
    })
}

/// LP scan of one level with no certificate behind it.
#[derive(Debug, Serialize)]
struct ScanReport {
    k: usize,
    coverage: Coverage,
    checked: usize,
    violated: usize,
    first_violated: Option<Vec<usize>>,
    max_violation: f64,
}

#[derive(Debug, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
enum LevelCheck {
    Certificate(StagnationReport),
    LpScan(ScanReport),
}

impl LevelCheck {
    fn failure(&self) -> Option<&Vec<usize>> {
        match self {
            LevelCheck::Certificate(r) => r.first_failure.as_ref(),
            LevelCheck::LpScan(r) => r.first_violated.as_ref(),
        }
    }
}

fn coverage(q: u64, k: usize, cfg: &RunConfig) -> Coverage {
    if binomial(q as usize, k) <= cfg.samples as u128 {
        Coverage::Exhaustive
    } else {
        Coverage::Sampled {
            samples: cfg.samples,
            seed: cfg.seed,
        }
    }
}

fn lp_scan(q: u64, k: usize, cfg: &RunConfig) -> Result<ScanReport, CliError> {
    let sol = paley_theta_solution(q).map_err(runtime)?;
    let cov = coverage(q, k, cfg);
    let subsets = match cov {
        Coverage::Exhaustive => k_subsets(q as usize, k),
        Coverage::Sampled { samples, seed } => paley_esh::certify::sample_subsets(q as usize, k, samples, seed),
    };
    let outcomes = execution(cfg.threads).map(&subsets, |s| esc_check(&sol.matrix, sol.graph(), s, 1e-9));
    let mut rep = ScanReport {
        k,
        coverage: cov,
        checked: subsets.len(),
        violated: 0,
        first_violated: None,
        max_violation: 0.0,
    };
    for (s, out) in subsets.iter().zip(outcomes) {
        if let EscCheckOutcome::Violated { violation, .. } = out.map_err(runtime)? {
            rep.violated += 1;
            rep.max_violation = rep.max_violation.max(violation);
            if rep.first_violated.is_none() {
                rep.first_violated = Some(s.clone());
            }
        }
    }
    Ok(rep)
}

fn verify(cfg: &RunConfig, q: u64, forced: Option<usize>) -> Result<Outcome, CliError> {
    load(q)?;
    let sol = paley_theta_solution(q).map_err(|e| match e {
        CertifyError::Defect(_) => CliError::Runtime(format!("verification failed: {e}")),
        other => runtime(other),
    })?;
    let l = ell(q) as usize;
    let alpha = if q <= VERIFY_ALPHA_MAX_Q {
        Some(brute_force_alpha(sol.graph()).map_err(graph_error)?.size)
    } else {
        None
    };
    let plus1 = q >= 25 && alpha.is_some_and(|a| a < l);
    let levels: Vec<usize> = match forced {
        Some(0) => return Err(CliError::Input("level must be at least 1".into())),
        Some(k) => vec![k],
        None => (2..=l).chain(plus1.then_some(l + 1)).collect(),
    };
    let exec = execution(cfg.threads);
    let mut checks = Vec::new();
    for &k in &levels {
        let covered = k <= l && (k <= 2 || q >= 9) || (k == l + 1 && plus1);
        let check = if covered {
            let r = verify_stagnation_with(q, k, coverage(q, k, cfg), exec).map_err(runtime)?;
            LevelCheck::Certificate(r)
        } else {
            LevelCheck::LpScan(lp_scan(q, k, cfg)?)
        };
        checks.push(check);
    }
    let failure = checks.iter().find_map(|c| c.failure().map(|s| (c, s)));
    let body = match cfg.format {
        Format::Json => envelope(
            "verify",
            cfg.seed,
            json!({
                "q": q,
                "ell": l,
                "alpha": alpha,
                "theta_objective": sol.objective,
                "levels": render::to_value(&checks)?,
                "passed": failure.is_none(),
                "first_failure": failure.map(|(_, s)| s),
            }),
        ),
        _ => {
            let mut s = header("verify", cfg.seed);
            s.push_str(&format!("q {q}\nell {l}\n"));
            if let Some(a) = alpha {
                s.push_str(&format!("alpha {a}\n"));
            }
            s.push_str(&format!("theta solution ok, objective {}\n", fixed4(sol.objective)));
            for c in &checks {
                s.push_str(&check_line(c));
            }
            match failure {
                None => s.push_str("all levels passed\n"),
                Some((c, subset)) => {
                    let k = match c {
                        LevelCheck::Certificate(r) => r.k,
                        LevelCheck::LpScan(r) => r.k,
                    };
                    s.push_str(&format!("FAILED at k = {k}: subset {subset:?}\n"));
                }
            }
            s
        }
    };
    Ok(Outcome {
        body,
        exit_code: if failure.is_some() { EXIT_VERIFICATION } else { 0 },
    })
}

fn coverage_text(c: &Coverage) -> String {
    match c {
        Coverage::Exhaustive => "exhaustive".into(),
        Coverage::Sampled { samples, seed } => format!("{samples} samples (seed {seed})"),
    }
}

fn check_line(c: &LevelCheck) -> String {
    match c {
        LevelCheck::Certificate(r) => format!(
            "k {}: certificate, {}, {}/{} passed, augmented {}, max reconstruction error {:.1e}, min weight {:.3e}{}\n",
            r.k,
            coverage_text(&r.coverage),
            r.passed,
            r.checked,
            r.augmented,
            r.max_reconstruction_error,
            r.min_weight,
            if r.exact { ", rational arithmetic" } else { "" }
        ),
        LevelCheck::LpScan(r) => format!(
            "k {}: LP scan (beyond the stagnation theorems), {}, {} of {} subsets violated, max violation {:.3e}\n",
            r.k,
            coverage_text(&r.coverage),
            r.violated,
            r.checked,
            r.max_violation
        ),
    }
}

#[derive(Serialize)]
struct TableRow {
    q: u64,
    level: usize,
    mode: Option<&'static str>,
    value: Option<f64>,
    exactness: Option<&'static str>,
    error: Option<String>,
}

fn table(cfg: &RunConfig, qs: &[u64], levels: &[usize], kind: BoundKind, mode: TableMode) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for &q in qs {
        let g = match load(q) {
            Ok(g) => g,
            Err(e) => {
                rows.extend(levels.iter().map(|&level| TableRow {
                    q,
                    level,
                    mode: None,
                    value: None,
                    exactness: None,
                    error: Some(e.to_string()),
                }));
                continue;
            }
        };
        let n = match kind {
            BoundKind::Esh => g.order(),
            BoundKind::Vtesh => local_graph(&g, 0).0.order(),
        };
        for &level in levels {
            let m = match mode {
                TableMode::Exhaustive => Mode::Exhaustive,
                TableMode::Heuristic => Mode::Heuristic,
                TableMode::Auto if binomial(n, level.min(n)) <= EXHAUSTIVE_LIMIT => Mode::Exhaustive,
                TableMode::Auto => Mode::Heuristic,
            };
            rows.push(match solve_level(&g, kind, cfg, level, m) {
                Ok(r) => TableRow {
                    q,
                    level,
                    mode: Some(mode_name(m)),
                    value: Some(r.value),
                    exactness: Some(exactness_name(r.exactness)),
                    error: None,
                },
                Err(e) => TableRow {
                    q,
                    level,
                    mode: Some(mode_name(m)),
                    value: None,
                    exactness: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    let all_failed = rows.iter().all(|r| r.error.is_some());
    let body = match cfg.format {
        Format::Json => envelope("table", cfg.seed, json!({ "kind": kind_name(kind), "rows": render::to_value(&rows)? })),
        f => {
            let mut t = vec![["q", "kind", "level", "mode", "value", "exactness"].map(String::from).to_vec()];
            for r in &rows {
                t.push(vec![
                    r.q.to_string(),
                    kind_name(kind).into(),
                    r.level.to_string(),
                    r.mode.unwrap_or("-").into(),
                    r.value.map_or_else(|| "-".into(), fixed4),
                    r.exactness.unwrap_or("-").into(),
                ]);
            }
            if f == Format::Csv {
                render::csv(&t)?
            } else {
                let mut s = header("table", cfg.seed);
                s.push_str(&aligned(&t));
                for r in rows.iter().filter(|r| r.error.is_some()) {
                    s.push_str(&format!("# q = {}, k = {}: {}\n", r.q, r.level, r.error.as_deref().unwrap_or("")));
                }
                s
            }
        }
    };
    Ok(Outcome {
        body,
        exit_code: if all_failed { 2 } else { 0 },
    })
}
