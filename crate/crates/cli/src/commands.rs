use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use ebn::basis::{verify_etree_imap, Provenance, Verdict};
use ebn::format::{
    format_edg, format_jpt, format_statement, format_stm, parse_edg, parse_jpt, parse_statement,
    parse_stm,
};
use ebn::graphoid::{closure, derives, ClosureError};
use ebn::hardness::{build_gk, verify_hardness, CheckStatus};
use ebn::oracle::{ci_holds, sample_from_etree, SamplerConfig};
use ebn::recovery::{recover, Witness};
use ebn::registry::Registry;
use ebn::{etree_isomorphic, EDag, ETree, JointTable, Statement, Universe};

use crate::{Cli, Command, EXIT_FAIL, EXIT_FALSE};

/// Rendered result of one command.
pub struct Report {
    pub code: u8,
    pub text: String,
    pub json: Value,
}

impl Report {
    fn new(code: u8, text: impl Into<String>, json: Value) -> Self {
        Report {
            code,
            text: text.into(),
            json,
        }
    }

    fn verdict(holds: bool, yes: &str, no: &str, mut json: Value) -> Self {
        let word = if holds { yes } else { no };
        json["result"] = json!(word);
        Report::new(if holds { 0 } else { EXIT_FALSE }, format!("{word}\n"), json)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> Result<EDag> {
    parse_edg(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_tree(path: &Path) -> Result<ETree> {
    ETree::new(load_graph(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_table(path: &Path) -> Result<JointTable> {
    parse_jpt(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn statement(u: &Universe, text: &str) -> Result<Statement> {
    parse_statement(u, text).with_context(|| format!("in statement `{text}`"))
}

/// Writes `content` to `output`, or returns it for stdout.
fn deliver(content: String, output: Option<&Path>, summary: String) -> Result<String> {
    match output {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
            Ok(summary)
        }
        None => Ok(content),
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Msep {
            graph,
            statement: text,
            engine,
        } => {
            let g = load_graph(graph)?;
            let s = statement(g.universe(), text)?;
            let engine = Registry::engines().get(engine)?;
            let sep = engine.separated(&g, &s)?;
            Ok(Report::verdict(
                sep,
                "SEPARATED",
                "CONNECTED",
                json!({
                    "statement": format_statement(g.universe(), &s),
                    "engine": engine.name(),
                    "separated": sep,
                }),
            ))
        }
        Command::Ci {
            table,
            statement: text,
        } => {
            let p = load_table(table)?;
            let s = statement(p.universe(), text)?;
            let r = ci_holds(&p, &s, cli.tol)?;
            let word = if r.holds { "HOLDS" } else { "DOES_NOT_HOLD" };
            Ok(Report::new(
                if r.holds { 0 } else { EXIT_FALSE },
                format!("{word} residual={:e}\n", r.residual),
                json!({
                    "statement": format_statement(p.universe(), &s),
                    "result": word,
                    "holds": r.holds,
                    "residual": r.residual,
                    "tol": cli.tol,
                }),
            ))
        }
        Command::Imap { graph, table, all } => {
            let t = load_tree(graph)?;
            let p = load_table(table)?;
            let report = verify_etree_imap(&t, &p, cli.tol, *all)?;
            let u = t.universe();
            let failures: Vec<_> = match &report.verdict {
                Verdict::Imap => Vec::new(),
                Verdict::NotImap(f) => f.iter().collect(),
            };
            let mut text = if report.is_imap() {
                format!("IMAP tests={}\n", report.tests)
            } else {
                format!("NOT_IMAP tests={}\n", report.tests)
            };
            for f in &failures {
                let _ = writeln!(text, "  {} residual={:e}", f.statement.display(u), f.residual);
            }
            Ok(Report::new(
                if report.is_imap() { 0 } else { EXIT_FALSE },
                text,
                json!({
                    "result": if report.is_imap() { "IMAP" } else { "NOT_IMAP" },
                    "tests": report.tests,
                    "failures": failures.iter().map(|f| json!({
                        "statement": format_statement(u, &f.statement),
                        "residual": f.residual,
                    })).collect::<Vec<_>>(),
                }),
            ))
        }
        Command::Basis { graph, kind } => {
            let g = load_graph(graph)?;
            let builder = Registry::bases().get(kind)?;
            let basis = builder.build(&g)?;
            let u = g.universe();
            let list: Vec<Statement> = basis.entries().iter().map(|e| e.statement).collect();
            let text = format!(
                "# {} basis, {} statements\n{}",
                builder.name(),
                basis.len(),
                format_stm(u, &list)
            );
            let entries: Vec<Value> = basis
                .entries()
                .iter()
                .map(|e| {
                    json!({
                        "statement": format_statement(u, &e.statement),
                        "source": provenance(u, e.provenance),
                    })
                })
                .collect();
            Ok(Report::new(
                0,
                text,
                json!({ "kind": builder.name(), "size": basis.len(), "statements": entries }),
            ))
        }
        Command::Recover { table, output, log } => {
            let p = load_table(table)?;
            let out = recover(&p, cli.tol)?;
            let u = p.universe();
            let queries: Vec<Value> = out
                .queries
                .iter()
                .map(|q| {
                    json!({
                        "statement": format_statement(u, &q.statement),
                        "holds": q.holds,
                        "residual": q.residual,
                    })
                })
                .collect();
            let mut text = String::new();
            if *log {
                for q in &out.queries {
                    let _ = writeln!(
                        text,
                        "# {} {} residual={:e}",
                        q.statement.display(u),
                        if q.holds { "holds" } else { "fails" },
                        q.residual
                    );
                }
            }
            match &out.result {
                Ok(t) => {
                    let edg = format_edg(t);
                    let summary = match output {
                        Some(path) => format!("RECOVERED -> {}\n", path.display()),
                        None => String::new(),
                    };
                    text += &deliver(edg.clone(), output.as_deref(), summary)?;
                    Ok(Report::new(
                        0,
                        text,
                        json!({ "result": "RECOVERED", "graph": edg, "queries": queries }),
                    ))
                }
                Err(f) => {
                    let (witness_text, witness) = render_witness(u, &f.witness);
                    let _ = writeln!(text, "FAIL stage={} {witness_text}", f.stage);
                    Ok(Report::new(
                        EXIT_FAIL,
                        text,
                        json!({
                            "result": "FAIL",
                            "stage": f.stage.as_str(),
                            "witness": witness,
                            "queries": queries,
                        }),
                    ))
                }
            }
        }
        Command::SampleTree {
            graph,
            domain,
            latent_domain,
            floor,
            margin,
            retries,
            output,
        } => {
            let t = load_tree(graph)?;
            let cfg = SamplerConfig {
                seed: cli.seed.unwrap_or(0),
                domain: *domain,
                latent_domain: *latent_domain,
                cpt_floor: *floor,
                wellrep_margin: *margin,
                max_retries: *retries,
                ..SamplerConfig::default()
            };
            let p = sample_from_etree(&t, &cfg)?;
            let jpt = format_jpt(&p);
            let summary = format!(
                "sampled {} rows with seed {}\n",
                p.rows(),
                cfg.seed
            );
            let text = deliver(jpt.clone(), output.as_deref(), summary)?;
            Ok(Report::new(0, text, json!({ "seed": cfg.seed, "table": jpt })))
        }
        Command::Gk { k, output } => {
            let gk = build_gk(*k)?;
            let edg = format_edg(&gk.graph);
            let summary = format!(
                "G_{k}: {} vertices, {} edges\n",
                gk.graph.len(),
                gk.graph.edge_count()
            );
            let text = deliver(edg.clone(), output.as_deref(), summary)?;
            Ok(Report::new(0, text, json!({ "k": k, "graph": edg })))
        }
        Command::GkVerify { k } => {
            let r = verify_hardness(*k)?;
            let mut text = String::new();
            let mut checks = Vec::new();
            for c in &r.checks {
                let _ = writeln!(text, "check {}: {} [{}]", c.name, c.status, c.description);
                let (status, detail) = match &c.status {
                    CheckStatus::Passed => ("PASS", None),
                    CheckStatus::Failed(d) => ("FAIL", Some(d)),
                    CheckStatus::Skipped(d) => ("SKIP", Some(d)),
                };
                checks.push(json!({
                    "name": c.name,
                    "description": c.description,
                    "status": status,
                    "detail": detail,
                }));
            }
            let word = if r.passed() { "VERIFIED" } else { "FAIL" };
            let _ = writeln!(text, "{word} k={k} |T|={}", r.t_size);
            Ok(Report::new(
                if r.passed() { 0 } else { EXIT_FAIL },
                text,
                json!({ "result": word, "k": k, "t_size": r.t_size, "checks": checks }),
            ))
        }
        Command::Closure { statements, axioms } => {
            let (u, given) = parse_stm(&read(statements)?)
                .with_context(|| format!("in {}", statements.display()))?;
            let axioms = Registry::axioms().get(axioms)?;
            match closure(&given, &axioms, cli.limit) {
                Ok(cl) => {
                    let all: Vec<Statement> = cl.statements().iter().copied().collect();
                    Ok(Report::new(
                        0,
                        format_stm(&u, &all),
                        json!({
                            "axioms": axioms.name(),
                            "size": all.len(),
                            "statements": all.iter().map(|s| format_statement(&u, s)).collect::<Vec<_>>(),
                        }),
                    ))
                }
                Err(e @ ClosureError::BudgetExceeded { .. }) => Ok(budget_failure(e)),
                Err(e) => Err(e.into()),
            }
        }
        Command::Derive {
            statements,
            target,
            axioms,
        } => {
            let (u, given) = parse_stm(&read(statements)?)
                .with_context(|| format!("in {}", statements.display()))?;
            let target = statement(&u, target)?;
            let axioms = Registry::axioms().get(axioms)?;
            let given = given.into_iter().collect();
            let trace = match derives(&given, &target, &axioms, cli.limit) {
                Ok(t) => t,
                Err(e @ ClosureError::BudgetExceeded { .. }) => return Ok(budget_failure(e)),
                Err(e) => return Err(e.into()),
            };
            let Some(steps) = trace else {
                return Ok(Report::verdict(
                    false,
                    "DERIVABLE",
                    "NOT_DERIVABLE",
                    json!({ "target": format_statement(&u, &target), "axioms": axioms.name() }),
                ));
            };
            let mut text = String::from("DERIVABLE\n");
            let mut json_steps = Vec::new();
            for step in &steps {
                let premises: Vec<String> = step.premises.iter().map(|p| format!("#{p}")).collect();
                let _ = writeln!(
                    text,
                    "#{} {} [{}{}]",
                    step.id,
                    step.statement.display(&u),
                    step.rule.unwrap_or("given"),
                    if premises.is_empty() {
                        String::new()
                    } else {
                        format!(" from {}", premises.join(", "))
                    }
                );
                json_steps.push(json!({
                    "id": step.id,
                    "statement": format_statement(&u, &step.statement),
                    "rule": step.rule.unwrap_or("given"),
                    "premises": step.premises,
                }));
            }
            Ok(Report::new(
                0,
                text,
                json!({
                    "result": "DERIVABLE",
                    "target": format_statement(&u, &target),
                    "axioms": axioms.name(),
                    "steps": json_steps,
                }),
            ))
        }
        Command::Iso { first, second } => {
            let t1 = load_tree(first)?;
            let t2 = load_tree(second)?;
            let iso = etree_isomorphic(&t1, &t2)?;
            Ok(Report::verdict(
                iso,
                "ISOMORPHIC",
                "NOT_ISOMORPHIC",
                json!({ "isomorphic": iso }),
            ))
        }
    }
}

fn budget_failure(e: ClosureError) -> Report {
    Report::new(
        EXIT_FAIL,
        format!("FAIL {e}\n"),
        json!({ "result": "FAIL", "reason": e.to_string() }),
    )
}

fn provenance(u: &Universe, p: Provenance) -> String {
    match p {
        Provenance::Vertex(v) => format!("vertex {}", u.name(v)),
        Provenance::Sigma { vertex, neighbor } => {
            format!("sigma {} -> {}", u.name(vertex), u.name(neighbor))
        }
        Provenance::Gamma { vertex, neighbor } => {
            format!("gamma {} - {}", u.name(vertex), u.name(neighbor))
        }
        Provenance::Branch { vertex, neighbor } => {
            format!("branch {} - {}", u.name(vertex), u.name(neighbor))
        }
    }
}

fn render_witness(u: &Universe, w: &Witness) -> (String, Value) {
    match w {
        Witness::ZeroRow(row) => {
            let parts: Vec<String> = u
                .names()
                .iter()
                .zip(row)
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            (
                format!("row={}", parts.join(",")),
                json!({ "kind": "zero_row", "assignment": row }),
            )
        }
        Witness::Skeleton { edges, components } => {
            let names: Vec<String> = edges
                .iter()
                .map(|&(a, b)| format!("{}-{}", u.name(a), u.name(b)))
                .collect();
            (
                format!("components={components} edges={}", names.join(",")),
                json!({ "kind": "skeleton", "components": components, "edges": names }),
            )
        }
        Witness::Triple(a, b, c) => {
            let names = [u.name(*a), u.name(*b), u.name(*c)];
            (
                format!("triple=({})", names.join(",")),
                json!({ "kind": "triple", "triple": names }),
            )
        }
        Witness::Statement(s, r) => (
            format!("statement=\"{}\" residual={r:e}", s.display(u)),
            json!({ "kind": "statement", "statement": format_statement(u, s), "residual": r }),
        ),
        Witness::Pair(a, b, r) => (
            format!("pair=({},{}) residual={r:e}", u.name(*a), u.name(*b)),
            json!({ "kind": "pair", "pair": [u.name(*a), u.name(*b)], "residual": r }),
        ),
    }
}
