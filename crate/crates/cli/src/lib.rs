//! Scenario runner and conformance suite for the cliffield kernels.

pub mod bundled;
pub mod error;
pub mod registry;
pub mod report;
pub mod runner;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{CliError, Result, EXIT_CHECK_FAILED, EXIT_PASS};
use crate::registry::{Invariant, Module};
use crate::report::{render, Format, Report};
use crate::runner::{run_scenario, Outcome, RunOptions};
use crate::scenario::{CheckSpec, Outputs, Scenario, WittConfig, SPEC_VERSION};

/// Flags shared by `run`, `check` and `dynamics run`.
#[derive(Debug, Clone)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub parallel: bool,
    pub tolerance_scale: f64,
    pub format: Format,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { out: None, seed: 1, parallel: false, tolerance_scale: 1.0, format: Format::Table }
    }
}

impl Flags {
    fn options(&self) -> RunOptions {
        RunOptions { seed: self.seed, tolerance_scale: self.tolerance_scale }
    }
}

fn io_write(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes()).map_err(CliError::io("<stdout>"))
}

/// Load a scenario from a path, falling back to a bundled name.
pub fn resolve_config(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.exists() {
        return Scenario::load(path);
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
    let bare = !arg.contains('/') && !arg.contains('\\');
    match bundled::load(if bare { stem } else { "" }) {
        Some(sc) => sc,
        None => Err(CliError::Io { path: path.to_path_buf(), source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scenario") }),
    }
}

/// Run scenarios, optionally in parallel, merged by name.
pub fn execute(scenarios: &[Scenario], flags: &Flags) -> Result<Vec<Outcome>> {
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Usage(format!("scenario name '{}' appears twice", w[0])));
    }
    let opts = flags.options();
    let results: Vec<Result<Outcome>> =
        if flags.parallel { scenarios.par_iter().map(|s| run_scenario(s, &opts)).collect() } else { scenarios.iter().map(|s| run_scenario(s, &opts)).collect() };
    let mut outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    outcomes.sort_by(|a, b| a.report.scenario.cmp(&b.report.scenario));
    Ok(outcomes)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(CliError::io(parent))?;
        }
    }
    std::fs::write(path, contents).map_err(CliError::io(path))
}

/// Reports as `<name>.report.json`, artifacts by their configured names, timing separately.
fn write_outputs(dir: &Path, outcomes: &[Outcome]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    for o in outcomes {
        let json = serde_json::to_string_pretty(&o.report).expect("report serializes") + "\n";
        write_file(&dir.join(format!("{}.report.json", o.report.scenario)), &json)?;
        for (name, contents) in &o.artifacts {
            write_file(&dir.join(name), contents)?;
        }
    }
    let timing: Vec<_> = outcomes.iter().map(|o| &o.timing).collect();
    write_file(&dir.join("timing.json"), &(serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n"))
}

fn exit_for(reports: &[Report]) -> i32 {
    if reports.iter().all(Report::passed) {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

/// `run CONFIG...`
pub fn cmd_run(configs: &[String], flags: &Flags, out: &mut dyn Write) -> Result<i32> {
    if configs.is_empty() {
        return Err(CliError::Usage("run needs at least one scenario".into()));
    }
    let scenarios = configs.iter().map(|c| resolve_config(c)).collect::<Result<Vec<_>>>()?;
    let outcomes = execute(&scenarios, flags)?;
    let dir = flags.out.clone().unwrap_or_else(|| PathBuf::from("cliffield-out"));
    write_outputs(&dir, &outcomes)?;
    let reports: Vec<Report> = outcomes.into_iter().map(|o| o.report).collect();
    io_write(out, &render(&reports, flags.format))?;
    Ok(exit_for(&reports))
}

/// Invariants matched by a `check` filter.
pub fn select(filter: &str) -> Result<Vec<&'static Invariant>> {
    registry::resolve_filter(filter).ok_or_else(|| CliError::UnknownFilter { filter: filter.to_string(), valid: registry::filter_names().join(", ") })
}

/// `check [FILTER]`: bundled scenarios restricted to the matching invariants.
pub fn cmd_check(filter: &str, flags: &Flags, out: &mut dyn Write) -> Result<i32> {
    let wanted = select(filter)?;
    let mut scenarios = Vec::new();
    for mut sc in bundled::all()? {
        sc.checks.retain(|c| {
            registry::find_invariant(sc.module, &c.name).is_some_and(|inv| wanted.iter().any(|w| w.module == inv.module && w.name == inv.name))
        });
        if !sc.checks.is_empty() {
            sc.outputs = Outputs::default();
            scenarios.push(sc);
        }
    }
    let outcomes = execute(&scenarios, flags)?;
    if let Some(dir) = &flags.out {
        write_outputs(dir, &outcomes)?;
    }
    let reports: Vec<Report> = outcomes.into_iter().map(|o| o.report).collect();
    io_write(out, &render(&reports, flags.format))?;
    Ok(exit_for(&reports))
}

/// `list`: one line per bundled scenario.
pub fn cmd_list(out: &mut dyn Write) -> Result<i32> {
    let mut text = String::new();
    for sc in bundled::all()? {
        let topic = registry::find_topic(&sc.topic).expect("validated");
        text.push_str(&format!("{} → {}: {} [{}]\n", sc.name, topic.key, topic.summary, sc.module.name()));
    }
    io_write(out, &text)?;
    Ok(EXIT_PASS)
}

pub const DESCRIBE_USAGE: &str = "usage: cliffield describe <SCENARIO>\n\nPrints the topic, parameters and checks of a bundled scenario.\nRun `cliffield list` for the available names.\n";

/// `describe [NAME]`
pub fn cmd_describe(name: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let Some(name) = name else {
        io_write(out, DESCRIBE_USAGE)?;
        return Ok(EXIT_PASS);
    };
    let src = bundled::source(name).ok_or_else(|| CliError::UnknownScenario(name.to_string()))?;
    let sc = bundled::load(name).expect("exists")?;
    let topic = registry::find_topic(&sc.topic).expect("validated");
    let mut text = format!("{}\n  module: {}\n  topic: {} ({})\n  {}\n  checks:\n", sc.name, sc.module.name(), topic.key, topic.summary, sc.description);
    for (inv, tol) in sc.resolved_checks() {
        let t = match (inv.tolerance, tol) {
            (registry::Tolerance::Exact, _) => "exact".to_string(),
            (_, Some(t)) | (registry::Tolerance::Float(t), None) => format!("tol {t:e}"),
        };
        text.push_str(&format!("    {} [{t}]: {}\n", inv.name, inv.summary));
    }
    text.push_str("  config:\n");
    for line in src.lines() {
        text.push_str(&format!("    {line}\n"));
    }
    io_write(out, &text)?;
    Ok(EXIT_PASS)
}

/// Parse "p,q".
pub fn parse_signature(s: &str) -> Result<[usize; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [p, q] => match (p.parse(), q.parse()) {
            (Ok(p), Ok(q)) => Ok([p, q]),
            _ => Err(CliError::Usage(format!("signature '{s}' must be two integers p,q"))),
        },
        _ => Err(CliError::Usage(format!("signature '{s}' must look like p,q"))),
    }
}

/// `spinor`: gamma matrices of one ideal as JSON.
pub fn cmd_spinor(cfg: WittConfig, emit: Option<&Path>, flags: &Flags, out: &mut dyn Write) -> Result<i32> {
    let sc = Scenario {
        spec_version: SPEC_VERSION,
        name: "spinor".into(),
        module: Module::Witt,
        topic: "gamma_matrices".into(),
        description: String::new(),
        checks: ["witt_relations", "clifford_relation"].map(|n| CheckSpec { name: n.into(), tolerance: None }).to_vec(),
        outputs: Outputs { gammas: Some("gammas.json".into()), ..Default::default() },
        blade: None,
        witt: Some(cfg),
        grassmann: None,
        weyl: None,
        dynamics: None,
        field: None,
    };
    let o = run_scenario(&sc, &flags.options())?;
    let json = &o.artifacts[0].1;
    match emit {
        Some(path) => {
            write_file(path, json)?;
            io_write(out, &render(std::slice::from_ref(&o.report), flags.format))?;
        }
        None => io_write(out, json)?,
    }
    Ok(exit_for(std::slice::from_ref(&o.report)))
}

fn monomial_label(s: u32) -> String {
    if s == 0 {
        return "1".into();
    }
    (0..32).filter(|k| s >> k & 1 == 1).map(|k| format!("ξ{}", k + 1)).collect()
}

/// `grassmann expand --input FILE`
pub fn cmd_grassmann_expand(input: &Path, format: Format, out: &mut dyn Write) -> Result<i32> {
    let src = std::fs::read_to_string(input).map_err(CliError::io(input))?;
    let f = cliffield::grassmann::GrassmannFunction::from_json(&src)
        .map_err(|e| CliError::Schema { path: input.display().to_string(), message: e.to_string() })?;
    let comps = cliffield::grassmann::expand_components(&f);
    let order = cliffield::graded_lex_subsets(f.n());
    let text = match format {
        Format::Json => {
            let doc = serde_json::json!({
                "n": f.n(),
                "order": order.iter().map(|&s| (0..32).filter(|k| s >> k & 1 == 1).map(|k| k + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "components": comps.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
        Format::Csv => {
            let mut t = String::from("monomial,re,im\n");
            for (s, z) in order.iter().zip(&comps) {
                t.push_str(&format!("{},{},{}\n", monomial_label(*s), z.re, z.im));
            }
            t
        }
        Format::Table => {
            let mut t = format!("{:<12}  {:>14}  {:>14}\n", "monomial", "re", "im");
            for (s, z) in order.iter().zip(&comps) {
                t.push_str(&format!("{:<12}  {:>14.6e}  {:>14.6e}\n", monomial_label(*s), z.re, z.im));
            }
            t
        }
    };
    io_write(out, &text)?;
    Ok(EXIT_PASS)
}

/// `dynamics run CONFIG [--out report.json]`
pub fn cmd_dynamics_run(config: &str, report_path: Option<&Path>, flags: &Flags, out: &mut dyn Write) -> Result<i32> {
    let sc = resolve_config(config)?;
    if sc.module != Module::Dynamics {
        return Err(CliError::Schema { path: config.to_string(), message: format!("module is {}, expected dynamics", sc.module.name()) });
    }
    let o = run_scenario(&sc, &flags.options())?;
    match report_path {
        Some(path) => {
            write_file(path, &(serde_json::to_string_pretty(&o.report).expect("report serializes") + "\n"))?;
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            for (name, contents) in &o.artifacts {
                write_file(&dir.join(name), contents)?;
            }
            io_write(out, &render(std::slice::from_ref(&o.report), flags.format))?;
        }
        None => io_write(out, &render(std::slice::from_ref(&o.report), Format::Json))?,
    }
    Ok(exit_for(std::slice::from_ref(&o.report)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse_and_resolve() {
        let all = bundled::all().unwrap();
        assert_eq!(all.len(), bundled::SOURCES.len());
        for (sc, (name, _)) in all.iter().zip(bundled::SOURCES) {
            assert_eq!(sc.name, *name, "file name and scenario name agree");
            assert!(registry::find_topic(&sc.topic).is_some());
        }
    }

    #[test]
    fn every_invariant_is_exercised_by_a_bundled_scenario() {
        let all = bundled::all().unwrap();
        for inv in registry::INVARIANTS {
            let covered = all.iter().any(|sc| sc.module == inv.module && sc.checks.iter().any(|c| c.name == inv.name));
            assert!(covered, "{} has no bundled scenario", inv.qualified());
        }
    }

    #[test]
    fn every_topic_is_used() {
        let all = bundled::all().unwrap();
        for t in registry::TOPICS {
            assert!(all.iter().any(|sc| sc.topic == t.key), "topic {} unused", t.key);
        }
    }

    #[test]
    fn filters() {
        assert_eq!(select("witt").unwrap().len(), 4);
        assert_eq!(select("field.zero_point").unwrap().len(), 1);
        assert!(select("").unwrap().len() == registry::INVARIANTS.len());
        match select("nonexistent") {
            Err(CliError::UnknownFilter { valid, .. }) => assert!(valid.contains("witt.witt_relations")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn signature_parsing() {
        assert_eq!(parse_signature("1,3").unwrap(), [1, 3]);
        assert!(parse_signature("1").is_err());
        assert!(parse_signature("a,b").is_err());
    }
}
