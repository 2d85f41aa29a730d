//! Reading inputs, with the file name in every diagnostic.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use regtree::model::alphabet::RankedAlphabet;
use regtree::model::expr::from_expression;
use regtree::model::json::{system_from_json, system_to_doc, ts_from_doc, TsDoc};
use regtree::model::ts::decode_ts;
use regtree::model::{SetSystem, Sym, TransitionSystem};
use regtree::ya::{shipped, Presentation};

pub fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("stdin");
    }
    std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

pub fn json_error(path: &Path, e: serde_json::Error) -> anyhow::Error {
    anyhow::anyhow!("{}:{}:{}: {e}", path.display(), e.line(), e.column())
}

/// A JSON system document, or an expression such as `a2(x1, b + c)`.
pub fn load_system(path: &Path, alphabet: Option<&RankedAlphabet>) -> Result<SetSystem<Sym>> {
    let text = read_input(path)?;
    let parsed = if text.trim_start().starts_with('{') { system_from_json(&text, alphabet) } else { from_expression(text.trim(), alphabet) };
    parsed.with_context(|| path.display().to_string())
}

/// A transition-system document (`states`, `initial`, `transitions`) or a system
/// over valuation symbols.
pub fn load_ts(path: &Path) -> Result<TransitionSystem> {
    let text = read_input(path)?;
    let value: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) if !text.trim_start().starts_with('{') => return Ok(decode_ts(&load_system(path, None)?)?),
        Err(e) => return Err(json_error(path, e)),
    };
    if value.get("states").is_some() {
        let doc: TsDoc = serde_json::from_value(value).with_context(|| path.display().to_string())?;
        return ts_from_doc(&doc).with_context(|| path.display().to_string());
    }
    decode_ts(&load_system(path, None)?).with_context(|| path.display().to_string())
}

/// A shipped presentation by name; `avoid-ts` or `avoid-ts:N` is the transition-system
/// variant for out-degrees up to N (3 by default).
pub fn shipped_presentation(name: &str) -> Result<Presentation> {
    if let Some(rest) = name.strip_prefix("avoid-ts") {
        let n = match rest.strip_prefix(':') {
            Some(n) => n.parse().with_context(|| format!("{name}: bad degree"))?,
            None if rest.is_empty() => 3,
            None => bail!("unknown presentation `{name}`"),
        };
        return Ok(shipped::avoid_ts(n));
    }
    match shipped::by_name(name) {
        Some(p) => Ok(p),
        None => bail!("{name}: no such file, and not a shipped presentation ({}, avoid-ts[:N])", shipped::NAMES.join(", ")),
    }
}

/// A presentation document, or the name of a shipped presentation.
pub fn load_presentation(arg: &str) -> Result<Presentation> {
    let path = Path::new(arg);
    if path.exists() {
        return Presentation::from_json(&read_input(path)?).with_context(|| arg.to_string());
    }
    shipped_presentation(arg)
}

/// `name:rank,name:rank,...`
pub fn parse_alphabet(text: &str) -> Result<RankedAlphabet> {
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((name, rank)) = item.split_once(':') else {
            bail!("alphabet entry `{item}` is not name:rank");
        };
        let rank: usize = rank.trim().parse().with_context(|| format!("alphabet entry `{item}`: bad rank"))?;
        pairs.push(Sym::new(name.trim(), rank));
    }
    Ok(RankedAlphabet::new(pairs)?)
}

/// Target vertex ids, comma separated, in the order of the source vertices.
pub fn parse_map(text: &str, from: &SetSystem<Sym>, to: &SetSystem<Sym>) -> Result<Vec<usize>> {
    let ids: Vec<&str> = text.split(',').map(str::trim).collect();
    if ids.len() != from.len() {
        bail!("map lists {} targets for {} source vertices", ids.len(), from.len());
    }
    ids.iter().map(|id| to.index_of(id).with_context(|| format!("map: no vertex `{id}` in the target"))).collect()
}

pub fn id_map(from: &SetSystem<Sym>, to: &SetSystem<Sym>, m: &[usize]) -> serde_json::Map<String, Value> {
    from.vertices.iter().zip(m).map(|(v, &w)| (v.id.clone(), Value::String(to.vertices[w].id.clone()))).collect()
}

pub fn doc(s: &SetSystem<Sym>) -> Value {
    serde_json::to_value(system_to_doc(s)).expect("serializable")
}

/// Worker count: available parallelism, capped by `REGTREE_WORKERS`.
pub fn workers() -> Result<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("REGTREE_WORKERS") {
        Err(_) => Ok(available),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n.min(available)),
            _ => bail!("REGTREE_WORKERS must be a positive integer, got `{v}`"),
        },
    }
}

/// Map in parallel; results come back in input order whatever the worker count.
pub fn par_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<R>> = std::iter::repeat_with(|| None).take(items.len()).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> =
            (0..workers).map(|k| scope.spawn(move || items.iter().enumerate().skip(k).step_by(workers).map(|(i, x)| (i, f(x))).collect::<Vec<_>>())).collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}
