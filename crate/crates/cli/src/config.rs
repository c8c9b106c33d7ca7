//! Flat `key = value` files supplying flag defaults.
//!
//! Keys are flag names without the leading dashes (`tmax`, `out-dir` or `out_dir`). A key given
//! on the command line wins over the file. `true`/`false` switch boolean flags.

use std::collections::BTreeSet;
use std::path::Path;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() || k.starts_with('-') {
            return Err(format!("line {}: bad key {:?}", n + 1, k));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Flags consumed before the subcommand name (they take a value).
const GLOBAL_WITH_VALUE: [&str; 2] = ["--threads", "--config"];

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if !a.starts_with('-') {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Inserts flags from the `--config` file (if any) right after the subcommand name, skipping
/// keys already present on the command line.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let Some(sub) = subcommand_index(&argv) else { return Ok(argv) };
    let given: BTreeSet<String> = argv[sub + 1..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (k, v) in load(Path::new(&path))? {
        if given.contains(&k) || k == "config" || k == "threads" {
            continue;
        }
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => extra.push(format!("--{k}={v}")),
        }
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}

/// Thread count from the flag, else `PEAKON_THREADS`.
pub fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("PEAKON_THREADS") {
        Ok(s) if !s.trim().is_empty() => {
            s.trim().parse::<usize>().map(Some).map_err(|_| format!("PEAKON_THREADS={s:?} is not a thread count"))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_and_skips_comments() {
        let kv = parse("# sweep\nkappa = 0.1\n\nout_dir= runs/a\n").unwrap();
        assert_eq!(kv, vec![("kappa".into(), "0.1".into()), ("out-dir".into(), "runs/a".into())]);
        assert!(parse("novalue").is_err());
    }

    #[test]
    fn command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.cfg");
        std::fs::write(&p, "kappa = 0.5\ntol = 1e-9\nscan = true\nquiet = false\n").unwrap();
        let a = argv(&format!("peakon --config {} speed --kappa 1", p.display()));
        let m = merge(a).unwrap();
        let tail: Vec<&str> = m[4..].iter().map(String::as_str).collect();
        assert_eq!(tail, vec!["--tol=1e-9", "--scan", "--kappa", "1"]);
    }
}
