//! Flat `key = value` run manifests. Keys are long option names without the
//! leading dashes; `command` names the subcommand. Values from the file are
//! spliced into the argument list unless the same flag was given explicitly.

use std::ffi::OsString;
use std::path::Path;

pub const COMMANDS: &[&str] = &["evolve", "sweep", "td", "bound", "check"];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {raw:?}", n + 1))?;
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(format!("config line {}: bad key {key:?}", n + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn flag_given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Removes `--config PATH` from `argv` and merges the file's entries.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut args: Vec<String> = argv
        .into_iter()
        .map(|a| a.into_string().map_err(|a| format!("argument is not valid UTF-8: {a:?}")))
        .collect::<Result<_, _>>()?;

    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file path".into());
            }
            path = Some(args[i + 1].clone());
            args.drain(i..i + 2);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args.into_iter().map(OsString::from).collect());
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse(&text)?;

    let mut cmd_pos = args.iter().position(|a| COMMANDS.contains(&a.as_str()));
    if cmd_pos.is_none() {
        if let Some((_, cmd)) = entries.iter().find(|(k, _)| k == "command") {
            args.insert(1, cmd.clone());
            cmd_pos = Some(1);
        }
    }
    let Some(pos) = cmd_pos else {
        return Err("no subcommand on the command line or in the config file".into());
    };
    let mut extra = Vec::new();
    for (key, value) in entries.iter().filter(|(k, _)| k != "command") {
        if !flag_given(&args, key) {
            extra.push(format!("--{key}={value}"));
        }
    }
    args.splice(pos + 1..pos + 1, extra);
    Ok(args.into_iter().map(OsString::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_blanks() {
        let e = parse("# run\n\na = 1\nt-max=3 # seconds\n").unwrap();
        assert_eq!(e, vec![("a".into(), "1".into()), ("t-max".into(), "3".into())]);
        assert!(parse("oops\n").is_err());
        assert!(parse("=3\n").is_err());
    }

    #[test]
    fn flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "command = td\na = 0.5\ngamma-rate = 2\n").unwrap();
        let p = path.to_str().unwrap();
        let out = expand(os(&["esdkit", "--config", p, "--a", "1"])).unwrap();
        let out: Vec<String> = out.into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(out, ["esdkit", "td", "--gamma-rate=2", "--a", "1"]);
    }

    #[test]
    fn no_config_is_identity() {
        let v = os(&["esdkit", "check"]);
        assert_eq!(expand(v.clone()).unwrap(), v);
    }
}
