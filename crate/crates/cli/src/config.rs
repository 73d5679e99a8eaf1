//! Flat `key=value` config files expanded into command-line flags.

use std::path::Path;

use mprep::{Error, Result};

/// Flags that take no value; `key=true` enables them and `key=false` leaves them off.
pub const SWITCHES: [&str; 5] = ["incomplete", "mpo", "ising", "aklt-deformed", "quiet"];

/// Parses `key=value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value, got '{line}'", no + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse(format!("config line {}: invalid key '{}'", no + 1, k.trim())));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_present(args: &[String], key: &str) -> bool {
    let long = format!("--{key}");
    args.iter().any(|a| a == &long || a.starts_with(&format!("{long}=")))
}

/// Removes `--config PATH` from `args` and appends the file's settings for every key not
/// already given on the command line.
pub fn inject_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err(Error::Parse("--config needs a path".into()));
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| Error::Parse(format!("reading config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (key, value) in parse_config(&text)? {
        if flag_present(&args, &key) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => return Err(Error::Parse(format!("config key '{key}' expects true or false, got '{value}'"))),
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }
    args.extend(extra);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_comments_and_normalizes_keys() {
        let kv = parse_config("# c\n\nseed = 7\n--n=6\nbeta_grid=0:1:0.5\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("seed".into(), "7".into()),
                ("n".into(), "6".into()),
                ("beta-grid".into(), "0:1:0.5".into())
            ]
        );
        assert!(parse_config("novalue").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = std::env::temp_dir().join(format!("mprep-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        std::fs::write(&p, "seed=1\nn=4\nincomplete=true\nmpo=false\n").unwrap();
        let args = strings(&["mprep", "prepare", "--config", p.to_str().unwrap(), "--seed", "9"]);
        let out = inject_config(args).unwrap();
        assert_eq!(out, strings(&["mprep", "prepare", "--seed", "9", "--n=4", "--incomplete"]));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
