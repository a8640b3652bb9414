//! Flat `key=value` config files. Each key is a long flag of the chosen
//! subcommand; values given on the command line win.

use std::path::Path;

use hboa::Error;

pub fn load(path: &Path) -> Result<Vec<(String, String)>, Error> {
    let text = std::fs::read_to_string(path)?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected key=value, found '{line}'"),
            });
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key.starts_with('-') {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("bad key '{key}'"),
            });
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

/// Splices config pairs in front of the subcommand's own arguments, so
/// explicit flags override them.
pub fn splice(args: Vec<String>, pairs: &[(String, String)]) -> Vec<String> {
    let Some(sub) = args.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return args;
    };
    let mut out: Vec<String> = args[..=sub].to_vec();
    for (k, v) in pairs {
        out.push(format!("--{k}={v}"));
    }
    out.extend_from_slice(&args[sub + 1..]);
    out
}

/// Removes `--config <path>` or `--config=<path>` from the arguments.
pub fn take_config_flag(args: &mut Vec<String>) -> Option<String> {
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--" {
            return None;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            let v = v.to_string();
            args.remove(i);
            return Some(v);
        }
        if a == "--config" && i + 1 < args.len() {
            let v = args.remove(i + 1);
            args.remove(i);
            return Some(v);
        }
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse(Path::new("c"), "seed = 4\n# note\nkappa=1,3,5 # sweep\n\nrts_window=3\n").unwrap();
        assert_eq!(
            p,
            vec![
                ("seed".into(), "4".into()),
                ("kappa".into(), "1,3,5".into()),
                ("rts-window".into(), "3".into())
            ]
        );
    }

    #[test]
    fn missing_equals_is_a_parse_error() {
        assert!(matches!(parse(Path::new("c"), "seed 4\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn config_goes_before_explicit_flags() {
        let args: Vec<String> = ["hboa", "run", "--seed", "9"].iter().map(|s| s.to_string()).collect();
        let out = splice(args, &[("seed".into(), "1".into())]);
        assert_eq!(out, vec!["hboa", "run", "--seed=1", "--seed", "9"]);
    }

    #[test]
    fn config_flag_is_extracted() {
        let mut args: Vec<String> = ["hboa", "--config", "x.cfg", "run"].iter().map(|s| s.to_string()).collect();
        assert_eq!(take_config_flag(&mut args).as_deref(), Some("x.cfg"));
        assert_eq!(args, vec!["hboa", "run"]);
    }
}
