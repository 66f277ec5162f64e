// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;

use clap::{Arg, ArgAction, CommandFactory};

use super::{config_error, Cli, CliResult};

/// Parses the flat `key = value` grammar. Keys are normalized to kebab case;
/// a key may appear once.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(config_error(format!("config line {}: expected key = value", n + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(config_error(format!("config line {}: empty key", n + 1)));
        }
        if out.iter().any(|(seen, _)| *seen == key) {
            return Err(config_error(format!("config line {}: duplicate key {key:?}", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn render_config(values: &BTreeMap<String, String>) -> String {
    values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Command-line form of one `key = value` setting.
pub(crate) fn flag_args(arg: &Arg, key: &str, value: &str) -> CliResult<Vec<OsString>> {
    if matches!(arg.get_action(), ArgAction::SetTrue) {
        return match value {
            "true" => Ok(vec![format!("--{key}").into()]),
            "false" => Ok(Vec::new()),
            other => Err(config_error(format!("{key}: expected true or false, got {other:?}"))),
        };
    }
    Ok(vec![format!("--{key}").into(), value.into()])
}

fn given_on_command_line(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().filter_map(|a| a.to_str()).any(|a| {
        a == flag || a.strip_prefix(&flag).is_some_and(|rest| rest.starts_with('='))
    })
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Splices config-file settings into `argv` as flags, skipping any key also
/// given on the command line. Keys known to other subcommands are ignored;
/// keys unknown to all of them are an error.
pub(crate) fn expand(argv: &[OsString]) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(argv) else {
        return Ok(argv.to_vec());
    };
    let Some(sub_name) = argv.get(1).and_then(|s| s.to_str()) else {
        return Ok(argv.to_vec());
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(sub_name) else {
        return Ok(argv.to_vec());
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| config_error(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in parse_config(&text)? {
        if key == "config" {
            return Err(config_error("config files cannot include other config files"));
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            let elsewhere = cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key.as_str())));
            if elsewhere {
                continue;
            }
            return Err(config_error(format!("unknown config key {key:?}")));
        };
        if given_on_command_line(argv, &key) {
            continue;
        }
        injected.extend(flag_args(arg, &key, &value)?);
    }
    let mut out = argv[..2].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let cfg = parse_config("# comment\n\nmin_tx = 5\nses-descending=true\n").unwrap();
        assert_eq!(cfg, vec![("min-tx".into(), "5".into()), ("ses-descending".into(), "true".into())]);
        assert!(parse_config("k\n").is_err());
        assert!(parse_config("a = 1\na = 2\n").is_err());
        assert!(parse_config(" = 1\n").is_err());
    }

    #[test]
    fn render_parses_back() {
        let mut m = BTreeMap::new();
        m.insert("k".to_string(), "10".to_string());
        m.insert("percentiles".to_string(), "20,40".to_string());
        let back = parse_config(&render_config(&m)).unwrap();
        assert_eq!(back.into_iter().collect::<BTreeMap<_, _>>(), m);
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "k = 4\nses-descending = true\nreplicates = 7\nneighborhoods = n.csv\n").unwrap();
        let argv: Vec<OsString> = ["segflow", "mixing", "--config", path.to_str().unwrap(), "--k", "6"]
            .iter()
            .map(OsString::from)
            .collect();
        let out: Vec<String> = expand(&argv).unwrap().iter().map(|s| s.to_string_lossy().into_owned()).collect();
        // `replicates` belongs to other subcommands and is skipped here.
        assert_eq!(
            out,
            ["segflow", "mixing", "--ses-descending", "--neighborhoods", "n.csv", "--config", path.to_str().unwrap(), "--k", "6"]
        );
        fs::write(&path, "bogus-key = 1\n").unwrap();
        assert!(expand(&argv).is_err());
    }
}
