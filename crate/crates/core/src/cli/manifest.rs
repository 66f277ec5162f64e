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
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgMatches, CommandFactory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::render_config;
use super::Cli;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RUN_CONFIG_FILE: &str = "run_config.txt";

/// Config keys naming input files.
const INPUT_KEYS: [&str; 7] = ["neighborhoods", "purchases", "mentions", "posts", "geometry", "homes", "gravity-params"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved settings, defaults included, keyed by long flag name.
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ResolvedConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

/// Every argument value clap ended up with (command line, config, env or
/// default), minus `config` itself.
pub(crate) fn resolved_config(matches: &ArgMatches) -> ResolvedConfig {
    let Some((name, sub)) = matches.subcommand() else {
        return ResolvedConfig {
            command: String::new(),
            values: BTreeMap::new(),
        };
    };
    let cmd = Cli::command();
    let def = cmd.find_subcommand(name).expect("matched subcommand exists");
    let mut values = BTreeMap::new();
    for arg in def.get_arguments() {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" || long == "help" || long == "version" {
            continue;
        }
        if let Some(raw) = sub.get_raw(arg.get_id().as_str()) {
            let joined: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            values.insert(long.to_string(), joined.join(","));
        }
    }
    ResolvedConfig {
        command: name.to_string(),
        values,
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Input {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub(crate) fn build(resolved: &ResolvedConfig, out: &Path, outputs: &[String]) -> Result<Manifest> {
        let mut inputs = Vec::new();
        for key in INPUT_KEYS {
            if let Some(p) = resolved.values.get(key) {
                inputs.push(FileDigest {
                    path: p.clone(),
                    sha256: sha256_file(Path::new(p))?,
                });
            }
        }
        let mut names = outputs.to_vec();
        names.sort();
        names.dedup();
        let mut digests = Vec::new();
        for name in names {
            digests.push(FileDigest {
                sha256: sha256_file(&out.join(&name))?,
                path: name,
            });
        }
        Ok(Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: resolved.command.clone(),
            config: resolved.values.clone(),
            inputs,
            outputs: digests,
        })
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).map_err(|source| Error::Input {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Writes the manifest and a config-file copy of the settings.
    pub(crate) fn write(&self, out: &Path) -> Result<()> {
        let io = |path: PathBuf| move |source| Error::Output { path, source };
        let body = serde_json::to_string_pretty(self)? + "\n";
        fs::write(out.join(MANIFEST_FILE), body).map_err(io(out.join(MANIFEST_FILE)))?;
        let config = format!("# segflow {}\n{}", self.command, render_config(&self.config));
        fs::write(out.join(RUN_CONFIG_FILE), config).map_err(io(out.join(RUN_CONFIG_FILE)))
    }
}
