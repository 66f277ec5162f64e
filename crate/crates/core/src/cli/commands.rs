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

use std::fs;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches};
use serde::Serialize;
use serde_json::{json, Value};

use super::config::flag_args;
use super::manifest::{sha256_file, Manifest, ResolvedConfig, MANIFEST_FILE};
use super::*;
use crate::ingest::{
    assign_points_to_neighborhoods, filter_active_customers, infer_home, load_geometry, load_homes,
    load_mentions, load_neighborhoods, load_posts, load_purchases, mentions_to_csv, purchases_to_csv,
    resolve_purchases, CityClock, HomeAssignment, MentionLoad, NeighborhoodTable, NightWindow, PurchaseEvent,
};
use crate::metrics::{diversity_ses_correlation, neighborhood_diversity, pearson, DiversityProfiles, NeighborhoodDiversity};
use crate::models::{
    customer_counts, fit_gravity, null_shuffle_ses, simulate_gravity, store_counts, EpsilonGrid, FitWeights,
    GravityFitOptions, GravityParams,
};
use crate::network::{build_mention_network, build_purchase_network, centroid_distances, InteractionNetwork, NetworkBuild};
use crate::segregation::{
    assign_groups, asymmetry_bias, asymmetry_sweep, assortativity, distance_sweep, extremes_sweep, mixing_matrix,
    mixing_matrix_raw, GroupAssignment, SweepResult, Thresholds,
};
use crate::stats::{jackknife_assortativity, jackknife_sweep, segregation_inequality_report, ReportOptions};
use crate::synth::{generate_city, SynthConfig};

/// Output directory plus the artifacts written so far.
struct Run {
    out: PathBuf,
    written: Vec<String>,
}

impl Run {
    fn new(out: &Path) -> Result<Run> {
        fs::create_dir_all(out).map_err(|source| Error::Output {
            path: out.to_path_buf(),
            source,
        })?;
        Ok(Run {
            out: out.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl AsRef<[u8]>) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, body).map_err(|source| Error::Output { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let body = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, body)
    }

    fn finish(self, resolved: &ResolvedConfig) -> Result<()> {
        Manifest::build(resolved, &self.out, &self.written)?.write(&self.out)
    }
}

/// Parsed inputs shared by the analysis commands.
struct Inputs {
    table: NeighborhoodTable,
    homes: Option<HomeAssignment>,
    purchases: Option<Vec<PurchaseEvent>>,
    mentions: Option<MentionLoad>,
    report: IngestReport,
}

#[derive(Debug, Default, Serialize)]
struct IngestReport {
    neighborhoods: usize,
    homes: Option<HomeReport>,
    purchases: Option<PurchaseReport>,
    mentions: Option<MentionReport>,
}

#[derive(Debug, Default, Serialize)]
struct HomeReport {
    source: &'static str,
    posts: Option<usize>,
    posts_outside_geometry: Option<usize>,
    users_with_home: usize,
    users_without_night_posts: Option<usize>,
}

#[derive(Debug, Default, Serialize)]
struct PurchaseReport {
    records: usize,
    unknown_home: usize,
    unknown_store: usize,
    inactive_dropped: usize,
    retained: usize,
    min_tx: usize,
}

#[derive(Debug, Default, Serialize)]
struct MentionReport {
    loaded: usize,
    self_mentions_dropped: usize,
}

#[derive(Clone, Copy)]
struct Want {
    purchases: bool,
    mentions: bool,
}

fn load_inputs(data: &Data, want: Want) -> Result<Inputs> {
    let table = load_neighborhoods(&data.neighborhoods)?;
    let clock = CityClock::from_name(&data.timezone)?;
    let night = NightWindow::new(data.night_start, data.night_end)?;
    let mut report = IngestReport {
        neighborhoods: table.len(),
        ..IngestReport::default()
    };

    let homes = if let Some(path) = &data.homes {
        let homes = load_homes(path, &table)?;
        report.homes = Some(HomeReport {
            source: "file",
            users_with_home: homes.len(),
            ..HomeReport::default()
        });
        Some(homes)
    } else if let (Some(posts), Some(geometry)) = (&data.posts, &data.geometry) {
        let posts = load_posts(posts, &clock)?;
        let geometry = load_geometry(geometry)?;
        let located = assign_points_to_neighborhoods(&posts, &geometry);
        let inferred = infer_home(&located.located, &clock, night);
        inferred.homes.validate(&table)?;
        report.homes = Some(HomeReport {
            source: "night posts",
            posts: Some(posts.len()),
            posts_outside_geometry: Some(located.dropped),
            users_with_home: inferred.homes.len(),
            users_without_night_posts: Some(inferred.unassigned.len()),
        });
        Some(inferred.homes)
    } else {
        None
    };

    let purchases = match (&data.purchases, want.purchases) {
        (Some(path), true) => {
            let records = load_purchases(path, &clock)?;
            let n = records.len();
            let resolved = resolve_purchases(records, &table, homes.as_ref());
            let active = filter_active_customers(&resolved.events, data.min_tx)?;
            report.purchases = Some(PurchaseReport {
                records: n,
                unknown_home: resolved.unknown_home,
                unknown_store: resolved.unknown_store,
                inactive_dropped: resolved.events.len() - active.len(),
                retained: active.len(),
                min_tx: data.min_tx,
            });
            Some(active)
        }
        _ => None,
    };

    let mentions = match (&data.mentions, want.mentions) {
        (Some(path), true) => {
            let load = load_mentions(path, &clock)?;
            report.mentions = Some(MentionReport {
                loaded: load.events.len(),
                self_mentions_dropped: load.self_mentions_dropped,
            });
            Some(load)
        }
        _ => None,
    };

    Ok(Inputs {
        table,
        homes,
        purchases,
        mentions,
        report,
    })
}

fn wanted(choice: ChannelChoice) -> Want {
    Want {
        purchases: choice != ChannelChoice::Mention,
        mentions: choice != ChannelChoice::Purchase,
    }
}

/// Channels to analyze; an explicitly requested channel must have inputs.
fn channels(choice: ChannelChoice, inputs: &Inputs) -> Result<Vec<Channel>> {
    let purchase = inputs.purchases.is_some();
    let mention = inputs.mentions.is_some() && inputs.homes.is_some();
    let need_purchase = || Error::invalid("purchase channel needs --purchases");
    let need_mention = || Error::invalid("mention channel needs --mentions plus --homes or --posts with --geometry");
    match choice {
        ChannelChoice::Purchase if !purchase => Err(need_purchase()),
        ChannelChoice::Purchase => Ok(vec![Channel::Purchase]),
        ChannelChoice::Mention if !mention => Err(need_mention()),
        ChannelChoice::Mention => Ok(vec![Channel::Mention]),
        ChannelChoice::Both => {
            let mut out = Vec::new();
            if purchase {
                out.push(Channel::Purchase);
            }
            if mention {
                out.push(Channel::Mention);
            }
            if out.is_empty() {
                return Err(Error::invalid("no channel has inputs: give --purchases and/or --mentions"));
            }
            Ok(out)
        }
    }
}

fn raw_network(inputs: &Inputs, channel: Channel) -> Result<NetworkBuild> {
    match channel {
        Channel::Purchase => {
            let events = inputs.purchases.as_ref().ok_or_else(|| Error::invalid("no purchases loaded"))?;
            Ok(build_purchase_network(events, &inputs.table))
        }
        Channel::Mention => {
            let mentions = inputs.mentions.as_ref().ok_or_else(|| Error::invalid("no mentions loaded"))?;
            let homes = inputs.homes.as_ref().ok_or_else(|| Error::invalid("mentions need home assignments"))?;
            Ok(build_mention_network(&mentions.events, homes, &inputs.table))
        }
    }
}

fn weighted_network(inputs: &Inputs, channel: Channel) -> Result<InteractionNetwork> {
    raw_network(inputs, channel)?.network.weighted()
}

/// Loads inputs, groups and the requested channels for an analysis command.
fn prepare(a: &AnalysisArgs) -> Result<(Inputs, GroupAssignment, Vec<Channel>)> {
    let inputs = load_inputs(&a.data, wanted(a.grouping.channel))?;
    let groups = assign_groups(&inputs.table, a.grouping.k, !a.grouping.ses_descending)?;
    let chans = channels(a.grouping.channel, &inputs)?;
    Ok((inputs, groups, chans))
}

fn common(cmd: &Command) -> Option<&Common> {
    Some(match cmd {
        Command::Ingest(a) => &a.common,
        Command::Diversity(a) | Command::Network(a) => &a.common,
        Command::Mixing(a) => &a.analysis.common,
        Command::Sweep(a) => &a.analysis.common,
        Command::Asymmetry(a) => &a.analysis.common,
        Command::Gravity(a) => &a.analysis.common,
        Command::Null(a) => &a.analysis.common,
        Command::Jackknife(a) => &a.analysis.common,
        Command::GiniReport(a) => &a.common,
        Command::Synth(a) => &a.common,
        Command::Rerun(_) => return None,
    })
}

pub(crate) fn execute(cmd: Command, resolved: ResolvedConfig) -> Result<()> {
    let Some(c) = common(&cmd) else {
        let Command::Rerun(a) = cmd else { unreachable!() };
        return rerun(&a);
    };
    let mut run = Run::new(&c.out)?;
    match c.threads {
        Some(0) => return Err(Error::invalid("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| dispatch(&cmd, &mut run))?,
        None => dispatch(&cmd, &mut run)?,
    }
    run.finish(&resolved)
}

fn dispatch(cmd: &Command, run: &mut Run) -> Result<()> {
    match cmd {
        Command::Ingest(a) => cmd_ingest(a, run),
        Command::Diversity(a) => cmd_diversity(a, run),
        Command::Network(a) => cmd_network(a, run),
        Command::Mixing(a) => cmd_mixing(a, run),
        Command::Sweep(a) => cmd_sweep(a, run),
        Command::Asymmetry(a) => cmd_asymmetry(a, run),
        Command::Gravity(a) => cmd_gravity(a, run),
        Command::Null(a) => cmd_null(a, run),
        Command::Jackknife(a) => cmd_jackknife(a, run),
        Command::GiniReport(a) => cmd_gini_report(a, run),
        Command::Synth(a) => cmd_synth(a, run),
        Command::Rerun(_) => unreachable!("handled before dispatch"),
    }
}

fn cmd_ingest(a: &IngestArgs, run: &mut Run) -> Result<()> {
    let inputs = load_inputs(
        &a.data,
        Want {
            purchases: true,
            mentions: true,
        },
    )?;
    run.write("neighborhoods.csv", inputs.table.to_csv()?)?;
    if let Some(homes) = &inputs.homes {
        run.write("homes.csv", homes.to_csv())?;
    }
    if let Some(p) = &inputs.purchases {
        run.write("purchases.csv", purchases_to_csv(p))?;
    }
    if let Some(m) = &inputs.mentions {
        run.write("mentions.csv", mentions_to_csv(&m.events))?;
    }
    run.json("ingest_report.json", &inputs.report)
}

fn ok_or_null<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cmd_diversity(a: &AnalysisArgs, run: &mut Run) -> Result<()> {
    let (inputs, _, chans) = prepare(a)?;
    let mut csv = String::new();
    let mut summary = Vec::new();
    let mut per_channel: Vec<NeighborhoodDiversity> = Vec::new();
    for ch in chans {
        let (profiles, homes) = match ch {
            Channel::Purchase => {
                let events = inputs.purchases.as_deref().unwrap_or_default();
                let homes: HomeAssignment = events
                    .iter()
                    .map(|e| (e.customer_id.clone(), e.customer_home.clone()))
                    .collect();
                (DiversityProfiles::from_purchases(events), homes)
            }
            Channel::Mention => {
                let events = inputs.mentions.as_ref().map(|m| m.events.as_slice()).unwrap_or_default();
                (DiversityProfiles::from_mentions(events), inputs.homes.clone().unwrap_or_default())
            }
        };
        let div = neighborhood_diversity(&profiles, &homes, &inputs.table, ch);
        let table_csv = div.to_csv();
        if csv.is_empty() {
            csv.push_str(&table_csv);
        } else {
            csv.extend(table_csv.lines().skip(1).map(|l| format!("{l}\n")));
        }
        summary.push(json!({
            "channel": ch,
            "individuals": profiles.len(),
            "skipped_without_home": div.skipped_without_home,
            "neighborhoods_defined": div.rows.iter().filter(|r| r.mean_diversity.is_some()).count(),
            "correlation_with_ses": ok_or_null(diversity_ses_correlation(&div, &inputs.table)),
        }));
        per_channel.push(div);
    }
    let cross = match per_channel.as_slice() {
        [p, m] => {
            let (x, y): (Vec<f64>, Vec<f64>) = p
                .means()
                .into_iter()
                .zip(m.means())
                .filter_map(|(a, b)| Some((a?, b?)))
                .unzip();
            Some(ok_or_null(pearson(&x, &y, None)))
        }
        _ => None,
    };
    run.write("diversity.csv", csv)?;
    run.json("diversity_summary.json", &json!({ "channels": summary, "cross_channel_correlation": cross }))
}

fn cmd_network(a: &AnalysisArgs, run: &mut Run) -> Result<()> {
    let (inputs, _, chans) = prepare(a)?;
    for ch in chans {
        let build = raw_network(&inputs, ch)?;
        let weighted = build.network.weighted()?;
        run.write(&format!("network_{ch}_raw.csv"), build.network.to_edge_csv())?;
        run.write(&format!("network_{ch}_weighted.csv"), weighted.to_edge_csv())?;
        run.json(
            &format!("network_{ch}.json"),
            &json!({
                "nodes": build.network.ids(),
                "channel": ch,
                "weightings": [build.network.weighting(), weighted.weighting()],
                "dropped_events": build.dropped,
                "raw_total": build.network.total(),
                "nonzero_entries": build.network.nonzero_count(),
                "sampled_users": build.network.users(),
            }),
        )?;
    }
    Ok(())
}

fn cmd_mixing(a: &MixingArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    let mut summary = serde_json::Map::new();
    for ch in chans {
        let mix = if a.raw_mixing {
            mixing_matrix_raw(&raw_network(&inputs, ch)?.network, &groups)?
        } else {
            mixing_matrix(&weighted_network(&inputs, ch)?, &groups)?
        };
        let (stochastic, has_mass) = mix.stochastic();
        run.write(&format!("mixing_{ch}_raw.csv"), mix.to_grid_csv(mix.raw()))?;
        run.write(&format!("mixing_{ch}_stochastic.csv"), mix.to_grid_csv(&stochastic))?;
        run.write(&format!("mixing_{ch}_normalized.csv"), mix.to_grid_csv(&mix.normalized()?))?;
        summary.insert(
            ch.to_string(),
            json!({
                "assortativity": ok_or_null(assortativity(&mix)),
                "asymmetry_bias": ok_or_null(asymmetry_bias(&mix)),
                "total_mass": mix.total(),
                "groups_without_outflow": has_mass.iter().enumerate().filter(|(_, m)| !**m).map(|(g, _)| g + 1).collect::<Vec<_>>(),
                "weighting": if a.raw_mixing { "raw" } else { "population_weighted" },
            }),
        );
    }
    run.json("mixing_summary.json", &summary)
}

fn resampled<F>(net: &InteractionNetwork, r: &Resampling, seed: u64, sweep: F) -> Result<SweepResult>
where
    F: Fn(&InteractionNetwork) -> Result<SweepResult> + Sync,
{
    if r.jackknife_replicates == 0 {
        sweep(net)
    } else {
        jackknife_sweep(net, r.removal_fraction, r.jackknife_replicates, seed, sweep)
    }
}

fn cmd_sweep(a: &SweepArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    let seed = a.analysis.common.seed;
    let dist = centroid_distances(&inputs.table);
    let thresholds = match &a.km {
        Some(km) => Thresholds::Km(km.clone()),
        None => Thresholds::Percentiles(a.percentiles.clone()),
    };
    for ch in chans {
        let net = weighted_network(&inputs, ch)?;
        if a.kind != SweepChoice::Distance {
            let res = resampled(&net, &a.resampling, seed, |n| {
                extremes_sweep(&mixing_matrix(n, &groups)?, a.relabel)
            })?;
            run.write(&format!("sweep_extremes_{ch}.csv"), res.to_csv())?;
            run.json(&format!("sweep_extremes_{ch}.json"), &res)?;
        }
        if a.kind != SweepChoice::Extremes {
            let res = resampled(&net, &a.resampling, seed, |n| distance_sweep(n, &groups, &dist, &thresholds))?;
            run.write(&format!("sweep_distance_{ch}.csv"), res.to_csv())?;
            run.json(&format!("sweep_distance_{ch}.json"), &res)?;
        }
    }
    Ok(())
}

fn cmd_asymmetry(a: &AsymmetryArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    let seed = a.analysis.common.seed;
    for ch in chans {
        let net = weighted_network(&inputs, ch)?;
        let res = resampled(&net, &a.resampling, seed, |n| asymmetry_sweep(&mixing_matrix(n, &groups)?))?;
        run.write(&format!("asymmetry_{ch}.csv"), res.to_csv())?;
        run.json(&format!("asymmetry_{ch}.json"), &res)?;
        if a.null_replicates > 0 {
            let nd = null_shuffle_ses(&net, &inputs.table, &groups, a.null_replicates, seed)?;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            let mut csv = String::from("step,param,bias_null_mean,bias_null_std\n");
            for (s, step) in nd.steps.iter().zip(&res.steps) {
                csv.push_str(&format!("{},{},{},{}\n", s.step, step.param, opt(s.bias_mean), opt(s.bias_std)));
            }
            run.write(&format!("asymmetry_null_{ch}.csv"), csv)?;
        }
    }
    Ok(())
}

fn fit_options<'a>(fit: &GravityFit, weights: FitWeights<'a>) -> GravityFitOptions<'a> {
    GravityFitOptions {
        epsilon_grid: EpsilonGrid {
            min: fit.epsilon_min,
            max: fit.epsilon_max,
            step: fit.epsilon_step,
        },
        refine_epsilon: !fit.no_refine,
        linear_distance: fit.linear_distance,
        weights,
        ..GravityFitOptions::default()
    }
}

/// Origin and destination sizes entering the gravity model.
fn gravity_counts(inputs: &Inputs, channel: Channel) -> (Vec<f64>, Vec<f64>) {
    match channel {
        Channel::Purchase => {
            let events = inputs.purchases.as_deref().unwrap_or_default();
            (customer_counts(events, &inputs.table), store_counts(events, &inputs.table))
        }
        Channel::Mention => {
            let users = inputs.homes.as_ref().map(|h| h.counts(&inputs.table)).unwrap_or_default();
            (users.clone(), users)
        }
    }
}

fn fit_channel(inputs: &Inputs, channel: Channel, fit: &GravityFit) -> Result<(GravityParams, InteractionNetwork)> {
    let raw = raw_network(inputs, channel)?.network;
    let dist = centroid_distances(&inputs.table);
    let (origin, dest) = gravity_counts(inputs, channel);
    let weighted = raw.weighted()?;
    let weights = match fit.fit_weights {
        FitWeightChoice::Observed => FitWeights::Observed,
        FitWeightChoice::Weighted => FitWeights::External(&weighted),
    };
    let params = fit_gravity(&raw, &dist, &origin, &dest, &fit_options(fit, weights))?;
    let simulated = simulate_gravity(&params, &dist, &origin, &dest, &raw)?;
    Ok((params, simulated))
}

fn cmd_gravity(a: &GravityArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    let mut summary = serde_json::Map::new();
    for ch in chans {
        let (params, simulated) = fit_channel(&inputs, ch, &a.fit)?;
        let r_sim = simulated.weighted().and_then(|n| assortativity(&mixing_matrix(&n, &groups)?));
        let r_emp = weighted_network(&inputs, ch).and_then(|n| assortativity(&mixing_matrix(&n, &groups)?));
        run.json(&format!("gravity_{ch}.json"), &params)?;
        run.write(&format!("gravity_{ch}_simulated.csv"), simulated.to_edge_csv())?;
        summary.insert(
            ch.to_string(),
            json!({
                "empirical_assortativity": ok_or_null(r_emp),
                "simulated_assortativity": ok_or_null(r_sim),
            }),
        );
    }
    run.json("gravity_summary.json", &summary)
}

fn cmd_null(a: &NullArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    for ch in chans {
        let net = weighted_network(&inputs, ch)?;
        let mix = mixing_matrix(&net, &groups)?;
        let nd = null_shuffle_ses(&net, &inputs.table, &groups, a.replicates, a.analysis.common.seed)?;
        run.write(&format!("null_{ch}.csv"), nd.to_csv())?;
        run.json(
            &format!("null_{ch}.json"),
            &json!({
                "observed": {
                    "assortativity": ok_or_null(assortativity(&mix)),
                    "asymmetry_bias": asymmetry_bias(&mix)?,
                },
                "replicates": a.replicates,
                "r_mean": nd.r_mean,
                "r_std": nd.r_std,
                "bias_mean": nd.bias_mean,
                "bias_std": nd.bias_std,
                "discarded": nd.discarded,
                "steps": nd.steps,
            }),
        )?;
    }
    Ok(())
}

fn cmd_jackknife(a: &JackknifeArgs, run: &mut Run) -> Result<()> {
    let (inputs, groups, chans) = prepare(&a.analysis)?;
    for ch in chans {
        let net = weighted_network(&inputs, ch)?;
        let est = jackknife_assortativity(&net, &groups, a.removal_fraction, a.replicates, a.analysis.common.seed)?;
        let mut csv = String::from("replicate,statistic,value\n");
        for (i, v) in est.replicates.iter().enumerate() {
            csv.push_str(&format!("{i},assortativity,{v}\n"));
        }
        run.write(&format!("jackknife_{ch}.csv"), csv)?;
        run.json(
            &format!("jackknife_{ch}.json"),
            &json!({
                "point": est.point,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "std": est.std,
                "replicates": est.replicate_count(),
                "discarded": est.discarded,
                "removal_fraction": est.removal_fraction,
            }),
        )?;
    }
    Ok(())
}

fn cmd_gini_report(a: &GiniArgs, run: &mut Run) -> Result<()> {
    let inputs = load_inputs(
        &a.data,
        Want {
            purchases: true,
            mentions: false,
        },
    )?;
    let Some(events) = inputs.purchases.as_deref() else {
        return Err(Error::invalid("gini-report needs --purchases"));
    };
    let groups = assign_groups(&inputs.table, a.k, !a.ses_descending)?;
    let params = match &a.gravity_params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Input {
                path: path.clone(),
                source,
            })?;
            let p: GravityParams = serde_json::from_str(&text)?;
            if p.channel != Channel::Purchase {
                return Err(Error::invalid("gini-report needs purchase gravity parameters"));
            }
            p
        }
        None => fit_channel(&inputs, Channel::Purchase, &a.fit)?.0,
    };
    let opts = ReportOptions {
        fractions: a.fractions.clone(),
        replicates: a.replicates,
        seed: a.common.seed,
    };
    let dist = centroid_distances(&inputs.table);
    let report = segregation_inequality_report(events, &inputs.table, &groups, &params, &dist, &opts)?;
    run.write("gini_report.csv", report.to_csv())?;
    run.write("gini_report_storeful.csv", report.to_csv_storeful())?;
    run.json("gini_report.json", &json!({ "gravity": params, "rows": report.rows }))
}

fn cmd_synth(a: &SynthArgs, run: &mut Run) -> Result<()> {
    let mut cfg = SynthConfig::preset(&a.preset, a.common.seed)?;
    if let Some(n) = a.n_neighborhoods {
        cfg.n_neighborhoods = n;
    }
    if let Some(v) = a.purchase_events {
        cfg.purchase_events = v;
    }
    if let Some(v) = a.mention_events {
        cfg.mention_events = v;
    }
    if let Some(v) = a.homophily {
        cfg.homophily = v;
    }
    if let Some(v) = a.tilt {
        cfg.tilt = v;
    }
    if let Some(v) = a.exploration_gradient {
        cfg.exploration_gradient = v;
    }
    let city = generate_city(&cfg)?;
    run.written.extend(city.write_to(&run.out)?);
    Ok(())
}

/// Rebuilds the argument vector of a recorded run.
fn manifest_args(m: &Manifest, out: Option<&Path>) -> Result<Vec<std::ffi::OsString>> {
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(&m.command)
        .filter(|_| m.command != "rerun")
        .ok_or_else(|| Error::Config(format!("manifest names unknown command {:?}", m.command)))?;
    let mut argv: Vec<std::ffi::OsString> = vec!["segflow".into(), m.command.clone().into()];
    for (key, value) in &m.config {
        if key == "out" && out.is_some() {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::Config(format!("manifest key {key:?} unknown to {}", m.command)))?;
        argv.extend(flag_args(arg, key, value)?);
    }
    if let Some(out) = out {
        argv.push("--out".into());
        argv.push(out.as_os_str().to_owned());
    }
    Ok(argv)
}

fn rerun(a: &RerunArgs) -> Result<()> {
    let recorded = Manifest::load(&a.manifest)?;
    for input in &recorded.inputs {
        if sha256_file(Path::new(&input.path))? != input.sha256 {
            return Err(Error::invalid(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let argv = manifest_args(&recorded, a.out.as_deref())?;
    let matches = Cli::command()
        .try_get_matches_from(&argv)
        .map_err(|e| Error::Config(e.to_string()))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Error::Config(e.to_string()))?;
    let resolved = super::manifest::resolved_config(&matches);
    let out = PathBuf::from(&resolved.values["out"]);
    execute(cli.command, resolved)?;
    if a.verify {
        let fresh = Manifest::load(&out.join(MANIFEST_FILE))?;
        if fresh.outputs != recorded.outputs {
            let differing: Vec<&str> = fresh
                .outputs
                .iter()
                .filter(|f| !recorded.outputs.contains(f))
                .map(|f| f.path.as_str())
                .collect();
            return Err(Error::Config(format!("outputs differ from the recorded run: {}", differing.join(", "))));
        }
    }
    Ok(())
}
