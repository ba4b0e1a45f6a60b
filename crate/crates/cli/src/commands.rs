use std::io::{BufWriter, Write};
use std::path::PathBuf;

use indexscope_core::graphnet::{build_graph, mst, theta_sweep, SweepRow};
use indexscope_core::mfdfa::{
    bmfm_fit, bmfm_fit_with, default_a_grid, mf_report, mfdfa, BmfmLibrary, FitMetric, MfdfaConfig,
    SurrogateSpec,
};
use indexscope_core::panel::{
    align, load_raw, mean_volatility, to_returns, volatility, write_panel, write_raw_wide,
    AlignReport, LoadWarning, PanelFormat, DEFAULT_CLOSED_FRACTION_MAX,
};
use indexscope_core::spectra::{
    correlation, eigendecompose, mp_bounds, mp_compare, sliding_spectra,
};
use indexscope_core::{CorrMatrix, DateRange, PricePanel, ReturnPanel};
use log::{info, warn};

use crate::config::{InputConfig, RunConfig};
use crate::demo;
use crate::error::{CliError, Result};
use crate::manifest::{num, OutDir, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Rmt,
    Network,
    Mfdfa,
    Demo,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Rmt => "rmt",
            Command::Network => "network",
            Command::Mfdfa => "mfdfa",
            Command::Demo => "demo",
            Command::Report => "report",
        }
    }
}

/// Aligned panel and returns shared by every analysis stage.
pub struct Prepared {
    pub input: PathBuf,
    pub warnings: Vec<LoadWarning>,
    pub panel: PricePanel,
    pub report: AlignReport,
    pub returns: ReturnPanel,
}

pub fn prepare(input: &InputConfig) -> Result<Prepared> {
    let loaded = load_raw(&input.path, input.format)?;
    for w in &loaded.warnings {
        warn!("{w}");
    }
    let mut series = loaded.series;
    if !input.labels.is_empty() {
        series = input
            .labels
            .iter()
            .map(|l| {
                series
                    .iter()
                    .find(|s| &s.label == l)
                    .cloned()
                    .ok_or_else(|| CliError::Config(format!("label `{l}` is not in the input")))
            })
            .collect::<Result<Vec<_>>>()?;
    }
    let (panel, report) = align(&series, input.closed_fraction_max)?;
    let returns = to_returns(&panel)?;
    info!(
        "{} indices, {} aligned dates, {} removed, {} filled",
        panel.n_indices(),
        panel.n_dates(),
        report.removed.len(),
        report.total_filled()
    );
    Ok(Prepared {
        input: input.path.clone(),
        warnings: loaded.warnings,
        panel,
        report,
        returns,
    })
}

/// Returns inside `range`, with moments recomputed on the slice.
pub fn period_returns(
    returns: &ReturnPanel,
    name: &str,
    range: Option<&DateRange>,
) -> Result<ReturnPanel> {
    let Some(range) = range else {
        return Ok(returns.clone());
    };
    let cols = range.select(returns.dates());
    if cols.len() < 2 {
        return Err(CliError::Config(format!(
            "period `{name}` ({}..{}) holds {} returns",
            range.start,
            range.end,
            cols.len()
        )));
    }
    Ok(returns.slice(cols)?)
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn ingest(prep: &Prepared, out: &mut OutDir) -> Result<()> {
    let path = out.path("ingest/panel.csv")?;
    let mask = write_panel(&prep.panel, &path)?;
    out.record("ingest/panel.csv");
    let mask_rel = format!(
        "ingest/{}",
        mask.file_name().expect("mask file name").to_string_lossy()
    );
    out.record(&mask_rel);
    out.csv(
        "ingest/removed_dates.csv",
        &["date", "closed"],
        prep.report
            .removed
            .iter()
            .map(|r| vec![r.date.to_string(), r.closed.to_string()]),
    )?;
    let filled: Vec<usize> = prep
        .panel
        .fill_mask()
        .iter()
        .map(|row| row.iter().filter(|&&f| f).count())
        .collect();
    out.csv(
        "ingest/fills.csv",
        &["label", "filled"],
        prep.panel
            .labels()
            .iter()
            .zip(&filled)
            .map(|(l, f)| vec![l.clone(), f.to_string()]),
    )?;
    out.csv(
        "ingest/load_warnings.csv",
        &["line", "label", "date", "value", "reason"],
        prep.warnings.iter().map(|w| {
            vec![
                w.line.to_string(),
                w.label.clone(),
                w.date.to_string(),
                w.value.clone(),
                w.reason.to_string(),
            ]
        }),
    )?;
    out.csv(
        "ingest/summary.csv",
        &[
            "indices",
            "union_dates",
            "aligned_dates",
            "removed_dates",
            "filled",
            "returns",
        ],
        [vec![
            prep.panel.n_indices().to_string(),
            prep.report.union_dates.to_string(),
            prep.panel.n_dates().to_string(),
            prep.report.removed.len().to_string(),
            prep.report.total_filled().to_string(),
            prep.returns.len().to_string(),
        ]],
    )?;
    Ok(())
}

pub fn rmt(
    cfg: &RunConfig,
    prep: &Prepared,
    periods: &[(String, Option<DateRange>)],
    out: &mut OutDir,
) -> Result<()> {
    let sc = &cfg.spectra;
    let mut summary = Vec::new();
    for (name, range) in periods {
        let ret = period_returns(&prep.returns, name, range.as_ref())?;
        let dir = format!("rmt/{}", file_stem(name));
        let labels = ret.labels().to_vec();

        let sliding = sliding_spectra(&ret, sc.window, sc.step)?;
        out.csv(
            &format!("{dir}/windows.csv"),
            &[
                "window", "end_date", "l1", "l2", "l3", "l_min", "ipr_last", "ci",
            ],
            sliding.traces.iter().map(|w| {
                let l = |k: usize| w.largest.get(k).map_or(String::new(), |v| num(*v));
                vec![
                    w.window_index.to_string(),
                    w.end_date.to_string(),
                    l(0),
                    l(1),
                    l(2),
                    num(w.smallest),
                    num(w.ipr_last),
                    num(w.ci),
                ]
            }),
        )?;
        out.csv(
            &format!("{dir}/window_contributions.csv"),
            &["window", "label", "u", "S_m", "X_m"],
            sliding.traces.iter().flat_map(|w| {
                labels.iter().enumerate().map(move |(m, l)| {
                    vec![
                        w.window_index.to_string(),
                        l.clone(),
                        num(w.top_vector[m]),
                        num(w.mean_abs_corr[m]),
                        num(w.weighted[m]),
                    ]
                })
            }),
        )?;
        out.csv(
            &format!("{dir}/skipped_windows.csv"),
            &["window", "start_date", "reason"],
            sliding.skipped.iter().map(|s| {
                vec![
                    s.window_index.to_string(),
                    s.start_date.to_string(),
                    s.reason.clone(),
                ]
            }),
        )?;
        let vol = mean_volatility(&ret, sc.window, sc.step)?;
        out.csv(
            &format!("{dir}/volatility.csv"),
            &["window", "end_date", "mean_volatility"],
            vol.values
                .iter()
                .enumerate()
                .map(|(k, (d, v))| vec![k.to_string(), d.to_string(), num(*v)]),
        )?;

        let c = correlation(&ret, None)?;
        write_matrix(out, &format!("{dir}/correlation.csv"), &c)?;
        let spec = eigendecompose(&c)?;
        let n = spec.dim();
        out.csv(
            &format!("{dir}/eigenvalues.csv"),
            &["rank", "lambda", "ipr"],
            (0..n).rev().enumerate().map(|(rank, k)| {
                vec![
                    (rank + 1).to_string(),
                    num(spec.eigenvalues[k]),
                    num(spec.ipr[k]),
                ]
            }),
        )?;
        let top = 3.min(n);
        let mut header = vec!["label".to_string()];
        header.extend((1..=top).map(|k| format!("u{k}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let vectors: Vec<Vec<f64>> = (0..top).map(|k| spec.eigenvector(n - 1 - k)).collect();
        out.csv(
            &format!("{dir}/eigenvectors.csv"),
            &header_refs,
            labels.iter().enumerate().map(|(m, l)| {
                let mut row = vec![l.clone()];
                row.extend(vectors.iter().map(|u| num(u[m])));
                row
            }),
        )?;

        let law = mp_bounds(n, ret.len())?;
        let cmp = mp_compare(std::slice::from_ref(&spec), &law, sc.bins)?;
        out.csv(
            &format!("{dir}/mp_empirical.csv"),
            &["lambda", "density"],
            cmp.bin_centers()
                .iter()
                .zip(&cmp.density)
                .map(|(x, d)| vec![num(*x), num(*d)]),
        )?;
        out.csv(
            &format!("{dir}/mp_theory.csv"),
            &["lambda", "density"],
            cmp.theory.iter().map(|(x, d)| vec![num(*x), num(*d)]),
        )?;
        summary.push(vec![
            name.clone(),
            n.to_string(),
            ret.len().to_string(),
            num(law.q),
            num(c.mean_off_diagonal()),
            num(law.lambda_min),
            num(law.lambda_max),
            num(spec.largest()),
            num(spec.smallest()),
            cmp.below.to_string(),
            cmp.inside.to_string(),
            cmp.above.to_string(),
            sliding.traces.len().to_string(),
            sliding.skipped.len().to_string(),
        ]);
    }
    out.csv(
        "rmt/summary.csv",
        &[
            "period",
            "n",
            "l",
            "q",
            "mean_corr",
            "mp_lambda_min",
            "mp_lambda_max",
            "lambda_max",
            "lambda_min",
            "below",
            "inside",
            "above",
            "windows",
            "skipped_windows",
        ],
        summary,
    )
}

fn write_matrix(out: &mut OutDir, rel: &str, c: &CorrMatrix) -> Result<()> {
    let mut header = vec![""];
    header.extend(c.labels().iter().map(String::as_str));
    out.csv(
        rel,
        &header,
        c.labels().iter().enumerate().map(|(i, l)| {
            let mut row = vec![l.clone()];
            row.extend((0..c.dim()).map(|j| num(c.get(i, j))));
            row
        }),
    )
}

pub fn network(
    cfg: &RunConfig,
    prep: &Prepared,
    periods: &[(String, Option<DateRange>)],
    out: &mut OutDir,
) -> Result<Vec<SweepRow>> {
    let mut corr = Vec::new();
    for (name, range) in periods {
        let ret = period_returns(&prep.returns, name, range.as_ref())?;
        corr.push((name.as_str(), correlation(&ret, None)?));
    }
    let refs: Vec<(&str, &CorrMatrix)> = corr.iter().map(|(n, c)| (*n, c)).collect();
    let rows = theta_sweep(&refs, &cfg.network.thetas)?;
    out.csv(
        "network/metrics.csv",
        &[
            "period",
            "theta",
            "mean_degree",
            "clustering",
            "components",
            "max_component",
            "max_clique",
        ],
        rows.iter().map(|r| {
            let m = &r.metrics;
            vec![
                r.period.clone(),
                num(r.theta),
                num(m.mean_degree),
                num(m.global_clustering),
                m.component_count.to_string(),
                m.max_component_size.to_string(),
                m.max_clique_size.to_string(),
            ]
        }),
    )?;
    out.csv(
        "network/structure.csv",
        &[
            "period",
            "theta",
            "edges",
            "average_clustering",
            "components",
            "max_clique",
        ],
        rows.iter().map(|r| {
            let m = &r.metrics;
            let comps: Vec<String> = m.components.iter().map(|c| c.join(" ")).collect();
            vec![
                r.period.clone(),
                num(r.theta),
                m.edge_count.to_string(),
                num(m.average_clustering),
                comps.join(" | "),
                m.max_clique.join(" "),
            ]
        }),
    )?;
    for (name, c) in &corr {
        let dir = format!("network/{}", file_stem(name));
        let labels = c.labels();
        for &theta in &cfg.network.thetas {
            let g = build_graph(c, theta)?;
            out.csv(
                &format!("{dir}/edges_theta_{}.csv", num(theta)),
                &["source", "target", "weight"],
                g.edges()
                    .into_iter()
                    .map(|(i, j)| vec![labels[i].clone(), labels[j].clone(), num(c.get(i, j))]),
            )?;
        }
        let tree = mst(c)?;
        out.csv(
            &format!("{dir}/mst.csv"),
            &["source", "target", "weight"],
            tree.edges
                .iter()
                .map(|e| vec![labels[e.a].clone(), labels[e.b].clone(), num(e.weight)]),
        )?;
    }
    Ok(rows)
}

/// Seed of the surrogate pair for index `i` in period `p`; the report uses
/// this seed and the next one.
fn surrogate_seed(seed: u64, period: usize, i: usize, n: usize) -> u64 {
    seed.wrapping_add(2 * (period * n + i) as u64)
}

pub fn mfdfa_stage(
    cfg: &RunConfig,
    prep: &Prepared,
    periods: &[(String, Option<DateRange>)],
    out: &mut OutDir,
) -> Result<()> {
    let m = &cfg.mfdfa;
    let core_cfg: MfdfaConfig = m.core_config();
    let library = BmfmLibrary::build(&default_a_grid(m.bmfm_a_step)?, m.bmfm_n_max, &core_cfg)?;
    out.csv(
        "mfdfa/bmfm_library.csv",
        &["a", "q", "h"],
        library.curves.iter().flat_map(|(a, c)| {
            c.q_values
                .iter()
                .zip(&c.h)
                .map(move |(q, h)| vec![num(*a), num(*q), num(*h)])
        }),
    )?;

    let mut summary = Vec::new();
    let mut table = Vec::new();
    let n = prep.returns.n_indices();
    for (p, (name, range)) in periods.iter().enumerate() {
        let ret = period_returns(&prep.returns, name, range.as_ref())?;
        let dir = format!("mfdfa/{}", file_stem(name));
        for (i, label) in ret.labels().iter().enumerate() {
            let g = &ret.scaled()[i];
            let spec = SurrogateSpec {
                iaaft_max_iter: m.iaaft_max_iter,
                iaaft_tol: m.iaaft_tol,
                ..SurrogateSpec::iaaft(surrogate_seed(cfg.seed, p, i, n))
            };
            let report = mf_report(g, &core_cfg, &spec)?;
            if !report.iaaft_converged {
                warn!(
                    "{name}/{label}: IAAFT stopped after {} iterations",
                    report.iaaft_iterations
                );
            }
            let stem = file_stem(label);
            let fixed = MfdfaConfig {
                scales: Some(core_cfg.scales_for(g.len())?),
                ..core_cfg.clone()
            };
            let full = mfdfa(g, &fixed)?;
            out.csv(
                &format!("{dir}/fq/{stem}.csv"),
                &["s", "q", "F"],
                full.table
                    .rows()
                    .into_iter()
                    .map(|(s, q, f)| vec![s.to_string(), num(q), num(f)]),
            )?;
            let variants = [
                ("original", &report.original),
                ("shuffled", &report.shuffled),
                ("surrogate", &report.surrogate),
            ];
            for (variant, curve) in variants {
                out.csv(
                    &format!("{dir}/hq/{stem}_{variant}.csv"),
                    &["q", "h", "r2"],
                    curve
                        .q_values
                        .iter()
                        .zip(&curve.h)
                        .zip(&curve.r2)
                        .map(|((q, h), r2)| vec![num(*q), num(*h), num(*r2)]),
                )?;
                summary.push(vec![
                    name.clone(),
                    label.clone(),
                    variant.to_string(),
                    num(curve.hurst),
                    num(curve.delta_h),
                    curve.unreliable.iter().any(|&u| u).to_string(),
                ]);
            }
            let vol = volatility(&ret, label, cfg.spectra.window, cfg.spectra.step)?.mean();
            let fit = bmfm_fit(&report.original, &library, m.bmfm_refine)?;
            let shape = bmfm_fit_with(&report.original, &library, m.bmfm_refine, FitMetric::Shape)?;
            table.push(vec![
                name.clone(),
                label.clone(),
                num(report.original.delta_h),
                num(report.shuffled.delta_h),
                num(report.surrogate.delta_h),
                num(vol),
                num(fit.a_best),
                num(fit.distance),
                num(fit.mirror_a),
                num(fit.mirror_distance),
                fit.mirror_tied.to_string(),
                num(shape.a_best),
                num(shape.distance),
                num(shape.mirror_a),
                num(shape.mirror_distance),
                report.iaaft_iterations.to_string(),
                report.iaaft_converged.to_string(),
            ]);
        }
    }
    out.csv(
        "mfdfa/summary.csv",
        &["period", "label", "variant", "H", "delta_h", "unreliable_q"],
        summary,
    )?;
    out.csv(
        "mfdfa/table.csv",
        &[
            "period",
            "label",
            "delta_h_original",
            "delta_h_shuffled",
            "delta_h_surrogate",
            "volatility",
            "bmfm_a",
            "bmfm_distance",
            "bmfm_mirror_a",
            "bmfm_mirror_distance",
            "bmfm_mirror_tied",
            "bmfm_shape_a",
            "bmfm_shape_distance",
            "bmfm_shape_mirror_a",
            "bmfm_shape_mirror_distance",
            "iaaft_iterations",
            "iaaft_converged",
        ],
        table,
    )
}

fn require_input(cfg: &RunConfig) -> Result<&InputConfig> {
    cfg.input
        .as_ref()
        .ok_or_else(|| CliError::Config("no [input] section; give --config or run `demo`".into()))
}

fn analyse(
    command: Command,
    cfg: &RunConfig,
    input: &InputConfig,
    period: Option<&str>,
    out: &mut OutDir,
) -> Result<()> {
    let periods = cfg.selected_periods(period)?;
    let prep = prepare(input)?;
    out.stage("prepare");
    let all = matches!(command, Command::Demo | Command::Report);
    if all || command == Command::Ingest {
        ingest(&prep, out)?;
        out.stage("ingest");
    }
    if all || command == Command::Rmt {
        rmt(cfg, &prep, &periods, out)?;
        out.stage("rmt");
    }
    if all || command == Command::Network {
        network(cfg, &prep, &periods, out)?;
        out.stage("network");
    }
    if all || command == Command::Mfdfa {
        mfdfa_stage(cfg, &prep, &periods, out)?;
        out.stage("mfdfa");
    }
    Ok(())
}

/// Runs `command` and writes its manifest into `cfg.output`.
pub fn run(command: Command, cfg: &RunConfig, period: Option<&str>) -> Result<RunManifest> {
    cfg.validate()?;
    let mut out = OutDir::create(&cfg.output)?;
    let mut resolved = cfg.clone();
    resolved.output = PathBuf::from(".");
    if command == Command::Demo {
        // The generated input is an artifact of the run, not part of the
        // config, so the config hash stays independent of the output path.
        resolved.input = None;
        out.text("config.toml", &resolved.to_toml()?)?;
        let input = write_demo_input(cfg, &mut out)?;
        out.stage("generate");
        analyse(command, cfg, &input, period, &mut out)?;
        return out.finish(command.name(), &resolved, None);
    }
    let input = require_input(cfg)?.clone();
    out.text("config.toml", &resolved.to_toml()?)?;
    analyse(command, cfg, &input, period, &mut out)?;
    out.finish(command.name(), &resolved, Some(&input.path))
}

fn write_demo_input(cfg: &RunConfig, out: &mut OutDir) -> Result<InputConfig> {
    let panel = demo::generate(&cfg.demo, cfg.seed)?;
    let rel = "demo/input_prices.csv";
    let path = out.path(rel)?;
    let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_raw_wide(&panel.series, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&path, e))?;
    out.record(rel);
    out.csv(
        "demo/indices.csv",
        &["label", "region", "bmfm_a"],
        panel.indices.iter().map(|i| {
            vec![
                i.label.clone(),
                i.region.to_string(),
                i.bmfm_a.map_or(String::new(), num),
            ]
        }),
    )?;
    Ok(InputConfig {
        path,
        format: PanelFormat::Wide,
        closed_fraction_max: DEFAULT_CLOSED_FRACTION_MAX,
        labels: Vec::new(),
    })
}
