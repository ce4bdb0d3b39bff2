//! Subcommand implementations: encode, sample, fit, table1, validate, dock.

use crate::config::{RandomGraphSpec, RunConfig};
use crate::output::{self, RunMeta};
use gbs_core::clique;
use gbs_core::encoding::{
    self, CovarianceFile, GaussianState, KernelFile, TakagiFactors, TakagiFile,
};
use gbs_core::fock;
use gbs_core::graph::{self, InteractionGraph};
use gbs_core::hafnian::{self, EncodingBundle, PhotonPattern};
use gbs_core::holo;
use gbs_core::linalg;
use gbs_core::mps::{self, FitConfig, FitResult};
use gbs_core::sampler;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Exit-code buckets: input errors exit 2, validation failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Validation(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Validation(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Input(err.to_string())
}

fn resolve_graph(config: &RunConfig) -> Result<InteractionGraph, CliError> {
    match (&config.graph, &config.random) {
        (Some(path), _) => {
            let bytes = std::fs::read(path)
                .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
            graph::load_graph(&bytes).map_err(input)
        }
        (None, Some(RandomGraphSpec { m, p, seed })) => {
            graph::random_graph(*m, *p, *seed).map_err(input)
        }
        (None, None) => Err(CliError::Input(
            "no graph given: pass --graph FILE or --random M,p,seed".into(),
        )),
    }
}

struct Encoded {
    c: f64,
    encoding: graph::WeightedEncoding,
    kernel: encoding::KernelMatrix,
    state: GaussianState,
    factors: TakagiFactors,
}

fn encode_graph(graph: &InteractionGraph, safety_factor: f64) -> Result<Encoded, CliError> {
    let c = graph::choose_c(graph, safety_factor).map_err(input)?;
    let encoding_data = graph::weighted_encoding(graph, c).map_err(input)?;
    let kernel = encoding::kernel_from_graph(&encoding_data).map_err(input)?;
    let state = encoding::covariance_from_kernel(&kernel).map_err(input)?;
    let factors = encoding::circuit_prescription(&encoding_data).map_err(input)?;
    Ok(Encoded {
        c,
        encoding: encoding_data,
        kernel,
        state,
        factors,
    })
}

pub fn cmd_encode(config: &RunConfig) -> Result<(), CliError> {
    let graph = resolve_graph(config)?;
    let encoded = encode_graph(&graph, config.safety_factor)?;
    output::ensure_out_dir(config).map_err(CliError::Input)?;
    let meta = RunMeta::new(config);

    let kernel_path = output::write_json(
        config,
        &meta,
        "kernel.json",
        &KernelFile::from_kernel(&encoded.kernel),
    )
    .map_err(CliError::Input)?;
    let cov_path = output::write_json(
        config,
        &meta,
        "covariance.json",
        &CovarianceFile::from_state(&encoded.state),
    )
    .map_err(CliError::Input)?;
    let takagi_path = output::write_json(
        config,
        &meta,
        "takagi.json",
        &TakagiFile::from_factors(&encoded.factors),
    )
    .map_err(CliError::Input)?;

    println!(
        "encoded M={} graph: c={:.6}, kernel radius {:.6}",
        graph.node_count(),
        encoded.c,
        encoded.encoding.kernel_spectral_radius()
    );
    for path in [kernel_path, cov_path, takagi_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn build_distribution(
    graph: &InteractionGraph,
    encoded: &Encoded,
    config: &RunConfig,
) -> Result<sampler::PatternDistribution, CliError> {
    let bundle =
        EncodingBundle::from_graph_encoding(graph, &encoded.encoding).map_err(input)?;
    let n_max = config.n_max.min(graph.node_count()) & !1;
    sampler::enumerate_distribution_with_budget(&bundle, n_max, config.work_budget)
        .map_err(input)
}

pub fn cmd_sample(config: &RunConfig) -> Result<(), CliError> {
    let graph = resolve_graph(config)?;
    let encoded = encode_graph(&graph, config.safety_factor)?;
    let dist = build_distribution(&graph, &encoded, config)?;
    let seed = config.subsystem_seed("sampler");
    let hist = if config.shots == 0 {
        sampler::SampleHistogram {
            counts: Default::default(),
            total_draws: 0,
            seed,
        }
    } else {
        sampler::draw_samples(&dist, config.shots, seed).map_err(input)?
    };
    let reports = clique::postprocess_samples(&graph, &hist).map_err(input)?;

    output::ensure_out_dir(config).map_err(CliError::Input)?;
    let meta = RunMeta::new(config);
    output::write_csv(
        config,
        &meta,
        "histogram.csv",
        &sampler::histogram_csv(&hist, &dist),
    )
    .map_err(CliError::Input)?;
    output::write_json(
        config,
        &meta,
        "histogram.json",
        &sampler::histogram_json(&hist, &dist),
    )
    .map_err(CliError::Input)?;
    output::write_csv(
        config,
        &meta,
        "cliques.csv",
        &clique::clique_report_csv(&reports),
    )
    .map_err(CliError::Input)?;

    println!(
        "sampled {} shots over {} patterns (leakage {:.3e}, seed {seed})",
        hist.total_draws,
        dist.entries.len(),
        dist.leakage
    );
    if let Some(top) = reports.first() {
        println!(
            "heaviest clique: {:?} weight {:.4}",
            top.0.vertex_set, top.0.weight
        );
    }
    println!("wrote {}", config.out.join("histogram.csv").display());
    println!("wrote {}", config.out.join("cliques.csv").display());
    Ok(())
}

/// Squeeze parameters and reference covariance for the fit, plus the fitted
/// results for each requested layer count (two-layer fits warm-start from
/// the one-layer optimum so added capacity can only help).
fn run_fits(
    graph: &InteractionGraph,
    config: &RunConfig,
    fit_seed: u64,
    layer_counts: &[usize],
) -> Result<Vec<(usize, FitResult)>, CliError> {
    let encoded = encode_graph(graph, config.safety_factor)?;
    let r = encoded
        .factors
        .squeeze_params
        .clone()
        .expect("kernel radius below 1 guarantees squeeze parameters");
    let sigma_ref = &encoded.state;

    let mut fit_config = FitConfig::new(fit_seed);
    fit_config.restarts = config.restarts;
    fit_config.max_iters = config.max_iters;

    let one_layer = mps::build_circuit(graph.node_count(), 1, &r).map_err(input)?;
    let fit1 = mps::fit_parameters(&one_layer, sigma_ref, &fit_config).map_err(input)?;

    let mut results = Vec::new();
    for &layers in layer_counts {
        match layers {
            1 => results.push((1, fit1.clone())),
            2 => {
                let two_layer = mps::build_circuit(graph.node_count(), 2, &r).map_err(input)?;
                let k1 = one_layer.gate_count();
                let k2 = two_layer.gate_count();
                let mut warm = vec![0.0; 2 * k2];
                warm[..k1].copy_from_slice(&fit1.theta);
                warm[k2..k2 + k1].copy_from_slice(&fit1.phi);
                let mut two_config = fit_config.clone();
                two_config.extra_starts = vec![warm];
                let fit2 =
                    mps::fit_parameters(&two_layer, sigma_ref, &two_config).map_err(input)?;
                results.push((2, fit2));
            }
            other => return Err(CliError::Input(format!("layers must be 1 or 2, got {other}"))),
        }
    }
    Ok(results)
}

#[derive(Serialize)]
struct FitArtifact<'a> {
    mode_count: usize,
    layers: usize,
    fit: &'a FitResult,
}

pub fn cmd_fit(config: &RunConfig) -> Result<(), CliError> {
    let graph = resolve_graph(config)?;
    let layer_counts: Vec<usize> = if config.layers == 2 { vec![1, 2] } else { vec![1] };
    let fit_seed = config.subsystem_seed("fit");
    let fits = run_fits(&graph, config, fit_seed, &layer_counts)?;

    output::ensure_out_dir(config).map_err(CliError::Input)?;
    let meta = RunMeta::new(config);
    let mut csv = String::from("m,layers,relative_distance,seed\n");
    for (layers, fit) in &fits {
        writeln!(
            csv,
            "{},{},{},{}",
            graph.node_count(),
            layers,
            fit.relative_distance,
            fit.seed
        )
        .expect("string write");
        println!(
            "M={} layers={}: relative distance {:.6} ({} iterations, {} restarts)",
            graph.node_count(),
            layers,
            fit.relative_distance,
            fit.iterations,
            fit.restarts_used
        );
    }
    output::write_csv(config, &meta, "fit.csv", &csv).map_err(CliError::Input)?;
    let artifacts: Vec<FitArtifact> = fits
        .iter()
        .map(|(layers, fit)| FitArtifact {
            mode_count: graph.node_count(),
            layers: *layers,
            fit,
        })
        .collect();
    output::write_json(config, &meta, "fit.json", &artifacts).map_err(CliError::Input)?;

    // Compile the requested circuit with its fitted parameters into the
    // hardware-facing schedule.
    let (layers, best) = fits.last().expect("at least one fit ran");
    let encoded = encode_graph(&graph, config.safety_factor)?;
    let r = encoded.factors.squeeze_params.expect("valid encoding");
    let circuit = mps::build_circuit(graph.node_count(), *layers, &r).map_err(input)?;
    let schedule = holo::compile_schedule(&circuit, &best.theta, &best.phi).map_err(input)?;
    output::write_json(config, &meta, "schedule.json", &schedule).map_err(CliError::Input)?;
    std::fs::write(config.out.join("schedule.txt"), schedule.pretty())
        .map_err(|e| input(format!("cannot write schedule: {e}")))?;
    println!(
        "compiled {}-layer schedule on {} slots ({} instructions)",
        layers,
        schedule.slot_count,
        schedule.instructions.len()
    );
    println!("wrote {}", config.out.join("fit.csv").display());
    Ok(())
}

pub fn cmd_table1(config: &RunConfig, full: bool) -> Result<(), CliError> {
    let sizes: Vec<usize> = if full {
        vec![12, 16, 20, 24, 50]
    } else {
        vec![12, 16, 20, 24]
    };
    let graph_seed_base = config.subsystem_seed("graph");
    let fit_seed_base = config.subsystem_seed("fit");

    let mut runs_csv = String::from("m,layers,graph_seed,relative_distance,iterations\n");
    let mut medians_csv = String::from("m,layers,median_relative_distance,graphs\n");
    for &m in &sizes {
        let mut per_layer: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for g_idx in 0..config.graphs_per_size {
            let graph_seed = graph_seed_base
                .wrapping_add(m as u64)
                .wrapping_add(g_idx as u64 * 1009);
            let graph = graph::random_graph(m, 0.5, graph_seed).map_err(input)?;
            let fit_seed = fit_seed_base.wrapping_add(g_idx as u64);
            let fits = run_fits(&graph, config, fit_seed, &[1, 2])?;
            for (layers, fit) in fits {
                writeln!(
                    runs_csv,
                    "{},{},{},{},{}",
                    m, layers, graph_seed, fit.relative_distance, fit.iterations
                )
                .expect("string write");
                println!(
                    "M={m} layers={layers} seed={graph_seed}: distance {:.5}",
                    fit.relative_distance
                );
                per_layer[layers - 1].push(fit.relative_distance);
            }
        }
        for layers in [1usize, 2] {
            let mut values = per_layer[layers - 1].clone();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = values[values.len() / 2];
            writeln!(medians_csv, "{},{},{},{}", m, layers, median, values.len())
                .expect("string write");
            println!("M={m} layers={layers}: median distance {median:.5}");
        }
    }

    output::ensure_out_dir(config).map_err(CliError::Input)?;
    let meta = RunMeta::new(config);
    output::write_csv(config, &meta, "table1_runs.csv", &runs_csv).map_err(CliError::Input)?;
    output::write_csv(config, &meta, "table1.csv", &medians_csv).map_err(CliError::Input)?;
    println!("wrote {}", config.out.join("table1.csv").display());
    Ok(())
}

struct Check {
    name: &'static str,
    passed: bool,
    skipped: bool,
    detail: String,
}

fn report(checks: &[Check]) -> Result<(), CliError> {
    let mut failures = Vec::new();
    for check in checks {
        let status = if check.skipped {
            "SKIP"
        } else if check.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} {}: {}", check.name, check.detail);
        if !check.passed && !check.skipped {
            failures.push(check.name);
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "validation failed: {}",
            failures.join(", ")
        )))
    }
}

pub fn cmd_validate(config: &RunConfig, covariance: Option<&Path>) -> Result<(), CliError> {
    // Schema check of a covariance artifact, when given; a corrupted file is
    // an input error.
    if let Some(path) = covariance {
        let text = output::read_to_string(path).map_err(CliError::Input)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| input(format!("schema error: {e}")))?;
        let payload = value
            .get("payload")
            .cloned()
            .unwrap_or(value);
        let file: CovarianceFile = serde_json::from_value(payload)
            .map_err(|e| input(format!("schema error: {e}")))?;
        let state = file.to_state().map_err(|e| input(format!("schema error: {e}")))?;
        println!(
            "covariance artifact ok: {} modes, det sigma_Q {:.6}",
            state.mode_count(),
            state.det_sigma_q()
        );
    }

    let mut checks: Vec<Check> = Vec::new();
    let seed = config.subsystem_seed("validate");
    let cutoff = config.cutoff;

    // Truncation probe: how much norm does one hard squeeze lose at this
    // cutoff? The loss only deletes high-photon mass (low-pattern amplitudes
    // stay exact), so the formula comparison runs unless the cutoff is so
    // small that whole photon-number sectors are clipped.
    let probe = fock::FockState::vacuum(1, cutoff).map_err(input)?;
    let squeezed = fock::apply_squeeze(&probe, 0, 0.6).map_err(input)?;
    let deficit = squeezed.norm_deficit();
    let truncation_ok = cutoff >= 6;
    checks.push(Check {
        name: "squeeze-truncation",
        passed: true,
        skipped: false,
        detail: if truncation_ok {
            format!("norm deficit {deficit:.3e} at cutoff {cutoff} (r=0.6)")
        } else {
            format!(
                "WARNING: truncation leakage {deficit:.3e} at cutoff {cutoff} (r=0.6)"
            )
        },
    });

    // Hafnian formula vs Fock oracle on small graphs.
    {
        let mut worst: f64 = 0.0;
        let mut detail = String::new();
        let mut ran = false;
        if truncation_ok {
            ran = true;
            let mut cases: Vec<InteractionGraph> = vec![InteractionGraph::from_edges(
                2,
                &[(0, 1)],
                None,
                None,
            )
            .map_err(input)?];
            for i in 0..3 {
                let m = 3 + (i % 2);
                let mut g = graph::random_graph(m, 0.6, seed.wrapping_add(i as u64))
                    .map_err(input)?;
                if g.edge_count() == 0 {
                    g = graph::random_graph(m, 0.9, seed.wrapping_add(100 + i as u64))
                        .map_err(input)?;
                }
                cases.push(g);
            }
            for g in &cases {
                let c_val = if g.node_count() == 2 {
                    0.5
                } else {
                    graph::choose_c(g, 0.5).map_err(input)?
                };
                let enc = graph::weighted_encoding(g, c_val).map_err(input)?;
                let bundle = EncodingBundle::from_graph_encoding(g, &enc).map_err(input)?;
                let factors = encoding::circuit_prescription(&enc).map_err(input)?;
                let dist = fock::gbs_joint_distribution(
                    factors.squeeze_params.as_ref().unwrap(),
                    &factors.unitary,
                    cutoff.min(10),
                )
                .map_err(input)?;
                let capped = dist.binary_capped();
                for n in 0..(1u32 << g.node_count()) {
                    let bits: Vec<u8> = (0..g.node_count())
                        .map(|b| ((n >> b) & 1) as u8)
                        .collect();
                    let pattern = PhotonPattern::new(bits).map_err(input)?;
                    let formula =
                        hafnian::pattern_probability(&bundle, &pattern).map_err(input)?;
                    let oracle = capped.probability(&pattern);
                    worst = worst.max((formula - oracle).abs());
                }
            }
            detail = format!("max |formula - oracle| = {worst:.3e} over binary patterns");
        }
        checks.push(Check {
            name: "hafnian-vs-fock",
            passed: !ran || worst <= 1e-6,
            skipped: !ran,
            detail: if ran {
                detail
            } else {
                "skipped (cutoff below 6 clips photon-number sectors)".into()
            },
        });
    }

    // Circuit construction vs direct kernel inversion.
    {
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            let g = graph::random_graph(6 + i % 3, 0.5, seed.wrapping_add(50 + i as u64))
                .map_err(input)?;
            if g.edge_count() == 0 {
                continue;
            }
            let encoded = encode_graph(&g, config.safety_factor)?;
            let circuit_state =
                encoding::covariance_from_circuit(&encoded.factors).map_err(input)?;
            let rel = linalg::frobenius_norm(
                &(circuit_state.sigma() - encoded.state.sigma()),
            ) / linalg::frobenius_norm(encoded.state.sigma());
            worst = worst.max(rel);
        }
        checks.push(Check {
            name: "circuit-vs-direct-covariance",
            passed: worst < 1e-8,
            skipped: false,
            detail: format!("max relative Frobenius error {worst:.3e}"),
        });
    }

    // Holographic schedules against static circuits, exact branch sums.
    {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(7));
        let mut detail = String::new();
        let mut passed = true;
        for layers in [1usize, 2] {
            let m = 4;
            let r: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let circuit = mps::build_circuit(m, layers, &r).map_err(input)?;
            let k = circuit.gate_count();
            let theta: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let phi: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let static_dist =
                fock::circuit_joint_distribution(&circuit, &theta, &phi, cutoff.min(8))
                    .map_err(input)?;
            let schedule = holo::compile_schedule(&circuit, &theta, &phi).map_err(input)?;
            let holo_dist = fock::schedule_joint_distribution(&schedule, cutoff.min(8))
                .map_err(input)?;
            let tvd = static_dist.tvd(&holo_dist);
            let slots = holo::peak_slots(&schedule);
            let slots_ok = slots == layers + 1;
            passed &= tvd <= 1e-6 && slots_ok;
            write!(detail, "[{layers}-layer: TVD {tvd:.3e}, slots {slots}] ")
                .expect("string write");
        }
        checks.push(Check {
            name: "holographic-equivalence",
            passed,
            skipped: false,
            detail,
        });
    }

    // Structural invariants of encoded distributions.
    {
        let g = graph::random_graph(6, 0.5, seed.wrapping_add(9)).map_err(input)?;
        let encoded = encode_graph(&g, config.safety_factor)?;
        let pd = encoded.state.sigma_q_positive_definite();
        let bundle = EncodingBundle::from_graph_encoding(&g, &encoded.encoding).map_err(input)?;
        let dist = sampler::enumerate_distribution(&bundle, 6).map_err(input)?;
        let parity_ok = dist.entries.keys().all(|p| p.total() % 2 == 0);
        checks.push(Check {
            name: "encoding-invariants",
            passed: pd && parity_ok,
            skipped: false,
            detail: format!(
                "sigma_Q positive definite: {pd}; even-parity support: {parity_ok}"
            ),
        });
    }

    report(&checks)
}

pub fn cmd_dock(config: &RunConfig) -> Result<(), CliError> {
    let graph = resolve_graph(config)?;
    let encoded = encode_graph(&graph, config.safety_factor)?;
    let dist = build_distribution(&graph, &encoded, config)?;
    let seed = config.subsystem_seed("sampler");
    let hist = sampler::draw_samples(&dist, config.shots, seed).map_err(input)?;
    let reports = clique::postprocess_samples(&graph, &hist).map_err(input)?;

    output::ensure_out_dir(config).map_err(CliError::Input)?;
    let meta = RunMeta::new(config);
    let instance = graph::save_graph(&graph);
    std::fs::write(config.out.join("instance.json"), &instance)
        .map_err(|e| input(format!("cannot write instance: {e}")))?;
    output::write_csv(
        config,
        &meta,
        "histogram.csv",
        &sampler::histogram_csv(&hist, &dist),
    )
    .map_err(CliError::Input)?;
    output::write_csv(
        config,
        &meta,
        "cliques.csv",
        &clique::clique_report_csv(&reports),
    )
    .map_err(CliError::Input)?;

    // Top three clique weights by sampling frequency.
    let mut by_frequency: Vec<&(clique::CliqueReport, u64)> = reports.iter().collect();
    by_frequency.sort_by(|(ra, fa), (rb, fb)| {
        fb.cmp(fa).then(
            rb.weight
                .partial_cmp(&ra.weight)
                .expect("finite weights"),
        )
    });
    println!(
        "docked M={} instance: {} shots, leakage {:.3e}",
        graph.node_count(),
        hist.total_draws,
        dist.leakage
    );
    for (rank, (report, freq)) in by_frequency.iter().take(3).enumerate() {
        println!(
            "top-{} clique weight {:.4} (frequency {}, vertices {:?})",
            rank + 1,
            report.weight,
            freq,
            report.vertex_set
        );
    }
    println!("wrote {}", config.out.join("cliques.csv").display());
    Ok(())
}
