//! The acceptance criteria as seeded experiments. Each returns one record
//! whose checks use the tolerances in [`cdsim::tolerances`].

use anyhow::Result;
use cdsim::am_game::{decide, GameParameters, PlantedSet, WitnessSet};
use cdsim::circuit::{enumerate_outcome_tree, AdaptiveCircuit, DEFAULT_ENUMERATION_CAP};
use cdsim::density::{
    auto_coin_width, brute_force_factory, dyadic_simulation, fixed_circuit_density, outcome_tree_distance,
    staged_outcome_tree, SimulationSpec,
};
use cdsim::gc_compile::{compile_adaptive, derive_correction_table, gadget_fidelity, search_wiring, WIRING};
use cdsim::metrics::{max_abs_diff, total_variation};
use cdsim::random::{random_depth3_circuit, random_source_circuit};
use cdsim::rng::seeded;
use cdsim::{tolerances, BitString};
use rand::Rng;
use serde_json::json;

use crate::experiments::{self, Depth3Config, GameConfig, GameInput, PostselectConfig};
use crate::fixtures;
use crate::record::{Check, ResultRecord};

pub const CRITERIA: [&str; 10] = [
    "teleported-cnot",
    "depth-bound",
    "bell-uniformity",
    "postselection",
    "depth3-simulator",
    "staged-sampler",
    "fixed-oracle",
    "coin-map",
    "set-size-game",
    "determinism",
];

fn record(n: usize, seed: u64, params: serde_json::Value) -> ResultRecord {
    ResultRecord::new(format!("criterion-{n}-{}", CRITERIA[n - 1]), Some(seed), params)
}

/// Gadget plus correction against CNOT on 20 random inputs and all 16
/// branches.
pub fn teleported_cnot(seed: u64) -> Result<ResultRecord> {
    let table = derive_correction_table(WIRING)?;
    let (searched, _) = search_wiring()?;
    let mut worst = 1.0f64;
    let mut branches = 0;
    for input in fixtures::gadget_inputs(seed, 20)? {
        for o in 0..16 {
            worst = worst.min(gadget_fidelity(WIRING, &table, &input, &BitString::from_index(o, 4))?);
            branches += 1;
        }
    }
    let mut r = record(1, seed, json!({ "inputs": 20, "wiring": WIRING }));
    r.metric("branches", branches)
        .metric("min_fidelity", worst)
        .check(Check::at_most("fidelity_shortfall", 1.0 - worst, tolerances::GADGET_FIDELITY))
        .check(Check::holds("wiring_search_reproduces", searched == WIRING));
    Ok(r)
}

/// 100 random sources (width 2 to 4, up to 5 CNOTs) flatten to depth at
/// most 4: at most three gate layers of disjoint gates plus the final
/// measurement.
pub fn depth_bound(seed: u64) -> Result<ResultRecord> {
    let mut rng = seeded(seed);
    let mut worst = 0usize;
    let mut disjoint = true;
    for _ in 0..100 {
        let width = rng.gen_range(2..=4);
        let cnots = rng.gen_range(0..=5);
        let src = random_source_circuit(width, cnots, &mut rng)?;
        let gc = compile_adaptive(&src)?;
        let g = BitString::from_bits((0..gc.guess_len()).map(|_| rng.gen_range(0..2u8)));
        let nc = gc.flatten(&g)?;
        let c = nc.circuit();
        for layer in c.layers() {
            let mut seen = vec![false; c.width()];
            for pg in layer {
                for &q in &pg.targets {
                    disjoint &= !std::mem::replace(&mut seen[q], true);
                }
            }
        }
        worst = worst.max(c.layers().len() + 1);
    }
    let mut r = record(2, seed, json!({ "circuits": 100, "max_width": 4, "max_cnots": 5 }));
    r.metric("max_depth", worst)
        .check(Check::at_most("depth", worst as f64, 4.0))
        .check(Check::holds("layers_disjoint", disjoint));
    Ok(r)
}

pub fn bell_uniformity(seed: u64) -> Result<ResultRecord> {
    let sources = fixtures::gc_sources(seed, 10, 3)?;
    let mut r = experiments::bell_uniformity(&sources, None, seed, tolerances::BELL_UNIFORMITY)?;
    r.experiment = format!("criterion-3-{}", CRITERIA[2]);
    Ok(r)
}

/// 10 fixtures, 6 guesses each (all zeros and the identity-correction
/// guess among them).
pub fn postselection(seed: u64) -> Result<ResultRecord> {
    let mut tv = 0.0f64;
    let mut hit = 0.0f64;
    let mut ks = Vec::new();
    let mut runs = 0;
    for (i, src) in fixtures::gc_sources(seed, 10, 3)?.iter().enumerate() {
        let gc = compile_adaptive(src)?;
        let want = src.output_distribution()?;
        ks.push(gc.guess_len());
        for g in fixtures::guesses(&gc, seed.wrapping_add(i as u64)) {
            let post = gc.flatten(&g)?.postselect()?;
            tv = tv.max(total_variation(&post.distribution, &want));
            hit = hit.max((post.hit_probability - 2f64.powi(-(g.len() as i32))).abs());
            runs += 1;
        }
    }
    let mut r = record(4, seed, json!({ "fixtures": 10, "guesses_per_fixture": 6 }));
    r.metric("k", ks)
        .metric("runs", runs)
        .check(Check::below("max_tv", tv, tolerances::POSTSELECTION_TV))
        .check(Check::at_most("max_hit_deviation", hit, tolerances::GUESS_HIT));
    Ok(r)
}

/// Depth-3 fixtures of width 2 to 12 against brute force, plus a width-64
/// fixture under the block bound.
pub fn depth3_simulator(seed: u64) -> Result<ResultRecord> {
    let mut rng = seeded(seed);
    let mut deviation = 0.0f64;
    let mut peak = 0.0f64;
    let mut fixtures = 0;
    for width in (2..=12).step_by(2) {
        for _ in 0..2 {
            let c = random_depth3_circuit(width, 0.6, &mut rng)?;
            let rec = experiments::depth3(&c, &Depth3Config { trials: 8, seed, tolerance: tolerances::DEPTH3 })?;
            let dev = rec.checks.iter().find(|c| c.name == "max_deviation").map_or(f64::NAN, |c| c.value);
            deviation = deviation.max(dev);
            peak = peak.max(rec.metrics["peak_amplitudes"].as_f64().unwrap_or(f64::NAN));
            fixtures += 1;
        }
    }
    let wide = random_depth3_circuit(64, 0.6, &mut rng)?;
    let rec = experiments::depth3(&wide, &Depth3Config { trials: 4, seed, tolerance: tolerances::DEPTH3 })?;
    let wide_peak = rec.metrics["peak_amplitudes"].as_f64().unwrap_or(f64::NAN);
    let mut r = record(5, seed, json!({ "widths": "2..=12 step 2, then 64" }));
    r.metric("fixtures", fixtures)
        .metric("peak_amplitudes_small", peak)
        .metric("peak_amplitudes_64", wide_peak)
        .check(Check::below("max_deviation", deviation, tolerances::DEPTH3))
        .check(Check::holds("width_64_completed", rec.pass))
        .check(Check::at_most(
            "peak_amplitudes",
            peak.max(wide_peak),
            cdsim::density::BLOCK_AMPLITUDE_BOUND as f64,
        ));
    Ok(r)
}

fn staged_fixtures(seed: u64) -> Result<Vec<AdaptiveCircuit>> {
    let mut out: Vec<AdaptiveCircuit> = fixtures::gc_sources(seed, 6, 2)?
        .iter()
        .map(|s| Ok(compile_adaptive(s)?.adaptive().clone()))
        .collect::<Result<_>>()?;
    for i in 0..3 {
        out.push(fixtures::teleport_fixture(seed.wrapping_add(i))?);
    }
    Ok(out)
}

/// Staged sampler's exact outcome tree against direct path enumeration on
/// adaptive fixtures with at most 12 outcome bits.
pub fn staged_sampler(seed: u64) -> Result<ResultRecord> {
    let mut distance = 0.0f64;
    let mut max_bits = 0;
    let fx = staged_fixtures(seed)?;
    for ac in &fx {
        max_bits = max_bits.max(ac.intermediate_bits() + ac.final_stage().bit_count());
        let a = enumerate_outcome_tree(ac, DEFAULT_ENUMERATION_CAP)?;
        let b = staged_outcome_tree(ac, &brute_force_factory, DEFAULT_ENUMERATION_CAP)?;
        distance = distance.max(outcome_tree_distance(&a, &b));
    }
    let mut r = record(6, seed, json!({ "fixtures": fx.len() }));
    r.metric("max_outcome_bits", max_bits)
        .check(Check::at_most("outcome_bits", max_bits as f64, 12.0))
        .check(Check::below("max_distance", distance, tolerances::STAGED));
    Ok(r)
}

/// Output oracles from two different guesses agree on GC fixtures.
pub fn fixed_oracle(seed: u64) -> Result<ResultRecord> {
    let mut diff = 0.0f64;
    let mut to_source = 0.0f64;
    let sources = fixtures::gc_sources(seed, 6, 2)?;
    for (i, src) in sources.iter().enumerate() {
        let gc = compile_adaptive(src)?;
        let gs = fixtures::guesses(&gc, seed.wrapping_add(i as u64));
        let a = fixed_circuit_density(gc.adaptive(), &gs[1], &brute_force_factory, DEFAULT_ENUMERATION_CAP)?
            .output_distribution()?;
        let b = fixed_circuit_density(gc.adaptive(), &gs[gs.len() - 1], &brute_force_factory, DEFAULT_ENUMERATION_CAP)?
            .output_distribution()?;
        diff = diff.max(max_abs_diff(&a, &b));
        to_source = to_source.max(max_abs_diff(&a, &src.output_distribution()?));
    }
    let mut r = record(7, seed, json!({ "fixtures": sources.len() }));
    r.metric("max_difference_to_source", to_source)
        .check(Check::below("max_difference", diff, tolerances::FIXED_ORACLE));
    Ok(r)
}

/// Largest `|N(b)/2^r - p(b)| - eps p(b)` found by running every coin
/// string through the map.
fn contract_excess(spec: &SimulationSpec) -> f64 {
    let r = spec.coin_width();
    let mut n = vec![0u64; spec.probabilities().len()];
    for c in 0..1u64 << r {
        n[spec.output(c)] += 1;
    }
    let total = (1u64 << r) as f64;
    n.iter()
        .zip(spec.probabilities())
        .map(|(&n, &p)| (n as f64 / total - p).abs() - spec.epsilon() * p)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The coin-map contract by exhaustive enumeration, on random distributions
/// at widths up to 20 and on the circuits used for the game.
pub fn coin_map(seed: u64) -> Result<ResultRecord> {
    let mut rng = seeded(seed);
    let mut excess = f64::NEG_INFINITY;
    for r in [4u32, 8, 12, 16, 20] {
        let w: Vec<f64> = (0..rng.gen_range(2..9)).map(|_| rng.gen_range(0.05..1.0)).collect();
        excess = excess.max(contract_excess(&dyadic_simulation(&w, r)?));
    }
    let cfg = GameConfig::default();
    let mut game_eps = 0.0f64;
    let mut widths = Vec::new();
    for src in [fixtures::constant_source(true), fixtures::constant_source(false), fixtures::bell_source()] {
        let gc = compile_adaptive(&src)?;
        let (m, params) = experiments::circuit_membership(&gc, &cfg)?;
        excess = excess.max(contract_excess(m.spec()));
        game_eps = game_eps.max(m.spec().epsilon());
        widths.push(params.n);
    }
    let joint = compile_adaptive(&fixtures::bell_source())?
        .flatten(&BitString::from_index(0b1010, 4))?
        .joint_distribution()?;
    let auto = auto_coin_width(&joint, 1.0 / 3.0)?;
    excess = excess.max(contract_excess(&auto));
    let mut r = record(8, seed, json!({ "widths": [4, 8, 12, 16, 20] }));
    r.metric("game_coin_widths", widths)
        .metric("max_game_epsilon", game_eps)
        .check(Check::at_most("contract_excess", excess, 1e-15))
        .check(Check::below("game_epsilon", game_eps, 1.0 / 3.0));
    Ok(r)
}

/// BIG and SMALL plantings at `n = 10`, `eps = 0`, `k = 9`, `d = 32`, so
/// `u = 2` and Merlin searches `2^20` strings.
pub fn set_size_game(seed: u64) -> Result<ResultRecord> {
    let params = GameParameters::new(0.0, 10, 9, 32.0)?;
    let mut rng = seeded(seed);
    let mut members = Vec::new();
    while members.len() < 2 {
        let m = rng.gen_range(1..1u64 << 10);
        if !members.contains(&m) {
            members.push(m);
        }
    }
    let big = PlantedSet::new(10, members.clone())?;
    let small = PlantedSet::new(10, [])?;
    let single = PlantedSet::new(10, [members[0]])?;
    let trials = 200;
    let wb = WitnessSet::new(&big, params.u)?;
    let ws = WitnessSet::new(&small, params.u)?;
    let d_big = decide(&wb, &params, trials, seed)?;
    let d_small = decide(&ws, &params, trials, seed)?;
    let d_single = decide(&WitnessSet::new(&single, params.u)?, &params, trials, seed)?;
    let b = params.completeness_bound();
    let slack = 3.0 * (b * (1.0 - b) / trials as f64).sqrt();
    let mut soundness = Check::at_most("small_soundness", d_small.acceptance, params.soundness_bound());
    if params.soundness_vacuous() {
        soundness = soundness.with_note("vacuous: l^3/d >= 1");
    }
    let mut r = record(9, seed, json!({ "n": 10, "epsilon": 0.0, "k": 9, "d": 32.0, "trials": trials }));
    r.metric("game", &params)
        .metric("big_members", &members)
        .metric("big_product_size", wb.product_size())
        .metric("small_product_size", ws.product_size())
        .metric("big_acceptance", d_big.acceptance)
        .metric("small_acceptance", d_small.acceptance)
        .metric("singleton_acceptance", d_single.acceptance)
        .metric("soundness_vacuous", params.soundness_vacuous())
        .check(Check::at_most("copies", params.u as f64, 2.0))
        .check(Check::at_most("search_bits", params.universe_bits() as f64, 20.0))
        .check(Check::holds("big_is_big", wb.product_size() >= params.big_total))
        .check(Check::holds("small_is_small", ws.product_size() <= params.small_total))
        .check(Check::at_least("gap", d_big.acceptance - d_small.acceptance, 0.5))
        .check(Check::at_least("big_completeness", d_big.acceptance, b - slack))
        .check(soundness)
        .check(Check::holds(
            "vacuity_flagged",
            params.soundness_vacuous() == (params.soundness_bound() >= 1.0),
        ));
    Ok(r)
}

/// Criteria 1 to 9 in order.
pub fn substantive(seed: u64) -> Result<Vec<ResultRecord>> {
    let runs: [fn(u64) -> Result<ResultRecord>; 9] = [
        teleported_cnot,
        depth_bound,
        bell_uniformity,
        postselection,
        depth3_simulator,
        staged_sampler,
        fixed_oracle,
        coin_map,
        set_size_game,
    ];
    runs.iter().map(|f| f(seed)).collect()
}

/// Sampled experiments whose output depends on the seed beyond fixture
/// choice.
pub fn sampled(seed: u64) -> Result<Vec<ResultRecord>> {
    let src = fixtures::gc_sources(seed, 1, 1)?.remove(0);
    let nc = experiments::compile(&src, None)?.circuit;
    let post = experiments::postselect(
        &nc,
        Some(&src),
        &PostselectConfig {
            trials: 2000,
            seed,
            ..Default::default()
        },
    )?;
    let game = experiments::amgame(
        &GameInput::Circuit(fixtures::constant_source(true)),
        &GameConfig {
            coin_width: Some(5),
            seed,
            ..Default::default()
        },
    )?;
    Ok(vec![post, game.record])
}

/// Re-runs everything and compares the serialized records byte for byte.
pub fn determinism(seed: u64, first: &[ResultRecord]) -> Result<ResultRecord> {
    let mut a: Vec<String> = first.iter().map(ResultRecord::to_json_line).collect();
    a.extend(sampled(seed)?.iter().map(ResultRecord::to_json_line));
    let mut b: Vec<String> = substantive(seed)?.iter().map(ResultRecord::to_json_line).collect();
    b.extend(sampled(seed)?.iter().map(ResultRecord::to_json_line));
    let differing: Vec<usize> = (0..a.len().max(b.len())).filter(|&i| a.get(i) != b.get(i)).collect();
    let mut r = record(10, seed, json!({ "records": a.len() }));
    r.metric("differing_records", &differing)
        .check(Check::holds("byte_identical", differing.is_empty()));
    Ok(r)
}

/// All ten criteria.
pub fn run_all(seed: u64) -> Result<Vec<ResultRecord>> {
    let mut out = substantive(seed)?;
    out.push(determinism(seed, &out)?);
    Ok(out)
}
