//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rampsafe::analytics::conflict_position_map;
use rampsafe::denoise::{denoise_series, dwt_forward, dwt_inverse, threshold_details, ThresholdRule, DEFAULT_LEVELS};
use rampsafe::oracle::{compare_with_oracle, random_pair};
use rampsafe::synth::{generate, generate_scenario, paper_like_scenario, FleetSpec, ScenarioSpec, SiteTemplate};
use rampsafe::trajectory::write_tracks;
use rampsafe::{detect_conflicts, ttc, ttc_1d, ConflictConfig, OrientedBox, PairState, TypePair, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn pair(a: OrientedBox, va: Vec2, b: OrientedBox, vb: Vec2) -> PairState {
    PairState {
        box_a: a,
        vel_a: va,
        box_b: b,
        vel_b: vb,
    }
}

fn ttc_value(p: &PairState) -> Option<f64> {
    ttc(p).map(|r| r.ttc)
}

fn oracle_sweep() -> Outcome {
    let start = Instant::now();
    let n = 1000u64;
    let mut collisions = 0;
    let mut worst = 0.0f64;
    for seed in 0..n {
        let p = random_pair(&mut ChaCha8Rng::seed_from_u64(seed));
        let c = compare_with_oracle(&p, 1e-3, 10.0);
        ensure(c.agree, || format!("seed {seed}: analytic {:?}, oracle {:?}", c.analytic, c.oracle))?;
        if c.analytic.is_some() || c.oracle.is_some() {
            collisions += 1;
        }
        if c.discrepancy.is_finite() {
            worst = worst.max(c.discrepancy);
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 2e-3, || format!("worst discrepancy {worst}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{n} pairs, {collisions} with a collision, worst {worst:.6} s, {elapsed:.2?}"))
}

fn closed_forms() -> Outcome {
    let a = OrientedBox::new(v(0.0, 0.0), 0.0, 4.0, 2.0);
    let b = OrientedBox::new(v(14.0, 0.0), 0.0, 4.0, 2.0);
    let head_on = ttc_value(&pair(a, v(5.0, 0.0), b, v(0.0, 0.0)));
    ensure(head_on == Some(2.0), || format!("head-on gave {head_on:?}"))?;
    let still = ttc_value(&pair(a, v(20.0, 3.0), b, v(20.0, 3.0)));
    ensure(still.is_none(), || format!("zero relative velocity gave {still:?}"))?;
    let overlap = ttc_value(&pair(a, v(1.0, 0.0), OrientedBox::new(v(3.0, 0.5), 0.3, 4.0, 2.0), v(0.0, 0.0)));
    ensure(overlap == Some(0.0), || format!("overlap gave {overlap:?}"))?;
    Ok("head-on 2.000 s, parallel none, overlap 0".into())
}

fn one_d_two_d() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let lead_len = rng.gen_range(2.0..18.0);
        let lag_len = rng.gen_range(2.0..18.0);
        let width = rng.gen_range(1.5..3.0);
        let lead_front = rng.gen_range(30.0..200.0);
        let lag_front = rng.gen_range(0.0..lead_front - lead_len);
        let lead_speed = rng.gen_range(0.0..35.0);
        let lag_speed = lead_speed + rng.gen_range(0.5..15.0);
        let y = rng.gen_range(-10.0..10.0);
        let one = ttc_1d(lead_front, lead_len, lead_speed, lag_front, lag_speed)
            .map_err(|e| format!("pair {i}: {e}"))?
            .ok_or_else(|| format!("pair {i}: 1D gave none"))?;
        let lead = OrientedBox::new(v(lead_front - lead_len / 2.0, y), 0.0, lead_len, width);
        let lag = OrientedBox::new(v(lag_front - lag_len / 2.0, y), 0.0, lag_len, width);
        let two = ttc_value(&pair(lag, v(lag_speed, 0.0), lead, v(lead_speed, 0.0)))
            .ok_or_else(|| format!("pair {i}: 2D gave none"))?;
        worst = worst.max((one - two).abs());
    }
    ensure(worst < 1e-9, || format!("worst difference {worst:e}"))?;
    Ok(format!("100 pairs, worst |ttc - ttc_1d| = {worst:.1e} s"))
}

fn rotate(u: Vec2, a: f64) -> Vec2 {
    v(u.x * a.cos() - u.y * a.sin(), u.x * a.sin() + u.y * a.cos())
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut compared = 0;
    for seed in 0..500u64 {
        let p = random_pair(&mut ChaCha8Rng::seed_from_u64(10_000 + seed));
        let base = ttc_value(&p);
        let (dx, dy) = (rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
        let rot = rng.gen_range(-PI..PI);
        let k = rng.gen_range(0.1..10.0);
        let boost = v(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0));
        let map = |f: &dyn Fn(Vec2) -> Vec2, turn: f64, scale: f64, vel: &dyn Fn(Vec2) -> Vec2| {
            let tb = |b: OrientedBox| OrientedBox::new(f(b.center), b.heading + turn, b.length * scale, b.width * scale);
            pair(tb(p.box_a), vel(p.vel_a), tb(p.box_b), vel(p.vel_b))
        };
        let id = |u: Vec2| u;
        let variants = [
            ("translation", map(&|c| c + v(dx, dy), 0.0, 1.0, &id)),
            ("rotation", map(&|c| rotate(c, rot), rot, 1.0, &|u| rotate(u, rot))),
            ("scaling", map(&|c| c.scale(k), 0.0, k, &|u| u.scale(k))),
            ("common velocity", map(&id, 0.0, 1.0, &|u| u + boost)),
        ];
        for (name, q) in variants {
            let got = ttc_value(&q);
            let same = match (base, got) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
                (None, None) => true,
                _ => false,
            };
            ensure(same, || format!("seed {seed} {name}: {base:?} vs {got:?}"))?;
            compared += 1;
        }
    }
    Ok(format!("500 pairs, {compared} transformed comparisons within 1e-9 s"))
}

fn closure() -> Outcome {
    let cfg = ConflictConfig::default();
    let mut injected = 0;
    for seed in [0u64, 7, 19, 42, 2024] {
        let spec = paper_like_scenario(seed);
        let sc = generate_scenario(&spec).map_err(|e| e.to_string())?;
        let events = detect_conflicts(&sc.dataset, &cfg);
        ensure(events.len() == sc.injected.len(), || {
            format!("seed {seed}: {} events for {} injections", events.len(), sc.injected.len())
        })?;
        for truth in &sc.injected {
            let target = spec.injections[truth.index].target_min_ttc;
            let key = (truth.lead_id.min(truth.lag_id), truth.lead_id.max(truth.lag_id));
            let found: Vec<_> = events.iter().filter(|e| e.pair == key).collect();
            ensure(found.len() == 1, || format!("seed {seed} injection {}: {} events", truth.index, found.len()))?;
            let e = found[0];
            ensure((e.min_ttc - target).abs() <= 0.05, || {
                format!("seed {seed} injection {}: min_ttc {} vs target {target}", truth.index, e.min_ttc)
            })?;
            ensure(e.type_pair() == Some(truth.type_pair), || format!("seed {seed} injection {}: type pair", truth.index))?;
            ensure(e.conflict_class() == Some(truth.conflict_class), || {
                format!("seed {seed} injection {}: conflict class", truth.index)
            })?;
            injected += 1;
        }
    }
    let mut background = 0;
    for seed in 100..105u64 {
        let spec = ScenarioSpec {
            seed,
            site: SiteTemplate::default(),
            fleet: FleetSpec {
                n_cars: 60,
                n_trucks: 30,
                ..FleetSpec::default()
            },
            injections: Vec::new(),
        };
        let ds = generate(&spec).map_err(|e| e.to_string())?;
        let events = detect_conflicts(&ds, &cfg);
        ensure(events.is_empty(), || format!("background seed {seed}: {} false events", events.len()))?;
        background += 1;
    }
    Ok(format!("{injected} injections recovered, {background} background-only runs with zero events"))
}

fn merging_shape() -> Outcome {
    let start = Instant::now();
    let spec = paper_like_scenario(0);
    let ds = generate(&spec).map_err(|e| e.to_string())?;
    let events = detect_conflicts(&ds, &ConflictConfig::default());
    let bundle = rampsafe::report::build_report(&ds, &events, &Default::default()).map_err(|e| e.to_string())?;
    let summary: serde_json::Value =
        serde_json::from_slice(bundle.get("summary.json").ok_or("no summary.json")?).map_err(|e| e.to_string())?;

    let share = summary["fleet"]["truck_percentage"].as_f64().ok_or("no truck percentage")?;
    ensure((share - 35.0).abs() <= 1.0, || format!("truck share {share}%"))?;

    let means: Vec<f64> = TypePair::ALL
        .iter()
        .map(|tp| {
            summary["conflicts"]["by_type_pair"]
                .as_array()
                .and_then(|a| a.iter().find(|p| p["type_pair"] == tp.as_str()))
                .and_then(|p| p["mean_ttc"].as_f64())
                .ok_or_else(|| format!("no mean for {tp}"))
        })
        .collect::<Result<_, _>>()?;
    ensure(means.windows(2).all(|w| w[0] < w[1]), || format!("mean TTC order {means:?}"))?;

    let lane_change: Vec<_> = events.iter().filter(|e| e.is_lane_change()).copied().collect();
    let grid = conflict_position_map(&lane_change, None, 2.0);
    let mut mass = std::collections::BTreeMap::new();
    for (&idx, cell) in &grid.cells {
        let lane = ds.site.assign_lane(grid.cell_center(idx)).ok_or("cell outside the site")?;
        *mass.entry(lane).or_insert(0usize) += cell.count();
    }
    let ramp_side = mass.get(&SiteTemplate::ACCELERATION_LANE).copied().unwrap_or(0)
        + mass.get(&SiteTemplate::ON_RAMP_LANE).copied().unwrap_or(0);
    let busiest_mainline = (1..=SiteTemplate::MAINLINE_LANES)
        .map(|l| mass.get(&l).copied().unwrap_or(0))
        .max()
        .unwrap_or(0);
    ensure(ramp_side > busiest_mainline, || format!("position mass by lane {mass:?}"))?;

    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "trucks {share}%, mean TTC cc/ct/tc/tt = {:.2}/{:.2}/{:.2}/{:.2} s, ramp-side mass {ramp_side} vs busiest mainline lane {busiest_mainline}, {elapsed:.2?}",
        means[0], means[1], means[2], means[3]
    ))
}

fn dwt_properties() -> Outcome {
    let normal = rand_distr::Normal::new(0.0, 1.0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sample = |n: usize, sigma: f64| -> Vec<f64> {
        (0..n).map(|_| sigma * rand_distr::Distribution::sample(&normal, &mut rng)).collect()
    };
    let mut worst = 0.0f64;
    for n in 2..=4096usize {
        let s = sample(n, 50.0);
        let levels = DEFAULT_LEVELS.min((usize::BITS - 1 - n.leading_zeros()) as usize);
        let decomp = dwt_forward(&s, levels).map_err(|e| e.to_string())?;
        let back = dwt_inverse(&decomp);
        ensure(back.len() == n, || format!("length {n} came back as {}", back.len()))?;
        worst = s.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);

        let t = threshold_details(&decomp, ThresholdRule::UniversalSoft);
        let contracts = decomp
            .details
            .iter()
            .flatten()
            .zip(t.details.iter().flatten())
            .all(|(b, a)| a.abs() <= b.abs() && (*a == 0.0 || a.signum() == b.signum()));
        ensure(contracts, || format!("length {n}: thresholding grew or flipped a coefficient"))?;
        ensure(t.coefficient_energy() <= decomp.coefficient_energy(), || format!("length {n}: energy grew"))?;
    }
    ensure(worst <= 1e-9, || format!("reconstruction error {worst:e}"))?;

    let mut least = f64::INFINITY;
    for _ in 0..100 {
        let clean: Vec<f64> = (0..256).map(|i| 3.0 + 0.8 * i as f64).collect();
        let noisy: Vec<f64> = clean.iter().zip(sample(256, 0.2)).map(|(c, e)| c + e).collect();
        let smooth = denoise_series(&noisy, DEFAULT_LEVELS).map_err(|e| e.to_string())?;
        let rmse = |s: &[f64]| (s.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 256.0).sqrt();
        least = least.min(1.0 - rmse(&smooth) / rmse(&noisy));
    }
    ensure(least >= 0.30, || format!("RMSE reduction only {:.1}%", least * 100.0))?;
    Ok(format!(
        "lengths 2..4096 reconstruct within {worst:.1e}, contraction and energy hold, worst RMSE reduction {:.1}%",
        least * 100.0
    ))
}

fn analyze_dir(tracks: &Path, site: &Path, out: &Path, threads: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_rampsafe"))
        .arg("--threads")
        .arg(threads.to_string())
        .arg("analyze")
        .args(["--tracks".as_ref(), tracks.as_os_str(), "--site".as_ref(), site.as_os_str()])
        .args(["--out".as_ref(), out.as_os_str(), "--svg".as_ref()])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
    let mut files = Vec::new();
    for entry in std::fs::read_dir(out).map_err(|e| e.to_string())? {
        let entry = entry.map_err(|e| e.to_string())?;
        let bytes = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        files.push((entry.file_name().to_string_lossy().into_owned(), bytes));
    }
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ds = generate(&paper_like_scenario(11)).map_err(|e| e.to_string())?;
    let tracks = tmp.path().join("tracks.csv");
    let site = tmp.path().join("site.json");
    let mut buf = Vec::new();
    write_tracks(ds.tracks(), &mut buf).map_err(|e| e.to_string())?;
    std::fs::write(&tracks, buf).map_err(|e| e.to_string())?;
    std::fs::write(&site, serde_json::to_vec(&ds.site).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let mut runs = Vec::new();
    for (i, threads) in [1usize, 2, 4, 8, 1].into_iter().enumerate() {
        runs.push((threads, analyze_dir(&tracks, &site, &tmp.path().join(format!("run{i}")), threads)?));
    }
    let (_, first) = &runs[0];
    ensure(first.iter().any(|(n, _)| n == "conflicts.csv"), || "no conflicts.csv".into())?;
    for (threads, files) in &runs[1..] {
        ensure(files == first, || format!("--threads {threads} output differs"))?;
    }
    Ok(format!("{} runs at --threads 1/2/4/8/1, {} files each, byte-identical", runs.len(), first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 oracle sweep", oracle_sweep),
        ("2 closed forms", closed_forms),
        ("3 1D/2D consistency", one_d_two_d),
        ("4 invariance suite", invariance),
        ("5 generator/analyzer closure", closure),
        ("6 merging-scenario shape", merging_shape),
        ("7 DWT properties", dwt_properties),
        ("8 determinism across threads", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
