//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use polar_coord::channel::{cascade, joint_channel, make_bec, make_bsc, ChannelSpec};
use polar_coord::construction::{
    build_code_from_profiles, build_partition, select_good, ConstructionParams, CoordinationCode, NestingPolicy,
    SelectionMode,
};
use polar_coord::coordination::{message_bit_probability, simulate_sessions};
use polar_coord::oracle::{
    self, binary_entropy as h, brute_force_bit_channel, brute_force_bit_channels, composite_channel_capacity,
    coordination_summary, ensemble_posteriors, induced_coordination_joint, pinsker_l1_bound,
    resolvability_summary, resolvability_target, tv, DEFAULT_TABLE_CAP,
};
use polar_coord::polar::PolarParams;
use polar_coord::regions::{
    linear_grid, polar_region_example1, polar_region_example1_general, polar_region_example2, DEFAULT_GRID_POINTS,
};
use polar_coord::resolvability::ResolvabilityCode;
use polar_coord::synthesis::{
    synthesize_auto, synthesize_bec, synthesize_exact, synthesize_general, synthesize_mixture_exact,
    QuantizationBudget, SynthesizedBitChannel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Uniform-input mutual information from the rows directly.
fn information(ch: &ChannelSpec) -> f64 {
    let [r0, r1] = ch.rows();
    r0.iter()
        .zip(r1)
        .map(|(&a, &b)| {
            let mid = 0.5 * (a + b);
            let t = |p: f64| if p > 0.0 { 0.5 * p * (p / mid).log2() } else { 0.0 };
            t(a) + t(b)
        })
        .sum()
}

fn c1() -> Outcome {
    let expected = [0.0625, 0.4375, 0.5625, 0.9375];
    let bec = synthesize_bec(0.5, 2).map_err(e)?;
    let ch = make_bec(0.5).map_err(e)?;
    let mut worst = 0.0f64;
    for (i, want) in expected.iter().enumerate() {
        let brute = brute_force_bit_channel(&ch, 2, i, DEFAULT_TABLE_CAP).map_err(e)?;
        worst = worst
            .max((bec[i].capacity_lower - want).abs())
            .max((bec[i].capacity_upper - want).abs())
            .max((brute.capacity - want).abs());
    }
    ensure(worst <= 1e-15, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn c2() -> Outcome {
    let presets = [
        ("BSC(0.11)", make_bsc(0.11).map_err(e)?),
        ("BEC(0.4)", make_bec(0.4).map_err(e)?),
        ("BSC(0.15)∘BEC(0.4)", cascade(&make_bsc(0.15).map_err(e)?, &make_bec(0.4).map_err(e)?).map_err(e)?),
        ("BSC(0.1)×BSC(0.2)", joint_channel(&make_bsc(0.1).map_err(e)?, &make_bsc(0.2).map_err(e)?).map_err(e)?),
    ];
    let mut worst = 0.0f64;
    for (name, ch) in &presets {
        let c = information(ch);
        let q = ch.output_distribution();
        for x in 0..2 {
            let d = oracle::table::kl_bits(&ch.rows()[x], &q).map_err(e)?;
            let gap = (c - d).abs();
            ensure(gap < 1e-10, format!("{name}, x={x}: |C − D| = {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("max |C − D| = {worst:e}"))
}

fn c3() -> Outcome {
    let ch = make_bsc(0.3).map_err(e)?;
    let exact = brute_force_bit_channels(&ch, 2, DEFAULT_TABLE_CAP).map_err(e)?;
    let bracket = synthesize_general(&ch, 2, QuantizationBudget::new(512).map_err(e)?, true).map_err(e)?;
    for (t, b) in exact.iter().zip(&bracket) {
        ensure(
            b.capacity_lower <= t.capacity + 1e-12 && t.capacity <= b.capacity_upper + 1e-12,
            format!("index {}: {} not in [{}, {}]", t.index, t.capacity, b.capacity_lower, b.capacity_upper),
        )?;
    }
    let mean = exact.iter().map(|t| t.capacity).sum::<f64>() / exact.len() as f64;
    let target = 1.0 - h(0.3);
    ensure((target - 0.11871).abs() < 5e-6, format!("1 − h(0.3) = {target}"))?;
    ensure((mean - target).abs() < 1e-9, format!("mean {mean} vs {target}"))?;
    Ok(format!("all 4 bracketed; mean {mean:.6} vs {target:.6}"))
}

/// Exact capacities: enumeration when under the cap, otherwise the
/// unmerged mixture recursion.
fn exact_profile(ch: &ChannelSpec, m: u32) -> Result<(Vec<SynthesizedBitChannel>, &'static str), String> {
    match synthesize_exact(ch, m, DEFAULT_TABLE_CAP) {
        Ok(p) => Ok((p, "enumerated")),
        Err(polar_coord::Error::CapExceeded { .. }) => Ok((synthesize_mixture_exact(ch, m, 1 << 20).map_err(e)?, "mixture")),
        Err(err) => Err(e(err)),
    }
}

fn c4() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mode = SelectionMode::threshold(0.25).map_err(e)?;
    let (mut enumerated, mut mixture) = (0, 0);
    for k in 0..20 {
        let q = rng.random_range(0.01..0.3);
        let p = rng.random_range(0.01..0.3);
        let m = 2 + (k % 2) as u32;
        let wx = make_bsc(q).map_err(e)?;
        let wy = if k % 4 < 2 {
            make_bsc(p).map_err(e)?
        } else {
            cascade(&make_bsc(p).map_err(e)?, &make_bec(rng.random_range(0.05..0.6)).map_err(e)?).map_err(e)?
        };
        let (yx, how_yx) = exact_profile(&joint_channel(&wx, &wy).map_err(e)?, m)?;
        let (x, _) = exact_profile(&wx, m)?;
        if how_yx == "enumerated" {
            enumerated += 1;
        } else {
            mixture += 1;
        }
        build_partition(&yx, &x, mode, mode, NestingPolicy::Strict).map_err(|err| format!("config {k}: {err}"))?;
    }
    Ok(format!("20/20 nested ({enumerated} enumerated, {mixture} via exact mixture recursion)"))
}

fn resolvability_code(ch: &ChannelSpec, m: u32) -> Result<(ResolvabilityCode, Vec<SynthesizedBitChannel>), String> {
    let profile = synthesize_exact(ch, m, DEFAULT_TABLE_CAP).map_err(e)?;
    let (good, _) = select_good(&profile, SelectionMode::threshold(0.25).map_err(e)?).map_err(e)?;
    Ok((ResolvabilityCode::new(ch.clone(), PolarParams::new(m).map_err(e)?, good, None).map_err(e)?, profile))
}

fn c5() -> Outcome {
    let ch = make_bsc(0.3).map_err(e)?;
    let (code, profile) = resolvability_code(&ch, 2)?;
    let s = resolvability_summary(&code, DEFAULT_TABLE_CAP).map_err(e)?;
    let composite = composite_channel_capacity(&code, DEFAULT_TABLE_CAP).map_err(e)?;
    ensure(
        (s.kl_bits - composite).abs() < 1e-9,
        format!("D = {} vs I(S;Y^n) = {}", s.kl_bits, composite),
    )?;
    let bound: f64 = code.bad().iter().map(|&i| profile[i].capacity_lower).sum();
    ensure(s.kl_bits <= bound + 1e-12, format!("D = {} > Σ_bad C_i = {bound}", s.kl_bits))?;
    ensure(
        s.tv_l1 <= s.pinsker_l1 + 1e-12 && s.pinsker_l1 <= pinsker_l1_bound(bound) + 1e-12,
        "Pinsker chain broken",
    )?;
    let mut tvs = Vec::new();
    for m in 1..=3 {
        let (code, _) = resolvability_code(&ch, m)?;
        let s = resolvability_summary(&code, DEFAULT_TABLE_CAP).map_err(e)?;
        tvs.push((code.n(), code.rate_bits(), s.tv_l1));
    }
    let trend = tvs
        .iter()
        .map(|(n, r, t)| format!("n={n} r={r} tv={t:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        tvs.windows(2).all(|w| w[1].2 < w[0].2),
        format!("D = {:.6} = I = {:.6} ≤ {:.6}; TV not decreasing: {trend}", s.kl_bits, composite, bound),
    )?;
    Ok(format!("D = {:.6} = I = {:.6} ≤ {:.6}; {trend}", s.kl_bits, composite, bound))
}

fn all_frozen(len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1usize << len).map(move |w| (0..len).map(|j| ((w >> (len - 1 - j)) & 1) as u8).collect())
}

fn coordination_code(wx: &ChannelSpec, wy: &ChannelSpec, m: u32) -> Result<CoordinationCode, String> {
    let (yx, _) = exact_profile(&joint_channel(wx, wy).map_err(e)?, m)?;
    let (x, _) = exact_profile(wx, m)?;
    build_code_from_profiles(wx, wy, &yx, &x, &ConstructionParams::default()).map_err(e)
}

fn c6() -> Outcome {
    let ch = make_bsc(0.3).map_err(e)?;
    let (code, _) = resolvability_code(&ch, 2)?;
    let target = resolvability_target(&code, DEFAULT_TABLE_CAP).map_err(e)?;
    let mut spread_r = (f64::INFINITY, f64::NEG_INFINITY);
    for frozen in all_frozen(code.frozen.len()) {
        let p = oracle::induced_resolvability_dist(&code.with_frozen(frozen).map_err(e)?, DEFAULT_TABLE_CAP).map_err(e)?;
        let t = tv(&p, &target).map_err(e)?;
        spread_r = (spread_r.0.min(t), spread_r.1.max(t));
    }
    let ccode = coordination_code(&make_bsc(0.1).map_err(e)?, &make_bsc(0.2).map_err(e)?, 2)?;
    let ctarget = oracle::coordination_target_table(&ccode, DEFAULT_TABLE_CAP).map_err(e)?;
    let mut spread_c = (f64::INFINITY, f64::NEG_INFINITY);
    for frozen in all_frozen(ccode.partition.f1.len()) {
        let joint = induced_coordination_joint(&ccode.with_frozen_values(frozen).map_err(e)?, DEFAULT_TABLE_CAP)
            .map_err(e)?;
        let t = tv(&joint.xy, &ctarget).map_err(e)?;
        spread_c = (spread_c.0.min(t), spread_c.1.max(t));
    }
    let (dr, dc) = (spread_r.1 - spread_r.0, spread_c.1 - spread_c.0);
    let detail = format!(
        "resolvability: {} vectors, spread {dr:e}; coordination: {} vectors, spread {dc:e}",
        1 << code.frozen.len(),
        1 << ccode.partition.f1.len()
    );
    ensure(dr <= 1e-12 && dc <= 1e-12, detail.clone())?;
    Ok(detail)
}

fn c7() -> Outcome {
    let wx = make_bsc(0.1).map_err(e)?;
    let code = coordination_code(&wx, &make_bsc(0.2).map_err(e)?, 2)?;
    let n = code.n();
    let post = ensemble_posteriors(&wx, 2, DEFAULT_TABLE_CAP).map_err(e)?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    // every index, not only F3, so the check does not depend on the partition
    for i in 0..n {
        for past in 0..1usize << i {
            let past_bits: Vec<u8> = (0..i).map(|j| ((past >> (i - 1 - j)) & 1) as u8).collect();
            for x in 0..1usize << n {
                let x_bits: Vec<u8> = (0..n).map(|j| ((x >> (n - 1 - j)) & 1) as u8).collect();
                let sc = message_bit_probability(&wx, &x_bits, &past_bits).map_err(e)?;
                worst = worst.max((sc - post[i][(past << n) | x]).abs());
                checked += 1;
            }
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("{checked} (i, past, x) cases incl. F3 = {:?}; max deviation {worst:e}", code.partition.f3))
}

fn c8() -> Outcome {
    let code = coordination_code(&make_bsc(0.1).map_err(e)?, &make_bsc(0.2).map_err(e)?, 2)?;
    let exact = induced_coordination_joint(&code, DEFAULT_TABLE_CAP).map_err(e)?;
    let sessions = 1_000_000;
    let stats = simulate_sessions(&code, sessions, 8).map_err(e)?;
    let counts = stats.block_counts.ok_or("block histogram missing")?;
    let mut g = 0.0;
    let mut cells = 0usize;
    for (&obs, &p) in counts.iter().zip(exact.xy.probs()) {
        if p == 0.0 {
            ensure(obs == 0, "observed an impossible block")?;
            continue;
        }
        cells += 1;
        if obs > 0 {
            let o = obs as f64;
            g += 2.0 * o * (o / (p * sessions as f64)).ln();
        }
    }
    let df = (cells - 1) as f64;
    let critical = ChiSquared::new(df).map_err(e)?.inverse_cdf(0.999);
    let s = coordination_summary(&code, DEFAULT_TABLE_CAP).map_err(e)?;
    let detail = format!(
        "G = {g:.1} (df {df}, critical {critical:.1}); tv {:.4} ≤ {:.4} + {:.4}",
        s.tv_l1, s.encoder_tv_l1, s.ensemble_tv_l1
    );
    ensure(g <= critical, format!("G-test rejected: {detail}"))?;
    ensure(s.triangle_holds(1e-12), format!("triangle broken: {detail}"))?;
    Ok(detail)
}

fn c9() -> Outcome {
    let hb = |x: f64| if x <= 0.0 || x >= 1.0 { 0.0 } else { -x * x.log2() - (1.0 - x) * (1.0 - x).log2() };
    let curve = polar_region_example1(0.15, 0.4, &[0.0, 0.15]).map_err(e)?;
    let rederive = |q: f64| {
        let r = 1.0 - hb(q);
        (r, 0.6 * (hb(0.15) - hb((0.15 - q) / (1.0 - 2.0 * q))) + r)
    };
    for (row, (want_r, want_s), published) in [
        (curve.rows[0], rederive(0.0), (1.0, 1.0)),
        (curve.rows[1], rederive(0.15), (0.39016, 0.75606)),
    ] {
        ensure(
            (row.r_min - want_r).abs() < 1e-4 && (row.sum_min - want_s).abs() < 1e-4,
            format!("q={}: ({}, {}) vs ({want_r}, {want_s})", row.param, row.r_min, row.sum_min),
        )?;
        ensure(
            (row.r_min - published.0).abs() < 1e-4 && (row.sum_min - published.1).abs() < 1e-4,
            format!("q={}: ({}, {}) vs {published:?}", row.param, row.r_min, row.sum_min),
        )?;
    }
    let grid = linear_grid(0.0, 0.15, DEFAULT_GRID_POINTS).map_err(e)?;
    let closed = polar_region_example1(0.15, 0.4, &grid).map_err(e)?;
    let general = polar_region_example1_general(0.15, 0.4, &grid).map_err(e)?;
    let mut worst = 0.0f64;
    for (a, b) in closed.rows.iter().zip(&general.rows) {
        worst = worst.max((a.r_min - b.r_min).abs()).max((a.sum_min - b.sum_min).abs());
    }
    ensure(worst < 1e-10, format!("general vs closed form {worst:e}"))?;
    let ex2 = polar_region_example2(0.4).map_err(e)?;
    ensure(
        (ex2.r - 1.0).abs() < 1e-12 && ex2.r0.abs() < 1e-12,
        format!("example 2 corner {ex2:?}"),
    )?;
    Ok(format!(
        "endpoints (1, 1) and ({:.5}, {:.5}); grid agreement {worst:e}; example 2 trivial {{R ≥ 1}}",
        closed.rows[200].r_min, closed.rows[200].sum_min
    ))
}

fn c10() -> Outcome {
    let wx = make_bsc(0.1).map_err(e)?;
    let wy = make_bsc(0.2).map_err(e)?;
    let wyx = joint_channel(&wx, &wy).map_err(e)?;
    let cx = information(&wx);
    let cyx = information(&wyx);
    let budget = QuantizationBudget::new(64).map_err(e)?;
    let mut rows = Vec::new();
    for m in [4u32, 6, 8, 10] {
        let yx = synthesize_auto(&wyx, m, budget).map_err(e)?;
        let x = synthesize_auto(&wx, m, budget).map_err(e)?;
        let code = build_code_from_profiles(&wx, &wy, &yx, &x, &ConstructionParams::default()).map_err(e)?;
        rows.push((m, code.rate_r, code.rate_r + code.rate_r0));
    }
    let gaps: Vec<(f64, f64)> = rows.iter().map(|&(_, r, s)| ((r - cx).abs(), (s - cyx).abs())).collect();
    let detail = rows
        .iter()
        .zip(&gaps)
        .map(|((m, r, s), (gr, gs))| format!("m={m}: R={r:.4} (gap {gr:.4}), R+R0={s:.4} (gap {gs:.4})"))
        .collect::<Vec<_>>()
        .join("; ");
    let monotone = gaps.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1);
    let r10 = rows.last().map_or(f64::NAN, |r| r.1);
    ensure(monotone, format!("gaps not nonincreasing: {detail}"))?;
    ensure((r10 - 0.53100).abs() <= 0.1, format!("R at m=10 is {r10}: {detail}"))?;
    Ok(format!("C_X = {cx:.5}, C_YX = {cyx:.5}; {detail}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("BEC exactness", c1, Duration::from_secs(1)),
        ("capacity equals row divergence", c2, Duration::from_secs(1)),
        ("synthesis bracketing", c3, Duration::from_secs(10)),
        ("good-set nesting", c4, Duration::from_secs(60)),
        ("resolvability KL identity and bound", c5, Duration::from_secs(120)),
        ("frozen-value invariance", c6, Duration::from_secs(120)),
        ("SC conditionals equal ensemble posteriors", c7, Duration::from_secs(60)),
        ("end-to-end coordination", c8, Duration::from_secs(300)),
        ("region reproduction", c9, Duration::from_secs(1)),
        ("rate convergence trend", c10, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} [{status}] {name} ({elapsed:.2?}): {detail}", k + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
