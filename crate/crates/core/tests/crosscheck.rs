//! Cross-module agreement with the exhaustive oracle, plus the sampled
//! checks that need many runs.

use polar_coord::channel::{cascade, joint_channel, make_bec, make_bsc};
use polar_coord::construction::{build_partition, CoordinationCode, NestingPolicy, SelectionMode};
use polar_coord::coordination::{node_x_encode, node_y_decode, simulate_sessions, single_letter_target};
use polar_coord::oracle::{
    coordination_summary, induced_coordination_joint, induced_resolvability_dist, DEFAULT_TABLE_CAP,
};
use polar_coord::oracle::table::tv_l1;
use polar_coord::polar::PolarParams;
use polar_coord::resolvability::{empirical_output, ResolvabilityCode};
use polar_coord::synthesis::{synthesize_exact, synthesize_mixture_exact};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn code(q: f64, p: f64, m: u32) -> CoordinationCode {
    let wx = make_bsc(q).unwrap();
    let wy = make_bsc(p).unwrap();
    let t = SelectionMode::threshold(0.25).unwrap();
    let yx = synthesize_exact(&joint_channel(&wx, &wy).unwrap(), m, 1 << 24).unwrap();
    let x = synthesize_exact(&wx, m, DEFAULT_TABLE_CAP).unwrap();
    let part = build_partition(&yx, &x, t, t, NestingPolicy::Strict).unwrap();
    CoordinationCode::from_partition(wx, wy, part, None).unwrap()
}

#[test]
fn mixture_recursion_matches_enumeration() {
    let wx = make_bsc(0.12).unwrap();
    let wy = cascade(&make_bsc(0.2).unwrap(), &make_bec(0.3).unwrap()).unwrap();
    for (ch, m) in [(joint_channel(&wx, &wy).unwrap(), 2), (joint_channel(&wx, &make_bsc(0.2).unwrap()).unwrap(), 3)] {
        let a = synthesize_exact(&ch, m, 1 << 25).unwrap();
        let b = synthesize_mixture_exact(&ch, m, 1 << 20).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.capacity_lower - y.capacity_lower).abs() < 1e-10, "{m} {} {}", x.capacity_lower, y.capacity_lower);
        }
    }
}

#[test]
fn partition_equals_brute_force_threshold() {
    let c = code(0.1, 0.2, 2);
    let thr = (-(4f64).powf(0.25)).exp2();
    let wyx = joint_channel(&make_bsc(0.1).unwrap(), &make_bsc(0.2).unwrap()).unwrap();
    let yx = polar_coord::oracle::brute_force_bit_channels(&wyx, 2, DEFAULT_TABLE_CAP).unwrap();
    let good: Vec<usize> = yx.iter().filter(|t| t.capacity >= thr).map(|t| t.index).collect();
    assert_eq!(c.partition.good_yx_v, good);
}

#[test]
fn lemma4_telescoping_bound() {
    for (q, p) in [(0.1, 0.2), (0.05, 0.3), (0.2, 0.1)] {
        let s = coordination_summary(&code(q, p, 2), DEFAULT_TABLE_CAP).unwrap();
        assert!(s.telescoping_holds(1e-12), "{s:?}");
        assert!(s.triangle_holds(1e-12), "{s:?}");
    }
}

#[test]
fn resolvability_empirical_matches_exact() {
    let ch = make_bsc(0.3).unwrap();
    let code = ResolvabilityCode::new(ch, PolarParams::new(2).unwrap(), vec![3], None).unwrap();
    let exact = induced_resolvability_dist(&code, DEFAULT_TABLE_CAP).unwrap();
    let emp = empirical_output(&code, 1_000_000, 11);
    let freq: Vec<f64> = emp
        .sequence_counts
        .unwrap()
        .iter()
        .map(|&c| c as f64 / 1e6)
        .collect();
    let d = tv_l1(&freq, exact.probs());
    assert!(d < 0.005, "{d}");
}

#[test]
fn small_block_sessions_match_exact_joint() {
    let c = code(0.1, 0.2, 1);
    let exact = induced_coordination_joint(&c, DEFAULT_TABLE_CAP).unwrap();
    let sessions = 2_000_000;
    let stats = simulate_sessions(&c, sessions, 21).unwrap();
    for (&obs, &p) in stats.block_counts.unwrap().iter().zip(exact.xy.probs()) {
        let mean = p * sessions as f64;
        let sd = (sessions as f64 * p * (1.0 - p)).sqrt();
        assert!((obs as f64 - mean).abs() <= 4.0 * sd + 1e-9, "{obs} vs {mean} ± {sd}");
    }
}

#[test]
fn per_symbol_pairs_at_n8_match_exact_marginals() {
    let c = code(0.1, 0.2, 3);
    let exact = induced_coordination_joint(&c, 1 << 26).unwrap();
    let target = single_letter_target(&c);
    let stats = simulate_sessions(&c, 1_000_000, 3).unwrap();
    for (j, row) in stats.pair_counts.iter().enumerate() {
        let pair = exact.xy.marginal(&[j, 8 + j]).unwrap();
        // the code itself sits at L1 0.08446 from q_XY at every position
        assert!((tv_l1(pair.probs(), &target) - 0.08446).abs() < 1e-4);
        let freq: Vec<f64> = row.iter().map(|&k| k as f64 / 1e6).collect();
        assert!(tv_l1(&freq, pair.probs()) < 0.005, "position {j}");
    }
}

#[test]
fn encoder_u_frequencies_match_exact_conditional() {
    let c = code(0.1, 0.2, 2);
    let joint = induced_coordination_joint(&c, DEFAULT_TABLE_CAP).unwrap();
    let x = [0u8, 1, 1, 0];
    let x_word = 0b0110usize;
    // exact p(u | x) from the (u, x) table
    let px: f64 = (0..16).map(|u| joint.ux.probs()[(u << 4) | x_word]).sum();
    let cond: Vec<f64> = (0..16).map(|u| joint.ux.probs()[(u << 4) | x_word] / px).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let common = vec![0u8; c.partition.f2.len()];
    assert!(common.is_empty());
    let trials = 1_000_000;
    let mut counts = [0u64; 16];
    for _ in 0..trials {
        let (u, _) = node_x_encode(&c, &x, &common, &mut rng).unwrap();
        counts[u.iter().fold(0, |a, &b| (a << 1) | b as usize)] += 1;
    }
    for (&k, &p) in counts.iter().zip(&cond) {
        let mean = p * trials as f64;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((k as f64 - mean).abs() <= 3.0 * sd + 1e-9, "{k} vs {mean} ± {sd}");
    }
}

#[test]
fn node_y_with_uniform_u_gives_target_marginal() {
    let c = code(0.1, 0.2, 2);
    let q_y = c.wy_v.output_distribution();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let trials = 400_000;
    let mut counts = vec![[0u64; 2]; 4];
    for t in 0..trials {
        let message: Vec<u8> = c.partition.f3.iter().enumerate().map(|(k, _)| ((t >> k) & 1) as u8).collect();
        let y = node_y_decode(&c, &message, &[], &mut rng).unwrap();
        for (j, &s) in y.iter().enumerate() {
            counts[j][s] += 1;
        }
    }
    // F1 is frozen, so positions see the codeword distribution of a coset;
    // every position of this coset is still uniform
    for row in &counts {
        let p = q_y[0];
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((row[0] as f64 - p * trials as f64).abs() <= 3.0 * sd, "{row:?}");
    }
}
