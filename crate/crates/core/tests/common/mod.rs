//! Independent reference implementations shared by the integration tests
//! and the acceptance runner. Everything here works on plain `Vec<bool>`
//! bit arrays and hand-enumerated tables, never on the packed kernels.

#![allow(dead_code)]

use hdenc::analysis::certainty;
use hdenc::evaluation::EvalReport;
use hdenc::hdc::{bundle_threshold, make_level_memory, BitCounter, Hypervector, ItemMemory, MemoryKind, TieBreak};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_DIMS: [usize; 5] = [63, 64, 65, 1000, 19000];

/// Bit `i` of a packed vector, read straight from the little-endian words.
pub fn bits(hv: &Hypervector) -> Vec<bool> {
    (0..hv.dim())
        .map(|i| (hv.words()[i / 64] >> (i % 64)) & 1 == 1)
        .collect()
}

pub fn random_bits(rng: &mut impl Rng, dim: usize) -> Vec<bool> {
    (0..dim).map(|_| rng.random::<bool>()).collect()
}

pub fn naive_xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x != y).collect()
}

pub fn naive_hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Bitwise majority; exact ties take the tie-break bit.
pub fn naive_majority(items: &[Vec<bool>], tie: &[bool]) -> Vec<bool> {
    (0..tie.len())
        .map(|i| {
            let ones = items.iter().filter(|v| v[i]).count();
            let zeros = items.len() - ones;
            if ones != zeros {
                ones > zeros
            } else {
                tie[i]
            }
        })
        .collect()
}

/// Runs `n` randomized cases spread over [`ORACLE_DIMS`], comparing packed
/// bind, Hamming distance, range distance, bundling (three code paths) and
/// thresholding with the naive reference. Returns the first mismatch.
pub fn kernel_oracle_cases(n: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..n {
        let dim = ORACLE_DIMS[case % ORACLE_DIMS.len()];
        let ctx = |what: &str| format!("case {case} (dim {dim}): {what}");
        let a_bits = random_bits(&mut rng, dim);
        let b_bits = random_bits(&mut rng, dim);
        let a = Hypervector::from_bits(&a_bits).map_err(|e| ctx(&e.to_string()))?;
        let b = Hypervector::from_bits(&b_bits).map_err(|e| ctx(&e.to_string()))?;
        if bits(&a) != a_bits {
            return Err(ctx("bit packing"));
        }
        if bits(&a.bind(&b).unwrap()) != naive_xor(&a_bits, &b_bits) {
            return Err(ctx("bind"));
        }
        let h = naive_hamming(&a_bits, &b_bits);
        if a.hamming_count(&b).unwrap() != h || a.hamming(&b).unwrap() != h as f64 / dim as f64 {
            return Err(ctx("hamming"));
        }
        let s = rng.random_range(0..dim);
        let e = rng.random_range(s + 1..=dim);
        let hr = naive_hamming(&a_bits[s..e], &b_bits[s..e]) as f64 / (e - s) as f64;
        if a.hamming_range(&b, s, e).unwrap() != hr {
            return Err(ctx("hamming_range"));
        }
        if bits(&a.slice(s, e).unwrap()) != a_bits[s..e] {
            return Err(ctx("slice"));
        }

        let k = rng.random_range(1..=9);
        let item_bits: Vec<Vec<bool>> = (0..k).map(|_| random_bits(&mut rng, dim)).collect();
        let items: Vec<Hypervector> = item_bits.iter().map(|v| Hypervector::from_bits(v).unwrap()).collect();
        let tie = TieBreak::from_seed(case as u64, dim).unwrap();
        let expect = naive_majority(&item_bits, &bits(tie.vector()));

        let weighted: Vec<(&Hypervector, i64)> = items.iter().map(|v| (v, 1)).collect();
        if bits(&bundle_threshold(&weighted, &tie).unwrap()) != expect {
            return Err(ctx("weighted bundle"));
        }
        let mut counter = BitCounter::new(dim).unwrap();
        for v in &items {
            counter.add(v).unwrap();
        }
        if bits(&counter.threshold(&tie).unwrap()) != expect {
            return Err(ctx("bit counter bundle"));
        }
        // bundling a ^ x_i through the fused path equals bundling the bound vectors
        let mut fused = BitCounter::new(dim).unwrap();
        for v in &items {
            fused.add_bound(&a, v).unwrap();
        }
        let bound_bits: Vec<Vec<bool>> = item_bits.iter().map(|v| naive_xor(&a_bits, v)).collect();
        if bits(&fused.threshold(&tie).unwrap()) != naive_majority(&bound_bits, &bits(tie.vector())) {
            return Err(ctx("fused bind-bundle"));
        }
    }
    Ok(n)
}

/// `(truth, pred, episode (tp, fp, fn), windows (tp, fp, fn, tn))`, all
/// enumerated by hand: an episode is a maximal run of 1s, a truth episode is
/// detected when any predicted run shares a window with it, and a predicted
/// run sharing no window with any truth run is a false positive.
pub type LabelCase = (&'static str, &'static str, (u64, u64, u64), (u64, u64, u64, u64));

pub const LABEL_CASES: [LabelCase; 25] = [
    ("0011100", "0011100", (1, 0, 0), (3, 0, 0, 4)),
    ("0011100", "0000000", (0, 0, 1), (0, 0, 3, 4)),
    ("00111000", "00100001", (1, 1, 0), (1, 1, 2, 4)),
    ("1100", "1010", (1, 1, 0), (1, 1, 1, 1)),
    ("0111110", "0101010", (1, 0, 0), (3, 0, 2, 2)),
    ("0000", "0000", (0, 0, 0), (0, 0, 0, 4)),
    ("0000", "0110", (0, 1, 0), (0, 2, 0, 2)),
    ("1111", "1111", (1, 0, 0), (4, 0, 0, 0)),
    ("1111", "0000", (0, 0, 1), (0, 0, 4, 0)),
    ("0110", "1001", (0, 2, 1), (0, 2, 2, 0)),
    ("0110011000", "0100001100", (2, 0, 0), (2, 1, 2, 5)),
    ("0110011000", "0111111000", (2, 0, 0), (4, 2, 0, 4)),
    ("0110011000", "0000000011", (0, 1, 2), (0, 2, 4, 4)),
    ("1000000001", "1000000001", (2, 0, 0), (2, 0, 0, 8)),
    ("1000000001", "0000000001", (1, 0, 1), (1, 0, 1, 8)),
    ("0001000", "0000100", (0, 1, 1), (0, 1, 1, 5)),
    ("0001100", "0000110", (1, 0, 0), (1, 1, 1, 4)),
    ("0000000", "1010101", (0, 4, 0), (0, 4, 0, 3)),
    ("1010101", "1010101", (4, 0, 0), (4, 0, 0, 3)),
    ("1010101", "0101010", (0, 3, 4), (0, 3, 4, 0)),
    ("0011111100", "0010000100", (1, 0, 0), (2, 0, 4, 4)),
    ("0011001100", "0011111100", (2, 0, 0), (4, 2, 0, 4)),
    ("11100000111", "00000000000", (0, 0, 2), (0, 0, 6, 5)),
    ("00000000000", "11100000111", (0, 2, 0), (0, 6, 0, 5)),
    ("0111000111000", "0011100000011", (1, 1, 1), (2, 3, 4, 4)),
];

pub fn labels(s: &str) -> Vec<u8> {
    s.bytes().map(|b| b - b'0').collect()
}

fn rate(num: u64, other: u64) -> f64 {
    if num + other == 0 {
        0.0
    } else {
        num as f64 / (num + other) as f64
    }
}

/// F1DE from hand counts: each F1 is the geometric mean of TPR and PPV.
pub fn hand_f1de((etp, efp, efn): (u64, u64, u64), (wtp, wfp, wfn, _): (u64, u64, u64, u64)) -> f64 {
    let f1e = (rate(etp, efn) * rate(etp, efp)).sqrt();
    let f1d = (rate(wtp, wfn) * rate(wtp, wfp)).sqrt();
    (f1e * f1d).sqrt()
}

/// Checks every hand case against the library; returns the count.
pub fn label_oracle_cases() -> Result<usize, String> {
    for (i, &(t, p, ep, win)) in LABEL_CASES.iter().enumerate() {
        let r = EvalReport::evaluate(&labels(t), &labels(p)).map_err(|e| e.to_string())?;
        let c = &r.episode_counts;
        let w = &r.window_counts;
        if (c.tp, c.fp, c.fn_) != ep {
            return Err(format!("case {i} ({t} vs {p}): episodes {:?}, expected {ep:?}", (c.tp, c.fp, c.fn_)));
        }
        if (w.tp, w.fp, w.fn_, w.tn) != win {
            return Err(format!("case {i} ({t} vs {p}): windows {:?}, expected {win:?}", (w.tp, w.fp, w.fn_, w.tn)));
        }
        let expect = hand_f1de(ep, win);
        if (r.f1de_gmean - expect).abs() > 1e-12 {
            return Err(format!("case {i}: f1de {} expected {expect}", r.f1de_gmean));
        }
    }
    Ok(LABEL_CASES.len())
}

/// Mean certainty over features must be 1 wherever the mean gap is
/// non-zero. Returns the largest deviation seen.
pub fn certainty_identity(n: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..n {
        let nf = rng.random_range(1..=40);
        let dists: Vec<(f64, f64)> = (0..nf)
            .map(|_| {
                // occasionally equal distances, to exercise zero gaps
                let s: f64 = rng.random();
                let ns = if rng.random_bool(0.1) { s } else { rng.random() };
                (s, ns)
            })
            .collect();
        let c = certainty(&dists);
        let gaps: f64 = dists.iter().map(|(s, ns)| (s - ns).abs()).sum();
        if gaps == 0.0 {
            if c.iter().any(|&v| v != 0.0) {
                return Err(format!("case {case}: zero gaps must give zero certainty"));
            }
            continue;
        }
        let mean = c.iter().sum::<f64>() / nf as f64;
        worst = worst.max((mean - 1.0).abs());
        if (mean - 1.0).abs() > 1e-9 {
            return Err(format!("case {case}: mean certainty {mean}"));
        }
    }
    Ok(worst)
}

/// Randomized algebraic invariants: XOR distance preservation, odd-count
/// bundles as exact majority, level-distance monotonicity, and random
/// identity vectors near 0.5 apart at D = 19000. Returns the number of
/// checks and the observed random-pair distance range.
pub fn invariant_cases(n: usize, seed: u64) -> Result<(usize, f64, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    for case in 0..n {
        let dim = rng.random_range(1..3000);
        let a = Hypervector::random(dim, &mut rng).map_err(|e| e.to_string())?;
        let b = Hypervector::random(dim, &mut rng).map_err(|e| e.to_string())?;
        let c = Hypervector::random(dim, &mut rng).map_err(|e| e.to_string())?;
        let d = a.hamming_count(&b).unwrap();
        if a.bind(&c).unwrap().hamming_count(&b.bind(&c).unwrap()).unwrap() != d {
            return Err(format!("case {case}: binding changed a distance"));
        }
        let k = 2 * rng.random_range(0..5) + 1;
        let items: Vec<Vec<bool>> = (0..k).map(|_| random_bits(&mut rng, dim)).collect();
        let hvs: Vec<Hypervector> = items.iter().map(|v| Hypervector::from_bits(v).unwrap()).collect();
        let weighted: Vec<(&Hypervector, i64)> = hvs.iter().map(|v| (v, 1)).collect();
        let tie = TieBreak::from_seed(case as u64, dim).unwrap();
        if bits(&bundle_threshold(&weighted, &tie).unwrap()) != naive_majority(&items, &vec![false; dim]) {
            return Err(format!("case {case}: odd bundle is not the majority"));
        }
        checks += 2;
        if case % 10 == 0 {
            let bins = rng.random_range(2..30);
            let m = make_level_memory(rng.random_range(bins..4000), bins, case as u64).unwrap();
            let e = m.entries();
            for i in 0..bins {
                let row: Vec<usize> = (0..bins).map(|j| e[i].hamming_count(&e[j]).unwrap()).collect();
                if (i..bins - 1).any(|j| row[j] > row[j + 1]) || (1..=i).any(|j| row[j - 1] < row[j]) {
                    return Err(format!("case {case}: level distances not monotone"));
                }
            }
            checks += 1;
        }
    }
    let m = ItemMemory::random(MemoryKind::FeatureIds, 40, 19_000, seed).unwrap();
    let e = m.entries();
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let d = e[i].hamming(&e[j]).unwrap();
            lo = lo.min(d);
            hi = hi.max(d);
            checks += 1;
        }
    }
    if lo < 0.45 || hi > 0.55 {
        return Err(format!("random pair distances span [{lo}, {hi}]"));
    }
    Ok((checks, lo, hi))
}
