//! Naive string-based reference implementation. Shares no code with the
//! library: sequences are `Vec<char>`, fractions are reduced by hand, and
//! sequence probabilities are built flip by flip.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Reduced (numerator, denominator) with positive denominator.
pub fn frac(num: i64, den: i64) -> (i64, i64) {
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    if d < 0 {
        (-n, -d)
    } else {
        (n, d)
    }
}

pub fn frac_sub(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    frac(a.0 * b.1 - b.0 * a.1, a.1 * b.1)
}

/// All length-k strings over {H, T}.
pub fn all_strings(k: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|s| {
                let mut h = s.clone();
                h.push('H');
                let mut t = s;
                t.push('T');
                [h, t]
            })
            .collect();
    }
    out
}

/// (successes, eligible) for hits after `m` consecutive `cond` characters.
pub fn naive_counts(s: &[char], cond: char, m: usize) -> (i64, i64) {
    let mut succ = 0;
    let mut elig = 0;
    for t in m..s.len() {
        if s[t - m..t].iter().all(|&c| c == cond) {
            elig += 1;
            if s[t] == 'H' {
                succ += 1;
            }
        }
    }
    (succ, elig)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NaiveStat {
    Hit(usize),
    Miss(usize),
    Diff(usize),
}

/// The statistic value, or None when undefined.
pub fn naive_value(s: &[char], stat: NaiveStat) -> Option<(i64, i64)> {
    let f = |cond, m| {
        let (a, b) = naive_counts(s, cond, m);
        (b > 0).then(|| frac(a, b))
    };
    match stat {
        NaiveStat::Hit(m) => f('H', m),
        NaiveStat::Miss(m) => f('T', m),
        NaiveStat::Diff(m) => Some(frac_sub(f('H', m)?, f('T', m)?)),
    }
}

pub fn naive_weight(s: &[char], p: f64) -> f64 {
    s.iter().fold(1.0, |w, &c| w * if c == 'H' { p } else { 1.0 - p })
}

#[derive(Debug)]
pub struct NaiveSummary {
    pub unweighted_exclude: f64,
    pub unweighted_zero: f64,
    pub pooled: f64,
    pub defined_count: u64,
    pub defined_probability: f64,
    pub histogram: BTreeMap<(i64, i64), f64>,
}

pub fn naive_summary(k: usize, p: f64, stat: NaiveStat) -> NaiveSummary {
    let mut hist: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    let (mut defined_count, mut defined_p, mut total_p, mut vsum) = (0u64, 0.0, 0.0, 0.0);
    let mut pooled = [[0.0f64; 2]; 2];
    for s in all_strings(k) {
        let w = naive_weight(&s, p);
        total_p += w;
        let sides: Vec<(char, usize)> = match stat {
            NaiveStat::Hit(m) => vec![('H', m)],
            NaiveStat::Miss(m) => vec![('T', m)],
            NaiveStat::Diff(m) => vec![('H', m), ('T', m)],
        };
        for (i, &(cond, m)) in sides.iter().enumerate() {
            let (a, b) = naive_counts(&s, cond, m);
            pooled[i][0] += w * a as f64;
            pooled[i][1] += w * b as f64;
        }
        if let Some(v) = naive_value(&s, stat) {
            defined_count += 1;
            defined_p += w;
            vsum += w * v.0 as f64 / v.1 as f64;
            *hist.entry(v).or_insert(0.0) += w;
        }
    }
    let pooled = match stat {
        NaiveStat::Diff(_) => pooled[0][0] / pooled[0][1] - pooled[1][0] / pooled[1][1],
        _ => pooled[0][0] / pooled[0][1],
    };
    NaiveSummary {
        unweighted_exclude: vsum / defined_p,
        unweighted_zero: vsum / total_p,
        pooled,
        defined_count,
        defined_probability: defined_p,
        histogram: hist,
    }
}
