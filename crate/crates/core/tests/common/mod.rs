//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use cjss::{parse_instance, Instance, Schedule};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn load(name: &str) -> Instance {
    let path = data_dir().join(format!("{name}.txt"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_instance(&text, name).unwrap()
}

/// Random shop with at most `max_ops` operations in total.
pub fn random_instance<R: Rng>(rng: &mut R, max_ops: usize, max_machines: usize, max_p: u32) -> Instance {
    let machines = rng.random_range(1..=max_machines);
    let total = rng.random_range(1..=max_ops);
    let mut routes: Vec<Vec<(usize, u32)>> = Vec::new();
    let mut left = total;
    while left > 0 {
        let len = rng.random_range(1..=left.min(machines.max(2)));
        routes.push((0..len).map(|_| (rng.random_range(0..machines), rng.random_range(1..=max_p))).collect());
        left -= len;
    }
    let refs: Vec<&[(usize, u32)]> = routes.iter().map(Vec::as_slice).collect();
    Instance::from_routes("random", machines, &refs).unwrap()
}

/// Starts drawn uniformly from `[0, total duration]`; integral half the time.
pub fn random_schedule<R: Rng>(rng: &mut R, inst: &Instance) -> Schedule {
    let hi = inst.total_duration() as f64;
    let integral = rng.random_bool(0.5);
    let starts = (0..inst.op_count())
        .map(|_| {
            let v = rng.random_range(0.0..=hi);
            if integral {
                v.floor()
            } else {
                v
            }
        })
        .collect();
    Schedule::new(inst, starts).unwrap()
}

/// Same-machine op groups, computed without the library's constraint set.
pub fn machine_groups(inst: &Instance) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); inst.machine_count()];
    for i in 0..inst.op_count() {
        groups[inst.op(i).machine].push(i);
    }
    groups
}

/// Earliest starts for fixed machine sequences by Bellman-Ford relaxation;
/// `None` when the precedence graph has a cycle.
pub fn longest_path(inst: &Instance, seqs: &[Vec<usize>]) -> Option<Vec<f64>> {
    let n = inst.op_count();
    let mut arcs = Vec::new();
    for j in 0..inst.job_count() {
        let r = inst.job_range(j);
        for i in r.start..r.end - 1 {
            arcs.push((i, i + 1));
        }
    }
    for seq in seqs {
        for w in seq.windows(2) {
            arcs.push((w[0], w[1]));
        }
    }
    let mut start = vec![0.0; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(u, v) in &arcs {
            let t = start[u] + inst.duration(u);
            if t > start[v] {
                start[v] = t;
                changed = true;
            }
        }
        if !changed {
            return Some(start);
        }
    }
    None
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

pub struct Optimum {
    pub tau: f64,
    pub sequences: Vec<Vec<usize>>,
    pub starts: Vec<f64>,
}

/// Exhaustive minimum over every machine-sequence combination.
pub fn brute_force(inst: &Instance) -> Optimum {
    let per_machine: Vec<Vec<Vec<usize>>> = machine_groups(inst).iter().map(|g| permutations(g)).collect();
    let mut idx = vec![0usize; per_machine.len()];
    let mut best: Option<Optimum> = None;
    loop {
        let seqs: Vec<Vec<usize>> = idx.iter().zip(&per_machine).map(|(&i, p)| p[i].clone()).collect();
        if let Some(starts) = longest_path(inst, &seqs) {
            let tau = (0..inst.op_count()).map(|i| starts[i] + inst.duration(i)).fold(0.0, f64::max);
            if best.as_ref().is_none_or(|b| tau < b.tau) {
                best = Some(Optimum { tau, sequences: seqs, starts });
            }
        }
        // odometer increment
        let mut m = 0;
        loop {
            if m == idx.len() {
                return best.expect("job order alone is acyclic");
            }
            idx[m] += 1;
            if idx[m] < per_machine[m].len() {
                break;
            }
            idx[m] = 0;
            m += 1;
        }
    }
}

/// Penalty energy from first principles: `tau + k * sum(max(0, r)^2) / 2`
/// over route pairs and start-ordered machine pairs.
pub fn energy_oracle(inst: &Instance, s: &[f64], k: f64) -> f64 {
    let p = |i: usize| inst.duration(i);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = (0..s.len()).map(|i| s[i] + p(i)).fold(f64::NEG_INFINITY, f64::max);
    let phi = |r: f64| if r > 0.0 { 0.5 * r * r } else { 0.0 };
    let mut pen = 0.0;
    for j in 0..inst.job_count() {
        let r = inst.job_range(j);
        for i in r.start..r.end - 1 {
            pen += phi(s[i] + p(i) - s[i + 1]);
        }
    }
    for g in machine_groups(inst) {
        for x in 0..g.len() {
            for y in x + 1..g.len() {
                let (a, b) = (g[x], g[y]);
                let (u, v) = if s[a] <= s[b] { (a, b) } else { (b, a) };
                pen += phi(s[u] + p(u) - s[v]);
            }
        }
    }
    hi - lo + k * pen
}

/// True when no residual lies within `margin` of zero, no same-machine pair
/// is within `h` of swapping order, and `C_max` and `S_min` each have a
/// unique attaining op by more than `h`. Those two ops must differ, else
/// the cycle time is locally constant and the gradient is all zeros.
pub fn away_from_kinks(inst: &Instance, cs: &cjss::ConstraintSet, s: &Schedule, margin: f64, h: f64) -> bool {
    let st = s.starts();
    if cjss::energy::residuals(inst, cs, s).iter().any(|r| r.abs() <= margin) {
        return false;
    }
    if cs.disjunctive().iter().any(|&(a, b)| (st[a] - st[b]).abs() <= 2.0 * h) {
        return false;
    }
    let gap = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.len() < 2 || v[1] - v[0] > 2.0 * h
    };
    let ends: Vec<f64> = (0..st.len()).map(|i| -(st[i] + inst.duration(i))).collect();
    let arg = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]));
    arg(st) != arg(&ends) && gap(st.to_vec()) && gap(ends) && st.iter().all(|&v| v > h)
}

/// Central differences of `f` at `s` with step `h`.
pub fn central_differences(s: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut x = s.to_vec();
    (0..s.len())
        .map(|i| {
            x[i] = s[i] + h;
            let up = f(&x);
            x[i] = s[i] - h;
            let down = f(&x);
            x[i] = s[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b|_2 / |b|_2`; zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(f64::MIN_POSITIVE)
}

/// Random continuous schedule that passes [`away_from_kinks`].
pub fn kink_free_schedule<R: Rng>(rng: &mut R, inst: &Instance, cs: &cjss::ConstraintSet, h: f64) -> Option<Schedule> {
    for _ in 0..1000 {
        let hi = inst.total_duration() as f64;
        let starts = (0..inst.op_count()).map(|_| rng.random_range(0.0..hi)).collect();
        let s = Schedule::new(inst, starts).unwrap();
        if away_from_kinks(inst, cs, &s, 1e-4, h) {
            return Some(s);
        }
    }
    None
}
