//! One PASS/FAIL line per acceptance criterion. Runs without the test
//! harness so the lines are always printed; exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use graphwave::diophantine::{continued_fraction, dirichlet_simultaneous};
use graphwave::ggcc::{evaluate, optimal_watershed_time};
use graphwave::graph::{normalize, Bc, ControlSet, MetricGraph};
use graphwave::quasimodes::{build_quasimode, find_violating_path, metrics, x_graph_resolvent_sequence};
use graphwave::scenario::{self, bot_graph, catalog};
use graphwave::spectral::{eigenvalues, resolvent_probe, weyl_count_check, EigenOptions};
use graphwave::wavesim::{
    default_probes, evolve, observability_ratio, scattering_matrix, Simulation, WaveState, DEFAULT_CAP,
};
use graphwave::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets.
const C1_INSTANCES: u64 = 500;
const C1_BUDGET: Duration = Duration::from_secs(10);
const C2_TRIPLES: usize = 100;
const C2_TOL: f64 = 1e-6;
const C3_BUDGET: Duration = Duration::from_secs(30);
const C4_RELDIFF: f64 = 1e-6;
const C4_FINAL_L2: f64 = 1e-3;
const C5A_MASS: f64 = 1e-10;
const C5B_DROP: f64 = 10.0;
const C5C_QUALITY: f64 = 0.29;
const C6_REL: f64 = 1e-9;
const C6_KMAX: f64 = 40.0;
const C7_RUNS: usize = 200;
const C7_REL: f64 = 1e-9;
const C7_ORTHO: f64 = 1e-14;
const C7_GLUE: f64 = 1e-12;
const C8_BUDGET: Duration = Duration::from_secs(60);
const C9_VECTORS: usize = 200;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut holds = 0;
    for seed in 0..C1_INSTANCES {
        let (g, w) = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        let v = evaluate(&normalize(&g, &w));
        check(v.criteria.all_agree(), || format!("seed {seed}: {:?}", v.criteria))?;
        holds += v.holds as usize;
    }
    for s in catalog() {
        let v = evaluate(&normalize(&s.graph, &s.omega));
        check(v.criteria.all_agree(), || format!("{}: {:?}", s.name, v.criteria))?;
    }
    let el = start.elapsed();
    check(el < C1_BUDGET, || format!("took {el:?}"))?;
    Ok(format!("{C1_INSTANCES} random + {} catalog agree ({holds} random hold)", catalog().len()))
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..C2_TRIPLES {
        let mut l: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..5.0)).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        if l[0] == l[1] || l[1] == l[2] {
            continue;
        }
        let s = bot_graph(l[0].into(), l[1].into(), l[2].into()).map_err(|e| e.to_string())?;
        let t = optimal_watershed_time(&normalize(&s.graph, &s.omega)).ok_or("no watershed")?;
        worst = worst.max((t - (2.0 * l[1]).max(l[0] + l[2])).abs());
    }
    check(worst <= C2_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("max |T* - max(2l2, l1+l3)| = {worst:.1e}"))
}

fn c3() -> Outcome {
    let start = Instant::now();
    let s = bot_graph(3.0.into(), 2.0.into(), 1.0.into()).map_err(|e| e.to_string())?;
    let n = normalize(&s.graph, &s.omega);
    let probes = default_probes(&s.graph, &n);
    let below = observability_ratio(&s.graph, &s.omega, 3.8, &probes).map_err(|e| e.to_string())?;
    let above = observability_ratio(&s.graph, &s.omega, 4.2, &probes).map_err(|e| e.to_string())?;
    let el = start.elapsed();
    check(below.ratio == 0.0, || format!("ratio at 3.8 is {:e}", below.ratio))?;
    check(above.ratio > 0.0, || "ratio at 4.2 is 0".into())?;
    check(el < C3_BUDGET, || format!("took {el:?}"))?;
    Ok(format!(
        "{} probes; ratio(3.8) = 0 via '{}', ratio(4.2) = {:.3e}",
        probes.len(),
        below.argmin_probe.label,
        above.ratio
    ))
}

fn c4() -> Outcome {
    let mut report = Vec::new();
    for (name, args) in [("x_graph", vec!["sqrt(2)", "1"]), ("triangle", vec![])] {
        let args: Vec<String> = args.into_iter().map(String::from).collect();
        let s = scenario::build(name, &args).map_err(|e| e.to_string())?;
        let n = normalize(&s.graph, &s.omega);
        let path = find_violating_path(&n).map_err(|e| e.to_string())?;
        let mut prev_l2 = f64::INFINITY;
        let mut sup: f64 = 0.0;
        let mut last_l2 = 0.0;
        for k in 2..=9 {
            let nn = 1u64 << k;
            let qm = build_quasimode(&n.graph, &path, nn).map_err(|e| format!("{name} n={nn}: {e}"))?;
            let m = metrics(&n.graph, &qm);
            check(m.grad_norm_sq.closed_form == 1.0, || format!("{name} n={nn}: grad {}", m.grad_norm_sq.closed_form))?;
            for p in [m.l2_norm_sq, m.grad_norm_sq, m.defect_sq] {
                check(p.rel_diff() <= C4_RELDIFF, || format!("{name} n={nn}: {p:?}"))?;
            }
            let l2 = m.l2_norm_sq.closed_form;
            // consecutive n can share one Diophantine approximation
            check(l2 <= prev_l2, || format!("{name} n={nn}: l2 {l2} above {prev_l2}"))?;
            prev_l2 = l2;
            last_l2 = l2;
            let c = nn as f64 * m.defect_sq.closed_form;
            check(c.is_finite(), || format!("{name} n={nn}: n*defect not finite"))?;
            sup = sup.max(c);
        }
        check(last_l2 < C4_FINAL_L2, || format!("{name}: l2 at n=512 is {last_l2:e}"))?;
        report.push(format!("{name}: l2(512) = {last_l2:.2e}, sup n*defect = {sup:.3e}"));
    }
    Ok(report.join("; "))
}

fn c5() -> Outcome {
    // (a) rational ratio: an eigenfunction invisible from the control set
    let s = scenario::build("x_graph", &["3/2".into(), "1".into()]).map_err(|e| e.to_string())?;
    let rows = resolvent_probe(&s.graph, &s.omega, 3.0 * PI).map_err(|e| e.to_string())?;
    let hidden = rows
        .iter()
        .filter(|r| r.k < 3.0 * PI)
        .min_by(|a, b| a.obs_mass_min.total_cmp(&b.obs_mass_min))
        .ok_or("no eigenvalues below 3 pi")?;
    check(hidden.obs_mass_min < C5A_MASS, || format!("(a) smallest mass {:e}", hidden.obs_mass_min))?;
    // (b) ratio e: relative defect falls along convergents, norm stays >= 1/2
    let seq = x_graph_resolvent_sequence(&Real::e(), 6);
    check(seq.len() == 6, || format!("(b) {} terms", seq.len()))?;
    let rel: Vec<f64> = seq.iter().map(|t| t.defect_sq / t.l2_norm_sq).collect();
    check(seq.iter().all(|t| t.l2_norm_sq >= 0.5), || "(b) l2 below 1/2".into())?;
    let best = rel[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let drop = rel[0] / best;
    check(drop >= C5B_DROP, || format!("(b) drop {drop:.2}x, {rel:?}"))?;
    // (c) ratio sqrt 2: bounded away from rationals
    let seq = x_graph_resolvent_sequence(&Real::parse("sqrt(2)").map_err(|e| e.to_string())?, 20);
    let min_q = seq.iter().map(|t| t.quality).fold(f64::INFINITY, f64::min);
    check(seq.len() == 20 && min_q >= C5C_QUALITY, || format!("(c) min quality {min_q}"))?;
    Ok(format!(
        "(a) mass {:.1e} at k = {:.6}; (b) defect/l2 drops {drop:.1}x; (c) min q|q sqrt2 - p| = {min_q:.4}",
        hidden.obs_mass_min, hidden.k
    ))
}

fn c6() -> Outcome {
    let opts = EigenOptions::default();
    let ks = |g: &MetricGraph, k_max: f64| eigenvalues(g, k_max, &opts).map(|s| s.pairs);
    let mut checked = 0;
    for (bcs, len, shift) in [
        ([Bc::Dirichlet, Bc::Dirichlet], 1.0, 0.0),
        ([Bc::Neumann, Bc::Neumann], 1.7, 0.0),
        ([Bc::Dirichlet, Bc::Neumann], 1.3, 0.5),
        ([Bc::Neumann, Bc::Dirichlet], 0.8, 0.5),
    ] {
        let g = MetricGraph::new(&bcs, &[(0, 1, len)]);
        let pairs = ks(&g, 30.0).map_err(|e| e.to_string())?;
        // positive branch: n pi / l with n >= 1, or (n + 1/2) pi / l with n >= 0
        let first = if shift == 0.0 { 1.0 } else { 0.5 };
        let want: Vec<f64> = (0..).map(|i| (first + i as f64) * PI / len).take_while(|k| *k <= 30.0).collect();
        check(pairs.len() == want.len(), || format!("{bcs:?}: {} vs {} roots", pairs.len(), want.len()))?;
        for (p, w) in pairs.iter().zip(&want) {
            check((p.k - w).abs() <= C6_REL * w, || format!("{bcs:?}: {} vs {w}", p.k))?;
            checked += 1;
        }
    }
    let star = MetricGraph::new(
        &[Bc::Interior, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet],
        &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)],
    );
    let pairs = ks(&star, 20.0).map_err(|e| e.to_string())?;
    let mut want: Vec<(f64, usize)> = Vec::new();
    for i in 0..8 {
        want.push(((i as f64 + 0.5) * PI, 1));
        want.push(((i + 1) as f64 * PI, 2));
    }
    want.retain(|w| w.0 <= 20.0);
    check(pairs.len() == want.len(), || format!("star: {} vs {} roots", pairs.len(), want.len()))?;
    for (p, w) in pairs.iter().zip(&want) {
        check((p.k - w.0).abs() <= C6_REL * w.0 && p.multiplicity == w.1, || format!("star: {} x{} vs {w:?}", p.k, p.multiplicity))?;
        checked += 1;
    }
    let mut worst = String::new();
    let mut worst_dev = 0.0;
    for s in catalog() {
        let w = weyl_count_check(&s.graph, C6_KMAX).map_err(|e| e.to_string())?;
        let dev = w.counted as f64 - w.predicted;
        check(w.ok, || format!("{}: counted {} predicted {:.2}", s.name, w.counted, w.predicted))?;
        if dev.abs() >= f64::abs(worst_dev) {
            worst_dev = dev;
            worst = s.name.clone();
        }
    }
    Ok(format!("{checked} roots match; largest Weyl deviation {worst_dev:+.2} ({worst})"))
}

fn min_len(g: &MetricGraph) -> f64 {
    g.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut energy, mut rev) = (0.0f64, 0.0f64);
    let mut runs = 0;
    while runs < C7_RUNS {
        let (g, _) = common::random_instance(&mut rng, 6);
        let st = common::random_state(&mut rng, &g);
        let e0 = st.energy();
        if e0 == 0.0 {
            continue;
        }
        let t = rng.random_range(0.0..6.0 * min_len(&g));
        let fwd = evolve(&g, &st, t).map_err(|e| e.to_string())?;
        energy = energy.max((fwd.energy() - e0).abs() / e0);
        let back = evolve(&g, &fwd.time_reversed(), t).map_err(|e| e.to_string())?.time_reversed();
        rev = rev.max(back.distance_sq(&st) / e0);
        runs += 1;
    }
    check(energy <= C7_REL, || format!("energy drift {energy:e}"))?;
    check(rev <= C7_REL, || format!("reversal error {rev:e}"))?;
    let mut ortho: f64 = 0.0;
    for m in 1..=8 {
        let s = scattering_matrix(m);
        for i in 0..m {
            for j in 0..m {
                let dot: f64 = (0..m).map(|k| s[k][i] * s[k][j]).sum();
                ortho = ortho.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    check(ortho <= C7_ORTHO, || format!("orthogonality {ortho:e}"))?;
    // gluing: a Dirichlet interval against the same interval cut in three
    let g = MetricGraph::new(&[Bc::Dirichlet, Bc::Neumann], &[(0, 1, 2.0)]);
    let h = MetricGraph::new(
        &[Bc::Dirichlet, Bc::Neumann, Bc::Interior, Bc::Interior],
        &[(0, 2, 0.5), (2, 3, 0.7), (3, 1, 0.8)],
    );
    let mut glue: f64 = 0.0;
    for _ in 0..20 {
        let st = common::random_state(&mut rng, &g);
        let mut sh = WaveState::zero(&h);
        for (list, target) in [(&st.r[0], &mut sh.r), (&st.s[0], &mut sh.s)] {
            for &(a, b, v) in list {
                for (j, off, len) in [(0, 0.0, 0.5), (1, 0.5, 0.7), (2, 1.2, 0.8)] {
                    let (x0, x1) = ((a - off).max(0.0), (b - off).min(len));
                    if x1 > x0 {
                        target[j].push((x0, x1, v));
                    }
                }
            }
        }
        let mut w = ControlSet::empty();
        w.add(0, 0.3, 1.0);
        let mut wh = ControlSet::empty();
        wh.add(0, 0.3, 0.5);
        wh.add(1, 0.0, 0.5);
        let s1 = Simulation::run(&g, &st, 10.0, DEFAULT_CAP).map_err(|e| e.to_string())?;
        let s2 = Simulation::run(&h, &sh, 10.0, DEFAULT_CAP).map_err(|e| e.to_string())?;
        for k in 0..=16 {
            let t = 0.5 * k as f64;
            let a = s1.state_at(t).energy();
            let b = s2.state_at(t).energy();
            glue = glue.max((a - b).abs());
            glue = glue.max((s1.observed_energy(&w, t) - s2.observed_energy(&wh, t)).abs());
        }
    }
    check(glue <= C7_GLUE, || format!("gluing {glue:e}"))?;
    Ok(format!(
        "{C7_RUNS} runs: energy {energy:.1e}, reversal {rev:.1e}; orthogonality {ortho:.1e}; gluing {glue:.1e}"
    ))
}

fn c8() -> Outcome {
    let start = Instant::now();
    let s = scenario::build("mixed_x", &[]).map_err(|e| e.to_string())?;
    let n = normalize(&s.graph, &s.omega);
    let probes = default_probes(&s.graph, &n);
    let r = observability_ratio(&s.graph, &s.omega, 4.5, &probes).map_err(|e| e.to_string())?;
    let el = start.elapsed();
    check(r.ratio > 0.0, || format!("ratio 0 via '{}'", r.argmin_probe.label))?;
    check(el < C8_BUDGET, || format!("took {el:?}"))?;
    Ok(format!("{} probes; ratio(4.5) = {:.3e}", probes.len(), r.ratio))
}

/// Smallest `q` in `1..=N^d` with every `|q a_j - round(q a_j)| <= 1/N`.
fn first_hit(alphas: &[f64], n: u64) -> i64 {
    let top = n.pow(alphas.len() as u32) as i64;
    (1..=top)
        .find(|&q| alphas.iter().all(|a| (q as f64 * a - (q as f64 * a).round()).abs() <= 1.0 / n as f64))
        .expect("pigeonhole")
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = 0;
    for _ in 0..C9_VECTORS {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        for d in 1..=3 {
            for nn in 1..=30 {
                let a = dirichlet_simultaneous(&v[..d], nn).map_err(|e| e.to_string())?;
                check(a.satisfies_bounds(), || format!("{v:?} d={d} N={nn}: {a:?}"))?;
                for (j, e) in a.errors.iter().enumerate() {
                    let direct = v[j] - a.p[j] as f64 / a.q as f64;
                    check((direct - e).abs() <= 1e-12, || format!("{v:?} d={d} N={nn}: error mismatch"))?;
                }
                let q0 = first_hit(&v[..d], nn);
                check(a.q == q0 * a.scaled_by, || format!("{v:?} d={d} N={nn}: q = {} but first hit {q0}", a.q))?;
                cases += 1;
            }
        }
    }
    let cf = continued_fraction(&Real::e(), 12);
    let terms: Vec<i64> = cf.to_i64().ok_or("huge quotient")?;
    let want = [2, 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8];
    check(terms == want, || format!("e = {terms:?}"))?;
    Ok(format!("{cases} approximations valid; e = [2; 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8]"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("criteria agree", c1),
        ("optimal time on three-arm star", c2),
        ("observability switches at T*", c3),
        ("quasimodes", c4),
        ("ratio dichotomy on the X graph", c5),
        ("spectra", c6),
        ("wave simulator exactness", c7),
        ("mixed boundary X graph observable", c8),
        ("Diophantine approximation", c9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {} {name} ({secs:.2}s): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
