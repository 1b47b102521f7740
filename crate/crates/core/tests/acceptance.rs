//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::{bool_oracle, corpus, manufactured, median, rel_inf_err};
use symsolve::mapping::{map_value, ComputationMap};
use symsolve::matrix::{laplacian_2d, SparseSymMatrix};
use symsolve::ordering::Ordering;
use symsolve::pipeline::{analyze, factorize_analyzed, Analysis};
use symsolve::runtime::{deadlock_fixture, random_task_tree, run, simulate, RunStats};
use symsolve::solve::solve;
use symsolve::symbolic::MAX_SUPERNODE_WIDTH;
use symsolve::taskgraph::CommBound;
use symsolve::{MapKind, Protocol, RunConfig, Schedule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct SweepRun {
    label: String,
    map: MapKind,
    procs: usize,
    protocol: Protocol,
    residual: f64,
    bounds: Vec<CommBound>,
    stats: RunStats,
}

fn analyzed_corpus() -> Vec<(String, SparseSymMatrix, Analysis)> {
    corpus()
        .into_iter()
        .map(|(name, a)| {
            let an = analyze(&a, &Ordering::MinimumDegree, MAX_SUPERNODE_WIDTH).expect("corpus analyzes");
            (name, a, an)
        })
        .collect()
}

/// Every corpus matrix under every (P, map, protocol, schedule) combination.
fn sweep(mats: &[(String, SparseSymMatrix, Analysis)]) -> (Vec<SweepRun>, Vec<String>) {
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    for (name, a, an) in mats {
        for procs in [1, 2, 3, 4, 8] {
            for map in MapKind::ALL {
                let bounds = an.comm_bounds(map, procs);
                for protocol in [Protocol::PushOrdered, Protocol::Pull] {
                    for schedule in [Schedule::Static, Schedule::Dynamic] {
                        let cfg = RunConfig::new(procs, map, protocol, schedule);
                        let label = format!("{name} P={procs} {map} {protocol} {schedule}");
                        match factorize_analyzed(an, &cfg).and_then(|f| Ok((f.factor.residual(a)?, f.stats))) {
                            Ok((residual, stats)) => runs.push(SweepRun {
                                label,
                                map,
                                procs,
                                protocol,
                                residual,
                                bounds: bounds.clone(),
                                stats,
                            }),
                            Err(e) => errors.push(format!("{label}: {e}")),
                        }
                    }
                }
            }
        }
    }
    (runs, errors)
}

fn criterion1(runs: &[SweepRun], errors: &[String], secs: f64) -> Outcome {
    let worst = runs.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
    let bad: Vec<&SweepRun> = runs.iter().filter(|r| !(r.residual <= 1e-12)).collect();
    let pass = errors.is_empty() && bad.is_empty() && secs < 300.0;
    let mut d = format!(
        "{} runs, max residual {:.2e}, {:.1}s",
        runs.len(),
        worst.map_or(0.0, |w| w.residual),
        secs
    );
    if let Some(e) = errors.first() {
        d.push_str(&format!("; {} errors, first: {e}", errors.len()));
    }
    if let Some(b) = bad.first() {
        d.push_str(&format!("; {} over tolerance, first: {} ({:e})", bad.len(), b.label, b.residual));
    }
    outcome(pass, d)
}

fn criterion2(mats: &[(String, SparseSymMatrix, Analysis)]) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, _, an) in mats.iter().filter(|m| m.1.n() <= 200) {
        let o = bool_oracle(&an.permuted, MAX_SUPERNODE_WIDTH);
        let sf = &an.sf;
        let snodes: Vec<(usize, usize)> = sf.snodes.iter().map(|s| (s.first, s.end)).collect();
        if sf.lstruct != o.lstruct {
            failures.push(format!("{name}: L structure"));
        }
        if sf.etree.parents() != o.parent.as_slice() {
            failures.push(format!("{name}: elimination tree"));
        }
        if sf.colcount != o.colcount {
            failures.push(format!("{name}: column counts"));
        }
        if snodes != o.snodes {
            failures.push(format!("{name}: supernodes"));
        }
        checked += 1;
    }
    outcome(failures.is_empty(), format!("{checked} matrices; mismatches: {failures:?}"))
}

fn criterion3() -> Outcome {
    let mut notes = Vec::new();
    for p in 2..=8 {
        let g = deadlock_fixture(p);
        let eager = RunConfig::new(p, MapKind::FanBoth, Protocol::Push, Schedule::Static).with_slots(1, 1);
        match simulate(&g, None, &eager).map(|o| o.stats.deadlock) {
            Ok(Some(c)) if c.len() >= 2 && c.contains(&0) && c.contains(&1) => {}
            other => notes.push(format!("P={p} eager push: {other:?}")),
        }
        for protocol in [Protocol::PushOrdered, Protocol::Pull] {
            for schedule in [Schedule::Static, Schedule::Dynamic] {
                let cfg = RunConfig::new(p, MapKind::FanBoth, protocol, schedule).with_slots(1, 1);
                if let Err(e) = run(&g, None, &cfg) {
                    notes.push(format!("P={p} {protocol} {schedule}: {e}"));
                }
            }
        }
    }
    let mut trees = 0;
    for seed in 0..200u64 {
        let procs = 2 + (seed % 7) as usize;
        let cols = 5 + (seed * 7 % 60) as usize;
        let slots = 1 + (seed % 2) as usize;
        let g = random_task_tree(seed, procs, cols);
        for protocol in [Protocol::PushOrdered, Protocol::Pull] {
            for schedule in [Schedule::Static, Schedule::Dynamic] {
                let cfg = RunConfig::new(procs, MapKind::FanBoth, protocol, schedule)
                    .with_slots(slots, slots)
                    .with_seed(seed)
                    .with_perturbation(0.5);
                match run(&g, None, &cfg) {
                    Ok(o) if o.stats.tasks_executed == cols => {}
                    Ok(o) => notes.push(format!("tree {seed}: executed {}", o.stats.tasks_executed)),
                    Err(e) => notes.push(format!("tree {seed} {protocol} {schedule}: {e}")),
                }
            }
        }
        trees += 1;
    }
    outcome(
        notes.is_empty(),
        format!("fixtures P=2..8, {trees} random trees; problems: {:?}", notes.iter().take(5).collect::<Vec<_>>()),
    )
}

fn criterion4(runs: &[SweepRun], mats: &[(String, SparseSymMatrix, Analysis)]) -> Outcome {
    let mut notes = Vec::new();
    for r in runs {
        if !r.stats.within_bounds(&r.bounds) {
            notes.push(format!("{}: traffic above bounds", r.label));
        }
        if r.map == MapKind::FanIn && r.stats.bytes.factor != 0 {
            notes.push(format!("{}: fan-in factor bytes {}", r.label, r.stats.bytes.factor));
        }
        if r.map == MapKind::FanOut && r.stats.bytes.aggregate != 0 {
            notes.push(format!("{}: fan-out aggregate bytes {}", r.label, r.stats.bytes.aggregate));
        }
    }
    let lap8 = &mats.iter().find(|m| m.0 == "lap2d 8x8").expect("lap2d 8x8 in corpus").2;
    let mut both = Vec::new();
    for protocol in [Protocol::PushOrdered, Protocol::Pull] {
        let cfg = RunConfig::new(4, MapKind::FanBoth, protocol, Schedule::Static);
        match factorize_analyzed(lap8, &cfg) {
            Ok(f) => {
                if f.stats.bytes.factor == 0 || f.stats.bytes.aggregate == 0 {
                    notes.push(format!("fan-both P=4 {protocol}: bytes {:?}", f.stats.bytes));
                }
                both.push(f.stats.bytes);
            }
            Err(e) => notes.push(format!("fan-both P=4: {e}")),
        }
    }
    outcome(
        notes.is_empty(),
        format!("{} runs checked; fan-both P=4 lap 8x8 bytes {:?}; problems: {:?}", runs.len(), both.first(), notes.iter().take(5).collect::<Vec<_>>()),
    )
}

fn criterion5() -> Outcome {
    let mut notes = Vec::new();
    for p in [4usize, 9, 16] {
        let root = (p as f64).sqrt().round() as usize;
        let both = ComputationMap::new(MapKind::FanBoth, p);
        let fin = ComputationMap::new(MapKind::FanIn, p);
        let fout = ComputationMap::new(MapKind::FanOut, p);
        for (oi, oj) in [(0, 0), (1, 3), (p, 2 * p), (5, 7)] {
            for k in 0..p {
                let row: std::collections::BTreeSet<_> = (0..p).map(|j| map_value(&both, oi + k, oj + j)).collect();
                let col: std::collections::BTreeSet<_> = (0..p).map(|i| map_value(&both, oi + i, oj + k)).collect();
                if row.len() != root || col.len() != root {
                    notes.push(format!("P={p} window ({oi},{oj}) line {k}: {} / {}", row.len(), col.len()));
                }
                let i = oi + k;
                if (0..p).any(|j| map_value(&fin, i, oj + j) != map_value(&fin, i, oj)) {
                    notes.push(format!("P={p} fan-in row {i} not constant"));
                }
                let j = oj + k;
                if (0..p).any(|i| map_value(&fout, oi + i, j) != map_value(&fout, oi, j)) {
                    notes.push(format!("P={p} fan-out column {j} not constant"));
                }
            }
        }
    }
    outcome(notes.is_empty(), format!("P in {{4, 9, 16}}; problems: {:?}", notes.iter().take(5).collect::<Vec<_>>()))
}

fn criterion6() -> Outcome {
    let a = laplacian_2d(16, 16);
    let an = analyze(&a, &Ordering::MinimumDegree, MAX_SUPERNODE_WIDTH).expect("laplacian analyzes");
    let med = |protocol, schedule| {
        median(
            (0..20u64)
                .map(|seed| {
                    let cfg = RunConfig::new(8, MapKind::FanBoth, protocol, schedule).with_seed(seed).with_perturbation(0.5);
                    factorize_analyzed(&an, &cfg).expect("lap 16x16 factors").stats.makespan
                })
                .collect(),
        )
    };
    let pd = med(Protocol::Pull, Schedule::Dynamic);
    let ps = med(Protocol::Pull, Schedule::Static);
    let os = med(Protocol::PushOrdered, Schedule::Static);
    let pass = pd <= ps && ps <= os && pd <= 0.97 * os;
    outcome(
        pass,
        format!(
            "median makespan pull+dynamic {pd:.0}, pull+static {ps:.0}, push-ordered+static {os:.0} (pull+dynamic {:.1}% below push-ordered)",
            100.0 * (1.0 - pd / os)
        ),
    )
}

fn criterion7(mats: &[(String, SparseSymMatrix, Analysis)]) -> Outcome {
    let mut notes = Vec::new();
    let mut checked = 0;
    for name in ["lap2d 10x10", "random n=146 seed=9", "arrow 60 center_last=false"] {
        let an = &mats.iter().find(|m| m.0 == name).expect("named corpus matrix").2;
        for protocol in [Protocol::PushOrdered, Protocol::Pull] {
            for map in MapKind::ALL {
                let cfg = RunConfig::new(4, map, protocol, Schedule::Static).with_seed(11).with_perturbation(0.5).with_trace();
                let (x, y) = (factorize_analyzed(an, &cfg), factorize_analyzed(an, &cfg));
                match (x, y) {
                    (Ok(x), Ok(y)) => {
                        let bits = |f: &symsolve::Factorization| {
                            f.factor.panels.iter().flat_map(|p| p.data.iter().map(|v| v.to_bits())).collect::<Vec<u64>>()
                        };
                        if bits(&x) != bits(&y) || x.trace != y.trace || x.stats != y.stats {
                            notes.push(format!("{name} {protocol} {map}"));
                        }
                        checked += 1;
                    }
                    _ => notes.push(format!("{name} {protocol} {map}: run failed")),
                }
            }
        }
    }
    outcome(notes.is_empty(), format!("{checked} repeated run pairs; differing: {notes:?}"))
}

fn criterion8(mats: &[(String, SparseSymMatrix, Analysis)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, a, an) in mats {
        let x0 = manufactured(a.n());
        let b = a.mul_vec(&x0).expect("sizes agree");
        let cfg = RunConfig::new(3, MapKind::FanBoth, Protocol::Pull, Schedule::Dynamic);
        match factorize_analyzed(an, &cfg).and_then(|f| solve(&f.factor, &b)) {
            Ok(x) => {
                let e = rel_inf_err(&x, &x0);
                worst = worst.max(e);
                if !(e <= 1e-9) {
                    notes.push(format!("{name}: {e:e}"));
                }
            }
            Err(e) => notes.push(format!("{name}: {e}")),
        }
    }
    outcome(notes.is_empty(), format!("{} matrices, worst relative error {worst:.2e}; problems: {notes:?}", mats.len()))
}

fn criterion9(runs: &[SweepRun]) -> Outcome {
    let pull: Vec<&SweepRun> = runs.iter().filter(|r| r.protocol == Protocol::Pull).collect();
    let bad: Vec<&str> = pull
        .iter()
        .filter(|r| r.stats.live_aggregate_buffers != 0 || r.stats.aggregate_allocs != r.stats.aggregate_frees)
        .map(|r| r.label.as_str())
        .collect();
    let allocs: u64 = pull.iter().map(|r| r.stats.aggregate_allocs).sum();
    let remote = pull.iter().filter(|r| r.procs > 1).count();
    outcome(
        bad.is_empty() && !pull.is_empty(),
        format!("{} pull runs ({remote} multi-rank), {allocs} aggregate buffers allocated and freed; leaking: {:?}", pull.len(), bad.iter().take(5).collect::<Vec<_>>()),
    )
}

fn main() {
    let mats = analyzed_corpus();
    let t = Instant::now();
    let (runs, errors) = sweep(&mats);
    let secs = t.elapsed().as_secs_f64();

    let results = [
        ("1 numeric correctness", criterion1(&runs, &errors, secs)),
        ("2 symbolic oracle equivalence", criterion2(&mats)),
        ("3 deadlock reproduction", criterion3()),
        ("4 communication accounting", criterion4(&runs, &mats)),
        ("5 map properties", criterion5()),
        ("6 scheduling benefit", criterion6()),
        ("7 determinism", criterion7(&mats)),
        ("8 solve", criterion8(&mats)),
        ("9 memory hygiene", criterion9(&runs)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
