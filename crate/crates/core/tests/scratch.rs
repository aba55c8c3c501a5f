//! Temporary tuning harness (deleted before release).

use std::sync::Arc;

use viability::dynamics::{Hovership, Slip, SlipParams};
use viability::grid::{AxisGrid, IndicatorField, ProductGrid};
use viability::learner::{learn, LearnSetup, ThresholdSchedule};
use viability::gp::{KernelParams, Matern, PriorMean};
use viability::oracle;

fn precision_recall(est: &IndicatorField, truth: &IndicatorField) -> (f64, f64) {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for q in 0..est.len() {
        match (est.get(q), truth.get(q)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    (
        tp as f64 / (tp + fp).max(1) as f64,
        tp as f64 / (tp + fn_).max(1) as f64,
    )
}

fn slip_grid() -> Arc<ProductGrid> {
    Arc::new(
        ProductGrid::new(
            vec![AxisGrid::new(0.25, 0.95, 28).unwrap()],
            vec![AxisGrid::new(0.0, 1.15, 28).unwrap()],
        )
        .unwrap(),
    )
}

#[test]
#[ignore]
fn slip_oracle_shape() {
    let energy = 1860.0;
    let slip = Slip::new(SlipParams::default(), energy).unwrap();
    let grid = slip_grid();
    let t0 = std::time::Instant::now();
    let gt = oracle::ground_truth(&slip, &grid).unwrap();
    println!("oracle took {:?}, passes = {}", t0.elapsed(), gt.passes);
    println!(
        "|Q_V| = {} / {}, |S_V| = {} / {}",
        gt.q_v.count_true(),
        grid.num_q_cells(),
        gt.s_v.count_true(),
        grid.num_state_cells()
    );
    println!("lambda max = {:.4}", gt.lambda.max_value());
    for a in (0..grid.num_action_cells()).rev() {
        let row: String = (0..grid.num_state_cells())
            .map(|s| if gt.q_v.get(grid.q_index(s, a)) { '#' } else { '.' })
            .collect();
        println!("a={:>5.2} {row}", grid.action_center(a)[0]);
    }
    // estimate kernel params from a low-fidelity model (spring 20% softer)
    let soft = Slip::new(SlipParams { stiffness: 8200.0 * 0.8, ..Default::default() }, energy)
        .unwrap();
    let gt_soft = oracle::ground_truth(&soft, &grid).unwrap();
    let est = KernelParams::estimate_from_field(&gt_soft.lambda_q, Matern::FiveHalves).unwrap();
    println!(
        "estimated kernel: lengthscales = {:?}, signal_variance = {:.5}",
        est.lengthscales(),
        est.signal_variance()
    );
    // rollout audit
    let t0 = std::time::Instant::now();
    oracle::rollout_audit(&slip, &grid, &gt.q_v, 50).unwrap();
    println!("rollout audit took {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn hovership_learn_map() {
    let dynamics = Hovership::default();
    let grid = Arc::new(
        ProductGrid::new(
            vec![AxisGrid::new(0.0, 2.0, 40).unwrap()],
            vec![AxisGrid::new(0.0, 0.5, 20).unwrap()],
        )
        .unwrap(),
    );
    let gt = oracle::ground_truth(&dynamics, &grid).unwrap();
    let n = 250;
    let setup = LearnSetup {
        dynamics: &dynamics,
        grid: Arc::clone(&grid),
        kernel: KernelParams::new(vec![0.16, 0.17], 0.018, Matern::FiveHalves).unwrap(),
        noise_variance: 2e-3,
        prior_mean: PriorMean::Bump {
            center: vec![0.8, 0.25],
            widths: vec![0.45, 0.2],
            amplitude: 0.2,
            offset: -0.03,
        },
        schedule: ThresholdSchedule::new((0.5, 0.75), (0.6, 0.95), (0.0, 0.04), n).unwrap(),
        initial_state: vec![0.2],
        seed: 0,
        snapshot_after: vec![],
    };
    let trace = learn(&setup).unwrap();
    let snap = trace.final_snapshot();
    let (p, r) = precision_recall(&snap.q_caut, &gt.q_v);
    println!("fail {:.3} caut p/r {:.3}/{:.3}", trace.failure_rate(), p, r);
    // sample density per cell
    let mut visits = vec![0usize; grid.num_q_cells()];
    for rec in &trace.records {
        visits[grid.q_index(rec.state_cell, rec.action_cell)] += 1;
    }
    println!("map: # TP, X FP, o FN, . TN; lowercase letters = sample counts");
    for a in (0..grid.num_action_cells()).rev() {
        let row: String = (0..grid.num_state_cells())
            .map(|s| {
                let q = grid.q_index(s, a);
                match (snap.q_caut.get(q), gt.q_v.get(q)) {
                    (true, true) => '#',
                    (true, false) => 'X',
                    (false, true) => 'o',
                    (false, false) => '.',
                }
            })
            .collect();
        let samples: String = (0..grid.num_state_cells())
            .map(|s| {
                let v = visits[grid.q_index(s, a)];
                match v {
                    0 => ' ',
                    1..=9 => char::from_digit(v as u32, 10).unwrap(),
                    _ => '+',
                }
            })
            .collect();
        println!("a={:>5.3} {row}  |{samples}|", grid.action_center(a)[0]);
    }
    println!("failures at: {:?}", trace.records.iter().filter(|r| r.failed).map(|r| (r.state[0], r.action[0])).collect::<Vec<_>>());
}

#[test]
#[ignore]
fn hovership_learn_tuning() {
    let dynamics = Hovership::default();
    let grid = Arc::new(
        ProductGrid::new(
            vec![AxisGrid::new(0.0, 2.0, 40).unwrap()],
            vec![AxisGrid::new(0.0, 0.5, 20).unwrap()],
        )
        .unwrap(),
    );
    let gt = oracle::ground_truth(&dynamics, &grid).unwrap();
    println!("|Q_V| = {}/{} lambda max {:.3}", gt.q_v.count_true(), grid.num_q_cells(), gt.lambda.max_value());

    // candidate kernel from a low-fidelity model (gravity 20% lighter)
    let light = Hovership::new(viability::dynamics::HovershipParams {
        g: 0.8,
        ..Default::default()
    })
    .unwrap();
    let gt_light = oracle::ground_truth(&light, &grid).unwrap();
    let est = KernelParams::estimate_from_field(&gt_light.lambda_q, Matern::FiveHalves).unwrap();
    println!(
        "estimated kernel: ls = {:?}, sv = {:.5}",
        est.lengthscales(),
        est.signal_variance()
    );

    let n = 250;
    let poor_bump = |amp: f64| PriorMean::Bump {
        center: vec![0.9, 0.25],
        widths: vec![0.5, 0.25],
        amplitude: amp,
        offset: -0.03,
    };
    let _ = poor_bump;
    let narrow = |center: Vec<f64>, amp: f64| PriorMean::Bump {
        center,
        widths: vec![0.25, 0.12],
        amplitude: amp,
        offset: -0.02,
    };
    for (label, kernel, noise, prior, sched) in [
        (
            "E: narrow straddle bump",
            est.clone(),
            2.5e-3,
            narrow(vec![0.62, 0.12], 0.08),
            ThresholdSchedule::new((0.55, 0.9), (0.65, 0.97), (0.0, 0.12), n).unwrap(),
        ),
        (
            "F: narrow wrong-side bump",
            est.clone(),
            2.5e-3,
            narrow(vec![0.75, 0.15], 0.08),
            ThresholdSchedule::new((0.55, 0.9), (0.65, 0.97), (0.0, 0.12), n).unwrap(),
        ),
        (
            "G: E, lam->.15, noise 4e-3",
            est.clone(),
            4e-3,
            narrow(vec![0.62, 0.12], 0.08),
            ThresholdSchedule::new((0.55, 0.9), (0.65, 0.97), (0.0, 0.15), n).unwrap(),
        ),
        (
            "H: E with shorter ls",
            KernelParams::new(vec![0.10, 0.10], 0.018, Matern::FiveHalves).unwrap(),
            2.5e-3,
            narrow(vec![0.62, 0.12], 0.08),
            ThresholdSchedule::new((0.55, 0.9), (0.65, 0.97), (0.0, 0.12), n).unwrap(),
        ),
    ] {
        let mut rates = Vec::new();
        let mut precs = Vec::new();
        let mut recs = Vec::new();
        let t0 = std::time::Instant::now();
        for seed in 0..10u64 {
            let setup = LearnSetup {
                dynamics: &dynamics,
                grid: Arc::clone(&grid),
                kernel: kernel.clone(),
                noise_variance: noise,
                prior_mean: prior.clone(),
                schedule: sched.clone(),
                initial_state: vec![0.2],
                seed,
                snapshot_after: vec![],
            };
            let trace = learn(&setup).unwrap();
            let snap = trace.final_snapshot();
            let (p, r) = precision_recall(&snap.q_caut, &gt.q_v);
            let (po, ro) = precision_recall(&snap.q_opt, &gt.q_v);
            rates.push(trace.failure_rate());
            precs.push(p);
            recs.push(r);
            println!(
                "  seed {seed}: fail {:.3} caut p/r {:.3}/{:.3} opt p/r {:.3}/{:.3}",
                trace.failure_rate(),
                p,
                r,
                po,
                ro
            );
        }
        let med = |v: &mut Vec<f64>| {
            v.sort_by(|a, b| a.total_cmp(b));
            v[v.len() / 2]
        };
        println!(
            "{label}: median fail {:.3} prec {:.3} rec {:.3} ({:?}/seed)",
            {rates.iter().for_each(|r| print!("{r:.3} ")); println!(); med(&mut rates)},
            med(&mut precs),
            med(&mut recs),
            t0.elapsed() / 5
        );
    }
}

#[test]
#[ignore]
fn slip_learn_map() {
    let energy = 1860.0;
    let dynamics = Slip::new(SlipParams::default(), energy).unwrap();
    let grid = slip_grid();
    let gt = oracle::ground_truth(&dynamics, &grid).unwrap();
    let soft = Slip::new(SlipParams { stiffness: 8200.0 * 0.8, ..Default::default() }, energy)
        .unwrap();
    let gt_soft = oracle::ground_truth(&soft, &grid).unwrap();
    let kernel = KernelParams::estimate_from_field(&gt_soft.lambda_q, Matern::FiveHalves).unwrap();
    let n = 500;
    let setup = LearnSetup {
        dynamics: &dynamics,
        grid: Arc::clone(&grid),
        kernel,
        noise_variance: 2.5e-3,
        prior_mean: PriorMean::Bump {
            center: vec![0.65, 0.5],
            widths: vec![0.2, 0.25],
            amplitude: 0.08,
            offset: 0.03,
        },
        schedule: ThresholdSchedule::new((0.6, 0.9), (0.8, 0.97), (0.02, 0.14), n).unwrap(),
        initial_state: vec![0.7757],
        seed: 0,
        snapshot_after: vec![],
    };
    let trace = learn(&setup).unwrap();
    let snap = trace.final_snapshot();
    let (p, r) = precision_recall(&snap.q_caut, &gt.q_v);
    println!("fail {:.3} caut p/r {:.3}/{:.3}", trace.failure_rate(), p, r);
    let mut visits = vec![0usize; grid.num_q_cells()];
    let mut fails = vec![0usize; grid.num_q_cells()];
    for rec in &trace.records {
        let q = grid.q_index(rec.state_cell, rec.action_cell);
        visits[q] += 1;
        if rec.failed {
            fails[q] += 1;
        }
    }
    println!("map: # TP, X FP, o FN, . TN | sample counts | failure counts");
    for a in (0..grid.num_action_cells()).rev() {
        let row: String = (0..grid.num_state_cells())
            .map(|s| {
                let q = grid.q_index(s, a);
                match (snap.q_caut.get(q), gt.q_v.get(q)) {
                    (true, true) => '#',
                    (true, false) => 'X',
                    (false, true) => 'o',
                    (false, false) => '.',
                }
            })
            .collect();
        let samples: String = (0..grid.num_state_cells())
            .map(|s| match visits[grid.q_index(s, a)] {
                0 => ' ',
                v @ 1..=9 => char::from_digit(v as u32, 10).unwrap(),
                _ => '+',
            })
            .collect();
        let fr: String = (0..grid.num_state_cells())
            .map(|s| match fails[grid.q_index(s, a)] {
                0 => ' ',
                v @ 1..=9 => char::from_digit(v as u32, 10).unwrap(),
                _ => '+',
            })
            .collect();
        println!("a={:>5.2} {row} |{samples}| |{fr}|", grid.action_center(a)[0]);
    }
}

#[test]
#[ignore]
fn slip_stability_scan() {
    let energy = 1860.0;
    let slip = Slip::new(SlipParams::default(), energy).unwrap();
    for alpha_deg in [15.0f64, 18.0, 20.0, 22.0, 25.0, 28.0, 30.0, 32.0, 35.0] {
        let alpha = alpha_deg.to_radians();
        if let Some(s) = slip.find_limit_cycle(alpha, 0.3, 0.99) {
            let h = 1e-4;
            let up = slip.step_detailed(s + h, alpha).unwrap();
            let dn = slip.step_detailed(s - h, alpha).unwrap();
            if !up.outcome.failed && !dn.outcome.failed {
                let slope = (up.outcome.next_state[0] - dn.outcome.next_state[0]) / (2.0 * h);
                println!("alpha {alpha_deg:>4}deg ({alpha:.4} rad): s* = {s:.4}, ds'/ds = {slope:+.3}");
            }
        } else {
            println!("alpha {alpha_deg:>4}deg: no fixed point");
        }
    }
}

#[test]
#[ignore]
fn slip_trace_head() {
    let energy = 1860.0;
    let dynamics = Slip::new(SlipParams::default(), energy).unwrap();
    let grid: Arc<ProductGrid> = Arc::new(ProductGrid::new(vec![AxisGrid::new(0.22, 0.95, 28).unwrap()], vec![AxisGrid::new(0.0, 1.15, 28).unwrap()]).unwrap());
    let s_star = 0.7757;
    let setup = LearnSetup {
        dynamics: &dynamics,
        grid: Arc::clone(&grid),
        kernel: KernelParams::new(vec![0.055, 0.075], 0.0076, Matern::FiveHalves).unwrap(),
        noise_variance: 1e-3,
        prior_mean: PriorMean::Bump {
            center: vec![0.65, 0.5],
            widths: vec![0.2, 0.25],
            amplitude: 0.12,
            offset: 0.03,
        },
        schedule: ThresholdSchedule::new((0.65, 0.92), (0.8, 0.97), (0.06, 0.16), 500).unwrap(),
        initial_state: vec![s_star],
        seed: 0,
        snapshot_after: vec![],
    };
    let trace = learn(&setup).unwrap();
    for rec in trace.records.iter().take(30) {
        println!(
            "i={:3} s={:.3} a={:.3} -> s'={:.3} failed={} target={:.4} reset={:?}",
            rec.iteration, rec.state[0], rec.action[0], rec.next_state[0], rec.failed, rec.target, rec.reset
        );
    }
    println!("failures: {}", trace.failure_count);
    // failure histogram over time and chains
    let mut hist = [0usize; 10];
    let mut after_success = 0;
    let mut after_fail = 0;
    for (i, rec) in trace.records.iter().enumerate() {
        if rec.failed {
            hist[i * 10 / trace.records.len()] += 1;
            if i > 0 && trace.records[i - 1].failed {
                after_fail += 1;
            } else {
                after_success += 1;
            }
        }
    }
    println!("failure deciles: {hist:?}");
    println!("failures after a failure: {after_fail}, after success/start: {after_success}");
}

#[test]
#[ignore]
fn slip_learn_tuning() {
    let energy = 1860.0;
    let dynamics = Slip::new(SlipParams::default(), energy).unwrap();
    let grid: Arc<ProductGrid> = match std::env::var("SLIP_GRID").as_deref() {
        Ok("24") => Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.25, 0.95, 24).unwrap()],
                vec![AxisGrid::new(0.0, 1.15, 24).unwrap()],
            )
            .unwrap(),
        ),
        Ok("low") => Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.22, 0.95, 28).unwrap()],
                vec![AxisGrid::new(0.0, 1.15, 28).unwrap()],
            )
            .unwrap(),
        ),
        Ok("low24") => Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.22, 0.95, 24).unwrap()],
                vec![AxisGrid::new(0.0, 1.15, 24).unwrap()],
            )
            .unwrap(),
        ),
        _ => slip_grid(),
    };
    let gt = oracle::ground_truth(&dynamics, &grid).unwrap();
    println!("|Q_V| = {}/{}", gt.q_v.count_true(), grid.num_q_cells());

    let soft = Slip::new(SlipParams { stiffness: 8200.0 * 0.8, ..Default::default() }, energy)
        .unwrap();
    let gt_soft = oracle::ground_truth(&soft, &grid).unwrap();
    let kernel = KernelParams::estimate_from_field(&gt_soft.lambda_q, Matern::FiveHalves).unwrap();
    println!("kernel ls = {:?} sv = {:.5}", kernel.lengthscales(), kernel.signal_variance());

    let n = 500;
    let s_star = 0.7757;
    let a_star = 0.4363;
    let core_bump = |amp: f64| PriorMean::Bump {
        center: vec![0.65, 0.5],
        widths: vec![0.2, 0.25],
        amplitude: amp,
        offset: 0.03,
    };
    let _ = core_bump;
    let diag_bump = |widths: Vec<f64>, amp: f64| PriorMean::Bump {
        center: vec![0.65, 0.5],
        widths,
        amplitude: amp,
        offset: 0.03,
    };
    for (label, kernel, noise, prior, sched) in [
        (
            "AA: tight bump, caut .87->.98",
            kernel.clone(),
            1e-3,
            diag_bump(vec![0.15, 0.18], 0.15),
            ThresholdSchedule::new((0.65, 0.92), (0.87, 0.98), (0.06, 0.16), n).unwrap(),
        ),
        (
            "BB: widths .16/.2, caut .85->.975",
            kernel.clone(),
            1e-3,
            diag_bump(vec![0.16, 0.2], 0.15),
            ThresholdSchedule::new((0.65, 0.92), (0.85, 0.975), (0.06, 0.16), n).unwrap(),
        ),
        (
            "CC: AA, lam .07->.17",
            kernel.clone(),
            1e-3,
            diag_bump(vec![0.15, 0.18], 0.15),
            ThresholdSchedule::new((0.65, 0.92), (0.87, 0.98), (0.07, 0.17), n).unwrap(),
        ),
    ] {
        let t0 = std::time::Instant::now();
        let mut rates = Vec::new();
        let mut precs = Vec::new();
        let mut recs = Vec::new();
        let mut bottoms = Vec::new();
        for seed in 0..10u64 {
            let setup = LearnSetup {
                dynamics: &dynamics,
                grid: Arc::clone(&grid),
                kernel: kernel.clone(),
                noise_variance: noise,
                prior_mean: prior.clone(),
                schedule: sched.clone(),
                initial_state: vec![s_star],
                seed,
                snapshot_after: vec![],
            };
            let trace = learn(&setup).unwrap();
            let snap = trace.final_snapshot();
            let (p, r) = precision_recall(&snap.q_caut, &gt.q_v);
            // failures in the bottom state quartile
            let s_lo = grid.state_axes()[0].lower();
            let s_hi = grid.state_axes()[0].upper();
            let q1 = s_lo + 0.25 * (s_hi - s_lo);
            let bottom = trace
                .records
                .iter()
                .filter(|r| r.failed && r.state[0] <= q1)
                .count();
            println!(
                "  seed {seed}: fail {:.3} caut p/r {:.3}/{:.3} bottom-quartile failures {}/{}",
                trace.failure_rate(),
                p,
                r,
                bottom,
                trace.failure_count
            );
            rates.push(trace.failure_rate());
            precs.push(p);
            recs.push(r);
            bottoms.push(bottom as f64 / trace.failure_count.max(1) as f64);
        }
        let med = |v: &mut Vec<f64>| {
            v.sort_by(|a, b| a.total_cmp(b));
            v[v.len() / 2]
        };
        println!(
            "{label}: median fail {:.3} prec {:.3} rec {:.3} bottom-frac {:.2} ({:?}/seed)",
            med(&mut rates),
            med(&mut precs),
            med(&mut recs),
            med(&mut bottoms),
            t0.elapsed() / 10
        );
    }
}
