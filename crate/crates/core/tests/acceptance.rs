use std::io::Write;
use std::sync::Arc;

use oldroyd::assembly::{Assembler, ElementPair};
use oldroyd::manufactured::{CaseId, ManufacturedCase};
use oldroyd::memory::{direct_quadrature, MemoryAccumulator, ModelParams};
use oldroyd::mesh::Mesh;
use oldroyd::stepper::{SolveControls, Stepper};
use oldroyd::study::{
    run_longtime_study, run_spatial_study, run_stability_study, run_temporal_study, KRule, RateTable, StudyConfig,
    StudyKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, ok: bool, detail: &str) {
    let line = format!("{} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "{name}: {detail}");
}

fn within(values: &[f64], lo: f64, hi: f64) -> bool {
    values.iter().all(|v| (lo..=hi).contains(v))
}

fn config(study: StudyKind, example: CaseId, element: ElementPair, levels: &[usize], delta: f64) -> StudyConfig {
    StudyConfig {
        study,
        example,
        element,
        levels: levels.to_vec(),
        params: ModelParams::new(1.0, 0.1, delta).unwrap(),
        ..StudyConfig::default()
    }
}

fn magnitudes_within(table: &RateTable, reference: &[f64], factor: f64) -> bool {
    table
        .rows
        .iter()
        .zip(reference)
        .all(|(row, &r)| row.l2_err <= factor * r && row.l2_err >= r / factor)
}

fn describe(table: &RateTable) -> String {
    format!(
        "L2 {:?} H1 {:?} p {:?} errors {:?}",
        table.l2_rates(),
        table.h1_rates(),
        table.p_rates(),
        table.rows.iter().map(|r| r.l2_err).collect::<Vec<_>>()
    )
}

#[test]
fn smooth_data_p2p0_spatial_convergence() {
    let c = config(StudyKind::Spatial, CaseId::Example1, ElementPair::P2P0, &[8, 16, 32], 0.1);
    let table = run_spatial_study(&c).unwrap();
    let ok = table.l2_rates().iter().all(|&r| r >= 1.80)
        && within(&table.h1_rates(), 0.85, 1.15)
        && within(&table.p_rates(), 0.85, 1.20)
        && magnitudes_within(&table, &[0.00386700, 0.00104657, 0.00026335], 3.0);
    verdict("smooth data, P2-P0 spatial rates", ok, &describe(&table));
}

#[test]
fn smooth_data_mini_spatial_convergence() {
    let c = config(StudyKind::Spatial, CaseId::Example1, ElementPair::Mini, &[8, 16, 32], 0.1);
    let table = run_spatial_study(&c).unwrap();
    let ok = table.l2_rates().iter().all(|&r| r >= 1.8)
        && within(&table.h1_rates(), 0.85, 1.25)
        && magnitudes_within(&table, &[0.00172068, 0.00045020, 0.00009954], 5.0);
    verdict("smooth data, MINI spatial rates", ok, &describe(&table));
}

#[test]
fn nonsmooth_data_p2p0_spatial_convergence() {
    let c = config(StudyKind::Spatial, CaseId::Example2, ElementPair::P2P0, &[4, 8, 16, 32], 1.0);
    let table = run_spatial_study(&c).unwrap();
    let ok = table.l2_rates().iter().all(|&r| r >= 1.8)
        && within(&table.h1_rates(), 0.85, 1.15)
        && within(&table.p_rates(), 0.85, 1.15);
    verdict("nonsmooth data, P2-P0 spatial rates", ok, &describe(&table));
}

#[test]
fn temporal_convergence_both_elements() {
    for element in [ElementPair::P2P0, ElementPair::Mini] {
        let mut c = config(StudyKind::Temporal, CaseId::Example2, element, &[2, 4, 8, 16], 0.1);
        c.k_rule = KRule::List(vec![0.25, 0.0625, 0.015625, 0.00390625]);
        let table = run_temporal_study(&c).unwrap();
        let last = *table.l2_rates().last().unwrap();
        verdict(
            &format!("temporal rate, {element}"),
            (0.85..=1.15).contains(&last),
            &describe(&table),
        );
    }
}

#[test]
fn uniform_in_time_spatial_rates() {
    let mut c = config(StudyKind::Longtime, CaseId::Example2, ElementPair::P2P0, &[4, 8, 16], 1.0);
    c.k_rule = KRule::Fixed(0.1);
    c.final_times = vec![10.0, 20.0];
    let tables = run_longtime_study(&c).unwrap();
    let rates: Vec<Vec<f64>> = tables.tables.iter().map(|(_, t)| t.l2_rates()).collect();
    let near_two = rates.iter().flatten().all(|&r| (r - 2.0).abs() <= 0.2);
    let spread = tables.l2_rate_spread();
    verdict(
        "uniform-in-time L2 rates",
        near_two && spread < 0.2,
        &format!("rates {rates:?} spread {spread:.4}"),
    );
}

#[test]
fn long_time_stability_sweep() {
    let mut c = config(StudyKind::Stability, CaseId::Example2, ElementPair::P2P0, &[10, 20], 1.0);
    c.k_rule = KRule::List(vec![0.1, 0.5, 1.0, 1.3]);
    c.final_times = vec![5.0];
    let table = run_stability_study(&c).unwrap();
    let reference = 0.04066058;
    let sup = table.cell(10, 0.1).and_then(|cell| cell.outcome.as_ref().ok()).map(|s| s[0]);
    let close = sup.is_some_and(|s| s <= 2.0 * reference && s >= reference / 2.0);
    verdict(
        "long-time stability sweep",
        table.all_finite() && close,
        &format!(
            "{} cells, all finite: {}, sup L2 at n=10, k=0.1: {sup:?}",
            table.cells.len(),
            table.all_finite()
        ),
    );
}

#[test]
fn right_rectangle_rule_is_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let len = rng.gen_range(1..=60);
        let k = rng.gen_range(0.001..1.5);
        let gamma = rng.gen_range(0.0..2.0);
        let delta = rng.gen_range(0.01..5.0);
        let phi: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut form = 0.0;
        let mut scale = 0.0;
        for n in 1..=len {
            let history: Vec<Vec<f64>> = phi[..n].iter().map(|&v| vec![v]).collect();
            let q = direct_quadrature(&history, k, gamma, delta).unwrap()[0];
            form += k * q * phi[n - 1];
            scale += k * k * gamma * phi[n - 1].abs() * phi[..n].iter().map(|v| v.abs()).sum::<f64>();
        }
        worst = worst.min(form / scale.max(f64::MIN_POSITIVE));
    }
    verdict("quadrature positivity", worst >= -1e-12, &format!("min scaled form {worst:e}"));
}

#[test]
fn memory_recursion_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for len in [1, 2, 17, 250, 1000] {
        let params = ModelParams::new(1.0, rng.gen_range(0.0..2.0), rng.gen_range(0.01..3.0)).unwrap();
        let k = rng.gen_range(0.001..0.5);
        let mut acc = MemoryAccumulator::new(3, k, &params);
        let mut history = Vec::new();
        for _ in 0..len {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            acc.update(&u).unwrap();
            history.push(u);
        }
        let direct = direct_quadrature(&history, k, params.gamma, params.delta).unwrap();
        for (a, b) in acc.values().iter().zip(&direct) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    verdict("memory recursion vs direct sum", worst <= 1e-12, &format!("max deviation {worst:e}"));
}

#[test]
fn convection_is_skew_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for pair in [ElementPair::P2P0, ElementPair::Mini] {
        let asm = Assembler::new(Arc::new(Mesh::unit_square(6).unwrap()), pair).unwrap();
        let dofs = asm.velocity().num_dofs();
        let boundary = asm.velocity().boundary_dofs().to_vec();
        let interior = |rng: &mut ChaCha8Rng| {
            let mut v: Vec<f64> = (0..dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for &b in &boundary {
                v[b] = 0.0;
            }
            v
        };
        for _ in 0..20 {
            let w = interior(&mut rng);
            let v = interior(&mut rng);
            let n = asm.convection(&w).unwrap();
            worst = worst.max(n.bilinear(&v, &v).unwrap().abs());
        }
    }
    verdict("skew symmetry of convection", worst <= 1e-12, &format!("max |v'N(w)v| {worst:e}"));
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

#[test]
fn manufactured_forcing_closes_the_equation() {
    let params = ModelParams::new(1.0, 0.1, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (x, y, t) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95), rng.gen_range(0.1..3.0));
        for id in [CaseId::Example1, CaseId::Example2] {
            let case = ManufacturedCase::new(id);
            let e = case.eval_exact(x, y, t);
            let f = case.forcing(&params, x, y, t);
            for i in 0..2 {
                let ht = 1e-3;
                let u = |s: f64| case.eval_exact(x, y, s).u[i];
                let ut = (-u(t + 2.0 * ht) + 8.0 * u(t + ht) - 8.0 * u(t - ht) + u(t - 2.0 * ht)) / (12.0 * ht);
                let memory = simpson(
                    &|s| params.kernel(t - s).unwrap() * case.eval_exact(x, y, s).lap_u[i],
                    0.0,
                    t,
                    2000,
                );
                let advect = e.u[0] * e.grad_u[i][0] + e.u[1] * e.grad_u[i][1];
                let residual = ut + advect - params.mu * e.lap_u[i] - memory + e.grad_p[i] - f[i];
                worst = worst.max(residual.abs());
            }
        }
    }
    verdict("manufactured PDE residual", worst <= 1e-8, &format!("max residual {worst:e}"));
}

#[test]
fn discrete_constraints_hold_every_step() {
    let case = ManufacturedCase::new(CaseId::Example1);
    let params = ModelParams::new(1.0, 0.1, 0.1).unwrap();
    let forcing = |x: [f64; 2], t: f64| case.forcing(&params, x[0], x[1], t);
    let (mut div, mut mean): (f64, f64) = (0.0, 0.0);
    let mut steps = 0;
    for pair in [ElementPair::P2P0, ElementPair::Mini] {
        let asm = Assembler::new(Arc::new(Mesh::unit_square(8).unwrap()), pair).unwrap();
        let mut stepper = Stepper::new(asm, params, 1.0 / 64.0, SolveControls::default()).unwrap();
        let mut state = stepper.initial_state(|x| case.initial_velocity(x)).unwrap();
        let d = stepper.operators().divergence.clone();
        let w = stepper.mean_weights().to_vec();
        stepper
            .run(&mut state, 50, &forcing, |st| {
                let bu = d.matvec(&st.velocity).unwrap();
                div = div.max(bu.iter().fold(0.0, |m, v| m.max(v.abs())));
                mean = mean.max(st.pressure.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs());
                steps += 1;
            })
            .unwrap();
    }
    verdict(
        "divergence and pressure mean per step",
        steps == 100 && div <= 1e-9 && mean <= 1e-12,
        &format!("{steps} steps, max |BU| {div:e}, max |mean p| {mean:e}"),
    );
}

#[test]
fn unforced_velocity_norm_is_non_increasing() {
    let case = ManufacturedCase::new(CaseId::Example1);
    let params = ModelParams::new(1.0, 0.1, 0.1).unwrap();
    let asm = Assembler::new(Arc::new(Mesh::unit_square(8).unwrap()), ElementPair::P2P0).unwrap();
    let mut stepper = Stepper::new(asm, params, 1.0 / 64.0, SolveControls::default()).unwrap();
    let mut state = stepper.initial_state(|x| case.initial_velocity(x)).unwrap();
    let mut norms = vec![stepper.l2_norm(&state.velocity).unwrap()];
    stepper
        .run(&mut state, 64, &|_, _| [0.0, 0.0], |st| norms.push(st.monitors.last().unwrap().l2_norm))
        .unwrap();
    let rise = norms.windows(2).position(|w| w[1] > w[0]);
    let detail = match rise {
        Some(n) => format!("norm rises from {:e} to {:e} at step {}", norms[n], norms[n + 1], n + 1),
        None => format!("monotone over {} steps", norms.len() - 1),
    };
    verdict("unforced decay", rise.is_none(), &detail);
}
