//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary exits non-zero if any fails. Criteria run on a pool of one
//! worker per available core.

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nhprobe::bdg::{build_bdg, extract_zero_modes, DEFAULT_EDGE_FRACTION};
use nhprobe::dynamics::{
    evolve_quench, jordan_oracle_state, trivial_phase_firstorder, two_level_oracle_rho,
    DensityMatrix, TimeGrid,
};
use nhprobe::linalg::{expm, herm_eigenvalues, ComplexMatrix, C64};
use nhprobe::models::{build_hamiltonian, majorana_form_hamiltonian, min_bulk_gap, ModelSpec};
use nhprobe::opalg::{algebra_check, build_fermion_modes, build_parafermion_modes, majorana_modes};
use nhprobe::probes::{AuxVariant, Branch, ProbeSpec};
use nhprobe::sweep::{run_sweep, simulate, RunConfig};

const BETA: f64 = 5.0;
const WINDOW: (f64, f64) = (100.0, 200.0);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// `L̄` of one quench on the default grid.
fn lbar(model: ModelSpec, probe: ProbeSpec, window: (f64, f64), horizon: f64) -> f64 {
    let zero_modes = probe.zero_modes().expect("zero-mode solve");
    let grid = TimeGrid {
        horizon,
        ..TimeGrid::default()
    };
    let run = simulate(&model, &probe, zero_modes.as_ref(), BETA, &grid, window).expect("quench");
    run.steady_average.expect("window set").value
}

fn kitaev_lbar(mu: f64) -> f64 {
    lbar(
        ModelSpec::kitaev(8, 1.0, mu, 1.0),
        ProbeSpec::KitaevEdge {
            lambda: 0.1,
            branch: Branch::Plus,
        },
        WINDOW,
        200.0,
    )
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut slowest = Duration::ZERO;
    for mu in [0.1, 0.8, 1.5, 2.2, 2.9] {
        let start = Instant::now();
        let v = kitaev_lbar(mu);
        slowest = slowest.max(start.elapsed());
        let ok = match mu {
            m if m < 1.0 => (v - 0.5).abs() <= 0.1,
            m if m < 2.0 => (v - 0.9).abs() <= 0.1,
            _ => (0.9..=1.0).contains(&v),
        };
        pass &= ok;
        parts.push(format!(
            "μ={mu}: {v:.3}{}",
            if ok { "" } else { " (out of range)" }
        ));
    }
    pass &= slowest < Duration::from_secs(120);
    parts.push(format!("slowest {:.1}s", slowest.as_secs_f64()));
    Outcome::new(pass, parts.join(", "))
}

/// Largest decay factor `|x±|` of the open-chain Majorana wavefunction.
/// The edge probe is exact only when this is small.
fn kitaev_decay_factor(t: f64, mu: f64, delta: f64) -> f64 {
    let disc = C64::new(mu * mu - 4.0 * t * t + 4.0 * delta * delta, 0.0).sqrt();
    let denom = 2.0 * (t + delta);
    [(-mu + disc) / denom, (-mu - disc) / denom]
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    // ±μ give identical chains, so the grid samples both signs sparsely
    let config = RunConfig::from_json(
        r#"{
            "model": "kitaev", "sites": 8, "t": 1.0, "mu": 0.0, "delta": 1.0,
            "probe": { "probe": "kitaev_edge", "lambda": 0.1 },
            "window": [100, 200],
            "sweep": {
                "axis1": { "field": "mu", "values": [-3.0, -2.5, -1.5, -1.0, 0.0, 1.0, 1.5, 2.5, 3.0] },
                "axis2": { "field": "delta", "values": [0.5, 1.0, 2.0] }
            }
        }"#,
    )
    .expect("config");
    let diagram = run_sweep(&config, 2).expect("sweep");
    let axis2 = config
        .sweep
        .as_ref()
        .and_then(|s| s.axis2.clone())
        .expect("2D sweep");
    let (mut deep, mut agree, mut mismatches) = (0, 0, Vec::new());
    for (i, &mu) in diagram.axis1.values.iter().enumerate() {
        for (j, &delta) in axis2.values.iter().enumerate() {
            if (mu.abs() - 2.0).abs() / 2.0 < 0.2 {
                continue;
            }
            deep += 1;
            let v = diagram.value(i, j);
            if (v < 0.75) == (mu.abs() < 2.0) {
                agree += 1;
            } else {
                // reported with the probe's approximation error |x±|
                let x = kitaev_decay_factor(1.0, mu, delta);
                mismatches.push(format!("(μ={mu}, Δ={delta}) L̄={v:.3} |x±|={x:.2}"));
            }
        }
    }
    let pass = mismatches.is_empty() && diagram.warnings.is_empty() && deep > 0;
    let mut detail = format!("{agree}/{deep} deep points agree");
    if !mismatches.is_empty() {
        detail += &format!("; deep mismatches: {}", mismatches.join(", "));
    }
    Outcome::new(pass, detail)
}

fn criterion_3() -> Outcome {
    let probe = ProbeSpec::DoubleKitaevEdge {
        kappa1: 0.1,
        kappa2: 0.1,
    };
    let at = |w: f64| {
        lbar(
            ModelSpec::double_kitaev(4, 1.0, 0.4, 1.0, w),
            probe.clone(),
            WINDOW,
            200.0,
        )
    };
    let start = at(0.0);
    let dip = [0.01, 0.015].map(at);
    let low = dip.iter().copied().fold(f64::INFINITY, f64::min);
    let end = at(1.0);
    let pass = (start - 0.5).abs() <= 0.1 && low < 0.5 && low < start - 0.02 && end > 0.85;
    Outcome::new(
        pass,
        format!(
            "w=0: {start:.3}, w=0.01: {:.3}, w=0.015: {:.3}, w=1: {end:.3}",
            dip[0], dip[1]
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let probe = ProbeSpec::NanowireMzm {
        lambda: 0.05,
        reference: None,
    };
    let at = |v: f64| {
        lbar(
            ModelSpec::nanowire(5, 1.0, 0.5, 0.5, v, 1.0),
            probe.clone(),
            WINDOW,
            200.0,
        )
    };
    let topo = at(1.5);
    let trivial = at(0.2);
    let elapsed = start.elapsed();
    let pass = (topo - 0.5).abs() <= 0.15
        && (0.9..=1.0).contains(&trivial)
        && elapsed < Duration::from_secs(900);
    Outcome::new(
        pass,
        format!(
            "V=1.5: {topo:.3}, V=0.2: {trivial:.3}, {:.0}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let spec = ModelSpec::nanowire(50, 1.0, 0.5, 0.5, 1.5, 1.0);
    let pair = build_bdg(&spec)
        .and_then(|b| extract_zero_modes(&b, DEFAULT_EDGE_FRACTION))
        .expect("zero modes");
    let elapsed = start.elapsed();
    let phi = pair.phase.as_ref().map_or(f64::NAN, |p| p.phi);
    let e = pair.energies.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let pass = (phi - 0.36).abs() <= 0.02 && e < 1e-6 && elapsed < Duration::from_secs(1);
    Outcome::new(
        pass,
        format!("φ={phi:.5}, max|E|={e:.1e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn criterion_6() -> Outcome {
    let probe = ProbeSpec::ParafermionExact { lambda: 0.05 };
    let gs = [0.6, 1.0, 1.4, 1.8];
    let values = gs.map(|g| {
        lbar(
            ModelSpec::parafermion(5, 1.0, g),
            probe.clone(),
            WINDOW,
            200.0,
        )
    });
    // first crossing of 2/3, linearly interpolated
    let crossing = gs.windows(2).zip(values.windows(2)).find_map(|(g, v)| {
        let c = 2.0 / 3.0;
        (v[0] >= c && v[1] < c).then(|| g[0] + (g[1] - g[0]) * (v[0] - c) / (v[0] - v[1]))
    });
    let pass = (values[3] - 1.0 / 3.0).abs() <= 0.07
        && values[0] >= 0.9
        && crossing.is_some_and(|g| (g - 1.0).abs() <= 0.3);
    let listed: Vec<String> = gs
        .iter()
        .zip(&values)
        .map(|(g, v)| format!("g={g}: {v:.3}"))
        .collect();
    Outcome::new(
        pass,
        format!(
            "N=5, {}, crosses 2/3 at g≈{:.2}",
            listed.join(", "),
            crossing.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_7() -> Outcome {
    // N = 4 with the late window used for the nanowire phase diagram; V_c ≈ 1.118
    let window = (90.0, 110.0);
    let trivial = [0.2, 0.5, 0.8];
    let topological = [1.5, 2.0, 2.5, 3.0];
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut contrasts = Vec::new();
    let mut parts = Vec::new();
    for (name, variant) in [
        ("δ1", AuxVariant::Delta1),
        ("δ2", AuxVariant::Delta2),
        ("δ3", AuxVariant::Delta3),
        ("δ4", AuxVariant::Delta4),
    ] {
        let probe = ProbeSpec::NanowireAux {
            variant,
            lambda: 0.05,
            phi: 0.36,
        };
        let at = |v: &f64| {
            lbar(
                ModelSpec::nanowire(4, 1.0, 0.5, 0.5, *v, 1.0),
                probe.clone(),
                window,
                110.0,
            )
        };
        let a: Vec<f64> = trivial.iter().map(at).collect();
        let b: Vec<f64> = topological.iter().map(at).collect();
        let d = (mean(&a) - mean(&b)).abs();
        contrasts.push(d);
        let topo: Vec<String> = b.iter().map(|v| format!("{v:.3}")).collect();
        parts.push(format!("{name} ΔL̄={d:.3} (topological {})", topo.join("/")));
    }
    let pass =
        contrasts[0] > 0.25 && contrasts[1] > 0.25 && contrasts[2] < 0.1 && contrasts[3] < 0.1;
    Outcome::new(
        pass,
        format!(
            "deep-phase means, V∈{{0.2,0.5,0.8}} vs V∈{{1.5,2,2.5,3}}: {}",
            parts.join(", ")
        ),
    )
}

/// `E·I + λJ + λ′J†` with `J_{ij} = δ_{i−1,j}`.
fn jordan_block(n: usize, energy: f64, lambda: f64, lambda_prime: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        let x = match () {
            _ if i == j => energy,
            _ if i == j + 1 => lambda,
            _ if j == i + 1 => lambda_prime,
            _ => 0.0,
        };
        C64::new(x, 0.0)
    })
}

fn normalized(m: &ComplexMatrix) -> ComplexMatrix {
    m.scale_real(1.0 / m.trace().re)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut jordan_err: f64 = 0.0;
    for n in 2..=5 {
        let h = jordan_block(n, -0.3, 0.1, 0.0);
        for t in [1.0, 17.0, 50.0] {
            let m = expm(&h.scale(C64::new(0.0, -t))).expect("expm");
            for col in 0..n {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[col] = C64::new(1.0, 0.0);
                let psi = jordan_oracle_state(&e, 0.1, -0.3, t);
                for (row, amp) in psi.iter().enumerate() {
                    jordan_err = jordan_err.max((m.get(row, col) - amp).norm());
                }
            }
        }
    }

    let mut two_level_err: f64 = 0.0;
    let times: Vec<f64> = (0..=10).map(|k| 10.0 * k as f64).collect();
    for ratio in [0.0, 0.01, 0.1, 1.0] {
        let lp = 0.1 * ratio;
        let states = evolve_quench(
            &jordan_block(2, 0.0, 0.1, lp),
            &DensityMatrix::maximally_mixed(2),
            &times,
            0.05,
        )
        .expect("propagation");
        for s in &states {
            let exact = normalized(&two_level_oracle_rho(0.1, lp, s.time).expect("oracle"));
            two_level_err = two_level_err.max(s.rho.matrix().max_abs_diff(&exact));
        }
    }

    // λ/ΔE = 0.01 with unit level spacing
    let energies = [0.0, 1.0, 2.0, 3.0];
    let (lambda, lp) = (0.01, 0.003);
    let mut h = ComplexMatrix::from_real_diagonal(&energies);
    for i in 1..4 {
        h.set(i, i - 1, C64::new(lambda, 0.0));
        h.set(i - 1, i, C64::new(lp, 0.0));
    }
    let states = evolve_quench(
        &h,
        &DensityMatrix::maximally_mixed(4),
        &[2.0, 9.0, 30.0],
        0.01,
    )
    .expect("propagation");
    let first_order_err = states
        .iter()
        .map(|s| {
            s.rho.matrix().max_abs_diff(
                &trivial_phase_firstorder(&energies, lambda, lp, s.time)
                    .expect("oracle")
                    .rho,
            )
        })
        .fold(0.0, f64::max);

    // 1/λ = 10 ≪ t ≪ 1/λ′ = 10⁴
    let dominance_times = [80.0, 200.0, 1000.0];
    let dominance = evolve_quench(
        &jordan_block(4, 0.0, 0.1, 1e-4),
        &DensityMatrix::maximally_mixed(4),
        &dominance_times,
        0.05,
    )
    .expect("propagation");
    let rho_nn: Vec<f64> = dominance
        .iter()
        .map(|s| s.rho.matrix().get(3, 3).re)
        .collect();

    let elapsed = start.elapsed();
    let pass = jordan_err < 1e-8
        && two_level_err < 1e-8
        && first_order_err < 5.0 * lambda * lambda
        && rho_nn[1] > 0.9
        && rho_nn[2] > 0.9
        && elapsed < Duration::from_secs(10);
    Outcome::new(
        pass,
        format!(
            "Jordan {jordan_err:.1e}, two-level {two_level_err:.1e}, first-order {first_order_err:.1e}, \
             ρ_NN {:.3}/{:.3}/{:.3} at t=80/200/1000, {:.1}s",
            rho_nn[0],
            rho_nn[1],
            rho_nn[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        worst = worst.max(algebra_check(&build_fermion_modes(n).expect("modes")).max_residual);
    }
    let mut majorana: f64 = 0.0;
    let ops = build_fermion_modes(4).expect("modes");
    let c = majorana_modes(&ops).expect("majoranas");
    let id = ComplexMatrix::identity(ops.dim());
    for k in 0..c.len() {
        for l in 0..c.len() {
            let anti = c[k].anticommutator(&c[l]);
            let expected = if k == l {
                id.scale_real(2.0)
            } else {
                ComplexMatrix::zeros(ops.dim())
            };
            majorana = majorana.max(anti.max_abs_diff(&expected));
        }
        majorana = majorana.max(c[k].max_abs_diff(&c[k].adjoint()));
    }
    let mut parafermion: f64 = 0.0;
    for d in [2, 3, 4] {
        for n in 1..=3 {
            parafermion = parafermion
                .max(algebra_check(&build_parafermion_modes(n, d).expect("modes")).max_residual);
        }
    }
    // deterministic parameter scan over the Majorana form
    let mut form: f64 = 0.0;
    for sites in 2..=4 {
        for (k, &(t, mu, delta)) in [
            (1.0, 0.3, 0.7),
            (-0.6, 2.4, 1.3),
            (1.7, -1.1, 0.0),
            (0.4, 0.0, 1.9),
        ]
        .iter()
        .enumerate()
        {
            let spec = ModelSpec::kitaev(sites, t + 0.1 * k as f64, mu, delta);
            let ops = spec.operators().expect("modes");
            let h = build_hamiltonian(&spec, &ops).expect("hamiltonian");
            let m = majorana_form_hamiltonian(&spec, &ops).expect("majorana form");
            form = form.max(h.max_abs_diff(&m));
        }
    }
    let pass = worst <= 1e-12 && majorana <= 1e-12 && parafermion <= 1e-12 && form <= 1e-10;
    Outcome::new(
        pass,
        format!("fermion {worst:.1e}, Majorana {majorana:.1e}, parafermion {parafermion:.1e}, Majorana form {form:.1e}"),
    )
}

fn criterion_10() -> Outcome {
    let mut fold: f64 = 0.0;
    for sites in 2..=4 {
        for (t, mu, delta) in [(1.0, 0.5, 1.0), (0.7, -2.2, 0.4), (1.3, 1.0, 2.0)] {
            let spec = ModelSpec::kitaev(sites, t, mu, delta);
            let exact = herm_eigenvalues(
                &build_hamiltonian(&spec, &spec.operators().expect("modes")).expect("h"),
            )
            .expect("spectrum");
            let folded = build_bdg(&spec)
                .and_then(|b| b.many_body_spectrum())
                .expect("folded");
            fold = exact
                .iter()
                .zip(&folded)
                .map(|(a, b)| (a - b).abs())
                .fold(fold, f64::max);
        }
    }
    let mut kitaev_gap: f64 = 0.0;
    for (t, delta) in [(1.0, 1.0), (0.5, 2.0), (1.5, 0.3)] {
        for sign in [1.0, -1.0] {
            let spec = ModelSpec::kitaev(8, t, sign * 2.0 * t, delta);
            kitaev_gap = kitaev_gap.max(min_bulk_gap(&spec, 512).expect("gap").0);
        }
    }
    let mut wire_gap: f64 = 0.0;
    for (mu, delta) in [(0.5, 1.0), (0.0, 0.7), (1.2, 0.4)] {
        let v = f64::hypot(delta, mu);
        let spec = ModelSpec::nanowire(8, 1.0, mu, 0.5, v, delta);
        wire_gap = wire_gap.max(min_bulk_gap(&spec, 512).expect("gap").0);
    }
    let pass = fold < 1e-8 && kitaev_gap < 1e-6 && wire_gap < 1e-6;
    Outcome::new(
        pass,
        format!("BdG fold {fold:.1e}, Kitaev gap at |μ|=2|t| {kitaev_gap:.1e}, nanowire gap at V²=Δ²+μ² {wire_gap:.1e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Kitaev echo versus μ", criterion_1),
        ("Kitaev (μ, Δ) phase diagram", criterion_2),
        ("double Kitaev versus coupling", criterion_3),
        ("nanowire echo", criterion_4),
        ("nanowire zero-mode phase", criterion_5),
        ("parafermion echo versus g", criterion_6),
        ("auxiliary nanowire probes", criterion_7),
        ("closed-form oracles", criterion_8),
        ("operator algebras", criterion_9),
        ("spectra and gap closing", criterion_10),
    ];
    // one worker per core, so the runtime criteria time real work
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(criteria.len());
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<(Outcome, Duration)>>> =
        criteria.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(_, f)) = criteria.get(k) else {
                    break;
                };
                let start = Instant::now();
                let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
                    Outcome::new(false, format!("panicked: {}", panic_text(&e)))
                });
                *slots[k].lock().unwrap() = Some((outcome, start.elapsed()));
            });
        }
    });
    let outcomes: Vec<(Outcome, Duration)> = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every criterion ran"))
        .collect();
    let mut failed = 0;
    for (k, ((name, _), (outcome, elapsed))) in criteria.iter().zip(&outcomes).enumerate() {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {:>2} {status} {name}: {} [{:.1}s]",
            k + 1,
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_default()
}
