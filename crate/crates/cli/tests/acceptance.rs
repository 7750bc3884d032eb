//! Acceptance suite: one PASS/FAIL line per criterion. `FLASHSAC_ACCEPTANCE=3,5`
//! restricts the run to a subset. The process exits non-zero on a FAIL line
//! only when `FLASHSAC_ACCEPTANCE_STRICT=1`, so a workspace test run still
//! reaches every other test target.

#[allow(dead_code, unused_imports)]
#[path = "../../core/tests/gradients.rs"]
mod gradients;

#[allow(dead_code, unused_imports)]
#[path = "../../core/tests/projection.rs"]
mod projection;

#[allow(dead_code, unused_imports)]
#[path = "../../core/tests/exploration.rs"]
mod exploration;

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use flashsac::envs::{EnvKind, LQR_A, LQR_B, LQR_CONTROL_SCALE, LQR_NOISE_STD, LQR_Q, LQR_R};
use flashsac::nn::{Mode, NetworkParams};
use flashsac::Scalar;
use flashsac::trainer::{actor_action, AgentState, Trainer, TrainerConfig, UtdCounter};
use flashsac_cli::{cmd_train, RunConfig, METRICS_FILE};
use flashsac_oracles::{riccati_scalar, ScalarLqr};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const PENDULUM_STEPS: u64 = 150_000;
const PENDULUM_THRESHOLD: f64 = -200.0;
const EVAL_EPISODES: usize = 10;
const EVAL_SEED: u64 = 77;
const NORM_WATCH_STEPS: u64 = 50_000;
const ENTROPY_STEP: u64 = 100_000;
const GRAD_SAMPLE_EVERY: u64 = 10_000;
const LQR_STEPS: u64 = 100_000;
const LQR_EPISODES: usize = 1000;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(line: &Line) {
    let tag = if line.pass { "PASS" } else { "FAIL" };
    println!("{tag} {:>2} {}: {}", line.id, line.name, line.detail);
    let _ = std::io::stdout().flush();
}

/// Network sizes, batch and update ratio used for the convergence criteria
/// on a single CPU core; every other hyperparameter keeps its default.
fn desk_profile(env: EnvKind, seed: u64) -> TrainerConfig {
    TrainerConfig {
        n_envs: 16,
        batch_size: 128,
        utd_updates: 1,
        utd_per_transitions: 4,
        critic_width: 32,
        critic_blocks: 1,
        actor_width: 32,
        actor_blocks: 1,
        warmup_transitions: Some(5000),
        total_env_steps: if env == EnvKind::Lqr { LQR_STEPS } else { PENDULUM_STEPS },
        seed,
        ..TrainerConfig::default()
    }
}

fn criterion_1() -> Line {
    let t0 = Instant::now();
    let suites: [(&str, fn(usize) -> f64); 9] = [
        ("linear", gradients::linear_layer),
        ("batch norm", gradients::batch_norm_train_mode),
        ("rms norm", gradients::rms_norm),
        ("block", gradients::inverted_residual_block),
        ("actor head", gradients::actor_head_sampling),
        ("cross entropy", gradients::cross_entropy_logits),
        ("critic head", gradients::critic_network_with_cross_entropy_head),
        ("actor loss", gradients::composed_actor_loss),
        ("critic loss", gradients::composed_critic_loss),
    ];
    let errors: Vec<(&str, f64)> = suites.iter().map(|(n, f)| (*n, f(gradients::TRIALS))).collect();
    let secs = t0.elapsed().as_secs_f64();
    let (worst_name, worst) = errors.iter().cloned().fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Line {
        id: 1,
        name: "gradient suite",
        pass: worst < 1e-4 && secs < 120.0,
        detail: format!(
            "{} suites x {} trials, max rel err {worst:.2e} ({worst_name}) < 1e-4, {secs:.1} s < 120 s",
            errors.len(),
            gradients::TRIALS
        ),
    }
}

fn criterion_2() -> Line {
    let t0 = Instant::now();
    let r = projection::projection_suite(10_000, 2024);
    let secs = t0.elapsed().as_secs_f64();
    Line {
        id: 2,
        name: "projection suite",
        pass: r.max_abs_diff < 1e-12 && r.max_mass_err < 1e-9 && r.max_mean_err < 1e-9 && secs < 30.0,
        detail: format!(
            "{} instances, max |diff| {:.1e} < 1e-12, mass err {:.1e} < 1e-9, mean err {:.1e} < 1e-9, {secs:.2} s",
            r.instances, r.max_abs_diff, r.max_mass_err, r.max_mean_err
        ),
    }
}

fn criterion_4() -> Line {
    let t0 = Instant::now();
    let r = exploration::zeta_suite(1_000_000, 4);
    let secs = t0.elapsed().as_secs_f64();
    Line {
        id: 4,
        name: "zeta sampler",
        pass: r.max_abs_dev < 0.005 && r.chi2 < exploration::CHI2_15_CRIT_01 && secs < 10.0,
        detail: format!(
            "P(1) = {:.5}, max |dev| {:.2e} < 0.005, chi2 {:.2} < {} (df 15, alpha 0.01), {secs:.2} s",
            r.p1_empirical,
            r.max_abs_dev,
            r.chi2,
            exploration::CHI2_15_CRIT_01
        ),
    }
}

/// Worst deviations of the norm invariants seen after updates.
#[derive(Debug, Default, Clone)]
struct NormWatch {
    updates: u64,
    row_dev: f64,
    gamma_dev: f64,
    init_feature_dev: f64,
    feature_excess: f64,
    max_grad_norm: f64,
    grad_finite: bool,
}

fn l2<T: Scalar>(v: impl Iterator<Item = T>) -> f64 {
    v.map(|x| x.as_f64() * x.as_f64()).sum::<f64>().sqrt()
}

fn weight_row_dev<T: Scalar>(net: &NetworkParams<T>) -> f64 {
    let mut mats = vec![&net.embed.weight, &net.head.weight];
    for b in &net.blocks {
        mats.push(&b.expand.weight);
        mats.push(&b.project.weight);
    }
    mats.iter()
        .flat_map(|w| w.rows().into_iter().map(|r| (l2(r.iter().copied()) - 1.0).abs()))
        .fold(0.0, f64::max)
}

fn gamma_dev<T: Scalar>(net: &NetworkParams<T>) -> f64 {
    let mut gammas = vec![&net.final_norm.gamma];
    gammas.extend(net.blocks.iter().filter_map(|b| b.bn.as_ref().map(|bn| &bn.affine.gamma)));
    gammas
        .iter()
        .map(|g| (l2(g.iter().copied()) - (g.len() as f64).sqrt()).abs())
        .fold(0.0, f64::max)
}

/// Largest amount by which a post-RMSNorm feature row norm exceeds
/// `sqrt(h)·max|gamma|`, and the largest deviation from `sqrt(h)·|gamma|`
/// when the gamma is uniform.
fn feature_check<T: Scalar>(net: &NetworkParams<T>, probe: &Array2<T>) -> (f64, Option<f64>) {
    let out = net.forward(probe.view(), Mode::Eval).expect("probe forward");
    let g = &net.final_norm.gamma;
    let h = g.len() as f64;
    let g_max = g.iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max);
    let uniform = g.iter().all(|&v| v == g[0]);
    let mut excess = f64::NEG_INFINITY;
    let mut dev = 0.0f64;
    for row in out.features.rows() {
        let n = l2(row.iter().copied());
        excess = excess.max(n - h.sqrt() * g_max);
        dev = dev.max((n - h.sqrt() * g[0].as_f64().abs()).abs());
    }
    (excess, uniform.then_some(dev))
}

/// Seed-1 pendulum run in f64 for the first `NORM_WATCH_STEPS` steps,
/// checking the norm invariants after every update.
fn watch_norms(seed: u64) -> (NormWatch, Option<String>) {
    let config = TrainerConfig { total_env_steps: NORM_WATCH_STEPS, ..desk_profile(EnvKind::Pendulum, seed) };
    let mut trainer = match Trainer::<f64>::new(config, EnvKind::Pendulum) {
        Ok(t) => t,
        Err(e) => return (NormWatch::default(), Some(e.to_string())),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = Array2::from_shape_fn((64, 4), |(_, j)| rng.random_range(-1.0..1.0) * if j == 2 { 8.0 } else { 1.0 });
    let mut init = NormWatch { grad_finite: true, ..NormWatch::default() };
    for c in &trainer.agent.critics {
        let (_, dev) = feature_check(c, &probe);
        init.init_feature_dev = init.init_feature_dev.max(dev.unwrap_or(f64::INFINITY));
    }
    let shared = Arc::new(Mutex::new(init));
    let w = shared.clone();
    trainer.set_update_observer(move |agent: &AgentState<f64>| {
        let mut w = w.lock().unwrap();
        w.updates += 1;
        for net in std::iter::once(&agent.actor).chain(agent.critics.iter()) {
            w.row_dev = w.row_dev.max(weight_row_dev(net));
            w.gamma_dev = w.gamma_dev.max(gamma_dev(net));
        }
        for c in &agent.critics {
            let (excess, _) = feature_check(c, &probe);
            w.feature_excess = w.feature_excess.max(excess);
        }
    });
    let mut error = None;
    while !trainer.is_done() {
        match trainer.step() {
            Ok(r) if r.critic_updates > 0 => {
                let g = trainer.latest().critic.grad_norm;
                let mut w = shared.lock().unwrap();
                w.grad_finite &= g.is_finite();
                w.max_grad_norm = w.max_grad_norm.max(g);
            }
            Ok(_) => {}
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let watch = shared.lock().unwrap().clone();
    (watch, error)
}

struct PendulumRun {
    seed: u64,
    eval: Option<(f64, f64)>,
    entropy_at_100k: Option<f64>,
    grad_norms: Vec<(u64, f64)>,
    secs: f64,
    error: Option<String>,
}

impl PendulumRun {
    fn solved(&self) -> bool {
        self.eval.is_some_and(|(m, _)| m >= PENDULUM_THRESHOLD)
    }
}

fn run_pendulum(config: TrainerConfig) -> PendulumRun {
    let seed = config.seed;
    let t0 = Instant::now();
    let mut run = PendulumRun {
        seed,
        eval: None,
        entropy_at_100k: None,
        grad_norms: Vec::new(),
        secs: 0.0,
        error: None,
    };
    let mut trainer = match Trainer::<f32>::new(config, EnvKind::Pendulum) {
        Ok(t) => t,
        Err(e) => {
            run.error = Some(e.to_string());
            return run;
        }
    };
    let mut next_grad = GRAD_SAMPLE_EVERY;
    while !trainer.is_done() {
        match trainer.step() {
            Ok(_) => {}
            Err(e) => {
                run.error = Some(e.to_string());
                break;
            }
        }
        let step = trainer.env_steps();
        if run.entropy_at_100k.is_none() && step >= ENTROPY_STEP {
            run.entropy_at_100k = trainer.entropy_running();
        }
        if step >= next_grad {
            run.grad_norms.push((next_grad, trainer.latest().critic.grad_norm));
            next_grad += GRAD_SAMPLE_EVERY;
        }
    }
    if run.error.is_none() {
        match trainer.evaluate(EVAL_EPISODES, EVAL_SEED) {
            Ok(e) => run.eval = Some(e),
            Err(e) => run.error = Some(e.to_string()),
        }
    }
    run.secs = t0.elapsed().as_secs_f64();
    let eval = run.eval.map_or_else(|| "none".to_owned(), |(m, s)| format!("{m:.1} ± {s:.1}"));
    eprintln!(
        "  pendulum seed {seed} (x{}, wn {}, bn {}): eval {eval}, {:.0} s{}",
        trainer.config.reward_multiplier,
        trainer.config.weight_norm,
        trainer.config.batch_norm,
        run.secs,
        run.error.as_deref().map(|e| format!(", error: {e}")).unwrap_or_default()
    );
    run
}

fn criterion_3() -> Line {
    let seed = SEEDS[0];
    let (w, error) = watch_norms(seed);
    let sqrt_d_ok = w.gamma_dev <= 1e-6;
    let pass = error.is_none()
        && w.updates > 0
        && w.row_dev <= 1e-6
        && sqrt_d_ok
        && w.init_feature_dev <= 1e-4
        && w.feature_excess <= 1e-4
        && w.grad_finite
        && w.max_grad_norm < 1e3;
    Line {
        id: 3,
        name: "norm invariants",
        pass,
        detail: format!(
            "f64 run, seed {seed}, {} updates over {NORM_WATCH_STEPS} steps: max |row norm - 1| {:.1e}, max |‖gamma‖ - sqrt d| {:.1e}, \
             init |feature norm - sqrt h| {:.1e}, feature excess over sqrt(h)·max gamma {:.1e}, max grad norm {:.3} < 1e3",
            w.updates, w.row_dev, w.gamma_dev, w.init_feature_dev, w.feature_excess, w.max_grad_norm
        ),
    }
}

fn criterion_5(run: &PendulumRun) -> Line {
    let target = flashsac::policy::entropy_target(1, 0.15);
    let h = run.entropy_at_100k.unwrap_or(f64::NAN);
    let rel = (h - target).abs() / target.abs();
    Line {
        id: 5,
        name: "entropy regulation",
        pass: rel <= 0.15,
        detail: format!("seed {} running entropy at {ENTROPY_STEP} steps {h:.4} vs target {target:.5}, off by {:.1}% <= 15%", run.seed, 100.0 * rel),
    }
}

fn summarize(runs: &[PendulumRun]) -> String {
    runs.iter()
        .map(|r| match r.eval {
            Some((m, _)) => format!("{}:{m:.0}", r.seed),
            None => format!("{}:err", r.seed),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_6(runs: &[PendulumRun]) -> Line {
    let solved = runs.iter().filter(|r| r.solved()).count();
    let slowest = runs.iter().map(|r| r.secs).fold(0.0, f64::max);
    Line {
        id: 6,
        name: "pendulum convergence",
        pass: solved >= 4 && slowest < 900.0,
        detail: format!(
            "{solved}/5 seeds with eval return >= {PENDULUM_THRESHOLD} after {PENDULUM_STEPS} steps [{}], slowest seed {slowest:.0} s < 900 s",
            summarize(runs)
        ),
    }
}

fn criterion_8(runs: &[PendulumRun]) -> Line {
    // evaluation uses the unscaled environment, i.e. the x100 return divided by 100
    let solved = runs.iter().filter(|r| r.solved()).count();
    Line {
        id: 8,
        name: "reward-scale invariance",
        pass: solved >= 4,
        detail: format!("rewards x100: {solved}/5 seeds with eval return / 100 >= {PENDULUM_THRESHOLD} [{}]", summarize(runs)),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_11(full: &[PendulumRun], ablated: &[PendulumRun]) -> Line {
    let mut shown = 0;
    let mut notes = Vec::new();
    for run in ablated {
        let mut worst_ratio = 0.0f64;
        for &(step, g) in &run.grad_norms {
            let reference: Vec<f64> = full
                .iter()
                .filter_map(|f| f.grad_norms.iter().find(|(s, _)| *s == step).map(|(_, g)| *g))
                .collect();
            if !reference.is_empty() {
                worst_ratio = worst_ratio.max(g / median(reference));
            }
        }
        let blew_up = worst_ratio > 10.0 || run.error.is_some();
        let failed = !run.solved();
        if blew_up || failed {
            shown += 1;
        }
        let eval = run.eval.map_or_else(|| "err".to_owned(), |(m, _)| format!("{m:.0}"));
        notes.push(format!("{}: max grad ratio {worst_ratio:.1}, eval {eval}", run.seed));
    }
    Line {
        id: 11,
        name: "ablation echo",
        pass: shown >= 3,
        detail: format!(
            "no weight projection, no batch norm: {shown}/5 seeds with grad norm > 10x full-method median or failing convergence [{}]",
            notes.join("; ")
        ),
    }
}

fn criterion_7() -> Line {
    let (_, k) = riccati_scalar(LQR_A, LQR_B, LQR_Q, LQR_R, 1e-12).expect("riccati converges");
    let lqr = ScalarLqr {
        a: LQR_A,
        b: LQR_B,
        q: LQR_Q,
        r: LQR_R,
        noise_std: LQR_NOISE_STD,
        horizon: 100,
        x0_bound: 1.0,
    };
    let mut within = 0;
    let mut notes = Vec::new();
    for seed in SEEDS {
        let t0 = Instant::now();
        let mc_seed = 9000 + seed;
        let optimal = lqr.mc_policy_cost(|x| -k * x, LQR_EPISODES, mc_seed, 10.0);
        let mut trainer = match Trainer::<f32>::new(desk_profile(EnvKind::Lqr, seed), EnvKind::Lqr) {
            Ok(t) => t,
            Err(e) => {
                notes.push(format!("{seed}: {e}"));
                continue;
            }
        };
        if let Err(e) = trainer.run() {
            notes.push(format!("{seed}: {e}"));
            continue;
        }
        let actor = trainer.agent.actor.clone();
        let policy = |x: f64| {
            let a = actor_action(&actor, ndarray::array![[x]].view()).expect("actor forward")[[0, 0]];
            LQR_CONTROL_SCALE * a.clamp(-1.0, 1.0)
        };
        let learned = lqr.mc_policy_cost(policy, LQR_EPISODES, mc_seed, 10.0);
        let gap = learned / optimal - 1.0;
        if gap.abs() <= 0.10 {
            within += 1;
        }
        eprintln!("  lqr seed {seed}: learned {learned:.4} vs optimal {optimal:.4} ({:.0} s)", t0.elapsed().as_secs_f64());
        notes.push(format!("{seed}: {:+.1}%", 100.0 * gap));
    }
    Line {
        id: 7,
        name: "LQR convergence",
        pass: within >= 4,
        detail: format!(
            "{within}/5 seeds within 10% of the Riccati policy cost (K = {k:.5}, {LQR_EPISODES} x 100-step episodes) [{}]",
            notes.join(" ")
        ),
    }
}

fn criterion_9() -> Line {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |name: &str| {
        let config = RunConfig {
            trainer: TrainerConfig { total_env_steps: 20_000, ..desk_profile(EnvKind::Pendulum, 11) },
            env: EnvKind::Pendulum,
            eval_episodes: 3,
            out_dir: dir.path().join(name),
            wall_clock: false,
            precision: flashsac_cli::Precision::F32,
            ..RunConfig::default()
        };
        cmd_train(&config).map_err(|e| e.to_string())?;
        std::fs::read(config.out_dir.join(METRICS_FILE)).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a"), run("b"));
    let (pass, detail) = match (a, b) {
        (Ok(a), Ok(b)) => {
            let rows = a.iter().filter(|&&c| c == b'\n').count().saturating_sub(1);
            (a == b, format!("two 20000-step runs, seed 11: {rows} rows, {} bytes, identical: {}", a.len(), a == b))
        }
        (a, b) => (false, format!("run failed: {:?} {:?}", a.err(), b.err())),
    };
    Line { id: 9, name: "determinism", pass, detail }
}

fn tiny(n_envs: usize, utd: (u64, u64), warmup: u64) -> TrainerConfig {
    TrainerConfig {
        n_envs,
        utd_updates: utd.0,
        utd_per_transitions: utd.1,
        batch_size: 16,
        buffer_capacity: 100_000,
        warmup_transitions: Some(warmup),
        actor_width: 8,
        critic_width: 8,
        actor_blocks: 1,
        critic_blocks: 1,
        expansion: 2,
        n_atoms: 11,
        ..TrainerConfig::default()
    }
}

/// Runs `steps` vectorized steps and compares the update count with the
/// exact rational count of transitions collected after warmup.
fn count_updates(config: TrainerConfig, steps: usize) -> Result<(u64, u64, u64, bool), String> {
    let warmup = config.warmup();
    let ratio = (config.utd_updates, config.utd_per_transitions);
    let delay = config.actor_update_delay;
    let mut t = Trainer::<f32>::new(config, EnvKind::Pendulum).map_err(|e| e.to_string())?;
    let mut counted = 0u64;
    let mut per_step_ok = true;
    for _ in 0..steps {
        let r = t.step().map_err(|e| e.to_string())?;
        if t.buffer.total_inserted() >= warmup {
            counted += r.transitions;
        }
        per_step_ok &= t.agent.actor_updates == t.agent.critic_updates / delay;
    }
    let expected = counted * ratio.0 / ratio.1;
    Ok((t.agent.critic_updates, expected, counted, per_step_ok))
}

fn criterion_10() -> Line {
    let gpu = count_updates(tiny(1024, (2, 1024), 1024), 30);
    let cpu = count_updates(tiny(1, (1, 1), 32), 3000);
    let mixed = count_updates(tiny(16, (2, 1024), 256), 2000);
    let mut counter = UtdCounter::new(2, 1024);
    let total: u64 = (0..1_000_000).map(|_| counter.add(1)).sum();
    let drift_ok = total == 2 * 1_000_000 / 1024 && total * 1024 + counter.carry() == 2 * 1_000_000;
    let ok = |r: &Result<(u64, u64, u64, bool), String>| matches!(r, Ok((got, want, _, cadence)) if got == want && *cadence);
    let fmt = |r: &Result<(u64, u64, u64, bool), String>| match r {
        Ok((got, want, n, _)) => format!("{got}/{want} updates for {n} transitions"),
        Err(e) => e.clone(),
    };
    Line {
        id: 10,
        name: "UTD accounting",
        pass: ok(&gpu) && ok(&cpu) && ok(&mixed) && drift_ok,
        detail: format!(
            "2/1024 with 1024 envs: {}; 1/1 with 1 env: {}; 2/1024 with 16 envs: {}; 1M single transitions -> {total} updates, carry {} (no drift: {drift_ok}); actor cadence floor(critic/2) held",
            fmt(&gpu),
            fmt(&cpu),
            fmt(&mixed),
            counter.carry()
        ),
    }
}

fn selected() -> BTreeSet<u32> {
    match std::env::var("FLASHSAC_ACCEPTANCE") {
        Ok(s) if !s.trim().is_empty() => s.split(',').filter_map(|v| v.trim().parse().ok()).collect(),
        _ => (1..=11).collect(),
    }
}

fn main() {
    let want = selected();
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut emit = |line: Line| {
        report(&line);
        lines.push(line.pass);
    };
    if want.contains(&1) {
        emit(criterion_1());
    }
    if want.contains(&2) {
        emit(criterion_2());
    }
    if want.contains(&4) {
        emit(criterion_4());
    }
    if want.contains(&9) {
        emit(criterion_9());
    }
    if want.contains(&10) {
        emit(criterion_10());
    }
    let needs_full = [5, 6, 11].iter().any(|c| want.contains(c));
    let full: Vec<PendulumRun> = if needs_full {
        SEEDS.iter().map(|&s| run_pendulum(desk_profile(EnvKind::Pendulum, s))).collect()
    } else {
        Vec::new()
    };
    if want.contains(&3) {
        emit(criterion_3());
    }
    if want.contains(&5) {
        emit(criterion_5(&full[0]));
    }
    if want.contains(&6) {
        emit(criterion_6(&full));
    }
    if want.contains(&8) {
        let scaled: Vec<PendulumRun> = SEEDS
            .iter()
            .map(|&s| {
                run_pendulum(TrainerConfig { reward_multiplier: 100.0, ..desk_profile(EnvKind::Pendulum, s) })
            })
            .collect();
        emit(criterion_8(&scaled));
    }
    if want.contains(&11) {
        let ablated: Vec<PendulumRun> = SEEDS
            .iter()
            .map(|&s| {
                run_pendulum(
                    TrainerConfig { weight_norm: false, batch_norm: false, ..desk_profile(EnvKind::Pendulum, s) },
                )
            })
            .collect();
        emit(criterion_11(&full, &ablated));
    }
    if want.contains(&7) {
        emit(criterion_7());
    }
    let passed = lines.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed in {:.0} s", lines.len(), t0.elapsed().as_secs_f64());
    let strict = std::env::var("FLASHSAC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed != lines.len() {
        std::process::exit(1);
    }
}
