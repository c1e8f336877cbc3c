//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arlcp::complexity::ComplexityBucket;
use arlcp::metrics::{compute_eval_metrics, EvalRuns, Sample};
use arlcp::reward::{score_against, score_corpus, sigmoid};
use arlcp::sim::{
    self, oracle_ranking, softmax, surrogate, surrogate_gradient, RewardMode, SimConfig,
};
use arlcp::{
    allocate_coefficients, classify_complexity, count_reflection_tokens, length_penalty,
    reflection_penalty, rloo_advantages, score_group, ExecMode, GroupStats, Measurement,
    PenaltyConfig, RewardVector, TriggerLexicon,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stats(mean_rtc: f64, std_rtc: f64, mean_len: f64, std_len: f64) -> GroupStats {
    GroupStats {
        mean_rtc_correct: mean_rtc,
        std_rtc_correct: std_rtc,
        mean_len_correct: mean_len,
        std_len_correct: std_len,
        n_correct: 8,
        n_total: 16,
    }
}

fn rloo_zero_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vectors: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            let m = rng.random_range(2..=64);
            (0..m).map(|_| rng.random::<f64>()).collect()
        })
        .collect();
    let start = Instant::now();
    let mut worst_sum: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for r in &vectors {
        let adv = rloo_advantages(&RewardVector::new(r.clone()).map_err(|e| e.to_string())?);
        let m = r.len() as f64;
        let mean = r.iter().sum::<f64>() / m;
        worst_sum = worst_sum.max(adv.iter().sum::<f64>().abs());
        for (a, x) in adv.iter().zip(r) {
            worst_closed = worst_closed.max((a - m / (m - 1.0) * (x - mean)).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst_sum <= 1e-9, "|sum| reached {worst_sum:e}");
    ensure!(
        worst_closed <= 1e-12,
        "closed-form gap reached {worst_closed:e}"
    );
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("1000 vectors, max |sum| {worst_sum:.1e}, max closed-form gap {worst_closed:.1e}, {elapsed:.1?}"))
}

fn penalty_midpoint() -> Outcome {
    let cfg = PenaltyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (lo, hi) = (1.0 / (1.0 + 1f64.exp()), 1.0 / (1.0 + (-1f64).exp()));
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mu_r = rng.random_range(0..150) as f64;
        let sd_r = rng.random_range(1..40) as f64;
        let mu_l = rng.random_range(200..4000) as f64;
        let sd_l = rng.random_range(1..200) as f64;
        let s = stats(mu_r, sd_r, mu_l, sd_l);
        ensure!(
            reflection_penalty(mu_r as u64, &s, &cfg) == 0.5,
            "rtc midpoint at {s:?}"
        );
        ensure!(
            length_penalty(mu_l as u64, &s, &cfg) == 0.5,
            "len midpoint at {s:?}"
        );
        for (got, want) in [
            (reflection_penalty((mu_r + sd_r) as u64, &s, &cfg), hi),
            (length_penalty((mu_l + sd_l) as u64, &s, &cfg), hi),
            (length_penalty((mu_l - sd_l) as u64, &s, &cfg), lo),
        ] {
            worst = worst.max((got - want).abs());
        }
        if mu_r >= sd_r {
            worst = worst.max((reflection_penalty((mu_r - sd_r) as u64, &s, &cfg) - lo).abs());
        }
    }
    ensure!(worst <= 1e-9, "sigma(+-1) off by {worst:e}");
    ensure!(sigmoid(0.0) == 0.5, "sigmoid(0) != 0.5");
    Ok(format!(
        "1000 stats draws, midpoint exact, max sigma(+-1) error {worst:.1e}"
    ))
}

fn reward_bounds() -> Outcome {
    let cfg = PenaltyConfig::default();
    for bucket in ComplexityBucket::ALL {
        let (a1, a2) = allocate_coefficients(bucket, &cfg);
        ensure!(
            a1 + a2 == cfg.alpha,
            "{bucket}: {a1} + {a2} != {}",
            cfg.alpha
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scored = 0;
    for _ in 0..2000 {
        let m = rng.random_range(1..=64);
        let group: Vec<Measurement> = (0..m)
            .map(|_| {
                Measurement::new(
                    rng.random_range(0..200),
                    rng.random_range(1..5000),
                    rng.random_bool(0.6),
                )
            })
            .collect();
        let (scores, _) =
            arlcp::reward::score_measurements(&group, &cfg).map_err(|e| e.to_string())?;
        for s in scores {
            scored += 1;
            if s.correct {
                ensure!(
                    s.reward > 1.0 - cfg.alpha && s.reward < 1.0,
                    "correct reward {} outside (1 - alpha, 1)",
                    s.reward
                );
            } else {
                ensure!(s.reward == 0.0, "incorrect reward {}", s.reward);
            }
            ensure!(
                s.alpha1 + s.alpha2 == cfg.alpha,
                "coefficients do not sum to alpha"
            );
        }
    }
    Ok(format!(
        "2000 groups, {scored} rollouts, gating and bounds hold, alpha1 + alpha2 == alpha exactly"
    ))
}

fn complexity_boundaries() -> Outcome {
    let cfg = PenaltyConfig::default();
    for (rtc, want) in [
        (40, ComplexityBucket::Simple),
        (41, ComplexityBucket::Moderate),
        (80, ComplexityBucket::Moderate),
        (81, ComplexityBucket::Hard),
    ] {
        let got = classify_complexity(rtc, &cfg);
        ensure!(got == want, "rtc {rtc}: {got} instead of {want}");
    }
    for rtc in 0..200 {
        ensure!(
            classify_complexity(rtc, &cfg) <= classify_complexity(rtc + 1, &cfg),
            "not monotone at {rtc}"
        );
    }
    Ok("40/41/80/81 classified correctly, monotone over 0..200".into())
}

fn within_bucket_monotonicity() -> Outcome {
    let cfg = PenaltyConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut comparisons = 0usize;
    for _ in 0..500 {
        let s = stats(
            rng.random_range(0.0..150.0),
            rng.random_range(10.0..60.0),
            rng.random_range(200.0..3000.0),
            rng.random_range(100.0..800.0),
        );
        let bucket = ComplexityBucket::ALL[rng.random_range(0..3)];
        let (lo, hi) = match bucket {
            ComplexityBucket::Simple => (0, cfg.n1),
            ComplexityBucket::Moderate => (cfg.n1 + 1, cfg.n2),
            ComplexityBucket::Hard => (cfg.n2 + 1, 200),
        };
        let len = rng.random_range(50..5000);
        let rewards: Vec<f64> = (lo..=hi)
            .map(|rtc| score_against(Measurement::new(rtc, len, true), &s, &cfg).reward)
            .collect();
        for w in rewards.windows(2) {
            comparisons += 1;
            ensure!(
                w[1] < w[0],
                "rtc sweep in {bucket} not strictly decreasing ({} then {})",
                w[0],
                w[1]
            );
        }

        let rtc = rng.random_range(lo..=hi);
        let start = (s.mean_len_correct - 3.0 * s.std_len_correct).max(1.0) as u64;
        let end = (s.mean_len_correct + 3.0 * s.std_len_correct) as u64;
        let rewards: Vec<f64> = (start..=end)
            .step_by(7)
            .map(|len| score_against(Measurement::new(rtc, len, true), &s, &cfg).reward)
            .collect();
        for w in rewards.windows(2) {
            comparisons += 1;
            ensure!(
                w[1] < w[0],
                "len sweep not strictly decreasing ({} then {})",
                w[0],
                w[1]
            );
        }
    }
    Ok(format!(
        "500 fixtures, {comparisons} adjacent comparisons strictly decreasing in RTC and LEN"
    ))
}

fn reflection_oracle() -> Outcome {
    let lexicon = TriggerLexicon::default();
    let contents =
        std::fs::read_to_string(fixture("reflection_counts.jsonl")).map_err(|e| e.to_string())?;
    let mut hits = 0;
    let mut misses = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let text = v["text"].as_str().ok_or("missing text")?;
        let want = v["rtc"].as_u64().ok_or("missing rtc")?;
        let got = count_reflection_tokens(text, &lexicon);
        if got == want {
            hits += 1;
        } else {
            misses.push(format!("trace {}: got {got}, want {want}", i + 1));
        }
    }
    ensure!(
        hits == 20 && misses.is_empty(),
        "{hits}/20 ({})",
        misses.join("; ")
    );
    Ok("20/20 traces match hand counts".into())
}

fn spreadsheet_oracle() -> Outcome {
    let corpus_path = fixture("spreadsheet_corpus.jsonl");
    let corpus = arlcp::parse_trace_file(&corpus_path).map_err(|e| e.to_string())?;
    let mut expected = BTreeMap::new();
    let mut reader =
        csv::Reader::from_path(fixture("spreadsheet_expected.csv")).map_err(|e| e.to_string())?;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| rec[i].parse::<f64>().unwrap();
        expected.insert(
            (rec[0].to_string(), rec[1].to_string()),
            (
                rec[5].to_string(),
                [num(6), num(7), num(8), num(9), num(10)],
            ),
        );
    }
    ensure!(
        expected.len() == 12,
        "expected 12 spreadsheet rows, found {}",
        expected.len()
    );

    let lexicon = TriggerLexicon::default();
    let cfg = PenaltyConfig::default();
    let mut worst: f64 = 0.0;
    let groups =
        score_corpus(&corpus, &lexicon, &cfg, ExecMode::Parallel).map_err(|e| e.to_string())?;
    for g in &groups {
        let (again, _) = score_group(&g.rollouts, &lexicon, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            again == g.scored,
            "{}: score_group disagrees with score_corpus",
            g.prompt_id
        );
        for s in &g.scored {
            let (bucket, want) = &expected[&(s.prompt_id.clone(), s.rollout_id.clone())];
            ensure!(
                s.score.bucket.as_str() == bucket,
                "{}/{} bucket",
                s.prompt_id,
                s.rollout_id
            );
            let got = [
                s.score.alpha1,
                s.score.alpha2,
                s.score.reflection_penalty,
                s.score.length_penalty,
                s.score.reward,
            ];
            for (g, w) in got.iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
        }
    }
    ensure!(worst <= 1e-9, "library scores off by {worst:e}");

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_arlcp"))
        .arg("score")
        .arg(&corpus_path)
        .arg("--output-dir")
        .arg(out.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        status.status.success(),
        "score exited with {}",
        status.status
    );
    let scored =
        std::fs::read_to_string(out.path().join("scored.jsonl")).map_err(|e| e.to_string())?;
    let mut worst_cli: f64 = 0.0;
    let mut rows = 0;
    for line in scored.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let key = (
            v["prompt_id"].as_str().unwrap().to_string(),
            v["rollout_id"].as_str().unwrap().to_string(),
        );
        let (_, want) = &expected[&key];
        for (field, w) in ["alpha1", "alpha2", "f_rtc", "f_len", "reward"]
            .iter()
            .zip(want)
        {
            worst_cli = worst_cli.max((v[*field].as_f64().unwrap() - w).abs());
        }
        rows += 1;
    }
    ensure!(rows == 12, "CLI wrote {rows} records");
    ensure!(worst_cli <= 1e-9, "CLI output off by {worst_cli:e}");
    Ok(format!(
        "12/12 rollouts, max error {worst:.1e} (library), {worst_cli:.1e} (CLI, 9 decimals)"
    ))
}

fn simulator_selection() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig::benchmark();
    let run = arlcp::run_training(&cfg).map_err(|e| e.to_string())?;
    let first_over = run
        .trace
        .iter()
        .position(|r| r.probabilities[0] > 0.9)
        .map(|i| i + 1);
    let p_final = run.final_policy.probabilities();
    ensure!(p_final[0] > 0.9, "Arlcp final P(A) = {:.4}", p_final[0]);

    let oracle = oracle_ranking(
        &cfg,
        100_000,
        sim::oracle_seed(cfg.seed),
        ExecMode::Parallel,
    )
    .map_err(|e| e.to_string())?;
    let sep = oracle.separation();
    ensure!(
        oracle.argmax() == 0,
        "oracle argmax is archetype {}",
        oracle.argmax()
    );
    ensure!(sep > 3.0, "oracle gap only {sep:.2} SE");

    let acc_cfg = SimConfig {
        reward_mode: RewardMode::AccuracyOnly,
        ..SimConfig::benchmark()
    };
    let acc_run = arlcp::run_training(&acc_cfg).map_err(|e| e.to_string())?;
    let p_acc = acc_run.final_policy.probabilities();
    ensure!(p_acc[0] <= 0.9, "AccuracyOnly final P(A) = {:.4}", p_acc[0]);

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    let means: Vec<String> = oracle
        .estimates
        .iter()
        .map(|e| format!("{:.4}", e.mean))
        .collect();
    Ok(format!(
        "Arlcp P(A) {:.4} (above 0.9 from step {}), oracle [{}] gap {sep:.1} SE, AccuracyOnly P(A) {:.4}, {elapsed:.1?}",
        p_final[0],
        first_over.unwrap_or(0),
        means.join(", "),
        p_acc[0]
    ))
}

fn training_curve() -> Outcome {
    let cfg = SimConfig::benchmark();
    let run = arlcp::run_training(&cfg).map_err(|e| e.to_string())?;
    let t = &run.trace;
    ensure!(t.len() >= 20, "trace too short");
    let window = |rows: &[arlcp::sim::TraceRow], f: fn(&arlcp::sim::TraceRow) -> f64| {
        rows.iter().map(f).sum::<f64>() / rows.len() as f64
    };
    let (head, tail) = (&t[..10], &t[t.len() - 10..]);
    let rtc = (window(head, |r| r.mean_rtc), window(tail, |r| r.mean_rtc));
    let len = (window(head, |r| r.mean_len), window(tail, |r| r.mean_len));
    let acc = (window(head, |r| r.accuracy), window(tail, |r| r.accuracy));
    ensure!(rtc.1 < rtc.0, "mean RTC {:.2} -> {:.2}", rtc.0, rtc.1);
    ensure!(len.1 < len.0, "mean LEN {:.1} -> {:.1}", len.0, len.1);
    ensure!(acc.1 >= acc.0, "accuracy {:.3} -> {:.3}", acc.0, acc.1);
    let expected_acc = |p: Vec<f64>| {
        p.iter()
            .zip(&cfg.archetypes)
            .map(|(p, a)| p * a.p_correct)
            .sum::<f64>()
    };
    let (e0, e1) = (
        expected_acc(run.initial_policy.probabilities()),
        expected_acc(run.final_policy.probabilities()),
    );
    ensure!(e1 >= e0, "policy accuracy {e0:.3} -> {e1:.3}");
    Ok(format!(
        "RTC {:.1} -> {:.1}, LEN {:.0} -> {:.0}, accuracy {:.3} -> {:.3} (policy {e0:.3} -> {e1:.3})",
        rtc.0, rtc.1, len.0, len.1, acc.0, acc.1
    ))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = 1e-6;
    let eps = arlcp::advantage::DEFAULT_CLIP_EPS;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 50 {
        let k = rng.random_range(2..=5);
        let old_logits: Vec<f64> = (0..k).map(|_| rng.random_range(-1.5..1.5)).collect();
        let logits: Vec<f64> = old_logits
            .iter()
            .map(|l| l + rng.random_range(-0.3..0.3))
            .collect();
        let old = softmax(&old_logits);
        let m = rng.random_range(2..=8);
        let actions: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
        let advantages: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();

        // skip instances sitting on a clip kink, where no derivative exists
        let probs = softmax(&logits);
        if actions.iter().any(|&a| {
            [1.0 - eps, 1.0 + eps]
                .iter()
                .any(|b| (probs[a] / old[a] - b).abs() < 1e-3)
        }) {
            continue;
        }

        let analytic = surrogate_gradient(&logits, &old, &actions, &advantages, eps);
        let numeric: Vec<f64> = (0..k)
            .map(|i| {
                let mut up = logits.clone();
                let mut down = logits.clone();
                up[i] += h;
                down[i] -= h;
                (surrogate(&up, &old, &actions, &advantages, eps)
                    - surrogate(&down, &old, &actions, &advantages, eps))
                    / (2.0 * h)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        let rel = if scale < 1e-12 { diff } else { diff / scale };
        worst = worst.max(rel);
        checked += 1;
    }
    ensure!(worst <= 1e-5, "relative error {worst:e}");
    Ok(format!("50 instances, max relative error {worst:.1e}"))
}

fn determinism() -> Outcome {
    let run = |dir: &Path, threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_arlcp"))
            .args([
                "train-sim",
                "--seed",
                "7",
                "--steps",
                "300",
                "--oracle-samples",
                "20000",
                "--output-dir",
            ])
            .arg(dir)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("train-sim exited with {}", out.status));
        }
        std::fs::read(dir.join("trace.csv")).map_err(|e| e.to_string())
    };
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run(&tmp.path().join("a"), "4")?;
    let b = run(&tmp.path().join("b"), "4")?;
    let c = run(&tmp.path().join("c"), "1")?;
    ensure!(
        !a.is_empty() && a == b,
        "two runs produced different trace.csv"
    );
    ensure!(a == c, "thread count changed trace.csv");
    Ok(format!(
        "trace.csv byte-identical across runs ({} bytes, also with one thread)",
        a.len()
    ))
}

fn metric_arithmetic() -> Outcome {
    let case = |correct: &[bool], len: &[u64]| -> Vec<Sample> {
        correct
            .iter()
            .zip(len)
            .map(|(&correct, &len)| Sample { correct, len })
            .collect()
    };
    let t = true;
    let f = false;
    let mut base: EvalRuns = BTreeMap::new();
    base.insert(
        "math".into(),
        vec![
            case(&[t, t, f, f], &[1000; 4]),
            case(&[t, t, t, f], &[1000; 4]),
            case(&[t, f, f, f], &[1000; 4]),
            case(&[t, t, t, t], &[1000; 4]),
        ],
    );
    base.insert(
        "gsm".into(),
        vec![
            case(&[t, f, f], &[100, 200, 300]),
            case(&[t, t, f], &[400, 500, 600]),
        ],
    );
    let mut run: EvalRuns = BTreeMap::new();
    run.insert(
        "math".into(),
        vec![
            case(&[t, t, t, f], &[470; 4]),
            case(&[t, t, t, t], &[470; 4]),
            case(&[t, t, f, f], &[470; 4]),
            case(&[t, t, t, t], &[470; 4]),
        ],
    );
    run.insert(
        "gsm".into(),
        vec![case(&[t, t, t], &[100; 3]), case(&[t, t, f], &[200; 3])],
    );

    let base_report = compute_eval_metrics(&base, None).map_err(|e| e.to_string())?;
    let report = compute_eval_metrics(&run, Some(&base_report)).map_err(|e| e.to_string())?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    // hand values: math 10/16 -> 13/16, len 1000 -> 470; gsm 3/6 -> 5/6, len 350 -> 150
    let checks = [
        (
            "base math pass@1",
            base_report.per_dataset["math"].pass1_accuracy,
            0.625,
        ),
        (
            "base gsm pass@1",
            base_report.per_dataset["gsm"].pass1_accuracy,
            0.5,
        ),
        (
            "base gsm length",
            base_report.per_dataset["gsm"].mean_length,
            350.0,
        ),
        (
            "math pass@1",
            report.per_dataset["math"].pass1_accuracy,
            0.8125,
        ),
        (
            "gsm pass@1",
            report.per_dataset["gsm"].pass1_accuracy,
            5.0 / 6.0,
        ),
        ("math length", report.per_dataset["math"].mean_length, 470.0),
        ("gsm length", report.per_dataset["gsm"].mean_length, 150.0),
        (
            "delta_acc",
            report.delta_acc.unwrap_or(f64::NAN),
            625.0 / 24.0,
        ),
        (
            "delta_length_pct",
            report.delta_length_pct.unwrap_or(f64::NAN),
            -771.0 / 14.0,
        ),
    ];
    for (name, got, want) in checks {
        ensure!(close(got, want), "{name}: {got} instead of {want}");
    }

    let only_math = |r: &EvalRuns| -> EvalRuns {
        r.iter()
            .filter(|(k, _)| *k == "math")
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    };
    let base_math = compute_eval_metrics(&only_math(&base), None).map_err(|e| e.to_string())?;
    let math =
        compute_eval_metrics(&only_math(&run), Some(&base_math)).map_err(|e| e.to_string())?;
    let dl = math.delta_length_pct.unwrap_or(f64::NAN);
    ensure!(close(dl, -53.0), "single-dataset delta_length_pct {dl}");
    ensure!(
        base_report.delta_acc.is_none(),
        "delta present without a baseline"
    );
    Ok(format!(
        "pass@1 and lengths exact, delta_acc {:.6}, delta_length_pct {:.6}, worked example {dl:.1}",
        report.delta_acc.unwrap(),
        report.delta_length_pct.unwrap()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("rloo-zero-sum", rloo_zero_sum),
        ("penalty-midpoint", penalty_midpoint),
        ("reward-bounds-and-gating", reward_bounds),
        ("complexity-boundaries", complexity_boundaries),
        ("within-bucket-monotonicity", within_bucket_monotonicity),
        ("reflection-count-oracle", reflection_oracle),
        ("spreadsheet-oracle", spreadsheet_oracle),
        ("simulator-selection", simulator_selection),
        ("training-curve-shape", training_curve),
        ("gradient-check", gradient_check),
        ("train-sim-determinism", determinism),
        ("metric-arithmetic", metric_arithmetic),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(format!(
                "panicked: {}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
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
