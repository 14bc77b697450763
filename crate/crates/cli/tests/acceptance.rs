//! Acceptance criteria AC1 to AC9. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use ionsqueeze::dynamics::rwa_point;
use ionsqueeze::propagators::{h_eff_squeeze, u_carrier, u_ce, u_flip1, u_re, u_squeeze, EffectiveCoupling};
use ionsqueeze::protocols::{
    squeezed_vacuum_protocol, superposition_coefficients, superposition_protocol, WeightList,
};
use ionsqueeze::{make_space, Error, Operator, Tolerances, C64};
use ionsqueeze_cli::config::{parse_config, Command, ProtocolConfig};
use ionsqueeze_cli::report::{run, sweep_points, Results, RunOptions, RunReport};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance")
}

fn load(name: &str, command: Command) -> ProtocolConfig {
    let text = std::fs::read_to_string(configs().join(name)).expect("acceptance config");
    parse_config(&text, command).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn report(name: &str, command: Command) -> Result<RunReport, String> {
    run(&load(name, command), RunOptions::default()).map_err(|e| e.to_string())
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `exp(-i H t)` by diagonalizing each connected block of the sparsity graph of `H`.
fn blockwise_spectral_exp(h: &Operator, t: f64) -> DMatrix<C64> {
    let dense = h.to_dense();
    let n = dense.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if dense[(i, j)].norm() > 0.0 {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = root(&mut parent, i);
        blocks.entry(r).or_default().push(i);
    }
    let mut out = DMatrix::zeros(n, n);
    for idx in blocks.values() {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| dense[(idx[a], idx[b])]);
        let eig = sub.symmetric_eigen();
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
        let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = u[(a, b)];
            }
        }
    }
    out
}

fn ac1() -> Outcome {
    let space = make_space(20, 20).unwrap();
    let tol = Tolerances::default();
    let (omega, eta, eta_r) = (2.0 * std::f64::consts::PI * 2e4, 0.1, 0.1 / 3f64.sqrt().sqrt());
    let h = h_eff_squeeze(space, omega, eta, eta_r).map_err(|e| e.to_string())?;
    let mut worst = (0.0f64, 0.0f64);
    for r in [0.1, 0.3, 0.6] {
        let start = Instant::now();
        let t = r / (2.0 * omega * eta * eta_r);
        let g = EffectiveCoupling { omega, eta, eta_r, t }.g();
        let u = u_squeeze(space, g, &tol).map_err(|e| e.to_string())?.to_dense();
        let want = blockwise_spectral_exp(&h, t);
        let diff = (&u - &want).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let secs = start.elapsed().as_secs_f64();
        worst = (worst.0.max(diff), worst.1.max(secs));
        if diff > 1e-9 || secs >= 10.0 {
            return Err(format!("r={r}: max|diff|={diff:.2e} (tol 1e-9), {secs:.2}s (limit 10s)"));
        }
    }
    Ok(format!("max|diff|={:.2e} (tol 1e-9), slowest point {:.2}s (limit 10s)", worst.0, worst.1))
}

fn ac2_ac3() -> (Outcome, Outcome) {
    let rep = match report("squeeze.toml", Command::Squeeze) {
        Ok(r) => r,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let Results::Squeeze(res) = &rep.results else { unreachable!() };
    let infid = 1.0 - res.tmsv_fidelity;
    let ac2 = require(
        infid <= 1e-6 && (res.purity - 1.0).abs() <= 1e-9,
        format!("r={}, 1-F={infid:.2e} (tol 1e-6), |P-1|={:.2e} (tol 1e-9)", res.squeezing_factor, (res.purity - 1.0).abs()),
    );
    let target = (-2.0 * res.squeezing_factor).exp() / 2.0;
    let dmin = (res.epr.minus - target).abs();
    let dprod = (res.epr.product - 0.25).abs();
    let ac3 = require(
        dmin <= 1e-4 && dprod <= 1e-6,
        format!("|V- - e^-2r/2|={dmin:.2e} (tol 1e-4), |V-V+ - 1/4|={dprod:.2e} (tol 1e-6)"),
    );
    (ac2, ac3)
}

/// Exact subset sums over all `2^n` choices, with the sum of term magnitudes.
fn brute_force(weights: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let n = weights.len();
    let one = C64::new(1.0, 0.0);
    let mut sums = vec![C64::new(0.0, 0.0); n + 1];
    let mut scale = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let term = weights.iter().enumerate().fold(one, |acc, (i, p)| {
            acc * if mask & (1 << i) != 0 { one - p } else { one + p }
        });
        let k = mask.count_ones() as usize;
        sums[k] += term;
        scale[k] += term.norm();
    }
    (sums, scale)
}

fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<C64> {
    (0..count)
        .map(|_| loop {
            let p = C64::from_polar(rng.random_range(0.0..=2.0), rng.random_range(0.0..std::f64::consts::TAU));
            if p.norm() > 1e-3 {
                break p;
            }
        })
        .collect()
}

fn ac4_ac5() -> (Outcome, Outcome) {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_infid = 0.0f64;
    let mut worst_audit = 0.0f64;
    let mut runs = 0;
    for m in 1..=3usize {
        let space = make_space(18 + 12 * m as i64, 18 + 12 * m as i64).unwrap();
        for _ in 0..20 {
            let weights = random_weights(&mut rng, 2 * m);
            let r = rng.random_range(0.05..=0.4);
            let g = C64::from_polar(r / 2.0, rng.random_range(0.0..std::f64::consts::TAU));
            let list = WeightList::new(weights).unwrap();
            match superposition_protocol(space, g, &list, &tol) {
                Ok(res) => {
                    worst_infid = worst_infid.max(1.0 - res.target_fidelity);
                    worst_audit = res.probability_audit.iter().fold(worst_audit, |a, &b| a.max(b));
                    runs += 1;
                }
                Err(e) => {
                    let msg = format!("m={m}, r={r:.3}: {e}");
                    return (Err(msg.clone()), Err(msg));
                }
            }
        }
    }
    let mut worst_dp = 0.0f64;
    for m in 1..=6 {
        for _ in 0..10 {
            let weights = random_weights(&mut rng, 2 * m);
            let dp = superposition_coefficients(&weights);
            let (brute, scale) = brute_force(&weights);
            for k in 0..=2 * m {
                worst_dp = worst_dp.max((dp[k] - brute[k]).norm() / scale[k].max(1.0));
            }
        }
    }
    let ac4 = require(
        worst_infid <= 1e-8 && worst_dp <= 1e-12,
        format!(
            "{runs} runs, max 1-F={worst_infid:.2e} (tol 1e-8); DP vs brute force m<=6 max|diff|/max(1,sum|terms|)={worst_dp:.2e} (tol 1e-12)"
        ),
    );

    let space = make_space(6, 6).unwrap();
    let one = C64::new(1.0, 0.0);
    let zero = superposition_protocol(space, C64::new(0.0, 0.0), &WeightList::new(vec![one, one]).unwrap(), &tol);
    let ac5 = match zero {
        Ok(res) => {
            let pair = (res.cumulative_probability, res.formula_probability.unwrap_or(f64::NAN));
            require(
                worst_audit <= 1e-10 && pair == (0.25, 1.0 / 64.0),
                format!("max audit={worst_audit:.2e} (tol 1e-10); G=0, p=(1,1): (exact, formula)=({}, {})", pair.0, pair.1),
            )
        }
        Err(e) => Err(e.to_string()),
    };
    (ac4, ac5)
}

fn ac6() -> Outcome {
    let rep = report("general.toml", Command::General)?;
    let Results::General(res) = &rep.results else { unreachable!() };
    let infid = 1.0 - res.target_fidelity;
    let worst = res.stages.iter().map(|s| (s.purity - 1.0).abs()).fold(0.0, f64::max);
    require(
        infid <= 1e-6 && worst <= 1e-9 && res.stages.len() == 5,
        format!("1-F={infid:.2e} (tol 1e-6), max |P-1| over {} stages={worst:.2e} (tol 1e-9)", res.stages.len()),
    )
}

fn ac7() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, label) in [("rwa-eta.toml", "eta"), ("rwa-omega.toml", "omega/nu")] {
        let cfg = load(name, Command::ValidateRwa);
        let physical = cfg.physical.unwrap();
        let space = make_space(cfg.n_c_cut, cfg.n_r_cut).unwrap();
        let mut values = Vec::new();
        for p in sweep_points(&physical.params, cfg.sweep.as_ref()) {
            let start = Instant::now();
            let pt = rwa_point(&p, space, physical.r, physical.order, &cfg.tolerances).map_err(|e| e.to_string())?;
            let secs = start.elapsed().as_secs_f64();
            ok &= secs < 60.0;
            values.push((pt.infidelity, secs));
        }
        ok &= values.windows(2).all(|w| w[1].0 <= w[0].0);
        let shown: Vec<_> = values.iter().map(|(v, s)| format!("{v:.3e} ({s:.1}s)")).collect();
        lines.push(format!("{label}: {}", shown.join(" >= ")));
    }
    require(ok, format!("{} (limit 60s each)", lines.join("; ")))
}

fn ac8() -> Outcome {
    let tol = Tolerances::default();
    let space = make_space(20, 20).unwrap();
    let beta = C64::new(0.3, 0.4);
    let ops = [
        u_squeeze(space, C64::new(0.1, -0.25), &tol),
        u_ce(space, beta, &tol),
        u_re(space, beta, &tol),
        u_carrier(space),
        u_flip1(space),
    ];
    let mut worst = 0.0f64;
    for op in ops {
        worst = worst.max(op.map_err(|e| e.to_string())?.unitarity_defect());
    }
    let guard = squeezed_vacuum_protocol(make_space(10, 10).unwrap(), C64::new(0.0, -1.0), &tol);
    let fired = matches!(guard, Err(Error::TailMass { .. }));
    require(
        worst <= 1e-10 && fired,
        format!("max unitarity defect={worst:.2e} (tol 1e-10); tail guard at r=2, cutoff 10 fired: {fired}"),
    )
}

fn ac9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        let status = Process::new(env!("CARGO_BIN_EXE_ionsqueeze"))
            .args(["general", "--seedless", "--config"])
            .arg(configs().join("general.toml"))
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("run {i} exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    require(outputs[0] == outputs[1], format!("{} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]))
}

fn main() {
    let (ac2, ac3) = ac2_ac3();
    let (ac4, ac5) = ac4_ac5();
    let results = [
        ("AC1", ac1()),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6()),
        ("AC7", ac7()),
        ("AC8", ac8()),
        ("AC9", ac9()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("{name} PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
