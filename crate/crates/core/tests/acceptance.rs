//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; the process exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fourier_metric::counterexample::{phi0_smoothness_probe, verify_lipschitz, verify_moments_at_zero, Branch};
use fourier_metric::fourier::ft_eval;
use fourier_metric::measure::{moments_match, Atom};
use fourier_metric::metric::{divergence_check, ratio, Verdict};
use fourier_metric::multiindex::enumerate_upto;
use fourier_metric::{
    dm, ComplexMeasure, DiscreteMeasure, DmOptions, GridSpec, MomentSpec, MultiIndex, PhiDeltaFamily, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn spec_101() -> MomentSpec {
    MomentSpec::from_values(1, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lipschitz_pairs() -> Outcome {
    let opts = DmOptions::default();
    let mut slowest = Duration::ZERO;
    let mut worst_slack = f64::INFINITY;
    for (d1, d2) in [(1.0, 0.5), (0.5, 0.25), (0.2, 0.1), (0.05, 0.04)] {
        let t = Instant::now();
        let r = verify_lipschitz(&spec_101(), d1, d2, &opts).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        ensure(r.estimate <= r.bound + 1e-5, || {
            format!("({d1}, {d2}): estimate {} > bound {}", r.estimate, r.bound)
        })?;
        worst_slack = worst_slack.min(r.bound - r.estimate);
    }
    ensure(slowest < Duration::from_secs(10), || format!("slowest pair took {slowest:?}"))?;
    Ok(format!("min slack {worst_slack:.3e}, slowest pair {slowest:.2?}"))
}

fn cauchy_sequence() -> Outcome {
    let js = [1u32, 2, 4, 8, 16];
    let opts = DmOptions::default();
    let measures: Vec<ComplexMeasure> = js
        .iter()
        .map(|&j| PhiDeltaFamily::new(spec_101(), 1.0 / j as f64).unwrap().make_measure().unwrap())
        .collect();
    let n = js.len();
    let mut dist = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = dm(&measures[a], &measures[b], 2, &opts).map_err(|e| e.to_string())?.value;
            let bound = (1.0 / js[a] as f64 - 1.0 / js[b] as f64).abs();
            ensure(v <= bound + 1e-5, || format!("j={} k={}: {v} > {bound}", js[a], js[b]))?;
            dist[a][b] = v;
            dist[b][a] = v;
        }
    }
    // Diameter of each tail {μ_{j_t}, μ_{j_{t+1}}, ...}.
    let tails: Vec<f64> = (0..n - 1)
        .map(|t| {
            (t..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .map(|(a, b)| dist[a][b])
                .fold(0.0, f64::max)
        })
        .collect();
    ensure(tails.windows(2).all(|w| w[1] < w[0]), || format!("tail diameters not decreasing: {tails:?}"))?;
    Ok(format!("tail diameters {:?}", tails.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()))
}

fn non_convergence_witness() -> Outcome {
    let t = phi0_smoothness_probe(2, 50).map_err(|e| e.to_string())?;
    ensure(t.limit_a.abs() < 1e-3, || format!("branch A limit {}", t.limit_a))?;
    ensure((t.limit_b + 2.0).abs() < 1e-3, || format!("branch B limit {}", t.limit_b))?;
    let min_gap = t
        .gaps()
        .into_iter()
        .filter(|&(n, _)| n >= 5)
        .map(|(_, g)| g)
        .fold(f64::INFINITY, f64::min);
    ensure(min_gap > 1.9, || format!("gap {min_gap} for some n ≥ 5"))?;
    let last_a = t.branch(Branch::A).last().unwrap().quotient;
    Ok(format!(
        "limits {:.2e} and {:.6}, min gap {min_gap:.4}, last raw A quotient {last_a:.4e}",
        t.limit_a, t.limit_b
    ))
}

fn random_moment_spec(rng: &mut ChaCha8Rng, dim: usize, m: u32) -> MomentSpec {
    let values: Vec<C64> = enumerate_upto(dim, m)
        .iter()
        .map(|_| {
            let r = 2.0 * rng.gen::<f64>().sqrt();
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, t)
        })
        .collect();
    MomentSpec::from_values(dim, m, &values).unwrap()
}

fn family_moments() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d6f6d);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for dim in [1, 2] {
        for m in [2, 3] {
            let spec = random_moment_spec(&mut rng, dim, m);
            for delta in [1.0, 0.1] {
                let fam = PhiDeltaFamily::new(spec.clone(), delta).unwrap();
                for beta in enumerate_upto(dim, m) {
                    let r = verify_moments_at_zero(&fam, &beta, None).map_err(|e| e.to_string())?;
                    ensure(r.abs_error < 1e-4, || {
                        format!("d={dim} m={m} δ={delta} β={beta}: error {}", r.abs_error)
                    })?;
                    worst = worst.max(r.abs_error);
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} derivatives, worst error {worst:.2e}"))
}

fn realization() -> Outcome {
    let t = Instant::now();
    let fam = PhiDeltaFamily::new(spec_101(), 1.0).unwrap();
    let grid = GridSpec::symmetric(1, 96.0, 0.25).unwrap();
    let density: ComplexMeasure = fam.realize(&grid).map_err(|e| e.to_string())?.into();
    let rep = moments_match(&density, &spec_101(), 1e-4).map_err(|e| e.to_string())?;
    ensure(rep.matches, || format!("moments off: {rep:?}"))?;
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let xi = -2.0 + 4.0 * k as f64 / 19.0;
        let err = (ft_eval(&density, &[xi]).unwrap() - fam.eval(&[xi])).norm();
        worst = worst.max(err);
    }
    ensure(worst < 1e-6, || format!("round-trip error {worst}"))?;
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "moment discrepancy {:.2e}, round-trip error {worst:.2e}, {elapsed:.2?}",
        rep.max_discrepancy
    ))
}

fn value_oracle() -> Outcome {
    let mu: ComplexMeasure = DiscreteMeasure::from_1d(&[(-1.0, c(0.5, 0.0)), (1.0, c(0.5, 0.0))]).into();
    let nu: ComplexMeasure =
        DiscreteMeasure::from_1d(&[(-2.0, c(0.125, 0.0)), (0.0, c(0.75, 0.0)), (2.0, c(0.125, 0.0))]).into();
    let est = dm(&mu, &nu, 2, &DmOptions::default()).map_err(|e| e.to_string())?;
    let oracle = (1..=500_000)
        .map(|k| {
            let xi = k as f64 * 1e-4;
            (1.0 - xi.cos()).powi(2) / (2.0 * xi * xi)
        })
        .fold(0.0, f64::max);
    ensure((est.value - oracle).abs() <= 1e-5, || format!("dm {} vs oracle {oracle}", est.value))?;
    Ok(format!("dm {:.10} vs oracle {oracle:.10}", est.value))
}

/// `c (δ_a − 3δ_{a+s} + 3δ_{a+2s} − δ_{a+3s})`: zero moments of order ≤ 2.
fn third_difference(a: f64, s: f64, w: C64) -> Vec<Atom> {
    [1.0, -3.0, 3.0, -1.0]
        .iter()
        .enumerate()
        .map(|(i, &k)| Atom {
            x: vec![a + i as f64 * s],
            w: w * k,
        })
        .collect()
}

fn dyadic(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 8.0
}

fn matched_triple(rng: &mut ChaCha8Rng) -> Vec<ComplexMeasure> {
    let base: Vec<Atom> = (0..3)
        .map(|_| Atom {
            x: vec![dyadic(rng, -16, 16)],
            w: c(dyadic(rng, -8, 8), dyadic(rng, -8, 8)),
        })
        .collect();
    (0..3)
        .map(|_| {
            let mut atoms = base.clone();
            for _ in 0..rng.gen_range(1..=2) {
                let w = c(dyadic(rng, -4, 4), dyadic(rng, -4, 4));
                atoms.extend(third_difference(dyadic(rng, -16, 8), dyadic(rng, 1, 8), w));
            }
            DiscreteMeasure::new(1, atoms).unwrap().into()
        })
        .collect()
}

fn axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x417869);
    let opts = DmOptions::default();
    let (mut worst_sym, mut worst_tri): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for t in 0..20 {
        let ms = matched_triple(&mut rng);
        let d = |i: usize, j: usize| dm(&ms[i], &ms[j], 2, &opts).map(|e| e.value).map_err(|e| e.to_string());
        let mut table = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    table[i][j] = d(i, j)?;
                    ensure(table[i][j] >= 0.0, || format!("triple {t}: negative distance"))?;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                worst_sym = worst_sym.max((table[i][j] - table[j][i]).abs());
                for k in 0..3 {
                    worst_tri = worst_tri.max(table[i][k] - table[i][j] - table[j][k]);
                }
            }
        }
    }
    ensure(worst_sym <= 1e-9, || format!("symmetry discrepancy {worst_sym}"))?;
    ensure(worst_tri <= 3e-6, || format!("triangle excess {worst_tri}"))?;
    Ok(format!("symmetry discrepancy {worst_sym:.2e}, max triangle excess {worst_tri:.2e}"))
}

/// `w Σ_i (−1)^{k−i} C(k, i) δ_{a + i s e_axis}`: moments vanish below order
/// `k` and the `k e_axis` moment is `w k! s^k`.
fn kth_difference(axis: usize, k: u32, a: &[f64], s: f64, w: C64) -> Vec<Atom> {
    let mut binom = 1.0;
    (0..=k)
        .map(|i| {
            let coeff = if (k - i).is_multiple_of(2) { binom } else { -binom };
            binom = binom * (k - i) as f64 / (i + 1) as f64;
            let mut x = a.to_vec();
            x[axis] += i as f64 * s;
            Atom { x, w: w * coeff }
        })
        .collect()
}

fn divergence_detection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x446976);
    let m = 2;
    for t in 0..10 {
        let dim = 1 + t % 2;
        let base: Vec<Atom> = (0..4)
            .map(|_| Atom {
                x: (0..dim).map(|_| dyadic(&mut rng, -16, 16)).collect(),
                w: c(dyadic(&mut rng, -8, 8), dyadic(&mut rng, -8, 8)),
            })
            .collect();
        let k = rng.gen_range(0..=m);
        let axis = rng.gen_range(0..dim);
        let a: Vec<f64> = (0..dim).map(|_| dyadic(&mut rng, -8, 8)).collect();
        let w = c(dyadic(&mut rng, 1, 8), dyadic(&mut rng, -8, 8));
        let mut perturbed = base.clone();
        perturbed.extend(kth_difference(axis, k, &a, dyadic(&mut rng, 1, 8), w));
        let mu: ComplexMeasure = DiscreteMeasure::new(dim, base).unwrap().into();
        let nu: ComplexMeasure = DiscreteMeasure::new(dim, perturbed).unwrap().into();
        let mut expected = vec![0; dim];
        expected[axis] = k;
        let expected = MultiIndex::new(expected).unwrap();
        match divergence_check(&mu, &nu, m, 1e-9).map_err(|e| e.to_string())? {
            Verdict::Divergent { beta, .. } if beta == expected => {}
            other => return Err(format!("pair {t}: expected divergent at {expected}, got {other:?}")),
        }
    }
    Ok("10 pairs flagged at the perturbed multi-index".into())
}

fn tail_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5461696c);
    let opts = DmOptions::default();
    let two: ComplexMeasure = DiscreteMeasure::from_1d(&[(-1.0, c(0.5, 0.0)), (1.0, c(0.5, 0.0))]).into();
    let three: ComplexMeasure =
        DiscreteMeasure::from_1d(&[(-2.0, c(0.125, 0.0)), (0.0, c(0.75, 0.0)), (2.0, c(0.125, 0.0))]).into();
    let phi1 = PhiDeltaFamily::new(spec_101(), 1.0).unwrap().make_measure().unwrap();
    let phi2 = PhiDeltaFamily::new(spec_101(), 0.5).unwrap().make_measure().unwrap();
    let pairs = [(two, three), (phi1, phi2)];
    let mut checked = 0;
    for (mu, nu) in &pairs {
        let est = dm(mu, nu, 2, &opts).map_err(|e| e.to_string())?;
        let bound = (mu.total_variation_bound() + nu.total_variation_bound()) / est.r_max.powi(2);
        for _ in 0..50 {
            let r = est.r_max * (rng.gen_range(0.0..5f64)).exp();
            let xi = if rng.gen::<bool>() { r } else { -r };
            let v = ratio(mu, nu, 2, &[xi]).map_err(|e| e.to_string())?;
            ensure(v <= bound + 1e-12, || format!("ratio {v} at ξ={xi} exceeds {bound}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} far-field frequencies within the tail bound"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("lipschitz bound", lipschitz_pairs),
        ("cauchy property", cauchy_sequence),
        ("non-convergence witness", non_convergence_witness),
        ("family moments at zero", family_moments),
        ("measure realization", realization),
        ("metric value oracle", value_oracle),
        ("metric axioms", axioms),
        ("divergence detection", divergence_detection),
        ("tail-bound soundness", tail_soundness),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
