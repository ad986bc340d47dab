//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use larckit::blocks::{block_decompose, block_lie_closure};
use larckit::lie::{lie_closure, thm2_certificate, ClosureOptions, Thm2Options, DEFAULT_MAX_PASSES, DEFAULT_RANK_TOL};
use larckit::linop::{commutator_error, trotter_error};
use larckit::models::{jaynes_cummings_matrices, jc_block, make_jaynes_cummings, make_thm2_model, primes, Coupling, SpectrumKind};
use larckit::num_complex::Complex64;
use larckit::report::{analyze_system, random_unit_vectors, recurrence_command, AnalyzeOptions, Tolerances, Verdict};
use larckit::spectral::{check_rational_independence, ExactValue, IndependenceStatus, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL};
use larckit::torus::{kronecker_search, SearchOptions};
use larckit::{ComplexMatrix, ControlSystem, DriftSpectrum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: larckit::Error) -> String {
    e.to_string()
}

fn i_times(h: &ComplexMatrix) -> ComplexMatrix {
    h.times_i()
}

/// Independent-spectrum models reach full closure at every truncation.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    for n in 3..=8 {
        let sys = make_thm2_model(n, SpectrumKind::SqrtPrimes, Coupling::Tridiagonal).map_err(err)?;
        let truncations: Vec<usize> = (2..=n).collect();
        let opts = AnalyzeOptions {
            blocks: Some(false),
            ..Default::default()
        };
        let report = analyze_system(&sys, &truncations, &Tolerances::default(), &opts).map_err(err)?;
        ensure(report.verdict == Verdict::ControllableByThm2, || format!("n={n}: verdict {:?}", report.verdict))?;
        for h in &report.larc.history {
            ensure(h.closure_dim == h.n * h.n, || format!("n={n}: closure {} at truncation {}", h.closure_dim, h.n))?;
        }
        ensure(report.certificates.as_ref().map(Vec::len) == Some(n * n), || format!("n={n}: certificates missing"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("n=3..8 full at every truncation in {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    // (a) integer spectra are dependent, with an exactly small witness.
    for n in [3usize, 4, 5, 6] {
        let values: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let untagged = DriftSpectrum::from_diagonal(&values).map_err(err)?;
        let tags: Vec<ExactValue> = (1..=n as i64).map(|k| ExactValue::from_ratio(k, 1)).collect();
        let tagged = DriftSpectrum::from_exact(&tags).map_err(err)?;
        for spectrum in [untagged, tagged] {
            let v = check_rational_independence(&spectrum, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL);
            ensure(v.status == IndependenceStatus::Dependent, || format!("n={n}: {:?}", v.status))?;
            let c = v.relation.clone().ok_or("no witness")?;
            ensure(c.iter().any(|&k| k != 0), || "zero witness".into())?;
            let value = exact_relation_value(&c, spectrum.eigenvalues());
            ensure(rational_abs_below(&value, 1e-12), || format!("n={n}: witness {c:?} evaluates to {value}"))?;
        }
    }
    // (b) two uncoupled components give a sum of squares.
    for (n, split) in [(4usize, 2usize), (5, 2), (5, 3), (6, 3), (7, 4)] {
        let mut h = ComplexMatrix::zeros(n);
        for i in 0..n - 1 {
            if i + 1 != split {
                h.set(i, i + 1, Complex64::new(1.0, 0.0));
                h.set(i + 1, i, Complex64::new(1.0, 0.0));
            }
        }
        let sys = make_thm2_model(n, SpectrumKind::SqrtPrimes, Coupling::User(h)).map_err(err)?;
        let report = analyze_system(
            &sys,
            &(2..=n).collect::<Vec<_>>(),
            &Tolerances::default(),
            &AnalyzeOptions {
                blocks: Some(false),
                ..Default::default()
            },
        )
        .map_err(err)?;
        ensure(report.verdict == Verdict::HypothesesUnmet, || format!("n={n}: verdict {:?}", report.verdict))?;
        for t in &report.larc.history {
            let m = t.n;
            let expect = if m <= split { m * m } else { split * split + (m - split) * (m - split) };
            ensure(t.closure_dim == expect, || format!("n={n} split={split} m={m}: {} != {expect}", t.closure_dim))?;
        }
        ensure(report.larc.closure_dim != n * n, || "full closure on a reducible system".into())?;
    }
    Ok("integer spectra dependent with exact witnesses; split systems give sums of squares".into())
}

fn criterion_3() -> Outcome {
    let mut rng = rng(3);
    let pool = primes(8);
    let delta = 1e-2;
    let step = 1e-5;
    let mut compared = 0;
    for inst in 0..20 {
        let n = if inst < 10 { 2 } else { 3 };
        let mut chosen: Vec<u64> = Vec::new();
        while chosen.len() < n {
            let p = pool[rng.random_range(0..pool.len())];
            if !chosen.contains(&p) {
                chosen.push(p);
            }
        }
        let tags: Vec<ExactValue> = chosen
            .iter()
            .map(|&p| {
                let q = BigRational::new(BigInt::from(rng.random_range(1..=9)), BigInt::from(rng.random_range(1..=4)));
                ExactValue::sqrt(p).scale(&q)
            })
            .collect();
        let spectrum = DriftSpectrum::from_exact(&tags).map_err(err)?;
        let verdict = check_rational_independence(&spectrum, DEFAULT_COEFF_BOUND, DEFAULT_INDEPENDENCE_TOL);
        ensure(verdict.is_independent(), || format!("instance {inst}: {:?}", verdict.status))?;
        let xhat: Vec<f64> = tags.iter().map(ExactValue::to_f64).collect();
        let lambda: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let cert = kronecker_search(&xhat, &lambda, delta, &SearchOptions::default()).map_err(err)?;
        ensure(cert.verify(&xhat, &lambda) && cert.max_residual < delta, || {
            format!("instance {inst}: residual {}", cert.max_residual)
        })?;
        ensure((torus_residual(&xhat, &lambda, cert.t) - cert.max_residual).abs() < 1e-12, || {
            format!("instance {inst}: reported residual disagrees")
        })?;
        if n <= 2 {
            let grid = grid_first_component(&xhat, &lambda, delta, step, 1e4)
                .ok_or_else(|| format!("instance {inst}: grid found nothing"))?;
            let lip = xhat.iter().map(|x| x.abs()).fold(0.0, f64::max);
            ensure(cert.t >= grid.start - step && cert.t <= grid.end + step, || {
                format!("instance {inst}: t={} outside grid component [{}, {}]", cert.t, grid.start, grid.end)
            })?;
            ensure((cert.max_residual - grid.best).abs() <= lip * step, || {
                format!("instance {inst}: residual {} vs grid {}", cert.max_residual, grid.best)
            })?;
            compared += 1;
        }
    }
    Ok(format!("20 instances certified, {compared} matched the grid oracle"))
}

fn criterion_4() -> Outcome {
    let tags: Vec<ExactValue> = [2, 3, 5].into_iter().map(ExactValue::sqrt).collect();
    let x: Vec<f64> = tags.iter().map(ExactValue::to_f64).collect();
    let sys = ControlSystem::new(DriftSpectrum::from_exact(&tags).map_err(err)?, vec![]).map_err(err)?;
    let (t_minus, eps, seed) = (-1.0, 1e-2, 4);
    let out = recurrence_command(&sys, t_minus, eps, 3, seed, &SearchOptions::default()).map_err(err)?;
    let t_plus = out.recurrence.t_plus;
    ensure(t_plus > 0.0, || format!("t_plus = {t_plus}"))?;
    for v in random_unit_vectors(3, 3, seed) {
        let v: Vec<Complex64> = v.iter().copied().collect();
        let a = diagonal_flow(&x, t_plus, &v);
        let b = diagonal_flow(&x, t_minus, &v);
        let d = a.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        ensure(d < eps, || format!("distance {d} at t_plus = {t_plus}"))?;
    }
    let periodic = DriftSpectrum::from_diagonal(&[2.0 * PI, 4.0 * PI, 6.0 * PI]).map_err(err)?;
    let periodic = ControlSystem::new(periodic, vec![]).map_err(err)?;
    for tm in [-1.0, 0.0] {
        let r = recurrence_command(&periodic, tm, eps, 3, seed, &SearchOptions::default()).map_err(err)?;
        let t = r.recurrence.t_plus;
        ensure((t - 1.0).abs() < 1e-6, || format!("period recovered as {t} from t_minus = {tm}"))?;
    }
    Ok(format!("t_plus = {t_plus:.6} for sqrt(2,3,5); period 1 recovered"))
}

fn criterion_5() -> Outcome {
    let mut rng = rng(5);
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let n = rng.random_range(2..=8);
        let a = gaussian_hermitian(&mut rng, n);
        let b = gaussian_hermitian(&mut rng, n);
        let a = a.scale_real(1.0 / a.op_norm());
        let b = b.scale_real(1.0 / b.op_norm());
        let t_ratio = trotter_error(&a, &b, 1 << 10).map_err(err)? / trotter_error(&a, &b, 1 << 4).map_err(err)?;
        let (ia, ib) = (i_times(&a), i_times(&b));
        let c_ratio =
            commutator_error(&ia, &ib, 1 << 9).map_err(err)? / commutator_error(&ia, &ib, 1 << 3).map_err(err)?;
        ensure(t_ratio < 0.1, || format!("n={n}: Trotter ratio {t_ratio}"))?;
        ensure(c_ratio < 0.25, || format!("n={n}: commutator ratio {c_ratio}"))?;
        worst = (worst.0.max(t_ratio), worst.1.max(c_ratio));
    }
    Ok(format!("worst ratios: Trotter {:.2e}, commutator {:.2e}", worst.0, worst.1))
}

fn criterion_6() -> Outcome {
    let opts = ClosureOptions::default();
    for (omega, cutoff) in [((1.0, 1.3, 0.7), 6usize), ((0.8, 2.1, 0.35), 4)] {
        let (h0, h1, h2) = jaynes_cummings_matrices(omega.0, omega.1, omega.2, cutoff).map_err(err)?;
        let n = 2 * cutoff + 1;
        let sys = make_jaynes_cummings(omega.0, omega.1, omega.2, cutoff).map_err(err)?;
        let report = block_lie_closure(&sys, &[0, 1], opts, 6).map_err(err)?;
        let mut expect = vec![1];
        expect.extend(std::iter::repeat_n(2, cutoff));
        let dims = report.decomposition.block_dims();
        ensure(dims == expect, || format!("cutoff {cutoff}: block dims {dims:?}"))?;
        for (mu, b) in report.blocks.iter().enumerate() {
            ensure(b.least_index == jc_block(mu)[0], || format!("block {mu} starts at {}", b.least_index))?;
            if b.dim == 2 {
                ensure(b.traceless_dim == 3, || format!("block {mu}: traceless dim {}", b.traceless_dim))?;
            }
        }
        let full = lie_closure(&[i_times(&h0), i_times(&h1), i_times(&h2)], DEFAULT_RANK_TOL, DEFAULT_MAX_PASSES)
            .map_err(err)?;
        ensure(full.dim() == n * n, || format!("cutoff {cutoff}: closure with H2 is {}", full.dim()))?;
    }
    Ok("blocks (1,2,...,2), su(2) per block, full closure with H2".into())
}

fn criterion_7() -> Outcome {
    let mut rng = rng(7);
    let mut total = 0;
    for n in 2..=6 {
        for variant in 0..2 {
            let mut ps = primes(n);
            // permute so eigenvector order differs from input order
            for i in (1..n).rev() {
                ps.swap(i, rng.random_range(0..=i));
            }
            let tags: Vec<ExactValue> = ps.iter().map(|&p| ExactValue::sqrt(p)).collect();
            let values: Vec<f64> = tags.iter().map(ExactValue::to_f64).collect();
            let coupling = if variant == 0 {
                larckit::models::tridiagonal(n)
            } else {
                // random spanning tree with complex weights
                let mut h = ComplexMatrix::zeros(n);
                for v in 1..n {
                    let w = rng.random_range(0..v);
                    let z = Complex64::new(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
                    h.set(v, w, z);
                    h.set(w, v, z.conj());
                }
                h
            };
            let sys = make_thm2_model(
                n,
                SpectrumKind::User {
                    values: values.clone(),
                    exact: Some(tags),
                },
                Coupling::User(coupling.clone()),
            )
            .map_err(err)?;
            let certs = thm2_certificate(&sys, &Thm2Options::default()).map_err(err)?;
            ensure(certs.len() == n * n, || format!("n={n}: {} certificates", certs.len()))?;
            // raw index of the k-th smallest eigenvalue
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let projections: Vec<ComplexMatrix> = order.iter().map(|&r| ComplexMatrix::unit(n, r, r)).collect();
            for c in &certs {
                let produced = c.expr.evaluate(&projections, std::slice::from_ref(&coupling)).map_err(err)?;
                let target = ComplexMatrix::unit(n, order[c.from], order[c.to]);
                let r = (&produced - &target).op_norm();
                ensure(r < 1e-9, || format!("n={n}: certificate {}->{} residual {r}", c.from, c.to))?;
                total += 1;
            }
        }
    }
    Ok(format!("{total} certificates re-evaluated from scratch"))
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let mut dims = Vec::new();
    for inst in 0..10 {
        let n = 2 + inst % 3;
        let gens: Vec<GaussMatrix> = (0..2)
            .map(|g| {
                let mut m = random_gauss_hermitian(&mut rng, n, 2, if inst % 2 == 0 { 0.0 } else { 0.6 });
                if inst % 4 == 3 && g == 1 {
                    // keep one generator diagonal
                    for (i, row) in m.iter_mut().enumerate() {
                        for (j, z) in row.iter_mut().enumerate() {
                            if i != j {
                                *z = (0, 0);
                            }
                        }
                    }
                }
                if inst % 5 == 4 {
                    // reducible: cut the coupling between index 0 and the rest
                    for j in 1..n {
                        m[0][j] = (0, 0);
                        m[j][0] = (0, 0);
                    }
                }
                m
            })
            .collect();
        let (oracle, _) = word_closure_dim(&gens, 6);
        let mats: Vec<ComplexMatrix> = gens.iter().map(|g| i_times(&gauss_to_matrix(g))).collect();
        let basis = lie_closure(&mats, DEFAULT_RANK_TOL, DEFAULT_MAX_PASSES).map_err(err)?;
        ensure(basis.dim() == oracle, || format!("instance {inst} (n={n}): closure {} vs oracle {oracle}", basis.dim()))?;
        dims.push(oracle);
    }
    Ok(format!("closure matches exact word enumeration, dims {dims:?}"))
}

fn criterion_9() -> Outcome {
    let mut rng = rng(9);
    let mut checked = 0;
    for inst in 0..12 {
        let n = 2 + inst % 4;
        let mut gens: Vec<ComplexMatrix> = (0..2).map(|_| gaussian_hermitian(&mut rng, n)).collect();
        if inst % 3 == 1 {
            // reducible: block diagonal
            for g in gens.iter_mut() {
                for j in 1..n {
                    g.set(0, j, Complex64::new(0.0, 0.0));
                    g.set(j, 0, Complex64::new(0.0, 0.0));
                }
            }
        } else if inst % 3 == 2 {
            // commuting pair
            let u = random_unitary(&mut rng, n);
            let d1: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let d2: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            gens = vec![
                &(&u * &ComplexMatrix::diagonal(&d1)) * &u.adjoint(),
                &(&u * &ComplexMatrix::diagonal(&d2)) * &u.adjoint(),
            ];
        }
        let base: Vec<ComplexMatrix> = gens.iter().map(i_times).collect();
        let d = lie_closure(&base, DEFAULT_RANK_TOL, DEFAULT_MAX_PASSES).map_err(err)?.dim();
        let blocks = block_decompose(&gens, 9).map_err(err)?.block_dims();
        let u = random_unitary(&mut rng, n);
        let conj: Vec<ComplexMatrix> = gens.iter().map(|g| &(&u * g) * &u.adjoint()).collect();
        let scaled: Vec<ComplexMatrix> = base
            .iter()
            .map(|g| {
                let s: f64 = rng.random_range(0.1..10.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                g.scale_real(s)
            })
            .collect();
        let d_conj = lie_closure(&conj.iter().map(i_times).collect::<Vec<_>>(), DEFAULT_RANK_TOL, DEFAULT_MAX_PASSES)
            .map_err(err)?
            .dim();
        let d_scaled = lie_closure(&scaled, DEFAULT_RANK_TOL, DEFAULT_MAX_PASSES).map_err(err)?.dim();
        ensure(d == d_conj && d == d_scaled, || format!("instance {inst}: {d} / {d_conj} / {d_scaled}"))?;
        let mut b_conj = block_decompose(&conj, 9).map_err(err)?.block_dims();
        let mut b = blocks.clone();
        b.sort_unstable();
        b_conj.sort_unstable();
        ensure(b == b_conj, || format!("instance {inst}: blocks {b:?} vs {b_conj:?}"))?;
        let again = block_decompose(&gens, 9).map_err(err)?.block_dims();
        ensure(again == blocks, || format!("instance {inst}: same seed gave {again:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} instances invariant under conjugation and rescaling"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("independent-spectrum models are fully controllable", criterion_1),
        ("dependent spectra and split graphs are rejected", criterion_2),
        ("Kronecker certificates", criterion_3),
        ("recurrence times", criterion_4),
        ("product-formula convergence", criterion_5),
        ("Jaynes-Cummings blocks", criterion_6),
        ("bracket certificates re-evaluate", criterion_7),
        ("closure vs exact word enumeration", criterion_8),
        ("invariance under conjugation and rescaling", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
