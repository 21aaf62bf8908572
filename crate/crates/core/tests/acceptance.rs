//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any fails. Timing criteria run sequentially in
//! this process so nothing else competes for the cores.

use std::process::ExitCode;
use std::time::Instant;

use ecc_core::bench::time_median;
use ecc_core::io::{decode_grid, encode_grid};
use ecc_core::{
    compute_coefficients, compute_ecc, count_cells, generate_grid, oracle_ecc,
    reparametrize_direction, soft_ecc, soft_ecc_backward, uniform_thresholds, AccumulationStrategy,
    BinaryMask, Dims, EccError, ScalarGrid, SoftEccParams, SyntheticKind,
    SyntheticSpec, ThresholdSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn random_int_grid(rng: &mut ChaCha8Rng, dims: &[usize]) -> ScalarGrid {
    let n: usize = dims.iter().product();
    let values = (0..n).map(|_| f64::from(rng.random_range(0..=9))).collect();
    ScalarGrid::new(dims, values).unwrap()
}

fn random_small_grids(seed: u64) -> Vec<ScalarGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grids = Vec::with_capacity(200);
    for _ in 0..100 {
        let dims = [rng.random_range(1..=32), rng.random_range(1..=32)];
        grids.push(random_int_grid(&mut rng, &dims));
    }
    for _ in 0..100 {
        let dims = [
            rng.random_range(1..=8),
            rng.random_range(1..=8),
            rng.random_range(1..=8),
        ];
        grids.push(random_int_grid(&mut rng, &dims));
    }
    grids
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let grids = random_small_grids(0xACCE_0001);
    let strategies = [
        AccumulationStrategy::FullSweep,
        AccumulationStrategy::Chunked { chunk_len: 1 },
        AccumulationStrategy::Chunked { chunk_len: 7 },
        AccumulationStrategy::Chunked { chunk_len: 64 },
    ];
    let mut thresholds = 0;
    for (g, grid) in grids.iter().enumerate() {
        let taus = ThresholdSet::new(grid.distinct_values()).unwrap();
        thresholds += taus.len();
        let expected = oracle_ecc(grid, &taus);
        let row = AccumulationStrategy::Chunked {
            chunk_len: grid.dims().as_slice()[grid.ndim() - 1],
        };
        for strategy in strategies.iter().copied().chain([row]) {
            let got = compute_ecc(grid, &taus, strategy, 2).unwrap();
            ensure(got == expected, || {
                format!(
                    "grid {g} ({}) {strategy}: {:?} vs oracle {:?}",
                    grid.dims(),
                    got.values(),
                    expected.values()
                )
            })?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s, budget 60s"))?;
    Ok(format!("200 grids, {thresholds} thresholds, 5 strategies, {secs:.2}s"))
}

fn neighbourhood_contains(dims: &Dims, p: usize, q: usize) -> bool {
    let (a, b) = (dims.unflatten(p), dims.unflatten(q));
    a.coords.iter().zip(&b.coords).all(|(&x, &y)| x.abs_diff(y) <= 1)
}

fn coefficient_identity() -> Outcome {
    let mut grids = random_small_grids(0xACCE_0002);
    for (i, kind) in [
        SyntheticKind::UniformRandom,
        SyntheticKind::DEFAULT_BLOBS,
        SyntheticKind::RadialGradient,
    ]
    .into_iter()
    .enumerate()
    {
        for dims in [vec![64, 48], vec![12, 10, 9]] {
            grids.push(generate_grid(&SyntheticSpec::new(kind, &dims, i as u64)).unwrap());
        }
    }
    for (g, grid) in grids.iter().enumerate() {
        let total = compute_coefficients(grid).total();
        ensure(total == 1, || format!("grid {g} ({}) sums to {total}", grid.dims()))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let mut perturbations = 0;
    for g in 0..50 {
        let dims: Vec<usize> = if g % 2 == 0 {
            vec![rng.random_range(3..=16), rng.random_range(3..=16)]
        } else {
            vec![rng.random_range(3..=7), rng.random_range(3..=7), rng.random_range(3..=7)]
        };
        let grid = random_int_grid(&mut rng, &dims);
        let base = compute_coefficients(&grid);
        for _ in 0..10 {
            let q = rng.random_range(0..grid.len());
            let mut values = grid.values().to_vec();
            values[q] = f64::from(rng.random_range(-5..=15));
            let moved = compute_coefficients(&ScalarGrid::new(&dims, values).unwrap());
            perturbations += 1;
            for p in 0..grid.len() {
                if moved.coeffs()[p] != base.coeffs()[p] {
                    ensure(neighbourhood_contains(grid.dims(), p, q), || {
                        format!("grid {g}: changing pixel {q} changed distant pixel {p}")
                    })?;
                }
            }
            ensure(moved.total() == 1, || format!("grid {g}: perturbed sum {}", moved.total()))?;
        }
    }
    Ok(format!(
        "{} grids sum to 1; {perturbations} single-pixel perturbations stay local",
        grids.len()
    ))
}

fn canonical_fixtures() -> Outcome {
    let mask = |dims: &[usize], bits: Vec<bool>| BinaryMask::new(&Dims::new(dims).unwrap(), bits);
    let ring: Vec<bool> = (0..9).map(|i| i != 4).collect();
    let shell: Vec<bool> = (0..27).map(|i| i != 13).collect();
    let chi = |m: &BinaryMask| count_cells(m).euler_characteristic();

    let ring_chi = chi(&mask(&[3, 3], ring));
    let square_chi = chi(&mask(&[2, 2], vec![true; 4]));
    let shell_chi = chi(&mask(&[3, 3, 3], shell));
    let solid = count_cells(&mask(&[3, 3, 3], vec![true; 27]));
    ensure(ring_chi == 0, || format!("ring chi {ring_chi}"))?;
    ensure(square_chi == 1, || format!("square chi {square_chi}"))?;
    ensure(shell_chi == 2, || format!("shell chi {shell_chi}"))?;
    ensure(
        (solid.vertices, solid.edges, solid.faces, solid.cubes) == (27, 54, 36, 8)
            && solid.euler_characteristic() == 1,
        || format!("solid cube counts {solid:?}"),
    )?;

    // Same fixtures through the histogram path.
    let peak = |dims: &[usize]| {
        let n: usize = dims.iter().product();
        let mut v = vec![0.0; n];
        v[n / 2] = 1.0;
        ScalarGrid::new(dims, v).unwrap()
    };
    let taus = ThresholdSet::new(vec![0.0, 1.0]).unwrap();
    for strategy in [AccumulationStrategy::FullSweep, AccumulationStrategy::Chunked { chunk_len: 4 }] {
        let square = compute_ecc(&peak(&[3, 3]), &taus, strategy, 1).unwrap();
        let cube = compute_ecc(&peak(&[3, 3, 3]), &taus, strategy, 1).unwrap();
        ensure(square.values() == [0, 1], || format!("{strategy} square {:?}", square.values()))?;
        ensure(cube.values() == [2, 1], || format!("{strategy} cube {:?}", cube.values()))?;
    }
    let flat2 = compute_ecc(&ScalarGrid::new(&[2, 2], vec![0.0; 4]).unwrap(), &taus, AccumulationStrategy::FullSweep, 1)
        .unwrap();
    ensure(flat2.values() == [1, 1], || format!("solid square curve {:?}", flat2.values()))?;
    Ok("ring 0, square 1, shell 2, cube 1 (27-54+36-8)".into())
}

// Finite-difference oracle for the soft curve. Written against the formula
// directly, sharing nothing with the library's forward pass.
struct SmoothModel<'a> {
    dims: &'a [usize],
    coeffs: &'a [i32],
    lambda: f64,
    alpha: f64,
    upstream: &'a [f64],
}

impl SmoothModel<'_> {
    fn position(&self, linear: usize) -> Vec<f64> {
        let mut rest = linear;
        let mut out = vec![0.0; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            let d = self.dims[axis];
            let k = rest % d;
            rest /= d;
            out[axis] = if d == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (d - 1) as f64 };
        }
        out
    }

    fn loss(&self, values: &[f64], taus: &[f64], u: &[f64]) -> f64 {
        let mut total = 0.0;
        for (j, &tau) in taus.iter().enumerate() {
            let mut chi = 0.0;
            for (p, &x) in values.iter().enumerate() {
                if self.coeffs[p] == 0 {
                    continue;
                }
                let proj: f64 = self.position(p).iter().zip(u).map(|(a, b)| a * b).sum();
                let z = tau - x - self.alpha * proj;
                chi += f64::from(self.coeffs[p]) / (1.0 + (-self.lambda * z).exp());
            }
            total += self.upstream[j] * chi;
        }
        total
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Relative error with unit floor: gradients below 1 in magnitude are held
/// to an absolute error of the same tolerance.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn gradient_checks() -> Outcome {
    const STEP: f64 = 1e-4;
    const TOL: f64 = 1e-4;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let (mut worst_x, mut worst_tau, mut worst_u, mut worst_tangency) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut checks = 0;
    for g in 0..20 {
        let values: Vec<f64> = (0..256).map(|_| rng.random::<f64>()).collect();
        let grid = ScalarGrid::new(&[16, 16], values).unwrap();
        let raw_u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let u = reparametrize_direction(&raw_u).unwrap();
        for lambda in [1.0, 10.0, 50.0] {
            for alpha in [0.0, 0.3] {
                let seed_params =
                    SoftEccParams::new(lambda, alpha, u.clone(), ThresholdSet::new(vec![0.0]).unwrap()).unwrap();
                let field = ecc_core::soft::effective_field(&grid, &seed_params).unwrap();
                let params = seed_params.with_taus(uniform_thresholds(&field, 8).unwrap());
                let coeffs = compute_coefficients(&field);
                let taus = params.taus().as_slice().to_vec();
                let upstream: Vec<f64> = (0..taus.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let analytic = soft_ecc_backward(&grid, &coeffs, &params, &upstream, 1).unwrap();

                let model = SmoothModel {
                    dims: &[16, 16],
                    coeffs: coeffs.coeffs(),
                    lambda,
                    alpha,
                    upstream: &upstream,
                };
                let central = |plus: f64, minus: f64| (plus - minus) / (2.0 * STEP);

                let mut vals = grid.values().to_vec();
                for p in 0..vals.len() {
                    let orig = vals[p];
                    vals[p] = orig + STEP;
                    let plus = model.loss(&vals, &taus, &u);
                    vals[p] = orig - STEP;
                    let minus = model.loss(&vals, &taus, &u);
                    vals[p] = orig;
                    worst_x = worst_x.max(rel_err(analytic.d_values[p], central(plus, minus)));
                }
                let mut t = taus.clone();
                for j in 0..t.len() {
                    let orig = t[j];
                    t[j] = orig + STEP;
                    let plus = model.loss(grid.values(), &t, &u);
                    t[j] = orig - STEP;
                    let minus = model.loss(grid.values(), &t, &u);
                    t[j] = orig;
                    worst_tau = worst_tau.max(rel_err(analytic.d_tau[j], central(plus, minus)));
                }
                // Perturb through the normalization so the differences live on
                // the tangent space.
                for i in 0..u.len() {
                    let mut v = u.clone();
                    v[i] += STEP;
                    let plus = model.loss(grid.values(), &taus, &unit(&v));
                    v[i] = u[i] - STEP;
                    let minus = model.loss(grid.values(), &taus, &unit(&v));
                    worst_u = worst_u.max(rel_err(analytic.d_u[i], central(plus, minus)));
                }
                let tangency: f64 = analytic.d_u.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>().abs();
                worst_tangency = worst_tangency.max(tangency);
                checks += 1;
                ensure(alpha != 0.0 || analytic.d_u.iter().all(|&d| d == 0.0), || {
                    format!("grid {g}: alpha=0 but d_u={:?}", analytic.d_u)
                })?;
            }
        }
    }
    let summary = format!(
        "{checks} configs; max rel err X {worst_x:.2e}, tau {worst_tau:.2e}, u {worst_u:.2e}; |<d_u,u>| {worst_tangency:.1e}; {:.1}s",
        start.elapsed().as_secs_f64()
    );
    ensure(worst_x <= TOL && worst_tau <= TOL && worst_u <= TOL, || summary.clone())?;
    ensure(worst_tangency <= 1e-8, || summary.clone())?;
    ensure(start.elapsed().as_secs_f64() < 120.0, || summary.clone())?;
    Ok(summary)
}

fn lambda_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    let mut worst = 0.0f64;
    let mut thresholds = 0;
    for g in 0..20 {
        // Values on a 0.05 lattice, so every gap between distinct values is >= 0.05.
        let values: Vec<f64> = (0..256).map(|_| f64::from(rng.random_range(0..20)) * 0.05).collect();
        let grid = ScalarGrid::new(&[16, 16], values).unwrap();
        let distinct = grid.distinct_values();
        let mids: Vec<f64> = distinct
            .windows(2)
            .filter(|w| w[1] - w[0] >= 0.01)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect();
        let taus = ThresholdSet::new(mids).unwrap();
        thresholds += taus.len();
        let coeffs = compute_coefficients(&grid);
        let params = SoftEccParams::untilted(1e4, 2, taus.clone()).unwrap();
        let soft = soft_ecc(&grid, &coeffs, &params, 1).unwrap();
        let hard = compute_ecc(&grid, &taus, AccumulationStrategy::FullSweep, 1).unwrap();
        for (j, (s, h)) in soft.values().iter().zip(hard.values()).enumerate() {
            let diff = (s - *h as f64).abs();
            worst = worst.max(diff);
            ensure(diff <= 1e-6, || format!("grid {g} tau {j}: soft {s} hard {h}"))?;
        }
    }
    Ok(format!("{thresholds} thresholds, max |soft - hard| = {worst:.1e}"))
}

fn determinism() -> Outcome {
    let grids = [
        generate_grid(&SyntheticSpec::new(SyntheticKind::UniformRandom, &[96, 80], 6)).unwrap(),
        generate_grid(&SyntheticSpec::new(SyntheticKind::DEFAULT_BLOBS, &[20, 18, 16], 7)).unwrap(),
    ];
    let mut soft_spread = 0.0f64;
    for grid in &grids {
        let taus = uniform_thresholds(grid, 64).unwrap();
        let reference = compute_ecc(grid, &taus, AccumulationStrategy::FullSweep, 1).unwrap();
        for workers in [1, 2, 8] {
            for strategy in [
                AccumulationStrategy::FullSweep,
                AccumulationStrategy::Chunked { chunk_len: 4096 },
                AccumulationStrategy::Chunked { chunk_len: 33 },
            ] {
                let got = compute_ecc(grid, &taus, strategy, workers).unwrap();
                ensure(got == reference, || format!("{} {strategy} x{workers} differs", grid.dims()))?;
            }
        }

        let u = reparametrize_direction(&vec![1.0; grid.ndim()]).unwrap();
        let params = SoftEccParams::new(20.0, 0.3, u, ThresholdSet::new(vec![0.0]).unwrap()).unwrap();
        let field = ecc_core::soft::effective_field(grid, &params).unwrap();
        let params = params.with_taus(uniform_thresholds(&field, 32).unwrap());
        let coeffs = compute_coefficients(&field);
        let upstream: Vec<f64> = (0..params.taus().len()).map(|j| (j as f64).sin()).collect();
        let base = soft_ecc(grid, &coeffs, &params, 1).unwrap();
        let base_grad = soft_ecc_backward(grid, &coeffs, &params, &upstream, 1).unwrap();
        for workers in [1, 2, 8] {
            let a = soft_ecc(grid, &coeffs, &params, workers).unwrap();
            let b = soft_ecc(grid, &coeffs, &params, workers).unwrap();
            let bits = |c: &ecc_core::SoftCurve| c.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            ensure(bits(&a) == bits(&b), || format!("soft x{workers} not bit-reproducible"))?;
            let ga = soft_ecc_backward(grid, &coeffs, &params, &upstream, workers).unwrap();
            let gb = soft_ecc_backward(grid, &coeffs, &params, &upstream, workers).unwrap();
            ensure(ga == gb, || format!("backward x{workers} not reproducible"))?;
            for (x, y) in a.values().iter().zip(base.values()) {
                soft_spread = soft_spread.max((x - y).abs());
            }
            for (x, y) in ga
                .d_tau
                .iter()
                .chain(&ga.d_u)
                .chain(&ga.d_values)
                .zip(base_grad.d_tau.iter().chain(&base_grad.d_u).chain(&base_grad.d_values))
            {
                soft_spread = soft_spread.max((x - y).abs());
            }
        }
    }
    ensure(soft_spread <= 1e-10, || format!("soft spread across worker counts {soft_spread:.1e}"))?;
    Ok(format!(
        "hard identical over workers {{1,2,8}} x 3 strategies; soft bit-identical per worker count, spread {soft_spread:.1e}"
    ))
}

fn performance() -> Outcome {
    const BINS: usize = 256;
    let w = workers();
    let mut notes = Vec::new();

    for side in [512usize, 1024] {
        let grid = generate_grid(&SyntheticSpec::new(SyntheticKind::UniformRandom, &[side, side], 42)).unwrap();
        let taus = uniform_thresholds(&grid, BINS).unwrap();
        let (sweep, a) = time_median(5, || compute_ecc(&grid, &taus, AccumulationStrategy::FullSweep, w)).unwrap();
        let (chunk, b) = time_median(5, || {
            compute_ecc(&grid, &taus, AccumulationStrategy::Chunked { chunk_len: 4096 }, w)
        })
        .unwrap();
        ensure(a == b, || format!("{side}^2 strategies disagree"))?;
        notes.push(format!("{side}^2 fullsweep {sweep:.2}ms vs chunked:4096 {chunk:.2}ms ({:.2}x)", chunk / sweep));
        ensure(sweep < chunk, || notes.join("; "))?;
    }

    let grid = generate_grid(&SyntheticSpec::new(SyntheticKind::UniformRandom, &[1024, 1024], 43)).unwrap();
    let taus = uniform_thresholds(&grid, BINS).unwrap();
    let (sweep, fast) = time_median(5, || compute_ecc(&grid, &taus, AccumulationStrategy::FullSweep, w)).unwrap();
    let start = Instant::now();
    let slow = oracle_ecc(&grid, &taus);
    let oracle_ms = start.elapsed().as_secs_f64() * 1e3;
    ensure(fast == slow, || "1024^2 fullsweep disagrees with oracle".into())?;
    notes.push(format!("oracle {oracle_ms:.0}ms vs fullsweep {sweep:.2}ms ({:.0}x)", oracle_ms / sweep));
    ensure(oracle_ms >= 50.0 * sweep, || notes.join("; "))?;

    let mut timings = Vec::new();
    for side in [256usize, 4096] {
        let grid = generate_grid(&SyntheticSpec::new(SyntheticKind::UniformRandom, &[side, side], 44)).unwrap();
        let taus = uniform_thresholds(&grid, BINS).unwrap();
        let (ms, _) = time_median(5, || compute_ecc(&grid, &taus, AccumulationStrategy::FullSweep, w)).unwrap();
        timings.push(ms);
    }
    let pixel_ratio = (4096.0f64 / 256.0).powi(2);
    let time_ratio = timings[1] / timings[0];
    notes.push(format!(
        "256^2 -> 4096^2 time ratio {time_ratio:.0} (limit {:.0})",
        1.5 * pixel_ratio
    ));
    ensure(time_ratio <= 1.5 * pixel_ratio, || notes.join("; "))?;
    Ok(format!("workers={w}; {}", notes.join("; ")))
}

fn random_grid_file(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let ndim = rng.random_range(2..=3);
    let dims: Vec<usize> = (0..ndim).map(|_| rng.random_range(1..=12)).collect();
    let n: usize = dims.iter().product();
    let mut bytes = b"ECCG".to_vec();
    bytes.extend_from_slice(&[1, ndim as u8, 0, 0]);
    for &d in &dims {
        bytes.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for _ in 0..n {
        // Arbitrary finite bit patterns, including subnormals and -0.0.
        let v = loop {
            let v = f32::from_bits(rng.random::<u32>());
            if v.is_finite() {
                break v;
            }
        };
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

fn file_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0008);
    for i in 0..50 {
        let original = random_grid_file(&mut rng);
        let path = dir.path().join(format!("g{i}.eccg"));
        std::fs::write(&path, &original).map_err(|e| e.to_string())?;
        let grid = ecc_core::read_grid(&path).map_err(|e| format!("file {i}: {e}"))?;
        let out = dir.path().join(format!("g{i}.out.eccg"));
        ecc_core::write_grid(&grid, &out).map_err(|e| e.to_string())?;
        let written = std::fs::read(&out).map_err(|e| e.to_string())?;
        ensure(written == original, || format!("file {i} changed on round trip"))?;
        let again = ecc_core::read_grid(&out).map_err(|e| e.to_string())?;
        ensure(
            again.values().iter().map(|v| v.to_bits()).eq(grid.values().iter().map(|v| v.to_bits())),
            || format!("file {i} values changed"),
        )?;
    }

    let good = encode_grid(&ScalarGrid::new(&[3, 4], vec![0.5; 12]).unwrap()).unwrap();
    let mut rejected = 0;
    let mut corrupt = |edit: &dyn Fn(&mut Vec<u8>)| -> Result<(), String> {
        let mut bytes = good.clone();
        edit(&mut bytes);
        match decode_grid(&bytes) {
            Err(EccError::Format(_)) => {
                rejected += 1;
                Ok(())
            }
            other => Err(format!("malformed header accepted: {other:?}")),
        }
    };
    corrupt(&|b| b[0] = b'G')?;
    corrupt(&|b| b[3] = 0)?;
    corrupt(&|b| b[4] = 0)?;
    corrupt(&|b| b[5] = 1)?;
    corrupt(&|b| b[7] = 0xff)?;
    corrupt(&|b| b.truncate(10))?;
    match decode_grid(&good[..good.len() - 1]) {
        Err(EccError::Corruption { .. }) => {}
        other => return Err(format!("short payload not flagged as corruption: {other:?}")),
    }
    Ok(format!("50 random files bit-exact; {rejected} malformed headers rejected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 coefficient identity", coefficient_identity),
        ("3 canonical topology fixtures", canonical_fixtures),
        ("4 gradient checks", gradient_checks),
        ("5 lambda convergence", lambda_convergence),
        ("6 determinism", determinism),
        ("7 performance", performance),
        ("8 file-format round trip", file_round_trip),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
