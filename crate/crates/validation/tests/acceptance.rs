//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use quench_cli::figures::{write_figure, Figure, COLLAPSE_SIZES, FIG1_TARGETS, FIG3_SIZES};
use quench_cli::verify::{reference_curves, verify_reference, VERIFY_TOLERANCE};
use quench_core::analysis::{extract_periods, fit_scaling, revival_period};
use quench_core::bose_hubbard::BoseHubbardSpec;
use quench_core::chain::quench_modes;
use quench_core::entanglement::{reduce, xi_spectrum};
use quench_core::ermakov::{integrate_general, solve_sudden, QuenchProtocol};
use quench_core::gaussian::{assemble_state, to_covariance};
use quench_core::oracles::{kernel_spectrum, CovarianceOracle, KernelGrid};
use quench_core::{
    entropy_series, Boundary, ChainProtocol, ChainSpec, EntropySeries, Partition, TimeGrid,
};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Set in child processes spawned by the determinism check.
const FIG2_OUTDIR: &str = "QUENCH_ACCEPTANCE_FIG2_OUTDIR";

fn series(
    spec: &ChainSpec,
    partition: &Partition,
    grid: &TimeGrid,
    alphas: &[u32],
) -> EntropySeries {
    entropy_series(spec, &ChainProtocol::Sudden, partition, grid, alphas).expect("entropy series")
}

fn pair(omega_bh_f: f64) -> ChainSpec {
    BoseHubbardSpec {
        omega_bh_i: 3.0,
        omega_bh_f,
        hopping: 2.0,
    }
    .to_chain_spec()
    .expect("valid pair")
}

fn ring(n: usize, omega_f: f64) -> ChainSpec {
    ChainSpec::new(n, (3.0, 2.0), (omega_f, 2.5), Boundary::Periodic).expect("valid ring")
}

fn figure_specs() -> Vec<(String, ChainSpec)> {
    [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4]
        .into_iter()
        .flat_map(Figure::curves)
        .map(|c| {
            (
                c.name.clone(),
                c.config.job().expect("valid figure config").spec,
            )
        })
        .collect()
}

/// Long, finely sampled series for spectral period estimates.
fn long_s1(spec: &ChainSpec) -> EntropySeries {
    let grid = TimeGrid::new(1000.0, 0.01).unwrap();
    series(spec, &Partition::second_half(spec.n).unwrap(), &grid, &[1])
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() < rel * target
}

fn oracle_equivalence() -> Outcome {
    let devs = verify_reference().map_err(|e| e.to_string())?;
    let worst = devs.iter().map(|d| d.worst()).fold(0.0, f64::max);
    let failed: Vec<_> = devs
        .iter()
        .filter(|d| !d.passes())
        .map(|d| d.label.as_str())
        .collect();
    let msg = format!(
        "{} configurations, worst max|dS| = {worst:.2e} (bound {VERIFY_TOLERANCE:.0e})",
        devs.len()
    );
    if failed.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; failing: {failed:?}"))
    }
}

fn static_anchor() -> Outcome {
    let grid = TimeGrid::new(0.01, 0.01).unwrap();
    let p = Partition::second_half(2).unwrap();
    let values: Vec<f64> = FIG1_TARGETS
        .iter()
        .map(|&w| series(&pair(w), &p, &grid, &[1]).s1().unwrap()[0])
        .collect();
    let oracle = CovarianceOracle::new(&pair(2.15))
        .and_then(|o| o.entropies(&p, 0.0, &[1]))
        .map_err(|e| e.to_string())?[0];
    let msg = format!("S_1(0) = {values:?}, oracle {oracle:.10}");
    let identical = values.iter().all(|v| v.to_bits() == values[0].to_bits());
    if identical && (values[0] - 0.48653).abs() < 1e-4 && (oracle - 0.48653).abs() < 1e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn pair_periods() -> Outcome {
    let a = extract_periods(&long_s1(&pair(2.15)), 2).map_err(|e| e.to_string())?;
    let b = extract_periods(&long_s1(&pair(2.06)), 2).map_err(|e| e.to_string())?;
    let (slow, fast, slower) = (PI / 0.15, PI / 4.15, PI / 0.06);
    let has = |ps: &[f64], t| ps.iter().any(|&p| within(p, t, 0.02));
    let msg = format!(
        "2.15 -> {:?} (want {slow:.3}, {fast:.4}); 2.06 -> {:?} (want {slower:.3})",
        a.periods, b.periods
    );
    let grows = b.longest().unwrap_or(0.0) > a.longest().unwrap_or(f64::INFINITY);
    if has(&a.periods, slow) && has(&a.periods, fast) && has(&b.periods, slower) && grows {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn revival_scaling() -> Outcome {
    let mut msgs = Vec::new();
    let mut ok = true;
    let mut last = 0.0;
    for wf in [0.3, 0.1] {
        let s = long_s1(&ring(4, wf));
        let rev = revival_period(&s).map_err(|e| e.to_string())?;
        let clusters = extract_periods(&s, 3)
            .map_err(|e| e.to_string())?
            .clusters();
        ok &= within(rev, PI / wf, 0.02) && rev > last && clusters == 3;
        last = rev;
        msgs.push(format!(
            "omega_f={wf}: revival {rev:.3} (want {:.3}), {clusters} clusters",
            PI / wf
        ));
    }
    let msg = msgs.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ermakov_integrity() -> Outcome {
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (_, spec) in figure_specs() {
        let qm = quench_modes(&spec).map_err(|e| e.to_string())?;
        for (&li, &lf) in qm.pre.lambda().iter().zip(&qm.post) {
            if !pairs.iter().any(|&(a, b)| a == li && b == lf) {
                pairs.push((li, lf));
            }
        }
    }
    let grid = TimeGrid::new(200.0, 0.01).unwrap();
    let stats: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(li, lf)| {
            let exact = solve_sudden(li, lf).expect("closed form");
            let num = integrate_general(
                &QuenchProtocol::Sudden {
                    initial: li,
                    final_value: lf,
                },
                &grid,
                1e-9,
            )
            .expect("integrator");
            let (mut res, mut inv, mut diff) = (0.0_f64, 0.0_f64, 0.0_f64);
            for k in 0..grid.len() {
                let t = grid.time(k);
                res = res.max(exact.residual(t).unwrap_or(f64::INFINITY));
                inv = inv.max((exact.invariant(t) - (li + lf)).abs());
                let (a, da) = exact.eval(t);
                let (b, db) = num.eval(t);
                diff = diff.max((a - b).abs()).max((da - db).abs());
            }
            (res, inv, diff)
        })
        .collect();
    let res = stats.iter().map(|s| s.0).fold(0.0, f64::max);
    let inv = stats.iter().map(|s| s.1).fold(0.0, f64::max);
    let diff = stats.iter().map(|s| s.2).fold(0.0, f64::max);
    let msg = format!(
        "{} distinct modes: residual {res:.2e}, invariant drift {inv:.2e}, integrator gap {diff:.2e}",
        pairs.len()
    );
    if res < 1e-9 && inv < 1e-9 && diff < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn kernel_spectrum_check() -> Outcome {
    let spec = pair(2.15);
    let qm = quench_modes(&spec).map_err(|e| e.to_string())?;
    let sols: Vec<_> = qm
        .pre
        .lambda()
        .iter()
        .zip(&qm.post)
        .map(|(&a, &b)| solve_sudden(a, b))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let p = Partition::second_half(2).unwrap();
    let mut worst = 0.0_f64;
    for t in [0.0, 2.0, 7.5] {
        let state = assemble_state(&qm.pre, &sols, t).map_err(|e| e.to_string())?;
        let rs = reduce(&state, &p).map_err(|e| e.to_string())?;
        let xi = xi_spectrum(&rs).map_err(|e| e.to_string())?.xi[0];
        let (g, b, z) = (rs.gamma[(0, 0)], rs.beta[(0, 0)], rs.z[(0, 0)]);
        let grid = KernelGrid::default_for(g, b).map_err(|e| e.to_string())?;
        for phase in [true, false] {
            let levels = kernel_spectrum(g, b, z, &grid, 5, phase).map_err(|e| e.to_string())?;
            for (n, l) in levels.iter().enumerate() {
                worst = worst.max((l - (1.0 - xi) * xi.powi(n as i32)).abs());
            }
        }
    }
    let msg = format!("t in {{0, 2, 7.5}}, n = 0..4, with/without phase: worst gap {worst:.2e}");
    if worst < 1e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn purity_and_symmetry() -> Outcome {
    let grid = TimeGrid::with_points(100.0, 1000).unwrap();
    let mut specs: Vec<(ChainSpec, Partition)> = reference_curves()
        .iter()
        .map(|c| {
            let job = c.config.job().unwrap();
            (job.spec, job.partition)
        })
        .collect();
    specs.push((ring(6, 0.1), Partition::from_one_based(6, &[1]).unwrap()));
    specs.push((
        ChainSpec::new(5, (1.5, 1.0), (0.4, 3.0), Boundary::Open).unwrap(),
        Partition::from_one_based(5, &[2, 5]).unwrap(),
    ));
    let mut purity = 0.0_f64;
    let mut sym = 0.0_f64;
    for (spec, part) in &specs {
        let qm = quench_modes(spec).map_err(|e| e.to_string())?;
        let sols: Vec<_> = qm
            .pre
            .lambda()
            .iter()
            .zip(&qm.post)
            .map(|(&a, &b)| solve_sudden(a, b).unwrap())
            .collect();
        let worst = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let state = assemble_state(&qm.pre, &sols, grid.time(k)).unwrap();
                let nu = to_covariance(&state)
                    .unwrap()
                    .symplectic_eigenvalues()
                    .unwrap();
                nu.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        purity = purity.max(worst);
        let a = series(spec, part, &grid, &[1, 2]);
        let b = series(spec, &part.complement(), &grid, &[1, 2]);
        for alpha in [1, 2] {
            let d = a
                .get(alpha)
                .unwrap()
                .iter()
                .zip(b.get(alpha).unwrap())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            sym = sym.max(d);
        }
    }
    let msg = format!(
        "{} configurations x 1000 times: max|nu - 1/2| = {purity:.2e}, complement gap {sym:.2e}",
        specs.len()
    );
    if purity < 1e-9 && sym < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scaling_collapse() -> Outcome {
    let grid = TimeGrid::new(100.0, 0.01).unwrap();
    let all: Vec<(usize, EntropySeries)> = FIG3_SIZES
        .par_iter()
        .map(|&n| {
            (
                n,
                series(
                    &ring(n, 0.01),
                    &Partition::second_half(n).unwrap(),
                    &grid,
                    &[1],
                ),
            )
        })
        .collect();
    let spread_over = |sizes: &[usize]| -> Result<f64, String> {
        let picked: Vec<&EntropySeries> = all
            .iter()
            .filter(|(n, _)| sizes.contains(n))
            .map(|(_, s)| s)
            .collect();
        let fit = fit_scaling(sizes, &picked).map_err(|e| e.to_string())?;
        Ok(fit
            .times
            .iter()
            .zip(&fit.relative_spread)
            .filter(|(t, _)| **t >= 5.0 - 1e-9)
            .map(|(_, s)| *s)
            .fold(0.0, f64::max))
    };
    let large = spread_over(&COLLAPSE_SIZES)?;
    let with_small: Vec<usize> = std::iter::once(4).chain(COLLAPSE_SIZES).collect();
    let wider = spread_over(&with_small)?;
    let msg = format!(
        "max relative spread of S_1/ln N on [5, 100]: N in {COLLAPSE_SIZES:?} -> {:.1}% (bound 10%), with N=4 -> {:.1}%",
        100.0 * large,
        100.0 * wider
    );
    if large < 0.1 && wider > 0.1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn trivial_limits() -> Outcome {
    let grid = TimeGrid::new(100.0, 0.01).unwrap();
    let mut drift = 0.0_f64;
    for (_, spec) in figure_specs() {
        let s = series(
            &spec.without_quench(),
            &Partition::second_half(spec.n).unwrap(),
            &grid,
            &[1, 2],
        );
        for alpha in [1, 2] {
            let v = s.get(alpha).unwrap();
            drift = drift.max(v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max));
        }
    }
    let mut zero = 0.0_f64;
    let uncoupled = [
        ChainSpec::new(6, (3.0, 0.0), (0.01, 0.0), Boundary::Periodic).unwrap(),
        ChainSpec::new(5, (1.0, 0.0), (2.0, 0.0), Boundary::Open).unwrap(),
        BoseHubbardSpec {
            omega_bh_i: 3.0,
            omega_bh_f: 0.5,
            hopping: 0.0,
        }
        .to_chain_spec()
        .unwrap(),
    ];
    for spec in &uncoupled {
        let s = series(
            spec,
            &Partition::second_half(spec.n).unwrap(),
            &grid,
            &[1, 2],
        );
        for alpha in [1, 2] {
            zero = zero.max(
                s.get(alpha)
                    .unwrap()
                    .iter()
                    .map(|x| x.abs())
                    .fold(0.0, f64::max),
            );
        }
    }
    let msg = format!("no-quench drift {drift:.2e}, uncoupled max|S| {zero:.2e}");
    if drift < 1e-12 && zero < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Outcome {
    let run = |dir: &std::path::Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let exe = std::env::current_exe().map_err(|e| e.to_string())?;
        let status = Command::new(exe)
            .env(FIG2_OUTDIR, dir)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("figure fig2 exited with {status}"));
        }
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| e.to_string())?
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        Ok(files)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(a.path())?;
    let second = run(b.path())?;
    let csvs = first.iter().filter(|(n, _)| n.ends_with(".csv")).count();
    let msg = format!(
        "{} files ({csvs} CSVs) from two fresh `figure fig2` processes",
        first.len()
    );
    if first == second && csvs == 3 {
        Ok(format!("{msg} are byte-identical"))
    } else {
        Err(format!("{msg} differ"))
    }
}

fn main() -> ExitCode {
    if let Some(dir) = std::env::var_os(FIG2_OUTDIR) {
        // child of the determinism check: behave like `quench figure fig2`
        return match write_figure(Figure::Fig2, std::path::Path::new(&dir), None, None) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        };
    }
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("static anchor", static_anchor),
        ("pair oscillation periods", pair_periods),
        ("revival scaling", revival_scaling),
        ("Ermakov integrity", ermakov_integrity),
        ("kernel spectrum", kernel_spectrum_check),
        ("purity and symmetry", purity_and_symmetry),
        ("scaling collapse", scaling_collapse),
        ("trivial limits", trivial_limits),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let what = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {what}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
