//! Scratch performance/accuracy probe (not part of the deliverable tests).

use std::time::Instant;

use translator_core::grid::make_rectangle_domain;
use translator_core::limits::{measure_tilt, run_sweep, SweepGrid, WindowSpec};
use translator_core::solver::{solve, SolverConfig};

fn main() {
    env_logger::init();
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("c1");
    match which {
        "c1" => {
            // criterion 1 scale: b=pi/4, L in {2,4,8,16}, dx=0.03125, ny=65
            let b = std::f64::consts::FRAC_PI_4;
            let t0 = Instant::now();
            for (l, nx) in [(2.0, 129), (4.0, 257), (8.0, 513), (16.0, 1025)] {
                let t = Instant::now();
                let d = make_rectangle_domain(l, b, nx, 65).unwrap();
                let sol = solve(&d, &SolverConfig::default()).unwrap();
                println!(
                    "L={l:5} nx={nx:5} converged={} iters={:3} center={:.8} res={:.2e} [{:?}]",
                    sol.converged,
                    sol.iterations,
                    sol.center_height,
                    sol.residual_norm,
                    t.elapsed()
                );
            }
            println!("limit -log cos(pi/4) = {:.8}", 0.5 * 2.0f64.ln());
            println!("total {:?}", t0.elapsed());
        }
        "c2" => {
            // criterion 2 scale: b=pi, L in {16,32,64}, dx=0.125, ny=65
            let b = std::f64::consts::PI;
            let t0 = Instant::now();
            let cfg = SolverConfig {
                continuation_steps: 12,
                ..SolverConfig::default()
            };
            let sweep = run_sweep(
                b,
                &[16.0, 32.0, 64.0],
                &WindowSpec::default(),
                &SweepGrid { nx0: 257, ny: 65 },
                &cfg,
            )
            .unwrap();
            println!("centers: {:?}", sweep.center_heights);
            println!("gaps: {:?}", sweep.cauchy_gaps());
            let tilt = measure_tilt(sweep.renormalized.last().unwrap());
            println!(
                "tilt = {:.6} (target {:.6}, rel err {:.3}%) reliable={} res={:.2e}",
                tilt.slope,
                3.0f64.sqrt(),
                100.0 * (tilt.slope - 3.0f64.sqrt()).abs() / 3.0f64.sqrt(),
                tilt.reliable,
                tilt.fit_residual
            );
            println!("total {:?}", t0.elapsed());
        }
        "half" => {
            // b = pi/2 renormalized limit vs log cos y
            let b = std::f64::consts::FRAC_PI_2;
            let t0 = Instant::now();
            let ny: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(129);
            let nx0: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(129);
            let sweep = run_sweep(
                b,
                &[2.0, 4.0, 8.0, 16.0],
                &WindowSpec::default(),
                &SweepGrid { nx0, ny },
                &SolverConfig::default(),
            )
            .unwrap();
            println!("centers: {:?}", sweep.center_heights);
            let window = sweep.window.clone();
            let last = sweep.renormalized.last().unwrap();
            let mut sup = 0.0f64;
            for j in 0..window.ny {
                for i in 0..window.nx {
                    let target = window.node_y(j).cos().ln();
                    let v = last.value(i, j);
                    if v.is_finite() {
                        sup = sup.max((v - target).abs());
                    }
                }
            }
            println!("sup |renorm - log cos y| on window = {sup:.4}");
            println!("total {:?}", t0.elapsed());
        }
        _ => eprintln!("unknown probe {which}"),
    }
}
