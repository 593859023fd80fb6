use srlaser_core::params::SystemParams;
use srlaser_core::su4::{self, McOptions};
use srlaser_core::{estimators, langevin};
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "c2" => {
            let nt: usize = std::env::args().nth(2).unwrap().parse().unwrap();
            // N=4 rescaled fig1 family, su4-mc vs det.
            let p = SystemParams::resonant(4, 250.0_f64.sqrt(), 25.0, 19.0);
            let m = su4::det::suggest_cutoff(&p);
            let mut det = su4::DetSolver::new(&p, m).unwrap();
            det.set_ground();
            let dt_det = su4::det::suggest_dt(&p, m);
            let settled = det.evolve_to_steady(dt_det, 1e-10, 400.0);
            let (dp, dp2, dsz) = (det.photons(), det.photons2(), det.sz());
            println!(
                "c2 det: settled={settled} m={m} photons {dp:.8} g2 {:.8} sz {dsz:.8}",
                dp2 / (dp * dp)
            );
            let t0 = Instant::now();
            let mut opts = McOptions::new(nt, 3.0, 10.0, 7);
            opts.dt = None;
            let r = su4::run_mc(&p, &opts).unwrap();
            println!(
                "c2 mc({nt}): {:.1?}  photons {} g2 {} sz {} dt {:.2e} m_hi {}",
                t0.elapsed(), r.photons, r.g2, r.sz, r.dt, r.m_hi
            );
            println!(
                "pulls: photons {:.2} g2 {:.2} sz {:.2}",
                (r.photons.value - dp) / r.photons.se,
                (r.g2.value - dp2 / (dp * dp)) / r.g2.se,
                (r.sz.value - dsz) / r.sz.se
            );
        }
        "c3" => {
            // N=20 xi=0.2 at w_opt: kappa=12.5, Omega=sqrt(12.5).
            let xi: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
            let w: f64 = std::env::args().nth(3).unwrap().parse().unwrap();
            let kappa = 2.5 / xi;
            let p = SystemParams::resonant(20, kappa.sqrt(), kappa, w);
            let t0 = Instant::now();
            let mut opts = McOptions::new(200, 6.0, 12.0, 11);
            opts.dt = None;
            let r = su4::run_mc(&p, &opts).unwrap();
            println!(
                "c3 xi={xi} w={w} mc(200): {:.1?}  photons {} g2 {} sz {} pair {} dt {:.2e} m_hi {}",
                t0.elapsed(), r.photons, r.g2, r.sz, r.pair, r.dt, r.m_hi
            );
            let t1 = Instant::now();
            let dt = langevin::suggest_dt(&p);
            let arch = langevin::run(&p, 400, 6.0, 12.0, dt, 5).unwrap();
            let obs = estimators::observables(&arch).unwrap();
            println!(
                "c3 xi={xi} w={w} lg(400,dt={dt:.1e}): {:.1?}  photons {} g2 {} sz {} pair {}",
                t1.elapsed(), obs.photons, obs.g2, obs.sz, obs.pair
            );
        }
        "c9" => {
            let w: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
            let nt: usize = std::env::args().nth(3).unwrap().parse().unwrap();
            // xi=5 at N=20: kappa=0.5, Omega=sqrt(0.5).
            let p = SystemParams::resonant(20, 0.5_f64.sqrt(), 0.5, w);
            let t0 = Instant::now();
            let mut opts = McOptions::new(nt, 30.0, 20.0, 13);
            opts.dt = None;
            let r = su4::run_mc(&p, &opts).unwrap();
            println!(
                "c9 w={w} mc({nt}): {:.1?}  photons {} g2 {} sz {} dt {:.2e} m_hi {}",
                t0.elapsed(), r.photons, r.g2, r.sz, r.dt, r.m_hi
            );
        }
        "c4" => {
            // fig2 family xi=0.1: kappa=1250, Omega^2=12.5/0.1.
            let xi: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
            let kappa = 125.0 / xi;
            let omega = (0.1 * kappa).sqrt();
            let mut p = SystemParams::resonant(10_000, omega, kappa, 499.0);
            let t0 = Instant::now();
            let dt = langevin::suggest_dt(&p);
            let arch = langevin::run(&p, 32, 3.0, 2.0, dt, 9).unwrap();
            let obs = estimators::observables(&arch).unwrap();
            println!(
                "c4 xi={xi} w=499 lg(32,dt={dt:.1e}): {:.1?}  photons {}",
                t0.elapsed(), obs.photons
            );
            p.repump = 539.0;
            let arch = langevin::run(&p, 32, 3.0, 2.0, dt, 9).unwrap();
            let obs = estimators::observables(&arch).unwrap();
            println!("c4 xi={xi} w=539: photons {}", obs.photons);
        }
        _ => eprintln!("usage: probe_accept c2|c3|c4|c9 [args]"),
    }
}
// appended: det reference for c2
