use srlaser_core::estimators;
use srlaser_core::langevin;
use srlaser_core::params::SystemParams;

fn main() {
    for (i, &xi) in [0.2f64, 1.0, 5.0].iter().enumerate() {
        let kappa = (20.0 / 8.0) * 1.0 / xi;
        let omega = (1.0 * kappa).sqrt();
        let t_relax = if xi >= 5.0 { 25.0 } else { 6.0 };
        for (j, &w) in [9.0f64, 2.7, 13.5].iter().enumerate() {
            let p = SystemParams::resonant(20, omega, kappa, w);
            let dt = langevin::suggest_dt(&p);
            match langevin::run(&p, 512, t_relax, 12.0, dt, 0x1A + (i * 3 + j) as u64) {
                Ok(arch) => match estimators::observables(&arch) {
                    Ok(o) => println!(
                        "xi={xi} w={w} dt={dt:.2e} ok: photons {:.4} g2 {:.4} sz {:.4} pair {:.5} flags {:?}",
                        o.photons.value, o.g2.value, o.sz.value, o.pair.value, arch.flags
                    ),
                    Err(e) => println!("xi={xi} w={w} dt={dt:.2e} OBS ERR: {e:?}"),
                },
                Err(e) => println!("xi={xi} w={w} dt={dt:.2e} RUN ERR: {e:?}"),
            }
        }
    }
}
