//! Minimal equalizer run: a dissipatively coupled chain smooths random
//! input amplitudes towards their mean while conserving the sum.

use dpc::circuit::builders;
use dpc::dynamics;
use dpc::C64;
use nalgebra::DVector;

fn main() {
    let n = 16;
    let circuit = builders::uniform_chain(n, 1.0).unwrap();
    let initial = DVector::from_fn(n, |i, _| {
        C64::new(2.5 + (i as f64 * 2.399).sin(), (i as f64 * 1.618).cos())
    });
    let mean = initial.iter().sum::<C64>() / C64::new(n as f64, 0.0);
    println!("mean amplitude: {:.4}{:+.4}i", mean.re, mean.im);

    let times = [0.0, 1.0, 5.0, 25.0, 125.0];
    let trajectory = dynamics::evolve(&circuit, &initial, &times[1..]).unwrap();
    for (t, state) in times.iter().skip(1).zip(&trajectory.states) {
        let worst = state.iter().map(|a| (a - mean).norm()).fold(0.0, f64::max);
        println!("gamma t = {t:>6}: worst deviation from mean {worst:.3e}");
    }
}
