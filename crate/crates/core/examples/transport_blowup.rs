//! Discontinuity amplitude along a ray: Riccati blow-up versus the
//! exceptional (c = 0) case.

use cewave::rays::{transport_amplitude, TransportState};

fn main() -> cewave::Result<()> {
    let cases = [
        (
            "riccati",
            TransportState {
                pi0: -2.0,
                m: 0.0,
                c: 1.0,
            },
        ),
        (
            "riccati, damped",
            TransportState {
                pi0: -2.0,
                m: 0.5,
                c: 1.0,
            },
        ),
        (
            "exceptional",
            TransportState {
                pi0: -2.0,
                m: 0.0,
                c: 0.0,
            },
        ),
    ];
    for (name, ts) in cases {
        let rep = transport_amplitude(&ts, 100.0, 0.01)?;
        match rep.blowup {
            Some(s) => println!("{name:<16} blow-up at s = {s:.6} (exact {:?})", exact_blowup(&ts)),
            None => println!("{name:<16} bounded, max |π| = {:.3} on [0, 100]", rep.max_abs()),
        }
    }
    Ok(())
}

/// First zero of `1/π(s)` for constant `m, c`.
fn exact_blowup(ts: &TransportState) -> Option<f64> {
    let w0 = 1.0 / ts.pi0;
    let s = if ts.m == 0.0 {
        -w0 / ts.c
    } else {
        (1.0 + ts.m * w0 / ts.c).ln() / -ts.m
    };
    (s.is_finite() && s > 0.0).then_some(s)
}
