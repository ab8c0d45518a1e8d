use rand::{Rng, SeedableRng};
use taxel_core::{GestureClass, GestureRecording, RecordingMeta, Section, TaxelFrame};

/// Random recording with idle lead-in, a few oscillating hot taxels and noise.
pub fn random_recording(seed: u64) -> GestureRecording {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let len = rng.random_range(5..320);
    let lead = rng.random_range(0..len.min(30));
    let hot: Vec<(usize, f64, f64, f64)> = (0..rng.random_range(1..10))
        .map(|_| {
            (
                rng.random_range(0..63),
                rng.random_range(20.0..600.0),
                rng.random_range(0.2..24.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let frames = (0..len)
        .map(|t| {
            let mut r: Vec<u16> = (0..63).map(|_| rng.random_range(0..=6)).collect();
            if t == lead {
                r[hot[0].0] = 500;
            } else if t > lead {
                for &(i, amp, freq, phase) in &hot {
                    let v = amp * (0.5 + 0.5 * (std::f64::consts::TAU * freq * t as f64 / 50.0 + phase).sin());
                    r[i] = r[i].saturating_add(v as u16).min(1023);
                }
            }
            TaxelFrame::new(t as f64 / 50.0, r).unwrap()
        })
        .collect();
    GestureRecording::new(
        frames,
        RecordingMeta {
            label: GestureClass::from_code((seed % 6) as usize),
            participant_id: format!("r{seed}"),
            arm_section: Section::Upper,
            trial_index: seed as u32,
            sample_rate_hz: 50.0,
        },
    )
    .unwrap()
}
