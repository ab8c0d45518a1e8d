use taxel_core::SensorLayout;
use taxel_sensorsim::{run_characterization, IndentationProtocol, SkinModel, SkinParams, TaxelModel};

fn uniform_skin(min_force: f64, noise_std: f64) -> SkinModel {
    let t = TaxelModel { min_force, sat_force: 13.95, gain: 90.0, nonlinearity: 0.8, contact_onset: 12.0, noise_std };
    SkinModel { taxels: vec![t; 63] }
}

fn force_step(p: &IndentationProtocol) -> f64 {
    p.stiffness_n_per_mm * p.approach_speed_mm_s / p.sensor_rate_hz
}

#[test]
fn noise_free_recovers_min_force_within_one_step() {
    let p = IndentationProtocol { force_noise_n: 0.0, repetitions: 2, taxels: vec![0, 40], ..Default::default() };
    let report = run_characterization(&SensorLayout::skin(), &uniform_skin(1.15, 0.0), &p, 1).unwrap();
    for t in &report.taxels {
        for d in &t.min_detect {
            let d = d.unwrap();
            assert!(d >= 1.15 && d - 1.15 <= force_step(&p), "{d}");
            assert!((d - 1.15).abs() <= 0.1);
        }
        let sat = t.max_sat_stat.mean.unwrap();
        assert!(sat > 1.15 && sat <= 13.95 + force_step(&p), "{sat}");
    }
}

#[test]
fn zero_stiffness_never_detects() {
    let p = IndentationProtocol { stiffness_n_per_mm: 0.0, repetitions: 3, ..Default::default() };
    let report = run_characterization(&SensorLayout::skin(), &uniform_skin(1.15, 1.5), &p, 2).unwrap();
    for t in &report.taxels {
        assert!(t.min_detect.iter().all(Option::is_none));
        assert!(t.max_sat.iter().all(Option::is_none));
        assert_eq!(t.min_detect_stat.reached, 0);
    }
    assert!(report.render().contains("not reached"));
}

#[test]
fn noisy_repetitions_scatter_around_configured_value() {
    let p = IndentationProtocol { taxels: vec![6, 45], ..Default::default() };
    let report = run_characterization(&SensorLayout::skin(), &uniform_skin(1.15, 1.5), &p, 3).unwrap();
    for t in &report.taxels {
        let s = t.min_detect_stat;
        assert_eq!(s.reached, 10);
        let (mean, std) = (s.mean.unwrap(), s.std.unwrap());
        assert!(std > 0.0);
        assert!((mean - 1.15).abs() <= 3.0 * std / 10f64.sqrt(), "mean {mean} std {std}");
    }
}

#[test]
fn default_skin_report_per_section() {
    let layout = SensorLayout::skin();
    let skin = SkinModel::sample(&layout, &SkinParams::default(), 11).unwrap();
    let p = IndentationProtocol::default();
    let report = run_characterization(&layout, &skin, &p, 4).unwrap();
    assert_eq!(report.taxels.len(), 8);
    assert_eq!(report.sections.len(), 2);
    for t in &report.taxels {
        let s = t.min_detect_stat;
        let (mean, std) = (s.mean.unwrap(), s.std.unwrap());
        assert!((mean - t.configured_min_force).abs() <= 3.0 * std / 10f64.sqrt(), "taxel {}: {mean} vs {}", t.taxel, t.configured_min_force);
    }
    let mut csv = Vec::new();
    report.write_curve_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("taxel,repetition,force,reading\n"));
    let summary: serde_json::Value = serde_json::from_str(&report.summary_json()).unwrap();
    assert_eq!(summary["taxels"].as_array().unwrap().len(), 8);
}
