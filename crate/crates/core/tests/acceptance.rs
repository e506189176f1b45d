//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use num_complex::Complex64;
use statrs::function::erf::erfc;

use smsmx::channel::{apply_channel, sample_channel, NoiseSpec};
use smsmx::codec::{decode, encode, enumerate_codebook, BitFrame, DEFAULT_ENUMERATION_CAP};
use smsmx::montecarlo::{run_point, run_sweep, Fading, SimPoint};
use smsmx::rng::{frame_stream, random_bits};
use smsmx::{bits_per_frame, ml_detect, ChannelRealization, Detector, Scheme, SmSmxConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn flagship() -> SmSmxConfig {
    SmSmxConfig::new(4, 2, 4, 4, Scheme::SmSmx).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ac1_spectral_efficiency() -> Outcome {
    let smsmx = bits_per_frame(&flagship());
    let sm = bits_per_frame(&SmSmxConfig::new(4, 1, 4, 4, Scheme::PureSm).unwrap());
    ensure(smsmx == 5 && sm == 4, format!("sm_smx eta = {smsmx}, pure_sm eta = {sm}"))?;
    Ok(format!("sm_smx(4,2,4) = {smsmx} bits, pure_sm(4,1,4) = {sm} bits"))
}

fn ac2_rf_chains() -> Outcome {
    let cfg = flagship();
    let c = cfg.constellation();
    ensure(cfg.k() == 2, format!("K = {}", cfg.k()))?;
    for (frame, x) in enumerate_codebook(&cfg, &c, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())? {
        let active = x.dense().iter().filter(|v| v.norm() > 0.0).count();
        ensure(active == 2, format!("frame {frame} drives {active} antennas"))?;
    }
    Ok("2 active RF chains in every codeword".into())
}

fn ac3_codebook() -> Outcome {
    let cfg = flagship();
    let c = cfg.constellation();
    let book = enumerate_codebook(&cfg, &c, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    ensure(book.len() == 32, format!("{} entries", book.len()))?;
    for i in 0..book.len() {
        for j in i + 1..book.len() {
            ensure(book[i].1.dense() != book[j].1.dense(), format!("entries {i} and {j} collide"))?;
        }
    }
    for (frame, x) in &book {
        let dense = x.dense();
        let support: Vec<usize> = (0..4).filter(|&a| dense[a].norm() > 0.0).collect();
        let g = x.group();
        ensure(support == vec![2 * g, 2 * g + 1], format!("frame {frame} support {support:?}"))?;
        let labels: Vec<Vec<u8>> = x.point_indices().iter().map(|&p| c.label_bits(p)).collect();
        let back = decode(&cfg, g, &labels).map_err(|e| e.to_string())?;
        ensure(&back == frame, format!("decode(encode({frame})) = {back}"))?;
    }
    Ok("32 distinct aligned codewords, exhaustive roundtrip".into())
}

fn ac4_noiseless() -> Outcome {
    let sm = SmSmxConfig::new(4, 1, 4, 4, Scheme::PureSm).unwrap();
    let cases = [
        (flagship(), Detector::Ml),
        (flagship(), Detector::TwoStage),
        (sm, Detector::SmMrrc),
    ];
    let mut summary = Vec::new();
    for (cfg, det) in cases {
        let p = SimPoint::new(cfg, det, f64::INFINITY, 2024).with_frames(10_000, 0);
        let r = run_point(&p).map_err(|e| e.to_string())?;
        ensure(r.frames == 10_000, format!("{det}: {} frames", r.frames))?;
        ensure(r.bit_errors == 0, format!("{det}: {} bit errors", r.bit_errors))?;
        summary.push(format!("{det} 0/{}", r.frames));
    }
    Ok(summary.join(", "))
}

/// Scores every frame by building `H x` from scratch.
fn naive_ml(y: &[Complex64], h: &ChannelRealization, cfg: &SmSmxConfig) -> (u64, f64) {
    let c = cfg.constellation();
    let eta = cfg.bits_per_frame();
    let mut best = (0, f64::INFINITY);
    for v in 0..1u64 << eta {
        let x = encode(cfg, &BitFrame::from_u64(v, eta), &c).unwrap().dense();
        let mut metric = 0.0;
        for (row, yr) in y.iter().enumerate() {
            let mut hx = Complex64::new(0.0, 0.0);
            for (col, xc) in x.iter().enumerate() {
                hx += h.get(row, col) * xc;
            }
            metric += (yr - hx).norm_sqr();
        }
        if metric < best.1 {
            best = (v, metric);
        }
    }
    best
}

fn ac5_ml_oracle() -> Outcome {
    let cfg = flagship();
    let c = cfg.constellation();
    let snrs = [0.0, 5.0, 10.0, 20.0];
    for i in 0..1000u64 {
        let mut rng = frame_stream(77, i);
        let frame = BitFrame::new(random_bits(&mut rng, 5));
        let h = sample_channel(4, 4, &mut rng);
        let noise = NoiseSpec::from_snr_db(snrs[i as usize % snrs.len()]).unwrap();
        let x = encode(&cfg, &frame, &c).unwrap();
        let y = apply_channel(&h, &x, &noise, &mut rng).unwrap();
        let fast = ml_detect(&y, &h, &cfg, &c).map_err(|e| e.to_string())?;
        let (frame_ref, metric_ref) = naive_ml(&y, &h, &cfg);
        ensure(
            fast.frame.to_u64() == Some(frame_ref),
            format!("instance {i}: {} vs {frame_ref}", fast.frame),
        )?;
        let rel = (fast.metric - metric_ref).abs() / metric_ref.abs().max(f64::MIN_POSITIVE);
        ensure(rel <= 1e-9, format!("instance {i}: metric rel err {rel:e}"))?;
    }
    Ok("1000/1000 instances match the naive scorer".into())
}

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn ac6_analytic_ber() -> Outcome {
    let cfg = SmSmxConfig::new(1, 1, 4, 1, Scheme::SmSmx).unwrap();
    let eta = cfg.bits_per_frame();
    let mut lines = Vec::new();
    for ebn0 in [2.0, 4.0, 6.0] {
        let snr = ebn0 + 10.0 * (eta as f64).log10();
        let p = SimPoint::new(cfg, Detector::Ml, snr, 606)
            .with_frames(200_000, 0)
            .with_fading(Fading::Unit);
        let r = run_point(&p).map_err(|e| e.to_string())?;
        let theory = q_function((2.0 * 10f64.powf(ebn0 / 10.0)).sqrt());
        let se = (theory * (1.0 - theory) / (r.frames * eta as u64) as f64).sqrt();
        let z = (r.ber - theory) / se;
        ensure(
            r.frames >= 200_000 && z.abs() <= 3.0,
            format!("Eb/N0 {ebn0} dB: ber {:.6e} vs {theory:.6e} ({z:+.2} se)", r.ber),
        )?;
        lines.push(format!("{ebn0}dB {:.4e}/{theory:.4e} ({z:+.2}se)", r.ber));
    }
    Ok(lines.join(", "))
}

fn ac7_ordering() -> Outcome {
    let cfg = flagship();
    let grid = [0.0, 10.0, 20.0, 30.0];
    let points: Vec<SimPoint> = [Detector::Ml, Detector::TwoStage]
        .iter()
        .flat_map(|&d| grid.iter().map(move |&s| SimPoint::new(cfg, d, s, 7).with_frames(100_000, 0)))
        .collect();
    let recs = run_sweep(&points).map_err(|e| e.to_string())?;
    let (ml, ts) = recs.split_at(grid.len());
    for r in &recs {
        ensure(r.frames >= 100_000, format!("only {} frames", r.frames))?;
    }
    for (name, curve) in [("ml", ml), ("two_stage", ts)] {
        for w in curve.windows(2) {
            let slack = 2.0 * (w[0].ber_standard_error().powi(2) + w[1].ber_standard_error().powi(2)).sqrt();
            ensure(
                w[1].ber <= w[0].ber + slack,
                format!("{name}: BER rises {:.4e} -> {:.4e}", w[0].ber, w[1].ber),
            )?;
        }
    }
    for (i, (a, b)) in ml.iter().zip(ts).enumerate() {
        let slack = 2.0 * (a.ber_standard_error().powi(2) + b.ber_standard_error().powi(2)).sqrt();
        ensure(
            a.ber <= b.ber + slack,
            format!("{} dB: ml {:.4e} > two_stage {:.4e}", grid[i], a.ber, b.ber),
        )?;
    }
    let fmt = |c: &[smsmx::ErrorRecord]| c.iter().map(|r| format!("{:.2e}", r.ber)).collect::<Vec<_>>().join("/");
    Ok(format!("ml {} | two_stage {}", fmt(ml), fmt(ts)))
}

fn ac8_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "n = 4\nk = 2\nm = 4\nnr = 4\nscheme = sm_smx\ndetector = ml\nsnr = 0:5:30\nseed = 1234\nmax_frames = 30000\ntarget_bit_errors = 500\n",
    )
    .map_err(|e| e.to_string())?;
    let run = |threads: &str, detector: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(format!("out_{threads}_{detector}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_smsmx"))
            .env("SMSMX_THREADS", threads)
            .args(["run", "--config"])
            .arg(&config)
            .args(["--detector", detector, "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("smsmx run exited with {status}"))?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    for detector in ["ml", "two_stage"] {
        let one = run("1", detector)?;
        let eight = run("8", detector)?;
        ensure(one == eight, format!("{detector}: CSV differs between 1 and 8 threads"))?;
        ensure(
            one.iter().filter(|&&b| b == b'\n').count() == 8,
            format!("{detector}: expected header + 7 rows"),
        )?;
    }
    Ok("byte-identical CSV with SMSMX_THREADS=1 and 8 (ml, two_stage)".into())
}

fn ac9_channel_calibration() -> Outcome {
    const SAMPLES: usize = 100_000;
    let mut rng = frame_stream(9, 0);
    let (mut sum, mut energy) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..SAMPLES {
        let h = sample_channel(1, 1, &mut rng).get(0, 0);
        sum += h;
        energy += h.norm_sqr();
    }
    let mean = sum / SAMPLES as f64;
    let bound = 3.0 / (SAMPLES as f64).sqrt();
    let energy = energy / SAMPLES as f64;
    ensure(
        mean.re.abs() <= bound && mean.im.abs() <= bound,
        format!("fading mean {mean} exceeds {bound:.4}"),
    )?;
    ensure((0.97..=1.03).contains(&energy), format!("E|h|^2 = {energy}"))?;

    let cfg = flagship();
    let c = cfg.constellation();
    let noise = NoiseSpec::from_snr_db(6.0).unwrap();
    let (mut noise_power, mut signal_power) = (0.0, 0.0);
    for i in 0..SAMPLES as u64 {
        let mut rng = frame_stream(10, i);
        let x = encode(&cfg, &BitFrame::new(random_bits(&mut rng, 5)), &c).unwrap();
        let h = sample_channel(4, 4, &mut rng);
        let clean = h.mul_dense(&x.dense()).unwrap();
        let y = apply_channel(&h, &x, &noise, &mut rng).unwrap();
        noise_power += y.iter().zip(&clean).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / 4.0;
        signal_power += clean.iter().map(|v| v.norm_sqr()).sum::<f64>() / 4.0;
    }
    let noise_power = noise_power / SAMPLES as f64;
    let signal_power = signal_power / SAMPLES as f64;
    let rel = (noise_power / noise.sigma2() - 1.0).abs();
    ensure(rel <= 0.03, format!("noise power {noise_power} vs sigma2 {}", noise.sigma2()))?;
    ensure(
        (signal_power - 1.0).abs() <= 0.03,
        format!("received signal power per antenna {signal_power}"),
    )?;
    Ok(format!(
        "E|h|^2 = {energy:.4}, noise {noise_power:.4}/{:.4}, signal {signal_power:.4}",
        noise.sigma2()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1 spectral efficiency", ac1_spectral_efficiency),
        ("AC2 RF-chain accounting", ac2_rf_chains),
        ("AC3 codebook exactness", ac3_codebook),
        ("AC4 noiseless recovery", ac4_noiseless),
        ("AC5 ML oracle equivalence", ac5_ml_oracle),
        ("AC6 analytic BER anchor", ac6_analytic_ber),
        ("AC7 ordering properties", ac7_ordering),
        ("AC8 thread-count reproducibility", ac8_reproducibility),
        ("AC9 channel calibration", ac9_channel_calibration),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<34} ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<34} ({secs:.1}s) {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
