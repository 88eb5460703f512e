//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use gapewatch_core::codec::{parse_csv, write_csv, FrameMessage};
use gapewatch_core::detector::{
    detect_events, segment_windows, DetectorConfig, DEFAULT_SWEEP_SIZES,
};
use gapewatch_core::fft::{dft_naive, fft_real};
use gapewatch_core::signal::{
    block_mean_downsample, clean_records, extract_channel, normalize_zero_start, ChannelId,
    GapPolicy, GapeRecord, GapeSeries, RawRow, CHANNELS,
};
use gapewatch_core::spectral::{band_average_power, fft, periodogram_psd, single_sided_spectrum};
use gapewatch_core::synth::make_corpus;
use gapewatch_core::Error;
use gapewatch_ingest::{AlertRecord, MemorySink, Pace, Server, ServerConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ch(id: u8) -> ChannelId {
    ChannelId::new(id).unwrap()
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gapewatch")
}

fn fft_oracle() -> Outcome {
    let started = Instant::now();
    let sizes: Vec<usize> = (1..=64).chain([100, 128, 600, 1024, 6000]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0F0);
    let mut worst_rel = 0.0f64;
    let mut worst_parseval = 0.0f64;
    for i in 0..200 {
        let n = sizes[i % sizes.len()];
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = fft_real(&x).map_err(|e| e.to_string())?;
        let slow = dft_naive(&x).map_err(|e| e.to_string())?;
        let scale = slow
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let err = fast
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst_rel = worst_rel.max(err / scale);
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 = fast.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        if time_energy > 0.0 {
            worst_parseval = worst_parseval.max((time_energy - freq_energy).abs() / time_energy);
        }
    }
    let elapsed = started.elapsed();
    ensure(worst_rel < 1e-6, || format!("relative error {worst_rel:e}"))?;
    ensure(worst_parseval < 1e-9, || {
        format!("Parseval error {worst_parseval:e}")
    })?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "200 signals, max rel err {worst_rel:.1e}, Parseval {worst_parseval:.1e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn closed_form() -> Outcome {
    let (fs, n, a, f0) = (10.0, 6000usize, 0.2, 0.8);
    let x: Vec<f64> = (0..n)
        .map(|i| a * (2.0 * PI * f0 * i as f64 / fs).sin())
        .collect();
    let spec = fft(&x, fs).map_err(|e| e.to_string())?;
    let k = (f0 * n as f64 / fs).round() as usize;
    // a sinusoid on an exact bin puts |X_k| = A·N/2; the one-sided PSD doubles it
    let expect_psd = 2.0 * (a * n as f64 / 2.0).powi(2) / (fs * n as f64);
    let expect_bins = ((1.3 - 0.3) * n as f64 / fs) as usize + 1;
    let expect_mean = expect_psd / expect_bins as f64;

    let amp = single_sided_spectrum(&spec).amplitudes[k];
    let psd = periodogram_psd(&spec)[k];
    let band = band_average_power(&spec, 0.3, 1.3).map_err(|e| e.to_string())?;
    ensure(k == 480, || format!("bin {k}"))?;
    ensure((amp - a).abs() <= 1e-9, || format!("amplitude {amp}"))?;
    ensure(
        (psd - 12.0).abs() <= 1e-6 && (psd - expect_psd).abs() <= 1e-6,
        || format!("PSD {psd}"),
    )?;
    ensure(
        band.bin_count == 601 && band.bin_count == expect_bins,
        || format!("{} bins", band.bin_count),
    )?;
    ensure(
        (band.mean_power - 0.019967).abs() <= 1e-6
            && (band.mean_power - expect_mean).abs() <= 1e-12,
        || format!("band mean {}", band.mean_power),
    )?;
    Ok(format!(
        "amplitude {amp:.12}, PSD {psd:.9}, {} bins, mean {:.7}",
        band.bin_count, band.mean_power
    ))
}

fn structural_constants(dir: &Path) -> Outcome {
    let cfg = DetectorConfig::default();
    ensure(cfg.window_samples == 6000, || "window".into())?;
    ensure((cfg.f_lo_hz, cfg.f_hi_hz) == (0.3, 1.3), || "band".into())?;
    ensure(
        cfg.threshold == 0.1 && cfg.is_spawning(0.1) && !cfg.is_spawning(0.0999999),
        || "threshold".into(),
    )?;
    ensure(
        DEFAULT_SWEEP_SIZES == [100, 300, 500, 1000, 2000, 6000],
        || "sweep sizes".into(),
    )?;

    // one hour of flat signal on channel 1
    let recs: Vec<GapeRecord> = (0..36_000)
        .map(|i| {
            let mut c = [None; CHANNELS];
            c[0] = Some(0.2);
            GapeRecord::new(i * 100, c).unwrap()
        })
        .collect();
    let input = dir.join("flat.csv");
    write_csv(fs::File::create(&input).unwrap(), &recs).map_err(|e| e.to_string())?;
    let report = dir.join("report.json");
    let out = Command::new(bin())
        .args(["detect", "--input"])
        .arg(&input)
        .arg("--report")
        .arg(&report)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })?;
    let echo: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).map_err(|e| e.to_string())?;
    let c = &echo["config"];
    ensure(
        c["window_samples"] == 6000
            && c["f_lo_hz"] == 0.3
            && c["f_hi_hz"] == 1.3
            && c["threshold"] == 0.1
            && echo["preprocess"]["sample_rate_hz"] == 10.0,
        || format!("config echo {c}"),
    )?;
    ensure(echo["channels"][0]["windows"] == 6, || {
        format!("windows {}", echo["channels"][0])
    })?;

    let sweep = |sizes: &str| {
        Command::new(bin())
            .args(["sweep", "--sizes", sizes, "--input"])
            .arg(&input)
            .output()
            .unwrap()
    };
    let default_sweep = Command::new(bin())
        .args(["sweep", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    let rows = String::from_utf8_lossy(&default_sweep.stdout).into_owned();
    let sizes: Vec<&str> = rows
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap_or(""))
        .collect();
    ensure(
        sizes == ["100", "300", "500", "1000", "2000", "6000"],
        || format!("sweep rows {sizes:?}"),
    )?;
    let rejected = sweep("50");
    ensure(!rejected.status.success(), || "size 50 accepted".into())?;
    ensure(sweep("100").status.success(), || "size 100 rejected".into())?;
    Ok(
        "window 6000 @ 10 Hz, band 0.3-1.3 Hz, threshold >= 0.1, sweep sizes echoed, 50 rejected"
            .into(),
    )
}

fn perfect_detection() -> Outcome {
    let started = Instant::now();
    let corpus = make_corpus(50, 0.5, 2024).map_err(|e| e.to_string())?;
    let cfg = DetectorConfig::default();
    let (mut fp, mut fneg, mut miss_overlap) = (0, 0, 0);
    for e in &corpus.entries {
        let det = detect_events(&e.series, &cfg).map_err(|e| e.to_string())?;
        let detected = !det.events.is_empty();
        match (e.spawning, detected) {
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            _ => {}
        }
        for ev in &det.events {
            if !e
                .truth
                .iter()
                .any(|t| t.overlaps(ev.start_time_ms, ev.end_time_ms))
            {
                miss_overlap += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(corpus.spawning_count() == 25, || {
        format!("{} spawning", corpus.spawning_count())
    })?;
    ensure(fp == 0 && fneg == 0, || {
        format!("{fp} false positives, {fneg} false negatives")
    })?;
    ensure(miss_overlap == 0, || {
        format!("{miss_overlap} events miss their burst")
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "50 signals (25/25), 0 FP, 0 FN, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn windowing_arithmetic() -> Outcome {
    let (len, window) = (398_404usize, 6000usize);
    let s = GapeSeries::new(ch(1), 10.0, 0, vec![0.0; len]).map_err(|e| e.to_string())?;
    let seg = segment_windows(&s, &DetectorConfig::default());
    let (full, rest) = (len / window, len % window);
    ensure(seg.windows.len() == 66 && full == 66, || {
        format!("{} windows", seg.windows.len())
    })?;
    ensure(seg.discarded_samples == 2404 && rest == 2404, || {
        format!("{} discarded", seg.discarded_samples)
    })?;
    ensure(seg.windows[0].start_sample == 2404, || {
        "head not discarded".into()
    })?;
    let raw = GapeSeries::new(
        ch(1),
        100.0,
        0,
        (0..3_984_040).map(|i| (i % 7) as f64).collect(),
    )
    .map_err(|e| e.to_string())?;
    let down = block_mean_downsample(&raw, 10).map_err(|e| e.to_string())?;
    ensure(
        down.len() == 398_404 && down.sample_rate_hz() == 10.0,
        || format!("{} samples", down.len()),
    )?;
    Ok("398,404 samples -> 66 windows + 2,404 discarded; 3,984,040 -> 398,404".into())
}

fn per_channel(alerts: &[AlertRecord]) -> BTreeMap<u8, Vec<String>> {
    let mut m: BTreeMap<u8, Vec<String>> = BTreeMap::new();
    for a in alerts {
        m.entry(a.channel_id.get())
            .or_default()
            .push(a.to_json_line());
    }
    m
}

fn serve_alerts(records: &[GapeRecord], clients: usize) -> Result<Vec<AlertRecord>, String> {
    let config = ServerConfig {
        max_connections: Some(clients),
        ..ServerConfig::default()
    };
    let server = Server::bind("127.0.0.1:0", config).map_err(|e| e.to_string())?;
    let sink = Arc::new(MemorySink::new());
    let handle = server.spawn(sink.clone()).map_err(|e| e.to_string())?;
    let addr = handle.local_addr();
    // client k carries channels congruent to k modulo `clients`
    let parts: Vec<Vec<GapeRecord>> = (0..clients)
        .map(|k| {
            records
                .iter()
                .filter_map(|r| {
                    let mut c = *r.channels();
                    for (slot, v) in c.iter_mut().enumerate() {
                        if slot % clients != k {
                            *v = None;
                        }
                    }
                    c.iter()
                        .any(Option::is_some)
                        .then(|| GapeRecord::new(r.timestamp_ms(), c).unwrap())
                })
                .collect()
        })
        .collect();
    thread::scope(|s| {
        for part in &parts {
            s.spawn(move || gapewatch_ingest::replay(addr, part, Pace::AsFastAsPossible).unwrap());
        }
    });
    handle.join().map_err(|e| e.to_string())?;
    Ok(sink.alerts())
}

fn online_offline(dir: &Path) -> Outcome {
    let mut total = 0;
    for seed in 0..10u64 {
        let corpus = make_corpus(6, 0.5, 1000 + seed).map_err(|e| e.to_string())?;
        let group = &corpus.entries[..];
        let records =
            gapewatch_core::synth::entries_to_records(group).map_err(|e| e.to_string())?;
        let path = dir.join(format!("corpus_{seed}.csv"));
        write_csv(fs::File::create(&path).unwrap(), &records).map_err(|e| e.to_string())?;
        let alerts_path = dir.join(format!("corpus_{seed}.alerts.jsonl"));
        let out = Command::new(bin())
            .args(["detect", "--out"])
            .arg(dir.join("events.csv"))
            .arg("--alerts")
            .arg(&alerts_path)
            .arg("--input")
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            String::from_utf8_lossy(&out.stderr).into_owned()
        })?;
        let mut offline: BTreeMap<u8, Vec<String>> = BTreeMap::new();
        for line in fs::read_to_string(&alerts_path).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            offline
                .entry(v["channel_id"].as_u64().unwrap() as u8)
                .or_default()
                .push(line.to_string());
        }
        ensure(!offline.is_empty(), || {
            format!("seed {seed}: no offline alerts")
        })?;
        let (file_records, _) =
            parse_csv(fs::read(&path).unwrap().as_slice()).map_err(|e| e.to_string())?;
        for clients in [1, 2] {
            let online = per_channel(&serve_alerts(&file_records, clients)?);
            ensure(online == offline, || {
                format!(
                    "seed {seed}, {clients} client(s): online {online:?} != offline {offline:?}"
                )
            })?;
        }
        total += offline.values().map(Vec::len).sum::<usize>();
    }
    Ok(format!(
        "10 corpora, {total} alerts identical with 1 and 2 concurrent clients"
    ))
}

fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
    (any::<u64>(), 0.0f64..1.0, 0.3f64..1.3).prop_map(|(seed, amp, f)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..3000)
            .map(|i| {
                0.2 + amp * (2.0 * PI * f * i as f64 / 10.0).sin() + rng.random_range(-0.05..0.05)
            })
            .collect()
    })
}

fn small_cfg() -> DetectorConfig {
    DetectorConfig {
        window_samples: 600,
        ..DetectorConfig::default()
    }
}

fn properties() -> Outcome {
    let run = |name: &str, cases: u32, f: &dyn Fn(&mut TestRunner) -> Result<(), String>| {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        f(&mut runner).map_err(|e| format!("{name}: {e}"))
    };
    let powers = |x: &[f64], cfg: &DetectorConfig| -> Vec<f64> {
        let s = GapeSeries::new(ch(1), 10.0, 0, x.to_vec()).unwrap();
        detect_events(&s, cfg)
            .unwrap()
            .verdicts
            .iter()
            .map(|v| v.band_power)
            .collect()
    };

    run("threshold monotonicity", 64, &|r| {
        r.run(
            &(series_strategy(), 0.0f64..0.2, 0.0f64..0.2),
            |(x, t1, t2)| {
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                let s = GapeSeries::new(ch(1), 10.0, 0, x).unwrap();
                let at = |t| {
                    detect_events(
                        &s,
                        &DetectorConfig {
                            threshold: t,
                            ..small_cfg()
                        },
                    )
                    .unwrap()
                };
                let (a, b) = (at(lo), at(hi));
                for (va, vb) in a.verdicts.iter().zip(&b.verdicts) {
                    prop_assert!(!vb.is_spawning || va.is_spawning);
                }
                prop_assert!(b.spawning_count() <= a.spawning_count());
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
    })?;

    run("amplitude scaling covariance", 64, &|r| {
        r.run(
            &(series_strategy(), 0.1f64..10.0, 0.0f64..0.2),
            |(x, s, t)| {
                let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
                let (p, q) = (powers(&x, &small_cfg()), powers(&scaled, &small_cfg()));
                for (a, b) in p.iter().zip(&q) {
                    prop_assert!((b - s * s * a).abs() <= 1e-9 * (s * s * a).abs().max(1e-12));
                }
                let base = GapeSeries::new(ch(1), 10.0, 0, x).unwrap();
                let big = GapeSeries::new(ch(1), 10.0, 0, scaled).unwrap();
                let c1 = DetectorConfig {
                    threshold: t,
                    ..small_cfg()
                };
                let c2 = DetectorConfig {
                    threshold: t * s * s,
                    ..small_cfg()
                };
                let v1: Vec<bool> = detect_events(&base, &c1)
                    .unwrap()
                    .verdicts
                    .iter()
                    .map(|v| v.is_spawning)
                    .collect();
                let v2: Vec<bool> = detect_events(&big, &c2)
                    .unwrap()
                    .verdicts
                    .iter()
                    .map(|v| v.is_spawning)
                    .collect();
                // verdicts may only differ where the power sits on the threshold to rounding
                for ((a, b), p) in v1.iter().zip(&v2).zip(&p) {
                    prop_assert!(a == b || (p - t).abs() <= 1e-9 * t.max(1e-12));
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
    })?;

    run("time-shift invariance", 64, &|r| {
        r.run(
            &(series_strategy(), 0usize..600, 0i64..10_000_000),
            |(x, shift, t0)| {
                let w = &x[..600];
                let mut rolled = w.to_vec();
                rolled.rotate_left(shift);
                let a = band_average_power(&fft(w, 10.0).unwrap(), 0.3, 1.3)
                    .unwrap()
                    .mean_power;
                let b = band_average_power(&fft(&rolled, 10.0).unwrap(), 0.3, 1.3)
                    .unwrap()
                    .mean_power;
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
                let s0 = GapeSeries::new(ch(1), 10.0, 0, x.clone()).unwrap();
                let s1 = GapeSeries::new(ch(1), 10.0, t0, x).unwrap();
                let p0: Vec<f64> = detect_events(&s0, &small_cfg())
                    .unwrap()
                    .verdicts
                    .iter()
                    .map(|v| v.band_power)
                    .collect();
                let p1: Vec<f64> = detect_events(&s1, &small_cfg())
                    .unwrap()
                    .verdicts
                    .iter()
                    .map(|v| v.band_power)
                    .collect();
                prop_assert_eq!(p0, p1);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
    })?;

    let row = (
        prop::option::of(-5i64..200),
        prop::array::uniform6(prop_oneof![
            Just(None),
            Just(Some(f64::NAN)),
            (-1.0f64..1.0).prop_map(Some)
        ]),
    );
    run("clean/normalize idempotence", 256, &|r| {
        r.run(&prop::collection::vec(row.clone(), 0..60), |rows| {
            let raw: Vec<RawRow> = rows
                .into_iter()
                .enumerate()
                .map(|(i, (ts, channels))| RawRow {
                    line: i + 1,
                    timestamp_ms: ts,
                    channels,
                })
                .collect();
            let (once, _) = clean_records(raw);
            let again: Vec<RawRow> = once.iter().map(RawRow::from).collect();
            let (twice, rep) = clean_records(again);
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(rep.dropped + rep.duplicates, 0);
            for c in ChannelId::all() {
                if let Ok(s) = extract_channel(&once, c, 10.0, GapPolicy::Concatenate) {
                    let n1 = normalize_zero_start(&s);
                    prop_assert_eq!(&normalize_zero_start(&n1), &n1);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;

    run("CSV round trip", 256, &|r| {
        let slot = prop_oneof![
            Just(None),
            any::<f64>()
                .prop_filter("finite", |v| v.is_finite())
                .prop_map(Some)
        ];
        let recs = prop::collection::btree_map(0i64..i64::MAX, prop::array::uniform6(slot), 0..40);
        r.run(&recs, |m| {
            let recs: Vec<GapeRecord> = m
                .into_iter()
                .filter(|(_, c)| c.iter().any(Option::is_some))
                .map(|(ts, c)| GapeRecord::new(ts, c).unwrap())
                .collect();
            let mut buf = Vec::new();
            write_csv(&mut buf, &recs).unwrap();
            let (back, _) = parse_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, recs);
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;

    run("parser fuzz totality", 100_000, &|r| {
        let field = prop_oneof![
            Just(String::new()),
            Just("NaN".to_string()),
            any::<f64>().prop_map(|v| v.to_string()),
            any::<i64>().prop_map(|v| v.to_string()),
            "[ -~]{0,8}",
        ];
        let line = prop_oneof![
            prop::collection::vec(field, 0..10).prop_map(|f| f.join(",")),
            ".{0,80}",
            prop::collection::vec(any::<u8>(), 0..80)
                .prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
        ];
        r.run(&line, |l| {
            let _ = FrameMessage::parse(&l);
            let parsed = parse_csv(l.as_bytes());
            prop_assert!(parsed.is_ok());
            Ok(())
        })
        .map_err(|e| e.to_string())
    })?;
    Ok("monotonicity, s^2 covariance, shift invariance, idempotence, CSV round trip, 1e5 fuzz lines".into())
}

fn nyquist_guard(dir: &Path) -> Outcome {
    let s = GapeSeries::new(ch(1), 1.0, 0, vec![0.2; 39_840]).map_err(|e| e.to_string())?;
    match detect_events(&s, &DetectorConfig::default()) {
        Err(Error::NyquistViolation { min_rate_hz, .. }) if (min_rate_hz - 2.6).abs() < 1e-12 => {}
        other => return Err(format!("library returned {other:?}")),
    }
    let recs: Vec<GapeRecord> = (0..1000)
        .map(|i| {
            let mut c = [None; CHANNELS];
            c[0] = Some(0.2);
            GapeRecord::new(i * 1000, c).unwrap()
        })
        .collect();
    let input = dir.join("one_hz.csv");
    write_csv(fs::File::create(&input).unwrap(), &recs).map_err(|e| e.to_string())?;
    let out = Command::new(bin())
        .args(["detect", "--rate", "1", "--band", "0.3:1.3", "--input"])
        .arg(&input)
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(
        !out.status.success() && stderr.contains("Nyquist") && stderr.contains("2.6"),
        || format!("CLI stderr: {stderr}"),
    )?;
    Ok("1 Hz series with band hi 1.3 Hz rejected; 2.6 Hz required".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("FFT oracle equivalence", Box::new(fft_oracle)),
        ("closed-form spectrum", Box::new(closed_form)),
        (
            "structural constants",
            Box::new(|| structural_constants(dir.path())),
        ),
        (
            "100% detection on synthetic corpus",
            Box::new(perfect_detection),
        ),
        ("windowing arithmetic", Box::new(windowing_arithmetic)),
        (
            "offline/online equivalence",
            Box::new(|| online_offline(dir.path())),
        ),
        ("property suites", Box::new(properties)),
        ("Nyquist guard", Box::new(|| nyquist_guard(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
