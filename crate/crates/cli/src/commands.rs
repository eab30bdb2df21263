use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use stereo_decorr::aec::{mono_far_end_demo, AecScenario};
use stereo_decorr::audio::{read_wav, write_wav};
use stereo_decorr::metrics::{coherence, stereo_coherence};
use stereo_decorr::rng::{derive_seed, hash_bytes};
use stereo_decorr::{
    apply_preset, AudioBuffer, CoherenceReport, Decorrelator, PresetConfig, PresetId, WelchConfig,
};

use crate::args::{AecDemoArgs, CompareArgs, MeasureArgs, ProcessArgs};
use crate::error::CliError;
use crate::proxy::distortion_snr_db;
use crate::report::*;

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<AudioBuffer> {
    read_wav(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn elapsed_ms(start: Instant) -> Timing {
    Timing {
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn process(args: ProcessArgs) -> Result<()> {
    let start = Instant::now();
    let (preset, algorithm) = match (args.preset, args.params) {
        (Some(p), _) => (Some(p), p.config().algorithm),
        (None, Some(a)) => (None, a),
        (None, None) => {
            return Err(CliError::Argument(
                "one of --preset or --params is required".into(),
            ))
        }
    };
    let input = read(&args.input)?;
    let duplicated_mono = input.num_channels() == 1;
    let stereo = input.to_stereo()?;
    let seed = args.seed.seed;
    let out = algorithm.decorrelate(&stereo, seed)?;
    let stats = write_wav(&out, &args.output, args.format.into()).map_err(|e| CliError::Input {
        path: args.output.clone(),
        source: e,
    })?;
    let coh = stereo_coherence(&out, &WelchConfig::default())?;
    if stats.clipped > 0 {
        eprintln!(
            "warning: {} samples clipped while writing {}",
            stats.clipped,
            args.output.display()
        );
    }
    print_json(&RunReport {
        schema_version: SCHEMA_VERSION,
        command: "process",
        input: InputDescriptor {
            path: display(&args.input),
            channels: input.num_channels(),
            sample_rate: input.sample_rate(),
            frames: input.len(),
            duplicated_mono,
        },
        output: display(&args.output),
        preset,
        algorithm: algorithm.to_string(),
        seed,
        bark_weighted: coh.bark_weighted,
        bark_bands: coh.bark_band_means(),
        clipped_samples: stats.clipped,
        versions: Versions::current(),
        timing: elapsed_ms(start),
    })
}

pub fn measure(args: MeasureArgs) -> Result<()> {
    let first = read(&args.first)?;
    let (report, inputs) = match &args.second {
        None => (
            stereo_coherence(&first, &WelchConfig::default())?,
            vec![display(&args.first)],
        ),
        Some(second_path) => {
            let second = read(second_path)?;
            for b in [&first, &second] {
                if b.num_channels() != 1 {
                    return Err(stereo_decorr::Error::ChannelCount {
                        expected: 1,
                        got: b.num_channels(),
                    }
                    .into());
                }
            }
            if first.sample_rate() != second.sample_rate() {
                return Err(stereo_decorr::Error::SampleRateMismatch(
                    first.sample_rate(),
                    second.sample_rate(),
                )
                .into());
            }
            let fs = f64::from(first.sample_rate());
            let r = coherence(
                first.channel(0),
                second.channel(0),
                fs,
                &WelchConfig::default(),
            )?;
            (r, vec![display(&args.first), display(second_path)])
        }
    };
    if args.csv {
        print!("{}", report.to_csv());
        Ok(())
    } else {
        print_json(&MeasureReport::new(inputs, first.sample_rate(), &report))
    }
}

struct Row {
    file: String,
    preset: Option<PresetId>,
    bark_weighted: Option<f64>,
    distortion_snr_db: Option<f64>,
    status: String,
}

fn mono_duplicate(buf: &AudioBuffer) -> Result<AudioBuffer> {
    let n = buf.num_channels() as f64;
    let mono: Vec<f64> = (0..buf.len())
        .map(|i| buf.channels().iter().map(|c| c[i]).sum::<f64>() / n)
        .collect();
    Ok(AudioBuffer::mono(mono, buf.sample_rate())?.to_stereo()?)
}

fn compare_file(path: &Path, presets: &[PresetConfig], seed: u64) -> Vec<Row> {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let skipped = |status: String| Row {
        file: file.clone(),
        preset: None,
        bark_weighted: None,
        distortion_snr_db: None,
        status,
    };
    let input = match read(path).and_then(|b| mono_duplicate(&b)) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("warning: skipping {}: {e}", path.display());
            return vec![skipped(format!("skipped: {e}"))];
        }
    };
    let file_seed = derive_seed(seed, hash_bytes(file.as_bytes()));
    presets
        .iter()
        .map(|p| {
            let run = || -> Result<(CoherenceReport, f64)> {
                let out = apply_preset(&input, p, file_seed)?;
                Ok((
                    stereo_coherence(&out, &WelchConfig::default())?,
                    distortion_snr_db(&input, &out)?,
                ))
            };
            match run() {
                Ok((coh, snr)) => Row {
                    file: file.clone(),
                    preset: Some(p.id),
                    bark_weighted: Some(coh.bark_weighted),
                    distortion_snr_db: Some(snr),
                    status: "ok".into(),
                },
                Err(e) => {
                    eprintln!("warning: {} with {}: {e}", path.display(), p.id);
                    Row {
                        preset: Some(p.id),
                        ..skipped(format!("error: {e}"))
                    }
                }
            }
        })
        .collect()
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |e: std::io::Error| CliError::Input {
        path: dir.to_path_buf(),
        source: e.into(),
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let is_wav = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if is_wav && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn compare(args: CompareArgs) -> Result<()> {
    let start = Instant::now();
    if args.presets.is_empty() {
        return Err(CliError::Argument(
            "--presets must name at least one preset".into(),
        ));
    }
    let presets: Vec<PresetConfig> = args.presets.iter().map(|p| p.config()).collect();
    let files = wav_files(&args.corpus)?;
    let seed = args.seed.seed;

    // Files are independent: each derives its own seed from its name.
    let results: Mutex<Vec<(usize, Vec<Row>)>> = Mutex::new(Vec::with_capacity(files.len()));
    let next = AtomicUsize::new(0);
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(files.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = files.get(i) else { break };
                let rows = compare_file(path, &presets, seed);
                results.lock().expect("worker panicked").push((i, rows));
            });
        }
    });
    let mut results = results.into_inner().expect("worker panicked");
    results.sort_by_key(|(i, _)| *i);
    let rows: Vec<Row> = results.into_iter().flat_map(|(_, r)| r).collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Output {
        path: args.out.clone(),
        source: e.into(),
    };
    w.write_record([
        "file",
        "preset",
        "bark_weighted",
        "distortion_snr_db",
        "status",
    ])
    .map_err(io)?;
    let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &rows {
        let preset = r.preset.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([
            &r.file,
            &preset,
            &fmt(r.bark_weighted),
            &fmt(r.distortion_snr_db),
            &r.status,
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    fs::write(&args.out, bytes).map_err(|source| CliError::Output {
        path: args.out.clone(),
        source,
    })?;

    let mut ranking: Vec<PresetRank> = presets
        .iter()
        .filter_map(|p| {
            let ok: Vec<&Row> = rows
                .iter()
                .filter(|r| r.preset == Some(p.id) && r.status == "ok")
                .collect();
            (!ok.is_empty()).then(|| {
                let n = ok.len() as f64;
                PresetRank {
                    rank: 0,
                    preset: p.id,
                    algorithm: p.algorithm,
                    mean_bark_weighted: ok.iter().filter_map(|r| r.bark_weighted).sum::<f64>() / n,
                    mean_distortion_snr_db: ok
                        .iter()
                        .filter_map(|r| r.distortion_snr_db)
                        .sum::<f64>()
                        / n,
                    files: ok.len(),
                }
            })
        })
        .collect();
    ranking.sort_by(|a, b| {
        a.mean_bark_weighted
            .total_cmp(&b.mean_bark_weighted)
            .then(a.preset.cmp(&b.preset))
    });
    for (i, r) in ranking.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    let skipped = rows.iter().filter(|r| r.preset.is_none()).count();
    print_json(&CompareSummary {
        schema_version: SCHEMA_VERSION,
        command: "compare",
        corpus: display(&args.corpus),
        report: display(&args.out),
        seed,
        files: files.len(),
        skipped,
        ranking,
        versions: Versions::current(),
        timing: elapsed_ms(start),
    })
}

pub fn aec_demo(args: AecDemoArgs) -> Result<()> {
    let start = Instant::now();
    if !(args.duration > 0.0 && args.duration.is_finite()) {
        return Err(CliError::Argument(format!(
            "--duration must be positive, got {}",
            args.duration
        )));
    }
    let scenario = AecScenario {
        duration_secs: args.duration,
        ..AecScenario::default()
    };
    let preset = args.preset.0;
    let seed = args.seed.seed;
    let cmp = mono_far_end_demo(&scenario, preset.map(|p| p.config()).as_ref(), seed)?;

    let mut csv = String::from(if cmp.decorrelated.is_some() {
        "block,baseline_db,decorrelated_db\n"
    } else {
        "block,baseline_db\n"
    });
    for (i, b) in cmp.baseline.values_db.iter().enumerate() {
        match &cmp.decorrelated {
            Some(d) => csv.push_str(&format!("{i},{b},{}\n", d.values_db[i])),
            None => csv.push_str(&format!("{i},{b}\n")),
        }
    }
    write_text(&args.out, &csv)?;
    let baseline_final = cmp
        .baseline
        .final_db()
        .ok_or_else(|| CliError::Argument("far-end too short for one adaptation block".into()))?;
    print_json(&AecReport {
        schema_version: SCHEMA_VERSION,
        command: "aec-demo",
        preset,
        seed,
        duration_secs: args.duration,
        blocks: cmp.baseline.values_db.len(),
        baseline_final_db: baseline_final,
        decorrelated_final_db: cmp.decorrelated.as_ref().and_then(|d| d.final_db()),
        improvement_db: cmp.improvement_db(),
        trace: display(&args.out),
        versions: Versions::current(),
        timing: elapsed_ms(start),
    })
}
