use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};

use speechdiff::distortion::{butterworth, provenance, resample::resample, DistortionChain, PassKind, Pools};
use speechdiff::io::{read_wav, write_wav, RunConfig, SampleFormat};
use speechdiff::metrics::{snr_db, MetricReport};
use speechdiff::rng::{derive_seed, derived_source};
use speechdiff::sampler::{forward_simulate, reverse_simulate, ReverseSchedule};
use speechdiff::score::{
    compare_on_grid, gaussian_marginal_score, train_toy, zero_score, GaussianPairTask, IdentityPredictor, NetScore,
    OraclePredictor, OracleScore, PredictiveEstimator, ScoreFunction, SpectralSubtraction, ToyScoreNet, DSM_T_MIN,
};
use speechdiff::sde::{DiffusionTime, SdeParams};
use speechdiff::signal::{amplitude_transform, enhance, stft, StftConfig, Waveform, DEFAULT_SAMPLE_RATE};

use crate::{
    Command, DistortArgs, EnhanceArgs, KernelCheckArgs, MetricsArgs, Mode, SdeArgs, SimulateArgs, SrFilterArgs,
    TrainToyArgs,
};

/// Prior spread around the predictive magnitude for the `analytic` score.
const ANALYTIC_PRIOR_STD: f64 = 0.05;

/// Bad arguments detected by the CLI itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Invalid>().is_some() {
        return 2;
    }
    match e.downcast_ref::<speechdiff::Error>() {
        Some(err) if err.is_validation() => 2,
        _ => 3,
    }
}

pub fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::KernelCheck(a) => kernel_check(a),
        Command::Simulate(a) => simulate(a),
        Command::Enhance(a) => enhance_cmd(a),
        Command::Distort(a) => distort(a),
        Command::TrainToy(a) => train(a),
        Command::Metrics(a) => metrics(a),
        Command::SrFilter(a) => sr_filter(a),
    }
}

fn set(cfg: &mut RunConfig, key: &str, value: Option<String>) -> Result<()> {
    if let Some(v) = value {
        cfg.set(key, &v).map_err(|e| invalid(format!("--{}: {e}", key.rsplit('.').next().unwrap_or(key))))?;
    }
    Ok(())
}

fn run_config(a: &SdeArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    set(&mut cfg, "sde.kind", a.sde.clone())?;
    set(&mut cfg, "sde.k", a.k.map(|v| v.to_string()))?;
    set(&mut cfg, "sde.c", a.c.map(|v| v.to_string()))?;
    set(&mut cfg, "sde.gamma", a.gamma.map(|v| v.to_string()))?;
    set(&mut cfg, "sde.T", a.horizon.map(|v| v.to_string()))?;
    set(&mut cfg, "seed", a.seed.map(|v| v.to_string()))?;
    Ok(cfg)
}

fn print_header(cfg: &RunConfig) {
    print!("# speechdiff {}\n{}", env!("CARGO_PKG_VERSION"), cfg.header());
}

fn seeded_default(seed: u64) -> RunConfig {
    RunConfig { seed, ..RunConfig::default() }
}

fn csv_out(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Read a mono WAV, resampling to `rate` with a warning when needed.
fn load(path: &Path, rate: u32) -> Result<Waveform> {
    let w = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
    if w.sample_rate() == rate {
        return Ok(w);
    }
    eprintln!("warning: {} is {} Hz; resampling to {} Hz", path.display(), w.sample_rate(), rate);
    Ok(Waveform::new(resample(w.samples(), w.sample_rate(), rate)?, rate)?)
}

fn format(s: &str) -> Result<SampleFormat> {
    Ok(s.parse::<SampleFormat>()?)
}

fn kernel_check(a: KernelCheckArgs) -> Result<ExitCode> {
    let cfg = run_config(&a.sde)?;
    print_header(&cfg);
    let sde = cfg.sde()?;
    if a.tolerance.is_nan() || a.tolerance <= 0.0 {
        return Err(invalid("--tolerance must be positive"));
    }
    let stats = forward_simulate(&sde, a.x0, a.y, a.steps, a.paths, derive_seed(cfg.seed, "kernel-check", 0))?;
    let mut rows = Vec::new();
    let (mut worst_mean, mut worst_std) = (0.0f64, 0.0f64);
    for j in 1..=9 {
        let i = stats.nearest(j as f64 / 10.0 * sde.horizon().min(1.0)).expect("non-empty trajectory");
        let t = sde.time(stats.times[i])?;
        let m = sde.kernel_mean(&[a.x0], &[a.y], t)?[0];
        let s = sde.kernel_std(t)?;
        let (mc_m, mc_s) = (stats.mean[i], stats.variance[i].sqrt());
        let rm = (mc_m - m).abs() / m.abs().max(1e-12);
        let rs = (mc_s - s).abs() / s.max(1e-12);
        worst_mean = worst_mean.max(rm);
        worst_std = worst_std.max(rs);
        rows.push([t.value(), mc_m, m, mc_s, s, rm, rs]);
    }
    if let Some(out) = &a.out {
        let mut w = csv_out(out)?;
        writeln!(w, "t,mc_mean,kernel_mean,mc_std,kernel_std,rel_dev_mean,rel_dev_std")?;
        for r in &rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
    }
    println!(
        "{} paths, {} steps: max relative deviation mean {:.4}%, std {:.4}%",
        a.paths,
        a.steps,
        100.0 * worst_mean,
        100.0 * worst_std
    );
    if worst_mean > a.tolerance || worst_std > a.tolerance {
        eprintln!("kernel check failed: deviation exceeds {:.2}%", 100.0 * a.tolerance);
        return Ok(ExitCode::from(2));
    }
    println!("kernel check passed (tolerance {:.2}%)", 100.0 * a.tolerance);
    Ok(ExitCode::SUCCESS)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let cfg = run_config(&a.sde)?;
    print_header(&cfg);
    let sde = cfg.sde()?;
    let stats = match a.mode {
        Mode::Forward => forward_simulate(
            &sde,
            a.x0,
            a.y,
            a.steps.unwrap_or(1000),
            a.paths,
            derive_seed(cfg.seed, "simulate-forward", 0),
        )?,
        Mode::Reverse => {
            let n = a.steps.unwrap_or(cfg.steps);
            let schedule = match a.trs {
                Some(t) => ReverseSchedule::truncated(&sde, n, t)?,
                None => ReverseSchedule::full(&sde, n)?,
            };
            let x0 = a.x0;
            reverse_simulate(
                &sde,
                |_| OracleScore::new(sde, vec![x0]),
                a.x0,
                a.y,
                &schedule,
                a.paths,
                derive_seed(cfg.seed, "simulate-reverse", 0),
            )?
        }
    };
    stats.write_csv(csv_out(&a.out)?)?;
    println!("wrote {} time points over {} paths to {}", stats.times.len(), stats.n_paths, a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn enhance_cmd(a: EnhanceArgs) -> Result<ExitCode> {
    let mut cfg = run_config(&a.sde)?;
    set(&mut cfg, "fusion.alpha", a.alpha.map(|v| v.to_string()))?;
    set(&mut cfg, "sampler.trs", a.trs.map(|v| v.to_string()))?;
    set(&mut cfg, "sampler.steps", a.steps.map(|v| v.to_string()))?;
    set(&mut cfg, "enhance.pred", a.pred.clone())?;
    set(&mut cfg, "enhance.score", a.score.clone())?;
    print_header(&cfg);
    let ec = cfg.enhance_config()?;
    let out_format = format(&a.format)?;

    let degraded = load(&a.input, DEFAULT_SAMPLE_RATE)?;
    let clean = match &a.clean {
        Some(p) => {
            let c = load(p, DEFAULT_SAMPLE_RATE)?;
            if c.len() != degraded.len() {
                return Err(invalid(format!(
                    "clean reference has {} samples, degraded input has {}",
                    c.len(),
                    degraded.len()
                )));
            }
            Some(c)
        }
        None => None,
    };
    let clean_compressed = match &clean {
        Some(c) => Some(amplitude_transform(&stft(c, &ec.stft)?, &ec.transform)?),
        None => None,
    };
    let need_clean = |what: &str| invalid(format!("{what} requires --clean"));

    let predictor: Box<dyn PredictiveEstimator> = match cfg.pred.as_str() {
        "identity" => Box::new(IdentityPredictor),
        "oracle" => Box::new(OraclePredictor::new(
            clean_compressed.clone().ok_or_else(|| need_clean("--pred oracle"))?,
        )),
        _ => Box::new(SpectralSubtraction::default().with_exponent(1.0 / cfg.beta1)?),
    };

    let sde = ec.sde;
    let score: Box<dyn ScoreFunction + Send + Sync> = match cfg.score.as_str() {
        "oracle" => Box::new(OracleScore::new(
            sde,
            clean_compressed.as_ref().ok_or_else(|| need_clean("--score oracle"))?.magnitude(),
        )),
        "zero" => Box::new(zero_score),
        "analytic" => {
            let y = amplitude_transform(&stft(&degraded, &ec.stft)?, &ec.transform)?;
            let m0 = predictor.predict(&y)?.magnitude();
            Box::new(move |x: &[f64], y: &[f64], t: DiffusionTime| {
                x.iter()
                    .zip(y)
                    .zip(&m0)
                    .map(|((&x, &y), &m)| gaussian_marginal_score(&sde, x, y, m, ANALYTIC_PRIOR_STD, t))
                    .collect::<speechdiff::Result<Vec<f64>>>()
            })
        }
        spec => {
            let path = PathBuf::from(spec.strip_prefix("model:").unwrap_or(spec));
            let file = File::open(&path).with_context(|| format!("opening model {}", path.display()))?;
            let net = ToyScoreNet::read_from(std::io::BufReader::new(file))?;
            Box::new(NetScore::new(net, sde))
        }
    };

    let mut rng = derived_source(cfg.seed, "enhance", 0);
    let out = enhance(&degraded, &predictor, &score, &ec, &mut rng)?;
    write_wav(&a.out, &out.waveform, out_format)?;
    println!(
        "enhanced {} samples: {} frames x {} bins, {} reverse steps from t = {}",
        degraded.len(),
        out.frames,
        out.bins,
        ec.schedule.steps_executed(),
        ec.schedule.start()
    );
    if let Some(c) = &clean {
        println!("snr vs clean: {:.3} dB", snr_db(c.samples(), out.waveform.samples())?);
    }
    Ok(ExitCode::SUCCESS)
}

fn load_dir(dir: Option<&Path>, rate: u32) -> Result<Vec<Waveform>> {
    let Some(dir) = dir else { return Ok(Vec::new()) };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    paths.iter().map(|p| load(p, rate)).collect()
}

fn distort(a: DistortArgs) -> Result<ExitCode> {
    print_header(&seeded_default(a.seed));
    let out_format = format(&a.format)?;
    let clean = read_wav(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let noise = load_dir(a.noise_dir.as_deref(), clean.sample_rate())?;
    let rir = load_dir(a.rir_dir.as_deref(), clean.sample_rate())?;
    let pools = Pools { noise: &noise, rir: &rir };
    let mut rng = derived_source(a.seed, "distort", 0);
    let (degraded, plan) = DistortionChain::default().sample_chain(&clean, &pools, &mut rng)?;
    write_wav(&a.out, &degraded, out_format)?;
    let log = a.log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".log");
        PathBuf::from(p)
    });
    let text = provenance(&plan);
    fs::write(&log, &text).with_context(|| format!("writing {}", log.display()))?;
    print!("{text}");
    println!("{} stages applied; provenance in {}", plan.len(), log.display());
    Ok(ExitCode::SUCCESS)
}

fn train(a: TrainToyArgs) -> Result<ExitCode> {
    print_header(&seeded_default(a.seed));
    if a.epochs == 0 || a.pairs == 0 {
        return Err(invalid("--epochs and --pairs must be positive"));
    }
    let sde = SdeParams::bbed_default();
    let task = GaussianPairTask::default();
    let data = task.sample_pairs(a.pairs, &mut derived_source(a.seed, "train-data", 0))?;
    let net = ToyScoreNet::new(task.dim, a.hidden, &mut derived_source(a.seed, "train-init", 0))?;
    let report = train_toy(net, &sde, &data, a.epochs, a.lr, &mut derived_source(a.seed, "train-sgd", 0))?;
    for (i, l) in report.history.iter().enumerate() {
        println!("epoch {:>5} loss {l:.6}", i + 1);
    }
    if let Some(h) = &a.history {
        let mut w = csv_out(h)?;
        writeln!(w, "epoch,loss")?;
        for (i, l) in report.history.iter().enumerate() {
            writeln!(w, "{},{l}", i + 1)?;
        }
        w.flush()?;
    }
    let ys = [1.1, 1.3, 1.5, 1.7, 1.9];
    let cmp = compare_on_grid(&sde, &NetScore::new(report.net.clone(), sde), &task, DSM_T_MIN, 20, 21, &ys)?;
    println!(
        "score mse {:.6} vs zero-score baseline {:.6} (ratio {:.4})",
        cmp.mse,
        cmp.baseline_mse,
        cmp.ratio()
    );
    let mut w = BufWriter::new(File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?);
    report.net.write_to(&mut w)?;
    w.flush()?;
    println!("saved model to {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn metrics(a: MetricsArgs) -> Result<ExitCode> {
    print_header(&RunConfig::default());
    let r = read_wav(&a.reference).with_context(|| format!("reading {}", a.reference.display()))?;
    let e = read_wav(&a.est).with_context(|| format!("reading {}", a.est.display()))?;
    if r.sample_rate() != e.sample_rate() {
        return Err(invalid(format!("sample rates differ: {} vs {}", r.sample_rate(), e.sample_rate())));
    }
    if r.len() != e.len() {
        return Err(invalid(format!("lengths differ: {} vs {} samples", r.len(), e.len())));
    }
    let m = MetricReport::compute(&r, &e, &StftConfig::default())?;
    let id = a.est.file_name().map_or_else(|| a.est.display().to_string(), |n| n.to_string_lossy().into_owned());
    let rows = [(id, m)];
    match &a.out {
        Some(p) => MetricReport::write_csv(&rows, csv_out(p)?)?,
        None => MetricReport::write_csv(&rows, std::io::stdout().lock())?,
    }
    println!(
        "lsd {:.6} ssim {:.6} snr {:.3} dB si-snr {:.3} dB",
        m.lsd, m.ssim, m.snr_db, m.si_snr_db
    );
    Ok(ExitCode::SUCCESS)
}

fn sr_filter(a: SrFilterArgs) -> Result<ExitCode> {
    print_header(&RunConfig::default());
    let out_format = format(&a.format)?;
    let w = read_wav(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let f = butterworth(a.order, a.cutoff, w.sample_rate() as f64, PassKind::Low)?;
    let y = w.with_samples(f.apply(w.samples()))?;
    write_wav(&a.out, &y, out_format)?;
    println!("order-{} low-pass at {} Hz applied to {} samples", a.order, a.cutoff, w.len());
    Ok(ExitCode::SUCCESS)
}
