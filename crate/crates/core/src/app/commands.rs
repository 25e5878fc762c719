use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimate::{convergence_study, cross_validate};
use crate::forecast::{fit_matern, generate_scenarios, read_scenarios_binary, ForecastModel, GermSource};
use crate::grid::GridCase;
use crate::lp::write_lp;
use crate::rng;
use crate::sed::{build_instance, DispatchEvaluator, DispatchSolution};
use crate::wind::{
    compare_to_normal, distance_correlation, empirical_covariance, hourly_average, kl_decompose, read_wind_csv,
    write_wind_csv, PowerCurve, SyntheticWind, WindRecord, HOURS,
};

/// Collects the files a command writes, for the manifest.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Output { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// `manifest.json`: command, config digest, seed, version and a digest of
    /// every output. Nothing time-dependent, so reruns are byte-identical.
    pub fn finish(mut self, command: &str, config_digest: &str, seed: u64) -> Result<Vec<String>> {
        let mut outputs = BTreeMap::new();
        for f in &self.files {
            let path = self.dir.join(f);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            outputs.insert(f.clone(), hex::encode(Sha256::digest(&bytes)));
        }
        let manifest = serde_json::json!({
            "command": command,
            "config_sha256": config_digest,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "outputs": outputs,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        self.write("manifest.json", text)?;
        Ok(self.files)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn synthetic_records(cfg: &ExperimentConfig) -> Result<Vec<(String, Vec<WindRecord>)>> {
    let w = cfg
        .wind
        .as_ref()
        .ok_or_else(|| Error::config("missing [wind] section"))?;
    let syn = w
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::config("missing [wind.synthetic] section"))?;
    let curve = PowerCurve::default_turbine();
    syn.sites
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let gen = SyntheticWind {
                mean_profile: SyntheticWind::diurnal(s.level, s.amplitude),
                kernel: crate::forecast::MaternKernel::new(s.length_scale, s.smoothness, s.sigma * s.sigma)
                    .map_err(|e| Error::config(format!("synthetic site {}: {e}", s.label)))?,
                intraday_noise: syn.intraday_noise,
                nameplate: s.nameplate,
                start: syn.start,
                seed: rng::derive_seed(cfg.seed, &[k as u64]),
            };
            Ok((s.label.clone(), gen.records(syn.days, &curve)?))
        })
        .collect()
}

fn write_records(out: &mut Output, label: &str, records: &[WindRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_wind_csv(records, &mut buf).map_err(|e| Error::io(out.dir().join(label), e))?;
    out.write(&format!("wind/{label}.csv"), buf)?;
    Ok(())
}

/// Writes synthetic 10-minute wind files.
pub fn synth_wind(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    for (label, records) in synthetic_records(cfg)? {
        write_records(out, &label, &records)?;
    }
    Ok(())
}

/// KL bases and diagnostics for every wind site.
pub fn kl(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let w = cfg
        .wind
        .as_ref()
        .ok_or_else(|| Error::config("missing [wind] section"))?;
    let n_keep = w.truncation;
    if n_keep == 0 || n_keep > HOURS {
        return Err(Error::config(format!("wind.truncation must be in 1..={HOURS}")));
    }
    let mut inputs: Vec<(String, Vec<WindRecord>)> = Vec::new();
    for f in &w.sites {
        inputs.push((f.label.clone(), read_wind_csv(cfg.existing(&f.path, "wind file")?)?));
    }
    if w.synthetic.is_some() {
        for (label, records) in synthetic_records(cfg)? {
            write_records(out, &label, &records)?;
            inputs.push((label, records));
        }
    }
    if inputs.is_empty() {
        return Err(Error::config("no wind sites configured"));
    }

    let mut summary = String::from("site,days_kept,days_dropped,total_variance,variance_fraction,degenerate\n");
    let mut fractions = String::from("site,modes,percent\n");
    let mut ks = String::from("site,mode,ks_distance\n");
    let mut fits = String::from("site,length_scale,smoothness,residual\n");
    // Per site: germs by date, for cross-site dependence.
    let mut germs: Vec<(String, BTreeMap<NaiveDate, Vec<f64>>)> = Vec::new();
    for (label, records) in &inputs {
        let (set, report) = hourly_average(label, records)?;
        for (line, why) in &report.rejected {
            log::warn!("{label}: record {line} rejected: {why}");
        }
        let cov = empirical_covariance(&set.samples)?;
        let basis = kl_decompose(&cov, &set.mean())?;
        let total = basis.total_variance();
        // Rounding in the log transform leaves ~1e-30 on a constant field.
        let scale: f64 = set.mean().iter().map(|m| m * m).sum::<f64>().max(1.0);
        let degenerate = total <= 1e-12 * scale;
        if degenerate {
            log::warn!("{label}: wind field is constant; all eigenvalues are zero");
        }
        summary.push_str(&format!(
            "{label},{},{},{total:?},{:?},{degenerate}\n",
            report.days_kept,
            report.days_dropped,
            basis.variance_fraction(n_keep)?
        ));
        for n in 1..=HOURS {
            fractions.push_str(&format!("{label},{n},{:?}\n", basis.variance_fraction(n)?));
        }
        out.write(&format!("kl/{label}.kl"), basis.to_text())?;
        let projected = basis.project_samples(&set)?;
        for k in 0..n_keep {
            if projected.skipped.contains(&k) {
                continue;
            }
            ks.push_str(&format!(
                "{label},{},{:?}\n",
                k + 1,
                compare_to_normal(&projected.xi.col(k))?
            ));
        }
        match fit_matern(&cov) {
            Ok(f) => fits.push_str(&format!(
                "{label},{:?},{:?},{:?}\n",
                f.kernel.length_scale, f.kernel.smoothness, f.residual
            )),
            Err(e) => {
                log::warn!("{label}: Matern fit failed: {e}");
                fits.push_str(&format!("{label},NaN,NaN,NaN\n"));
            }
        }
        let by_date = set
            .dates
            .iter()
            .enumerate()
            .map(|(i, d)| (*d, projected.xi.row(i)[..n_keep].to_vec()))
            .collect();
        germs.push((label.clone(), by_date));
    }

    let mut dcor = String::from("site_a,site_b,mode,days,dcor\n");
    for a in 0..germs.len() {
        for b in a + 1..germs.len() {
            let common: Vec<NaiveDate> = germs[a]
                .1
                .keys()
                .filter(|d| germs[b].1.contains_key(d))
                .copied()
                .collect();
            if common.len() < 2 {
                log::warn!("{} and {} share fewer than two days", germs[a].0, germs[b].0);
                continue;
            }
            for k in 0..n_keep.min(4) {
                let x: Vec<f64> = common.iter().map(|d| germs[a].1[d][k]).collect();
                let y: Vec<f64> = common.iter().map(|d| germs[b].1[d][k]).collect();
                dcor.push_str(&format!(
                    "{},{},{},{},{:?}\n",
                    germs[a].0,
                    germs[b].0,
                    k + 1,
                    common.len(),
                    distance_correlation(&x, &y)?
                ));
            }
        }
    }
    out.write("kl/summary.csv", summary)?;
    out.write("kl/variance_fraction.csv", fractions)?;
    out.write("kl/ks.csv", ks)?;
    out.write("kl/matern_fit.csv", fits)?;
    out.write("kl/dcor.csv", dcor)?;
    Ok(())
}

fn forecast_model(cfg: &ExperimentConfig, case: Option<&GridCase>) -> Result<ForecastModel> {
    ForecastModel::new(&cfg.forecast_spec(case)?)
}

pub fn scenarios(cfg: &ExperimentConfig, out: &mut Output, count: usize, binary: bool) -> Result<()> {
    let case = match cfg.case {
        Some(_) => Some(cfg.load_case()?),
        None => None,
    };
    let model = forecast_model(cfg, case.as_ref())?;
    let set = generate_scenarios(&model, &GermSource::Normal { seed: cfg.seed, count })?;
    let mut buf = Vec::new();
    if binary {
        set.write_binary(&mut buf).map_err(|e| Error::io(out.dir(), e))?;
        out.write("scenarios.bin", buf)?;
    } else {
        set.write_csv(&mut buf).map_err(|e| Error::io(out.dir(), e))?;
        out.write("scenarios.csv", buf)?;
    }
    Ok(())
}

pub enum DispatchInput {
    /// Germ for the configured forecast; `None` means the mean forecast.
    Germ(Option<Vec<f64>>),
    /// Scenario `index` of a binary scenario dump.
    Scenario { path: PathBuf, index: usize },
}

pub fn dispatch(
    cfg: &ExperimentConfig,
    out: &mut Output,
    input: DispatchInput,
    dump_lp: bool,
) -> Result<DispatchSolution> {
    let case = cfg.load_case()?;
    let opts = cfg.dispatch_options();
    let renewable: Vec<Vec<f64>> = match input {
        DispatchInput::Germ(germ) if cfg.forecast.is_some() => {
            let model = forecast_model(cfg, Some(&case))?;
            let germ = germ.unwrap_or_else(|| vec![0.0; model.dims()]);
            let ev = DispatchEvaluator::new(case.clone(), model, &opts)?;
            let flat = ev.renewable(&germ)?;
            flat.chunks(HOURS).map(<[f64]>::to_vec).collect()
        }
        DispatchInput::Germ(Some(_)) => return Err(Error::config("a germ needs a [forecast] section")),
        DispatchInput::Germ(None) => vec![vec![0.0; case.periods]; case.renewables.len()],
        DispatchInput::Scenario { path, index } => {
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let set = read_scenarios_binary(std::io::BufReader::new(file))?;
            if index >= set.len() {
                return Err(Error::invalid(format!("scenario {index} outside 0..{}", set.len())));
            }
            case.renewables
                .iter()
                .map(|r| {
                    let k = set
                        .site_labels
                        .iter()
                        .position(|l| *l == r.label)
                        .ok_or_else(|| Error::data(format!("scenario file has no site {}", r.label)))?;
                    Ok(set.site_power(index, k).to_vec())
                })
                .collect::<Result<_>>()?
        }
    };
    let inst = build_instance(&case, &renewable, &opts)?;
    if dump_lp {
        out.write("dispatch.lp", write_lp(&inst.lp))?;
    }
    let sol = inst.solve(&case, &opts.lp)?;
    let mut buf = Vec::new();
    sol.write_csv(&case, &mut buf).map_err(|e| Error::io(out.dir(), e))?;
    out.write("dispatch.csv", buf)?;
    let production = sol.production_cost(&case, &inst.costs);
    let shed = sol.shed_cost(&case);
    out.write(
        "summary.csv",
        format!(
            "key,value\nstatus,{}\nobjective,{:?}\nproduction_cost,{production:?}\nshed_cost,{shed:?}\nshed_mwh,{:?}\nspill_mwh,{:?}\n",
            sol.status,
            sol.objective,
            sol.shed.iter().flatten().sum::<f64>(),
            sol.spill.iter().flatten().sum::<f64>()
        ),
    )?;
    Ok(sol)
}

pub fn study(cfg: &ExperimentConfig, out: &mut Output, verify: bool) -> Result<()> {
    let case = cfg.load_case()?;
    let model = forecast_model(cfg, Some(&case))?;
    let (opts, cv_samples) = cfg.study_options()?;
    let ev = DispatchEvaluator::new(case, model, &cfg.dispatch_options())?;
    log::info!(
        "germ dimension {}, mean-forecast cost {:.2}",
        ev.forecast().dims(),
        ev.mean_forecast_cost()
    );
    let report = convergence_study(&ev, &opts)?;
    if verify {
        report.verify()?;
        log::info!("report checks passed");
    }
    out.write("report.csv", report.to_csv())?;
    out.write("plot.csv", report.to_plot_table())?;
    out.write("fits.csv", report.fits_csv())?;
    if let Some(s) = &report.surrogate {
        out.write("surrogate.pce", s.to_text())?;
        if cv_samples > 0 {
            let cv = cross_validate(s, &ev, cv_samples, rng::derive_seed(cfg.seed, &[0x6376]))?;
            let mut text = String::from("quantile,error_percent\n");
            for q in [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0] {
                text.push_str(&format!("{q},{:?}\n", cv.quantile(q)));
            }
            out.write("cross_validation.csv", text)?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    for r in &report.pce {
        let _ = writeln!(stdout, "level {} ({} nodes): c0 = {:.6}", r.level, r.nodes, r.mean);
    }
    if let (Some(p), Some(m)) = (report.pce_fit, report.mc_fit) {
        let _ = writeln!(stdout, "fitted exponents: pce b = {:.3}, mc b = {:.3}", p.b, m.b);
    }
    Ok(())
}
