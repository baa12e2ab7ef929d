use std::fs::File;
use std::io::{BufWriter, Write};

use serde_json::json;

use hitstat::acceptance::{determinism, run_criterion, Scale};
use hitstat::estimators::{
    clt_from_samples, exp_law_fit, kac_check, lil_trace, mp_divergence_check, sa_from_samples,
    sample_recurrence, sojourn_tail_exponent, spectrum_estimate, RecurrenceKind, SampleKinds,
    SpectrumEstimate,
};
use hitstat::symbolic::{format_digits, Pattern};
use hitstat::thermo::Spectra;

use crate::config::RunConfig;
use crate::output::{num, opt, pretty, Csv, Output};
use crate::CliError;

/// What a command reports besides its files.
#[derive(Debug, Default)]
pub struct Outcome {
    pub warnings: Vec<String>,
}

pub fn generate(config: &RunConfig) -> Result<Outcome, CliError> {
    let source = config.source_spec()?;
    if source.alphabet() > 36 {
        return Err(CliError::Config("text streams support at most 36 symbols".into()));
    }
    let out = Output::create(&config.output_dir)?;
    out.record_run("generate", config)?;
    let path = out.path(&config.generate.file);
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut writer = BufWriter::new(File::create(&path).map_err(io)?);
    let length = config.generate.length;
    let mut stream = source.stream(0, length)?;
    let mut written = 0u64;
    while written < length {
        let chunk = stream.chunk();
        writer.write_all(format_digits(chunk).as_bytes()).map_err(io)?;
        let k = chunk.len();
        written += k as u64;
        stream.consume(k);
    }
    writer.flush().map_err(io)?;
    let meta = json!({
        "source": config.source,
        "seed": config.seed,
        "length": length,
        "alphabet": source.alphabet(),
    });
    out.write(&format!("{}.meta.json", config.generate.file), pretty(&meta))?;
    println!("wrote {length} symbols to {}", path.display());
    Ok(Outcome::default())
}

pub fn spectrum(config: &RunConfig, log2: bool) -> Result<Outcome, CliError> {
    let mut plan = config.spectrum_plan()?;
    let markov = plan.source.as_markov().ok_or(hitstat::Error::NotMarkov)?.clone();
    let spectra = Spectra::new(&markov)?;
    let out = Output::create(&config.output_dir)?;
    out.record_run("spectrum", config)?;
    let unit = if log2 { std::f64::consts::LN_2 } else { 1.0 };
    let scaled = |v: f64| num(v / unit);

    let mut exact = Csv::new(&["q", "M", "W", "Rhat"]);
    for &q in &plan.q_grid {
        exact.row(&[
            num(q),
            scaled(spectra.renyi_m(q)?),
            scaled(spectra.hitting_w(q)?),
            spectra.nonoverlap_rhat(q)?.map(scaled).unwrap_or_default(),
        ]);
    }
    out.write("exact.csv", exact.into_string())?;

    plan.kinds = if config.spectrum.returns {
        SampleKinds::ALL
    } else {
        SampleKinds::HITTING
    };
    let samples = sample_recurrence(&plan)?;
    let mut kinds = vec![RecurrenceKind::Hitting];
    if config.spectrum.returns {
        kinds.extend([RecurrenceKind::Return, RecurrenceKind::NonOverlapping]);
    }
    let estimates = kinds
        .iter()
        .map(|&k| spectrum_estimate(&samples, k, &plan.q_grid, plan.censoring))
        .collect::<hitstat::Result<Vec<SpectrumEstimate>>>()?;
    let mut columns = vec!["q"];
    for k in &kinds {
        columns.extend(match k {
            RecurrenceKind::Hitting => ["W_hat", "W_stderr"],
            RecurrenceKind::Return => ["R_hat", "R_stderr"],
            RecurrenceKind::NonOverlapping => ["Rhat_hat", "Rhat_stderr"],
        });
    }
    let mut table = Csv::new(&columns);
    for (i, &q) in plan.q_grid.iter().enumerate() {
        let mut cells = vec![num(q)];
        for est in &estimates {
            let p = &est.curve.points[i];
            cells.push(p.value.map(scaled).unwrap_or_default());
            cells.push(p.stderr.map(scaled).unwrap_or_default());
        }
        table.row(&cells);
    }
    out.write("estimated.csv", table.into_string())?;
    let warnings: Vec<String> = estimates.iter().flat_map(|e| e.warnings.clone()).collect();
    println!("wrote exact.csv and estimated.csv to {}", out.path("").display());
    Ok(Outcome { warnings })
}

pub fn fluctuations(config: &RunConfig) -> Result<Outcome, CliError> {
    let f = &config.fluctuations;
    let mut plan = config.plan(&f.n_grid, f.samples, f.budget)?;
    plan.epsilon = f.epsilon;
    let markov = plan.source.as_markov().ok_or(hitstat::Error::NotMarkov)?.clone();
    let spectra = Spectra::new(&markov)?;
    let (h, sigma2) = (spectra.entropy(), spectra.asymptotic_variance()?);
    if sigma2 == 0.0 {
        return Err(hitstat::Error::DegenerateSource.into());
    }
    let pattern = Pattern::from_digits(&f.pattern)?;
    let out = Output::create(&config.output_dir)?;
    out.record_run("fluctuations", config)?;
    let mut warnings = Vec::new();

    plan.kinds = SampleKinds {
        hitting: true,
        ret: true,
        non_overlapping: false,
    };
    let samples = sample_recurrence(&plan)?;
    let clt = clt_from_samples(&samples, h, sigma2, f.epsilon)?;
    let mut table = Csv::new(&[
        "n",
        "ks",
        "ks_return",
        "scaled_variance",
        "sigma2",
        "variance_ratio",
        "mean_log_w_over_n",
        "var_log_w_over_n",
        "censored",
    ]);
    for r in &clt {
        table.row(&[
            r.n.to_string(),
            num(r.ks),
            opt(r.ks_return),
            num(r.scaled_variance),
            num(r.sigma2),
            num(r.variance_ratio()),
            num(r.mean_log_w_over_n),
            num(r.var_log_w_over_n),
            num(r.censored_fraction),
        ]);
        if r.censored_fraction > 0.10 {
            warnings.push(format!("{:.1}% of scans censored at n = {}", 100.0 * r.censored_fraction, r.n));
        }
    }
    out.write("fluctuations.csv", table.into_string())?;

    let sa = sa_from_samples(&samples, f.epsilon)?;
    let mut table = Csv::new(&[
        "n",
        "lower",
        "upper",
        "undetermined",
        "lower_stderr",
        "upper_stderr",
        "r_lower",
        "r_upper",
    ]);
    for r in &sa {
        table.row(&[
            r.n.to_string(),
            num(r.lower),
            num(r.upper),
            num(r.undetermined),
            num(r.lower_stderr),
            num(r.upper_stderr),
            opt(r.r_lower),
            opt(r.r_upper),
        ]);
    }
    out.write("sa_bounds.csv", table.into_string())?;

    let lil = lil_trace(&plan.source, f.lil_n_min, f.lil_n_max, f.lil_budget)?;
    let mut table = Csv::new(&["n", "value"]);
    for (n, v) in &lil.points {
        table.row(&[n.to_string(), num(*v)]);
    }
    out.write("lil.csv", table.into_string())?;

    let fit = exp_law_fit(&plan.source, &pattern, f.fit_samples, f.fit_budget)?;
    let mut table = Csv::new(&["t_mu", "value"]);
    for b in &fit.band {
        table.row(&[num(b.t_mu), opt(b.value)]);
    }
    out.write("fit_band.csv", table.into_string())?;
    if fit.flagged {
        warnings.push(format!(
            "exponential fit: {:.1}% of scans censored",
            100.0 * fit.censored_fraction
        ));
    }
    let kac = kac_check(&plan.source, &pattern, f.kac_returns)?;

    let last = clt.last().expect("non-empty n grid");
    let sa_last = sa.last().expect("non-empty n grid");
    let summary = json!({
        "h": h,
        "sigma2": sigma2,
        "clt": {
            "n": last.n,
            "ks": last.ks,
            "ks_max": f.ks_max,
            "variance_ratio": last.variance_ratio(),
            "pass": last.ks <= f.ks_max && (last.variance_ratio() - 1.0).abs() <= f.variance_tolerance,
        },
        "sa": {
            "n": sa_last.n,
            "epsilon": f.epsilon,
            "lower": sa_last.lower,
            "upper": sa_last.upper,
            "undetermined": sa_last.undetermined,
            "pass": sa_last.lower < f.violation_max && sa_last.upper < f.violation_max,
        },
        "lil": {
            "max": lil.max,
            "last_n": lil.points.last().map(|p| p.0),
            "censored_at": lil.censored_at,
        },
        "fit": {
            "pattern": f.pattern,
            "mu": fit.mu,
            "rho_hat": fit.rho_hat,
            "ks": fit.ks,
            "band_ok": fit.band_ok,
            "zeta_hat": fit.zeta_hat,
            "censored": fit.censored_fraction,
            "flagged": fit.flagged,
        },
        "kac": {
            "pattern": f.pattern,
            "ratio": kac.ratio,
            "returns": kac.returns,
            "pass": (kac.ratio - 1.0).abs() <= f.kac_tolerance,
        },
    });
    out.write("summary.json", pretty(&summary))?;
    println!(
        "n = {}: KS {:.4}, variance ratio {:.3}; kac ratio {:.4}; lil max {:.3}",
        last.n,
        last.ks,
        last.variance_ratio(),
        kac.ratio,
        lil.max
    );
    Ok(Outcome { warnings })
}

pub fn mp(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.mp_params()?;
    let m = &config.mp;
    let out = Output::create(&config.output_dir)?;
    out.record_run("mp", config)?;
    let mut table = Csv::new(&["q", "doubling", "size", "moment", "growth"]);
    let mut reports = Vec::new();
    for &q in &m.q {
        let r = mp_divergence_check(params, config.seed, q, m.base, m.doublings)?;
        for (i, (&size, &moment)) in r.sizes.iter().zip(&r.moments).enumerate() {
            let growth = if i == 0 { String::new() } else { num(r.growth[i - 1]) };
            table.row(&[num(q), i.to_string(), size.to_string(), num(moment), growth]);
        }
        reports.push(r);
    }
    out.write("mp_growth.csv", table.into_string())?;
    let tail = sojourn_tail_exponent(params, config.seed, m.tail_budget)?;
    let mut table = Csv::new(&["alpha", "budget", "tail_exponent"]);
    table.row(&[num(params.alpha), m.tail_budget.to_string(), num(tail)]);
    out.write("mp_tail.csv", table.into_string())?;
    let per_q: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "q": r.q,
                "growth": r.growth,
                "mean_growth": r.mean_growth,
                "final_relative_change": r.final_relative_change,
                "diverging_branch": r.q >= 1.0 / params.alpha,
            })
        })
        .collect();
    let summary = json!({
        "alpha": params.alpha,
        "tail_exponent": tail,
        "expected_tail_exponent": 1.0 / params.alpha,
        "moments": per_q,
        "growth_min": m.growth_min,
        "stable_change_max": m.stable_change_max,
    });
    out.write("summary.json", pretty(&summary))?;
    for r in &reports {
        let factors: Vec<String> = r.growth.iter().map(|g| format!("{g:.3}")).collect();
        println!(
            "q = {}: growth per doubling [{}], final change {:.4}",
            r.q,
            factors.join(" "),
            r.final_relative_change
        );
    }
    println!("sojourn tail exponent {tail:.3} (1/alpha = {:.3})", 1.0 / params.alpha);
    Ok(Outcome::default())
}

/// Returns whether every selected criterion passed.
pub fn selftest(quick: bool, criteria: &[u8], seed: u64, out: &Output) -> Result<bool, CliError> {
    let scale = if quick { Scale::Quick } else { Scale::Full };
    let mut payload = String::from("# schema=1\ncriterion,key,value\n");
    let mut all = true;
    for &id in criteria {
        let outcome = match id {
            12 => determinism(seed)?,
            1..=11 => run_criterion(id, scale, seed)?,
            _ => return Err(CliError::Config(format!("no criterion {id}"))),
        };
        println!("{}", outcome.line());
        all &= outcome.pass;
        payload.push_str(&outcome.payload);
    }
    out.write("selftest.csv", payload)?;
    Ok(all)
}
