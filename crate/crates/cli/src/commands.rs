use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use zakharov_core::dynamics::{
    solitary_experiment, stability_experiment, ExperimentConfig, ExperimentRecord, Perturbation,
};
use zakharov_core::io::{fmt_f64, write_snapshot, WaveDocument};
use zakharov_core::spectral::{
    l3_operator, l3_verdict, l4_operator, l4_verdict, lame_operator, lame_verdict, periodic_spectrum,
    semiperiodic_spectrum,
};
use zakharov_core::wavefamily::{build_wave, family_sweep, geometric_grid};
use zakharov_core::{DnoidalWave, Error, Modulus};

use crate::{
    BoundaryArg, Command, ConstructArgs, EvolveArgs, Failure, Format, OperatorKind, Output, RunArgs,
    SolitaryArgs, SpectrumArgs, StabilityArgs, SweepArgs,
};

const LAME_GAPS: usize = 8;

pub fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Sweep(a) => sweep(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Evolve(a) => evolve(a),
        Command::Stability(a) => stability(a),
        Command::Solitary(a) => solitary(a),
    }
}

/// Data to `--out` (summary on stdout) or to stdout (summary on stderr).
fn emit(out: &Output, data: &str, summary: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => {
            fs::write(path, data)?;
            print!("{summary}");
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(data.as_bytes())?;
            so.flush()?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn json_line(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn construct(a: ConstructArgs) -> Result<(), Failure> {
    if a.samples < 2 {
        return Err(Failure::Usage(format!("--samples {} must be at least 2", a.samples)));
    }
    let w = build_wave(a.wave.l, a.wave.c, a.wave.nu)?;
    let doc = WaveDocument::new(&w, a.samples)?;
    let data = match a.output.format {
        Format::Csv => doc.to_csv(),
        Format::Json => doc.to_json()? + "\n",
    };
    let r = doc.residuals;
    let mut summary = format!(
        "residuals second_order={} quadrature={} coupled={}\n",
        fmt_f64(r.second_order),
        fmt_f64(r.quadrature),
        fmt_f64(r.coupled)
    );
    summary.push_str(&format!(
        "k={} omega={} eta1={} eta2={}\n",
        fmt_f64(w.params().k),
        fmt_f64(w.params().omega),
        fmt_f64(w.params().eta1),
        fmt_f64(w.params().eta2)
    ));
    if let Some(m) = w.gauge_mismatch() {
        summary.push_str(&format!("note: cL/(4pi) = {} is not an integer, so evolve rejects this wave\n", fmt_f64(m)));
    }
    emit(&a.output, &data, &summary)
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    if a.points < 2 {
        return Err(Failure::Usage(format!("--points {} must be at least 2", a.points)));
    }
    if !(a.nu_min > 0.0 && a.nu_max > a.nu_min && a.nu_max.is_finite()) {
        return Err(Failure::Usage(format!(
            "need 0 < nu-min < nu-max, got {} and {}",
            a.nu_min, a.nu_max
        )));
    }
    let table = family_sweep(a.l, a.c, &geometric_grid(a.nu_min, a.nu_max, a.points))?;
    let data = match a.output.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json()? + "\n",
    };
    let m = table.monotonicity();
    let summary = format!(
        "rows={} eta2_decreasing={} k_increasing={} mass_increasing={}\n",
        table.rows.len(),
        m.eta2_decreasing,
        m.k_increasing,
        m.mass_increasing
    );
    emit(&a.output, &data, &summary)?;
    if !m.all() {
        let mut failed = Vec::new();
        if !m.eta2_decreasing {
            failed.push("eta2 decreasing");
        }
        if !m.k_increasing {
            failed.push("k increasing");
        }
        if !m.mass_increasing {
            failed.push("mass increasing");
        }
        return Err(Failure::Verdict(format!("monotonicity failed: {}", failed.join(", "))));
    }
    Ok(())
}

fn verdict_block(name: &str, verdict: &Value, failures: &[&str]) -> String {
    let mut s = format!("verdict {name}: {}\n", if failures.is_empty() { "PASS" } else { "FAIL" });
    if let Value::Object(map) = verdict {
        for (key, v) in map {
            match v {
                Value::Bool(_) => s.push_str(&format!("  {key} = {v}\n")),
                Value::Number(n) if n.is_u64() => s.push_str(&format!("  {key} = {n}\n")),
                Value::Number(n) => s.push_str(&format!("  {key} = {}\n", fmt_f64(n.as_f64().unwrap_or(f64::NAN)))),
                _ => {}
            }
        }
    }
    for f in failures {
        s.push_str(&format!("  failed: {f}\n"));
    }
    s
}

fn spectrum(a: SpectrumArgs) -> Result<(), Failure> {
    if a.modes == 0 {
        return Err(Failure::Usage("--modes must be positive".into()));
    }
    let wave = match (a.l, a.nu) {
        (Some(l), Some(nu)) => Some(build_wave(l, a.c, nu)?),
        _ => None,
    };
    let need_wave = || -> Result<&DnoidalWave, Failure> {
        wave.as_ref()
            .ok_or_else(|| Failure::Usage("--L and --nu are required for this operator".into()))
    };
    let (name, op, verdict, failures) = match a.operator {
        OperatorKind::L3 => {
            let w = need_wave()?;
            let v = l3_verdict(w, a.n)?;
            ("L3", l3_operator(w, a.n)?, serde_json::to_value(&v)?, v.failures())
        }
        OperatorKind::L4 => {
            let w = need_wave()?;
            let v = l4_verdict(w, a.n)?;
            ("L4", l4_operator(w, a.n)?, serde_json::to_value(&v)?, v.failures())
        }
        OperatorKind::Lame => {
            let modulus = match a.k {
                Some(k) => Modulus::from_k(k)?,
                None => need_wave()?.modulus(),
            };
            let v = lame_verdict(modulus, LAME_GAPS, a.n)?;
            ("lame", lame_operator(modulus, a.n)?, serde_json::to_value(&v)?, v.failures())
        }
    };
    let spec = match a.boundary {
        BoundaryArg::Periodic => periodic_spectrum(&op, a.modes)?,
        BoundaryArg::Semiperiodic => semiperiodic_spectrum(&op, a.modes)?,
    };
    let data = match a.output.format {
        Format::Csv => spec.to_csv(),
        Format::Json => {
            let spectrum: Value = serde_json::from_str(&spec.to_json(a.with_vectors)?)?;
            json_line(&json!({ "operator": name, "spectrum": spectrum, "verdict": verdict }))
        }
    };
    emit(&a.output, &data, &verdict_block(name, &verdict, &failures))?;
    if !failures.is_empty() {
        return Err(Failure::Verdict(format!("{name} verdict failed: {}", failures.join("; "))));
    }
    Ok(())
}

fn experiment_config(r: &RunArgs) -> Result<ExperimentConfig, Failure> {
    if !(r.delta >= 0.0 && r.delta.is_finite()) {
        return Err(Failure::Usage(format!("--delta {} must be finite and non-negative", r.delta)));
    }
    if r.delta > 0.0 && r.seed.is_none() {
        return Err(Failure::Usage("--seed is required when --delta > 0".into()));
    }
    Ok(ExperimentConfig {
        n: r.n,
        t_end: r.t_end,
        dt: r.dt,
        save_interval: r.save_interval,
        integrator: r.integrator,
        perturbation: Perturbation {
            delta: r.delta,
            seed: r.seed.unwrap_or(0),
            respect_mean_condition: r.respect_mean_condition,
            renormalize: r.renormalize,
        },
    })
}

fn finish(r: &RunArgs, record: ExperimentRecord) -> Result<(), Failure> {
    let data = match r.output.format {
        Format::Csv => record.to_csv(),
        Format::Json => record.to_json()? + "\n",
    };
    let s = record.summary();
    let mut summary = format!(
        "samples={} t_final={} steps={} dt={}\n",
        s.samples,
        fmt_f64(s.t_final),
        record.meta.steps,
        fmt_f64(record.meta.dt)
    );
    summary.push_str(&format!(
        "max relative drift E={} Q1={} Q2={}\n",
        fmt_f64(s.drift_e),
        fmt_f64(s.drift_q1),
        fmt_f64(s.drift_q2)
    ));
    summary.push_str(&format!(
        "sup rho_nu={} delta_B(0)={} max |delta_B(t)-delta_B(0)|={}\n",
        fmt_f64(s.sup_rho),
        fmt_f64(s.delta_b0),
        fmt_f64(s.delta_b_change)
    ));
    emit(&r.output, &data, &summary)?;
    if let (Some(path), Some(state)) = (&r.snapshot, &record.last_state) {
        write_snapshot(Path::new(path), &record.meta.grid, state)?;
    }
    record.into_result()?;
    Ok(())
}

fn evolve(a: EvolveArgs) -> Result<(), Failure> {
    let cfg = experiment_config(&a.run)?;
    let wave = match (&a.wave_file, a.l, a.nu) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            WaveDocument::from_json(&text)?.rebuild()?
        }
        (None, Some(l), Some(nu)) => build_wave(l, a.c, nu)?,
        _ => return Err(Failure::Usage("give --wave-file or both --L and --nu".into())),
    };
    finish(&a.run, stability_experiment(&wave, &cfg)?)
}

fn stability(a: StabilityArgs) -> Result<(), Failure> {
    if a.run.seed.is_none() || !(a.run.delta > 0.0) {
        return Err(Failure::Usage("stability needs --delta > 0 and --seed".into()));
    }
    let cfg = experiment_config(&a.run)?;
    let wave = build_wave(a.wave.l, a.wave.c, a.wave.nu)?;
    finish(&a.run, stability_experiment(&wave, &cfg)?)
}

fn solitary(a: SolitaryArgs) -> Result<(), Failure> {
    let cfg = experiment_config(&a.run)?;
    let record = solitary_experiment(a.omega, a.c, a.box_factor, &cfg)?;
    finish(&a.run, record)
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(Error::Json(e))
    }
}
