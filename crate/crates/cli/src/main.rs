use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use hyperschur::blaschke::{blaschke_product, verify_zeros};
use hyperschur::kernels::{neg_squares, schur_kernel_coeffs};
use hyperschur::qmat::right_eigen_spheres;
use hyperschur::realize::{congruence_residuals, krein_langer_factor, realize, stein_residual};
use hyperschur::sspec::{projector_identities_with, riesz_projector, spectral_split};
use hyperschur::verify::{run_suite, Report, VerifyConfig, SUITES};
use hyperschur::{Blaschke, Contour, Error, QMat, Quat, Realization, Series, Unit};

#[derive(Parser)]
#[command(name = "hyperschur", version, about = "Quaternionic spectra, slice series and Schur analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Replaces the default tolerance of every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Right-eigenvalue spheres of a square matrix.
    Spectrum { matrix: String },
    /// Riesz projector for a circle in a slice, with its residuals and the spectral split.
    Sspec {
        matrix: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        center: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, value_parser = parse_slice, default_value = "1,0,0")]
        slice: Unit,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
    },
    /// Inertia table of the Schur kernel of a series.
    Negsq {
        series: String,
        #[arg(long, default_value_t = 10)]
        mu_max: usize,
        /// Signature of the input space (defaults to I).
        #[arg(long)]
        sigma1: Option<String>,
        /// Signature of the output space (defaults to I).
        #[arg(long)]
        sigma2: Option<String>,
    },
    /// Blaschke product of a zero specification, with a zero check.
    Blaschke {
        spec: String,
        #[arg(long, default_value_t = 48)]
        degree: usize,
    },
    /// Stein solve and completion of `{"a", "c", "sigma"}`.
    Realize {
        input: String,
        #[arg(long, default_value_t = 16)]
        degree: usize,
    },
    /// Krein-Langer factorization of a realization with sigma = I.
    KlFactor {
        realization: String,
        #[arg(long, default_value_t = 24)]
        degree: usize,
        #[arg(long, default_value_t = 10)]
        mu_max: usize,
    },
    /// Runs a property suite, or `all`.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 10)]
        mu_max: usize,
        #[arg(long, value_parser = parse_slice)]
        slice: Option<Unit>,
    },
}

fn parse_slice(s: &str) -> Result<Unit, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c] => Unit::new(a, b, c).ok_or_else(|| "slice direction must be nonzero".into()),
        _ => Err("expected x1,x2,x3".into()),
    }
}

enum Fail {
    Numeric(String),
    Parse(String),
    Usage(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => Fail::Parse(m),
            other => Fail::Numeric(other.to_string()),
        }
    }
}

/// Command result: JSON body, a table for text/csv and the overall verdict.
struct Output {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    notes: Vec<String>,
    pass: bool,
}

fn read_json<T: DeserializeOwned>(path: &str) -> Result<T, Fail> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Fail::Parse(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Fail::Parse(format!("{path}: {e}")))
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn check_row(name: &str, value: f64, tol: f64) -> Vec<String> {
    vec![name.into(), sci(value), sci(tol), if value <= tol { "PASS" } else { "FAIL" }.into()]
}

const CHECK_HEADER: [&str; 4] = ["check", "value", "tol", "status"];

fn spectrum(path: &str) -> Result<Output, Fail> {
    let t: QMat = read_json(path)?;
    let spheres = right_eigen_spheres(&t)?;
    let rows = spheres
        .iter()
        .map(|s| vec![s.sphere.re.to_string(), s.sphere.im_mag.to_string(), s.multiplicity.to_string()])
        .collect();
    Ok(Output {
        json: json!({ "spheres": spheres }),
        header: vec!["re", "im_mag", "multiplicity"],
        rows,
        notes: Vec::new(),
        pass: true,
    })
}

fn sspec(path: &str, contour: Contour, tol: Option<f64>) -> Result<Output, Fail> {
    let t: QMat = read_json(path)?;
    let rp = riesz_projector(&t, &contour)?;
    // probe point for the identities: on the real axis past the spectrum
    let bound = 1.0 + t.frobenius_norm() + contour.center.abs() + contour.radius;
    let (left, right) = projector_identities_with(&t, &rp, Quat::real(bound))?;
    let split = spectral_split(&t, &contour)?;
    let checks = [
        ("idempotency", rp.idempotency_residual(), tol.unwrap_or(1e-8)),
        ("commutation", rp.commutator_residual(&t), tol.unwrap_or(1e-8)),
        ("left_identity", left, tol.unwrap_or(1e-7)),
        ("right_identity", right, tol.unwrap_or(1e-7)),
    ];
    let pass = checks.iter().all(|c| c.1 <= c.2);
    let rows = checks.iter().map(|c| check_row(c.0, c.1, c.2)).collect();
    let json = json!({
        "projector": rp.projector,
        "tpart": rp.tpart,
        "split": split,
        "checks": checks.iter().map(|c| json!({"name": c.0, "value": c.1, "tol": c.2, "pass": c.1 <= c.2})).collect::<Vec<_>>(),
    });
    Ok(Output {
        json,
        header: CHECK_HEADER.to_vec(),
        rows,
        notes: vec![format!("rank inside {}, outside {}", split.rank_inside, split.rank_outside)],
        pass,
    })
}

fn negsq(path: &str, mu_max: usize, s1: Option<&str>, s2: Option<&str>) -> Result<Output, Fail> {
    let s: Series = read_json(path)?;
    let (r, c) = s.shape();
    let sigma1 = s1.map(read_json::<QMat>).transpose()?.unwrap_or_else(|| QMat::identity(c));
    let sigma2 = s2.map(read_json::<QMat>).transpose()?.unwrap_or_else(|| QMat::identity(r));
    let k = schur_kernel_coeffs(&s, &sigma1, &sigma2, mu_max.min(s.degree()))?;
    let ns = neg_squares(&k, mu_max)?;
    let rows = ns
        .table
        .iter()
        .map(|row| vec![row.mu.to_string(), row.negatives.to_string(), row.zeros.to_string(), row.positives.to_string()])
        .collect();
    Ok(Output {
        notes: vec![format!("kappa {} (stabilized: {})", ns.kappa, ns.stabilized)],
        json: serde_json::to_value(&ns).expect("serializable"),
        header: vec!["mu", "negatives", "zeros", "positives"],
        rows,
        pass: true,
    })
}

fn blaschke(path: &str, degree: usize, tol: Option<f64>) -> Result<Output, Fail> {
    let spec: Blaschke = read_json(path)?;
    let prod = blaschke_product(&spec, degree)?;
    let zeros = verify_zeros(&spec, &prod.series);
    let tol = tol.unwrap_or(1e-8);
    let pass = zeros.iter().all(|z| z.residual <= tol);
    let rows = zeros
        .iter()
        .map(|z| {
            let loc = z.location.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            vec![z.kind.clone(), loc, sci(z.residual), if z.residual <= tol { "PASS" } else { "FAIL" }.into()]
        })
        .collect();
    Ok(Output {
        json: json!({ "series": prod.series, "factors": prod.factors, "zeros": zeros, "tol": tol }),
        header: vec!["kind", "location", "residual", "status"],
        rows,
        notes: Vec::new(),
        pass,
    })
}

#[derive(Deserialize)]
struct RealizeInput {
    a: QMat,
    c: QMat,
    sigma: QMat,
}

fn realize_cmd(path: &str, degree: usize, tol: Option<f64>) -> Result<Output, Fail> {
    let input: RealizeInput = read_json(path)?;
    let r = realize(&input.a, &input.c, &input.sigma)?;
    let p = r.gram.clone().expect("set by realize");
    let stein = stein_residual(&r.a, &r.c, &r.sigma, &p);
    let cong = congruence_residuals(&r, &p)?;
    let checks = [
        ("stein_residual", stein, tol.unwrap_or(1e-10) * (1.0 + p.frobenius_norm())),
        ("congruence_inverse_form", cong.inverse_form, tol.unwrap_or(1e-8)),
        ("congruence_direct_form", cong.direct_form, tol.unwrap_or(1e-8)),
    ];
    let pass = checks.iter().all(|c| c.1 <= c.2);
    let rows = checks.iter().map(|c| check_row(c.0, c.1, c.2)).collect();
    let mut notes = Vec::new();
    if r.io_dim() == 1 {
        let s: Vec<String> = r.series(degree).scalar_coeffs().iter().map(|q| q.to_string()).collect();
        notes.push(format!("S(p) = sum p^n s_n, s = [{}]", s.join(", ")));
    }
    Ok(Output {
        json: json!({
            "realization": r,
            "certificates": {
                "stein_residual": stein,
                "congruence_inverse_form": cong.inverse_form,
                "congruence_direct_form": cong.direct_form,
            },
            "series": r.series(degree),
        }),
        header: CHECK_HEADER.to_vec(),
        rows,
        notes,
        pass,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealizationFile {
    Bundle { realization: Realization },
    Bare(Realization),
}

fn kl_factor(path: &str, degree: usize, mu_max: usize) -> Result<Output, Fail> {
    let r = match read_json::<RealizationFile>(path)? {
        RealizationFile::Bundle { realization } | RealizationFile::Bare(realization) => realization,
    };
    r.check_shapes()?;
    let mu = mu_max.min(degree);
    let f = krein_langer_factor(&r, degree)?;
    let id = QMat::identity(r.io_dim());
    let k0 = schur_kernel_coeffs(&f.s0, &id, &id, mu)?;
    let ns0 = neg_squares(&k0, mu)?;
    let rows = f
        .zero_spheres
        .iter()
        .zip(&f.outside)
        .map(|(z, o)| vec![z.re.to_string(), z.im_mag.to_string(), o.multiplicity.to_string()])
        .collect();
    Ok(Output {
        notes: vec![format!("kappa {}, kappa(S0) {}", f.kappa, ns0.kappa)],
        pass: ns0.kappa == 0,
        json: json!({
            "kappa": f.kappa,
            "kappa_s0": ns0.kappa,
            "zero_spheres": f.zero_spheres,
            "bprod": f.bprod,
            "s0": f.s0,
            "b_realization": f.b_realization,
        }),
        header: vec!["zero_re", "zero_im_mag", "multiplicity"],
        rows,
    })
}

fn verify(suite: &str, cfg: &VerifyConfig) -> Result<Output, Fail> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(Fail::Usage(format!("unknown suite {suite:?}; known: all, {}", SUITES.join(", "))));
    };
    let reports: Vec<Report> = names.iter().map(|n| run_suite(n, cfg)).collect::<Result<_, _>>()?;
    let rows = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![r.suite.clone(), c.name.clone(), sci(c.value), sci(c.tol), if c.pass { "PASS" } else { "FAIL" }.into()]
            })
        })
        .collect();
    Ok(Output {
        pass: reports.iter().all(Report::passed),
        json: json!({ "reports": reports }),
        header: vec!["suite", "check", "value", "tol", "status"],
        rows,
        notes: Vec::new(),
    })
}

fn emit(out: &Output, format: Format) {
    match format {
        Format::Json => {
            let mut v = out.json.clone();
            if let Value::Object(m) = &mut v {
                m.insert("pass".into(), Value::Bool(out.pass));
            }
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
        Format::Csv => {
            println!("{}", out.header.join(","));
            for r in &out.rows {
                println!("{}", r.join(","));
            }
        }
        Format::Text => {
            let mut w: Vec<usize> = out.header.iter().map(|h| h.len()).collect();
            for r in &out.rows {
                for (i, c) in r.iter().enumerate() {
                    w[i] = w[i].max(c.len());
                }
            }
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{c:<width$}", width = w[i]))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            println!("{}", line(out.header.clone()));
            for r in &out.rows {
                println!("{}", line(r.iter().map(String::as_str).collect()));
            }
            for n in &out.notes {
                println!("{n}");
            }
            println!("{}", if out.pass { "PASS" } else { "FAIL" });
        }
    }
}

fn run(cli: Cli) -> Result<Output, Fail> {
    let tol = cli.tol;
    match cli.cmd {
        Cmd::Spectrum { matrix } => spectrum(&matrix),
        Cmd::Sspec {
            matrix,
            center,
            radius,
            slice,
            nodes,
        } => {
            let contour = Contour::new(center, radius, slice, nodes).map_err(|e| Fail::Usage(e.to_string()))?;
            sspec(&matrix, contour, tol)
        }
        Cmd::Negsq {
            series,
            mu_max,
            sigma1,
            sigma2,
        } => negsq(&series, mu_max, sigma1.as_deref(), sigma2.as_deref()),
        Cmd::Blaschke { spec, degree } => blaschke(&spec, degree, tol),
        Cmd::Realize { input, degree } => realize_cmd(&input, degree, tol),
        Cmd::KlFactor {
            realization,
            degree,
            mu_max,
        } => kl_factor(&realization, degree, mu_max),
        Cmd::Verify {
            suite,
            seed,
            nodes,
            degree,
            mu_max,
            slice,
        } => {
            let cfg = VerifyConfig {
                seed,
                nodes,
                degree,
                mu_max,
                tol,
                slice,
            };
            // node count is checked up front so a bad flag is a usage error
            Contour::new(0.0, 1.0, slice.unwrap_or_else(Unit::i), nodes).map_err(|e| Fail::Usage(e.to_string()))?;
            verify(&suite, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            emit(&out, format);
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(Fail::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Parse(m)) => {
            eprintln!("parse error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("usage: {m}");
            ExitCode::from(3)
        }
    }
}
