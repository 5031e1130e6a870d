use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bergman_core::acceptance::{self, CriterionResult};
use bergman_core::bergman::{hessenberg, orthonormalize, zeros_csv, OrthonormalBasis};
use bergman_core::conformal::{capacity_from_ratio, interior_map_bkm, invert_exterior_map, phi_from_ratio};
use bergman_core::diagnostics::{corner_integral, distortion_check, exterior_map_domain, report_from, ReportOptions};
use bergman_core::faber::faber_family;
use bergman_core::geometry::{DomainConfig, DomainSpec, CATALOG};
use bergman_core::moments::{gram_matrix, MomentCache, MomentMatrix};
use bergman_core::mp::{to_decimal, to_decimal_sig};
use bergman_core::{Complex, Precision};

use crate::config::RunConfig;
use crate::{CacheAction, Cli, Command, ConformalAction, DomainsAction};

/// Digits written for derived (non round-trip) values.
const SIG: usize = 30;
const DEFAULT_NMAX: usize = 20;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(bergman_core::Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(..) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<bergman_core::Error> for CliError {
    fn from(e: bergman_core::Error) -> Self {
        use bergman_core::Error as E;
        match e {
            E::Parse(_) | E::Geometry(_) => CliError::Usage(e.to_string()),
            e => CliError::Numerical(e),
        }
    }
}

macro_rules! impl_from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                bergman_core::Error::from(e).into()
            }
        }
    )*};
}
impl_from_core!(
    bergman_core::error::BergmanError,
    bergman_core::error::ConformalError,
    bergman_core::error::DiagnosticsError,
    bergman_core::error::GeometryError,
    bergman_core::error::MomentError,
    bergman_core::error::ParseError,
    bergman_core::error::SeriesError
);

type Result<T> = std::result::Result<T, CliError>;

/// Everything a subcommand needs, after flags override the config.
struct Settings {
    config: Option<RunConfig>,
    spec: Option<DomainSpec>,
    n_max: usize,
    prec: Precision,
    cache: Option<MomentCache>,
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    RunConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(x).join("bergman"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("bergman"))
}

fn settings(cli: &Cli, need_domain: bool) -> Result<Settings> {
    let config = cli.config.as_deref().map(read_config).transpose()?;
    let n_max = cli.nmax.or(config.as_ref().map(|c| c.n_max)).unwrap_or(DEFAULT_NMAX);
    if n_max < 1 {
        return Err(CliError::Usage("--nmax must be at least 1".into()));
    }
    let prec = match (cli.precision, &config) {
        (Some(d), _) => Precision::digits(d),
        (None, Some(c)) if cli.nmax.is_none() => c.precision(),
        _ => Precision::auto_for_degree(n_max),
    };
    let domain = match (&cli.domain, &config) {
        (Some(name), _) => Some(DomainConfig::Catalog {
            name: name.clone(),
            params: cli.params.clone(),
            reflection_factor_k: None,
        }),
        (None, Some(c)) => Some(c.domain.clone()),
        (None, None) => None,
    };
    let spec = match domain {
        Some(d) => Some(d.build(prec)?),
        None if need_domain => {
            return Err(CliError::Usage(
                "no domain: pass --domain <name> [--params ...] or --config <file>".into(),
            ))
        }
        None => None,
    };
    let cache = cli.cache_dir.clone().or_else(default_cache_dir).map(MomentCache::new);
    Ok(Settings {
        config,
        spec,
        n_max,
        prec,
        cache,
    })
}

/// Write `(name, body)` files into `out`, or print them to stdout.
fn emit(out: Option<&Path>, files: &[(String, String)]) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
            for (name, body) in files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| CliError::Io(path.clone(), e))?;
            }
        }
        None => {
            let many = files.len() > 1;
            for (name, body) in files {
                if many {
                    println!("# {name}");
                }
                print!("{body}");
            }
        }
    }
    Ok(())
}

fn moments_csv(m: &MomentMatrix) -> String {
    let mut s = String::from("j,k,re,im\n");
    for (j, row) in m.entries.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            s.push_str(&format!("{j},{k},{},{}\n", to_decimal(&c.re), to_decimal(&c.im)));
        }
    }
    s
}

fn all_zeros(basis: &OrthonormalBasis, n_max: usize) -> Result<String> {
    let mut list = Vec::with_capacity(n_max);
    for n in 1..=n_max.min(basis.degree) {
        list.push((n, basis.zeros(n)?));
    }
    Ok(zeros_csv(&list))
}

fn capacity_csv(spec: &DomainSpec, basis: &OrthonormalBasis, n_max: usize) -> Result<String> {
    let mut s = String::from("n,gamma_hat,cap_hat,sigma\n");
    for n in 0..=n_max.min(basis.degree - 1) {
        let e = capacity_from_ratio(basis, n, spec.known_capacity.as_ref())?;
        s.push_str(&format!(
            "{n},{},{},{}\n",
            to_decimal_sig(&e.gamma_hat, SIG),
            to_decimal_sig(&e.cap_hat, SIG),
            e.sigma.as_ref().map(|x| to_decimal_sig(x, SIG)).unwrap_or_default()
        ));
    }
    Ok(s)
}

fn faber_csv(spec: &DomainSpec, n_max: usize) -> Result<String> {
    let map = exterior_map_domain(spec).ok_or(bergman_core::error::DiagnosticsError::NeedsMap)?;
    Ok(faber_family(&map, n_max)?.to_csv())
}

fn hessenberg_csv(m: &MomentMatrix, basis: &OrthonormalBasis) -> String {
    let h = hessenberg(m, basis);
    let mut s = String::from("k,n,re,im\n");
    for n in 0..h.size() {
        for k in 0..=(n + 1).min(h.size() - 1) {
            let a = h.get(k, n);
            s.push_str(&format!(
                "{k},{n},{},{}\n",
                to_decimal_sig(&a.re, SIG),
                to_decimal_sig(&a.im, SIG)
            ));
        }
    }
    s
}

fn corner_integral_csv() -> Result<String> {
    let p = Precision::digits(30);
    let mut s = String::from("omega,k,k2_i\n");
    for omega in [0.6, 1.0, 1.4, 2.0] {
        for k in [2u32, 4, 8, 16, 32, 64] {
            let v = corner_integral(omega, k, p)?;
            s.push_str(&format!("{omega},{k},{}\n", to_decimal_sig(&v, 20)));
        }
    }
    Ok(s)
}

fn distortion_json(spec: &DomainSpec) -> Result<String> {
    let r = distortion_check(spec, 20)?;
    Ok(serde_json::to_string_pretty(&r).expect("serializes") + "\n")
}

fn cdec(z: &Complex) -> String {
    format!("{},{}", to_decimal_sig(&z.re, SIG), to_decimal_sig(&z.im, SIG))
}

fn conformal_map(spec: &DomainSpec, basis: &OrthonormalBasis, n_max: usize, points: &[String]) -> Result<String> {
    let p = spec.prec;
    let map = exterior_map_domain(spec);
    let z0 = spec.interior_point();
    let mut s = String::from("z_re,z_im,region,method,value_re,value_im\n");
    for at in points {
        let (re, im) = at
            .split_once(',')
            .ok_or_else(|| CliError::Usage(format!("--at expects re,im; got {at:?}")))?;
        let z = p.parse_complex(re.trim(), im.trim())?;
        let (region, method, v) = if spec.contains(&z) {
            ("interior", "kernel", interior_map_bkm(spec, basis, n_max, &z0, &z)?)
        } else if let Some(md) = &map {
            ("exterior", "newton", invert_exterior_map(md, &z)?.w)
        } else {
            ("exterior", "ratio", phi_from_ratio(basis, n_max, &z)?)
        };
        s.push_str(&format!("{},{region},{method},{}\n", cdec(&z), cdec(&v)));
    }
    Ok(s)
}

fn verify_files(results: &[CriterionResult]) -> Vec<(String, String)> {
    let mut csv = String::from("id,name,pass,detail\n");
    for r in results {
        csv.push_str(&format!(
            "{},{},{},\"{}\"\n",
            r.id,
            r.name,
            r.pass,
            r.detail.replace('"', "'")
        ));
    }
    vec![
        (
            "verify.json".into(),
            serde_json::to_string_pretty(results).expect("serializes") + "\n",
        ),
        ("verify.csv".into(), csv),
    ]
}

pub fn dispatch(cli: &Cli) -> Result<u8> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Domains {
            action: DomainsAction::List,
        } => {
            let mut s = String::from("name,params,notes\n");
            for e in CATALOG {
                s.push_str(&format!("{},\"{}\",\"{}\"\n", e.name, e.params, e.notes));
            }
            emit(out, &[("domains.csv".into(), s)])?;
        }
        Command::Moments => {
            let st = settings(cli, true)?;
            let spec = st.spec.as_ref().expect("domain");
            let m = gram_matrix(spec, st.n_max, st.cache.as_ref())?;
            eprintln!("moments: {} entries recomputed", m.recomputed);
            emit(out, &[("moments.csv".into(), moments_csv(&m))])?;
        }
        Command::Basis => {
            let st = settings(cli, true)?;
            let spec = st.spec.as_ref().expect("domain");
            let m = gram_matrix(spec, st.n_max, st.cache.as_ref())?;
            let b = orthonormalize(&m)?;
            emit(
                out,
                &[
                    ("basis.csv".into(), b.to_csv()),
                    ("zeros.csv".into(), all_zeros(&b, st.n_max)?),
                ],
            )?;
        }
        Command::Faber => {
            let st = settings(cli, true)?;
            emit(
                out,
                &[(
                    "faber.csv".into(),
                    faber_csv(st.spec.as_ref().expect("domain"), st.n_max)?,
                )],
            )?;
        }
        Command::Conformal { action } => {
            let st = settings(cli, true)?;
            let spec = st.spec.as_ref().expect("domain");
            let m = gram_matrix(spec, st.n_max + 1, st.cache.as_ref())?;
            let b = orthonormalize(&m)?;
            let body = match action {
                ConformalAction::Capacity => ("capacity.csv", capacity_csv(spec, &b, st.n_max)?),
                ConformalAction::Map { at } => ("map.csv", conformal_map(spec, &b, st.n_max, at)?),
            };
            emit(out, &[(body.0.into(), body.1)])?;
        }
        Command::Diagnostics { name } => {
            let files = diagnostics(cli, name)?;
            emit(out, &files)?;
        }
        Command::Verify { only } => {
            let ids: Vec<u8> = if only.is_empty() {
                acceptance::CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only.clone()
            };
            if let Some(bad) = ids
                .iter()
                .find(|&&i| !(1..=acceptance::CRITERIA.len() as u8).contains(&i))
            {
                return Err(CliError::Usage(format!("no criterion {bad}")));
            }
            let mut results = Vec::new();
            for id in ids {
                let r = acceptance::run(id);
                println!("{r}");
                results.push(r);
            }
            if let Some(dir) = out {
                emit(Some(dir), &verify_files(&results))?;
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            return Ok(if failed > 0 { 1 } else { 0 });
        }
        Command::Cache {
            action: CacheAction::Purge,
        } => {
            let st = settings(cli, false)?;
            let cache = st
                .cache
                .ok_or_else(|| CliError::Usage("no cache directory: pass --cache-dir".into()))?;
            let n = cache.purge()?;
            println!("removed {n} cached moment files from {}", cache.dir().display());
        }
        Command::Run => return run(cli),
    }
    Ok(0)
}

fn diagnostics(cli: &Cli, name: &str) -> Result<Vec<(String, String)>> {
    if name == "corner-integral" {
        return Ok(vec![("corner_integral.csv".into(), corner_integral_csv()?)]);
    }
    let st = settings(cli, true)?;
    let spec = st.spec.as_ref().expect("domain");
    let opts = match &st.config {
        Some(c) => {
            let mut o = c.report_options();
            o.n_max = st.n_max;
            o
        }
        None => ReportOptions::new(st.n_max),
    };
    let table = |want: &str| -> Result<Vec<(String, String)>> {
        let m = gram_matrix(spec, st.n_max + 1, st.cache.as_ref())?;
        let b = orthonormalize(&m)?;
        let r = report_from(spec, &opts, &m, &b)?;
        Ok(if want == "report" {
            let mut v = vec![("report.json".to_string(), r.to_json())];
            v.extend(r.to_csv_tables());
            v
        } else {
            r.to_csv_tables().into_iter().filter(|(f, _)| f == want).collect()
        })
    };
    match name {
        "report" => table("report"),
        "per-degree" => table("per_n.csv"),
        "pointwise" => table("pointwise.csv"),
        "fits" => table("fits.csv"),
        "hessenberg" => {
            let m = gram_matrix(spec, st.n_max + 1, st.cache.as_ref())?;
            let b = orthonormalize(&m)?;
            Ok(vec![("hessenberg.csv".into(), hessenberg_csv(&m, &b))])
        }
        "distortion" => Ok(vec![("distortion.json".into(), distortion_json(spec)?)]),
        other => Err(CliError::Usage(format!(
            "unknown diagnostic {other:?}; expected report, per-degree, pointwise, fits, hessenberg, corner-integral or distortion"
        ))),
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run(cli: &Cli) -> Result<u8> {
    if cli.config.is_none() {
        return Err(CliError::Usage("run requires --config <file>".into()));
    }
    let started = Instant::now();
    let st = settings(cli, true)?;
    let cfg = st.config.as_ref().expect("config");
    let spec = st.spec.as_ref().expect("domain");
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut opts = cfg.report_options();
    opts.n_max = st.n_max;
    let mut log = vec![
        format!("started_unix {}", unix_now()),
        format!("domain {}", spec.name),
        format!("precision_digits {}", st.prec.decimal_digits()),
        format!("n_max {}", st.n_max),
        format!("grid_levels {:?} per_level {}", opts.levels, opts.per_level),
        format!("tolerance sum_identity_relative {:e}", opts.sum_tolerance),
        format!("tolerance epsilon_tail_relative {:e}", opts.tail_tolerance),
        format!("diagnostics {}", cfg.diagnostics.join(",")),
    ];

    let m = gram_matrix(spec, st.n_max + 1, st.cache.as_ref())?;
    log.push(format!("moments recomputed {}", m.recomputed));
    eprintln!("moments: {} entries recomputed", m.recomputed);
    let basis = orthonormalize(&m)?;
    log.push(format!("gram_residual {:e}", basis.gram_residual));

    let mut files: Vec<(String, String)> = vec![("moments.csv".into(), moments_csv(&m.leading(st.n_max)))];
    if cfg.enabled("basis") {
        files.push(("basis.csv".into(), orthonormalize(&m.leading(st.n_max))?.to_csv()));
    }
    if cfg.enabled("zeros") {
        files.push(("zeros.csv".into(), all_zeros(&basis, st.n_max)?));
    }
    if cfg.enabled("faber") {
        files.push(("faber.csv".into(), faber_csv(spec, st.n_max)?));
    }
    if cfg.enabled("capacity") {
        files.push(("capacity.csv".into(), capacity_csv(spec, &basis, st.n_max)?));
    }
    if cfg.enabled("report") {
        let r = report_from(spec, &opts, &m, &basis)?;
        for (k, v) in &r.tolerances {
            log.push(format!("tolerance {k} {v}"));
        }
        for n in &r.notes {
            log.push(format!("note {n}"));
        }
        files.push(("diagnostics.json".into(), r.to_json()));
        files.extend(r.to_csv_tables());
    }
    if cfg.enabled("hessenberg") {
        files.push(("hessenberg.csv".into(), hessenberg_csv(&m, &basis)));
    }
    if cfg.enabled("corner-integral") {
        files.push(("corner_integral.csv".into(), corner_integral_csv()?));
    }
    if cfg.enabled("distortion") {
        files.push(("distortion.json".into(), distortion_json(spec)?));
    }
    for (name, _) in &files {
        log.push(format!("wrote {name}"));
    }
    log.push(format!("elapsed_seconds {:.3}", started.elapsed().as_secs_f64()));
    files.push(("run.log".into(), log.join("\n") + "\n"));
    emit(Some(&out), &files)?;
    eprintln!("wrote {} files to {}", files.len(), out.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let e: CliError = bergman_core::error::BergmanError::DegreeOutOfRange { n: 3, max: 2 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = bergman_core::error::ParseError::Config("bad".into()).into();
        assert_eq!(e.exit_code(), 2);
    }
}
