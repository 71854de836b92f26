//! `[section]` / `key = value` run configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use rnls::coeffs::CoeffProfile;
use rnls::{AssemblyOptions, CoeffSpec, Frame, Grid, ProblemSpec, Quadrature, ScopeKind, ScopeSpec, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
    pub radii: Vec<f64>,
    pub localization_radius: f64,
    pub lower_tol: f64,
    pub upper_tol: f64,
    pub min_final_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub ladder: Vec<(f64, usize)>,
    pub order: Option<f64>,
    /// Skips the oracle run in the other subcommands when set.
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub pairs: Vec<(f64, f64)>,
    pub half_width: f64,
    pub points: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CxiConfig {
    pub span: f64,
    pub points: usize,
    pub spots: Vec<Vec<f64>>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub samples: usize,
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub threads: usize,
    /// Adds wall-clock seconds to the summary, which breaks byte-identical output.
    pub wall_clock: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub assembly: AssemblyOptions,
    pub tail_correction: bool,
    pub solver: SolverOptions,
    pub sweep: SweepConfig,
    pub oracle: OracleConfig,
    pub scaling: ScalingConfig,
    pub cxi: CxiConfig,
    pub audit: AuditConfig,
    pub output: OutputConfig,
}

const SECTIONS: [&str; 10] = ["problem", "scope", "coeffs", "solver", "sweep", "oracle", "scaling", "cxi", "audit", "output"];

struct Section<'a> {
    name: &'a str,
    props: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.props.get(key).cloned()
    }

    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        match self.raw(key) {
            Some(v) => parse(&v).with_context(|| format!("[{}] {key} = {v}", self.name)),
            None => Ok(default),
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.get(key, default, parse_f64)
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        self.get(key, default, |s| s.parse::<usize>().map_err(|e| anyhow!("{e}")))
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        self.get(key, default, |s| match s {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => bail!("expected true or false"),
        })
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.raw(key).ok_or_else(|| anyhow!("[{}] missing key {key}", self.name))
    }

    fn finish(self) -> Result<()> {
        for k in self.props.keys() {
            if !self.used.contains(k) {
                bail!("unknown key {k:?} in [{}]", self.name);
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|e| anyhow!("not a number: {e}"))?;
    if !v.is_finite() {
        bail!("not a finite number");
    }
    Ok(v)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

/// Points separated by `;`, coordinates by `,`.
fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_list).collect()
}

fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| anyhow!("expected a:b, got {item:?}"))?;
            Ok((parse_f64(a)?, parse_f64(b)?))
        })
        .collect()
}

fn parse_ladder(s: &str) -> Result<Vec<(f64, usize)>> {
    s.split(',')
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| anyhow!("expected L:N, got {item:?}"))?;
            Ok((parse_f64(a)?, b.trim().parse::<usize>().map_err(|e| anyhow!("{e}"))?))
        })
        .collect()
}

fn parse_quadrature(s: &str) -> Result<Quadrature> {
    match s {
        "punched-hole" => Ok(Quadrature::PunchedHole),
        "shell-corrected" => Ok(Quadrature::ShellCorrected),
        _ => bail!("expected punched-hole or shell-corrected"),
    }
}

fn quadrature_name(q: Quadrature) -> &'static str {
    match q {
        Quadrature::PunchedHole => "punched-hole",
        Quadrature::ShellCorrected => "shell-corrected",
    }
}

fn parse_frame(s: &str) -> Result<Frame> {
    match s {
        "original" => Ok(Frame::Original),
        "rescaled" => Ok(Frame::Rescaled),
        _ => bail!("expected original or rescaled"),
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_points(v: &[Vec<f64>]) -> String {
    v.iter().map(|p| fmt_list(p)).collect::<Vec<_>>().join("; ")
}

fn coeff_profile(sec: &mut Section, prefix: &str, n: usize) -> Result<CoeffProfile> {
    let kind = sec.required(prefix)?;
    let key = |s: &str| format!("{prefix}_{s}");
    let shaped = |sec: &mut Section| -> Result<(Vec<f64>, f64, f64, f64)> {
        let center = sec.get(&key("center"), vec![0.0; n], parse_list)?;
        Ok((center, sec.f64(&key("center_value"), 1.0)?, sec.f64(&key("inf"), 1.0)?, sec.f64(&key("width"), 1.0)?))
    };
    let profile = match kind.as_str() {
        "constant" => CoeffProfile::Constant(parse_f64(&sec.required(&key("value"))?)?),
        "lorentzian" => {
            let (center, center_value, inf_value, width) = shaped(sec)?;
            CoeffProfile::Lorentzian { center, center_value, inf_value, width }
        }
        "gaussian" => {
            let (center, center_value, inf_value, width) = shaped(sec)?;
            CoeffProfile::Gaussian { center, center_value, inf_value, width }
        }
        other => bail!("[coeffs] {prefix}: unknown profile {other:?}"),
    };
    if let CoeffProfile::Lorentzian { center, .. } | CoeffProfile::Gaussian { center, .. } = &profile {
        if center.len() != n {
            bail!("[coeffs] {prefix}_center must have {n} coordinates");
        }
    }
    Ok(profile)
}

fn echo_profile(out: &mut Vec<(String, String)>, prefix: &str, p: &CoeffProfile) {
    match p {
        CoeffProfile::Constant(v) => {
            out.push((prefix.into(), "constant".into()));
            out.push((format!("{prefix}_value"), v.to_string()));
        }
        CoeffProfile::Lorentzian { center, center_value, inf_value, width }
        | CoeffProfile::Gaussian { center, center_value, inf_value, width } => {
            let kind = if matches!(p, CoeffProfile::Lorentzian { .. }) { "lorentzian" } else { "gaussian" };
            out.push((prefix.into(), kind.into()));
            out.push((format!("{prefix}_center"), fmt_list(center)));
            out.push((format!("{prefix}_center_value"), center_value.to_string()));
            out.push((format!("{prefix}_inf"), inf_value.to_string()));
            out.push((format!("{prefix}_width"), width.to_string()));
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| anyhow!("config syntax: {e}"))?;
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    bail!("keys outside a [section]");
                }
                continue;
            };
            if !SECTIONS.contains(&name) {
                bail!("unknown section [{name}]");
            }
            let entry = sections.entry(name.to_string()).or_default();
            for (k, v) in props.iter() {
                if entry.insert(k.to_string(), v.trim().to_string()).is_some() {
                    bail!("duplicate key {k:?} in [{name}]");
                }
            }
        }
        let mut take = |name: &'static str| Section {
            name,
            props: sections.remove(name).unwrap_or_default(),
            used: BTreeSet::new(),
        };

        let mut s = take("problem");
        let alpha = s.f64("alpha", 0.4)?;
        let p = s.f64("p", 2.0)?;
        let n = s.usize("n", 1)?;
        let epsilon = s.f64("epsilon", 1.0)?;
        let frame = s.get("frame", Frame::Original, parse_frame)?;
        let half_width = s.f64("half_width", 10.0)?;
        let points = s.usize("points", 401)?;
        let quadrature = s.get("quadrature", Quadrature::PunchedHole, parse_quadrature)?;
        let ghosts = s.bool("ghosts", true)?;
        let tail_correction = s.bool("tail_correction", true)?;
        s.finish()?;
        let grid = Grid::new(n, half_width, points)?;

        let mut s = take("scope");
        let kind = s.raw("kind").unwrap_or_else(|| "constant".into());
        let scope = match kind.as_str() {
            "constant" => ScopeSpec::constant(s.f64("rho0", 1.0)?),
            "saturating" => {
                let rho0 = parse_f64(&s.required("rho0")?)?;
                let rho_inf = parse_f64(&s.required("rho_inf")?)?;
                ScopeSpec::saturating(rho0, rho_inf, s.f64("scale", 1.0)?)
            }
            "infinite" => ScopeSpec::infinite(),
            other => bail!("[scope] unknown kind {other:?}"),
        };
        s.finish()?;

        let mut s = take("coeffs");
        let q = coeff_profile(&mut s, "q", n)?;
        let k = coeff_profile(&mut s, "k", n)?;
        let mut coeffs = CoeffSpec::new(q, k);
        let a1 = s.f64("a1", coeffs.a1)?;
        let a2 = s.f64("a2", coeffs.a2)?;
        coeffs = coeffs.with_bounds(a1, a2);
        s.finish()?;

        let problem = ProblemSpec { alpha, p, epsilon, frame, scope, coeffs, grid };
        problem.validate()?;

        let d = SolverOptions::default();
        let mut s = take("solver");
        let solver = SolverOptions {
            max_iters: s.usize("max_iters", d.max_iters)?,
            tol_g: s.f64("tol_g", d.tol_g)?,
            tol_c: s.f64("tol_c", d.tol_c)?,
            initial_step: s.f64("initial_step", d.initial_step)?,
            max_backtracks: s.usize("max_backtracks", d.max_backtracks)?,
            clip_negative: s.bool("clip_negative", d.clip_negative)?,
            centers: s.get("centers", d.centers, parse_points)?,
            init_width: s.f64("init_width", d.init_width)?,
            init_amplitude: s.f64("init_amplitude", d.init_amplitude)?,
            seed: s.get("seed", d.seed, |v| v.parse::<u64>().map_err(|e| anyhow!("{e}")))?,
            record_history: true,
        };
        s.finish()?;
        solver.validate()?;
        if solver.centers.iter().any(|c| c.len() != n) {
            bail!("[solver] centers must have {n} coordinates each");
        }

        let mut s = take("sweep");
        let sweep = SweepConfig {
            epsilons: s.get("epsilons", vec![1.0, 0.5, 0.25], parse_list)?,
            radii: s.get("radii", vec![1.0], parse_list)?,
            localization_radius: s.f64("localization_radius", 1.0)?,
            lower_tol: s.f64("lower_tol", 0.01)?,
            upper_tol: s.f64("upper_tol", 0.05)?,
            min_final_fraction: s.f64("min_final_fraction", 0.9)?,
        };
        s.finish()?;
        if sweep.radii.is_empty() {
            bail!("[sweep] radii must not be empty");
        }

        let mut s = take("oracle");
        let oracle = OracleConfig {
            ladder: s.get("ladder", vec![(20.0, 801), (20.0, 1601)], parse_ladder)?,
            order: s.get("order", None, |v| parse_f64(v).map(Some))?,
            d: s.get("d", None, |v| parse_f64(v).map(Some))?,
        };
        s.finish()?;

        let mut s = take("scaling");
        let scaling = ScalingConfig {
            pairs: s.get("pairs", vec![(2.0, 1.0), (1.0, 2.0), (0.5, 1.5)], parse_pairs)?,
            half_width: s.f64("half_width", 20.0)?,
            points: s.usize("points", 801)?,
            tolerance: s.f64("tolerance", 0.02)?,
        };
        s.finish()?;

        let mut s = take("cxi");
        let cxi = CxiConfig {
            span: s.f64("span", 50.0)?,
            points: s.usize("points", 2001)?,
            spots: s.get("spots", Vec::new(), parse_points)?,
            tolerance: s.f64("tolerance", 0.02)?,
        };
        s.finish()?;
        if cxi.spots.iter().any(|c| c.len() != n) {
            bail!("[cxi] spots must have {n} coordinates each");
        }

        let mut s = take("audit");
        let audit = AuditConfig {
            samples: s.usize("samples", 1000)?,
            half_width: s.f64("half_width", 5.0)?,
            points: s.usize("points", 101)?,
        };
        s.finish()?;

        let mut s = take("output");
        let output = OutputConfig {
            dir: PathBuf::from(s.raw("dir").unwrap_or_else(|| "out".into())),
            threads: s.usize("threads", 1)?,
            wall_clock: s.bool("wall_clock", false)?,
        };
        s.finish()?;
        if output.threads == 0 {
            bail!("[output] threads must be at least 1");
        }

        Ok(Self {
            problem,
            assembly: AssemblyOptions { ghosts, quadrature },
            tail_correction,
            solver,
            sweep,
            oracle,
            scaling,
            cxi,
            audit,
            output,
        })
    }

    /// Effective configuration, every key spelled out.
    pub fn sections(&self) -> Vec<(&'static str, Vec<(String, String)>)> {
        let p = &self.problem;
        let g = p.grid;
        let kv = |k: &str, v: String| (k.to_string(), v);
        let problem = vec![
            kv("alpha", p.alpha.to_string()),
            kv("p", p.p.to_string()),
            kv("n", g.dim().to_string()),
            kv("epsilon", p.epsilon.to_string()),
            kv("frame", if p.frame == Frame::Original { "original" } else { "rescaled" }.into()),
            kv("half_width", g.half_width().to_string()),
            kv("points", g.points().to_string()),
            kv("quadrature", quadrature_name(self.assembly.quadrature).into()),
            kv("ghosts", self.assembly.ghosts.to_string()),
            kv("tail_correction", self.tail_correction.to_string()),
        ];
        let sc = &p.scope;
        let scope = match sc.kind {
            ScopeKind::Constant => vec![kv("kind", "constant".into()), kv("rho0", sc.rho0.to_string())],
            ScopeKind::Saturating => vec![
                kv("kind", "saturating".into()),
                kv("rho0", sc.rho0.to_string()),
                kv("rho_inf", sc.rho_inf.to_string()),
                kv("scale", sc.scale.to_string()),
            ],
            ScopeKind::Infinite => vec![kv("kind", "infinite".into())],
        };
        let mut coeffs = Vec::new();
        echo_profile(&mut coeffs, "q", &p.coeffs.q);
        echo_profile(&mut coeffs, "k", &p.coeffs.k);
        coeffs.push(kv("a1", p.coeffs.a1.to_string()));
        coeffs.push(kv("a2", p.coeffs.a2.to_string()));
        let s = &self.solver;
        let solver = vec![
            kv("max_iters", s.max_iters.to_string()),
            kv("tol_g", s.tol_g.to_string()),
            kv("tol_c", s.tol_c.to_string()),
            kv("initial_step", s.initial_step.to_string()),
            kv("max_backtracks", s.max_backtracks.to_string()),
            kv("clip_negative", s.clip_negative.to_string()),
            kv("centers", fmt_points(&s.centers)),
            kv("init_width", s.init_width.to_string()),
            kv("init_amplitude", s.init_amplitude.to_string()),
            kv("seed", s.seed.to_string()),
        ];
        let w = &self.sweep;
        let sweep = vec![
            kv("epsilons", fmt_list(&w.epsilons)),
            kv("radii", fmt_list(&w.radii)),
            kv("localization_radius", w.localization_radius.to_string()),
            kv("lower_tol", w.lower_tol.to_string()),
            kv("upper_tol", w.upper_tol.to_string()),
            kv("min_final_fraction", w.min_final_fraction.to_string()),
        ];
        let o = &self.oracle;
        let mut oracle = vec![kv(
            "ladder",
            o.ladder.iter().map(|(l, n)| format!("{l}:{n}")).collect::<Vec<_>>().join(", "),
        )];
        if let Some(q) = o.order {
            oracle.push(kv("order", q.to_string()));
        }
        if let Some(d) = o.d {
            oracle.push(kv("d", d.to_string()));
        }
        let c = &self.scaling;
        let scaling = vec![
            kv("pairs", c.pairs.iter().map(|(q, k)| format!("{q}:{k}")).collect::<Vec<_>>().join(", ")),
            kv("half_width", c.half_width.to_string()),
            kv("points", c.points.to_string()),
            kv("tolerance", c.tolerance.to_string()),
        ];
        let x = &self.cxi;
        let cxi = vec![
            kv("span", x.span.to_string()),
            kv("points", x.points.to_string()),
            kv("spots", fmt_points(&x.spots)),
            kv("tolerance", x.tolerance.to_string()),
        ];
        let a = &self.audit;
        let audit = vec![
            kv("samples", a.samples.to_string()),
            kv("half_width", a.half_width.to_string()),
            kv("points", a.points.to_string()),
        ];
        let u = &self.output;
        let output = vec![
            kv("dir", u.dir.display().to_string()),
            kv("threads", u.threads.to_string()),
            kv("wall_clock", u.wall_clock.to_string()),
        ];
        vec![
            ("problem", problem),
            ("scope", scope),
            ("coeffs", coeffs),
            ("solver", solver),
            ("sweep", sweep),
            ("oracle", oracle),
            ("scaling", scaling),
            ("cxi", cxi),
            ("audit", audit),
            ("output", output),
        ]
    }

    pub fn to_ini_string(&self) -> String {
        let mut out = String::new();
        for (name, keys) in self.sections() {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in keys {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        }
        out
    }
}
