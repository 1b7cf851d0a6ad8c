//! `ergomap` command-line toolkit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergomap::desk;
use ergomap::entropy::{
    build_two_slope, entropy_stage, rohlin_entropy, set_entropy, solve_eta, two_slope_base,
    two_slope_entropy, CSV_HEADER,
};
use ergomap::format::{parse, serialize};
use ergomap::interval::{Interval, IntervalSet};
use ergomap::map::{
    from_full_laps, set_node_cap, uniform_distance, verify_lebesgue, LapSign, PwaMap,
};
use ergomap::markov::{markov_partition, mixing_flags, refine, top_entropy, MarkovDetection};
use ergomap::orbit::OrbitCaps;
use ergomap::perturb::{
    horseshoe, leoize, markovize, regular_window, MarkovizeEffort, Markovized, WindowMode,
    WindowSpec,
};
use ergomap::rational::{fmt_f64, fmt_rational, parse_rational, r, Rational};
use ergomap::stats::{
    birkhoff, birkhoff_pair, corr_csv_rows, correlations, leo_time, mixing_scores, Observable,
    PairObservable, CORR_CSV_HEADER, DEFAULT_LEO_CAP, DEFAULT_PREIMAGE_CAP,
};
use ergomap::structure::transitivity_components;
use ergomap::svg::{render_svg, Overlays};
use ergomap::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_CONTRACT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "ergomap",
    version,
    about = "Exact piecewise-affine Lebesgue-preserving interval maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a map.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Window perturbations and the constructions built on them.
    #[command(subcommand)]
    Perturb(PerturbCmd),
    /// Transitivity components and the mixing verdict.
    Classify {
        map: String,
        /// Print the full component report.
        #[arg(long)]
        report: bool,
    },
    /// Markov partition, stochastic matrix and mixing flags.
    Markov {
        map: String,
        /// Backward refinement depth.
        #[arg(long, default_value_t = 0)]
        depth: usize,
    },
    #[command(subcommand)]
    Entropy(EntropyCmd),
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Render the graph as SVG.
    Plot {
        map: String,
        #[arg(long)]
        diagonal: bool,
        /// Grid of the Markov partition, when one is found.
        #[arg(long)]
        partition: bool,
        /// Boxes around the transitivity components.
        #[arg(long)]
        components: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact check that the map preserves Lebesgue measure.
    Verify { map: String },
}

#[derive(Args)]
struct Out {
    /// Write the map here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Full laps of the given widths, e.g. `+ 3/10 1/2 1/5`.
    FullLaps {
        #[arg(allow_hyphen_values = true)]
        sign: String,
        #[arg(required = true)]
        widths: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
    /// The regular `m`-lap zigzag.
    Zigzag {
        m: usize,
        #[arg(long)]
        down: bool,
        #[command(flatten)]
        out: Out,
    },
    /// A named example map.
    Desk {
        name: String,
        #[command(flatten)]
        out: Out,
    },
    /// A random full-lap map drawn from a seeded generator.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_laps: usize,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Regular,
    Left,
    Right,
}

#[derive(Subcommand)]
enum PerturbCmd {
    /// Replace the map on a window by alternating compressed copies.
    Window {
        map: String,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        window: Vec<String>,
        #[arg(long)]
        fold: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Regular)]
        mode: ModeArg,
        #[command(flatten)]
        out: Out,
    },
    /// Perturb into a leo map.
    Leoize {
        map: String,
        #[arg(long)]
        eps: String,
        #[command(flatten)]
        out: Out,
    },
    /// Perturb a leo map into a Markov leo map.
    Markovize {
        map: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = MarkovizeEffort::default().depth_cap)]
        depth: usize,
        #[command(flatten)]
        out: Out,
    },
    /// Fold a window at a transverse fixed point into an `n`-branch horseshoe.
    Horseshoe {
        map: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum EntropyCmd {
    /// Metric entropy as a CSV row.
    Rohlin {
        map: String,
        #[arg(long, default_value = "map")]
        id: String,
    },
    /// Closed-form two-slope entropy; with `--map`, also build the map.
    TwoSlope {
        #[arg(long)]
        eta: String,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        map: Option<String>,
        /// Number of slab copies; defaults to the least admissible value.
        #[arg(long = "big-m")]
        big_m: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// The rational `eta` whose two-slope entropy is `c`.
    SolveEta {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        m: usize,
    },
    /// A nearby Markov map with entropy `c`.
    Set {
        map: String,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        eps: String,
        #[command(flatten)]
        out: Out,
    },
    /// Nested windows raising the entropy above `1, …, n`.
    Stage {
        map: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Exact correlations `λ(f⁻ʲA ∩ B) − λ(A)λ(B)` for `j ≤ n`, as CSV.
    Corr {
        map: String,
        /// Interval set such as `0/1:1/2+3/4:1/1`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "map")]
        id: String,
        #[arg(long, default_value_t = DEFAULT_PREIMAGE_CAP)]
        cap: usize,
    },
    /// Cesàro mixing scores up to a horizon.
    Mixing {
        map: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        horizon: usize,
    },
    /// First iterate mapping a window onto `[0,1]`.
    LeoTime {
        map: String,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        window: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_LEO_CAP)]
        cap: usize,
    },
    /// Exact Birkhoff average of an observable along an orbit.
    Birkhoff {
        map: String,
        #[arg(long)]
        x: String,
        /// Second starting point; averages the product observable `u·v`.
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        n: usize,
        /// `identity` or `hat:C:W`.
        #[arg(long, default_value = "identity")]
        obs: String,
    },
}

#[derive(Debug)]
enum Failure {
    Contract(String),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Contract(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn rational(s: &str) -> Res<Rational> {
    parse_rational(s).map_err(|e| Failure::Usage(format!("bad rational {s:?}: {e}")))
}

fn interval(ends: &[String]) -> Res<Interval> {
    Ok(Interval::new(rational(&ends[0])?, rational(&ends[1])?)?)
}

fn interval_set(s: &str) -> Res<IntervalSet> {
    let mut parts = Vec::new();
    for p in s.split('+') {
        let (a, b) = p
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("bad interval {p:?}, expected LO:HI")))?;
        parts.push(Interval::new(rational(a)?, rational(b)?)?);
    }
    Ok(IntervalSet::from_parts(parts))
}

/// A map file, or the name of an example map.
fn load(spec: &str) -> Res<PwaMap> {
    let path = Path::new(spec);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{spec}: {e}")))?;
        return Ok(parse(&text)?);
    }
    desk::by_name(spec).ok_or_else(|| {
        Failure::Usage(format!(
            "{spec:?} is neither a file nor one of: {}",
            desk::NAMES.join(", ")
        ))
    })
}

fn emit(text: &str, out: &Option<PathBuf>) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_map(f: &PwaMap, out: &Out) -> Res<()> {
    emit(&serialize(f), &out.output)
}

fn note(line: String) {
    eprintln!("{line}");
}

fn run(cli: Cli) -> Res<()> {
    match cli.cmd {
        Cmd::Build(b) => build(b),
        Cmd::Perturb(p) => perturb(p),
        Cmd::Classify { map, report } => {
            let rep = transitivity_components(&load(&map)?)?;
            if report {
                print!("{rep}");
            } else {
                println!("{}", rep.verdict);
            }
            Ok(())
        }
        Cmd::Markov { map, depth } => markov(&load(&map)?, depth),
        Cmd::Entropy(e) => entropy(e),
        Cmd::Stats(s) => stats(s),
        Cmd::Plot {
            map,
            diagonal,
            partition,
            components,
            output,
        } => {
            let f = load(&map)?;
            let mut ov = Overlays {
                diagonal,
                ..Overlays::default()
            };
            if partition {
                ov = ov.with_partition(&f)?;
            }
            if components {
                ov = ov.with_components(&f)?;
            }
            emit(&render_svg(&f, &ov), &output)
        }
        Cmd::Verify { map } => {
            let rep = verify_lebesgue(&load(&map)?);
            if rep.preserving {
                println!("preserving");
                Ok(())
            } else {
                println!("not preserving");
                let w = rep.witness.map(|w| w.to_string()).unwrap_or_default();
                Err(Failure::Contract(format!("witness: {w}")))
            }
        }
    }
}

fn build(cmd: BuildCmd) -> Res<()> {
    match cmd {
        BuildCmd::FullLaps { sign, widths, out } => {
            let sign = match sign.as_str() {
                "+" | "up" => LapSign::Up,
                "-" | "down" => LapSign::Down,
                s => return Err(Failure::Usage(format!("sign must be + or -, got {s:?}"))),
            };
            let alphas = widths
                .iter()
                .map(|w| rational(w))
                .collect::<Res<Vec<_>>>()?;
            emit_map(&from_full_laps(sign, &alphas)?, &out)
        }
        BuildCmd::Zigzag { m, down, out } => {
            if m == 0 {
                return Err(Failure::Usage("m must be positive".into()));
            }
            let sign = if down { LapSign::Down } else { LapSign::Up };
            let alphas = vec![r(1, m as i64); m];
            emit_map(&from_full_laps(sign, &alphas)?, &out)
        }
        BuildCmd::Desk { name, out } => {
            let f = desk::by_name(&name)
                .ok_or_else(|| Failure::Usage(format!("unknown map {name:?}")))?;
            emit_map(&f, &out)
        }
        BuildCmd::Random {
            seed,
            max_laps,
            out,
        } => {
            if max_laps == 0 {
                return Err(Failure::Usage("max-laps must be positive".into()));
            }
            let mut g = ChaCha8Rng::seed_from_u64(seed);
            let k = g.gen_range(1..=max_laps);
            let weights: Vec<i64> = (0..k).map(|_| g.gen_range(1..=9)).collect();
            let total: i64 = weights.iter().sum();
            let alphas: Vec<Rational> = weights.iter().map(|&w| r(w, total)).collect();
            let sign = if g.gen_bool(0.5) {
                LapSign::Up
            } else {
                LapSign::Down
            };
            emit_map(&from_full_laps(sign, &alphas)?, &out)
        }
    }
}

fn perturb(cmd: PerturbCmd) -> Res<()> {
    match cmd {
        PerturbCmd::Window {
            map,
            window,
            fold,
            mode,
            out,
        } => {
            let f = load(&map)?;
            let spec = WindowSpec {
                window: interval(&window)?,
                fold,
                mode: match mode {
                    ModeArg::Regular => WindowMode::Regular,
                    ModeArg::Left => WindowMode::BoundaryLeft,
                    ModeArg::Right => WindowMode::BoundaryRight,
                },
            };
            let g = regular_window(&f, &spec)?;
            note(format!(
                "distance {}",
                fmt_rational(&uniform_distance(&f, &g))
            ));
            emit_map(&g, &out)
        }
        PerturbCmd::Leoize { map, eps, out } => {
            let f = load(&map)?;
            let g = leoize(&f, &rational(&eps)?)?;
            note(format!(
                "distance {}",
                fmt_rational(&uniform_distance(&f, &g))
            ));
            emit_map(&g, &out)
        }
        PerturbCmd::Markovize {
            map,
            eps,
            depth,
            out,
        } => {
            let f = load(&map)?;
            let effort = MarkovizeEffort {
                depth_cap: depth,
                ..MarkovizeEffort::default()
            };
            match markovize(&f, &rational(&eps)?, effort)? {
                Markovized::Achieved { map: g, windows } => {
                    note(format!(
                        "distance {} windows {}",
                        fmt_rational(&uniform_distance(&f, &g)),
                        windows.len()
                    ));
                    emit_map(&g, &out)
                }
                Markovized::NotAchieved(na) => Err(Failure::Contract(na.to_string())),
            }
        }
        PerturbCmd::Horseshoe { map, n, eps, out } => {
            let f = load(&map)?;
            let hs = horseshoe(&f, n, &rational(&eps)?)?;
            note(format!(
                "fixed point {} window {} fold {} entropy >= {}",
                fmt_rational(&hs.fixed_point),
                hs.window,
                hs.fold,
                fmt_f64(hs.entropy_lower_bound)
            ));
            emit_map(&hs.map, &out)
        }
    }
}

fn markov(f: &PwaMap, depth: usize) -> Res<()> {
    match markov_partition(f, OrbitCaps::default())? {
        MarkovDetection::Markov(ms) => {
            let ms = refine(f, &ms, depth);
            let pts: Vec<String> = ms.points.iter().map(fmt_rational).collect();
            println!("points {}", pts.join(" "));
            print!("{}", ms.dump());
            let fl = mixing_flags(&ms);
            println!(
                "irreducible {} aperiodic {} strongly-mixing {}",
                fl.irreducible, fl.aperiodic, fl.strongly_mixing
            );
            println!("top-entropy {}", fmt_f64(top_entropy(&ms)));
            Ok(())
        }
        MarkovDetection::NotMarkovWithinBound(nm) => Err(Failure::Contract(format!(
            "not Markov within bound: orbit of {} ({})",
            fmt_rational(&nm.point),
            nm.reason
        ))),
    }
}

fn entropy(cmd: EntropyCmd) -> Res<()> {
    match cmd {
        EntropyCmd::Rohlin { map, id } => {
            let e = rohlin_entropy(&load(&map)?)?;
            println!("{CSV_HEADER}");
            println!("{}", e.csv_row(&id));
            Ok(())
        }
        EntropyCmd::TwoSlope {
            eta,
            m,
            map,
            big_m,
            out,
        } => {
            let eta = rational(&eta)?;
            match map {
                None => {
                    let m = m.ok_or_else(|| Failure::Usage("--m or --map is required".into()))?;
                    println!("{} nats", fmt_f64(two_slope_entropy(&eta, m)?));
                    Ok(())
                }
                Some(map) => {
                    let f = load(&map)?;
                    let big_m = match big_m {
                        Some(s) => s
                            .parse()
                            .map_err(|_| Failure::Usage(format!("bad integer {s:?}")))?,
                        None => two_slope_base(&f),
                    };
                    let h = build_two_slope(&f, &eta, &big_m)?;
                    let e = rohlin_entropy(&h)?;
                    note(format!(
                        "entropy {} nats distance {}",
                        fmt_f64(e.value),
                        fmt_rational(&uniform_distance(&f, &h))
                    ));
                    emit_map(&h, &out)
                }
            }
        }
        EntropyCmd::SolveEta { c, m } => {
            let eta = solve_eta(c, m)?;
            println!("{}", fmt_rational(&eta));
            Ok(())
        }
        EntropyCmd::Set { map, c, eps, out } => {
            let f = load(&map)?;
            let s = set_entropy(&f, c, &rational(&eps)?)?;
            note(format!(
                "entropy {} nats distance {}",
                fmt_f64(s.value),
                fmt_rational(&uniform_distance(&f, &s.map))
            ));
            emit_map(&s.map, &out)
        }
        EntropyCmd::Stage { map, n, eps, out } => {
            let f = load(&map)?;
            let tower = entropy_stage(&f, n, &rational(&eps)?)?;
            for (k, s) in tower.stages.iter().enumerate() {
                note(format!(
                    "stage {} window {} fold {} entropy {}",
                    k + 1,
                    s.window,
                    s.fold,
                    fmt_f64(s.entropy)
                ));
            }
            emit_map(&tower.map, &out)
        }
    }
}

fn observable(s: &str) -> Res<Observable> {
    if s == "identity" {
        return Ok(Observable::identity());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["hat", c, w] => Ok(Observable::hat(&rational(c)?, &rational(w)?)),
        _ => Err(Failure::Usage(format!(
            "bad observable {s:?}, expected identity or hat:C:W"
        ))),
    }
}

fn stats(cmd: StatsCmd) -> Res<()> {
    match cmd {
        StatsCmd::Corr {
            map,
            a,
            b,
            n,
            id,
            cap,
        } => {
            let f = load(&map)?;
            let (a, b) = (interval_set(&a)?, interval_set(&b)?);
            let c = correlations(&f, &a, &b, n + 1, cap)?;
            println!("{CORR_CSV_HEADER}");
            print!("{}", corr_csv_rows(&id, &a, &b, &c));
            Ok(())
        }
        StatsCmd::Mixing { map, a, b, horizon } => {
            let s = mixing_scores(
                &load(&map)?,
                &interval_set(&a)?,
                &interval_set(&b)?,
                horizon,
            )?;
            println!("horizon {}", s.horizon);
            println!("ergodic-score {}", fmt_f64(s.ergodic_score));
            println!("weak-score {}", fmt_f64(s.weak_score));
            let tail: Vec<String> = s.strong_tail.iter().map(|&t| fmt_f64(t)).collect();
            println!("strong-tail {}", tail.join(" "));
            Ok(())
        }
        StatsCmd::LeoTime { map, window, cap } => {
            println!("{}", leo_time(&load(&map)?, &interval(&window)?, cap)?);
            Ok(())
        }
        StatsCmd::Birkhoff { map, x, y, n, obs } => {
            let f = load(&map)?;
            let o = observable(&obs)?;
            let x = rational(&x)?;
            let avg = match y {
                None => birkhoff(&f, &o, &x, n)?,
                Some(y) => {
                    let pair = PairObservable::product(o.clone(), o);
                    let v = birkhoff_pair(&f, &pair, &x, &rational(&y)?, n)?;
                    note(format!("baseline {}", fmt_rational(&pair.baseline())));
                    v
                }
            };
            println!("{}", fmt_rational(&avg));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("ERGOMAP_NODE_CAP") {
        match v.parse::<usize>() {
            Ok(cap) => set_node_cap(cap),
            Err(_) => {
                eprintln!("error: ERGOMAP_NODE_CAP must be a positive integer, got {v:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Contract(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONTRACT)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(m)) => {
            eprintln!("io error: {m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
