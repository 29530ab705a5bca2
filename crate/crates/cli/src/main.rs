//! Scenario-driven command line for the moving-boundary wave engine.
//!
//! Every subcommand reads a JSON scenario file, prints `key=value` summary
//! lines (prefixed with `#` when followed by CSV) and emits one CSV table.
//! Floats are printed with 17 significant digits so identical inputs produce
//! byte-identical output.
//!
//! Exit codes: 0 success, 2 validation/parse/domain failure, 3 horizon
//! exceeded, 4 numerical non-convergence.

use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use wavebc::catalog::Expr;
use wavebc::control;
use wavebc::numeric::linspace;
use wavebc::oracle::{self, Invariant};
use wavebc::scenario::{parse_scenario, Scenario};
use wavebc::stability::{self, Classification, OmegaEstimate};
use wavebc::Error;

#[derive(Parser)]
#[command(name = "wavebc", version, about = "Exact characteristics engine for the wave equation between two moving endpoints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scenario and print the critical times
    Check {
        scenario: PathBuf,
        /// Write output to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the randomized region spot-check
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sample the solution on a space-time grid (CSV: t,x,p,q,y,y_t)
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spatial points per time slice
        #[arg(long)]
        nx: Option<usize>,
        /// Number of time slices over [0, horizon]
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Synthesize the boundary control, verify it, and emit it (CSV: t,u,v)
    Control {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
    },
    /// Decay products and classification (CSV: tau,n,psi,ln_psi_over_phi_n)
    Stability {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of reflection cycles in the decay table
        #[arg(long, default_value_t = 128)]
        nmax: usize,
    },
    /// Backward characteristic trace (CSV: event_index,time,side,factor)
    Trace {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Starting point as "t,x"
        #[arg(long)]
        point: String,
        /// Which invariant to trace: p or q
        #[arg(long, default_value = "p")]
        invariant: String,
    },
    /// Region boundary polylines up to the horizon (CSV: family,index,t,x)
    Regions {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Points per polyline
        #[arg(long)]
        nt: Option<usize>,
    },
}

/// 17 significant digits, fixed scientific form, no negative zero.
fn fmt(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::HorizonExceeded(_) => 3,
        Error::NonConvergence(_) | Error::Runaway(_) => 4,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn emit(out: Option<PathBuf>, text: String) -> Result<(), Error> {
    match out {
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::NonConvergence(format!("write failed: {e}"))),
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Check { scenario, out, seed } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, check_text(&sc, seed)?)
        }
        Command::Solve { scenario, out, nx, nt } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, solve_text(&sc, nx, nt)?)
        }
        Command::Control { scenario, out, nx, nt } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, control_text(&sc, nx, nt)?)
        }
        Command::Stability { scenario, out, nmax } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, stability_text(&sc, nmax)?)
        }
        Command::Trace { scenario, out, point, invariant } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, trace_text(&sc, &point, &invariant)?)
        }
        Command::Regions { scenario, out, nt } => {
            let sc = parse_scenario(&scenario)?;
            emit(out, regions_text(&sc, nt)?)
        }
    }
}

/// Deterministic 64-bit mixer for the region spot-check.
struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn check_text(sc: &Scenario, seed: u64) -> Result<String, Error> {
    let mut s = String::new();
    let report = &sc.report;
    s += &format!("valid={}\n", report.pass());
    s += &format!("alpha_derivative_bound={}\n", fmt(report.alpha_derivative_bound));
    s += &format!("beta_derivative_bound={}\n", fmt(report.beta_derivative_bound));
    s += &format!("min_gap={}\n", fmt(report.min_gap));
    if let Some(note) = &report.interpolation_note {
        s += &format!("interpolation={note}\n");
    }
    s += &format!("t_star={}\n", fmt(sc.maps.min_control_time()?));
    s += &format!("t_double_star={}\n", fmt(sc.maps.secondary_time()?));
    s += &format!("phi0={}\n", fmt(sc.maps.phi_iterate(1, 0.0)?));
    s += &format!("increasing_ok={}\n", sc.maps.increasing_ok());
    s += &format!("degenerate_regions={}\n", sc.maps.degenerate.len());

    // randomized tiling spot-check: every sampled point must classify and
    // satisfy its slab's half-open interval
    let mut rng = SplitMix(seed);
    let mut failures = 0usize;
    let horizon = sc.horizon();
    for _ in 0..10_000 {
        let t = 0.999 * horizon * rng.next_f64();
        let (a, b) = (sc.pair().alpha.value(t), sc.pair().beta.value(t));
        let x = a + (b - a) * (1e-6 + (1.0 - 2e-6) * rng.next_f64());
        match sc.maps.classify(t, x) {
            Err(_) => failures += 1,
            Ok((rp, rq)) => {
                let snap = sc.maps.snap();
                let (plo, phi) = sc.maps.region_interval(rp.family, rp.index).unwrap();
                let (qlo, qhi) = sc.maps.region_interval(rq.family, rq.index).unwrap();
                let sp = t - x;
                let wq = t + x;
                if !(sp >= plo - snap && sp < phi + snap) || !(wq >= qlo - snap && wq < qhi + snap)
                {
                    failures += 1;
                }
            }
        }
    }
    s += &format!("tiling_ok={}\n", failures == 0);
    s += &format!("seed={seed}\n");
    Ok(s)
}

fn solve_text(sc: &Scenario, nx: Option<usize>, nt: Option<usize>) -> Result<String, Error> {
    let nx = nx.unwrap_or(sc.grid.n_x);
    let nt = nt.unwrap_or(sc.grid.n_t);
    let mut s = String::from("t,x,p,q,y,y_t\n");
    for t in linspace(0.0, sc.horizon(), nt) {
        let fs = wavebc::reconstruct(sc, t, nx)?;
        for i in 0..fs.xs.len() {
            s += &format!(
                "{},{},{},{},{},{}\n",
                fmt(fs.t),
                fmt(fs.xs[i]),
                fmt(fs.p[i]),
                fmt(fs.q[i]),
                fmt(fs.y[i]),
                fmt(fs.y_t[i])
            );
        }
    }
    Ok(s)
}

fn control_text(sc: &Scenario, nx: Option<usize>, nt: Option<usize>) -> Result<String, Error> {
    let nx = nx.unwrap_or(sc.grid.n_x);
    let nt = nt.unwrap_or(64.max(sc.grid.n_t));
    // default to the rest-steering control when the scenario names none
    let (v_signal, u_signal) = if sc.control.is_zero() {
        let base = sc.with_control(wavebc::ControlSignal::zero());
        (control::null_control_v(&base)?, Some(control::null_control_u(&base)?))
    } else {
        (sc.control.clone(), None)
    };
    let report = control::verify_null(sc, &v_signal, nx)?;
    let mut s = String::new();
    s += &format!("# t_star={}\n", fmt(report.t_star));
    s += &format!("# initial_energy={}\n", fmt(report.initial_energy));
    s += &format!("# terminal_energy={}\n", fmt(report.terminal_energy));
    s += &format!("# relative_energy={}\n", fmt(report.relative_energy()));
    s += &format!("# max_abs_y={}\n", fmt(report.max_abs_y));
    s += &format!("# max_abs_y_t={}\n", fmt(report.max_abs_y_t));
    for note in v_signal.notes.iter() {
        s += &format!("# note={note}\n");
    }
    let ts = linspace(0.0, sc.horizon(), nt);
    // position-level values: closed form when available, primitive otherwise
    let us = match &u_signal {
        Some(u) => ts.iter().map(|&t| u.eval(t)).collect::<Result<Vec<_>, _>>()?,
        None => {
            let anchor = sc.riemann.y0.value(0.0);
            v_signal.primitive_samples(&ts, anchor, sc.tol.quadrature)?
        }
    };
    s += "t,u,v\n";
    for (i, &t) in ts.iter().enumerate() {
        s += &format!("{},{},{}\n", fmt(t), fmt(us[i]), fmt(v_signal.eval_v(t)?));
    }
    Ok(s)
}

fn stability_text(sc: &Scenario, nmax: usize) -> Result<String, Error> {
    let report = stability::psi_table(&sc.maps, &sc.feedback, nmax, 256)?;
    let omega = stability::growth_bound(&report);
    let candidates = [
        Expr::parse("power_rate(1)").unwrap(),
        Expr::parse("power_rate(2)").unwrap(),
        Expr::parse("log_rate(1)").unwrap(),
    ];
    let verdict = stability::classify_decay(&report, &candidates);
    let mut s = String::new();
    s += &format!(
        "# classification={}\n",
        match &verdict {
            Classification::NoDecay => "no-decay".into(),
            Classification::Decays => "decays".into(),
            Classification::Exponential { omega } => format!("exponential omega={}", fmt(*omega)),
            Classification::FiniteTime { time } => format!("finite-time t={}", fmt(*time)),
            Classification::FitsRate { rate, .. } => format!("fits-rate {rate}"),
            Classification::Inconclusive => "inconclusive".into(),
        }
    );
    s += &format!(
        "# omega={}\n",
        match omega {
            OmegaEstimate::Value(v) => fmt(v),
            OmegaEstimate::Infinite => "inf".into(),
            OmegaEstimate::Undefined => "undefined".into(),
        }
    );
    s += &format!("# increasing_ok={}\n", report.increasing_ok);
    s += &format!("# n_max={}\n", report.n_max);
    for note in &report.notes {
        s += &format!("# note={note}\n");
    }
    s += "tau,n,psi,ln_psi_over_phi_n\n";
    for (j, &tau) in report.tau_grid.iter().enumerate() {
        for n in 0..=report.n_max {
            let ratio = report.ln_psi[n][j] / report.phi_n[n][j];
            s += &format!(
                "{},{},{},{}\n",
                fmt(tau),
                n,
                fmt(report.psi(n, j)),
                if ratio.is_finite() { fmt(ratio) } else { "-inf".into() }
            );
        }
    }
    Ok(s)
}

fn trace_text(sc: &Scenario, point: &str, invariant: &str) -> Result<String, Error> {
    let parts: Vec<&str> = point.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("--point expects \"t,x\", got `{point}`")));
    }
    let t: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad time `{}`", parts[0])))?;
    let x: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad position `{}`", parts[1])))?;
    let inv = match invariant {
        "p" => Invariant::P,
        "q" => Invariant::Q,
        other => return Err(Error::Parse(format!("--invariant must be p or q, got `{other}`"))),
    };
    let tr = oracle::trace(sc, t, x, inv)?;
    let mut s = String::new();
    s += &format!("# start_t={}\n", fmt(t));
    s += &format!("# start_x={}\n", fmt(x));
    s += &format!("# invariant={inv}\n");
    s += &format!("# value={}\n", fmt(tr.value));
    s += &format!("# terminal_coord={}\n", fmt(tr.terminal_coord));
    s += &format!("# terminal_invariant={}\n", tr.terminal_invariant);
    s += "event_index,time,side,factor\n";
    for (i, ev) in tr.events.iter().enumerate() {
        s += &format!("{},{},{},{}\n", i, fmt(ev.time), ev.side, fmt(ev.factor));
    }
    Ok(s)
}

fn regions_text(sc: &Scenario, nt: Option<usize>) -> Result<String, Error> {
    let nt = nt.unwrap_or(sc.grid.n_t).max(2);
    let horizon = sc.horizon();
    let mut s = String::from("family,index,t,x\n");
    for (i, &b) in sc.maps.p_breakpoints().iter().enumerate() {
        // slope-one line t - x = b, from the near curve to the far one
        let t_enter = match sc.maps.alpha_minus().invert(b) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let t_exit = match sc.maps.beta_minus().invert(b) {
            Ok(v) => v.min(horizon),
            Err(Error::HorizonExceeded(_)) => horizon,
            Err(_) => continue,
        };
        if t_exit <= t_enter {
            continue;
        }
        for t in linspace(t_enter, t_exit, nt) {
            s += &format!("p,{},{},{}\n", i, fmt(t), fmt(t - b));
        }
    }
    for (i, &c) in sc.maps.q_breakpoints().iter().enumerate() {
        // slope-minus-one line t + x = c, from the far curve to the near one
        let t_enter = match sc.maps.beta_plus().invert(c) {
            Ok(v) => v.max(0.0),
            Err(_) => continue,
        };
        let t_exit = match sc.maps.alpha_plus().invert(c) {
            Ok(v) => v.min(horizon),
            Err(Error::HorizonExceeded(_)) => horizon,
            Err(_) => continue,
        };
        if t_exit <= t_enter {
            continue;
        }
        for t in linspace(t_enter, t_exit, nt) {
            s += &format!("q,{},{},{}\n", i, fmt(t), fmt(c - t));
        }
    }
    Ok(s)
}
