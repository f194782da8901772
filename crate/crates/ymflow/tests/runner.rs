//! Drives the installed binary end to end: exit codes, checkpoint resume,
//! thread-count invariance, and the canonical config text round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use tempfile::TempDir;

use ymflow::config::{
    config_hash, emit_config, parse_config, GridConfig, InitKind, InitialData, ObservableKind,
    ObservablesConfig, OutputConfig, RunConfig, RunMode, SeriesFormat,
};
use ymflow::flow::StepperConfig;
use ymflow::{Bc, Domain, GroupKind};

fn ymflow(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ymflow"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn ymflow")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().expect("non-utf8 temp path").to_string()
}

/// Small SU(2) smoothing run with mid-run checkpoints; eight steps of 1e-3.
fn su2_config(out_dir: &Path) -> String {
    format!(
        "grid.dims = 6 6 6\n\
         grid.h = 0.25\n\
         grid.domain_kind = torus\n\
         group = su2\n\
         bc = periodic\n\
         mode = zds\n\
         initial_data.kind = smooth\n\
         initial_data.seed = 5\n\
         initial_data.amplitude = 0.5\n\
         stepper.dt_init = 0.001\n\
         stepper.cfl = 0.1\n\
         stepper.t_end = 0.008\n\
         observables.list = energy dissipation\n\
         output.dir = {}\n\
         output.checkpoint_every = 3\n",
        out_dir.display()
    )
}

#[test]
fn cli_run_is_deterministic_and_resumable() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("run.cfg");
    fs::write(&cfg_path, su2_config(&out_dir)).unwrap();

    let first = ymflow(&["run", &path_str(&cfg_path)], &[]);
    assert_eq!(code(&first), 0, "run failed: {}", stderr(&first));
    assert!(stdout(&first).contains("run t ="));
    let final_ckpt = out_dir.join("checkpoint_final.ymfc");
    let reference = fs::read(&final_ckpt).unwrap();

    // Same config again: bit-identical final state.
    let second = ymflow(&["run", &path_str(&cfg_path)], &[]);
    assert_eq!(code(&second), 0);
    assert_eq!(fs::read(&final_ckpt).unwrap(), reference);

    // Resume from the step-3 checkpoint after wiping the run directory;
    // the tail of the trajectory must replay bit for bit.
    let mid = tmp.path().join("mid.ymfc");
    fs::copy(out_dir.join("checkpoint_step00000003.ymfc"), &mid).unwrap();
    fs::remove_dir_all(&out_dir).unwrap();
    let resumed = ymflow(&["resume", &path_str(&mid)], &[]);
    assert_eq!(code(&resumed), 0, "resume failed: {}", stderr(&resumed));
    assert_eq!(fs::read(&final_ckpt).unwrap(), reference);

    let report = ymflow(&["report", &path_str(&out_dir)], &[]);
    assert_eq!(code(&report), 0, "report failed: {}", stderr(&report));
    let text = stdout(&report);
    assert!(text.contains("series energy"));
    assert!(text.contains("series dissipation"));
}

#[test]
fn cli_thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("run.cfg");
    // Large enough that the row-parallel matvec path actually engages.
    fs::write(
        &cfg_path,
        format!(
            "grid.dims = 16 16 16\n\
             grid.h = 0.125\n\
             grid.domain_kind = torus\n\
             group = u1\n\
             bc = periodic\n\
             mode = zds\n\
             initial_data.kind = ha_sample\n\
             initial_data.seed = 9\n\
             initial_data.amplitude = 0.4\n\
             initial_data.a = 0.5\n\
             stepper.dt_init = 0.002\n\
             stepper.t_end = 0.005\n\
             observables.list = energy\n\
             output.dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();

    let final_ckpt = out_dir.join("checkpoint_final.ymfc");
    let serial = ymflow(&["run", &path_str(&cfg_path)], &[("YMFLOW_THREADS", "1")]);
    assert_eq!(code(&serial), 0, "serial run failed: {}", stderr(&serial));
    let reference = fs::read(&final_ckpt).unwrap();

    let threaded = ymflow(&["run", &path_str(&cfg_path)], &[("YMFLOW_THREADS", "4")]);
    assert_eq!(code(&threaded), 0, "threaded run failed: {}", stderr(&threaded));
    assert_eq!(fs::read(&final_ckpt).unwrap(), reference);

    let bad = ymflow(&["run", &path_str(&cfg_path)], &[("YMFLOW_THREADS", "many")]);
    assert_eq!(code(&bad), 2);
    assert!(stderr(&bad).contains("YMFLOW_THREADS"));
}

#[test]
fn cli_wilson_zero_connection_traces_identity() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg_path = tmp.path().join("run.cfg");
    fs::write(
        &cfg_path,
        format!(
            "grid.dims = 6 6 6\n\
             grid.h = 0.25\n\
             grid.domain_kind = box\n\
             group = su2\n\
             bc = neumann\n\
             mode = direct\n\
             initial_data.kind = zero\n\
             stepper.dt_init = 0.001\n\
             stepper.t_end = 0.002\n\
             observables.list = energy\n\
             output.dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let run = ymflow(&["run", &path_str(&cfg_path)], &[]);
    assert_eq!(code(&run), 0, "run failed: {}", stderr(&run));

    // Closed unit square in the plane x2 = 0.75; the trivial connection
    // has identity holonomy, so the trace is the matrix dimension.
    let loops_path = tmp.path().join("loops.txt");
    fs::write(
        &loops_path,
        "sq 0.125  0.25 0.25 0.75  1.25 0.25 0.75  1.25 1.25 0.75  0.25 1.25 0.75  0.25 0.25 0.75\n",
    )
    .unwrap();
    let out = ymflow(
        &[
            "wilson",
            &path_str(&out_dir.join("checkpoint_final.ymfc")),
            "--loops",
            &path_str(&loops_path),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "wilson failed: {}", stderr(&out));
    let line = stdout(&out);
    let toks: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(toks[0], "sq");
    let re: f64 = toks[1].parse().unwrap();
    let im: f64 = toks[2].parse().unwrap();
    assert!((re - 2.0).abs() <= 1e-12, "trace re {re}");
    assert!(im.abs() <= 1e-12, "trace im {im}");
}

#[test]
fn cli_compare_oracle_passes_for_abelian_modes() {
    let tmp = TempDir::new().unwrap();
    for mode in ["zds", "direct"] {
        let cfg_path = tmp.path().join(format!("{mode}.cfg"));
        fs::write(
            &cfg_path,
            format!(
                "grid.dims = 12 12 12\n\
                 grid.h = 0.125\n\
                 grid.domain_kind = torus\n\
                 group = u1\n\
                 bc = periodic\n\
                 mode = {mode}\n\
                 initial_data.kind = u1_mode\n\
                 initial_data.amplitude = 0.7\n\
                 initial_data.comp = 0\n\
                 initial_data.wave = 0 1 0\n\
                 stepper.dt_init = 0.001\n\
                 stepper.t_end = 0.01\n\
                 output.dir = {}\n",
                tmp.path().join(mode).display()
            ),
        )
        .unwrap();
        let out = ymflow(&["compare-oracle", &path_str(&cfg_path)], &[]);
        assert_eq!(code(&out), 0, "{mode} oracle failed: {}", stderr(&out));
        assert!(stdout(&out).starts_with("PASS oracle_"), "{}", stdout(&out));
    }
}

#[test]
fn cli_rejects_bad_inputs_with_diagnostics() {
    let tmp = TempDir::new().unwrap();

    // Several violations at once: all must be reported, not just the first.
    let bad_cfg = tmp.path().join("bad.cfg");
    fs::write(
        &bad_cfg,
        "grid.dims = 8 8\n\
         grid.spacing = 0.25\n\
         group = u1\n\
         bc = periodic\n\
         mode = direct\n\
         stepper.t_end = 0.01\n",
    )
    .unwrap();
    let out = ymflow(&["run", &path_str(&bad_cfg)], &[]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("unknown key"), "{err}");
    assert!(err.contains("grid.dims"), "{err}");

    // The exact oracle refuses nonabelian groups.
    let su2_cfg = tmp.path().join("su2.cfg");
    fs::write(&su2_cfg, su2_config(&tmp.path().join("out"))).unwrap();
    let out = ymflow(&["compare-oracle", &path_str(&su2_cfg)], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("abelian"), "{}", stderr(&out));

    // A config file is not a checkpoint.
    let out = ymflow(&["resume", &path_str(&su2_cfg)], &[]);
    assert_eq!(code(&out), 2);

    let out = ymflow(
        &[
            "wilson",
            &path_str(&tmp.path().join("absent.ymfc")),
            "--loops",
            &path_str(&su2_cfg),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);

    // Reporting an existing but empty directory is an error, not a pass.
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = ymflow(&["report", &path_str(&empty)], &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no series found"), "{}", stderr(&out));
}

/// Assembles a config that satisfies every cross-field rule from free knobs.
#[allow(clippy::too_many_arguments)]
fn assemble(
    which_domain: usize,
    su2: bool,
    kind_ix: usize,
    mode_ix: usize,
    dims: [usize; 3],
    h: f64,
    seed: u64,
    amplitude: f64,
    a_init: f64,
    comp: usize,
    wave: [usize; 3],
    dt_init: f64,
    cfl: f64,
    t_end: f64,
    energy_backtrack: bool,
    reproject_every: usize,
    obs_mask: u32,
    a_obs: f64,
    neps: usize,
    checkpoint_every: u64,
) -> RunConfig {
    let (domain, bc) = match which_domain {
        0 => (Domain::Torus, Bc::Periodic),
        1 => (Domain::Box3, Bc::Neumann),
        _ => (Domain::Box3, Bc::Dirichlet),
    };
    let group = if su2 { GroupKind::Su2 } else { GroupKind::U1 };
    let kind = if su2 {
        [InitKind::Zero, InitKind::Smooth, InitKind::PureGauge][kind_ix % 3]
    } else {
        [
            InitKind::Zero,
            InitKind::Smooth,
            InitKind::PureGauge,
            InitKind::U1Mode,
            InitKind::HaSample,
        ][kind_ix]
    };
    let mut mode = [RunMode::Direct, RunMode::Zds, RunMode::ZdsRecovered][mode_ix];
    if kind == InitKind::HaSample && mode == RunMode::Direct {
        mode = RunMode::Zds;
    }
    let all = [
        ObservableKind::Energy,
        ObservableKind::Dissipation,
        ObservableKind::SupCurvature,
        ObservableKind::AAction,
        ObservableKind::Wilson,
        ObservableKind::SmallTime,
        ObservableKind::EpsilonFamily,
        ObservableKind::Boundary,
        ObservableKind::Bianchi,
    ];
    let mut list: Vec<ObservableKind> = all
        .iter()
        .enumerate()
        .filter(|(i, _)| obs_mask & (1 << i) != 0)
        .map(|(_, k)| *k)
        .collect();
    if mode == RunMode::Direct {
        list.retain(|k| *k != ObservableKind::EpsilonFamily);
    }
    let epsilon = if list.contains(&ObservableKind::EpsilonFamily) {
        let k = neps.max(1);
        (1..=k).map(|i| t_end * i as f64 / (k + 1) as f64).collect()
    } else {
        Vec::new()
    };
    let loops = if list.contains(&ObservableKind::Wilson) {
        Some("loops.txt".to_string())
    } else {
        None
    };
    RunConfig {
        grid: GridConfig { dims, h, domain },
        group,
        bc,
        mode,
        initial: InitialData {
            kind,
            seed,
            amplitude,
            a: a_init,
            comp,
            wave,
            checkpoint: None,
        },
        stepper: StepperConfig {
            dt_init,
            cfl,
            t_end,
            energy_backtrack,
            reproject_every,
        },
        observables: ObservablesConfig {
            list,
            a: a_obs,
            loops,
            epsilon,
        },
        output: OutputConfig {
            dir: "out".to_string(),
            checkpoint_every,
            series_format: SeriesFormat::Csv,
        },
    }
}

proptest! {
    // The emitted text is a fixed point: parsing it back gives an equal
    // config with the same hash, and re-emission reproduces it byte for byte.
    #[test]
    fn config_text_round_trips(
        which_domain in 0..3usize,
        su2 in proptest::bool::ANY,
        kind_ix in 0..5usize,
        mode_ix in 0..3usize,
        dims in prop::array::uniform3(4..12usize),
        h in 0.05f64..1.0,
        seed in prop::num::u64::ANY,
        amplitude in 0.0f64..2.0,
        a_init in 0.05f64..0.95,
        comp in 0..3usize,
        wave in prop::array::uniform3(0..4usize),
        dt_init in 1e-5f64..1e-2,
        cfl in 0.01f64..0.25,
        t_end in 1e-3f64..0.1,
        energy_backtrack in proptest::bool::ANY,
        reproject_every in 1..64usize,
        obs_mask in 0u32..512,
        a_obs in 0.5f64..0.99,
        neps in 0..4usize,
        checkpoint_every in 0..8u64,
    ) {
        let cfg = assemble(
            which_domain, su2, kind_ix, mode_ix, dims, h, seed, amplitude,
            a_init, comp, wave, dt_init, cfl, t_end, energy_backtrack,
            reproject_every, obs_mask, a_obs, neps, checkpoint_every,
        );
        let text = emit_config(&cfg);
        let reparsed = parse_config(&text);
        prop_assert!(reparsed.is_ok(), "emitted config failed to parse: {:?}\n{text}", reparsed.err());
        let reparsed = reparsed.unwrap();
        prop_assert_eq!(&reparsed, &cfg);
        prop_assert_eq!(config_hash(&reparsed), config_hash(&cfg));
        prop_assert_eq!(emit_config(&reparsed), text);
    }
}
