use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rtm_cli::config::{Origin, Overrides, Preset, RunConfig};
use rtm_cli::exit::{CliError, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER};
use rtm_cli::selftest::{flat_reference, quick_suite_with};
use rtm_core::forward::{BoundaryKind, ScatterData};
use rtm_core::geometry::{ImageGrid, Point, Regime};
use rtm_core::imaging::{load_grid, save_grid};
use rtm_core::{Result as CoreResult, C64};
use tempfile::TempDir;

const NULL_CONFIG: &str = r#"
[surface]
profile = "gammaR"
[medium]
kind = "dirichlet"
[acquisition]
background_radius = 2.0
r_s = 4.0
r_r = 5.0
n_s = 8
n_r = 8
[imaging]
x1_min = -1.0
x1_max = 1.0
x2_min = -1.0
x2_max = 0.5
n1 = 8
n2 = 4
"#;

const SMALL_F1: &str = r#"
[surface]
profile = "f1"
[medium]
kind = "dirichlet"
[acquisition]
background_radius = 5.0
r_s = 7.0
r_r = 8.0
n_s = 12
n_r = 12
[imaging]
x1_min = -3.0
x1_max = 3.0
x2_min = -1.0
x2_max = 0.5
n1 = 12
n2 = 4
[noise]
tau = 0.05
seed = 11
"#;

fn rtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtm")).args(args).output().expect("rtm runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.toml", "[surface]\ncolour = \"red\"\n");
    let o = rtm(&["--config", s(&cfg), "--out", s(&dir.path().join("d.rtmd")), "forward"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).contains("surface.colour"), "{}", stderr(&o));

    let cfg = write(&dir, "sec.toml", "[mesh]\nsize = 1\n");
    let o = rtm(&["--config", s(&cfg), "--out", s(&dir.path().join("d.rtmd")), "forward"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).contains("mesh"), "{}", stderr(&o));
}

#[test]
fn invalid_values_exit_2_with_the_key() {
    let dir = TempDir::new().unwrap();
    for (text, key) in [
        ("[medium]\nk1 = -1.0\n", "medium.k1"),
        ("[acquisition]\nr_s = 10.0\n", "acquisition.r_s"),
        ("[acquisition]\nn_r = 1\n", "acquisition.n_r"),
        ("[noise]\ntau = -0.1\n", "noise.tau"),
        ("[medium]\nkind = \"soft\"\n", "medium.kind"),
    ] {
        let cfg = write(&dir, "v.toml", text);
        let o = rtm(&["--config", s(&cfg), "greens", "--at", "0,1", "--source", "1,1", "--flat"]);
        assert_eq!(code(&o), EXIT_CONFIG, "{text}");
        assert!(stderr(&o).contains(key), "{text}: {}", stderr(&o));
    }
}

#[test]
fn missing_flags_and_files_map_to_their_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&rtm(&["forward"])), EXIT_CONFIG);
    let missing = dir.path().join("nope.toml");
    let o = rtm(&["--config", s(&missing), "--out", s(&dir.path().join("d.rtmd")), "forward"]);
    assert_eq!(code(&o), EXIT_IO);
    let o = rtm(&["--data", s(&dir.path().join("nope.rtmd")), "--out", s(&dir.path().join("g.rtmg")), "image"]);
    assert_eq!(code(&o), EXIT_IO);
    let junk = write(&dir, "junk.rtmd", "not a data file");
    let o = rtm(&["--data", s(&junk), "--out", s(&dir.path().join("g.rtmg")), "image"]);
    assert_eq!(code(&o), EXIT_IO);
    let o = rtm(&["render", "--grid", s(&junk), "--out", s(&dir.path().join("x.pgm"))]);
    assert_eq!(code(&o), EXIT_IO);
}

#[test]
fn core_errors_map_to_exit_codes() {
    use rtm_core::Error;
    assert_eq!(CliError::from(Error::Domain("x".into())).code, EXIT_CONFIG);
    assert_eq!(CliError::from(Error::Geometry("x".into())).code, EXIT_CONFIG);
    assert_eq!(CliError::from(Error::Coincident).code, EXIT_CONFIG);
    assert_eq!(CliError::from(Error::Solver("singular".into())).code, EXIT_SOLVER);
    assert_eq!(CliError::from(Error::Format("x".into())).code, EXIT_IO);
    assert_eq!(CliError::from(Error::Io(std::io::Error::other("x"))).code, EXIT_IO);
}

#[test]
fn null_surface_gives_vanishing_data_and_image() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "null.toml", NULL_CONFIG);
    let data = dir.path().join("null.rtmd");
    let o = rtm(&["--config", s(&cfg), "--out", s(&data), "forward"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = ScatterData::load(&data).unwrap();
    assert_eq!((d.n_r(), d.n_s()), (8, 8));
    assert!(d.max_abs() <= 1e-8, "max-abs {}", d.max_abs());

    let grid = dir.path().join("null.rtmg");
    let pgm = dir.path().join("null.pgm");
    let o = rtm(&["--config", s(&cfg), "--data", s(&data), "--out", s(&grid), "image", "--pgm", s(&pgm)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = load_grid(&grid).unwrap();
    assert_eq!((g.n1, g.n2), (8, 4));
    assert!(g.values.iter().all(|v| v.abs() <= 1e-8));
    assert!(stdout(&o).contains("render skipped"));
    assert!(!pgm.exists());
}

#[test]
fn header_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "null.toml", NULL_CONFIG);
    let data = dir.path().join("null.rtmd");
    assert_eq!(code(&rtm(&["--config", s(&cfg), "--out", s(&data), "forward"])), 0);
    let grid = dir.path().join("g.rtmg");

    let neumann = write(&dir, "n.toml", &NULL_CONFIG.replace("dirichlet", "neumann"));
    let o = rtm(&["--config", s(&neumann), "--data", s(&data), "--out", s(&grid), "image"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).contains("medium.kind"), "{}", stderr(&o));

    let moved = write(&dir, "m.toml", &NULL_CONFIG.replace("r_r = 5.0", "r_r = 6.0"));
    let o = rtm(&["--config", s(&moved), "--data", s(&data), "--out", s(&grid), "image"]);
    assert_eq!(code(&o), EXIT_CONFIG);

    let o = rtm(&["--config", s(&cfg), "--data", s(&data), "--out", s(&grid), "--regime", "far", "image"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).contains("acquisition.regime"), "{}", stderr(&o));
    assert!(!grid.exists());
}

#[test]
fn forward_and_image_are_reproducible_across_threads_and_seeds() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "f1.toml", SMALL_F1);
    let mut data_bytes = Vec::new();
    let mut grid_bytes = Vec::new();
    for threads in ["1", "2", "8"] {
        let data = dir.path().join(format!("d{threads}.rtmd"));
        let o = rtm(&["--config", s(&cfg), "--out", s(&data), "--threads", threads, "forward"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("pivot ratio"));
        let grid = dir.path().join(format!("g{threads}.rtmg"));
        let o = rtm(&["--config", s(&cfg), "--data", s(&data), "--out", s(&grid), "--threads", threads, "image"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("column argmax"), "{}", stdout(&o));
        data_bytes.push(std::fs::read(&data).unwrap());
        grid_bytes.push(std::fs::read(&grid).unwrap());
    }
    assert!(data_bytes.windows(2).all(|w| w[0] == w[1]));
    assert!(grid_bytes.windows(2).all(|w| w[0] == w[1]));

    let d11 = ScatterData::load(&dir.path().join("d1.rtmd")).unwrap();
    assert_eq!(d11.seed, 11);
    assert_eq!(d11.noise_tau, 0.05);
    let other = dir.path().join("s12.rtmd");
    assert_eq!(code(&rtm(&["--config", s(&cfg), "--out", s(&other), "--seed", "12", "forward"])), 0);
    let d12 = ScatterData::load(&other).unwrap();
    assert_eq!(d12.seed, 12);
    let diff = (0..d11.n_r())
        .flat_map(|i| (0..d11.n_s()).map(move |j| (i, j)))
        .map(|(i, j)| (d11.matrix[(i, j)] - d12.matrix[(i, j)]).norm())
        .fold(0.0, f64::max);
    assert!(diff > 0.0);
}

#[test]
fn render_writes_pgm_and_rejects_constant_grids() {
    let dir = TempDir::new().unwrap();
    let grid = dir.path().join("g.rtmg");
    let mut g = ImageGrid::new((0.0, 1.0), (0.0, 1.0), 2, 2).unwrap();
    g.values = vec![0.0, 1.0, 2.0, 0.5];
    save_grid(&g, &grid).unwrap();
    let pgm = dir.path().join("g.pgm");
    let o = rtm(&["render", "--grid", s(&grid), "--out", s(&pgm)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bytes = std::fs::read(&pgm).unwrap();
    let header = b"P5\n2 2\n65535\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 8);

    let o = rtm(&["render", "--grid", s(&grid), "--out", s(&pgm), "--profile", "f9"]);
    assert_eq!(code(&o), EXIT_CONFIG);

    g.values = vec![3.0; 4];
    save_grid(&g, &grid).unwrap();
    let o = rtm(&["render", "--grid", s(&grid), "--out", s(&dir.path().join("c.pgm"))]);
    assert_ne!(code(&o), 0);
    assert!(!dir.path().join("c.pgm").exists());
}

#[test]
fn render_overlay_marks_surface_pixels() {
    let dir = TempDir::new().unwrap();
    let grid = dir.path().join("g.rtmg");
    let mut g = ImageGrid::new((-5.0, 5.0), (-1.5, 1.0), 40, 20).unwrap();
    g.values = (0..800).map(|k| (k % 7) as f64).collect();
    save_grid(&g, &grid).unwrap();
    let plain = dir.path().join("p.pgm");
    let marked = dir.path().join("m.pgm");
    assert_eq!(code(&rtm(&["render", "--grid", s(&grid), "--out", s(&plain)])), 0);
    assert_eq!(code(&rtm(&["render", "--grid", s(&grid), "--out", s(&marked), "--profile", "f1"])), 0);
    let a = std::fs::read(&plain).unwrap();
    let b = std::fs::read(&marked).unwrap();
    assert_eq!(a.len(), b.len());
    let changed = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    assert!(changed > 0);
    assert!(a.iter().zip(&b).filter(|(x, y)| x != y).all(|(_, &y)| y == 0xff));
}

#[test]
fn selftest_quick_passes() {
    let o = rtm(&["selftest", "quick"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["hankel", "arclength", "flat-oracle", "helmholtz-kirchhoff", "reciprocity"] {
        assert!(out.contains(name), "{name} missing from\n{out}");
    }
    assert!(!out.contains("FAIL"));
}

#[test]
fn corrupted_reference_fails_the_quick_suite() {
    let flipped = |kind: BoundaryKind, k1: f64, k2: f64, x: Point, y: Point| -> CoreResult<C64> {
        // Sign-flip the image term: Φ(x, y) ∓ Φ(x, y') becomes Φ(x, y) ± Φ(x, y').
        let direct = rtm_core::greens::phi_field(k1, x, y).value;
        Ok(direct * 2.0 - flat_reference(kind, k1, k2, x, y)?)
    };
    let reports = quick_suite_with(&flipped).unwrap();
    let failing: Vec<_> = reports.iter().filter(|r| !r.pass).map(|r| r.name.clone()).collect();
    assert!(failing.iter().any(|n| n == "flat-oracle"), "{failing:?}");
    let clean = quick_suite_with(&flat_reference).unwrap();
    assert!(clean.iter().all(|r| r.pass));
}

#[test]
fn provenance_records_origins() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.toml", "[medium]\nkind = \"neumann\"\n[noise]\nseed = 4\n");
    let o = rtm(&["--config", s(&cfg), "--seed", "9", "--preset", "paper-scale", "greens", "--at", "0.5,1", "--source", "-0.5,2", "--flat"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# preset: paper-scale\n"), "{out}");
    for line in [
        "medium.kind = neumann  (file)",
        "medium.k1 = 10  (preset)",
        "noise.seed = 9  (flag)",
        "noise.tau = 0  (default)",
        "acquisition.n_s = 1024  (preset)",
    ] {
        assert!(out.contains(line), "{line} missing from\n{out}");
    }
    assert!(out.contains("flat Neumann G(x, y) ="), "{out}");
}

#[test]
fn greens_matches_the_closed_form() {
    let o = rtm(&["greens", "--at", "0.5,1", "--source", "-0.5,2", "--flat"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let want = rtm_core::greens::halfplane_green(rtm_core::greens::HalfPlaneKind::Dirichlet, 5.0, [0.5, 1.0], [-0.5, 2.0]).unwrap();
    assert!(stdout(&o).contains(&format!("{:+.12e} {:+.12e}i", want.re, want.im)), "{}", stdout(&o));
}

#[test]
fn paper_scale_penetrable_doubles_the_transducers() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "p.toml", "[medium]\nkind = \"penetrable\"\n");
    let c = RunConfig::resolve(Preset::PaperScale, Some(&cfg), &Overrides::default()).unwrap();
    assert_eq!((c.n_s, c.n_r), (2048, 2048));
    assert_eq!(c.origin("acquisition.n_s"), Origin::Preset);

    let cfg = write(&dir, "q.toml", "[medium]\nkind = \"penetrable\"\n[acquisition]\nn_s = 100\n");
    let c = RunConfig::resolve(Preset::PaperScale, Some(&cfg), &Overrides::default()).unwrap();
    assert_eq!((c.n_s, c.n_r), (100, 2048));
    assert_eq!(c.origin("acquisition.n_s"), Origin::File);

    let c = RunConfig::resolve(Preset::DeskScale, None, &Overrides { regime: Some(Regime::Far), seed: None }).unwrap();
    assert_eq!((c.n_s, c.k1, c.regime), (64, 5.0, Regime::Far));
    assert_eq!(c.origin("acquisition.regime"), Origin::Flag);
}
