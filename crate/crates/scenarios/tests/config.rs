use scfie::config::{Bc, Formulation, Overrides, Reference};
use scfie::{Error, Scenario};
use scfie_core::{GradedMesh, IncidentField, Method, Problem};

const KITE: &str = r#"
[obstacle.1]
shape = "kite"

[problem]
k = 4.0

[discretization]
n = 120
"#;

fn parse(text: &str) -> Result<Scenario, Error> {
    Scenario::from_toml_str(text, &Overrides::default())
}

fn config_error(text: &str) -> String {
    match parse(text) {
        Err(Error::Config(msg)) => msg,
        Err(e) => panic!("expected a configuration error, got {e}"),
        Ok(_) => panic!("expected a configuration error for\n{text}"),
    }
}

#[test]
fn defaults() {
    let s = parse(KITE).unwrap();
    assert_eq!(s.obstacles.len(), 1);
    assert_eq!(s.bc, Bc::Dirichlet);
    assert_eq!(s.formulation, Formulation::Smoothed);
    assert_eq!(s.problem(), Problem::SmoothedDirichlet);
    assert_eq!(s.method, Method::Mk);
    assert_eq!(s.eta, 4.0);
    assert_eq!(s.gmres_tol, 1e-6);
    assert_eq!(s.mesh(), GradedMesh::Identity);
    assert_eq!(s.incident, IncidentField::plane_wave(0.0));
    assert_eq!(s.output.far_field_dirs, 360);
    assert_eq!(s.convergence.reference, Reference::Auto);
    assert_eq!(s.discretization(s.method, s.n).unwrap().len(), 120);
}

#[test]
fn full_file() {
    let s = parse(
        r#"
[obstacle.2]
shape = "circle"
radius = 0.5
offset = [3.0, 0.0]

[obstacle.1]
shape = "drop"
mirror = true

[problem]
bc = "neumann"
formulation = "classic"
k = 2.0
eta = 1.0
incident = "point-sources"
sources = [[0.0, 0.0, -1.0], [3.0, 0.1, 1.0]]
gmres_tol = 1e-10

[discretization]
method = "KR10"
n = 64
mesh_p = 3
diff = "fd4"

[output]
dir = "results"
prefix = "run"
far_field_dirs = 90

[convergence]
n_list = [16, 32, 64]
reference = "self"
reference_multiplier = 4
"#,
    )
    .unwrap();
    assert_eq!(s.obstacles.len(), 2);
    assert!(s.obstacles[0].mirror && s.obstacles[0].shape.has_corner());
    assert_eq!(s.obstacles[1].offset.x, 3.0);
    assert_eq!(s.problem(), Problem::Neumann);
    assert_eq!((s.k, s.eta), (2.0, 1.0));
    assert_eq!(s.mesh(), GradedMesh::Kress { p: 3 });
    assert_eq!(s.convergence.n_list, vec![16, 32, 64]);
    assert_eq!(s.output.prefix, "run");
}

#[test]
fn overrides_take_precedence() {
    let ov = Overrides {
        n: Some(40),
        method: Some("tr".into()),
        k: Some(1.0),
        bc: Some("neumann".into()),
        ..Overrides::default()
    };
    let s = Scenario::from_toml_str(KITE, &ov).unwrap();
    assert_eq!((s.n, s.method, s.k, s.eta, s.bc), (40, Method::Tr, 1.0, 1.0, Bc::Neumann));
}

#[test]
fn close_pair_expands_to_two_kites() {
    let s = parse(
        r#"
[close_pair]
separation = 1e-5
[problem]
k = 4.0
incident = "pair-sources"
[discretization]
n = 64
"#,
    )
    .unwrap();
    let c = s.curves();
    assert_eq!(c.len(), 2);
    // Closest points at x = ∓d/2.
    assert!((c[0].point(0.0).x + 0.5e-5).abs() < 1e-15);
    assert!((c[1].point(0.0).x - 0.5e-5).abs() < 1e-15);
    let IncidentField::PointSources(src) = &s.incident else { panic!() };
    assert_eq!(src.len(), 2);
    assert!(c[0].contains(src[0].location) && c[1].contains(src[1].location));
    let t = s.with_separation(0.1).unwrap();
    assert!((t.curves()[1].point(0.0).x - 0.05).abs() < 1e-15);
    assert!(parse(KITE).unwrap().with_separation(0.1).is_err());
}

#[test]
fn validation_messages_name_the_field() {
    let cases = [
        ("[problem]\nk = 1.0\n[discretization]\nn = 16\n", "obstacle"),
        (&KITE.replace("k = 4.0", "k = -4.0"), "problem.k"),
        (&KITE.replace("k = 4.0", "k = 4.0\neta = 0.0"), "problem.eta"),
        (&KITE.replace("n = 120", "n = 121"), "discretization.n"),
        (&KITE.replace("\"kite\"", "\"drop\""), "discretization.mesh_p"),
        (&KITE.replace("\"kite\"", "\"hexagon\""), "obstacle.1.shape"),
        (&KITE.replace("n = 120", "n = 120\nmesh_p = 1"), "discretization.mesh_p"),
        (&KITE.replace("n = 120", "n = 120\nmethod = \"XY\""), "discretization.method"),
        (&KITE.replace("k = 4.0", "k = 4.0\nformulation = \"classic\"").replace("n = 120", "n = 120\nmethod = \"TR\""), "discretization.method"),
        (&KITE.replace("k = 4.0", "k = 4.0\nincident = \"point-sources\"\nsources = [[5.0, 5.0, 1.0]]"), "problem.sources"),
        (&KITE.replace("k = 4.0", "k = 4.0\nincident = \"point-sources\""), "problem.sources"),
        (&KITE.replace("k = 4.0", "k = 4.0\nincident = \"pair-sources\""), "problem.incident"),
        (&KITE.replace("obstacle.1", "obstacle.first"), "obstacle.first"),
        (&format!("{KITE}\n[convergence]\nn_list = [32, 16]\n"), "convergence.n_list"),
        (&format!("{KITE}\n[nearfield]\nbbox = [1.0, 0.0, 0.0, 1.0]\n"), "nearfield.bbox"),
        (&KITE.replace("\"kite\"", "\"kite\"\nradius = 2.0"), "obstacle.1.radius"),
    ];
    for (text, field) in cases {
        let msg = config_error(text);
        assert!(msg.starts_with(field), "'{msg}' should name {field}");
    }
    // Unknown keys are rejected by the parser.
    config_error(&KITE.replace("n = 120", "n = 120\nresolution = 3"));
    let err = parse("[problem]\nk = 1.0\n[discretization]\nn = 16\n").unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn load_reports_missing_files() {
    let err = Scenario::load(std::path::Path::new("/nonexistent/scenario.toml"), &Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn shipped_recipes_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("recipes");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        Scenario::load(&path, &Overrides::default()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 6);
}
