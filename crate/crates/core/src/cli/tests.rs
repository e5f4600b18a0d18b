use super::*;
use proptest::prelude::*;

fn fam(s: &str) -> FamilySpec {
    FamilySpec::parse(s).unwrap()
}

fn f(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn family_parse_reports_positions() {
    assert_eq!(fam("hyper:0.97,1.25").params, vec![0.97, 1.25]);
    assert_eq!(fam("head:2, 3,0.1").params, vec![2.0, 3.0, 0.1]);
    let e = FamilySpec::parse("hyper:0.97,x").unwrap_err();
    assert_eq!(e.position, 11);
    assert!(e.to_string().ends_with(&format!("{}^", " ".repeat(13))));
    assert_eq!(FamilySpec::parse("nope:1").unwrap_err().position, 0);
    assert_eq!(FamilySpec::parse("invsq").unwrap_err().position, 5);
    assert_eq!(FamilySpec::parse("invsq:1,2").unwrap_err().position, 6);
    assert_eq!(FamilySpec::parse("invsq:inf").unwrap_err().position, 6);
    assert_eq!(CliError::from(e).exit_code(), 2);
}

#[test]
fn family_display_round_trips() {
    for s in ["hyper:0.97,1.25", "invsq:-0.5", "bessel:0.3,1", "head:2,3,0.1"] {
        assert_eq!(fam(&fam(s).to_string()), fam(s));
    }
}

#[test]
fn solve_flat_family() {
    let t = cmd_solve(&fam("hyper:0.97,1"), 0.2).unwrap();
    let row = &t.rows[0];
    assert!((f(&row[4]) - 1.25).abs() < 1e-12);
    assert!((f(&row[6]) - 0.375).abs() < 1e-12);
    assert!((f(&row[3]) - 0.5).abs() < 1e-12);
    assert_eq!(row[7], "localized");
}

#[test]
fn solve_without_transition() {
    let t = cmd_solve(&fam("invsq:0.2"), 0.3).unwrap();
    assert_eq!(t.column("b0c"), vec!["inf"]);
    assert_eq!(t.column("regime"), vec!["no-transition"]);
    assert!(f(t.column("m")[0]) > 0.0);
}

#[test]
fn solve_at_and_above_critical() {
    let t = cmd_solve(&fam("hyper:1,1"), 0.5).unwrap();
    assert_eq!(t.column("regime"), vec!["critical"]);
    assert_eq!(f(t.column("gibbs")[0]), 0.0);
    assert_eq!(f(t.column("m")[0]), 0.0);
    let t = cmd_solve(&fam("hyper:1,1"), 0.8).unwrap();
    assert_eq!(f(t.column("rho")[0]), 1.0);
    assert!(matches!(cmd_solve(&fam("hyper:1,1"), -1.0), Err(CliError::Usage(_))));
}

#[test]
fn critical_line_special_points() {
    let t = cmd_critical_line(0.97, &[0.0]).unwrap();
    assert!((f(t.column("u_c")[0]) - 2f64.ln()).abs() < 1e-9);
    let t = cmd_critical_line(1.0, &[-1.0]).unwrap();
    assert!((f(t.column("u_c")[0]) - 3f64.ln()).abs() < 1e-9);
    let t = cmd_critical_line(0.97, &[-1.0, 0.0, 0.2]).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.column("status")[..2], ["ok", "ok"]);
    assert_ne!(t.column("status")[2], "ok");
    assert_eq!(t.column("b0c")[2], "nan");
    assert!(t.column("u_c_monotone").iter().all(|c| *c == "true"));
}

#[test]
fn phase_diagram_lines_and_jump() {
    let u = [0.0, 0.5, 1.0, 1.5, 2.0];
    let t = cmd_phase_diagram(1.0, &[0.0, -1.0], &u).unwrap();
    let kinds = t.column("kind");
    let ms = t.column("m");
    let us = t.column("u");
    let ws = t.column("w");
    for i in 0..t.rows.len() {
        let (m, uu, w) = (f(ms[i]), f(us[i]), f(ws[i]));
        if kinds[i] == "line" && w == 0.0 {
            let b0 = (-uu).exp();
            let closed = if b0 >= 0.5 { 0.0 } else { (1.0 - 2.0 * b0) / (2.0 * (1.0 - b0)) };
            assert!((m - closed).abs() < 1e-9, "u = {uu}: {m} vs {closed}");
        }
        assert!((0.0..=1.0).contains(&m));
    }
    let boundary: Vec<usize> = (0..t.rows.len()).filter(|i| kinds[*i] == "boundary").collect();
    assert_eq!(boundary.len(), 2);
    let jump = f(t.column("jump_closed")[boundary[1]]);
    assert!((jump - 1.0 / 6.0).abs() < 1e-12);
    assert!((f(ms[boundary[1]]) - 1.0 / 6.0).abs() < 1e-6);
    assert!(matches!(cmd_phase_diagram(1.0, &[0.2], &u), Err(CliError::Usage(_))));
}

#[test]
fn flat_line_matches_closed_form() {
    // flat chain: w_p = 2 x^p with x² = b0 / (1 - b0)
    for b0 in [0.05, 0.25, 0.4] {
        let t = cmd_solve(&fam("hyper:1,1"), b0).unwrap();
        let rho = f(t.column("rho")[0]);
        assert!((rho - 0.5 / (b0 * (1.0 - b0)).sqrt()).abs() < 1e-12);
        let m = f(t.column("m")[0]);
        assert!((m - (1.0 - 2.0 * b0) / (2.0 * (1.0 - b0))).abs() < 1e-12, "{m}");
    }
}

#[test]
fn exponent_of_hyper_family() {
    let t = cmd_exponent(
        &fam("hyper:0.97,1.25"),
        ModelChoice::Auto,
        &parse_log_grid("eps", "1e-6:1e-8:7").unwrap(),
        &parse_log_grid("gap", "1e-4:1e-6:7").unwrap(),
    )
    .unwrap();
    let laws = t.column("law");
    let vals = t.column("value");
    let i = laws.iter().position(|l| *l == "m_exponent").unwrap();
    assert!((f(vals[i]) - 1.0 / 3.0).abs() / (1.0 / 3.0) < 0.05, "{}", vals[i]);
    let i = laws.iter().position(|l| *l == "theta").unwrap();
    assert!((f(vals[i]) - 0.25).abs() / 0.25 < 0.05, "{}", vals[i]);
}

#[test]
fn enumerate_two_step_bridge() {
    let t = cmd_enumerate(&fam("hyper:0.97,1"), 0.2, &[2], Boundary::Bridge).unwrap();
    assert!((f(t.column("z")[0]) - 6.25).abs() < 1e-12);
    assert!(cmd_enumerate(&fam("hyper:0.97,1"), 0.2, &[40], Boundary::Free).is_err());
}

#[test]
fn simulate_is_deterministic() {
    let a = cmd_simulate(&fam("hyper:1,1"), 0.2, 20_000, 7, 2).unwrap();
    let b = cmd_simulate(&fam("hyper:1,1"), 0.2, 20_000, 7, 2).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 2);
    assert_ne!(a.column("return_fraction")[0], a.column("return_fraction")[1]);
    assert_eq!(a.column("odd_returns"), vec!["0", "0"]);
    let with_pool = with_threads(Some(1), || cmd_simulate(&fam("hyper:1,1"), 0.2, 20_000, 7, 2)).unwrap().unwrap();
    assert_eq!(a, with_pool);
}

#[test]
fn grids_and_threads() {
    assert_eq!(parse_grid("w", "0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
    assert_eq!(parse_list("w", "-1, 0.5").unwrap(), vec![-1.0, 0.5]);
    assert!(matches!(parse_list("w", "a"), Err(CliError::Usage(_))));
    let g = parse_log_grid("e", "1e-2:1e-4:3").unwrap();
    assert!((g[1] - 1e-3).abs() < 1e-15);
    assert!(matches!(with_threads(Some(0), || ()), Err(CliError::Usage(_))));
    assert_eq!(num(f64::INFINITY), "inf");
    assert_eq!(num(f64::NAN), "nan");
}

#[test]
fn csv_quotes_family_names() {
    let csv = cmd_solve(&fam("hyper:0.97,1"), 0.2).unwrap().to_csv().unwrap();
    assert!(csv.starts_with("family,b0,u,b0c,rho,gibbs,m,regime\n\"hyper:0.97,1\","));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solve_outputs_are_physical(s in 0.6f64..2.5, a in 0.8f64..1.5, u in 0.0f64..3.0) {
        let t = cmd_solve(&fam(&format!("hyper:{a},{s}")), (-u).exp()).unwrap();
        let m = f(t.column("m")[0]);
        prop_assert!((0.0..=1.0).contains(&m));
        prop_assert!(f(t.column("gibbs")[0]) <= 0.0);
        prop_assert!(f(t.column("rho")[0]) >= 1.0);
    }
}
