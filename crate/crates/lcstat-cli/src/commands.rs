use std::f64::consts::PI;

use lcstat::bingham::{r_from_s2, s4_from_r, uniaxial_moments};
use lcstat::frank::{concentration_from_phi, dimensional_k, fig4_sweep, Fig4Row};
use lcstat::geometry_kernel::{
    excluded_volume, fourth_moment_frame, frame_aligned_pair, moment_mc_orders, second_moment_diag, RodGeometry,
};
use lcstat::nematic_model::{equilibrium_branches, Phase};
use lcstat::smectic1d::{
    minimize_profile, phase_diagram as sweep, phase_point, refine_boundaries, smectic_n, MinimizeOptions,
    SmecticCoefficients,
};

use crate::config::{parse_grid, parse_list, parse_modes};
use crate::table::{Cell, Output, Table};
use crate::{BinghamArgs, CliError, EquilibriumArgs, FrankArgs, MomentsArgs, N3Preset, PhaseArgs, SmecticArgs, SmecticModel};

const TUNED_N3: f64 = 0.00089;

fn check_eta(eta: f64) -> Result<(), CliError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(CliError::Config(format!("eta = {eta} outside (0, 1]")));
    }
    Ok(())
}

fn check_alpha(grid: &[f64]) -> Result<(), CliError> {
    if let Some(a) = grid.iter().find(|a| !(**a > 0.0)) {
        return Err(CliError::Config(format!("alpha = {a} must be positive")));
    }
    Ok(())
}

// frame-diagonal components, frame index 0 = n1
const M2_NAMES: [&str; 3] = ["M2_11", "M2_22", "M2_33"];
const M4_NAMES: [(&str, [usize; 4]); 6] = [
    ("M4_1111", [0, 0, 0, 0]),
    ("M4_2222", [1, 1, 1, 1]),
    ("M4_3333", [2, 2, 2, 2]),
    ("M4_1122", [0, 0, 1, 1]),
    ("M4_2233", [1, 1, 2, 2]),
    ("M4_1133", [0, 0, 2, 2]),
];

pub fn moments(a: &MomentsArgs) -> Result<Output, CliError> {
    check_eta(a.eta)?;
    let gammas = parse_grid(&a.gamma, "gamma")?;
    if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < PI && g.sin() > 1e-12)) {
        return Err(CliError::Config(format!("gamma = {g} outside (0, pi)")));
    }
    let geom = RodGeometry::unit(a.eta)?;
    let mut t = Table::new("moments", &["gamma", "eta", "component", "analytic", "mc", "stderr", "z"]);
    for (i, &gamma) in gammas.iter().enumerate() {
        let mut exact: Vec<(&str, Vec<usize>, f64)> = vec![("M0", vec![], excluded_volume(gamma, &geom))];
        let d2 = second_moment_diag(gamma, &geom)?;
        for k in 0..3 {
            exact.push((M2_NAMES[k], vec![k, k], d2[k]));
        }
        let w = fourth_moment_frame(gamma, &geom)?.as_array();
        for (k, (name, idx)) in M4_NAMES.iter().enumerate() {
            exact.push((name, idx.to_vec(), w[k]));
        }
        // the pair frame of this axis pair is the lab frame
        let est = if a.mc_samples > 0 {
            let (m, m2) = frame_aligned_pair(gamma);
            Some(moment_mc_orders(&m, &m2, &geom, &[0, 2, 4], a.mc_samples, a.seed.wrapping_add(i as u64))?)
        } else {
            None
        };
        for (name, idx, value) in exact {
            let (mc, se) = match &est {
                Some(e) => {
                    let (v, s) = e[idx.len() / 2].component(&idx);
                    (Some(v), Some(s))
                }
                None => (None, None),
            };
            let z = match (mc, se) {
                (Some(v), Some(s)) if s > 0.0 => Some((v - value) / s),
                _ => None,
            };
            t.push(vec![gamma.into(), a.eta.into(), name.into(), value.into(), mc.into(), se.into(), z.into()]);
        }
    }
    Ok(Output { tables: vec![t], scripts: vec![] })
}

pub fn bingham(a: &BinghamArgs) -> Result<Output, CliError> {
    let rs: Vec<f64> = match &a.s2 {
        Some(s) => parse_list(s, "s2")?.into_iter().map(r_from_s2).collect::<Result<_, _>>()?,
        None => parse_grid(&a.r, "r")?,
    };
    let mut t = Table::new("bingham", &["r", "S2", "S4", "S4_moment_form", "lnZ", "dS2_dr"]);
    for r in rs {
        let m = uniaxial_moments(r)?;
        t.push(vec![r.into(), m.s2().into(), s4_from_r(r)?.into(), m.s4().into(), m.ln_z().into(), m.ds2_dr().into()]);
    }
    let script = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'r'\n\
                  plot 'bingham.csv' using 1:2 with lines, '' using 1:3 with lines\n";
    Ok(Output { tables: vec![t], scripts: vec![("bingham.gp".into(), script.into())] })
}

pub fn equilibrium(a: &EquilibriumArgs) -> Result<Output, CliError> {
    let grid = parse_grid(&a.alpha, "alpha")?;
    check_alpha(&grid)?;
    let mut t = Table::new(
        "equilibrium",
        &["alpha", "branch", "phase", "r", "S2", "S4", "free_energy", "stable", "preferred"],
    );
    for alpha in grid {
        let eq = equilibrium_branches(alpha)?;
        let pref = eq.preferred().r;
        for (i, b) in eq.branches.iter().enumerate() {
            let phase = if i == 0 { Phase::Isotropic } else { Phase::Nematic };
            t.push(vec![
                alpha.into(),
                i.into(),
                phase.label().into(),
                b.r.into(),
                b.s2.into(),
                b.s4.into(),
                b.free_energy.into(),
                b.stable.into(),
                (b.r == pref).into(),
            ]);
        }
    }
    let script = "set datafile separator ','\nset xlabel 'alpha'\nset ylabel 'S2'\n\
                  plot 'equilibrium.csv' every ::1 using 1:($8 eq \"true\" ? $5 : 1/0) with points title 'stable'\n";
    Ok(Output { tables: vec![t], scripts: vec![("equilibrium.gp".into(), script.into())] })
}

struct Physical {
    phi: f64,
    d_cm: f64,
    t: f64,
}

fn physical(a: &FrankArgs) -> Result<Option<Physical>, CliError> {
    match (a.phi, a.d_angstrom, a.temperature) {
        (None, None, None) => Ok(None),
        (Some(phi), Some(d), Some(t)) => {
            if !(phi > 0.0 && phi < 1.0) {
                return Err(CliError::Config(format!("phi = {phi} outside (0, 1)")));
            }
            if !(d > 0.0 && d.is_finite() && t > 0.0 && t.is_finite()) {
                return Err(CliError::Config("D-angstrom and T must be positive".into()));
            }
            Ok(Some(Physical { phi, d_cm: d * 1e-8, t }))
        }
        _ => Err(CliError::Config("phi, D-angstrom and T must be given together".into())),
    }
}

pub fn frank(a: &FrankArgs) -> Result<Output, CliError> {
    let etas = parse_list(&a.eta, "eta")?;
    for &e in &etas {
        check_eta(e)?;
    }
    let phys = physical(a)?;
    let rows: Vec<Fig4Row> = match &phys {
        None => {
            let grid = parse_grid(&a.alpha, "alpha")?;
            check_alpha(&grid)?;
            fig4_sweep(&etas, &grid)?
        }
        Some(p) => {
            let mut rows = Vec::new();
            for &eta in &etas {
                rows.extend(fig4_sweep(&[eta], &[4.0 * p.phi / eta])?);
            }
            rows
        }
    };
    let mut header = vec!["eta", "alpha", "phase", "S2", "S4", "K1", "K2", "K3", "K4"];
    if phys.is_some() {
        header.extend(["L_angstrom", "c_per_cm3", "K1_dyn", "K2_dyn", "K3_dyn", "K4_dyn"]);
    }
    let mut t = Table::new("frank", &header);
    for row in &rows {
        let mut cells: Vec<Cell> = vec![row.eta.into(), row.alpha.into(), row.phase.label().into()];
        match &row.constants {
            Some(k) => {
                cells.extend([k.s2.into(), k.s4.into()]);
                cells.extend(k.as_array().map(Cell::from));
            }
            None => {
                cells.extend([0.0.into(), 0.0.into()]);
                cells.extend(std::iter::repeat_n(Cell::Empty, 4));
            }
        }
        if let Some(p) = &phys {
            let l = p.d_cm / row.eta;
            let c = concentration_from_phi(p.phi, l, p.d_cm);
            cells.extend([(l * 1e8).into(), c.into()]);
            match &row.constants {
                Some(k) => {
                    for v in k.as_array() {
                        cells.push(dimensional_k(v, c, l, p.d_cm, p.t)?.into());
                    }
                }
                None => cells.extend(std::iter::repeat_n(Cell::Empty, 4)),
            }
        }
        t.push(cells);
    }
    let mut script = String::from(
        "set datafile separator ','\nset xlabel 'alpha'\nset ylabel 'K / (pi c^2 L^5 eta kT)'\n",
    );
    script.push_str(&format!("set multiplot layout {},1\n", etas.len()));
    for eta in &etas {
        let sel = |col: usize| format!("(abs($1-{eta:e})<1e-12 ? ${col} : 1/0)");
        script.push_str(&format!(
            "set title 'eta = {eta}'\nplot 'frank.csv' every ::1 using 2:{} with lines title 'K1', \
             '' every ::1 using 2:{} with lines title 'K2', '' every ::1 using 2:{} with lines title 'K3'\n",
            sel(6),
            sel(7),
            sel(8)
        ));
    }
    script.push_str("unset multiplot\n");
    Ok(Output { tables: vec![t], scripts: vec![("frank.gp".into(), script)] })
}

fn coefficients(m: &SmecticModel) -> Result<SmecticCoefficients, CliError> {
    if !(0.0..=1.0).contains(&m.eta) {
        return Err(CliError::Config(format!("eta = {} not in [0, 1]", m.eta)));
    }
    let base = smectic_n(m.eta)?;
    let (d31, d32) = match m.n3_preset {
        N3Preset::Tuned => (TUNED_N3, TUNED_N3),
        N3Preset::Printed => (base.n31, base.n32),
    };
    Ok(base.with_n3(m.n31.unwrap_or(d31), m.n32.unwrap_or(d32))?)
}

fn options(m: &SmecticModel) -> Result<MinimizeOptions, CliError> {
    Ok(MinimizeOptions {
        modes: parse_modes(&m.modes)?,
        d_range: (m.d_min, m.d_max),
        d_tol: m.d_tol,
        seed: m.seed,
        ..MinimizeOptions::default()
    })
}

pub fn smectic(a: &SmecticArgs) -> Result<Output, CliError> {
    let coeffs = coefficients(&a.model)?;
    let opts = options(&a.model)?;
    if !(a.alpha > 0.0) {
        return Err(CliError::Config(format!("alpha = {} must be positive", a.alpha)));
    }
    if a.points == 0 {
        return Err(CliError::Config("points must be at least 1".into()));
    }
    let m = minimize_profile(a.alpha, &coeffs, &opts, &[])?;
    let p = phase_point(a.alpha, &coeffs, &m)?;
    let s = m.profile.samples(a.points)?;
    let mut prof = Table::new("profile", &["x", "c", "S2", "S4", "r"]);
    for j in 0..a.points {
        prof.push(vec![s.x[j].into(), s.c[j].into(), s.s2[j].into(), s.s4[j].into(), s.r[j].into()]);
    }
    let mut summary = Table::new(
        "summary",
        &["alpha", "eta", "phase", "d", "energy", "converged", "density_amplitude", "order_amplitude", "mean_S2"],
    );
    summary.push(vec![
        a.alpha.into(),
        coeffs.eta.into(),
        p.phase.label().into(),
        m.profile.d.into(),
        m.energy.into(),
        m.converged.into(),
        p.density_amplitude.into(),
        p.order_amplitude.into(),
        p.mean_s2.into(),
    ]);
    let mut modes = Table::new("modes", &["n", "u", "v"]);
    for n in 0..m.profile.u.len().max(m.profile.v.len()) {
        let u = if n == 0 { Some(1.0) } else { m.profile.u.get(n - 1).copied() };
        modes.push(vec![n.into(), u.into(), m.profile.v.get(n).copied().into()]);
    }
    let script = "set datafile separator ','\nset xlabel 'x / L'\nset key autotitle columnhead\n\
                  plot 'profile.csv' using 1:2 with lines, '' using 1:3 with lines\n";
    Ok(Output { tables: vec![prof, summary, modes], scripts: vec![("profile.gp".into(), script.into())] })
}

pub fn phase_diagram(a: &PhaseArgs) -> Result<Output, CliError> {
    let coeffs = coefficients(&a.model)?;
    let opts = options(&a.model)?;
    let grid = parse_grid(&a.alpha, "alpha")?;
    check_alpha(&grid)?;
    if !(a.refine >= 0.0) {
        return Err(CliError::Config(format!("refine = {} must be nonnegative", a.refine)));
    }
    let points = sweep(&grid, &coeffs, &opts)?;
    if points.iter().all(|(_, r)| r.is_err()) {
        let msg = points.iter().find_map(|(_, r)| r.as_ref().err().map(|e| e.to_string())).unwrap_or_default();
        return Err(CliError::Numeric(format!("every sweep point failed; first error: {msg}")));
    }
    let mut t = Table::new(
        "phase",
        &["alpha", "eta", "phase", "d", "energy", "density_amplitude", "order_amplitude", "mean_S2", "error"],
    );
    for (alpha, r) in &points {
        match r {
            Ok(p) => t.push(vec![
                p.alpha.into(),
                p.eta.into(),
                p.phase.label().into(),
                p.d.into(),
                p.energy.into(),
                p.density_amplitude.into(),
                p.order_amplitude.into(),
                p.mean_s2.into(),
                Cell::Empty,
            ]),
            Err(e) => {
                let mut row = vec![(*alpha).into(), coeffs.eta.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.push(e.to_string().into());
                t.push(row);
            }
        }
    }
    let mut b = Table::new(
        "boundaries",
        &["alpha_lo", "alpha_hi", "phase_lo", "phase_hi", "energy_lo", "energy_hi", "energy_jump"],
    );
    if a.refine > 0.0 {
        for x in refine_boundaries(&points, &coeffs, &opts, a.refine)? {
            b.push(vec![
                x.alpha_lo.into(),
                x.alpha_hi.into(),
                x.phase_lo.label().into(),
                x.phase_hi.label().into(),
                x.energy_lo.into(),
                x.energy_hi.into(),
                x.energy_jump().into(),
            ]);
        }
    }
    let script = "set datafile separator ','\nset multiplot layout 2,1\nset xlabel 'alpha'\n\
                  set ylabel 'd / L'\nplot 'phase.csv' every ::1 using 1:4 with linespoints title 'layer period'\n\
                  set ylabel 'energy'\nplot 'phase.csv' every ::1 using 1:5 with lines title 'F/d'\nunset multiplot\n";
    Ok(Output { tables: vec![t, b], scripts: vec![("phase.gp".into(), script.into())] })
}
