//! CSV and SVG rendering. Everything is built in memory as a `String` so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use irslab_core::{DiversityReport, OutageCurve};

pub const OUTAGE_HEADER: &str = "method,N,sigma_d,gamma_th_db,gamma_t_db,p_out,std_err,n_samples,seed,error";
pub const DIVERSITY_HEADER: &str = "method,N,theoretical_order,fitted_slope,fit_from_db,fit_to_db";
pub const DIAGNOSTICS_HEADER: &str = "diagnostic_name,N,epsilon,value_nats";

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\"").replace('\n', " "))
    } else {
        field.to_string()
    }
}

fn opt_exp(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn outage_csv(curves: &[OutageCurve]) -> String {
    let mut s = String::new();
    s.push_str(OUTAGE_HEADER);
    s.push('\n');
    for c in curves {
        let (n_samples, seed) = match c.samples {
            Some(info) => (info.n_samples.to_string(), info.seed.to_string()),
            None => (String::new(), String::new()),
        };
        for p in &c.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                c.method,
                c.n_elements,
                c.sigma_d,
                c.gamma_th_db,
                p.gamma_t_db,
                opt_exp(p.p_out),
                opt_exp(p.std_err),
                n_samples,
                seed,
                quote(p.error.as_deref().unwrap_or("")),
            );
        }
    }
    s
}

pub fn diversity_csv(reports: &[(String, DiversityReport)]) -> String {
    let mut s = String::new();
    s.push_str(DIVERSITY_HEADER);
    s.push('\n');
    for (method, r) in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            method, r.n_elements, r.theoretical_order, r.fitted_slope, r.fit_range_db.0, r.fit_range_db.1
        );
    }
    s
}

/// One diagnostics row; `n` and `epsilon` are blank when they do not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub name: &'static str,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub value_nats: f64,
}

pub fn diagnostics_csv(rows: &[DiagnosticRow]) -> String {
    let mut s = String::new();
    s.push_str(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e}",
            r.name,
            r.n.map(|n| n.to_string()).unwrap_or_default(),
            r.epsilon.map(|e| e.to_string()).unwrap_or_default(),
            r.value_nats
        );
    }
    s
}

const COLORS: [&str; 7] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#7f7f7f",
];

/// Log-y outage versus transmit SNR, one polyline per curve.
pub fn outage_svg(curves: &[OutageCurve]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 170.0, 20.0, 50.0);
    let pts: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.values()).filter(|p| p.1 > 0.0).collect();
    let x_lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = pts
        .iter()
        .map(|p| p.1.log10().floor())
        .fold(0.0f64, f64::min)
        .max(-300.0);
    let (x_lo, x_hi) = if pts.is_empty() || x_hi <= x_lo {
        (0.0, 1.0)
    } else {
        (x_lo, x_hi)
    };
    let y_lo = if y_lo >= 0.0 { -1.0 } else { y_lo };
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |p: f64| top + (p.log10().max(y_lo) / y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let mut decade = y_lo as i64;
    while decade <= 0 {
        let y = sy(10f64.powi(decade as i32));
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{decade}</text>"##,
            left + pw,
            left - 4.0,
            y + 4.0
        );
        decade += 1;
    }
    for i in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.1}</text>"#,
            sx(x),
            top + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">transmit SNR (dB)</text>"#,
        left + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" transform="rotate(-90 14 {:.2})" text-anchor="middle">outage probability</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = c
            .values()
            .filter(|p| p.1 > 0.0)
            .map(|(x, p)| format!("{:.2},{:.2}", sx(x), sy(p)))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = top + 14.0 * (i as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{} (N={})</text>"#,
            left + pw + 10.0,
            left + pw + 30.0,
            left + pw + 35.0,
            ly + 4.0,
            c.method,
            c.n_elements
        );
    }
    s.push_str("</svg>\n");
    s
}
