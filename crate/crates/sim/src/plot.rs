//! Static SVG rendering of campaign CSV files. Plots are computed from the
//! CSV alone; nothing is re-simulated.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV has no rows")]
    Empty,
    #[error("CSV mixes experiments or has an unknown experiment id {0:?}")]
    Experiment(String),
    #[error("bad value {value:?} in column {column}")]
    Value { column: &'static str, value: String },
}

#[derive(Debug, Clone, Deserialize)]
struct Row {
    experiment: String,
    algorithm: String,
    users: String,
    gamma_th_db: String,
    grid: String,
    element_area_m2: f64,
    p_out: f64,
    mean_oris_used: f64,
    median_snr_db: f64,
    q1_snr_db: f64,
    q3_snr_db: f64,
    whisker_low_snr_db: f64,
    whisker_high_snr_db: f64,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const DASHES: [&str; 3] = ["", "6,3", "2,3"];
const MARKERS: [&str; 3] = ["circle", "square", "triangle"];

fn algorithm_index(id: &str) -> usize {
    match id {
        "no-oris" => 0,
        "single-shot" => 1,
        _ => 2,
    }
}

fn algorithm_name(id: &str) -> &'static str {
    match id {
        "no-oris" => "No ORIS",
        "single-shot" => "Single-shot max-min",
        _ => "Iterative pruning",
    }
}

fn number(column: &'static str, value: &str) -> Result<f64, PlotError> {
    value.parse().map_err(|_| PlotError::Value { column, value: value.to_string() })
}

struct Series {
    name: String,
    color: &'static str,
    dash: &'static str,
    marker: &'static str,
    points: Vec<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    ticks: Vec<(f64, String)>,
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').to_string()
    }
}

fn linear_axis(lo: f64, hi: f64) -> Axis {
    let (lo, hi) = if lo == hi { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = start;
    while v <= end + step * 1e-9 {
        let t = if v.abs() < step * 1e-9 { 0.0 } else { v };
        ticks.push((t, fmt_tick(t)));
        v += step;
    }
    Axis { lo: start, hi: end, log: false, ticks }
}

/// Outage axis: logarithmic when the positive values span two decades or
/// more, linear on `[0, 1]`-style ranges otherwise.
fn outage_axis(values: &[f64]) -> Axis {
    let positive: Vec<f64> = values.iter().cloned().filter(|v| *v > 0.0).collect();
    let max = positive.iter().cloned().fold(0.0, f64::max);
    let min = positive.iter().cloned().fold(f64::INFINITY, f64::min);
    if !positive.is_empty() && max / min >= 100.0 {
        let lo = min.log10().floor();
        let hi = max.log10().ceil().max(lo + 1.0);
        let ticks = (lo as i32..=hi as i32).map(|e| (e as f64, format!("1e{e}"))).collect();
        Axis { lo, hi, log: true, ticks }
    } else {
        linear_axis(0.0, if max > 0.0 { max } else { 1.0 })
    }
}

impl Axis {
    /// Position in `[0, 1]` along the axis; values at or below zero on a
    /// log axis sit at the bottom edge.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log {
            if v > 0.0 {
                v.log10()
            } else {
                self.lo
            }
        } else {
            v
        };
        ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn tick_frac(&self, t: f64) -> f64 {
        ((t - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
}

fn px(x: &Axis, v: f64) -> f64 {
    LEFT + x.frac(v) * (WIDTH - LEFT - RIGHT)
}

fn py(y: &Axis, v: f64) -> f64 {
    HEIGHT - BOTTOM - y.frac(v) * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0,
        escape(title)
    );
}

fn frame(out: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    for (t, s) in &y.ticks {
        let yy = HEIGHT - BOTTOM - y.tick_frac(*t) * (HEIGHT - TOP - BOTTOM);
        let _ = writeln!(out, r##"<line x1="{x0:.1}" y1="{yy:.1}" x2="{x1:.1}" y2="{yy:.1}" stroke="#e0e0e0"/>"##);
        let _ =
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, yy + 4.0, escape(s));
    }
    for (t, s) in &x.ticks {
        let xx = LEFT + x.tick_frac(*t) * (WIDTH - LEFT - RIGHT);
        let _ = writeln!(out, r##"<line x1="{xx:.1}" y1="{y0:.1}" x2="{xx:.1}" y2="{:.1}" stroke="#333"/>"##, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{xx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y0 + 18.0, escape(s));
    }
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn marker(out: &mut String, kind: &str, x: f64, y: f64, color: &str) {
    match kind {
        "square" => {
            let _ =
                writeln!(out, r#"<rect x="{:.1}" y="{:.1}" width="6" height="6" fill="{color}"/>"#, x - 3.0, y - 3.0);
        }
        "triangle" => {
            let _ = writeln!(
                out,
                r#"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="{color}"/>"#,
                x,
                y - 4.0,
                x - 4.0,
                y + 3.0,
                x + 4.0,
                y + 3.0
            );
        }
        _ => {
            let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
        }
    }
}

fn legend(out: &mut String, entries: &[(String, &str, &str, &str)]) {
    let x = WIDTH - RIGHT + 16.0;
    for (i, (name, color, dash, mk)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            x + 24.0
        );
        marker(out, mk, x + 12.0, y, color);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x + 30.0, y + 4.0, escape(name));
    }
}

fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    x_ticks: Option<Vec<(f64, String)>>,
) -> String {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let x_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x = match x_ticks {
        Some(ticks) => {
            let (lo, hi) = if x_lo == x_hi { (x_lo - 1.0, x_hi + 1.0) } else { (x_lo - 0.5, x_hi + 0.5) };
            Axis { lo, hi, log: false, ticks }
        }
        None => linear_axis(x_lo, x_hi),
    };
    let y = outage_axis(&ys);
    let mut out = String::new();
    header(&mut out, title);
    let y_title = if y.log { format!("{y_label} (log scale)") } else { y_label.to_string() };
    frame(&mut out, &x, &y, x_label, &y_title);
    for s in series {
        let pts: Vec<String> = s.points.iter().map(|&(a, b)| format!("{:.1},{:.1}", px(&x, a), py(&y, b))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2" stroke-dasharray="{}"/>"#,
            pts.join(" "),
            s.color,
            s.dash
        );
        for &(a, b) in &s.points {
            marker(&mut out, s.marker, px(&x, a), py(&y, b), s.color);
        }
    }
    let entries: Vec<(String, &str, &str, &str)> =
        series.iter().map(|s| (s.name.clone(), s.color, s.dash, s.marker)).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

fn box_chart(rows: &[Row]) -> Result<String, PlotError> {
    let mut users: Vec<usize> = Vec::new();
    for r in rows {
        let u = number("users", &r.users)? as usize;
        if !users.contains(&u) {
            users.push(u);
        }
    }
    users.sort_unstable();
    let values: Vec<f64> =
        rows.iter().flat_map(|r| [r.whisker_low_snr_db, r.whisker_high_snr_db]).filter(|v| v.is_finite()).collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y = linear_axis(lo, hi);
    let n = users.len() as f64;
    let x = Axis {
        lo: 0.0,
        hi: n,
        log: false,
        ticks: users.iter().enumerate().map(|(i, u)| (i as f64 + 0.5, u.to_string())).collect(),
    };
    let mut out = String::new();
    header(&mut out, "Received SNR per user");
    frame(&mut out, &x, &y, "Number of users", "SNR (dB)");
    let slot = (WIDTH - LEFT - RIGHT) / n;
    let bw = slot / 4.5;
    for r in rows {
        let u = number("users", &r.users)? as usize;
        let i = users.iter().position(|v| *v == u).expect("collected above");
        let a = algorithm_index(&r.algorithm);
        let cx = LEFT + slot * (i as f64 + 0.5) + (a as f64 - 1.0) * bw * 1.1;
        let color = COLORS[a];
        let (yq1, yq3, ym) = (py(&y, r.q1_snr_db), py(&y, r.q3_snr_db), py(&y, r.median_snr_db));
        let (ylo, yhi) = (py(&y, r.whisker_low_snr_db), py(&y, r.whisker_high_snr_db));
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{ylo:.1}" x2="{cx:.1}" y2="{yq1:.1}" stroke="{color}"/>"#);
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{yq3:.1}" x2="{cx:.1}" y2="{yhi:.1}" stroke="{color}"/>"#);
        for yy in [ylo, yhi] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{yy:.1}" x2="{:.1}" y2="{yy:.1}" stroke="{color}"/>"#,
                cx - bw / 4.0,
                cx + bw / 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{yq3:.1}" width="{bw:.1}" height="{:.1}" fill="{color}" fill-opacity="0.25" stroke="{color}"/>"#,
            cx - bw / 2.0,
            (yq1 - yq3).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{ym:.1}" x2="{:.1}" y2="{ym:.1}" stroke="{color}" stroke-width="2"/>"#,
            cx - bw / 2.0,
            cx + bw / 2.0
        );
    }
    let entries: Vec<(String, &str, &str, &str)> = ["no-oris", "single-shot", "algorithm1"]
        .iter()
        .map(|a| (algorithm_name(a).to_string(), COLORS[algorithm_index(a)], "", "square"))
        .collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Groups rows into series keyed by `(algorithm, key)`, keeping CSV order.
fn grouped<'a>(rows: &'a [Row], key: impl Fn(&Row) -> String) -> BTreeMap<(usize, String), Vec<&'a Row>> {
    let mut m: BTreeMap<(usize, String), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        m.entry((algorithm_index(&r.algorithm), key(r))).or_default().push(r);
    }
    m
}

fn fig2(rows: &[Row]) -> Result<String, PlotError> {
    let mut thresholds: Vec<String> = Vec::new();
    for r in rows {
        if !thresholds.contains(&r.gamma_th_db) {
            thresholds.push(r.gamma_th_db.clone());
        }
    }
    let mut series = Vec::new();
    for ((a, th), group) in grouped(rows, |r| r.gamma_th_db.clone()) {
        let t = thresholds.iter().position(|v| *v == th).unwrap_or(0);
        let points =
            group.iter().map(|r| Ok((number("users", &r.users)?, r.p_out))).collect::<Result<Vec<_>, PlotError>>()?;
        series.push(Series {
            name: format!("{}, {} dB", algorithm_name(["no-oris", "single-shot", "algorithm1"][a]), th),
            color: COLORS[a],
            dash: DASHES[t % 3],
            marker: MARKERS[t % 3],
            points,
        });
    }
    Ok(line_chart("Outage probability against number of users", "Number of users", "Outage probability", &series, None))
}

fn fig3(rows: &[Row]) -> Result<String, PlotError> {
    let mut users: Vec<String> = Vec::new();
    for r in rows {
        if !users.contains(&r.users) {
            users.push(r.users.clone());
        }
    }
    let mut series = Vec::new();
    for ((a, u), group) in grouped(rows, |r| r.users.clone()) {
        let t = users.iter().position(|v| *v == u).unwrap_or(0);
        let points = group
            .iter()
            .map(|r| Ok((number("gamma_th_db", &r.gamma_th_db)?, r.p_out)))
            .collect::<Result<Vec<_>, PlotError>>()?;
        series.push(Series {
            name: format!("{}, U = {}", algorithm_name(["no-oris", "single-shot", "algorithm1"][a]), u),
            color: COLORS[a],
            dash: DASHES[t % 3],
            marker: MARKERS[t % 3],
            points,
        });
    }
    Ok(line_chart(
        "Outage probability against SNR threshold",
        "SNR threshold (dB)",
        "Outage probability",
        &series,
        None,
    ))
}

fn fig4(rows: &[Row]) -> Result<String, PlotError> {
    let mut grids: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !grids.iter().any(|g| g.0 == r.grid) {
            grids.push((r.grid.clone(), r.element_area_m2));
        }
    }
    let ticks = grids.iter().enumerate().map(|(i, (g, a))| (i as f64, format!("{g} ({a:.4} m²)"))).collect();
    let mut series = Vec::new();
    for ((a, _), group) in grouped(rows, |_| String::new()) {
        let points =
            group.iter().map(|r| (grids.iter().position(|g| g.0 == r.grid).unwrap_or(0) as f64, r.p_out)).collect();
        series.push(Series {
            name: format!(
                "{} ({:.1} el.)",
                algorithm_name(["no-oris", "single-shot", "algorithm1"][a]),
                group.iter().map(|r| r.mean_oris_used).sum::<f64>() / group.len() as f64
            ),
            color: COLORS[a],
            dash: DASHES[a],
            marker: MARKERS[a],
            points,
        });
    }
    Ok(line_chart(
        "Outage probability against mirror size",
        "Mirror grid per wall",
        "Outage probability",
        &series,
        Some(ticks),
    ))
}

/// Renders the plot for a campaign CSV.
pub fn render(csv_text: &str) -> Result<String, PlotError> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let rows: Vec<Row> = reader.deserialize().collect::<Result<_, _>>()?;
    let Some(first) = rows.first() else {
        return Err(PlotError::Empty);
    };
    let id = first.experiment.clone();
    if rows.iter().any(|r| r.experiment != id) {
        return Err(PlotError::Experiment(id));
    }
    match id.as_str() {
        "fig1" => box_chart(&rows),
        "fig2" => fig2(&rows),
        "fig3" => fig3(&rows),
        "fig4" => fig4(&rows),
        _ => Err(PlotError::Experiment(id)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "experiment,algorithm,users,gamma_th_db,grid,element_area_m2,trials,user_events,outages,p_out,ci_low,ci_high,mean_oris_used,mean_snr_db,median_snr_db,q1_snr_db,q3_snr_db,whisker_low_snr_db,whisker_high_snr_db,node_limit_trials\n";

    fn row(exp: &str, alg: &str, users: &str, th: &str, p: f64) -> String {
        format!("{exp},{alg},{users},{th},30x5,0.0267,10,10,1,{p},0,1,2,10,10,5,15,0,20,0\n")
    }

    #[test]
    fn empty_csv_is_an_error() {
        assert!(matches!(render(HEAD), Err(PlotError::Empty)));
        assert!(render("").is_err());
    }

    #[test]
    fn fig3_has_nine_series() {
        let mut csv = HEAD.to_string();
        for th in ["0", "10", "20"] {
            for u in ["1", "5", "9"] {
                for a in ["no-oris", "single-shot", "algorithm1"] {
                    csv.push_str(&row("fig3", a, u, th, 0.1));
                }
            }
        }
        let svg = render(&csv).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 9);
        assert_eq!(render(&csv).unwrap(), svg);
        assert!(!svg.contains("log scale"));
    }

    #[test]
    fn wide_outage_range_switches_to_log_axis() {
        let mut csv = HEAD.to_string();
        csv.push_str(&row("fig2", "no-oris", "1", "5", 0.5));
        csv.push_str(&row("fig2", "no-oris", "2", "5", 0.001));
        csv.push_str(&row("fig2", "no-oris", "3", "5", 0.0));
        let svg = render(&csv).unwrap();
        assert!(svg.contains("log scale"));
        assert!(svg.contains("1e-3"));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let csv = format!("{HEAD}fig3,no-oris,1,abc,30x5,x,1,1,1,0.1,0,1,0,0,0,0,0,0,0,0\n");
        assert!(render(&csv).is_err());
        let csv = format!("{HEAD}{}", row("fig9", "no-oris", "1", "0", 0.1));
        assert!(matches!(render(&csv), Err(PlotError::Experiment(_))));
    }

    #[test]
    fn box_plot_per_user_count() {
        let mut csv = HEAD.to_string();
        for u in ["1", "2"] {
            for a in ["no-oris", "single-shot", "algorithm1"] {
                csv.push_str(&row("fig1", a, u, "0-50", 0.1));
            }
        }
        let svg = render(&csv).unwrap();
        assert_eq!(svg.matches("fill-opacity").count(), 6);
    }
}
