//! Four small worked charts: country savings with one prominent bar, two
//! rising education-cost lines, a browser pie with a majority slice, and
//! a two-group scatter with far-off points. Each exists as a hand-built
//! graph and as a chart spec that goes through rendering and parsing.

use chartkg::build::{attach_insights, extract_insights, labels, pivot_tuples, InsightConfig};
use chartkg::gen::spec::{named_color, ChartSpec, Series};
use chartkg::{ChartKg, ChartType, EntityType, Predicate, Rgb, Role};

pub const SAVINGS: [(&str, f64); 4] = [
    ("Chile", 12.0),
    ("Arab World", 28.0),
    ("Peru", 10.0),
    ("Cuba", 14.0),
];
pub const YEARS: [&str; 3] = ["2006", "2007", "2008"];
pub const INDIA: [f64; 3] = [3.1, 3.4, 3.9];
pub const UKRAINE: [f64; 3] = [5.0, 5.6, 6.1];
pub const BROWSERS: [(&str, f64, &str); 4] = [
    ("Chrome", 0.55, "blue"),
    ("Safari", 0.20, "orange"),
    ("Firefox", 0.15, "green"),
    ("Edge", 0.10, "red"),
];
pub const GROUP_A: [(f64, f64); 9] = [
    (4.0, 10.2),
    (6.0, 9.4),
    (8.0, 10.6),
    (10.0, 9.8),
    (12.0, 10.4),
    (14.0, 9.6),
    (16.0, 10.0),
    (18.0, 9.2),
    (20.0, 10.8),
];
pub const GROUP_B: [(f64, f64); 3] = [(58.0, 4.0), (60.0, 10.0), (62.0, 16.0)];

pub fn color(name: &str) -> Rgb {
    named_color(name).expect("palette color")
}

fn text(kg: &mut ChartKg, role: Role, t: &str) -> String {
    labels::add_text(kg, role, t).unwrap().unwrap()
}

fn vepv(kg: &mut ChartKg, label: String) -> String {
    labels::add_vepv(kg, label).unwrap()
}

fn edge(kg: &mut ChartKg, s: &str, p: Predicate, o: &str) {
    kg.add_relation(s, p, o).unwrap();
}

fn with_insights(mut kg: ChartKg) -> ChartKg {
    let table = pivot_tuples(&kg).unwrap();
    let insights = extract_insights(&table, &InsightConfig::default());
    attach_insights(&mut kg, &insights).unwrap();
    kg
}

/// Bars are 10 px per unit.
pub fn savings_kg() -> ChartKg {
    let mut kg = ChartKg::new("savings", ChartType::Bar);
    text(&mut kg, Role::Title, "Adjusted net savings 2010");
    let x = text(&mut kg, Role::XAxisTitle, "Country");
    let y = text(&mut kg, Role::YAxisTitle, "Savings");
    let fill = vepv(&mut kg, labels::color(color("blue")));
    for (i, (name, v)) in SAVINGS.into_iter().enumerate() {
        let dvv = text(&mut kg, Role::XAxisLabel, name);
        edge(&mut kg, &dvv, Predicate::IsInstanceOf, &x);
        let ve = kg.add(EntityType::VE, labels::bar(i)).unwrap();
        let h = vepv(&mut kg, labels::height(v * 10.0));
        let idx = vepv(&mut kg, labels::index(i));
        edge(&mut kg, &ve, Predicate::HasHeight, &h);
        edge(&mut kg, &ve, Predicate::HasPositionIndex, &idx);
        edge(&mut kg, &ve, Predicate::HasColor, &fill);
        edge(&mut kg, &h, Predicate::EncodesVariable, &y);
        edge(&mut kg, &idx, Predicate::EncodesValue, &dvv);
    }
    with_insights(kg)
}

pub fn education_kg() -> ChartKg {
    let mut kg = ChartKg::new("education", ChartType::Line);
    text(&mut kg, Role::Title, "Education cost");
    let x = text(&mut kg, Role::XAxisTitle, "Year");
    let y = text(&mut kg, Role::YAxisTitle, "Cost");
    let legend = text(&mut kg, Role::LegendTitle, "Country");
    let years: Vec<String> = YEARS
        .iter()
        .map(|t| {
            let d = text(&mut kg, Role::XAxisLabel, t);
            edge(&mut kg, &d, Predicate::IsInstanceOf, &x);
            d
        })
        .collect();
    for (s, (name, c, values)) in [("India", "blue", INDIA), ("Ukraine", "brown", UKRAINE)]
        .into_iter()
        .enumerate()
    {
        let dvv = text(&mut kg, Role::LegendLabel, name);
        edge(&mut kg, &dvv, Predicate::IsInstanceOf, &legend);
        let cv = vepv(&mut kg, labels::color(color(c)));
        edge(&mut kg, &cv, Predicate::EncodesValue, &dvv);
        let line = kg.add(EntityType::VE, labels::line(s)).unwrap();
        edge(&mut kg, &line, Predicate::HasColor, &cv);
        for (i, v) in values.into_iter().enumerate() {
            let ve = kg.add(EntityType::VE, labels::vertex(s, i)).unwrap();
            let yv = vepv(&mut kg, labels::y(v * 20.0));
            let idx = vepv(&mut kg, labels::index(i));
            edge(&mut kg, &ve, Predicate::HasY, &yv);
            edge(&mut kg, &ve, Predicate::HasPositionIndex, &idx);
            edge(&mut kg, &ve, Predicate::HasColor, &cv);
            edge(&mut kg, &yv, Predicate::EncodesVariable, &y);
            edge(&mut kg, &idx, Predicate::EncodesValue, &years[i]);
        }
    }
    with_insights(kg)
}

pub fn browser_kg() -> ChartKg {
    let mut kg = ChartKg::new("browser", ChartType::Pie);
    text(&mut kg, Role::Title, "Browser market share 2020");
    let legend = text(&mut kg, Role::LegendTitle, "Browser");
    for (k, (name, share, c)) in BROWSERS.into_iter().enumerate() {
        let dvv = text(&mut kg, Role::LegendLabel, name);
        edge(&mut kg, &dvv, Predicate::IsInstanceOf, &legend);
        let ve = kg.add(EntityType::VE, labels::slice(k)).unwrap();
        let a = vepv(&mut kg, labels::angle(share * 360.0));
        let cv = vepv(&mut kg, labels::color(color(c)));
        let idx = vepv(&mut kg, labels::index(k));
        edge(&mut kg, &ve, Predicate::HasAngle, &a);
        edge(&mut kg, &ve, Predicate::HasColor, &cv);
        edge(&mut kg, &ve, Predicate::HasPositionIndex, &idx);
        edge(&mut kg, &a, Predicate::EncodesVariable, &legend);
        edge(&mut kg, &cv, Predicate::EncodesValue, &dvv);
    }
    with_insights(kg)
}

pub fn groups_kg() -> ChartKg {
    let mut kg = ChartKg::new("groups", ChartType::Scatter);
    let x = text(&mut kg, Role::XAxisTitle, "Hours");
    let y = text(&mut kg, Role::YAxisTitle, "Score");
    let groups = [
        ("Group A", "blue", &GROUP_A[..]),
        ("Group B", "orange", &GROUP_B[..]),
    ];
    let mut k = 0;
    for (name, c, points) in groups {
        let dvv = text(&mut kg, Role::LegendLabel, name);
        let cv = vepv(&mut kg, labels::color(color(c)));
        edge(&mut kg, &cv, Predicate::EncodesValue, &dvv);
        for (px, py) in points {
            let ve = kg.add(EntityType::VE, labels::point(k)).unwrap();
            k += 1;
            let xv = vepv(&mut kg, labels::x(px * 5.0));
            let yv = vepv(&mut kg, labels::y(py * 10.0));
            edge(&mut kg, &ve, Predicate::HasX, &xv);
            edge(&mut kg, &ve, Predicate::HasY, &yv);
            edge(&mut kg, &ve, Predicate::HasColor, &cv);
            edge(&mut kg, &xv, Predicate::EncodesVariable, &x);
            edge(&mut kg, &yv, Predicate::EncodesVariable, &y);
        }
    }
    with_insights(kg)
}

fn spec(id: &str, ct: ChartType) -> ChartSpec {
    ChartSpec {
        chart_id: id.into(),
        chart_type: ct,
        title: String::new(),
        x_title: String::new(),
        y_title: String::new(),
        legend_title: String::new(),
        categories: Vec::new(),
        series: Vec::new(),
        slice_colors: Vec::new(),
        rng_seed: 1,
        width: 560,
        height: 400,
    }
}

fn series(label: &str, c: &str, values: &[f64]) -> Series {
    Series {
        label: label.into(),
        color: color(c),
        values: values.to_vec(),
        xs: None,
    }
}

pub fn savings_spec() -> ChartSpec {
    let mut s = spec("bar-90000", ChartType::Bar);
    s.title = "Adjusted net savings 2010".into();
    s.x_title = "Country".into();
    s.y_title = "Savings".into();
    s.categories = SAVINGS.iter().map(|(n, _)| n.to_string()).collect();
    s.series = vec![series("Savings", "blue", &SAVINGS.map(|(_, v)| v))];
    s
}

pub fn education_spec() -> ChartSpec {
    let mut s = spec("line-90000", ChartType::Line);
    s.title = "Education cost".into();
    s.x_title = "Year".into();
    s.y_title = "Cost".into();
    s.legend_title = "Country".into();
    s.categories = YEARS.iter().map(|y| y.to_string()).collect();
    s.series = vec![
        series("India", "blue", &INDIA),
        series("Ukraine", "brown", &UKRAINE),
    ];
    s
}

pub fn browser_spec() -> ChartSpec {
    let mut s = spec("pie-90000", ChartType::Pie);
    s.title = "Browser market share 2020".into();
    s.legend_title = "Browser".into();
    s.categories = BROWSERS.iter().map(|b| b.0.to_string()).collect();
    s.series = vec![series("Share", "blue", &BROWSERS.map(|b| b.1))];
    s.slice_colors = BROWSERS.iter().map(|b| color(b.2)).collect();
    s
}

pub fn groups_spec() -> ChartSpec {
    let mut s = spec("scatter-90000", ChartType::Scatter);
    s.title = "Score vs Hours".into();
    s.x_title = "Hours".into();
    s.y_title = "Score".into();
    let mk = |label: &str, c: &str, pts: &[(f64, f64)]| Series {
        label: label.into(),
        color: color(c),
        values: pts.iter().map(|p| p.1).collect(),
        xs: Some(pts.iter().map(|p| p.0).collect()),
    };
    s.series = vec![
        mk("Group A", "blue", &GROUP_A),
        mk("Group B", "orange", &GROUP_B),
    ];
    s
}
