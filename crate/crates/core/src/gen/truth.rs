use std::collections::BTreeMap;

use crate::build::insights::{extract_insights, InsightConfig};
use crate::build::labels;
use crate::build::pivot::{attach_insights, pivot_tuples};
use crate::error::{Error, Result};
use crate::gen::render::{polyline_pixels, Annotation, Layout};
use crate::gen::spec::ChartSpec;
use crate::kg::{ChartKg, ChartType, EntityType, Predicate};
use crate::role::Role;

#[derive(Default)]
struct TextIds {
    title: Option<String>,
    x_title: Option<String>,
    y_title: Option<String>,
    legend_title: Option<String>,
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    legend_labels: Vec<String>,
}

fn column_mean(mask: &[(i32, i32)], x: i32) -> f64 {
    let ys: Vec<i32> = mask.iter().filter(|p| p.0 == x).map(|p| p.1).collect();
    ys.iter().sum::<i32>() as f64 / ys.len().max(1) as f64
}

fn encode(
    kg: &mut ChartKg,
    vepv: &str,
    predicate: Predicate,
    target: Option<&String>,
) -> Result<()> {
    if let Some(t) = target {
        kg.add_relation(vepv, predicate, t)?;
    }
    Ok(())
}

/// Reference KG of a generated chart, built from the spec and its exact
/// geometry instead of from pixels.
pub fn make_truth_kg(spec: &ChartSpec, annotation: &Annotation) -> Result<ChartKg> {
    make_truth_kg_with(spec, annotation, &InsightConfig::default())
}

pub fn make_truth_kg_with(
    spec: &ChartSpec,
    annotation: &Annotation,
    cfg: &InsightConfig,
) -> Result<ChartKg> {
    if annotation.chart_id != spec.chart_id {
        return Err(Error::Validation(format!(
            "annotation `{}` does not belong to spec `{}`",
            annotation.chart_id, spec.chart_id
        )));
    }
    let layout = Layout::compute(spec)?;
    let mut kg = ChartKg::new(&spec.chart_id, spec.chart_type);
    kg.provenance.insert("source".into(), "truth".into());

    let mut ids = TextIds::default();
    for t in &layout.texts {
        let Some(id) = labels::add_text(&mut kg, t.role, &t.text)? else {
            continue;
        };
        match t.role {
            Role::Title => ids.title = Some(id),
            Role::XAxisTitle => ids.x_title = Some(id),
            Role::YAxisTitle => ids.y_title = Some(id),
            Role::LegendTitle => ids.legend_title = Some(id),
            Role::XAxisLabel => ids.x_labels.push(id),
            Role::YAxisLabel => ids.y_labels.push(id),
            Role::LegendLabel => ids.legend_labels.push(id),
            _ => {}
        }
    }
    for (labels_of, title) in [
        (&ids.x_labels, &ids.x_title),
        (&ids.y_labels, &ids.y_title),
        (&ids.legend_labels, &ids.legend_title),
    ] {
        if let Some(dv) = title {
            for dvv in labels_of {
                kg.add_relation(dvv, Predicate::IsInstanceOf, dv)?;
            }
        }
    }
    let legend = |k: usize| ids.legend_labels.get(k);

    match spec.chart_type {
        ChartType::Bar => {
            let mut bars: Vec<_> = layout.bars.iter().collect();
            bars.sort_by_key(|b| (b.rect.x0, b.rect.y0));
            for (k, b) in bars.iter().enumerate() {
                let ve = kg.add(EntityType::VE, labels::bar(k))?;
                let h = labels::add_vepv(&mut kg, labels::height(b.rect.height() as f64))?;
                let c = labels::add_vepv(&mut kg, labels::color(b.color))?;
                let i = labels::add_vepv(&mut kg, labels::index(b.category))?;
                kg.add_relation(&ve, Predicate::HasHeight, &h)?;
                kg.add_relation(&ve, Predicate::HasColor, &c)?;
                kg.add_relation(&ve, Predicate::HasPositionIndex, &i)?;
                encode(
                    &mut kg,
                    &h,
                    Predicate::EncodesVariable,
                    ids.y_title.as_ref(),
                )?;
                encode(&mut kg, &c, Predicate::EncodesValue, legend(b.series))?;
                encode(
                    &mut kg,
                    &i,
                    Predicate::EncodesValue,
                    ids.x_labels.get(b.category),
                )?;
            }
        }
        ChartType::Line => {
            let frame = layout.frame.expect("line charts have axes");
            let mut lines: Vec<_> = layout.lines.iter().collect();
            lines.sort_by_key(|l| l.color.hex());
            for (s, line) in lines.iter().enumerate() {
                let mask = polyline_pixels(&line.vertices);
                let up = |x: i32| frame.axis_y as f64 - column_mean(&mask, x);
                let first = line.vertices[0].0;
                let last = line.vertices[line.vertices.len() - 1].0;
                let ve = kg.add(EntityType::VE, labels::line(s))?;
                let c = labels::add_vepv(&mut kg, labels::color(line.color))?;
                let st = labels::add_vepv(
                    &mut kg,
                    labels::start(((first - frame.axis_x) as f64, up(first))),
                )?;
                let en = labels::add_vepv(
                    &mut kg,
                    labels::end(((last - frame.axis_x) as f64, up(last))),
                )?;
                kg.add_relation(&ve, Predicate::HasColor, &c)?;
                kg.add_relation(&ve, Predicate::HasStartPoint, &st)?;
                kg.add_relation(&ve, Predicate::HasEndPoint, &en)?;
                encode(&mut kg, &c, Predicate::EncodesValue, legend(line.series))?;
                for (i, v) in line.vertices.iter().enumerate() {
                    let vx = kg.add(EntityType::VE, labels::vertex(s, i))?;
                    let y = labels::add_vepv(&mut kg, labels::y(up(v.0)))?;
                    let ix = labels::add_vepv(&mut kg, labels::index(i))?;
                    kg.add_relation(&vx, Predicate::HasY, &y)?;
                    kg.add_relation(&vx, Predicate::HasPositionIndex, &ix)?;
                    kg.add_relation(&vx, Predicate::HasColor, &c)?;
                    encode(
                        &mut kg,
                        &y,
                        Predicate::EncodesVariable,
                        ids.y_title.as_ref(),
                    )?;
                    encode(&mut kg, &ix, Predicate::EncodesValue, ids.x_labels.get(i))?;
                }
            }
        }
        ChartType::Pie => {
            let pie = layout.pie.as_ref().expect("pie layout");
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            let b = pie.bounds();
            for y in b.y0..b.y1 {
                for x in b.x0..b.x1 {
                    if let Some(k) = pie.slice_at(x, y) {
                        *counts.entry(k).or_default() += 1;
                    }
                }
            }
            let total: usize = counts.values().sum();
            let mut slices: Vec<(f64, &crate::gen::render::SliceGeom)> = pie
                .slices
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    (
                        360.0 * counts.get(&k).copied().unwrap_or(0) as f64 / total as f64,
                        s,
                    )
                })
                .collect();
            slices.sort_by(|a, b| {
                b.0.total_cmp(&a.0)
                    .then(a.1.color.hex().cmp(&b.1.color.hex()))
            });
            let variable = ids.legend_title.clone().or_else(|| ids.title.clone());
            for (k, (deg, s)) in slices.iter().enumerate() {
                let ve = kg.add(EntityType::VE, labels::slice(k))?;
                let a = labels::add_vepv(&mut kg, labels::angle(*deg))?;
                let c = labels::add_vepv(&mut kg, labels::color(s.color))?;
                let i = labels::add_vepv(&mut kg, labels::index(k))?;
                kg.add_relation(&ve, Predicate::HasAngle, &a)?;
                kg.add_relation(&ve, Predicate::HasColor, &c)?;
                kg.add_relation(&ve, Predicate::HasPositionIndex, &i)?;
                encode(&mut kg, &a, Predicate::EncodesVariable, variable.as_ref())?;
                encode(&mut kg, &c, Predicate::EncodesValue, legend(s.category))?;
            }
        }
        ChartType::Scatter => {
            let frame = layout.frame.expect("scatter charts have axes");
            let mut points: Vec<_> = layout.points.iter().collect();
            points.sort_by_key(|p| (p.rect.x0, p.rect.y0));
            for (k, p) in points.iter().enumerate() {
                let (cx, cy) = p.rect.center();
                let ve = kg.add(EntityType::VE, labels::point(k))?;
                let x = labels::add_vepv(&mut kg, labels::x(cx - frame.axis_x as f64))?;
                let y = labels::add_vepv(&mut kg, labels::y(frame.axis_y as f64 - cy))?;
                let c = labels::add_vepv(&mut kg, labels::color(p.color))?;
                kg.add_relation(&ve, Predicate::HasX, &x)?;
                kg.add_relation(&ve, Predicate::HasY, &y)?;
                kg.add_relation(&ve, Predicate::HasColor, &c)?;
                encode(
                    &mut kg,
                    &x,
                    Predicate::EncodesVariable,
                    ids.x_title.as_ref(),
                )?;
                encode(
                    &mut kg,
                    &y,
                    Predicate::EncodesVariable,
                    ids.y_title.as_ref(),
                )?;
                encode(&mut kg, &c, Predicate::EncodesValue, legend(p.series))?;
            }
        }
    }

    let table = pivot_tuples(&kg)?;
    let insights = extract_insights(&table, cfg);
    attach_insights(&mut kg, &insights)?;
    Ok(kg)
}
