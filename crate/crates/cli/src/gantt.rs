//! SVG Gantt charts: one band per machine, `M1` on top, a time axis below
//! and a marker at every release date.

use std::fmt::Write;

use pfs_core::{Instance, Rational, Schedule};

const LEFT: f64 = 48.0;
const TOP: f64 = 16.0;
const PLOT_WIDTH: f64 = 640.0;
const BAND: f64 = 36.0;
const GAP: f64 = 6.0;
const AXIS: f64 = 44.0;

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

fn color(job: usize) -> &'static str {
    PALETTE[(job - 1) % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(instance: &Instance, schedule: &Schedule) -> String {
    let machines = instance.machines().max(schedule.pieces().iter().map(|p| p.machine).max().unwrap_or(0));
    let releases = instance.jobs().iter().map(|j| j.release.clone());
    let horizon = releases.chain([schedule.horizon()]).max().unwrap_or_else(Rational::zero);
    let horizon = if horizon.is_positive() { horizon } else { Rational::one() };
    let scale = PLOT_WIDTH / horizon.to_f64();
    let x = |t: &Rational| LEFT + t.to_f64() * scale;
    let band_top = |q: usize| TOP + (q - 1) as f64 * (BAND + GAP);
    let plot_bottom = TOP + machines as f64 * (BAND + GAP);
    let width = LEFT + PLOT_WIDTH + 24.0;
    let height = plot_bottom + AXIS;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);

    for q in 1..=machines {
        let y = band_top(q);
        let _ = writeln!(
            svg,
            r##"<rect x="{LEFT:.2}" y="{y:.2}" width="{PLOT_WIDTH:.2}" height="{BAND:.2}" fill="#f4f4f4" stroke="#cccccc"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" dominant-baseline="middle">M{q}</text>"#,
            LEFT - 8.0,
            y + BAND / 2.0
        );
    }

    let mut pieces = schedule.merged().into_pieces();
    pieces.sort_by(|a, b| (a.machine, &a.start).cmp(&(b.machine, &b.start)));
    for p in &pieces {
        let (x0, x1) = (x(&p.start), x(&p.end));
        let y = band_top(p.machine);
        let _ = writeln!(
            svg,
            r##"<rect x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="#333333"><title>job {} on M{}: [{}, {})</title></rect>"##,
            y + 2.0,
            x1 - x0,
            BAND - 4.0,
            color(p.job),
            p.job,
            p.machine,
            escape(&p.start.to_string()),
            escape(&p.end.to_string())
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" dominant-baseline="middle" fill="white">{}</text>"#,
            (x0 + x1) / 2.0,
            y + BAND / 2.0,
            p.job
        );
    }

    // Time axis with integer ticks, at most about ten of them.
    let _ = writeln!(
        svg,
        r##"<line x1="{LEFT:.2}" y1="{plot_bottom:.2}" x2="{:.2}" y2="{plot_bottom:.2}" stroke="#000000"/>"##,
        LEFT + PLOT_WIDTH
    );
    let end = horizon.to_f64().ceil() as i64;
    let step = ((end + 9) / 10).max(1);
    for t in (0..=end).step_by(step as usize) {
        let tx = x(&Rational::from_integer(t));
        if tx > LEFT + PLOT_WIDTH + 0.01 {
            break;
        }
        let _ = writeln!(
            svg,
            r##"<line x1="{tx:.2}" y1="{plot_bottom:.2}" x2="{tx:.2}" y2="{:.2}" stroke="#000000"/>"##,
            plot_bottom + 5.0
        );
        let _ = writeln!(svg, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#, plot_bottom + 17.0);
    }

    for job in instance.jobs() {
        let rx = x(&job.release);
        let y = plot_bottom + 24.0;
        let _ = writeln!(
            svg,
            r#"<path d="M {rx:.2} {y:.2} l -4 8 l 8 0 z" fill="{}"><title>r{} = {}</title></path>"#,
            color(job.id),
            job.id,
            escape(&job.release.to_string())
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use pfs_core::{q, Piece};

    fn inst() -> Instance {
        Instance::from_times(2, &[q!(0), q!(1)], &[q!(2), q!(3)]).unwrap()
    }

    #[test]
    fn empty_schedule_draws_only_axes() {
        let svg = render(&inst(), &Schedule::empty());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">M1<") && svg.contains(">M2<"));
        assert!(!svg.contains("<title>job"));
        assert_eq!(svg.matches("<path").count(), 2);
    }

    #[test]
    fn pieces_are_labelled_and_machines_top_down() {
        let s = Schedule::new(vec![Piece::new(1, 1, q!(0), q!(2)), Piece::new(2, 2, q!(1), q!(4))]).unwrap();
        let svg = render(&inst(), &s);
        assert!(svg.contains("job 1 on M1: [0, 2)"));
        assert!(svg.contains("job 2 on M2: [1, 4)"));
        assert!(svg.find(">M1<").unwrap() < svg.find(">M2<").unwrap());
        assert_eq!(svg, render(&inst(), &s));
    }

    #[test]
    fn fractional_times_are_escaped_verbatim() {
        let i = Instance::from_times(1, &[q!(0)], &[q!(7, 2)]).unwrap();
        let s = Schedule::new(vec![Piece::new(1, 1, q!(0), q!(7, 2))]).unwrap();
        assert!(render(&i, &s).contains("[0, 7/2)"));
    }
}
