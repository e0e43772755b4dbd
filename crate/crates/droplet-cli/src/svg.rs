//! Bare SVG dump: the container wall and the droplet polygon, y-flipped so
//! gravity points down the image.

use droplet_core::container::Container;
use droplet_core::{Point2, PolyDroplet};

pub fn droplet_svg(c: &Container, d: &PolyDroplet, hash: &str, rng_seed: u64) -> String {
    let wall: Vec<Point2> = c.stations().iter().map(|st| st.point).collect();
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &wall {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let margin = 0.05 * (hi.x - lo.x).max(hi.y - lo.y);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = 0.004 * w.max(h);
    let pts = |v: &[Point2]| {
        v.iter()
            .map(|p| format!("{},{}", p.x, p.y))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n\
         <!-- config {hash} rng_seed {rng_seed} -->\n\
         <g transform=\"matrix(1 0 0 -1 0 0)\" fill=\"none\" stroke-width=\"{stroke}\">\n\
         <polygon points=\"{}\" stroke=\"#999999\"/>\n\
         <polygon points=\"{}\" fill=\"#bcd6ee\" stroke=\"#27577d\"/>\n\
         </g>\n\
         </svg>\n",
        lo.x - margin,
        -(hi.y + margin),
        w,
        h,
        pts(&wall),
        pts(d.vertices()),
    )
}
