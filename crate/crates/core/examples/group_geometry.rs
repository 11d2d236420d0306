//! Group law, metric, projections onto a vertical plane and distances to it.

use heis_rect::heis::{dilate, dist, rotate, HPoint};
use heis_rect::planes::{dist_to_plane, split, VerticalPlane, VerticalSubgroup};

fn main() -> heis_rect::Result<()> {
    let p = HPoint::new(1.0, 2.0, 3.0);
    let q = HPoint::new(-0.5, 0.25, 1.0);
    println!("p*q = {:?}", p * q);
    println!("q*p = {:?}", q * p);
    println!("p^-1 = {:?}, |p| = {:.6}", p.inv(), p.norm());
    println!("d(p, q) = {:.6}", dist(p, q));
    println!("d(2p, 2q) = {:.6}", dist(dilate(2.0, p)?, dilate(2.0, q)?));
    println!("d(R p, R q) = {:.6}", dist(rotate(0.7, p), rotate(0.7, q)));

    let w = VerticalSubgroup::yt();
    let (pw, pv) = split(p, w);
    println!("split onto W_yt: pW = {pw:?}, pV = {pv:?}, pW*pV = {:?}", pw * pv);

    let tilted = VerticalSubgroup::new(0.4);
    let plane = VerticalPlane::through(HPoint::new(0.2, 0.0, 0.0), tilted);
    println!("dist(p, z*W_0.4) = {:.6}", dist_to_plane(p, &plane));
    Ok(())
}
