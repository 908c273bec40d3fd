use qrec::quadrature::{integrate_2d, Tolerance};
use qrec::stats::{binned_intensity_compare_2d, ks_two_sample_alpha, ALPHA_ACCEPTANCE};
use qrec::{
    corner_intensity_p1, gen_unit_poisson, gen_unit_poisson_in, j_intensity, k_corners,
    kth_min_path, lifetimes, simulate_m_chain, RngStream, Window,
};

#[test]
fn marked_lifetime_box_count_matches_intensity_integral() {
    let k = 2usize;
    let window = Window::hyperbolic(100.0, 0.01, 2000.0, 1.25).unwrap();
    let replicas = 3000u64;
    let mut count = 0usize;
    for r in 0..replicas {
        let mut s = RngStream::new(5, r);
        let ps = gen_unit_poisson_in(&mut s, &window);
        let path = kth_min_path(&ps, k, 2000.0).unwrap();
        count += lifetimes(&path)
            .iter()
            .filter(|l| (0.5..2.0).contains(&l.s) && (0.5..2.0).contains(&l.x))
            .count();
    }
    let mass = integrate_2d(
        &|s, x| j_intensity(k as f64, s, x).unwrap(),
        (0.5, 2.0),
        (0.5, 2.0),
        Tolerance::default(),
    )
    .unwrap();
    let expected = mass * replicas as f64;
    let rel = (count as f64 / expected - 1.0).abs();
    assert!(rel < 0.03, "observed {count}, expected {expected:.1}");
}

#[test]
fn corner_locations_follow_p1_on_a_coarse_grid() {
    let k = 2usize;
    let window = Window::hyperbolic(100.0, 1.0, 8f64.exp(), 1.25).unwrap();
    let replicas = 200u64;
    let mut corners = Vec::new();
    for r in 0..replicas {
        let mut s = RngStream::new(9, r);
        let cs = k_corners(&gen_unit_poisson_in(&mut s, &window), k);
        corners.extend(cs.corners.iter().map(|c| (c.point.t, c.point.x)));
    }
    let t_edges: Vec<f64> = (0..=8).map(|i| (i as f64).exp()).collect();
    let x_edges: Vec<f64> = (0..=8).map(|j| (2f64.ln() - 7.0 + j as f64).exp()).collect();
    let (binned, test) = binned_intensity_compare_2d(
        &corners,
        &|t, x| corner_intensity_p1(k as f64, t, x).unwrap(),
        &t_edges,
        &x_edges,
        replicas,
    )
    .unwrap();
    assert!(test.passed, "{test:?}");
    assert!(binned.total_observed() > 1000);
}

#[test]
fn chain_sampler_and_planar_path_agree_at_later_times() {
    let k = 3usize;
    let n = 4000u64;
    let mut planar = Vec::new();
    let mut chain = Vec::new();
    for r in 0..n {
        let mut s = RngStream::new(13, r);
        let ps = gen_unit_poisson(&mut s, 4.0, 150.0).unwrap();
        planar.push(kth_min_path(&ps, k, 4.0).unwrap().value_at(4.0).unwrap());
        let mut s = RngStream::new(13, n + r);
        let segs = simulate_m_chain(&mut s, k as f64, 0.5, 4.0).unwrap();
        chain.push(qrec::chain_value_at(&segs, 4.0).unwrap());
    }
    let r = ks_two_sample_alpha(&planar, &chain, ALPHA_ACCEPTANCE).unwrap();
    assert!(r.passed, "{r:?}");
}
