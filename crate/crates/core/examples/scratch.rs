use hestonlt_core::asymptotics::{a1_hat, amplitude, sigma_inf_sq};
use hestonlt_core::bs::{bs_call, bs_call_large_time};
use hestonlt_core::HestonParams;

fn main() {
    let p = HestonParams::eurostoxx_2006();
    let (_, v2, v3) = p.cgf_derivatives(1.0).unwrap();
    let u1 = p.u_prime(1.0).unwrap();
    let x0 = p.theta_bar / 2.0;
    println!("theta_bar = {:.15}", p.theta_bar);
    println!("V''(1) = {v2:.15}, V'''(1) = {v3:.15}, U'(1) = {u1:.15}");
    let theta_cap = (p.theta_bar / v2).sqrt();
    println!("Theta = {theta_cap:.15}");

    // true curvature of sigma_inf^2 at theta_bar/2 by finite differences
    for h in [1e-2, 3e-3, 1e-3, 3e-4] {
        let c2 = (sigma_inf_sq(&p, x0 + h) + sigma_inf_sq(&p, x0 - h) - 2.0 * p.theta_bar)
            / (h * h);
        let c1 = (sigma_inf_sq(&p, x0 + h) - sigma_inf_sq(&p, x0 - h)) / (2.0 * h);
        println!("h = {h:9.1e}: c1_fd = {c1:.9}, c2_fd = {c2:.6}");
    }
    let c1_paper = 2.0 * (1.0 - theta_cap);
    let c2_paper = 2.0 / v2 * (1.0 - 1.0 / theta_cap + v3 / (6.0 * v2 * v2) * theta_cap);
    let c2_alt = 2.0 / v2 * (1.0 - 1.0 / theta_cap + v3 / (6.0 * v2) * theta_cap);
    println!("c1_paper = {c1_paper:.9}");
    println!("c2_paper (V''^2 denominator) = {c2_paper:.6}");
    println!("c2_alt   (V''   denominator) = {c2_alt:.6}");

    // a1_hat continuity magnitudes at both special points
    for (label, xs) in [("theta_bar/2", x0), ("-theta/2", -p.theta / 2.0)] {
        let base = a1_hat(&p, xs).unwrap();
        println!("a1_hat({label}) = {base:.12}");
        for k in 3..=7 {
            let off = 10f64.powi(-k);
            let up = a1_hat(&p, xs + off).unwrap();
            let dn = a1_hat(&p, xs - off).unwrap();
            println!(
                "  off 1e-{k}: diff+ = {:+.3e}, diff- = {:+.3e}",
                up - base,
                dn - base
            );
        }
        let var_base = sigma_inf_sq(&p, xs);
        for k in 3..=7 {
            let off = 10f64.powi(-k);
            let up = sigma_inf_sq(&p, xs + off);
            let dn = sigma_inf_sq(&p, xs - off);
            println!(
                "  var off 1e-{k}: diff+ = {:+.3e}, diff- = {:+.3e}",
                up - var_base,
                dn - var_base
            );
        }
    }

    // amplitude at zero and the fixed-strike coefficient pieces
    let a0 = amplitude(&p, 0.0);
    let b0 = p.rate_function(0.0);
    println!("A(0) = {a0:.12}, p*(0) = {:.12}, V*(0) = {:.12}", b0.p_star, b0.v_star);
    println!("8 V*(0) = {:.12}", 8.0 * b0.v_star);
    println!("a1_fixed(0) = {:.12}", hestonlt_core::asymptotics::a1_fixed(&p, 0.0));

    // knife-edge BS expansion error decay
    let s = 0.2f64;
    let x = 0.5 * s * s;
    for t in [25.0, 100.0, 400.0] {
        let v = bs_call_large_time(x, t, s, 0.0).unwrap();
        let exact = bs_call(1.0, (x * t).exp(), t, s).unwrap();
        println!("knife edge t = {t}: expansion {v:.9}, exact {exact:.9}, gap {:.3e}", (v - exact).abs());
    }
    // standard BS large-time agreement
    let (x, s) = (0.15f64, 0.25f64);
    for t in [120.0, 240.0, 480.0] {
        let exact = bs_call(1.0, (x * t).exp(), t, s).unwrap();
        let approx = bs_call_large_time(x, t, s, 0.0).unwrap();
        println!(
            "standard t = {t}: rel err {:.4e}",
            ((approx - exact) / exact).abs()
        );
    }
}
