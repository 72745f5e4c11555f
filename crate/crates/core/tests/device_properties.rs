use pfdsim::devices::{mosfet_conductances, mosfet_current, MosfetParams, Polarity};
use proptest::prelude::*;

fn nmos() -> impl Strategy<Value = MosfetParams> {
    (
        0.2f64..0.6,
        50e-6f64..500e-6,
        0.0f64..0.2,
        100e-9f64..1e-6,
        50e-9f64..500e-9,
    )
        .prop_map(|(vth0, kprime, lambda, w, l)| MosfetParams {
            vth0,
            kprime,
            lambda,
            w,
            l,
            ..MosfetParams::default_nmos()
        })
}

fn mirrored(p: &MosfetParams) -> MosfetParams {
    MosfetParams {
        polarity: Polarity::Pmos,
        vth0: -p.vth0,
        ..*p
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn current_continuous_at_saturation_edge(p in nmos(), vgs in 0.0f64..1.5) {
        let vov = vgs - p.vth0;
        prop_assume!(vov > 1e-3);
        let beta = p.kprime * p.w / p.l;
        let triode = beta * (vov * vov - vov * vov / 2.0) * (1.0 + p.lambda * vov);
        let at_edge = mosfet_current(&p, vgs, vov);
        prop_assert!((at_edge - triode).abs() <= 1e-15, "{at_edge} vs {triode}");
        let just_below = f64::from_bits(vov.to_bits() - 1);
        let below = mosfet_current(&p, vgs, just_below);
        prop_assert!((at_edge - below).abs() <= 1e-15);
    }

    #[test]
    fn pmos_is_reflected_nmos(p in nmos(), vgs in -1.5f64..1.5, vds in -1.5f64..1.5) {
        let i_n = mosfet_current(&p, -vgs, -vds);
        let i_p = mosfet_current(&mirrored(&p), vgs, vds);
        prop_assert!((i_p + i_n).abs() <= 1e-18 + 1e-12 * i_n.abs(), "{i_p} vs {i_n}");
    }

    #[test]
    fn conductances_match_central_difference(
        p in nmos(),
        pmos in any::<bool>(),
        vgs in -0.5f64..1.5,
        vds in -1.5f64..1.5,
    ) {
        let (p, vgs, vds) = if pmos { (mirrored(&p), -vgs, -vds) } else { (p, vgs, vds) };
        let h = 1e-6;
        let fd_gm = (mosfet_current(&p, vgs + h, vds) - mosfet_current(&p, vgs - h, vds)) / (2.0 * h);
        let fd_gds = (mosfet_current(&p, vgs, vds + h) - mosfet_current(&p, vgs, vds - h)) / (2.0 * h);
        let (gm, gds) = mosfet_conductances(&p, vgs, vds);
        // Absolute floor covers points where the conductance itself is ~0.
        let floor = 1e-10;
        prop_assert!((gm - fd_gm).abs() <= 1e-4 * gm.abs() + floor, "gm {gm} fd {fd_gm}");
        prop_assert!((gds - fd_gds).abs() <= 1e-4 * gds.abs() + floor, "gds {gds} fd {fd_gds}");
    }

    #[test]
    fn saturation_current_increases_with_vgs_and_width(
        p in nmos(),
        v1 in 0.0f64..1.2,
        dv in 1e-3f64..0.5,
        scale in 1.01f64..4.0,
    ) {
        let v2 = v1 + dv;
        prop_assume!(v1 > p.vth0 + 1e-3);
        let vds = v2 - p.vth0 + 0.1;
        prop_assert!(mosfet_current(&p, v2, vds) > mosfet_current(&p, v1, vds));
        let wide = MosfetParams { w: p.w * scale, ..p };
        prop_assert!(mosfet_current(&wide, v1, vds) > mosfet_current(&p, v1, vds));
    }

    #[test]
    fn cutoff_conducts_nothing(p in nmos(), below in 0.0f64..0.5, vds in 0.0f64..1.5) {
        let vgs = p.vth0 - below;
        prop_assert_eq!(mosfet_current(&p, vgs, vds), 0.0);
        prop_assert_eq!(mosfet_conductances(&p, vgs, vds), (0.0, 0.0));
    }
}
