use cfmmr_core::cascade::{AxleReference, FrameGeometry};
use cfmmr_core::dynamic::{AxleController, AxleMeasurement, DynGains};
use cfmmr_core::plant::{frame_force, frame_wrench, FrameStiffness};
use cfmmr_core::{BodyVelocity, Posture};
use proptest::prelude::*;

fn posture() -> impl Strategy<Value = Posture> {
    (-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0).prop_map(|(x, y, phi)| Posture::new(x, y, phi))
}

fn velocity() -> impl Strategy<Value = BodyVelocity> {
    (-0.5f64..0.5, -2.0f64..2.0).prop_map(|(v, omega)| BodyVelocity::new(v, omega))
}

/// Two axles a frame length apart along a random chord, with small heading
/// offsets, so the pair is never degenerate.
fn pair() -> impl Strategy<Value = (Posture, Posture)> {
    (-1.0f64..1.0, -1.0f64..1.0, -3.0f64..3.0, 0.25f64..0.4, -0.6f64..0.6, -0.6f64..0.6).prop_map(
        |(x, y, a, len, d1, d2)| {
            let (s, c) = a.sin_cos();
            (Posture::new(x + 0.5 * len * c, y + 0.5 * len * s, a + d1), Posture::new(x - 0.5 * len * c, y - 0.5 * len * s, a + d2))
        },
    )
}

proptest! {
    #[test]
    fn frame_loads_are_internal((q1, q2) in pair(), u1 in velocity(), u2 in velocity()) {
        let geo = FrameGeometry::default();
        let w = frame_wrench(&q1, &q2, &u1, &u2, &FrameStiffness::default(), &geo).unwrap();
        // equal and opposite forces
        prop_assert!((w.force[0][0] + w.force[1][0]).abs() < 1e-12);
        prop_assert!((w.force[0][1] + w.force[1][1]).abs() < 1e-12);
        // zero net moment about the origin
        let cross = |q: &Posture, f: [f64; 2]| q.x * f[1] - q.y * f[0];
        let net = cross(&q1, w.force[0]) + cross(&q2, w.force[1]) + w.moment[0] + w.moment[1];
        let scale = 1.0 + w.moment[0].abs() + w.moment[1].abs();
        prop_assert!(net.abs() < 1e-9 * scale, "net moment {net}");
    }

    #[test]
    fn free_frame_carries_no_load((q1, q2) in pair(), u1 in velocity(), u2 in velocity()) {
        let f = frame_force(&q1, &q2, &u1, &u2, &FrameStiffness::free(), &FrameGeometry::default()).unwrap();
        prop_assert_eq!(f, [[0.0; 2]; 2]);
    }

    #[test]
    fn axle_torque_sees_the_other_axle_only_through_the_frame(
        (q1, q2) in pair(), u1 in velocity(), u2 in velocity(),
        other_q in posture(), other_u in velocity(),
        dx in -0.2f64..0.2, v_r in 0.0f64..0.5, omega_r in -2.0f64..2.0,
    ) {
        let geo = FrameGeometry::default();
        let ks = FrameStiffness::default();
        let mut r = AxleReference::at_rest(Posture::new(q1.x + dx, q1.y, q1.phi));
        r.v_r = v_r;
        r.omega_r = omega_r;
        let other = Posture::new(q1.x + 0.3, q1.y + 0.1 * other_q.y, other_q.phi);
        let torque = |compensate: bool, q_other: &Posture, u_other: &BodyVelocity| {
            let gains = DynGains { compensate_frame: compensate, ..DynGains::default() };
            let ctl = AxleController::new(gains, geo, 4.0, 0.05, 1e-3);
            let f = frame_force(&q1, q_other, &u1, u_other, &ks, &geo).unwrap();
            ctl.step(&AxleMeasurement { q: q1, u: u1, f_k: f[0] }, &r).0
        };
        // without frame compensation the other axle has no influence at all
        prop_assert_eq!(torque(false, &q2, &u2), torque(false, &other, &other_u));
        // with it, only the magnitude of the local frame load matters
        let gains = DynGains { compensate_frame: true, ..DynGains::default() };
        let ctl = AxleController::new(gains, geo, 4.0, 0.05, 1e-3);
        let f = frame_force(&q1, &q2, &u1, &u2, &ks, &geo).unwrap()[0];
        let flipped = ctl.step(&AxleMeasurement { q: q1, u: u1, f_k: [-f[1].abs(), f[0].abs()] }, &r).0;
        let direct = torque(true, &q2, &u2);
        prop_assert!((flipped.tau_r - direct.tau_r).abs() <= 1e-12 * (1.0 + direct.tau_r.abs()));
        prop_assert!((flipped.tau_l - direct.tau_l).abs() <= 1e-12 * (1.0 + direct.tau_l.abs()));
    }
}
