use std::f64::consts::PI;

use super::{DeviceError, DeviceParams, DriveCondition};

/// Switching error rate for overdrive `i > 1` and on-time `t_g`:
///
/// ε = 1 − exp[−(π²Δ/4)(i−1) / (i·e^{2r t (i−1)} − 1)]
///
/// with Δ = E_b/kT and r = αγμ₀H_k/(1+α²). The external field term is not
/// part of this approximation and `drive.h` is ignored.
pub fn closed_form_error_rate(
    params: &DeviceParams,
    drive: &DriveCondition,
) -> Result<f64, DeviceError> {
    check_drive(drive)?;
    if drive.i <= 1.0 || drive.i.is_nan() {
        return Err(DeviceError::Overdrive { i: drive.i });
    }
    let a = PI * PI * params.barrier_kt() / 4.0;
    let im1 = drive.i - 1.0;
    let x = 2.0 * params.tau_rate() * drive.t_g * im1;
    // i·e^x − 1 = (i − 1) + i·(e^x − 1); far out use e^{-x} to avoid overflow.
    let exponent = if x < 1.0 {
        a * im1 / (im1 + drive.i * x.exp_m1())
    } else {
        let decay = (-x).exp();
        a * im1 * decay / (drive.i - decay)
    };
    Ok(-(-exponent).exp_m1())
}

/// Upper end of the reachable range at fixed `t_g`, the i → 1⁺ limit of
/// the closed form: 1 − exp(−(π²Δ/4)/(1 + 2r·t_g)).
pub fn max_error_rate_at(params: &DeviceParams, t_g: f64) -> f64 {
    let a = PI * PI * params.barrier_kt() / 4.0;
    -(-a / (1.0 + 2.0 * params.tau_rate() * t_g)).exp_m1()
}

/// Large-overdrive form that depends on i and t only through their product:
/// ε = 1 − exp(−(π²Δ/4)·e^{−2r·i·t}). Gates priced this way keep ε fixed
/// along constant energy·delay curves.
pub fn iso_k_error_rate(params: &DeviceParams, i_times_t: f64) -> f64 {
    let a = PI * PI * params.barrier_kt() / 4.0;
    let x = 2.0 * params.tau_rate() * i_times_t;
    -(-a * (-x).exp()).exp_m1()
}

fn check_drive(drive: &DriveCondition) -> Result<(), DeviceError> {
    if !(drive.t_g >= 0.0) || !drive.t_g.is_finite() {
        return Err(DeviceError::InvalidDrive(format!(
            "t_g must be finite and >= 0, got {}",
            drive.t_g
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_limit() {
        let p = DeviceParams::default();
        let eps = closed_form_error_rate(&p, &DriveCondition::new(3.0, 0.0)).unwrap();
        let expected = -(-(PI * PI * 52.0 / 4.0f64)).exp_m1();
        assert_eq!(eps, expected);
    }

    #[test]
    fn rejects_subcritical_drive() {
        let p = DeviceParams::default();
        let err = closed_form_error_rate(&p, &DriveCondition::new(1.0, 1e-9)).unwrap_err();
        assert!(err.to_string().contains("I_supply/I_crit > 1"));
        assert!(closed_form_error_rate(&p, &DriveCondition::new(2.0, -1.0)).is_err());
    }

    #[test]
    fn decreasing_in_time_and_drive() {
        let p = DeviceParams::default();
        let mut last = 1.0;
        for k in 0..60 {
            let t = 1e-12 * 10f64.powf(k as f64 / 10.0);
            let e = closed_form_error_rate(&p, &DriveCondition::new(1.5, t)).unwrap();
            assert!(e <= last);
            last = e;
        }
        let mut last = 1.0;
        for k in 1..100 {
            let i = 1.0 + 0.1 * k as f64;
            let e = closed_form_error_rate(&p, &DriveCondition::new(i, 0.3e-9)).unwrap();
            assert!(e <= last, "i = {i}");
            last = e;
        }
    }

    #[test]
    fn long_times_vanish_without_overflow() {
        let p = DeviceParams::default();
        for i in [2.0, 5.0, 1e3] {
            let e = closed_form_error_rate(&p, &DriveCondition::new(i, 1.0)).unwrap();
            assert!(e < 1e-12);
        }
    }

    #[test]
    fn near_unit_overdrive_approaches_limit() {
        let p = DeviceParams::default();
        let t = 2e-9;
        let e = closed_form_error_rate(&p, &DriveCondition::new(1.0 + 1e-9, t)).unwrap();
        assert!((e - max_error_rate_at(&p, t)).abs() < 1e-6);
    }
}
