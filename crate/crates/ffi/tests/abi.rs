use std::ffi::{CStr, CString};
use std::ptr;

use fading_sched::network::{throughput, ActivationVector, ChannelMatrix, Gains, ModelParams};
use fading_sched::solvers::exhaustive_optimal;
use fading_sched::Distribution;
use fading_sched_ffi::*;

fn parse(spec: &str) -> *mut FsDistribution {
    let s = CString::new(spec).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fs_distribution_parse(s.as_ptr(), &mut d) }, FsStatus::Ok);
    d
}

fn last_error() -> String {
    let p = fs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn distribution_functions() {
    let d = parse("weibull:k=2,lambda=1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(fs_distribution_cdf(d, 1.0, &mut v), FsStatus::Ok);
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(fs_distribution_quantile(d, v, &mut v), FsStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(fs_distribution_pdf(d, -1.0, &mut v), FsStatus::Domain);
        assert!(last_error().contains("got -1"));
        assert_eq!(fs_distribution_mean(d, &mut v), FsStatus::Ok);
        fs_distribution_free(d);
    }
}

#[test]
fn parse_errors_carry_messages() {
    let s = CString::new("pareto:alpha=1.5").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { fs_distribution_parse(s.as_ptr(), &mut d) }, FsStatus::Domain);
    assert!(d.is_null());
    assert!(last_error().contains("alpha > 2"));

    let s = CString::new("cauchy:x=1").unwrap();
    assert_eq!(unsafe { fs_distribution_parse(s.as_ptr(), &mut d) }, FsStatus::Parse);
    assert!(last_error().contains("cauchy"));
}

#[test]
fn null_handles_are_rejected() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fs_distribution_mean(ptr::null(), &mut v), FsStatus::NullPointer);
        assert_eq!(fs_distribution_parse(ptr::null(), ptr::null_mut()), FsStatus::NullPointer);
        assert_eq!(fs_channel_n(ptr::null()), 0);
        fs_channel_free(ptr::null_mut());
        fs_distribution_free(ptr::null_mut());
        fs_string_free(ptr::null_mut());
    }
}

#[test]
fn channel_matches_library() {
    let d = parse("gamma:m=2,omega=1");
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(fs_channel_generate(6, d, 11, &mut c), FsStatus::Ok);
        assert_eq!(fs_channel_n(c), 6);
    }
    let lib = ChannelMatrix::generate(6, &Distribution::gamma(2.0, 1.0).unwrap(), 11).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let mut g = 0.0;
            assert_eq!(unsafe { fs_channel_gain(c, i, j, &mut g) }, FsStatus::Ok);
            assert_eq!(g, lib.gain(i, j));
        }
    }
    let mut g = 0.0;
    assert_eq!(unsafe { fs_channel_gain(c, 6, 0, &mut g) }, FsStatus::InvalidArgument);

    let x = [1u8, 0, 1, 1, 0, 0];
    let mut t = 0usize;
    assert_eq!(unsafe { fs_throughput(c, 1.0, 0.1, x.as_ptr(), 6, &mut t) }, FsStatus::Ok);
    let av = ActivationVector::from_bools(x.iter().map(|&b| b != 0).collect());
    assert_eq!(t, throughput(&lib, &av, &ModelParams::default()).unwrap());
    assert_eq!(
        unsafe { fs_throughput(c, 1.0, 0.1, x.as_ptr(), 5, &mut t) },
        FsStatus::InvalidArgument
    );
    unsafe {
        fs_channel_free(c);
        fs_distribution_free(d);
    }
}

#[test]
fn from_gains_and_solve() {
    let gains = [3.0, 3.0, 3.0, 3.0];
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { fs_channel_from_gains(2, gains.as_ptr(), &mut c) }, FsStatus::Ok);
    let mut x = [9u8; 2];
    let mut out = FsSolveOutcome::default();
    assert_eq!(
        unsafe { fs_solve(c, 1.0, 1.0, FsSolver::Exhaustive, 0, 24, x.as_mut_ptr(), &mut out) },
        FsStatus::Ok
    );
    assert_eq!((out.best_t, out.explored), (1, 4));
    assert_eq!(x, [1, 0]);

    let bad = [1.0, 0.0, 1.0, 1.0];
    let mut c2 = ptr::null_mut();
    assert_eq!(unsafe { fs_channel_from_gains(2, bad.as_ptr(), &mut c2) }, FsStatus::Domain);
    unsafe { fs_channel_free(c) };
}

#[test]
fn guard_refusal_status() {
    let d = parse("gamma:m=1,omega=1");
    let mut c = ptr::null_mut();
    let mut out = FsSolveOutcome::default();
    unsafe {
        assert_eq!(fs_channel_generate(10, d, 1, &mut c), FsStatus::Ok);
        assert_eq!(
            fs_solve(c, 1.0, 0.1, FsSolver::Exhaustive, 0, 8, ptr::null_mut(), &mut out),
            FsStatus::Guard
        );
        assert!(last_error().contains("2^10"));
        assert_eq!(
            fs_solve(c, 1.0, 0.1, FsSolver::WeightBounded, 3, 8, ptr::null_mut(), &mut out),
            FsStatus::Ok
        );
        assert_eq!(out.explored, 1 + 10 + 45 + 120);
        fs_channel_free(c);
        fs_distribution_free(d);
    }
}

#[test]
fn schedule_agrees_with_library() {
    let d = parse("lognormal:mu=0,sigma=1");
    let mut c = ptr::null_mut();
    let mut x = vec![0u8; 40];
    let mut out = FsScheduleOutcome::default();
    unsafe {
        assert_eq!(fs_channel_generate(40, d, 3, &mut c), FsStatus::Ok);
        assert_eq!(
            fs_schedule(c, d, 1.0, 0.1, FsScheduleMode::Adaptive, 0.1, 0.05, 0, x.as_mut_ptr(), &mut out),
            FsStatus::Ok
        );
    }
    let lib = ChannelMatrix::generate(40, &Distribution::lognormal(0.0, 1.0).unwrap(), 3).unwrap();
    let r = fading_sched::scheduler::adaptive_prefix_schedule(&lib, &ModelParams::default()).unwrap();
    assert_eq!((out.t_target, out.t_realized), (r.t_target, r.t_realized));
    assert_eq!(x.iter().map(|&b| b != 0).collect::<Vec<_>>(), r.x.as_bools());
    assert!(exhaustive_optimal(&ChannelMatrix::generate(12, &Distribution::lognormal(0.0, 1.0).unwrap(), 3).unwrap(), &ModelParams::default(), 24).is_ok());

    unsafe {
        assert_eq!(
            fs_schedule(c, d, 1.0, 0.1, FsScheduleMode::Fixed, 0.1, 0.05, 41, ptr::null_mut(), &mut out),
            FsStatus::Domain
        );
        fs_channel_free(c);
        fs_distribution_free(d);
    }
}

#[test]
fn g_inverse_round_trip() {
    let d = parse("pareto:alpha=3");
    let mut t = 0.0;
    assert_eq!(unsafe { fs_g_inverse(d, 2.0, 108.0, 1e-12, &mut t) }, FsStatus::Ok);
    assert!((t - 4.0).abs() < 1e-9, "{t}");
    assert_eq!(unsafe { fs_g_inverse(d, 2.0, 0.5, 1e-12, &mut t) }, FsStatus::Domain);
    unsafe { fs_distribution_free(d) };
}

#[test]
fn search_space_string() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fs_search_space_size(1024, 10, &mut s) }, FsStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { fs_string_free(s) };
    let expected = fading_sched::solvers::search_space_size(1024, 10).unwrap().to_string();
    assert_eq!(text, expected);
    assert_eq!(unsafe { fs_search_space_size(3, 4, &mut s) }, FsStatus::InvalidArgument);
}
