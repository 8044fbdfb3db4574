"""Calibrate uncertainty thresholds and compare reconstruction policies.

Shows the offline calibration step (99th-percentile cutoffs on a stable
workload), then runs the same generation under dynamic, fixed-interval and
always-on policies and prints how often each one reconstructs the context.
"""

from pagesel import (
    WorkloadSpec,
    calibrate,
    collect_page_uncertainties,
    preset_config,
    run_decode_loop,
)


def main():
    cal_spec = WorkloadSpec(seed=100, dim=64, context_pages=2, generation_pages=400)
    samples = collect_page_uncertainties(cal_spec)
    thresholds = calibrate(samples, 0.99)
    print(f"calibrated on {thresholds.sample_count} pages: "
          f"tau_H={thresholds.tau_entropy:.4f} nats, "
          f"tau_V={thresholds.tau_varentropy:.6f} nats^2")

    config = preset_config("moderate")
    spec = WorkloadSpec(
        seed=1,
        dim=128,
        context_pages=64,
        generation_pages=48,
        instability_schedule=((10, 2.0), (30, 2.0)),
    )
    print(f"\ngeneration of {spec.generation_pages} pages, "
          f"instability injected at pages 10 and 30:")
    for policy in ("dynamic", "fixed(6)", "always"):
        report = run_decode_loop(spec, config, policy, thresholds)
        fired = [s.step for s in report.steps if s.trigger_fired]
        print(f"  {policy:9s} -> {report.trigger_count:2d} reconstructions "
              f"(mean gap {report.mean_inter_trigger_gap:5.1f} pages) at {fired}")


if __name__ == "__main__":
    main()
