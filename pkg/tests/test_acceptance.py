"""Acceptance gate: one test per shipping criterion, each printing a verdict line.

Criteria 5 and 6 exist in two forms. Taken literally — channel SNR referenced
to the mean mapped power D_max^2/3 — the stated operating points put the
noise std dev at or far above the stage length d (e.g. 30 dB with D_max =
1000 and L = 10x10 gives sigma_n = 18.3 = 1.8 d), a regime where the
closed-form predictors are off by orders of magnitude and no implementation
could meet the stated 2% / 15% gates. Those literal forms are kept here as
strict xfail tests so the defect stays visible. The passing twin tests pin
the same physics with the SNR referenced to the dim-1 source power R_1^2/3,
which reproduces the intended high-SNR / low-SNR regimes.
"""
import math

import numpy as np
import pytest

from ajscc.analytic import (
    NoiseModel,
    SnrSpec,
    adc_mse_term,
    mse_high_3d,
    mse_high_digital,
    mse_high_nd,
    mse_low_3d,
    mse_low_digital,
    pr_lsc,
    pr_rsc,
    snr_to_sigma,
    x_source_from_s1,
)
from ajscc.cli import main as cli_main
from ajscc.curve import (
    LatticePoint,
    SourcePoint,
    build_config,
    decode,
    encode,
    stage_index,
    stage_levels,
)
from ajscc.dist import DiscreteBoundaryGaussian, Uniform
from ajscc.mc import (
    Analog,
    Digital,
    SimulationSpec,
    classify_crossing,
    empirical_crossing_rates,
    run,
)
from ajscc.opt import AnalyticHigh, SweepSpec, grid_search, optimal_l_trend, optimal_l_vs_dims

CFG1 = build_config(3, [1.0, 1.0, 1.0], [10, 10], 1000.0)
SRC3 = (Uniform(0.0, 1.0), Uniform(0.0, 1.0), Uniform(0.0, 1.0))


def _report(n: int, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {n}: {verdict} — {detail}")
    assert ok, f"criterion {n}: {detail}"


def test_criterion_1_formula_fidelity():
    bd = mse_high_3d(CFG1, NoiseModel(sigma_n=1.0))
    amp2 = (1.0 * 100 / 1000.0) ** 2
    quant = 1.0 / (12 * 81)
    term_ok = (
        math.isclose(bd.noise_term, amp2, rel_tol=1e-14)
        and all(math.isclose(q, quant, rel_tol=1e-14) for q in bd.quant_terms)
        and bd.total == bd.noise_term + bd.quant_terms[0] + bd.quant_terms[1]
    )
    spot_ok = abs(bd.total - 1.20576e-2) < 1e-6
    cfg4 = build_config(4, [1.0] * 4, [5, 5, 5], 3000.0)
    nd = mse_high_nd(cfg4, NoiseModel(sigma_n=1.0))
    nd_ok = (math.isclose(nd.noise_term, (125.0 / 3000.0) ** 2, rel_tol=1e-14)
             and all(math.isclose(q, 1.0 / 192, rel_tol=1e-14)
                     for q in nd.quant_terms))
    dig = mse_high_digital(CFG1, NoiseModel(sigma_n=1.0), 3)
    dig_ok = (dig.adc_term == adc_mse_term(1.0, 3)
              and dig.total == bd.total + dig.adc_term
              and math.isclose(dig.adc_term, 1.0 / 588, rel_tol=1e-14))
    _report(1, term_ok and spot_ok and nd_ok and dig_ok,
            f"3d total {bd.total:.9e} (spot 1.20576e-2 within 1e-6), "
            f"nd and digital terms exact")


def test_criterion_2_roundtrip_and_quantizer_laws():
    # dim-1 recovery is gated at 1e-9 of the dim-1 range: the arc length is
    # one float64, so its absolute resolution is ulp(D_max) and per-value
    # relative error necessarily diverges as s_1 -> 0; strict per-value
    # relative error is still asserted above the resolution floor
    rng = np.random.default_rng(12345)
    worst_s1 = 0.0
    worst_rel = 0.0
    worst_q = 0.0
    for _ in range(100_000):
        s = (rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0))
        _, ms = encode(CFG1, SourcePoint(s))
        got = decode(CFG1, ms).values
        worst_s1 = max(worst_s1, abs(got[0] - s[0]) / CFG1.ranges[0])
        if s[0] >= 1e-4 * CFG1.ranges[0]:
            worst_rel = max(worst_rel, abs(got[0] - s[0]) / s[0])
        for k in (1, 2):
            worst_q = max(worst_q, abs(got[k] - s[k]) / CFG1.deltas[k - 1])
    roundtrip_ok = (worst_s1 <= 1e-9 and worst_rel <= 1e-9
                    and worst_q <= 0.5 + 1e-9)
    spec = SimulationSpec(config=CFG1, noise=NoiseModel(sigma_n=0.0),
                          sources=SRC3, sensor=Analog(), trials=1_000_000,
                          seed=2)
    r = run(spec)
    want = (1.0 / 9) ** 2 / 12
    quant_ok = all(abs(r.mse_per_dim[k] - want) <= 0.01 * want for k in (1, 2))
    _report(2, roundtrip_ok and quant_ok,
            f"worst s1 err {worst_s1:.2e} of range (per-value rel "
            f"{worst_rel:.2e} above the resolution floor), worst level err "
            f"{worst_q:.3f} steps, empirical quant MSE within 1% of "
            f"delta^2/12")


# Crossing-case table: executable proof --------------------------------------

_ROW_CELLS_4x4 = {"a1": (2, 1), "a2": (1, 2), "b1": (3, 2), "b2": (0, 2),
                  "b3": (3, 1), "b4": (0, 1), "c1": (0, 0), "c2": (0, 3),
                  "c3": (3, 0), "c4": (3, 3)}


def test_criterion_3_table_proof_and_coverage():
    cfg = build_config(3, [1.0, 1.0, 1.0], [4, 4], 32.0)
    d = cfg.d
    worst = 0.0
    for row, (ky, kz) in _ROW_CELLS_4x4.items():
        t = stage_index(cfg, (ky, kz))
        for direction in ("LSC", "RSC"):
            x_s = 0.7 * d
            n = (-x_s - 0.25 * d) if direction == "LSC" else (d - x_s + 0.25 * d)
            m_s = t * d + (x_s if t % 2 == 0 else d - x_s)
            n_arc = n if t % 2 == 0 else -n
            m_r = min(max(m_s + n_arc, 0.0), cfg.d_max)
            dec = decode(cfg, m_r).values
            disp = (dec[0] * d / cfg.ranges[0] - x_s,
                    dec[1] - ky * cfg.deltas[0],
                    dec[2] - kz * cfg.deltas[1])
            t_r = min(int(m_r // d), cfg.n_stages - 1)
            tx = LatticePoint(x=x_s, level_indices=(ky, kz))
            rx = LatticePoint(x=disp[0] + x_s, level_indices=stage_levels(cfg, t_r))
            case = classify_crossing(cfg, tx, rx, n)
            assert case.label == f"{row}_{direction}"
            worst = max(worst, max(abs(a - b) for a, b in zip(disp, case.nu)))
    nu_ok = worst <= 1e-9
    cfg54 = build_config(3, [1.0, 1.0, 1.0], [5, 4], 100.0)
    spec = SimulationSpec(config=cfg54, noise=NoiseModel(sigma_n=cfg54.d / 4),
                          sources=SRC3, sensor=Analog(), trials=10_000_000,
                          seed=17)
    r = run(spec)
    missing = [lab for lab, c in r.crossing_counts.items() if c == 0]
    _report(3, nu_ok and not missing,
            f"20 constructed displacements match nu within {worst:.1e}; "
            f"all 20 labels observed on 5x4 (min count "
            f"{min(r.crossing_counts.values())})")


def test_criterion_4_crossing_probability_oracle():
    cfg = build_config(3, [1.0, 1.0, 1.0], [2, 2], 4.0)
    d = cfg.d
    sources = [Uniform(0.0, d),
               DiscreteBoundaryGaussian(0.0, d, 0.0, 0.3),
               DiscreteBoundaryGaussian(0.0, d, d / 2, 0.3),
               DiscreteBoundaryGaussian(0.0, d, d, 0.3)]
    trials = 10_000_000
    worst_z = 0.0
    for sigma_n in (d / 10, d / 2):
        noise = NoiseModel(sigma_n=sigma_n)
        for sx in sources:
            pl, pr = pr_lsc(sx, noise), pr_rsc(sx, noise)
            spec = SimulationSpec(config=cfg, noise=noise,
                                  sources=(sx, Uniform(0.0, 1.0), Uniform(0.0, 1.0)),
                                  sensor=Analog(), trials=trials, seed=5)
            lsc_hat, rsc_hat, _ = empirical_crossing_rates(spec)
            for p, p_hat in ((pl, lsc_hat), (pr, rsc_hat)):
                sd = math.sqrt(p * (1.0 - p) / trials)
                worst_z = max(worst_z, abs(p_hat - p) / sd)
    _report(4, worst_z <= 3.0,
            f"8 source/noise combos x 2 directions at 1e7 draws: "
            f"worst |z| = {worst_z:.2f} (gate 3.0)")


@pytest.mark.xfail(
    strict=True,
    reason="literal mapped-power reference: 25-35 dB with D_max=1000 gives "
    "sigma_n in [5.8, 32.5] >= 0.58 d, far outside the high-SNR regime; the "
    "formula-vs-simulation gap is orders of magnitude, not 2%.")
def test_criterion_5_literal_mapped_reference():
    print("[acceptance] criterion 5 (literal mapped-power form): FAIL expected "
          "— sigma_n >= 0.58 d at the stated operating points")
    for db in (25.0, 30.0, 35.0):
        noise = snr_to_sigma(CFG1, SnrSpec.mapped(db))
        ana = mse_high_3d(CFG1, noise).total
        spec = SimulationSpec(config=CFG1, noise=noise, sources=SRC3,
                              sensor=Analog(), trials=1_000_000, seed=7)
        mc = run(spec).mse_sum
        assert abs(mc - ana) <= 0.02 * ana


def test_criterion_5_high_snr_oracle_equivalence():
    gaps = []
    for db in (25.0, 30.0, 35.0):
        noise = snr_to_sigma(CFG1, SnrSpec.source_power(db))
        ana = mse_high_3d(CFG1, noise).total
        spec = SimulationSpec(config=CFG1, noise=noise, sources=SRC3,
                              sensor=Analog(), trials=1_000_000, seed=7)
        mc = run(spec).mse_sum
        gaps.append(abs(mc - ana) / ana)
    _report(5, all(g <= 0.02 for g in gaps),
            "analytic vs simulated within 2% at 25/30/35 dB (source-power "
            f"reference): gaps {[f'{100*g:.2f}%' for g in gaps]}; literal "
            "mapped-power form recorded as strict xfail")


@pytest.mark.xfail(
    strict=True,
    reason="literal mapped-power reference: 0 dB with D_max=2000-3000 "
    "gives sigma_n around 58 d; every formula regime is invalid there.")
def test_criterion_6_literal_mapped_reference():
    print("[acceptance] criterion 6 (literal mapped-power form): FAIL expected "
          "— sigma_n ~ 58 d at the stated operating points")
    for d_max in (2000.0, 3000.0):
        cfg = build_config(3, [1.0, 1.0, 1.0], [10, 10], d_max)
        noise = snr_to_sigma(cfg, SnrSpec.mapped(0.0))
        sx = x_source_from_s1(cfg, Uniform(0.0, 1.0))
        ana = mse_low_3d(cfg, noise, sx).total
        spec = SimulationSpec(config=cfg, noise=noise, sources=SRC3,
                              sensor=Analog(), trials=1_000_000, seed=11)
        mc = run(spec).mse_sum
        assert abs(ana - mc) <= 0.15 * mc


def test_criterion_6_low_snr_model_adequacy():
    details = []
    ok = True
    for d_max in (2000.0, 3000.0):
        cfg = build_config(3, [1.0, 1.0, 1.0], [10, 10], d_max)
        noise = snr_to_sigma(cfg, SnrSpec.source_power(0.0))
        sx = x_source_from_s1(cfg, Uniform(0.0, 1.0))
        ana_def = mse_low_3d(cfg, noise, sx).total
        ana_cw = mse_low_3d(cfg, noise, sx, case_weighted=True).total
        spec = SimulationSpec(config=cfg, noise=noise, sources=SRC3,
                              sensor=Analog(), trials=2_000_000, seed=11)
        mc = run(spec).mse_sum
        gap_def = abs(ana_def - mc) / mc
        gap_cw = abs(ana_cw - mc) / mc
        ok = ok and gap_def <= 0.15 and gap_cw <= gap_def + 5e-4
        details.append(f"D={d_max:.0f}: default {100*gap_def:.2f}%, "
                       f"case-weighted {100*gap_cw:.2f}%")
    _report(6, ok,
            "low-SNR model within 15% and case-weighted no wider (0 dB, "
            f"source-power reference): {'; '.join(details)}; literal "
            "mapped-power form recorded as strict xfail")


def test_criterion_7_structural_claims():
    # (a) interior minimum of the L-sweep
    sweep = SweepSpec(n_dims=3, ranges=(1.0, 1.0, 1.0), d_max=3000.0,
                      snr=SnrSpec.mapped(30.0),
                      l_ranges=((2, 40, 1), (2, 40, 1)),
                      objective=AnalyticHigh())
    res = grid_search(sweep)
    a_ok = all(2 < l < 40 for l in res.argmin)
    # (b) swap symmetry when R_2 = R_3
    surface = {e.levels: e.mse for e in res.grid}
    b_ok = all(math.isclose(mse, surface[(l2, l1)], rel_tol=1e-12)
               for (l1, l2), mse in surface.items())
    b_ok = b_ok and res.argmin[0] == res.argmin[1]
    # (c) argmin non-decreasing in D_max and SNR (strictly varying under the
    # source-power reference, flat in D_max under the mapped reference)
    sweep_src = SweepSpec(n_dims=3, ranges=(1.0, 1.0, 1.0), d_max=3000.0,
                          snr=SnrSpec.source_power(30.0),
                          l_ranges=((2, 40, 1), (2, 40, 1)),
                          objective=AnalyticHigh())
    c_ok = True
    for sw in (sweep, sweep_src):
        rows = optimal_l_trend(sw, [1000.0, 2000.0, 3000.0], [25.0, 30.0, 35.0])
        table = {(r.d_max, r.snr_db): r.argmin for r in rows}
        for snr_db in (25.0, 30.0, 35.0):
            seq = [table[(dm, snr_db)] for dm in (1000.0, 2000.0, 3000.0)]
            c_ok = c_ok and all(x <= y for a, b in zip(seq, seq[1:])
                                for x, y in zip(a, b))
        for dm in (1000.0, 2000.0, 3000.0):
            seq = [table[(dm, s)] for s in (25.0, 30.0, 35.0)]
            c_ok = c_ok and all(x <= y for a, b in zip(seq, seq[1:])
                                for x, y in zip(a, b))
    # (d) equal-L argmin non-increasing in N at fixed D_max
    d_ok = True
    for sw in (sweep, sweep_src):
        rows = optimal_l_vs_dims(sw, [3, 4, 5], [3000.0])
        ls = [r.argmin[0] for r in rows]
        d_ok = d_ok and ls[0] >= ls[1] >= ls[2]
    _report(7, a_ok and b_ok and c_ok and d_ok,
            f"interior argmin {res.argmin}; surface swap-symmetric; trends "
            "monotone in D_max/SNR under both references; equal-L argmin "
            "non-increasing in N")


def test_criterion_8_analog_vs_digital_ordering():
    # analytic path: the gap is the ADC term, bitwise, in both regimes
    exact_ok = True
    for d_max in (1000.0, 3000.0):
        cfg = build_config(3, [1.0, 1.0, 1.0], [10, 10], d_max)
        noise_hi = snr_to_sigma(cfg, SnrSpec.source_power(30.0))
        noise_lo = snr_to_sigma(cfg, SnrSpec.source_power(0.0))
        sx = x_source_from_s1(cfg, Uniform(0.0, 1.0))
        for n_bits in (3, 5):
            adc = adc_mse_term(1.0, n_bits)
            hi_a = mse_high_3d(cfg, noise_hi)
            hi_d = mse_high_digital(cfg, noise_hi, n_bits)
            lo_a = mse_low_3d(cfg, noise_lo, sx)
            lo_d = mse_low_digital(cfg, noise_lo, sx, n_bits)
            exact_ok = exact_ok and hi_d.total == hi_a.total + adc
            exact_ok = exact_ok and lo_d.total == lo_a.total + adc
    # simulated path: common random numbers isolate the sensing difference
    cfg = build_config(3, [1.0, 1.0, 1.0], [32, 32], 1000.0)
    noise = snr_to_sigma(cfg, SnrSpec.source_power(30.0))
    base = dict(config=cfg, noise=noise, sources=SRC3, trials=1_000_000, seed=3)
    ra = run(SimulationSpec(sensor=Analog(), **base))
    gaps = {}
    hw5 = 0.0
    for n_bits in (3, 5):
        rd = run(SimulationSpec(sensor=Digital(n_bits=n_bits), **base))
        gaps[n_bits] = rd.mse_sum - ra.mse_sum
        if n_bits == 5:
            hw5 = ra.ci_halfwidth + rd.ci_halfwidth
    adc5 = adc_mse_term(1.0, 5)
    sim5_ok = abs(gaps[5] - adc5) <= hw5
    ratio = gaps[3] / gaps[5]
    _report(8, exact_ok and sim5_ok and ratio >= 10.0,
            f"analytic gap == ADC term bitwise (both regimes); simulated "
            f"5-bit gap within CI of the constant (|diff| "
            f"{abs(gaps[5]-adc5):.1e} <= {hw5:.1e}); 3-bit/5-bit ratio "
            f"{ratio:.1f} >= 10")


def test_criterion_9_cli_byte_determinism(tmp_path, monkeypatch):
    outs = []
    sim_argv = ["simulate", "--dmax", "1000", "--sigma", "0.02", "--levels",
                "10,10", "--trials", "200000", "--seed", "6"]
    opt_argv = ["optimize", "--dmax", "1000", "--snr", "30", "--snr-ref",
                "source", "--l-range", "9:11", "--mode", "mc", "--trials",
                "100000", "--seed", "6"]
    for threads in ("1", "4"):
        monkeypatch.setenv("AJSCC_THREADS", threads)
        pair = []
        for name, argv in (("sim", sim_argv), ("opt", opt_argv)):
            path = tmp_path / f"{name}_{threads}.csv"
            assert cli_main(argv + ["--out", str(path)]) == 0
            pair.append(path.read_bytes())
        outs.append(pair)
    same = outs[0][0] == outs[1][0] and outs[0][1] == outs[1][1]
    _report(9, same,
            "simulate and optimize CSVs byte-identical under "
            "AJSCC_THREADS=1 vs 4")
