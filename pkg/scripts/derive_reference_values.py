"""Independent high-precision evaluation of the reference numbers frozen
into the test suite. Uses mpmath only (no package code), so it acts as an
oracle for the package's own arithmetic.

Run: python3 scripts/derive_reference_values.py
"""

import mpmath as mp

mp.mp.dps = 40
pi = mp.pi


def gamma_mhz(x):
    return 2 * pi * mp.mpf(x) * mp.mpf("1e-3")


g129 = -gamma_mhz("11.860156")
g131 = gamma_mhz("3.515769")
D = mp.mpf("0.45")


def main():
    out = {}
    out["high_pressure_example"] = gamma_mhz("11.86") * 20000 * 1 / D
    out["lambda_from_depolarization"] = mp.mpf(3) * 1 * mp.mpf("1e-7") / (4 * mp.mpf("1e-5"))
    out["R0"] = g129 / g131
    out["gamma_bar_mhz"] = g129 * g131 / (g131 - g129) / (2 * pi * mp.mpf("1e-3"))

    # series constants by direct summation with an Euler-Maclaurin style tail
    S1 = mp.nsum(lambda n: mp.fsum((n**2 + p**2) / (n**4 * p**4 * (n**2 - p**2) ** 2)
                                   for p in range(1, int(n))), [2, 400])
    S1 += mp.nsum(lambda n: mp.fsum((n**2 + p**2) / (n**4 * p**4 * (n**2 - p**2) ** 2)
                                    for p in range(1, int(n))), [401, 800])
    out["S1_partial_800"] = S1

    # root of the even branch x sin(x/2) = lam cos(x/2) for lam = 1e-2
    lam = mp.mpf("1e-2")
    x0 = mp.findroot(lambda x: x * mp.sin(x / 2) - lam * mp.cos(x / 2), mp.sqrt(2 * lam))
    out["kappa0L_lam_1e-2"] = x0
    x1 = mp.findroot(lambda x: x * mp.cos(x / 2) + lam * mp.sin(x / 2), pi + 2 * lam / pi)
    out["kappa1L_lam_1e-2"] = x1

    # fundamental wall rate, D = 0.45, L = 0.8, lam = 5.3e-3
    lw = mp.mpf("5.3e-3")
    xw = mp.findroot(lambda x: x * mp.sin(x / 2) - lw * mp.cos(x / 2), mp.sqrt(2 * lw))
    out["wall_rate_exact"] = 3 * D * (xw / mp.mpf("0.8")) ** 2

    # chi1 from the 800-row partial sum of S1 is accurate to ~1e-12 relative
    chi1 = S1 / (16 * pi**10) + mp.mpf(1) / 23950080
    dgd = g129**2 / D**2 - g131**2 / D**2
    X = abs((mp.mpf("13.0e-3") - mp.mpf("5.3e-3")) / (90 * chi1 * 100 * dgd))
    out["Lc_fixed_point"] = X ** (mp.mpf(1) / 8)
    out["Lc_inner_L_1cm"] = X ** (mp.mpf(1) / 7)
    gb = g129 * g131 / (g131 - g129)
    dl = mp.mpf("13.0e-3") - mp.mpf("5.3e-3")
    out["dOmega_quad1_L2_Hz"] = dl / 2 * gb * 10 * 8 / 90 / (2 * pi)
    out["dOmega_quad3_L2_Hz"] = -chi1 * dgd * gb * 1000 * 2**10 / (2 * pi)

    # Rb density (Alcock liquid branch) at 110 C and 90 C, cm^-3
    kB = mp.mpf("1.380649e-23")
    for tc in ("90", "110"):
        T = mp.mpf(tc) + mp.mpf("273.15")
        P = mp.power(10, mp.mpf("5.006") + mp.mpf("4.312") - 4040 / T)
        out[f"n_Rb_{tc}C"] = P / (kB * T) * mp.mpf("1e-6")

    # wall rate of the reference 129Xe parameters at 110 C
    kmev = mp.mpf("8.617333262e-2")
    out["Gamma_w_110C"] = mp.mpf("1.23e-3") * mp.exp(mp.mpf("95.4") / (kmev * (110 + mp.mpf("273.15"))))

    for k, v in out.items():
        print(f"{k} = {mp.nstr(v, 17)}")


if __name__ == "__main__":
    main()
