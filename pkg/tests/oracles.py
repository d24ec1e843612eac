"""Frozen high-precision reference values for the test suite.

All constants below were computed independently of the package with
40-digit mpmath arithmetic: the reserve parameter by bracketed root finding
on a(1 - ln a) = mu, integrals by adaptive Gauss-Legendre quadrature with
explicit splits at the removable point.  They are frozen here so the tests
never trust the code path they are checking.
"""

# roots of a(1 - ln a) = mu and derived closed forms
A_MU_03 = 0.087229170207357954824
A_MU_05 = 0.18668230885083704212
A_MU_075 = 0.38240356960216003157

LAM_MU_05 = 0.96918896507937169436
GUARANTEE_MU_03 = 0.16684941227965168502
GUARANTEE_MU_05 = 0.33851433326379477401
GUARANTEE_MU_075 = 0.61857464915984601141
H_AT_A_MU_05 = 0.48459448253968584718

# reserve CDF and density at reference points (mu = 0.5)
H_AT_HALF_MU_05 = 0.76188227691647459414
HPRIME_AT_A_MU_05 = 1.2979121736888488051

# integrals of the reserve CDF (mu = 0.5)
INT_H_TO_HALF_MU_05 = 0.25868143782178437963
INT_H_TO_ONE_MU_05 = 0.70463202671519981379
MEAN_RESERVE_MU_05 = 0.29536797328480018621  # 1 - integral over [0, 1]

# no-signal dominated-play revenue at mu = 0.5
DOMINATED_MU_05 = 0.12225970063645291744

# three-point prior admissibility threshold at mu = 0.5: 2 a ln 2
MPS_THRESHOLD_MU_05 = 0.25879663208075723916

# pivot of the integrated-CDF gap in the mu = 0.75 worked example
PIVOT_MU_075 = 0.51503313433216910456  # 1 - sqrt(1 - 2a)

# signal quantile at u = 0.5 for mu = 0.5 (a / 0.5)
SIGNAL_QUANTILE_HALF_MU_05 = 0.37336461770167408425
